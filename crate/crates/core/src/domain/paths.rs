use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{fixed_point_set, AffineMap, DomainAction, PlanarDomain};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::symgroup::{ElementRef, GroupStructure};

pub const DEFAULT_MARGIN: f64 = 1e-3;
const ENDPOINT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PathPiece {
    Segment {
        a: C64,
        b: C64,
    },
    /// `center + radius·e^{i(start + s·sweep)}`, `s ∈ [0, 1]`.
    Arc {
        center: C64,
        radius: f64,
        start: f64,
        sweep: f64,
    },
}

impl PathPiece {
    pub fn point(&self, s: f64) -> C64 {
        match *self {
            PathPiece::Segment { a, b } => a + (b - a) * s,
            PathPiece::Arc { center, radius, start, sweep } => center + C64::from_polar(radius, start + s * sweep),
        }
    }

    /// `dz/ds`.
    pub fn velocity(&self, s: f64) -> C64 {
        match *self {
            PathPiece::Segment { a, b } => b - a,
            PathPiece::Arc { radius, start, sweep, .. } => {
                C64::new(0.0, sweep) * C64::from_polar(radius, start + s * sweep)
            }
        }
    }

    pub fn start(&self) -> C64 {
        match *self {
            PathPiece::Segment { a, .. } => a,
            PathPiece::Arc { center, radius, start, .. } => center + C64::from_polar(radius, start),
        }
    }

    pub fn end(&self) -> C64 {
        match *self {
            PathPiece::Segment { b, .. } => b,
            PathPiece::Arc { center, radius, start, sweep } => center + C64::from_polar(radius, start + sweep),
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            PathPiece::Segment { a, b } => (b - a).norm(),
            PathPiece::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    pub fn transform(&self, m: &AffineMap) -> PathPiece {
        match *self {
            PathPiece::Segment { a, b } => PathPiece::Segment { a: m.apply(a), b: m.apply(b) },
            PathPiece::Arc { center, radius, start, sweep } => {
                PathPiece::Arc { center: m.apply(center), radius: radius * m.a.norm(), start: start + m.a.arg(), sweep }
            }
        }
    }

    pub fn reversed(&self) -> PathPiece {
        match *self {
            PathPiece::Segment { a, b } => PathPiece::Segment { a: b, b: a },
            PathPiece::Arc { center, radius, start, sweep } => {
                PathPiece::Arc { center, radius, start: start + sweep, sweep: -sweep }
            }
        }
    }

    /// Exact Euclidean distance from `p` to the piece.
    pub fn distance_to(&self, p: C64) -> f64 {
        match *self {
            PathPiece::Segment { a, b } => {
                let d = b - a;
                let l2 = d.norm_sqr();
                if l2 == 0.0 {
                    return (p - a).norm();
                }
                let t = (((p - a) * d.conj()).re / l2).clamp(0.0, 1.0);
                (a + d * t - p).norm()
            }
            PathPiece::Arc { center, radius, start, sweep } => {
                let w = p - center;
                if w.norm() > 0.0 {
                    // angle of p measured from `start` in the sweep direction
                    let rel = (w.arg() - start) * sweep.signum();
                    let rel = rel.rem_euclid(2.0 * PI);
                    if rel <= sweep.abs() {
                        return (w.norm() - radius).abs();
                    }
                } else {
                    return radius;
                }
                (self.start() - p).norm().min((self.end() - p).norm())
            }
        }
    }
}

/// Piecewise smooth path made of segments and circular arcs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pieces: Vec<PathPiece>,
}

impl Path {
    pub fn new(pieces: Vec<PathPiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidInput("empty path".into()));
        }
        for w in pieces.windows(2) {
            if (w[0].end() - w[1].start()).norm() > 1e-9 {
                return Err(Error::InvalidInput("path pieces are not contiguous".into()));
            }
        }
        Ok(Path { pieces })
    }

    pub fn segment(a: C64, b: C64) -> Self {
        Path { pieces: vec![PathPiece::Segment { a, b }] }
    }

    pub fn circle(center: C64, radius: f64) -> Self {
        Path { pieces: vec![PathPiece::Arc { center, radius, start: 0.0, sweep: 2.0 * PI }] }
    }

    pub fn arc(center: C64, radius: f64, start: f64, sweep: f64) -> Self {
        Path { pieces: vec![PathPiece::Arc { center, radius, start, sweep }] }
    }

    pub fn pieces(&self) -> &[PathPiece] {
        &self.pieces
    }

    pub fn start(&self) -> C64 {
        self.pieces[0].start()
    }

    pub fn end(&self) -> C64 {
        self.pieces[self.pieces.len() - 1].end()
    }

    pub fn is_closed(&self) -> bool {
        (self.start() - self.end()).norm() <= 1e-9
    }

    pub fn length(&self) -> f64 {
        self.pieces.iter().map(PathPiece::length).sum()
    }

    pub fn transform(&self, m: &AffineMap) -> Path {
        Path { pieces: self.pieces.iter().map(|p| p.transform(m)).collect() }
    }

    pub fn reversed(&self) -> Path {
        Path { pieces: self.pieces.iter().rev().map(PathPiece::reversed).collect() }
    }

    pub fn then(mut self, other: &Path) -> Path {
        self.pieces.extend_from_slice(&other.pieces);
        self
    }

    pub fn distance_to(&self, p: C64) -> f64 {
        self.pieces.iter().map(|q| q.distance_to(p)).fold(f64::INFINITY, f64::min)
    }

    /// Smallest distance from the path to the boundary of the base region, sampled.
    pub fn boundary_clearance(&self, domain: &PlanarDomain) -> f64 {
        let mut m = f64::INFINITY;
        for p in &self.pieces {
            for j in 0..=64 {
                m = m.min(domain.boundary_distance(p.point(j as f64 / 64.0)));
            }
        }
        m
    }
}

/// Winding number of a closed path about `p` by the discretised argument principle.
pub fn winding_number(path: &Path, p: C64) -> i64 {
    let mut total = 0.0;
    for piece in path.pieces() {
        let n = 512;
        let mut prev = piece.point(0.0) - p;
        for j in 1..=n {
            let cur = piece.point(j as f64 / n as f64) - p;
            total += (cur / prev).arg();
            prev = cur;
        }
    }
    (total / (2.0 * PI)).round() as i64
}

/// Segment from `a` to `b` with circular detours around obstacles.
///
/// Each obstacle `q` is avoided at radius `min(rho, |a−q|/2, |b−q|/2)`.
pub(crate) fn route(a: C64, b: C64, obstacles: &[C64], rho: f64) -> Path {
    let mut pieces = Vec::new();
    let mut cur = a;
    for _ in 0..=obstacles.len() {
        let d = b - cur;
        let len = d.norm();
        if len == 0.0 {
            break;
        }
        let mut best: Option<(f64, f64, C64, f64)> = None;
        for &q in obstacles {
            let r = rho.min(0.5 * (a - q).norm()).min(0.5 * (b - q).norm());
            if r <= 0.0 {
                continue;
            }
            let t = ((q - cur) * d.conj()).re / (len * len);
            let dist = (cur + d * t - q).norm();
            if dist >= r * (1.0 - 1e-9) {
                continue;
            }
            let half = (r * r - dist * dist).sqrt() / len;
            let (te, tx) = (t - half, t + half);
            if te <= 1e-12 || tx >= 1.0 {
                continue;
            }
            if best.is_none_or(|(bt, ..)| te < bt) {
                best = Some((te, tx, q, r));
            }
        }
        let Some((te, tx, q, r)) = best else { break };
        let entry = cur + d * te;
        let exit = cur + d * tx;
        pieces.push(PathPiece::Segment { a: cur, b: entry });
        let start = (entry - q).arg();
        let mut sweep = ((exit - q) / (entry - q)).arg();
        if (sweep.abs() - PI).abs() < 1e-9 {
            sweep = PI;
        }
        pieces.push(PathPiece::Arc { center: q, radius: r, start, sweep });
        cur = q + C64::from_polar(r, start + sweep);
    }
    pieces.push(PathPiece::Segment { a: cur, b });
    Path { pieces }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathOptions {
    pub margin: f64,
    /// Multiplies every loop radius (for fresh-path cross-checks).
    pub loop_radius_scale: f64,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions { margin: DEFAULT_MARGIN, loop_radius_scale: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopRecord {
    pub puncture: C64,
    pub path: Path,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectorRecord {
    pub element: ElementRef,
    pub path: Path,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkedRecord {
    pub point: C64,
    pub path: Path,
}

/// Loop `loop_index` moved by `element` encircles the orbit member `center`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitEntry {
    pub loop_index: usize,
    pub element: ElementRef,
    pub center: C64,
}

/// Homology loops (one per puncture orbit), connectors `x₀ → g·x₀` per
/// generator, and optional connectors to marked points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSystem {
    pub basepoint: C64,
    pub loops: Vec<LoopRecord>,
    pub connectors: Vec<ConnectorRecord>,
    pub marked: Vec<MarkedRecord>,
    pub orbit_map: Vec<OrbitEntry>,
    pub obstacles: Vec<C64>,
    pub detour_radius: f64,
    pub margin: f64,
}

impl PathSystem {
    /// Path from the basepoint to `x` avoiding punctures and fixed points.
    pub fn route_to(&self, x: C64) -> Path {
        route(self.basepoint, x, &self.obstacles, self.detour_radius)
    }

    pub fn route_between(&self, a: C64, b: C64) -> Path {
        route(a, b, &self.obstacles, self.detour_radius)
    }

    /// Adds a connector from the basepoint to a marked point.
    pub fn add_marked(&mut self, point: C64, domain: &PlanarDomain) -> Result<usize> {
        if !domain.contains(point) {
            return Err(Error::InvalidInput(format!("marked point {point} is not in the domain")));
        }
        let path = self.route_to(point);
        check_margin(&path, &self.obstacles, domain, self.margin, Some(point))?;
        self.marked.push(MarkedRecord { point, path });
        Ok(self.marked.len() - 1)
    }

    pub fn min_clearance(&self) -> f64 {
        let paths = self.loops.iter().map(|l| &l.path).chain(self.connectors.iter().map(|c| &c.path));
        paths.flat_map(|p| self.obstacles.iter().map(move |q| p.distance_to(*q))).fold(f64::INFINITY, f64::min)
    }
}

fn check_margin(path: &Path, obstacles: &[C64], domain: &PlanarDomain, margin: f64, end: Option<C64>) -> Result<()> {
    for &q in obstacles {
        if end.is_some_and(|e| (e - q).norm() < 4.0 * margin) {
            continue;
        }
        let d = path.distance_to(q);
        if d < margin {
            return Err(Error::PathMargin { distance: d, margin });
        }
    }
    if domain.is_bounded() || matches!(domain.kind(), super::DomainKind::Strip { .. }) {
        let d = path.boundary_clearance(domain);
        if d < margin {
            return Err(Error::PathMargin { distance: d, margin });
        }
    }
    Ok(())
}

pub fn build_path_system(domain: &PlanarDomain, action: &DomainAction, basepoint: C64) -> Result<PathSystem> {
    build_path_system_with(domain, action, basepoint, PathOptions::default())
}

pub fn build_path_system_with(
    domain: &PlanarDomain,
    action: &DomainAction,
    basepoint: C64,
    opts: PathOptions,
) -> Result<PathSystem> {
    if !domain.contains(basepoint) {
        return Err(Error::InvalidInput(format!("basepoint {basepoint} is not in the domain")));
    }
    if let Some(g) = action.stabiliser(basepoint).first() {
        return Err(Error::StabilisedBasepoint { element: g.label() });
    }
    let mut obstacles: Vec<C64> = domain.punctures().to_vec();
    for rec in fixed_point_set(domain, action) {
        obstacles.push(rec.point);
    }
    if obstacles.iter().any(|q| (q - basepoint).norm() < opts.margin) {
        return Err(Error::PathMargin { distance: domain.puncture_distance(basepoint), margin: opts.margin });
    }
    let mut sep = f64::INFINITY;
    for (i, p) in obstacles.iter().enumerate() {
        for q in &obstacles[..i] {
            sep = sep.min((p - q).norm());
        }
    }
    let detour_radius = (0.3 * sep).min(0.25).max(opts.margin * 2.0);

    // Loops: one per puncture orbit.
    let mut loops = Vec::new();
    let mut orbit_map = Vec::new();
    let mut covered: Vec<C64> = Vec::new();
    for &p in domain.punctures() {
        if covered.iter().any(|q| (q - p).norm() <= 1e-9) {
            continue;
        }
        let orbit = match action.group() {
            GroupStructure::Finite(_) => action.orbit(p).unwrap_or_else(|| vec![p]),
            GroupStructure::Discrete { .. } => {
                return Err(Error::UnsupportedAction("punctures under an infinite group".into()))
            }
        };
        covered.extend(orbit.iter().copied());
        let others =
            obstacles.iter().filter(|q| (*q - p).norm() > 1e-9).map(|q| (q - p).norm()).fold(f64::INFINITY, f64::min);
        let mut r = (basepoint - p).norm();
        if others.is_finite() {
            r = r.min(0.5 * others);
        }
        r = r.min(0.5 * domain.boundary_distance(p)) * opts.loop_radius_scale;
        let path = Path::circle(p, r);
        check_margin(&path, &obstacles, domain, opts.margin, None)?;
        let index = loops.len();
        if let GroupStructure::Finite(t) = action.group() {
            for g in 0..t.order() {
                orbit_map.push(OrbitEntry {
                    loop_index: index,
                    element: ElementRef::Index(g),
                    center: action.maps()[g].apply(p),
                });
            }
        }
        loops.push(LoopRecord { puncture: p, path });
    }

    // Connectors: basepoint to its image under each generator.
    let mut connectors = Vec::new();
    for g in action.group().generator_refs() {
        let m = action.map(&g)?;
        let target = m.apply(basepoint);
        let candidate = match m.fixed_point() {
            Some(c) => {
                let w = basepoint - c;
                let arc = Path::arc(c, w.norm(), w.arg(), m.a.arg());
                if check_margin(&arc, &obstacles, domain, opts.margin, None).is_ok() {
                    Some(arc)
                } else {
                    None
                }
            }
            None => None,
        };
        let path = match candidate {
            Some(p) => p,
            None => {
                let p = route(basepoint, target, &obstacles, detour_radius);
                check_margin(&p, &obstacles, domain, opts.margin, None)?;
                p
            }
        };
        if (path.end() - target).norm() > ENDPOINT_TOL * (1.0 + target.norm()) {
            return Err(Error::InvalidInput("connector misses its endpoint".into()));
        }
        connectors.push(ConnectorRecord { element: g, path });
    }

    Ok(PathSystem {
        basepoint,
        loops,
        connectors,
        marked: Vec::new(),
        orbit_map,
        obstacles,
        detour_radius,
        margin: opts.margin,
    })
}

/// Deterministic basepoint with trivial stabiliser, clear of punctures and the boundary.
pub fn default_basepoint(domain: &PlanarDomain, action: &DomainAction) -> Result<C64> {
    let mut candidates = vec![C64::new(0.0, 0.0)];
    let scale = match domain.kind() {
        super::DomainKind::Disk { radius } => 0.5 * radius,
        super::DomainKind::Annulus { r_in, r_out } => 0.5 * (r_in + r_out),
        _ => 1.0,
    };
    for r in [1.0, 0.75, 1.25, 0.6, 1.5, 0.4, 2.0] {
        for ang in [0.0, 0.13, 0.29, 0.41] {
            candidates.push(C64::from_polar(r * scale, ang * PI));
        }
    }
    for z in candidates {
        if domain.boundary_distance(z) < 0.1 * scale || domain.puncture_distance(z) < 0.1 * scale {
            continue;
        }
        if !action.stabiliser(z).is_empty() {
            continue;
        }
        if build_path_system(domain, action, z).is_ok() {
            return Ok(z);
        }
    }
    Err(Error::InvalidInput("no admissible basepoint found".into()))
}
