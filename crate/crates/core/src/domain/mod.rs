//! Planar domains with a holomorphic affine group action.

mod oneform;
mod paths;

pub use oneform::{invariant_one_form, InvariantOneForm};
pub use paths::{
    build_path_system, build_path_system_with, default_basepoint, winding_number, ConnectorRecord, LoopRecord,
    MarkedRecord, OrbitEntry, Path, PathOptions, PathPiece, PathSystem, DEFAULT_MARGIN,
};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::symgroup::{resolve, ElementRef, FiniteGroupTable, GroupStructure};

const MAP_TOL: f64 = 1e-12;
const POINT_TOL: f64 = 1e-9;

/// `z ↦ a·z + b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub a: C64,
    pub b: C64,
}

impl AffineMap {
    pub fn new(a: C64, b: C64) -> Result<Self> {
        if a.norm() == 0.0 || !a.re.is_finite() || !a.im.is_finite() {
            return Err(Error::InvalidInput("affine map needs a finite nonzero linear part".into()));
        }
        Ok(AffineMap { a, b })
    }

    pub fn identity() -> Self {
        AffineMap { a: C64::new(1.0, 0.0), b: C64::new(0.0, 0.0) }
    }

    pub fn rotation(angle: f64) -> Self {
        AffineMap { a: C64::from_polar(1.0, angle), b: C64::new(0.0, 0.0) }
    }

    pub fn translation(b: C64) -> Self {
        AffineMap { a: C64::new(1.0, 0.0), b }
    }

    pub fn apply(&self, z: C64) -> C64 {
        self.a * z + self.b
    }

    /// Complex derivative (constant).
    pub fn derivative(&self) -> C64 {
        self.a
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        AffineMap { a: self.a * other.a, b: self.a * other.b + self.b }
    }

    pub fn inverse(&self) -> AffineMap {
        let ai = self.a.inv();
        AffineMap { a: ai, b: -self.b * ai }
    }

    pub fn distance(&self, other: &AffineMap) -> f64 {
        (self.a - other.a).norm().max((self.b - other.b).norm())
    }

    pub fn is_identity(&self) -> bool {
        self.distance(&AffineMap::identity()) <= MAP_TOL
    }

    pub fn is_translation(&self) -> bool {
        (self.a - 1.0).norm() <= MAP_TOL
    }

    pub fn fixed_point(&self) -> Option<C64> {
        if self.is_translation() {
            None
        } else {
            Some(self.b / (C64::new(1.0, 0.0) - self.a))
        }
    }

    /// Multiplicative order of the linear part as a root of unity.
    pub fn rotation_order(&self, max: usize) -> Option<usize> {
        let mut p = self.a;
        for k in 1..=max {
            if (p - 1.0).norm() <= 1e-9 {
                return Some(k);
            }
            p *= self.a;
        }
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    Plane,
    PuncturedPlane,
    Disk {
        radius: f64,
    },
    Annulus {
        r_in: f64,
        r_out: f64,
    },
    /// `lo < Im z < hi`.
    Strip {
        lo: f64,
        hi: f64,
    },
}

/// Genus-zero domain: a base region minus finitely many punctures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarDomain {
    kind: DomainKind,
    punctures: Vec<C64>,
    label: String,
}

impl PlanarDomain {
    pub fn new(kind: DomainKind, punctures: Vec<C64>, label: impl Into<String>) -> Result<Self> {
        match kind {
            DomainKind::Disk { radius } if !(radius > 0.0) => {
                return Err(Error::InvalidInput("disk radius must be positive".into()))
            }
            DomainKind::Annulus { r_in, r_out } if !(r_in >= 0.0 && r_out > r_in) => {
                return Err(Error::InvalidInput("annulus needs 0 ≤ r_in < r_out".into()))
            }
            DomainKind::Strip { lo, hi } if !(hi > lo) => {
                return Err(Error::InvalidInput("strip needs lo < hi".into()))
            }
            DomainKind::PuncturedPlane if punctures.is_empty() => {
                return Err(Error::InvalidInput("punctured plane needs at least one puncture".into()))
            }
            _ => {}
        }
        let d = PlanarDomain { kind, punctures: Vec::new(), label: label.into() };
        for (i, p) in punctures.iter().enumerate() {
            if d.boundary_distance(*p) <= 0.0 {
                return Err(Error::InvalidInput(format!("puncture {p} is not interior")));
            }
            if punctures[..i].iter().any(|q| (q - p).norm() <= POINT_TOL) {
                return Err(Error::InvalidInput(format!("puncture {p} is repeated")));
            }
        }
        Ok(PlanarDomain { punctures, ..d })
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn punctures(&self) -> &[C64] {
        &self.punctures
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self.kind, DomainKind::Disk { .. } | DomainKind::Annulus { .. })
    }

    /// Distance to the boundary of the base region (infinite for the plane).
    pub fn boundary_distance(&self, z: C64) -> f64 {
        match self.kind {
            DomainKind::Plane | DomainKind::PuncturedPlane => f64::INFINITY,
            DomainKind::Disk { radius } => radius - z.norm(),
            DomainKind::Annulus { r_in, r_out } => (z.norm() - r_in).min(r_out - z.norm()),
            DomainKind::Strip { lo, hi } => (z.im - lo).min(hi - z.im),
        }
    }

    pub fn puncture_distance(&self, z: C64) -> f64 {
        self.punctures.iter().map(|p| (z - p).norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, z: C64) -> bool {
        self.boundary_distance(z) > 0.0 && self.puncture_distance(z) > 0.0
    }

    fn invariant_under(&self, m: &AffineMap) -> bool {
        let ok = match self.kind {
            DomainKind::Plane | DomainKind::PuncturedPlane => true,
            DomainKind::Disk { .. } | DomainKind::Annulus { .. } => {
                (m.a.norm() - 1.0).abs() <= MAP_TOL && m.b.norm() <= MAP_TOL
            }
            DomainKind::Strip { .. } => m.is_translation() && m.b.im.abs() <= MAP_TOL,
        };
        ok && self.punctures.iter().all(|p| self.punctures.iter().any(|q| (m.apply(*p) - q).norm() <= POINT_TOL))
    }
}

/// Action of a group on a planar domain by affine automorphisms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainAction {
    group: GroupStructure,
    maps: Vec<AffineMap>,
}

impl DomainAction {
    /// `maps` has one entry per element (finite group) or per generator (discrete group).
    pub fn new(group: GroupStructure, maps: Vec<AffineMap>, domain: &PlanarDomain) -> Result<Self> {
        if maps.len() != group.motion_slots() {
            return Err(Error::InvalidInput(format!(
                "{} domain maps supplied, {} expected",
                maps.len(),
                group.motion_slots()
            )));
        }
        let action = DomainAction { group, maps };
        if let GroupStructure::Finite(t) = &action.group {
            if !action.maps[0].is_identity() {
                return Err(Error::GroupLaw("identity element does not act trivially".into()));
            }
            for g in 0..t.order() {
                for h in 0..t.order() {
                    let d = action.maps[g].compose(&action.maps[h]).distance(&action.maps[t.mul(g, h)]);
                    if d > MAP_TOL {
                        return Err(Error::GroupLaw(format!("domain action is not a homomorphism ({d:.2e})")));
                    }
                }
            }
        }
        for (i, m) in action.maps.iter().enumerate() {
            if !domain.invariant_under(m) {
                return Err(Error::UnsupportedAction(format!(
                    "map {i} (z ↦ ({})z + ({})) does not preserve the domain and its punctures",
                    m.a, m.b
                )));
            }
        }
        Ok(action)
    }

    pub fn trivial() -> Self {
        DomainAction { group: GroupStructure::trivial(), maps: vec![AffineMap::identity()] }
    }

    /// Z_k acting by `z ↦ e^{2πi/k} z`.
    pub fn rotation(k: usize, domain: &PlanarDomain) -> Result<Self> {
        let t = FiniteGroupTable::cyclic(k)?;
        let maps = (0..k).map(|j| AffineMap::rotation(2.0 * PI * j as f64 / k as f64)).collect();
        Self::new(GroupStructure::Finite(t), maps, domain)
    }

    /// Z acting by `z ↦ z + step`.
    pub fn translation(step: C64, word_length: usize, domain: &PlanarDomain) -> Result<Self> {
        if step.norm() == 0.0 {
            return Err(Error::InvalidInput("translation step must be nonzero".into()));
        }
        Self::new(GroupStructure::Discrete { generators: 1, word_length }, vec![AffineMap::translation(step)], domain)
    }

    pub fn group(&self) -> &GroupStructure {
        &self.group
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn map(&self, element: &ElementRef) -> Result<AffineMap> {
        resolve(&self.group, &self.maps, element, AffineMap::identity(), |a, b| a.compose(b), |a| a.inverse())
    }

    pub fn apply(&self, element: &ElementRef, z: C64) -> Result<C64> {
        Ok(self.map(element)?.apply(z))
    }

    pub fn is_free(&self) -> bool {
        self.group.check_elements().iter().all(|g| self.map(g).map(|m| m.is_translation()).unwrap_or(true))
    }

    /// Elements fixing `z` (identity excluded).
    pub fn stabiliser(&self, z: C64) -> Vec<ElementRef> {
        self.group
            .check_elements()
            .into_iter()
            .filter(|g| self.map(g).map(|m| (m.apply(z) - z).norm() <= POINT_TOL).unwrap_or(false))
            .collect()
    }

    /// Orbit of `z` under a finite group (`None` for discrete groups).
    pub fn orbit(&self, z: C64) -> Option<Vec<C64>> {
        let t = self.group.table()?;
        let mut out: Vec<C64> = Vec::new();
        for g in 0..t.order() {
            let w = self.maps[g].apply(z);
            if !out.iter().any(|q| (q - w).norm() <= POINT_TOL) {
                out.push(w);
            }
        }
        Some(out)
    }
}

/// A point with nontrivial (cyclic) stabiliser of order `order`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointRecord {
    pub point: C64,
    pub order: usize,
    /// Stabiliser generator acting as `ζ ↦ e^{2πi/k} ζ` in the chart.
    pub generator: ElementRef,
    /// Chart `ζ = z − point`.
    pub chart: AffineMap,
}

/// C (or C minus the Z_k-orbits of the seeds) with Z_k acting by rotation about 0.
pub fn build_rotation_domain(k: usize, seeds: &[C64]) -> Result<(PlanarDomain, DomainAction)> {
    if k == 0 {
        return Err(Error::InvalidInput("rotation order must be positive".into()));
    }
    let mut punctures: Vec<C64> = Vec::new();
    for (i, s) in seeds.iter().enumerate() {
        let orbit: Vec<C64> = if s.norm() <= POINT_TOL {
            vec![C64::new(0.0, 0.0)]
        } else {
            (0..k).map(|j| s * C64::from_polar(1.0, 2.0 * PI * j as f64 / k as f64)).collect()
        };
        if orbit.iter().any(|p| punctures.iter().any(|q| (p - q).norm() <= POINT_TOL)) {
            return Err(Error::OrbitCollision(format!("seed {i} ({s}) lies in an earlier orbit")));
        }
        punctures.extend(orbit);
    }
    let kind = if punctures.is_empty() { DomainKind::Plane } else { DomainKind::PuncturedPlane };
    let domain = PlanarDomain::new(kind, punctures, format!("rotation domain of order {k}"))?;
    let action = DomainAction::rotation(k, &domain)?;
    Ok((domain, action))
}

/// All points of the domain with nontrivial stabiliser.
pub fn fixed_point_set(domain: &PlanarDomain, action: &DomainAction) -> Vec<FixedPointRecord> {
    let mut points: Vec<C64> = Vec::new();
    for g in action.group().check_elements() {
        let Ok(m) = action.map(&g) else { continue };
        if let Some(p) = m.fixed_point() {
            if domain.contains(p) && !points.iter().any(|q| (q - p).norm() <= POINT_TOL) {
                points.push(p);
            }
        }
    }
    let mut out = Vec::new();
    for p in points {
        let stab = action.stabiliser(p);
        let order = match action.group() {
            GroupStructure::Finite(_) => stab.len() + 1,
            GroupStructure::Discrete { .. } => {
                stab.iter().filter_map(|g| action.map(g).ok().and_then(|m| m.rotation_order(64))).max().unwrap_or(1)
            }
        };
        let target = C64::from_polar(1.0, 2.0 * PI / order as f64);
        let generator =
            stab.iter().find(|g| action.map(g).map(|m| (m.a - target).norm() <= 1e-9).unwrap_or(false)).cloned();
        if let Some(generator) = generator {
            out.push(FixedPointRecord { point: p, order, generator, chart: AffineMap::translation(-p) });
        }
    }
    out.sort_by(|a, b| a.point.re.total_cmp(&b.point.re).then(a.point.im.total_cmp(&b.point.im)));
    out
}
