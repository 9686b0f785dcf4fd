//! Contour integrals of `fθ`: periods, orbit-closure targets, flux and residues.

mod quadrature;

pub use quadrature::{integrate, Quadrature, DEFAULT_TOL, MAX_SUBDIVISIONS};

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Path, PathSystem, DEFAULT_MARGIN};
use crate::error::{Error, Result};
use crate::linalg::{complexify, im_part, max_abs, re_part, CVec, RVec, C64};
use crate::symgroup::ElementRef;
use crate::wdata::WeierstrassData;

/// `∫_path h(z) dz`, each piece integrated adaptively with its share of `tol`.
pub fn integrate_path<F>(h: F, path: &Path, tol: f64) -> Result<Quadrature>
where
    F: Fn(C64) -> CVec,
{
    let share = tol / path.pieces().len().max(1) as f64;
    let mut total: Option<Quadrature> = None;
    for piece in path.pieces() {
        let q = integrate(|s| h(piece.point(s)) * piece.velocity(s), 0.0, 1.0, share)?;
        total = Some(match total {
            None => q,
            Some(t) => Quadrature {
                value: t.value + q.value,
                error: t.error + q.error,
                evaluations: t.evaluations + q.evaluations,
            },
        });
    }
    total.ok_or_else(|| Error::InvalidInput("empty path".into()))
}

/// Points where `fθ` may be singular: punctures, poles of `f`, poles of `θ`.
pub fn singular_points(data: &WeierstrassData) -> Vec<C64> {
    let mut out: Vec<C64> = data.domain.punctures().to_vec();
    out.extend(data.f.poles().iter().map(|p| p.0));
    if data.theta.order_at(C64::new(0.0, 0.0)) < 0 {
        out.push(C64::new(0.0, 0.0));
    }
    out
}

/// `∫_path fθ`, refusing paths closer than the default margin to a singular point.
pub fn integrate_form(data: &WeierstrassData, path: &Path, tol: f64) -> Result<Quadrature> {
    for q in singular_points(data) {
        let d = path.distance_to(q);
        if d < DEFAULT_MARGIN {
            return Err(Error::PathMargin { distance: d, margin: DEFAULT_MARGIN });
        }
    }
    integrate_path(|z| data.form_at(z), path, tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathRole {
    Loop,
    Connector,
    Marked,
    Translate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodEntry {
    pub id: String,
    pub role: PathRole,
    pub value: CVec,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodVector {
    pub loops: Vec<PeriodEntry>,
    pub connectors: Vec<PeriodEntry>,
    pub marked: Vec<PeriodEntry>,
    /// Loops moved by group elements, obtained as `dg · ∫_γ fθ`.
    pub translates: Vec<PeriodEntry>,
}

impl PeriodVector {
    pub fn max_error(&self) -> f64 {
        self.integrated().map(|e| e.error).fold(0.0, f64::max)
    }

    /// Directly integrated entries in equation order: loops, connectors, marked.
    pub fn integrated(&self) -> impl Iterator<Item = &PeriodEntry> {
        self.loops.iter().chain(&self.connectors).chain(&self.marked)
    }
}

/// Integrates every loop, connector and marked connector of `paths`.
pub fn period_vector(data: &WeierstrassData, paths: &PathSystem, tol: f64) -> Result<PeriodVector> {
    let jobs: Vec<(String, PathRole, &Path)> = paths
        .loops
        .iter()
        .enumerate()
        .map(|(i, l)| (format!("loop[{i}]"), PathRole::Loop, &l.path))
        .chain(
            paths
                .connectors
                .iter()
                .map(|c| (format!("connector[{}]", c.element.label()), PathRole::Connector, &c.path)),
        )
        .chain(paths.marked.iter().enumerate().map(|(i, m)| (format!("marked[{i}]"), PathRole::Marked, &m.path)))
        .collect();
    let results: Vec<Result<PeriodEntry>> = jobs
        .par_iter()
        .map(|(id, role, path)| {
            let q = integrate_form(data, path, tol)?;
            Ok(PeriodEntry { id: id.clone(), role: *role, value: q.value, error: q.error })
        })
        .collect();
    let mut out =
        PeriodVector { loops: Vec::new(), connectors: Vec::new(), marked: Vec::new(), translates: Vec::new() };
    for r in results {
        let e = r?;
        match e.role {
            PathRole::Loop => out.loops.push(e),
            PathRole::Connector => out.connectors.push(e),
            _ => out.marked.push(e),
        }
    }
    for entry in &paths.orbit_map {
        if matches!(entry.element, ElementRef::Index(0)) {
            continue;
        }
        let dg = complexify(&data.space_action.motion(&entry.element)?.linear());
        let base = &out.loops[entry.loop_index];
        out.translates.push(PeriodEntry {
            id: format!("loop[{}]·{}", entry.loop_index, entry.element.label()),
            role: PathRole::Translate,
            value: dg * &base.value,
            error: base.error,
        });
    }
    Ok(out)
}

/// Real-period, orbit-closure, flux and marked-value targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodTarget {
    /// Real parts of loop periods (zero vectors).
    pub loops: Vec<RVec>,
    /// `g·v − v` per connector.
    pub connectors: Vec<RVec>,
    /// Imaginary parts of loop periods, when prescribed.
    pub flux: Option<Vec<RVec>>,
    /// `F(a) − v` per marked connector.
    pub marked: Vec<RVec>,
}

impl PeriodTarget {
    /// Targets making `F = v + Re ∫ fθ` well defined and equivariant.
    pub fn standard(data: &WeierstrassData, paths: &PathSystem) -> Result<Self> {
        let n = data.dim();
        let v = &data.base_value;
        let connectors = paths
            .connectors
            .iter()
            .map(|c| Ok(data.space_action.motion(&c.element)?.apply(v) - v))
            .collect::<Result<Vec<_>>>()?;
        Ok(PeriodTarget { loops: vec![RVec::zeros(n); paths.loops.len()], connectors, flux: None, marked: Vec::new() })
    }

    /// Adds flux targets, checking that each is fixed by the stabiliser of its puncture.
    pub fn with_flux(mut self, data: &WeierstrassData, paths: &PathSystem, flux: Vec<RVec>) -> Result<Self> {
        if flux.len() != paths.loops.len() {
            return Err(Error::IncompatibleFlux(format!("{} targets for {} loops", flux.len(), paths.loops.len())));
        }
        for (l, phi) in paths.loops.iter().zip(&flux) {
            if phi.len() != data.dim() {
                return Err(Error::IncompatibleFlux(format!("target has {} components", phi.len())));
            }
            for h in data.domain_action.stabiliser(l.puncture) {
                let dh = data.space_action.motion(&h)?.linear();
                let moved = &dh * phi;
                if max_abs(&(&moved - phi)) > 1e-9 * (1.0 + max_abs(phi)) {
                    return Err(Error::IncompatibleFlux(format!(
                        "target at {} is not fixed by {}",
                        l.puncture,
                        h.label()
                    )));
                }
            }
        }
        self.flux = Some(flux);
        Ok(self)
    }

    /// Number of real equations for an `n`-dimensional target.
    pub fn equation_count(&self, n: usize) -> usize {
        let loops = self.loops.len() * if self.flux.is_some() { 2 } else { 1 };
        n * (loops + self.connectors.len() + self.marked.len())
    }
}

/// Real equation vector: per loop `Re 𝒫` (then `Im 𝒫 − flux` when prescribed),
/// then `Re ∫ − target` per connector and per marked connector.
pub fn residual_vector(pv: &PeriodVector, target: &PeriodTarget) -> RVec {
    let mut out: Vec<f64> = Vec::new();
    for (i, e) in pv.loops.iter().enumerate() {
        out.extend((re_part(&e.value) - &target.loops[i]).iter());
        if let Some(flux) = &target.flux {
            out.extend((im_part(&e.value) - &flux[i]).iter());
        }
    }
    for (e, t) in pv.connectors.iter().zip(&target.connectors) {
        out.extend((re_part(&e.value) - t).iter());
    }
    for (e, t) in pv.marked.iter().zip(&target.marked) {
        out.extend((re_part(&e.value) - t).iter());
    }
    RVec::from_vec(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub real_period: f64,
    pub orbit_closure: f64,
    pub flux: Option<f64>,
    pub marked: f64,
    pub quadrature_error: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.real_period.max(self.orbit_closure).max(self.flux.unwrap_or(0.0)).max(self.marked)
    }
}

pub fn residuals_of(pv: &PeriodVector, target: &PeriodTarget) -> Residuals {
    let sup = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0, f64::max);
    let real_period = sup(&mut pv.loops.iter().zip(&target.loops).map(|(e, t)| max_abs(&(re_part(&e.value) - t))));
    let orbit_closure =
        sup(&mut pv.connectors.iter().zip(&target.connectors).map(|(e, t)| max_abs(&(t - re_part(&e.value)))));
    let flux = target
        .flux
        .as_ref()
        .map(|fl| sup(&mut pv.loops.iter().zip(fl).map(|(e, t)| max_abs(&(im_part(&e.value) - t)))));
    let marked = sup(&mut pv.marked.iter().zip(&target.marked).map(|(e, t)| max_abs(&(re_part(&e.value) - t))));
    Residuals { real_period, orbit_closure, flux, marked, quadrature_error: pv.max_error() }
}

/// Max-norm residuals of the period conditions.
pub fn residuals(data: &WeierstrassData, paths: &PathSystem, target: &PeriodTarget, tol: f64) -> Result<Residuals> {
    Ok(residuals_of(&period_vector(data, paths, tol)?, target))
}

pub const RESIDUE_DISCREPANCY_TOL: f64 = 1e-9;

/// `(1/2πi) ∮ fθ` over the circle of the given radius about a declared puncture,
/// cross-checked on the circle of half that radius.
pub fn residue_at_puncture(data: &WeierstrassData, p: C64, radius: f64) -> Result<CVec> {
    if !data.domain.punctures().iter().any(|q| (q - p).norm() <= 1e-12) {
        return Err(Error::InvalidInput(format!("{p} is not a declared puncture")));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidInput("residue radius must be positive".into()));
    }
    let others = singular_points(data)
        .into_iter()
        .filter(|q| (q - p).norm() > 1e-12)
        .map(|q| (q - p).norm())
        .fold(f64::INFINITY, f64::min);
    let room = others.min(data.domain.boundary_distance(p));
    if radius >= room {
        return Err(Error::PathMargin { distance: room - radius, margin: DEFAULT_MARGIN });
    }
    let scale = C64::new(0.0, 2.0 * PI).inv();
    let a = integrate_path(|z| data.form_at(z), &Path::circle(p, radius), 1e-13)?.value * scale;
    let b = integrate_path(|z| data.form_at(z), &Path::circle(p, 0.5 * radius), 1e-13)?.value * scale;
    let discrepancy = (&a - &b).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if discrepancy > RESIDUE_DISCREPANCY_TOL {
        return Err(Error::ResidueDiscrepancy { discrepancy });
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_path_system, build_path_system_with, DomainKind, PathOptions, PlanarDomain};
    use crate::linalg::{c, cmax_abs, I};
    use crate::wdata::gallery;

    fn scalar_loop(m: i32) -> CVec {
        integrate_path(|z| CVec::from_vec(vec![z.powi(m) / z]), &Path::circle(c(0.0, 0.0), 1.0), 1e-13).unwrap().value
    }

    #[test]
    fn unit_circle_monomials() {
        for m in -3..=3 {
            let v = scalar_loop(m)[0];
            let exact = if m == 0 { c(0.0, 2.0 * PI) } else { c(0.0, 0.0) };
            assert!((v - exact).norm() <= 1e-12, "m = {m}: {v}");
        }
    }

    #[test]
    fn exact_form_on_closed_loop() {
        let v = integrate_path(|z| CVec::from_vec(vec![2.0 * z]), &Path::circle(c(0.3, 0.1), 0.7), 1e-13).unwrap();
        assert!(v.value[0].norm() <= 1e-12);
    }

    #[test]
    fn catenoid_loop_period() {
        let d = gallery::catenoid(6).unwrap();
        let paths = build_path_system(&d.domain, &d.domain_action, d.basepoint).unwrap();
        let pv = period_vector(&d, &paths, DEFAULT_TOL).unwrap();
        assert_eq!(pv.loops.len(), 1);
        let want = CVec::from_vec(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 2.0 * PI)]);
        assert!(cmax_abs(&(&pv.loops[0].value - want)) <= 1e-10);
        assert!(pv.loops[0].error <= DEFAULT_TOL);
        assert_eq!(pv.translates.len(), 5);
    }

    #[test]
    fn z2_connector_matches_antiderivative() {
        let d = gallery::catenoid(2).unwrap();
        let paths = build_path_system(&d.domain, &d.domain_action, d.basepoint).unwrap();
        let pv = period_vector(&d, &paths, DEFAULT_TOL).unwrap();
        // G = (−(1/z + z)/2, i(z − 1/z)/2, log z) along the upper half circle
        let g = |z: C64| CVec::from_vec(vec![-(z.inv() + z) / 2.0, I * (z - z.inv()) / 2.0, z.ln()]);
        let want = g(c(-1.0, 0.0)) - g(c(1.0, 0.0));
        assert!(cmax_abs(&(&pv.connectors[0].value - &want)) <= 1e-10);
        let target = PeriodTarget::standard(&d, &paths).unwrap();
        assert!(max_abs(&(re_part(&want) - &target.connectors[0])) <= 1e-12);
    }

    #[test]
    fn gallery_residuals_vanish() {
        for d in [gallery::catenoid(6).unwrap(), gallery::enneper(2).unwrap(), gallery::helicoid(2.0 * PI).unwrap()] {
            let paths = build_path_system(&d.domain, &d.domain_action, d.basepoint).unwrap();
            let target = PeriodTarget::standard(&d, &paths).unwrap();
            let r = residuals(&d, &paths, &target, DEFAULT_TOL).unwrap();
            assert!(r.max() <= 1e-10, "{}: {r:?}", d.domain.label());
        }
    }

    #[test]
    fn enneper_has_no_loops() {
        let d = gallery::enneper(2).unwrap();
        let paths = build_path_system(&d.domain, &d.domain_action, d.basepoint).unwrap();
        assert!(period_vector(&d, &paths, DEFAULT_TOL).unwrap().loops.is_empty());
    }

    #[test]
    fn flux_residual_is_homogeneous() {
        let d = gallery::catenoid(6).unwrap();
        let paths = build_path_system(&d.domain, &d.domain_action, d.basepoint).unwrap();
        let flux = vec![RVec::from_vec(vec![0.0, 0.0, 2.0 * PI])];
        let target = PeriodTarget::standard(&d, &paths).unwrap().with_flux(&d, &paths, flux).unwrap();
        let r1 = residuals(&d, &paths, &target, DEFAULT_TOL).unwrap();
        assert!(r1.flux.unwrap() <= 1e-10);
        let r2 = residuals(&d.scaled(c(2.0, 0.0)), &paths, &target, DEFAULT_TOL).unwrap();
        assert!((r2.flux.unwrap() - 2.0 * PI).abs() <= 1e-9);
    }

    #[test]
    fn incompatible_flux_is_rejected() {
        let d = gallery::catenoid(6).unwrap();
        let paths = build_path_system(&d.domain, &d.domain_action, d.basepoint).unwrap();
        let flux = vec![RVec::from_vec(vec![1.0, 0.0, 0.0])];
        let r = PeriodTarget::standard(&d, &paths).unwrap().with_flux(&d, &paths, flux);
        assert!(matches!(r, Err(Error::IncompatibleFlux(_))));
    }

    #[test]
    fn trivial_simply_connected_is_vacuous() {
        let d = gallery::flat_plane().unwrap();
        let paths = build_path_system(&d.domain, &d.domain_action, d.basepoint).unwrap();
        let target = PeriodTarget::standard(&d, &paths).unwrap();
        let r = residuals(&d, &paths, &target, DEFAULT_TOL).unwrap();
        assert_eq!(r.max(), 0.0);
        assert_eq!(target.equation_count(3), 0);
    }

    #[test]
    fn translates_match_direct_integration() {
        let d = gallery::catenoid(3).unwrap();
        let paths = build_path_system(&d.domain, &d.domain_action, d.basepoint).unwrap();
        let pv = period_vector(&d, &paths, DEFAULT_TOL).unwrap();
        for (entry, t) in
            paths.orbit_map.iter().filter(|e| !matches!(e.element, ElementRef::Index(0))).zip(&pv.translates)
        {
            let m = d.domain_action.map(&entry.element).unwrap();
            let moved = paths.loops[entry.loop_index].path.transform(&m);
            let direct = integrate_form(&d, &moved, DEFAULT_TOL).unwrap().value;
            assert!(cmax_abs(&(direct - &t.value)) <= 2.0 * DEFAULT_TOL);
        }
    }

    #[test]
    fn homotopic_loops_agree() {
        let d = gallery::catenoid(6).unwrap();
        let a = build_path_system(&d.domain, &d.domain_action, d.basepoint).unwrap();
        let opts = PathOptions { loop_radius_scale: 0.37, ..PathOptions::default() };
        let b = build_path_system_with(&d.domain, &d.domain_action, d.basepoint, opts).unwrap();
        let pa = integrate_form(&d, &a.loops[0].path, DEFAULT_TOL).unwrap().value;
        let pb = integrate_form(&d, &b.loops[0].path, DEFAULT_TOL).unwrap().value;
        assert!(cmax_abs(&(pa - pb)) <= 2.0 * DEFAULT_TOL);
    }

    #[test]
    fn residues() {
        let d = gallery::catenoid(6).unwrap();
        let r = residue_at_puncture(&d, c(0.0, 0.0), 0.5).unwrap();
        assert!(cmax_abs(&(r - CVec::from_vec(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]))) <= 1e-12);
        // constant data on C*: removable
        let domain = PlanarDomain::new(DomainKind::PuncturedPlane, vec![c(0.0, 0.0)], "c*").unwrap();
        let mut flat = gallery::flat_plane().unwrap();
        flat.domain = domain.clone();
        flat.basepoint = c(1.0, 0.0);
        assert!(cmax_abs(&residue_at_puncture(&flat, c(0.0, 0.0), 0.5).unwrap()) <= 1e-14);
        assert!(residue_at_puncture(&flat, c(2.0, 0.0), 0.5).is_err());
    }

    #[test]
    fn double_pole_has_zero_residue() {
        use crate::domain::{DomainAction, InvariantOneForm};
        use crate::series::Series;
        use crate::symgroup::SpaceAction;
        use crate::wdata::MeromorphicMap;
        let domain = PlanarDomain::new(DomainKind::PuncturedPlane, vec![c(0.0, 0.0)], "c*").unwrap();
        let f = MeromorphicMap::new(vec![Series::monomial(c(1.0, 0.0), -2), Series::monomial(I, -2), Series::zero()])
            .unwrap();
        let d = WeierstrassData::new(
            f,
            InvariantOneForm::dz(),
            domain,
            DomainAction::trivial(),
            SpaceAction::trivial(3),
            c(1.0, 0.0),
            RVec::zeros(3),
        )
        .unwrap();
        assert!(cmax_abs(&residue_at_puncture(&d, c(0.0, 0.0), 0.3).unwrap()) <= 1e-13);
    }
}
