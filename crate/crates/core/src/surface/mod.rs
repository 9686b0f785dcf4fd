//! The immersion `F = v + Re ∫ fθ`, its verification and export.

mod diff;
mod mesh;
mod report;

pub use diff::{
    completeness_probe, completeness_probe_metric, conformality_and_harmonicity, conformality_of_map, curvature,
    gauss_curvature, total_curvature, CompletenessReport, CompletenessVerdict, ConformalityReport, CurvatureReport,
    End, ProbeRow, RayTable, Truncation, DOUBLING_RATIO, LAMBDA_FLOOR,
};
pub use mesh::{
    export_mesh, mesh_export, sha256_hex, write_obj, write_ply, ExportedFile, GridSpec, MeshGrid, SurfaceMesh,
};
pub use report::{diagnose, DiagnosticsOptions, DiagnosticsReport, Figure, SCHEMA};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{build_path_system, Path, PathSystem, DEFAULT_MARGIN};
use crate::error::{Error, Result};
use crate::linalg::{im_part, max_abs, numerical_rank, re_part, singular_values, CVec, RMat, RVec, C64};
use crate::periods::{integrate_path, period_vector};
use crate::sampling::sample_domain;
use crate::solver::{is_flat, FeasibilityReport};
use crate::wdata::WeierstrassData;

pub const NONDEGENERACY_REL_TOL: f64 = 1e-8;

/// Points where `fθ` itself is singular: punctures and a pole of the Laurent
/// form at the origin. Poles of `f` cancelled by zeros of `θ` are excluded.
pub fn form_singularities(data: &WeierstrassData) -> Vec<C64> {
    let mut out = data.domain.punctures().to_vec();
    let origin = C64::new(0.0, 0.0);
    let singular_at_origin = data.core_form().iter().filter_map(|s| s.order_at_zero()).min().is_some_and(|o| o < 0);
    if singular_at_origin && out.iter().all(|p| p.norm() > 1e-12) {
        out.push(origin);
    }
    for &(p, _) in data.f.poles() {
        if p.norm() > 1e-12 && out.iter().all(|q| (q - p).norm() > 1e-12) {
            out.push(p);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub point: C64,
    pub value: RVec,
}

/// `F(x) = v + Re ∫_{x₀}^{x} fθ` with a cache of values at anchor points.
#[derive(Clone, Debug)]
pub struct ImmersionField {
    data: WeierstrassData,
    paths: PathSystem,
    tol: f64,
    singular: Vec<C64>,
    anchors: Vec<Anchor>,
}

impl ImmersionField {
    pub fn new(data: WeierstrassData, paths: PathSystem, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidInput("integration tolerance must be positive".into()));
        }
        let singular = form_singularities(&data);
        let anchors = vec![Anchor { point: data.basepoint, value: data.base_value.clone() }];
        Ok(ImmersionField { data, paths, tol, singular, anchors })
    }

    /// Field with the default path system of the data.
    pub fn from_data(data: WeierstrassData, tol: f64) -> Result<Self> {
        let paths = build_path_system(&data.domain, &data.domain_action, data.basepoint)?;
        Self::new(data, paths, tol)
    }

    pub fn data(&self) -> &WeierstrassData {
        &self.data
    }

    pub fn paths(&self) -> &PathSystem {
        &self.paths
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn singularities(&self) -> &[C64] {
        &self.singular
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    /// `∫_path fθ`, refusing paths that pass too close to a singularity.
    pub fn integrate(&self, path: &Path) -> Result<CVec> {
        for &q in &self.singular {
            let d = path.distance_to(q);
            if d < DEFAULT_MARGIN {
                return Err(Error::PathMargin { distance: d, margin: DEFAULT_MARGIN });
            }
        }
        Ok(integrate_path(|z| self.data.form_at(z), path, self.tol)?.value)
    }

    fn check_point(&self, x: C64) -> Result<()> {
        if !self.data.domain.contains(x) {
            return Err(Error::InvalidInput(format!("{x} is not in the domain")));
        }
        Ok(())
    }

    fn nearest_anchor(&self, x: C64) -> &Anchor {
        self.anchors
            .iter()
            .min_by(|a, b| (a.point - x).norm().total_cmp(&(b.point - x).norm()))
            .expect("the basepoint is always an anchor")
    }

    /// Adds anchors in order, each integrated from the nearest existing one.
    pub fn add_anchors(&mut self, points: &[C64]) -> Result<()> {
        for &p in points {
            let value = self.evaluate(p)?;
            self.anchors.push(Anchor { point: p, value });
        }
        Ok(())
    }

    /// `F(x)` from the nearest anchor along an obstacle-avoiding route.
    pub fn evaluate(&self, x: C64) -> Result<RVec> {
        self.check_point(x)?;
        let a = self.nearest_anchor(x);
        if a.point == x {
            return Ok(a.value.clone());
        }
        let path = self.paths.route_between(a.point, x);
        Ok(&a.value + re_part(&self.integrate(&path)?))
    }

    /// `F` at the end of `path`, which must start at the basepoint.
    pub fn evaluate_via(&self, path: &Path) -> Result<RVec> {
        if (path.start() - self.data.basepoint).norm() > 1e-12 {
            return Err(Error::InvalidInput("path must start at the basepoint".into()));
        }
        self.check_point(path.end())?;
        Ok(&self.data.base_value + re_part(&self.integrate(path)?))
    }

    /// `F(b) − F(a)` along the default route between them.
    pub fn difference(&self, a: C64, b: C64) -> Result<RVec> {
        Ok(re_part(&self.integrate(&self.paths.route_between(a, b))?))
    }

    pub fn evaluate_many(&self, xs: &[C64]) -> Result<Vec<RVec>> {
        xs.par_iter().map(|&x| self.evaluate(x)).collect()
    }

    /// Discrepancy between two routes from the basepoint to `x` passing on
    /// either side of the straight segment.
    pub fn two_path_discrepancy(&self, x: C64) -> Result<f64> {
        self.check_point(x)?;
        let x0 = self.data.basepoint;
        let d = x - x0;
        if d.norm() == 0.0 {
            return Ok(0.0);
        }
        let mid = x0 + d * 0.5;
        let normal = d * C64::new(0.0, 0.5);
        let mut values = Vec::new();
        for w in [mid + normal, mid - normal] {
            if !self.data.domain.contains(w) || self.singular.iter().any(|q| (q - w).norm() < 4.0 * DEFAULT_MARGIN) {
                continue;
            }
            let path = self.paths.route_between(x0, w).then(&self.paths.route_between(w, x));
            values.push(self.evaluate_via(&path)?);
        }
        let direct = self.evaluate_via(&self.paths.route_to(x))?;
        Ok(values.iter().map(|v| max_abs(&(v - &direct))).fold(0.0, f64::max))
    }
}

/// `max ‖F(g·x) − g·F(x)‖` over the generators and `samples`.
pub fn immersion_equivariance_residual(field: &ImmersionField, samples: &[C64]) -> Result<f64> {
    let data = field.data();
    let gens = data.space_action.group().generator_refs();
    let mut worst = 0.0_f64;
    for g in &gens {
        let map = data.domain_action.map(g)?;
        let motion = data.space_action.motion(g)?;
        let r = samples
            .par_iter()
            .map(|&x| -> Result<f64> {
                let fx = field.evaluate(x)?;
                let fgx = field.evaluate(map.apply(x))?;
                Ok((fgx - motion.apply(&fx)).norm())
            })
            .collect::<Result<Vec<f64>>>()?;
        worst = r.into_iter().fold(worst, f64::max);
    }
    Ok(worst)
}

/// Samples kept away from singularities and from the image of the basepoint's routes.
pub fn field_samples(field: &ImmersionField, n: usize, seed: u64, margin: f64) -> Vec<C64> {
    sample_domain(&field.data().domain, n, seed, margin)
        .into_iter()
        .filter(|z| field.singularities().iter().all(|q| (q - z).norm() >= margin))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointValue {
    pub point: C64,
    pub value: RVec,
    /// `‖g·F(p) − F(p)‖` for the stabiliser generator.
    pub stabiliser_residual: f64,
    /// `max(|F(p)·u|, |F(p)·v|)` for the certificate frame; orthogonal actions only.
    pub frame_residual: Option<f64>,
}

/// Values of `F` at the fixed points of a feasible action.
pub fn fixed_point_values(field: &ImmersionField, report: &FeasibilityReport) -> Result<Vec<FixedPointValue>> {
    let data = field.data();
    let orthogonal = data.space_action.is_orthogonal();
    let mut out = Vec::new();
    for v in &report.fixed_points {
        if !data.domain.contains(v.point) {
            continue;
        }
        let value = field.evaluate(v.point)?;
        let g = data.space_action.motion(&v.generator)?;
        let stabiliser_residual = (g.apply(&value) - &value).norm();
        let frame_residual = match (orthogonal, v.search.certificate()) {
            (true, Some(cert)) => Some(value.dot(&cert.u).abs().max(value.dot(&cert.v).abs())),
            _ => None,
        };
        out.push(FixedPointValue { point: v.point, value, stabiliser_residual, frame_residual });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NondegeneracyReport {
    pub rank: usize,
    pub dim: usize,
    pub samples: usize,
    pub singular_values: Vec<f64>,
    pub nondegenerate: bool,
    pub nonflat: bool,
}

/// Affine rank of `F` over `samples`.
pub fn nondegeneracy_check(field: &ImmersionField, samples: &[C64]) -> Result<NondegeneracyReport> {
    let n = field.dim();
    if samples.len() < n + 1 {
        return Err(Error::InvalidInput(format!("need at least {} samples, got {}", n + 1, samples.len())));
    }
    let values = field.evaluate_many(samples)?;
    let mut m = RMat::zeros(n, values.len());
    for (j, v) in values.iter().enumerate() {
        m.set_column(j, v);
    }
    let mean = m.column_mean();
    for mut col in m.column_iter_mut() {
        col -= &mean;
    }
    let s = singular_values(&m);
    let rank = numerical_rank(&s, NONDEGENERACY_REL_TOL);
    Ok(NondegeneracyReport {
        rank,
        dim: n,
        samples: values.len(),
        singular_values: s,
        nondegenerate: rank == n,
        nonflat: !is_flat(field.data()),
    })
}

/// Holomorphic null curve `H = v + ∫ fθ` with `Re H = F`.
#[derive(Clone, Debug)]
pub struct NullCurve<'a> {
    field: &'a ImmersionField,
    /// Imaginary loop periods, one per homology loop.
    pub flux: Vec<RVec>,
    /// Largest real loop period.
    pub real_period: f64,
    pub max_flux: f64,
    pub obstruction: bool,
}

impl NullCurve<'_> {
    /// `H(x)` along the default route from the basepoint.
    pub fn evaluate(&self, x: C64) -> Result<CVec> {
        let field = self.field;
        field.check_point(x)?;
        let h0 = crate::linalg::complexify_vec(&field.data().base_value);
        if x == field.data().basepoint {
            return Ok(h0);
        }
        Ok(h0 + field.integrate(&field.paths().route_to(x))?)
    }
}

/// Builds `H`; a nonzero loop flux beyond `flux_tol` is reported as an obstruction.
pub fn null_curve(field: &ImmersionField, flux_tol: f64) -> Result<NullCurve<'_>> {
    let pv = period_vector(field.data(), field.paths(), field.tol())?;
    let flux: Vec<RVec> = pv.loops.iter().map(|e| im_part(&e.value)).collect();
    let real_period = pv.loops.iter().map(|e| max_abs(&re_part(&e.value))).fold(0.0, f64::max);
    let max_flux = flux.iter().map(max_abs).fold(0.0, f64::max);
    Ok(NullCurve { field, flux, real_period, max_flux, obstruction: max_flux > flux_tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::solver::feasibility_check;
    use crate::wdata::gallery;
    use std::f64::consts::PI;

    fn field(d: WeierstrassData) -> ImmersionField {
        ImmersionField::from_data(d, 1e-12).unwrap()
    }

    fn enneper_closed_form(z: C64) -> RVec {
        // antiderivative of ((1 − z²)/2, i(1 + z²)/2, z) with the base value absorbed
        let z3 = z * z * z;
        RVec::from_vec(vec![((z - z3 / 3.0) / 2.0).re, (c(0.0, 1.0) * (z + z3 / 3.0) / 2.0).re, (z * z / 2.0).re])
    }

    #[test]
    fn basepoint_maps_to_base_value() {
        let f = field(gallery::catenoid(6).unwrap());
        assert_eq!(f.evaluate(c(1.0, 0.0)).unwrap(), RVec::from_vec(vec![-1.0, 0.0, 0.0]));
    }

    #[test]
    fn enneper_matches_antiderivative() {
        let f = field(gallery::enneper(1).unwrap());
        for z in [c(0.3, 0.4), c(-0.7, 0.2), c(0.0, 0.0), c(1.5, -1.1)] {
            let d = (f.evaluate(z).unwrap() - enneper_closed_form(z)).amax();
            assert!(d < 1e-9, "{z}: {d}");
        }
    }

    #[test]
    fn catenoid_circles_have_constant_radius() {
        let f = field(gallery::catenoid(6).unwrap());
        for r in [0.4, 1.0, 2.5] {
            let radii: Vec<f64> = (0..12)
                .map(|j| {
                    let x = f.evaluate(C64::from_polar(r, 0.3 + j as f64 * PI / 6.0)).unwrap();
                    (x[0] * x[0] + x[1] * x[1]).sqrt()
                })
                .collect();
            let expected = (r + 1.0 / r) / 2.0;
            for q in radii {
                assert!((q - expected).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn anchors_do_not_change_values() {
        let mut f = field(gallery::catenoid(6).unwrap());
        let x = c(-0.8, 1.3);
        let before = f.evaluate(x).unwrap();
        f.add_anchors(&[c(0.0, 1.0), c(-1.0, 1.0)]).unwrap();
        assert!((f.evaluate(x).unwrap() - before).amax() < 1e-12);
        assert_eq!(f.anchors().len(), 3);
    }

    #[test]
    fn two_paths_agree() {
        for d in [gallery::catenoid(6).unwrap(), gallery::enneper(2).unwrap()] {
            let f = field(d);
            for x in [c(-1.2, 0.3), c(0.4, -0.9)] {
                assert!(f.two_path_discrepancy(x).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn puncture_is_refused() {
        let f = field(gallery::catenoid(6).unwrap());
        assert!(f.evaluate(c(0.0, 0.0)).is_err());
        assert!(matches!(f.evaluate(c(1e-5, 0.0)), Err(Error::PathMargin { .. })));
    }

    #[test]
    fn gallery_surfaces_are_equivariant() {
        for d in [gallery::catenoid(6).unwrap(), gallery::enneper(2).unwrap(), gallery::helicoid(2.0 * PI).unwrap()] {
            let f = field(d);
            let s = field_samples(&f, 300, 5, 0.05);
            let r = immersion_equivariance_residual(&f, &s).unwrap();
            assert!(r <= 1e-9, "{r}");
        }
    }

    #[test]
    fn trivial_group_has_zero_residual() {
        let f = field(gallery::flat_plane().unwrap());
        assert_eq!(immersion_equivariance_residual(&f, &[c(0.3, 0.2)]).unwrap(), 0.0);
    }

    #[test]
    fn wrong_base_value_breaks_equivariance() {
        let d = gallery::catenoid(6).unwrap();
        let d = d.with_base_value(RVec::from_vec(vec![-2.0, 0.0, 0.0]));
        let f = field(d);
        // |gv − v − Re P| = |g·(−1,0,0) − (−1,0,0)| = 1 for the 60° rotation
        let r = immersion_equivariance_residual(&f, &[c(1.0, 0.0)]).unwrap();
        assert!((r - 1.0).abs() < 1e-9, "{r}");
    }

    #[test]
    fn enneper_fixed_point_value() {
        let d = gallery::enneper(2).unwrap();
        let rep = feasibility_check(&d.domain, &d.domain_action, &d.space_action).unwrap();
        let f = field(d);
        let v = fixed_point_values(&f, &rep).unwrap();
        assert_eq!(v.len(), 1);
        assert!(v[0].stabiliser_residual < 1e-10);
        assert!(v[0].frame_residual.unwrap() < 1e-10);
    }

    #[test]
    fn nondegeneracy_ranks() {
        let f = field(gallery::catenoid(6).unwrap());
        let s = field_samples(&f, 64, 3, 0.1);
        let r = nondegeneracy_check(&f, &s).unwrap();
        assert_eq!(r.rank, 3);
        assert!(r.nondegenerate && r.nonflat);
        let f = field(gallery::flat_plane().unwrap());
        let s = field_samples(&f, 64, 3, 0.1);
        let r = nondegeneracy_check(&f, &s).unwrap();
        assert_eq!(r.rank, 2);
        assert!(!r.nondegenerate && !r.nonflat);
        assert!(nondegeneracy_check(&f, &s[..3]).is_err());
    }

    #[test]
    fn null_curves() {
        let f = field(gallery::enneper(1).unwrap());
        let h = null_curve(&f, 1e-9).unwrap();
        assert!(!h.obstruction && h.flux.is_empty());
        for z in [c(0.3, 0.4), c(-1.0, 0.5)] {
            let d = (re_part(&h.evaluate(z).unwrap()) - f.evaluate(z).unwrap()).amax();
            assert!(d <= 1e-12, "{d}");
        }
        let f = field(gallery::catenoid(6).unwrap());
        let h = null_curve(&f, 1e-9).unwrap();
        assert!(h.obstruction);
        let expected = RVec::from_vec(vec![0.0, 0.0, 2.0 * PI]);
        assert!((&h.flux[0] - expected).amax() < 1e-9);
        assert!(h.real_period < 1e-10);
    }
}
