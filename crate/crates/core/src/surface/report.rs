//! Aggregated verification report for a field.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::diff::{
    completeness_probe, conformality_and_harmonicity, total_curvature, CompletenessReport, CurvatureReport, End,
    Truncation,
};
use super::{
    field_samples, fixed_point_values, immersion_equivariance_residual, nondegeneracy_check, null_curve,
    FixedPointValue, ImmersionField, NondegeneracyReport,
};
use crate::domain::DomainKind;
use crate::error::Result;
use crate::linalg::{RVec, C64};
use crate::periods::{residuals, PeriodTarget};
use crate::sampling::grid_points;
use crate::solver::FeasibilityReport;
use crate::wdata::{nullity_grid, nullity_residual};

pub const SCHEMA: &str = "equimin/1";

/// A measured figure with the tolerance it is judged against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Figure {
    pub value: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub pass: bool,
}

impl Figure {
    pub fn new(value: f64, tolerance: f64, samples: usize) -> Self {
        Figure { value, tolerance, samples, pass: value <= tolerance }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsOptions {
    pub equivariance_samples: usize,
    pub equivariance_tol: f64,
    pub seed: u64,
    pub sample_margin: f64,
    pub grid_n: usize,
    pub h_fd: f64,
    pub fd_tol: f64,
    pub nullity_grid_n: usize,
    pub nullity_tol: f64,
    pub period_tol: f64,
    pub quad_tol: f64,
    pub nondegeneracy_samples: usize,
    /// Truncation radius `R` for the default total-curvature truncations.
    pub truncation_radius: f64,
    pub truncations: Option<Vec<Truncation>>,
    pub curvature_cells: [usize; 2],
    pub curvature_tol: f64,
    pub completeness_rays: Vec<f64>,
    pub completeness_stages: usize,
    pub flux_tol: f64,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        DiagnosticsOptions {
            equivariance_samples: 10_000,
            equivariance_tol: 1e-9,
            seed: 7,
            sample_margin: 0.05,
            grid_n: 24,
            h_fd: 1e-4,
            fd_tol: 1e-6,
            nullity_grid_n: 200,
            nullity_tol: 1e-12,
            period_tol: 1e-10,
            quad_tol: 1e-12,
            nondegeneracy_samples: 64,
            truncation_radius: 100.0,
            truncations: None,
            curvature_cells: [64, 16],
            curvature_tol: 1e-6,
            completeness_rays: vec![0.1, 0.1 + PI / 2.0, 0.1 + PI, 0.1 + 1.5 * PI],
            completeness_stages: 12,
            flux_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub schema: String,
    pub equivariance: Figure,
    pub conformality: Figure,
    pub harmonicity: Figure,
    pub weierstrass_consistency: Figure,
    pub nullity: Figure,
    pub periods: Figure,
    pub path_independence: Figure,
    pub curvature_sign: Figure,
    pub nondegeneracy: NondegeneracyReport,
    pub total_curvature: Vec<CurvatureReport>,
    pub completeness: Vec<CompletenessReport>,
    pub fixed_points: Vec<FixedPointValue>,
    pub flux: Vec<RVec>,
    pub flux_obstruction: bool,
    pub feasibility: FeasibilityReport,
    /// Every residual figure passes; nondegeneracy is reported, not gated.
    pub passed: bool,
}

impl DiagnosticsReport {
    pub fn figures(&self) -> Vec<(&'static str, &Figure)> {
        vec![
            ("equivariance", &self.equivariance),
            ("conformality", &self.conformality),
            ("harmonicity", &self.harmonicity),
            ("weierstrass_consistency", &self.weierstrass_consistency),
            ("nullity", &self.nullity),
            ("periods", &self.periods),
            ("path_independence", &self.path_independence),
            ("curvature_sign", &self.curvature_sign),
        ]
    }

    pub fn failures(&self) -> Vec<String> {
        self.figures()
            .into_iter()
            .filter(|(_, f)| !f.pass)
            .map(|(name, f)| format!("{name}: {:.3e} > {:.1e}", f.value, f.tolerance))
            .collect()
    }
}

fn default_truncations(field: &ImmersionField, radius: f64) -> Vec<Truncation> {
    let data = field.data();
    let origin = C64::new(0.0, 0.0);
    if data.domain_action.group().is_finite() {
        match data.domain.kind() {
            DomainKind::Plane => return vec![Truncation { center: origin, r_in: 0.0, r_out: radius }],
            DomainKind::PuncturedPlane if data.domain.punctures().len() == 1 => {
                let c = data.domain.punctures()[0];
                return vec![Truncation { center: c, r_in: 1.0 / radius, r_out: radius }];
            }
            _ => {}
        }
    }
    Vec::new()
}

fn default_ends(field: &ImmersionField) -> Vec<End> {
    let data = field.data();
    let mut ends: Vec<End> = data.domain.punctures().iter().map(|&point| End::Finite { point }).collect();
    if matches!(data.domain.kind(), DomainKind::Plane | DomainKind::PuncturedPlane) {
        ends.push(End::Infinity);
    }
    ends
}

/// Runs every check on `field` against `target`.
pub fn diagnose(
    field: &ImmersionField,
    target: &PeriodTarget,
    feasibility: &FeasibilityReport,
    opts: &DiagnosticsOptions,
) -> Result<DiagnosticsReport> {
    let data = field.data();
    let samples = field_samples(field, opts.equivariance_samples, opts.seed, opts.sample_margin);
    let equivariance =
        Figure::new(immersion_equivariance_residual(field, &samples)?, opts.equivariance_tol, samples.len());

    // the FD grid stays a quarter unit from singularities so truncation error stays below tolerance
    let grid = grid_points(&data.domain, opts.grid_n, 0.25, field.singularities());
    let conf = conformality_and_harmonicity(field, &grid, opts.h_fd)?;
    let conformality = Figure::new(conf.conformal, opts.fd_tol, conf.samples);
    let harmonicity = Figure::new(conf.harmonic, opts.fd_tol, conf.samples);
    let weierstrass_consistency = Figure::new(conf.weierstrass.unwrap_or(0.0), opts.fd_tol, conf.samples);

    let ngrid = nullity_grid(data, opts.nullity_grid_n);
    let nullity = Figure::new(nullity_residual(|z| data.f_at(z), &ngrid), opts.nullity_tol, ngrid.len());

    let res = residuals(data, field.paths(), target, opts.quad_tol)?;
    let periods = Figure::new(res.max(), opts.period_tol, target.equation_count(data.dim()));

    let probes: Vec<C64> = samples.iter().take(16).copied().collect();
    let mut discrepancy = 0.0_f64;
    for &x in &probes {
        discrepancy = discrepancy.max(field.two_path_discrepancy(x)?);
    }
    let path_independence = Figure::new(discrepancy, 10.0 * opts.period_tol, probes.len());

    let nd_samples = field_samples(field, opts.nondegeneracy_samples, opts.seed ^ 0x5eed, 0.1);
    let nondegeneracy = nondegeneracy_check(field, &nd_samples)?;

    let truncations = opts.truncations.clone().unwrap_or_else(|| default_truncations(field, opts.truncation_radius));
    let [nr, na] = opts.curvature_cells;
    let total_curvature = truncations.iter().map(|t| total_curvature(data, *t, nr, na)).collect::<Result<Vec<_>>>()?;
    let grid_k = super::diff::curvature(data, &grid, C64::new(0.0, 0.0));
    let max_k =
        total_curvature.iter().map(|r| r.max_k).chain(grid_k.iter().map(|p| p.1)).fold(f64::NEG_INFINITY, f64::max);
    let k_samples = grid_k.len() + total_curvature.iter().map(|r| r.samples).sum::<usize>();
    let curvature_sign = Figure::new(max_k, opts.curvature_tol, k_samples);

    let completeness = default_ends(field)
        .into_iter()
        .map(|e| completeness_probe(field, e, &opts.completeness_rays, opts.completeness_stages))
        .collect::<Result<Vec<_>>>()?;

    let fixed_points = fixed_point_values(field, feasibility)?;
    let h = null_curve(field, opts.flux_tol)?;

    let mut report = DiagnosticsReport {
        schema: SCHEMA.into(),
        equivariance,
        conformality,
        harmonicity,
        weierstrass_consistency,
        nullity,
        periods,
        path_independence,
        curvature_sign,
        nondegeneracy,
        total_curvature,
        completeness,
        fixed_points,
        flux: h.flux.clone(),
        flux_obstruction: h.obstruction,
        feasibility: feasibility.clone(),
        passed: false,
    };
    report.passed = report.figures().iter().all(|(_, f)| f.pass);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::feasibility_check;
    use crate::wdata::gallery;

    fn quick() -> DiagnosticsOptions {
        DiagnosticsOptions {
            equivariance_samples: 200,
            nullity_grid_n: 40,
            grid_n: 10,
            curvature_cells: [24, 8],
            ..DiagnosticsOptions::default()
        }
    }

    #[test]
    fn gallery_reports_pass() {
        for d in [gallery::catenoid(6).unwrap(), gallery::enneper(2).unwrap(), gallery::helicoid(2.0 * PI).unwrap()] {
            let f = ImmersionField::from_data(d.clone(), 1e-12).unwrap();
            let target = PeriodTarget::standard(&d, f.paths()).unwrap();
            let feas = feasibility_check(&d.domain, &d.domain_action, &d.space_action).unwrap();
            let r = diagnose(&f, &target, &feas, &quick()).unwrap();
            assert!(r.passed, "{}: {:?}", d.domain.label(), r.failures());
            assert!(r.nondegeneracy.nondegenerate);
        }
    }

    #[test]
    fn flat_plane_is_flagged_degenerate() {
        let d = gallery::flat_plane().unwrap();
        let f = ImmersionField::from_data(d.clone(), 1e-12).unwrap();
        let target = PeriodTarget::standard(&d, f.paths()).unwrap();
        let feas = feasibility_check(&d.domain, &d.domain_action, &d.space_action).unwrap();
        let r = diagnose(&f, &target, &feas, &quick()).unwrap();
        assert!(r.passed);
        assert_eq!(r.nondegeneracy.rank, 2);
        assert!(!r.nondegeneracy.nondegenerate);
        assert_eq!(r.total_curvature[0].total, 0.0);
    }

    #[test]
    fn options_reject_unknown_keys() {
        let e = serde_json::from_str::<DiagnosticsOptions>(r#"{"grid_n": 4, "bogus": 1}"#);
        assert!(e.is_err());
        let o: DiagnosticsOptions = serde_json::from_str(r#"{"grid_n": 4}"#).unwrap();
        assert_eq!(o.grid_n, 4);
    }
}
