use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spray::{period_column, real_jacobian, required_rank, EquationLayout, SprayFamily};
use crate::domain::PathSystem;
use crate::error::{Error, Result};
use crate::linalg::{
    complex_singular_values, max_abs, numerical_rank, singular_values, truncated_solve, CMat, RVec, C64,
};
use crate::periods::{period_vector, residual_vector, residuals_of, PeriodTarget, Residuals, DEFAULT_TOL};
use crate::symgroup::ElementRef;
use crate::wdata::WeierstrassData;

pub const DEFAULT_VALIDITY_RADIUS: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iters: usize,
    pub fd_step: f64,
    /// Backtracking factor applied to a rejected step.
    pub damping: f64,
    pub quad_tol: f64,
    pub validity_radius: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            tol: 1e-10,
            max_iters: 25,
            fd_step: 1e-6,
            damping: 0.5,
            quad_tol: DEFAULT_TOL,
            validity_radius: DEFAULT_VALIDITY_RADIUS,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.tol > 0.0
            && self.max_iters > 0
            && self.fd_step > 0.0
            && self.damping > 0.0
            && self.damping < 1.0
            && self.quad_tol > 0.0
            && self.validity_radius > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("solver settings must be positive (damping in (0, 1)): {self:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobianReport {
    /// `∂𝒫/∂t`, one column per slot.
    pub complex: CMat,
    pub singular_values: Vec<f64>,
    pub required_rank: usize,
    /// Singular value number `required_rank` of the real equation Jacobian.
    pub sigma: f64,
    /// Some slots are linear combinations of others.
    pub rank_deficient: bool,
}

fn equation_residual(
    data: &WeierstrassData,
    paths: &PathSystem,
    target: &PeriodTarget,
    tol: f64,
) -> Result<(RVec, Residuals)> {
    let pv = period_vector(data, paths, tol)?;
    Ok((residual_vector(&pv, target), residuals_of(&pv, target)))
}

fn complex_derivatives(spray: &SprayFamily, t: &[C64], h: f64, tol: f64) -> Result<CMat> {
    let layout_rows = {
        let pv = period_vector(&spray.data_at(t), &spray.paths, tol)?;
        period_column(&pv).len()
    };
    let cols: Vec<Result<Vec<C64>>> = (0..spray.len())
        .into_par_iter()
        .map(|s| {
            let mut plus = t.to_vec();
            let mut minus = t.to_vec();
            plus[s] += h;
            minus[s] -= h;
            let p = period_column(&period_vector(&spray.data_at(&plus), &spray.paths, tol)?);
            let m = period_column(&period_vector(&spray.data_at(&minus), &spray.paths, tol)?);
            Ok(((p - m) / C64::new(2.0 * h, 0.0)).iter().copied().collect())
        })
        .collect();
    let mut out = CMat::zeros(layout_rows, spray.len());
    for (s, col) in cols.into_iter().enumerate() {
        for (r, v) in col?.into_iter().enumerate() {
            out[(r, s)] = v;
        }
    }
    Ok(out)
}

/// Central-difference period Jacobian at the spray's current parameter.
pub fn period_jacobian(spray: &SprayFamily, target: &PeriodTarget, config: &NewtonConfig) -> Result<JacobianReport> {
    let data = spray.data();
    let layout = EquationLayout::new(data.dim(), &spray.paths, target);
    let complex = complex_derivatives(spray, &spray.params, config.fd_step, config.quad_tol)?;
    let real = real_jacobian(&layout, &complex);
    let s = singular_values(&real);
    let required = required_rank(&data, &spray.paths, &layout)?;
    let sigma = if required == 0 { f64::INFINITY } else { s.get(required - 1).copied().unwrap_or(0.0) };
    let rank_deficient = numerical_rank(&complex_singular_values(&complex), 1e-8) < spray.len();
    Ok(JacobianReport { complex, singular_values: s, required_rank: required, sigma, rank_deficient })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NewtonTrace {
    /// Max-norm equation residual at each iterate, starting value included.
    pub residuals: Vec<f64>,
    pub step_norms: Vec<f64>,
    pub step_lengths: Vec<f64>,
    pub singular_values: Vec<f64>,
    pub sigma: f64,
    pub required_rank: usize,
    pub iterations: usize,
    pub param_norm: f64,
}

impl NewtonTrace {
    /// `r_{k+1} ≤ c·r_k²` over the last `pairs` consecutive iterates.
    pub fn quadratic_tail(&self, c: f64, pairs: usize) -> bool {
        let r = &self.residuals;
        if r.len() < 2 {
            return true;
        }
        let start = r.len().saturating_sub(pairs + 1);
        r[start..].windows(2).all(|w| w[1] <= c * w[0] * w[0])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonOutcome {
    pub params: Vec<C64>,
    pub data: WeierstrassData,
    pub residuals: Residuals,
    pub trace: NewtonTrace,
}

/// Damped Newton on the real period equations starting from the spray's parameter.
pub fn newton_correct(spray: &SprayFamily, target: &PeriodTarget, config: &NewtonConfig) -> Result<NewtonOutcome> {
    config.validate()?;
    let n = spray.core.dim();
    let layout = EquationLayout::new(n, &spray.paths, target);
    let mut t = spray.params.clone();
    let mut trace = NewtonTrace::default();
    let (mut r, mut res) = equation_residual(&spray.data_at(&t), &spray.paths, target, config.quad_tol)?;
    trace.residuals.push(max_abs(&r));
    trace.required_rank = required_rank(&spray.core, &spray.paths, &layout)?;
    let norm_of = |t: &[C64]| t.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    while max_abs(&r) > config.tol {
        if trace.iterations >= config.max_iters {
            return Err(Error::MaxIterations { iterations: trace.iterations, residual: max_abs(&r) });
        }
        if spray.is_empty() {
            return Err(Error::InsufficientDirections { rank: 0, required: trace.required_rank });
        }
        let complex = complex_derivatives(spray, &t, config.fd_step, config.quad_tol)?;
        let jac = real_jacobian(&layout, &complex);
        let s = singular_values(&jac);
        let sigma = s.get(trace.required_rank.saturating_sub(1)).copied().unwrap_or(0.0);
        if trace.iterations == 0 {
            trace.singular_values = s.clone();
            trace.sigma = sigma;
        }
        if sigma < super::spray::DOMINATION_GATE {
            return Err(Error::SingularJacobian { sigma });
        }
        let delta = truncated_solve(&jac, &(-&r), trace.required_rank);
        let step: Vec<C64> = (0..spray.len()).map(|s| C64::new(delta[2 * s], delta[2 * s + 1])).collect();
        let current = r.norm();
        let mut alpha = 1.0;
        let mut accepted = None;
        let mut left_ball = None;
        for _ in 0..30 {
            let trial: Vec<C64> = t.iter().zip(&step).map(|(a, d)| a + d * alpha).collect();
            let norm = norm_of(&trial);
            if norm > config.validity_radius {
                left_ball = Some(norm);
                alpha *= config.damping;
                continue;
            }
            let (rt, rs) = equation_residual(&spray.data_at(&trial), &spray.paths, target, config.quad_tol)?;
            if rt.norm() < current {
                accepted = Some((trial, rt, rs));
                break;
            }
            alpha *= config.damping;
        }
        let Some((trial, rt, rs)) = accepted else {
            if let Some(norm) = left_ball {
                return Err(Error::LeftValidityBall { norm, radius: config.validity_radius });
            }
            return Err(Error::MaxIterations { iterations: trace.iterations, residual: max_abs(&r) });
        };
        trace.step_norms.push(norm_of(&step) * alpha);
        trace.step_lengths.push(alpha);
        t = trial;
        r = rt;
        res = rs;
        trace.iterations += 1;
        trace.residuals.push(max_abs(&r));
    }
    trace.param_norm = norm_of(&t);
    let data = spray.data_at(&t);
    Ok(NewtonOutcome { params: t, data, residuals: res, trace })
}

/// Extends `paths` and `target` by connectors to marked points with prescribed values.
///
/// Points in one orbit must carry values related by the space action; one
/// connector per orbit is added.
pub fn interpolate_values(
    data: &WeierstrassData,
    paths: &mut PathSystem,
    target: &PeriodTarget,
    points: &[C64],
    values: &[RVec],
) -> Result<PeriodTarget> {
    if points.len() != values.len() {
        return Err(Error::InvalidInput(format!("{} points but {} values", points.len(), values.len())));
    }
    let n = data.dim();
    if values.iter().any(|v| v.len() != n) {
        return Err(Error::InvalidInput(format!("values must have {n} components")));
    }
    let elements: Vec<ElementRef> = match data.domain_action.group() {
        crate::symgroup::GroupStructure::Finite(t) => (0..t.order()).map(ElementRef::Index).collect(),
        g => {
            let mut e = vec![ElementRef::Word(Vec::new())];
            e.extend(g.check_elements());
            e
        }
    };
    let mut reps: Vec<usize> = Vec::new();
    for (i, &a) in points.iter().enumerate() {
        let mut represented = false;
        for (j, &b) in points.iter().enumerate().take(i + 1) {
            for g in &elements {
                let map = data.domain_action.map(g)?;
                if (map.apply(b) - a).norm() > 1e-9 {
                    continue;
                }
                let expected = data.space_action.motion(g)?.apply(&values[j]);
                if max_abs(&(&expected - &values[i])) > 1e-9 * (1.0 + max_abs(&values[i])) {
                    return Err(Error::InconsistentValues(format!(
                        "value at {a} is not the image of the value at {b} under {}",
                        g.label()
                    )));
                }
                if j < i {
                    represented = true;
                }
            }
        }
        if !represented {
            reps.push(i);
        }
    }
    let mut out = target.clone();
    for i in reps {
        paths.add_marked(points[i], &data.domain)?;
        out.marked.push(&values[i] - &data.base_value);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_path_system, build_rotation_domain};
    use crate::linalg::c;
    use crate::solver::build_period_spray;
    use crate::symgroup::{FiniteGroupTable, GroupStructure, RigidMotion, SpaceAction};
    use crate::wdata::gallery;
    use approx::assert_abs_diff_eq;

    fn catenoid_spray() -> (SprayFamily, PeriodTarget) {
        let d = gallery::catenoid(6).unwrap();
        let paths = build_path_system(&d.domain, &d.domain_action, d.basepoint).unwrap();
        let target = PeriodTarget::standard(&d, &paths).unwrap();
        (build_period_spray(&d, &paths).unwrap(), target)
    }

    #[test]
    fn own_targets_need_no_iterations() {
        let (spray, target) = catenoid_spray();
        let out = newton_correct(&spray, &target, &NewtonConfig::default()).unwrap();
        assert_eq!(out.trace.iterations, 0);
        assert!(out.params.iter().all(|t| t.norm() == 0.0));
    }

    #[test]
    fn jacobian_dominates() {
        let (spray, target) = catenoid_spray();
        let j = period_jacobian(&spray, &target, &NewtonConfig::default()).unwrap();
        assert!(j.sigma > 1e-3, "{j:?}");
        assert!(!j.rank_deficient);
    }

    #[test]
    fn duplicated_slot_is_flagged() {
        let (spray, target) = catenoid_spray();
        let mut slots = spray.slots.clone();
        slots.push(slots[0].clone());
        let dup = SprayFamily::from_slots(spray.core.clone(), spray.paths.clone(), slots);
        assert!(period_jacobian(&dup, &target, &NewtonConfig::default()).unwrap().rank_deficient);
    }

    #[test]
    fn recovers_from_displacement() {
        let (spray, target) = catenoid_spray();
        let k = spray.len() as f64;
        let t0: Vec<C64> = (0..spray.len()).map(|s| C64::from_polar(0.1 / k.sqrt(), s as f64)).collect();
        let out = newton_correct(&spray.with_params(t0), &target, &NewtonConfig::default()).unwrap();
        assert!(out.residuals.max() <= 1e-10, "{:?}", out.trace);
        assert!(out.trace.iterations <= 12);
        assert!(out.trace.quadratic_tail(1e3, 2), "{:?}", out.trace.residuals);
    }

    #[test]
    fn flux_target_rescales_catenoid() {
        // the doubled catenoid passes through twice the original base value
        let d = gallery::catenoid(6).unwrap().with_base_value(RVec::from_vec(vec![-2.0, 0.0, 0.0]));
        let paths = build_path_system(&d.domain, &d.domain_action, d.basepoint).unwrap();
        let flux = vec![RVec::from_vec(vec![0.0, 0.0, 4.0 * std::f64::consts::PI])];
        let target = PeriodTarget::standard(&d, &paths).unwrap().with_flux(&d, &paths, flux).unwrap();
        let spray = crate::solver::build_period_spray_for(&d, &paths, &target).unwrap();
        let cfg = NewtonConfig { validity_radius: 1.0, ..NewtonConfig::default() };
        let out = newton_correct(&spray, &target, &cfg).unwrap();
        assert!(out.residuals.flux.unwrap() <= 1e-9);
        assert!(out.residuals.max() <= 1e-10);
        assert_abs_diff_eq!(out.trace.param_norm, 2f64.ln(), epsilon = 1e-8);
    }

    #[test]
    fn interpolation_targets() {
        let d = gallery::catenoid(6).unwrap();
        let mut paths = build_path_system(&d.domain, &d.domain_action, d.basepoint).unwrap();
        let target = PeriodTarget::standard(&d, &paths).unwrap();
        let same = interpolate_values(&d, &mut paths.clone(), &target, &[], &[]).unwrap();
        assert_eq!(same, target);
        let v = &d.base_value + RVec::from_vec(vec![1.0, 0.0, 0.0]);
        let t = interpolate_values(&d, &mut paths, &target, &[c(0.5, 0.5)], &[v]).unwrap();
        assert_eq!(t.marked, vec![RVec::from_vec(vec![1.0, 0.0, 0.0])]);
        assert_eq!(paths.marked.len(), 1);
    }

    #[test]
    fn antipodal_orbit_values() {
        let (domain, dact) = build_rotation_domain(2, &[]).unwrap();
        let t = FiniteGroupTable::cyclic(2).unwrap();
        let sact = SpaceAction::new(
            GroupStructure::Finite(t),
            vec![RigidMotion::identity(3), RigidMotion::orthogonal(-crate::linalg::RMat::identity(3, 3)).unwrap()],
        )
        .unwrap();
        let f = crate::wdata::MeromorphicMap::constant(&crate::linalg::CVec::from_vec(vec![
            c(1.0, 0.0),
            c(0.0, 1.0),
            c(0.0, 0.0),
        ]))
        .unwrap();
        // only the value bookkeeping is exercised here
        let d = WeierstrassData::new(
            f,
            crate::domain::InvariantOneForm::dz(),
            domain,
            dact,
            sact,
            c(1.0, 0.0),
            RVec::zeros(3),
        )
        .unwrap();
        let mut paths = build_path_system(&d.domain, &d.domain_action, d.basepoint).unwrap();
        let target = PeriodTarget::standard(&d, &paths).unwrap();
        let w = RVec::from_vec(vec![0.3, -0.2, 0.7]);
        let pts = [c(0.5, 0.2), c(-0.5, -0.2)];
        assert!(interpolate_values(&d, &mut paths.clone(), &target, &pts, &[w.clone(), -&w]).is_ok());
        let r = interpolate_values(&d, &mut paths, &target, &pts, &[w.clone(), w.clone()]);
        assert!(matches!(r, Err(Error::InconsistentValues(_))));
    }
}
