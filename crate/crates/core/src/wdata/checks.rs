use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{MeromorphicMap, WeierstrassData};
use crate::domain::{fixed_point_set, FixedPointRecord};
use crate::error::{Error, Result};
use crate::linalg::{bilinear_square, cnorm, complexify, CVec, RMat, C64};
use crate::sampling::{grid_points, rng, sample_domain};
use crate::series::Series;
use crate::symgroup::{null_line_from_plane, PlaneRotationCertificate};

/// `f₀(ζ) = y₀ ζ^{1−k}` in the chart centred at a fixed point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalModel {
    pub y0: CVec,
    pub k: usize,
}

impl LocalModel {
    pub fn eval(&self, zeta: C64) -> CVec {
        &self.y0 * zeta.powi(1 - self.k as i32)
    }

    pub fn to_map(&self) -> Result<MeromorphicMap> {
        MeromorphicMap::new(self.y0.iter().map(|c| Series::monomial(*c, 1 - self.k as i32)).collect())
    }

    /// max over random ζ of `‖f₀(ωζ) − O f₀(ζ)‖ / (1 + ‖f₀(ζ)‖)`, ω = e^{2πi/k}.
    pub fn equivariance_residual(&self, rotation: &RMat, samples: usize, seed: u64) -> f64 {
        use rand::Rng;
        let o = complexify(rotation);
        let omega = C64::from_polar(1.0, 2.0 * PI / self.k as f64);
        let mut r = rng(seed);
        let mut worst = 0.0_f64;
        for _ in 0..samples {
            let zeta = C64::from_polar(r.gen_range(0.05..2.0), r.gen_range(0.0..2.0 * PI));
            let f = self.eval(zeta);
            let diff = self.eval(omega * zeta) - &o * &f;
            worst = worst.max(cnorm(&diff) / (1.0 + cnorm(&f)));
        }
        worst
    }
}

/// Local model at a fixed point from a rotation-plane certificate.
///
/// `y₀` is the certificate's null line scaled to unit norm with its first
/// nonzero component real and positive.
pub fn local_model_at_fixed_point(rec: &FixedPointRecord, cert: &PlaneRotationCertificate) -> Result<LocalModel> {
    let expected = 2.0 * PI / rec.order as f64;
    if cert.order != rec.order || (cert.angle - expected).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "certificate angle {} does not match stabiliser order {}",
            cert.angle, rec.order
        )));
    }
    let w = null_line_from_plane(cert)?;
    let lead = w.iter().copied().find(|z| z.norm() > 1e-12 * cnorm(&w)).expect("nonzero null line");
    let y0 = &w * (lead.conj() / (lead.norm() * cnorm(&w)));
    let model = LocalModel { y0, k: rec.order };
    // the plane rotation acts on y₀ as the phase e^{iφ}
    let phase = C64::from_polar(1.0, cert.angle);
    let omega = C64::from_polar(1.0, expected);
    let mut r = rng(0x10ca1);
    for _ in 0..100 {
        use rand::Rng;
        let zeta = C64::from_polar(r.gen_range(0.05..2.0), r.gen_range(0.0..2.0 * PI));
        let f = model.eval(zeta);
        let res = cnorm(&(model.eval(omega * zeta) - &f * phase)) / (1.0 + cnorm(&f));
        if res > 1e-12 {
            return Err(Error::DataCheck(format!("local model is not equivariant (residual {res:.3e})")));
        }
    }
    Ok(model)
}

/// max over generators g and sample points of `‖f(gz) − dg·f(z)‖ / (1 + ‖f(z)‖)`.
pub fn equivariance_residual_f(data: &WeierstrassData, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidInput("at least one sample is required".into()));
    }
    let poles: Vec<C64> = data.f.poles().iter().map(|p| p.0).collect();
    let points: Vec<C64> = sample_domain(&data.domain, samples, seed, 1e-3)
        .into_iter()
        .filter(|z| poles.iter().all(|p| (z - p).norm() > 1e-6))
        .collect();
    if points.is_empty() {
        return Err(Error::DataCheck("no admissible sample points".into()));
    }
    let mut worst = 0.0_f64;
    for g in data.domain_action.group().generator_refs() {
        let m = data.domain_action.map(&g)?;
        let dg = complexify(&data.space_action.motion(&g)?.linear());
        let r = points
            .par_iter()
            .map(|&z| {
                let f = data.f_at(z);
                cnorm(&(data.f_at(m.apply(z)) - &dg * &f)) / (1.0 + cnorm(&f))
            })
            .reduce(|| 0.0, f64::max);
        worst = worst.max(r);
    }
    Ok(worst)
}

/// `sup |Σ fᵢ²| / (1 + ‖f‖²)` over the grid.
pub fn nullity_residual<F>(f: F, grid: &[C64]) -> f64
where
    F: Fn(C64) -> CVec + Sync,
{
    grid.par_iter()
        .map(|&z| {
            let v = f(z);
            bilinear_square(&v).norm() / (1.0 + v.norm_squared())
        })
        .reduce(|| 0.0, f64::max)
}

/// `n × n` grid on the data's domain avoiding punctures and poles of `f`.
pub fn nullity_grid(data: &WeierstrassData, n: usize) -> Vec<C64> {
    let poles: Vec<C64> = data.f.poles().iter().map(|p| p.0).collect();
    grid_points(&data.domain, n, 1e-3, &poles)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointOrders {
    pub point: C64,
    pub stabiliser_order: usize,
    pub pole_order_f: i32,
    pub zero_order_theta: i32,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CancellationReport {
    pub fixed_points: Vec<FixedPointOrders>,
    /// Zeros of `fθ` away from the fixed points.
    pub stray_zeros: Vec<C64>,
    /// Poles of `fθ` inside the domain.
    pub stray_poles: Vec<C64>,
    pub passed: bool,
}

/// Order of vanishing of a vector function at `p`, estimated from two radii.
fn numerical_order<F: Fn(C64) -> CVec>(h: F, p: C64) -> i32 {
    let (r1, r2) = (1e-3, 1e-2);
    let mut acc = 0.0;
    for j in 0..4 {
        let d = C64::from_polar(1.0, 0.3 + j as f64 * PI / 2.0);
        let a = cnorm(&h(p + d * r1));
        let b = cnorm(&h(p + d * r2));
        acc += (b / a).ln() / (r2 / r1).ln();
    }
    (acc / 4.0).round() as i32
}

/// Pole orders of `f` against zero orders of `θ` at the fixed points, plus a
/// scan for stray zeros and poles of `fθ`.
pub fn cancellation_check(data: &WeierstrassData) -> CancellationReport {
    let origin = C64::new(0.0, 0.0);
    let mut fixed_points = Vec::new();
    let fixed = fixed_point_set(&data.domain, &data.domain_action);
    for rec in &fixed {
        let (pole, zero) = if rec.point.norm() <= 1e-12 {
            (data.f.pole_order_at(origin) as i32, data.theta.order_at(origin))
        } else {
            (-numerical_order(|z| data.f_at(z), rec.point), data.theta.order_at(rec.point))
        };
        fixed_points.push(FixedPointOrders {
            point: rec.point,
            stabiliser_order: rec.order,
            pole_order_f: pole,
            zero_order_theta: zero,
            ok: pole == zero && zero == rec.order as i32 - 1,
        });
    }

    let mut stray_poles = Vec::new();
    if data.domain.contains(origin) {
        let order = data.core_form().iter().filter_map(|s| s.order_at_zero()).min();
        if order.is_some_and(|o| o < 0) {
            stray_poles.push(origin);
        }
    }

    let stray_zeros = zero_scan(data, &fixed.iter().map(|r| r.point).collect::<Vec<_>>());
    let passed = fixed_points.iter().all(|r| r.ok) && stray_zeros.is_empty() && stray_poles.is_empty();
    CancellationReport { fixed_points, stray_zeros, stray_poles, passed }
}

fn zero_scan(data: &WeierstrassData, fixed: &[C64]) -> Vec<C64> {
    let n = 81;
    let grid = grid_points(&data.domain, n, 1e-2, &[]);
    let values: Vec<f64> = grid.par_iter().map(|&z| cnorm(&data.form_at(z))).collect();
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let Some(&median) = sorted.get(sorted.len() / 2) else { return Vec::new() };
    let (lo, hi) = crate::sampling::bounding_box(&data.domain);
    let cell = ((hi.re - lo.re) / n as f64).max((hi.im - lo.im) / n as f64);
    let mut found: Vec<C64> = Vec::new();
    for (idx, &z) in grid.iter().enumerate() {
        let v = values[idx];
        if v > 0.1 * median {
            continue;
        }
        let is_min = grid.iter().enumerate().all(|(j, w)| (w - z).norm() > 1.5 * cell || values[j] >= v);
        if !is_min {
            continue;
        }
        if let Some(root) = polish_zero(data, z, cell) {
            let near_special = fixed.iter().chain(data.domain.punctures()).any(|p| (p - root).norm() < 1e-6);
            let inside = data.domain.contains(root) && data.domain.boundary_distance(root) > 1e-9;
            if inside && !near_special && !found.iter().any(|q| (q - root).norm() < 1e-6) {
                found.push(root);
            }
        }
    }
    found
}

/// Gauss–Newton for `h(z) = 0` with `h = fθ/dz`.
fn polish_zero(data: &WeierstrassData, start: C64, cell: f64) -> Option<C64> {
    let mut z = start;
    let scale = cnorm(&data.form_at(start + cell)).max(cnorm(&data.form_at(start - cell))).max(1e-300);
    for _ in 0..60 {
        let h = data.form_at(z);
        if cnorm(&h) <= 1e-11 * scale {
            return Some(z);
        }
        let eps = 1e-7 * (1.0 + z.norm());
        let dh = (data.form_at(z + eps) - data.form_at(z - eps)) / C64::new(2.0 * eps, 0.0);
        let den = dh.dotc(&dh);
        if den.norm() == 0.0 {
            return None;
        }
        let mut step = -dh.dotc(&h) / den;
        if step.norm() > cell {
            step *= cell / step.norm();
        }
        z += step;
        if (z - start).norm() > 3.0 * cell {
            return None;
        }
    }
    (cnorm(&data.form_at(z)) <= 1e-9 * scale).then_some(z)
}
