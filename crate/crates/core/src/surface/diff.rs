//! Finite-difference diagnostics: conformality, harmonicity, curvature, completeness.

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ImmersionField;
use crate::error::{Error, Result};
use crate::linalg::{cnorm, complexify_vec, CVec, RVec, C64, I};
use crate::periods::integrate;
use crate::wdata::WeierstrassData;

/// Conformal factors below this are reported as possible branch points.
pub const LAMBDA_FLOOR: f64 = 1e-12;

/// Per-stage length ratio at or above which a ray is classed as diverging.
pub const DOUBLING_RATIO: f64 = 0.75;

const STENCIL: [C64; 4] = [C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0)];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformalityReport {
    /// `max | |Fᵤ|² − |Fᵥ|² |` and `|Fᵤ·Fᵥ|`, divided by `max(1, min(|Fᵤ|², |Fᵥ|²))`.
    pub conformal: f64,
    /// `max ‖ΔF‖ / max(1, λ²)` from the 5-point stencil.
    pub harmonic: f64,
    /// `max ‖(Fᵤ − iFᵥ) − fθ/dz‖ / max(1, ‖fθ/dz‖)`; absent for bare maps.
    pub weierstrass: Option<f64>,
    pub h_fd: f64,
    pub samples: usize,
}

struct PointFigures {
    conformal: f64,
    harmonic: f64,
    fz: CVec,
}

/// Figures at one point from the four differences `F(z + h·s) − F(z)`.
fn point_figures(diffs: &[RVec; 4], h: f64) -> PointFigures {
    let fu = (&diffs[0] - &diffs[1]) / (2.0 * h);
    let fv = (&diffs[2] - &diffs[3]) / (2.0 * h);
    let (uu, vv) = (fu.norm_squared(), fv.norm_squared());
    let scale = 1.0_f64.max(uu.min(vv));
    let conformal = (uu - vv).abs().max(fu.dot(&fv).abs()) / scale;
    let lap = (&diffs[0] + &diffs[1] + &diffs[2] + &diffs[3]) / (h * h);
    let harmonic = lap.norm() / 1.0_f64.max(0.5 * (uu + vv));
    let fz = complexify_vec(&fu) - complexify_vec(&fv) * I;
    PointFigures { conformal, harmonic, fz }
}

fn reduce(
    grid: &[C64],
    h: f64,
    diffs: impl Fn(C64) -> Result<[RVec; 4]> + Sync,
    form: Option<&(dyn Fn(C64) -> CVec + Sync)>,
) -> Result<ConformalityReport> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if !(h > 0.0) {
        return Err(Error::InvalidInput("finite-difference step must be positive".into()));
    }
    let per_point = grid
        .par_iter()
        .map(|&z| -> Result<(f64, f64, f64)> {
            let p = point_figures(&diffs(z)?, h);
            let w = match form {
                Some(phi) => {
                    let target = phi(z);
                    cnorm(&(&p.fz - &target)) / 1.0_f64.max(cnorm(&target))
                }
                None => 0.0,
            };
            Ok((p.conformal, p.harmonic, w))
        })
        .collect::<Result<Vec<_>>>()?;
    let max = |k: fn(&(f64, f64, f64)) -> f64| per_point.iter().map(k).fold(0.0, f64::max);
    Ok(ConformalityReport {
        conformal: max(|p| p.0),
        harmonic: max(|p| p.1),
        weierstrass: form.map(|_| max(|p| p.2)),
        h_fd: h,
        samples: grid.len(),
    })
}

/// Conformality and harmonicity of an arbitrary map `R² → Rⁿ`.
pub fn conformality_of_map(map: impl Fn(C64) -> RVec + Sync, grid: &[C64], h: f64) -> Result<ConformalityReport> {
    reduce(
        grid,
        h,
        |z| {
            let c = map(z);
            Ok(STENCIL.map(|s| map(z + s * h) - &c))
        },
        None,
    )
}

/// Conformality, harmonicity and the `2∂F = fθ` cross-check on `grid`.
pub fn conformality_and_harmonicity(field: &ImmersionField, grid: &[C64], h: f64) -> Result<ConformalityReport> {
    for &z in grid {
        let d = field.singularities().iter().map(|q| (q - z).norm()).fold(f64::INFINITY, f64::min);
        if d <= 3.0 * h || field.data().domain.boundary_distance(z) <= 3.0 * h {
            return Err(Error::InvalidInput(format!("grid point {z} is within 3·h of a singularity or the boundary")));
        }
    }
    let data = field.data();
    let form = |z: C64| data.form_at(z);
    reduce(
        grid,
        h,
        |z| {
            let mut out: [RVec; 4] = Default::default();
            for (o, s) in out.iter_mut().zip(STENCIL) {
                *o = field.difference(z, z + s * h)?;
            }
            Ok(out)
        },
        Some(&form),
    )
}

/// Conformal factor `λ = ‖fθ/dz‖/√2`, equal to `|Fᵤ|` for a conformal immersion.
pub fn conformal_factor(data: &WeierstrassData, z: C64) -> f64 {
    cnorm(&data.form_at(z)) / SQRT_2
}

/// `K = −Δ log λ / λ²` by the 5-point stencil with step `h`.
pub fn gauss_curvature(lambda: impl Fn(C64) -> f64, z: C64, h: f64) -> f64 {
    let l0 = lambda(z);
    let lap = STENCIL.iter().map(|s| (lambda(z + s * h) / l0).ln()).sum::<f64>() / (h * h);
    -lap / (l0 * l0)
}

fn stencil_step(z: C64, center: C64) -> f64 {
    1e-3 * (z - center).norm().max(0.1)
}

/// Per-point `(λ, K)`.
pub fn curvature(data: &WeierstrassData, points: &[C64], center: C64) -> Vec<(f64, f64)> {
    points
        .par_iter()
        .map(|&z| {
            let l = conformal_factor(data, z);
            (l, gauss_curvature(|w| conformal_factor(data, w), z, stencil_step(z, center)))
        })
        .collect()
}

/// Annular truncation `r_in ≤ |z − center| ≤ r_out`; `r_in = 0` is a disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub center: C64,
    pub r_in: f64,
    pub r_out: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub truncation: Truncation,
    /// Richardson-extrapolated `∫ K dσ`.
    pub total: f64,
    pub error_estimate: f64,
    pub coarse: f64,
    pub fine: f64,
    pub max_k: f64,
    pub min_lambda: f64,
    pub branch_point_suspected: bool,
    pub samples: usize,
}

struct Sweep {
    total: f64,
    max_k: f64,
    min_lambda: f64,
    samples: usize,
}

/// Midpoint sum of `K λ² dA` in polar coordinates with `nr × na` cells.
fn sweep(data: &WeierstrassData, t: &Truncation, nr: usize, na: usize) -> Sweep {
    // radial pieces: (start, end, logarithmic)
    let mut pieces = Vec::new();
    if t.r_in > 0.0 {
        pieces.push((t.r_in, t.r_out, true));
    } else {
        let r1 = t.r_out.min(1.0);
        pieces.push((0.0, r1, false));
        if t.r_out > r1 {
            pieces.push((r1, t.r_out, true));
        }
    }
    let mut nodes = Vec::new();
    for &(a, b, log) in &pieces {
        for i in 0..nr {
            let s = (i as f64 + 0.5) / nr as f64;
            let (r, dr_jac) = if log {
                let (la, lb) = (a.ln(), b.ln());
                let r = (la + s * (lb - la)).exp();
                (r, r * r * (lb - la) / nr as f64)
            } else {
                let r = a + s * (b - a);
                (r, r * (b - a) / nr as f64)
            };
            for j in 0..na {
                let phi = 2.0 * PI * (j as f64 + 0.5) / na as f64;
                nodes.push((t.center + C64::from_polar(r, phi), dr_jac * 2.0 * PI / na as f64));
            }
        }
    }
    let vals: Vec<(f64, f64, f64)> = nodes
        .par_iter()
        .map(|&(z, w)| {
            let l = conformal_factor(data, z);
            let k = gauss_curvature(|x| conformal_factor(data, x), z, stencil_step(z, t.center));
            (k * l * l * w, k, l)
        })
        .collect();
    Sweep {
        total: vals.iter().map(|v| v.0).sum(),
        max_k: vals.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max),
        min_lambda: vals.iter().map(|v| v.2).fold(f64::INFINITY, f64::min),
        samples: vals.len(),
    }
}

/// Total curvature over a truncation, `nr` radial and `na` angular cells per
/// radial piece at the coarse level; the fine level doubles both.
pub fn total_curvature(data: &WeierstrassData, t: Truncation, nr: usize, na: usize) -> Result<CurvatureReport> {
    if !(t.r_out > t.r_in && t.r_in >= 0.0) || nr == 0 || na == 0 {
        return Err(Error::InvalidInput("truncation needs 0 ≤ r_in < r_out and a nonempty grid".into()));
    }
    let coarse = sweep(data, &t, nr, na);
    let fine = sweep(data, &t, 2 * nr, 2 * na);
    let diff = fine.total - coarse.total;
    let min_lambda = coarse.min_lambda.min(fine.min_lambda);
    Ok(CurvatureReport {
        truncation: t,
        total: fine.total + diff / 3.0,
        error_estimate: diff.abs() / 3.0,
        coarse: coarse.total,
        fine: fine.total,
        max_k: coarse.max_k.max(fine.max_k),
        min_lambda,
        branch_point_suspected: min_lambda < LAMBDA_FLOOR,
        samples: coarse.samples + fine.samples,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum End {
    Finite { point: C64 },
    Infinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompletenessVerdict {
    Diverging,
    FiniteLength,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub stage: usize,
    /// Distance to the end (finite) or modulus (infinity) at the end of the stage.
    pub radius: f64,
    pub increment: f64,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayTable {
    pub angle: f64,
    pub rows: Vec<ProbeRow>,
    pub verdict: CompletenessVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub end: End,
    pub rays: Vec<RayTable>,
    pub verdict: CompletenessVerdict,
}

fn segment_length(lambda: &(impl Fn(C64) -> f64 + Sync), a: C64, b: C64) -> Result<f64> {
    let d = b - a;
    let h = |s: f64| CVec::from_element(1, C64::new(lambda(a + d * s) * d.norm(), 0.0));
    let rough = h(0.5)[0].re.abs().max(h(0.0)[0].re.abs()).max(h(1.0)[0].re.abs());
    if !rough.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok(integrate(h, 0.0, 1.0, 1e-10 * rough.max(1e-300))?.value[0].re)
}

/// Length table `∫ λ |dz|` over dyadic stages approaching `end` along each ray.
///
/// Stage `j` covers radii `[r₀/2^{j+1}, r₀/2^j]` for a finite end and
/// `[r₀2^j, r₀2^{j+1}]` at infinity. A ray diverges when each of the last four
/// stages adds at least `DOUBLING_RATIO` times the previous stage's length, or
/// when a stage length overflows.
pub fn completeness_probe_metric(
    lambda: impl Fn(C64) -> f64 + Sync,
    end: End,
    rays: &[f64],
    r0: f64,
    stages: usize,
) -> Result<CompletenessReport> {
    if rays.is_empty() || stages < 5 || !(r0 > 0.0) {
        return Err(Error::InvalidInput("completeness probe needs rays, ≥ 5 stages and r0 > 0".into()));
    }
    let mut tables = Vec::new();
    for &angle in rays {
        let dir = C64::from_polar(1.0, angle);
        let point = |r: f64| match end {
            End::Finite { point } => point + dir * r,
            End::Infinity => dir * r,
        };
        let mut rows = Vec::with_capacity(stages);
        let mut length = 0.0;
        for stage in 0..stages {
            let (r_start, r_end) = match end {
                End::Finite { .. } => (r0 / 2f64.powi(stage as i32), r0 / 2f64.powi(stage as i32 + 1)),
                End::Infinity => (r0 * 2f64.powi(stage as i32), r0 * 2f64.powi(stage as i32 + 1)),
            };
            let increment = segment_length(&lambda, point(r_start), point(r_end)).unwrap_or(f64::INFINITY);
            length += increment;
            rows.push(ProbeRow { stage, radius: r_end, increment, length });
            if !increment.is_finite() {
                break;
            }
        }
        let overflow = !length.is_finite();
        let diverging =
            overflow || rows[rows.len() - 5..].windows(2).all(|w| w[1].increment >= DOUBLING_RATIO * w[0].increment);
        let verdict = if diverging { CompletenessVerdict::Diverging } else { CompletenessVerdict::FiniteLength };
        tables.push(RayTable { angle, rows, verdict });
    }
    let verdict = if tables.iter().all(|t| t.verdict == CompletenessVerdict::Diverging) {
        CompletenessVerdict::Diverging
    } else {
        CompletenessVerdict::FiniteLength
    };
    Ok(CompletenessReport { end, rays: tables, verdict })
}

/// Completeness probe for the induced metric of a field.
pub fn completeness_probe(field: &ImmersionField, end: End, rays: &[f64], stages: usize) -> Result<CompletenessReport> {
    let data = field.data();
    let others = |p: C64| {
        field
            .singularities()
            .iter()
            .filter(|q| (*q - p).norm() > 1e-12)
            .map(|q| (q - p).norm())
            .fold(f64::INFINITY, f64::min)
    };
    let r0 = match end {
        End::Finite { point } => (0.5 * others(point)).min(1.0).min(0.5 * data.domain.boundary_distance(point)),
        End::Infinity => {
            let far = field.singularities().iter().map(|q| q.norm()).fold(0.0, f64::max);
            2.0 * far.max(1.0)
        }
    };
    completeness_probe_metric(|z| conformal_factor(data, z), end, rays, r0, stages)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::wdata::gallery;
    use approx::assert_relative_eq;

    fn field(d: WeierstrassData) -> ImmersionField {
        ImmersionField::from_data(d, 1e-12).unwrap()
    }

    fn annulus_grid(r0: f64, r1: f64, n: usize) -> Vec<C64> {
        let mut g = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let r = r0 + (r1 - r0) * (i as f64 + 0.5) / n as f64;
                g.push(C64::from_polar(r, 2.0 * PI * (j as f64 + 0.3) / n as f64));
            }
        }
        g
    }

    #[test]
    fn affine_probe_is_not_conformal() {
        let r = conformality_of_map(|z| RVec::from_vec(vec![2.0 * z.re, z.im, 0.0]), &[c(0.2, 0.1)], 1e-4).unwrap();
        assert!((r.conformal - 3.0).abs() < 1e-6, "{}", r.conformal);
        assert!(r.harmonic < 1e-6);
        assert!(r.weierstrass.is_none());
    }

    #[test]
    fn harmonic_nonconformal_probe() {
        let map = |z: C64| RVec::from_vec(vec![z.re, z.im, z.re * z.re - z.im * z.im]);
        let r = conformality_of_map(map, &[c(0.5, 0.3)], 1e-4).unwrap();
        assert!(r.harmonic <= 1e-6);
        assert!(r.conformal > 0.1);
    }

    #[test]
    fn catenoid_is_conformal_and_harmonic() {
        let f = field(gallery::catenoid(6).unwrap());
        let r = conformality_and_harmonicity(&f, &annulus_grid(0.5, 2.0, 8), 1e-4).unwrap();
        assert!(r.conformal <= 1e-6 && r.harmonic <= 1e-6, "{r:?}");
        assert!(r.weierstrass.unwrap() <= 1e-6);
        assert_eq!(r.samples, 64);
    }

    #[test]
    fn grid_too_close_to_puncture() {
        let f = field(gallery::catenoid(6).unwrap());
        assert!(conformality_and_harmonicity(&f, &[c(2e-4, 0.0)], 1e-4).is_err());
        assert!(matches!(conformality_and_harmonicity(&f, &[], 1e-4), Err(Error::EmptyGrid)));
    }

    #[test]
    fn catenoid_curvature_matches_closed_form() {
        // λ_w = cosh s in log coordinates, so K = −sech⁴ s and ∫K dσ = −4π tanh(ln R)
        let d = gallery::catenoid(6).unwrap();
        for z in [c(0.5, 0.2), c(2.0, -1.0)] {
            let s = z.norm().ln();
            let k = gauss_curvature(|w| conformal_factor(&d, w), z, 1e-3 * z.norm());
            let expected = -(1.0 / s.cosh()).powi(4);
            assert_relative_eq!(k, expected, max_relative = 1e-5);
        }
        let r = 100.0_f64;
        let t = Truncation { center: c(0.0, 0.0), r_in: 1.0 / r, r_out: r };
        let rep = total_curvature(&d, t, 64, 16).unwrap();
        let oracle = -4.0 * PI * r.ln().tanh();
        assert!((rep.total - oracle).abs() < 1e-4 * oracle.abs(), "{rep:?}");
        assert!(rep.max_k <= 1e-6 && !rep.branch_point_suspected);
    }

    #[test]
    fn enneper_curvature_matches_closed_form() {
        // λ = (1 + r²)/2 so ∫K dσ over |z| ≤ R is −4π R²/(1 + R²)
        let d = gallery::enneper(1).unwrap();
        let r = 50.0_f64;
        let rep = total_curvature(&d, Truncation { center: c(0.0, 0.0), r_in: 0.0, r_out: r }, 64, 16).unwrap();
        let oracle = -4.0 * PI * r * r / (1.0 + r * r);
        assert!((rep.total - oracle).abs() < 1e-3 * oracle.abs(), "{rep:?}");
    }

    #[test]
    fn flat_plane_has_no_curvature() {
        let d = gallery::flat_plane().unwrap();
        let rep = total_curvature(&d, Truncation { center: c(0.0, 0.0), r_in: 0.0, r_out: 5.0 }, 8, 8).unwrap();
        assert_eq!(rep.total, 0.0);
        assert_eq!(rep.max_k, 0.0);
    }

    #[test]
    fn completeness_verdicts() {
        let f = field(gallery::catenoid(6).unwrap());
        let rays = [0.1, 1.7, 3.3];
        let rep = completeness_probe(&f, End::Finite { point: c(0.0, 0.0) }, &rays, 12).unwrap();
        assert_eq!(rep.verdict, CompletenessVerdict::Diverging);
        assert!(rep.rays[0].rows.windows(2).all(|w| w[1].length > w[0].length));
        let rep =
            completeness_probe_metric(|z| z.norm().sqrt(), End::Finite { point: c(0.0, 0.0) }, &rays, 1.0, 12).unwrap();
        assert_eq!(rep.verdict, CompletenessVerdict::FiniteLength);
        // ∫₀¹ r^{1/2} dr = 2/3
        assert!((rep.rays[0].rows.last().unwrap().length - 2.0 / 3.0).abs() < 0.01);
        let f = field(gallery::flat_plane().unwrap());
        let rep = completeness_probe(&f, End::Infinity, &[0.4], 8).unwrap();
        assert_eq!(rep.verdict, CompletenessVerdict::Diverging);
    }
}
