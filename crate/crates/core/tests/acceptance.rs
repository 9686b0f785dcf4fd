//! Acceptance suite: twelve criteria at pinned tolerances, one line each.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use nalgebra::SymmetricEigen;
use rand::Rng;

use equimin::domain::{build_path_system, build_rotation_domain, fixed_point_set, Path};
use equimin::linalg::{c, cmax_abs, CVec, RMat, RVec, C64, I};
use equimin::periods::{integrate_path, period_vector, residue_at_puncture, PeriodTarget};
use equimin::sampling::{grid_points, rng};
use equimin::solver::{build_period_spray_for, feasibility_check, newton_correct, NewtonConfig};
use equimin::surface::{
    completeness_probe, completeness_probe_metric, conformality_and_harmonicity, field_samples,
    immersion_equivariance_residual, nondegeneracy_check, null_curve, total_curvature, CompletenessVerdict, End,
    ImmersionField, Truncation,
};
use equimin::symgroup::{
    find_invariant_rotation_plane, plane_rotation, regular_representation, symmetric_group_s3, ElementRef,
    FiniteGroupTable, GroupStructure, PlaneSearch, RigidMotion, SpaceAction,
};
use equimin::wdata::gallery::{self, GalleryName};
use equimin::wdata::{local_model_at_fixed_point, nullity_grid, WeierstrassData};

type Verdict = Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gallery_items() -> Vec<(GalleryName, WeierstrassData)> {
    ["catenoid(6)", "enneper(1)", "enneper(2)", "helicoid", "flat_plane"]
        .iter()
        .map(|n| {
            let g = GalleryName::parse(n).unwrap();
            let d = g.build().unwrap();
            (g, d)
        })
        .collect()
}

/// Gallery data after period correction from the standard targets.
fn solved(d: &WeierstrassData) -> (ImmersionField, PeriodTarget) {
    let paths = build_path_system(&d.domain, &d.domain_action, d.basepoint).unwrap();
    let target = PeriodTarget::standard(d, &paths).unwrap();
    let data = if target.equation_count(d.dim()) == 0 {
        d.clone()
    } else {
        let spray = build_period_spray_for(d, &paths, &target).unwrap();
        newton_correct(&spray, &target, &NewtonConfig::default()).unwrap().data
    };
    (ImmersionField::new(data, paths, 1e-12).unwrap(), target)
}

fn cyclic_action(o: &RMat, k: usize) -> SpaceAction {
    let t = FiniteGroupTable::cyclic(k).unwrap();
    let mut motions = Vec::with_capacity(k);
    let mut p = RMat::identity(o.nrows(), o.nrows());
    for _ in 0..k {
        motions.push(RigidMotion::orthogonal(p.clone()).unwrap());
        p = o * p;
    }
    SpaceAction::new(GroupStructure::Finite(t), motions).unwrap()
}

fn block_diag(blocks: &[RMat]) -> RMat {
    let n = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = RMat::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        m.view_mut((at, at), (b.nrows(), b.nrows())).copy_from(b);
        at += b.nrows();
    }
    m
}

fn rot2(angle: f64) -> RMat {
    plane_rotation(2, 0, 1, angle)
}

fn diag(v: &[f64]) -> RMat {
    RMat::from_diagonal(&RVec::from_vec(v.to_vec()))
}

fn random_orthogonal(n: usize, seed: u64) -> RMat {
    let mut r = rng(seed);
    let a = RMat::from_fn(n, n, |_, _| r.gen_range(-1.0..1.0));
    a.qr().q()
}

/// Eigen oracle: real dimension of the subspace on which `o` acts as rotation by 2π/k,
/// from the null space of the symmetric matrix `MᵀM`.
fn rotation_eigenspace_dim(o: &RMat, k: usize) -> usize {
    let n = o.nrows();
    let id = RMat::identity(n, n);
    let m = if k == 2 { o + &id } else { o * o - o * (2.0 * (2.0 * PI / k as f64).cos()) + &id };
    let e = SymmetricEigen::new(m.transpose() * &m);
    e.eigenvalues.iter().filter(|&&l| l.abs() < 1e-14).count()
}

fn oracle_feasible(o: &RMat, k: usize) -> bool {
    rotation_eigenspace_dim(o, k) >= 2
}

fn criterion_1() -> Verdict {
    let mut worst = 0.0_f64;
    let mut absolute = 0.0_f64;
    let mut slowest = 0.0_f64;
    let mut points = 0;
    for (g, d) in gallery_items() {
        let t = Instant::now();
        let grid = nullity_grid(&d, 200);
        for &z in &grid {
            for f in [d.f_at(z), g.closed_form_f(z)] {
                let q: C64 = f.iter().map(|x| x * x).sum();
                absolute = absolute.max(q.norm());
                worst = worst.max(q.norm() / (1.0 + f.norm_squared()));
            }
        }
        points = points.max(grid.len());
        slowest = slowest.max(t.elapsed().as_secs_f64());
    }
    check(
        worst <= 1e-12 && slowest < 5.0 && points >= 39_000,
        format!(
            "sup |Σf²|/(1+‖f‖²) = {worst:.2e} (absolute {absolute:.2e}) on ≤{points} points, slowest item {slowest:.2} s"
        ),
    )
}

fn criterion_2() -> Verdict {
    let q3 = random_orthogonal(3, 31);
    let q4 = random_orthogonal(4, 41);
    let conj = |q: &RMat, m: RMat| q * m * q.transpose();
    let z = |a: f64| block_diag(&[rot2(a), diag(&[1.0])]);
    let fixture: Vec<(&str, RMat, usize)> = vec![
        ("half turn about x3", z(PI), 2),
        ("rotation 2π/3", z(2.0 * PI / 3.0), 3),
        ("rotation 2π/4", z(PI / 2.0), 4),
        ("rotation 2π/5", z(2.0 * PI / 5.0), 5),
        ("rotation 4π/5", z(4.0 * PI / 5.0), 5),
        ("rotation 2π/6", z(PI / 3.0), 6),
        ("-I in R3", -RMat::identity(3, 3), 2),
        ("reflection diag(1,1,-1)", diag(&[1.0, 1.0, -1.0]), 2),
        ("rotoreflection 2π/3", block_diag(&[rot2(2.0 * PI / 3.0), diag(&[-1.0])]), 6),
        ("rotoreflection 2π/6", block_diag(&[rot2(PI / 3.0), diag(&[-1.0])]), 6),
        ("oblique reflection R3", conj(&q3, diag(&[-1.0, 1.0, 1.0])), 2),
        ("oblique rotation 2π/3", conj(&q3, z(2.0 * PI / 3.0)), 3),
        ("-I in R4", -RMat::identity(4, 4), 2),
        ("double rotation 2π/3", block_diag(&[rot2(2.0 * PI / 3.0), rot2(2.0 * PI / 3.0)]), 3),
        ("rotation 2π/3 with -I2", block_diag(&[rot2(2.0 * PI / 3.0), -RMat::identity(2, 2)]), 6),
        ("rotations 2π/6 and 2π/3", block_diag(&[rot2(PI / 3.0), rot2(2.0 * PI / 3.0)]), 6),
        ("double rotation 4π/5", block_diag(&[rot2(4.0 * PI / 5.0), rot2(4.0 * PI / 5.0)]), 5),
        ("quarter turn in R4", block_diag(&[rot2(PI / 2.0), RMat::identity(2, 2)]), 4),
        ("oblique reflection R4", conj(&q4, diag(&[-1.0, 1.0, 1.0, 1.0])), 2),
        ("oblique rotations 4π/5, 2π/5", conj(&q4, block_diag(&[rot2(4.0 * PI / 5.0), rot2(2.0 * PI / 5.0)])), 5),
    ];
    let mut mismatches = Vec::new();
    let mut feasible = 0;
    let mut worst_cert = 0.0_f64;
    let mut reflection_ok = false;
    for (name, o, k) in &fixture {
        let (domain, dact) = build_rotation_domain(*k, &[]).unwrap();
        let sact = cyclic_action(o, *k);
        let report = feasibility_check(&domain, &dact, &sact).unwrap();
        let oracle = oracle_feasible(o, *k);
        if report.feasible != oracle {
            mismatches.push(name.to_string());
        }
        if report.feasible {
            feasible += 1;
            for cert in report.certificates() {
                worst_cert = worst_cert.max(cert.rotation_residual(o)).max(cert.frame_residual());
            }
        }
        if *name == "reflection diag(1,1,-1)" {
            reflection_ok = !report.feasible && report.evidence().len() == 1;
        }
    }
    check(
        mismatches.is_empty() && reflection_ok && worst_cert <= 1e-10,
        format!(
            "{} actions, {} feasible, oracle mismatches {:?}, reflection infeasible: {}, certificate residual {:.1e}",
            fixture.len(),
            feasible,
            mismatches,
            reflection_ok,
            worst_cert
        ),
    )
}

fn criterion_3() -> Verdict {
    let groups: Vec<(&str, FiniteGroupTable)> = vec![
        ("Z2", FiniteGroupTable::cyclic(2).unwrap()),
        ("Z3", FiniteGroupTable::cyclic(3).unwrap()),
        ("Z4", FiniteGroupTable::cyclic(4).unwrap()),
        ("S3", symmetric_group_s3()),
    ];
    let mut certified = 0;
    let mut failures = Vec::new();
    let mut worst = 0.0_f64;
    for (name, t) in &groups {
        let action = regular_representation(t);
        for g in 1..t.order() {
            let k = t.element_order(g);
            let e = ElementRef::Index(g);
            let o = action.motion(&e).unwrap().linear();
            match find_invariant_rotation_plane(&action, &e, k).unwrap() {
                PlaneSearch::Certificate(cert) if (cert.angle - 2.0 * PI / k as f64).abs() <= 1e-15 => {
                    worst = worst.max(cert.rotation_residual(&o)).max(cert.frame_residual());
                    if !oracle_feasible(&o, k) {
                        failures.push(format!("{name}:{g} oracle disagrees"));
                    }
                    certified += 1;
                }
                _ => failures.push(format!("{name}:{g}")),
            }
        }
    }
    check(
        failures.is_empty() && worst <= 1e-10,
        format!("{certified} non-identity elements certified, residual {worst:.1e}, failures {failures:?}"),
    )
}

fn criterion_4() -> Verdict {
    let mut worst = 0.0_f64;
    let mut r = rng(404);
    for k in 2..=6usize {
        let (domain, dact) = build_rotation_domain(k, &[]).unwrap();
        let o = plane_rotation(3, 0, 1, 2.0 * PI / k as f64);
        let sact = cyclic_action(&o, k);
        let report = feasibility_check(&domain, &dact, &sact).unwrap();
        let rec = &fixed_point_set(&domain, &dact)[0];
        let Some(cert) = report.certificates().first().copied() else {
            return Err(format!("k = {k}: no certificate"));
        };
        let model = local_model_at_fixed_point(rec, cert).map_err(|e| format!("k = {k}: {e}"))?;
        let oc = o.map(|x| C64::new(x, 0.0));
        let omega = C64::from_polar(1.0, 2.0 * PI / k as f64);
        let e = 1 - k as i32;
        for _ in 0..100 {
            let zeta = C64::from_polar(r.gen_range(0.05..2.0), r.gen_range(0.0..2.0 * PI));
            let f = &model.y0 * zeta.powi(e);
            let lhs = &model.y0 * (omega * zeta).powi(e);
            let res = (lhs - &oc * &f).norm() / (1.0 + f.norm());
            worst = worst.max(res);
        }
        let q: C64 = model.y0.iter().map(|x| x * x).sum();
        worst = worst.max(q.norm());
    }
    check(worst <= 1e-12, format!("k = 2..6, 100 points each, residual {worst:.2e}"))
}

fn criterion_5() -> Verdict {
    let mut monomial = 0.0_f64;
    for m in -3..=3i32 {
        let v = integrate_path(|z| CVec::from_vec(vec![z.powi(m) / z]), &Path::circle(c(0.0, 0.0), 1.0), 1e-13)
            .map_err(|e| e.to_string())?
            .value[0];
        let exact = if m == 0 { c(0.0, 2.0 * PI) } else { c(0.0, 0.0) };
        monomial = monomial.max((v - exact).norm());
    }
    let d = gallery::catenoid(6).unwrap();
    let paths = build_path_system(&d.domain, &d.domain_action, d.basepoint).unwrap();
    let pv = period_vector(&d, &paths, 1e-13).map_err(|e| e.to_string())?;
    let period = pv.loops[0].value.clone();
    // residue oracle: trapezoid mean of the closed-form f on |z| = 1 is the z⁰ Laurent coefficient
    let n = 64;
    let mut mean = CVec::zeros(3);
    for j in 0..n {
        let z = C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
        let w = z.inv();
        mean += CVec::from_vec(vec![(w - z) / 2.0, I * (w + z) / 2.0, c(1.0, 0.0)]) * c(1.0 / n as f64, 0.0);
    }
    let oracle = mean * c(0.0, 2.0 * PI);
    let exact = CVec::from_vec(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 2.0 * PI)]);
    let err = cmax_abs(&(&period - &oracle)).max(cmax_abs(&(&period - &exact)));
    check(monomial <= 1e-12 && err <= 1e-10, format!("monomial error {monomial:.1e}, catenoid loop error {err:.1e}"))
}

fn criterion_6() -> Verdict {
    let t = Instant::now();
    let d = gallery::catenoid(6).unwrap();
    let paths = build_path_system(&d.domain, &d.domain_action, d.basepoint).unwrap();
    let target = PeriodTarget::standard(&d, &paths).unwrap();
    let spray = build_period_spray_for(&d, &paths, &target).map_err(|e| e.to_string())?;
    let k = spray.len() as f64;
    let t0: Vec<C64> = (0..spray.len()).map(|s| C64::from_polar(0.1 / k.sqrt(), 1.7 * s as f64 + 0.3)).collect();
    let start = t0.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let out = newton_correct(&spray.with_params(t0), &target, &NewtonConfig::default()).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let tail = out.trace.quadratic_tail(1e3, 3.min(out.trace.iterations));
    check(
        out.residuals.max() <= 1e-10 && out.trace.iterations <= 12 && secs < 10.0 && tail && out.trace.iterations >= 1,
        format!(
            "‖t₀‖ = {start:.3}, {} iterations, residuals {:?}, quadratic tail {tail}, {secs:.2} s",
            out.trace.iterations,
            out.trace.residuals.iter().map(|r| format!("{r:.1e}")).collect::<Vec<_>>()
        ),
    )
}

fn criterion_7() -> Verdict {
    let mut parts = Vec::new();
    let mut worst = 0.0_f64;
    for d in [gallery::catenoid(6).unwrap(), gallery::enneper(2).unwrap(), gallery::helicoid(2.0 * PI).unwrap()] {
        let (field, _) = solved(&d);
        let samples = field_samples(&field, 10_000, 7, 0.05);
        let r = immersion_equivariance_residual(&field, &samples).map_err(|e| e.to_string())?;
        parts.push(format!("{} {:.1e}/{}", d.domain.label(), r, samples.len()));
        worst = worst.max(r);
        if samples.len() < 10_000 {
            return Err(format!("only {} samples on {}", samples.len(), d.domain.label()));
        }
    }
    check(worst <= 1e-9, parts.join(", "))
}

fn criterion_8() -> Verdict {
    let mut worst = [0.0_f64; 3];
    let mut n = 0;
    for (_, d) in gallery_items() {
        let (field, _) = solved(&d);
        let grid = grid_points(&d.domain, 24, 0.25, field.singularities());
        let r = conformality_and_harmonicity(&field, &grid, 1e-4).map_err(|e| e.to_string())?;
        worst[0] = worst[0].max(r.conformal);
        worst[1] = worst[1].max(r.harmonic);
        worst[2] = worst[2].max(r.weierstrass.unwrap_or(f64::INFINITY));
        n += r.samples;
    }
    check(
        worst.iter().all(|&w| w <= 1e-6),
        format!("conformal {:.1e}, harmonic {:.1e}, 2∂F vs fθ {:.1e} over {n} points", worst[0], worst[1], worst[2]),
    )
}

/// Composite Simpson rule.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn criterion_9() -> Verdict {
    // catenoid in w = log z: λ = cosh s, K = −sech⁴ s
    let r_cat = 100.0_f64;
    let cat_oracle = 2.0 * PI * simpson(|s| -s.cosh().powi(-4) * s.cosh().powi(2), -r_cat.ln(), r_cat.ln(), 20_000);
    let cat = total_curvature(
        &gallery::catenoid(6).unwrap(),
        Truncation { center: c(0.0, 0.0), r_in: 1.0 / r_cat, r_out: r_cat },
        64,
        16,
    )
    .map_err(|e| e.to_string())?;
    // Enneper: λ = (1 + r²)/2, K = −16/(1 + r²)⁴
    let r_enn = 50.0_f64;
    let enn_oracle =
        2.0 * PI * simpson(|r| -16.0 / (1.0 + r * r).powi(4) * ((1.0 + r * r) / 2.0).powi(2) * r, 0.0, r_enn, 200_000);
    let enn = total_curvature(
        &gallery::enneper(1).unwrap(),
        Truncation { center: c(0.0, 0.0), r_in: 0.0, r_out: r_enn },
        64,
        16,
    )
    .map_err(|e| e.to_string())?;
    let full = -4.0 * PI;
    let cat_rel = ((cat.total - full) / full).abs();
    let enn_rel = ((enn.total - full) / full).abs();
    let cat_oracle_err = (cat.total - cat_oracle).abs();
    let enn_oracle_err = (enn.total - enn_oracle).abs();
    let max_k = cat.max_k.max(enn.max_k);
    check(
        cat_rel <= 0.02 && enn_rel <= 0.05 && cat_oracle_err <= 1e-3 && enn_oracle_err <= 1e-3 && max_k <= 1e-6,
        format!(
            "catenoid {:.6} ({:.2}% off -4π, oracle Δ {:.1e}), Enneper {:.6} ({:.2}% off, oracle Δ {:.1e}), max K {:.1e}",
            cat.total,
            100.0 * cat_rel,
            cat_oracle_err,
            enn.total,
            100.0 * enn_rel,
            enn_oracle_err,
            max_k
        ),
    )
}

fn criterion_10() -> Verdict {
    let mut ranks = Vec::new();
    let mut ok = true;
    for (g, d) in gallery_items() {
        let (field, _) = solved(&d);
        let samples = field_samples(&field, 64, 7 ^ 0x5eed, 0.1);
        let r = nondegeneracy_check(&field, &samples).map_err(|e| e.to_string())?;
        let planar = matches!(g, GalleryName::FlatPlane);
        ok &= if planar { r.rank == 2 && !r.nondegenerate } else { r.rank == 3 && r.nondegenerate };
        ranks.push(format!("{} {}", g.label(), r.rank));
    }
    check(ok, format!("affine ranks: {}", ranks.join(", ")))
}

fn criterion_11() -> Verdict {
    let d = gallery::catenoid(6).unwrap().with_base_value(RVec::from_vec(vec![-2.0, 0.0, 0.0]));
    let paths = build_path_system(&d.domain, &d.domain_action, d.basepoint).unwrap();
    let flux = vec![RVec::from_vec(vec![0.0, 0.0, 4.0 * PI])];
    let target = PeriodTarget::standard(&d, &paths).unwrap().with_flux(&d, &paths, flux).unwrap();
    let spray = build_period_spray_for(&d, &paths, &target).map_err(|e| e.to_string())?;
    let cfg = NewtonConfig { validity_radius: 1.0, ..NewtonConfig::default() };
    let out = newton_correct(&spray, &target, &cfg).map_err(|e| e.to_string())?;
    let solved_field = ImmersionField::new(out.data.clone(), paths.clone(), 1e-12).unwrap();
    let achieved = null_curve(&solved_field, 1e-9).unwrap().flux[0].clone();
    let flux_err = (&achieved - RVec::from_vec(vec![0.0, 0.0, 4.0 * PI])).amax();

    let enn = ImmersionField::from_data(gallery::enneper(1).unwrap(), 1e-12).unwrap();
    let h = null_curve(&enn, 1e-9).unwrap();
    let mut re_err = 0.0_f64;
    for &x in &field_samples(&enn, 50, 3, 0.1) {
        let hx = h.evaluate(x).map_err(|e| e.to_string())?;
        let fx = enn.evaluate(x).map_err(|e| e.to_string())?;
        re_err = re_err.max((hx.map(|z| z.re) - fx).amax());
    }

    let cat = ImmersionField::from_data(gallery::catenoid(6).unwrap(), 1e-12).unwrap();
    let hc = null_curve(&cat, 1e-9).unwrap();
    let obs_err = (&hc.flux[0] - RVec::from_vec(vec![0.0, 0.0, 2.0 * PI])).amax();
    check(
        flux_err <= 1e-9 && re_err <= 1e-12 && !h.obstruction && hc.obstruction && obs_err <= 1e-9,
        format!(
            "flux 4π hit to {flux_err:.1e} in {} iterations, Re H − F {re_err:.1e}, catenoid obstruction {} (error {obs_err:.1e})",
            out.trace.iterations, hc.obstruction
        ),
    )
}

fn criterion_12() -> Verdict {
    let mut discrepancy = 0.0_f64;
    for m in [1, 3, 6] {
        let d = gallery::catenoid(m).unwrap();
        for &p in d.domain.punctures() {
            let a = residue_at_puncture(&d, p, 0.5).map_err(|e| e.to_string())?;
            let b = residue_at_puncture(&d, p, 0.1).map_err(|e| e.to_string())?;
            discrepancy = discrepancy.max(cmax_abs(&(a - b)));
        }
    }
    let cat = ImmersionField::from_data(gallery::catenoid(6).unwrap(), 1e-12).unwrap();
    let rays = [0.1, 0.1 + PI / 2.0, 0.1 + PI, 0.1 + 1.5 * PI];
    let puncture =
        completeness_probe(&cat, End::Finite { point: c(0.0, 0.0) }, &rays, 12).map_err(|e| e.to_string())?;
    let infinity = completeness_probe(&cat, End::Infinity, &rays, 12).map_err(|e| e.to_string())?;
    // λ = |z|^{-1/2} has finite length into z = 0
    let control =
        completeness_probe_metric(|z| z.norm().powf(-0.5), End::Finite { point: c(0.0, 0.0) }, &rays, 1.0, 12)
            .map_err(|e| e.to_string())?;
    check(
        discrepancy <= 1e-9
            && puncture.verdict == CompletenessVerdict::Diverging
            && infinity.verdict == CompletenessVerdict::Diverging
            && control.verdict == CompletenessVerdict::FiniteLength,
        format!(
            "residue discrepancy {discrepancy:.1e}, catenoid ends {:?}/{:?}, integrable control {:?}",
            puncture.verdict, infinity.verdict, control.verdict
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("nullity suite", criterion_1),
        ("stabiliser feasibility oracle", criterion_2),
        ("regular representation", criterion_3),
        ("local model", criterion_4),
        ("period engine", criterion_5),
        ("Newton recovery", criterion_6),
        ("end-to-end equivariance", criterion_7),
        ("conformality and harmonicity", criterion_8),
        ("total curvature", criterion_9),
        ("nondegeneracy", criterion_10),
        ("flux control", criterion_11),
        ("ends and completeness", criterion_12),
    ];
    let mut out = std::io::stdout().lock();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let verdict = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        let (tag, detail) = match verdict {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        writeln!(out, "acceptance {:>2} {:<30} {tag} [{secs:6.2} s] {detail}", i + 1, name).unwrap();
    }
    writeln!(out, "acceptance: {} passed, {failed} failed", criteria.len() - failed).unwrap();
    out.flush().unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
