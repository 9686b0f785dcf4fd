//! Period-dominating sprays `f_t = exp(Σ t_s w_s A_s) · f`.
//!
//! Each slot pairs an eigenvector `A` of `Ad_{dg}` on `so(n, C) ⊕ C·I` with a
//! holomorphic weight satisfying `w(gz) = λ w(z)` for the same eigenvalue, so
//! every deformed map stays null and equivariant. Nilpotent directions get
//! growing weights (their exponential is polynomial in `w`); semisimple
//! directions only get bounded ones.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{winding_number, Path, PathSystem};
use crate::error::{Error, Result};
use crate::linalg::{
    c, complex_kernel, complex_singular_values, complexify, numerical_rank, pivoted_columns, singular_values, CMat,
    CVec, RMat, C64, I,
};
use crate::periods::{integrate_path, PeriodTarget, PeriodVector};
use crate::sampling::{rng, sample_domain};
use crate::series::{Series, Term};
use crate::symgroup::{ElementRef, GroupStructure};
use crate::wdata::{nullity_residual, Deformation, DeformationSlot, WeierstrassData, Weight};

pub const DOMINATION_GATE: f64 = 1e-6;
const CLUSTER_TOL: f64 = 1e-8;
const COLUMN_TOL: f64 = 1e-12;

/// Row layout of the real equation vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquationLayout {
    pub n: usize,
    pub loops: usize,
    pub flux: bool,
    pub connectors: usize,
    pub marked: usize,
}

impl EquationLayout {
    pub fn new(n: usize, paths: &PathSystem, target: &PeriodTarget) -> Self {
        EquationLayout {
            n,
            loops: paths.loops.len(),
            flux: target.flux.is_some(),
            connectors: paths.connectors.len(),
            marked: paths.marked.len(),
        }
    }

    pub fn count(&self) -> usize {
        self.n * (self.loops * if self.flux { 2 } else { 1 } + self.connectors + self.marked)
    }

    fn loop_stride(&self) -> usize {
        self.n * if self.flux { 2 } else { 1 }
    }

    pub fn loop_re(&self, i: usize) -> usize {
        i * self.loop_stride()
    }

    pub fn loop_im(&self, i: usize) -> Option<usize> {
        self.flux.then(|| i * self.loop_stride() + self.n)
    }

    pub fn connector(&self, j: usize) -> usize {
        self.loops * self.loop_stride() + j * self.n
    }

    pub fn marked(&self, j: usize) -> usize {
        self.connector(self.connectors) + j * self.n
    }

    /// Number of complex entries in a period column.
    pub fn periods(&self) -> usize {
        self.n * (self.loops + self.connectors + self.marked)
    }

    /// Linear part of the equation map applied to a complex period column.
    pub fn realify(&self, col: &CVec) -> Vec<f64> {
        let n = self.n;
        let mut out = Vec::with_capacity(self.count());
        for i in 0..self.loops {
            out.extend((0..n).map(|r| col[i * n + r].re));
            if self.flux {
                out.extend((0..n).map(|r| col[i * n + r].im));
            }
        }
        for r in self.loops * n..self.periods() {
            out.push(col[r].re);
        }
        out
    }
}

/// Loops, connectors and marked entries of a period vector, concatenated.
pub fn period_column(pv: &PeriodVector) -> CVec {
    let vals: Vec<C64> = pv.integrated().flat_map(|e| e.value.iter().copied()).collect();
    CVec::from_vec(vals)
}

/// Real Jacobian of the equations from complex period derivatives: columns
/// `(∂/∂Re t_s, ∂/∂Im t_s)` per slot.
pub fn real_jacobian(layout: &EquationLayout, complex: &CMat) -> RMat {
    let m = layout.count();
    let mut out = RMat::zeros(m, 2 * complex.ncols());
    for s in 0..complex.ncols() {
        let col = complex.column(s).into_owned();
        let re = layout.realify(&col);
        let im = layout.realify(&(&col * I));
        for r in 0..m {
            out[(r, 2 * s)] = re[r];
            out[(r, 2 * s + 1)] = im[r];
        }
    }
    out
}

/// Functionals on the equation vector that vanish for every equivariant map:
/// loop periods lie in the fixed space of the puncture's stabiliser, and the
/// orbit of a connector closes up into a loop whose period is known.
pub fn automatic_relations(data: &WeierstrassData, paths: &PathSystem, layout: &EquationLayout) -> Result<RMat> {
    let n = layout.n;
    let m = layout.count();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let push_block = |rows: &mut Vec<Vec<f64>>, blocks: &[(usize, RMat)]| {
        for r in 0..n {
            let mut row = vec![0.0; m];
            for (off, mat) in blocks {
                for col in 0..n {
                    row[off + col] += mat[(r, col)];
                }
            }
            rows.push(row);
        }
    };
    let id = RMat::identity(n, n);
    for (i, l) in paths.loops.iter().enumerate() {
        for h in data.domain_action.stabiliser(l.puncture) {
            let fix = &id - data.space_action.motion(&h)?.linear();
            push_block(&mut rows, &[(layout.loop_re(i), fix.clone())]);
            if let Some(off) = layout.loop_im(i) {
                push_block(&mut rows, &[(off, fix)]);
            }
        }
    }
    if let GroupStructure::Finite(table) = data.domain_action.group() {
        for (j, conn) in paths.connectors.iter().enumerate() {
            let ElementRef::Index(g) = conn.element else { continue };
            let map = data.domain_action.map(&conn.element)?;
            if map.fixed_point().is_none() {
                continue;
            }
            let k = table.element_order(g);
            let dg = data.space_action.motion(&conn.element)?.linear();
            let mut closed: Path = conn.path.clone();
            let mut power = map;
            let mut sum = id.clone();
            let mut dgj = id.clone();
            for _ in 1..k {
                closed = closed.then(&conn.path.transform(&power));
                power = power.compose(&map);
                dgj = &dg * dgj;
                sum += &dgj;
            }
            let mut blocks = vec![(layout.connector(j), sum)];
            let mut covered = true;
            for &q in &paths.obstacles {
                let w = winding_number(&closed, q);
                if w == 0 {
                    continue;
                }
                match paths.orbit_map.iter().find(|e| (e.center - q).norm() <= 1e-9) {
                    Some(e) => {
                        let de = data.space_action.motion(&e.element)?.linear();
                        blocks.push((layout.loop_re(e.loop_index), de * (-(w as f64))));
                    }
                    // an enclosed fixed point in the domain contributes nothing
                    None if data.domain.contains(q) => {}
                    None => covered = false,
                }
            }
            if covered {
                push_block(&mut rows, &blocks);
            }
        }
    }
    let mut r = RMat::zeros(rows.len(), m);
    for (i, row) in rows.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            r[(i, j)] = *x;
        }
    }
    Ok(r)
}

/// Real rank the period Jacobian must reach: equations minus automatic relations.
pub fn required_rank(data: &WeierstrassData, paths: &PathSystem, layout: &EquationLayout) -> Result<usize> {
    let rel = automatic_relations(data, paths, layout)?;
    let s = singular_values(&rel);
    let rank = s.iter().filter(|x| **x > 1e-9).count();
    Ok(layout.count() - rank)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SprayFamily {
    pub core: WeierstrassData,
    pub paths: PathSystem,
    pub slots: Vec<DeformationSlot>,
    pub params: Vec<C64>,
    /// Number of candidate directions examined before pruning.
    pub candidates: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SprayCheck {
    pub nullity: f64,
    pub equivariance: f64,
    pub trials: usize,
}

impl SprayFamily {
    pub fn from_slots(core: WeierstrassData, paths: PathSystem, slots: Vec<DeformationSlot>) -> Self {
        let params = vec![C64::new(0.0, 0.0); slots.len()];
        SprayFamily { core, paths, candidates: slots.len(), slots, params }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn with_params(&self, t: Vec<C64>) -> Self {
        SprayFamily { params: t, ..self.clone() }
    }

    pub fn param_norm(&self) -> f64 {
        self.params.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt()
    }

    /// The deformed data at parameter `t`.
    pub fn data_at(&self, t: &[C64]) -> WeierstrassData {
        if self.slots.is_empty() {
            return self.core.clone();
        }
        self.core.with_deformation(Deformation { slots: self.slots.clone(), params: t.to_vec() })
    }

    pub fn data(&self) -> WeierstrassData {
        self.data_at(&self.params)
    }

    /// Nullity and equivariance of `f_t` for random `t` in the ball of the
    /// given radius, sampled along the path system.
    pub fn check_ball(&self, radius: f64, trials: usize, seed: u64) -> Result<SprayCheck> {
        let points = self.path_samples();
        let mut r = rng(seed);
        let mut nullity = 0.0_f64;
        let mut equivariance = 0.0_f64;
        for _ in 0..trials {
            let mut t: Vec<C64> = (0..self.len()).map(|_| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
            let norm = t.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
            let scale = radius * r.gen_range(0.0f64..1.0).sqrt() / norm;
            t.iter_mut().for_each(|x| *x *= scale);
            let data = self.data_at(&t);
            nullity = nullity.max(nullity_residual(|z| data.f_at(z), &points));
            for g in data.domain_action.group().generator_refs() {
                let map = data.domain_action.map(&g)?;
                let dg = complexify(&data.space_action.motion(&g)?.linear());
                for &z in &points {
                    let f = data.f_at(z);
                    let e =
                        crate::linalg::cnorm(&(data.f_at(map.apply(z)) - &dg * &f)) / (1.0 + crate::linalg::cnorm(&f));
                    equivariance = equivariance.max(e);
                }
            }
        }
        Ok(SprayCheck { nullity, equivariance, trials })
    }

    fn path_samples(&self) -> Vec<C64> {
        let paths = self.paths.loops.iter().map(|l| &l.path).chain(self.paths.connectors.iter().map(|c| &c.path));
        let mut out = Vec::new();
        for p in paths {
            for piece in p.pieces() {
                out.extend((0..16).map(|j| piece.point((j as f64 + 0.5) / 16.0)));
            }
        }
        if out.is_empty() {
            out = sample_domain(&self.core.domain, 64, 7, 1e-2);
        }
        out
    }
}

fn lie_basis(n: usize) -> Vec<CMat> {
    let mut out = Vec::new();
    for j in 0..n {
        for l in j + 1..n {
            let mut b = CMat::zeros(n, n);
            b[(j, l)] = c(1.0, 0.0);
            b[(l, j)] = c(-1.0, 0.0);
            out.push(b);
        }
    }
    out.push(CMat::identity(n, n));
    out
}

/// `u e_mᵀ − e_m uᵀ` with `u = e_j ± i e_l`: cube-nilpotent elements spanning `so(n, C)`.
fn nilpotent_basis(n: usize) -> Vec<CMat> {
    let mut out = Vec::new();
    for j in 0..n {
        for l in j + 1..n {
            for sign in [1.0, -1.0] {
                for m in (0..n).filter(|m| *m != j && *m != l) {
                    let mut u = CVec::zeros(n);
                    u[j] = c(1.0, 0.0);
                    u[l] = c(0.0, sign);
                    let mut e = CVec::zeros(n);
                    e[m] = c(1.0, 0.0);
                    out.push(&u * e.transpose() - &e * u.transpose());
                }
            }
        }
    }
    out
}

fn is_nilpotent(a: &CMat) -> bool {
    let scale = a.norm();
    if scale == 0.0 {
        return true;
    }
    let mut p = a.clone();
    for _ in 1..a.nrows() {
        p = &p * a;
    }
    p.norm() <= 1e-10 * scale.powi(a.nrows() as i32)
}

/// Eigenpairs of `B ↦ O B Oᵀ` on `so(n, C) ⊕ C·I`.
fn ad_eigenspaces(o: &RMat) -> Vec<(C64, Vec<CMat>)> {
    let n = o.nrows();
    let basis = lie_basis(n);
    let dim = basis.len();
    let coords = |x: &CMat| -> CVec {
        let mut v = CVec::zeros(dim);
        let mut idx = 0;
        for j in 0..n {
            for l in j + 1..n {
                v[idx] = x[(j, l)];
                idx += 1;
            }
        }
        v[dim - 1] = x[(0, 0)];
        v
    };
    let oc = complexify(o);
    let mut ad = RMat::zeros(dim, dim);
    for (b, elem) in basis.iter().enumerate() {
        let img = coords(&(&oc * elem * oc.transpose()));
        for r in 0..dim {
            ad[(r, b)] = img[r].re;
        }
    }
    if (&ad - RMat::identity(dim, dim)).amax() <= CLUSTER_TOL {
        let mut all = nilpotent_basis(n);
        all.extend(basis);
        return vec![(c(1.0, 0.0), all)];
    }
    let mut eig: Vec<C64> = Vec::new();
    for e in ad.clone().complex_eigenvalues().iter() {
        if !eig.iter().any(|x| (x - e).norm() <= 1e-6) {
            eig.push(*e);
        }
    }
    eig.sort_by(|a, b| {
        let ang = |z: &C64| z.arg().rem_euclid(2.0 * PI);
        ang(a).total_cmp(&ang(b))
    });
    let adc = complexify(&ad);
    eig.into_iter()
        .map(|lambda| {
            let shifted = &adc - CMat::identity(dim, dim) * lambda;
            let vecs = complex_kernel(&shifted, 1e-7)
                .into_iter()
                .map(|v| {
                    let mut a = CMat::zeros(n, n);
                    for (b, elem) in basis.iter().enumerate() {
                        a += elem * v[b];
                    }
                    a
                })
                .collect();
            (lambda, vecs)
        })
        .collect()
}

/// `(z − c)^q` for `q ≥ 0`, expanded about the origin.
fn shifted_power(center: C64, q: u32) -> Series {
    let mut terms = Vec::new();
    let mut binom = 1.0;
    for j in 0..=q {
        terms.push(Term::monomial((-center).powi((q - j) as i32) * binom, j as i32));
        binom = binom * (q - j) as f64 / (j + 1) as f64;
    }
    Series::from_terms(terms)
}

fn power_weight(center: C64, q: i32) -> Weight {
    if q >= 0 {
        Weight::series(shifted_power(center, q as u32))
    } else if center.norm() == 0.0 {
        Weight::series(Series::monomial(c(1.0, 0.0), q))
    } else {
        Weight { num: Series::constant(c(1.0, 0.0)), den: Some(shifted_power(center, (-q) as u32)) }
    }
}

enum WeightFamily {
    Trivial { punctures: Vec<C64> },
    Rotation { center: C64, a: C64, k: usize, center_in_domain: bool, free_orbits: Vec<C64> },
    Translation { tau: C64 },
}

impl WeightFamily {
    fn weights(&self, lambda: C64, nilpotent: bool) -> Vec<(Weight, String)> {
        let one = c(1.0, 0.0);
        let constant = || (Weight::series(Series::constant(one)), "1".to_string());
        match self {
            WeightFamily::Trivial { punctures } => {
                let mut out = vec![constant()];
                if nilpotent {
                    out.push((Weight::series(Series::monomial(one, 1)), "z".into()));
                    out.push((Weight::series(Series::monomial(one, 2)), "z^2".into()));
                    for p in punctures {
                        out.push((power_weight(*p, -1), format!("1/(z-({p}))")));
                    }
                }
                out
            }
            WeightFamily::Rotation { center, a, k, center_in_domain, free_orbits } => {
                let k = *k as i32;
                let Some(q0) = (0..k).find(|q| (a.powi(*q) - lambda).norm() <= 1e-8) else { return Vec::new() };
                if !nilpotent {
                    return vec![(power_weight(*center, q0), format!("(z-c)^{q0}"))];
                }
                let mut qs = vec![q0];
                qs.push(if *center_in_domain { q0 + k } else { q0 - k });
                let mut out: Vec<(Weight, String)> =
                    qs.into_iter().map(|q| (power_weight(*center, q), format!("(z-c)^{q}"))).collect();
                for p in free_orbits {
                    let den = shifted_power(*center, k as u32).add(&Series::constant(-(p - center).powi(k)));
                    out.push((
                        Weight { num: shifted_power(*center, q0 as u32), den: Some(den) },
                        format!("(z-c)^{q0}/((z-c)^{k}-(p-c)^{k}), p = {p}"),
                    ));
                }
                out
            }
            WeightFamily::Translation { tau } => {
                let js: &[i32] = if nilpotent { &[-1, 0, 1] } else { &[0] };
                js.iter()
                    .map(|j| {
                        let beta = (lambda.ln() + c(0.0, 2.0 * PI * *j as f64)) / tau;
                        (
                            Weight::series(Series::from_terms(vec![Term::exponential(one, 0, beta)])),
                            format!("exp({beta}·z)"),
                        )
                    })
                    .collect()
            }
        }
    }
}

fn weight_family(data: &WeierstrassData) -> Result<(WeightFamily, RMat)> {
    let n = data.dim();
    let gens = data.domain_action.group().generator_refs();
    match (data.domain_action.group(), gens.as_slice()) {
        (GroupStructure::Finite(t), []) if t.order() == 1 => {
            Ok((WeightFamily::Trivial { punctures: data.domain.punctures().to_vec() }, RMat::identity(n, n)))
        }
        (GroupStructure::Finite(t), [g]) => {
            let map = data.domain_action.map(g)?;
            let center = map
                .fixed_point()
                .ok_or_else(|| Error::UnsupportedAction("finite generator without a fixed point".into()))?;
            let ElementRef::Index(gi) = g else { unreachable!("finite generators are indices") };
            let k = t.element_order(*gi);
            if k != t.order() {
                return Err(Error::UnsupportedAction("sprays need a cyclic group with a single generator".into()));
            }
            let motion = data.space_action.motion(g)?;
            let o = motion.linear() / motion.scale;
            let mut free_orbits: Vec<C64> = Vec::new();
            let mut seen: Vec<C64> = Vec::new();
            for &p in data.domain.punctures() {
                if (p - center).norm() <= 1e-9 || seen.iter().any(|q| (q - p).norm() <= 1e-9) {
                    continue;
                }
                seen.extend(data.domain_action.orbit(p).unwrap_or_default());
                free_orbits.push(p);
            }
            let fam = WeightFamily::Rotation {
                center,
                a: map.a,
                k,
                center_in_domain: data.domain.contains(center),
                free_orbits,
            };
            Ok((fam, o))
        }
        (GroupStructure::Discrete { generators: 1, .. }, [g]) => {
            let map = data.domain_action.map(g)?;
            if !map.is_translation() {
                return Err(Error::UnsupportedAction("infinite cyclic group acting by non-translations".into()));
            }
            let motion = data.space_action.motion(g)?;
            Ok((WeightFamily::Translation { tau: map.b }, motion.linear() / motion.scale))
        }
        _ => Err(Error::UnsupportedAction("sprays are built for trivial, cyclic and translation groups only".into())),
    }
}

/// All candidate slots, in a deterministic order.
pub fn candidate_slots(data: &WeierstrassData) -> Result<Vec<DeformationSlot>> {
    let (family, o) = weight_family(data)?;
    let mut out = Vec::new();
    for (lambda, vecs) in ad_eigenspaces(&o) {
        for (i, a) in vecs.into_iter().enumerate() {
            let nil = is_nilpotent(&a);
            for (w, label) in family.weights(lambda, nil) {
                out.push(DeformationSlot {
                    weight: w,
                    generator: a.clone(),
                    label: format!("λ={:.6}{:+.6}i A{i} · {label}", lambda.re, lambda.im),
                });
            }
        }
    }
    Ok(out)
}

/// `∂𝒫/∂t_s` at `t = 0`: `∫ w_s A_s fθ` over every loop, connector and marked path.
pub fn slot_columns(core: &WeierstrassData, paths: &PathSystem, slots: &[DeformationSlot]) -> Result<CMat> {
    let n = core.dim();
    let all: Vec<&Path> = paths
        .loops
        .iter()
        .map(|l| &l.path)
        .chain(paths.connectors.iter().map(|c| &c.path))
        .chain(paths.marked.iter().map(|m| &m.path))
        .collect();
    let mut m = CMat::zeros(n * all.len(), slots.len());
    if slots.is_empty() {
        return Ok(m);
    }
    let integrals: Vec<Result<CVec>> = all
        .par_iter()
        .map(|path| {
            let h = |z: C64| {
                let g = core.form_at(z);
                let mut v = CVec::zeros(n * slots.len());
                for (s, slot) in slots.iter().enumerate() {
                    let col = &slot.generator * &g * slot.weight.eval(z);
                    v.rows_mut(s * n, n).copy_from(&col);
                }
                v
            };
            Ok(integrate_path(h, path, COLUMN_TOL)?.value)
        })
        .collect();
    for (p, r) in integrals.into_iter().enumerate() {
        let v = r?;
        for s in 0..slots.len() {
            m.view_mut((p * n, s), (n, 1)).copy_from(&v.rows(s * n, n));
        }
    }
    Ok(m)
}

/// Rank-one value set: every sampled `f(z)` lies on one complex line.
pub fn is_flat(data: &WeierstrassData) -> bool {
    let poles: Vec<C64> = data.f.poles().iter().map(|p| p.0).collect();
    let pts: Vec<C64> = sample_domain(&data.domain, 32, 0xf1a7, 1e-2)
        .into_iter()
        .filter(|z| poles.iter().all(|p| (z - p).norm() > 1e-2))
        .collect();
    let mut m = CMat::zeros(data.dim(), pts.len());
    for (j, z) in pts.iter().enumerate() {
        m.set_column(j, &data.f_at(*z));
    }
    numerical_rank(&complex_singular_values(&m), 1e-8) <= 1
}

/// Builds a spray for the standard targets (no flux prescribed).
pub fn build_period_spray(core: &WeierstrassData, paths: &PathSystem) -> Result<SprayFamily> {
    let target = PeriodTarget::standard(core, paths)?;
    build_period_spray_for(core, paths, &target)
}

/// Builds a spray whose period Jacobian dominates the equations of `target`.
pub fn build_period_spray_for(
    core: &WeierstrassData,
    paths: &PathSystem,
    target: &PeriodTarget,
) -> Result<SprayFamily> {
    let layout = EquationLayout::new(core.dim(), paths, target);
    if layout.count() == 0 {
        return Ok(SprayFamily::from_slots(core.clone(), paths.clone(), Vec::new()));
    }
    if is_flat(core) {
        return Err(Error::FlatCore(core.domain.label().to_string()));
    }
    let candidates = candidate_slots(core)?;
    let cols = slot_columns(core, paths, &candidates)?;
    let mut keep = pivoted_columns(&cols, 1e-8);
    keep.sort_unstable();
    let slots: Vec<DeformationSlot> = keep.iter().map(|&i| candidates[i].clone()).collect();
    let kept = cols.select_columns(&keep);
    let required = required_rank(core, paths, &layout)?;
    let s = singular_values(&real_jacobian(&layout, &kept));
    let sigma = if required == 0 { f64::INFINITY } else { s.get(required - 1).copied().unwrap_or(0.0) };
    if sigma < DOMINATION_GATE {
        let rank = s.iter().filter(|x| **x >= DOMINATION_GATE).count();
        return Err(Error::InsufficientDirections { rank, required });
    }
    let mut family = SprayFamily::from_slots(core.clone(), paths.clone(), slots);
    family.candidates = candidates.len();
    Ok(family)
}
