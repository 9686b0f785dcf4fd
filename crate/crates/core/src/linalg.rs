//! Small dense linear-algebra helpers shared by the group, spray and diagnostic code.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CVec = DVector<C64>;
pub type RVec = DVector<f64>;
pub type CMat = DMatrix<C64>;
pub type RMat = DMatrix<f64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn complexify(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

pub fn complexify_vec(v: &RVec) -> CVec {
    v.map(|x| C64::new(x, 0.0))
}

pub fn re_part(v: &CVec) -> RVec {
    v.map(|z| z.re)
}

pub fn im_part(v: &CVec) -> RVec {
    v.map(|z| z.im)
}

/// Bilinear (not Hermitian) square sum `Σ z_i²`.
pub fn bilinear_square(z: &CVec) -> C64 {
    z.iter().map(|w| w * w).sum()
}

pub fn cnorm(z: &CVec) -> f64 {
    z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(v: &RVec) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Largest component modulus of a complex vector.
pub fn cmax_abs(v: &CVec) -> f64 {
    v.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// Orthonormal basis of the numerical kernel of a complex matrix.
///
/// Columns of `V` whose singular value is at most `tol` (absolute). Returned in
/// the SVD's descending-singular-value order, so the sequence is deterministic.
pub fn complex_kernel(m: &CMat, tol: f64) -> Vec<CVec> {
    let n = m.ncols();
    // Pad to square so that the SVD returns a full right basis.
    let mut sq = CMat::zeros(m.nrows().max(n), n);
    sq.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = sq.svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let mut out = Vec::new();
    for (j, s) in svd.singular_values.iter().enumerate() {
        if *s <= tol {
            out.push(v_t.row(j).transpose().map(|z| z.conj()));
        }
    }
    out
}

pub fn real_kernel(m: &RMat, tol: f64) -> Vec<RVec> {
    let n = m.ncols();
    let mut sq = RMat::zeros(m.nrows().max(n), n);
    sq.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = sq.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    svd.singular_values.iter().enumerate().filter(|(_, s)| **s <= tol).map(|(j, _)| v_t.row(j).transpose()).collect()
}

/// Singular values of a real matrix in descending order.
pub fn singular_values(m: &RMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn complex_singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Minimum-norm least-squares solution `x = A⁺ b` with relative singular-value cutoff.
pub fn pinv_solve(a: &RMat, b: &RVec, rel_cutoff: f64) -> RVec {
    if a.nrows() == 0 || a.ncols() == 0 {
        return RVec::zeros(a.ncols());
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0_f64, |m, s| m.max(*s));
    let cutoff = smax * rel_cutoff;
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let mut x = RVec::zeros(a.ncols());
    for (j, s) in svd.singular_values.iter().enumerate() {
        if *s > cutoff && *s > 0.0 {
            let coef = u.column(j).dot(b) / s;
            x += v_t.row(j).transpose() * coef;
        }
    }
    x
}

/// Minimum-norm solution restricted to the `rank` largest singular directions.
pub fn truncated_solve(a: &RMat, b: &RVec, rank: usize) -> RVec {
    if a.nrows() == 0 || a.ncols() == 0 || rank == 0 {
        return RVec::zeros(a.ncols());
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let mut x = RVec::zeros(a.ncols());
    for &j in order.iter().take(rank) {
        let s = svd.singular_values[j];
        if s > 0.0 {
            x += v_t.row(j).transpose() * (u.column(j).dot(b) / s);
        }
    }
    x
}

/// Greedy column-pivoted QR (modified Gram–Schmidt): indices of a maximal
/// independent column set in pivot order.
pub fn pivoted_columns(m: &CMat, rel_tol: f64) -> Vec<usize> {
    let ncols = m.ncols();
    let mut cols: Vec<CVec> = (0..ncols).map(|j| m.column(j).into_owned()).collect();
    let scale = cols.iter().map(cnorm).fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    let mut chosen = Vec::new();
    let mut remaining: Vec<usize> = (0..ncols).collect();
    while !remaining.is_empty() {
        // Largest residual norm; ties resolved by lowest index.
        let (pos, best, norm) = remaining
            .iter()
            .enumerate()
            .map(|(p, &j)| (p, j, cnorm(&cols[j])))
            .fold((0, usize::MAX, -1.0), |acc, x| if x.2 > acc.2 { x } else { acc });
        if norm <= rel_tol * scale {
            break;
        }
        remaining.remove(pos);
        let q = &cols[best] / C64::new(norm, 0.0);
        for &j in &remaining {
            let proj = q.dotc(&cols[j]);
            cols[j] -= &q * proj;
        }
        chosen.push(best);
    }
    chosen
}

/// Numerical rank with threshold relative to the largest singular value.
pub fn numerical_rank(s: &[f64], rel: f64) -> usize {
    let smax = s.iter().fold(0.0_f64, |m, x| m.max(*x));
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|x| **x > rel * smax).count()
}
