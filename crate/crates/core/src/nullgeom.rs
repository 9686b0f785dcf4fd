//! The null quadric `{Σ zᵢ² = 0}` in Cⁿ and flows that preserve it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{bilinear_square, cnorm, complexify, CMat, CVec, C64};
use crate::symgroup::RigidMotion;

pub const NULL_TOL: f64 = 1e-10;
const RETRACT_WINDOW: f64 = 1e-4;

pub fn is_null(z: &CVec, tol: f64) -> bool {
    bilinear_square(z).norm() <= tol * z.norm_squared().max(1.0)
}

/// `|Σ zᵢ²| / ‖z‖²`, the scale-free distance to the quadric.
pub fn relative_null_residual(z: &CVec) -> f64 {
    let n2 = z.norm_squared();
    if n2 == 0.0 {
        return 0.0;
    }
    bilinear_square(z).norm() / n2
}

/// Nonzero vector on the null quadric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullVector {
    z: CVec,
    tol: f64,
}

impl NullVector {
    pub fn new(z: CVec) -> Result<Self> {
        Self::with_tol(z, NULL_TOL)
    }

    pub fn with_tol(z: CVec, tol: f64) -> Result<Self> {
        if z.iter().any(|w| !w.re.is_finite() || !w.im.is_finite()) {
            return Err(Error::InvalidInput("null vector has nonfinite entries".into()));
        }
        if cnorm(&z) == 0.0 {
            return Err(Error::InvalidInput("the zero vector is excluded from the null quadric".into()));
        }
        let residual = relative_null_residual(&z);
        if residual > tol {
            return Err(Error::NotNearQuadric { residual });
        }
        Ok(NullVector { z, tol })
    }

    pub fn as_vec(&self) -> &CVec {
        &self.z
    }

    pub fn into_vec(self) -> CVec {
        self.z
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }
}

/// Point of the projectivised quadric; the largest-modulus entry is 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveNullPoint {
    rep: CVec,
}

impl ProjectiveNullPoint {
    pub fn new(z: &NullVector) -> Self {
        let v = z.as_vec();
        let mut lead = C64::new(0.0, 0.0);
        for w in v.iter() {
            if w.norm() > lead.norm() * (1.0 + 1e-12) {
                lead = *w;
            }
        }
        ProjectiveNullPoint { rep: v / lead }
    }

    pub fn representative(&self) -> &CVec {
        &self.rep
    }

    /// Distance between normalised representatives.
    pub fn distance(&self, other: &ProjectiveNullPoint) -> f64 {
        cnorm(&(&self.rep - &other.rep))
    }
}

/// Projects a near-null vector onto the quadric along `z̄`:
/// `z + α z̄` with `α = −q / (‖z‖² + √(‖z‖⁴ − |q|²))`, `q = Σ zᵢ²`.
pub fn retract_to_null(z: &CVec) -> Result<NullVector> {
    let q = bilinear_square(z);
    let n2 = z.norm_squared();
    if n2 == 0.0 || q.norm() > RETRACT_WINDOW * n2 {
        return Err(Error::NotNearQuadric { residual: if n2 == 0.0 { f64::INFINITY } else { q.norm() / n2 } });
    }
    if q.norm() == 0.0 {
        return NullVector::with_tol(z.clone(), NULL_TOL);
    }
    let alpha = -q / (n2 + (n2 * n2 - q.norm_sqr()).sqrt());
    let out = z + z.map(|w| w.conj()) * alpha;
    NullVector::with_tol(out, NULL_TOL)
}

/// `r·O·z`, the differential of a rigid motion acting on a null vector.
pub fn apply_motion_differential(m: &RigidMotion, z: &NullVector) -> NullVector {
    let w = complexify(&m.linear()) * z.as_vec();
    NullVector { z: w, tol: z.tol }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowKind {
    /// Complex rotation in the coordinate plane `(j, l)`, taking `e_j` towards `e_l`.
    Rotation {
        j: usize,
        l: usize,
    },
    Scaling,
}

/// Generator of a one-parameter subgroup of `C*·O(n, C)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadricFlowGenerator {
    pub dim: usize,
    pub kind: FlowKind,
}

impl QuadricFlowGenerator {
    pub fn rotation(dim: usize, j: usize, l: usize) -> Result<Self> {
        if j == l || j >= dim || l >= dim {
            return Err(Error::InvalidInput(format!("bad rotation plane ({j}, {l}) in dimension {dim}")));
        }
        Ok(QuadricFlowGenerator { dim, kind: FlowKind::Rotation { j, l } })
    }

    pub fn scaling(dim: usize) -> Self {
        QuadricFlowGenerator { dim, kind: FlowKind::Scaling }
    }

    /// All coordinate-plane rotations (lexicographic) followed by the scaling.
    pub fn standard_family(dim: usize) -> Vec<Self> {
        let mut out = Vec::with_capacity(dim * (dim - 1) / 2 + 1);
        for j in 0..dim {
            for l in j + 1..dim {
                out.push(QuadricFlowGenerator { dim, kind: FlowKind::Rotation { j, l } });
            }
        }
        out.push(Self::scaling(dim));
        out
    }

    /// Lie-algebra matrix `A`; the flow is `exp(tA)`.
    pub fn matrix(&self) -> CMat {
        let n = self.dim;
        match self.kind {
            FlowKind::Rotation { j, l } => {
                let mut a = CMat::zeros(n, n);
                a[(l, j)] = C64::new(1.0, 0.0);
                a[(j, l)] = C64::new(-1.0, 0.0);
                a
            }
            FlowKind::Scaling => CMat::identity(n, n),
        }
    }

    /// `exp(tA)` in closed form.
    pub fn exp(&self, t: C64) -> CMat {
        let n = self.dim;
        match self.kind {
            FlowKind::Rotation { j, l } => {
                let mut m = CMat::identity(n, n);
                let (c, s) = (t.cos(), t.sin());
                m[(j, j)] = c;
                m[(l, l)] = c;
                m[(l, j)] = s;
                m[(j, l)] = -s;
                m
            }
            FlowKind::Scaling => CMat::identity(n, n) * t.exp(),
        }
    }
}

pub fn flow(generator: &QuadricFlowGenerator, t: C64, z: &NullVector) -> NullVector {
    NullVector { z: generator.exp(t) * z.as_vec(), tol: z.tol }
}
