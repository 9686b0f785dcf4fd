use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::motion::{ElementRef, GroupStructure, RigidMotion, SpaceAction};
use crate::error::{Error, Result};
use crate::linalg::{complex_kernel, complexify, complexify_vec, real_kernel, CMat, CVec, RMat, RVec, C64, I};

pub const EIGEN_MATCH_TOL: f64 = 1e-8;
const FRAME_TOL: f64 = 1e-10;

/// Conformal frame `(u, v)` of a 2-plane on which an element acts as rotation by `angle`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneRotationCertificate {
    pub u: RVec,
    pub v: RVec,
    pub angle: f64,
    pub element: ElementRef,
    pub order: usize,
}

impl PlaneRotationCertificate {
    /// Max deviation of `O` from the rotation by `angle` on span(u, v).
    pub fn rotation_residual(&self, rotation: &RMat) -> f64 {
        let (s, c) = self.angle.sin_cos();
        let ou = rotation * &self.u - (&self.u * c + &self.v * s);
        let ov = rotation * &self.v - (&self.v * c - &self.u * s);
        ou.amax().max(ov.amax()) / self.u.norm().max(f64::MIN_POSITIVE)
    }

    /// Relative defect of the conformal-frame conditions.
    pub fn frame_residual(&self) -> f64 {
        let nu = self.u.norm();
        if nu == 0.0 {
            return f64::INFINITY;
        }
        ((nu * nu - self.v.norm_squared()).abs() + 2.0 * self.u.dot(&self.v).abs()) / (nu * nu)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfeasibleEvidence {
    pub element: ElementRef,
    pub order: usize,
    pub target_root: C64,
    /// Eigenvalues of the linear part, descending by |Im|, then lexicographic.
    pub eigenvalues: Vec<C64>,
    /// How many eigenvalues matched the target root.
    pub matched: usize,
}

impl InfeasibleEvidence {
    pub fn describe(&self) -> String {
        let eig: Vec<String> = self.eigenvalues.iter().map(|z| format!("{:.6}{:+.6}i", z.re, z.im)).collect();
        format!(
            "stabiliser condition fails: element {} of order {} needs an invariant plane rotated by 2π/{} \
             (eigenvalue {:.6}{:+.6}i with a 2-dimensional real eigenplane), eigenvalues found: [{}]",
            self.element.label(),
            self.order,
            self.order,
            self.target_root.re,
            self.target_root.im,
            eig.join(", ")
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PlaneSearch {
    Certificate(PlaneRotationCertificate),
    Infeasible(InfeasibleEvidence),
}

impl PlaneSearch {
    pub fn certificate(&self) -> Option<&PlaneRotationCertificate> {
        match self {
            PlaneSearch::Certificate(c) => Some(c),
            PlaneSearch::Infeasible(_) => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.certificate().is_some()
    }
}

fn sorted_eigenvalues(o: &RMat) -> Vec<C64> {
    let mut eig: Vec<C64> = o.clone().complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.im.abs().total_cmp(&a.im.abs()).then(a.re.total_cmp(&b.re)).then(a.im.total_cmp(&b.im)));
    eig
}

fn check_order(action: &SpaceAction, g: &ElementRef, m: &RigidMotion, k: usize) -> Result<()> {
    match (action.group(), g) {
        (GroupStructure::Finite(t), ElementRef::Index(i)) => {
            if *i >= t.order() {
                return Err(Error::InvalidInput(format!("element {i} out of range")));
            }
            let actual = t.element_order(*i);
            if actual != k {
                return Err(Error::WrongOrder { element: *i, expected: k, actual });
            }
            Ok(())
        }
        _ => {
            let id = RigidMotion::identity(m.dim());
            let mut p = m.clone();
            for j in 1..=k {
                let closes = p.distance(&id) < 1e-9;
                if closes != (j == k) {
                    return Err(Error::InvalidInput(format!("element {} does not have order {k}", g.label())));
                }
                p = p.compose(m);
            }
            Ok(())
        }
    }
}

/// Searches for a 2-plane on which `g` acts as rotation by 2π/k.
pub fn find_invariant_rotation_plane(action: &SpaceAction, g: &ElementRef, k: usize) -> Result<PlaneSearch> {
    if k < 2 {
        return Err(Error::InvalidInput("stabiliser order must be at least 2".into()));
    }
    let m = action.motion(g)?;
    check_order(action, g, &m, k)?;
    let o = &m.rotation;
    let n = o.nrows();
    let angle = 2.0 * PI / k as f64;
    let omega = C64::from_polar(1.0, angle);
    let eigenvalues = sorted_eigenvalues(o);
    let matched = eigenvalues.iter().filter(|l| (*l - omega).norm() <= EIGEN_MATCH_TOL).count();
    let infeasible = |matched| {
        PlaneSearch::Infeasible(InfeasibleEvidence {
            element: g.clone(),
            order: k,
            target_root: omega,
            eigenvalues: eigenvalues.clone(),
            matched,
        })
    };

    let (u, v) = if k == 2 {
        let basis = real_kernel(&(o + RMat::identity(n, n)), EIGEN_MATCH_TOL);
        if basis.len() < 2 {
            return Ok(infeasible(matched));
        }
        (basis[0].clone(), basis[1].clone())
    } else {
        let shifted = complexify(o) - CMat::identity(n, n) * omega;
        let kernel = complex_kernel(&shifted, EIGEN_MATCH_TOL);
        let Some(w) = kernel.into_iter().next() else {
            return Ok(infeasible(matched));
        };
        // Phase fix: largest-modulus component real and positive.
        let lead =
            w.iter().copied().fold(C64::new(0.0, 0.0), |a, z| if z.norm() > a.norm() * (1.0 + 1e-12) { z } else { a });
        let w = &w * (lead.conj() / lead.norm());
        let u = w.map(|z| z.re);
        let v = w.map(|z| -z.im);
        let s = u.norm();
        (u / s, v / s)
    };
    let cert = PlaneRotationCertificate { u, v, angle, element: g.clone(), order: k };
    if cert.frame_residual() > FRAME_TOL || cert.rotation_residual(o) > FRAME_TOL {
        return Ok(infeasible(matched));
    }
    Ok(PlaneSearch::Certificate(cert))
}

/// The null vector `u − i·v` of a conformal frame.
pub fn null_line_from_plane(cert: &PlaneRotationCertificate) -> Result<CVec> {
    if cert.u.len() != cert.v.len() {
        return Err(Error::DegenerateFrame("u and v have different lengths".into()));
    }
    let res = cert.frame_residual();
    if !(res <= FRAME_TOL) {
        return Err(Error::DegenerateFrame(format!("frame residual {res:.3e}")));
    }
    Ok(complexify_vec(&cert.u) - complexify_vec(&cert.v) * I)
}

/// Rotates the frame inside its plane by `alpha`; the null line picks up `e^{iα}`.
pub fn rotate_frame(cert: &PlaneRotationCertificate, alpha: f64) -> PlaneRotationCertificate {
    let (s, c) = alpha.sin_cos();
    PlaneRotationCertificate { u: &cert.u * c + &cert.v * s, v: &cert.v * c - &cert.u * s, ..cert.clone() }
}
