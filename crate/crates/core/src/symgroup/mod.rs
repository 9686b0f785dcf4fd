//! Finite and discrete groups acting on Rⁿ by rigid motions.

mod motion;
mod plane;
mod table;

#[allow(unused_imports)]
pub(crate) use motion::resolve;
pub use motion::{ElementRef, GroupStructure, RigidMotion, SpaceAction, DEFAULT_WORD_LENGTH, HOMOMORPHISM_TOL};
pub use plane::{
    find_invariant_rotation_plane, null_line_from_plane, rotate_frame, InfeasibleEvidence, PlaneRotationCertificate,
    PlaneSearch, EIGEN_MATCH_TOL,
};
pub use table::FiniteGroupTable;

use crate::error::{Error, Result};
use crate::linalg::RMat;

pub fn build_cyclic(k: usize) -> Result<FiniteGroupTable> {
    FiniteGroupTable::cyclic(k)
}

/// Rotation of R³ by `angle` about `axis` (right-hand rule).
pub fn rotation_about_axis(axis: &[f64; 3], angle: f64) -> RMat {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let (x, y, z) = (axis[0] / n, axis[1] / n, axis[2] / n);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    RMat::from_row_slice(
        3,
        3,
        &[
            t * x * x + c,
            t * x * y - s * z,
            t * x * z + s * y,
            t * x * y + s * z,
            t * y * y + c,
            t * y * z - s * x,
            t * x * z - s * y,
            t * y * z + s * x,
            t * z * z + c,
        ],
    )
}

/// Rotation by `angle` in the coordinate plane `(i, j)` of Rⁿ, taking `e_i` towards `e_j`.
pub fn plane_rotation(n: usize, i: usize, j: usize, angle: f64) -> RMat {
    let mut m = RMat::identity(n, n);
    let (s, c) = angle.sin_cos();
    m[(i, i)] = c;
    m[(j, j)] = c;
    m[(j, i)] = s;
    m[(i, j)] = -s;
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VonDyck {
    Dihedral(usize),
    A4,
    S4,
    A5,
}

impl VonDyck {
    /// Accepts `dihedral(k)`, `D<k>`, `A4`, `S4`, `A5` (case-insensitive).
    pub fn parse(name: &str) -> Result<Self> {
        let s = name.trim().to_ascii_lowercase();
        let unknown = || Error::UnknownGroup(name.to_string());
        match s.as_str() {
            "a4" | "tetrahedral" => return Ok(VonDyck::A4),
            "s4" | "octahedral" => return Ok(VonDyck::S4),
            "a5" | "icosahedral" => return Ok(VonDyck::A5),
            _ => {}
        }
        let k = if let Some(rest) = s.strip_prefix("dihedral(").and_then(|r| r.strip_suffix(')')) {
            rest.trim().parse::<usize>().map_err(|_| unknown())?
        } else if let Some(rest) = s.strip_prefix('d') {
            rest.parse::<usize>().map_err(|_| unknown())?
        } else {
            return Err(unknown());
        };
        if k == 0 {
            return Err(unknown());
        }
        Ok(VonDyck::Dihedral(k))
    }

    fn generator_matrices(self) -> Vec<RMat> {
        use std::f64::consts::PI;
        match self {
            VonDyck::Dihedral(k) => vec![
                rotation_about_axis(&[0.0, 0.0, 1.0], 2.0 * PI / k as f64),
                rotation_about_axis(&[1.0, 0.0, 0.0], PI),
            ],
            VonDyck::A4 => {
                vec![rotation_about_axis(&[1.0, 1.0, 1.0], 2.0 * PI / 3.0), rotation_about_axis(&[0.0, 0.0, 1.0], PI)]
            }
            VonDyck::S4 => vec![
                rotation_about_axis(&[0.0, 0.0, 1.0], PI / 2.0),
                rotation_about_axis(&[1.0, 1.0, 1.0], 2.0 * PI / 3.0),
            ],
            VonDyck::A5 => {
                let phi = (1.0 + 5f64.sqrt()) / 2.0;
                vec![rotation_about_axis(&[0.0, 1.0, phi], 2.0 * PI / 5.0), rotation_about_axis(&[0.0, 0.0, 1.0], PI)]
            }
        }
    }
}

/// Spherical von Dyck group with its standard rotation action on R³.
pub fn build_von_dyck(name: &str) -> Result<(FiniteGroupTable, SpaceAction)> {
    let kind = VonDyck::parse(name)?;
    let (table, mats) = matrix_closure(&kind.generator_matrices(), 200)?;
    let motions = mats.into_iter().map(RigidMotion::orthogonal).collect::<Result<Vec<_>>>()?;
    let action = SpaceAction::new(GroupStructure::Finite(table.clone()), motions)?;
    Ok((table, action))
}

/// Closes a set of orthogonal matrices under multiplication and returns the
/// group table together with the element matrices (identity first).
pub fn matrix_closure(gens: &[RMat], max_order: usize) -> Result<(FiniteGroupTable, Vec<RMat>)> {
    let n = gens.first().map(|g| g.nrows()).ok_or_else(|| Error::InvalidInput("no generators".into()))?;
    let find = |elems: &[RMat], m: &RMat| elems.iter().position(|e| (e - m).amax() < 1e-8);
    let mut elems = vec![RMat::identity(n, n)];
    let mut gen_idx = Vec::new();
    for g in gens {
        match find(&elems, g) {
            Some(i) => gen_idx.push(i),
            None => {
                elems.push(g.clone());
                gen_idx.push(elems.len() - 1);
            }
        }
    }
    let mut head = 0;
    while head < elems.len() {
        for g in gens {
            let p = &elems[head] * g;
            if find(&elems, &p).is_none() {
                elems.push(p);
                if elems.len() > max_order {
                    return Err(Error::GroupLaw(format!("generated group exceeds order {max_order}")));
                }
            }
        }
        head += 1;
    }
    let m = elems.len();
    let mut cayley = vec![vec![0usize; m]; m];
    for a in 0..m {
        for b in 0..m {
            cayley[a][b] = find(&elems, &(&elems[a] * &elems[b]))
                .ok_or_else(|| Error::GroupLaw("matrix set not closed".into()))?;
        }
    }
    let names = (0..m).map(|i| if i == 0 { "e".to_string() } else { format!("m{i}") }).collect();
    Ok((FiniteGroupTable::new(cayley, gen_idx, names)?, elems))
}

/// Regular representation realified: `h·e_g = e_{hg}` on C^|G| ≅ R^{2|G|},
/// with complex coordinate `g` occupying real slots `2g, 2g+1`.
pub fn regular_representation(g: &FiniteGroupTable) -> SpaceAction {
    let order = g.order();
    let dim = 2 * order;
    let motions = (0..order)
        .map(|h| {
            let mut m = RMat::zeros(dim, dim);
            for e in 0..order {
                let he = g.mul(h, e);
                m[(2 * he, 2 * e)] = 1.0;
                m[(2 * he + 1, 2 * e + 1)] = 1.0;
            }
            RigidMotion::orthogonal(m).expect("permutation matrices are orthogonal")
        })
        .collect();
    SpaceAction::new(GroupStructure::Finite(g.clone()), motions).expect("regular representation is a homomorphism")
}

/// Symmetric group S₃, realised as the dihedral group of order 6.
pub fn symmetric_group_s3() -> FiniteGroupTable {
    let (t, _) = matrix_closure(
        &[
            rotation_about_axis(&[0.0, 0.0, 1.0], 2.0 * std::f64::consts::PI / 3.0),
            rotation_about_axis(&[1.0, 0.0, 0.0], std::f64::consts::PI),
        ],
        6,
    )
    .expect("D3 closes at order 6");
    t
}
