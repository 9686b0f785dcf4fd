use serde::{Deserialize, Serialize};

use super::table::FiniteGroupTable;
use crate::error::{Error, Result};
use crate::linalg::{RMat, RVec};

const ORTHO_TOL: f64 = 1e-12;
pub const HOMOMORPHISM_TOL: f64 = 1e-10;

/// `x ↦ r·O·x + b` on Rⁿ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidMotion {
    pub scale: f64,
    pub rotation: RMat,
    pub translation: RVec,
}

impl RigidMotion {
    pub fn new(scale: f64, rotation: RMat, translation: RVec) -> Result<Self> {
        let n = rotation.nrows();
        if rotation.ncols() != n || translation.len() != n {
            return Err(Error::InvalidInput("rigid motion has inconsistent dimensions".into()));
        }
        if !(scale > 0.0) {
            return Err(Error::InvalidInput(format!("scale must be positive, got {scale}")));
        }
        let defect = (rotation.transpose() * &rotation - RMat::identity(n, n)).amax();
        if defect > ORTHO_TOL {
            return Err(Error::InvalidInput(format!("rotation is not orthogonal (defect {defect:.2e})")));
        }
        Ok(RigidMotion { scale, rotation, translation })
    }

    pub fn orthogonal(rotation: RMat) -> Result<Self> {
        let n = rotation.nrows();
        Self::new(1.0, rotation, RVec::zeros(n))
    }

    pub fn identity(n: usize) -> Self {
        RigidMotion { scale: 1.0, rotation: RMat::identity(n, n), translation: RVec::zeros(n) }
    }

    pub fn dim(&self) -> usize {
        self.rotation.nrows()
    }

    pub fn apply(&self, x: &RVec) -> RVec {
        &self.rotation * x * self.scale + &self.translation
    }

    /// Differential `dg = r·O`.
    pub fn linear(&self) -> RMat {
        &self.rotation * self.scale
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &RigidMotion) -> RigidMotion {
        RigidMotion {
            scale: self.scale * other.scale,
            rotation: &self.rotation * &other.rotation,
            translation: &self.rotation * &other.translation * self.scale + &self.translation,
        }
    }

    pub fn inverse(&self) -> RigidMotion {
        let ot = self.rotation.transpose();
        RigidMotion { scale: 1.0 / self.scale, translation: -(&ot * &self.translation) / self.scale, rotation: ot }
    }

    pub fn distance(&self, other: &RigidMotion) -> f64 {
        (self.scale - other.scale)
            .abs()
            .max((&self.rotation - &other.rotation).amax())
            .max((&self.translation - &other.translation).amax())
    }

    pub fn is_linear_orthogonal(&self) -> bool {
        (self.scale - 1.0).abs() <= ORTHO_TOL && self.translation.amax() <= ORTHO_TOL
    }
}

/// Reference to a group element: an index into a finite table, or a reduced
/// word in the generators of a discrete group (`(generator, inverted)` letters).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElementRef {
    Index(usize),
    Word(Vec<(usize, bool)>),
}

impl ElementRef {
    pub fn label(&self) -> String {
        match self {
            ElementRef::Index(i) => format!("#{i}"),
            ElementRef::Word(w) if w.is_empty() => "e".into(),
            ElementRef::Word(w) => w
                .iter()
                .map(|(g, inv)| if *inv { format!("s{g}^-1") } else { format!("s{g}") })
                .collect::<Vec<_>>()
                .join("·"),
        }
    }
}

pub const DEFAULT_WORD_LENGTH: usize = 4;

/// A finite group with its table, or a finitely generated discrete group known
/// only through its generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GroupStructure {
    Finite(FiniteGroupTable),
    Discrete { generators: usize, word_length: usize },
}

impl GroupStructure {
    pub fn trivial() -> Self {
        GroupStructure::Finite(FiniteGroupTable::cyclic(1).expect("order 1"))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, GroupStructure::Finite(_))
    }

    pub fn order(&self) -> Option<usize> {
        match self {
            GroupStructure::Finite(t) => Some(t.order()),
            GroupStructure::Discrete { .. } => None,
        }
    }

    pub fn table(&self) -> Option<&FiniteGroupTable> {
        match self {
            GroupStructure::Finite(t) => Some(t),
            GroupStructure::Discrete { .. } => None,
        }
    }

    /// Number of entries a per-element (finite) or per-generator (discrete)
    /// motion list must have.
    pub fn motion_slots(&self) -> usize {
        match self {
            GroupStructure::Finite(t) => t.order(),
            GroupStructure::Discrete { generators, .. } => *generators,
        }
    }

    pub fn generator_refs(&self) -> Vec<ElementRef> {
        match self {
            GroupStructure::Finite(t) => {
                t.generators().iter().filter(|&&g| g != 0).map(|&g| ElementRef::Index(g)).collect()
            }
            GroupStructure::Discrete { generators, .. } => {
                (0..*generators).map(|g| ElementRef::Word(vec![(g, false)])).collect()
            }
        }
    }

    /// Non-identity elements used for group-level checks: every element of a
    /// finite group, or every reduced word up to the word-length window.
    pub fn check_elements(&self) -> Vec<ElementRef> {
        match self {
            GroupStructure::Finite(t) => (1..t.order()).map(ElementRef::Index).collect(),
            GroupStructure::Discrete { generators, word_length } => {
                let letters: Vec<(usize, bool)> = (0..*generators).flat_map(|g| [(g, false), (g, true)]).collect();
                let mut out = Vec::new();
                let mut frontier: Vec<Vec<(usize, bool)>> = vec![Vec::new()];
                for _ in 0..*word_length {
                    let mut next = Vec::new();
                    for w in &frontier {
                        for &l in &letters {
                            if let Some(&(g, inv)) = w.last() {
                                if g == l.0 && inv != l.1 {
                                    continue;
                                }
                            }
                            let mut nw = w.clone();
                            nw.push(l);
                            next.push(nw);
                        }
                    }
                    out.extend(next.iter().cloned().map(ElementRef::Word));
                    frontier = next;
                }
                out
            }
        }
    }

    pub fn same_shape(&self, other: &GroupStructure) -> bool {
        match (self, other) {
            (GroupStructure::Finite(a), GroupStructure::Finite(b)) => a.cayley() == b.cayley(),
            (GroupStructure::Discrete { generators: a, .. }, GroupStructure::Discrete { generators: b, .. }) => a == b,
            _ => false,
        }
    }
}

/// Resolves an element reference against per-element or per-generator data.
pub(crate) fn resolve<T: Clone>(
    group: &GroupStructure,
    items: &[T],
    element: &ElementRef,
    identity: T,
    compose: impl Fn(&T, &T) -> T,
    invert: impl Fn(&T) -> T,
) -> Result<T> {
    match (group, element) {
        (GroupStructure::Finite(t), ElementRef::Index(i)) => items
            .get(*i)
            .cloned()
            .ok_or_else(|| Error::InvalidInput(format!("element {i} out of range for order {}", t.order()))),
        (GroupStructure::Discrete { generators, .. }, ElementRef::Word(w)) => {
            let mut acc = identity;
            for &(g, inv) in w {
                if g >= *generators {
                    return Err(Error::InvalidInput(format!("generator {g} out of range")));
                }
                let m = if inv { invert(&items[g]) } else { items[g].clone() };
                acc = compose(&acc, &m);
            }
            Ok(acc)
        }
        _ => Err(Error::InvalidInput("element reference does not match the group kind".into())),
    }
}

/// Action of a group on Rⁿ by rigid motions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceAction {
    group: GroupStructure,
    motions: Vec<RigidMotion>,
    dim: usize,
}

impl SpaceAction {
    pub fn new(group: GroupStructure, motions: Vec<RigidMotion>) -> Result<Self> {
        if motions.len() != group.motion_slots() {
            return Err(Error::InvalidInput(format!(
                "{} motions supplied, {} expected",
                motions.len(),
                group.motion_slots()
            )));
        }
        let dim = motions.first().map(|m| m.dim()).unwrap_or(0);
        if dim == 0 || motions.iter().any(|m| m.dim() != dim) {
            return Err(Error::InvalidInput("motions must share a positive dimension".into()));
        }
        let action = SpaceAction { group, motions, dim };
        let res = action.homomorphism_residual();
        if res > HOMOMORPHISM_TOL {
            return Err(Error::GroupLaw(format!("space action is not a homomorphism (residual {res:.2e})")));
        }
        if let GroupStructure::Finite(_) = &action.group {
            if action.motions[0].distance(&RigidMotion::identity(dim)) > HOMOMORPHISM_TOL {
                return Err(Error::GroupLaw("identity element does not act trivially".into()));
            }
        }
        Ok(action)
    }

    pub fn trivial(dim: usize) -> Self {
        SpaceAction { group: GroupStructure::trivial(), motions: vec![RigidMotion::identity(dim)], dim }
    }

    pub fn group(&self) -> &GroupStructure {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn motions(&self) -> &[RigidMotion] {
        &self.motions
    }

    pub fn motion(&self, element: &ElementRef) -> Result<RigidMotion> {
        resolve(
            &self.group,
            &self.motions,
            element,
            RigidMotion::identity(self.dim),
            |a, b| a.compose(b),
            |a| a.inverse(),
        )
    }

    /// max over pairs of ‖motion(g)∘motion(h) − motion(gh)‖ (finite groups);
    /// discrete groups carry no relations and report 0.
    pub fn homomorphism_residual(&self) -> f64 {
        match &self.group {
            GroupStructure::Finite(t) => {
                let mut worst = 0.0_f64;
                for g in 0..t.order() {
                    for h in 0..t.order() {
                        let lhs = self.motions[g].compose(&self.motions[h]);
                        worst = worst.max(lhs.distance(&self.motions[t.mul(g, h)]));
                    }
                }
                worst
            }
            GroupStructure::Discrete { .. } => 0.0,
        }
    }

    pub fn is_orthogonal(&self) -> bool {
        self.motions.iter().all(RigidMotion::is_linear_orthogonal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symgroup::rotation_about_axis;

    #[test]
    fn compose_and_inverse() {
        let r = rotation_about_axis(&[0.0, 0.0, 1.0], 0.7);
        let m = RigidMotion::new(2.0, r, RVec::from_vec(vec![1.0, -1.0, 0.5])).unwrap();
        let id = m.compose(&m.inverse());
        assert!(id.distance(&RigidMotion::identity(3)) < 1e-14);
    }

    #[test]
    fn rejects_non_orthogonal() {
        let m = RMat::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(RigidMotion::orthogonal(m).is_err());
    }

    #[test]
    fn reduced_words_up_to_length_two() {
        let g = GroupStructure::Discrete { generators: 1, word_length: 2 };
        // s, s^-1, ss, s^-1 s^-1
        assert_eq!(g.check_elements().len(), 4);
    }
}
