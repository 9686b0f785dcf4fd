use serde::{Deserialize, Serialize};

use super::{DomainAction, PlanarDomain};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::sampling::sample_domain;
use crate::series::{Series, Term};
use crate::symgroup::GroupStructure;

const PULLBACK_TOL: f64 = 1e-10;

/// Holomorphic 1-form `θ = ρ(z) dz` with its zero divisor on the domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantOneForm {
    density: Series,
    zeros: Vec<(C64, u32)>,
}

impl InvariantOneForm {
    pub fn dz() -> Self {
        InvariantOneForm { density: Series::constant(C64::new(1.0, 0.0)), zeros: Vec::new() }
    }

    /// `d((z − c)^k) = k (z − c)^{k−1} dz`, expanded about the origin.
    pub fn power_about(k: usize, center: C64) -> Self {
        let m = k as i32 - 1;
        let mut terms = Vec::new();
        let mut binom = 1.0;
        for j in 0..=m {
            // k · C(m, j) · z^j · (−c)^{m−j}
            terms.push(Term::monomial((-center).powi(m - j) * (k as f64 * binom), j));
            binom = binom * (m - j) as f64 / (j + 1) as f64;
        }
        let zeros = if k >= 2 { vec![(center, (k - 1) as u32)] } else { Vec::new() };
        InvariantOneForm { density: Series::from_terms(terms), zeros }
    }

    /// `θ = ρ dz` with an explicit density; zeros are read off at the origin only.
    pub fn from_density(density: Series) -> Self {
        let zeros = match density.order_at_zero() {
            Some(o) if o > 0 => vec![(C64::new(0.0, 0.0), o as u32)],
            _ => Vec::new(),
        };
        InvariantOneForm { density, zeros }
    }

    /// `θ = dh`.
    pub fn from_potential(h: &Series) -> Self {
        Self::from_density(h.derivative())
    }

    pub fn density(&self) -> &Series {
        &self.density
    }

    pub fn zeros(&self) -> &[(C64, u32)] {
        &self.zeros
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.density.eval(z)
    }

    /// Zero order of θ at `p` (negative for a pole), from the recorded divisor or the Laurent data at 0.
    pub fn order_at(&self, p: C64) -> i32 {
        if p.norm() <= 1e-12 {
            return self.density.order_at_zero().unwrap_or(i32::MAX);
        }
        self.zeros.iter().find(|(q, _)| (q - p).norm() <= 1e-9).map(|(_, o)| *o as i32).unwrap_or(0)
    }

    /// max over generators and samples of `|ρ(gz)·g'(z) − ρ(z)| / (1 + |ρ(z)|)`.
    pub fn pullback_residual(&self, domain: &PlanarDomain, action: &DomainAction, samples: usize, seed: u64) -> f64 {
        let points = sample_domain(domain, samples, seed, 1e-2);
        let mut worst = 0.0_f64;
        for g in action.group().generator_refs() {
            let Ok(m) = action.map(&g) else { continue };
            for &z in &points {
                let lhs = self.eval(m.apply(z)) * m.a;
                let rhs = self.eval(z);
                worst = worst.max((lhs - rhs).norm() / (1.0 + rhs.norm()));
            }
        }
        worst
    }

    pub fn validate(&self, domain: &PlanarDomain, action: &DomainAction) -> Result<f64> {
        let r = self.pullback_residual(domain, action, 100, 0x5eed);
        if r > PULLBACK_TOL {
            return Err(Error::DataCheck(format!("1-form is not invariant (pullback residual {r:.3e})")));
        }
        Ok(r)
    }
}

/// The canonical invariant 1-form: `dz` for free actions, `d((z − c)^k)` for
/// a cyclic rotation group of order `k` about `c`.
pub fn invariant_one_form(domain: &PlanarDomain, action: &DomainAction) -> Result<InvariantOneForm> {
    let form = match action.group() {
        GroupStructure::Finite(t) if t.order() == 1 => InvariantOneForm::dz(),
        _ if action.is_free() => {
            if !matches!(action.group(), GroupStructure::Discrete { .. }) {
                return Err(Error::UnsupportedAction("a finite group cannot act freely by translations".into()));
            }
            InvariantOneForm::dz()
        }
        GroupStructure::Finite(t) => {
            let g =
                t.cyclic_generator().ok_or_else(|| Error::UnsupportedAction("finite group is not cyclic".into()))?;
            let m = action.maps()[g];
            let center =
                m.fixed_point().ok_or_else(|| Error::UnsupportedAction("generator has no fixed point".into()))?;
            InvariantOneForm::power_about(t.order(), center)
        }
        GroupStructure::Discrete { .. } => {
            return Err(Error::UnsupportedAction("discrete group with rotations".into()));
        }
    };
    form.validate(domain, action)?;
    Ok(form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_rotation_domain, DomainKind};
    use crate::linalg::c;

    #[test]
    fn trivial_group_gives_dz() {
        let (d, a) = build_rotation_domain(1, &[]).unwrap();
        let f = invariant_one_form(&d, &a).unwrap();
        assert_eq!(f, InvariantOneForm::dz());
    }

    #[test]
    fn half_turn_gives_two_z_dz() {
        let (d, a) = build_rotation_domain(2, &[]).unwrap();
        let f = invariant_one_form(&d, &a).unwrap();
        assert_eq!(f.eval(c(0.3, 0.1)), c(0.6, 0.2));
        assert_eq!(f.order_at(c(0.0, 0.0)), 1);
        assert_eq!(f.zeros(), &[(c(0.0, 0.0), 1)]);
    }

    #[test]
    fn translations_keep_dz() {
        let d = PlanarDomain::new(DomainKind::Plane, vec![], "plane").unwrap();
        let a = DomainAction::translation(c(1.0, 0.0), 4, &d).unwrap();
        let f = invariant_one_form(&d, &a).unwrap();
        assert!(f.pullback_residual(&d, &a, 1000, 7) == 0.0);
    }

    #[test]
    fn off_centre_rotation() {
        let f = InvariantOneForm::power_about(3, c(1.0, 1.0));
        let z = c(0.2, -0.4);
        let direct = (z - c(1.0, 1.0)).powi(2) * 3.0;
        assert!((f.eval(z) - direct).norm() < 1e-13);
    }
}
