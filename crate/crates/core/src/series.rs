//! Finite exponential-Laurent polynomials `Σ c · z^p · e^{βz}`.
//!
//! With every rate `β = 0` this is an ordinary Laurent polynomial; the
//! exponential terms cover the helicoid-type data on translation-invariant
//! domains. Pole and zero orders at the origin are computed exactly from the
//! coefficient list, which is what the cancellation bookkeeping needs.

use serde::{Deserialize, Serialize};

use crate::linalg::C64;

const COEFF_EPS: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub power: i32,
    pub rate: C64,
    pub coeff: C64,
}

impl Term {
    pub fn monomial(coeff: C64, power: i32) -> Self {
        Term { power, rate: C64::new(0.0, 0.0), coeff }
    }

    pub fn exponential(coeff: C64, power: i32, rate: C64) -> Self {
        Term { power, rate, coeff }
    }

    fn eval(&self, z: C64) -> C64 {
        let mut v = self.coeff * z.powi(self.power);
        if self.rate != C64::new(0.0, 0.0) {
            v *= (self.rate * z).exp();
        }
        v
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Series {
    terms: Vec<Term>,
}

impl Series {
    pub fn zero() -> Self {
        Series { terms: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        Series::from_terms(vec![Term::monomial(c, 0)])
    }

    pub fn monomial(c: C64, power: i32) -> Self {
        Series::from_terms(vec![Term::monomial(c, power)])
    }

    /// Builds a normalised series: like terms merged, zero coefficients dropped,
    /// sorted by (rate, power).
    pub fn from_terms(terms: Vec<Term>) -> Self {
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            if let Some(m) = merged.iter_mut().find(|m| m.power == t.power && m.rate == t.rate) {
                m.coeff += t.coeff;
            } else {
                merged.push(t);
            }
        }
        merged.retain(|t| t.coeff.norm() > COEFF_EPS);
        merged.sort_by(|a, b| {
            a.rate.re.total_cmp(&b.rate.re).then(a.rate.im.total_cmp(&b.rate.im)).then(a.power.cmp(&b.power))
        });
        Series { terms: merged }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_laurent(&self) -> bool {
        self.terms.iter().all(|t| t.rate == C64::new(0.0, 0.0))
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.terms.iter().map(|t| t.eval(z)).sum()
    }

    pub fn scale(&self, s: C64) -> Series {
        Series::from_terms(self.terms.iter().map(|t| Term { coeff: t.coeff * s, ..*t }).collect())
    }

    pub fn add(&self, other: &Series) -> Series {
        let mut t = self.terms.clone();
        t.extend_from_slice(&other.terms);
        Series::from_terms(t)
    }

    pub fn mul(&self, other: &Series) -> Series {
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                out.push(Term { power: a.power + b.power, rate: a.rate + b.rate, coeff: a.coeff * b.coeff });
            }
        }
        Series::from_terms(out)
    }

    pub fn derivative(&self) -> Series {
        let mut out = Vec::new();
        for t in &self.terms {
            if t.power != 0 {
                out.push(Term { power: t.power - 1, rate: t.rate, coeff: t.coeff * t.power as f64 });
            }
            if t.rate != C64::new(0.0, 0.0) {
                out.push(Term { power: t.power, rate: t.rate, coeff: t.coeff * t.rate });
            }
        }
        Series::from_terms(out)
    }

    /// Antiderivative, when one exists inside the class: no `z⁻¹` term and
    /// exponential terms only with power 0.
    pub fn antiderivative(&self) -> Option<Series> {
        let mut out = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if t.rate == C64::new(0.0, 0.0) {
                if t.power == -1 {
                    return None;
                }
                out.push(Term::monomial(t.coeff / (t.power + 1) as f64, t.power + 1));
            } else {
                if t.power != 0 {
                    return None;
                }
                out.push(Term::exponential(t.coeff / t.rate, 0, t.rate));
            }
        }
        Some(Series::from_terms(out))
    }

    /// Coefficient of `z⁻¹` in the Laurent expansion at the origin.
    pub fn residue_at_zero(&self) -> C64 {
        match self.min_power() {
            Some(lo) if lo <= -1 => self.laurent_at_zero(-1, -1)[0],
            _ => C64::new(0.0, 0.0),
        }
    }

    pub fn min_power(&self) -> Option<i32> {
        self.terms.iter().map(|t| t.power).min()
    }

    /// Laurent coefficients at the origin for powers `lo..=hi`, expanding each
    /// exponential factor as a Taylor series.
    pub fn laurent_at_zero(&self, lo: i32, hi: i32) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); (hi - lo + 1).max(0) as usize];
        for t in &self.terms {
            // c z^p Σ_j β^j z^j / j!
            let mut coef = t.coeff;
            let mut j = 0i32;
            loop {
                let p = t.power + j;
                if p > hi {
                    break;
                }
                if p >= lo {
                    out[(p - lo) as usize] += coef;
                }
                if t.rate == C64::new(0.0, 0.0) {
                    break;
                }
                j += 1;
                coef = coef * t.rate / j as f64;
            }
        }
        out
    }

    /// Order of vanishing at the origin (negative for a pole). `None` for the
    /// zero series.
    pub fn order_at_zero(&self) -> Option<i32> {
        let lo = self.min_power()?;
        let scale = self.terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max);
        let hi = lo + 40;
        let coeffs = self.laurent_at_zero(lo, hi);
        coeffs.iter().position(|c| c.norm() > 1e-13 * scale).map(|p| lo + p as i32)
    }
}
