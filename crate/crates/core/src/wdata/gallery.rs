//! Classical symmetric surfaces with their symmetry pairings.
//!
//! Sign convention: a domain rotation `z ↦ e^{iα} z` is paired with the
//! spatial rotation about the x₃-axis that multiplies the null coordinate
//! `f₁ + i f₂` by the same factor it picks up under the domain map.
//! For the catenoid `f₁ + i f₂ = −z`, so the pairing is `+α`; for Enneper of
//! order m, `f₁ + i f₂ = −z^m/(m+1)` and `z^m` picks up `e^{−iα}` when
//! `α = 2π/(m+1)`, so the pairing is `−α`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{MeromorphicMap, WeierstrassData};
use crate::domain::{build_rotation_domain, DomainAction, DomainKind, InvariantOneForm, PlanarDomain};
use crate::error::{Error, Result};
use crate::linalg::{c, CVec, RMat, RVec, C64, I};
use crate::series::{Series, Term};
use crate::symgroup::{
    plane_rotation, FiniteGroupTable, GroupStructure, RigidMotion, SpaceAction, DEFAULT_WORD_LENGTH,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum GalleryName {
    Catenoid { m: usize },
    Enneper { m: usize },
    Helicoid { step: f64 },
    FlatPlane,
}

impl GalleryName {
    /// Parses `catenoid(6)`, `enneper(2)`, `helicoid`, `helicoid(3.14)`, `flat_plane`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let (head, arg) = match t.find('(') {
            Some(i) if t.ends_with(')') => (&t[..i], Some(t[i + 1..t.len() - 1].trim())),
            _ => (t.as_str(), None),
        };
        let bad = || Error::Config(format!("unknown gallery item `{s}`"));
        let int = |a: Option<&str>, default: usize| -> Result<usize> {
            a.map(|x| x.parse::<usize>().map_err(|_| bad())).unwrap_or(Ok(default))
        };
        match head {
            "catenoid" => Ok(GalleryName::Catenoid { m: int(arg, 1)? }),
            "enneper" => Ok(GalleryName::Enneper { m: int(arg, 1)? }),
            "helicoid" => Ok(GalleryName::Helicoid {
                step: arg.map(|x| x.parse::<f64>().map_err(|_| bad())).unwrap_or(Ok(2.0 * PI))?,
            }),
            "flat_plane" | "plane" => Ok(GalleryName::FlatPlane),
            _ => Err(bad()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            GalleryName::Catenoid { m } => format!("catenoid({m})"),
            GalleryName::Enneper { m } => format!("enneper({m})"),
            GalleryName::Helicoid { step } => format!("helicoid({step})"),
            GalleryName::FlatPlane => "flat_plane".into(),
        }
    }

    pub fn build(&self) -> Result<WeierstrassData> {
        match *self {
            GalleryName::Catenoid { m } => catenoid(m),
            GalleryName::Enneper { m } => enneper(m),
            GalleryName::Helicoid { step } => helicoid(step),
            GalleryName::FlatPlane => flat_plane(),
        }
    }

    /// Closed-form `f`, independent of the Laurent coefficients.
    pub fn closed_form_f(&self, z: C64) -> CVec {
        match *self {
            GalleryName::Catenoid { .. } => {
                let w = z.inv();
                CVec::from_vec(vec![(w - z) / 2.0, I * (w + z) / 2.0, c(1.0, 0.0)])
            }
            GalleryName::Enneper { m } => {
                let k = (m + 1) as f64;
                let zm = z.powi(m as i32);
                let g = CVec::from_vec(vec![
                    (C64::new(1.0, 0.0) - zm * zm) / 2.0,
                    I * (C64::new(1.0, 0.0) + zm * zm) / 2.0,
                    zm,
                ]);
                g / (zm * k)
            }
            GalleryName::Helicoid { .. } => CVec::from_vec(vec![-I * z.sinh(), -z.cosh(), I]),
            GalleryName::FlatPlane => CVec::from_vec(vec![c(1.0, 0.0), I, c(0.0, 0.0)]),
        }
    }
}

fn axis_rotations(k: usize, sign: f64) -> Result<(FiniteGroupTable, SpaceAction)> {
    let t = FiniteGroupTable::cyclic(k)?;
    let motions = (0..k)
        .map(|j| RigidMotion::orthogonal(plane_rotation(3, 0, 1, sign * 2.0 * PI * j as f64 / k as f64)))
        .collect::<Result<Vec<_>>>()?;
    let a = SpaceAction::new(GroupStructure::Finite(t.clone()), motions)?;
    Ok((t, a))
}

/// Catenoid on C* with θ = dz/z, Z_m rotation paired with the 2π/m rotation about x₃.
pub fn catenoid(m: usize) -> Result<WeierstrassData> {
    if m == 0 {
        return Err(Error::InvalidInput("catenoid symmetry order must be positive".into()));
    }
    let (domain, dact) = build_rotation_domain(m, &[c(0.0, 0.0)])?;
    let (_, sact) = axis_rotations(m, 1.0)?;
    let half = c(0.5, 0.0);
    let f = MeromorphicMap::new(vec![
        Series::from_terms(vec![Term::monomial(half, -1), Term::monomial(-half, 1)]),
        Series::from_terms(vec![Term::monomial(I * half, -1), Term::monomial(I * half, 1)]),
        Series::constant(c(1.0, 0.0)),
    ])?;
    let theta = InvariantOneForm::from_density(Series::monomial(c(1.0, 0.0), -1));
    WeierstrassData::new(f, theta, domain, dact, sact, c(1.0, 0.0), RVec::from_vec(vec![-1.0, 0.0, 0.0]))
}

/// Enneper surface of order m: θ = d(z^{m+1}), Z_{m+1} rotation paired with −2π/(m+1) about x₃.
pub fn enneper(m: usize) -> Result<WeierstrassData> {
    if m == 0 {
        return Err(Error::InvalidInput("enneper order must be positive".into()));
    }
    let k = m + 1;
    let (domain, dact) = build_rotation_domain(k, &[])?;
    let (_, sact) = axis_rotations(k, -1.0)?;
    let s = 1.0 / (2.0 * k as f64);
    let mi = m as i32;
    let f = MeromorphicMap::new(vec![
        Series::from_terms(vec![Term::monomial(c(s, 0.0), -mi), Term::monomial(c(-s, 0.0), mi)]),
        Series::from_terms(vec![Term::monomial(c(0.0, s), -mi), Term::monomial(c(0.0, s), mi)]),
        Series::constant(c(1.0 / k as f64, 0.0)),
    ])?;
    let theta = InvariantOneForm::power_about(k, c(0.0, 0.0));
    let mf = m as f64;
    let v = RVec::from_vec(vec![mf / (2.0 * mf + 1.0), 0.0, 1.0 / (mf + 1.0)]);
    WeierstrassData::new(f, theta, domain, dact, sact, c(1.0, 0.0), v)
}

/// Helicoid on the w-plane; the translation `w ↦ w + i·step` pairs with the
/// screw motion rotating by `step` about x₃ and translating by `−step` along it.
pub fn helicoid(step: f64) -> Result<WeierstrassData> {
    if !(step.is_finite() && step != 0.0) {
        return Err(Error::InvalidInput("helicoid step must be finite and nonzero".into()));
    }
    let domain = PlanarDomain::new(DomainKind::Plane, vec![], "w-plane")?;
    let dact = DomainAction::translation(c(0.0, step), DEFAULT_WORD_LENGTH, &domain)?;
    let screw = RigidMotion::new(1.0, plane_rotation(3, 0, 1, step), RVec::from_vec(vec![0.0, 0.0, -step]))?;
    let sact =
        SpaceAction::new(GroupStructure::Discrete { generators: 1, word_length: DEFAULT_WORD_LENGTH }, vec![screw])?;
    let one = c(1.0, 0.0);
    let half = c(0.5, 0.0);
    // −i sinh w = −(i/2)e^{w} + (i/2)e^{−w};  −cosh w = −½e^{w} − ½e^{−w}
    let f = MeromorphicMap::new(vec![
        Series::from_terms(vec![Term::exponential(-I * half, 0, one), Term::exponential(I * half, 0, -one)]),
        Series::from_terms(vec![Term::exponential(-half, 0, one), Term::exponential(-half, 0, -one)]),
        Series::constant(I),
    ])?;
    WeierstrassData::new(f, InvariantOneForm::dz(), domain, dact, sact, c(0.0, 0.0), RVec::zeros(3))
}

/// Plane data `f = (1, i, 0)`, θ = dz, trivial group: a planar negative control.
pub fn flat_plane() -> Result<WeierstrassData> {
    let domain = PlanarDomain::new(DomainKind::Plane, vec![], "plane")?;
    let f = MeromorphicMap::constant(&CVec::from_vec(vec![c(1.0, 0.0), I, c(0.0, 0.0)]))?;
    WeierstrassData::new(
        f,
        InvariantOneForm::dz(),
        domain,
        DomainAction::trivial(),
        SpaceAction::trivial(3),
        c(0.0, 0.0),
        RVec::zeros(3),
    )
}

/// Spatial rotation about x₃ as a 3×3 matrix (used by callers building custom pairings).
pub fn x3_rotation(angle: f64) -> RMat {
    plane_rotation(3, 0, 1, angle)
}
