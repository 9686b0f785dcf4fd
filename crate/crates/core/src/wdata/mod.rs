//! Equivariant Weierstrass data `(f, θ)` on planar domains.

mod checks;
pub mod gallery;

pub use checks::{
    cancellation_check, equivariance_residual_f, local_model_at_fixed_point, nullity_grid, nullity_residual,
    CancellationReport, FixedPointOrders, LocalModel,
};

use serde::{Deserialize, Serialize};

use crate::domain::{DomainAction, InvariantOneForm, PlanarDomain};
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, RVec, C64};
use crate::nullgeom::relative_null_residual;
use crate::series::Series;
use crate::symgroup::SpaceAction;

/// Meromorphic map into Cⁿ with Laurent-polynomial components about the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeromorphicMap {
    components: Vec<Series>,
    /// `(point, order)` with order > 0.
    poles: Vec<(C64, u32)>,
}

impl MeromorphicMap {
    pub fn new(components: Vec<Series>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::InvalidInput("a map into Cⁿ needs n ≥ 2 components".into()));
        }
        let pole = components.iter().filter_map(|s| s.order_at_zero()).min().unwrap_or(0);
        let poles = if pole < 0 { vec![(C64::new(0.0, 0.0), (-pole) as u32)] } else { Vec::new() };
        Ok(MeromorphicMap { components, poles })
    }

    /// Constructor that also checks a declared pole list against the coefficients.
    pub fn with_declared_poles(components: Vec<Series>, declared: &[(C64, u32)]) -> Result<Self> {
        let m = Self::new(components)?;
        let mut a = m.poles.clone();
        let mut b = declared.to_vec();
        a.retain(|p| p.1 > 0);
        b.retain(|p| p.1 > 0);
        let same =
            a.len() == b.len() && a.iter().all(|(p, o)| b.iter().any(|(q, r)| (p - q).norm() <= 1e-12 && o == r));
        if !same {
            return Err(Error::DataCheck(format!("declared poles {b:?} do not match the coefficients {a:?}")));
        }
        Ok(m)
    }

    pub fn constant(v: &CVec) -> Result<Self> {
        Self::new(v.iter().map(|c| Series::constant(*c)).collect())
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Series] {
        &self.components
    }

    pub fn poles(&self) -> &[(C64, u32)] {
        &self.poles
    }

    pub fn eval(&self, z: C64) -> CVec {
        CVec::from_iterator(self.components.len(), self.components.iter().map(|s| s.eval(z)))
    }

    /// Pole order at `p` (0 if regular).
    pub fn pole_order_at(&self, p: C64) -> u32 {
        self.poles.iter().find(|(q, _)| (q - p).norm() <= 1e-12).map(|(_, o)| *o).unwrap_or(0)
    }

    pub fn scale(&self, s: C64) -> MeromorphicMap {
        MeromorphicMap { components: self.components.iter().map(|c| c.scale(s)).collect(), poles: self.poles.clone() }
    }
}

/// Spray weight `num(z) / den(z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    pub num: Series,
    pub den: Option<Series>,
}

impl Weight {
    pub fn series(num: Series) -> Self {
        Weight { num, den: None }
    }

    pub fn eval(&self, z: C64) -> C64 {
        let n = self.num.eval(z);
        match &self.den {
            Some(d) => n / d.eval(z),
            None => n,
        }
    }
}

/// One spray direction: a holomorphic weight times a Lie-algebra element of `so(n, C) ⊕ C·I`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformationSlot {
    pub weight: Weight,
    pub generator: CMat,
    pub label: String,
}

/// `f_t(z) = exp(Σ_s t_s w_s(z) A_s) · f(z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deformation {
    pub slots: Vec<DeformationSlot>,
    pub params: Vec<C64>,
}

impl Deformation {
    pub fn matrix_at(&self, z: C64, n: usize) -> CMat {
        let mut m = CMat::zeros(n, n);
        for (slot, t) in self.slots.iter().zip(&self.params) {
            if t.norm() != 0.0 {
                m += &slot.generator * (t * slot.weight.eval(z));
            }
        }
        m
    }

    pub fn is_trivial(&self) -> bool {
        self.params.iter().all(|t| t.norm() == 0.0)
    }
}

/// Weierstrass data together with the symmetry pairing and base value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassData {
    pub f: MeromorphicMap,
    pub theta: InvariantOneForm,
    pub domain: PlanarDomain,
    pub domain_action: DomainAction,
    pub space_action: SpaceAction,
    pub basepoint: C64,
    pub base_value: RVec,
    deformation: Option<Deformation>,
    core_form: Vec<Series>,
}

impl WeierstrassData {
    pub fn new(
        f: MeromorphicMap,
        theta: InvariantOneForm,
        domain: PlanarDomain,
        domain_action: DomainAction,
        space_action: SpaceAction,
        basepoint: C64,
        base_value: RVec,
    ) -> Result<Self> {
        let n = f.dim();
        if space_action.dim() != n || base_value.len() != n {
            return Err(Error::InvalidInput(format!(
                "dimension mismatch: f has {n} components, space action {}, base value {}",
                space_action.dim(),
                base_value.len()
            )));
        }
        if !domain_action.group().same_shape(space_action.group()) {
            return Err(Error::InvalidInput("domain and space actions use different groups".into()));
        }
        if !domain.contains(basepoint) {
            return Err(Error::InvalidInput(format!("basepoint {basepoint} is not in the domain")));
        }
        let core_form = f.components().iter().map(|c| c.mul(theta.density())).collect();
        Ok(WeierstrassData {
            f,
            theta,
            domain,
            domain_action,
            space_action,
            basepoint,
            base_value,
            deformation: None,
            core_form,
        })
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn deformation(&self) -> Option<&Deformation> {
        self.deformation.as_ref()
    }

    pub fn with_deformation(&self, deformation: Deformation) -> WeierstrassData {
        WeierstrassData { deformation: Some(deformation), ..self.clone() }
    }

    pub fn with_base_value(&self, v: RVec) -> WeierstrassData {
        WeierstrassData { base_value: v, ..self.clone() }
    }

    /// Revalidates deserialized data and recomputes the cached form.
    pub fn rebuild(&self) -> Result<WeierstrassData> {
        let fresh = WeierstrassData::new(
            self.f.clone(),
            self.theta.clone(),
            self.domain.clone(),
            self.domain_action.clone(),
            self.space_action.clone(),
            self.basepoint,
            self.base_value.clone(),
        )?;
        Ok(match &self.deformation {
            Some(d) => fresh.with_deformation(d.clone()),
            None => fresh,
        })
    }

    /// Undeformed copy.
    pub fn core(&self) -> WeierstrassData {
        WeierstrassData { deformation: None, ..self.clone() }
    }

    /// Same data with `f` multiplied by `s`.
    pub fn scaled(&self, s: C64) -> WeierstrassData {
        let mut out = self.clone();
        out.f = self.f.scale(s);
        out.core_form = self.core_form.iter().map(|c| c.scale(s)).collect();
        out
    }

    /// Coefficient series of `f·θ/dz` for the undeformed map.
    pub fn core_form(&self) -> &[Series] {
        &self.core_form
    }

    fn deform(&self, z: C64, v: CVec) -> CVec {
        match &self.deformation {
            Some(d) if !d.is_trivial() => d.matrix_at(z, self.dim()).exp() * v,
            _ => v,
        }
    }

    /// `f(z)`, deformation included.
    pub fn f_at(&self, z: C64) -> CVec {
        self.deform(z, self.f.eval(z))
    }

    /// `f(z)·θ(z)/dz`, deformation included.
    pub fn form_at(&self, z: C64) -> CVec {
        let core = CVec::from_iterator(self.dim(), self.core_form.iter().map(|s| s.eval(z)));
        self.deform(z, core)
    }

    /// Relative nullity defect `|Σ fᵢ²| / ‖f‖²` at `z`.
    pub fn null_defect(&self, z: C64) -> f64 {
        relative_null_residual(&self.f_at(z))
    }
}
