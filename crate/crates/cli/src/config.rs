//! Run configuration: schema-checked, unknown keys rejected.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use equimin::domain::{DomainAction, DomainKind, InvariantOneForm, PlanarDomain};
use equimin::linalg::{RVec, C64};
use equimin::solver::NewtonConfig;
use equimin::surface::{sha256_hex, DiagnosticsOptions, GridSpec, MeshGrid, SCHEMA};
use equimin::symgroup::SpaceAction;
use equimin::wdata::gallery::GalleryName;
use equimin::wdata::{MeromorphicMap, WeierstrassData};
use equimin::{Error, Result};

#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSpec {
    /// A gallery item; the symmetry pairing may be replaced for negative controls.
    Gallery {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        space_action: Option<SpaceAction>,
    },
    Custom {
        f: MeromorphicMap,
        theta: InvariantOneForm,
        domain: PlanarDomain,
        domain_action: DomainAction,
        space_action: SpaceAction,
        basepoint: C64,
        base_value: Vec<f64>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetSpec {
    /// Prescribed flux `Im ∮ fθ`, one vector per homology loop.
    pub flux: Option<Vec<Vec<f64>>>,
    /// Prescribed values `F(point) = value`.
    pub values: Vec<ValueTarget>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueTarget {
    pub point: C64,
    pub value: Vec<f64>,
}

/// Random initial spray parameter of the given norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub norm: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub grid: GridSpec,
    pub nu: usize,
    pub nv: usize,
}

/// Third-party samples of a map with the action they should respect.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSet {
    pub domain_action: DomainAction,
    pub space_action: SpaceAction,
    pub points: Vec<C64>,
    pub values: Vec<Vec<f64>>,
    #[serde(default = "default_sample_tol")]
    pub tolerance: f64,
}

fn default_sample_tol() -> f64 {
    1e-9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub surface: SurfaceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_value: Option<Vec<f64>>,
    #[serde(default)]
    pub targets: TargetSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Perturbation>,
    #[serde(default)]
    pub solver: NewtonConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<SampleSet>,
}

impl RunConfig {
    pub fn gallery(name: &str) -> Result<Self> {
        let g = GalleryName::parse(name)?;
        let mut cfg = RunConfig {
            schema: SCHEMA.into(),
            surface: SurfaceSpec::Gallery { name: g.label(), space_action: None },
            base_value: None,
            targets: TargetSpec::default(),
            perturbation: None,
            solver: NewtonConfig::default(),
            diagnostics: DiagnosticsOptions::default(),
            mesh: None,
            samples: None,
        };
        let data = cfg.data()?;
        cfg.mesh = Some(default_mesh(&data, 64, 64));
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::Config(format!("schema `{}` is not {SCHEMA}", self.schema)));
        }
        self.solver.validate()?;
        if let Some(p) = &self.perturbation {
            if !(p.norm >= 0.0 && p.norm.is_finite()) {
                return Err(Error::Config("perturbation norm must be finite and nonnegative".into()));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> Result<String> {
        Ok(sha256_hex(serde_json::to_string(self)?.as_bytes()))
    }

    pub fn label(&self) -> String {
        match &self.surface {
            SurfaceSpec::Gallery { name, .. } => name.clone(),
            SurfaceSpec::Custom { domain, .. } => format!("custom on {}", domain.label()),
        }
    }

    /// Weierstrass data described by the config.
    pub fn data(&self) -> Result<WeierstrassData> {
        let data = match &self.surface {
            SurfaceSpec::Gallery { name, space_action } => {
                let d = GalleryName::parse(name)?.build()?;
                match space_action {
                    Some(s) => WeierstrassData::new(
                        d.f,
                        d.theta,
                        d.domain,
                        d.domain_action,
                        s.clone(),
                        d.basepoint,
                        d.base_value,
                    )?,
                    None => d,
                }
            }
            SurfaceSpec::Custom { f, theta, domain, domain_action, space_action, basepoint, base_value } => {
                WeierstrassData::new(
                    f.clone(),
                    theta.clone(),
                    domain.clone(),
                    domain_action.clone(),
                    space_action.clone(),
                    *basepoint,
                    RVec::from_vec(base_value.clone()),
                )?
            }
        };
        Ok(match &self.base_value {
            Some(v) if v.len() == data.dim() => data.with_base_value(RVec::from_vec(v.clone())),
            Some(v) => {
                return Err(Error::Config(format!("base value has {} entries, expected {}", v.len(), data.dim())))
            }
            None => data,
        })
    }

    /// Configured mesh, or the default chart grid for the data.
    pub fn mesh_grid(&self, data: &WeierstrassData, size: Option<(usize, usize)>) -> Result<MeshGrid> {
        let spec = self.mesh.clone().unwrap_or_else(|| default_mesh(data, 64, 64));
        let (nu, nv) = size.unwrap_or((spec.nu, spec.nv));
        MeshGrid::new(spec.grid, nu, nv)
    }
}

/// Annulus about a single puncture, disk for finite actions on the plane,
/// rectangle otherwise.
pub fn default_mesh(data: &WeierstrassData, nu: usize, nv: usize) -> MeshSpec {
    let polar = |center: C64, r_min: f64, r_max: f64, log_radial: bool| GridSpec::Polar {
        center,
        r_min,
        r_max,
        angle0: 0.0,
        angle1: 2.0 * PI,
        log_radial,
    };
    let finite = data.domain_action.group().is_finite();
    let grid = match data.domain.kind() {
        DomainKind::PuncturedPlane if finite && data.domain.punctures().len() == 1 => {
            polar(data.domain.punctures()[0], 0.2, 5.0, true)
        }
        DomainKind::Plane if finite && !data.domain_action.is_free() => polar(C64::new(0.0, 0.0), 0.0, 1.5, false),
        DomainKind::Disk { radius } => polar(C64::new(0.0, 0.0), 0.0, 0.95 * radius, false),
        _ => GridSpec::Rect { lo: C64::new(-2.0, -PI), hi: C64::new(2.0, PI) },
    };
    MeshSpec { grid, nu, nv }
}
