//! generate / solve / verify / export, each returning an exit code and messages.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use equimin::domain::{build_path_system, PathSystem};
use equimin::linalg::{numerical_rank, singular_values, RMat, RVec, C64};
use equimin::periods::{PeriodTarget, Residuals};
use equimin::solver::{
    build_period_spray_for, feasibility_check, interpolate_values, newton_correct, FeasibilityReport, NewtonConfig,
    NewtonTrace,
};
use equimin::surface::{
    diagnose, export_mesh, mesh_export, DiagnosticsOptions, DiagnosticsReport, ExportedFile, Figure, ImmersionField,
    NONDEGENERACY_REL_TOL, SCHEMA,
};
use equimin::wdata::WeierstrassData;
use equimin::{Error, Result};

use crate::config::{RunConfig, SampleSet};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_NEWTON: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;
pub const EXIT_IO: i32 = 5;

/// Quadrature tolerance used for every field built by the commands.
const FIELD_TOL: f64 = 1e-12;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::FlatCore(_)
        | Error::InsufficientDirections { .. }
        | Error::SingularJacobian { .. }
        | Error::MaxIterations { .. }
        | Error::LeftValidityBall { .. }
        | Error::UnsupportedAction(_) => EXIT_NEWTON,
        Error::QuadratureNonConvergence { .. }
        | Error::PathMargin { .. }
        | Error::ResidueDiscrepancy { .. }
        | Error::NotNearQuadric { .. } => EXIT_VERIFY,
        _ => EXIT_CONFIG,
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub mesh: Option<(usize, usize)>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(t) = self.tol {
            cfg.solver.tol = t;
            cfg.diagnostics.period_tol = t;
        }
        if let Some(s) = self.seed {
            cfg.diagnostics.seed = s;
            if let Some(p) = cfg.perturbation.as_mut() {
                p.seed = s;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub messages: Vec<String>,
    pub report: Option<PathBuf>,
}

impl Outcome {
    fn new(code: i32, messages: Vec<String>, report: Option<PathBuf>) -> Self {
        Outcome { code, messages, report }
    }
}

/// Corrected data with the paths and targets it was solved against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub schema: String,
    pub config_hash: String,
    pub data: WeierstrassData,
    pub paths: PathSystem,
    pub target: PeriodTarget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SprayInfo {
    pub slots: Vec<String>,
    pub candidates: usize,
    pub initial_params: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub schema: String,
    pub command: String,
    pub status: String,
    pub surface: String,
    pub config_hash: String,
    pub solver: NewtonConfig,
    pub feasibility: FeasibilityReport,
    pub evidence: Vec<String>,
    pub spray: Option<SprayInfo>,
    pub newton: Option<NewtonTrace>,
    pub params: Vec<C64>,
    pub period_residuals: Option<Residuals>,
    pub diagnostics: Option<DiagnosticsReport>,
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub schema: String,
    pub command: String,
    pub status: String,
    pub config_hash: String,
    pub equivariance: Figure,
    pub affine_rank: usize,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportReport {
    pub schema: String,
    pub command: String,
    pub config_hash: String,
    pub vertices: usize,
    pub quads: usize,
    pub max_curvature: f64,
    pub min_lambda: f64,
    pub files: Vec<ExportedFile>,
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value)?)?;
    Ok(path)
}

fn initial_params(cfg: &RunConfig, k: usize) -> Vec<C64> {
    match &cfg.perturbation {
        Some(p) if k > 0 && p.norm > 0.0 => {
            let r = p.norm / (k as f64).sqrt();
            (0..k).map(|s| C64::from_polar(r, s as f64 + p.seed as f64)).collect()
        }
        _ => vec![C64::new(0.0, 0.0); k],
    }
}

fn build_target(cfg: &RunConfig, data: &WeierstrassData, paths: &mut PathSystem) -> Result<PeriodTarget> {
    let mut target = PeriodTarget::standard(data, paths)?;
    if let Some(flux) = &cfg.targets.flux {
        target = target.with_flux(data, paths, flux.iter().map(|v| RVec::from_vec(v.clone())).collect())?;
    }
    if !cfg.targets.values.is_empty() {
        let points: Vec<C64> = cfg.targets.values.iter().map(|v| v.point).collect();
        let values: Vec<RVec> = cfg.targets.values.iter().map(|v| RVec::from_vec(v.value.clone())).collect();
        target = interpolate_values(data, paths, &target, &points, &values)?;
    }
    Ok(target)
}

/// Writes a complete config and the Weierstrass data for a gallery item.
pub fn cmd_generate(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let data = cfg.data()?;
    let mut full = cfg.clone();
    if full.mesh.is_none() {
        full.mesh = Some(crate::config::default_mesh(&data, 64, 64));
    }
    fs::create_dir_all(out)?;
    let config_path = out.join("config.json");
    fs::write(&config_path, full.to_json()?)?;
    write_json(out, "data.json", &data)?;
    let messages = vec![format!("generated {} -> {}", full.label(), config_path.display())];
    Ok(Outcome::new(EXIT_OK, messages, Some(config_path)))
}

/// Feasibility, spray, Newton correction and verification.
pub fn cmd_solve(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let hash = cfg.hash()?;
    let data = cfg.data()?;
    let feasibility = feasibility_check(&data.domain, &data.domain_action, &data.space_action)?;
    let mut report = SolveReport {
        schema: SCHEMA.into(),
        command: "solve".into(),
        status: String::new(),
        surface: cfg.label(),
        config_hash: hash.clone(),
        solver: cfg.solver.clone(),
        feasibility: feasibility.clone(),
        evidence: feasibility.evidence(),
        spray: None,
        newton: None,
        params: Vec::new(),
        period_residuals: None,
        diagnostics: None,
        message: None,
    };
    if !feasibility.feasible {
        report.status = "infeasible".into();
        let path = write_json(out, "report.json", &report)?;
        return Ok(Outcome::new(EXIT_INFEASIBLE, report.evidence.clone(), Some(path)));
    }
    let mut paths = build_path_system(&data.domain, &data.domain_action, data.basepoint)?;
    let target = build_target(cfg, &data, &mut paths)?;
    let solved = build_period_spray_for(&data, &paths, &target).and_then(|spray| {
        let t0 = initial_params(cfg, spray.len());
        let info = SprayInfo {
            slots: spray.slots.iter().map(|s| s.label.clone()).collect(),
            candidates: spray.candidates,
            initial_params: t0.clone(),
        };
        newton_correct(&spray.with_params(t0), &target, &cfg.solver).map(|o| (info, o))
    });
    let (info, outcome) = match solved {
        Ok(x) => x,
        Err(e) => {
            report.status = "newton_failed".into();
            report.message = Some(e.to_string());
            let path = write_json(out, "report.json", &report)?;
            return Ok(Outcome::new(exit_code(&e), vec![e.to_string()], Some(path)));
        }
    };
    let field = ImmersionField::new(outcome.data.clone(), paths.clone(), FIELD_TOL)?;
    let diagnostics = diagnose(&field, &target, &feasibility, &cfg.diagnostics)?;
    let converged = outcome.residuals.max() <= cfg.solver.tol;
    let passed = converged && diagnostics.passed;
    let mut messages = vec![format!(
        "{}: {} Newton iterations, residual {:.3e}",
        cfg.label(),
        outcome.trace.iterations,
        outcome.residuals.max()
    )];
    messages.extend(diagnostics.failures());
    report.status = if passed { "ok".into() } else { "verification_failed".into() };
    report.spray = Some(info);
    report.newton = Some(outcome.trace.clone());
    report.params = outcome.params.clone();
    report.period_residuals = Some(outcome.residuals.clone());
    report.diagnostics = Some(diagnostics);
    let solution = Solution { schema: SCHEMA.into(), config_hash: hash, data: outcome.data, paths, target };
    write_json(out, "solution.json", &solution)?;
    let path = write_json(out, "report.json", &report)?;
    Ok(Outcome::new(if passed { EXIT_OK } else { EXIT_VERIFY }, messages, Some(path)))
}

fn load_solution(out: &Path) -> Result<Option<Solution>> {
    let path = out.join("solution.json");
    if !path.exists() {
        return Ok(None);
    }
    let mut s: Solution = serde_json::from_str(&fs::read_to_string(&path)?)?;
    s.data = s.data.rebuild()?;
    Ok(Some(s))
}

/// Solved field from `out/solution.json`, or the unsolved config data.
fn field_for(cfg: &RunConfig, out: &Path) -> Result<(ImmersionField, PeriodTarget)> {
    match load_solution(out)? {
        Some(s) => Ok((ImmersionField::new(s.data, s.paths, FIELD_TOL)?, s.target)),
        None => {
            let data = cfg.data()?;
            let mut paths = build_path_system(&data.domain, &data.domain_action, data.basepoint)?;
            let target = build_target(cfg, &data, &mut paths)?;
            Ok((ImmersionField::new(data, paths, FIELD_TOL)?, target))
        }
    }
}

/// `max ‖F(g·x) − g·F(x)‖` over sample pairs related by a generator.
pub fn verify_samples(set: &SampleSet, opts: &DiagnosticsOptions) -> Result<(Figure, usize)> {
    let n = set.space_action.dim();
    if set.points.len() != set.values.len() || set.values.iter().any(|v| v.len() != n) {
        return Err(Error::Config("samples need one value of the action's dimension per point".into()));
    }
    if !set.domain_action.group().same_shape(set.space_action.group()) {
        return Err(Error::Config("sample actions use different groups".into()));
    }
    let values: Vec<RVec> = set.values.iter().map(|v| RVec::from_vec(v.clone())).collect();
    let mut worst = 0.0_f64;
    let mut pairs = 0;
    for g in set.space_action.group().generator_refs() {
        let map = set.domain_action.map(&g)?;
        let motion = set.space_action.motion(&g)?;
        for (i, &x) in set.points.iter().enumerate() {
            let gx = map.apply(x);
            if let Some(j) = set.points.iter().position(|&y| (y - gx).norm() <= 1e-9 * (1.0 + gx.norm())) {
                worst = worst.max((&values[j] - motion.apply(&values[i])).norm());
                pairs += 1;
            }
        }
    }
    if pairs == 0 {
        return Err(Error::Config("no two samples are related by a generator".into()));
    }
    let _ = opts;
    let mut m = RMat::zeros(n, values.len());
    for (j, v) in values.iter().enumerate() {
        m.set_column(j, v);
    }
    let mean = m.column_mean();
    for mut col in m.column_iter_mut() {
        col -= &mean;
    }
    let rank = numerical_rank(&singular_values(&m), NONDEGENERACY_REL_TOL);
    Ok((Figure::new(worst, set.tolerance, pairs), rank))
}

/// Residual-only run on the solved field, the config data, or third-party samples.
pub fn cmd_verify(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let hash = cfg.hash()?;
    if let Some(set) = &cfg.samples {
        let (equivariance, affine_rank) = verify_samples(set, &cfg.diagnostics)?;
        let pass = equivariance.pass;
        let report = SampleReport {
            schema: SCHEMA.into(),
            command: "verify".into(),
            status: if pass { "ok".into() } else { "verification_failed".into() },
            config_hash: hash,
            equivariance: equivariance.clone(),
            affine_rank,
            dim: set.space_action.dim(),
        };
        let path = write_json(out, "verify.json", &report)?;
        let msg = format!("sample equivariance {:.3e} (tolerance {:.1e})", equivariance.value, equivariance.tolerance);
        return Ok(Outcome::new(if pass { EXIT_OK } else { EXIT_VERIFY }, vec![msg], Some(path)));
    }
    let (field, target) = field_for(cfg, out)?;
    let data = field.data();
    let feasibility = feasibility_check(&data.domain, &data.domain_action, &data.space_action)?;
    let diagnostics = diagnose(&field, &target, &feasibility, &cfg.diagnostics)?;
    let passed = diagnostics.passed;
    let mut messages = vec![format!("{}: verification {}", cfg.label(), if passed { "passed" } else { "failed" })];
    if !diagnostics.nondegeneracy.nondegenerate {
        messages.push(format!(
            "flagged: affine rank {} < {} (image lies in a hyperplane)",
            diagnostics.nondegeneracy.rank, diagnostics.nondegeneracy.dim
        ));
    }
    messages.extend(diagnostics.failures());
    let path = write_json(out, "verify.json", &diagnostics)?;
    Ok(Outcome::new(if passed { EXIT_OK } else { EXIT_VERIFY }, messages, Some(path)))
}

/// Meshes the solved field (solving first if needed) and writes OBJ/PLY/JSON.
pub fn cmd_export(cfg: &RunConfig, out: &Path, mesh: Option<(usize, usize)>) -> Result<Outcome> {
    fs::create_dir_all(out)?;
    if load_solution(out)?.is_none() {
        let solved = cmd_solve(cfg, out)?;
        if solved.code != EXIT_OK {
            return Ok(solved);
        }
    }
    let (field, _) = field_for(cfg, out)?;
    let grid = cfg.mesh_grid(field.data(), mesh)?;
    let m = mesh_export(&field, &grid)?;
    m.validate()?;
    let files = export_mesh(&m, out, "surface")?;
    let report = ExportReport {
        schema: SCHEMA.into(),
        command: "export".into(),
        config_hash: cfg.hash()?,
        vertices: m.vertex_count(),
        quads: m.quad_count(),
        max_curvature: m.max_curvature(),
        min_lambda: m.min_lambda(),
        files,
    };
    let path = write_json(out, "export.json", &report)?;
    let mut messages = vec![format!("{} vertices, {} quads", report.vertices, report.quads)];
    messages.extend(report.files.iter().map(|f| format!("{} sha256 {}", f.path.display(), f.sha256)));
    Ok(Outcome::new(EXIT_OK, messages, Some(path)))
}
