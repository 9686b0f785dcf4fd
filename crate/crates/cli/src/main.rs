use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use equimin_cli::commands::{EXIT_CONFIG, EXIT_OK};
use equimin_cli::{cmd_export, cmd_generate, cmd_solve, cmd_verify, exit_code, Outcome, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "equimin", version, about = "Equivariant minimal surfaces from Weierstrass data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a full config and Weierstrass data for a gallery item.
    Generate(Common),
    /// Correct periods with Newton's method and verify the result.
    Solve(Common),
    /// Re-run residual checks on a solution or on sample data.
    Verify(Common),
    /// Mesh the solved surface and write OBJ/PLY with checksums.
    Export(Common),
}

#[derive(Args)]
struct Common {
    /// Run config (JSON).
    #[arg(long, conflicts_with = "gallery")]
    config: Option<PathBuf>,
    /// Gallery item such as `catenoid(6)` instead of a config file.
    #[arg(long)]
    gallery: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// Override the period and Newton tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Mesh size as NxM.
    #[arg(long, value_parser = parse_mesh)]
    mesh: Option<(usize, usize)>,
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_mesh(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("`{s}` is not NxM"))?;
    let n = a.trim().parse().map_err(|_| format!("bad mesh width `{a}`"))?;
    let m = b.trim().parse().map_err(|_| format!("bad mesh height `{b}`"))?;
    Ok((n, m))
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("EQUIMIN_THREADS") {
        let n: usize = v.parse().with_context(|| format!("EQUIMIN_THREADS=`{v}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| anyhow!(e))?;
    }
    Ok(())
}

fn load(common: &Common) -> equimin::Result<RunConfig> {
    let mut cfg = match (&common.config, &common.gallery) {
        (Some(p), _) => RunConfig::load(p)?,
        (None, Some(g)) => RunConfig::gallery(g)?,
        (None, None) => return Err(equimin::Error::Config("one of --config or --gallery is required".into())),
    };
    Overrides { tol: common.tol, mesh: common.mesh, seed: common.seed }.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn run(cmd: Command) -> equimin::Result<Outcome> {
    match cmd {
        Command::Generate(c) => cmd_generate(&load(&c)?, &c.out),
        Command::Solve(c) => cmd_solve(&load(&c)?, &c.out),
        Command::Verify(c) => cmd_verify(&load(&c)?, &c.out),
        Command::Export(c) => cmd_export(&load(&c)?, &c.out, c.mesh),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { EXIT_OK as u8 });
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    match run(cli.command) {
        Ok(out) => {
            for m in &out.messages {
                println!("{m}");
            }
            if let Some(p) = &out.report {
                println!("report: {}", p.display());
            }
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
