//! The five subcommands. Each reads a [`Config`] and writes its files into
//! the output directory.

use crate::config::{Config, ProfileSpec};
use serde::Serialize;
use std::path::{Path, PathBuf};
use tidal_core::linop::{nonresonance_scan, LinearizedOperator};
use tidal_core::potential::{make_base_state, BaseState};
use tidal_core::residual::{quasi_newton_solve, write_history_csv, ResidualMap};
use tidal_core::spectral::{write_boundary_csv, ShapeCoeffs};
use tidal_core::verify::{run_criterion, VerifyReport};
use tidal_core::{Error, SCHEMA_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0} acceptance criteria failed")]
    VerifyFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::VerifyFailed(_) => 1,
            CliError::Core(e) => match e {
                Error::InvalidInput(_)
                | Error::Parse(_)
                | Error::NonMonotone(_)
                | Error::DegenerateBoundaryDerivative(_)
                | Error::Bracketing { .. } => 2,
                Error::Resonance { .. } => 3,
                Error::Divergence { .. }
                | Error::NonConvergence { .. }
                | Error::NonInjective { .. }
                | Error::Proximity { .. }
                | Error::LinearSolve(_) => 4,
                Error::Quadrature { .. } | Error::Certificate(_) => 5,
                Error::Io(_) => 1,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Writes `bytes` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> CliResult<PathBuf> {
    let path = dir.join(name);
    let text = serde_json::to_vec_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    write_atomic(&path, &text).map_err(Error::from)?;
    Ok(path)
}

fn write_with<F>(dir: &Path, name: &str, f: F) -> CliResult<PathBuf>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let path = dir.join(name);
    let mut buf = Vec::new();
    f(&mut buf).map_err(Error::from)?;
    write_atomic(&path, &buf).map_err(Error::from)?;
    Ok(path)
}

pub fn base_state(cfg: &Config) -> CliResult<BaseState> {
    let a0 = cfg.a0()?;
    Ok(match &cfg.profile {
        ProfileSpec::Rigid => BaseState::rigid(cfg.case, a0, cfg.radial_nodes)?,
        ProfileSpec::Profile(g) => make_base_state(cfg.case, a0, g.clone(), cfg.radial_nodes)?,
    })
}

#[derive(Serialize)]
struct BaseDocument<'a> {
    schema_version: u32,
    base: &'a BaseState,
}

pub fn cmd_base(cfg: &Config, out: &Path) -> CliResult<Vec<PathBuf>> {
    let base = base_state(cfg)?;
    Ok(vec![
        write_json(out, "base.json", &BaseDocument { schema_version: SCHEMA_VERSION, base: &base })?,
        write_with(out, "phi0.csv", |w| base.phi0.write_csv(w))?,
    ])
}

pub fn cmd_scan(cfg: &Config, out: &Path) -> CliResult<Vec<PathBuf>> {
    let base = base_state(cfg)?;
    let op = LinearizedOperator::new(&base, cfg.n_max)?;
    let report = nonresonance_scan(&op, cfg.margin_factor);
    let files = vec![
        write_with(out, "modes.csv", |w| op.table.write_csv(w))?,
        write_json(out, "scan.json", &report)?,
    ];
    if let Some(r) = report.resonances.first() {
        return Err(Error::Resonance { n: r.n, omega: r.omega }.into());
    }
    Ok(files)
}

#[derive(Serialize)]
struct FirstOrderDocument {
    schema_version: u32,
    m: f64,
    h: ShapeCoeffs,
    a: f64,
    lambda: f64,
}

pub fn cmd_perturb(cfg: &Config, out: &Path) -> CliResult<Vec<PathBuf>> {
    let base = base_state(cfg)?;
    let op = LinearizedOperator::new(&base, cfg.n_max)?;
    let mut files = Vec::new();
    for (k, &m) in cfg.masses.iter().enumerate() {
        let (h, b, l) = op.first_order_response(m)?;
        let doc = FirstOrderDocument { schema_version: SCHEMA_VERSION, m, h, a: base.a0 + b, lambda: base.lambda0 + l };
        files.push(write_json(out, &format!("perturb_{k}.json"), &doc)?);
        files.push(write_with(out, &format!("boundary_{k}.csv"), |w| write_boundary_csv(&doc.h, cfg.angular, w))?);
    }
    Ok(files)
}

pub fn cmd_solve(cfg: &Config, out: &Path) -> CliResult<Vec<PathBuf>> {
    let base = base_state(cfg)?;
    let op = LinearizedOperator::new(&base, cfg.n_max)?;
    let map = ResidualMap::new(&base, cfg.n_max, cfg.residual_options())?;
    let mut files = Vec::new();
    for (k, &m) in cfg.masses.iter().enumerate() {
        let s = quasi_newton_solve(&op, &map, m)?;
        files.push(write_json(out, &format!("solve_{k}.json"), &s)?);
        files.push(write_with(out, &format!("boundary_{k}.csv"), |w| write_boundary_csv(&s.h, cfg.angular, w))?);
        files.push(write_with(out, &format!("history_{k}.csv"), |w| write_history_csv(&s.history, w))?);
    }
    Ok(files)
}

pub fn cmd_verify(cfg: &Config, out: &Path) -> CliResult<(VerifyReport, PathBuf)> {
    let opts = cfg.verify_options();
    let report = VerifyReport {
        schema_version: SCHEMA_VERSION,
        criteria: cfg.criteria.iter().map(|&id| run_criterion(id, &opts)).collect(),
        options: opts,
    };
    let path = write_json(out, "verify.json", &report)?;
    Ok((report, path))
}
