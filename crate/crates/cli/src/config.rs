//! Flat `key = value` configuration. Lines starting with `#` are comments;
//! every key may appear at most once and unknown keys are rejected.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use tidal_core::potential::{a0_from_omega, InteractionCase};
use tidal_core::residual::ResidualOptions;
use tidal_core::verify::VerifyOptions;
use tidal_core::VorticityProfile;

/// Key reference shown by `--help`.
pub const KEYS_HELP: &str = "\
Configuration keys (flat `key = value`, `#` comments):
  case           B (logarithmic) or A (Riesz, needs nu)             [default B]
  nu             Riesz exponent in (0, 1], dimensionless
  a0             particle distance, in body radii, >= 2             [default 2]
  omega0         angular speed; alternative to a0 (rigid profile only)
  profile        rigid | constant | linear | exponential | table    [default rigid]
  profile_value  G for `constant`, in units of angular speed
  profile_offset, profile_slope          G(u) = offset + slope u
  profile_amplitude, profile_rate        G(u) = offset + amplitude exp(rate u)
  profile_table  CSV of `u,G` pairs, path relative to the config file
  radial_nodes   Chebyshev nodes in the radius                      [default 128]
  angular        boundary angles                                    [default 256]
  n_max          highest boundary mode                              [default 32]
  masses         comma-separated particle masses (fluid mass = pi)  [default 1e-4]
  margin_factor  dominance factor of the tail certificate           [default 2]
  workers        worker threads, 0 for one per core                 [default 0]
  seed           seed of the randomized checks                      [default 7]
  newton_tol     residual target of the continuation                [default 1e-8]
  newton_max     iteration cap of the continuation                  [default 50]
  criteria       comma-separated acceptance criteria to run         [default 1..10]

Output files:
  base.json      base state; phi0.csv columns r,value
  modes.csv      n,a_deriv,c,omega; scan.json non-resonance report
  perturb_K.json first-order response for the K-th mass; solve_K.json converged solution
  boundary_K.csv phi,x1,x2 boundary samples; history_K.csv iteration,residual,a,lambda,coeff_norm,injectivity_margin
  verify.json    pass/fail record per criterion";

#[derive(Debug, Clone)]
pub enum Placement {
    A0(f64),
    Omega0(f64),
}

#[derive(Debug, Clone)]
pub enum ProfileSpec {
    Rigid,
    Profile(VorticityProfile),
}

#[derive(Debug, Clone)]
pub struct Config {
    pub case: InteractionCase,
    pub placement: Placement,
    pub profile: ProfileSpec,
    pub radial_nodes: usize,
    pub angular: usize,
    pub n_max: usize,
    pub masses: Vec<f64>,
    pub margin_factor: f64,
    pub workers: usize,
    pub seed: u64,
    pub newton_tol: f64,
    pub newton_max: usize,
    pub criteria: Vec<u8>,
}

const KNOWN: [&str; 21] = [
    "case", "nu", "a0", "omega0", "profile", "profile_value", "profile_offset", "profile_slope",
    "profile_amplitude", "profile_rate", "profile_table", "radial_nodes", "angular", "n_max", "masses",
    "margin_factor", "workers", "seed", "newton_tol", "newton_max", "criteria",
];

fn num<T: std::str::FromStr>(kv: &HashMap<String, String>, key: &str, default: T) -> Result<T, String> {
    match kv.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| format!("`{key}`: cannot parse `{v}`")),
    }
}

fn required(kv: &HashMap<String, String>, key: &str, why: &str) -> Result<f64, String> {
    kv.get(key)
        .ok_or_else(|| format!("`{key}` is required {why}"))?
        .parse()
        .map_err(|_| format!("`{key}`: not a number"))
}

fn list<T: std::str::FromStr>(s: &str, key: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| format!("`{key}`: cannot parse `{}`", t.trim())))
        .collect()
}

impl Config {
    pub fn parse(text: &str, dir: &Path) -> Result<Self, String> {
        let mut kv = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
            let k = k.trim().to_string();
            if !KNOWN.contains(&k.as_str()) {
                return Err(format!("line {}: unknown key `{k}`", i + 1));
            }
            if kv.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(format!("line {}: duplicate key `{k}`", i + 1));
            }
        }
        let case = match kv.get("case").map(String::as_str).unwrap_or("B") {
            "B" | "b" => {
                if kv.contains_key("nu") {
                    return Err("`nu` only applies to case A".into());
                }
                InteractionCase::B
            }
            "A" | "a" => InteractionCase::A { nu: required(&kv, "nu", "for case A")? },
            other => return Err(format!("`case`: expected A or B, got `{other}`")),
        };
        case.validate().map_err(|e| e.to_string())?;
        let placement = match (kv.get("a0"), kv.get("omega0")) {
            (Some(_), Some(_)) => return Err("give either `a0` or `omega0`, not both".into()),
            (_, Some(_)) => Placement::Omega0(required(&kv, "omega0", "")?),
            _ => Placement::A0(num(&kv, "a0", 2.0)?),
        };
        let p = |key: &str| required(&kv, key, "by this profile");
        let profile = match kv.get("profile").map(String::as_str).unwrap_or("rigid") {
            "rigid" => ProfileSpec::Rigid,
            "constant" => ProfileSpec::Profile(VorticityProfile::constant(p("profile_value")?)),
            "linear" => ProfileSpec::Profile(
                VorticityProfile::linear(p("profile_offset")?, p("profile_slope")?).map_err(|e| e.to_string())?,
            ),
            "exponential" => ProfileSpec::Profile(
                VorticityProfile::exponential(p("profile_offset")?, p("profile_amplitude")?, p("profile_rate")?)
                    .map_err(|e| e.to_string())?,
            ),
            "table" => {
                let rel = kv.get("profile_table").ok_or("`profile_table` is required by this profile")?;
                let path: PathBuf = dir.join(rel);
                ProfileSpec::Profile(VorticityProfile::from_csv_path(&path).map_err(|e| format!("{}: {e}", path.display()))?)
            }
            other => return Err(format!("`profile`: unknown profile `{other}`")),
        };
        if matches!(placement, Placement::Omega0(_)) && !matches!(profile, ProfileSpec::Rigid) {
            return Err("`omega0` can only be given with the rigid profile".into());
        }
        let masses = match kv.get("masses") {
            Some(s) => list(s, "masses")?,
            None => vec![1e-4],
        };
        if masses.iter().any(|m: &f64| !m.is_finite() || *m < 0.0) {
            return Err("`masses` must be finite and nonnegative".into());
        }
        let criteria = match kv.get("criteria") {
            Some(s) => list(s, "criteria")?,
            None => tidal_core::verify::CRITERIA.to_vec(),
        };
        if let Some(c) = criteria.iter().find(|c| !(1..=10).contains(*c)) {
            return Err(format!("`criteria`: no criterion {c}"));
        }
        let cfg = Self {
            case,
            placement,
            profile,
            radial_nodes: num(&kv, "radial_nodes", 128)?,
            angular: num(&kv, "angular", 256)?,
            n_max: num(&kv, "n_max", 32)?,
            masses,
            margin_factor: num(&kv, "margin_factor", 2.0)?,
            workers: num(&kv, "workers", 0)?,
            seed: num(&kv, "seed", 7)?,
            newton_tol: num(&kv, "newton_tol", 1e-8)?,
            newton_max: num(&kv, "newton_max", 50)?,
            criteria,
        };
        if cfg.radial_nodes < 8 || cfg.angular < 16 || cfg.n_max < 1 {
            return Err("`radial_nodes` >= 8, `angular` >= 16 and `n_max` >= 1 are required".into());
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Particle distance, resolving `omega0` if that was given.
    pub fn a0(&self) -> Result<f64, tidal_core::Error> {
        match self.placement {
            Placement::A0(a) => Ok(a),
            Placement::Omega0(w) => a0_from_omega(self.case, w),
        }
    }

    pub fn residual_options(&self) -> ResidualOptions {
        ResidualOptions {
            radial_nodes: self.radial_nodes,
            angular: self.angular,
            newton_tol: self.newton_tol,
            newton_max: self.newton_max,
            ..Default::default()
        }
    }

    pub fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            radial_nodes: self.radial_nodes,
            angular: self.angular,
            shape_order: self.n_max,
            seed: self.seed,
        }
    }
}
