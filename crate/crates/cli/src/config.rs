use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use parareal_core::integrators::CoarseMethod;
use parareal_core::ode_model::CATALOG;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable holding the default output directory.
pub const OUTPUT_DIR_ENV: &str = "PARAREAL_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "parareal-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoarseChoice {
    ForwardEuler,
    BackwardEuler,
}

impl CoarseChoice {
    pub fn method(self) -> CoarseMethod {
        match self {
            CoarseChoice::ForwardEuler => CoarseMethod::forward_euler(),
            CoarseChoice::BackwardEuler => CoarseMethod::backward_euler(),
        }
    }
}

impl fmt::Display for CoarseChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoarseChoice::ForwardEuler => "forward-euler",
            CoarseChoice::BackwardEuler => "backward-euler",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    Run,
    Bounds,
    DefectOrder,
    IntegratorOrder,
    Conditions,
    Phi1,
    All,
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub problem: String,
    #[serde(rename = "N")]
    pub intervals: usize,
    pub m: usize,
    #[serde(rename = "K")]
    pub iterations: usize,
    pub coarse: CoarseChoice,
    pub workers: usize,
    pub study: Study,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: "linear-scalar".into(),
            intervals: 10,
            m: 4,
            iterations: 5,
            coarse: CoarseChoice::ForwardEuler,
            workers: 1,
            study: Study::Run,
            seed: 42,
            output_dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
        }
    }
}

/// Keys accepted in a JSON config file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    problem: Option<String>,
    #[serde(rename = "N")]
    intervals: Option<usize>,
    m: Option<usize>,
    #[serde(rename = "K")]
    iterations: Option<usize>,
    coarse: Option<CoarseChoice>,
    workers: Option<usize>,
    study: Option<Study>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
}

/// Parareal experiment runner.
///
/// Settings come from defaults, then an optional JSON file (`--config`),
/// then flags. The output directory defaults to `$PARAREAL_OUTPUT_DIR`.
#[derive(Debug, Default, Parser)]
#[command(name = "parareal", version, about)]
pub struct CliArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Catalog problem: linear-scalar, linear-decay, nonautonomous, zero-rhs.
    #[arg(long)]
    pub problem: Option<String>,
    /// Number of coarse intervals.
    #[arg(long = "N")]
    pub intervals: Option<usize>,
    /// RK4 substeps per coarse interval.
    #[arg(long = "m")]
    pub m: Option<usize>,
    /// Number of parareal iterations.
    #[arg(long = "K")]
    pub iterations: Option<usize>,
    #[arg(long, value_enum)]
    pub coarse: Option<CoarseChoice>,
    /// Threads for the defect sweep.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum)]
    pub study: Option<Study>,
    /// Seed for sampled condition checks.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

fn read_file(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigFile {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| {
        let msg = e.to_string();
        // serde names the offending key in backticks
        let key = msg
            .split('`')
            .nth(1)
            .filter(|_| msg.starts_with("unknown field") || msg.starts_with("unknown variant"))
            .unwrap_or("<file>")
            .to_string();
        CliError::Config { key, message: msg }
    })
}

/// Resolves defaults, file values and flags (in increasing precedence),
/// then validates the result. `env_output_dir` is the value of
/// [`OUTPUT_DIR_ENV`], passed in so callers control the environment.
pub fn parse_config(args: &CliArgs, env_output_dir: Option<PathBuf>) -> Result<ExperimentConfig, CliError> {
    let file = match &args.config {
        Some(path) => read_file(path)?,
        None => ConfigFile::default(),
    };
    let defaults = ExperimentConfig::default();
    let cfg = ExperimentConfig {
        problem: args.problem.clone().or(file.problem).unwrap_or(defaults.problem),
        intervals: args.intervals.or(file.intervals).unwrap_or(defaults.intervals),
        m: args.m.or(file.m).unwrap_or(defaults.m),
        iterations: args.iterations.or(file.iterations).unwrap_or(defaults.iterations),
        coarse: args.coarse.or(file.coarse).unwrap_or(defaults.coarse),
        workers: args.workers.or(file.workers).unwrap_or(defaults.workers),
        study: args.study.or(file.study).unwrap_or(defaults.study),
        seed: args.seed.or(file.seed).unwrap_or(defaults.seed),
        output_dir: args
            .output_dir
            .clone()
            .or(file.output_dir)
            .or(env_output_dir)
            .unwrap_or(defaults.output_dir),
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig) -> Result<(), CliError> {
    if !CATALOG.contains(&cfg.problem.as_str()) {
        return Err(CliError::config(
            "problem",
            format!("unknown problem `{}`; available: {}", cfg.problem, CATALOG.join(", ")),
        ));
    }
    if cfg.intervals == 0 {
        return Err(CliError::config("N", "N must be at least 1"));
    }
    if cfg.iterations > cfg.intervals {
        return Err(CliError::config("K", "K exceeds N"));
    }
    if cfg.m == 0 {
        return Err(CliError::config("m", "m must be at least 1"));
    }
    if cfg.workers == 0 {
        return Err(CliError::config("workers", "workers must be at least 1"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn flags(argv: &[&str]) -> CliArgs {
        let mut full = vec!["parareal"];
        full.extend_from_slice(argv);
        CliArgs::parse_from(full)
    }

    fn json(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn empty_flags_give_defaults() {
        let cfg = parse_config(&flags(&[]), None).unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.intervals, 10);
        assert_eq!(cfg.m, 4);
        assert_eq!(cfg.iterations, 5);
        assert_eq!(cfg.coarse, CoarseChoice::ForwardEuler);
        assert_eq!(cfg.workers, 1);
        assert_eq!(cfg.seed, 42);
    }

    #[test]
    fn k_above_n_rejected() {
        let err = parse_config(&flags(&["--problem", "linear-scalar", "--N", "20", "--K", "21"]), None).unwrap_err();
        assert!(matches!(&err, CliError::Config { key, .. } if key == "K"));
        assert!(err.to_string().contains("K exceeds N"));
    }

    #[test]
    fn flags_override_file() {
        let f = json(r#"{"N": 10, "K": 3, "coarse": "backward-euler"}"#);
        let path = f.path().to_str().unwrap();
        let cfg = parse_config(&flags(&["--config", path, "--N", "40"]), None).unwrap();
        assert_eq!(cfg.intervals, 40);
        assert_eq!(cfg.iterations, 3);
        assert_eq!(cfg.coarse, CoarseChoice::BackwardEuler);
    }

    #[test]
    fn unknown_file_key_named() {
        let f = json(r#"{"N": 10, "tolerance": 1e-3}"#);
        let err = parse_config(&flags(&["--config", f.path().to_str().unwrap()]), None).unwrap_err();
        assert!(
            matches!(&err, CliError::Config { key, .. } if key == "tolerance"),
            "{err}"
        );
    }

    #[test]
    fn invalid_enum_in_file_named() {
        let f = json(r#"{"coarse": "crank-nicolson"}"#);
        let err = parse_config(&flags(&["--config", f.path().to_str().unwrap()]), None).unwrap_err();
        assert!(
            matches!(&err, CliError::Config { key, .. } if key == "crank-nicolson"),
            "{err}"
        );
        assert!(CliArgs::try_parse_from(["parareal", "--study", "everything"]).is_err());
    }

    #[test]
    fn unknown_problem_and_zero_counts() {
        let err = parse_config(&flags(&["--problem", "lorenz"]), None).unwrap_err();
        assert!(err.to_string().contains("zero-rhs"));
        assert!(parse_config(&flags(&["--m", "0"]), None).is_err());
        assert!(parse_config(&flags(&["--workers", "0"]), None).is_err());
        assert!(parse_config(&flags(&["--N", "0", "--K", "0"]), None).is_err());
    }

    #[test]
    fn output_dir_precedence() {
        let env = Some(PathBuf::from("/tmp/from-env"));
        assert_eq!(
            parse_config(&flags(&[]), env.clone()).unwrap().output_dir,
            PathBuf::from("/tmp/from-env")
        );
        let cfg = parse_config(&flags(&["--output-dir", "here"]), env).unwrap();
        assert_eq!(cfg.output_dir, PathBuf::from("here"));
        assert_eq!(
            parse_config(&flags(&[]), None).unwrap().output_dir,
            PathBuf::from(DEFAULT_OUTPUT_DIR)
        );
    }
}
