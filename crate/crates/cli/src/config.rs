//! Flat key-value run configuration: parsing, defaults, validation.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{Context, Result, anyhow, bail};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    QsvdFidelity,
    ReshapeFidelity,
    Vqmps,
    VqeBaseline,
    ClassicalDmrg,
}

impl FromStr for Experiment {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "qsvd_fidelity" => Experiment::QsvdFidelity,
            "reshape_fidelity" => Experiment::ReshapeFidelity,
            "vqmps" => Experiment::Vqmps,
            "vqe_baseline" => Experiment::VqeBaseline,
            "classical_dmrg" => Experiment::ClassicalDmrg,
            other => bail!(
                "experiment: unknown value {other:?} (expected qsvd_fidelity, \
                 reshape_fidelity, vqmps, vqe_baseline, or classical_dmrg)"
            ),
        })
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Experiment::QsvdFidelity => "qsvd_fidelity",
            Experiment::ReshapeFidelity => "reshape_fidelity",
            Experiment::Vqmps => "vqmps",
            Experiment::VqeBaseline => "vqe_baseline",
            Experiment::ClassicalDmrg => "classical_dmrg",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Exact,
    Vqe,
}

/// One experiment run, as read from a `key = value` file. Lines starting
/// with `#` and blank lines are ignored; unknown keys are rejected.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub model: String,
    pub n: usize,
    pub j: f64,
    pub delta: f64,
    pub h: f64,
    pub n_chi: usize,
    /// 0 means "use the experiment default".
    pub ansatz_depth: usize,
    pub learning_rate: f64,
    pub iterations: usize,
    pub sweeps: usize,
    pub seed: u64,
    pub repeats: usize,
    pub solver: SolverKind,
    pub allow_large_chi: bool,
    pub output_path: PathBuf,
}

/// Overrides the directory of `output_path` when set.
pub const OUTPUT_DIR_ENV: &str = "VQMPS_OUTPUT_DIR";

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut experiment = None;
        let mut model = "xxz".to_string();
        let mut n = 4usize;
        let mut j = 1.0;
        let mut delta = 1.0;
        let mut h = 0.0;
        let mut n_chi = 1usize;
        let mut ansatz_depth = 0usize;
        let mut learning_rate = 0.05;
        let mut iterations = 300usize;
        let mut sweeps = 6usize;
        let mut seed = 0u64;
        let mut repeats = 3usize;
        let mut solver = SolverKind::Vqe;
        let mut allow_large_chi = false;
        let mut output_path: Option<PathBuf> = None;

        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`, got {raw:?}", line_no + 1))?;
            let key = key.trim();
            let value = value.trim();
            let ctx = |field: &str| format!("{field}: invalid value {value:?}");
            match key {
                "experiment" => experiment = Some(value.parse()?),
                "model" => model = value.to_string(),
                "n" => n = value.parse().with_context(|| ctx("n"))?,
                "j" => j = value.parse().with_context(|| ctx("j"))?,
                "delta" => delta = value.parse().with_context(|| ctx("delta"))?,
                "h" => h = value.parse().with_context(|| ctx("h"))?,
                "n_chi" => n_chi = value.parse().with_context(|| ctx("n_chi"))?,
                "ansatz_depth" => {
                    ansatz_depth = value.parse().with_context(|| ctx("ansatz_depth"))?
                }
                "learning_rate" => {
                    learning_rate = value.parse().with_context(|| ctx("learning_rate"))?
                }
                "iterations" => iterations = value.parse().with_context(|| ctx("iterations"))?,
                "sweeps" => sweeps = value.parse().with_context(|| ctx("sweeps"))?,
                "seed" => seed = value.parse().with_context(|| ctx("seed"))?,
                "repeats" => repeats = value.parse().with_context(|| ctx("repeats"))?,
                "solver" => {
                    solver = match value {
                        "exact" => SolverKind::Exact,
                        "vqe" => SolverKind::Vqe,
                        other => bail!("solver: unknown value {other:?} (expected exact or vqe)"),
                    }
                }
                "allow_large_chi" => {
                    allow_large_chi = value.parse().with_context(|| ctx("allow_large_chi"))?
                }
                "output_path" => output_path = Some(PathBuf::from(value)),
                other => bail!("unknown config key {other:?}"),
            }
        }

        let experiment = experiment.ok_or_else(|| anyhow!("experiment: missing (required)"))?;
        let mut output_path =
            output_path.unwrap_or_else(|| PathBuf::from(format!("results/{experiment}.json")));
        if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
            let file = output_path
                .file_name()
                .map(|f| f.to_owned())
                .ok_or_else(|| anyhow!("output_path: missing file name"))?;
            output_path = PathBuf::from(dir).join(file);
        }

        let config = RunConfig {
            experiment,
            model,
            n,
            j,
            delta,
            h,
            n_chi,
            ansatz_depth,
            learning_rate,
            iterations,
            sweeps,
            seed,
            repeats,
            solver,
            allow_large_chi,
            output_path,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.model != "xxz" {
            bail!("model: unknown value {:?} (expected xxz)", self.model);
        }
        if self.n < 2 {
            bail!("n: must be at least 2, got {}", self.n);
        }
        if self.n > 12 {
            bail!("n: must be at most 12 (oracle limit), got {}", self.n);
        }
        if !(1..=3).contains(&self.n_chi) && !self.allow_large_chi {
            bail!(
                "n_chi: {} is outside the tested range 1..=3; set allow_large_chi = true to override",
                self.n_chi
            );
        }
        if self.n_chi == 0 {
            bail!("n_chi: must be at least 1");
        }
        if !(self.learning_rate > 0.0) {
            bail!("learning_rate: must be positive, got {}", self.learning_rate);
        }
        if self.iterations == 0 {
            bail!("iterations: must be at least 1");
        }
        if self.sweeps == 0 {
            bail!("sweeps: must be at least 1");
        }
        if self.repeats == 0 {
            bail!("repeats: must be at least 1");
        }
        if !self.j.is_finite() || !self.delta.is_finite() || !self.h.is_finite() {
            bail!("j/delta/h: must be finite");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_minimal() {
        let c = RunConfig::parse("experiment = vqmps\nn = 6\ndelta = 0.5\n").unwrap();
        assert_eq!(c.experiment, Experiment::Vqmps);
        assert_eq!(c.n, 6);
        assert_eq!(c.delta, 0.5);
        assert_eq!(c.repeats, 3);
        assert_eq!(c.iterations, 300);
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let c = RunConfig::parse("# a comment\n\nexperiment = vqe_baseline\n").unwrap();
        assert_eq!(c.experiment, Experiment::VqeBaseline);
    }

    #[test]
    fn rejects_unknown_key() {
        let err = RunConfig::parse("experiment = vqmps\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn rejects_out_of_range_chi() {
        let err = RunConfig::parse("experiment = vqmps\nn_chi = 4\n").unwrap_err();
        assert!(err.to_string().contains("n_chi"));
        let ok = RunConfig::parse("experiment = vqmps\nn_chi = 4\nallow_large_chi = true\n");
        assert!(ok.is_ok());
    }

    #[test]
    fn reports_field_name_on_bad_value() {
        let err = RunConfig::parse("experiment = vqmps\ndelta = abc\n").unwrap_err();
        assert!(format!("{err:#}").contains("delta"));
    }

    #[test]
    fn missing_experiment_is_an_error() {
        let err = RunConfig::parse("n = 4\n").unwrap_err();
        assert!(err.to_string().contains("experiment"));
    }
}
