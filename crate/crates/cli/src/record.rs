//! Result records: JSON persistence and flat CSV emission.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

/// Echo of the configuration a record was produced from; kept as its own
/// (deserializable) type so `compare` can read records back.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub experiment: String,
    pub model: String,
    pub n: usize,
    pub j: f64,
    pub delta: f64,
    pub h: f64,
    pub n_chi: usize,
    pub ansatz_depth: usize,
    pub learning_rate: f64,
    pub iterations: usize,
    pub sweeps: usize,
    pub seed: u64,
    pub repeats: usize,
    pub solver: String,
}

impl ConfigEcho {
    pub fn from_config(c: &RunConfig) -> Self {
        ConfigEcho {
            experiment: c.experiment.to_string(),
            model: c.model.clone(),
            n: c.n,
            j: c.j,
            delta: c.delta,
            h: c.h,
            n_chi: c.n_chi,
            ansatz_depth: c.ansatz_depth,
            learning_rate: c.learning_rate,
            iterations: c.iterations,
            sweeps: c.sweeps,
            seed: c.seed,
            repeats: c.repeats,
            solver: format!("{:?}", c.solver).to_lowercase(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RepeatOutcome {
    pub repeat: usize,
    pub seed: u64,
    /// Energy or fidelity, depending on the experiment.
    pub value: f64,
    /// Dense exact ground energy where applicable.
    pub oracle_energy: Option<f64>,
    pub wallclock_ms: u64,
    /// Per-point detail (e.g. per-bipartition fidelities); empty when the
    /// experiment has a single value per repeat.
    pub details: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Summary {
            mean,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResultRecord {
    pub version: String,
    pub config: ConfigEcho,
    pub outcomes: Vec<RepeatOutcome>,
    pub summary: Summary,
    pub total_wallclock_ms: u64,
}

impl ResultRecord {
    pub fn new(config: &RunConfig, outcomes: Vec<RepeatOutcome>, total_wallclock_ms: u64) -> Self {
        let values: Vec<f64> = outcomes.iter().map(|o| o.value).collect();
        ResultRecord {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: ConfigEcho::from_config(config),
            outcomes,
            summary: Summary::of(&values),
            total_wallclock_ms,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
            }
        }
        let text = serde_json::to_string_pretty(self).context("serializing record")?;
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }

    /// One CSV row per repeat with the fixed plotting columns.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)
            .with_context(|| format!("writing {}", path.display()))?;
        w.write_record([
            "experiment",
            "N",
            "J",
            "delta",
            "h",
            "n_chi",
            "seed",
            "repeat",
            "energy_or_fidelity",
            "oracle_energy",
            "wallclock_ms",
        ])?;
        for o in &self.outcomes {
            w.write_record([
                self.config.experiment.clone(),
                self.config.n.to_string(),
                self.config.j.to_string(),
                self.config.delta.to_string(),
                self.config.h.to_string(),
                self.config.n_chi.to_string(),
                o.seed.to_string(),
                o.repeat.to_string(),
                o.value.to_string(),
                o.oracle_energy.map(|e| e.to_string()).unwrap_or_default(),
                o.wallclock_ms.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultRecord {
        ResultRecord {
            version: "0.1.0".into(),
            config: ConfigEcho {
                experiment: "vqmps".into(),
                model: "xxz".into(),
                n: 4,
                j: 1.0,
                delta: 0.5,
                h: 0.0,
                n_chi: 1,
                ansatz_depth: 0,
                learning_rate: 0.05,
                iterations: 300,
                sweeps: 6,
                seed: 1,
                repeats: 2,
                solver: "exact".into(),
            },
            outcomes: vec![
                RepeatOutcome {
                    repeat: 0,
                    seed: 1,
                    value: -4.0,
                    oracle_energy: Some(-4.1),
                    wallclock_ms: 3,
                    details: vec![],
                },
                RepeatOutcome {
                    repeat: 1,
                    seed: 2,
                    value: -4.05,
                    oracle_energy: Some(-4.1),
                    wallclock_ms: 4,
                    details: vec![],
                },
            ],
            summary: Summary::of(&[-4.0, -4.05]),
            total_wallclock_ms: 7,
        }
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let dir = std::env::temp_dir().join("vqmps_record_test.json");
        r.write_json(&dir).unwrap();
        let back = ResultRecord::load(&dir).unwrap();
        assert_eq!(serde_json::to_string(&r).unwrap(), serde_json::to_string(&back).unwrap());
        std::fs::remove_file(&dir).ok();
    }

    #[test]
    fn csv_has_fixed_columns() {
        let r = sample();
        let path = std::env::temp_dir().join("vqmps_record_test.csv");
        r.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "experiment,N,J,delta,h,n_chi,seed,repeat,energy_or_fidelity,oracle_energy,wallclock_ms"
        );
        assert_eq!(lines.count(), 2);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn summary_stats() {
        let s = Summary::of(&[1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.min, 1.0);
        assert_eq!(s.max, 3.0);
    }
}
