//! TOML experiment descriptions.
//!
//! A config picks one experiment kind, a sweep axis, and the cell / threshold
//! / deployment-case parameters. Every field has a default mirroring the
//! reference parameter table, so `{ experiment = "ra_success" }` is already a
//! complete description. Unknown keys are rejected rather than ignored so a
//! typo cannot silently fall back to a default.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use tagged_ra_core::detector::DetectionThresholds;

/// Which quantity the experiment sweeps and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Preamble/timing detection probability versus SNR (link level).
    PhyDetection,
    /// Random-access success probability versus load (MAC level).
    RaSuccess,
    /// Uplink-grant collision probability versus load (MAC level).
    PuschCollision,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            ExperimentKind::PhyDetection => "phy_detection",
            ExperimentKind::RaSuccess => "ra_success",
            ExperimentKind::PuschCollision => "pusch_collision",
        };
        f.write_str(label)
    }
}

/// Sweep axes. PHY experiments walk `snr_db`; MAC experiments walk `m`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// SNR grid in dB for `phy_detection`.
    pub snr_db: Vec<f64>,
    /// Contending-node counts for `ra_success` / `pusch_collision`.
    pub m: Vec<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            snr_db: vec![-20.0, -18.0, -16.0, -14.0, -12.0, -10.0],
            m: (1..=20).collect(),
        }
    }
}

/// Cell-wide radio parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CellSection {
    /// Sequence length; `phy_detection` supports 839 and the scaled 139.
    pub n_zc: usize,
    /// Number of preamble windows on the shared access root.
    pub n_pa: usize,
}

impl Default for CellSection {
    fn default() -> Self {
        CellSection { n_zc: 839, n_pa: 20 }
    }
}

/// Detection thresholds in dB relative to the mean noise power.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdSection {
    pub pa_db: f64,
    pub tag_db: f64,
}

impl Default for ThresholdSection {
    fn default() -> Self {
        ThresholdSection { pa_db: -16.0, tag_db: -16.0 }
    }
}

impl ThresholdSection {
    pub fn to_thresholds(&self) -> DetectionThresholds {
        DetectionThresholds { gamma_pa_db: self.pa_db, gamma_tag_db: self.tag_db }
    }
}

/// One deployment case: cell radius plus the tag/zone split sized for it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    /// Cell radius in km; only the ratio to the zone count matters.
    pub r_km: f64,
    /// Tag alphabet size.
    pub n_tag: usize,
    /// Number of timing-advance zones.
    pub n_ta: usize,
}

impl CaseConfig {
    /// Label used in the CSV `case` column, e.g. `R0.8`.
    pub fn label(&self) -> String {
        format!("R{}", self.r_km)
    }
}

fn default_trials() -> u64 {
    100_000
}

fn default_seed() -> u64 {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from("results.csv")
}

fn default_cases() -> Vec<CaseConfig> {
    vec![
        CaseConfig { r_km: 0.8, n_tag: 71, n_ta: 10 },
        CaseConfig { r_km: 1.6, n_tag: 51, n_ta: 20 },
        CaseConfig { r_km: 2.4, n_tag: 38, n_ta: 30 },
    ]
}

/// A full experiment description as parsed from TOML.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub cell: CellSection,
    #[serde(default)]
    pub thresholds: ThresholdSection,
    #[serde(default = "default_cases", rename = "case")]
    pub cases: Vec<CaseConfig>,
}

impl ExperimentConfig {
    /// The built-in defaults for a given experiment kind.
    ///
    /// MAC sweeps default to 100k trials; the link-level sweep defaults to
    /// 10k per point since each trial synthesizes and correlates a full
    /// sequence.
    pub fn default_for(kind: ExperimentKind) -> ExperimentConfig {
        let mut cfg = ExperimentConfig {
            experiment: kind,
            trials: default_trials(),
            seed: default_seed(),
            out: default_out(),
            sweep: SweepConfig::default(),
            cell: CellSection::default(),
            thresholds: ThresholdSection::default(),
            cases: default_cases(),
        };
        if kind == ExperimentKind::PhyDetection {
            cfg.trials = 10_000;
        }
        cfg
    }

    /// Parse and validate a TOML string.
    pub fn from_toml(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig =
            toml::from_str(text).context("failed to parse experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load a config from a file path.
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        ExperimentConfig::from_toml(&text)
            .with_context(|| format!("invalid config in {}", path.display()))
    }

    /// Serialize back to TOML (used by the `table1` subcommand).
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).context("failed to serialize config")
    }

    /// Check cross-field invariants, naming the offending field in errors.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            bail!("trials: must be at least 1");
        }
        if self.cell.n_pa == 0 {
            bail!("cell.n_pa: must be at least 1");
        }
        match self.experiment {
            ExperimentKind::PhyDetection => {
                if self.sweep.snr_db.is_empty() {
                    bail!("sweep.snr_db: phy_detection needs at least one SNR point");
                }
                for (i, snr) in self.sweep.snr_db.iter().enumerate() {
                    if !snr.is_finite() {
                        bail!("sweep.snr_db[{i}]: must be finite, got {snr}");
                    }
                }
                // The link-level sweep uses a fixed reference population, so
                // only the two sequence lengths it is laid out for are valid.
                crate::experiment::phy_layout(self.cell.n_zc, self.cell.n_pa)?;
            }
            ExperimentKind::RaSuccess | ExperimentKind::PuschCollision => {
                if self.sweep.m.is_empty() {
                    bail!("sweep.m: load sweeps need at least one node count");
                }
                for (i, &m) in self.sweep.m.iter().enumerate() {
                    if m == 0 {
                        bail!("sweep.m[{i}]: node count must be at least 1");
                    }
                }
                if self.cases.is_empty() {
                    bail!("case: load sweeps need at least one deployment case");
                }
                for (i, case) in self.cases.iter().enumerate() {
                    if !(case.r_km.is_finite() && case.r_km > 0.0) {
                        bail!("case[{i}].r_km: radius must be positive, got {}", case.r_km);
                    }
                    if case.n_tag == 0 {
                        bail!("case[{i}].n_tag: must be at least 1");
                    }
                    if case.n_ta == 0 {
                        bail!("case[{i}].n_ta: must be at least 1");
                    }
                }
            }
        }
        Ok(())
    }
}
