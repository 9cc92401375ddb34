use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use crate::model::BodyParams;

/// One number or a list of numbers in the config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

/// File form of [`ExperimentConfig`]; every key is optional and falls back
/// to the reference vehicle and the small-perturbation setup.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(rename = "I1")]
    i1: Option<f64>,
    #[serde(rename = "I3")]
    i3: Option<f64>,
    #[serde(rename = "M1")]
    m1: Option<f64>,
    #[serde(rename = "M3")]
    m3: Option<f64>,
    m: Option<f64>,
    l: Option<f64>,
    g: Option<f64>,
    #[serde(rename = "Se")]
    se: Option<f64>,
    #[serde(rename = "Pe")]
    pe: Option<f64>,
    #[serde(rename = "Pe_min")]
    pe_min: Option<f64>,
    #[serde(rename = "Pe_max")]
    pe_max: Option<f64>,
    #[serde(rename = "Pe_count")]
    pe_count: Option<usize>,
    eps: Option<OneOrMany>,
    q1_0: Option<f64>,
    nua1_0: Option<f64>,
    series: Option<Vec<f64>>,
    periods: Option<f64>,
    dt_per_period: Option<f64>,
    dt: Option<f64>,
    seed: Option<u64>,
}

/// How the time step is chosen for a run at a given `Pe`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StepPolicy {
    Fixed(f64),
    PerPeriod(f64),
}

impl StepPolicy {
    pub fn dt(&self, period: f64) -> f64 {
        match *self {
            StepPolicy::Fixed(dt) => dt,
            StepPolicy::PerPeriod(n) => period / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub body: BodyParams,
    pub se: f64,
    /// Momentum for single-point commands.
    pub pe: f64,
    /// Momenta for sweeps and continuation, ascending.
    pub pe_grid: Vec<f64>,
    pub eps: Vec<f64>,
    pub q1_0: f64,
    pub nua1_0: f64,
    /// Divisors applied to both initial perturbations, one run each.
    pub series: Vec<f64>,
    pub periods: f64,
    /// Step policy when the command does not impose one.
    pub step: Option<StepPolicy>,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::from_raw(RawConfig::default()).expect("defaults are valid")
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let raw: RawConfig = toml::from_str(text).context("parsing experiment config")?;
        Self::from_raw(raw)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    fn from_raw(raw: RawConfig) -> anyhow::Result<Self> {
        let reference = BodyParams::default();
        let body = BodyParams {
            i1: raw.i1.unwrap_or(reference.i1),
            i3: raw.i3.unwrap_or(reference.i3),
            m1: raw.m1.unwrap_or(reference.m1),
            m3: raw.m3.unwrap_or(reference.m3),
            mass: raw.m.unwrap_or(reference.mass),
            l: raw.l.unwrap_or(reference.l),
            g: raw.g.unwrap_or(reference.g),
        };
        let pe = raw.pe.unwrap_or(1.5);
        let pe_grid = match (raw.pe_min, raw.pe_max, raw.pe_count) {
            (None, None, None) => vec![pe],
            (Some(lo), Some(hi), Some(n)) => {
                if n == 0 || !(lo <= hi) {
                    bail!("Pe grid needs Pe_min <= Pe_max and Pe_count >= 1");
                }
                linspace(lo, hi, n)
            }
            _ => bail!("Pe_min, Pe_max and Pe_count must be given together"),
        };
        let step = match (raw.dt, raw.dt_per_period) {
            (Some(_), Some(_)) => bail!("give at most one of dt and dt_per_period"),
            (Some(dt), None) => Some(StepPolicy::Fixed(dt)),
            (None, Some(n)) => Some(StepPolicy::PerPeriod(n)),
            (None, None) => None,
        };
        let cfg = Self {
            body,
            se: raw.se.unwrap_or(6.0),
            pe,
            pe_grid,
            eps: raw.eps.map(OneOrMany::into_vec).unwrap_or_else(|| vec![0.05]),
            q1_0: raw.q1_0.unwrap_or(0.0125),
            nua1_0: raw.nua1_0.unwrap_or(0.0025),
            series: raw.series.unwrap_or_else(|| vec![1.0]),
            periods: raw.periods.unwrap_or(1e4),
            step,
            seed: raw.seed.unwrap_or(0),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.body.validate()?;
        if self.pe_grid.is_empty() || self.eps.is_empty() || self.series.is_empty() {
            bail!("Pe grid, eps list and series must be nonempty");
        }
        if self.eps.iter().any(|e| !(*e >= 0.0)) {
            bail!("eps values must be nonnegative");
        }
        if self.series.iter().any(|k| !(*k > 0.0)) {
            bail!("series divisors must be positive");
        }
        if !(self.periods > 0.0) {
            bail!("run length must be positive");
        }
        if !self.se.is_finite() || !self.pe.is_finite() || self.pe_grid.iter().any(|p| !p.is_finite()) {
            bail!("Se and Pe must be finite");
        }
        match self.step {
            Some(StepPolicy::Fixed(dt)) if !(dt > 0.0) => bail!("dt must be positive"),
            Some(StepPolicy::PerPeriod(n)) if !(n > 0.0) => bail!("dt_per_period must be positive"),
            _ => Ok(()),
        }
    }
}

/// Named parameter sets reproducing the published experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    PaperFig1Top,
    PaperFig1Bottom,
    PaperFig2,
    PaperTable1,
}

impl Preset {
    pub fn config(self) -> ExperimentConfig {
        let base = ExperimentConfig::default();
        let sqrt2 = std::f64::consts::SQRT_2;
        match self {
            Preset::PaperFig1Top => ExperimentConfig {
                pe: 1.5,
                pe_grid: vec![1.5],
                eps: vec![0.05],
                q1_0: 0.05,
                nua1_0: 0.01,
                series: vec![1.0, 1.5, 2.0, 3.0, 4.0],
                periods: 3e5,
                step: Some(StepPolicy::Fixed(0.04453)),
                ..base
            },
            Preset::PaperFig1Bottom => ExperimentConfig {
                pe: 0.5,
                pe_grid: vec![0.5],
                eps: vec![0.1],
                q1_0: 0.05,
                nua1_0: 0.01,
                series: [1, 2, 3, 6, 10].iter().map(|&n| sqrt2.powi(n)).collect(),
                periods: 1.2e6,
                step: Some(StepPolicy::Fixed(0.04453)),
                ..base
            },
            Preset::PaperFig2 => ExperimentConfig {
                pe_grid: linspace(0.02, 2.2, 110),
                eps: vec![0.0, 0.05],
                periods: 1.2e6,
                step: Some(StepPolicy::PerPeriod(40.0)),
                ..base
            },
            Preset::PaperTable1 => base,
        }
    }
}
