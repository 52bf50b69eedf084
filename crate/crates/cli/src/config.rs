//! Run configuration: a TOML file with `[model]`, `[run]`, `[grid]`,
//! `[sweep]` and `[output]` sections, overridden by command-line flags.
//!
//! ```toml
//! [model]
//! n_sites = 14
//! mass_ratio = 10.0   # m/g
//! penalty = 100.0     # lambda
//! # x = 0.2178        # or volume = 30.0; default x = (N/30)^2
//!
//! [run]
//! dt = 0.2
//! shots = 1000
//! seed = 0
//! p_min = 0.0
//! threshold = 0.01    # c
//! patience = 3
//! max_steps = 60
//! reference = "alternating-10"
//! stopping = "per-l0"
//! noise = { bitflip_prob = 0.0 }
//!
//! [grid]
//! start = 0.0
//! stop = 2.0
//! count = 41
//!
//! [sweep]
//! sizes = [8, 10, 12, 14, 16]
//! seeds = [0]
//! refine_rounds = 3
//! method = "exact"
//!
//! [output]
//! dir = "out"
//! formats = ["csv", "json", "svg"]
//! ```

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use skqd::experiments::{GridSpec, DEFAULT_REFINE_ROUNDS, SCHEMA_VERSION};
use skqd::hamiltonian::ModelConfig;
use skqd::krylov::StoppingMode;
use skqd::{Error, ReferenceState, Result, SkqdConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Skqd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Stopping {
    PerL0,
    Shared,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

/// Multi-size commands (`scan-fit`, `table1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub refine_rounds: usize,
    pub method: Method,
}

impl SweepConfig {
    pub fn method_name(&self) -> &'static str {
        match self.method {
            Method::Exact => "exact",
            Method::Skqd => "skqd",
        }
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            sizes: vec![8, 10, 12, 14, 16],
            seeds: Vec::new(),
            refine_rounds: DEFAULT_REFINE_ROUNDS,
            method: Method::Exact,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub schema: String,
    pub model: ModelConfig,
    #[serde(default)]
    pub run: SkqdConfig,
    /// Background-field grid; each command has its own default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA_VERSION.to_string(),
            model: ModelConfig {
                n_sites: 4,
                x: None,
                volume: None,
                mass_ratio: 10.0,
                l0: 0.0,
                penalty: skqd::hamiltonian::DEFAULT_PENALTY,
            },
            run: SkqdConfig::default(),
            grid: None,
            sweep: SweepConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::InvalidParams(format!("{}: {}", path.display(), e.message())))?;
        if cfg.schema.is_empty() {
            cfg.schema = SCHEMA_VERSION.to_string();
        } else if cfg.schema != SCHEMA_VERSION {
            return Err(Error::InvalidParams(format!(
                "{}: schema {:?} is not {SCHEMA_VERSION:?}",
                path.display(),
                cfg.schema
            )));
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.model.params()?;
        self.run.validate()?;
        if let Some(g) = &self.grid {
            g.points()?;
        }
        Ok(())
    }

    /// Grid points, fixing `default` into the config when none was given.
    pub fn grid_points(&mut self, default: GridSpec) -> Result<Vec<f64>> {
        self.grid.get_or_insert(default).points()
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }
}

/// Flags that override the config file.
#[derive(Args, Clone, Debug, Default)]
pub struct Overrides {
    /// TOML run configuration
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n_sites: Option<usize>,
    /// Hopping coupling x; default (N/30)^2
    #[arg(long)]
    pub x: Option<f64>,
    /// Fixed N/sqrt(x)
    #[arg(long)]
    pub volume: Option<f64>,
    /// m/g
    #[arg(long)]
    pub mass_ratio: Option<f64>,
    /// Charge penalty lambda
    #[arg(long)]
    pub penalty: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub p_min: Option<f64>,
    /// Relative improvement c for accepting a step
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// alternating-10, mass-ground or an explicit bitstring
    #[arg(long)]
    pub reference: Option<ReferenceState>,
    /// Per-qubit readout flip probability
    #[arg(long)]
    pub bitflip: Option<f64>,
    #[arg(long, value_enum)]
    pub stopping: Option<Stopping>,
    /// start:stop:count
    #[arg(long, value_name = "GRID")]
    pub l0_grid: Option<GridSpec>,
    /// Comma-separated system sizes
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Comma-separated seeds
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub refine_rounds: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Comma-separated output formats
    #[arg(long, value_enum, value_delimiter = ',')]
    pub format: Option<Vec<Format>>,
}

impl Overrides {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let m = &mut cfg.model;
        if let Some(n) = self.n_sites {
            m.n_sites = n;
        }
        if let Some(x) = self.x {
            m.x = Some(x);
            m.volume = None;
        }
        if let Some(v) = self.volume {
            m.volume = Some(v);
            m.x = None;
        }
        if let Some(v) = self.mass_ratio {
            m.mass_ratio = v;
        }
        if let Some(v) = self.penalty {
            m.penalty = v;
        }
        let r = &mut cfg.run;
        if let Some(v) = self.dt {
            r.dt = v;
        }
        if let Some(v) = self.shots {
            r.shots = v;
        }
        if let Some(v) = self.seed {
            r.seed = v;
        }
        if let Some(v) = self.p_min {
            r.p_min = v;
        }
        if let Some(v) = self.threshold {
            r.threshold = v;
        }
        if let Some(v) = self.patience {
            r.patience = v;
        }
        if let Some(v) = self.max_steps {
            r.max_steps = v;
        }
        if let Some(v) = self.reference {
            r.reference = v;
        }
        if let Some(v) = self.bitflip {
            r.noise.bitflip_prob = v;
        }
        if let Some(v) = self.stopping {
            r.stopping = match v {
                Stopping::PerL0 => StoppingMode::PerL0,
                Stopping::Shared => StoppingMode::Shared,
            };
        }
        if let Some(g) = self.l0_grid {
            cfg.grid = Some(g);
        }
        if let Some(v) = &self.sizes {
            cfg.sweep.sizes = v.clone();
        }
        if let Some(v) = &self.seeds {
            cfg.sweep.seeds = v.clone();
        }
        if let Some(v) = self.refine_rounds {
            cfg.sweep.refine_rounds = v;
        }
        if let Some(v) = self.method {
            cfg.sweep.method = v;
        }
        if let Some(d) = &self.out_dir {
            cfg.output.dir = d.clone();
        }
        if let Some(f) = &self.format {
            let mut f = f.clone();
            f.sort();
            f.dedup();
            cfg.output.formats = f;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
