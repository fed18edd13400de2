//! Experiment and synthesis configuration files (TOML).

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::embedding::{EmbeddingOptions, Method, System};
use crate::error::{Error, Result};
use crate::graph::{parse_graph, SlotSpec};
use crate::inclusion::{Center, Ordering, Side};
use crate::integrate::{Integrator, RolloutSettings};
use crate::interval::{Interval, IntervalTensor};
use crate::neural::AlphaRule;
use crate::synth::{ObjectiveWeights, OptimizerSettings, SynthesisProblem};
use crate::systems::{self, PendulumParams, VEHICLE_LR};

/// Axis-aligned box given by its corners.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxSpec {
    pub fn centered(center: &[f64], pert: &[f64]) -> Self {
        BoxSpec {
            lower: center.iter().zip(pert).map(|(c, p)| c - p).collect(),
            upper: center.iter().zip(pert).map(|(c, p)| c + p).collect(),
        }
    }

    pub fn thin(point: &[f64]) -> Self {
        BoxSpec { lower: point.to_vec(), upper: point.to_vec() }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn to_tensor(&self) -> Result<IntervalTensor> {
        IntervalTensor::vector(&self.lower, &self.upper)
    }

    pub fn intervals(&self) -> Result<Vec<Interval>> {
        Ok(self.to_tensor()?.into_data())
    }
}

fn default_lr() -> f64 {
    VEHICLE_LR
}

/// Dynamics to analyze.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    Vehicle {
        #[serde(default = "default_lr")]
        lr: f64,
    },
    Pendulum {
        #[serde(default)]
        params: PendulumParams,
    },
    DoubleIntegrator,
    /// Text form of the vector field over slots `t` (optional), `x`, `u`, `w`,
    /// one output expression per state, separated by `;`.
    Expression {
        source: String,
        x: usize,
        #[serde(default)]
        u: usize,
        #[serde(default)]
        w: usize,
        #[serde(default)]
        time: bool,
    },
}

impl SystemSpec {
    pub fn build(&self) -> Result<System> {
        match self {
            SystemSpec::Vehicle { lr } => systems::vehicle(*lr),
            SystemSpec::Pendulum { params } => systems::pendulum(*params),
            SystemSpec::DoubleIntegrator => systems::double_integrator(),
            SystemSpec::Expression { source, x, u, w, time } => {
                let mut slots = Vec::new();
                if *time {
                    slots.push(SlotSpec::new("t", 1));
                }
                slots.push(SlotSpec::new("x", *x));
                for (name, len) in [("u", *u), ("w", *w)] {
                    if len > 0 {
                        slots.push(SlotSpec::new(name, len));
                    }
                }
                System::new(parse_graph(source, slots)?)
            }
        }
    }
}

/// Inclusion function used for the embedding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InclusionSpec {
    pub method: Method,
    pub centers: Vec<Center>,
    pub orderings: Vec<Ordering>,
    /// Corner of the closed-loop neural inclusion (lower corner if absent).
    pub corner: Option<Vec<Side>>,
    pub alpha: AlphaRule,
}

impl Default for InclusionSpec {
    fn default() -> Self {
        InclusionSpec {
            method: Method::Mjac,
            centers: Vec::new(),
            orderings: Vec::new(),
            corner: None,
            alpha: AlphaRule::Auto,
        }
    }
}

impl InclusionSpec {
    pub fn embedding_options(&self) -> EmbeddingOptions {
        EmbeddingOptions { centers: self.centers.clone(), orderings: self.orderings.clone() }
    }
}

/// Control input of the analyzed system.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControllerSpec {
    /// Zero input (or no input slot at all).
    #[default]
    None,
    /// Any input in a constant box.
    Interval { lower: Vec<f64>, upper: Vec<f64> },
    /// `u = K x + u_ff(t)`; `feedforward[k]` holds on `[t0 + k·dt, t0 + (k+1)·dt)`
    /// and the last entry is held afterwards.
    Linear {
        gain: Vec<Vec<f64>>,
        #[serde(default)]
        feedforward: Vec<Vec<f64>>,
    },
    /// ReLU network `u = NN(x)` loaded from a JSON or TOML weights file.
    Network { path: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown output format `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloSpec {
    /// Sampled trajectories per partition cell.
    pub samples: usize,
    /// Tsit5 substeps per output step.
    pub substeps: usize,
    pub tolerance: f64,
}

impl Default for MonteCarloSpec {
    fn default() -> Self {
        MonteCarloSpec { samples: 100, substeps: 4, tolerance: 1e-9 }
    }
}

/// Grid of runs for `bench`: every combination is timed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkSpec {
    /// Divisions per axis; `k` means `kⁿ` cells.
    pub divisions: Vec<usize>,
    pub integrators: Vec<Integrator>,
    /// Worker counts; empty means the run's worker count.
    pub workers: Vec<usize>,
    pub repetitions: usize,
    pub warmup: usize,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        BenchmarkSpec {
            divisions: vec![1, 2, 3, 4, 5, 6],
            integrators: vec![Integrator::Euler, Integrator::Tsit5],
            workers: Vec::new(),
            repetitions: 10,
            warmup: 1,
        }
    }
}

fn default_format() -> OutputFormat {
    OutputFormat::Csv
}

/// A reachability run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSpec,
    #[serde(default)]
    pub inclusion: InclusionSpec,
    pub initial: BoxSpec,
    /// Disturbance box; zero when absent.
    #[serde(default)]
    pub disturbance: Option<BoxSpec>,
    #[serde(default)]
    pub controller: ControllerSpec,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default)]
    pub t0: f64,
    pub dt: f64,
    pub horizon: f64,
    /// Divisions per axis of the initial box; one cell when absent.
    #[serde(default)]
    pub partitions: Option<Vec<usize>>,
    #[serde(default = "default_format")]
    pub format: OutputFormat,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub monte_carlo: MonteCarloSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub benchmark: Option<BenchmarkSpec>,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(s).map_err(|e| Error::Config(e.message().to_string()))?;
        Ok(cfg)
    }

    /// Reads a config file. Relative network paths are resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let ControllerSpec::Network { path: p } = &mut cfg.controller {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn rollout_settings(&self) -> RolloutSettings {
        RolloutSettings { integrator: self.integrator, t0: self.t0, t_end: self.t0 + self.horizon, dt: self.dt }
    }

    pub fn divisions(&self) -> Vec<usize> {
        self.partitions.clone().unwrap_or_else(|| vec![1; self.initial.len()])
    }

    /// Checks the invariants that do not need the system to be built, then
    /// the dimensions against `sys`.
    pub fn validate(&self, sys: &System) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Config(format!("horizon must be positive, got {}", self.horizon)));
        }
        let n = sys.xlen();
        let dim = |what: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} has {got} entries, expected {want}")))
            }
        };
        dim("initial.lower", self.initial.lower.len(), n)?;
        dim("initial.upper", self.initial.upper.len(), n)?;
        self.initial.to_tensor().map_err(|e| Error::Config(format!("initial box: {e}")))?;
        if let Some(w) = &self.disturbance {
            dim("disturbance.lower", w.lower.len(), sys.wlen())?;
            dim("disturbance.upper", w.upper.len(), sys.wlen())?;
            w.to_tensor().map_err(|e| Error::Config(format!("disturbance box: {e}")))?;
        }
        if let Some(p) = &self.partitions {
            dim("partitions", p.len(), n)?;
            if p.contains(&0) {
                return Err(Error::Config("partition counts must be positive".into()));
            }
        }
        match &self.controller {
            ControllerSpec::None => {}
            ControllerSpec::Interval { lower, upper } => {
                dim("controller.lower", lower.len(), sys.ulen())?;
                dim("controller.upper", upper.len(), sys.ulen())?;
            }
            ControllerSpec::Linear { gain, feedforward } => {
                dim("controller.gain", gain.len(), sys.ulen())?;
                for row in gain {
                    dim("controller.gain row", row.len(), n)?;
                }
                for row in feedforward {
                    dim("controller.feedforward row", row.len(), sys.ulen())?;
                }
            }
            ControllerSpec::Network { .. } => {
                if sys.ulen() == 0 {
                    return Err(Error::Config("a network controller needs a `u` slot".into()));
                }
            }
        }
        if self.monte_carlo.substeps == 0 {
            return Err(Error::Config("monte_carlo.substeps must be positive".into()));
        }
        Ok(())
    }

    /// Disturbance intervals (thin zeros when none were given).
    pub fn disturbance_intervals(&self, sys: &System) -> Result<Vec<Interval>> {
        match &self.disturbance {
            Some(w) => w.intervals(),
            None => Ok(vec![Interval::point(0.0); sys.wlen()]),
        }
    }
}

fn default_steps() -> usize {
    60
}

fn default_dt() -> f64 {
    0.05
}

fn default_n_e() -> usize {
    40
}

fn default_x0() -> Vec<f64> {
    vec![0.0, 0.0]
}

fn default_terminal() -> BoxSpec {
    BoxSpec::centered(&[PI, 0.0], &[10.0 * PI / 360.0, 0.1])
}

fn default_disturbance() -> BoxSpec {
    BoxSpec::centered(&[0.0], &[0.02])
}

fn default_samples() -> usize {
    500
}

/// Starting point of the optimizer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialGuess {
    /// Constant feedforward, used when `schedule` is empty.
    pub feedforward: f64,
    pub schedule: Vec<f64>,
    /// Row-major gain.
    pub gain: Vec<f64>,
}

impl Default for InitialGuess {
    fn default() -> Self {
        InitialGuess { feedforward: 0.1, schedule: Vec::new(), gain: vec![0.0, 0.0] }
    }
}

/// Robust pendulum swing-up synthesis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisConfig {
    #[serde(default)]
    pub pendulum: PendulumParams,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// First constrained step.
    #[serde(default = "default_n_e")]
    pub n_e: usize,
    #[serde(default = "default_x0")]
    pub x0: Vec<f64>,
    #[serde(default = "default_terminal")]
    pub terminal: BoxSpec,
    #[serde(default = "default_disturbance")]
    pub disturbance: BoxSpec,
    #[serde(default)]
    pub weights: ObjectiveWeights,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
    #[serde(default)]
    pub initial_guess: InitialGuess,
    /// Monte Carlo rollouts in the certificate.
    #[serde(default = "default_samples")]
    pub certificate_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        toml::from_str("").expect("every field has a default")
    }
}

impl SynthesisConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn problem(&self) -> Result<SynthesisProblem> {
        let terminal =
            self.terminal.intervals().map_err(|e| Error::Config(format!("terminal box: {e}")))?;
        let w = self
            .disturbance
            .intervals()
            .map_err(|e| Error::Config(format!("disturbance box: {e}")))?;
        let sys = systems::pendulum(self.pendulum)?;
        Ok(SynthesisProblem::new(sys, self.steps, self.dt, self.n_e, self.x0.clone(), terminal, w)?
            .with_weights(self.weights))
    }

    /// Initial decision vector `(u_ff, K)`.
    pub fn initial_decision(&self, pb: &SynthesisProblem) -> Result<Vec<f64>> {
        let ig = &self.initial_guess;
        let (nu, nk) = (pb.n_steps * pb.system().ulen(), pb.system().ulen() * pb.system().xlen());
        let mut z = if ig.schedule.is_empty() { vec![ig.feedforward; nu] } else { ig.schedule.clone() };
        if z.len() != nu || ig.gain.len() != nk {
            return Err(Error::Config(format!(
                "initial guess needs {nu} feedforward values and {nk} gains, got {} and {}",
                z.len(),
                ig.gain.len()
            )));
        }
        z.extend_from_slice(&ig.gain);
        Ok(z)
    }
}
