//! Config-driven runs: reachability with Monte Carlo checks, runtime
//! benchmarks and pendulum synthesis, plus their CSV/JSON writers.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::{
    BenchmarkSpec, BoxSpec, ControllerSpec, ExperimentConfig, OutputFormat, SynthesisConfig,
};
use crate::embedding::{ifemb, make_embedding, ControlInput, EmbeddingSystem, System};
use crate::error::{Error, Result};
use crate::integrate::{Integrator, RolloutSettings, Trajectory};
use crate::interval::{Interval, IntervalTensor};
use crate::montecarlo::{check_containment, ContainmentReport, SampleOptions};
use crate::neural::{clnn_inclusion, NeuralNetwork};
use crate::partition::{grid_partition, run_partitions, PartitionGrid};
use crate::synth::{Certificate, SynthRollout, SynthesisOutcome};

type BoxedPolicy = Box<dyn Fn(f64, &[f64]) -> Result<Vec<f64>> + Send + Sync>;

/// Everything needed to roll out embeddings and sample the true system.
pub struct Setup {
    pub system: System,
    pub embedding: EmbeddingSystem,
    pub control: ControlInput,
    pub disturbance: Vec<Interval>,
    /// Control law used by the sampled trajectories.
    pub policy: BoxedPolicy,
}

fn schedule_index(t: f64, t0: f64, dt: f64, len: usize) -> usize {
    let k = ((t - t0) / dt + 1e-9).floor().max(0.0) as usize;
    k.min(len.saturating_sub(1))
}

/// Builds the system, embedding and control input described by `cfg`.
pub fn build_setup(cfg: &ExperimentConfig) -> Result<Setup> {
    let sys = cfg.system.build()?;
    cfg.validate(&sys)?;
    let disturbance = cfg.disturbance_intervals(&sys)?;
    let p = sys.ulen();
    let (embedding, control, policy): (EmbeddingSystem, ControlInput, BoxedPolicy) =
        match &cfg.controller {
            ControllerSpec::Network { path } => {
                let net = Arc::new(NeuralNetwork::load(path)?);
                let ordering = cfg.inclusion.orderings.first().cloned();
                let incl = clnn_inclusion(&sys, net.clone(), cfg.inclusion.corner.clone(), ordering)?
                    .with_alpha(cfg.inclusion.alpha);
                let emb = ifemb::<f64>(&sys, Arc::new(incl))?;
                (emb, ControlInput::None, Box::new(move |_, x: &[f64]| net.forward(x)))
            }
            other => {
                let emb = make_embedding(&sys, cfg.inclusion.method, &cfg.inclusion.embedding_options())?;
                let (control, policy): (ControlInput, BoxedPolicy) = match other {
                    ControllerSpec::None => {
                        let ctl = if p == 0 {
                            ControlInput::None
                        } else {
                            ControlInput::Interval(vec![Interval::point(0.0); p])
                        };
                        (ctl, Box::new(move |_, _: &[f64]| Ok(vec![0.0; p])))
                    }
                    ControllerSpec::Interval { lower, upper } => {
                        let b = IntervalTensor::vector(lower, upper)?;
                        // Samples use the midpoint input.
                        let mid = b.midpoint();
                        (ControlInput::Interval(b.into_data()), Box::new(move |_, _: &[f64]| Ok(mid.clone())))
                    }
                    ControllerSpec::Linear { gain, feedforward } => {
                        let (t0, dt) = (cfg.t0, cfg.dt);
                        let ff = Arc::new(if feedforward.is_empty() { vec![vec![0.0; p]] } else { feedforward.clone() });
                        let k = Arc::new(gain.clone());
                        let (ff2, k2) = (ff.clone(), k.clone());
                        let ctl = ControlInput::Feedback(Arc::new(move |t, x: &[Interval]| {
                            let u = &ff2[schedule_index(t, t0, dt, ff2.len())];
                            Ok(k2
                                .iter()
                                .zip(u)
                                .map(|(row, &uj)| {
                                    row.iter().zip(x).fold(Interval::point(uj), |acc, (&kj, xi)| acc + xi.scale(kj))
                                })
                                .collect())
                        }));
                        let pol: BoxedPolicy = Box::new(move |t, x: &[f64]| {
                            let u = &ff[schedule_index(t, t0, dt, ff.len())];
                            Ok(k.iter()
                                .zip(u)
                                .map(|(row, &uj)| uj + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
                                .collect())
                        });
                        (ctl, pol)
                    }
                    ControllerSpec::Network { .. } => unreachable!("handled above"),
                };
                (emb, control, policy)
            }
        };
    Ok(Setup { system: sys, embedding, control, disturbance, policy })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub cell: usize,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReachSummary {
    pub cells: usize,
    pub workers: usize,
    pub integrator: Integrator,
    pub dt: f64,
    pub horizon: f64,
    pub rollout_seconds: f64,
    pub monte_carlo_seconds: f64,
    pub failed_cells: Vec<CellFailure>,
    /// Hull of the final boxes of all successful cells.
    pub final_hull: Option<BoxSpec>,
    pub containment: ContainmentReport,
}

impl ReachSummary {
    pub fn passed(&self) -> bool {
        self.failed_cells.is_empty() && self.containment.passed()
    }
}

pub struct ReachOutcome {
    pub grid: PartitionGrid,
    pub trajectories: Vec<Result<Trajectory>>,
    pub summary: ReachSummary,
}

/// Seed of the Monte Carlo stream family used for cell `cell`.
fn cell_seed(seed: u64, cell: usize) -> u64 {
    seed ^ (cell as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Partitions the initial box, rolls out every cell on `workers` threads and,
/// when `monte_carlo` is set, checks sampled trajectories against each cell.
pub fn run_reach(cfg: &ExperimentConfig, workers: usize, monte_carlo: bool) -> Result<ReachOutcome> {
    let setup = build_setup(cfg)?;
    let settings = cfg.rollout_settings();
    let grid = grid_partition(&cfg.initial.to_tensor()?, &cfg.divisions())?;
    let start = Instant::now();
    let trajectories =
        run_partitions(&setup.embedding, &grid, &setup.disturbance, &setup.control, &settings, workers);
    let rollout_seconds = start.elapsed().as_secs_f64();
    let mut failed_cells = Vec::new();
    let mut hull: Option<IntervalTensor> = None;
    for (cell, tr) in trajectories.iter().enumerate() {
        match tr {
            Ok(tr) => {
                let last = IntervalTensor::ut2i(tr.last())?;
                hull = Some(match hull {
                    None => last,
                    Some(h) => h.hull(&last)?,
                });
            }
            Err(e) => failed_cells.push(CellFailure { cell, error: e.to_string() }),
        }
    }
    let start = Instant::now();
    let mut containment = ContainmentReport::default();
    if monte_carlo && cfg.monte_carlo.samples > 0 {
        let opts = SampleOptions { substeps: cfg.monte_carlo.substeps, tolerance: cfg.monte_carlo.tolerance };
        for (cell, tr) in trajectories.iter().enumerate() {
            let Ok(tr) = tr else { continue };
            let rep = check_containment(
                &setup.system,
                Some(&*setup.policy),
                &grid.cells[cell],
                &setup.disturbance,
                tr,
                cfg.monte_carlo.samples,
                cell_seed(cfg.seed, cell),
                opts,
                workers,
            )?;
            containment.merge(&rep);
        }
    }
    let monte_carlo_seconds = start.elapsed().as_secs_f64();
    let summary = ReachSummary {
        cells: grid.cells.len(),
        workers,
        integrator: cfg.integrator,
        dt: cfg.dt,
        horizon: cfg.horizon,
        rollout_seconds,
        monte_carlo_seconds,
        failed_cells,
        final_hull: hull.map(|h| BoxSpec { lower: h.lower(), upper: h.upper() }),
        containment,
    };
    Ok(ReachOutcome { grid, trajectories, summary })
}

/// CSV with columns `t, xl_1..xl_n, xu_1..xu_n`.
pub fn trajectory_csv(tr: &Trajectory) -> String {
    let n = tr.states.first().map_or(0, |s| s.len() / 2);
    let mut out = String::from("t");
    for side in ["xl", "xu"] {
        for i in 1..=n {
            let _ = write!(out, ",{side}_{i}");
        }
    }
    out.push('\n');
    for (t, s) in tr.times.iter().zip(&tr.states) {
        let _ = write!(out, "{t}");
        for v in s {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct CellRecord<'a> {
    index: usize,
    initial: BoxSpec,
    times: &'a [f64],
    lower: Vec<&'a [f64]>,
    upper: Vec<&'a [f64]>,
}

#[derive(Serialize)]
struct ReachDocument<'a> {
    config: &'a ExperimentConfig,
    summary: &'a ReachSummary,
    cells: Vec<CellRecord<'a>>,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))
}

/// Writes per-cell bounds (`cell_XXXX.csv` or a single `reach.json`) and
/// `summary.json` into `dir`. Returns the written paths.
pub fn write_reach(
    dir: &Path,
    format: OutputFormat,
    cfg: &ExperimentConfig,
    outcome: &ReachOutcome,
) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    let mut written = Vec::new();
    match format {
        OutputFormat::Csv => {
            for (k, tr) in outcome.trajectories.iter().enumerate() {
                if let Ok(tr) = tr {
                    let p = dir.join(format!("cell_{k:04}.csv"));
                    write_file(&p, &trajectory_csv(tr))?;
                    written.push(p);
                }
            }
        }
        OutputFormat::Json => {
            let cells = outcome
                .trajectories
                .iter()
                .enumerate()
                .filter_map(|(k, tr)| {
                    let tr = tr.as_ref().ok()?;
                    let n = tr.states.first().map_or(0, |s| s.len() / 2);
                    let c = &outcome.grid.cells[k];
                    Some(CellRecord {
                        index: k,
                        initial: BoxSpec { lower: c.lower(), upper: c.upper() },
                        times: &tr.times,
                        lower: tr.states.iter().map(|s| &s[..n]).collect(),
                        upper: tr.states.iter().map(|s| &s[n..]).collect(),
                    })
                })
                .collect();
            let doc = ReachDocument { config: cfg, summary: &outcome.summary, cells };
            let p = dir.join("reach.json");
            write_file(&p, &to_json(&doc)?)?;
            written.push(p);
        }
    }
    let p = dir.join("summary.json");
    write_file(&p, &to_json(&outcome.summary)?)?;
    written.push(p);
    Ok(written)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub divisions: usize,
    pub cells: usize,
    pub integrator: Integrator,
    pub workers: usize,
    pub mean_seconds: f64,
    pub min_seconds: f64,
    /// Mean time relative to the one-cell run with the same integrator and
    /// worker count (empty when that run is not part of the grid).
    pub ratio: Option<f64>,
}

/// Times `run_partitions` for every (divisions, integrator, workers)
/// combination: `warmup` untimed runs, then the mean of `repetitions`.
pub fn run_benchmark(cfg: &ExperimentConfig, spec: &BenchmarkSpec, default_workers: usize) -> Result<Vec<BenchRow>> {
    let setup = build_setup(cfg)?;
    let source = cfg.initial.to_tensor()?;
    let n = source.len();
    let workers = if spec.workers.is_empty() { vec![default_workers] } else { spec.workers.clone() };
    let reps = spec.repetitions.max(1);
    let mut rows = Vec::new();
    for &integrator in &spec.integrators {
        let settings = RolloutSettings { integrator, ..cfg.rollout_settings() };
        for &w in &workers {
            for &d in &spec.divisions {
                let grid = grid_partition(&source, &vec![d; n])?;
                let run = || -> Result<f64> {
                    let start = Instant::now();
                    let res = run_partitions(&setup.embedding, &grid, &setup.disturbance, &setup.control, &settings, w);
                    let secs = start.elapsed().as_secs_f64();
                    if let Some(Err(e)) = res.into_iter().find(|r| r.is_err()) {
                        return Err(e);
                    }
                    Ok(secs)
                };
                for _ in 0..spec.warmup {
                    run()?;
                }
                let times = (0..reps).map(|_| run()).collect::<Result<Vec<f64>>>()?;
                rows.push(BenchRow {
                    divisions: d,
                    cells: grid.cells.len(),
                    integrator,
                    workers: w,
                    mean_seconds: times.iter().sum::<f64>() / reps as f64,
                    min_seconds: times.iter().copied().fold(f64::INFINITY, f64::min),
                    ratio: None,
                });
            }
        }
    }
    let base: Vec<(Integrator, usize, f64)> =
        rows.iter().filter(|r| r.cells == 1).map(|r| (r.integrator, r.workers, r.mean_seconds)).collect();
    for r in &mut rows {
        r.ratio = base
            .iter()
            .find(|(i, w, _)| *i == r.integrator && *w == r.workers)
            .map(|(_, _, t)| r.mean_seconds / t);
    }
    Ok(rows)
}

pub fn benchmark_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("divisions,cells,integrator,workers,mean_seconds,min_seconds,ratio\n");
    for r in rows {
        let ratio = r.ratio.map_or(String::new(), |v| v.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.divisions,
            r.cells,
            r.integrator.name(),
            r.workers,
            r.mean_seconds,
            r.min_seconds,
            ratio
        );
    }
    out
}

pub fn write_benchmark(dir: &Path, format: OutputFormat, rows: &[BenchRow]) -> Result<PathBuf> {
    create_dir(dir)?;
    let (p, text) = match format {
        OutputFormat::Csv => (dir.join("benchmark.csv"), benchmark_csv(rows)),
        OutputFormat::Json => (dir.join("benchmark.json"), to_json(&rows)?),
    };
    write_file(&p, &text)?;
    Ok(p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisReport {
    pub feedforward: Vec<f64>,
    pub gain: Vec<f64>,
    pub outcome: SynthesisOutcome,
    pub certificate: Certificate,
    pub solve_seconds: f64,
}

pub struct SynthesisRun {
    pub report: SynthesisReport,
    pub rollout: SynthRollout,
    pub dt: f64,
}

/// Solves the robust swing-up problem and certifies the result.
pub fn run_synthesis(cfg: &SynthesisConfig, workers: usize) -> Result<SynthesisRun> {
    let pb = cfg.problem()?;
    let z0 = cfg.initial_decision(&pb)?;
    let start = Instant::now();
    let outcome = pb.solve(&z0, &cfg.optimizer)?;
    let solve_seconds = start.elapsed().as_secs_f64();
    let certificate = pb.certify(&outcome.decision, cfg.certificate_samples, cfg.seed, workers)?;
    let rollout = pb.rollout(&outcome.decision)?;
    let (ff, k) = pb.split(&outcome.decision);
    let report = SynthesisReport { feedforward: ff.to_vec(), gain: k.to_vec(), outcome, certificate, solve_seconds };
    Ok(SynthesisRun { report, rollout, dt: cfg.dt })
}

/// Writes `synthesis.json` and the embedding tube (`synthesis_tube.csv` in
/// the usual bound columns, or inside the JSON document).
pub fn write_synthesis(dir: &Path, format: OutputFormat, run: &SynthesisRun) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    let r = &run.rollout;
    let tube = Trajectory {
        times: (0..r.lower.len()).map(|k| k as f64 * run.dt).collect(),
        states: r.lower.iter().zip(&r.upper).map(|(l, u)| [l.as_slice(), u.as_slice()].concat()).collect(),
        integrator: Integrator::Euler,
        dt: run.dt,
        max_error_estimate: None,
    };
    let mut written = Vec::new();
    #[derive(Serialize)]
    struct Doc<'a> {
        report: &'a SynthesisReport,
        #[serde(skip_serializing_if = "Option::is_none")]
        nominal: Option<&'a [Vec<f64>]>,
        #[serde(skip_serializing_if = "Option::is_none")]
        lower: Option<&'a [Vec<f64>]>,
        #[serde(skip_serializing_if = "Option::is_none")]
        upper: Option<&'a [Vec<f64>]>,
    }
    let full = format == OutputFormat::Json;
    let doc = Doc {
        report: &run.report,
        nominal: full.then_some(&r.nominal[..]),
        lower: full.then_some(&r.lower[..]),
        upper: full.then_some(&r.upper[..]),
    };
    let p = dir.join("synthesis.json");
    write_file(&p, &to_json(&doc)?)?;
    written.push(p);
    if format == OutputFormat::Csv {
        let p = dir.join("synthesis_tube.csv");
        write_file(&p, &trajectory_csv(&tube))?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ControllerSpec, SystemSpec};
    use crate::systems::PendulumParams;

    fn pendulum_cfg() -> ExperimentConfig {
        ExperimentConfig::from_toml_str(
            r#"
            dt = 0.01
            horizon = 0.5
            initial = { lower = [0.3, -0.2], upper = [0.3, -0.2] }
            disturbance = { lower = [0.0], upper = [0.0] }
            [system]
            kind = "pendulum"
            [controller]
            kind = "linear"
            gain = [[-0.2, -0.05]]
            feedforward = [[0.1], [0.2], [0.0]]
            "#,
        )
        .unwrap()
    }

    #[test]
    fn thin_pendulum_run_matches_nominal() {
        let cfg = pendulum_cfg();
        // A thin Euler tube cannot hold continuous-time samples, so no Monte Carlo here.
        let out = run_reach(&cfg, 1, false).unwrap();
        assert!(out.summary.passed(), "{:?}", out.summary);
        let tr = out.trajectories[0].as_ref().unwrap();
        let sys = crate::systems::pendulum(PendulumParams::default()).unwrap();
        let mut x = vec![0.3, -0.2];
        for k in 0..tr.len() - 1 {
            let t = tr.times[k];
            let ff = [0.1, 0.2, 0.0][schedule_index(t, 0.0, 0.01, 3)];
            let u = ff - 0.2 * x[0] - 0.05 * x[1];
            let f = sys.f(t, &x, &[u], &[0.0]).unwrap();
            for i in 0..2 {
                x[i] += 0.01 * f[i];
            }
            let s = &tr.states[k + 1];
            for i in 0..2 {
                assert!((s[i] - x[i]).abs() < 1e-9 && (s[2 + i] - x[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn partitions_write_csv_and_json() {
        let mut cfg = pendulum_cfg();
        cfg.system = SystemSpec::DoubleIntegrator;
        cfg.controller = ControllerSpec::Interval { lower: vec![-0.1], upper: vec![0.1] };
        cfg.initial = BoxSpec { lower: vec![0.0, 0.9], upper: vec![0.2, 1.1] };
        cfg.disturbance = Some(BoxSpec { lower: vec![-0.01], upper: vec![0.01] });
        cfg.partitions = Some(vec![2, 3]);
        cfg.monte_carlo.samples = 5;
        let out = run_reach(&cfg, 2, true).unwrap();
        assert_eq!(out.trajectories.len(), 6);
        assert!(out.summary.passed(), "{:?}", out.summary);
        let dir = std::env::temp_dir().join(format!("ivreach-exp-{}", std::process::id()));
        let csv = write_reach(&dir, OutputFormat::Csv, &cfg, &out).unwrap();
        assert_eq!(csv.len(), 7);
        let text = std::fs::read_to_string(&csv[0]).unwrap();
        assert!(text.starts_with("t,xl_1,xl_2,xu_1,xu_2\n"));
        assert_eq!(text.lines().count(), 52);
        let json = write_reach(&dir, OutputFormat::Json, &cfg, &out).unwrap();
        let doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&json[0]).unwrap()).unwrap();
        assert_eq!(doc["cells"].as_array().unwrap().len(), 6);
        assert_eq!(doc["summary"]["cells"], 6);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn benchmark_rows_have_ratios() {
        let mut cfg = pendulum_cfg();
        cfg.initial = BoxSpec { lower: vec![0.2, -0.3], upper: vec![0.4, -0.1] };
        let spec = BenchmarkSpec {
            divisions: vec![1, 2],
            integrators: vec![Integrator::Euler],
            workers: vec![1],
            repetitions: 1,
            warmup: 0,
        };
        let rows = run_benchmark(&cfg, &spec, 1).unwrap();
        assert_eq!(rows.iter().map(|r| r.cells).collect::<Vec<_>>(), vec![1, 4]);
        assert_eq!(rows[0].ratio, Some(1.0));
        assert!(rows[1].ratio.unwrap() > 0.0);
        let csv = benchmark_csv(&rows);
        assert_eq!(csv.lines().count(), 3);
    }
}
