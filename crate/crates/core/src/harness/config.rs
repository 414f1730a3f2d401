use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::report::{num, text, OutputFormat, Table};
use super::{load_corpus, run_suite, sweep_ratio, sweep_table, SweepFamily, SweepMode, STANDARD_CORPUS};
use crate::dynamics::{run_consensus, OpinionProfile, RunOptions};
use crate::error::{Error, Result};
use crate::graph::load_graph;
use crate::rng::derive_seed;
use crate::time_varying::{meeting_time_tv, GraphSequence, SequenceMode};
use crate::walkers::{estimate_max_meeting, Process, WalkerPair, DEFAULT_STEP_CAP};

/// A TOML document with an `[experiment]` section and one section for the
/// selected kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub suite: Option<SuiteSection>,
    pub sweep: Option<SweepSection>,
    pub walkers: Option<WalkersSection>,
    pub simulate: Option<SimulateSection>,
    pub tv: Option<TvSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Suite,
    Sweep,
    Walkers,
    Simulate,
    Tv,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Suite => "suite",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Walkers => "walkers",
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Tv => "tv",
        }
    }
}

fn default_tolerance() -> f64 {
    1e-8
}

fn default_trials() -> u64 {
    2000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; `None` keeps results in memory only.
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSection {
    /// Graph specs; the standard corpus when absent.
    pub graphs: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub families: Vec<SweepFamily>,
    pub n_min: usize,
    pub n_max: usize,
    #[serde(default)]
    pub mode: SweepMode,
    #[serde(default = "default_trials")]
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkersSection {
    pub graph: String,
    pub process: Process,
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// `"a,b"` start pairs; all pairs when absent.
    pub starts: Option<Vec<String>>,
    pub cap: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub graph: String,
    pub runs: u64,
    /// Explicit initial opinions.
    pub profile: Option<Vec<i64>>,
    /// Nodes holding 0 and 2 in an otherwise all-ones profile.
    pub x_set: Option<[usize; 2]>,
    pub max_steps: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TvSection {
    /// Graph specs of the period (or the pool, when `schedule_seed` is set).
    pub schedule: Vec<String>,
    pub schedule_seed: Option<u64>,
    pub start: String,
    pub process: Option<Process>,
    #[serde(default = "default_trials")]
    pub trials: u64,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn validate(&self) -> Result<()> {
        let missing = |s: &str| Error::Config(format!("experiment.kind = \"{s}\" requires a [{s}] section"));
        match self.experiment.kind {
            ExperimentKind::Suite => {}
            ExperimentKind::Sweep => {
                let s = self.sweep.as_ref().ok_or_else(|| missing("sweep"))?;
                if s.n_min > s.n_max {
                    return Err(Error::Config(format!("sweep.n_min = {} exceeds sweep.n_max = {}", s.n_min, s.n_max)));
                }
            }
            ExperimentKind::Walkers => {
                self.walkers.as_ref().ok_or_else(|| missing("walkers"))?;
            }
            ExperimentKind::Simulate => {
                let s = self.simulate.as_ref().ok_or_else(|| missing("simulate"))?;
                if s.profile.is_some() == s.x_set.is_some() {
                    return Err(Error::Config("simulate needs exactly one of profile or x_set".into()));
                }
            }
            ExperimentKind::Tv => {
                self.tv.as_ref().ok_or_else(|| missing("tv"))?;
            }
        }
        if self.experiment.tolerance.is_nan() || self.experiment.tolerance <= 0.0 {
            return Err(Error::Config("experiment.tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub kind: ExperimentKind,
    pub table: Table,
    /// Rows describing hard assertion failures.
    pub failures: Vec<String>,
    /// Raised diagnostic flags; these never fail a run.
    pub flags: Vec<String>,
}

impl ExperimentResult {
    pub fn exit_code(&self) -> i32 {
        i32::from(!self.failures.is_empty())
    }

    /// Writes `<kind>.csv` or `<kind>.json` into `dir`.
    pub fn write(&self, dir: &Path, format: OutputFormat) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.{format}", self.kind.name()));
        let file = std::fs::File::create(&path)?;
        match format {
            OutputFormat::Csv => self.table.write_csv(std::io::BufWriter::new(file))?,
            OutputFormat::Json => serde_json::to_writer_pretty(file, self).map_err(|e| Error::Io(e.to_string()))?,
        }
        Ok(path)
    }
}

/// Dispatches a validated config. Relative graph file paths resolve
/// against `base_dir`. Results are written when `out_dir` is set.
pub fn run_experiment(cfg: &ExperimentConfig, base_dir: Option<&Path>) -> Result<ExperimentResult> {
    cfg.validate()?;
    let ex = &cfg.experiment;
    let seed = ex.seed;
    let result = match ex.kind {
        ExperimentKind::Suite => {
            let specs: Vec<String> = cfg
                .suite
                .as_ref()
                .and_then(|s| s.graphs.clone())
                .unwrap_or_else(|| STANDARD_CORPUS.iter().map(|s| s.to_string()).collect());
            let corpus = load_corpus(specs.iter().map(String::as_str), base_dir)?;
            let rep = run_suite(&corpus, ex.tolerance)?;
            let describe = |r: &super::SuiteRow| format!("{}: {} = {} (limit {})", r.graph, r.check, num(r.value), num(r.limit));
            ExperimentResult {
                kind: ex.kind,
                table: rep.table(),
                failures: rep.hard_failures().map(describe).collect(),
                flags: rep.flags().map(describe).collect(),
            }
        }
        ExperimentKind::Sweep => {
            let s = cfg.sweep.as_ref().expect("validated");
            let rows = sweep_ratio(&s.families, s.n_min..=s.n_max, s.mode, s.trials, seed)?;
            let failures = rows
                .iter()
                .filter(|r| r.ratio > 1.0)
                .map(|r| format!("{} n={}: ratio {} > 1", r.family, r.n, num(r.ratio)))
                .collect();
            ExperimentResult {
                kind: ex.kind,
                table: sweep_table(&rows),
                failures,
                flags: Vec::new(),
            }
        }
        ExperimentKind::Walkers => {
            let s = cfg.walkers.as_ref().expect("validated");
            let g = load_graph(&s.graph, base_dir)?;
            let starts = s
                .starts
                .as_ref()
                .map(|v| v.iter().map(|p| p.parse::<WalkerPair>()).collect::<Result<Vec<_>>>())
                .transpose()?;
            let est = estimate_max_meeting(
                s.process,
                &g,
                starts.as_deref(),
                s.trials,
                seed,
                s.cap.unwrap_or(DEFAULT_STEP_CAP),
            )?;
            let mut t = Table::new(["pos0", "pos2", "mean", "stderr", "trials", "censored"]);
            for p in &est.per_pair {
                t.push(vec![
                    text(p.start.pos0),
                    text(p.start.pos2),
                    num(p.mean),
                    num(p.stderr),
                    text(p.trials),
                    text(p.censored),
                ]);
            }
            ExperimentResult {
                kind: ex.kind,
                table: t,
                failures: Vec::new(),
                flags: Vec::new(),
            }
        }
        ExperimentKind::Simulate => {
            let s = cfg.simulate.as_ref().expect("validated");
            let g = load_graph(&s.graph, base_dir)?;
            let x0 = match (&s.profile, s.x_set) {
                (Some(v), _) => OpinionProfile::new(v.clone()),
                (None, Some([a, b])) => OpinionProfile::x_set(g.n(), a, b)?,
                _ => unreachable!("validated"),
            };
            let opts = RunOptions {
                max_steps: s.max_steps.unwrap_or(RunOptions::default().max_steps),
                record_lyapunov: false,
            };
            simulate_table(&g, &x0, s.runs, seed, opts, ex.kind)?
        }
        ExperimentKind::Tv => {
            let s = cfg.tv.as_ref().expect("validated");
            let graphs = s
                .schedule
                .iter()
                .map(|spec| load_graph(spec, base_dir))
                .collect::<Result<Vec<_>>>()?;
            let mode = match s.schedule_seed {
                Some(seed) => SequenceMode::Random { seed },
                None => SequenceMode::Periodic,
            };
            let seq = GraphSequence::new(graphs, mode)?;
            let w0: WalkerPair = s.start.parse()?;
            let r = meeting_time_tv(&seq, s.process.unwrap_or(Process::Original), w0, s.trials, seed)?;
            let mut t = Table::new(["pos0", "pos2", "mean", "stderr", "trials", "censored", "bound", "within_bound"]);
            t.push(vec![
                text(w0.pos0),
                text(w0.pos2),
                num(r.mean),
                num(r.stderr),
                text(r.trials),
                text(r.censored),
                num(r.bound),
                text(r.within_bound),
            ]);
            let failures = if r.within_bound {
                Vec::new()
            } else {
                vec![format!("mean meeting time {} exceeds bound {}", num(r.mean), num(r.bound))]
            };
            ExperimentResult {
                kind: ex.kind,
                table: t,
                failures,
                flags: Vec::new(),
            }
        }
    };
    if let Some(dir) = &ex.out_dir {
        let dir = match base_dir {
            Some(b) if dir.is_relative() => b.join(dir),
            _ => dir.clone(),
        };
        result.write(&dir, ex.format)?;
    }
    Ok(result)
}

/// Independent protocol runs; run `i` uses seed `derive_seed(seed, i)`.
pub fn simulate_table(
    g: &crate::graph::Graph,
    x0: &OpinionProfile,
    runs: u64,
    seed: u64,
    opts: RunOptions,
    kind: ExperimentKind,
) -> Result<ExperimentResult> {
    use rayon::prelude::*;
    if runs == 0 {
        return Err(Error::NoTrials);
    }
    let budget = x0.nontrivial_budget();
    let traces = (0..runs)
        .into_par_iter()
        .map(|i| run_consensus(g, x0, derive_seed(seed, i), opts))
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(["run", "seed", "steps", "nontrivial", "budget", "terminated"]);
    let mut failures = Vec::new();
    for (i, tr) in traces.iter().enumerate() {
        if tr.final_profile.sum() != x0.sum() || tr.nontrivial_updates > budget {
            failures.push(format!("run {i}: conservation or budget violated"));
        }
        t.push(vec![
            text(i),
            text(tr.seed),
            text(tr.steps_to_consensus),
            text(tr.nontrivial_updates),
            text(budget),
            text(tr.terminated),
        ]);
    }
    Ok(ExperimentResult {
        kind,
        table: t,
        failures,
        flags: Vec::new(),
    })
}
