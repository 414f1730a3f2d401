//! Graph sequences fixed in advance, the pair-space mixing recursion over
//! them, and Monte Carlo meeting and consensus runs on a schedule.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bounds::time_varying_bound;
use crate::dynamics::{run_consensus, OpinionProfile, RunOptions, RunTrace};
use crate::error::{Error, Result};
use crate::graph::{load_graph, Graph, Schedule};
use crate::rng::derive_seed;
use crate::walkers::{meeting_tally, Process, WalkerPair, DEFAULT_STEP_CAP};

/// Tag separating the schedule's draws from every walker stream.
const SCHEDULE_STREAM_TAG: u64 = 0x5c4e_d01e;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SequenceMode {
    /// `graph_at(t) = graphs[t mod len]`.
    Periodic,
    /// `graph_at(t)` is drawn uniformly from the pool by a hash of
    /// `(seed, t)`.
    Random { seed: u64 },
}

#[derive(Debug, Clone)]
pub struct GraphSequence {
    graphs: Vec<Graph>,
    mode: SequenceMode,
    n: usize,
    m_max: usize,
    d_max: usize,
}

impl GraphSequence {
    pub fn new(graphs: Vec<Graph>, mode: SequenceMode) -> Result<Self> {
        let first = graphs.first().ok_or(Error::Schedule {
            index: 0,
            reason: "empty schedule".into(),
        })?;
        let n = first.n();
        let mut m_max = 0;
        let mut d_max = 0;
        for (index, g) in graphs.iter().enumerate() {
            let reject = |reason: String| Error::Schedule { index, reason };
            if g.n() != n {
                return Err(reject(format!("has {} nodes, expected {n}", g.n())));
            }
            g.require_assumption().map_err(|e| reject(e.to_string()))?;
            m_max = m_max.max(g.m());
            d_max = d_max.max(g.diameter().map_err(|e| reject(e.to_string()))?);
        }
        Ok(GraphSequence {
            graphs,
            mode,
            n,
            m_max,
            d_max,
        })
    }

    pub fn periodic(graphs: Vec<Graph>) -> Result<Self> {
        Self::new(graphs, SequenceMode::Periodic)
    }

    pub fn random(pool: Vec<Graph>, seed: u64) -> Result<Self> {
        Self::new(pool, SequenceMode::Random { seed })
    }

    pub fn constant(g: Graph) -> Result<Self> {
        Self::periodic(vec![g])
    }

    /// Schedule file: one graph spec per line (`#` starts a comment). An
    /// optional first line `random <seed>` or `periodic` selects the mode.
    pub fn from_text(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut mode = SequenceMode::Periodic;
        let mut graphs = Vec::new();
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        for (ln, line) in lines {
            let mut words = line.split_whitespace();
            match (words.next(), words.next(), words.next()) {
                (Some("periodic"), None, _) if graphs.is_empty() => continue,
                (Some("random"), Some(seed), None) if graphs.is_empty() => {
                    let seed = seed
                        .parse()
                        .map_err(|e| Error::Parse(format!("line {ln}: seed {seed:?}: {e}")))?;
                    mode = SequenceMode::Random { seed };
                }
                _ => graphs.push(
                    load_graph(line, base_dir).map_err(|e| Error::Parse(format!("line {ln}: {e}")))?,
                ),
            }
        }
        Self::new(graphs, mode)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text, path.parent())
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn mode(&self) -> SequenceMode {
        self.mode
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    /// Width of the window over which the union of graphs is connected.
    /// Every member is connected on its own, so this is always 1.
    pub fn connectivity_window(&self) -> u64 {
        1
    }

    pub fn index_at(&self, t: u64) -> usize {
        let len = self.graphs.len() as u64;
        let i = match self.mode {
            SequenceMode::Periodic => t % len,
            SequenceMode::Random { seed } => derive_seed(derive_seed(seed, SCHEDULE_STREAM_TAG), t) % len,
        };
        i as usize
    }

    pub fn bound(&self) -> f64 {
        time_varying_bound(self.n, self.m_max, self.d_max)
    }
}

impl Schedule for GraphSequence {
    fn n(&self) -> usize {
        self.n
    }

    fn graph_at(&self, t: u64) -> &Graph {
        &self.graphs[self.index_at(t)]
    }

    fn require_assumption(&self) -> Result<()> {
        Ok(())
    }
}

/// `p <- (I - L(G x G)/m) p` without forming the `n^2 x n^2` matrix.
pub fn kbar_apply(g: &Graph, p: &[f64]) -> Vec<f64> {
    let n = g.n();
    let m = g.m() as f64;
    let mut out = vec![0.0; n * n];
    for x in 0..n {
        for y in 0..n {
            let here = p[x * n + y];
            let flow: f64 = g.neighbors(x).iter().map(|&j| p[j * n + y] - here).sum::<f64>()
                + g.neighbors(y).iter().map(|&j| p[x * n + j] - here).sum::<f64>();
            out[x * n + y] = here + flow / m;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingStep {
    pub t: u64,
    /// `|p(t) - pi|_2`.
    pub norm: f64,
    /// `|p(0) - pi|_2` times the product of the claimed per-step factors.
    pub claimed_bound: f64,
    /// `1 - 1/(2 n m_t D_t)` for the graph used in this step.
    pub claimed_factor: f64,
    /// `norm(t) / norm(t-1)`.
    pub observed_factor: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingTrace {
    pub steps: Vec<MixingStep>,
    pub initial_norm: f64,
    /// The norm never increased, and fell strictly whenever it was above
    /// rounding level.
    pub decreasing: bool,
    pub any_flagged: bool,
}

const NORM_FLOOR: f64 = 1e-12;

/// Evolves `p0` over `horizon` steps of the schedule and compares the
/// distance to uniform with the claimed geometric contraction.
pub fn mixing_trace(seq: &GraphSequence, p0: &[f64], horizon: u64) -> Result<MixingTrace> {
    let n = seq.n;
    if p0.len() != n * n {
        return Err(Error::Dimension {
            expected: n * n,
            got: p0.len(),
        });
    }
    if p0.iter().any(|&x| x < 0.0) || (p0.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidChain("initial vector is not a distribution".into()));
    }
    for (index, g) in seq.graphs.iter().enumerate() {
        let max_deg = g.degrees().into_iter().max().unwrap_or(0);
        if 2 * max_deg > g.m() {
            return Err(Error::Schedule {
                index,
                reason: format!("pair matrix has a negative diagonal (2 * {max_deg} > m = {})", g.m()),
            });
        }
    }
    let pi = 1.0 / (n * n) as f64;
    let dist = |p: &[f64]| p.iter().map(|x| (x - pi).powi(2)).sum::<f64>().sqrt();
    let initial_norm = dist(p0);
    let mut p = p0.to_vec();
    let mut prev = initial_norm;
    let mut claimed_bound = initial_norm;
    let mut steps = Vec::with_capacity(horizon as usize);
    let mut decreasing = true;
    for t in 0..horizon {
        let g = seq.graph_at(t);
        p = kbar_apply(g, &p);
        let norm = dist(&p);
        let claimed_factor = 1.0 - 1.0 / (2.0 * (n * g.m() * g.diameter()?) as f64);
        claimed_bound *= claimed_factor;
        let observed_factor = if prev > 0.0 { norm / prev } else { 0.0 };
        let flagged = prev > NORM_FLOOR && observed_factor > claimed_factor + 1e-12;
        if norm > prev * (1.0 + 1e-12) || (prev > NORM_FLOOR && norm >= prev) {
            decreasing = false;
        }
        steps.push(MixingStep {
            t: t + 1,
            norm,
            claimed_bound,
            claimed_factor,
            observed_factor,
            flagged,
        });
        prev = norm;
    }
    let any_flagged = steps.iter().any(|s| s.flagged);
    Ok(MixingTrace {
        steps,
        initial_norm,
        decreasing,
        any_flagged,
    })
}

/// Point mass on the pair state `(x, y)`.
pub fn point_mass(n: usize, w: WalkerPair) -> Vec<f64> {
    let mut p = vec![0.0; n * n];
    p[w.pos0 * n + w.pos2] = 1.0;
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvMeeting {
    pub start: WalkerPair,
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
    pub censored: u64,
    /// `32 n^2 m_max D_max (1 + ln n)`.
    pub bound: f64,
    pub within_bound: bool,
}

pub fn meeting_time_tv(
    seq: &GraphSequence,
    kind: Process,
    w0: WalkerPair,
    trials: u64,
    seed: u64,
) -> Result<TvMeeting> {
    let tally = meeting_tally(kind, seq, w0, trials, seed, DEFAULT_STEP_CAP)?;
    let bound = seq.bound();
    let mean = tally.mean();
    Ok(TvMeeting {
        start: w0,
        mean,
        stderr: tally.stderr(),
        trials: tally.count,
        censored: tally.censored,
        bound,
        within_bound: tally.censored == 0 && mean <= bound,
    })
}

pub fn run_consensus_tv(seq: &GraphSequence, x0: &OpinionProfile, seed: u64, opts: RunOptions) -> Result<RunTrace> {
    run_consensus(seq, x0, seed, opts)
}
