//! The two coupled token walks behind a single nontrivial update.
//!
//! Walker "0" and walker "2" sit on the nodes holding opinions 0 and 2 in an
//! otherwise all-ones profile. Every step draws one edge; a walker on an
//! endpoint of the edge crosses it. Drawing the edge that joins the two
//! walkers is the nontrivial update, i.e. the meeting.
//!
//! The *virtual* process differs only while the walkers are adjacent: the
//! joining edge then carries weight `2/m`, edges touching one walker `1/m`,
//! and the remaining mass is spread evenly over the other edges.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Schedule};
use crate::rng::{derive_seed, stream_rng};
use crate::stats::Tally;

pub const DEFAULT_STEP_CAP: u64 = 1_000_000_000;

/// Start pairs are enumerated exhaustively only up to this many nodes.
pub const EXHAUSTIVE_START_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WalkerPair {
    pub pos0: usize,
    pub pos2: usize,
}

impl WalkerPair {
    pub fn new(pos0: usize, pos2: usize) -> Self {
        WalkerPair { pos0, pos2 }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        for node in [self.pos0, self.pos2] {
            if node >= n {
                return Err(Error::NodeOutOfRange { node, n });
            }
        }
        if self.pos0 == self.pos2 {
            return Err(Error::SameNode(self.pos0));
        }
        Ok(())
    }

    /// All ordered pairs of distinct nodes.
    pub fn all(n: usize) -> Vec<WalkerPair> {
        (0..n)
            .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| WalkerPair::new(a, b)))
            .collect()
    }
}

impl fmt::Display for WalkerPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.pos0, self.pos2)
    }
}

impl FromStr for WalkerPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("expected \"a,b\", got {s:?}")))?;
        let p = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("{t:?}: {e}")))
        };
        Ok(WalkerPair::new(p(a)?, p(b)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Process {
    Original,
    Virtual,
}

impl FromStr for Process {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(Process::Original),
            "virtual" => Ok(Process::Virtual),
            _ => Err(Error::Parse(format!("unknown process {s:?}"))),
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Process::Original => "original",
            Process::Virtual => "virtual",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Met,
    At(WalkerPair),
}

/// Applies one drawn edge to the walker pair.
pub fn original_step(g: &Graph, w: WalkerPair, edge: usize) -> Step {
    let (u, v) = g.edge(edge);
    let on0 = u == w.pos0 || v == w.pos0;
    let on2 = u == w.pos2 || v == w.pos2;
    let other = |x: usize| if u == x { v } else { u };
    let next = match (on0, on2) {
        (true, true) => return Step::Met,
        (true, false) => WalkerPair::new(other(w.pos0), w.pos2),
        (false, true) => WalkerPair::new(w.pos0, other(w.pos2)),
        (false, false) => w,
    };
    // only the joining edge can bring the walkers onto one node
    assert_ne!(next.pos0, next.pos2, "walkers coincided without the joining edge firing");
    Step::At(next)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDistribution {
    pub probs: Vec<f64>,
}

impl EdgeDistribution {
    pub fn uniform(m: usize) -> Self {
        EdgeDistribution {
            probs: vec![1.0 / m as f64; m],
        }
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    fn cdf(&self) -> Vec<f64> {
        self.probs
            .iter()
            .scan(0.0, |acc, &p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }
}

/// Edge law of the virtual process. Requires `d(u) + d(v) <= m` on every
/// edge, otherwise the weights are not a distribution.
pub fn virtual_edge_distribution(g: &Graph, w: WalkerPair) -> Result<EdgeDistribution> {
    w.validate(g.n())?;
    g.require_assumption()?;
    Ok(virtual_probs(g, w))
}

fn virtual_probs(g: &Graph, w: WalkerPair) -> EdgeDistribution {
    let m = g.m();
    if !g.is_adjacent(w.pos0, w.pos2) {
        return EdgeDistribution::uniform(m);
    }
    let mf = m as f64;
    let dsum = (g.degree(w.pos0) + g.degree(w.pos2)) as f64;
    let rest = (mf - dsum) / (mf * (mf + 1.0 - dsum));
    let probs = g
        .edges()
        .iter()
        .map(|&(u, v)| {
            let hits = [u, v].iter().filter(|&&x| x == w.pos0 || x == w.pos2).count();
            match hits {
                2 => 2.0 / mf,
                1 => 1.0 / mf,
                _ => rest,
            }
        })
        .collect();
    EdgeDistribution { probs }
}

/// Inverse-CDF edge sampler for the virtual process. The adjacent-case
/// table is rebuilt only when the graph or the adjacent pair changes.
struct VirtualSampler {
    key: Option<(*const Graph, WalkerPair)>,
    cdf: Vec<f64>,
}

impl VirtualSampler {
    fn new() -> Self {
        VirtualSampler { key: None, cdf: Vec::new() }
    }

    fn sample<R: Rng>(&mut self, g: &Graph, w: WalkerPair, rng: &mut R) -> usize {
        if !g.is_adjacent(w.pos0, w.pos2) {
            return rng.gen_range(0..g.m());
        }
        let key = (g as *const Graph, w);
        if self.key != Some(key) {
            self.cdf = virtual_probs(g, w).cdf();
            self.key = Some(key);
        }
        let u: f64 = rng.gen();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeetingOutcome {
    pub steps: u64,
    /// `false` when the step cap was hit first (the run is censored).
    pub met: bool,
}

/// Runs one coupled walk until the walkers meet or `cap` steps elapse.
pub fn simulate_meeting<S: Schedule + ?Sized, R: Rng>(
    kind: Process,
    schedule: &S,
    w0: WalkerPair,
    rng: &mut R,
    cap: u64,
) -> Result<MeetingOutcome> {
    w0.validate(schedule.n())?;
    if kind == Process::Virtual {
        schedule.require_assumption()?;
    }
    let mut sampler = VirtualSampler::new();
    let mut w = w0;
    let mut t = 0;
    while t < cap {
        let g = schedule.graph_at(t);
        let edge = match kind {
            Process::Original => rng.gen_range(0..g.m()),
            Process::Virtual => sampler.sample(g, w, rng),
        };
        t += 1;
        match original_step(g, w, edge) {
            Step::Met => return Ok(MeetingOutcome { steps: t, met: true }),
            Step::At(next) => w = next,
        }
    }
    Ok(MeetingOutcome { steps: cap, met: false })
}

/// Monte Carlo meeting-time tally for one start pair. Trial `i` uses the
/// stream `(derive_seed(seed, pair), i)`, so the result does not depend on
/// which other pairs are estimated or on thread scheduling.
pub fn meeting_tally<S: Schedule + Sync + ?Sized>(
    kind: Process,
    schedule: &S,
    w0: WalkerPair,
    trials: u64,
    seed: u64,
    cap: u64,
) -> Result<Tally> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    w0.validate(schedule.n())?;
    if kind == Process::Virtual {
        schedule.require_assumption()?;
    }
    let pair_seed = derive_seed(seed, (w0.pos0 * schedule.n() + w0.pos2) as u64);
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(pair_seed, i);
            simulate_meeting(kind, schedule, w0, &mut rng, cap).map(|o| {
                let mut t = Tally::default();
                t.push(o.steps);
                t.censored = u64::from(!o.met);
                t
            })
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEstimate {
    pub start: WalkerPair,
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
    pub censored: u64,
}

impl PairEstimate {
    fn from_tally(start: WalkerPair, t: &Tally) -> Self {
        PairEstimate {
            start,
            mean: t.mean(),
            stderr: t.stderr(),
            trials: t.count,
            censored: t.censored,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeetingEstimate {
    pub per_pair: Vec<PairEstimate>,
    pub argmax: WalkerPair,
    pub max_mean: f64,
    pub max_stderr: f64,
}

/// Estimates the expected meeting time from every start pair (all ordered
/// pairs when `starts` is `None`, allowed up to 12 nodes) and reports the
/// largest.
pub fn estimate_max_meeting(
    kind: Process,
    g: &Graph,
    starts: Option<&[WalkerPair]>,
    trials: u64,
    seed: u64,
    cap: u64,
) -> Result<MeetingEstimate> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    g.ensure_connected()?;
    let starts = match starts {
        Some(s) => s.to_vec(),
        None if g.n() <= EXHAUSTIVE_START_LIMIT => WalkerPair::all(g.n()),
        None => {
            return Err(Error::Config(format!(
                "{} nodes exceed the exhaustive start-pair limit {EXHAUSTIVE_START_LIMIT}; give start pairs",
                g.n()
            )))
        }
    };
    if starts.is_empty() {
        return Err(Error::Config("no start pairs".into()));
    }
    let per_pair = starts
        .iter()
        .map(|&w| meeting_tally(kind, g, w, trials, seed, cap).map(|t| PairEstimate::from_tally(w, &t)))
        .collect::<Result<Vec<_>>>()?;
    let best = per_pair
        .iter()
        .max_by(|a, b| a.mean.total_cmp(&b.mean))
        .expect("non-empty");
    Ok(MeetingEstimate {
        argmax: best.start,
        max_mean: best.mean,
        max_stderr: best.stderr,
        per_pair,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphFamily;

    fn c4() -> Graph {
        GraphFamily::Cycle { n: 4 }.generate().unwrap()
    }

    #[test]
    fn original_step_examples() {
        let g = c4();
        let w = WalkerPair::new(0, 1);
        assert_eq!(original_step(&g, w, g.edge_id(0, 1).unwrap()), Step::Met);
        assert_eq!(
            original_step(&g, w, g.edge_id(1, 2).unwrap()),
            Step::At(WalkerPair::new(0, 2))
        );
        assert_eq!(original_step(&g, w, g.edge_id(2, 3).unwrap()), Step::At(w));
    }

    #[test]
    fn c4_adjacent_distribution() {
        let g = c4();
        let d = virtual_edge_distribution(&g, WalkerPair::new(0, 1)).unwrap();
        assert_eq!(d.probs[g.edge_id(0, 1).unwrap()], 0.5);
        assert_eq!(d.probs[g.edge_id(1, 2).unwrap()], 0.25);
        assert_eq!(d.probs[g.edge_id(3, 0).unwrap()], 0.25);
        assert_eq!(d.probs[g.edge_id(2, 3).unwrap()], 0.0);
    }

    #[test]
    fn c5_joining_edge_weight() {
        let g = GraphFamily::Cycle { n: 5 }.generate().unwrap();
        let d = virtual_edge_distribution(&g, WalkerPair::new(2, 3)).unwrap();
        assert!((d.probs[g.edge_id(2, 3).unwrap()] - 0.4).abs() < 1e-15);
        assert!((d.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_adjacent_is_uniform() {
        let g = GraphFamily::Petersen.generate().unwrap();
        let d = virtual_edge_distribution(&g, WalkerPair::new(0, 2)).unwrap();
        assert_eq!(d, EdgeDistribution::uniform(15));
    }

    #[test]
    fn virtual_law_needs_degree_sum_condition() {
        let g = GraphFamily::Star { n: 4 }.generate().unwrap();
        assert!(matches!(
            virtual_edge_distribution(&g, WalkerPair::new(1, 2)),
            Err(Error::AssumptionViolated { .. })
        ));
    }

    #[test]
    fn k2_meets_in_one_step() {
        let g = GraphFamily::Line { n: 2 }.generate().unwrap();
        let est = estimate_max_meeting(Process::Original, &g, None, 100, 1, DEFAULT_STEP_CAP).unwrap();
        assert_eq!(est.max_mean, 1.0);
        assert_eq!(est.max_stderr, 0.0);
    }

    #[test]
    fn simulation_is_deterministic_in_seed() {
        let g = GraphFamily::Cycle { n: 7 }.generate().unwrap();
        let w = WalkerPair::new(0, 3);
        let a = simulate_meeting(Process::Virtual, &g, w, &mut stream_rng(9, 2), 1 << 30).unwrap();
        let b = simulate_meeting(Process::Virtual, &g, w, &mut stream_rng(9, 2), 1 << 30).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn censoring() {
        let g = GraphFamily::Line { n: 10 }.generate().unwrap();
        let o = simulate_meeting(Process::Original, &g, WalkerPair::new(0, 9), &mut stream_rng(0, 0), 3).unwrap();
        assert_eq!(o, MeetingOutcome { steps: 3, met: false });
    }

    #[test]
    fn zero_trials_rejected() {
        assert_eq!(
            estimate_max_meeting(Process::Original, &c4(), None, 0, 0, 10).unwrap_err(),
            Error::NoTrials
        );
    }

    #[test]
    fn pair_parsing() {
        assert_eq!("3, 5".parse::<WalkerPair>().unwrap(), WalkerPair::new(3, 5));
        assert!("3".parse::<WalkerPair>().is_err());
    }
}
