//! The unbiased quantized consensus protocol: at each step one edge of the
//! current graph is drawn uniformly and its endpoints move one unit toward
//! each other (or swap when they differ by exactly one).

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Schedule;
use crate::rng::stream_rng;

pub const DEFAULT_MAX_STEPS: u64 = 1_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpinionProfile {
    values: Vec<i64>,
    sum: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateKind {
    Unchanged,
    Swap,
    /// Values differed by at least two; the Lyapunov function drops.
    Nontrivial,
}

impl OpinionProfile {
    pub fn new(values: Vec<i64>) -> Self {
        let sum = values.iter().sum();
        OpinionProfile { values, sum }
    }

    /// One node at 0, one at 2, every other node at 1.
    pub fn x_set(n: usize, zero_at: usize, two_at: usize) -> Result<Self> {
        if zero_at == two_at {
            return Err(Error::SameNode(zero_at));
        }
        for node in [zero_at, two_at] {
            if node >= n {
                return Err(Error::NodeOutOfRange { node, n });
            }
        }
        let mut v = vec![1; n];
        v[zero_at] = 0;
        v[two_at] = 2;
        Ok(Self::new(v))
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> i64 {
        self.sum
    }

    pub fn max(&self) -> i64 {
        self.values.iter().copied().max().unwrap_or(0)
    }

    pub fn min(&self) -> i64 {
        self.values.iter().copied().min().unwrap_or(0)
    }

    /// Quantized consensus set: all opinions within one unit.
    pub fn is_consensus(&self) -> bool {
        self.max() - self.min() <= 1
    }

    pub fn is_nontrivial(&self, i: usize, j: usize) -> bool {
        (self.values[i] - self.values[j]).abs() >= 2
    }

    pub fn quantized_update(&mut self, i: usize, j: usize) -> Result<UpdateKind> {
        if i == j {
            return Err(Error::SameNode(i));
        }
        let n = self.values.len();
        for node in [i, j] {
            if node >= n {
                return Err(Error::NodeOutOfRange { node, n });
            }
        }
        let (xi, xj) = (self.values[i], self.values[j]);
        let kind = match (xi - xj).abs() {
            0 => return Ok(UpdateKind::Unchanged),
            1 => UpdateKind::Swap,
            _ => UpdateKind::Nontrivial,
        };
        let step = (xj - xi).signum();
        self.values[i] += step;
        self.values[j] -= step;
        Ok(kind)
    }

    pub fn updated(&self, i: usize, j: usize) -> Result<Self> {
        let mut next = self.clone();
        next.quantized_update(i, j)?;
        Ok(next)
    }

    /// `n^2 * V(x)` as an exact integer, where `V` is the squared distance
    /// to the (conserved) mean.
    pub fn lyapunov_scaled(&self) -> i128 {
        let n = self.values.len() as i128;
        let s = self.sum as i128;
        self.values
            .iter()
            .map(|&x| {
                let d = n * x as i128 - s;
                d * d
            })
            .sum()
    }

    pub fn lyapunov(&self) -> f64 {
        let n = self.values.len() as f64;
        if n == 0.0 {
            return 0.0;
        }
        self.lyapunov_scaled() as f64 / (n * n)
    }

    /// `ceil((L - l)^2 n / 8)`: enough nontrivial updates to reach consensus.
    pub fn nontrivial_budget(&self) -> u64 {
        let spread = (self.max() - self.min()) as u64;
        (spread * spread * self.values.len() as u64).div_ceil(8)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    pub max_steps: u64,
    pub record_lyapunov: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            max_steps: DEFAULT_MAX_STEPS,
            record_lyapunov: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub steps_to_consensus: u64,
    pub nontrivial_updates: u64,
    /// Lyapunov value before the first step and after every step.
    pub lyapunov_series: Option<Vec<f64>>,
    pub terminated: bool,
    pub seed: u64,
    pub final_profile: OpinionProfile,
}

/// Runs the protocol until the consensus set is reached or `max_steps`
/// edges have been drawn. The schedule is queried once per step.
pub fn run_consensus<S: Schedule + ?Sized>(
    schedule: &S,
    x0: &OpinionProfile,
    seed: u64,
    opts: RunOptions,
) -> Result<RunTrace> {
    let mut rng = stream_rng(seed, 0);
    run_consensus_with(schedule, x0, &mut rng, seed, opts)
}

pub fn run_consensus_with<S: Schedule + ?Sized, R: Rng>(
    schedule: &S,
    x0: &OpinionProfile,
    rng: &mut R,
    seed: u64,
    opts: RunOptions,
) -> Result<RunTrace> {
    let n = schedule.n();
    if x0.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: x0.len(),
        });
    }
    let mut x = x0.clone();
    // value -> multiplicity, so max - min is available after every update
    let mut hist: BTreeMap<i64, usize> = BTreeMap::new();
    for &v in x.values() {
        *hist.entry(v).or_default() += 1;
    }
    let spread = |h: &BTreeMap<i64, usize>| match (h.first_key_value(), h.last_key_value()) {
        (Some((lo, _)), Some((hi, _))) => hi - lo,
        _ => 0,
    };
    let mut series = opts.record_lyapunov.then(|| vec![x.lyapunov()]);
    let mut nontrivial = 0;
    let mut t = 0;
    while spread(&hist) > 1 && t < opts.max_steps {
        let g = schedule.graph_at(t);
        g.ensure_connected()?;
        let (i, j) = g.edge(rng.gen_range(0..g.m()));
        let (xi, xj) = (x.values[i], x.values[j]);
        let kind = x.quantized_update(i, j)?;
        if kind != UpdateKind::Unchanged {
            for (old, new) in [(xi, x.values[i]), (xj, x.values[j])] {
                if old != new {
                    let c = hist.get_mut(&old).expect("tracked value");
                    *c -= 1;
                    if *c == 0 {
                        hist.remove(&old);
                    }
                    *hist.entry(new).or_default() += 1;
                }
            }
        }
        if kind == UpdateKind::Nontrivial {
            nontrivial += 1;
        }
        if let Some(s) = series.as_mut() {
            s.push(x.lyapunov());
        }
        t += 1;
    }
    Ok(RunTrace {
        steps_to_consensus: t,
        nontrivial_updates: nontrivial,
        lyapunov_series: series,
        terminated: spread(&hist) <= 1,
        seed,
        final_profile: x,
    })
}
