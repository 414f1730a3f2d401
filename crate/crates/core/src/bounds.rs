//! Closed-form bound calculators checked against the exact oracles, and the
//! distance-class birth-and-death chain that dominates the pair walk.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{exact_meeting_times, max_lazy_hitting};
use crate::graph::{Graph, GraphFamily};
use crate::linalg;
use crate::walkers::{original_step, Process, Step, WalkerPair};

/// Largest `n` for which the `n(n-1)`-state meeting-time solve is run.
pub const EXACT_MEETING_MAX_N: usize = 40;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// One inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub slack: f64,
    /// `lhs > rhs + tol * max(1, |rhs|)`.
    pub violated: bool,
}

impl BoundCheck {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        BoundCheck {
            name: name.into(),
            lhs,
            rhs,
            slack: rhs - lhs,
            violated: lhs > rhs + tol * rhs.abs().max(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub subject: String,
    /// Named quantities in insertion order.
    pub values: Vec<(String, f64)>,
    pub checks: Vec<BoundCheck>,
}

impl BoundReport {
    pub fn new(subject: impl Into<String>) -> Self {
        BoundReport {
            subject: subject.into(),
            values: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| k == name).map(|&(_, v)| v)
    }

    pub fn check(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn any_violated(&self) -> bool {
        self.checks.iter().any(|c| c.violated)
    }

    fn push_value(&mut self, name: &str, v: f64) {
        self.values.push((name.to_string(), v));
    }
}

fn exact_tbar(g: &Graph) -> Result<Option<f64>> {
    if g.n() > EXACT_MEETING_MAX_N {
        return Ok(None);
    }
    Ok(Some(exact_meeting_times(g, Process::Original)?.max()))
}

/// `H_Z / 2 <= T <= H_Z <= 2 n m D`, where `T` is the exact maximum
/// meeting time of the original process. The middle inequality is only
/// checked when every edge has degree sum at most `m`.
pub fn theorem3_bounds(g: &Graph, tol: f64) -> Result<BoundReport> {
    g.ensure_connected()?;
    let hz = max_lazy_hitting(g)?;
    let (n, m, d) = (g.n() as f64, g.m() as f64, g.diameter()? as f64);
    let nmd2 = 2.0 * n * m * d;
    let mut r = BoundReport::new(g.to_string());
    r.push_value("half_hz", 0.5 * hz);
    r.push_value("hz", hz);
    r.push_value("2nmd", nmd2);
    r.checks.push(BoundCheck::new("hz <= 2nmd", hz, nmd2, tol));
    if let Some(t) = exact_tbar(g)? {
        r.push_value("tbar", t);
        r.checks.push(BoundCheck::new("half_hz <= tbar", 0.5 * hz, t, tol));
        if g.assumption_check()?.holds {
            r.checks.push(BoundCheck::new("tbar <= hz", t, hz, tol));
        }
    }
    Ok(r)
}

/// Maximum meeting time on a star with `m` edges: `m(m+2)/2`.
pub fn star_closed_form(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::Family(format!("star closed form needs m >= 2, got {m}")));
    }
    let m = m as f64;
    Ok(m * (m + 2.0) / 2.0)
}

/// The quoted star value `n(n-1)/2` for the lazy walk. The exact maximum
/// hitting time is `n(n-1)`; see [`star_lazy_hitting_exact`].
pub fn star_lazy_hitting_claim(n: usize) -> f64 {
    (n * n.saturating_sub(1)) as f64 / 2.0
}

/// `max H_Z` on the `n`-node star: leaf to leaf, `(n-1) + (n-1)^2`.
pub fn star_lazy_hitting_exact(n: usize) -> f64 {
    (n * n.saturating_sub(1)) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BdReading {
    /// `p_down = min P{x -> y}` over single targets `y` one class lower and
    /// `p_stay = min P{x -> x}`.
    SingleTarget,
    /// `p_down = min_x P{x -> S_(l-1)}` and `p_stay = min_x P{x -> S_l}`.
    #[default]
    ClassMass,
}

impl FromStr for BdReading {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single-target" | "single_target" => Ok(BdReading::SingleTarget),
            "class-mass" | "class_mass" => Ok(BdReading::ClassMass),
            other => Err(Error::Parse(format!("unknown birth-death reading '{other}'"))),
        }
    }
}

impl fmt::Display for BdReading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BdReading::SingleTarget => "single-target",
            BdReading::ClassMass => "class-mass",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BdClass {
    pub p_down: f64,
    pub p_stay: f64,
    pub p_up: f64,
}

/// Classes `S_0 .. S_D` by walker distance; `S_0` is absorbing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BdChain {
    pub reading: BdReading,
    pub classes: Vec<BdClass>,
}

impl BdChain {
    pub fn new(reading: BdReading, classes: Vec<BdClass>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::InvalidChain("birth-death chain needs at least one class".into()));
        }
        for (l, c) in classes.iter().enumerate() {
            let probs = [c.p_down, c.p_stay, c.p_up];
            if probs.iter().any(|&p| p < 0.0) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidChain(format!("class {l} is not a distribution: {probs:?}")));
            }
        }
        if classes.last().is_some_and(|c| c.p_up > 0.0) {
            return Err(Error::InvalidChain("top class cannot move up".into()));
        }
        Ok(BdChain { reading, classes })
    }

    /// Index of the top class, the diameter.
    pub fn top(&self) -> usize {
        self.classes.len() - 1
    }
}

/// Builds the chain from the exact one-step law of the original process
/// over all ordered pair states.
pub fn birth_death_chain(g: &Graph, reading: BdReading) -> Result<BdChain> {
    let dist = g.distances()?;
    let diameter = g.diameter()?;
    let n = g.n();
    let m = g.m() as f64;
    let mut down = vec![f64::INFINITY; diameter + 1];
    let mut stay = vec![f64::INFINITY; diameter + 1];
    let mut next_prob = vec![0.0; n * n];
    for w in WalkerPair::all(n) {
        let l = dist[w.pos0][w.pos2];
        next_prob.iter_mut().for_each(|p| *p = 0.0);
        let mut met = 0.0;
        for edge in 0..g.m() {
            match original_step(g, w, edge) {
                Step::Met => met += 1.0 / m,
                Step::At(v) => next_prob[v.pos0 * n + v.pos2] += 1.0 / m,
            }
        }
        let (d, s) = match reading {
            BdReading::SingleTarget => {
                let mut d = if l == 1 { met } else { f64::INFINITY };
                let mut s = 0.0;
                for (i, &p) in next_prob.iter().enumerate() {
                    let (a, b) = (i / n, i % n);
                    if p > 0.0 && dist[a][b] + 1 == l {
                        d = d.min(p);
                    }
                    if (a, b) == (w.pos0, w.pos2) {
                        s = p;
                    }
                }
                (if d.is_finite() { d } else { 0.0 }, s)
            }
            BdReading::ClassMass => {
                let mut d = if l == 1 { met } else { 0.0 };
                let mut s = 0.0;
                for (i, &p) in next_prob.iter().enumerate() {
                    let dl = dist[i / n][i % n];
                    if dl + 1 == l {
                        d += p;
                    } else if dl == l {
                        s += p;
                    }
                }
                (d, s)
            }
        };
        down[l] = down[l].min(d);
        stay[l] = stay[l].min(s);
    }
    let mut classes = Vec::with_capacity(diameter + 1);
    classes.push(BdClass {
        p_down: 0.0,
        p_stay: 1.0,
        p_up: 0.0,
    });
    for l in 1..=diameter {
        let (d, mut s) = (down[l], stay[l]);
        let mut up = 1.0 - d - s;
        assert!(up >= -1e-12, "class {l}: p_down + p_stay = {} > 1", d + s);
        up = up.max(0.0);
        if l == diameter {
            s += up;
            up = 0.0;
        }
        classes.push(BdClass {
            p_down: d,
            p_stay: s,
            p_up: up,
        });
    }
    BdChain::new(reading, classes)
}

/// Expected time to reach `S_0` from class `start`; infinite when some
/// class at or below the top cannot move down.
pub fn bd_hitting_bound(chain: &BdChain, start: usize) -> Result<f64> {
    let top = chain.top();
    if start > top {
        return Err(Error::NodeOutOfRange { node: start, n: top + 1 });
    }
    if start == 0 {
        return Ok(0.0);
    }
    if chain.classes[1..].iter().any(|c| c.p_down <= 0.0) {
        return Ok(f64::INFINITY);
    }
    // unknowns h_1..h_D: (1 - stay) h_l - down h_(l-1) - up h_(l+1) = 1
    let inner = &chain.classes[1..];
    let diag: Vec<f64> = inner.iter().map(|c| 1.0 - c.p_stay).collect();
    let lower: Vec<f64> = inner.iter().skip(1).map(|c| -c.p_down).collect();
    let upper: Vec<f64> = inner[..top - 1].iter().map(|c| -c.p_up).collect();
    let h = linalg::solve_tridiagonal(&lower, &diag, &upper, &vec![1.0; top])?;
    Ok(h[start - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorollaryFamily {
    Cycle,
    Line,
}

impl FromStr for CorollaryFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cycle" => Ok(CorollaryFamily::Cycle),
            "line" | "path" => Ok(CorollaryFamily::Line),
            other => Err(Error::Parse(format!("closed forms exist for cycle and line, not '{other}'"))),
        }
    }
}

pub fn cycle_formula(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) * (n - 3.0) / 16.0 + (2.0 * n + 1.0) / 2.0
}

pub fn line_upper_formula(n: usize) -> f64 {
    let n = n as f64;
    (n - 1.0).powi(2) * (n + 1.0) / 4.0
}

pub fn line_lower_formula(n: usize) -> f64 {
    let n = n as f64;
    (n + 3.0) / 8.0 * (n - 1.0).powi(2)
}

/// Closed forms for cycles and lines next to the exact maximum meeting
/// time. Failures show up as violated checks.
pub fn corollary_formulas(family: CorollaryFamily, n: usize, tol: f64) -> Result<BoundReport> {
    if n < 3 {
        return Err(Error::Family(format!("closed forms need n >= 3, got {n}")));
    }
    let g = match family {
        CorollaryFamily::Cycle => GraphFamily::Cycle { n },
        CorollaryFamily::Line => GraphFamily::Line { n },
    }
    .generate()?;
    let mut r = BoundReport::new(g.to_string());
    let tbar = exact_tbar(&g)?;
    if let Some(t) = tbar {
        r.push_value("tbar", t);
    }
    match family {
        CorollaryFamily::Cycle => {
            let f = cycle_formula(n);
            r.push_value("cycle_formula", f);
            if let Some(t) = tbar {
                r.checks.push(BoundCheck::new("tbar <= cycle_formula", t, f, tol));
            }
        }
        CorollaryFamily::Line => {
            let (lo, hi) = (line_lower_formula(n), line_upper_formula(n));
            r.push_value("line_lower", lo);
            r.push_value("line_upper", hi);
            if let Some(t) = tbar {
                r.checks.push(BoundCheck::new("line_lower <= tbar", lo, t, tol));
                r.checks.push(BoundCheck::new("tbar <= line_upper", t, hi, tol));
            }
        }
    }
    Ok(r)
}

/// `32 n^2 m_max D_max (1 + ln n)`.
pub fn time_varying_bound(n: usize, m_max: usize, d_max: usize) -> f64 {
    let nf = n as f64;
    32.0 * nf * nf * m_max as f64 * d_max as f64 * (1.0 + nf.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleStarPoint {
    pub i: usize,
    pub k: usize,
    pub m: usize,
    pub n: usize,
    pub tbar: f64,
    /// `tbar / m^2`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleStarFit {
    pub points: Vec<DoubleStarPoint>,
    /// Smallest `c` with `tbar <= c m^2` over all points.
    pub c: f64,
}

/// Exact maximum meeting times over admissible double stars with
/// `i` in `is`, `k` in `1..i` and `m` in `ms`.
pub fn double_star_fit(
    is: std::ops::RangeInclusive<usize>,
    ms: std::ops::RangeInclusive<usize>,
) -> Result<DoubleStarFit> {
    let mut points = Vec::new();
    for i in is {
        for k in 1..i {
            for m in ms.clone() {
                if m < i + k {
                    continue;
                }
                let n = m + 1 - k;
                let g = GraphFamily::DoubleStar { i, k, n }.generate()?;
                debug_assert_eq!(g.m(), m);
                let tbar = exact_meeting_times(&g, Process::Original)?.max();
                points.push(DoubleStarPoint {
                    i,
                    k,
                    m,
                    n,
                    tbar,
                    ratio: tbar / (m * m) as f64,
                });
            }
        }
    }
    if points.is_empty() {
        return Err(Error::Family("no admissible double-star parameters".into()));
    }
    let c = points.iter().map(|p| p.ratio).fold(0.0, f64::max);
    Ok(DoubleStarFit { points, c })
}
