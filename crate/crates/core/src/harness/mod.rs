//! Experiment orchestration: the standard graph corpus, the ratio sweep,
//! the identity suite and config-driven runs.

mod config;
pub mod report;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{
    run_experiment, simulate_table, ExperimentConfig, ExperimentKind, ExperimentResult, ExperimentSection, SimulateSection,
    SuiteSection, SweepSection, TvSection, WalkersSection,
};
pub use report::{fmt_num, OutputFormat, Table, CSV_SCHEMA_LINE};

use crate::bounds::{bd_hitting_bound, birth_death_chain, theorem3_bounds, BdReading, BoundCheck};
use crate::error::{Error, Result};
use crate::exact::{exact_meeting_times, harmonic_residual, lazy_hitting_table, lazy_transition_matrix, potential_table};
use crate::graph::{load_graph, Graph, GraphFamily};
use crate::spectral::{contraction_factor, kbar_report, laplacian_max_eig_report, product_spectrum_check, random_target_residual};
use crate::walkers::{meeting_tally, Process, WalkerPair, DEFAULT_STEP_CAP};
use report::{num, opt_num, text};

/// Family specs of the standard corpus.
pub const STANDARD_CORPUS: &[&str] = &[
    "cycle:4",
    "cycle:5",
    "cycle:6",
    "cycle:7",
    "cycle:8",
    "line:3",
    "line:4",
    "line:5",
    "line:6",
    "line:7",
    "line:8",
    "complete:4",
    "complete:5",
    "petersen",
    "lollipop:12",
    "semi_regular:n=10,k=4",
    "double_star:i=3,k=2,n=8",
];

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub graph: Graph,
}

pub fn standard_corpus() -> Result<Vec<CorpusEntry>> {
    load_corpus(STANDARD_CORPUS.iter().copied(), None)
}

/// Family specs or graph files; relative files resolve against `base_dir`.
pub fn load_corpus<'a>(specs: impl IntoIterator<Item = &'a str>, base_dir: Option<&Path>) -> Result<Vec<CorpusEntry>> {
    specs
        .into_iter()
        .map(|s| {
            Ok(CorpusEntry {
                name: s.to_string(),
                graph: load_graph(s, base_dir)?,
            })
        })
        .collect()
}

/// Corpus members on which every edge has degree sum at most `m`.
pub fn assumption_corpus() -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    for e in standard_corpus()? {
        if e.graph.assumption_check()?.holds {
            out.push(e);
        }
    }
    Ok(out)
}

/// Exact solves are used up to this many nodes in the ratio sweep.
pub const SWEEP_EXACT_MAX_N: usize = 24;

/// Start pairs tried per graph in Monte Carlo sweep rows.
pub const SWEEP_MC_STARTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepFamily {
    Line,
    Star,
    Lollipop,
    SemiRegular,
}

impl SweepFamily {
    pub fn all() -> [SweepFamily; 4] {
        [SweepFamily::Line, SweepFamily::Star, SweepFamily::Lollipop, SweepFamily::SemiRegular]
    }

    /// `None` when the family has no member on `n` nodes.
    pub fn graph(&self, n: usize) -> Option<Graph> {
        let fam = match self {
            SweepFamily::Line => GraphFamily::Line { n },
            SweepFamily::Star => GraphFamily::Star { n },
            SweepFamily::Lollipop => GraphFamily::Lollipop { n },
            SweepFamily::SemiRegular => GraphFamily::SemiRegular { n, k: 4 },
        };
        fam.generate().ok()
    }
}

impl FromStr for SweepFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line" => Ok(SweepFamily::Line),
            "star" => Ok(SweepFamily::Star),
            "lollipop" => Ok(SweepFamily::Lollipop),
            "semi_regular" => Ok(SweepFamily::SemiRegular),
            other => Err(Error::Parse(format!(
                "sweep family must be line, star, lollipop or semi_regular, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for SweepFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepFamily::Line => "line",
            SweepFamily::Star => "star",
            SweepFamily::Lollipop => "lollipop",
            SweepFamily::SemiRegular => "semi_regular",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    Exact,
    Mc,
    /// Exact up to [`SWEEP_EXACT_MAX_N`] nodes, Monte Carlo beyond.
    #[default]
    Auto,
}

impl FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SweepMode::Exact),
            "mc" => Ok(SweepMode::Mc),
            "auto" => Ok(SweepMode::Auto),
            other => Err(Error::Parse(format!("sweep mode must be exact, mc or auto, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub family: SweepFamily,
    pub n: usize,
    pub m: usize,
    pub diameter: usize,
    pub tbar: f64,
    /// Standard error of the Monte Carlo estimate; `None` for exact rows.
    pub stderr: Option<f64>,
    pub exact: bool,
    /// `tbar / (m n D)`.
    pub ratio: f64,
}

/// Pairs at maximal distance, in lexicographic order, at most `limit`.
fn diametral_pairs(g: &Graph, limit: usize) -> Result<Vec<WalkerPair>> {
    let dist = g.distances()?;
    let d = g.diameter()?;
    Ok(WalkerPair::all(g.n())
        .into_iter()
        .filter(|w| dist[w.pos0][w.pos2] == d)
        .take(limit)
        .collect())
}

/// `T / (m n D)` per family and node count. Node counts a family cannot
/// realise are skipped.
pub fn sweep_ratio(
    families: &[SweepFamily],
    ns: impl IntoIterator<Item = usize>,
    mode: SweepMode,
    trials: u64,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let ns: Vec<usize> = ns.into_iter().collect();
    let mut jobs = Vec::new();
    for &family in families {
        for &n in &ns {
            if let Some(g) = family.graph(n) {
                jobs.push((family, n, g));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(family, n, g)| {
            let exact = match mode {
                SweepMode::Exact => {
                    if n > SWEEP_EXACT_MAX_N {
                        return Err(Error::Config(format!(
                            "exact sweep is limited to n <= {SWEEP_EXACT_MAX_N}, got {n}"
                        )));
                    }
                    true
                }
                SweepMode::Mc => false,
                SweepMode::Auto => n <= SWEEP_EXACT_MAX_N,
            };
            let (tbar, stderr) = if exact {
                (exact_meeting_times(&g, Process::Original)?.max(), None)
            } else {
                let row_seed = crate::rng::derive_seed(seed, (n as u64) << 8 | family as u64);
                let mut best = (f64::NEG_INFINITY, 0.0);
                for w in diametral_pairs(&g, SWEEP_MC_STARTS)? {
                    let t = meeting_tally(Process::Original, &g, w, trials, row_seed, DEFAULT_STEP_CAP)?;
                    if t.mean() > best.0 {
                        best = (t.mean(), t.stderr());
                    }
                }
                (best.0, Some(best.1))
            };
            let (m, d) = (g.m(), g.diameter()?);
            Ok(SweepRow {
                family,
                n,
                m,
                diameter: d,
                tbar,
                stderr,
                exact,
                ratio: tbar / (m * n * d) as f64,
            })
        })
        .collect()
}

pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(["family", "n", "m", "diameter", "tbar", "stderr", "exact", "ratio"]);
    for r in rows {
        t.push(vec![
            text(r.family),
            text(r.n),
            text(r.m),
            text(r.diameter),
            num(r.tbar),
            opt_num(r.stderr),
            text(r.exact),
            num(r.ratio),
        ]);
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// A failure is an assertion failure.
    Hard,
    /// Reported only; a raised flag never fails the run.
    Diagnostic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub graph: String,
    pub check: String,
    pub kind: CheckKind,
    pub value: f64,
    pub limit: f64,
    /// For hard checks: passed. For diagnostics: no flag raised.
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
}

impl SuiteReport {
    pub fn hard_failures(&self) -> impl Iterator<Item = &SuiteRow> {
        self.rows.iter().filter(|r| r.kind == CheckKind::Hard && !r.ok)
    }

    pub fn flags(&self) -> impl Iterator<Item = &SuiteRow> {
        self.rows.iter().filter(|r| r.kind == CheckKind::Diagnostic && !r.ok)
    }

    pub fn passed(&self) -> bool {
        self.hard_failures().next().is_none()
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(["graph", "check", "kind", "value", "limit", "ok"]);
        for r in &self.rows {
            t.push(vec![
                r.graph.clone(),
                r.check.clone(),
                text(match r.kind {
                    CheckKind::Hard => "hard",
                    CheckKind::Diagnostic => "diagnostic",
                }),
                num(r.value),
                num(r.limit),
                text(r.ok),
            ]);
        }
        t
    }
}

/// Runs every exact identity and bound on one graph. Identities that need
/// the degree-sum condition are skipped when it fails.
pub fn suite_for_graph(name: &str, g: &Graph, tol: f64) -> Result<Vec<SuiteRow>> {
    let mut rows = Vec::new();
    let mut hard = |check: &str, value: f64, limit: f64| {
        rows.push(SuiteRow {
            graph: name.to_string(),
            check: check.to_string(),
            kind: CheckKind::Hard,
            value,
            limit,
            ok: value <= limit,
        });
    };
    let from_bound = |c: &BoundCheck| (c.lhs - c.rhs, tol * c.rhs.abs().max(1.0));
    let assumption = g.assumption_check()?.holds;
    let original = exact_meeting_times(g, Process::Original)?;
    let tbar = original.max();

    for c in &theorem3_bounds(g, tol)?.checks {
        let (v, l) = from_bound(c);
        hard(&format!("sandwich: {}", c.name), v, l);
    }
    let rt = random_target_residual(&lazy_transition_matrix(g)?)?;
    hard("random target residual", rt.residual, tol);
    if g.n() <= crate::spectral::MAX_PAIR_SPECTRUM_N {
        hard("product spectrum residual", product_spectrum_check(g)?.residual, tol);
    }
    for reading in [BdReading::ClassMass, BdReading::SingleTarget] {
        let chain = birth_death_chain(g, reading)?;
        let bd = bd_hitting_bound(&chain, chain.top())?;
        hard(&format!("tbar - birth-death bound ({reading})"), tbar - bd, tol * bd.max(1.0));
        let min_down = chain.classes[1..].iter().map(|c| c.p_down).fold(f64::INFINITY, f64::min);
        let inv_m = 1.0 / g.m() as f64;
        hard(&format!("1/m - min p_down ({reading})"), inv_m - min_down, tol);
    }

    if assumption {
        let virt = exact_meeting_times(g, Process::Virtual)?;
        let hz = lazy_hitting_table(g)?;
        let half = hz.map(|h| 0.5 * h);
        hard("max |M - H_Z/2|", virt.max_abs_diff(&half), tol);
        let mmax = virt.max();
        hard("max M - tbar", mmax - tbar, tol * tbar.max(1.0));
        hard("tbar - 2 max M", tbar - 2.0 * mmax, tol * tbar.max(1.0));
        let phi = potential_table(g)?;
        let f = phi.zip_with(&virt, |p, m| 0.5 * p - m);
        hard("harmonic residual of Phi/2 - M", harmonic_residual(&f, g)?, 1e-9);
        let k = kbar_report(g)?;
        hard("|alpha2(Kbar) - alpha2(P)|", k.second_residual, tol);
        hard("|alpha_last(Kbar) - (1 - 2 alpha1(L)/m)|", k.last_residual, tol);
        let c = contraction_factor(g)?;
        hard("alpha2(P) - (1 - 1/(2nmD))", c.alpha2_p - c.claimed, tol);
        let lm = laplacian_max_eig_report(g)?;
        hard("alpha1(L) - max degree sum", lm.alpha1 - lm.degree_sum_bound, tol);

        let mut diag = |check: &str, value: f64, limit: f64, ok: bool| {
            rows.push(SuiteRow {
                graph: name.to_string(),
                check: check.to_string(),
                kind: CheckKind::Diagnostic,
                value,
                limit,
                ok,
            });
        };
        diag("alpha1(L) vs m - 1/2", lm.alpha1, lm.refined_bound, !lm.violated);
        diag("contraction factor vs 1 - 1/(2nmD)", c.exact, c.claimed, !c.flagged);
        diag("Kbar nonnegative", f64::from(u8::from(k.nonnegative)), 1.0, k.nonnegative);
    }
    Ok(rows)
}

pub fn run_suite(corpus: &[CorpusEntry], tol: f64) -> Result<SuiteReport> {
    let per_graph = corpus
        .par_iter()
        .map(|e| suite_for_graph(&e.name, &e.graph, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport {
        rows: per_graph.into_iter().flatten().collect(),
    })
}
