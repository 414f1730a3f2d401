//! Exact linear-algebra oracles.
//!
//! Everything here is a dense solve: hitting times of the lazy single-token
//! walk, effective resistances, visit counts, the potential `Phi`, and the
//! expected meeting times of both coupled processes on the ordered-pair
//! state space. The pair chains are assembled by enumerating every edge from
//! every pair state with the same step function the simulator uses, so no
//! closed form is assumed anywhere.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg;
use crate::walkers::{original_step, virtual_edge_distribution, EdgeDistribution, Process, Step, WalkerPair};

const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainKind {
    Stochastic,
    Laplacian,
    SubStochastic,
}

/// How state indices map to graph objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateLabels {
    /// State `i` is vertex `i`.
    Vertices(usize),
    /// State `i` is the ordered pair `(i / n, i % n)`.
    Pairs(usize),
}

impl StateLabels {
    pub fn len(&self) -> usize {
        match *self {
            StateLabels::Vertices(n) => n,
            StateLabels::Pairs(n) => n * n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn label(&self, i: usize) -> String {
        match *self {
            StateLabels::Vertices(_) => i.to_string(),
            StateLabels::Pairs(n) => format!("({},{})", i / n, i % n),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainMatrix {
    labels: StateLabels,
    matrix: DMatrix<f64>,
    kind: ChainKind,
}

impl ChainMatrix {
    pub fn new(labels: StateLabels, matrix: DMatrix<f64>, kind: ChainKind) -> Result<Self> {
        let k = labels.len();
        if matrix.nrows() != k || matrix.ncols() != k {
            return Err(Error::Dimension {
                expected: k,
                got: matrix.nrows(),
            });
        }
        for (r, row) in matrix.row_iter().enumerate() {
            let sum: f64 = row.iter().sum();
            match kind {
                ChainKind::Stochastic | ChainKind::SubStochastic => {
                    if let Some(&value) = row.iter().find(|&&x| x < 0.0) {
                        return Err(Error::NegativeEntry { row: r, value });
                    }
                    let ok = if kind == ChainKind::Stochastic {
                        (sum - 1.0).abs() <= ROW_SUM_TOL
                    } else {
                        sum <= 1.0 + ROW_SUM_TOL
                    };
                    if !ok {
                        return Err(Error::InvalidChain(format!("row {r} sums to {sum}")));
                    }
                }
                ChainKind::Laplacian => {
                    if sum.abs() > ROW_SUM_TOL * matrix.amax().max(1.0) {
                        return Err(Error::InvalidChain(format!("Laplacian row {r} sums to {sum}")));
                    }
                }
            }
        }
        if kind == ChainKind::Laplacian && linalg::symmetry_defect(&matrix) > ROW_SUM_TOL {
            return Err(Error::InvalidChain("Laplacian is not symmetric".into()));
        }
        Ok(ChainMatrix { labels, matrix, kind })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn kind(&self) -> ChainKind {
        self.kind
    }

    pub fn labels(&self) -> StateLabels {
        self.labels
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        linalg::symmetry_defect(&self.matrix) <= tol
    }

    /// Every state can reach `target` through positive entries.
    fn reaches(&self, target: usize) -> bool {
        let k = self.dim();
        let mut seen = vec![false; k];
        seen[target] = true;
        let mut stack = vec![target];
        while let Some(y) = stack.pop() {
            for x in 0..k {
                if !seen[x] && self.matrix[(x, y)] > 0.0 {
                    seen[x] = true;
                    stack.push(x);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// The single-token marginal of uniform edge selection: stay with
/// probability `1 - d(x)/m`, otherwise cross one of the `d(x)` edges.
pub fn lazy_transition_matrix(g: &Graph) -> Result<ChainMatrix> {
    g.ensure_connected()?;
    let n = g.n();
    let m = g.m() as f64;
    let mut p = DMatrix::zeros(n, n);
    for x in 0..n {
        p[(x, x)] = 1.0 - g.degree(x) as f64 / m;
        for &y in g.neighbors(x) {
            p[(x, y)] = 1.0 / m;
        }
    }
    ChainMatrix::new(StateLabels::Vertices(n), p, ChainKind::Stochastic)
}

pub fn simple_walk_matrix(g: &Graph) -> Result<ChainMatrix> {
    g.ensure_connected()?;
    let n = g.n();
    let mut p = DMatrix::zeros(n, n);
    for x in 0..n {
        let d = g.degree(x) as f64;
        for &y in g.neighbors(x) {
            p[(x, y)] = 1.0 / d;
        }
    }
    ChainMatrix::new(StateLabels::Vertices(n), p, ChainKind::Stochastic)
}

pub fn laplacian_matrix(g: &Graph) -> Result<ChainMatrix> {
    ChainMatrix::new(StateLabels::Vertices(g.n()), g.laplacian(), ChainKind::Laplacian)
}

/// Expected steps to first reach `target` from every state.
pub fn hitting_times(p: &ChainMatrix, target: usize) -> Result<Vec<f64>> {
    let k = p.dim();
    if target >= k {
        return Err(Error::NodeOutOfRange { node: target, n: k });
    }
    if !p.reaches(target) {
        return Err(Error::Singular);
    }
    let keep: Vec<usize> = (0..k).filter(|&x| x != target).collect();
    let a = DMatrix::from_fn(keep.len(), keep.len(), |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - p.matrix[(keep[i], keep[j])]
    });
    let h = linalg::solve(a, DVector::from_element(keep.len(), 1.0))?;
    let mut out = vec![0.0; k];
    for (i, &x) in keep.iter().enumerate() {
        out[x] = h[i];
    }
    Ok(out)
}

/// `H[(x, z)]` = expected hitting time of `z` from `x`.
pub fn hitting_table(p: &ChainMatrix) -> Result<DMatrix<f64>> {
    let k = p.dim();
    let mut table = DMatrix::zeros(k, k);
    for z in 0..k {
        for (x, h) in hitting_times(p, z)?.into_iter().enumerate() {
            table[(x, z)] = h;
        }
    }
    Ok(table)
}

/// Stationary distribution of an irreducible stochastic matrix.
pub fn stationary_distribution(p: &ChainMatrix) -> Result<Vec<f64>> {
    let k = p.dim();
    if k == 0 {
        return Ok(Vec::new());
    }
    // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1
    let mut a = p.matrix.transpose() - DMatrix::identity(k, k);
    for j in 0..k {
        a[(k - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(k);
    b[k - 1] = 1.0;
    Ok(linalg::solve(a, b)?.iter().copied().collect())
}

/// Effective resistance with unit resistors, by grounding `y` and injecting
/// a unit current at `x`.
pub fn effective_resistance(g: &Graph, x: usize, y: usize) -> Result<f64> {
    g.ensure_connected()?;
    let n = g.n();
    for node in [x, y] {
        if node >= n {
            return Err(Error::NodeOutOfRange { node, n });
        }
    }
    if x == y {
        return Ok(0.0);
    }
    let l = g.laplacian();
    let keep: Vec<usize> = (0..n).filter(|&v| v != y).collect();
    let reduced = DMatrix::from_fn(n - 1, n - 1, |i, j| l[(keep[i], keep[j])]);
    let mut rhs = DVector::zeros(n - 1);
    let xi = keep.iter().position(|&v| v == x).unwrap();
    rhs[xi] = 1.0;
    let v = linalg::solve(reduced, rhs)?;
    Ok(v[xi])
}

/// All-pairs effective resistance from the Laplacian pseudoinverse,
/// `(L + J/n)^-1 - J/n`.
pub fn resistance_table(g: &Graph) -> Result<DMatrix<f64>> {
    g.ensure_connected()?;
    let n = g.n();
    let shift = 1.0 / n as f64;
    let gamma = linalg::inverse(g.laplacian().add_scalar(shift))?;
    Ok(DMatrix::from_fn(n, n, |x, y| {
        gamma[(x, x)] + gamma[(y, y)] - 2.0 * gamma[(x, y)]
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoltageProfile {
    /// Expected visits of the simple walk from `a` before hitting `z`,
    /// divided by the degree.
    pub from_visits: Vec<f64>,
    /// `(R(a,z) + R(z,x) - R(a,x)) / 2`.
    pub from_resistance: Vec<f64>,
    pub max_discrepancy: f64,
}

pub fn visit_voltage_profile(g: &Graph, a: usize, z: usize) -> Result<VoltageProfile> {
    if a == z {
        return Err(Error::SameNode(a));
    }
    let n = g.n();
    let p = simple_walk_matrix(g)?;
    for node in [a, z] {
        if node >= n {
            return Err(Error::NodeOutOfRange { node, n });
        }
    }
    let keep: Vec<usize> = (0..n).filter(|&v| v != z).collect();
    let fundamental = linalg::inverse(DMatrix::from_fn(n - 1, n - 1, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - p.matrix[(keep[i], keep[j])]
    }))?;
    let ai = keep.iter().position(|&v| v == a).unwrap();
    let mut from_visits = vec![0.0; n];
    for (j, &x) in keep.iter().enumerate() {
        from_visits[x] = fundamental[(ai, j)] / g.degree(x) as f64;
    }
    let r = resistance_table(g)?;
    let from_resistance: Vec<f64> = (0..n)
        .map(|x| 0.5 * (r[(a, z)] + r[(z, x)] - r[(a, x)]))
        .collect();
    let max_discrepancy = from_visits
        .iter()
        .zip(&from_resistance)
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max);
    Ok(VoltageProfile {
        from_visits,
        from_resistance,
        max_discrepancy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResistanceHitting {
    /// `1/2 sum_x d(x) [R(a,z) + R(z,x) - R(a,x)]`, simple walk.
    pub simple: f64,
    /// `m/2 sum_x [R(a,z) + R(z,x) - R(a,x)]`, lazy walk.
    pub lazy_corrected: f64,
    /// `sum_x (m + d(x))/2 [R(a,z) + R(z,x) - R(a,x)]`, the variant with the
    /// extra jump-step term; kept for comparison only, it overcounts.
    pub lazy_printed: f64,
}

pub fn hitting_from_resistance(g: &Graph, a: usize, z: usize) -> Result<ResistanceHitting> {
    let r = resistance_table(g)?;
    let n = g.n();
    for node in [a, z] {
        if node >= n {
            return Err(Error::NodeOutOfRange { node, n });
        }
    }
    let m = g.m() as f64;
    let mut out = ResistanceHitting {
        simple: 0.0,
        lazy_corrected: 0.0,
        lazy_printed: 0.0,
    };
    for x in 0..n {
        let term = r[(a, z)] + r[(z, x)] - r[(a, x)];
        let d = g.degree(x) as f64;
        out.simple += 0.5 * d * term;
        out.lazy_corrected += 0.5 * m * term;
        out.lazy_printed += 0.5 * (m + d) * term;
    }
    Ok(out)
}

fn check_reversible(p: &ChainMatrix) -> Result<Vec<f64>> {
    let pi = stationary_distribution(p)?;
    let k = p.dim();
    for i in 0..k {
        for j in (i + 1)..k {
            let flow = pi[i] * p.matrix[(i, j)] - pi[j] * p.matrix[(j, i)];
            if flow.abs() > 1e-10 {
                return Err(Error::InvalidChain(format!("not reversible at ({i}, {j})")));
            }
        }
    }
    Ok(pi)
}

/// A vertex `w` with `H(w, x) <= H(x, w)` for every `x`. Such a vertex
/// exists for every reversible chain; the lowest-indexed one is returned.
pub fn hidden_vertex(p: &ChainMatrix) -> Result<usize> {
    if p.dim() == 1 {
        return Ok(0);
    }
    check_reversible(p)?;
    let h = hitting_table(p)?;
    Ok(hidden_vertex_from_table(&h))
}

fn hidden_vertex_from_table(h: &DMatrix<f64>) -> usize {
    let k = h.nrows();
    (0..k)
        .find(|&w| (0..k).all(|x| h[(w, x)] <= h[(x, w)] + 1e-9 * h[(x, w)].abs().max(1.0)))
        .expect("reversible chains have a hidden vertex")
}

/// Values indexed by ordered vertex pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTable {
    n: usize,
    values: Vec<f64>,
}

pub type MeetingTable = PairTable;

impl PairTable {
    pub fn zeros(n: usize) -> Self {
        PairTable {
            n,
            values: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for x in 0..n {
            for y in 0..n {
                t.values[x * n + y] = f(x, y);
            }
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.n + y]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.values[x * self.n + y] = v;
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn argmax(&self) -> WalkerPair {
        let i = (0..self.values.len())
            .max_by(|&a, &b| self.values[a].total_cmp(&self.values[b]).then(b.cmp(&a)))
            .unwrap_or(0);
        WalkerPair::new(i / self.n, i % self.n)
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for x in 0..self.n {
            for y in 0..self.n {
                worst = worst.max((self.get(x, y) - self.get(y, x)).abs());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &PairTable) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> PairTable {
        PairTable {
            n: self.n,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &PairTable, f: impl Fn(f64, f64) -> f64) -> PairTable {
        PairTable {
            n: self.n,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// `(x, y, value)` rows in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (i / self.n, i % self.n, v))
    }
}

impl fmt::Display for PairTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|y| format!("{:.6}", self.get(x, y))).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Lazy-walk hitting times `H_Z(x, y)` for all pairs.
pub fn lazy_hitting_table(g: &Graph) -> Result<PairTable> {
    let h = hitting_table(&lazy_transition_matrix(g)?)?;
    Ok(PairTable::from_fn(g.n(), |x, y| h[(x, y)]))
}

/// `max_{x,y} H_Z(x, y)`.
pub fn max_lazy_hitting(g: &Graph) -> Result<f64> {
    Ok(lazy_hitting_table(g)?.max())
}

/// `Phi(x, y) = H_Z(x, y) + H_Z(y, w) - H_Z(w, y)` with `w` a hidden vertex
/// of the lazy walk.
pub fn potential_table(g: &Graph) -> Result<PairTable> {
    let p = lazy_transition_matrix(g)?;
    let h = hitting_table(&p)?;
    check_reversible(&p)?;
    let w = hidden_vertex_from_table(&h);
    Ok(PairTable::from_fn(g.n(), |x, y| h[(x, y)] + h[(y, w)] - h[(w, y)]))
}

pub fn potential_phi(g: &Graph, x: usize, y: usize) -> Result<f64> {
    let n = g.n();
    for node in [x, y] {
        if node >= n {
            return Err(Error::NodeOutOfRange { node, n });
        }
    }
    Ok(potential_table(g)?.get(x, y))
}

/// Expected meeting time from every ordered start pair, by an absorbing
/// solve over the `n(n-1)` non-diagonal pair states.
pub fn exact_meeting_times(g: &Graph, kind: Process) -> Result<MeetingTable> {
    g.ensure_connected()?;
    if kind == Process::Virtual {
        g.require_assumption()?;
    }
    let n = g.n();
    let pairs = WalkerPair::all(n);
    let mut index = vec![usize::MAX; n * n];
    for (i, w) in pairs.iter().enumerate() {
        index[w.pos0 * n + w.pos2] = i;
    }
    let k = pairs.len();
    let uniform = EdgeDistribution::uniform(g.m());
    let mut a = DMatrix::<f64>::identity(k, k);
    for (i, &w) in pairs.iter().enumerate() {
        let law = match kind {
            Process::Original => uniform.clone(),
            Process::Virtual => virtual_edge_distribution(g, w)?,
        };
        for (edge, &p) in law.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            if let Step::At(next) = original_step(g, w, edge) {
                a[(i, index[next.pos0 * n + next.pos2])] -= p;
            }
        }
    }
    let t = linalg::solve(a, DVector::from_element(k, 1.0))?;
    let mut table = PairTable::zeros(n);
    for (i, w) in pairs.iter().enumerate() {
        table.set(w.pos0, w.pos2, t[i]);
    }
    Ok(table)
}

/// `max_{x,y}` of the original-process meeting time: the worst expected
/// wait for one nontrivial update.
pub fn max_meeting_time(g: &Graph) -> Result<f64> {
    Ok(exact_meeting_times(g, Process::Original)?.max())
}

/// Largest deviation of `f` from harmonicity for the simple random walk on
/// `G x G`, over off-diagonal pair states.
pub fn harmonic_residual(f: &PairTable, g: &Graph) -> Result<f64> {
    let n = g.n();
    if f.n() != n {
        return Err(Error::Dimension { expected: n, got: f.n() });
    }
    let mut worst = 0.0_f64;
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let total: f64 = g.neighbors(x).iter().map(|&j| f.get(j, y)).sum::<f64>()
                + g.neighbors(y).iter().map(|&j| f.get(x, j)).sum::<f64>();
            let avg = total / (g.degree(x) + g.degree(y)) as f64;
            worst = worst.max((f.get(x, y) - avg).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphFamily;

    fn fam(f: GraphFamily) -> Graph {
        f.generate().unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * b.abs().max(1.0)
    }

    #[test]
    fn lazy_matrix_line3() {
        let p = lazy_transition_matrix(&fam(GraphFamily::Line { n: 3 })).unwrap();
        assert_eq!(p.matrix()[(0, 0)], 0.5);
        assert_eq!(p.matrix()[(1, 1)], 0.0);
        assert!(p.is_symmetric(0.0));
    }

    #[test]
    fn hitting_line3() {
        let g = fam(GraphFamily::Line { n: 3 });
        let lazy = hitting_times(&lazy_transition_matrix(&g).unwrap(), 2).unwrap();
        assert!(close(lazy[0], 6.0) && close(lazy[1], 4.0) && lazy[2] == 0.0);
        let simple = hitting_times(&simple_walk_matrix(&g).unwrap(), 2).unwrap();
        assert!(close(simple[0], 4.0));
    }

    #[test]
    fn absorbing_target_is_zero() {
        let p = ChainMatrix::new(
            StateLabels::Vertices(2),
            DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.0, 1.0]),
            ChainKind::Stochastic,
        )
        .unwrap();
        let h = hitting_times(&p, 1).unwrap();
        assert_eq!(h[1], 0.0);
        assert!(close(h[0], 2.0));
        assert_eq!(hitting_times(&p, 0), Err(Error::Singular));
    }

    #[test]
    fn invalid_chain_rows() {
        let bad = DMatrix::from_row_slice(2, 2, &[0.5, 0.4, 0.0, 1.0]);
        assert!(ChainMatrix::new(StateLabels::Vertices(2), bad, ChainKind::Stochastic).is_err());
        let neg = DMatrix::from_row_slice(2, 2, &[1.5, -0.5, 0.0, 1.0]);
        assert!(matches!(
            ChainMatrix::new(StateLabels::Vertices(2), neg, ChainKind::Stochastic),
            Err(Error::NegativeEntry { row: 0, .. })
        ));
    }

    #[test]
    fn resistance_examples() {
        let p3 = fam(GraphFamily::Line { n: 3 });
        assert!(close(effective_resistance(&p3, 0, 2).unwrap(), 2.0));
        let c4 = fam(GraphFamily::Cycle { n: 4 });
        assert!(close(effective_resistance(&c4, 0, 1).unwrap(), 0.75));
        assert_eq!(effective_resistance(&c4, 2, 2).unwrap(), 0.0);
        let table = resistance_table(&c4).unwrap();
        assert!(close(table[(0, 1)], 0.75) && close(table[(0, 2)], 1.0));
    }

    #[test]
    fn voltage_profile_line3() {
        let vp = visit_voltage_profile(&fam(GraphFamily::Line { n: 3 }), 0, 2).unwrap();
        for (got, want) in vp.from_visits.iter().zip([2.0, 1.0, 0.0]) {
            assert!(close(*got, want));
        }
        assert!(vp.max_discrepancy < 1e-12);
    }

    #[test]
    fn resistance_hitting_line3() {
        let r = hitting_from_resistance(&fam(GraphFamily::Line { n: 3 }), 0, 2).unwrap();
        assert!(close(r.simple, 4.0));
        assert!(close(r.lazy_corrected, 6.0));
        assert!(close(r.lazy_printed, 10.0));
    }

    #[test]
    fn hidden_vertex_cases() {
        let g = fam(GraphFamily::Line { n: 3 });
        assert_eq!(hidden_vertex(&lazy_transition_matrix(&g).unwrap()).unwrap(), 0);
        // simple walk on a 3-path: the center is not hidden (H(b,a)=3 > H(a,b)=1),
        // the ends are
        let w = hidden_vertex(&simple_walk_matrix(&g).unwrap()).unwrap();
        assert_ne!(w, 1);
        let one = ChainMatrix::new(StateLabels::Vertices(1), DMatrix::from_element(1, 1, 1.0), ChainKind::Stochastic)
            .unwrap();
        assert_eq!(hidden_vertex(&one).unwrap(), 0);
    }

    #[test]
    fn phi_c4() {
        let g = fam(GraphFamily::Cycle { n: 4 });
        assert!(close(potential_phi(&g, 0, 2).unwrap(), 8.0));
        assert_eq!(potential_phi(&g, 1, 1).unwrap(), 0.0);
    }

    #[test]
    fn c4_meeting_tables() {
        let g = fam(GraphFamily::Cycle { n: 4 });
        let t = exact_meeting_times(&g, Process::Original).unwrap();
        assert!(close(t.get(0, 1), 6.0) && close(t.get(0, 2), 7.0) && close(t.max(), 7.0));
        let m = exact_meeting_times(&g, Process::Virtual).unwrap();
        assert!(close(m.get(0, 1), 3.0) && close(m.get(0, 2), 4.0));
        assert_eq!(t.get(3, 3), 0.0);
    }

    #[test]
    fn star_m2_original() {
        let t = exact_meeting_times(&fam(GraphFamily::Star { n: 3 }), Process::Original).unwrap();
        assert!(close(t.max(), 4.0));
    }

    #[test]
    fn virtual_meeting_rejects_star() {
        assert!(matches!(
            exact_meeting_times(&fam(GraphFamily::Star { n: 4 }), Process::Virtual),
            Err(Error::AssumptionViolated { .. })
        ));
    }

    #[test]
    fn harmonic_residual_c5() {
        let g = fam(GraphFamily::Cycle { n: 5 });
        let m = exact_meeting_times(&g, Process::Virtual).unwrap();
        let phi = potential_table(&g).unwrap();
        let f = phi.zip_with(&m, |p, mv| 0.5 * p - mv);
        assert!(harmonic_residual(&f, &g).unwrap() <= 1e-9);
        assert_eq!(harmonic_residual(&PairTable::zeros(5), &g).unwrap(), 0.0);
        assert!(close(harmonic_residual(&m, &g).unwrap(), 1.25));
    }

    #[test]
    fn disconnected_inputs() {
        let g = Graph::new(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(lazy_transition_matrix(&g), Err(Error::Disconnected));
        assert_eq!(exact_meeting_times(&g, Process::Original), Err(Error::Disconnected));
    }
}
