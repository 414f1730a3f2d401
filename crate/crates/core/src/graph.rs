//! Undirected simple graphs, the named families used throughout the
//! experiments, structural matrices and the Cartesian square.
//!
//! Vertices are dense labels `0..n`. A product vertex `(x, y)` of the
//! Cartesian square is encoded as `x * n + y`.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    /// `adj[v]` holds `(neighbor, edge id)` pairs.
    adj: Vec<Vec<(usize, usize)>>,
    neighbors: Vec<Vec<usize>>,
    /// Row-major `n * n` edge-id lookup; `usize::MAX` where there is no edge.
    edge_ids: Vec<usize>,
    connected: bool,
}

impl Graph {
    /// Builds a graph, normalizing every pair to `(min, max)`.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        let mut norm = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::VertexOutOfRange { u, v, n });
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(Error::DuplicateEdge(u, v));
            }
            norm.push(e);
        }
        let mut adj = vec![Vec::new(); n];
        let mut edge_ids = vec![usize::MAX; n * n];
        for (id, &(u, v)) in norm.iter().enumerate() {
            adj[u].push((v, id));
            adj[v].push((u, id));
            edge_ids[u * n + v] = id;
            edge_ids[v * n + u] = id;
        }
        let neighbors = adj
            .iter()
            .map(|row| row.iter().map(|&(w, _)| w).collect())
            .collect();
        let mut g = Graph {
            n,
            edges: norm,
            adj,
            neighbors,
            edge_ids,
            connected: false,
        };
        g.connected = n > 0 && g.bfs(0).iter().all(|d| d.is_some());
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> (usize, usize) {
        self.edges[id]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    /// Incident `(neighbor, edge id)` pairs of `v`.
    pub fn incident(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.edge_ids[u * self.n + v] != usize::MAX
    }

    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        match self.edge_ids[u * self.n + v] {
            usize::MAX => None,
            id => Some(id),
        }
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    pub fn ensure_connected(&self) -> Result<()> {
        if self.connected {
            Ok(())
        } else {
            Err(Error::Disconnected)
        }
    }

    /// Shortest-path lengths from `src`; `None` for unreachable vertices.
    pub fn bfs(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        dist[src] = Some(0);
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &w in &self.neighbors[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// All-pairs shortest-path lengths (one BFS per vertex).
    pub fn distances(&self) -> Result<Vec<Vec<usize>>> {
        self.ensure_connected()?;
        Ok((0..self.n)
            .map(|s| self.bfs(s).into_iter().map(Option::unwrap).collect())
            .collect())
    }

    pub fn diameter(&self) -> Result<usize> {
        Ok(self
            .distances()?
            .iter()
            .flat_map(|row| row.iter().copied())
            .max()
            .unwrap_or(0))
    }

    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(u, v) in &self.edges {
            a[(u, v)] = 1.0;
            a[(v, u)] = 1.0;
        }
        a
    }

    pub fn degree_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            if i == j {
                self.degree(i) as f64
            } else {
                0.0
            }
        })
    }

    pub fn laplacian(&self) -> DMatrix<f64> {
        self.degree_matrix() - self.adjacency_matrix()
    }

    pub fn structural_matrices(&self) -> StructuralMatrices {
        let adjacency = self.adjacency_matrix();
        let degree = self.degree_matrix();
        let laplacian = &degree - &adjacency;
        StructuralMatrices {
            adjacency,
            degree,
            laplacian,
        }
    }

    /// The Cartesian square `G x G` on `n^2` vertices, `(x, y)` encoded as
    /// `x * n + y`.
    pub fn cartesian_square(&self) -> Graph {
        let n = self.n;
        let mut edges = Vec::with_capacity(2 * n * self.m());
        for x in 0..n {
            for &(y, s) in &self.edges {
                edges.push((x * n + y, x * n + s));
            }
        }
        for y in 0..n {
            for &(x, r) in &self.edges {
                edges.push((x * n + y, r * n + y));
            }
        }
        Graph::new(n * n, &edges).expect("product of a simple graph is simple")
    }

    pub fn max_edge_degree_sum(&self) -> Option<((usize, usize), usize)> {
        self.edges
            .iter()
            .map(|&(u, v)| ((u, v), self.degree(u) + self.degree(v)))
            .fold(None, |best, cur| match best {
                Some((_, s)) if s >= cur.1 => best,
                _ => Some(cur),
            })
    }

    /// Checks `d(u) + d(v) <= m` on every edge. Graphs where the maximum
    /// degree sum reaches `m + 1` are exactly those with one edge touching
    /// every other edge: stars and double stars.
    pub fn assumption_check(&self) -> Result<AssumptionReport> {
        self.ensure_connected()?;
        let m = self.m();
        let (worst_edge, max_degree_sum) = self.max_edge_degree_sum().ok_or(Error::Disconnected)?;
        let holds = max_degree_sum <= m;
        let classification = if holds {
            GraphClass::General
        } else if self.degree(worst_edge.0) == 1 || self.degree(worst_edge.1) == 1 {
            GraphClass::Star
        } else {
            GraphClass::DoubleStar
        };
        Ok(AssumptionReport {
            holds,
            classification,
            worst_edge,
            max_degree_sum,
            m,
        })
    }

    /// Fails with the offending edge if the degree-sum condition is violated.
    pub fn require_assumption(&self) -> Result<()> {
        let r = self.assumption_check()?;
        if r.holds {
            Ok(())
        } else {
            Err(Error::AssumptionViolated {
                u: r.worst_edge.0,
                v: r.worst_edge.1,
                sum: r.max_degree_sum,
                m: r.m,
            })
        }
    }

    /// Text form: `n m` header then one `u v` line per edge with `u < v`.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.m());
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines
            .next()
            .ok_or_else(|| Error::Parse("empty graph file".into()))?;
        let (n, m) = parse_pair(header, hl)?;
        let mut edges = Vec::with_capacity(m);
        for (ln, line) in lines {
            let (u, v) = parse_pair(line, ln)?;
            if u >= v {
                return Err(Error::Parse(format!("line {ln}: expected u < v, got {u} {v}")));
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(Error::Parse(format!(
                "header declares {m} edges, found {}",
                edges.len()
            )));
        }
        Graph::new(n, &edges)
    }
}

fn parse_pair(line: &str, ln: usize) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace().map(|t| {
        t.parse::<usize>()
            .map_err(|e| Error::Parse(format!("line {ln}: {t:?}: {e}")))
    });
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => Ok((a?, b?)),
        _ => Err(Error::Parse(format!("line {ln}: expected two integers"))),
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, m={})", self.n, self.m())
    }
}

/// A graph (possibly time-dependent) from which one edge is drawn per step.
/// The graph at time `t` must not depend on any process state.
pub trait Schedule {
    fn n(&self) -> usize;
    fn graph_at(&self, t: u64) -> &Graph;
    /// Degree-sum condition on every graph the schedule can produce.
    fn require_assumption(&self) -> Result<()>;
}

impl Schedule for Graph {
    fn n(&self) -> usize {
        self.n
    }

    fn graph_at(&self, _t: u64) -> &Graph {
        self
    }

    fn require_assumption(&self) -> Result<()> {
        Graph::require_assumption(self)
    }
}

#[derive(Debug, Clone)]
pub struct StructuralMatrices {
    pub adjacency: DMatrix<f64>,
    pub degree: DMatrix<f64>,
    pub laplacian: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphClass {
    General,
    Star,
    DoubleStar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub holds: bool,
    pub classification: GraphClass,
    pub worst_edge: (usize, usize),
    pub max_degree_sum: usize,
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GraphFamily {
    Line { n: usize },
    Cycle { n: usize },
    Star { n: usize },
    /// Adjacent centers `0` and `1` with degrees `i` and `m + 1 - i`,
    /// sharing `k` neighbors.
    DoubleStar { i: usize, k: usize, n: usize },
    /// Two cliques of `n / 4` nodes joined by a path through the rest.
    Lollipop { n: usize },
    /// Circulant: node `v` links to `v+1, ..., v+k (mod n)`.
    SemiRegular { n: usize, k: usize },
    Complete { n: usize },
    Petersen,
    /// Erdos-Renyi `G(n, p)` conditioned on connectivity and the degree-sum
    /// condition, by rejection.
    RandomConnected { n: usize, p: f64, seed: u64 },
}

const RANDOM_ATTEMPTS: u64 = 10_000;

impl GraphFamily {
    pub fn generate(&self) -> Result<Graph> {
        let bad = |msg: String| Err(Error::Family(msg));
        match *self {
            GraphFamily::Line { n } => {
                if n < 2 {
                    return bad(format!("line needs n >= 2, got {n}"));
                }
                Graph::new(n, &(0..n - 1).map(|i| (i, i + 1)).collect::<Vec<_>>())
            }
            GraphFamily::Cycle { n } => {
                if n < 3 {
                    return bad(format!("cycle needs n >= 3, got {n}"));
                }
                Graph::new(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>())
            }
            GraphFamily::Star { n } => {
                if n < 2 {
                    return bad(format!("star needs n >= 2, got {n}"));
                }
                Graph::new(n, &(1..n).map(|i| (0, i)).collect::<Vec<_>>())
            }
            GraphFamily::DoubleStar { i, k, n } => {
                // x1 = 0, y1 = 1, shared neighbors, then private leaves of x1, then of y1
                if i < k + 1 || n < i + 1 {
                    return bad(format!("double_star needs k+1 <= i <= n-1, got i={i}, k={k}, n={n}"));
                }
                let private_x = i - 1 - k;
                let private_y = n - 1 - i;
                if i < 2 || 1 + k + private_y < 2 {
                    return bad(format!("double_star centers need degree >= 2 (i={i}, k={k}, n={n})"));
                }
                let mut edges = vec![(0, 1)];
                let mut next = 2;
                for _ in 0..k {
                    edges.push((0, next));
                    edges.push((1, next));
                    next += 1;
                }
                for _ in 0..private_x {
                    edges.push((0, next));
                    next += 1;
                }
                for _ in 0..private_y {
                    edges.push((1, next));
                    next += 1;
                }
                Graph::new(n, &edges)
            }
            GraphFamily::Lollipop { n } => {
                let c = n / 4;
                if c < 1 {
                    return bad(format!("lollipop needs n >= 4, got {n}"));
                }
                let mut edges = Vec::new();
                for a in 0..c {
                    for b in (a + 1)..c {
                        edges.push((a, b));
                        edges.push((n - c + a, n - c + b));
                    }
                }
                // the path runs c-1, c, ..., n-c
                for v in (c - 1)..(n - c) {
                    edges.push((v, v + 1));
                }
                Graph::new(n, &edges)
            }
            GraphFamily::SemiRegular { n, k } => {
                if k < 1 || n <= 2 * k {
                    return bad(format!("semi_regular needs n > 2k >= 2, got n={n}, k={k}"));
                }
                let mut edges = Vec::with_capacity(n * k);
                for v in 0..n {
                    for s in 1..=k {
                        edges.push((v, (v + s) % n));
                    }
                }
                Graph::new(n, &edges)
            }
            GraphFamily::Complete { n } => {
                if n < 2 {
                    return bad(format!("complete needs n >= 2, got {n}"));
                }
                let mut edges = Vec::new();
                for a in 0..n {
                    for b in (a + 1)..n {
                        edges.push((a, b));
                    }
                }
                Graph::new(n, &edges)
            }
            GraphFamily::Petersen => {
                let mut edges = Vec::with_capacity(15);
                for i in 0..5 {
                    edges.push((i, (i + 1) % 5));
                    edges.push((5 + i, 5 + (i + 2) % 5));
                    edges.push((i, 5 + i));
                }
                Graph::new(10, &edges)
            }
            GraphFamily::RandomConnected { n, p, seed } => {
                if n < 2 || !(0.0..=1.0).contains(&p) || p == 0.0 {
                    return bad(format!("random needs n >= 2 and 0 < p <= 1, got n={n}, p={p}"));
                }
                for attempt in 0..RANDOM_ATTEMPTS {
                    let mut rng = stream_rng(seed, attempt);
                    let mut edges = Vec::new();
                    for a in 0..n {
                        for b in (a + 1)..n {
                            if rng.gen_bool(p) {
                                edges.push((a, b));
                            }
                        }
                    }
                    let g = Graph::new(n, &edges)?;
                    if g.is_connected() && g.assumption_check()?.holds {
                        return Ok(g);
                    }
                }
                bad(format!(
                    "no connected degree-sum-admissible G({n}, {p}) sample in {RANDOM_ATTEMPTS} attempts"
                ))
            }
        }
    }
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GraphFamily::Line { n } => write!(f, "line:{n}"),
            GraphFamily::Cycle { n } => write!(f, "cycle:{n}"),
            GraphFamily::Star { n } => write!(f, "star:{n}"),
            GraphFamily::DoubleStar { i, k, n } => write!(f, "double_star:i={i},k={k},n={n}"),
            GraphFamily::Lollipop { n } => write!(f, "lollipop:{n}"),
            GraphFamily::SemiRegular { n, k } => write!(f, "semi_regular:n={n},k={k}"),
            GraphFamily::Complete { n } => write!(f, "complete:{n}"),
            GraphFamily::Petersen => write!(f, "petersen"),
            GraphFamily::RandomConnected { n, p, seed } => write!(f, "random:n={n},p={p},seed={seed}"),
        }
    }
}

/// Parses `name`, `name:N` or `name:key=value,...` family specs.
impl FromStr for GraphFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let args = FamilyArgs::parse(args, s)?;
        let fam = match name {
            "line" | "path" => GraphFamily::Line { n: args.req("n")? },
            "cycle" => GraphFamily::Cycle { n: args.req("n")? },
            "star" => GraphFamily::Star { n: args.req("n")? },
            "double_star" => GraphFamily::DoubleStar {
                i: args.req("i")?,
                k: args.req("k")?,
                n: args.req("n")?,
            },
            "lollipop" => GraphFamily::Lollipop { n: args.req("n")? },
            "semi_regular" => GraphFamily::SemiRegular {
                n: args.req("n")?,
                k: args.opt("k")?.unwrap_or(4),
            },
            "complete" => GraphFamily::Complete { n: args.req("n")? },
            "petersen" => GraphFamily::Petersen,
            "random" | "random_connected" => GraphFamily::RandomConnected {
                n: args.req("n")?,
                p: args.req_f64("p")?,
                seed: args.opt("seed")?.map(|s| s as u64).unwrap_or(0),
            },
            other => return Err(Error::Parse(format!("unknown graph family {other:?} in {s:?}"))),
        };
        args.finish()?;
        Ok(fam)
    }
}

/// Resolves a graph spec: a family string such as `cycle:8`, or else a path
/// to a graph text file (relative paths are taken from `base_dir`).
pub fn load_graph(spec: &str, base_dir: Option<&Path>) -> Result<Graph> {
    match spec.parse::<GraphFamily>() {
        Ok(fam) => fam.generate(),
        Err(family_err) => {
            let path = match base_dir {
                Some(dir) if Path::new(spec).is_relative() => dir.join(spec),
                _ => PathBuf::from(spec),
            };
            if !path.is_file() {
                return Err(family_err);
            }
            let text = std::fs::read_to_string(&path)?;
            Graph::from_text(&text).map_err(|e| match e {
                Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
                other => other,
            })
        }
    }
}

struct FamilyArgs<'a> {
    spec: &'a str,
    positional: Option<&'a str>,
    named: Vec<(&'a str, &'a str)>,
    used: std::cell::RefCell<HashSet<&'a str>>,
}

impl<'a> FamilyArgs<'a> {
    fn parse(args: &'a str, spec: &'a str) -> Result<Self> {
        let mut positional = None;
        let mut named = Vec::new();
        for part in args.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.split_once('=') {
                Some((k, v)) => named.push((k.trim(), v.trim())),
                None if positional.is_none() && named.is_empty() => positional = Some(part),
                None => return Err(Error::Parse(format!("unexpected argument {part:?} in {spec:?}"))),
            }
        }
        Ok(FamilyArgs {
            spec,
            positional,
            named,
            used: Default::default(),
        })
    }

    fn raw(&self, key: &'a str) -> Option<&'a str> {
        if let Some(&(_, v)) = self.named.iter().find(|(k, _)| *k == key) {
            self.used.borrow_mut().insert(key);
            return Some(v);
        }
        if key == "n" {
            if let Some(p) = self.positional {
                self.used.borrow_mut().insert("");
                return Some(p);
            }
        }
        None
    }

    fn opt(&self, key: &'a str) -> Result<Option<usize>> {
        self.raw(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("{key}={v:?} in {:?}: {e}", self.spec)))
            })
            .transpose()
    }

    fn req(&self, key: &'a str) -> Result<usize> {
        self.opt(key)?
            .ok_or_else(|| Error::Parse(format!("missing {key} in {:?}", self.spec)))
    }

    fn req_f64(&self, key: &'a str) -> Result<f64> {
        let v = self
            .raw(key)
            .ok_or_else(|| Error::Parse(format!("missing {key} in {:?}", self.spec)))?;
        v.parse::<f64>()
            .map_err(|e| Error::Parse(format!("{key}={v:?} in {:?}: {e}", self.spec)))
    }

    fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        if let Some((k, _)) = self.named.iter().find(|(k, _)| !used.contains(k)) {
            return Err(Error::Parse(format!("unknown parameter {k:?} in {:?}", self.spec)));
        }
        if self.positional.is_some() && !used.contains("") {
            return Err(Error::Parse(format!("unexpected positional argument in {:?}", self.spec)));
        }
        Ok(())
    }
}
