//! Spectra of the single-token chain, the pair-space mixing matrix
//! `K = I - L(G x G) / m` and the graph Laplacian, plus the identities that
//! tie them to hitting times.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{hitting_table, lazy_transition_matrix, stationary_distribution, ChainKind, ChainMatrix, StateLabels};
use crate::graph::Graph;
use crate::linalg;

/// Largest `n` for which `n^2`-state matrices are decomposed densely.
pub const MAX_PAIR_SPECTRUM_N: usize = 40;

pub const SPECTRAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Descending.
    pub values: Vec<f64>,
    /// `max_i |A v_i - a_i v_i|`.
    pub max_residual: f64,
}

impl Spectrum {
    pub fn of(a: &DMatrix<f64>) -> Result<Spectrum> {
        let (values, vectors) = linalg::symmetric_eigen(a)?;
        let mut max_residual = 0.0_f64;
        for (i, &lambda) in values.iter().enumerate() {
            let v = vectors.column(i);
            let r = (a * v - v * lambda).amax();
            max_residual = max_residual.max(r);
        }
        Ok(Spectrum { values, max_residual })
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    /// Second largest eigenvalue (the largest when there is only one).
    pub fn second(&self) -> f64 {
        self.values[1.min(self.values.len() - 1)]
    }

    pub fn last(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn symmetric_spectrum(mx: &ChainMatrix) -> Result<Spectrum> {
    Spectrum::of(mx.matrix())
}

fn max_sorted_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomTargetReport {
    /// `sum_{k >= 2} 1 / (1 - a_k)`.
    pub eigen_sum: f64,
    /// `sum_j pi_j H(i, j)` for each start `i`.
    pub per_start: Vec<f64>,
    /// Largest `|per_start[i] - eigen_sum|`.
    pub residual: f64,
    /// `max - min` of `per_start`.
    pub spread: f64,
}

/// Compares the stationary-target hitting time from every start with the
/// eigenvalue sum. The chain must be irreducible and reversible; its
/// spectrum is taken from the similar matrix `D^1/2 P D^-1/2`.
pub fn random_target_residual(p: &ChainMatrix) -> Result<RandomTargetReport> {
    let k = p.dim();
    let pi = stationary_distribution(p)?;
    if pi.iter().any(|&x| x <= 0.0) {
        return Err(Error::InvalidChain("stationary distribution is not positive".into()));
    }
    let root: Vec<f64> = pi.iter().map(|x| x.sqrt()).collect();
    let s = DMatrix::from_fn(k, k, |i, j| root[i] * p.matrix()[(i, j)] / root[j]);
    if linalg::symmetry_defect(&s) > 1e-10 {
        return Err(Error::InvalidChain("chain is not reversible".into()));
    }
    let s = (&s + s.transpose()) * 0.5;
    let spectrum = Spectrum::of(&s)?;
    let eigen_sum: f64 = spectrum.values.iter().skip(1).map(|a| 1.0 / (1.0 - a)).sum();
    let h = hitting_table(p)?;
    let per_start: Vec<f64> = (0..k).map(|i| (0..k).map(|j| pi[j] * h[(i, j)]).sum()).collect();
    let residual = per_start.iter().map(|x| (x - eigen_sum).abs()).fold(0.0, f64::max);
    let hi = per_start.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = per_start.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(RandomTargetReport {
        eigen_sum,
        per_start,
        residual,
        spread: hi - lo,
    })
}

fn check_pair_size(g: &Graph) -> Result<()> {
    if g.n() > MAX_PAIR_SPECTRUM_N {
        return Err(Error::Config(format!(
            "pair-space spectra are limited to n <= {MAX_PAIR_SPECTRUM_N}, got n = {}",
            g.n()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSpectrumReport {
    /// `{l_i + l_j}` sorted descending.
    pub predicted: Vec<f64>,
    pub product: Vec<f64>,
    pub residual: f64,
}

/// Laplacian spectrum of `G x G` against all pairwise sums of the
/// Laplacian spectrum of `G`.
pub fn product_spectrum_check(g: &Graph) -> Result<ProductSpectrumReport> {
    check_pair_size(g)?;
    let base = Spectrum::of(&g.laplacian())?;
    let mut predicted: Vec<f64> = base
        .values
        .iter()
        .flat_map(|a| base.values.iter().map(move |b| a + b))
        .collect();
    predicted.sort_by(|a, b| b.total_cmp(a));
    let product = Spectrum::of(&g.cartesian_square().laplacian())?.values;
    let residual = max_sorted_diff(&predicted, &product);
    Ok(ProductSpectrumReport {
        predicted,
        product,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplacianMaxEigReport {
    pub alpha1: f64,
    /// `max_{uv in E} d(u) + d(v)`, always an upper bound.
    pub degree_sum_bound: f64,
    /// `m - 1/2`.
    pub refined_bound: f64,
    /// `alpha1 > m - 1/2`.
    pub violated: bool,
}

pub fn laplacian_max_eig_report(g: &Graph) -> Result<LaplacianMaxEigReport> {
    g.require_assumption()?;
    let alpha1 = Spectrum::of(&g.laplacian())?.first();
    let (_, dsum) = g.max_edge_degree_sum().ok_or(Error::Disconnected)?;
    let refined_bound = g.m() as f64 - 0.5;
    Ok(LaplacianMaxEigReport {
        alpha1,
        degree_sum_bound: dsum as f64,
        refined_bound,
        violated: alpha1 > refined_bound + SPECTRAL_TOL,
    })
}

fn kbar_dense(g: &Graph) -> DMatrix<f64> {
    let k = g.n() * g.n();
    DMatrix::identity(k, k) - g.cartesian_square().laplacian() / g.m() as f64
}

/// `I - L(G x G) / m` on ordered pairs. Its diagonal `1 - (d(x) + d(y))/m`
/// can be negative at pairs that are not edges (for example `(c, c)` at a
/// high-degree vertex), in which case `NegativeEntry` is returned.
pub fn kbar_matrix(g: &Graph) -> Result<ChainMatrix> {
    g.require_assumption()?;
    check_pair_size(g)?;
    ChainMatrix::new(StateLabels::Pairs(g.n()), kbar_dense(g), ChainKind::Stochastic)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KbarReport {
    pub alpha2_kbar: f64,
    pub alpha2_p: f64,
    pub alpha_last_kbar: f64,
    /// `1 - 2 alpha1(L) / m`.
    pub alpha_last_predicted: f64,
    pub second_residual: f64,
    pub last_residual: f64,
    /// Whether the matrix has nonnegative entries (is a genuine chain).
    pub nonnegative: bool,
}

pub fn kbar_report(g: &Graph) -> Result<KbarReport> {
    g.require_assumption()?;
    check_pair_size(g)?;
    let k = kbar_dense(g);
    let nonnegative = k.iter().all(|&x| x >= 0.0);
    let sk = Spectrum::of(&k)?;
    let sp = symmetric_spectrum(&lazy_transition_matrix(g)?)?;
    let alpha1 = Spectrum::of(&g.laplacian())?.first();
    let alpha_last_predicted = 1.0 - 2.0 * alpha1 / g.m() as f64;
    Ok(KbarReport {
        alpha2_kbar: sk.second(),
        alpha2_p: sp.second(),
        alpha_last_kbar: sk.last(),
        alpha_last_predicted,
        second_residual: (sk.second() - sp.second()).abs(),
        last_residual: (sk.last() - alpha_last_predicted).abs(),
        nonnegative,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    /// `max(|alpha_2(K)|, |alpha_last(K)|)`.
    pub exact: f64,
    /// `1 - 1/(2 n m D)`.
    pub claimed: f64,
    /// `exact > claimed`.
    pub flagged: bool,
    pub alpha2_p: f64,
    /// `alpha_2(P) <= 1 - 1/(2 n m D)`.
    pub alpha2_bound_holds: bool,
}

pub fn contraction_factor(g: &Graph) -> Result<ContractionReport> {
    g.require_assumption()?;
    check_pair_size(g)?;
    let sk = Spectrum::of(&kbar_dense(g))?;
    let exact = sk.second().abs().max(sk.last().abs());
    let (n, m, d) = (g.n() as f64, g.m() as f64, g.diameter()? as f64);
    let claimed = 1.0 - 1.0 / (2.0 * n * m * d);
    let alpha2_p = symmetric_spectrum(&lazy_transition_matrix(g)?)?.second();
    Ok(ContractionReport {
        exact,
        claimed,
        flagged: exact > claimed + SPECTRAL_TOL,
        alpha2_p,
        alpha2_bound_holds: alpha2_p <= claimed + SPECTRAL_TOL,
    })
}
