//! Spectrum of the symmetric normalized Laplacian and the mixing machinery
//! built on it.
//!
//! For an undirected graph, L = I - D^{1/2} P D^{-1/2} is symmetric with
//! eigenvalues in [0, 2]; its spectrum expands the walk's t-step transition
//! probabilities as
//!
//! ```text
//! (P^t)_ij = pi_j + sum_{k>=2} (1 - lambda_k)^t v^(k)_i v^(k)_j sqrt(d_j / d_i)
//! ```
//!
//! which yields the geometric mixing bound with factor mu* (nu* on bipartite
//! graphs after averaging over an even window). For aperiodic chains,
//! directed or not, the Doeblin construction provides (C, alpha) with
//! TV((P^t)_i., pi) <= C alpha^t.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::TransitionModel;

const JACOBI_OFFDIAG_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigendecomposition of the normalized Laplacian plus derived mixing
/// factors.
#[derive(Debug, Clone)]
pub struct SpectralSummary {
    /// Ascending eigenvalues of the normalized Laplacian.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, one column per eigenvalue.
    pub eigenvectors: Array2<f64>,
    /// max |1 - lambda_k| over k >= 2.
    pub mu_star: f64,
    /// max |1 - lambda_k| over the interior 2 <= k <= n-1, which drops the
    /// bipartite eigenvalue lambda = 2.
    pub nu_star: f64,
    /// The normalized Laplacian itself.
    pub laplacian: Array2<f64>,
}

/// Builds and eigendecomposes the normalized Laplacian of an undirected
/// graph. Eigenpairs are sorted ascending; each eigenvector's first
/// nonzero component is made positive so output is deterministic.
pub fn normalized_laplacian(tm: &TransitionModel) -> Result<SpectralSummary> {
    if tm.graph().is_directed() {
        return Err(Error::DirectedUnsupported);
    }
    let n = tm.vertex_count();
    let d = tm.degrees();
    let mut lap = Array2::eye(n);
    for v in 0..n {
        let (targets, weights) = tm.graph().neighbors(v);
        for (&c, &w) in targets.iter().zip(weights.iter()) {
            lap[[v, c]] -= w / (d[v] * d[c]).sqrt();
        }
    }

    let (mut eigenvalues, mut eigenvectors) = jacobi_eigh(&lap);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
    eigenvalues = order.iter().map(|&k| eigenvalues[k]).collect();
    let mut sorted = Array2::zeros((n, n));
    for (col, &k) in order.iter().enumerate() {
        sorted.column_mut(col).assign(&eigenvectors.column(k));
    }
    eigenvectors = sorted;

    for mut col in eigenvectors.columns_mut() {
        if let Some(first) = col.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                col.mapv_inplace(|x| -x);
            }
        }
    }

    let interior_max = |lo: usize, hi: usize| -> f64 {
        (lo..hi)
            .map(|k| (1.0 - eigenvalues[k]).abs())
            .fold(0.0f64, f64::max)
    };
    let mu_star = interior_max(1, n);
    let nu_star = if n >= 3 { interior_max(1, n - 1) } else { 0.0 };

    Ok(SpectralSummary {
        eigenvalues,
        eigenvectors,
        mu_star,
        nu_star,
        laplacian: lap,
    })
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// (eigenvalues, eigenvector columns), unsorted.
fn jacobi_eigh(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut d = a.clone();
    let mut v = Array2::<f64>::eye(n);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(d[[p, q]].abs());
            }
        }
        if off <= JACOBI_OFFDIAG_TOL {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = d[[p, q]];
                if apq.abs() <= JACOBI_OFFDIAG_TOL / (n as f64) {
                    continue;
                }
                let app = d[[p, p]];
                let aqq = d[[q, q]];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for i in 0..n {
                    if i != p && i != q {
                        let dip = d[[i, p]];
                        let diq = d[[i, q]];
                        d[[i, p]] = c * dip - s * diq;
                        d[[p, i]] = d[[i, p]];
                        d[[i, q]] = s * dip + c * diq;
                        d[[q, i]] = d[[i, q]];
                    }
                }
                d[[p, p]] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
                d[[q, q]] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
                d[[p, q]] = 0.0;
                d[[q, p]] = 0.0;

                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = c * vip - s * viq;
                    v[[i, q]] = s * vip + c * viq;
                }
            }
        }
    }

    ((0..n).map(|i| d[[i, i]]).collect(), v)
}

/// Reconstructs P^t from the spectrum via the eigenvalue expansion.
pub fn spectral_transition_power(
    summary: &SpectralSummary,
    tm: &TransitionModel,
    t: usize,
) -> Array2<f64> {
    let n = tm.vertex_count();
    let d = tm.degrees();
    let pi = tm.pi();
    let powers: Vec<f64> = summary
        .eigenvalues
        .iter()
        .map(|&l| (1.0 - l).powi(t as i32))
        .collect();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 1..n {
                acc += powers[k] * summary.eigenvectors[[i, k]] * summary.eigenvectors[[j, k]];
            }
            out[[i, j]] = pi[j] + acc * (d[j] / d[i]).sqrt();
        }
    }
    out
}

/// Geometric mixing bound sqrt(d_j / d_i) mu*^t on |(P^t)_ij - pi_j|.
pub fn mixing_bound(summary: &SpectralSummary, tm: &TransitionModel, i: usize, j: usize, t: usize) -> f64 {
    let d = tm.degrees();
    (d[j] / d[i]).sqrt() * summary.mu_star.powi(t as i32)
}

/// Window-averaged transition probability and its nu*-bound for bipartite
/// graphs: the average of (P^t)_ij over `window_len` consecutive steps
/// starting at `t_start`, and sqrt(d_j / d_i) <nu*^t> over the same window.
/// The window length must be even so the bipartite oscillation cancels.
pub fn bipartite_mixing_bound(
    summary: &SpectralSummary,
    tm: &TransitionModel,
    i: usize,
    j: usize,
    t_start: usize,
    window_len: usize,
) -> Result<(f64, f64)> {
    if window_len == 0 || window_len % 2 != 0 {
        return Err(Error::OddWindow(window_len));
    }
    let n = tm.vertex_count();
    let mut row = vec![0.0; n];
    row[i] = 1.0;
    for _ in 0..t_start {
        row = tm.left_multiply(&row);
    }
    let mut avg_prob = 0.0;
    let mut avg_factor = 0.0;
    for step in 0..window_len {
        avg_prob += row[j];
        avg_factor += summary.nu_star.powi((t_start + step) as i32);
        if step + 1 < window_len {
            row = tm.left_multiply(&row);
        }
    }
    avg_prob /= window_len as f64;
    avg_factor /= window_len as f64;
    let d = tm.degrees();
    Ok((avg_prob, (d[j] / d[i]).sqrt() * avg_factor))
}

/// Doeblin minorization constants of an aperiodic chain.
///
/// r is the smallest power with P^r entrywise positive; with
/// delta = min_ij (P^r)_ij / pi_j and theta = 1 - delta, total variation
/// from stationarity satisfies TV((P^t)_i., pi) <= C alpha^t for
/// alpha = theta^(1/r) and C = 1/theta.
#[derive(Debug, Clone, Serialize)]
pub struct DoeblinConstants {
    pub r: usize,
    pub theta: f64,
    pub alpha: f64,
    pub c: f64,
}

/// Searches r up to 4 |V| and evaluates the Doeblin constants.
pub fn doeblin_constants(tm: &TransitionModel) -> Result<DoeblinConstants> {
    if tm.period() != 1 {
        return Err(Error::PeriodicChain(tm.period()));
    }
    let n = tm.vertex_count();
    let cap = 4 * n;
    let mut power = Array2::eye(n);
    for r in 1..=cap {
        power = tm.right_multiply_dense(&power);
        if power.iter().all(|&x| x > 0.0) {
            let pi = tm.pi();
            let mut delta = f64::INFINITY;
            for i in 0..n {
                for j in 0..n {
                    delta = delta.min(power[[i, j]] / pi[j]);
                }
            }
            // delta = 1 means the chain mixes exactly at step r; keep theta
            // positive so C stays finite (the bound only loosens).
            let delta = delta.min(1.0 - 1e-12);
            let theta = 1.0 - delta;
            return Ok(DoeblinConstants {
                r,
                theta,
                alpha: theta.powf(1.0 / r as f64),
                c: 1.0 / theta,
            });
        }
    }
    Err(Error::DoeblinRangeExceeded { cap })
}

/// Total variation distance between two distributions: half the L1 norm.
pub fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
}

/// Machine-readable spectrum report.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub mu_star: f64,
    pub nu_star: f64,
    pub bipartite: bool,
    pub doeblin: Option<DoeblinConstants>,
}

impl SpectrumReport {
    /// Summarizes an undirected model: spectrum, mixing factors, and the
    /// Doeblin constants when the chain is aperiodic.
    pub fn from_model(tm: &TransitionModel) -> Result<Self> {
        let summary = normalized_laplacian(tm)?;
        let doeblin = if tm.period() == 1 {
            Some(doeblin_constants(tm)?)
        } else {
            None
        };
        Ok(SpectrumReport {
            eigenvalues: summary.eigenvalues,
            mu_star: summary.mu_star,
            nu_star: summary.nu_star,
            bipartite: tm.bipartite(),
            doeblin,
        })
    }
}
