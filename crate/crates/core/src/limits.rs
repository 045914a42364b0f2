//! Exact expectations of relative co-occurrence frequencies.
//!
//! For a corpus sampled with N walks of length L and window T from start
//! distribution f, the expected relative frequency of the ordered pair
//! (v, c) is
//!
//! ```text
//! E[m(v,c)/|D|] = E_{s~f}[ (1/(L-T)) sum_{j=0}^{L-T-1} (1/2T) sum_{r=1}^{T}
//!                          (P^j)_sv (P^r)_vc + (P^j)_sc (P^r)_cv ]
//! ```
//!
//! and its limit as L grows is
//!
//! ```text
//! omega(v,c) = (1/2T) sum_{r=1}^{T} pi_v (P^r)_vc + pi_c (P^r)_cv.
//! ```
//!
//! Both collapse to q-weighted row/column sums of S = sum_{r<=T} P^r, where
//! q is the j-averaged start occupation (q = pi for omega), so the
//! evaluation costs O(L |E|) vector iterations plus T dense products.

use std::io::Write;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::TransitionModel;
use crate::walker::StartDistribution;

/// Exact expectation and asymptotic limit for one parameter set.
#[derive(Debug, Clone)]
pub struct LimitMatrices {
    pub expected: Array2<f64>,
    pub omega: Array2<f64>,
    pub length: usize,
    pub window: usize,
    pub start: StartDistribution,
}

impl LimitMatrices {
    pub fn compute(
        tm: &TransitionModel,
        length: usize,
        window: usize,
        start: &StartDistribution,
    ) -> Result<Self> {
        Ok(LimitMatrices {
            expected: expected_frequency_matrix(tm, length, window, start)?,
            omega: omega_matrix(tm, window),
            length,
            window,
            start: start.clone(),
        })
    }
}

/// Requested rows of P^t, computed by iterated sparse products. `t = 0`
/// yields identity rows.
pub fn matrix_power_rows(tm: &TransitionModel, t: usize, rows: Option<&[usize]>) -> Array2<f64> {
    let n = tm.vertex_count();
    let all_rows: Vec<usize>;
    let rows = match rows {
        Some(r) => r,
        None => {
            all_rows = (0..n).collect();
            &all_rows
        }
    };
    let mut out = Array2::zeros((rows.len(), n));
    for (i, &r) in rows.iter().enumerate() {
        out[[i, r]] = 1.0;
    }
    for _ in 0..t {
        out = tm.right_multiply_dense(&out);
    }
    out
}

/// S = sum_{r=1}^{T} P^r as a dense matrix.
fn window_power_sum(tm: &TransitionModel, window: usize) -> Array2<f64> {
    let n = tm.vertex_count();
    let mut power = Array2::eye(n);
    let mut sum = Array2::zeros((n, n));
    for _ in 0..window {
        power = tm.right_multiply_dense(&power);
        sum += &power;
    }
    sum
}

/// (diag(q) S + (diag(q) S)^T) / (2T): the common closed form of the
/// expectation and of omega, specialized by the occupation vector q.
fn pair_matrix(q: &[f64], s: &Array2<f64>, window: usize) -> Array2<f64> {
    let n = q.len();
    let mut out = Array2::zeros((n, n));
    let scale = 1.0 / (2.0 * window as f64);
    for v in 0..n {
        for c in 0..n {
            out[[v, c]] = (q[v] * s[[v, c]] + q[c] * s[[c, v]]) * scale;
        }
    }
    out
}

/// Exact E[m(v,c)/|D|] for finite L.
pub fn expected_frequency_matrix(
    tm: &TransitionModel,
    length: usize,
    window: usize,
    start: &StartDistribution,
) -> Result<Array2<f64>> {
    if window < 1 {
        return Err(Error::InvalidConfig("window T must be >= 1".to_string()));
    }
    if length <= window {
        return Err(Error::InvalidConfig(format!(
            "walk length L = {length} must exceed window T = {window}"
        )));
    }
    let span = length - window;

    // q = average over j = 0..L-T-1 of f P^j, built by running average so no
    // P^j is ever materialized.
    let mut x = start.vector(tm)?;
    let mut q = x.clone();
    for _ in 1..span {
        x = tm.left_multiply(&x);
        for (qi, xi) in q.iter_mut().zip(x.iter()) {
            *qi += xi;
        }
    }
    for qi in q.iter_mut() {
        *qi /= span as f64;
    }

    let s = window_power_sum(tm, window);
    Ok(pair_matrix(&q, &s, window))
}

/// Asymptotic relative-frequency matrix omega.
pub fn omega_matrix(tm: &TransitionModel, window: usize) -> Array2<f64> {
    let s = window_power_sum(tm, window);
    pair_matrix(tm.pi(), &s, window)
}

/// Norm selector for matrix errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorNorm {
    Frobenius,
    MaxAbs,
}

/// Error between a frequency matrix and a reference in the selected norm.
pub fn corpus_error(freqs: &Array2<f64>, reference: &Array2<f64>, norm: ErrorNorm) -> Result<f64> {
    if freqs.dim() != reference.dim() {
        let (a, b) = freqs.dim();
        let (c, d) = reference.dim();
        return Err(Error::ShapeMismatch(a, b, c, d));
    }
    let diff = freqs - reference;
    Ok(match norm {
        ErrorNorm::Frobenius => diff.iter().map(|x| x * x).sum::<f64>().sqrt(),
        ErrorNorm::MaxAbs => diff.iter().fold(0.0f64, |acc, x| acc.max(x.abs())),
    })
}

/// Writes a dense matrix as row-major TSV with 17-significant-digit
/// decimals.
pub fn write_matrix_tsv<W: Write>(mut w: W, m: &Array2<f64>) -> Result<()> {
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(w, "{}", line.join("\t"))?;
    }
    Ok(())
}

/// Writes the nonzero entries of a matrix as COO TSV (`row col value`).
pub fn write_matrix_coo_tsv<W: Write>(mut w: W, m: &Array2<f64>) -> Result<()> {
    for ((i, j), &x) in m.indexed_iter() {
        if x != 0.0 {
            writeln!(w, "{i}\t{j}\t{x:.16e}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen, Graph, TransitionModel};
    use approx::assert_abs_diff_eq;

    fn k2() -> TransitionModel {
        TransitionModel::build(Graph::from_edges(2, &[(0, 1, 1.0)], false).unwrap()).unwrap()
    }

    #[test]
    fn power_zero_is_identity() {
        let tm = TransitionModel::build(gen::complete(3)).unwrap();
        let p0 = matrix_power_rows(&tm, 0, None);
        assert_eq!(p0, Array2::<f64>::eye(3));
    }

    #[test]
    fn alternating_chain_squares_to_identity() {
        let tm = k2();
        let p2 = matrix_power_rows(&tm, 2, None);
        assert_abs_diff_eq!(p2[[0, 0]], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p2[[0, 1]], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn triangle_squared_by_hand() {
        // P = (J - I)/2, so P^2 has diagonal 1/2 and off-diagonal 1/4.
        let tm = TransitionModel::build(gen::complete(3)).unwrap();
        let p2 = matrix_power_rows(&tm, 2, None);
        for v in 0..3 {
            for c in 0..3 {
                let expect = if v == c { 0.5 } else { 0.25 };
                assert_abs_diff_eq!(p2[[v, c]], expect, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn row_subset_matches_full_power() {
        let tm = TransitionModel::build(gen::random_connected(8, 6, 21)).unwrap();
        let full = matrix_power_rows(&tm, 5, None);
        let some = matrix_power_rows(&tm, 5, Some(&[2, 6]));
        for (i, &r) in [2usize, 6].iter().enumerate() {
            for c in 0..8 {
                assert_abs_diff_eq!(some[[i, c]], full[[r, c]], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn omega_on_single_edge() {
        let tm = k2();
        let omega = omega_matrix(&tm, 1);
        assert_abs_diff_eq!(omega[[0, 1]], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(omega[[1, 0]], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(omega[[0, 0]], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn omega_on_triangle() {
        let tm = TransitionModel::build(gen::complete(3)).unwrap();
        let omega = omega_matrix(&tm, 1);
        for v in 0..3 {
            for c in 0..3 {
                let expect = if v == c { 0.0 } else { 1.0 / 6.0 };
                assert_abs_diff_eq!(omega[[v, c]], expect, epsilon = 1e-15);
            }
        }
        // T = 2 folds in P^2: off-diagonal 1/8, diagonal 1/12.
        let omega = omega_matrix(&tm, 2);
        for v in 0..3 {
            for c in 0..3 {
                let expect = if v == c { 1.0 / 12.0 } else { 1.0 / 8.0 };
                assert_abs_diff_eq!(omega[[v, c]], expect, epsilon = 1e-14);
            }
        }
        assert_abs_diff_eq!(omega.sum(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn omega_is_exactly_symmetric() {
        let tm = TransitionModel::build(gen::random_connected(10, 12, 5)).unwrap();
        let omega = omega_matrix(&tm, 3);
        for v in 0..10 {
            for c in 0..10 {
                assert_eq!(omega[[v, c]].to_bits(), omega[[c, v]].to_bits());
            }
        }
    }

    #[test]
    fn stationary_start_reproduces_omega_at_any_length() {
        let tm = TransitionModel::build(gen::random_connected(9, 8, 2)).unwrap();
        let omega = omega_matrix(&tm, 2);
        for length in [3, 7, 30] {
            let e =
                expected_frequency_matrix(&tm, length, 2, &StartDistribution::Stationary).unwrap();
            let err = corpus_error(&e, &omega, ErrorNorm::MaxAbs).unwrap();
            assert!(err < 1e-12, "L = {length}: {err}");
        }
    }

    #[test]
    fn single_edge_uniform_start() {
        let tm = k2();
        let e = expected_frequency_matrix(&tm, 3, 1, &StartDistribution::Uniform).unwrap();
        assert_abs_diff_eq!(e[[0, 1]], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(e[[1, 0]], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(e[[0, 0]], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn expectation_entries_sum_to_one() {
        let tm = TransitionModel::build(gen::random_connected(7, 5, 17)).unwrap();
        for (length, window) in [(4, 1), (9, 3), (40, 5)] {
            let e = expected_frequency_matrix(&tm, length, window, &StartDistribution::Uniform)
                .unwrap();
            assert_abs_diff_eq!(e.sum(), 1.0, epsilon = 1e-12);
            assert!(e.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn rejects_short_walks() {
        let tm = k2();
        assert!(matches!(
            expected_frequency_matrix(&tm, 2, 2, &StartDistribution::Uniform),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn corpus_error_norms() {
        let a = Array2::<f64>::zeros((2, 2));
        let mut b = a.clone();
        assert_abs_diff_eq!(corpus_error(&a, &b, ErrorNorm::Frobenius).unwrap(), 0.0);
        b[[0, 1]] = 0.1;
        assert_abs_diff_eq!(
            corpus_error(&a, &b, ErrorNorm::Frobenius).unwrap(),
            0.1,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            corpus_error(&a, &b, ErrorNorm::MaxAbs).unwrap(),
            0.1,
            epsilon = 1e-15
        );
        let c = Array2::<f64>::zeros((3, 2));
        assert!(matches!(
            corpus_error(&a, &c, ErrorNorm::Frobenius),
            Err(Error::ShapeMismatch(..))
        ));
    }

    #[test]
    fn power_rows_stay_stochastic() {
        let tm = TransitionModel::build(gen::random_connected(12, 14, 33)).unwrap();
        for t in [1usize, 5, 20, 100] {
            let p = matrix_power_rows(&tm, t, None);
            for (v, row) in p.rows().into_iter().enumerate() {
                let sum: f64 = row.sum();
                assert!(
                    (sum - 1.0).abs() < 1e-12 * t as f64,
                    "row {v} of P^{t} sums to {sum}"
                );
            }
        }
    }

    #[test]
    fn limit_matrices_bundle() {
        let tm = TransitionModel::build(gen::complete(3)).unwrap();
        let lm = LimitMatrices::compute(&tm, 9, 2, &StartDistribution::Uniform).unwrap();
        assert_eq!(lm.length, 9);
        assert_eq!(lm.window, 2);
        assert_abs_diff_eq!(lm.expected.sum(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lm.omega[[0, 1]], 1.0 / 8.0, epsilon = 1e-14);
        // Uniform start equals pi on a regular graph, so the two matrices
        // coincide here.
        let err = corpus_error(&lm.expected, &lm.omega, ErrorNorm::MaxAbs).unwrap();
        assert!(err < 1e-13);
    }

    #[test]
    fn matrix_tsv_uses_17_significant_digits() {
        let mut m = Array2::<f64>::zeros((1, 2));
        m[[0, 0]] = 1.0 / 3.0;
        m[[0, 1]] = 0.5;
        let mut buf = Vec::new();
        write_matrix_tsv(&mut buf, &m).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "3.3333333333333331e-1\t5.0000000000000000e-1\n");
        let mut coo = Vec::new();
        write_matrix_coo_tsv(&mut coo, &m).unwrap();
        let text = String::from_utf8(coo).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("0\t0\t"));
    }
}
