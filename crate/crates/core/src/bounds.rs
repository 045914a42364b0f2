//! Finite-sample error bounds on corpus frequencies.
//!
//! Three families:
//! - a Hoeffding tail in the number of walks N,
//!   P(|m/|D| - E| > eps) < 2 exp(-2 N eps^2);
//! - an expectation-error bound U(L) on |E[m/|D|] - omega| that decays like
//!   1/L, driven by the Laplacian mixing factor on undirected graphs and by
//!   the Doeblin constants on directed aperiodic graphs;
//! - the joint bound P(|m/|D| - omega| > eps) < 2 exp(-2 N (eps - U)^2).
//!
//! Periodic directed chains only admit an O(1/L) rate without an explicit
//! constant; [`fit_inverse_l`] estimates the constant empirically instead.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::TransitionModel;
use crate::limits::{expected_frequency_matrix, omega_matrix};
use crate::spectral::{DoeblinConstants, SpectralSummary};
use crate::walker::StartDistribution;

/// Hoeffding tail bound 2 exp(-2 N eps^2); may exceed 1 (vacuous) for small
/// N eps^2.
pub fn hoeffding_failure_bound(walks: usize, epsilon: f64) -> f64 {
    2.0 * (-2.0 * walks as f64 * epsilon * epsilon).exp()
}

/// Deviation eps with failure probability at most `delta`:
/// sqrt(ln(2/delta) / (2N)). Inverse of [`hoeffding_failure_bound`].
pub fn epsilon_for_confidence(walks: usize, delta: f64) -> f64 {
    debug_assert!(delta > 0.0 && delta <= 2.0);
    ((2.0 / delta).ln() / (2.0 * walks as f64)).sqrt()
}

/// Joint tail bound 2 exp(-2 N (eps - U)^2), defined for eps > U.
pub fn joint_failure_bound(walks: usize, epsilon: f64, u: f64) -> Result<f64> {
    if epsilon <= u {
        return Err(Error::EpsilonBelowU { epsilon, u });
    }
    Ok(hoeffding_failure_bound(walks, epsilon - u))
}

/// Expectation-error bound with a vacuity flag: the bound stays valid when
/// the mixing factor hits 1 or the value exceeds 1, it just stops carrying
/// information.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UBound {
    pub value: f64,
    pub vacuous: bool,
}

/// Rows v and c of P^r for r = 1..=window, folded as
/// (1/2T) sum_r a_v (P^r)_vc + a_c (P^r)_cv with per-side prefactors.
fn window_pair_sum(
    tm: &TransitionModel,
    v: usize,
    c: usize,
    window: usize,
    prefactor_v: f64,
    prefactor_c: f64,
) -> f64 {
    let n = tm.vertex_count();
    let mut row_v = vec![0.0; n];
    row_v[v] = 1.0;
    let mut row_c = vec![0.0; n];
    row_c[c] = 1.0;
    let mut sum = 0.0;
    for _ in 1..=window {
        row_v = tm.left_multiply(&row_v);
        row_c = tm.left_multiply(&row_c);
        sum += prefactor_v * row_v[c] + prefactor_c * row_c[v];
    }
    sum / (2.0 * window as f64)
}

/// Expectation-error bound for undirected graphs:
///
/// ```text
/// U = 1/(L-T) * (1 - phi^(L-T))/(1 - phi) * E_{s~f}[d_s^{-1/2}]
///     * (1/2T) sum_r sqrt(d_v) (P^r)_vc + sqrt(d_c) (P^r)_cv
/// ```
///
/// with phi = mu* for non-bipartite graphs and phi = nu* (even L-T
/// required) for bipartite ones. At phi = 1 the geometric factor is
/// replaced by its limit L-T and the bound is flagged vacuous.
#[allow(clippy::too_many_arguments)]
pub fn undirected_u(
    tm: &TransitionModel,
    start: &StartDistribution,
    spectral: &SpectralSummary,
    v: usize,
    c: usize,
    length: usize,
    window: usize,
) -> Result<UBound> {
    if tm.graph().is_directed() {
        return Err(Error::DirectedUnsupported);
    }
    if length <= window {
        return Err(Error::InvalidConfig(format!(
            "walk length L = {length} must exceed window T = {window}"
        )));
    }
    let span = length - window;
    let phi = if tm.bipartite() {
        if span % 2 != 0 {
            return Err(Error::OddBipartiteSpan(span));
        }
        spectral.nu_star
    } else {
        spectral.mu_star
    };

    let at_one = 1.0 - phi <= 1e-12;
    let geometric = if at_one {
        span as f64
    } else {
        (1.0 - phi.powi(span as i32)) / (1.0 - phi)
    };

    let f = start.vector(tm)?;
    let d = tm.degrees();
    let inv_sqrt_degree: f64 = f
        .iter()
        .zip(d.iter())
        .map(|(&fs, &ds)| fs / ds.sqrt())
        .sum();
    let pair_sum = window_pair_sum(tm, v, c, window, d[v].sqrt(), d[c].sqrt());

    let value = geometric / span as f64 * inv_sqrt_degree * pair_sum;
    Ok(UBound {
        value,
        vacuous: at_one || value > 1.0,
    })
}

/// Expectation-error bound for directed aperiodic graphs:
///
/// ```text
/// U = C/(L-T) * (1 - alpha^(L-T))/(1 - alpha)
///     * (1/2T) sum_r (P^r)_vc + (P^r)_cv
/// ```
///
/// using the Doeblin constants (C, alpha).
pub fn directed_u(
    tm: &TransitionModel,
    doeblin: &DoeblinConstants,
    v: usize,
    c: usize,
    length: usize,
    window: usize,
) -> Result<UBound> {
    if tm.period() != 1 {
        return Err(Error::PeriodicRateOnly(tm.period()));
    }
    if length <= window {
        return Err(Error::InvalidConfig(format!(
            "walk length L = {length} must exceed window T = {window}"
        )));
    }
    let span = length - window;
    let geometric = (1.0 - doeblin.alpha.powi(span as i32)) / (1.0 - doeblin.alpha);
    let pair_sum = window_pair_sum(tm, v, c, window, 1.0, 1.0);
    let value = doeblin.c / span as f64 * geometric * pair_sum;
    Ok(UBound {
        value,
        vacuous: value > 1.0,
    })
}

/// Regime a bound report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundRegime {
    NOnly,
    JointUndirected,
    JointDirectedAperiodic,
    JointDirectedPeriodicRateOnly,
}

/// Evaluated bound for one (N, eps, L) configuration.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub epsilon: f64,
    pub failure_prob: f64,
    pub u: f64,
    pub regime: BoundRegime,
    pub vacuous: bool,
}

impl BoundReport {
    /// Hoeffding-only report (no expectation error term).
    pub fn n_only(walks: usize, epsilon: f64) -> Self {
        let failure_prob = hoeffding_failure_bound(walks, epsilon);
        BoundReport {
            epsilon,
            failure_prob,
            u: 0.0,
            regime: BoundRegime::NOnly,
            vacuous: failure_prob > 1.0,
        }
    }

    /// Joint report from a U bound.
    pub fn joint(walks: usize, epsilon: f64, u: UBound, regime: BoundRegime) -> Result<Self> {
        let failure_prob = joint_failure_bound(walks, epsilon, u.value)?;
        Ok(BoundReport {
            epsilon,
            failure_prob,
            u: u.value,
            regime,
            vacuous: u.vacuous || failure_prob > 1.0,
        })
    }
}

/// One row of a bound sweep: the actual expectation error of a pair at a
/// given L against its bound U.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub length: usize,
    pub v: usize,
    pub c: usize,
    pub actual_error: f64,
    pub u: f64,
    pub slack: f64,
}

/// Sweeps |E[m/|D|] - omega| against the lemma bound over the given walk
/// lengths, for every vertex pair. Picks the undirected or the directed
/// aperiodic bound to match the graph.
pub fn bound_sweep(
    tm: &TransitionModel,
    start: &StartDistribution,
    window: usize,
    lengths: &[usize],
) -> Result<Vec<SweepRow>> {
    let n = tm.vertex_count();
    let omega = omega_matrix(tm, window);
    enum Machinery {
        Undirected(Box<SpectralSummary>),
        Directed(DoeblinConstants),
    }
    let machinery = if tm.graph().is_directed() {
        Machinery::Directed(crate::spectral::doeblin_constants(tm)?)
    } else {
        Machinery::Undirected(Box::new(crate::spectral::normalized_laplacian(tm)?))
    };
    let mut rows = Vec::new();
    for &length in lengths {
        let expected = expected_frequency_matrix(tm, length, window, start)?;
        for v in 0..n {
            for c in 0..n {
                let actual = (expected[[v, c]] - omega[[v, c]]).abs();
                let u = match &machinery {
                    Machinery::Undirected(s) => {
                        undirected_u(tm, start, s, v, c, length, window)?.value
                    }
                    Machinery::Directed(d) => directed_u(tm, d, v, c, length, window)?.value,
                };
                rows.push(SweepRow {
                    length,
                    v,
                    c,
                    actual_error: actual,
                    u,
                    slack: u - actual,
                });
            }
        }
    }
    Ok(rows)
}

/// Writes sweep rows as TSV: `L pair actual_error U slack`.
pub fn write_sweep_tsv<W: Write>(mut w: W, rows: &[SweepRow]) -> Result<()> {
    writeln!(w, "#L\tpair\tactual_error\tU\tslack")?;
    for row in rows {
        writeln!(
            w,
            "{}\t{}:{}\t{:.16e}\t{:.16e}\t{:.16e}",
            row.length, row.v, row.c, row.actual_error, row.u, row.slack
        )?;
    }
    Ok(())
}

/// Least-squares fit of err = c / L through the origin, with the usual R^2
/// against the mean.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InverseFit {
    pub c: f64,
    pub r_squared: f64,
}

/// Fits errors to c / L. Used where only the O(1/L) rate is available.
pub fn fit_inverse_l(lengths: &[f64], errors: &[f64]) -> Result<InverseFit> {
    if lengths.len() != errors.len() || lengths.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two (L, error) points".to_string(),
        ));
    }
    let xs: Vec<f64> = lengths.iter().map(|&l| 1.0 / l).collect();
    let sxy: f64 = xs.iter().zip(errors.iter()).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let c = sxy / sxx;
    let mean = errors.iter().sum::<f64>() / errors.len() as f64;
    let ss_res: f64 = xs
        .iter()
        .zip(errors.iter())
        .map(|(x, y)| (y - c * x).powi(2))
        .sum();
    let ss_tot: f64 = errors.iter().map(|y| (y - mean).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(InverseFit { c, r_squared })
}

/// Least-squares slope of ln(y) against ln(x).
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two (x, y) points".to_string(),
        ));
    }
    if xs.iter().chain(ys.iter()).any(|&v| v <= 0.0) {
        return Err(Error::InvalidArgument(
            "log-log fit needs positive data".to_string(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx
        .iter()
        .zip(ly.iter())
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen, Graph, TransitionModel};
    use crate::spectral::{doeblin_constants, normalized_laplacian};
    use approx::assert_abs_diff_eq;

    #[test]
    fn hoeffding_closed_form() {
        let eps = epsilon_for_confidence(1000, 0.05);
        assert_abs_diff_eq!(eps, 0.04294694083467376, epsilon = 1e-15);
        assert_abs_diff_eq!(hoeffding_failure_bound(1000, eps), 0.05, epsilon = 1e-12);
        assert_eq!(hoeffding_failure_bound(1000, f64::INFINITY), 0.0);
        // Vacuous but well-defined above 1.
        let loose = hoeffding_failure_bound(1, 0.01);
        assert!(loose > 1.9996 && loose < 2.0);
    }

    #[test]
    fn epsilon_scaling() {
        assert_abs_diff_eq!(epsilon_for_confidence(100, 2.0), 0.0);
        let e1 = epsilon_for_confidence(250, 0.05);
        let e4 = epsilon_for_confidence(1000, 0.05);
        assert_abs_diff_eq!(e1 / e4, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn hoeffding_round_trip() {
        for &n in &[1usize, 10, 200, 5000] {
            for &delta in &[0.01, 0.05, 0.5, 1.5] {
                let eps = epsilon_for_confidence(n, delta);
                assert_abs_diff_eq!(hoeffding_failure_bound(n, eps), delta, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn joint_bound_closed_form() {
        assert_abs_diff_eq!(
            joint_failure_bound(1000, 0.1, 0.05).unwrap(),
            2.0 * (-5.0f64).exp(),
            epsilon = 1e-15
        );
        // U = 0 recovers the plain Hoeffding bound.
        assert_abs_diff_eq!(
            joint_failure_bound(500, 0.03, 0.0).unwrap(),
            hoeffding_failure_bound(500, 0.03),
            epsilon = 1e-18
        );
        // eps -> U+ goes vacuous towards 2.
        let near = joint_failure_bound(1000, 0.05 + 1e-9, 0.05).unwrap();
        assert!((near - 2.0).abs() < 1e-8);
        assert!(matches!(
            joint_failure_bound(1000, 0.05, 0.05),
            Err(Error::EpsilonBelowU { .. })
        ));
    }

    #[test]
    fn undirected_u_on_half_weight_triangle() {
        // Unit out-weight per vertex makes every degree term 1, so
        // U = (1/10) (1 - 2^-10)/(1/2) * (1/2)(0.5 + 0.5) = 1023/10240.
        let tm = TransitionModel::build(gen::complete_weighted(3, 0.5)).unwrap();
        let s = normalized_laplacian(&tm).unwrap();
        assert_abs_diff_eq!(s.mu_star, 0.5, epsilon = 1e-12);
        let u = undirected_u(&tm, &StartDistribution::Uniform, &s, 0, 1, 11, 1).unwrap();
        assert!(!u.vacuous);
        assert_abs_diff_eq!(u.value, 1023.0 / 10240.0, epsilon = 1e-14);
    }

    #[test]
    fn undirected_u_decreases_in_length() {
        let tm = TransitionModel::build(gen::random_connected(9, 10, 4)).unwrap();
        let s = normalized_laplacian(&tm).unwrap();
        let mut prev = f64::INFINITY;
        for length in [4usize, 6, 10, 20, 50, 200] {
            let u = undirected_u(&tm, &StartDistribution::Uniform, &s, 0, 1, length, 2)
                .unwrap()
                .value;
            assert!(u < prev, "U({length}) = {u} did not decrease");
            prev = u;
        }
        assert!(prev < 1e-1);
    }

    #[test]
    fn bipartite_u_needs_even_span() {
        let tm = TransitionModel::build(gen::complete_bipartite(3, 4)).unwrap();
        let s = normalized_laplacian(&tm).unwrap();
        assert!(matches!(
            undirected_u(&tm, &StartDistribution::Uniform, &s, 0, 3, 4, 1),
            Err(Error::OddBipartiteSpan(3))
        ));
        let u = undirected_u(&tm, &StartDistribution::Uniform, &s, 0, 3, 5, 1).unwrap();
        assert!(u.value.is_finite() && u.value > 0.0);
    }

    #[test]
    fn mixing_factor_one_is_flagged_vacuous() {
        let tm = TransitionModel::build(gen::complete(3)).unwrap();
        let mut s = normalized_laplacian(&tm).unwrap();
        s.mu_star = 1.0;
        let u = undirected_u(&tm, &StartDistribution::Uniform, &s, 0, 1, 11, 1).unwrap();
        assert!(u.vacuous);
        // Geometric factor replaced by its limit span = 10:
        // U = (1/10) * 10 * E[d^-1/2] * (1/2)(P_01 + P_10).
        let d = 2.0f64;
        let expect = d.powf(-0.5) * 0.5 * (0.5 * d.sqrt() + 0.5 * d.sqrt());
        assert_abs_diff_eq!(u.value, expect, epsilon = 1e-12);
    }

    #[test]
    fn directed_u_finite_and_decreasing() {
        let g = Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0), (0, 0, 1.0)], true)
            .unwrap();
        let tm = TransitionModel::build(g).unwrap();
        let doeblin = doeblin_constants(&tm).unwrap();
        let mut prev = f64::INFINITY;
        for length in [5usize, 10, 30, 100] {
            let u = directed_u(&tm, &doeblin, 0, 1, length, 1).unwrap().value;
            assert!(u.is_finite() && u >= 0.0);
            assert!(u < prev);
            prev = u;
        }
        assert!(prev < 0.2, "U(100) = {prev}");
    }

    #[test]
    fn directed_u_rejects_periodic_chains() {
        let tm = TransitionModel::build(gen::cycle(3, true)).unwrap();
        let fake = DoeblinConstants {
            r: 1,
            theta: 0.5,
            alpha: 0.5,
            c: 2.0,
        };
        assert!(matches!(
            directed_u(&tm, &fake, 0, 1, 10, 1),
            Err(Error::PeriodicRateOnly(3))
        ));
    }

    #[test]
    fn sweep_rows_cover_all_pairs() {
        let tm = TransitionModel::build(gen::complete(3)).unwrap();
        let rows = bound_sweep(&tm, &StartDistribution::Uniform, 1, &[5, 9]).unwrap();
        assert_eq!(rows.len(), 2 * 9);
        for row in &rows {
            assert!(row.slack >= 0.0, "U violated at {row:?}");
            assert_abs_diff_eq!(row.slack, row.u - row.actual_error, epsilon = 1e-18);
        }
        let mut buf = Vec::new();
        write_sweep_tsv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("#L\tpair\tactual_error\tU\tslack\n"));
        assert_eq!(text.lines().count(), 1 + rows.len());
    }

    #[test]
    fn inverse_l_fit_recovers_constant() {
        let ls: Vec<f64> = (5..40).map(|l| l as f64).collect();
        let errs: Vec<f64> = ls.iter().map(|l| 3.0 / l).collect();
        let fit = fit_inverse_l(&ls, &errs).unwrap();
        assert_abs_diff_eq!(fit.c, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn loglog_slope_recovers_exponent() {
        let xs: Vec<f64> = [10.0, 100.0, 1000.0, 10000.0].to_vec();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x.powf(-0.5)).collect();
        let slope = fit_loglog_slope(&xs, &ys).unwrap();
        assert_abs_diff_eq!(slope, -0.5, epsilon = 1e-12);
        assert!(fit_loglog_slope(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn reports_marshal_to_json() {
        let report = BoundReport::n_only(1000, 0.05);
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"regime\":\"n_only\""));
        let u = UBound {
            value: 0.01,
            vacuous: false,
        };
        let joint = BoundReport::joint(1000, 0.05, u, BoundRegime::JointUndirected).unwrap();
        assert_abs_diff_eq!(
            joint.failure_prob,
            hoeffding_failure_bound(1000, 0.04),
            epsilon = 1e-15
        );
        assert_eq!(joint.regime, BoundRegime::JointUndirected);
    }

}
