//! Walk-budget heuristic.
//!
//! For an excess step budget K = N (L - T), failure probability delta, and
//! absorbed graph constant g, the predicted deviation is
//!
//! ```text
//! eps(N) = g N / K + sqrt(ln(2/delta) / (2N))
//! ```
//!
//! (the U term under K >> N plus the Hoeffding term), minimized at
//!
//! ```text
//! N ~= 1/2 * cbrt(K^2 ln(2/delta) / g^2),
//! ```
//!
//! so N grows like K^(2/3). The plan rounds that optimum and derives
//! L = T + round(K / N).

use serde::Serialize;

use crate::error::{Error, Result};

/// A planned (N, L) split for a step budget.
#[derive(Debug, Clone, Serialize)]
pub struct HeuristicPlan {
    #[serde(rename = "K")]
    pub budget: u64,
    pub delta: f64,
    pub g: f64,
    #[serde(rename = "T")]
    pub window: usize,
    #[serde(rename = "N")]
    pub walks: usize,
    #[serde(rename = "L")]
    pub length: usize,
    pub predicted_epsilon: f64,
}

fn check_domain(budget: u64, delta: f64, g: f64) -> Result<()> {
    if budget < 1 {
        return Err(Error::InvalidArgument("budget K must be >= 1".to_string()));
    }
    if !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(Error::InvalidArgument(
            "failure probability delta must lie in (0, 1)".to_string(),
        ));
    }
    if !(g > 0.0) {
        return Err(Error::InvalidArgument("constant g must be positive".to_string()));
    }
    Ok(())
}

/// Predicted deviation eps(N) = g N / K + sqrt(ln(2/delta) / (2N)).
pub fn predicted_error(walks: usize, budget: u64, delta: f64, g: f64) -> f64 {
    g * walks as f64 / budget as f64 + ((2.0 / delta).ln() / (2.0 * walks as f64)).sqrt()
}

/// Chooses N and L for the budget: N is whichever integer bracketing the
/// continuous optimum predicts the smaller error (eps is strictly convex
/// in N, so that is the discrete minimizer), clamped to [1, K]; L - T is
/// K / N rounded, at least 1.
pub fn plan(budget: u64, delta: f64, g: f64, window: usize) -> Result<HeuristicPlan> {
    check_domain(budget, delta, g)?;
    if window < 1 {
        return Err(Error::InvalidArgument("window T must be >= 1".to_string()));
    }
    let k = budget as f64;
    let n_real = 0.5 * (k * k * (2.0 / delta).ln() / (g * g)).cbrt();
    let lower = (n_real.floor() as u64).clamp(1, budget) as usize;
    let upper = (n_real.ceil() as u64).clamp(1, budget) as usize;
    let walks = if predicted_error(upper, budget, delta, g)
        < predicted_error(lower, budget, delta, g)
    {
        upper
    } else {
        lower
    };
    let span = ((k / walks as f64).round_ties_even() as usize).max(1);
    let length = window + span;
    Ok(HeuristicPlan {
        budget,
        delta,
        g,
        window,
        walks,
        length,
        predicted_epsilon: predicted_error(walks, budget, delta, g),
    })
}

/// The three allocation strategies compared in the experiments.
#[derive(Debug, Clone, Serialize)]
pub struct StrategyComparison {
    /// Maximally parallel: N = K walks of minimal length L = T + 1.
    pub max_walks: (usize, usize),
    /// A single walk of length L = T + K.
    pub single_walk: (usize, usize),
    /// The heuristic split with delta = 0.01 and g = 1.
    pub heuristic: (usize, usize),
}

/// Builds the (N, L) tuples for the three strategies at the given budget.
pub fn compare_strategies(budget: u64, window: usize) -> Result<StrategyComparison> {
    let plan = plan(budget, 0.01, 1.0, window)?;
    Ok(StrategyComparison {
        max_walks: (budget as usize, window + 1),
        single_walk: (1, window + budget as usize),
        heuristic: (plan.walks, plan.length),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::fit_loglog_slope;
    use approx::assert_abs_diff_eq;

    /// Published regression targets for K = 2^10..2^15 at delta = 0.01,
    /// g = 1, T = 10; the formula's rounding may differ by one.
    const TARGET_WALKS: [usize; 6] = [88, 140, 224, 355, 563, 892];
    const TARGET_SPANS: [usize; 6] = [12, 15, 18, 23, 29, 37];

    #[test]
    fn heuristic_regression_within_one() {
        for (i, k) in (10..=15).enumerate() {
            let p = plan(1u64 << k, 0.01, 1.0, 10).unwrap();
            let span = p.length - p.window;
            assert!(
                p.walks.abs_diff(TARGET_WALKS[i]) <= 1,
                "K = 2^{k}: N = {} vs {}",
                p.walks,
                TARGET_WALKS[i]
            );
            assert!(
                span.abs_diff(TARGET_SPANS[i]) <= 1,
                "K = 2^{k}: L-T = {span} vs {}",
                TARGET_SPANS[i]
            );
        }
    }

    #[test]
    fn chosen_optimum_is_stable() {
        // Frozen discrete minimizers around 0.5 cbrt(K^2 ln 200).
        let expect = [89usize, 141, 223, 354, 562, 893];
        for (i, k) in (10..=15).enumerate() {
            let p = plan(1u64 << k, 0.01, 1.0, 10).unwrap();
            assert_eq!(p.walks, expect[i], "K = 2^{k}");
        }
    }

    #[test]
    fn predicted_error_closed_form() {
        assert_abs_diff_eq!(
            predicted_error(88, 1024, 0.01, 1.0),
            0.2594427620132763,
            epsilon = 1e-15
        );
        // g -> 0 leaves the pure concentration term.
        let pure = ((2.0f64 / 0.01).ln() / (2.0 * 88.0)).sqrt();
        assert_abs_diff_eq!(predicted_error(88, 1024, 0.01, 1e-15), pure, epsilon = 1e-12);
    }

    #[test]
    fn planned_walks_beat_neighbors() {
        for k in [6u32, 10, 13, 17] {
            for delta in [0.01, 0.1, 0.5] {
                for g in [0.5, 1.0, 2.0] {
                    let budget = 1u64 << k;
                    let p = plan(budget, delta, g, 10).unwrap();
                    let here = predicted_error(p.walks, budget, delta, g);
                    for other in [
                        p.walks - 1,
                        p.walks + 1,
                        (p.walks / 2).max(1),
                        p.walks * 2,
                    ] {
                        if other == 0 || other == p.walks {
                            continue;
                        }
                        assert!(
                            here <= predicted_error(other, budget, delta, g) + 1e-12,
                            "K = {budget}, delta = {delta}, g = {g}: N = {} loses to {}",
                            p.walks,
                            other
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn walks_scale_like_budget_to_two_thirds() {
        let ks: Vec<f64> = (10..=20).map(|k| (1u64 << k) as f64).collect();
        let ns: Vec<f64> = (10..=20)
            .map(|k| plan(1u64 << k, 0.01, 1.0, 10).unwrap().walks as f64)
            .collect();
        let slope = fit_loglog_slope(&ks, &ns).unwrap();
        assert!(
            (0.63..=0.70).contains(&slope),
            "log-log slope {slope} outside [0.63, 0.70]"
        );
        for (k, n) in ks.iter().zip(ns.iter()) {
            assert!(n / k < 0.1, "N/K = {} at K = {k}", n / k);
        }
    }

    #[test]
    fn budget_consistency() {
        for k in [1u64, 7, 100, 4096, 1 << 15] {
            let p = plan(k, 0.01, 1.0, 10).unwrap();
            let span = (p.length - p.window) as u64;
            let realized = p.walks as u64 * span;
            assert!(
                realized.abs_diff(k) <= p.walks as u64,
                "K = {k}: N (L-T) = {realized}"
            );
            assert!(p.length >= p.window + 1);
            assert!(p.walks >= 1);
        }
    }

    #[test]
    fn strategy_tuples() {
        let s = compare_strategies(1024, 10).unwrap();
        assert_eq!(s.max_walks, (1024, 11));
        assert_eq!(s.single_walk, (1, 1034));
        assert_eq!(s.heuristic.1, 22);
        assert!(s.heuristic.0.abs_diff(88) <= 1);
        // Degenerate budget collapses all three.
        let s = compare_strategies(1, 1).unwrap();
        assert_eq!(s.max_walks, (1, 2));
        assert_eq!(s.single_walk, (1, 2));
        assert_eq!(s.heuristic, (1, 2));
        // A and B satisfy N (L-T) = K exactly by construction.
        let s = compare_strategies(999, 10).unwrap();
        assert_eq!(s.max_walks.0 * (s.max_walks.1 - 10), 999);
        assert_eq!(s.single_walk.0 * (s.single_walk.1 - 10), 999);
    }

    #[test]
    fn domain_checks() {
        assert!(plan(0, 0.01, 1.0, 10).is_err());
        assert!(plan(10, 0.0, 1.0, 10).is_err());
        assert!(plan(10, 1.0, 1.0, 10).is_err());
        assert!(plan(10, 0.01, 0.0, 10).is_err());
        assert!(plan(10, 0.01, 1.0, 0).is_err());
    }

    #[test]
    fn plan_serializes_with_short_keys() {
        let p = plan(1024, 0.01, 1.0, 10).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"K\":1024"));
        assert!(json.contains("\"N\":"));
        assert!(json.contains("\"L\":22"));
        assert!(json.contains("\"predicted_epsilon\":"));
    }
}
