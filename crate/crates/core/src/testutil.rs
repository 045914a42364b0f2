//! Brute-force oracles for test suites (feature `test-utils`).

use ndarray::Array2;

use crate::graph::TransitionModel;
use crate::walker::StartDistribution;

/// Expected relative pair frequencies by exhaustive enumeration: every walk
/// of the given length is visited with its exact path probability and run
/// through the window pass. Exponential in the walk length; only for desk
/// checks of the closed-form expectation.
pub fn enumerate_expected_frequencies(
    tm: &TransitionModel,
    length: usize,
    window: usize,
    start: &StartDistribution,
) -> Array2<f64> {
    assert!(window >= 1 && length > window);
    let n = tm.vertex_count();
    let f = start.vector(tm).expect("valid start distribution");
    let mut acc = Array2::zeros((n, n));
    let mut walk = Vec::with_capacity(length);
    for s in 0..n {
        if f[s] > 0.0 {
            walk.push(s);
            extend(tm, &mut walk, f[s], length, window, &mut acc);
            walk.pop();
        }
    }
    let pairs_per_walk = (2 * (length - window) * window) as f64;
    acc / pairs_per_walk
}

fn extend(
    tm: &TransitionModel,
    walk: &mut Vec<usize>,
    prob: f64,
    length: usize,
    window: usize,
    acc: &mut Array2<f64>,
) {
    if walk.len() == length {
        for j in 0..(length - window) {
            for r in 1..=window {
                acc[[walk[j], walk[j + r]]] += prob;
                acc[[walk[j + r], walk[j]]] += prob;
            }
        }
        return;
    }
    let v = *walk.last().unwrap();
    let steps: Vec<(usize, f64)> = tm.prob_row(v).collect();
    for (t, p) in steps {
        if p > 0.0 {
            walk.push(t);
            extend(tm, walk, prob * p, length, window, acc);
            walk.pop();
        }
    }
}
