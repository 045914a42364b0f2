//! Deterministic embedding stage over a co-occurrence corpus.
//!
//! The objective is the multiplicity-weighted sum
//! F(Z, D) = sum_pairs m(v, c) g_vc(Z) with the per-pair term
//! g_vc(Z) = ln sigma(z_v . z_c) - lambda ||z_v||^2; the quadratic
//! regularizer keeps g bounded above so the maximizer is finite. Training
//! ascends the normalized form (1/|D|) F, which only sees pair frequencies:
//! corpora that differ by a constant multiplicity factor produce identical
//! embeddings.

use std::io::Write;

use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use crate::error::{Error, Result};
use crate::walker::Corpus;

/// Dense embedding matrix, one column z_v per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    /// Shape (dim, vertex_count).
    pub z: Array2<f64>,
}

impl EmbeddingMatrix {
    pub fn dim(&self) -> usize {
        self.z.nrows()
    }

    pub fn vertex_count(&self) -> usize {
        self.z.ncols()
    }

    /// Writes `vertex_id<TAB>c1<TAB>...<TAB>cd` rows with
    /// 17-significant-digit decimals.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        for v in 0..self.vertex_count() {
            let coords: Vec<String> = self.z.column(v).iter().map(|x| format!("{x:.16e}")).collect();
            writeln!(w, "{v}\t{}", coords.join("\t"))?;
        }
        Ok(())
    }
}

/// Objective and optimizer settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveConfig {
    pub dim: usize,
    /// Regularizer weight on ||z_v||^2 inside each pair term.
    pub lambda: f64,
    pub learning_rate: f64,
    pub iterations: usize,
    /// Seed of the Gaussian initialization (std 0.1).
    pub init_seed: u64,
}

impl ObjectiveConfig {
    pub fn new(dim: usize, learning_rate: f64, iterations: usize, init_seed: u64) -> Self {
        ObjectiveConfig {
            dim,
            lambda: 1e-3,
            learning_rate,
            iterations,
            init_seed,
        }
    }
}

fn ln_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn pair_term(z: &Array2<f64>, v: usize, c: usize, lambda: f64) -> f64 {
    let zv = z.column(v);
    let zc = z.column(c);
    let dot = zv.dot(&zc);
    ln_sigmoid(dot) - lambda * zv.dot(&zv)
}

/// F(Z, D): multiplicity-weighted objective over pairs with m > 0.
pub fn objective_value(z: &EmbeddingMatrix, corpus: &Corpus, cfg: &ObjectiveConfig) -> f64 {
    corpus
        .counts()
        .map(|(v, c, m)| m as f64 * pair_term(&z.z, v, c, cfg.lambda))
        .sum()
}

/// Normalized objective: frequency-weighted, so it depends on the corpus
/// only through m / |D|.
pub fn normalized_objective_value(
    z: &EmbeddingMatrix,
    corpus: &Corpus,
    cfg: &ObjectiveConfig,
) -> Result<f64> {
    if corpus.total() == 0 {
        return Err(Error::EmptyCorpus);
    }
    let total = corpus.total() as f64;
    Ok(corpus
        .counts()
        .map(|(v, c, m)| m as f64 / total * pair_term(&z.z, v, c, cfg.lambda))
        .sum())
}

/// Gradient of the normalized objective with respect to Z.
pub fn normalized_gradient(
    z: &EmbeddingMatrix,
    corpus: &Corpus,
    cfg: &ObjectiveConfig,
) -> Result<Array2<f64>> {
    if corpus.total() == 0 {
        return Err(Error::EmptyCorpus);
    }
    let total = corpus.total() as f64;
    let mut grad = Array2::zeros(z.z.dim());
    for (v, c, m) in corpus.counts() {
        let f = m as f64 / total;
        let zv = z.z.column(v).to_owned();
        let zc = z.z.column(c).to_owned();
        let coeff = f * (1.0 - sigmoid(zv.dot(&zc)));
        {
            let mut gv = grad.column_mut(v);
            gv.scaled_add(coeff, &zc);
            gv.scaled_add(-2.0 * cfg.lambda * f, &zv);
        }
        let mut gc = grad.column_mut(c);
        gc.scaled_add(coeff, &zv);
    }
    Ok(grad)
}

/// Full-batch gradient ascent on the normalized objective from a seeded
/// Gaussian initialization. Deterministic: identical inputs produce
/// bit-identical embeddings.
pub fn train(corpus: &Corpus, vertex_count: usize, cfg: &ObjectiveConfig) -> Result<EmbeddingMatrix> {
    if corpus.total() == 0 {
        return Err(Error::EmptyCorpus);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.init_seed);
    let normal = Normal::new(0.0, 0.1).expect("valid normal");
    let mut z = Array2::zeros((cfg.dim, vertex_count));
    for v in 0..vertex_count {
        for k in 0..cfg.dim {
            z[[k, v]] = normal.sample(&mut rng);
        }
    }
    let mut embedding = EmbeddingMatrix { z };
    for iteration in 0..cfg.iterations {
        let value = normalized_objective_value(&embedding, corpus, cfg)?;
        if !value.is_finite() {
            return Err(Error::Diverged(iteration));
        }
        let grad = normalized_gradient(&embedding, corpus, cfg)?;
        embedding.z.scaled_add(cfg.learning_rate, &grad);
    }
    if !normalized_objective_value(&embedding, corpus, cfg)?.is_finite() {
        return Err(Error::Diverged(cfg.iterations));
    }
    Ok(embedding)
}
