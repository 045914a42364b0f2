//! Corpus sampling: N random walks of length L populate a symmetric
//! co-occurrence count matrix with window size T.
//!
//! Walk n draws from a counter-based RNG stream keyed by (seed, n), so the
//! corpus is reproducible and independent of how walks are distributed over
//! worker threads. Steps are sampled by inverse CDF over the adjacency list
//! sorted by target id, which pins the tie-breaking of floating-point
//! boundaries.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::TransitionModel;

/// Above this vertex count per-worker accumulators switch from dense
/// vectors to sparse maps.
const DENSE_ACCUMULATOR_LIMIT: usize = 1024;

/// Starting distribution of each walk.
#[derive(Debug, Clone, PartialEq)]
pub enum StartDistribution {
    /// Uniform over vertices (the usual corpus-sampling default).
    Uniform,
    /// The stationary distribution of the walk.
    Stationary,
    /// Deterministic start at one vertex.
    OneHot(usize),
    /// Explicit probability vector over vertices.
    Explicit(Vec<f64>),
}

impl StartDistribution {
    /// Resolves to a probability vector over the model's vertices.
    pub fn vector(&self, tm: &TransitionModel) -> Result<Vec<f64>> {
        let n = tm.vertex_count();
        match self {
            StartDistribution::Uniform => Ok(vec![1.0 / n as f64; n]),
            StartDistribution::Stationary => Ok(tm.pi().to_vec()),
            StartDistribution::OneHot(v) => {
                if *v >= n {
                    return Err(Error::InvalidConfig(format!(
                        "one-hot start vertex {v} out of range for {n} vertices"
                    )));
                }
                let mut f = vec![0.0; n];
                f[*v] = 1.0;
                Ok(f)
            }
            StartDistribution::Explicit(f) => {
                if f.len() != n {
                    return Err(Error::InvalidConfig(format!(
                        "explicit start distribution has {} entries, graph has {n} vertices",
                        f.len()
                    )));
                }
                let sum: f64 = f.iter().sum();
                if f.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidConfig(
                        "explicit start distribution must be a probability vector".to_string(),
                    ));
                }
                Ok(f.clone())
            }
        }
    }

    fn sample<R: Rng>(&self, tm: &TransitionModel, rng: &mut R) -> usize {
        match self {
            StartDistribution::Uniform => rng.random_range(0..tm.vertex_count()),
            StartDistribution::Stationary => sample_cdf(tm.pi(), rng),
            StartDistribution::OneHot(v) => *v,
            StartDistribution::Explicit(f) => sample_cdf(f, rng),
        }
    }
}

fn sample_cdf<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cum += p;
        if cum > u {
            return i;
        }
    }
    probs.len() - 1
}

/// Sampling parameters: N walks of length L, window T, start law, RNG seed.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkConfig {
    pub walks: usize,
    pub length: usize,
    pub window: usize,
    pub start: StartDistribution,
    pub seed: u64,
}

impl WalkConfig {
    pub fn new(walks: usize, length: usize, window: usize, seed: u64) -> Self {
        WalkConfig {
            walks,
            length,
            window,
            start: StartDistribution::Uniform,
            seed,
        }
    }

    pub fn with_start(mut self, start: StartDistribution) -> Self {
        self.start = start;
        self
    }

    pub fn validate(&self, tm: &TransitionModel) -> Result<()> {
        if self.window < 1 {
            return Err(Error::InvalidConfig("window T must be >= 1".to_string()));
        }
        if self.length <= self.window {
            return Err(Error::InvalidConfig(format!(
                "walk length L = {} must exceed window T = {}",
                self.length, self.window
            )));
        }
        if self.walks < 1 {
            return Err(Error::InvalidConfig("need at least one walk".to_string()));
        }
        self.start.vector(tm)?;
        Ok(())
    }
}

/// Sparse co-occurrence corpus: counts m over ordered vertex pairs and the
/// total multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    counts: BTreeMap<(usize, usize), u64>,
    total: u64,
    config: WalkConfig,
}

impl Corpus {
    pub fn counts(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.counts.iter().map(|(&(v, c), &m)| (v, c, m))
    }

    pub fn count(&self, v: usize, c: usize) -> u64 {
        self.counts.get(&(v, c)).copied().unwrap_or(0)
    }

    /// Total multiplicity, always 2 N (L-T) T for sampled corpora.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn config(&self) -> &WalkConfig {
        &self.config
    }

    /// Relative frequency of one pair.
    pub fn frequency(&self, v: usize, c: usize) -> f64 {
        self.count(v, c) as f64 / self.total as f64
    }

    /// The same corpus with every multiplicity scaled by `factor`; pair
    /// frequencies are unchanged.
    pub fn scaled(&self, factor: u64) -> Corpus {
        Corpus {
            counts: self
                .counts
                .iter()
                .map(|(&k, &m)| (k, m * factor))
                .collect(),
            total: self.total * factor,
            config: self.config.clone(),
        }
    }

    /// Writes the corpus as TSV with a single header line
    /// `#total=<total> N=<N> L=<L> T=<T> seed=<seed>`.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "#total={} N={} L={} T={} seed={}",
            self.total, self.config.walks, self.config.length, self.config.window,
            self.config.seed
        )?;
        for (v, c, m) in self.counts() {
            writeln!(w, "{v}\t{c}\t{m}")?;
        }
        Ok(())
    }

    /// Reads a corpus written by [`Corpus::write_tsv`]. The start
    /// distribution is not part of the format and defaults to uniform.
    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines.next().ok_or(Error::EmptyCorpus)??;
        let header = header
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: "missing corpus header".to_string(),
            })?
            .trim();
        let mut total = None;
        let mut walks = None;
        let mut length = None;
        let mut window = None;
        let mut seed = None;
        for field in header.split_whitespace() {
            let (key, value) = field.split_once('=').ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("bad header field '{field}'"),
            })?;
            let parsed: u64 = value.parse().map_err(|_| Error::Parse {
                line: 1,
                message: format!("bad header value '{value}'"),
            })?;
            match key {
                "total" => total = Some(parsed),
                "N" => walks = Some(parsed as usize),
                "L" => length = Some(parsed as usize),
                "T" => window = Some(parsed as usize),
                "seed" => seed = Some(parsed),
                _ => {
                    return Err(Error::Parse {
                        line: 1,
                        message: format!("unknown header field '{key}'"),
                    })
                }
            }
        }
        let (total, walks, length, window, seed) =
            match (total, walks, length, window, seed) {
                (Some(a), Some(b), Some(c), Some(d), Some(e)) => (a, b, c, d, e),
                _ => {
                    return Err(Error::Parse {
                        line: 1,
                        message: "incomplete corpus header".to_string(),
                    })
                }
            };
        let mut counts = BTreeMap::new();
        let mut sum = 0u64;
        for (idx, line) in lines.enumerate() {
            let line_no = idx + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split('\t');
            let parse = |tok: Option<&str>| -> Result<u64> {
                tok.and_then(|t| t.parse().ok()).ok_or(Error::Parse {
                    line: line_no,
                    message: "expected 'v\\tc\\tcount'".to_string(),
                })
            };
            let v = parse(it.next())? as usize;
            let c = parse(it.next())? as usize;
            let m = parse(it.next())?;
            sum += m;
            counts.insert((v, c), m);
        }
        if sum != total {
            return Err(Error::Parse {
                line: 1,
                message: format!("header total {total} does not match sum {sum}"),
            });
        }
        Ok(Corpus {
            counts,
            total,
            config: WalkConfig::new(walks, length, window, seed),
        })
    }
}

/// Per-walk RNG stream keyed by (seed, walk index).
fn walk_rng(seed: u64, walk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(walk.wrapping_add(1));
    rng
}

/// Samples one walk of `length` steps starting at `start`.
///
/// Successors are drawn by inverse CDF over the sorted adjacency list:
/// scaled by d_v the draw picks the first neighbor whose cumulative weight
/// strictly exceeds u * d_v.
pub fn sample_walk<R: Rng>(
    tm: &TransitionModel,
    start: usize,
    length: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut walk = Vec::with_capacity(length);
    let mut v = start;
    walk.push(v);
    for _ in 1..length {
        v = step(tm, v, rng);
        walk.push(v);
    }
    walk
}

fn step<R: Rng>(tm: &TransitionModel, v: usize, rng: &mut R) -> usize {
    let (targets, weights) = tm.graph().neighbors(v);
    let x: f64 = rng.random::<f64>() * tm.degrees()[v];
    let mut cum = 0.0;
    for (&t, &w) in targets.iter().zip(weights.iter()) {
        cum += w;
        if cum > x {
            return t;
        }
    }
    *targets.last().expect("no dangling vertices")
}

fn accumulate_walk(
    tm: &TransitionModel,
    cfg: &WalkConfig,
    walk_index: u64,
    mut bump: impl FnMut(usize, usize),
) {
    let mut rng = walk_rng(cfg.seed, walk_index);
    let start = cfg.start.sample(tm, &mut rng);
    let walk = sample_walk(tm, start, cfg.length, &mut rng);
    for j in 0..(cfg.length - cfg.window) {
        for r in 1..=cfg.window {
            bump(walk[j], walk[j + r]);
            bump(walk[j + r], walk[j]);
        }
    }
}

/// Runs the corpus-generation algorithm: N walks, window pass, merged
/// counts. Walks are distributed over the current rayon pool; the counts are
/// bit-identical for any worker count.
pub fn generate_corpus(tm: &TransitionModel, cfg: &WalkConfig) -> Result<Corpus> {
    cfg.validate(tm)?;
    let n = tm.vertex_count();

    let counts: BTreeMap<(usize, usize), u64> = if n <= DENSE_ACCUMULATOR_LIMIT {
        let dense = (0..cfg.walks as u64)
            .into_par_iter()
            .fold(
                || vec![0u64; n * n],
                |mut acc, w| {
                    accumulate_walk(tm, cfg, w, |v, c| acc[v * n + c] += 1);
                    acc
                },
            )
            .reduce(
                || vec![0u64; n * n],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
        dense
            .into_iter()
            .enumerate()
            .filter(|&(_, m)| m > 0)
            .map(|(i, m)| ((i / n, i % n), m))
            .collect()
    } else {
        (0..cfg.walks as u64)
            .into_par_iter()
            .fold(BTreeMap::new, |mut acc: BTreeMap<(usize, usize), u64>, w| {
                accumulate_walk(tm, cfg, w, |v, c| *acc.entry((v, c)).or_insert(0) += 1);
                acc
            })
            .reduce(BTreeMap::new, |mut a, b| {
                for (k, m) in b {
                    *a.entry(k).or_insert(0) += m;
                }
                a
            })
    };

    let total: u64 = counts.values().sum();
    let expected = 2 * cfg.walks as u64 * (cfg.length - cfg.window) as u64 * cfg.window as u64;
    debug_assert_eq!(total, expected);
    Ok(Corpus {
        counts,
        total,
        config: cfg.clone(),
    })
}

/// Dense matrix of relative frequencies m(v, c) / total.
pub fn relative_frequencies(corpus: &Corpus, vertex_count: usize) -> Result<Array2<f64>> {
    if corpus.total == 0 {
        return Err(Error::EmptyCorpus);
    }
    let mut f = Array2::zeros((vertex_count, vertex_count));
    let total = corpus.total as f64;
    for (v, c, m) in corpus.counts() {
        f[[v, c]] = m as f64 / total;
    }
    Ok(f)
}

/// Fraction of the first `n_steps` positions of a single walk spent at each
/// vertex.
pub fn visit_frequencies<R: Rng>(
    tm: &TransitionModel,
    start: usize,
    n_steps: usize,
    rng: &mut R,
) -> Vec<f64> {
    let mut counts = vec![0u64; tm.vertex_count()];
    let mut v = start;
    counts[v] += 1;
    for _ in 1..n_steps {
        v = step(tm, v, rng);
        counts[v] += 1;
    }
    counts
        .into_iter()
        .map(|c| c as f64 / n_steps as f64)
        .collect()
}
