use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("vertex {0} has no outgoing edge")]
    DanglingVertex(usize),

    #[error("graph is not connected (vertex {0} unreachable)")]
    Disconnected(usize),

    #[error("graph is not strongly connected (vertex {0} unreachable)")]
    NotStronglyConnected(usize),

    #[error("graph not irreducible: stationary power iteration did not converge")]
    NotIrreducible,

    #[error("operation requires an undirected graph")]
    DirectedUnsupported,

    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("invalid walk configuration: {0}")]
    InvalidConfig(String),

    #[error("empty corpus: total multiplicity is zero")]
    EmptyCorpus,

    #[error("shape mismatch: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),

    #[error("window must cover an even number of consecutive steps, got {0}")]
    OddWindow(usize),

    #[error("periodic chain has no Doeblin constants (period {0})")]
    PeriodicChain(usize),

    #[error("no r <= {cap} with P^r entrywise positive")]
    DoeblinRangeExceeded { cap: usize },

    #[error(
        "period {0} > 1: only an O(1/L) rate without an explicit constant is \
         available for periodic chains; fit the empirical error with fit_inverse_l"
    )]
    PeriodicRateOnly(usize),

    #[error("bipartite expectation bound requires even L-T, got L-T = {0}")]
    OddBipartiteSpan(usize),

    #[error("bound undefined below U: epsilon = {epsilon} <= U = {u}")]
    EpsilonBelowU { epsilon: f64, u: f64 },

    #[error("training diverged: objective not finite at iteration {0}")]
    Diverged(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
