//! Self-contained experiment reports.
//!
//! Every report embeds the exact configuration that produced its data, so a
//! run can be replayed from the report header alone. Timings never go into
//! reports; they are printed to stderr so repeated runs stay byte-identical.

use serde::Serialize;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Configuration of an e1 convergence run.
#[derive(Debug, Clone, Serialize)]
pub struct E1Config {
    pub graph: String,
    pub directed: bool,
    pub axis: String,
    pub grid: Vec<u64>,
    pub fixed_walks: usize,
    pub fixed_length: usize,
    pub window: usize,
    pub seeds: u64,
    pub seed: u64,
    pub start: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct E1Point {
    pub x: u64,
    pub mean_error: f64,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct E1Report {
    pub experiment: String,
    pub version: String,
    pub config: E1Config,
    pub points: Vec<E1Point>,
}

impl E1Report {
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "#experiment={} version={} graph={} directed={} axis={} fixed_N={} fixed_L={} T={} seeds={} seed={} start={} grid={}\n",
            self.experiment,
            self.version,
            self.config.graph,
            self.config.directed,
            self.config.axis,
            self.config.fixed_walks,
            self.config.fixed_length,
            self.config.window,
            self.config.seeds,
            self.config.seed,
            self.config.start,
            join_u64(&self.config.grid),
        ));
        out.push_str("#x\tmean_error\n");
        for p in &self.points {
            out.push_str(&format!("{}\t{:.16e}\n", p.x, p.mean_error));
        }
        out
    }
}

/// Configuration of an e2 strategy comparison.
#[derive(Debug, Clone, Serialize)]
pub struct E2Config {
    pub graph: String,
    pub directed: bool,
    pub k_grid: Vec<u64>,
    pub window: usize,
    pub delta: f64,
    pub seeds: u64,
    pub seed: u64,
    pub strategy: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategyResult {
    pub walks: usize,
    pub length: usize,
    pub mean_error: f64,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct E2Point {
    #[serde(rename = "K")]
    pub budget: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_walks: Option<StrategyResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub single_walk: Option<StrategyResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heuristic: Option<StrategyResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct E2Report {
    pub experiment: String,
    pub version: String,
    pub config: E2Config,
    pub points: Vec<E2Point>,
}

impl E2Report {
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "#experiment=e2 version={} graph={} directed={} T={} delta={} seeds={} seed={} strategy={} k_grid={}\n",
            self.version,
            self.config.graph,
            self.config.directed,
            self.config.window,
            self.config.delta,
            self.config.seeds,
            self.config.seed,
            self.config.strategy,
            join_u64(&self.config.k_grid),
        ));
        let mut header = String::from("#K");
        let has = |f: fn(&E2Point) -> bool| self.points.iter().any(f);
        let with_a = has(|p| p.max_walks.is_some());
        let with_b = has(|p| p.single_walk.is_some());
        let with_c = has(|p| p.heuristic.is_some());
        if with_a {
            header.push_str("\tmax_walks");
        }
        if with_b {
            header.push_str("\tsingle_walk");
        }
        if with_c {
            header.push_str("\theuristic");
        }
        out.push_str(&header);
        out.push('\n');
        for p in &self.points {
            let mut line = format!("{}", p.budget);
            for (enabled, result) in [
                (with_a, &p.max_walks),
                (with_b, &p.single_walk),
                (with_c, &p.heuristic),
            ] {
                if enabled {
                    match result {
                        Some(r) => line.push_str(&format!("\t{:.16e}", r.mean_error)),
                        None => line.push_str("\t-"),
                    }
                }
            }
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

fn join_u64(values: &[u64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
