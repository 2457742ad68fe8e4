use std::time::Instant;

use stoklab_core::StreamPlan;

use crate::experiments::{self, Experiment};
use crate::params::Params;
use crate::report::{Report, Row};
use crate::{Pool, RunError};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    pub overrides: Vec<(String, String)>,
    /// Worker threads; `None` or 1 runs sequentially.
    pub threads: Option<usize>,
    /// Record wall time per row.
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            seed: DEFAULT_SEED,
            overrides: Vec::new(),
            threads: None,
            timing: false,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn set(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.overrides.push((key.into(), value.into()));
        self
    }

    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }
}

/// What an experiment sees while it runs.
pub struct Ctx<'a> {
    pub params: Params,
    pub exec: &'a Pool,
    seed: u64,
    rows: Vec<Row>,
    timing: bool,
    clock: Instant,
}

impl Ctx<'_> {
    /// Stream plan for the `k`-th ensemble of the experiment. Ensembles get
    /// disjoint blocks of 2^40 stream ids.
    pub fn plan(&self, k: u64) -> StreamPlan {
        StreamPlan::new(self.seed).offset(k << 40)
    }

    pub fn get(&self, key: &str) -> f64 {
        self.params.get(key)
    }

    pub fn count(&self, key: &str) -> usize {
        self.params.count(key)
    }

    /// Appends a row; with timing on, it carries the time since the
    /// previous row.
    pub fn push(&mut self, mut row: Row) {
        if self.timing {
            row.seconds = Some(self.clock.elapsed().as_secs_f64());
            self.clock = Instant::now();
        }
        self.rows.push(row);
    }
}

/// Checks the name and overrides, then runs the experiment.
///
/// A numeric error inside the experiment does not make this fail: the
/// report keeps the rows computed so far plus a failing row describing the
/// error.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report, RunError> {
    let exp: &Experiment = experiments::find(&config.name).ok_or_else(|| {
        RunError::Usage(format!(
            "unknown experiment `{}` (try `stoklab list`)",
            config.name
        ))
    })?;
    let params = Params::resolve(exp.params, &config.overrides)?;
    let pool = Pool::new(config.threads)
        .map_err(|e| RunError::Usage(format!("cannot start thread pool: {e}")))?;
    let mut ctx = Ctx {
        params,
        exec: &pool,
        seed: config.seed,
        rows: Vec::new(),
        timing: config.timing,
        clock: Instant::now(),
    };
    let outcome = (exp.run)(&mut ctx);
    let mut rows = ctx.rows;
    let failure = match outcome {
        Ok(()) => None,
        Err(e) => {
            let msg = e.to_string();
            rows.push(Row::new(
                format!("{}.failure", exp.name),
                f64::NAN,
                None,
                crate::Relation::Eq,
                f64::NAN,
                0.0,
                format!("error: {msg}"),
            ));
            Some(msg)
        }
    };
    Ok(Report {
        experiment: exp.name.to_string(),
        seed: config.seed,
        rows,
        failure,
    })
}
