//! The experiment registry.

use stoklab_core::{Error, McEstimate, Result};

use crate::params::ParamSpec;
use crate::runner::Ctx;

mod brownian;
mod diffusion;
mod discrete;
mod ito;
mod martingale;
mod sde;

pub struct Experiment {
    pub name: &'static str,
    pub description: &'static str,
    pub params: &'static [ParamSpec],
    pub run: fn(&mut Ctx) -> Result<()>,
}

pub static REGISTRY: &[Experiment] = &[
    discrete::POLYA_LIMIT,
    discrete::GW_EXTINCTION,
    discrete::EHRENFEST,
    discrete::RANDOM_SUM,
    martingale::DOUBLING_STRATEGY,
    martingale::DOOB_AUDIT,
    brownian::BM_MAXIMUM,
    brownian::FIRST_PASSAGE,
    brownian::CAUCHY_HIT,
    brownian::BM_CONSTRUCTIONS,
    ito::ITO_BDB,
    ito::ITO_ISOMETRY,
    ito::STRATONOVICH,
    sde::EULER_ORDER,
    sde::PICARD,
    sde::SDE_EXACT,
    diffusion::EXIT_INTERVAL,
    diffusion::FEYNMAN_KAC,
    diffusion::BALL_EXIT,
    diffusion::TRANSIENCE,
    diffusion::FOKKER_PLANCK,
    diffusion::OU_STATIONARY,
    diffusion::GBM_HITTING,
    diffusion::ARCSINE,
    diffusion::OU_EXIT,
    diffusion::DRIFTED_BM,
];

pub fn find(name: &str) -> Option<&'static Experiment> {
    REGISTRY.iter().find(|e| e.name == name)
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

/// Frequency estimate whose standard error comes from the oracle
/// probability p rather than the sample, so that rare atoms with no hits
/// still get a sensible tolerance.
pub(crate) fn frequency(hits: usize, n: usize, p: f64) -> McEstimate {
    let n_f = n as f64;
    McEstimate::new(
        hits as f64 / n_f,
        (p * (1.0 - p) / n_f).sqrt(),
        n as u64,
        4.0,
    )
}

/// Mean of 0/1 outcomes.
pub(crate) fn proportion<I: IntoIterator<Item = bool>>(outcomes: I) -> Result<McEstimate> {
    let xs: Vec<f64> = outcomes
        .into_iter()
        .map(|b| if b { 1.0 } else { 0.0 })
        .collect();
    McEstimate::from_samples(&xs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Params;

    const REQUIRED: [&str; 21] = [
        "polya-limit",
        "gw-extinction",
        "ehrenfest",
        "doubling-strategy",
        "doob-audit",
        "bm-maximum",
        "first-passage",
        "cauchy-hit",
        "ito-bdb",
        "ito-isometry",
        "stratonovich",
        "euler-order",
        "picard",
        "exit-interval",
        "feynman-kac",
        "ball-exit",
        "transience",
        "fokker-planck",
        "ou-stationary",
        "gbm-hitting",
        "arcsine",
    ];

    #[test]
    fn registry_names_are_unique_and_complete() {
        let mut names: Vec<&str> = REGISTRY.iter().map(|e| e.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), REGISTRY.len());
        for r in REQUIRED {
            assert!(find(r).is_some(), "{r} missing");
        }
    }

    #[test]
    fn defaults_parse_and_keys_are_unique() {
        for e in REGISTRY {
            assert!(!e.description.is_empty());
            Params::resolve(e.params, &[]).unwrap();
            let mut keys: Vec<&str> = e.params.iter().map(|p| p.key).collect();
            keys.sort_unstable();
            keys.dedup();
            assert_eq!(keys.len(), e.params.len(), "{}", e.name);
        }
    }
}
