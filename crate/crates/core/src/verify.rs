//! Regression run of the family corpus: every sampled instance must be a
//! valid lift whose two zeta routes agree with each other, with the tabulated
//! zeta function, with N(f^k) for k ≤ 40 and with the sign relations.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::expr::Env;
use crate::families::{describe_params, family_instantiate, Corpus, FamilySpec};
use crate::fixedpoint::predicted_nielsen;
use crate::zeta::{report, Report};
use crate::{Error, Result};

pub const CHECK_K: u32 = 40;

#[derive(Clone, Debug)]
pub struct InstanceOutcome {
    pub family: String,
    pub params: String,
    /// The failure, if any.
    pub error: Option<String>,
    /// Case label of a successful run.
    pub case: Option<String>,
}

impl InstanceOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub families: usize,
    pub outcomes: Vec<InstanceOutcome>,
    pub elapsed: Duration,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &InstanceOutcome> {
        self.outcomes.iter().filter(|o| !o.passed())
    }

    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(InstanceOutcome::passed)
    }
}

/// All checks for one instance; returns the full report on success.
pub fn verify_instance(spec: &FamilySpec, params: &Env) -> Result<Report> {
    let cand = family_instantiate(spec, params)?;
    let env = spec.bind(params)?;
    let rep = report(&cand, CHECK_K)?;
    let z = &rep.zeta;
    let expected = spec.expected_zeta(&env, z.index, z.p, z.n)?;
    if expected != z.nielsen_direct {
        return Err(Error::RouteMismatch(format!(
            "{} ({}): table gives {expected}, computed {}",
            spec.tag(),
            z.case,
            z.nielsen_direct
        )));
    }
    let coeffs = z.nielsen_direct.log_derivative_coeffs(CHECK_K as usize);
    for (x, c) in rep.numbers.iter().zip(&coeffs) {
        if !c.is_integer() || c.to_integer() != x.nielsen {
            return Err(Error::RouteMismatch(format!("N(f^{}) = {} but N_f(z) gives {c}", x.k, x.nielsen)));
        }
        let predicted = predicted_nielsen(x, z.p, z.n);
        if predicted != x.nielsen {
            return Err(Error::RouteMismatch(format!(
                "sign relation fails at k = {}: N = {}, predicted {predicted}",
                x.k, x.nielsen
            )));
        }
    }
    Ok(rep)
}

/// Samples `samples` instances per family and checks them in parallel.
/// Output order follows the corpus order and is independent of scheduling.
pub fn verify_corpus(corpus: &Corpus, samples: usize) -> Result<VerifyReport> {
    let start = Instant::now();
    let mut jobs: Vec<(&FamilySpec, Env)> = Vec::new();
    for f in &corpus.families {
        for env in f.sample(samples)? {
            jobs.push((f, env));
        }
    }
    let outcomes = jobs
        .par_iter()
        .map(|(f, env)| {
            let res = verify_instance(f, env);
            InstanceOutcome {
                family: f.tag(),
                params: describe_params(f, env),
                case: res.as_ref().ok().map(|r| r.zeta.case.to_string()),
                error: res.err().map(|e| e.to_string()),
            }
        })
        .collect();
    Ok(VerifyReport { families: corpus.families.len(), outcomes, elapsed: start.elapsed() })
}
