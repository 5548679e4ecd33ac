//! Invariant suites, one per module. Randomized suites use a deterministic
//! proptest runner with at least 100 cases.

use proptest::strategy::Strategy;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestError, TestRng, TestRunner};

pub mod analysis;
pub mod estimate;
pub mod likelihood;
pub mod models;
pub mod simulate;
pub mod stable;

pub const CASES: u32 = 128;

#[derive(Debug, Clone)]
pub struct Check {
    pub module: &'static str,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

pub fn check(module: &'static str, name: &'static str, r: Result<String, String>) -> Check {
    let (pass, detail) = match r {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Check {
        module,
        name,
        pass,
        detail,
    }
}

/// Run `test` on `cases` deterministic draws of `strategy`.
pub fn prop<S, F>(cases: u32, strategy: S, test: F) -> Result<String, String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
    F: Fn(S::Value) -> Result<(), TestCaseError>,
{
    let config = Config {
        cases,
        failure_persistence: None,
        max_shrink_iters: 64,
        ..Config::default()
    };
    let mut runner =
        TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    match runner.run(&strategy, test) {
        Ok(()) => Ok(format!("{cases} cases")),
        Err(TestError::Fail(why, v)) => Err(format!("counterexample {v:?}: {why}")),
        Err(TestError::Abort(why)) => Err(format!("aborted: {why}")),
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
