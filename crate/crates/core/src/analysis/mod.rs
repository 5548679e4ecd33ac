//! Post-fit diagnostics: effective potential, residual goodness of fit and
//! reports.

mod ks;
mod potential;
mod report;

pub use ks::{ks_critical, ks_distance, ks_residual_test, KsTest};
pub use potential::{
    default_window, effective_potential, kde, local_minima, silverman_bandwidth, PotentialCurve,
    MIN_SEPARATION,
};
pub use report::{model_report, Diagnostics, ModelReport, ReportRow};
