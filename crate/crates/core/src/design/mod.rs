//! Step-schedule designers: alternating minimization, a first-order method
//! on the dual gradient and sequential linearization with a trust region.
//!
//! All designers iterate at `L = R = 1` and report bounds at the scale of
//! the given spec.

mod am;
mod fom;
mod point;
mod report;
mod slm;
mod worst;

pub use am::{am_schedule_subproblem, check_am_supported, run_am, AmStep};
pub use fom::run_fom;
pub use point::{Component, DesignPoint};
pub use report::{DesignConfig, DesignReport, IterationRecord, Method, Termination};
pub use slm::{
    run_slm, slm_subproblem, trust_region_update, SlmStep, TrustDecision, DEGENERATE_PREDICTION, RADIUS_FLOOR,
};
pub use worst::{dual_gradient, gradient_from, worst_case, WorstCase};

use crate::error::Result;
use crate::pep::{ProblemSpec, StepSchedule};

/// Runs the configured designer.
pub fn run(config: &DesignConfig, spec: &ProblemSpec<f64>) -> Result<DesignReport> {
    match config.method {
        Method::Am => run_am(config, spec),
        Method::Fom => run_fom(config, spec),
        Method::Slm => run_slm(config, spec),
    }
}

fn finish(
    method: Method,
    spec: &ProblemSpec<f64>,
    initial_w: f64,
    iterations: Vec<IterationRecord>,
    schedule: StepSchedule<f64>,
    termination: Termination,
    tol: f64,
) -> Result<DesignReport> {
    let wc = worst_case(&schedule, spec, tol)?;
    Ok(DesignReport {
        method,
        spec: *spec,
        initial_w,
        iterations,
        final_schedule: schedule,
        final_w: wc.value,
        certificate: Some(wc.certificate),
        termination,
    })
}
