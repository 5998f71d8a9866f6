use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::pep::{CertificateDocument, DualCertificate, ProblemSpec, ScheduleDocument, StepSchedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Alternating minimization.
    Am,
    /// First-order method on the dual gradient.
    Fom,
    /// Sequential linearization with a trust region.
    Slm,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Am => "am",
            Method::Fom => "fom",
            Method::Slm => "slm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "am" => Ok(Method::Am),
            "fom" => Ok(Method::Fom),
            "slm" => Ok(Method::Slm),
            _ => Err(Error::Parse(format!("unknown method '{s}' (expected am, fom or slm)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesignConfig {
    pub method: Method,
    pub t_max: usize,
    pub tol_w: f64,
    pub tol_alpha: f64,
    /// Initial trust radius (SLM).
    pub d0: f64,
    /// `beta_t = beta0 / sqrt(t)` (FOM).
    pub beta0: f64,
    pub solver_tol: f64,
    pub init: StepSchedule<f64>,
}

impl DesignConfig {
    pub fn new(method: Method, init: StepSchedule<f64>) -> Self {
        Self {
            method,
            t_max: 1000,
            tol_w: 1e-7,
            tol_alpha: 1e-4,
            d0: 1.0,
            beta0: 0.5,
            solver_tol: crate::conic::DEFAULT_TOLERANCE,
            init,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_max == 0 {
            return Err(Error::InvalidSpec("T must be at least 1".into()));
        }
        if !(self.tol_w > 0.0 && self.tol_alpha > 0.0) {
            return Err(Error::InvalidSpec("stopping tolerances must be positive".into()));
        }
        if !(self.d0 > 0.0) || !self.d0.is_finite() {
            return Err(Error::InvalidSpec(format!("initial trust radius must be positive, got {}", self.d0)));
        }
        if !(self.beta0 >= 0.0) || !self.beta0.is_finite() {
            return Err(Error::InvalidSpec(format!("beta0 must be nonnegative, got {}", self.beta0)));
        }
        if !(self.solver_tol > 0.0) {
            return Err(Error::InvalidSpec("solver tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    IterationCap,
    SolverFailure,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::IterationCap => "iteration_cap",
            Termination::SolverFailure => "solver_failure",
        }
    }
}

/// One designer iteration. SLM records the candidate step with its radius, ratio and decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub w: f64,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accepted: Option<bool>,
    pub coeffs: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesignReport {
    pub method: Method,
    pub spec: ProblemSpec<f64>,
    pub initial_w: f64,
    pub iterations: Vec<IterationRecord>,
    pub final_schedule: StepSchedule<f64>,
    pub final_w: f64,
    pub certificate: Option<DualCertificate<f64>>,
    pub termination: Termination,
}

impl DesignReport {
    /// Bounds of the accepted iterates, in order.
    pub fn accepted_w(&self) -> Vec<f64> {
        self.iterations.iter().filter(|r| r.accepted != Some(false)).map(|r| r.w).collect()
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "method": self.method.as_str(),
            "iterations": self.iterations,
            "final": ScheduleDocument::new(&self.final_schedule, &self.spec),
            "initial_w": self.initial_w,
            "w": self.final_w,
            "termination": self.termination.as_str(),
        });
        if let Some(c) = &self.certificate {
            v["certificate"] = serde_json::to_value(CertificateDocument::from(c)).expect("finite certificate");
        }
        v
    }

    /// `N=<n> w=<w> iters=<t> term=<reason>`.
    pub fn summary(&self) -> String {
        format!(
            "N={} w={:.6} iters={} term={}",
            self.final_schedule.n_steps(),
            self.final_w,
            self.iterations.len(),
            self.termination.as_str()
        )
    }
}
