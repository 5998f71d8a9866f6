//! Method families and their free-parameter templates, bound rescaling and
//! per-cycle contraction factors of cyclic methods.

use std::fmt;
use std::str::FromStr;

use crate::conic::{solve_dual, ClarabelSolver};
use crate::error::{Error, Result};
use crate::pep::{
    assemble_dual, bound_scale, CriterionKind, FunctionClassSpec, InitKind, InitSpec, ProblemSpec, ScheduleKind,
    StepSchedule,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// Memoryless gradient descent.
    Mgd,
    /// Full lower-triangular fixed-step method.
    Full,
    /// Memoryless descent on relatively inexact gradients.
    Igd,
    /// Full fixed-step method on relatively inexact gradients.
    Figd,
    /// Cyclic gradient descent.
    Cgd,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Mgd, Family::Full, Family::Igd, Family::Figd, Family::Cgd];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Mgd => "MGD",
            Family::Full => "FULL",
            Family::Igd => "IGD",
            Family::Figd => "FIGD",
            Family::Cgd => "CGD",
        }
    }

    pub fn uses_inexact_oracle(&self) -> bool {
        matches!(self, Family::Igd | Family::Figd)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown family '{s}' (expected MGD, FULL, IGD, FIGD or CGD)")))
    }
}

/// A family at a fixed horizon, exposing its free parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AlgorithmTemplate {
    pub family: Family,
    pub n_steps: usize,
    pub core_length: Option<usize>,
}

impl AlgorithmTemplate {
    pub fn new(family: Family, n_steps: usize, core_length: Option<usize>) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidSchedule("N must be positive".into()));
        }
        match (family, core_length) {
            (Family::Cgd, Some(c)) if c > 0 && n_steps % c == 0 => {}
            (Family::Cgd, Some(c)) => {
                return Err(Error::InvalidSchedule(format!("N = {n_steps} is not a multiple of the core length {c}")))
            }
            (Family::Cgd, None) => return Err(Error::InvalidSchedule("CGD needs a core length".into())),
            (_, Some(_)) => return Err(Error::InvalidSchedule(format!("{family} takes no core length"))),
            _ => {}
        }
        Ok(Self { family, n_steps, core_length })
    }

    pub fn kind(&self) -> ScheduleKind {
        match self.family {
            Family::Mgd | Family::Igd => ScheduleKind::Memoryless,
            Family::Full | Family::Figd => ScheduleKind::Full,
            Family::Cgd => ScheduleKind::Cyclic { core_length: self.core_length.unwrap_or(self.n_steps) },
        }
    }

    pub fn param_count(&self) -> usize {
        self.kind().param_count(self.n_steps)
    }

    pub fn instantiate(&self, params: &[f64]) -> Result<StepSchedule<f64>> {
        StepSchedule::from_params(self.kind(), self.n_steps, params)
    }

    /// Every free parameter set to `step`.
    pub fn constant(&self, step: f64) -> Result<StepSchedule<f64>> {
        StepSchedule::constant(self.kind(), self.n_steps, step)
    }

    /// Free parameters of a schedule built from this template.
    pub fn read_params(&self, schedule: &StepSchedule<f64>) -> Result<Vec<f64>> {
        if schedule.kind() != self.kind() || schedule.n_steps() != self.n_steps {
            return Err(Error::InvalidSchedule(format!(
                "schedule ({}, N = {}) does not come from the {} template with N = {}",
                schedule.kind().name(),
                schedule.n_steps(),
                self.family,
                self.n_steps
            )));
        }
        Ok(schedule.params())
    }

    /// Rejects exact-oracle families on inexact classes and vice versa.
    pub fn check_class(&self, class: &FunctionClassSpec<f64>) -> Result<()> {
        if class.is_inexact() && !self.family.uses_inexact_oracle() {
            return Err(Error::Incompatible(format!(
                "{} assumes exact gradients but epsilon = {}; use IGD or FIGD",
                self.family,
                class.epsilon()
            )));
        }
        Ok(())
    }
}

/// Maps a bound at `L = R = 1` to the bound at `(L, R)` (`mu / L` fixed).
///
/// Coefficients are expressed in units of `1 / L` and need no rescaling.
pub fn rescale_bound(w: f64, criterion: CriterionKind, init: InitKind, l: f64, r: f64) -> Result<f64> {
    if !(l > 0.0 && r > 0.0) {
        return Err(Error::InvalidSpec(format!("L and R must be positive, got L = {l}, R = {r}")));
    }
    Ok(bound_scale(criterion, init, l, r) * w)
}

/// Per-cycle contraction `|x_{N*} - x_*|^2 <= c |x_0 - x_*|^2`, composed as `c^k` over `k` cycles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CyclicRate {
    pub c: f64,
    pub core_length: usize,
    pub contractive: bool,
}

impl CyclicRate {
    /// Certified bound after `k` cycles.
    pub fn after_cycles(&self, k: u32) -> f64 {
        self.c.powi(k as i32)
    }
}

/// Distance-to-distance problem over one cycle.
pub fn cycle_spec(class: &FunctionClassSpec<f64>) -> Result<ProblemSpec<f64>> {
    if class.mu() <= 0.0 {
        return Err(Error::Precondition("cyclic rates need strong convexity (mu > 0)".into()));
    }
    ProblemSpec::new(*class, CriterionKind::FinalDistanceSq, InitSpec::new(InitKind::DistanceToOpt, 1.0)?)
}

/// Contraction factor of one cycle of `core` (its per-iteration steps).
pub fn cyclic_rate(core: &StepSchedule<f64>, class: &FunctionClassSpec<f64>, tol: f64) -> Result<CyclicRate> {
    let spec = cycle_spec(class)?;
    let steps = core.diagonal();
    let schedule = StepSchedule::memoryless(&steps)?;
    let sol = solve_dual(&assemble_dual(&schedule, &spec)?, &ClarabelSolver::default(), tol)?;
    Ok(CyclicRate { c: sol.value, core_length: steps.len(), contractive: sol.value < 1.0 })
}
