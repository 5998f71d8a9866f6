use crate::conic::{solve_dual, ClarabelSolver};
use crate::error::Result;
use crate::pep::{
    assemble_dual, slack_param_derivatives, DualCertificate, PepInstance, PrimalWitness, ProblemSpec, StepSchedule,
};

/// Certified worst case of a schedule together with the data designers reuse.
#[derive(Clone, Debug, PartialEq)]
pub struct WorstCase {
    pub value: f64,
    pub certificate: DualCertificate<f64>,
    pub witness: PrimalWitness<f64>,
    pub multipliers: Vec<f64>,
    pub instance: PepInstance<f64>,
}

pub fn worst_case(schedule: &StepSchedule<f64>, spec: &ProblemSpec<f64>, tol: f64) -> Result<WorstCase> {
    let dual = assemble_dual(schedule, spec)?;
    let sol = solve_dual(&dual, &ClarabelSolver::default(), tol)?;
    let certificate = DualCertificate::from_multipliers(&dual.instance, &sol.multipliers);
    Ok(WorstCase {
        value: sol.value,
        certificate,
        witness: sol.witness,
        multipliers: sol.multipliers,
        instance: dual.instance,
    })
}

/// `-Tr(G dS/dp_m)` for every free parameter, from an already solved worst case.
pub fn gradient_from(wc: &WorstCase, schedule: &StepSchedule<f64>, spec: &ProblemSpec<f64>) -> Result<Vec<f64>> {
    let ds = slack_param_derivatives(&wc.instance, schedule, spec, &wc.multipliers)?;
    Ok(ds.iter().map(|d| -wc.witness.gram.component_mul(d).sum()).collect())
}

/// Derivative of the worst-case bound with respect to the free parameters of the schedule.
///
/// Only a gradient where the bound is differentiable; at kinks it is the
/// value computed from whichever optimal `(G, y)` the solver returns.
pub fn dual_gradient(schedule: &StepSchedule<f64>, spec: &ProblemSpec<f64>, tol: f64) -> Result<Vec<f64>> {
    let wc = worst_case(schedule, spec, tol)?;
    gradient_from(&wc, schedule, spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_step_values() {
        let spec = ProblemSpec::smooth_convex_gap(1.0, 1.0);
        for (h, w) in [(1.0, 1.0 / 6.0), (1.5, 0.125)] {
            let wc = worst_case(&StepSchedule::memoryless(&[h]).unwrap(), &spec, 1e-8).unwrap();
            assert!((wc.value - w).abs() < 1e-6, "h = {h}: {}", wc.value);
        }
    }

    #[test]
    fn gradient_vanishes_without_multipliers() {
        let s = StepSchedule::memoryless(&[1.0, 1.0]).unwrap();
        let spec = ProblemSpec::smooth_convex_gap(1.0, 1.0);
        let mut wc = worst_case(&s, &spec, 1e-8).unwrap();
        wc.multipliers.iter_mut().for_each(|y| *y = 0.0);
        assert!(gradient_from(&wc, &s, &spec).unwrap().iter().all(|&g| g == 0.0));
    }
}
