use crate::conic::{solve_with_retry, ClarabelSolver, ConeKind, ConeProgram, SolveStatus};
use crate::error::{Error, Result};
use crate::pep::{
    assemble_primal, slack_affine_in_steps, slack_param_derivatives, DualProgram, ProblemSpec, RowOrigin,
    StepSchedule,
};

use super::report::{DesignConfig, DesignReport, IterationRecord, Method, Termination};
use super::worst::worst_case;

/// Equality rows left without free variables must already hold to this accuracy.
const CONSTANT_ROW_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct AmStep {
    pub schedule: StepSchedule<f64>,
    pub tau: f64,
    /// Optimal value of the subproblem, `tau R^2` (or `tau R`).
    pub value: f64,
}

pub fn check_am_supported(spec: &ProblemSpec<f64>) -> Result<()> {
    if slack_affine_in_steps(spec) {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "alternating minimization needs a slack affine in the steps; mu = {} with criterion {} has quadratic terms",
            spec.class.mu(),
            spec.criterion.name()
        )))
    }
}

/// Minimizes the bound over the schedule and the non-interpolation multipliers with `lambda` frozen.
///
/// `multipliers` is aligned with the rows of the instance at `schedule`;
/// only its interpolation entries are read.
pub fn am_schedule_subproblem(
    schedule: &StepSchedule<f64>,
    multipliers: &[f64],
    spec: &ProblemSpec<f64>,
    tol: f64,
) -> Result<AmStep> {
    check_am_supported(spec)?;
    let inst = assemble_primal(schedule, spec)?;
    if multipliers.len() != inst.row_count() {
        return Err(Error::IndexOutOfRange(format!("{} multipliers for {} rows", multipliers.len(), inst.row_count())));
    }
    let frozen = |o: RowOrigin| matches!(o, RowOrigin::Interpolation { .. });
    let lambda: Vec<f64> =
        inst.rows.iter().zip(multipliers).map(|(r, &y)| if frozen(r.origin) { y } else { 0.0 }).collect();
    let free: Vec<usize> = (0..inst.row_count()).filter(|&k| !frozen(inst.rows[k].origin)).collect();
    let nz = free.len();
    let np = schedule.param_count();

    let mut program = ConeProgram::new(nz + np);
    program.objective =
        free.iter().enumerate().filter(|(_, &k)| inst.rows[k].rhs != 0.0).map(|(v, &k)| (v, inst.rows[k].rhs)).collect();
    let dual = DualProgram { instance: inst.clone() };
    let mut eqs = Vec::new();
    for (e, (coefs, b)) in dual.equalities().into_iter().enumerate() {
        let rest = b - coefs.iter().zip(&lambda).map(|(c, y)| c * y).sum::<f64>();
        let row: Vec<(usize, f64)> =
            free.iter().enumerate().filter(|(_, &k)| coefs[k] != 0.0).map(|(v, &k)| (v, coefs[k])).collect();
        if row.is_empty() {
            if rest.abs() > CONSTANT_ROW_TOL {
                return Err(Error::Infeasible(format!(
                    "stationarity row {e} cannot hold with the interpolation multipliers fixed (residual {rest:e})"
                )));
            }
            continue;
        }
        eqs.push((row, rest));
    }
    if !eqs.is_empty() {
        program.push_block(ConeKind::Zero, eqs);
    }
    if nz > 0 {
        program.push_block(ConeKind::Nonneg, (0..nz).map(|v| (vec![(v, -1.0)], 0.0)).collect());
    }
    let constant = inst.slack(&lambda);
    let ds = slack_param_derivatives(&inst, schedule, spec, &lambda)?;
    let mut terms: Vec<(usize, &nalgebra::DMatrix<f64>)> =
        free.iter().enumerate().map(|(v, &k)| (v, &inst.rows[k].gram)).collect();
    terms.extend(ds.iter().enumerate().map(|(m, d)| (nz + m, d)));
    program.push_psd(&constant, &terms);

    let sol = solve_with_retry(&ClarabelSolver::default(), &program, tol)?;
    match sol.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => {
            return Err(Error::Infeasible("no schedule makes the slack PSD with the interpolation multipliers fixed".into()))
        }
        s => return Err(Error::Solver(format!("schedule subproblem ended with status {s:?}"))),
    }
    let params: Vec<f64> = schedule.params().iter().zip(&sol.x[nz..]).map(|(p, d)| p + d).collect();
    let tau = inst
        .position(RowOrigin::Initial)
        .and_then(|k| free.iter().position(|&f| f == k))
        .map_or(0.0, |v| sol.x[v]);
    Ok(AmStep { schedule: schedule.with_params(&params)?, tau, value: program.objective_value(&sol.x) })
}

/// Alternates a dual solve at fixed steps with the schedule subproblem at fixed `lambda`.
pub fn run_am(config: &DesignConfig, spec: &ProblemSpec<f64>) -> Result<DesignReport> {
    config.validate()?;
    check_am_supported(spec)?;
    let (nspec, scale) = spec.normalized();
    let tol = config.solver_tol;
    let mut wc = worst_case(&config.init, &nspec, tol)?;
    let initial_w = wc.value * scale;
    let mut schedule = config.init.clone();
    let mut records = Vec::new();
    let mut termination = Termination::IterationCap;
    for _ in 0..config.t_max {
        let step = match am_schedule_subproblem(&schedule, &wc.multipliers, &nspec, tol) {
            Ok(s) => s,
            Err(e) => {
                log::debug!("schedule subproblem failed: {e}");
                termination = Termination::SolverFailure;
                break;
            }
        };
        let next = match worst_case(&step.schedule, &nspec, tol) {
            Ok(w) => w,
            Err(e) => {
                log::debug!("dual solve failed: {e}");
                termination = Termination::SolverFailure;
                break;
            }
        };
        let dw = next.value - wc.value;
        if dw > 0.0 {
            termination = Termination::Converged;
            break;
        }
        let dp = schedule.params().iter().zip(step.schedule.params()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        records.push(IterationRecord {
            w: next.value * scale,
            radius: None,
            ratio: None,
            accepted: None,
            coeffs: step.schedule.coeffs().to_vec(),
        });
        schedule = step.schedule;
        wc = next;
        if dw.abs() < config.tol_w && dp < config.tol_alpha {
            termination = Termination::Converged;
            break;
        }
    }
    super::finish(Method::Am, spec, initial_w, records, schedule, termination, tol)
}
