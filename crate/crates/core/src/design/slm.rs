use nalgebra::{DMatrix, SymmetricEigen};

use crate::conic::{solve_with_retry, ClarabelSolver, ConeKind, ConeProgram, SolveStatus};
use crate::error::{Error, Result};
use crate::pep::{slack_param_derivatives, DualProgram, ProblemSpec};

use super::point::DesignPoint;
use super::report::{DesignConfig, DesignReport, IterationRecord, Method, Termination};
use super::worst::worst_case;

/// Predicted changes above this (and at most zero) count as convergence.
pub const DEGENERATE_PREDICTION: f64 = 1e-14;
/// Trust radii below this count as convergence.
pub const RADIUS_FLOOR: f64 = 1e-12;
const SUBPROBLEM_RETRIES: usize = 3;

/// Solution of the linearized subproblem.
#[derive(Clone, Debug, PartialEq)]
pub struct SlmStep {
    pub dy: Vec<f64>,
    pub dp: Vec<f64>,
    /// Linearized change of the bound, `sum_r rhs_r dy_r <= 0`.
    pub predicted: f64,
}

impl SlmStep {
    fn zero(point: &DesignPoint) -> Self {
        Self { dy: vec![0.0; point.n_multipliers()], dp: vec![0.0; point.n_params()], predicted: 0.0 }
    }
}

/// Linearizes the dual PEP at `point` and minimizes the predicted bound within `|dx|^2 / 2 <= radius`.
///
/// The slack is linearized as `S + sum_r gram_r dy_r + sum_m dS/dp_m dp_m`;
/// equalities and signs are imposed exactly at `y + dy`. When the solver's
/// slack is slightly indefinite it is shifted by its most negative
/// eigenvalue so that `dx = 0` stays feasible.
pub fn slm_subproblem(point: &DesignPoint, radius: f64, spec: &ProblemSpec<f64>, tol: f64) -> Result<SlmStep> {
    if radius <= 0.0 {
        return Ok(SlmStep::zero(point));
    }
    let inst = &point.instance;
    let y = &point.multipliers;
    let ny = point.n_multipliers();
    let np = point.n_params();
    let mut program = ConeProgram::new(ny + np);
    program.objective = inst.rows.iter().enumerate().filter(|(_, r)| r.rhs != 0.0).map(|(k, r)| (k, r.rhs)).collect();

    let dual = DualProgram { instance: inst.clone() };
    let eqs = dual
        .equalities()
        .into_iter()
        .map(|(coefs, b)| {
            let at_y: f64 = coefs.iter().zip(y).map(|(c, v)| c * v).sum();
            (coefs.into_iter().enumerate().filter(|&(_, c)| c != 0.0).collect(), b - at_y)
        })
        .collect();
    program.push_block(ConeKind::Zero, eqs);
    program.push_block(ConeKind::Nonneg, (0..ny).map(|k| (vec![(k, -1.0)], y[k])).collect());

    let mut slack = inst.slack(y);
    let lmin = SymmetricEigen::new(slack.clone()).eigenvalues.min();
    if lmin < 0.0 {
        slack += DMatrix::identity(slack.nrows(), slack.ncols()) * (-lmin);
    }
    let ds = slack_param_derivatives(inst, &point.schedule, spec, y)?;
    let mut terms: Vec<(usize, &DMatrix<f64>)> = inst.rows.iter().enumerate().map(|(k, r)| (k, &r.gram)).collect();
    terms.extend(ds.iter().enumerate().map(|(m, d)| (ny + m, d)));
    program.push_psd(&slack, &terms);

    let mut tr = vec![(Vec::new(), (2.0 * radius).sqrt())];
    tr.extend((0..ny + np).map(|k| (vec![(k, -1.0)], 0.0)));
    program.push_block(ConeKind::SecondOrder, tr);

    let sol = solve_with_retry(&ClarabelSolver::default(), &program, tol)?;
    if sol.status != SolveStatus::Optimal {
        return Err(Error::Solver(format!("linearized subproblem ended with status {:?}", sol.status)));
    }
    let predicted = program.objective_value(&sol.x);
    Ok(SlmStep { dy: sol.x[..ny].to_vec(), dp: sol.x[ny..].to_vec(), predicted: predicted.min(0.0) })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrustDecision {
    pub radius: f64,
    pub accepted: bool,
}

/// `P >= 0.9`: accept and double; `P <= 0.1`: reject and halve; otherwise accept and keep.
pub fn trust_region_update(ratio: f64, radius: f64) -> TrustDecision {
    if ratio >= 0.9 {
        TrustDecision { radius: 2.0 * radius, accepted: true }
    } else if ratio <= 0.1 || ratio.is_nan() {
        TrustDecision { radius: 0.5 * radius, accepted: false }
    } else {
        TrustDecision { radius, accepted: true }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Sequential linearization with a trust region, run at `L = R = 1` and reported at the spec's scale.
pub fn run_slm(config: &DesignConfig, spec: &ProblemSpec<f64>) -> Result<DesignReport> {
    config.validate()?;
    let (nspec, scale) = spec.normalized();
    let tol = config.solver_tol;
    let start = worst_case(&config.init, &nspec, tol)?;
    let initial_w = start.value * scale;
    let mut point = DesignPoint::from_worst_case(config.init.clone(), start);
    let mut radius = config.d0;
    let mut records = Vec::new();
    let mut termination = Termination::IterationCap;

    let mut t = 0;
    while t < config.t_max {
        t += 1;
        let mut step = None;
        for _ in 0..=SUBPROBLEM_RETRIES {
            match slm_subproblem(&point, radius, &nspec, tol) {
                Ok(s) => {
                    step = Some(s);
                    break;
                }
                Err(e) => {
                    log::debug!("subproblem failed at radius {radius:e}: {e}");
                    radius *= 0.5;
                }
            }
        }
        let Some(step) = step else {
            termination = Termination::SolverFailure;
            break;
        };
        if step.predicted > -DEGENERATE_PREDICTION {
            termination = Termination::Converged;
            break;
        }
        let params: Vec<f64> = point.schedule.params().iter().zip(&step.dp).map(|(p, d)| p + d).collect();
        let candidate = point.schedule.with_params(&params)?;
        let (ratio, wc) = match worst_case(&candidate, &nspec, tol) {
            Ok(wc) => ((wc.value - point.value) / step.predicted, Some(wc)),
            Err(e) => {
                log::debug!("candidate solve failed: {e}");
                (f64::NAN, None)
            }
        };
        let decision = trust_region_update(ratio, radius);
        if let Some(wc) = wc {
            records.push(IterationRecord {
                w: wc.value * scale,
                radius: Some(radius),
                ratio: Some(ratio),
                accepted: Some(decision.accepted),
                coeffs: candidate.coeffs().to_vec(),
            });
            if decision.accepted {
                let dw = wc.value - point.value;
                point = DesignPoint::from_worst_case(candidate, wc);
                if dw.abs() < config.tol_w && norm(&step.dp) < config.tol_alpha {
                    termination = Termination::Converged;
                    break;
                }
            }
        }
        radius = decision.radius;
        if radius < RADIUS_FLOOR {
            termination = Termination::Converged;
            break;
        }
    }
    super::finish(Method::Slm, spec, initial_w, records, point.schedule, termination, tol)
}
