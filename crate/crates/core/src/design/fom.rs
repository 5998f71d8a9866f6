use crate::error::Result;
use crate::pep::ProblemSpec;

use super::report::{DesignConfig, DesignReport, IterationRecord, Method, Termination};
use super::worst::{gradient_from, worst_case};

/// Steps `p <- p - beta_t grad w(p)` with `beta_t = beta0 / sqrt(t)`, returning the best schedule seen.
pub fn run_fom(config: &DesignConfig, spec: &ProblemSpec<f64>) -> Result<DesignReport> {
    config.validate()?;
    let (nspec, scale) = spec.normalized();
    let tol = config.solver_tol;
    let mut schedule = config.init.clone();
    let mut wc = worst_case(&schedule, &nspec, tol)?;
    let initial_w = wc.value * scale;
    let mut best = (wc.value, schedule.clone());
    let mut records = Vec::new();
    let mut termination = Termination::IterationCap;
    for t in 1..=config.t_max {
        let grad = gradient_from(&wc, &schedule, &nspec)?;
        let beta = config.beta0 / (t as f64).sqrt();
        let params: Vec<f64> = schedule.params().iter().zip(&grad).map(|(p, g)| p - beta * g).collect();
        let dp = grad.iter().map(|g| (beta * g).powi(2)).sum::<f64>().sqrt();
        if dp == 0.0 {
            records.push(IterationRecord {
                w: wc.value * scale,
                radius: None,
                ratio: None,
                accepted: None,
                coeffs: schedule.coeffs().to_vec(),
            });
            termination = Termination::Converged;
            break;
        }
        let next_schedule = schedule.with_params(&params)?;
        let next = match worst_case(&next_schedule, &nspec, tol) {
            Ok(w) => w,
            Err(e) => {
                log::debug!("dual solve failed: {e}");
                termination = Termination::SolverFailure;
                break;
            }
        };
        records.push(IterationRecord {
            w: next.value * scale,
            radius: None,
            ratio: None,
            accepted: None,
            coeffs: next_schedule.coeffs().to_vec(),
        });
        let dw = next.value - wc.value;
        if next.value < best.0 {
            best = (next.value, next_schedule.clone());
        }
        schedule = next_schedule;
        wc = next;
        if dw.abs() < config.tol_w && dp < config.tol_alpha {
            termination = Termination::Converged;
            break;
        }
    }
    super::finish(Method::Fom, spec, initial_w, records, best.1, termination, tol)
}
