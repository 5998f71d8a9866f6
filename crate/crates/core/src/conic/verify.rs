use nalgebra::SymmetricEigen;

use crate::pep::{assemble_primal, DualCertificate, ProblemSpec, StepSchedule};
use crate::scalar::{abs, fmax, Scalar};

/// Residuals of an independent certificate check.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateReport<T> {
    pub min_eigenvalue: T,
    /// Max-norm of the dual equality residual.
    pub stationarity_residual: T,
    /// Multipliers below `-tol`, by description.
    pub sign_violations: Vec<String>,
    /// `|sum_r y_r rhs_r - bound|`.
    pub bound_residual: T,
    /// Largest entry of the difference between the stored and recomputed slack.
    pub slack_residual: T,
    /// Set when the certificate does not fit the schedule and spec; all residuals are then meaningless.
    pub dimension_mismatch: Option<String>,
    pub passed: bool,
}

/// Rebuilds the slack from the schedule and spec and checks the certificate.
///
/// Uses dense assembly and a symmetric eigensolver only. Passes iff the
/// slack is PSD, the equalities hold, all multipliers are nonnegative and
/// the bound matches, each within `tol` (bound and slack relative to
/// `1 + |bound|` and `1 + |S|`).
pub fn verify_certificate<T: Scalar>(
    cert: &DualCertificate<T>,
    schedule: &StepSchedule<T>,
    spec: &ProblemSpec<T>,
    tol: T,
) -> CertificateReport<T> {
    let failed = |msg: String| CertificateReport {
        min_eigenvalue: T::nan(),
        stationarity_residual: T::nan(),
        sign_violations: Vec::new(),
        bound_residual: T::nan(),
        slack_residual: T::nan(),
        dimension_mismatch: Some(msg),
        passed: false,
    };
    let inst = match assemble_primal(schedule, spec) {
        Ok(i) => i,
        Err(e) => return failed(e.to_string()),
    };
    let y = match cert.multipliers_for(&inst) {
        Ok(y) => y,
        Err(e) => return failed(e.to_string()),
    };
    if cert.slack.nrows() != inst.gram_dim() || cert.slack.ncols() != inst.gram_dim() {
        return failed(format!("slack is {} x {}, expected {m} x {m}", cert.slack.nrows(), cert.slack.ncols(), m = inst.gram_dim()));
    }

    let slack = inst.slack(&y);
    let min_eigenvalue = SymmetricEigen::new(slack.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(T::infinity(), |a, b| if b < a { b } else { a });
    let stationarity_residual = inst.stationarity_residual(&y).iter().fold(T::zero(), |a, &b| fmax(a, abs(b)));
    let sign_violations = inst
        .rows
        .iter()
        .zip(&y)
        .filter(|(_, &v)| v < -tol)
        .map(|(r, v)| format!("{} multiplier {v:e}", r.origin))
        .collect::<Vec<_>>();
    let bound = inst.dual_objective(&y);
    let bound_residual = abs(bound - cert.bound);
    let slack_residual = (&slack - &cert.slack).iter().fold(T::zero(), |a, &b| fmax(a, abs(b)));
    let scale = T::one() + slack.iter().fold(T::zero(), |a, &b| fmax(a, abs(b)));
    let passed = min_eigenvalue >= -tol
        && stationarity_residual <= tol
        && sign_violations.is_empty()
        && bound_residual <= tol * (T::one() + abs(cert.bound))
        && slack_residual <= tol * scale;
    CertificateReport {
        min_eigenvalue,
        stationarity_residual,
        sign_violations,
        bound_residual,
        slack_residual,
        dimension_mismatch: None,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{solve_dual, ClarabelSolver};
    use crate::pep::{assemble_dual, DualCertificate};

    fn solved(steps: &[f64]) -> (DualCertificate<f64>, StepSchedule<f64>, ProblemSpec<f64>) {
        let s = StepSchedule::memoryless(steps).unwrap();
        let spec = ProblemSpec::smooth_convex_gap(1.0, 1.0);
        let dual = assemble_dual(&s, &spec).unwrap();
        let sol = solve_dual(&dual, &ClarabelSolver::default(), 1e-8).unwrap();
        (DualCertificate::from_multipliers(&dual.instance, &sol.multipliers), s, spec)
    }

    #[test]
    fn solver_certificate_passes() {
        let (c, s, spec) = solved(&[1.414, 1.877]);
        let r = verify_certificate(&c, &s, &spec, 1e-6);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn negated_multiplier_flagged() {
        let (mut c, s, spec) = solved(&[1.0, 1.0]);
        let k = c.lambda.iter().position(|p| p.value > 1e-3).unwrap();
        c.lambda[k].value = -c.lambda[k].value;
        let r = verify_certificate(&c, &s, &spec, 1e-6);
        assert_eq!(r.sign_violations.len(), 1);
        assert!(!r.passed);
    }

    #[test]
    fn zero_certificate_fails_stationarity() {
        let (mut c, s, spec) = solved(&[1.0]);
        c.tau = 0.0;
        c.lambda.iter_mut().for_each(|p| p.value = 0.0);
        c.slack.fill(0.0);
        c.bound = 0.0;
        let r = verify_certificate(&c, &s, &spec, 1e-6);
        assert!((r.stationarity_residual - 1.0).abs() < 1e-15);
        assert!(!r.passed);
    }

    #[test]
    fn wrong_schedule_or_dimension() {
        let (c, _, spec) = solved(&[1.0, 1.0]);
        let other = StepSchedule::memoryless(&[1.9, 0.2]).unwrap();
        assert!(!verify_certificate(&c, &other, &spec, 1e-6).passed);
        let longer = StepSchedule::memoryless(&[1.0, 1.0, 1.0]).unwrap();
        let r = verify_certificate(&c, &longer, &spec, 1e-6);
        assert!(r.dimension_mismatch.is_some() && !r.passed);
    }

    #[test]
    fn single_precision_check() {
        let (c, s, spec) = solved(&[1.5]);
        let c32 = DualCertificate {
            tau: c.tau as f32,
            lambda: c.lambda.iter().map(|p| crate::pep::PairMultiplier { i: p.i, j: p.j, value: p.value as f32 }).collect(),
            eta: vec![],
            sigma: vec![],
            slack: c.slack.map(|v| v as f32),
            bound: c.bound as f32,
        };
        let spec32 = ProblemSpec::smooth_convex_gap(1.0f32, 1.0);
        let r = verify_certificate(&c32, &s.cast::<f32>(), &spec32, 1e-4);
        assert!(r.passed, "{r:?}");
        let _ = spec;
    }
}
