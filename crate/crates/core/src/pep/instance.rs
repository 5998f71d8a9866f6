use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::constraints::{
    fvalue_vector, inexactness_constraint, interpolation_constraint, interpolation_derivative, CriterionEncoding,
};
use super::layout::{u_vector, GramLayout, Point, Symbol};
use super::schedule::StepSchedule;
use super::spec::{InitKind, ProblemSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Where a constraint row comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum RowOrigin {
    Interpolation { i: Point, j: Point },
    Inexactness { i: usize },
    Initial,
    Epigraph { k: usize },
}

impl std::fmt::Display for RowOrigin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RowOrigin::Interpolation { i, j } => write!(f, "interpolation ({i},{j})"),
            RowOrigin::Inexactness { i } => write!(f, "inexactness {i}"),
            RowOrigin::Initial => f.write_str("initial condition"),
            RowOrigin::Epigraph { k } => write!(f, "epigraph {k}"),
        }
    }
}

/// `fcoef . F + Tr(gram G) + t_coef t <= rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintRow<T: Scalar> {
    pub origin: RowOrigin,
    pub fcoef: DVector<T>,
    pub gram: DMatrix<T>,
    pub t_coef: T,
    pub rhs: T,
}

/// Primal PEP: maximize `b . F + Tr(C G)` (or `t`) over `G >= 0` subject to the rows.
#[derive(Clone, Debug, PartialEq)]
pub struct PepInstance<T: Scalar> {
    pub layout: GramLayout,
    pub objective: CriterionEncoding<T>,
    pub rows: Vec<ConstraintRow<T>>,
}

impl<T: Scalar> PepInstance<T> {
    pub fn gram_dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn position(&self, origin: RowOrigin) -> Option<usize> {
        self.rows.iter().position(|r| r.origin == origin)
    }

    /// Lagrangian dual slack `S(y) = sum_r y_r gram_r - C`.
    pub fn slack(&self, multipliers: &[T]) -> DMatrix<T> {
        let mut s = -self.objective.c.clone();
        for (row, &y) in self.rows.iter().zip(multipliers) {
            if y != T::zero() {
                s += &row.gram * y;
            }
        }
        s
    }

    /// Residual of the dual equalities: `b - sum_r y_r fcoef_r` over `F`,
    /// followed by `1 - sum_r y_r t_coef_r` for min-type criteria.
    pub fn stationarity_residual(&self, multipliers: &[T]) -> DVector<T> {
        let mut res = self.objective.b.clone();
        for (row, &y) in self.rows.iter().zip(multipliers) {
            res -= &row.fcoef * y;
        }
        if self.objective.epigraph {
            let mut t = T::one();
            for (row, &y) in self.rows.iter().zip(multipliers) {
                t -= row.t_coef * y;
            }
            res = res.push(t);
        }
        res
    }

    /// Dual objective `sum_r y_r rhs_r`.
    pub fn dual_objective(&self, multipliers: &[T]) -> T {
        self.rows.iter().zip(multipliers).fold(T::zero(), |acc, (r, &y)| acc + r.rhs * y)
    }

    /// Primal objective at `(F, G, t)`.
    pub fn primal_objective(&self, fvals: &DVector<T>, gram: &DMatrix<T>, t: Option<T>) -> T {
        if self.objective.epigraph {
            t.unwrap_or_else(T::zero)
        } else {
            self.objective.b.dot(fvals) + (&self.objective.c.component_mul(gram)).sum()
        }
    }

    /// Largest violation `fcoef . F + Tr(gram G) + t_coef t - rhs` over all rows.
    pub fn max_violation(&self, fvals: &DVector<T>, gram: &DMatrix<T>, t: Option<T>) -> T {
        let t = t.unwrap_or_else(T::zero);
        self.rows
            .iter()
            .map(|r| r.fcoef.dot(fvals) + r.gram.component_mul(gram).sum() + r.t_coef * t - r.rhs)
            .fold(T::neg_infinity(), |a, b| if b > a { b } else { a })
    }
}

/// Assembles the primal SDP.
///
/// Rows are ordered: interpolation pairs over `I = {0..N, *}` (ordered, `i != j`),
/// inexactness rows `d_0..d_{N-1}`, the initial condition, then epigraph rows `k = 1..N`.
pub fn assemble_primal<T: Scalar>(schedule: &StepSchedule<T>, spec: &ProblemSpec<T>) -> Result<PepInstance<T>> {
    spec.check_compatible()?;
    let n = schedule.n_steps();
    let layout = if spec.class.is_inexact() { GramLayout::inexact(n) } else { GramLayout::exact(n) };
    let m = layout.dim();
    let nf = layout.n_fvals();
    let objective = CriterionEncoding::encode(spec.criterion, schedule, &layout, &spec.class)?;
    let zero_f = DVector::zeros(nf);
    let zero_g = DMatrix::zeros(m, m);

    let mut rows = Vec::with_capacity((n + 2) * (n + 1) + 2 * n + 1);
    let points: Vec<Point> = layout.points().collect();
    for &i in &points {
        for &j in &points {
            if i == j {
                continue;
            }
            let r = interpolation_constraint(&spec.class, schedule, &layout, i, j)?;
            rows.push(ConstraintRow {
                origin: RowOrigin::Interpolation { i, j },
                fcoef: -r.fcoef,
                gram: r.gram,
                t_coef: T::zero(),
                rhs: T::zero(),
            });
        }
    }
    if layout.is_inexact() {
        for i in 0..n {
            rows.push(ConstraintRow {
                origin: RowOrigin::Inexactness { i },
                fcoef: zero_f.clone(),
                gram: inexactness_constraint(&layout, i, spec.class.epsilon())?,
                t_coef: T::zero(),
                rhs: T::zero(),
            });
        }
    }
    let (fcoef, gram) = match spec.init.kind {
        InitKind::DistanceToOpt => {
            let x0: DVector<T> = u_vector(&layout, Some(Symbol::X0))?;
            (zero_f.clone(), &x0 * x0.transpose())
        }
        InitKind::ObjectiveGap => (fvalue_vector(&layout, Point::Iter(0)), zero_g.clone()),
    };
    rows.push(ConstraintRow { origin: RowOrigin::Initial, fcoef, gram, t_coef: T::zero(), rhs: spec.init.bound() });
    if objective.epigraph {
        for k in 1..=n {
            let g: DVector<T> = u_vector(&layout, Some(Symbol::Grad(k)))?;
            rows.push(ConstraintRow {
                origin: RowOrigin::Epigraph { k },
                fcoef: zero_f.clone(),
                gram: -(&g * g.transpose()),
                t_coef: T::one(),
                rhs: T::zero(),
            });
        }
    }
    Ok(PepInstance { layout, objective, rows })
}

/// Lagrangian dual of a primal instance, one multiplier per row:
///
/// minimize `sum_r y_r rhs_r` subject to `y >= 0`,
/// `sum_r y_r fcoef_r = b`, (`sum_r y_r t_coef_r = 1` for min-type criteria)
/// and `S(y) = sum_r y_r gram_r - C >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualProgram<T: Scalar> {
    pub instance: PepInstance<T>,
}

impl<T: Scalar> DualProgram<T> {
    pub fn multiplier_count(&self) -> usize {
        self.instance.row_count()
    }

    /// Objective coefficients (`R^2` on `tau` for distance init, `R` for gap init).
    pub fn objective(&self) -> Vec<T> {
        self.instance.rows.iter().map(|r| r.rhs).collect()
    }

    /// Equality rows `(coefficients over y, right-hand side)`.
    pub fn equalities(&self) -> Vec<(Vec<T>, T)> {
        let inst = &self.instance;
        let mut eqs: Vec<(Vec<T>, T)> = (0..inst.layout.n_fvals())
            .map(|p| (inst.rows.iter().map(|r| r.fcoef[p]).collect(), inst.objective.b[p]))
            .collect();
        if inst.objective.epigraph {
            eqs.push((inst.rows.iter().map(|r| r.t_coef).collect(), T::one()));
        }
        eqs
    }
}

/// Builds the dual PEP for a schedule.
pub fn assemble_dual<T: Scalar>(schedule: &StepSchedule<T>, spec: &ProblemSpec<T>) -> Result<DualProgram<T>> {
    Ok(DualProgram { instance: assemble_primal(schedule, spec)? })
}

/// `dS/d alpha` along `dcoeffs` at fixed multipliers: `sum_r y_r dA_r - dC`.
pub fn slack_derivative<T: Scalar>(
    instance: &PepInstance<T>,
    schedule: &StepSchedule<T>,
    spec: &ProblemSpec<T>,
    multipliers: &[T],
    dcoeffs: &[Vec<T>],
) -> Result<DMatrix<T>> {
    if multipliers.len() != instance.row_count() {
        return Err(Error::IndexOutOfRange(format!(
            "{} multipliers for {} rows",
            multipliers.len(),
            instance.row_count()
        )));
    }
    let layout = &instance.layout;
    let mut d = -instance.objective.c_derivative(schedule, layout, &spec.class, dcoeffs)?;
    for (row, &y) in instance.rows.iter().zip(multipliers) {
        if y == T::zero() {
            continue;
        }
        if let RowOrigin::Interpolation { i, j } = row.origin {
            d += interpolation_derivative(&spec.class, schedule, layout, i, j, dcoeffs)? * y;
        }
    }
    Ok(d)
}

/// Coefficient direction of free parameter `m`: ones on the entries it drives.
pub fn param_direction<T: Scalar>(schedule: &StepSchedule<T>, m: usize) -> Vec<Vec<T>> {
    let mut d: Vec<Vec<T>> = (1..=schedule.n_steps()).map(|i| vec![T::zero(); i]).collect();
    for (i, k) in schedule.param_entries(m) {
        d[i - 1][k] = T::one();
    }
    d
}

/// `dS/dp_m` for every free parameter of the schedule.
pub fn slack_param_derivatives<T: Scalar>(
    instance: &PepInstance<T>,
    schedule: &StepSchedule<T>,
    spec: &ProblemSpec<T>,
    multipliers: &[T],
) -> Result<Vec<DMatrix<T>>> {
    (0..schedule.param_count())
        .map(|m| slack_derivative(instance, schedule, spec, multipliers, &param_direction(schedule, m)))
        .collect()
}

/// True when, at fixed interpolation multipliers, the slack is affine in the coefficients.
///
/// The `mu |x_i - x_j|^2` terms and the distance criterion `h_N h_N^T`
/// are quadratic in the coefficients; everything else is affine.
pub fn slack_affine_in_steps<T: Scalar>(spec: &ProblemSpec<T>) -> bool {
    spec.class.mu() == T::zero() && spec.criterion != super::spec::CriterionKind::FinalDistanceSq
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pep::spec::{CriterionKind, FunctionClassSpec, InitSpec};

    fn spec(criterion: CriterionKind, init: InitKind, eps: f64) -> ProblemSpec<f64> {
        ProblemSpec::new(
            FunctionClassSpec::new(1.0, 0.0, eps).unwrap(),
            criterion,
            InitSpec::new(init, 1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn one_step_gap_instance_counts() {
        let s = StepSchedule::memoryless(&[1.0]).unwrap();
        let inst = assemble_primal(&s, &ProblemSpec::smooth_convex_gap(1.0, 1.0)).unwrap();
        assert_eq!(inst.gram_dim(), 3);
        let interp = inst.rows.iter().filter(|r| matches!(r.origin, RowOrigin::Interpolation { .. })).count();
        assert_eq!(interp, 6);
        assert_eq!(inst.row_count(), 7);
        assert_eq!(inst.rows.last().unwrap().origin, RowOrigin::Initial);
    }

    #[test]
    fn min_grad_adds_epigraph_rows() {
        let s = StepSchedule::memoryless(&[1.0; 3]).unwrap();
        let inst = assemble_primal(&s, &spec(CriterionKind::MinGradientNormSq, InitKind::DistanceToOpt, 0.0)).unwrap();
        let epi = inst.rows.iter().filter(|r| matches!(r.origin, RowOrigin::Epigraph { .. })).count();
        assert_eq!(epi, 3);
        assert!(inst.objective.epigraph);
        assert_eq!(inst.objective.b, DVector::zeros(4));
        assert_eq!(inst.objective.c, DMatrix::zeros(5, 5));
        assert_eq!(inst.row_count(), 20 + 1 + 3);
    }

    #[test]
    fn inexact_layout_and_rows() {
        let s = StepSchedule::memoryless(&[1.0; 2]).unwrap();
        let inst = assemble_primal(&s, &spec(CriterionKind::FinalObjectiveGap, InitKind::DistanceToOpt, 0.3)).unwrap();
        assert_eq!(inst.gram_dim(), 6);
        let rows = inst.rows.iter().filter(|r| matches!(r.origin, RowOrigin::Inexactness { .. })).count();
        assert_eq!(rows, 2);
    }

    #[test]
    fn dual_equalities_reflect_b() {
        let s = StepSchedule::memoryless(&[1.0]).unwrap();
        let dual = assemble_dual(&s, &ProblemSpec::smooth_convex_gap(1.0, 1.0)).unwrap();
        let eqs = dual.equalities();
        assert_eq!(eqs.len(), 2);
        assert_eq!(eqs[1].1, 1.0);
        assert_eq!(dual.objective().last(), Some(&1.0));
        // all-zero multipliers violate stationarity by |b|
        let res = dual.instance.stationarity_residual(&vec![0.0; dual.multiplier_count()]);
        assert_eq!(res.norm(), 1.0);
    }

    #[test]
    fn gap_criterion_slack_is_steps_affine() {
        assert!(slack_affine_in_steps(&ProblemSpec::smooth_convex_gap(1.0, 1.0)));
        let strongly = ProblemSpec::new(
            FunctionClassSpec::new(1.0, 0.1, 0.0).unwrap(),
            CriterionKind::FinalDistanceSq,
            InitSpec::new(InitKind::DistanceToOpt, 1.0).unwrap(),
        )
        .unwrap();
        assert!(!slack_affine_in_steps(&strongly));
    }
}
