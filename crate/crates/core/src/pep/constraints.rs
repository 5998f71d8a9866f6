use nalgebra::{DMatrix, DVector};

use super::layout::{grad_vector, iterate_direction, iterate_vector, u_vector, GramLayout, Point, Symbol};
use super::schedule::StepSchedule;
use super::spec::{CriterionKind, FunctionClassSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One interpolation inequality `fcoef . F >= Tr(A_{i,j} G)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InterpolationRow<T: Scalar> {
    pub gram: DMatrix<T>,
    pub fcoef: DVector<T>,
}

/// `(a b^T + b a^T) / 2`.
pub(crate) fn sym_outer<T: Scalar>(a: &DVector<T>, b: &DVector<T>) -> DMatrix<T> {
    let half = T::lit(0.5);
    (a * b.transpose() + b * a.transpose()) * half
}

/// `e_i` over the function values `f_0..f_N`; zero at `*` since `f_* = 0`.
pub(crate) fn fvalue_vector<T: Scalar>(layout: &GramLayout, p: Point) -> DVector<T> {
    let mut e = DVector::zeros(layout.n_fvals());
    if let Point::Iter(i) = p {
        e[i] = T::one();
    }
    e
}

/// Curvature factor `1 / (2 (1 - mu / L))`.
fn curvature<T: Scalar>(class: &FunctionClassSpec<T>) -> T {
    T::one() / (T::lit(2.0) * (T::one() - class.mu() / class.l()))
}

/// Interpolation inequality of `(i, j)` for `L`-smooth `mu`-strongly convex functions:
///
/// `f_i - f_j >= <g_j, x_i - x_j> + c ( |g_i - g_j|^2 / L + mu |x_i - x_j|^2 - 2 mu / L <g_j - g_i, x_j - x_i> )`
/// with `c = 1 / (2 (1 - mu/L))`, lifted to `Tr(A_{i,j} G)`.
pub fn interpolation_constraint<T: Scalar>(
    class: &FunctionClassSpec<T>,
    schedule: &StepSchedule<T>,
    layout: &GramLayout,
    i: Point,
    j: Point,
) -> Result<InterpolationRow<T>> {
    if i == j {
        return Err(Error::VacuousPair(i.to_string()));
    }
    let l = class.l();
    let dh = iterate_vector(schedule, layout, i, l)? - iterate_vector(schedule, layout, j, l)?;
    let uj = grad_vector(layout, j)?;
    let du = grad_vector(layout, i)? - &uj;
    let c = curvature(class);
    let mu = class.mu();

    let mut gram = sym_outer(&uj, &dh) + (&du * du.transpose()) * (c / l);
    if mu > T::zero() {
        gram += (&dh * dh.transpose()) * (c * mu);
        gram -= sym_outer(&du, &dh) * (T::lit(2.0) * c * mu / l);
    }
    let fcoef = fvalue_vector(layout, i) - fvalue_vector(layout, j);
    Ok(InterpolationRow { gram, fcoef })
}

/// Directional derivative of `A_{i,j}(alpha)` along the coefficient direction `dcoeffs`.
///
/// `A_{i,j}` depends on `alpha` only through `dh = h_i - h_j`; the
/// derivative replaces one `dh` factor of every term by its variation.
pub fn interpolation_derivative<T: Scalar>(
    class: &FunctionClassSpec<T>,
    schedule: &StepSchedule<T>,
    layout: &GramLayout,
    i: Point,
    j: Point,
    dcoeffs: &[Vec<T>],
) -> Result<DMatrix<T>> {
    if i == j {
        return Err(Error::VacuousPair(i.to_string()));
    }
    let l = class.l();
    let ddh = iterate_direction(dcoeffs, layout, i, l) - iterate_direction(dcoeffs, layout, j, l);
    let uj = grad_vector(layout, j)?;
    let mut d = sym_outer(&uj, &ddh);
    let mu = class.mu();
    if mu > T::zero() {
        let dh = iterate_vector(schedule, layout, i, l)? - iterate_vector(schedule, layout, j, l)?;
        let du = grad_vector(layout, i)? - &uj;
        let c = curvature(class);
        d += sym_outer(&dh, &ddh) * (T::lit(2.0) * c * mu);
        d -= sym_outer(&du, &ddh) * (T::lit(2.0) * c * mu / l);
    }
    Ok(d)
}

/// `E_i` with `Tr(E_i G) <= 0` encoding `|d_i - g_i|^2 <= eps^2 |g_i|^2`.
pub fn inexactness_constraint<T: Scalar>(layout: &GramLayout, i: usize, epsilon: T) -> Result<DMatrix<T>> {
    if !layout.is_inexact() {
        return Err(Error::LayoutMismatch("inexactness rows need an inexact-oracle layout".into()));
    }
    if i >= layout.n_steps() {
        return Err(Error::IndexOutOfRange(format!("inexactness row {i} with N = {}", layout.n_steps())));
    }
    let g: DVector<T> = u_vector(layout, Some(Symbol::Grad(i)))?;
    let diff = u_vector(layout, Some(Symbol::Dir(i)))? - &g;
    Ok(&diff * diff.transpose() - (&g * g.transpose()) * (epsilon * epsilon))
}

/// Objective encoding `b . F + Tr(C G)`, or the epigraph variable for min-type criteria.
#[derive(Clone, Debug, PartialEq)]
pub struct CriterionEncoding<T: Scalar> {
    pub kind: CriterionKind,
    pub b: DVector<T>,
    pub c: DMatrix<T>,
    pub epigraph: bool,
}

impl<T: Scalar> CriterionEncoding<T> {
    pub fn encode(
        kind: CriterionKind,
        schedule: &StepSchedule<T>,
        layout: &GramLayout,
        class: &FunctionClassSpec<T>,
    ) -> Result<Self> {
        let n = layout.n_steps();
        let m = layout.dim();
        let mut b = DVector::zeros(layout.n_fvals());
        let mut c = DMatrix::zeros(m, m);
        let mut epigraph = false;
        match kind {
            CriterionKind::FinalObjectiveGap => b[n] = T::one(),
            CriterionKind::FinalDistanceSq => {
                let h = iterate_vector(schedule, layout, Point::Iter(n), class.l())?;
                c = &h * h.transpose();
            }
            CriterionKind::MinGradientNormSq => epigraph = true,
        }
        Ok(Self { kind, b, c, epigraph })
    }

    /// Derivative of `C` along `dcoeffs` (nonzero only for the distance criterion).
    pub fn c_derivative(
        &self,
        schedule: &StepSchedule<T>,
        layout: &GramLayout,
        class: &FunctionClassSpec<T>,
        dcoeffs: &[Vec<T>],
    ) -> Result<DMatrix<T>> {
        let m = layout.dim();
        match self.kind {
            CriterionKind::FinalDistanceSq => {
                let last = Point::Iter(layout.n_steps());
                let h = iterate_vector(schedule, layout, last, class.l())?;
                let dh = iterate_direction(dcoeffs, layout, last, class.l());
                Ok(sym_outer(&h, &dh) * T::lit(2.0))
            }
            _ => Ok(DMatrix::zeros(m, m)),
        }
    }
}
