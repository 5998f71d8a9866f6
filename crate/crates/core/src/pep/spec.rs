use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Gradient oracle available to the method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Oracle {
    Exact,
    /// `||d - grad f(x)|| <= epsilon ||grad f(x)||`.
    RelativelyInexact,
}

/// `L`-smooth, `mu`-strongly convex functions, possibly observed through a
/// relatively inexact gradient oracle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FunctionClassSpec<T> {
    l: T,
    mu: T,
    epsilon: T,
    oracle: Oracle,
}

impl<T: Scalar> FunctionClassSpec<T> {
    pub fn new(l: T, mu: T, epsilon: T) -> Result<Self> {
        if !(l > T::zero()) || !l.is_finite() {
            return Err(Error::InvalidSpec(format!("smoothness L must be positive and finite, got {l}")));
        }
        if !(mu >= T::zero()) || !(mu < l) {
            return Err(Error::InvalidSpec(format!("need 0 <= mu < L, got mu = {mu}, L = {l}")));
        }
        if !(epsilon >= T::zero()) || !(epsilon < T::one()) {
            return Err(Error::InvalidSpec(format!("inexactness must lie in [0, 1), got {epsilon}")));
        }
        let oracle = if epsilon > T::zero() { Oracle::RelativelyInexact } else { Oracle::Exact };
        Ok(Self { l, mu, epsilon, oracle })
    }

    pub fn smooth_convex(l: T) -> Self {
        Self::new(l, T::zero(), T::zero()).expect("positive smoothness")
    }

    pub fn l(&self) -> T {
        self.l
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn oracle(&self) -> Oracle {
        self.oracle
    }

    pub fn is_inexact(&self) -> bool {
        self.oracle == Oracle::RelativelyInexact
    }

    /// Same class with `L = 1` and `mu` replaced by `mu / L`.
    pub fn normalized(&self) -> Self {
        Self { l: T::one(), mu: self.mu / self.l, ..*self }
    }
}

/// Performance measure of the final iterates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionKind {
    /// `f(x_N) - f_*`.
    #[serde(alias = "gap")]
    FinalObjectiveGap,
    /// `||x_N - x_*||^2`.
    #[serde(alias = "dist")]
    FinalDistanceSq,
    /// `min_{1 <= k <= N} ||g_k||^2`, encoded with an epigraph scalar.
    #[serde(alias = "min_grad")]
    MinGradientNormSq,
}

impl CriterionKind {
    pub fn name(&self) -> &'static str {
        match self {
            CriterionKind::FinalObjectiveGap => "final_objective_gap",
            CriterionKind::FinalDistanceSq => "final_distance_sq",
            CriterionKind::MinGradientNormSq => "min_gradient_norm_sq",
        }
    }
}

/// Initial condition bounding the worst case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    /// `||x_0 - x_*||^2 <= R^2`.
    #[serde(alias = "dist")]
    DistanceToOpt,
    /// `f(x_0) - f_* <= R`.
    #[serde(alias = "gap")]
    ObjectiveGap,
}

impl InitKind {
    pub fn name(&self) -> &'static str {
        match self {
            InitKind::DistanceToOpt => "distance_to_opt",
            InitKind::ObjectiveGap => "objective_gap",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitSpec<T> {
    pub kind: InitKind,
    pub radius: T,
}

impl<T: Scalar> InitSpec<T> {
    pub fn new(kind: InitKind, radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::InvalidSpec(format!("radius R must be positive, got {radius}")));
        }
        Ok(Self { kind, radius })
    }

    /// Right-hand side of the initial-condition row: `R^2` or `R`.
    pub fn bound(&self) -> T {
        match self.kind {
            InitKind::DistanceToOpt => self.radius * self.radius,
            InitKind::ObjectiveGap => self.radius,
        }
    }
}

/// Everything but the schedule: the class, the criterion and the initial condition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProblemSpec<T> {
    pub class: FunctionClassSpec<T>,
    pub criterion: CriterionKind,
    pub init: InitSpec<T>,
}

impl<T: Scalar> ProblemSpec<T> {
    pub fn new(class: FunctionClassSpec<T>, criterion: CriterionKind, init: InitSpec<T>) -> Result<Self> {
        let spec = Self { class, criterion, init };
        spec.check_compatible()?;
        Ok(spec)
    }

    /// Smooth convex functions, final objective gap, `||x_0 - x_*|| <= R`.
    pub fn smooth_convex_gap(l: T, r: T) -> Self {
        Self {
            class: FunctionClassSpec::smooth_convex(l),
            criterion: CriterionKind::FinalObjectiveGap,
            init: InitSpec::new(InitKind::DistanceToOpt, r).expect("positive radius"),
        }
    }

    /// Rejects pairings whose worst case is unbounded for every method.
    pub fn check_compatible(&self) -> Result<()> {
        if self.criterion == CriterionKind::FinalDistanceSq
            && self.init.kind == InitKind::ObjectiveGap
            && self.class.mu() == T::zero()
        {
            return Err(Error::Incompatible(
                "final distance under a function-value initial condition is unbounded without strong convexity"
                    .into(),
            ));
        }
        Ok(())
    }

    /// Spec at `L = 1`, `R = 1` together with the factor mapping normalized bounds back.
    pub fn normalized(&self) -> (Self, T) {
        let spec = Self {
            class: self.class.normalized(),
            criterion: self.criterion,
            init: InitSpec { kind: self.init.kind, radius: T::one() },
        };
        (spec, bound_scale(self.criterion, self.init.kind, self.class.l(), self.init.radius))
    }
}

/// Factor `s` such that `w(L, R) = s * w(1, 1)` (with `mu / L` held fixed).
///
/// | criterion      | distance init | gap init |
/// |----------------|---------------|----------|
/// | objective gap  | `L R^2`       | `R`      |
/// | distance sq    | `R^2`         | `R / L`  |
/// | min grad sq    | `L^2 R^2`     | `L R`    |
pub fn bound_scale<T: Scalar>(criterion: CriterionKind, init: InitKind, l: T, r: T) -> T {
    match (criterion, init) {
        (CriterionKind::FinalObjectiveGap, InitKind::DistanceToOpt) => l * r * r,
        (CriterionKind::FinalObjectiveGap, InitKind::ObjectiveGap) => r,
        (CriterionKind::FinalDistanceSq, InitKind::DistanceToOpt) => r * r,
        (CriterionKind::FinalDistanceSq, InitKind::ObjectiveGap) => r / l,
        (CriterionKind::MinGradientNormSq, InitKind::DistanceToOpt) => l * l * r * r,
        (CriterionKind::MinGradientNormSq, InitKind::ObjectiveGap) => l * r,
    }
}
