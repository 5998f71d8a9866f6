use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{abs, fmax, Scalar};

/// Structural kind of a fixed-step method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum ScheduleKind {
    /// One free step per iteration; column `k` holds the same value in every row.
    Memoryless,
    /// Every coefficient of the lower triangle is free.
    Full,
    /// Memoryless steps repeating with period `core_length`.
    Cyclic { core_length: usize },
}

impl ScheduleKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScheduleKind::Memoryless => "memoryless",
            ScheduleKind::Full => "full",
            ScheduleKind::Cyclic { .. } => "cyclic",
        }
    }

    /// Number of free parameters a schedule of this kind exposes over `n_steps` iterations.
    pub fn param_count(&self, n_steps: usize) -> usize {
        match *self {
            ScheduleKind::Memoryless => n_steps,
            ScheduleKind::Full => n_steps * (n_steps + 1) / 2,
            ScheduleKind::Cyclic { core_length } => core_length,
        }
    }
}

/// Coefficients `alpha[i][k]` of `x_i = x_0 - sum_{k<i} alpha_{i,k} g_k / L`.
///
/// Row `i - 1` of `coeffs` holds the `i` coefficients of iterate `x_i`,
/// so the triangle has rows of length `1, 2, ..., N`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepSchedule<T> {
    kind: ScheduleKind,
    coeffs: Vec<Vec<T>>,
}

impl<T: Scalar> StepSchedule<T> {
    /// Builds a schedule from a full triangle, checking the structural invariants of `kind`.
    pub fn new(kind: ScheduleKind, coeffs: Vec<Vec<T>>) -> Result<Self> {
        let n = coeffs.len();
        if n == 0 {
            return Err(Error::InvalidSchedule("at least one step is required".into()));
        }
        for (r, row) in coeffs.iter().enumerate() {
            if row.len() != r + 1 {
                return Err(Error::InvalidSchedule(format!(
                    "row for x_{} has {} coefficients, expected {}",
                    r + 1,
                    row.len(),
                    r + 1
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSchedule(format!("non-finite coefficient in row {}", r + 1)));
            }
        }
        let schedule = Self { kind, coeffs };
        schedule.check_structure()?;
        Ok(schedule)
    }

    /// Memoryless gradient descent with the given per-iteration steps.
    pub fn memoryless(steps: &[T]) -> Result<Self> {
        Self::from_params(ScheduleKind::Memoryless, steps.len(), steps)
    }

    /// Cyclic schedule repeating `core` over `n_steps` iterations.
    pub fn cyclic(core: &[T], n_steps: usize) -> Result<Self> {
        Self::from_params(ScheduleKind::Cyclic { core_length: core.len() }, n_steps, core)
    }

    /// Schedule of `kind` over `n_steps` iterations where every free parameter equals `step`.
    ///
    /// For the full kind this is plain gradient descent: `alpha_{i,k} = step`.
    pub fn constant(kind: ScheduleKind, n_steps: usize, step: T) -> Result<Self> {
        match kind {
            ScheduleKind::Full => {
                let coeffs = (1..=n_steps).map(|i| vec![step; i]).collect();
                Self::new(kind, coeffs)
            }
            _ => Self::from_params(kind, n_steps, &vec![step; kind.param_count(n_steps)]),
        }
    }

    /// Expands free parameters into the coefficient triangle.
    pub fn from_params(kind: ScheduleKind, n_steps: usize, params: &[T]) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidSchedule("at least one step is required".into()));
        }
        if let ScheduleKind::Cyclic { core_length } = kind {
            if core_length == 0 || n_steps % core_length != 0 {
                return Err(Error::InvalidSchedule(format!(
                    "cyclic schedule needs N ({n_steps}) to be a multiple of the core length ({core_length})"
                )));
            }
        }
        let expected = kind.param_count(n_steps);
        if params.len() != expected {
            return Err(Error::InvalidSchedule(format!(
                "{} schedule over {n_steps} steps takes {expected} parameters, got {}",
                kind.name(),
                params.len()
            )));
        }
        let mut coeffs: Vec<Vec<T>> = (1..=n_steps).map(|i| vec![T::zero(); i]).collect();
        for (m, &p) in params.iter().enumerate() {
            for (i, k) in param_entries(kind, n_steps, m) {
                coeffs[i - 1][k] = p;
            }
        }
        Self::new(kind, coeffs)
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    /// Number of iterations `N`.
    pub fn n_steps(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Vec<T>] {
        &self.coeffs
    }

    /// `alpha_{i,k}` for `0 <= k < i <= N`.
    pub fn coeff(&self, i: usize, k: usize) -> Result<T> {
        if i == 0 || i > self.n_steps() || k >= i {
            return Err(Error::IndexOutOfRange(format!("alpha_({i},{k}) with N = {}", self.n_steps())));
        }
        Ok(self.coeffs[i - 1][k])
    }

    pub fn param_count(&self) -> usize {
        self.kind.param_count(self.n_steps())
    }

    /// Reads back the free parameters (inverse of [`StepSchedule::from_params`]).
    pub fn params(&self) -> Vec<T> {
        (0..self.param_count())
            .map(|m| {
                let (i, k) = param_entries(self.kind, self.n_steps(), m)[0];
                self.coeffs[i - 1][k]
            })
            .collect()
    }

    /// Same structure with new free parameters.
    pub fn with_params(&self, params: &[T]) -> Result<Self> {
        Self::from_params(self.kind, self.n_steps(), params)
    }

    /// Triangle entries `(i, k)` driven by free parameter `m`.
    pub fn param_entries(&self, m: usize) -> Vec<(usize, usize)> {
        param_entries(self.kind, self.n_steps(), m)
    }

    /// Per-iteration steps `alpha_{k+1,k}` (the diagonal of the triangle).
    pub fn diagonal(&self) -> Vec<T> {
        self.coeffs.iter().enumerate().map(|(r, row)| row[r]).collect()
    }

    /// Appends one iteration with a zero step, so that `x_{N+1} = x_N`.
    pub fn push_zero_step(&self) -> Result<Self> {
        let n = self.n_steps();
        let mut coeffs = self.coeffs.clone();
        let mut row = self.coeffs[n - 1].clone();
        row.push(T::zero());
        coeffs.push(row);
        let kind = match self.kind {
            ScheduleKind::Cyclic { .. } => ScheduleKind::Memoryless,
            k => k,
        };
        Self::new(kind, coeffs)
    }

    pub fn cast<U: Scalar>(&self) -> StepSchedule<U> {
        StepSchedule {
            kind: self.kind,
            coeffs: self
                .coeffs
                .iter()
                .map(|row| row.iter().map(|v| U::lit(v.to_f64_lossy())).collect())
                .collect(),
        }
    }

    fn check_structure(&self) -> Result<()> {
        let n = self.n_steps();
        let close = |a: T, b: T| abs(a - b) <= T::lit(1e-12) * fmax(T::one(), fmax(abs(a), abs(b)));
        match self.kind {
            ScheduleKind::Full => Ok(()),
            ScheduleKind::Memoryless | ScheduleKind::Cyclic { .. } => {
                if let ScheduleKind::Cyclic { core_length } = self.kind {
                    if core_length == 0 || n % core_length != 0 {
                        return Err(Error::InvalidSchedule(format!(
                            "cyclic schedule needs N ({n}) to be a multiple of the core length ({core_length})"
                        )));
                    }
                }
                for k in 0..n {
                    let first = self.coeffs[k][k];
                    for i in (k + 2)..=n {
                        if !close(self.coeffs[i - 1][k], first) {
                            return Err(Error::InvalidSchedule(format!(
                                "column {k} is not constant below the diagonal (row {i})"
                            )));
                        }
                    }
                    if let ScheduleKind::Cyclic { core_length } = self.kind {
                        let lead = self.coeffs[k % core_length][k % core_length];
                        if !close(first, lead) {
                            return Err(Error::InvalidSchedule(format!(
                                "step {k} does not repeat the cyclic core"
                            )));
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

/// Entries `(i, k)` of the triangle controlled by free parameter `m`.
pub(crate) fn param_entries(kind: ScheduleKind, n_steps: usize, m: usize) -> Vec<(usize, usize)> {
    match kind {
        ScheduleKind::Memoryless => ((m + 1)..=n_steps).map(|i| (i, m)).collect(),
        ScheduleKind::Cyclic { core_length } => (0..n_steps)
            .filter(|k| k % core_length == m)
            .flat_map(|k| ((k + 1)..=n_steps).map(move |i| (i, k)))
            .collect(),
        ScheduleKind::Full => {
            // row-major over the triangle: (1,0), (2,0), (2,1), (3,0), ...
            let mut i = 1;
            let mut rem = m;
            while rem >= i {
                rem -= i;
                i += 1;
            }
            vec![(i, rem)]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn memoryless_columns_are_constant() {
        let s = StepSchedule::memoryless(&[1.5, 2.0, 0.5]).unwrap();
        assert_eq!(s.coeffs(), &[vec![1.5], vec![1.5, 2.0], vec![1.5, 2.0, 0.5]]);
        assert_eq!(s.params(), vec![1.5, 2.0, 0.5]);
    }

    #[test]
    fn full_params_fill_row_major() {
        let s = StepSchedule::from_params(ScheduleKind::Full, 2, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.coeffs(), &[vec![1.0], vec![2.0, 3.0]]);
        assert!(StepSchedule::from_params(ScheduleKind::Full, 2, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn cyclic_repeats_core() {
        let s = StepSchedule::cyclic(&[0.5f32, 2.0], 4).unwrap();
        assert_eq!(s.diagonal(), vec![0.5, 2.0, 0.5, 2.0]);
        assert_eq!(s.coeffs()[3], vec![0.5, 2.0, 0.5, 2.0]);
        assert!(StepSchedule::cyclic(&[0.5, 2.0], 3).is_err());
    }

    #[test]
    fn rejects_broken_memoryless_column() {
        let err = StepSchedule::new(ScheduleKind::Memoryless, vec![vec![1.0], vec![1.1, 1.0]]);
        assert!(err.is_err());
        assert!(StepSchedule::new(ScheduleKind::Full, vec![vec![1.0], vec![1.1, 1.0]]).is_ok());
        assert!(StepSchedule::<f64>::new(ScheduleKind::Full, vec![vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn coeff_bounds() {
        let s = StepSchedule::memoryless(&[1.0, 1.0]).unwrap();
        assert!(s.coeff(2, 1).is_ok());
        assert!(s.coeff(2, 2).is_err());
        assert!(s.coeff(0, 0).is_err());
        assert!(s.coeff(3, 0).is_err());
    }
}
