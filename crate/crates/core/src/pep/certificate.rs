use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::instance::{PepInstance, RowOrigin};
use super::layout::{grad_vector, iterate_vector, Point};
use super::schedule::StepSchedule;
use super::spec::FunctionClassSpec;
use crate::error::{Error, Result};
use crate::scalar::{fmax, sqrt, Scalar};

/// Interpolation multiplier `lambda_{i,j}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairMultiplier<T> {
    pub i: Point,
    pub j: Point,
    pub value: T,
}

/// Multipliers proving the bound `w = tau R^2` (or `tau R`).
#[derive(Clone, Debug, PartialEq)]
pub struct DualCertificate<T: Scalar> {
    pub tau: T,
    pub lambda: Vec<PairMultiplier<T>>,
    /// Inexactness multipliers `eta_i`, indexed by step.
    pub eta: Vec<(usize, T)>,
    /// Epigraph multipliers `sigma_k` of min-type criteria, indexed by iterate.
    pub sigma: Vec<(usize, T)>,
    pub slack: DMatrix<T>,
    pub bound: T,
}

impl<T: Scalar> DualCertificate<T> {
    /// Splits a multiplier vector aligned with the rows of `instance`.
    pub fn from_multipliers(instance: &PepInstance<T>, y: &[T]) -> Self {
        let mut cert = Self {
            tau: T::zero(),
            lambda: Vec::new(),
            eta: Vec::new(),
            sigma: Vec::new(),
            slack: instance.slack(y),
            bound: instance.dual_objective(y),
        };
        for (row, &v) in instance.rows.iter().zip(y) {
            match row.origin {
                RowOrigin::Interpolation { i, j } => cert.lambda.push(PairMultiplier { i, j, value: v }),
                RowOrigin::Inexactness { i } => cert.eta.push((i, v)),
                RowOrigin::Initial => cert.tau = v,
                RowOrigin::Epigraph { k } => cert.sigma.push((k, v)),
            }
        }
        cert
    }

    /// Multiplier vector aligned with the rows of `instance`.
    ///
    /// Fails when the certificate does not carry exactly one multiplier per row.
    pub fn multipliers_for(&self, instance: &PepInstance<T>) -> Result<Vec<T>> {
        let expected = instance.row_count();
        let given = self.lambda.len() + self.eta.len() + self.sigma.len() + 1;
        if given != expected {
            return Err(Error::IndexOutOfRange(format!(
                "certificate carries {given} multipliers, instance has {expected} rows"
            )));
        }
        let mut y = vec![T::zero(); expected];
        let mut set = |origin: RowOrigin, v: T| -> Result<()> {
            let pos = instance
                .position(origin)
                .ok_or_else(|| Error::IndexOutOfRange(format!("no row for {origin} in this instance")))?;
            y[pos] = v;
            Ok(())
        };
        for p in &self.lambda {
            set(RowOrigin::Interpolation { i: p.i, j: p.j }, p.value)?;
        }
        for &(i, v) in &self.eta {
            set(RowOrigin::Inexactness { i }, v)?;
        }
        for &(k, v) in &self.sigma {
            set(RowOrigin::Epigraph { k }, v)?;
        }
        set(RowOrigin::Initial, self.tau)?;
        Ok(y)
    }
}

/// Primal solution `(G, F, t)` of a PEP.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimalWitness<T: Scalar> {
    pub gram: DMatrix<T>,
    pub fvals: DVector<T>,
    pub epigraph: Option<T>,
    pub value: T,
}

/// One point `(x_i, g_i, f_i)` of a reconstructed worst-case instance.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryPoint<T: Scalar> {
    pub point: Point,
    pub x: DVector<T>,
    pub g: DVector<T>,
    pub f: T,
}

/// Explicit worst-case iterates living in dimension `rank(G)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T: Scalar> {
    pub dim: usize,
    pub points: Vec<TrajectoryPoint<T>>,
    /// Oracle outputs `d_0..d_{N-1}` for inexact layouts.
    pub directions: Vec<DVector<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn get(&self, p: Point) -> &TrajectoryPoint<T> {
        self.points.iter().find(|q| q.point == p).expect("point of the index set")
    }

    /// Largest violation of the interpolation inequalities evaluated on the explicit vectors.
    pub fn interpolation_violation(&self, class: &FunctionClassSpec<T>) -> T {
        let (l, mu) = (class.l(), class.mu());
        let c = T::one() / (T::lit(2.0) * (T::one() - mu / l));
        let mut worst = T::neg_infinity();
        for a in &self.points {
            for b in &self.points {
                if a.point == b.point {
                    continue;
                }
                let dx = &a.x - &b.x;
                let dg = &a.g - &b.g;
                let rhs = b.g.dot(&dx)
                    + c * (dg.norm_squared() / l + mu * dx.norm_squared() - T::lit(2.0) * mu / l * dg.dot(&dx));
                worst = fmax(worst, rhs - (a.f - b.f));
            }
        }
        worst
    }

    /// Largest violation of `|d_i - g_i| <= eps |g_i|`, squared form.
    pub fn inexactness_violation(&self, epsilon: T) -> T {
        self.directions
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let g = &self.get(Point::Iter(i)).g;
                (d - g).norm_squared() - epsilon * epsilon * g.norm_squared()
            })
            .fold(T::neg_infinity(), fmax)
    }
}

/// Factors `G = P^T P` by eigendecomposition and rebuilds `(x_i, g_i, f_i)`.
///
/// Eigenvalues at or below `rank_tol * lambda_max` are dropped. The
/// witness is rejected when `G` has an eigenvalue below
/// `-indefinite_tol * max(1, lambda_max)`.
pub fn extract_worst_case<T: Scalar>(
    witness: &PrimalWitness<T>,
    schedule: &StepSchedule<T>,
    class: &FunctionClassSpec<T>,
    rank_tol: T,
    indefinite_tol: T,
) -> Result<Trajectory<T>> {
    let n = schedule.n_steps();
    let layout = if class.is_inexact() {
        super::layout::GramLayout::inexact(n)
    } else {
        super::layout::GramLayout::exact(n)
    };
    let m = layout.dim();
    if witness.gram.nrows() != m || witness.gram.ncols() != m {
        return Err(Error::IndexOutOfRange(format!("Gram matrix is not {m} x {m}")));
    }
    let sym = (&witness.gram + witness.gram.transpose()) * T::lit(0.5);
    let eig = SymmetricEigen::new(sym);
    let lmax = eig.eigenvalues.iter().copied().fold(T::zero(), fmax);
    let lmin = eig.eigenvalues.iter().copied().fold(T::infinity(), |a, b| if b < a { b } else { a });
    if lmin < -indefinite_tol * fmax(T::one(), lmax) {
        return Err(Error::Precondition(format!("Gram matrix is indefinite (min eigenvalue {lmin})")));
    }
    let keep: Vec<usize> = (0..m).filter(|&k| eig.eigenvalues[k] > rank_tol * lmax && lmax > T::zero()).collect();
    // rows of P are sqrt(lambda_k) v_k^T
    let mut p = DMatrix::zeros(keep.len(), m);
    for (r, &k) in keep.iter().enumerate() {
        let s = sqrt(eig.eigenvalues[k]);
        for c in 0..m {
            p[(r, c)] = s * eig.eigenvectors[(c, k)];
        }
    }
    let mut points = Vec::with_capacity(n + 2);
    for pt in layout.points() {
        let x = &p * iterate_vector(schedule, &layout, pt, class.l())?;
        let g = &p * grad_vector(&layout, pt)?;
        let f = match pt {
            Point::Iter(i) => witness.fvals[i],
            Point::Star => T::zero(),
        };
        points.push(TrajectoryPoint { point: pt, x, g, f });
    }
    let directions = if layout.is_inexact() {
        (0..n).map(|i| p.column(n + 1 + i).into_owned()).collect()
    } else {
        Vec::new()
    };
    Ok(Trajectory { dim: keep.len(), points, directions })
}
