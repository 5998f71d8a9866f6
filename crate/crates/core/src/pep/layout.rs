use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::schedule::StepSchedule;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point of the index set `I = {0, ..., N, *}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Iter(usize),
    Star,
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Iter(i) => write!(f, "{i}"),
            Point::Star => f.write_str("*"),
        }
    }
}

impl FromStr for Point {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "*" => Ok(Point::Star),
            t => t
                .parse()
                .map(Point::Iter)
                .map_err(|_| Error::Parse(format!("'{s}' is not an iterate index or '*'"))),
        }
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A column of `P`: true gradients, oracle outputs (inexact layouts) or `x_0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symbol {
    Grad(usize),
    Dir(usize),
    X0,
}

/// Column convention of `P`.
///
/// Exact oracle: `P = [g_0, ..., g_N, x_0]`.
/// Inexact oracle: `P = [g_0, ..., g_N, d_0, ..., d_{N-1}, x_0]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GramLayout {
    n_steps: usize,
    inexact: bool,
}

impl GramLayout {
    pub fn exact(n_steps: usize) -> Self {
        Self { n_steps, inexact: false }
    }

    pub fn inexact(n_steps: usize) -> Self {
        Self { n_steps, inexact: true }
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn is_inexact(&self) -> bool {
        self.inexact
    }

    /// Gram dimension `m`.
    pub fn dim(&self) -> usize {
        if self.inexact {
            2 * self.n_steps + 2
        } else {
            self.n_steps + 2
        }
    }

    /// Number of function values `f_0, ..., f_N` (with `f_* = 0`).
    pub fn n_fvals(&self) -> usize {
        self.n_steps + 1
    }

    /// Zero-based column index of `symbol`.
    pub fn column(&self, symbol: Symbol) -> Result<usize> {
        let n = self.n_steps;
        match symbol {
            Symbol::Grad(i) if i <= n => Ok(i),
            Symbol::Grad(i) => Err(Error::IndexOutOfRange(format!("g_{i} with N = {n}"))),
            Symbol::Dir(i) if !self.inexact => {
                Err(Error::LayoutMismatch(format!("d_{i} requested on an exact-oracle layout")))
            }
            Symbol::Dir(i) if i < n => Ok(n + 1 + i),
            Symbol::Dir(i) => Err(Error::IndexOutOfRange(format!("d_{i} with N = {n}"))),
            Symbol::X0 => Ok(self.dim() - 1),
        }
    }

    /// Column carrying the direction used for step `k` (`g_k` or `d_k`).
    pub(crate) fn step_column(&self, k: usize) -> usize {
        if self.inexact {
            self.n_steps + 1 + k
        } else {
            k
        }
    }

    pub fn points(&self) -> impl Iterator<Item = Point> {
        (0..=self.n_steps).map(Point::Iter).chain(std::iter::once(Point::Star))
    }

    pub(crate) fn check_point(&self, p: Point) -> Result<()> {
        match p {
            Point::Iter(i) if i > self.n_steps => {
                Err(Error::IndexOutOfRange(format!("x_{i} with N = {}", self.n_steps)))
            }
            _ => Ok(()),
        }
    }
}

/// `u` vector of a gradient symbol (or `u_* = 0`).
pub fn u_vector<T: Scalar>(layout: &GramLayout, symbol: Option<Symbol>) -> Result<DVector<T>> {
    let mut u = DVector::zeros(layout.dim());
    if let Some(s) = symbol {
        u[layout.column(s)?] = T::one();
    }
    Ok(u)
}

/// `u_i` of a point: `e_{g_i}`, or zero at `*`.
pub fn grad_vector<T: Scalar>(layout: &GramLayout, p: Point) -> Result<DVector<T>> {
    match p {
        Point::Iter(i) => u_vector(layout, Some(Symbol::Grad(i))),
        Point::Star => u_vector(layout, None),
    }
}

/// `h_i` with coefficients read as normalized to `L = 1`: `x_i = P h_i`.
pub fn h_vector<T: Scalar>(schedule: &StepSchedule<T>, layout: &GramLayout, p: Point) -> Result<DVector<T>> {
    iterate_vector(schedule, layout, p, T::one())
}

/// `h_i` for smoothness `L`: entries `-alpha_{i,k} / L` on the step columns and `1` on `x_0`.
pub fn iterate_vector<T: Scalar>(
    schedule: &StepSchedule<T>,
    layout: &GramLayout,
    p: Point,
    l: T,
) -> Result<DVector<T>> {
    check_schedule(schedule, layout)?;
    layout.check_point(p)?;
    let mut h = DVector::zeros(layout.dim());
    if let Point::Iter(i) = p {
        h[layout.dim() - 1] = T::one();
        if i > 0 {
            for (k, &a) in schedule.coeffs()[i - 1].iter().enumerate() {
                h[layout.step_column(k)] = -a / l;
            }
        }
    }
    Ok(h)
}

/// Derivative of `h_i` along a coefficient direction `dcoeffs` (same triangle shape as the schedule).
pub(crate) fn iterate_direction<T: Scalar>(dcoeffs: &[Vec<T>], layout: &GramLayout, p: Point, l: T) -> DVector<T> {
    let mut dh = DVector::zeros(layout.dim());
    if let Point::Iter(i) = p {
        if i > 0 {
            for (k, &a) in dcoeffs[i - 1].iter().enumerate() {
                dh[layout.step_column(k)] = -a / l;
            }
        }
    }
    dh
}

pub(crate) fn check_schedule<T: Scalar>(schedule: &StepSchedule<T>, layout: &GramLayout) -> Result<()> {
    if schedule.n_steps() != layout.n_steps() {
        return Err(Error::IndexOutOfRange(format!(
            "schedule has N = {} but the layout expects N = {}",
            schedule.n_steps(),
            layout.n_steps()
        )));
    }
    Ok(())
}
