use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Cone of a contiguous block of constraint rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConeKind {
    Zero,
    Nonneg,
    /// `{(t, x) : |x| <= t}`, first row is `t`.
    SecondOrder,
    /// Symmetric `side x side` matrices in scaled lower-triangular vectorization.
    Psd { side: usize },
}

impl ConeKind {
    pub fn token(&self) -> &'static str {
        match self {
            ConeKind::Zero => "zero",
            ConeKind::Nonneg => "nonneg",
            ConeKind::SecondOrder => "soc",
            ConeKind::Psd { .. } => "psd",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ConeBlock {
    pub kind: ConeKind,
    pub start: usize,
    pub len: usize,
}

/// `minimize c^T x` subject to `rhs - A x` in the product of `cones`.
///
/// `A` is stored as `(row, col, value)` triplets; repeated positions add up.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConeProgram {
    pub n_vars: usize,
    pub objective: Vec<(usize, f64)>,
    pub entries: Vec<(usize, usize, f64)>,
    pub rhs: Vec<f64>,
    pub cones: Vec<ConeBlock>,
}

/// Length of the vectorization of a `side x side` symmetric matrix.
pub fn svec_len(side: usize) -> usize {
    side * (side + 1) / 2
}

/// Position of entry `(i, j)`, `i >= j`, in the vectorization.
pub fn svec_index(i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    i * (i + 1) / 2 + j
}

/// Lower triangle row by row, off-diagonals scaled by `sqrt 2` so that
/// `svec(A) . svec(B) = Tr(A B)`.
///
/// The ordering coincides with the upper triangle taken column by column.
pub fn svec(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut v = Vec::with_capacity(svec_len(n));
    for i in 0..n {
        for j in 0..=i {
            if i == j {
                v.push(m[(i, i)]);
            } else {
                v.push(0.5 * (m[(i, j)] + m[(j, i)]) * std::f64::consts::SQRT_2);
            }
        }
    }
    v
}

/// Inverse of [`svec`].
pub fn smat(v: &[f64], side: usize) -> Result<DMatrix<f64>> {
    if v.len() != svec_len(side) {
        return Err(Error::IndexOutOfRange(format!("{} entries do not vectorize a {side} x {side} matrix", v.len())));
    }
    let mut m = DMatrix::zeros(side, side);
    for i in 0..side {
        for j in 0..=i {
            let x = v[svec_index(i, j)];
            if i == j {
                m[(i, i)] = x;
            } else {
                m[(i, j)] = x * std::f64::consts::FRAC_1_SQRT_2;
                m[(j, i)] = m[(i, j)];
            }
        }
    }
    Ok(m)
}

impl ConeProgram {
    pub fn new(n_vars: usize) -> Self {
        Self { n_vars, ..Self::default() }
    }

    pub fn n_rows(&self) -> usize {
        self.rhs.len()
    }

    /// Appends a cone block; each row is `(sparse A row, rhs)`. Returns the first row index.
    pub fn push_block(&mut self, kind: ConeKind, rows: Vec<(Vec<(usize, f64)>, f64)>) -> usize {
        let start = self.rhs.len();
        for (r, (coefs, b)) in rows.into_iter().enumerate() {
            for (c, v) in coefs {
                self.entries.push((start + r, c, v));
            }
            self.rhs.push(b);
        }
        self.cones.push(ConeBlock { kind, start, len: self.rhs.len() - start });
        start
    }

    /// Appends a PSD block given its constant part and one matrix per variable:
    /// `constant + sum_c x_c M_c >= 0`.
    pub fn push_psd(&mut self, constant: &DMatrix<f64>, terms: &[(usize, &DMatrix<f64>)]) -> usize {
        let side = constant.nrows();
        let start = self.rhs.len();
        self.rhs.extend(svec(constant));
        for &(c, m) in terms {
            for (k, v) in svec(m).into_iter().enumerate() {
                if v != 0.0 {
                    self.entries.push((start + k, c, -v));
                }
            }
        }
        self.cones.push(ConeBlock { kind: ConeKind::Psd { side }, start, len: svec_len(side) });
        start
    }

    pub fn cone_of(&self, kind: fn(&ConeKind) -> bool) -> Option<&ConeBlock> {
        self.cones.iter().find(|c| kind(&c.kind))
    }

    pub fn validate(&self) -> Result<()> {
        let mut next = 0;
        for c in &self.cones {
            if c.start != next {
                return Err(Error::Precondition(format!("cone at row {} leaves a gap or overlaps (expected {next})", c.start)));
            }
            let ok = match c.kind {
                ConeKind::Psd { side } => c.len == svec_len(side) && side > 0,
                _ => c.len > 0,
            };
            if !ok {
                return Err(Error::Precondition(format!("{} cone at row {} has invalid length {}", c.kind.token(), c.start, c.len)));
            }
            next += c.len;
        }
        if next != self.rhs.len() {
            return Err(Error::Precondition(format!("cones cover {next} rows, program has {}", self.rhs.len())));
        }
        for &(r, c, v) in &self.entries {
            if r >= self.rhs.len() || c >= self.n_vars {
                return Err(Error::IndexOutOfRange(format!("entry ({r}, {c}) outside {} x {}", self.rhs.len(), self.n_vars)));
            }
            if !v.is_finite() {
                return Err(Error::Precondition(format!("non-finite entry at ({r}, {c})")));
            }
        }
        for &(c, v) in &self.objective {
            if c >= self.n_vars || !v.is_finite() {
                return Err(Error::Precondition(format!("bad objective entry ({c}, {v})")));
            }
        }
        if self.rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("non-finite right-hand side".into()));
        }
        Ok(())
    }

    /// `c^T x`.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(c, v)| v * x[c]).sum()
    }

    /// `rhs - A x`.
    pub fn slack(&self, x: &[f64]) -> Vec<f64> {
        let mut s = self.rhs.clone();
        for &(r, c, v) in &self.entries {
            s[r] -= v * x[c];
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sym(n: usize, vals: &[f64]) -> DMatrix<f64> {
        let m = DMatrix::from_fn(n, n, |i, j| vals[i * n + j]);
        (&m + m.transpose()) * 0.5
    }

    proptest! {
        #[test]
        fn svec_is_an_isometry(a in prop::collection::vec(-10.0f64..10.0, 100), b in prop::collection::vec(-10.0f64..10.0, 100)) {
            let (a, b) = (sym(10, &a), sym(10, &b));
            let tr = (&a * &b).trace();
            let dot: f64 = svec(&a).iter().zip(svec(&b)).map(|(x, y)| x * y).sum();
            prop_assert!((tr - dot).abs() <= 1e-12 * (1.0 + tr.abs()).max(a.norm() * b.norm()));
        }

        #[test]
        fn smat_inverts_svec(a in prop::collection::vec(-1.0f64..1.0, 49)) {
            let a = sym(7, &a);
            let back = smat(&svec(&a), 7).unwrap();
            prop_assert!((back - a).amax() <= 1e-15);
        }
    }

    #[test]
    fn ordering_matches_upper_column_major() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 4.0, 2.0, 3.0, 5.0, 4.0, 5.0, 6.0]);
        let s = 2f64.sqrt();
        assert_eq!(svec(&m), vec![1.0, 2.0 * s, 3.0, 4.0 * s, 5.0 * s, 6.0]);
    }

    #[test]
    fn validation() {
        let mut p = ConeProgram::new(1);
        p.push_block(ConeKind::Nonneg, vec![(vec![(0, -1.0)], 0.0)]);
        assert!(p.validate().is_ok());
        p.cones[0].len = 2;
        assert!(p.validate().is_err());
        let mut p = ConeProgram::new(1);
        p.push_block(ConeKind::Nonneg, vec![(vec![(3, -1.0)], 0.0)]);
        assert!(p.validate().is_err());
    }
}
