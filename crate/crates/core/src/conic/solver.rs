use std::collections::BTreeMap;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use super::program::{ConeKind, ConeProgram};
use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const CERTIFICATE_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

/// Primal `x` and dual `z` (one entry per constraint row, in the dual cone).
#[derive(Clone, Debug, PartialEq)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub gap: f64,
    pub iterations: u32,
}

/// Interior-point back end. Implementations must be deterministic and hold no shared state.
pub trait ConicSolver: Sync {
    fn solve(&self, program: &ConeProgram, tol: f64) -> Result<ConicSolution>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ClarabelSolver {
    pub max_iter: Option<u32>,
}

impl ClarabelSolver {
    fn cones(program: &ConeProgram) -> Vec<SupportedConeT<f64>> {
        program
            .cones
            .iter()
            .map(|c| match c.kind {
                ConeKind::Zero => SupportedConeT::ZeroConeT(c.len),
                ConeKind::Nonneg => SupportedConeT::NonnegativeConeT(c.len),
                ConeKind::SecondOrder => SupportedConeT::SecondOrderConeT(c.len),
                ConeKind::Psd { side } => SupportedConeT::PSDTriangleConeT(side),
            })
            .collect()
    }
}

fn csc(m: usize, n: usize, entries: &[(usize, usize, f64)]) -> CscMatrix<f64> {
    let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for &(r, c, v) in entries {
        *merged.entry((c, r)).or_insert(0.0) += v;
    }
    let mut colptr = vec![0; n + 1];
    let mut rowval = Vec::with_capacity(merged.len());
    let mut nzval = Vec::with_capacity(merged.len());
    for (&(c, r), &v) in &merged {
        if v != 0.0 {
            colptr[c + 1] += 1;
            rowval.push(r);
            nzval.push(v);
        }
    }
    for c in 0..n {
        colptr[c + 1] += colptr[c];
    }
    CscMatrix::new(m, n, colptr, rowval, nzval)
}

impl ConicSolver for ClarabelSolver {
    fn solve(&self, program: &ConeProgram, tol: f64) -> Result<ConicSolution> {
        program.validate()?;
        let n = program.n_vars;
        let m = program.n_rows();
        let p = CscMatrix::<f64>::zeros((n, n));
        let mut q = vec![0.0; n];
        for &(c, v) in &program.objective {
            q[c] += v;
        }
        let a = csc(m, n, &program.entries);
        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .tol_gap_abs(tol)
            .tol_gap_rel(tol)
            .tol_feas(tol)
            .max_iter(self.max_iter.unwrap_or(200))
            .chordal_decomposition_enable(false)
            .build()
            .map_err(|e| Error::Solver(format!("{e:?}")))?;
        let mut solver = DefaultSolver::new(&p, &q, &a, &program.rhs, &Self::cones(program), settings)
            .map_err(|e| Error::Solver(format!("{e:?}")))?;
        solver.solve();
        let sol = &solver.solution;
        let status = match sol.status {
            SolverStatus::Solved => SolveStatus::Optimal,
            SolverStatus::PrimalInfeasible => SolveStatus::Infeasible,
            SolverStatus::DualInfeasible => SolveStatus::Unbounded,
            _ => SolveStatus::NumericalFailure,
        };
        Ok(ConicSolution {
            status,
            x: sol.x.clone(),
            z: sol.z.clone(),
            primal_obj: sol.obj_val,
            dual_obj: sol.obj_val_dual,
            gap: (sol.obj_val - sol.obj_val_dual).abs(),
            iterations: sol.iterations,
        })
    }
}

/// Solves, and on numerical failure retries once at `10 tol` with the PSD
/// blocks relaxed by `1e-10` on their diagonals.
pub fn solve_with_retry(solver: &dyn ConicSolver, program: &ConeProgram, tol: f64) -> Result<ConicSolution> {
    let first = solver.solve(program, tol)?;
    if first.status != SolveStatus::NumericalFailure {
        return Ok(first);
    }
    log::debug!("numerical failure at tol {tol:e}, retrying relaxed");
    let mut relaxed = program.clone();
    for c in &program.cones {
        if let ConeKind::Psd { side } = c.kind {
            for i in 0..side {
                relaxed.rhs[c.start + super::program::svec_index(i, i)] += 1e-10;
            }
        }
    }
    solver.solve(&relaxed, 10.0 * tol)
}
