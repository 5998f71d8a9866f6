use nalgebra::{DMatrix, DVector};

use super::program::{smat, svec_len, ConeKind, ConeProgram};
use super::solver::{solve_with_retry, ConicSolution, ConicSolver, SolveStatus};
use crate::error::{Error, Result};
use crate::pep::{
    ConstraintRow, CriterionEncoding, CriterionKind, DualProgram, GramLayout, PepInstance, PrimalWitness, RowOrigin,
};

/// Dual PEP written as a cone program over the multipliers `y`, one per primal row.
///
/// Rows: stationarity equalities (zero cone, one per `f_k`, plus the
/// epigraph normalization), `y >= 0` (nonnegative cone), then the slack
/// `S(y) = sum_r y_r gram_r - C` (PSD cone).
#[derive(Clone, Debug, PartialEq)]
pub struct DualEncoding {
    pub program: ConeProgram,
    pub layout: GramLayout,
    pub epigraph: bool,
    pub origins: Vec<RowOrigin>,
}

impl DualEncoding {
    pub fn n_equalities(&self) -> usize {
        self.layout.n_fvals() + usize::from(self.epigraph)
    }

    pub fn psd_start(&self) -> usize {
        self.n_equalities() + self.origins.len()
    }
}

pub fn encode_dual(dual: &DualProgram<f64>) -> DualEncoding {
    let inst = &dual.instance;
    let n_rows = inst.row_count();
    let mut program = ConeProgram::new(n_rows);
    program.objective = inst.rows.iter().enumerate().filter(|(_, r)| r.rhs != 0.0).map(|(k, r)| (k, r.rhs)).collect();
    let eqs = dual
        .equalities()
        .into_iter()
        .map(|(coefs, b)| (coefs.into_iter().enumerate().filter(|&(_, v)| v != 0.0).collect(), b))
        .collect();
    program.push_block(ConeKind::Zero, eqs);
    program.push_block(ConeKind::Nonneg, (0..n_rows).map(|k| (vec![(k, -1.0)], 0.0)).collect());
    let terms: Vec<(usize, &DMatrix<f64>)> = inst.rows.iter().enumerate().map(|(k, r)| (k, &r.gram)).collect();
    program.push_psd(&(-&inst.objective.c), &terms);
    DualEncoding {
        program,
        layout: inst.layout,
        epigraph: inst.objective.epigraph,
        origins: inst.rows.iter().map(|r| r.origin).collect(),
    }
}

/// Reads the constraint data of a PEP back out of its dual encoding.
pub fn decode_dual(enc: &DualEncoding, kind: CriterionKind) -> Result<PepInstance<f64>> {
    let p = &enc.program;
    p.validate()?;
    let m = enc.layout.dim();
    let nf = enc.layout.n_fvals();
    let n_rows = enc.origins.len();
    let n_eq = enc.n_equalities();
    let psd = enc.psd_start();
    if p.n_vars != n_rows || p.n_rows() != psd + svec_len(m) {
        return Err(Error::LayoutMismatch("encoding does not match the layout".into()));
    }
    let mut cols = vec![vec![0.0; p.n_rows()]; n_rows];
    for &(r, c, v) in &p.entries {
        cols[c][r] += v;
    }
    let mut rhs = vec![0.0; n_rows];
    for &(c, v) in &p.objective {
        rhs[c] += v;
    }
    let rows = enc
        .origins
        .iter()
        .enumerate()
        .map(|(k, &origin)| {
            let col = &cols[k];
            let gram = -smat(&col[psd..], m)?;
            Ok(ConstraintRow {
                origin,
                fcoef: DVector::from_column_slice(&col[..nf]),
                gram,
                t_coef: if enc.epigraph { col[nf] } else { 0.0 },
                rhs: rhs[k],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let objective = CriterionEncoding {
        kind,
        b: DVector::from_column_slice(&p.rhs[..nf]),
        c: -smat(&p.rhs[psd..], m)?,
        epigraph: enc.epigraph,
    };
    debug_assert!(n_eq <= psd);
    Ok(PepInstance { layout: enc.layout, objective, rows })
}

/// Multipliers of the dual PEP together with the primal Gram matrix read off the same solve.
#[derive(Clone, Debug, PartialEq)]
pub struct DualSolution {
    /// Certified bound `sum_r y_r rhs_r`.
    pub value: f64,
    pub multipliers: Vec<f64>,
    pub witness: PrimalWitness<f64>,
    pub conic: ConicSolution,
}

/// Solves the dual PEP. The primal `(F, G, t)` is recovered from the conic dual variables.
pub fn solve_dual(dual: &DualProgram<f64>, solver: &dyn ConicSolver, tol: f64) -> Result<DualSolution> {
    let enc = encode_dual(dual);
    let sol = solve_with_retry(solver, &enc.program, tol)?;
    let inst = &dual.instance;
    let nf = enc.layout.n_fvals();
    match sol.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => {
            let k = argmax_abs(&sol.z[..enc.n_equalities()]);
            let grows = if k < nf { format!("f_{k}") } else { "the epigraph variable".to_string() };
            return Err(Error::Unbounded(format!(
                "no certificate exists: the worst case is unbounded along a ray increasing {grows}"
            )));
        }
        SolveStatus::Unbounded => {
            let k = argmax_abs(&sol.x);
            return Err(Error::Infeasible(format!(
                "the performance estimation problem has no feasible point; the {} row drives the dual ray",
                enc.origins[k]
            )));
        }
        SolveStatus::NumericalFailure => {
            return Err(Error::Solver(format!("numerical failure after retry ({} iterations)", sol.iterations)));
        }
    }
    let y = sol.x.clone();
    let gram = smat(&sol.z[enc.psd_start()..], enc.layout.dim())?;
    let fvals = DVector::from_iterator(nf, sol.z[..nf].iter().map(|v| -v));
    let epigraph = enc.epigraph.then(|| -sol.z[nf]);
    let value = inst.dual_objective(&y);
    let primal = inst.primal_objective(&fvals, &gram, epigraph);
    Ok(DualSolution {
        value,
        multipliers: y,
        witness: PrimalWitness { gram, fvals, epigraph, value: primal },
        conic: sol,
    })
}

fn argmax_abs(v: &[f64]) -> usize {
    v.iter().enumerate().fold((0, -1.0), |(bk, bv), (k, &x)| if x.abs() > bv { (k, x.abs()) } else { (bk, bv) }).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::ClarabelSolver;
    use crate::pep::{assemble_dual, ProblemSpec, StepSchedule};

    #[test]
    fn one_step_gradient_descent() {
        let s = StepSchedule::memoryless(&[1.0]).unwrap();
        let dual = assemble_dual(&s, &ProblemSpec::smooth_convex_gap(1.0, 1.0)).unwrap();
        let sol = solve_dual(&dual, &ClarabelSolver::default(), 1e-8).unwrap();
        assert!((sol.value - 1.0 / 6.0).abs() < 1e-7, "{}", sol.value);
        assert!((sol.witness.value - 1.0 / 6.0).abs() < 1e-6);
        assert!(sol.multipliers.iter().all(|&y| y > -1e-9));
    }
}
