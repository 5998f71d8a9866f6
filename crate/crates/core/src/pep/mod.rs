//! Performance estimation problems for fixed-step first-order methods.
//!
//! A method `x_i = x_0 - sum_{k<i} alpha_{i,k} g_k / L` is analysed over
//! the index set `I = {0, ..., N, *}` by lifting all inner products of
//! iterates and gradients into a Gram matrix `G = P^T P`. The
//! interpolation inequalities of the function class then become linear
//! in `(F, G)` and the worst case is the optimal value of an SDP.

mod certificate;
mod constraints;
mod document;
mod instance;
mod layout;
mod schedule;
mod spec;

pub use certificate::{
    extract_worst_case, DualCertificate, PairMultiplier, PrimalWitness, Trajectory, TrajectoryPoint,
};
pub use constraints::{
    inexactness_constraint, interpolation_constraint, interpolation_derivative, CriterionEncoding,
    InterpolationRow,
};
pub use document::{CertificateDocument, ClassDocument, InitDocument, ScheduleDocument};
pub use instance::{
    assemble_dual, assemble_primal, param_direction, slack_affine_in_steps, slack_derivative,
    slack_param_derivatives, ConstraintRow, DualProgram, PepInstance, RowOrigin,
};
pub use layout::{grad_vector, h_vector, iterate_vector, u_vector, GramLayout, Point, Symbol};
pub use schedule::{ScheduleKind, StepSchedule};
pub use spec::{
    bound_scale, CriterionKind, FunctionClassSpec, InitKind, InitSpec, Oracle, ProblemSpec,
};
