//! Conic programming layer: cone programs, the dual PEP encoding, the
//! interior-point back end and solver-independent certificate checks.

mod dump;
mod encode;
mod program;
mod solver;
mod verify;

pub use dump::{from_text, to_text};
pub use encode::{decode_dual, encode_dual, solve_dual, DualEncoding, DualSolution};
pub use program::{smat, svec, svec_index, svec_len, ConeBlock, ConeKind, ConeProgram};
pub use solver::{
    solve_with_retry, ClarabelSolver, ConicSolution, ConicSolver, SolveStatus, CERTIFICATE_TOLERANCE,
    DEFAULT_TOLERANCE,
};
pub use verify::{verify_certificate, CertificateReport};
