//! Moment-matrix relaxations: words, bases, moment and localizing matrices, and the
//! assembly of the fidelity-minimization problems.

mod basis;
mod monomial;
mod problem;
mod scenario;

pub use basis::{augment, build_basis, level1_basis, q1_basis, Level};
pub use monomial::{canonicalize, Gen, Monomial, Poly};
pub use problem::{
    assemble_bell_max, assemble_general_sdp, assemble_result1_sdp, bipartite_level_1ab,
    build_moment_matrix, chsh_poly, condition_poly, localizing_matrix, result1_ideal_table,
    result1_x_combination, result1_z_combination, statistics_constraints, tilted_chsh_poly,
    GeneralConfig, LinConstraint, LinExpr, LocalizingBasis, MomentIndex, MomentProblem,
    NoiseModel, PsdBlock, Result1Config, Statistic, StatisticsSet, XTILDE,
};
pub use scenario::{OperatorTable, Scenario};
