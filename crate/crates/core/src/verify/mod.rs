//! Manufactured solutions, error measures, refinement studies and oracles.

pub mod errors;
pub mod manufactured;
pub mod oracle;
pub mod study;

pub use errors::{energy_error, l2_error, projection_error, sample_solution, weak_laplacian_error, SamplePoint};
pub use manufactured::{
    solution_linear, solution_quadratic, solution_s2, solution_s3, solution_s5, ManufacturedSolution, Polynomial2,
};
pub use oracle::{oracle_suite, OracleEntry, OracleOptions, OracleReport};
pub use study::{convergence_study, observed_rate, solve_level, ErrorReport, Gamma2, MeshSource, StudyConfig};
