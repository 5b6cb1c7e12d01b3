//! Quantum operations in Kraus and Choi–Jamiolkowski form, and decisions on
//! whether two operations can occur as outcomes of a single instrument.
//!
//! The modules build on each other bottom-up:
//!
//! * [`linalg`]: dense complex matrices, Jacobi eigensolver, PSD tools,
//!   tensor products and partial traces.
//! * [`model`]: effects, states, operations and instruments.
//! * [`solver`]: cyclic Dykstra projections for PSD-order feasibility.
//! * [`engine`]: trivial and closed-form coexistence tests, the general
//!   feasibility reduction and witness instruments.
//! * [`oracle`]: independent exact deciders for commuting instances.
//! * [`random`]: samplers for random states, effects, unitaries, operations.
//!
//! ```
//! use coexist::{operations_coexistent, CMatrix, Effect, Operation, SolverSettings, Strategy, Verdict};
//!
//! # fn main() -> coexist::Result<()> {
//! let plus = Effect::new(CMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5])?)?;
//! let lp = Operation::luders(&plus)?;
//! let id = Operation::identity(2);
//! let dec = operations_coexistent(&lp, &id, Strategy::Auto, &SolverSettings::default())?;
//! assert_eq!(dec.verdict, Verdict::Infeasible);
//!
//! let half = id.scale(0.5)?;
//! let dec = operations_coexistent(&id, &half, Strategy::SolverOnly, &SolverSettings::default())?;
//! let witness = dec.witness.expect("feasible decisions carry a witness");
//! assert!(witness.normalization_residual() < 1e-6);
//! # Ok(())
//! # }
//! ```

pub mod engine;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod random;
pub mod solver;

pub use engine::{
    build_witness, effects_coexistent, is_difference_operation, is_sum_operation,
    luders_closed_form, luders_coexistent, operations_coexistent, pure_coexistent,
    trivially_coexistent, unitary_coexistent, CoexistenceDecision, Evidence, Method, Strategy,
    Verdict,
};
pub use error::{Error, Result};
pub use linalg::{is_psd, psd_part, sqrt_psd, CMatrix, HermEig};
pub use model::{Application, DensityState, Effect, Instrument, Operation};
pub use solver::{solve_feasibility, FeasibilityOutcome, FeasibilitySpec, SolverSettings};

pub use num_complex::Complex64;

/// Default tolerance for validity checks (PSD, effect bounds, trace bound),
/// relative to `max(1, ‖M‖_F)`.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Eigenvalues of a Choi operator at or below this count as zero when
/// computing Kraus ranks and decompositions.
pub const RANK_TOL: f64 = 1e-9;

/// Below this outcome probability no conditional state is reported.
pub const PROB_FLOOR: f64 = 1e-12;
