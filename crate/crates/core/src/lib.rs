//! Randomized robust combinatorial optimization.
//!
//! Given objectives `f_1, ..., f_n` over an independence system `I`, find a
//! probability distribution `p` over `I` maximizing the worst-case expected
//! value `min_k sum_X p_X f_k(X)`.
//!
//! Two solution schemes are provided:
//!
//! - [`lpscheme`]: a cutting-plane LP over the independence system polytope
//!   followed by a decomposition of the fractional optimum into a mixed
//!   strategy. Exact for linear objectives whenever the polytope can be
//!   separated.
//! - [`mwu`]: multiplicative weights over the scenarios, driven by an
//!   approximate best-response [`subroutines`] oracle and the width-reducing
//!   transformations of [`reductions`].
//!
//! The [`exact`] module solves small instances by enumeration and is used
//! throughout the test suite as ground truth.
//!
//! ```
//! use robopt::{exact, GroundSet, IndependenceSystem, Objective, ProblemInstance};
//!
//! let ground = GroundSet::new(["a", "b"]).unwrap();
//! let objectives = vec![
//!     Objective::linear(vec![1.0, 0.0]).unwrap(),
//!     Objective::linear(vec![0.0, 1.0]).unwrap(),
//! ];
//! let system = IndependenceSystem::uniform(2, 1).unwrap();
//! let inst = ProblemInstance::new(ground, objectives, system).unwrap();
//!
//! let game = exact::exact_game_solve(&inst).unwrap();
//! assert!((game.value - 0.5).abs() < 1e-9);
//! assert_eq!(exact::deterministic_max_min(&inst).unwrap().1, 0.0);
//! ```

pub mod error;
pub mod exact;
pub mod instance;
pub mod lpscheme;
pub mod lpsolver;
pub mod mwu;
pub mod reductions;
pub mod schema;
pub mod subroutines;
pub mod systems;

pub use error::{Error, Result};
pub use instance::{
    scenario_value, worst_case_value, ElementSet, GroundSet, MixedStrategy, Objective, ProblemInstance, TOLERANCE,
};
pub use systems::IndependenceSystem;
