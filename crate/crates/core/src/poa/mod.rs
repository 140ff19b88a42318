//! Principal observables: the Lipschitz polytope, its LP, the
//! convex-concave solver, and a brute-force vertex oracle for small spaces.

mod brute;
mod polytope;
mod solver;

pub use brute::{brute_force_po, BRUTE_FORCE_MAX_POINTS};
pub use polytope::{lp_maximize, ConstraintMode, LipschitzPolytope};
pub use solver::{
    sign_normalize, PoaSolver, PrincipalObservable, PrincipalObservableSet, RunTrace, SolveDiagnostics, SolverConfig,
};
