//! Staged subtree-insertion search for closed-form PDE solutions.
//!
//! An initial condition seeds an expression tree; each stage activates one
//! more independent variable and inserts small subtrees at existing nodes
//! until a candidate satisfies the governing equation identically and
//! reduces to the initial condition at `t = 0`. Acceptance always rests on
//! an exact canonical-form certificate, never on sampling.
//!
//! The algebra is generic over the coefficient field ([`Coefficient`]) and
//! numeric evaluation over the float type ([`Real`]); the aliases below fix
//! the exact-rational instantiation used by the search.

pub mod bench;
pub mod calculus;
pub mod canon;
pub mod expr;
pub mod gcd;
pub mod parse;
pub mod poly;
pub mod problem;
pub mod ratfun;
pub mod resolve;
pub mod scalar;
pub mod search;
pub mod simplify;
pub mod verify;

pub use num_rational::BigRational;

/// Exact constant type used throughout expressions.
pub type Rational = BigRational;
pub type RatPoly = poly::Poly<Rational>;
pub type RatFun = ratfun::RationalFunction<Rational>;
/// Canonical form of an expression.
pub type CanonicalForm = RatFun;

pub use bench::{run_bench, BenchReportRow, BenchStatus};
pub use calculus::{differentiate, residual, substitute_unknown};
pub use canon::{canonicalize, to_expr, CanonError};
pub use expr::{name, positions, structural_eq, BinaryOp, DerivAtom, EvalError, Expr, Name, PositionId, Step, UnaryOp};
pub use parse::{parse_expr, parse_expr_with, ParseContext, SyntaxError};
pub use problem::{export_solution, import_solution, parse_problem, PdeProblem, ProblemError, SolutionRecord};
pub use resolve::{resolve_parameters, ResolveLimits, Unresolvable};
pub use scalar::{Coefficient, Real};
pub use search::{
    assemble_pool, build_stage_terminals, enumerate_stage, expand, lift_constants, solve, CandidateSubtree,
    Orientation, SearchConfig, SearchFailure, StageFailure, StageState,
};
pub use simplify::{simplify, zero_certificate, ZeroVerdict};
pub use verify::{check_equivalence, verify_candidate, Equivalence, VerificationReport};
