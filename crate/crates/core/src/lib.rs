//! Fair division of indivisible chores, doubly monotone items and mixed
//! (bad) cake instances.
//!
//! All values are exact rationals. The main entry points are:
//!
//! * [`indivisible`]: naive and top-trading envy-cycle elimination, the
//!   two-phase doubly monotone EF1 algorithm, round-robin and the
//!   component-wise matching algorithm.
//! * [`mixed`]: EFM allocation of doubly monotone items with bad cake, the
//!   source-addable cake phase, and the chores + cake special cases.
//! * [`hardness`]: the set-splitting reduction and brute-force oracles.
//! * [`check`]: EF / EF1 / EFM checkers producing auditable certificates.

pub mod cake;
pub mod check;
pub mod error;
pub mod generate;
pub mod graph;
pub mod hardness;
pub mod indivisible;
pub mod instance;
pub mod matching;
pub mod mixed;
pub mod rational;
pub mod trace;
pub mod valuation;

pub use cake::{CakePiece, DivisibleKind, Interval, PiecewiseConstantDensity};
pub use check::{check_ef, check_ef1, check_efm, FairnessCertificate, Notion, PairStatus, Violation};
pub use error::{Error, Result};
pub use graph::{EdgeKind, EnvyGraph, GraphVariant};
pub use instance::{Allocation, Bundle, IndivisibleInstance, ItemPartition, MixedAllocation, MixedInstance};
pub use rational::Rational;
pub use trace::{RunTrace, TraceEvent};
pub use valuation::{ItemKind, Valuation};
