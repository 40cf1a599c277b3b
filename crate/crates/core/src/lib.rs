//! Inversive generator over Z_{p^e} for an odd prime p: closed-form
//! functional-graph structure and an exhaustive cross-checking enumerator.
//!
//! The map sends a unit x to a*x^{-1} + b and every non-unit to b. Its
//! functional graph on Z_{p^e} decomposes into cycles, cycles with uniform
//! tails, and (for a in the maximal ideal) a single convergent tree; which
//! of these occur, their lengths and their counts all follow from the roots
//! of t^2 - b*t - a. [`analytic`] evaluates those closed forms without
//! stepping the generator, [`enumerator`] rebuilds the same graph by brute
//! force, and [`verify`] confronts the two state by state.

pub mod analytic;
pub mod enumerator;
pub mod error;
pub mod ext;
pub mod iprng;
pub mod ring;
pub mod verify;

pub use analytic::{
    classify, predict_period, predict_period_for, predict_structure, predict_structure_for,
    tree_depth_profile, tree_depth_profile_for, CaseAnalysis, CaseLabel, ComponentSpec,
    GraphStructure, StructurePrediction,
};
pub use enumerator::{build_graph, ExactStructure, FunctionalGraph, DEFAULT_BUDGET};
pub use error::Error;
pub use ext::{is_basic_irreducible, root_ratio_order, roots_of_char_poly, QuadExt, RootsResult};
pub use iprng::{Params, PeriodInfo};
pub use ring::{factorize, is_prime, Factorization, Modulus, RingElem};
pub use verify::{grid_scan, verify, GridFailure, GridOutcome, PeriodMismatch, VerifyReport};
