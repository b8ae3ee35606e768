//! Laws as short programs, data as incompressible residue.
//!
//! This crate is a desk-scale workbench for algorithmic information theory:
//!
//! - [`recfun`]: a partial recursive function calculus (constants, successor,
//!   projections, composition, primitive recursion, minimization) with a
//!   step-budgeted evaluator.
//! - [`codec`]: a bit-exact, prefix-free encoding of closed terms, which
//!   turns every positive integer into a program for a fixed decompressor.
//! - [`complexity`]: time-bounded exponential Kolmogorov complexity, budgeted
//!   Kolmogorov order, incompressibility census, tower witnesses, and an LZ78
//!   upper bound for arbitrary bytes.
//! - [`apriori`]: exact dyadic enumeration of the a priori semimeasure.
//! - [`nbody`]: Newtonian N-body integration with conservation diagnostics
//!   and sensitivity probes.
//! - [`empiric`]: numeral frequency extraction and a multiple-comparisons
//!   null simulation.

pub mod apriori;
pub mod codec;
pub mod complexity;
pub mod empiric;
pub mod nat;
pub mod nbody;
pub mod recfun;
pub mod rng;

pub use nat::Nat;
