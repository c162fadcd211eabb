//! A workbench for continuous logic over finite metric structures.
//!
//! Formulas are evaluated either with real-valued `sup`/`inf` quantifiers
//! or with the primordial quantifier `Q`, whose value is the set of body
//! values in the hyperspace `K(X)`. The [`translate`] module compiles
//! compact-valued formulas into real-valued ones and [`oracle`] checks the
//! result by brute force.

// Errors carry the offending names, tuples and values.
#![allow(clippy::result_large_err)]

pub mod cli;
pub mod formula;
pub mod hyperspace;
pub mod io;
pub mod oracle;
pub mod rational;
pub mod semantics;
pub mod translate;
pub mod valuespace;
