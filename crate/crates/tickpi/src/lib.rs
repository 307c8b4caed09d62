//! A workbench for a pi-calculus with an explicit `tick` cost instruction.
//!
//! The crate has two halves:
//!
//! * an executable semantics (`syntax`, `sem`) that runs processes and
//!   measures their **span** (parallel time: all available communications
//!   fire before the clock advances) or **work** (total number of ticks,
//!   independent of scheduling), and
//! * three type systems (`iotypes`, `spantypes`, `worktypes`) that verify
//!   declared complexity bounds statically, on top of an arithmetic
//!   entailment engine for size indices (`index`).
//!
//! `program` ties both halves together for whole program files, and the
//! `tickpi` binary exposes them on the command line. Start with the
//! `examples/` directory for guided tours of each capability.

pub mod index;
pub mod iotypes;
pub mod parse;
pub mod pretty;
pub mod program;
pub mod sem;
pub mod spantypes;
pub mod syntax;
pub mod worktypes;
