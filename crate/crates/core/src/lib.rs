//! Bound states and resonant tunneling in chains of asymmetric square double
//! wells.
//!
//! The crate solves the exact matching equations of a double square well
//! between infinite walls, finds near-degenerate level doublets, turns their
//! splittings into Rabi tunneling times, and chains four wells into an
//! electron-transfer cascade. A finite-difference eigensolver provides an
//! independent check of every level.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cascade;
pub mod cli;
pub mod dynamics;
pub mod eigensolver;
pub mod error;
pub mod oracle;
pub mod potential;
pub mod quantities;
pub mod transcendental;
pub mod wavefunctions;

pub use error::{Error, Result};
