//! Mean-field and stochastic dynamics of two-level ensembles coupled to
//! radiation modes, with entropy bookkeeping and detailed-balance checks.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod balance;
pub mod integrator;
pub mod models;
pub mod params;
pub mod state;
pub mod stochastic;
pub mod thermo;
