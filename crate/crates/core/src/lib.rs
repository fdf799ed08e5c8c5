//! Stackelberg solver for choosing a mixed strategy over encryption algorithms
//! against a budget-limited attacker.

pub mod attacker;
pub mod baselines;
pub mod defender;
pub mod lp;
pub mod model;
pub mod report;
pub mod robust;
pub mod scenario;
