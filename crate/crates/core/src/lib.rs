//! Exact simulation of noisy partitioned quantum cellular automata on the
//! single-excitation sector of a 1-d qubit lattice.

pub mod automaton;
pub mod classical_oracle;
pub mod error;
pub mod experiments;
pub mod measurement;
pub mod qchannel;
pub mod sector_state;
pub mod selfcheck;
