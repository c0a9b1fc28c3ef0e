//! Matrix-product states on the rung-merged chain and two-site DMRG.
//!
//! Each ladder rung (photon ⊗ exciton) is one site of local dimension
//! `(cap_photon + 1)(cap_exciton + 1)`, so all couplings are on-site or
//! nearest-neighbour.

pub mod checkpoint;
pub mod dmrg;
pub mod measure;
pub mod mpo;
pub mod site;
pub mod state;

pub use checkpoint::{load_checkpoint, params_hash, save_checkpoint};
pub use dmrg::{dmrg_ground_state, run_dmrg, DmrgOptions, DmrgResult, SweepRecord, TruncationReport, DEFAULT_PENALTY};
pub use measure::{
    mps_bond_entropy, mps_densities, mps_expectation, mps_measure_g2, mps_photonic_fraction,
    mps_total_number,
};
pub use mpo::Mpo;
pub use site::RungSpace;
pub use state::{Bond, MpsState};
