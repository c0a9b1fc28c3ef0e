//! Many-body simulation of the one-dimensional exciton-photon ladder.
//!
//! Each rung of the ladder holds a photon mode `a_j` and an exciton mode
//! `x_j`; photons hop between rungs, excitons repel on site, and the two
//! species are coupled by the Rabi term. The crate provides
//!
//! * [`basis`]: number-conserving Fock bases with closed-form ranking,
//! * [`model`]: sparse Hamiltonians of the ladder, the effective
//!   lower-polariton chain, and the few-body Born-Oppenheimer and Dicke blocks,
//! * [`analytic`]: limiting energies and the free-fermion particle-hole support,
//! * [`exact`]: Lanczos and dense eigensolvers plus static observables,
//! * [`mps`]: two-site DMRG on the rung-merged chain with `U(1)` block sparsity,
//! * [`spectra`]: dynamic structure factor and resonant photon response,
//! * [`io`]: CSV and JSON manifest output.

pub mod analytic;
pub mod basis;
pub mod error;
pub mod exact;
pub mod io;
pub mod model;
pub mod mps;
pub mod spectra;

pub use basis::{Caps, FockBasis, OccupationState};
pub use error::{Error, Result};
pub use model::{Boundary, ModelParams, Repulsion, SparseOperator};

/// Which ladder rail an observable refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    Photon,
    Exciton,
}

impl Species {
    /// Index of the species block in a ladder occupation vector.
    pub fn index(self) -> usize {
        match self {
            Species::Photon => 0,
            Species::Exciton => 1,
        }
    }
}

impl std::str::FromStr for Species {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "photon" | "ph" | "photonic" => Ok(Species::Photon),
            "exciton" | "x" | "excitonic" => Ok(Species::Exciton),
            other => Err(Error::InvalidParameter(format!("unknown species '{other}'"))),
        }
    }
}
