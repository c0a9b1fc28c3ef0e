//! Exact diagonalization: eigensolvers and static observables.

pub mod dense;
pub mod lanczos;
pub mod observables;

pub use dense::{dense_spectrum, dense_spectrum_with_limit, Spectrum, DEFAULT_DENSE_LIMIT};
pub use lanczos::{
    lanczos_ground_state, lanczos_ground_state_from, FnOperator, GroundStateResult,
    LanczosOptions, LinearOperator,
};
pub use observables::{
    densities, g2, g2_from_densities, photonic_fraction, von_neumann_entropy, CorrelationResult,
    Kept, Partition,
};

use crate::basis::FockBasis;
use crate::error::Result;
use crate::model::{build_ladder_hamiltonian, build_polariton_hamiltonian, ModelParams};

/// A solved sector: its basis together with the Lanczos ground state.
#[derive(Clone, Debug)]
pub struct ExactGroundState {
    pub basis: FockBasis,
    pub result: GroundStateResult,
}

impl ExactGroundState {
    pub fn energy(&self) -> f64 {
        self.result.energy
    }

    pub fn state(&self) -> &[f64] {
        &self.result.state
    }

    /// `E/N + Ω`, the energy per particle above the free lower polariton.
    pub fn blueshift_per_particle(&self, rabi: f64) -> f64 {
        blueshift_per_particle(self.result.energy, self.basis.particles(), rabi)
    }
}

pub fn blueshift_per_particle(energy: f64, particles: usize, rabi: f64) -> f64 {
    energy / particles as f64 + rabi
}

/// Ground state of the full ladder.
pub fn ladder_ground_state(params: &ModelParams, opts: &LanczosOptions) -> Result<ExactGroundState> {
    let basis = params.basis()?;
    let h = build_ladder_hamiltonian(params, &basis)?;
    let result = lanczos_ground_state(&h, opts)?;
    Ok(ExactGroundState { basis, result })
}

/// Ground state of the effective lower-polariton chain with repulsion `u_pol`.
pub fn polariton_ground_state(
    params: &ModelParams,
    u_pol: f64,
    cap: usize,
    opts: &LanczosOptions,
) -> Result<ExactGroundState> {
    let basis = FockBasis::chain(params.sites, params.particles, cap)?;
    let h = build_polariton_hamiltonian(params, u_pol, &basis)?;
    let result = lanczos_ground_state(&h, opts)?;
    Ok(ExactGroundState { basis, result })
}
