//! Closed-form limits used as oracles for the numerics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of momenta sampled by [`lindhard_support`].
pub const LINDHARD_SAMPLES: usize = 20_001;

/// Fermi momentum `k_F = πN/L` of the fermionized gas, in lattice units.
pub fn fermi_momentum(particles: usize, sites: usize) -> f64 {
    PI * particles as f64 / sites as f64
}

/// Lattice dispersion `ε(k) = 2J(1 − cos k)` of a particle with hopping `J`.
pub fn lattice_dispersion(k: f64, hopping: f64) -> f64 {
    2.0 * hopping * (1.0 - k.cos())
}

/// Filled Fermi sea energy of `N` fermionized polaritons on a ring of `L` sites.
///
/// Odd `N = 2M+1` fills `m = −M..=M`; even `N` has a twofold degenerate sea
/// and this returns the choice `m = −N/2+1..=N/2`.
pub fn tg_energy_discrete(particles: usize, sites: usize, j_pol: f64, rabi: f64) -> Result<f64> {
    if particles > sites {
        return Err(Error::Range(format!(
            "N = {particles} hard-core particles exceed L = {sites} sites"
        )));
    }
    let n = particles as i64;
    let (lo, hi) = if n % 2 == 1 { (-(n / 2), n / 2) } else { (-n / 2 + 1, n / 2) };
    let kinetic: f64 = (lo..=hi)
        .map(|m| 2.0 - 2.0 * (2.0 * PI * m as f64 / sites as f64).cos())
        .sum();
    Ok(-(particles as f64) * rabi + j_pol * kinetic)
}

/// Continuum Tonks-Girardeau energy per particle, `−Ω + k_F²/(6 m_pol)` with
/// `k_F = πρ/ℓ` and `1/m_pol = 2ℓ²J_pol`.
pub fn tg_energy_continuum(rho: f64, spacing: f64, j_pol: f64, rabi: f64) -> f64 {
    let k_f = PI * rho / spacing;
    let inverse_mass = 2.0 * spacing * spacing * j_pol;
    -rabi + k_f * k_f * inverse_mass / 6.0
}

/// Leading Tavis-Cummings blueshift per particle, `(Ω/4)ρ`.
pub fn tc_energy_small_rho(rho: f64, rabi: f64) -> f64 {
    0.25 * rabi * rho
}

/// Mean-field energy `−ΩN + (U_pol/2) N(N−1)/L` of a polariton quasi-condensate.
pub fn bogoliubov_energy(particles: usize, sites: usize, u_pol: f64, rabi: f64) -> f64 {
    let n = particles as f64;
    -rabi * n + 0.5 * u_pol * n * (n - 1.0) / sites as f64
}

/// Hopping `J* = 3Ω/(2π³ρ²)` where the Tonks-Girardeau and Tavis-Cummings
/// blueshifts cross.
pub fn crossover_coupling(rho: f64, rabi: f64) -> f64 {
    3.0 * rabi / (2.0 * PI.powi(3) * rho * rho)
}

/// Energy window of free-fermion particle-hole excitations at momentum `q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LindhardBand {
    pub q: f64,
    pub omega_lower: f64,
    pub omega_upper: f64,
}

impl LindhardBand {
    pub fn contains(&self, omega: f64, margin: f64) -> bool {
        omega >= self.omega_lower - margin && omega <= self.omega_upper + margin
    }
}

/// Extremes of `ε(k+q) − ε(k)` over occupied `|k| ≤ k_F` with `k+q` empty,
/// for the lattice dispersion with hopping `J_pol`.
///
/// For `q ∈ [0, π]` and `k_F ≤ π/2` the contributing holes are exactly
/// `k ∈ [max(−k_F, k_F − q), k_F]`; that interval is sampled densely and
/// searched by brute force.
pub fn lindhard_support(q: f64, k_fermi: f64, j_pol: f64) -> LindhardBand {
    let lo = (-k_fermi).max(k_fermi - q);
    let hi = k_fermi;
    let mut omega_lower = f64::INFINITY;
    let mut omega_upper = f64::NEG_INFINITY;
    let n = LINDHARD_SAMPLES;
    for i in 0..n {
        let k = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let de = lattice_dispersion(k + q, j_pol) - lattice_dispersion(k, j_pol);
        omega_lower = omega_lower.min(de);
        omega_upper = omega_upper.max(de);
    }
    LindhardBand {
        q,
        omega_lower: omega_lower.max(0.0),
        omega_upper: omega_upper.max(0.0),
    }
}
