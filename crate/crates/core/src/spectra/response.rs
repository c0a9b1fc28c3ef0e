//! Photon Green's function `−Im χ(q, ω)` from the `N ± 1` sectors.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_grids, lorentzian, SpectralChannel, SpectralGrid, SpectralManifest};
use crate::basis::FockBasis;
use crate::error::{Error, Result};
use crate::exact::{dense_spectrum, lanczos_ground_state, LanczosOptions};
use crate::model::{build_ladder_hamiltonian, ModelParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponsePart {
    /// Absorption minus emission.
    Full,
    Absorption,
    Photoluminescence,
}

/// Pole `ω` and residues per momentum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Pole {
    pub omega: f64,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResponsePoles {
    pub q_values: Vec<f64>,
    pub ground_energy: f64,
    /// `E^{N+1}_m − E₀` with `|⟨m|a_q†|0⟩|²`.
    pub absorption: Vec<Pole>,
    /// `E₀ − E^{N−1}_m` with `|⟨m|a_q|0⟩|²`.
    pub emission: Vec<Pole>,
    pub degenerate_ground_state: bool,
}

/// `1/√L` in `a_q = (1/√L) Σ_j e^{−iqj} a_j`.
pub fn mode_normalization(sites: usize) -> f64 {
    1.0 / (sites as f64).sqrt()
}

/// `a_j† |ψ⟩` (or `a_j |ψ⟩`) expressed in `target`, one column per site.
fn photon_columns(state: &[f64], from: &FockBasis, target: &FockBasis, raise: bool) -> DMatrix<f64> {
    let l = from.sites();
    let cap = from.caps().photon as u8;
    let mut out = DMatrix::zeros(target.dim(), l);
    let mut occ = vec![0u8; from.modes()];
    for (i, c) in state.iter().enumerate() {
        if *c == 0.0 {
            continue;
        }
        occ.copy_from_slice(from.occupations(i));
        for j in 0..l {
            let n = occ[j];
            let amp = if raise {
                if n >= cap {
                    continue;
                }
                occ[j] = n + 1;
                ((n + 1) as f64).sqrt()
            } else {
                if n == 0 {
                    continue;
                }
                occ[j] = n - 1;
                (n as f64).sqrt()
            };
            out[(target.rank_unchecked(&occ), j)] += amp * c;
            occ[j] = n;
        }
    }
    out
}

fn sector_poles(
    params: &ModelParams,
    particles: usize,
    state: &[f64],
    basis: &FockBasis,
    e0: f64,
    q_grid: &[f64],
    raise: bool,
) -> Result<Vec<Pole>> {
    let p = params.clone().with_particles(particles);
    let target = match p.basis() {
        Ok(b) => b,
        Err(Error::Capacity(_)) => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let spec = dense_spectrum(&build_ladder_hamiltonian(&p, &target)?)?;
    let cols = photon_columns(state, basis, &target, raise);
    let overlaps = spec.vectors.tr_mul(&cols);
    let l = basis.sites();
    let norm = mode_normalization(l);
    // a_q† carries e^{+iqj}, a_q carries e^{−iqj}
    let sign = if raise { 1.0 } else { -1.0 };
    let phases: Vec<Vec<Complex64>> = q_grid
        .iter()
        .map(|&q| (0..l).map(|j| Complex64::from_polar(norm, sign * q * j as f64)).collect())
        .collect();
    Ok((0..target.dim())
        .filter_map(|m| {
            let row = overlaps.row(m);
            let weights: Vec<f64> = phases
                .iter()
                .map(|ph| ph.iter().enumerate().map(|(j, p)| p * row[j]).sum::<Complex64>().norm_sqr())
                .collect();
            let de = spec.values[m] - e0;
            let omega = if raise { de } else { -de };
            weights.iter().any(|&w| w > 1e-16).then_some(Pole { omega, weights })
        })
        .collect())
}

/// Poles and residues of the photon propagator at each momentum.
pub fn response_poles(params: &ModelParams, q_grid: &[f64]) -> Result<ResponsePoles> {
    let basis = params.basis()?;
    let h = build_ladder_hamiltonian(params, &basis)?;
    let gs = lanczos_ground_state(
        &h,
        &LanczosOptions { tol: 1e-11, check_degeneracy: true, ..LanczosOptions::default() },
    )?;
    let n = params.particles;
    let absorption = sector_poles(params, n + 1, &gs.state, &basis, gs.energy, q_grid, true)?;
    let emission = if n == 0 {
        Vec::new()
    } else {
        sector_poles(params, n - 1, &gs.state, &basis, gs.energy, q_grid, false)?
    };
    Ok(ResponsePoles {
        q_values: q_grid.to_vec(),
        ground_energy: gs.energy,
        absorption,
        emission,
        degenerate_ground_state: gs.degenerate,
    })
}

/// `−Im χ(q, ω)` broadened by normalized Lorentzians of width `gamma`.
pub fn response_chi(
    params: &ModelParams,
    q_grid: &[f64],
    omega_grid: &[f64],
    gamma: f64,
    part: ResponsePart,
) -> Result<SpectralGrid> {
    check_grids(q_grid, omega_grid, gamma)?;
    let poles = response_poles(params, q_grid)?;
    let (abs_sign, pl_sign) = match part {
        ResponsePart::Full => (1.0, -1.0),
        ResponsePart::Absorption => (1.0, 0.0),
        ResponsePart::Photoluminescence => (0.0, 1.0),
    };
    let weights = (0..q_grid.len())
        .map(|iq| {
            omega_grid
                .iter()
                .map(|&w| {
                    let a: f64 = poles
                        .absorption
                        .iter()
                        .map(|p| p.weights[iq] * lorentzian(w - p.omega, gamma))
                        .sum();
                    let e: f64 = poles
                        .emission
                        .iter()
                        .map(|p| p.weights[iq] * lorentzian(w - p.omega, gamma))
                        .sum();
                    abs_sign * a + pl_sign * e
                })
                .collect()
        })
        .collect();
    Ok(SpectralGrid {
        q_values: q_grid.to_vec(),
        omega_values: omega_grid.to_vec(),
        weights,
        channel: match part {
            ResponsePart::Full => SpectralChannel::Response,
            ResponsePart::Absorption => SpectralChannel::Absorption,
            ResponsePart::Photoluminescence => SpectralChannel::Photoluminescence,
        },
        broadening: gamma,
        manifest: SpectralManifest {
            params: params.clone(),
            method: "lehmann".into(),
            reference_site: None,
            mode_normalization: Some(mode_normalization(params.sites)),
            horizon: None,
            time_step: None,
            degenerate_ground_state: poles.degenerate_ground_state,
        },
        sum_rule: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Caps;
    use crate::model::Boundary;
    use crate::spectra::{find_peaks, momentum_grid, omega_grid, trapezoid};

    #[test]
    fn vacuum_poles_are_the_polariton_bands() {
        let l = 6;
        let (j, omega) = (0.3, 1.0);
        let p = ModelParams::new(l, 0)
            .with_hopping(j)
            .with_boundary(Boundary::Periodic)
            .with_caps(Caps::new(1, 1));
        let q = momentum_grid(l, Boundary::Periodic);
        let poles = response_poles(&p, &q).unwrap();
        assert!(poles.emission.is_empty());
        for (iq, &k) in q.iter().enumerate() {
            let eps = 2.0 * j * (1.0 - k.cos());
            let lower = 0.5 * eps - (0.25 * eps * eps + omega * omega).sqrt();
            let upper = 0.5 * eps + (0.25 * eps * eps + omega * omega).sqrt();
            let found: Vec<&Pole> = poles.absorption.iter().filter(|p| p.weights[iq] > 1e-8).collect();
            assert!(found.iter().all(|p| (p.omega - lower).abs() < 1e-10 || (p.omega - upper).abs() < 1e-10));
            let w: f64 = found.iter().map(|p| p.weights[iq]).sum();
            assert!((w - 1.0).abs() < 1e-10);
            let w_lower: f64 = found.iter().filter(|p| (p.omega - lower).abs() < 1e-10).map(|p| p.weights[iq]).sum();
            // lower-polariton Hopfield weight
            let expect = 0.5 * (1.0 - eps / (eps * eps + 4.0 * omega * omega).sqrt());
            assert!((w_lower - expect).abs() < 1e-10, "{w_lower} vs {expect}");
        }
    }

    #[test]
    fn parts_combine_and_emission_is_below_absorption() {
        let p = ModelParams::new(4, 2)
            .with_hopping(0.1)
            .with_boundary(Boundary::Periodic)
            .with_caps(Caps::new(2, 2));
        let q = momentum_grid(4, Boundary::Periodic);
        let w = omega_grid(-3.0, 3.0, 0.01).unwrap();
        let full = response_chi(&p, &q, &w, 0.05, ResponsePart::Full).unwrap();
        let abs = response_chi(&p, &q, &w, 0.05, ResponsePart::Absorption).unwrap();
        let pl = response_chi(&p, &q, &w, 0.05, ResponsePart::Photoluminescence).unwrap();
        assert!(abs.min_weight() >= 0.0 && pl.min_weight() >= 0.0);
        for iq in 0..q.len() {
            for iw in 0..w.len() {
                let d = full.weights[iq][iw] - abs.weights[iq][iw] + pl.weights[iq][iw];
                assert!(d.abs() < 1e-12);
            }
        }
        // at q = 0 the ground state is uniform, so ⟨a_0† a_0⟩ = L ρ_ph / L
        let poles = response_poles(&p, &q).unwrap();
        let emitted: f64 = poles.emission.iter().map(|p| p.weights[0]).sum();
        assert!(emitted > 0.0 && emitted <= 2.0);
        let pa = find_peaks(&abs.weights[0], 0.05);
        let pe = find_peaks(&pl.weights[0], 0.05);
        assert!(w[pe[0]] < w[pa[0]]);
        assert!(trapezoid(&w, &pl.weights[0]) > 0.0);
    }
}
