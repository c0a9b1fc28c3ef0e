//! `S(q, ω)`: the one-sided transform of `Σ_j e^{−iq(j−j0)} ⟨δn_j(t) δn_{j0}(0)⟩`
//! with `e^{−Γt/2}` damping, as a real part.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::krylov::{PropagationOptions, Propagator};
use super::{check_grids, SpectralChannel, SpectralGrid, SpectralManifest};
use crate::basis::FockBasis;
use crate::error::{Error, Result};
use crate::exact::{dense_spectrum, lanczos_ground_state, LanczosOptions};
use crate::model::{build_ladder_hamiltonian, ModelParams};
use crate::Species;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Sum over all eigenstates of the dense Hamiltonian.
    Lehmann,
    /// Real-time propagation to `horizon` with samples every `time_step`.
    Krylov { horizon: f64, time_step: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SumRuleEntry {
    pub q: f64,
    /// `∫ S(q, ω) dω` over the grid.
    pub integral: f64,
    /// `Σ_j cos(q(j − j0)) ⟨δn_j δn_{j0}⟩`.
    pub equal_time: f64,
}

impl SumRuleEntry {
    pub fn ratio(&self) -> f64 {
        self.integral / self.equal_time
    }
}

fn species_offset(kind: Species, sites: usize) -> usize {
    kind.index() * sites
}

/// `δn_j |ψ⟩` for every site.
fn fluctuations(state: &[f64], basis: &FockBasis, kind: Species) -> Vec<Vec<f64>> {
    let l = basis.sites();
    let off = species_offset(kind, l);
    let mut mean = vec![0.0; l];
    for (c, occ) in state.iter().zip(basis.iter()) {
        for j in 0..l {
            mean[j] += c * c * occ[off + j] as f64;
        }
    }
    (0..l)
        .map(|j| {
            state
                .iter()
                .zip(basis.iter())
                .map(|(c, occ)| c * (occ[off + j] as f64 - mean[j]))
                .collect()
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `Σ_j cos(q(j − j0)) ⟨ψ|δn_j δn_{j0}|ψ⟩` for each `q`.
pub fn equal_time_correlator(
    state: &[f64],
    basis: &FockBasis,
    kind: Species,
    q_grid: &[f64],
    j0: usize,
) -> Result<Vec<f64>> {
    if basis.species() != 2 || state.len() != basis.dim() {
        return Err(Error::Mismatch("equal-time correlator needs a ladder state".into()));
    }
    if j0 >= basis.sites() {
        return Err(Error::Range(format!("reference site {j0} outside 0..{}", basis.sites())));
    }
    let dn = fluctuations(state, basis, kind);
    let c: Vec<f64> = dn.iter().map(|v| dot(v, &dn[j0])).collect();
    Ok(q_grid
        .iter()
        .map(|&q| {
            c.iter()
                .enumerate()
                .map(|(j, cj)| (q * (j as f64 - j0 as f64)).cos() * cj)
                .sum()
        })
        .collect())
}

fn phases(q: f64, sites: usize, j0: usize) -> Vec<Complex64> {
    (0..sites)
        .map(|j| Complex64::from_polar(1.0, -q * (j as f64 - j0 as f64)))
        .collect()
}

/// Dynamic structure factor of one species.
pub fn structure_factor(
    params: &ModelParams,
    channel: Species,
    q_grid: &[f64],
    omega_grid: &[f64],
    gamma: f64,
    method: Method,
    j0: Option<usize>,
) -> Result<SpectralGrid> {
    check_grids(q_grid, omega_grid, gamma)?;
    let l = params.sites;
    let j0 = j0.unwrap_or(l / 2);
    if j0 >= l {
        return Err(Error::Range(format!("reference site {j0} outside 0..{l}")));
    }
    let basis = params.basis()?;
    let h = build_ladder_hamiltonian(params, &basis)?;
    let half = 0.5 * gamma;
    let pi = std::f64::consts::PI;

    let (weights, ground, degenerate, horizon, time_step) = match method {
        Method::Lehmann => {
            let spec = dense_spectrum(&h)?;
            let ground = spec.vector(0);
            let e0 = spec.values[0];
            let degenerate = spec.values.len() > 1 && spec.values[1] - e0 < 1e-8;
            let dn = fluctuations(&ground, &basis, channel);
            let d = DMatrix::from_fn(basis.dim(), l, |i, j| dn[j][i]);
            let overlaps = spec.vectors.tr_mul(&d);
            let mut weights: Vec<Vec<f64>> = Vec::with_capacity(q_grid.len());
            for &q in q_grid {
                let ph = phases(q, l, j0);
                let poles: Vec<(f64, Complex64)> = (0..basis.dim())
                    .filter_map(|n| {
                        let r = overlaps.row(n);
                        let c: Complex64 = (0..l).map(|j| ph[j] * r[j] * r[j0]).sum();
                        (c.norm() > 1e-15).then(|| (spec.values[n] - e0, c))
                    })
                    .collect();
                weights.push(
                    omega_grid
                        .iter()
                        .map(|&w| {
                            poles
                                .iter()
                                .map(|&(wn, c)| {
                                    let delta = w - wn;
                                    (c.re * half - c.im * delta) / (pi * (delta * delta + half * half))
                                })
                                .sum()
                        })
                        .collect(),
                );
            }
            (weights, ground, degenerate, None, None)
        }
        Method::Krylov { horizon, time_step } => {
            if !(time_step > 0.0) || !(horizon > 0.0) {
                return Err(Error::InvalidParameter("Krylov horizon and step must be > 0".into()));
            }
            let gs = lanczos_ground_state(
                &h,
                &LanczosOptions { tol: 1e-11, check_degeneracy: true, ..LanczosOptions::default() },
            )?;
            let dn = fluctuations(&gs.state, &basis, channel);
            let steps = (horizon / time_step).round() as usize;
            let mut phi: Vec<Complex64> = dn[j0].iter().map(|&x| Complex64::new(x, 0.0)).collect();
            let mut prop = Propagator::new(&h, gs.energy, PropagationOptions::default());
            // C[k][j] = ⟨δn_j 0| e^{−i(H−E0) t_k} δn_{j0} 0⟩
            let mut corr: Vec<Vec<Complex64>> = Vec::with_capacity(steps + 1);
            for k in 0..=steps {
                if k > 0 {
                    prop.step(&mut phi, time_step)?;
                }
                corr.push(
                    dn.iter()
                        .map(|v| v.iter().zip(&phi).map(|(a, b)| b * a).sum())
                        .collect(),
                );
            }
            let mut weights = Vec::with_capacity(q_grid.len());
            for &q in q_grid {
                let ph = phases(q, l, j0);
                let f: Vec<Complex64> = corr
                    .iter()
                    .enumerate()
                    .map(|(k, row)| {
                        let t = k as f64 * time_step;
                        let trap = if k == 0 || k == steps { 0.5 } else { 1.0 };
                        let s: Complex64 = row.iter().zip(&ph).map(|(c, p)| c * p).sum();
                        s * (trap * time_step * (-half * t).exp())
                    })
                    .collect();
                weights.push(
                    omega_grid
                        .iter()
                        .map(|&w| {
                            let rot = Complex64::from_polar(1.0, w * time_step);
                            let mut e = Complex64::new(1.0, 0.0);
                            let mut acc = Complex64::new(0.0, 0.0);
                            for fk in &f {
                                acc += fk * e;
                                e *= rot;
                            }
                            acc.re / pi
                        })
                        .collect(),
                );
            }
            (weights, gs.state, gs.degenerate, Some(horizon), Some(time_step))
        }
    };

    let mut weights = weights;
    for (iq, &q) in q_grid.iter().enumerate() {
        if q.abs() < 1e-12 {
            weights[iq].iter_mut().for_each(|w| *w = 0.0);
        }
    }
    let equal_time = equal_time_correlator(&ground, &basis, channel, q_grid, j0)?;
    let mut grid = SpectralGrid {
        q_values: q_grid.to_vec(),
        omega_values: omega_grid.to_vec(),
        weights,
        channel: match channel {
            Species::Photon => SpectralChannel::Photon,
            Species::Exciton => SpectralChannel::Exciton,
        },
        broadening: gamma,
        manifest: SpectralManifest {
            params: params.clone(),
            method: match method {
                Method::Lehmann => "lehmann".into(),
                Method::Krylov { .. } => "krylov".into(),
            },
            reference_site: Some(j0),
            mode_normalization: None,
            horizon,
            time_step,
            degenerate_ground_state: degenerate,
        },
        sum_rule: Vec::new(),
    };
    grid.sum_rule = q_grid
        .iter()
        .enumerate()
        .filter(|(_, q)| q.abs() >= 1e-12)
        .map(|(iq, &q)| SumRuleEntry {
            q,
            integral: grid.frequency_integral(iq),
            equal_time: equal_time[iq],
        })
        .collect();
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Caps;
    use crate::model::Boundary;
    use crate::spectra::{momentum_grid, omega_grid};

    fn ring() -> ModelParams {
        ModelParams::new(6, 2)
            .with_hopping(0.2)
            .with_boundary(Boundary::Periodic)
            .with_caps(Caps::new(2, 2))
    }

    #[test]
    fn lehmann_is_nonnegative_and_obeys_sum_rule() {
        let p = ring();
        let q = momentum_grid(6, Boundary::Periodic);
        let w = omega_grid(-3.0, 6.0, 0.002).unwrap();
        let g = structure_factor(&p, Species::Photon, &q, &w, 0.04, Method::Lehmann, None).unwrap();
        assert!(g.min_weight() > -1e-10);
        assert!(g.weights[0].iter().all(|&x| x == 0.0));
        for e in &g.sum_rule {
            assert!((e.ratio() - 1.0).abs() < 0.02, "{e:?}");
        }
    }

    #[test]
    fn krylov_matches_lehmann() {
        let p = ring();
        let q = momentum_grid(6, Boundary::Periodic);
        let w = omega_grid(-1.0, 3.0, 0.01).unwrap();
        let a = structure_factor(&p, Species::Exciton, &q, &w, 0.2, Method::Lehmann, Some(2)).unwrap();
        let b = structure_factor(
            &p,
            Species::Exciton,
            &q,
            &w,
            0.2,
            Method::Krylov { horizon: 150.0, time_step: 0.1 },
            Some(2),
        )
        .unwrap();
        for iq in 1..q.len() {
            let top = a.weights[iq].iter().cloned().fold(0.0, f64::max);
            for iw in 0..w.len() {
                assert!((a.weights[iq][iw] - b.weights[iq][iw]).abs() < 1e-3 * top);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let p = ring();
        let q = [0.0, 1.0];
        assert!(structure_factor(&p, Species::Photon, &q, &[0.0, 1.0], 0.0, Method::Lehmann, None).is_err());
        assert!(structure_factor(&p, Species::Photon, &[1.0, 0.5], &[0.0, 1.0], 0.1, Method::Lehmann, None).is_err());
        assert!(matches!(
            structure_factor(&p, Species::Photon, &q, &[0.0, 1.0], 0.1, Method::Lehmann, Some(6)),
            Err(Error::Range(_))
        ));
    }
}
