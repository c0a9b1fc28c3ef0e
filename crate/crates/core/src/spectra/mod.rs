//! Dynamic structure factor and resonant photon response at ED scale.

pub mod krylov;
pub mod response;
pub mod structure;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Boundary, ModelParams};

pub use krylov::{PropagationOptions, Propagator};
pub use response::{response_chi, response_poles, ResponsePart, ResponsePoles};
pub use structure::{equal_time_correlator, structure_factor, Method, SumRuleEntry};

/// Broadening used when none is given.
pub const DEFAULT_GAMMA: f64 = 0.04;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralChannel {
    Photon,
    Exciton,
    Response,
    Absorption,
    Photoluminescence,
}

/// Everything needed to reproduce a spectrum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralManifest {
    pub params: ModelParams,
    pub method: String,
    /// Reference site of the structure factor.
    pub reference_site: Option<usize>,
    /// Normalization of `a_q = c Σ_j e^{−iqj} a_j`.
    pub mode_normalization: Option<f64>,
    pub horizon: Option<f64>,
    pub time_step: Option<f64>,
    /// The reference ground state had a degenerate partner.
    pub degenerate_ground_state: bool,
}

/// Weights on a `(q, ω)` grid, row-major in `q`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub q_values: Vec<f64>,
    pub omega_values: Vec<f64>,
    /// `weights[iq][iω]`.
    pub weights: Vec<Vec<f64>>,
    pub channel: SpectralChannel,
    pub broadening: f64,
    pub manifest: SpectralManifest,
    /// Frequency integral against the equal-time correlator, per `q`.
    #[serde(default)]
    pub sum_rule: Vec<SumRuleEntry>,
}

impl SpectralGrid {
    pub fn weight(&self, iq: usize, iw: usize) -> f64 {
        self.weights[iq][iw]
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    /// Trapezoid integral over `ω` of one `q` column.
    pub fn frequency_integral(&self, iq: usize) -> f64 {
        trapezoid(&self.omega_values, &self.weights[iq])
    }

    /// `Σ_q S(q, ω)` at each frequency.
    pub fn q_integrated(&self) -> Vec<f64> {
        (0..self.omega_values.len())
            .map(|iw| self.weights.iter().map(|row| row[iw]).sum())
            .collect()
    }

    /// `(q, ω, weight)` rows in grid order.
    pub fn rows(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        self.q_values.iter().enumerate().flat_map(move |(iq, &q)| {
            self.omega_values
                .iter()
                .enumerate()
                .map(move |(iw, &w)| [q, w, self.weights[iq][iw]])
        })
    }
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Normalized Lorentzian of full width `gamma`.
pub fn lorentzian(delta: f64, gamma: f64) -> f64 {
    let h = 0.5 * gamma;
    h / (std::f64::consts::PI * (delta * delta + h * h))
}

/// Momenta in `[0, π]`: `πm/L`, `m = 0..=L` for open chains and the lattice
/// momenta `2πm/L`, `m = 0..=L/2` for rings.
pub fn momentum_grid(sites: usize, boundary: Boundary) -> Vec<f64> {
    let l = sites as f64;
    match boundary {
        Boundary::Open => (0..=sites).map(|m| std::f64::consts::PI * m as f64 / l).collect(),
        Boundary::Periodic => (0..=sites / 2)
            .map(|m| 2.0 * std::f64::consts::PI * m as f64 / l)
            .collect(),
    }
}

/// `min, min + step, …` up to and including `max` (within rounding).
pub fn omega_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(max > min) {
        return Err(Error::InvalidParameter(format!(
            "frequency grid needs max > min and step > 0, got [{min}, {max}] step {step}"
        )));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| min + k as f64 * step).collect())
}

pub(crate) fn check_grids(q: &[f64], omega: &[f64], gamma: f64) -> Result<()> {
    let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
    if q.is_empty() || omega.is_empty() || !increasing(q) || !increasing(omega) {
        return Err(Error::InvalidParameter("grids must be non-empty and strictly increasing".into()));
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("broadening must be > 0, got {gamma}")));
    }
    Ok(())
}

/// Indices of local maxima of `y` that exceed `min_fraction · max(y)`.
pub fn find_peaks(y: &[f64], min_fraction: f64) -> Vec<usize> {
    let top = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > min_fraction * top)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grids() {
        let q = momentum_grid(4, Boundary::Open);
        assert_eq!(q.len(), 5);
        assert!((q[4] - PI).abs() < 1e-15);
        let q = momentum_grid(10, Boundary::Periodic);
        assert_eq!(q.len(), 6);
        assert!((q[5] - PI).abs() < 1e-15);
        let w = omega_grid(-1.0, 1.0, 0.5).unwrap();
        assert_eq!(w, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(omega_grid(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn lorentzian_is_normalized() {
        let w = omega_grid(-200.0, 200.0, 0.001).unwrap();
        let y: Vec<f64> = w.iter().map(|&x| lorentzian(x - 0.3, 0.04)).collect();
        assert!((trapezoid(&w, &y) - 1.0).abs() < 1e-3);
        assert!((lorentzian(0.0, 0.04) - 1.0 / (PI * 0.02)).abs() < 1e-12);
    }

    #[test]
    fn peaks() {
        let y = [0.0, 1.0, 0.0, 0.005, 0.0, 3.0, 2.0];
        assert_eq!(find_peaks(&y, 0.01), vec![1, 5]);
    }
}
