//! Local Hilbert space of one merged rung.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::Caps;
use crate::model::{ModelParams, Repulsion};

pub type Charge = i64;

/// Rung states `|p, x⟩` with `p ≤ cap_photon`, `x ≤ cap_exciton`, indexed
/// as `p (cap_exciton + 1) + x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RungSpace {
    pub caps: Caps,
    /// Label tensor blocks by particle number. Without it every state
    /// carries charge 0 and the tensors have a single block per state.
    pub conserve: bool,
}

impl RungSpace {
    pub fn new(caps: Caps, conserve: bool) -> Self {
        Self { caps, conserve }
    }

    pub fn dim(&self) -> usize {
        self.caps.rung_dimension()
    }

    pub fn index(&self, p: usize, x: usize) -> usize {
        p * (self.caps.exciton + 1) + x
    }

    /// `(photons, excitons)` of state `s`.
    pub fn occupations(&self, s: usize) -> (usize, usize) {
        (s / (self.caps.exciton + 1), s % (self.caps.exciton + 1))
    }

    pub fn particles(&self, s: usize) -> usize {
        let (p, x) = self.occupations(s);
        p + x
    }

    /// Symmetry label of state `s`.
    pub fn charge(&self, s: usize) -> Charge {
        if self.conserve {
            self.particles(s) as Charge
        } else {
            0
        }
    }

    pub fn max_particles(&self) -> usize {
        self.caps.photon + self.caps.exciton
    }

    fn from_fn(&self, f: impl Fn(usize, usize) -> Option<(usize, usize, f64)>) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for s in 0..d {
            let (p, x) = self.occupations(s);
            if let Some((p2, x2, v)) = f(p, x) {
                if p2 <= self.caps.photon && x2 <= self.caps.exciton {
                    m[(self.index(p2, x2), s)] += v;
                }
            }
        }
        m
    }

    pub fn identity(&self) -> DMatrix<f64> {
        DMatrix::identity(self.dim(), self.dim())
    }

    /// Photon annihilator `a`.
    pub fn photon_lower(&self) -> DMatrix<f64> {
        self.from_fn(|p, x| (p > 0).then(|| (p - 1, x, (p as f64).sqrt())))
    }

    pub fn photon_raise(&self) -> DMatrix<f64> {
        self.photon_lower().transpose()
    }

    pub fn exciton_lower(&self) -> DMatrix<f64> {
        self.from_fn(|p, x| (x > 0).then(|| (p, x - 1, (x as f64).sqrt())))
    }

    pub fn photon_number(&self) -> DMatrix<f64> {
        self.from_fn(|p, x| Some((p, x, p as f64)))
    }

    pub fn exciton_number(&self) -> DMatrix<f64> {
        self.from_fn(|p, x| Some((p, x, x as f64)))
    }

    pub fn total_number(&self) -> DMatrix<f64> {
        self.from_fn(|p, x| Some((p, x, (p + x) as f64)))
    }

    /// On-rung part of the ladder Hamiltonian:
    /// `ω_X n^x + 2J n^a + U/2 n^x(n^x−1) − Ω(x†a + a†x)`.
    pub fn rung_hamiltonian(&self, params: &ModelParams) -> DMatrix<f64> {
        let u = match params.repulsion {
            Repulsion::Finite(u) => u,
            Repulsion::HardCore => 0.0,
        };
        let diag = self.from_fn(|p, x| {
            let (pf, xf) = (p as f64, x as f64);
            Some((p, x, params.omega_x * xf + 2.0 * params.hopping * pf + 0.5 * u * xf * (xf - 1.0)))
        });
        let a = self.photon_lower();
        let x = self.exciton_lower();
        let mix = x.transpose() * &a;
        diag - params.rabi * (&mix + mix.transpose())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operators_commute_as_bosons_below_cap() {
        let sp = RungSpace::new(Caps::new(3, 2), true);
        let a = sp.photon_lower();
        let n = sp.photon_number();
        assert!((&a.transpose() * &a - n).amax() < 1e-12);
        let comm = &a * a.transpose() - a.transpose() * &a;
        for s in 0..sp.dim() {
            let (p, _) = sp.occupations(s);
            let expect = if p < 3 { 1.0 } else { -3.0 };
            assert!((comm[(s, s)] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn single_rung_doublet() {
        let sp = RungSpace::new(Caps::new(1, 1), true);
        let h = sp.rung_hamiltonian(&ModelParams::new(1, 1));
        let i10 = sp.index(1, 0);
        let i01 = sp.index(0, 1);
        assert_eq!(h[(i10, i01)], -1.0);
        assert_eq!(h[(i01, i10)], -1.0);
        assert_eq!(sp.charge(sp.index(1, 1)), 2);
        assert_eq!(RungSpace::new(Caps::new(1, 1), false).charge(3), 0);
    }
}
