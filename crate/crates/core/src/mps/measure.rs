//! Expectation values of matrix-product states.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::dmrg::{left_boundary, left_update, sparse_terms};
use super::mpo::Mpo;
use super::site::Charge;
use super::state::{transfer, Blocks, MpsState};
use crate::error::{Error, Result};
use crate::exact::CorrelationResult;
use crate::Species;

type Env = BTreeMap<Charge, DMatrix<f64>>;

/// `⟨ψ|W|ψ⟩` for a normalized state, including the MPO constant.
pub fn mps_expectation(state: &MpsState, mpo: &Mpo) -> Result<f64> {
    if mpo.sites != state.sites() {
        return Err(Error::Mismatch(format!(
            "MPO on {} sites, state on {}",
            mpo.sites,
            state.sites()
        )));
    }
    let terms = sparse_terms(mpo);
    let mut env = left_boundary(mpo);
    for t in &state.tensors {
        env = left_update(&state.space, mpo, &terms, &env, t);
    }
    let v = env[mpo.last()].get(&state.total_charge()).map_or(0.0, |m| m[(0, 0)]);
    Ok(v + mpo.constant)
}

fn transfer_right(state: &MpsState, blocks: &Blocks, env: &Env) -> Env {
    let mut out = Env::new();
    for (&(s, ql), m) in blocks {
        let qr = ql + state.space.charge(s);
        let Some(e) = env.get(&qr) else { continue };
        let v = m * e * m.transpose();
        match out.get_mut(&ql) {
            Some(x) => *x += v,
            None => {
                out.insert(ql, v);
            }
        }
    }
    out
}

fn close(left: &Env, right: &Env) -> f64 {
    left.iter()
        .filter_map(|(q, l)| right.get(q).map(|r| l.component_mul(r).sum()))
        .sum()
}

/// Identity environments from both ends, reused by all local measurements.
struct Environments {
    left: Vec<Env>,
    right: Vec<Env>,
}

impl Environments {
    fn new(state: &MpsState) -> Self {
        let l = state.sites();
        let mut left = Vec::with_capacity(l + 1);
        let mut e = Env::new();
        e.insert(0, DMatrix::identity(1, 1));
        left.push(e);
        for i in 0..l {
            let next = transfer(&state.space, &state.tensors[i], &left[i], None);
            left.push(next);
        }
        let mut right = vec![Env::new(); l + 1];
        right[l].insert(state.total_charge(), DMatrix::identity(1, 1));
        for i in (0..l).rev() {
            right[i] = transfer_right(state, &state.tensors[i], &right[i + 1]);
        }
        Self { left, right }
    }

    /// `⟨O_i O_j⟩` for `i < j`, or `⟨O_i⟩` when `j` is `None`.
    fn correlate(&self, state: &MpsState, oi: &DMatrix<f64>, i: usize, oj: Option<(&DMatrix<f64>, usize)>) -> f64 {
        let mut env = transfer(&state.space, &state.tensors[i], &self.left[i], Some(oi));
        let end = match oj {
            None => i,
            Some((o, j)) => {
                for k in i + 1..j {
                    env = transfer(&state.space, &state.tensors[k], &env, None);
                }
                env = transfer(&state.space, &state.tensors[j], &env, Some(o));
                j
            }
        };
        close(&env, &self.right[end + 1])
    }
}

fn number_op(state: &MpsState, kind: Species) -> DMatrix<f64> {
    match kind {
        Species::Photon => state.space.photon_number(),
        Species::Exciton => state.space.exciton_number(),
    }
}

pub fn mps_densities(state: &MpsState, kind: Species) -> Vec<f64> {
    let envs = Environments::new(state);
    let n = number_op(state, kind);
    (0..state.sites()).map(|i| envs.correlate(state, &n, i, None)).collect()
}

/// `Σ_j (⟨a_j†a_j⟩ + ⟨x_j†x_j⟩)`.
pub fn mps_total_number(state: &MpsState) -> f64 {
    let envs = Environments::new(state);
    let n = state.space.total_number();
    (0..state.sites()).map(|i| envs.correlate(state, &n, i, None)).sum()
}

pub fn mps_photonic_fraction(state: &MpsState) -> f64 {
    let n: f64 = mps_densities(state, Species::Photon).iter().sum();
    (n / state.particles as f64).clamp(0.0, 1.0)
}

/// `g²(j, j0)` from `⟨n_j n_{j0}⟩` for `j ≠ j0` and `⟨n(n − 1)⟩` on site,
/// normalized by the total density.
pub fn mps_measure_g2(state: &MpsState, kind: Species, j0: usize) -> Result<CorrelationResult> {
    let l = state.sites();
    if j0 >= l {
        return Err(Error::Range(format!("reference site {j0} outside 0..{l}")));
    }
    let envs = Environments::new(state);
    let n = number_op(state, kind);
    let id = state.space.identity();
    let pair = &n * (&n - &id);
    let rho = state.particles as f64 / l as f64;
    let values = (0..l)
        .map(|j| {
            let v = match j.cmp(&j0) {
                std::cmp::Ordering::Equal => envs.correlate(state, &pair, j, None),
                std::cmp::Ordering::Less => envs.correlate(state, &n, j, Some((&n, j0))),
                std::cmp::Ordering::Greater => envs.correlate(state, &n, j0, Some((&n, j))),
            };
            v.max(0.0) / (rho * rho)
        })
        .collect();
    Ok(CorrelationResult {
        kind,
        reference_site: j0,
        values,
        normalization_density: rho,
        degenerate: false,
    })
}

/// `−Σ s² ln s²` over the Schmidt values of the bond between `bond` and
/// `bond + 1`.
pub fn mps_bond_entropy(state: &MpsState, bond: usize) -> Result<f64> {
    let mut work = state.clone();
    let s = work.schmidt_values(bond)?;
    Ok(s.iter()
        .map(|&x| x * x)
        .filter(|&p| p > 1e-300)
        .map(|p| -p * p.ln())
        .sum())
}
