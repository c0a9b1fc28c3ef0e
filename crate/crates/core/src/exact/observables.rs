//! Static observables of exact many-body states.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::basis::FockBasis;
use crate::error::{Error, Result};
use crate::Species;

use super::dense::DEFAULT_DENSE_LIMIT;

/// Density-normalized pair correlation `g²(j, j0)` of one species.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub kind: Species,
    pub reference_site: usize,
    /// `g²(j, j0)` for `j = 0..L`.
    pub values: Vec<f64>,
    /// Total density `N/L` used to normalize.
    pub normalization_density: f64,
    /// Set when the state came from a degenerate ground manifold.
    #[serde(default)]
    pub degenerate: bool,
}

impl CorrelationResult {
    pub fn with_degeneracy(mut self, degenerate: bool) -> Self {
        self.degenerate = degenerate;
        self
    }
}

fn check_state(state: &[f64], basis: &FockBasis) -> Result<()> {
    if state.len() != basis.dim() {
        return Err(Error::Mismatch(format!(
            "state of length {} for a basis of dimension {}",
            state.len(),
            basis.dim()
        )));
    }
    Ok(())
}

fn species_offset(basis: &FockBasis, kind: Species) -> Result<usize> {
    match (basis.species(), kind) {
        (1, _) => Ok(0),
        (2, s) => Ok(s.index() * basis.sites()),
        (n, _) => Err(Error::Mismatch(format!("basis with {n} species"))),
    }
}

/// `⟨n_j⟩` of one species on every site. On a single-species chain the
/// species argument is ignored.
pub fn densities(state: &[f64], basis: &FockBasis, kind: Species) -> Result<Vec<f64>> {
    check_state(state, basis)?;
    let off = species_offset(basis, kind)?;
    let l = basis.sites();
    let mut out = vec![0.0; l];
    for (c, occ) in state.iter().zip(basis.iter()) {
        let w = c * c;
        for (o, &n) in out.iter_mut().zip(&occ[off..off + l]) {
            *o += w * n as f64;
        }
    }
    Ok(out)
}

/// `Σ_j ⟨a_j†a_j⟩ / N`.
pub fn photonic_fraction(state: &[f64], basis: &FockBasis) -> Result<f64> {
    if basis.species() != 2 {
        return Err(Error::Mismatch("photonic fraction needs a ladder basis".into()));
    }
    if basis.particles() == 0 {
        return Err(Error::InvalidParameter("photonic fraction of the vacuum".into()));
    }
    let n: f64 = densities(state, basis, Species::Photon)?.iter().sum();
    Ok((n / basis.particles() as f64).clamp(0.0, 1.0))
}

/// Lowers mode `m`, returning the matrix element `√n`, or `None` if empty.
fn lower(occ: &mut [u8], m: usize) -> Option<f64> {
    let n = occ[m];
    if n == 0 {
        return None;
    }
    occ[m] = n - 1;
    Some((n as f64).sqrt())
}

/// Raises mode `m`, returning `√(n+1)`, or `None` above the cap.
fn raise(occ: &mut [u8], m: usize, cap: usize) -> Option<f64> {
    let n = occ[m];
    if n as usize >= cap {
        return None;
    }
    occ[m] = n + 1;
    Some((n as f64 + 1.0).sqrt())
}

/// `⟨ψ| b_j† b_k† b_k b_j |ψ⟩` applied operator by operator.
fn four_point(state: &[f64], basis: &FockBasis, j: usize, k: usize) -> f64 {
    let mut occ = vec![0u8; basis.modes()];
    let mut total = 0.0;
    for (i, &c) in state.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        occ.copy_from_slice(basis.occupations(i));
        let amp = lower(&mut occ, j)
            .and_then(|a| lower(&mut occ, k).map(|b| a * b))
            .and_then(|a| raise(&mut occ, k, basis.mode_cap(k)).map(|b| a * b))
            .and_then(|a| raise(&mut occ, j, basis.mode_cap(j)).map(|b| a * b));
        if let Some(amp) = amp {
            total += state[basis.rank_unchecked(&occ)] * amp * c;
        }
    }
    total
}

fn check_site(basis: &FockBasis, j0: usize) -> Result<()> {
    if j0 >= basis.sites() {
        return Err(Error::Range(format!(
            "reference site {j0} outside 0..{}",
            basis.sites()
        )));
    }
    Ok(())
}

/// `g²(j, j0) = ⟨b_j† b_{j0}† b_{j0} b_j⟩ / ρ²` from the four-operator product.
pub fn g2(state: &[f64], basis: &FockBasis, kind: Species, j0: usize) -> Result<CorrelationResult> {
    check_state(state, basis)?;
    check_site(basis, j0)?;
    let off = species_offset(basis, kind)?;
    let rho = basis.particles() as f64 / basis.sites() as f64;
    let values = (0..basis.sites())
        .map(|j| four_point(state, basis, off + j, off + j0).max(0.0) / (rho * rho))
        .collect();
    Ok(CorrelationResult {
        kind,
        reference_site: j0,
        values,
        normalization_density: rho,
        degenerate: false,
    })
}

/// Same quantity as [`g2`] from `⟨n_j n_{j0}⟩ − δ_{j,j0}⟨n_j⟩`.
pub fn g2_from_densities(
    state: &[f64],
    basis: &FockBasis,
    kind: Species,
    j0: usize,
) -> Result<CorrelationResult> {
    check_state(state, basis)?;
    check_site(basis, j0)?;
    let off = species_offset(basis, kind)?;
    let l = basis.sites();
    let rho = basis.particles() as f64 / l as f64;
    let mut nn = vec![0.0; l];
    let mut n0 = 0.0;
    for (c, occ) in state.iter().zip(basis.iter()) {
        let w = c * c;
        let r = occ[off + j0] as f64;
        n0 += w * r;
        for (acc, &n) in nn.iter_mut().zip(&occ[off..off + l]) {
            *acc += w * n as f64 * r;
        }
    }
    nn[j0] -= n0;
    Ok(CorrelationResult {
        kind,
        reference_site: j0,
        values: nn.iter().map(|v| v.max(0.0) / (rho * rho)).collect(),
        normalization_density: rho,
        degenerate: false,
    })
}

/// Bipartition of the ladder modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Partition {
    /// Photon modes against exciton modes.
    LightMatter,
    /// Rungs `0..=cut` against rungs `cut+1..L`, both species.
    LeftRight { cut: usize },
}

/// Which half of a [`Partition`] is kept in the reduced density matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kept {
    /// Photons, or the left rungs.
    First,
    /// Excitons, or the right rungs.
    Second,
}

fn partition_modes(basis: &FockBasis, partition: Partition) -> Result<Vec<bool>> {
    let l = basis.sites();
    let s = basis.species();
    let mut first = vec![false; basis.modes()];
    match partition {
        Partition::LightMatter => {
            if s != 2 {
                return Err(Error::Mismatch("light-matter partition needs a ladder basis".into()));
            }
            first[..l].iter_mut().for_each(|f| *f = true);
        }
        Partition::LeftRight { cut } => {
            if cut + 1 >= l {
                return Err(Error::Range(format!(
                    "cut after rung {cut} leaves nothing on the right of {l} rungs"
                )));
            }
            for sp in 0..s {
                first[sp * l..sp * l + cut + 1].iter_mut().for_each(|f| *f = true);
            }
        }
    }
    Ok(first)
}

/// Eigenvalues of the reduced density matrix, block by block in the
/// particle number of the kept half.
pub fn reduced_density_spectrum(
    state: &[f64],
    basis: &FockBasis,
    partition: Partition,
    kept: Kept,
    limit: usize,
) -> Result<Vec<f64>> {
    check_state(state, basis)?;
    let first = partition_modes(basis, partition)?;
    let keep_first = kept == Kept::First;

    // Schmidt coefficients ψ[a, b] grouped by the kept particle number.
    let mut blocks: HashMap<usize, SchmidtBlock> = HashMap::new();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (&c, occ) in state.iter().zip(basis.iter()) {
        if c == 0.0 {
            continue;
        }
        a.clear();
        b.clear();
        for (m, &n) in occ.iter().enumerate() {
            if first[m] == keep_first {
                a.push(n);
            } else {
                b.push(n);
            }
        }
        let na = a.iter().map(|&n| n as usize).sum();
        blocks.entry(na).or_default().push(&a, &b, c);
    }

    let mut keys: Vec<usize> = blocks.keys().copied().collect();
    keys.sort_unstable();
    let mut out = Vec::new();
    for k in keys {
        let block = &blocks[&k];
        let (na, nb) = (block.rows.len(), block.cols.len());
        if na > limit {
            return Err(Error::Dimension { dim: na, limit });
        }
        let mut psi = DMatrix::zeros(na, nb);
        for &(i, j, c) in &block.entries {
            psi[(i, j)] = c;
        }
        let rho = &psi * psi.transpose();
        out.extend(SymmetricEigen::new(rho).eigenvalues.iter().map(|&p| p.max(0.0)));
    }
    out.sort_by(|x, y| y.total_cmp(x));
    Ok(out)
}

#[derive(Default)]
struct SchmidtBlock {
    rows: HashMap<Vec<u8>, usize>,
    cols: HashMap<Vec<u8>, usize>,
    entries: Vec<(usize, usize, f64)>,
}

impl SchmidtBlock {
    fn push(&mut self, a: &[u8], b: &[u8], c: f64) {
        let next = self.rows.len();
        let i = *self.rows.entry(a.to_vec()).or_insert(next);
        let next = self.cols.len();
        let j = *self.cols.entry(b.to_vec()).or_insert(next);
        self.entries.push((i, j, c));
    }
}

/// `−Σ p ln p` over reduced density matrix eigenvalues.
pub fn entropy_from_probabilities(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 1e-300).map(|&x| -x * x.ln()).sum()
}

/// Von Neumann entropy (nats) of the first half of `partition`, tracing
/// out the second.
pub fn von_neumann_entropy(state: &[f64], basis: &FockBasis, partition: Partition) -> Result<f64> {
    von_neumann_entropy_keeping(state, basis, partition, Kept::First, DEFAULT_DENSE_LIMIT)
}

pub fn von_neumann_entropy_keeping(
    state: &[f64],
    basis: &FockBasis,
    partition: Partition,
    kept: Kept,
    limit: usize,
) -> Result<f64> {
    let p = reduced_density_spectrum(state, basis, partition, kept, limit)?;
    Ok(entropy_from_probabilities(&p))
}
