//! Hamiltonians of the exciton-photon ladder and its reduced models.
//!
//! Energies are in units of the Rabi coupling by convention, but nothing here
//! assumes `Ω = 1`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{Caps, FockBasis};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "open" | "obc" => Ok(Boundary::Open),
            "periodic" | "pbc" => Ok(Boundary::Periodic),
            other => Err(Error::InvalidParameter(format!("unknown boundary '{other}'"))),
        }
    }
}

/// On-site exciton repulsion `U`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Repulsion {
    Finite(f64),
    /// `U = ∞`: excitons are two-level emitters.
    HardCore,
}

impl Repulsion {
    /// `f64::INFINITY` maps to [`Repulsion::HardCore`].
    pub fn from_value(u: f64) -> Self {
        if u.is_infinite() && u > 0.0 {
            Repulsion::HardCore
        } else {
            Repulsion::Finite(u)
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Repulsion::Finite(u) => u,
            Repulsion::HardCore => f64::INFINITY,
        }
    }

    pub fn is_hard_core(&self) -> bool {
        matches!(self, Repulsion::HardCore)
    }
}

/// Physical couplings and geometry of one ladder sector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Exciton detuning `ω_X`.
    pub omega_x: f64,
    /// Photon hopping `J`.
    pub hopping: f64,
    /// Rabi coupling `Ω`.
    pub rabi: f64,
    pub repulsion: Repulsion,
    pub sites: usize,
    pub particles: usize,
    /// Physical inter-dot distance, only used for continuum conversions.
    pub spacing: f64,
    pub boundary: Boundary,
    pub caps: Caps,
}

impl ModelParams {
    /// Resonant ladder with `Ω = 1`, `U = Ω`, `J = 0`, open boundaries and default caps.
    pub fn new(sites: usize, particles: usize) -> Self {
        Self {
            omega_x: 0.0,
            hopping: 0.0,
            rabi: 1.0,
            repulsion: Repulsion::Finite(1.0),
            sites,
            particles,
            spacing: 1.0,
            boundary: Boundary::Open,
            caps: Caps::default_for(particles),
        }
    }

    pub fn with_hopping(mut self, j: f64) -> Self {
        self.hopping = j;
        self
    }

    pub fn with_rabi(mut self, omega: f64) -> Self {
        self.rabi = omega;
        self
    }

    pub fn with_detuning(mut self, omega_x: f64) -> Self {
        self.omega_x = omega_x;
        self
    }

    pub fn with_repulsion(mut self, u: f64) -> Self {
        self.repulsion = Repulsion::from_value(u);
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_caps(mut self, caps: Caps) -> Self {
        self.caps = caps;
        self
    }

    /// Same couplings in a different particle-number sector; caps are kept.
    pub fn with_particles(mut self, particles: usize) -> Self {
        self.particles = particles;
        self
    }

    /// Opt-in replacement of a large finite `U` by the hard-core limit.
    pub fn hard_core_above(mut self, threshold: f64) -> Self {
        if let Repulsion::Finite(u) = self.repulsion {
            if u >= threshold {
                self.repulsion = Repulsion::HardCore;
            }
        }
        self
    }

    /// Caps actually used for the basis: hard-core forces one exciton per site.
    pub fn effective_caps(&self) -> Caps {
        match self.repulsion {
            Repulsion::HardCore => Caps::new(self.caps.photon, 1),
            Repulsion::Finite(_) => self.caps,
        }
    }

    /// Polariton hopping `J_pol = J/2`.
    pub fn polariton_hopping(&self) -> f64 {
        0.5 * self.hopping
    }

    pub fn density(&self) -> f64 {
        self.particles as f64 / self.sites as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.hopping >= 0.0) || !self.hopping.is_finite() {
            return bad(format!("hopping J must be finite and >= 0, got {}", self.hopping));
        }
        if !(self.rabi > 0.0) || !self.rabi.is_finite() {
            return bad(format!("Rabi coupling must be > 0, got {}", self.rabi));
        }
        if let Repulsion::Finite(u) = self.repulsion {
            if !(u >= 0.0) || !u.is_finite() {
                return bad(format!("repulsion U must be >= 0, got {u}"));
            }
        }
        if !self.omega_x.is_finite() {
            return bad("detuning must be finite".into());
        }
        if self.sites == 0 {
            return bad("at least one rung is required".into());
        }
        if self.boundary == Boundary::Periodic && self.sites < 3 {
            return bad(format!("periodic boundary needs L >= 3, got {}", self.sites));
        }
        if !(self.spacing > 0.0) {
            return bad(format!("lattice spacing must be > 0, got {}", self.spacing));
        }
        Ok(())
    }

    /// Ladder basis of this sector.
    pub fn basis(&self) -> Result<FockBasis> {
        self.validate()?;
        FockBasis::ladder(self.sites, self.particles, self.effective_caps())
    }

    /// Nearest-neighbour bonds `(j, j+1)`, closing the ring for periodic boundaries.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        chain_bonds(self.sites, self.boundary)
    }
}

pub(crate) fn chain_bonds(sites: usize, boundary: Boundary) -> Vec<(usize, usize)> {
    let mut bonds: Vec<_> = (0..sites.saturating_sub(1)).map(|j| (j, j + 1)).collect();
    if boundary == Boundary::Periodic && sites >= 3 {
        bonds.push((sites - 1, 0));
    }
    bonds
}

/// Real symmetric sparse matrix in compressed-row form.
///
/// Every Hamiltonian of this model has real matrix elements in the
/// occupation basis, so values are stored as `f64`.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseOperator {
    /// Sums duplicate entries.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); dim];
        for &(r, c, v) in triplets {
            rows[r].push((c as u32, v));
        }
        let mut builder = RowBuilder::new(dim);
        for mut row in rows {
            builder.push_row(&mut row);
        }
        builder.finish()
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut builder = RowBuilder::new(m.nrows());
        let mut row = Vec::new();
        for i in 0..m.nrows() {
            row.clear();
            row.extend(
                (0..m.ncols())
                    .filter(|&j| m[(i, j)] != 0.0)
                    .map(|j| (j as u32, m[(i, j)])),
            );
            builder.push_row(&mut row);
        }
        builder.finish()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b]
            .iter()
            .zip(&self.vals[a..b])
            .map(|(&c, &v)| (c as usize, v))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[a..b].binary_search(&(j as u32)) {
            Ok(k) => self.vals[a + k],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.dim) {
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = 0.0;
            for k in a..b {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *yi = acc;
        }
    }

    pub fn apply_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.dim) {
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = Complex64::new(0.0, 0.0);
            for k in a..b {
                acc += x[self.cols[k] as usize] * self.vals[k];
            }
            *yi = acc;
        }
    }

    /// `⟨x|A|x⟩` for a real vector.
    pub fn expectation(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.dim];
        self.apply(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| a * b).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// Largest `|A_ij - A_ji|` over stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_asymmetry() <= tol
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }
}

/// Assembles a CSR matrix one sorted row at a time.
struct RowBuilder {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl RowBuilder {
    fn new(dim: usize) -> Self {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        row_ptr.push(0);
        Self {
            dim,
            row_ptr,
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    fn push_row(&mut self, row: &mut [(u32, f64)]) {
        row.sort_unstable_by_key(|e| e.0);
        let mut last: Option<u32> = None;
        for &(c, v) in row.iter() {
            if last == Some(c) {
                *self.vals.last_mut().unwrap() += v;
            } else {
                self.cols.push(c);
                self.vals.push(v);
                last = Some(c);
            }
        }
        self.row_ptr.push(self.cols.len());
    }

    fn finish(self) -> SparseOperator {
        assert_eq!(self.row_ptr.len(), self.dim + 1);
        SparseOperator {
            dim: self.dim,
            row_ptr: self.row_ptr,
            cols: self.cols,
            vals: self.vals,
        }
    }
}

fn check_basis(params: &ModelParams, basis: &FockBasis, species: usize) -> Result<()> {
    if basis.species() != species
        || basis.sites() != params.sites
        || basis.particles() != params.particles
    {
        return Err(Error::Mismatch(format!(
            "basis (species={}, L={}, N={}) does not match parameters (L={}, N={})",
            basis.species(),
            basis.sites(),
            basis.particles(),
            params.sites,
            params.particles
        )));
    }
    if species == 2 && basis.caps() != params.effective_caps() {
        return Err(Error::Mismatch(format!(
            "basis caps {:?} differ from parameter caps {:?}",
            basis.caps(),
            params.effective_caps()
        )));
    }
    Ok(())
}

/// Moves one boson from mode `from` to mode `to` and records the bosonic amplitude.
#[inline]
fn hop(
    basis: &FockBasis,
    occ: &[u8],
    scratch: &mut [u8],
    from: usize,
    to: usize,
    coupling: f64,
    row: &mut Vec<(u32, f64)>,
) {
    let nf = occ[from] as usize;
    let nt = occ[to] as usize;
    if nf == 0 || nt >= basis.mode_cap(to) {
        return;
    }
    scratch.copy_from_slice(occ);
    scratch[from] -= 1;
    scratch[to] += 1;
    let amp = ((nf * (nt + 1)) as f64).sqrt();
    row.push((basis.rank_unchecked(scratch) as u32, coupling * amp));
}

/// Full ladder Hamiltonian
/// `Σ_j [ω_X n^x_j − J(a_j†a_{j+1} + h.c. − 2 n^a_j) − Ω(x_j†a_j + a_j†x_j) + U/2 n^x_j(n^x_j − 1)]`.
///
/// The `+2J n^a_j` term sits on every site for both boundary conditions.
pub fn build_ladder_hamiltonian(params: &ModelParams, basis: &FockBasis) -> Result<SparseOperator> {
    params.validate()?;
    check_basis(params, basis, 2)?;
    let l = params.sites;
    let u = match params.repulsion {
        Repulsion::Finite(u) => u,
        Repulsion::HardCore => 0.0,
    };
    let bonds = params.bonds();
    let mut builder = RowBuilder::new(basis.dim());
    let mut row = Vec::new();
    let mut scratch = vec![0u8; basis.modes()];
    for i in 0..basis.dim() {
        let occ = basis.occupations(i);
        row.clear();
        let mut diag = 0.0;
        for j in 0..l {
            let p = occ[j] as f64;
            let x = occ[l + j] as f64;
            diag += params.omega_x * x + 2.0 * params.hopping * p + 0.5 * u * x * (x - 1.0);
        }
        row.push((i as u32, diag));
        if params.hopping != 0.0 {
            for &(j, k) in &bonds {
                hop(basis, occ, &mut scratch, k, j, -params.hopping, &mut row);
                hop(basis, occ, &mut scratch, j, k, -params.hopping, &mut row);
            }
        }
        for j in 0..l {
            hop(basis, occ, &mut scratch, j, l + j, -params.rabi, &mut row);
            hop(basis, occ, &mut scratch, l + j, j, -params.rabi, &mut row);
        }
        builder.push_row(&mut row);
    }
    Ok(builder.finish())
}

/// Effective lower-polariton chain
/// `−J_pol Σ(b_j†b_{j+1} + h.c.) + (2J_pol − Ω) Σ n_j + U_pol/2 Σ n_j(n_j − 1)`, `J_pol = J/2`.
pub fn build_polariton_hamiltonian(
    params: &ModelParams,
    u_pol: f64,
    basis: &FockBasis,
) -> Result<SparseOperator> {
    params.validate()?;
    check_basis(params, basis, 1)?;
    let j_pol = params.polariton_hopping();
    let mu = 2.0 * j_pol - params.rabi;
    let bonds = params.bonds();
    let mut builder = RowBuilder::new(basis.dim());
    let mut row = Vec::new();
    let mut scratch = vec![0u8; basis.modes()];
    for i in 0..basis.dim() {
        let occ = basis.occupations(i);
        row.clear();
        let diag: f64 = occ
            .iter()
            .map(|&n| {
                let n = n as f64;
                mu * n + 0.5 * u_pol * n * (n - 1.0)
            })
            .sum();
        row.push((i as u32, diag));
        if j_pol != 0.0 {
            for &(j, k) in &bonds {
                hop(basis, occ, &mut scratch, k, j, -j_pol, &mut row);
                hop(basis, occ, &mut scratch, j, k, -j_pol, &mut row);
            }
        }
        builder.push_row(&mut row);
    }
    Ok(builder.finish())
}

/// Two-boson on-site block in the order (|2 ph⟩, |1 ph 1 X⟩, |2 X⟩).
pub fn born_oppenheimer_matrix(u: f64, rabi: f64) -> DMatrix<f64> {
    let g = -std::f64::consts::SQRT_2 * rabi;
    DMatrix::from_row_slice(3, 3, &[0.0, g, 0.0, g, 0.0, g, 0.0, g, u])
}

/// Effective polariton repulsion `U_pol = E_BO + 2Ω`, where `E_BO` is the
/// lowest eigenvalue of the on-site two-boson block.
pub fn born_oppenheimer_upol(u: Repulsion, rabi: f64) -> f64 {
    match u {
        Repulsion::HardCore => (2.0 - std::f64::consts::SQRT_2) * rabi,
        Repulsion::Finite(u) => {
            let eig = SymmetricEigen::new(born_oppenheimer_matrix(u, rabi));
            eig.eigenvalues.min() + 2.0 * rabi
        }
    }
}

/// Dicke block `−(Ω/√L)(a_0† S_− + S_+ a_0)` of the maximal spin `S = L/2`,
/// in the basis `|N − m photons⟩ ⊗ |S_z = −S + m⟩`, `m = 0..=N`.
pub fn build_tavis_cummings_block(sites: usize, particles: usize, rabi: f64) -> Result<DMatrix<f64>> {
    if sites == 0 {
        return Err(Error::InvalidParameter("at least one emitter is required".into()));
    }
    if particles > sites {
        return Err(Error::Range(format!(
            "N = {particles} exceeds the number of emitters L = {sites}"
        )));
    }
    let s = sites as f64 / 2.0;
    let g = rabi / (sites as f64).sqrt();
    let dim = particles + 1;
    let mut h = DMatrix::zeros(dim, dim);
    for m in 0..particles {
        let sz = -s + m as f64;
        let spin = (s * (s + 1.0) - sz * (sz + 1.0)).sqrt();
        let photon = ((particles - m) as f64).sqrt();
        let el = -g * spin * photon;
        h[(m + 1, m)] = el;
        h[(m, m + 1)] = el;
    }
    Ok(h)
}

/// Lowest eigenvalue of the Dicke block.
pub fn tavis_cummings_ground_energy(sites: usize, particles: usize, rabi: f64) -> Result<f64> {
    let h = build_tavis_cummings_block(sites, particles, rabi)?;
    Ok(SymmetricEigen::new(h).eigenvalues.min())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lowest(op: &SparseOperator) -> f64 {
        SymmetricEigen::new(op.to_dense()).eigenvalues.min()
    }

    #[test]
    fn single_rung_rabi_doublet() {
        let p = ModelParams::new(1, 1).with_caps(Caps::unbounded(1));
        let b = p.basis().unwrap();
        let h = build_ladder_hamiltonian(&p, &b).unwrap().to_dense();
        assert_eq!(h.shape(), (2, 2));
        assert_abs_diff_eq!(h[(0, 0)], 0.0);
        assert_abs_diff_eq!(h[(0, 1)], -1.0);
        assert_abs_diff_eq!(h[(1, 0)], -1.0);
        assert_abs_diff_eq!(lowest(&SparseOperator::from_dense(&h)), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_hopping_ground_energy_is_minus_n_omega() {
        for (l, n) in [(3, 2), (4, 3), (4, 4)] {
            let p = ModelParams::new(l, n).with_rabi(0.7).with_repulsion(2.0);
            let h = build_ladder_hamiltonian(&p, &p.basis().unwrap()).unwrap();
            assert_abs_diff_eq!(lowest(&h), -(n as f64) * 0.7, epsilon = 1e-10);
        }
    }

    #[test]
    fn two_rung_single_particle_matches_polariton_bands() {
        // Photon modes of the open 2-site chain with the on-site +2J:
        // eigenvalues 2J - J and 2J + J. Each couples to its own exciton mode.
        let j = 0.3;
        let p = ModelParams::new(2, 1).with_hopping(j).with_caps(Caps::unbounded(1));
        let h = build_ladder_hamiltonian(&p, &p.basis().unwrap()).unwrap();
        let mut got: Vec<f64> = SymmetricEigen::new(h.to_dense()).eigenvalues.iter().copied().collect();
        got.sort_by(f64::total_cmp);
        let mut expected = Vec::new();
        for w in [j, 3.0 * j] {
            // eigenvalues of [[w, -1], [-1, 0]]
            let c = 0.5 * w;
            let r = (c * c + 1.0).sqrt();
            expected.push(c - r);
            expected.push(c + r);
        }
        expected.sort_by(f64::total_cmp);
        for (g, e) in got.iter().zip(&expected) {
            assert_abs_diff_eq!(g, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn detuned_rung_closed_form() {
        let d = 0.8;
        let p = ModelParams::new(3, 1).with_detuning(d);
        let h = build_ladder_hamiltonian(&p, &p.basis().unwrap()).unwrap();
        let expected = d / 2.0 - (d * d / 4.0 + 1.0).sqrt();
        assert_abs_diff_eq!(lowest(&h), expected, epsilon = 1e-12);
    }

    #[test]
    fn built_operators_are_symmetric() {
        for boundary in [Boundary::Open, Boundary::Periodic] {
            let p = ModelParams::new(4, 3)
                .with_hopping(0.37)
                .with_repulsion(1.3)
                .with_detuning(0.2)
                .with_boundary(boundary);
            let h = build_ladder_hamiltonian(&p, &p.basis().unwrap()).unwrap();
            assert!(h.is_hermitian(1e-14));
            let chain = FockBasis::chain(4, 3, 3).unwrap();
            let hp = build_polariton_hamiltonian(&p, 0.4, &chain).unwrap();
            assert!(hp.is_hermitian(1e-14));
        }
    }

    #[test]
    fn mismatched_basis_is_rejected() {
        let p = ModelParams::new(4, 2);
        let other = FockBasis::ladder(4, 3, Caps::default_for(3)).unwrap();
        assert!(matches!(
            build_ladder_hamiltonian(&p, &other),
            Err(Error::Mismatch(_))
        ));
        let chain = FockBasis::chain(4, 2, 2).unwrap();
        assert!(matches!(
            build_ladder_hamiltonian(&p, &chain),
            Err(Error::Mismatch(_))
        ));
        let wrong_caps = FockBasis::ladder(4, 2, Caps::new(1, 1)).unwrap();
        assert!(build_ladder_hamiltonian(&p, &wrong_caps).is_err());
    }

    #[test]
    fn invalid_parameters() {
        assert!(ModelParams::new(2, 1).with_boundary(Boundary::Periodic).validate().is_err());
        assert!(ModelParams::new(3, 1).with_rabi(0.0).validate().is_err());
        assert!(ModelParams::new(3, 1).with_hopping(-1.0).validate().is_err());
        assert!(ModelParams::new(3, 1).with_repulsion(-0.5).validate().is_err());
        assert!(ModelParams::new(0, 0).validate().is_err());
    }

    #[test]
    fn free_polariton_ring_dispersion() {
        let (l, j) = (6, 0.4);
        let p = ModelParams::new(l, 1).with_hopping(j).with_boundary(Boundary::Periodic);
        let chain = FockBasis::chain(l, 1, 1).unwrap();
        let h = build_polariton_hamiltonian(&p, 0.0, &chain).unwrap();
        let mut got: Vec<f64> = SymmetricEigen::new(h.to_dense()).eigenvalues.iter().copied().collect();
        got.sort_by(f64::total_cmp);
        let jp = j / 2.0;
        let mut expected: Vec<f64> = (0..l)
            .map(|m| {
                let k = 2.0 * std::f64::consts::PI * m as f64 / l as f64;
                2.0 * jp * (1.0 - k.cos()) - 1.0
            })
            .collect();
        expected.sort_by(f64::total_cmp);
        for (g, e) in got.iter().zip(&expected) {
            assert_abs_diff_eq!(g, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn polariton_chain_without_hopping() {
        let p = ModelParams::new(5, 3);
        let chain = FockBasis::chain(5, 3, 3).unwrap();
        let h = build_polariton_hamiltonian(&p, 0.3, &chain).unwrap();
        assert_abs_diff_eq!(lowest(&h), -3.0, epsilon = 1e-12);
    }

    /// Smallest root of det(H_BO - λ) by bisection on the characteristic cubic.
    fn bo_root_by_bisection(u: f64) -> f64 {
        // det(H - λ) = -λ³ + uλ² + 4λ - 2u  (Ω = 1)
        let f = |l: f64| -l * l * l + u * l * l + 4.0 * l - 2.0 * u;
        // the lowest root lies below the first stationary point
        let mut lo = -10.0 - u.abs();
        let mut hi = (2.0 * u - (4.0 * u * u + 48.0).sqrt()) / 6.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn upol_limits() {
        assert_abs_diff_eq!(born_oppenheimer_upol(Repulsion::Finite(0.0), 1.0), 0.0, epsilon = 1e-12);
        let at_omega = born_oppenheimer_upol(Repulsion::Finite(1.0), 1.0);
        assert_abs_diff_eq!(at_omega, 0.1864, epsilon = 1e-3);
        assert_abs_diff_eq!(at_omega, bo_root_by_bisection(1.0) + 2.0, epsilon = 1e-12);
        assert_eq!(
            born_oppenheimer_upol(Repulsion::HardCore, 1.0),
            2.0 - std::f64::consts::SQRT_2
        );
        let large = born_oppenheimer_upol(Repulsion::Finite(1e8), 1.0);
        assert_abs_diff_eq!(large, 2.0 - std::f64::consts::SQRT_2, epsilon = 1e-6);
    }

    #[test]
    fn upol_cubic_cross_check() {
        // λ³ − λ² − 4λ + 2 = 0 at U = Ω = 1
        let e = born_oppenheimer_upol(Repulsion::Finite(1.0), 1.0) - 2.0;
        assert_abs_diff_eq!(e * e * e - e * e - 4.0 * e + 2.0, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn tavis_cummings_small_blocks() {
        let h0 = build_tavis_cummings_block(7, 0, 1.0).unwrap();
        assert_eq!(h0.shape(), (1, 1));
        assert_eq!(h0[(0, 0)], 0.0);
        for l in [1, 4, 36] {
            let e = tavis_cummings_ground_energy(l, 1, 1.3).unwrap();
            assert_abs_diff_eq!(e, -1.3, epsilon = 1e-12);
        }
        assert!(matches!(build_tavis_cummings_block(3, 4, 1.0), Err(Error::Range(_))));
    }

    #[test]
    fn hard_core_opt_in() {
        let p = ModelParams::new(4, 2).with_repulsion(1e4);
        assert_eq!(p.repulsion, Repulsion::Finite(1e4));
        assert_eq!(p.effective_caps(), Caps::new(2, 2));
        let hc = p.hard_core_above(1e3);
        assert!(hc.repulsion.is_hard_core());
        assert_eq!(hc.effective_caps(), Caps::new(2, 1));
    }
}
