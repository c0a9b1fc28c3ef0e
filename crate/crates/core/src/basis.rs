//! Number-conserving bosonic Fock bases.
//!
//! A basis holds every occupation pattern of `N` bosons distributed over
//! `species × L` modes, each mode capped at its species' maximum occupation.
//! Modes are laid out species-major: for the ladder the first `L` entries
//! are photon counts and the next `L` are exciton counts. States are stored
//! in ascending lexicographic order of that concatenated vector, which makes
//! ranking a closed-form sum over a table of completion counts instead of a
//! hash lookup.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest basis that [`FockBasis`] constructors will enumerate unless told otherwise.
pub const DEFAULT_DIMENSION_LIMIT: usize = 20_000_000;

/// Per-species cap used when the caller does not choose one.
pub const DEFAULT_CAP: usize = 5;

/// Per-site occupation caps of the two ladder species.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub photon: usize,
    pub exciton: usize,
}

impl Caps {
    pub fn new(photon: usize, exciton: usize) -> Self {
        Self { photon, exciton }
    }

    /// No truncation: every site may hold all `n` excitations.
    pub fn unbounded(n: usize) -> Self {
        Self::new(n.max(1), n.max(1))
    }

    /// `min(n, 5)` for both species.
    pub fn default_for(n: usize) -> Self {
        let c = n.clamp(1, DEFAULT_CAP);
        Self::new(c, c)
    }

    /// Two-level excitons (the `U → ∞` limit) with the default photon cap.
    pub fn hard_core(n: usize) -> Self {
        Self::new(n.clamp(1, DEFAULT_CAP), 1)
    }

    /// Number of states of one merged rung (photon mode ⊗ exciton mode).
    pub fn rung_dimension(&self) -> usize {
        (self.photon + 1) * (self.exciton + 1)
    }
}

/// Occupation numbers of one ladder basis state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OccupationState {
    pub photon_counts: Vec<u8>,
    pub exciton_counts: Vec<u8>,
}

impl OccupationState {
    pub fn new(photon_counts: Vec<u8>, exciton_counts: Vec<u8>) -> Self {
        Self {
            photon_counts,
            exciton_counts,
        }
    }

    pub fn total(&self) -> usize {
        self.photon_counts
            .iter()
            .chain(&self.exciton_counts)
            .map(|&c| c as usize)
            .sum()
    }

    fn concatenated(&self) -> Vec<u8> {
        let mut v = self.photon_counts.clone();
        v.extend_from_slice(&self.exciton_counts);
        v
    }
}

/// Ordered, indexed set of occupation states with fixed total particle number.
#[derive(Clone, Debug)]
pub struct FockBasis {
    sites: usize,
    particles: usize,
    species_caps: Vec<usize>,
    mode_caps: Vec<u8>,
    /// `completions[pos * (N + 1) + r]`: ways to place `r` bosons in modes `pos..`.
    completions: Vec<u64>,
    /// Flattened occupations, `modes()` entries per state.
    occupations: Vec<u8>,
}

impl FockBasis {
    /// Ladder basis (photon and exciton species) with the default dimension limit.
    pub fn ladder(sites: usize, particles: usize, caps: Caps) -> Result<Self> {
        Self::ladder_with_limit(sites, particles, caps, DEFAULT_DIMENSION_LIMIT)
    }

    pub fn ladder_with_limit(
        sites: usize,
        particles: usize,
        caps: Caps,
        limit: usize,
    ) -> Result<Self> {
        Self::build(sites, particles, vec![caps.photon, caps.exciton], limit)
    }

    /// Single-species chain, used for the effective lower-polariton model.
    pub fn chain(sites: usize, particles: usize, cap: usize) -> Result<Self> {
        Self::build(sites, particles, vec![cap], DEFAULT_DIMENSION_LIMIT)
    }

    fn build(
        sites: usize,
        particles: usize,
        species_caps: Vec<usize>,
        limit: usize,
    ) -> Result<Self> {
        let completions = completion_table(sites, particles, &species_caps)?;
        let dim = completions[particles];
        if dim > limit as u64 {
            return Err(Error::Overflow(format!(
                "basis dimension {dim} exceeds limit {limit}"
            )));
        }
        let mode_caps: Vec<u8> = species_caps
            .iter()
            .flat_map(|&c| std::iter::repeat(c as u8).take(sites))
            .collect();
        let mut basis = Self {
            sites,
            particles,
            species_caps,
            mode_caps,
            completions,
            occupations: Vec::new(),
        };
        basis.enumerate(dim as usize);
        Ok(basis)
    }

    fn enumerate(&mut self, dim: usize) {
        let modes = self.modes();
        let mut out = Vec::with_capacity(dim * modes);
        let mut current = vec![0u8; modes];
        self.fill(0, self.particles, &mut current, &mut out);
        debug_assert_eq!(out.len(), dim * modes);
        self.occupations = out;
    }

    fn fill(&self, pos: usize, remaining: usize, current: &mut [u8], out: &mut Vec<u8>) {
        if pos == current.len() {
            out.extend_from_slice(current);
            return;
        }
        let cap = (self.mode_caps[pos] as usize).min(remaining);
        for v in 0..=cap {
            if self.completions_at(pos + 1, remaining - v) == 0 {
                continue;
            }
            current[pos] = v as u8;
            self.fill(pos + 1, remaining - v, current, out);
        }
        current[pos] = 0;
    }

    fn completions_at(&self, pos: usize, remaining: usize) -> u64 {
        self.completions[pos * (self.particles + 1) + remaining]
    }

    pub fn dim(&self) -> usize {
        self.occupations.len() / self.modes().max(1)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn species(&self) -> usize {
        self.species_caps.len()
    }

    pub fn modes(&self) -> usize {
        self.sites * self.species_caps.len()
    }

    pub fn species_caps(&self) -> &[usize] {
        &self.species_caps
    }

    /// Ladder caps; the exciton entry mirrors the photon one for a chain basis.
    pub fn caps(&self) -> Caps {
        let p = self.species_caps[0];
        Caps::new(p, *self.species_caps.get(1).unwrap_or(&p))
    }

    pub fn mode_cap(&self, mode: usize) -> usize {
        self.mode_caps[mode] as usize
    }

    /// All mode occupations of state `index`, species-major.
    #[inline]
    pub fn occupations(&self, index: usize) -> &[u8] {
        let m = self.modes();
        &self.occupations[index * m..(index + 1) * m]
    }

    /// Occupations of one species (0 = photon, 1 = exciton) in state `index`.
    #[inline]
    pub fn species_occupations(&self, index: usize, species: usize) -> &[u8] {
        let occ = self.occupations(index);
        &occ[species * self.sites..(species + 1) * self.sites]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> + '_ {
        self.occupations.chunks_exact(self.modes().max(1))
    }

    /// Ordinal of a concatenated occupation vector.
    pub fn rank_modes(&self, occ: &[u8]) -> Result<usize> {
        if occ.len() != self.modes() {
            return Err(Error::NotFound(format!(
                "expected {} mode occupations, got {}",
                self.modes(),
                occ.len()
            )));
        }
        let mut remaining = self.particles;
        let mut index = 0u64;
        for (pos, (&n, &cap)) in occ.iter().zip(&self.mode_caps).enumerate() {
            let n = n as usize;
            if n > cap as usize || n > remaining {
                return Err(Error::NotFound(format!(
                    "occupation {n} at mode {pos} violates cap {cap} or total {}",
                    self.particles
                )));
            }
            for v in 0..n {
                index += self.completions_at(pos + 1, remaining - v);
            }
            remaining -= n;
        }
        if remaining != 0 {
            return Err(Error::NotFound(format!(
                "state holds {} particles, sector has {}",
                self.particles - remaining,
                self.particles
            )));
        }
        Ok(index as usize)
    }

    /// Hot-path variant of [`rank_modes`](Self::rank_modes) for states
    /// already known to lie in the sector.
    #[inline]
    pub(crate) fn rank_unchecked(&self, occ: &[u8]) -> usize {
        let mut remaining = self.particles;
        let mut index = 0u64;
        let stride = self.particles + 1;
        for (pos, &n) in occ.iter().enumerate() {
            let row = &self.completions[(pos + 1) * stride..(pos + 2) * stride];
            for v in 0..n as usize {
                index += row[remaining - v];
            }
            remaining -= n as usize;
        }
        index as usize
    }

    /// Ordinal of a ladder state.
    pub fn rank(&self, state: &OccupationState) -> Result<usize> {
        if self.species() != 2 {
            return Err(Error::Mismatch("rank of a ladder state in a chain basis".into()));
        }
        if state.photon_counts.len() != self.sites || state.exciton_counts.len() != self.sites {
            return Err(Error::NotFound(format!(
                "state has {}+{} sites, basis has {}",
                state.photon_counts.len(),
                state.exciton_counts.len(),
                self.sites
            )));
        }
        self.rank_modes(&state.concatenated())
    }

    pub fn unrank(&self, index: usize) -> Result<OccupationState> {
        if index >= self.dim() {
            return Err(Error::NotFound(format!(
                "ordinal {index} outside dimension {}",
                self.dim()
            )));
        }
        if self.species() != 2 {
            return Err(Error::Mismatch("unrank to a ladder state in a chain basis".into()));
        }
        Ok(OccupationState::new(
            self.species_occupations(index, 0).to_vec(),
            self.species_occupations(index, 1).to_vec(),
        ))
    }

    /// Recomputes the occupation vector of `index` from the completion table
    /// alone, without touching the stored list.
    pub fn unrank_modes(&self, index: usize) -> Result<Vec<u8>> {
        if index >= self.dim() {
            return Err(Error::NotFound(format!(
                "ordinal {index} outside dimension {}",
                self.dim()
            )));
        }
        let mut rest = index as u64;
        let mut remaining = self.particles;
        let mut occ = Vec::with_capacity(self.modes());
        for pos in 0..self.modes() {
            let cap = (self.mode_caps[pos] as usize).min(remaining);
            let mut chosen = cap;
            for v in 0..=cap {
                let block = self.completions_at(pos + 1, remaining - v);
                if rest < block {
                    chosen = v;
                    break;
                }
                rest -= block;
            }
            occ.push(chosen as u8);
            remaining -= chosen;
        }
        Ok(occ)
    }
}

/// Dimension of the ladder sector, from capped stars-and-bars counts.
pub fn dimension(sites: usize, particles: usize, caps: Caps) -> Result<u64> {
    let table = completion_table(sites, particles, &[caps.photon, caps.exciton])?;
    Ok(table[particles])
}

fn completion_table(sites: usize, particles: usize, species_caps: &[usize]) -> Result<Vec<u64>> {
    if sites == 0 {
        return Err(Error::InvalidParameter("at least one site is required".into()));
    }
    for &c in species_caps {
        if c == 0 || c > u8::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "occupation cap {c} outside 1..=255"
            )));
        }
    }
    let capacity: usize = species_caps.iter().map(|c| c * sites).sum();
    if capacity < particles {
        return Err(Error::Capacity(format!(
            "{particles} particles do not fit in {sites} sites with caps {species_caps:?}"
        )));
    }
    let modes = sites * species_caps.len();
    let stride = particles + 1;
    let mut table = vec![0u64; (modes + 1) * stride];
    table[modes * stride] = 1;
    for pos in (0..modes).rev() {
        let cap = species_caps[pos / sites];
        for r in 0..=particles {
            let mut acc = 0u64;
            for v in 0..=cap.min(r) {
                acc = acc
                    .checked_add(table[(pos + 1) * stride + r - v])
                    .ok_or_else(|| Error::Overflow("sector dimension exceeds u64".into()))?;
            }
            table[pos * stride + r] = acc;
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute force: every vector in the capped box, filtered by total.
    fn brute_force(sites: usize, n: usize, caps: Caps) -> Vec<Vec<u8>> {
        let modes = 2 * sites;
        let cap_of = |m: usize| if m < sites { caps.photon } else { caps.exciton };
        let mut out = Vec::new();
        let mut v = vec![0u8; modes];
        loop {
            if v.iter().map(|&x| x as usize).sum::<usize>() == n {
                out.push(v.clone());
            }
            let mut m = modes;
            loop {
                if m == 0 {
                    return out;
                }
                m -= 1;
                if (v[m] as usize) < cap_of(m) {
                    v[m] += 1;
                    break;
                }
                v[m] = 0;
            }
        }
    }

    #[test]
    fn single_rung_single_excitation() {
        let b = FockBasis::ladder(1, 1, Caps::unbounded(1)).unwrap();
        assert_eq!(b.dim(), 2);
        let states: Vec<_> = (0..2).map(|i| b.unrank(i).unwrap()).collect();
        assert!(states.contains(&OccupationState::new(vec![1], vec![0])));
        assert!(states.contains(&OccupationState::new(vec![0], vec![1])));
    }

    #[test]
    fn two_rungs_two_excitations() {
        assert_eq!(FockBasis::ladder(2, 2, Caps::unbounded(2)).unwrap().dim(), 10);
        assert_eq!(FockBasis::ladder(2, 2, Caps::new(2, 1)).unwrap().dim(), 8);
        assert_eq!(dimension(2, 2, Caps::unbounded(2)).unwrap(), 10);
    }

    #[test]
    fn matches_brute_force_in_order() {
        for (l, n, caps) in [
            (2, 2, Caps::unbounded(2)),
            (3, 2, Caps::new(2, 1)),
            (3, 4, Caps::new(2, 2)),
            (4, 3, Caps::new(3, 1)),
        ] {
            let b = FockBasis::ladder(l, n, caps).unwrap();
            let expected = brute_force(l, n, caps);
            let got: Vec<Vec<u8>> = b.iter().map(|s| s.to_vec()).collect();
            assert_eq!(got, expected, "L={l} N={n} {caps:?}");
        }
    }

    #[test]
    fn first_state_has_rank_zero() {
        let b = FockBasis::ladder(3, 2, Caps::unbounded(2)).unwrap();
        let first = b.unrank(0).unwrap();
        assert_eq!(b.rank(&first).unwrap(), 0);
    }

    #[test]
    fn rank_rejects_states_outside_sector() {
        let b = FockBasis::ladder(3, 2, Caps::new(2, 1)).unwrap();
        let over_cap = OccupationState::new(vec![0, 0, 0], vec![2, 0, 0]);
        assert!(matches!(b.rank(&over_cap), Err(Error::NotFound(_))));
        let wrong_total = OccupationState::new(vec![1, 0, 0], vec![0, 0, 0]);
        assert!(matches!(b.rank(&wrong_total), Err(Error::NotFound(_))));
        let wrong_len = OccupationState::new(vec![1, 1], vec![0, 0]);
        assert!(matches!(b.rank(&wrong_len), Err(Error::NotFound(_))));
        assert!(b.unrank(b.dim()).is_err());
    }

    #[test]
    fn empty_sector_is_a_capacity_error() {
        assert!(matches!(
            FockBasis::ladder(2, 5, Caps::new(1, 1)),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(dimension(1, 3, Caps::new(1, 1)), Err(Error::Capacity(_))));
    }

    #[test]
    fn dimension_limit_is_enforced() {
        let err = FockBasis::ladder_with_limit(8, 4, Caps::unbounded(4), 100).unwrap_err();
        assert!(matches!(err, Error::Overflow(_)));
    }

    #[test]
    fn huge_sector_overflows_u64() {
        assert!(matches!(
            dimension(4000, 200, Caps::unbounded(200)),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn vacuum_sector() {
        let b = FockBasis::ladder(4, 0, Caps::new(1, 1)).unwrap();
        assert_eq!(b.dim(), 1);
        assert_eq!(b.rank_modes(&[0; 8]).unwrap(), 0);
    }

    #[test]
    fn chain_basis_counts() {
        // 3 bosons on 4 sites, unbounded: C(6,3) = 20; hard-core: C(4,3) = 4
        assert_eq!(FockBasis::chain(4, 3, 3).unwrap().dim(), 20);
        assert_eq!(FockBasis::chain(4, 3, 1).unwrap().dim(), 4);
    }

    #[test]
    fn hard_core_caps() {
        assert_eq!(Caps::hard_core(3), Caps::new(3, 1));
        assert_eq!(Caps::default_for(9), Caps::new(5, 5));
        assert_eq!(Caps::default_for(0), Caps::new(1, 1));
    }
}
