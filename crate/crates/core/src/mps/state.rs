//! Block-sparse matrix-product states with a particle-number label on every
//! bond index.
//!
//! The label of a bond is the number of particles on the sites to its left.
//! A site tensor `A[s]` maps left sector `q` to right sector `q + charge(s)`,
//! so only the blocks `(s, q)` with both sectors present are stored.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::site::{Charge, RungSpace};
use crate::error::{Error, Result};

/// Sector dimensions of one bond, keyed by charge.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Bond {
    pub sectors: BTreeMap<Charge, usize>,
}

impl Bond {
    pub fn single(q: Charge) -> Self {
        let mut sectors = BTreeMap::new();
        sectors.insert(q, 1);
        Self { sectors }
    }

    pub fn dim_of(&self, q: Charge) -> usize {
        self.sectors.get(&q).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.sectors.values().sum()
    }

    fn prune(&mut self) {
        self.sectors.retain(|_, d| *d > 0);
    }
}

/// Blocks of one site tensor keyed by `(local state, left charge)`.
pub type Blocks = BTreeMap<(usize, Charge), DMatrix<f64>>;

#[derive(Clone, Debug)]
pub struct MpsState {
    pub space: RungSpace,
    pub particles: usize,
    /// `L + 1` bonds including the two trivial boundary bonds.
    pub bonds: Vec<Bond>,
    pub tensors: Vec<Blocks>,
    /// Sites left of it are left-isometric, sites right of it right-isometric.
    pub center: usize,
}

impl MpsState {
    pub fn sites(&self) -> usize {
        self.tensors.len()
    }

    /// Charge carried by the right boundary bond.
    pub fn total_charge(&self) -> Charge {
        if self.space.conserve {
            self.particles as Charge
        } else {
            0
        }
    }

    /// Dimensions of the `L − 1` internal bonds.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.bonds[1..self.sites()].iter().map(Bond::total).collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Random state in the sector, right-canonical with the center on site 0.
    /// Each allowed charge starts with up to `sector_dim` states.
    pub fn random(space: RungSpace, sites: usize, particles: usize, sector_dim: usize, seed: u64) -> Result<Self> {
        if sites == 0 {
            return Err(Error::InvalidParameter("at least one site is required".into()));
        }
        let qmax = space.max_particles();
        if particles > qmax * sites {
            return Err(Error::Capacity(format!(
                "{particles} particles exceed {sites} rungs holding at most {qmax} each"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bonds: Vec<Bond> = (0..=sites)
            .map(|k| {
                if !space.conserve {
                    let mut b = Bond::single(0);
                    if k != 0 && k != sites {
                        b.sectors.insert(0, sector_dim.max(1));
                    }
                    return b;
                }
                if k == 0 {
                    return Bond::single(0);
                }
                if k == sites {
                    return Bond::single(particles as Charge);
                }
                let lo = particles.saturating_sub(qmax * (sites - k));
                let hi = particles.min(qmax * k);
                let mut b = Bond::default();
                for q in lo..=hi {
                    b.sectors.insert(q as Charge, sector_dim.max(1));
                }
                b
            })
            .collect();
        let mut tensors = Vec::with_capacity(sites);
        for i in 0..sites {
            let mut blocks = Blocks::new();
            for (&ql, &dl) in &bonds[i].sectors {
                for s in 0..space.dim() {
                    let dr = bonds[i + 1].dim_of(ql + space.charge(s));
                    if dr > 0 {
                        blocks.insert((s, ql), DMatrix::from_fn(dl, dr, |_, _| rng.gen::<f64>() - 0.5));
                    }
                }
            }
            tensors.push(blocks);
        }
        let mut state = Self {
            space,
            particles,
            bonds,
            tensors,
            center: sites - 1,
        };
        state.move_center(0);
        state.normalize();
        Ok(state)
    }

    /// Scales the center tensor to unit norm and returns the previous norm.
    pub fn normalize(&mut self) -> f64 {
        let c = self.center;
        let n = self.tensors[c].values().map(|m| m.norm_squared()).sum::<f64>().sqrt();
        if n > 0.0 {
            for m in self.tensors[c].values_mut() {
                *m /= n;
            }
        }
        n
    }

    pub fn move_center(&mut self, target: usize) {
        assert!(target < self.sites());
        while self.center < target {
            self.shift_right();
        }
        while self.center > target {
            self.shift_left();
        }
    }

    /// Left-orthonormalizes the center site and moves the center one site right.
    fn shift_right(&mut self) {
        let i = self.center;
        let groups = group_rows(&self.space, &self.tensors[i], &self.bonds[i], &self.bonds[i + 1]);
        let mut new_blocks = Blocks::new();
        let mut carry: BTreeMap<Charge, DMatrix<f64>> = BTreeMap::new();
        let mut new_bond = Bond::default();
        for (qr, g) in groups {
            let qr_dec = g.matrix.clone().qr();
            let q = qr_dec.q();
            let r = qr_dec.r();
            let k = q.ncols();
            for &(s, ql, off, rows) in &g.parts {
                new_blocks.insert((s, ql), q.rows(off, rows).into_owned());
            }
            new_bond.sectors.insert(qr, k);
            carry.insert(qr, r);
        }
        new_bond.prune();
        self.tensors[i] = new_blocks;
        let next = std::mem::take(&mut self.tensors[i + 1]);
        self.tensors[i + 1] = next
            .into_iter()
            .filter_map(|((s, ql), m)| carry.get(&ql).map(|r| ((s, ql), r * m)))
            .filter(|(_, m)| m.nrows() > 0)
            .collect();
        self.bonds[i + 1] = new_bond;
        self.center = i + 1;
    }

    /// Right-orthonormalizes the center site and moves the center one site left.
    fn shift_left(&mut self) {
        let i = self.center;
        let groups = group_cols(&self.space, &self.tensors[i], &self.bonds[i], &self.bonds[i + 1]);
        let mut new_blocks = Blocks::new();
        let mut carry: BTreeMap<Charge, DMatrix<f64>> = BTreeMap::new();
        let mut new_bond = Bond::default();
        for (ql, g) in groups {
            // M = Rᵀ Qᵀ from the QR of Mᵀ
            let qr_dec = g.matrix.transpose().qr();
            let qt = qr_dec.q().transpose();
            let rt = qr_dec.r().transpose();
            let k = qt.nrows();
            for &(s, _, off, cols) in &g.parts {
                new_blocks.insert((s, ql), qt.columns(off, cols).into_owned());
            }
            new_bond.sectors.insert(ql, k);
            carry.insert(ql, rt);
        }
        new_bond.prune();
        self.tensors[i] = new_blocks;
        let space = self.space.clone();
        let prev = std::mem::take(&mut self.tensors[i - 1]);
        self.tensors[i - 1] = prev
            .into_iter()
            .filter_map(|((s, ql), m)| {
                let qr = ql + space.charge(s);
                carry.get(&qr).map(|r| ((s, ql), m * r))
            })
            .filter(|(_, m)| m.ncols() > 0)
            .collect();
        self.bonds[i] = new_bond;
        self.center = i - 1;
    }

    /// `⟨ψ|ψ⟩` by full contraction.
    pub fn norm_squared(&self) -> f64 {
        let mut env: BTreeMap<Charge, DMatrix<f64>> = BTreeMap::new();
        env.insert(0, DMatrix::identity(1, 1));
        for i in 0..self.sites() {
            env = transfer(&self.space, &self.tensors[i], &env, None);
        }
        env.values().map(|m| m.trace()).sum()
    }

    /// Largest deviation of `Σ_s A[s]ᵀA[s]` (left of center) or `Σ_s B[s]B[s]ᵀ`
    /// (right of center) from the identity.
    pub fn isometry_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.sites() {
            if i < self.center {
                let mut acc: BTreeMap<Charge, DMatrix<f64>> = BTreeMap::new();
                for (&(s, ql), m) in &self.tensors[i] {
                    let qr = ql + self.space.charge(s);
                    let e = acc.entry(qr).or_insert_with(|| DMatrix::zeros(m.ncols(), m.ncols()));
                    *e += m.transpose() * m;
                }
                for m in acc.values() {
                    worst = worst.max((m - DMatrix::identity(m.nrows(), m.ncols())).abs().max());
                }
            } else if i > self.center {
                let mut acc: BTreeMap<Charge, DMatrix<f64>> = BTreeMap::new();
                for (&(_, ql), m) in &self.tensors[i] {
                    let e = acc.entry(ql).or_insert_with(|| DMatrix::zeros(m.nrows(), m.nrows()));
                    *e += m * m.transpose();
                }
                for m in acc.values() {
                    worst = worst.max((m - DMatrix::identity(m.nrows(), m.ncols())).abs().max());
                }
            }
        }
        worst
    }

    /// Schmidt values across the bond between sites `bond` and `bond + 1`,
    /// sorted descending. Moves the canonical center to `bond + 1`.
    pub fn schmidt_values(&mut self, bond: usize) -> Result<Vec<f64>> {
        if bond + 1 >= self.sites() {
            return Err(Error::Range(format!(
                "bond {bond} outside 0..{}",
                self.sites().saturating_sub(1)
            )));
        }
        self.move_center(bond + 1);
        let i = self.center;
        let groups = group_cols(&self.space, &self.tensors[i], &self.bonds[i], &self.bonds[i + 1]);
        let mut out = Vec::new();
        for g in groups.into_values() {
            out.extend(g.matrix.singular_values().iter().copied());
        }
        out.sort_by(|a, b| b.total_cmp(a));
        Ok(out)
    }

    /// Amplitude of a product configuration, given as rung states per site.
    pub fn amplitude(&self, config: &[usize]) -> f64 {
        let mut q: Charge = 0;
        let mut v = DMatrix::identity(1, 1);
        for (i, &s) in config.iter().enumerate() {
            match self.tensors[i].get(&(s, q)) {
                Some(m) => v = v * m,
                None => return 0.0,
            }
            q += self.space.charge(s);
        }
        v[(0, 0)]
    }
}

/// Rows of all blocks sharing a right charge (or columns sharing a left
/// charge), stacked into one matrix.
pub(crate) struct Group {
    pub matrix: DMatrix<f64>,
    /// `(s, ql, offset, extent)` of each stacked block.
    pub parts: Vec<(usize, Charge, usize, usize)>,
}

pub(crate) fn group_rows(space: &RungSpace, blocks: &Blocks, left: &Bond, right: &Bond) -> BTreeMap<Charge, Group> {
    let mut layout: BTreeMap<Charge, Vec<(usize, Charge, usize, usize)>> = BTreeMap::new();
    let mut rows: BTreeMap<Charge, usize> = BTreeMap::new();
    for &(s, ql) in blocks.keys() {
        let qr = ql + space.charge(s);
        let r = rows.entry(qr).or_insert(0);
        let dl = left.dim_of(ql);
        layout.entry(qr).or_default().push((s, ql, *r, dl));
        *r += dl;
    }
    layout
        .into_iter()
        .map(|(qr, parts)| {
            let mut m = DMatrix::zeros(rows[&qr], right.dim_of(qr));
            for &(s, ql, off, n) in &parts {
                m.rows_mut(off, n).copy_from(&blocks[&(s, ql)]);
            }
            (qr, Group { matrix: m, parts })
        })
        .collect()
}

pub(crate) fn group_cols(space: &RungSpace, blocks: &Blocks, left: &Bond, right: &Bond) -> BTreeMap<Charge, Group> {
    let mut layout: BTreeMap<Charge, Vec<(usize, Charge, usize, usize)>> = BTreeMap::new();
    let mut cols: BTreeMap<Charge, usize> = BTreeMap::new();
    for &(s, ql) in blocks.keys() {
        let qr = ql + space.charge(s);
        let c = cols.entry(ql).or_insert(0);
        let dr = right.dim_of(qr);
        layout.entry(ql).or_default().push((s, ql, *c, dr));
        *c += dr;
    }
    layout
        .into_iter()
        .map(|(ql, parts)| {
            let mut m = DMatrix::zeros(left.dim_of(ql), cols[&ql]);
            for &(s, q, off, n) in &parts {
                m.columns_mut(off, n).copy_from(&blocks[&(s, q)]);
            }
            (ql, Group { matrix: m, parts })
        })
        .collect()
}

/// One step of `E ↦ Σ_{s',s} op[s',s] A[s']ᵀ E A[s]` for a charge-neutral
/// local operator (`None` = identity). `E` is keyed by the charge of the bond.
pub(crate) fn transfer(
    space: &RungSpace,
    blocks: &Blocks,
    env: &BTreeMap<Charge, DMatrix<f64>>,
    op: Option<&DMatrix<f64>>,
) -> BTreeMap<Charge, DMatrix<f64>> {
    let mut out: BTreeMap<Charge, DMatrix<f64>> = BTreeMap::new();
    for (&(s, ql), ket) in blocks {
        let Some(e) = env.get(&ql) else { continue };
        let ek = e * ket;
        let qr = ql + space.charge(s);
        let mut add = |coef: f64, bra: &DMatrix<f64>| {
            let v = coef * bra.transpose() * &ek;
            match out.get_mut(&qr) {
                Some(x) => *x += v,
                None => {
                    out.insert(qr, v);
                }
            }
        };
        match op {
            None => add(1.0, ket),
            Some(o) => {
                for s2 in 0..space.dim() {
                    let c = o[(s2, s)];
                    if c != 0.0 && space.charge(s2) == space.charge(s) {
                        if let Some(bra) = blocks.get(&(s2, ql)) {
                            add(c, bra);
                        }
                    }
                }
            }
        }
    }
    out
}
