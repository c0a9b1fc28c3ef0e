//! Two-site DMRG on the rung-merged ladder.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DMatrixView};
use serde::{Deserialize, Serialize};

use super::mpo::Mpo;
use super::site::{Charge, RungSpace};
use super::state::{Blocks, Bond, MpsState};
use crate::error::{Error, Result};
use crate::exact::lanczos::{lanczos_lowest_best_effort, FnOperator, LanczosOptions};
use crate::model::ModelParams;

/// Penalty strength used when number conservation is switched off.
pub const DEFAULT_PENALTY: f64 = 10.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DmrgOptions {
    pub chi_max: usize,
    pub n_sweeps: usize,
    /// Sweeps always run before the energy criterion may stop early.
    pub min_sweeps: usize,
    /// Largest discarded weight accepted at each truncation.
    pub truncation_cutoff: f64,
    /// Energy change per sweep below which the run counts as converged.
    pub energy_tol: f64,
    pub lanczos_tol: f64,
    pub lanczos_krylov_dim: usize,
    pub lanczos_max_iter: usize,
    pub seed: u64,
    /// Initial states per charge sector of the random start.
    pub initial_sector_dim: usize,
    /// `Some(λ)` drops the charge labels and adds `λ(N̂ − N)²` instead.
    pub penalty: Option<f64>,
    /// Largest merged-rung dimension accepted.
    pub max_local_dim: usize,
}

impl Default for DmrgOptions {
    fn default() -> Self {
        Self {
            chi_max: 64,
            n_sweeps: 12,
            min_sweeps: 3,
            truncation_cutoff: 1e-10,
            energy_tol: 1e-10,
            lanczos_tol: 1e-9,
            lanczos_krylov_dim: 40,
            lanczos_max_iter: 400,
            seed: 0x5eed,
            initial_sector_dim: 2,
            penalty: None,
            max_local_dim: 64,
        }
    }
}

impl DmrgOptions {
    pub fn with_chi(mut self, chi: usize) -> Self {
        self.chi_max = chi;
        self
    }

    pub fn with_sweeps(mut self, n: usize) -> Self {
        self.n_sweeps = n;
        self
    }

    pub fn with_penalty(mut self, lambda: f64) -> Self {
        self.penalty = Some(lambda);
        self
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRecord {
    pub sweep: usize,
    pub energy: f64,
    pub max_discarded_weight: f64,
    pub total_discarded_weight: f64,
    pub max_bond_dim: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TruncationReport {
    pub sweeps: Vec<SweepRecord>,
    /// Energy change of the last sweep was below `energy_tol`.
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct DmrgResult {
    pub energy: f64,
    pub state: MpsState,
    pub report: TruncationReport,
}

/// Per-channel environment blocks keyed by the ket charge; channel `w` maps
/// ket sector `q` to bra sector `q + charge(w)`.
pub(crate) type Env = Vec<BTreeMap<Charge, DMatrix<f64>>>;

/// MPO term with its local operator as a list of nonzeros `(s', s, v)`.
pub(crate) struct SparseTerm {
    from: usize,
    to: usize,
    entries: Vec<(usize, usize, f64)>,
}

pub(crate) fn sparse_terms(mpo: &Mpo) -> Vec<SparseTerm> {
    mpo.terms
        .iter()
        .map(|t| {
            let mut entries = Vec::new();
            for s in 0..t.op.ncols() {
                for s2 in 0..t.op.nrows() {
                    let v = t.op[(s2, s)];
                    if v != 0.0 {
                        entries.push((s2, s, v));
                    }
                }
            }
            SparseTerm { from: t.from, to: t.to, entries }
        })
        .collect()
}

fn add_into(map: &mut BTreeMap<Charge, DMatrix<f64>>, q: Charge, m: DMatrix<f64>) {
    match map.get_mut(&q) {
        Some(x) => *x += m,
        None => {
            map.insert(q, m);
        }
    }
}

pub(crate) fn left_boundary(mpo: &Mpo) -> Env {
    let mut env: Env = vec![BTreeMap::new(); mpo.width];
    env[0].insert(0, DMatrix::identity(1, 1));
    env
}

pub(crate) fn right_boundary(mpo: &Mpo, total: Charge) -> Env {
    let mut env: Env = vec![BTreeMap::new(); mpo.width];
    env[mpo.last()].insert(total, DMatrix::identity(1, 1));
    env
}

pub(crate) fn left_update(space: &RungSpace, mpo: &Mpo, terms: &[SparseTerm], env: &Env, a: &Blocks) -> Env {
    let mut out: Env = vec![BTreeMap::new(); mpo.width];
    for t in terms {
        let ca = mpo.channel_charge[t.from];
        for (&(s, ql), ket) in a {
            let Some(e) = env[t.from].get(&ql) else { continue };
            let mut tmp: Option<DMatrix<f64>> = None;
            let qr = ql + space.charge(s);
            for &(s2, s1, v) in &t.entries {
                if s1 != s {
                    continue;
                }
                let Some(bra) = a.get(&(s2, ql + ca)) else { continue };
                let tmp = tmp.get_or_insert_with(|| e * ket);
                add_into(&mut out[t.to], qr, v * bra.transpose() * &*tmp);
            }
        }
    }
    out
}

pub(crate) fn right_update(space: &RungSpace, mpo: &Mpo, terms: &[SparseTerm], env: &Env, b: &Blocks) -> Env {
    let mut out: Env = vec![BTreeMap::new(); mpo.width];
    for t in terms {
        let ca = mpo.channel_charge[t.from];
        for (&(s, ql), ket) in b {
            let qr = ql + space.charge(s);
            let Some(e) = env[t.to].get(&qr) else { continue };
            let mut tmp: Option<DMatrix<f64>> = None;
            for &(s2, s1, v) in &t.entries {
                if s1 != s {
                    continue;
                }
                let Some(bra) = b.get(&(s2, ql + ca)) else { continue };
                let tmp = tmp.get_or_insert_with(|| e * ket.transpose());
                add_into(&mut out[t.from], ql, v * bra * &*tmp);
            }
        }
    }
    out
}

/// Two-site operator `Σ_b W[a][b] ⊗ W[b][c]` for every channel pair `(a, c)`,
/// grouped by input states.
struct TwoSiteTerms {
    pairs: Vec<(usize, usize, Vec<((usize, usize), Vec<(usize, usize, f64)>)>)>,
}

impl TwoSiteTerms {
    fn new(terms: &[SparseTerm]) -> Self {
        let mut acc: BTreeMap<(usize, usize), BTreeMap<(usize, usize), BTreeMap<(usize, usize), f64>>> =
            BTreeMap::new();
        for t1 in terms {
            for t2 in terms.iter().filter(|t| t.from == t1.to) {
                let slot = acc.entry((t1.from, t2.to)).or_default();
                for &(o1, i1, v1) in &t1.entries {
                    for &(o2, i2, v2) in &t2.entries {
                        *slot.entry((i1, i2)).or_default().entry((o1, o2)).or_default() += v1 * v2;
                    }
                }
            }
        }
        let pairs = acc
            .into_iter()
            .map(|((a, c), inputs)| {
                let inputs = inputs
                    .into_iter()
                    .map(|(i, outs)| (i, outs.into_iter().filter(|e| e.1 != 0.0).map(|((o1, o2), v)| (o1, o2, v)).collect()))
                    .collect();
                (a, c, inputs)
            })
            .collect();
        Self { pairs }
    }
}

/// Blocks of the two-site wavefunction `θ[(s1, s2, ql)]` laid out in one vector.
struct ThetaLayout {
    blocks: Vec<ThetaBlock>,
    index: HashMap<(usize, usize, Charge), usize>,
    by_input: HashMap<(usize, usize), Vec<usize>>,
    len: usize,
}

struct ThetaBlock {
    s1: usize,
    s2: usize,
    ql: Charge,
    qr: Charge,
    offset: usize,
    rows: usize,
    cols: usize,
}

impl ThetaLayout {
    fn new(space: &RungSpace, left: &Bond, right: &Bond) -> Self {
        let d = space.dim();
        let mut blocks = Vec::new();
        let mut offset = 0;
        for (&ql, &rows) in &left.sectors {
            for s1 in 0..d {
                for s2 in 0..d {
                    let qr = ql + space.charge(s1) + space.charge(s2);
                    let cols = right.dim_of(qr);
                    if cols == 0 || rows == 0 {
                        continue;
                    }
                    blocks.push(ThetaBlock { s1, s2, ql, qr, offset, rows, cols });
                    offset += rows * cols;
                }
            }
        }
        let index = blocks.iter().enumerate().map(|(k, b)| ((b.s1, b.s2, b.ql), k)).collect();
        let mut by_input: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (k, b) in blocks.iter().enumerate() {
            by_input.entry((b.s1, b.s2)).or_default().push(k);
        }
        Self { blocks, index, by_input, len: offset }
    }

    fn view<'a>(&self, x: &'a [f64], k: usize) -> DMatrixView<'a, f64> {
        let b = &self.blocks[k];
        DMatrixView::from_slice(&x[b.offset..b.offset + b.rows * b.cols], b.rows, b.cols)
    }
}

/// One `L[a] θ_k R[c]ᵀ` product of the effective Hamiltonian and the
/// output blocks it feeds.
struct PlanItem<'a> {
    left: &'a DMatrix<f64>,
    right_t: usize,
    input: usize,
    outputs: Vec<(usize, f64)>,
}

/// Two-site effective Hamiltonian with all block lookups resolved up front.
struct Effective<'a> {
    layout: &'a ThetaLayout,
    items: Vec<PlanItem<'a>>,
    right_t: Vec<DMatrix<f64>>,
    scratch: RefCell<Vec<(DMatrix<f64>, DMatrix<f64>)>>,
}

impl<'a> Effective<'a> {
    fn new(layout: &'a ThetaLayout, two: &TwoSiteTerms, left: &'a Env, right: &Env, charges: &[Charge]) -> Self {
        let mut right_t = Vec::new();
        let mut right_index: HashMap<(usize, Charge), usize> = HashMap::new();
        let mut items = Vec::new();
        let mut scratch = Vec::new();
        for (a, c, inputs) in &two.pairs {
            let ca = charges[*a];
            for (input, outs) in inputs {
                let Some(ks) = layout.by_input.get(input) else { continue };
                for &k in ks {
                    let b = &layout.blocks[k];
                    let Some(el) = left[*a].get(&b.ql) else { continue };
                    let Some(er) = right[*c].get(&b.qr) else { continue };
                    let outputs: Vec<(usize, f64)> = outs
                        .iter()
                        .filter_map(|&(o1, o2, v)| layout.index.get(&(o1, o2, b.ql + ca)).map(|&t| (t, v)))
                        .collect();
                    if outputs.is_empty() {
                        continue;
                    }
                    let rt = *right_index.entry((*c, b.qr)).or_insert_with(|| {
                        right_t.push(er.transpose());
                        right_t.len() - 1
                    });
                    scratch.push((DMatrix::zeros(el.nrows(), b.cols), DMatrix::zeros(el.nrows(), er.nrows())));
                    items.push(PlanItem { left: el, right_t: rt, input: k, outputs });
                }
            }
        }
        Self { layout, items, right_t, scratch: RefCell::new(scratch) }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        let mut scratch = self.scratch.borrow_mut();
        for (item, (t1, t2)) in self.items.iter().zip(scratch.iter_mut()) {
            t1.gemm(1.0, item.left, &self.layout.view(x, item.input), 0.0);
            t2.gemm(1.0, t1, &self.right_t[item.right_t], 0.0);
            for &(t, v) in &item.outputs {
                let tb = &self.layout.blocks[t];
                let out = &mut y[tb.offset..tb.offset + tb.rows * tb.cols];
                for (o, &m) in out.iter_mut().zip(t2.as_slice()) {
                    *o += v * m;
                }
            }
        }
    }
}

fn build_theta(space: &RungSpace, layout: &ThetaLayout, a: &Blocks, b: &Blocks) -> Vec<f64> {
    let mut theta = vec![0.0; layout.len];
    for (&(s1, ql), ma) in a {
        let qm = ql + space.charge(s1);
        for s2 in 0..space.dim() {
            let Some(mb) = b.get(&(s2, qm)) else { continue };
            let Some(&k) = layout.index.get(&(s1, s2, ql)) else { continue };
            let blk = &layout.blocks[k];
            let prod = ma * mb;
            for (o, &v) in theta[blk.offset..blk.offset + blk.rows * blk.cols].iter_mut().zip(prod.as_slice()) {
                *o += v;
            }
        }
    }
    theta
}

pub(crate) struct Split {
    pub left: Blocks,
    pub right: Blocks,
    pub bond: Bond,
    pub discarded: f64,
}

/// SVD of θ sector by sector in the middle charge, truncated to `chi_max`
/// states and `cutoff` discarded weight. The singular values go to the
/// right tensor when `absorb_right`, else to the left one.
fn split_theta(
    space: &RungSpace,
    layout: &ThetaLayout,
    theta: &[f64],
    chi_max: usize,
    cutoff: f64,
    absorb_right: bool,
) -> Split {
    struct Sector {
        rows: Vec<(usize, Charge, usize, usize)>,
        cols: Vec<(usize, Charge, usize, usize)>,
        nrows: usize,
        ncols: usize,
    }
    let mut sectors: BTreeMap<Charge, Sector> = BTreeMap::new();
    for b in &layout.blocks {
        let qm = b.ql + space.charge(b.s1);
        let sec = sectors.entry(qm).or_insert_with(|| Sector { rows: vec![], cols: vec![], nrows: 0, ncols: 0 });
        if !sec.rows.iter().any(|r| r.0 == b.s1 && r.1 == b.ql) {
            sec.rows.push((b.s1, b.ql, sec.nrows, b.rows));
            sec.nrows += b.rows;
        }
        if !sec.cols.iter().any(|c| c.0 == b.s2 && c.1 == b.qr) {
            sec.cols.push((b.s2, b.qr, sec.ncols, b.cols));
            sec.ncols += b.cols;
        }
    }
    let mut decomps = Vec::new();
    let mut all: Vec<(f64, usize, usize)> = Vec::new();
    for (qm, sec) in &sectors {
        let mut m = DMatrix::zeros(sec.nrows, sec.ncols);
        for b in layout.blocks.iter().filter(|b| b.ql + space.charge(b.s1) == *qm) {
            let r = sec.rows.iter().find(|r| r.0 == b.s1 && r.1 == b.ql).unwrap();
            let c = sec.cols.iter().find(|c| c.0 == b.s2 && c.1 == b.qr).unwrap();
            let k = layout.index[&(b.s1, b.s2, b.ql)];
            m.view_mut((r.2, c.2), (b.rows, b.cols)).copy_from(&layout.view(theta, k));
        }
        let svd = m.svd(true, true);
        let idx = decomps.len();
        for (j, &s) in svd.singular_values.iter().enumerate() {
            all.push((s, idx, j));
        }
        decomps.push((*qm, svd));
    }
    all.sort_by(|x, y| y.0.total_cmp(&x.0));
    let total: f64 = all.iter().map(|e| e.0 * e.0).sum();
    let mut keep = all.len();
    let mut tail = 0.0;
    while keep > 1 {
        let w = all[keep - 1].0 * all[keep - 1].0;
        if tail + w > cutoff * total {
            break;
        }
        tail += w;
        keep -= 1;
    }
    let keep = keep.min(chi_max.max(1));
    let discarded: f64 = all[keep..].iter().map(|e| e.0 * e.0).sum::<f64>() / total.max(f64::MIN_POSITIVE);
    let kept_norm = all[..keep].iter().map(|e| e.0 * e.0).sum::<f64>().sqrt();

    let mut chosen: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(_, idx, j) in &all[..keep] {
        chosen.entry(idx).or_default().push(j);
    }
    let mut left = Blocks::new();
    let mut right = Blocks::new();
    let mut bond = Bond::default();
    for (idx, mut js) in chosen {
        js.sort_unstable();
        let (qm, svd) = &decomps[idx];
        let sec = &sectors[qm];
        let u = svd.u.as_ref().unwrap().select_columns(js.iter());
        let mut vt = svd.v_t.as_ref().unwrap().select_rows(js.iter());
        let mut u = u;
        for (r, &j) in js.iter().enumerate() {
            let s = svd.singular_values[j] / kept_norm;
            if absorb_right {
                vt.row_mut(r).scale_mut(s);
            } else {
                u.column_mut(r).scale_mut(s);
            }
        }
        bond.sectors.insert(*qm, js.len());
        for &(s1, ql, off, n) in &sec.rows {
            left.insert((s1, ql), u.rows(off, n).into_owned());
        }
        for &(s2, _, off, n) in &sec.cols {
            right.insert((s2, *qm), vt.columns(off, n).into_owned());
        }
    }
    Split { left, right, bond, discarded }
}

/// Ground state of the ladder with open boundaries by two-site DMRG.
pub fn dmrg_ground_state(params: &ModelParams, opts: &DmrgOptions) -> Result<DmrgResult> {
    params.validate()?;
    let caps = params.effective_caps();
    let space = RungSpace::new(caps, opts.penalty.is_none());
    if space.dim() > opts.max_local_dim {
        return Err(Error::Capacity(format!(
            "merged rung dimension {} exceeds the limit {}",
            space.dim(),
            opts.max_local_dim
        )));
    }
    if params.sites < 2 {
        return Err(Error::InvalidParameter("DMRG needs at least two rungs".into()));
    }
    let mpo = Mpo::ladder(params, &space, opts.penalty)?;
    let state = MpsState::random(space, params.sites, params.particles, opts.initial_sector_dim, opts.seed)?;
    run_dmrg(&mpo, state, opts)
}

/// Sweeps starting from `state`, which must have its center on site 0.
pub fn run_dmrg(mpo: &Mpo, mut state: MpsState, opts: &DmrgOptions) -> Result<DmrgResult> {
    let l = state.sites();
    if l < 2 {
        return Err(Error::InvalidParameter("DMRG needs at least two sites".into()));
    }
    state.move_center(0);
    let space = state.space.clone();
    let terms = sparse_terms(mpo);
    let two = TwoSiteTerms::new(&terms);
    let lanczos = LanczosOptions {
        tol: opts.lanczos_tol,
        relative_tol: false,
        max_iter: opts.lanczos_max_iter,
        krylov_dim: opts.lanczos_krylov_dim,
        seed: opts.seed,
        ..LanczosOptions::default()
    };

    let mut lenv: Vec<Env> = vec![Vec::new(); l + 1];
    let mut renv: Vec<Env> = vec![Vec::new(); l + 1];
    lenv[0] = left_boundary(mpo);
    renv[l] = right_boundary(mpo, state.total_charge());
    for i in (1..l).rev() {
        renv[i] = right_update(&space, mpo, &terms, &renv[i + 1], &state.tensors[i]);
    }

    let mut records: Vec<SweepRecord> = Vec::new();
    let mut energy = f64::INFINITY;
    let mut converged = false;
    for sweep in 0..opts.n_sweeps {
        // loose eigensolves while the sweep energy still moves a lot
        let step_tol = match records.as_slice() {
            [] => 1e-4,
            [.., a, b] => (0.1 * (a.energy - b.energy).abs()).clamp(lanczos.tol, 1e-4),
            [_] => 1e-5,
        };
        let step_opts = LanczosOptions { tol: step_tol.max(lanczos.tol), ..lanczos.clone() };
        let mut max_disc: f64 = 0.0;
        let mut tot_disc = 0.0;
        let order: Vec<(usize, bool)> = (0..l - 1).map(|i| (i, true)).chain((0..l - 1).rev().map(|i| (i, false))).collect();
        for (i, moving_right) in order {
            let layout = ThetaLayout::new(&space, &state.bonds[i], &state.bonds[i + 2]);
            let start = build_theta(&space, &layout, &state.tensors[i], &state.tensors[i + 1]);
            let eff = Effective::new(&layout, &two, &lenv[i], &renv[i + 2], &mpo.channel_charge);
            let op = FnOperator::new(layout.len, |x: &[f64], y: &mut [f64]| eff.apply(x, y));
            let gs = lanczos_lowest_best_effort(&op, &start, &step_opts)?;
            energy = gs.energy + mpo.constant;
            let split = split_theta(&space, &layout, &gs.state, opts.chi_max, opts.truncation_cutoff, moving_right);
            max_disc = max_disc.max(split.discarded);
            tot_disc += split.discarded;
            state.tensors[i] = split.left;
            state.tensors[i + 1] = split.right;
            state.bonds[i + 1] = split.bond;
            if moving_right {
                state.center = i + 1;
                lenv[i + 1] = left_update(&space, mpo, &terms, &lenv[i], &state.tensors[i]);
            } else {
                state.center = i;
                renv[i + 1] = right_update(&space, mpo, &terms, &renv[i + 2], &state.tensors[i + 1]);
            }
        }
        let prev = records.last().map(|r| r.energy);
        records.push(SweepRecord {
            sweep,
            energy,
            max_discarded_weight: max_disc,
            total_discarded_weight: tot_disc,
            max_bond_dim: state.max_bond_dim(),
        });
        if let Some(p) = prev {
            if (p - energy).abs() < opts.energy_tol && sweep + 1 >= opts.min_sweeps {
                converged = true;
                break;
            }
        }
    }
    Ok(DmrgResult {
        energy,
        state,
        report: TruncationReport { sweeps: records, converged },
    })
}
