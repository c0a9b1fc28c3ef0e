//! Restarted Lanczos for the lowest eigenpair of a real symmetric operator.
//!
//! Every new Krylov vector is orthogonalized twice against all stored
//! vectors (and against any locked vectors supplied by the caller). When the
//! Krylov space reaches `krylov_dim` without converging, the iteration
//! restarts from the current Ritz vector.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::SparseOperator;

pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `y = A x`; `y` is overwritten.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for SparseOperator {
    fn dim(&self) -> usize {
        SparseOperator::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        SparseOperator::apply(self, x, y)
    }
}

/// Wraps a closure as a [`LinearOperator`].
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64])> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64], &mut [f64])> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Target for `‖Hv − Ev‖`.
    pub tol: f64,
    /// Measure `tol` in units of `max(1, ‖H‖)`, with `‖H‖` estimated from the
    /// Krylov recurrence. Needed when the spectrum spans many decades.
    pub relative_tol: bool,
    /// Budget of operator applications.
    pub max_iter: usize,
    /// Krylov vectors kept before a restart.
    pub krylov_dim: usize,
    pub seed: u64,
    /// Also converge the second eigenvalue and report the gap.
    pub check_degeneracy: bool,
    /// Gap below which the ground state is flagged as degenerate.
    pub degeneracy_tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            relative_tol: true,
            max_iter: 5000,
            krylov_dim: 80,
            seed: 0x5eed,
            check_degeneracy: false,
            degeneracy_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroundStateResult {
    pub energy: f64,
    /// Normalized eigenvector.
    pub state: Vec<f64>,
    pub residual_norm: f64,
    /// Operator applications used.
    pub iterations: usize,
    /// `E_1 − E_0`, when degeneracy checking was requested.
    pub gap: Option<f64>,
    pub degenerate: bool,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>], locked: &[Vec<f64>]) {
    for _ in 0..2 {
        for v in locked.iter().chain(basis) {
            let c = dot(v, w);
            axpy(-c, v, w);
        }
    }
}

fn random_vector(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect()
}

/// Lowest eigenpair starting from a seeded random vector.
pub fn lanczos_ground_state<A: LinearOperator + ?Sized>(
    op: &A,
    opts: &LanczosOptions,
) -> Result<GroundStateResult> {
    let start = random_vector(op.dim(), opts.seed);
    lanczos_ground_state_from(op, &start, opts)
}

/// Lowest eigenpair starting from `start` (need not be normalized).
pub fn lanczos_ground_state_from<A: LinearOperator + ?Sized>(
    op: &A,
    start: &[f64],
    opts: &LanczosOptions,
) -> Result<GroundStateResult> {
    if op.dim() == 0 {
        return Err(Error::InvalidParameter("operator of dimension 0".into()));
    }
    let ground = lowest_eigenpair(op, start, &[], opts)?.require_converged()?;
    let mut result = GroundStateResult {
        energy: ground.value,
        state: ground.vector,
        residual_norm: ground.residual,
        iterations: ground.applications,
        gap: None,
        degenerate: false,
    };
    if opts.check_degeneracy && op.dim() > 1 {
        let locked = vec![result.state.clone()];
        let start = random_vector(op.dim(), opts.seed.wrapping_add(1));
        let next = lowest_eigenpair(op, &start, &locked, opts)?.require_converged()?;
        result.iterations += next.applications;
        let gap = next.value - result.energy;
        result.gap = Some(gap);
        result.degenerate = gap < opts.degeneracy_tol;
    }
    Ok(result)
}

/// Like [`lanczos_ground_state_from`] but returns the best pair found when
/// the budget runs out instead of failing; compare `residual_norm` with the
/// tolerance to tell the two apart.
pub fn lanczos_lowest_best_effort<A: LinearOperator + ?Sized>(
    op: &A,
    start: &[f64],
    opts: &LanczosOptions,
) -> Result<GroundStateResult> {
    if op.dim() == 0 {
        return Err(Error::InvalidParameter("operator of dimension 0".into()));
    }
    let ground = lowest_eigenpair(op, start, &[], opts)?;
    Ok(GroundStateResult {
        energy: ground.value,
        state: ground.vector,
        residual_norm: ground.residual,
        iterations: ground.applications,
        gap: None,
        degenerate: false,
    })
}

struct Eigenpair {
    value: f64,
    vector: Vec<f64>,
    residual: f64,
    applications: usize,
    converged: bool,
}

impl Eigenpair {
    fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                iterations: self.applications,
                residual: self.residual,
            })
        }
    }
}

fn lowest_eigenpair<A: LinearOperator + ?Sized>(
    op: &A,
    start: &[f64],
    locked: &[Vec<f64>],
    opts: &LanczosOptions,
) -> Result<Eigenpair> {
    let n = op.dim();
    let mut v = start.to_vec();
    orthogonalize(&mut v, &[], locked);
    let mut nv = norm(&v);
    if !(nv > 1e-300) || !nv.is_finite() {
        v = random_vector(n, opts.seed ^ 0x9e37_79b9);
        orthogonalize(&mut v, &[], locked);
        nv = norm(&v);
    }
    if nv < 1e-300 {
        return Err(Error::InvalidParameter(
            "no direction left outside the locked vectors".into(),
        ));
    }
    v.iter_mut().for_each(|x| *x /= nv);

    let mut applications = 0;
    let mut best = (f64::NAN, v.clone(), f64::INFINITY);
    let mut w = vec![0.0; n];
    let mut scale = 1.0f64;
    let scaled = opts.relative_tol;
    let krylov_dim = opts.krylov_dim.max(2).min(n.saturating_sub(locked.len()).max(1));

    while applications < opts.max_iter {
        let mut basis: Vec<Vec<f64>> = vec![v.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let y = loop {
            let k = basis.len() - 1;
            op.apply(&basis[k], &mut w);
            applications += 1;
            let a = dot(&basis[k], &w);
            alpha.push(a);
            orthogonalize(&mut w, &basis, locked);
            let b = norm(&w);
            if scaled {
                scale = scale.max(a.abs()).max(b);
            }

            let exhausted = b <= 1e-14 * a.abs().max(1.0);
            let full = basis.len() >= krylov_dim || applications >= opts.max_iter;
            // the small eigenproblem is only solved every few steps
            if exhausted || full || k < 8 || k % 4 == 0 {
                let (_, y) = tridiagonal_lowest(&alpha, &beta);
                if b * y[k].abs() < 0.1 * opts.tol * scale || exhausted || full {
                    break y;
                }
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        };
        let mut x = vec![0.0; n];
        for (yi, vi) in y.iter().zip(&basis) {
            axpy(*yi, vi, &mut x);
        }
        orthogonalize(&mut x, &[], locked);
        let nx = norm(&x);
        x.iter_mut().for_each(|e| *e /= nx);

        op.apply(&x, &mut w);
        applications += 1;
        let energy = dot(&x, &w);
        axpy(-energy, &x, &mut w);
        // components along locked vectors are not part of the deflated problem
        orthogonalize(&mut w, &[], locked);
        let residual = norm(&w);
        if residual < best.2 {
            best = (energy, x.clone(), residual);
        }
        if residual <= opts.tol * scale {
            return Ok(Eigenpair {
                value: energy,
                vector: x,
                residual,
                applications,
                converged: true,
            });
        }
        v = x;
    }
    Ok(Eigenpair {
        value: best.0,
        vector: best.1,
        residual: best.2,
        applications,
        converged: false,
    })
}

/// Lowest eigenpair of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta`.
fn tridiagonal_lowest(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    if m == 1 {
        return (alpha[0], vec![1.0]);
    }
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (idx, &value) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    (value, eig.eigenvectors.column(idx).iter().copied().collect())
}
