//! Real-time propagation `e^{−i(H − E₀)t}` by short Lanczos recurrences.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::SparseOperator;

#[derive(Clone, Debug)]
pub struct PropagationOptions {
    /// Largest Krylov space per substep.
    pub krylov_dim: usize,
    /// Error estimate accepted per unit time.
    pub tol: f64,
    /// Smallest substep as a fraction of the requested step.
    pub min_fraction: f64,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            krylov_dim: 30,
            tol: 1e-10,
            min_fraction: 1e-4,
        }
    }
}

fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn cnorm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Propagator over a fixed step, reusing its buffers between calls.
pub struct Propagator<'a> {
    h: &'a SparseOperator,
    shift: f64,
    opts: PropagationOptions,
    basis: Vec<Vec<Complex64>>,
    w: Vec<Complex64>,
    /// Substeps taken so far.
    pub substeps: usize,
}

impl<'a> Propagator<'a> {
    /// Evolves with `H − shift`.
    pub fn new(h: &'a SparseOperator, shift: f64, opts: PropagationOptions) -> Self {
        Self {
            h,
            shift,
            opts,
            basis: Vec::new(),
            w: vec![Complex64::new(0.0, 0.0); h.dim()],
            substeps: 0,
        }
    }

    /// `φ ← e^{−i(H − shift)dt} φ`, split into as many substeps as the error
    /// estimate requires.
    pub fn step(&mut self, phi: &mut [Complex64], dt: f64) -> Result<()> {
        let mut remaining = dt;
        while remaining > 1e-15 * dt.abs() {
            let tau = self.substep(phi, remaining, dt)?;
            remaining -= tau;
            self.substeps += 1;
        }
        Ok(())
    }

    fn substep(&mut self, phi: &mut [Complex64], max_tau: f64, dt: f64) -> Result<f64> {
        let n = phi.len();
        let nrm = cnorm(phi);
        if nrm == 0.0 {
            return Ok(max_tau);
        }
        self.basis.clear();
        self.basis.push(phi.iter().map(|x| x / nrm).collect());
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let m_max = self.opts.krylov_dim.min(n).max(1);
        let mut last_beta;
        loop {
            let k = self.basis.len() - 1;
            self.h.apply_complex(&self.basis[k], &mut self.w);
            for (wi, vi) in self.w.iter_mut().zip(&self.basis[k]) {
                *wi -= self.shift * vi;
            }
            let a = cdot(&self.basis[k], &self.w).re;
            alpha.push(a);
            for _ in 0..2 {
                for v in &self.basis {
                    let c = cdot(v, &self.w);
                    for (wi, vi) in self.w.iter_mut().zip(v) {
                        *wi -= c * vi;
                    }
                }
            }
            let b = cnorm(&self.w);
            last_beta = b;
            if b < 1e-14 || self.basis.len() >= m_max {
                break;
            }
            beta.push(b);
            let next = self.w.iter().map(|x| x / b).collect();
            self.basis.push(next);
        }
        let m = alpha.len();
        let mut t = DMatrix::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let coeffs = |tau: f64| -> Vec<Complex64> {
            (0..m)
                .map(|r| {
                    (0..m)
                        .map(|c| {
                            let q = eig.eigenvectors[(r, c)] * eig.eigenvectors[(0, c)];
                            Complex64::from_polar(q, -eig.eigenvalues[c] * tau)
                        })
                        .sum()
                })
                .collect()
        };
        let mut tau = max_tau;
        let y = loop {
            let y = coeffs(tau);
            let err = last_beta * y[m - 1].norm();
            if last_beta < 1e-14 || err <= self.opts.tol * tau.abs() {
                break y;
            }
            tau *= 0.5;
            if tau.abs() < self.opts.min_fraction * dt.abs() {
                return Err(Error::NonConvergence {
                    iterations: self.substeps,
                    residual: err,
                });
            }
        };
        phi.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        for (c, v) in y.iter().zip(&self.basis) {
            let c = c * nrm;
            for (pi, vi) in phi.iter_mut().zip(v) {
                *pi += c * vi;
            }
        }
        Ok(tau)
    }
}
