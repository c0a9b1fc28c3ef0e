//! Matrix-product operator of the rung-merged ladder.

use nalgebra::DMatrix;

use super::site::{Charge, RungSpace};
use crate::error::{Error, Result};
use crate::model::{Boundary, ModelParams};

/// Nonzero entry `W[a][b]` of an MPO tensor, a local operator.
#[derive(Clone, Debug)]
pub struct MpoTerm {
    pub from: usize,
    pub to: usize,
    pub op: DMatrix<f64>,
}

/// Upper-triangular MPO with channel 0 = "nothing placed yet" and the last
/// channel = "all terms complete". Every site carries the same tensor.
#[derive(Clone, Debug)]
pub struct Mpo {
    pub sites: usize,
    pub width: usize,
    /// Change of bra particle number over ket particle number carried by each
    /// channel.
    pub channel_charge: Vec<Charge>,
    pub terms: Vec<MpoTerm>,
    /// Scalar added to every energy (from the number penalty).
    pub constant: f64,
}

impl Mpo {
    pub fn last(&self) -> usize {
        self.width - 1
    }

    /// Ladder Hamiltonian on open boundaries. With `penalty = Some(λ)` the
    /// term `λ(N̂ − N)²` is added for use without charge labels.
    pub fn ladder(params: &ModelParams, space: &RungSpace, penalty: Option<f64>) -> Result<Self> {
        params.validate()?;
        if params.boundary != Boundary::Open {
            return Err(Error::InvalidParameter(
                "matrix-product states support open boundaries only".into(),
            ));
        }
        let a = space.photon_lower();
        let ad = space.photon_raise();
        let id = space.identity();
        let mut h = space.rung_hamiltonian(params);
        let j = params.hopping;
        let mut terms = vec![
            MpoTerm { from: 0, to: 0, op: id.clone() },
            MpoTerm { from: 0, to: 1, op: ad.clone() },
            MpoTerm { from: 0, to: 2, op: a.clone() },
            MpoTerm { from: 1, to: 3, op: -j * &a },
            MpoTerm { from: 2, to: 3, op: -j * &ad },
        ];
        let (width, channel_charge, constant) = match penalty {
            None => {
                let c = if space.conserve { 1 } else { 0 };
                (4, vec![0, c, -c, 0], 0.0)
            }
            Some(lambda) => {
                if space.conserve {
                    return Err(Error::InvalidParameter(
                        "number penalty is meant for the unlabelled rung space".into(),
                    ));
                }
                let n = space.total_number();
                let target = params.particles as f64;
                h += lambda * (&n * &n - 2.0 * target * &n);
                for t in terms.iter_mut().filter(|t| t.to == 3) {
                    t.to = 4;
                }
                terms.push(MpoTerm { from: 0, to: 3, op: n.clone() });
                terms.push(MpoTerm { from: 3, to: 3, op: id.clone() });
                terms.push(MpoTerm { from: 3, to: 4, op: 2.0 * lambda * &n });
                (5, vec![0; 5], lambda * target * target)
            }
        };
        let last = width - 1;
        terms.push(MpoTerm { from: 0, to: last, op: h });
        terms.push(MpoTerm { from: last, to: last, op: id });
        terms.retain(|t| t.op.iter().any(|&v| v != 0.0));
        Ok(Self {
            sites: params.sites,
            width,
            channel_charge,
            terms,
            constant,
        })
    }

    /// Dense matrix over the full product space, site 0 most significant.
    /// Only for checking small chains.
    pub fn to_dense(&self, space: &RungSpace) -> DMatrix<f64> {
        let d = space.dim();
        // rows of the running product, one per open channel
        let mut acc: Vec<Option<DMatrix<f64>>> = vec![None; self.width];
        acc[0] = Some(DMatrix::identity(1, 1));
        for _ in 0..self.sites {
            let mut next: Vec<Option<DMatrix<f64>>> = vec![None; self.width];
            for t in &self.terms {
                if let Some(m) = &acc[t.from] {
                    let k = m.kronecker(&t.op);
                    match &mut next[t.to] {
                        Some(x) => *x += k,
                        slot => *slot = Some(k),
                    }
                }
            }
            acc = next;
        }
        let dim = d.pow(self.sites as u32);
        let mut out = acc[self.last()].take().unwrap_or_else(|| DMatrix::zeros(dim, dim));
        for i in 0..dim {
            out[(i, i)] += self.constant;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Caps;
    use crate::model::build_ladder_hamiltonian;

    fn product_index(space: &RungSpace, occ: &[u8], l: usize) -> usize {
        (0..l).fold(0, |acc, j| acc * space.dim() + space.index(occ[j] as usize, occ[l + j] as usize))
    }

    #[test]
    fn reconstructs_the_ladder_hamiltonian() {
        for (l, n, caps) in [(2, 2, Caps::new(2, 2)), (3, 2, Caps::new(2, 1)), (4, 3, Caps::new(2, 2))] {
            let params = ModelParams::new(l, n)
                .with_hopping(0.37)
                .with_detuning(0.2)
                .with_repulsion(1.3)
                .with_caps(caps);
            let basis = params.basis().unwrap();
            let ed = build_ladder_hamiltonian(&params, &basis).unwrap().to_dense();
            let space = RungSpace::new(caps, true);
            let w = Mpo::ladder(&params, &space, None).unwrap().to_dense(&space);
            let idx: Vec<usize> = basis.iter().map(|o| product_index(&space, o, l)).collect();
            for (r, &pr) in idx.iter().enumerate() {
                for (c, &pc) in idx.iter().enumerate() {
                    assert!((ed[(r, c)] - w[(pr, pc)]).abs() < 1e-12);
                }
            }
            // no leakage out of the particle-number sector
            for &pc in &idx {
                for pr in 0..w.nrows() {
                    if !idx.contains(&pr) {
                        assert_eq!(w[(pr, pc)], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn penalty_adds_squared_number_deviation() {
        let params = ModelParams::new(3, 2).with_hopping(0.5).with_caps(Caps::new(1, 1));
        let plain = RungSpace::new(params.caps, false);
        let h0 = Mpo::ladder(&params, &plain, None).unwrap().to_dense(&plain);
        let hp = Mpo::ladder(&params, &plain, Some(10.0)).unwrap().to_dense(&plain);
        let d = plain.dim();
        for i in 0..h0.nrows() {
            let mut rest = i;
            let mut n = 0;
            for _ in 0..3 {
                n += plain.particles(rest % d);
                rest /= d;
            }
            let dn = n as f64 - 2.0;
            assert!((hp[(i, i)] - h0[(i, i)] - 10.0 * dn * dn).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_periodic() {
        let params = ModelParams::new(4, 1).with_boundary(Boundary::Periodic);
        let space = RungSpace::new(params.caps, true);
        assert!(Mpo::ladder(&params, &space, None).is_err());
    }
}
