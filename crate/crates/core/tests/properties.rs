use polariton::basis::dimension;
use polariton::exact::{dense_spectrum, ladder_ground_state, LanczosOptions};
use polariton::model::{build_ladder_hamiltonian, build_polariton_hamiltonian};
use polariton::{Boundary, Caps, FockBasis, ModelParams};
use proptest::prelude::*;

fn count_by_brute_force(sites: usize, particles: usize, caps: Caps) -> u64 {
    let modes = 2 * sites;
    let cap = |m: usize| if m < sites { caps.photon } else { caps.exciton };
    let mut occ = vec![0usize; modes];
    let mut count = 0;
    loop {
        if occ.iter().sum::<usize>() == particles {
            count += 1;
        }
        let mut m = 0;
        loop {
            if m == modes {
                return count;
            }
            if occ[m] < cap(m) {
                occ[m] += 1;
                break;
            }
            occ[m] = 0;
            m += 1;
        }
    }
}

fn sector() -> impl Strategy<Value = (usize, usize, Caps)> {
    (1usize..=4, 0usize..=6, 1usize..=3, 1usize..=3)
        .prop_filter("fits", |(l, n, p, x)| l * (p + x) >= *n)
        .prop_map(|(l, n, p, x)| (l, n, Caps::new(p, x)))
}

fn diagonal_oracle(p: &ModelParams, occ: &[u8]) -> f64 {
    let l = p.sites;
    let u = if p.repulsion.is_hard_core() { 0.0 } else { p.repulsion.value() };
    (0..l)
        .map(|j| {
            let (a, x) = (occ[j] as f64, occ[l + j] as f64);
            p.omega_x * x + 2.0 * p.hopping * a + 0.5 * u * x * (x - 1.0)
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_unrank_round_trip((l, n, caps) in sector()) {
        let basis = FockBasis::ladder(l, n, caps).unwrap();
        for i in 0..basis.dim() {
            let state = basis.unrank(i).unwrap();
            prop_assert_eq!(state.total(), n);
            prop_assert_eq!(basis.rank(&state).unwrap(), i);
            prop_assert_eq!(basis.rank_modes(basis.occupations(i)).unwrap(), i);
        }
    }

    #[test]
    fn dimension_matches_enumeration((l, n, caps) in sector()) {
        let d = dimension(l, n, caps).unwrap();
        prop_assert_eq!(d, count_by_brute_force(l, n, caps));
        prop_assert_eq!(d as usize, FockBasis::ladder(l, n, caps).unwrap().dim());
    }

    #[test]
    fn larger_caps_never_shrink_the_sector((l, n, caps) in sector(), dp in 0usize..2, dx in 0usize..2) {
        let bigger = Caps::new(caps.photon + dp, caps.exciton + dx);
        prop_assert!(dimension(l, n, bigger).unwrap() >= dimension(l, n, caps).unwrap());
    }

    #[test]
    fn ladder_is_hermitian_with_the_expected_trace(
        (l, n, caps) in sector(),
        j in 0.0f64..2.0,
        u in 0.0f64..5.0,
        wx in -1.0f64..1.0,
        periodic in any::<bool>(),
    ) {
        let boundary = if periodic && l >= 3 { Boundary::Periodic } else { Boundary::Open };
        let p = ModelParams::new(l, n)
            .with_hopping(j)
            .with_repulsion(u)
            .with_detuning(wx)
            .with_boundary(boundary)
            .with_caps(caps);
        let basis = p.basis().unwrap();
        let h = build_ladder_hamiltonian(&p, &basis).unwrap();
        prop_assert!(h.is_hermitian(1e-14));
        let trace: f64 = basis.iter().map(|occ| diagonal_oracle(&p, occ)).sum();
        prop_assert!((h.trace() - trace).abs() < 1e-9 * (1.0 + trace.abs()));
        if basis.dim() <= 300 && basis.dim() > 0 {
            let spec = dense_spectrum(&h).unwrap();
            let sum: f64 = spec.values.iter().sum();
            prop_assert!((sum - trace).abs() < 1e-8 * (1.0 + trace.abs()));
        }
    }

    #[test]
    fn larger_caps_never_raise_the_ground_energy(
        n in 1usize..=4,
        j in 0.0f64..2.0,
        u in 0.0f64..3.0,
    ) {
        let p = ModelParams::new(3, n).with_hopping(j).with_repulsion(u);
        let opts = LanczosOptions { tol: 1e-11, ..LanczosOptions::default() };
        let mut last = f64::INFINITY;
        for c in 1..=n {
            let e = ladder_ground_state(&p.clone().with_caps(Caps::new(c, c)), &opts).unwrap().energy();
            prop_assert!(e <= last + 1e-9);
            last = e;
        }
    }

    #[test]
    fn polariton_chain_is_hermitian(l in 3usize..=6, n in 0usize..=4, cap in 1usize..=3, u in 0.0f64..2.0) {
        prop_assume!(l * cap >= n);
        let p = ModelParams::new(l, n).with_hopping(0.7).with_boundary(Boundary::Periodic);
        let basis = FockBasis::chain(l, n, cap).unwrap();
        let h = build_polariton_hamiltonian(&p, u, &basis).unwrap();
        prop_assert!(h.is_hermitian(1e-14));
        let mu = p.hopping - p.rabi;
        let trace: f64 = basis
            .iter()
            .map(|occ| occ.iter().map(|&k| { let k = k as f64; mu * k + 0.5 * u * k * (k - 1.0) }).sum::<f64>())
            .sum();
        prop_assert!((h.trace() - trace).abs() < 1e-9 * (1.0 + trace.abs()));
    }
}
