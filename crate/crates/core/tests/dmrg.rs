use approx::assert_abs_diff_eq;
use polariton::basis::Caps;
use polariton::exact::{g2, ladder_ground_state, von_neumann_entropy, LanczosOptions, Partition};
use polariton::mps::checkpoint::{read_checkpoint, write_checkpoint};
use polariton::mps::*;
use polariton::{Boundary, Error, ModelParams, Species};

fn small(j: f64) -> ModelParams {
    ModelParams::new(6, 2).with_hopping(j).with_caps(Caps::new(2, 2))
}

fn exact_opts() -> DmrgOptions {
    DmrgOptions {
        truncation_cutoff: 1e-14,
        lanczos_tol: 1e-11,
        energy_tol: 1e-13,
        ..DmrgOptions::default()
    }
}

fn ed_opts() -> LanczosOptions {
    LanczosOptions { tol: 1e-11, ..LanczosOptions::default() }
}

#[test]
fn matches_exact_diagonalization_on_small_ladder() {
    for j in [0.01, 0.1, 1.0] {
        let p = small(j);
        let ed = ladder_ground_state(&p, &ed_opts()).unwrap();
        let r = dmrg_ground_state(&p, &exact_opts()).unwrap();
        assert_abs_diff_eq!(r.energy, ed.energy(), epsilon = 1e-8);
        for kind in [Species::Photon, Species::Exciton] {
            let a = mps_measure_g2(&r.state, kind, 2).unwrap();
            let b = g2(ed.state(), &ed.basis, kind, 2).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-6);
            }
        }
    }
}

#[test]
fn state_invariants_after_sweeps() {
    let p = small(0.3);
    let r = dmrg_ground_state(&p, &DmrgOptions::default()).unwrap();
    let st = &r.state;
    assert_abs_diff_eq!(st.norm_squared(), 1.0, epsilon = 1e-10);
    assert!(st.isometry_error() < 1e-10);
    assert!(st.bond_dims().iter().all(|&d| d <= 64));
    assert_abs_diff_eq!(mps_total_number(st), 2.0, epsilon = 1e-8);
    let mpo = Mpo::ladder(&p, &st.space, None).unwrap();
    assert_abs_diff_eq!(mps_expectation(st, &mpo).unwrap(), r.energy, epsilon = 1e-9);
    let e: Vec<f64> = r.report.sweeps.iter().map(|s| s.energy).collect();
    assert!(e.windows(2).all(|w| w[1] <= w[0] + 1e-10), "{e:?}");
    assert!(r.report.converged);
}

#[test]
fn bond_entropy_matches_schmidt_decomposition() {
    let p = small(0.5);
    let ed = ladder_ground_state(&p, &ed_opts()).unwrap();
    let r = dmrg_ground_state(&p, &exact_opts()).unwrap();
    for cut in 0..5 {
        let s_ed = von_neumann_entropy(ed.state(), &ed.basis, Partition::LeftRight { cut }).unwrap();
        let s_mps = mps_bond_entropy(&r.state, cut).unwrap();
        assert_abs_diff_eq!(s_ed, s_mps, epsilon = 1e-6);
    }
}

#[test]
fn photonic_fraction_matches_exact() {
    let p = small(2.0);
    let ed = ladder_ground_state(&p, &ed_opts()).unwrap();
    let r = dmrg_ground_state(&p, &exact_opts()).unwrap();
    let f_ed = polariton::exact::photonic_fraction(ed.state(), &ed.basis).unwrap();
    assert_abs_diff_eq!(mps_photonic_fraction(&r.state), f_ed, epsilon = 1e-8);
}

#[test]
fn penalty_fallback_reaches_the_same_state() {
    let p = small(0.2);
    let a = dmrg_ground_state(&p, &DmrgOptions::default()).unwrap();
    let b = dmrg_ground_state(&p, &DmrgOptions::default().with_penalty(DEFAULT_PENALTY)).unwrap();
    assert_abs_diff_eq!(a.energy, b.energy, epsilon = 1e-8);
    assert_abs_diff_eq!(mps_total_number(&b.state), 2.0, epsilon = 1e-6);
}

#[test]
fn larger_bond_dimension_never_raises_energy() {
    let p = ModelParams::new(12, 3).with_hopping(0.5).with_caps(Caps::new(2, 2));
    let energies: Vec<f64> = [4, 8, 16, 32]
        .iter()
        .map(|&chi| dmrg_ground_state(&p, &DmrgOptions::default().with_chi(chi)).unwrap().energy)
        .collect();
    assert!(energies.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{energies:?}");
}

#[test]
fn hard_core_tonks_limit() {
    let p = ModelParams::new(16, 4)
        .with_hopping(0.01)
        .with_repulsion(f64::INFINITY)
        .with_caps(Caps::new(2, 1));
    let ed = ladder_ground_state(&p, &ed_opts()).unwrap();
    let r = dmrg_ground_state(&p, &DmrgOptions::default()).unwrap();
    assert_abs_diff_eq!(r.energy, ed.energy(), epsilon = 1e-8);
    let f = mps_photonic_fraction(&r.state);
    assert!((f - 0.5).abs() < 0.02, "{f}");
}

#[test]
fn checkpoint_round_trip() {
    let p = small(0.4);
    let r = dmrg_ground_state(&p, &DmrgOptions::default()).unwrap();
    let mut buf = Vec::new();
    write_checkpoint(&mut buf, &r.state, &p).unwrap();
    let (header, back) = read_checkpoint(&mut buf.as_slice(), Some(&p)).unwrap();
    assert_eq!(header.chi, r.state.bond_dims());
    assert_eq!(header.params_hash, params_hash(&p).unwrap());
    let mpo = Mpo::ladder(&p, &back.space, None).unwrap();
    assert_eq!(mps_expectation(&back, &mpo).unwrap(), mps_expectation(&r.state, &mpo).unwrap());

    let other = small(0.5);
    assert!(matches!(read_checkpoint(&mut buf.as_slice(), Some(&other)), Err(Error::Mismatch(_))));
    let mut bad = buf.clone();
    bad[0] = b'X';
    assert!(matches!(read_checkpoint(&mut bad.as_slice(), None), Err(Error::Format(_))));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.mps");
    save_checkpoint(&path, &r.state, &p).unwrap();
    let loaded = load_checkpoint(&path, Some(&p)).unwrap();
    let resumed = run_dmrg(&mpo, loaded, &DmrgOptions::default().with_sweeps(2)).unwrap();
    assert_abs_diff_eq!(resumed.energy, r.energy, epsilon = 1e-9);
}

#[test]
fn product_state_has_zero_entropy() {
    let p = ModelParams::new(3, 0).with_caps(Caps::new(1, 1));
    let r = dmrg_ground_state(&p, &DmrgOptions::default()).unwrap();
    for b in 0..2 {
        assert_abs_diff_eq!(mps_bond_entropy(&r.state, b).unwrap(), 0.0, epsilon = 1e-12);
    }
}

#[test]
fn rejects_unsupported_inputs() {
    let p = small(0.1).with_boundary(Boundary::Periodic);
    assert!(dmrg_ground_state(&p, &DmrgOptions::default()).is_err());
    let p = ModelParams::new(4, 2).with_caps(Caps::new(8, 8));
    assert!(matches!(dmrg_ground_state(&p, &DmrgOptions::default()), Err(Error::Capacity(_))));
}

/// Free fermions in a box of `L` sites: `k_m = πm/(L+1)`.
fn open_chain_fermi_sea(particles: usize, sites: usize, j_pol: f64) -> f64 {
    (1..=particles)
        .map(|m| {
            let k = std::f64::consts::PI * m as f64 / (sites + 1) as f64;
            2.0 * j_pol * (1.0 - k.cos())
        })
        .sum()
}

#[test]
fn tonks_girardeau_blueshift_on_an_open_chain() {
    let (l, n) = (36, 9);
    let p = ModelParams::new(l, n)
        .with_hopping(0.001)
        .with_repulsion(1e4)
        .with_caps(Caps::new(2, 2));
    let r = dmrg_ground_state(&p, &DmrgOptions::default()).unwrap();
    assert!(r.report.converged);
    let blueshift = r.energy / n as f64 + 1.0;
    let expected = open_chain_fermi_sea(n, l, p.polariton_hopping()) / n as f64;
    assert!((blueshift / expected - 1.0).abs() < 0.01, "{blueshift} vs {expected}");
}

#[test]
fn half_chain_entropy_grows_with_length_in_the_tonks_regime() {
    let entropies: Vec<f64> = [20, 40, 80]
        .iter()
        .map(|&l| {
            let p = ModelParams::new(l, l / 4)
                .with_hopping(0.01)
                .with_repulsion(f64::INFINITY)
                .with_caps(Caps::new(1, 1));
            let r = dmrg_ground_state(&p, &DmrgOptions::default()).unwrap();
            assert!(r.report.converged);
            mps_bond_entropy(&r.state, l / 2 - 1).unwrap()
        })
        .collect();
    assert!(entropies.windows(2).all(|w| w[1] > w[0]), "{entropies:?}");
}
