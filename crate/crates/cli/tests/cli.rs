use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polariton"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn csv(dir: &Path, name: &str) -> Vec<Vec<String>> {
    fs::read_to_string(dir.join(name))
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn manifest(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn upol_prints_the_two_body_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["upol", "repulsion=1", "rabi=1"]);
    assert!(out.status.success());
    let v: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((v - 0.1864).abs() < 1e-3);
    assert_eq!(manifest(dir.path(), "upol.json")["u_pol"].as_f64().unwrap(), v);
}

#[test]
fn blueshift_scan_is_reproducible_and_config_is_overridable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "sites = 6\nparticles = 3\nrepulsion = 1e4\nboundary = periodic\nhopping = 5\n").unwrap();
    let args = [
        "--config",
        cfg.to_str().unwrap(),
        "blueshift-scan",
        "method=ed,tg",
        "scan_hopping=0.001,0.01",
    ];
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(run(&a, &args).status.success());
    assert!(run(&b, &args).status.success());
    let ca = fs::read(a.join("blueshift_scan.csv")).unwrap();
    assert_eq!(ca, fs::read(b.join("blueshift_scan.csv")).unwrap());

    let rows = csv(&a, "blueshift_scan.csv");
    assert_eq!(rows[0].join(","), "sites,particles,density,hopping,repulsion,method,energy,blueshift");
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[1][0], "6");
    assert_eq!(rows[1][5], "ed");
    assert_eq!(rows[2][5], "tg");
    let ed: f64 = rows[1][7].parse().unwrap();
    let tg: f64 = rows[2][7].parse().unwrap();
    assert!((ed - tg).abs() < 0.05 * tg.abs());

    let m = manifest(&a, "blueshift-scan.json");
    assert_eq!(m["config"]["sites"], "6");
    assert_eq!(m["config"]["scan_hopping"], "0.001,0.01");
    assert_eq!(m["config"]["chi_max"], "64");
    assert_eq!(m["seed"], 0x5eed);
}

#[test]
fn threads_do_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["blueshift-scan", "sites=5", "particles=2", "scan_hopping=lin:0:1:4", "method=ed,tc"];
    let one = dir.path().join("one");
    let four = dir.path().join("four");
    assert!(run(&one, &args).status.success());
    let mut a4 = vec!["--threads", "4"];
    a4.extend(args);
    assert!(run(&four, &a4).status.success());
    assert_eq!(
        fs::read(one.join("blueshift_scan.csv")).unwrap(),
        fs::read(four.join("blueshift_scan.csv")).unwrap()
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(d, &["g2", "bogus=1"]).status.code(), Some(2));
    assert_eq!(run(d, &["g2", "sites=abc"]).status.code(), Some(2));
    assert_eq!(run(d, &["g2", "hopping=-1"]).status.code(), Some(2));
    assert_eq!(run(d, &["sqw", "spectral_method=magic", "sites=3", "particles=1"]).status.code(), Some(2));
    let cap = run(d, &["g2", "sites=3", "particles=9", "cap_photon=1", "cap_exciton=1"]);
    assert_eq!(cap.status.code(), Some(4));
    let scan = run(
        d,
        &["blueshift-scan", "sites=3", "scan_particles=1,9", "cap_photon=1", "cap_exciton=1"],
    );
    assert_eq!(scan.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&scan.stderr).contains("N=9"));
    let slow = run(d, &["g2", "sites=4", "particles=2", "hopping=0.3", "tol=1e-300"]);
    assert_eq!(slow.status.code(), Some(3));
    assert_eq!(run(d, &["g2", "method=dmrg", "boundary=periodic"]).status.code(), Some(2));
}

#[test]
fn g2_profile_has_one_row_per_site() {
    let dir = tempfile::tempdir().unwrap();
    for method in ["ed", "dmrg"] {
        let out = run(dir.path(), &["g2", "sites=6", "particles=2", "hopping=0.1", &format!("method={method}")]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let rows = csv(dir.path(), "g2.csv");
        assert_eq!(rows.len(), 7);
        assert_eq!(rows[0], vec!["j", "g2_photon", "g2_exciton"]);
        assert_eq!(manifest(dir.path(), "g2.json")["reference_site"], 3);
    }
}

#[test]
fn spectra_write_grid_slices_and_sum_rule() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run(
        d,
        &["sqw", "sites=4", "particles=2", "boundary=periodic", "omega_min=-2", "omega_max=3", "omega_step=0.01"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let grid = csv(d, "sqw_grid.csv");
    assert_eq!(grid[0], vec!["q", "omega", "weight"]);
    assert_eq!(grid.len(), 1 + 3 * 501);
    // q = 0 column is zeroed
    assert!(grid[1..502].iter().all(|r| r[2].parse::<f64>().unwrap() == 0.0));
    assert_eq!(csv(d, "sqw_sum_rule.csv").len(), 3);
    assert_eq!(csv(d, "sqw_omega0.csv").len(), 4);
    assert_eq!(csv(d, "sqw_qpi.csv").len(), 502);
    let m = manifest(d, "sqw_grid.json");
    assert_eq!(m["run"]["method"], "lehmann");
    assert_eq!(m["broadening"], 0.04);

    let out = run(d, &["chi", "sites=4", "particles=0", "boundary=periodic", "omega_step=0.01"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(d, "chi_grid.json");
    assert_eq!(m["run"]["mode_normalization"], 0.5);
    assert_eq!(m["channel"], "response");
}

#[test]
fn scans_over_hopping_and_size() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run(d, &["photonic-fraction", "sites=4", "particles=2", "scan_hopping=1,100"]);
    assert!(out.status.success());
    let rows = csv(d, "photonic_fraction.csv");
    let f: Vec<f64> = rows[1..].iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(f[1] < f[0]);

    let out = run(d, &["entropy", "sites=4", "particles=2", "repulsion=inf", "scan_hopping=0.01,1000"]);
    assert!(out.status.success());
    let rows = csv(d, "entropy.csv");
    assert_eq!(rows[0], vec!["hopping", "repulsion", "s_light_matter", "s_left_right"]);
    let s_lm: f64 = rows[2][2].parse().unwrap();
    assert!(s_lm < 0.05);

    let out = run(d, &["finite-size", "scan_sites=4,8", "density=0.25", "method=auto", "hopping=0.1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv(d, "finite_size.csv");
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2][1], "2");
    let g = csv(d, "finite_size_g2.csv");
    assert_eq!(g[0], vec!["offset", "g2_L4", "g2_L8"]);
    assert_eq!(g.len(), 9);
    assert_eq!(g[1][1], "nan");
}

#[test]
fn list_keys() {
    let out = Command::new(env!("CARGO_BIN_EXE_polariton")).arg("--list-keys").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("scan_hopping"));
}
