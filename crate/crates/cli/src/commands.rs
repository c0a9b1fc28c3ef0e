use std::path::PathBuf;

use serde_json::{json, Value};

use polariton::analytic::{bogoliubov_energy, tg_energy_discrete};
use polariton::basis::dimension;
use polariton::exact::{
    blueshift_per_particle, g2, ladder_ground_state, photonic_fraction, polariton_ground_state,
    von_neumann_entropy, LanczosOptions, Partition,
};
use polariton::io::{write_csv, write_manifest, write_spectral_grid, Cell, Table, CODE_VERSION};
use polariton::model::{born_oppenheimer_upol, tavis_cummings_ground_energy};
use polariton::mps::{
    dmrg_ground_state, mps_bond_entropy, mps_measure_g2, mps_photonic_fraction, DmrgOptions,
    DmrgResult,
};
use polariton::spectra::{
    momentum_grid, omega_grid, response_chi, structure_factor, Method, ResponsePart, SpectralGrid,
};
use polariton::{Error, ModelParams, Result, Species};

use crate::config::RunConfig;
use crate::pool::map_ordered;

pub struct Context {
    pub command: String,
    pub config: RunConfig,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub threads: usize,
}

/// What a command reports back besides its files.
#[derive(Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// Some DMRG run stopped before its energy settled.
    pub unconverged: bool,
}

/// Same error kind with the failing scan point prepended.
fn annotate(e: Error, point: &str) -> Error {
    match e {
        Error::Capacity(m) => Error::Capacity(format!("{point}: {m}")),
        Error::Overflow(m) => Error::Overflow(format!("{point}: {m}")),
        Error::NotFound(m) => Error::NotFound(format!("{point}: {m}")),
        Error::Mismatch(m) => Error::Mismatch(format!("{point}: {m}")),
        Error::InvalidParameter(m) => Error::InvalidParameter(format!("{point}: {m}")),
        Error::Range(m) => Error::Range(format!("{point}: {m}")),
        Error::Format(m) => Error::Format(format!("{point}: {m}")),
        Error::Dimension { dim, limit } => Error::Overflow(format!(
            "{point}: dimension {dim} exceeds dense limit {limit}"
        )),
        other => {
            eprintln!("failed at {point}");
            other
        }
    }
}

impl Context {
    fn lanczos(&self) -> Result<LanczosOptions> {
        Ok(LanczosOptions {
            tol: self.config.get("tol")?,
            seed: self.seed,
            check_degeneracy: true,
            ..LanczosOptions::default()
        })
    }

    fn dmrg(&self) -> Result<DmrgOptions> {
        Ok(DmrgOptions {
            chi_max: self.config.get("chi_max")?,
            n_sweeps: self.config.get("sweeps")?,
            truncation_cutoff: self.config.get("cutoff")?,
            penalty: self.config.get_opt("penalty")?,
            seed: self.seed,
            ..DmrgOptions::default()
        })
    }

    fn run_dmrg(&self, p: &ModelParams) -> Result<DmrgResult> {
        let r = dmrg_ground_state(p, &self.dmrg()?)?;
        if !r.report.converged {
            eprintln!(
                "warning: DMRG at L={}, N={}, J={} did not converge within {} sweeps",
                p.sites,
                p.particles,
                p.hopping,
                r.report.sweeps.len()
            );
        }
        Ok(r)
    }

    fn j0(&self, sites: usize) -> Result<usize> {
        Ok(self.config.get_opt("j0")?.unwrap_or(sites / 2))
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn manifest(&self, outcome: &Outcome, extra: Value) -> Result<()> {
        let mut m = json!({
            "command": self.command,
            "code_version": CODE_VERSION,
            "seed": self.seed,
            "threads": self.threads,
            "config": self.config.values(),
            "outputs": outcome.files.iter().map(|f| f.file_name().map(|s| s.to_string_lossy().into_owned())).collect::<Vec<_>>(),
            "unconverged": outcome.unconverged,
        });
        if let Some(mev) = self.config.get_opt::<f64>("unit_meV")? {
            m["energy_unit"] = json!({ "omega_meV": mev, "note": "all energies are in units of the Rabi coupling" });
        }
        if let (Value::Object(m), Value::Object(e)) = (&mut m, extra) {
            m.extend(e);
        }
        write_manifest(&self.path(&format!("{}.json", self.command)), &m)
    }

    fn table(&self, outcome: &mut Outcome, name: &str, t: &Table) -> Result<()> {
        let path = self.path(name);
        write_csv(&path, t)?;
        outcome.files.push(path);
        Ok(())
    }
}

fn methods(cfg: &RunConfig) -> Vec<String> {
    cfg.raw("method").split(',').map(|s| s.trim().to_string()).collect()
}

fn polariton_cap(cfg: &RunConfig, particles: usize) -> Result<usize> {
    Ok(cfg.get_opt("cap_polariton")?.unwrap_or(particles.clamp(1, 5)))
}

struct EnergyPoint {
    energy: f64,
    unconverged: bool,
}

fn energy_by_method(ctx: &Context, method: &str, p: &ModelParams) -> Result<EnergyPoint> {
    let exact = |energy| Ok(EnergyPoint { energy, unconverged: false });
    match method {
        "ed" => exact(ladder_ground_state(p, &ctx.lanczos()?)?.energy()),
        "dmrg" => {
            let r = ctx.run_dmrg(p)?;
            Ok(EnergyPoint { energy: r.energy, unconverged: !r.report.converged })
        }
        "effective-ed" => {
            let u_pol = born_oppenheimer_upol(p.repulsion, p.rabi);
            let cap = polariton_cap(&ctx.config, p.particles)?;
            exact(polariton_ground_state(p, u_pol, cap, &ctx.lanczos()?)?.energy())
        }
        "tg" => exact(tg_energy_discrete(p.particles, p.sites, p.polariton_hopping(), p.rabi)?),
        "tc" => exact(tavis_cummings_ground_energy(p.sites, p.particles, p.rabi)?),
        "bogoliubov" => exact(bogoliubov_energy(
            p.particles,
            p.sites,
            born_oppenheimer_upol(p.repulsion, p.rabi),
            p.rabi,
        )),
        other => Err(Error::InvalidParameter(format!("unknown method '{other}'"))),
    }
}

pub fn blueshift_scan(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let sites: usize = cfg.get("sites")?;
    let mut points = Vec::new();
    for n in cfg.scan::<usize>("scan_particles", "particles")? {
        for u in cfg.scan::<f64>("scan_repulsion", "repulsion")? {
            for j in cfg.scan::<f64>("scan_hopping", "hopping")? {
                for m in methods(cfg) {
                    points.push((n, u, j, m));
                }
            }
        }
    }
    let results = map_ordered(&points, ctx.threads, |(n, u, j, m)| {
        let label = format!("N={n}, U={u}, J={j}, method={m}");
        let p = cfg
            .params_for(sites, *n)
            .map(|p| p.with_repulsion(*u).with_hopping(*j))
            .map_err(|e| annotate(e, &label))?;
        energy_by_method(ctx, m, &p).map_err(|e| annotate(e, &label))
    });
    let mut t = Table::new(&[
        "sites", "particles", "density", "hopping", "repulsion", "method", "energy", "blueshift",
    ]);
    let mut outcome = Outcome::default();
    let rabi: f64 = cfg.get("rabi")?;
    for ((n, u, j, m), r) in points.iter().zip(results) {
        let r = r?;
        outcome.unconverged |= r.unconverged;
        t.push(vec![
            sites.into(),
            (*n).into(),
            (*n as f64 / sites as f64).into(),
            (*j).into(),
            (*u).into(),
            m.as_str().into(),
            r.energy.into(),
            blueshift_per_particle(r.energy, *n, rabi).into(),
        ])?;
    }
    ctx.table(&mut outcome, "blueshift_scan.csv", &t)?;
    ctx.manifest(&outcome, json!({}))?;
    Ok(outcome)
}

pub fn g2_profile(ctx: &Context) -> Result<Outcome> {
    let p = ctx.config.params()?;
    let j0 = ctx.j0(p.sites)?;
    let mut outcome = Outcome::default();
    let (ph, x, energy, degenerate) = match ctx.config.raw("method") {
        "ed" => {
            let gs = ladder_ground_state(&p, &ctx.lanczos()?)?;
            let ph = g2(gs.state(), &gs.basis, Species::Photon, j0)?;
            let x = g2(gs.state(), &gs.basis, Species::Exciton, j0)?;
            (ph, x, gs.energy(), gs.result.degenerate)
        }
        "dmrg" => {
            let r = ctx.run_dmrg(&p)?;
            outcome.unconverged = !r.report.converged;
            let ph = mps_measure_g2(&r.state, Species::Photon, j0)?;
            let x = mps_measure_g2(&r.state, Species::Exciton, j0)?;
            (ph, x, r.energy, false)
        }
        other => return Err(Error::InvalidParameter(format!("g2 needs method ed or dmrg, got '{other}'"))),
    };
    let mut t = Table::new(&["j", "g2_photon", "g2_exciton"]);
    for (j, (a, b)) in ph.values.iter().zip(&x.values).enumerate() {
        t.push(vec![j.into(), (*a).into(), (*b).into()])?;
    }
    ctx.table(&mut outcome, "g2.csv", &t)?;
    ctx.manifest(
        &outcome,
        json!({ "reference_site": j0, "energy": energy, "degenerate_ground_state": degenerate }),
    )?;
    Ok(outcome)
}

fn grids(ctx: &Context, p: &ModelParams) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let cfg = &ctx.config;
    let w = omega_grid(cfg.get("omega_min")?, cfg.get("omega_max")?, cfg.get("omega_step")?)?;
    Ok((momentum_grid(p.sites, p.boundary), w, cfg.get("gamma")?))
}

fn nearest(values: &[f64], x: f64) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

fn slices(ctx: &Context, outcome: &mut Outcome, stem: &str, g: &SpectralGrid) -> Result<()> {
    let iw = nearest(&g.omega_values, 0.0);
    let mut t = Table::new(&["q", "weight"]);
    for (iq, &q) in g.q_values.iter().enumerate() {
        t.push(vec![q.into(), g.weights[iq][iw].into()])?;
    }
    ctx.table(outcome, &format!("{stem}_omega0.csv"), &t)?;
    let iq = nearest(&g.q_values, std::f64::consts::PI);
    let mut t = Table::new(&["omega", "weight"]);
    for (iw, &w) in g.omega_values.iter().enumerate() {
        t.push(vec![w.into(), g.weights[iq][iw].into()])?;
    }
    ctx.table(outcome, &format!("{stem}_qpi.csv"), &t)?;
    let mut t = Table::new(&["omega", "weight"]);
    for (w, s) in g.omega_values.iter().zip(g.q_integrated()) {
        t.push(vec![(*w).into(), s.into()])?;
    }
    ctx.table(outcome, &format!("{stem}_q_integrated.csv"), &t)
}

fn write_grid(ctx: &Context, outcome: &mut Outcome, stem: &str, g: &SpectralGrid) -> Result<()> {
    write_spectral_grid(
        &ctx.out_dir,
        &format!("{stem}_grid"),
        g,
        json!({ "seed": ctx.seed, "code_version": CODE_VERSION }),
    )?;
    outcome.files.push(ctx.path(&format!("{stem}_grid.csv")));
    outcome.files.push(ctx.path(&format!("{stem}_grid.json")));
    slices(ctx, outcome, stem, g)
}

pub fn sqw(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let p = cfg.params()?;
    let (q, w, gamma) = grids(ctx, &p)?;
    let method = match cfg.raw("spectral_method") {
        "lehmann" => Method::Lehmann,
        "krylov" => Method::Krylov { horizon: cfg.get("horizon")?, time_step: cfg.get("dt")? },
        other => return Err(Error::InvalidParameter(format!("unknown spectral method '{other}'"))),
    };
    let g = structure_factor(&p, cfg.species()?, &q, &w, gamma, method, Some(ctx.j0(p.sites)?))?;
    let mut outcome = Outcome::default();
    write_grid(ctx, &mut outcome, "sqw", &g)?;
    let mut t = Table::new(&["q", "integral", "equal_time", "ratio"]);
    for e in &g.sum_rule {
        t.push(vec![e.q.into(), e.integral.into(), e.equal_time.into(), e.ratio().into()])?;
    }
    ctx.table(&mut outcome, "sqw_sum_rule.csv", &t)?;
    ctx.manifest(&outcome, json!({ "sum_rule": g.sum_rule, "min_weight": g.min_weight() }))?;
    Ok(outcome)
}

pub fn chi(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let p = cfg.params()?;
    let (q, w, gamma) = grids(ctx, &p)?;
    let part = match cfg.raw("part") {
        "full" => ResponsePart::Full,
        "absorption" => ResponsePart::Absorption,
        "photoluminescence" | "pl" => ResponsePart::Photoluminescence,
        other => return Err(Error::InvalidParameter(format!("unknown response part '{other}'"))),
    };
    let g = response_chi(&p, &q, &w, gamma, part)?;
    let mut outcome = Outcome::default();
    write_grid(ctx, &mut outcome, "chi", &g)?;
    ctx.manifest(&outcome, json!({ "mode_normalization": g.manifest.mode_normalization }))?;
    Ok(outcome)
}

pub fn finite_size(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let density: f64 = cfg.get("density")?;
    let ed_limit: u64 = cfg.get("ed_limit")?;
    let kind = cfg.species()?;
    let rabi: f64 = cfg.get("rabi")?;
    let sizes: Vec<usize> = cfg.scan("scan_sites", "sites")?;
    let method = cfg.raw("method").to_string();
    let results = map_ordered(&sizes, ctx.threads, |&l| -> Result<_> {
        let n = (density * l as f64).round() as usize;
        let label = format!("L={l}, N={n}");
        let p = cfg.params_for(l, n).map_err(|e| annotate(e, &label))?;
        let use_ed = match method.as_str() {
            "ed" => true,
            "dmrg" => false,
            "auto" => dimension(l, n, p.effective_caps()).map_err(|e| annotate(e, &label))? <= ed_limit,
            other => return Err(Error::InvalidParameter(format!("finite-size needs ed, dmrg or auto, got '{other}'"))),
        };
        let j0 = l / 2;
        if use_ed {
            let gs = ladder_ground_state(&p, &ctx.lanczos()?).map_err(|e| annotate(e, &label))?;
            let g = g2(gs.state(), &gs.basis, kind, j0)?;
            Ok((n, "ed", gs.energy(), g.values, false))
        } else {
            let r = ctx.run_dmrg(&p).map_err(|e| annotate(e, &label))?;
            let g = mps_measure_g2(&r.state, kind, j0)?;
            Ok((n, "dmrg", r.energy, g.values, !r.report.converged))
        }
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut outcome = Outcome::default();
    let mut t = Table::new(&["sites", "particles", "method", "energy", "blueshift"]);
    for (&l, (n, m, e, _, unconverged)) in sizes.iter().zip(&results) {
        outcome.unconverged |= *unconverged;
        t.push(vec![l.into(), (*n).into(), (*m).into(), (*e).into(), blueshift_per_particle(*e, *n, rabi).into()])?;
    }
    ctx.table(&mut outcome, "finite_size.csv", &t)?;

    let lmax = sizes.iter().copied().max().unwrap_or(0) as i64;
    let mut header = vec!["offset".to_string()];
    header.extend(sizes.iter().map(|l| format!("g2_L{l}")));
    let mut t = Table::new(&header);
    for d in -(lmax / 2)..=(lmax - 1 - lmax / 2) {
        let mut row: Vec<Cell> = vec![d.into()];
        for (&l, (_, _, _, values, _)) in sizes.iter().zip(&results) {
            let j = (l / 2) as i64 + d;
            row.push(if (0..l as i64).contains(&j) { values[j as usize] } else { f64::NAN }.into());
        }
        t.push(row)?;
    }
    ctx.table(&mut outcome, "finite_size_g2.csv", &t)?;
    ctx.manifest(&outcome, json!({ "channel": kind }))?;
    Ok(outcome)
}

fn hopping_points(cfg: &RunConfig) -> Result<Vec<(f64, f64)>> {
    let mut pts = Vec::new();
    for u in cfg.scan::<f64>("scan_repulsion", "repulsion")? {
        for j in cfg.scan::<f64>("scan_hopping", "hopping")? {
            pts.push((u, j));
        }
    }
    Ok(pts)
}

pub fn photonic_fraction_scan(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let base = cfg.params()?;
    let method = cfg.raw("method").to_string();
    let pts = hopping_points(cfg)?;
    let results = map_ordered(&pts, ctx.threads, |&(u, j)| -> Result<(f64, bool)> {
        let label = format!("U={u}, J={j}");
        let p = base.clone().with_repulsion(u).with_hopping(j);
        match method.as_str() {
            "ed" => {
                let gs = ladder_ground_state(&p, &ctx.lanczos()?).map_err(|e| annotate(e, &label))?;
                Ok((photonic_fraction(gs.state(), &gs.basis)?, false))
            }
            "dmrg" => {
                let r = ctx.run_dmrg(&p).map_err(|e| annotate(e, &label))?;
                Ok((mps_photonic_fraction(&r.state), !r.report.converged))
            }
            other => Err(Error::InvalidParameter(format!("photonic-fraction needs ed or dmrg, got '{other}'"))),
        }
    });
    let mut outcome = Outcome::default();
    let mut t = Table::new(&["hopping", "repulsion", "method", "photonic_fraction"]);
    for (&(u, j), r) in pts.iter().zip(results) {
        let (f, unconverged) = r?;
        outcome.unconverged |= unconverged;
        t.push(vec![j.into(), u.into(), method.as_str().into(), f.into()])?;
    }
    ctx.table(&mut outcome, "photonic_fraction.csv", &t)?;
    ctx.manifest(&outcome, json!({}))?;
    Ok(outcome)
}

pub fn entropy_scan(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let base = cfg.params()?;
    let method = cfg.raw("method").to_string();
    let cut = (base.sites / 2).max(1) - 1;
    let pts = hopping_points(cfg)?;
    let results = map_ordered(&pts, ctx.threads, |&(u, j)| -> Result<(f64, f64, bool)> {
        let label = format!("U={u}, J={j}");
        let p = base.clone().with_repulsion(u).with_hopping(j);
        match method.as_str() {
            "ed" => {
                let gs = ladder_ground_state(&p, &ctx.lanczos()?).map_err(|e| annotate(e, &label))?;
                let lm = von_neumann_entropy(gs.state(), &gs.basis, Partition::LightMatter)?;
                let lr = von_neumann_entropy(gs.state(), &gs.basis, Partition::LeftRight { cut })?;
                Ok((lm, lr, false))
            }
            // the light-matter cut is not a bond of the rung-merged chain
            "dmrg" => {
                let r = ctx.run_dmrg(&p).map_err(|e| annotate(e, &label))?;
                Ok((f64::NAN, mps_bond_entropy(&r.state, cut)?, !r.report.converged))
            }
            other => Err(Error::InvalidParameter(format!("entropy needs ed or dmrg, got '{other}'"))),
        }
    });
    let mut outcome = Outcome::default();
    let mut t = Table::new(&["hopping", "repulsion", "s_light_matter", "s_left_right"]);
    for (&(u, j), r) in pts.iter().zip(results) {
        let (lm, lr, unconverged) = r?;
        outcome.unconverged |= unconverged;
        t.push(vec![j.into(), u.into(), lm.into(), lr.into()])?;
    }
    ctx.table(&mut outcome, "entropy.csv", &t)?;
    ctx.manifest(&outcome, json!({ "left_right_cut_after_rung": cut }))?;
    Ok(outcome)
}

pub fn upol(ctx: &Context) -> Result<Outcome> {
    let u = ctx.config.get::<f64>("repulsion")?;
    let rabi = ctx.config.get::<f64>("rabi")?;
    if !(rabi > 0.0) || u < 0.0 {
        return Err(Error::InvalidParameter("upol needs rabi > 0 and repulsion >= 0".into()));
    }
    let value = born_oppenheimer_upol(polariton::Repulsion::from_value(u), rabi);
    println!("{}", polariton::io::format_float(value));
    let outcome = Outcome::default();
    ctx.manifest(&outcome, json!({ "u_pol": value }))?;
    Ok(outcome)
}

pub fn run(ctx: &Context) -> Result<Outcome> {
    std::fs::create_dir_all(&ctx.out_dir)?;
    match ctx.command.as_str() {
        "blueshift-scan" => blueshift_scan(ctx),
        "g2" => g2_profile(ctx),
        "sqw" => sqw(ctx),
        "chi" => chi(ctx),
        "finite-size" => finite_size(ctx),
        "photonic-fraction" => photonic_fraction_scan(ctx),
        "entropy" => entropy_scan(ctx),
        "upol" => upol(ctx),
        other => Err(Error::InvalidParameter(format!("unknown command '{other}'"))),
    }
}
