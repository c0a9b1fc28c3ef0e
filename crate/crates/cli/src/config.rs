//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use polariton::{Boundary, Caps, Error, ModelParams, Result, Species};

/// Every accepted key with its default and meaning.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("sites", "8", "number of rungs L"),
    ("particles", "3", "number of excitations N"),
    ("hopping", "0.1", "photon hopping J"),
    ("rabi", "1", "Rabi coupling"),
    ("detuning", "0", "exciton energy relative to the photon"),
    ("repulsion", "1", "exciton repulsion U, or inf"),
    ("boundary", "open", "open or periodic"),
    ("spacing", "1", "inter-dot distance"),
    ("cap_photon", "auto", "photons per rung, auto = min(N, 5)"),
    ("cap_exciton", "auto", "excitons per rung, auto = min(N, 5)"),
    ("cap_polariton", "auto", "polaritons per site in the effective chain"),
    ("method", "ed", "ed, dmrg, effective-ed, tg, tc or bogoliubov (comma list for scans)"),
    ("tol", "1e-10", "Lanczos residual tolerance"),
    ("chi_max", "64", "DMRG bond dimension"),
    ("sweeps", "12", "maximum DMRG sweeps"),
    ("cutoff", "1e-10", "DMRG discarded-weight cutoff"),
    ("penalty", "none", "number penalty instead of charge labels"),
    ("j0", "auto", "reference site, auto = L/2"),
    ("channel", "photon", "photon or exciton"),
    ("spectral_method", "lehmann", "lehmann or krylov"),
    ("part", "full", "full, absorption or photoluminescence"),
    ("gamma", "0.04", "Lorentzian broadening"),
    ("horizon", "500", "propagation time T"),
    ("dt", "0.1", "propagation step"),
    ("omega_min", "-1.5", "lowest frequency"),
    ("omega_max", "4", "highest frequency"),
    ("omega_step", "0.002", "frequency step"),
    ("scan_hopping", "", "hopping values: list a,b,c or log:min:max:n or lin:min:max:n"),
    ("scan_particles", "", "particle numbers (list)"),
    ("scan_repulsion", "", "repulsion values"),
    ("scan_sites", "", "chain lengths for finite-size runs"),
    ("density", "0.25", "filling used when scanning sites"),
    ("ed_limit", "200000", "largest sector solved by ED when method = auto"),
    ("unit_meV", "none", "energy of Omega in meV, recorded in manifests"),
];

#[derive(Clone, Debug)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

fn config_error(msg: String) -> Error {
    Error::InvalidParameter(msg)
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            values: KEYS.iter().map(|(k, v, _)| (k.to_string(), v.to_string())).collect(),
        }
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        if !self.values.contains_key(key) {
            return Err(config_error(format!("unknown config key '{key}'")));
        }
        self.values.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| config_error(format!("line {}: expected key = value", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| config_error(format!("override '{kv}' is not key=value")))?;
        self.set(k, v)
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.raw(key);
        raw.parse()
            .map_err(|_| config_error(format!("cannot parse {key} = '{raw}'")))
    }

    /// `None` for `auto`/`none`.
    pub fn get_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            "auto" | "none" | "" => Ok(None),
            _ => self.get(key).map(Some),
        }
    }

    pub fn species(&self) -> Result<Species> {
        self.raw("channel").parse()
    }

    pub fn boundary(&self) -> Result<Boundary> {
        self.raw("boundary").parse()
    }

    pub fn caps_for(&self, particles: usize) -> Result<Caps> {
        let d = Caps::default_for(particles);
        Ok(Caps::new(
            self.get_opt("cap_photon")?.unwrap_or(d.photon),
            self.get_opt("cap_exciton")?.unwrap_or(d.exciton),
        ))
    }

    pub fn params(&self) -> Result<ModelParams> {
        let sites: usize = self.get("sites")?;
        let particles: usize = self.get("particles")?;
        self.params_for(sites, particles)
    }

    pub fn params_for(&self, sites: usize, particles: usize) -> Result<ModelParams> {
        let mut p = ModelParams::new(sites, particles)
            .with_hopping(self.get("hopping")?)
            .with_rabi(self.get("rabi")?)
            .with_detuning(self.get("detuning")?)
            .with_repulsion(self.get("repulsion")?)
            .with_boundary(self.boundary()?)
            .with_caps(self.caps_for(particles)?);
        p.spacing = self.get("spacing")?;
        p.validate()?;
        Ok(p)
    }

    /// Scan values of `key`, or the single value of `fallback`.
    pub fn scan<T: FromStr + Copy>(&self, key: &str, fallback: &str) -> Result<Vec<T>>
    where
        f64: Into<ScanValue<T>>,
    {
        let raw = self.raw(key);
        if raw.is_empty() {
            return Ok(vec![self.get(fallback)?]);
        }
        if let Some(spec) = raw.strip_prefix("log:").or_else(|| raw.strip_prefix("lin:")) {
            let log = raw.starts_with("log:");
            let parts: Vec<&str> = spec.split(':').collect();
            let bad = || config_error(format!("cannot parse range {key} = '{raw}'"));
            if parts.len() != 3 {
                return Err(bad());
            }
            let a: f64 = parts[0].parse().map_err(|_| bad())?;
            let b: f64 = parts[1].parse().map_err(|_| bad())?;
            let n: usize = parts[2].parse().map_err(|_| bad())?;
            if n < 2 || (log && (a <= 0.0 || b <= 0.0)) {
                return Err(bad());
            }
            return (0..n)
                .map(|i| {
                    let t = i as f64 / (n - 1) as f64;
                    let x = if log { a * (b / a).powf(t) } else { a + (b - a) * t };
                    x.into().0.ok_or_else(bad)
                })
                .collect();
        }
        raw.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| config_error(format!("cannot parse '{s}' in {key}")))
            })
            .collect()
    }
}

/// Conversion of generated range points into the scanned type.
pub struct ScanValue<T>(pub Option<T>);

impl From<f64> for ScanValue<f64> {
    fn from(x: f64) -> Self {
        ScanValue(Some(x))
    }
}

impl From<f64> for ScanValue<usize> {
    fn from(x: f64) -> Self {
        ScanValue((x >= 0.0).then(|| x.round() as usize))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_overrides() {
        let mut c = RunConfig::default();
        c.apply_text("sites = 6 # rungs\n\nhopping=0.5\n").unwrap();
        c.apply_override("hopping=2").unwrap();
        let p = c.params().unwrap();
        assert_eq!(p.sites, 6);
        assert_eq!(p.hopping, 2.0);
        assert!(c.set("nonsense", "1").is_err());
        assert!(c.apply_text("sites 6").is_err());
    }

    #[test]
    fn scans() {
        let mut c = RunConfig::default();
        assert_eq!(c.scan::<f64>("scan_hopping", "hopping").unwrap(), vec![0.1]);
        c.set("scan_hopping", "log:0.001:10:5").unwrap();
        let v: Vec<f64> = c.scan("scan_hopping", "hopping").unwrap();
        assert_eq!(v.len(), 5);
        assert!((v[2] - 0.1).abs() < 1e-12);
        c.set("scan_particles", "1, 2,3").unwrap();
        assert_eq!(c.scan::<usize>("scan_particles", "particles").unwrap(), vec![1, 2, 3]);
        c.set("scan_particles", "x").unwrap();
        assert!(c.scan::<usize>("scan_particles", "particles").is_err());
    }

    #[test]
    fn infinite_repulsion() {
        let mut c = RunConfig::default();
        c.set("repulsion", "inf").unwrap();
        assert!(c.params().unwrap().repulsion.is_hard_core());
    }
}
