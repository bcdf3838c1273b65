//! Flat key=value experiment configuration.
//!
//! Config files are plain text: one `key = value` per line, `#` comments,
//! lists comma-separated. Command-line flags override file keys. The chosen
//! format archives well next to the produced data.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Eqm,
    Sample,
    Rigidity,
    Maxfield,
    Ks,
    Gmc,
    MesoGmc,
    Thick,
    Freeze,
    HankelCheck,
    PvCheck,
    DumpField,
}

impl Command {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "eqm" => Command::Eqm,
            "sample" => Command::Sample,
            "rigidity" => Command::Rigidity,
            "maxfield" => Command::Maxfield,
            "ks" => Command::Ks,
            "gmc" => Command::Gmc,
            "meso-gmc" => Command::MesoGmc,
            "thick" => Command::Thick,
            "freeze" => Command::Freeze,
            "hankel-check" => Command::HankelCheck,
            "pv-check" => Command::PvCheck,
            "dump-field" => Command::DumpField,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Eqm => "eqm",
            Command::Sample => "sample",
            Command::Rigidity => "rigidity",
            Command::Maxfield => "maxfield",
            Command::Ks => "ks",
            Command::Gmc => "gmc",
            Command::MesoGmc => "meso-gmc",
            Command::Thick => "thick",
            Command::Freeze => "freeze",
            Command::HankelCheck => "hankel-check",
            Command::PvCheck => "pv-check",
            Command::DumpField => "dump-field",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: Command,
    pub potential: String,
    pub n: usize,
    pub replicas: usize,
    pub gamma: Vec<f64>,
    pub alpha: f64,
    pub seed: u64,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_points: usize,
    pub out: PathBuf,
    pub digits: usize,
    pub workers: usize,
    pub enforce: bool,
    /// jump positions / evaluation points where a command needs them
    pub x1: f64,
    pub x2: f64,
    /// sigma-PV integration range
    pub r_min: f64,
    pub r_max: f64,
    /// truncation order for dump-field
    pub kmax: usize,
    /// chaos normalization: "mc", "surrogate", or "raw"
    pub normalization: String,
    pub sampler: String,
}

/// Default output root comes from RMTLAB_OUT when set.
pub fn default_out_root() -> PathBuf {
    std::env::var_os("RMTLAB_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

impl ExperimentConfig {
    pub fn defaults(command: Command) -> Self {
        Self {
            command,
            potential: "gue".into(),
            n: 1000,
            replicas: 50,
            gamma: vec![0.5],
            alpha: 0.5,
            seed: 1,
            grid_min: -0.95,
            grid_max: 0.95,
            grid_points: 191,
            out: default_out_root().join(command.name()),
            digits: 50,
            workers: 0,
            enforce: false,
            x1: -0.1,
            x2: 0.1,
            r_min: 1e-3,
            r_max: 40.0,
            kmax: 1000,
            normalization: "mc".into(),
            sampler: "auto".into(),
        }
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        let bad = |k: &str, v: &str| format!("bad value {v:?} for key {k}");
        match key.trim() {
            "command" => {
                self.command = Command::parse(v).ok_or_else(|| bad(key, v))?;
            }
            "potential" => self.potential = v.to_string(),
            "n" | "N" => self.n = v.parse().map_err(|_| bad(key, v))?,
            "replicas" | "M" => self.replicas = v.parse().map_err(|_| bad(key, v))?,
            "gamma" => {
                self.gamma = v
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().parse().map_err(|_| bad(key, s)))
                    .collect::<Result<_, _>>()?
            }
            "alpha" => self.alpha = v.parse().map_err(|_| bad(key, v))?,
            "seed" => self.seed = v.parse().map_err(|_| bad(key, v))?,
            "grid_min" => self.grid_min = v.parse().map_err(|_| bad(key, v))?,
            "grid_max" => self.grid_max = v.parse().map_err(|_| bad(key, v))?,
            "grid_points" => self.grid_points = v.parse().map_err(|_| bad(key, v))?,
            "out" => self.out = PathBuf::from(v),
            "digits" => self.digits = v.parse().map_err(|_| bad(key, v))?,
            "workers" => self.workers = v.parse().map_err(|_| bad(key, v))?,
            "enforce" => self.enforce = v.parse().map_err(|_| bad(key, v))?,
            "x1" => self.x1 = v.parse().map_err(|_| bad(key, v))?,
            "x2" => self.x2 = v.parse().map_err(|_| bad(key, v))?,
            "r_min" => self.r_min = v.parse().map_err(|_| bad(key, v))?,
            "r_max" => self.r_max = v.parse().map_err(|_| bad(key, v))?,
            "kmax" => self.kmax = v.parse().map_err(|_| bad(key, v))?,
            "normalization" => self.normalization = v.to_string(),
            "sampler" => self.sampler = v.to_string(),
            other => return Err(format!("unknown config key {other:?}")),
        }
        Ok(())
    }

    pub fn apply_file(&mut self, text: &str) -> Result<(), String> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            self.set(k, v).map_err(|e| format!("line {}: {e}", lineno + 1))?;
        }
        Ok(())
    }

    /// All violations, without executing anything.
    pub fn validate(&self) -> Vec<String> {
        let mut diags = Vec::new();
        if crate::eqmeasure::Potential::by_name(&self.potential).is_none() {
            diags.push(format!("unknown potential {:?}", self.potential));
        }
        if self.n == 0 {
            diags.push("n must be positive".into());
        }
        if self.replicas == 0 {
            diags.push("replicas must be positive".into());
        }
        if self.grid_points == 0 {
            diags.push("grid_points must be positive".into());
        }
        if self.grid_min >= self.grid_max {
            diags.push("grid_min must be below grid_max".into());
        }
        let needs_gamma = matches!(
            self.command,
            Command::Gmc | Command::MesoGmc | Command::Thick | Command::Freeze
        );
        if needs_gamma && self.gamma.is_empty() {
            diags.push("gamma list must be nonempty for this command".into());
        }
        for &g in &self.gamma {
            if g.abs() >= 2.0 && needs_gamma && self.command != Command::Freeze {
                diags.push(format!("gamma = {g} is outside the supported range |gamma| < 2"));
            }
        }
        if self.command == Command::HankelCheck && self.n > 16 {
            diags.push(format!("N = {} exceeds exact-oracle cap of 16", self.n));
        }
        if self.command == Command::PvCheck {
            if self.gamma.len() != 2 {
                diags.push("pv-check needs exactly two gamma values".into());
            } else if self.gamma[0] == self.gamma[1] {
                diags.push("pv-check needs gamma1 != gamma2 for a nontrivial slope".into());
            }
            if !(0.0 < self.r_min && self.r_min < 1.0 && self.r_max > 1.0) {
                diags.push("need 0 < r_min < 1 < r_max".into());
            }
        }
        if !matches!(self.normalization.as_str(), "mc" | "surrogate" | "raw") {
            diags.push(format!("unknown normalization {:?}", self.normalization));
        }
        if !matches!(self.sampler.as_str(), "auto" | "gue" | "mcmc") {
            diags.push(format!("unknown sampler {:?}", self.sampler));
        }
        diags
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_points;
        if n == 1 {
            return vec![self.grid_min];
        }
        (0..n)
            .map(|i| self.grid_min + (self.grid_max - self.grid_min) * i as f64 / (n - 1) as f64)
            .collect()
    }

    /// Resolved config as key=value text for config.echo.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command = {}", self.command.name());
        let _ = writeln!(s, "potential = {}", self.potential);
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "replicas = {}", self.replicas);
        let gl: Vec<String> = self.gamma.iter().map(|g| format!("{g}")).collect();
        let _ = writeln!(s, "gamma = {}", gl.join(","));
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "grid_min = {}", self.grid_min);
        let _ = writeln!(s, "grid_max = {}", self.grid_max);
        let _ = writeln!(s, "grid_points = {}", self.grid_points);
        let _ = writeln!(s, "out = {}", self.out.display());
        let _ = writeln!(s, "digits = {}", self.digits);
        let _ = writeln!(s, "workers = {}", self.workers);
        let _ = writeln!(s, "enforce = {}", self.enforce);
        let _ = writeln!(s, "x1 = {}", self.x1);
        let _ = writeln!(s, "x2 = {}", self.x2);
        let _ = writeln!(s, "r_min = {}", self.r_min);
        let _ = writeln!(s, "r_max = {}", self.r_max);
        let _ = writeln!(s, "kmax = {}", self.kmax);
        let _ = writeln!(s, "normalization = {}", self.normalization);
        let _ = writeln!(s, "sampler = {}", self.sampler);
        s
    }

    /// Echo as a key->string map for the JSON summary.
    pub fn echo_map(&self) -> BTreeMap<String, String> {
        self.echo()
            .lines()
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }
}
