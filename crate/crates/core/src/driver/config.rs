//! Experiment configuration: per-experiment defaults, a flat `key = value`
//! file format and command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::phifun::DEFAULT_KRYLOV_TOL;
use crate::sparse::DEFAULT_CG_TOL;
use crate::steppers::Scheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    PoissonVirus,
    RdPeanutConvergence,
    RdPeanutStability,
    RdPeanutEfficiency,
    StefanSquare,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::PoissonVirus,
        Experiment::RdPeanutConvergence,
        Experiment::RdPeanutStability,
        Experiment::RdPeanutEfficiency,
        Experiment::StefanSquare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::PoissonVirus => "poisson_virus",
            Experiment::RdPeanutConvergence => "rd_peanut_convergence",
            Experiment::RdPeanutStability => "rd_peanut_stability",
            Experiment::RdPeanutEfficiency => "rd_peanut_efficiency",
            Experiment::StefanSquare => "stefan_square",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().replace('-', "_");
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

/// Everything one experiment run needs. `dt = None` selects the
/// experiment's default step (the grid spacing for convergence runs).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Grid nodes per axis.
    pub n: usize,
    pub dt: Option<f64>,
    pub t_end: f64,
    pub scheme: Scheme,
    pub krylov_tol: f64,
    pub cg_tol: f64,
    pub out_dir: Option<PathBuf>,
    /// Steps between field dumps; 0 disables dumps.
    pub dump_every: usize,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let (n, dt, t_end, scheme) = match experiment {
            Experiment::PoissonVirus => (90, None, 0.0, Scheme::Etd2),
            Experiment::RdPeanutConvergence => (81, None, 0.1, Scheme::Etd2),
            Experiment::RdPeanutStability => (201, Some(1e-3), 0.2, Scheme::Etd2),
            Experiment::RdPeanutEfficiency => (501, Some(1e-4), 1e-2, Scheme::Etd2),
            Experiment::StefanSquare => (201, Some(5e-3), 1.0, Scheme::Etd2),
        };
        Self {
            experiment,
            n,
            dt,
            t_end,
            scheme,
            krylov_tol: DEFAULT_KRYLOV_TOL,
            cg_tol: DEFAULT_CG_TOL,
            out_dir: None,
            dump_every: 0,
        }
    }

    /// Sets one key. Keys accept `_` or `-` as separator.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::Config(format!("'{key}' expects a number, got '{v}'")))
        };
        let int = |v: &str| -> Result<usize> {
            v.parse::<usize>()
                .map_err(|_| Error::Config(format!("'{key}' expects a nonnegative integer, got '{v}'")))
        };
        match key.as_str() {
            "experiment" => self.experiment = value.parse()?,
            "n" => self.n = int(value)?,
            "dt" => self.dt = Some(num(value)?),
            "t_end" => self.t_end = num(value)?,
            "scheme" => self.scheme = value.parse()?,
            "krylov_tol" => self.krylov_tol = num(value)?,
            "cg_tol" => self.cg_tol = num(value)?,
            "out" | "out_dir" => self.out_dir = Some(PathBuf::from(value)),
            "dump_every" => self.dump_every = int(value)?,
            _ => return Err(Error::Config(format!("unknown configuration key '{key}'"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 {
            return Err(Error::Config(format!("n must be at least 8, got {}", self.n)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Config(format!("dt must be positive, got {dt}")));
            }
            if self.experiment != Experiment::PoissonVirus && self.t_end < dt {
                return Err(Error::Config(format!("t_end {} is shorter than dt {dt}", self.t_end)));
            }
        }
        if !(self.krylov_tol > 0.0) || !(self.cg_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if let Some(dir) = &self.out_dir {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        Ok(())
    }

    /// Time step for grid spacing `h`.
    pub fn dt_for(&self, h: f64) -> f64 {
        self.dt.unwrap_or(h)
    }
}
