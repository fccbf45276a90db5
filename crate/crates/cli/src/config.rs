//! Run configuration shared by all subcommands.

use std::path::PathBuf;

use helmscat_core::jost::DEFAULT_RTOL;
use helmscat_core::scatter::{KGridSpec, ScatterSolver};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::CliError;

/// Quadrature tolerance at which the default panel widths are used.
pub const DEFAULT_QUAD_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcommand {
    Forward,
    Jost,
    Riccati,
    Recover,
    Oracle,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub ode_tol: f64,
    pub quad_tol: f64,
    /// Overrides the profile's own truncation tolerance when set.
    pub tail_tol: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ode_tol: DEFAULT_RTOL,
            quad_tol: DEFAULT_QUAD_TOL,
            tail_tol: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub profile: Option<PathBuf>,
    pub kgrid: KGridSpec,
    pub tolerances: Tolerances,
    pub out: Option<PathBuf>,
    /// Worker threads; `None` lets the pool decide.
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn new(subcommand: Subcommand) -> Self {
        Self {
            subcommand,
            profile: None,
            kgrid: KGridSpec::default(),
            tolerances: Tolerances::default(),
            out: None,
            jobs: None,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.kgrid.validate().map_err(|e| CliError::Usage(format!("--kgrid: {e}")))?;
        let t = &self.tolerances;
        for (flag, v) in [("--tol-ode", Some(t.ode_tol)), ("--tol-quad", Some(t.quad_tol)), ("--tol-tail", t.tail_tol)] {
            if let Some(v) = v {
                if !(v > 0.0 && v < 1.0) {
                    return Err(CliError::Usage(format!("{flag} must lie in (0, 1), got {v}")));
                }
            }
        }
        if self.jobs == Some(0) {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        Ok(())
    }

    pub fn scatter_solver(&self) -> Result<ScatterSolver, CliError> {
        Ok(ScatterSolver::with_quad_tol(self.tolerances.ode_tol, self.tolerances.quad_tol)?)
    }
}

/// Parses `lo:hi:n[:log|symlog|lin]`. `log` is positive log spacing, `symlog` mirrors it
/// to negative `k`; the default is `symlog`.
pub fn parse_kgrid(s: &str) -> Result<KGridSpec, CliError> {
    let bad = |m: &str| CliError::Usage(format!("--kgrid {s:?}: {m}"));
    let parts: Vec<&str> = s.split(':').collect();
    if !(3..=4).contains(&parts.len()) {
        return Err(bad("expected lo:hi:n[:log|symlog|lin]"));
    }
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad(&format!("{t:?} is not a number")));
    let (lo, hi) = (num(parts[0])?, num(parts[1])?);
    let n: usize = parts[2].trim().parse().map_err(|_| bad("point count must be a positive integer"))?;
    let spec = match parts.get(3).map(|t| t.trim()).unwrap_or("symlog") {
        "log" => KGridSpec::Log { lo, hi, n },
        "symlog" => KGridSpec::SymmetricLog { lo, hi, n },
        "lin" | "linear" => KGridSpec::Linear { lo, hi, n },
        other => return Err(bad(&format!("unknown spacing {other:?}"))),
    };
    spec.validate().map_err(|e| bad(&e.to_string()))?;
    Ok(spec)
}

/// Parses `re,im` or a bare real number.
pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let bad = || CliError::Usage(format!("--k {s:?}: expected re,im"));
    let mut it = s.split(',').map(|t| t.trim().parse::<f64>());
    let re = it.next().ok_or_else(bad)?.map_err(|_| bad())?;
    let im = match it.next() {
        Some(v) => v.map_err(|_| bad())?,
        None => 0.0,
    };
    if it.next().is_some() || !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kgrid_forms() {
        assert_eq!(
            parse_kgrid("0.001:50:400:log").unwrap(),
            KGridSpec::Log { lo: 1e-3, hi: 50.0, n: 400 }
        );
        assert_eq!(
            parse_kgrid("0.1:2:5").unwrap(),
            KGridSpec::SymmetricLog { lo: 0.1, hi: 2.0, n: 5 }
        );
        assert!(matches!(parse_kgrid("-1:1:11:lin").unwrap(), KGridSpec::Linear { .. }));
    }

    #[test]
    fn kgrid_rejects_empty_ranges() {
        assert!(parse_kgrid("2:1:10:log").is_err());
        assert!(parse_kgrid("0:1:10:log").is_err());
        assert!(parse_kgrid("1:2:0:log").is_err());
        assert!(parse_kgrid("1:2").is_err());
        assert!(parse_kgrid("1:2:4:cubic").is_err());
    }

    #[test]
    fn complex_wavenumbers() {
        assert_eq!(parse_complex("1.5,-2").unwrap(), Complex64::new(1.5, -2.0));
        assert_eq!(parse_complex("3").unwrap(), Complex64::new(3.0, 0.0));
        assert!(parse_complex("1,2,3").is_err());
        assert!(parse_complex("a,b").is_err());
    }

    #[test]
    fn tolerances_must_be_positive() {
        let mut c = RunConfig::new(Subcommand::Forward);
        assert!(c.validate().is_ok());
        c.tolerances.ode_tol = 0.0;
        assert!(c.validate().is_err());
        c.tolerances.ode_tol = 1e-10;
        c.tolerances.tail_tol = Some(-1.0);
        assert!(c.validate().is_err());
        c.tolerances.tail_tol = None;
        c.jobs = Some(0);
        assert!(c.validate().is_err());
    }
}
