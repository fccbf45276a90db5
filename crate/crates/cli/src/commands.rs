//! Table and report producers behind the subcommands.

use helmscat_core::jost::JostSolver;
use helmscat_core::oracle::{transfer_scattering, LayerStack};
use helmscat_core::profile::Profile;
use helmscat_core::recover::{self, RecoveryOptions, RecoveryReport, TSample, Truth};
use helmscat_core::riccati::{FieldKind, RiccatiSolver};
use helmscat_core::scatter::ScatterSolver;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::CliError;
use crate::io::Table;

pub const FORWARD_HEADER: [&str; 8] = ["k", "ReT", "ImT", "ReR1", "ImR1", "ReR2", "ImR2", "unitarity_residual"];

/// Window of `|k|` on which the recovered `T` is compared with the truth.
pub const T_WINDOW: (f64, f64) = (0.05, 20.0);

pub fn forward(p: &Profile, ks: &[f64], solver: &ScatterSolver) -> Result<Table, CliError> {
    let grid = solver.scattering_grid(p, ks)?;
    let mut t = Table::new(&FORWARD_HEADER);
    for (&k, s) in grid.ks.iter().zip(&grid.points) {
        t.push(vec![k, s.t.re, s.t.im, s.r1.re, s.r1.im, s.r2.re, s.r2.im, s.unitarity_residual]);
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JostWhich {
    M1,
    M2,
}

pub fn jost(p: &Profile, k: Complex64, xs: &[f64], which: JostWhich, rtol: f64) -> Result<Table, CliError> {
    let solver = JostSolver::new(rtol);
    let f = match which {
        JostWhich::M1 => solver.solve_m1(p, k, xs)?,
        JostWhich::M2 => solver.solve_m2(p, k, xs)?,
    };
    let mut t = Table::new(&["x", "Re_m", "Im_m", "Re_dm", "Im_dm"]);
    for ((&x, m), mp) in f.xs.iter().zip(&f.m).zip(&f.m_prime) {
        t.push(vec![x, m.re, m.im, mp.re, mp.im]);
    }
    Ok(t)
}

pub fn riccati(p: &Profile, k: Complex64, xs: &[f64], which: FieldKind, rtol: f64) -> Result<Table, CliError> {
    let solver = RiccatiSolver::new(rtol);
    let f = match which {
        FieldKind::R => solver.solve_r(p, k, xs)?,
        FieldKind::W => solver.solve_w(p, k, xs)?,
        FieldKind::WMinus => solver.solve_w_minus(p, k, xs)?,
        FieldKind::Rho => {
            if k.im != 0.0 {
                return Err(CliError::Usage("the rho field is only defined for real k".into()));
            }
            solver.rho_field(p, k.re, xs)?
        }
    };
    let mut t = Table::new(&["x", "Re", "Im"]);
    for (&x, v) in f.xs.iter().zip(&f.values) {
        t.push(vec![x, v.re, v.im]);
    }
    Ok(t)
}

/// Transfer-matrix values alongside their deviation from the ODE forward solve.
pub fn oracle(p: &Profile, ks: &[f64], solver: &ScatterSolver) -> Result<Table, CliError> {
    let stack = LayerStack::from_profile(p).map_err(|e| CliError::Schema {
        file: "profile".into(),
        path: e.path,
        message: format!("not representable as a layer stack: {}", e.message),
    })?;
    let grid = solver.scattering_grid(p, ks)?;
    let exact = grid
        .ks
        .par_iter()
        .map(|&k| transfer_scattering(&stack, Complex64::new(k, 0.0)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(&["k", "ReT", "ImT", "ReR1", "ImR1", "ReR2", "ImR2", "dT", "dR1", "dR2"]);
    for ((&k, ex), num) in grid.ks.iter().zip(&exact).zip(&grid.points) {
        t.push(vec![
            k,
            ex.t.re,
            ex.t.im,
            ex.r1.re,
            ex.r1.im,
            ex.r2.re,
            ex.r2.im,
            (ex.t - num.t).norm(),
            (ex.r1 - num.r1).norm(),
            (ex.r2 - num.r2).norm(),
        ]);
    }
    Ok(t)
}

/// Truth for the recovery comparison. `T` comes from the same forward data that produced
/// the reflection samples when available, otherwise from fresh solves.
pub fn truth(
    p: &Profile,
    ks: &[f64],
    forward_t: Option<&[Complex64]>,
    solver: &ScatterSolver,
) -> Result<Truth, CliError> {
    match forward_t {
        Some(ts) => {
            let f = p.functionals();
            Ok(Truth {
                int_q: f.int_q,
                int_big_q2: f.int_big_q2,
                int_big_q: f.int_big_q,
                t: ks.iter().zip(ts).map(|(&k, &t)| TSample { k, t }).collect(),
            })
        }
        None => Ok(recover::truth_from_profile(p, ks, solver)?),
    }
}

/// Runs the recovery chain on `R₂` samples and, given a profile, attaches the comparisons.
pub fn recover(
    ks: &[f64],
    r2: &[Complex64],
    truth: Option<&Truth>,
) -> Result<RecoveryReport, CliError> {
    let opts = RecoveryOptions::default();
    let mut report = recover::recover(ks, r2, &opts)?;
    if let Some(t) = truth {
        recover::attach_truth(&mut report, t, T_WINDOW);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn forward_table_shape() {
        let ks = [-2.0, -0.5, 0.5, 2.0];
        let t = forward(&catalog::slab(), &ks, &ScatterSolver::default()).unwrap();
        assert_eq!(t.header, FORWARD_HEADER);
        assert_eq!(t.rows.len(), 4);
        assert!(t.column("unitarity_residual").unwrap().iter().all(|r| *r < 1e-8));
    }

    #[test]
    fn oracle_rejects_smooth_profiles() {
        assert!(oracle(&catalog::bump(), &[1.0], &ScatterSolver::default()).is_err());
        let t = oracle(&catalog::slab(), &[0.3, 1.0, 7.0], &ScatterSolver::default()).unwrap();
        for name in ["dT", "dR1", "dR2"] {
            assert!(t.column(name).unwrap().iter().all(|d| *d < 1e-8));
        }
    }

    #[test]
    fn rho_needs_real_k() {
        let xs = [-1.0, 0.0, 1.0];
        let p = catalog::bump();
        assert!(riccati(&p, Complex64::new(1.0, 1.0), &xs, FieldKind::Rho, 1e-12).is_err());
        let t = riccati(&p, Complex64::new(1.0, 0.0), &xs, FieldKind::Rho, 1e-12).unwrap();
        assert_eq!(t.rows.len(), 3);
    }

    #[test]
    fn jost_fields_tend_to_one_outside() {
        let p = catalog::bump();
        let xs = [-3.0, 0.0, 3.0];
        let m1 = jost(&p, Complex64::new(2.0, 0.0), &xs, JostWhich::M1, 1e-12).unwrap();
        assert!((m1.rows[2][1] - 1.0).abs() < 1e-14 && m1.rows[2][2].abs() < 1e-14);
        let m2 = jost(&p, Complex64::new(2.0, 0.0), &xs, JostWhich::M2, 1e-12).unwrap();
        assert!((m2.rows[0][1] - 1.0).abs() < 1e-14 && m2.rows[0][2].abs() < 1e-14);
    }
}
