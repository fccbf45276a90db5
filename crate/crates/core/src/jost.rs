//! Reduced Jost solutions `m₁ = e^{−ikx}u₁` and `m₂ = e^{ikx}u₂`.
//!
//! `m₁` solves `m″ + 2ik m′ = k²q m` with `m = 1`, `m′ = 0` at the right support edge and is
//! integrated leftwards; `m₂` solves `m″ − 2ik m′ = k²q m` from the left edge rightwards.
//! Beyond the far support edge `q` vanishes and the solution is continued in closed form.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{HelmError, Result};
use crate::ode::{Dop853, OdeOptions};
use crate::profile::Profile;

pub const DEFAULT_RTOL: f64 = 1e-12;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Integrator settings used by the field solvers: relative control only.
pub fn ode_options(rtol: f64) -> OdeOptions {
    OdeOptions {
        rtol,
        atol: 1e-300,
        ..OdeOptions::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// `m₁`, normalised at `+∞`.
    FromRight,
    /// `m₂`, normalised at `−∞`.
    FromLeft,
}

impl Direction {
    /// `+1` for `m₁`, `−1` for `m₂`: the reduced equation is `m″ + 2isk m′ = k²q m`.
    pub fn sign(self) -> f64 {
        match self {
            Direction::FromRight => 1.0,
            Direction::FromLeft => -1.0,
        }
    }
}

/// Samples of `m` and `m′` on an ascending grid for a single wavenumber.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub k: Complex64,
    pub xs: Vec<f64>,
    pub m: Vec<Complex64>,
    pub m_prime: Vec<Complex64>,
    pub direction: Direction,
}

impl ComplexField {
    /// The unreduced solution and its derivative, `u = e^{isk x}m`.
    pub fn u(&self) -> Vec<(Complex64, Complex64)> {
        let s = self.direction.sign();
        self.xs
            .iter()
            .zip(self.m.iter().zip(&self.m_prime))
            .map(|(&x, (&m, &mp))| {
                let e = (I * s * self.k * x).exp();
                (e * m, e * (mp + I * s * self.k * m))
            })
            .collect()
    }
}

/// Jost-solution integrator.
#[derive(Debug, Clone, Copy)]
pub struct JostSolver {
    pub options: OdeOptions,
}

impl Default for JostSolver {
    fn default() -> Self {
        Self::new(DEFAULT_RTOL)
    }
}

impl JostSolver {
    pub fn new(rtol: f64) -> Self {
        Self {
            options: ode_options(rtol),
        }
    }

    pub fn solve_m1(&self, p: &Profile, k: Complex64, xs: &[f64]) -> Result<ComplexField> {
        self.solve(p, k, xs, Direction::FromRight)
    }

    pub fn solve_m2(&self, p: &Profile, k: Complex64, xs: &[f64]) -> Result<ComplexField> {
        self.solve(p, k, xs, Direction::FromLeft)
    }

    /// `(m₁, m₁′)` at the left support edge.
    pub fn m1_at_left_edge(&self, p: &Profile, k: Complex64) -> Result<(Complex64, Complex64)> {
        let f = self.solve(p, k, &[p.support().0], Direction::FromRight)?;
        Ok((f.m[0], f.m_prime[0]))
    }

    /// `(m₂, m₂′)` at the right support edge.
    pub fn m2_at_right_edge(&self, p: &Profile, k: Complex64) -> Result<(Complex64, Complex64)> {
        let f = self.solve(p, k, &[p.support().1], Direction::FromLeft)?;
        Ok((f.m[0], f.m_prime[0]))
    }

    pub fn solve(
        &self,
        p: &Profile,
        k: Complex64,
        xs: &[f64],
        direction: Direction,
    ) -> Result<ComplexField> {
        if k.im < 0.0 {
            return Err(HelmError::Input(format!("Im k must be nonnegative, got k = {k}")));
        }
        if !xs.windows(2).all(|w| w[1] >= w[0]) {
            return Err(HelmError::Input("x-grid must be ascending".into()));
        }
        let n = xs.len();
        let mut field = ComplexField {
            k,
            xs: xs.to_vec(),
            m: vec![ONE; n],
            m_prime: vec![ZERO; n],
            direction,
        };
        if k == ZERO || p.is_trivial() {
            return Ok(field);
        }

        let s = direction.sign();
        let (a, b) = p.support();
        let (start, end) = match direction {
            Direction::FromRight => (b, a),
            Direction::FromLeft => (a, b),
        };
        let k2 = k * k;
        let drift = -2.0 * I * s * k;
        let rhs = |x: f64, y: &[Complex64; 2]| [y[1], drift * y[1] + k2 * p.eval_q(x) * y[0]];

        let mut inside: Vec<usize> = (0..n).filter(|&i| xs[i] > a && xs[i] < b).collect();
        if direction == Direction::FromRight {
            inside.reverse();
        }
        let mut targets: Vec<f64> = inside.iter().map(|&i| xs[i]).collect();
        targets.push(end);
        let solver = Dop853::new(self.options);
        let (states, _) = solver.march(&rhs, start, [ONE, ZERO], &targets, p.breakpoints(), |_, _| {
            Ok(())
        })?;
        for (&i, st) in inside.iter().zip(&states) {
            field.m[i] = st[0];
            field.m_prime[i] = st[1];
        }
        let [m_end, mp_end] = states[states.len() - 1];

        // Far side: m = m_end + B (e^{−2iskx} − e^{−2isk·end}).
        let beta = -2.0 * I * s * k;
        let coef = mp_end / (beta * (beta * end).exp());
        for i in 0..n {
            let x = xs[i];
            let beyond = match direction {
                Direction::FromRight => x <= a,
                Direction::FromLeft => x >= b,
            };
            if beyond {
                let e = (beta * x).exp();
                field.m[i] = m_end + coef * (e - (beta * end).exp());
                field.m_prime[i] = coef * beta * e;
            }
        }
        Ok(field)
    }
}

pub fn solve_m1(p: &Profile, k: Complex64, xs: &[f64]) -> Result<ComplexField> {
    JostSolver::default().solve_m1(p, k, xs)
}

pub fn solve_m2(p: &Profile, k: Complex64, xs: &[f64]) -> Result<ComplexField> {
    JostSolver::default().solve_m2(p, k, xs)
}

/// Whether `m` stays away from zero on the grid, with the minimum modulus found.
pub fn jost_nonvanishing_check(field: &ComplexField) -> (bool, f64) {
    let min = field.m.iter().map(|m| m.norm()).fold(f64::INFINITY, f64::min);
    (min > 0.0, min)
}

/// Largest excess of the a priori estimates
/// `|m − 1| ≤ |k|γ e^{|k|γ}` and `|m′| ≤ |k|²γ (1 + |k|‖q‖₁ e^{|k|‖q‖₁})`
/// over the grid, with `γ` the tail integral of `|q|` on the normalised side.
/// A nonpositive value means both hold everywhere.
pub fn bound_excess(p: &Profile, field: &ComplexField) -> f64 {
    let ak = field.k.norm();
    let l1 = p.norm_q_l1();
    let mut worst = f64::NEG_INFINITY;
    for ((&x, m), mp) in field.xs.iter().zip(&field.m).zip(&field.m_prime) {
        let g = match field.direction {
            Direction::FromRight => p.gamma(x),
            Direction::FromLeft => p.eta(x),
        };
        let b1 = ak * g * (ak * g).exp();
        let b2 = ak * ak * g * (1.0 + ak * l1 * (ak * l1).exp());
        worst = worst.max((m - ONE).norm() - b1).max(mp.norm() - b2);
    }
    worst
}

/// Relative residual of the Wronskian `[u, ū] = 2isk` for real `k`, written in the reduced
/// variables as `m′m̄ − m m̄′ + 2isk|m|² = 2isk`.
pub fn wronskian_residual(field: &ComplexField) -> f64 {
    let k = field.k.re;
    let s = field.direction.sign();
    let target = 2.0 * s * k;
    field
        .m
        .iter()
        .zip(&field.m_prime)
        .map(|(m, mp)| {
            let w = mp * m.conj() - m * mp.conj() + I * (2.0 * s * k * m.norm_sqr());
            (w - I * target).norm() / target.abs()
        })
        .fold(0.0, f64::max)
}

/// Relative residual of `|u′ ± iku|² = |u′|² + k²|u|² ± 2sk²` for real `k`.
pub fn plane_wave_identity_residual(field: &ComplexField) -> f64 {
    let k = field.k.re;
    let s = field.direction.sign();
    field
        .u()
        .iter()
        .map(|(u, up)| {
            let base = up.norm_sqr() + k * k * u.norm_sqr();
            let plus = (up + I * k * u).norm_sqr() - (base + 2.0 * s * k * k);
            let minus = (up - I * k * u).norm_sqr() - (base - 2.0 * s * k * k);
            plus.abs().max(minus.abs()) / base
        })
        .fold(0.0, f64::max)
}

/// Diagnostics of `m₁(·, iκ)` on the imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImaginaryAxisMargins {
    /// `max |Im m| / |m|`; the field should be real.
    pub max_imag_ratio: f64,
    pub min_m: f64,
    /// `max m′/(κ m)`; must stay below 1.
    pub max_slope_ratio: f64,
    /// `min (2κm − m′) e^{κ∫ₓ^∞Q} / (2κ)`; must be at least 1.
    pub min_scaled_lower: f64,
}

pub fn imaginary_axis_margins(p: &Profile, field: &ComplexField) -> ImaginaryAxisMargins {
    assert_eq!(field.direction, Direction::FromRight);
    let kappa = field.k.im;
    let mut out = ImaginaryAxisMargins {
        max_imag_ratio: 0.0,
        min_m: f64::INFINITY,
        max_slope_ratio: f64::NEG_INFINITY,
        min_scaled_lower: f64::INFINITY,
    };
    for ((&x, m), mp) in field.xs.iter().zip(&field.m).zip(&field.m_prime) {
        out.max_imag_ratio = out.max_imag_ratio.max(m.im.abs() / m.norm());
        out.min_m = out.min_m.min(m.re);
        out.max_slope_ratio = out.max_slope_ratio.max(mp.re / (kappa * m.re));
        let scaled = (2.0 * kappa * m.re - mp.re) * (kappa * p.big_q_right(x)).exp() / (2.0 * kappa);
        out.min_scaled_lower = out.min_scaled_lower.min(scaled);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::ProfileKind;

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    fn bump() -> Profile {
        Profile::from_kind(ProfileKind::Bump {
            amplitude: 0.5,
            center: 0.0,
            width: 1.0,
        })
        .unwrap()
    }

    #[test]
    fn constant_profile_gives_unit_field() {
        let f = solve_m1(&Profile::constant(), Complex64::new(2.0, 0.0), &grid(-2.0, 2.0, 9)).unwrap();
        assert!(f.m.iter().all(|m| *m == ONE));
        assert!(f.m_prime.iter().all(|m| *m == ZERO));
    }

    #[test]
    fn zero_wavenumber_short_circuits() {
        let f = solve_m2(&bump(), ZERO, &grid(-2.0, 2.0, 9)).unwrap();
        assert!(f.m.iter().all(|m| *m == ONE));
    }

    #[test]
    fn wronskian_and_plane_wave_identities_hold() {
        let p = bump();
        for k in [0.3, 1.0, 7.0] {
            let xs = grid(-2.0, 2.0, 81);
            for f in [
                solve_m1(&p, Complex64::new(k, 0.0), &xs).unwrap(),
                solve_m2(&p, Complex64::new(k, 0.0), &xs).unwrap(),
            ] {
                assert!(wronskian_residual(&f) < 1e-10, "k={k}");
                assert!(plane_wave_identity_residual(&f) < 1e-10, "k={k}");
                assert!(bound_excess(&p, &f) <= 0.0);
            }
        }
    }

    #[test]
    fn conjugation_symmetry_on_real_axis() {
        let p = bump();
        let xs = grid(-1.5, 1.5, 31);
        let a = solve_m1(&p, Complex64::new(1.7, 0.0), &xs).unwrap();
        let b = solve_m1(&p, Complex64::new(-1.7, 0.0), &xs).unwrap();
        for (x, y) in a.m.iter().zip(&b.m) {
            assert!((x - y.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn finite_difference_residual_is_small() {
        let p = bump();
        let k = Complex64::new(2.0, 0.0);
        let h = 5e-4;
        let xs: Vec<f64> = (0..=2000).map(|i| -0.5 + h * i as f64).collect();
        let f = solve_m1(&p, k, &xs).unwrap();
        for i in 1..xs.len() - 1 {
            let d2 = (f.m[i + 1] - 2.0 * f.m[i] + f.m[i - 1]) / (h * h);
            let d1 = (f.m[i + 1] - f.m[i - 1]) / (2.0 * h);
            let res = d2 + 2.0 * I * k * d1 - k * k * p.eval_q(xs[i]) * f.m[i];
            assert!(res.norm() < 1e-6 * (1.0 + k.norm_sqr()), "x={}", xs[i]);
        }
    }

    #[test]
    fn far_side_continuation_is_exact_plane_wave_pair() {
        let p = bump();
        let k = Complex64::new(1.3, 0.0);
        let xs = [-3.0, -2.0, -1.0];
        let f = solve_m1(&p, k, &xs).unwrap();
        // m₁ = A + B e^{−2ikx}: the combination m + m′/(2ik) is constant.
        let a: Vec<Complex64> = f
            .m
            .iter()
            .zip(&f.m_prime)
            .map(|(m, mp)| m + mp / (2.0 * I * k))
            .collect();
        assert!((a[0] - a[2]).norm() < 1e-14);
    }

    #[test]
    fn imaginary_axis_field_is_real_and_satisfies_lower_bound() {
        let p = bump();
        for kappa in [0.1, 1.0, 10.0, 100.0] {
            let f = solve_m1(&p, Complex64::new(0.0, kappa), &grid(-1.2, 1.2, 97)).unwrap();
            let m = imaginary_axis_margins(&p, &f);
            assert!(m.max_imag_ratio < 1e-14);
            assert!(m.min_m > 0.0);
            assert!(m.max_slope_ratio < 1.0);
            assert!(m.min_scaled_lower >= 1.0 - 1e-8, "kappa={kappa}: {}", m.min_scaled_lower);
        }
    }

    #[test]
    fn corrupted_field_fails_nonvanishing_check() {
        let mut f = solve_m1(&bump(), Complex64::new(5.0, 0.0), &grid(-1.0, 1.0, 11)).unwrap();
        assert!(jost_nonvanishing_check(&f).0);
        f.m[4] = ZERO;
        assert!(!jost_nonvanishing_check(&f).0);
    }
}
