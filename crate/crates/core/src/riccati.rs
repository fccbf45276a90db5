//! The log-derivative field `w = u₁′/(ik u₁)`, its left counterpart `w₋ = −u₂′/(ik u₂)`,
//! the reflection field `r = (1 − w)/(1 + w)` and the travel-time reflection field `ρ`.
//!
//! Each is integrated directly from its Riccati equation, away from the side where it is
//! normalised, and continued in closed form across the far side of the support.

use std::cell::Cell;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{HelmError, OdeError, Result};
use crate::jost::{ode_options, ComplexField, Direction, DEFAULT_RTOL};
use crate::ode::{Dop853, OdeOptions};
use crate::profile::Profile;
use crate::quad::{GaussLegendre, PanelGrid};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `|r|` at which the reflection field is declared to have blown up.
pub const R_BLOWUP: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FieldKind {
    W,
    WMinus,
    R,
    Rho,
}

/// Samples of one Riccati field on an ascending grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiccatiField {
    pub k: Complex64,
    pub xs: Vec<f64>,
    pub values: Vec<Complex64>,
    pub which: FieldKind,
    /// Where the terminal condition is imposed, and its value.
    pub terminal: (f64, Complex64),
    /// The field at the opposite support edge.
    pub far_edge: (f64, Complex64),
    /// For `r`: `∫ₓ^∞ q r` at each sample, and over the whole line.
    pub tail_integral: Option<Vec<Complex64>>,
    pub total_integral: Option<Complex64>,
}

/// Riccati field integrator.
#[derive(Debug, Clone, Copy)]
pub struct RiccatiSolver {
    pub options: OdeOptions,
}

impl Default for RiccatiSolver {
    fn default() -> Self {
        Self::new(DEFAULT_RTOL)
    }
}

struct Marched<const N: usize> {
    inside: Vec<(usize, [Complex64; N])>,
    end: [Complex64; N],
}

fn check_inputs(k: Complex64, xs: &[f64]) -> Result<()> {
    if k.im < 0.0 {
        return Err(HelmError::Input(format!("Im k must be nonnegative, got k = {k}")));
    }
    if !xs.windows(2).all(|w| w[1] >= w[0]) {
        return Err(HelmError::Input("x-grid must be ascending".into()));
    }
    Ok(())
}

impl RiccatiSolver {
    pub fn new(rtol: f64) -> Self {
        Self {
            options: ode_options(rtol),
        }
    }

    fn march<const N: usize, F, G>(
        &self,
        p: &Profile,
        xs: &[f64],
        direction: Direction,
        y0: [Complex64; N],
        bounded: bool,
        rhs: F,
        guard: G,
    ) -> std::result::Result<Marched<N>, OdeError>
    where
        F: Fn(f64, &[Complex64; N]) -> [Complex64; N],
        G: FnMut(f64, &[Complex64; N]) -> std::result::Result<(), String>,
    {
        let (a, b) = p.support();
        let (start, end) = match direction {
            Direction::FromRight => (b, a),
            Direction::FromLeft => (a, b),
        };
        let mut idx: Vec<usize> = (0..xs.len()).filter(|&i| xs[i] > a && xs[i] < b).collect();
        if direction == Direction::FromRight {
            idx.reverse();
        }
        let mut targets: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
        targets.push(end);
        // Fields bounded by one start from zero and need an absolute floor.
        let mut options = self.options;
        if bounded {
            options.atol = options.atol.max(1e-3 * options.rtol);
        }
        let (states, _) =
            Dop853::new(options).march(&rhs, start, y0, &targets, p.breakpoints(), guard)?;
        Ok(Marched {
            inside: idx.into_iter().zip(states.iter().copied()).collect(),
            end: states[states.len() - 1],
        })
    }

    /// `r′ = −2ikr + (ik q/2)(1 + r)²` with `r = 0` right of the support. The integral
    /// `∫ₓ^∞ q r` is carried along as a second component.
    pub fn solve_r(&self, p: &Profile, k: Complex64, xs: &[f64]) -> Result<RiccatiField> {
        check_inputs(k, xs)?;
        let (a, b) = p.support();
        let n = xs.len();
        let mut field = RiccatiField {
            k,
            xs: xs.to_vec(),
            values: vec![ZERO; n],
            which: FieldKind::R,
            terminal: (b, ZERO),
            far_edge: (a, ZERO),
            tail_integral: Some(vec![ZERO; n]),
            total_integral: Some(ZERO),
        };
        if k == ZERO || p.is_trivial() {
            return Ok(field);
        }
        let half_ik = I * k / 2.0;
        let rhs = |x: f64, y: &[Complex64; 2]| {
            let q = p.eval_q(x);
            let one_r = ONE + y[0];
            [-2.0 * I * k * y[0] + half_ik * q * one_r * one_r, -q * y[0]]
        };
        let blown = Cell::new(None);
        let guard = |x: f64, y: &[Complex64; 2]| {
            let m = y[0].norm();
            if m >= R_BLOWUP || !m.is_finite() {
                blown.set(Some((x, m)));
                Err(format!("|r| = {m}"))
            } else {
                Ok(())
            }
        };
        let marched = match self.march(p, xs, Direction::FromRight, [ZERO, ZERO], true, rhs, guard) {
            Ok(m) => m,
            Err(e) => {
                return Err(match blown.get() {
                    Some((x, modulus)) => HelmError::RiccatiBlowUp { x, modulus },
                    None => e.into(),
                })
            }
        };
        let tails = field.tail_integral.as_mut().expect("set above");
        for (i, st) in &marched.inside {
            field.values[*i] = st[0];
            tails[*i] = st[1];
        }
        let [r_a, j_a] = marched.end;
        for i in 0..n {
            if xs[i] <= a {
                field.values[i] = r_a * (-2.0 * I * k * (xs[i] - a)).exp();
                tails[i] = j_a;
            }
        }
        field.far_edge = (a, r_a);
        field.total_integral = Some(j_a);
        Ok(field)
    }

    /// `w′ = ik/c² − ik w²` with `w = 1` right of the support.
    pub fn solve_w(&self, p: &Profile, k: Complex64, xs: &[f64]) -> Result<RiccatiField> {
        self.solve_w_like(p, k, xs, Direction::FromRight)
    }

    /// `w₋′ = −ik/c² + ik w₋²` with `w₋ = 1` left of the support.
    pub fn solve_w_minus(&self, p: &Profile, k: Complex64, xs: &[f64]) -> Result<RiccatiField> {
        self.solve_w_like(p, k, xs, Direction::FromLeft)
    }

    fn solve_w_like(
        &self,
        p: &Profile,
        k: Complex64,
        xs: &[f64],
        direction: Direction,
    ) -> Result<RiccatiField> {
        check_inputs(k, xs)?;
        let (a, b) = p.support();
        let n = xs.len();
        let (which, start, end) = match direction {
            Direction::FromRight => (FieldKind::W, b, a),
            Direction::FromLeft => (FieldKind::WMinus, a, b),
        };
        let mut field = RiccatiField {
            k,
            xs: xs.to_vec(),
            values: vec![ONE; n],
            which,
            terminal: (start, ONE),
            far_edge: (end, ONE),
            tail_integral: None,
            total_integral: None,
        };
        if k == ZERO || p.is_trivial() {
            return Ok(field);
        }
        let s = direction.sign();
        let rhs = |x: f64, y: &[Complex64; 1]| {
            let c = p.eval_c(x);
            [s * I * k * (1.0 / (c * c) - y[0] * y[0])]
        };
        let bad = Cell::new(None);
        let guard = |x: f64, y: &[Complex64; 1]| {
            let w = y[0];
            if (ONE + w).norm() <= 1.0 || w.re <= 0.0 || !w.re.is_finite() {
                bad.set(Some(x));
                Err(format!("w = {w} left the right half-plane"))
            } else {
                Ok(())
            }
        };
        let marched = match self.march(p, xs, direction, [ONE], false, rhs, guard) {
            Ok(m) => m,
            Err(e) => {
                return Err(match bad.get() {
                    Some(x) => HelmError::SolverBug {
                        x,
                        message: "Re w must stay positive".into(),
                    },
                    None => e.into(),
                })
            }
        };
        for (i, st) in &marched.inside {
            field.values[*i] = st[0];
        }
        let w_end = marched.end[0];
        // Beyond the far edge (1 − w)/(1 + w) is a pure plane-wave ratio e^{−2iskx}.
        let r_end = (ONE - w_end) / (ONE + w_end);
        for i in 0..n {
            let beyond = match direction {
                Direction::FromRight => xs[i] <= a,
                Direction::FromLeft => xs[i] >= b,
            };
            if beyond {
                let r = r_end * (-2.0 * I * s * k * (xs[i] - end)).exp();
                field.values[i] = (ONE - r) / (ONE + r);
            }
        }
        field.far_edge = (end, w_end);
        Ok(field)
    }

    /// `ρ(χ(x), k)` from `ρ′ = −(2ik/c)ρ − (c′/2c)(1 − ρ²)`, `ρ = 0` right of the support.
    pub fn rho_field(&self, p: &Profile, k: f64, xs: &[f64]) -> Result<RiccatiField> {
        let kc = Complex64::new(k, 0.0);
        check_inputs(kc, xs)?;
        if !p.is_smooth() {
            return Err(HelmError::Input(
                "the travel-time reflection field needs a continuous wave speed".into(),
            ));
        }
        let (a, b) = p.support();
        let n = xs.len();
        let mut field = RiccatiField {
            k: kc,
            xs: xs.to_vec(),
            values: vec![ZERO; n],
            which: FieldKind::Rho,
            terminal: (b, ZERO),
            far_edge: (a, ZERO),
            tail_integral: None,
            total_integral: None,
        };
        if k == 0.0 || p.is_trivial() {
            return Ok(field);
        }
        let rhs = |x: f64, y: &[Complex64; 1]| {
            let c = p.eval_c(x);
            let g = p.eval_c_prime(x) / (2.0 * c);
            [-2.0 * I * kc / c * y[0] - g * (ONE - y[0] * y[0])]
        };
        let marched = self.march(p, xs, Direction::FromRight, [ZERO], true, rhs, |_, _| Ok(()))?;
        for (i, st) in &marched.inside {
            field.values[*i] = st[0];
        }
        let rho_a = marched.end[0];
        for i in 0..n {
            if xs[i] <= a {
                field.values[i] = rho_a * (-2.0 * I * kc * (xs[i] - a)).exp();
            }
        }
        field.far_edge = (a, rho_a);
        Ok(field)
    }

    /// `∫ q(x) r(x, iκ) dx`.
    pub fn qr_integral(&self, p: &Profile, kappa: f64) -> Result<f64> {
        if kappa <= 0.0 {
            return Err(HelmError::Input(format!("κ must be positive, got {kappa}")));
        }
        let f = self.solve_r(p, Complex64::new(0.0, kappa), &[])?;
        Ok(f.total_integral.expect("r field carries its integral").re)
    }
}

pub fn solve_r(p: &Profile, k: Complex64, xs: &[f64]) -> Result<RiccatiField> {
    RiccatiSolver::default().solve_r(p, k, xs)
}

pub fn solve_w(p: &Profile, k: Complex64, xs: &[f64]) -> Result<RiccatiField> {
    RiccatiSolver::default().solve_w(p, k, xs)
}

pub fn solve_w_minus(p: &Profile, k: Complex64, xs: &[f64]) -> Result<RiccatiField> {
    RiccatiSolver::default().solve_w_minus(p, k, xs)
}

pub fn qr_integral(p: &Profile, kappa: f64) -> Result<f64> {
    RiccatiSolver::default().qr_integral(p, kappa)
}

pub fn rho_field(p: &Profile, k: f64, xs: &[f64]) -> Result<RiccatiField> {
    RiccatiSolver::default().rho_field(p, k, xs)
}

/// `R₂ = e^{2ik x_min} r(x_min, k)` from a reflection field.
pub fn r_to_r2(field: &RiccatiField) -> Complex64 {
    assert_eq!(field.which, FieldKind::R, "R₂ is read off the reflection field");
    let (a, r_a) = field.far_edge;
    (2.0 * I * field.k * a).exp() * r_a
}

/// Energy balance `1 − |r(x)|² = exp(k ∫ₓ^∞ q Im r)` for real `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyCheck {
    /// Largest residual over the grid.
    pub max_residual: f64,
    /// `exp(k ∫ q Im r)` over the whole line; equals `1 − |R₂|²`.
    pub transmitted: f64,
    /// `|transmitted − (1 − |R₂|²)|` with `R₂` read off the same field.
    pub left_edge_residual: f64,
}

pub fn energy_identity(field: &RiccatiField) -> EnergyCheck {
    let k = field.k.re;
    let tails = field
        .tail_integral
        .as_ref()
        .expect("energy balance needs the reflection field");
    let max_residual = field
        .values
        .iter()
        .zip(tails)
        .map(|(r, j)| ((1.0 - r.norm_sqr()) - (k * j.im).exp()).abs())
        .fold(0.0, f64::max);
    let total = field.total_integral.expect("reflection field").im;
    let transmitted = (k * total).exp();
    let r2 = r_to_r2(field);
    EnergyCheck {
        max_residual,
        transmitted,
        left_edge_residual: (transmitted - (1.0 - r2.norm_sqr())).abs(),
    }
}

pub fn energy_identity_residual(p: &Profile, k: f64, xs: &[f64]) -> Result<EnergyCheck> {
    Ok(energy_identity(&solve_r(p, Complex64::new(k, 0.0), xs)?))
}

/// `max_x |Re w · |m₁|² − 1|` for real `k` (where `|u₁| = |m₁|`).
pub fn w_modulus_residual(w: &RiccatiField, m1: &ComplexField) -> f64 {
    w.values
        .iter()
        .zip(&m1.m)
        .map(|(w, m)| (w.re * m.norm_sqr() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// The imaginary-axis bounds `2/(2 + c_M²γ₀) ≤ w(x, iκ) ≤ 1 + γ₀/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImaginaryAxisBounds {
    pub min_w: f64,
    pub max_w: f64,
    pub lower: f64,
    pub upper: f64,
    pub max_imag: f64,
}

impl ImaginaryAxisBounds {
    pub fn holds(&self, margin: f64) -> bool {
        self.min_w >= self.lower - margin && self.max_w <= self.upper + margin
    }
}

pub fn imaginary_axis_bounds(p: &Profile, field: &RiccatiField) -> ImaginaryAxisBounds {
    let f = p.functionals();
    let cm = p.c_m();
    let mut out = ImaginaryAxisBounds {
        min_w: f64::INFINITY,
        max_w: f64::NEG_INFINITY,
        lower: 2.0 / (2.0 + cm * cm * f.gamma0),
        upper: 1.0 + f.gamma0 / 2.0,
        max_imag: 0.0,
    };
    for w in &field.values {
        out.min_w = out.min_w.min(w.re);
        out.max_w = out.max_w.max(w.re);
        out.max_imag = out.max_imag.max(w.im.abs());
    }
    out
}

/// Both sides of `‖w₁(·, iκ) − w₂(·, iκ)‖₁ ≤ ‖q₁ − q₂‖₁ / α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub alpha: f64,
}

impl StabilityCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + 1e-6)
    }
}

pub fn w_stability_check(p1: &Profile, p2: &Profile, kappa: f64) -> Result<StabilityCheck> {
    RiccatiSolver::default().w_stability_check(p1, p2, kappa)
}

impl RiccatiSolver {
    pub fn w_stability_check(&self, p1: &Profile, p2: &Profile, kappa: f64) -> Result<StabilityCheck> {
        if kappa <= 0.0 {
            return Err(HelmError::Input(format!("κ must be positive, got {kappa}")));
        }
        let alpha_of = |p: &Profile| {
            let cm = p.c_m();
            2.0 / (2.0 + cm * cm * p.functionals().gamma0)
        };
        let alpha = alpha_of(p1) + alpha_of(p2);
        let (a1, b1) = p1.support();
        let (a2, b2) = p2.support();
        let (a, b) = (a1.min(a2), b1.max(b2));
        // Left of both supports w − 1 decays like e^{2κ(x − a)}.
        let tail = 40.0 / (2.0 * kappa);
        let mut bps: Vec<f64> = p1.breakpoints().to_vec();
        bps.extend_from_slice(p2.breakpoints());
        let width = ((b - a) / 64.0).min(0.5 / kappa).max((b - a) / 4096.0);
        let near = PanelGrid::new(a, b, &bps, width, GaussLegendre::g16());
        let far = PanelGrid::new(a - tail, a, &[], tail / 32.0, GaussLegendre::g16());

        let mut lhs = 0.0;
        let k = Complex64::new(0.0, kappa);
        for grid in [&far, &near] {
            let w1 = self.solve_w(p1, k, grid.nodes())?;
            let w2 = self.solve_w(p2, k, grid.nodes())?;
            let diff: Vec<f64> = w1.values.iter().zip(&w2.values).map(|(x, y)| (x - y).norm()).collect();
            lhs += grid.sum(&diff);
        }
        let dq: Vec<f64> = near
            .nodes()
            .iter()
            .map(|&x| (p1.eval_q(x) - p2.eval_q(x)).abs())
            .collect();
        let rhs = near.sum(&dq) / alpha;
        Ok(StabilityCheck { lhs, rhs, alpha })
    }
}

/// `max_x |ρ(χ(x))| ` against the bound `1 − e^{−∫|c′/c|}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SylvesterCheck {
    pub max_rho: f64,
    pub bound: f64,
}

impl SylvesterCheck {
    pub fn holds(&self, margin: f64) -> bool {
        self.max_rho <= self.bound + margin
    }
}

pub fn sylvester_check(p: &Profile, rho: &RiccatiField) -> SylvesterCheck {
    let bv = p.functionals().bv_log_mu;
    SylvesterCheck {
        max_rho: rho.values.iter().map(|v| v.norm()).fold(0.0, f64::max),
        bound: 1.0 - (-bv).exp(),
    }
}

/// `max |ρ − (1 − c w)/(1 + c w)|` between a travel-time field and a `w` field on the
/// same grid.
pub fn rho_w_consistency(p: &Profile, rho: &RiccatiField, w: &RiccatiField) -> f64 {
    rho.xs
        .iter()
        .zip(rho.values.iter().zip(&w.values))
        .map(|(&x, (r, w))| {
            let cw = w * p.eval_c(x);
            (r - (ONE - cw) / (ONE + cw)).norm()
        })
        .fold(0.0, f64::max)
}

/// `ρ = (iku₁ − c u₁′)/(iku₁ + c u₁′)` evaluated from a Jost field.
pub fn rho_from_jost(p: &Profile, m1: &ComplexField) -> Vec<Complex64> {
    let k = m1.k;
    m1.xs
        .iter()
        .zip(m1.m.iter().zip(&m1.m_prime))
        .map(|(&x, (&m, &mp))| {
            // The common factor e^{ikx} cancels.
            let c = p.eval_c(x);
            let du = mp + I * k * m;
            (I * k * m - c * du) / (I * k * m + c * du)
        })
        .collect()
}

/// `∫_K (1 + k²)^{-1} |Re (w + w₋)^{-1}| dk` over a real grid at fixed `x`, together with
/// the smallest value of `Re (w + w₋)^{-1}` seen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummabilityCheck {
    pub integral: f64,
    pub min_real_part: f64,
}

pub fn poisson_summability(p: &Profile, x: f64, ks: &[f64]) -> Result<SummabilityCheck> {
    let solver = RiccatiSolver::default();
    let mut vals = Vec::with_capacity(ks.len());
    let mut min_re = f64::INFINITY;
    for &k in ks {
        let kc = Complex64::new(k, 0.0);
        let w = solver.solve_w(p, kc, &[x])?.values[0];
        let wm = solver.solve_w_minus(p, kc, &[x])?.values[0];
        let re = (ONE / (w + wm)).re;
        min_re = min_re.min(re);
        vals.push(re.abs() / (1.0 + k * k));
    }
    let integral = ks
        .windows(2)
        .zip(vals.windows(2))
        .map(|(k, v)| 0.5 * (k[1] - k[0]) * (v[0] + v[1]))
        .sum();
    Ok(SummabilityCheck {
        integral,
        min_real_part: min_re,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jost::solve_m1;
    use crate::profile::ProfileKind;
    use crate::scatter::{field_grid, scattering_at};

    fn slab() -> Profile {
        Profile::from_kind(ProfileKind::Slab {
            c_s: 2.0,
            x_l: 0.0,
            x_r: 1.0,
        })
        .unwrap()
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
    fn trivial_cases() {
        let xs = [-1.0, 0.0, 1.0];
        let r = solve_r(&Profile::constant(), Complex64::new(1.0, 0.0), &xs).unwrap();
        assert!(r.values.iter().all(|v| *v == ZERO));
        let w = solve_w(&bump(), ZERO, &xs).unwrap();
        assert!(w.values.iter().all(|v| *v == ONE));
    }

    #[test]
    fn reflection_field_left_of_slab_is_a_plane_wave() {
        let k = Complex64::new(1.0, 0.0);
        let xs = [-2.0, -1.3, -0.4, 0.0];
        let f = solve_r(&slab(), k, &xs).unwrap();
        let stripped: Vec<Complex64> = xs
            .iter()
            .zip(&f.values)
            .map(|(&x, r)| r * (2.0 * I * k * x).exp())
            .collect();
        for v in &stripped {
            assert!((v - stripped[0]).norm() < 1e-10);
        }
        let s = scattering_at(&slab(), 1.0).unwrap();
        assert!((r_to_r2(&f) - s.r2).norm() < 1e-10);
    }

    #[test]
    fn riccati_and_integral_paths_agree_for_bump() {
        let p = bump();
        for k in [0.5, 3.0, 20.0] {
            let f = solve_r(&p, Complex64::new(k, 0.0), &[]).unwrap();
            let s = scattering_at(&p, k).unwrap();
            assert!((r_to_r2(&f) - s.r2).norm() <= 1e-8 * s.r2.norm(), "k={k}");
        }
    }

    #[test]
    fn w_matches_inverse_jost_modulus() {
        let p = bump();
        let xs = field_grid(&p, 61);
        for k in [0.4, 2.0] {
            let kc = Complex64::new(k, 0.0);
            let w = solve_w(&p, kc, &xs).unwrap();
            let m = solve_m1(&p, kc, &xs).unwrap();
            assert!(w_modulus_residual(&w, &m) < 1e-10);
        }
    }

    #[test]
    fn w_real_part_matches_energy_integral_off_axis() {
        // Re w(x) = Im k/(|k|²|u|²) ∫ₓ^∞ (|k|²|u|²/c² + |u′|²).
        let p = bump();
        let k = Complex64::new(1.5, 0.7);
        let x0 = -0.3;
        let b = p.support().1;
        let grid = PanelGrid::new(x0, b, p.breakpoints(), 0.05, GaussLegendre::g16());
        let mut xs = vec![x0];
        xs.extend_from_slice(grid.nodes());
        let m = solve_m1(&p, k, &xs).unwrap();
        let u = m.u();
        let integrand: Vec<f64> = grid
            .nodes()
            .iter()
            .zip(&u[1..])
            .map(|(&x, (u, up))| {
                let c = p.eval_c(x);
                k.norm_sqr() * u.norm_sqr() / (c * c) + up.norm_sqr()
            })
            .collect();
        // Beyond the support u = e^{ikx}: the tail contributes |k|² e^{−2 Im k b}/Im k.
        let tail = k.norm_sqr() * (-2.0 * k.im * b).exp() / k.im;
        let integral = grid.sum(&integrand) + tail;
        let expected = k.im / (k.norm_sqr() * u[0].0.norm_sqr()) * integral;
        let w = solve_w(&p, k, &[x0]).unwrap();
        assert!((w.values[0].re - expected).abs() < 1e-9, "{} vs {expected}", w.values[0].re);
    }

    #[test]
    fn imaginary_axis_bounds_hold() {
        for p in [bump(), slab()] {
            let xs = field_grid(&p, 81);
            for kappa in [0.1, 1.0, 10.0, 100.0] {
                let w = solve_w(&p, Complex64::new(0.0, kappa), &xs).unwrap();
                let b = imaginary_axis_bounds(&p, &w);
                assert!(b.holds(1e-9), "{b:?}");
                assert!(b.max_imag < 1e-12);
            }
        }
    }

    #[test]
    fn energy_identity_for_bump() {
        let p = bump();
        let s = scattering_at(&p, 1.0).unwrap();
        let e = energy_identity_residual(&p, 1.0, &field_grid(&p, 101)).unwrap();
        assert!(e.max_residual < 1e-10);
        assert!(e.left_edge_residual < 1e-10);
        assert!((e.transmitted - (1.0 - s.r2.norm_sqr())).abs() < 1e-10);
    }

    #[test]
    fn qr_integral_approaches_q_squared_integral() {
        let p = bump();
        let target = p.functionals().int_big_q2;
        let vals: Vec<f64> = [10.0, 20.0, 40.0, 80.0]
            .iter()
            .map(|&k| qr_integral(&p, k).unwrap())
            .collect();
        let diffs: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        assert!(diffs.windows(2).all(|d| d[1] < d[0]), "{vals:?}");
        let at100 = qr_integral(&p, 100.0).unwrap();
        assert!((at100 - target).abs() / target < 0.05);
    }

    #[test]
    fn rho_paths_agree_and_respect_bound() {
        let a = 0.1f64.exp() - 1.0;
        let p = Profile::from_kind(ProfileKind::Bump {
            amplitude: a,
            center: 0.0,
            width: 1.0,
        })
        .unwrap();
        let xs = field_grid(&p, 81);
        for k in [0.5, 5.0] {
            let rho = rho_field(&p, k, &xs).unwrap();
            let w = solve_w(&p, Complex64::new(k, 0.0), &xs).unwrap();
            assert!(rho_w_consistency(&p, &rho, &w) < 1e-10);
            let m1 = solve_m1(&p, Complex64::new(k, 0.0), &xs).unwrap();
            let from_jost = rho_from_jost(&p, &m1);
            for (x, y) in rho.values.iter().zip(&from_jost) {
                assert!((x - y).norm() < 1e-10);
            }
            assert!(sylvester_check(&p, &rho).holds(1e-9));
        }
    }

    #[test]
    fn stability_inequality_for_nearby_bumps() {
        let p1 = bump();
        let p2 = Profile::from_kind(ProfileKind::Bump {
            amplitude: 0.45,
            center: 0.1,
            width: 0.9,
        })
        .unwrap();
        let c = w_stability_check(&p1, &p2, 1.0).unwrap();
        assert!(c.holds(), "{c:?}");
        let same = w_stability_check(&p1, &p1, 1.0).unwrap();
        assert_eq!(same.lhs, 0.0);
        assert_eq!(same.rhs, 0.0);
    }

    #[test]
    fn poisson_summability_at_a_point() {
        let p = bump();
        let ks: Vec<f64> = (0..=400).map(|i| -40.0 + 0.2 * i as f64).collect();
        let s = poisson_summability(&p, 0.0, &ks).unwrap();
        assert!(s.min_real_part > 0.0);
        // Re (w + w₋)^{-1} tends to c/2 for large |k|.
        assert!(s.integral > 0.0 && s.integral < std::f64::consts::PI * p.c_m(), "{}", s.integral);
    }
}
