//! Harmonic and outer extensions of real boundary data into the upper half-plane.
//!
//! Boundary samples are interpolated by a piecewise cubic. Cells close to the evaluation
//! point are integrated against `1/(t − z)` in closed form, the rest by Gauss–Legendre.
//! Beyond the sampled range the data follow a power-law tail model whose contribution is
//! reported separately so that callers can turn it into an error bar.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HelmError, Result};
use crate::interp::CubicHermite;
use crate::quad::{GaussLegendre, PanelGrid};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Largest `ε` of the default boundary-limit sequence `ε, ε/2, ε/4`.
pub const DEFAULT_EPS: f64 = 1e-2;

/// Behaviour of the data beyond the sampled range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailModel {
    Zero,
    /// `b(t) = amplitude · (|t|/|t_end|)^{−exponent}` past each end of the grid.
    PowerLaw {
        exponent: f64,
        left_amplitude: f64,
        right_amplitude: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// `1/(t − z)`.
    Cauchy,
    /// `1/(t − z) − t/(t² + 1)`.
    Outer,
}

impl Kernel {
    fn eval(self, t: f64, z: Complex64) -> Complex64 {
        match self {
            Kernel::Cauchy => ONE / (t - z),
            // Combined over a common denominator to avoid cancellation at large |t|.
            Kernel::Outer => (1.0 + t * z) / ((t - z) * (t * t + 1.0)),
        }
    }
}

/// `∫ b(t) K(t, z) dt`, with the part coming from the tail model kept apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelIntegral {
    pub value: Complex64,
    pub tail: Complex64,
}

#[derive(Debug, Clone)]
pub struct BoundaryData {
    ks: Vec<f64>,
    values: Vec<f64>,
    tail_model: TailModel,
    interp: CubicHermite,
}

impl BoundaryData {
    pub fn new(ks: Vec<f64>, values: Vec<f64>, tail_model: TailModel) -> Result<Self> {
        if ks.len() != values.len() {
            return Err(HelmError::Input("boundary abscissae and values differ in length".into()));
        }
        if ks.len() < 4 {
            return Err(HelmError::Input("boundary data need at least four samples".into()));
        }
        if !ks.windows(2).all(|w| w[1] > w[0]) || !ks.iter().all(|k| k.is_finite()) {
            return Err(HelmError::Input("boundary abscissae must be finite and strictly ascending".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(HelmError::Input(format!("boundary value at k = {} is not finite", ks[i])));
        }
        if !(ks[0] < 0.0 && ks[ks.len() - 1] > 0.0) {
            return Err(HelmError::Input("boundary grid must straddle k = 0".into()));
        }
        if let TailModel::PowerLaw { exponent, left_amplitude, right_amplitude } = tail_model {
            if !(exponent >= 0.0 && left_amplitude.is_finite() && right_amplitude.is_finite()) {
                return Err(HelmError::Input("power-law tail needs a nonnegative exponent".into()));
            }
        }
        let interp = CubicHermite::local(ks.clone(), values.clone());
        Ok(Self {
            ks,
            values,
            tail_model,
            interp,
        })
    }

    /// Builds the data with a power-law tail fitted on the outermost decade of each side.
    pub fn with_fitted_tails(ks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let zero = Self::new(ks, values, TailModel::Zero)?;
        let tail = fit_tails(&zero.interp);
        Ok(Self { tail_model: tail, ..zero })
    }

    /// Even data from samples at arbitrary-signed `ks`: values at `±k` are averaged, mirrored,
    /// and `value_at_zero` (if given) is inserted at `k = 0`. Tails are fitted.
    pub fn even(ks: &[f64], values: &[f64], value_at_zero: Option<f64>) -> Result<Self> {
        if ks.len() != values.len() {
            return Err(HelmError::Input("boundary abscissae and values differ in length".into()));
        }
        let mut pairs: Vec<(f64, f64)> = ks
            .iter()
            .zip(values)
            .filter(|(k, _)| **k != 0.0)
            .map(|(k, v)| (k.abs(), *v))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64, usize)> = Vec::new();
        for (k, v) in pairs {
            match merged.last_mut() {
                Some(last) if (last.0 - k).abs() <= 1e-13 * k => {
                    last.1 += v;
                    last.2 += 1;
                }
                _ => merged.push((k, v, 1)),
            }
        }
        let half: Vec<(f64, f64)> = merged.into_iter().map(|(k, s, n)| (k, s / n as f64)).collect();
        let mut xs: Vec<f64> = half.iter().rev().map(|(k, _)| -k).collect();
        let mut ys: Vec<f64> = half.iter().rev().map(|(_, v)| *v).collect();
        if let Some(v0) = value_at_zero {
            xs.push(0.0);
            ys.push(v0);
        }
        xs.extend(half.iter().map(|(k, _)| *k));
        ys.extend(half.iter().map(|(_, v)| *v));
        Self::with_fitted_tails(xs, ys)
    }

    pub fn ks(&self) -> &[f64] {
        &self.ks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail_model(&self) -> TailModel {
        self.tail_model
    }

    /// Interpolated value inside the grid, tail model outside.
    pub fn eval(&self, t: f64) -> f64 {
        let (lo, hi) = (self.ks[0], self.ks[self.ks.len() - 1]);
        if t >= lo && t <= hi {
            return self.interp.eval(t);
        }
        match self.tail_model {
            TailModel::Zero => 0.0,
            TailModel::PowerLaw { exponent, left_amplitude, right_amplitude } => {
                if t > hi {
                    right_amplitude * (t / hi).powf(-exponent)
                } else {
                    left_amplitude * (t / lo).powf(-exponent)
                }
            }
        }
    }

    /// `∫ b(t) K(t, z) dt` over the whole line, `Im z > 0`.
    pub fn integrate(&self, z: Complex64, kernel: Kernel) -> Result<KernelIntegral> {
        if !(z.im > 0.0) || !z.re.is_finite() {
            return Err(HelmError::Input(format!("need Im z > 0, got z = {z}")));
        }
        let rule = GaussLegendre::g16();
        let mut value = Complex64::new(0.0, 0.0);
        for i in 0..self.ks.len() - 1 {
            let (t0, t1) = (self.ks[i], self.ks[i + 1]);
            let h = t1 - t0;
            let dist = if z.re < t0 {
                (t0 - z.re).hypot(z.im)
            } else if z.re > t1 {
                (z.re - t1).hypot(z.im)
            } else {
                z.im
            };
            if dist < 2.0 * h {
                value += cauchy_cell(self.interp.cell_coefficients(i), h, z - t0);
                if kernel == Kernel::Outer {
                    value -= rule.integrate(t0, t1, |t| self.interp.eval(t) * t / (t * t + 1.0));
                }
            } else {
                value += rule.integrate_complex(t0, t1, |t| kernel.eval(t, z) * self.interp.eval(t));
            }
        }
        let tail = self.tail_integral(z, kernel);
        if !(value + tail).re.is_finite() || !(value + tail).im.is_finite() {
            return Err(HelmError::Input(format!("kernel quadrature failed at z = {z}")));
        }
        Ok(KernelIntegral {
            value: value + tail,
            tail,
        })
    }

    fn tail_integral(&self, z: Complex64, kernel: Kernel) -> Complex64 {
        let TailModel::PowerLaw { exponent, left_amplitude, right_amplitude } = self.tail_model else {
            return Complex64::new(0.0, 0.0);
        };
        // t = t_end · e^u over eight decades; beyond that the kernel decays like 1/t².
        let span = 8.0 * std::f64::consts::LN_10;
        let grid = PanelGrid::new(0.0, span, &[0.01, 0.03, 0.1, 0.3], 0.5, GaussLegendre::g16());
        let mut total = Complex64::new(0.0, 0.0);
        for (end, amp) in [(self.ks[self.ks.len() - 1], right_amplitude), (self.ks[0], left_amplitude)] {
            if amp == 0.0 {
                continue;
            }
            let vals: Vec<Complex64> = grid
                .nodes()
                .iter()
                .map(|&u| {
                    let t = end * u.exp();
                    kernel.eval(t, z) * (amp * (-exponent * u).exp()) * t.abs()
                })
                .collect();
            total += grid.sum_complex(&vals);
        }
        total
    }

    /// `∫ b(t) dt` over the line, and the tail-model part of it. A tail decaying no faster
    /// than `1/|t|` is an error.
    pub fn line_integral(&self) -> Result<(f64, f64)> {
        let mut inner = 0.0;
        for i in 0..self.ks.len() - 1 {
            let h = self.ks[i + 1] - self.ks[i];
            let [a0, a1, a2, a3] = self.interp.cell_coefficients(i);
            inner += h * (a0 + h * (a1 / 2.0 + h * (a2 / 3.0 + h * a3 / 4.0)));
        }
        let tail = match self.tail_model {
            TailModel::Zero => 0.0,
            TailModel::PowerLaw { exponent, left_amplitude, right_amplitude } => {
                if left_amplitude == 0.0 && right_amplitude == 0.0 {
                    0.0
                } else if exponent <= 1.0 {
                    return Err(HelmError::Input(format!(
                        "tail |t|^(-{exponent}) is not integrable"
                    )));
                } else {
                    (right_amplitude * self.ks[self.ks.len() - 1] - left_amplitude * self.ks[0])
                        / (exponent - 1.0)
                }
            }
        };
        Ok((inner + tail, tail))
    }

    fn require_nonpositive(&self) -> Result<()> {
        match self.values.iter().position(|&v| v > 1e-12) {
            Some(i) => Err(HelmError::Input(format!(
                "log-modulus data must be ≤ 0, got {} at k = {}",
                self.values[i], self.ks[i]
            ))),
            None => Ok(()),
        }
    }
}

/// `∫₀^h P(u)/(u − w) du` for the cubic `P(u) = a0 + a1 u + a2 u² + a3 u³`, `Im w > 0`.
fn cauchy_cell(a: [f64; 4], h: f64, w: Complex64) -> Complex64 {
    let [a0, a1, a2, a3] = a;
    // P(u) = (u − w)(q2 u² + q1 u + q0) + P(w).
    let q2 = Complex64::new(a3, 0.0);
    let q1 = a2 + w * a3;
    let q0 = a1 + w * q1;
    let pw = a0 + w * q0;
    let poly = q2 * (h * h * h / 3.0) + q1 * (h * h / 2.0) + q0 * h;
    // Both h − w and −w lie in the open lower half-plane, so principal logs are continuous.
    poly + pw * ((h - w).ln() - (-w).ln())
}

fn fit_tails(interp: &CubicHermite) -> TailModel {
    let ks = interp.xs();
    let decade = std::f64::consts::LN_10;
    // ∫ b(t) dt/t over [end·10^{−1/2}, end] and [end/10, end·10^{−1/2}] on one side.
    let side = |end: f64| -> Option<(f64, f64)> {
        if ks.iter().filter(|k| **k * end > 0.0 && k.abs() >= end.abs() / 10.0).count() < 4 {
            return None;
        }
        let log_end = end.abs().ln();
        let integral = |lo: f64, hi: f64| {
            let grid = PanelGrid::new(lo, hi, &[], (hi - lo) / 64.0, GaussLegendre::g16());
            let vals: Vec<f64> = grid
                .nodes()
                .iter()
                .map(|&u| interp.eval(end.signum() * u.exp()))
                .collect();
            grid.sum(&vals)
        };
        let mid = log_end - 0.5 * decade;
        Some((integral(log_end - decade, mid), integral(mid, log_end)))
    };
    let (Some((l1, l2)), Some((r1, r2))) = (side(ks[0]), side(ks[ks.len() - 1])) else {
        return TailModel::Zero;
    };
    let tiny = |x: f64| x.abs() < 1e-300;
    if (tiny(l2) && tiny(r2)) || (tiny(l1) && tiny(r1)) {
        return TailModel::Zero;
    }
    // For b ∝ |t|^{−p} the two half-decade integrals have ratio 10^{−p/2}.
    let ratio = (l2 + r2) / (l1 + r1);
    let exponent = if ratio > 0.0 {
        (-2.0 * ratio.log10()).clamp(0.0, 20.0)
    } else {
        0.0
    };
    let half_decade = 0.5 * decade;
    let norm = if exponent > 1e-9 {
        ((exponent * half_decade).exp() - 1.0) / exponent
    } else {
        half_decade
    };
    TailModel::PowerLaw {
        exponent,
        left_amplitude: l2 / norm,
        right_amplitude: r2 / norm,
    }
}

/// `(1/π) ∫ Im z / |t − z|² · b(t) dt` and the absolute contribution of the tail model.
pub fn poisson_extend_with_tail(b: &BoundaryData, z: Complex64) -> Result<(f64, f64)> {
    let r = b.integrate(z, Kernel::Cauchy)?;
    Ok((r.value.im / PI, r.tail.im.abs() / PI))
}

pub fn poisson_extend(b: &BoundaryData, z: Complex64) -> Result<f64> {
    Ok(poisson_extend_with_tail(b, z)?.0)
}

/// `−(i/2π) ∫ (1/(t − z) − t/(t² + 1)) b(t) dt`, the logarithm of the outer function.
pub fn outer_exponent(b: &BoundaryData, z: Complex64) -> Result<Complex64> {
    let r = b.integrate(z, Kernel::Outer)?;
    Ok(-I * r.value / (2.0 * PI))
}

/// The outer function `Θ_F(z)` whose boundary modulus satisfies `log |Θ_F|² = b`.
pub fn outer_function(b: &BoundaryData, z: Complex64) -> Result<Complex64> {
    b.require_nonpositive()?;
    Ok(outer_exponent(b, z)?.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryTrace {
    pub k: f64,
    pub value: Complex64,
    /// `| |value| − exp(b(k)/2) |`.
    pub modulus_mismatch: f64,
    /// Change of the exponent between the smallest `ε` and the extrapolated limit.
    pub extrapolation_change: f64,
}

/// `lim_{ε↓0} Θ_F(k0 + iε)` by Richardson extrapolation on `ε, ε/2, ε/4`.
pub fn boundary_trace(b: &BoundaryData, k0: f64, eps: f64) -> Result<BoundaryTrace> {
    b.require_nonpositive()?;
    let (lo, hi) = (b.ks[0], b.ks[b.ks.len() - 1]);
    if !(k0 > lo && k0 < hi) {
        return Err(HelmError::Input(format!("k0 = {k0} is outside the boundary grid")));
    }
    if !(eps > 0.0) {
        return Err(HelmError::Input(format!("ε must be positive, got {eps}")));
    }
    let f = |e: f64| outer_exponent(b, Complex64::new(k0, e));
    let (f1, f2, f4) = (f(eps)?, f(eps / 2.0)?, f(eps / 4.0)?);
    let limit = (8.0 * f4 - 6.0 * f2 + f1) / 3.0;
    let value = limit.exp();
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(HelmError::Input(format!("boundary limit did not converge at k = {k0}")));
    }
    Ok(BoundaryTrace {
        k: k0,
        value,
        modulus_mismatch: (value.norm() - (b.eval(k0) / 2.0).exp()).abs(),
        extrapolation_change: (limit - f4).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let pos: Vec<f64> = (0..n)
            .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
            .collect();
        let mut ks: Vec<f64> = pos.iter().rev().map(|k| -k).collect();
        ks.extend(pos);
        ks
    }

    fn data(f: impl Fn(f64) -> f64, tail: TailModel) -> BoundaryData {
        let ks = sym_grid(1e-3, 1e3, 600);
        let vs = ks.iter().map(|&k| f(k)).collect();
        BoundaryData::new(ks, vs, tail).unwrap()
    }

    #[test]
    fn cauchy_cell_matches_quadrature() {
        let a = [0.3, -1.2, 0.7, 0.25];
        let h = 0.4;
        for w in [Complex64::new(0.1, 0.05), Complex64::new(-0.3, 0.2), Complex64::new(0.4, 1e-3)] {
            let exact = cauchy_cell(a, h, w);
            let grid = PanelGrid::new(0.0, h, &[w.re.clamp(0.0, h)], 1e-3, GaussLegendre::g16());
            let vals: Vec<Complex64> = grid
                .nodes()
                .iter()
                .map(|&u| (a[0] + u * (a[1] + u * (a[2] + u * a[3]))) / (u - w))
                .collect();
            assert!((exact - grid.sum_complex(&vals)).norm() < 1e-9, "w = {w}");
        }
    }

    #[test]
    fn unit_mass() {
        let b = data(|_| 1.0, TailModel::PowerLaw { exponent: 0.0, left_amplitude: 1.0, right_amplitude: 1.0 });
        for z in [Complex64::new(0.0, 1.0), Complex64::new(3.0, 0.01), Complex64::new(-20.0, 5.0)] {
            assert!((poisson_extend(&b, z).unwrap() - 1.0).abs() < 1e-7, "z = {z}");
        }
    }

    #[test]
    fn lorentzian_closed_form() {
        let b = data(
            |t| 1.0 / (1.0 + t * t),
            TailModel::PowerLaw { exponent: 2.0, left_amplitude: 1.0 / (1.0 + 1e6), right_amplitude: 1.0 / (1.0 + 1e6) },
        );
        for (x, y) in [(0.0, 1.0), (0.5, 0.1), (-2.0, 3.0), (1.0, 1e-3)] {
            let exact = (y + 1.0) / (x * x + (y + 1.0) * (y + 1.0));
            let got = poisson_extend(&b, Complex64::new(x, y)).unwrap();
            assert!((got - exact).abs() < 1e-7, "({x},{y}): {got} vs {exact}");
        }
    }

    #[test]
    fn outer_modulus_matches_poisson_and_trivial_case() {
        let b = data(|t| -0.3 / (1.0 + t * t) - 0.1 * (-t * t).exp(), TailModel::Zero);
        let half = BoundaryData::new(b.ks.clone(), b.values.iter().map(|v| v / 2.0).collect(), TailModel::Zero).unwrap();
        for z in [Complex64::new(0.0, 1.0), Complex64::new(1.3, 0.2), Complex64::new(-4.0, 0.05)] {
            let theta = outer_function(&b, z).unwrap();
            let p = poisson_extend(&half, z).unwrap();
            assert!((theta.norm().ln() - p).abs() < 1e-9);
        }
        let flat = data(|_| 0.0, TailModel::Zero);
        assert_eq!(outer_function(&flat, Complex64::new(0.2, 0.3)).unwrap(), ONE);
    }

    #[test]
    fn outer_tends_to_one_at_origin_for_even_data() {
        let b = data(|t| (1.0 - 0.5 * t * t / (1.0 + t * t)).ln(), TailModel::Zero);
        // Θ_F(iy) → exp(b(0)/2) linearly in y; here b(0) ≈ −5e-7 from the samples at ±1e-3.
        let limit = (b.eval(0.0) / 2.0).exp();
        let d: Vec<f64> = [1e-4, 1e-6, 1e-8]
            .iter()
            .map(|&y| (outer_function(&b, Complex64::new(0.0, y)).unwrap() - limit).norm())
            .collect();
        assert!(d[0] < 1e-4 && d[1] < 1.5e-2 * d[0] && d[2] < 1e-8, "{d:?}");
        assert!((limit - 1.0).abs() < 1e-6);
    }

    #[test]
    fn boundary_trace_recovers_modulus_and_known_outer() {
        // F(z) = (z + i/2)/(z + i) is outer in the upper half-plane with F(0) = 1/2; its
        // normalised version z ↦ F(z)/F(0)… is not needed: Θ_F fixes Θ_F(i)'s phase by the
        // t/(t²+1) term, so compare with F(z)/|F(i)|·phase via the modulus and a ratio.
        let f = |z: Complex64| (z + 0.5 * I) / (z + I);
        let b = data(|t| (f(Complex64::new(t, 0.0)).norm_sqr()).ln(), TailModel::Zero);
        let r1 = boundary_trace(&b, 0.7, DEFAULT_EPS).unwrap();
        let r2 = boundary_trace(&b, -2.0, DEFAULT_EPS).unwrap();
        assert!(r1.modulus_mismatch < 1e-6 && r2.modulus_mismatch < 1e-6);
        // Outer functions with equal boundary modulus differ by a unimodular constant.
        let ratio1 = r1.value / f(Complex64::new(0.7, 0.0));
        let ratio2 = r2.value / f(Complex64::new(-2.0, 0.0));
        assert!((ratio1 - ratio2).norm() < 1e-5, "{ratio1} {ratio2}");
        assert!((ratio1.norm() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn fitted_tail_recovers_power_law() {
        let ks = sym_grid(1e-2, 100.0, 300);
        let vs: Vec<f64> = ks.iter().map(|&k| -(k * k).max(1.0).recip()).collect();
        let b = BoundaryData::with_fitted_tails(ks, vs).unwrap();
        match b.tail_model() {
            TailModel::PowerLaw { exponent, right_amplitude, .. } => {
                assert!((exponent - 2.0).abs() < 0.01, "{exponent}");
                assert!((right_amplitude + 1e-4).abs() < 2e-6);
            }
            TailModel::Zero => panic!("expected a power-law tail"),
        }
    }

    #[test]
    fn line_integral_with_power_tail() {
        // min(1, t^{−2}) integrates to 4, of which 2/100 lies beyond |t| = 100.
        let ks = sym_grid(1e-3, 100.0, 400);
        let vs: Vec<f64> = ks.iter().map(|&k| (k * k).max(1.0).recip()).collect();
        let b = BoundaryData::with_fitted_tails(ks, vs).unwrap();
        let (total, tail) = b.line_integral().unwrap();
        // The kink at |t| = 1 limits the cubic to about 1e-4 on this grid.
        assert!((total - 4.0).abs() < 5e-4, "{total}");
        assert!((tail - 0.02).abs() < 1e-6, "{tail}");
        let flat = data(|_| -1.0, TailModel::PowerLaw { exponent: 0.0, left_amplitude: -1.0, right_amplitude: -1.0 });
        assert!(flat.line_integral().is_err());
    }

    #[test]
    fn even_constructor_mirrors_and_inserts_origin() {
        let b = BoundaryData::even(&[0.5, -1.0, 1.0, 2.0, 3.0], &[1.0, 2.0, 4.0, 5.0, 6.0], Some(0.0)).unwrap();
        assert_eq!(b.ks(), &[-3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0]);
        assert_eq!(b.values(), &[6.0, 5.0, 3.0, 1.0, 0.0, 1.0, 3.0, 5.0, 6.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(BoundaryData::new(vec![1.0, 2.0, 3.0, 4.0], vec![0.0; 4], TailModel::Zero).is_err());
        let b = data(|_| 0.1, TailModel::Zero);
        assert!(outer_function(&b, Complex64::new(0.0, 1.0)).is_err());
        assert!(poisson_extend(&b, Complex64::new(0.0, 0.0)).is_err());
    }
}
