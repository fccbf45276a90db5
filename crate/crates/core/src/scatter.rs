//! Transmission and reflection coefficients.
//!
//! For real `k` the primary values come from the integral representations
//! `1/T = 1 − (k/2i)∫q m₁` and `R₂/T = (k/2i)∫e^{2ikt} q m₁`, evaluated with composite
//! Gauss–Legendre panels fine enough to resolve every oscillation of the integrand. The
//! terminal values of `m₁` at the left support edge (and of `m₂` at the right edge) give an
//! independent second path used as a diagnostic.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HelmError, Result};
use crate::jost::{Direction, JostSolver, DEFAULT_RTOL};
use crate::profile::Profile;
use crate::quad::{neville_at_zero, GaussLegendre, PanelGrid};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Minimum `|1/T|` accepted before a solve is declared broken.
const INVERSE_T_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    WronskianPath,
    IntegralPath,
    TransferMatrix,
    Analytic,
}

/// Cross-checks recorded alongside each scattering point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatterDiagnostics {
    /// `T` and `R₂` from the terminal values of `m₁`.
    pub t_terminal: Complex64,
    pub r2_terminal: Complex64,
    /// `T₁` and `R₁` from the terminal values of `m₂`.
    pub t1_terminal: Complex64,
    pub r1_terminal: Complex64,
    /// `max(|ΔT|, |ΔR₂|)` between the integral and terminal-value paths.
    pub path_disagreement: f64,
    /// `|T − T₁| / |T|`.
    pub reciprocity: f64,
    /// `|R₁T(−k) + R₂(−k)T(k)|` with `R₁` taken from the `m₂` path.
    pub reflection_relation: f64,
}

impl ScatterDiagnostics {
    fn exact() -> Self {
        Self {
            t_terminal: ONE,
            r2_terminal: ZERO,
            t1_terminal: ONE,
            r1_terminal: ZERO,
            path_disagreement: 0.0,
            reciprocity: 0.0,
            reflection_relation: 0.0,
        }
    }
}

/// Scattering coefficients at one wavenumber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub k: Complex64,
    #[serde(rename = "T")]
    pub t: Complex64,
    #[serde(rename = "R1")]
    pub r1: Complex64,
    #[serde(rename = "R2")]
    pub r2: Complex64,
    /// Largest of `||T|² + |R₂|² − 1|` and `||T₁|² + |R₁|² − 1|` over both paths.
    pub unitarity_residual: f64,
    pub method: Method,
    pub diagnostics: ScatterDiagnostics,
}

impl ScatterPoint {
    /// The exact values at `k = 0` or for the trivial profile.
    pub fn trivial(k: Complex64) -> Self {
        Self {
            k,
            t: ONE,
            r1: ZERO,
            r2: ZERO,
            unitarity_residual: 0.0,
            method: Method::Analytic,
            diagnostics: ScatterDiagnostics::exact(),
        }
    }
}

/// Scattering data on a real grid excluding `k = 0`; the limits there are `T = 1`, `R₂ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterGrid {
    pub ks: Vec<f64>,
    pub points: Vec<ScatterPoint>,
    pub t_at_zero: Complex64,
    pub r2_at_zero: Complex64,
}

impl ScatterGrid {
    pub fn r2(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.r2).collect()
    }

    pub fn t(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn max_unitarity_residual(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.unitarity_residual)
            .fold(0.0, f64::max)
    }
}

/// Real wavenumber grids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum KGridSpec {
    /// `n` log-spaced magnitudes in `[lo, hi]` on each side of zero.
    SymmetricLog { lo: f64, hi: f64, n: usize },
    /// `n` log-spaced positive values in `[lo, hi]`.
    Log { lo: f64, hi: f64, n: usize },
    /// `n` equally spaced values in `[lo, hi]`, with zero removed.
    Linear { lo: f64, hi: f64, n: usize },
}

impl Default for KGridSpec {
    fn default() -> Self {
        KGridSpec::SymmetricLog {
            lo: 1e-3,
            hi: 50.0,
            n: 400,
        }
    }
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

impl KGridSpec {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi, n, positive) = match *self {
            KGridSpec::SymmetricLog { lo, hi, n } | KGridSpec::Log { lo, hi, n } => (lo, hi, n, true),
            KGridSpec::Linear { lo, hi, n } => (lo, hi, n, false),
        };
        if n == 0 {
            return Err(HelmError::Input("k-grid needs at least one point".into()));
        }
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(HelmError::Input(format!("k-grid range [{lo}, {hi}] is empty")));
        }
        if positive && lo <= 0.0 {
            return Err(HelmError::Input("log-spaced k-grids need a positive lower end".into()));
        }
        Ok(())
    }

    /// Ascending grid values.
    pub fn values(&self) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(match *self {
            KGridSpec::SymmetricLog { lo, hi, n } => {
                let pos = log_space(lo, hi, n);
                pos.iter().rev().map(|k| -k).chain(pos.iter().copied()).collect()
            }
            KGridSpec::Log { lo, hi, n } => log_space(lo, hi, n),
            KGridSpec::Linear { lo, hi, n } => {
                let v: Vec<f64> = if n == 1 {
                    vec![lo]
                } else {
                    (0..n)
                        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                        .collect()
                };
                v.into_iter().filter(|&k| k != 0.0).collect()
            }
        })
    }
}

/// Forward scattering solver.
#[derive(Debug, Clone, Copy)]
pub struct ScatterSolver {
    pub jost: JostSolver,
    /// Multiplier on the default quadrature panel width.
    pub panel_scale: f64,
}

impl Default for ScatterSolver {
    fn default() -> Self {
        Self::new(DEFAULT_RTOL)
    }
}

impl ScatterSolver {
    pub fn new(rtol: f64) -> Self {
        Self {
            jost: JostSolver::new(rtol),
            panel_scale: 1.0,
        }
    }

    /// Panel widths scaled for a target quadrature accuracy `quad_tol`. The 16-point rule
    /// errs like width³², and the default widths sit near 1e-13.
    pub fn with_quad_tol(rtol: f64, quad_tol: f64) -> Result<Self> {
        if !(quad_tol > 0.0 && quad_tol < 1.0) {
            return Err(HelmError::Input(format!("quadrature tolerance must lie in (0, 1), got {quad_tol}")));
        }
        Ok(Self {
            panel_scale: (quad_tol / 1e-13).powf(1.0 / 32.0).clamp(0.25, 2.0),
            ..Self::new(rtol)
        })
    }

    /// Quadrature panels over the support resolving the oscillations of `e^{2ikt} m₁`.
    pub fn panels(&self, p: &Profile, k: Complex64) -> PanelGrid {
        let (a, b) = p.support();
        let c_min = p.c_range().0;
        let mut width = (b - a) / 24.0;
        if k.norm() > 0.0 {
            width = width.min(PI / (k.norm() * (1.0 + 1.0 / c_min)));
        }
        width *= self.panel_scale;
        PanelGrid::new(a, b, p.breakpoints(), width, GaussLegendre::g16())
    }

    pub fn scattering_at(&self, p: &Profile, k: f64) -> Result<ScatterPoint> {
        if k == 0.0 {
            return Err(HelmError::Input(
                "k = 0 is handled by its analytic limit, not by a solve".into(),
            ));
        }
        if !k.is_finite() {
            return Err(HelmError::Input(format!("k = {k} is not finite")));
        }
        let kc = Complex64::new(k, 0.0);
        if p.is_trivial() {
            return Ok(ScatterPoint::trivial(kc));
        }
        let (a, b) = p.support();
        let panels = self.panels(p, kc);
        let mut xs = vec![a];
        xs.extend_from_slice(panels.nodes());
        let m1 = self.jost.solve(p, kc, &xs, Direction::FromRight)?;
        let (m1_a, m1p_a) = (m1.m[0], m1.m_prime[0]);

        let qm: Vec<Complex64> = panels
            .nodes()
            .iter()
            .zip(&m1.m[1..])
            .map(|(&x, &m)| m * p.eval_q(x))
            .collect();
        let int_qm = panels.sum_complex(&qm);
        let osc: Vec<Complex64> = panels
            .nodes()
            .iter()
            .zip(&qm)
            .map(|(&x, &v)| v * (2.0 * I * kc * x).exp())
            .collect();
        let int_osc = panels.sum_complex(&osc);
        let half_k = kc / (2.0 * I);
        let inv_t = ONE - half_k * int_qm;
        if inv_t.norm() < INVERSE_T_FLOOR {
            return Err(HelmError::Vanishing {
                quantity: "1/T".into(),
                x: a,
                modulus: inv_t.norm(),
            });
        }
        let t = ONE / inv_t;
        let r2 = half_k * int_osc * t;

        let two_ik = 2.0 * I * kc;
        let t_term = ONE / (m1_a + m1p_a / two_ik);
        let r2_term = -(two_ik * a).exp() * m1p_a / two_ik * t_term;
        let (m2_b, m2p_b) = self.jost.m2_at_right_edge(p, kc)?;
        let t1_term = ONE / (m2_b - m2p_b / two_ik);
        let r1_term = (-two_ik * b).exp() * m2p_b / two_ik * t1_term;

        // R₁T(−k) + R₂(−k)T(k) = 0 with T(−k) = conj T, R₂(−k) = conj R₂.
        let r1 = -r2.conj() * t / t.conj();
        let unitarity = [
            (t.norm_sqr() + r2.norm_sqr() - 1.0).abs(),
            (t.norm_sqr() + r1.norm_sqr() - 1.0).abs(),
            (t_term.norm_sqr() + r2_term.norm_sqr() - 1.0).abs(),
            (t1_term.norm_sqr() + r1_term.norm_sqr() - 1.0).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        let diagnostics = ScatterDiagnostics {
            t_terminal: t_term,
            r2_terminal: r2_term,
            t1_terminal: t1_term,
            r1_terminal: r1_term,
            path_disagreement: (t - t_term).norm().max((r2 - r2_term).norm()),
            reciprocity: (t - t1_term).norm() / t.norm(),
            reflection_relation: (r1_term * t.conj() + r2.conj() * t).norm(),
        };
        Ok(ScatterPoint {
            k: kc,
            t,
            r1,
            r2,
            unitarity_residual: unitarity,
            method: Method::IntegralPath,
            diagnostics,
        })
    }

    pub fn scattering_grid(&self, p: &Profile, ks: &[f64]) -> Result<ScatterGrid> {
        if !ks.windows(2).all(|w| w[1] > w[0]) {
            return Err(HelmError::Input("k-grid must be strictly ascending".into()));
        }
        if ks.contains(&0.0) {
            return Err(HelmError::Input("k-grid must not contain 0".into()));
        }
        let points = ks
            .par_iter()
            .enumerate()
            .map(|(index, &k)| {
                self.scattering_at(p, k).map_err(|e| HelmError::GridPoint {
                    index,
                    k,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScatterGrid {
            ks: ks.to_vec(),
            points,
            t_at_zero: ONE,
            r2_at_zero: ZERO,
        })
    }

    /// `T(k)` for `Im k > 0` from the terminal values of `m₁`: `1/T = m₁ + m₁′/(2ik)` at the
    /// left support edge. This form has no cancellation when `T` is large.
    pub fn transmission_upper(&self, p: &Profile, k: Complex64) -> Result<Complex64> {
        if k.im <= 0.0 {
            return Err(HelmError::Input(format!("Im k must be positive, got k = {k}")));
        }
        if p.is_trivial() {
            return Ok(ONE);
        }
        let (m, mp) = self.jost.m1_at_left_edge(p, k)?;
        let inv_t = m + mp / (2.0 * I * k);
        if inv_t.norm() < INVERSE_T_FLOOR {
            return Err(HelmError::Vanishing {
                quantity: "1/T".into(),
                x: p.support().0,
                modulus: inv_t.norm(),
            });
        }
        Ok(ONE / inv_t)
    }

    /// `T(k)` for `Im k > 0` from `1/T = 1 − (k/2i)∫q m₁`. Loses relative accuracy once
    /// `|1/T|` is far below 1.
    pub fn transmission_upper_integral(&self, p: &Profile, k: Complex64) -> Result<Complex64> {
        if k.im <= 0.0 {
            return Err(HelmError::Input(format!("Im k must be positive, got k = {k}")));
        }
        if p.is_trivial() {
            return Ok(ONE);
        }
        let panels = self.panels(p, k);
        let m1 = self.jost.solve_m1(p, k, panels.nodes())?;
        let qm: Vec<Complex64> = panels
            .nodes()
            .iter()
            .zip(&m1.m)
            .map(|(&x, &m)| m * p.eval_q(x))
            .collect();
        Ok(ONE / (ONE - k / (2.0 * I) * panels.sum_complex(&qm)))
    }

    /// `max_x |2Re(T m₁ m₂) − |T m₁|² − |T m₂|²|` for real `k` on the grid `xs`.
    pub fn bilinear_identity_residual(&self, p: &Profile, k: f64, xs: &[f64]) -> Result<f64> {
        if p.is_trivial() {
            return Ok(0.0);
        }
        let t = self.scattering_at(p, k)?.t;
        let kc = Complex64::new(k, 0.0);
        let m1 = self.jost.solve_m1(p, kc, xs)?;
        let m2 = self.jost.solve_m2(p, kc, xs)?;
        Ok(m1
            .m
            .iter()
            .zip(&m2.m)
            .map(|(a, b)| {
                let (ta, tb) = (t * a, t * b);
                (2.0 * (ta * b).re - ta.norm_sqr() - tb.norm_sqr()).abs()
            })
            .fold(0.0, f64::max))
    }
}

pub fn scattering_at(p: &Profile, k: f64) -> Result<ScatterPoint> {
    ScatterSolver::default().scattering_at(p, k)
}

pub fn scattering_grid(p: &Profile, ks: &[f64]) -> Result<ScatterGrid> {
    ScatterSolver::default().scattering_grid(p, ks)
}

pub fn transmission_upper(p: &Profile, k: Complex64) -> Result<Complex64> {
    ScatterSolver::default().transmission_upper(p, k)
}

/// An extrapolated limit with a crude error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolated<T> {
    pub value: T,
    pub error_estimate: f64,
}

/// Picks well-separated positive abscissae `≤ k_max` forming a doubling ladder from the
/// smallest available one. Returns indices into `ks`.
pub fn doubling_ladder(ks: &[f64], k_max: f64) -> Vec<usize> {
    let mut pos: Vec<usize> = (0..ks.len()).filter(|&i| ks[i] > 0.0 && ks[i] <= k_max).collect();
    pos.sort_by(|&i, &j| ks[i].total_cmp(&ks[j]));
    let mut chosen: Vec<usize> = Vec::new();
    let mut target = match pos.first() {
        Some(&i) => ks[i],
        None => return chosen,
    };
    while target <= k_max * (1.0 + 1e-12) {
        let best = pos
            .iter()
            .copied()
            .min_by(|&i, &j| (ks[i] / target).ln().abs().total_cmp(&(ks[j] / target).ln().abs()))
            .expect("nonempty");
        if chosen.last() != Some(&best) {
            chosen.push(best);
        }
        target *= 2.0;
    }
    chosen
}

/// Polynomial extrapolation to `k = 0` of `values[i]` sampled at `ks[i]`, using a doubling
/// ladder of positive wavenumbers up to `k_max`.
pub fn extrapolate_to_zero(
    ks: &[f64],
    values: &[Complex64],
    k_max: f64,
) -> Result<Extrapolated<Complex64>> {
    let idx = doubling_ladder(ks, k_max);
    if idx.len() < 3 {
        return Err(HelmError::Input(format!(
            "need at least three wavenumbers in (0, {k_max}], found {}",
            idx.len()
        )));
    }
    let xs: Vec<f64> = idx.iter().map(|&i| ks[i]).collect();
    let ys: Vec<Complex64> = idx.iter().map(|&i| values[i]).collect();
    let full = neville_at_zero(&xs, &ys);
    let reduced = neville_at_zero(&xs[..xs.len() - 1], &ys[..ys.len() - 1]);
    Ok(Extrapolated {
        value: full,
        error_estimate: (full - reduced).norm(),
    })
}

/// `lim_{k→0} R₂(k)/k`, which equals `(1/2i)∫q`.
pub fn low_k_slope(grid: &ScatterGrid) -> Result<Extrapolated<Complex64>> {
    let ratios: Vec<Complex64> = grid
        .ks
        .iter()
        .zip(&grid.points)
        .map(|(&k, p)| p.r2 / k)
        .collect();
    extrapolate_to_zero(&grid.ks, &ratios, 0.1)
}

/// `sup |R₂(k)|/|k|` over `0 < |k| ≤ k_max`: the constant of the linear low-k bound.
pub fn low_k_bound_constant(grid: &ScatterGrid, k_max: f64) -> f64 {
    grid.ks
        .iter()
        .zip(&grid.points)
        .filter(|(k, _)| k.abs() <= k_max)
        .map(|(k, p)| p.r2.norm() / k.abs())
        .fold(0.0, f64::max)
}

/// Default x-grid for field output: the support padded by half its length on each side.
pub fn field_grid(p: &Profile, n: usize) -> Vec<f64> {
    let (a, b) = p.support();
    let pad = 0.5 * (b - a);
    let (lo, hi) = (a - pad, b + pad);
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64)
        .collect()
}
