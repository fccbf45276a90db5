//! Recovery of `T`, `∫q`, `∫Q²` and `∫Q` from reflection data `R₂` on a real grid.
//!
//! Only the samples of `R₂` enter the pipeline. Profiles are read solely to produce
//! truth values for comparison and by the uniqueness harness, which checks the
//! travel-time identities on forward solutions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HelmError, Result};
use crate::halfplane::{boundary_trace, poisson_extend_with_tail, BoundaryData, DEFAULT_EPS};
use crate::jost::JostSolver;
use crate::profile::{ChiVariant, Profile};
use crate::scatter::{extrapolate_to_zero, ScatterSolver};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Relative uncertainty above which a recovered scalar is flagged as tail-dominated.
pub const TAIL_FLAG_THRESHOLD: f64 = 0.05;

/// Default `ε_match` below which two reflection data sets count as equal.
pub const DEFAULT_EPS_MATCH: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TSample {
    pub k: f64,
    #[serde(rename = "T")]
    pub t: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub quantity: String,
    pub recovered: f64,
    pub truth: f64,
    pub abs_error: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub int_q_rec: Estimate,
    #[serde(rename = "int_Q2_rec")]
    pub int_big_q2_rec: Estimate,
    #[serde(rename = "int_Q_rec")]
    pub int_big_q_rec: Estimate,
    /// The `κ → ∞` cross-check of `int_Q2_rec`.
    #[serde(rename = "int_Q2_kappa_path")]
    pub int_big_q2_kappa_path: Estimate,
    #[serde(rename = "T_rec")]
    pub t_rec: Vec<TSample>,
    pub comparisons: Vec<Comparison>,
    pub gamma_unimodular: Complex64,
    /// Wavenumbers at which `T` could not be reconstructed.
    pub dropped: Vec<f64>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryOptions {
    /// Largest `ε` in the boundary-limit sequence.
    pub eps: f64,
    /// `κ` schedule for the `∫Q²` cross-check.
    pub kappas: Vec<f64>,
    /// Largest `k` used for the `k → 0` extrapolation of `R₂/k`.
    pub low_k_max: f64,
    /// Only reconstruct `T` for `|k|` in this range.
    pub t_range: (f64, f64),
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self {
            eps: DEFAULT_EPS,
            kappas: vec![10.0, 20.0, 40.0, 80.0, 160.0],
            low_k_max: 0.1,
            t_range: (0.0, f64::INFINITY),
        }
    }
}

/// `|T| = √(1 − |R₂|²)` pointwise.
pub fn modulus_t(r2: &[Complex64]) -> Result<Vec<f64>> {
    r2.iter()
        .map(|r| {
            let m = r.norm_sqr();
            if !(m <= 1.0 + 1e-12) {
                Err(HelmError::Input(format!("|R₂| = {} exceeds one", m.sqrt())))
            } else {
                Ok((1.0 - m).max(0.0).sqrt())
            }
        })
        .collect()
}

fn check_samples(ks: &[f64], r2: &[Complex64]) -> Result<()> {
    if ks.len() != r2.len() {
        return Err(HelmError::Input("wavenumbers and R₂ samples differ in length".into()));
    }
    if !ks.windows(2).all(|w| w[1] > w[0]) {
        return Err(HelmError::Input("wavenumbers must be strictly ascending".into()));
    }
    modulus_t(r2).map(|_| ())
}

/// `∫q = −2 Im lim_{k→0} R₂(k)/k`.
pub fn recover_int_q(ks: &[f64], r2: &[Complex64], low_k_max: f64) -> Result<Estimate> {
    check_samples(ks, r2)?;
    if r2.iter().all(|r| r.norm() == 0.0) {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let ratios: Vec<Complex64> = ks.iter().zip(r2).map(|(&k, r)| r / k).collect();
    let lim = extrapolate_to_zero(ks, &ratios, low_k_max)?;
    Ok(Estimate {
        value: -2.0 * lim.value.im,
        error: 2.0 * lim.error_estimate,
    })
}

/// `h(k) = log(1 − |R₂(k)|²)/k²` as even boundary data, with `h(0) = −(∫q)²/4`.
pub fn h_boundary_data(ks: &[f64], r2: &[Complex64], int_q: f64) -> Result<BoundaryData> {
    let (xs, vs): (Vec<f64>, Vec<f64>) = ks
        .iter()
        .zip(r2)
        .filter(|(k, _)| **k != 0.0)
        .map(|(&k, r)| (k, (-r.norm_sqr()).ln_1p() / (k * k)))
        .unzip();
    BoundaryData::even(&xs, &vs, Some(-int_q * int_q / 4.0))
}

/// `log |T|² = log(1 − |R₂|²)` as even boundary data, vanishing at `k = 0`.
pub fn log_modulus_data(ks: &[f64], r2: &[Complex64]) -> Result<BoundaryData> {
    let (xs, vs): (Vec<f64>, Vec<f64>) = ks
        .iter()
        .zip(r2)
        .filter(|(k, _)| **k != 0.0)
        .map(|(&k, r)| (k, (-r.norm_sqr()).ln_1p()))
        .unzip();
    BoundaryData::even(&xs, &vs, Some(0.0))
}

/// `∫Q² = −(1/π)∫h`, with the tail-model part as the uncertainty.
pub fn recover_int_q2_closed(h: &BoundaryData) -> Result<Estimate> {
    let (total, tail) = h.line_integral()?;
    Ok(Estimate {
        value: -total / PI,
        error: tail.abs() / PI,
    })
}

/// `∫Q² = lim_{κ→∞} −κ·P[h](iκ)`, extrapolated with a fitted algebraic rate.
pub fn recover_int_q2_kappa(h: &BoundaryData, kappas: &[f64]) -> Result<Estimate> {
    if kappas.len() < 3 {
        return Err(HelmError::Input("need at least three values of κ".into()));
    }
    let vals: Vec<(f64, f64)> = kappas
        .par_iter()
        .map(|&kappa| {
            let (p, tail) = poisson_extend_with_tail(h, Complex64::new(0.0, kappa))?;
            Ok((-kappa * p, kappa * tail))
        })
        .collect::<Result<_>>()?;
    let n = vals.len();
    let (v3, v4, v5) = (vals[n - 3].0, vals[n - 2].0, vals[n - 1].0);
    let tail = vals[n - 1].1;
    let (d1, d2) = (v3 - v4, v4 - v5);
    let ratio = d1 / d2;
    let value = if d2 != 0.0 && ratio > 1.0 + 1e-6 && ratio.is_finite() {
        // V(κ) ≈ V∞ + Cκ^{−p}: successive differences shrink by the fitted ratio.
        v5 - d2 / (ratio - 1.0)
    } else {
        v5
    };
    Ok(Estimate {
        value,
        error: (value - v5).abs() + d2.abs() + tail,
    })
}

/// `T(k) = Θ_F(k)·e^{−ik∫Q}` at each grid point with `|k|` in `range`; `None` where the
/// boundary limit failed or `k` is at the end of the grid.
pub fn recover_t(
    b: &BoundaryData,
    ks: &[f64],
    int_big_q: f64,
    eps: f64,
    range: (f64, f64),
) -> Vec<(f64, Option<Complex64>)> {
    ks.par_iter()
        .filter(|k| k.abs() >= range.0 && k.abs() <= range.1)
        .map(|&k| {
            if k == 0.0 {
                return (k, Some(ONE));
            }
            let t = boundary_trace(b, k, eps)
                .ok()
                .map(|tr| tr.value * (-I * k * int_big_q).exp());
            (k, t)
        })
        .collect()
}

/// `1/Θ_F(0)`, the unimodular constant relating `F = T e^{ik∫Q}` to its outer part.
pub fn gamma_constant(b: &BoundaryData, eps: f64) -> Result<Complex64> {
    let f = |e: f64| crate::halfplane::outer_exponent(b, Complex64::new(0.0, e));
    let (f1, f2, f4) = (f(eps)?, f(eps / 2.0)?, f(eps / 4.0)?);
    Ok((-(8.0 * f4 - 6.0 * f2 + f1) / 3.0).exp())
}

/// Runs the whole chain on `R₂` samples.
pub fn recover(ks: &[f64], r2: &[Complex64], opts: &RecoveryOptions) -> Result<RecoveryReport> {
    check_samples(ks, r2)?;
    let int_q = recover_int_q(ks, r2, opts.low_k_max)?;
    let h = h_boundary_data(ks, r2, int_q.value)?;
    let int_q2 = recover_int_q2_closed(&h)?;
    let kappa_path = recover_int_q2_kappa(&h, &opts.kappas)?;
    let int_big_q = Estimate {
        value: (int_q.value + int_q2.value) / 2.0,
        error: (int_q.error + int_q2.error) / 2.0,
    };
    let b = log_modulus_data(ks, r2)?;
    let traced = recover_t(&b, ks, int_big_q.value, opts.eps, opts.t_range);
    let mut t_rec = Vec::new();
    let mut dropped = Vec::new();
    for (k, t) in traced {
        match t {
            Some(t) => t_rec.push(TSample { k, t }),
            None => dropped.push(k),
        }
    }
    let mut flags = Vec::new();
    for (name, e) in [("int_q_rec", int_q), ("int_Q2_rec", int_q2), ("int_Q_rec", int_big_q)] {
        if e.error > TAIL_FLAG_THRESHOLD * e.value.abs().max(1e-12) && e.value != 0.0 {
            flags.push(format!("{name}: uncertainty {} exceeds {TAIL_FLAG_THRESHOLD} relative", e.error));
        }
    }
    if !dropped.is_empty() {
        flags.push(format!("T_rec: {} points dropped", dropped.len()));
    }
    Ok(RecoveryReport {
        int_q_rec: int_q,
        int_big_q2_rec: int_q2,
        int_big_q_rec: int_big_q,
        int_big_q2_kappa_path: kappa_path,
        t_rec,
        comparisons: Vec::new(),
        gamma_unimodular: gamma_constant(&b, opts.eps)?,
        dropped,
        flags,
    })
}

/// Truth values computed from a profile by quadrature and forward solves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Truth {
    pub int_q: f64,
    #[serde(rename = "int_Q2")]
    pub int_big_q2: f64,
    #[serde(rename = "int_Q")]
    pub int_big_q: f64,
    #[serde(rename = "T")]
    pub t: Vec<TSample>,
}

pub fn truth_from_profile(p: &Profile, ks: &[f64], solver: &ScatterSolver) -> Result<Truth> {
    let f = p.functionals();
    let nonzero: Vec<f64> = ks.iter().copied().filter(|k| *k != 0.0).collect();
    let grid = solver.scattering_grid(p, &nonzero)?;
    let mut t: Vec<TSample> = grid
        .ks
        .iter()
        .zip(&grid.points)
        .map(|(&k, pt)| TSample { k, t: pt.t })
        .collect();
    if ks.contains(&0.0) {
        t.push(TSample { k: 0.0, t: ONE });
        t.sort_by(|a, b| a.k.total_cmp(&b.k));
    }
    Ok(Truth {
        int_q: f.int_q,
        int_big_q2: f.int_big_q2,
        int_big_q: f.int_big_q,
        t,
    })
}

fn comparison(quantity: &str, recovered: f64, truth: f64) -> Comparison {
    let abs_error = (recovered - truth).abs();
    Comparison {
        quantity: quantity.into(),
        recovered,
        truth,
        abs_error,
        rel_error: if truth != 0.0 { abs_error / truth.abs() } else { abs_error },
    }
}

/// `sup |T_rec − T_truth|` over recovered samples with `|k|` in `range`.
pub fn t_sup_error(report: &RecoveryReport, truth: &Truth, range: (f64, f64)) -> f64 {
    report
        .t_rec
        .iter()
        .filter(|s| s.k.abs() >= range.0 && s.k.abs() <= range.1)
        .filter_map(|s| {
            truth
                .t
                .iter()
                .find(|x| x.k == s.k)
                .map(|x| (x.t - s.t).norm())
        })
        .fold(0.0, f64::max)
}

/// Fills `comparisons`: the three scalars and the sup error of `T` on `t_window`.
pub fn attach_truth(report: &mut RecoveryReport, truth: &Truth, t_window: (f64, f64)) {
    report.comparisons = vec![
        comparison("int_q", report.int_q_rec.value, truth.int_q),
        comparison("int_Q2", report.int_big_q2_rec.value, truth.int_big_q2),
        comparison("int_Q", report.int_big_q_rec.value, truth.int_big_q),
    ];
    let sup = t_sup_error(report, truth, t_window);
    report.comparisons.push(Comparison {
        quantity: format!("T_sup_{}_{}", t_window.0, t_window.1),
        recovered: sup,
        truth: 0.0,
        abs_error: sup,
        rel_error: sup,
    });
}

/// `max |arg T_rec(−k) + arg T_rec(k)|` over pairs present in the report.
pub fn phase_consistency(report: &RecoveryReport) -> f64 {
    report
        .t_rec
        .iter()
        .filter(|s| s.k > 0.0)
        .filter_map(|s| {
            report
                .t_rec
                .iter()
                .find(|m| (m.k + s.k).abs() <= 1e-13 * s.k)
                .map(|m| (s.t * m.t).arg().abs())
        })
        .fold(0.0, f64::max)
}

/// `max | |T_rec(k)| − √(1 − |R₂(k)|²) |`.
pub fn modulus_consistency(report: &RecoveryReport, ks: &[f64], r2: &[Complex64]) -> f64 {
    report
        .t_rec
        .iter()
        .filter_map(|s| {
            ks.iter()
                .position(|&k| k == s.k)
                .map(|i| (s.t.norm() - (1.0 - r2[i].norm_sqr()).max(0.0).sqrt()).abs())
        })
        .fold(0.0, f64::max)
}

/// Outcome of comparing two profiles through their reflection data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub eps_match: f64,
    /// `max_k |R₂(k; c₁) − R₂(k; c₂)|`.
    pub r2_separation: f64,
    pub matched: bool,
    /// `max_{y,k} |M_{1,1} − M_{1,2}|` and `|M_{2,1} − M_{2,2}|` when matched.
    pub max_dm1: Option<f64>,
    pub max_dm2: Option<f64>,
    /// `max_y |c₁(χ₁⁻¹(y)) − c₂(χ₂⁻¹(y))|` when matched.
    pub c_agreement: Option<f64>,
    /// Residual of `T̃ M_{1,j} = R₂ e^{−2iky} M_{2,j} + conj(M_{2,j})`, worst over `j`.
    pub relation_residual: f64,
    /// Residual of `2 Re(T̃ M₁ M₂) = |T̃ M₁|² + |T̃ M₂|²`, per profile and for the
    /// difference fields when matched.
    pub bilinear_residual: f64,
}

struct TravelTimeFields {
    t_tilde: Complex64,
    r2: Complex64,
    m1: Vec<Complex64>,
    m2: Vec<Complex64>,
}

fn travel_time_fields(p: &Profile, k: f64, ys: &[f64], scatter: &ScatterSolver) -> Result<TravelTimeFields> {
    let xs: Vec<f64> = ys
        .iter()
        .map(|&y| p.chi_inv(y, ChiVariant::FromLeft))
        .collect::<std::result::Result<_, _>>()?;
    let kc = Complex64::new(k, 0.0);
    let jost = JostSolver::new(scatter.jost.options.rtol);
    let f1 = jost.solve_m1(p, kc, &xs)?;
    let f2 = jost.solve_m2(p, kc, &xs)?;
    let s = scatter.scattering_at(p, k)?;
    let int_big_q = p.functionals().int_big_q;
    let m1 = xs
        .iter()
        .zip(&f1.m)
        .map(|(&x, m)| m * (-I * k * p.big_q_right(x)).exp())
        .collect();
    let m2 = xs
        .iter()
        .zip(&f2.m)
        .map(|(&x, m)| m * (-I * k * p.big_q_left(x)).exp())
        .collect();
    Ok(TravelTimeFields {
        t_tilde: s.t * (I * k * int_big_q).exp(),
        r2: s.r2,
        m1,
        m2,
    })
}

fn bilinear(t: Complex64, m1: Complex64, m2: Complex64) -> f64 {
    (2.0 * (t * m1 * m2).re - (t * m1).norm_sqr() - (t * m2).norm_sqr()).abs()
}

/// Compares two profiles in travel-time coordinates at the real wavenumbers `ks`.
pub fn uniqueness_harness(
    p1: &Profile,
    p2: &Profile,
    ks: &[f64],
    eps_match: f64,
    solver: &ScatterSolver,
) -> Result<UniquenessReport> {
    let ks: Vec<f64> = ks.iter().copied().filter(|k| *k != 0.0).collect();
    if ks.is_empty() {
        return Err(HelmError::Input("uniqueness harness needs nonzero wavenumbers".into()));
    }
    let span = |p: &Profile| {
        let (a, b) = p.support();
        let pad = 0.25 * (b - a);
        (p.chi(a - pad, ChiVariant::FromLeft), p.chi(b + pad, ChiVariant::FromLeft))
    };
    let ((lo1, hi1), (lo2, hi2)) = (span(p1), span(p2));
    let (lo, hi) = (lo1.min(lo2), hi1.max(hi2));
    let ys: Vec<f64> = (0..41).map(|i| lo + (hi - lo) * i as f64 / 40.0).collect();

    let per_k: Vec<(TravelTimeFields, TravelTimeFields)> = ks
        .par_iter()
        .map(|&k| {
            Ok((
                travel_time_fields(p1, k, &ys, solver)?,
                travel_time_fields(p2, k, &ys, solver)?,
            ))
        })
        .collect::<Result<_>>()?;

    let mut sep = 0.0f64;
    let mut relation = 0.0f64;
    let mut bil = 0.0f64;
    for (&k, (a, b)) in ks.iter().zip(&per_k) {
        sep = sep.max((a.r2 - b.r2).norm());
        for f in [a, b] {
            for (j, &y) in ys.iter().enumerate() {
                let lhs = f.t_tilde * f.m1[j];
                let rhs = f.r2 * (-2.0 * I * k * y).exp() * f.m2[j] + f.m2[j].conj();
                relation = relation.max((lhs - rhs).norm());
                bil = bil.max(bilinear(f.t_tilde, f.m1[j], f.m2[j]));
            }
        }
    }
    let matched = sep < eps_match;
    let (mut max_dm1, mut max_dm2, mut c_agreement) = (None, None, None);
    if matched {
        let (mut d1, mut d2) = (0.0f64, 0.0f64);
        for (&k, (a, b)) in ks.iter().zip(&per_k) {
            for j in 0..ys.len() {
                let dm1 = (a.m1[j] - b.m1[j]) / k;
                let dm2 = (a.m2[j] - b.m2[j]) / k;
                d1 = d1.max((a.m1[j] - b.m1[j]).norm());
                d2 = d2.max((a.m2[j] - b.m2[j]).norm());
                bil = bil.max(bilinear(a.t_tilde, dm1, dm2));
            }
        }
        let mut dc = 0.0f64;
        for &y in &ys {
            let x1 = p1.chi_inv(y, ChiVariant::FromLeft)?;
            let x2 = p2.chi_inv(y, ChiVariant::FromLeft)?;
            dc = dc.max((p1.eval_c(x1) - p2.eval_c(x2)).abs());
        }
        max_dm1 = Some(d1);
        max_dm2 = Some(d2);
        c_agreement = Some(dc);
    }
    Ok(UniquenessReport {
        eps_match,
        r2_separation: sep,
        matched,
        max_dm1,
        max_dm2,
        c_agreement,
        relation_residual: relation,
        bilinear_residual: bil,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{transfer_scattering, LayerStack};
    use crate::profile::ProfileKind;
    use crate::scatter::KGridSpec;

    fn slab() -> Profile {
        Profile::from_kind(ProfileKind::Slab { c_s: 2.0, x_l: 0.0, x_r: 1.0 }).unwrap()
    }

    fn bump() -> Profile {
        Profile::from_kind(ProfileKind::Bump { amplitude: 0.5, center: 0.0, width: 1.0 }).unwrap()
    }

    fn default_ks() -> Vec<f64> {
        KGridSpec::default().values().unwrap()
    }

    #[test]
    fn modulus_is_pythagorean() {
        let m = modulus_t(&[Complex64::new(0.0, 0.0), Complex64::new(0.36, 0.48)]).unwrap();
        assert_eq!(m[0], 1.0);
        assert!((m[1] - 0.8).abs() < 1e-15);
        assert!(modulus_t(&[Complex64::new(1.1, 0.0)]).is_err());
    }

    #[test]
    fn slab_modulus_matches_oracle() {
        let ks = [0.3, 1.0, 7.0];
        let stack = LayerStack::from_profile(&slab()).unwrap();
        let pts: Vec<_> = ks.iter().map(|&k| transfer_scattering(&stack, Complex64::new(k, 0.0)).unwrap()).collect();
        let m = modulus_t(&pts.iter().map(|p| p.r2).collect::<Vec<_>>()).unwrap();
        for (m, p) in m.iter().zip(&pts) {
            assert!((m - p.t.norm()).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_reflection_recovers_trivially() {
        let ks = default_ks();
        let r2 = vec![Complex64::new(0.0, 0.0); ks.len()];
        let rep = recover(&ks, &r2, &RecoveryOptions::default()).unwrap();
        assert_eq!(rep.int_q_rec.value, 0.0);
        assert_eq!(rep.int_big_q2_rec.value, 0.0);
        assert_eq!(rep.int_big_q_rec.value, 0.0);
        assert!(rep.t_rec.iter().all(|s| s.t == ONE));
        assert_eq!(rep.gamma_unimodular, ONE);
    }

    #[test]
    fn int_q_identity_by_construction() {
        assert_eq!(recover_int_q(&[0.1, 0.2, 0.4], &[Complex64::new(0.0, 0.0); 3], 0.5).unwrap().value, 0.0);
    }

    #[test]
    fn bump_recovery_end_to_end() {
        let p = bump();
        let ks = default_ks();
        let solver = ScatterSolver::default();
        let grid = solver.scattering_grid(&p, &ks).unwrap();
        let r2 = grid.r2();
        let mut rep = recover(&ks, &r2, &RecoveryOptions::default()).unwrap();
        let truth = truth_from_profile(&p, &ks, &solver).unwrap();
        attach_truth(&mut rep, &truth, (0.05, 20.0));
        let rel = |q: &str| rep.comparisons.iter().find(|c| c.quantity == q).unwrap().rel_error;
        assert!(rel("int_q") < 1e-3, "{:?}", rep.comparisons);
        assert!(rel("int_Q2") < 0.02, "{:?}", rep.comparisons);
        assert!(rel("int_Q") < 0.02, "{:?}", rep.comparisons);
        assert!(t_sup_error(&rep, &truth, (0.05, 20.0)) < 1e-2);
        assert!((rep.gamma_unimodular - ONE).norm() < 1e-6);
        assert!(phase_consistency(&rep) < 1e-6);
        assert!(modulus_consistency(&rep, &ks, &r2) < 1e-6);
        let kp = rep.int_big_q2_kappa_path;
        assert!((kp.value - truth.int_big_q2).abs() / truth.int_big_q2 < 0.02, "{kp:?}");
    }

    #[test]
    fn kappa_path_matches_riccati_integral() {
        let p = bump();
        let ks = default_ks();
        let r2 = ScatterSolver::default().scattering_grid(&p, &ks).unwrap().r2();
        let q = recover_int_q(&ks, &r2, 0.1).unwrap().value;
        let h = h_boundary_data(&ks, &r2, q).unwrap();
        for kappa in [1.0, 5.0] {
            let (ph, _) = poisson_extend_with_tail(&h, Complex64::new(0.0, kappa)).unwrap();
            let direct = crate::riccati::qr_integral(&p, kappa).unwrap();
            assert!((-kappa * ph - direct).abs() < 1e-4 * direct.abs(), "{kappa}: {} vs {direct}", -kappa * ph);
        }
    }

    #[test]
    fn harness_identities_hold_for_equal_profiles() {
        let ks = [-3.0, -0.5, 0.2, 1.0, 4.0];
        let rep = uniqueness_harness(&bump(), &bump(), &ks, DEFAULT_EPS_MATCH, &ScatterSolver::default()).unwrap();
        assert!(rep.matched);
        assert_eq!(rep.max_dm1, Some(0.0));
        assert_eq!(rep.max_dm2, Some(0.0));
        assert_eq!(rep.c_agreement, Some(0.0));
        assert!(rep.relation_residual < 1e-8);
        assert!(rep.bilinear_residual < 1e-8);
    }

    #[test]
    fn harness_separates_distinct_profiles() {
        let b = bump();
        let q = b.functionals().int_big_q;
        // A slab of speed 2 with the same ∫Q.
        let s = Profile::from_kind(ProfileKind::Slab { c_s: 2.0, x_l: -q, x_r: q }).unwrap();
        assert!((s.functionals().int_big_q - q).abs() < 1e-10);
        let ks = [0.5, 1.0, 2.0, 5.0];
        let solver = ScatterSolver::default();
        let rep = uniqueness_harness(&b, &s, &ks, DEFAULT_EPS_MATCH, &solver).unwrap();
        assert!(!rep.matched && rep.r2_separation > 10.0 * DEFAULT_EPS_MATCH);
        assert!(rep.relation_residual < 1e-8 && rep.bilinear_residual < 1e-8);

        let moved = b.translated(0.3).unwrap();
        let rep = uniqueness_harness(&b, &moved, &ks, DEFAULT_EPS_MATCH, &solver).unwrap();
        assert!(rep.r2_separation > 10.0 * DEFAULT_EPS_MATCH);
    }
}
