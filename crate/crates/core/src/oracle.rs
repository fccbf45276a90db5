//! Exact scattering for piecewise-constant wave speeds.
//!
//! In each layer the solution is `a e^{iκ(x−x_ref)} + b e^{−iκ(x−x_ref)}` with `κ = k/c`,
//! referenced at the nearest interface. Continuity of `u` and `u′` maps amplitudes across
//! an interface; only the outgoing Jost data is propagated, so complex `k` is also safe.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HelmError, ProfileError, Result};
use crate::profile::{Profile, ProfileKind};
use crate::scatter::{Method, ScatterDiagnostics, ScatterPoint, ScatterSolver};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Piecewise-constant medium: `speeds[j]` lies between `interfaces[j-1]` and `interfaces[j]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerStack {
    pub interfaces: Vec<f64>,
    pub speeds: Vec<f64>,
}

impl LayerStack {
    pub fn new(interfaces: Vec<f64>, speeds: Vec<f64>) -> Result<Self, ProfileError> {
        if speeds.len() != interfaces.len() + 1 {
            return Err(ProfileError::new("speeds", "need one more speed than interfaces"));
        }
        if !interfaces.windows(2).all(|w| w[1] > w[0]) {
            return Err(ProfileError::new("interfaces", "must be strictly ascending"));
        }
        if speeds.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(ProfileError::new("speeds", "wave speeds must be positive"));
        }
        if speeds[0] != 1.0 || speeds[speeds.len() - 1] != 1.0 {
            return Err(ProfileError::new("speeds", "outermost speeds must equal 1"));
        }
        Ok(Self { interfaces, speeds })
    }

    /// The stack describing a constant, slab or layered profile.
    pub fn from_profile(p: &Profile) -> Result<Self, ProfileError> {
        match p.kind() {
            ProfileKind::Constant => Self::new(vec![], vec![1.0]),
            ProfileKind::Slab { c_s, x_l, x_r } => Self::new(vec![*x_l, *x_r], vec![1.0, *c_s, 1.0]),
            ProfileKind::Layers { interfaces, speeds } => Self::new(interfaces.clone(), speeds.clone()),
            other => Err(ProfileError::new(
                "kind",
                format!("{other:?} is not piecewise constant"),
            )),
        }
    }

    pub fn translated(&self, a: f64) -> Self {
        Self {
            interfaces: self.interfaces.iter().map(|x| x + a).collect(),
            speeds: self.speeds.clone(),
        }
    }
}

/// Amplitudes `(a, b)` on the left of an interface from those on the right.
fn across_leftwards(a: Complex64, b: Complex64, ratio: Complex64) -> (Complex64, Complex64) {
    let (s, d) = (a + b, a - b);
    ((s + ratio * d) / 2.0, (s - ratio * d) / 2.0)
}

/// `(1/T, R₂/T, 1/T₁, R₁/T₁)` for the stack.
fn jost_amplitudes(stack: &LayerStack, k: Complex64) -> [Complex64; 4] {
    let n = stack.interfaces.len();
    if n == 0 {
        return [ONE, ZERO, ONE, ZERO];
    }
    let kappa = |j: usize| k / stack.speeds[j];
    let xs = &stack.interfaces;

    // u₁ = e^{ikx} right of the last interface, referenced there.
    let (mut a, mut b) = ((I * k * xs[n - 1]).exp(), ZERO);
    for j in (0..n).rev() {
        let (al, bl) = across_leftwards(a, b, kappa(j + 1) / kappa(j));
        let shift = if j > 0 { xs[j - 1] - xs[j] } else { 0.0 };
        a = al * (I * kappa(j) * shift).exp();
        b = bl * (-I * kappa(j) * shift).exp();
    }
    let inv_t = a * (-I * k * xs[0]).exp();
    let r2_t = b * (I * k * xs[0]).exp();

    // u₂ = e^{−ikx} left of the first interface, referenced there.
    let (mut a, mut b) = (ZERO, (-I * k * xs[0]).exp());
    for j in 0..n {
        let (ar, br) = across_leftwards(a, b, kappa(j) / kappa(j + 1));
        let shift = if j + 1 < n { xs[j + 1] - xs[j] } else { 0.0 };
        a = ar * (I * kappa(j + 1) * shift).exp();
        b = br * (-I * kappa(j + 1) * shift).exp();
    }
    let inv_t1 = b * (I * k * xs[n - 1]).exp();
    let r1_t1 = a * (-I * k * xs[n - 1]).exp();
    [inv_t, r2_t, inv_t1, r1_t1]
}

/// Exact `T`, `R₁`, `R₂` of the stack at `k ≠ 0` (`Im k ≥ 0`).
pub fn transfer_scattering(stack: &LayerStack, k: Complex64) -> Result<ScatterPoint> {
    if k == ZERO {
        return Ok(ScatterPoint::trivial(k));
    }
    if k.im < 0.0 {
        return Err(HelmError::Input(format!("Im k must be nonnegative, got k = {k}")));
    }
    let [inv_t, r2_t, inv_t1, r1_t1] = jost_amplitudes(stack, k);
    assert!(
        inv_t.norm() > 0.0 && inv_t1.norm() > 0.0,
        "transfer matrix is singular at k = {k}"
    );
    let t = ONE / inv_t;
    let r2 = r2_t * t;
    let t1 = ONE / inv_t1;
    let r1 = r1_t1 * t1;
    let real = k.im == 0.0;
    let unitarity = if real {
        (t.norm_sqr() + r2.norm_sqr() - 1.0)
            .abs()
            .max((t1.norm_sqr() + r1.norm_sqr() - 1.0).abs())
    } else {
        0.0
    };
    let relation = if real {
        (r1 * t.conj() + r2.conj() * t).norm()
    } else {
        0.0
    };
    Ok(ScatterPoint {
        k,
        t,
        r1,
        r2,
        unitarity_residual: unitarity,
        method: Method::TransferMatrix,
        diagnostics: ScatterDiagnostics {
            t_terminal: t,
            r2_terminal: r2,
            t1_terminal: t1,
            r1_terminal: r1,
            path_disagreement: 0.0,
            reciprocity: (t - t1).norm() / t.norm(),
            reflection_relation: relation,
        },
    })
}

/// Largest deviations between the oracle and the ODE forward solve over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleDeviation {
    pub max_dt: f64,
    pub max_dr1: f64,
    pub max_dr2: f64,
}

impl OracleDeviation {
    pub fn max(&self) -> f64 {
        self.max_dt.max(self.max_dr1).max(self.max_dr2)
    }
}

pub fn oracle_compare(p: &Profile, ks: &[f64], solver: &ScatterSolver) -> Result<OracleDeviation> {
    let stack = LayerStack::from_profile(p)?;
    let grid = solver.scattering_grid(p, ks)?;
    let exact: Vec<ScatterPoint> = ks
        .par_iter()
        .map(|&k| transfer_scattering(&stack, Complex64::new(k, 0.0)))
        .collect::<Result<_>>()?;
    let mut dev = OracleDeviation {
        max_dt: 0.0,
        max_dr1: 0.0,
        max_dr2: 0.0,
    };
    for (num, ex) in grid.points.iter().zip(&exact) {
        dev.max_dt = dev.max_dt.max((num.t - ex.t).norm());
        dev.max_dr1 = dev.max_dr1.max((num.r1 - ex.r1).norm());
        dev.max_dr2 = dev.max_dr2.max((num.r2 - ex.r2).norm());
    }
    Ok(dev)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slab_stack() -> LayerStack {
        LayerStack::new(vec![0.0, 1.0], vec![1.0, 2.0, 1.0]).unwrap()
    }

    #[test]
    fn uniform_stack_is_transparent() {
        let s = LayerStack::new(vec![0.0, 1.0], vec![1.0, 1.0, 1.0]).unwrap();
        let p = transfer_scattering(&s, Complex64::new(2.5, 0.0)).unwrap();
        assert!((p.t - ONE).norm() < 1e-15);
        assert!(p.r2.norm() < 1e-15);
    }

    #[test]
    fn slab_reflection_matches_airy_sum() {
        // Single slab of index n = 1/2 and thickness 1: with interface coefficient
        // ρ = (1 − n)/(1 + n), R = ρ(1 − e^{2iδ})/(1 − ρ²e^{2iδ}) with δ = kn, up to the
        // phase convention e^{2ikx_l} = 1 for x_l = 0.
        let k: f64 = 1.3;
        let n = 0.5;
        let rho = (1.0 - n) / (1.0 + n);
        let e = Complex64::new(0.0, 2.0 * k * n).exp();
        let r = rho * (ONE - e) / (ONE - rho * rho * e);
        let p = transfer_scattering(&slab_stack(), Complex64::new(k, 0.0)).unwrap();
        assert!((p.r2 - r).norm() < 1e-14, "{} vs {}", p.r2, r);
        assert!(p.unitarity_residual < 1e-14);
        assert!(p.diagnostics.reciprocity < 1e-14);
        assert!(p.diagnostics.reflection_relation < 1e-14);
    }

    #[test]
    fn translation_multiplies_r2_by_phase() {
        let k = Complex64::new(0.9, 0.0);
        let a = 0.37;
        let p0 = transfer_scattering(&slab_stack(), k).unwrap();
        let p1 = transfer_scattering(&slab_stack().translated(a), k).unwrap();
        assert!((p1.t - p0.t).norm() < 1e-14);
        assert!((p1.r2 - p0.r2 * (2.0 * I * k * a).exp()).norm() < 1e-14);
    }

    #[test]
    fn imaginary_axis_is_real() {
        let p = transfer_scattering(&slab_stack(), Complex64::new(0.0, 3.0)).unwrap();
        assert!(p.t.im.abs() < 1e-14 * p.t.re);
        // T(iκ) e^{−κ∫Q} ≤ 1 with ∫Q = 1/2 for the slab.
        assert!(p.t.re * (-1.5f64).exp() <= 1.0);
    }

    #[test]
    fn ode_forward_solve_matches_slab() {
        let p = Profile::from_kind(ProfileKind::Slab {
            c_s: 2.0,
            x_l: 0.0,
            x_r: 1.0,
        })
        .unwrap();
        let ks = [-3.0, -0.2, 0.01, 1.0, 12.0];
        let dev = oracle_compare(&p, &ks, &ScatterSolver::default()).unwrap();
        assert!(dev.max() < 1e-10, "{dev:?}");
    }
}
