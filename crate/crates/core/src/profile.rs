//! Wave-speed profiles `c(x)` and the scalar functionals derived from them.
//!
//! Every profile equals 1 outside a finite support interval. Kinds whose perturbation only
//! decays (the Gaussian) are truncated where `|q|` drops below the tail tolerance, and the
//! truncated profile is what every other module sees.

use serde::{Deserialize, Serialize};

use crate::error::ProfileError;
use crate::interp::CubicHermite;
use crate::quad::GaussLegendre;

pub const DEFAULT_TAIL_TOL: f64 = 1e-12;
pub const DEFAULT_DECAY_RATE: f64 = 1.0;

/// Shape of a wave-speed profile as written in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    Constant,
    /// `c = c_s` on `[x_l, x_r]`, 1 elsewhere.
    Slab { c_s: f64, x_l: f64, x_r: f64 },
    /// `c = 1 + amplitude·φ((x − center)/width)` with `φ(t) = exp(1 − 1/(1 − t²))` on `|t| < 1`.
    Bump {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// Continuous piecewise-linear `c` through `[x, c]` knots; the end values must be 1.
    PiecewiseLinear { knots: Vec<[f64; 2]> },
    /// Monotone cubic interpolation of `(xs, cs)`; the end values must be 1.
    Samples { xs: Vec<f64>, cs: Vec<f64> },
    /// Piecewise-constant stack: `speeds[j]` between `interfaces[j-1]` and `interfaces[j]`.
    Layers {
        interfaces: Vec<f64>,
        speeds: Vec<f64>,
    },
    /// `c = 1 + amplitude·exp(−((x − center)/width)²)`, truncated at the tail tolerance.
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
}

/// A profile description with its optional validation metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileConfig {
    #[serde(flatten)]
    pub kind: ProfileKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(default, rename = "cM", alias = "c_m", skip_serializing_if = "Option::is_none")]
    pub c_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_const: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_tol: Option<f64>,
}

impl From<ProfileKind> for ProfileConfig {
    fn from(kind: ProfileKind) -> Self {
        Self {
            kind,
            c0: None,
            c_m: None,
            decay_const: None,
            decay_rate: None,
            tail_tol: None,
        }
    }
}

/// Which antiderivative normalisation of the travel-time coordinate to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChiVariant {
    /// `χ(x) = x + ∫ₓ^∞ Q`.
    #[default]
    FromRight,
    /// `χ(x) = x − ∫_{−∞}^x Q`; differs from `FromRight` by the constant `∫Q`.
    FromLeft,
}

/// Integrals and bounds of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarFunctionals {
    pub int_q: f64,
    #[serde(rename = "int_Q")]
    pub int_big_q: f64,
    #[serde(rename = "int_Q2")]
    pub int_big_q2: f64,
    pub gamma0: f64,
    pub bv_log_mu: f64,
    /// Set when `bv_log_mu` is the total variation of `log c` of a discontinuous profile.
    pub bv_is_jump_variation: bool,
}

#[derive(Debug, Clone)]
enum Shape {
    Constant,
    Layers { interfaces: Vec<f64>, speeds: Vec<f64> },
    Bump { amplitude: f64, center: f64, width: f64 },
    Gaussian { amplitude: f64, center: f64, width: f64, lo: f64, hi: f64 },
    Linear { xs: Vec<f64>, cs: Vec<f64> },
    Cubic(CubicHermite),
}

/// Per-panel integrals accumulated from the right end of the support.
#[derive(Debug, Clone)]
struct Table {
    edges: Vec<f64>,
    // Columns: Q, q, |q|, Q², |c'/c|.
    right: Vec<[f64; 5]>,
}

/// A validated wave-speed profile. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Profile {
    config: ProfileConfig,
    shape: Shape,
    c0: f64,
    c_m: f64,
    c_min: f64,
    c_max: f64,
    decay_const: f64,
    decay_rate: f64,
    tail_tol: f64,
    support: (f64, f64),
    breakpoints: Vec<f64>,
    table: Table,
}

fn err(path: &str, message: impl Into<String>) -> ProfileError {
    ProfileError::new(path, message)
}

fn finite(path: &str, v: f64) -> Result<f64, ProfileError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(err(path, "must be finite"))
    }
}

fn bump_shape(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

fn bump_shape_derivative(t: f64) -> f64 {
    if t.abs() < 1.0 {
        let s = 1.0 - t * t;
        bump_shape(t) * (-2.0 * t / (s * s))
    } else {
        0.0
    }
}

impl Profile {
    pub fn constant() -> Self {
        Self::from_kind(ProfileKind::Constant).expect("constant profile is valid")
    }

    pub fn from_kind(kind: ProfileKind) -> Result<Self, ProfileError> {
        Self::new(kind.into())
    }

    pub fn new(config: ProfileConfig) -> Result<Self, ProfileError> {
        let tail_tol = match config.tail_tol {
            Some(t) if !(t > 0.0 && t.is_finite()) => {
                return Err(err("tail_tol", "must be a positive finite number"))
            }
            Some(t) => t,
            None => DEFAULT_TAIL_TOL,
        };
        let (shape, support, mut breakpoints) = build_shape(&config.kind, tail_tol)?;
        let (c_min, c_max) = shape_range(&shape);

        let c0 = match config.c0 {
            Some(v) => {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(err("c0", "must be a positive finite number"));
                }
                if c_min < v {
                    return Err(err(
                        "c0",
                        format!("profile reaches c = {c_min} below the lower bound {v}"),
                    ));
                }
                v
            }
            None => c_min,
        };
        let c_m = match config.c_m {
            Some(v) => {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(err("cM", "must be a positive finite number"));
                }
                if c_max > v {
                    return Err(err(
                        "cM",
                        format!("profile reaches c = {c_max} above the upper bound {v}"),
                    ));
                }
                v
            }
            None => c_max,
        };
        if c0 > c_m {
            return Err(err("c0", "lower bound exceeds upper bound"));
        }
        let decay_rate = match config.decay_rate {
            Some(v) if !(v > 0.0 && v.is_finite()) => {
                return Err(err("decay_rate", "must be a positive finite number"))
            }
            Some(v) => v,
            None => DEFAULT_DECAY_RATE,
        };

        breakpoints.push(support.0);
        breakpoints.push(support.1);
        breakpoints.retain(|&b| b >= support.0 && b <= support.1);
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));

        let mut profile = Self {
            config,
            shape,
            c0,
            c_m,
            c_min,
            c_max,
            decay_const: 0.0,
            decay_rate,
            tail_tol,
            support,
            breakpoints,
            table: Table {
                edges: vec![support.0, support.1],
                right: vec![[0.0; 5]; 2],
            },
        };
        profile.table = profile.build_table();

        let weight = |x: f64| (1.0 + x * x).powf(0.5 * (1.0 + decay_rate));
        let mut needed: f64 = 0.0;
        for x in profile.sample_points() {
            needed = needed.max((profile.eval_c(x) - 1.0).abs() * weight(x));
        }
        profile.decay_const = match profile.config.decay_const {
            Some(v) => {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(err("decay_const", "must be a positive finite number"));
                }
                if needed > v * (1.0 + 1e-12) {
                    return Err(err(
                        "decay_const",
                        format!("|c - 1| decay bound needs a constant of at least {needed}"),
                    ));
                }
                v
            }
            None => needed,
        };
        Ok(profile)
    }

    pub fn config(&self) -> &ProfileConfig {
        &self.config
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.config.kind
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn c_m(&self) -> f64 {
        self.c_m
    }

    /// Smallest and largest value actually attained by `c`.
    pub fn c_range(&self) -> (f64, f64) {
        (self.c_min, self.c_max)
    }

    pub fn decay_const(&self) -> f64 {
        self.decay_const
    }

    pub fn decay_rate(&self) -> f64 {
        self.decay_rate
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    /// Interval outside which `q` vanishes.
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Points where `c` or one of its low derivatives may jump, plus extrema and crossings
    /// of `c = 1`, sorted and restricted to the support (its ends included).
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self.shape, Shape::Constant)
    }

    /// True when `c` is continuous with an integrable derivative.
    pub fn is_smooth(&self) -> bool {
        !matches!(self.shape, Shape::Layers { .. })
    }

    pub fn eval_c(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Constant => 1.0,
            Shape::Layers { interfaces, speeds } => speeds[interfaces.partition_point(|&b| b <= x)],
            Shape::Bump {
                amplitude,
                center,
                width,
            } => 1.0 + amplitude * bump_shape((x - center) / width),
            Shape::Gaussian {
                amplitude,
                center,
                width,
                lo,
                hi,
            } => {
                if x < *lo || x > *hi {
                    1.0
                } else {
                    let t = (x - center) / width;
                    1.0 + amplitude * (-t * t).exp()
                }
            }
            Shape::Linear { xs, cs } => {
                if x <= xs[0] || x >= xs[xs.len() - 1] {
                    return 1.0;
                }
                let i = xs.partition_point(|&b| b <= x) - 1;
                let s = (x - xs[i]) / (xs[i + 1] - xs[i]);
                cs[i] + s * (cs[i + 1] - cs[i])
            }
            Shape::Cubic(interp) => {
                let xs = interp.xs();
                if x <= xs[0] || x >= xs[xs.len() - 1] {
                    1.0
                } else {
                    interp.eval(x)
                }
            }
        }
    }

    /// Derivative `c′(x)`; zero between the jumps of a piecewise-constant profile.
    pub fn eval_c_prime(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Constant | Shape::Layers { .. } => 0.0,
            Shape::Bump {
                amplitude,
                center,
                width,
            } => amplitude * bump_shape_derivative((x - center) / width) / width,
            Shape::Gaussian {
                amplitude,
                center,
                width,
                lo,
                hi,
            } => {
                if x < *lo || x > *hi {
                    0.0
                } else {
                    let t = (x - center) / width;
                    -2.0 * t * amplitude * (-t * t).exp() / width
                }
            }
            Shape::Linear { xs, cs } => {
                if x < xs[0] || x >= xs[xs.len() - 1] {
                    return 0.0;
                }
                let i = xs.partition_point(|&b| b <= x) - 1;
                (cs[i + 1] - cs[i]) / (xs[i + 1] - xs[i])
            }
            Shape::Cubic(interp) => {
                let xs = interp.xs();
                if x < xs[0] || x >= xs[xs.len() - 1] {
                    0.0
                } else {
                    interp.derivative(x)
                }
            }
        }
    }

    /// `q(x) = 1 − 1/c(x)²`.
    pub fn eval_q(&self, x: f64) -> f64 {
        let c = self.eval_c(x);
        1.0 - 1.0 / (c * c)
    }

    /// `Q(x) = 1 − 1/c(x)`.
    pub fn eval_big_q(&self, x: f64) -> f64 {
        1.0 - 1.0 / self.eval_c(x)
    }

    /// `γ(x) = ∫ₓ^∞ |q|`.
    pub fn gamma(&self, x: f64) -> f64 {
        self.integral_right(x, 2)
    }

    /// `η(x) = ∫_{−∞}^x |q|`.
    pub fn eta(&self, x: f64) -> f64 {
        self.table.right[0][2] - self.gamma(x)
    }

    /// `∫ₓ^∞ Q`.
    pub fn big_q_right(&self, x: f64) -> f64 {
        self.integral_right(x, 0)
    }

    /// `∫_{−∞}^x Q`.
    pub fn big_q_left(&self, x: f64) -> f64 {
        self.table.right[0][0] - self.big_q_right(x)
    }

    /// `∫ₓ^∞ q`.
    pub fn q_right(&self, x: f64) -> f64 {
        self.integral_right(x, 1)
    }

    /// `‖q‖₁`.
    pub fn norm_q_l1(&self) -> f64 {
        self.table.right[0][2]
    }

    pub fn chi(&self, x: f64, variant: ChiVariant) -> f64 {
        match variant {
            ChiVariant::FromRight => x + self.big_q_right(x),
            ChiVariant::FromLeft => x - self.big_q_left(x),
        }
    }

    /// Inverse of `chi`, by safeguarded Newton iteration.
    pub fn chi_inv(&self, y: f64, variant: ChiVariant) -> Result<f64, ProfileError> {
        let f = |x: f64| self.chi(x, variant) - y;
        let guess = y - match variant {
            ChiVariant::FromRight => 0.0,
            ChiVariant::FromLeft => -self.table.right[0][0],
        };
        // χ' lies in [1/c_max, 1/c_min], so the root is within c_max·|f(guess)| of the guess.
        let spread = self.c_max * f(guess).abs() + 1e-12 * (1.0 + guess.abs());
        let (mut lo, mut hi) = (guess - spread, guess + spread);
        if f(lo) > 0.0 || f(hi) < 0.0 {
            return Err(err("chi", format!("travel-time coordinate is not monotone near y = {y}")));
        }
        let mut x = guess;
        for _ in 0..200 {
            let fx = f(x);
            if fx == 0.0 {
                return Ok(x);
            }
            if fx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let slope = 1.0 / self.eval_c(x);
            let mut next = x - fx / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 1e-13 * (1.0 + x.abs()) || hi - lo <= 1e-13 * (1.0 + x.abs()) {
                return Ok(next);
            }
            x = next;
        }
        Err(err("chi", format!("inversion did not converge at y = {y}")))
    }

    pub fn functionals(&self) -> ScalarFunctionals {
        let total = self.table.right[0];
        let q_of = |c: f64| (1.0 - 1.0 / (c * c)).abs();
        let (bv_log_mu, jumps) = match &self.shape {
            Shape::Layers { speeds, .. } => (
                speeds.windows(2).map(|w| (w[1] / w[0]).ln().abs()).sum(),
                true,
            ),
            _ => (total[4], false),
        };
        ScalarFunctionals {
            int_q: total[1],
            int_big_q: total[0],
            int_big_q2: total[3],
            gamma0: q_of(self.c_min).max(q_of(self.c_max)),
            bv_log_mu,
            bv_is_jump_variation: jumps,
        }
    }

    /// The same profile shifted right by `a`.
    pub fn translated(&self, a: f64) -> Result<Self, ProfileError> {
        let kind = match self.config.kind.clone() {
            ProfileKind::Constant => ProfileKind::Constant,
            ProfileKind::Slab { c_s, x_l, x_r } => ProfileKind::Slab {
                c_s,
                x_l: x_l + a,
                x_r: x_r + a,
            },
            ProfileKind::Bump {
                amplitude,
                center,
                width,
            } => ProfileKind::Bump {
                amplitude,
                center: center + a,
                width,
            },
            ProfileKind::Gaussian {
                amplitude,
                center,
                width,
            } => ProfileKind::Gaussian {
                amplitude,
                center: center + a,
                width,
            },
            ProfileKind::PiecewiseLinear { knots } => ProfileKind::PiecewiseLinear {
                knots: knots.into_iter().map(|[x, c]| [x + a, c]).collect(),
            },
            ProfileKind::Samples { xs, cs } => ProfileKind::Samples {
                xs: xs.into_iter().map(|x| x + a).collect(),
                cs,
            },
            ProfileKind::Layers { interfaces, speeds } => ProfileKind::Layers {
                interfaces: interfaces.into_iter().map(|x| x + a).collect(),
                speeds,
            },
        };
        let mut config = self.config.clone();
        config.kind = kind;
        // The decay constant depends on the position; let it be re-inferred.
        config.decay_const = None;
        Self::new(config)
    }

    /// Quadrature nodes covering the support, used for sampled validation and tests.
    pub fn sample_points(&self) -> Vec<f64> {
        let rule = GaussLegendre::g8();
        let mut pts = self.breakpoints.clone();
        for w in self.table.edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            pts.extend(rule.nodes.iter().map(|t| 0.5 * (a + b) + 0.5 * (b - a) * t));
        }
        pts.sort_by(f64::total_cmp);
        pts
    }

    fn integrands(&self, x: f64) -> [f64; 5] {
        let c = self.eval_c(x);
        let big_q = 1.0 - 1.0 / c;
        let q = 1.0 - 1.0 / (c * c);
        [big_q, q, q.abs(), big_q * big_q, (self.eval_c_prime(x) / c).abs()]
    }

    fn panel_integral(&self, a: f64, b: f64) -> [f64; 5] {
        let rule = GaussLegendre::g16();
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = [0.0; 5];
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let v = self.integrands(mid + half * t);
            for j in 0..5 {
                acc[j] += w * half * v[j];
            }
        }
        acc
    }

    fn build_table(&self) -> Table {
        let (a, b) = self.support;
        let max_width = (b - a) / 256.0;
        let mut edges = vec![a];
        for w in self.breakpoints.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi <= lo {
                continue;
            }
            let n = ((hi - lo) / max_width).ceil().max(1.0) as usize;
            for j in 1..=n {
                edges.push(if j == n { hi } else { lo + (hi - lo) * j as f64 / n as f64 });
            }
        }
        if edges.len() == 1 {
            edges.push(b);
        }
        let n = edges.len() - 1;
        let mut right = vec![[0.0; 5]; n + 1];
        for i in (0..n).rev() {
            let p = self.panel_integral(edges[i], edges[i + 1]);
            for j in 0..5 {
                right[i][j] = right[i + 1][j] + p[j];
            }
        }
        Table { edges, right }
    }

    fn integral_right(&self, x: f64, col: usize) -> f64 {
        let edges = &self.table.edges;
        let n = edges.len() - 1;
        if x >= edges[n] {
            return 0.0;
        }
        if x <= edges[0] {
            return self.table.right[0][col];
        }
        let p = edges.partition_point(|&e| e <= x) - 1;
        let partial = if x == edges[p] {
            self.table.right[p][col] - self.table.right[p + 1][col]
        } else {
            self.panel_integral(x, edges[p + 1])[col]
        };
        partial + self.table.right[p + 1][col]
    }
}

type Built = (Shape, (f64, f64), Vec<f64>);

fn build_shape(kind: &ProfileKind, tail_tol: f64) -> Result<Built, ProfileError> {
    match kind {
        ProfileKind::Constant => Ok((Shape::Constant, (-0.5, 0.5), vec![])),
        ProfileKind::Slab { c_s, x_l, x_r } => {
            let c_s = finite("c_s", *c_s)?;
            let (x_l, x_r) = (finite("x_l", *x_l)?, finite("x_r", *x_r)?);
            if c_s <= 0.0 {
                return Err(err("c_s", "wave speed must be positive"));
            }
            if x_l >= x_r {
                return Err(err("x_l", format!("x_l = {x_l} must be smaller than x_r = {x_r}")));
            }
            Ok((
                Shape::Layers {
                    interfaces: vec![x_l, x_r],
                    speeds: vec![1.0, c_s, 1.0],
                },
                (x_l, x_r),
                vec![x_l, x_r],
            ))
        }
        ProfileKind::Layers { interfaces, speeds } => {
            if interfaces.is_empty() {
                return Err(err("interfaces", "at least one interface is required"));
            }
            for (i, &x) in interfaces.iter().enumerate() {
                finite(&format!("interfaces[{i}]"), x)?;
            }
            if !interfaces.windows(2).all(|w| w[1] > w[0]) {
                return Err(err("interfaces", "must be strictly ascending"));
            }
            if speeds.len() != interfaces.len() + 1 {
                return Err(err(
                    "speeds",
                    format!("expected {} speeds, found {}", interfaces.len() + 1, speeds.len()),
                ));
            }
            for (i, &c) in speeds.iter().enumerate() {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(err(&format!("speeds[{i}]"), "wave speed must be positive"));
                }
            }
            if speeds[0] != 1.0 || speeds[speeds.len() - 1] != 1.0 {
                return Err(err("speeds", "outermost speeds must equal 1"));
            }
            let support = (interfaces[0], interfaces[interfaces.len() - 1]);
            Ok((
                Shape::Layers {
                    interfaces: interfaces.clone(),
                    speeds: speeds.clone(),
                },
                support,
                interfaces.clone(),
            ))
        }
        ProfileKind::Bump {
            amplitude,
            center,
            width,
        } => {
            let (amplitude, center, width) = (
                finite("amplitude", *amplitude)?,
                finite("center", *center)?,
                finite("width", *width)?,
            );
            if width <= 0.0 {
                return Err(err("width", "must be positive"));
            }
            if 1.0 + amplitude <= 0.0 {
                return Err(err("amplitude", "wave speed 1 + amplitude must be positive"));
            }
            let support = (center - width, center + width);
            Ok((
                Shape::Bump {
                    amplitude,
                    center,
                    width,
                },
                support,
                vec![center],
            ))
        }
        ProfileKind::Gaussian {
            amplitude,
            center,
            width,
        } => {
            let (amplitude, center, width) = (
                finite("amplitude", *amplitude)?,
                finite("center", *center)?,
                finite("width", *width)?,
            );
            if width <= 0.0 {
                return Err(err("width", "must be positive"));
            }
            if 1.0 + amplitude <= 0.0 {
                return Err(err("amplitude", "wave speed 1 + amplitude must be positive"));
            }
            let q_at = |t: f64| {
                let c = 1.0 + amplitude * (-t * t).exp();
                (1.0 - 1.0 / (c * c)).abs()
            };
            // |q| decreases in |t|; locate |q| = tail_tol by doubling and bisection.
            let mut hi = 1.0;
            while q_at(hi) >= tail_tol {
                hi *= 2.0;
            }
            let mut lo = 0.0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if q_at(mid) >= tail_tol {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let half = hi * width;
            let (a, b) = (center - half, center + half);
            Ok((
                Shape::Gaussian {
                    amplitude,
                    center,
                    width,
                    lo: a,
                    hi: b,
                },
                (a, b),
                vec![center],
            ))
        }
        ProfileKind::PiecewiseLinear { knots } => {
            if knots.len() < 2 {
                return Err(err("knots", "at least two knots are required"));
            }
            for (i, [x, c]) in knots.iter().enumerate() {
                finite(&format!("knots[{i}][0]"), *x)?;
                finite(&format!("knots[{i}][1]"), *c)?;
                if *c <= 0.0 {
                    return Err(err(&format!("knots[{i}][1]"), "wave speed must be positive"));
                }
            }
            let xs: Vec<f64> = knots.iter().map(|k| k[0]).collect();
            let cs: Vec<f64> = knots.iter().map(|k| k[1]).collect();
            if !xs.windows(2).all(|w| w[1] > w[0]) {
                return Err(err("knots", "knot abscissae must be strictly ascending"));
            }
            if cs[0] != 1.0 || cs[cs.len() - 1] != 1.0 {
                return Err(err("knots", "first and last knot values must equal 1"));
            }
            let mut bps = xs.clone();
            for i in 0..xs.len() - 1 {
                let (c0, c1) = (cs[i] - 1.0, cs[i + 1] - 1.0);
                if c0 * c1 < 0.0 {
                    bps.push(xs[i] + (xs[i + 1] - xs[i]) * c0 / (c0 - c1));
                }
            }
            let support = (xs[0], xs[xs.len() - 1]);
            Ok((Shape::Linear { xs, cs }, support, bps))
        }
        ProfileKind::Samples { xs, cs } => {
            if xs.len() != cs.len() {
                return Err(err("cs", "xs and cs must have the same length"));
            }
            if xs.len() < 2 {
                return Err(err("xs", "at least two samples are required"));
            }
            for (i, &x) in xs.iter().enumerate() {
                finite(&format!("xs[{i}]"), x)?;
            }
            for (i, &c) in cs.iter().enumerate() {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(err(&format!("cs[{i}]"), "wave speed must be positive"));
                }
            }
            if !xs.windows(2).all(|w| w[1] > w[0]) {
                return Err(err("xs", "must be strictly ascending"));
            }
            if cs[0] != 1.0 || cs[cs.len() - 1] != 1.0 {
                return Err(err("cs", "first and last values must equal 1"));
            }
            let interp = CubicHermite::monotone(xs.clone(), cs.clone());
            let mut bps = xs.clone();
            for i in 0..xs.len() - 1 {
                bps.extend(cell_special_points(&interp, i));
            }
            let support = (xs[0], xs[xs.len() - 1]);
            Ok((Shape::Cubic(interp), support, bps))
        }
    }
}

/// Interior extrema and crossings of `c = 1` inside cell `i` of a cubic interpolant.
fn cell_special_points(interp: &CubicHermite, i: usize) -> Vec<f64> {
    let [a0, a1, a2, a3] = interp.cell_coefficients(i);
    let x0 = interp.xs()[i];
    let h = interp.xs()[i + 1] - x0;
    let value = |u: f64| a0 - 1.0 + u * (a1 + u * (a2 + u * a3));
    let slope = |u: f64| a1 + u * (2.0 * a2 + 3.0 * u * a3);
    let mut out = Vec::new();
    for g in [&value as &dyn Fn(f64) -> f64, &slope] {
        let m = 16;
        for j in 0..m {
            let (mut lo, mut hi) = (h * j as f64 / m as f64, h * (j + 1) as f64 / m as f64);
            let (glo, ghi) = (g(lo), g(hi));
            if glo * ghi >= 0.0 || glo == 0.0 {
                continue;
            }
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if g(mid) * glo > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(x0 + 0.5 * (lo + hi));
        }
    }
    out
}

fn shape_range(shape: &Shape) -> (f64, f64) {
    let fold = |vals: &mut dyn Iterator<Item = f64>| {
        vals.fold((1.0f64, 1.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    match shape {
        Shape::Constant => (1.0, 1.0),
        Shape::Layers { speeds, .. } => fold(&mut speeds.iter().copied()),
        Shape::Bump { amplitude, .. } | Shape::Gaussian { amplitude, .. } => {
            fold(&mut std::iter::once(1.0 + amplitude))
        }
        Shape::Linear { cs, .. } => fold(&mut cs.iter().copied()),
        Shape::Cubic(interp) => {
            let mut vals: Vec<f64> = interp.ys().to_vec();
            for i in 0..interp.xs().len() - 1 {
                let [a0, a1, a2, a3] = interp.cell_coefficients(i);
                let x0 = interp.xs()[i];
                for x in cell_special_points(interp, i) {
                    let u = x - x0;
                    vals.push(a0 + u * (a1 + u * (a2 + u * a3)));
                }
            }
            fold(&mut vals.into_iter())
        }
    }
}
