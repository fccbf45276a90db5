//! Cubic Hermite interpolation.
//!
//! Node slopes come from the derivative of the local five-point interpolating
//! polynomial (fourth order on smooth data). The shape-preserving variant passes them
//! through Hyman's filter where the data are locally monotone, which keeps every monotone
//! run monotone; at data extrema the high-order slope is kept so that peaks are not
//! flattened. The plain variant skips the filter and is linear in the data.

/// Piecewise cubic Hermite interpolant on an ascending grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicHermite {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl CubicHermite {
    /// Five-point slopes without filtering. `xs` must be strictly ascending with at least
    /// two points.
    pub fn local(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        check_grid(&xs, &ys);
        let slopes = (0..xs.len()).map(|i| local_derivative(&xs, &ys, i)).collect();
        Self { xs, ys, slopes }
    }

    /// Shape-preserving interpolant. `xs` must be strictly ascending with at least two
    /// points.
    pub fn monotone(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        check_grid(&xs, &ys);
        let n = xs.len();
        let secant: Vec<f64> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let mut slopes: Vec<f64> = (0..n).map(|i| local_derivative(&xs, &ys, i)).collect();

        for i in 0..n {
            let left = if i > 0 { Some(secant[i - 1]) } else { None };
            let right = if i + 1 < n { Some(secant[i]) } else { None };
            slopes[i] = match (left, right) {
                (Some(l), Some(r)) if l * r > 0.0 => hyman(slopes[i], l.abs().min(r.abs()), l),
                (Some(l), Some(r)) if l * r == 0.0 => 0.0,
                (None, Some(s)) | (Some(s), None) => hyman(slopes[i], s.abs(), s),
                _ => slopes[i],
            };
        }
        Self { xs, ys, slopes }
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// Index of the cell `[x_i, x_{i+1}]` containing `x` (clamped to the grid).
    pub fn cell(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.binary_search_by(|probe| probe.total_cmp(&x)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Monomial coefficients `[a0, a1, a2, a3]` of cell `i` in the local variable `u = x - x_i`.
    pub fn cell_coefficients(&self, i: usize) -> [f64; 4] {
        let h = self.xs[i + 1] - self.xs[i];
        let s = (self.ys[i + 1] - self.ys[i]) / h;
        let (d0, d1) = (self.slopes[i], self.slopes[i + 1]);
        [
            self.ys[i],
            d0,
            (3.0 * s - 2.0 * d0 - d1) / h,
            (d0 + d1 - 2.0 * s) / (h * h),
        ]
    }

    /// Value at `x`; outside the grid the end cells are extended as cubics.
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.cell(x);
        let [a0, a1, a2, a3] = self.cell_coefficients(i);
        let u = x - self.xs[i];
        a0 + u * (a1 + u * (a2 + u * a3))
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let i = self.cell(x);
        let [_, a1, a2, a3] = self.cell_coefficients(i);
        let u = x - self.xs[i];
        a1 + u * (2.0 * a2 + 3.0 * u * a3)
    }
}

fn check_grid(xs: &[f64], ys: &[f64]) {
    assert_eq!(xs.len(), ys.len(), "abscissae and ordinates differ in length");
    assert!(xs.len() >= 2, "interpolation needs at least two points");
    assert!(
        xs.windows(2).all(|w| w[1] > w[0]),
        "abscissae must be strictly ascending"
    );
}

fn hyman(d: f64, bound_mag: f64, sign_of: f64) -> f64 {
    if d * sign_of <= 0.0 {
        0.0
    } else {
        d.signum() * d.abs().min(3.0 * bound_mag)
    }
}

/// Derivative at `xs[i]` of the polynomial through up to five neighbouring points.
fn local_derivative(xs: &[f64], ys: &[f64], i: usize) -> f64 {
    let n = xs.len();
    let width = n.min(5);
    let start = i.saturating_sub(width / 2).min(n - width);
    let idx: Vec<usize> = (start..start + width).collect();
    let xi = xs[i];
    let mut d = 0.0;
    for &j in &idx {
        let coeff = if j == i {
            idx.iter()
                .filter(|&&m| m != i)
                .map(|&m| 1.0 / (xi - xs[m]))
                .sum::<f64>()
        } else {
            let num: f64 = idx
                .iter()
                .filter(|&&m| m != i && m != j)
                .map(|&m| xi - xs[m])
                .product();
            let den: f64 = idx
                .iter()
                .filter(|&&m| m != j)
                .map(|&m| xs[j] - xs[m])
                .product();
            num / den
        };
        d += coeff * ys[j];
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics_on_nonuniform_grid() {
        let xs: Vec<f64> = (0..30).map(|i| (i as f64 * 0.13).powf(1.3)).collect();
        let f = |x: f64| 0.5 + 0.1 * x + 0.02 * x * x - 0.001 * x * x * x;
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let interp = CubicHermite::monotone(xs.clone(), ys);
        for j in 0..200 {
            let x = xs[29] * j as f64 / 199.0;
            assert!((interp.eval(x) - f(x)).abs() < 1e-11, "x={x}");
        }
    }

    #[test]
    fn monotone_data_stay_monotone() {
        let xs: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let ys = vec![0.0, 0.0, 0.0, 0.1, 5.0, 5.1, 5.1, 5.2, 9.0, 9.0, 9.0, 9.0];
        let interp = CubicHermite::monotone(xs, ys);
        let mut prev = interp.eval(0.0);
        for j in 1..=1100 {
            let v = interp.eval(j as f64 / 100.0);
            assert!(v >= prev - 1e-12, "non-monotone at {}", j as f64 / 100.0);
            prev = v;
        }
    }

    #[test]
    fn interpolates_data_points() {
        let xs = vec![-1.0, 0.0, 0.3, 2.0];
        let ys = vec![1.0, 2.0, -1.0, 4.0];
        let interp = CubicHermite::monotone(xs.clone(), ys.clone());
        for (x, y) in xs.iter().zip(&ys) {
            assert!((interp.eval(*x) - y).abs() < 1e-14);
        }
    }

    #[test]
    fn local_variant_is_linear_in_data() {
        let xs: Vec<f64> = (0..9).map(|i| (i as f64 * 0.37).exp()).collect();
        let a: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let b: Vec<f64> = xs.iter().map(|x| (x * x).cos()).collect();
        let mix: Vec<f64> = a.iter().zip(&b).map(|(u, v)| 2.5 * u - v).collect();
        let (ia, ib, im) = (
            CubicHermite::local(xs.clone(), a),
            CubicHermite::local(xs.clone(), b),
            CubicHermite::local(xs.clone(), mix),
        );
        for j in 0..100 {
            let x = 1.0 + j as f64 * 0.18;
            assert!((im.eval(x) - (2.5 * ia.eval(x) - ib.eval(x))).abs() < 1e-12);
        }
    }
}
