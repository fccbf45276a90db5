//! Adaptive Dormand–Prince 8(5,3) integration of complex first-order systems.
//!
//! The state is a fixed-size array of complex numbers. Integration may run in either
//! direction; `march` records the state at a list of output abscissae and forces step
//! boundaries onto every supplied breakpoint so that jumps in the coefficients never sit
//! inside a step.

// Coefficients of Hairer, Nørsett & Wanner's DOP853.
#![allow(clippy::excessive_precision, clippy::unreadable_literal)]

use num_complex::Complex64;

use crate::error::OdeError;

const C2: f64 = 0.526001519587677318785587544488e-01;
const C3: f64 = 0.789002279381515978178381316732e-01;
const C4: f64 = 0.118350341907227396726757197510;
const C5: f64 = 0.281649658092772603273242802490;
const C6: f64 = 0.333333333333333333333333333333;
const C7: f64 = 0.25;
const C8: f64 = 0.307692307692307692307692307692;
const C9: f64 = 0.651282051282051282051282051282;
const C10: f64 = 0.6;
const C11: f64 = 0.857142857142857142857142857142;

const A21: f64 = 5.26001519587677318785587544488e-02;
const A31: f64 = 1.97250569845378994544595329183e-02;
const A32: f64 = 5.91751709536136983633785987549e-02;
const A41: f64 = 2.95875854768068491816892993775e-02;
const A43: f64 = 8.87627564304205475450678981324e-02;
const A51: f64 = 2.41365134159266685502369798665e-01;
const A53: f64 = -8.84549479328286085344864962717e-01;
const A54: f64 = 9.24834003261792003115737966543e-01;
const A61: f64 = 3.70370370370370370370370370370e-02;
const A64: f64 = 1.70828608729473871279604482173e-01;
const A65: f64 = 1.25467687566822425016691814123e-01;
const A71: f64 = 3.71093750000000000000000000000e-02;
const A74: f64 = 1.70252211019544039314978060272e-01;
const A75: f64 = 6.02165389804559606850219397283e-02;
const A76: f64 = -1.75781250000000000000000000000e-02;
const A81: f64 = 3.70920001185047927108779319836e-02;
const A84: f64 = 1.70383925712239993810214054705e-01;
const A85: f64 = 1.07262030446373284651809199168e-01;
const A86: f64 = -1.53194377486244017527936158236e-02;
const A87: f64 = 8.27378916381402288758473766002e-03;
const A91: f64 = 6.24110958716075717114429577812e-01;
const A94: f64 = -3.36089262944694129406857109825e+00;
const A95: f64 = -8.68219346841726006818189891453e-01;
const A96: f64 = 2.75920996994467083049415600797e+01;
const A97: f64 = 2.01540675504778934086186788979e+01;
const A98: f64 = -4.34898841810699588477366255144e+01;
const A101: f64 = 4.77662536438264365890433908527e-01;
const A104: f64 = -2.48811461997166764192642586468e+00;
const A105: f64 = -5.90290826836842996371446475743e-01;
const A106: f64 = 2.12300514481811942347288949897e+01;
const A107: f64 = 1.52792336328824235832596922938e+01;
const A108: f64 = -3.32882109689848629194453265587e+01;
const A109: f64 = -2.03312017085086261358222928593e-02;
const A111: f64 = -9.37142430085987325717040528057e-01;
const A114: f64 = 5.18637242884406370830023853209e+00;
const A115: f64 = 1.09143734899672957818500254654e+00;
const A116: f64 = -8.14978701074692612513997267357e+00;
const A117: f64 = -1.85200656599969598641566180701e+01;
const A118: f64 = 2.27394870993505042818970056734e+01;
const A119: f64 = 2.49360555267965238987089396762e+00;
const A1110: f64 = -3.04676447189821950038236690220e+00;
const A121: f64 = 2.27331014751653820792359768449e+00;
const A124: f64 = -1.05344954667372501984066689879e+01;
const A125: f64 = -2.00087205822486249909675718444e+00;
const A126: f64 = -1.79589318631187989172765950534e+01;
const A127: f64 = 2.79488845294199600508499808837e+01;
const A128: f64 = -2.85899827713502369474065508674e+00;
const A129: f64 = -8.87285693353062954433549289258e+00;
const A1210: f64 = 1.23605671757943030647266201528e+01;
const A1211: f64 = 6.43392746015763530355970484046e-01;

const B1: f64 = 5.42937341165687622380535766363e-02;
const B6: f64 = 4.45031289275240888144113950566e+00;
const B7: f64 = 1.89151789931450038304281599044e+00;
const B8: f64 = -5.80120396001058478146721142270e+00;
const B9: f64 = 3.11164366957819894408916062370e-01;
const B10: f64 = -1.52160949662516078556178806805e-01;
const B11: f64 = 2.01365400804030348374776537501e-01;
const B12: f64 = 4.47106157277725905176885569043e-02;

const BHH1: f64 = 0.244094488188976377952755905512e+00;
const BHH2: f64 = 0.733846688281611857341361741547e+00;
const BHH3: f64 = 0.220588235294117647058823529412e-01;

const ER1: f64 = 0.1312004499419488073250102996e-01;
const ER6: f64 = -0.1225156446376204440720569753e+01;
const ER7: f64 = -0.4957589496572501915214079952e+00;
const ER8: f64 = 0.1664377182454986536961530415e+01;
const ER9: f64 = -0.3503288487499736816886487290e+00;
const ER10: f64 = 0.3341791187130174790297318841e+00;
const ER11: f64 = 0.8192320648511571246570742613e-01;
const ER12: f64 = -0.2235530786388629525884427845e-01;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;

/// Step-control settings. The local error of each component is compared against
/// `atol + rtol·max_i |y_i|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Maximum number of accepted plus rejected steps for one `march` call.
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-14,
            max_steps: 2_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_rtol(rtol: f64) -> Self {
        Self {
            rtol,
            atol: rtol * 1e-2,
            ..Self::default()
        }
    }
}

type State<const N: usize> = [Complex64; N];

#[inline]
fn nudge(x: f64) -> f64 {
    4.0 * f64::EPSILON * x.abs().max(1.0)
}

/// Largest component modulus. Errors are measured relative to the whole state so that
/// components passing through zero do not force tiny steps.
#[inline]
fn state_norm<const N: usize>(y: &State<N>) -> f64 {
    y.iter().fold(0.0, |m, v| m.max(v.norm()))
}

#[inline]
fn combine<const N: usize>(y: &State<N>, h: f64, terms: &[(f64, &State<N>)]) -> State<N> {
    let mut out = *y;
    for (coef, k) in terms {
        let s = h * coef;
        for i in 0..N {
            out[i] += k[i] * s;
        }
    }
    out
}

/// Running statistics of one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Adaptive DOP853 integrator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Dop853 {
    pub options: OdeOptions,
}

impl Dop853 {
    pub fn new(options: OdeOptions) -> Self {
        Self { options }
    }

    /// Integrates from `(x0, y0)` through the ordered `targets`, returning the state at each
    /// target. Steps are forced to end on every element of `breaks` lying strictly between
    /// `x0` and the last target. `guard` is consulted after every accepted step; returning
    /// `Err(msg)` aborts with the current abscissa.
    pub fn march<const N: usize, F, G>(
        &self,
        f: &F,
        x0: f64,
        y0: State<N>,
        targets: &[f64],
        breaks: &[f64],
        mut guard: G,
    ) -> Result<(Vec<State<N>>, OdeStats), OdeError>
    where
        F: Fn(f64, &State<N>) -> State<N>,
        G: FnMut(f64, &State<N>) -> Result<(), String>,
    {
        let mut out = Vec::with_capacity(targets.len());
        let mut stats = OdeStats::default();
        let Some(&last) = targets.last() else {
            return Ok((out, stats));
        };
        let dir = if last >= x0 { 1.0 } else { -1.0 };
        debug_assert!(
            targets.windows(2).all(|w| (w[1] - w[0]) * dir >= 0.0),
            "targets must be ordered along the integration direction"
        );

        let mut stops: Vec<f64> = breaks
            .iter()
            .copied()
            .filter(|&b| (b - x0) * dir > 0.0 && (last - b) * dir > 0.0)
            .collect();
        stops.sort_by(|a, b| (a * dir).total_cmp(&(b * dir)));

        let mut x = x0;
        let mut y = y0;
        let mut k1 = f(x + dir * nudge(x), &y);
        stats.evaluations += 1;
        let mut h: Option<f64> = None;
        let mut bi = 0;

        for &target in targets {
            loop {
                while bi < stops.len() && (stops[bi] - x) * dir <= 0.0 {
                    bi += 1;
                }
                let next = if bi < stops.len() && (stops[bi] - target) * dir < 0.0 {
                    stops[bi]
                } else {
                    target
                };
                if (next - x) * dir > 0.0 {
                    let h0 = match h {
                        Some(h) => h,
                        None => self.initial_step(f, x, &y, &k1, dir, (last - x).abs()),
                    };
                    let (hn, kn) =
                        self.advance(f, &mut x, &mut y, k1, h0, next, dir, &mut stats, &mut guard)?;
                    h = Some(hn);
                    k1 = kn;
                }
                if next == target {
                    break;
                }
            }
            out.push(y);
        }
        Ok((out, stats))
    }

    fn initial_step<const N: usize, F>(
        &self,
        f: &F,
        x: f64,
        y: &State<N>,
        f0: &State<N>,
        dir: f64,
        span: f64,
    ) -> f64
    where
        F: Fn(f64, &State<N>) -> State<N>,
    {
        let o = &self.options;
        let n = (2 * N) as f64;
        let mut dnf = 0.0;
        let mut dny = 0.0;
        for i in 0..N {
            let sk = o.atol + o.rtol * state_norm(y);
            dnf += (f0[i].norm() / sk).powi(2);
            dny += (y[i].norm() / sk).powi(2);
        }
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            (dny / dnf).sqrt() * 0.01
        };
        h = h.min(span);
        let y1 = combine(y, h * dir, &[(1.0, f0)]);
        let f1 = f(x + h * dir, &y1);
        let mut der2 = 0.0;
        for i in 0..N {
            let sk = o.atol + o.rtol * state_norm(y);
            der2 += ((f1[i] - f0[i]).norm() / sk).powi(2);
        }
        der2 = der2.sqrt() / h;
        let der12 = der2.max(dnf.sqrt() / n.sqrt());
        let h1 = if der12 <= 1e-15 {
            (h * 1e-3).max(1e-6)
        } else {
            (0.01 / der12).powf(1.0 / 8.0)
        };
        (100.0 * h).min(h1).min(span)
    }

    #[allow(clippy::too_many_arguments)]
    fn advance<const N: usize, F, G>(
        &self,
        f: &F,
        x: &mut f64,
        y: &mut State<N>,
        mut k1: State<N>,
        h_start: f64,
        end: f64,
        dir: f64,
        stats: &mut OdeStats,
        guard: &mut G,
    ) -> Result<(f64, State<N>), OdeError>
    where
        F: Fn(f64, &State<N>) -> State<N>,
        G: FnMut(f64, &State<N>) -> Result<(), String>,
    {
        let o = self.options;
        let mut h = h_start.abs();
        let mut reject = false;
        let n = (2 * N) as f64;
        loop {
            let remaining = (end - *x) * dir;
            if remaining <= 0.0 {
                return Ok((h, k1));
            }
            if stats.accepted + stats.rejected >= o.max_steps {
                return Err(OdeError::TooManySteps { x: *x });
            }
            let h_min = 1e-14 * x.abs().max(1.0);
            if remaining <= h_min {
                // Below step resolution: an Euler update is exact to rounding.
                for i in 0..N {
                    y[i] += k1[i] * (remaining * dir);
                }
                *x = end;
                k1 = f(end + dir * nudge(end), y);
                stats.evaluations += 1;
                return Ok((h, k1));
            }
            if h < h_min {
                return Err(OdeError::StepUnderflow { x: *x, h });
            }
            let last = h >= remaining;
            let hs = if last { remaining } else { h };
            let hd = hs * dir;
            let xv = *x;
            let yv = &*y;

            let k2 = f(xv + C2 * hd, &combine(yv, hd, &[(A21, &k1)]));
            let k3 = f(xv + C3 * hd, &combine(yv, hd, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(xv + C4 * hd, &combine(yv, hd, &[(A41, &k1), (A43, &k3)]));
            let k5 = f(
                xv + C5 * hd,
                &combine(yv, hd, &[(A51, &k1), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                xv + C6 * hd,
                &combine(yv, hd, &[(A61, &k1), (A64, &k4), (A65, &k5)]),
            );
            let k7 = f(
                xv + C7 * hd,
                &combine(yv, hd, &[(A71, &k1), (A74, &k4), (A75, &k5), (A76, &k6)]),
            );
            let k8 = f(
                xv + C8 * hd,
                &combine(
                    yv,
                    hd,
                    &[(A81, &k1), (A84, &k4), (A85, &k5), (A86, &k6), (A87, &k7)],
                ),
            );
            let k9 = f(
                xv + C9 * hd,
                &combine(
                    yv,
                    hd,
                    &[
                        (A91, &k1),
                        (A94, &k4),
                        (A95, &k5),
                        (A96, &k6),
                        (A97, &k7),
                        (A98, &k8),
                    ],
                ),
            );
            let k10 = f(
                xv + C10 * hd,
                &combine(
                    yv,
                    hd,
                    &[
                        (A101, &k1),
                        (A104, &k4),
                        (A105, &k5),
                        (A106, &k6),
                        (A107, &k7),
                        (A108, &k8),
                        (A109, &k9),
                    ],
                ),
            );
            let k11 = f(
                xv + C11 * hd,
                &combine(
                    yv,
                    hd,
                    &[
                        (A111, &k1),
                        (A114, &k4),
                        (A115, &k5),
                        (A116, &k6),
                        (A117, &k7),
                        (A118, &k8),
                        (A119, &k9),
                        (A1110, &k10),
                    ],
                ),
            );
            let x_new = if last { end } else { xv + hd };
            // At a forced stop the coefficient may jump: use the limit from inside the step.
            let x_stage12 = if last { x_new - dir * nudge(x_new) } else { x_new };
            let k12 = f(
                x_stage12,
                &combine(
                    yv,
                    hd,
                    &[
                        (A121, &k1),
                        (A124, &k4),
                        (A125, &k5),
                        (A126, &k6),
                        (A127, &k7),
                        (A128, &k8),
                        (A129, &k9),
                        (A1210, &k10),
                        (A1211, &k11),
                    ],
                ),
            );
            stats.evaluations += 11;

            let mut incr = [Complex64::new(0.0, 0.0); N];
            let mut err5 = 0.0;
            let mut err3 = 0.0;
            let mut y_new = *yv;
            for i in 0..N {
                incr[i] = k1[i] * B1
                    + k6[i] * B6
                    + k7[i] * B7
                    + k8[i] * B8
                    + k9[i] * B9
                    + k10[i] * B10
                    + k11[i] * B11
                    + k12[i] * B12;
                y_new[i] += incr[i] * hd;
            }
            let scale = o.atol + o.rtol * state_norm(yv).max(state_norm(&y_new));
            let finite = y_new.iter().all(|v| v.re.is_finite() && v.im.is_finite());
            for i in 0..N {
                let sk = scale;
                let e3 = incr[i] - k1[i] * BHH1 - k9[i] * BHH2 - k12[i] * BHH3;
                let e5 = k1[i] * ER1
                    + k6[i] * ER6
                    + k7[i] * ER7
                    + k8[i] * ER8
                    + k9[i] * ER9
                    + k10[i] * ER10
                    + k11[i] * ER11
                    + k12[i] * ER12;
                err3 += (e3.norm() / sk).powi(2);
                err5 += (e5.norm() / sk).powi(2);
            }
            let deno = err5 + 0.01 * err3;
            let err = if !finite {
                f64::INFINITY
            } else if deno > 0.0 {
                hs * err5 / (n * deno).sqrt()
            } else {
                0.0
            };

            if err <= 1.0 {
                stats.accepted += 1;
                *x = x_new;
                *y = y_new;
                let x_k1 = if last { x_new + dir * nudge(x_new) } else { x_new };
                k1 = f(x_k1, &y_new);
                stats.evaluations += 1;
                guard(x_new, &y_new).map_err(|message| OdeError::Guard { x: x_new, message })?;
                let mut fac = if err > 0.0 {
                    SAFETY * err.powf(-1.0 / 8.0)
                } else {
                    FAC_MAX
                };
                fac = fac.clamp(FAC_MIN, FAC_MAX);
                if reject {
                    fac = fac.min(1.0);
                }
                reject = false;
                // Keep the unconstrained step size when the last step was clipped to `end`.
                h = if last { h.max(hs * fac) } else { hs * fac };
            } else {
                stats.rejected += 1;
                reject = true;
                let fac = if err.is_finite() {
                    (SAFETY * err.powf(-1.0 / 8.0)).clamp(0.1, 1.0)
                } else {
                    0.1
                };
                h = hs * fac;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_satisfies_quadrature_order_conditions() {
        let b = [B1, 0.0, 0.0, 0.0, 0.0, B6, B7, B8, B9, B10, B11, B12];
        let c = [0.0, C2, C3, C4, C5, C6, C7, C8, C9, C10, C11, 1.0];
        for q in 0..8 {
            let s: f64 = b.iter().zip(&c).map(|(bi, ci)| bi * ci.powi(q)).sum();
            assert!((s - 1.0 / (q as f64 + 1.0)).abs() < 1e-13, "order condition q={q}: {s}");
        }
    }

    fn tableau() -> ([[f64; 12]; 12], [f64; 12], [f64; 12]) {
        let mut a = [[0.0; 12]; 12];
        let rows: [&[(usize, f64)]; 11] = [
            &[(0, A21)],
            &[(0, A31), (1, A32)],
            &[(0, A41), (2, A43)],
            &[(0, A51), (2, A53), (3, A54)],
            &[(0, A61), (3, A64), (4, A65)],
            &[(0, A71), (3, A74), (4, A75), (5, A76)],
            &[(0, A81), (3, A84), (4, A85), (5, A86), (6, A87)],
            &[(0, A91), (3, A94), (4, A95), (5, A96), (6, A97), (7, A98)],
            &[
                (0, A101),
                (3, A104),
                (4, A105),
                (5, A106),
                (6, A107),
                (7, A108),
                (8, A109),
            ],
            &[
                (0, A111),
                (3, A114),
                (4, A115),
                (5, A116),
                (6, A117),
                (7, A118),
                (8, A119),
                (9, A1110),
            ],
            &[
                (0, A121),
                (3, A124),
                (4, A125),
                (5, A126),
                (6, A127),
                (7, A128),
                (8, A129),
                (9, A1210),
                (10, A1211),
            ],
        ];
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row.iter() {
                a[i + 1][j] = v;
            }
        }
        let b = [B1, 0.0, 0.0, 0.0, 0.0, B6, B7, B8, B9, B10, B11, B12];
        let c = [0.0, C2, C3, C4, C5, C6, C7, C8, C9, C10, C11, 1.0];
        (a, b, c)
    }

    #[test]
    fn tableau_rows_are_consistent_and_tree_conditions_hold() {
        let (a, b, c) = tableau();
        for i in 0..12 {
            let s: f64 = a[i].iter().sum();
            assert!((s - c[i]).abs() < 1e-13, "row {i}: {s} vs {}", c[i]);
        }
        let ac: Vec<f64> = (0..12).map(|i| (0..12).map(|j| a[i][j] * c[j]).sum()).collect();
        let ac2: Vec<f64> = (0..12)
            .map(|i| (0..12).map(|j| a[i][j] * c[j] * c[j]).sum())
            .collect();
        let aac: Vec<f64> = (0..12).map(|i| (0..12).map(|j| a[i][j] * ac[j]).sum()).collect();
        let dot = |v: &[f64]| -> f64 { b.iter().zip(v).map(|(x, y)| x * y).sum() };
        let cac: Vec<f64> = (0..12).map(|i| c[i] * ac[i]).collect();
        assert!((dot(&ac) - 1.0 / 6.0).abs() < 1e-13);
        assert!((dot(&ac2) - 1.0 / 12.0).abs() < 1e-13);
        assert!((dot(&aac) - 1.0 / 24.0).abs() < 1e-13);
        assert!((dot(&cac) - 1.0 / 8.0).abs() < 1e-13);
        let bhh = [BHH1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, BHH2, 0.0, 0.0, BHH3];
        let s: f64 = bhh.iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn harmonic_oscillator_converges_at_high_order() {
        let i = Complex64::new(0.0, 1.0);
        let f = |_x: f64, y: &[Complex64; 1]| [i * 5.0 * y[0]];
        let exact = (i * 50.0).exp();
        let mut prev_err = f64::INFINITY;
        for rtol in [1e-6, 1e-9, 1e-12] {
            let solver = Dop853::new(OdeOptions::with_rtol(rtol));
            let (ys, _) = solver
                .march(&f, 0.0, [Complex64::new(1.0, 0.0)], &[10.0], &[], |_, _| Ok(()))
                .unwrap();
            let err = (ys[0][0] - exact).norm();
            assert!(err < 200.0 * rtol, "rtol={rtol} err={err}");
            assert!(err < prev_err);
            prev_err = err;
        }
    }

    #[test]
    fn integrates_backwards_and_records_targets() {
        let f = |x: f64, _y: &[Complex64; 1]| [Complex64::new(3.0 * x * x, 0.0)];
        let solver = Dop853::default();
        let targets = [1.5, 1.0, 0.0, -1.0];
        let (ys, _) = solver
            .march(&f, 2.0, [Complex64::new(8.0, 0.0)], &targets, &[0.5], |_, _| Ok(()))
            .unwrap();
        for (t, y) in targets.iter().zip(&ys) {
            assert!((y[0].re - t.powi(3)).abs() < 1e-12, "x={t}");
        }
    }

    #[test]
    fn breakpoints_keep_discontinuous_rhs_exact() {
        // y' = sign(x - 0.3): exact only when a step ends on the jump.
        let f = |x: f64, _y: &[Complex64; 1]| [Complex64::new(if x < 0.3 { -1.0 } else { 1.0 }, 0.0)];
        let solver = Dop853::default();
        let (ys, _) = solver
            .march(&f, 0.0, [Complex64::new(0.0, 0.0)], &[1.0], &[0.3], |_, _| Ok(()))
            .unwrap();
        assert!((ys[0][0].re - 0.4).abs() < 1e-14);
    }

    #[test]
    fn guard_aborts_with_location() {
        let f = |_x: f64, y: &[Complex64; 1]| [y[0]];
        let solver = Dop853::default();
        let err = solver
            .march(&f, 0.0, [Complex64::new(1.0, 0.0)], &[5.0], &[], |_, y| {
                if y[0].re > 10.0 {
                    Err("too large".into())
                } else {
                    Ok(())
                }
            })
            .unwrap_err();
        match err {
            OdeError::Guard { x, .. } => assert!(x > 2.0 && x < 3.0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
