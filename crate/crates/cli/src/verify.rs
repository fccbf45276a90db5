//! The consolidated invariant checklist behind `helmscat verify`.
//!
//! Every check compares one measured number against a limit. A check whose computation
//! fails is recorded as failed with the error text; the remaining checks still run. The
//! report contains no timings or thread counts, so it is a pure function of the profile,
//! the options and the seed.

use helmscat_core::jost::{
    bound_excess, imaginary_axis_margins, wronskian_residual, JostSolver,
};
use helmscat_core::oracle::{oracle_compare, LayerStack};
use helmscat_core::profile::{Profile, ProfileConfig};
use helmscat_core::recover::{uniqueness_harness, DEFAULT_EPS_MATCH};
use helmscat_core::riccati::{
    energy_identity, imaginary_axis_bounds, r_to_r2, sylvester_check, RiccatiSolver,
};
use helmscat_core::scatter::{field_grid, low_k_slope, KGridSpec, ScatterGrid, ScatterSolver};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog;
use crate::commands;
use crate::error::CliError;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">")]
    Above,
}

impl Relation {
    fn holds(self, measured: f64, limit: f64) -> bool {
        match self {
            Relation::AtMost => measured <= limit,
            Relation::AtLeast => measured >= limit,
            Relation::Below => measured < limit,
            Relation::Above => measured > limit,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Below => "<",
            Relation::Above => ">",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Not applicable to this profile; counts as passed.
    pub skipped: bool,
    pub measured: f64,
    pub relation: Relation,
    pub limit: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &str, measured: f64, relation: Relation, limit: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: relation.holds(measured, limit),
            skipped: false,
            measured,
            relation,
            limit,
            detail: detail.into(),
        }
    }

    fn at_most(name: &str, measured: f64, limit: f64, detail: impl Into<String>) -> Self {
        Self::new(name, measured, Relation::AtMost, limit, detail)
    }

    fn at_least(name: &str, measured: f64, limit: f64, detail: impl Into<String>) -> Self {
        Self::new(name, measured, Relation::AtLeast, limit, detail)
    }

    fn skipped(name: &str, reason: &str) -> Self {
        Self {
            passed: true,
            skipped: true,
            ..Self::at_most(name, 0.0, 0.0, reason)
        }
    }

    fn errored(name: &str, e: &CliError) -> Self {
        Self {
            passed: false,
            ..Self::at_most(name, f64::NAN, 0.0, format!("error: {e}"))
        }
    }

    /// One human-readable line.
    pub fn line(&self) -> String {
        let status = match (self.skipped, self.passed) {
            (true, _) => "SKIP",
            (_, true) => "PASS",
            _ => "FAIL",
        };
        let rel = self.relation.symbol();
        if self.skipped {
            format!("{status} {:<28} {}", self.name, self.detail)
        } else {
            format!(
                "{status} {:<28} {:.6e} {rel} {:.3e}  {}",
                self.name, self.measured, self.limit, self.detail
            )
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub kgrid: KGridSpec,
    /// Real wavenumbers for the field-level checks.
    pub spot_ks: Vec<f64>,
    /// Imaginary-axis points `k = iκ`.
    pub kappas: Vec<f64>,
    /// `κ` range and count for the bound on `|T(iκ)e^{−κ∫Q}|`.
    pub t_upper_kappas: (f64, f64, usize),
    /// Reflection samples fed to the recovery chain. Profiles with jumps need both a wide
    /// range (their `|R₂|` does not decay) and enough points per oscillation of `|R₂|`.
    pub recovery_grid: KGridSpec,
    /// Field samples across the padded support.
    pub x_points: usize,
    pub seed: u64,
    /// Random partner profiles for the `w` stability inequality.
    pub stability_pairs: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            kgrid: KGridSpec::default(),
            spot_ks: vec![0.5, 1.0, 5.0, 20.0],
            kappas: vec![0.1, 1.0, 10.0, 100.0],
            t_upper_kappas: (0.1, 100.0, 25),
            recovery_grid: KGridSpec::SymmetricLog {
                lo: 1e-3,
                hi: 200.0,
                n: 800,
            },
            x_points: 201,
            seed: catalog::DEFAULT_SEED,
            stability_pairs: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySettings {
    pub options: VerifyOptions,
    pub ode_tol: f64,
    pub panel_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub profile: ProfileConfig,
    pub settings: VerifySettings,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub failed: Vec<String>,
}

fn symmetric_closure(ks: &[f64]) -> Vec<f64> {
    let mut pos: Vec<f64> = ks.iter().map(|k| k.abs()).filter(|&k| k > 0.0).collect();
    pos.sort_by(f64::total_cmp);
    pos.dedup();
    pos.iter().rev().map(|k| -k).chain(pos.iter().copied()).collect()
}

fn max_of(vals: impl IntoIterator<Item = f64>) -> f64 {
    vals.into_iter().fold(0.0, f64::max)
}

/// Evaluates `f` at each spot wavenumber in parallel, in grid order.
fn per_k<T: Send>(
    ks: &[f64],
    f: impl Fn(f64) -> Result<T, CliError> + Sync + Send,
) -> Result<Vec<T>, CliError> {
    ks.par_iter().map(|&k| f(k)).collect()
}

type CheckGroup<'a> = Box<dyn Fn() -> Result<Vec<Check>, CliError> + 'a>;

struct Ctx<'a> {
    p: &'a Profile,
    opts: &'a VerifyOptions,
    solver: &'a ScatterSolver,
    riccati: RiccatiSolver,
    jost: JostSolver,
    xs: Vec<f64>,
}

fn grid_checks(ctx: &Ctx, grid: &ScatterGrid) -> Vec<Check> {
    let n = grid.ks.len();
    let mut conj = 0.0f64;
    for i in n / 2..n {
        let (a, b) = (&grid.points[i], &grid.points[n - 1 - i]);
        conj = conj
            .max((b.t - a.t.conj()).norm())
            .max((b.r1 - a.r1.conj()).norm())
            .max((b.r2 - a.r2.conj()).norm());
    }
    let recip = max_of(grid.points.iter().map(|s| s.diagnostics.reciprocity.max(s.diagnostics.reflection_relation)));
    let paths = max_of(grid.points.iter().map(|s| s.diagnostics.path_disagreement));
    let mut out = vec![
        Check::at_most("unitarity", grid.max_unitarity_residual(), 1e-8, "max ||T|^2 + |R|^2 - 1| over the k-grid"),
        Check::at_most("conjugate_symmetry", conj, 1e-8, "max |S(-k) - conj S(k)| for T, R1, R2"),
        Check::at_most("reciprocity", recip, 1e-8, "T1 = T and R1 T(-k) + R2(-k) T(k) = 0"),
        Check::at_most("path_agreement", paths, 1e-7, "integral vs Wronskian path for T and R2"),
    ];
    let int_q = ctx.p.functionals().int_q;
    out.push(match low_k_slope(grid) {
        Ok(slope) => {
            let expected = -0.5 * I * int_q;
            let err = (slope.value - expected).norm();
            let measured = if int_q != 0.0 { err / expected.norm() } else { err };
            Check::at_most("low_k_law", measured, 1e-3, "lim R2(k)/k vs (1/2i) int q, relative")
        }
        Err(e) => Check::errored("low_k_law", &e.into()),
    });
    out
}

fn spot_checks(ctx: &Ctx) -> Result<Vec<Check>, CliError> {
    let (p, xs) = (ctx.p, &ctx.xs[..]);
    struct Spot {
        wronskian: f64,
        bounds: f64,
        max_r: f64,
        min_re_w: f64,
        min_re_inv: f64,
        bilinear: f64,
        energy: f64,
        two_path: f64,
        rho: Option<(f64, f64)>,
    }
    let spots = per_k(&ctx.opts.spot_ks, |k| {
        let kc = Complex64::new(k, 0.0);
        let m1 = ctx.jost.solve_m1(p, kc, xs)?;
        let m2 = ctx.jost.solve_m2(p, kc, xs)?;
        let r = ctx.riccati.solve_r(p, kc, xs)?;
        let w = ctx.riccati.solve_w(p, kc, xs)?;
        let wm = ctx.riccati.solve_w_minus(p, kc, xs)?;
        let s = ctx.solver.scattering_at(p, k)?;
        let energy = energy_identity(&r);
        let r2 = r_to_r2(&r);
        let dr2 = (r2 - s.r2).norm();
        let rho = if p.is_smooth() {
            let f = ctx.riccati.rho_field(p, k, xs)?;
            let c = sylvester_check(p, &f);
            Some((c.max_rho, c.bound))
        } else {
            None
        };
        Ok(Spot {
            wronskian: wronskian_residual(&m1).max(wronskian_residual(&m2)),
            bounds: bound_excess(p, &m1).max(bound_excess(p, &m2)),
            max_r: max_of(r.values.iter().map(|v| v.norm())),
            min_re_w: w.values.iter().chain(&wm.values).map(|v| v.re).fold(f64::INFINITY, f64::min),
            min_re_inv: w
                .values
                .iter()
                .zip(&wm.values)
                .map(|(a, b)| (1.0 / (a + b)).re)
                .fold(f64::INFINITY, f64::min),
            bilinear: ctx.solver.bilinear_identity_residual(p, k, xs)?,
            energy: energy.max_residual.max(energy.left_edge_residual),
            two_path: if dr2 == 0.0 { 0.0 } else { dr2 / s.r2.norm() },
            rho,
        })
    })?;
    let min = |f: fn(&Spot) -> f64| spots.iter().map(f).fold(f64::INFINITY, f64::min);
    let max = |f: fn(&Spot) -> f64| spots.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let mut out = vec![
        Check::at_most("wronskian", max(|s| s.wronskian), 1e-8, "relative drift of [u, conj u] for m1 and m2"),
        Check::at_most("jost_bounds", max(|s| s.bounds), 1e-12, "excess over the a priori bounds on m - 1 and m'"),
        Check::new("riccati_r_bound", max(|s| s.max_r), Relation::Below, 1.0, "max |r|"),
        Check::new("riccati_w_positive", min(|s| s.min_re_w), Relation::Above, 0.0, "min Re w and Re w_minus"),
        Check::new("riccati_sum_positive", min(|s| s.min_re_inv), Relation::Above, 0.0, "min Re 1/(w + w_minus)"),
        Check::at_most("bilinear_identity", max(|s| s.bilinear), 1e-8, "2 Re(T m1 m2) = |T m1|^2 + |T m2|^2"),
        Check::at_most("energy_identity", max(|s| s.energy), 1e-8, "1 - |r|^2 = exp(k Im int q r), pointwise and at the left edge"),
        Check::at_most("two_path_r2", max(|s| s.two_path), 1e-6, "R2 from the reflection field vs the forward solve, relative"),
    ];
    out.push(if p.is_smooth() {
        let worst = spots
            .iter()
            .filter_map(|s| s.rho)
            .map(|(m, b)| m - b)
            .fold(f64::NEG_INFINITY, f64::max);
        let bound = spots[0].rho.map(|(_, b)| b).unwrap_or(0.0);
        Check::at_most(
            "sylvester_bound",
            worst,
            1e-9,
            format!("max |rho| minus the bound 1 - exp(-int |c'/c|) = {bound:.6e}"),
        )
    } else {
        Check::skipped("sylvester_bound", "profile has jumps")
    });
    Ok(out)
}

fn imaginary_axis_checks(ctx: &Ctx) -> Result<Vec<Check>, CliError> {
    let (p, xs) = (ctx.p, &ctx.xs[..]);
    let rows = per_k(&ctx.opts.kappas, |kappa| {
        let k = Complex64::new(0.0, kappa);
        let w = ctx.riccati.solve_w(p, k, xs)?;
        let b = imaginary_axis_bounds(p, &w);
        let m1 = ctx.jost.solve_m1(p, k, xs)?;
        let m = imaginary_axis_margins(p, &m1);
        Ok(((b.lower - b.min_w).max(b.max_w - b.upper), m.min_scaled_lower))
    })?;
    let (lo, hi, n) = ctx.opts.t_upper_kappas;
    let ks: Vec<f64> = (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1).max(1) as f64))
        .collect();
    let int_big_q = p.functionals().int_big_q;
    let t_upper = per_k(&ks, |kappa| {
        let t = ctx.solver.transmission_upper(p, Complex64::new(0.0, kappa))?;
        Ok(t.norm() * (-kappa * int_big_q).exp())
    })?;
    Ok(vec![
        Check::at_most(
            "imaginary_axis_w_bounds",
            rows.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max),
            1e-9,
            "2/(2 + cM^2 gamma0) <= w(x, i kappa) <= 1 + gamma0/2, worst violation",
        ),
        Check::at_least(
            "imaginary_axis_lower_bound",
            rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min),
            1.0 - 1e-8,
            "min (2 kappa m1 - m1') exp(kappa int_x Q) / (2 kappa)",
        ),
        Check::at_most(
            "transmission_upper_bound",
            max_of(t_upper),
            1.0 + 1e-9,
            "max |T(i kappa) exp(-kappa int Q)|",
        ),
    ])
}

fn stability_check(ctx: &Ctx) -> Result<Check, CliError> {
    let mut rng = catalog::rng(ctx.opts.seed);
    let partners: Vec<Profile> = (0..ctx.opts.stability_pairs)
        .map(|_| catalog::random_profile(&mut rng))
        .collect();
    let ratios = partners
        .par_iter()
        .map(|other| {
            let c = ctx.riccati.w_stability_check(ctx.p, other, 1.0)?;
            Ok(if c.lhs == 0.0 { 0.0 } else { c.lhs / c.rhs })
        })
        .collect::<Result<Vec<f64>, CliError>>()?;
    Ok(Check::at_most(
        "w_stability",
        max_of(ratios),
        1.0 + 1e-6,
        "||w1 - w2||_1 alpha / ||q1 - q2||_1 at kappa = 1 against random partners",
    ))
}

fn identity_check(ctx: &Ctx) -> Result<Check, CliError> {
    let shifted = ctx.p.translated(0.37).map_err(|e| CliError::schema("profile", e))?;
    let h = uniqueness_harness(ctx.p, &shifted, &[0.5, 1.0, 5.0], DEFAULT_EPS_MATCH, ctx.solver)?;
    Ok(Check::at_most(
        "travel_time_identities",
        h.relation_residual.max(h.bilinear_residual),
        1e-8,
        "T M1 = R2 e^{-2iky} M2 + conj M2 and 2 Re(T M1 M2) = |T M1|^2 + |T M2|^2",
    ))
}

fn oracle_check(ctx: &Ctx, ks: &[f64]) -> Result<Check, CliError> {
    if LayerStack::from_profile(ctx.p).is_err() {
        return Ok(Check::skipped("oracle_agreement", "profile is not piecewise constant"));
    }
    let d = oracle_compare(ctx.p, ks, ctx.solver)?;
    Ok(Check::at_most("oracle_agreement", d.max(), 1e-8, "max |dT|, |dR1|, |dR2| against the transfer matrix"))
}

fn recovery_checks(ctx: &Ctx) -> Result<Vec<Check>, CliError> {
    let ks = ctx.opts.recovery_grid.values()?;
    let grid = ctx.solver.scattering_grid(ctx.p, &ks)?;
    let t = grid.t();
    let truth = commands::truth(ctx.p, &grid.ks, Some(&t), ctx.solver)?;
    let report = commands::recover(&grid.ks, &grid.r2(), Some(&truth))?;
    let cmp = |q: &str| {
        report
            .comparisons
            .iter()
            .find(|c| c.quantity == q)
            .map(|c| c.rel_error)
            .unwrap_or(f64::NAN)
    };
    let (lo, hi) = commands::T_WINDOW;
    let dropped = report.dropped.iter().filter(|k| k.abs() >= lo && k.abs() <= hi).count();
    let t_sup = report.comparisons.last().map(|c| c.abs_error).unwrap_or(f64::NAN);
    let mut t_check = Check::at_most("recovery_t_sup", t_sup, 1e-2, format!("sup |T_rec - T| on {lo} <= |k| <= {hi}"));
    if dropped > 0 {
        t_check.passed = false;
        t_check.detail = format!("{dropped} wavenumbers in the window could not be reconstructed");
    }
    Ok(vec![
        Check::at_most("recovery_int_q", cmp("int_q"), 1e-3, "relative error of int q from R2 alone"),
        Check::at_most("recovery_int_Q2", cmp("int_Q2"), 2e-2, "relative error of int Q^2 from R2 alone"),
        Check::at_most("recovery_int_Q", cmp("int_Q"), 2e-2, "relative error of int Q from R2 alone"),
        t_check,
    ])
}

/// Runs every check on `p`.
pub fn run_verify(p: &Profile, opts: &VerifyOptions, solver: &ScatterSolver) -> Result<VerifyReport, CliError> {
    let rtol = solver.jost.options.rtol;
    let ctx = Ctx {
        p,
        opts,
        solver,
        // `r` ends at `R₂` after cancelling from interior values up to ~10⁶ times larger
        // (smooth profiles at large k), so it is integrated two orders tighter.
        riccati: RiccatiSolver::new((rtol * 1e-2).max(1e-15)),
        jost: JostSolver::new(rtol),
        xs: field_grid(p, opts.x_points),
    };
    let ks = symmetric_closure(&opts.kgrid.values()?);
    let mut checks = Vec::new();
    match solver.scattering_grid(p, &ks) {
        Ok(grid) => checks.extend(grid_checks(&ctx, &grid)),
        Err(e) => checks.push(Check::errored("forward_grid", &e.into())),
    }
    let groups: [(&str, CheckGroup); 6] = [
        ("field_checks", Box::new(|| spot_checks(&ctx))),
        ("imaginary_axis", Box::new(|| imaginary_axis_checks(&ctx))),
        ("w_stability", Box::new(|| Ok(vec![stability_check(&ctx)?]))),
        ("travel_time_identities", Box::new(|| Ok(vec![identity_check(&ctx)?]))),
        ("oracle_agreement", Box::new(|| Ok(vec![oracle_check(&ctx, &ks)?]))),
        ("recovery", Box::new(|| recovery_checks(&ctx))),
    ];
    for (name, run) in groups.iter() {
        match run() {
            Ok(c) => checks.extend(c),
            Err(e) => checks.push(Check::errored(name, &e)),
        }
    }
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    Ok(VerifyReport {
        profile: p.config().clone(),
        settings: VerifySettings {
            options: opts.clone(),
            ode_tol: rtol,
            panel_scale: solver.panel_scale,
        },
        passed: failed.is_empty(),
        failed,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> VerifyOptions {
        VerifyOptions {
            kgrid: KGridSpec::SymmetricLog { lo: 1e-3, hi: 20.0, n: 60 },
            recovery_grid: KGridSpec::SymmetricLog { lo: 1e-3, hi: 50.0, n: 200 },
            stability_pairs: 1,
            ..VerifyOptions::default()
        }
    }

    #[test]
    fn constant_profile_has_zero_residuals() {
        let r = run_verify(&Profile::constant(), &quick(), &ScatterSolver::default()).unwrap();
        assert!(r.passed, "{:?}", r.failed);
        for c in &r.checks {
            if c.relation == Relation::AtMost && !c.skipped && c.limit < 0.5 {
                assert_eq!(c.measured, 0.0, "{}", c.name);
            }
        }
    }

    #[test]
    fn closure_is_symmetric() {
        assert_eq!(symmetric_closure(&[2.0, -1.0, 1.0, 0.0]), vec![-2.0, -1.0, 1.0, 2.0]);
    }

    #[test]
    fn check_lines_name_the_check() {
        let c = Check::at_most("unitarity", 2e-9, 1e-8, "x");
        assert!(c.passed && c.line().starts_with("PASS unitarity"));
        let c = Check::at_least("lower", 0.5, 1.0, "y");
        assert!(!c.passed && c.line().starts_with("FAIL lower"));
    }
}
