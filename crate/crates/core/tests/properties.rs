//! Randomised invariants of the forward problem, the Riccati fields and the half-plane
//! extensions.

use helmscat_core::halfplane::{outer_function, poisson_extend, BoundaryData, TailModel};
use helmscat_core::jost::{solve_m1, wronskian_residual};
use helmscat_core::oracle::{transfer_scattering, LayerStack};
use helmscat_core::profile::{ChiVariant, Profile, ProfileKind};
use helmscat_core::riccati::{solve_r, solve_w, solve_w_minus};
use helmscat_core::scatter::{field_grid, scattering_at};
use num_complex::Complex64;
use proptest::prelude::*;

fn bump() -> impl Strategy<Value = Profile> {
    (-0.6..1.5f64, -1.0..1.0f64, 0.3..2.0f64).prop_map(|(amplitude, center, width)| {
        Profile::from_kind(ProfileKind::Bump { amplitude, center, width }).unwrap()
    })
}

fn layers() -> impl Strategy<Value = Profile> {
    (1usize..4)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0.1..0.8f64, n + 1),
                prop::collection::vec(0.4..2.5f64, n + 1),
                -1.0..1.0f64,
            )
        })
        .prop_map(|(gaps, inner, start)| {
            let mut interfaces = vec![start];
            for g in &gaps {
                interfaces.push(interfaces[interfaces.len() - 1] + g);
            }
            let mut speeds = vec![1.0];
            speeds.extend(inner);
            speeds.push(1.0);
            Profile::from_kind(ProfileKind::Layers { interfaces, speeds }).unwrap()
        })
}

fn any_profile() -> impl Strategy<Value = Profile> {
    prop_oneof![bump(), layers()]
}

fn sym_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let pos: Vec<f64> = (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect();
    let mut ks: Vec<f64> = pos.iter().rev().map(|k| -k).collect();
    ks.extend(pos);
    ks
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn unitarity_and_symmetry(p in any_profile(), k in 0.01..30.0f64) {
        let s = scattering_at(&p, k).unwrap();
        let m = scattering_at(&p, -k).unwrap();
        prop_assert!(s.unitarity_residual < 1e-8);
        prop_assert!(s.diagnostics.reciprocity < 1e-8);
        prop_assert!(s.diagnostics.reflection_relation < 1e-8);
        prop_assert!((m.t - s.t.conj()).norm() < 1e-8);
        prop_assert!((m.r2 - s.r2.conj()).norm() < 1e-8);
    }

    #[test]
    fn layered_profiles_match_transfer_matrix(p in layers(), k in 0.01..30.0f64) {
        let exact = transfer_scattering(&LayerStack::from_profile(&p).unwrap(), Complex64::new(k, 0.0)).unwrap();
        let s = scattering_at(&p, k).unwrap();
        prop_assert!((s.t - exact.t).norm() < 1e-8);
        prop_assert!((s.r2 - exact.r2).norm() < 1e-8);
        prop_assert!((s.r1 - exact.r1).norm() < 1e-8);
    }

    #[test]
    fn riccati_fields_stay_in_range(p in any_profile(), k in 0.05..20.0f64) {
        let xs = field_grid(&p, 41);
        let kc = Complex64::new(k, 0.0);
        let r = solve_r(&p, kc, &xs).unwrap();
        prop_assert!(r.values.iter().all(|v| v.norm() < 1.0));
        let w = solve_w(&p, kc, &xs).unwrap();
        prop_assert!(w.values.iter().all(|v| v.re > 0.0));
        let wm = solve_w_minus(&p, kc, &xs).unwrap();
        prop_assert!(wm.values.iter().all(|v| v.re > 0.0));
        // Re (w + w₋)^{-1} > 0 pointwise.
        prop_assert!(w.values.iter().zip(&wm.values).all(|(a, b)| (1.0 / (a + b)).re > 0.0));
    }

    #[test]
    fn wronskian_is_constant(p in any_profile(), k in 0.05..20.0f64) {
        let m = solve_m1(&p, Complex64::new(k, 0.0), &field_grid(&p, 31)).unwrap();
        prop_assert!(wronskian_residual(&m) < 1e-9);
    }

    #[test]
    fn translation_multiplies_r2_by_phase(p in any_profile(), k in 0.05..10.0f64, a in -2.0..2.0f64) {
        let s0 = scattering_at(&p, k).unwrap();
        let s1 = scattering_at(&p.translated(a).unwrap(), k).unwrap();
        let phase = Complex64::new(0.0, 2.0 * k * a).exp();
        prop_assert!((s1.t - s0.t).norm() < 1e-8);
        prop_assert!((s1.r2 - s0.r2 * phase).norm() < 1e-8);
    }

    #[test]
    fn travel_time_coordinate_inverts(p in any_profile(), y in -3.0..3.0f64) {
        for v in [ChiVariant::FromLeft, ChiVariant::FromRight] {
            let x = p.chi_inv(y, v).unwrap();
            prop_assert!((p.chi(x, v) - y).abs() < 1e-10);
        }
    }

    #[test]
    fn q_is_twice_big_q_minus_square(p in any_profile(), x in -3.0..3.0f64) {
        let big_q = p.eval_big_q(x);
        prop_assert!((p.eval_q(x) - (2.0 * big_q - big_q * big_q)).abs() < 1e-14);
    }
}

fn boundary() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.05..2.0f64, -3.0..3.0f64, 0.2..3.0f64)
}

fn lorentz_data(amp: f64, centre: f64, width: f64) -> BoundaryData {
    let ks = sym_grid(1e-3, 1e3, 300);
    let vs = ks
        .iter()
        .map(|&k| amp / (1.0 + ((k - centre) / width).powi(2)))
        .collect();
    BoundaryData::new(ks, vs, TailModel::Zero).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn poisson_is_positive_and_bounded(
        (amp, centre, width) in boundary(),
        x in -20.0..20.0f64,
        y in 1e-3..20.0f64,
    ) {
        let b = lorentz_data(amp, centre, width);
        let v = poisson_extend(&b, Complex64::new(x, y)).unwrap();
        prop_assert!(v >= 0.0);
        prop_assert!(v <= amp * (1.0 + 1e-9));
    }

    #[test]
    fn poisson_is_linear(
        (a1, c1, w1) in boundary(),
        (a2, c2, w2) in boundary(),
        alpha in -3.0..3.0f64,
        x in -5.0..5.0f64,
        y in 0.01..5.0f64,
    ) {
        let b1 = lorentz_data(a1, c1, w1);
        let b2 = lorentz_data(a2, c2, w2);
        let sum = BoundaryData::new(
            b1.ks().to_vec(),
            b1.values().iter().zip(b2.values()).map(|(u, v)| alpha * u + v).collect(),
            TailModel::Zero,
        ).unwrap();
        let z = Complex64::new(x, y);
        let lhs = poisson_extend(&sum, z).unwrap();
        let rhs = alpha * poisson_extend(&b1, z).unwrap() + poisson_extend(&b2, z).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn outer_modulus_is_half_poisson(
        (amp, centre, width) in boundary(),
        x in -10.0..10.0f64,
        y in 1e-3..10.0f64,
    ) {
        let neg = lorentz_data(-amp, centre, width);
        let half = lorentz_data(-amp / 2.0, centre, width);
        let z = Complex64::new(x, y);
        let theta = outer_function(&neg, z).unwrap();
        let p = poisson_extend(&half, z).unwrap();
        prop_assert!((theta.norm().ln() - p).abs() < 1e-9);
    }
}
