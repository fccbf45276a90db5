//! Named test profiles and seeded random ones.

use helmscat_core::profile::{Profile, ProfileConfig, ProfileKind};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed used when `HELMSCAT_SEED` is unset.
pub const DEFAULT_SEED: u64 = 0x5eed_2b1c;

/// `HELMSCAT_SEED` if set to an integer, else [`DEFAULT_SEED`].
pub fn seed_from_env() -> u64 {
    std::env::var("HELMSCAT_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn build(kind: ProfileKind) -> Profile {
    Profile::from_kind(kind).expect("catalog profiles are valid")
}

pub fn slab_config() -> ProfileConfig {
    ProfileKind::Slab {
        c_s: 2.0,
        x_l: 0.0,
        x_r: 1.0,
    }
    .into()
}

pub fn bump_config() -> ProfileConfig {
    ProfileKind::Bump {
        amplitude: 0.5,
        center: 0.0,
        width: 1.0,
    }
    .into()
}

pub fn three_layer_config() -> ProfileConfig {
    ProfileKind::Layers {
        interfaces: vec![0.0, 0.3, 0.7, 1.2],
        speeds: vec![1.0, 1.5, 0.6, 2.2, 1.0],
    }
    .into()
}

pub fn slab() -> Profile {
    Profile::new(slab_config()).expect("valid")
}

pub fn bump() -> Profile {
    Profile::new(bump_config()).expect("valid")
}

pub fn three_layer() -> Profile {
    Profile::new(three_layer_config()).expect("valid")
}

/// Every profile the invariant suites run on.
pub fn standard_profiles() -> Vec<(&'static str, Profile)> {
    let xs: Vec<f64> = (0..41).map(|i| -1.0 + 2.5 * i as f64 / 40.0).collect();
    let cs = xs
        .iter()
        .map(|&x: &f64| {
            let t = (x - 0.25) / 1.25;
            1.0 - 0.3 * (1.0 - t * t).max(0.0).powi(2)
        })
        .collect();
    vec![
        ("constant", Profile::constant()),
        ("slab", slab()),
        ("bump", bump()),
        ("three_layer", three_layer()),
        (
            "gaussian",
            build(ProfileKind::Gaussian {
                amplitude: 0.4,
                center: 0.2,
                width: 0.5,
            }),
        ),
        (
            "piecewise_linear",
            build(ProfileKind::PiecewiseLinear {
                knots: vec![[-0.5, 1.0], [0.0, 1.6], [0.4, 0.8], [1.0, 1.0]],
            }),
        ),
        ("samples", build(ProfileKind::Samples { xs, cs })),
    ]
}

/// A random smooth bump, Gaussian or layered profile of moderate contrast.
pub fn random_profile<R: Rng>(rng: &mut R) -> Profile {
    match rng.gen_range(0..3) {
        0 => build(ProfileKind::Bump {
            amplitude: rng.gen_range(-0.5..1.2),
            center: rng.gen_range(-1.0..1.0),
            width: rng.gen_range(0.3..1.5),
        }),
        1 => build(ProfileKind::Gaussian {
            amplitude: rng.gen_range(-0.4..1.0),
            center: rng.gen_range(-1.0..1.0),
            width: rng.gen_range(0.2..0.8),
        }),
        _ => {
            let n = rng.gen_range(1..4);
            let mut interfaces = vec![rng.gen_range(-1.0..0.0)];
            for _ in 0..n {
                let last = interfaces[interfaces.len() - 1];
                interfaces.push(last + rng.gen_range(0.1..0.7));
            }
            let mut speeds = vec![1.0];
            speeds.extend((0..n).map(|_| rng.gen_range(0.5..2.2)));
            speeds.push(1.0);
            build(ProfileKind::Layers { interfaces, speeds })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_profiles_build() {
        let names: Vec<_> = standard_profiles().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names.len(), 7);
        assert!(names.contains(&"three_layer"));
    }

    #[test]
    fn random_profiles_are_reproducible() {
        let a: Vec<_> = (0..5).map({
            let mut r = rng(7);
            move |_| random_profile(&mut r).config().clone()
        }).collect();
        let mut r = rng(7);
        let b: Vec<_> = (0..5).map(|_| random_profile(&mut r).config().clone()).collect();
        assert_eq!(a, b);
    }
}
