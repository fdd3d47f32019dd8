use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sle0::config::{parse_config, preset, to_toml};
use sle0::conformal::{map_divisor, map_point, DomainMap};
use sle0::divisor::{dlog_z, Charge, Domain, SpherePoint, SymmetricDivisor};
use sle0::quad_diff::QuadDifferential;
use sle0::sample::{random_half_plane_divisor, random_moebius_avoiding};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Half-integer divisors in ℍ: real growth points, conjugate pairs of marked
/// points, and a charge at ∞ restoring neutrality.
fn half_integer_divisor() -> impl Strategy<Value = SymmetricDivisor> {
    let growth = proptest::collection::btree_set(-20i32..20, 1..=3);
    let pair = (-15i32..15, 2i32..20, prop_oneof![Just(-3i64), Just(-2), Just(-1), Just(1), Just(2)]);
    (growth, proptest::collection::vec(pair, 0..=2)).prop_filter_map("marked points coincide", |(g, pairs)| {
        let growth: Vec<SpherePoint> = g.iter().map(|&k| SpherePoint::real(k as f64 * 0.15)).collect();
        let mut marked = Vec::new();
        let mut twice_total = 2 * growth.len() as i64;
        for (i, (x, y, twice)) in pairs.iter().enumerate() {
            let z = Complex64::new(*x as f64 * 0.15, *y as f64 * 0.15);
            if pairs[..i].iter().any(|(a, b, _)| (a, b) == (x, y)) {
                return None;
            }
            marked.push((z.into(), Charge::half_integer(*twice)));
            marked.push((z.conj().into(), Charge::half_integer(*twice)));
            twice_total += 2 * twice;
        }
        marked.push((SpherePoint::Infinity, Charge::half_integer(-4 - twice_total)));
        SymmetricDivisor::new(Domain::HalfPlane, growth, marked).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn correlation_is_moebius_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = random_half_plane_divisor(&mut r).to_sphere();
        let finite: Vec<Complex64> = d.points.iter().filter_map(|(p, _)| p.finite()).collect();
        let pre = loop {
            let m = random_moebius_avoiding(&mut r, &finite, 0.05);
            if m.c.norm() > 0.05 {
                break m;
            }
        };
        let base = d.pushforward(&pre).unwrap();
        let pts: Vec<Complex64> = base.points.iter().filter_map(|(p, _)| p.finite()).collect();
        let m = random_moebius_avoiding(&mut r, &pts, 0.05);
        prop_assert!(base.invariance_defect(&m).unwrap() < 1e-9);
    }

    #[test]
    fn cayley_round_trip(x in -50.0f64..50.0, y in 1e-3f64..50.0) {
        let z = Complex64::new(x, y);
        let w = map_point(DomainMap::HalfPlaneToDisk, z).unwrap();
        prop_assert!(w.norm() < 1.0);
        let back = map_point(DomainMap::DiskToHalfPlane, w).unwrap();
        prop_assert!((back - z).norm() <= 1e-9 * z.norm().max(1.0));
    }

    #[test]
    fn direction_squares_into_positive_q(d in half_integer_divisor(), x in -3.0f64..3.0, y in 0.05f64..3.0) {
        let qd = QuadDifferential::build(&d).unwrap();
        let z = Complex64::new(x, y);
        prop_assume!(qd.nearest_singularity(z).is_none_or(|(_, dist)| dist > 1e-2));
        let u = qd.direction_field(z, None).unwrap();
        let residual = (qd.arg_q(z) + 2.0 * u.arg()).rem_euclid(2.0 * PI);
        prop_assert!(residual.min(2.0 * PI - residual) < 1e-8);
        prop_assert!((u.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_is_a_trajectory(d in half_integer_divisor(), x in -3.0f64..3.0) {
        let qd = QuadDifferential::build(&d).unwrap();
        let z = Complex64::new(x, 1e-9);
        prop_assume!(qd.nearest_singularity(z).is_none_or(|(_, dist)| dist > 1e-2));
        let u = qd.direction_field(z, None).unwrap();
        prop_assert!(u.im.abs() < 1e-6, "boundary direction {u}");
    }

    #[test]
    fn differential_is_reflection_symmetric(d in half_integer_divisor()) {
        prop_assert!(QuadDifferential::build(&d).unwrap().is_reflection_symmetric(1e-12));
        let disk = map_divisor(DomainMap::HalfPlaneToDisk, &d).unwrap();
        prop_assert!(QuadDifferential::build(&disk).unwrap().is_reflection_symmetric(1e-9));
    }

    #[test]
    fn disk_round_trip_preserves_divisor(seed in any::<u64>()) {
        let d = random_half_plane_divisor(&mut rng(seed));
        let disk = map_divisor(DomainMap::HalfPlaneToDisk, &d).unwrap();
        prop_assert_eq!(disk.domain, Domain::Disk);
        let back = map_divisor(DomainMap::DiskToHalfPlane, &disk).unwrap();
        for (a, b) in d.growth.iter().zip(&back.growth) {
            prop_assert!(a.approx_eq(b, 1e-9));
        }
        for ((p, s), (q, t)) in d.marked.iter().zip(&back.marked) {
            prop_assert!(p.approx_eq(q, 1e-9));
            prop_assert_eq!(s, t);
        }
    }

    #[test]
    fn scene_file_round_trip(seed in any::<u32>()) {
        let mut scene = preset("fig1").unwrap();
        scene.divisor = random_half_plane_divisor(&mut rng(seed.into()));
        scene.seed = seed;
        scene.output.field_svg = false;
        scene.output.trajectories_csv = false;
        scene.output.analysis_report = false;
        scene.output.motion_report = true;
        let text = to_toml(&scene);
        prop_assert_eq!(parse_config(&text).unwrap(), scene);
    }

    #[test]
    fn translation_leaves_derivatives_unchanged(seed in any::<u64>(), shift in -2.0f64..2.0) {
        // All marked points of a sampled divisor are finite except possibly ∞,
        // which translation fixes.
        let d = random_half_plane_divisor(&mut rng(seed));
        let x: Vec<f64> = d.growth.iter().map(|g| g.finite().unwrap().re).collect();
        let moved: Vec<f64> = x.iter().map(|v| v + shift).collect();
        let marked: Vec<_> = d
            .marked
            .iter()
            .map(|(p, s)| (p.finite().map_or(*p, |z| (z + shift).into()), *s))
            .collect();
        for j in 0..x.len() {
            let a = dlog_z(&x, &d.marked, j).unwrap();
            let b = dlog_z(&moved, &marked, j).unwrap();
            prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0));
        }
    }
}
