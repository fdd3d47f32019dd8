//! Seeded random divisors and Möbius maps for property checks.

use num_complex::Complex64;
use rand::Rng;

use crate::divisor::{Charge, Domain, MoebiusMap, SpherePoint, SymmetricDivisor};

const MIN_SEPARATION: f64 = 0.1;

fn separated(points: &[Complex64], z: Complex64) -> bool {
    points.iter().all(|p| (p - z).norm() >= MIN_SEPARATION)
}

/// A random normalized Möbius map `z ↦ (az + b)/(cz + d)`.
pub fn random_moebius<R: Rng>(rng: &mut R) -> MoebiusMap {
    loop {
        let mut coef = || Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let (a, b, c, d) = (coef(), coef(), coef(), coef());
        let det = a * d - b * c;
        if det.norm() < 0.1 {
            continue;
        }
        let s = det.sqrt();
        return MoebiusMap::new(a / s, b / s, c / s, d / s).expect("determinant is one");
    }
}

/// A random Möbius map whose pole stays at least `margin` (in `|cz + d|`)
/// away from every given point.
pub fn random_moebius_avoiding<R: Rng>(rng: &mut R, points: &[Complex64], margin: f64) -> MoebiusMap {
    loop {
        let m = random_moebius(rng);
        if points.iter().all(|&z| (m.c * z + m.d).norm() >= margin) {
            return m;
        }
    }
}

/// A neutral, conjugation-symmetric half-plane divisor with only finite
/// points: one to three growth points, up to two conjugate pairs with real
/// charges, and a real marked point absorbing the remaining charge.
pub fn random_half_plane_divisor<R: Rng>(rng: &mut R) -> SymmetricDivisor {
    loop {
        let mut taken: Vec<Complex64> = Vec::new();
        let mut fresh = |rng: &mut R, real: bool| -> Option<Complex64> {
            for _ in 0..100 {
                let z = if real {
                    Complex64::new(rng.gen_range(-3.0..3.0), 0.0)
                } else {
                    Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.2..3.0))
                };
                if separated(&taken, z) && separated(&taken, z.conj()) {
                    taken.push(z);
                    if !real {
                        taken.push(z.conj());
                    }
                    return Some(z);
                }
            }
            None
        };
        let n = rng.gen_range(1..=3);
        let growth: Option<Vec<SpherePoint>> = (0..n).map(|_| fresh(rng, true).map(SpherePoint::Finite)).collect();
        let Some(growth) = growth else { continue };
        let mut marked = Vec::new();
        let mut total = n as f64;
        for _ in 0..rng.gen_range(0..=2) {
            let Some(q) = fresh(rng, false) else { continue };
            let sigma = rng.gen_range(-1.5..1.0);
            marked.push((SpherePoint::Finite(q), Charge::real(sigma)));
            marked.push((SpherePoint::Finite(q.conj()), Charge::real(sigma)));
            total += 2.0 * sigma;
        }
        let Some(r) = fresh(rng, true) else { continue };
        marked.push((SpherePoint::Finite(r), Charge::real(-2.0 - total)));
        let d = SymmetricDivisor { domain: Domain::HalfPlane, growth, marked };
        if d.validate().is_admissible() {
            return d;
        }
    }
}
