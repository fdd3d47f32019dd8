//! Möbius transport between the upper half-plane and the unit disk.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::divisor::{Domain, MoebiusMap, SpherePoint, SymmetricDivisor};
use crate::error::{Error, Result};
use crate::quad_diff::{Factor, FactorKind, QuadDifferential};

/// The Cayley pair `w = (z − i)/(z + i)` and `z = i(1 + w)/(1 − w)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainMap {
    HalfPlaneToDisk,
    DiskToHalfPlane,
}

impl DomainMap {
    pub fn moebius(&self) -> MoebiusMap {
        match self {
            DomainMap::HalfPlaneToDisk => MoebiusMap::cayley(),
            DomainMap::DiskToHalfPlane => MoebiusMap::cayley().inverse(),
        }
    }

    pub fn source(&self) -> Domain {
        match self {
            DomainMap::HalfPlaneToDisk => Domain::HalfPlane,
            DomainMap::DiskToHalfPlane => Domain::Disk,
        }
    }

    pub fn target(&self) -> Domain {
        match self {
            DomainMap::HalfPlaneToDisk => Domain::Disk,
            DomainMap::DiskToHalfPlane => Domain::HalfPlane,
        }
    }

    pub fn inverse(&self) -> DomainMap {
        match self {
            DomainMap::HalfPlaneToDisk => DomainMap::DiskToHalfPlane,
            DomainMap::DiskToHalfPlane => DomainMap::HalfPlaneToDisk,
        }
    }

    pub fn from_domains(source: Domain, target: Domain) -> Option<DomainMap> {
        match (source, target) {
            (Domain::HalfPlane, Domain::Disk) => Some(DomainMap::HalfPlaneToDisk),
            (Domain::Disk, Domain::HalfPlane) => Some(DomainMap::DiskToHalfPlane),
            _ => None,
        }
    }
}

/// Image of a finite point; the map's pole is an error.
pub fn map_point(m: DomainMap, z: Complex64) -> Result<Complex64> {
    m.moebius().apply_finite(z)
}

/// Image of a point of the sphere (`∞ ↦ 1` and `−i ↦ ∞` for the forward map).
pub fn map_sphere_point(m: DomainMap, p: SpherePoint) -> SpherePoint {
    m.moebius().apply(p)
}

pub fn map_polyline(m: DomainMap, points: &[Complex64]) -> Result<Vec<Complex64>> {
    points.iter().map(|&z| map_point(m, z)).collect()
}

/// Carries a divisor to the other domain; charges are untouched.
pub fn map_divisor(m: DomainMap, divisor: &SymmetricDivisor) -> Result<SymmetricDivisor> {
    if divisor.domain != m.source() {
        return Err(Error::InvalidParameter(format!(
            "divisor lives in the {}, map starts in the {}",
            divisor.domain.name(),
            m.source().name()
        )));
    }
    divisor.pushforward(&m.moebius(), m.target())
}

/// Pushes `Q dz²` forward by a Möbius map into `target`:
/// `Q̃(w) = Q(z(w)) (dz/dw)²`. Orders travel with their points, the order at
/// ∞ moves to the preimage of ∞, and the phase is re-normalized on the image
/// boundary.
pub fn push_quadratic_differential(
    qd: &QuadDifferential,
    map: &MoebiusMap,
    target: Domain,
) -> Result<QuadDifferential> {
    let mut factors = Vec::with_capacity(qd.factors.len() + 1);
    for f in &qd.factors {
        if let SpherePoint::Finite(w) = map.apply(SpherePoint::Finite(f.point)) {
            factors.push(Factor { point: w, ..*f });
        }
    }
    let order_inf = qd.infinity_order();
    if order_inf != 0 {
        if let SpherePoint::Finite(w) = map.apply(SpherePoint::Infinity) {
            factors.push(Factor {
                point: w,
                order: order_inf,
                kind: FactorKind::Marked,
            });
        }
    }
    QuadDifferential::normalized(target, factors)
}

pub fn map_quadratic_differential(m: DomainMap, qd: &QuadDifferential) -> Result<QuadDifferential> {
    if qd.domain != m.source() {
        return Err(Error::InvalidParameter(format!(
            "differential lives in the {}, map starts in the {}",
            qd.domain.name(),
            m.source().name()
        )));
    }
    push_quadratic_differential(qd, &m.moebius(), m.target())
}

/// Boundary angle that the half-plane frame sends to ∞: the boundary marked
/// point of most negative charge, so that curves run towards ∞ as in the
/// chordal picture, or else the middle of the widest gap between boundary
/// points.
fn frame_angle(divisor: &SymmetricDivisor) -> f64 {
    let pole = divisor
        .marked
        .iter()
        .filter(|(p, c)| c.value() < 0.0 && Domain::Disk.on_boundary(p))
        .min_by(|a, b| a.1.value().total_cmp(&b.1.value()));
    if let Some((SpherePoint::Finite(w), _)) = pole {
        return w.arg();
    }
    let mut angles: Vec<f64> = divisor
        .growth
        .iter()
        .copied()
        .chain(divisor.marked.iter().map(|(p, _)| *p))
        .filter(|p| Domain::Disk.on_boundary(p))
        .filter_map(|p| p.finite())
        .map(|z| z.arg().rem_euclid(TAU))
        .collect();
    angles.sort_by(f64::total_cmp);
    match angles.len() {
        0 => 0.0,
        1 => angles[0] + TAU / 2.0,
        m => {
            let mut best = (angles[0] + TAU - angles[m - 1], 0.5 * (angles[m - 1] + angles[0] + TAU));
            for w in angles.windows(2) {
                if w[1] - w[0] > best.0 {
                    best = (w[1] - w[0], 0.5 * (w[0] + w[1]));
                }
            }
            best.1
        }
    }
}

/// A half-plane copy of `divisor` with every growth point finite, and the
/// map that produced it. Disk divisors are rotated so that the frame angle
/// goes to `1`, which the Cayley inverse sends to ∞.
pub fn half_plane_frame(divisor: &SymmetricDivisor) -> Result<(SymmetricDivisor, MoebiusMap)> {
    match divisor.domain {
        Domain::HalfPlane => Ok((divisor.clone(), MoebiusMap::identity())),
        Domain::Disk => {
            let map = DomainMap::DiskToHalfPlane
                .moebius()
                .compose(&MoebiusMap::rotation(-frame_angle(divisor)));
            let image = divisor.pushforward(&map, Domain::HalfPlane)?;
            Ok((image, map))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisor::Charge;
    use crate::quad_diff::line_angle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fig2() -> SymmetricDivisor {
        SymmetricDivisor::new(
            Domain::Disk,
            vec![Complex64::from_polar(1.0, PI / 4.0).into(), c(0.0, -1.0).into(), c(1.0, 0.0).into()],
            vec![
                (c(0.0, 0.0).into(), Charge::integer(-1)),
                (SpherePoint::Infinity, Charge::integer(-1)),
                (c(-1.0, 0.0).into(), Charge::integer(-3)),
            ],
        )
        .unwrap()
    }

    fn fig3() -> SymmetricDivisor {
        SymmetricDivisor::new(
            Domain::Disk,
            vec![c(0.0, -1.0).into(), Complex64::from_polar(1.0, PI / 3.0).into(), c(0.0, 1.0).into()],
            vec![
                (c(-1.0 / 3.0, 0.0).into(), Charge::integer(-1)),
                (c(-3.0, 0.0).into(), Charge::integer(-1)),
                (c(0.5, 0.0).into(), Charge::half_integer(-3)),
                (c(2.0, 0.0).into(), Charge::half_integer(-3)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn cayley_examples() {
        let m = DomainMap::HalfPlaneToDisk;
        assert!((map_point(m, c(0.0, 1.0)).unwrap() - c(0.0, 0.0)).norm() < 1e-15);
        assert!((map_point(m, c(0.0, 0.0)).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((map_point(m, c(1.0, 0.0)).unwrap() - c(0.0, -1.0)).norm() < 1e-15);
        assert!(matches!(map_point(m, c(0.0, -1.0)), Err(Error::Pole(_))));
        assert_eq!(map_sphere_point(m, SpherePoint::Infinity), SpherePoint::Finite(c(1.0, 0.0)));
        assert_eq!(map_sphere_point(m, c(0.0, -1.0).into()), SpherePoint::Infinity);
    }

    #[test]
    fn round_trip_on_grid() {
        let f = DomainMap::HalfPlaneToDisk;
        for i in 0..100 {
            for j in 0..100 {
                let z = c(-5.0 + 0.1 * i as f64 + 0.013, -5.0 + 0.1 * j as f64 + 0.017);
                let back = map_point(f.inverse(), map_point(f, z).unwrap()).unwrap();
                assert!((back - z).norm() <= 1e-12 * z.norm().max(1.0), "{z}");
            }
        }
    }

    #[test]
    fn conjugate_pair_becomes_inverse_pair() {
        let q = c(0.4, 1.7);
        let d = SymmetricDivisor::new(
            Domain::HalfPlane,
            vec![SpherePoint::real(0.0)],
            vec![(q.into(), Charge::integer(-1)), (q.conj().into(), Charge::integer(-1)), (SpherePoint::Infinity, Charge::integer(-1))],
        )
        .unwrap();
        let image = map_divisor(DomainMap::HalfPlaneToDisk, &d).unwrap();
        let w = image.marked[0].0.finite().unwrap();
        let w_bar = image.marked[1].0.finite().unwrap();
        assert!((w_bar - 1.0 / w.conj()).norm() < 1e-12);
        assert_eq!(image.domain, Domain::Disk);
        assert_eq!(image.total_charge(), d.total_charge());
    }

    #[test]
    fn fig3_to_half_plane_is_conjugation_closed() {
        let h = map_divisor(DomainMap::DiskToHalfPlane, &fig3()).unwrap();
        assert!(h.validate().is_admissible());
        assert_eq!(h.total_charge(), -2.0);
        for (p, _) in &h.marked {
            assert!(h.marked.iter().any(|(q, _)| q.approx_eq(&p.conj(), 1e-10)));
        }
        assert!(map_divisor(DomainMap::HalfPlaneToDisk, &fig3()).is_err());
    }

    #[test]
    fn direction_fields_correspond_under_push_forward() {
        let disk = QuadDifferential::build(&fig3()).unwrap();
        let m = DomainMap::DiskToHalfPlane;
        let half = map_quadratic_differential(m, &disk).unwrap();
        assert!(half.is_reflection_symmetric(1e-9));
        let mob = m.moebius();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut n = 0;
        while n < 200 {
            let z = Complex64::from_polar(rng.gen_range(0.0..0.98f64).sqrt(), rng.gen_range(0.0..TAU));
            if disk.nearest_singularity(z).unwrap().1 < 1e-3 {
                continue;
            }
            let u = disk.direction_field(z, None).unwrap();
            let w = mob.apply_finite(z).unwrap();
            let pushed = mob.derivative(z) * u;
            let v = half.direction_field(w, None).unwrap();
            assert!(line_angle(pushed / pushed.norm(), v) < 1e-8, "{z}");
            n += 1;
        }
    }

    #[test]
    fn fig2_differential_round_trips_with_infinity_order() {
        let disk = QuadDifferential::build(&fig2()).unwrap();
        assert_eq!(disk.infinity_order(), -2);
        let half = map_quadratic_differential(DomainMap::DiskToHalfPlane, &disk).unwrap();
        // Disk ∞ lands at −i, disk 1 (a growth point) at ∞.
        assert!(half.factors.iter().any(|f| (f.point - c(0.0, -1.0)).norm() < 1e-12 && f.order == -2));
        assert_eq!(half.infinity_order(), 2);
        let back = map_quadratic_differential(DomainMap::HalfPlaneToDisk, &half).unwrap();
        assert_eq!(back.infinity_order(), -2);
        assert_eq!(back.factors.len(), disk.factors.len());
        for f in &disk.factors {
            assert!(back
                .factors
                .iter()
                .any(|g| g.order == f.order && (g.point - f.point).norm() < 1e-10));
        }
        assert!(line_angle(back.phase, disk.phase) < 1e-10);
    }

    #[test]
    fn half_plane_frame_keeps_growth_finite() {
        let fig1 = SymmetricDivisor::new(
            Domain::Disk,
            vec![c(0.0, -1.0).into(), c(1.0, 0.0).into(), c(0.0, 1.0).into()],
            vec![
                (Complex64::from_polar(1.0, 2.0 * PI / 3.0).into(), Charge::integer(-1)),
                (c(-1.0, 0.0).into(), Charge::integer(-4)),
            ],
        )
        .unwrap();
        let (h, _) = half_plane_frame(&fig1).unwrap();
        let xs: Vec<f64> = h.growth.iter().map(|g| g.finite().unwrap().re).collect();
        assert!((xs[0] + 1.0).abs() < 1e-12 && xs[1].abs() < 1e-12 && (xs[2] - 1.0).abs() < 1e-12, "{xs:?}");
        assert!(h.marked.iter().any(|(p, c)| p.is_infinite() && c.value() == -4.0));
        for d in [fig1, fig2(), fig3()] {
            let (h, map) = half_plane_frame(&d).unwrap();
            assert_eq!(h.domain, Domain::HalfPlane);
            assert!(h.growth.iter().all(|g| g.finite().is_some()));
            assert_eq!(h.total_charge(), -2.0);
            assert!(map.determinant().norm() > 0.0);
        }
    }
}
