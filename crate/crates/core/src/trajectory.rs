//! Horizontal trajectories of a quadratic differential, traced as streamlines
//! of the unit line field, and their terminal behaviour.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::divisor::Domain;
use crate::error::{Error, Result};
use crate::quad_diff::{FactorKind, QuadDifferential};

/// Tolerance on the launch direction at a growth point.
pub const LAUNCH_TOL: f64 = 1e-3;
/// Winding about a point closer than this to the polyline is refused.
pub const WINDING_TOL: f64 = 1e-9;

const MAX_TURN: f64 = 0.2;
const CALM_TURN: f64 = 0.05;
const PROXIMITY_FRACTION: f64 = 0.25;
const MIN_STEP: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceParams {
    pub step: f64,
    pub max_arc_length: f64,
    pub capture_radius: f64,
    pub domain_margin: f64,
    pub adaptive: bool,
}

impl Default for TraceParams {
    fn default() -> Self {
        TraceParams {
            step: 1e-3,
            max_arc_length: 50.0,
            capture_radius: 1e-4,
            domain_margin: 1e-6,
            adaptive: true,
        }
    }
}

impl TraceParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidParameter(format!("step must be positive, got {}", self.step)));
        }
        if !(self.max_arc_length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "max_arc_length must be positive, got {}",
                self.max_arc_length
            )));
        }
        if !(self.domain_margin >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "domain_margin must be non-negative, got {}",
                self.domain_margin
            )));
        }
        if !(self.capture_radius > self.domain_margin) {
            return Err(Error::InvalidParameter(format!(
                "capture_radius {} must exceed domain_margin {}",
                self.capture_radius, self.domain_margin
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Terminal {
    /// Entered the capture disk of factor `index` of the differential.
    ReachedSingularity { point: Complex64, index: usize, order: i32 },
    LeftDomain,
    ExhaustedArcLength,
}

impl Terminal {
    pub fn label(&self) -> &'static str {
        match self {
            Terminal::ReachedSingularity { .. } => "reached_singularity",
            Terminal::LeftDomain => "left_domain",
            Terminal::ExhaustedArcLength => "exhausted_arc_length",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub start: Complex64,
    pub points: Vec<Complex64>,
    pub arc_lengths: Vec<f64>,
    pub terminal: Terminal,
    /// Accumulated signed angle about every finite marked point.
    pub winding: Vec<(Complex64, f64)>,
}

impl Trajectory {
    pub fn end(&self) -> Complex64 {
        *self.points.last().expect("a trajectory has at least one point")
    }

    pub fn length(&self) -> f64 {
        self.arc_lengths.last().copied().unwrap_or(0.0)
    }

    pub fn winding_about(&self, center: Complex64) -> Option<f64> {
        self.winding
            .iter()
            .find(|(p, _)| (p - center).norm() < 1e-12)
            .map(|(_, w)| *w)
    }

    /// Unit direction of approach into the terminal singularity: the chord
    /// from the last sample to the singular point.
    pub fn terminal_direction(&self) -> Option<Complex64> {
        match self.terminal {
            Terminal::ReachedSingularity { point, .. } => {
                let d = point - self.end();
                (d.norm() > 0.0).then(|| d / d.norm())
            }
            _ => None,
        }
    }
}

fn segment_distance(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (c - a).norm();
    }
    let s = (((c - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (a + ab * s - c).norm()
}

fn subtended(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    ((b - c) / (a - c)).arg()
}

/// Signed angle swept about `center` by each segment.
pub fn winding_increments(points: &[Complex64], center: Complex64) -> Result<Vec<f64>> {
    points
        .windows(2)
        .map(|w| {
            if segment_distance(w[0], w[1], center) < WINDING_TOL {
                Err(Error::IllDefinedWinding(center))
            } else {
                Ok(subtended(w[0], w[1], center))
            }
        })
        .collect()
}

/// Total signed angle swept by the polyline about `center`.
pub fn winding_angle(traj: &Trajectory, center: Complex64) -> Result<f64> {
    Ok(winding_increments(&traj.points, center)?.iter().sum())
}

fn outside(domain: Domain, z: Complex64, margin: f64) -> bool {
    match domain {
        Domain::Disk => z.norm() > 1.0 + margin,
        Domain::HalfPlane => z.im < -margin,
    }
}

struct Tracer<'a> {
    qd: &'a QuadDifferential,
    params: TraceParams,
    /// Launch zero, ignored for capture until the path is clear of it.
    launch: Option<usize>,
}

impl Tracer<'_> {
    /// One RK4 step along the line field; returns the displacement and the
    /// turn between the first and last stage directions.
    fn rk4(&self, z: Complex64, prev: Complex64, h: f64) -> (Complex64, f64) {
        let f = |w: Complex64, p: Complex64| self.qd.line_direction(w, Some(p));
        let k1 = f(z, prev);
        let k2 = f(z + 0.5 * h * k1, k1);
        let k3 = f(z + 0.5 * h * k2, k2);
        let k4 = f(z + h * k3, k3);
        let dz = h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        (dz, (k4 * k1.conj()).arg().abs())
    }

    fn captured(&self, z: Complex64, origin: Complex64) -> Option<usize> {
        let cap = self.params.capture_radius;
        let launch_clear = self
            .launch
            .map(|_| (z - origin).norm() > 2.0 * cap)
            .unwrap_or(true);
        self.qd
            .factors
            .iter()
            .enumerate()
            .filter(|(k, _)| launch_clear || Some(*k) != self.launch)
            .filter(|(_, f)| (z - f.point).norm() < cap)
            .min_by(|a, b| (z - a.1.point).norm().total_cmp(&(z - b.1.point).norm()))
            .map(|(k, _)| k)
    }

    fn run(&self, start: Complex64, first: Complex64, dir: Complex64) -> Trajectory {
        let p = self.params;
        let centers: Vec<Complex64> = self
            .qd
            .factors
            .iter()
            .filter(|f| f.kind == FactorKind::Marked)
            .map(|f| f.point)
            .collect();
        let mut winding: Vec<(Complex64, f64)> = centers.iter().map(|&c| (c, 0.0)).collect();
        let mut points = vec![start];
        let mut arcs = vec![0.0];
        let mut z = start;
        let mut prev = dir;
        let mut h = p.step;

        let mut push = |from: Complex64, to: Complex64, points: &mut Vec<Complex64>, arcs: &mut Vec<f64>| {
            for (c, w) in winding.iter_mut() {
                *w += subtended(from, to, *c);
            }
            let s = arcs.last().unwrap() + (to - from).norm();
            points.push(to);
            arcs.push(s);
        };

        if first != start {
            push(start, first, &mut points, &mut arcs);
            z = first;
        }

        let terminal = loop {
            if let Some(k) = self.captured(z, start) {
                let f = self.qd.factors[k];
                break Terminal::ReachedSingularity { point: f.point, index: k, order: f.order };
            }
            if *arcs.last().unwrap() >= p.max_arc_length {
                break Terminal::ExhaustedArcLength;
            }
            let mut hh = h.min(p.max_arc_length - arcs.last().unwrap()).max(MIN_STEP);
            if p.adaptive {
                if let Some((_, d)) = self.qd.nearest_singularity(z) {
                    hh = hh.min(PROXIMITY_FRACTION * d);
                }
            }
            let (dz, turn) = loop {
                let (dz, turn) = self.rk4(z, prev, hh);
                if !p.adaptive || turn <= MAX_TURN || hh <= MIN_STEP {
                    break (dz, turn);
                }
                hh *= 0.5;
                h = hh;
            };
            if dz.norm() == 0.0 {
                break Terminal::ExhaustedArcLength;
            }
            let next = z + dz;
            push(z, next, &mut points, &mut arcs);
            prev = dz / dz.norm();
            z = next;
            if outside(self.qd.domain, z, p.domain_margin) {
                break Terminal::LeftDomain;
            }
            if p.adaptive && turn < CALM_TURN {
                h = (2.0 * h).min(p.step);
            }
            if hh <= MIN_STEP && turn > MAX_TURN {
                break Terminal::ExhaustedArcLength;
            }
        };

        let winding = winding.into_iter().collect();
        Trajectory {
            start,
            points,
            arc_lengths: arcs,
            terminal,
            winding,
        }
    }
}

/// Traces the horizontal trajectory through `start` with initial direction
/// `initial_dir`. At a growth point the direction must be a separatrix and
/// integration begins one capture radius out along it.
pub fn trace(
    qd: &QuadDifferential,
    start: Complex64,
    initial_dir: Complex64,
    params: &TraceParams,
) -> Result<Trajectory> {
    params.validate()?;
    if !(initial_dir.norm() > 0.0) || !initial_dir.is_finite() {
        return Err(Error::InvalidParameter(format!("initial direction {initial_dir} is not a direction")));
    }
    let dir = initial_dir / initial_dir.norm();
    let infos = qd.classify_singularities();
    let at = qd
        .factors
        .iter()
        .position(|f| (f.point - start).norm() <= 1e-12 * start.norm().max(1.0));
    match at {
        Some(k) if qd.factors[k].order >= 1 => {
            let angle = dir.arg().rem_euclid(TAU);
            let ok = infos[k].separatrix_angles.iter().any(|&s| {
                let d = (angle - s).rem_euclid(TAU);
                d.min(TAU - d) <= LAUNCH_TOL
            });
            if !ok {
                return Err(Error::BadLaunch { point: start, angle });
            }
            let tracer = Tracer { qd, params: *params, launch: Some(k) };
            Ok(tracer.run(start, start + params.capture_radius * dir, dir))
        }
        _ => {
            if let Some((k, d)) = qd.nearest_singularity(start) {
                if d < params.capture_radius {
                    return Err(Error::TooCloseToSingularity {
                        point: start,
                        singularity: qd.factors[k].point,
                        radius: params.capture_radius,
                    });
                }
            }
            // Align the field's sign with the requested direction.
            let u = qd.line_direction(start, Some(dir));
            let tracer = Tracer { qd, params: *params, launch: None };
            Ok(tracer.run(start, start, u))
        }
    }
}

fn inward_normal(domain: Domain, p: Complex64) -> Complex64 {
    match domain {
        Domain::Disk => -p / p.norm(),
        Domain::HalfPlane => Complex64::i(),
    }
}

/// The interior-pointing separatrix at growth factor `k`.
pub fn launch_direction(qd: &QuadDifferential, k: usize) -> Result<Complex64> {
    let info = &qd.classify_singularities()[k];
    let normal = inward_normal(qd.domain, info.point);
    info.separatrix_angles
        .iter()
        .map(|&a| Complex64::from_polar(1.0, a))
        .filter(|u| (u * normal.conj()).re > 1e-12)
        .min_by(|a, b| (a * normal.conj()).arg().abs().total_cmp(&(b * normal.conj()).arg().abs()))
        .ok_or(Error::LaunchSelection(info.point))
}

/// One trajectory per growth point, in factor order.
pub fn launch_all(qd: &QuadDifferential, params: &TraceParams) -> Result<Vec<Trajectory>> {
    params.validate()?;
    qd.factors
        .iter()
        .enumerate()
        .filter(|(_, f)| f.kind == FactorKind::Growth)
        .map(|(k, f)| trace(qd, f.point, launch_direction(qd, k)?, params))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisParams {
    pub spiral_threshold: f64,
    pub angle_gap_threshold: f64,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        AnalysisParams {
            spiral_threshold: 4.0 * PI,
            angle_gap_threshold: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergingPair {
    pub first: usize,
    pub second: usize,
    pub point: Complex64,
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spiral {
    pub trajectory: usize,
    pub center: Complex64,
    pub winding: f64,
    pub monotone: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AsymptoticReport {
    pub pairs: Vec<ConvergingPair>,
    pub spirals: Vec<Spiral>,
}

/// Last 75% of the non-zero increments share a sign.
pub fn eventually_monotone(increments: &[f64]) -> bool {
    let tail = &increments[increments.len() / 4..];
    let pos = tail.iter().any(|&d| d > 0.0);
    let neg = tail.iter().any(|&d| d < 0.0);
    !(pos && neg)
}

/// Flags trajectory pairs running into the same pole of order ≥ 3 along
/// nearly the same direction, and trajectories spiralling about a marked
/// point.
pub fn analyze(trajectories: &[Trajectory], qd: &QuadDifferential, params: &AnalysisParams) -> AsymptoticReport {
    let mut report = AsymptoticReport::default();
    for i in 0..trajectories.len() {
        for j in i + 1..trajectories.len() {
            let (a, b) = (&trajectories[i], &trajectories[j]);
            let (
                Terminal::ReachedSingularity { index: ka, order, point },
                Terminal::ReachedSingularity { index: kb, .. },
            ) = (a.terminal, b.terminal)
            else {
                continue;
            };
            if ka != kb || order > -3 {
                continue;
            }
            if let (Some(da), Some(db)) = (a.terminal_direction(), b.terminal_direction()) {
                let gap = (da * db.conj()).arg().abs();
                if gap < params.angle_gap_threshold {
                    report.pairs.push(ConvergingPair { first: i, second: j, point, gap });
                }
            }
        }
    }
    for (i, t) in trajectories.iter().enumerate() {
        for f in qd.factors.iter().filter(|f| f.kind == FactorKind::Marked) {
            let Some(total) = t.winding_about(f.point) else { continue };
            if total.abs() <= params.spiral_threshold {
                continue;
            }
            let monotone = winding_increments(&t.points, f.point)
                .map(|inc| eventually_monotone(&inc))
                .unwrap_or(false);
            report.spirals.push(Spiral {
                trajectory: i,
                center: f.point,
                winding: total,
                monotone,
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisor::{Charge, SpherePoint, SymmetricDivisor};
    use crate::quad_diff::Factor;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn single_curve() -> QuadDifferential {
        let d = SymmetricDivisor::new(
            Domain::HalfPlane,
            vec![SpherePoint::real(0.0)],
            vec![(SpherePoint::Infinity, Charge::integer(-3))],
        )
        .unwrap();
        QuadDifferential::build(&d).unwrap()
    }

    fn constant() -> QuadDifferential {
        QuadDifferential { domain: Domain::HalfPlane, factors: vec![], phase: c(1.0, 0.0) }
    }

    #[test]
    fn constant_field_gives_straight_segment() {
        let params = TraceParams { max_arc_length: 1.0, ..Default::default() };
        let t = trace(&constant(), c(0.0, 0.5), c(1.0, 0.0), &params).unwrap();
        assert_eq!(t.terminal, Terminal::ExhaustedArcLength);
        assert!((t.end() - c(1.0, 0.5)).norm() < 1e-12);
        assert!(t.points.iter().all(|z| (z.im - 0.5).abs() < 1e-14));
        let back = trace(&constant(), c(0.0, 0.5), c(-1.0, 0.0), &params).unwrap();
        assert!((back.end() - c(-1.0, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn single_curve_is_vertical_ray() {
        let params = TraceParams { max_arc_length: 2.0, ..Default::default() };
        let ts = launch_all(&single_curve(), &params).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].points[0], c(0.0, 0.0));
        assert!(ts[0].points.iter().all(|z| z.re.abs() < 1e-12));
        assert!((ts[0].end() - c(0.0, 2.0)).norm() < 1e-9);
        assert!(analyze(&ts, &single_curve(), &AnalysisParams::default()).pairs.is_empty());
        assert!(analyze(&ts, &single_curve(), &AnalysisParams::default()).spirals.is_empty());
    }

    #[test]
    fn bad_launch_is_rejected() {
        let err = trace(&single_curve(), c(0.0, 0.0), Complex64::from_polar(1.0, 1.0), &TraceParams::default());
        assert!(matches!(err, Err(Error::BadLaunch { .. })));
        let ok = trace(&single_curve(), c(0.0, 0.0), Complex64::from_polar(1.0, PI / 2.0 + 5e-4), &TraceParams::default());
        assert!(ok.is_ok());
    }

    #[test]
    fn params_are_validated() {
        let bad = TraceParams { step: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = TraceParams { capture_radius: 1e-7, domain_margin: 1e-6, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(TraceParams::default().validate().is_ok());
    }

    #[test]
    fn winding_of_circle_is_full_turn() {
        let n = 1024;
        let points: Vec<Complex64> = (0..=n).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n as f64)).collect();
        let t = Trajectory {
            start: points[0],
            arc_lengths: vec![0.0; points.len()],
            points,
            terminal: Terminal::ExhaustedArcLength,
            winding: vec![],
        };
        assert!((winding_angle(&t, c(0.0, 0.0)).unwrap() - TAU).abs() < 1e-6);
        assert!(winding_angle(&t, c(5.0, 0.0)).unwrap().abs() < PI);
        assert!(matches!(winding_angle(&t, c(1.0, 0.0)), Err(Error::IllDefinedWinding(_))));
    }

    #[test]
    fn straight_segment_winding_is_small() {
        let t = Trajectory {
            start: c(-1.0, 0.0),
            points: vec![c(-1.0, 0.0), c(1.0, 0.0)],
            arc_lengths: vec![0.0, 2.0],
            terminal: Terminal::ExhaustedArcLength,
            winding: vec![],
        };
        assert!(winding_angle(&t, c(0.0, 100.0)).unwrap().abs() < PI);
    }

    #[test]
    fn monotone_rule() {
        assert!(eventually_monotone(&[-1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]));
        assert!(!eventually_monotone(&[1.0, 1.0, 1.0, 1.0, -1.0, 1.0, 1.0, 1.0]));
        assert!(eventually_monotone(&[]));
    }

    #[test]
    fn capture_at_simple_pole_pair() {
        // Q = (z − i)^{-4} on the half-plane: trajectories near i are circles
        // through i, so a trace from a regular point ends at i.
        let qd = QuadDifferential {
            domain: Domain::HalfPlane,
            factors: vec![Factor { point: c(0.0, 1.0), order: -4, kind: FactorKind::Marked }],
            phase: c(1.0, 0.0),
        };
        let t = trace(&qd, c(0.5, 1.2), c(1.0, 0.0), &TraceParams::default()).unwrap();
        match t.terminal {
            Terminal::ReachedSingularity { point, order, .. } => {
                assert_eq!(order, -4);
                assert!((point - c(0.0, 1.0)).norm() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        let recomputed = winding_angle(&t, c(0.0, 1.0)).unwrap();
        assert!((recomputed - t.winding_about(c(0.0, 1.0)).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn samples_are_at_most_two_steps_apart_and_continuous() {
        let t = trace(&single_curve(), c(0.3, 0.2), c(1.0, 0.0), &TraceParams { max_arc_length: 3.0, ..Default::default() }).unwrap();
        for w in t.points.windows(3) {
            assert!((w[1] - w[0]).norm() <= 2e-3 + 1e-15);
            assert!(((w[2] - w[1]) * (w[1] - w[0]).conj()).re >= 0.0);
        }
    }
}
