//! Numerical property checks run against a scene.

use std::fmt::{self, Write};
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::SceneConfig;
use crate::divisor::{dlog_z, log_partition_z_abs, SphereDivisor};
use crate::error::Result;
use crate::quad_diff::QuadDifferential;
use crate::sample::random_moebius_avoiding;
use crate::scene::half_plane_scene;
use crate::trajectory::{launch_all, Trajectory};

pub const INVARIANCE_TOL: f64 = 1e-9;
pub const DERIVATIVE_TOL: f64 = 1e-6;
pub const MOTION_TOL: f64 = 1e-6;
pub const EQUIVALENCE_TOL: f64 = 5e-3;
/// Hull and trajectories are compared up to this capacity time.
pub const EQUIVALENCE_HORIZON: f64 = 0.1;
const INVARIANCE_MAPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Invariance,
    Derivative,
    Motion,
    Equivalence,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Invariance => "invariance",
            Suite::Derivative => "derivative",
            Suite::Motion => "motion",
            Suite::Equivalence => "equivalence",
        }
    }

    fn includes(&self, other: Suite) -> bool {
        *self == Suite::All || *self == other
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "all" => Ok(Suite::All),
            "invariance" => Ok(Suite::Invariance),
            "derivative" => Ok(Suite::Derivative),
            "motion" => Ok(Suite::Motion),
            "equivalence" => Ok(Suite::Equivalence),
            _ => Err(format!(
                "unknown suite {s:?} (expected all, invariance, derivative, motion or equivalence)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub error: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.error <= self.tolerance
    }

    pub fn margin(&self) -> f64 {
        self.tolerance - self.error
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        writeln!(out, "passed = {}", self.passed()).unwrap();
        writeln!(out, "checks = {}", self.checks.len()).unwrap();
        for c in &self.checks {
            writeln!(out, "\n[[check]]").unwrap();
            writeln!(out, "suite = \"{}\"", c.suite.name()).unwrap();
            writeln!(out, "name = \"{}\"", c.name).unwrap();
            writeln!(out, "status = \"{}\"", if c.passed() { "pass" } else { "fail" }).unwrap();
            writeln!(out, "error = {:.6e}", c.error).unwrap();
            writeln!(out, "tolerance = {:.6e}", c.tolerance).unwrap();
            writeln!(out, "margin = {:.6e}", c.margin()).unwrap();
        }
        f.write_str(&out)
    }
}

/// Worst invariance defect of a neutral divisor over `maps` seeded random
/// Möbius maps. Points at ∞ are first moved to finite positions.
pub fn invariance_defect(divisor: &SphereDivisor, maps: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let finite: Vec<Complex64> = divisor.points.iter().filter_map(|(p, _)| p.finite()).collect();
    let base = if divisor.points.iter().any(|(p, _)| p.is_infinite()) {
        let m = loop {
            let m = random_moebius_avoiding(&mut rng, &finite, 0.05);
            if m.c.norm() > 0.05 {
                break m;
            }
        };
        divisor.pushforward(&m)?
    } else {
        divisor.clone()
    };
    let pts: Vec<Complex64> = base.points.iter().filter_map(|(p, _)| p.finite()).collect();
    let mut worst = 0.0f64;
    for _ in 0..maps {
        let m = random_moebius_avoiding(&mut rng, &pts, 0.05);
        worst = worst.max(base.invariance_defect(&m)?);
    }
    Ok(worst)
}

/// Relative gap between `∂_j log|Z|` and its central difference, scaled by
/// `max(|∂_j log|Z||, 1)`.
pub fn derivative_defect(x: &[f64], marked: &[(crate::divisor::SpherePoint, crate::divisor::Charge)], j: usize) -> Result<f64> {
    let exact = dlog_z(x, marked, j)?;
    let h = 1e-5 * x[j].abs().max(1.0);
    let eval = |shift: f64| {
        let pts: Vec<Complex64> = x
            .iter()
            .enumerate()
            .map(|(k, &v)| Complex64::new(if k == j { v + shift } else { v }, 0.0))
            .collect();
        log_partition_z_abs(&pts, marked)
    };
    let fd = (eval(h)? - eval(-h)?) / (2.0 * h);
    Ok((fd - exact).abs() / exact.abs().max(1.0))
}

fn point_to_polyline(z: Complex64, poly: &[Complex64]) -> f64 {
    if poly.len() == 1 {
        return (z - poly[0]).norm();
    }
    poly.windows(2)
        .map(|w| {
            let ab = w[1] - w[0];
            let len2 = ab.norm_sqr();
            let s = if len2 > 0.0 { (((z - w[0]) * ab.conj()).re / len2).clamp(0.0, 1.0) } else { 0.0 };
            (w[0] + ab * s - z).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Largest distance from a hull sample of curve `j` to trajectory `j`.
pub fn hull_trajectory_distance(curves: &[Vec<Complex64>], trajectories: &[Trajectory]) -> f64 {
    curves
        .iter()
        .zip(trajectories)
        .flat_map(|(curve, t)| curve.iter().map(move |&z| point_to_polyline(z, &t.points)))
        .fold(0.0, f64::max)
}

pub fn verify(scene: &SceneConfig, suite: Suite) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    let hp = half_plane_scene(scene)?;
    let divisor = &hp.problem.divisor;

    if suite.includes(Suite::Invariance) {
        let error = invariance_defect(&scene.divisor.to_sphere(), INVARIANCE_MAPS, scene.seed.into())?;
        report.checks.push(Check {
            suite: Suite::Invariance,
            name: format!("coulomb gas correlation under {INVARIANCE_MAPS} random Möbius maps"),
            error,
            tolerance: INVARIANCE_TOL,
        });
    }

    if suite.includes(Suite::Derivative) {
        let x: Vec<f64> = divisor.growth.iter().map(|g| g.finite().map_or(f64::NAN, |z| z.re)).collect();
        for j in 0..x.len() {
            report.checks.push(Check {
                suite: Suite::Derivative,
                name: format!("dlog_Z at growth point {j} against central difference"),
                error: derivative_defect(&x, &divisor.marked, j)?,
                tolerance: DERIVATIVE_TOL,
            });
        }
    }

    if suite.includes(Suite::Motion) {
        let l = &scene.loewner;
        let samples = l.hull_samples.max(1);
        let times: Vec<f64> = (0..=samples).map(|k| l.t_end * k as f64 / samples as f64).collect();
        let m = hp.problem.motion_integral(l.motion_point, &times, l.dt)?;
        report.checks.push(Check {
            suite: Suite::Motion,
            name: format!(
                "integral of motion at {} up to t = {}{}",
                crate::divisor::format_complex(l.motion_point),
                m.times.last().copied().unwrap_or(0.0),
                if m.complete { "" } else { " (point swallowed)" }
            ),
            error: m.max_relative_drift,
            tolerance: MOTION_TOL,
        });
    }

    if suite.includes(Suite::Equivalence) {
        let l = &scene.loewner;
        let horizon = l.t_end.min(EQUIVALENCE_HORIZON);
        let qd = QuadDifferential::build(divisor)?;
        let trajectories = launch_all(&qd, &scene.trace)?;
        let hull = hp.problem.trace_hull(horizon, l.dt, l.lift, l.hull_samples)?;
        report.checks.push(Check {
            suite: Suite::Equivalence,
            name: format!("hull samples up to t = {horizon} against traced trajectories"),
            error: hull_trajectory_distance(&hull.curves, &trajectories),
            tolerance: EQUIVALENCE_TOL,
        });
    }
    Ok(report)
}
