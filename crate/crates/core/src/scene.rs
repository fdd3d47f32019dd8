//! Runs a configured scene end to end and collects its artifacts.

use num_complex::Complex64;

use crate::config::SceneConfig;
use crate::conformal::half_plane_frame;
use crate::divisor::{Domain, MoebiusMap, SpherePoint};
use crate::error::{Error, Result};
use crate::loewner::{Hull, LoewnerProblem, MotionIntegralReport};
use crate::output;
use crate::quad_diff::QuadDifferential;
use crate::trajectory::{analyze, launch_all, AsymptoticReport, Trajectory};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct SceneRun {
    pub qd: Option<QuadDifferential>,
    pub trajectories: Vec<Trajectory>,
    pub report: Option<AsymptoticReport>,
    /// Hull samples in the scene's own coordinates.
    pub hull: Option<Hull>,
    pub motion: Option<MotionIntegralReport>,
    pub artifacts: Vec<Artifact>,
}

/// The scene's Loewner problem in the upper half-plane, and the map from
/// scene coordinates to it.
pub struct HalfPlaneScene {
    pub problem: LoewnerProblem,
    pub map: MoebiusMap,
}

pub fn half_plane_scene(scene: &SceneConfig) -> Result<HalfPlaneScene> {
    let (divisor, map) = half_plane_frame(&scene.divisor)?;
    let problem = LoewnerProblem::new(divisor, scene.parametrization.clone())?;
    Ok(HalfPlaneScene { problem, map })
}

fn to_scene(map: &MoebiusMap, domain: Domain, hull: Hull) -> Hull {
    if domain == Domain::HalfPlane {
        return hull;
    }
    let back = map.inverse();
    let curves = hull
        .curves
        .into_iter()
        .map(|c| {
            c.into_iter()
                .map(|z| match back.apply(SpherePoint::Finite(z)) {
                    SpherePoint::Finite(w) => w,
                    SpherePoint::Infinity => Complex64::new(f64::INFINITY, 0.0),
                })
                .collect()
        })
        .collect();
    Hull { times: hull.times, curves }
}

/// Produces every artifact the scene asks for. Artifact order and contents
/// depend only on the configuration.
pub fn run(scene: &SceneConfig) -> Result<SceneRun> {
    let out = &scene.output;
    let mut result = SceneRun {
        qd: None,
        trajectories: Vec::new(),
        report: None,
        hull: None,
        motion: None,
        artifacts: Vec::new(),
    };

    if out.needs_trajectories() {
        let qd = QuadDifferential::build(&scene.divisor)?;
        let trajectories = launch_all(&qd, &scene.trace)?;
        let report = analyze(&trajectories, &qd, &scene.analysis);
        if out.field_svg {
            result.artifacts.push(Artifact {
                name: "field.svg".into(),
                contents: output::render_svg(&scene.divisor, &qd, &trajectories, out.grid),
            });
        }
        if out.trajectories_csv {
            for (k, t) in trajectories.iter().enumerate() {
                result.artifacts.push(Artifact {
                    name: format!("trajectory_{k}.csv"),
                    contents: output::trajectory_csv(t),
                });
            }
        }
        if out.analysis_report {
            result.artifacts.push(Artifact {
                name: "analysis.txt".into(),
                contents: output::analysis_report(&trajectories, &report),
            });
        }
        result.qd = Some(qd);
        result.trajectories = trajectories;
        result.report = Some(report);
    }

    if out.needs_loewner() {
        let hp = half_plane_scene(scene)?;
        let l = &scene.loewner;
        if out.hull_csv {
            let hull = hp.problem.trace_hull(l.t_end, l.dt, l.lift, l.hull_samples)?;
            let hull = to_scene(&hp.map, scene.divisor.domain, hull);
            result.artifacts.push(Artifact { name: "hull.csv".into(), contents: output::hull_csv(&hull) });
            result.hull = Some(hull);
        }
        if out.motion_report {
            let samples = l.hull_samples.max(1);
            let times: Vec<f64> = (0..=samples).map(|k| l.t_end * k as f64 / samples as f64).collect();
            let report = hp.problem.motion_integral(l.motion_point, &times, l.dt)?;
            result.artifacts.push(Artifact { name: "motion.txt".into(), contents: output::motion_report(&report) });
            result.motion = Some(report);
        }
    }
    if result.artifacts.is_empty() && !out.needs_trajectories() && !out.needs_loewner() {
        return Err(Error::InvalidParameter("no outputs requested".into()));
    }
    Ok(result)
}
