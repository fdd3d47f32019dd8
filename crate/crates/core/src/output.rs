//! Deterministic text artifacts: SVG plots, CSV tables and key/value reports.

use std::fmt::Write;

use num_complex::Complex64;

use crate::divisor::{format_complex, Domain, SymmetricDivisor};
use crate::loewner::{Hull, MotionIntegralReport};
use crate::quad_diff::{FactorKind, QuadDifferential, PROXIMITY_RADIUS};
use crate::trajectory::{AsymptoticReport, Terminal, Trajectory};

const CANVAS: f64 = 600.0;

/// Axis-aligned plot window in plane coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Window {
    /// The closed unit disk with a margin, or a box over the half-plane
    /// covering every finite boundary point and trajectory sample.
    pub fn for_scene(domain: Domain, qd: &QuadDifferential, trajectories: &[Trajectory]) -> Window {
        match domain {
            Domain::Disk => Window { x0: -1.1, x1: 1.1, y0: -1.1, y1: 1.1 },
            Domain::HalfPlane => {
                let pts = qd
                    .factors
                    .iter()
                    .map(|f| f.point)
                    .chain(trajectories.iter().flat_map(|t| t.points.iter().copied()))
                    .filter(|z| z.norm() < 1e3);
                let (mut x0, mut x1, mut y1) = (-1.0f64, 1.0f64, 1.0f64);
                for z in pts {
                    x0 = x0.min(z.re);
                    x1 = x1.max(z.re);
                    y1 = y1.max(z.im);
                }
                let w = (x1 - x0).max(y1);
                let cx = 0.5 * (x0 + x1);
                Window {
                    x0: cx - 0.55 * w,
                    x1: cx + 0.55 * w,
                    y0: -0.05 * w,
                    y1: 1.05 * w,
                }
            }
        }
    }

    fn scale(&self) -> f64 {
        CANVAS / (self.x1 - self.x0).max(self.y1 - self.y0)
    }

    fn px(&self, z: Complex64) -> (f64, f64) {
        let s = self.scale();
        ((z.re - self.x0) * s, (self.y1 - z.im) * s)
    }

    fn contains(&self, z: Complex64) -> bool {
        z.re >= self.x0 && z.re <= self.x1 && z.im >= self.y0 && z.im <= self.y1
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// Direction-field glyphs, trajectories, the boundary and the divisor points.
/// Class names: `boundary`, `field`, `trajectory`, `growth`, `marked`.
pub fn render_svg(divisor: &SymmetricDivisor, qd: &QuadDifferential, trajectories: &[Trajectory], grid: usize) -> String {
    let win = Window::for_scene(divisor.domain, qd, trajectories);
    let s = win.scale();
    let width = (win.x1 - win.x0) * s;
    let height = (win.y1 - win.y0) * s;
    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        num(width),
        num(height),
        num(width),
        num(height)
    )
    .unwrap();
    out.push_str(
        "<style>.boundary{fill:none;stroke:#000;stroke-width:1}.field{stroke:#4a6fa5;stroke-width:0.8}\
.trajectory{fill:none;stroke:#000;stroke-width:1.5}.growth{fill:#d62728}.marked{fill:#2ca02c}</style>\n",
    );
    match divisor.domain {
        Domain::Disk => {
            let (cx, cy) = win.px(Complex64::new(0.0, 0.0));
            writeln!(out, "<circle class=\"boundary\" cx=\"{}\" cy=\"{}\" r=\"{}\"/>", num(cx), num(cy), num(s)).unwrap();
        }
        Domain::HalfPlane => {
            let (x0, y) = win.px(Complex64::new(win.x0, 0.0));
            let (x1, _) = win.px(Complex64::new(win.x1, 0.0));
            writeln!(out, "<line class=\"boundary\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>", num(x0), num(y), num(x1), num(y)).unwrap();
        }
    }

    let grid = grid.max(2);
    let half = 0.35 * (win.x1 - win.x0) / (grid - 1) as f64;
    out.push_str("<g class=\"field\">\n");
    for j in 0..grid {
        for i in 0..grid {
            let z = Complex64::new(
                win.x0 + (win.x1 - win.x0) * i as f64 / (grid - 1) as f64,
                win.y1 - (win.y1 - win.y0) * j as f64 / (grid - 1) as f64,
            );
            let inside = match divisor.domain {
                Domain::Disk => z.norm() < 1.0,
                Domain::HalfPlane => z.im > 0.0,
            };
            if !inside {
                continue;
            }
            let Ok(u) = qd.direction_field(z, None) else { continue };
            if qd.nearest_singularity(z).is_some_and(|(_, d)| d < PROXIMITY_RADIUS.max(half)) {
                continue;
            }
            let (ax, ay) = win.px(z - half * u);
            let (bx, by) = win.px(z + half * u);
            writeln!(out, "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>", num(ax), num(ay), num(bx), num(by)).unwrap();
        }
    }
    out.push_str("</g>\n");

    for t in trajectories {
        let mut pts: Vec<String> = Vec::new();
        for &z in &t.points {
            if !win.contains(z) {
                continue;
            }
            let (x, y) = win.px(z);
            let p = format!("{},{}", num(x), num(y));
            if pts.last() != Some(&p) {
                pts.push(p);
            }
        }
        writeln!(out, "<polyline class=\"trajectory\" points=\"{}\"/>", pts.join(" ")).unwrap();
    }

    for f in &qd.factors {
        if !win.contains(f.point) {
            continue;
        }
        let (x, y) = win.px(f.point);
        let class = match f.kind {
            FactorKind::Growth => "growth",
            FactorKind::Marked => "marked",
        };
        writeln!(out, "<circle class=\"{class}\" cx=\"{}\" cy=\"{}\" r=\"4.00\"/>", num(x), num(y)).unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// `index,arc_length,re,im`, one row per sample.
pub fn trajectory_csv(t: &Trajectory) -> String {
    let mut out = String::from("index,arc_length,re,im\n");
    for (k, (z, s)) in t.points.iter().zip(&t.arc_lengths).enumerate() {
        writeln!(out, "{k},{s:.12e},{:.12e},{:.12e}", z.re, z.im).unwrap();
    }
    out
}

/// `t,curve,re,im`, one row per hull sample and curve.
pub fn hull_csv(hull: &Hull) -> String {
    let mut out = String::from("t,curve,re,im\n");
    for (k, t) in hull.times.iter().enumerate() {
        for (j, curve) in hull.curves.iter().enumerate() {
            let z = curve[k];
            writeln!(out, "{t:.12e},{j},{:.12e},{:.12e}", z.re, z.im).unwrap();
        }
    }
    out
}

fn quoted(z: Complex64) -> String {
    format!("\"{}\"", format_complex(z))
}

/// Terminal behaviour of every trajectory and the flagged pairs and spirals.
pub fn analysis_report(trajectories: &[Trajectory], report: &AsymptoticReport) -> String {
    let mut out = String::new();
    writeln!(out, "trajectories = {}", trajectories.len()).unwrap();
    writeln!(out, "pairs = {}", report.pairs.len()).unwrap();
    writeln!(out, "spirals = {}", report.spirals.len()).unwrap();
    for (k, t) in trajectories.iter().enumerate() {
        writeln!(out, "\n[[trajectory]]").unwrap();
        writeln!(out, "id = {k}").unwrap();
        writeln!(out, "start = {}", quoted(t.start)).unwrap();
        writeln!(out, "terminal = \"{}\"", t.terminal.label()).unwrap();
        if let Terminal::ReachedSingularity { point, order, .. } = t.terminal {
            writeln!(out, "terminal_point = {}", quoted(point)).unwrap();
            writeln!(out, "terminal_order = {order}").unwrap();
        }
        if let Some(u) = t.terminal_direction() {
            writeln!(out, "terminal_angle = {:.9}", u.arg()).unwrap();
        }
        writeln!(out, "end = {}", quoted(t.end())).unwrap();
        writeln!(out, "arc_length = {:.9}", t.length()).unwrap();
        writeln!(out, "samples = {}", t.points.len()).unwrap();
    }
    for p in &report.pairs {
        writeln!(out, "\n[[pair]]").unwrap();
        writeln!(out, "first = {}", p.first).unwrap();
        writeln!(out, "second = {}", p.second).unwrap();
        writeln!(out, "point = {}", quoted(p.point)).unwrap();
        writeln!(out, "gap = {:.9e}", p.gap).unwrap();
    }
    for s in &report.spirals {
        writeln!(out, "\n[[spiral]]").unwrap();
        writeln!(out, "trajectory = {}", s.trajectory).unwrap();
        writeln!(out, "center = {}", quoted(s.center)).unwrap();
        writeln!(out, "winding = {:.9}", s.winding).unwrap();
        writeln!(out, "monotone = {}", s.monotone).unwrap();
    }
    out
}

pub fn motion_report(r: &MotionIntegralReport) -> String {
    let mut out = String::new();
    writeln!(out, "z = {}", quoted(r.z)).unwrap();
    writeln!(out, "max_relative_drift = {:.6e}", r.max_relative_drift).unwrap();
    writeln!(out, "max_arg_drift = {:.6e}", r.max_arg_drift).unwrap();
    writeln!(out, "complete = {}", r.complete).unwrap();
    if let Some(t) = r.death_time {
        writeln!(out, "death_time = {t:.12e}").unwrap();
    }
    writeln!(out, "samples = {}", r.times.len()).unwrap();
    for (t, v) in r.times.iter().zip(&r.values) {
        writeln!(out, "\n[[sample]]").unwrap();
        writeln!(out, "t = {t:.12e}").unwrap();
        writeln!(out, "value = {}", quoted(*v)).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisor::{Charge, SpherePoint};
    use crate::trajectory::{launch_all, TraceParams};

    fn single() -> (SymmetricDivisor, QuadDifferential) {
        let d = SymmetricDivisor::new(
            Domain::HalfPlane,
            vec![SpherePoint::real(0.0)],
            vec![(SpherePoint::Infinity, Charge::integer(-3))],
        )
        .unwrap();
        let qd = QuadDifferential::build(&d).unwrap();
        (d, qd)
    }

    #[test]
    fn svg_has_classes_and_is_deterministic() {
        let (d, qd) = single();
        let ts = launch_all(&qd, &TraceParams { max_arc_length: 1.0, ..Default::default() }).unwrap();
        let a = render_svg(&d, &qd, &ts, 11);
        assert_eq!(a, render_svg(&d, &qd, &ts, 11));
        for class in ["boundary", "field", "trajectory", "growth"] {
            assert!(a.contains(&format!("class=\"{class}\"")), "{class}");
        }
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
    }

    #[test]
    fn csv_headers() {
        let (_, qd) = single();
        let ts = launch_all(&qd, &TraceParams { max_arc_length: 0.01, ..Default::default() }).unwrap();
        let csv = trajectory_csv(&ts[0]);
        assert!(csv.starts_with("index,arc_length,re,im\n0,"));
        assert_eq!(csv.lines().count(), ts[0].points.len() + 1);
        let hull = Hull { times: vec![0.0, 0.5], curves: vec![vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)]] };
        let h = hull_csv(&hull);
        assert_eq!(h.lines().next(), Some("t,curve,re,im"));
        assert_eq!(h.lines().count(), 3);
    }

    #[test]
    fn reports_parse_as_toml() {
        let (_, qd) = single();
        let ts = launch_all(&qd, &TraceParams { max_arc_length: 0.1, ..Default::default() }).unwrap();
        let text = analysis_report(&ts, &AsymptoticReport::default());
        let v: toml::Table = toml::from_str(&text).unwrap();
        assert_eq!(v["trajectories"].as_integer(), Some(1));
        assert_eq!(v["trajectory"][0]["terminal"].as_str(), Some("exhausted_arc_length"));
    }
}
