//! Scene configuration: a TOML schema, line-numbered diagnostics and the
//! figure presets.
//!
//! ```toml
//! preset = "fig2"            # optional; sections below override it
//! seed = 7
//!
//! [divisor]
//! domain = "disk"            # or "half_plane"
//! growth = ["0.7071067811865476+0.7071067811865475i", "-i", "1"]
//! marked = [
//!   { at = "0", charge = "-1" },
//!   { at = "inf", charge = "-1" },
//!   { at = "-1", charge = "-3" },
//! ]
//!
//! [[parametrization.curve]]  # one per growth point, or none for ν ≡ 1
//! pieces = [[0.0, 1.0], [0.05, 0.5]]
//! [[parametrization.curve]]
//! pieces = [[0.0, 1.0]]
//! [[parametrization.curve]]
//! pieces = [[0.0, 2.0]]
//!
//! [trace]
//! step = 1e-3
//!
//! [loewner]
//! T = 0.1
//! dt = 1e-3
//!
//! [output]
//! hull_csv = true
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::divisor::{format_complex, Charge, Domain, SpherePoint, SymmetricDivisor, Violation};
use crate::loewner::{Parametrization, Schedule};
use crate::trajectory::{AnalysisParams, TraceParams};

pub const PRESETS: [&str; 3] = ["fig1", "fig2", "fig3"];

mod complex_text {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_complex(*z))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let text = String::deserialize(d)?;
        crate::divisor::parse_complex(&text)
            .filter(|z| z.is_finite())
            .ok_or_else(|| serde::de::Error::custom(format!("malformed complex literal {text:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoewnerParams {
    #[serde(rename = "T")]
    pub t_end: f64,
    pub dt: f64,
    /// Height above the driving point at which the reverse flow starts.
    pub lift: f64,
    pub hull_samples: usize,
    /// Observer for the integral of motion, in half-plane coordinates.
    #[serde(with = "complex_text")]
    pub motion_point: Complex64,
}

impl Default for LoewnerParams {
    fn default() -> Self {
        LoewnerParams {
            t_end: 0.1,
            dt: 1e-3,
            lift: 1e-6,
            hull_samples: 20,
            motion_point: Complex64::new(0.0, 2.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub field_svg: bool,
    pub trajectories_csv: bool,
    pub hull_csv: bool,
    pub motion_report: bool,
    pub analysis_report: bool,
    /// Field glyphs per side.
    pub grid: usize,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            field_svg: true,
            trajectories_csv: true,
            hull_csv: false,
            motion_report: false,
            analysis_report: true,
            grid: 41,
        }
    }
}

impl OutputSpec {
    pub fn needs_trajectories(&self) -> bool {
        self.field_svg || self.trajectories_csv || self.analysis_report
    }

    pub fn needs_loewner(&self) -> bool {
        self.hull_csv || self.motion_report
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub preset: Option<String>,
    pub seed: u32,
    pub divisor: SymmetricDivisor,
    pub parametrization: Parametrization,
    pub trace: TraceParams,
    pub analysis: AnalysisParams,
    pub loewner: LoewnerParams,
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, d) in self.diagnostics.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    fn single(line: Option<usize>, message: impl Into<String>) -> Self {
        ConfigError {
            diagnostics: vec![Diagnostic { line, message: message.into() }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum ChargeLiteral {
    Int(i64),
    Float(f64),
    Text(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarkedFile {
    at: Spanned<String>,
    charge: Spanned<ChargeLiteral>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DivisorFile {
    domain: Spanned<String>,
    growth: Spanned<Vec<Spanned<String>>>,
    #[serde(default)]
    marked: Vec<MarkedFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveFile {
    pieces: Vec<(f64, f64)>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamFile {
    #[serde(default)]
    curve: Vec<CurveFile>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<Spanned<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    divisor: Option<Spanned<DivisorFile>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    parametrization: Option<ParamFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Spanned<TraceParams>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    analysis: Option<Spanned<AnalysisParams>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    loewner: Option<Spanned<LoewnerParams>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<Spanned<OutputSpec>>,
}

struct Lines<'a>(&'a str);

impl Lines<'_> {
    fn of(&self, span: Range<usize>) -> Option<usize> {
        let end = span.start.min(self.0.len());
        Some(self.0[..end].matches('\n').count() + 1)
    }

    /// First line mentioning `key` outside a comment.
    fn find(&self, key: &str) -> Option<usize> {
        self.0
            .lines()
            .position(|l| l.split('#').next().is_some_and(|code| code.contains(key)))
            .map(|k| k + 1)
    }
}

fn charge_of(lit: &ChargeLiteral) -> Result<Charge, String> {
    match lit {
        ChargeLiteral::Int(n) => Ok(Charge::integer(*n)),
        ChargeLiteral::Float(v) if v.is_finite() => Ok(Charge::real(*v)),
        ChargeLiteral::Float(v) => Err(format!("charge {v} is not finite")),
        ChargeLiteral::Text(s) => s.parse(),
    }
}

struct ParsedDivisor {
    divisor: SymmetricDivisor,
    growth_lines: Vec<Option<usize>>,
    marked_lines: Vec<(Option<usize>, Option<usize>)>,
    header: Option<usize>,
}

fn parse_divisor(file: &Spanned<DivisorFile>, lines: &Lines, diags: &mut Vec<Diagnostic>) -> Option<ParsedDivisor> {
    let d = file.get_ref();
    let before = diags.len();
    let header = lines.of(file.span());
    let domain = match d.domain.get_ref().parse::<Domain>() {
        Ok(dom) => Some(dom),
        Err(e) => {
            diags.push(Diagnostic { line: lines.of(d.domain.span()), message: e });
            None
        }
    };
    let mut growth = Vec::new();
    let mut growth_lines = Vec::new();
    for g in d.growth.get_ref() {
        match g.get_ref().parse::<SpherePoint>() {
            Ok(p) => {
                growth.push(p);
                growth_lines.push(lines.of(g.span()));
            }
            Err(e) => diags.push(Diagnostic { line: lines.of(g.span()), message: e }),
        }
    }
    let mut marked = Vec::new();
    let mut marked_lines = Vec::new();
    for m in &d.marked {
        let point = m.at.get_ref().parse::<SpherePoint>();
        let charge = charge_of(m.charge.get_ref());
        match (point, charge) {
            (Ok(p), Ok(c)) => {
                marked.push((p, c));
                marked_lines.push((lines.of(m.at.span()), lines.of(m.charge.span())));
            }
            (p, c) => {
                if let Err(e) = p {
                    diags.push(Diagnostic { line: lines.of(m.at.span()), message: e });
                }
                if let Err(e) = c {
                    diags.push(Diagnostic { line: lines.of(m.charge.span()), message: e });
                }
            }
        }
    }
    if diags.len() > before {
        return None;
    }
    let divisor = SymmetricDivisor {
        domain: domain?,
        growth,
        marked,
    };
    if divisor.growth.is_empty() {
        diags.push(Diagnostic {
            line: lines.of(d.growth.span()),
            message: Violation::NoGrowthPoints.to_string(),
        });
    }
    Some(ParsedDivisor { divisor, growth_lines, marked_lines, header })
}

fn line_of_point(parsed: &ParsedDivisor, p: &SpherePoint) -> Option<usize> {
    let d = &parsed.divisor;
    d.growth
        .iter()
        .zip(&parsed.growth_lines)
        .find(|(g, _)| g.approx_eq(p, 1e-12))
        .map(|(_, l)| *l)
        .or_else(|| {
            d.marked
                .iter()
                .zip(&parsed.marked_lines)
                .find(|((q, _), _)| q.approx_eq(p, 1e-12))
                .map(|(_, l)| l.0)
        })
        .flatten()
        .or(parsed.header)
}

fn check_divisor(parsed: &ParsedDivisor, output: &OutputSpec, diags: &mut Vec<Diagnostic>) {
    for v in parsed.divisor.validate().violations {
        let line = match &v {
            Violation::NoGrowthPoints => continue,
            Violation::Neutrality { .. } => parsed.header,
            Violation::Distinctness { second, .. } => line_of_point(parsed, second),
            Violation::GrowthOffBoundary { point } | Violation::Symmetry { point, .. } => line_of_point(parsed, point),
        };
        diags.push(Diagnostic { line, message: v.to_string() });
    }
    if output.needs_trajectories() {
        for ((_, c), (_, line)) in parsed.divisor.marked.iter().zip(&parsed.marked_lines) {
            if !c.is_half_integer() {
                diags.push(Diagnostic {
                    line: *line,
                    message: format!(
                        "unsupported charge {c}: trajectory outputs need 2σ to be an integer \
                         (disable field_svg, trajectories_csv and analysis_report for a Loewner-only run)"
                    ),
                });
            }
        }
    }
}

fn check_positive(name: &str, v: f64, line: Option<usize>, diags: &mut Vec<Diagnostic>) {
    if !(v > 0.0 && v.is_finite()) {
        diags.push(Diagnostic { line, message: format!("{name} must be positive, got {v}") });
    }
}

/// Parses and validates a scene. Every problem found is reported, each with
/// the line it comes from when known.
pub fn parse_config(text: &str) -> Result<SceneConfig, ConfigError> {
    let lines = Lines(text);
    let file: SceneFile = toml::from_str(text).map_err(|e| {
        let line = e.span().and_then(|s| lines.of(s));
        ConfigError::single(line, e.message().to_string())
    })?;
    let mut diags = Vec::new();

    let base = match &file.preset {
        Some(name) => match preset(name.get_ref()) {
            Some(p) => Some(p),
            None => {
                return Err(ConfigError::single(
                    lines.of(name.span()),
                    format!("unknown preset {:?} (known: {})", name.get_ref(), PRESETS.join(", ")),
                ))
            }
        },
        None => None,
    };

    let output = file
        .output
        .as_ref()
        .map(|o| *o.get_ref())
        .or(base.as_ref().map(|b| b.output))
        .unwrap_or_default();
    let output_line = file.output.as_ref().and_then(|o| lines.of(o.span()));
    if output.grid < 2 {
        diags.push(Diagnostic { line: output_line, message: format!("grid must be at least 2, got {}", output.grid) });
    }

    let parsed = match (&file.divisor, &base) {
        (Some(d), _) => parse_divisor(d, &lines, &mut diags),
        (None, Some(b)) => Some(ParsedDivisor {
            divisor: b.divisor.clone(),
            growth_lines: vec![None; b.divisor.growth.len()],
            marked_lines: vec![(None, None); b.divisor.marked.len()],
            header: None,
        }),
        (None, None) => {
            diags.push(Diagnostic { line: None, message: "missing [divisor] section".into() });
            None
        }
    };
    if let Some(p) = &parsed {
        check_divisor(p, &output, &mut diags);
    }

    let trace = file.trace.as_ref().map(|t| *t.get_ref()).or(base.as_ref().map(|b| b.trace)).unwrap_or_default();
    if let Err(e) = trace.validate() {
        diags.push(Diagnostic { line: file.trace.as_ref().and_then(|t| lines.of(t.span())), message: e.to_string() });
    }

    let analysis = file.analysis.as_ref().map(|a| *a.get_ref()).or(base.as_ref().map(|b| b.analysis)).unwrap_or_default();
    let analysis_line = file.analysis.as_ref().and_then(|a| lines.of(a.span()));
    check_positive("spiral_threshold", analysis.spiral_threshold, analysis_line, &mut diags);
    check_positive("angle_gap_threshold", analysis.angle_gap_threshold, analysis_line, &mut diags);

    let loewner = file.loewner.as_ref().map(|l| *l.get_ref()).or(base.as_ref().map(|b| b.loewner)).unwrap_or_default();
    let loewner_line = file.loewner.as_ref().and_then(|l| lines.of(l.span()));
    check_positive("T", loewner.t_end, loewner_line, &mut diags);
    check_positive("dt", loewner.dt, loewner_line, &mut diags);
    check_positive("lift", loewner.lift, loewner_line, &mut diags);
    if loewner.hull_samples == 0 {
        diags.push(Diagnostic { line: loewner_line, message: "hull_samples must be at least 1".into() });
    }
    if !(loewner.motion_point.im > 0.0) {
        diags.push(Diagnostic {
            line: loewner_line,
            message: format!("motion_point {} must lie in the upper half-plane", format_complex(loewner.motion_point)),
        });
    }

    let parametrization = match &file.parametrization {
        Some(p) => Parametrization {
            schedules: p.curve.iter().map(|c| Schedule { pieces: c.pieces.clone() }).collect(),
        },
        None => base.as_ref().map(|b| b.parametrization.clone()).unwrap_or_default(),
    };
    if let Some(p) = &parsed {
        if let Err(e) = parametrization.validate(p.divisor.growth.len()) {
            diags.push(Diagnostic {
                line: lines.find("parametrization"),
                message: e.to_string(),
            });
        }
    }

    if !diags.is_empty() {
        return Err(ConfigError { diagnostics: diags });
    }
    Ok(SceneConfig {
        preset: file.preset.map(|p| p.into_inner()),
        seed: file.seed.or(base.as_ref().map(|b| b.seed)).unwrap_or(0),
        divisor: parsed.expect("no diagnostics implies a divisor").divisor,
        parametrization,
        trace,
        analysis,
        loewner,
        output,
    })
}

fn spanned<T>(v: T) -> Spanned<T> {
    Spanned::new(0..0, v)
}

/// Writes a scene as TOML that [`parse_config`] reads back unchanged.
pub fn to_toml(scene: &SceneConfig) -> String {
    let d = &scene.divisor;
    let file = SceneFile {
        preset: scene.preset.clone().map(spanned),
        seed: Some(scene.seed),
        divisor: Some(spanned(DivisorFile {
            domain: spanned(d.domain.name().to_string()),
            growth: spanned(d.growth.iter().map(|g| spanned(g.to_string())).collect()),
            marked: d
                .marked
                .iter()
                .map(|(p, c)| MarkedFile {
                    at: spanned(p.to_string()),
                    charge: spanned(ChargeLiteral::Text(c.to_string())),
                })
                .collect(),
        })),
        parametrization: (!scene.parametrization.schedules.is_empty()).then(|| {
            ParamFile {
                curve: scene
                    .parametrization
                    .schedules
                    .iter()
                    .map(|s| CurveFile { pieces: s.pieces.clone() })
                    .collect(),
            }
        }),
        trace: Some(spanned(scene.trace)),
        analysis: Some(spanned(scene.analysis)),
        loewner: Some(spanned(scene.loewner)),
        output: Some(spanned(scene.output)),
    };
    toml::to_string(&file).expect("scene serialization cannot fail")
}

fn unit(angle: f64) -> SpherePoint {
    SpherePoint::Finite(Complex64::from_polar(1.0, angle))
}

fn z(re: f64, im: f64) -> SpherePoint {
    SpherePoint::Finite(Complex64::new(re, im))
}

/// The three disk scenes: growth points and charges of each figure.
pub fn preset(name: &str) -> Option<SceneConfig> {
    let divisor = match name {
        "fig1" => SymmetricDivisor {
            domain: Domain::Disk,
            growth: vec![z(0.0, -1.0), z(1.0, 0.0), z(0.0, 1.0)],
            marked: vec![(unit(2.0 * PI / 3.0), Charge::integer(-1)), (z(-1.0, 0.0), Charge::integer(-4))],
        },
        "fig2" => SymmetricDivisor {
            domain: Domain::Disk,
            growth: vec![unit(PI / 4.0), z(0.0, -1.0), z(1.0, 0.0)],
            marked: vec![
                (z(0.0, 0.0), Charge::integer(-1)),
                (SpherePoint::Infinity, Charge::integer(-1)),
                (z(-1.0, 0.0), Charge::integer(-3)),
            ],
        },
        "fig3" => SymmetricDivisor {
            domain: Domain::Disk,
            growth: vec![z(0.0, -1.0), unit(PI / 3.0), z(0.0, 1.0)],
            marked: vec![
                (z(-1.0 / 3.0, 0.0), Charge::integer(-1)),
                (z(-3.0, 0.0), Charge::integer(-1)),
                (z(0.5, 0.0), Charge::half_integer(-3)),
                (z(2.0, 0.0), Charge::half_integer(-3)),
            ],
        },
        _ => return None,
    };
    Some(SceneConfig {
        preset: Some(name.to_string()),
        seed: 0,
        divisor,
        parametrization: Parametrization::uniform(),
        trace: TraceParams::default(),
        analysis: AnalysisParams::default(),
        loewner: LoewnerParams::default(),
        output: OutputSpec::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lines_of(err: &ConfigError) -> Vec<Option<usize>> {
        err.diagnostics.iter().map(|d| d.line).collect()
    }

    #[test]
    fn presets_validate_and_are_neutral() {
        for name in PRESETS {
            let p = preset(name).unwrap();
            assert!(p.divisor.validate().is_admissible(), "{name}");
            assert_eq!(p.divisor.total_charge(), -2.0);
            assert_eq!(p.divisor.growth.len(), 3);
        }
        assert!(preset("fig4").is_none());
    }

    #[test]
    fn fig3_expansion() {
        let p = parse_config("preset = \"fig3\"\n").unwrap();
        let g: Vec<Complex64> = p.divisor.growth.iter().map(|g| g.finite().unwrap()).collect();
        assert!((g[0] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((g[1] - Complex64::from_polar(1.0, PI / 3.0)).norm() < 1e-15);
        assert!((g[2] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let m: Vec<(f64, f64)> = p.divisor.marked.iter().map(|(p, c)| (p.finite().unwrap().re, c.value())).collect();
        assert_eq!(m, vec![(-1.0 / 3.0, -1.0), (-3.0, -1.0), (0.5, -1.5), (2.0, -1.5)]);
    }

    #[test]
    fn presets_round_trip() {
        for name in PRESETS {
            let p = preset(name).unwrap();
            let text = to_toml(&p);
            assert_eq!(parse_config(&text).unwrap(), p, "{text}");
        }
    }

    #[test]
    fn custom_scene_round_trips() {
        let text = r#"
seed = 11
[divisor]
domain = "half_plane"
growth = ["-1", "1.5"]
marked = [{ at = "0.5+2i", charge = "-1/2" }, { at = "0.5-2i", charge = "-1/2" }, { at = "inf", charge = -3 }]
[[parametrization.curve]]
pieces = [[0.0, 1.0], [0.05, 0.5]]
[[parametrization.curve]]
pieces = [[0.0, 2.0]]
[loewner]
T = 0.2
motion_point = "0.1+3i"
"#;
        let scene = parse_config(text).unwrap();
        assert_eq!(scene.seed, 11);
        assert_eq!(scene.divisor.marked[0].1, Charge::half_integer(-1));
        assert_eq!(scene.parametrization.schedules[0].pieces, vec![(0.0, 1.0), (0.05, 0.5)]);
        assert_eq!(scene.loewner.t_end, 0.2);
        assert_eq!(scene.loewner.dt, 1e-3);
        assert_eq!(parse_config(&to_toml(&scene)).unwrap(), scene);
    }

    #[test]
    fn empty_growth_is_diagnosed() {
        let text = "[divisor]\ndomain = \"half_plane\"\ngrowth = []\nmarked = [{ at = \"inf\", charge = \"-2\" }]\n";
        let err = parse_config(text).unwrap_err();
        assert!(err.diagnostics.iter().any(|d| d.message.contains("growth point is required") && d.line == Some(3)));
    }

    #[test]
    fn malformed_literal_has_line() {
        let text = "[divisor]\ndomain = \"disk\"\ngrowth = [\"1\",\n  \"1+2x\"]\n";
        let err = parse_config(text).unwrap_err();
        assert_eq!(lines_of(&err), vec![Some(4)]);
        assert!(err.to_string().starts_with("line 4: malformed complex literal"));
    }

    #[test]
    fn unknown_key_has_line() {
        let text = "[divisor]\ndomain = \"disk\"\ngrowth = [\"1\"]\n\n[trace]\nstpe = 0.1\n";
        let err = parse_config(text).unwrap_err();
        assert_eq!(lines_of(&err), vec![Some(6)]);
        assert!(err.diagnostics[0].message.contains("stpe"));
    }

    #[test]
    fn broken_neutrality_is_diagnosed() {
        let text = "[divisor]\ndomain = \"half_plane\"\ngrowth = [\"0\"]\nmarked = [{ at = \"inf\", charge = \"-2\" }]\n";
        let err = parse_config(text).unwrap_err();
        assert!(err.diagnostics[0].message.contains("neutrality"));
        assert_eq!(err.diagnostics[0].line, Some(1));
    }

    #[test]
    fn third_charge_only_for_loewner_runs() {
        let divisor = "[divisor]\ndomain = \"half_plane\"\ngrowth = [\"0\"]\nmarked = [\n  { at = \"2i\", charge = \"1/3\" },\n  { at = \"-2i\", charge = \"1/3\" },\n  { at = \"inf\", charge = \"-11/3\" },\n]\n";
        let err = parse_config(divisor).unwrap_err();
        assert!(err.diagnostics.iter().all(|d| d.message.starts_with("unsupported charge")));
        assert_eq!(lines_of(&err), vec![Some(5), Some(6), Some(7)]);

        let loewner_only = format!(
            "{divisor}[output]\nfield_svg = false\ntrajectories_csv = false\nanalysis_report = false\nmotion_report = true\n"
        );
        let scene = parse_config(&loewner_only).unwrap();
        assert!(!scene.divisor.is_half_integer());
    }

    #[test]
    fn asymmetric_marked_point_points_at_its_line() {
        let text = "[divisor]\ndomain = \"half_plane\"\ngrowth = [\"0\"]\nmarked = [\n  { at = \"1+i\", charge = \"-1\" },\n  { at = \"inf\", charge = \"-2\" },\n]\n";
        let err = parse_config(text).unwrap_err();
        assert!(err.diagnostics.iter().any(|d| d.line == Some(5) && d.message.contains("mirror")));
    }

    #[test]
    fn bad_tolerances_are_diagnosed() {
        let text = "preset = \"fig1\"\n[loewner]\ndt = -1.0\n[trace]\nstep = 0.0\n";
        let err = parse_config(text).unwrap_err();
        assert_eq!(err.diagnostics.len(), 2);
        let err = parse_config("preset = \"fig9\"\n").unwrap_err();
        assert_eq!(lines_of(&err), vec![Some(1)]);
    }

    #[test]
    fn preset_sections_can_be_overridden() {
        let scene = parse_config("preset = \"fig2\"\n[trace]\nstep = 5e-4\n").unwrap();
        assert_eq!(scene.trace.step, 5e-4);
        assert_eq!(scene.trace.capture_radius, TraceParams::default().capture_radius);
        assert_eq!(scene.divisor, preset("fig2").unwrap().divisor);
    }
}
