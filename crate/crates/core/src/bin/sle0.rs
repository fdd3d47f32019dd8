use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sle0::config::{parse_config, preset, to_toml, ConfigError, SceneConfig, PRESETS};
use sle0::scene;
use sle0::verify::{verify, Suite};

const EXIT_VALIDATION: u8 = 1;
const EXIT_TOLERANCE: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "sle0", version, about = "Multiple SLE(0) traces, quadratic differentials and Loewner chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace a scene and write its artifacts
    Run {
        #[command(flatten)]
        scene: SceneArgs,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run numerical property suites against a scene
    Verify {
        #[command(flatten)]
        scene: SceneArgs,
        /// all, invariance, derivative, motion or equivalence
        #[arg(long, default_value = "all")]
        suite: String,
        /// Also write the report to this directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inspect the built-in figure scenes
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    Show { name: String },
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SceneArgs {
    /// Scene file (TOML)
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scene name
    #[arg(long)]
    preset: Option<String>,
    /// Loewner time step
    #[arg(long)]
    dt: Option<f64>,
    /// Loewner end time
    #[arg(long = "T")]
    t_end: Option<f64>,
    /// Initial arc-length step for tracing
    #[arg(long)]
    step: Option<f64>,
    /// Arc length after which a trace is abandoned
    #[arg(long = "max-arc")]
    max_arc: Option<f64>,
    #[arg(long)]
    seed: Option<u32>,
}

enum Failure {
    Validation(String),
    Tolerance(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<sle0::Error> for Failure {
    fn from(e: sle0::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

fn load_scene(args: &SceneArgs) -> Result<SceneConfig, Failure> {
    let mut scene = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
            parse_config(&text).map_err(|e| Failure::Validation(format!("{}:\n{e}", path.display())))?
        }
        (None, Some(name)) => preset(name).ok_or_else(|| {
            Failure::Validation(format!("unknown preset {name:?} (known: {})", PRESETS.join(", ")))
        })?,
        (None, None) => return Err(Failure::Validation("either --config or --preset is required".into())),
    };
    let overridden = args.dt.is_some() || args.t_end.is_some() || args.step.is_some() || args.max_arc.is_some() || args.seed.is_some();
    if let Some(v) = args.dt {
        scene.loewner.dt = v;
    }
    if let Some(v) = args.t_end {
        scene.loewner.t_end = v;
    }
    if let Some(v) = args.step {
        scene.trace.step = v;
    }
    if let Some(v) = args.max_arc {
        scene.trace.max_arc_length = v;
    }
    if let Some(v) = args.seed {
        scene.seed = v;
    }
    if overridden {
        // Re-validate through the file format so overrides get the same checks.
        scene = parse_config(&to_toml(&scene)).map_err(|e| Failure::Validation(format!("after command-line overrides:\n{e}")))?;
    }
    Ok(scene)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| io_failure(&path, e))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { scene: args, out } => {
            let scene = load_scene(&args)?;
            let result = scene::run(&scene)?;
            fs::create_dir_all(&out).map_err(|e| io_failure(&out, e))?;
            for a in &result.artifacts {
                write_file(&out, &a.name, &a.contents)?;
            }
            if let Some(report) = &result.report {
                println!(
                    "{} trajectories, {} converging pairs, {} spirals",
                    result.trajectories.len(),
                    report.pairs.len(),
                    report.spirals.len()
                );
            }
            Ok(())
        }
        Command::Verify { scene: args, suite, out } => {
            let suite: Suite = suite.parse().map_err(Failure::Validation)?;
            let scene = load_scene(&args)?;
            let report = verify(&scene, suite)?;
            let text = report.to_string();
            print!("{text}");
            if let Some(dir) = out {
                fs::create_dir_all(&dir).map_err(|e| io_failure(&dir, e))?;
                write_file(&dir, "verify.txt", &text)?;
            }
            if report.passed() {
                Ok(())
            } else {
                let failed = report.checks.iter().filter(|c| !c.passed()).count();
                Err(Failure::Tolerance(format!("{failed} check(s) exceeded tolerance")))
            }
        }
        Command::Preset { action: PresetAction::List } => {
            for name in PRESETS {
                println!("{name}");
            }
            Ok(())
        }
        Command::Preset { action: PresetAction::Show { name } } => {
            let scene = preset(&name).ok_or_else(|| {
                Failure::Validation(format!("unknown preset {name:?} (known: {})", PRESETS.join(", ")))
            })?;
            print!("{}", to_toml(&scene));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_VALIDATION) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Tolerance(msg)) => {
            eprintln!("tolerance breach: {msg}");
            ExitCode::from(EXIT_TOLERANCE)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("runtime failure: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
