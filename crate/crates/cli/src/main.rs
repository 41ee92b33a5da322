use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use shapeprog::dsl::format_program;
use shapeprog::gradients::GradCheckConfig;
use shapeprog::io::{read_obj, read_ply, read_xyz, sample_mesh, write_binvox, write_ply, write_xyz};
use shapeprog::optimizer::{trace_to_csv, trace_to_json};
use shapeprog::{
    evaluate_loss, finite_difference_check, fit, lower_program, parse_program, sample_points, validate_program,
    voxelize, CoveragePower, Error, LossConfig, LossKind, Method, OptimConfig, PointCloud, Program, Reduce,
    RenderConfig, StatementRegistry,
};

const DEFAULT_SEED: u64 = 0;

#[derive(Parser)]
#[command(name = "shapeprog", version, about = "Compile, render and fit 3D shape programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, validate and lower a program to primitive-set JSON.
    Compile {
        program: PathBuf,
        /// Write JSON here instead of standard output.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Sample points on the program's surface.
    Render {
        program: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        /// Output cloud; `.ply` writes ASCII PLY, anything else XYZ.
        #[arg(long)]
        out: PathBuf,
    },
    /// Voxelize the program into a binvox grid.
    Voxelize {
        program: PathBuf,
        #[arg(long, default_value_t = 32)]
        dim: usize,
        /// Margin around the bounding box, as a fraction of its largest side.
        #[arg(long, default_value_t = 0.05)]
        pad: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the loss of a program against a target.
    Loss {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        loss: LossArgs,
        #[command(flatten)]
        sampling: Sampling,
        /// Print the shortest round-trip value instead of six decimals.
        #[arg(long)]
        full_precision: bool,
    },
    /// Fit the program's continuous parameters to a target.
    Fit {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        loss: LossArgs,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long, default_value_t = 0.01)]
        lr: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Adaptive)]
        method: MethodArg,
        /// Draw fresh surface samples every step.
        #[arg(long)]
        reseed: bool,
        /// Stop when the relative loss change falls to this.
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
        /// Loss trace; `.json` writes JSON, anything else CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Compare analytic gradients with central finite differences.
    Gradcheck {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        loss: LossArgs,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long, default_value_t = 1e-5)]
        h: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Inputs {
    #[arg(long)]
    program: PathBuf,
    /// Target cloud (`.xyz`, `.ply`) or mesh (`.obj`, sampled with
    /// `--points` and `--seed`).
    #[arg(long)]
    target: PathBuf,
}

#[derive(Args)]
struct Sampling {
    #[arg(long, default_value_t = 5000)]
    points: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Sample cylinder side walls only.
    #[arg(long)]
    no_caps: bool,
}

impl Sampling {
    fn render(&self) -> RenderConfig {
        RenderConfig {
            points: self.points,
            include_caps: !self.no_caps,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    Chamfer,
    Coverage,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Fwd,
    Bwd,
    Sym,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReduceArg {
    Mean,
    Sum,
}

#[derive(Clone, Copy, ValueEnum)]
enum PowerArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Gd,
    Momentum,
    Adaptive,
}

#[derive(Args)]
struct LossArgs {
    #[arg(long, value_enum, default_value_t = LossArg::Chamfer)]
    loss: LossArg,
    #[arg(long, value_enum, default_value_t = Direction::Sym)]
    direction: Direction,
    #[arg(long, value_enum, default_value_t = ReduceArg::Mean)]
    reduce: ReduceArg,
    #[arg(long, value_enum, default_value_t = PowerArg::One)]
    power: PowerArg,
}

impl LossArgs {
    fn config(&self) -> LossConfig {
        let kind = match (self.loss, self.direction) {
            (LossArg::Coverage, _) => LossKind::Coverage,
            (LossArg::Chamfer, Direction::Fwd) => LossKind::ChamferForward,
            (LossArg::Chamfer, Direction::Bwd) => LossKind::ChamferBackward,
            (LossArg::Chamfer, Direction::Sym) => LossKind::ChamferSymmetric,
        };
        LossConfig {
            kind,
            chamfer_reduce: match self.reduce {
                ReduceArg::Mean => Reduce::Mean,
                ReduceArg::Sum => Reduce::Sum,
            },
            coverage_power: match self.power {
                PowerArg::One => CoveragePower::One,
                PowerArg::Two => CoveragePower::Two,
            },
        }
    }
}

enum Failure {
    Usage(String),
    Input(String),
    NonFinite(String),
    GradCheck(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::NonFinite(_) => 3,
            Failure::GradCheck(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::NonFinite(m) | Failure::GradCheck(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::NonFinite { .. } => Failure::NonFinite(msg),
            Error::InvalidStep(_) | Error::InvalidConfig(_) | Error::InvalidCount => Failure::Usage(msg),
            _ => Failure::Input(msg),
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn read_text(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, data: impl AsRef<[u8]>) -> Outcome {
    fs::write(path, data).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn in_file<T>(path: &Path, r: shapeprog::Result<T>) -> Outcome<T> {
    r.map_err(|e| {
        let f = Failure::from(e);
        match f {
            Failure::Input(m) => Failure::Input(format!("{}: {m}", path.display())),
            other => other,
        }
    })
}

fn load_program(path: &Path, registry: &StatementRegistry) -> Outcome<Program> {
    let program = in_file(path, parse_program(&read_text(path)?, registry))?;
    let diagnostics = validate_program(&program, registry);
    if !diagnostics.is_empty() {
        return Err(Failure::Input(format!("{}: {}", path.display(), Error::Invalid(diagnostics))));
    }
    Ok(program)
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

fn load_target(path: &Path, sampling: &Sampling) -> Outcome<PointCloud> {
    let cloud = match extension(path).as_str() {
        "xyz" => in_file(path, read_xyz(&read_text(path)?))?,
        "ply" => in_file(path, read_ply(&read_text(path)?))?,
        "obj" => {
            let mesh = in_file(path, read_obj(&read_text(path)?))?;
            in_file(path, sample_mesh(&mesh, sampling.points, sampling.seed))?
        }
        other => {
            return Err(Failure::Input(format!(
                "{}: unsupported target format `{other}` (expected xyz, ply or obj)",
                path.display()
            )))
        }
    };
    if cloud.is_empty() {
        return Err(Failure::Input(format!("{}: target has no points", path.display())));
    }
    Ok(cloud)
}

fn run(command: Command) -> Outcome {
    let registry = StatementRegistry::builtin();
    match command {
        Command::Compile { program, json } => {
            let p = load_program(&program, &registry)?;
            let set = lower_program(&p, &registry)?;
            let text = set.to_json();
            match json {
                Some(out) => write_file(&out, text + "\n")?,
                None => println!("{text}"),
            }
            eprintln!("{} primitives", set.len());
        }
        Command::Render { program, sampling, out } => {
            let p = load_program(&program, &registry)?;
            let set = lower_program(&p, &registry)?;
            let cloud = sample_points(&set, sampling.points, sampling.seed, !sampling.no_caps)?;
            let text = match extension(&out).as_str() {
                "ply" => write_ply(&cloud),
                _ => write_xyz(&cloud),
            };
            write_file(&out, text)?;
            eprintln!("wrote {} points to {}", cloud.len(), out.display());
        }
        Command::Voxelize { program, dim, pad, out } => {
            let p = load_program(&program, &registry)?;
            let set = lower_program(&p, &registry)?;
            let grid = voxelize(&set, dim, pad)?;
            write_file(&out, write_binvox(&grid))?;
            eprintln!("{} of {} voxels occupied", grid.count_occupied(), grid.occupancy.len());
        }
        Command::Loss {
            inputs,
            loss,
            sampling,
            full_precision,
        } => {
            let p = load_program(&inputs.program, &registry)?;
            let target = load_target(&inputs.target, &sampling)?;
            let value = evaluate_loss(&p, &registry, &target, &loss.config(), &sampling.render(), sampling.seed)?;
            if !value.is_finite() {
                return Err(Failure::NonFinite(format!("loss is {value}")));
            }
            if full_precision {
                println!("{value}");
            } else {
                println!("{value:.6}");
            }
        }
        Command::Fit {
            inputs,
            loss,
            sampling,
            steps,
            lr,
            method,
            reseed,
            tol,
            out,
            trace,
        } => {
            let p = load_program(&inputs.program, &registry)?;
            let target = load_target(&inputs.target, &sampling)?;
            let cfg = OptimConfig {
                steps,
                step_size: lr,
                method: match method {
                    MethodArg::Gd => Method::Gd,
                    MethodArg::Momentum => Method::Momentum,
                    MethodArg::Adaptive => Method::Adaptive,
                },
                reseed_per_step: reseed,
                convergence_tol: tol,
                loss: loss.config(),
                render: sampling.render(),
                seed: sampling.seed,
            };
            let result = fit(&p, &registry, &target, &cfg)?;
            write_file(&out, format_program(&result.program) + "\n")?;
            if let Some(path) = trace {
                let text = match extension(&path).as_str() {
                    "json" => trace_to_json(&result.trace) + "\n",
                    _ => trace_to_csv(&result.trace),
                };
                write_file(&path, text)?;
            }
            match (result.trace.first(), result.best_loss(), result.best_step) {
                (Some(first), Some(best), Some(step)) => {
                    eprintln!("{} steps, loss {first} -> {best} (best at step {step})", result.trace.len())
                }
                _ => eprintln!("no steps taken"),
            }
        }
        Command::Gradcheck {
            inputs,
            loss,
            sampling,
            h,
            tol,
            json,
        } => {
            let p = load_program(&inputs.program, &registry)?;
            let target = load_target(&inputs.target, &sampling)?;
            let cfg = GradCheckConfig { h, tolerance: tol };
            let report = finite_difference_check(
                &p,
                &registry,
                &target,
                &loss.config(),
                &sampling.render(),
                sampling.seed,
                &cfg,
            )?;
            if let Some(path) = json {
                write_file(&path, report.to_json() + "\n")?;
            }
            let failures = report.failures().count();
            eprintln!(
                "{} slots, {} boundary, {} failed (h = {h}, tol = {tol})",
                report.slots.len(),
                report.boundary_count(),
                failures
            );
            for s in report.failures() {
                eprintln!(
                    "  {:?}: analytic {} numeric {} rel {:e}",
                    s.slot, s.analytic, s.numeric, s.relative_error
                );
            }
            if failures > 0 {
                return Err(Failure::GradCheck(format!("{failures} slots disagree")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
