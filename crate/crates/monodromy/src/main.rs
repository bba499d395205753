use clap::{Parser, Subcommand, ValueEnum};
use monodromy::commands::{self, parse_complex, Artifact, BranchSpec, FunctorMode, Side};
use monodromy::error::{CliError, EXIT_INPUT};
use monodromy::report::Report;
use monodromy::RunConfig;
use monodromy_core::diffeq::DEFAULT_TRUNCATION;
use monodromy_core::functor::{DEFAULT_NODES, DEFAULT_RELATION_SAMPLES, FUNCTOR_TOL};
use monodromy_core::sample::DEFAULT_SEED;
use monodromy_core::C64;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "monodromy")]
#[command(about = "Connection matrices of difference equations and the Yangian / quantum loop algebra functors")]
#[command(version)]
struct Cli {
    /// Step of the difference equations, as re,im
    #[arg(long, global = true, value_parser = parse_complex)]
    hbar: Option<C64>,

    /// Logarithm domain: "strip" or a JSON file with {"left": x} or {"points": [...]}
    #[arg(long, global = true, default_value = "strip")]
    branch: BranchSpec,

    /// Seed for every sampled check point
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Trapezoidal nodes per contour circle
    #[arg(long, global = true, default_value_t = DEFAULT_NODES)]
    nodes: usize,

    /// Product length of the fundamental solutions
    #[arg(long, global = true, default_value_t = DEFAULT_TRUNCATION)]
    trunc: usize,

    /// Tolerance of the relation checks and module comparisons
    #[arg(long, global = true, default_value_t = FUNCTOR_TOL)]
    tol: f64,

    /// Sample points per relation check
    #[arg(long, global = true, default_value_t = DEFAULT_RELATION_SAMPLES)]
    samples: usize,

    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the command's artifact (module, system, character or SVG) here
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Apply {
    #[value(name = "F")]
    F,
    #[value(name = "G")]
    G,
    Roundtrip,
    Shift,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SideArg {
    #[value(name = "Y")]
    Y,
    #[value(name = "U")]
    U,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MapArg {
    #[value(name = "e_pi")]
    EPi,
}

#[derive(Subcommand)]
enum Command {
    /// Connection matrix S(z) of a difference system
    Forward {
        /// Difference system JSON
        input: PathBuf,
    },
    /// Abelian difference system with a given connection matrix and A0
    Inverse {
        /// Connection data JSON carrying "S" and "A0"
        input: PathBuf,
    },
    /// Apply F or G, or check a round trip or shift compatibility
    Functor {
        #[arg(value_enum)]
        apply: Apply,
        /// Module JSON
        input: PathBuf,
        /// Shift parameter for `functor shift`, as re,im
        #[arg(long, value_parser = parse_complex)]
        by: Option<C64>,
    },
    /// q-character of a module
    Qchar {
        /// Module JSON
        input: PathBuf,
        /// Y for the Yangian character, U for the loop character
        #[arg(long, value_enum, default_value_t = SideArg::Y)]
        side: SideArg,
        /// Send the Yangian character through e_pi
        #[arg(long, value_enum)]
        map: Option<MapArg>,
        /// Verify e_pi(chi_Y(V)) = chi_U(F(V))
        #[arg(long)]
        check_diagram: bool,
    },
    /// SVG pole map of a module, system or connection matrix
    Plot {
        input: PathBuf,
    },
    /// Regenerate the bundled fixtures into a directory
    Bootstrap {
        dir: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Forward { .. } => "forward",
            Command::Inverse { .. } => "inverse",
            Command::Functor { apply: Apply::F, .. } => "functor F",
            Command::Functor { apply: Apply::G, .. } => "functor G",
            Command::Functor { apply: Apply::Roundtrip, .. } => "functor roundtrip",
            Command::Functor { apply: Apply::Shift, .. } => "functor shift",
            Command::Qchar { .. } => "qchar",
            Command::Plot { .. } => "plot",
            Command::Bootstrap { .. } => "bootstrap",
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("MONODROMY_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("MONODROMY_THREADS={v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(format!("cannot size the thread pool: {e}")))
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<monodromy::Outcome, CliError> {
    let load = |p: &Path| commands::load(p);
    match &cli.command {
        Command::Forward { input } => commands::monodromy_forward(load(input)?, cfg),
        Command::Inverse { input } => commands::monodromy_inverse(load(input)?, cfg),
        Command::Functor { apply, input, by } => {
            let mode = match apply {
                Apply::F => FunctorMode::F,
                Apply::G => FunctorMode::G,
                Apply::Roundtrip => FunctorMode::Roundtrip,
                Apply::Shift => FunctorMode::Shift,
            };
            commands::functor(mode, load(input)?, *by, cfg)
        }
        Command::Qchar { input, side, map, check_diagram } => {
            let side = match side {
                SideArg::Y => Side::Yangian,
                SideArg::U => Side::Loop,
            };
            commands::qchar(load(input)?, side, map.is_some(), *check_diagram, cfg)
        }
        Command::Plot { input } => commands::plot(load(input)?, cfg),
        Command::Bootstrap { dir } => commands::bootstrap(dir, cfg),
    }
}

fn render(cli: &Cli, report: &Report) -> String {
    match cli.format {
        Format::Json => report.to_json(),
        Format::Table => report.to_table(),
    }
}

fn emit(cli: &Cli, mut outcome: monodromy::Outcome) -> Result<u8, CliError> {
    let code = outcome.exit_code();
    let mut stdout = std::io::stdout().lock();
    match (outcome.artifact.take(), &cli.out) {
        (Some(Artifact::Json(v)), Some(path)) => {
            let mut text = serde_json::to_string_pretty(&v).expect("artifact serializes");
            text.push('\n');
            std::fs::write(path, text)?;
        }
        (Some(Artifact::Json(v)), None) => outcome.report.output = Some(v),
        (Some(Artifact::Svg(svg)), Some(path)) => std::fs::write(path, svg)?,
        (Some(Artifact::Svg(svg)), None) => {
            stdout.write_all(svg.as_bytes())?;
            return Ok(code);
        }
        (None, _) => {}
    }
    stdout.write_all(render(cli, &outcome.report).as_bytes())?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = RunConfig {
        hbar: cli.hbar,
        branch: cli.branch.clone(),
        seed: cli.seed,
        nodes: cli.nodes,
        truncation: cli.trunc,
        tol: cli.tol,
        samples: cli.samples,
    };
    let result = configure_threads().and_then(|_| run(&cli, &cfg)).and_then(|o| emit(&cli, o));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Numeric(e)) => {
            let mut report = Report::new(cli.command.name(), serde_json::Value::Null);
            report.fail(e.name(), e.to_string());
            print!("{}", render(&cli, &report));
            ExitCode::from(monodromy::error::EXIT_NUMERIC)
        }
        Err(e) => {
            eprintln!("monodromy: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
