use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pseudotor::checks::CRITERIA;
use pseudotor::config::ModeName;
use pseudotor::{commands, CliError, Context, RunConfig};

#[derive(Parser)]
#[command(name = "pseudotor", version, about = "Numerical checks of the pseudotoric structure on the flag variety F3")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML configuration file; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed of every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base function mode (mobius or symbol).
    #[arg(long, global = true, value_parser = parse_mode)]
    mode: Option<ModeName>,
    /// Points on each level loop of the base.
    #[arg(long, global = true)]
    loop_points: Option<usize>,
    /// Samples along each of the two torus angles.
    #[arg(long, global = true)]
    angle_res: Option<usize>,
    /// Local error tolerance of the flow integrator.
    #[arg(long, global = true)]
    ode_tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suite and write report.json.
    Verify {
        /// Run only these checks (names as printed in the report).
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
    /// Sample one torus and write torus.json and torus.csv.
    Fiber {
        #[arg(long, allow_hyphen_values = true)]
        level: f64,
        #[arg(long)]
        c1: f64,
        #[arg(long)]
        c2: f64,
    },
    /// Moment polygon of random flags, written to polygon.json.
    Moment {
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
    /// Phase statistics of the residue form over the configured fibres.
    Specialty,
    /// Carry a torus into F_0 and write isotopy.json.
    Isotopy {
        #[arg(long, allow_hyphen_values = true)]
        level: Option<f64>,
        #[arg(long)]
        c1: Option<f64>,
        #[arg(long)]
        c2: Option<f64>,
        #[arg(long)]
        r1: Option<f64>,
        #[arg(long)]
        r2: Option<f64>,
        /// Flow time (defaults to the rotation time of the line).
        #[arg(long)]
        time: Option<f64>,
    },
    /// Orbit of the diagonal torus through a flag, written to orbit.json.
    Section {
        #[arg(long, default_value_t = 6.0)]
        radius: f64,
        #[arg(long, default_value_t = 40)]
        n: usize,
    },
    /// Print the configuration in effect.
    Config {
        /// Print the built-in defaults instead.
        #[arg(long)]
        print_defaults: bool,
    },
}

fn parse_mode(s: &str) -> Result<ModeName, String> {
    match s {
        "mobius" => Ok(ModeName::Mobius),
        "symbol" => Ok(ModeName::Symbol),
        _ => Err(format!("unknown mode '{s}' (expected mobius or symbol)")),
    }
}

fn build_config(g: &Global) -> Result<RunConfig, CliError> {
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(o) = &g.out {
        cfg.out_dir = o.clone();
    }
    if let Some(m) = g.mode {
        cfg.height.mode = m;
    }
    if let Some(n) = g.loop_points {
        cfg.fibers.loop_points = n;
    }
    if let Some(n) = g.angle_res {
        cfg.fibers.angle1 = n;
        cfg.fibers.angle2 = n;
    }
    if let Some(t) = g.ode_tol {
        cfg.tolerances.ode_tol = t;
    }
    Ok(cfg)
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("PSEUDOTOR_THREADS") {
        let n: usize = v.parse().map_err(|_| CliError::Usage(format!("PSEUDOTOR_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    init_threads()?;
    let mut cfg = build_config(&cli.global)?;
    if let Command::Config { print_defaults } = cli.command {
        let c = if print_defaults { RunConfig::default() } else { cfg };
        print!("{}", c.to_toml());
        return Ok(true);
    }
    if let Command::Isotopy { level, c1, c2, r1, r2, .. } = &cli.command {
        let iso = &mut cfg.isotopy;
        iso.level = level.unwrap_or(iso.level);
        iso.label = [c1.unwrap_or(iso.label[0]), c2.unwrap_or(iso.label[1])];
        iso.r1 = r1.unwrap_or(iso.r1);
        iso.r2 = r2.unwrap_or(iso.r2);
    }
    let out = cfg.out_dir.clone();
    let ctx = Context::new(cfg)?;
    match cli.command {
        Command::Verify { only } => {
            let ids = only
                .iter()
                .map(|n| CRITERIA.iter().position(|c| c == n).ok_or_else(|| CliError::Usage(format!("unknown check '{n}'"))))
                .collect::<Result<Vec<_>, _>>()?;
            let report = commands::verify(&ctx, &out, if ids.is_empty() { None } else { Some(&ids) })?;
            for c in &report.checks {
                println!("{}", c.summary_line());
            }
            println!("{}", if report.passed { "all checks passed" } else { "some checks failed" });
            Ok(report.passed)
        }
        Command::Fiber { level, c1, c2 } => commands::fiber(&ctx, &out, level, c1, c2),
        Command::Moment { n } => {
            if n == 0 {
                return Err(CliError::Usage("moment needs at least one sample".into()));
            }
            commands::moment(&ctx, &out, n)
        }
        Command::Specialty => commands::specialty(&ctx, &out),
        Command::Isotopy { time, .. } => commands::isotopy(&ctx, &out, time),
        Command::Section { radius, n } => commands::section(&ctx, &out, radius, n),
        Command::Config { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
