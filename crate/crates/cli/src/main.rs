mod config;

use std::f64::consts::FRAC_PI_4;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wnl_core::circle::CircleCatParams;
use wnl_core::phase::{CoherentSuperposition, PhaseGrid};
use wnl_core::solver::{certify_negativity, MinimizationSpec, DEFAULT_ABS_TOL};
use wnl_core::sweep::{
    cat_sweep, circle_radial, circle_sweep, default_radii, write_cat_sweep_csv, write_circle_sweep_csv,
    write_radial_csv,
};
use wnl_core::verify::{self, Suite, VerifyOptions};
use wnl_core::wigner::{sample_grid, write_grid_csv, KernelVariant};

use config::{CatSweepConfig, CircleRadialConfig, CircleSweepConfig, GridConfig, VerifyConfig};

#[derive(Parser)]
#[command(name = "wnl", version, about = "Wigner negativity of coherent-state superpositions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample W of a state on a rectangular grid (CSV x,p,w)
    Grid(GridArgs),
    /// Numeric vs analytic critical coherence of two-component cats
    CatSweep(SweepArgs),
    /// Numeric critical coherence and Bessel bound of circle cats
    CircleSweep(SweepArgs),
    /// Exact vs leading-order radial profile of a circle cat
    CircleRadial(Common),
    /// Run the seeded cross-check suites
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Common {
    /// JSON run config; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout if absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Δ tolerance (absolute for cats, relative for circles)
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    common: Common,
    /// State JSON file
    #[arg(long)]
    input: Option<PathBuf>,
    /// Grid size as nx,np
    #[arg(long, value_parser = parse_grid)]
    grid: Option<[usize; 2]>,
    /// Box as xmin,xmax,pmin,pmax
    #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
    bounds: Option<[f64; 4]>,
    /// Also minimize W over the box and print a negativity certificate (JSON) on stdout
    #[arg(long)]
    certify: bool,
    /// Absolute tolerance for the certificate
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

fn parse_list<const N: usize, T: std::str::FromStr>(s: &str) -> Result<[T; N], String> {
    let parts: Vec<T> = s
        .split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| format!("cannot parse `{p}`")))
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|_| format!("expected {N} comma-separated values"))
}

fn parse_grid(s: &str) -> Result<[usize; 2], String> {
    parse_list(s)
}

fn parse_box(s: &str) -> Result<[f64; 4], String> {
    parse_list(s)
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    Verification(String),
    Input(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Input(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Verification(m) | Failure::Input(m) | Failure::Io(m) => m,
        }
    }
}

impl From<wnl_core::Error> for Failure {
    fn from(e: wnl_core::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn io_err(e: io::Error) -> Failure {
    Failure::Io(e.to_string())
}

// a closed downstream pipe (`| head`) is not an error
fn ignore_broken_pipe(r: io::Result<()>) -> io::Result<()> {
    match r {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => other,
    }
}

fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w).and_then(|_| w.flush()).map_err(io_err)
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            ignore_broken_pipe(f(&mut w).and_then(|_| w.flush())).map_err(io_err)
        }
    }
}

fn run_grid(args: GridArgs) -> Result<(), Failure> {
    let cfg: GridConfig = config::load(args.common.config.as_deref(), "grid")?;
    let input = args
        .input
        .or(cfg.input)
        .ok_or_else(|| Failure::Input("grid needs --input <state.json>".into()))?;
    let text = std::fs::read_to_string(&input).map_err(|e| Failure::Io(format!("{}: {e}", input.display())))?;
    let state = CoherentSuperposition::from_json(&text)?;
    let out = args.common.out.or(cfg.out);
    let certify = args.certify || cfg.certify.unwrap_or(false);
    if certify && out.is_none() {
        return Err(Failure::Input("--certify needs --out for the grid CSV".into()));
    }

    let auto = MinimizationSpec::auto(&state);
    let [nx, np] = args.grid.or(cfg.grid).unwrap_or([201, 201]);
    let [x0, x1, p0, p1] = args
        .bounds
        .or(cfg.bounds)
        .unwrap_or([auto.x_min, auto.x_max, auto.p_min, auto.p_max]);
    let grid = PhaseGrid::new(x0, x1, p0, p1, nx, np)?;
    let values = sample_grid(&state, &grid);
    with_output(out.as_deref(), |w| write_grid_csv(w, &grid, &values))?;

    if certify {
        let spec = auto.with_box([x0, x1, p0, p1])?;
        let tol = args.tol.or(cfg.tol).unwrap_or(DEFAULT_ABS_TOL);
        let cert = certify_negativity(&state, &spec, tol)?;
        let json = serde_json::to_string(&cert).map_err(|e| Failure::Io(e.to_string()))?;
        with_output(None, |w| writeln!(w, "{json}"))?;
    }
    Ok(())
}

fn run_cat_sweep(args: SweepArgs) -> Result<(), Failure> {
    let cfg: CatSweepConfig = config::load(args.common.config.as_deref(), "cat-sweep")?;
    let re_betas = cfg
        .re_beta
        .unwrap_or_else(|| (1..=8).map(|i| 0.25 * i as f64).collect());
    let tol = args.tol.or(cfg.tol).unwrap_or(1e-3);
    let rows = cat_sweep(&re_betas, cfg.theta.unwrap_or(FRAC_PI_4), cfg.phi.unwrap_or(0.0), tol)?;
    with_output(args.common.out.or(cfg.out).as_deref(), |w| write_cat_sweep_csv(w, &rows))
}

fn run_circle_sweep(args: SweepArgs) -> Result<(), Failure> {
    let cfg: CircleSweepConfig = config::load(args.common.config.as_deref(), "circle-sweep")?;
    let ds = cfg.d.unwrap_or_else(|| (1..=8).map(f64::from).collect());
    let tol = args.tol.or(cfg.tol).unwrap_or(1e-3);
    let rows = circle_sweep(cfg.m.unwrap_or(64), &ds, tol)?;
    with_output(args.common.out.or(cfg.out).as_deref(), |w| write_circle_sweep_csv(w, &rows))
}

fn run_circle_radial(args: Common) -> Result<(), Failure> {
    let cfg: CircleRadialConfig = config::load(args.config.as_deref(), "circle-radial")?;
    let params = CircleCatParams::new(cfg.m.unwrap_or(64), cfg.d.unwrap_or(8.0), cfg.delta.unwrap_or(1.0))?;
    let samples = cfg.samples.unwrap_or(400);
    if samples == 0 {
        return Err(Failure::Input("samples must be positive".into()));
    }
    let radii = match cfg.r_max {
        Some(r_max) if r_max > 0.0 && r_max.is_finite() => {
            let n = samples.max(2);
            (0..n).map(|i| r_max * i as f64 / (n - 1) as f64).collect()
        }
        Some(r_max) => return Err(Failure::Input(format!("r_max {r_max} must be positive"))),
        None => default_radii(params, samples),
    };
    let rows = circle_radial(params, &radii)?;
    with_output(args.out.or(cfg.out).as_deref(), |w| write_radial_csv(w, &rows))
}

fn run_verify(args: VerifyArgs) -> Result<(), Failure> {
    let cfg: VerifyConfig = config::load(args.common.config.as_deref(), "verify")?;
    let opts = VerifyOptions {
        seed: args.seed.or(cfg.seed).unwrap_or(0),
        suites: cfg.suites.unwrap_or_else(|| Suite::ALL.to_vec()),
        kernel: if args.inject_fault {
            KernelVariant::Flipped
        } else {
            KernelVariant::Standard
        },
    };
    let report = verify::run(&opts)?;
    let text = report.render();
    with_output(args.common.out.or(cfg.out).as_deref(), |w| w.write_all(text.as_bytes()))?;
    if report.passed() {
        Ok(())
    } else {
        let names: Vec<String> = report.failures().map(|c| format!("{}/{}", c.suite, c.check)).collect();
        Err(Failure::Verification(format!("failed checks: {}", names.join(", "))))
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("WNL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::Input(format!("WNL_THREADS={raw} is not a non-negative integer")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Input(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| match cli.command {
        Command::Grid(a) => run_grid(a),
        Command::CatSweep(a) => run_cat_sweep(a),
        Command::CircleSweep(a) => run_circle_sweep(a),
        Command::CircleRadial(a) => run_circle_radial(a),
        Command::Verify(a) => run_verify(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("wnl: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
