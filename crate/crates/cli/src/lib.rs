//! Batch driver: parses a config, runs one subcommand and writes CSV/SVG files.
//!
//! Exit codes: 0 success, 1 input error, 2 solver failure, 3 line-search stall.

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use phaseplug::config::{parse_config, Config};
use phaseplug::io;
use phaseplug::lumped::response_table;
use phaseplug::optimizer::{benchmark_lumped, BfgsStatus, ObjectiveKind, ObjectiveSpec, OptimizeOptions, ShapeProblem};
use phaseplug::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_STALL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "phaseplug", version, about = "Phase-plug shape optimization with viscothermal losses")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override the viscothermal losses switch of the config.
    #[arg(long, global = true)]
    losses: Option<Switch>,

    /// Write the objective gradient of every evaluation.
    #[arg(long, global = true)]
    dump_grad: bool,

    /// Seed for the choice of gradient-check components.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lumped-model response table over the evaluation grid.
    Lumped,
    /// Outlet response of a design over the evaluation grid.
    Sweep {
        /// Design vector CSV; the baseline when omitted.
        #[arg(long)]
        design: Option<PathBuf>,
    },
    /// BFGS run from the baseline.
    Optimize,
    /// Adjoint against finite-difference derivatives at one frequency.
    Gradcheck {
        #[arg(long)]
        design: Option<PathBuf>,
        /// Number of random design entries to check.
        #[arg(long, default_value_t = 10)]
        components: usize,
        /// Frequency in Hz; the geometric center of the configured band when omitted.
        #[arg(long)]
        frequency: Option<f64>,
    },
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run_command<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_solver_failure() {
                EXIT_SOLVER
            } else {
                EXIT_INPUT
            }
        }
    }
}

fn run(cli: &Cli) -> Result<i32> {
    let path = cli.config.as_ref().ok_or_else(|| Error::InvalidInput("--config is required".into()))?;
    let mut config = parse_config(path)?;
    if let Some(s) = cli.losses {
        config.physics.losses = s == Switch::On;
    }
    fs::create_dir_all(&cli.out)?;
    match &cli.command {
        Command::Lumped => lumped(&config, &cli.out),
        Command::Sweep { design } => sweep(&config, &cli.out, design.as_deref()),
        Command::Optimize => optimize(&config, &cli.out, cli.dump_grad),
        Command::Gradcheck { design, components, frequency } => {
            gradcheck(&config, &cli.out, design.as_deref(), *components, *frequency, cli.seed)
        }
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn problem(config: &Config) -> Result<ShapeProblem> {
    ShapeProblem::benchmark(&config.geometry, &config.baseline_walls, config.h, config.physics.clone(), config.eps_s)
}

fn load_design(problem: &ShapeProblem, path: Option<&Path>) -> Result<Vec<f64>> {
    match path {
        Some(p) => io::read_design(BufReader::new(File::open(p)?), &problem.mesh, &problem.space),
        None => Ok(problem.design0.clone()),
    }
}

fn losses_suffix(config: &Config) -> &'static str {
    if config.physics.losses {
        "lossy"
    } else {
        "lossless"
    }
}

fn lumped(config: &Config, out: &Path) -> Result<i32> {
    let params = benchmark_lumped(&config.geometry, &config.physics);
    let table = response_table(&params, &config.evaluation.frequencies())?;
    let mut w = create(out, "lumped.csv")?;
    io::write_lumped(&mut w, &table)?;
    w.flush()?;
    Ok(EXIT_OK)
}

fn sweep(config: &Config, out: &Path, design: Option<&Path>) -> Result<i32> {
    let problem = problem(config)?;
    let design = load_design(&problem, design)?;
    let response = problem.sweep(&design, &config.evaluation.frequencies())?;
    let suffix = losses_suffix(config);
    let mut w = create(out, &format!("response_{suffix}.csv"))?;
    io::write_response(&mut w, &response)?;
    w.flush()?;
    let mut w = create(out, &format!("response_{suffix}.svg"))?;
    io::write_response_svg(&mut w, &response)?;
    w.flush()?;
    let phi = problem.levelset(&design)?;
    let mut w = create(out, "levelset.csv")?;
    io::write_levelset(&mut w, &problem.mesh, &problem.space, &phi)?;
    w.flush()?;
    let cut = problem.cut(&design)?;
    let mut w = create(out, "boundary.csv")?;
    io::write_polyline(&mut w, &cut.polyline())?;
    w.flush()?;
    Ok(EXIT_OK)
}

fn objective_spec(config: &Config) -> ObjectiveSpec {
    ObjectiveSpec {
        kind: config.optimization.objective,
        tikhonov_eps: config.optimization.tikhonov_eps,
        grid: config.frequencies,
    }
}

fn optimize(config: &Config, out: &Path, dump_grad: bool) -> Result<i32> {
    let problem = problem(config)?;
    let spec = objective_spec(config);
    let options = OptimizeOptions {
        max_iters: config.optimization.max_iters,
        grad_tol: config.optimization.grad_tol,
        initial_step: config.optimization.initial_step,
        target_ratio: config.optimization.target_ratio,
    };
    let mut evaluations = 0usize;
    let mut dump_error = None;
    let result = problem.optimize(&spec, &options, |_, ev| {
        evaluations += 1;
        if dump_grad && dump_error.is_none() {
            let written = create(out, &format!("grad_{evaluations:04}.csv")).and_then(|mut w| {
                io::write_gradient(&mut w, &problem.space, &ev.gradient)?;
                Ok(w.flush()?)
            });
            dump_error = written.err();
        }
    })?;
    if let Some(e) = dump_error {
        return Err(e);
    }

    let mut w = create(out, "history.csv")?;
    io::write_history(&mut w, &result.history)?;
    w.flush()?;
    for record in &result.history {
        let mut w = create(out, &format!("boundary_{:04}.csv", record.iteration))?;
        io::write_polyline(&mut w, &record.aux.polyline)?;
        w.flush()?;
    }
    let mut w = create(out, "design.csv")?;
    io::write_design(&mut w, &problem.space, &result.x)?;
    w.flush()?;
    let response = problem.sweep(&result.x, &config.evaluation.frequencies())?;
    let mut w = create(out, "response_final.csv")?;
    io::write_response(&mut w, &response)?;
    w.flush()?;
    let mut w = create(out, "response_final.svg")?;
    io::write_response_svg(&mut w, &response)?;
    w.flush()?;

    let j0 = result.history[0].value;
    println!(
        "status {:?}: J {:.6e} -> {:.6e} (ratio {:.4}) after {} iterations, {} evaluations",
        result.status,
        j0,
        result.value,
        result.value / j0,
        result.history.len() - 1,
        evaluations
    );
    Ok(if result.status == BfgsStatus::LineSearchStall { EXIT_STALL } else { EXIT_OK })
}

fn gradcheck(
    config: &Config,
    out: &Path,
    design: Option<&Path>,
    components: usize,
    frequency: Option<f64>,
    seed: u64,
) -> Result<i32> {
    let problem = problem(config)?;
    let design = load_design(&problem, design)?;
    let n = problem.n_design();
    if components == 0 || components > n {
        return Err(Error::InvalidInput(format!("--components must lie in 1..={n}")));
    }
    let f_hz = frequency.unwrap_or_else(|| (config.frequencies.f_min * config.frequencies.f_max).sqrt());
    if !(f_hz > 0.0 && f_hz.is_finite()) {
        return Err(Error::InvalidInput(format!("frequency must be positive, got {f_hz}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, n, components).into_vec();
    picked.sort_unstable();
    info!("checking components {picked:?} at {f_hz} Hz");

    // derivative of the single-frequency objective built from the configured kind
    let response = problem.sweep(&design, &[f_hz])?;
    let pt = response.points[0];
    let weight = match config.optimization.objective {
        ObjectiveKind::Track => (pt.p_out - pt.p_ideal).conj(),
        ObjectiveKind::Power => -pt.p_out.conj() / pt.p_out.norm_sqr().powi(2),
    };
    let rows: Vec<io::GradcheckRow> = problem
        .gradient_check(&design, f_hz, &picked)?
        .into_iter()
        .map(|c| {
            let adjoint = (weight * c.adjoint).re;
            let fd = (weight * c.fd).re;
            let scale = adjoint.abs().max(fd.abs());
            io::GradcheckRow {
                component: c.component,
                adjoint,
                fd,
                rel_err: if scale > 0.0 { (adjoint - fd).abs() / scale } else { 0.0 },
            }
        })
        .collect();
    let mut w = create(out, "gradcheck.csv")?;
    io::write_gradcheck(&mut w, &rows)?;
    w.flush()?;
    let max = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    println!("max rel_err {max:.3e} over {} components at {f_hz} Hz", rows.len());
    Ok(EXIT_OK)
}
