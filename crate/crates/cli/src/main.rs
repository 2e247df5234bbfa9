//! `radshoot` command-line driver.
//!
//! Every subcommand reads one JSON [`RunConfig`] (`--config`, defaulting to the built-in
//! double-power problem with `n = 3, p = 2, q = 7, Q = 9, h ≡ 1`), applies command-line
//! overrides, writes its artifacts into the output directory and prints a one-line summary.
//!
//! Config schema (all blocks except `problem` are optional):
//!
//! ```json
//! {
//!   "problem": {"n": 3, "p": 2, "q": 7, "Q": 9, "delta": 0,
//!               "h": {"type": "const", "params": [1]}, "varpi": null, "oracle_mode": false},
//!   "policy": {"forward_span": 200, "backward_span": 40, "t_end": null, "eps_origin": 1e-6,
//!              "eps_p": 1e-4, "p_dwell": 1, "strip_margin": 0.1, "origin_capture": true,
//!              "p_capture": true, "strip_exit": true, "rtol": 1e-10, "atol": 1e-10,
//!              "max_steps": 2000000},
//!   "trace": {"seed_offset": 30, "max_refinements": 12, "max_angle_gap": 0.785,
//!             "estimate_seed_error": false},
//!   "shoot": {"d": null},
//!   "sequence": {"k_max": 2, "tol_d": null},
//!   "manifold": {"kind": "unstable-plus", "tau": 2, "param_min": null, "param_max": null,
//!                "count": 300, "k_max": 2},
//!   "portrait": {"grid": "-1.5:1.5:31,-1.5:1.5:31", "t": 0},
//!   "jobs": 0,
//!   "output_dir": "radshoot-out"
//! }
//! ```
//!
//! `h.params` is `[h0]` for `const` and `[h0, h_inf, r_c, m]` for `rational`. Omitting `Q`
//! selects the pure power `f(u) = u|u|^(q-2)`, accepted only with `oracle_mode`.
//! The output directory is taken from `--out`, then `RADSHOOT_OUT`, then `output_dir`.
//!
//! Exit codes: 0 success, 2 invalid problem or configuration, 3 numerical failure,
//! 4 validation failure, 1 I/O error.

mod portrait;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use radshoot::manifolds::{intersect, trace_manifold, ManifoldCurve, ManifoldKind};
use radshoot::num::logspace;
use radshoot::oracle::validate_suite;
use radshoot::parallel::Parallelism;
use radshoot::shooting::{find_sequences, shoot};
use radshoot::{Error, Problem, RunConfig, Sign};

#[derive(Parser)]
#[command(
    name = "radshoot",
    version,
    about = "Shooting and manifold tracing for radial p-Laplace problems"
)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides RADSHOOT_OUT and the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Maximum concurrent shots; 0 uses every core.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one regular solution from u(0) = d and classify it.
    Shoot {
        #[arg(long, allow_hyphen_values = true)]
        d: Option<f64>,
    },
    /// Locate the thresholds A_k, B_k and their lower windows.
    Sequence {
        #[arg(long = "kmax")]
        k_max: Option<usize>,
        #[arg(long)]
        tol_d: Option<f64>,
    },
    /// Trace a manifold slice at log-radius tau; unstable slices are intersected with both
    /// stable slices.
    Manifold {
        /// unstable-plus | unstable-minus | stable-plus | stable-minus (or u+, u-, s+, s-).
        #[arg(long)]
        kind: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
    },
    /// Vector field, isoclines and critical points on a grid `xmin:xmax:nx,ymin:ymax:ny`.
    Portrait {
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        /// Log-radius at which the field is frozen.
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
    },
    /// Run the closed-form and energy-identity checks.
    Validate,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn config(error: anyhow::Error) -> Self {
        Failure { code: 2, error }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidSpec { .. } | Error::InvalidArgument(_) => 2,
            _ => 3,
        };
        Failure {
            code,
            error: e.into(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 1,
            error: e.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: 1, error }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(Failure::config)?;
            RunConfig::from_json(&text)
                .with_context(|| format!("parsing {}", path.display()))
                .map_err(Failure::config)?
        }
        None => RunConfig::default(),
    };
    if let Some(jobs) = cli.jobs {
        cfg.jobs = jobs;
    }
    match &cli.command {
        Command::Shoot { d } => cfg.shoot.d = d.or(cfg.shoot.d),
        Command::Sequence { k_max, tol_d } => {
            cfg.sequence.k_max = k_max.unwrap_or(cfg.sequence.k_max);
            cfg.sequence.tol_d = tol_d.or(cfg.sequence.tol_d);
        }
        Command::Manifold { kind, tau, count } => {
            if let Some(k) = kind {
                cfg.manifold.kind = k.parse::<ManifoldKind>()?;
            }
            cfg.manifold.tau = tau.unwrap_or(cfg.manifold.tau);
            cfg.manifold.count = count.unwrap_or(cfg.manifold.count);
        }
        Command::Portrait { grid, t } => {
            if let Some(g) = grid {
                cfg.portrait.grid = g.clone();
            }
            cfg.portrait.t = t.unwrap_or(cfg.portrait.t);
        }
        Command::Validate => {}
    }
    Ok(cfg)
}

fn output_dir(cli: &Cli, cfg: &RunConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os("RADSHOOT_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(&cfg.output_dir))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| anyhow!(e))?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let cfg = load_config(&cli)?;
    let spec = cfg.problem.to_spec()?;
    let pb = Problem::new(spec)?;
    let out = output_dir(&cli, &cfg);
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let par = Parallelism::with_jobs(cfg.jobs);

    match &cli.command {
        Command::Shoot { .. } => {
            let d = cfg.shoot.d.ok_or_else(|| {
                Failure::config(anyhow!("shoot needs --d or shoot.d in the config"))
            })?;
            let shot = shoot(d, &pb, &cfg.policy)?;
            write_json(&out.join("shot.json"), &shot)?;
            let mut w = create(&out.join("shot_trajectory.csv"))?;
            shot.trajectory.write_csv(&pb, &mut w)?;
            w.flush()?;
            println!("shoot {}", shot.summary());
        }
        Command::Sequence { .. } => {
            let mut report = find_sequences(
                &pb,
                cfg.sequence.k_max,
                cfg.sequence.tol_d,
                &cfg.policy,
                &par,
            )?;
            for (wit, shot) in report.witnesses.iter_mut().zip(&report.witness_shots) {
                let letter = if wit.side == Sign::Plus { "A" } else { "B" };
                let name = format!("witness_{letter}{}.csv", wit.k);
                let mut w = create(&out.join(&name))?;
                shot.trajectory.write_csv(&pb, &mut w)?;
                w.flush()?;
                wit.trajectory_file = Some(name);
            }
            write_json(&out.join("sequence.json"), &report)?;
            println!(
                "sequence k_max={} A={} B={} shots={}",
                report.k_max,
                fmt_list(&report.a),
                fmt_list(&report.b),
                report.shots
            );
        }
        Command::Manifold { .. } => run_manifold(&cfg, &pb, &par, &out)?,
        Command::Portrait { .. } => {
            let grid = portrait::Grid::parse(&cfg.portrait.grid).map_err(Failure::config)?;
            let summary = portrait::write_portrait(&pb, &grid, cfg.portrait.t, &out)?;
            println!("{summary}");
        }
        Command::Validate => {
            let report = validate_suite(&pb, &cfg.policy);
            write_json(&out.join("validation.json"), &report)?;
            let failed: Vec<&str> = report
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.name.as_str())
                .collect();
            if report.passed {
                println!("validate passed ({} checks)", report.checks.len());
            } else {
                println!("validate FAILED: {}", failed.join(", "));
                return Ok(4);
            }
        }
    }
    Ok(0)
}

fn fmt_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|a| format!("{a:.10}")).collect();
    format!("[{}]", items.join(", "))
}

fn slice_grid(kind: ManifoldKind, cfg: &RunConfig, pb: &Problem) -> Vec<f64> {
    let m = &cfg.manifold;
    let (lo, hi) = if kind.is_stable() {
        (1e-3, 1e4)
    } else {
        let d = if kind.sign() == Sign::Plus {
            pb.d_plus()
        } else {
            pb.d_minus()
        };
        (1e-3 * d, (1.0 - 1e-3) * d)
    };
    // explicit bounds apply to the requested slice only
    let (lo, hi) = if kind == m.kind {
        (m.param_min.unwrap_or(lo), m.param_max.unwrap_or(hi))
    } else {
        (lo, hi)
    };
    logspace(lo, hi, m.count.max(2))
}

fn write_curve(curve: &ManifoldCurve, out: &Path) -> Result<String, Failure> {
    let name = format!("manifold_{}.csv", curve.kind.name());
    let mut w = create(&out.join(&name))?;
    curve.write_csv(&mut w)?;
    w.flush()?;
    Ok(name)
}

fn run_manifold(
    cfg: &RunConfig,
    pb: &Problem,
    par: &Parallelism,
    out: &Path,
) -> Result<(), Failure> {
    let m = &cfg.manifold;
    let grid = slice_grid(m.kind, cfg, pb);
    let curve = trace_manifold(m.kind, m.tau, &grid, pb, &cfg.policy, &cfg.trace, par)?;
    write_curve(&curve, out)?;
    if m.kind.is_stable() {
        println!(
            "manifold {} tau={} points={} refinements={}",
            m.kind.name(),
            m.tau,
            curve.len(),
            curve.refinements
        );
        return Ok(());
    }
    let mut stables = Vec::new();
    for kind in [ManifoldKind::StablePlus, ManifoldKind::StableMinus] {
        let g = slice_grid(kind, cfg, pb);
        let c = trace_manifold(kind, m.tau, &g, pb, &cfg.policy, &cfg.trace, par)?;
        write_curve(&c, out)?;
        stables.push(c);
    }
    let refs: Vec<&ManifoldCurve> = stables.iter().collect();
    let records = intersect(&curve, &refs, m.k_max, pb, &cfg.policy, &cfg.trace)?;
    write_json(&out.join("intersections.json"), &records)?;
    let ds: Vec<f64> = records.iter().map(|r| r.d_at).collect();
    println!(
        "manifold {} tau={} points={} intersections d={}",
        m.kind.name(),
        m.tau,
        curve.len(),
        fmt_list(&ds)
    );
    Ok(())
}
