use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use obstacle_liouville::evolution::{simulate, Trajectory};
use obstacle_liouville::io::{
    field_to_pgm, load_config, read_reaction_table, write_field_csv, write_profile_csv,
};
use obstacle_liouville::liouville::{
    check_liouville, LiouvilleOptions, LiouvilleReport, SlideOutcome,
};
use obstacle_liouville::reaction::{cubic_bistable, BistableSpec};
use obstacle_liouville::selftest::run_selftest;
use obstacle_liouville::wave::{front_residual, solve_front_with, WaveOptions, WaveProfile};

mod manifest;

use manifest::Session;

#[derive(Parser)]
#[command(
    name = "obstacle-liouville",
    version,
    about = "Bistable nonlocal invasion past an obstacle"
)]
struct Cli {
    /// Directory for snapshots, reports and the manifest.
    #[arg(long, global = true, default_value = "out")]
    output_dir: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print nothing on success.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a config to its end time and write snapshots.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compute a travelling front of the one-dimensional equation.
    Wave(WaveArgs),
    /// Run a config to steady state and check that it is identically one.
    CheckLiouville {
        #[arg(long)]
        config: PathBuf,
        /// Accept the steady state when its minimum is at least 1 - tol.
        #[arg(long, default_value_t = 0.05, value_parser = open_unit)]
        tol_one: f64,
        /// Run on a non-convex obstacle; the report is then non-certifying.
        #[arg(long)]
        allow_nonconvex: bool,
    },
    /// Small deterministic checks of the operator and the time stepper.
    Selftest,
}

#[derive(Args, Serialize)]
struct WaveArgs {
    /// Middle zero of the cubic `s (1 - s) (s - theta)`.
    #[arg(long, value_parser = open_unit, required_unless_present = "reaction_table")]
    theta: Option<f64>,
    /// Samples `u,f(u)[,f'(u)]` of a tabulated reaction instead of the cubic.
    #[arg(long, conflicts_with = "theta")]
    reaction_table: Option<PathBuf>,
    /// Fractional order.
    #[arg(long, default_value_t = 0.5, value_parser = open_unit)]
    s: f64,
    /// Nodes cover [-halfwidth, halfwidth].
    #[arg(long, default_value_t = 40.0)]
    halfwidth: f64,
    /// Node spacing; must divide the half-width.
    #[arg(long, default_value_t = 0.02)]
    h: f64,
    #[arg(long, default_value_t = 1.0)]
    c_norm: f64,
    /// Node offset of the pinned level 1/2 from the middle node.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    phase_shift: i64,
}

fn open_unit(text: &str) -> Result<f64, String> {
    let v: f64 = text.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 1)"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let name = match &cli.command {
        Command::Simulate { .. } => "simulate",
        Command::Wave(_) => "wave",
        Command::CheckLiouville { .. } => "check-liouville",
        Command::Selftest => "selftest",
    };
    let mut session = match Session::new(&cli.output_dir, name) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    let outcome = match &cli.command {
        Command::Simulate { config } => run_simulate(&mut session, config, cli.quiet),
        Command::Wave(args) => run_wave(&mut session, args, cli.quiet),
        Command::CheckLiouville {
            config,
            tol_one,
            allow_nonconvex,
        } => run_check(&mut session, config, *tol_one, *allow_nonconvex, cli.quiet),
        Command::Selftest => run_self(&mut session, cli.quiet),
    };
    let error = outcome.as_ref().err().map(|e| format!("{e:#}"));
    if let Some(e) = &error {
        eprintln!("error: {e}");
    }
    match session.finish(error.clone()) {
        Ok(path) if !cli.quiet => println!("manifest: {}", path.display()),
        Ok(_) => {}
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    }
    if error.is_some() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn time_label(t: f64) -> String {
    if t.fract() == 0.0 && t < 1e6 {
        format!("{:04}", t as u64)
    } else {
        format!("{t}")
    }
}

#[derive(Serialize)]
struct SnapshotEntry {
    time: f64,
    requested: f64,
    min: f64,
    max: f64,
    files: Vec<String>,
}

#[derive(Serialize)]
struct TrajectoryReport {
    dt: f64,
    steps: usize,
    final_time: f64,
    final_residual: f64,
    steady_time: Option<f64>,
    final_min: f64,
    gamma_observed: f64,
    min_history_nondecreasing_above_theta: bool,
    snapshots: Vec<SnapshotEntry>,
}

fn run_simulate(session: &mut Session, config: &Path, quiet: bool) -> Result<()> {
    let run = load_config(config).with_context(|| format!("config {}", config.display()))?;
    session.config = serde_json::to_value(&run.file)?;
    let sim = run.sim;
    let trajectory: Trajectory = session.timed("evolve", || simulate(&sim))?;
    let out = &run.file.output;
    let mut snapshots = Vec::new();
    for snap in &trajectory.snapshots {
        let stem = format!("{}_t{}", out.prefix, time_label(snap.requested));
        let mut files = Vec::new();
        if out.pgm {
            let name = format!("{stem}.pgm");
            session.write(&name, &field_to_pgm(&snap.field))?;
            files.push(name);
        }
        if out.csv {
            let name = format!("{stem}.csv");
            session.write(&name, write_field_csv(&snap.field)?.as_bytes())?;
            files.push(name);
        }
        let (min, max) = snap.field.exterior_range();
        snapshots.push(SnapshotEntry {
            time: snap.time,
            requested: snap.requested,
            min,
            max,
            files,
        });
    }
    let mut history = String::from("time,min,max\n");
    for e in &trajectory.history {
        history.push_str(&format!("{:e},{:e},{:e}\n", e.time, e.min, e.max));
    }
    session.write("history.csv", history.as_bytes())?;
    let report = TrajectoryReport {
        dt: trajectory.dt,
        steps: trajectory.steps,
        final_time: trajectory.final_time,
        final_residual: trajectory.final_residual,
        steady_time: trajectory.steady_time,
        final_min: trajectory.final_field.exterior_range().0,
        gamma_observed: trajectory.gamma_observed(),
        min_history_nondecreasing_above_theta: trajectory
            .min_nondecreasing_above(sim.reaction.theta()),
        snapshots,
    };
    session.write_json("trajectory.json", &report)?;
    if !quiet {
        println!(
            "{} steps of dt {:.4e}; {}; final min {:.6}, residual {:.3e}",
            report.steps,
            report.dt,
            match report.steady_time {
                Some(t) => format!("steady at t = {t:.2}"),
                None => format!("reached t = {}", report.final_time),
            },
            report.final_min,
            report.final_residual
        );
        for s in &report.snapshots {
            println!(
                "  t = {:>7.2}  min {:.6}  max {:.6}",
                s.requested, s.min, s.max
            );
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct WaveReport<'a> {
    speed_c: f64,
    residual_norm: f64,
    /// Residual recomputed from the written nodes, independently of the solver.
    certificate_residual: f64,
    monotone: bool,
    limits_ok: bool,
    newton_iterations: usize,
    coarse_time: f64,
    s: f64,
    c_norm: f64,
    start: f64,
    h: f64,
    nodes: usize,
    profile_csv: &'a str,
}

fn run_wave(session: &mut Session, args: &WaveArgs, quiet: bool) -> Result<()> {
    let opts = WaveOptions {
        halfwidth: args.halfwidth,
        h: args.h,
        c_norm: args.c_norm,
        phase_shift: args.phase_shift,
        ..WaveOptions::default()
    };
    session.config = json!({ "arguments": args, "options": opts });
    let reaction: BistableSpec = match (&args.reaction_table, args.theta) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let table = read_reaction_table(&text).with_context(|| path.display().to_string())?;
            BistableSpec::tabulated(table)?
        }
        (None, Some(theta)) => cubic_bistable(theta)?,
        (None, None) => bail!("either --theta or --reaction-table is required"),
    };
    let profile: WaveProfile =
        session.timed("solve", || solve_front_with(&reaction, args.s, &opts))?;
    let certificate = session.timed("certify", || {
        front_residual(
            &profile.sampled(),
            profile.speed_c,
            profile.s,
            profile.c_norm,
            &reaction,
        )
    })?;
    session.write("front.csv", write_profile_csv(&profile)?.as_bytes())?;
    let report = WaveReport {
        speed_c: profile.speed_c,
        residual_norm: profile.residual_norm,
        certificate_residual: certificate,
        monotone: profile.monotone,
        limits_ok: profile.limits_ok,
        newton_iterations: profile.newton_iterations,
        coarse_time: profile.coarse_time,
        s: profile.s,
        c_norm: profile.c_norm,
        start: profile.start,
        h: profile.h,
        nodes: profile.len(),
        profile_csv: "front.csv",
    };
    session.write_json("front.json", &report)?;
    if !quiet {
        println!("{}", serde_json::to_string_pretty(&report)?);
    }
    Ok(())
}

fn slide_text(outcome: &SlideOutcome) -> String {
    match outcome {
        SlideOutcome::BelowGrid => "below-grid".into(),
        SlideOutcome::Found(r) => format!("r* = {r:.6}"),
        SlideOutcome::AboveGrid => "above-grid".into(),
    }
}

fn run_check(
    session: &mut Session,
    config: &Path,
    tol_one: f64,
    allow_nonconvex: bool,
    quiet: bool,
) -> Result<()> {
    let run = load_config(config).with_context(|| format!("config {}", config.display()))?;
    session.config = json!({
        "config": run.file,
        "tol_one": tol_one,
        "allow_nonconvex": allow_nonconvex,
    });
    let opts = LiouvilleOptions {
        allow_nonconvex,
        ..LiouvilleOptions::default()
    };
    let report: LiouvilleReport =
        session.timed("check", || check_liouville(&run.sim, tol_one, &opts))?;
    session.write_json("liouville.json", &report)?;
    if !quiet {
        println!(
            "steady minimum     {:.6} (needs >= {:.6})",
            report.steady_min,
            1.0 - tol_one
        );
        println!("trajectory floor   {:.6}", report.gamma_observed);
        for s in &report.sliding {
            println!(
                "sliding along ({:.3}, {:.3})  {}",
                s.direction[0],
                s.direction[1],
                slide_text(&s.outcome)
            );
        }
        println!(
            "comparison tests   {}",
            if report.maxprinciple_pass {
                "pass"
            } else {
                "fail"
            }
        );
        println!(
            "verdict            {}{}",
            if report.pass { "pass" } else { "fail" },
            if report.certifying {
                ""
            } else {
                " (non-certifying: obstacle not convex)"
            }
        );
    }
    if !report.pass {
        bail!("the steady state is not certified as identically one");
    }
    Ok(())
}

fn run_self(session: &mut Session, quiet: bool) -> Result<()> {
    let report = session.timed("selftest", run_selftest)?;
    let table = report.table();
    session.write("selftest.txt", table.as_bytes())?;
    if !quiet {
        print!("{table}");
    }
    if !report.all_pass() {
        bail!("self-test failed");
    }
    Ok(())
}
