//! Command-line front end.
//!
//! Exit codes: 0 success, 1 domain failure (infeasible geometry, trial that
//! did not converge, failed feasibility check), 2 usage or config error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::guidance::{validate_curvature_constraint, FeasibilityReport};
use crate::sim::{monte_carlo, run_trial, GuidanceLaw, MonteCarloReport, Trajectory, TrialMetrics, TrialOutcome};

#[derive(Debug, Parser)]
#[command(name = "switched-vf", version, about = "Switched vector-field path following simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one law and write trajectory.csv and metrics.csv.
    Run(CommonArgs),
    /// Simulate several laws on one scenario (all four by default).
    Compare(CommonArgs),
    /// Randomized trials with box-plot statistics per metric and law.
    Montecarlo(CommonArgs),
    /// Check the field gains against the vehicle's curvature limit.
    Validate(CommonArgs),
}

#[derive(Debug, Args, Clone)]
pub struct CommonArgs {
    /// Scenario file (TOML). Defaults reproduce the reference sinusoid.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated laws: switched, basic_vf, plos, nlgl.
    #[arg(long, value_delimiter = ',')]
    pub law: Vec<String>,
    /// Master seed (overrides sim.seed).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo trial count (overrides sim.trials, default 200).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Integration step (overrides sim.dt).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Print the effective configuration as TOML and exit.
    #[arg(long)]
    pub dump_effective_config: bool,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Argument(_) | Error::Io(_) => 2,
        Error::Domain { .. }
        | Error::Geometry(_)
        | Error::WindInfeasible { .. }
        | Error::LookAheadInfeasible { .. } => 1,
    }
}

fn load_config(args: &CommonArgs) -> Result<ScenarioConfig> {
    let mut cfg = match &args.config {
        Some(p) => ScenarioConfig::from_file(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(dt) = args.dt {
        cfg.sim.dt = dt;
    }
    if let Some(seed) = args.seed {
        cfg.sim.seed = seed;
    }
    if let Some(n) = args.trials {
        cfg.sim.trials = n;
    }
    // re-run the semantic checks on the overridden values
    cfg.scenario()?;
    if cfg.sim.trials == 0 {
        return Err(Error::Argument("--trials must be at least 1".into()));
    }
    Ok(cfg)
}

fn parse_laws(names: &[String], default: &[GuidanceLaw]) -> Result<Vec<GuidanceLaw>> {
    if names.is_empty() {
        return Ok(default.to_vec());
    }
    let mut laws = Vec::new();
    for n in names {
        let law: GuidanceLaw = n.parse()?;
        if !laws.contains(&law) {
            laws.push(law);
        }
    }
    Ok(laws)
}

fn execute(cmd: &Command, stdout: &mut dyn Write) -> Result<i32> {
    let args = match cmd {
        Command::Run(a) | Command::Compare(a) | Command::Montecarlo(a) | Command::Validate(a) => a,
    };
    let cfg = load_config(args)?;
    if args.dump_effective_config {
        stdout.write_all(cfg.to_toml_string()?.as_bytes())?;
        return Ok(0);
    }
    match cmd {
        Command::Run(_) => {
            let laws = parse_laws(&args.law, &[GuidanceLaw::Switched])?;
            if laws.len() != 1 {
                return Err(Error::Argument("run takes a single --law; use compare for several".into()));
            }
            cmd_compare(&cfg, &laws, &args.out, true, stdout)
        }
        Command::Compare(_) => {
            let laws = parse_laws(&args.law, &GuidanceLaw::ALL)?;
            cmd_compare(&cfg, &laws, &args.out, laws.len() == 1, stdout)
        }
        Command::Montecarlo(_) => {
            let laws = parse_laws(&args.law, &GuidanceLaw::ALL)?;
            cmd_montecarlo(&cfg, &laws, &args.out, stdout)
        }
        Command::Validate(_) => cmd_validate(&cfg, &args.out, stdout),
    }
}

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::Argument(format!("cannot create output directory '{}': {e}", dir.display())))
}

fn cmd_compare(
    cfg: &ScenarioConfig,
    laws: &[GuidanceLaw],
    out: &Path,
    single: bool,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let mut outcomes: Vec<(GuidanceLaw, TrialOutcome)> = Vec::new();
    for &law in laws {
        let sc = cfg.scenario_for(law)?;
        outcomes.push((law, run_trial(&sc, law)?));
    }
    create_out(out)?;
    for (law, o) in &outcomes {
        let name = if single { "trajectory.csv".to_string() } else { format!("trajectory_{law}.csv") };
        write_file(&out.join(name), |w| write_trajectory_csv(w, &o.trajectory))?;
    }
    let rows: Vec<(GuidanceLaw, &TrialMetrics)> = outcomes.iter().map(|(l, o)| (*l, &o.metrics)).collect();
    write_file(&out.join("metrics.csv"), |w| write_metrics_csv(w, &rows))?;
    stdout.write_all(metrics_table(&rows).as_bytes())?;

    let mut code = 0;
    for (law, m) in &rows {
        if let Some(reason) = &m.failure {
            writeln!(stdout, "{law}: {reason}")?;
            code = 1;
        } else if !m.converged {
            writeln!(stdout, "{law}: did not converge within the horizon")?;
            code = 1;
        }
    }
    Ok(code)
}

fn cmd_montecarlo(cfg: &ScenarioConfig, laws: &[GuidanceLaw], out: &Path, stdout: &mut dyn Write) -> Result<i32> {
    let template = cfg.scenario()?;
    let report = monte_carlo(&template, laws, cfg.sim.trials, cfg.sim.seed, &cfg.sim.montecarlo)?;
    create_out(out)?;
    write_file(&out.join("summary.csv"), |w| write_summary_csv(w, &report))?;
    write_file(&out.join("trials.csv"), |w| write_trials_csv(w, &report))?;
    for s in &report.summary {
        writeln!(
            stdout,
            "{:<9} trials {:>4}  converged {:>4}  failed {:>4}  median t_conv {:>9.3} s  median max|chi_dot| {:.4} rad/s",
            s.law.as_str(),
            s.n_trials,
            s.n_converged,
            s.n_failed,
            s.metric("t_conv").map_or(f64::NAN, |b| b.median),
            s.metric("chi_dot_max").map_or(f64::NAN, |b| b.median),
        )?;
    }
    Ok(0)
}

/// Feasibility of the field gains for the configured path and vehicle.
pub fn feasibility(cfg: &ScenarioConfig) -> Result<FeasibilityReport> {
    let sc = cfg.scenario()?;
    let vg = cfg.vehicle.airspeed;
    let rate = sc.path.max_path_course_rate(vg)?;
    validate_curvature_constraint(&cfg.guidance, vg, rate, cfg.vehicle.kappa_max)
}

fn cmd_validate(cfg: &ScenarioConfig, out: &Path, stdout: &mut dyn Write) -> Result<i32> {
    let r = feasibility(cfg)?;
    let text = feasibility_text(&r);
    create_out(out)?;
    fs::write(out.join("feasibility.txt"), &text)?;
    write_file(&out.join("feasibility.csv"), |w| write_feasibility_csv(w, &r))?;
    stdout.write_all(text.as_bytes())?;
    Ok(if r.pass { 0 } else { 1 })
}

fn write_file(path: &Path, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    let file =
        fs::File::create(path).map_err(|e| Error::Argument(format!("cannot write '{}': {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Nine significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.8e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub const TRAJECTORY_HEADER: &str = "t,x,y,chi,chi_c,chi_d,chi_dot,d,phase";

pub fn write_trajectory_csv(w: &mut dyn Write, traj: &Trajectory) -> io::Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for s in &traj.samples {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            fmt_num(s.t),
            fmt_num(s.x),
            fmt_num(s.y),
            fmt_num(s.chi),
            fmt_num(s.chi_c),
            fmt_num(s.chi_d),
            fmt_num(s.chi_dot),
            fmt_num(s.d),
            s.phase.map_or("none", |p| p.as_str()),
        )?;
    }
    Ok(())
}

pub const METRICS_HEADER: &str = "law,converged,t_conv,d_rms,chi_dot_rms,chi_dot_max,chattering_index,failure";

pub fn write_metrics_csv(w: &mut dyn Write, rows: &[(GuidanceLaw, &TrialMetrics)]) -> io::Result<()> {
    writeln!(w, "{METRICS_HEADER}")?;
    for (law, m) in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            law,
            m.converged,
            m.t_conv.map_or("nan".into(), fmt_num),
            fmt_num(m.d_rms),
            fmt_num(m.chi_dot_rms),
            fmt_num(m.chi_dot_max),
            fmt_num(m.chattering_index),
            m.failure.as_deref().map(csv_text).unwrap_or_default(),
        )?;
    }
    Ok(())
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn metrics_table(rows: &[(GuidanceLaw, &TrialMetrics)]) -> String {
    let mut t = String::new();
    let _ = writeln!(
        t,
        "{:<9} {:>10} {:>10} {:>12} {:>12} {:>10}",
        "law", "t_conv[s]", "d_rms[m]", "chi_dot_rms", "chi_dot_max", "chatter"
    );
    for (law, m) in rows {
        let tc = m.t_conv.map_or("-".to_string(), |v| format!("{v:.2}"));
        let _ = writeln!(
            t,
            "{:<9} {:>10} {:>10.3} {:>12.4} {:>12.4} {:>10.2}",
            law.as_str(),
            tc,
            m.d_rms,
            m.chi_dot_rms,
            m.chi_dot_max,
            m.chattering_index
        );
    }
    t
}

pub const SUMMARY_HEADER: &str = "law,metric,count,min,q1,median,q3,max,mean,n_trials,n_converged,n_failed";

pub fn write_summary_csv(w: &mut dyn Write, report: &MonteCarloReport) -> io::Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for s in &report.summary {
        for (name, b) in &s.metrics {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                s.law,
                name,
                b.count,
                fmt_num(b.min),
                fmt_num(b.q1),
                fmt_num(b.median),
                fmt_num(b.q3),
                fmt_num(b.max),
                fmt_num(b.mean),
                s.n_trials,
                s.n_converged,
                s.n_failed
            )?;
        }
    }
    Ok(())
}

pub const TRIALS_HEADER: &str =
    "trial,law,seed,d0,chi0,wind_x,wind_y,converged,t_conv,d_rms,chi_dot_rms,chi_dot_max,chattering_index,failure";

pub fn write_trials_csv(w: &mut dyn Write, report: &MonteCarloReport) -> io::Result<()> {
    writeln!(w, "{TRIALS_HEADER}")?;
    for r in &report.trials {
        let m = &r.metrics;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.index,
            r.law,
            r.draw.seed,
            fmt_num(r.draw.d0),
            fmt_num(r.draw.chi0),
            fmt_num(r.draw.wind.x),
            fmt_num(r.draw.wind.y),
            m.converged,
            m.t_conv.map_or("nan".into(), fmt_num),
            fmt_num(m.d_rms),
            fmt_num(m.chi_dot_rms),
            fmt_num(m.chi_dot_max),
            fmt_num(m.chattering_index),
            m.failure.as_deref().map(csv_text).unwrap_or_default(),
        )?;
    }
    Ok(())
}

pub fn feasibility_text(r: &FeasibilityReport) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "curvature feasibility");
    let _ = writeln!(
        t,
        "  linear branch   peak curvature {:.6} 1/m at |d| = {:.3} m (rate {:.6} rad/s)",
        r.k1_curvature, r.k1_peak_distance, r.k1_peak_rate
    );
    let _ = writeln!(
        t,
        "  cubic branch    peak curvature {:.6} 1/m at |d| = {:.3} m (rate {:.6} rad/s)",
        r.k3_curvature, r.k3_peak_distance, r.k3_peak_rate
    );
    let _ = writeln!(t, "  left-hand side  {:.6} 1/m", r.lhs);
    if r.kappa_max.is_finite() {
        let _ = writeln!(t, "  kappa_max       {:.6} 1/m", r.kappa_max);
        let _ = writeln!(t, "  margin          {:.6} 1/m", r.margin);
    } else {
        let _ = writeln!(t, "  kappa_max       unbounded");
    }
    let _ = writeln!(t, "result: {}", if r.pass { "PASS" } else { "FAIL" });
    t
}

pub fn write_feasibility_csv(w: &mut dyn Write, r: &FeasibilityReport) -> io::Result<()> {
    writeln!(
        w,
        "k1_curvature,k3_curvature,k1_peak_rate,k3_peak_rate,k1_peak_distance,k3_peak_distance,lhs,kappa_max,margin,pass"
    )?;
    writeln!(
        w,
        "{},{},{},{},{},{},{},{},{},{}",
        fmt_num(r.k1_curvature),
        fmt_num(r.k3_curvature),
        fmt_num(r.k1_peak_rate),
        fmt_num(r.k3_peak_rate),
        fmt_num(r.k1_peak_distance),
        fmt_num(r.k3_peak_distance),
        fmt_num(r.lhs),
        fmt_num(r.kappa_max),
        fmt_num(r.margin),
        r.pass
    )
}
