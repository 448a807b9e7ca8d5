//! Closed-loop trials, trajectory metrics and the Monte Carlo campaign.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angle::wrap_angle;
use crate::baselines::{basic_vf_command, nlgl_command, plos_command, BaselineParams};
use crate::error::{Error, Result};
use crate::guidance::{commanded_course, GuidanceParams, GuidancePhase};
use crate::path::{path_course_rate, PathFrame, Point2, ReferencePath};
use crate::vehicle::{ground_speed, step, turn_rate, AirspeedSpec, Integrator, VehicleState, WindModel};

/// A closest point that moves farther than this many ground-speed steps in one
/// step is treated as a jump (the vehicle crossed a locus of equidistant path
/// points) and contributes no course-rate feed-forward.
const FRAME_JUMP_FACTOR: f64 = 10.0;

/// Magnitudes below this are treated as zero when counting sign changes.
const SIGN_DEADBAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuidanceLaw {
    Switched,
    BasicVf,
    Plos,
    Nlgl,
}

impl GuidanceLaw {
    pub const ALL: [GuidanceLaw; 4] = [Self::Switched, Self::BasicVf, Self::Plos, Self::Nlgl];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Switched => "switched",
            Self::BasicVf => "basic_vf",
            Self::Plos => "plos",
            Self::Nlgl => "nlgl",
        }
    }
}

impl fmt::Display for GuidanceLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GuidanceLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "switched" => Ok(Self::Switched),
            "basic_vf" | "vf" => Ok(Self::BasicVf),
            "plos" => Ok(Self::Plos),
            "nlgl" | "l1" => Ok(Self::Nlgl),
            other => Err(Error::Argument(format!("unknown law '{other}' (expected switched, basic_vf, plos or nlgl)"))),
        }
    }
}

/// Thresholds that define the reaching time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceCriteria {
    /// Cross-track threshold, m.
    pub d_threshold: f64,
    /// Course alignment threshold `|wrap(chi - chi_p)|`, rad.
    pub align_threshold: f64,
    /// Both thresholds must hold for this long, s.
    pub dwell: f64,
}

impl Default for ConvergenceCriteria {
    fn default() -> Self {
        Self { d_threshold: 15.0, align_threshold: 0.2, dwell: 5.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// Offset `d0` along the +90 degree normal of the path point at `s0`, so
    /// the first frame reports `d = d0`.
    Offset {
        s0: f64,
        d0: f64,
        chi0: f64,
    },
    Explicit(VehicleState),
}

impl InitialCondition {
    pub fn resolve(&self, path: &ReferencePath) -> Result<VehicleState> {
        match *self {
            Self::Explicit(s) => Ok(s),
            Self::Offset { s0, d0, chi0 } => {
                let p = path.evaluate(s0)?;
                let t = path.tangent(s0)?;
                let n = Point2::new(-t.y, t.x);
                let q = p + n * d0;
                Ok(VehicleState::new(q.x, q.y, chi0))
            }
        }
    }
}

/// Fully resolved single-trial setup.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub path: ReferencePath,
    pub guidance: GuidanceParams,
    pub baselines: BaselineParams,
    pub airspeed: AirspeedSpec,
    pub wind: WindModel,
    pub initial: InitialCondition,
    pub dt: f64,
    pub t_max: f64,
    pub integrator: Integrator,
    pub criteria: ConvergenceCriteria,
    /// Window used by the chattering index, s.
    pub chatter_window: f64,
}

impl Scenario {
    /// Reference sinusoid, default parameters, no wind, starting 200 m off the
    /// path at course -pi/4.
    pub fn reference() -> Self {
        Self {
            path: ReferencePath::reference_sinusoid(),
            guidance: GuidanceParams::default(),
            baselines: BaselineParams::default(),
            airspeed: AirspeedSpec::new(15.0),
            wind: WindModel::default(),
            initial: InitialCondition::Offset { s0: 0.0, d0: 200.0, chi0: -PI / 4.0 },
            dt: 0.01,
            t_max: 300.0,
            integrator: Integrator::Rk4,
            criteria: ConvergenceCriteria::default(),
            chatter_window: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.guidance.validate()?;
        self.baselines.validate()?;
        self.airspeed.check_wind(self.wind)?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Argument(format!("sim.dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::Argument(format!("sim.t_max must be positive, got {}", self.t_max)));
        }
        let c = &self.criteria;
        for (name, v) in
            [("sim.d_threshold", c.d_threshold), ("sim.align_threshold", c.align_threshold), ("sim.dwell", c.dwell)]
        {
            if !(v > 0.0) {
                return Err(Error::Argument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.chatter_window > self.dt) {
            return Err(Error::Argument(format!("sim.chatter_window must exceed dt, got {}", self.chatter_window)));
        }
        Ok(())
    }
}

/// One recorded step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub chi: f64,
    pub chi_c: f64,
    /// Desired course (switched/basic VF) or pursued bearing (PLOS/NLGL).
    pub chi_d: f64,
    pub chi_dot: f64,
    pub d: f64,
    pub chi_p: f64,
    pub chi_tilde: f64,
    /// Active switched-law phase; `None` for the baselines.
    pub phase: Option<GuidancePhase>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub law: GuidanceLaw,
    pub dt: f64,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    /// Indices where the phase changes.
    pub fn transitions(&self) -> Vec<usize> {
        self.samples
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0].phase.is_some() && w[1].phase.is_some() && w[0].phase != w[1].phase)
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// Consecutive distinct phases.
    pub fn phase_sequence(&self) -> Vec<GuidancePhase> {
        let mut seq: Vec<GuidancePhase> = Vec::new();
        for p in self.samples.iter().filter_map(|s| s.phase) {
            if seq.last() != Some(&p) {
                seq.push(p);
            }
        }
        seq
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialMetrics {
    /// Reaching time; `None` when the criteria never hold.
    pub t_conv: Option<f64>,
    pub d_rms: f64,
    pub chi_dot_rms: f64,
    pub chi_dot_max: f64,
    /// Sign changes of the turn rate per second around phase transitions.
    pub chattering_index: f64,
    pub converged: bool,
    /// Reason the trial stopped early, if it did.
    pub failure: Option<String>,
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trajectory: Trajectory,
    pub metrics: TrialMetrics,
}

/// Runs one closed-loop trial: path frame, guidance command, vehicle step.
/// A look-ahead failure of NLGL ends the trial early and is reported through
/// `metrics.failure`; only invalid scenarios return `Err`.
pub fn run_trial(scenario: &Scenario, law: GuidanceLaw) -> Result<TrialOutcome> {
    scenario.validate()?;
    let path = &scenario.path;
    let g = &scenario.guidance;
    let alpha = g.alpha;
    let dt = scenario.dt;
    let steps = (scenario.t_max / dt).round() as usize;
    let jump_limit = FRAME_JUMP_FACTOR * (scenario.airspeed.airspeed + scenario.wind.speed()) * dt;

    let mut state = scenario.initial.resolve(path)?;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut prev_frame: Option<PathFrame> = None;
    let mut prev_phase: Option<GuidancePhase> = None;
    let mut failure = None;

    for k in 0..=steps {
        let t = k as f64 * dt;
        let p = state.position();
        let mut frame = match prev_frame {
            Some(pf) => path.closest_point_near(p, pf.s_star)?,
            None => path.closest_point(p)?,
        };
        if let Some(pf) = prev_frame {
            if frame.p_ref.dist(pf.p_ref) <= jump_limit {
                frame.chi_p_dot = path_course_rate(&frame, &pf, dt)?;
            }
        }
        let vg = ground_speed(scenario.airspeed, scenario.wind, state.chi)?;

        let (chi_c, chi_d, chi_tilde, phase) = match law {
            GuidanceLaw::Switched => {
                let out = commanded_course(state.chi, &frame, g, prev_phase, vg);
                (out.chi_c, out.chi_d, out.chi_tilde, Some(out.phase))
            }
            GuidanceLaw::BasicVf => {
                let c = basic_vf_command(&frame, &scenario.baselines.basic_vf);
                (c, c, wrap_angle(state.chi - c), None)
            }
            GuidanceLaw::Plos => {
                let (c, los) = plos_command(&state, &frame, path, &scenario.baselines.plos, alpha);
                (c, los, wrap_angle(state.chi - los), None)
            }
            GuidanceLaw::Nlgl => match nlgl_command(&state, &frame, path, &scenario.baselines.nlgl, vg, alpha) {
                Ok((c, los)) => (c, los, wrap_angle(state.chi - los), None),
                Err(e @ Error::LookAheadInfeasible { .. }) => {
                    failure = Some(format!("{e} at t = {t:.2} s"));
                    break;
                }
                Err(e) => return Err(e),
            },
        };
        prev_phase = phase;

        samples.push(Sample {
            t,
            x: state.x,
            y: state.y,
            chi: state.chi,
            chi_c,
            chi_d,
            chi_dot: turn_rate(chi_c, state.chi, alpha),
            d: frame.d,
            chi_p: frame.chi_p,
            chi_tilde,
            phase,
        });
        if k == steps {
            break;
        }
        state = step(state, chi_c, scenario.airspeed, scenario.wind, alpha, dt, scenario.integrator)?;
        prev_frame = Some(frame);
    }

    let trajectory = Trajectory { law, dt, samples };
    let mut metrics = compute_metrics(&trajectory, &scenario.criteria, scenario.chatter_window);
    if failure.is_some() {
        metrics.converged = false;
        metrics.t_conv = None;
        metrics.failure = failure;
    }
    Ok(TrialOutcome { trajectory, metrics })
}

/// Reaching time, RMS errors, peak turn rate and chattering index.
///
/// `t_conv` is the first sample time from which `|d| <= d_threshold` and
/// `|wrap(chi - chi_p)| <= align_threshold` hold continuously for `dwell`
/// seconds (or until the end of the trajectory, whichever comes first).
pub fn compute_metrics(traj: &Trajectory, criteria: &ConvergenceCriteria, chatter_window: f64) -> TrialMetrics {
    let s = &traj.samples;
    if s.is_empty() {
        return TrialMetrics {
            t_conv: None,
            d_rms: f64::NAN,
            chi_dot_rms: f64::NAN,
            chi_dot_max: f64::NAN,
            chattering_index: f64::NAN,
            converged: false,
            failure: Some("empty trajectory".into()),
        };
    }
    let n = s.len() as f64;
    let d_rms = (s.iter().map(|v| v.d * v.d).sum::<f64>() / n).sqrt();
    let chi_dot_rms = (s.iter().map(|v| v.chi_dot * v.chi_dot).sum::<f64>() / n).sqrt();
    let chi_dot_max = s.iter().map(|v| v.chi_dot.abs()).fold(0.0, f64::max);

    let ok: Vec<bool> = s
        .iter()
        .map(|v| v.d.abs() <= criteria.d_threshold && wrap_angle(v.chi - v.chi_p).abs() <= criteria.align_threshold)
        .collect();
    // run[i]: number of consecutive satisfied samples starting at i
    let mut run = vec![0usize; s.len() + 1];
    for i in (0..s.len()).rev() {
        run[i] = if ok[i] { run[i + 1] + 1 } else { 0 };
    }
    let dwell_steps = (criteria.dwell / traj.dt).round() as usize;
    let t_conv = (0..s.len()).find(|&i| ok[i] && (run[i] > dwell_steps || i + run[i] == s.len())).map(|i| s[i].t);

    TrialMetrics {
        t_conv,
        d_rms,
        chi_dot_rms,
        chi_dot_max,
        chattering_index: chattering_index(traj, chatter_window),
        converged: t_conv.is_some(),
        failure: None,
    }
}

/// Number of turn-rate sign changes inside `[t_i - w/2, t_i + w/2)` around each
/// phase transition `t_i`, divided by `w`; the maximum over transitions. Zero
/// when the trajectory has no transitions.
pub fn chattering_index(traj: &Trajectory, window: f64) -> f64 {
    let s = &traj.samples;
    let half = 0.5 * window;
    traj.transitions()
        .into_iter()
        .map(|i| {
            let t0 = s[i].t;
            let mut last = 0.0f64;
            let mut changes = 0usize;
            for v in s.iter().filter(|v| v.t >= t0 - half - 1e-12 && v.t < t0 + half - 1e-12) {
                if v.chi_dot.abs() <= SIGN_DEADBAND {
                    continue;
                }
                let sg = v.chi_dot.signum();
                if last != 0.0 && sg != last {
                    changes += 1;
                }
                last = sg;
            }
            changes as f64 / window
        })
        .fold(0.0, f64::max)
}

/// Sampling ranges of the Monte Carlo campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloDistributions {
    /// Uniform range of the initial cross-track offset, m.
    pub d0: [f64; 2],
    /// Uniform range of the initial course, rad.
    pub chi0: [f64; 2],
    /// Uniform range of the wind speed, m/s.
    pub wind_speed: [f64; 2],
    /// Uniform range of the wind direction, rad.
    pub wind_direction: [f64; 2],
}

impl Default for MonteCarloDistributions {
    fn default() -> Self {
        Self { d0: [100.0, 200.0], chi0: [-PI, PI], wind_speed: [2.0, 3.0], wind_direction: [-2.5, -2.0] }
    }
}

fn uniform(rng: &mut ChaCha8Rng, r: [f64; 2]) -> f64 {
    let (lo, hi) = if r[0] <= r[1] { (r[0], r[1]) } else { (r[1], r[0]) };
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master_seed`.
pub fn trial_seed(master_seed: u64, index: usize) -> u64 {
    mix64(master_seed ^ mix64((index as u64).wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

/// Initial condition and wind drawn for one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialDraw {
    pub seed: u64,
    pub d0: f64,
    pub chi0: f64,
    pub wind: WindModel,
}

impl TrialDraw {
    pub fn sample(seed: u64, dist: &MonteCarloDistributions) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d0 = uniform(&mut rng, dist.d0);
        let chi0 = uniform(&mut rng, dist.chi0);
        let speed = uniform(&mut rng, dist.wind_speed);
        let dir = uniform(&mut rng, dist.wind_direction);
        Self { seed, d0, chi0, wind: WindModel::from_polar(speed, dir) }
    }

    /// Applies the draw to a template scenario (offset start at the template's `s0`).
    pub fn apply(&self, template: &Scenario) -> Scenario {
        let s0 = match template.initial {
            InitialCondition::Offset { s0, .. } => s0,
            InitialCondition::Explicit(_) => template.path.domain().0.max(0.0),
        };
        Scenario {
            wind: self.wind,
            initial: InitialCondition::Offset { s0, d0: self.d0, chi0: self.chi0 },
            ..template.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub index: usize,
    pub law: GuidanceLaw,
    pub draw: TrialDraw,
    pub metrics: TrialMetrics,
}

/// Box-plot statistics; quartiles interpolate linearly between order statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxStats {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl BoxStats {
    pub fn from_values(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self {
                count: 0,
                min: f64::NAN,
                q1: f64::NAN,
                median: f64::NAN,
                q3: f64::NAN,
                max: f64::NAN,
                mean: f64::NAN,
            };
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = p * (v.len() - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Self {
            count: v.len(),
            min: v[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: v[v.len() - 1],
            mean: v.iter().sum::<f64>() / v.len() as f64,
        }
    }
}

/// Metric names in summary order.
pub const METRIC_NAMES: [&str; 5] = ["t_conv", "d_rms", "chi_dot_rms", "chi_dot_max", "chattering_index"];

#[derive(Debug, Clone, PartialEq)]
pub struct LawSummary {
    pub law: GuidanceLaw,
    pub n_trials: usize,
    pub n_converged: usize,
    /// Trials that ended early (look-ahead infeasible).
    pub n_failed: usize,
    /// One entry per [`METRIC_NAMES`]. `t_conv` covers converged trials only;
    /// the rest cover every trial that ran to the horizon.
    pub metrics: Vec<(&'static str, BoxStats)>,
}

impl LawSummary {
    pub fn metric(&self, name: &str) -> Option<&BoxStats> {
        self.metrics.iter().find(|(n, _)| *n == name).map(|(_, s)| s)
    }
}

#[derive(Debug, Clone)]
pub struct MonteCarloReport {
    pub master_seed: u64,
    pub trials: Vec<TrialRecord>,
    pub summary: Vec<LawSummary>,
}

fn summarize(law: GuidanceLaw, records: &[&TrialRecord]) -> LawSummary {
    let done: Vec<&TrialMetrics> = records.iter().map(|r| &r.metrics).filter(|m| m.failure.is_none()).collect();
    let t_conv: Vec<f64> = records.iter().filter_map(|r| r.metrics.t_conv).collect();
    let pick = |f: fn(&TrialMetrics) -> f64| done.iter().map(|m| f(m)).collect::<Vec<_>>();
    LawSummary {
        law,
        n_trials: records.len(),
        n_converged: t_conv.len(),
        n_failed: records.len() - done.len(),
        metrics: vec![
            ("t_conv", BoxStats::from_values(&t_conv)),
            ("d_rms", BoxStats::from_values(&pick(|m| m.d_rms))),
            ("chi_dot_rms", BoxStats::from_values(&pick(|m| m.chi_dot_rms))),
            ("chi_dot_max", BoxStats::from_values(&pick(|m| m.chi_dot_max))),
            ("chattering_index", BoxStats::from_values(&pick(|m| m.chattering_index))),
        ],
    }
}

/// Runs `n_trials` independent draws for every law in `laws`. Every law sees
/// the same draw in a given trial. Trials run in parallel; results are
/// collected in trial order, so the output does not depend on scheduling.
pub fn monte_carlo(
    template: &Scenario,
    laws: &[GuidanceLaw],
    n_trials: usize,
    master_seed: u64,
    dist: &MonteCarloDistributions,
) -> Result<MonteCarloReport> {
    if n_trials == 0 {
        return Err(Error::Argument("n_trials must be at least 1".into()));
    }
    if laws.is_empty() {
        return Err(Error::Argument("at least one law is required".into()));
    }
    if dist.wind_speed.iter().any(|w| *w >= template.airspeed.airspeed) {
        return Err(Error::WindInfeasible {
            wind: dist.wind_speed[0].max(dist.wind_speed[1]),
            airspeed: template.airspeed.airspeed,
        });
    }
    let per_trial: Vec<Result<Vec<TrialRecord>>> = (0..n_trials)
        .into_par_iter()
        .map(|index| {
            let draw = TrialDraw::sample(trial_seed(master_seed, index), dist);
            let scenario = draw.apply(template);
            laws.iter()
                .map(|&law| {
                    let out = run_trial(&scenario, law)?;
                    Ok(TrialRecord { index, law, draw, metrics: out.metrics })
                })
                .collect()
        })
        .collect();
    let mut trials = Vec::with_capacity(n_trials * laws.len());
    for r in per_trial {
        trials.extend(r?);
    }
    let summary = laws
        .iter()
        .map(|&law| {
            let recs: Vec<&TrialRecord> = trials.iter().filter(|r| r.law == law).collect();
            summarize(law, &recs)
        })
        .collect();
    Ok(MonteCarloReport { master_seed, trials, summary })
}
