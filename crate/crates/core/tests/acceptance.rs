//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails. Built with `harness = false` so the lines are
//! visible in normal `cargo test` output.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use switched_vf::angle::wrap_angle;
use switched_vf::cli::{write_summary_csv, write_trials_csv};
use switched_vf::config::ScenarioConfig;
use switched_vf::guidance::{
    commanded_course_in_phase, desired_course_distance_only, validate_curvature_constraint, GuidanceParams,
    GuidancePhase,
};
use switched_vf::path::{Point2, ReferencePath};
use switched_vf::sim::{
    chattering_index, monte_carlo, run_trial, trial_seed, GuidanceLaw, MonteCarloDistributions, MonteCarloReport,
    Scenario, Trajectory, TrialDraw,
};
use switched_vf::vehicle::{ground_speed, step, AirspeedSpec, Integrator, VehicleState, WindModel};

type Outcome = Result<String, String>;

const MC_TRIALS: usize = 200;
const MC_SEED: u64 = 2024;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    let el = start.elapsed();
    check(el < limit, format!("runtime {:.2?} exceeds {:.0?}", el, limit))
}

/// Straight path, Case 1 imposed, course error 1 rad: the reaching law
/// `d|e|/dt = -eta |e|^(3/5)` hits zero at `5 / (2 eta) = 10/pi`.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let params = GuidanceParams::default();
    let path = ReferencePath::line(Point2::default(), 0.0).map_err(|e| e.to_string())?;
    let va = AirspeedSpec::new(15.0);
    let calm = WindModel::default();
    let dt = 0.01;
    let p0 = Point2::new(0.0, 300.0);
    let f0 = path.closest_point(p0).map_err(|e| e.to_string())?;
    let probe = commanded_course_in_phase(0.0, &f0, &params, GuidancePhase::Case1, 15.0);
    let mut state = VehicleState::new(p0.x, p0.y, probe.chi_d + 1.0);

    let t_s = 10.0 / PI;
    let mut t = 0.0;
    let mut t_zero = None;
    let mut worst_in_band = 0.0f64;
    let mut first_err = None;
    while t <= 1.2 * t_s {
        let frame = path.closest_point(state.position()).map_err(|e| e.to_string())?;
        let vg = ground_speed(va, calm, state.chi).map_err(|e| e.to_string())?;
        let out = commanded_course_in_phase(state.chi, &frame, &params, GuidancePhase::Case1, vg);
        if first_err.is_none() {
            first_err = Some(out.chi_tilde);
        }
        if t_zero.is_none() && out.chi_tilde <= 0.0 {
            t_zero = Some(t);
        }
        if (0.98 * t_s..=1.02 * t_s).contains(&t) {
            worst_in_band = worst_in_band.max(out.chi_tilde.abs());
        }
        state = step(state, out.chi_c, va, calm, params.alpha, dt, Integrator::Rk4).map_err(|e| e.to_string())?;
        t += dt;
    }
    check((first_err.unwrap() - 1.0).abs() < 1e-9, format!("initial course error {:?}", first_err))?;
    let t_zero = t_zero.ok_or("course error never reached zero")?;
    let rel = (t_zero - t_s).abs() / t_s;
    check(rel <= 0.02, format!("zero reached at {t_zero:.3} s, expected {t_s:.3} s"))?;
    check(worst_in_band < 1e-3, format!("|course error| {worst_in_band:.2e} within 2% of {t_s:.3} s"))?;
    within_time(start, Duration::from_secs(1))?;
    Ok(format!("zero at {t_zero:.3} s vs {t_s:.4} s ({:.2}%), max |err| in band {worst_in_band:.1e}", 100.0 * rel))
}

fn case1_trajectory(delta: f64) -> Result<Trajectory, String> {
    let mut cfg = ScenarioConfig::case1_preset();
    cfg.guidance.delta_hys = delta;
    let sc = cfg.scenario().map_err(|e| e.to_string())?;
    Ok(run_trial(&sc, GuidanceLaw::Switched).map_err(|e| e.to_string())?.trajectory)
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let tr = case1_trajectory(GuidanceParams::default().delta_hys)?;
    let seq = tr.phase_sequence();
    check(
        seq == [GuidancePhase::Case1, GuidancePhase::Case2, GuidancePhase::Case3],
        format!("phase sequence {seq:?}"),
    )?;
    let switches = tr.transitions();
    check(switches.len() == 2, format!("{} switches", switches.len()))?;
    let eps = GuidanceParams::default().epsilon;
    let s = &tr.samples;
    let in_phase = |i: usize, p: GuidancePhase| s[i].phase == Some(p) && s[i + 1].phase == Some(p);

    for i in 0..s.len() - 1 {
        if in_phase(i, GuidancePhase::Case1) {
            check(s[i + 1].d.abs() >= s[i].d.abs(), format!("|d| decreased in Case 1 at t = {:.2}", s[i].t))?;
            check(
                s[i + 1].chi_tilde.abs() <= s[i].chi_tilde.abs(),
                format!("|course error| grew in Case 1 at t = {:.2}", s[i].t),
            )?;
        }
        if in_phase(i, GuidancePhase::Case2) && s[i].chi_tilde.abs() > eps {
            check(
                s[i + 1].chi_tilde.abs() <= s[i].chi_tilde.abs(),
                format!("|course error| grew in Case 2 at t = {:.2}", s[i].t),
            )?;
        }
    }
    // |d| shrinks once the course has crossed the path tangent in Case 2
    let c2: Vec<usize> = (0..s.len()).filter(|&i| s[i].phase == Some(GuidancePhase::Case2)).collect();
    let side0 = wrap_angle(s[c2[0]].chi - s[c2[0]].chi_p).signum();
    let cross = c2
        .iter()
        .copied()
        .find(|&i| wrap_angle(s[i].chi - s[i].chi_p).signum() != side0)
        .ok_or("course never crossed the path tangent in Case 2")?;
    for w in c2.windows(2).filter(|w| w[0] >= cross) {
        check(s[w[1]].d.abs() < s[w[0]].d.abs(), format!("|d| not decreasing at t = {:.2}", s[w[0]].t))?;
    }
    within_time(start, Duration::from_secs(5))?;
    Ok(format!(
        "case1 -> case2 at {:.2} s, case2 -> case3 at {:.2} s, tangent crossed at {:.2} s",
        s[switches[0]].t, s[switches[1]].t, s[cross].t
    ))
}

fn criterion_3() -> Outcome {
    let tr = case1_trajectory(GuidanceParams::default().delta_hys)?;
    let (i, peak) =
        tr.samples.iter().enumerate().map(|(i, v)| (i, v.chi_dot.abs())).max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    check((0.6..=0.8).contains(&peak), format!("max |chi_dot| = {peak:.4} rad/s"))?;
    Ok(format!("max |chi_dot| = {peak:.4} rad/s at t = {:.2} s", tr.samples[i].t))
}

/// Turn rate demanded by flying the cubic branch of the field,
/// `|d/dt chi_d - chi_p_dot| = chi_inf (2/pi) * 3 k3 d^2 / (1 + (k3 d^3)^2) * V |sin(chi_d - chi_p)|`.
fn cubic_branch_rate(d: f64, k3: f64, chi_inf: f64, v: f64) -> f64 {
    let x = k3 * d.powi(3);
    let offset = chi_inf * (2.0 / PI) * x.atan();
    chi_inf * (2.0 / PI) * 3.0 * k3 * d * d / (1.0 + x * x) * v * offset.sin().abs()
}

fn criterion_4() -> Outcome {
    let p = GuidanceParams::default();
    let vg = 15.0;
    let path = ReferencePath::reference_sinusoid();
    let rate = path.max_path_course_rate(vg).map_err(|e| e.to_string())?;
    let r = validate_curvature_constraint(&p, vg, rate, 0.7 / 15.0).map_err(|e| e.to_string())?;
    check(r.pass, format!("feasibility failed: lhs {:.5} > {:.5}", r.lhs, r.kappa_max))?;

    // dense scan then golden-section refinement
    let f = |d: f64| cubic_branch_rate(d, p.k3, p.chi_inf, vg);
    let (mut best_d, mut best) = (0.0, 0.0);
    for i in 1..=200_000 {
        let d = i as f64 * 0.001;
        if f(d) > best {
            best = f(d);
            best_d = d;
        }
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (best_d - 0.001, best_d + 0.001);
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let oracle = f(0.5 * (a + b));
    let diff = (r.k3_peak_rate - oracle).abs();
    check(diff < 1e-6, format!("cubic peak rate {:.9} vs oracle {oracle:.9}", r.k3_peak_rate))?;
    Ok(format!(
        "lhs {:.5} <= kappa_max {:.5}; cubic peak rate {:.7} rad/s, oracle diff {diff:.1e}",
        r.lhs, r.kappa_max, r.k3_peak_rate
    ))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_jump = 0.0f64;
    for _ in 0..10_000 {
        let k1 = 10f64.powf(rng.random_range(-4.0..-0.5));
        let d_s = rng.random_range(1.0..500.0);
        let chi_inf = rng.random_range(1e-3..=FRAC_PI_2);
        let p = GuidanceParams { chi_inf, ..GuidanceParams::default() }.with_switch_distance(k1, d_s);
        let chi_p = rng.random_range(-PI..PI);
        let field = |d: f64| wrap_angle(desired_course_distance_only(d, chi_p, &p) - chi_p);

        let ds = p.d_s();
        let h = ds * 1e-12;
        let jump = (field(ds + h) - field(ds - h)).abs().max((field(-ds - h) - field(-ds + h)).abs());
        worst_jump = worst_jump.max(jump);
        check(jump < 1e-6, format!("jump {jump:.2e} at d_s = {ds} (k1 = {k1})"))?;

        for _ in 0..8 {
            let d = rng.random_range(-5.0 * ds..5.0 * ds);
            let (fp, fm) = (field(d), field(-d));
            check((fp + fm).abs() < 1e-12, format!("odd symmetry broken at d = {d}: {fp} vs {fm}"))?;
            check(fp.abs() <= chi_inf, format!("field {fp} outside +-{chi_inf} at d = {d}"))?;
            if d != 0.0 {
                check(fp.abs() < chi_inf, format!("field reached the bound at finite d = {d}"))?;
            }
        }
    }
    within_time(start, Duration::from_secs(2))?;
    Ok(format!("10000 parameter sets, worst jump at d_s {worst_jump:.1e} rad"))
}

fn criterion_6() -> Outcome {
    let mut details = Vec::new();
    for delta in [0.02, 0.05, 0.1] {
        let tr = case1_trajectory(delta)?;
        let n = tr.transitions().len();
        check(n == 2, format!("delta {delta}: {n} switches"))?;
        let c = chattering_index(&tr, 1.0);
        check(c <= 2.0, format!("delta {delta}: chattering index {c}"))?;
        details.push(format!("delta {delta}: {c}/s"));
    }
    Ok(details.join(", "))
}

fn criterion_7() -> Outcome {
    let paths = [
        ("line", ReferencePath::line(Point2::default(), 0.3).map_err(|e| e.to_string())?),
        ("circle", ReferencePath::circle(Point2::default(), 300.0).map_err(|e| e.to_string())?),
        ("sinusoid", ReferencePath::reference_sinusoid()),
    ];
    let dist = MonteCarloDistributions::default();
    let mut details = Vec::new();
    for (name, path) in paths {
        let template = Scenario { path, ..Scenario::reference() };
        let mut latest = 0.0f64;
        for i in 0..50 {
            let draw = TrialDraw::sample(trial_seed(7, i), &dist);
            let sc = draw.apply(&template);
            let out = run_trial(&sc, GuidanceLaw::Switched).map_err(|e| e.to_string())?;
            let s = &out.trajectory.samples;
            // captured: |d| < 1 m from some time on, held to the horizon
            let last_out = s.iter().rposition(|v| v.d.abs() >= 1.0);
            let t_capture = last_out.map_or(0.0, |k| s[k].t);
            check(
                last_out.is_none_or(|k| k + 1 < s.len()) && t_capture < sc.t_max,
                format!("{name} trial {i}: not captured (d0 {:.1}, chi0 {:.3})", draw.d0, draw.chi0),
            )?;
            latest = latest.max(t_capture);
        }
        details.push(format!("{name} 50/50 by {latest:.1} s"));
    }
    Ok(details.join(", "))
}

fn summary_bytes(r: &MonteCarloReport) -> Vec<u8> {
    let mut v = Vec::new();
    write_summary_csv(&mut v, r).unwrap();
    v
}

fn trials_bytes(r: &MonteCarloReport) -> Vec<u8> {
    let mut v = Vec::new();
    write_trials_csv(&mut v, r).unwrap();
    v
}

fn run_campaign() -> Result<MonteCarloReport, String> {
    monte_carlo(&Scenario::reference(), &GuidanceLaw::ALL, MC_TRIALS, MC_SEED, &MonteCarloDistributions::default())
        .map_err(|e| e.to_string())
}

fn criterion_8(report: &Result<MonteCarloReport, String>, elapsed: Duration) -> Outcome {
    let r = report.as_ref().map_err(|e| e.clone())?;
    let median = |law: GuidanceLaw, metric: &str| {
        r.summary.iter().find(|s| s.law == law).and_then(|s| s.metric(metric)).map(|b| b.median).unwrap_or(f64::NAN)
    };
    let (sw_t, vf_t) = (median(GuidanceLaw::Switched, "t_conv"), median(GuidanceLaw::BasicVf, "t_conv"));
    let (sw_r, plos_r) = (median(GuidanceLaw::Switched, "chi_dot_max"), median(GuidanceLaw::Plos, "chi_dot_max"));
    check(sw_t <= vf_t, format!("median t_conv switched {sw_t:.3} s > basic VF {vf_t:.3} s"))?;
    check(sw_r <= plos_r, format!("median max|chi_dot| switched {sw_r:.4} > PLOS {plos_r:.4}"))?;
    check(elapsed < Duration::from_secs(60), format!("runtime {elapsed:.2?} exceeds 60 s"))?;
    Ok(format!(
        "median t_conv {sw_t:.2} <= {vf_t:.2} s, median max|chi_dot| {sw_r:.3} <= {plos_r:.3} rad/s, {elapsed:.1?}"
    ))
}

fn criterion_9(first: &Result<MonteCarloReport, String>) -> Outcome {
    let a = first.as_ref().map_err(|e| e.clone())?;
    let b = run_campaign()?;
    let (sa, sb) = (summary_bytes(a), summary_bytes(&b));
    check(sa == sb, "summary files differ between runs")?;
    check(trials_bytes(a) == trials_bytes(&b), "per-trial files differ between runs")?;
    Ok(format!("summary.csv identical across runs ({} bytes)", sa.len()))
}

fn main() {
    let mut failed = 0;
    let mut report = |n: u32, name: &str, outcome: Outcome| match &outcome {
        Ok(detail) => println!("criterion {n} {name}: PASS ({detail})"),
        Err(reason) => {
            failed += 1;
            println!("criterion {n} {name}: FAIL ({reason})");
        }
    };
    report(1, "case-1 finite-time reaching", criterion_1());
    report(2, "phase sequence", criterion_2());
    report(3, "turn-rate bound", criterion_3());
    report(4, "curvature feasibility", criterion_4());
    report(5, "field continuity and symmetry", criterion_5());
    report(6, "no chattering at switches", criterion_6());
    report(7, "asymptotic capture", criterion_7());
    let start = Instant::now();
    let campaign = run_campaign();
    let elapsed = start.elapsed();
    report(8, "monte carlo ordering", criterion_8(&campaign, elapsed));
    report(9, "determinism", criterion_9(&campaign));
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all 9 criteria passed");
}
