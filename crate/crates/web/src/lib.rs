//! WebAssembly bindings for the browser demo. Every export takes the scenario
//! as TOML text and returns JSON; failures come back as `{"error": "..."}`.

use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

use switched_vf::cli::feasibility;
use switched_vf::config::ScenarioConfig;
use switched_vf::guidance::desired_course_distance_only;
use switched_vf::path::{Point2, ReferencePath};
use switched_vf::sim::{run_trial, GuidanceLaw};

const PATH_SAMPLES: usize = 1500;
/// Half-width of the drawn window for unbounded paths, m.
const LINE_EXTENT: f64 = 4000.0;

fn error_json(e: impl ToString) -> String {
    json!({ "error": e.to_string() }).to_string()
}

fn parse(config: &str) -> Result<ScenarioConfig, String> {
    ScenarioConfig::from_toml_str(config).map_err(|e| e.to_string())
}

/// TOML text of a preset: `"reference"` (the four-law comparison start) or
/// `"case1"` (start pointing away from the path).
#[wasm_bindgen]
pub fn preset_config(name: &str) -> String {
    let cfg = match name {
        "case1" => ScenarioConfig::case1_preset(),
        _ => ScenarioConfig::default(),
    };
    cfg.to_toml_string().unwrap_or_else(|e| format!("# {e}\n"))
}

#[derive(Serialize, Default)]
struct Series {
    t: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
    chi_dot: Vec<f64>,
    phase: Vec<&'static str>,
}

fn path_points(path: &ReferencePath, around: Point2) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = path.domain();
    let (lo, hi) = if lo.is_finite() && hi.is_finite() {
        (lo, hi)
    } else {
        let s = path.closest_point(around).map(|f| f.s_star).unwrap_or(0.0);
        (s - LINE_EXTENT, s + LINE_EXTENT)
    };
    let mut xs = Vec::with_capacity(PATH_SAMPLES + 1);
    let mut ys = Vec::with_capacity(PATH_SAMPLES + 1);
    for i in 0..=PATH_SAMPLES {
        if let Ok(p) = path.evaluate(lo + (hi - lo) * i as f64 / PATH_SAMPLES as f64) {
            xs.push(p.x);
            ys.push(p.y);
        }
    }
    (xs, ys)
}

fn simulate_inner(config: &str, law: &str, stride: usize) -> Result<String, String> {
    let cfg = parse(config)?;
    let law: GuidanceLaw = law.parse().map_err(|e: switched_vf::Error| e.to_string())?;
    let sc = cfg.scenario_for(law).map_err(|e| e.to_string())?;
    let out = run_trial(&sc, law).map_err(|e| e.to_string())?;
    let stride = stride.max(1);
    let mut s = Series::default();
    for v in out.trajectory.samples.iter().step_by(stride) {
        s.t.push(v.t);
        s.x.push(v.x);
        s.y.push(v.y);
        s.d.push(v.d);
        s.chi_dot.push(v.chi_dot);
        s.phase.push(v.phase.map_or("none", |p| p.as_str()));
    }
    let start = out
        .trajectory
        .samples
        .first()
        .map(|v| Point2::new(v.x, v.y))
        .or_else(|| sc.initial.resolve(&sc.path).ok().map(|v| v.position()))
        .unwrap_or_default();
    let (px, py) = path_points(&sc.path, start);
    let m = &out.metrics;
    Ok(json!({
        "law": law.as_str(),
        "metrics": {
            "converged": m.converged,
            "t_conv": m.t_conv,
            "d_rms": finite(m.d_rms),
            "chi_dot_rms": finite(m.chi_dot_rms),
            "chi_dot_max": finite(m.chi_dot_max),
            "chattering_index": finite(m.chattering_index),
            "failure": m.failure,
        },
        "start": [start.x, start.y],
        "series": s,
        "path": { "x": px, "y": py },
    })
    .to_string())
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Runs one law (`switched`, `basic_vf`, `plos`, `nlgl`) and returns every
/// `stride`-th sample, the metrics and a polyline of the path.
#[wasm_bindgen]
pub fn simulate(config: &str, law: &str, stride: usize) -> String {
    simulate_inner(config, law, stride).unwrap_or_else(error_json)
}

fn field_inner(config: &str, x0: f64, y0: f64, x1: f64, y1: f64, nx: usize, ny: usize) -> Result<String, String> {
    let cfg = parse(config)?;
    let sc = cfg.scenario().map_err(|e| e.to_string())?;
    let (nx, ny) = (nx.clamp(2, 80), ny.clamp(2, 80));
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let p = Point2::new(
                x0 + (x1 - x0) * (i as f64 + 0.5) / nx as f64,
                y0 + (y1 - y0) * (j as f64 + 0.5) / ny as f64,
            );
            if let Ok(f) = sc.path.closest_point(p) {
                let course = desired_course_distance_only(f.d, f.chi_p, &sc.guidance);
                cells.push([p.x, p.y, course, f.d]);
            }
        }
    }
    Ok(json!({ "d_s": sc.guidance.d_s(), "cells": cells }).to_string())
}

/// Desired course of the distance-only field on an `nx` x `ny` grid over the
/// box `[x0, x1] x [y0, y1]`. Each cell is `[x, y, course, d]`.
#[wasm_bindgen]
pub fn field_grid(config: &str, x0: f64, y0: f64, x1: f64, y1: f64, nx: usize, ny: usize) -> String {
    field_inner(config, x0, y0, x1, y1, nx, ny).unwrap_or_else(error_json)
}

fn validate_inner(config: &str) -> Result<String, String> {
    let cfg = parse(config)?;
    let r = feasibility(&cfg).map_err(|e| e.to_string())?;
    Ok(json!({
        "k1_curvature": r.k1_curvature,
        "k3_curvature": r.k3_curvature,
        "k1_peak_distance": r.k1_peak_distance,
        "k3_peak_distance": r.k3_peak_distance,
        "lhs": r.lhs,
        "kappa_max": finite(r.kappa_max),
        "margin": finite(r.margin),
        "pass": r.pass,
    })
    .to_string())
}

/// Curvature feasibility of the configured gains.
#[wasm_bindgen]
pub fn validate(config: &str) -> String {
    validate_inner(config).unwrap_or_else(error_json)
}
