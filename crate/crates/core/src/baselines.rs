//! Comparison guidance laws: the unswitched vector field, pure pursuit with
//! line-of-sight (PLOS), and nonlinear L1 guidance (NLGL).
//!
//! All three produce a course command for the same first-order course loop
//! used by the switched law.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::angle::wrap_angle;
use crate::error::{Error, Result};
use crate::path::{PathFrame, Point2, ReferencePath};
use crate::vehicle::VehicleState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasicVfParams {
    /// Field gain, 1/m.
    pub k: f64,
    /// Far-field approach angle, rad.
    pub chi_inf: f64,
}

impl Default for BasicVfParams {
    fn default() -> Self {
        Self { k: 0.02, chi_inf: FRAC_PI_2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlosParams {
    /// Gain on the line-of-sight heading error, 1/s.
    pub k1: f64,
    /// Gain on the cross-track error, rad/(s m).
    pub k2: f64,
    /// Arc distance from the closest point to the pursuit point, m.
    pub lookahead: f64,
}

impl Default for PlosParams {
    fn default() -> Self {
        Self { k1: 15.0, k2: 0.1, lookahead: 30.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NlglParams {
    /// Look-ahead distance, m.
    pub l1: f64,
}

impl Default for NlglParams {
    fn default() -> Self {
        Self { l1: 110.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineParams {
    pub basic_vf: BasicVfParams,
    pub plos: PlosParams,
    pub nlgl: NlglParams,
}

impl BaselineParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("baselines.basic_vf.k", self.basic_vf.k),
            ("baselines.basic_vf.chi_inf", self.basic_vf.chi_inf),
            ("baselines.plos.k1", self.plos.k1),
            ("baselines.plos.k2", self.plos.k2),
            ("baselines.plos.lookahead", self.plos.lookahead),
            ("baselines.nlgl.l1", self.nlgl.l1),
        ];
        for (name, v) in checks {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Argument(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// Unswitched field `chi_p - chi_inf (2/pi) atan(k d)`.
pub fn basic_vf_desired_course(d: f64, chi_p: f64, params: &BasicVfParams) -> f64 {
    wrap_angle(chi_p - params.chi_inf * FRAC_2_PI * (params.k * d).atan())
}

/// The unswitched field tracked by a proportional course loop: the command is
/// the desired course itself.
pub fn basic_vf_command(frame: &PathFrame, params: &BasicVfParams) -> f64 {
    basic_vf_desired_course(frame.d, frame.chi_p, params)
}

/// PLOS command and the line-of-sight angle it pursues.
///
/// The turn rate is `k1 * wrap(theta - chi) - k2 * d`, where `theta` is the
/// bearing to a point `lookahead` metres of arc ahead of the closest point. The
/// first term is the pure-pursuit part; the second pushes toward the path
/// (`d > 0` lies on the +90 degree side, so a negative turn closes it). The
/// implied course increment is clamped to (-pi, pi) before wrapping.
pub fn plos_command(
    state: &VehicleState,
    frame: &PathFrame,
    path: &ReferencePath,
    params: &PlosParams,
    alpha: f64,
) -> (f64, f64) {
    let s_vtp = path.advance(frame.s_star, params.lookahead);
    let theta = match path.evaluate(s_vtp) {
        Ok(vtp) if vtp.dist(state.position()) > 1e-9 => (vtp - state.position()).angle(),
        _ => frame.chi_p,
    };
    let u = params.k1 * wrap_angle(theta - state.chi) - params.k2 * frame.d;
    let limit = PI * (1.0 - 1e-9);
    let chi_c = wrap_angle(state.chi + (u / alpha).clamp(-limit, limit));
    (chi_c, wrap_angle(theta))
}

/// Virtual target of L1 guidance: the forward-most path point at distance `l1`.
pub fn nlgl_target(path: &ReferencePath, frame: &PathFrame, position: Point2, l1: f64) -> Result<Point2> {
    if frame.d.abs() > l1 {
        return Err(Error::LookAheadInfeasible { distance: frame.d.abs(), l1 });
    }
    let roots = path.circle_intersections(position, l1);
    let ahead = |s: f64| match path {
        ReferencePath::Circle(_) => wrap_angle(s - frame.s_star),
        _ => s - frame.s_star,
    };
    let s = roots
        .into_iter()
        .max_by(|a, b| ahead(*a).total_cmp(&ahead(*b)))
        .ok_or(Error::LookAheadInfeasible { distance: frame.d.abs(), l1 })?;
    path.evaluate(s)
}

/// NLGL command and the bearing to its virtual target.
///
/// Lateral acceleration `2 V^2 / L1 * sin(eta)` (eta: angle from the velocity
/// to the target) becomes a turn rate `2 V sin(eta) / L1`, realized through the
/// course loop as `chi_c = chi + rate / alpha`.
pub fn nlgl_command(
    state: &VehicleState,
    frame: &PathFrame,
    path: &ReferencePath,
    params: &NlglParams,
    ground_speed: f64,
    alpha: f64,
) -> Result<(f64, f64)> {
    let target = nlgl_target(path, frame, state.position(), params.l1)?;
    let los = (target - state.position()).angle();
    let eta = wrap_angle(los - state.chi);
    let rate = 2.0 * ground_speed * eta.sin() / params.l1;
    Ok((wrap_angle(state.chi + rate / alpha), los))
}
