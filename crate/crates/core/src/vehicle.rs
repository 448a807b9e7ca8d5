//! Constant-airspeed planar vehicle with additive wind and first-order course
//! dynamics:
//!
//! ```text
//! x_dot   = V_g cos(chi)
//! y_dot   = V_g sin(chi)
//! chi_dot = alpha * wrap(chi_c - chi)
//! ```

use serde::{Deserialize, Serialize};

use crate::angle::wrap_angle;
use crate::error::{Error, Result};
use crate::path::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    /// Course angle, wrapped to (-pi, pi].
    pub chi: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, chi: f64) -> Self {
        Self { x, y, chi: wrap_angle(chi) }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// Constant wind, m/s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WindModel {
    pub x: f64,
    pub y: f64,
}

impl WindModel {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(speed: f64, direction: f64) -> Self {
        Self::new(speed * direction.cos(), speed * direction.sin())
    }

    pub fn speed(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AirspeedSpec {
    pub airspeed: f64,
}

impl AirspeedSpec {
    pub fn new(airspeed: f64) -> Self {
        Self { airspeed }
    }

    /// Checks `V_a > 0` and `V_a > |W|`.
    pub fn check_wind(&self, wind: WindModel) -> Result<()> {
        if !(self.airspeed > 0.0 && self.airspeed.is_finite()) {
            return Err(Error::Argument(format!("airspeed must be positive, got {}", self.airspeed)));
        }
        if !(wind.x.is_finite() && wind.y.is_finite()) {
            return Err(Error::Argument("wind must be finite".into()));
        }
        if wind.speed() >= self.airspeed {
            return Err(Error::WindInfeasible { wind: wind.speed(), airspeed: self.airspeed });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Euler,
    #[default]
    Rk4,
}

/// Ground speed while holding course `chi`: the air-velocity heading is chosen
/// so the ground velocity points along `chi` (crab solution).
pub fn ground_speed(spec: AirspeedSpec, wind: WindModel, chi: f64) -> Result<f64> {
    spec.check_wind(wind)?;
    Ok(ground_speed_unchecked(spec.airspeed, wind, chi))
}

#[inline]
fn ground_speed_unchecked(airspeed: f64, wind: WindModel, chi: f64) -> f64 {
    let (s, c) = chi.sin_cos();
    let along = wind.x * c + wind.y * s;
    let cross = -wind.x * s + wind.y * c;
    (airspeed * airspeed - cross * cross).sqrt() + along
}

/// Commanded turn rate `alpha * wrap(chi_c - chi)`.
#[inline]
pub fn turn_rate(chi_c: f64, chi: f64, alpha: f64) -> f64 {
    alpha * wrap_angle(chi_c - chi)
}

/// Advances the vehicle by one step of `dt` with the course command held.
pub fn step(
    state: VehicleState,
    chi_c: f64,
    spec: AirspeedSpec,
    wind: WindModel,
    alpha: f64,
    dt: f64,
    method: Integrator,
) -> Result<VehicleState> {
    spec.check_wind(wind)?;
    if !(dt > 0.0) {
        return Err(Error::Argument(format!("dt must be positive, got {dt}")));
    }
    if !(alpha > 0.0) {
        return Err(Error::Argument(format!("alpha must be positive, got {alpha}")));
    }
    let va = spec.airspeed;
    let f = |chi: f64| {
        let vg = ground_speed_unchecked(va, wind, chi);
        let (s, c) = chi.sin_cos();
        [vg * c, vg * s, turn_rate(chi_c, chi, alpha)]
    };
    let [x, y, chi] = [state.x, state.y, state.chi];
    let next = match method {
        Integrator::Euler => {
            let k = f(chi);
            [x + dt * k[0], y + dt * k[1], chi + dt * k[2]]
        }
        Integrator::Rk4 => {
            let k1 = f(chi);
            let k2 = f(chi + 0.5 * dt * k1[2]);
            let k3 = f(chi + 0.5 * dt * k2[2]);
            let k4 = f(chi + dt * k3[2]);
            let w = |i: usize| (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * dt / 6.0;
            [x + w(0), y + w(1), chi + w(2)]
        }
    };
    Ok(VehicleState { x: next[0], y: next[1], chi: wrap_angle(next[2]) })
}
