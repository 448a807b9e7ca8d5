//! Switched vector-field guidance.
//!
//! The desired course depends on the cross-track error `d` (a cubic `k3 d^3`
//! branch far from the path, a linear `k1 d` branch inside the switching
//! distance `d_s = sqrt(k1 / k3)`) and on the vehicle course: when the course
//! is more than 90 degrees away from the distance-only field, the field is
//! rotated by `rho * pi/2` so the vehicle first turns parallel to the path.
//!
//! | phase  | predicate                                   | reaching term                  |
//! |--------|---------------------------------------------|--------------------------------|
//! | Case 1 | `|d| > d_s`, `|chi - chi_d(d)| > pi/2`      | `rho * eta * |chi_tilde|^(n/m)` |
//! | Case 2 | `|d| >= d_s`, `|chi - chi_d(d)| <= pi/2`    | `beta * sat(chi_tilde / eps)`  |
//! | Case 3 | `|d| < d_s`                                 | `beta * sat(chi_tilde / eps)`  |
//!
//! with `beta = sigma / (1 + |chi_tilde|)`. Every commanded course carries the
//! feed-forward `chi_p_dot / alpha` and the field-gradient term, so that under
//! `chi_dot = alpha (chi_c - chi)` the course error obeys the reaching law
//! exactly.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, FRAC_PI_4};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::angle::wrap_angle;
use crate::error::{Error, Result};
use crate::path::PathFrame;

/// How the Case-2/Case-3 reaching term switches across the sliding surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReachingMode {
    /// `sat(chi_tilde / epsilon)` boundary layer.
    #[default]
    Sat,
    /// Discontinuous `sign(chi_tilde)`.
    Sign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GuidanceParams {
    /// Far-field approach angle relative to the path tangent, rad.
    pub chi_inf: f64,
    /// Linear-branch gain, 1/m.
    pub k1: f64,
    /// Cubic-branch gain, 1/m^3.
    pub k3: f64,
    /// Course-loop bandwidth, 1/s.
    pub alpha: f64,
    /// Case-1 reaching gain.
    pub eta: f64,
    /// Exponent numerator (odd, co-prime with `m`).
    pub n: u32,
    /// Exponent denominator (odd, `m > n`).
    pub m: u32,
    /// Numerator of `beta = sigma / (1 + |chi_tilde|)`, rad/s.
    pub sigma: f64,
    /// Boundary-layer width of the saturation, rad.
    pub epsilon: f64,
    /// Early-exit margin of the Case-1 predicate, rad.
    pub delta_hys: f64,
    pub reaching: ReachingMode,
}

impl Default for GuidanceParams {
    fn default() -> Self {
        Self {
            chi_inf: FRAC_PI_2,
            k1: 0.01,
            k3: 1e-4,
            alpha: 1.65,
            eta: FRAC_PI_4,
            n: 3,
            m: 5,
            sigma: FRAC_PI_4,
            epsilon: 0.05,
            delta_hys: 0.05,
            reaching: ReachingMode::Sat,
        }
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl GuidanceParams {
    /// Sets `k1` and derives `k3 = k1 / d_s^2` so the two branches meet at `d_s`.
    pub fn with_switch_distance(mut self, k1: f64, d_s: f64) -> Self {
        self.k1 = k1;
        self.k3 = k1 / (d_s * d_s);
        self
    }

    /// Switching distance `sqrt(k1 / k3)`.
    pub fn d_s(&self) -> f64 {
        (self.k1 / self.k3).sqrt()
    }

    pub fn exponent(&self) -> f64 {
        self.n as f64 / self.m as f64
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("k1", self.k1),
            ("k3", self.k3),
            ("alpha", self.alpha),
            ("eta", self.eta),
            ("sigma", self.sigma),
            ("epsilon", self.epsilon),
            ("delta_hys", self.delta_hys),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Argument(format!("guidance.{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.chi_inf > 0.0 && self.chi_inf <= FRAC_PI_2) {
            return Err(Error::Argument(format!("guidance.chi_inf must lie in (0, pi/2], got {}", self.chi_inf)));
        }
        let (n, m) = (self.n, self.m);
        if n == 0 || n >= m || n % 2 == 0 || m % 2 == 0 || gcd(n, m) != 1 {
            return Err(Error::Argument(format!(
                "guidance.n and guidance.m must be odd co-prime integers with 0 < n < m, got n={n}, m={m}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GuidancePhase {
    Case1,
    Case2,
    Case3,
}

impl GuidancePhase {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Case1 => "case1",
            Self::Case2 => "case2",
            Self::Case3 => "case3",
        }
    }
}

impl fmt::Display for GuidancePhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceOutput {
    /// Desired course `chi_d(d, chi)`.
    pub chi_d: f64,
    /// Commanded course.
    pub chi_c: f64,
    pub phase: GuidancePhase,
    /// `wrap(chi - chi_d)`.
    pub chi_tilde: f64,
}

/// Distance-only switched field `chi_d(d)`, wrapped.
pub fn desired_course_distance_only(d: f64, chi_p: f64, params: &GuidanceParams) -> f64 {
    wrap_angle(chi_p - field_offset(d, params))
}

/// `chi_p - chi_d(d)`: `chi_inf (2/pi) atan(k d^i)` with `i = 3` beyond `d_s`.
fn field_offset(d: f64, params: &GuidanceParams) -> f64 {
    let arg = if d.abs() > params.d_s() { params.k3 * d * d * d } else { params.k1 * d };
    params.chi_inf * FRAC_2_PI * arg.atan()
}

/// `chi_inf (2/pi) * d/dd[atan(k d^i)]`, the gain multiplying `d_dot` in the
/// time derivative of the field.
fn field_gradient(d: f64, phase: GuidancePhase, params: &GuidanceParams) -> f64 {
    let g = match phase {
        GuidancePhase::Case1 | GuidancePhase::Case2 => {
            let kd3 = params.k3 * d * d * d;
            3.0 * params.k3 * d * d / (1.0 + kd3 * kd3)
        }
        GuidancePhase::Case3 => {
            let kd = params.k1 * d;
            params.k1 / (1.0 + kd * kd)
        }
    };
    params.chi_inf * FRAC_2_PI * g
}

/// Phase classification with the early Case-1 exit.
///
/// `prev = None` marks the first step, where the plain `pi/2` predicate is
/// used. Afterwards Case 1 is entered or kept only while
/// `|wrap(chi - chi_d(d))| > pi/2 + delta_hys`, so the Case1 -> Case2 switch
/// happens before the Case-1 course error reaches zero and the band
/// `(pi/2, pi/2 + delta_hys]` cannot bounce the vehicle back into Case 1.
pub fn classify_phase(
    d: f64,
    chi: f64,
    chi_d_of_d: f64,
    params: &GuidanceParams,
    prev: Option<GuidancePhase>,
) -> GuidancePhase {
    if d.abs() < params.d_s() {
        return GuidancePhase::Case3;
    }
    let h = if prev.is_some() { params.delta_hys } else { 0.0 };
    if wrap_angle(chi - chi_d_of_d).abs() > FRAC_PI_2 + h {
        GuidancePhase::Case1
    } else {
        GuidancePhase::Case2
    }
}

/// Course-dependent switched field `chi_d(d, chi)` and the active phase.
pub fn desired_course(
    d: f64,
    chi: f64,
    chi_p: f64,
    rho: f64,
    params: &GuidanceParams,
    prev: Option<GuidancePhase>,
) -> (f64, GuidancePhase) {
    let base = desired_course_distance_only(d, chi_p, params);
    let phase = classify_phase(d, chi, base, params, prev);
    (desired_course_for_phase(base, rho, phase), phase)
}

fn desired_course_for_phase(base: f64, rho: f64, phase: GuidancePhase) -> f64 {
    match phase {
        GuidancePhase::Case1 => wrap_angle(base + rho * FRAC_PI_2),
        _ => base,
    }
}

/// `x` clipped to [-1, 1].
pub fn sat(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Commanded course for the current geometry. `frame.chi_p_dot` supplies the
/// path course-rate feed-forward.
pub fn commanded_course(
    chi: f64,
    frame: &PathFrame,
    params: &GuidanceParams,
    prev: Option<GuidancePhase>,
    ground_speed: f64,
) -> GuidanceOutput {
    let base = desired_course_distance_only(frame.d, frame.chi_p, params);
    let phase = classify_phase(frame.d, chi, base, params, prev);
    commanded_course_in_phase(chi, frame, params, phase, ground_speed)
}

/// Commanded course with the phase imposed by the caller.
pub fn commanded_course_in_phase(
    chi: f64,
    frame: &PathFrame,
    params: &GuidanceParams,
    phase: GuidancePhase,
    ground_speed: f64,
) -> GuidanceOutput {
    let base = desired_course_distance_only(frame.d, frame.chi_p, params);
    let chi_d = desired_course_for_phase(base, frame.rho, phase);
    let chi_tilde = wrap_angle(chi - chi_d);
    let alpha = params.alpha;

    let feedforward =
        frame.chi_p_dot - field_gradient(frame.d, phase, params) * ground_speed * wrap_angle(chi - frame.chi_p).sin();
    let reaching = match phase {
        GuidancePhase::Case1 => frame.rho * params.eta * chi_tilde.abs().powf(params.exponent()),
        GuidancePhase::Case2 | GuidancePhase::Case3 => {
            let beta = params.sigma / (1.0 + chi_tilde.abs());
            let s = match params.reaching {
                ReachingMode::Sat => sat(chi_tilde / params.epsilon),
                ReachingMode::Sign => sign(chi_tilde),
            };
            beta * s
        }
    };
    GuidanceOutput { chi_d, chi_c: wrap_angle(chi + (feedforward - reaching) / alpha), phase, chi_tilde }
}

/// Finite reaching time of the Case-1 law, `m / (eta (m - n)) |chi_tilde0|^((m-n)/m)`.
pub fn case1_convergence_time(chi_tilde0: f64, params: &GuidanceParams) -> f64 {
    let (n, m) = (params.n as f64, params.m as f64);
    m / (params.eta * (m - n)) * chi_tilde0.abs().powf((m - n) / m)
}

/// Result of the curvature feasibility check.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    /// `2 k1 / (3 sqrt 3)`, 1/m.
    pub k1_curvature: f64,
    /// `2^(4/3) 5^(5/6) k3^(1/3) / 9`, 1/m.
    pub k3_curvature: f64,
    /// Peak `|chi_d_dot - chi_p_dot|` on the linear branch, rad/s.
    pub k1_peak_rate: f64,
    /// Peak `|chi_d_dot - chi_p_dot|` on the cubic branch, rad/s.
    pub k3_peak_rate: f64,
    /// `|d|` at the linear-branch peak, `1 / (sqrt 2 k1)`.
    pub k1_peak_distance: f64,
    /// `|d|` at the cubic-branch peak, `5^(1/6) / (2^(1/3) k3^(1/3))`.
    pub k3_peak_distance: f64,
    /// `max(k1_curvature, k3_curvature) - chi_p_dot_max / V_g`.
    pub lhs: f64,
    /// Allowed curvature; infinite when unbounded.
    pub kappa_max: f64,
    /// `kappa_max - lhs`.
    pub margin: f64,
    pub pass: bool,
}

/// Checks `max{2k1/(3 sqrt 3), 2^(4/3) 5^(5/6) k3^(1/3) / 9} - |chi_p_dot|_max / V_g <= kappa_max`.
/// `kappa_max = 0` means unbounded.
pub fn validate_curvature_constraint(
    params: &GuidanceParams,
    ground_speed: f64,
    chi_p_dot_max: f64,
    kappa_max: f64,
) -> Result<FeasibilityReport> {
    if !(params.k1 > 0.0 && params.k3 > 0.0) {
        return Err(Error::Argument("k1 and k3 must be positive".into()));
    }
    if !(ground_speed > 0.0) {
        return Err(Error::Argument(format!("ground speed must be positive, got {ground_speed}")));
    }
    if !(chi_p_dot_max >= 0.0) {
        return Err(Error::Argument(format!("path course rate bound must be non-negative, got {chi_p_dot_max}")));
    }
    if !(kappa_max >= 0.0) {
        return Err(Error::Argument(format!("kappa_max must be non-negative, got {kappa_max}")));
    }
    let k1_curvature = 2.0 * params.k1 / (3.0 * 3f64.sqrt());
    let k3_curvature = 2f64.powf(4.0 / 3.0) * 5f64.powf(5.0 / 6.0) * params.k3.cbrt() / 9.0;
    let lhs = k1_curvature.max(k3_curvature) - chi_p_dot_max / ground_speed;
    let kappa = if kappa_max == 0.0 { f64::INFINITY } else { kappa_max };
    Ok(FeasibilityReport {
        k1_curvature,
        k3_curvature,
        k1_peak_rate: k1_curvature * ground_speed,
        k3_peak_rate: k3_curvature * ground_speed,
        k1_peak_distance: 1.0 / (2f64.sqrt() * params.k1),
        k3_peak_distance: 5f64.powf(1.0 / 6.0) / (2f64.cbrt() * params.k3.cbrt()),
        lhs,
        kappa_max: kappa,
        margin: kappa - lhs,
        pass: lhs <= kappa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::Point2;
    use std::f64::consts::PI;

    fn frame(d: f64, chi_p: f64) -> PathFrame {
        PathFrame {
            s_star: 0.0,
            p_ref: Point2::default(),
            chi_p,
            d,
            rho: if d >= 0.0 { 1.0 } else { -1.0 },
            chi_p_dot: 0.0,
        }
    }

    #[test]
    fn defaults_are_valid_and_switch_at_ten_metres() {
        let p = GuidanceParams::default();
        p.validate().unwrap();
        assert!((p.d_s() - 10.0).abs() < 1e-12);
        let q = GuidanceParams::default().with_switch_distance(0.02, 5.0);
        assert!((q.k3 - 0.02 / 25.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let bad_nm = [(2, 5), (3, 3), (5, 3), (3, 9), (0, 5)];
        for (n, m) in bad_nm {
            let p = GuidanceParams { n, m, ..Default::default() };
            assert!(p.validate().is_err(), "n={n} m={m}");
        }
        assert!(GuidanceParams { eta: 0.0, ..Default::default() }.validate().is_err());
        assert!(GuidanceParams { chi_inf: 2.0, ..Default::default() }.validate().is_err());
        assert!(GuidanceParams { n: 1, m: 3, ..Default::default() }.validate().is_ok());
    }

    #[test]
    fn distance_field_examples() {
        let p = GuidanceParams::default();
        assert_eq!(desired_course_distance_only(0.0, 0.3, &p), 0.3);
        let far = desired_course_distance_only(1e6, 0.0, &p);
        assert!((far + FRAC_PI_2).abs() < 1e-12);
        // both branches agree at d_s
        let linear = -(p.k1 * 10.0f64).atan();
        let cubic = -(p.k3 * 1000.0f64).atan();
        assert!((linear - cubic).abs() < 1e-12);
        assert!((desired_course_distance_only(10.0, 0.0, &p) - linear).abs() < 1e-12);
        assert!((linear + 0.099_668_652_491_162).abs() < 1e-12);
    }

    #[test]
    fn classify_examples() {
        let p = GuidanceParams::default();
        let base = desired_course_distance_only(200.0, 0.0, &p);
        assert_eq!(classify_phase(200.0, base + 3.0, base, &p, Some(GuidancePhase::Case2)), GuidancePhase::Case1);
        assert_eq!(classify_phase(5.0, 2.0, 0.0, &p, Some(GuidancePhase::Case1)), GuidancePhase::Case3);
        assert_eq!(
            classify_phase(200.0, base + FRAC_PI_2 + 0.04, base, &p, Some(GuidancePhase::Case1)),
            GuidancePhase::Case2
        );
        // first step uses the plain pi/2 predicate
        assert_eq!(classify_phase(200.0, base + FRAC_PI_2 + 0.04, base, &p, None), GuidancePhase::Case1);
        // inside the margin band a Case-2 vehicle stays in Case 2
        assert_eq!(
            classify_phase(200.0, base + FRAC_PI_2 + 0.04, base, &p, Some(GuidancePhase::Case2)),
            GuidancePhase::Case2
        );
    }

    #[test]
    fn desired_course_examples() {
        let p = GuidanceParams::default();
        let (chi_d, phase) = desired_course(200.0, 2.5, 0.0, 1.0, &p, None);
        assert_eq!(phase, GuidancePhase::Case1);
        let expect = -(800f64).atan() + FRAC_PI_2;
        assert!((chi_d - expect).abs() < 1e-12);
        assert!((chi_d - 0.001_249_999_349).abs() < 1e-9);

        let (chi_d, phase) = desired_course(0.0, 0.0, 0.4, 1.0, &p, None);
        assert_eq!((chi_d, phase), (0.4, GuidancePhase::Case3));

        let (chi_d, phase) = desired_course(-200.0, 1.5, 0.0, -1.0, &p, None);
        assert_eq!(phase, GuidancePhase::Case2);
        assert!((chi_d - 800f64.atan()).abs() < 1e-12);
        let (pos, _) = desired_course(200.0, -1.5, 0.0, 1.0, &p, None);
        assert!((pos + chi_d).abs() < 1e-12);
    }

    #[test]
    fn sat_examples() {
        assert_eq!(sat(0.5), 0.5);
        assert_eq!(sat(-3.0), -1.0);
        assert_eq!(sat(1.0), 1.0);
    }

    #[test]
    fn on_path_equilibrium() {
        let p = GuidanceParams::default();
        let out = commanded_course(0.7, &frame(0.0, 0.7), &p, None, 15.0);
        assert_eq!(out.phase, GuidancePhase::Case3);
        assert_eq!(out.chi_tilde, 0.0);
        assert_eq!(out.chi_c, 0.7);
    }

    #[test]
    fn case1_reaching_term_has_rho_sign() {
        let p = GuidanceParams::default();
        // far enough that the gradient term is negligible
        let f = frame(5000.0, 0.0);
        let base = desired_course_distance_only(f.d, 0.0, &p);
        let chi = wrap_angle(base + FRAC_PI_2 + 1.0);
        let out = commanded_course(chi, &f, &p, None, 15.0);
        assert_eq!(out.phase, GuidancePhase::Case1);
        assert!((out.chi_tilde - 1.0).abs() < 1e-12);
        let rate = p.alpha * wrap_angle(out.chi_c - chi);
        let grad = field_gradient(f.d, GuidancePhase::Case1, &p) * 15.0 * chi.sin();
        assert!((rate - (-grad - p.eta)).abs() < 1e-12);
    }

    #[test]
    fn boundary_layer_reaching_term() {
        let p = GuidanceParams::default();
        let f = frame(3.0, 0.0);
        let base = desired_course_distance_only(3.0, 0.0, &p);
        let chi = base + p.epsilon / 2.0;
        let out = commanded_course(chi, &f, &p, Some(GuidancePhase::Case3), 15.0);
        assert_eq!(out.phase, GuidancePhase::Case3);
        let beta = p.sigma / (1.0 + p.epsilon / 2.0);
        let grad = field_gradient(3.0, GuidancePhase::Case3, &p) * 15.0 * chi.sin();
        let expect = chi + (-grad - beta * 0.5) / p.alpha;
        assert!((out.chi_c - expect).abs() < 1e-12);
    }

    #[test]
    fn sign_mode_uses_full_gain() {
        let p = GuidanceParams { reaching: ReachingMode::Sign, ..Default::default() };
        let f = frame(0.0, 0.0);
        let out = commanded_course(0.01, &f, &p, Some(GuidancePhase::Case3), 15.0);
        let beta = p.sigma / 1.01;
        let expect = 0.01 + (-field_gradient(0.0, GuidancePhase::Case3, &p) * 15.0 * 0.01f64.sin() - beta) / p.alpha;
        assert!((out.chi_c - expect).abs() < 1e-12);
    }

    #[test]
    fn convergence_time_examples() {
        let p = GuidanceParams::default();
        assert_eq!(case1_convergence_time(0.0, &p), 0.0);
        assert!((case1_convergence_time(1.0, &p) - 10.0 / PI).abs() < 1e-12);
        assert!((case1_convergence_time(0.25, &p) - 1.828_210_213_193_069).abs() < 1e-12);
    }

    #[test]
    fn feasibility_examples() {
        let p = GuidanceParams::default();
        let r = validate_curvature_constraint(&p, 15.0, 0.1, 0.7 / 15.0).unwrap();
        assert!((r.k1_curvature - 0.003_849_001_794_6).abs() < 1e-12);
        assert!((r.k3_curvature - 0.049_690_399_5).abs() < 1e-10);
        assert!((r.lhs - 0.043_023_732_833).abs() < 1e-10);
        assert!(r.pass);
        assert!((r.k1_peak_distance - 70.710_678_118_65).abs() < 1e-9);
        assert!((r.k3_peak_distance - 22.360_679_775).abs() < 1e-6);

        let aggressive = GuidanceParams { k1: 0.2, ..Default::default() };
        let r = validate_curvature_constraint(&aggressive, 15.0, 0.0, 0.7 / 15.0).unwrap();
        assert!((r.k1_curvature - 0.076_980_035_891_95).abs() < 1e-12);
        assert!(!r.pass);

        let r = validate_curvature_constraint(&aggressive, 15.0, 0.0, 0.0).unwrap();
        assert!(r.pass);
        assert!(r.kappa_max.is_infinite());

        assert!(validate_curvature_constraint(&p, 0.0, 0.1, 0.05).is_err());
        assert!(validate_curvature_constraint(&p, 15.0, -0.1, 0.05).is_err());
    }
}
