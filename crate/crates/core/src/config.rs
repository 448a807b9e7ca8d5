//! TOML scenario files.
//!
//! Every key has a default, so an empty file describes the reference sinusoid
//! comparison. Unknown keys are rejected.
//!
//! ```toml
//! [path]
//! kind = "circle"
//! radius = 300.0
//!
//! [vehicle]
//! airspeed = 15.0
//! wind_speed = 2.5
//! wind_direction = -2.2
//!
//! [guidance]
//! k1 = 0.01
//!
//! [sim]
//! d0 = 150.0
//! chi0 = 1.75
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::BaselineParams;
use crate::error::{Error, Result};
use crate::guidance::GuidanceParams;
use crate::path::{sinusoid_wavelength_for_rate, Point2, Polyline, ReferencePath};
use crate::sim::{
    trial_seed, ConvergenceCriteria, GuidanceLaw, InitialCondition, MonteCarloDistributions, Scenario, TrialDraw,
};
use crate::vehicle::{AirspeedSpec, Integrator, VehicleState, WindModel};

fn reference_wavelength() -> f64 {
    sinusoid_wavelength_for_rate(300.0, 15.0, 0.1)
}

fn default_amplitude() -> f64 {
    300.0
}

fn default_radius() -> f64 {
    300.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PathConfig {
    Line {
        #[serde(default)]
        origin: [f64; 2],
        #[serde(default)]
        heading: f64,
    },
    Circle {
        #[serde(default)]
        center: [f64; 2],
        #[serde(default = "default_radius")]
        radius: f64,
    },
    Sinusoid {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "reference_wavelength")]
        wavelength: f64,
        /// Defaults to `-wavelength`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_min: Option<f64>,
        /// Defaults to `5 * wavelength`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_max: Option<f64>,
    },
    Polyline {
        /// CSV of `x,y` rows, relative to the config file.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        file: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points: Option<Vec<[f64; 2]>>,
    },
}

impl Default for PathConfig {
    fn default() -> Self {
        Self::Sinusoid { amplitude: default_amplitude(), wavelength: reference_wavelength(), x_min: None, x_max: None }
    }
}

impl PathConfig {
    pub fn build(&self, base_dir: &Path) -> Result<ReferencePath> {
        let path = match self {
            Self::Line { origin, heading } => ReferencePath::line(Point2::new(origin[0], origin[1]), *heading),
            Self::Circle { center, radius } => ReferencePath::circle(Point2::new(center[0], center[1]), *radius),
            Self::Sinusoid { amplitude, wavelength, x_min, x_max } => ReferencePath::sinusoid(
                *amplitude,
                *wavelength,
                x_min.unwrap_or(-wavelength),
                x_max.unwrap_or(5.0 * wavelength),
            ),
            Self::Polyline { file, points } => match (file, points) {
                (Some(f), None) => {
                    let full = base_dir.join(f);
                    let pl = Polyline::from_csv_file(&full)
                        .map_err(|e| Error::Config(format!("path.file '{}': {e}", full.display())))?;
                    Ok(ReferencePath::Polyline(pl))
                }
                (None, Some(p)) => ReferencePath::polyline(p.iter().map(|v| Point2::new(v[0], v[1])).collect()),
                _ => {
                    return Err(Error::Config("path: polyline needs exactly one of `file` or `points`".into()));
                }
            },
        };
        path.map_err(|e| Error::Config(format!("path: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleConfig {
    /// m/s.
    pub airspeed: f64,
    /// m/s.
    pub wind_speed: f64,
    /// Direction the wind blows toward, rad.
    pub wind_direction: f64,
    /// Largest flyable curvature, 1/m; 0 means unbounded.
    pub kappa_max: f64,
}

impl Default for VehicleConfig {
    fn default() -> Self {
        Self { airspeed: 15.0, wind_speed: 0.0, wind_direction: 0.0, kappa_max: 0.7 / 15.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Step, s.
    pub dt: f64,
    /// Horizon, s.
    pub t_max: f64,
    pub integrator: Integrator,
    /// Path parameter of the start point.
    pub s0: f64,
    /// Initial cross-track offset, m.
    pub d0: f64,
    /// Initial course, rad.
    pub chi0: f64,
    /// Explicit `[x, y, chi]` start; overrides `s0`, `d0` and `chi0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<[f64; 3]>,
    /// Offset used instead of `d0` when running NLGL alone or in a comparison.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nlgl_d0: Option<f64>,
    /// Draw `d0`, `chi0` and the wind from `[sim.montecarlo]` for single runs.
    pub random_initial: bool,
    /// Master seed.
    pub seed: u64,
    /// Monte Carlo trial count.
    pub trials: usize,
    pub d_threshold: f64,
    pub align_threshold: f64,
    pub dwell: f64,
    pub chatter_window: f64,
    pub montecarlo: MonteCarloDistributions,
}

impl Default for SimConfig {
    fn default() -> Self {
        let c = ConvergenceCriteria::default();
        Self {
            dt: 0.01,
            t_max: 300.0,
            integrator: Integrator::Rk4,
            s0: 0.0,
            d0: 200.0,
            chi0: -PI / 4.0,
            start: None,
            nlgl_d0: Some(80.0),
            random_initial: false,
            seed: 2024,
            trials: 200,
            d_threshold: c.d_threshold,
            align_threshold: c.align_threshold,
            dwell: c.dwell,
            chatter_window: 1.0,
            montecarlo: MonteCarloDistributions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub path: PathConfig,
    pub vehicle: VehicleConfig,
    pub guidance: GuidanceParams,
    pub baselines: BaselineParams,
    pub sim: SimConfig,
    /// Directory that relative file references resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ScenarioConfig {
    /// Reference sinusoid started in Case-1 geometry: 200 m off the path,
    /// course 1.75 rad (pointing away from the path), no wind.
    pub fn case1_preset() -> Self {
        let mut c = Self::default();
        c.sim.chi0 = 1.75;
        c
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config file '{}': {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), strip_prefix(e))))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Effective configuration as TOML. Polyline files are inlined so the
    /// output is self-contained.
    pub fn to_toml_string(&self) -> Result<String> {
        let mut cfg = self.clone();
        if let PathConfig::Polyline { file: Some(_), .. } = &cfg.path {
            if let ReferencePath::Polyline(pl) = cfg.path.build(&cfg.base_dir)? {
                cfg.path =
                    PathConfig::Polyline { file: None, points: Some(pl.points().iter().map(|p| [p.x, p.y]).collect()) };
            }
        }
        toml::to_string(&cfg).map_err(|e| Error::Config(e.to_string()))
    }

    fn check(&self) -> Result<()> {
        let v = &self.vehicle;
        if !(v.airspeed > 0.0 && v.airspeed.is_finite()) {
            return Err(Error::Config(format!("vehicle.airspeed must be positive, got {}", v.airspeed)));
        }
        if !(v.wind_speed >= 0.0 && v.wind_speed.is_finite()) {
            return Err(Error::Config(format!("vehicle.wind_speed must be non-negative, got {}", v.wind_speed)));
        }
        if !(v.kappa_max >= 0.0) {
            return Err(Error::Config(format!("vehicle.kappa_max must be non-negative, got {}", v.kappa_max)));
        }
        if self.sim.trials == 0 {
            return Err(Error::Config("sim.trials must be at least 1".into()));
        }
        if let Some(d) = self.sim.nlgl_d0 {
            if !d.is_finite() {
                return Err(Error::Config("sim.nlgl_d0 must be finite".into()));
            }
        }
        let mc = &self.sim.montecarlo;
        for (name, r) in [
            ("sim.montecarlo.d0", mc.d0),
            ("sim.montecarlo.chi0", mc.chi0),
            ("sim.montecarlo.wind_speed", mc.wind_speed),
            ("sim.montecarlo.wind_direction", mc.wind_direction),
        ] {
            if !(r[0].is_finite() && r[1].is_finite()) {
                return Err(Error::Config(format!("{name} bounds must be finite")));
            }
        }
        if mc.wind_speed.iter().any(|w| *w < 0.0) {
            return Err(Error::Config("sim.montecarlo.wind_speed must be non-negative".into()));
        }
        self.guidance.validate().map_err(|e| Error::Config(strip_prefix(e)))?;
        self.baselines.validate().map_err(|e| Error::Config(strip_prefix(e)))?;
        Ok(())
    }

    /// Scenario shared by every law (no per-law overrides).
    pub fn scenario(&self) -> Result<Scenario> {
        self.check()?;
        let path = self.path.build(&self.base_dir)?;
        let s = &self.sim;
        let mut scenario = Scenario {
            path,
            guidance: self.guidance.clone(),
            baselines: self.baselines.clone(),
            airspeed: AirspeedSpec::new(self.vehicle.airspeed),
            wind: WindModel::from_polar(self.vehicle.wind_speed, self.vehicle.wind_direction),
            initial: match s.start {
                Some([x, y, chi]) => InitialCondition::Explicit(VehicleState::new(x, y, chi)),
                None => InitialCondition::Offset { s0: s.s0, d0: s.d0, chi0: s.chi0 },
            },
            dt: s.dt,
            t_max: s.t_max,
            integrator: s.integrator,
            criteria: ConvergenceCriteria {
                d_threshold: s.d_threshold,
                align_threshold: s.align_threshold,
                dwell: s.dwell,
            },
            chatter_window: s.chatter_window,
        };
        if s.random_initial {
            scenario = TrialDraw::sample(trial_seed(s.seed, 0), &s.montecarlo).apply(&scenario);
        }
        scenario.validate().map_err(|e| match e {
            Error::Argument(m) => Error::Config(m),
            other => other,
        })?;
        Ok(scenario)
    }

    /// Scenario for one law of a single run or comparison, with the NLGL
    /// offset override applied.
    pub fn scenario_for(&self, law: GuidanceLaw) -> Result<Scenario> {
        let mut sc = self.scenario()?;
        if law == GuidanceLaw::Nlgl && !self.sim.random_initial {
            if let (Some(d), InitialCondition::Offset { s0, chi0, .. }) = (self.sim.nlgl_d0, sc.initial) {
                sc.initial = InitialCondition::Offset { s0, d0: d, chi0 };
            }
        }
        Ok(sc)
    }
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::Config(m) | Error::Argument(m) => m,
        other => other.to_string(),
    }
}
