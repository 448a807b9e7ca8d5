//! Planar reference paths and the path frame (closest point, tangent angle,
//! signed cross-track error) that every guidance law consumes.
//!
//! Side convention: `rho = +1` when the vehicle lies on the side reached by
//! rotating the unit tangent by +90 degrees, i.e. `cross(tangent, p - p_ref) >= 0`.
//! With this sign the cross-track rate is `d_dot = V_g * sin(chi - chi_p)`. In a
//! north-east frame (x north, y east) that side is the right-hand side.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Sub};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::angle::wrap_angle;
use crate::error::{Error, Result};

/// Golden-section refinement tolerance on the path parameter.
pub const REFINE_TOL: f64 = 1e-6;
/// Upper bound on coarse samples used by the sinusoid closest-point search.
pub const MAX_COARSE_SAMPLES: usize = 2048;
const MIN_COARSE_SAMPLES: usize = 16;
/// Coarse spacing of the sinusoid searches, as a fraction of the wavelength.
const SAMPLES_PER_WAVELENGTH: f64 = 512.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(a: f64) -> Self {
        Self::new(a.cos(), a.sin())
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 2-D cross product.
    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Self) -> f64 {
        (self - o).norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}

/// Infinite straight line through `origin` with constant `heading`.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub origin: Point2,
    pub heading: f64,
}

/// Counter-clockwise circle, parameterized by polar angle in [0, 2pi].
#[derive(Debug, Clone, PartialEq)]
pub struct Circle {
    pub center: Point2,
    pub radius: f64,
}

/// `y = amplitude * sin(2 pi x / wavelength)` for `x` in `[x_min, x_max]`;
/// the path parameter is `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinusoid {
    pub amplitude: f64,
    pub wavelength: f64,
    pub x_min: f64,
    pub x_max: f64,
}

impl Sinusoid {
    fn k(&self) -> f64 {
        TAU / self.wavelength
    }

    fn y(&self, x: f64) -> f64 {
        self.amplitude * (self.k() * x).sin()
    }

    fn dy(&self, x: f64) -> f64 {
        self.amplitude * self.k() * (self.k() * x).cos()
    }

    fn ddy(&self, x: f64) -> f64 {
        let k = self.k();
        -self.amplitude * k * k * (k * x).sin()
    }

    fn point(&self, x: f64) -> Point2 {
        Point2::new(x, self.y(x))
    }

    fn coarse_spacing(&self) -> f64 {
        self.wavelength / SAMPLES_PER_WAVELENGTH
    }
}

/// Ordered sampled polyline; the parameter is cumulative arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<Point2>,
    cum: Vec<f64>,
}

impl Polyline {
    pub fn new(points: Vec<Point2>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Geometry("polyline needs at least 2 points".into()));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::Geometry(format!("non-finite polyline point {p:?}")));
        }
        let mut cum = Vec::with_capacity(points.len());
        cum.push(0.0);
        for (i, w) in points.windows(2).enumerate() {
            let len = w[0].dist(w[1]);
            if len == 0.0 {
                return Err(Error::Geometry(format!("repeated consecutive polyline points at index {}", i + 1)));
            }
            cum.push(cum[i] + len);
        }
        Ok(Self { points, cum })
    }

    /// Parses two comma-separated columns (x, y). A non-numeric first line is
    /// treated as a header; blank lines are skipped.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
                return Err(Error::Geometry(format!("line {}: expected two columns", lineno + 1)));
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(y)) => points.push(Point2::new(x, y)),
                _ if points.is_empty() && lineno == 0 => continue,
                _ => return Err(Error::Geometry(format!("line {}: cannot parse '{line}'", lineno + 1))),
            }
        }
        Self::new(points)
    }

    pub fn from_csv_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Config(format!("cannot read polyline {}: {e}", path.as_ref().display())))?;
        Self::from_csv_str(&text)
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn length(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    fn segment(&self, s: f64) -> usize {
        let i = self.cum.partition_point(|&c| c <= s);
        i.saturating_sub(1).min(self.points.len() - 2)
    }

    fn point(&self, s: f64) -> Point2 {
        let i = self.segment(s);
        let (a, b) = (self.points[i], self.points[i + 1]);
        let t = (s - self.cum[i]) / (self.cum[i + 1] - self.cum[i]);
        a + (b - a) * t
    }

    fn seg_dir(&self, i: usize) -> Point2 {
        let v = self.points[i + 1] - self.points[i];
        v * (1.0 / v.norm())
    }

    /// Discrete curvature at interior vertices: turning angle over the mean
    /// length of the two adjacent segments.
    fn max_vertex_curvature(&self) -> f64 {
        (1..self.points.len() - 1)
            .map(|i| {
                let turn = wrap_angle(self.seg_dir(i).angle() - self.seg_dir(i - 1).angle());
                let l = 0.5 * (self.cum[i + 1] - self.cum[i - 1]);
                turn.abs() / l
            })
            .fold(0.0, f64::max)
    }
}

/// A planar reference path.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferencePath {
    Line(Line),
    Circle(Circle),
    Sinusoid(Sinusoid),
    Polyline(Polyline),
}

/// Path frame at the vehicle position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathFrame {
    /// Path parameter of the closest point.
    pub s_star: f64,
    pub p_ref: Point2,
    /// Tangent angle at `p_ref`, wrapped to (-pi, pi].
    pub chi_p: f64,
    /// Signed cross-track error, `rho * |p - p_ref|`.
    pub d: f64,
    /// Side indicator, +1 or -1.
    pub rho: f64,
    /// Path course rate; zero until filled in by [`path_course_rate`].
    pub chi_p_dot: f64,
}

/// Wavelength that makes the peak path course rate of a sinusoid equal `rate`
/// when flown at `speed`: `speed * amplitude * (2 pi / L)^2 = rate`.
pub fn sinusoid_wavelength_for_rate(amplitude: f64, speed: f64, rate: f64) -> f64 {
    TAU * (speed * amplitude / rate).sqrt()
}

impl ReferencePath {
    pub fn line(origin: Point2, heading: f64) -> Result<Self> {
        if !origin.is_finite() || !heading.is_finite() {
            return Err(Error::Geometry("line origin and heading must be finite".into()));
        }
        Ok(Self::Line(Line { origin, heading }))
    }

    pub fn circle(center: Point2, radius: f64) -> Result<Self> {
        if !center.is_finite() || !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Geometry(format!("invalid circle radius {radius}")));
        }
        Ok(Self::Circle(Circle { center, radius }))
    }

    pub fn sinusoid(amplitude: f64, wavelength: f64, x_min: f64, x_max: f64) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) || !amplitude.is_finite() {
            return Err(Error::Geometry("sinusoid needs finite amplitude and positive wavelength".into()));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::Geometry(format!("empty sinusoid domain [{x_min}, {x_max}]")));
        }
        Ok(Self::Sinusoid(Sinusoid { amplitude, wavelength, x_min, x_max }))
    }

    pub fn polyline(points: Vec<Point2>) -> Result<Self> {
        Polyline::new(points).map(Self::Polyline)
    }

    /// The 300 m amplitude sinusoid used by the reference scenario, scaled so the
    /// peak path course rate is 0.1 rad/s at 15 m/s, spanning one wavelength
    /// behind the origin and five ahead.
    pub fn reference_sinusoid() -> Self {
        let l = sinusoid_wavelength_for_rate(300.0, 15.0, 0.1);
        Self::Sinusoid(Sinusoid { amplitude: 300.0, wavelength: l, x_min: -l, x_max: 5.0 * l })
    }

    pub fn domain(&self) -> (f64, f64) {
        match self {
            Self::Line(_) => (f64::NEG_INFINITY, f64::INFINITY),
            Self::Circle(_) => (0.0, TAU),
            Self::Sinusoid(sn) => (sn.x_min, sn.x_max),
            Self::Polyline(pl) => (0.0, pl.length()),
        }
    }

    fn check(&self, s: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if s.is_finite() && s >= lo && s <= hi {
            Ok(())
        } else {
            Err(Error::Domain { s, lo, hi })
        }
    }

    fn point_unchecked(&self, s: f64) -> Point2 {
        match self {
            Self::Line(l) => l.origin + Point2::from_angle(l.heading) * s,
            Self::Circle(c) => c.center + Point2::from_angle(s) * c.radius,
            Self::Sinusoid(sn) => sn.point(s),
            Self::Polyline(pl) => pl.point(s),
        }
    }

    fn tangent_unchecked(&self, s: f64) -> Point2 {
        match self {
            Self::Line(l) => Point2::from_angle(l.heading),
            Self::Circle(_) => Point2::from_angle(s + 0.5 * PI),
            Self::Sinusoid(sn) => {
                let v = Point2::new(1.0, sn.dy(s));
                v * (1.0 / v.norm())
            }
            Self::Polyline(pl) => pl.seg_dir(pl.segment(s)),
        }
    }

    /// Point on the path at parameter `s`.
    pub fn evaluate(&self, s: f64) -> Result<Point2> {
        self.check(s)?;
        Ok(self.point_unchecked(s))
    }

    /// Unit tangent at `s`.
    pub fn tangent(&self, s: f64) -> Result<Point2> {
        self.check(s)?;
        let t = self.tangent_unchecked(s);
        if !(t.norm() > 0.0) || !t.is_finite() {
            return Err(Error::Geometry(format!("zero-length tangent at s = {s}")));
        }
        Ok(t)
    }

    /// Tangent angle `chi_p` at `s`, wrapped to (-pi, pi].
    pub fn tangent_angle(&self, s: f64) -> Result<f64> {
        Ok(wrap_angle(self.tangent(s)?.angle()))
    }

    /// Signed curvature (positive when turning counter-clockwise). Polylines are
    /// piecewise straight and report zero away from vertices.
    pub fn curvature(&self, s: f64) -> Result<f64> {
        self.check(s)?;
        Ok(match self {
            Self::Line(_) | Self::Polyline(_) => 0.0,
            Self::Circle(c) => 1.0 / c.radius,
            Self::Sinusoid(sn) => sn.ddy(s) / (1.0 + sn.dy(s).powi(2)).powf(1.5),
        })
    }

    /// Largest absolute curvature over the domain. Sinusoids are sampled at
    /// `max(4096, 512 per wavelength)` points; polylines use the vertex turning
    /// angle over the mean adjacent segment length.
    pub fn max_curvature(&self) -> f64 {
        match self {
            Self::Line(_) => 0.0,
            Self::Circle(c) => 1.0 / c.radius,
            Self::Sinusoid(sn) => {
                let periods = (sn.x_max - sn.x_min) / sn.wavelength;
                let n = ((512.0 * periods).ceil() as usize).max(4096);
                let h = (sn.x_max - sn.x_min) / n as f64;
                (0..=n)
                    .map(|i| {
                        let x = sn.x_min + h * i as f64;
                        sn.ddy(x).abs() / (1.0 + sn.dy(x).powi(2)).powf(1.5)
                    })
                    .fold(0.0, f64::max)
            }
            Self::Polyline(pl) => pl.max_vertex_curvature(),
        }
    }

    /// Peak path course rate `V_g * max|kappa|`.
    pub fn max_path_course_rate(&self, ground_speed: f64) -> Result<f64> {
        if !(ground_speed > 0.0) {
            return Err(Error::Argument(format!("ground speed must be positive, got {ground_speed}")));
        }
        Ok(ground_speed * self.max_curvature())
    }

    /// Builds the frame at parameter `s` for vehicle position `p`.
    pub fn frame_at(&self, s: f64, p: Point2) -> Result<PathFrame> {
        let p_ref = self.evaluate(s)?;
        let t = self.tangent(s)?;
        let disp = p - p_ref;
        let rho = if t.cross(disp) >= 0.0 { 1.0 } else { -1.0 };
        Ok(PathFrame { s_star: s, p_ref, chi_p: wrap_angle(t.angle()), d: rho * disp.norm(), rho, chi_p_dot: 0.0 })
    }

    /// Global closest point. Ties (equidistant points) resolve to the smallest
    /// parameter; a vehicle at a circle's center maps to `s = 0`.
    pub fn closest_point(&self, p: Point2) -> Result<PathFrame> {
        self.closest_point_bounded(p, f64::INFINITY)
    }

    /// Same as [`closest_point`](Self::closest_point) but seeded with a
    /// previous parameter. The hint only tightens the search window (the
    /// distance to `path(hint)` bounds the minimum), so the result is still the
    /// global minimizer.
    pub fn closest_point_near(&self, p: Point2, hint: f64) -> Result<PathFrame> {
        let (lo, hi) = self.domain();
        let bound = if hint.is_finite() { p.dist(self.point_unchecked(hint.clamp(lo, hi))) } else { f64::INFINITY };
        self.closest_point_bounded(p, bound)
    }

    fn closest_point_bounded(&self, p: Point2, bound: f64) -> Result<PathFrame> {
        if !p.is_finite() {
            return Err(Error::Argument(format!("non-finite position {p:?}")));
        }
        let s = match self {
            Self::Line(l) => (p - l.origin).dot(Point2::from_angle(l.heading)),
            Self::Circle(c) => {
                let v = p - c.center;
                if v.norm() == 0.0 {
                    0.0
                } else {
                    v.angle().rem_euclid(TAU)
                }
            }
            Self::Sinusoid(sn) => sinusoid_closest(sn, p, bound),
            Self::Polyline(pl) => polyline_closest(pl, p),
        };
        self.frame_at(s, p)
    }

    /// Parameter reached by moving `distance` metres of arc length from `s`
    /// (clamped to the domain; wraps around circles).
    pub fn advance(&self, s: f64, distance: f64) -> f64 {
        let (lo, hi) = self.domain();
        match self {
            Self::Line(_) => s + distance,
            Self::Circle(c) => (s + distance / c.radius).rem_euclid(TAU),
            Self::Polyline(_) => (s + distance).clamp(lo, hi),
            Self::Sinusoid(sn) => {
                const STEPS: usize = 16;
                let h = distance / STEPS as f64;
                let mut x = s;
                for _ in 0..STEPS {
                    let half = x + 0.5 * h / (1.0 + sn.dy(x).powi(2)).sqrt();
                    x += h / (1.0 + sn.dy(half).powi(2)).sqrt();
                }
                x.clamp(lo, hi)
            }
        }
    }

    /// Parameters of all path points at Euclidean distance `radius` from `p`,
    /// sorted ascending. A tangent circle yields the closest point.
    pub fn circle_intersections(&self, p: Point2, radius: f64) -> Vec<f64> {
        let mut out = match self {
            Self::Line(l) => {
                let t = Point2::from_angle(l.heading);
                let v = p - l.origin;
                let s0 = v.dot(t);
                let perp = v.cross(t).abs();
                quadratic_offsets(radius, perp).into_iter().map(|o| s0 + o).collect()
            }
            Self::Circle(c) => {
                let v = p - c.center;
                let dist = v.norm();
                if dist == 0.0 {
                    Vec::new()
                } else {
                    let cosv = (c.radius * c.radius + dist * dist - radius * radius) / (2.0 * c.radius * dist);
                    if cosv.abs() > 1.0 {
                        Vec::new()
                    } else {
                        let phi = v.angle();
                        let delta = cosv.acos();
                        let mut v = vec![(phi - delta).rem_euclid(TAU), (phi + delta).rem_euclid(TAU)];
                        v.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
                        v
                    }
                }
            }
            Self::Sinusoid(sn) => sinusoid_circle_roots(sn, p, radius),
            Self::Polyline(pl) => {
                let mut v = Vec::new();
                for i in 0..pl.points.len() - 1 {
                    let a = pl.points[i];
                    let dir = pl.seg_dir(i);
                    let len = pl.cum[i + 1] - pl.cum[i];
                    let w = p - a;
                    let s0 = w.dot(dir);
                    let perp = w.cross(dir).abs();
                    for o in quadratic_offsets(radius, perp) {
                        let u = s0 + o;
                        if (0.0..=len).contains(&u) {
                            v.push(pl.cum[i] + u);
                        }
                    }
                }
                v
            }
        };
        if out.is_empty() {
            // Tangency: the closest point sits exactly on the circle.
            if let Ok(f) = self.closest_point(p) {
                if (f.d.abs() - radius).abs() <= 1e-9 * radius.max(1.0) {
                    out.push(f.s_star);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        out
    }
}

fn quadratic_offsets(radius: f64, perp: f64) -> Vec<f64> {
    let disc = radius * radius - perp * perp;
    if disc < 0.0 {
        Vec::new()
    } else if disc == 0.0 {
        vec![0.0]
    } else {
        let h = disc.sqrt();
        vec![-h, h]
    }
}

/// Finite-difference path course rate `wrap(chi_p_now - chi_p_prev) / dt`.
pub fn path_course_rate(now: &PathFrame, prev: &PathFrame, dt: f64) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::Argument(format!("dt must be positive, got {dt}")));
    }
    Ok(wrap_angle(now.chi_p - prev.chi_p) / dt)
}

/// Golden-section minimization of `f` on `[a, b]`.
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Coarse sampling over the provable window `|x - p.x| <= r` (any point with a
/// larger horizontal offset is farther than `r`), then golden-section refinement
/// around the best sample.
fn sinusoid_closest(sn: &Sinusoid, p: Point2, bound: f64) -> f64 {
    let xc = p.x.clamp(sn.x_min, sn.x_max);
    let r = p.dist(sn.point(xc)).min(bound);
    let a = (p.x - r).max(sn.x_min);
    let b = (p.x + r).min(sn.x_max);
    if b <= a {
        return xc;
    }
    let d2 = |x: f64| (sn.point(x) - p).norm_sq();
    let n = (((b - a) / sn.coarse_spacing()).ceil() as usize).clamp(MIN_COARSE_SAMPLES, MAX_COARSE_SAMPLES);
    let h = (b - a) / n as f64;
    let (mut best_i, mut best) = (0usize, f64::INFINITY);
    for i in 0..=n {
        let v = d2(a + h * i as f64);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let lo = a + h * best_i.saturating_sub(1) as f64;
    let hi = (a + h * (best_i + 1) as f64).min(b);
    let x = golden_min(d2, lo, hi, REFINE_TOL);
    let xs = a + h * best_i as f64;
    if d2(x) < best {
        x
    } else {
        xs
    }
}

fn sinusoid_circle_roots(sn: &Sinusoid, p: Point2, radius: f64) -> Vec<f64> {
    let a = (p.x - radius).max(sn.x_min);
    let b = (p.x + radius).min(sn.x_max);
    if b <= a {
        return Vec::new();
    }
    let g = |x: f64| p.dist(sn.point(x)) - radius;
    let spacing = sn.coarse_spacing().min(radius / 32.0);
    let n = (((b - a) / spacing).ceil() as usize).clamp(MIN_COARSE_SAMPLES, 1 << 16);
    let h = (b - a) / n as f64;
    let mut roots = Vec::new();
    let mut x0 = a;
    let mut g0 = g(x0);
    if g0 == 0.0 {
        roots.push(x0);
    }
    for i in 1..=n {
        let x1 = a + h * i as f64;
        let g1 = g(x1);
        if g1 == 0.0 {
            roots.push(x1);
        } else if g0 * g1 < 0.0 {
            roots.push(illinois(&g, x0, x1, g0, g1));
        }
        x0 = x1;
        g0 = g1;
    }
    roots
}

/// Root of `g` bracketed by `[a, b]` (Illinois variant of regula falsi).
fn illinois(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut ga: f64, mut gb: f64) -> f64 {
    let mut side = 0i8;
    for _ in 0..100 {
        let c = (a * gb - b * ga) / (gb - ga);
        let gc = g(c);
        if gc == 0.0 || (b - a).abs() < 1e-12 {
            return c;
        }
        if gc * gb > 0.0 {
            b = c;
            gb = gc;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            ga = gc;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
        if gc.abs() < 1e-12 {
            return c;
        }
    }
    0.5 * (a + b)
}

fn polyline_closest(pl: &Polyline, p: Point2) -> f64 {
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..pl.points.len() - 1 {
        let a = pl.points[i];
        let len = pl.cum[i + 1] - pl.cum[i];
        let u = (p - a).dot(pl.seg_dir(i)).clamp(0.0, len);
        let s = pl.cum[i] + u;
        let dist = p.dist(pl.point(s));
        if dist < best.0 {
            best = (dist, s);
        }
    }
    best.1
}
