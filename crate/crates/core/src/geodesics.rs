//! Light rays as geodesics of the optical metrics, deflection by shooting,
//! and geodesic curvature of curves on the optical surface.

use std::f64::consts::PI;

use crate::curvature::christoffel;
use crate::error::{GeoError, Result};
use crate::geometry::{area_element, eval_metric, eval_metric_derivatives, MetricId, Point, SpacetimeParams};
use crate::ode::{Dopri5, Tolerance};

/// Phase-space state of a ray; dots are derivatives with respect to the
/// affine parameter (optical arc length for unit-speed rays).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicState {
    pub r: f64,
    pub phi: f64,
    pub r_dot: f64,
    pub phi_dot: f64,
}

impl GeodesicState {
    pub const fn new(r: f64, phi: f64, r_dot: f64, phi_dot: f64) -> Self {
        Self { r, phi, r_dot, phi_dot }
    }

    pub fn point(&self) -> Point {
        Point::new(self.r, self.phi)
    }

    fn to_array(self) -> [f64; 4] {
        [self.r, self.phi, self.r_dot, self.phi_dot]
    }

    fn from_array(y: [f64; 4]) -> Self {
        Self::new(y[0], y[1], y[2], y[3])
    }

    /// Unit-speed state at `r` heading inward or outward with Clairaut
    /// constant `G phi_dot = impact`.
    pub fn with_impact(
        id: MetricId,
        params: SpacetimeParams,
        r: f64,
        phi: f64,
        impact: f64,
        inward: bool,
    ) -> Result<Self> {
        let c = eval_metric(id, params, Point::new(r, phi))?;
        let phi_dot = impact / c.g;
        let radial = 1.0 - impact * impact / c.g;
        if radial < 0.0 {
            return Err(GeoError::InvalidInput(format!(
                "impact parameter {impact} exceeds sqrt(G) = {} at r = {r}",
                c.g.sqrt()
            )));
        }
        let r_dot = (radial / c.e).sqrt();
        Ok(Self::new(r, phi, if inward { -r_dot } else { r_dot }, phi_dot))
    }
}

/// Time derivative of a [`GeodesicState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub r_dot: f64,
    pub phi_dot: f64,
    pub r_ddot: f64,
    pub phi_ddot: f64,
}

/// Geodesic equations in Christoffel form, `x'' = -Gamma(x', x')`.
pub fn geodesic_rhs(id: MetricId, params: SpacetimeParams, s: GeodesicState) -> Result<StateDerivative> {
    let gam = christoffel(id, params, s.point())?;
    let acc = gam.contract([s.r_dot, s.phi_dot]);
    Ok(StateDerivative {
        r_dot: s.r_dot,
        phi_dot: s.phi_dot,
        r_ddot: -acc[0],
        phi_ddot: -acc[1],
    })
}

/// `G phi'`, conserved along geodesics of an `r`-only metric.
pub fn clairaut_constant(id: MetricId, params: SpacetimeParams, s: GeodesicState) -> Result<f64> {
    Ok(eval_metric(id, params, s.point())?.g * s.phi_dot)
}

/// Squared optical speed `E r'^2 + 2F r' phi' + G phi'^2`.
pub fn optical_speed_sq(id: MetricId, params: SpacetimeParams, s: GeodesicState) -> Result<f64> {
    let c = eval_metric(id, params, s.point())?;
    Ok(c.e * s.r_dot * s.r_dot + 2.0 * c.f * s.r_dot * s.phi_dot + c.g * s.phi_dot * s.phi_dot)
}

/// When to end an integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopCondition {
    /// Stop (successfully) once an outgoing ray reaches this radius.
    pub r_escape: Option<f64>,
    /// Stop (successfully) at this affine parameter.
    pub p_max: f64,
    /// Report capture if the ray falls below this radius.
    pub r_min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Escaped,
    ParameterLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    pub parameter: f64,
    pub state: GeodesicState,
    /// Coordinate acceleration `(r'', phi'')` at the sample.
    pub accel: [f64; 2],
}

/// An integrated ray.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub samples: Vec<PathSample>,
    pub clairaut_constant: f64,
    pub stop: StopReason,
    pub evaluations: usize,
}

impl Path {
    pub fn first(&self) -> &PathSample {
        &self.samples[0]
    }

    pub fn last(&self) -> &PathSample {
        self.samples.last().expect("path has at least one sample")
    }

    /// Largest relative departure of `G phi'` from its initial value.
    pub fn clairaut_drift(&self, id: MetricId, params: SpacetimeParams) -> Result<f64> {
        let c0 = self.clairaut_constant;
        let mut worst: f64 = 0.0;
        for s in &self.samples {
            let c = clairaut_constant(id, params, s.state)?;
            let scale = c0.abs().max(f64::MIN_POSITIVE);
            worst = worst.max((c - c0).abs() / scale);
        }
        Ok(worst)
    }

    /// Largest relative departure of the optical speed from its initial value.
    pub fn speed_drift(&self, id: MetricId, params: SpacetimeParams) -> Result<f64> {
        let v0 = optical_speed_sq(id, params, self.first().state)?;
        let mut worst: f64 = 0.0;
        for s in &self.samples {
            let v = optical_speed_sq(id, params, s.state)?;
            worst = worst.max((v - v0).abs() / v0);
        }
        Ok(worst)
    }

    /// Parameter range covered by the samples.
    pub fn span(&self) -> (f64, f64) {
        (self.first().parameter, self.last().parameter)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub tol: Tolerance,
    /// Optional cap on the affine step, used to densify samples.
    pub max_step: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            tol: Tolerance { rel: 1e-10, abs: 1e-12 },
            max_step: None,
        }
    }
}

pub fn integrate_geodesic(
    id: MetricId,
    params: SpacetimeParams,
    init: GeodesicState,
    stop: StopCondition,
) -> Result<Path> {
    integrate_geodesic_with(id, params, init, stop, &IntegratorConfig::default())
}

/// Integrates forward in the affine parameter (backward if `p_max < 0`).
pub fn integrate_geodesic_with(
    id: MetricId,
    params: SpacetimeParams,
    init: GeodesicState,
    stop: StopCondition,
    cfg: &IntegratorConfig,
) -> Result<Path> {
    if init.r_dot == 0.0 && init.phi_dot == 0.0 {
        return Err(GeoError::InvalidInput("initial velocity is zero".into()));
    }
    if init.r <= stop.r_min {
        return Err(GeoError::InvalidInput(format!(
            "initial radius {} is not above r_min = {}",
            init.r, stop.r_min
        )));
    }
    let rhs = |_t: f64, y: &[f64; 4]| -> Result<[f64; 4]> {
        let d = geodesic_rhs(id, params, GeodesicState::from_array(*y))?;
        Ok([d.r_dot, d.phi_dot, d.r_ddot, d.phi_ddot])
    };
    let accel_of = |y: &[f64; 4]| -> Result<[f64; 2]> {
        let d = rhs(0.0, y)?;
        Ok([d[2], d[3]])
    };

    let direction = if stop.p_max < 0.0 { -1.0 } else { 1.0 };
    let p_end = stop.p_max;
    let mut solver = Dopri5::<4>::new(cfg.tol);
    if let Some(h_max) = cfg.max_step {
        solver.h_max = h_max;
    }

    let mut t = 0.0;
    let mut y = init.to_array();
    let mut samples = vec![PathSample { parameter: t, state: init, accel: accel_of(&y)? }];
    let clairaut = clairaut_constant(id, params, init)?;
    let mut h = solver.initial_step(&rhs, t, &y)?;
    let mut extra_evals = 1;

    loop {
        let remaining = (p_end - t) * direction;
        if remaining <= 0.0 {
            return Ok(Path {
                samples,
                clairaut_constant: clairaut,
                stop: StopReason::ParameterLimit,
                evaluations: solver.evaluations + extra_evals,
            });
        }
        let h_try = h.min(remaining);
        let (taken, y_new, h_next) = solver.step(&rhs, t, &y, h_try * direction)
            .map(|(a, b, c)| (a.abs(), b, c.abs()))
            .map_err(|e| match e {
                GeoError::StepFailure { step, .. } => GeoError::StepFailure { parameter: t, step },
                other => other,
            })?;
        let t_new = if taken >= remaining { p_end } else { t + taken * direction };

        if y_new[0] < stop.r_min {
            return Err(GeoError::Capture { r: y_new[0], r_min: stop.r_min, parameter: t_new });
        }

        if let Some(r_esc) = stop.r_escape {
            if y_new[0] >= r_esc && y_new[2] > 0.0 {
                let (tc, yc) = locate_radius(&mut solver, &rhs, t, &y, taken * direction, r_esc)?;
                samples.push(PathSample {
                    parameter: tc,
                    state: GeodesicState::from_array(yc),
                    accel: accel_of(&yc)?,
                });
                extra_evals += 1;
                return Ok(Path {
                    samples,
                    clairaut_constant: clairaut,
                    stop: StopReason::Escaped,
                    evaluations: solver.evaluations + extra_evals,
                });
            }
        }

        t = t_new;
        y = y_new;
        samples.push(PathSample {
            parameter: t,
            state: GeodesicState::from_array(y),
            accel: accel_of(&y)?,
        });
        extra_evals += 1;
        h = h_next;
    }
}

/// Finds the sub-step from `(t, y)` at which `r` equals `target` by secant
/// iteration on single Runge-Kutta steps.
fn locate_radius<F>(
    solver: &mut Dopri5<4>,
    rhs: &F,
    t: f64,
    y: &[f64; 4],
    h: f64,
    target: f64,
) -> Result<(f64, [f64; 4])>
where
    F: Fn(f64, &[f64; 4]) -> Result<[f64; 4]>,
{
    let mut lo = 0.0;
    let mut f_lo = y[0] - target;
    let mut hi = h;
    let mut y_hi = solver.trial(rhs, t, y, hi)?.y;
    let mut f_hi = y_hi[0] - target;
    if f_lo >= 0.0 {
        return Ok((t, *y));
    }
    for _ in 0..60 {
        let guess = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        let mid = if guess.is_finite() && (guess - lo) * (hi - guess) > 0.0 {
            guess
        } else {
            0.5 * (lo + hi)
        };
        let y_mid = solver.trial(rhs, t, y, mid)?.y;
        let f_mid = y_mid[0] - target;
        if f_mid.abs() <= 1e-15 * target.abs() || (hi - lo).abs() <= 1e-15 * h.abs() {
            return Ok((t + mid, y_mid));
        }
        if f_mid < 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
            y_hi = y_mid;
        }
    }
    Ok((t + hi, y_hi))
}

/// How a deflection angle was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DeflectionMethod {
    GaussBonnet,
    Shooting,
    Series,
}

impl DeflectionMethod {
    pub fn name(self) -> &'static str {
        match self {
            DeflectionMethod::GaussBonnet => "gauss-bonnet",
            DeflectionMethod::Shooting => "shooting",
            DeflectionMethod::Series => "series",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeflectionResult {
    /// Deflection in radians, positive toward the lens.
    pub angle: f64,
    pub method: DeflectionMethod,
    pub error_estimate: f64,
    /// Integrand or right-hand-side evaluations spent.
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootConfig {
    /// Launch radii as multiples of `b`; the two results are Richardson
    /// extrapolated to remove the leading `1/r_start` truncation.
    pub r_start_factors: [f64; 2],
    pub integrator: IntegratorConfig,
}

impl Default for ShootConfig {
    fn default() -> Self {
        Self {
            r_start_factors: [1e4, 1e5],
            integrator: IntegratorConfig::default(),
        }
    }
}

/// Radius below which a ray is considered captured by the hole.
pub fn capture_radius(id: MetricId, params: SpacetimeParams) -> f64 {
    match id {
        MetricId::Flat => 0.0,
        _ => id.singular_radius(params) + 0.01 * params.mass,
    }
}

/// Total angle swept by a ray launched inward from `r_start` with impact
/// parameter `b` until it returns to `r_start`.
pub fn angular_sweep(
    id: MetricId,
    params: SpacetimeParams,
    b: f64,
    r_start: f64,
    integrator: &IntegratorConfig,
) -> Result<(f64, usize)> {
    let g_start = eval_metric(id, params, Point::new(r_start, 0.0))?.g;
    let phi0 = (b / g_start.sqrt()).asin();
    let init = GeodesicState::with_impact(id, params, r_start, phi0, b, true)?;
    let stop = StopCondition {
        r_escape: Some(r_start),
        p_max: 10.0 * r_start + 1e5 * (params.mass + b),
        r_min: capture_radius(id, params),
    };
    let path = integrate_geodesic_with(id, params, init, stop, integrator)?;
    if path.stop != StopReason::Escaped {
        return Err(GeoError::NonConvergence(format!(
            "ray with b = {b} did not return to r = {r_start} within parameter {}",
            stop.p_max
        )));
    }
    Ok(((path.last().state.phi - phi0).abs(), path.evaluations))
}

/// Deflection angle by direct ray shooting.
pub fn shoot_deflection(
    id: MetricId,
    params: SpacetimeParams,
    b: f64,
    cfg: &ShootConfig,
) -> Result<DeflectionResult> {
    if !(b.is_finite() && b > 0.0) {
        return Err(GeoError::InvalidInput(format!("impact parameter must be > 0, got {b}")));
    }
    let [f1, f2] = cfg.r_start_factors;
    if !(f1 >= 1e4 && f2 > f1) {
        return Err(GeoError::InvalidInput(format!(
            "r_start factors must satisfy 1e4 <= f1 < f2, got {f1}, {f2}"
        )));
    }
    let (r1, r2) = (f1 * b, f2 * b);
    let (sweep1, n1) = angular_sweep(id, params, b, r1, &cfg.integrator)?;
    let (sweep2, n2) = angular_sweep(id, params, b, r2, &cfg.integrator)?;
    let d1 = sweep1 - PI;
    let d2 = sweep2 - PI;
    let q = r2 / r1;
    let angle = (q * d2 - d1) / (q - 1.0);
    let truncation = (angle - d2).abs() * (b / r1);
    let integration = 10.0 * cfg.integrator.tol.rel * sweep2.abs().max(PI);
    Ok(DeflectionResult {
        angle,
        method: DeflectionMethod::Shooting,
        error_estimate: truncation + integration,
        evaluations: n1 + n2,
    })
}

/// Whether a ray with impact parameter `b` falls into the hole.
pub fn is_captured(id: MetricId, params: SpacetimeParams, b: f64, r_start: f64) -> Result<bool> {
    match angular_sweep(id, params, b, r_start, &IntegratorConfig::default()) {
        Ok(_) => Ok(false),
        Err(GeoError::Capture { .. }) => Ok(true),
        Err(e) => Err(e),
    }
}

/// Bisects for the smallest impact parameter that escapes, within `[lo, hi]`.
pub fn critical_impact_parameter(
    id: MetricId,
    params: SpacetimeParams,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64> {
    let r_start = 1e3 * hi;
    if !is_captured(id, params, lo, r_start)? || is_captured(id, params, hi, r_start)? {
        return Err(GeoError::InvalidInput(format!(
            "bracket [{lo}, {hi}] does not straddle the capture threshold"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if is_captured(id, params, mid, r_start)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Geodesic curvature of the coordinate circle `r = r0`, traversed
/// counterclockwise at unit speed: `G_r / (2 G sqrt(E))`.
pub fn geodesic_curvature_circle(id: MetricId, params: SpacetimeParams, r0: f64) -> Result<f64> {
    let p = Point::new(r0, 0.0);
    let c = eval_metric(id, params, p)?;
    let d = eval_metric_derivatives(id, params, p)?;
    Ok(d.g_r / (2.0 * c.g * c.e.sqrt()))
}

/// Position and first two parameter derivatives of a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveJet {
    pub point: Point,
    pub velocity: [f64; 2],
    pub acceleration: [f64; 2],
}

/// A twice-differentiable curve in `(r, phi)` coordinates.
pub trait PlaneCurve {
    fn jet(&self, s: f64) -> Result<CurveJet>;
}

/// The circle `r = radius`, `phi = s` (or `-s` when clockwise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateCircle {
    pub radius: f64,
    pub counterclockwise: bool,
}

impl PlaneCurve for CoordinateCircle {
    fn jet(&self, s: f64) -> Result<CurveJet> {
        let sign = if self.counterclockwise { 1.0 } else { -1.0 };
        Ok(CurveJet {
            point: Point::new(self.radius, sign * s),
            velocity: [0.0, sign],
            acceleration: [0.0, 0.0],
        })
    }
}

/// The radial line `phi = phi0`, `r = s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialLine {
    pub phi0: f64,
}

impl PlaneCurve for RadialLine {
    fn jet(&self, s: f64) -> Result<CurveJet> {
        Ok(CurveJet {
            point: Point::new(s, self.phi0),
            velocity: [1.0, 0.0],
            acceleration: [0.0, 0.0],
        })
    }
}

/// Quintic Hermite interpolation between stored samples.
impl PlaneCurve for Path {
    fn jet(&self, s: f64) -> Result<CurveJet> {
        let (p0, p1) = self.span();
        let (lo_p, hi_p) = (p0.min(p1), p0.max(p1));
        if !(s >= lo_p && s <= hi_p) {
            return Err(GeoError::InvalidInput(format!(
                "parameter {s} outside path range [{lo_p}, {hi_p}]"
            )));
        }
        let forward = p1 >= p0;
        let idx = self
            .samples
            .partition_point(|x| if forward { x.parameter <= s } else { x.parameter >= s })
            .clamp(1, self.samples.len() - 1);
        let a = &self.samples[idx - 1];
        let b = &self.samples[idx];
        let h = b.parameter - a.parameter;
        if h == 0.0 {
            return Ok(CurveJet {
                point: a.state.point(),
                velocity: [a.state.r_dot, a.state.phi_dot],
                acceleration: a.accel,
            });
        }
        let tau = (s - a.parameter) / h;
        let ya = [a.state.r, a.state.phi];
        let yb = [b.state.r, b.state.phi];
        let va = [a.state.r_dot, a.state.phi_dot];
        let vb = [b.state.r_dot, b.state.phi_dot];
        let mut pos = [0.0; 2];
        let mut vel = [0.0; 2];
        let mut acc = [0.0; 2];
        for i in 0..2 {
            let c0 = ya[i];
            let c1 = h * va[i];
            let c2 = 0.5 * h * h * a.accel[i];
            let y_rem = yb[i] - (c0 + c1 + c2);
            let v_rem = h * vb[i] - (c1 + 2.0 * c2);
            let a_rem = h * h * b.accel[i] - 2.0 * c2;
            let c3 = 10.0 * y_rem - 4.0 * v_rem + 0.5 * a_rem;
            let c4 = -15.0 * y_rem + 7.0 * v_rem - a_rem;
            let c5 = 6.0 * y_rem - 3.0 * v_rem + 0.5 * a_rem;
            pos[i] = c0 + tau * (c1 + tau * (c2 + tau * (c3 + tau * (c4 + tau * c5))));
            vel[i] = (c1 + tau * (2.0 * c2 + tau * (3.0 * c3 + tau * (4.0 * c4 + tau * 5.0 * c5)))) / h;
            acc[i] = (2.0 * c2 + tau * (6.0 * c3 + tau * (12.0 * c4 + tau * 20.0 * c5))) / (h * h);
        }
        Ok(CurveJet {
            point: Point::new(pos[0], pos[1]),
            velocity: vel,
            acceleration: acc,
        })
    }
}

/// Signed geodesic curvature of `curve` at parameter `s`, positive when the
/// curve turns toward the normal on the left of its tangent.
pub fn geodesic_curvature_numeric<C: PlaneCurve + ?Sized>(
    id: MetricId,
    params: SpacetimeParams,
    curve: &C,
    s: f64,
) -> Result<f64> {
    let jet = curve.jet(s)?;
    let c = eval_metric(id, params, jet.point)?;
    let v = jet.velocity;
    let speed_sq = c.e * v[0] * v[0] + 2.0 * c.f * v[0] * v[1] + c.g * v[1] * v[1];
    let speed = speed_sq.sqrt();
    if !(speed >= 1e-12) {
        return Err(GeoError::DegenerateTangent(speed));
    }
    let gam = christoffel(id, params, jet.point)?;
    let quad = gam.contract(v);
    let cov = [jet.acceleration[0] + quad[0], jet.acceleration[1] + quad[1]];
    let sqrt_det = area_element(c)?;
    Ok(sqrt_det * (v[0] * cov[1] - v[1] * cov[0]) / (speed * speed_sq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sch(m: f64) -> SpacetimeParams {
        SpacetimeParams::schwarzschild(m)
    }

    #[test]
    fn flat_circle_acceleration() {
        let d = geodesic_rhs(MetricId::Flat, sch(0.0), GeodesicState::new(5.0, 0.0, 0.0, 1.0)).unwrap();
        assert_eq!(d.r_ddot, 5.0);
        assert_eq!(d.phi_ddot, 0.0);
    }

    #[test]
    fn radial_ray_stays_radial() {
        let d = geodesic_rhs(
            MetricId::SchwarzschildOptical,
            sch(1.0),
            GeodesicState::new(10.0, 0.4, -0.7, 0.0),
        )
        .unwrap();
        assert_eq!(d.phi_ddot, 0.0);
    }

    #[test]
    fn clairaut_constant_is_stationary() {
        let id = MetricId::KerrReducedOptical;
        let params = SpacetimeParams::new(1.0, 0.6).unwrap();
        let s = GeodesicState::with_impact(id, params, 30.0, 0.0, 12.0, true).unwrap();
        let d = geodesic_rhs(id, params, s).unwrap();
        let h = 1e-4;
        let ahead = GeodesicState::new(
            s.r + h * d.r_dot,
            s.phi + h * d.phi_dot,
            s.r_dot + h * d.r_ddot,
            s.phi_dot + h * d.phi_ddot,
        );
        let behind = GeodesicState::new(
            s.r - h * d.r_dot,
            s.phi - h * d.phi_dot,
            s.r_dot - h * d.r_ddot,
            s.phi_dot - h * d.phi_ddot,
        );
        let rate = (clairaut_constant(id, params, ahead).unwrap()
            - clairaut_constant(id, params, behind).unwrap())
            / (2.0 * h);
        assert!(rate.abs() < 1e-8, "{rate}");
    }

    #[test]
    fn with_impact_has_unit_speed() {
        let s = GeodesicState::with_impact(MetricId::SchwarzschildOptical, sch(1.0), 1e4, 0.0, 50.0, true).unwrap();
        let v = optical_speed_sq(MetricId::SchwarzschildOptical, sch(1.0), s).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-14);
        assert!(s.r_dot < 0.0);
        assert!(GeodesicState::with_impact(MetricId::Flat, sch(1.0), 10.0, 0.0, 11.0, true).is_err());
    }

    #[test]
    fn flat_rays_are_straight() {
        let theta0: f64 = 0.7;
        // start at (x, y) = (3, 1) moving along angle theta0
        let (x0, y0) = (3.0f64, 1.0f64);
        let r0 = x0.hypot(y0);
        let phi0 = y0.atan2(x0);
        let (vx, vy) = (theta0.cos(), theta0.sin());
        let r_dot = (x0 * vx + y0 * vy) / r0;
        let phi_dot = (x0 * vy - y0 * vx) / (r0 * r0);
        let init = GeodesicState::new(r0, phi0, r_dot, phi_dot);
        let stop = StopCondition { r_escape: None, p_max: 40.0, r_min: 1e-3 };
        let path = integrate_geodesic(MetricId::Flat, sch(0.0), init, stop).unwrap();
        assert_eq!(path.stop, StopReason::ParameterLimit);
        assert_eq!(path.last().parameter, 40.0);
        let c0 = x0 * theta0.sin() - y0 * theta0.cos();
        for s in &path.samples {
            let (x, y) = (s.state.r * s.state.phi.cos(), s.state.r * s.state.phi.sin());
            assert!((x * theta0.sin() - y * theta0.cos() - c0).abs() < 1e-9);
        }
    }

    #[test]
    fn conservation_along_schwarzschild_ray() {
        let id = MetricId::SchwarzschildOptical;
        let init = GeodesicState::with_impact(id, sch(1.0), 200.0, 0.0, 8.0, true).unwrap();
        let stop = StopCondition { r_escape: Some(200.0), p_max: 1e4, r_min: 2.01 };
        let path = integrate_geodesic(id, sch(1.0), init, stop).unwrap();
        assert_eq!(path.stop, StopReason::Escaped);
        assert_relative_eq!(path.last().state.r, 200.0, max_relative = 1e-12);
        assert!(path.clairaut_drift(id, sch(1.0)).unwrap() < 1e-8);
        assert!(path.speed_drift(id, sch(1.0)).unwrap() < 1e-8);
    }

    #[test]
    fn reversibility() {
        let id = MetricId::KerrReducedOptical;
        let params = SpacetimeParams::new(1.0, 0.5).unwrap();
        let init = GeodesicState::with_impact(id, params, 60.0, 0.2, 9.0, true).unwrap();
        let fwd = integrate_geodesic(id, params, init, StopCondition { r_escape: None, p_max: 80.0, r_min: 2.01 })
            .unwrap();
        let end = fwd.last().state;
        let back_init = GeodesicState::new(end.r, end.phi, -end.r_dot, -end.phi_dot);
        let back = integrate_geodesic(id, params, back_init, StopCondition { r_escape: None, p_max: 80.0, r_min: 2.01 })
            .unwrap();
        let fin = back.last().state;
        assert!((fin.r - init.r).abs() < 1e-7);
        assert!((fin.phi - init.phi).abs() < 1e-7);
        assert!((fin.r_dot + init.r_dot).abs() < 1e-7);
        assert!((fin.phi_dot + init.phi_dot).abs() < 1e-7);
    }

    #[test]
    fn backward_integration_matches_reversal() {
        let id = MetricId::SchwarzschildOptical;
        let init = GeodesicState::with_impact(id, sch(1.0), 40.0, 0.0, 7.0, true).unwrap();
        let fwd = integrate_geodesic(id, sch(1.0), init, StopCondition { r_escape: None, p_max: 30.0, r_min: 2.01 })
            .unwrap();
        let back = integrate_geodesic(
            id,
            sch(1.0),
            fwd.last().state,
            StopCondition { r_escape: None, p_max: -30.0, r_min: 2.01 },
        )
        .unwrap();
        assert!((back.last().state.r - init.r).abs() < 1e-7);
        assert!((back.last().state.phi - init.phi).abs() < 1e-7);
    }

    #[test]
    fn low_impact_ray_is_captured() {
        let id = MetricId::SchwarzschildOptical;
        let init = GeodesicState::with_impact(id, sch(1.0), 1e3, 0.0, 2.0, true).unwrap();
        let stop = StopCondition { r_escape: Some(1e3), p_max: 1e5, r_min: capture_radius(id, sch(1.0)) };
        let err = integrate_geodesic(id, sch(1.0), init, stop).unwrap_err();
        assert!(matches!(err, GeoError::Capture { .. }), "{err:?}");
        assert!(matches!(
            shoot_deflection(id, sch(1.0), 2.0, &ShootConfig::default()),
            Err(GeoError::Capture { .. })
        ));
    }

    #[test]
    fn critical_impact_parameter_matches_photon_sphere() {
        let b_crit = critical_impact_parameter(MetricId::SchwarzschildOptical, sch(1.0), 4.0, 7.0, 1e-6).unwrap();
        assert!((b_crit - 3.0 * 3f64.sqrt()).abs() < 1e-5, "{b_crit}");
    }

    #[test]
    fn flat_shot_has_no_deflection() {
        for b in [0.5, 10.0, 1e3] {
            let d = shoot_deflection(MetricId::Flat, sch(0.0), b, &ShootConfig::default()).unwrap();
            assert!(d.angle.abs() < 1e-9, "b = {b}: {}", d.angle);
            assert_eq!(d.method, DeflectionMethod::Shooting);
        }
    }

    #[test]
    fn schwarzschild_shot_weak_field() {
        let d = shoot_deflection(MetricId::SchwarzschildOptical, sch(1.0), 1e5, &ShootConfig::default()).unwrap();
        assert!((d.angle - 4e-5).abs() < 4e-9, "{} (est {})", d.angle, d.error_estimate);
    }

    #[test]
    fn shot_rejects_bad_config() {
        let cfg = ShootConfig { r_start_factors: [100.0, 1e3], ..Default::default() };
        assert!(shoot_deflection(MetricId::Flat, sch(0.0), 10.0, &cfg).is_err());
        assert!(shoot_deflection(MetricId::Flat, sch(0.0), -1.0, &ShootConfig::default()).is_err());
    }

    #[test]
    fn circle_curvature() {
        assert_relative_eq!(geodesic_curvature_circle(MetricId::Flat, sch(0.0), 5.0).unwrap(), 0.2, max_relative = 1e-15);
        let id = MetricId::SchwarzschildOptical;
        let r0 = 1e6;
        let k = geodesic_curvature_circle(id, sch(1.0), r0).unwrap();
        let g = eval_metric(id, sch(1.0), Point::new(r0, 0.0)).unwrap().g;
        assert!((k * g.sqrt() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn circle_curvature_matches_numeric() {
        let params = SpacetimeParams::new(1.0, 0.4).unwrap();
        for id in MetricId::ALL {
            for r0 in [3.0, 7.5, 120.0] {
                let exact = geodesic_curvature_circle(id, params, r0).unwrap();
                let ccw = CoordinateCircle { radius: r0, counterclockwise: true };
                let cw = CoordinateCircle { radius: r0, counterclockwise: false };
                let num = geodesic_curvature_numeric(id, params, &ccw, 0.3).unwrap();
                assert_relative_eq!(num, exact, max_relative = 1e-6);
                let num_cw = geodesic_curvature_numeric(id, params, &cw, 0.3).unwrap();
                assert_relative_eq!(num_cw, -exact, max_relative = 1e-6);
            }
        }
        let flat = geodesic_curvature_numeric(
            MetricId::Flat,
            sch(0.0),
            &CoordinateCircle { radius: 5.0, counterclockwise: true },
            1.0,
        )
        .unwrap();
        assert_relative_eq!(flat, 0.2, max_relative = 1e-14);
    }

    #[test]
    fn radial_lines_are_geodesics() {
        let params = SpacetimeParams::new(1.0, 0.5).unwrap();
        for id in MetricId::ALL {
            for s in [3.0, 10.0, 500.0] {
                let k = geodesic_curvature_numeric(id, params, &RadialLine { phi0: 1.1 }, s).unwrap();
                assert!(k.abs() < 1e-9, "{id} at r = {s}: {k}");
            }
        }
    }

    #[test]
    fn integrated_geodesic_has_zero_curvature() {
        let id = MetricId::SchwarzschildOptical;
        let init = GeodesicState::with_impact(id, sch(1.0), 100.0, 0.0, 12.0, true).unwrap();
        let cfg = IntegratorConfig { max_step: Some(1.0), ..Default::default() };
        let path = integrate_geodesic_with(
            id,
            sch(1.0),
            init,
            StopCondition { r_escape: Some(100.0), p_max: 1e4, r_min: 2.01 },
            &cfg,
        )
        .unwrap();
        for w in path.samples.windows(2) {
            for frac in [0.0, 0.25, 0.5, 0.75] {
                let s = w[0].parameter + frac * (w[1].parameter - w[0].parameter);
                let k = geodesic_curvature_numeric(id, sch(1.0), &path, s).unwrap();
                assert!(k.abs() < 1e-7, "kappa_g = {k} at s = {s}");
            }
        }
    }

    #[test]
    fn degenerate_tangent() {
        struct Stalled;
        impl PlaneCurve for Stalled {
            fn jet(&self, _s: f64) -> Result<CurveJet> {
                Ok(CurveJet { point: Point::new(10.0, 0.0), velocity: [0.0, 0.0], acceleration: [1.0, 0.0] })
            }
        }
        assert!(matches!(
            geodesic_curvature_numeric(MetricId::Flat, sch(0.0), &Stalled, 0.0),
            Err(GeoError::DegenerateTangent(_))
        ));
    }
}
