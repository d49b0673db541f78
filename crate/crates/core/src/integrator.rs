//! Fixed-step integration of the reduced ODE and assembly of the full map.
//!
//! `R'^2 = Phi(R)` is singular at turning points, so the march uses the
//! differentiated form `R'' = Phi'(R) / 2` with `R'` carried as state. The
//! first-order relation is only monitored, as the drift `|R'^2 - Phi(R)|`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{MapField, MapJet, RectGrid};
use crate::metrics::{Sign, TargetMetric};
use crate::reduction::{ReducedSystem, ReductionParams, TravelingFrame, DOUBLE_ROOT_TOL};

/// One-step method for `R'' = Phi'(R)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Classical fourth-order Runge-Kutta on `(R, R')`.
    Rk4SecondOrder,
    /// Second-order symplectic velocity Verlet.
    VelocityVerlet,
}

impl Method {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rk4" | "rk4_second_order" => Some(Method::Rk4SecondOrder),
            "verlet" | "velocity_verlet" => Some(Method::VelocityVerlet),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::Rk4SecondOrder => "rk4_second_order",
            Method::VelocityVerlet => "velocity_verlet",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HQuadrature {
    SimpsonOnSolutionGrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub method: Method,
    /// Allowed drift `|R'^2 - Phi(R)|` per unit `t`.
    pub invariant_tol: f64,
    pub max_steps: usize,
    pub h_quadrature: HQuadrature,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            method: Method::Rk4SecondOrder,
            invariant_tol: 1e-8,
            max_steps: 10_000_000,
            h_quadrature: HQuadrature::SimpsonOnSolutionGrid,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", self.dt, "dt > 0"));
        }
        if !(self.invariant_tol > 0.0) {
            return Err(Error::invalid("invariant_tol", self.invariant_tol, "invariant_tol > 0"));
        }
        if self.max_steps < 1 {
            return Err(Error::invalid("max_steps", 0.0, "max_steps >= 1"));
        }
        Ok(())
    }
}

/// Samples of `R(t)`, `R'(t)` and, after [`quadrature_h`], `H(t)` and `H'(t)`
/// on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution {
    pub ts: Vec<f64>,
    pub rs: Vec<f64>,
    pub rps: Vec<f64>,
    /// Empty until [`quadrature_h`] runs; `hs[0] = 0`.
    pub hs: Vec<f64>,
    pub hps: Vec<f64>,
    /// `|R'^2 - Phi(R)|` per sample.
    pub drift: Vec<f64>,
    /// Times where `R'` changed sign, linearly interpolated within the step.
    pub turning_events: Vec<f64>,
    /// Times where the path sat on a double root of `Phi`.
    pub double_root_warnings: Vec<f64>,
}

impl OdeSolution {
    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ts.is_empty()
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.ts[0], *self.ts.last().unwrap())
    }

    pub fn step(&self) -> f64 {
        let (lo, hi) = self.t_range();
        (hi - lo) / (self.len() - 1) as f64
    }

    pub fn max_drift(&self) -> f64 {
        self.drift.iter().copied().fold(0.0, f64::max)
    }

    pub fn has_quadrature(&self) -> bool {
        self.hs.len() == self.ts.len() && self.hps.len() == self.ts.len()
    }
}

/// Integrates `R'' = Phi'(R)/2` from `R(t0) = r0`, `R'(t0) = sign0 sqrt(Phi(r0))`.
///
/// The span is divided into `ceil((t1 - t0)/dt)` equal steps.
pub fn integrate_r(
    metric: &TargetMetric,
    params: &ReductionParams,
    r0: f64,
    sign0: Sign,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<OdeSolution> {
    cfg.validate()?;
    let (t0, t1) = t_span;
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::Invalid(format!(
            "t span [{t0}, {t1}] must be increasing and finite"
        )));
    }
    let sys = ReducedSystem::new(metric, *params);
    let phi0 = sys.phi(r0)?;
    if phi0 < -PHI_FLOOR {
        return Err(Error::NegativePhi { r: r0, phi: phi0 });
    }
    let steps = ((t1 - t0) / cfg.dt - 1e-9).ceil().max(1.0) as usize;
    if steps > cfg.max_steps {
        return Err(Error::MaxSteps {
            needed: steps,
            max_steps: cfg.max_steps,
        });
    }
    let h = (t1 - t0) / steps as f64;

    let exit = |t: f64, r: f64| Error::LeftDomain {
        metric: metric.name().to_string(),
        t,
        r,
    };
    let accel = |r: f64, t: f64| -> Result<f64> {
        if metric.distance_to_singularity(r) == 0.0 || !metric.r_domain().contains(r) {
            return Err(exit(t, r));
        }
        match sys.phi_prime(r) {
            Ok(v) if v.is_finite() => Ok(0.5 * v),
            Ok(_) => Err(Error::NonFinite {
                quantity: "Phi'(R)",
                at: t,
            }),
            Err(Error::OutsideDomain { .. }) | Err(Error::CoordinateSingularity { .. }) => Err(exit(t, r)),
            Err(e) => Err(e),
        }
    };

    let mut sol = OdeSolution {
        ts: Vec::with_capacity(steps + 1),
        rs: Vec::with_capacity(steps + 1),
        rps: Vec::with_capacity(steps + 1),
        hs: Vec::new(),
        hps: Vec::new(),
        drift: Vec::with_capacity(steps + 1),
        turning_events: Vec::new(),
        double_root_warnings: Vec::new(),
    };
    let mut r = r0;
    let mut v = sign0.value() * phi0.max(0.0).sqrt();
    sol.ts.push(t0);
    sol.rs.push(r);
    sol.rps.push(v);
    sol.drift.push((v * v - phi0).abs());

    let mut last_sign = v.signum() * (v != 0.0) as i32 as f64;
    let mut last_nonzero = (t0, v);
    let mut on_double_root = false;

    for k in 1..=steps {
        let t_prev = t0 + (k - 1) as f64 * h;
        let t = t0 + k as f64 * h;
        let (r_new, v_new) = match cfg.method {
            Method::Rk4SecondOrder => {
                let a1 = accel(r, t_prev)?;
                let (r2, v2) = (r + 0.5 * h * v, v + 0.5 * h * a1);
                let a2 = accel(r2, t_prev + 0.5 * h)?;
                let (r3, v3) = (r + 0.5 * h * v2, v + 0.5 * h * a2);
                let a3 = accel(r3, t_prev + 0.5 * h)?;
                let (r4, v4) = (r + h * v3, v + h * a3);
                let a4 = accel(r4, t)?;
                (
                    r + h / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4),
                    v + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
                )
            }
            Method::VelocityVerlet => {
                let half = v + 0.5 * h * accel(r, t_prev)?;
                let r_new = r + h * half;
                (r_new, half + 0.5 * h * accel(r_new, t)?)
            }
        };
        if !r_new.is_finite() || !v_new.is_finite() {
            return Err(Error::NonFinite { quantity: "R", at: t });
        }
        let phi = match sys.phi(r_new) {
            Ok(p) => p,
            Err(Error::OutsideDomain { .. }) | Err(Error::CoordinateSingularity { .. }) => return Err(exit(t, r_new)),
            Err(e) => return Err(e),
        };
        let drift = (v_new * v_new - phi).abs();
        let budget = cfg.invariant_tol * (t - t0);
        if drift > budget {
            return Err(Error::DriftExceeded { t, drift, budget });
        }

        if v_new != 0.0 {
            let s = v_new.signum();
            if last_sign != 0.0 && s != last_sign {
                let (tp, vp) = last_nonzero;
                sol.turning_events.push(tp + (t - tp) * vp / (vp - v_new));
            }
            last_sign = s;
            last_nonzero = (t, v_new);
        }

        let dphi = sys.phi_prime(r_new).unwrap_or(f64::NAN);
        let double = phi.abs() <= DOUBLE_ROOT_TOL && dphi.abs() <= DOUBLE_ROOT_TOL;
        if double && !on_double_root {
            sol.double_root_warnings.push(t);
        }
        on_double_root = double;

        r = r_new;
        v = v_new;
        sol.ts.push(t);
        sol.rs.push(r);
        sol.rps.push(v);
        sol.drift.push(drift);
    }
    Ok(sol)
}

/// Starting values with `Phi(R0)` in `[-PHI_FLOOR, 0)` are treated as turning points.
pub const PHI_FLOOR: f64 = 1e-12;

/// Fills `hs`/`hps` with `H(t_i) = int_{t0}^{t_i} H'(R(tau)) dtau` by
/// composite Simpson on the solution grid.
pub fn quadrature_h(metric: &TargetMetric, params: &ReductionParams, mut sol: OdeSolution) -> Result<OdeSolution> {
    let sys = ReducedSystem::new(metric, *params);
    let f = sol.rs.iter().map(|&r| sys.h_prime(r)).collect::<Result<Vec<_>>>()?;
    let n = f.len();
    let mut hs = vec![0.0; n];
    if n >= 2 {
        let h = sol.step();
        if n == 2 {
            hs[1] = 0.5 * h * (f[0] + f[1]);
        } else {
            hs[1] = h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
            for i in 2..n {
                hs[i] = if i % 2 == 0 {
                    hs[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i])
                } else {
                    hs[i - 1] + h / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i])
                };
            }
        }
    }
    sol.hs = hs;
    sol.hps = f;
    Ok(sol)
}

/// [`integrate_r`] followed by [`quadrature_h`].
pub fn solve(
    metric: &TargetMetric,
    params: &ReductionParams,
    r0: f64,
    sign0: Sign,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<OdeSolution> {
    let sol = integrate_r(metric, params, r0, sign0, t_span, cfg)?;
    quadrature_h(metric, params, sol)
}

/// The traveling-frame map built from an [`OdeSolution`], evaluated by cubic
/// Hermite interpolation in `t`.
#[derive(Debug, Clone)]
pub struct NumericMap<'m> {
    sys: ReducedSystem<'m>,
    sol: OdeSolution,
}

impl<'m> NumericMap<'m> {
    pub fn new(metric: &'m TargetMetric, params: ReductionParams, sol: OdeSolution) -> Result<Self> {
        if sol.len() < 2 {
            return Err(Error::Invalid("solution needs at least two samples".into()));
        }
        let sol = if sol.has_quadrature() {
            sol
        } else {
            quadrature_h(metric, &params, sol)?
        };
        Ok(Self {
            sys: ReducedSystem::new(metric, params),
            sol,
        })
    }

    pub fn solution(&self) -> &OdeSolution {
        &self.sol
    }

    pub fn params(&self) -> &ReductionParams {
        self.sys.params()
    }

    pub fn frame(&self) -> TravelingFrame {
        self.sys.params().frame()
    }

    fn locate(&self, t: f64) -> Result<(usize, f64, f64)> {
        let (lo, hi) = self.sol.t_range();
        let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if !(t >= lo - slack && t <= hi + slack) {
            return Err(Error::Extrapolation { t, lo, hi });
        }
        let h = self.sol.step();
        let n = self.sol.len();
        let i = (((t - lo) / h).floor().max(0.0) as usize).min(n - 2);
        let u = (t - self.sol.ts[i]) / h;
        Ok((i, u, h))
    }

    /// `(R, R', H, H')` at `t`.
    pub fn profile_at(&self, t: f64) -> Result<(f64, f64, f64, f64)> {
        let (i, u, h) = self.locate(t)?;
        let s = &self.sol;
        let acc0 = 0.5 * self.sys.phi_prime(s.rs[i])?;
        let acc1 = 0.5 * self.sys.phi_prime(s.rs[i + 1])?;
        let r = hermite(s.rs[i], s.rps[i], s.rs[i + 1], s.rps[i + 1], h, u);
        let rp = hermite(s.rps[i], acc0, s.rps[i + 1], acc1, h, u);
        let hh = hermite(s.hs[i], s.hps[i], s.hs[i + 1], s.hps[i + 1], h, u);
        let hp = self.sys.h_prime(r)?;
        Ok((r, rp, hh, hp))
    }
}

/// Cubic Hermite on `[x_i, x_i + h]` at fraction `u`.
fn hermite(p0: f64, m0: f64, p1: f64, m1: f64, h: f64, u: f64) -> f64 {
    let u2 = u * u;
    let u3 = u2 * u;
    (2.0 * u3 - 3.0 * u2 + 1.0) * p0 + (u3 - 2.0 * u2 + u) * h * m0 + (-2.0 * u3 + 3.0 * u2) * p1 + (u3 - u2) * h * m1
}

impl MapField for NumericMap<'_> {
    fn eval(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let f = self.frame();
        let (r, _, h, _) = self.profile_at(f.t(x, y))?;
        Ok((r, f.a * x + f.b * y + h))
    }

    fn jet(&self, x: f64, y: f64) -> Option<Result<MapJet>> {
        Some((|| {
            let f = self.frame();
            let (a, b) = (f.a, f.b);
            let (r, rp, h, hp) = self.profile_at(f.t(x, y))?;
            let rpp = 0.5 * self.sys.phi_prime(r)?;
            let hpp = self.sys.h_prime_dr(r)? * rp;
            Ok(MapJet {
                r,
                s: a * x + b * y + h,
                r_x: -b * rp,
                r_y: a * rp,
                s_x: a - b * hp,
                s_y: b + a * hp,
                r_xx: b * b * rpp,
                r_yy: a * a * rpp,
                s_xx: b * b * hpp,
                s_yy: a * a * hpp,
            })
        })())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub r: f64,
    pub s: f64,
}

/// The assembled map on a rectangular lattice, row-major (`y` outer).
#[derive(Debug, Clone, PartialEq)]
pub struct MapSample {
    pub grid: RectGrid,
    pub points: Vec<MapPoint>,
}

impl MapSample {
    pub fn at(&self, i: usize, j: usize) -> &MapPoint {
        &self.points[j * self.grid.nx + i]
    }
}

/// Evaluates `u(x, y) = (R(t), a x + b y + H(t))` on every grid node.
pub fn assemble_map(
    metric: &TargetMetric,
    params: &ReductionParams,
    sol: &OdeSolution,
    grid: &RectGrid,
) -> Result<MapSample> {
    let map = NumericMap::new(metric, *params, sol.clone())?;
    let frame = params.frame();
    let points = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (x, y) = grid.point(k);
            let t = frame.t(x, y);
            let (r, s) = map.eval(x, y)?;
            Ok(MapPoint { x, y, t, r, s })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MapSample { grid: *grid, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{catalog_lookup, Params, SignaturePair};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

    fn ellipsoid() -> TargetMetric {
        let p: Params = [("c".to_string(), SQRT_2)].into_iter().collect();
        catalog_lookup("ellipsoid", &p).unwrap()
    }

    fn flagship() -> ReductionParams {
        ReductionParams::new(0.0, 1.0, 0.125, -SQRT_2 / 4.0, SignaturePair::riemannian()).unwrap()
    }

    fn exact_r(t: f64) -> f64 {
        (FRAC_PI_4.cos() * t.sin()).acos()
    }

    fn exact_h(t: f64) -> f64 {
        let k = (t / PI).round();
        k * PI + (FRAC_PI_4.sin() * (t - k * PI).tan()).atan()
    }

    #[test]
    fn free_motion_on_flat_target() {
        // A = B = 1, a = 0, b = 1, Riemannian: Phi = 1 + 4 kappa - 4 lambda^2;
        // kappa = 0, lambda = 0 gives Phi = 1.
        let m = catalog_lookup("flat_cartesian", &Params::new()).unwrap();
        let p = ReductionParams::new(0.0, 1.0, 0.0, 0.0, SignaturePair::riemannian()).unwrap();
        let sol = integrate_r(&m, &p, 0.3, Sign::Plus, (0.0, 2.0), &IntegratorConfig::default()).unwrap();
        for (t, r) in sol.ts.iter().zip(&sol.rs) {
            assert!((r - (0.3 + t)).abs() < 1e-12);
        }
        assert!(sol.turning_events.is_empty());
    }

    #[test]
    fn ellipsoid_matches_closed_form_with_one_turning_event() {
        let m = ellipsoid();
        let cfg = IntegratorConfig::default();
        let sol = solve(&m, &flagship(), FRAC_PI_2, Sign::Minus, (0.0, 4.6), &cfg).unwrap();
        let err_r = sol
            .ts
            .iter()
            .zip(&sol.rs)
            .map(|(t, r)| (r - exact_r(*t)).abs())
            .fold(0.0, f64::max);
        assert!(err_r < 1e-6, "{err_r}");
        assert_eq!(sol.turning_events.len(), 1);
        assert!((sol.turning_events[0] - FRAC_PI_2).abs() < 1e-3);
        let err_h = sol
            .ts
            .iter()
            .zip(&sol.hs)
            .map(|(t, h)| (h - exact_h(*t)).abs())
            .fold(0.0, f64::max);
        assert!(err_h < 1e-6, "{err_h}");
        assert_eq!(sol.hs[0], 0.0);
    }

    #[test]
    fn departs_from_a_simple_turning_point() {
        let m = ellipsoid();
        let sol = integrate_r(
            &m,
            &flagship(),
            FRAC_PI_4,
            Sign::Plus,
            (0.0, 0.2),
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(sol.rps[0], 0.0);
        assert!(sol.rs[10] > FRAC_PI_4);
        assert!(sol.rs.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_negative_phi_and_domain_exit() {
        let m = ellipsoid();
        let err = integrate_r(
            &m,
            &flagship(),
            0.5,
            Sign::Plus,
            (0.0, 1.0),
            &IntegratorConfig::default(),
        );
        assert!(matches!(err, Err(Error::NegativePhi { .. })));

        // polar plane, a = 0, b = 1, lambda = 0: Phi = R^2 + 4 kappa, and the
        // inward branch reaches the origin in finite t
        let m = catalog_lookup("flat_polar", &Params::new()).unwrap();
        let p = ReductionParams::new(0.0, 1.0, 0.25, 0.0, SignaturePair::riemannian()).unwrap();
        let cfg = IntegratorConfig::default();
        let err = integrate_r(&m, &p, 0.5, Sign::Minus, (0.0, 2.0), &cfg).unwrap_err();
        assert!(matches!(err, Error::LeftDomain { .. }), "{err}");
    }

    #[test]
    fn drift_budget_and_step_limit() {
        let m = ellipsoid();
        let cfg = IntegratorConfig {
            dt: 0.05,
            method: Method::VelocityVerlet,
            invariant_tol: 1e-10,
            ..Default::default()
        };
        let err = integrate_r(&m, &flagship(), FRAC_PI_2, Sign::Minus, (0.0, 3.0), &cfg).unwrap_err();
        assert!(matches!(err, Error::DriftExceeded { .. }), "{err}");

        let cfg = IntegratorConfig {
            max_steps: 10,
            ..Default::default()
        };
        let err = integrate_r(&m, &flagship(), FRAC_PI_2, Sign::Minus, (0.0, 3.0), &cfg).unwrap_err();
        assert!(matches!(err, Error::MaxSteps { .. }));
    }

    #[test]
    fn drift_shrinks_at_method_order() {
        let m = ellipsoid();
        let run = |dt: f64, method| {
            let cfg = IntegratorConfig {
                dt,
                method,
                invariant_tol: 1.0,
                ..Default::default()
            };
            integrate_r(&m, &flagship(), FRAC_PI_2, Sign::Minus, (0.0, 4.0), &cfg)
                .unwrap()
                .max_drift()
        };
        let rk = run(4e-2, Method::Rk4SecondOrder) / run(2e-2, Method::Rk4SecondOrder);
        assert!(rk >= 8.0, "rk4 ratio {rk}");
        let vv = run(4e-2, Method::VelocityVerlet) / run(2e-2, Method::VelocityVerlet);
        assert!((3.0..5.0).contains(&vv), "verlet ratio {vv}");
    }

    #[test]
    fn time_reversal_returns_to_start() {
        let m = ellipsoid();
        let cfg = IntegratorConfig::default();
        let fwd = integrate_r(&m, &flagship(), FRAC_PI_2, Sign::Minus, (0.0, 2.5), &cfg).unwrap();
        let (r1, v1) = (*fwd.rs.last().unwrap(), *fwd.rps.last().unwrap());
        let back_sign = if v1 < 0.0 { Sign::Plus } else { Sign::Minus };
        let back = integrate_r(&m, &flagship(), r1, back_sign, (0.0, 2.5), &cfg).unwrap();
        let (r2, v2) = (*back.rs.last().unwrap(), *back.rps.last().unwrap());
        let scale = 10.0 * fwd.max_drift().max(1e-14);
        assert!((r2 - FRAC_PI_2).abs() <= scale.sqrt().max(1e-9), "{r2}");
        assert!((v2 + fwd.rps[0]).abs() <= scale.sqrt().max(1e-9), "{v2}");
    }

    #[test]
    fn constant_b_gives_linear_h() {
        // flat target, a = 0, b = 1: H' = 2 lambda del2 / B = -2 lambda
        let m = catalog_lookup("flat_cartesian", &Params::new()).unwrap();
        let p = ReductionParams::new(0.0, 1.0, 0.5, 0.3, SignaturePair::riemannian()).unwrap();
        let sol = solve(&m, &p, 0.0, Sign::Plus, (0.0, 1.0), &IntegratorConfig::default()).unwrap();
        for (t, h) in sol.ts.iter().zip(&sol.hs) {
            assert!((h + 0.6 * t).abs() < 1e-12);
        }
        let p0 = ReductionParams::new(0.0, 1.0, 0.5, 0.0, SignaturePair::riemannian()).unwrap();
        let sol = solve(&m, &p0, 0.0, Sign::Plus, (0.0, 1.0), &IntegratorConfig::default()).unwrap();
        assert!(sol.hs.iter().all(|h| *h == 0.0));
    }

    #[test]
    fn assembled_map_geometry() {
        let m = ellipsoid();
        let sol = solve(
            &m,
            &flagship(),
            FRAC_PI_2,
            Sign::Minus,
            (-1.5, 1.5),
            &IntegratorConfig::default(),
        )
        .unwrap();
        // solution starts at t = -1.5: shift so that R(0) = pi/2 is not assumed here
        let grid = RectGrid::new((-1.0, 1.0), (-1.0, 1.0), 9, 9);
        let map = assemble_map(&m, &flagship(), &sol, &grid).unwrap();
        // a = 0, b = 1: t = -x, R constant along vertical lines
        for i in 0..9 {
            let r0 = map.at(i, 0).r;
            for j in 0..9 {
                assert_eq!(map.at(i, j).r, r0);
                assert!((map.at(i, j).t + map.at(i, j).x).abs() < 1e-15);
            }
        }
        let far = RectGrid::new((-2.0, 1.0), (0.0, 1.0), 4, 2);
        assert!(matches!(
            assemble_map(&m, &flagship(), &sol, &far),
            Err(Error::Extrapolation { .. })
        ));
    }

    #[test]
    fn assembled_map_at_origin_and_diagonal_frame() {
        let m = ellipsoid();
        let cfg = IntegratorConfig::default();
        // integrate both directions from t = 0 by running on [-1.5, 1.5] seeded at the left end
        let r_left = exact_r(-1.5);
        let sol = solve(&m, &flagship(), r_left, Sign::Minus, (-1.5, 1.5), &cfg).unwrap();
        let map = NumericMap::new(&m, flagship(), sol).unwrap();
        let (r, s) = map.eval(0.0, 0.0).unwrap();
        assert!((r - FRAC_PI_2).abs() < 1e-6, "{r}");
        // H is measured from t0 = -1.5 here
        assert!((s - (exact_h(0.0) - exact_h(-1.5))).abs() < 1e-6, "{s}");

        // a = b = 1 (nondegenerate for eps2 = -1): S - (x + y) constant on diagonals
        let p = ReductionParams::new(1.0, 1.0, 0.01, 0.02, SignaturePair::riemannian()).unwrap();
        let flat = catalog_lookup("flat_cartesian", &Params::new()).unwrap();
        let sol = solve(&flat, &p, 0.0, Sign::Plus, (-3.0, 3.0), &cfg).unwrap();
        let grid = RectGrid::new((-1.0, 1.0), (-1.0, 1.0), 5, 5);
        let sample = assemble_map(&flat, &p, &sol, &grid).unwrap();
        for k in 0..4 {
            let p0 = sample.at(k, k);
            let p1 = sample.at(k + 1, k + 1);
            assert!((p0.t - p1.t).abs() < 1e-15);
            assert!(((p0.s - p0.x - p0.y) - (p1.s - p1.x - p1.y)).abs() < 1e-12);
        }
    }
}
