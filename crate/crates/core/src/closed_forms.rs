//! The three explicit traveling-frame families and the quadric embeddings of
//! their targets.
//!
//! Each family is `R = R(t)`, `S = a x + b y + H(t)` with `t = a y - b x`, so
//! every evaluator goes through [`ClosedFormMap::trace`], which returns the
//! profile and its first two `t`-derivatives.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::field::{MapField, MapJet};
use crate::metrics::{catalog_lookup, Params, Sign, SignaturePair, TargetMetric};
use crate::reduction::{recover_first_integrals, ReductionParams, TravelingFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Ellipsoid,
    Hyperboloid,
    Mixed,
}

impl Family {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ellipsoid" => Some(Family::Ellipsoid),
            "hyperboloid" => Some(Family::Hyperboloid),
            "mixed" => Some(Family::Mixed),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Family::Ellipsoid => "ellipsoid",
            Family::Hyperboloid => "hyperboloid",
            Family::Mixed => "mixed",
        }
    }
}

/// `(R, R', R'', H, H', H'')` at one value of `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trace {
    pub r: f64,
    pub rp: f64,
    pub rpp: f64,
    pub h: f64,
    pub hp: f64,
    pub hpp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    /// `u = t / sqrt(c^2 - 1)`.
    Ellipsoid {
        c: f64,
        theta: f64,
        scale: f64,
    },
    Hyperboloid {
        c: f64,
        theta: f64,
        omega: f64,
        drift: f64,
    },
    Mixed {
        d: f64,
        slope: f64,
    },
}

/// One member of a closed-form family with analytic derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormMap {
    family: Family,
    shape: Shape,
    a: f64,
    b: f64,
    sig: SignaturePair,
}

fn check_c(c: f64) -> Result<()> {
    if c > 1.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("c", c, "c > 1"))
    }
}

fn check_ab(a: f64, b: f64) -> Result<()> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Invalid(format!("(a, b) = ({a}, {b}) must be finite")));
    }
    if a == 0.0 && b == 0.0 {
        return Err(Error::Invalid(
            "(a, b) = (0, 0): the frame t = a y - b x is empty".into(),
        ));
    }
    Ok(())
}

/// Maps into the ellipsoid `X^2/c^2 + Y^2 + Z^2 = 1` (Riemannian domain):
/// `R = arccos(cos(theta) sin u)`, `H = arctan(sin(theta) tan u)` continued
/// through the poles of `tan`, `u = t / sqrt(c^2 - 1)`.
pub fn ellipsoid_map(c: f64, theta: f64, a: f64, b: f64) -> Result<ClosedFormMap> {
    check_c(c)?;
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::invalid("theta", theta, "0 < theta < pi/2"));
    }
    check_ab(a, b)?;
    Ok(ClosedFormMap {
        family: Family::Ellipsoid,
        shape: Shape::Ellipsoid {
            c,
            theta,
            scale: (c * c - 1.0).sqrt(),
        },
        a,
        b,
        sig: SignaturePair::riemannian(),
    })
}

/// Maps into the elliptic hyperboloid `X^2/c^2 + Y^2 - Z^2 = 1` (Lorentzian
/// domain): `R = arccos(cosh(theta) sin(w t))`,
/// `H = 2ab/(b^2 - a^2) t + artanh(sinh(theta) tan(w t))`.
pub fn hyperboloid_map(c: f64, theta: f64, a: f64, b: f64) -> Result<ClosedFormMap> {
    check_c(c)?;
    if !theta.is_finite() {
        return Err(Error::invalid("theta", theta, "a finite value"));
    }
    check_ab(a, b)?;
    let gap = b * b - a * a;
    if gap.abs() <= 1e-14 * (a * a + b * b) {
        return Err(Error::DegenerateFrame { a, b, eps2: 1 });
    }
    Ok(ClosedFormMap {
        family: Family::Hyperboloid,
        shape: Shape::Hyperboloid {
            c,
            theta,
            omega: (a * a + b * b) / (gap * (c * c - 1.0).sqrt()),
            drift: 2.0 * a * b / gap,
        },
        a,
        b,
        sig: SignaturePair::lorentzian(),
    })
}

/// Maps into `dR^2 - del2 tanh^2 R dS^2` with `del2 = -eps2`:
/// `a = sin(theta)`, `b = cos(theta)`, `R = arsinh(t / D)` and `H` linear,
/// `D = cos^2 theta - eps2 sin^2 theta`.
pub fn mixed_map(theta: f64, eps2: Sign) -> Result<ClosedFormMap> {
    if !(theta > 0.0 && theta < FRAC_PI_4) {
        return Err(Error::invalid("theta", theta, "0 < theta < pi/4"));
    }
    let (a, b) = theta.sin_cos();
    let e = eps2.value();
    let d = b * b - e * a * a;
    Ok(ClosedFormMap {
        family: Family::Mixed,
        shape: Shape::Mixed {
            d,
            slope: (1.0 + e) * a * b / d,
        },
        a,
        b,
        sig: SignaturePair::new(eps2, eps2.flip()),
    })
}

impl ClosedFormMap {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn signature(&self) -> SignaturePair {
        self.sig
    }

    pub fn frame(&self) -> TravelingFrame {
        TravelingFrame { a: self.a, b: self.b }
    }

    /// The quadric parameter `c`, absent for the mixed family.
    pub fn c(&self) -> Option<f64> {
        match self.shape {
            Shape::Ellipsoid { c, .. } | Shape::Hyperboloid { c, .. } => Some(c),
            Shape::Mixed { .. } => None,
        }
    }

    /// The catalog metric this family maps into.
    pub fn target_metric(&self) -> TargetMetric {
        let one = |k: &str, v: f64| -> Params { [(k.to_string(), v)].into_iter().collect() };
        let built = match self.shape {
            Shape::Ellipsoid { c, .. } => catalog_lookup("ellipsoid", &one("c", c)),
            Shape::Hyperboloid { c, .. } => catalog_lookup("elliptic_hyperboloid", &one("c", c)),
            Shape::Mixed { .. } => catalog_lookup("tanh_warp", &one("del2", self.sig.d())),
        };
        built.expect("family parameters were validated at construction")
    }

    pub fn trace(&self, t: f64) -> Result<Trace> {
        let out_of_domain = |reason: String| Error::ClosedFormDomain {
            family: self.family.label(),
            t,
            reason,
        };
        let tr = match self.shape {
            Shape::Ellipsoid { theta, scale, .. } => {
                let u = t / scale;
                let (st, ct) = theta.sin_cos();
                let (su, cu) = u.sin_cos();
                let q = ct * su;
                let q1 = ct * cu / scale;
                let q2 = -q / (scale * scale);
                let w = 1.0 - q * q;
                // |q| <= cos(theta) < 1, so the pole is never reached
                let k = (u / PI).round();
                let h = k * PI + (st * (u - k * PI).tan()).atan();
                Trace {
                    r: q.acos(),
                    rp: -q1 / w.sqrt(),
                    rpp: -q2 / w.sqrt() - q * q1 * q1 / w.powf(1.5),
                    h,
                    hp: st / (scale * w),
                    hpp: st * 2.0 * q * q1 / (scale * w * w),
                }
            }
            Shape::Hyperboloid {
                theta, omega, drift, ..
            } => {
                let (sw, cw) = (omega * t).sin_cos();
                let q = theta.cosh() * sw;
                let w = 1.0 - q * q;
                if !(w > 0.0) {
                    return Err(out_of_domain(format!(
                        "|cosh(theta) sin(w t)| = {} reaches 1 (R hits a pole)",
                        q.abs()
                    )));
                }
                let sh = theta.sinh();
                let arg = if sh == 0.0 { 0.0 } else { sh * sw / cw };
                if !(arg.abs() < 1.0) {
                    return Err(out_of_domain(format!(
                        "|sinh(theta) tan(w t)| = {} is outside the artanh domain",
                        arg.abs()
                    )));
                }
                let q1 = theta.cosh() * omega * cw;
                let q2 = -omega * omega * q;
                Trace {
                    r: q.acos(),
                    rp: -q1 / w.sqrt(),
                    rpp: -q2 / w.sqrt() - q * q1 * q1 / w.powf(1.5),
                    h: drift * t + arg.atanh(),
                    hp: drift + omega * sh / w,
                    hpp: omega * sh * 2.0 * q * q1 / (w * w),
                }
            }
            Shape::Mixed { d, slope } => {
                let n = d * d + t * t;
                Trace {
                    r: (t / d).asinh(),
                    rp: 1.0 / n.sqrt(),
                    rpp: -t / n.powf(1.5),
                    h: slope * t,
                    hp: slope,
                    hpp: 0.0,
                }
            }
        };
        Ok(tr)
    }

    /// `(R(t0), sign of R'(t0), params)`: the seed that reproduces this map
    /// through the reduced ODE from `t0`.
    pub fn seed(&self, t0: f64) -> Result<(f64, Sign, ReductionParams)> {
        let (kappa, lambda) = self.recover(t0)?;
        let tr = self.trace(t0)?;
        let sign = if tr.rp < 0.0 { Sign::Minus } else { Sign::Plus };
        let params = ReductionParams::new(self.a, self.b, kappa, lambda, self.sig)?;
        Ok((tr.r, sign, params))
    }

    /// `(kappa, lambda)` recovered from the trace at `t`.
    pub fn recover(&self, t: f64) -> Result<(f64, f64)> {
        let tr = self.trace(t)?;
        recover_first_integrals(&self.target_metric(), self.sig, self.a, self.b, tr.r, tr.rp, tr.hp)
    }
}

impl MapField for ClosedFormMap {
    fn eval(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let tr = self.trace(self.frame().t(x, y))?;
        Ok((tr.r, self.a * x + self.b * y + tr.h))
    }

    fn jet(&self, x: f64, y: f64) -> Option<Result<MapJet>> {
        let (a, b) = (self.a, self.b);
        Some(self.trace(self.frame().t(x, y)).map(|tr| MapJet {
            r: tr.r,
            s: a * x + b * y + tr.h,
            r_x: -b * tr.rp,
            r_y: a * tr.rp,
            s_x: a - b * tr.hp,
            s_y: b + a * tr.hp,
            r_xx: b * b * tr.rpp,
            r_yy: a * a * tr.rpp,
            s_xx: b * b * tr.hpp,
            s_yy: a * a * tr.hpp,
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ambient {
    /// `dX^2 + dY^2 + dZ^2`
    Euclidean,
    /// `dX^2 + dY^2 - dZ^2`
    Minkowski,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingR3 {
    pub ambient: Ambient,
    pub point: [f64; 3],
}

impl EmbeddingR3 {
    /// `X^2/c^2 + Y^2 +- Z^2 - 1`.
    pub fn quadric_residual(&self, c: f64) -> f64 {
        let [x, y, z] = self.point;
        let zz = match self.ambient {
            Ambient::Euclidean => z * z,
            Ambient::Minkowski => -z * z,
        };
        x * x / (c * c) + y * y + zz - 1.0
    }
}

fn embed_check(family: Family, c: f64, r: f64) -> Result<()> {
    check_c(c)?;
    if !r.is_finite() {
        return Err(Error::invalid("R", r, "a finite value"));
    }
    match family {
        Family::Ellipsoid if !(0.0..=PI).contains(&r) => Err(Error::OutsideDomain {
            quantity: "R",
            value: r,
            lo: 0.0,
            hi: PI,
        }),
        Family::Hyperboloid if r.sin() == 0.0 => Err(Error::CoordinateSingularity {
            metric: "elliptic_hyperboloid".into(),
            r,
            b: 0.0,
        }),
        Family::Mixed => Err(Error::Invalid("the mixed family has no quadric embedding".into())),
        _ => Ok(()),
    }
}

/// `(c cos R, sin R cos S, sin R sin S)` on the ellipsoid,
/// `(c cos R, sin R cosh S, sin R sinh S)` on the hyperboloid.
pub fn embed(family: Family, c: f64, r: f64, s: f64) -> Result<EmbeddingR3> {
    embed_check(family, c, r)?;
    let (sr, cr) = r.sin_cos();
    Ok(match family {
        Family::Ellipsoid => EmbeddingR3 {
            ambient: Ambient::Euclidean,
            point: [c * cr, sr * s.cos(), sr * s.sin()],
        },
        _ => EmbeddingR3 {
            ambient: Ambient::Minkowski,
            point: [c * cr, sr * s.cosh(), sr * s.sinh()],
        },
    })
}

/// Max-abs difference between the pulled-back ambient metric and
/// `diag(A(R), -del2 B(R))`.
pub fn induced_metric_check(family: Family, c: f64, r: f64, s: f64) -> Result<f64> {
    embed_check(family, c, r)?;
    if r.sin() == 0.0 {
        return Err(Error::CoordinateSingularity {
            metric: family.label().into(),
            r,
            b: 0.0,
        });
    }
    let (sr, cr) = r.sin_cos();
    let (d_r, d_s, minus_d2) = match family {
        Family::Ellipsoid => (
            [-c * sr, cr * s.cos(), cr * s.sin()],
            [0.0, -sr * s.sin(), sr * s.cos()],
            1.0,
        ),
        _ => (
            [-c * sr, cr * s.cosh(), cr * s.sinh()],
            [0.0, sr * s.sinh(), sr * s.cosh()],
            -1.0,
        ),
    };
    let z_sign = if family == Family::Ellipsoid { 1.0 } else { -1.0 };
    let dot = |u: [f64; 3], v: [f64; 3]| u[0] * v[0] + u[1] * v[1] + z_sign * u[2] * v[2];
    let big_a = c * c * sr * sr + cr * cr;
    let big_b = sr * sr;
    let diffs = [dot(d_r, d_r) - big_a, dot(d_r, d_s), dot(d_s, d_s) - minus_d2 * big_b];
    Ok(diffs.iter().fold(0.0, |m, d| m.max(d.abs())))
}
