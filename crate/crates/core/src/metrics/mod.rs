//! Domain and target metrics.
//!
//! The domain carries `g = e^f (dx^2 - eps2 dy^2)` and the target the warped
//! product `h = A(R) dR^2 - del2 B(R) dS^2`. Only the real squares `eps2` and
//! `del2` of the signature switches are represented.

mod catalog;
mod curvature;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use catalog::{catalog_entries, catalog_lookup, CatalogEntry, CatalogTable, Params};
pub use curvature::{curvature_classify, gauss_curvature, CurvatureClass, CONSTANCY_TOL};

/// A real sign, either -1 or +1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            Sign::Plus => 1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Minus => -1,
            Sign::Plus => 1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }
}

impl TryFrom<i64> for Sign {
    type Error = Error;

    fn try_from(v: i64) -> Result<Sign> {
        match v {
            -1 => Ok(Sign::Minus),
            1 => Ok(Sign::Plus),
            other => Err(Error::InvalidSign(other)),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

/// The two regime switches. `eps2 = -1` is a Riemannian domain, `+1` a
/// Lorentzian one; `del2` plays the same role for the target fiber.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignaturePair {
    pub eps2: Sign,
    pub del2: Sign,
}

impl SignaturePair {
    pub fn new(eps2: Sign, del2: Sign) -> Self {
        Self { eps2, del2 }
    }

    pub fn riemannian() -> Self {
        Self::new(Sign::Minus, Sign::Minus)
    }

    pub fn lorentzian() -> Self {
        Self::new(Sign::Plus, Sign::Plus)
    }

    pub fn e(&self) -> f64 {
        self.eps2.value()
    }

    pub fn d(&self) -> f64 {
        self.del2.value()
    }
}

/// Open real interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo < hi, "empty interval ({lo}, {hi})");
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn contains_closed(&self, lo: f64, hi: f64) -> bool {
        self.contains(lo) && self.contains(hi)
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.max(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A positive radial profile `P(R)` with its first two derivatives.
#[derive(Clone)]
pub struct RadialProfile {
    value: ScalarFn,
    deriv: ScalarFn,
    second: ScalarFn,
    domain: Interval,
}

impl RadialProfile {
    pub fn new<V, D, D2>(domain: Interval, value: V, deriv: D, second: D2) -> Self
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            value: Arc::new(value),
            deriv: Arc::new(deriv),
            second: Arc::new(second),
            domain,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(Interval::REAL_LINE, move |_| c, |_| 0.0, |_| 0.0)
    }

    #[inline]
    pub fn value_at(&self, r: f64) -> f64 {
        (self.value)(r)
    }

    #[inline]
    pub fn deriv_at(&self, r: f64) -> f64 {
        (self.deriv)(r)
    }

    #[inline]
    pub fn second_deriv_at(&self, r: f64) -> f64 {
        (self.second)(r)
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

/// Values of `A`, `B` and their first derivatives at one radius.
#[derive(Debug, Clone, Copy)]
pub struct ProfileValues {
    pub a: f64,
    pub da: f64,
    pub b: f64,
    pub db: f64,
}

/// Warped-product target `h = A(R) dR^2 - del2 B(R) dS^2`.
#[derive(Debug, Clone)]
pub struct TargetMetric {
    name: String,
    a: RadialProfile,
    b: RadialProfile,
    del2: Sign,
    r_domain: Interval,
    singular_points: Vec<f64>,
}

impl TargetMetric {
    /// Builds a metric; `r_domain` is clipped to the profiles' common domain.
    pub fn new(
        name: impl Into<String>,
        a: RadialProfile,
        b: RadialProfile,
        del2: Sign,
        r_domain: Interval,
        singular_points: Vec<f64>,
    ) -> Result<Self> {
        let r_domain = r_domain.intersect(&a.domain()).intersect(&b.domain());
        if !(r_domain.lo < r_domain.hi) {
            return Err(Error::Invalid(
                "target metric domain is empty after intersecting profile domains".into(),
            ));
        }
        Ok(Self {
            name: name.into(),
            a,
            b,
            del2,
            r_domain,
            singular_points,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn a(&self) -> &RadialProfile {
        &self.a
    }

    pub fn b(&self) -> &RadialProfile {
        &self.b
    }

    pub fn del2(&self) -> Sign {
        self.del2
    }

    pub fn r_domain(&self) -> Interval {
        self.r_domain
    }

    pub fn singular_points(&self) -> &[f64] {
        &self.singular_points
    }

    pub fn check_inside(&self, r: f64) -> Result<()> {
        if !r.is_finite() {
            return Err(Error::NonFinite { quantity: "R", at: r });
        }
        if !self.r_domain.contains(r) {
            return Err(Error::OutsideDomain {
                quantity: "R",
                value: r,
                lo: self.r_domain.lo,
                hi: self.r_domain.hi,
            });
        }
        Ok(())
    }

    /// Profiles at `r`, failing outside the domain or where `B(r) <= 0`.
    pub fn profiles(&self, r: f64) -> Result<ProfileValues> {
        self.check_inside(r)?;
        let b = self.b.value_at(r);
        if !(b > 0.0) {
            return Err(Error::CoordinateSingularity {
                metric: self.name.clone(),
                r,
                b,
            });
        }
        Ok(ProfileValues {
            a: self.a.value_at(r),
            da: self.a.deriv_at(r),
            b,
            db: self.b.deriv_at(r),
        })
    }

    /// Profiles at `r` without the `B > 0` requirement. Used by residual
    /// evaluation, where `B = 0` only zeroes terms and never divides.
    pub fn profiles_unchecked_b(&self, r: f64) -> Result<ProfileValues> {
        self.check_inside(r)?;
        Ok(ProfileValues {
            a: self.a.value_at(r),
            da: self.a.deriv_at(r),
            b: self.b.value_at(r),
            db: self.b.deriv_at(r),
        })
    }

    /// Distance from `r` to the nearest listed coordinate singularity.
    pub fn distance_to_singularity(&self, r: f64) -> f64 {
        self.singular_points
            .iter()
            .map(|s| (r - s).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Domain metric `g = e^{f(x,y)} (dx^2 - eps2 dy^2)`.
#[derive(Clone)]
pub struct DomainMetric {
    pub eps2: Sign,
    conformal_factor: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl DomainMetric {
    /// Flat domain metric (`f = 0`).
    pub fn flat(eps2: Sign) -> Self {
        Self {
            eps2,
            conformal_factor: Arc::new(|_, _| 0.0),
        }
    }

    pub fn with_conformal_factor<F>(eps2: Sign, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            eps2,
            conformal_factor: Arc::new(f),
        }
    }

    pub fn conformal_factor(&self, x: f64, y: f64) -> Result<f64> {
        let f = (self.conformal_factor)(x, y);
        if f.is_finite() {
            Ok(f)
        } else {
            Err(Error::NonFinite {
                quantity: "conformal factor",
                at: x,
            })
        }
    }
}

impl fmt::Debug for DomainMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DomainMetric")
            .field("eps2", &self.eps2)
            .finish_non_exhaustive()
    }
}
