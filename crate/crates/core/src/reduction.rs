//! Traveling-frame reduction of the harmonic map system.
//!
//! Under `R = R(t)`, `S = a x + b y + H(t)` with `t = a y - b x` and constant
//! first integrals `(kappa, lambda)`, the system collapses to
//!
//! ```text
//! R'(t)^2 = Phi(R) = (c1 B^2 + c2 kappa B + c3 lambda B + c4) / (D A B)
//! H'(t)   = [2 lambda del2 (b^2 + eps2 a^2) + 4 kappa del2 a b
//!            + a b (a^2 + b^2)(eps2 + 1) B] / [(b^2 - eps2 a^2)(a^2 + b^2) B]
//! ```
//!
//! with `D = (a^2 + b^2)^2 (b^2 - eps2 a^2)^2`.

use crate::error::{Error, Result};
use crate::metrics::{Interval, SignaturePair, TargetMetric};

/// Constants of the reduction. Construction rejects the degenerate frame
/// `b^2 = eps2 a^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionParams {
    a: f64,
    b: f64,
    kappa: f64,
    lambda: f64,
    sig: SignaturePair,
}

impl ReductionParams {
    pub fn new(a: f64, b: f64, kappa: f64, lambda: f64, sig: SignaturePair) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("kappa", kappa), ("lambda", lambda)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, v, "a finite value"));
            }
        }
        let norm = a * a + b * b;
        if norm == 0.0 {
            return Err(Error::Invalid(
                "(a, b) = (0, 0): the frame t = a y - b x is empty".into(),
            ));
        }
        check_frame(a, b, sig)?;
        Ok(Self {
            a,
            b,
            kappa,
            lambda,
            sig,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn sig(&self) -> SignaturePair {
        self.sig
    }

    pub fn frame(&self) -> TravelingFrame {
        TravelingFrame { a: self.a, b: self.b }
    }

    /// Same frame and signature with different first integrals.
    pub fn with_constants(&self, kappa: f64, lambda: f64) -> Self {
        Self { kappa, lambda, ..*self }
    }
}

fn check_frame(a: f64, b: f64, sig: SignaturePair) -> Result<()> {
    let gap = b * b - sig.e() * a * a;
    if gap.abs() <= 1e-14 * (a * a + b * b) {
        return Err(Error::DegenerateFrame {
            a,
            b,
            eps2: sig.eps2.as_i8(),
        });
    }
    Ok(())
}

/// `t(x, y) = a y - b x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TravelingFrame {
    pub a: f64,
    pub b: f64,
}

impl TravelingFrame {
    #[inline]
    pub fn t(&self, x: f64, y: f64) -> f64 {
        self.a * y - self.b * x
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// `(a^2 + b^2)^2 (b^2 - eps2 a^2)^2`
    pub denom_const: f64,
}

pub fn coefficients(p: &ReductionParams) -> ReducedCoefficients {
    let (a, b) = (p.a, p.b);
    let (e, d) = (p.sig.e(), p.sig.d());
    let s = a * a + b * b;
    let s2 = s * s;
    let plus = b * b + e * a * a;
    let minus = b * b - e * a * a;
    let inner = 2.0 * p.kappa * a * b + p.lambda * plus;
    ReducedCoefficients {
        c1: d * e * s2 * s2,
        c2: 4.0 * s2 * plus,
        c3: 8.0 * e * a * b * s2,
        c4: 4.0 * d * inner * inner,
        denom_const: s2 * minus * minus,
    }
}

/// A metric bound to reduction parameters, with the coefficients cached.
#[derive(Debug, Clone)]
pub struct ReducedSystem<'m> {
    metric: &'m TargetMetric,
    params: ReductionParams,
    coeffs: ReducedCoefficients,
}

impl<'m> ReducedSystem<'m> {
    pub fn new(metric: &'m TargetMetric, params: ReductionParams) -> Self {
        Self {
            metric,
            params,
            coeffs: coefficients(&params),
        }
    }

    pub fn metric(&self) -> &'m TargetMetric {
        self.metric
    }

    pub fn params(&self) -> &ReductionParams {
        &self.params
    }

    pub fn coefficients(&self) -> &ReducedCoefficients {
        &self.coeffs
    }

    /// Numerator of `Phi` as a quadratic in `B`, and its `B`-derivative.
    #[inline]
    fn numerator(&self, b: f64) -> (f64, f64) {
        let c = &self.coeffs;
        let lin = c.c2 * self.params.kappa + c.c3 * self.params.lambda;
        (c.c1 * b * b + lin * b + c.c4, 2.0 * c.c1 * b + lin)
    }

    /// `Phi(R)`, the required value of `R'(t)^2`.
    pub fn phi(&self, r: f64) -> Result<f64> {
        let p = self.metric.profiles(r)?;
        let (num, _) = self.numerator(p.b);
        Ok(num / (self.coeffs.denom_const * p.a * p.b))
    }

    /// `dPhi/dR` by the quotient rule.
    pub fn phi_prime(&self, r: f64) -> Result<f64> {
        let p = self.metric.profiles(r)?;
        let (num, dnum_db) = self.numerator(p.b);
        let den = p.a * p.b;
        let dden = p.da * p.b + p.a * p.db;
        Ok((dnum_db * p.db * den - num * dden) / (self.coeffs.denom_const * den * den))
    }

    fn h_parts(&self) -> (f64, f64, f64) {
        let ReductionParams {
            a,
            b,
            kappa,
            lambda,
            sig,
        } = self.params;
        let (e, d) = (sig.e(), sig.d());
        let s = a * a + b * b;
        let alpha = 2.0 * lambda * d * (b * b + e * a * a) + 4.0 * kappa * d * a * b;
        let beta = a * b * s * (e + 1.0);
        let gamma = (b * b - e * a * a) * s;
        (alpha, beta, gamma)
    }

    /// `H'(t)` as a function of `R(t)`.
    pub fn h_prime(&self, r: f64) -> Result<f64> {
        let p = self.metric.profiles(r)?;
        let (alpha, beta, gamma) = self.h_parts();
        Ok((alpha + beta * p.b) / (gamma * p.b))
    }

    /// `d/dR` of [`Self::h_prime`]; `H''(t) = h_prime_dr(R) * R'(t)`.
    pub fn h_prime_dr(&self, r: f64) -> Result<f64> {
        let p = self.metric.profiles(r)?;
        let (alpha, _, gamma) = self.h_parts();
        Ok(-alpha * p.db / (gamma * p.b * p.b))
    }

    /// Maximal sub-intervals of `scan` on which `Phi >= 0`.
    pub fn admissible_intervals(&self, scan: Interval, n: usize) -> Result<Vec<AdmissibleInterval>> {
        admissible(self, scan, n)
    }
}

pub fn phi(metric: &TargetMetric, params: &ReductionParams, r: f64) -> Result<f64> {
    ReducedSystem::new(metric, *params).phi(r)
}

pub fn phi_prime(metric: &TargetMetric, params: &ReductionParams, r: f64) -> Result<f64> {
    ReducedSystem::new(metric, *params).phi_prime(r)
}

pub fn h_prime(metric: &TargetMetric, params: &ReductionParams, r: f64) -> Result<f64> {
    ReducedSystem::new(metric, *params).h_prime(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointKind {
    /// `Phi` crosses zero with `Phi' != 0`: an oscillatory turning point.
    SimpleRoot,
    /// `Phi = Phi' = 0`: approached only asymptotically.
    DoubleRoot,
    /// The end of the scanned interval.
    DomainEdge,
}

impl EndpointKind {
    pub fn label(self) -> &'static str {
        match self {
            EndpointKind::SimpleRoot => "simple_root",
            EndpointKind::DoubleRoot => "double_root",
            EndpointKind::DomainEdge => "domain_edge",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibleInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_kind: EndpointKind,
    pub hi_kind: EndpointKind,
}

/// Bisection width for turning-point localization.
pub const ROOT_TOL: f64 = 1e-12;
/// `|Phi'| <= DOUBLE_ROOT_TOL (1 + |Phi''|)` marks a double root.
pub const DOUBLE_ROOT_TOL: f64 = 1e-10;

pub fn admissible_intervals(
    metric: &TargetMetric,
    params: &ReductionParams,
    scan: Interval,
    n: usize,
) -> Result<Vec<AdmissibleInterval>> {
    admissible(&ReducedSystem::new(metric, *params), scan, n)
}

fn admissible(sys: &ReducedSystem<'_>, scan: Interval, n: usize) -> Result<Vec<AdmissibleInterval>> {
    if n < 16 {
        return Err(Error::Invalid(format!("admissible_intervals needs n >= 16, got {n}")));
    }
    let dom = sys.metric.r_domain();
    if !(scan.lo < scan.hi) || !dom.contains_closed(scan.lo, scan.hi) {
        return Err(Error::Invalid(format!(
            "scan [{}, {}] must lie inside the metric domain ({}, {})",
            scan.lo, scan.hi, dom.lo, dom.hi
        )));
    }
    let rs: Vec<f64> = (0..n)
        .map(|i| scan.lo + (scan.hi - scan.lo) * i as f64 / (n - 1) as f64)
        .collect();
    let ok = rs
        .iter()
        .map(|&r| sys.phi(r).map(|v| v >= 0.0))
        .collect::<Result<Vec<bool>>>()?;

    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if !ok[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < n && ok[i + 1] {
            i += 1;
        }
        let end = i;
        let (lo, lo_kind) = if start == 0 {
            (scan.lo, EndpointKind::DomainEdge)
        } else {
            let r = bisect_boundary(sys, rs[start - 1], rs[start])?;
            (r, classify_root(sys, r)?)
        };
        let (hi, hi_kind) = if end == n - 1 {
            (scan.hi, EndpointKind::DomainEdge)
        } else {
            let r = bisect_boundary(sys, rs[end + 1], rs[end])?;
            (r, classify_root(sys, r)?)
        };
        out.push(AdmissibleInterval {
            lo,
            hi,
            lo_kind,
            hi_kind,
        });
        i += 1;
    }
    Ok(out)
}

/// Bisects between `bad` (Phi < 0) and `good` (Phi >= 0); returns the
/// point on the admissible side.
fn bisect_boundary(sys: &ReducedSystem<'_>, mut bad: f64, mut good: f64) -> Result<f64> {
    while (good - bad).abs() > ROOT_TOL {
        let mid = 0.5 * (good + bad);
        if mid == good || mid == bad {
            break;
        }
        if sys.phi(mid)? >= 0.0 {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(good)
}

fn classify_root(sys: &ReducedSystem<'_>, r: f64) -> Result<EndpointKind> {
    let d1 = sys.phi_prime(r)?;
    let h = 1e-6;
    let d2 = match (sys.phi_prime(r + h), sys.phi_prime(r - h)) {
        (Ok(p), Ok(m)) => (p - m) / (2.0 * h),
        _ => 0.0,
    };
    if d1.abs() <= DOUBLE_ROOT_TOL * (1.0 + d2.abs()) {
        Ok(EndpointKind::DoubleRoot)
    } else {
        Ok(EndpointKind::SimpleRoot)
    }
}

/// Recovers `(kappa, lambda)` from one point of a traveling-frame map:
/// `R(t0) = r0`, `R'(t0) = rp0`, `H'(t0) = hp0`.
///
/// The two first-integral relations are each linear in one constant, so the
/// solve is two divisions.
pub fn recover_first_integrals(
    metric: &TargetMetric,
    sig: SignaturePair,
    a: f64,
    b: f64,
    r0: f64,
    rp0: f64,
    hp0: f64,
) -> Result<(f64, f64)> {
    check_frame(a, b, sig)?;
    let p = metric.profiles(r0)?;
    let (e, d) = (sig.e(), sig.d());
    let k = p.a * rp0 * rp0 - d * p.b * hp0 * hp0;
    let kappa = ((a * a + e * b * b) * k - d * p.b * (b * b + e * a * a + 2.0 * (1.0 - e) * a * b * hp0)) / (4.0 * e);
    let lambda = (d * p.b * ((b * b - a * a) * hp0 - a * b) - a * b * k) / 2.0;
    Ok((kappa, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{catalog_lookup, Params, Sign};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

    fn ellipsoid() -> TargetMetric {
        let p: Params = [("c".to_string(), SQRT_2)].into_iter().collect();
        catalog_lookup("ellipsoid", &p).unwrap()
    }

    fn flagship() -> ReductionParams {
        ReductionParams::new(0.0, 1.0, 0.125, -SQRT_2 / 4.0, SignaturePair::riemannian()).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn coefficient_examples() {
        let c = coefficients(&flagship());
        assert!(close(c.c1, 1.0, 1e-15) && close(c.c2, 4.0, 1e-15));
        assert!(close(c.c3, 0.0, 1e-15) && close(c.c4, -0.5, 1e-15));

        let p = ReductionParams::new(1.0, 1.0, 0.0, 0.0, SignaturePair::riemannian()).unwrap();
        let c = coefficients(&p);
        assert_eq!((c.c1, c.c2, c.c3, c.c4), (16.0, 0.0, -32.0, 0.0));

        let p = ReductionParams::new(0.0, 1.0, 1.0, 0.0, SignaturePair::lorentzian()).unwrap();
        let c = coefficients(&p);
        assert_eq!((c.c1, c.c2, c.c3, c.c4), (1.0, 4.0, 0.0, 0.0));
        assert!(c.denom_const > 0.0);
    }

    #[test]
    fn degenerate_frame_rejected() {
        let err = ReductionParams::new(1.0, 1.0, 0.0, 0.0, SignaturePair::lorentzian()).unwrap_err();
        assert!(matches!(err, Error::DegenerateFrame { .. }));
        assert!(ReductionParams::new(2.0, -2.0, 0.0, 0.0, SignaturePair::lorentzian()).is_err());
        assert!(ReductionParams::new(0.0, 0.0, 0.0, 0.0, SignaturePair::riemannian()).is_err());
        // b^2 = -a^2 has no real solution besides the origin
        assert!(ReductionParams::new(1.0, 1.0, 0.0, 0.0, SignaturePair::riemannian()).is_ok());
    }

    #[test]
    fn phi_examples() {
        let m = ellipsoid();
        let sys = ReducedSystem::new(&m, flagship());
        assert!(close(sys.phi(FRAC_PI_2).unwrap(), 0.5, 1e-15));
        assert!(close(sys.phi(FRAC_PI_4).unwrap(), 0.0, 1e-15));

        let fp = catalog_lookup("flat_polar", &Params::new()).unwrap();
        let p = ReductionParams::new(0.0, 1.0, 0.0, 0.0, SignaturePair::riemannian()).unwrap();
        for r in [0.3, 1.0, 2.0, 7.5] {
            assert!(close(phi(&fp, &p, r).unwrap(), r * r, 1e-12));
        }
        assert!(close(phi_prime(&fp, &p, 2.0).unwrap(), 4.0, 1e-12));
        assert!(matches!(phi(&fp, &p, -1.0), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn phi_matches_closed_form_derivative() {
        // R(t) = arccos(cos(pi/4) sin t): R'^2 = (B - 1/2)/B
        let m = ellipsoid();
        let sys = ReducedSystem::new(&m, flagship());
        for t in [0.1, 0.7, 1.3, 2.4] {
            let q = FRAC_PI_4.cos() * f64::sin(t);
            let r = q.acos();
            let rp = -FRAC_PI_4.cos() * f64::cos(t) / (1.0 - q * q).sqrt();
            assert!(close(sys.phi(r).unwrap(), rp * rp, 1e-14));
        }
    }

    #[test]
    fn phi_prime_matches_finite_differences() {
        let h = 1e-5;
        let m = ellipsoid();
        let sys = ReducedSystem::new(&m, flagship());
        let fd = (sys.phi(FRAC_PI_2 + h).unwrap() - sys.phi(FRAC_PI_2 - h).unwrap()) / (2.0 * h);
        assert!(close(sys.phi_prime(FRAC_PI_2).unwrap(), fd, 1e-8));

        let sphere = catalog_lookup("sphere", &[("a".to_string(), 1.0)].into_iter().collect()).unwrap();
        let p = ReductionParams::new(0.0, 1.0, 0.25, 0.0, SignaturePair::riemannian()).unwrap();
        let sys = ReducedSystem::new(&sphere, p);
        let r = FRAC_PI_4;
        let fd = (sys.phi(r + h).unwrap() - sys.phi(r - h).unwrap()) / (2.0 * h);
        assert!(close(sys.phi_prime(r).unwrap(), fd, 1e-8));
    }

    #[test]
    fn h_prime_examples() {
        let m = ellipsoid();
        assert!(close(h_prime(&m, &flagship(), FRAC_PI_2).unwrap(), SQRT_2 / 2.0, 1e-15));

        for sig in [SignaturePair::riemannian(), SignaturePair::lorentzian()] {
            let p = ReductionParams::new(0.0, 1.0, 3.7, 0.0, sig).unwrap();
            assert_eq!(h_prime(&m, &p, 1.1).unwrap(), 0.0);
        }

        // B(pi/2) = 1 on the ellipsoid
        let p = ReductionParams::new(1.0, 2.0, 1.0, 0.0, SignaturePair::lorentzian()).unwrap();
        assert!(close(h_prime(&m, &p, FRAC_PI_2).unwrap(), 28.0 / 15.0, 1e-14));
    }

    #[test]
    fn h_prime_dr_matches_finite_differences() {
        let m = ellipsoid();
        let p = ReductionParams::new(0.4, 1.3, 0.2, -0.3, SignaturePair::riemannian()).unwrap();
        let sys = ReducedSystem::new(&m, p);
        let (r, h) = (1.2, 1e-5);
        let fd = (sys.h_prime(r + h).unwrap() - sys.h_prime(r - h).unwrap()) / (2.0 * h);
        assert!(close(sys.h_prime_dr(r).unwrap(), fd, 1e-8));
    }

    #[test]
    fn admissible_ellipsoid_band() {
        let m = ellipsoid();
        let iv = admissible_intervals(&m, &flagship(), Interval::new(0.3, PI - 0.3), 64).unwrap();
        assert_eq!(iv.len(), 1);
        let iv = iv[0];
        assert!(close(iv.lo, FRAC_PI_4, 1e-11), "{}", iv.lo);
        assert!(close(iv.hi, 3.0 * FRAC_PI_4, 1e-11), "{}", iv.hi);
        assert_eq!(iv.lo_kind, EndpointKind::SimpleRoot);
        assert_eq!(iv.hi_kind, EndpointKind::SimpleRoot);
    }

    #[test]
    fn admissible_whole_scan_and_empty() {
        let fp = catalog_lookup("flat_polar", &Params::new()).unwrap();
        let p = ReductionParams::new(0.0, 1.0, 0.0, 0.0, SignaturePair::riemannian()).unwrap();
        let iv = admissible_intervals(&fp, &p, Interval::new(0.5, 5.0), 32).unwrap();
        assert_eq!(
            iv,
            vec![AdmissibleInterval {
                lo: 0.5,
                hi: 5.0,
                lo_kind: EndpointKind::DomainEdge,
                hi_kind: EndpointKind::DomainEdge
            }]
        );

        // c1 = del2 eps2 (a^2+b^2)^4 < 0 with kappa = lambda = 0
        let sig = SignaturePair::new(Sign::Plus, Sign::Minus);
        let p = ReductionParams::new(0.0, 1.0, 0.0, 0.0, sig).unwrap();
        let iv = admissible_intervals(&ellipsoid(), &p, Interval::new(0.3, 2.8), 32).unwrap();
        assert!(iv.is_empty());
    }

    #[test]
    fn admissible_detects_double_root() {
        // Lorentzian, a = 0, b = 1: numerator B^2 + 4 kappa B + 4 lambda^2 = (B - 1)^2
        // on the Rindler wedge (B = R^2), so Phi = (R^2 - 1)^2 / R^2.
        let m = catalog_lookup("rindler", &Params::new()).unwrap();
        let p = ReductionParams::new(0.0, 1.0, -0.5, 0.5, SignaturePair::lorentzian()).unwrap();
        let sys = ReducedSystem::new(&m, p);
        assert!(sys.phi(1.0).unwrap().abs() < 1e-15);
        assert_eq!(classify_root(&sys, 1.0).unwrap(), EndpointKind::DoubleRoot);
        let iv = sys.admissible_intervals(Interval::new(0.5, 2.0), 33).unwrap();
        assert_eq!(iv.len(), 1, "{iv:?}");

        let m = ellipsoid();
        let sys = ReducedSystem::new(&m, flagship());
        assert_eq!(classify_root(&sys, FRAC_PI_4).unwrap(), EndpointKind::SimpleRoot);
    }

    #[test]
    fn recover_examples() {
        let m = ellipsoid();
        let sig = SignaturePair::riemannian();
        // t = 0 of the closed form: R = pi/2, R'^2 = 1/2, H' = sqrt2/2
        let (k, l) = recover_first_integrals(&m, sig, 0.0, 1.0, FRAC_PI_2, -SQRT_2 / 2.0, SQRT_2 / 2.0).unwrap();
        assert!(close(k, 0.125, 1e-15) && close(l, -SQRT_2 / 4.0, 1e-15));
        // t = pi/2: R = pi/4, R' = 0, H' = sin(theta)/B = sqrt2
        let (k, l) = recover_first_integrals(&m, sig, 0.0, 1.0, FRAC_PI_4, 0.0, SQRT_2).unwrap();
        assert!(close(k, 0.125, 1e-14) && close(l, -SQRT_2 / 4.0, 1e-14));

        let flat = catalog_lookup("flat_cartesian", &Params::new()).unwrap();
        let (k, l) = recover_first_integrals(&flat, sig, 0.0, 1.0, 0.3, 0.0, 0.0).unwrap();
        assert!(close(k, -0.25, 1e-15) && l == 0.0);

        assert!(recover_first_integrals(&m, SignaturePair::lorentzian(), 1.0, 1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn sign_symmetries_of_coefficients() {
        let sig = SignaturePair::new(Sign::Plus, Sign::Minus);
        let p = ReductionParams::new(0.7, 1.9, 0.3, -1.1, sig).unwrap();
        let c = coefficients(&p);
        let neg = coefficients(&ReductionParams::new(-0.7, -1.9, 0.3, -1.1, sig).unwrap());
        assert_eq!(c, neg);
        let flip = coefficients(&ReductionParams::new(0.7, -1.9, 0.3, -1.1, sig).unwrap());
        assert_eq!((flip.c1, flip.c2), (c.c1, c.c2));
        assert_eq!(flip.c3, -c.c3);
        let (a, b, e, d) = (0.7f64, 1.9f64, 1.0, -1.0);
        let inner = -2.0 * 0.3 * a * b + (-1.1) * (b * b + e * a * a);
        assert!(close(flip.c4, 4.0 * d * inner * inner, 1e-12));
    }

    fn sig_strategy() -> impl Strategy<Value = SignaturePair> {
        (any::<bool>(), any::<bool>()).prop_map(|(e, d)| {
            SignaturePair::new(
                if e { Sign::Plus } else { Sign::Minus },
                if d { Sign::Plus } else { Sign::Minus },
            )
        })
    }

    proptest! {
        #[test]
        fn round_trip_recovers_constants(
            sig in sig_strategy(),
            a in -2.0f64..2.0,
            b in -2.0f64..2.0,
            kappa in -1.0f64..1.0,
            lambda in -1.0f64..1.0,
            r in 0.2f64..2.9,
        ) {
            let m = ellipsoid();
            prop_assume!((b * b - sig.e() * a * a).abs() > 0.05);
            let p = ReductionParams::new(a, b, kappa, lambda, sig).unwrap();
            let sys = ReducedSystem::new(&m, p);
            let phi = sys.phi(r).unwrap();
            prop_assume!(phi >= 0.0);
            let (k, l) = recover_first_integrals(&m, sig, a, b, r, -phi.sqrt(), sys.h_prime(r).unwrap()).unwrap();
            let tol = 1e-10 * (1.0 + kappa.abs() + lambda.abs());
            prop_assert!((k - kappa).abs() <= tol, "kappa {} vs {}", k, kappa);
            prop_assert!((l - lambda).abs() <= tol, "lambda {} vs {}", l, lambda);
        }

        #[test]
        fn phi_prime_is_second_order_consistent(
            kappa in -1.0f64..1.0,
            lambda in -1.0f64..1.0,
            r in 0.3f64..2.8,
        ) {
            let m = ellipsoid();
            let p = ReductionParams::new(0.3, 1.0, kappa, lambda, SignaturePair::riemannian()).unwrap();
            let sys = ReducedSystem::new(&m, p);
            let fd = |h: f64| (sys.phi(r + h).unwrap() - sys.phi(r - h).unwrap()) / (2.0 * h);
            let exact = sys.phi_prime(r).unwrap();
            let (e1, e2) = ((fd(1e-3) - exact).abs(), (fd(5e-4) - exact).abs());
            prop_assert!(e1 < 1e-10 || (e1 / e2 > 3.5 && e1 / e2 < 4.5), "{} {}", e1, e2);
        }
    }
}
