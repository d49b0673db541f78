//! Gaussian curvature of `E dR^2 + G dS^2` with `E = A`, `G = -del2 B`.
//!
//! `K = -G''/(2EG) + E'G'/(4E^2 G) + G'^2/(4 E G^2)`, which is
//! `R_{RSRS} / (g_RR g_SS)`. The expression is even in `G`, so a Lorentzian
//! fiber has the same `K` as its Riemannian counterpart (2D de Sitter gives
//! `K = -1` under this convention).

use super::TargetMetric;
use crate::error::{Error, Result};

/// Relative spread below which sampled curvature counts as constant.
pub const CONSTANCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurvatureClass {
    Constant(f64),
    Variable { min: f64, max: f64 },
}

impl CurvatureClass {
    pub fn is_constant(&self) -> bool {
        matches!(self, CurvatureClass::Constant(_))
    }
}

pub fn gauss_curvature(metric: &TargetMetric, r: f64) -> Result<f64> {
    metric.check_inside(r)?;
    if metric.distance_to_singularity(r) == 0.0 {
        return Err(Error::CoordinateSingularity {
            metric: metric.name().to_string(),
            r,
            b: metric.b().value_at(r),
        });
    }
    let sign = -metric.del2().value();
    let e = metric.a().value_at(r);
    let de = metric.a().deriv_at(r);
    let g = sign * metric.b().value_at(r);
    let dg = sign * metric.b().deriv_at(r);
    let ddg = sign * metric.b().second_deriv_at(r);
    if g == 0.0 {
        return Err(Error::CoordinateSingularity {
            metric: metric.name().to_string(),
            r,
            b: 0.0,
        });
    }
    let k = -ddg / (2.0 * e * g) + de * dg / (4.0 * e * e * g) + dg * dg / (4.0 * e * g * g);
    if k.is_finite() {
        Ok(k)
    } else {
        Err(Error::NonFinite {
            quantity: "Gaussian curvature",
            at: r,
        })
    }
}

pub fn curvature_classify(metric: &TargetMetric, samples: &[f64]) -> Result<CurvatureClass> {
    if samples.len() < 8 {
        return Err(Error::Invalid(format!(
            "curvature classification needs at least 8 samples, got {}",
            samples.len()
        )));
    }
    let ks = samples
        .iter()
        .map(|&r| gauss_curvature(metric, r))
        .collect::<Result<Vec<_>>>()?;
    let min = ks.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = ks.iter().sum::<f64>() / ks.len() as f64;
    if max - min < CONSTANCY_TOL * (1.0 + mean.abs()) {
        Ok(CurvatureClass::Constant(mean))
    } else {
        Ok(CurvatureClass::Variable { min, max })
    }
}
