//! Independent checks on maps: Euler-Lagrange residuals in real coordinates,
//! first-integral residuals along reduced solutions, the energy density, and
//! a wave-map evolver for Lorentzian domains.
//!
//! With `h = A dR^2 - del2 B dS^2` and domain `e^f (dx^2 - eps2 dy^2)`:
//!
//! ```text
//! E1 = 2A (R_xx - eps2 R_yy) + A' (R_x^2 - eps2 R_y^2) + del2 B' (S_x^2 - eps2 S_y^2)
//! E2 = 2B (S_xx - eps2 S_yy) + 2B' (R_x S_x - eps2 R_y S_y)
//! ```
//!
//! The conformal factor does not appear.

mod wave;

pub use wave::{wave_evolve, BoundaryCondition, WaveEvolveConfig, WaveResult};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{centered, stencil_jet, FdOrder, MapField, MapJet, RectGrid};
use crate::integrator::{quadrature_h, MapSample, OdeSolution};
use crate::metrics::{DomainMetric, SignaturePair, TargetMetric};
use crate::reduction::ReductionParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeSource {
    /// Analytic jets when the map has them, stencils otherwise.
    Auto,
    Stencil,
}

/// Evaluation lattice plus the finite-difference settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub grid: RectGrid,
    pub fd_h: f64,
    pub fd_order: FdOrder,
    pub derivs: DerivativeSource,
}

impl GridSpec {
    pub fn new(grid: RectGrid, fd_h: f64, fd_order: FdOrder) -> Result<Self> {
        if grid.nx < 8 || grid.ny < 8 {
            return Err(Error::Invalid(format!(
                "grid needs nx, ny >= 8 (got {} x {})",
                grid.nx, grid.ny
            )));
        }
        if !(fd_h > 0.0 && fd_h.is_finite()) {
            return Err(Error::invalid("fd_h", fd_h, "fd_h > 0"));
        }
        for (name, (lo, hi)) in [("x", grid.x), ("y", grid.y)] {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Invalid(format!("{name} range [{lo}, {hi}] must be increasing")));
            }
        }
        Ok(Self {
            grid,
            fd_h,
            fd_order,
            derivs: DerivativeSource::Auto,
        })
    }

    pub fn with_derivs(self, derivs: DerivativeSource) -> Self {
        Self { derivs, ..self }
    }

    pub fn with_fd_h(self, fd_h: f64) -> Self {
        Self { fd_h, ..self }
    }
}

/// Sup norms of the residuals plus where they were attained.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResidualReport {
    pub sup_e1: Option<f64>,
    pub sup_e2: Option<f64>,
    pub worst_e1: Option<(f64, f64)>,
    pub worst_e2: Option<(f64, f64)>,
    pub sup_g1: Option<f64>,
    pub sup_g2: Option<f64>,
    /// `t` where `|G1|` / `|G2|` peaked.
    pub worst_g1: Option<f64>,
    pub worst_g2: Option<f64>,
    /// Ratio `sup(h) / sup(h/2)` of the stencil residual.
    pub fd_ratio: Option<f64>,
    /// `log2(fd_ratio)`.
    pub observed_order: Option<f64>,
    /// `K = A R'^2 - del2 B H'^2` along the solution.
    pub k_samples: Vec<f64>,
    pub points: usize,
}

impl ResidualReport {
    /// `max(sup|E1|, sup|E2|)`, if computed.
    pub fn sup_el(&self) -> Option<f64> {
        Some(self.sup_e1?.max(self.sup_e2?))
    }

    /// Fold another report's present fields into this one.
    pub fn merge(mut self, other: ResidualReport) -> Self {
        macro_rules! take {
            ($($f:ident),*) => {$(if other.$f.is_some() { self.$f = other.$f; })*};
        }
        take!(
            sup_e1,
            sup_e2,
            worst_e1,
            worst_e2,
            sup_g1,
            sup_g2,
            worst_g1,
            worst_g2,
            fd_ratio,
            observed_order
        );
        if !other.k_samples.is_empty() {
            self.k_samples = other.k_samples;
        }
        self.points = self.points.max(other.points);
        self
    }
}

/// `(E1, E2)` at one jet.
pub fn el_terms(metric: &TargetMetric, sig: SignaturePair, j: &MapJet) -> Result<(f64, f64)> {
    let p = metric.profiles_unchecked_b(j.r)?;
    let (e, d) = (sig.e(), sig.d());
    let e1 = 2.0 * p.a * (j.r_xx - e * j.r_yy)
        + p.da * (j.r_x * j.r_x - e * j.r_y * j.r_y)
        + d * p.db * (j.s_x * j.s_x - e * j.s_y * j.s_y);
    let e2 = 2.0 * p.b * (j.s_xx - e * j.s_yy) + 2.0 * p.db * (j.r_x * j.s_x - e * j.r_y * j.s_y);
    Ok((e1, e2))
}

/// `(sup|E1|, sup|E2|, argmax E1, argmax E2)`.
type Sup = (f64, f64, (f64, f64), (f64, f64));

fn sup_over(points: &[(f64, f64)], vals: &[(f64, f64)]) -> Result<Sup> {
    let mut out = (0.0, 0.0, points[0], points[0]);
    for (p, &(e1, e2)) in points.iter().zip(vals) {
        if !e1.is_finite() || !e2.is_finite() {
            return Err(Error::NonFinite {
                quantity: "Euler-Lagrange residual",
                at: p.0,
            });
        }
        if e1.abs() > out.0 {
            out.0 = e1.abs();
            out.2 = *p;
        }
        if e2.abs() > out.1 {
            out.1 = e2.abs();
            out.3 = *p;
        }
    }
    Ok(out)
}

fn report_from(points: &[(f64, f64)], vals: &[(f64, f64)]) -> Result<ResidualReport> {
    let (s1, s2, w1, w2) = sup_over(points, vals)?;
    Ok(ResidualReport {
        sup_e1: Some(s1),
        sup_e2: Some(s2),
        worst_e1: Some(w1),
        worst_e2: Some(w2),
        points: points.len(),
        ..Default::default()
    })
}

/// Sup of `|E1|`, `|E2|` over the grid.
pub fn el_residual(
    map: &dyn MapField,
    metric: &TargetMetric,
    sig: SignaturePair,
    spec: &GridSpec,
) -> Result<ResidualReport> {
    let points: Vec<(f64, f64)> = spec.grid.points().collect();
    let vals = points
        .par_iter()
        .map(|&(x, y)| {
            let jet = match spec.derivs {
                DerivativeSource::Auto => map.jet(x, y),
                DerivativeSource::Stencil => None,
            };
            let jet = match jet {
                Some(j) => j?,
                None => stencil_jet(map, x, y, spec.fd_h, spec.fd_order)?,
            };
            el_terms(metric, sig, &jet)
        })
        .collect::<Result<Vec<_>>>()?;
    report_from(&points, &vals)
}

/// Stencil residuals at `fd_h` and `fd_h/2`; the report holds the finer run
/// and the observed order of `max(sup|E1|, sup|E2|)`.
pub fn el_convergence(
    map: &dyn MapField,
    metric: &TargetMetric,
    sig: SignaturePair,
    spec: &GridSpec,
) -> Result<ResidualReport> {
    let coarse_spec = spec.with_derivs(DerivativeSource::Stencil);
    let coarse = el_residual(map, metric, sig, &coarse_spec)?;
    let fine = el_residual(map, metric, sig, &coarse_spec.with_fd_h(spec.fd_h / 2.0))?;
    let (c, f) = (coarse.sup_el().unwrap(), fine.sup_el().unwrap());
    let ratio = c / f;
    Ok(ResidualReport {
        fd_ratio: Some(ratio),
        observed_order: ratio.is_finite().then(|| ratio.log2()),
        ..fine
    })
}

/// Residuals of a sampled map using grid differences; the outer `reach`
/// rows and columns serve as stencil padding and are not reported.
pub fn el_residual_sample(
    sample: &MapSample,
    metric: &TargetMetric,
    sig: SignaturePair,
    order: FdOrder,
) -> Result<ResidualReport> {
    let g = sample.grid;
    let k = order.reach();
    if g.nx < 2 * k + 1 || g.ny < 2 * k + 1 || sample.points.len() != g.len() {
        return Err(Error::Invalid(format!(
            "sampled map needs at least {} nodes per direction",
            2 * k + 1
        )));
    }
    let hx = (g.x.1 - g.x.0) / (g.nx - 1) as f64;
    let hy = (g.y.1 - g.y.0) / (g.ny - 1) as f64;
    let idx: Vec<(usize, usize)> = (k..g.ny - k).flat_map(|j| (k..g.nx - k).map(move |i| (i, j))).collect();
    let line = |f: &dyn Fn(isize) -> f64| -> [f64; 5] {
        let mut v = [0.0; 5];
        for (slot, off) in (-2isize..=2).enumerate() {
            if off.unsigned_abs() <= k {
                v[slot] = f(off);
            }
        }
        v
    };
    let vals = idx
        .par_iter()
        .map(|&(i, j)| {
            let at = |di: isize, dj: isize| sample.at((i as isize + di) as usize, (j as isize + dj) as usize);
            let (r_x, r_xx) = centered(order, line(&|o| at(o, 0).r), hx);
            let (s_x, s_xx) = centered(order, line(&|o| at(o, 0).s), hx);
            let (r_y, r_yy) = centered(order, line(&|o| at(0, o).r), hy);
            let (s_y, s_yy) = centered(order, line(&|o| at(0, o).s), hy);
            let c = at(0, 0);
            let jet = MapJet {
                r: c.r,
                s: c.s,
                r_x,
                r_y,
                s_x,
                s_y,
                r_xx,
                r_yy,
                s_xx,
                s_yy,
            };
            el_terms(metric, sig, &jet)
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> = idx
        .iter()
        .map(|&(i, j)| {
            let p = sample.at(i, j);
            (p.x, p.y)
        })
        .collect();
    report_from(&points, &vals)
}

/// `G1`, `G2` and `K` at every sample of a reduced solution.
pub fn first_integral_residual(
    metric: &TargetMetric,
    params: &ReductionParams,
    sol: &OdeSolution,
) -> Result<ResidualReport> {
    let owned;
    let sol = if sol.has_quadrature() {
        sol
    } else {
        owned = quadrature_h(metric, params, sol.clone())?;
        &owned
    };
    let (a, b) = (params.a(), params.b());
    let (e, d) = (params.sig().e(), params.sig().d());
    let (kappa, lambda) = (params.kappa(), params.lambda());
    let mut rep = ResidualReport {
        sup_g1: Some(0.0),
        sup_g2: Some(0.0),
        worst_g1: Some(sol.ts[0]),
        worst_g2: Some(sol.ts[0]),
        points: sol.len(),
        ..Default::default()
    };
    rep.k_samples.reserve(sol.len());
    for i in 0..sol.len() {
        let p = metric.profiles(sol.rs[i])?;
        let (rp, hp) = (sol.rps[i], sol.hps[i]);
        let k = p.a * rp * rp - d * p.b * hp * hp;
        let g1 =
            (a * a + e * b * b) * k - 4.0 * e * kappa - d * p.b * (b * b + e * a * a + 2.0 * (1.0 - e) * a * b * hp);
        let g2 = a * b * k + 2.0 * lambda - d * p.b * ((b * b - a * a) * hp - a * b);
        if !g1.is_finite() || !g2.is_finite() {
            return Err(Error::NonFinite {
                quantity: "first-integral residual",
                at: sol.ts[i],
            });
        }
        if g1.abs() > rep.sup_g1.unwrap() {
            rep.sup_g1 = Some(g1.abs());
            rep.worst_g1 = Some(sol.ts[i]);
        }
        if g2.abs() > rep.sup_g2.unwrap() {
            rep.sup_g2 = Some(g2.abs());
            rep.worst_g2 = Some(sol.ts[i]);
        }
        rep.k_samples.push(k);
    }
    Ok(rep)
}

/// `e = 1/4 e^{-f} [A (R_x^2 - eps2 R_y^2) - del2 B (S_x^2 - eps2 S_y^2)]`.
///
/// Maps without analytic jets are differenced with a fourth-order stencil at
/// `h = 1e-4`.
pub fn energy_density(map: &dyn MapField, metric: &TargetMetric, dom: &DomainMetric, at: (f64, f64)) -> Result<f64> {
    let (x, y) = at;
    let j = match map.jet(x, y) {
        Some(j) => j?,
        None => stencil_jet(map, x, y, 1e-4, FdOrder::Fourth)?,
    };
    let p = metric.profiles_unchecked_b(j.r)?;
    let e = dom.eps2.value();
    let d = metric.del2().value();
    let f = dom.conformal_factor(x, y)?;
    Ok(0.25 * (-f).exp() * (p.a * (j.r_x * j.r_x - e * j.r_y * j.r_y) - d * p.b * (j.s_x * j.s_x - e * j.s_y * j.s_y)))
}
