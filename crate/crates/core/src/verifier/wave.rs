//! Method-of-lines evolution of wave maps (`eps2 = +1`, `y` as time):
//!
//! ```text
//! R_yy = R_xx + A'/(2A) (R_x^2 - R_y^2) + del2 B'/(2A) (S_x^2 - S_y^2)
//! S_yy = S_xx + B'/B (R_x S_x - R_y S_y)
//! ```
//!
//! Leapfrog in `y`, centered differences in `x`. The `R_y`, `S_y` on the
//! right are the centered differences `(u^{n+1} - u^{n-1}) / 2dy`, resolved by
//! a few fixed-point sweeps per step. Where the solution passes through a
//! coordinate singularity (`B = 0`) the quotient `B'/B` is replaced, within
//! one local grid increment of the singular value, by linear interpolation
//! from the neighbouring regular nodes.

use crate::error::{Error, Result};
use crate::field::{stencil_jet, FdOrder, MapField};
use crate::metrics::TargetMetric;

const FIXED_POINT_SWEEPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// Boundary values taken from the reference map at every step.
    DirichletExact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveEvolveConfig {
    pub dx: f64,
    /// `dy / dx`; the step is shortened so that `t_final / dy` is an integer.
    pub cfl: f64,
    pub t_final: f64,
    pub bc: BoundaryCondition,
}

impl WaveEvolveConfig {
    pub fn new(dx: f64, cfl: f64, t_final: f64) -> Result<Self> {
        let cfg = Self {
            dx,
            cfl,
            t_final,
            bc: BoundaryCondition::DirichletExact,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Cfl { cfl: self.cfl });
        }
        if !(self.dx > 0.0 && self.dx.is_finite()) {
            return Err(Error::invalid("dx", self.dx, "dx > 0"));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::invalid("T", self.t_final, "T > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveResult {
    pub xs: Vec<f64>,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub r_ref: Vec<f64>,
    pub s_ref: Vec<f64>,
    pub dx: f64,
    pub dy: f64,
    pub steps: usize,
    /// `sqrt(dx * sum((R - R_ref)^2 + (S - S_ref)^2))` at `y = T`.
    pub deviation_l2: f64,
    pub max_dev_r: f64,
    pub max_dev_s: f64,
    /// Node-steps where `B'/B` was interpolated.
    pub regularized: usize,
}

struct Stepper<'a> {
    metric: &'a TargetMetric,
    dx: f64,
    d: f64,
    /// Scratch for `B'/B (R_x S_x - R_y S_y)` and its validity.
    coupling: Vec<f64>,
    regular: Vec<bool>,
    regularized: usize,
}

impl Stepper<'_> {
    /// Right-hand sides on interior nodes; boundary slots are left at 0.
    #[allow(clippy::needless_range_loop)]
    fn rhs(&mut self, r: &[f64], s: &[f64], ry: &[f64], sy: &[f64], fr: &mut [f64], fs: &mut [f64]) -> Result<()> {
        let n = r.len();
        let h = self.dx;
        let sing = self.metric.singular_points();
        for i in 1..n - 1 {
            let rx = (r[i + 1] - r[i - 1]) / (2.0 * h);
            let sx = (s[i + 1] - s[i - 1]) / (2.0 * h);
            let rxx = (r[i + 1] - 2.0 * r[i] + r[i - 1]) / (h * h);
            let sxx = (s[i + 1] - 2.0 * s[i] + s[i - 1]) / (h * h);
            let p = self.metric.profiles_unchecked_b(r[i])?;
            fr[i] = rxx
                + p.da / (2.0 * p.a) * (rx * rx - ry[i] * ry[i])
                + self.d * p.db / (2.0 * p.a) * (sx * sx - sy[i] * sy[i]);
            fs[i] = sxx;

            let reach = (r[i + 1] - r[i]).abs().max((r[i] - r[i - 1]).abs());
            let near = sing.iter().any(|&z| (r[i] - z).abs() <= reach);
            let q = p.db / p.b * (rx * sx - ry[i] * sy[i]);
            self.regular[i] = !near && p.b > 0.0 && q.is_finite();
            self.coupling[i] = q;
        }
        for i in 1..n - 1 {
            if self.regular[i] {
                fs[i] += self.coupling[i];
                continue;
            }
            let left = (1..i).rev().find(|&k| self.regular[k]);
            let right = (i + 1..n - 1).find(|&k| self.regular[k]);
            let q = match (left, right) {
                (Some(l), Some(rr)) => {
                    let w = (i - l) as f64 / (rr - l) as f64;
                    (1.0 - w) * self.coupling[l] + w * self.coupling[rr]
                }
                (Some(k), None) | (None, Some(k)) => self.coupling[k],
                (None, None) => {
                    return Err(Error::Invalid(
                        "no regular node to interpolate the B'/B coupling from".into(),
                    ))
                }
            };
            fs[i] += q;
            self.regularized += 1;
        }
        Ok(())
    }
}

/// Evolves the reference map's Cauchy data at `y = 0` up to `y = T` on
/// `x_range` and compares with the reference there.
pub fn wave_evolve(
    metric: &TargetMetric,
    reference: &dyn MapField,
    cfg: &WaveEvolveConfig,
    x_range: (f64, f64),
) -> Result<WaveResult> {
    cfg.validate()?;
    let (x0, x1) = x_range;
    if !(x1 > x0) {
        return Err(Error::Invalid(format!("x range [{x0}, {x1}] must be increasing")));
    }
    let cells = ((x1 - x0) / cfg.dx).round() as usize;
    if cells < 2 {
        return Err(Error::Invalid(format!("dx = {} leaves fewer than 2 cells", cfg.dx)));
    }
    let dx = (x1 - x0) / cells as f64;
    let steps = (cfg.t_final / (cfg.cfl * dx) - 1e-9).ceil().max(1.0) as usize;
    let dy = cfg.t_final / steps as f64;
    let n = cells + 1;
    let xs: Vec<f64> = (0..n).map(|i| x0 + dx * i as f64).collect();

    let row = |y: f64| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut r = Vec::with_capacity(n);
        let mut s = Vec::with_capacity(n);
        for &x in &xs {
            let (a, b) = reference.eval(x, y)?;
            r.push(a);
            s.push(b);
        }
        Ok((r, s))
    };
    let (mut r_prev, mut s_prev) = row(0.0)?;
    let mut ry = Vec::with_capacity(n);
    let mut sy = Vec::with_capacity(n);
    for &x in &xs {
        let j = match reference.jet(x, 0.0) {
            Some(j) => j?,
            None => stencil_jet(reference, x, 0.0, 1e-3, FdOrder::Fourth)?,
        };
        ry.push(j.r_y);
        sy.push(j.s_y);
    }

    let mut st = Stepper {
        metric,
        dx,
        d: metric.del2().value(),
        coupling: vec![0.0; n],
        regular: vec![true; n],
        regularized: 0,
    };
    let mut fr = vec![0.0; n];
    let mut fs = vec![0.0; n];
    let fail = |step: usize, reason: &'static str| Error::WaveBreakdown {
        step,
        y: step as f64 * dy,
        reason,
    };
    let wrap = |step: usize| {
        move |e: Error| match e {
            Error::OutsideDomain { .. } | Error::NonFinite { .. } => fail(step, "R left the target domain"),
            Error::Invalid(_) => fail(step, "B vanishes on the whole line"),
            other => other,
        }
    };

    // Taylor start: u^1 = u^0 + dy u_y + dy^2/2 u_yy
    st.rhs(&r_prev, &s_prev, &ry, &sy, &mut fr, &mut fs).map_err(wrap(1))?;
    let (mut r_cur, mut s_cur) = row(dy)?;
    for i in 1..n - 1 {
        r_cur[i] = r_prev[i] + dy * ry[i] + 0.5 * dy * dy * fr[i];
        s_cur[i] = s_prev[i] + dy * sy[i] + 0.5 * dy * dy * fs[i];
    }

    for k in 1..steps {
        let y_next = (k + 1) as f64 * dy;
        let (mut r_next, mut s_next) = row(y_next)?;
        for i in 0..n {
            ry[i] = (r_cur[i] - r_prev[i]) / dy;
            sy[i] = (s_cur[i] - s_prev[i]) / dy;
        }
        for _ in 0..FIXED_POINT_SWEEPS {
            st.rhs(&r_cur, &s_cur, &ry, &sy, &mut fr, &mut fs)
                .map_err(wrap(k + 1))?;
            for i in 1..n - 1 {
                r_next[i] = 2.0 * r_cur[i] - r_prev[i] + dy * dy * fr[i];
                s_next[i] = 2.0 * s_cur[i] - s_prev[i] + dy * dy * fs[i];
            }
            for i in 0..n {
                ry[i] = (r_next[i] - r_prev[i]) / (2.0 * dy);
                sy[i] = (s_next[i] - s_prev[i]) / (2.0 * dy);
            }
        }
        if r_next.iter().chain(&s_next).any(|v| !v.is_finite()) {
            return Err(fail(k + 1, "non-finite field value"));
        }
        r_prev = std::mem::replace(&mut r_cur, r_next);
        s_prev = std::mem::replace(&mut s_cur, s_next);
    }

    let (r_ref, s_ref) = row(cfg.t_final)?;
    let mut sum = 0.0;
    let (mut max_r, mut max_s) = (0.0f64, 0.0f64);
    for i in 0..n {
        let (er, es) = (r_cur[i] - r_ref[i], s_cur[i] - s_ref[i]);
        sum += er * er + es * es;
        max_r = max_r.max(er.abs());
        max_s = max_s.max(es.abs());
    }
    Ok(WaveResult {
        xs,
        r: r_cur,
        s: s_cur,
        r_ref,
        s_ref,
        dx,
        dy,
        steps,
        deviation_l2: (dx * sum).sqrt(),
        max_dev_r: max_r,
        max_dev_s: max_s,
        regularized: st.regularized,
    })
}
