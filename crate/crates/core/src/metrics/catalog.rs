//! Named warped-product targets.
//!
//! Profiles follow the metric rows verbatim: e.g. the sphere row is
//! `dR^2 + cos^2(R/a) dS^2` and the cigar `1/2 (dR^2 - tanh^2 R dS^2)`, with
//! the overall 1/2 absorbed into both profiles.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::{Interval, RadialProfile, Sign, TargetMetric};
use crate::error::{Error, Result};

pub type Params = BTreeMap<String, f64>;

/// Which group of the catalog an entry belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatalogTable {
    /// Surfaces of constant curvature.
    Constant,
    /// Surfaces of non-constant curvature.
    Variable,
    /// Entries outside the two tables (mixed-signature target, custom).
    Extra,
}

impl CatalogTable {
    pub fn label(self) -> &'static str {
        match self {
            CatalogTable::Constant => "constant",
            CatalogTable::Variable => "variable",
            CatalogTable::Extra => "extra",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub table: CatalogTable,
    pub required: &'static [&'static str],
    pub optional: &'static [(&'static str, f64)],
    /// Parameters used by `metrics list` and the tests.
    pub example: &'static [(&'static str, f64)],
    /// A sample range strictly inside the domain for the example parameters.
    pub sample_range: (f64, f64),
}

impl CatalogEntry {
    pub fn example_params(&self) -> Params {
        self.example.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }
}

const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        name: "flat_cartesian",
        table: CatalogTable::Constant,
        required: &[],
        optional: &[],
        example: &[],
        sample_range: (-2.0, 2.0),
    },
    CatalogEntry {
        name: "flat_polar",
        table: CatalogTable::Constant,
        required: &[],
        optional: &[],
        example: &[],
        sample_range: (0.5, 5.0),
    },
    CatalogEntry {
        name: "sphere",
        table: CatalogTable::Constant,
        required: &["a"],
        optional: &[],
        example: &[("a", 1.0)],
        sample_range: (-1.2, 1.2),
    },
    CatalogEntry {
        name: "hyperbolic",
        table: CatalogTable::Constant,
        required: &[],
        optional: &[],
        example: &[],
        sample_range: (0.2, 3.0),
    },
    CatalogEntry {
        name: "minkowski",
        table: CatalogTable::Constant,
        required: &[],
        optional: &[],
        example: &[],
        sample_range: (-2.0, 2.0),
    },
    CatalogEntry {
        name: "rindler",
        table: CatalogTable::Constant,
        required: &[],
        optional: &[],
        example: &[],
        sample_range: (0.5, 5.0),
    },
    CatalogEntry {
        name: "de_sitter",
        table: CatalogTable::Constant,
        required: &[],
        optional: &[],
        example: &[],
        sample_range: (0.1, 2.0),
    },
    CatalogEntry {
        name: "anti_de_sitter",
        table: CatalogTable::Constant,
        required: &[],
        optional: &[],
        example: &[],
        sample_range: (0.2, 3.0),
    },
    CatalogEntry {
        name: "twisted",
        table: CatalogTable::Constant,
        required: &[],
        optional: &[],
        example: &[],
        sample_range: (-1.0, 1.0),
    },
    CatalogEntry {
        name: "power_warp",
        table: CatalogTable::Variable,
        required: &["p"],
        optional: &[],
        example: &[("p", 2.0)],
        sample_range: (0.5, 3.0),
    },
    CatalogEntry {
        name: "paraboloid",
        table: CatalogTable::Variable,
        required: &[],
        optional: &[],
        example: &[],
        sample_range: (0.2, 3.0),
    },
    CatalogEntry {
        name: "torus",
        table: CatalogTable::Variable,
        required: &["r", "R0"],
        optional: &[],
        example: &[("r", 1.0), ("R0", 2.0)],
        sample_range: (-3.0, 3.0),
    },
    CatalogEntry {
        name: "ellipsoid",
        table: CatalogTable::Variable,
        required: &["c"],
        optional: &[],
        example: &[("c", std::f64::consts::SQRT_2)],
        sample_range: (0.3, PI - 0.3),
    },
    CatalogEntry {
        name: "schwarzschild_2d",
        table: CatalogTable::Variable,
        required: &["M"],
        optional: &[],
        example: &[("M", 1.0)],
        sample_range: (2.4, 10.0),
    },
    CatalogEntry {
        name: "cigar",
        table: CatalogTable::Variable,
        required: &[],
        optional: &[],
        example: &[],
        sample_range: (0.2, 3.0),
    },
    CatalogEntry {
        name: "elliptic_hyperboloid",
        table: CatalogTable::Variable,
        required: &["c"],
        optional: &[],
        example: &[("c", std::f64::consts::SQRT_2)],
        sample_range: (0.3, PI - 0.3),
    },
    CatalogEntry {
        name: "tanh_warp",
        table: CatalogTable::Extra,
        required: &["del2"],
        optional: &[],
        example: &[("del2", -1.0)],
        sample_range: (0.2, 3.0),
    },
    CatalogEntry {
        name: "custom",
        table: CatalogTable::Extra,
        required: &["a0", "b0", "del2", "r_min", "r_max"],
        optional: &[("a1", 0.0), ("a2", 0.0), ("b1", 0.0), ("b2", 0.0)],
        example: &[
            ("a0", 1.0),
            ("b0", 1.0),
            ("b2", 1.0),
            ("del2", -1.0),
            ("r_min", 0.0),
            ("r_max", 2.0),
        ],
        sample_range: (0.2, 1.8),
    },
];

pub fn catalog_entries() -> &'static [CatalogEntry] {
    ENTRIES
}

/// Looks up a catalog metric by name, validating its parameters.
pub fn catalog_lookup(name: &str, params: &Params) -> Result<TargetMetric> {
    let entry = ENTRIES
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownMetric(name.to_string()))?;
    for key in params.keys() {
        let known = entry.required.contains(&key.as_str()) || entry.optional.iter().any(|(k, _)| k == key);
        if !known {
            return Err(Error::UnknownParameter {
                metric: name.into(),
                param: key.clone(),
            });
        }
    }
    let get = |key: &str| -> Result<f64> {
        let v = match params.get(key) {
            Some(v) => *v,
            None => entry
                .optional
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, d)| *d)
                .ok_or_else(|| Error::MissingParameter {
                    metric: name.into(),
                    param: key.into(),
                })?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::invalid(key, v, "a finite value"))
        }
    };
    let sign = |key: &str| -> Result<Sign> {
        let v = get(key)?;
        if v == -1.0 {
            Ok(Sign::Minus)
        } else if v == 1.0 {
            Ok(Sign::Plus)
        } else {
            Err(Error::invalid(key, v, "-1 or +1"))
        }
    };

    let pos = Interval::new(0.0, f64::INFINITY);
    let one = || RadialProfile::constant(1.0);
    let square = || RadialProfile::new(Interval::REAL_LINE, |r| r * r, |r| 2.0 * r, |_| 2.0);
    let sinh2 = || {
        RadialProfile::new(
            Interval::REAL_LINE,
            |r: f64| r.sinh().powi(2),
            |r: f64| (2.0 * r).sinh(),
            |r: f64| 2.0 * (2.0 * r).cosh(),
        )
    };
    let tanh2 = |scale: f64| {
        RadialProfile::new(
            Interval::REAL_LINE,
            move |r: f64| scale * r.tanh().powi(2),
            move |r: f64| 2.0 * scale * r.tanh() / r.cosh().powi(2),
            move |r: f64| {
                let s2 = 1.0 / r.cosh().powi(2);
                2.0 * scale * s2 * (s2 - 2.0 * r.tanh().powi(2))
            },
        )
    };

    let build = |a, b, del2, dom, sing| TargetMetric::new(name, a, b, del2, dom, sing);

    match name {
        "flat_cartesian" => build(one(), one(), Sign::Minus, Interval::REAL_LINE, vec![]),
        "flat_polar" => build(one(), square(), Sign::Minus, pos, vec![0.0]),
        "sphere" => {
            let a = get("a")?;
            if !(a > 0.0) {
                return Err(Error::invalid("a", a, "a > 0"));
            }
            let b = RadialProfile::new(
                Interval::REAL_LINE,
                move |r: f64| (r / a).cos().powi(2),
                move |r: f64| -(2.0 * r / a).sin() / a,
                move |r: f64| -2.0 * (2.0 * r / a).cos() / (a * a),
            );
            let half = PI * a / 2.0;
            build(one(), b, Sign::Minus, Interval::new(-half, half), vec![-half, half])
        }
        "hyperbolic" => build(one(), sinh2(), Sign::Minus, pos, vec![0.0]),
        "minkowski" => build(one(), one(), Sign::Plus, Interval::REAL_LINE, vec![]),
        "rindler" => build(one(), square(), Sign::Plus, pos, vec![0.0]),
        "de_sitter" => {
            let b = RadialProfile::new(
                Interval::REAL_LINE,
                |r: f64| r.cosh().powi(2),
                |r: f64| (2.0 * r).sinh(),
                |r: f64| 2.0 * (2.0 * r).cosh(),
            );
            build(one(), b, Sign::Plus, Interval::REAL_LINE, vec![])
        }
        "anti_de_sitter" => build(one(), sinh2(), Sign::Plus, pos, vec![0.0]),
        "twisted" => {
            let e2 = || {
                RadialProfile::new(
                    Interval::REAL_LINE,
                    |r: f64| (2.0 * r).exp(),
                    |r: f64| 2.0 * (2.0 * r).exp(),
                    |r: f64| 4.0 * (2.0 * r).exp(),
                )
            };
            build(e2(), e2(), Sign::Plus, Interval::REAL_LINE, vec![])
        }
        "power_warp" => {
            let p = get("p")?;
            if p == 0.0 || p == 1.0 {
                return Err(Error::invalid("p", p, "p != 0 and p != 1"));
            }
            let b = RadialProfile::new(
                pos,
                move |r: f64| r.powf(2.0 * p),
                move |r: f64| 2.0 * p * r.powf(2.0 * p - 1.0),
                move |r: f64| 2.0 * p * (2.0 * p - 1.0) * r.powf(2.0 * p - 2.0),
            );
            let sing = if p > 0.0 { vec![0.0] } else { vec![] };
            build(one(), b, Sign::Minus, pos, sing)
        }
        "paraboloid" => {
            let a = RadialProfile::new(Interval::REAL_LINE, |r| 1.0 + r * r, |r| 2.0 * r, |_| 2.0);
            build(a, square(), Sign::Minus, pos, vec![0.0])
        }
        "torus" => {
            let r = get("r")?;
            let r0 = get("R0")?;
            if !(r > 0.0 && r < r0) {
                return Err(Error::invalid("r", r, format!("0 < r < R0 (R0 = {r0})")));
            }
            let b = RadialProfile::new(
                Interval::REAL_LINE,
                move |x: f64| (r0 + r * x.cos()).powi(2),
                move |x: f64| -2.0 * r * x.sin() * (r0 + r * x.cos()),
                move |x: f64| -2.0 * r * x.cos() * (r0 + r * x.cos()) + 2.0 * r * r * x.sin().powi(2),
            );
            build(
                RadialProfile::constant(r * r),
                b,
                Sign::Minus,
                Interval::REAL_LINE,
                vec![],
            )
        }
        "ellipsoid" | "elliptic_hyperboloid" => {
            let c = get("c")?;
            if !(c > 1.0) {
                return Err(Error::invalid("c", c, "c > 1"));
            }
            let (a, b) = quadric_profiles(c);
            let del2 = if name == "ellipsoid" { Sign::Minus } else { Sign::Plus };
            build(a, b, del2, Interval::new(0.0, PI), vec![0.0, PI])
        }
        "schwarzschild_2d" => {
            let m = get("M")?;
            if !(m > 0.0) {
                return Err(Error::invalid("M", m, "M > 0"));
            }
            let a = RadialProfile::new(
                Interval::REAL_LINE,
                move |r: f64| 1.0 / (1.0 - 2.0 * m / r),
                move |r: f64| {
                    let f = 1.0 - 2.0 * m / r;
                    -(2.0 * m / (r * r)) / (f * f)
                },
                move |r: f64| {
                    let f = 1.0 - 2.0 * m / r;
                    let f1 = 2.0 * m / (r * r);
                    let f2 = -4.0 * m / (r * r * r);
                    -f2 / (f * f) + 2.0 * f1 * f1 / (f * f * f)
                },
            );
            let b = RadialProfile::new(
                Interval::REAL_LINE,
                move |r: f64| 1.0 - 2.0 * m / r,
                move |r: f64| 2.0 * m / (r * r),
                move |r: f64| -4.0 * m / (r * r * r),
            );
            let edge = 2.0 * m;
            build(a, b, Sign::Plus, Interval::new(edge, f64::INFINITY), vec![edge])
        }
        "cigar" => build(RadialProfile::constant(0.5), tanh2(0.5), Sign::Plus, pos, vec![0.0]),
        "tanh_warp" => {
            let del2 = sign("del2")?;
            build(one(), tanh2(1.0), del2, Interval::REAL_LINE, vec![0.0])
        }
        "custom" => {
            let coeff = |k: &str| get(k);
            let (a0, a1, a2) = (coeff("a0")?, coeff("a1")?, coeff("a2")?);
            let (b0, b1, b2) = (coeff("b0")?, coeff("b1")?, coeff("b2")?);
            let del2 = sign("del2")?;
            let (lo, hi) = (get("r_min")?, get("r_max")?);
            if !(lo < hi) {
                return Err(Error::invalid("r_max", hi, format!("r_max > r_min = {lo}")));
            }
            let quad = |c0: f64, c1: f64, c2: f64| {
                RadialProfile::new(
                    Interval::REAL_LINE,
                    move |r| c0 + c1 * r + c2 * r * r,
                    move |r| c1 + 2.0 * c2 * r,
                    move |_| 2.0 * c2,
                )
            };
            let (pa, pb) = (quad(a0, a1, a2), quad(b0, b1, b2));
            for i in 1..256 {
                let r = lo + (hi - lo) * i as f64 / 256.0;
                if !(pa.value_at(r) > 0.0 && pb.value_at(r) > 0.0) {
                    return Err(Error::Invalid(format!(
                        "custom profiles must be positive on (r_min, r_max); fails at R = {r}"
                    )));
                }
            }
            build(pa, pb, del2, Interval::new(lo, hi), vec![])
        }
        _ => unreachable!("catalog entry without a constructor"),
    }
}

/// `A = c^2 sin^2 R + cos^2 R`, `B = sin^2 R`.
fn quadric_profiles(c: f64) -> (RadialProfile, RadialProfile) {
    let k = c * c - 1.0;
    let a = RadialProfile::new(
        Interval::REAL_LINE,
        move |r: f64| 1.0 + k * r.sin().powi(2),
        move |r: f64| k * (2.0 * r).sin(),
        move |r: f64| 2.0 * k * (2.0 * r).cos(),
    );
    let b = RadialProfile::new(
        Interval::REAL_LINE,
        |r: f64| r.sin().powi(2),
        |r: f64| (2.0 * r).sin(),
        |r: f64| 2.0 * (2.0 * r).cos(),
    );
    (a, b)
}
