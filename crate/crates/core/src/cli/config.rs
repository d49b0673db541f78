//! Run configuration: a line-oriented `key = value` file merged with flags.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::metrics::{Params, Sign};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Subcommand {
    MetricsList,
    MetricsCurvature,
    Solve,
    ClosedForm,
    Verify,
    Evolve,
}

impl Subcommand {
    pub const ALL: [Subcommand; 6] = [
        Subcommand::MetricsList,
        Subcommand::MetricsCurvature,
        Subcommand::Solve,
        Subcommand::ClosedForm,
        Subcommand::Verify,
        Subcommand::Evolve,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::MetricsList => "metrics list",
            Subcommand::MetricsCurvature => "metrics curvature",
            Subcommand::Solve => "solve",
            Subcommand::ClosedForm => "closedform",
            Subcommand::Verify => "verify",
            Subcommand::Evolve => "evolve",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Float,
    Int,
    /// `-1` or `1`.
    Sign,
    Bool,
    Str,
}

impl Kind {
    fn expected(self) -> &'static str {
        match self {
            Kind::Float => "a number",
            Kind::Int => "a non-negative integer",
            Kind::Sign => "-1 or 1",
            Kind::Bool => "true or false",
            Kind::Str => "text",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    Sign(Sign),
    Bool(bool),
    Str(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Float(v) => write!(f, "{v}"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Sign(s) => write!(f, "{}", s.as_i8()),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => f.write_str(s),
        }
    }
}

pub struct KeySpec {
    pub key: &'static str,
    pub kind: Kind,
    pub default: Option<&'static str>,
    pub help: &'static str,
    pub subs: &'static [Subcommand],
}

impl KeySpec {
    /// Flag spelling: underscores become dashes.
    pub fn flag(&self) -> String {
        self.key.replace('_', "-")
    }
}

use Subcommand::{
    ClosedForm as CF, Evolve as EV, MetricsCurvature as MC, MetricsList as ML, Solve as SO, Verify as VE,
};

const ALL: &[Subcommand] = &[ML, MC, SO, CF, VE, EV];

macro_rules! key {
    ($k:literal, $kind:ident, $def:expr, $subs:expr, $help:literal) => {
        KeySpec {
            key: $k,
            kind: Kind::$kind,
            default: $def,
            help: $help,
            subs: $subs,
        }
    };
}

/// Every accepted key. `param` is special: it collects `name=value` pairs.
pub const KEYS: &[KeySpec] = &[
    key!("metric", Str, None, &[MC, SO, VE], "catalog metric name (alias --name)"),
    key!(
        "param",
        Str,
        None,
        &[MC, SO, VE],
        "metric parameter as name=value; repeatable"
    ),
    key!(
        "c",
        Float,
        None,
        &[SO, CF, VE, EV],
        "quadric parameter c > 1 (also the metric's c)"
    ),
    key!(
        "family",
        Str,
        None,
        &[CF, VE, EV],
        "closed-form family: ellipsoid, hyperboloid or mixed"
    ),
    key!("theta", Float, None, &[CF, VE, EV], "closed-form family parameter"),
    key!("eps2", Sign, None, &[SO, CF, VE], "domain signature sign"),
    key!("del2", Sign, None, &[SO, VE], "target fiber sign"),
    key!(
        "a",
        Float,
        None,
        &[SO, CF, VE, EV],
        "frame coefficient a in t = a y - b x"
    ),
    key!(
        "b",
        Float,
        None,
        &[SO, CF, VE, EV],
        "frame coefficient b in t = a y - b x"
    ),
    key!("kappa", Float, None, &[SO, VE], "first integral kappa"),
    key!("lambda", Float, None, &[SO, VE], "first integral lambda"),
    key!("r0", Float, None, &[SO], "initial R"),
    key!("sign", Sign, None, &[SO], "initial sign of R'"),
    key!("t0", Float, None, &[SO], "start of the t span"),
    key!("t1", Float, None, &[SO], "end of the t span"),
    key!("dt", Float, Some("0.001"), &[SO], "integrator step"),
    key!("method", Str, Some("rk4"), &[SO], "rk4 or verlet"),
    key!(
        "invariant_tol",
        Float,
        Some("1e-8"),
        &[SO],
        "allowed drift of R'^2 - Phi(R) per unit t"
    ),
    key!("max_steps", Int, Some("10000000"), &[SO], "step limit"),
    key!("x_min", Float, None, &[SO, CF, VE, EV], "grid x range start"),
    key!("x_max", Float, None, &[SO, CF, VE, EV], "grid x range end"),
    key!("y_min", Float, None, &[SO, CF, VE], "grid y range start"),
    key!("y_max", Float, None, &[SO, CF, VE], "grid y range end"),
    key!("nx", Int, None, &[SO, CF, VE], "grid nodes in x"),
    key!("ny", Int, None, &[SO, CF, VE], "grid nodes in y"),
    key!("fd_h", Float, Some("0.001"), &[VE], "finite-difference step"),
    key!("fd_order", Int, Some("2"), &[VE], "finite-difference order: 2 or 4"),
    key!(
        "derivs",
        Str,
        Some("auto"),
        &[VE],
        "closed-form derivatives: auto or stencil"
    ),
    key!("embed", Bool, Some("false"), &[CF], "emit ambient coordinates X, Y, Z"),
    key!(
        "recover",
        Bool,
        Some("false"),
        &[CF],
        "print the recovered (kappa, lambda)"
    ),
    key!("input", Str, None, &[VE], "map or solution CSV to verify"),
    key!("r_min", Float, None, &[MC], "curvature table start"),
    key!("r_max", Float, None, &[MC], "curvature table end"),
    key!("samples", Int, None, &[MC], "curvature table rows"),
    key!("dx", Float, None, &[EV], "spatial step"),
    key!("cfl", Float, Some("0.5"), &[EV], "dy / dx, in (0, 1]"),
    key!("T", Float, None, &[EV], "final evolution time"),
    key!("map_out", Str, None, &[SO], "also write the assembled map here"),
    key!("out", Str, None, ALL, "output path (stdout if absent)"),
    key!(
        "format",
        Str,
        None,
        ALL,
        "csv or json (default from the output extension)"
    ),
];

pub fn key_spec(key: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.key == key)
}

fn required(sub: Subcommand) -> &'static [&'static str] {
    match sub {
        ML => &[],
        MC => &["metric", "r_min", "r_max", "samples"],
        SO => &[
            "metric", "eps2", "del2", "a", "b", "kappa", "lambda", "r0", "sign", "t0", "t1",
        ],
        CF => &["family", "theta", "x_min", "x_max", "y_min", "y_max", "nx", "ny"],
        VE => &[],
        EV => &["family", "theta", "dx", "T", "x_min", "x_max"],
    }
}

/// A fully merged configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    values: BTreeMap<&'static str, Value>,
    pub params: Params,
}

fn parse_value(spec: &KeySpec, raw: &str) -> Result<Value> {
    let mismatch = || Error::TypeMismatch {
        key: spec.key.to_string(),
        value: raw.to_string(),
        expected: spec.kind.expected(),
    };
    let raw = raw.trim();
    Ok(match spec.kind {
        Kind::Float => Value::Float(raw.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(mismatch)?),
        Kind::Int => Value::Int(raw.parse().map_err(|_| mismatch())?),
        Kind::Sign => match raw {
            "-1" | "-1.0" => Value::Sign(Sign::Minus),
            "1" | "+1" | "1.0" => Value::Sign(Sign::Plus),
            _ => return Err(mismatch()),
        },
        Kind::Bool => Value::Bool(raw.parse().map_err(|_| mismatch())?),
        Kind::Str => {
            if raw.is_empty() {
                return Err(mismatch());
            }
            Value::Str(raw.to_string())
        }
    })
}

fn parse_param(raw: &str) -> Result<(String, f64)> {
    let (k, v) = raw
        .split_once('=')
        .ok_or_else(|| Error::Input(format!("metric parameter `{raw}` is not name=value")))?;
    let v: f64 = v
        .trim()
        .parse()
        .ok()
        .filter(|v: &f64| v.is_finite())
        .ok_or_else(|| Error::TypeMismatch {
            key: format!("param.{}", k.trim()),
            value: v.trim().to_string(),
            expected: "a number",
        })?;
    Ok((k.trim().to_string(), v))
}

/// Merges `file` (`key = value` lines, `#` comments) with `flags`; flags win.
///
/// Metric parameters are `param.NAME = value` in the file and
/// `("param", "NAME=value")` among the flags.
pub fn parse_config(file: &str, flags: &[(String, String)], sub: Subcommand) -> Result<RunConfig> {
    let mut raw: BTreeMap<&'static str, String> = BTreeMap::new();
    let mut params = Params::new();

    for (lineno, line) in file.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Input(format!("config line {}: expected `key = value`", lineno + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if let Some(name) = k.strip_prefix("param.") {
            let (name, v) = parse_param(&format!("{name}={v}"))?;
            params.insert(name, v);
            continue;
        }
        let spec = accepted(k, sub)?;
        raw.insert(spec.key, v.to_string());
    }
    let mut flag_params = Params::new();
    for (k, v) in flags {
        if k == "param" {
            accepted("param", sub)?;
            let (name, v) = parse_param(v)?;
            flag_params.insert(name, v);
            continue;
        }
        let spec = accepted(k, sub)?;
        raw.insert(spec.key, v.clone());
    }
    params.extend(flag_params);

    let mut values = BTreeMap::new();
    for spec in KEYS.iter().filter(|s| s.subs.contains(&sub) && s.key != "param") {
        let text = match (raw.get(spec.key), spec.default) {
            (Some(v), _) => v.as_str(),
            (None, Some(d)) => d,
            (None, None) => continue,
        };
        values.insert(spec.key, parse_value(spec, text)?);
    }
    for key in required(sub) {
        if !values.contains_key(key) {
            return Err(Error::MissingKey {
                key: key.to_string(),
                subcommand: sub.name().to_string(),
            });
        }
    }
    Ok(RunConfig {
        subcommand: sub,
        values,
        params,
    })
}

fn accepted(key: &str, sub: Subcommand) -> Result<&'static KeySpec> {
    match key_spec(key) {
        Some(spec) if spec.subs.contains(&sub) => Ok(spec),
        Some(_) => Err(Error::Invalid(format!(
            "key `{key}` does not apply to `{}`",
            sub.name()
        ))),
        None => Err(Error::UnknownKey(key.to_string())),
    }
}

impl RunConfig {
    pub fn values(&self) -> &BTreeMap<&'static str, Value> {
        &self.values
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn get(&self, key: &str) -> Result<&Value> {
        self.values.get(key).ok_or_else(|| Error::MissingKey {
            key: key.to_string(),
            subcommand: self.subcommand.name().to_string(),
        })
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        match self.get(key)? {
            Value::Float(v) => Ok(*v),
            other => panic!("key `{key}` is not a float: {other:?}"),
        }
    }

    pub fn opt_f64(&self, key: &str) -> Option<f64> {
        self.f64(key).ok()
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        match self.get(key)? {
            Value::Int(v) => Ok(*v as usize),
            other => panic!("key `{key}` is not an integer: {other:?}"),
        }
    }

    pub fn sign(&self, key: &str) -> Result<Sign> {
        match self.get(key)? {
            Value::Sign(s) => Ok(*s),
            other => panic!("key `{key}` is not a sign: {other:?}"),
        }
    }

    pub fn flag(&self, key: &str) -> bool {
        matches!(self.values.get(key), Some(Value::Bool(true)))
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        match self.get(key)? {
            Value::Str(s) => Ok(s),
            other => panic!("key `{key}` is not text: {other:?}"),
        }
    }

    pub fn opt_str(&self, key: &str) -> Option<&str> {
        self.str(key).ok()
    }

    /// Metric parameters, with the top-level `c` filling in a missing `c`.
    pub fn metric_params(&self, accepts_c: bool) -> Params {
        let mut p = self.params.clone();
        if accepts_c && !p.contains_key("c") {
            if let Some(c) = self.opt_f64("c") {
                p.insert("c".into(), c);
            }
        }
        p
    }
}
