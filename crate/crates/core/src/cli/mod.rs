//! The `harmap` command: configuration, subcommand dispatch and exit codes.
//!
//! Exit status: 0 on success, 1 on I/O failure, 2 on invalid input, 3 when a
//! computation fails (drift, CFL, domain exit, non-finite values).

mod config;
mod export;

pub use config::{parse_config, KeySpec, Kind, RunConfig, Subcommand, Value, KEYS};
pub use export::{
    embedding_table, fmt_num, map_from_rows, map_table, read_numeric_csv, report_table, solution_from_rows,
    solution_table, Cell, Format, Table,
};

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use clap::parser::ValueSource;
use clap::{Arg, ArgAction, ArgMatches, Command};
use serde_json::{Map, Value as Json};

use crate::closed_forms::{ellipsoid_map, embed, hyperboloid_map, mixed_map, ClosedFormMap, Family};
use crate::error::{Error, ErrorKind, Result};
use crate::field::{FdOrder, MapField, RectGrid};
use crate::integrator::{assemble_map, solve, IntegratorConfig, MapPoint, Method};
use crate::metrics::{
    catalog_entries, catalog_lookup, curvature_classify, gauss_curvature, CurvatureClass, Sign, SignaturePair,
    TargetMetric,
};
use crate::reduction::ReductionParams;
use crate::verifier::{
    el_convergence, el_residual, el_residual_sample, first_integral_residual, wave_evolve, GridSpec, ResidualReport,
    WaveEvolveConfig,
};

pub fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        ErrorKind::Validation => 2,
        ErrorKind::Numerical => 3,
        ErrorKind::Io => 1,
    }
}

fn key_arg(spec: &'static KeySpec) -> Arg {
    let mut arg = Arg::new(spec.key).long(spec.flag()).help(spec.help);
    arg = match spec.kind {
        Kind::Bool => arg.action(ArgAction::SetTrue),
        _ if spec.key == "param" => arg.action(ArgAction::Append).value_name("NAME=VALUE"),
        Kind::Str => arg.action(ArgAction::Set).value_name("TEXT"),
        _ => arg
            .action(ArgAction::Set)
            .value_name("NUM")
            .allow_negative_numbers(true),
    };
    if spec.key == "metric" {
        arg = arg.visible_alias("name");
    }
    if let Some(d) = spec.default {
        arg = arg.help(format!("{} [default: {d}]", spec.help));
    }
    arg
}

fn sub_command(name: &'static str, sub: Subcommand, about: &'static str) -> Command {
    let mut cmd = Command::new(name).about(about).arg(
        Arg::new("config")
            .long("config")
            .value_name("PATH")
            .help("key = value file; flags override it"),
    );
    for spec in KEYS.iter().filter(|s| s.subs.contains(&sub)) {
        cmd = cmd.arg(key_arg(spec));
    }
    cmd
}

pub fn command() -> Command {
    Command::new("harmap")
        .about("Explicit harmonic and wave maps into warped-product surfaces")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(
            Command::new("metrics")
                .about("Inspect the target metric catalog")
                .subcommand_required(true)
                .subcommand(sub_command(
                    "list",
                    Subcommand::MetricsList,
                    "List catalog metrics with curvature class",
                ))
                .subcommand(sub_command(
                    "curvature",
                    Subcommand::MetricsCurvature,
                    "Tabulate Gaussian curvature K(R)",
                )),
        )
        .subcommand(sub_command(
            "solve",
            Subcommand::Solve,
            "Integrate the reduced ODE and export the solution",
        ))
        .subcommand(sub_command(
            "closedform",
            Subcommand::ClosedForm,
            "Evaluate a closed-form family on a grid",
        ))
        .subcommand(sub_command(
            "verify",
            Subcommand::Verify,
            "Euler-Lagrange and first-integral residuals",
        ))
        .subcommand(sub_command(
            "evolve",
            Subcommand::Evolve,
            "Evolve a closed-form wave map and report the deviation",
        ))
}

fn selected(m: &ArgMatches) -> Option<(Subcommand, &ArgMatches)> {
    match m.subcommand()? {
        ("metrics", mm) => match mm.subcommand()? {
            ("list", s) => Some((Subcommand::MetricsList, s)),
            ("curvature", s) => Some((Subcommand::MetricsCurvature, s)),
            _ => None,
        },
        ("solve", s) => Some((Subcommand::Solve, s)),
        ("closedform", s) => Some((Subcommand::ClosedForm, s)),
        ("verify", s) => Some((Subcommand::Verify, s)),
        ("evolve", s) => Some((Subcommand::Evolve, s)),
        _ => None,
    }
}

fn collect_flags(sub: Subcommand, m: &ArgMatches) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for spec in KEYS.iter().filter(|s| s.subs.contains(&sub)) {
        if m.value_source(spec.key) != Some(ValueSource::CommandLine) {
            continue;
        }
        if spec.kind == Kind::Bool {
            out.push((spec.key.to_string(), m.get_flag(spec.key).to_string()));
        } else if let Some(vals) = m.get_many::<String>(spec.key) {
            out.extend(vals.map(|v| (spec.key.to_string(), v.clone())));
        }
    }
    out
}

/// Parses `args` (including the program name), runs, and returns the exit
/// status. Diagnostics go to `err`, data without `--out` to `out`.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let Some((sub, m)) = selected(&matches) else {
        let _ = writeln!(err, "error: missing subcommand");
        return 2;
    };
    let result = (|| {
        let text = match m.get_one::<String>("config") {
            Some(path) => {
                std::fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read config `{path}`: {e}")))?
            }
            None => String::new(),
        };
        let cfg = parse_config(&text, &collect_flags(sub, m), sub)?;
        run(&cfg, out, err)
    })();
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Echo of the resolved configuration for JSON output.
pub fn meta(cfg: &RunConfig) -> Map<String, Json> {
    let mut m = Map::new();
    m.insert("subcommand".into(), Json::from(cfg.subcommand.name()));
    for (k, v) in cfg.values() {
        let j = match v {
            Value::Float(x) => serde_json::Number::from_f64(*x).map_or(Json::Null, Json::Number),
            Value::Int(x) => Json::from(*x),
            Value::Sign(s) => Json::from(s.as_i8()),
            Value::Bool(b) => Json::from(*b),
            Value::Str(s) => Json::from(s.as_str()),
        };
        m.insert(k.to_string(), j);
    }
    for (k, v) in &cfg.params {
        m.insert(format!("param.{k}"), Json::from(*v));
    }
    m
}

fn format_for(cfg: &RunConfig, path: Option<&str>) -> Result<Format> {
    if let Some(f) = cfg.opt_str("format") {
        return Format::parse(f).ok_or_else(|| Error::TypeMismatch {
            key: "format".into(),
            value: f.into(),
            expected: "csv or json",
        });
    }
    Ok(match path.and_then(|p| Path::new(p).extension()) {
        Some(e) if e == "json" => Format::Json,
        _ => Format::Csv,
    })
}

fn emit(cfg: &RunConfig, table: &Table, path: Option<&str>, stdout: &mut dyn Write) -> Result<()> {
    let format = format_for(cfg, path)?;
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            table.write(format, meta(cfg), &mut w)?;
            w.flush()?;
        }
        None => table.write(format, meta(cfg), stdout)?,
    }
    Ok(())
}

fn metric_from(cfg: &RunConfig) -> Result<TargetMetric> {
    let name = cfg.str("metric")?;
    let takes_c = catalog_entries()
        .iter()
        .any(|e| e.name == name && e.required.contains(&"c"));
    catalog_lookup(name, &cfg.metric_params(takes_c))
}

fn sig_from(cfg: &RunConfig) -> Result<SignaturePair> {
    Ok(SignaturePair::new(cfg.sign("eps2")?, cfg.sign("del2")?))
}

fn grid_from(cfg: &RunConfig) -> Result<RectGrid> {
    let g = RectGrid::new(
        (cfg.f64("x_min")?, cfg.f64("x_max")?),
        (cfg.f64("y_min")?, cfg.f64("y_max")?),
        cfg.usize("nx")?,
        cfg.usize("ny")?,
    );
    if g.nx < 1 || g.ny < 1 {
        return Err(Error::Invalid("grid needs nx, ny >= 1".into()));
    }
    Ok(g)
}

fn closed_form_from(cfg: &RunConfig, family: &str) -> Result<ClosedFormMap> {
    let fam = Family::parse(family).ok_or_else(|| Error::TypeMismatch {
        key: "family".into(),
        value: family.into(),
        expected: "ellipsoid, hyperboloid or mixed",
    })?;
    let theta = cfg.f64("theta")?;
    match fam {
        Family::Ellipsoid => ellipsoid_map(cfg.f64("c")?, theta, cfg.f64("a")?, cfg.f64("b")?),
        Family::Hyperboloid => hyperboloid_map(cfg.f64("c")?, theta, cfg.f64("a")?, cfg.f64("b")?),
        Family::Mixed => {
            let eps2 = if cfg.subcommand == Subcommand::Evolve {
                Sign::Plus
            } else {
                cfg.sign("eps2")?
            };
            mixed_map(theta, eps2)
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Executes a parsed configuration.
pub fn run(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let out = cfg.opt_str("out");
    match cfg.subcommand {
        Subcommand::MetricsList => {
            let mut t = Table::new(vec!["name", "group", "del2", "curvature", "K_min", "K_max", "params"]);
            for e in catalog_entries() {
                let m = catalog_lookup(e.name, &e.example_params())?;
                let (lo, hi) = e.sample_range;
                let (class, kmin, kmax) = match curvature_classify(&m, &linspace(lo, hi, 32))? {
                    CurvatureClass::Constant(k) => ("constant", k, k),
                    CurvatureClass::Variable { min, max } => ("variable", min, max),
                };
                let params = e
                    .example
                    .iter()
                    .map(|(k, v)| format!("{k}={}", fmt_num(*v)))
                    .collect::<Vec<_>>()
                    .join(";");
                t.push(vec![
                    e.name.into(),
                    e.table.label().into(),
                    (m.del2().value()).into(),
                    class.into(),
                    kmin.into(),
                    kmax.into(),
                    Cell::Text(params),
                ]);
            }
            emit(cfg, &t, out, stdout)
        }
        Subcommand::MetricsCurvature => {
            let m = metric_from(cfg)?;
            let n = cfg.usize("samples")?;
            if n < 1 {
                return Err(Error::Invalid("samples must be at least 1".into()));
            }
            let mut t = Table::new(vec!["R", "K"]);
            for r in linspace(cfg.f64("r_min")?, cfg.f64("r_max")?, n) {
                t.push(vec![r.into(), gauss_curvature(&m, r)?.into()]);
            }
            emit(cfg, &t, out, stdout)
        }
        Subcommand::Solve => run_solve(cfg, stdout, stderr),
        Subcommand::ClosedForm => run_closed_form(cfg, stdout, stderr),
        Subcommand::Verify => run_verify(cfg, stdout),
        Subcommand::Evolve => {
            let family = cfg.str("family")?;
            let map = closed_form_from(cfg, family)?;
            if map.signature().eps2 != Sign::Plus {
                return Err(Error::Invalid(format!(
                    "wave evolution needs a Lorentzian domain (eps2 = 1); the {family} family is Riemannian"
                )));
            }
            let wcfg = WaveEvolveConfig::new(cfg.f64("dx")?, cfg.f64("cfl")?, cfg.f64("T")?)?;
            let res = wave_evolve(
                &map.target_metric(),
                &map,
                &wcfg,
                (cfg.f64("x_min")?, cfg.f64("x_max")?),
            )?;
            let t = report_table(vec![
                ("family", family.into()),
                ("dx", res.dx.into()),
                ("dy", res.dy.into()),
                ("steps", res.steps.into()),
                ("T", wcfg.t_final.into()),
                ("deviation_L2", res.deviation_l2.into()),
                ("max_dev_R", res.max_dev_r.into()),
                ("max_dev_S", res.max_dev_s.into()),
                ("regularized", res.regularized.into()),
            ]);
            emit(cfg, &t, out, stdout)
        }
    }
}

fn run_solve(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let metric = metric_from(cfg)?;
    let params = ReductionParams::new(
        cfg.f64("a")?,
        cfg.f64("b")?,
        cfg.f64("kappa")?,
        cfg.f64("lambda")?,
        sig_from(cfg)?,
    )?;
    let method = cfg.str("method")?;
    let icfg = IntegratorConfig {
        dt: cfg.f64("dt")?,
        method: Method::parse(method).ok_or_else(|| Error::TypeMismatch {
            key: "method".into(),
            value: method.into(),
            expected: "rk4 or verlet",
        })?,
        invariant_tol: cfg.f64("invariant_tol")?,
        max_steps: cfg.usize("max_steps")?,
        ..Default::default()
    };
    let sol = solve(
        &metric,
        &params,
        cfg.f64("r0")?,
        cfg.sign("sign")?,
        (cfg.f64("t0")?, cfg.f64("t1")?),
        &icfg,
    )?;
    let events = sol.turning_events.iter().map(|t| fmt_num(*t)).collect::<Vec<_>>();
    writeln!(stderr, "steps: {}", sol.len() - 1)?;
    writeln!(stderr, "max drift: {}", fmt_num(sol.max_drift()))?;
    writeln!(stderr, "turning events: [{}]", events.join(", "))?;
    for t in &sol.double_root_warnings {
        writeln!(
            stderr,
            "warning: path sits on a double root of Phi at t = {}",
            fmt_num(*t)
        )?;
    }
    emit(cfg, &solution_table(&sol), cfg.opt_str("out"), stdout)?;
    if let Some(path) = cfg.opt_str("map_out") {
        let sample = assemble_map(&metric, &params, &sol, &grid_from(cfg)?)?;
        emit(cfg, &map_table(&sample.points), Some(path), stdout)?;
    }
    Ok(())
}

fn run_closed_form(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let map = closed_form_from(cfg, cfg.str("family")?)?;
    let grid = grid_from(cfg)?;
    let frame = map.frame();
    let mut points = Vec::with_capacity(grid.len());
    for (x, y) in grid.points() {
        let (r, s) = map.eval(x, y)?;
        points.push(MapPoint {
            x,
            y,
            t: frame.t(x, y),
            r,
            s,
        });
    }
    if cfg.flag("recover") {
        let (k, l) = map.recover(0.0).or_else(|_| map.recover(points[0].t))?;
        let line = format!("kappa = {}, lambda = {}", fmt_num(k), fmt_num(l));
        if cfg.has("out") {
            writeln!(stdout, "{line}")?;
        } else {
            writeln!(stderr, "{line}")?;
        }
    }
    let table = if cfg.flag("embed") {
        let c = map
            .c()
            .ok_or_else(|| Error::Invalid("the mixed family has no quadric embedding".into()))?;
        let rows = points
            .iter()
            .map(|p| Ok(((p.x, p.y), embed(map.family(), c, p.r, p.s)?)))
            .collect::<Result<Vec<_>>>()?;
        embedding_table(&rows)
    } else {
        map_table(&points)
    };
    emit(cfg, &table, cfg.opt_str("out"), stdout)
}

fn run_verify(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let family = match cfg.opt_str("family") {
        Some(f) => Some(closed_form_from(cfg, f)?),
        None => None,
    };
    let (metric, sig) = match &family {
        Some(m) => (m.target_metric(), m.signature()),
        None => (metric_from(cfg)?, sig_from(cfg)?),
    };
    let order_raw = cfg.usize("fd_order")?;
    let order = FdOrder::from_int(order_raw as u32).ok_or_else(|| Error::TypeMismatch {
        key: "fd_order".into(),
        value: order_raw.to_string(),
        expected: "2 or 4",
    })?;

    let (source, report): (String, ResidualReport) = match (cfg.opt_str("input"), &family) {
        (Some(path), _) => {
            let file = File::open(path).map_err(|e| Error::Input(format!("cannot open `{path}`: {e}")))?;
            let (headers, rows) = read_numeric_csv(file)?;
            if headers.iter().any(|h| h == "S") {
                let sample = map_from_rows(&headers, &rows)?;
                (format!("map:{path}"), el_residual_sample(&sample, &metric, sig, order)?)
            } else if headers.iter().any(|h| h == "Rprime") {
                let sol = solution_from_rows(&headers, &rows)?;
                let params =
                    ReductionParams::new(cfg.f64("a")?, cfg.f64("b")?, cfg.f64("kappa")?, cfg.f64("lambda")?, sig)?;
                (
                    format!("solution:{path}"),
                    first_integral_residual(&metric, &params, &sol)?,
                )
            } else {
                return Err(Error::Input(format!(
                    "`{path}` has neither map columns (x,y,t,R,S) nor solution columns (t,R,Rprime,H,drift)"
                )));
            }
        }
        (None, Some(map)) => {
            let spec = GridSpec::new(grid_from(cfg)?, cfg.f64("fd_h")?, order)?;
            let rep = match cfg.str("derivs")? {
                "auto" => el_residual(map, &metric, sig, &spec)?,
                "stencil" => el_convergence(map, &metric, sig, &spec)?,
                other => {
                    return Err(Error::TypeMismatch {
                        key: "derivs".into(),
                        value: other.into(),
                        expected: "auto or stencil",
                    })
                }
            };
            (format!("closedform:{}", map.family().label()), rep)
        }
        (None, None) => {
            return Err(Error::MissingKey {
                key: "input or family".into(),
                subcommand: cfg.subcommand.name().into(),
            })
        }
    };
    let worst = |p: Option<(f64, f64)>| (Cell::from(p.map(|q| q.0)), Cell::from(p.map(|q| q.1)));
    let (w1x, w1y) = worst(report.worst_e1);
    let (w2x, w2y) = worst(report.worst_e2);
    let k_spread = if report.k_samples.is_empty() {
        None
    } else {
        let lo = report.k_samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = report.k_samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(hi - lo)
    };
    let t = report_table(vec![
        ("source", Cell::Text(source)),
        ("points", report.points.into()),
        ("sup_E1", report.sup_e1.into()),
        ("sup_E2", report.sup_e2.into()),
        ("worst_E1_x", w1x),
        ("worst_E1_y", w1y),
        ("worst_E2_x", w2x),
        ("worst_E2_y", w2y),
        ("sup_G1", report.sup_g1.into()),
        ("sup_G2", report.sup_g2.into()),
        ("worst_G1_t", report.worst_g1.into()),
        ("worst_G2_t", report.worst_g2.into()),
        ("K_spread", k_spread.into()),
        ("fd_ratio", report.fd_ratio.into()),
        ("observed_order", report.observed_order.into()),
    ]);
    emit(cfg, &t, cfg.opt_str("out"), stdout)
}
