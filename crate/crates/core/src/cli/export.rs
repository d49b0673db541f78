//! CSV and JSON export, and CSV ingestion for `verify`.
//!
//! Numbers are written in the shortest form that parses back to the same
//! `f64`; very small or very large magnitudes switch to exponent notation.

use std::io::{Read, Write};

use serde_json::{Map, Value as Json};

use crate::closed_forms::EmbeddingR3;
use crate::error::{Error, Result};
use crate::field::RectGrid;
use crate::integrator::{MapPoint, MapSample, OdeSolution};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Num(v as f64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v != 0.0 && v.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

impl Table {
    pub fn new(headers: Vec<&'static str>) -> Self {
        Self {
            headers,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.into());
        w.write_record(&self.headers).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| match c {
                Cell::Num(v) => fmt_num(*v),
                Cell::Text(s) => s.clone(),
                Cell::Empty => String::new(),
            }))
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, meta: Map<String, Json>, out: &mut dyn Write) -> Result<()> {
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Json> = self
                    .headers
                    .iter()
                    .zip(row)
                    .map(|(h, c)| {
                        let v = match c {
                            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Json::Null, Json::Number),
                            Cell::Text(s) => Json::String(s.clone()),
                            Cell::Empty => Json::Null,
                        };
                        (h.to_string(), v)
                    })
                    .collect();
                Json::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("meta".into(), Json::Object(meta));
        doc.insert("rows".into(), Json::Array(rows));
        serde_json::to_writer_pretty(&mut *out, &Json::Object(doc)).map_err(|e| Error::Io(e.into()))?;
        out.write_all(b"\n")?;
        Ok(())
    }

    pub fn write(&self, format: Format, meta: Map<String, Json>, out: &mut dyn Write) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(meta, out),
        }
    }
}

pub fn solution_table(sol: &OdeSolution) -> Table {
    let mut t = Table::new(vec!["t", "R", "Rprime", "H", "drift"]);
    for i in 0..sol.len() {
        let h = sol.hs.get(i).copied();
        t.push(vec![
            sol.ts[i].into(),
            sol.rs[i].into(),
            sol.rps[i].into(),
            h.into(),
            sol.drift[i].into(),
        ]);
    }
    t
}

pub fn map_table(points: &[MapPoint]) -> Table {
    let mut t = Table::new(vec!["x", "y", "t", "R", "S"]);
    for p in points {
        t.push(vec![p.x.into(), p.y.into(), p.t.into(), p.r.into(), p.s.into()]);
    }
    t
}

pub fn embedding_table(rows: &[((f64, f64), EmbeddingR3)]) -> Table {
    let mut t = Table::new(vec!["x", "y", "X", "Y", "Z"]);
    for ((x, y), e) in rows {
        let [a, b, c] = e.point;
        t.push(vec![(*x).into(), (*y).into(), a.into(), b.into(), c.into()]);
    }
    t
}

/// A single-row table of named scalars.
pub fn report_table(fields: Vec<(&'static str, Cell)>) -> Table {
    let (headers, row): (Vec<_>, Vec<_>) = fields.into_iter().unzip();
    Table {
        headers,
        rows: vec![row],
    }
}

/// Numeric CSV: header plus rows of `f64`.
pub fn read_numeric_csv(input: impl Read) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_reader(input);
    let bad = |e: csv::Error| Error::Input(e.to_string());
    let headers: Vec<String> = r.headers().map_err(bad)?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(bad)?;
        let row = rec
            .iter()
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Input(format!("row {}: `{f}` is not a number", i + 2)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((headers, rows))
}

fn column(headers: &[String], name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Input(format!("missing column `{name}`")))
}

/// Rebuilds a [`MapSample`] from `x,y,t,R,S` rows in row-major order.
pub fn map_from_rows(headers: &[String], rows: &[Vec<f64>]) -> Result<MapSample> {
    let [ix, iy, it, ir, is] = ["x", "y", "t", "R", "S"].map(|c| column(headers, c));
    let (ix, iy, it, ir, is) = (ix?, iy?, it?, ir?, is?);
    if rows.is_empty() {
        return Err(Error::Input("map has no rows".into()));
    }
    let y0 = rows[0][iy];
    let nx = rows.iter().take_while(|r| r[iy] == y0).count();
    if nx < 2 || !rows.len().is_multiple_of(nx) {
        return Err(Error::Input("map rows do not form a rectangular grid".into()));
    }
    let ny = rows.len() / nx;
    let grid = RectGrid::new((rows[0][ix], rows[nx - 1][ix]), (y0, rows[rows.len() - 1][iy]), nx, ny);
    let (hx, hy) = (
        (grid.x.1 - grid.x.0) / (nx - 1) as f64,
        (grid.y.1 - grid.y.0) / (ny.max(2) - 1) as f64,
    );
    let mut points = Vec::with_capacity(rows.len());
    for (k, r) in rows.iter().enumerate() {
        let (ex, ey) = grid.point(k);
        if (r[ix] - ex).abs() > 1e-9 * (1.0 + hx.abs()) || (r[iy] - ey).abs() > 1e-9 * (1.0 + hy.abs()) {
            return Err(Error::Input(format!(
                "row {}: ({}, {}) is off the uniform grid, expected ({ex}, {ey})",
                k + 2,
                r[ix],
                r[iy]
            )));
        }
        points.push(MapPoint {
            x: r[ix],
            y: r[iy],
            t: r[it],
            r: r[ir],
            s: r[is],
        });
    }
    Ok(MapSample { grid, points })
}

/// Rebuilds an [`OdeSolution`] (without `H'`) from `t,R,Rprime,H,drift` rows.
pub fn solution_from_rows(headers: &[String], rows: &[Vec<f64>]) -> Result<OdeSolution> {
    let [it, ir, ip, ih, id] = ["t", "R", "Rprime", "H", "drift"].map(|c| column(headers, c));
    let (it, ir, ip, ih, id) = (it?, ir?, ip?, ih?, id?);
    if rows.len() < 2 {
        return Err(Error::Input("solution needs at least two rows".into()));
    }
    let col = |i: usize| rows.iter().map(|r| r[i]).collect::<Vec<_>>();
    Ok(OdeSolution {
        ts: col(it),
        rs: col(ir),
        rps: col(ip),
        hs: col(ih),
        hps: Vec::new(),
        drift: col(id),
        turning_events: Vec::new(),
        double_root_warnings: Vec::new(),
    })
}
