//! CSV and JSON writers (and readers) for distributions, time series and
//! Wigner fields.
//!
//! CSV files carry one header row. Reals are written with 17 significant
//! digits so every value reads back bit-for-bit. Rows come out in ascending
//! `t`, then `n`, then `k`, so identical runs give identical files.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use qwigner_core::{HermitianMatrix2, KGrid, PhaseSpaceGrid, WignerField};
use serde::{Deserialize, Serialize};

use crate::config::OutputFormat;
use crate::error::{CliError, Result};

pub const DISTRIBUTION_HEADER: &str = "t,n,p";
pub const SERIES_HEADER: &str = "t,value";
pub const FIELD_HEADER: &str = "t,n,k,w_rr,w_ll,re_w_rl,im_w_rl";

/// A real with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub t: u64,
    pub n: i64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: u64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldPoint {
    pub n: i64,
    pub k: f64,
    pub w_rr: f64,
    pub w_ll: f64,
    pub re_w_rl: f64,
    pub im_w_rl: f64,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer(&mut w, value).map_err(|e| CliError::io(path, e.into()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

pub fn write_distribution(path: &Path, format: OutputFormat, rows: &[DistributionRow]) -> Result<()> {
    match format {
        OutputFormat::Json => write_json(path, &rows),
        OutputFormat::Csv => {
            let mut w = create(path)?;
            let io = |e| CliError::io(path, e);
            writeln!(w, "{DISTRIBUTION_HEADER}").map_err(io)?;
            for r in rows {
                writeln!(w, "{},{},{}", r.t, r.n, fmt_real(r.p)).map_err(io)?;
            }
            w.flush().map_err(io)
        }
    }
}

pub fn write_series(path: &Path, format: OutputFormat, rows: &[SeriesRow]) -> Result<()> {
    match format {
        OutputFormat::Json => write_json(path, &rows),
        OutputFormat::Csv => {
            let mut w = create(path)?;
            let io = |e| CliError::io(path, e);
            writeln!(w, "{SERIES_HEADER}").map_err(io)?;
            for r in rows {
                writeln!(w, "{},{}", r.t, fmt_real(r.value)).map_err(io)?;
            }
            w.flush().map_err(io)
        }
    }
}

/// Streaming writer for one field snapshot; rows must be fed in ascending
/// `n`.
pub struct FieldWriter {
    path: PathBuf,
    out: BufWriter<File>,
    format: OutputFormat,
    t: u64,
    k: KGrid,
    first: bool,
    rows: usize,
}

#[derive(Serialize, Deserialize)]
struct FieldHeader {
    t: u64,
    k_count: usize,
    k_min: f64,
    k_max: f64,
}

impl FieldWriter {
    pub fn create(path: &Path, format: OutputFormat, t: u64, k: &KGrid) -> Result<Self> {
        let mut out = create(path)?;
        let head = match format {
            OutputFormat::Csv => writeln!(out, "{FIELD_HEADER}"),
            OutputFormat::Json => write!(
                out,
                "{{\"t\":{t},\"k_count\":{},\"k_min\":{},\"k_max\":{},\"points\":[",
                k.count(),
                json_num(k.min()),
                json_num(k.max())
            ),
        };
        head.map_err(|e| CliError::io(path, e))?;
        Ok(FieldWriter { path: path.to_path_buf(), out, format, t, k: *k, first: true, rows: 0 })
    }

    pub fn write_row(&mut self, n: i64, row: &[HermitianMatrix2]) -> Result<()> {
        let (t, path) = (self.t, &self.path);
        let io = |e| CliError::io(path, e);
        for (j, v) in row.iter().enumerate() {
            let k = self.k.k(j);
            match self.format {
                OutputFormat::Csv => writeln!(
                    self.out,
                    "{t},{n},{},{},{},{},{}",
                    fmt_real(k),
                    fmt_real(v.rr),
                    fmt_real(v.ll),
                    fmt_real(v.rl.re),
                    fmt_real(v.rl.im)
                )
                .map_err(io)?,
                OutputFormat::Json => {
                    if !self.first {
                        self.out.write_all(b",").map_err(io)?;
                    }
                    self.first = false;
                    let p = FieldPoint { n, k, w_rr: v.rr, w_ll: v.ll, re_w_rl: v.rl.re, im_w_rl: v.rl.im };
                    serde_json::to_writer(&mut self.out, &p).map_err(|e| io(e.into()))?;
                }
            }
        }
        self.rows += 1;
        Ok(())
    }

    /// Closes the file and reports how many lattice rows were written.
    pub fn finish(mut self) -> Result<usize> {
        let io = |e| CliError::io(&self.path, e);
        if self.format == OutputFormat::Json {
            self.out.write_all(b"]}\n").map_err(io)?;
        }
        self.out.flush().map_err(io)?;
        Ok(self.rows)
    }
}

fn json_num(x: f64) -> String {
    serde_json::to_string(&x).expect("finite reals serialize")
}

/// Writes the rows of `field` in `[lo, hi]`, optionally even rows only.
pub fn write_field(
    path: &Path,
    format: OutputFormat,
    field: &WignerField,
    rows: Option<(i64, i64)>,
    even_only: bool,
) -> Result<usize> {
    let mut w = FieldWriter::create(path, format, field.t(), field.grid().k_grid())?;
    if let Some((lo, hi)) = rows {
        for n in (lo..=hi).filter(|n| !even_only || n.rem_euclid(2) == 0) {
            let row = field.row(n).ok_or_else(|| {
                CliError::InvalidArgument(format!("row {n} lies outside the field window"))
            })?;
            w.write_row(n, row)?;
        }
    }
    w.finish()
}

fn parse_err(path: &Path, line: usize, what: impl std::fmt::Display) -> CliError {
    CliError::InvalidArgument(format!("{}:{line}: {what}", path.display()))
}

fn detect(path: &Path) -> OutputFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => OutputFormat::Json,
        _ => OutputFormat::Csv,
    }
}

fn csv_rows(path: &Path, header: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let first = lines.next().transpose().map_err(|e| CliError::io(path, e))?;
    if first.as_deref() != Some(header) {
        return Err(parse_err(path, 1, format!("expected header `{header}`")));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        out.push((i + 2, line.split(',').map(str::to_owned).collect()));
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, cols: &[String], i: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = cols.get(i).ok_or_else(|| parse_err(path, line, "missing column"))?;
    raw.parse().map_err(|e| parse_err(path, line, format!("`{raw}`: {e}")))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| parse_err(path, e.line(), e))
}

pub fn read_distribution(path: &Path) -> Result<Vec<DistributionRow>> {
    if detect(path) == OutputFormat::Json {
        return read_json(path);
    }
    csv_rows(path, DISTRIBUTION_HEADER)?
        .iter()
        .map(|(l, c)| {
            Ok(DistributionRow { t: field(path, *l, c, 0)?, n: field(path, *l, c, 1)?, p: field(path, *l, c, 2)? })
        })
        .collect()
}

pub fn read_series(path: &Path) -> Result<Vec<SeriesRow>> {
    if detect(path) == OutputFormat::Json {
        return read_json(path);
    }
    csv_rows(path, SERIES_HEADER)?
        .iter()
        .map(|(l, c)| Ok(SeriesRow { t: field(path, *l, c, 0)?, value: field(path, *l, c, 1)? }))
        .collect()
}

#[derive(Deserialize)]
struct FieldFile {
    #[serde(flatten)]
    header: FieldHeader,
    points: Vec<FieldPoint>,
}

/// Snaps a reconstructed grid edge onto ±π when it is within rounding.
fn snap(x: f64) -> f64 {
    if (x - PI).abs() < 1e-9 {
        PI
    } else if (x + PI).abs() < 1e-9 {
        -PI
    } else {
        x
    }
}

/// Reads a field file back. Rows absent from the file (odd rows of an
/// even-supported export) are zero.
pub fn read_field(path: &Path) -> Result<WignerField> {
    let (t, k, points) = match detect(path) {
        OutputFormat::Json => {
            let f: FieldFile = read_json(path)?;
            let k = KGrid::new(f.header.k_count, snap(f.header.k_min), snap(f.header.k_max))?;
            (f.header.t, k, f.points)
        }
        OutputFormat::Csv => {
            let rows = csv_rows(path, FIELD_HEADER)?;
            let mut t = None;
            let mut points = Vec::with_capacity(rows.len());
            for (l, c) in &rows {
                let row_t: u64 = field(path, *l, c, 0)?;
                if *t.get_or_insert(row_t) != row_t {
                    return Err(parse_err(path, *l, "mixed times in one field file"));
                }
                points.push(FieldPoint {
                    n: field(path, *l, c, 1)?,
                    k: field(path, *l, c, 2)?,
                    w_rr: field(path, *l, c, 3)?,
                    w_ll: field(path, *l, c, 4)?,
                    re_w_rl: field(path, *l, c, 5)?,
                    im_w_rl: field(path, *l, c, 6)?,
                });
            }
            let first_n = points.first().map(|p| p.n).ok_or_else(|| parse_err(path, 2, "no data rows"))?;
            let count = points.iter().take_while(|p| p.n == first_n).count();
            if count < 2 {
                return Err(parse_err(path, 2, "need at least two k points per row"));
            }
            let dk = points[1].k - points[0].k;
            let k_min = points[0].k - 0.5 * dk;
            let k = KGrid::new(count, snap(k_min), snap(k_min + dk * count as f64))?;
            (t.unwrap_or(0), k, points)
        }
    };
    let mut rows: BTreeMap<i64, Vec<HermitianMatrix2>> = BTreeMap::new();
    for p in points {
        rows.entry(p.n)
            .or_default()
            .push(HermitianMatrix2::new(p.w_rr, p.w_ll, C64::new(p.re_w_rl, p.im_w_rl)));
    }
    let (lo, hi) = match (rows.keys().next(), rows.keys().next_back()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Err(parse_err(path, 1, "no data rows")),
    };
    let grid = PhaseSpaceGrid::new(lo, hi, k)?;
    let mut field = WignerField::zeros(grid, t);
    for (n, values) in rows {
        if values.len() != k.count() {
            return Err(parse_err(path, 0, format!("row {n} has {} k points, expected {}", values.len(), k.count())));
        }
        field.row_mut(n).expect("row inside window").copy_from_slice(&values);
    }
    Ok(field)
}
