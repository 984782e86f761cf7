//! File formats: comma-delimited text with headers for every interchange
//! table, 17 significant digits for floats so every value round-trips
//! exactly, and a schema-version comment line on factor files. Loaders
//! report the offending 1-based line (header included) on parse failures.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linking::{EffectSummaries, FabFit, FeatureSource, HypothesisResult, SummaryEntry};
use crate::sim::{NullReport, PowerReport};
use crate::tensor::{Likelihood, SliceData, TensorDataset};
use crate::Real;

/// Schema tag carried as the first line of factor files.
pub const FACTORS_SCHEMA: &str = "# factors-v1";

/// 17 significant digits: enough to reproduce any f64 bit pattern.
fn fmt_real(x: Real) -> String {
    format!("{x:.16e}")
}

fn parse_error(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn parse_real_field(path: &Path, line: u64, name: &str, field: &str) -> Result<Real> {
    field
        .parse::<Real>()
        .map_err(|_| parse_error(path, line, format!("column {name}: not a number: {field:?}")))
}

fn parse_int_field<T: std::str::FromStr>(
    path: &Path,
    line: u64,
    name: &str,
    field: &str,
) -> Result<T> {
    field
        .parse::<T>()
        .map_err(|_| parse_error(path, line, format!("column {name}: not an integer: {field:?}")))
}

fn open_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path)?;
    Ok(csv::ReaderBuilder::new().flexible(false).from_reader(file))
}

fn check_header<R: std::io::Read>(
    reader: &mut csv::Reader<R>,
    path: &Path,
    expected: &[&str],
    line: u64,
) -> Result<()> {
    let headers = reader
        .headers()
        .map_err(|e| parse_error(path, line, format!("unreadable header: {e}")))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(parse_error(
            path,
            line,
            format!("expected header {}, got {}", expected.join(","), got.join(",")),
        ));
    }
    Ok(())
}

fn next_record(
    item: std::result::Result<csv::StringRecord, csv::Error>,
    path: &Path,
    width: usize,
) -> Result<csv::StringRecord> {
    let record = item.map_err(|e| {
        let line = e
            .position()
            .map(|p| p.line())
            .unwrap_or(0);
        parse_error(path, line, format!("malformed record: {e}"))
    })?;
    if record.len() != width {
        return Err(parse_error(
            path,
            record_line(&record),
            format!("expected {width} fields, got {}", record.len()),
        ));
    }
    Ok(record)
}

// ---------------------------------------------------------------------------
// Tensor: long form `row,col,modality,value`, empty value = missing cell.
// ---------------------------------------------------------------------------

/// Load a tensor from long-form rows `row,col,modality,value`. The grid is
/// the union of row and column keys in order of first appearance; cells
/// absent from the file (or present with an empty value) are unobserved.
/// Each modality's likelihood must appear in `likelihoods`; observed values
/// are checked against the modality's support as they are read.
pub fn load_tensor(
    path: &Path,
    likelihoods: &BTreeMap<String, Likelihood>,
) -> Result<TensorDataset> {
    let mut reader = open_reader(path)?;
    check_header(&mut reader, path, &["row", "col", "modality", "value"], 1)?;

    struct Cell {
        row: usize,
        col: usize,
        slice: usize,
        value: Option<Real>,
        line: u64,
    }
    let mut row_names: Vec<String> = Vec::new();
    let mut col_names: Vec<String> = Vec::new();
    let mut slice_names: Vec<String> = Vec::new();
    let mut row_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut col_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut slice_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut seen: BTreeMap<(usize, usize, usize), u64> = BTreeMap::new();
    let mut cells: Vec<Cell> = Vec::new();

    for item in reader.records() {
        let record = next_record(item, path, 4)?;
        let line = record_line(&record);
        let row = *row_index.entry(record[0].to_string()).or_insert_with(|| {
            row_names.push(record[0].to_string());
            row_names.len() - 1
        });
        let col = *col_index.entry(record[1].to_string()).or_insert_with(|| {
            col_names.push(record[1].to_string());
            col_names.len() - 1
        });
        let slice_name = record[2].to_string();
        let slice = *slice_index.entry(slice_name.clone()).or_insert_with(|| {
            slice_names.push(slice_name.clone());
            slice_names.len() - 1
        });
        let lik = *likelihoods.get(&slice_names[slice]).ok_or_else(|| {
            parse_error(
                path,
                line,
                format!("modality {:?} has no declared likelihood", slice_names[slice]),
            )
        })?;
        if let Some(prev) = seen.insert((row, col, slice), line) {
            return Err(parse_error(
                path,
                line,
                format!(
                    "duplicate cell ({}, {}, {}); first seen at line {prev}",
                    &record[0], &record[1], &record[2]
                ),
            ));
        }
        let value = if record[3].is_empty() {
            None
        } else {
            let y = parse_real_field(path, line, "value", &record[3])?;
            if !y.is_finite() {
                return Err(parse_error(path, line, format!("non-finite value {y}")));
            }
            match lik {
                Likelihood::Probit if y != 0.0 && y != 1.0 => {
                    return Err(parse_error(
                        path,
                        line,
                        format!("probit value {y} is not 0 or 1"),
                    ));
                }
                Likelihood::Tobit if y < 0.0 => {
                    return Err(parse_error(
                        path,
                        line,
                        format!("tobit value {y} is negative"),
                    ));
                }
                _ => {}
            }
            Some(y)
        };
        cells.push(Cell {
            row,
            col,
            slice,
            value,
            line,
        });
    }
    if row_names.is_empty() || slice_names.is_empty() {
        return Err(parse_error(path, 1, "tensor file contains no data rows"));
    }

    let (l, g) = (row_names.len(), col_names.len());
    let mut slices: Vec<SliceData> = slice_names
        .iter()
        .map(|name| SliceData {
            name: name.clone(),
            likelihood: likelihoods[name],
            values: DMatrix::zeros(l, g),
            observed: DMatrix::from_element(l, g, false),
        })
        .collect();
    for cell in cells {
        if let Some(y) = cell.value {
            slices[cell.slice].values[(cell.row, cell.col)] = y;
            slices[cell.slice].observed[(cell.row, cell.col)] = true;
        }
        let _ = cell.line;
    }
    let dataset = TensorDataset {
        row_names,
        col_names,
        slices,
    };
    dataset.validate()?;
    Ok(dataset)
}

/// Write a tensor in the long form read by [`load_tensor`]: every cell of
/// every slice, with an empty value field for unobserved cells.
pub fn save_tensor(path: &Path, data: &TensorDataset) -> Result<()> {
    data.validate()?;
    let mut w = csv::Writer::from_writer(fs::File::create(path)?);
    w.write_record(["row", "col", "modality", "value"])
        .map_err(csv_write_error)?;
    for slice in &data.slices {
        for l in 0..data.n_rows() {
            for g in 0..data.n_cols() {
                let value = if slice.observed[(l, g)] {
                    fmt_real(slice.values[(l, g)])
                } else {
                    String::new()
                };
                w.write_record([
                    data.row_names[l].as_str(),
                    data.col_names[g].as_str(),
                    slice.name.as_str(),
                    value.as_str(),
                ])
                .map_err(csv_write_error)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_write_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Validation(format!("csv write failed: {other:?}")),
    }
}

// ---------------------------------------------------------------------------
// Effect summaries: `id,row,col,ybar,s,n`.
// ---------------------------------------------------------------------------

/// Load per-hypothesis summaries. Hypotheses with n < 2 are rejected in one
/// error listing every offending id.
pub fn load_summaries(path: &Path) -> Result<EffectSummaries> {
    let mut reader = open_reader(path)?;
    check_header(&mut reader, path, &["id", "row", "col", "ybar", "s", "n"], 1)?;
    let mut entries = Vec::new();
    for item in reader.records() {
        let record = next_record(item, path, 6)?;
        let line = record_line(&record);
        entries.push(SummaryEntry {
            id: record[0].to_string(),
            row_key: record[1].to_string(),
            col_key: record[2].to_string(),
            ybar: parse_real_field(path, line, "ybar", &record[3])?,
            s: parse_real_field(path, line, "s", &record[4])?,
            n: parse_int_field(path, line, "n", &record[5])?,
        });
    }
    let undersized: Vec<&str> = entries
        .iter()
        .filter(|e| e.n < 2)
        .map(|e| e.id.as_str())
        .collect();
    if !undersized.is_empty() {
        return Err(Error::Validation(format!(
            "hypotheses with n < 2: {}",
            undersized.join(", ")
        )));
    }
    let summaries = EffectSummaries { entries };
    summaries.validate()?;
    Ok(summaries)
}

/// Write summaries in the form read by [`load_summaries`].
pub fn write_summaries(path: &Path, summaries: &EffectSummaries) -> Result<()> {
    let mut w = csv::Writer::from_writer(fs::File::create(path)?);
    w.write_record(["id", "row", "col", "ybar", "s", "n"])
        .map_err(csv_write_error)?;
    for e in &summaries.entries {
        w.write_record([
            e.id.as_str(),
            e.row_key.as_str(),
            e.col_key.as_str(),
            &fmt_real(e.ybar),
            &fmt_real(e.s),
            &e.n.to_string(),
        ])
        .map_err(csv_write_error)?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Factor files: `<prefix>_u.csv` / `<prefix>_v.csv`, schema comment line,
// header `key,f1..fd`, one entity per row.
// ---------------------------------------------------------------------------

fn factor_paths(prefix: &str) -> (PathBuf, PathBuf) {
    (
        PathBuf::from(format!("{prefix}_u.csv")),
        PathBuf::from(format!("{prefix}_v.csv")),
    )
}

fn write_factor_matrix(path: &Path, names: &[String], m: &DMatrix<Real>) -> Result<()> {
    let mut file = fs::File::create(path)?;
    writeln!(file, "{FACTORS_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(file);
    let mut header = vec!["key".to_string()];
    header.extend((1..=m.ncols()).map(|j| format!("f{j}")));
    w.write_record(&header).map_err(csv_write_error)?;
    for (i, name) in names.iter().enumerate() {
        let mut record = vec![name.clone()];
        record.extend((0..m.ncols()).map(|j| fmt_real(m[(i, j)])));
        w.write_record(&record).map_err(csv_write_error)?;
    }
    w.flush()?;
    Ok(())
}

fn read_factor_matrix(path: &Path) -> Result<(Vec<String>, DMatrix<Real>)> {
    let content = fs::read_to_string(path)?;
    let Some((first, rest)) = content.split_once('\n') else {
        return Err(parse_error(path, 1, "empty factor file"));
    };
    if first.trim_end_matches('\r') != FACTORS_SCHEMA {
        return Err(parse_error(
            path,
            1,
            format!("missing schema comment {FACTORS_SCHEMA:?}"),
        ));
    }
    let mut reader = csv::Reader::from_reader(rest.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| parse_error(path, 2, format!("unreadable header: {e}")))?;
    let got: Vec<&str> = headers.iter().collect();
    if got.first() != Some(&"key") || got.len() < 2 {
        return Err(parse_error(
            path,
            2,
            format!("expected header key,f1,..., got {}", got.join(",")),
        ));
    }
    let d = got.len() - 1;
    let mut names = Vec::new();
    let mut rows: Vec<Vec<Real>> = Vec::new();
    for item in reader.records() {
        let record = next_record(item, path, d + 1)?;
        // The schema comment line is outside the csv reader's view.
        let line = record_line(&record) + 1;
        names.push(record[0].to_string());
        let mut row = Vec::with_capacity(d);
        for j in 0..d {
            let x = parse_real_field(path, line, &format!("f{}", j + 1), &record[j + 1])?;
            if !x.is_finite() {
                return Err(parse_error(path, line, format!("non-finite factor entry {x}")));
            }
            row.push(x);
        }
        rows.push(row);
    }
    if names.is_empty() {
        return Err(parse_error(path, 2, "factor file has no rows"));
    }
    let m = DMatrix::from_fn(names.len(), d, |i, j| rows[i][j]);
    Ok((names, m))
}

/// Export a factor pair as `<prefix>_u.csv` and `<prefix>_v.csv`; returns
/// the two paths written.
pub fn export_factors(
    prefix: &str,
    u: &DMatrix<Real>,
    v: &DMatrix<Real>,
    row_names: &[String],
    col_names: &[String],
) -> Result<(PathBuf, PathBuf)> {
    if row_names.len() != u.nrows() || col_names.len() != v.nrows() {
        return Err(Error::Validation(
            "factor key counts must match factor row counts".into(),
        ));
    }
    let (u_path, v_path) = factor_paths(prefix);
    write_factor_matrix(&u_path, row_names, u)?;
    write_factor_matrix(&v_path, col_names, v)?;
    Ok((u_path, v_path))
}

/// Load `<prefix>_u.csv` and `<prefix>_v.csv` into a Kronecker feature
/// source (the design row for hypothesis (l, g) is V_g ⊗ U_l; the product
/// is never materialized here).
pub fn load_factors(prefix: &str, intercept: bool) -> Result<FeatureSource> {
    let (u_path, v_path) = factor_paths(prefix);
    let (row_names, u) = read_factor_matrix(&u_path)?;
    let (col_names, v) = read_factor_matrix(&v_path)?;
    FeatureSource::kronecker(u, v, &row_names, &col_names, intercept)
}

// ---------------------------------------------------------------------------
// Results table: `id,t,dof,b_fab,m_tilde,v_tilde,p_classical,p_fab,
// q_classical,q_fab,fold`.
// ---------------------------------------------------------------------------

const RESULTS_HEADER: [&str; 11] = [
    "id",
    "t",
    "dof",
    "b_fab",
    "m_tilde",
    "v_tilde",
    "p_classical",
    "p_fab",
    "q_classical",
    "q_fab",
    "fold",
];

/// Write the per-hypothesis results table of a fit.
pub fn write_results(path: &Path, fit: &FabFit) -> Result<()> {
    let mut w = csv::Writer::from_writer(fs::File::create(path)?);
    w.write_record(RESULTS_HEADER).map_err(csv_write_error)?;
    for r in &fit.records {
        w.write_record([
            r.id.as_str(),
            &fmt_real(r.t),
            &fmt_real(r.dof),
            &fmt_real(r.b_fab),
            &fmt_real(r.m_tilde),
            &fmt_real(r.v_tilde),
            &fmt_real(r.p_classical),
            &fmt_real(r.p_fab),
            &fmt_real(r.q_classical),
            &fmt_real(r.q_fab),
            &r.fold.to_string(),
        ])
        .map_err(csv_write_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a results table back into hypothesis records.
pub fn read_results(path: &Path) -> Result<Vec<HypothesisResult>> {
    let mut reader = open_reader(path)?;
    check_header(&mut reader, path, &RESULTS_HEADER, 1)?;
    let mut records = Vec::new();
    for item in reader.records() {
        let record = next_record(item, path, 11)?;
        let line = record_line(&record);
        records.push(HypothesisResult {
            id: record[0].to_string(),
            t: parse_real_field(path, line, "t", &record[1])?,
            dof: parse_real_field(path, line, "dof", &record[2])?,
            b_fab: parse_real_field(path, line, "b_fab", &record[3])?,
            m_tilde: parse_real_field(path, line, "m_tilde", &record[4])?,
            v_tilde: parse_real_field(path, line, "v_tilde", &record[5])?,
            p_classical: parse_real_field(path, line, "p_classical", &record[6])?,
            p_fab: parse_real_field(path, line, "p_fab", &record[7])?,
            q_classical: parse_real_field(path, line, "q_classical", &record[8])?,
            q_fab: parse_real_field(path, line, "q_fab", &record[9])?,
            fold: parse_int_field(path, line, "fold", &record[10])?,
        });
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// Simulation report tables.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct FdrRow {
    pub method: String,
    pub mc_fdr: Real,
    pub mc_se: Real,
    pub target_fdr: Real,
    pub datasets: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KsRow {
    pub method: String,
    pub ks_stat: Real,
    pub ks_p: Real,
    pub pooled_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub alpha: Real,
    pub rate_classical: Real,
    pub rate_fab: Real,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistRow {
    pub bin_lo: Real,
    pub bin_hi: Real,
    pub count_classical: usize,
    pub count_fab: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerCurveRow {
    pub tau2: Real,
    pub alpha: Real,
    pub mean_classical: Real,
    pub mean_fab: Real,
    pub mean_oracle: Real,
    pub median_classical: Real,
    pub median_fab: Real,
    pub median_oracle: Real,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerCountRow {
    pub tau2: Real,
    pub dataset: usize,
    pub classical: usize,
    pub fab: usize,
    pub oracle: usize,
}

/// Write the all-null study report as four tables:
/// `<prefix>_fdr.csv`, `<prefix>_ks.csv`, `<prefix>_curves.csv`,
/// `<prefix>_hist.csv`. Returns the paths written.
pub fn write_null_report(prefix: &str, report: &NullReport) -> Result<Vec<PathBuf>> {
    let fdr_path = PathBuf::from(format!("{prefix}_fdr.csv"));
    let ks_path = PathBuf::from(format!("{prefix}_ks.csv"));
    let curves_path = PathBuf::from(format!("{prefix}_curves.csv"));
    let hist_path = PathBuf::from(format!("{prefix}_hist.csv"));

    let mut w = csv::Writer::from_writer(fs::File::create(&fdr_path)?);
    w.write_record(["method", "mc_fdr", "mc_se", "target_fdr", "datasets"])
        .map_err(csv_write_error)?;
    for (method, fdr, se) in [
        ("classical", report.mc_fdr_classical, report.mc_se_classical),
        ("fab", report.mc_fdr_fab, report.mc_se_fab),
    ] {
        w.write_record([
            method,
            &fmt_real(fdr),
            &fmt_real(se),
            &fmt_real(report.design.target_fdr),
            &report.design.n_datasets.to_string(),
        ])
        .map_err(csv_write_error)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_writer(fs::File::create(&ks_path)?);
    w.write_record(["method", "ks_stat", "ks_p", "pooled_count"])
        .map_err(csv_write_error)?;
    for (method, stat, p) in [
        ("classical", report.ks_stat_classical, report.ks_p_classical),
        ("fab", report.ks_stat_fab, report.ks_p_fab),
    ] {
        w.write_record([
            method,
            &fmt_real(stat),
            &fmt_real(p),
            &report.pooled_count.to_string(),
        ])
        .map_err(csv_write_error)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_writer(fs::File::create(&curves_path)?);
    w.write_record(["alpha", "rate_classical", "rate_fab"])
        .map_err(csv_write_error)?;
    for t in &report.thresholds {
        w.write_record([
            &fmt_real(t.alpha),
            &fmt_real(t.rate_classical),
            &fmt_real(t.rate_fab),
        ])
        .map_err(csv_write_error)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_writer(fs::File::create(&hist_path)?);
    w.write_record(["bin_lo", "bin_hi", "count_classical", "count_fab"])
        .map_err(csv_write_error)?;
    let bins = report.hist_fab.len();
    for i in 0..bins {
        let lo = i as Real / bins as Real;
        let hi = (i + 1) as Real / bins as Real;
        w.write_record([
            &fmt_real(lo),
            &fmt_real(hi),
            &report.hist_classical[i].to_string(),
            &report.hist_fab[i].to_string(),
        ])
        .map_err(csv_write_error)?;
    }
    w.flush()?;

    Ok(vec![fdr_path, ks_path, curves_path, hist_path])
}

pub fn read_fdr_table(path: &Path) -> Result<Vec<FdrRow>> {
    let mut reader = open_reader(path)?;
    check_header(
        &mut reader,
        path,
        &["method", "mc_fdr", "mc_se", "target_fdr", "datasets"],
        1,
    )?;
    let mut rows = Vec::new();
    for item in reader.records() {
        let record = next_record(item, path, 5)?;
        let line = record_line(&record);
        rows.push(FdrRow {
            method: record[0].to_string(),
            mc_fdr: parse_real_field(path, line, "mc_fdr", &record[1])?,
            mc_se: parse_real_field(path, line, "mc_se", &record[2])?,
            target_fdr: parse_real_field(path, line, "target_fdr", &record[3])?,
            datasets: parse_int_field(path, line, "datasets", &record[4])?,
        });
    }
    Ok(rows)
}

pub fn read_ks_table(path: &Path) -> Result<Vec<KsRow>> {
    let mut reader = open_reader(path)?;
    check_header(&mut reader, path, &["method", "ks_stat", "ks_p", "pooled_count"], 1)?;
    let mut rows = Vec::new();
    for item in reader.records() {
        let record = next_record(item, path, 4)?;
        let line = record_line(&record);
        rows.push(KsRow {
            method: record[0].to_string(),
            ks_stat: parse_real_field(path, line, "ks_stat", &record[1])?,
            ks_p: parse_real_field(path, line, "ks_p", &record[2])?,
            pooled_count: parse_int_field(path, line, "pooled_count", &record[3])?,
        });
    }
    Ok(rows)
}

pub fn read_curve_table(path: &Path) -> Result<Vec<CurveRow>> {
    let mut reader = open_reader(path)?;
    check_header(&mut reader, path, &["alpha", "rate_classical", "rate_fab"], 1)?;
    let mut rows = Vec::new();
    for item in reader.records() {
        let record = next_record(item, path, 3)?;
        let line = record_line(&record);
        rows.push(CurveRow {
            alpha: parse_real_field(path, line, "alpha", &record[0])?,
            rate_classical: parse_real_field(path, line, "rate_classical", &record[1])?,
            rate_fab: parse_real_field(path, line, "rate_fab", &record[2])?,
        });
    }
    Ok(rows)
}

pub fn read_hist_table(path: &Path) -> Result<Vec<HistRow>> {
    let mut reader = open_reader(path)?;
    check_header(
        &mut reader,
        path,
        &["bin_lo", "bin_hi", "count_classical", "count_fab"],
        1,
    )?;
    let mut rows = Vec::new();
    for item in reader.records() {
        let record = next_record(item, path, 4)?;
        let line = record_line(&record);
        rows.push(HistRow {
            bin_lo: parse_real_field(path, line, "bin_lo", &record[0])?,
            bin_hi: parse_real_field(path, line, "bin_hi", &record[1])?,
            count_classical: parse_int_field(path, line, "count_classical", &record[2])?,
            count_fab: parse_int_field(path, line, "count_fab", &record[3])?,
        });
    }
    Ok(rows)
}

/// Write the signal-study report as two tables:
/// `<prefix>_power_curves.csv` (mean/median discovery curves) and
/// `<prefix>_power_counts.csv` (per-dataset counts at the target FDR).
/// Returns the paths written.
pub fn write_power_report(prefix: &str, report: &PowerReport) -> Result<Vec<PathBuf>> {
    let curves_path = PathBuf::from(format!("{prefix}_power_curves.csv"));
    let counts_path = PathBuf::from(format!("{prefix}_power_counts.csv"));

    let mut w = csv::Writer::from_writer(fs::File::create(&curves_path)?);
    w.write_record([
        "tau2",
        "alpha",
        "mean_classical",
        "mean_fab",
        "mean_oracle",
        "median_classical",
        "median_fab",
        "median_oracle",
    ])
    .map_err(csv_write_error)?;
    for cell in &report.cells {
        for (k, &alpha) in report.alphas.iter().enumerate() {
            w.write_record([
                &fmt_real(cell.tau2),
                &fmt_real(alpha),
                &fmt_real(cell.mean_classical[k]),
                &fmt_real(cell.mean_fab[k]),
                &fmt_real(cell.mean_oracle[k]),
                &fmt_real(cell.median_classical[k]),
                &fmt_real(cell.median_fab[k]),
                &fmt_real(cell.median_oracle[k]),
            ])
            .map_err(csv_write_error)?;
        }
    }
    w.flush()?;

    // Threshold on the grid closest to the design's target FDR.
    let target_k = report
        .alphas
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            let da = (*a - report.design.target_fdr).abs();
            let db = (*b - report.design.target_fdr).abs();
            da.partial_cmp(&db).expect("finite grid")
        })
        .map(|(k, _)| k)
        .unwrap_or(0);
    let mut w = csv::Writer::from_writer(fs::File::create(&counts_path)?);
    w.write_record(["tau2", "dataset", "classical", "fab", "oracle"])
        .map_err(csv_write_error)?;
    for cell in &report.cells {
        for i in 0..cell.counts_fab.len() {
            w.write_record([
                &fmt_real(cell.tau2),
                &i.to_string(),
                &cell.counts_classical[i][target_k].to_string(),
                &cell.counts_fab[i][target_k].to_string(),
                &cell.counts_oracle[i][target_k].to_string(),
            ])
            .map_err(csv_write_error)?;
        }
    }
    w.flush()?;

    Ok(vec![curves_path, counts_path])
}

pub fn read_power_curve_table(path: &Path) -> Result<Vec<PowerCurveRow>> {
    let mut reader = open_reader(path)?;
    check_header(
        &mut reader,
        path,
        &[
            "tau2",
            "alpha",
            "mean_classical",
            "mean_fab",
            "mean_oracle",
            "median_classical",
            "median_fab",
            "median_oracle",
        ],
        1,
    )?;
    let mut rows = Vec::new();
    for item in reader.records() {
        let record = next_record(item, path, 8)?;
        let line = record_line(&record);
        rows.push(PowerCurveRow {
            tau2: parse_real_field(path, line, "tau2", &record[0])?,
            alpha: parse_real_field(path, line, "alpha", &record[1])?,
            mean_classical: parse_real_field(path, line, "mean_classical", &record[2])?,
            mean_fab: parse_real_field(path, line, "mean_fab", &record[3])?,
            mean_oracle: parse_real_field(path, line, "mean_oracle", &record[4])?,
            median_classical: parse_real_field(path, line, "median_classical", &record[5])?,
            median_fab: parse_real_field(path, line, "median_fab", &record[6])?,
            median_oracle: parse_real_field(path, line, "median_oracle", &record[7])?,
        });
    }
    Ok(rows)
}

pub fn read_power_count_table(path: &Path) -> Result<Vec<PowerCountRow>> {
    let mut reader = open_reader(path)?;
    check_header(
        &mut reader,
        path,
        &["tau2", "dataset", "classical", "fab", "oracle"],
        1,
    )?;
    let mut rows = Vec::new();
    for item in reader.records() {
        let record = next_record(item, path, 5)?;
        let line = record_line(&record);
        rows.push(PowerCountRow {
            tau2: parse_real_field(path, line, "tau2", &record[0])?,
            dataset: parse_int_field(path, line, "dataset", &record[1])?,
            classical: parse_int_field(path, line, "classical", &record[2])?,
            fab: parse_int_field(path, line, "fab", &record[3])?,
            oracle: parse_int_field(path, line, "oracle", &record[4])?,
        });
    }
    Ok(rows)
}
