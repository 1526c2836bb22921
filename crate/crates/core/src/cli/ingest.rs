use std::path::Path;

use crate::data::ItemResponseMatrix;
use crate::error::{Error, Result};

/// How to read an item-response CSV file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CsvOptions {
    /// First line holds column names.
    pub header: bool,
    /// Column holding group labels: a header name, or a 1-based index.
    pub group_col: Option<String>,
}

struct Table {
    header: Option<Vec<String>>,
    rows: Vec<Vec<String>>,
}

fn csv_error(e: csv::Error, row: usize) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(row);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            row: line,
            col: 0,
            message: format!("{other:?}"),
        },
    }
}

fn read_table(path: &Path, header: bool) -> Result<Table> {
    let file = std::fs::File::open(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let head = if header {
        Some(reader.headers().map_err(|e| csv_error(e, 0))?.iter().map(str::to_string).collect())
    } else {
        None
    };
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(e, i + 1))?;
        rows.push(rec.iter().map(str::to_string).collect::<Vec<_>>());
    }
    let expected = head.as_ref().map(Vec::len).or_else(|| rows.first().map(Vec::len)).unwrap_or(0);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != expected {
            return Err(Error::NonRectangular {
                row: i + 1,
                expected,
                found: r.len(),
            });
        }
    }
    Ok(Table { header: head, rows })
}

/// Parses the numeric cells, skipping column `skip` (0-based). Row and
/// column numbers in errors are 1-based and count data rows only.
fn to_matrix<'a>(rows: impl Iterator<Item = &'a Vec<String>>, skip: Option<usize>) -> Result<ItemResponseMatrix> {
    let mut values = Vec::new();
    let mut missing = Vec::new();
    let mut n = 0;
    let mut cols = 0;
    for (i, r) in rows.enumerate() {
        n += 1;
        cols = 0;
        for (j, cell) in r.iter().enumerate() {
            if Some(j) == skip {
                continue;
            }
            cols += 1;
            if cell.is_empty() || cell.eq_ignore_ascii_case("na") {
                missing.push((i + 1, j + 1));
                values.push(0.0);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: i + 1,
                col: j + 1,
                message: format!("'{cell}' is not a number"),
            })?;
            if !v.is_finite() {
                missing.push((i + 1, j + 1));
            }
            values.push(v);
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingData(missing));
    }
    if n < 2 || cols < 2 {
        return Err(Error::DegenerateInput(format!(
            "need at least 2 rows and 2 item columns, got {n} x {cols}"
        )));
    }
    ItemResponseMatrix::new(n, cols, values)
}

/// Reads one matrix: rows are examinees, columns items.
pub fn ingest_csv(path: &Path, opts: &CsvOptions) -> Result<ItemResponseMatrix> {
    if opts.group_col.is_some() {
        return Err(Error::InvalidArgument("use ingest_groups for files with a group column".into()));
    }
    let t = read_table(path, opts.header)?;
    to_matrix(t.rows.iter(), None)
}

fn resolve_column(spec: &str, header: Option<&[String]>, width: usize) -> Result<usize> {
    if let Some(h) = header {
        if let Some(pos) = h.iter().position(|c| c == spec) {
            return Ok(pos);
        }
    }
    match spec.parse::<usize>() {
        Ok(i) if i >= 1 && i <= width => Ok(i - 1),
        _ => Err(Error::InvalidArgument(format!("group column '{spec}' not found"))),
    }
}

/// Splits a file into groups by the values of `opts.group_col`. Groups
/// appear in order of first occurrence; row order within a group is kept.
pub fn ingest_groups(path: &Path, opts: &CsvOptions) -> Result<Vec<(String, ItemResponseMatrix)>> {
    let spec = opts
        .group_col
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("no group column given".into()))?;
    let t = read_table(path, opts.header)?;
    let width = t.header.as_ref().map(Vec::len).or_else(|| t.rows.first().map(Vec::len)).unwrap_or(0);
    let col = resolve_column(spec, t.header.as_deref(), width)?;
    let mut labels: Vec<String> = Vec::new();
    for r in &t.rows {
        if !labels.contains(&r[col]) {
            labels.push(r[col].clone());
        }
    }
    labels
        .into_iter()
        .map(|label| {
            let m = to_matrix(t.rows.iter().filter(|r| r[col] == label), Some(col))?;
            Ok((label, m))
        })
        .collect()
}
