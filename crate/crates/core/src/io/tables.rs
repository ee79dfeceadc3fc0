//! Comma-separated tables: fields, radial kernel profiles, reaction samples
//! and front profiles. Lines starting with `#` are comments; a header row of
//! names is allowed before the numbers.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D};
use crate::kernel::RadialTable;
use crate::reaction::ReactionTable;
use crate::wave::WaveProfile;

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        line,
        message: err.to_string(),
    }
}

/// Numeric rows with their line numbers. A first row that does not parse as
/// numbers is taken as a header.
fn numeric_rows(text: &str) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut rows = Vec::new();
    for (i, record) in reader(text).records().enumerate() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(parse_number).collect();
        match parsed {
            Ok(values) => rows.push((line, values)),
            Err(_) if i == 0 && rows.is_empty() => continue,
            Err(token) => {
                return Err(Error::Parse {
                    line,
                    message: format!("`{token}` is not a number"),
                })
            }
        }
    }
    Ok(rows)
}

fn parse_number(token: &str) -> std::result::Result<f64, String> {
    match token {
        "nan" | "NaN" => Ok(f64::NAN),
        _ => token.parse::<f64>().map_err(|_| token.to_string()),
    }
}

fn columns(rows: &[(usize, Vec<f64>)], allowed: &[usize]) -> Result<usize> {
    let Some((_, first)) = rows.first() else {
        return Err(Error::Parse {
            line: 1,
            message: "table has no rows".into(),
        });
    };
    let width = first.len();
    if !allowed.contains(&width) {
        return Err(Error::Parse {
            line: rows[0].0,
            message: format!("expected {allowed:?} columns, found {width}"),
        });
    }
    for (line, row) in rows {
        if row.len() != width {
            return Err(Error::Parse {
                line: *line,
                message: format!("expected {width} columns, found {}", row.len()),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse {
                line: *line,
                message: "entries must be finite".into(),
            });
        }
    }
    Ok(width)
}

/// Two columns `radius, value`.
pub fn read_radial_table(text: &str) -> Result<RadialTable> {
    let rows = numeric_rows(text)?;
    columns(&rows, &[2])?;
    RadialTable::new(
        rows.iter().map(|r| r.1[0]).collect(),
        rows.iter().map(|r| r.1[1]).collect(),
    )
}

/// Columns `s, f` or `s, f, f'`.
pub fn read_reaction_table(text: &str) -> Result<ReactionTable> {
    let rows = numeric_rows(text)?;
    let width = columns(&rows, &[2, 3])?;
    let points = rows.iter().map(|r| r.1[0]).collect();
    let values = rows.iter().map(|r| r.1[1]).collect();
    let slopes = (width == 3).then(|| rows.iter().map(|r| r.1[2]).collect());
    ReactionTable::new(points, values, slopes)
}

/// `n` rows of `n` values, lowest `y` first; `nan` at obstacle cells.
pub fn write_field_csv(field: &Field) -> Result<String> {
    let grid = field.grid();
    let n = grid.n();
    let mut out = format!(
        "# rows: y ascending from -L+h/2; columns: x ascending; nan marks obstacle cells; L={}, n={n}, farfield={}\n",
        grid.halfwidth(),
        field.farfield()
    );
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    for iy in 0..n {
        let row: Vec<String> = (0..n)
            .map(|ix| {
                let k = grid.index(ix, iy);
                if grid.is_exterior(k) {
                    format!("{:e}", field.get(k))
                } else {
                    "nan".to_string()
                }
            })
            .collect();
        w.write_record(&row).map_err(csv_error)?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    out.push_str(&String::from_utf8_lossy(&body));
    Ok(out)
}

/// Inverse of [`write_field_csv`]; `nan` entries must sit on obstacle cells.
pub fn read_field_csv(text: &str, grid: &Arc<Grid2D>, farfield: f64) -> Result<Field> {
    let rows = numeric_rows(text)?;
    let n = grid.n();
    if rows.len() != n {
        return Err(Error::Parse {
            line: rows.last().map_or(1, |r| r.0),
            message: format!("expected {n} rows, found {}", rows.len()),
        });
    }
    let mut values = vec![0.0; n * n];
    for (iy, (line, row)) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Parse {
                line: *line,
                message: format!("expected {n} columns, found {}", row.len()),
            });
        }
        for (ix, &v) in row.iter().enumerate() {
            let k = grid.index(ix, iy);
            if grid.is_exterior(k) {
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line: *line,
                        message: format!("non-finite value at exterior column {}", ix + 1),
                    });
                }
                values[k] = v;
            }
        }
    }
    Field::new(grid.clone(), values, farfield)
}

/// Columns `z, phi`.
pub fn write_profile_csv(profile: &WaveProfile) -> Result<String> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(["z", "phi"]).map_err(csv_error)?;
    for (k, v) in profile.phi.iter().enumerate() {
        w.write_record([format!("{}", profile.node(k)), format!("{v:e}")])
            .map_err(csv_error)?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8_lossy(&body).into_owned())
}
