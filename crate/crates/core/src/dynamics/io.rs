use std::fs::File;
use std::path::Path;

use crate::geometry::Point;
use crate::scalar::Scalar;

use super::dataset::{find_duplicate, Dataset, Sample};
use super::DynamicsError;

/// Writes `x1..xn,f1..fn` rows with 17 significant digits.
pub fn save_dataset<T: Scalar>(data: &Dataset<T>, path: impl AsRef<Path>) -> Result<(), DynamicsError> {
    let file = File::create(path.as_ref()).map_err(|e| DynamicsError::Io(e.to_string()))?;
    let mut w = csv::Writer::from_writer(file);
    let n = data.dim().unwrap_or(2);
    let header: Vec<String> = (1..=n)
        .map(|i| format!("x{i}"))
        .chain((1..=n).map(|i| format!("f{i}")))
        .collect();
    w.write_record(&header).map_err(csv_err)?;
    for s in data.samples() {
        let row: Vec<String> = s
            .x
            .coords()
            .iter()
            .chain(s.f.coords())
            .map(|v| format!("{:.17e}", v.as_f64()))
            .collect();
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| DynamicsError::Io(e.to_string()))
}

/// Reads a dataset written by [`save_dataset`]. Line numbers in errors count
/// the header as line 1.
pub fn load_dataset<T: Scalar>(path: impl AsRef<Path>, lipschitz: T) -> Result<Dataset<T>, DynamicsError> {
    let file = File::open(path.as_ref()).map_err(|e| DynamicsError::Io(e.to_string()))?;
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header = r.headers().map_err(csv_err)?.clone();
    let width = header.len();
    if width == 0 || width % 2 != 0 {
        return Err(DynamicsError::Malformed {
            line: 1,
            reason: format!("header has {width} columns, expected x1..xn,f1..fn"),
        });
    }
    let n = width / 2;
    for (i, name) in header.iter().enumerate() {
        let expected = if i < n { format!("x{}", i + 1) } else { format!("f{}", i - n + 1) };
        if name != expected {
            return Err(DynamicsError::Malformed {
                line: 1,
                reason: format!("column {} is `{name}`, expected `{expected}`", i + 1),
            });
        }
    }
    let mut samples = Vec::new();
    let mut lines = Vec::new();
    for (row, record) in r.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| DynamicsError::Malformed {
            line,
            reason: e.to_string(),
        })?;
        if record.len() != width {
            return Err(DynamicsError::Malformed {
                line,
                reason: format!("{} columns, expected {width}", record.len()),
            });
        }
        let mut values = Vec::with_capacity(width);
        for field in record.iter() {
            let v: f64 = field.parse().map_err(|_| DynamicsError::Malformed {
                line,
                reason: format!("`{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(DynamicsError::Malformed {
                    line,
                    reason: format!("non-finite value `{field}`"),
                });
            }
            values.push(T::lit(v));
        }
        let f = values.split_off(n);
        samples.push(Sample::new(Point::new(values), Point::new(f)));
        lines.push(line);
    }
    if let Some((a, b)) = find_duplicate(&samples, T::lit(crate::scalar::TOL_GEO)) {
        return Err(DynamicsError::Malformed {
            line: lines[b],
            reason: format!("duplicate sample point of line {}", lines[a]),
        });
    }
    Dataset::new(samples, lipschitz)
}

fn csv_err(e: csv::Error) -> DynamicsError {
    DynamicsError::Io(e.to_string())
}
