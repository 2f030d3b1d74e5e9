//! CSV input and output.

use std::fmt::Write as _;
use std::path::Path;

use crate::CliError;

/// Shortest round-trip text, in exponent form outside [1e-3, 1e6).
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-3..1e6).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// CSV text with a leading comment block.
pub struct CsvOut {
    text: String,
    columns: usize,
}

impl CsvOut {
    pub fn new(comments: &[String], header: &[&str]) -> Self {
        let mut text = String::new();
        for c in comments {
            text.push_str(c);
        }
        text.push_str(&header.join(","));
        text.push('\n');
        Self { text, columns: header.len() }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns);
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// Numeric rows of a CSV file, each with its 1-based line number.
pub struct Table {
    pub path: String,
    pub header: Vec<String>,
    pub rows: Vec<(usize, Vec<f64>)>,
}

impl Table {
    /// Reads the columns named in `columns`, in that order. Lines starting
    /// with `#` are comments.
    pub fn read(path: &Path, columns: &[&str]) -> Result<Self, CliError> {
        let p = path.display().to_string();
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| CliError::Data { path: p.clone(), line: 0, message: e.to_string() })?;
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| CliError::Data { path: p.clone(), line: 1, message: e.to_string() })?
            .iter()
            .map(str::to_string)
            .collect();
        let index: Vec<usize> = columns
            .iter()
            .map(|c| {
                header.iter().position(|h| h == c).ok_or_else(|| CliError::Data {
                    path: p.clone(),
                    line: 1,
                    message: format!("missing column `{c}` (found: {})", header.join(", ")),
                })
            })
            .collect::<Result<_, _>>()?;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| CliError::Data {
                path: p.clone(),
                line: e.position().map_or(0, |q| q.line() as usize),
                message: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |q| q.line() as usize);
            let mut vals = Vec::with_capacity(index.len());
            for (&i, name) in index.iter().zip(columns) {
                let cell = rec.get(i).unwrap_or("");
                let v: f64 = cell.parse().map_err(|_| CliError::Data {
                    path: p.clone(),
                    line,
                    message: format!("column `{name}`: `{cell}` is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(CliError::Data {
                        path: p.clone(),
                        line,
                        message: format!("column `{name}` is not finite"),
                    });
                }
                vals.push(v);
            }
            rows.push((line, vals));
        }
        Ok(Self { path: p, header, rows })
    }

    pub fn has_column(path: &Path, column: &str) -> Result<bool, CliError> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| CliError::Data { path: path.display().to_string(), line: 0, message: e.to_string() })?;
        let h = rdr.headers().map_err(|e| CliError::Data {
            path: path.display().to_string(),
            line: 1,
            message: e.to_string(),
        })?;
        Ok(h.iter().any(|c| c == column))
    }

    /// Maps a 1-based record index from a core data error to its file line.
    pub fn line_of(&self, record: usize) -> usize {
        record.checked_sub(1).and_then(|i| self.rows.get(i)).map_or(0, |r| r.0)
    }
}

/// `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |m: &str| CliError::Usage(format!("invalid grid `{spec}`: {m}"));
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("`{}` is not a number", s.trim())));
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [a, b, c] => {
            let (start, stop, step) = (parse(a)?, parse(b)?, parse(c)?);
            if !(step > 0.0) || stop < start {
                return Err(bad("need step > 0 and stop >= start"));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            if n > 1_000_000 {
                return Err(bad("too many points"));
            }
            (0..=n).map(|i| start + i as f64 * step).collect()
        }
        [_] => spec.split(',').map(parse).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(bad("use start:stop:step or a comma-separated list")),
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad("empty or non-finite"));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("10:30:10").unwrap(), vec![10.0, 20.0, 30.0]);
        assert_eq!(parse_grid("0.1:0.3:0.1").unwrap().len(), 3);
        assert_eq!(parse_grid("1, 2.5,4").unwrap(), vec![1.0, 2.5, 4.0]);
        assert!(parse_grid("1:0:1").is_err());
        assert!(parse_grid("a").is_err());
        assert!(parse_grid("1:2").is_err());
    }

    #[test]
    fn number_format_round_trips() {
        for v in [0.0, 1.0, 0.5, 123456.0, 7.33e-16, 1e6, -2.5e-9, 0.001, 1.0 / 3.0] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(7.33e-16), "7.33e-16");
        assert_eq!(num(90.0), "90");
    }
}
