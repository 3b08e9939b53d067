//! Matrix file formats.
//!
//! JSON: `{"n": 3, "entries": [row-major n² numbers], "name": "optional"}`.
//! CSV: `n` lines of `n` comma-separated decimals. Blank lines and lines
//! starting with `#` are ignored.
//!
//! Floats are written in shortest round-trip form and parsed with correct
//! rounding, so a write/read cycle is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::GeneratorMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub entries: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl MatrixFile {
    pub fn from_generator(m: &GeneratorMatrix, name: Option<&str>) -> Self {
        Self {
            n: m.n(),
            entries: m.to_row_major(),
            name: name.map(str::to_owned),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.len() != self.n * self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n * self.n,
                got: self.entries.len(),
            });
        }
        if let Some(pos) = self.entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / self.n.max(1),
                col: pos % self.n.max(1),
            });
        }
        Ok(())
    }

    pub fn to_generator(&self) -> Result<GeneratorMatrix> {
        self.validate()?;
        GeneratorMatrix::from_row_major(self.n, &self.entries)
    }

    /// Multiplies every entry by `num/den`, evaluated as `(x·num)/den` so
    /// integer inputs scaled by `1/3` are correctly rounded.
    pub fn scaled(mut self, scale: Scale) -> Self {
        for x in &mut self.entries {
            *x = *x * scale.num / scale.den;
        }
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.entries.chunks(self.n.max(1)) {
            let line: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }
}

/// Rational ingestion factor such as `1/3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scale {
    pub num: f64,
    pub den: f64,
}

impl std::str::FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("invalid scale `{s}`, expected e.g. 1/3 or 0.5"));
        let (num, den) = match s.split_once('/') {
            Some((a, b)) => (
                a.trim().parse::<f64>().map_err(|_| bad())?,
                b.trim().parse::<f64>().map_err(|_| bad())?,
            ),
            None => (s.trim().parse::<f64>().map_err(|_| bad())?, 1.0),
        };
        if !(num.is_finite() && den.is_finite()) || den == 0.0 {
            return Err(bad());
        }
        Ok(Self { num, den })
    }
}

pub fn parse_json(text: &str) -> Result<MatrixFile> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    file.validate()?;
    Ok(file)
}

pub fn parse_csv(text: &str) -> Result<MatrixFile> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut first_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if rows.is_empty() {
            first_line = line_no;
        }
        let mut row = Vec::new();
        let mut offset = 0;
        for field in raw.split(',') {
            let column = offset + 1 + (field.len() - field.trim_start().len());
            let value = field.trim().parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                column,
                message: format!("`{}` is not a number", field.trim()),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    column,
                    message: "non-finite value".into(),
                });
            }
            row.push(value);
            offset += field.len() + 1;
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    line: line_no,
                    column: 1,
                    message: format!("row has {} fields, line {first_line} has {}", row.len(), first.len()),
                });
            }
        }
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "no matrix rows".into(),
        });
    }
    if rows[0].len() != n {
        return Err(Error::NotSquare {
            rows: n,
            cols: rows[0].len(),
        });
    }
    Ok(MatrixFile {
        n,
        entries: rows.into_iter().flatten().collect(),
        name: None,
    })
}

/// Parses JSON when the text starts with `{`, CSV otherwise.
pub fn parse_matrix(text: &str) -> Result<MatrixFile> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_csv(text)
    }
}

pub fn read_matrix_file(path: &Path) -> Result<MatrixFile> {
    let text = std::fs::read_to_string(path)?;
    let is_csv = path
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("csv"));
    if is_csv {
        parse_csv(&text)
    } else {
        parse_matrix(&text)
    }
}

pub fn load_generator(path: &Path, scale: Option<Scale>) -> Result<GeneratorMatrix> {
    let mut file = read_matrix_file(path)?;
    if let Some(scale) = scale {
        file = file.scaled(scale);
    }
    file.to_generator()
}
