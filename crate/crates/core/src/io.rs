//! JSON file formats for arrangements, fans and tables.
//!
//! All numbers are exact: rationals are written as integers or `"p/q"`
//! strings, and no format carries floating point.

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::arrangement::{AffineSubspace, ArrangementError};
use crate::qlinalg::{parse_rational, Rational};
use crate::table::{InvariantTable, OgusBounds, TableError, TableKind};
use crate::toric::{Fan3, Ray};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid rational literal {0}")]
    Rational(String),
    #[error("subspace {name:?}: {source}")]
    Subspace {
        name: String,
        source: ArrangementError,
    },
    #[error("ray {0} is zero")]
    ZeroRay(usize),
    #[error("cone {cone} refers to ray {index}, but only {rays} rays are given")]
    RayIndex {
        cone: usize,
        index: usize,
        rays: usize,
    },
    #[error("unknown table kind {0:?} (expected \"lyubeznik\" or \"cdr\")")]
    Kind(String),
    #[error("entries form a {rows}-row array, but dim {dim} needs {expected} rows of {expected}")]
    TableShape {
        dim: usize,
        rows: usize,
        expected: usize,
    },
    #[error(transparent)]
    Table(#[from] TableError),
}

fn rational_from_value(v: &Value) -> Result<Rational, FormatError> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(crate::qlinalg::rat(i))
            } else if let Some(u) = n.as_u64() {
                Ok(Rational::from_integer(u.into()))
            } else {
                Err(FormatError::Rational(n.to_string()))
            }
        }
        Value::String(s) => parse_rational(s).ok_or_else(|| FormatError::Rational(s.clone())),
        other => Err(FormatError::Rational(other.to_string())),
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct SubspaceEntry {
    pub name: String,
    /// Rows of `n + 1` rational literals: coefficients, then the constant.
    pub equations: Vec<Vec<Value>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct ArrangementFile {
    pub ambient_dim: usize,
    pub subspaces: Vec<SubspaceEntry>,
}

impl ArrangementFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn components(&self) -> Result<Vec<AffineSubspace>, FormatError> {
        self.subspaces
            .iter()
            .map(|s| {
                let rows = s
                    .equations
                    .iter()
                    .map(|r| r.iter().map(rational_from_value).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()?;
                AffineSubspace::new(self.ambient_dim, rows).map_err(|source| {
                    FormatError::Subspace {
                        name: s.name.clone(),
                        source,
                    }
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct FanFile {
    pub rays: Vec<Ray>,
    pub max_cones: Vec<Vec<usize>>,
}

impl FanFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Checks indices and divides non-primitive rays by their content; each
    /// rescaled ray produces a warning.
    pub fn to_fan(&self) -> Result<(Fan3, Vec<String>), FormatError> {
        let mut warnings = Vec::new();
        let mut rays = Vec::with_capacity(self.rays.len());
        for (i, r) in self.rays.iter().enumerate() {
            let g = r.iter().fold(0i64, |acc, &x| acc.gcd(&x));
            if g == 0 {
                return Err(FormatError::ZeroRay(i));
            }
            if g != 1 {
                warnings.push(format!("ray {i} {r:?} is not primitive; divided by {g}"));
            }
            rays.push([r[0] / g, r[1] / g, r[2] / g]);
        }
        for (cone, c) in self.max_cones.iter().enumerate() {
            if let Some(&index) = c.iter().find(|&&i| i >= rays.len()) {
                return Err(FormatError::RayIndex {
                    cone,
                    index,
                    rays: rays.len(),
                });
            }
        }
        Ok((
            Fan3 {
                rays,
                max_cones: self.max_cones.clone(),
            },
            warnings,
        ))
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
pub struct OgusEntry {
    #[serde(default)]
    pub f_y: Option<usize>,
    #[serde(default)]
    pub v_y: Option<usize>,
}

/// Input table document. Optional fields feed the abutment checks.
#[derive(Clone, Debug, Deserialize, PartialEq, Eq)]
pub struct TableFile {
    pub kind: String,
    pub dim: usize,
    #[serde(default)]
    pub ambient_dim: Option<usize>,
    pub entries: Vec<Vec<Option<u64>>>,
    #[serde(default)]
    pub betti: Option<Vec<u64>>,
    #[serde(default)]
    pub bound: Option<u64>,
    #[serde(default)]
    pub homogeneous_equidimensional: Option<bool>,
    #[serde(default)]
    pub ogus: Option<OgusEntry>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl TableFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn table_kind(&self) -> Result<TableKind, FormatError> {
        TableKind::parse(&self.kind).ok_or_else(|| FormatError::Kind(self.kind.clone()))
    }

    pub fn to_table(&self) -> Result<InvariantTable, FormatError> {
        let kind = self.table_kind()?;
        let expected = self.dim + 1;
        if self.entries.len() != expected || self.entries.iter().any(|r| r.len() != expected) {
            return Err(FormatError::TableShape {
                dim: self.dim,
                rows: self.entries.len(),
                expected,
            });
        }
        Ok(InvariantTable::from_rows(kind, self.entries.clone())?.with_bound(self.bound))
    }

    /// Ogus bounds, when the file gives both `ogus` and `ambient_dim`.
    pub fn ogus_bounds(&self) -> Option<OgusBounds> {
        let o = self.ogus?;
        Some(OgusBounds {
            ambient_dim: self.ambient_dim?,
            f_y: o.f_y,
            v_y: o.v_y,
        })
    }
}

/// Serializes a table as `{"kind", "dim", "entries", "notes"}`, one table
/// row per line, with a trailing newline.
pub fn table_to_json(table: &InvariantTable, notes: &[String]) -> String {
    let cell = |v: &Option<u64>| v.map_or_else(|| "null".to_string(), |x| x.to_string());
    let rows: Vec<String> = table
        .rows()
        .iter()
        .map(|r| format!("    [{}]", r.iter().map(cell).collect::<Vec<_>>().join(", ")))
        .collect();
    let notes: Vec<String> = notes
        .iter()
        .map(|n| format!("    {}", serde_json::to_string(n).expect("string serializes")))
        .collect();
    let notes = if notes.is_empty() {
        "[]".to_string()
    } else {
        format!("[\n{}\n  ]", notes.join(",\n"))
    };
    format!(
        "{{\n  \"kind\": \"{}\",\n  \"dim\": {},\n  \"entries\": [\n{}\n  ],\n  \"notes\": {}\n}}\n",
        table.kind().as_str(),
        table.dim(),
        rows.join(",\n"),
        notes
    )
}

/// Parses a table document back into a table and its notes.
pub fn table_from_json(text: &str) -> Result<(InvariantTable, Vec<String>), FormatError> {
    let file = TableFile::parse(text)?;
    let table = file.to_table()?;
    Ok((table, file.notes))
}
