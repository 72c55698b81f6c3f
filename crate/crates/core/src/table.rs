//! Upper-triangular invariant tables and their structural validators.
//!
//! A table of dimension `d` is `(d+1) x (d+1)` with rows `p` going down and
//! columns `q` going right. Cells hold a known nonnegative integer or are
//! unknown (`None`).

use std::fmt;

use thiserror::Error;

/// Which family of invariants a table holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TableKind {
    /// `λ_{p,q}`, socle dimensions of `H^p_m(H^{n-q}_I(R))`.
    Lyubeznik,
    /// `ρ_{p,q}`, dimensions of Čech–de Rham page entries.
    CechDeRham,
}

impl TableKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TableKind::Lyubeznik => "lyubeznik",
            TableKind::CechDeRham => "cdr",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "lyubeznik" => Some(TableKind::Lyubeznik),
            "cdr" => Some(TableKind::CechDeRham),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("table of dimension {dim} needs {expected} rows of {expected} entries")]
    Shape { dim: usize, expected: usize },
    #[error("table has unknown entries")]
    HasUnknowns,
    #[error("expected a {expected} table, got {found}")]
    WrongKind {
        expected: &'static str,
        found: &'static str,
    },
    #[error("small-table formulas exist only for dimension 0, 1 or 2 (got {0})")]
    DimensionTooLarge(usize),
    #[error("component count a must be at least 1")]
    ZeroComponents,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InvariantTable {
    kind: TableKind,
    dim: usize,
    cells: Vec<Option<u64>>,
    bound: Option<u64>,
}

impl InvariantTable {
    pub fn zeros(kind: TableKind, dim: usize) -> Self {
        InvariantTable {
            kind,
            dim,
            cells: vec![Some(0); (dim + 1) * (dim + 1)],
            bound: None,
        }
    }

    pub fn unknowns(kind: TableKind, dim: usize) -> Self {
        InvariantTable {
            kind,
            dim,
            cells: vec![None; (dim + 1) * (dim + 1)],
            bound: None,
        }
    }

    pub fn from_rows(kind: TableKind, rows: Vec<Vec<Option<u64>>>) -> Result<Self, TableError> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(TableError::Shape {
                dim: n.saturating_sub(1),
                expected: n.max(1),
            });
        }
        Ok(InvariantTable {
            kind,
            dim: n - 1,
            cells: rows.into_iter().flatten().collect(),
            bound: None,
        })
    }

    /// Builds a fully known table from `(p, q, value)` triples.
    pub fn from_entries(kind: TableKind, dim: usize, entries: &[(usize, usize, u64)]) -> Self {
        let mut t = Self::zeros(kind, dim);
        for &(p, q, v) in entries {
            t.set(p, q, Some(v));
        }
        t
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.dim + 1
    }

    pub fn bound(&self) -> Option<u64> {
        self.bound
    }

    pub fn with_bound(mut self, bound: Option<u64>) -> Self {
        self.bound = bound;
        self
    }

    pub fn get(&self, p: usize, q: usize) -> Option<u64> {
        self.cells[p * self.size() + q]
    }

    /// Known value, treating unknown cells as zero.
    pub fn value(&self, p: usize, q: usize) -> u64 {
        self.get(p, q).unwrap_or(0)
    }

    pub fn set(&mut self, p: usize, q: usize, v: Option<u64>) {
        let s = self.size();
        self.cells[p * s + q] = v;
    }

    pub fn rows(&self) -> Vec<Vec<Option<u64>>> {
        self.cells.chunks(self.size()).map(<[_]>::to_vec).collect()
    }

    pub fn cells(&self) -> impl Iterator<Item = ((usize, usize), Option<u64>)> + '_ {
        let s = self.size();
        self.cells.iter().enumerate().map(move |(i, v)| ((i / s, i % s), *v))
    }

    pub fn unknown_cells(&self) -> Vec<(usize, usize)> {
        self.cells()
            .filter(|(_, v)| v.is_none())
            .map(|(c, _)| c)
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(Option::is_some)
    }

    /// All entries as a dense vector, failing on unknowns.
    pub fn known_values(&self) -> Result<Vec<u64>, TableError> {
        self.cells
            .iter()
            .map(|v| v.ok_or(TableError::HasUnknowns))
            .collect()
    }

    /// True for cells forced to zero by the table shape alone: below the
    /// diagonal, and for λ-tables of dimension at least two the cells
    /// `(0, d)` and `(1, d)`.
    pub fn is_structural_zero(&self, p: usize, q: usize) -> bool {
        if p > q {
            return true;
        }
        self.kind == TableKind::Lyubeznik && self.dim >= 2 && q == self.dim && p <= 1
    }

    pub(crate) fn require_kind(&self, kind: TableKind) -> Result<(), TableError> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(TableError::WrongKind {
                expected: kind.as_str(),
                found: self.kind.as_str(),
            })
        }
    }
}

/// Matrix display: `·` for zero, `?` for unknown.
impl fmt::Display for InvariantTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self
            .cells
            .iter()
            .map(|v| match v {
                None => "?".to_string(),
                Some(0) => "·".to_string(),
                Some(x) => x.to_string(),
            })
            .collect();
        let width = cells.iter().map(|c| c.chars().count()).max().unwrap_or(1);
        for row in cells.chunks(self.size()) {
            let padded: Vec<String> = row
                .iter()
                .map(|c| format!("{}{}", " ".repeat(width - c.chars().count()), c))
                .collect();
            writeln!(f, "{}", padded.join(" "))?;
        }
        Ok(())
    }
}

/// Vanishing ranges coming from Artinian-ness and vanishing of the
/// local cohomology modules `H^l_I(R)` above `f_Y` and `v_Y` respectively.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OgusBounds {
    /// Number of variables `n` of the ambient polynomial ring.
    pub ambient_dim: usize,
    pub f_y: Option<usize>,
    pub v_y: Option<usize>,
}

/// One violated structural condition on a λ- or ρ-table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    BelowDiagonal { p: usize, q: usize, value: u64 },
    TwoZeroTerms { p: usize, q: usize, value: u64 },
    CornerVanishes,
    OgusVanishing { p: usize, q: usize, value: u64 },
    OgusBoundsInverted,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::BelowDiagonal { p, q, value } => {
                write!(f, "entry ({p},{q}) = {value} lies below the diagonal")
            }
            Diagnostic::TwoZeroTerms { p, q, value } => write!(
                f,
                "entry ({p},{q}) = {value} must vanish in the last column for dimension >= 2"
            ),
            Diagnostic::CornerVanishes => write!(f, "corner entry (d,d) is zero"),
            Diagnostic::OgusVanishing { p, q, value } => {
                write!(f, "entry ({p},{q}) = {value} lies in an Ogus vanishing range")
            }
            Diagnostic::OgusBoundsInverted => write!(f, "Ogus bounds have f_Y > v_Y"),
        }
    }
}

/// True when the Ogus ranges force `(p, q)` to vanish.
pub fn ogus_forces_zero(bounds: &OgusBounds, p: usize, q: usize) -> bool {
    let n = bounds.ambient_dim as i64;
    let q = q as i64;
    if let Some(v) = bounds.v_y {
        if q < n - v as i64 {
            return true;
        }
    }
    if let Some(f) = bounds.f_y {
        if p > 0 && q < n - f as i64 {
            return true;
        }
    }
    false
}

/// Every violated structural invariant of a λ-table. Unknown cells are
/// skipped, except that an unknown corner is accepted.
pub fn validate_lambda(
    table: &InvariantTable,
    bounds: Option<&OgusBounds>,
) -> Result<Vec<Diagnostic>, TableError> {
    table.require_kind(TableKind::Lyubeznik)?;
    let mut out = Vec::new();
    if let Some(b) = bounds {
        if let (Some(f), Some(v)) = (b.f_y, b.v_y) {
            if f > v {
                out.push(Diagnostic::OgusBoundsInverted);
            }
        }
    }
    let d = table.dim();
    for ((p, q), v) in table.cells() {
        let Some(value) = v.filter(|&x| x != 0) else {
            continue;
        };
        if p > q {
            out.push(Diagnostic::BelowDiagonal { p, q, value });
        } else if table.is_structural_zero(p, q) {
            out.push(Diagnostic::TwoZeroTerms { p, q, value });
        } else if bounds.is_some_and(|b| ogus_forces_zero(b, p, q)) {
            out.push(Diagnostic::OgusVanishing { p, q, value });
        }
    }
    if table.get(d, d) == Some(0) {
        out.push(Diagnostic::CornerVanishes);
    }
    Ok(out)
}

/// Triangularity diagnostics for a ρ-table.
pub fn validate_rho(table: &InvariantTable) -> Result<Vec<Diagnostic>, TableError> {
    table.require_kind(TableKind::CechDeRham)?;
    Ok(table
        .cells()
        .filter_map(|((p, q), v)| match v {
            Some(value) if value != 0 && p > q => Some(Diagnostic::BelowDiagonal { p, q, value }),
            _ => None,
        })
        .collect())
}

/// `Σ (-1)^{p+q} T_{p,q}` over a fully known table.
pub fn euler_sum(table: &InvariantTable) -> Result<i64, TableError> {
    let vals = table.known_values()?;
    let s = table.size();
    Ok(vals
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let (p, q) = (i / s, i % s);
            if (p + q) % 2 == 0 {
                v as i64
            } else {
                -(v as i64)
            }
        })
        .sum())
}

/// Closed-form λ-tables for dimension 0, 1 and 2; `a` is the number of
/// connected components of the punctured spectrum and only matters when
/// `dim_y = 2`.
pub fn canonical_small_tables(dim_y: usize, a: u64) -> Result<InvariantTable, TableError> {
    match dim_y {
        0 => Ok(InvariantTable::from_entries(TableKind::Lyubeznik, 0, &[(0, 0, 1)])),
        1 => Ok(InvariantTable::from_entries(TableKind::Lyubeznik, 1, &[(1, 1, 1)])),
        2 => {
            if a == 0 {
                return Err(TableError::ZeroComponents);
            }
            Ok(InvariantTable::from_entries(
                TableKind::Lyubeznik,
                2,
                &[(0, 1, a - 1), (2, 2, a)],
            ))
        }
        d => Err(TableError::DimensionTooLarge(d)),
    }
}
