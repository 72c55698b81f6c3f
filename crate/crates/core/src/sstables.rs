//! Page-by-page bookkeeping for the two first-quadrant spectral sequences
//! behind λ- and ρ-tables, and a bounded search engine that decides which
//! tables are compatible with the known abutments.
//!
//! The engine treats every entry as a dimension that is additive under the
//! differentials. For λ-tables this holds because all `E_2` terms are finite
//! sums of the injective hull of the residue field; the engine assumes it and
//! does not check it.
//!
//! Differentials on page `r` act on table coordinates as
//!
//! * λ-tables: `(p, q) -> (p + r, q + r - 1)`, abutting to one copy of
//!   `H^n_m(R)` on the diagonal `p = q`;
//! * ρ-tables: `(p, q) -> (p - r, q + r - 1)`, abutting to the reduced
//!   cohomology of the complement along the anti-diagonals
//!   `2n - p - q - 1 = k`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::qlinalg::{primitive_scale, rat, QMatrix, Rational};
use crate::table::{validate_lambda, InvariantTable, OgusBounds, TableError, TableKind};

/// Default cap on search nodes.
pub const DEFAULT_NODE_LIMIT: u64 = 10_000_000;
/// Default per-cell bound for unknown entries.
pub const DEFAULT_BOUND: u64 = 10;

pub type Cell = (usize, usize);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpectralError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("page {page} expects {expected} ranks, got {found}")]
    RankCount {
        page: usize,
        expected: usize,
        found: usize,
    },
    #[error("differential ranks at {cell:?} on page {page} exceed the entry {entry}")]
    RankTooLarge { page: usize, cell: Cell, entry: u64 },
    #[error("search exceeded {0} nodes")]
    SearchLimit(u64),
    #[error("Betti vector has {found} degrees, expected {expected} for C^{ambient}")]
    BettiLength {
        ambient: usize,
        expected: usize,
        found: usize,
    },
    #[error("table of dimension {dim} does not fit in C^{ambient}")]
    AmbientTooSmall { dim: usize, ambient: usize },
}

/// Target of the page-`r` differential leaving `(p, q)`, if inside the table.
pub fn differential_target(kind: TableKind, dim: usize, cell: Cell, page: usize) -> Option<Cell> {
    let (p, q) = cell;
    let q2 = q + page - 1;
    if q2 > dim {
        return None;
    }
    match kind {
        TableKind::Lyubeznik => (p + page <= dim).then(|| (p + page, q2)),
        TableKind::CechDeRham => (p >= page).then(|| (p - page, q2)),
    }
}

/// A chosen differential rank.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DifferentialRank {
    pub page: usize,
    pub source: Cell,
    pub target: Cell,
    pub rank: u64,
}

impl fmt::Display for DifferentialRank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "d_{}: ({},{}) -> ({},{}) rank {}",
            self.page, self.source.0, self.source.1, self.target.0, self.target.1, self.rank
        )
    }
}

/// The `E_r` page of a spectral sequence together with the ranks chosen on
/// earlier pages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralState {
    kind: TableKind,
    dim: usize,
    page: usize,
    entries: Vec<u64>,
    history: Vec<DifferentialRank>,
}

impl SpectralState {
    /// Starts at `E_2` from a fully known table.
    pub fn new(table: &InvariantTable) -> Result<Self, SpectralError> {
        Ok(SpectralState {
            kind: table.kind(),
            dim: table.dim(),
            page: 2,
            entries: table.known_values()?,
            history: Vec::new(),
        })
    }

    pub fn page(&self) -> usize {
        self.page
    }

    pub fn entry(&self, cell: Cell) -> u64 {
        self.entries[cell.0 * (self.dim + 1) + cell.1]
    }

    pub fn history(&self) -> &[DifferentialRank] {
        &self.history
    }

    /// Nonzero differentials chosen so far.
    pub fn witness(&self) -> Vec<DifferentialRank> {
        self.history.iter().filter(|d| d.rank > 0).cloned().collect()
    }

    pub fn to_table(&self) -> InvariantTable {
        let s = self.dim + 1;
        let mut t = InvariantTable::zeros(self.kind, self.dim);
        for (i, &v) in self.entries.iter().enumerate() {
            t.set(i / s, i % s, Some(v));
        }
        t
    }

    /// Last page on which any differential stays inside the table.
    pub fn last_page(&self) -> usize {
        self.dim.max(1)
    }

    pub fn is_final(&self) -> bool {
        self.page > self.last_page()
    }

    /// All in-range differentials of the current page, in cell order.
    pub fn differentials(&self) -> Vec<(Cell, Cell)> {
        differentials_on(self.kind, self.dim, self.page)
    }

    /// `Σ (-1)^{p+q} E_r[p,q]`.
    pub fn euler(&self) -> i64 {
        let s = self.dim + 1;
        self.entries
            .iter()
            .enumerate()
            .map(|(i, &v)| if (i / s + i % s).is_multiple_of(2) { v as i64 } else { -(v as i64) })
            .sum()
    }

    /// Passes to `E_{r+1}`; `ranks` is aligned with [`Self::differentials`].
    pub fn turn_page(&self, ranks: &[u64]) -> Result<SpectralState, SpectralError> {
        let diffs = self.differentials();
        if ranks.len() != diffs.len() {
            return Err(SpectralError::RankCount {
                page: self.page,
                expected: diffs.len(),
                found: ranks.len(),
            });
        }
        let s = self.dim + 1;
        let mut used = vec![0u64; self.entries.len()];
        for (&(src, tgt), &r) in diffs.iter().zip(ranks) {
            used[src.0 * s + src.1] += r;
            used[tgt.0 * s + tgt.1] += r;
        }
        let mut next = self.clone();
        for (i, u) in used.iter().enumerate() {
            if *u > self.entries[i] {
                return Err(SpectralError::RankTooLarge {
                    page: self.page,
                    cell: (i / s, i % s),
                    entry: self.entries[i],
                });
            }
            next.entries[i] -= u;
        }
        for (&(source, target), &rank) in diffs.iter().zip(ranks) {
            next.history.push(DifferentialRank {
                page: self.page,
                source,
                target,
                rank,
            });
        }
        next.page += 1;
        Ok(next)
    }
}

fn differentials_on(kind: TableKind, dim: usize, page: usize) -> Vec<(Cell, Cell)> {
    let mut out = Vec::new();
    for p in 0..=dim {
        for q in 0..=dim {
            if let Some(t) = differential_target(kind, dim, (p, q), page) {
                out.push(((p, q), t));
            }
        }
    }
    out
}

/// Required `E_∞` mass per total degree.
struct Abutment {
    kind: TableKind,
    ambient: usize,
    targets: BTreeMap<i64, u64>,
}

impl Abutment {
    fn lyubeznik() -> Self {
        Abutment {
            kind: TableKind::Lyubeznik,
            ambient: 0,
            targets: BTreeMap::from([(0, 1)]),
        }
    }

    fn cdr(ambient: usize, betti: &[u64]) -> Self {
        Abutment {
            kind: TableKind::CechDeRham,
            ambient,
            targets: betti
                .iter()
                .enumerate()
                .map(|(k, &b)| (k as i64, b))
                .collect(),
        }
    }

    fn degree(&self, (p, q): Cell) -> i64 {
        match self.kind {
            TableKind::Lyubeznik => q as i64 - p as i64,
            TableKind::CechDeRham => 2 * self.ambient as i64 - p as i64 - q as i64 - 1,
        }
    }

    fn target(&self, deg: i64) -> u64 {
        self.targets.get(&deg).copied().unwrap_or(0)
    }

    fn sums(&self, state: &SpectralState) -> BTreeMap<i64, u64> {
        let s = state.dim + 1;
        let mut out: BTreeMap<i64, u64> = BTreeMap::new();
        for (i, &v) in state.entries.iter().enumerate() {
            *out.entry(self.degree((i / s, i % s))).or_default() += v;
        }
        out
    }

    fn satisfied(&self, state: &SpectralState) -> bool {
        let sums = self.sums(state);
        let degrees = sums.keys().chain(self.targets.keys());
        degrees.into_iter().all(|&d| sums.get(&d).copied().unwrap_or(0) == self.target(d))
    }

    /// False when `state` can no longer reach the abutment: masses only
    /// decrease, and cells no later differential can touch are frozen.
    fn still_possible(&self, state: &SpectralState) -> bool {
        let sums = self.sums(state);
        if self
            .targets
            .iter()
            .any(|(d, &t)| sums.get(d).copied().unwrap_or(0) < t)
        {
            return false;
        }
        let s = state.dim + 1;
        let mut frozen: BTreeMap<i64, u64> = BTreeMap::new();
        for (i, &v) in state.entries.iter().enumerate() {
            if v == 0 {
                continue;
            }
            let cell = (i / s, i % s);
            if !touchable(state, cell) {
                *frozen.entry(self.degree(cell)).or_default() += v;
            }
        }
        frozen.iter().all(|(d, &m)| m <= self.target(*d))
    }
}

fn touchable(state: &SpectralState, cell: Cell) -> bool {
    (state.page..=state.last_page()).any(|r| {
        let out = differential_target(state.kind, state.dim, cell, r)
            .is_some_and(|t| state.entry(t) > 0);
        let inc = differentials_on(state.kind, state.dim, r)
            .iter()
            .any(|&(src, t)| t == cell && state.entry(src) > 0);
        out || inc
    })
}

struct Budget {
    limit: u64,
    used: u64,
}

impl Budget {
    fn tick(&mut self) -> Result<(), SpectralError> {
        self.used += 1;
        if self.used > self.limit {
            Err(SpectralError::SearchLimit(self.limit))
        } else {
            Ok(())
        }
    }
}

/// Depth-first search over rank assignments, page by page, smallest ranks
/// first. Returns the first final state meeting the abutment.
fn search(
    state: &SpectralState,
    goal: &Abutment,
    budget: &mut Budget,
) -> Result<Option<SpectralState>, SpectralError> {
    budget.tick()?;
    if !goal.still_possible(state) {
        return Ok(None);
    }
    if state.is_final() {
        return Ok(goal.satisfied(state).then(|| state.clone()));
    }
    let diffs = state.differentials();
    let mut remaining = state.entries.clone();
    let mut ranks = vec![0u64; diffs.len()];
    assign_page(state, goal, budget, &diffs, 0, &mut remaining, &mut ranks)
}

fn assign_page(
    state: &SpectralState,
    goal: &Abutment,
    budget: &mut Budget,
    diffs: &[(Cell, Cell)],
    i: usize,
    remaining: &mut [u64],
    ranks: &mut [u64],
) -> Result<Option<SpectralState>, SpectralError> {
    if i == diffs.len() {
        let next = state.turn_page(ranks)?;
        return search(&next, goal, budget);
    }
    let s = state.dim + 1;
    let (src, tgt) = diffs[i];
    let (a, b) = (src.0 * s + src.1, tgt.0 * s + tgt.1);
    let cap = remaining[a].min(remaining[b]);
    for r in 0..=cap {
        remaining[a] -= r;
        remaining[b] -= r;
        ranks[i] = r;
        let found = assign_page(state, goal, budget, diffs, i + 1, remaining, ranks);
        remaining[a] += r;
        remaining[b] += r;
        if let Some(hit) = found? {
            ranks[i] = 0;
            return Ok(Some(hit));
        }
    }
    ranks[i] = 0;
    Ok(None)
}

/// Outcome of a convergence check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergence {
    pub feasible: bool,
    /// Nonzero ranks of one admissible assignment, when feasible.
    pub witness: Vec<DifferentialRank>,
    /// The resulting `E_∞` page, when feasible.
    pub limit_page: Option<InvariantTable>,
}

impl Convergence {
    fn from_search(hit: Option<SpectralState>) -> Self {
        match hit {
            Some(s) => Convergence {
                feasible: true,
                witness: s.witness(),
                limit_page: Some(s.to_table()),
            },
            None => Convergence {
                feasible: false,
                witness: Vec::new(),
                limit_page: None,
            },
        }
    }
}

/// Decides whether some choice of differential ranks makes the λ-sequence
/// converge to a single copy of `H^n_m(R)`: `E_∞` vanishes off the diagonal
/// and its diagonal sums to one.
pub fn check_convergence_lambda(table: &InvariantTable) -> Result<Convergence, SpectralError> {
    check_convergence_lambda_limited(table, DEFAULT_NODE_LIMIT)
}

pub fn check_convergence_lambda_limited(
    table: &InvariantTable,
    node_limit: u64,
) -> Result<Convergence, SpectralError> {
    table.require_kind(TableKind::Lyubeznik)?;
    let state = SpectralState::new(table)?;
    let mut budget = Budget {
        limit: node_limit,
        used: 0,
    };
    Ok(Convergence::from_search(search(&state, &Abutment::lyubeznik(), &mut budget)?))
}

/// Outcome of [`check_cdr`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CdrCheck {
    /// Some rank assignment reproduces the Betti numbers.
    pub feasible: bool,
    /// The all-zero assignment already reproduces them.
    pub degenerate: bool,
    /// Final verdict: `degenerate` when degeneration is expected, else `feasible`.
    pub accepted: bool,
    pub witness: Vec<DifferentialRank>,
}

/// Checks a ρ-table against the reduced Betti numbers of the complement
/// (`betti[k]` for `k = 0..2n`). When `homogeneous_equidimensional` is set
/// and the table has dimension at most 3, only the degenerate solution is
/// accepted.
pub fn check_cdr(
    table: &InvariantTable,
    betti: &[u64],
    ambient_dim: usize,
    homogeneous_equidimensional: bool,
) -> Result<CdrCheck, SpectralError> {
    table.require_kind(TableKind::CechDeRham)?;
    if ambient_dim <= table.dim() {
        return Err(SpectralError::AmbientTooSmall {
            dim: table.dim(),
            ambient: ambient_dim,
        });
    }
    if betti.len() != 2 * ambient_dim {
        return Err(SpectralError::BettiLength {
            ambient: ambient_dim,
            expected: 2 * ambient_dim,
            found: betti.len(),
        });
    }
    let state = SpectralState::new(table)?;
    let goal = Abutment::cdr(ambient_dim, betti);
    let degenerate = goal.satisfied(&state);
    let mut budget = Budget {
        limit: DEFAULT_NODE_LIMIT,
        used: 0,
    };
    let hit = if degenerate {
        let mut s = state.clone();
        while !s.is_final() {
            let zeros = vec![0; s.differentials().len()];
            s = s.turn_page(&zeros)?;
        }
        Some(s)
    } else {
        search(&state, &goal, &mut budget)?
    };
    let feasible = hit.is_some();
    let accepted = if homogeneous_equidimensional && table.dim() <= 3 {
        degenerate
    } else {
        feasible
    };
    Ok(CdrCheck {
        feasible,
        degenerate,
        accepted,
        witness: hit.map(|s| s.witness()).unwrap_or_default(),
    })
}

/// Search settings for [`deduce_lambda`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeduceConfig {
    /// Upper bound for every unknown cell.
    pub bound: u64,
    pub node_limit: u64,
    pub ogus: Option<OgusBounds>,
}

impl Default for DeduceConfig {
    fn default() -> Self {
        DeduceConfig {
            bound: DEFAULT_BOUND,
            node_limit: DEFAULT_NODE_LIMIT,
            ogus: None,
        }
    }
}

/// `Σ coeff · λ_cell = constant`, with coprime integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearIdentity {
    pub terms: Vec<(Cell, Rational)>,
    pub constant: Rational,
}

impl LinearIdentity {
    pub fn from_i64(terms: &[(Cell, i64)], constant: i64) -> Self {
        LinearIdentity {
            terms: terms.iter().map(|&(c, a)| (c, rat(a))).collect(),
            constant: rat(constant),
        }
    }

    pub fn evaluate(&self, values: &BTreeMap<Cell, u64>) -> Rational {
        self.terms
            .iter()
            .map(|(c, a)| a * rat(values.get(c).copied().unwrap_or(0) as i64))
            .sum()
    }
}

impl fmt::Display for LinearIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for ((p, q), a) in &self.terms {
            if a.is_zero() {
                continue;
            }
            let sign = if a.is_negative() { "-" } else { "+" };
            let mag = a.abs();
            let coef = if mag == rat(1) {
                String::new()
            } else {
                format!("{} ", crate::qlinalg::format_rational(&mag))
            };
            if first {
                if a.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            write!(f, "{coef}λ_{{{p},{q}}}")?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " = {}", crate::qlinalg::format_rational(&self.constant))
    }
}

/// Result of [`deduce_lambda`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deduction {
    pub dim: usize,
    /// Unknown cells that the search ranged over, in row-major order.
    pub unknowns: Vec<Cell>,
    /// Unknown cells set to zero by shape constraints before the search.
    pub structural_zeros: Vec<Cell>,
    /// Every feasible completion as values for `unknowns`, sorted.
    pub feasible: Vec<Vec<u64>>,
    /// Unknown cells taking the same value in every feasible completion.
    pub forced: Vec<(Cell, u64)>,
    /// Basis of the affine relations satisfied by all feasible completions.
    pub identities: Vec<LinearIdentity>,
    pub nodes: u64,
}

impl Deduction {
    pub fn is_contradiction(&self) -> bool {
        self.feasible.is_empty()
    }

    fn assignment(&self, values: &[u64]) -> BTreeMap<Cell, u64> {
        self.unknowns.iter().copied().zip(values.iter().copied()).collect()
    }

    /// Checks `identity` on every feasible completion directly. Cells that
    /// were not unknowns are read as zero, so only pass unknown cells.
    pub fn holds(&self, identity: &LinearIdentity) -> bool {
        self.feasible
            .iter()
            .all(|v| identity.evaluate(&self.assignment(v)) == identity.constant)
    }

    /// Checks whether `identity` lies in the span of [`Self::identities`].
    pub fn implies(&self, identity: &LinearIdentity) -> bool {
        let k = self.unknowns.len();
        let row = |id: &LinearIdentity| -> Option<Vec<Rational>> {
            let mut r = vec![Rational::zero(); k + 1];
            for (c, a) in &id.terms {
                let i = self.unknowns.iter().position(|u| u == c)?;
                r[i] += a;
            }
            r[k] = id.constant.clone();
            Some(r)
        };
        let Some(target) = row(identity) else {
            return false;
        };
        let basis: Vec<Vec<Rational>> = self.identities.iter().filter_map(row).collect();
        let m = QMatrix::from_rows(k + 1, basis.clone());
        let with = QMatrix::from_rows(k + 1, basis.into_iter().chain([target]).collect());
        m.rank() == with.rank()
    }
}

/// Enumerates all completions of the unknown cells with values in
/// `0..=bound` that pass [`validate_lambda`] and converge, and summarizes
/// what the feasible set forces.
pub fn deduce_lambda(
    table: &InvariantTable,
    config: &DeduceConfig,
) -> Result<Deduction, SpectralError> {
    table.require_kind(TableKind::Lyubeznik)?;
    let d = table.dim();
    let mut base = table.clone();
    let mut structural_zeros = Vec::new();
    for cell in table.unknown_cells() {
        let forced_zero = table.is_structural_zero(cell.0, cell.1)
            || config
                .ogus
                .as_ref()
                .is_some_and(|b| crate::table::ogus_forces_zero(b, cell.0, cell.1));
        if forced_zero && cell != (d, d) {
            base.set(cell.0, cell.1, Some(0));
            structural_zeros.push(cell);
        }
    }
    let unknowns = base.unknown_cells();
    let sign = |(p, q): Cell| if (p + q) % 2 == 0 { 1i64 } else { -1 };
    let known_euler: i64 = base
        .cells()
        .filter_map(|(c, v)| v.map(|x| sign(c) * x as i64))
        .sum();

    let mut budget = Budget {
        limit: config.node_limit,
        used: 0,
    };
    let mut feasible = Vec::new();
    let k = unknowns.len();
    let mut values = vec![0u64; k];
    let mut candidate = base.clone();
    // odometer over all but the last unknown; the Euler constraint fixes it
    let free = k.saturating_sub(1);
    loop {
        budget.tick()?;
        let mut ok = true;
        if k > 0 {
            let partial: i64 = (0..free).map(|i| sign(unknowns[i]) * values[i] as i64).sum();
            let last = unknowns[k - 1];
            let v = sign(last) * (1 - known_euler - partial);
            if v < 0 || v as u64 > config.bound {
                ok = false;
            } else {
                values[k - 1] = v as u64;
            }
        }
        if ok {
            for (c, &v) in unknowns.iter().zip(&values) {
                candidate.set(c.0, c.1, Some(v));
            }
            let valid = validate_lambda(&candidate, config.ogus.as_ref())?.is_empty();
            if valid {
                let state = SpectralState::new(&candidate)?;
                if search(&state, &Abutment::lyubeznik(), &mut budget)?.is_some() {
                    feasible.push(values.clone());
                }
            }
        }
        // advance
        let mut i = 0;
        while i < free {
            if values[i] < config.bound {
                values[i] += 1;
                break;
            }
            values[i] = 0;
            i += 1;
        }
        if i == free {
            break;
        }
    }
    feasible.sort();
    let forced = (0..k)
        .filter_map(|i| {
            let first = feasible.first()?[i];
            feasible
                .iter()
                .all(|v| v[i] == first)
                .then_some((unknowns[i], first))
        })
        .collect();
    let identities = affine_relations(&unknowns, &feasible);
    Ok(Deduction {
        dim: d,
        unknowns,
        structural_zeros,
        feasible,
        forced,
        identities,
        nodes: budget.used,
    })
}

/// Basis of `{(c, c0) : c . x = c0 for all feasible x}`, in reduced form.
fn affine_relations(unknowns: &[Cell], feasible: &[Vec<u64>]) -> Vec<LinearIdentity> {
    let k = unknowns.len();
    if feasible.is_empty() || k == 0 {
        return Vec::new();
    }
    let rows = feasible
        .iter()
        .map(|v| {
            let mut r: Vec<Rational> = v.iter().map(|&x| rat(x as i64)).collect();
            r.push(rat(-1));
            r
        })
        .collect();
    let m = QMatrix::from_rows(k + 1, rows);
    let relations = m.nullspace_basis().transpose().row_basis();
    (0..relations.rows())
        .map(|i| {
            let row = relations.row(i);
            let s = primitive_scale(row);
            let terms = unknowns
                .iter()
                .zip(row)
                .filter(|(_, a)| !a.is_zero())
                .map(|(&c, a)| (c, a * &s))
                .collect();
            LinearIdentity {
                terms,
                constant: &row[k] * &s,
            }
        })
        .collect()
}
