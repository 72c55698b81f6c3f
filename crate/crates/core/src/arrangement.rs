//! Complex subspace arrangements: intersection lattices, Čech–de Rham
//! tables, complement Betti numbers, and Lyubeznik tables in dimension at
//! most two.
//!
//! A subspace of `C^n` is given by rational affine equations `c . x + c0 = 0`
//! and stored as the RREF of its augmented `k x (n+1)` matrix, which is a
//! canonical form: two subspaces are equal iff their stored matrices are.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::poset::{order_complex, reduced_betti, Bound, FinitePoset};
use crate::qlinalg::{QMatrix, Rational};
use crate::table::{InvariantTable, TableKind};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArrangementError {
    #[error("arrangement has no components")]
    NoComponents,
    #[error("component {index} lives in C^{found}, expected C^{expected}")]
    AmbientMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("equation row has {found} entries, expected {expected}")]
    RowLength { expected: usize, found: usize },
    #[error("equation system has no solutions")]
    Inconsistent,
    #[error("component {0} is the whole ambient space")]
    NotProper(usize),
    #[error("component {0} does not pass through the origin")]
    NotCentral(usize),
    #[error("component {0} is not a hyperplane")]
    NotHyperplane(usize),
    #[error("hyperplanes have no common point")]
    NoCommonPoint,
    #[error("no Lyubeznik formula is available in dimension {0} (> 2)")]
    DimensionTooLarge(usize),
}

/// An affine subspace of `C^n` cut out by rational equations.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineSubspace {
    ambient_dim: usize,
    equations: QMatrix,
}

impl AffineSubspace {
    /// `rows` are `[c_1, ..., c_n, c0]` meaning `c . x + c0 = 0`.
    pub fn new(ambient_dim: usize, rows: Vec<Vec<Rational>>) -> Result<Self, ArrangementError> {
        for r in &rows {
            if r.len() != ambient_dim + 1 {
                return Err(ArrangementError::RowLength {
                    expected: ambient_dim + 1,
                    found: r.len(),
                });
            }
        }
        Self::from_matrix(ambient_dim, QMatrix::from_rows(ambient_dim + 1, rows))
    }

    pub fn from_i64(ambient_dim: usize, rows: &[&[i64]]) -> Result<Self, ArrangementError> {
        Self::new(
            ambient_dim,
            rows.iter()
                .map(|r| r.iter().map(|&x| crate::qlinalg::rat(x)).collect())
                .collect(),
        )
    }

    fn from_matrix(ambient_dim: usize, m: QMatrix) -> Result<Self, ArrangementError> {
        let (basis, pivots) = {
            let (r, p) = m.rref_with_pivots();
            let rows = (0..p.len()).map(|i| r.row(i).to_vec()).collect();
            (QMatrix::from_rows(ambient_dim + 1, rows), p)
        };
        if pivots.last() == Some(&ambient_dim) {
            return Err(ArrangementError::Inconsistent);
        }
        Ok(AffineSubspace {
            ambient_dim,
            equations: basis,
        })
    }

    /// The whole of `C^n`.
    pub fn ambient(ambient_dim: usize) -> Self {
        AffineSubspace {
            ambient_dim,
            equations: QMatrix::zeros(0, ambient_dim + 1),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Canonical equations (RREF, no zero rows).
    pub fn equations(&self) -> &QMatrix {
        &self.equations
    }

    pub fn dim(&self) -> usize {
        self.ambient_dim - self.equations.rows()
    }

    pub fn codim(&self) -> usize {
        self.equations.rows()
    }

    pub fn is_ambient(&self) -> bool {
        self.equations.rows() == 0
    }

    pub fn contains_origin(&self) -> bool {
        (0..self.equations.rows()).all(|r| self.equations.get(r, self.ambient_dim).is_zero())
    }

    /// `None` when the intersection is empty.
    pub fn intersect(&self, other: &AffineSubspace) -> Option<AffineSubspace> {
        assert_eq!(self.ambient_dim, other.ambient_dim);
        Self::from_matrix(self.ambient_dim, self.equations.vstack(&other.equations)).ok()
    }

    /// `other ⊆ self`, decided by a rank test on the stacked systems.
    pub fn contains(&self, other: &AffineSubspace) -> bool {
        let stacked = other.equations.vstack(&self.equations);
        stacked.rank() == other.equations.rows()
    }
}

impl fmt::Debug for AffineSubspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AffineSubspace(C^{}, {:?})", self.ambient_dim, self.equations)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flat {
    pub id: usize,
    pub subspace: AffineSubspace,
    pub dim: usize,
}

/// Non-fatal findings while building a lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LatticeWarning {
    /// Component `index` duplicates or is contained in component `container`.
    Redundant { index: usize, container: usize },
}

impl fmt::Display for LatticeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeWarning::Redundant { index, container } => write!(
                f,
                "component {index} is contained in component {container} and was dropped"
            ),
        }
    }
}

/// All nonempty intersections of the components, ordered by inclusion, with
/// the ambient space as unique top. Flat 0 is the ambient space; the rest are
/// sorted by decreasing dimension, then by equations.
#[derive(Clone, Debug)]
pub struct IntersectionLattice {
    ambient_dim: usize,
    flats: Vec<Flat>,
    /// Flat ids of the maximal components.
    components: Vec<usize>,
    poset: FinitePoset,
    warnings: Vec<LatticeWarning>,
}

/// Drops components contained in another one; keeps the first of duplicates.
fn maximal_components(
    components: &[AffineSubspace],
) -> (Vec<(usize, &AffineSubspace)>, Vec<LatticeWarning>) {
    let mut warnings = Vec::new();
    let mut kept = Vec::new();
    for (i, c) in components.iter().enumerate() {
        let container = components.iter().enumerate().find(|&(j, o)| {
            j != i && o.contains(c) && (!c.contains(o) || j < i)
        });
        match container {
            Some((j, _)) => warnings.push(LatticeWarning::Redundant {
                index: i,
                container: j,
            }),
            None => kept.push((i, c)),
        }
    }
    (kept, warnings)
}

fn check_ambient(components: &[AffineSubspace]) -> Result<usize, ArrangementError> {
    let n = components
        .first()
        .ok_or(ArrangementError::NoComponents)?
        .ambient_dim();
    for (index, c) in components.iter().enumerate() {
        if c.ambient_dim() != n {
            return Err(ArrangementError::AmbientMismatch {
                index,
                expected: n,
                found: c.ambient_dim(),
            });
        }
    }
    Ok(n)
}

/// Closes the components under pairwise intersection and adds the ambient
/// space as top.
pub fn build_lattice(components: &[AffineSubspace]) -> Result<IntersectionLattice, ArrangementError> {
    let n = check_ambient(components)?;
    if let Some(i) = components.iter().position(AffineSubspace::is_ambient) {
        return Err(ArrangementError::NotProper(i));
    }
    let (kept, warnings) = maximal_components(components);
    let mut all: BTreeSet<AffineSubspace> = kept.iter().map(|(_, c)| (*c).clone()).collect();
    let mut frontier: Vec<AffineSubspace> = all.iter().cloned().collect();
    while let Some(f) = frontier.pop() {
        for (_, c) in &kept {
            if let Some(x) = f.intersect(c) {
                if all.insert(x.clone()) {
                    frontier.push(x);
                }
            }
        }
    }
    let mut proper: Vec<AffineSubspace> = all.into_iter().collect();
    proper.sort_by(|a, b| b.dim().cmp(&a.dim()).then_with(|| a.cmp(b)));
    let mut flats = vec![Flat {
        id: 0,
        dim: n,
        subspace: AffineSubspace::ambient(n),
    }];
    for s in proper {
        flats.push(Flat {
            id: flats.len(),
            dim: s.dim(),
            subspace: s,
        });
    }
    let mut pairs = Vec::new();
    for a in &flats {
        for b in &flats {
            if a.id != b.id && a.dim < b.dim && b.subspace.contains(&a.subspace) {
                pairs.push((a.id, b.id));
            }
        }
    }
    let poset = FinitePoset::new(flats.len(), &pairs).expect("containment is a partial order");
    let mut comp_ids: Vec<usize> = kept
        .iter()
        .map(|(_, c)| flats.iter().position(|f| &f.subspace == *c).unwrap())
        .collect();
    comp_ids.sort_unstable();
    Ok(IntersectionLattice {
        ambient_dim: n,
        flats,
        components: comp_ids,
        poset,
        warnings,
    })
}

impl IntersectionLattice {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn flats(&self) -> &[Flat] {
        &self.flats
    }

    pub fn top(&self) -> usize {
        0
    }

    /// Flat ids of the maximal components.
    pub fn components(&self) -> &[usize] {
        &self.components
    }

    pub fn poset(&self) -> &FinitePoset {
        &self.poset
    }

    pub fn warnings(&self) -> &[LatticeWarning] {
        &self.warnings
    }

    /// `dim Y`, the largest component dimension.
    pub fn variety_dim(&self) -> usize {
        self.components
            .iter()
            .map(|&i| self.flats[i].dim)
            .max()
            .unwrap_or(0)
    }

    /// Flats covering `id` (immediately above it).
    pub fn covers(&self, id: usize) -> Vec<usize> {
        let above: Vec<usize> = (0..self.flats.len()).filter(|&j| self.poset.lt(id, j)).collect();
        above
            .iter()
            .copied()
            .filter(|&j| !above.iter().any(|&k| self.poset.lt(k, j)))
            .collect()
    }

    pub fn is_central(&self) -> bool {
        let mut it = self.components.iter().map(|&i| self.flats[i].subspace.clone());
        let first = it.next().expect("lattice has a component");
        it.try_fold(first, |acc, c| acc.intersect(&c)).is_some()
    }
}

/// `ρ_{p,q} = Σ_{dim F = p} dim H̃_{q-p-1}(Δ(F, top))`, summed over proper
/// flats. The arrangement sequence collapses at `E_2`, so this is the table
/// on every page.
pub fn cdr_table(lattice: &IntersectionLattice) -> InvariantTable {
    let d = lattice.variety_dim();
    let mut t = InvariantTable::zeros(TableKind::CechDeRham, d);
    for f in &lattice.flats()[1..] {
        let k = order_complex(lattice.poset(), Bound::Element(f.id), Bound::Element(lattice.top()))
            .expect("flat lies below the top");
        for (deg, b) in reduced_betti(&k).nonzero() {
            let q = (f.dim as i64 + deg + 1) as usize;
            let cur = t.value(f.dim, q);
            t.set(f.dim, q, Some(cur + b));
        }
    }
    t
}

/// Reduced Betti numbers of `U = C^n ∖ Y`, indexed by degree `0..2n`:
/// `b̃_k = Σ_{2n-p-q-1 = k} ρ_{p,q}`.
pub fn complement_betti(table: &InvariantTable, ambient_dim: usize) -> Vec<u64> {
    let n = ambient_dim;
    let mut out = vec![0u64; 2 * n];
    for ((p, q), v) in table.cells() {
        let v = v.unwrap_or(0);
        if v == 0 {
            continue;
        }
        let k = 2 * n - p - q - 1;
        out[k] += v;
    }
    out
}

/// Möbius-function Betti numbers for a central hyperplane arrangement:
/// `b_k(U) = Σ_{codim F = k} |μ(top, F)|`, degrees `0..=n`.
pub fn moebius_betti_oracle(lattice: &IntersectionLattice) -> Result<Vec<u64>, ArrangementError> {
    for &c in lattice.components() {
        if lattice.flats()[c].subspace.codim() != 1 {
            return Err(ArrangementError::NotHyperplane(c));
        }
    }
    if !lattice.is_central() {
        return Err(ArrangementError::NoCommonPoint);
    }
    let flats = lattice.flats();
    // flats are sorted by decreasing dimension, so everything above a flat
    // comes earlier
    let mut mu: Vec<i64> = vec![0; flats.len()];
    mu[0] = 1;
    for f in &flats[1..] {
        mu[f.id] = -(0..f.id)
            .filter(|&g| lattice.poset().lt(f.id, g))
            .map(|g| mu[g])
            .sum::<i64>();
    }
    let n = lattice.ambient_dim();
    let mut b = vec![0u64; n + 1];
    for f in flats {
        b[n - f.dim] += mu[f.id].unsigned_abs();
    }
    Ok(b)
}

/// Lyubeznik table for a central arrangement of dimension at most two.
///
/// In dimension two, `a` counts connected components of the graph on the
/// 2-dimensional components with edges between components meeting in a
/// line or more; lower-dimensional components are ignored.
pub fn lyubeznik_dim2(components: &[AffineSubspace]) -> Result<InvariantTable, ArrangementError> {
    check_ambient(components)?;
    if let Some(i) = components.iter().position(|c| !c.contains_origin()) {
        return Err(ArrangementError::NotCentral(i));
    }
    let (kept, _) = maximal_components(components);
    let d = kept.iter().map(|(_, c)| c.dim()).max().unwrap_or(0);
    if d > 2 {
        return Err(ArrangementError::DimensionTooLarge(d));
    }
    let a = if d == 2 {
        let planes: Vec<&AffineSubspace> =
            kept.iter().map(|(_, c)| *c).filter(|c| c.dim() == 2).collect();
        count_linked_classes(&planes) as u64
    } else {
        1
    };
    Ok(crate::table::canonical_small_tables(d, a).expect("dimension and a checked"))
}

fn count_linked_classes(planes: &[&AffineSubspace]) -> usize {
    let mut parent: Vec<usize> = (0..planes.len()).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        parent[x] = r;
        r
    }
    for i in 0..planes.len() {
        for j in i + 1..planes.len() {
            if planes[i].intersect(planes[j]).is_some_and(|x| x.dim() >= 1) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    (0..planes.len()).filter(|&i| find(&mut parent, i) == i).count()
}

#[doc(hidden)]
pub fn unit_row(n: usize, i: usize) -> Vec<Rational> {
    let mut r = vec![Rational::zero(); n + 1];
    r[i] = Rational::one();
    r
}
