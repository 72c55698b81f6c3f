//! Finite posets, order complexes of open intervals, and reduced rational
//! homology of simplicial complexes.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::qlinalg::{QMatrix, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PosetError {
    #[error("element {0} is not in the poset")]
    UnknownElement(usize),
    #[error("relation contains a cycle through element {0}")]
    NotAntisymmetric(usize),
    #[error("interval bounds are not strictly ordered")]
    EmptyBounds,
}

/// A finite strict partial order on `0..len`. The relation is transitively
/// closed at construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePoset {
    len: usize,
    less: Vec<Vec<bool>>,
}

impl FinitePoset {
    pub fn new(len: usize, pairs: &[(usize, usize)]) -> Result<Self, PosetError> {
        let mut less = vec![vec![false; len]; len];
        for &(a, b) in pairs {
            for x in [a, b] {
                if x >= len {
                    return Err(PosetError::UnknownElement(x));
                }
            }
            less[a][b] = true;
        }
        // Warshall
        for k in 0..len {
            for i in 0..len {
                if less[i][k] {
                    for j in 0..len {
                        if less[k][j] {
                            less[i][j] = true;
                        }
                    }
                }
            }
        }
        if let Some(i) = (0..len).find(|&i| less[i][i]) {
            return Err(PosetError::NotAntisymmetric(i));
        }
        Ok(FinitePoset { len, less })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        self.less[a][b]
    }

    /// Elements strictly between `lower` and `upper`, in increasing id order.
    pub fn open_interval(&self, lower: Bound, upper: Bound) -> Result<Vec<usize>, PosetError> {
        for b in [lower, upper] {
            if let Bound::Element(x) = b {
                if x >= self.len {
                    return Err(PosetError::UnknownElement(x));
                }
            }
        }
        match (lower, upper) {
            (Bound::Element(a), Bound::Element(b)) if !self.lt(a, b) => {
                return Err(PosetError::EmptyBounds)
            }
            (Bound::Top, _) | (_, Bound::Bottom) => return Err(PosetError::EmptyBounds),
            _ => {}
        }
        Ok((0..self.len)
            .filter(|&x| match lower {
                Bound::Element(a) => self.lt(a, x),
                _ => true,
            })
            .filter(|&x| match upper {
                Bound::Element(b) => self.lt(x, b),
                _ => true,
            })
            .collect())
    }
}

/// End point of an interval: a poset element or a virtual extremum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Bottom,
    Element(usize),
    Top,
}

/// A finite abstract simplicial complex.
///
/// Simplices are sorted vertex-index lists, grouped by dimension and kept in
/// lexicographic order. The empty simplex is always present, so the complex
/// with no vertices has reduced homology `Q` in degree -1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplex {
    vertices: Vec<usize>,
    /// `by_dim[k]` holds the `k`-simplices as positions into `vertices`.
    by_dim: Vec<Vec<Vec<usize>>>,
}

impl SimplicialComplex {
    /// The complex `{∅}`.
    pub fn empty() -> Self {
        SimplicialComplex {
            vertices: Vec::new(),
            by_dim: Vec::new(),
        }
    }

    /// Downward closure of `facets`, each a list of vertex labels.
    pub fn from_facets(facets: &[Vec<usize>]) -> Self {
        let mut labels: BTreeSet<usize> = BTreeSet::new();
        for f in facets {
            labels.extend(f.iter().copied());
        }
        let vertices: Vec<usize> = labels.into_iter().collect();
        let mut faces: BTreeSet<Vec<usize>> = BTreeSet::new();
        for f in facets {
            let mut pos: Vec<usize> = f
                .iter()
                .map(|v| vertices.binary_search(v).unwrap())
                .collect();
            pos.sort_unstable();
            pos.dedup();
            // every nonempty subset
            let k = pos.len();
            for mask in 1u64..(1u64 << k) {
                let s: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| pos[i]).collect();
                faces.insert(s);
            }
        }
        Self::from_faces(vertices, faces)
    }

    fn from_faces(vertices: Vec<usize>, faces: BTreeSet<Vec<usize>>) -> Self {
        let mut by_dim: Vec<Vec<Vec<usize>>> = Vec::new();
        for s in faces {
            let d = s.len() - 1;
            if by_dim.len() <= d {
                by_dim.resize(d + 1, Vec::new());
            }
            by_dim[d].push(s);
        }
        for level in &mut by_dim {
            level.sort();
        }
        SimplicialComplex { vertices, by_dim }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Largest simplex dimension, `-1` for `{∅}`.
    pub fn dim(&self) -> i64 {
        self.by_dim.len() as i64 - 1
    }

    /// Number of `k`-simplices for `k >= -1`.
    pub fn count(&self, k: i64) -> usize {
        match k {
            -1 => 1,
            k if k < -1 => 0,
            k => self.by_dim.get(k as usize).map_or(0, Vec::len),
        }
    }

    /// Simplices of dimension `k` as vertex labels.
    pub fn simplices(&self, k: usize) -> Vec<Vec<usize>> {
        self.by_dim
            .get(k)
            .map(|l| {
                l.iter()
                    .map(|s| s.iter().map(|&i| self.vertices[i]).collect())
                    .collect()
            })
            .unwrap_or_default()
    }

    /// All maximal simplices as vertex labels.
    pub fn facets(&self) -> Vec<Vec<usize>> {
        let all: Vec<BTreeSet<usize>> = (0..self.by_dim.len())
            .flat_map(|k| self.simplices(k))
            .map(|s| s.into_iter().collect())
            .collect();
        all.iter()
            .filter(|s| !all.iter().any(|t| t.len() > s.len() && s.is_subset(t)))
            .map(|s| s.iter().copied().collect())
            .collect()
    }

    /// The cone with a new apex vertex labelled `apex`.
    pub fn cone(&self, apex: usize) -> Self {
        assert!(!self.vertices.contains(&apex), "apex label already in use");
        let mut facets: Vec<Vec<usize>> = self
            .facets()
            .into_iter()
            .map(|mut f| {
                f.push(apex);
                f
            })
            .collect();
        if facets.is_empty() {
            facets.push(vec![apex]);
        }
        Self::from_facets(&facets)
    }

    /// Signed boundary matrix `C_k -> C_{k-1}` for `k >= 0`; `k = 0` is the
    /// augmentation onto the empty simplex.
    pub fn boundary_matrix(&self, k: usize) -> QMatrix {
        let src = self.by_dim.get(k).map_or(&[][..], Vec::as_slice);
        if k == 0 {
            let mut m = QMatrix::zeros(1, src.len());
            for c in 0..src.len() {
                m.set(0, c, Rational::one());
            }
            return m;
        }
        let tgt = &self.by_dim[k - 1];
        let mut m = QMatrix::zeros(tgt.len(), src.len());
        for (c, s) in src.iter().enumerate() {
            for i in 0..s.len() {
                let mut face = s.clone();
                face.remove(i);
                let r = tgt.binary_search(&face).expect("complex is downward closed");
                let sign = if i % 2 == 0 { Rational::one() } else { -Rational::one() };
                m.set(r, c, sign);
            }
        }
        m
    }
}

/// Order complex of the open interval `(lower, upper)`: its vertices are the
/// elements strictly between the bounds and its simplices are the chains.
pub fn order_complex(
    poset: &FinitePoset,
    lower: Bound,
    upper: Bound,
) -> Result<SimplicialComplex, PosetError> {
    let elems = poset.open_interval(lower, upper)?;
    let mut faces = BTreeSet::new();
    // extend chains upward; positions index into `elems`
    let mut stack: Vec<Vec<usize>> = (0..elems.len()).map(|i| vec![i]).collect();
    while let Some(chain) = stack.pop() {
        let top = elems[*chain.last().unwrap()];
        for (j, &e) in elems.iter().enumerate() {
            if poset.lt(top, e) {
                let mut next = chain.clone();
                next.push(j);
                stack.push(next);
            }
        }
        let mut sorted = chain;
        sorted.sort_unstable();
        faces.insert(sorted);
    }
    Ok(SimplicialComplex::from_faces(elems, faces))
}

/// Reduced rational Betti numbers indexed from degree -1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BettiVector {
    values: Vec<u64>,
}

impl BettiVector {
    pub fn from_degrees(values: Vec<u64>) -> Self {
        BettiVector { values }
    }

    /// `b_k` for `k >= -1`; zero outside the stored range.
    pub fn get(&self, k: i64) -> u64 {
        if k < -1 {
            return 0;
        }
        self.values.get((k + 1) as usize).copied().unwrap_or(0)
    }

    /// Values for degrees `-1, 0, 1, ...`.
    pub fn as_slice(&self) -> &[u64] {
        &self.values
    }

    /// Iterates over `(degree, value)` pairs with nonzero value.
    pub fn nonzero(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0)
            .map(|(i, v)| (i as i64 - 1, *v))
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| if i % 2 == 1 { v as i64 } else { -(v as i64) })
            .sum()
    }

    pub fn is_acyclic(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }
}

/// `b_k = f_k - rank ∂_k - rank ∂_{k+1}` with the augmented chain complex.
pub fn reduced_betti(complex: &SimplicialComplex) -> BettiVector {
    let top = complex.by_dim.len();
    // ranks[k] = rank of ∂_k for k = 0..=top, where ∂_top = 0
    let mut ranks = vec![0usize; top + 1];
    for (k, r) in ranks.iter_mut().enumerate().take(top) {
        *r = complex.boundary_matrix(k).rank();
    }
    let mut values = Vec::with_capacity(top + 1);
    // degree -1: C_{-1} = Q, no outgoing map
    values.push((1 - ranks.first().copied().unwrap_or(0)) as u64);
    for k in 0..top {
        let f = complex.by_dim[k].len();
        values.push((f - ranks[k] - ranks[k + 1]) as u64);
    }
    BettiVector { values }
}
