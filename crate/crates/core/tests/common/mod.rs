//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use invar::arrangement::AffineSubspace;
use invar::poset::SimplicialComplex;
use invar::qlinalg::{rat, QMatrix, Rational};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const PRIMES: [i128; 2] = [1_000_000_007, 2_305_843_009_213_693_951];

fn pow_mod(mut b: i128, mut e: i128, p: i128) -> i128 {
    let mut r = 1i128;
    b = b.rem_euclid(p);
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, p);
        }
        b = mul_mod(b, b, p);
        e >>= 1;
    }
    r
}

/// `a * b mod p`; products stay below `2^124` for the primes used here.
fn mul_mod(a: i128, b: i128, p: i128) -> i128 {
    (a.rem_euclid(p) * b.rem_euclid(p)) % p
}

/// Rank over `F_p` by plain Gaussian elimination.
pub fn rank_mod_p(rows: &[Vec<i64>], p: i128) -> usize {
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| (x as i128).rem_euclid(p)).collect())
        .collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = pow_mod(m[rank][c], p - 2, p);
        for r in 0..m.len() {
            if r != rank && m[r][c] != 0 {
                let f = mul_mod(m[r][c], inv, p);
                for k in c..cols {
                    let sub = mul_mod(f, m[rank][k], p);
                    m[r][k] = (m[r][k] - sub).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn random_int_matrix(rng: &mut ChaCha8Rng, max_dim: usize, range: i64) -> Vec<Vec<i64>> {
    let rows = rng.gen_range(1..=max_dim);
    let cols = rng.gen_range(1..=max_dim);
    // low-rank products so that rank deficiency actually occurs
    let inner = rng.gen_range(1..=rows.max(cols));
    let a: Vec<Vec<i64>> = (0..rows)
        .map(|_| (0..inner).map(|_| rng.gen_range(-range..=range)).collect())
        .collect();
    let b: Vec<Vec<i64>> = (0..inner)
        .map(|_| (0..cols).map(|_| rng.gen_range(-range..=range)).collect())
        .collect();
    (0..rows)
        .map(|i| (0..cols).map(|j| (0..inner).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

pub fn random_complex(rng: &mut ChaCha8Rng, vertices: usize, max_facets: usize, max_size: usize) -> SimplicialComplex {
    let n = rng.gen_range(1..=max_facets);
    let facets: Vec<Vec<usize>> = (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=max_size.min(vertices));
            let mut f: Vec<usize> = (0..vertices).collect();
            for i in 0..k {
                let j = rng.gen_range(i..vertices);
                f.swap(i, j);
            }
            f.truncate(k);
            f.sort();
            f
        })
        .collect();
    SimplicialComplex::from_facets(&facets)
}

/// A consistent affine subspace of dimension `dim` in `C^n`, given by
/// `n - dim` random equations through a random rational point (or the
/// origin).
pub fn random_subspace(rng: &mut ChaCha8Rng, n: usize, dim: usize, central: bool) -> AffineSubspace {
    let point: Vec<i64> = (0..n)
        .map(|_| if central { 0 } else { rng.gen_range(-2..=2) })
        .collect();
    loop {
        let rows: Vec<Vec<Rational>> = (0..n - dim)
            .map(|_| {
                let a: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
                let c: i64 = -a.iter().zip(&point).map(|(x, y)| x * y).sum::<i64>();
                a.into_iter().chain([c]).map(rat).collect()
            })
            .collect();
        let s = AffineSubspace::new(n, rows).expect("passes through the point");
        if s.dim() == dim {
            return s;
        }
    }
}

pub fn random_hyperplanes(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<AffineSubspace> {
    (0..count).map(|_| random_subspace(rng, n, n - 1, true)).collect()
}

/// `other ⊆ s`, decided by comparing ranks of augmented systems.
pub fn contained(other: &AffineSubspace, s: &AffineSubspace) -> bool {
    let stacked = other.equations().vstack(s.equations());
    stacked.rank() == other.equations().rank()
}

/// Components not contained in any other (first copy kept for duplicates).
pub fn maximal_dims(components: &[AffineSubspace]) -> Vec<usize> {
    let mut out = Vec::new();
    for (i, c) in components.iter().enumerate() {
        let dominated = components.iter().enumerate().any(|(j, o)| {
            j != i && contained(c, o) && (!contained(o, c) || j < i)
        });
        if !dominated {
            out.push(c.dim());
        }
    }
    out
}

/// Reduced Betti numbers of `(C^*)^k × C^{n-k}`, degrees `0..2n`: the
/// complement of `k` coordinate hyperplanes in `C^n` (Künneth).
pub fn torus_betti(k: usize, n: usize) -> Vec<u64> {
    let mut b = vec![0u64; 2 * n];
    let mut binom = 1u64;
    for (j, slot) in b.iter_mut().enumerate().take(k + 1) {
        if j > 0 {
            binom = binom * (k - j + 1) as u64 / j as u64;
            *slot = binom;
        }
    }
    b
}

pub fn coordinate_hyperplanes(k: usize, n: usize) -> Vec<AffineSubspace> {
    (0..k)
        .map(|i| AffineSubspace::new(n, vec![invar::arrangement::unit_row(n, i)]).unwrap())
        .collect()
}

pub fn qmatrix(rows: &[Vec<i64>]) -> QMatrix {
    QMatrix::from_i64_rows(rows)
}
