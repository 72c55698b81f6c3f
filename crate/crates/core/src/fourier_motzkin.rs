//! Exact Fourier–Motzkin elimination for small systems `A x >= b`.
//!
//! Used for strict-convexity certificates and for separating hyperplanes
//! between cones. Systems here have at most a handful of variables, so the
//! quadratic blowup per elimination step is acceptable; constraints are kept
//! primitive and deduplicated after every step.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::qlinalg::{dot, primitive_scale, Rational};

/// One constraint `coeffs . x >= rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inequality {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
}

impl Inequality {
    pub fn new(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Inequality { coeffs, rhs }
    }

    pub fn holds(&self, x: &[Rational]) -> bool {
        dot(&self.coeffs, x) >= self.rhs
    }

    fn normalized(mut self) -> Self {
        if self.coeffs.iter().all(Zero::is_zero) {
            return self;
        }
        let s = primitive_scale(&self.coeffs);
        for c in &mut self.coeffs {
            *c *= &s;
        }
        self.rhs *= &s;
        self
    }
}

/// A conjunction of inequalities over `vars` unknowns.
#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    vars: usize,
    rows: Vec<Inequality>,
}

impl LinearSystem {
    pub fn new(vars: usize) -> Self {
        LinearSystem {
            vars,
            rows: Vec::new(),
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn constraints(&self) -> &[Inequality] {
        &self.rows
    }

    pub fn push_ge(&mut self, coeffs: Vec<Rational>, rhs: Rational) {
        assert_eq!(coeffs.len(), self.vars, "coefficient count mismatch");
        self.rows.push(Inequality::new(coeffs, rhs));
    }

    pub fn push_le(&mut self, coeffs: Vec<Rational>, rhs: Rational) {
        self.push_ge(coeffs.into_iter().map(|c| -c).collect(), -rhs);
    }

    pub fn push_eq(&mut self, coeffs: Vec<Rational>, rhs: Rational) {
        self.push_le(coeffs.clone(), rhs.clone());
        self.push_ge(coeffs, rhs);
    }

    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        self.rows.iter().all(|r| r.holds(x))
    }

    /// Decides feasibility; on success returns a rational point satisfying
    /// every constraint, reconstructed by back substitution.
    pub fn solve(&self) -> Option<Vec<Rational>> {
        // stages[j] holds the system over variables 0..=j (later ones eliminated).
        let mut stages: Vec<Vec<Inequality>> = Vec::with_capacity(self.vars);
        let mut current = simplify(self.rows.clone())?;
        for j in (0..self.vars).rev() {
            stages.push(current.clone());
            current = simplify(eliminate(&current, j))?;
        }
        // Remaining constraints have no variables; simplify already rejected
        // `0 >= positive`.
        stages.reverse();
        let mut x = vec![Rational::zero(); self.vars];
        for j in 0..self.vars {
            let mut lo: Option<Rational> = None;
            let mut hi: Option<Rational> = None;
            for row in &stages[j] {
                let a = &row.coeffs[j];
                if a.is_zero() {
                    continue;
                }
                let rest: Rational = row.coeffs[..j]
                    .iter()
                    .zip(&x[..j])
                    .map(|(c, v)| c * v)
                    .sum();
                let bound = (&row.rhs - rest) / a;
                if a.is_positive() {
                    if lo.as_ref().is_none_or(|l| bound > *l) {
                        lo = Some(bound);
                    }
                } else if hi.as_ref().is_none_or(|h| bound < *h) {
                    hi = Some(bound);
                }
            }
            let zero = Rational::zero();
            x[j] = match (lo, hi) {
                (Some(l), Some(h)) => {
                    debug_assert!(l <= h);
                    if l <= zero && zero <= h {
                        zero
                    } else if l > zero {
                        l.ceil().min(h.clone()).max(l)
                    } else {
                        h.floor().max(l.clone()).min(h)
                    }
                }
                (Some(l), None) => {
                    if l <= zero {
                        zero
                    } else {
                        l.ceil()
                    }
                }
                (None, Some(h)) => {
                    if h >= zero {
                        zero
                    } else {
                        h.floor()
                    }
                }
                (None, None) => zero,
            };
        }
        debug_assert!(self.is_satisfied_by(&x));
        Some(x)
    }

    pub fn is_feasible(&self) -> bool {
        self.solve().is_some()
    }
}

fn eliminate(rows: &[Inequality], j: usize) -> Vec<Inequality> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut out = Vec::new();
    for r in rows {
        let a = &r.coeffs[j];
        if a.is_positive() {
            pos.push(r);
        } else if a.is_negative() {
            neg.push(r);
        } else {
            out.push(r.clone());
        }
    }
    for p in &pos {
        for n in &neg {
            let wp = -n.coeffs[j].clone();
            let wn = p.coeffs[j].clone();
            let coeffs = p
                .coeffs
                .iter()
                .zip(&n.coeffs)
                .map(|(a, b)| a * &wp + b * &wn)
                .collect();
            let rhs = &p.rhs * &wp + &n.rhs * &wn;
            out.push(Inequality::new(coeffs, rhs));
        }
    }
    out
}

/// Normalizes, drops trivially true rows and keeps only the tightest row per
/// direction. Returns `None` when a row reads `0 >= positive`.
fn simplify(rows: Vec<Inequality>) -> Option<Vec<Inequality>> {
    let mut best: BTreeMap<Vec<Rational>, Rational> = BTreeMap::new();
    for r in rows {
        let r = r.normalized();
        if r.coeffs.iter().all(Zero::is_zero) {
            if r.rhs.is_positive() {
                return None;
            }
            continue;
        }
        best.entry(r.coeffs)
            .and_modify(|b| {
                if r.rhs > *b {
                    *b = r.rhs.clone();
                }
            })
            .or_insert(r.rhs);
    }
    Some(
        best.into_iter()
            .map(|(coeffs, rhs)| Inequality { coeffs, rhs })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::{rat, ratio};

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().copied().map(rat).collect()
    }

    #[test]
    fn box_is_feasible() {
        let mut s = LinearSystem::new(2);
        s.push_ge(v(&[1, 0]), rat(1));
        s.push_le(v(&[1, 0]), rat(3));
        s.push_ge(v(&[0, 1]), rat(-2));
        s.push_le(v(&[1, 1]), rat(2));
        let x = s.solve().unwrap();
        assert!(s.is_satisfied_by(&x));
    }

    #[test]
    fn contradiction_is_detected() {
        let mut s = LinearSystem::new(2);
        s.push_ge(v(&[1, 1]), rat(1));
        s.push_ge(v(&[-1, 0]), rat(0));
        s.push_ge(v(&[0, -1]), rat(0));
        assert!(s.solve().is_none());
    }

    #[test]
    fn thin_interval() {
        let mut s = LinearSystem::new(1);
        s.push_ge(v(&[3]), rat(1));
        s.push_le(v(&[3]), rat(1));
        assert_eq!(s.solve().unwrap(), vec![ratio(1, 3)]);
    }

    #[test]
    fn equalities() {
        let mut s = LinearSystem::new(3);
        s.push_eq(v(&[1, 1, 1]), rat(0));
        s.push_ge(v(&[1, 0, 0]), rat(1));
        s.push_ge(v(&[0, 1, 0]), rat(1));
        let x = s.solve().unwrap();
        assert!(s.is_satisfied_by(&x));
        s.push_ge(v(&[0, 0, 1]), rat(0));
        assert!(s.solve().is_none());
    }

    #[test]
    fn empty_system() {
        assert_eq!(LinearSystem::new(2).solve(), Some(vec![rat(0), rat(0)]));
    }
}
