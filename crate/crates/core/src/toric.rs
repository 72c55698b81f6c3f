//! Complete fans in `Z^3`: validation, Picard rank via support functions,
//! projectivity via strictly convex support functions, and the Lyubeznik
//! table of cones over projective toric 3-folds.
//!
//! Completeness is certified by the wall condition: in a fan whose cones meet
//! face to face, every 2-dimensional face of a maximal cone must be shared by
//! exactly two maximal cones.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::Zero;
use thiserror::Error;

use crate::fourier_motzkin::LinearSystem;
use crate::qlinalg::{dot, rat, QMatrix, Rational};
use crate::table::{InvariantTable, TableKind};

pub type Ray = [i64; 3];

/// A fan given by its rays and maximal cones (lists of ray indices).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fan3 {
    pub rays: Vec<Ray>,
    pub max_cones: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FanViolation {
    ZeroRay(usize),
    NonPrimitiveRay(usize),
    DuplicateRay(usize, usize),
    UnusedRay(usize),
    RayIndexOutOfRange { cone: usize, index: usize },
    DuplicateCone(usize, usize),
    NotFullDimensional(usize),
    NotStronglyConvex(usize),
    NonExtremalGenerator { cone: usize, ray: usize },
    /// Two maximal cones do not meet in a common face.
    BadIntersection(usize, usize),
    /// A 2-face lies on only one maximal cone, so the fan is not complete.
    OpenWall { cone: usize, rays: Vec<usize> },
    OverfullWall { rays: Vec<usize>, cones: Vec<usize> },
}

impl fmt::Display for FanViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use FanViolation::*;
        match self {
            ZeroRay(i) => write!(f, "ray {i} is zero"),
            NonPrimitiveRay(i) => write!(f, "ray {i} is not primitive"),
            DuplicateRay(a, b) => write!(f, "rays {a} and {b} coincide"),
            UnusedRay(i) => write!(f, "ray {i} lies on no maximal cone"),
            RayIndexOutOfRange { cone, index } => {
                write!(f, "cone {cone} refers to missing ray {index}")
            }
            DuplicateCone(a, b) => write!(f, "cones {a} and {b} coincide"),
            NotFullDimensional(c) => write!(f, "cone {c} is not 3-dimensional"),
            NotStronglyConvex(c) => write!(f, "cone {c} contains a line"),
            NonExtremalGenerator { cone, ray } => {
                write!(f, "ray {ray} is not an edge of cone {cone}")
            }
            BadIntersection(a, b) => write!(f, "cones {a} and {b} do not meet in a common face"),
            OpenWall { cone, rays } => {
                write!(f, "wall {rays:?} of cone {cone} has no neighbouring cone")
            }
            OverfullWall { rays, cones } => write!(f, "wall {rays:?} lies on cones {cones:?}"),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ToricError {
    #[error("invalid fan: {}", .0.first().map(|v| v.to_string()).unwrap_or_default())]
    InvalidFan(Vec<FanViolation>),
    #[error("fan is complete but admits no strictly convex support function")]
    NotProjective,
}

/// A 2-dimensional face shared by two maximal cones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wall {
    pub cones: (usize, usize),
    /// Two rays spanning the wall.
    pub spanning: (usize, usize),
    /// All rays of the fan lying on the wall.
    pub rays: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FanReport {
    pub violations: Vec<FanViolation>,
    pub walls: Vec<Wall>,
    pub simplicial: bool,
}

impl FanReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Facet {
    rays: Vec<usize>,
    spanning: (usize, usize),
    normal: [i128; 3],
}

fn wide(v: Ray) -> [i128; 3] {
    [v[0] as i128, v[1] as i128, v[2] as i128]
}

fn cross(a: [i128; 3], b: [i128; 3]) -> [i128; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn idot(a: [i128; 3], b: [i128; 3]) -> i128 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn is_zero3(a: [i128; 3]) -> bool {
    a == [0, 0, 0]
}

fn rank_of(vs: &[Ray]) -> usize {
    QMatrix::from_i64_rows(&vs.iter().map(|v| v.to_vec()).collect::<Vec<_>>()).rank()
}

fn qvec(v: Ray) -> Vec<Rational> {
    v.iter().map(|&x| rat(x)).collect()
}

/// Facets of the cone generated by `gens` (global ray indices), with inward
/// normals. Errors if the cone is not full-dimensional and pointed.
fn cone_facets(rays: &[Ray], cone: usize, gens: &[usize]) -> Result<Vec<Facet>, FanViolation> {
    let vs: Vec<[i128; 3]> = gens.iter().map(|&g| wide(rays[g])).collect();
    if rank_of(&gens.iter().map(|&g| rays[g]).collect::<Vec<_>>()) < 3 {
        return Err(FanViolation::NotFullDimensional(cone));
    }
    let mut facets: BTreeMap<Vec<usize>, Facet> = BTreeMap::new();
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            let mut n = cross(vs[i], vs[j]);
            if is_zero3(n) {
                if idot(vs[i], vs[j]) < 0 {
                    return Err(FanViolation::NotStronglyConvex(cone));
                }
                continue;
            }
            let dots: Vec<i128> = vs.iter().map(|&v| idot(n, v)).collect();
            if dots.iter().all(|&d| d <= 0) {
                n = [-n[0], -n[1], -n[2]];
            } else if !dots.iter().all(|&d| d >= 0) {
                continue;
            }
            let on: Vec<usize> = (0..vs.len()).filter(|&k| dots[k] == 0).collect();
            let key: Vec<usize> = {
                let mut k: Vec<usize> = on.iter().map(|&k| gens[k]).collect();
                k.sort_unstable();
                k
            };
            if facets.contains_key(&key) {
                continue;
            }
            let spanning = spanning_pair(&vs, &on).ok_or(FanViolation::NotStronglyConvex(cone))?;
            let g = n.iter().fold(0i128, |acc, &x| acc.gcd(&x));
            facets.insert(
                key.clone(),
                Facet {
                    rays: key,
                    spanning: (gens[spanning.0], gens[spanning.1]),
                    normal: [n[0] / g, n[1] / g, n[2] / g],
                },
            );
        }
    }
    let normals: Vec<Ray> = facets
        .values()
        .map(|f| [f.normal[0] as i64, f.normal[1] as i64, f.normal[2] as i64])
        .collect();
    if normals.len() < 3 || rank_of(&normals) < 3 {
        return Err(FanViolation::NotStronglyConvex(cone));
    }
    for &g in gens {
        if !facets.values().any(|f| f.spanning.0 == g || f.spanning.1 == g) {
            return Err(FanViolation::NonExtremalGenerator { cone, ray: g });
        }
    }
    Ok(facets.into_values().collect())
}

/// The two extremal rays of a planar cone generated by `vs[on]`.
fn spanning_pair(vs: &[[i128; 3]], on: &[usize]) -> Option<(usize, usize)> {
    for &a in on {
        for &b in on {
            let ab = cross(vs[a], vs[b]);
            if is_zero3(ab) {
                continue;
            }
            let inside = on.iter().all(|&c| {
                idot(cross(vs[a], vs[c]), ab) >= 0 && idot(cross(vs[c], vs[b]), ab) >= 0
            });
            if inside {
                return Some((a.min(b), a.max(b)));
            }
        }
    }
    None
}

/// Whether two maximal cones meet exactly in the cone over their shared
/// rays, certified by a separating plane through those rays.
fn meet_in_common_face(rays: &[Ray], a: &[usize], b: &[usize]) -> bool {
    let shared: Vec<usize> = a.iter().copied().filter(|r| b.contains(r)).collect();
    if rank_of(&shared.iter().map(|&g| rays[g]).collect::<Vec<_>>()) == 3 {
        return false;
    }
    let mut sys = LinearSystem::new(3);
    for &r in &shared {
        sys.push_eq(qvec(rays[r]), Rational::zero());
    }
    for &r in a.iter().filter(|r| !shared.contains(r)) {
        sys.push_ge(qvec(rays[r]), rat(1));
    }
    for &r in b.iter().filter(|r| !shared.contains(r)) {
        sys.push_le(qvec(rays[r]), rat(-1));
    }
    sys.is_feasible()
}

/// Checks every fan axiom and the wall condition. Only the first failing
/// stage is reported: ray checks, then per-cone shape, then pairwise
/// intersections and walls.
pub fn validate_fan(fan: &Fan3) -> FanReport {
    let mut violations = Vec::new();
    for (i, r) in fan.rays.iter().enumerate() {
        if *r == [0, 0, 0] {
            violations.push(FanViolation::ZeroRay(i));
        } else if r.iter().fold(0i64, |acc, &x| acc.gcd(&x)) != 1 {
            violations.push(FanViolation::NonPrimitiveRay(i));
        }
        if let Some(j) = fan.rays[..i].iter().position(|s| s == r) {
            violations.push(FanViolation::DuplicateRay(j, i));
        }
    }
    let mut used = vec![false; fan.rays.len()];
    let mut sorted_cones: Vec<Vec<usize>> = Vec::new();
    for (c, cone) in fan.max_cones.iter().enumerate() {
        for &index in cone {
            match used.get_mut(index) {
                Some(u) => *u = true,
                None => violations.push(FanViolation::RayIndexOutOfRange { cone: c, index }),
            }
        }
        let mut s = cone.clone();
        s.sort_unstable();
        s.dedup();
        if let Some(j) = sorted_cones.iter().position(|t| *t == s) {
            violations.push(FanViolation::DuplicateCone(j, c));
        }
        sorted_cones.push(s);
    }
    for (i, u) in used.iter().enumerate() {
        if !u {
            violations.push(FanViolation::UnusedRay(i));
        }
    }
    let fail = |violations| FanReport {
        violations,
        walls: Vec::new(),
        simplicial: false,
    };
    if !violations.is_empty() {
        return fail(violations);
    }

    let mut facets = Vec::new();
    for (c, cone) in sorted_cones.iter().enumerate() {
        match cone_facets(&fan.rays, c, cone) {
            Ok(f) => facets.push(f),
            Err(v) => violations.push(v),
        }
    }
    if !violations.is_empty() {
        return fail(violations);
    }

    for a in 0..sorted_cones.len() {
        for b in a + 1..sorted_cones.len() {
            if !meet_in_common_face(&fan.rays, &sorted_cones[a], &sorted_cones[b]) {
                violations.push(FanViolation::BadIntersection(a, b));
            }
        }
    }
    let mut by_rays: BTreeMap<Vec<usize>, Vec<(usize, (usize, usize))>> = BTreeMap::new();
    for (c, fs) in facets.iter().enumerate() {
        for f in fs {
            by_rays.entry(f.rays.clone()).or_default().push((c, f.spanning));
        }
    }
    let mut walls = Vec::new();
    for (rays, cones) in by_rays {
        match cones.as_slice() {
            [(a, span), (b, _)] => walls.push(Wall {
                cones: (*a, *b),
                spanning: *span,
                rays,
            }),
            [(cone, _)] => violations.push(FanViolation::OpenWall { cone: *cone, rays }),
            _ => violations.push(FanViolation::OverfullWall {
                rays,
                cones: cones.iter().map(|c| c.0).collect(),
            }),
        }
    }
    if !violations.is_empty() {
        return fail(violations);
    }
    FanReport {
        violations,
        walls,
        simplicial: sorted_cones.iter().all(|c| c.len() == 3),
    }
}

fn valid_walls(fan: &Fan3) -> Result<Vec<Wall>, ToricError> {
    let report = validate_fan(fan);
    if report.is_valid() {
        Ok(report.walls)
    } else {
        Err(ToricError::InvalidFan(report.violations))
    }
}

/// Rows `<m_σ - m_σ', v> = 0` for both spanning rays of every wall, over the
/// `3 · #cones` unknowns `m_σ`.
fn gluing_system(fan: &Fan3, walls: &[Wall]) -> QMatrix {
    let vars = 3 * fan.max_cones.len();
    let mut rows = Vec::new();
    for w in walls {
        for r in [w.spanning.0, w.spanning.1] {
            rows.push(difference_row(vars, w.cones.0, w.cones.1, fan.rays[r]));
        }
    }
    QMatrix::from_rows(vars, rows)
}

/// Coefficients of `<m_a - m_b, v>`.
fn difference_row(vars: usize, a: usize, b: usize, v: Ray) -> Vec<Rational> {
    let mut row = vec![Rational::zero(); vars];
    for k in 0..3 {
        row[3 * a + k] = rat(v[k]);
        row[3 * b + k] = rat(-v[k]);
    }
    row
}

/// Rank of the Picard group: dimension of the space of rational support
/// functions modulo global linear functions.
pub fn picard_rank(fan: &Fan3) -> Result<usize, ToricError> {
    let walls = valid_walls(fan)?;
    let sys = gluing_system(fan, &walls);
    Ok(sys.nullspace_dim() - 3)
}

/// Rank of the class group, `#rays - 3`.
pub fn class_rank(fan: &Fan3) -> Result<usize, ToricError> {
    valid_walls(fan)?;
    Ok(fan.rays.len() - 3)
}

/// A strictly convex support function, one linear form per maximal cone,
/// when the fan is projective.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projectivity {
    pub projective: bool,
    pub support_function: Option<Vec<[Rational; 3]>>,
}

/// Decides whether a support function exists with
/// `<m_σ, v> - <m_σ', v> >= 1` for every wall between `σ` and `σ'` and every
/// ray `v` of `σ'` off the wall, using exact Fourier–Motzkin elimination
/// on the space of support functions modulo linear ones.
pub fn is_projective(fan: &Fan3) -> Result<Projectivity, ToricError> {
    let walls = valid_walls(fan)?;
    let vars = 3 * fan.max_cones.len();
    let null = gluing_system(fan, &walls).nullspace_basis();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for w in &walls {
        for (near, far) in [(w.cones.0, w.cones.1), (w.cones.1, w.cones.0)] {
            for &r in &fan.max_cones[far] {
                if w.rays.contains(&r) {
                    continue;
                }
                rows.push(difference_row(vars, near, far, fan.rays[r]));
            }
        }
    }
    let global = QMatrix::from_rows(vars, rows.clone());
    // constraints in the coordinates of the solution space
    let reduced = global.mul(&null);
    let pivots = reduced.rref_with_pivots().1;
    let r = pivots.len();
    let mut sys = LinearSystem::new(r);
    for i in 0..reduced.rows() {
        let coeffs: Vec<Rational> = pivots.iter().map(|&p| reduced.get(i, p).clone()).collect();
        sys.push_ge(coeffs, rat(1));
    }
    let Some(s) = sys.solve() else {
        return Ok(Projectivity {
            projective: false,
            support_function: None,
        });
    };
    // t has s on the pivot coordinates of the row basis and zero elsewhere
    let row_basis = reduced.row_basis();
    let mut t = vec![Rational::zero(); null.cols()];
    for (j, &p) in pivots.iter().enumerate() {
        t[p] = s[j].clone();
    }
    debug_assert!((0..row_basis.rows()).all(|j| dot(row_basis.row(j), &t) == s[j]));
    let m: Vec<Rational> = (0..vars).map(|i| dot(null.row(i), &t)).collect();
    debug_assert!(rows.iter().all(|row| dot(row, &m) >= rat(1)));
    let forms = m
        .chunks(3)
        .map(|c| [c[0].clone(), c[1].clone(), c[2].clone()])
        .collect();
    Ok(Projectivity {
        projective: true,
        support_function: Some(forms),
    })
}

/// The Lyubeznik table of any cone over the projective toric 3-fold of
/// `fan`: `λ_{0,3} = λ_{2,4} = p̃`, `λ_{4,4} = 1`, where `p̃ + 1` is the
/// Picard rank.
pub fn toric_lyubeznik(fan: &Fan3) -> Result<InvariantTable, ToricError> {
    if !is_projective(fan)?.projective {
        return Err(ToricError::NotProjective);
    }
    let p = picard_rank(fan)? as u64 - 1;
    Ok(InvariantTable::from_entries(
        TableKind::Lyubeznik,
        4,
        &[(0, 3, p), (2, 4, p), (4, 4, 1)],
    ))
}

/// Standard fans used in tests, examples and the CLI documentation.
pub mod fans {
    use super::Fan3;

    /// Fan of `P^3`.
    pub fn projective_space() -> Fan3 {
        Fan3 {
            rays: vec![[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, -1, -1]],
            max_cones: vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]],
        }
    }

    /// The eight coordinate octants, the fan of `P^1 x P^1 x P^1`.
    pub fn octants() -> Fan3 {
        let rays = vec![[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];
        let mut max_cones = Vec::new();
        for x in [0, 1] {
            for y in [2, 3] {
                for z in [4, 5] {
                    max_cones.push(vec![x, y, z]);
                }
            }
        }
        Fan3 { rays, max_cones }
    }

    /// Cones over the six faces of the cube `[-1, 1]^3`.
    pub fn cube() -> Fan3 {
        let mut rays = Vec::new();
        for x in [1, -1] {
            for y in [1, -1] {
                for z in [1, -1] {
                    rays.push([x, y, z]);
                }
            }
        }
        let mut max_cones = Vec::new();
        for axis in 0..3 {
            for sign in [1, -1] {
                let face: Vec<usize> = (0..8).filter(|&i| rays[i][axis] == sign).collect();
                max_cones.push(face);
            }
        }
        Fan3 { rays, max_cones }
    }
}
