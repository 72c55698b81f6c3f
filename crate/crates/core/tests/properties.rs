mod common;

use common::*;
use invar::arrangement;
use invar::fourier_motzkin::LinearSystem;
use invar::io::{table_from_json, table_to_json};
use invar::poset::reduced_betti;
use invar::qlinalg::{rat, ratio, QMatrix, Rational};
use invar::sstables::{self, DeduceConfig, SpectralState};
use invar::table::{euler_sum, validate_lambda, InvariantTable, TableKind};
use invar::toric::{self, fans, Fan3};
use num_traits::Zero;
use proptest::prelude::*;
use rand::Rng;

fn matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..6, 1usize..6).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-4i64..=4, c), r))
}

fn transform(fan: &Fan3, u: &[[i64; 3]; 3]) -> Fan3 {
    let rays = fan
        .rays
        .iter()
        .map(|v| {
            let mut w = [0; 3];
            for (i, wi) in w.iter_mut().enumerate() {
                *wi = (0..3).map(|j| u[i][j] * v[j]).sum();
            }
            w
        })
        .collect();
    Fan3 {
        rays,
        max_cones: fan.max_cones.clone(),
    }
}

/// Product of random elementary matrices, so the determinant is ±1.
fn unimodular(rng: &mut rand_chacha::ChaCha8Rng) -> [[i64; 3]; 3] {
    let mut u = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    for _ in 0..6 {
        let (i, j) = (rng.gen_range(0..3), rng.gen_range(0..3));
        if i == j {
            u[i] = u[i].map(|x| -x);
            continue;
        }
        let k = rng.gen_range(-2..=2);
        let row = u[j];
        for (c, x) in u[i].iter_mut().enumerate() {
            *x += k * row[c];
        }
    }
    u
}

fn twisted_prism() -> Fan3 {
    Fan3 {
        rays: vec![[-4, -4, 1], [8, -4, 1], [-4, 8, 1], [-1, -1, 1], [2, -1, 1], [-1, 2, 1], [0, 0, -1]],
        max_cones: vec![
            vec![3, 4, 5],
            vec![0, 1, 4],
            vec![0, 4, 3],
            vec![1, 2, 5],
            vec![1, 5, 4],
            vec![2, 0, 3],
            vec![2, 3, 5],
            vec![0, 1, 6],
            vec![1, 2, 6],
            vec![2, 0, 6],
        ],
    }
}

/// Stellar subdivisions of the octant fan at random cones.
fn refined_octants(rng: &mut rand_chacha::ChaCha8Rng, steps: usize) -> Fan3 {
    let mut fan = fans::octants();
    for _ in 0..steps {
        let c = rng.gen_range(0..fan.max_cones.len());
        let cone = fan.max_cones.remove(c);
        let mut v = [0i64; 3];
        for &r in &cone {
            for i in 0..3 {
                v[i] += fan.rays[r][i];
            }
        }
        let g = v.iter().fold(0i64, |a, &b| num_integer::gcd(a, b));
        let new = fan.rays.len();
        fan.rays.push(v.map(|x| x / g));
        for skip in 0..3 {
            let mut sub: Vec<usize> = cone.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &r)| r).collect();
            sub.push(new);
            fan.max_cones.push(sub);
        }
    }
    fan
}

fn random_lambda(rng: &mut rand_chacha::ChaCha8Rng, d: usize, max: u64) -> InvariantTable {
    let mut t = InvariantTable::zeros(TableKind::Lyubeznik, d);
    for p in 0..=d {
        for q in p..=d {
            if !t.is_structural_zero(p, q) {
                t.set(p, q, Some(rng.gen_range(0..=max)));
            }
        }
    }
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rref_is_idempotent(rows in matrix()) {
        let r = qmatrix(&rows).rref();
        prop_assert_eq!(r.rref(), r);
    }

    #[test]
    fn rank_invariances(rows in matrix(), seed in any::<u64>()) {
        let m = qmatrix(&rows);
        let rank = m.rank();
        prop_assert_eq!(m.transpose().rank(), rank);
        let mut rng = rng(seed);
        let mut perm: Vec<Vec<Rational>> = m.row_vecs();
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        for row in perm.iter_mut() {
            let mut s = ratio(rng.gen_range(1..=7), rng.gen_range(1..=7));
            if rng.gen_bool(0.5) {
                s = -s;
            }
            for x in row.iter_mut() {
                *x *= &s;
            }
        }
        prop_assert_eq!(QMatrix::from_rows(m.cols(), perm).rank(), rank);
        for p in PRIMES {
            prop_assert_eq!(rank_mod_p(&rows, p), rank);
        }
    }

    #[test]
    fn nullspace_is_complementary(rows in matrix()) {
        let m = qmatrix(&rows);
        let n = m.nullspace_basis();
        prop_assert_eq!(n.cols(), m.cols() - m.rank());
        prop_assert!(m.mul(&n).is_zero());
        prop_assert_eq!(n.rank(), n.cols());
    }

    #[test]
    fn fourier_motzkin_witnesses(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let vars = rng.gen_range(1..=3);
        let point: Vec<Rational> = (0..vars).map(|_| ratio(rng.gen_range(-5..=5), rng.gen_range(1..=3))).collect();
        let mut sys = LinearSystem::new(vars);
        for _ in 0..rng.gen_range(1..=6) {
            let a: Vec<Rational> = (0..vars).map(|_| rat(rng.gen_range(-3..=3))).collect();
            let val: Rational = a.iter().zip(&point).map(|(x, y)| x * y).sum();
            sys.push_ge(a, val - rat(rng.gen_range(0..=2)));
        }
        let x = sys.solve();
        prop_assert!(x.as_ref().is_some_and(|x| sys.is_satisfied_by(x)));
        // x_0 >= c and x_0 <= c - 1 together are infeasible
        let mut bad = sys.clone();
        let mut e0 = vec![Rational::zero(); vars];
        e0[0] = rat(1);
        let c = rat(rng.gen_range(-3..=3));
        bad.push_ge(e0.clone(), c.clone());
        bad.push_le(e0, c - rat(1));
        prop_assert!(!bad.is_feasible());
    }

    #[test]
    fn euler_poincare_and_cones(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let k = random_complex(&mut rng, 6, 5, 4);
        let b = reduced_betti(&k);
        let chi: i64 = (-1..=k.dim())
            .map(|d| if d.rem_euclid(2) == 0 { k.count(d) as i64 } else { -(k.count(d) as i64) })
            .sum();
        prop_assert_eq!(b.euler_characteristic(), chi);
        prop_assert!(reduced_betti(&k.cone(99)).is_acyclic());
        for d in 1..=k.dim().max(0) as usize {
            prop_assert!(k.boundary_matrix(d - 1).mul(&k.boundary_matrix(d)).is_zero());
        }
    }

    #[test]
    fn rho_tables_are_triangular(seed in any::<u64>(), central in any::<bool>()) {
        let mut rng = rng(seed);
        let n = rng.gen_range(1..=4);
        let comps: Vec<_> = (0..rng.gen_range(1..=4))
            .map(|_| {
                let dim = rng.gen_range(0..n);
                random_subspace(&mut rng, n, dim, central)
            })
            .collect();
        let lat = arrangement::build_lattice(&comps).unwrap();
        let t = arrangement::cdr_table(&lat);
        let dims = maximal_dims(&comps);
        for ((p, q), v) in t.cells() {
            prop_assert!(p <= q || v == Some(0));
            if p == q {
                prop_assert_eq!(v, Some(dims.iter().filter(|&&d| d == p).count() as u64));
            }
        }
        let b = arrangement::complement_betti(&t, n);
        prop_assert_eq!(b.len(), 2 * n);
        if t.dim() <= 3 {
            let c = sstables::check_cdr(&t, &b, n, true).unwrap();
            prop_assert!(c.degenerate && c.accepted);
        }
    }

    #[test]
    fn moebius_agrees_with_rho(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = rng.gen_range(2..=4);
        let count = rng.gen_range(1..=5);
        let hs = random_hyperplanes(&mut rng, n, count);
        let lat = arrangement::build_lattice(&hs).unwrap();
        let b = arrangement::complement_betti(&arrangement::cdr_table(&lat), n);
        let oracle = arrangement::moebius_betti_oracle(&lat).unwrap();
        prop_assert_eq!(oracle[0], 1);
        prop_assert_eq!(&oracle[1..], &b[1..=n]);
    }

    #[test]
    fn page_turns_preserve_euler(seed in any::<u64>(), kind in prop_oneof![Just(TableKind::Lyubeznik), Just(TableKind::CechDeRham)]) {
        let mut rng = rng(seed);
        let d = rng.gen_range(1..=4);
        let mut t = InvariantTable::zeros(kind, d);
        for p in 0..=d {
            for q in p..=d {
                t.set(p, q, Some(rng.gen_range(0..=3)));
            }
        }
        let mut s = SpectralState::new(&t).unwrap();
        let chi = s.euler();
        while !s.is_final() {
            let mut cap: std::collections::HashMap<(usize, usize), u64> = Default::default();
            let ranks: Vec<u64> = s
                .differentials()
                .iter()
                .map(|&(src, tgt)| {
                    let a = *cap.entry(src).or_insert_with(|| s.entry(src));
                    let b = *cap.entry(tgt).or_insert_with(|| s.entry(tgt));
                    let r = rng.gen_range(0..=a.min(b));
                    *cap.get_mut(&src).unwrap() -= r;
                    *cap.get_mut(&tgt).unwrap() -= r;
                    r
                })
                .collect();
            s = s.turn_page(&ranks).unwrap();
            prop_assert_eq!(s.euler(), chi);
        }
    }

    #[test]
    fn convergent_tables_are_valid(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let d = rng.gen_range(0..=4);
        let t = random_lambda(&mut rng, d, 2);
        let c = sstables::check_convergence_lambda(&t).unwrap();
        if c.feasible {
            prop_assert_eq!(euler_sum(&t), Ok(1));
            let limit = c.limit_page.unwrap();
            let diagonal: u64 = (0..=d).map(|p| limit.value(p, p)).sum();
            prop_assert_eq!(diagonal, 1);
            prop_assert!(limit.cells().all(|((p, q), v)| p == q || v == Some(0)));
        }
        if euler_sum(&t) != Ok(1) {
            prop_assert!(!c.feasible);
        }
        prop_assert!(validate_lambda(&t, None).is_ok());
    }

    #[test]
    fn deduction_is_monotone(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let d = rng.gen_range(2..=3);
        let mut t = random_lambda(&mut rng, d, 2);
        let open: Vec<(usize, usize)> = t
            .cells()
            .filter(|&((p, q), _)| p <= q && !t.is_structural_zero(p, q))
            .map(|(c, _)| c)
            .collect();
        for &c in &open {
            if rng.gen_bool(0.6) {
                t.set(c.0, c.1, None);
            }
        }
        let small = sstables::deduce_lambda(&t, &DeduceConfig { bound: 2, ..Default::default() }).unwrap();
        let large = sstables::deduce_lambda(&t, &DeduceConfig { bound: 3, ..Default::default() }).unwrap();
        for f in &small.feasible {
            prop_assert!(large.feasible.contains(f));
        }
        // pinning one unknown selects exactly the matching completions
        if let (Some(&cell), Some(first)) = (small.unknowns.first(), small.feasible.first()) {
            let mut pinned = t.clone();
            pinned.set(cell.0, cell.1, Some(first[0]));
            let p = sstables::deduce_lambda(&pinned, &DeduceConfig { bound: 2, ..Default::default() }).unwrap();
            let expected: Vec<Vec<u64>> = small.feasible.iter().filter(|v| v[0] == first[0]).map(|v| v[1..].to_vec()).collect();
            prop_assert_eq!(p.feasible, expected);
        }
        for id in &large.identities {
            prop_assert!(large.holds(id));
        }
    }

    #[test]
    fn table_json_round_trips(seed in any::<u64>(), kind in prop_oneof![Just(TableKind::Lyubeznik), Just(TableKind::CechDeRham)]) {
        let mut rng = rng(seed);
        let d = rng.gen_range(0..=5);
        let mut t = InvariantTable::zeros(kind, d);
        for p in 0..=d {
            for q in 0..=d {
                let v = if rng.gen_bool(0.2) { None } else { Some(rng.gen_range(0..=1000)) };
                t.set(p, q, v);
            }
        }
        let notes: Vec<String> = (0..rng.gen_range(0..3)).map(|i| format!("note \"{i}\" λ")).collect();
        let s = table_to_json(&t, &notes);
        let (back, back_notes) = table_from_json(&s).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(&back_notes, &notes);
        prop_assert_eq!(table_to_json(&back, &back_notes), s);
    }
}

// exact projectivity checks are the slow part here
proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn picard_is_lattice_invariant(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let u = unimodular(&mut rng);
        for (fan, rank, projective) in [
            (fans::projective_space(), 1, true),
            (fans::octants(), 3, true),
            (fans::cube(), 1, true),
            (twisted_prism(), 4, false),
        ] {
            let g = transform(&fan, &u);
            prop_assert!(toric::validate_fan(&g).is_valid());
            prop_assert_eq!(toric::picard_rank(&g).unwrap(), rank);
            prop_assert_eq!(toric::is_projective(&g).unwrap().projective, projective);
        }
    }

    #[test]
    fn picard_of_simplicial_fans(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let steps = rng.gen_range(0..=3);
        let fan = refined_octants(&mut rng, steps);
        let report = toric::validate_fan(&fan);
        prop_assert!(report.is_valid(), "{:?}", report.violations);
        prop_assert!(report.simplicial);
        prop_assert_eq!(toric::picard_rank(&fan).unwrap(), fan.rays.len() - 3);
        prop_assert_eq!(toric::class_rank(&fan).unwrap(), fan.rays.len() - 3);
        // stellar subdivisions of projective fans stay projective
        let t = toric::toric_lyubeznik(&fan).unwrap();
        prop_assert_eq!(euler_sum(&t), Ok(1));
    }
}
