//! Property tests for invariants that hold across modules.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use ugpf::exact::{z_brute, z_coeffs_sat, z_coeffs_subgraph, z_subgraph};
use ugpf::interp::log_taylor_from_coeffs;
use ugpf::polymer::enumerate_polymers;
use ugpf::zerofree::{cone_sum_check, ratio_parts, ratio_r2, small_angle_diff};
use ugpf::{Budget, Edge, UgInstance};

fn perm(k: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..k).collect::<Vec<_>>()).prop_shuffle()
}

/// Simple instances with `n ≤ 6`, `k ≤ 4` and at most 9 edges.
fn instance() -> impl Strategy<Value = UgInstance> {
    (2usize..=4, 2usize..=6)
        .prop_flat_map(|(k, n)| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            let max = pairs.len().min(9);
            (Just(k), Just(n), proptest::sample::subsequence(pairs, 0..=max))
        })
        .prop_flat_map(|(k, n, pairs)| {
            let perms = proptest::collection::vec(perm(k), pairs.len());
            (Just(k), Just(n), Just(pairs), perms)
        })
        .prop_map(|(k, n, pairs, perms)| {
            let edges = pairs.into_iter().zip(perms).map(|((u, v), p)| Edge::new(u, v, p)).collect();
            UgInstance::new(k, n, edges).expect("valid by construction")
        })
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-9 * a.norm().max(b.norm()).max(1.0)
}

fn z(inst: &UgInstance, w: Complex64) -> Complex64 {
    z_brute(inst, w, &Budget::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_round_trip(inst in instance()) {
        let text = inst.to_json();
        let back = UgInstance::parse(&text).unwrap();
        prop_assert_eq!(back.to_json(), text);
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn color_conjugation_preserves_z(inst in instance(), seed in any::<u64>(), w in complex()) {
        let k = inst.k();
        let mut relabel: Vec<usize> = (0..k).collect();
        relabel.rotate_left((seed % k as u64) as usize);
        if seed % 2 == 1 {
            relabel.reverse();
        }
        let conj = inst.conjugate(&relabel).unwrap();
        let b = Budget::default();
        prop_assert_eq!(z_coeffs_sat(&conj, &b).unwrap(), z_coeffs_sat(&inst, &b).unwrap());
        prop_assert!(close(z(&conj, w), z(&inst, w)));
    }

    #[test]
    fn reversing_an_edge_preserves_z(inst in instance(), w in complex()) {
        let edges = inst.edges().iter().map(|e| {
            let mut inv = vec![0; e.perm.len()];
            for (a, &b) in e.perm.iter().enumerate() {
                inv[b] = a;
            }
            Edge::new(e.v, e.u, inv)
        }).collect();
        let rev = UgInstance::new(inst.k(), inst.n(), edges).unwrap();
        prop_assert!(close(z(&rev, w), z(&inst, w)));
    }

    #[test]
    fn brute_matches_subgraph(inst in instance(), w in complex()) {
        let b = Budget::default();
        prop_assert!(close(z_brute(&inst, w, &b).unwrap(), z_subgraph(&inst, w, &b).unwrap()));
    }

    #[test]
    fn disjoint_union_multiplies(g in instance(), h in instance(), w in complex()) {
        prop_assume!(g.k() == h.k() && g.n() + h.n() <= 9);
        let shift = g.n();
        let edges = g.edges().iter().cloned()
            .chain(h.edges().iter().map(|e| Edge::new(e.u + shift, e.v + shift, e.perm.clone())))
            .collect();
        let both = UgInstance::new(g.k(), g.n() + h.n(), edges).unwrap();
        prop_assert!(close(z(&both, w), z(&g, w) * z(&h, w)));
    }

    #[test]
    fn polymers_are_the_connected_edge_sets(inst in instance()) {
        let m = 5;
        let e = inst.edge_count();
        let mut expected = 0usize;
        for mask in 1u32..(1 << e) {
            if mask.count_ones() as usize >= m {
                continue;
            }
            let chosen: Vec<usize> = (0..e).filter(|&i| mask >> i & 1 == 1).collect();
            // Grow from the first edge through shared endpoints.
            let mut reached = vec![chosen[0]];
            let mut changed = true;
            while changed {
                changed = false;
                for &i in &chosen {
                    if reached.contains(&i) {
                        continue;
                    }
                    let ei = &inst.edges()[i];
                    if reached.iter().any(|&j| {
                        let ej = &inst.edges()[j];
                        [ej.u, ej.v].contains(&ei.u) || [ej.u, ej.v].contains(&ei.v)
                    }) {
                        reached.push(i);
                        changed = true;
                    }
                }
            }
            expected += usize::from(reached.len() == chosen.len());
        }
        let polymers = enumerate_polymers(&inst, m, &Budget::default()).unwrap();
        prop_assert_eq!(polymers.len(), expected);
        prop_assert!(polymers.iter().all(|p| p.edge_count() < m));
    }

    #[test]
    fn subgraph_coefficients_start_at_k_to_the_n(inst in instance()) {
        let a = z_coeffs_subgraph(&inst, inst.edge_count() + 1, &Budget::default()).unwrap();
        prop_assert_eq!(&a[0], &BigUint::from(inst.k()).pow(inst.n() as u32));
        let total: BigUint = a.iter().sum();
        // At w = 2 every subset contributes its full product: Σ a_j = Z(G; 2).
        let c = z_coeffs_sat(&inst, &Budget::default()).unwrap();
        let z2: BigUint = c.iter().enumerate().map(|(i, ci)| ci * BigUint::from(2u32).pow(i as u32)).sum();
        prop_assert_eq!(total, z2);
    }

    #[test]
    fn log_series_satisfies_g_prime_equals_f_prime_g(
        tail in proptest::collection::vec(-5i64..=5, 1..6),
        m in 1usize..10,
    ) {
        let mut g = vec![BigRational::one()];
        g.extend(tail.iter().map(|&c| BigRational::from_integer(BigInt::from(c))));
        let f = log_taylor_from_coeffs(&g, m).unwrap();
        prop_assert!(f[0].is_zero());
        // Coefficient of z^(n−1) in g′ and in f′g agree for n ≤ m.
        for n in 1..=m {
            let lhs = g.get(n).cloned().unwrap_or_else(BigRational::zero) * BigRational::from_integer(BigInt::from(n));
            let mut rhs = BigRational::zero();
            for j in 1..=n {
                if let Some(gi) = g.get(n - j) {
                    rhs += &f[j] * BigRational::from_integer(BigInt::from(j)) * gi;
                }
            }
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn ratio_parts_is_r_times_denominator(
        x in 0.05..20.0f64, y in 0.05..20.0f64,
        tx in -1.0..1.0f64, ty in -1.0..1.0f64,
        w in 1.0..1.5f64, k in 3usize..200,
    ) {
        let (re, im) = ratio_parts(x, y, tx, ty, w, k);
        let (zx, zy) = (Complex64::from_polar(x, tx), Complex64::from_polar(y, ty));
        let wc = Complex64::new(w, 0.0);
        let n = (zx + (k as f64 - 2.0) * zy + wc).norm_sqr();
        let direct = ratio_r2(zx, zy, wc, k).unwrap();
        prop_assert!((direct.re * n - re).abs() <= 1e-12 * n.max(re.abs()));
        prop_assert!((direct.im * n - im).abs() <= 1e-12 * n.max(1.0));
        prop_assert!((im.atan2(re) - direct.arg()).abs() <= 1e-12);
    }

    #[test]
    fn cone_sum_bound(
        angle in 0.0..2.09f64,
        offset in -3.0..3.0f64,
        parts in proptest::collection::vec((0.0..1.0f64, 0.01..10.0f64), 1..12),
    ) {
        let vs: Vec<Complex64> = parts.iter().map(|&(t, r)| Complex64::from_polar(r, offset + t * angle)).collect();
        prop_assert!(cone_sum_check(&vs, angle).unwrap());
    }

    #[test]
    fn small_angle_difference(r1 in 0.01..10.0f64, r2 in 0.01..10.0f64, a in -1.047..1.047f64, base in -3.0..3.0f64) {
        let z = Complex64::from_polar(r1, base);
        let z2 = Complex64::from_polar(r2, base + a);
        prop_assert!(small_angle_diff(z, z2).unwrap());
    }
}
