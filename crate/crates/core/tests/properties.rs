use proptest::prelude::*;

use f2rank2::genmatrix::{format_generic, format_linear, parse_generic, parse_linear};
use f2rank2::gf2::{enumerate_group, Gf2Matrix};
use f2rank2::orbits::{
    are_equivalent, are_similar, canonical_equiv, canonical_sim, Action, CanonicalKey, KeyCache,
};
use f2rank2::predicates::{
    is_primitive, is_rank_constant_2, is_semi_primitive, satisfies_iii, upper_rank,
};
use f2rank2::spaces::block_identity_check;
use f2rank2::{AffineMatrixSpace, MatrixSpace};

fn matrix(n: usize, p: usize) -> impl Strategy<Value = Gf2Matrix> {
    (0..1u64 << (n * p)).prop_map(move |f| Gf2Matrix::from_flat(n, p, f))
}

fn invertible(n: usize) -> impl Strategy<Value = Gf2Matrix> {
    let g = enumerate_group(n).unwrap();
    (0..g.len()).prop_map(move |i| g[i])
}

fn space(n: usize, p: usize, max_dim: usize) -> impl Strategy<Value = MatrixSpace> {
    prop::collection::vec(matrix(n, p), 0..=max_dim)
        .prop_map(move |gens| MatrixSpace::span(n, p, &gens).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_is_invariant_and_subadditive(
        a in matrix(3, 4), b in matrix(3, 4), pm in invertible(3), qm in invertible(4)
    ) {
        let moved = pm.mul(&a).unwrap().mul(&qm).unwrap();
        prop_assert_eq!(moved.rank(), a.rank());
        prop_assert!(a.rank() <= 3);
        prop_assert!(a.add(&b).unwrap().rank() <= a.rank() + b.rank());
        prop_assert_eq!(a.transpose().rank(), a.rank());
    }

    #[test]
    fn det_and_adjugate(a in matrix(4, 4), b in matrix(4, 4), c in matrix(3, 3)) {
        prop_assert_eq!(a.mul(&b).unwrap().det().unwrap(), a.det().unwrap() & b.det().unwrap());
        prop_assert_eq!(a.det().unwrap(), a.rank() == 4);
        let want = if c.det().unwrap() { Gf2Matrix::identity(3) } else { Gf2Matrix::zeros(3, 3) };
        prop_assert_eq!(c.mul(&c.adjugate().unwrap()).unwrap(), want);
        prop_assert_eq!(c.adjugate().unwrap().mul(&c).unwrap(), want);
    }

    #[test]
    fn block_identity_on_low_rank(m in matrix(3, 5)) {
        if m.rank() <= 2 {
            prop_assert!(block_identity_check(&m).unwrap());
        }
    }

    #[test]
    fn hex_round_trip(m in matrix(3, 5)) {
        prop_assert_eq!(Gf2Matrix::from_hex(&m.to_hex()).unwrap(), m);
        let text = m.to_string();
        prop_assert_eq!(text.parse::<Gf2Matrix>().unwrap(), m);
    }

    #[test]
    fn space_text_round_trip(v in space(3, 4, 4), base in matrix(3, 4)) {
        prop_assert_eq!(v.to_text().parse::<MatrixSpace>().unwrap(), v.clone());
        prop_assert_eq!(parse_linear(&format_linear(&v)).unwrap(), v.clone());
        let s = AffineMatrixSpace::new(base, v).unwrap();
        prop_assert_eq!(s.to_text().parse::<AffineMatrixSpace>().unwrap(), s.clone());
        prop_assert_eq!(parse_generic(&format_generic(&s).unwrap()).unwrap(), s);
    }

    #[test]
    fn equivalence_keys_are_orbit_invariants(
        v in space(3, 4, 4), pm in invertible(3), qm in invertible(4)
    ) {
        let w = v.transform(&pm, &qm).unwrap();
        prop_assert_eq!(canonical_equiv(&v).unwrap(), canonical_equiv(&w).unwrap());
        let found = are_equivalent(&v, &w).unwrap().expect("same orbit");
        prop_assert_eq!(found.apply(&v).unwrap(), w);
        let key = canonical_equiv(&v).unwrap();
        prop_assert_eq!(canonical_equiv(&key.representative()).unwrap(), key);
    }

    #[test]
    fn similarity_keys_are_orbit_invariants(v in space(4, 4, 3), pm in invertible(4)) {
        let w = v.conjugate(&pm).unwrap();
        prop_assert_eq!(canonical_sim(&v).unwrap(), canonical_sim(&w).unwrap());
        let found = are_similar(&v, &w).unwrap().expect("same orbit");
        prop_assert_eq!(found.q, found.p.inverse().unwrap());
        prop_assert_eq!(found.apply(&v).unwrap(), w);
    }

    #[test]
    fn key_text_round_trip(v in space(3, 3, 5)) {
        let key = canonical_equiv(&v).unwrap();
        let text = key.to_string();
        prop_assert!(text.starts_with("equiv:3x3:"));
        prop_assert_eq!(text.parse::<CanonicalKey>().unwrap(), key);
    }

    #[test]
    fn transpose_preserves_the_predicates(v in space(3, 3, 5)) {
        let t = v.transpose_space();
        prop_assert_eq!(upper_rank(&t), upper_rank(&v));
        prop_assert_eq!(is_primitive(&t), is_primitive(&v));
        prop_assert_eq!(is_semi_primitive(&t), is_semi_primitive(&v));
        prop_assert_eq!(is_rank_constant_2(&t), is_rank_constant_2(&v));
        prop_assert_eq!(t.transpose_space(), v);
    }

    #[test]
    fn primitive_implies_semi_primitive_and_reduced(v in space(3, 3, 5)) {
        if is_primitive(&v) {
            prop_assert!(is_semi_primitive(&v));
        }
        if is_semi_primitive(&v) && !v.is_zero() {
            prop_assert!(v.is_reduced());
            prop_assert!(satisfies_iii(&v, upper_rank(&v)));
        }
    }

    #[test]
    fn reduction_keeps_upper_rank(v in space(3, 4, 4)) {
        if v.is_zero() {
            prop_assert!(v.reduced_space().is_err());
        } else {
            let r = v.reduced_space().unwrap();
            prop_assert_eq!(upper_rank(&r), upper_rank(&v));
            prop_assert_eq!(r.dim(), v.dim());
            prop_assert!(r.is_reduced());
        }
    }

    #[test]
    fn double_dual_of_reduced_spaces(v in space(3, 3, 5)) {
        if !v.is_zero() && v.is_reduced() {
            let back = v.dual_space().unwrap().dual_space().unwrap();
            prop_assert!(are_equivalent(&v, &back).unwrap().is_some());
        }
    }

    #[test]
    fn persistent_cache_returns_fresh_keys(v in space(3, 3, 4)) {
        let dir = tempfile::tempdir().unwrap();
        let first = KeyCache::open(dir.path()).unwrap();
        let key = first.canonical(&v, Action::Equivalence).unwrap();
        drop(first);
        let again = KeyCache::open(dir.path()).unwrap();
        prop_assert_eq!(again.get(Action::Equivalence, &v).unwrap(), Some(key.clone()));
        prop_assert_eq!(key, canonical_equiv(&v).unwrap());
    }
}

#[test]
fn cache_file_layout() {
    let dir = tempfile::tempdir().unwrap();
    let cache = KeyCache::open(dir.path()).unwrap();
    let v = parse_linear("[a,b;0,a]").unwrap();
    cache.canonical(&v, Action::Equivalence).unwrap();
    let text = std::fs::read_to_string(dir.path().join(KeyCache::file_name(
        Action::Equivalence,
        2,
        2,
    )))
    .unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("f2rank2-cache v1 2x2"));
    let record: Vec<&str> = lines.next().unwrap().split(' ').collect();
    assert_eq!(record.len(), 2);
    assert_eq!(cache.stats().unwrap().len(), 1);
    assert_eq!(cache.clear().unwrap(), 1);
    assert!(cache.stats().unwrap().is_empty());
}
