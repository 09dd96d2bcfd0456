//! Engine and key results against brute-force orbit computations written
//! independently of the library's canonical forms.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use f2rank2::catalog::Catalog;
use f2rank2::classifiers::{enumerate_classes, ClassEngine, ElementFilter, SpacePredicate};
use f2rank2::genmatrix::parse_linear;
use f2rank2::gf2::{enumerate_group, Gf2Matrix};
use f2rank2::orbits::{are_equivalent, canonical_equiv, canonical_sim, Action, KeyCache};
use f2rank2::predicates::{is_lld, is_minimal_lld, is_semi_primitive, upper_rank};
use f2rank2::MatrixSpace;

/// A subspace as the sorted set of its members.
type Members = Vec<u64>;

fn members(v: &MatrixSpace) -> Members {
    let mut m = v.element_flats();
    m.sort_unstable();
    m
}

fn image(n: usize, p: usize, set: &[u64], pm: &Gf2Matrix, qm: &Gf2Matrix) -> Members {
    let mut out: Members = set
        .iter()
        .map(|&f| {
            pm.mul(&Gf2Matrix::from_flat(n, p, f))
                .unwrap()
                .mul(qm)
                .unwrap()
                .flat()
        })
        .collect();
    out.sort_unstable();
    out
}

/// Least member set over the whole orbit.
fn orbit_min(v: &MatrixSpace, action: Action) -> Members {
    let (n, p) = v.shape();
    let set = members(v);
    let gn = enumerate_group(n).unwrap();
    let gp = enumerate_group(p).unwrap();
    let mut best: Option<Members> = None;
    for pm in &gn {
        let qs: Vec<Gf2Matrix> = match action {
            Action::Equivalence => gp.clone(),
            Action::Similarity => vec![pm.inverse().unwrap()],
        };
        for qm in &qs {
            let img = image(n, p, &set, pm, qm);
            if best.as_ref().is_none_or(|b| img < *b) {
                best = Some(img);
            }
        }
    }
    best.unwrap()
}

fn random_space(n: usize, p: usize, dim: usize, rng: &mut ChaCha8Rng) -> MatrixSpace {
    let gens: Vec<Gf2Matrix> = (0..dim)
        .map(|_| Gf2Matrix::from_flat(n, p, rng.gen_range(0..1u64 << (n * p))))
        .collect();
    MatrixSpace::span(n, p, &gens).unwrap()
}

fn engine(n: usize, p: usize, filter: ElementFilter, action: Action) -> ClassEngine {
    ClassEngine::new(n, p, filter, action, Arc::new(KeyCache::in_memory())).unwrap()
}

/// Orbit counts per dimension of the spaces whose members all pass `ok`, found by
/// closing member sets under the whole group.
fn orbit_counts(
    n: usize,
    p: usize,
    max_dim: usize,
    action: Action,
    ok: impl Fn(u64) -> bool,
) -> Vec<usize> {
    let gn = enumerate_group(n).unwrap();
    let gp = enumerate_group(p).unwrap();
    let pairs: Vec<(Gf2Matrix, Gf2Matrix)> = match action {
        Action::Equivalence => gn
            .iter()
            .flat_map(|a| gp.iter().map(move |b| (*a, *b)))
            .collect(),
        Action::Similarity => gn.iter().map(|a| (*a, a.inverse().unwrap())).collect(),
    };
    let allowed: Vec<u64> = (1..1u64 << (n * p)).filter(|&f| ok(f)).collect();
    let mut counts = vec![1usize];
    let mut layer: HashSet<Members> = HashSet::from([vec![0u64]]);
    for _ in 1..=max_dim {
        let mut next: HashSet<Members> = HashSet::new();
        for set in &layer {
            for &m in &allowed {
                if set.binary_search(&m).is_ok() {
                    continue;
                }
                let mut grown: Members = set.iter().flat_map(|&e| [e, e ^ m]).collect();
                grown.sort_unstable();
                if grown.iter().all(|&e| e == 0 || ok(e)) {
                    next.insert(grown);
                }
            }
        }
        let mut seen: HashSet<Members> = HashSet::new();
        let mut orbits = 0;
        for set in &next {
            if seen.contains(set) {
                continue;
            }
            orbits += 1;
            for (a, b) in &pairs {
                seen.insert(image(n, p, set, a, b));
            }
        }
        counts.push(orbits);
        layer = next;
    }
    counts
}

#[test]
fn keys_match_full_orbit_minimum_at_3x3() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut spaces: Vec<MatrixSpace> = (0..40)
        .map(|_| {
            let d = rng.gen_range(1..=4);
            random_space(3, 3, d, &mut rng)
        })
        .collect();
    // Equivalent pairs on purpose.
    let g = enumerate_group(3).unwrap();
    for i in 0..10 {
        let v = spaces[i].clone();
        spaces.push(
            v.transform(&g[rng.gen_range(0..168)], &g[rng.gen_range(0..168)])
                .unwrap(),
        );
    }
    let keys: Vec<_> = spaces.iter().map(|v| canonical_equiv(v).unwrap()).collect();
    let mins: Vec<_> = spaces
        .iter()
        .map(|v| orbit_min(v, Action::Equivalence))
        .collect();
    for i in 0..spaces.len() {
        for j in 0..spaces.len() {
            assert_eq!(
                keys[i] == keys[j],
                mins[i] == mins[j],
                "{:?} vs {:?}",
                spaces[i],
                spaces[j]
            );
        }
    }
}

#[test]
fn similarity_keys_match_full_orbit_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let spaces: Vec<MatrixSpace> = (0..40)
        .map(|_| {
            let d = rng.gen_range(1..=3);
            random_space(3, 3, d, &mut rng)
        })
        .collect();
    let keys: Vec<_> = spaces.iter().map(|v| canonical_sim(v).unwrap()).collect();
    let mins: Vec<_> = spaces
        .iter()
        .map(|v| orbit_min(v, Action::Similarity))
        .collect();
    for i in 0..spaces.len() {
        for j in 0..spaces.len() {
            assert_eq!(keys[i] == keys[j], mins[i] == mins[j]);
        }
    }
}

#[test]
fn engine_counts_match_orbit_closure_on_small_shapes() {
    for (n, p) in [(2usize, 2usize), (2, 3), (3, 2)] {
        let want = orbit_counts(n, p, n * p, Action::Equivalence, |_| true);
        let mut e = engine(n, p, ElementFilter::Any, Action::Equivalence);
        let got: Vec<usize> = e.all_levels().unwrap().iter().map(|l| l.len()).collect();
        assert_eq!(&got[..want.len()], &want[..], "{n}x{p}");
    }
    let want = orbit_counts(2, 2, 4, Action::Similarity, |_| true);
    let mut e = engine(2, 2, ElementFilter::Any, Action::Similarity);
    let got: Vec<usize> = e.all_levels().unwrap().iter().map(|l| l.len()).collect();
    assert_eq!(&got[..want.len()], &want[..]);
}

#[test]
fn engine_counts_match_orbit_closure_for_rank_two_planes() {
    let rank = |f: u64| Gf2Matrix::from_flat(3, 3, f).rank();
    let want = orbit_counts(3, 3, 2, Action::Equivalence, |f| rank(f) <= 2);
    let mut e = engine(3, 3, ElementFilter::RankAtMost(2), Action::Equivalence);
    let got: Vec<usize> = (0..=2).map(|d| e.level(d).unwrap().len()).collect();
    assert_eq!(got, want);

    let trivial = |f: u64| {
        Gf2Matrix::from_flat(3, 3, f)
            .add(&Gf2Matrix::identity(3))
            .unwrap()
            .det()
            .unwrap()
    };
    let want = orbit_counts(3, 3, 2, Action::Similarity, trivial);
    let mut e = engine(3, 3, ElementFilter::TrivialSpectrum, Action::Similarity);
    let got: Vec<usize> = (0..=2).map(|d| e.level(d).unwrap().len()).collect();
    assert_eq!(got, want);
}

#[test]
fn engine_levels_are_sorted_unique_and_pass_the_filter() {
    let mut e = engine(3, 3, ElementFilter::RankAtMost(2), Action::Equivalence);
    let levels = e.all_levels().unwrap().to_vec();
    for (d, level) in levels.iter().enumerate() {
        let keys: Vec<_> = level.iter().map(|c| c.key.clone()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(keys, sorted);
        for c in level {
            assert_eq!(c.rep.dim(), d);
            assert!(upper_rank(&c.rep) <= 2);
            assert_eq!(canonical_equiv(&c.rep).unwrap(), c.key);
        }
    }
    let mut again = engine(3, 3, ElementFilter::RankAtMost(2), Action::Equivalence);
    let second: Vec<Vec<_>> = again
        .all_levels()
        .unwrap()
        .iter()
        .map(|l| l.iter().map(|c| c.key.clone()).collect())
        .collect();
    let first: Vec<Vec<_>> = levels
        .iter()
        .map(|l| l.iter().map(|c| c.key.clone()).collect())
        .collect();
    assert_eq!(first, second);
}

#[test]
fn one_class_of_rank_one_lines() {
    let rank_one = (1..512u64)
        .filter(|&f| Gf2Matrix::from_flat(3, 3, f).rank() == 1)
        .count();
    assert_eq!(rank_one, 49);
    let cache = Arc::new(KeyCache::in_memory());
    let classes = enumerate_classes(
        3,
        3,
        1,
        ElementFilter::RankAtMost(2),
        SpacePredicate::UpperRank(1),
        Action::Equivalence,
        &cache,
    )
    .unwrap();
    assert_eq!(classes.len(), 1);
    let none = enumerate_classes(
        3,
        3,
        1,
        ElementFilter::RankAtMost(2),
        SpacePredicate::Reduced,
        Action::Equivalence,
        &cache,
    )
    .unwrap();
    assert!(none.is_empty());
    assert!(enumerate_classes(
        3,
        3,
        7,
        ElementFilter::Any,
        SpacePredicate::All,
        Action::Equivalence,
        &cache
    )
    .is_err());
}

#[test]
fn dimension_five_singular_classes() {
    let cache = Arc::new(KeyCache::in_memory());
    let classes = enumerate_classes(
        3,
        3,
        5,
        ElementFilter::RankAtMost(2),
        SpacePredicate::All,
        Action::Equivalence,
        &cache,
    )
    .unwrap();
    let cat = Catalog::builtin();
    let keys: BTreeSet<_> = classes.iter().map(|c| c.key.clone()).collect();
    for name in ["R11", "J3"] {
        assert!(keys.contains(&canonical_equiv(&cat.space(name).unwrap()).unwrap()));
    }
    let r20 = cat.space("R20").unwrap();
    let r02 = cat.space("R02").unwrap();
    for c in &classes {
        let in_block = c.rep.is_subspace_of(&r20)
            || c.rep.is_subspace_of(&r02)
            || c.rep.image_sum().dim() <= 2
            || !c.rep.common_kernel().is_zero();
        let named = ["R11", "J3"].iter().any(|n| {
            are_equivalent(&c.rep, &cat.space(n).unwrap())
                .unwrap()
                .is_some()
        });
        assert!(in_block || named, "{:?}", c.rep);
    }
}

#[test]
fn minimal_lld_needs_the_rank_condition_on_the_dual() {
    // LLD and not minimal, yet its dual is semi-primitive: the dual's upper rank is too small.
    let v = parse_linear("[a,b,0,0;0,0,c,d]").unwrap();
    let dual = v.dual_space().unwrap();
    assert!(is_lld(&v));
    assert!(!is_minimal_lld(&v));
    assert!(is_semi_primitive(&dual));
    assert_ne!(upper_rank(&dual), v.dim() - 1);
}

#[test]
fn minimal_lld_matches_the_dual_condition_on_random_spaces() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut seen: HashMap<bool, usize> = HashMap::new();
    for _ in 0..400 {
        let p = rng.gen_range(2..=4);
        let v = random_space(3, p, 3, &mut rng);
        if v.dim() != 3 || !v.is_reduced() {
            continue;
        }
        let dual = v.dual_space().unwrap();
        let via_dual = is_semi_primitive(&dual) && upper_rank(&dual) == v.dim() - 1;
        assert_eq!(is_minimal_lld(&v), via_dual, "{v:?}");
        *seen.entry(via_dual).or_default() += 1;
    }
    assert!(seen.len() == 2, "both outcomes should occur: {seen:?}");
}
