//! The verification suites.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::engine::{shared_engine, ClassEngine, ClassRecord, ElementFilter};
use super::report::{ClassSummary, ClassificationReport};
use crate::catalog::{r11_family, r_space, Catalog};
use crate::error::{Error, Result};
use crate::genmatrix::format_linear;
use crate::gf2::{
    enumerate_group, group, quadform_has_nonsingular_rep, Gf2Matrix, Gf2Poly, Gf2Vector, QuadForm,
};
use crate::orbits::{
    affine_equivalent, are_equivalent, are_similar, canonical_affine, Action, CanonicalKey,
    KeyCache,
};
use crate::predicates::{
    counting_n2_n3, has_trivial_spectrum, is_irreducible_action, is_lld, is_maximal_with_urk,
    is_minimal_lld, is_primitive, is_rank_constant_2, is_semi_primitive, j3,
    j3_primitivity_criterion, satisfies_iii, satisfies_iv, upper_rank,
};
use crate::spaces::{block_identity_check, flat_rank, AffineMatrixSpace, MatrixSpace};

/// Default seed of the randomized checks.
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Core,
    Main,
    J3,
    Lld,
    Spectrum,
    Affine,
    Maximal,
    R11,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Core,
        Suite::Main,
        Suite::J3,
        Suite::Lld,
        Suite::Spectrum,
        Suite::Affine,
        Suite::Maximal,
        Suite::R11,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Core => "core",
            Suite::Main => "main",
            Suite::J3 => "j3",
            Suite::Lld => "lld",
            Suite::Spectrum => "spectrum",
            Suite::Affine => "affine",
            Suite::Maximal => "maximal",
            Suite::R11 => "r11",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown suite `{s}`")))
    }
}

/// `1 + 3 * 2^(4 - d)`, the count of `x` with `dim V x = 2` forced on a rank-2
/// space of dimension `d` in `Mat_3` whose images never drop to a line.
pub fn n2_formula(d: usize) -> Option<usize> {
    (3..=4).contains(&d).then(|| 1 + 3 * (1 << (4 - d)))
}

/// Runs suites against one catalog and one key cache.
pub struct Verifier<'a> {
    pub catalog: &'a Catalog,
    pub cache: Arc<KeyCache>,
    pub seed: u64,
}

type Check<'r> = &'r mut ClassificationReport;

impl<'a> Verifier<'a> {
    pub fn new(catalog: &'a Catalog, cache: Arc<KeyCache>) -> Self {
        Verifier {
            catalog,
            cache,
            seed: DEFAULT_SEED,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn run(&self, suite: Suite) -> ClassificationReport {
        let params = match suite {
            Suite::Core => format!("seed={}", self.seed),
            Suite::Main => "3x3 dims 2..5; 3x4, 4x3, 4x4".into(),
            Suite::J3 => "subspaces of J3, dims 2..5".into(),
            Suite::Lld => "3-dim minimal LLD spaces".into(),
            Suite::Spectrum => "3x3, similarity".into(),
            Suite::Affine => "3-dim affine spaces in GL3".into(),
            Suite::Maximal => "3x3, urk 2; quadratic forms n=3,5".into(),
            Suite::R11 => "reduced subspaces of R(1,1) at 3x3".into(),
        };
        let mut r = ClassificationReport::new(suite.as_str(), params);
        let start = Instant::now();
        let outcome = match suite {
            Suite::Core => self.core(&mut r),
            Suite::Main => self.main_theorem(&mut r),
            Suite::J3 => (2..=5)
                .try_for_each(|d| self.j3_dim(d, &mut r))
                .and_then(|_| self.j3_extras(&mut r)),
            Suite::Lld => self.lld(&mut r),
            Suite::Spectrum => self.spectrum(&mut r),
            Suite::Affine => self.affine(&mut r),
            Suite::Maximal => self.maximal(&mut r),
            Suite::R11 => self.r11(&mut r),
        };
        if let Err(e) = outcome {
            r.error("suite completed", e);
        }
        r.elapsed = start.elapsed();
        r
    }

    pub fn verify_main_theorem(&self) -> ClassificationReport {
        self.run(Suite::Main)
    }

    pub fn verify_j3_classification(&self, dim: usize) -> ClassificationReport {
        let mut r = ClassificationReport::new("j3", format!("subspaces of J3, dim {dim}"));
        let start = Instant::now();
        if let Err(e) = self.j3_dim(dim, &mut r) {
            r.error("suite completed", e);
        }
        r.elapsed = start.elapsed();
        r
    }

    pub fn verify_trivial_spectrum(&self) -> ClassificationReport {
        self.run(Suite::Spectrum)
    }

    pub fn verify_affine_nonsingular(&self) -> ClassificationReport {
        self.run(Suite::Affine)
    }

    pub fn verify_maximal_six(&self) -> ClassificationReport {
        self.run(Suite::Maximal)
    }

    pub fn verify_lld_theorem(&self) -> ClassificationReport {
        self.run(Suite::Lld)
    }

    pub fn verify_r11_and_nonprimitive(&self) -> ClassificationReport {
        self.run(Suite::R11)
    }

    fn key(&self, v: &MatrixSpace, action: Action) -> Result<CanonicalKey> {
        self.cache.canonical(v, action)
    }

    fn named_key(&self, name: &str, action: Action) -> Result<CanonicalKey> {
        self.key(&self.catalog.space(name)?, action)
    }

    fn named_keys(&self, names: &[&str], action: Action) -> Result<BTreeMap<CanonicalKey, String>> {
        names
            .iter()
            .map(|n| Ok((self.named_key(n, action)?, n.to_string())))
            .collect()
    }

    fn engine(
        &self,
        n: usize,
        p: usize,
        filter: ElementFilter,
        action: Action,
    ) -> Result<Arc<Mutex<ClassEngine>>> {
        shared_engine(n, p, filter, action, &self.cache)
    }

    /// Every class of every dimension.
    fn all_classes(
        &self,
        n: usize,
        p: usize,
        filter: ElementFilter,
        action: Action,
    ) -> Result<Vec<ClassRecord>> {
        let e = self.engine(n, p, filter, action)?;
        let mut e = e.lock().expect("engine poisoned");
        Ok(e.all_levels()?.iter().flatten().cloned().collect())
    }

    fn level(
        &self,
        n: usize,
        p: usize,
        filter: ElementFilter,
        action: Action,
        d: usize,
    ) -> Result<Vec<ClassRecord>> {
        let e = self.engine(n, p, filter, action)?;
        let mut e = e.lock().expect("engine poisoned");
        Ok(e.level(d)?.to_vec())
    }

    fn urk2_classes_33(&self) -> Result<Vec<ClassRecord>> {
        self.all_classes(3, 3, ElementFilter::RankAtMost(2), Action::Equivalence)
    }

    fn label(expected: &BTreeMap<CanonicalKey, String>, key: &CanonicalKey) -> String {
        expected
            .get(key)
            .cloned()
            .unwrap_or_else(|| "unlisted".into())
    }

    // ---------------------------------------------------------------- core

    fn core(&self, r: Check) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mismatches = self.catalog.self_check();
        r.check(
            "catalog expectations",
            mismatches.is_empty(),
            if mismatches.is_empty() {
                format!("{} entries re-verified", self.catalog.entries().len())
            } else {
                mismatches
                    .iter()
                    .map(|(n, m)| format!("{n}: {}", m.join("; ")))
                    .collect::<Vec<_>>()
                    .join(" | ")
            },
        );

        // Rank against the largest non-vanishing minor.
        let mut hist = [0usize; 4];
        let mut agree = true;
        for f in 0u64..512 {
            let m = Gf2Matrix::from_flat(3, 3, f);
            let rk = m.rank();
            hist[rk] += 1;
            agree &= rk == rank_by_minors(&m);
        }
        r.check("rank agrees with minors on Mat3", agree, "512 matrices");
        r.check(
            "rank histogram of Mat3",
            hist == [1, 49, 294, 168],
            format!("{hist:?}"),
        );

        let counts: Vec<usize> = (1..=4)
            .map(|n| enumerate_group(n).map(|g| g.len()))
            .collect::<Result<_>>()?;
        r.check(
            "GL_n orders",
            counts == [1, 6, 168, 20160],
            format!("{counts:?}"),
        );

        let mut adj_ok = true;
        for f in 0u64..512 {
            let m = Gf2Matrix::from_flat(3, 3, f);
            let lhs = m.mul(&m.adjugate()?)?;
            let rhs = if m.det()? {
                Gf2Matrix::identity(3)
            } else {
                Gf2Matrix::zeros(3, 3)
            };
            adj_ok &= lhs == rhs;
        }
        r.check("M adj(M) = det(M) I on Mat3", adj_ok, "512 matrices");
        let mut additive = true;
        for a in 0u64..16 {
            for b in 0u64..16 {
                let (ma, mb) = (Gf2Matrix::from_flat(2, 2, a), Gf2Matrix::from_flat(2, 2, b));
                additive &= ma.add(&mb)?.adjugate()? == ma.adjugate()?.add(&mb.adjugate()?)?;
            }
        }
        r.check("adjugate is additive on Mat2", additive, "256 pairs");

        let mut det_ok = true;
        for _ in 0..100 {
            let a = Gf2Matrix::from_flat(4, 4, rng.gen_range(0..1u64 << 16));
            let b = Gf2Matrix::from_flat(4, 4, rng.gen_range(0..1u64 << 16));
            det_ok &= a.mul(&b)?.det()? == (a.det()? & b.det()?);
        }
        r.check("det is multiplicative on Mat4", det_ok, "100 random pairs");

        let a = Gf2Matrix::from_str("1,0,1;1,0,0;0,1,1")?;
        let ia = a.add(&Gf2Matrix::identity(3))?;
        r.check(
            "characteristic polynomials",
            a.charpoly()? == Gf2Poly(0b1011) && ia.charpoly()? == Gf2Poly(0b1101),
            format!("{} and {}", a.charpoly()?, ia.charpoly()?),
        );
        let mut at_one = true;
        for n in 1..=4usize {
            for f in 0u64..1 << (n * n) {
                let m = Gf2Matrix::from_flat(n, n, f);
                at_one &= m.charpoly()?.eval(true) == m.add(&Gf2Matrix::identity(n))?.det()?;
            }
        }
        r.check("charpoly(1) = det(M + I)", at_one, "all matrices up to 4x4");

        let mut block_ok = true;
        let mut block_fails_rank3 = false;
        for (n, p) in [(3usize, 3usize), (3, 4)] {
            for f in 0u64..1 << (n * p) {
                let m = Gf2Matrix::from_flat(n, p, f);
                let rk = flat_rank(n, p, f);
                let holds = block_identity_check(&m)?;
                if rk <= 2 {
                    block_ok &= holds;
                } else if n == p {
                    block_fails_rank3 |= !holds;
                }
            }
        }
        r.check(
            "block identity on rank <= 2 matrices of Mat3 and Mat3x4",
            block_ok,
            "all matrices",
        );
        r.check(
            "block identity fails on some invertible 3x3 matrix",
            block_fails_rank3,
            "",
        );

        self.core_orbits(r, &mut rng)?;
        self.core_conditions(r, &mut rng)?;

        for (name, want) in [("Mata3", 7usize), ("U3", 7), ("V3", 4)] {
            let v = self.catalog.space(name)?;
            let (n2, n3) = counting_n2_n3(&v)?;
            r.check(
                format!("n2 of {name}"),
                n2 == want && n2_formula(v.dim()) == Some(n2),
                format!("n2={n2} n3={n3}"),
            );
        }

        let v3 = self.catalog.space("V3")?;
        for name in ["Beasley1", "Beasley2"] {
            let b = self.catalog.space(name)?;
            let w = are_equivalent(&b, &v3)?;
            let ok = is_rank_constant_2(&b) && is_primitive(&b) && w.is_some();
            r.check(
                format!("{name} is rank-2, primitive and equivalent to V3"),
                ok,
                "",
            );
            if let Some(w) = w {
                r.witness(format!("{name} -> V3"), w);
            }
        }
        let pair = are_equivalent(
            &self.catalog.space("Beasley1")?,
            &self.catalog.space("Beasley2")?,
        )?;
        r.check("Beasley spaces equivalent", pair.is_some(), "");
        if let Some(w) = pair {
            r.witness("Beasley1 -> Beasley2", w);
        }

        let j = self.catalog.space("J3")?;
        let k = Gf2Matrix::from_str("0,0,1;0,1,0;1,0,0")?;
        r.check(
            "K J3 K^-1 is the transpose of J3",
            j.conjugate(&k)? == j.transpose_space(),
            "",
        );
        r.check(
            "J3 similar to its transpose",
            are_similar(&j, &j.transpose_space())?.is_some(),
            "",
        );
        let self_transpose = ["Mata3", "U3", "V3"]
            .iter()
            .map(|n| self.catalog.space(n).map(|v| v.transpose_space() == v))
            .collect::<Result<Vec<_>>>()?;
        r.check(
            "Mata3, U3, V3 equal their transposes",
            self_transpose.iter().all(|&b| b),
            "",
        );
        r.check(
            "U3 inside V3",
            self.catalog.space("U3")?.is_subspace_of(&v3),
            "",
        );
        Ok(())
    }

    fn core_orbits(&self, r: Check, rng: &mut ChaCha8Rng) -> Result<()> {
        let mut invariant = true;
        let mut tested = 0usize;
        let mut sim_ok = true;
        for e in self.catalog.entries() {
            let Ok(v) = e.linear() else { continue };
            let (n, p) = v.shape();
            let Ok(base) = self.key(&v, Action::Equivalence) else {
                continue;
            };
            tested += 1;
            for _ in 0..100 {
                let (pm, qm) = (random_invertible(n, rng), random_invertible(p, rng));
                invariant &= self.key(&v.transform(&pm, &qm)?, Action::Equivalence)? == base;
            }
            if n == p && n <= 4 {
                let base = self.key(&v, Action::Similarity)?;
                for _ in 0..20 {
                    let pm = random_invertible(n, rng);
                    sim_ok &= self.key(&v.conjugate(&pm)?, Action::Similarity)? == base;
                }
            }
        }
        r.check(
            "equivalence keys invariant under random actions",
            invariant,
            format!("{tested} spaces x 100"),
        );
        r.check(
            "similarity keys invariant under random conjugation",
            sim_ok,
            "square spaces x 20",
        );

        let mut agree = true;
        for _ in 0..100 {
            let v = random_space(3, 3, rng.gen_range(1..=4), rng);
            let w = random_space(3, 3, v.dim(), rng);
            let same = self.key(&v, Action::Equivalence)? == self.key(&w, Action::Equivalence)?;
            agree &= same == are_equivalent(&v, &w)?.is_some();
            let pm = group(3)[rng.gen_range(0..168)];
            let qm = group(3)[rng.gen_range(0..168)];
            agree &= are_equivalent(&v, &v.transform(&pm, &qm)?)?.is_some();
        }
        r.check(
            "witness search agrees with key equality",
            agree,
            "100 random pairs and 100 images",
        );

        let mut dd = true;
        let mut count = 0;
        for e in self.catalog.entries() {
            let Ok(v) = e.linear() else { continue };
            if v.is_zero() || !v.is_reduced() {
                continue;
            }
            let back = v.dual_space()?.dual_space()?;
            count += 1;
            if are_equivalent(&v, &back)?.is_none() {
                dd = false;
            }
        }
        r.check(
            "double dual equivalent to the space",
            dd,
            format!("{count} reduced catalog spaces"),
        );
        let u3 = self.catalog.space("U3")?;
        r.check(
            "dual of U3 equivalent to U3",
            are_equivalent(&u3.dual_space()?, &u3)?.is_some(),
            "",
        );
        Ok(())
    }

    fn core_conditions(&self, r: Check, rng: &mut ChaCha8Rng) -> Result<()> {
        let mut agree = true;
        for _ in 0..200 {
            let v = random_space(3, 3, rng.gen_range(1..=5), rng);
            let rk = upper_rank(&v);
            agree &= satisfies_iii(&v, rk) == !deletable_column(&v, rk);
            agree &= satisfies_iv(&v, rk) == !deletable_column(&v.transpose_space(), rk);
        }
        r.check(
            "hyperplane form of deletion conditions matches GL3 search",
            agree,
            "200 random spaces",
        );
        Ok(())
    }

    // ---------------------------------------------------------------- main

    fn main_theorem(&self, r: Check) -> Result<()> {
        let by_dim: [(usize, &[&str]); 4] = [
            (2, &["J3_dim2"]),
            (3, &["M1", "M2", "M3", "M4", "Mata3", "U3"]),
            (4, &["N1", "N2", "N3", "N4", "V3"]),
            (5, &["J3"]),
        ];
        let all_names: Vec<&str> = by_dim.iter().flat_map(|(_, n)| n.iter().copied()).collect();
        let expected = self.named_keys(&all_names, Action::Equivalence)?;
        r.check(
            "listed spaces pairwise inequivalent",
            expected.len() == all_names.len(),
            format!("{} keys", expected.len()),
        );

        let classes = self.urk2_classes_33()?;
        let primitive: Vec<&ClassRecord> = classes
            .iter()
            .filter(|c| upper_rank(&c.rep) == 2 && is_primitive(&c.rep))
            .collect();
        for c in &primitive {
            r.computed.push(ClassSummary::new(
                c.key.clone(),
                Self::label(&expected, &c.key),
            ));
        }
        for (k, n) in &expected {
            r.expected.push(ClassSummary::new(k.clone(), n.clone()));
        }
        for (d, names) in by_dim {
            let want: BTreeSet<&CanonicalKey> = expected
                .iter()
                .filter(|(_, n)| names.contains(&n.as_str()))
                .map(|(k, _)| k)
                .collect();
            let got: BTreeSet<&CanonicalKey> = primitive
                .iter()
                .filter(|c| c.key.dim() == d)
                .map(|c| &c.key)
                .collect();
            r.check(
                format!("primitive urk-2 classes of dim {d}"),
                want == got,
                format!(
                    "computed {}, expected {} ({})",
                    got.len(),
                    want.len(),
                    names.join(", ")
                ),
            );
        }
        let outside: Vec<usize> = primitive
            .iter()
            .map(|c| c.key.dim())
            .filter(|d| !(2..=5).contains(d))
            .collect();
        r.check(
            "no primitive urk-2 class outside dims 2..5",
            outside.is_empty(),
            format!("{} classes total", primitive.len()),
        );

        let rc: Vec<String> = primitive
            .iter()
            .filter(|c| c.key.dim() == 4 && is_rank_constant_2(&c.rep))
            .map(|c| Self::label(&expected, &c.key))
            .collect();
        r.check("dim-4 primitive rank-2 spaces", rc == ["V3"], rc.join(", "));

        // Singular subspaces of Mat3 of dimension at least 5.
        let r11 = self.named_key("R11", Action::Equivalence)?;
        let j3k = self.named_key("J3", Action::Equivalence)?;
        let mut ok = true;
        let mut counts = [0usize; 4];
        for c in classes.iter().filter(|c| c.key.dim() >= 5) {
            let kind = if c.rep.image_sum().dim() <= 2 {
                0
            } else if c.rep.common_kernel().dim() >= 1 {
                1
            } else if c.key == r11 {
                2
            } else if c.key == j3k {
                3
            } else {
                ok = false;
                continue;
            };
            counts[kind] += 1;
        }
        r.check(
            "singular spaces of dim >= 5",
            ok && counts[2] == 1 && counts[3] == 1,
            format!(
                "in R(2,0): {}, in R(0,2): {}, R(1,1): {}, J3: {}",
                counts[0], counts[1], counts[2], counts[3]
            ),
        );

        for (n, p) in [(3usize, 4usize), (4, 3), (4, 4)] {
            let all = self.all_classes(n, p, ElementFilter::RankAtMost(2), Action::Equivalence)?;
            let prim = all
                .iter()
                .filter(|c| upper_rank(&c.rep) == 2 && is_primitive(&c.rep))
                .count();
            r.check(
                format!("no primitive urk-2 class at {n}x{p}"),
                prim == 0,
                format!("{} urk <= 2 classes scanned, {prim} primitive", all.len()),
            );
        }
        Ok(())
    }

    // ---------------------------------------------------------------- j3

    fn j3_subspaces(&self) -> Result<Vec<MatrixSpace>> {
        j3().subspaces()
    }

    fn j3_dim(&self, dim: usize, r: Check) -> Result<()> {
        let names: &[&str] = match dim {
            2 => &["J3_dim2"],
            3 => &["M1", "M2", "M3", "M4"],
            4 => &["N1", "N2", "N3", "N4"],
            5 => &["J3"],
            _ => {
                return Err(Error::Precondition(format!(
                    "J3 classification covers dims 2..5, got {dim}"
                )))
            }
        };
        let expected = self.named_keys(names, Action::Equivalence)?;
        let mut got: BTreeSet<CanonicalKey> = BTreeSet::new();
        for v in self.j3_subspaces()?.into_iter().filter(|v| v.dim() == dim) {
            if upper_rank(&v) == 2 && is_primitive(&v) {
                got.insert(self.key(&v, Action::Equivalence)?);
            }
        }
        for k in &got {
            r.computed
                .push(ClassSummary::new(k.clone(), Self::label(&expected, k)));
        }
        let want: BTreeSet<CanonicalKey> = expected.keys().cloned().collect();
        r.check(
            format!("primitive subspaces of J3 of dim {dim}"),
            got == want && expected.len() == names.len(),
            format!(
                "computed {} classes, expected {} ({})",
                got.len(),
                names.len(),
                names.join(", ")
            ),
        );

        if dim == 3 {
            let mut rows = (Vec::new(), Vec::new());
            for n in names {
                let v = self.catalog.space(n)?;
                rows.0.push(count_dim_one(&v));
                rows.1.push(count_dim_one(&v.transpose_space()));
            }
            r.check(
                "x with dim Vx = 1 for M1..M4",
                rows.0 == [2, 1, 2, 1],
                format!("{:?}", rows.0),
            );
            r.check(
                "x with dim V^T x = 1 for M1..M4",
                rows.1 == [2, 2, 1, 1],
                format!("{:?}", rows.1),
            );
            let pairs: BTreeSet<(usize, usize)> = got
                .iter()
                .map(|k| {
                    let v = k.representative();
                    (count_dim_one(&v), count_dim_one(&v.transpose_space()))
                })
                .collect();
            r.check(
                "the two counts separate the dim-3 classes",
                pairs.len() == got.len(),
                format!("{pairs:?}"),
            );
        }
        if dim == 4 {
            let census: Vec<String> = names
                .iter()
                .map(|n| self.catalog.space(n).map(|v| rank_one_census(&v)))
                .collect::<Result<_>>()?;
            r.check(
                "rank-1 census of N1..N4",
                census == ["2", "3-same-range", "3-distinct-ranges", "1"],
                census.join(", "),
            );
            let distinct: BTreeSet<String> = got
                .iter()
                .map(|k| rank_one_census(&k.representative()))
                .collect();
            r.check(
                "census separates the dim-4 classes",
                distinct.len() == got.len(),
                "",
            );
        }
        Ok(())
    }

    fn j3_extras(&self, r: Check) -> Result<()> {
        let subs = self.j3_subspaces()?;
        let mut agree = true;
        let mut total = BTreeSet::new();
        for v in &subs {
            let prim = upper_rank(v) == 2 && is_primitive(v);
            agree &= prim == j3_primitivity_criterion(v)?;
            if prim {
                total.insert(self.key(v, Action::Equivalence)?);
            }
        }
        r.check(
            "diagonal criterion matches primitivity",
            agree,
            format!("{} subspaces of J3", subs.len()),
        );
        r.check(
            "primitive subspace classes of J3",
            total.len() == 10,
            format!("{} classes over all dims", total.len()),
        );

        let rank_le1: BTreeSet<u64> = j3()
            .element_flats()
            .into_iter()
            .filter(|&f| flat_rank(3, 3, f) <= 1)
            .collect();
        let union: BTreeSet<u64> = ["P1", "P2"]
            .iter()
            .map(|n| self.catalog.space(n))
            .collect::<Result<Vec<_>>>()?
            .iter()
            .flat_map(|v| v.element_flats())
            .collect();
        r.check(
            "rank <= 1 part of J3 is P1 union P2",
            rank_le1 == union,
            format!("{} matrices", rank_le1.len()),
        );
        Ok(())
    }

    // ---------------------------------------------------------------- spectrum

    fn spectrum(&self, r: Check) -> Result<()> {
        let sim = Action::Similarity;
        let reducible = ["CvZero", "ZerovC", "NT3"];
        let irreducible = ["T1", "T2", "T3"];
        let all: Vec<&str> = reducible
            .iter()
            .chain(irreducible.iter())
            .copied()
            .collect();
        let expected = self.named_keys(&all, sim)?;
        r.check(
            "listed spaces pairwise non-similar",
            expected.len() == 6,
            format!("{} keys", expected.len()),
        );

        let found = self.level(3, 3, ElementFilter::TrivialSpectrum, sim, 3)?;
        for c in &found {
            r.computed.push(ClassSummary::new(
                c.key.clone(),
                Self::label(&expected, &c.key),
            ));
        }
        for (k, n) in &expected {
            r.expected.push(ClassSummary::new(k.clone(), n.clone()));
        }
        let got: BTreeSet<&CanonicalKey> = found.iter().map(|c| &c.key).collect();
        let want: BTreeSet<&CanonicalKey> = expected.keys().collect();
        r.check(
            "3-dim trivial-spectrum similarity classes",
            got == want,
            format!("computed {}, expected 6", got.len()),
        );
        let mut irr = Vec::new();
        let mut red = Vec::new();
        for c in &found {
            if !has_trivial_spectrum(&c.rep)? {
                r.check(
                    "class representative has trivial spectrum",
                    false,
                    c.key.to_string(),
                );
            }
            let label = Self::label(&expected, &c.key);
            if is_irreducible_action(&c.rep)? {
                irr.push(label);
            } else {
                red.push(label);
            }
        }
        irr.sort();
        red.sort();
        r.check(
            "irreducible classes",
            irr == ["T1", "T2", "T3"],
            irr.join(", "),
        );
        r.check(
            "reducible classes",
            red == ["CvZero", "NT3", "ZerovC"],
            red.join(", "),
        );
        let four = self.level(3, 3, ElementFilter::TrivialSpectrum, sim, 4)?;
        r.check(
            "no 4-dim trivial-spectrum space",
            four.is_empty(),
            format!("{} classes", four.len()),
        );

        let t1 = self.catalog.space("T1")?;
        let t2 = self.catalog.space("T2")?;
        let t3 = self.catalog.space("T3")?;
        r.check("T1 is rank-2", is_rank_constant_2(&t1), "");
        let w = are_equivalent(&t2, &t3)?;
        r.check("T2 equivalent to T3", w.is_some(), "");
        if let Some(w) = w {
            r.witness("T2 -> T3", w);
        }
        r.check("T2 not similar to T3", are_similar(&t2, &t3)?.is_none(), "");

        let c = MatrixSpace::span(2, 2, &[Gf2Matrix::from_str("0,1;1,1")?])?;
        let z1 = MatrixSpace::zero(1, 1);
        let joins = [
            ("CvZero", c.vee_join(&z1)?),
            ("ZerovC", z1.vee_join(&c)?),
            ("NT3", z1.vee_join(&z1)?.vee_join(&z1)?),
        ];
        for (name, v) in joins {
            let ok = v == self.catalog.space(name)? && has_trivial_spectrum(&v)?;
            r.check(
                format!("{name} is a join with trivial spectrum"),
                ok,
                format_linear(&v),
            );
        }

        // tr(AB) = tr(A) tr(B); its derivation needs every member to be singular.
        let mut holds = Vec::new();
        let mut fails = Vec::new();
        let mut consistent = true;
        for c in &found {
            let label = Self::label(&expected, &c.key);
            let singular = c.rep.elements().all(|m| m.rank() < 3);
            let id = trace_identity(&c.rep)?;
            consistent &= !singular || id;
            if id {
                holds.push(label);
            } else {
                fails.push(label);
            }
        }
        holds.sort();
        fails.sort();
        r.check(
            "tr(AB) = tr(A)tr(B) on classes of singular matrices",
            consistent,
            format!(
                "holds on [{}]; fails on [{}]",
                holds.join(", "),
                fails.join(", ")
            ),
        );
        let h = MatrixSpace::from_flats(
            3,
            3,
            t1.element_flats()
                .into_iter()
                .filter(|&f| !Gf2Matrix::from_flat(3, 3, f).trace().unwrap_or(true)),
        );
        let h1 = self.catalog.space("H1")?;
        r.check(
            "trace-zero part of T1 similar to H1",
            are_similar(&h, &h1)?.is_some(),
            format_linear(&h),
        );

        // Irreducible nilpotent spaces.
        let nil = self.all_classes(3, 3, ElementFilter::Nilpotent, sim)?;
        let h2 = self.catalog.space("H2")?;
        let mut irr_nil = Vec::new();
        let mut all_match = true;
        let mut seen = (false, false);
        for c in &nil {
            if c.rep.is_zero() || !is_irreducible_action(&c.rep)? {
                continue;
            }
            let to1 = are_equivalent(&c.rep, &h1)?.is_some();
            let to2 = are_equivalent(&c.rep, &h2)?.is_some();
            all_match &= to1 || to2;
            seen.0 |= to1;
            seen.1 |= to2;
            irr_nil.push(format!(
                "dim {} ~ {}",
                c.rep.dim(),
                if to1 {
                    "H1"
                } else if to2 {
                    "H2"
                } else {
                    "none"
                }
            ));
        }
        r.check(
            "H1 not equivalent to H2",
            are_equivalent(&h1, &h2)?.is_none(),
            "",
        );
        r.check(
            "irreducible nilpotent spaces equivalent to H1 or H2",
            all_match && seen == (true, true),
            format!(
                "{} similarity classes: {}",
                irr_nil.len(),
                irr_nil.join(", ")
            ),
        );
        Ok(())
    }

    // ---------------------------------------------------------------- affine

    fn affine(&self, r: Check) -> Result<()> {
        let sim = self.level(3, 3, ElementFilter::TrivialSpectrum, Action::Similarity, 3)?;
        let i3 = Gf2Matrix::identity(3);
        let mut classes: BTreeMap<(Vec<u64>, u64), Vec<AffineMatrixSpace>> = BTreeMap::new();
        let mut inside = true;
        for c in &sim {
            let s = AffineMatrixSpace::new(i3, c.rep.clone())?;
            inside &= s.elements().all(|m| m.rank() == 3);
            classes.entry(canonical_affine(&s)?).or_default().push(s);
        }
        r.check(
            "I3 + H lies in GL3 for every trivial-spectrum H",
            inside,
            format!("{} spaces", sim.len()),
        );
        r.check(
            "affine classes",
            classes.len() == 5,
            format!("{} classes from {} spaces", classes.len(), sim.len()),
        );

        let listed = ["I3_NT3", "I3_CvZero", "I3_ZerovC", "I3_T1", "I3_T2"];
        let mut want = BTreeSet::new();
        for n in listed {
            want.insert(canonical_affine(&self.catalog.get(n)?.space)?);
        }
        let got: BTreeSet<(Vec<u64>, u64)> = classes.keys().cloned().collect();
        r.check(
            "affine classes match the listed translation spaces",
            got == want && want.len() == 5,
            listed.join(", "),
        );

        let s2 = self.catalog.get("I3_T2")?.space.clone();
        let s3 = self.catalog.get("I3_T3")?.space.clone();
        match affine_equivalent(&s2, &s3)? {
            Some(w) => {
                let ok = w.apply_affine(&s2)? == s3;
                r.check(
                    "I3+T2 equivalent to I3+T3",
                    ok,
                    format!("P={} Q={}", w.p, w.q),
                );
                r.witness("I3+T2 -> I3+T3", w);
            }
            None => {
                r.check("I3+T2 equivalent to I3+T3", false, "no witness");
            }
        }
        let s1 = self.catalog.get("I3_T1")?.space.clone();
        r.check(
            "I3+T1 not equivalent to I3+T2",
            affine_equivalent(&s1, &s2)?.is_none(),
            "",
        );

        // Equivalent affine spaces have equivalent translations and the same reducibility.
        let members: Vec<AffineMatrixSpace> = classes.values().flatten().cloned().collect();
        let mut lemma = true;
        for a in &members {
            for b in &members {
                if let Some(_w) = affine_equivalent(a, b)? {
                    lemma &= are_equivalent(a.translation(), b.translation())?.is_some();
                    lemma &= is_irreducible_action(a.translation())?
                        == is_irreducible_action(b.translation())?;
                }
            }
        }
        r.check(
            "affine equivalence preserves translation class and irreducibility",
            lemma,
            "all pairs",
        );

        // The explicit route from T3 to T2.
        let a = Gf2Matrix::from_str("1,0,1;1,0,0;0,1,1")?;
        let t3 = self.catalog.space("T3")?;
        let inv = a
            .add(&i3)?
            .inverse()
            .ok_or_else(|| Error::Precondition("I3 + A is singular".into()))?;
        let moved = t3.transform(&inv, &i3)?;
        let route = t3.contains(&a)
            && a.charpoly()? == Gf2Poly(0b1011)
            && !inv.trace()?
            && are_similar(&moved, &self.catalog.space("T2")?)?.is_some();
        r.check(
            "(I3+A)^-1 T3 is similar to T2",
            route,
            format_linear(&moved),
        );
        Ok(())
    }

    // ---------------------------------------------------------------- maximal

    fn maximal(&self, r: Check) -> Result<()> {
        let six = ["R20", "R02", "R11", "J3", "Mata3", "V3"];
        let spaces: Vec<MatrixSpace> = six
            .iter()
            .map(|n| self.catalog.space(n))
            .collect::<Result<_>>()?;
        for (n, v) in six.iter().zip(&spaces) {
            r.check(
                format!("{n} maximal with urk 2"),
                is_maximal_with_urk(v, 2)?,
                format!("dim {}", v.dim()),
            );
        }
        let keys = self.named_keys(&six, Action::Equivalence)?;
        r.check("the six are pairwise inequivalent", keys.len() == 6, "");
        r.check(
            "R(2,0), R(0,2) and R(1,1) match the block pattern",
            r_space(2, 0, 3, 3)? == spaces[0]
                && r_space(0, 2, 3, 3)? == spaces[1]
                && r_space(1, 1, 3, 3)? == spaces[2],
            "",
        );

        let classes = self.urk2_classes_33()?;
        let mut missing = Vec::new();
        for c in &classes {
            if !spaces.iter().any(|s| embeds(&c.rep, s)) {
                missing.push(c.key.to_string());
            }
        }
        r.check(
            "every urk <= 2 class embeds into one of the six",
            missing.is_empty(),
            if missing.is_empty() {
                format!("{} classes", classes.len())
            } else {
                missing.join(" ")
            },
        );

        for n in [3usize, 5] {
            let mut ok = true;
            let mut forms = 0usize;
            for q in QuadForm::all(n) {
                forms += 1;
                let found = quadform_has_nonsingular_rep(&q)?;
                ok &= match found {
                    None => q.is_zero(),
                    Some(m) => !q.is_zero() && m.det()? && is_alternating(&m.add(&q.rep())?),
                };
            }
            r.check(
                format!("alternating {n}x{n} matrices maximal among singular spaces"),
                ok && forms == 1 << (n * (n + 1) / 2),
                format!("{forms} quadratic forms"),
            );
        }
        Ok(())
    }

    // ---------------------------------------------------------------- lld

    fn lld(&self, r: Check) -> Result<()> {
        let cases: [(&str, usize, &[&str]); 4] = [
            ("b", 2, &["LLD_b"]),
            (
                "c",
                3,
                &["LLD_c1", "LLD_c2", "LLD_c3", "LLD_c4", "LLD_c5", "LLD_c6"],
            ),
            ("d", 4, &["LLD_d1", "LLD_d2", "LLD_d3", "LLD_d4", "LLD_d5"]),
            ("e", 5, &["LLD_e"]),
        ];
        let semi: Vec<ClassRecord> = self
            .urk2_classes_33()?
            .into_iter()
            .filter(|c| upper_rank(&c.rep) == 2 && is_semi_primitive(&c.rep))
            .collect();
        for (case, p, names) in cases {
            let spaces: Vec<MatrixSpace> = names
                .iter()
                .map(|n| self.catalog.space(n))
                .collect::<Result<_>>()?;
            let shape_ok = spaces.iter().all(|v| v.shape() == (3, p) && v.dim() == 3);
            let lld_ok = spaces.iter().all(|v| v.is_reduced() && is_minimal_lld(v));
            r.check(
                format!("case ({case}) spaces are minimal reduced LLD"),
                shape_ok && lld_ok,
                format!("3x{p}, dim 3"),
            );
            let dual_form = spaces.iter().all(|v| {
                v.dual_space()
                    .map(|d| is_semi_primitive(&d) && upper_rank(&d) == v.dim() - 1)
                    .unwrap_or(false)
            });
            r.check(
                format!("case ({case}) duals are semi-primitive with urk 2"),
                dual_form,
                "",
            );

            let keys: BTreeSet<CanonicalKey> = spaces
                .iter()
                .map(|v| self.key(v, Action::Equivalence))
                .collect::<Result<_>>()?;
            r.check(
                format!("case ({case}) spaces pairwise inequivalent"),
                keys.len() == names.len(),
                "",
            );

            let duals: BTreeSet<CanonicalKey> = semi
                .iter()
                .filter(|c| c.key.dim() == p)
                .map(|c| self.key(&c.rep.dual_space()?, Action::Equivalence))
                .collect::<Result<_>>()?;
            r.check(
                format!("case ({case}) complete against semi-primitive classes of dim {p}"),
                duals == keys,
                format!(
                    "{} semi-primitive classes, {} listed",
                    duals.len(),
                    keys.len()
                ),
            );
        }

        let pairs = [
            ("LLD_c1", "Mata3"),
            ("LLD_c2", "U3"),
            ("LLD_e", "J3"),
            ("LLD_b", "J3_dim2"),
        ];
        for (a, b) in pairs {
            let d = self.catalog.space(a)?.dual_space()?;
            r.check(
                format!("dual of {a} equivalent to {b}"),
                are_equivalent(&d, &self.catalog.space(b)?)?.is_some(),
                "",
            );
        }
        let t3 = self.catalog.space("T3")?.dual_space()?;
        r.check(
            "dual of T3 equivalent to M3",
            are_equivalent(&t3, &self.catalog.space("M3")?)?.is_some(),
            "",
        );
        for (group_names, targets) in [
            (
                &["LLD_c3", "LLD_c4", "LLD_c5", "LLD_c6"][..],
                &["M1", "M2", "M3", "M4"][..],
            ),
            (
                &["LLD_d1", "LLD_d2", "LLD_d3", "LLD_d4", "LLD_d5"][..],
                &["N1", "N2", "N3", "N4", "V3"][..],
            ),
        ] {
            let duals: BTreeSet<CanonicalKey> = group_names
                .iter()
                .map(|n| self.key(&self.catalog.space(n)?.dual_space()?, Action::Equivalence))
                .collect::<Result<_>>()?;
            let want: BTreeSet<CanonicalKey> = self
                .named_keys(targets, Action::Equivalence)?
                .into_keys()
                .collect();
            r.check(
                format!(
                    "duals of {} are {}",
                    group_names.join(","),
                    targets.join(",")
                ),
                duals == want,
                "",
            );
        }

        // Minimal LLD against the dual: semi-primitivity alone is not enough.
        let counter = crate::genmatrix::parse_linear("[a,b,0,0;0,0,c,d]")?;
        let d = counter.dual_space()?;
        r.check(
            "dual semi-primitive does not force minimal LLD",
            is_lld(&counter) && !is_minimal_lld(&counter) && is_semi_primitive(&d),
            format!("{} has dual {}", format_linear(&counter), format_linear(&d)),
        );
        Ok(())
    }

    // ---------------------------------------------------------------- r11

    fn r11(&self, r: Check) -> Result<()> {
        let r11 = r_space(1, 1, 3, 3)?;
        let subs = r11.subspaces()?;
        let mut all_keys: BTreeSet<CanonicalKey> = BTreeSet::new();
        let mut reduced: BTreeSet<CanonicalKey> = BTreeSet::new();
        for v in &subs {
            let k = self.key(v, Action::Equivalence)?;
            if !v.is_zero() && v.is_reduced() {
                reduced.insert(k.clone());
            }
            all_keys.insert(k);
        }
        let mut family: BTreeMap<CanonicalKey, String> = BTreeMap::new();
        let mut members_ok = true;
        for rr in 0..=2 {
            for corner in [true, false] {
                let v = r11_family(rr, corner, 3, 3)?;
                members_ok &= v.is_reduced() && v.is_subspace_of(&r11);
                family.insert(
                    self.key(&v, Action::Equivalence)?,
                    format!("r={rr}{}", if corner { "+corner" } else { "" }),
                );
            }
        }
        for (k, n) in &family {
            r.expected.push(ClassSummary::new(k.clone(), n.clone()));
        }
        for k in &reduced {
            r.computed
                .push(ClassSummary::new(k.clone(), Self::label(&family, k)));
        }
        r.check("family members reduced and inside R(1,1)", members_ok, "");
        r.check(
            "family members pairwise inequivalent",
            family.len() == 6,
            format!("{} keys", family.len()),
        );
        let fam_keys: BTreeSet<CanonicalKey> = family.keys().cloned().collect();
        r.check(
            "reduced subspaces of R(1,1) match the family",
            fam_keys == reduced,
            format!(
                "{} subspaces scanned, {} reduced classes",
                subs.len(),
                reduced.len()
            ),
        );
        r.check(
            "r bounded by min(n-1, p-1)",
            r11_family(3, true, 3, 3).is_err() && r11_family(3, false, 3, 3).is_err(),
            "",
        );

        let mut ok = true;
        let mut prim_eq = true;
        let mut count = 0;
        for c in self.urk2_classes_33()? {
            if c.rep.is_zero() || !c.rep.is_reduced() || upper_rank(&c.rep) != 2 {
                continue;
            }
            count += 1;
            let semi = is_semi_primitive(&c.rep);
            ok &= semi == (c.rep.p() > 2 && !all_keys.contains(&c.key));
            prim_eq &= semi == is_primitive(&c.rep);
        }
        r.check(
            "semi-primitive iff not inside R(1,1)",
            ok,
            format!("{count} reduced urk-2 classes"),
        );
        r.check("semi-primitive iff primitive at 3x3", prim_eq, "");
        Ok(())
    }
}

fn rank_by_minors(m: &Gf2Matrix) -> usize {
    let (n, p) = m.shape();
    for k in (1..=n.min(p)).rev() {
        for rows in 0u32..1 << n {
            if rows.count_ones() as usize != k {
                continue;
            }
            for cols in 0u32..1 << p {
                if cols.count_ones() as usize != k {
                    continue;
                }
                let ri: Vec<usize> = (0..n).filter(|i| rows >> i & 1 == 1).collect();
                let ci: Vec<usize> = (0..p).filter(|j| cols >> j & 1 == 1).collect();
                let mut sub = Gf2Matrix::zeros(k, k);
                for (a, &i) in ri.iter().enumerate() {
                    for (b, &j) in ci.iter().enumerate() {
                        sub.set(a, b, m.get(i, j));
                    }
                }
                if sub.det().expect("square") {
                    return k;
                }
            }
        }
    }
    0
}

fn random_invertible(n: usize, rng: &mut ChaCha8Rng) -> Gf2Matrix {
    loop {
        let m = Gf2Matrix::from_flat(n, n, rng.gen_range(0..1u64 << (n * n)));
        if m.det().expect("square") {
            return m;
        }
    }
}

fn random_space(n: usize, p: usize, dim: usize, rng: &mut ChaCha8Rng) -> MatrixSpace {
    let gens: Vec<Gf2Matrix> = (0..dim)
        .map(|_| Gf2Matrix::from_flat(n, p, rng.gen_range(1..1u64 << (n * p))))
        .collect();
    MatrixSpace::span(n, p, &gens).expect("one shape")
}

/// Some `Q` makes the first `p - 1` columns of `V Q` reach upper rank below `r`.
fn deletable_column(v: &MatrixSpace, r: usize) -> bool {
    let (n, p) = v.shape();
    let keep: Vec<Gf2Vector> = (0..p - 1).map(|j| Gf2Vector::unit(p, j)).collect();
    group(p).iter().any(|q| {
        let w = v.transform(&Gf2Matrix::identity(n), q).expect("shapes");
        upper_rank(&w.restrict_columns(&keep)) < r
    })
}

fn count_dim_one(v: &MatrixSpace) -> usize {
    Gf2Vector::nonzero(v.p())
        .filter(|x| v.evaluation_image(x).map(|s| s.dim() == 1).unwrap_or(false))
        .count()
}

fn rank_one_census(v: &MatrixSpace) -> String {
    let ones: Vec<Gf2Matrix> = v.elements().filter(|m| m.rank() == 1).collect();
    let ranges: BTreeSet<u64> = ones
        .iter()
        .map(|m| {
            (0..m.ncols())
                .map(|j| m.column(j).bits())
                .find(|&c| c != 0)
                .unwrap_or(0)
        })
        .collect();
    match ones.len() {
        3 if ranges.len() == 1 => "3-same-range".into(),
        3 => "3-distinct-ranges".into(),
        k => k.to_string(),
    }
}

fn trace_identity(v: &MatrixSpace) -> Result<bool> {
    let elems: Vec<Gf2Matrix> = v.elements().collect();
    for a in &elems {
        for b in &elems {
            if a.mul(b)?.trace()? != (a.trace()? & b.trace()?) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn is_alternating(m: &Gf2Matrix) -> bool {
    m.transpose() == *m && (0..m.nrows()).all(|i| !m.get(i, i))
}

/// Some `P W Q` lies inside `s`.
fn embeds(w: &MatrixSpace, s: &MatrixSpace) -> bool {
    if w.dim() > s.dim() {
        return false;
    }
    let basis = w.basis();
    let (n, p) = w.shape();
    group(n).iter().any(|pm| {
        let left: Vec<Gf2Matrix> = basis.iter().map(|b| pm.mul(b).expect("shapes")).collect();
        group(p)
            .iter()
            .any(|qm| left.iter().all(|l| s.contains(&l.mul(qm).expect("shapes"))))
    })
}
