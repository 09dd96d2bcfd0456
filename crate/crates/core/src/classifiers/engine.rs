//! Breadth-first enumeration of subspace classes.
//!
//! Level `d` holds one representative per orbit of `d`-dimensional spaces all
//! of whose members pass an element filter. Level `d + 1` is obtained by
//! adjoining one coset of `Mat / V` to each representative `V`. Cosets in one
//! orbit of the automorphism group of `V` give the same class, so only one per
//! orbit is canonicalized.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gf2::Gf2Matrix;
use crate::orbits::{canonicalize, Action, CanonicalKey, KeyCache, Witness};
use crate::predicates::{
    has_trivial_spectrum, is_irreducible_action, is_lld, is_minimal_lld, is_primitive,
    is_rank_constant_2, is_semi_primitive, upper_rank,
};
use crate::spaces::{flat_rank, reduce, MatrixSpace};

/// Condition imposed on every member of the enumerated spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementFilter {
    Any,
    RankAtMost(usize),
    /// `det(M + I) = 1`.
    TrivialSpectrum,
    Nilpotent,
}

impl ElementFilter {
    fn invariant_under(&self, action: Action) -> bool {
        match self {
            ElementFilter::Any | ElementFilter::RankAtMost(_) => true,
            ElementFilter::TrivialSpectrum | ElementFilter::Nilpotent => {
                action == Action::Similarity
            }
        }
    }

    pub fn accepts(&self, m: &Gf2Matrix) -> bool {
        match *self {
            ElementFilter::Any => true,
            ElementFilter::RankAtMost(k) => m.rank() <= k,
            ElementFilter::TrivialSpectrum => {
                m.is_square()
                    && m.add(&Gf2Matrix::identity(m.nrows()))
                        .expect("square")
                        .rank()
                        == m.nrows()
            }
            ElementFilter::Nilpotent => {
                if !m.is_square() {
                    return false;
                }
                let mut acc = *m;
                for _ in 1..m.nrows() {
                    acc = acc.mul(m).expect("square");
                }
                acc.is_zero()
            }
        }
    }
}

impl FromStr for ElementFilter {
    type Err = Error;

    /// `any`, `rank<=K`, `trivial-spectrum` or `nilpotent`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "any" => Ok(ElementFilter::Any),
            "trivial-spectrum" => Ok(ElementFilter::TrivialSpectrum),
            "nilpotent" => Ok(ElementFilter::Nilpotent),
            _ => s
                .strip_prefix("rank<=")
                .and_then(|k| k.parse().ok())
                .map(ElementFilter::RankAtMost)
                .ok_or_else(|| Error::Parse {
                    pos: 0,
                    msg: format!("unknown element filter `{s}`"),
                }),
        }
    }
}

impl fmt::Display for ElementFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementFilter::Any => f.write_str("any"),
            ElementFilter::RankAtMost(k) => write!(f, "rank<={k}"),
            ElementFilter::TrivialSpectrum => f.write_str("trivial-spectrum"),
            ElementFilter::Nilpotent => f.write_str("nilpotent"),
        }
    }
}

/// Condition on a whole space, applied after enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpacePredicate {
    All,
    UpperRank(usize),
    Reduced,
    SemiPrimitive,
    Primitive,
    RankConstant2,
    Irreducible,
    TrivialSpectrum,
    Lld,
    MinimalLld,
}

impl SpacePredicate {
    pub fn holds(&self, v: &MatrixSpace) -> Result<bool> {
        Ok(match *self {
            SpacePredicate::All => true,
            SpacePredicate::UpperRank(k) => upper_rank(v) == k,
            SpacePredicate::Reduced => !v.is_zero() && v.is_reduced(),
            SpacePredicate::SemiPrimitive => !v.is_zero() && is_semi_primitive(v),
            SpacePredicate::Primitive => !v.is_zero() && is_primitive(v),
            SpacePredicate::RankConstant2 => !v.is_zero() && is_rank_constant_2(v),
            SpacePredicate::Irreducible => is_irreducible_action(v)?,
            SpacePredicate::TrivialSpectrum => has_trivial_spectrum(v)?,
            SpacePredicate::Lld => is_lld(v),
            SpacePredicate::MinimalLld => is_minimal_lld(v),
        })
    }
}

impl FromStr for SpacePredicate {
    type Err = Error;

    /// `all`, `urk=K`, `reduced`, `semi-primitive`, `primitive`, `rank-constant-2`,
    /// `irreducible`, `trivial-spectrum`, `lld` or `minimal-lld`.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => SpacePredicate::All,
            "reduced" => SpacePredicate::Reduced,
            "semi-primitive" => SpacePredicate::SemiPrimitive,
            "primitive" => SpacePredicate::Primitive,
            "rank-constant-2" => SpacePredicate::RankConstant2,
            "irreducible" => SpacePredicate::Irreducible,
            "trivial-spectrum" => SpacePredicate::TrivialSpectrum,
            "lld" => SpacePredicate::Lld,
            "minimal-lld" => SpacePredicate::MinimalLld,
            _ => s
                .strip_prefix("urk=")
                .and_then(|k| k.parse().ok())
                .map(SpacePredicate::UpperRank)
                .ok_or_else(|| Error::Parse {
                    pos: 0,
                    msg: format!("unknown space predicate `{s}`"),
                })?,
        })
    }
}

impl fmt::Display for SpacePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpacePredicate::All => f.write_str("all"),
            SpacePredicate::UpperRank(k) => write!(f, "urk={k}"),
            SpacePredicate::Reduced => f.write_str("reduced"),
            SpacePredicate::SemiPrimitive => f.write_str("semi-primitive"),
            SpacePredicate::Primitive => f.write_str("primitive"),
            SpacePredicate::RankConstant2 => f.write_str("rank-constant-2"),
            SpacePredicate::Irreducible => f.write_str("irreducible"),
            SpacePredicate::TrivialSpectrum => f.write_str("trivial-spectrum"),
            SpacePredicate::Lld => f.write_str("lld"),
            SpacePredicate::MinimalLld => f.write_str("minimal-lld"),
        }
    }
}

/// Largest dimension `enumerate_classes` accepts.
pub const MAX_ENUM_DIM: usize = 6;

/// Classes of `dim`-dimensional spaces in `Mat_{n,p}` whose members pass `filter`
/// and which satisfy `predicate`, one per orbit, sorted by key.
pub fn enumerate_classes(
    n: usize,
    p: usize,
    dim: usize,
    filter: ElementFilter,
    predicate: SpacePredicate,
    action: Action,
    cache: &Arc<KeyCache>,
) -> Result<Vec<ClassRecord>> {
    if dim > MAX_ENUM_DIM {
        return Err(Error::TooLarge {
            what: "enumeration dimension",
            max: MAX_ENUM_DIM,
            got: dim,
        });
    }
    let engine = shared_engine(n, p, filter, action, cache)?;
    let mut engine = engine.lock().expect("engine poisoned");
    let mut out = Vec::new();
    for c in engine.level(dim)? {
        if predicate.holds(&c.rep)? {
            out.push(c.clone());
        }
    }
    Ok(out)
}

/// One class: its canonical key and the representative the key describes.
#[derive(Clone, Debug)]
pub struct ClassRecord {
    pub key: CanonicalKey,
    pub rep: MatrixSpace,
}

/// Work counters for one engine.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EngineStats {
    pub cosets_checked: u64,
    pub cosets_kept: u64,
    pub canonicalizations: u64,
    pub cache_hits: u64,
}

const ORBIT_GENERATORS: usize = 32;
const MAX_ENTRIES: usize = 20;

pub struct ClassEngine {
    n: usize,
    p: usize,
    filter: ElementFilter,
    action: Action,
    cache: Arc<KeyCache>,
    /// Bit `f` set when the flattened matrix `f` passes the filter.
    pass: Vec<u64>,
    levels: Vec<Vec<ClassRecord>>,
    autos: Vec<Vec<Vec<Witness>>>,
    exhausted: bool,
    pub stats: EngineStats,
}

impl ClassEngine {
    pub fn new(
        n: usize,
        p: usize,
        filter: ElementFilter,
        action: Action,
        cache: Arc<KeyCache>,
    ) -> Result<Self> {
        if n * p > MAX_ENTRIES || n > 5 || p > 5 {
            return Err(Error::UnsupportedShape {
                what: "class enumeration",
                n,
                p,
            });
        }
        if action == Action::Similarity && n != p {
            return Err(Error::NotSquare { nrows: n, ncols: p });
        }
        if !filter.invariant_under(action) {
            return Err(Error::Precondition(format!(
                "element filter {filter} is not invariant under {action}"
            )));
        }
        let total = 1usize << (n * p);
        let mut pass = vec![0u64; total.div_ceil(64)];
        for f in 0..total {
            let ok = match filter {
                ElementFilter::RankAtMost(k) => flat_rank(n, p, f as u64) <= k,
                _ => filter.accepts(&Gf2Matrix::from_flat(n, p, f as u64)),
            };
            if ok {
                pass[f / 64] |= 1 << (f % 64);
            }
        }
        let zero = MatrixSpace::zero(n, p);
        let zero_key = CanonicalKey {
            action,
            n: n as u8,
            p: p as u8,
            payload: vec![],
        };
        Ok(ClassEngine {
            n,
            p,
            filter,
            action,
            cache,
            pass,
            levels: vec![vec![ClassRecord {
                key: zero_key,
                rep: zero,
            }]],
            autos: vec![vec![group_generators(n, p, action)]],
            exhausted: false,
            stats: EngineStats::default(),
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n, self.p)
    }

    pub fn filter(&self) -> ElementFilter {
        self.filter
    }

    pub fn action(&self) -> Action {
        self.action
    }

    #[inline]
    fn passes(&self, f: u64) -> bool {
        (self.pass[(f / 64) as usize] >> (f % 64)) & 1 == 1
    }

    /// Classes of dimension `d`.
    pub fn level(&mut self, d: usize) -> Result<&[ClassRecord]> {
        while self.levels.len() <= d {
            self.extend()?;
        }
        Ok(&self.levels[d])
    }

    /// Every level up to the first empty one.
    pub fn all_levels(&mut self) -> Result<&[Vec<ClassRecord>]> {
        while !self.exhausted {
            self.extend()?;
        }
        Ok(&self.levels)
    }

    /// Largest dimension reached so far with at least one class.
    pub fn max_dim(&self) -> usize {
        self.levels.iter().rposition(|l| !l.is_empty()).unwrap_or(0)
    }

    fn extend(&mut self) -> Result<()> {
        let d = self.levels.len() - 1;
        let (n, p) = (self.n, self.p);
        let np = n * p;
        let mut found: BTreeMap<CanonicalKey, ()> = BTreeMap::new();
        let mut index = vec![u32::MAX; 1usize << np];
        for (ci, class) in self.levels[d].iter().enumerate() {
            let basis = class.rep.basis_flats().to_vec();
            let elems = class.rep.element_flats();
            let pivots: u64 = basis.iter().fold(0, |a, &b| a | (b & b.wrapping_neg()));
            // Cosets whose every member passes the filter.
            let mut kept: Vec<u64> = Vec::new();
            for m in 1u64..1 << np {
                if m & pivots != 0 {
                    continue;
                }
                self.stats.cosets_checked += 1;
                if elems.iter().all(|&e| self.passes(e ^ m)) {
                    index[m as usize] = kept.len() as u32;
                    kept.push(m);
                }
            }
            self.stats.cosets_kept += kept.len() as u64;
            // Orbits of the automorphism sample on the kept cosets.
            let autos = &self.autos[d][ci];
            let step = (autos.len() / ORBIT_GENERATORS).max(1);
            let gens: Vec<&Witness> = autos.iter().step_by(step).take(ORBIT_GENERATORS).collect();
            let mut uf = UnionFind::new(kept.len());
            for g in gens {
                for (i, &m) in kept.iter().enumerate() {
                    let img = reduce(&basis, transform_flat(n, p, m, g));
                    let j = index[img as usize];
                    debug_assert_ne!(j, u32::MAX, "automorphism must preserve the filter");
                    uf.union(i, j as usize);
                }
            }
            let roots: Vec<u64> = (0..kept.len())
                .filter(|&i| uf.find(i) == i)
                .map(|i| kept[i])
                .collect();
            for &m in &kept {
                index[m as usize] = u32::MAX;
            }
            let spaces: Vec<MatrixSpace> = roots
                .iter()
                .map(|&m| MatrixSpace::from_flats(n, p, basis.iter().copied().chain([m])))
                .collect();
            let cache = &self.cache;
            let action = self.action;
            let results: Vec<Result<(CanonicalKey, bool)>> = spaces
                .par_iter()
                .map(|w| match cache.get(action, w)? {
                    Some(k) => Ok((k, true)),
                    None => {
                        let k = canonicalize(w, action)?.key;
                        cache.insert(w, &k)?;
                        Ok((k, false))
                    }
                })
                .collect();
            for r in results {
                let (k, hit) = r?;
                if hit {
                    self.stats.cache_hits += 1;
                } else {
                    self.stats.canonicalizations += 1;
                }
                found.insert(k, ());
            }
        }
        let keys: Vec<CanonicalKey> = found.into_keys().collect();
        let records: Vec<ClassRecord> = keys
            .into_iter()
            .map(|k| ClassRecord {
                rep: k.representative(),
                key: k,
            })
            .collect();
        let action = self.action;
        let autos: Vec<Result<Vec<Witness>>> = records
            .par_iter()
            .map(|r| canonicalize(&r.rep, action).map(|c| c.automorphisms))
            .collect();
        let autos = autos.into_iter().collect::<Result<Vec<_>>>()?;
        self.stats.canonicalizations += records.len() as u64;
        if records.is_empty() {
            self.exhausted = true;
        }
        self.levels.push(records);
        self.autos.push(autos);
        Ok(())
    }
}

/// `P M Q` on a flattened matrix.
#[inline]
fn transform_flat(n: usize, p: usize, m: u64, w: &Witness) -> u64 {
    let mat = Gf2Matrix::from_flat(n, p, m);
    w.p.mul(&mat)
        .expect("shape")
        .mul(&w.q)
        .expect("shape")
        .flat()
}

/// Generators of `GL_n x GL_p` (or of conjugation by `GL_n`): all transvections.
fn group_generators(n: usize, p: usize, action: Action) -> Vec<Witness> {
    let tv = |k: usize, i: usize, j: usize| {
        let mut m = Gf2Matrix::identity(k);
        m.set(i, j, true);
        m
    };
    let mut gens = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let t = tv(n, i, j);
                let q = if action == Action::Similarity {
                    t
                } else {
                    Gf2Matrix::identity(p)
                };
                gens.push(Witness { p: t, q });
            }
        }
    }
    if action == Action::Equivalence {
        for i in 0..p {
            for j in 0..p {
                if i != j {
                    gens.push(Witness {
                        p: Gf2Matrix::identity(n),
                        q: tv(p, i, j),
                    });
                }
            }
        }
    }
    gens
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] as usize != i {
            let g = self.parent[self.parent[i] as usize];
            self.parent[i] = g;
            i = g as usize;
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller index stays root so roots are deterministic.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo as u32;
        }
    }
}

type EngineKey = (usize, usize, ElementFilter, Action);

/// Shared engines, so suites that need the same levels compute them once per process.
pub fn shared_engine(
    n: usize,
    p: usize,
    filter: ElementFilter,
    action: Action,
    cache: &Arc<KeyCache>,
) -> Result<Arc<Mutex<ClassEngine>>> {
    static ENGINES: OnceLock<Mutex<HashMap<EngineKey, Arc<Mutex<ClassEngine>>>>> = OnceLock::new();
    let map = ENGINES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().expect("engine registry poisoned");
    if let Some(e) = guard.get(&(n, p, filter, action)) {
        return Ok(e.clone());
    }
    let e = Arc::new(Mutex::new(ClassEngine::new(
        n,
        p,
        filter,
        action,
        cache.clone(),
    )?));
    guard.insert((n, p, filter, action), e.clone());
    Ok(e)
}
