//! Canonical forms of matrix spaces under equivalence `V -> P V Q` and
//! similarity `V -> P V P^-1`, with witnesses and automorphism samples.
//!
//! Equivalence keys for spaces of upper rank `r >= 2` are computed by
//! normalizing a distinguished rank-`r` member to `J_r` and scanning the
//! stabilizer of `J_r`. The distinguished members are those whose joint rank
//! profile `(rk N, rk(M + N))` over the space is least, so the scanned set of
//! group elements depends only on the orbit and the minimum is an orbit
//! invariant. Upper rank 1 spaces have an explicit normal form.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{combine_rows, group, low_mask, Gf2Matrix, MAX_SIDE};
use crate::spaces::{flat_rank, reduce, rref, rref_insert, AffineMatrixSpace, MatrixSpace};

/// Which group acts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Equivalence,
    Similarity,
}

impl Action {
    pub fn as_str(&self) -> &'static str {
        match self {
            Action::Equivalence => "equiv",
            Action::Similarity => "sim",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Orbit invariant: the echelon basis of a distinguished member of the orbit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey {
    pub action: Action,
    pub n: u8,
    pub p: u8,
    pub payload: Vec<u64>,
}

impl CanonicalKey {
    pub fn dim(&self) -> usize {
        self.payload.len()
    }

    /// The distinguished member itself.
    pub fn representative(&self) -> MatrixSpace {
        MatrixSpace::from_rref_unchecked(self.n as usize, self.p as usize, self.payload.clone())
    }

    /// Hex digits of the payload matrices joined by `.`.
    pub fn payload_hex(&self) -> String {
        self.representative().basis_hex()
    }
}

impl std::str::FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equiv" => Ok(Action::Equivalence),
            "sim" => Ok(Action::Similarity),
            _ => Err(Error::Parse {
                pos: 0,
                msg: format!("unknown action `{s}`"),
            }),
        }
    }
}

/// Reads the `<action>:<n>x<p>:<hex>` form written by `Display`.
impl std::str::FromStr for CanonicalKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().splitn(3, ':');
        let (Some(action), Some(shape), Some(hex)) = (parts.next(), parts.next(), parts.next())
        else {
            return Err(Error::Parse {
                pos: 0,
                msg: "expected <action>:<n>x<p>:<hex>".into(),
            });
        };
        let action: Action = action.parse()?;
        let bad = || Error::Parse {
            pos: action.as_str().len() + 1,
            msg: format!("bad shape `{shape}`"),
        };
        let (n, p) = shape.split_once('x').ok_or_else(bad)?;
        let (n, p): (usize, usize) = (n.parse().map_err(|_| bad())?, p.parse().map_err(|_| bad())?);
        let space = MatrixSpace::from_basis_hex(n, p, hex)?;
        let key = CanonicalKey {
            action,
            n: n as u8,
            p: p as u8,
            payload: space.basis_flats().to_vec(),
        };
        if key.payload_hex() != hex {
            return Err(Error::Parse {
                pos: s.len() - hex.len(),
                msg: "payload is not in echelon form".into(),
            });
        }
        Ok(key)
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}x{}:{}",
            self.action,
            self.n,
            self.p,
            self.payload_hex()
        )
    }
}

/// A pair `(P, Q)` of invertible matrices acting by `M -> P M Q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Witness {
    pub p: Gf2Matrix,
    pub q: Gf2Matrix,
}

impl Witness {
    pub fn identity(n: usize, p: usize) -> Self {
        Witness {
            p: Gf2Matrix::identity(n),
            q: Gf2Matrix::identity(p),
        }
    }

    pub fn apply(&self, v: &MatrixSpace) -> Result<MatrixSpace> {
        v.transform(&self.p, &self.q)
    }

    pub fn apply_affine(&self, s: &AffineMatrixSpace) -> Result<AffineMatrixSpace> {
        s.transform(&self.p, &self.q)
    }

    pub fn inverse(&self) -> Self {
        Witness {
            p: self.p.inverse().expect("invertible"),
            q: self.q.inverse().expect("invertible"),
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Witness) -> Self {
        Witness {
            p: next.p.mul(&self.p).expect("shapes"),
            q: self.q.mul(&next.q).expect("shapes"),
        }
    }
}

/// Result of one canonicalization.
#[derive(Clone, Debug)]
pub struct Canonical {
    pub key: CanonicalKey,
    /// Maps the input onto `key.representative()`.
    pub witness: Witness,
    /// Automorphisms of the input, sampled across the whole automorphism group.
    pub automorphisms: Vec<Witness>,
    /// Order of the automorphism group, when the scan determines it.
    pub aut_order: Option<u64>,
}

const AUT_SAMPLE_CAP: usize = 1024;
/// Largest stabilizer scan accepted per distinguished member.
pub const MAX_STABILIZER: u64 = 4_000_000;

/// Keeps an evenly thinned sample of a long stream.
struct Sampler {
    items: Vec<Witness>,
    stride: u64,
    seen: u64,
}

impl Sampler {
    fn new() -> Self {
        Sampler {
            items: Vec::new(),
            stride: 1,
            seen: 0,
        }
    }

    fn push(&mut self, w: Witness) {
        if self.seen.is_multiple_of(self.stride) {
            self.items.push(w);
            if self.items.len() >= AUT_SAMPLE_CAP {
                let kept: Vec<Witness> = self.items.iter().step_by(2).copied().collect();
                self.items = kept;
                self.stride *= 2;
            }
        }
        self.seen += 1;
    }
}

fn check_equiv_shape(n: usize, p: usize) -> Result<()> {
    if n > 5 || p > 5 {
        return Err(Error::UnsupportedShape {
            what: "equivalence canonical form",
            n,
            p,
        });
    }
    Ok(())
}

/// Matrices `(P, Q)` with `P M Q = J_r` for a rank-`r` matrix `M`.
fn normalizer(m: &Gf2Matrix) -> (Gf2Matrix, Gf2Matrix) {
    let (n, p) = m.shape();
    // Row reduction with the operations recorded in `pm`.
    let mut a = [0u8; MAX_SIDE];
    a[..n].copy_from_slice(m.rows());
    let mut pm = [0u8; MAX_SIDE];
    for (i, r) in pm.iter_mut().enumerate().take(n) {
        *r = 1 << i;
    }
    let mut rank = 0;
    for c in 0..p {
        let Some(piv) = (rank..n).find(|&i| (a[i] >> c) & 1 == 1) else {
            continue;
        };
        a.swap(rank, piv);
        pm.swap(rank, piv);
        for i in 0..n {
            if i != rank && (a[i] >> c) & 1 == 1 {
                a[i] ^= a[rank];
                pm[i] ^= pm[rank];
            }
        }
        rank += 1;
    }
    // The rows of Q^-1 start with the non-zero rows of the reduced matrix.
    let mut qinv_rows: Vec<u8> = a[..rank].to_vec();
    for j in 0..p {
        if qinv_rows.len() == p {
            break;
        }
        let mut cand = qinv_rows.clone();
        cand.push(1 << j);
        if crate::gf2::rank_of_rows(&cand) == cand.len() {
            qinv_rows.push(1 << j);
        }
    }
    let qinv = Gf2Matrix::from_rows(p, p, &qinv_rows).expect("square");
    let pmat = Gf2Matrix::from_rows(n, n, &pm[..n]).expect("square");
    (pmat, qinv.inverse().expect("completed basis"))
}

/// Group elements fixing `J_r` in `Mat_{n,p}`, grouped for fast scanning.
struct StabilizerPlan {
    n: usize,
    p: usize,
    r: usize,
    /// `(A, A^-1)` over `GL_r`.
    a_list: Vec<(Gf2Matrix, Gf2Matrix)>,
    /// Row masks of `S` below and right of `A`: `(X rows, D rows)` with `S = [[A, X], [0, D]]`.
    lefts: Vec<([u8; MAX_SIDE], [u8; MAX_SIDE])>,
    /// Rows `r..p` of `T = [[A^-1, 0], [Y, E]]`.
    rights: Vec<[u8; MAX_SIDE]>,
}

fn gl_list(k: usize) -> Vec<Gf2Matrix> {
    if k == 0 {
        vec![]
    } else {
        group(k).to_vec()
    }
}

impl StabilizerPlan {
    fn size(n: usize, p: usize, r: usize) -> Option<u64> {
        let gl = |k: usize| -> Option<u64> {
            match k {
                0 | 1 => Some(1),
                2 => Some(6),
                3 => Some(168),
                4 => Some(20160),
                _ => None,
            }
        };
        Some(gl(r)? * gl(n - r)? * gl(p - r)? * (1u64 << (r * (n - r))) * (1u64 << (r * (p - r))))
    }

    fn build(n: usize, p: usize, r: usize) -> Self {
        let a_list: Vec<(Gf2Matrix, Gf2Matrix)> = gl_list(r)
            .into_iter()
            .map(|a| (a, a.inverse().expect("invertible")))
            .collect();
        let mut lefts = Vec::new();
        let d_list = gl_list(n - r);
        for x in 0..1u64 << (r * (n - r)) {
            let mut xr = [0u8; MAX_SIDE];
            for (i, row) in xr.iter_mut().enumerate().take(r) {
                *row = ((x >> (i * (n - r))) & low_mask(n - r)) as u8;
            }
            if n == r {
                lefts.push((xr, [0u8; MAX_SIDE]));
            }
            for d in &d_list {
                let mut dr = [0u8; MAX_SIDE];
                dr[..n - r].copy_from_slice(d.rows());
                lefts.push((xr, dr));
            }
        }
        let mut rights = Vec::new();
        let e_list = gl_list(p - r);
        for y in 0..1u64 << (r * (p - r)) {
            let mut base = [0u8; MAX_SIDE];
            for (i, row) in base.iter_mut().enumerate().take(p - r) {
                *row = ((y >> (i * r)) & low_mask(r)) as u8;
            }
            if p == r {
                rights.push(base);
            }
            for e in &e_list {
                let mut t = base;
                for (i, row) in t.iter_mut().enumerate().take(p - r) {
                    *row |= e.row(i) << r;
                }
                rights.push(t);
            }
        }
        StabilizerPlan {
            n,
            p,
            r,
            a_list,
            lefts,
            rights,
        }
    }

    fn get(n: usize, p: usize, r: usize) -> Arc<StabilizerPlan> {
        type Plans = Mutex<HashMap<(usize, usize, usize), Arc<StabilizerPlan>>>;
        static PLANS: OnceLock<Plans> = OnceLock::new();
        let map = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = map.lock().expect("plan cache poisoned");
        guard
            .entry((n, p, r))
            .or_insert_with(|| Arc::new(StabilizerPlan::build(n, p, r)))
            .clone()
    }

    fn s_matrix(&self, a: &Gf2Matrix, left: &([u8; MAX_SIDE], [u8; MAX_SIDE])) -> Gf2Matrix {
        let mut rows = [0u8; MAX_SIDE];
        for (i, row) in rows.iter_mut().enumerate().take(self.r) {
            *row = a.row(i) | (left.0[i] << self.r);
        }
        for (row, &l) in rows[self.r..self.n].iter_mut().zip(&left.1) {
            *row = l << self.r;
        }
        Gf2Matrix::from_rows(self.n, self.n, &rows[..self.n]).expect("square")
    }

    fn t_rows(&self, ainv: &Gf2Matrix, right: &[u8; MAX_SIDE]) -> [u8; MAX_SIDE] {
        let mut rows = [0u8; MAX_SIDE];
        rows[..self.r].copy_from_slice(&ainv.rows()[..self.r]);
        rows[self.r..self.p].copy_from_slice(&right[..self.p - self.r]);
        rows
    }
}

/// Invariant profile of `m` inside the space: counts of `(rk N, rk(M+N))` over members `N`.
fn member_profile(n: usize, p: usize, elems: &[u64], ranks: &[u8], m: u64) -> Vec<u32> {
    let k = n.min(p) + 1;
    let mut h = vec![0u32; k * k];
    for (&e, &re) in elems.iter().zip(ranks) {
        h[re as usize * k + flat_rank(n, p, e ^ m)] += 1;
    }
    h
}

#[inline]
fn less(a: &[u64], b: &[u64]) -> std::cmp::Ordering {
    a.cmp(b)
}

/// Scans the stabilizer of `J_r` applied to `basis` (already normalized by `pre`).
fn scan_stabilizer(
    plan: &StabilizerPlan,
    basis: &[Gf2Matrix],
    pre: &Witness,
    best: &mut Option<(Vec<u64>, Witness)>,
    sampler: &mut Sampler,
) {
    let (n, p) = (plan.n, plan.p);
    let d = basis.len();
    let width = 1usize << p;
    let mut colmaps = vec![0u8; plan.rights.len() * width];
    let mut lb = vec![0u8; d * n];
    let mut buf = [0u64; 64];
    let mut best_buf: Vec<u64> = best.as_ref().map(|b| b.0.clone()).unwrap_or_default();
    for (a, ainv) in &plan.a_list {
        for (ri, right) in plan.rights.iter().enumerate() {
            let t = plan.t_rows(ainv, right);
            let cm = &mut colmaps[ri * width..(ri + 1) * width];
            for (u, slot) in cm.iter_mut().enumerate() {
                *slot = combine_rows(&t[..p], u as u8);
            }
        }
        for left in &plan.lefts {
            let s = plan.s_matrix(a, left);
            for (k, b) in basis.iter().enumerate() {
                for i in 0..n {
                    lb[k * n + i] = combine_rows(b.rows(), s.row(i));
                }
            }
            for (ri, cm) in colmaps.chunks_exact(width).enumerate() {
                let mut len = 0;
                for k in 0..d {
                    let mut f = 0u64;
                    for i in 0..n {
                        f |= u64::from(cm[lb[k * n + i] as usize]) << (i * p);
                    }
                    len = rref_insert(&mut buf, len, f);
                }
                debug_assert_eq!(len, d);
                let cur = &buf[..d];
                let ord = if best_buf.is_empty() {
                    std::cmp::Ordering::Less
                } else {
                    less(cur, &best_buf)
                };
                if ord == std::cmp::Ordering::Greater {
                    continue;
                }
                let t = plan.t_rows(ainv, &plan.rights[ri]);
                let tm = Gf2Matrix::from_rows(p, p, &t[..p]).expect("square");
                let w = pre.then(&Witness { p: s, q: tm });
                if ord == std::cmp::Ordering::Less {
                    best_buf = cur.to_vec();
                    *best = Some((best_buf.clone(), w));
                    *sampler = Sampler::new();
                }
                sampler.push(w);
            }
        }
    }
}

/// Normal form for upper rank 1: all members share one image line or one row.
fn rank_one_normal_form(v: &MatrixSpace) -> (Witness, MatrixSpace, Vec<Witness>) {
    let (n, p) = v.shape();
    let d = v.dim();
    let image = v.image_sum();
    if image.dim() == 1 {
        // V = y (x) U; send y to e_0 and a basis of U to e_0..e_{d-1}.
        let y = image.basis_bits()[0];
        let mut pinv_cols = vec![y];
        complete_basis(&mut pinv_cols, n);
        let pinv = from_columns(n, &pinv_cols);
        let pm = pinv.inverse().expect("basis");
        let rowspace: Vec<u64> = rref(
            v.basis()
                .iter()
                .flat_map(|m| m.rows().to_vec())
                .map(u64::from),
        );
        let mut b_rows = rowspace.clone();
        complete_basis(&mut b_rows, p);
        let b = Gf2Matrix::from_rows(p, p, &b_rows.iter().map(|&x| x as u8).collect::<Vec<_>>())
            .expect("square");
        let qm = b.inverse().expect("basis");
        let w = Witness { p: pm, q: qm };
        let rep = MatrixSpace::span(
            n,
            p,
            &(0..d)
                .map(|j| Gf2Matrix::unit(n, p, 0, j))
                .collect::<Vec<_>>(),
        )
        .expect("shape");
        let gens = rank_one_aut_generators(n, p, d);
        let winv = w.inverse();
        let auts = gens.iter().map(|g| w.then(g).then(&winv)).collect();
        (w, rep, auts)
    } else {
        let (wt, rep_t, auts_t) = rank_one_normal_form(&v.transpose_space());
        let flip = |w: &Witness| Witness {
            p: w.q.transpose(),
            q: w.p.transpose(),
        };
        (
            flip(&wt),
            rep_t.transpose_space(),
            auts_t.iter().map(flip).collect(),
        )
    }
}

/// Generators of the stabilizer of the space spanned by `E_{0,0}, ..., E_{0,d-1}`.
fn rank_one_aut_generators(n: usize, p: usize, d: usize) -> Vec<Witness> {
    let mut gens = Vec::new();
    let transvection = |k: usize, i: usize, j: usize| {
        let mut m = Gf2Matrix::identity(k);
        m.set(i, j, true);
        m
    };
    // P fixes the line of e_0: its first column is e_0.
    for i in 0..n {
        for j in 1..n {
            if i != j {
                gens.push(Witness {
                    p: transvection(n, i, j),
                    q: Gf2Matrix::identity(p),
                });
            }
        }
    }
    // Q keeps the first d coordinates closed under u -> u Q.
    for i in 0..p {
        for j in 0..p {
            if i != j && !(i < d && j >= d) {
                gens.push(Witness {
                    p: Gf2Matrix::identity(n),
                    q: transvection(p, i, j),
                });
            }
        }
    }
    gens
}

fn complete_basis(vs: &mut Vec<u64>, len: usize) {
    for j in 0..len {
        if vs.len() == len {
            break;
        }
        if reduce(&rref(vs.iter().copied()), 1 << j) != 0 {
            vs.push(1 << j);
        }
    }
}

fn from_columns(n: usize, cols: &[u64]) -> Gf2Matrix {
    let mut m = Gf2Matrix::zeros(n, cols.len());
    for (j, &c) in cols.iter().enumerate() {
        for i in 0..n {
            if (c >> i) & 1 == 1 {
                m.set(i, j, true);
            }
        }
    }
    m
}

/// Canonical form under equivalence, with a witness and automorphism sample.
pub fn canonicalize_equiv(v: &MatrixSpace) -> Result<Canonical> {
    let (n, p) = v.shape();
    check_equiv_shape(n, p)?;
    if v.dim() > 16 {
        return Err(Error::TooLarge {
            what: "space dimension for canonical form",
            max: 16,
            got: v.dim(),
        });
    }
    let elems = v.element_flats();
    let ranks: Vec<u8> = elems.iter().map(|&f| flat_rank(n, p, f) as u8).collect();
    let r = ranks.iter().copied().max().unwrap_or(0) as usize;
    if r == 0 {
        return Ok(Canonical {
            key: CanonicalKey {
                action: Action::Equivalence,
                n: n as u8,
                p: p as u8,
                payload: vec![],
            },
            witness: Witness::identity(n, p),
            automorphisms: vec![],
            aut_order: None,
        });
    }
    if r == 1 {
        let (w, rep, auts) = rank_one_normal_form(v);
        debug_assert_eq!(w.apply(v).ok().as_ref(), Some(&rep));
        return Ok(Canonical {
            key: CanonicalKey {
                action: Action::Equivalence,
                n: n as u8,
                p: p as u8,
                payload: rep.basis_flats().to_vec(),
            },
            witness: w,
            automorphisms: auts,
            aut_order: None,
        });
    }
    let size = StabilizerPlan::size(n, p, r)
        .filter(|&s| s <= MAX_STABILIZER)
        .ok_or(Error::UnsupportedShape {
            what: "equivalence canonical form at this upper rank",
            n,
            p,
        })?;
    let _ = size;
    let plan = StabilizerPlan::get(n, p, r);

    let mut candidates: Vec<u64> = Vec::new();
    let mut best_profile: Option<Vec<u32>> = None;
    for (&e, &re) in elems.iter().zip(&ranks) {
        if re as usize != r {
            continue;
        }
        let prof = member_profile(n, p, &elems, &ranks, e);
        match best_profile.as_ref().map(|b| prof.cmp(b)) {
            None | Some(std::cmp::Ordering::Less) => {
                best_profile = Some(prof);
                candidates.clear();
                candidates.push(e);
            }
            Some(std::cmp::Ordering::Equal) => candidates.push(e),
            Some(std::cmp::Ordering::Greater) => {}
        }
    }

    let mut best: Option<(Vec<u64>, Witness)> = None;
    let mut sampler = Sampler::new();
    for &m in &candidates {
        let (pm, qm) = normalizer(&Gf2Matrix::from_flat(n, p, m));
        let pre = Witness { p: pm, q: qm };
        let normalized = pre.apply(v)?;
        scan_stabilizer(&plan, &normalized.basis(), &pre, &mut best, &mut sampler);
    }
    let (payload, witness) = best.expect("at least one candidate");
    let first_inv = witness.inverse();
    let automorphisms = sampler.items.iter().map(|w| w.then(&first_inv)).collect();
    Ok(Canonical {
        key: CanonicalKey {
            action: Action::Equivalence,
            n: n as u8,
            p: p as u8,
            payload,
        },
        witness,
        automorphisms,
        aut_order: Some(sampler.seen),
    })
}

/// Canonical form under conjugation by `GL_n`, by a full scan of the group.
pub fn canonicalize_sim(v: &MatrixSpace) -> Result<Canonical> {
    let n = v.n();
    if !v.is_square() {
        return Err(Error::NotSquare {
            nrows: v.n(),
            ncols: v.p(),
        });
    }
    if n > 4 {
        return Err(Error::UnsupportedShape {
            what: "similarity canonical form",
            n,
            p: n,
        });
    }
    let d = v.dim();
    let basis = v.basis();
    let mut best: Option<(Vec<u64>, Witness)> = None;
    let mut sampler = Sampler::new();
    let mut buf = [0u64; 64];
    for g in group(n) {
        let ginv = g.inverse().expect("invertible");
        let mut len = 0;
        for b in &basis {
            let f = g.mul(b).expect("square").mul(&ginv).expect("square").flat();
            len = rref_insert(&mut buf, len, f);
        }
        let cur = &buf[..len];
        let w = Witness { p: *g, q: ginv };
        match best.as_ref().map(|(b, _)| cur.cmp(b)) {
            None | Some(std::cmp::Ordering::Less) => {
                best = Some((cur.to_vec(), w));
                sampler = Sampler::new();
                sampler.push(w);
            }
            Some(std::cmp::Ordering::Equal) => sampler.push(w),
            Some(std::cmp::Ordering::Greater) => {}
        }
    }
    let (payload, witness) = best.expect("group is non-empty");
    debug_assert_eq!(payload.len(), d);
    let first_inv = witness.inverse();
    let automorphisms = sampler.items.iter().map(|w| w.then(&first_inv)).collect();
    Ok(Canonical {
        key: CanonicalKey {
            action: Action::Similarity,
            n: n as u8,
            p: n as u8,
            payload,
        },
        witness,
        automorphisms,
        aut_order: Some(sampler.seen),
    })
}

pub fn canonicalize(v: &MatrixSpace, action: Action) -> Result<Canonical> {
    match action {
        Action::Equivalence => canonicalize_equiv(v),
        Action::Similarity => canonicalize_sim(v),
    }
}

pub fn canonical_equiv(v: &MatrixSpace) -> Result<CanonicalKey> {
    Ok(canonicalize_equiv(v)?.key)
}

pub fn canonical_sim(v: &MatrixSpace) -> Result<CanonicalKey> {
    Ok(canonicalize_sim(v)?.key)
}

fn witness_between(v: &MatrixSpace, w: &MatrixSpace, action: Action) -> Result<Option<Witness>> {
    if v.shape() != w.shape() {
        return Err(Error::ShapeMismatch {
            left: format!("{}x{}", v.n(), v.p()),
            right: format!("{}x{}", w.n(), w.p()),
        });
    }
    if v.dim() != w.dim() {
        return Ok(None);
    }
    if v == w {
        return Ok(Some(Witness::identity(v.n(), v.p())));
    }
    let cv = canonicalize(v, action)?;
    let cw = canonicalize(w, action)?;
    if cv.key != cw.key {
        return Ok(None);
    }
    let found = cv.witness.then(&cw.witness.inverse());
    if found.apply(v)? != *w {
        return Err(Error::Precondition(
            "internal error: witness failed re-verification".into(),
        ));
    }
    Ok(Some(found))
}

/// `(P, Q)` with `P V Q = W`, if any.
pub fn are_equivalent(v: &MatrixSpace, w: &MatrixSpace) -> Result<Option<Witness>> {
    witness_between(v, w, Action::Equivalence)
}

/// `(P, P^-1)` with `P V P^-1 = W`, if any.
pub fn are_similar(v: &MatrixSpace, w: &MatrixSpace) -> Result<Option<Witness>> {
    witness_between(v, w, Action::Similarity)
}

fn check_affine_shape(s: &AffineMatrixSpace) -> Result<()> {
    let (n, p) = s.shape();
    if n != p || n > 3 {
        return Err(Error::UnsupportedShape {
            what: "affine equivalence",
            n,
            p,
        });
    }
    Ok(())
}

/// `(P, Q)` with `P S Q = T` as sets, by a scan of `GL_n x GL_n`.
pub fn affine_equivalent(s: &AffineMatrixSpace, t: &AffineMatrixSpace) -> Result<Option<Witness>> {
    check_affine_shape(s)?;
    check_affine_shape(t)?;
    if s.shape() != t.shape() {
        return Err(Error::ShapeMismatch {
            left: format!("{:?}", s.shape()),
            right: format!("{:?}", t.shape()),
        });
    }
    if s.dim() != t.dim() {
        return Ok(None);
    }
    let n = s.shape().0;
    if s == t {
        return Ok(Some(Witness::identity(n, n)));
    }
    let hs = s.translation().basis();
    let ht = t.translation().basis_flats();
    let mut buf = [0u64; 64];
    for pm in group(n) {
        let left: Vec<Gf2Matrix> = hs.iter().map(|h| pm.mul(h).expect("square")).collect();
        let pb = pm.mul(&s.base()).expect("square");
        for qm in group(n) {
            let mut len = 0;
            for l in &left {
                len = rref_insert(&mut buf, len, l.mul(qm).expect("square").flat());
            }
            if &buf[..len] != ht {
                continue;
            }
            let b = pb.mul(qm).expect("square");
            if t.contains(&b) {
                let w = Witness { p: *pm, q: *qm };
                if w.apply_affine(s)? != *t {
                    return Err(Error::Precondition(
                        "internal error: affine witness failed re-verification".into(),
                    ));
                }
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

/// Least `(translation basis, normalized base)` over the orbit of an affine space.
pub fn canonical_affine(s: &AffineMatrixSpace) -> Result<(Vec<u64>, u64)> {
    check_affine_shape(s)?;
    let n = s.shape().0;
    let hs = s.translation().basis();
    let mut best: Option<(Vec<u64>, u64)> = None;
    let mut buf = [0u64; 64];
    for pm in group(n) {
        let left: Vec<Gf2Matrix> = hs.iter().map(|h| pm.mul(h).expect("square")).collect();
        let pb = pm.mul(&s.base()).expect("square");
        for qm in group(n) {
            let mut len = 0;
            for l in &left {
                len = rref_insert(&mut buf, len, l.mul(qm).expect("square").flat());
            }
            let b = reduce(&buf[..len], pb.mul(qm).expect("square").flat());
            let cand = (buf[..len].to_vec(), b);
            if best.as_ref().is_none_or(|cur| cand < *cur) {
                best = Some(cand);
            }
        }
    }
    Ok(best.expect("group is non-empty"))
}

/// Echelon basis to canonical payload.
type KeyMap = HashMap<Vec<u64>, Vec<u64>>;

/// Persistent map from a space's echelon basis to its canonical payload.
///
/// One file per shape and action, holding a header line
/// `f2rank2-cache v1 <n>x<p>` and then `<rref-hex> <canon-hex>` records.
/// Records are appended as they are learned.
pub struct KeyCache {
    dir: Option<PathBuf>,
    maps: Mutex<HashMap<(Action, u8, u8), KeyMap>>,
}

pub const CACHE_HEADER: &str = "f2rank2-cache v1";

impl KeyCache {
    /// A cache that lives only in memory.
    pub fn in_memory() -> Self {
        KeyCache {
            dir: None,
            maps: Mutex::new(HashMap::new()),
        }
    }

    /// A cache persisted under `dir`; existing files are loaded lazily.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        std::fs::create_dir_all(dir.as_ref())?;
        Ok(KeyCache {
            dir: Some(dir.as_ref().to_path_buf()),
            maps: Mutex::new(HashMap::new()),
        })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn file_name(action: Action, n: usize, p: usize) -> String {
        format!("{}-{}x{}.cache", action.as_str(), n, p)
    }

    fn path(&self, action: Action, n: usize, p: usize) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|d| d.join(Self::file_name(action, n, p)))
    }

    fn load(&self, action: Action, n: usize, p: usize) -> Result<HashMap<Vec<u64>, Vec<u64>>> {
        let mut map = HashMap::new();
        let Some(path) = self.path(action, n, p) else {
            return Ok(map);
        };
        if !path.exists() {
            return Ok(map);
        }
        let file = std::fs::File::open(&path)?;
        let mut lines = BufReader::new(file).lines();
        let expected = format!("{CACHE_HEADER} {n}x{p}");
        match lines.next() {
            Some(Ok(h)) if h.trim() == expected => {}
            _ => {
                return Err(Error::Io(format!(
                    "{}: bad or missing cache header",
                    path.display()
                )))
            }
        }
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = || {
                Error::Io(format!(
                    "{}:{}: malformed cache record",
                    path.display(),
                    lineno + 2
                ))
            };
            let (a, b) = line.trim().split_once(' ').ok_or_else(bad)?;
            let raw = MatrixSpace::from_basis_hex(n, p, a).map_err(|_| bad())?;
            let canon = MatrixSpace::from_basis_hex(n, p, b).map_err(|_| bad())?;
            map.insert(raw.basis_flats().to_vec(), canon.basis_flats().to_vec());
        }
        Ok(map)
    }

    pub fn get(&self, action: Action, v: &MatrixSpace) -> Result<Option<CanonicalKey>> {
        let (n, p) = v.shape();
        let mut maps = self.maps.lock().expect("cache poisoned");
        let slot = (action, n as u8, p as u8);
        if let Entry::Vacant(e) = maps.entry(slot) {
            e.insert(self.load(action, n, p)?);
        }
        Ok(maps[&slot]
            .get(v.basis_flats())
            .map(|payload| CanonicalKey {
                action,
                n: n as u8,
                p: p as u8,
                payload: payload.clone(),
            }))
    }

    pub fn insert(&self, v: &MatrixSpace, key: &CanonicalKey) -> Result<()> {
        let (n, p) = v.shape();
        let mut maps = self.maps.lock().expect("cache poisoned");
        let slot = (key.action, n as u8, p as u8);
        if let Entry::Vacant(e) = maps.entry(slot) {
            e.insert(self.load(key.action, n, p)?);
        }
        let map = maps.get_mut(&slot).expect("just inserted");
        if map
            .insert(v.basis_flats().to_vec(), key.payload.clone())
            .is_some()
        {
            return Ok(());
        }
        if let Some(path) = self.path(key.action, n, p) {
            let fresh = !path.exists();
            let mut f = std::fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(&path)?;
            if fresh {
                writeln!(f, "{CACHE_HEADER} {n}x{p}")?;
            }
            writeln!(f, "{} {}", v.basis_hex(), key.payload_hex())?;
        }
        Ok(())
    }

    /// Canonical key through the cache.
    pub fn canonical(&self, v: &MatrixSpace, action: Action) -> Result<CanonicalKey> {
        if let Some(k) = self.get(action, v)? {
            return Ok(k);
        }
        let key = canonicalize(v, action)?.key;
        self.insert(v, &key)?;
        Ok(key)
    }

    /// Number of records held in memory.
    pub fn len(&self) -> usize {
        self.maps
            .lock()
            .expect("cache poisoned")
            .values()
            .map(|m| m.len())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Removes every cache file in the directory.
    pub fn clear(&self) -> Result<usize> {
        self.maps.lock().expect("cache poisoned").clear();
        let Some(dir) = &self.dir else { return Ok(0) };
        let mut removed = 0;
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "cache") {
                std::fs::remove_file(&path)?;
                removed += 1;
            }
        }
        Ok(removed)
    }

    /// `(file name, record count)` for every cache file present.
    pub fn stats(&self) -> Result<Vec<(String, usize)>> {
        let Some(dir) = &self.dir else {
            return Ok(vec![]);
        };
        let mut out = Vec::new();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "cache") {
                let text = std::fs::read_to_string(&path)?;
                let records = text
                    .lines()
                    .skip(1)
                    .filter(|l| !l.trim().is_empty())
                    .count();
                out.push((
                    path.file_name()
                        .unwrap_or_default()
                        .to_string_lossy()
                        .into_owned(),
                    records,
                ));
            }
        }
        out.sort();
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genmatrix::parse_linear;

    fn sp(s: &str) -> MatrixSpace {
        parse_linear(s).unwrap()
    }

    #[test]
    fn normalizer_hits_j_block() {
        for f in 1u64..512 {
            let m = Gf2Matrix::from_flat(3, 3, f);
            let (pm, qm) = normalizer(&m);
            assert_eq!(
                pm.mul(&m).unwrap().mul(&qm).unwrap(),
                Gf2Matrix::j_block(3, 3, m.rank())
            );
        }
    }

    #[test]
    fn stabilizer_sizes() {
        assert_eq!(StabilizerPlan::size(3, 3, 2), Some(96));
        assert_eq!(StabilizerPlan::size(3, 4, 2), Some(2304));
        assert_eq!(StabilizerPlan::size(4, 4, 2), Some(55296));
        let plan = StabilizerPlan::build(3, 4, 2);
        assert_eq!(
            (plan.a_list.len() * plan.lefts.len() * plan.rights.len()) as u64,
            2304
        );
    }

    #[test]
    fn witness_maps_onto_representative() {
        for s in [
            "[0,a,b;a,0,c;b,c,0]",
            "[a,c,d;0,a+b,e;0,0,b]",
            "[a,b,0;0,0,0;0,0,0]",
            "[a,0,0;b,0,0;0,0,0]",
        ] {
            let v = sp(s);
            let c = canonicalize_equiv(&v).unwrap();
            assert_eq!(c.witness.apply(&v).unwrap(), c.key.representative());
            for a in &c.automorphisms {
                assert_eq!(a.apply(&v).unwrap(), v);
            }
        }
    }

    #[test]
    fn similarity_separates_trace() {
        let t2 = sp("[a,b,a;a,a,c;0,a,a]");
        let t3 = sp("[a,b,a;a,0,c;0,a,a]");
        assert!(are_equivalent(&t2, &t3).unwrap().is_some());
        assert!(are_similar(&t2, &t3).unwrap().is_none());
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let v = sp("[0,a,b;a,0,c;b,c,0]");
        let key = {
            let cache = KeyCache::open(dir.path()).unwrap();
            cache.canonical(&v, Action::Equivalence).unwrap()
        };
        let cache = KeyCache::open(dir.path()).unwrap();
        assert_eq!(cache.get(Action::Equivalence, &v).unwrap(), Some(key));
        let text = std::fs::read_to_string(dir.path().join("equiv-3x3.cache")).unwrap();
        assert!(text.starts_with("f2rank2-cache v1 3x3\n"));
    }
}
