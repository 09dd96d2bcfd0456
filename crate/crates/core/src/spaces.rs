//! Linear and affine subspaces of `Mat_{n,p}(F_2)`.
//!
//! A matrix is flattened row-major: bit `i*p + j` holds entry `(i, j)`.
//! Bases are kept in reduced row echelon form, where the pivot of a vector
//! is its lowest set bit and vectors are ordered by increasing pivot. This
//! makes the basis a canonical description of the subspace.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::gf2::{Gf2Matrix, Gf2Vector};

/// Inserts `v` into an echelon basis held in `buf[..len]`; returns the new length.
#[inline]
pub(crate) fn rref_insert(buf: &mut [u64], len: usize, mut v: u64) -> usize {
    for &b in &buf[..len] {
        if v & b & b.wrapping_neg() != 0 {
            v ^= b;
        }
    }
    if v == 0 {
        return len;
    }
    let piv = v & v.wrapping_neg();
    for b in &mut buf[..len] {
        if *b & piv != 0 {
            *b ^= v;
        }
    }
    // Keep the buffer sorted by pivot.
    let mut k = len;
    while k > 0 && (buf[k - 1] & buf[k - 1].wrapping_neg()) > piv {
        buf[k] = buf[k - 1];
        k -= 1;
    }
    buf[k] = v;
    len + 1
}

/// Echelon basis of the span of `vectors`.
pub(crate) fn rref<I: IntoIterator<Item = u64>>(vectors: I) -> Vec<u64> {
    let mut buf: Vec<u64> = Vec::new();
    for v in vectors {
        buf.push(0);
        let len = buf.len() - 1;
        let new_len = rref_insert(&mut buf, len, v);
        buf.truncate(new_len);
    }
    buf
}

/// Reduces `v` modulo an echelon basis; the result has zeros at every pivot.
#[inline]
pub(crate) fn reduce(basis: &[u64], mut v: u64) -> u64 {
    for &b in basis {
        if v & b & b.wrapping_neg() != 0 {
            v ^= b;
        }
    }
    v
}

/// All `2^d` combinations of `basis`, in counter order.
pub(crate) fn span_elements(basis: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; 1usize << basis.len()];
    for c in 1..out.len() {
        out[c] = out[c & (c - 1)] ^ basis[c.trailing_zeros() as usize];
    }
    out
}

/// Basis of `{x : r.x = 0 for every r}` for row vectors of length `len`.
pub(crate) fn nullspace(rows: &[u64], len: usize) -> Vec<u64> {
    let r = rref(rows.iter().copied());
    let pivots: u64 = r.iter().fold(0, |acc, &b| acc | (b & b.wrapping_neg()));
    let mut out = Vec::new();
    for f in (0..len).filter(|&f| (pivots >> f) & 1 == 0) {
        let mut x = 1u64 << f;
        for &b in &r {
            if (b >> f) & 1 == 1 {
                x |= b & b.wrapping_neg();
            }
        }
        out.push(x);
    }
    rref(out)
}

/// Echelon bases of every subspace of the span of `basis`, by increasing dimension.
pub(crate) fn subspaces_of(basis: &[u64]) -> Vec<Vec<u64>> {
    use std::collections::BTreeSet;
    let elems = span_elements(basis);
    let mut all: Vec<Vec<u64>> = vec![Vec::new()];
    let mut level: BTreeSet<Vec<u64>> = BTreeSet::new();
    level.insert(Vec::new());
    for _ in 0..basis.len() {
        let mut next = BTreeSet::new();
        for b in &level {
            for &v in &elems[1..] {
                if reduce(b, v) != 0 {
                    next.insert(rref(b.iter().copied().chain([v])));
                }
            }
        }
        all.extend(next.iter().cloned());
        level = next;
    }
    all
}

/// Rank of a flattened `n x p` matrix.
#[inline]
pub fn flat_rank(n: usize, p: usize, flat: u64) -> usize {
    if let Some(t) = rank_table(n, p) {
        return t[flat as usize] as usize;
    }
    Gf2Matrix::from_flat(n, p, flat).rank()
}

/// Rank lookup for every flattened matrix, available when `n*p <= 16`.
pub fn rank_table(n: usize, p: usize) -> Option<&'static [u8]> {
    static TABLES: [OnceLock<Vec<u8>>; 81] = [const { OnceLock::new() }; 81];
    if n * p > 16 || n > 8 || p > 8 {
        return None;
    }
    Some(TABLES[n * 9 + p].get_or_init(|| {
        (0..1u64 << (n * p))
            .map(|f| Gf2Matrix::from_flat(n, p, f).rank() as u8)
            .collect()
    }))
}

/// A linear subspace of `F_2^len`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct VectorSpaceF2 {
    len: u8,
    basis: Vec<u64>,
}

impl VectorSpaceF2 {
    pub fn zero(len: usize) -> Self {
        VectorSpaceF2 {
            len: len as u8,
            basis: Vec::new(),
        }
    }

    pub fn full(len: usize) -> Self {
        Self::from_bits(len, (0..len).map(|i| 1u64 << i))
    }

    pub fn span(len: usize, vectors: &[Gf2Vector]) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != len) {
            return Err(Error::ShapeMismatch {
                left: format!("length {len}"),
                right: format!("length {}", v.len()),
            });
        }
        Ok(Self::from_bits(len, vectors.iter().map(|v| v.bits())))
    }

    pub(crate) fn from_bits<I: IntoIterator<Item = u64>>(len: usize, vectors: I) -> Self {
        VectorSpaceF2 {
            len: len as u8,
            basis: rref(vectors),
        }
    }

    /// Length of the ambient vectors.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.len()
    }

    pub fn basis_bits(&self) -> &[u64] {
        &self.basis
    }

    pub fn basis(&self) -> Vec<Gf2Vector> {
        self.basis
            .iter()
            .map(|&b| Gf2Vector::new(self.len(), b).expect("in range"))
            .collect()
    }

    pub fn contains(&self, v: &Gf2Vector) -> bool {
        v.len() == self.len() && reduce(&self.basis, v.bits()) == 0
    }

    pub fn elements(&self) -> impl Iterator<Item = Gf2Vector> + '_ {
        span_elements(&self.basis)
            .into_iter()
            .map(|b| Gf2Vector::new(self.len(), b).expect("in range"))
    }
}

/// A linear subspace of `Mat_{n,p}(F_2)` with a canonical echelon basis.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatrixSpace {
    n: u8,
    p: u8,
    basis: Vec<u64>,
}

impl MatrixSpace {
    pub fn zero(n: usize, p: usize) -> Self {
        Gf2Matrix::zeros(n, p);
        MatrixSpace {
            n: n as u8,
            p: p as u8,
            basis: Vec::new(),
        }
    }

    /// The whole of `Mat_{n,p}(F_2)`.
    pub fn full(n: usize, p: usize) -> Self {
        Self::from_flats(n, p, (0..n * p).map(|k| 1u64 << k))
    }

    pub fn span(n: usize, p: usize, generators: &[Gf2Matrix]) -> Result<Self> {
        Gf2Matrix::zeros(n, p);
        if let Some(g) = generators.iter().find(|g| g.shape() != (n, p)) {
            return Err(Error::ShapeMismatch {
                left: format!("{n}x{p}"),
                right: format!("{}x{}", g.nrows(), g.ncols()),
            });
        }
        Ok(Self::from_flats(n, p, generators.iter().map(|g| g.flat())))
    }

    /// Span of a non-empty list of same-shape matrices.
    pub fn span_of(generators: &[Gf2Matrix]) -> Result<Self> {
        let first = generators.first().ok_or(Error::Precondition(
            "empty generator list has no shape".into(),
        ))?;
        Self::span(first.nrows(), first.ncols(), generators)
    }

    pub(crate) fn from_flats<I: IntoIterator<Item = u64>>(n: usize, p: usize, flats: I) -> Self {
        MatrixSpace {
            n: n as u8,
            p: p as u8,
            basis: rref(flats),
        }
    }

    /// Wraps a basis already in echelon form.
    pub(crate) fn from_rref_unchecked(n: usize, p: usize, basis: Vec<u64>) -> Self {
        debug_assert_eq!(rref(basis.iter().copied()), basis);
        MatrixSpace {
            n: n as u8,
            p: p as u8,
            basis,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p as usize
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n(), self.p())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_square(&self) -> bool {
        self.n == self.p
    }

    /// Echelon basis as flattened matrices.
    #[inline]
    pub fn basis_flats(&self) -> &[u64] {
        &self.basis
    }

    pub fn basis(&self) -> Vec<Gf2Matrix> {
        self.basis.iter().map(|&f| self.matrix(f)).collect()
    }

    pub fn basis_vectors(&self) -> Vec<Gf2Vector> {
        self.basis
            .iter()
            .map(|&f| Gf2Vector::new(self.n() * self.p(), f).expect("in range"))
            .collect()
    }

    #[inline]
    pub(crate) fn matrix(&self, flat: u64) -> Gf2Matrix {
        Gf2Matrix::from_flat(self.n(), self.p(), flat)
    }

    pub fn contains(&self, m: &Gf2Matrix) -> bool {
        m.shape() == self.shape() && reduce(&self.basis, m.flat()) == 0
    }

    pub(crate) fn contains_flat(&self, f: u64) -> bool {
        reduce(&self.basis, f) == 0
    }

    pub fn is_subspace_of(&self, other: &MatrixSpace) -> bool {
        self.shape() == other.shape() && self.basis.iter().all(|&b| other.contains_flat(b))
    }

    /// Flattened elements in counter order.
    pub fn element_flats(&self) -> Vec<u64> {
        span_elements(&self.basis)
    }

    pub fn elements(&self) -> impl Iterator<Item = Gf2Matrix> + '_ {
        self.element_flats().into_iter().map(|f| self.matrix(f))
    }

    /// Ranks of all elements, in the order of [`MatrixSpace::element_flats`].
    pub fn element_ranks(&self) -> Vec<u8> {
        let (n, p) = self.shape();
        let elems = self.element_flats();
        match rank_table(n, p) {
            Some(t) => elems.iter().map(|&f| t[f as usize]).collect(),
            None => elems.iter().map(|&f| flat_rank(n, p, f) as u8).collect(),
        }
    }

    /// `hist[k]` counts elements of rank `k`.
    pub fn rank_histogram(&self) -> Vec<usize> {
        let mut hist = vec![0usize; self.n().min(self.p()) + 1];
        for r in self.element_ranks() {
            hist[r as usize] += 1;
        }
        hist
    }

    pub fn sum(&self, other: &MatrixSpace) -> Result<MatrixSpace> {
        self.same_shape(other)?;
        Ok(Self::from_flats(
            self.n(),
            self.p(),
            self.basis.iter().chain(&other.basis).copied(),
        ))
    }

    pub fn with(&self, m: &Gf2Matrix) -> Result<MatrixSpace> {
        if m.shape() != self.shape() {
            return Err(Error::ShapeMismatch {
                left: shape_str(self),
                right: format!("{}x{}", m.nrows(), m.ncols()),
            });
        }
        Ok(Self::from_flats(
            self.n(),
            self.p(),
            self.basis.iter().copied().chain([m.flat()]),
        ))
    }

    pub fn intersection(&self, other: &MatrixSpace) -> Result<MatrixSpace> {
        self.same_shape(other)?;
        // Intersection is the annihilator of the sum of annihilators.
        let np = self.n() * self.p();
        let mut ann = nullspace(&self.basis, np);
        ann.extend(nullspace(&other.basis, np));
        Ok(Self::from_flats(self.n(), self.p(), nullspace(&ann, np)))
    }

    fn same_shape(&self, other: &MatrixSpace) -> Result<()> {
        if self.shape() == other.shape() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                left: shape_str(self),
                right: shape_str(other),
            })
        }
    }

    /// `{P M Q : M in V}`.
    pub fn transform(&self, p_mat: &Gf2Matrix, q_mat: &Gf2Matrix) -> Result<MatrixSpace> {
        if p_mat.shape() != (self.n(), self.n()) || q_mat.shape() != (self.p(), self.p()) {
            return Err(Error::ShapeMismatch {
                left: shape_str(self),
                right: format!(
                    "P {}x{}, Q {}x{}",
                    p_mat.nrows(),
                    p_mat.ncols(),
                    q_mat.nrows(),
                    q_mat.ncols()
                ),
            });
        }
        let flats = self
            .basis()
            .into_iter()
            .map(|m| p_mat.mul(&m).and_then(|x| x.mul(q_mat)).map(|x| x.flat()));
        Ok(Self::from_flats(
            self.n(),
            self.p(),
            flats.collect::<Result<Vec<_>>>()?,
        ))
    }

    /// `{P M P^-1 : M in V}`.
    pub fn conjugate(&self, p_mat: &Gf2Matrix) -> Result<MatrixSpace> {
        let inv = p_mat
            .inverse()
            .ok_or(Error::Precondition("conjugating matrix is singular".into()))?;
        self.transform(p_mat, &inv)
    }

    pub fn transpose_space(&self) -> MatrixSpace {
        let (n, p) = self.shape();
        Self::from_flats(p, n, self.basis().iter().map(|m| m.transpose().flat()))
    }

    /// Intersection of the kernels of all members.
    pub fn common_kernel(&self) -> VectorSpaceF2 {
        let rows: Vec<u64> = self
            .basis()
            .iter()
            .flat_map(|m| m.rows().to_vec())
            .map(u64::from)
            .collect();
        VectorSpaceF2 {
            len: self.p,
            basis: nullspace(&rows, self.p()),
        }
    }

    /// Sum of the column spaces of all members.
    pub fn image_sum(&self) -> VectorSpaceF2 {
        let cols = self
            .basis()
            .into_iter()
            .flat_map(|m| (0..m.ncols()).map(move |j| m.column(j).bits()));
        VectorSpaceF2::from_bits(self.n(), cols)
    }

    /// Span of `{M x : M in V}`.
    pub fn evaluation_image(&self, x: &Gf2Vector) -> Result<VectorSpaceF2> {
        if x.len() != self.p() {
            return Err(Error::ShapeMismatch {
                left: shape_str(self),
                right: format!("vector of length {}", x.len()),
            });
        }
        let images = self
            .basis()
            .iter()
            .map(|m| m.apply(x).map(|v| v.bits()))
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorSpaceF2::from_bits(self.n(), images))
    }

    pub fn is_reduced(&self) -> bool {
        self.common_kernel().is_zero() && self.image_sum().is_full()
    }

    /// The induced space of operators from a complement of the common kernel to the image sum.
    ///
    /// The complement is spanned by the standard basis vectors at the non-pivot positions of the
    /// kernel's echelon basis; image coordinates are read off the image's echelon basis.
    pub fn reduced_space(&self) -> Result<MatrixSpace> {
        if self.is_zero() {
            return Err(Error::Precondition(
                "the zero space has no reduced form".into(),
            ));
        }
        let kernel = self.common_kernel();
        let image = self.image_sum();
        let kernel_pivots: u64 = kernel
            .basis
            .iter()
            .fold(0, |a, &b| a | (b & b.wrapping_neg()));
        let kept: Vec<usize> = (0..self.p())
            .filter(|&j| (kernel_pivots >> j) & 1 == 0)
            .collect();
        let (n2, p2) = (image.dim(), kept.len());
        let flats = self.basis().into_iter().map(|m| {
            let mut r = Gf2Matrix::zeros(n2, p2);
            for (jj, &j) in kept.iter().enumerate() {
                let col = m.column(j).bits();
                for (k, &b) in image.basis.iter().enumerate() {
                    if col & b & b.wrapping_neg() != 0 {
                        r.set(k, jj, true);
                    }
                }
            }
            r.flat()
        });
        Ok(Self::from_flats(n2, p2, flats.collect::<Vec<_>>()))
    }

    /// Zero-pads every member to `n x p`.
    pub fn tilde_embed(&self, n: usize, p: usize) -> Result<MatrixSpace> {
        if n < self.n() || p < self.p() || n > 8 || p > 8 {
            return Err(Error::ShapeMismatch {
                left: shape_str(self),
                right: format!("target {n}x{p}"),
            });
        }
        let flats = self.basis().into_iter().map(|m| {
            let mut big = Gf2Matrix::zeros(n, p);
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    big.set(i, j, m.get(i, j));
                }
            }
            big.flat()
        });
        Ok(Self::from_flats(n, p, flats.collect::<Vec<_>>()))
    }

    /// Operators `x -> [A_1 x | ... | A_m x]` for the echelon basis `(A_1, ..., A_m)`.
    pub fn dual_space(&self) -> Result<MatrixSpace> {
        if !self.is_reduced() {
            return Err(Error::Precondition(
                "dual space is defined for reduced spaces only".into(),
            ));
        }
        let basis = self.basis();
        let m = basis.len();
        if m > 8 {
            return Err(Error::TooLarge {
                what: "dual space dimension",
                max: 8,
                got: m,
            });
        }
        let flats = (0..self.p()).map(|j| {
            let mut d = Gf2Matrix::zeros(self.n(), m);
            for (k, a) in basis.iter().enumerate() {
                let col = a.column(j);
                for i in 0..self.n() {
                    if col.get(i) {
                        d.set(i, k, true);
                    }
                }
            }
            d.flat()
        });
        Ok(Self::from_flats(self.n(), m, flats.collect::<Vec<_>>()))
    }

    /// Block upper-triangular join with `self` and `other` on the diagonal and a free corner block.
    pub fn vee_join(&self, other: &MatrixSpace) -> Result<MatrixSpace> {
        if !self.is_square() || !other.is_square() {
            return Err(Error::NotSquare {
                nrows: self.n(),
                ncols: other.p(),
            });
        }
        let (a, b) = (self.n(), other.n());
        let n = a + b;
        if n > 8 {
            return Err(Error::TooLarge {
                what: "vee join size",
                max: 8,
                got: n,
            });
        }
        let mut flats = Vec::new();
        for m in self.basis() {
            let mut big = Gf2Matrix::zeros(n, n);
            for i in 0..a {
                for j in 0..a {
                    big.set(i, j, m.get(i, j));
                }
            }
            flats.push(big.flat());
        }
        for m in other.basis() {
            let mut big = Gf2Matrix::zeros(n, n);
            for i in 0..b {
                for j in 0..b {
                    big.set(a + i, a + j, m.get(i, j));
                }
            }
            flats.push(big.flat());
        }
        for i in 0..a {
            for j in a..n {
                flats.push(Gf2Matrix::unit(n, n, i, j).flat());
            }
        }
        Ok(Self::from_flats(n, n, flats))
    }

    /// Restriction of every member to the subspace spanned by `cols`, written in that basis.
    pub fn restrict_columns(&self, cols: &[Gf2Vector]) -> MatrixSpace {
        let flats = self.basis().into_iter().map(|m| {
            let mut r = Gf2Matrix::zeros(self.n(), cols.len().max(1));
            for (jj, c) in cols.iter().enumerate() {
                let img = m.apply(c).expect("length checked by caller");
                for i in 0..self.n() {
                    r.set(i, jj, img.get(i));
                }
            }
            r.flat()
        });
        Self::from_flats(self.n(), cols.len().max(1), flats.collect::<Vec<_>>())
    }

    /// Every linear subspace of this space.
    pub fn subspaces(&self) -> Result<Vec<MatrixSpace>> {
        if self.dim() > 6 {
            return Err(Error::TooLarge {
                what: "subspace lattice dimension",
                max: 6,
                got: self.dim(),
            });
        }
        Ok(subspaces_of(&self.basis)
            .into_iter()
            .map(|b| MatrixSpace {
                n: self.n,
                p: self.p,
                basis: b,
            })
            .collect())
    }

    /// The subspaces of codimension one.
    pub fn hyperplanes(&self) -> Vec<MatrixSpace> {
        let d = self.dim();
        (1u64..1 << d)
            .map(|c| {
                let coords = nullspace(&[c], d);
                let flats = coords.iter().map(|&a| {
                    (0..d)
                        .filter(|&k| (a >> k) & 1 == 1)
                        .fold(0u64, |acc, k| acc ^ self.basis[k])
                });
                Self::from_flats(self.n(), self.p(), flats.collect::<Vec<_>>())
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return format!("span:{}x{}", self.n, self.p);
        }
        let parts: Vec<String> = self.basis().iter().map(|m| m.to_hex()).collect();
        format!("span:{}", parts.join("|"))
    }

    /// Hex digits of the basis matrices joined by `.`, or `-` for the zero space.
    pub fn basis_hex(&self) -> String {
        if self.is_zero() {
            return "-".into();
        }
        self.basis()
            .iter()
            .map(|m| m.hex_digits())
            .collect::<Vec<_>>()
            .join(".")
    }

    pub fn from_basis_hex(n: usize, p: usize, s: &str) -> Result<Self> {
        if s == "-" {
            return Ok(Self::zero(n, p));
        }
        let ms = s
            .split('.')
            .map(|d| Gf2Matrix::from_hex_digits(n, p, d))
            .collect::<Result<Vec<_>>>()?;
        Self::span(n, p, &ms)
    }
}

fn shape_str(v: &MatrixSpace) -> String {
    format!("{}x{}", v.n, v.p)
}

impl fmt::Debug for MatrixSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "MatrixSpace({}x{}, dim {}, [",
            self.n,
            self.p,
            self.dim()
        )?;
        for (k, m) in self.basis().iter().enumerate() {
            if k > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("])")
    }
}

impl fmt::Display for MatrixSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn parse_hex_list(body: &str, offset: usize) -> Result<Vec<Gf2Matrix>> {
    let mut pos = offset;
    let mut out = Vec::new();
    for part in body.split('|') {
        let m = Gf2Matrix::from_hex(part.trim()).map_err(|e| match e {
            Error::Parse { pos: p, msg } => Error::Parse { pos: pos + p, msg },
            other => other,
        })?;
        out.push(m);
        pos += part.len() + 1;
    }
    Ok(out)
}

fn parse_shape(s: &str, offset: usize) -> Result<(usize, usize)> {
    let bad = || Error::Parse {
        pos: offset,
        msg: format!("expected a shape like 3x3, got `{s}`"),
    };
    let (a, b) = s.split_once('x').ok_or_else(bad)?;
    let n = a.trim().parse().map_err(|_| bad())?;
    let p = b.trim().parse().map_err(|_| bad())?;
    Gf2Matrix::from_rows(n, p, &vec![0; n]).map_err(|_| bad())?;
    Ok((n, p))
}

impl FromStr for MatrixSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let body = s.strip_prefix("span:").ok_or(Error::Parse {
            pos: 0,
            msg: "expected `span:` prefix".into(),
        })?;
        if !body.contains(':') {
            let (n, p) = parse_shape(body, 5)?;
            return Ok(Self::zero(n, p));
        }
        let ms = parse_hex_list(body, 5)?;
        Self::span_of(&ms)
    }
}

/// `base + translation`, with `base` normalized to the least member of the set.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineMatrixSpace {
    base: Gf2Matrix,
    translation: MatrixSpace,
}

impl AffineMatrixSpace {
    pub fn new(base: Gf2Matrix, translation: MatrixSpace) -> Result<Self> {
        if base.shape() != translation.shape() {
            return Err(Error::ShapeMismatch {
                left: format!("{}x{}", base.nrows(), base.ncols()),
                right: shape_str(&translation),
            });
        }
        // Zeros at every pivot make this the least member in row-major reading order.
        let reduced = reduce(&translation.basis, base.flat());
        Ok(AffineMatrixSpace {
            base: translation.matrix(reduced),
            translation,
        })
    }

    pub fn linear(space: MatrixSpace) -> Self {
        let base = Gf2Matrix::zeros(space.n(), space.p());
        AffineMatrixSpace {
            base,
            translation: space,
        }
    }

    pub fn base(&self) -> Gf2Matrix {
        self.base
    }

    pub fn translation(&self) -> &MatrixSpace {
        &self.translation
    }

    pub fn into_translation(self) -> MatrixSpace {
        self.translation
    }

    pub fn is_linear(&self) -> bool {
        self.base.is_zero()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.translation.shape()
    }

    pub fn dim(&self) -> usize {
        self.translation.dim()
    }

    pub fn contains(&self, m: &Gf2Matrix) -> bool {
        m.shape() == self.shape() && self.translation.contains_flat(m.flat() ^ self.base.flat())
    }

    pub fn elements(&self) -> impl Iterator<Item = Gf2Matrix> + '_ {
        let b = self.base.flat();
        self.translation
            .element_flats()
            .into_iter()
            .map(move |f| self.translation.matrix(f ^ b))
    }

    /// `{P M Q : M in S}`.
    pub fn transform(&self, p_mat: &Gf2Matrix, q_mat: &Gf2Matrix) -> Result<Self> {
        let t = self.translation.transform(p_mat, q_mat)?;
        let b = p_mat.mul(&self.base)?.mul(q_mat)?;
        Self::new(b, t)
    }

    pub fn to_text(&self) -> String {
        let mut parts = vec![self.base.to_hex()];
        parts.extend(self.translation.basis().iter().map(|m| m.to_hex()));
        format!("affine:{}", parts.join("|"))
    }
}

impl fmt::Debug for AffineMatrixSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Affine({} + {:?})", self.base, self.translation)
    }
}

impl fmt::Display for AffineMatrixSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for AffineMatrixSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with("span:") {
            return Ok(Self::linear(s.parse()?));
        }
        let body = s.strip_prefix("affine:").ok_or(Error::Parse {
            pos: 0,
            msg: "expected `affine:` or `span:` prefix".into(),
        })?;
        let ms = parse_hex_list(body, 7)?;
        let (base, rest) = ms.split_first().expect("split yields at least one part");
        let t = MatrixSpace::span(base.nrows(), base.ncols(), rest)?;
        Self::new(*base, t)
    }
}

/// Checks `det(A) D = B adj(A) C` for the split `M = [[A, C], [B, D]]` with `A` of size 2x2.
pub fn block_identity_check(m: &Gf2Matrix) -> Result<bool> {
    let (n, p) = m.shape();
    if n < 3 || p < 3 {
        return Err(Error::UnsupportedShape {
            what: "block identity",
            n,
            p,
        });
    }
    let a = m.block(0, 0, 2, 2);
    let c = m.block(0, 2, 2, p - 2);
    let b = m.block(2, 0, n - 2, 2);
    let d = m.block(2, 2, n - 2, p - 2);
    let lhs = if a.det()? {
        d
    } else {
        Gf2Matrix::zeros(n - 2, p - 2)
    };
    let rhs = b.mul(&a.adjugate()?)?.mul(&c)?;
    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(s: &str) -> Gf2Matrix {
        s.parse().unwrap()
    }

    #[test]
    fn rref_is_canonical() {
        let a = rref([0b110, 0b011, 0b101]);
        let b = rref([0b101, 0b110]);
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        for w in a.windows(2) {
            assert!(w[0].trailing_zeros() < w[1].trailing_zeros());
        }
    }

    #[test]
    fn kernel_and_image_of_j2() {
        let v = MatrixSpace::span(3, 3, &[Gf2Matrix::j_block(3, 3, 2)]).unwrap();
        assert_eq!(v.common_kernel(), VectorSpaceF2::from_bits(3, [0b100]));
        assert_eq!(v.image_sum(), VectorSpaceF2::from_bits(3, [0b001, 0b010]));
        assert!(!v.is_reduced());
        let r = v.reduced_space().unwrap();
        assert_eq!(r.shape(), (2, 2));
        assert_eq!(r.dim(), 1);
    }

    #[test]
    fn intersection_and_sum() {
        let a = MatrixSpace::span(2, 2, &[m("1,0;0,0"), m("0,1;0,0")]).unwrap();
        let b = MatrixSpace::span(2, 2, &[m("1,1;0,0"), m("0,0;1,0")]).unwrap();
        assert_eq!(
            a.intersection(&b).unwrap(),
            MatrixSpace::span(2, 2, &[m("1,1;0,0")]).unwrap()
        );
        assert_eq!(a.sum(&b).unwrap().dim(), 3);
    }

    #[test]
    fn vee_join_small() {
        let z1 = MatrixSpace::zero(1, 1);
        let z2 = MatrixSpace::zero(2, 2);
        let j = z1.vee_join(&z2).unwrap();
        assert_eq!(j.dim(), 2);
        assert!(j.contains(&m("0,1,1;0,0,0;0,0,0")));
    }

    #[test]
    fn text_forms() {
        let v = MatrixSpace::span(3, 3, &[m("1,0,0;0,1,0;0,0,0"), m("0,1,0;0,0,1;0,0,0")]).unwrap();
        let back: MatrixSpace = v.to_text().parse().unwrap();
        assert_eq!(back, v);
        let z: MatrixSpace = "span:2x4".parse().unwrap();
        assert_eq!(z, MatrixSpace::zero(2, 4));
        assert_eq!(
            MatrixSpace::from_basis_hex(3, 3, &v.basis_hex()).unwrap(),
            v
        );
        let a = AffineMatrixSpace::new(Gf2Matrix::identity(3), v.clone()).unwrap();
        let back: AffineMatrixSpace = a.to_text().parse().unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn affine_base_is_least_member() {
        let t = MatrixSpace::span(2, 2, &[m("1,1;0,0"), m("0,1;1,0")]).unwrap();
        let a = AffineMatrixSpace::new(m("1,1;1,1"), t).unwrap();
        let least = a.elements().min_by_key(|x| x.to_string()).unwrap();
        assert_eq!(a.base(), least);
    }
}
