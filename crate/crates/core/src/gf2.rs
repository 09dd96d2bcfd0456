//! Dense linear algebra over GF(2) for small matrices.
//!
//! A matrix stores one byte per row; bit `j` of row `i` is the entry in
//! column `j`. Row operations are single XORs.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest supported side length.
pub const MAX_SIDE: usize = 8;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gf2Matrix {
    nrows: u8,
    ncols: u8,
    rows: [u8; MAX_SIDE],
}

fn check_shape(nrows: usize, ncols: usize) -> Result<()> {
    if (1..=MAX_SIDE).contains(&nrows) && (1..=MAX_SIDE).contains(&ncols) {
        Ok(())
    } else {
        Err(Error::BadShape { nrows, ncols })
    }
}

#[inline]
pub(crate) fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

impl Gf2Matrix {
    /// The zero matrix. Panics if a side is outside `1..=8`.
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        check_shape(nrows, ncols).expect("matrix shape");
        Gf2Matrix {
            nrows: nrows as u8,
            ncols: ncols as u8,
            rows: [0; MAX_SIDE],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.rows[i] = 1 << i;
        }
        m
    }

    /// `J_r`: the identity block of size `r` padded with zeros.
    pub fn j_block(nrows: usize, ncols: usize, r: usize) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        for i in 0..r.min(nrows).min(ncols) {
            m.rows[i] = 1 << i;
        }
        m
    }

    /// Elementary matrix with a single one at `(i, j)`.
    pub fn unit(nrows: usize, ncols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        m.set(i, j, true);
        m
    }

    pub fn from_rows(nrows: usize, ncols: usize, rows: &[u8]) -> Result<Self> {
        check_shape(nrows, ncols)?;
        if rows.len() != nrows {
            return Err(Error::Precondition(format!(
                "expected {nrows} rows, got {}",
                rows.len()
            )));
        }
        let mask = low_mask(ncols) as u8;
        let mut m = Self::zeros(nrows, ncols);
        for (i, &r) in rows.iter().enumerate() {
            if r & !mask != 0 {
                return Err(Error::Precondition(format!(
                    "row {i} has bits beyond column {ncols}"
                )));
            }
            m.rows[i] = r;
        }
        Ok(m)
    }

    /// Builds from a row-major 0/1 table.
    pub fn from_bits(table: &[&[u8]]) -> Result<Self> {
        let nrows = table.len();
        let ncols = table.first().map_or(0, |r| r.len());
        check_shape(nrows, ncols)?;
        let mut m = Self::zeros(nrows, ncols);
        for (i, row) in table.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::Precondition("ragged row table".into()));
            }
            for (j, &b) in row.iter().enumerate() {
                m.set(i, j, b & 1 == 1);
            }
        }
        Ok(m)
    }

    /// Unpacks the row-major flattening used by matrix spaces: bit `i*p + j` is entry `(i, j)`.
    pub fn from_flat(nrows: usize, ncols: usize, flat: u64) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        let mask = low_mask(ncols);
        for i in 0..nrows {
            m.rows[i] = ((flat >> (i * ncols)) & mask) as u8;
        }
        m
    }

    pub fn flat(&self) -> u64 {
        let p = self.ncols as usize;
        self.rows()
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &r)| acc | (u64::from(r) << (i * p)))
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows as usize
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols as usize
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows(), self.ncols())
    }

    #[inline]
    pub fn rows(&self) -> &[u8] {
        &self.rows[..self.nrows as usize]
    }

    #[inline]
    pub fn row(&self, i: usize) -> u8 {
        self.rows[i]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.rows[i] >> j) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        assert!(
            i < self.nrows() && j < self.ncols(),
            "entry ({i},{j}) out of range"
        );
        if v {
            self.rows[i] |= 1 << j;
        } else {
            self.rows[i] &= !(1 << j);
        }
    }

    pub fn column(&self, j: usize) -> Gf2Vector {
        let bits = self
            .rows()
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &r)| acc | (u64::from((r >> j) & 1) << i));
        Gf2Vector {
            len: self.nrows,
            bits,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rows().iter().all(|&r| r == 0)
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.ncols(), self.nrows());
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                if self.get(i, j) {
                    t.rows[j] |= 1 << i;
                }
            }
        }
        t
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(mismatch(self, other));
        }
        let mut m = *self;
        for i in 0..self.nrows() {
            m.rows[i] ^= other.rows[i];
        }
        Ok(m)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(mismatch(self, other));
        }
        let mut m = Self::zeros(self.nrows(), other.ncols());
        for i in 0..self.nrows() {
            m.rows[i] = combine_rows(other.rows(), self.rows[i]);
        }
        Ok(m)
    }

    /// Image of a column vector.
    pub fn apply(&self, x: &Gf2Vector) -> Result<Gf2Vector> {
        if x.len() != self.ncols() {
            return Err(Error::ShapeMismatch {
                left: format!("{}x{}", self.nrows, self.ncols),
                right: format!("vector of length {}", x.len()),
            });
        }
        let bits = self.rows().iter().enumerate().fold(0u64, |acc, (i, &r)| {
            acc | (u64::from((u64::from(r) & x.bits).count_ones() & 1) << i)
        });
        Ok(Gf2Vector {
            len: self.nrows,
            bits,
        })
    }

    pub fn rank(&self) -> usize {
        rank_of_rows(self.rows())
    }

    pub fn det(&self) -> Result<bool> {
        self.require_square()?;
        Ok(self.rank() == self.nrows())
    }

    pub fn trace(&self) -> Result<bool> {
        self.require_square()?;
        Ok((0..self.nrows()).filter(|&i| self.get(i, i)).count() % 2 == 1)
    }

    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let n = self.nrows();
        let mut a = self.rows;
        let mut inv = Self::identity(n).rows;
        for c in 0..n {
            let piv = (c..n).find(|&r| (a[r] >> c) & 1 == 1)?;
            a.swap(c, piv);
            inv.swap(c, piv);
            for r in 0..n {
                if r != c && (a[r] >> c) & 1 == 1 {
                    a[r] ^= a[c];
                    inv[r] ^= inv[c];
                }
            }
        }
        Some(Gf2Matrix {
            nrows: self.nrows,
            ncols: self.ncols,
            rows: inv,
        })
    }

    /// Transpose of the cofactor matrix.
    pub fn adjugate(&self) -> Result<Self> {
        self.require_square()?;
        let n = self.nrows();
        if n > 3 {
            return Err(Error::TooLarge {
                what: "adjugate",
                max: 3,
                got: n,
            });
        }
        if n == 1 {
            return Ok(Self::identity(1));
        }
        let mut adj = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                // Cofactor (i, j) lands at (j, i); signs vanish in characteristic 2.
                adj.set(j, i, self.minor(i, j).rank() == n - 1);
            }
        }
        Ok(adj)
    }

    /// Deletes row `i` and column `j`.
    pub fn minor(&self, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(self.nrows() - 1, self.ncols() - 1);
        let low = (1u8 << j) - 1;
        for (k, r) in (0..self.nrows()).filter(|&k| k != i).enumerate() {
            let row = self.rows[r];
            m.rows[k] = (row & low) | ((row >> 1) & !low);
        }
        m
    }

    /// Sub-block starting at `(r0, c0)` with the given shape.
    pub fn block(&self, r0: usize, c0: usize, nrows: usize, ncols: usize) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        let mask = low_mask(ncols) as u8;
        for i in 0..nrows {
            m.rows[i] = (self.rows[r0 + i] >> c0) & mask;
        }
        m
    }

    /// Characteristic polynomial `det(tI + M)`.
    pub fn charpoly(&self) -> Result<Gf2Poly> {
        self.require_square()?;
        let n = self.nrows();
        if n > 5 {
            return Err(Error::TooLarge {
                what: "charpoly",
                max: 5,
                got: n,
            });
        }
        // Entry (i, j) of tI + M is a polynomial of degree at most one.
        let mut entries = [[Gf2Poly::ZERO; MAX_SIDE]; MAX_SIDE];
        for (i, row) in entries.iter_mut().enumerate().take(n) {
            for (j, e) in row.iter_mut().enumerate().take(n) {
                let c = u64::from(self.get(i, j));
                *e = Gf2Poly(c | if i == j { 2 } else { 0 });
            }
        }
        Ok(poly_det(&entries, n, 0, low_mask(n) as u8))
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare {
                nrows: self.nrows(),
                ncols: self.ncols(),
            })
        }
    }

    /// Compact form `NxP:` followed by one fixed-width hex group per row, first row first.
    pub fn to_hex(&self) -> String {
        format!("{}x{}:{}", self.nrows, self.ncols, self.hex_digits())
    }

    /// The row digits of [`Gf2Matrix::to_hex`] without the shape prefix.
    pub fn hex_digits(&self) -> String {
        let width = self.ncols().div_ceil(4);
        self.rows()
            .iter()
            .map(|r| format!("{:0width$X}", r, width = width))
            .collect()
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let (shape, digits) = s.split_once(':').ok_or(Error::Parse {
            pos: 0,
            msg: "missing ':'".into(),
        })?;
        let (n, p) = shape.split_once('x').ok_or(Error::Parse {
            pos: 0,
            msg: "missing 'x' in shape".into(),
        })?;
        let n: usize = n.trim().parse().map_err(|_| Error::Parse {
            pos: 0,
            msg: "bad row count".into(),
        })?;
        let p: usize = p.trim().parse().map_err(|_| Error::Parse {
            pos: 0,
            msg: "bad column count".into(),
        })?;
        check_shape(n, p)?;
        let digits = digits.strip_prefix(['h', 'H']).unwrap_or(digits);
        Self::from_hex_digits(n, p, digits).map_err(|e| match e {
            Error::Parse { pos, msg } => Error::Parse {
                pos: pos + shape.len() + 1,
                msg,
            },
            other => other,
        })
    }

    pub fn from_hex_digits(n: usize, p: usize, digits: &str) -> Result<Self> {
        check_shape(n, p)?;
        let width = p.div_ceil(4);
        if digits.len() != n * width {
            return Err(Error::Parse {
                pos: 0,
                msg: format!("expected {} hex digits, got {}", n * width, digits.len()),
            });
        }
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let chunk = &digits[i * width..(i + 1) * width];
            let r = u8::from_str_radix(chunk, 16).map_err(|_| Error::Parse {
                pos: i * width,
                msg: format!("bad hex group `{chunk}`"),
            })?;
            rows.push(r);
        }
        Self::from_rows(n, p, &rows)
    }
}

fn mismatch(a: &Gf2Matrix, b: &Gf2Matrix) -> Error {
    Error::ShapeMismatch {
        left: format!("{}x{}", a.nrows, a.ncols),
        right: format!("{}x{}", b.nrows, b.ncols),
    }
}

/// XOR of the rows selected by the bits of `sel`.
#[inline]
pub(crate) fn combine_rows(rows: &[u8], sel: u8) -> u8 {
    let mut acc = 0u8;
    let mut s = sel;
    while s != 0 {
        acc ^= rows[s.trailing_zeros() as usize];
        s &= s - 1;
    }
    acc
}

/// Rank of a list of row bitmasks.
pub fn rank_of_rows(rows: &[u8]) -> usize {
    // basis[h] holds the reduced row whose highest set bit is h.
    let mut basis = [0u8; MAX_SIDE];
    let mut rank = 0;
    for &r in rows {
        let mut v = r;
        while v != 0 {
            let h = 7 - v.leading_zeros() as usize;
            if basis[h] == 0 {
                basis[h] = v;
                rank += 1;
                break;
            }
            v ^= basis[h];
        }
    }
    rank
}

/// Cofactor expansion along row `row`, restricted to the columns in `cols`.
fn poly_det(e: &[[Gf2Poly; MAX_SIDE]; MAX_SIDE], n: usize, row: usize, cols: u8) -> Gf2Poly {
    if row == n {
        return Gf2Poly::ONE;
    }
    let mut acc = Gf2Poly::ZERO;
    let mut c = cols;
    while c != 0 {
        let j = c.trailing_zeros() as usize;
        c &= c - 1;
        if e[row][j] != Gf2Poly::ZERO {
            acc = acc + e[row][j] * poly_det(e, n, row + 1, cols & !(1 << j));
        }
    }
    acc
}

impl fmt::Display for Gf2Matrix {
    /// Rows separated by `;`, entries by `,`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.nrows() {
            if i > 0 {
                f.write_str(";")?;
            }
            for j in 0..self.ncols() {
                if j > 0 {
                    f.write_str(",")?;
                }
                f.write_str(if self.get(i, j) { "1" } else { "0" })?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl FromStr for Gf2Matrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut table: Vec<Vec<u8>> = Vec::new();
        let mut pos = 0;
        for row in s.split(';') {
            let mut r = Vec::new();
            for entry in row.split(',') {
                let t = entry.trim();
                match t {
                    "0" => r.push(0),
                    "1" => r.push(1),
                    _ => {
                        let off = entry.len() - entry.trim_start().len();
                        return Err(Error::Parse {
                            pos: pos + off,
                            msg: format!("expected 0 or 1, got `{t}`"),
                        });
                    }
                }
                pos += entry.len() + 1;
            }
            table.push(r);
        }
        let refs: Vec<&[u8]> = table.iter().map(|r| r.as_slice()).collect();
        Self::from_bits(&refs)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gf2Vector {
    len: u8,
    bits: u64,
}

impl Gf2Vector {
    pub fn new(len: usize, bits: u64) -> Result<Self> {
        if len > 64 {
            return Err(Error::TooLarge {
                what: "vector length",
                max: 64,
                got: len,
            });
        }
        if bits & !low_mask(len) != 0 {
            return Err(Error::Precondition(format!("bits beyond length {len}")));
        }
        Ok(Gf2Vector {
            len: len as u8,
            bits,
        })
    }

    pub fn zero(len: usize) -> Self {
        Self::new(len, 0).expect("vector length")
    }

    /// The `i`-th standard basis vector.
    pub fn unit(len: usize, i: usize) -> Self {
        assert!(i < len);
        Self::new(len, 1 << i).expect("vector length")
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn get(&self, i: usize) -> bool {
        (self.bits >> i) & 1 == 1
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Every non-zero vector of the given length.
    pub fn nonzero(len: usize) -> impl Iterator<Item = Gf2Vector> {
        (1..=low_mask(len)).map(move |b| Gf2Vector {
            len: len as u8,
            bits: b,
        })
    }
}

impl fmt::Debug for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len())
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect();
        write!(f, "({s})")
    }
}

/// Polynomial over GF(2); bit `k` is the coefficient of `t^k`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Gf2Poly(pub u64);

impl Gf2Poly {
    pub const ZERO: Gf2Poly = Gf2Poly(0);
    pub const ONE: Gf2Poly = Gf2Poly(1);

    pub fn degree(&self) -> Option<u32> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros())
    }

    pub fn coeff(&self, k: u32) -> bool {
        (self.0 >> k) & 1 == 1
    }

    pub fn eval(&self, x: bool) -> bool {
        if x {
            self.0.count_ones() % 2 == 1
        } else {
            self.0 & 1 == 1
        }
    }
}

impl std::ops::Add for Gf2Poly {
    type Output = Gf2Poly;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Self) -> Self {
        Gf2Poly(self.0 ^ rhs.0)
    }
}

impl std::ops::Mul for Gf2Poly {
    type Output = Gf2Poly;
    fn mul(self, rhs: Self) -> Self {
        let mut acc = 0u64;
        let mut b = rhs.0;
        while b != 0 {
            acc ^= self.0 << b.trailing_zeros();
            b &= b - 1;
        }
        Gf2Poly(acc)
    }
}

impl fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(deg) = self.degree() else {
            return f.write_str("0");
        };
        let terms: Vec<String> = (0..=deg)
            .rev()
            .filter(|&k| self.coeff(k))
            .map(|k| match k {
                0 => "1".to_string(),
                1 => "t".to_string(),
                _ => format!("t^{k}"),
            })
            .collect();
        f.write_str(&terms.join("+"))
    }
}

impl fmt::Debug for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Every element of `GL_n(F_2)`, ascending in hex serialization order.
pub fn enumerate_group(n: usize) -> Result<Vec<Gf2Matrix>> {
    if n == 0 || n > 4 {
        return Err(Error::TooLarge {
            what: "group enumeration",
            max: 4,
            got: n,
        });
    }
    let mask = low_mask(n) as u8;
    let total = 1u64 << (n * n);
    let mut out = Vec::new();
    for c in 0..total {
        let mut m = Gf2Matrix::zeros(n, n);
        for i in 0..n {
            m.rows[i] = ((c >> ((n - 1 - i) * n)) as u8) & mask;
        }
        if m.rank() == n {
            out.push(m);
        }
    }
    Ok(out)
}

/// Cached group elements for `n <= 4`.
pub fn group(n: usize) -> &'static [Gf2Matrix] {
    use std::sync::OnceLock;
    static GROUPS: [OnceLock<Vec<Gf2Matrix>>; 5] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    assert!((1..=4).contains(&n), "group size {n} unsupported");
    GROUPS[n].get_or_init(|| enumerate_group(n).expect("supported size"))
}

/// A quadratic form `X -> X^T P X`, stored by its upper-triangular representative.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct QuadForm {
    rep: Gf2Matrix,
}

impl QuadForm {
    /// The form represented by any square matrix.
    pub fn from_matrix(p: &Gf2Matrix) -> Result<Self> {
        p.require_square()?;
        let n = p.nrows();
        let mut rep = Gf2Matrix::zeros(n, n);
        for i in 0..n {
            rep.set(i, i, p.get(i, i));
            for j in i + 1..n {
                rep.set(i, j, p.get(i, j) ^ p.get(j, i));
            }
        }
        Ok(QuadForm { rep })
    }

    pub fn n(&self) -> usize {
        self.rep.nrows()
    }

    pub fn rep(&self) -> Gf2Matrix {
        self.rep
    }

    pub fn eval(&self, x: &Gf2Vector) -> Result<bool> {
        let px = self.rep.apply(x)?;
        Ok((px.bits & x.bits).count_ones() % 2 == 1)
    }

    /// Every form on `F_2^n`, indexed by the bits of the upper triangle.
    pub fn all(n: usize) -> impl Iterator<Item = QuadForm> {
        let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        (0..1u64 << cells.len()).map(move |c| {
            let mut rep = Gf2Matrix::zeros(n, n);
            for (k, &(i, j)) in cells.iter().enumerate() {
                rep.set(i, j, (c >> k) & 1 == 1);
            }
            QuadForm { rep }
        })
    }

    pub fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }
}

/// Every alternating `n x n` matrix (symmetric with zero diagonal).
pub fn alternating_matrices(n: usize) -> Vec<Gf2Matrix> {
    let cells: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    (0..1u64 << cells.len())
        .map(|c| {
            let mut m = Gf2Matrix::zeros(n, n);
            for (k, &(i, j)) in cells.iter().enumerate() {
                if (c >> k) & 1 == 1 {
                    m.set(i, j, true);
                    m.set(j, i, true);
                }
            }
            m
        })
        .collect()
}

/// Searches the representatives of `q` (the coset of its matrix modulo alternating matrices)
/// for a non-singular one.
pub fn quadform_has_nonsingular_rep(q: &QuadForm) -> Result<Option<Gf2Matrix>> {
    let n = q.n();
    if n.is_multiple_of(2) {
        return Err(Error::Precondition(format!(
            "quadratic form size must be odd, got {n}"
        )));
    }
    if n > 5 {
        return Err(Error::TooLarge {
            what: "quadratic form search",
            max: 5,
            got: n,
        });
    }
    Ok(alternating_matrices(n)
        .into_iter()
        .map(|a| q.rep.add(&a).expect("same shape"))
        .find(|m| m.rank() == n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(s: &str) -> Gf2Matrix {
        s.parse().unwrap()
    }

    #[test]
    fn text_round_trip() {
        let j2 = m("1,0,0;0,1,0;0,0,0");
        assert_eq!(j2, Gf2Matrix::j_block(3, 3, 2));
        assert_eq!(j2.to_string(), "1,0,0;0,1,0;0,0,0");
        assert!(matches!(
            "1,0;0,2".parse::<Gf2Matrix>(),
            Err(Error::Parse { pos: 6, .. })
        ));
        assert!("1,0;0".parse::<Gf2Matrix>().is_err());
    }

    #[test]
    fn hex_round_trip() {
        let a = m("1,0,1,1,1;0,1,0,0,0;1,1,1,1,1");
        assert_eq!(a.to_hex(), "3x5:1D021F");
        assert_eq!(Gf2Matrix::from_hex(&a.to_hex()).unwrap(), a);
        assert_eq!(Gf2Matrix::from_hex("3x5:h1d021f").unwrap(), a);
        assert!(Gf2Matrix::from_hex("3x3:h1A2B").is_err());
    }

    #[test]
    fn small_examples() {
        assert_eq!(Gf2Matrix::j_block(3, 3, 2).rank(), 2);
        assert_eq!(m("0,0,1;0,0,0;0,1,0").rank(), 2);
        assert!(Gf2Matrix::identity(3).det().unwrap());
        assert!(m("1,0,1;1,1,1;0,1,1").det().unwrap());
        assert!(m("1,0;0,1;0,0").det().is_err());
        assert_eq!(
            Gf2Matrix::identity(2).adjugate().unwrap(),
            Gf2Matrix::identity(2)
        );
        assert_eq!(m("0,1;0,0").adjugate().unwrap(), m("0,1;0,0"));
        assert!(Gf2Matrix::identity(4).adjugate().is_err());
    }

    #[test]
    fn charpoly_examples() {
        let a = m("1,0,1;1,0,0;0,1,1");
        assert_eq!(a.charpoly().unwrap(), Gf2Poly(0b1011));
        let b = a.add(&Gf2Matrix::identity(3)).unwrap();
        assert_eq!(b.charpoly().unwrap(), Gf2Poly(0b1101));
        assert_eq!(Gf2Matrix::zeros(5, 5).charpoly().unwrap(), Gf2Poly(1 << 5));
        assert_eq!(Gf2Poly(0b1011).to_string(), "t^3+t+1");
        assert!(Gf2Matrix::zeros(6, 6).charpoly().is_err());
    }

    #[test]
    fn inverse_and_minor() {
        for g in group(3) {
            let inv = g.inverse().unwrap();
            assert_eq!(g.mul(&inv).unwrap(), Gf2Matrix::identity(3));
        }
        assert!(Gf2Matrix::j_block(3, 3, 2).inverse().is_none());
        let a = m("1,0,1;1,1,0;0,1,1");
        assert_eq!(a.minor(1, 1), m("1,1;0,1"));
        assert_eq!(a.minor(0, 2), m("1,1;0,1"));
    }

    #[test]
    fn group_sizes_and_order() {
        assert_eq!(enumerate_group(1).unwrap(), vec![Gf2Matrix::identity(1)]);
        assert_eq!(enumerate_group(2).unwrap().len(), 6);
        let g3 = enumerate_group(3).unwrap();
        let hex: Vec<String> = g3.iter().map(|g| g.to_hex()).collect();
        let mut sorted = hex.clone();
        sorted.sort();
        assert_eq!(hex, sorted);
        assert!(enumerate_group(5).is_err());
    }

    #[test]
    fn quadform_examples() {
        let zero = QuadForm::from_matrix(&Gf2Matrix::zeros(3, 3)).unwrap();
        assert_eq!(quadform_has_nonsingular_rep(&zero).unwrap(), None);
        let q = QuadForm::from_matrix(&m("0,1,1;0,0,1;1,1,0")).unwrap();
        let w = quadform_has_nonsingular_rep(&q).unwrap().unwrap();
        assert!(w.det().unwrap());
        assert_eq!(QuadForm::from_matrix(&w).unwrap(), q);
        let even = QuadForm::from_matrix(&Gf2Matrix::identity(2)).unwrap();
        assert!(quadform_has_nonsingular_rep(&even).is_err());
    }
}
