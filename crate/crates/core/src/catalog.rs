//! Named spaces with expected properties, loaded from a text asset.
//!
//! ```text
//! name: J3
//! matrix: [a,c,d;0,a+b,e;0,0,b]
//! expect: dim=5,urk=2,primitive=true
//! ```
//!
//! Blocks are separated by blank lines; `#` starts a comment line.

use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::genmatrix::parse_generic;
use crate::gf2::Gf2Matrix;
use crate::predicates::{
    has_trivial_spectrum, is_irreducible_action, is_lld, is_minimal_lld, is_primitive,
    is_rank_constant_2, is_semi_primitive, upper_rank,
};
use crate::spaces::{AffineMatrixSpace, MatrixSpace};

const BUILTIN: &str = include_str!("../assets/catalog.txt");

/// A property an entry is expected to have.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Property {
    Dim(usize),
    Urk(usize),
    Rows(usize),
    Cols(usize),
    Flag(Flag, bool),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flag {
    Reduced,
    SemiPrimitive,
    Primitive,
    RankConstant2,
    TrivialSpectrum,
    Irreducible,
    Nilpotent,
    Lld,
    MinimalLld,
    Nonsingular,
}

impl Flag {
    const ALL: [(Flag, &'static str); 10] = [
        (Flag::Reduced, "reduced"),
        (Flag::SemiPrimitive, "semi_primitive"),
        (Flag::Primitive, "primitive"),
        (Flag::RankConstant2, "rank_constant_2"),
        (Flag::TrivialSpectrum, "trivial_spectrum"),
        (Flag::Irreducible, "irreducible"),
        (Flag::Nilpotent, "nilpotent"),
        (Flag::Lld, "lld"),
        (Flag::MinimalLld, "minimal_lld"),
        (Flag::Nonsingular, "nonsingular"),
    ];

    pub fn name(&self) -> &'static str {
        Flag::ALL
            .iter()
            .find(|(f, _)| f == self)
            .map(|(_, s)| *s)
            .expect("listed")
    }

    fn from_name(s: &str) -> Option<Flag> {
        Flag::ALL.iter().find(|(_, n)| *n == s).map(|(f, _)| *f)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::Dim(d) => write!(f, "dim={d}"),
            Property::Urk(r) => write!(f, "urk={r}"),
            Property::Rows(n) => write!(f, "n={n}"),
            Property::Cols(p) => write!(f, "p={p}"),
            Property::Flag(flag, v) => write!(f, "{}={v}", flag.name()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    /// Generic matrix as written in the asset.
    pub text: String,
    pub space: AffineMatrixSpace,
    pub expect: Vec<Property>,
}

impl CatalogEntry {
    /// The entry as a linear space; errors for affine entries.
    pub fn linear(&self) -> Result<MatrixSpace> {
        if !self.space.is_linear() {
            return Err(Error::Precondition(format!(
                "catalog entry {} is affine",
                self.name
            )));
        }
        Ok(self.space.translation().clone())
    }

    /// Evaluates one property on the entry.
    pub fn actual(&self, prop: &Property) -> Result<Property> {
        let s = &self.space;
        let t = s.translation();
        Ok(match *prop {
            Property::Dim(_) => Property::Dim(s.dim()),
            Property::Rows(_) => Property::Rows(s.shape().0),
            Property::Cols(_) => Property::Cols(s.shape().1),
            Property::Urk(_) => Property::Urk(self.linear().map(|v| upper_rank(&v))?),
            Property::Flag(flag, _) => {
                let value = match flag {
                    Flag::Nonsingular => {
                        let n = s.shape().0;
                        s.shape().0 == s.shape().1 && s.elements().all(|m| m.rank() == n)
                    }
                    Flag::Nilpotent => t.is_square() && t.elements().all(|m| is_nilpotent(&m)),
                    Flag::TrivialSpectrum => has_trivial_spectrum(&self.linear()?)?,
                    Flag::Irreducible => is_irreducible_action(t)?,
                    Flag::Reduced => self.linear()?.is_reduced(),
                    Flag::SemiPrimitive => is_semi_primitive(&self.linear()?),
                    Flag::Primitive => is_primitive(&self.linear()?),
                    Flag::RankConstant2 => is_rank_constant_2(&self.linear()?),
                    Flag::Lld => is_lld(&self.linear()?),
                    Flag::MinimalLld => is_minimal_lld(&self.linear()?),
                };
                Property::Flag(flag, value)
            }
        })
    }

    /// Properties whose evaluation differs from the expectation.
    pub fn mismatches(&self) -> Vec<String> {
        self.expect
            .iter()
            .filter_map(|p| match self.actual(p) {
                Ok(a) if a == *p => None,
                Ok(a) => Some(format!("expected {p}, found {a}")),
                Err(e) => Some(format!("cannot evaluate {p}: {e}")),
            })
            .collect()
    }
}

fn is_nilpotent(m: &Gf2Matrix) -> bool {
    let mut acc = *m;
    for _ in 1..m.nrows() {
        acc = acc.mul(m).expect("square");
    }
    acc.is_zero()
}

#[derive(Clone, Debug)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
}

impl Catalog {
    /// Parses catalog text. Syntax errors carry the line number in `pos`.
    pub fn parse(text: &str) -> Result<Catalog> {
        let mut entries: Vec<CatalogEntry> = Vec::new();
        let mut name: Option<(usize, String)> = None;
        let mut matrix: Option<String> = None;
        let mut expect: Vec<Property> = Vec::new();
        let lines = text.lines().map(str::trim).chain(std::iter::once(""));
        for (lineno, line) in lines.enumerate().map(|(i, l)| (i + 1, l)) {
            if line.starts_with('#') {
                continue;
            }
            if line.is_empty() {
                if let Some((start, n)) = name.take() {
                    let Some(m) = matrix.take() else {
                        return Err(Error::Parse {
                            pos: start,
                            msg: format!("entry {n} has no matrix line"),
                        });
                    };
                    let space = parse_generic(&m).map_err(|e| Error::Parse {
                        pos: start,
                        msg: format!("entry {n}: {e}"),
                    })?;
                    if entries.iter().any(|e| e.name == n) {
                        return Err(Error::Parse {
                            pos: start,
                            msg: format!("duplicate entry {n}"),
                        });
                    }
                    entries.push(CatalogEntry {
                        name: n,
                        text: m,
                        space,
                        expect: std::mem::take(&mut expect),
                    });
                } else if matrix.is_some() || !expect.is_empty() {
                    return Err(Error::Parse {
                        pos: lineno,
                        msg: "block without a name line".into(),
                    });
                }
                continue;
            }
            let (key, value) = line.split_once(':').ok_or_else(|| Error::Parse {
                pos: lineno,
                msg: format!("expected `key: value`, found `{line}`"),
            })?;
            let value = value.trim();
            match key.trim() {
                "name" => {
                    if name.is_some() {
                        return Err(Error::Parse {
                            pos: lineno,
                            msg: "second name line in one block".into(),
                        });
                    }
                    name = Some((lineno, value.to_string()));
                }
                "matrix" => matrix = Some(value.to_string()),
                "expect" => {
                    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                        expect.push(
                            parse_property(item)
                                .map_err(|msg| Error::Parse { pos: lineno, msg })?,
                        );
                    }
                }
                other => {
                    return Err(Error::Parse {
                        pos: lineno,
                        msg: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        Ok(Catalog { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Catalog> {
        Catalog::parse(&std::fs::read_to_string(path)?)
    }

    /// The catalog compiled into the library.
    pub fn builtin() -> &'static Catalog {
        static CATALOG: OnceLock<Catalog> = OnceLock::new();
        CATALOG.get_or_init(|| Catalog::parse(BUILTIN).expect("built-in catalog parses"))
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Result<&CatalogEntry> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::UnknownEntry(name.to_string()))
    }

    /// Shorthand for a linear entry.
    pub fn space(&self, name: &str) -> Result<MatrixSpace> {
        self.get(name)?.linear()
    }

    /// `(entry, mismatches)` for every entry with at least one failing expectation.
    pub fn self_check(&self) -> Vec<(String, Vec<String>)> {
        self.entries
            .iter()
            .map(|e| (e.name.clone(), e.mismatches()))
            .filter(|(_, m)| !m.is_empty())
            .collect()
    }
}

fn parse_property(item: &str) -> std::result::Result<Property, String> {
    let (k, v) = item
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, found `{item}`"))?;
    let (k, v) = (k.trim(), v.trim());
    let count = || {
        v.parse::<usize>()
            .map_err(|_| format!("`{k}` takes a count, found `{v}`"))
    };
    match k {
        "dim" => Ok(Property::Dim(count()?)),
        "urk" => Ok(Property::Urk(count()?)),
        "n" => Ok(Property::Rows(count()?)),
        "p" => Ok(Property::Cols(count()?)),
        _ => {
            let flag = Flag::from_name(k).ok_or_else(|| format!("unknown property `{k}`"))?;
            let b = v
                .parse::<bool>()
                .map_err(|_| format!("`{k}` takes true or false, found `{v}`"))?;
            Ok(Property::Flag(flag, b))
        }
    }
}

/// Entry of the built-in catalog.
pub fn get(name: &str) -> Result<&'static CatalogEntry> {
    Catalog::builtin().get(name)
}

/// Matrices supported on the first `s` rows and the first `t` columns.
pub fn r_space(s: usize, t: usize, n: usize, p: usize) -> Result<MatrixSpace> {
    if s > n || t > p {
        return Err(Error::Precondition(format!(
            "R({s},{t}) needs s <= {n} and t <= {p}"
        )));
    }
    let gens: Vec<Gf2Matrix> = (0..n)
        .flat_map(|i| (0..p).map(move |j| (i, j)))
        .filter(|&(i, j)| i < s || j < t)
        .map(|(i, j)| Gf2Matrix::unit(n, p, i, j))
        .collect();
    MatrixSpace::span(n, p, &gens)
}

/// Reduced subspace of `R(1,1)`: first row `[a, X^T, L]`, first column `[a; X; C]`,
/// with `X` of length `r` shared between the row and the column. Without the
/// corner, `a` is pinned to zero.
pub fn r11_family(r: usize, with_corner: bool, n: usize, p: usize) -> Result<MatrixSpace> {
    if n < 2 || p < 2 || r > (n - 1).min(p - 1) {
        return Err(Error::Precondition(format!(
            "r = {r} outside 0..={} at {n}x{p}",
            (n.min(p)).saturating_sub(1)
        )));
    }
    let mut gens = Vec::new();
    if with_corner {
        gens.push(Gf2Matrix::unit(n, p, 0, 0));
    }
    for k in 1..=r {
        gens.push(Gf2Matrix::unit(n, p, 0, k).add(&Gf2Matrix::unit(n, p, k, 0))?);
    }
    for i in r + 1..n {
        gens.push(Gf2Matrix::unit(n, p, i, 0));
    }
    for j in r + 1..p {
        gens.push(Gf2Matrix::unit(n, p, 0, j));
    }
    MatrixSpace::span(n, p, &gens)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_entries_meet_expectations() {
        assert_eq!(
            Catalog::builtin().self_check(),
            Vec::<(String, Vec<String>)>::new()
        );
    }

    #[test]
    fn r_spaces() {
        assert_eq!(r_space(1, 1, 3, 3).unwrap().dim(), 5);
        assert!(r_space(0, 0, 3, 3).unwrap().is_zero());
        let r20 = r_space(2, 0, 3, 3).unwrap();
        assert_eq!((r20.dim(), upper_rank(&r20)), (6, 2));
        assert_eq!(
            r_space(1, 1, 3, 3).unwrap(),
            get("R11").unwrap().linear().unwrap()
        );
    }

    #[test]
    fn r11_members() {
        let r11 = r_space(1, 1, 3, 3).unwrap();
        let dims: Vec<(usize, usize)> = (0..=2)
            .map(|r| {
                (
                    r11_family(r, true, 3, 3).unwrap().dim(),
                    r11_family(r, false, 3, 3).unwrap().dim(),
                )
            })
            .collect();
        assert_eq!(dims, vec![(5, 4), (4, 3), (3, 2)]);
        for r in 0..=2 {
            for c in [true, false] {
                let v = r11_family(r, c, 3, 3).unwrap();
                assert!(v.is_reduced() && v.is_subspace_of(&r11));
            }
        }
        assert!(r11_family(3, true, 3, 3).is_err());
    }

    #[test]
    fn parse_errors_carry_lines() {
        assert!(matches!(
            Catalog::parse("name: x\nmatrix: [a\n"),
            Err(Error::Parse { pos: 1, .. })
        ));
        assert!(matches!(
            Catalog::parse("name: x\nmatrix: [a]\nexpect: dim=z\n"),
            Err(Error::Parse { pos: 3, .. })
        ));
        assert!(matches!(
            Catalog::parse("name: x\nmatrix: [a]\nbogus: 1\n"),
            Err(Error::Parse { pos: 3, .. })
        ));
        assert!(Catalog::builtin().get("nope").is_err());
    }
}
