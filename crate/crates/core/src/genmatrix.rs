//! Generic-matrix notation: a matrix of F_2-linear expressions in letters.
//!
//! ```text
//! matrix := '[' row (';' row)* ']'
//! row    := expr (',' expr)*
//! expr   := term (('+' | '-') term)*
//! term   := '0' | '1' | letter
//! ```
//!
//! Whitespace is ignored. A letter names one free scalar wherever it appears.
//! Since `-1 = 1` over F_2, `-` is accepted as a synonym of `+` and as a prefix.

use crate::error::{Error, Result};
use crate::gf2::Gf2Matrix;
use crate::spaces::{AffineMatrixSpace, MatrixSpace};

/// One entry: the constant term and the set of letters (bit `k` = letter `a + k`).
#[derive(Clone, Copy, Default, Debug, PartialEq, Eq)]
struct Entry {
    constant: bool,
    letters: u32,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            Some(x) => self.err(format!("expected `{}`, found `{}`", c as char, x as char)),
            None => self.err(format!("expected `{}`, found end of input", c as char)),
        }
    }

    fn term(&mut self, e: &mut Entry) -> Result<()> {
        match self.peek() {
            Some(b'0') => {}
            Some(b'1') => e.constant ^= true,
            Some(c @ b'a'..=b'z') => e.letters ^= 1 << (c - b'a'),
            Some(c) => {
                return self.err(format!("expected 0, 1 or a letter, found `{}`", c as char))
            }
            None => return self.err("expected a term, found end of input"),
        }
        self.pos += 1;
        Ok(())
    }

    fn expr(&mut self) -> Result<Entry> {
        let mut e = Entry::default();
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        self.term(&mut e)?;
        while matches!(self.peek(), Some(b'+' | b'-')) {
            self.pos += 1;
            self.term(&mut e)?;
        }
        Ok(e)
    }

    fn matrix(&mut self) -> Result<Vec<Vec<Entry>>> {
        if self.peek().is_none() {
            return self.err("empty input");
        }
        self.expect(b'[')?;
        let mut rows: Vec<Vec<Entry>> = vec![vec![self.expr()?]];
        loop {
            match self.peek() {
                Some(b',') => {
                    self.pos += 1;
                    let e = self.expr()?;
                    rows.last_mut().expect("non-empty").push(e);
                }
                Some(b';') => {
                    let row_start = self.pos;
                    self.check_row_width(&rows, row_start)?;
                    self.pos += 1;
                    rows.push(vec![self.expr()?]);
                }
                Some(b']') => {
                    self.check_row_width(&rows, self.pos)?;
                    self.pos += 1;
                    break;
                }
                Some(c) => {
                    return self.err(format!("expected `,`, `;` or `]`, found `{}`", c as char))
                }
                None => return self.err("unterminated matrix, expected `]`"),
            }
        }
        if self.peek().is_some() {
            return self.err("trailing characters after `]`");
        }
        Ok(rows)
    }

    fn check_row_width(&self, rows: &[Vec<Entry>], at: usize) -> Result<()> {
        let width = rows[0].len();
        let last = rows.last().expect("non-empty");
        if last.len() != width {
            return Err(Error::Parse {
                pos: at,
                msg: format!(
                    "row {} has {} entries, expected {}",
                    rows.len(),
                    last.len(),
                    width
                ),
            });
        }
        Ok(())
    }
}

/// Parses a generic matrix into the affine space it describes.
pub fn parse_generic(text: &str) -> Result<AffineMatrixSpace> {
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let rows = parser.matrix()?;
    let (n, p) = (rows.len(), rows[0].len());
    if n > 8 || p > 8 {
        return Err(Error::BadShape { nrows: n, ncols: p });
    }
    let mut base = Gf2Matrix::zeros(n, p);
    let mut coeffs = vec![Gf2Matrix::zeros(n, p); 26];
    let mut used = 0u32;
    for (i, row) in rows.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            base.set(i, j, e.constant);
            used |= e.letters;
            for (k, c) in coeffs.iter_mut().enumerate() {
                if (e.letters >> k) & 1 == 1 {
                    c.set(i, j, true);
                }
            }
        }
    }
    let gens: Vec<Gf2Matrix> = (0..26)
        .filter(|k| (used >> k) & 1 == 1)
        .map(|k| coeffs[k])
        .collect();
    AffineMatrixSpace::new(base, MatrixSpace::span(n, p, &gens)?)
}

/// Parses a generic matrix that must describe a linear space.
pub fn parse_linear(text: &str) -> Result<MatrixSpace> {
    let s = parse_generic(text)?;
    if !s.is_linear() {
        return Err(Error::Precondition(format!(
            "`{text}` has a constant part; expected a linear space"
        )));
    }
    Ok(s.into_translation())
}

/// Prints a space with letters `a, b, ...` attached to its echelon basis in order.
pub fn format_generic(s: &AffineMatrixSpace) -> Result<String> {
    let t = s.translation();
    if t.dim() > 26 {
        return Err(Error::TooLarge {
            what: "generic matrix letters",
            max: 26,
            got: t.dim(),
        });
    }
    let basis = t.basis();
    let base = s.base();
    let (n, p) = s.shape();
    let mut out = String::from("[");
    for i in 0..n {
        if i > 0 {
            out.push(';');
        }
        for j in 0..p {
            if j > 0 {
                out.push(',');
            }
            let mut terms: Vec<String> = Vec::new();
            if base.get(i, j) {
                terms.push("1".into());
            }
            for (k, b) in basis.iter().enumerate() {
                if b.get(i, j) {
                    terms.push(((b'a' + k as u8) as char).to_string());
                }
            }
            if terms.is_empty() {
                out.push('0');
            } else {
                out.push_str(&terms.join("+"));
            }
        }
    }
    out.push(']');
    Ok(out)
}

/// [`format_generic`] for a linear space.
pub fn format_linear(v: &MatrixSpace) -> String {
    format_generic(&AffineMatrixSpace::linear(v.clone())).expect("dimension fits the alphabet")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_prints() {
        let v = parse_generic("[a,0,0;0,a+b,0;0,0,b]").unwrap();
        assert!(v.is_linear());
        assert_eq!(v.dim(), 2);
        let i2 = parse_generic("[1,0;0,1]").unwrap();
        assert_eq!(i2.dim(), 0);
        assert_eq!(i2.base(), Gf2Matrix::identity(2));
        assert_eq!(parse_generic("[0,a,a+c;a,0,b;a+b,c,0]").unwrap().dim(), 3);
        assert_eq!(
            format_generic(&AffineMatrixSpace::linear(MatrixSpace::zero(2, 2))).unwrap(),
            "[0,0;0,0]"
        );
        let j2 = MatrixSpace::span(3, 3, &[Gf2Matrix::j_block(3, 3, 2)]).unwrap();
        assert_eq!(format_linear(&j2), "[a,0,0;0,a,0;0,0,0]");
    }

    #[test]
    fn whitespace_order_and_signs() {
        let a = parse_generic("[a+b, 0 ; c , b+a]").unwrap();
        let b = parse_generic("[b+a,0;c,a+b]").unwrap();
        assert_eq!(a, b);
        let c = parse_generic("[0,-x,-y;x,0,-z;y,z,0]").unwrap();
        assert_eq!(c, parse_generic("[0,x,y;x,0,z;y,z,0]").unwrap());
    }

    #[test]
    fn error_positions() {
        assert!(matches!(
            parse_generic(""),
            Err(Error::Parse { pos: 0, .. })
        ));
        assert!(matches!(
            parse_generic("[a,b;c]"),
            Err(Error::Parse { pos: 6, .. })
        ));
        assert!(matches!(
            parse_generic("[a,2]"),
            Err(Error::Parse { pos: 3, .. })
        ));
        assert!(matches!(
            parse_generic("[a,b"),
            Err(Error::Parse { pos: 4, .. })
        ));
        assert!(matches!(
            parse_generic("[a] x"),
            Err(Error::Parse { pos: 4, .. })
        ));
    }

    #[test]
    fn affine_round_trip() {
        let s = parse_generic("[1+a,b,a;a,1+a,c;b+c,a,1+a]").unwrap();
        assert_eq!(parse_generic(&format_generic(&s).unwrap()).unwrap(), s);
    }
}
