//! Space-level predicates: upper rank, reducedness, the deletion conditions,
//! spectra, irreducibility, local linear dependence and maximality.

use crate::error::{Error, Result};
use crate::genmatrix::parse_linear;
use crate::gf2::{Gf2Matrix, Gf2Vector};
use crate::spaces::{
    flat_rank, nullspace, rank_table, reduce, span_elements, subspaces_of, MatrixSpace,
    VectorSpaceF2,
};

/// Generic matrix of the trace-zero upper-triangular 3x3 space.
pub const J3_GENERIC: &str = "[a,c,d;0,a+b,e;0,0,b]";

/// Largest rank attained in the space.
pub fn upper_rank(v: &MatrixSpace) -> usize {
    v.element_ranks().into_iter().max().unwrap_or(0) as usize
}

pub fn is_reduced(v: &MatrixSpace) -> bool {
    v.is_reduced()
}

fn urk_of_flats(n: usize, p: usize, basis: &[u64]) -> usize {
    let elems = span_elements(basis);
    match rank_table(n, p) {
        Some(t) => elems.iter().map(|&f| t[f as usize]).max().unwrap_or(0) as usize,
        None => elems.iter().map(|&f| flat_rank(n, p, f)).max().unwrap_or(0),
    }
}

/// Restriction of every member to the hyperplane `ker(phi)` of the source.
pub fn restrict_to_hyperplane(v: &MatrixSpace, phi: u64) -> MatrixSpace {
    let cols: Vec<Gf2Vector> = nullspace(&[phi], v.p())
        .into_iter()
        .map(|b| Gf2Vector::new(v.p(), b).expect("in range"))
        .collect();
    v.restrict_columns(&cols)
}

/// Composition of every member with the quotient map by the line spanned by `y`.
pub fn quotient_by_line(v: &MatrixSpace, y: u64) -> MatrixSpace {
    let n = v.n();
    // Modulo y, the coordinate e_k (k = lowest coordinate of y) equals the rest of y.
    let k = y.trailing_zeros() as usize;
    let keep: Vec<usize> = (0..n).filter(|&i| i != k).collect();
    let n2 = keep.len().max(1);
    let flats = v.basis().into_iter().map(|m| {
        let mut q = Gf2Matrix::zeros(n2, v.p());
        for j in 0..v.p() {
            let mut col = m.column(j).bits();
            if (col >> k) & 1 == 1 {
                col ^= y;
            }
            for (ii, &i) in keep.iter().enumerate() {
                if (col >> i) & 1 == 1 {
                    q.set(ii, j, true);
                }
            }
        }
        q.flat()
    });
    MatrixSpace::from_flats(n2, v.p(), flats.collect::<Vec<_>>())
}

/// Every source hyperplane keeps upper rank at least `r`.
pub fn satisfies_iii(v: &MatrixSpace, r: usize) -> bool {
    (1u64..1 << v.p()).all(|phi| {
        let w = restrict_to_hyperplane(v, phi);
        urk_of_flats(w.n(), w.p(), w.basis_flats()) >= r
    })
}

/// Every quotient of the target by a line keeps upper rank at least `r`.
pub fn satisfies_iv(v: &MatrixSpace, r: usize) -> bool {
    if v.n() == 1 {
        return r == 0;
    }
    (1u64..1 << v.n()).all(|y| {
        let w = quotient_by_line(v, y);
        urk_of_flats(w.n(), w.p(), w.basis_flats()) >= r
    })
}

pub fn is_semi_primitive(v: &MatrixSpace) -> bool {
    !v.is_zero() && v.is_reduced() && satisfies_iii(v, upper_rank(v))
}

pub fn is_primitive(v: &MatrixSpace) -> bool {
    is_semi_primitive(v) && satisfies_iv(v, upper_rank(v))
}

/// Every non-zero member has rank exactly 2.
pub fn is_rank_constant_2(v: &MatrixSpace) -> bool {
    !v.is_zero() && v.element_ranks().into_iter().skip(1).all(|r| r == 2)
}

fn require_square(v: &MatrixSpace) -> Result<()> {
    if v.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            nrows: v.n(),
            ncols: v.p(),
        })
    }
}

/// No member has eigenvalue 1, i.e. `det(M + I) = 1` throughout.
pub fn has_trivial_spectrum(v: &MatrixSpace) -> Result<bool> {
    require_square(v)?;
    let id = Gf2Matrix::identity(v.n()).flat();
    Ok(v.element_flats()
        .into_iter()
        .all(|f| flat_rank(v.n(), v.n(), f ^ id) == v.n()))
}

/// No proper non-zero subspace of the column space is stable under every member.
pub fn is_irreducible_action(v: &MatrixSpace) -> Result<bool> {
    require_square(v)?;
    let n = v.n();
    if n > 4 {
        return Err(Error::TooLarge {
            what: "irreducibility check",
            max: 4,
            got: n,
        });
    }
    let basis = v.basis();
    let full: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
    let stable = |f: &Vec<u64>| {
        f.iter().all(|&x| {
            let x = Gf2Vector::new(n, x).expect("in range");
            basis
                .iter()
                .all(|m| reduce(f, m.apply(&x).expect("square").bits()) == 0)
        })
    };
    Ok(!subspaces_of(&full)
        .iter()
        .filter(|f| !f.is_empty() && f.len() < n)
        .any(stable))
}

/// Number of non-zero `x` with `dim(V x) = k`, for each `k`.
pub fn evaluation_dims(v: &MatrixSpace) -> Vec<usize> {
    let mut counts = vec![0usize; v.n() + 1];
    for x in Gf2Vector::nonzero(v.p()) {
        counts[v.evaluation_image(&x).expect("length matches").dim()] += 1;
    }
    counts
}

/// Every source vector is annihilated by a non-zero member. The zero space is never LLD.
pub fn is_lld(v: &MatrixSpace) -> bool {
    let d = v.dim();
    d > 0
        && (0..1u64 << v.p()).all(|x| {
            v.evaluation_image(&Gf2Vector::new(v.p(), x).expect("in range"))
                .unwrap()
                .dim()
                < d
        })
}

/// LLD with no LLD hyperplane (hence no proper LLD subspace).
pub fn is_minimal_lld(v: &MatrixSpace) -> bool {
    is_lld(v) && v.hyperplanes().iter().all(|h| !is_lld(h))
}

/// Adding any matrix outside the space raises the upper rank above `r`.
pub fn is_maximal_with_urk(v: &MatrixSpace, r: usize) -> Result<bool> {
    if upper_rank(v) > r {
        return Err(Error::Precondition(format!(
            "space already has upper rank above {r}"
        )));
    }
    let (n, p) = v.shape();
    if n * p > 25 {
        return Err(Error::TooLarge {
            what: "maximality scan entries",
            max: 25,
            got: n * p,
        });
    }
    let elems = v.element_flats();
    let pivots: u64 = v
        .basis_flats()
        .iter()
        .fold(0, |a, &b| a | (b & b.wrapping_neg()));
    // Coset representatives are the matrices vanishing at every pivot.
    Ok((1u64..1 << (n * p))
        .filter(|&m| m & pivots == 0)
        .all(|m| elems.iter().any(|&e| flat_rank(n, p, e ^ m) > r)))
}

/// The trace-zero upper-triangular 3x3 space.
pub fn j3() -> MatrixSpace {
    parse_linear(J3_GENERIC).expect("valid generic matrix")
}

/// For a subspace of the trace-zero upper-triangular space: its diagonals fill the trace-zero plane.
pub fn j3_primitivity_criterion(v: &MatrixSpace) -> Result<bool> {
    if !v.is_subspace_of(&j3()) {
        return Err(Error::Precondition(
            "space is not contained in the upper-triangular trace-zero space".into(),
        ));
    }
    let diags = v
        .basis()
        .into_iter()
        .map(|m| (0..3).fold(0u64, |acc, i| acc | (u64::from(m.get(i, i)) << i)));
    let delta = VectorSpaceF2::from_bits(3, diags);
    let plane = VectorSpaceF2::from_bits(3, [0b011, 0b110]);
    Ok(delta == plane)
}

/// Counts of non-zero `x` with `dim(V x) = 2` and `= 3` for a rank-constant space in `Mat_3`.
pub fn counting_n2_n3(v: &MatrixSpace) -> Result<(usize, usize)> {
    if v.shape() != (3, 3) || !is_rank_constant_2(v) {
        return Err(Error::Precondition(
            "expected a 3x3 space whose non-zero members all have rank 2".into(),
        ));
    }
    let dims = evaluation_dims(v);
    Ok((dims[2], dims[3]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genmatrix::parse_linear;

    fn sp(s: &str) -> MatrixSpace {
        parse_linear(s).unwrap()
    }

    #[test]
    fn upper_ranks() {
        assert_eq!(upper_rank(&MatrixSpace::zero(3, 3)), 0);
        assert_eq!(upper_rank(&sp("[0,a,b;a,0,c;b,c,0]")), 2);
        assert_eq!(upper_rank(&MatrixSpace::full(3, 3)), 3);
    }

    #[test]
    fn deletion_conditions() {
        let r11 = sp("[a,b,c;d,0,0;e,0,0]");
        assert!(r11.is_reduced());
        assert!(!satisfies_iii(&r11, 2));
        let mata = sp("[0,a,b;a,0,c;b,c,0]");
        assert!(satisfies_iii(&mata, 2) && satisfies_iv(&mata, 2));
        let semi = sp("[x,y,0;0,y,z]");
        assert!(is_semi_primitive(&semi));
        assert!(!is_primitive(&semi));
        let thin = sp("[a,b;b,c;c,a]");
        assert!(!satisfies_iii(&thin, upper_rank(&thin)));
    }

    #[test]
    fn spectra_and_irreducibility() {
        assert!(has_trivial_spectrum(&MatrixSpace::zero(3, 3)).unwrap());
        assert!(!has_trivial_spectrum(&sp("[0,a,b;a,0,c;b,c,0]")).unwrap());
        assert!(!is_irreducible_action(&sp("[0,a,b;0,0,c;0,0,0]")).unwrap());
        assert!(is_irreducible_action(&MatrixSpace::full(3, 3)).unwrap());
        assert!(has_trivial_spectrum(&sp("[a,b;c,d;e,f]")).is_err());
    }

    #[test]
    fn lld_basics() {
        assert!(!is_lld(&MatrixSpace::zero(2, 2)));
        assert!(!is_lld(&sp("[a,0;0,a]")));
        assert!(is_lld(&sp("[a,b,0,0;0,0,c,d]")));
        assert!(!is_minimal_lld(&sp("[a,b,0,0;0,0,c,d]")));
    }

    #[test]
    fn maximality() {
        assert!(is_maximal_with_urk(&sp("[0,a,b;a,0,c;b,c,0]"), 2).unwrap());
        assert!(!is_maximal_with_urk(&sp("[0,a,a+c;a,0,b;a+b,c,0]"), 2).unwrap());
        assert!(is_maximal_with_urk(&MatrixSpace::full(3, 3), 2).is_err());
    }

    #[test]
    fn j3_criterion() {
        assert!(j3_primitivity_criterion(&j3()).unwrap());
        assert!(!j3_primitivity_criterion(&sp("[0,a,b;0,0,0;0,0,0]")).unwrap());
        assert!(j3_primitivity_criterion(&sp("[a,0,0;0,a+b,0;0,0,b]")).unwrap());
        assert!(j3_primitivity_criterion(&sp("[0,0,0;a,0,0;0,0,0]")).is_err());
    }
}
