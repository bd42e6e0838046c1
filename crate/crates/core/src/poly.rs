//! Polynomial evaluation and Lagrange interpolation over GF(p), for scalar
//! and matrix-valued coefficients.

use std::collections::HashSet;

use crate::error::{CodingError, Result};
use crate::field::{FieldElement, PrimeField};
use crate::matrix::FieldMatrix;

/// Horner evaluation of `sum_i coeffs[i] x^i`.
pub fn eval_poly(field: PrimeField, coeffs: &[FieldElement], x: FieldElement) -> FieldElement {
    coeffs
        .iter()
        .rev()
        .fold(field.zero(), |acc, &c| field.add(field.mul(acc, x), c))
}

/// Evaluates `sum_i coeffs[i] x^i` for matrix coefficients of a common shape.
pub fn eval_matrix_poly(coeffs: &[FieldMatrix], x: FieldElement) -> Result<FieldMatrix> {
    let (last, rest) = coeffs.split_last().ok_or(CodingError::EmptyInput)?;
    let mut acc = last.clone();
    for c in rest.iter().rev() {
        acc = acc.scale(x);
        acc.add_assign(c)?;
    }
    Ok(acc)
}

/// Evaluates a sparse matrix polynomial given as `(exponent, coefficient)` terms.
pub fn eval_sparse_matrix_poly(terms: &[(u64, &FieldMatrix)], x: FieldElement) -> Result<FieldMatrix> {
    let field = terms.first().ok_or(CodingError::EmptyInput)?.1.field();
    FieldMatrix::linear_combination(terms.iter().map(|&(e, m)| (m, field.pow(x, e))))
}

fn check_points(field: PrimeField, xs: &[FieldElement]) -> Result<()> {
    if xs.is_empty() {
        return Err(CodingError::EmptyInput);
    }
    let mut seen = HashSet::with_capacity(xs.len());
    for x in xs {
        if x.value() >= field.modulus() {
            return Err(CodingError::InvalidParameter(format!("point {x} is not reduced")));
        }
        if !seen.insert(*x) {
            return Err(CodingError::DuplicatePoint(x.value()));
        }
    }
    Ok(())
}

/// Inverse of the Vandermonde matrix on `xs`.
///
/// Entry `(c, r)` is the coefficient of `x^c` in the Lagrange basis polynomial
/// of `xs[r]`, so coefficient `c` of the interpolant through `(xs[r], y_r)` is
/// `sum_r W[c][r] y_r`. Built in O(k^2) field operations.
pub fn interpolation_weights(field: PrimeField, xs: &[FieldElement]) -> Result<FieldMatrix> {
    check_points(field, xs)?;
    let k = xs.len();
    // master[i] = coefficient of x^i in prod_j (x - x_j)
    let mut master = vec![field.zero(); k + 1];
    master[0] = field.one();
    for (deg, &xj) in xs.iter().enumerate() {
        for i in (0..=deg + 1).rev() {
            let shifted = if i == 0 { field.zero() } else { master[i - 1] };
            master[i] = field.sub(shifted, field.mul(xj, master[i]));
        }
    }
    let mut w = FieldMatrix::zeros(field, k, k);
    let mut quotient = vec![field.zero(); k];
    for (r, &xr) in xs.iter().enumerate() {
        // master / (x - x_r) by synthetic division, high degree first
        let mut carry = field.zero();
        for i in (0..k).rev() {
            carry = field.add(master[i + 1], field.mul(carry, xr));
            quotient[i] = carry;
        }
        let denom = eval_poly(field, &quotient, xr);
        let inv = field.inv(denom)?;
        for (c, q) in quotient.iter().enumerate() {
            w.set(c, r, field.mul(*q, inv));
        }
    }
    Ok(w)
}

/// Coefficients (lowest degree first) of the unique polynomial of degree
/// `< xs.len()` through the points `(xs[i], ys[i])`.
pub fn interpolate(field: PrimeField, xs: &[FieldElement], ys: &[FieldElement]) -> Result<Vec<FieldElement>> {
    if xs.len() != ys.len() {
        return Err(CodingError::Shape(format!(
            "{} points but {} values",
            xs.len(),
            ys.len()
        )));
    }
    let w = interpolation_weights(field, xs)?;
    Ok((0..xs.len())
        .map(|c| {
            w.row(c)
                .iter()
                .zip(ys)
                .fold(field.zero(), |acc, (a, b)| field.add(acc, field.mul(*a, *b)))
        })
        .collect())
}

/// Recovers only the listed coefficients of a matrix polynomial of degree
/// `< xs.len()` from its evaluations `ys`.
pub fn interpolate_matrix_coefficients(
    xs: &[FieldElement],
    ys: &[FieldMatrix],
    wanted: &[usize],
) -> Result<Vec<FieldMatrix>> {
    if xs.len() != ys.len() {
        return Err(CodingError::Shape(format!(
            "{} points but {} values",
            xs.len(),
            ys.len()
        )));
    }
    let first = ys.first().ok_or(CodingError::EmptyInput)?;
    let field = first.field();
    if let Some(&c) = wanted.iter().find(|&&c| c >= xs.len()) {
        return Err(CodingError::InvalidParameter(format!(
            "coefficient {c} requested from {} evaluations",
            xs.len()
        )));
    }
    let w = interpolation_weights(field, xs)?;
    wanted
        .iter()
        .map(|&c| FieldMatrix::linear_combination(ys.iter().zip(w.row(c).iter().copied())))
        .collect()
}

/// Recovers every coefficient of a matrix polynomial of degree `< xs.len()`.
pub fn interpolate_matrix_poly(xs: &[FieldElement], ys: &[FieldMatrix]) -> Result<Vec<FieldMatrix>> {
    let all: Vec<usize> = (0..xs.len()).collect();
    interpolate_matrix_coefficients(xs, ys, &all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gf(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn elems(f: PrimeField, v: &[u64]) -> Vec<FieldElement> {
        v.iter().map(|&x| f.elem(x)).collect()
    }

    // Gaussian elimination on the Vandermonde system; independent of the
    // master-polynomial construction.
    fn solve_vandermonde(f: PrimeField, xs: &[FieldElement], ys: &[FieldElement]) -> Vec<FieldElement> {
        let k = xs.len();
        let mut a: Vec<Vec<FieldElement>> = xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| {
                let mut row: Vec<_> = (0..k as u64).map(|e| f.pow(x, e)).collect();
                row.push(y);
                row
            })
            .collect();
        for col in 0..k {
            let piv = (col..k).find(|&r| !a[r][col].is_zero()).unwrap();
            a.swap(col, piv);
            let inv = f.inv(a[col][col]).unwrap();
            for v in a[col].iter_mut() {
                *v = f.mul(*v, inv);
            }
            for r in 0..k {
                if r != col && !a[r][col].is_zero() {
                    let factor = a[r][col];
                    let pivot_row = a[col].clone();
                    for (v, pv) in a[r].iter_mut().zip(pivot_row) {
                        *v = f.sub(*v, f.mul(factor, pv));
                    }
                }
            }
        }
        a.into_iter().map(|row| row[k]).collect()
    }

    #[test]
    fn horner_example() {
        let f = gf(7);
        // 1 + 2*2 + 3*4 = 17 = 3 mod 7
        assert_eq!(eval_poly(f, &elems(f, &[1, 2, 3]), f.elem(2)), f.elem(3));
        assert_eq!(eval_poly(f, &[], f.elem(2)), f.zero());
    }

    #[test]
    fn interpolate_monomial() {
        let f = gf(101);
        let xs = elems(f, &[1, 2, 3]);
        let ys: Vec<_> = xs.iter().map(|&x| f.mul(x, x)).collect();
        assert_eq!(interpolate(f, &xs, &ys).unwrap(), elems(f, &[0, 0, 1]));
    }

    #[test]
    fn every_subset_recovers_the_same_polynomial() {
        let f = gf(11);
        let coeffs = elems(f, &[4, 0, 9]);
        let pts: Vec<u64> = (1..=6).collect();
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                for c in b + 1..pts.len() {
                    let xs = elems(f, &[pts[a], pts[b], pts[c]]);
                    let ys: Vec<_> = xs.iter().map(|&x| eval_poly(f, &coeffs, x)).collect();
                    assert_eq!(interpolate(f, &xs, &ys).unwrap(), coeffs);
                }
            }
        }
    }

    #[test]
    fn interpolation_errors() {
        let f = gf(11);
        assert_eq!(interpolate(f, &[], &[]), Err(CodingError::EmptyInput));
        let xs = elems(f, &[2, 5, 2]);
        assert_eq!(interpolate(f, &xs, &xs), Err(CodingError::DuplicatePoint(2)));
        assert!(matches!(interpolate(f, &xs[..2], &xs), Err(CodingError::Shape(_))));
    }

    #[test]
    fn weights_invert_vandermonde() {
        let f = gf(65537);
        let xs = elems(f, &[3, 17, 1, 400, 9]);
        let w = interpolation_weights(f, &xs).unwrap();
        let v = FieldMatrix::new(
            f,
            5,
            5,
            xs.iter().flat_map(|&x| (0..5).map(move |e| f.pow(x, e))).collect(),
        )
        .unwrap();
        assert_eq!(w.matmul(&v).unwrap(), FieldMatrix::identity(f, 5));
    }

    #[test]
    fn matrix_interpolation_selected_coefficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = PrimeField::default();
        let coeffs: Vec<_> = (0..4).map(|_| FieldMatrix::random(f, 2, 3, &mut rng)).collect();
        let xs = elems(f, &[5, 6, 7, 8]);
        let ys: Vec<_> = xs.iter().map(|&x| eval_matrix_poly(&coeffs, x).unwrap()).collect();
        let got = interpolate_matrix_coefficients(&xs, &ys, &[2]).unwrap();
        assert_eq!(got, vec![coeffs[2].clone()]);
        assert_eq!(interpolate_matrix_poly(&xs, &ys).unwrap(), coeffs);
        assert!(interpolate_matrix_coefficients(&xs, &ys, &[4]).is_err());
    }

    #[test]
    fn sparse_evaluation_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = gf(101);
        let a = FieldMatrix::random(f, 2, 2, &mut rng);
        let b = FieldMatrix::random(f, 2, 2, &mut rng);
        let zero = FieldMatrix::zeros(f, 2, 2);
        let dense = vec![a.clone(), zero.clone(), zero, b.clone()];
        let x = f.elem(9);
        assert_eq!(
            eval_sparse_matrix_poly(&[(0, &a), (3, &b)], x).unwrap(),
            eval_matrix_poly(&dense, x).unwrap()
        );
    }

    proptest! {
        #[test]
        fn interpolation_round_trip(
            coeffs in prop::collection::vec(0u64..1_000_003, 1..12),
            offset in 0u64..1_000_000,
        ) {
            let f = gf(1_000_003);
            let c = elems(f, &coeffs);
            let xs: Vec<_> = (0..c.len() as u64).map(|i| f.elem(offset + 7 * i)).collect();
            let ys: Vec<_> = xs.iter().map(|&x| eval_poly(f, &c, x)).collect();
            prop_assert_eq!(&interpolate(f, &xs, &ys).unwrap(), &c);
            prop_assert_eq!(solve_vandermonde(f, &xs, &ys), c);
        }
    }
}
