//! Arithmetic in the prime field GF(p) and worker evaluation points.

use std::collections::HashSet;
use std::fmt;

use rand::Rng;

use crate::error::{CodingError, Result};

/// The Mersenne prime 2^31 - 1.
pub const DEFAULT_PRIME: u64 = (1 << 31) - 1;

/// An element of GF(p), stored as its canonical representative in `[0, p)`.
///
/// Elements do not carry their modulus; all arithmetic goes through a
/// [`PrimeField`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElement(u64);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// GF(p) for a prime `p < 2^32`, so that a product of two reduced elements
/// fits in a `u64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl Default for PrimeField {
    fn default() -> Self {
        PrimeField { p: DEFAULT_PRIME }
    }
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p >= 1 << 32 || !is_prime(p) {
            return Err(CodingError::NotPrime(p));
        }
        Ok(PrimeField { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Reduces an arbitrary integer into the field.
    pub fn elem(&self, v: u64) -> FieldElement {
        FieldElement(v % self.p)
    }

    pub fn from_i64(&self, v: i64) -> FieldElement {
        FieldElement(v.rem_euclid(self.p as i64) as u64)
    }

    /// Accepts `v` only if it is already a canonical representative.
    pub fn checked_elem(&self, v: u64) -> Option<FieldElement> {
        (v < self.p).then_some(FieldElement(v))
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::ZERO
    }

    pub fn one(&self) -> FieldElement {
        FieldElement::ONE
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let s = a.0 + b.0;
        FieldElement(if s >= self.p { s - self.p } else { s })
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(if a.0 >= b.0 { a.0 - b.0 } else { a.0 + self.p - b.0 })
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        self.sub(FieldElement::ZERO, a)
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(a.0 * b.0 % self.p)
    }

    pub fn pow(&self, base: FieldElement, mut exp: u64) -> FieldElement {
        let mut result = FieldElement::ONE;
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                result = self.mul(result, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        result
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(CodingError::DivisionByZero(self.p));
        }
        Ok(self.pow(a, self.p - 2))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement(rng.gen_range(0..self.p))
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p < 4 {
        return true;
    }
    if p.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Distinct evaluation points `x_1, ..., x_P`, one per worker.
///
/// Worker `r` (1-based) is assigned `xs[r - 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalPoints {
    field: PrimeField,
    xs: Vec<FieldElement>,
}

impl EvalPoints {
    pub fn new(field: PrimeField, xs: Vec<FieldElement>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(xs.len());
        for x in &xs {
            if x.value() >= field.modulus() {
                return Err(CodingError::InvalidParameter(format!(
                    "evaluation point {x} is not reduced mod {}",
                    field.modulus()
                )));
            }
            if !seen.insert(*x) {
                return Err(CodingError::DuplicatePoint(x.value()));
            }
        }
        Ok(EvalPoints { field, xs })
    }

    /// The default assignment `x_r = r` for `r = 1..=count`; needs `p > count`.
    pub fn sequential(field: PrimeField, count: usize) -> Result<Self> {
        if (count as u64) >= field.modulus() {
            return Err(CodingError::InvalidParameter(format!(
                "field of size {} cannot host {count} distinct nonzero points",
                field.modulus()
            )));
        }
        Ok(EvalPoints {
            field,
            xs: (1..=count as u64).map(FieldElement).collect(),
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn as_slice(&self) -> &[FieldElement] {
        &self.xs
    }

    /// Point of the 1-based worker `worker`.
    pub fn point(&self, worker: usize) -> Option<FieldElement> {
        worker.checked_sub(1).and_then(|i| self.xs.get(i)).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    // Extended Euclid, kept separate from the Fermat-based `inv`.
    fn egcd_inverse(a: i64, p: i64) -> i64 {
        let (mut r0, mut r1) = (p, a);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        assert_eq!(r0, 1);
        t0.rem_euclid(p)
    }

    #[test]
    fn small_field_examples() {
        let f = gf(7);
        assert_eq!(f.add(f.elem(3), f.elem(5)), f.elem(1));
        assert_eq!(f.inv(f.elem(3)).unwrap(), f.elem(5));
        assert_eq!(egcd_inverse(3, 7), 5);
        assert_eq!(f.pow(f.elem(2), 0), f.one());
        assert_eq!(f.sub(f.elem(2), f.elem(5)), f.elem(4));
        assert_eq!(f.from_i64(-1), f.elem(6));
    }

    #[test]
    fn inverse_of_zero_fails() {
        let f = gf(7);
        assert_eq!(f.inv(f.zero()), Err(CodingError::DivisionByZero(7)));
    }

    #[test]
    fn rejects_composites_and_large_moduli() {
        assert!(PrimeField::new(1).is_err());
        assert!(PrimeField::new(91).is_err());
        assert!(PrimeField::new(4_294_967_311).is_err());
        assert_eq!(PrimeField::default().modulus(), DEFAULT_PRIME);
        assert!(PrimeField::new(DEFAULT_PRIME).is_ok());
        assert!(PrimeField::new(4_294_967_291).is_ok());
    }

    #[test]
    fn inverses_agree_with_extended_euclid() {
        for p in [7u64, 11, 101, 65_537] {
            let f = gf(p);
            for a in 1..p.min(500) {
                assert_eq!(
                    f.inv(f.elem(a)).unwrap().value(),
                    egcd_inverse(a as i64, p as i64) as u64
                );
            }
        }
    }

    #[test]
    fn eval_points_must_be_distinct() {
        let f = gf(11);
        let err = EvalPoints::new(f, vec![f.elem(1), f.elem(4), f.elem(1)]).unwrap_err();
        assert_eq!(err, CodingError::DuplicatePoint(1));
        assert!(EvalPoints::sequential(f, 11).is_err());
        let pts = EvalPoints::sequential(f, 10).unwrap();
        assert_eq!(pts.point(1), Some(f.elem(1)));
        assert_eq!(pts.point(10), Some(f.elem(10)));
        assert_eq!(pts.point(0), None);
    }

    proptest! {
        #[test]
        fn field_axioms(a in 0u64..DEFAULT_PRIME, b in 0u64..DEFAULT_PRIME, c in 0u64..DEFAULT_PRIME) {
            let f = PrimeField::default();
            let (a, b, c) = (f.elem(a), f.elem(b), f.elem(c));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.add(a, f.neg(a)), f.zero());
            if !a.is_zero() {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
            }
        }
    }
}
