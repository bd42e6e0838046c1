//! What the master sends to a worker, what the worker sends back, and the
//! interpolation step every decoder shares.

use std::collections::HashSet;

use crate::error::{CodingError, Result};
use crate::field::FieldElement;
use crate::matrix::{FieldMatrix, SplitSpec};
use crate::poly::interpolate_matrix_coefficients;

/// Encoded inputs for one worker.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Share {
    /// 1-based worker id.
    pub worker: usize,
    pub x: FieldElement,
    /// One encoded block per factor of the product, in chain order.
    pub parts: Vec<FieldMatrix>,
    /// Block layout of the final product, so the fusion node can strip padding.
    pub output: SplitSpec,
}

/// A worker's answer: the product of its share's parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkerProduct {
    pub worker: usize,
    pub x: FieldElement,
    pub product: FieldMatrix,
    pub output: SplitSpec,
    /// Scalar multiplications spent computing `product`.
    pub mult_count: u64,
}

impl Share {
    /// Multiplies the parts together in the worker's association order.
    pub fn compute(&self) -> Result<WorkerProduct> {
        let (product, mult_count) = chain_multiply(&self.parts)?;
        Ok(WorkerProduct {
            worker: self.worker,
            x: self.x,
            product,
            output: self.output,
            mult_count,
        })
    }

    /// Field symbols the master sends this worker.
    pub fn symbols(&self) -> u64 {
        self.parts.iter().map(FieldMatrix::symbols).sum()
    }
}

/// Order in which a worker multiplies `n` encoded parts, as a tree of index
/// ranges. For `n >= 3` the inner pairs `(1,2), (3,4), ...` go first, their
/// products are chained, then the first part is applied on the left and, for
/// even `n`, the last part on the right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Assoc {
    Leaf(usize),
    Mul(Box<Assoc>, Box<Assoc>),
}

impl Assoc {
    pub fn for_chain(n: usize) -> Assoc {
        use Assoc::*;
        let mul = |a: Assoc, b: Assoc| Mul(Box::new(a), Box::new(b));
        match n {
            0 => panic!("empty chain"),
            1 => Leaf(0),
            2 => mul(Leaf(0), Leaf(1)),
            _ => {
                let pairs = (n - 1) / 2;
                let inner = (0..pairs)
                    .map(|i| mul(Leaf(2 * i + 1), Leaf(2 * i + 2)))
                    .reduce(mul)
                    .expect("n >= 3 has at least one inner pair");
                let left = mul(Leaf(0), inner);
                if n.is_multiple_of(2) {
                    mul(left, Leaf(n - 1))
                } else {
                    left
                }
            }
        }
    }

    /// Shape of the result and multiplications needed, given part shapes.
    pub fn cost(&self, shapes: &[(usize, usize)]) -> Result<((usize, usize), u64)> {
        match self {
            Assoc::Leaf(i) => Ok((shapes[*i], 0)),
            Assoc::Mul(l, r) => {
                let ((lr, lc), lm) = l.cost(shapes)?;
                let ((rr, rc), rm) = r.cost(shapes)?;
                if lc != rr {
                    return Err(CodingError::Shape(format!("chain: {lr}x{lc} times {rr}x{rc}")));
                }
                Ok(((lr, rc), lm + rm + (lr * lc * rc) as u64))
            }
        }
    }

    fn eval(&self, parts: &[FieldMatrix]) -> Result<(FieldMatrix, u64)> {
        match self {
            Assoc::Leaf(i) => Ok((parts[*i].clone(), 0)),
            Assoc::Mul(l, r) => {
                let (a, am) = l.eval(parts)?;
                let (b, bm) = r.eval(parts)?;
                let count = a.mult_count(&b);
                Ok((a.matmul(&b)?, am + bm + count))
            }
        }
    }
}

/// Product of `parts` in [`Assoc::for_chain`] order, with its multiplication count.
pub fn chain_multiply(parts: &[FieldMatrix]) -> Result<(FieldMatrix, u64)> {
    if parts.is_empty() {
        return Err(CodingError::EmptyInput);
    }
    Assoc::for_chain(parts.len()).eval(parts)
}

/// Keeps the first `k` results, failing if there are fewer or if any two share
/// an evaluation point or disagree on the output layout.
pub fn take_threshold(results: &[WorkerProduct], k: usize) -> Result<&[WorkerProduct]> {
    if results.len() < k {
        return Err(CodingError::RecoveryThresholdNotMet {
            needed: k,
            got: results.len(),
        });
    }
    let used = &results[..k];
    let mut seen = HashSet::with_capacity(k);
    for r in used {
        if !seen.insert(r.x) {
            return Err(CodingError::DuplicatePoint(r.x.value()));
        }
        if r.output != used[0].output {
            return Err(CodingError::Shape("results disagree on the output layout".into()));
        }
    }
    Ok(used)
}

/// Interpolates the worker products as a matrix polynomial of degree
/// `< results.len()` and returns the coefficients at `exponents`.
pub fn interpolate_wanted(results: &[WorkerProduct], exponents: &[u64]) -> Result<Vec<FieldMatrix>> {
    let xs: Vec<FieldElement> = results.iter().map(|r| r.x).collect();
    let ys: Vec<FieldMatrix> = results.iter().map(|r| r.product.clone()).collect();
    let wanted: Vec<usize> = exponents.iter().map(|&e| e as usize).collect();
    interpolate_matrix_coefficients(&xs, &ys, &wanted)
}
