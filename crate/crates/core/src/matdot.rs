//! MatDot codes for `AB`: `A` is cut into `m` column blocks, `B` into `m` row
//! blocks, and
//!
//! ```text
//!   p_A(x) = sum_i A_i x^i,    p_B(x) = sum_j B_j x^(m-1-j)
//! ```
//!
//! so `AB = sum_i A_i B_i` is the coefficient of `x^(m-1)` in `p_A p_B`, a
//! polynomial of degree `2m - 2`. Any `2m - 1` workers suffice.
//!
//! The systematic variant encodes with the Lagrange basis on `x_1..x_m`, so
//! worker `r <= m` computes `A_{r-1} B_{r-1}` and the fusion node can simply
//! sum those `m` products when they are the ones that arrive.

use rayon::prelude::*;

use crate::cost::CostReport;
use crate::error::{CodingError, Result};
use crate::field::{EvalPoints, FieldElement, PrimeField};
use crate::matrix::{concat_blocks, split_columns, split_rows, FieldMatrix, SplitSpec};
use crate::poly::{eval_matrix_poly, interpolate_matrix_poly};
use crate::share::{interpolate_wanted, take_threshold, Share, WorkerProduct};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatDotSpec {
    m: usize,
    points: EvalPoints,
    systematic: bool,
}

/// Which route the systematic decoder took.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodePath {
    /// Summed the `m` systematic outputs.
    Systematic,
    /// Interpolated from `2m - 1` outputs.
    Interpolated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodeStats {
    pub path: DecodePath,
    /// Interpolation solves performed.
    pub interpolations: usize,
}

pub fn matdot_threshold(m: usize) -> usize {
    2 * m - 1
}

impl MatDotSpec {
    /// `workers` workers at the default points `x_r = r`.
    pub fn new(field: PrimeField, m: usize, workers: usize, systematic: bool) -> Result<MatDotSpec> {
        Self::with_points(m, EvalPoints::sequential(field, workers)?, systematic)
    }

    pub fn with_points(m: usize, points: EvalPoints, systematic: bool) -> Result<MatDotSpec> {
        if m == 0 {
            return Err(CodingError::InvalidParameter("m must be at least 1".into()));
        }
        let needed = matdot_threshold(m);
        if points.len() < needed {
            return Err(CodingError::InsufficientWorkers {
                needed,
                got: points.len(),
            });
        }
        Ok(MatDotSpec { m, points, systematic })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn workers(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &EvalPoints {
        &self.points
    }

    pub fn is_systematic(&self) -> bool {
        self.systematic
    }

    pub fn field(&self) -> PrimeField {
        self.points.field()
    }

    pub fn recovery_threshold(&self) -> usize {
        matdot_threshold(self.m)
    }

    /// Costs for an `rows x inner` times `inner x cols` product.
    pub fn costs(&self, rows: usize, inner: usize, cols: usize) -> CostReport {
        let block = inner.div_ceil(self.m);
        CostReport::from_shapes(
            self.workers(),
            self.recovery_threshold(),
            &[(rows, block), (block, cols)],
        )
    }

    /// Lagrange basis values `L_1(x)..L_m(x)` over `x_1..x_m`.
    fn lagrange_at(&self, x: FieldElement) -> Result<Vec<FieldElement>> {
        let f = self.field();
        let sys = &self.points.as_slice()[..self.m];
        sys.iter()
            .enumerate()
            .map(|(i, &xi)| {
                let (mut num, mut den) = (f.one(), f.one());
                for (j, &xj) in sys.iter().enumerate() {
                    if j != i {
                        num = f.mul(num, f.sub(x, xj));
                        den = f.mul(den, f.sub(xi, xj));
                    }
                }
                f.div(num, den)
            })
            .collect()
    }
}

fn split_pair(a: &FieldMatrix, b: &FieldMatrix, m: usize) -> Result<(Vec<FieldMatrix>, Vec<FieldMatrix>, SplitSpec)> {
    if a.cols() != b.rows() {
        return Err(CodingError::Shape(format!(
            "{}x{} times {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if a.field() != b.field() {
        return Err(CodingError::Shape("operands live in different fields".into()));
    }
    let output = SplitSpec::new(a.rows(), b.cols(), 1, 1)?;
    Ok((split_columns(a, m)?.blocks, split_rows(b, m)?.blocks, output))
}

fn check_field(spec: &MatDotSpec, a: &FieldMatrix) -> Result<()> {
    if a.field() != spec.field() {
        return Err(CodingError::Shape(
            "inputs and evaluation points live in different fields".into(),
        ));
    }
    Ok(())
}

/// One share per worker of `spec`, plain or systematic as the spec says.
pub fn matdot_encode(a: &FieldMatrix, b: &FieldMatrix, spec: &MatDotSpec) -> Result<Vec<Share>> {
    if spec.systematic {
        return systematic_encode(a, b, spec);
    }
    check_field(spec, a)?;
    let (a_blocks, mut b_blocks, output) = split_pair(a, b, spec.m)?;
    b_blocks.reverse();
    spec.points
        .as_slice()
        .par_iter()
        .enumerate()
        .map(|(idx, &x)| {
            let parts = vec![eval_matrix_poly(&a_blocks, x)?, eval_matrix_poly(&b_blocks, x)?];
            Ok(Share {
                worker: idx + 1,
                x,
                parts,
                output,
            })
        })
        .collect()
}

/// Shares of the systematic code: `p_A(x) = sum_i A_{i-1} L_i(x)` and
/// likewise for `B`.
pub fn systematic_encode(a: &FieldMatrix, b: &FieldMatrix, spec: &MatDotSpec) -> Result<Vec<Share>> {
    check_field(spec, a)?;
    let (a_blocks, b_blocks, output) = split_pair(a, b, spec.m)?;
    spec.points
        .as_slice()
        .par_iter()
        .enumerate()
        .map(|(idx, &x)| {
            let l = spec.lagrange_at(x)?;
            let pa = FieldMatrix::linear_combination(a_blocks.iter().zip(l.iter().copied()))?;
            let pb = FieldMatrix::linear_combination(b_blocks.iter().zip(l.iter().copied()))?;
            Ok(Share {
                worker: idx + 1,
                x,
                parts: vec![pa, pb],
                output,
            })
        })
        .collect()
}

pub fn matdot_worker(share: &Share) -> Result<WorkerProduct> {
    if share.parts.len() != 2 {
        return Err(CodingError::Shape(format!(
            "MatDot share with {} parts",
            share.parts.len()
        )));
    }
    share.compute()
}

/// Recovers `AB` from the first `2m - 1` results of a non-systematic code.
pub fn matdot_decode(results: &[WorkerProduct], spec: &MatDotSpec) -> Result<FieldMatrix> {
    if spec.systematic {
        return systematic_decode(results, spec).map(|(c, _)| c);
    }
    let used = take_threshold(results, spec.recovery_threshold())?;
    let coeffs = interpolate_wanted(used, &(0..used.len() as u64).collect::<Vec<_>>())?;
    concat_blocks(&coeffs[spec.m - 1..spec.m], &used[0].output)
}

/// Sums the systematic outputs if all `m` arrived, otherwise interpolates.
pub fn systematic_decode(results: &[WorkerProduct], spec: &MatDotSpec) -> Result<(FieldMatrix, DecodeStats)> {
    let sys = &spec.points.as_slice()[..spec.m];
    let found: Vec<Option<&WorkerProduct>> = sys.iter().map(|x| results.iter().find(|r| r.x == *x)).collect();
    if found.iter().all(Option::is_some) {
        let mut products = found.into_iter().flatten();
        let first = products.next().expect("m >= 1");
        let mut acc = first.product.clone();
        for r in products {
            acc.add_assign(&r.product)?;
        }
        let stats = DecodeStats {
            path: DecodePath::Systematic,
            interpolations: 0,
        };
        return Ok((concat_blocks(&[acc], &first.output)?, stats));
    }
    let c = systematic_decode_interpolating(results, spec)?;
    Ok((
        c,
        DecodeStats {
            path: DecodePath::Interpolated,
            interpolations: 1,
        },
    ))
}

/// The systematic decoder's general path: interpolate `p_C` from the first
/// `2m - 1` results, then sum `p_C(x_1) + ... + p_C(x_m)`.
pub fn systematic_decode_interpolating(results: &[WorkerProduct], spec: &MatDotSpec) -> Result<FieldMatrix> {
    let used = take_threshold(results, spec.recovery_threshold())?;
    let xs: Vec<_> = used.iter().map(|r| r.x).collect();
    let ys: Vec<_> = used.iter().map(|r| r.product.clone()).collect();
    let coeffs = interpolate_matrix_poly(&xs, &ys)?;
    let mut acc = FieldMatrix::zeros(spec.field(), ys[0].rows(), ys[0].cols());
    for &x in &spec.points.as_slice()[..spec.m] {
        acc.add_assign(&eval_matrix_poly(&coeffs, x)?)?;
    }
    concat_blocks(&[acc], &used[0].output)
}
