//! Generic single-variable encoding of a chain product `D_1 D_2 ... D_n`.
//!
//! Factor `q` is cut into a `rows_q x cols_q` block grid, with
//! `cols_q = rows_{q+1}`. Every factor is encoded as one matrix polynomial in
//! `x`: block `(a, b)` of factor `q` gets the exponent
//!
//! ```text
//!   (q == 0 ? a : rows_q - 1 - a) * w_q  +  b * w_{q+1}
//! ```
//!
//! for a weight vector `w_0..w_n`. Along every contracted index the two
//! neighbours' exponents add up to the constant `(rows_{q+1} - 1) * w_{q+1}`
//! exactly when the indices match, so output block `(i, j)` is the coefficient
//! of `w_0 i + sum_{q=1}^{n-1} w_q (rows_q - 1) + w_n j` provided no other
//! index tuple lands there. Whether that holds depends on the weights and is
//! checked by [`ChainCode::verify`].

use std::collections::HashMap;

use rayon::prelude::*;

use crate::cost::CostReport;
use crate::error::{CodingError, Result};
use crate::field::{EvalPoints, FieldElement};
use crate::matrix::{concat_blocks, split_grid, BlockGrid, FieldMatrix, SplitSpec};
use crate::share::{interpolate_wanted, take_threshold, Share, WorkerProduct};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChainCode {
    grids: Vec<(usize, usize)>,
    weights: Vec<u64>,
}

/// Outcome of exhaustively expanding the encoded product.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IsolationReport {
    /// Largest exponent any index tuple produces.
    pub max_exponent: u64,
    pub recovery_threshold: usize,
    /// Wanted exponent of each output block, row-major.
    pub wanted: Vec<u64>,
    /// Number of index tuples whose term lands on each wanted exponent.
    pub contributors: Vec<usize>,
    pub tuples_checked: u64,
    pub violations: Vec<String>,
}

impl IsolationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

const MAX_REPORTED_VIOLATIONS: usize = 32;

impl ChainCode {
    pub fn new(grids: Vec<(usize, usize)>, weights: Vec<u64>) -> Result<ChainCode> {
        if grids.is_empty() {
            return Err(CodingError::InvalidParameter("chain needs at least one factor".into()));
        }
        if weights.len() != grids.len() + 1 {
            return Err(CodingError::InvalidParameter(format!(
                "{} factors need {} weights, got {}",
                grids.len(),
                grids.len() + 1,
                weights.len()
            )));
        }
        if grids.iter().any(|&(r, c)| r == 0 || c == 0) {
            return Err(CodingError::InvalidParameter("block grids must be nonempty".into()));
        }
        if let Some(q) = grids.windows(2).position(|w| w[0].1 != w[1].0) {
            return Err(CodingError::InvalidParameter(format!(
                "factor {q} has {} block columns but factor {} has {} block rows",
                grids[q].1,
                q + 1,
                grids[q + 1].0
            )));
        }
        Ok(ChainCode { grids, weights })
    }

    pub fn factors(&self) -> usize {
        self.grids.len()
    }

    pub fn grids(&self) -> &[(usize, usize)] {
        &self.grids
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    /// Exponent of block `(a, b)` of factor `q`.
    pub fn block_exponent(&self, q: usize, a: usize, b: usize) -> u64 {
        let rows = self.grids[q].0;
        let row_digit = if q == 0 { a } else { rows - 1 - a };
        row_digit as u64 * self.weights[q] + b as u64 * self.weights[q + 1]
    }

    /// Block grid of the product.
    pub fn output_grid(&self) -> (usize, usize) {
        (self.grids[0].0, self.grids[self.grids.len() - 1].1)
    }

    /// Exponent whose coefficient is output block `(i, j)`.
    pub fn wanted_exponent(&self, i: usize, j: usize) -> u64 {
        let n = self.grids.len();
        let inner: u64 = (1..n).map(|q| self.weights[q] * (self.grids[q].0 as u64 - 1)).sum();
        self.weights[0] * i as u64 + inner + self.weights[n] * j as u64
    }

    pub fn wanted_exponents(&self) -> Vec<u64> {
        let (r, c) = self.output_grid();
        (0..r)
            .flat_map(|i| (0..c).map(move |j| (i, j)))
            .map(|(i, j)| self.wanted_exponent(i, j))
            .collect()
    }

    /// Degree of the product polynomial.
    pub fn max_exponent(&self) -> u64 {
        let n = self.grids.len();
        let w = &self.weights;
        let mut total = w[0] * (self.grids[0].0 as u64 - 1) + w[n] * (self.grids[n - 1].1 as u64 - 1);
        for (q, pair) in self.grids.windows(2).enumerate() {
            total += w[q + 1] * (pair[0].1 as u64 - 1 + pair[1].0 as u64 - 1);
        }
        total
    }

    /// Number of evaluations needed to interpolate the product polynomial.
    pub fn recovery_threshold(&self) -> usize {
        self.max_exponent() as usize + 1
    }

    /// Padded encoded-block shapes one worker receives, for factors of the
    /// given original shapes.
    pub fn part_shapes(&self, shapes: &[(usize, usize)]) -> Result<Vec<(usize, usize)>> {
        self.check_shapes(shapes)?;
        shapes
            .iter()
            .zip(&self.grids)
            .map(|(&(r, c), &(gr, gc))| Ok(SplitSpec::new(r, c, gr, gc)?.block_shape()))
            .collect()
    }

    pub fn costs(&self, shapes: &[(usize, usize)], workers: usize) -> Result<CostReport> {
        Ok(CostReport::from_shapes(
            workers,
            self.recovery_threshold(),
            &self.part_shapes(shapes)?,
        ))
    }

    fn check_shapes(&self, shapes: &[(usize, usize)]) -> Result<()> {
        if shapes.len() != self.grids.len() {
            return Err(CodingError::Shape(format!(
                "{} matrices for a chain of {}",
                shapes.len(),
                self.grids.len()
            )));
        }
        if let Some(q) = shapes.windows(2).position(|w| w[0].1 != w[1].0) {
            return Err(CodingError::Shape(format!(
                "factor {q} is {}x{} but factor {} is {}x{}",
                shapes[q].0,
                shapes[q].1,
                q + 1,
                shapes[q + 1].0,
                shapes[q + 1].1
            )));
        }
        Ok(())
    }

    /// Splits each factor into its block grid.
    pub fn split(&self, mats: &[FieldMatrix]) -> Result<Vec<BlockGrid>> {
        let shapes: Vec<_> = mats.iter().map(FieldMatrix::shape).collect();
        self.check_shapes(&shapes)?;
        mats.iter()
            .zip(&self.grids)
            .map(|(m, &(r, c))| split_grid(m, r, c))
            .collect()
    }

    /// Evaluates factor `q`'s encoding polynomial at `x`.
    pub fn encode_factor(&self, q: usize, grid: &BlockGrid, x: FieldElement) -> Result<FieldMatrix> {
        let field = grid.blocks[0].field();
        let cols = self.grids[q].1;
        FieldMatrix::linear_combination(
            grid.blocks
                .iter()
                .enumerate()
                .map(|(idx, blk)| (blk, field.pow(x, self.block_exponent(q, idx / cols, idx % cols)))),
        )
    }

    /// One share per evaluation point; worker `r` gets `points.point(r)`.
    pub fn encode(&self, mats: &[FieldMatrix], points: &EvalPoints) -> Result<Vec<Share>> {
        let grids = self.split(mats)?;
        let (gr, gc) = self.output_grid();
        let output = SplitSpec::new(mats[0].rows(), mats[mats.len() - 1].cols(), gr, gc)?;
        points
            .as_slice()
            .par_iter()
            .enumerate()
            .map(|(idx, &x)| {
                let parts = grids
                    .iter()
                    .enumerate()
                    .map(|(q, g)| self.encode_factor(q, g, x))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Share {
                    worker: idx + 1,
                    x,
                    parts,
                    output,
                })
            })
            .collect()
    }

    /// Recovers the chain product from the first `recovery_threshold()` results.
    pub fn decode(&self, results: &[WorkerProduct]) -> Result<FieldMatrix> {
        let used = take_threshold(results, self.recovery_threshold())?;
        let output = used[0].output;
        if (output.grid_rows, output.grid_cols) != self.output_grid() {
            return Err(CodingError::Shape("results were not produced by this code".into()));
        }
        let blocks = interpolate_wanted(used, &self.wanted_exponents())?;
        concat_blocks(&blocks, &output)
    }

    /// Expands the encoded product over every block-index tuple and checks
    /// that each output block's exponent collects exactly its own terms.
    pub fn verify(&self) -> IsolationReport {
        let wanted = self.wanted_exponents();
        let (_, out_cols) = self.output_grid();
        let mut slot_of: HashMap<u64, usize> = HashMap::new();
        let mut violations = Vec::new();
        for (idx, &e) in wanted.iter().enumerate() {
            if let Some(prev) = slot_of.insert(e, idx) {
                violations.push(format!(
                    "output blocks {:?} and {:?} share exponent {e}",
                    (prev / out_cols, prev % out_cols),
                    (idx / out_cols, idx % out_cols)
                ));
            }
        }
        let mut state = Walk {
            code: self,
            wanted: &wanted,
            slot_of: &slot_of,
            contributors: vec![0; wanted.len()],
            tuples: 0,
            max_seen: 0,
            violations,
            path: Vec::with_capacity(self.grids.len()),
        };
        state.visit(0, 0, true);
        let Walk {
            contributors,
            tuples,
            max_seen,
            mut violations,
            ..
        } = state;
        let max_exponent = self.max_exponent();
        if max_seen != max_exponent {
            violations.push(format!("largest exponent is {max_seen}, expected {max_exponent}"));
        }
        for (idx, &c) in contributors.iter().enumerate() {
            let expected: usize = self.grids[1..].iter().map(|g| g.0).product();
            if c != expected {
                violations.push(format!(
                    "exponent {} collects {c} terms, expected {expected}",
                    wanted[idx]
                ));
            }
        }
        violations.truncate(MAX_REPORTED_VIOLATIONS);
        IsolationReport {
            max_exponent: max_seen,
            recovery_threshold: max_exponent as usize + 1,
            wanted,
            contributors,
            tuples_checked: tuples,
            violations,
        }
    }
}

struct Walk<'a> {
    code: &'a ChainCode,
    wanted: &'a [u64],
    slot_of: &'a HashMap<u64, usize>,
    contributors: Vec<usize>,
    tuples: u64,
    max_seen: u64,
    violations: Vec<String>,
    path: Vec<(usize, usize)>,
}

impl Walk<'_> {
    fn visit(&mut self, q: usize, exponent: u64, contracting: bool) {
        let grids = &self.code.grids;
        if q == grids.len() {
            self.finish(exponent, contracting);
            return;
        }
        let (rows, cols) = grids[q];
        for a in 0..rows {
            let matches = q == 0 || self.path[q - 1].1 == a;
            for b in 0..cols {
                self.path.push((a, b));
                let e = exponent + self.code.block_exponent(q, a, b);
                self.visit(q + 1, e, contracting && matches);
                self.path.pop();
            }
        }
    }

    fn finish(&mut self, exponent: u64, contracting: bool) {
        self.tuples += 1;
        self.max_seen = self.max_seen.max(exponent);
        let out_cols = self.code.output_grid().1;
        let hit = self.slot_of.get(&exponent).copied();
        if contracting {
            let own = self.path[0].0 * out_cols + self.path[self.path.len() - 1].1;
            if hit == Some(own) {
                self.contributors[own] += 1;
            } else if self.violations.len() < MAX_REPORTED_VIOLATIONS {
                self.violations.push(format!(
                    "tuple {:?} lands on {exponent}, not its wanted exponent {}",
                    self.path, self.wanted[own]
                ));
            }
        } else if let Some(slot) = hit {
            self.contributors[slot] += 1;
            if self.violations.len() < MAX_REPORTED_VIOLATIONS {
                self.violations.push(format!(
                    "non-contracting tuple {:?} collides with wanted exponent {exponent}",
                    self.path
                ));
            }
        }
    }
}
