//! Dense row-major matrices over GF(p), block partitioning and the plain-text
//! matrix file format.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{CodingError, Result};
use crate::field::{FieldElement, PrimeField};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl FieldMatrix {
    pub fn new(field: PrimeField, rows: usize, cols: usize, data: Vec<FieldElement>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(CodingError::Shape(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| v.value() >= field.modulus()) {
            return Err(CodingError::InvalidParameter(format!(
                "entry {bad} is not reduced mod {}",
                field.modulus()
            )));
        }
        Ok(FieldMatrix {
            field,
            rows,
            cols,
            data,
        })
    }

    /// Builds a matrix from nested rows of integers, reducing each mod p.
    pub fn from_rows(field: PrimeField, rows: &[Vec<u64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(CodingError::Shape("ragged rows".into()));
        }
        let data = rows.iter().flatten().map(|&v| field.elem(v)).collect();
        Ok(FieldMatrix {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        FieldMatrix {
            field,
            rows,
            cols,
            data: vec![FieldElement::ZERO; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = FieldElement::ONE;
        }
        m
    }

    pub fn random<R: Rng + ?Sized>(field: PrimeField, rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = (0..rows * cols).map(|_| field.random(rng)).collect();
        FieldMatrix {
            field,
            rows,
            cols,
            data,
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Number of field symbols stored.
    pub fn symbols(&self) -> u64 {
        (self.rows * self.cols) as u64
    }

    pub fn data(&self) -> &[FieldElement] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    fn check_same_shape(&self, other: &FieldMatrix, op: &str) -> Result<()> {
        if self.field != other.field {
            return Err(CodingError::Shape(format!("{op}: operands live in different fields")));
        }
        if self.shape() != other.shape() {
            return Err(CodingError::Shape(format!(
                "{op}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    /// Schoolbook product over GF(p), parallel over output rows.
    pub fn matmul(&self, other: &FieldMatrix) -> Result<FieldMatrix> {
        if self.field != other.field {
            return Err(CodingError::Shape("matmul: operands live in different fields".into()));
        }
        if self.cols != other.rows {
            return Err(CodingError::Shape(format!(
                "matmul: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let p = self.field.modulus() as u128;
        let (n, k) = (other.cols, self.cols);
        let mut data = vec![FieldElement::ZERO; self.rows * n];
        if n > 0 {
            data.par_chunks_mut(n).enumerate().for_each(|(i, out)| {
                let lhs = self.row(i);
                let mut acc = vec![0u128; n];
                for (t, a) in lhs.iter().enumerate().take(k) {
                    if a.is_zero() {
                        continue;
                    }
                    let a = a.value() as u128;
                    for (slot, b) in acc.iter_mut().zip(other.row(t)) {
                        *slot += a * b.value() as u128;
                    }
                }
                for (o, v) in out.iter_mut().zip(acc) {
                    *o = self.field.elem((v % p) as u64);
                }
            });
        }
        Ok(FieldMatrix {
            field: self.field,
            rows: self.rows,
            cols: n,
            data,
        })
    }

    /// Scalar multiplications performed by a schoolbook `self * other`.
    pub fn mult_count(&self, other: &FieldMatrix) -> u64 {
        (self.rows * self.cols * other.cols) as u64
    }

    pub fn add(&self, other: &FieldMatrix) -> Result<FieldMatrix> {
        let mut out = self.clone();
        out.add_assign(other)?;
        Ok(out)
    }

    pub fn add_assign(&mut self, other: &FieldMatrix) -> Result<()> {
        self.check_same_shape(other, "add")?;
        let f = self.field;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = f.add(*a, *b);
        }
        Ok(())
    }

    pub fn sub(&self, other: &FieldMatrix) -> Result<FieldMatrix> {
        self.check_same_shape(other, "sub")?;
        let f = self.field;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f.sub(*a, *b)).collect();
        Ok(FieldMatrix { data, ..self.clone() })
    }

    pub fn scale(&self, c: FieldElement) -> FieldMatrix {
        let f = self.field;
        FieldMatrix {
            data: self.data.iter().map(|v| f.mul(*v, c)).collect(),
            ..self.clone()
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &FieldMatrix, c: FieldElement) -> Result<()> {
        self.check_same_shape(other, "add_scaled")?;
        if c.is_zero() {
            return Ok(());
        }
        let f = self.field;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = f.add(*a, f.mul(*b, c));
        }
        Ok(())
    }

    /// `sum_i c_i * M_i` over same-shaped matrices.
    pub fn linear_combination<'a, I>(terms: I) -> Result<FieldMatrix>
    where
        I: IntoIterator<Item = (&'a FieldMatrix, FieldElement)>,
    {
        let mut iter = terms.into_iter();
        let (first, c0) = iter.next().ok_or(CodingError::EmptyInput)?;
        let mut acc = first.scale(c0);
        for (m, c) in iter {
            acc.add_scaled(m, c)?;
        }
        Ok(acc)
    }

    /// Copy of the `rows x cols` window starting at (`r0`, `c0`), with zeros
    /// past the matrix edge.
    fn window(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> FieldMatrix {
        let mut out = FieldMatrix::zeros(self.field, rows, cols);
        for r in 0..rows.min(self.rows.saturating_sub(r0)) {
            for c in 0..cols.min(self.cols.saturating_sub(c0)) {
                out.data[r * cols + c] = self.get(r0 + r, c0 + c);
            }
        }
        out
    }

    /// Top-left `rows x cols` corner.
    pub fn truncate(&self, rows: usize, cols: usize) -> FieldMatrix {
        self.window(0, 0, rows.min(self.rows), cols.min(self.cols))
    }

    pub fn transpose(&self) -> FieldMatrix {
        let mut out = FieldMatrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.get(r, c);
            }
        }
        out
    }

    /// Serializes to the text format: a `rows cols p` header line, then one
    /// line of space-separated entries per row.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.rows, self.cols, self.field.modulus());
        for r in 0..self.rows {
            let line: Vec<String> = self.row(r).iter().map(|v| v.value().to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<FieldMatrix> {
        Self::read_text(text.as_bytes())
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<FieldMatrix> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| CodingError::Parse("missing header line".into()))??;
        let nums = parse_u64s(&header, 1)?;
        let [rows, cols, p] = nums[..] else {
            return Err(CodingError::Parse(format!(
                "header must be `rows cols p`, got {header:?}"
            )));
        };
        let field = PrimeField::new(p)?;
        let (rows, cols) = (rows as usize, cols as usize);
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let line = lines
                .next()
                .ok_or_else(|| CodingError::Parse(format!("expected {rows} rows, found {r}")))??;
            let vals = parse_u64s(&line, r + 2)?;
            if vals.len() != cols {
                return Err(CodingError::Parse(format!(
                    "line {}: expected {cols} entries, found {}",
                    r + 2,
                    vals.len()
                )));
            }
            for v in vals {
                let e = field
                    .checked_elem(v)
                    .ok_or_else(|| CodingError::Parse(format!("line {}: entry {v} not in [0, {p})", r + 2)))?;
                data.push(e);
            }
        }
        for line in lines {
            if !line?.trim().is_empty() {
                return Err(CodingError::Parse("trailing data after last row".into()));
            }
        }
        FieldMatrix::new(field, rows, cols, data)
    }
}

fn parse_u64s(line: &str, lineno: usize) -> Result<Vec<u64>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<u64>()
                .map_err(|_| CodingError::Parse(format!("line {lineno}: bad integer {tok:?}")))
        })
        .collect()
}

/// How a matrix is cut into blocks, plus the zero padding that made the cut even.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SplitSpec {
    /// Number of block rows (t for a `grid(t, s)` split, m for `rows(m)`).
    pub grid_rows: usize,
    /// Number of block columns.
    pub grid_cols: usize,
    pub orig_rows: usize,
    pub orig_cols: usize,
    pub pad_rows: usize,
    pub pad_cols: usize,
}

impl SplitSpec {
    pub fn new(orig_rows: usize, orig_cols: usize, grid_rows: usize, grid_cols: usize) -> Result<Self> {
        if grid_rows == 0 || grid_cols == 0 {
            return Err(CodingError::InvalidParameter("block counts must be positive".into()));
        }
        Ok(SplitSpec {
            grid_rows,
            grid_cols,
            orig_rows,
            orig_cols,
            pad_rows: orig_rows.next_multiple_of(grid_rows) - orig_rows,
            pad_cols: orig_cols.next_multiple_of(grid_cols) - orig_cols,
        })
    }

    pub fn columns(orig_rows: usize, orig_cols: usize, m: usize) -> Result<Self> {
        Self::new(orig_rows, orig_cols, 1, m)
    }

    pub fn rows(orig_rows: usize, orig_cols: usize, m: usize) -> Result<Self> {
        Self::new(orig_rows, orig_cols, m, 1)
    }

    pub fn padded_rows(&self) -> usize {
        self.orig_rows + self.pad_rows
    }

    pub fn padded_cols(&self) -> usize {
        self.orig_cols + self.pad_cols
    }

    pub fn block_shape(&self) -> (usize, usize) {
        (self.padded_rows() / self.grid_rows, self.padded_cols() / self.grid_cols)
    }

    pub fn block_count(&self) -> usize {
        self.grid_rows * self.grid_cols
    }
}

/// Blocks of a partitioned matrix in row-major grid order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockGrid {
    pub layout: SplitSpec,
    pub blocks: Vec<FieldMatrix>,
}

impl BlockGrid {
    pub fn block(&self, i: usize, j: usize) -> &FieldMatrix {
        &self.blocks[i * self.layout.grid_cols + j]
    }

    pub fn concat(&self) -> Result<FieldMatrix> {
        concat_blocks(&self.blocks, &self.layout)
    }
}

/// Cuts `a` into a `grid_rows x grid_cols` grid of equal blocks, zero-padding
/// the bottom and right edges as needed.
pub fn split_grid(a: &FieldMatrix, grid_rows: usize, grid_cols: usize) -> Result<BlockGrid> {
    let layout = SplitSpec::new(a.rows, a.cols, grid_rows, grid_cols)?;
    let (br, bc) = layout.block_shape();
    let blocks = (0..grid_rows)
        .flat_map(|i| (0..grid_cols).map(move |j| (i, j)))
        .map(|(i, j)| a.window(i * br, j * bc, br, bc))
        .collect();
    Ok(BlockGrid { layout, blocks })
}

/// `A = [A_0 A_1 ... A_{m-1}]`.
pub fn split_columns(a: &FieldMatrix, m: usize) -> Result<BlockGrid> {
    split_grid(a, 1, m)
}

/// `B = [B_0; B_1; ...; B_{m-1}]`.
pub fn split_rows(a: &FieldMatrix, m: usize) -> Result<BlockGrid> {
    split_grid(a, m, 1)
}

/// Reassembles row-major blocks into one matrix and strips the padding
/// recorded in `layout`.
pub fn concat_blocks(blocks: &[FieldMatrix], layout: &SplitSpec) -> Result<FieldMatrix> {
    if blocks.len() != layout.block_count() {
        return Err(CodingError::Shape(format!(
            "{} blocks for a {}x{} grid",
            blocks.len(),
            layout.grid_rows,
            layout.grid_cols
        )));
    }
    let (br, bc) = layout.block_shape();
    let field = blocks[0].field;
    if let Some(b) = blocks.iter().find(|b| b.shape() != (br, bc) || b.field != field) {
        return Err(CodingError::Shape(format!(
            "block of shape {}x{} where {br}x{bc} expected",
            b.rows, b.cols
        )));
    }
    let mut out = FieldMatrix::zeros(field, layout.orig_rows, layout.orig_cols);
    for r in 0..layout.orig_rows {
        for c in 0..layout.orig_cols {
            let b = &blocks[(r / br) * layout.grid_cols + c / bc];
            out.data[r * layout.orig_cols + c] = b.get(r % br, c % bc);
        }
    }
    Ok(out)
}

/// Left-to-right product of a chain of matrices; the reference answer every
/// decoder is checked against.
pub fn chain_product(matrices: &[FieldMatrix]) -> Result<FieldMatrix> {
    let (first, rest) = matrices.split_first().ok_or(CodingError::EmptyInput)?;
    rest.iter().try_fold(first.clone(), |acc, m| acc.matmul(m))
}
