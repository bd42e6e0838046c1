//! Single-round codes for a chain `D_1 D_2 ... D_n`. Odd-position factors
//! (`A` matrices) are cut into `t x s` grids, even-position ones (`B`
//! matrices) into `s x t` grids, and each factor is encoded in one variable
//! with the weights of its [`NMatVariant`].
//!
//! The basic variant is the `s = m, t = 1` grid: column blocks for every `A`,
//! row blocks for every `B`, and factor `v` evaluated at `x^(m^floor(v/2))`.
//! For odd `n` the product comes back as `m` column blocks of `C`.

use std::fmt;

use crate::chain::{ChainCode, IsolationReport};
use crate::cost::CostReport;
use crate::error::{CodingError, Result};
use crate::field::{EvalPoints, PrimeField};
use crate::matrix::FieldMatrix;
use crate::share::{Share, WorkerProduct};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NMatVariant {
    Basic { m: usize },
    Generalized { s: usize, t: usize },
    Improved { s: usize, t: usize },
}

impl NMatVariant {
    /// Builds a variant from command-line style parameters, checking `st = m`
    /// for the grid variants.
    pub fn from_params(name: &str, m: usize, s: Option<usize>, t: Option<usize>) -> Result<NMatVariant> {
        let grid = |s: Option<usize>, t: Option<usize>| -> Result<(usize, usize)> {
            let (s, t) = match (s, t) {
                (Some(s), Some(t)) => (s, t),
                (Some(s), None) if s > 0 && m.is_multiple_of(s) => (s, m / s),
                (None, Some(t)) if t > 0 && m.is_multiple_of(t) => (m / t, t),
                _ => return Err(CodingError::InvalidParameter(format!("need s and t with st = {m}"))),
            };
            if s * t != m {
                return Err(CodingError::InvalidParameter(format!("s * t = {} but m = {m}", s * t)));
            }
            Ok((s, t))
        };
        match name {
            "basic" => Ok(NMatVariant::Basic { m }),
            "generalized" => grid(s, t).map(|(s, t)| NMatVariant::Generalized { s, t }),
            "improved" => grid(s, t).map(|(s, t)| NMatVariant::Improved { s, t }),
            other => Err(CodingError::InvalidParameter(format!(
                "unknown n-matrix variant {other:?}"
            ))),
        }
    }

    /// `(s, t)` grid parameters; the basic variant is `(m, 1)`.
    pub fn grid(self) -> (usize, usize) {
        match self {
            NMatVariant::Basic { m } => (m, 1),
            NMatVariant::Generalized { s, t } | NMatVariant::Improved { s, t } => (s, t),
        }
    }

    pub fn m(self) -> usize {
        let (s, t) = self.grid();
        s * t
    }

    pub fn name(self) -> &'static str {
        match self {
            NMatVariant::Basic { .. } => "basic",
            NMatVariant::Generalized { .. } => "generalized",
            NMatVariant::Improved { .. } => "improved",
        }
    }

    /// Closed-form recovery threshold for a chain of `n` factors.
    pub fn closed_form_threshold(self, n: usize) -> usize {
        let h = n / 2;
        match self {
            NMatVariant::Basic { m } if n.is_multiple_of(2) => 2 * m.pow(h as u32) - 1,
            NMatVariant::Basic { m } => (m + 1) * m.pow(h as u32) - 1,
            NMatVariant::Generalized { s, t } => {
                let (s, t) = (s as u64, t as u64);
                let v = if n.is_multiple_of(2) {
                    s.pow(h as u32) * t.pow(h as u32 + 1) + s.pow(h as u32) * t.pow(h as u32) - t
                } else {
                    s.pow(h as u32 + 1) * t.pow(h as u32 + 1) + s.pow(h as u32) * t.pow(h as u32 + 1) - t
                };
                v as usize
            }
            NMatVariant::Improved { s, t } => {
                let (s, t) = (s as u64, t as u64);
                let v = if n.is_multiple_of(2) {
                    s.pow(h as u32) * t.pow(h as u32 + 1) + s.pow(h as u32) * t.pow(h as u32 - 1) - 1
                } else {
                    s.pow(h as u32 + 1) * t.pow(h as u32 + 1) + s.pow(h as u32) * t.pow(h as u32) - 1
                };
                v as usize
            }
        }
    }
}

impl fmt::Display for NMatVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            NMatVariant::Basic { m } => write!(f, "basic(m={m})"),
            NMatVariant::Generalized { s, t } => write!(f, "generalized(s={s},t={t})"),
            NMatVariant::Improved { s, t } => write!(f, "improved(s={s},t={t})"),
        }
    }
}

/// Block grids of the `n` factors for per-factor `A` parameters
/// `(t_i, s_i)`: `A^(i)` is `t_i x s_i` and `B^(i)` is `s_i x t_{i+1}`.
fn hetero_grids(n: usize, s: &[usize], t: &[usize]) -> Vec<(usize, usize)> {
    (0..n)
        .map(|q| {
            let i = q / 2;
            if q % 2 == 0 {
                (t[i], s[i])
            } else {
                (s[i], t[i + 1])
            }
        })
        .collect()
}

/// `w_0 = 1`, `w_{v+1} = w_v rows_v`.
fn generalized_weights(grids: &[(usize, usize)]) -> Vec<u64> {
    let mut w = vec![1u64];
    for &(rows, _) in grids {
        let last = *w.last().expect("nonempty");
        w.push(last * rows as u64);
    }
    w
}

/// `w_1 = 1`, `w_{v+1} = w_v rows_v` for `1 <= v <= n-2`,
/// `w_0 = w_{n-1} rows_{n-1}`, `w_n = w_0 rows_0`.
fn improved_weights(grids: &[(usize, usize)]) -> Vec<u64> {
    let n = grids.len();
    let mut w = vec![0u64; n + 1];
    w[1] = 1;
    for v in 1..n - 1 {
        w[v + 1] = w[v] * grids[v].0 as u64;
    }
    w[0] = w[n - 1] * grids[n - 1].0 as u64;
    w[n] = w[0] * grids[0].0 as u64;
    w
}

/// The chain code for `n` factors under `variant`.
pub fn nmat_code(n: usize, variant: NMatVariant) -> Result<ChainCode> {
    if n < 2 {
        return Err(CodingError::InvalidParameter(
            "chain length n must be at least 2".into(),
        ));
    }
    let (s, t) = variant.grid();
    if s == 0 || t == 0 {
        return Err(CodingError::InvalidParameter("m, s and t must be at least 1".into()));
    }
    let grids = hetero_grids(n, &vec![s; n.div_ceil(2)], &vec![t; n / 2 + 1]);
    let weights = match variant {
        NMatVariant::Basic { m } => (0..=n).map(|v| (m as u64).pow(v as u32 / 2)).collect(),
        NMatVariant::Generalized { .. } => generalized_weights(&grids),
        NMatVariant::Improved { .. } => improved_weights(&grids),
    };
    ChainCode::new(grids, weights)
}

/// Threshold from the exponent analysis of [`nmat_code`].
pub fn nmat_threshold(n: usize, variant: NMatVariant) -> Result<usize> {
    Ok(nmat_code(n, variant)?.recovery_threshold())
}

/// Exhaustive isolation check of every wanted coefficient.
pub fn verify_coefficient_isolation(n: usize, variant: NMatVariant) -> Result<IsolationReport> {
    Ok(nmat_code(n, variant)?.verify())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NMatSpec {
    n: usize,
    variant: NMatVariant,
    code: ChainCode,
    points: EvalPoints,
}

impl NMatSpec {
    pub fn new(field: PrimeField, n: usize, variant: NMatVariant, workers: usize) -> Result<NMatSpec> {
        Self::with_points(n, variant, EvalPoints::sequential(field, workers)?)
    }

    pub fn with_points(n: usize, variant: NMatVariant, points: EvalPoints) -> Result<NMatSpec> {
        let code = nmat_code(n, variant)?;
        let needed = code.recovery_threshold();
        if points.len() < needed {
            return Err(CodingError::InsufficientWorkers {
                needed,
                got: points.len(),
            });
        }
        Ok(NMatSpec {
            n,
            variant,
            code,
            points,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn variant(&self) -> NMatVariant {
        self.variant
    }

    pub fn code(&self) -> &ChainCode {
        &self.code
    }

    pub fn points(&self) -> &EvalPoints {
        &self.points
    }

    pub fn workers(&self) -> usize {
        self.points.len()
    }

    pub fn recovery_threshold(&self) -> usize {
        self.code.recovery_threshold()
    }

    /// Costs for a chain of `N x N` matrices.
    pub fn costs(&self, n: usize) -> CostReport {
        self.code
            .costs(&vec![(n, n); self.n], self.workers())
            .expect("square inputs are conformable")
    }
}

pub fn nmat_encode(chain: &[FieldMatrix], spec: &NMatSpec) -> Result<Vec<Share>> {
    spec.code.encode(chain, &spec.points)
}

pub fn nmat_worker(share: &Share) -> Result<WorkerProduct> {
    share.compute()
}

pub fn nmat_decode(results: &[WorkerProduct], spec: &NMatSpec) -> Result<FieldMatrix> {
    spec.code.decode(results)
}

/// Per-factor grids: `A^(i)` is `t_i x s_i`, `B^(i)` is `s_i x t_{i+1}`.
/// Only the threshold is offered for these.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeteroSpec {
    pub n: usize,
    /// `s_1..s_{ceil(n/2)}`.
    pub s: Vec<usize>,
    /// `t_1..t_{floor(n/2)+1}`.
    pub t: Vec<usize>,
}

impl HeteroSpec {
    pub fn new(n: usize, s: Vec<usize>, t: Vec<usize>) -> Result<HeteroSpec> {
        if n < 2 {
            return Err(CodingError::InvalidParameter(
                "chain length n must be at least 2".into(),
            ));
        }
        if s.len() != n.div_ceil(2) || t.len() != n / 2 + 1 {
            return Err(CodingError::InvalidParameter(format!(
                "n = {n} needs {} values of s and {} of t",
                n.div_ceil(2),
                n / 2 + 1
            )));
        }
        if s.iter().chain(&t).any(|&v| v == 0) {
            return Err(CodingError::InvalidParameter("grid parameters must be positive".into()));
        }
        Ok(HeteroSpec { n, s, t })
    }

    pub fn code(&self) -> ChainCode {
        let grids = hetero_grids(self.n, &self.s, &self.t);
        let weights = improved_weights(&grids);
        ChainCode::new(grids, weights).expect("hetero grids are conformable")
    }

    pub fn recovery_threshold(&self) -> usize {
        self.code().recovery_threshold()
    }

    /// Closed form for the improved weights:
    /// even `n`: `(t_{n/2+1} + 1/t_1) prod_{i<=n/2} s_i t_i - 1`;
    /// odd `n`: `(t_1 s_{(n+1)/2} + 1) prod_{i<=(n-1)/2} s_i t_{i+1} - 1`.
    pub fn closed_form_threshold(&self) -> usize {
        let h = self.n / 2;
        if self.n.is_multiple_of(2) {
            let prod: usize = (0..h).map(|i| self.s[i] * self.t[i]).product();
            self.t[h] * prod + prod / self.t[0] - 1
        } else {
            let prod: usize = (0..h).map(|i| self.s[i] * self.t[i + 1]).product();
            (self.t[0] * self.s[h] + 1) * prod - 1
        }
    }
}

/// Digits of `value` in the mixed radix system `radices` (least significant
/// first), or `None` if it does not fit.
pub fn mixed_radix_digits(mut value: u64, radices: &[usize]) -> Option<Vec<usize>> {
    let mut digits = Vec::with_capacity(radices.len());
    for &r in radices {
        digits.push((value % r as u64) as usize);
        value /= r as u64;
    }
    (value == 0).then_some(digits)
}

pub fn mixed_radix_value(digits: &[usize], radices: &[usize]) -> u64 {
    digits
        .iter()
        .zip(radices)
        .rev()
        .fold(0u64, |acc, (&d, &r)| acc * r as u64 + d as u64)
}

/// Radices `t, s, t, s, ...` (`n + 2` of them) whose place values are the
/// generalized weights.
pub fn generalized_radices(n: usize, s: usize, t: usize) -> Vec<usize> {
    (0..n + 2).map(|v| if v % 2 == 0 { t } else { s }).collect()
}
