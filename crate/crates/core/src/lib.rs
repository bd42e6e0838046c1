//! Straggler-tolerant coded matrix multiplication over GF(p): MatDot,
//! systematic MatDot, PolyDot and n-matrix chain codes, plus a seeded
//! master/worker/fusion simulator.
//!
//! Every code evaluates matrix polynomials at distinct field points, one per
//! worker; the fusion node interpolates from any `k` (the recovery threshold)
//! worker products and reads the answer off fixed coefficients.

pub mod chain;
pub mod cost;
pub mod error;
pub mod field;
pub mod matdot;
pub mod matrix;
pub mod nmatrix;
pub mod poly;
pub mod polydot;
pub mod share;
pub mod sim;

pub use chain::{ChainCode, IsolationReport};
pub use cost::CostReport;
pub use error::{CodingError, Result};
pub use field::{EvalPoints, FieldElement, PrimeField, DEFAULT_PRIME};
pub use matdot::{DecodePath, DecodeStats, MatDotSpec};
pub use matrix::{chain_product, FieldMatrix, SplitSpec};
pub use nmatrix::{HeteroSpec, NMatSpec, NMatVariant};
pub use polydot::{ExponentMap, PolyDotSpec, SubstitutionRule, TradeoffPoint};
pub use share::{Share, WorkerProduct};
pub use sim::{CodecSpec, DecodeStatus, RoundOutcome, StragglerModel, SweepStats};
