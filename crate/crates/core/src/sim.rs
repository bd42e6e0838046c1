//! Seeded simulation of one master -> workers -> fusion round.
//!
//! Completion times are simulated, never measured: worker `r` draws a
//! failure coin and a shifted-exponential service time from a ChaCha8 stream
//! seeded by the model, in worker-id order, and both draws are made for every
//! worker so that the timeline of worker `r` does not depend on `P`.

use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::cost::CostReport;
use crate::error::{CodingError, Result};
use crate::field::PrimeField;
use crate::matdot::{matdot_decode, matdot_encode, systematic_decode, MatDotSpec};
use crate::matrix::{chain_product, FieldMatrix};
use crate::nmatrix::{nmat_decode, nmat_encode, NMatSpec};
use crate::polydot::{polydot_decode, polydot_encode, PolyDotSpec};
use crate::share::{Share, WorkerProduct};

#[derive(Clone, Debug, PartialEq)]
pub struct StragglerModel {
    /// Minimum service time.
    pub shift: f64,
    /// Rate of the exponential tail.
    pub rate: f64,
    /// Probability that a worker never returns.
    pub fail_prob: f64,
    pub seed: u64,
    /// 1-based ids of workers that never return regardless of the draw.
    pub forced_stragglers: Vec<usize>,
}

impl Default for StragglerModel {
    fn default() -> Self {
        StragglerModel {
            shift: 1.0,
            rate: 1.0,
            fail_prob: 0.0,
            seed: 0,
            forced_stragglers: Vec::new(),
        }
    }
}

impl StragglerModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.shift >= 0.0 && self.shift.is_finite()) {
            return Err(CodingError::InvalidParameter(format!(
                "shift must be >= 0, got {}",
                self.shift
            )));
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(CodingError::InvalidParameter(format!(
                "rate must be > 0, got {}",
                self.rate
            )));
        }
        if !(0.0..=1.0).contains(&self.fail_prob) {
            return Err(CodingError::InvalidParameter(format!(
                "fail_prob must be in [0, 1], got {}",
                self.fail_prob
            )));
        }
        Ok(())
    }

    /// Finish time of each worker `1..=workers`; `None` for failures.
    pub fn sample(&self, workers: usize) -> Result<Vec<Option<f64>>> {
        self.validate()?;
        let exp = Exp::new(self.rate).map_err(|e| CodingError::InvalidParameter(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        Ok((1..=workers)
            .map(|r| {
                let u: f64 = rng.gen();
                let tail = exp.sample(&mut rng);
                let failed = u < self.fail_prob || self.forced_stragglers.contains(&r);
                (!failed).then_some(self.shift + tail)
            })
            .collect())
    }
}

/// Seed for trial `trial` of a sweep seeded with `seed`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng.next_u64()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CodecSpec {
    MatDot(MatDotSpec),
    PolyDot(PolyDotSpec),
    NMatrix(NMatSpec),
}

impl CodecSpec {
    pub fn workers(&self) -> usize {
        match self {
            CodecSpec::MatDot(s) => s.workers(),
            CodecSpec::PolyDot(s) => s.workers(),
            CodecSpec::NMatrix(s) => s.workers(),
        }
    }

    pub fn recovery_threshold(&self) -> usize {
        match self {
            CodecSpec::MatDot(s) => s.recovery_threshold(),
            CodecSpec::PolyDot(s) => s.recovery_threshold(),
            CodecSpec::NMatrix(s) => s.recovery_threshold(),
        }
    }

    /// Number of matrices in the product.
    pub fn factors(&self) -> usize {
        match self {
            CodecSpec::NMatrix(s) => s.n(),
            _ => 2,
        }
    }

    pub fn field(&self) -> PrimeField {
        match self {
            CodecSpec::MatDot(s) => s.field(),
            CodecSpec::PolyDot(s) => s.points().field(),
            CodecSpec::NMatrix(s) => s.points().field(),
        }
    }

    fn check_inputs(&self, inputs: &[FieldMatrix]) -> Result<()> {
        if inputs.len() != self.factors() {
            return Err(CodingError::Shape(format!(
                "{} input matrices for a product of {}",
                inputs.len(),
                self.factors()
            )));
        }
        Ok(())
    }

    pub fn encode(&self, inputs: &[FieldMatrix]) -> Result<Vec<Share>> {
        self.check_inputs(inputs)?;
        match self {
            CodecSpec::MatDot(s) => matdot_encode(&inputs[0], &inputs[1], s),
            CodecSpec::PolyDot(s) => polydot_encode(&inputs[0], &inputs[1], s),
            CodecSpec::NMatrix(s) => nmat_encode(inputs, s),
        }
    }

    /// Decodes and reports how many interpolation solves it took.
    pub fn decode(&self, results: &[WorkerProduct]) -> Result<(FieldMatrix, usize)> {
        match self {
            CodecSpec::MatDot(s) if s.is_systematic() => {
                systematic_decode(results, s).map(|(c, st)| (c, st.interpolations))
            }
            CodecSpec::MatDot(s) => matdot_decode(results, s).map(|c| (c, 1)),
            CodecSpec::PolyDot(s) => polydot_decode(results, s).map(|c| (c, 1)),
            CodecSpec::NMatrix(s) => nmat_decode(results, s).map(|c| (c, 1)),
        }
    }

    pub fn oracle(&self, inputs: &[FieldMatrix]) -> Result<FieldMatrix> {
        self.check_inputs(inputs)?;
        chain_product(inputs)
    }

    /// Costs for inputs of the given shapes.
    pub fn costs(&self, shapes: &[(usize, usize)]) -> Result<CostReport> {
        if shapes.len() != self.factors() {
            return Err(CodingError::Shape(format!(
                "{} shapes for a product of {}",
                shapes.len(),
                self.factors()
            )));
        }
        match self {
            CodecSpec::MatDot(s) => Ok(s.costs(shapes[0].0, shapes[0].1, shapes[1].1)),
            CodecSpec::PolyDot(s) => s.code().costs(shapes, s.workers()),
            CodecSpec::NMatrix(s) => s.code().costs(shapes, s.workers()),
        }
    }

    /// Prefix of the completion-ordered results handed to the decoder.
    ///
    /// The systematic code takes the shortest prefix of at most `2m - 1`
    /// results that holds every systematic worker, else the first `2m - 1`.
    pub fn select<'a>(&self, ordered: &'a [WorkerProduct]) -> &'a [WorkerProduct] {
        let k = self.recovery_threshold();
        if let CodecSpec::MatDot(s) = self {
            if s.is_systematic() {
                let sys = &s.points().as_slice()[..s.m()];
                let mut missing = sys.len();
                for (idx, r) in ordered.iter().enumerate().take(k) {
                    if sys.contains(&r.x) {
                        missing -= 1;
                        if missing == 0 {
                            return &ordered[..=idx];
                        }
                    }
                }
            }
        }
        &ordered[..k.min(ordered.len())]
    }

    pub fn label(&self) -> String {
        match self {
            CodecSpec::MatDot(s) if s.is_systematic() => format!("sysmatdot(m={})", s.m()),
            CodecSpec::MatDot(s) => format!("matdot(m={})", s.m()),
            CodecSpec::PolyDot(s) => format!("polydot(s={},t={},rule={})", s.s(), s.t(), s.rule()),
            CodecSpec::NMatrix(s) => format!("nmat(n={},{})", s.n(), s.variant()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecodeStatus {
    Success,
    ThresholdFailure { needed: usize, got: usize },
}

impl fmt::Display for DecodeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeStatus::Success => f.write_str("success"),
            DecodeStatus::ThresholdFailure { .. } => f.write_str("threshold_failure"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundOutcome {
    /// Successful workers with finish times, earliest first, ties by id.
    pub completion_order: Vec<(usize, f64)>,
    pub failed: Vec<usize>,
    /// Workers whose results the decoder used.
    pub used_workers: Vec<usize>,
    pub decode_status: DecodeStatus,
    /// Finish time of the last used worker, when decoding succeeded.
    pub wall_time: Option<f64>,
    pub interpolations: usize,
    pub costs: CostReport,
    pub decoded: Option<FieldMatrix>,
}

impl RoundOutcome {
    pub fn succeeded(&self) -> bool {
        self.decode_status == DecodeStatus::Success
    }
}

/// Runs one round and checks any decoded product against the oracle.
pub fn simulate_round(spec: &CodecSpec, inputs: &[FieldMatrix], model: &StragglerModel) -> Result<RoundOutcome> {
    let shares = spec.encode(inputs)?;
    let times = model.sample(spec.workers())?;
    let results: Vec<Option<WorkerProduct>> = shares
        .par_iter()
        .zip(&times)
        .map(|(share, t)| t.map(|_| share.compute()).transpose())
        .collect::<Result<_>>()?;

    let mut order: Vec<(usize, f64)> = times
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.map(|t| (i + 1, t)))
        .collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let failed: Vec<usize> = times
        .iter()
        .enumerate()
        .filter(|(_, t)| t.is_none())
        .map(|(i, _)| i + 1)
        .collect();
    let ordered: Vec<WorkerProduct> = order
        .iter()
        .map(|&(w, _)| results[w - 1].clone().expect("finished worker has a result"))
        .collect();

    let used = spec.select(&ordered);
    let used_workers: Vec<usize> = used.iter().map(|r| r.worker).collect();
    let shapes: Vec<_> = inputs.iter().map(FieldMatrix::shape).collect();
    let costs = spec.costs(&shapes)?;

    let mut outcome = RoundOutcome {
        completion_order: order.clone(),
        failed,
        used_workers,
        decode_status: DecodeStatus::Success,
        wall_time: None,
        interpolations: 0,
        costs,
        decoded: None,
    };
    match spec.decode(used) {
        Ok((c, interpolations)) => {
            let expected = spec.oracle(inputs)?;
            if c != expected {
                return Err(CodingError::CorrectnessViolation(format!(
                    "{} decoded a wrong product from workers {:?}",
                    spec.label(),
                    outcome.used_workers
                )));
            }
            outcome.wall_time = Some(order[used.len() - 1].1);
            outcome.interpolations = interpolations;
            outcome.decoded = Some(c);
        }
        Err(CodingError::RecoveryThresholdNotMet { needed, got }) => {
            outcome.decode_status = DecodeStatus::ThresholdFailure { needed, got };
        }
        Err(e) => return Err(e),
    }
    Ok(outcome)
}

/// `count` random `N x N` matrices.
pub fn random_inputs(field: PrimeField, count: usize, n: usize, seed: u64) -> Vec<FieldMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| FieldMatrix::random(field, n, n, &mut rng)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepStats {
    pub label: String,
    pub workers: usize,
    pub recovery_threshold: usize,
    pub trials: usize,
    pub successes: usize,
    /// Mean wall time over successful trials.
    pub mean_wall_time: Option<f64>,
    pub costs: CostReport,
}

impl SweepStats {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// `trials` rounds per spec on random `N x N` inputs. Trial `i` uses the
/// straggler seed `trial_seed(model.seed, i)` and the input seed
/// `trial_seed(input_seed, i)`, so every spec sees the same timelines.
pub fn sweep(
    specs: &[CodecSpec],
    n: usize,
    model: &StragglerModel,
    trials: usize,
    input_seed: u64,
) -> Result<Vec<SweepStats>> {
    if trials == 0 {
        return Err(CodingError::InvalidParameter("trials must be at least 1".into()));
    }
    specs
        .iter()
        .map(|spec| {
            let mut successes = 0;
            let mut wall = 0.0;
            let mut costs = CostReport::default();
            for trial in 0..trials as u64 {
                let inputs = random_inputs(spec.field(), spec.factors(), n, trial_seed(input_seed, trial));
                let m = StragglerModel {
                    seed: trial_seed(model.seed, trial),
                    ..model.clone()
                };
                let out = simulate_round(spec, &inputs, &m)?;
                costs = out.costs;
                if let Some(t) = out.wall_time {
                    successes += 1;
                    wall += t;
                }
            }
            Ok(SweepStats {
                label: spec.label(),
                workers: spec.workers(),
                recovery_threshold: spec.recovery_threshold(),
                trials,
                successes,
                mean_wall_time: (successes > 0).then(|| wall / successes as f64),
                costs,
            })
        })
        .collect()
}
