//! PolyDot(m, s, t) codes for `AB` with `A` cut into a `t x s` grid and `B`
//! into an `s x t` grid:
//!
//! ```text
//!   p_A(x, y) = sum A_{i,j} x^i y^j,    p_B(y, z) = sum B_{k,l} y^(s-1-k) z^l
//! ```
//!
//! `C_{i,l}` is the coefficient of `x^i y^(s-1) z^l`. A [`SubstitutionRule`]
//! collapses `x, y, z` onto powers of one variable; the recovery threshold is
//! read off the resulting exponent map rather than assumed.
//!
//! `s = m, t = 1` is MatDot; `s = 1, t = m` is the Polynomial code with
//! threshold `m^2`.

use std::fmt;
use std::str::FromStr;

use crate::chain::{ChainCode, IsolationReport};
use crate::cost::CostReport;
use crate::error::{CodingError, Result};
use crate::field::{EvalPoints, PrimeField};
use crate::matrix::FieldMatrix;
use crate::share::{Share, WorkerProduct};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum SubstitutionRule {
    /// `y = x^t`, `z = x^(t(2s-1))`; threshold `t^2 (2s-1)`.
    #[default]
    Standard,
    /// `x = y^s`, `z = y^(st)`; threshold `s t^2 + s - 1`.
    Improved,
}

impl SubstitutionRule {
    /// Powers substituted for `(x, y, z)`.
    pub fn exponents(self, s: usize, t: usize) -> (u64, u64, u64) {
        let (s, t) = (s as u64, t as u64);
        match self {
            SubstitutionRule::Standard => (1, t, t * (2 * s - 1)),
            SubstitutionRule::Improved => (s, 1, s * t),
        }
    }

    /// Closed-form threshold the exponent map is expected to produce.
    pub fn closed_form_threshold(self, s: usize, t: usize) -> usize {
        match self {
            SubstitutionRule::Standard => t * t * (2 * s - 1),
            SubstitutionRule::Improved => s * t * t + s - 1,
        }
    }

    /// The summary-table value for this rule, which for the improved rule
    /// (`t^2 s - s - 1`) disagrees with the exponent map and is only reported.
    pub fn table_listed_threshold(self, s: usize, t: usize) -> i64 {
        let (s, t) = (s as i64, t as i64);
        match self {
            SubstitutionRule::Standard => t * t * (2 * s - 1),
            SubstitutionRule::Improved => t * t * s - s - 1,
        }
    }
}

impl fmt::Display for SubstitutionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SubstitutionRule::Standard => "paper",
            SubstitutionRule::Improved => "improved",
        })
    }
}

impl FromStr for SubstitutionRule {
    type Err = CodingError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(SubstitutionRule::Standard),
            "improved" => Ok(SubstitutionRule::Improved),
            other => Err(CodingError::InvalidParameter(format!(
                "unknown substitution rule {other:?}"
            ))),
        }
    }
}

/// Index tuple `(i, j, k, l)` to single-variable exponent under a rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExponentMap {
    pub s: usize,
    pub t: usize,
    pub e_x: u64,
    pub e_y: u64,
    pub e_z: u64,
}

impl ExponentMap {
    pub fn new(s: usize, t: usize, rule: SubstitutionRule) -> Result<ExponentMap> {
        if s == 0 || t == 0 {
            return Err(CodingError::InvalidParameter("s and t must be at least 1".into()));
        }
        let (e_x, e_y, e_z) = rule.exponents(s, t);
        Ok(ExponentMap { s, t, e_x, e_y, e_z })
    }

    /// Exponent of the term `A_{i,j} B_{k,l}`.
    pub fn exponent(&self, i: usize, j: usize, k: usize, l: usize) -> u64 {
        i as u64 * self.e_x + (self.s - 1 + j - k) as u64 * self.e_y + l as u64 * self.e_z
    }

    /// Exponent holding `C_{i,l}`.
    pub fn wanted(&self, i: usize, l: usize) -> u64 {
        self.exponent(i, 0, 0, l)
    }

    pub fn code(&self) -> ChainCode {
        ChainCode::new(
            vec![(self.t, self.s), (self.s, self.t)],
            vec![self.e_x, self.e_y, self.e_z],
        )
        .expect("t x s times s x t grids are conformable")
    }
}

/// Threshold from the exponent map: largest exponent plus one.
pub fn polydot_threshold(s: usize, t: usize, rule: SubstitutionRule) -> Result<usize> {
    Ok(ExponentMap::new(s, t, rule)?.code().recovery_threshold())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentMapReport {
    pub isolation: IsolationReport,
    /// For the standard rule: problems with `(a, b, c) -> a + t b + t(2s-1) c`
    /// being a bijection from `[0,t) x [0,2s-1) x [0,t)` onto `[0, t^2(2s-1))`.
    pub bijection_violations: Vec<String>,
}

impl ExponentMapReport {
    pub fn is_clean(&self) -> bool {
        self.isolation.is_clean() && self.bijection_violations.is_empty()
    }
}

/// Exhaustive check of the exponent map over every `(i, j, k, l)`.
pub fn verify_exponent_map(s: usize, t: usize, rule: SubstitutionRule) -> Result<ExponentMapReport> {
    let map = ExponentMap::new(s, t, rule)?;
    let isolation = map.code().verify();
    let mut bijection_violations = Vec::new();
    if rule == SubstitutionRule::Standard {
        let size = t * t * (2 * s - 1);
        let mut hit = vec![0usize; size];
        for a in 0..t {
            for b in 0..2 * s - 1 {
                for c in 0..t {
                    let v = a + t * b + t * (2 * s - 1) * c;
                    match hit.get_mut(v) {
                        Some(h) => *h += 1,
                        None => bijection_violations.push(format!("f({a},{b},{c}) = {v} is out of range")),
                    }
                }
            }
        }
        for (v, &h) in hit.iter().enumerate() {
            if h != 1 {
                bijection_violations.push(format!("value {v} has {h} preimages"));
            }
        }
    }
    Ok(ExponentMapReport {
        isolation,
        bijection_violations,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyDotSpec {
    map: ExponentMap,
    rule: SubstitutionRule,
    code: ChainCode,
    points: EvalPoints,
}

impl PolyDotSpec {
    pub fn new(
        field: PrimeField,
        m: usize,
        s: usize,
        t: usize,
        workers: usize,
        rule: SubstitutionRule,
    ) -> Result<Self> {
        Self::with_points(m, s, t, EvalPoints::sequential(field, workers)?, rule)
    }

    pub fn with_points(m: usize, s: usize, t: usize, points: EvalPoints, rule: SubstitutionRule) -> Result<Self> {
        if s * t != m {
            return Err(CodingError::InvalidParameter(format!("s * t = {} but m = {m}", s * t)));
        }
        let map = ExponentMap::new(s, t, rule)?;
        let code = map.code();
        let needed = code.recovery_threshold();
        if points.len() < needed {
            return Err(CodingError::InsufficientWorkers {
                needed,
                got: points.len(),
            });
        }
        Ok(PolyDotSpec {
            map,
            rule,
            code,
            points,
        })
    }

    pub fn s(&self) -> usize {
        self.map.s
    }

    pub fn t(&self) -> usize {
        self.map.t
    }

    pub fn m(&self) -> usize {
        self.map.s * self.map.t
    }

    pub fn rule(&self) -> SubstitutionRule {
        self.rule
    }

    pub fn exponent_map(&self) -> &ExponentMap {
        &self.map
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

    /// Costs for an `N x N` times `N x N` product.
    pub fn costs(&self, n: usize) -> CostReport {
        self.code
            .costs(&[(n, n), (n, n)], self.workers())
            .expect("square inputs are conformable")
    }
}

pub fn polydot_encode(a: &FieldMatrix, b: &FieldMatrix, spec: &PolyDotSpec) -> Result<Vec<Share>> {
    spec.code.encode(&[a.clone(), b.clone()], &spec.points)
}

pub fn polydot_worker(share: &Share) -> Result<WorkerProduct> {
    share.compute()
}

pub fn polydot_decode(results: &[WorkerProduct], spec: &PolyDotSpec) -> Result<FieldMatrix> {
    spec.code.decode(results)
}

pub fn polydot_costs(spec: &PolyDotSpec, n: usize) -> CostReport {
    spec.costs(n)
}

/// One row of the threshold/communication trade-off for a fixed `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TradeoffPoint {
    pub s: usize,
    pub t: usize,
    pub recovery_threshold: usize,
    pub per_worker_out_symbols: u64,
    pub fusion_total_symbols: u64,
}

/// Every factor pair `st = m`, sorted by threshold, for `N x N` inputs.
pub fn tradeoff(m: usize, n: usize, rule: SubstitutionRule) -> Result<Vec<TradeoffPoint>> {
    if m == 0 {
        return Err(CodingError::InvalidParameter("m must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for t in (1..=m).filter(|t| m.is_multiple_of(*t)) {
        let s = m / t;
        let code = ExponentMap::new(s, t, rule)?.code();
        let k = code.recovery_threshold();
        let cost = code.costs(&[(n, n), (n, n)], k)?;
        rows.push(TradeoffPoint {
            s,
            t,
            recovery_threshold: k,
            per_worker_out_symbols: cost.per_worker_out_symbols,
            fusion_total_symbols: cost.fusion_in_symbols,
        });
    }
    rows.sort_by_key(|r| (r.recovery_threshold, r.t));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matdot::{matdot_decode, matdot_encode, MatDotSpec};
    use crate::matrix::{split_columns, split_rows};
    use proptest::prelude::*;
    use rand::seq::index::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_pair(seed: u64, n: usize) -> (FieldMatrix, FieldMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = PrimeField::default();
        (
            FieldMatrix::random(f, n, n, &mut rng),
            FieldMatrix::random(f, n, n, &mut rng),
        )
    }

    fn compute(shares: &[Share]) -> Vec<WorkerProduct> {
        shares.iter().map(|s| polydot_worker(s).unwrap()).collect()
    }

    #[test]
    fn standard_rule_thresholds() {
        use SubstitutionRule::*;
        assert_eq!(polydot_threshold(2, 2, Standard).unwrap(), 12);
        assert_eq!(polydot_threshold(1, 1, Standard).unwrap(), 1);
        for m in 1..=8 {
            assert_eq!(polydot_threshold(m, 1, Standard).unwrap(), 2 * m - 1);
            assert_eq!(polydot_threshold(1, m, Standard).unwrap(), m * m);
        }
        assert_eq!(polydot_threshold(2, 2, Improved).unwrap(), 9);
    }

    #[test]
    fn two_by_two_map_example() {
        let report = verify_exponent_map(2, 2, SubstitutionRule::Standard).unwrap();
        assert!(report.is_clean(), "{report:?}");
        let map = ExponentMap::new(2, 2, SubstitutionRule::Standard).unwrap();
        // (i, s-1+j-k, l) = (1, 2, 1)
        assert_eq!(map.exponent(1, 1, 0, 1), 11);
        assert_eq!(report.isolation.max_exponent, 11);
    }

    #[test]
    fn trivial_map() {
        let report = verify_exponent_map(1, 1, SubstitutionRule::Standard).unwrap();
        assert!(report.is_clean());
        assert_eq!(report.isolation.wanted, vec![0]);
    }

    #[test]
    fn improved_rule_is_collision_free_when_s_exceeds_t() {
        let report = verify_exponent_map(3, 2, SubstitutionRule::Improved).unwrap();
        assert!(report.is_clean(), "{:?}", report.isolation.violations);
        assert_eq!(report.isolation.recovery_threshold, 3 * 4 + 3 - 1);
    }

    #[test]
    fn spec_validation() {
        let f = PrimeField::default();
        assert!(matches!(
            PolyDotSpec::new(f, 4, 2, 3, 20, SubstitutionRule::Standard),
            Err(CodingError::InvalidParameter(_))
        ));
        assert_eq!(
            PolyDotSpec::new(f, 4, 2, 2, 11, SubstitutionRule::Standard).unwrap_err(),
            CodingError::InsufficientWorkers { needed: 12, got: 11 }
        );
        assert!("bogus".parse::<SubstitutionRule>().is_err());
        assert_eq!(
            "improved".parse::<SubstitutionRule>().unwrap(),
            SubstitutionRule::Improved
        );
    }

    #[test]
    fn matdot_special_case_is_bit_identical() {
        let f = PrimeField::default();
        let (a, b) = random_pair(1, 6);
        for m in 1..=4 {
            let pd = PolyDotSpec::new(f, m, m, 1, 2 * m + 1, SubstitutionRule::Standard).unwrap();
            let md = MatDotSpec::new(f, m, 2 * m + 1, false).unwrap();
            let ps = polydot_encode(&a, &b, &pd).unwrap();
            let ms = matdot_encode(&a, &b, &md).unwrap();
            assert_eq!(ps, ms);
            let pr = compute(&ps);
            assert_eq!(pr, compute(&ms));
            assert_eq!(
                polydot_decode(&pr[2..], &pd).unwrap(),
                matdot_decode(&pr[2..], &md).unwrap()
            );
        }
    }

    #[test]
    fn polynomial_code_special_case() {
        let f = PrimeField::default();
        let (a, b) = random_pair(2, 4);
        let spec = PolyDotSpec::new(f, 2, 1, 2, 6, SubstitutionRule::Standard).unwrap();
        assert_eq!(spec.recovery_threshold(), 4);
        let shares = polydot_encode(&a, &b, &spec).unwrap();
        // worker r holds A_0 + A_1 r and B_0 + B_1 r^2 (A in row blocks, B in column blocks)
        let ga = split_rows(&a, 2).unwrap().blocks;
        let gb = split_columns(&b, 2).unwrap().blocks;
        for s in &shares {
            let x = s.x;
            assert_eq!(s.parts[0], ga[0].add(&ga[1].scale(x)).unwrap());
            assert_eq!(s.parts[1], gb[0].add(&gb[1].scale(f.mul(x, x))).unwrap());
        }
        let r = compute(&shares);
        assert_eq!(polydot_decode(&r[2..], &spec).unwrap(), a.matmul(&b).unwrap());
    }

    #[test]
    fn zero_inputs_give_zero_shares() {
        let f = PrimeField::default();
        let z = FieldMatrix::zeros(f, 4, 4);
        let spec = PolyDotSpec::new(f, 4, 2, 2, 12, SubstitutionRule::Standard).unwrap();
        assert!(polydot_encode(&z, &z, &spec)
            .unwrap()
            .iter()
            .all(|s| s.parts.iter().all(FieldMatrix::is_zero)));
    }

    #[test]
    fn example_grid_any_twelve_of_fourteen() {
        let f = PrimeField::default();
        let (a, b) = random_pair(3, 8);
        let ab = a.matmul(&b).unwrap();
        let spec = PolyDotSpec::new(f, 4, 2, 2, 14, SubstitutionRule::Standard).unwrap();
        let all = compute(&polydot_encode(&a, &b, &spec).unwrap());
        for skip1 in 0..14 {
            for skip2 in skip1 + 1..14 {
                let subset: Vec<_> = all
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != skip1 && *i != skip2)
                    .map(|(_, r)| r.clone())
                    .collect();
                assert_eq!(polydot_decode(&subset, &spec).unwrap(), ab);
            }
        }
        assert_eq!(
            polydot_decode(&all[..11], &spec).unwrap_err(),
            CodingError::RecoveryThresholdNotMet { needed: 12, got: 11 }
        );
    }

    #[test]
    fn improved_rule_decodes_at_exact_threshold() {
        let f = PrimeField::default();
        let (a, b) = random_pair(4, 12);
        let ab = a.matmul(&b).unwrap();
        for (s, t) in [(2, 2), (3, 2), (2, 3), (4, 1), (1, 3)] {
            let k = s * t * t + s - 1;
            let spec = PolyDotSpec::new(f, s * t, s, t, k, SubstitutionRule::Improved).unwrap();
            assert_eq!(spec.recovery_threshold(), k);
            let all = compute(&polydot_encode(&a, &b, &spec).unwrap());
            assert_eq!(polydot_decode(&all, &spec).unwrap(), ab, "s={s} t={t}");
        }
    }

    #[test]
    fn costs_match_closed_forms() {
        let f = PrimeField::default();
        let n = 12;
        for (s, t) in [(6, 1), (3, 2), (2, 3), (1, 6)] {
            let spec = PolyDotSpec::new(f, 6, s, t, 80, SubstitutionRule::Standard).unwrap();
            let c = polydot_costs(&spec, n);
            let k = t * t * (2 * s - 1);
            assert_eq!(c.per_worker_in_symbols, (2 * n * n / 6) as u64);
            assert_eq!(c.per_worker_out_symbols, (n * n / (t * t)) as u64);
            assert_eq!(c.fusion_in_symbols, (k * n * n / (t * t)) as u64);
            assert_eq!(c.master_out_symbols, 80 * (2 * n * n / 6) as u64);
        }
        let spec = PolyDotSpec::new(f, 3, 3, 1, 5, SubstitutionRule::Standard).unwrap();
        assert_eq!(
            polydot_costs(&spec, 0),
            CostReport {
                workers: 5,
                recovery_threshold: 5,
                ..Default::default()
            }
        );
    }

    #[test]
    fn tradeoff_is_monotone_for_36() {
        let rows = tradeoff(36, 36, SubstitutionRule::Standard).unwrap();
        assert_eq!(rows.len(), 9);
        assert_eq!((rows[0].s, rows[0].t, rows[0].recovery_threshold), (36, 1, 71));
        assert_eq!((rows[8].s, rows[8].t, rows[8].recovery_threshold), (1, 36, 1296));
        assert_eq!(rows[8].fusion_total_symbols, 36 * 36);
        assert_eq!(rows[0].fusion_total_symbols, 71 * 36 * 36);
        assert_eq!(rows[4].fusion_total_symbols, 11 * 36 * 36);
        for w in rows.windows(2) {
            assert!(w[0].recovery_threshold < w[1].recovery_threshold);
            assert!(w[0].per_worker_out_symbols > w[1].per_worker_out_symbols);
            assert!(w[0].fusion_total_symbols > w[1].fusion_total_symbols);
        }
        assert_eq!(tradeoff(1, 3, SubstitutionRule::Standard).unwrap().len(), 1);
    }

    #[test]
    fn closed_forms_hold_for_small_grids() {
        for s in 1..=6 {
            for t in 1..=6 {
                for rule in [SubstitutionRule::Standard, SubstitutionRule::Improved] {
                    assert_eq!(polydot_threshold(s, t, rule).unwrap(), rule.closed_form_threshold(s, t));
                    assert!(
                        verify_exponent_map(s, t, rule).unwrap().is_clean(),
                        "s={s} t={t} {rule}"
                    );
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn random_threshold_subsets_decode(
            seed in any::<u64>(),
            pair in prop::sample::select(vec![(2, 1), (1, 2), (4, 1), (2, 2), (1, 4), (6, 1), (3, 2), (2, 3), (1, 6)]),
            improved in any::<bool>(),
        ) {
            let (s, t) = pair;
            let rule = if improved { SubstitutionRule::Improved } else { SubstitutionRule::Standard };
            let f = PrimeField::default();
            let k = rule.closed_form_threshold(s, t);
            let spec = PolyDotSpec::new(f, s * t, s, t, k + 2, rule).unwrap();
            let (a, b) = random_pair(seed, 7);
            let ab = a.matmul(&b).unwrap();
            let all = compute(&polydot_encode(&a, &b, &spec).unwrap());
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            for _ in 0..4 {
                let subset: Vec<_> = sample(&mut rng, k + 2, k).into_iter().map(|i| all[i].clone()).collect();
                prop_assert_eq!(&polydot_decode(&subset, &spec).unwrap(), &ab);
            }
        }
    }
}
