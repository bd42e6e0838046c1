use clap::{Args, ValueEnum};
use matdot_core::nmatrix::{nmat_code, HeteroSpec};
use matdot_core::polydot::ExponentMap;
use matdot_core::{
    CodecSpec, CodingError, CostReport, MatDotSpec, NMatSpec, NMatVariant, PolyDotSpec, PrimeField, SubstitutionRule,
    DEFAULT_PRIME,
};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Matdot,
    Sysmatdot,
    Polydot,
    Nmat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    #[value(name = "paper")]
    Standard,
    Improved,
}

impl From<Rule> for SubstitutionRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Standard => SubstitutionRule::Standard,
            Rule::Improved => SubstitutionRule::Improved,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Basic,
    Generalized,
    Improved,
}

/// Code family and parameters shared by every subcommand that builds a code.
#[derive(Args, Debug, Clone)]
pub struct CodecArgs {
    /// Code family (may also be given with --family).
    #[arg(value_enum)]
    pub family_pos: Option<Family>,
    #[arg(long = "family", value_enum)]
    pub family: Option<Family>,
    /// Blocks per matrix.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub t: Option<usize>,
    /// Number of matrices in the chain (nmat only).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum, default_value = "paper")]
    pub rule: Rule,
    #[arg(long, value_enum, default_value = "basic")]
    pub variant: Variant,
    /// Field modulus.
    #[arg(long, default_value_t = DEFAULT_PRIME)]
    pub prime: u64,
}

/// A fully resolved code choice, before the worker count is fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Params {
    MatDot { m: usize, systematic: bool },
    PolyDot { s: usize, t: usize, rule: SubstitutionRule },
    NMat { n: usize, variant: NMatVariant },
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn factor_pairs(m: usize) -> Vec<(usize, usize)> {
    (1..=m).filter(|t| m.is_multiple_of(*t)).map(|t| (m / t, t)).collect()
}

/// `(s, t)` pairs selected by the flags: the given pair, or every
/// factorization of `m` when neither is given.
fn grid_pairs(m: Option<usize>, s: Option<usize>, t: Option<usize>) -> Result<Vec<(usize, usize)>, CliError> {
    match (m, s, t) {
        (_, Some(0), _) | (_, _, Some(0)) | (Some(0), _, _) => Err(usage("m, s and t must be positive")),
        (Some(m), Some(s), Some(t)) if s * t != m => Err(usage(format!("s * t = {} but m = {m}", s * t))),
        (_, Some(s), Some(t)) => Ok(vec![(s, t)]),
        (Some(m), Some(s), None) if m % s == 0 => Ok(vec![(s, m / s)]),
        (Some(m), None, Some(t)) if m % t == 0 => Ok(vec![(m / t, t)]),
        (Some(m), None, None) => Ok(factor_pairs(m)),
        (Some(m), _, _) => Err(usage(format!("s and t must divide m = {m}"))),
        (None, _, _) => Err(usage("--m is required unless both --s and --t are given")),
    }
}

impl CodecArgs {
    pub fn family(&self) -> Result<Family, CliError> {
        match (self.family_pos, self.family) {
            (Some(a), Some(b)) if a != b => Err(usage("conflicting families")),
            (Some(f), _) | (None, Some(f)) => Ok(f),
            (None, None) => Err(usage("a code family is required (matdot, sysmatdot, polydot, nmat)")),
        }
    }

    pub fn field(&self) -> Result<PrimeField, CliError> {
        PrimeField::new(self.prime).map_err(|e| usage(e.to_string()))
    }

    /// Every parameter combination the flags describe.
    pub fn resolve_all(&self) -> Result<Vec<Params>, CliError> {
        let family = self.family()?;
        match family {
            Family::Matdot | Family::Sysmatdot => {
                let m = self.m.ok_or_else(|| usage("--m is required"))?;
                if m == 0 {
                    return Err(usage("m must be positive"));
                }
                Ok(vec![Params::MatDot {
                    m,
                    systematic: family == Family::Sysmatdot,
                }])
            }
            Family::Polydot => Ok(grid_pairs(self.m, self.s, self.t)?
                .into_iter()
                .map(|(s, t)| Params::PolyDot {
                    s,
                    t,
                    rule: self.rule.into(),
                })
                .collect()),
            Family::Nmat => {
                let n = self.n.ok_or_else(|| usage("--n is required for nmat"))?;
                if n < 2 {
                    return Err(usage("n must be at least 2"));
                }
                match self.variant {
                    Variant::Basic => {
                        let m = self.m.ok_or_else(|| usage("--m is required"))?;
                        if m == 0 {
                            return Err(usage("m must be positive"));
                        }
                        Ok(vec![Params::NMat {
                            n,
                            variant: NMatVariant::Basic { m },
                        }])
                    }
                    v => Ok(grid_pairs(self.m, self.s, self.t)?
                        .into_iter()
                        .map(|(s, t)| {
                            let variant = if v == Variant::Generalized {
                                NMatVariant::Generalized { s, t }
                            } else {
                                NMatVariant::Improved { s, t }
                            };
                            Params::NMat { n, variant }
                        })
                        .collect()),
                }
            }
        }
    }

    /// Exactly one parameter combination.
    pub fn resolve_one(&self) -> Result<Params, CliError> {
        let mut all = self.resolve_all()?;
        if all.len() != 1 {
            return Err(usage("give --s or --t to pick a single grid"));
        }
        Ok(all.remove(0))
    }
}

impl Params {
    pub fn family_name(&self) -> &'static str {
        match self {
            Params::MatDot { systematic: false, .. } => "matdot",
            Params::MatDot { systematic: true, .. } => "sysmatdot",
            Params::PolyDot { .. } => "polydot",
            Params::NMat { .. } => "nmat",
        }
    }

    pub fn variant_name(&self) -> String {
        match self {
            Params::MatDot { systematic: false, .. } => "plain".into(),
            Params::MatDot { systematic: true, .. } => "systematic".into(),
            Params::PolyDot { rule, .. } => rule.to_string(),
            Params::NMat { variant, .. } => variant.name().into(),
        }
    }

    /// `(n, m, s, t)` for reporting.
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        match *self {
            Params::MatDot { m, .. } => (2, m, m, 1),
            Params::PolyDot { s, t, .. } => (2, s * t, s, t),
            Params::NMat { n, variant } => {
                let (s, t) = variant.grid();
                (n, s * t, s, t)
            }
        }
    }

    pub fn factors(&self) -> usize {
        self.dims().0
    }

    pub fn recovery_threshold(&self) -> Result<usize, CliError> {
        match *self {
            Params::MatDot { m, .. } => Ok(2 * m - 1),
            Params::PolyDot { s, t, rule } => Ok(ExponentMap::new(s, t, rule)?.code().recovery_threshold()),
            Params::NMat { n, variant } => Ok(nmat_code(n, variant)?.recovery_threshold()),
        }
    }

    pub fn closed_form_threshold(&self) -> usize {
        match *self {
            Params::MatDot { m, .. } => 2 * m - 1,
            Params::PolyDot { s, t, rule } => rule.closed_form_threshold(s, t),
            Params::NMat { n, variant } => variant.closed_form_threshold(n),
        }
    }

    /// Builds the code with `workers` workers (default: the threshold).
    pub fn spec(&self, field: PrimeField, workers: Option<usize>) -> Result<CodecSpec, CliError> {
        let p = match workers {
            Some(p) => p,
            None => self.recovery_threshold()?,
        };
        Ok(match *self {
            Params::MatDot { m, systematic } => CodecSpec::MatDot(MatDotSpec::new(field, m, p, systematic)?),
            Params::PolyDot { s, t, rule } => CodecSpec::PolyDot(PolyDotSpec::new(field, s * t, s, t, p, rule)?),
            Params::NMat { n, variant } => CodecSpec::NMatrix(NMatSpec::new(field, n, variant, p)?),
        })
    }

    pub fn costs(&self, field: PrimeField, workers: Option<usize>, n_dim: usize) -> Result<CostReport, CliError> {
        let spec = self.spec(field, workers)?;
        Ok(spec.costs(&vec![(n_dim, n_dim); self.factors()])?)
    }
}

/// Heterogeneous-grid chain given by per-factor vectors.
pub fn hetero(n: Option<usize>, s: &[usize], t: &[usize]) -> Result<HeteroSpec, CliError> {
    let n = n.ok_or_else(|| usage("--n is required for nmat"))?;
    HeteroSpec::new(n, s.to_vec(), t.to_vec()).map_err(|e| match e {
        CodingError::InvalidParameter(msg) => usage(msg),
        other => other.into(),
    })
}
