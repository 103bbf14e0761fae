//! Morin classification of corank-one germs.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{conjugate, random_diffeo};
use crate::germ::{corank_at_origin, LambdaData, MapJet, SingularChainReport};
use crate::jet::Jet;
use crate::matrix::RatMatrix;
use crate::rat::Rat;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    /// `df_0` has full rank.
    Regular,
    Morin { r: usize },
    NotCorankOne { corank: usize },
    /// `rank d(Λ, ..., η^j Λ)_0` is `actual` instead of `expected`.
    DegenerateRank { j: usize, expected: usize, actual: usize },
    /// `η^j Λ(0) = 0` for every `1 <= j <= r_max`.
    FlatToOrder { r_max: usize },
    TruncationInsufficient { required_order: u32 },
}

impl Verdict {
    pub fn morin_order(&self) -> Option<usize> {
        match self {
            Verdict::Morin { r } => Some(*r),
            _ => None,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Regular => write!(f, "regular"),
            Verdict::Morin { r } => write!(f, "{r}-Morin"),
            Verdict::NotCorankOne { corank } => write!(f, "corank {corank}, not corank one"),
            Verdict::DegenerateRank { j, expected, actual } => {
                write!(f, "degenerate: rank at step {j} is {actual}, expected {expected}")
            }
            Verdict::FlatToOrder { r_max } => write!(f, "flat up to r = {r_max}"),
            Verdict::TruncationInsufficient { required_order } => {
                write!(f, "truncation order too low, need {required_order}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorinResult {
    pub verdict: Verdict,
    /// Present whenever the chain was computed, i.e. for corank-one input
    /// with enough truncation order.
    pub evidence: Option<SingularChainReport>,
}

fn check_dims(f: &MapJet) -> Result<()> {
    if f.source_dim() >= f.target_dim() {
        return Err(Error::Dimension(format!(
            "classification needs m < n, got m = {}, n = {}",
            f.source_dim(),
            f.target_dim()
        )));
    }
    Ok(())
}

/// Decides whether `f` is `r`-Morin for some `r <= r_max`.
pub fn morin_classify(f: &MapJet, r_max: usize) -> Result<MorinResult> {
    check_dims(f)?;
    if r_max == 0 {
        return Err(Error::InvalidArgument("r_max must be positive".into()));
    }
    let required_order = r_max as u32 + 2;
    if f.order() < required_order {
        return Ok(MorinResult { verdict: Verdict::TruncationInsufficient { required_order }, evidence: None });
    }
    let corank = corank_at_origin(f);
    if corank == 0 {
        return Ok(MorinResult { verdict: Verdict::Regular, evidence: None });
    }
    if corank >= 2 {
        return Ok(MorinResult { verdict: Verdict::NotCorankOne { corank }, evidence: None });
    }
    let ld = LambdaData::new(&f.truncate(required_order))?;
    let chain = ld.singular_chain(r_max)?;
    let verdict = verdict_from_chain(&chain, ld.lambda_len(), f.source_dim(), r_max)?;
    Ok(MorinResult { verdict, evidence: Some(chain) })
}

fn verdict_from_chain(chain: &SingularChainReport, width: usize, m: usize, r_max: usize) -> Result<Verdict> {
    let Some(r) = (1..=r_max).find(|&j| !chain.vanishes(j)) else {
        return Ok(Verdict::FlatToOrder { r_max });
    };
    for j in 0..r {
        let expected = (j + 1) * width;
        if chain.chain_ranks[j] != expected {
            return Ok(Verdict::DegenerateRank { j, expected, actual: chain.chain_ranks[j] });
        }
    }
    if m < r * width {
        return Err(Error::Inconsistent(format!("rank {} exceeds the source dimension {m}", r * width)));
    }
    Ok(Verdict::Morin { r })
}

/// True when the first `m-1` components are exactly `x_1, ..., x_{m-1}`.
pub fn is_normalized(f: &MapJet) -> bool {
    let m = f.source_dim();
    f.target_dim() >= m
        && (0..m - 1).all(|k| Jet::var(m, f.order(), k).map(|v| &v == f.component(k)).unwrap_or(false))
}

/// Outcome of the criterion for germs `(x_1, ..., x_{m-1}, f_m, ..., f_n)`
/// phrased with `F = ∂(f_m, ..., f_n)/∂x_m` and its `x_m`-derivatives.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedCheck {
    pub verdict: Verdict,
    /// `F^{(j)}(0)` for `j = 0..=r_max`.
    pub derivative_values: Vec<Vec<Rat>>,
    /// `rank d(F, F', ..., F^{(j)})_0` for `j = 0..=r_max`.
    pub ranks: Vec<usize>,
}

/// Classification of a germ already written as `(x_1, ..., x_{m-1}, f_m, ..., f_n)`,
/// computed only from `x_m`-derivatives of the last components.
pub fn morin_classify_normalized(f: &MapJet, r_max: usize) -> Result<NormalizedCheck> {
    check_dims(f)?;
    if !is_normalized(f) {
        return Err(Error::NotApplicable("germ is not of the form (x1, ..., x_{m-1}, ...)".into()));
    }
    let m = f.source_dim();
    let last = m - 1;
    let required_order = r_max as u32 + 2;
    if f.order() < required_order {
        return Err(Error::Truncation { have: f.order(), need: required_order });
    }
    let mut cur: Vec<Jet> = f.components()[m - 1..].iter().map(|c| c.derive_unchecked(last)).collect();
    let width = cur.len();
    if cur.iter().any(|c| !c.constant_term().is_zero()) {
        return Ok(NormalizedCheck {
            verdict: Verdict::Regular,
            derivative_values: vec![cur.iter().map(Jet::constant_term).collect()],
            ranks: Vec::new(),
        });
    }
    let mut values = Vec::new();
    let mut ranks = Vec::new();
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    for j in 0..=r_max {
        if j > 0 {
            cur = cur.iter().map(|c| c.derive_unchecked(last)).collect();
        }
        values.push(cur.iter().map(Jet::constant_term).collect::<Vec<_>>());
        rows.extend(cur.iter().map(Jet::differential));
        ranks.push(RatMatrix::from_rows(rows.clone())?.rank());
    }
    let nonzero = |j: usize| values[j].iter().any(|v: &Rat| !v.is_zero());
    let verdict = match (1..=r_max).find(|&j| nonzero(j)) {
        None => Verdict::FlatToOrder { r_max },
        Some(r) => match (0..r).find(|&j| ranks[j] != (j + 1) * width) {
            Some(j) => Verdict::DegenerateRank { j, expected: (j + 1) * width, actual: ranks[j] },
            None => Verdict::Morin { r },
        },
    };
    Ok(NormalizedCheck { verdict, derivative_values: values, ranks })
}

/// Classifies `Φ ∘ f ∘ φ` for `trials` random orientation-preserving pairs
/// `(φ, Φ)` of polynomial degree `degree`. Classification uses
/// `r_max = order(f) - 2`. Results are in trial order.
pub fn equivalence_fuzz(f: &MapJet, trials: usize, degree: u32, seed: u64) -> Result<Vec<MorinResult>> {
    if f.order() < 3 {
        return Err(Error::Truncation { have: f.order(), need: 3 });
    }
    let r_max = (f.order() - 2) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let s1 = rng.next_u64();
            let s2 = rng.next_u64();
            let phi = random_diffeo(f.source_dim(), degree, f.order(), s1, true);
            let big_phi = random_diffeo(f.target_dim(), degree, f.order(), s2, true);
            let g = conjugate(f, &phi, &big_phi)?;
            morin_classify(&g, r_max)
        })
        .collect()
}
