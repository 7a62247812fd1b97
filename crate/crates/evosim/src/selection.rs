//! Temperature-scaled rank-based parent selection.
//!
//! A candidate at rank r (1 = best) out of N is chosen with probability
//! proportional to (N - r + 1)^(1/T). Low temperatures concentrate mass on
//! the top ranks, high temperatures flatten toward uniform, and because only
//! ranks enter, any monotone rescaling of the underlying scores leaves the
//! distribution untouched. Weights are computed in log space so extreme
//! temperatures stay finite.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluation::{Scope, ScoreKey};
use crate::population::{CandidateId, OperatorKind, PopulationDB, PopulationError};
use crate::stats::kahan_sum;
use crate::task::Orientation;

/// How many times to redraw a distinct second parent before falling back to
/// mutation. At temperatures where both draws collapse onto one candidate,
/// retrying forever would spin.
const MAX_PARTNER_REDRAWS: usize = 16;

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("temperature must be positive and finite, got {0}")]
    BadTemperature(f64),
    #[error("crossover probability must lie in [0, 1], got {0}")]
    BadCrossoverProb(f64),
    #[error("ranks must be a permutation of 1..=n")]
    BadRanks,
    #[error(transparent)]
    Population(#[from] PopulationError),
}

/// Parent-selection knobs: softmax-over-ranks temperature and the
/// probability of attempting crossover instead of mutation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SelectionPolicy {
    pub temperature: f64,
    pub crossover_prob: f64,
}

impl SelectionPolicy {
    pub fn new(temperature: f64, crossover_prob: f64) -> Result<Self, SelectionError> {
        let policy = Self {
            temperature,
            crossover_prob,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<(), SelectionError> {
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(SelectionError::BadTemperature(self.temperature));
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) || self.crossover_prob.is_nan() {
            return Err(SelectionError::BadCrossoverProb(self.crossover_prob));
        }
        Ok(())
    }
}

/// Probability of each rank under the tempered rank weighting. `ranks` must
/// be a permutation of 1..=n; the returned vector is aligned with it.
pub fn selection_distribution(ranks: &[u32], temperature: f64) -> Result<Vec<f64>, SelectionError> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(SelectionError::BadTemperature(temperature));
    }
    let n = ranks.len();
    if n == 0 {
        return Err(SelectionError::BadRanks);
    }
    let mut seen = vec![false; n];
    for &r in ranks {
        if r == 0 || r as usize > n || seen[r as usize - 1] {
            return Err(SelectionError::BadRanks);
        }
        seen[r as usize - 1] = true;
    }

    // w_r = (n - r + 1)^(1/T), computed as exp((ln w - max ln w) / ...) so
    // that e.g. T = 0.01 with n in the thousands cannot overflow.
    let inv_t = 1.0 / temperature;
    let log_weights: Vec<f64> = ranks
        .iter()
        .map(|&r| inv_t * f64::from(n as u32 - r + 1).ln())
        .collect();
    let max_log = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_weights.iter().map(|&lw| (lw - max_log).exp()).collect();
    let total = kahan_sum(weights.iter().copied());
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Draws one parent from the population by tempered rank selection over the
/// given score. The rank view is deterministic, so identical populations and
/// RNG state produce identical picks.
pub fn sample_parent<R: Rng + ?Sized>(
    db: &PopulationDB,
    key: ScoreKey,
    orientation: Orientation,
    policy: &SelectionPolicy,
    scope: Scope,
    rng: &mut R,
) -> Result<CandidateId, SelectionError> {
    let ranked = db.ranked_view(key, orientation, scope)?;
    let ranks: Vec<u32> = ranked.iter().map(|&(rank, _)| rank).collect();
    let probs = selection_distribution(&ranks, policy.temperature)?;
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (&(_, id), &p) in ranked.iter().zip(&probs) {
        acc += p;
        if u < acc {
            return Ok(id);
        }
    }
    // Rounding left a sliver of probability unassigned; it belongs to the
    // last entry.
    Ok(ranked.last().expect("non-empty ranking").1)
}

/// Picks the operator for the next dispatch: crossover with the configured
/// probability when at least two candidates exist, mutation otherwise.
pub fn choose_operator<R: Rng + ?Sized>(
    policy: &SelectionPolicy,
    population_size: usize,
    rng: &mut R,
) -> OperatorKind {
    if population_size >= 2 && rng.gen::<f64>() < policy.crossover_prob {
        OperatorKind::Crossover
    } else {
        OperatorKind::Mutation
    }
}

/// A fully resolved breeding decision: which operator and which parents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParentPlan {
    Mutation(CandidateId),
    Crossover(CandidateId, CandidateId),
}

impl ParentPlan {
    pub fn operator_kind(&self) -> OperatorKind {
        match self {
            ParentPlan::Mutation(_) => OperatorKind::Mutation,
            ParentPlan::Crossover(_, _) => OperatorKind::Crossover,
        }
    }

    pub fn parent_ids(&self) -> Vec<CandidateId> {
        match self {
            ParentPlan::Mutation(a) => vec![*a],
            ParentPlan::Crossover(a, b) => vec![*a, *b],
        }
    }
}

/// Chooses an operator and samples its parents. Crossover partners must be
/// distinct; after [`MAX_PARTNER_REDRAWS`] collisions the plan degrades to
/// mutating the first parent.
pub fn plan_parents<R: Rng + ?Sized>(
    db: &PopulationDB,
    key: ScoreKey,
    orientation: Orientation,
    policy: &SelectionPolicy,
    scope: Scope,
    rng: &mut R,
) -> Result<ParentPlan, SelectionError> {
    let kind = choose_operator(policy, db.len(), rng);
    let first = sample_parent(db, key, orientation, policy, scope, rng)?;
    if kind == OperatorKind::Mutation {
        return Ok(ParentPlan::Mutation(first));
    }
    for _ in 0..MAX_PARTNER_REDRAWS {
        let second = sample_parent(db, key, orientation, policy, scope, rng)?;
        if second != first {
            return Ok(ParentPlan::Crossover(first, second));
        }
    }
    Ok(ParentPlan::Mutation(first))
}
