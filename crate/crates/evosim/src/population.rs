//! Candidate storage with lineage, per-split score records, and
//! deterministic ranked views.
//!
//! The database is deliberately dumb: it validates lineage on insertion and
//! answers rank queries, but never evaluates anything itself. Scores arrive
//! already computed, wrapped in records that gate reads by scope, so a
//! caller holding only orchestrator authority cannot fish test scores out
//! of storage. All iteration is in insertion order — never hash order — so
//! exports and rank ties are reproducible.

use std::collections::HashMap;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::evaluation::{AccessTarget, Scope, ScopeViolation, ScoreKey};
use crate::task::{Genome, Orientation};

/// Stable candidate identity, rendered as `c<n>` in logs and exports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CandidateId(pub u64);

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

impl Serialize for CandidateId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CandidateId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        let digits = s
            .strip_prefix('c')
            .ok_or_else(|| D::Error::custom(format!("candidate id must look like c<n>: {s}")))?;
        let n = digits
            .parse::<u64>()
            .map_err(|e| D::Error::custom(format!("bad candidate id {s}: {e}")))?;
        Ok(CandidateId(n))
    }
}

/// How a candidate was produced, which also fixes its parent arity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Draft,
    Mutation,
    Crossover,
}

impl OperatorKind {
    pub fn parent_count(self) -> usize {
        match self {
            OperatorKind::Draft => 0,
            OperatorKind::Mutation => 1,
            OperatorKind::Crossover => 2,
        }
    }
}

/// A candidate's recorded scores, readable only through the scope gate.
/// Fields stay private so the only ungated view is a full serialization,
/// which is an auditor-level export by construction.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EvaluationRecord {
    search_score: Option<f64>,
    val_score: Option<f64>,
    test_score: Option<f64>,
    self_reported_score: Option<f64>,
    evaluated_at: f64,
}

impl EvaluationRecord {
    pub fn new(evaluated_at: f64) -> Self {
        Self {
            evaluated_at,
            ..Self::default()
        }
    }

    /// Virtual time at which the candidate was scored.
    pub fn evaluated_at(&self) -> f64 {
        self.evaluated_at
    }

    /// Writing scores is crate-internal: only the evaluator fills records.
    pub(crate) fn set(&mut self, key: ScoreKey, value: f64) {
        let slot = match key {
            ScoreKey::Search => &mut self.search_score,
            ScoreKey::Val => &mut self.val_score,
            ScoreKey::Test => &mut self.test_score,
            ScoreKey::SelfReported => &mut self.self_reported_score,
        };
        *slot = Some(value);
    }

    /// Scope-gated read. `Ok(None)` means the scope is entitled to the score
    /// but it was never recorded.
    pub fn get(&self, key: ScoreKey, scope: Scope) -> Result<Option<f64>, ScopeViolation> {
        if !scope.may_read(key) {
            return Err(ScopeViolation {
                scope,
                target: AccessTarget::Score(key),
            });
        }
        Ok(match key {
            ScoreKey::Search => self.search_score,
            ScoreKey::Val => self.val_score,
            ScoreKey::Test => self.test_score,
            ScoreKey::SelfReported => self.self_reported_score,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Candidate {
    pub id: CandidateId,
    pub genome: Genome,
    pub parent_ids: Vec<CandidateId>,
    pub operator_kind: OperatorKind,
    /// Virtual time the candidate entered the population.
    pub created_at: f64,
    pub scores: EvaluationRecord,
}

#[derive(Debug, Error)]
pub enum PopulationError {
    #[error("candidate {0} already present")]
    DuplicateId(CandidateId),
    #[error("candidate {child} references unknown parent {parent}")]
    UnknownParent {
        child: CandidateId,
        parent: CandidateId,
    },
    #[error("{kind:?} candidate {id} must have {expected} parent(s), got {got}")]
    ParentArity {
        id: CandidateId,
        kind: OperatorKind,
        expected: usize,
        got: usize,
    },
    #[error(
        "candidate {child} created at t={child_time} precedes parent {parent} created at t={parent_time}"
    )]
    CausalityViolation {
        child: CandidateId,
        child_time: f64,
        parent: CandidateId,
        parent_time: f64,
    },
    #[error("population is empty")]
    Empty,
    #[error("candidate {0} has no {1:?} score")]
    MissingScore(CandidateId, ScoreKey),
    #[error(transparent)]
    Scope(#[from] ScopeViolation),
}

/// The population: keyed storage plus an insertion log that fixes iteration
/// order everywhere.
#[derive(Debug, Clone, Default)]
pub struct PopulationDB {
    candidates: HashMap<u64, Candidate>,
    insertion_log: Vec<CandidateId>,
}

impl PopulationDB {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.insertion_log.len()
    }

    pub fn is_empty(&self) -> bool {
        self.insertion_log.is_empty()
    }

    pub fn insertion_log(&self) -> &[CandidateId] {
        &self.insertion_log
    }

    pub fn get(&self, id: CandidateId) -> Option<&Candidate> {
        self.candidates.get(&id.0)
    }

    pub fn iter_in_insertion_order(&self) -> impl Iterator<Item = &Candidate> {
        self.insertion_log
            .iter()
            .map(|id| &self.candidates[&id.0])
    }

    /// Validates lineage (parents exist, arity matches the operator, no
    /// child predates its parent) and stores the candidate.
    pub fn insert(&mut self, candidate: Candidate) -> Result<CandidateId, PopulationError> {
        let id = candidate.id;
        if self.candidates.contains_key(&id.0) {
            return Err(PopulationError::DuplicateId(id));
        }
        let expected = candidate.operator_kind.parent_count();
        if candidate.parent_ids.len() != expected {
            return Err(PopulationError::ParentArity {
                id,
                kind: candidate.operator_kind,
                expected,
                got: candidate.parent_ids.len(),
            });
        }
        for &parent in &candidate.parent_ids {
            let Some(parent_candidate) = self.candidates.get(&parent.0) else {
                return Err(PopulationError::UnknownParent { child: id, parent });
            };
            if parent_candidate.created_at > candidate.created_at {
                return Err(PopulationError::CausalityViolation {
                    child: id,
                    child_time: candidate.created_at,
                    parent,
                    parent_time: parent_candidate.created_at,
                });
            }
        }
        self.candidates.insert(id.0, candidate);
        self.insertion_log.push(id);
        Ok(id)
    }

    /// Ranks every candidate by the given score, best first. Returns
    /// `(rank, id)` pairs with ranks 1..=n; score ties resolve to the
    /// earlier insertion, so the ranking is a deterministic permutation.
    /// Reading the scores requires a scope entitled to them.
    pub fn ranked_view(
        &self,
        key: ScoreKey,
        orientation: Orientation,
        scope: Scope,
    ) -> Result<Vec<(u32, CandidateId)>, PopulationError> {
        if self.is_empty() {
            return Err(PopulationError::Empty);
        }
        let mut entries: Vec<(f64, usize, CandidateId)> = Vec::with_capacity(self.len());
        for (position, candidate) in self.iter_in_insertion_order().enumerate() {
            let score = candidate
                .scores
                .get(key, scope)?
                .ok_or(PopulationError::MissingScore(candidate.id, key))?;
            entries.push((score, position, candidate.id));
        }
        entries.sort_by(|a, b| {
            let by_score = match orientation {
                Orientation::HigherIsBetter => b.0.total_cmp(&a.0),
                Orientation::LowerIsBetter => a.0.total_cmp(&b.0),
            };
            by_score.then(a.1.cmp(&b.1))
        });
        Ok(entries
            .into_iter()
            .enumerate()
            .map(|(i, (_, _, id))| (i as u32 + 1, id))
            .collect())
    }

    /// The rank-1 candidate of [`PopulationDB::ranked_view`].
    pub fn best(
        &self,
        key: ScoreKey,
        orientation: Orientation,
        scope: Scope,
    ) -> Result<CandidateId, PopulationError> {
        Ok(self.ranked_view(key, orientation, scope)?[0].1)
    }

    /// Full-fidelity export, one JSON candidate per line in insertion order.
    /// Contains every recorded score, so treat the output as auditor-level.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for candidate in self.iter_in_insertion_order() {
            out.push_str(&serde_json::to_string(candidate).expect("candidates serialize"));
            out.push('\n');
        }
        out
    }
}
