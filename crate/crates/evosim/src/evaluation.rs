//! Hidden consistent evaluation: fixed data splits, scope-gated scoring, and
//! final candidate selection.
//!
//! The protocol separates four concerns that naive agent loops blur together:
//! workers see only training signal, the orchestrator additionally sees the
//! search split, final selection reads the validation split, and the test
//! split stays invisible to everything except post-hoc audit. Splits are
//! drawn once per run and never move, so every candidate is scored against
//! the same data. The self-reported mode deliberately breaks each of those
//! properties in controlled ways to measure what consistency is worth.

use rand::Rng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::population::{CandidateId, EvaluationRecord, PopulationDB};
use crate::task::{Genome, SyntheticTask};

/// The four data splits of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Search,
    Val,
    Test,
}

/// Which recorded score a reader is asking for. `SelfReported` is the
/// agent-estimated stand-in for `Search` used by the ablation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKey {
    Search,
    Val,
    Test,
    SelfReported,
}

/// Access authority. Scopes are strictly nested from worker to auditor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Worker,
    Orchestrator,
    Selector,
    Auditor,
}

impl Scope {
    /// May this scope request a fresh evaluation on `split`?
    pub fn may_evaluate(self, split: Split) -> bool {
        match split {
            Split::Train => true,
            Split::Search => self >= Scope::Orchestrator,
            Split::Val => self >= Scope::Selector,
            Split::Test => self == Scope::Auditor,
        }
    }

    /// May this scope read an already recorded score?
    pub fn may_read(self, key: ScoreKey) -> bool {
        match key {
            ScoreKey::Search | ScoreKey::SelfReported => self >= Scope::Orchestrator,
            ScoreKey::Val => self >= Scope::Selector,
            ScoreKey::Test => self == Scope::Auditor,
        }
    }
}

/// What a scope tried to touch when it was denied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessTarget {
    Score(ScoreKey),
    Split(Split),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{scope:?} scope may not access {target:?}")]
pub struct ScopeViolation {
    pub scope: Scope,
    pub target: AccessTarget,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("labeled pool of {0} examples is too small (minimum 10)")]
    PoolTooSmall(u32),
    #[error("split fractions must be positive and sum to 1, got ({0}, {1}, {2})")]
    InvalidFractions(f64, f64, f64),
    #[error(transparent)]
    Scope(#[from] ScopeViolation),
    #[error("genome is malformed for this task (wrong dimension, non-finite, or out of bounds)")]
    MalformedGenome,
    #[error("operation requires self-reported evaluation mode")]
    NotSelfReported,
    #[error("cannot select from an empty population")]
    EmptyPopulation,
    #[error("no candidate carries a {0:?} score")]
    MissingScores(ScoreKey),
}

/// Requested split fractions plus the seed that freezes the partition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub search_fraction: f64,
    pub val_fraction: f64,
    pub split_seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            search_fraction: 0.1,
            val_fraction: 0.1,
            split_seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), EvalError> {
        let (t, s, v) = (self.train_fraction, self.search_fraction, self.val_fraction);
        let ok = t > 0.0 && s > 0.0 && v > 0.0 && ((t + s + v) - 1.0).abs() <= 1e-9;
        if ok {
            Ok(())
        } else {
            Err(EvalError::InvalidFractions(t, s, v))
        }
    }
}

/// A frozen partition of the labeled pool. Index sets are disjoint and
/// exhaustive; each carries a fingerprint so the evaluation log can prove
/// the partition never moved. The test split is the task's designated
/// held-out data, not part of the labeled pool.
#[derive(Debug, Clone, Serialize)]
pub struct SplitIndices {
    pub train: Vec<u32>,
    pub search: Vec<u32>,
    pub val: Vec<u32>,
    split_seed: u64,
}

impl SplitIndices {
    pub fn size_of(&self, split: Split) -> usize {
        match split {
            Split::Train => self.train.len(),
            Split::Search => self.search.len(),
            Split::Val => self.val.len(),
            Split::Test => 0,
        }
    }

    /// Order-sensitive hash of a split's membership. Two runs over the same
    /// pool with the same seed produce identical fingerprints.
    pub fn fingerprint(&self, split: Split) -> u64 {
        let indices: &[u32] = match split {
            Split::Train => &self.train,
            Split::Search => &self.search,
            Split::Val => &self.val,
            // The held-out split has no pool indices; fingerprint the seed
            // and the split identity alone.
            Split::Test => &[],
        };
        let mut h = crate::task::mix64(self.split_seed ^ 0xf1ec_e5_u64.wrapping_mul(97));
        h = crate::task::mix64(h ^ split_ordinal(split));
        for &i in indices {
            h = crate::task::mix64(h ^ u64::from(i));
        }
        h
    }
}

fn split_ordinal(split: Split) -> u64 {
    match split {
        Split::Train => 1,
        Split::Search => 2,
        Split::Val => 3,
        Split::Test => 4,
    }
}

/// Partitions `pool_size` examples into train/search/val index sets.
///
/// Sizes follow largest-remainder rounding so they always sum to the pool
/// size; remainder ties go to the earlier split in (train, search, val)
/// order. Membership is a seeded shuffle: same seed, same partition.
pub fn make_splits(pool_size: u32, spec: &SplitSpec) -> Result<SplitIndices, EvalError> {
    if pool_size < 10 {
        return Err(EvalError::PoolTooSmall(pool_size));
    }
    spec.validate()?;

    let fractions = [spec.train_fraction, spec.search_fraction, spec.val_fraction];
    let targets: Vec<f64> = fractions.iter().map(|f| f * pool_size as f64).collect();
    let mut sizes: Vec<u32> = targets.iter().map(|t| t.floor() as u32).collect();
    let assigned: u32 = sizes.iter().sum();
    let mut order: Vec<usize> = (0..3).collect();
    // Largest remainder first; ties favor the earlier split.
    order.sort_by(|&a, &b| {
        let ra = targets[a] - targets[a].floor();
        let rb = targets[b] - targets[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut leftover = pool_size - assigned;
    for &i in order.iter().cycle() {
        if leftover == 0 {
            break;
        }
        sizes[i] += 1;
        leftover -= 1;
    }

    let mut indices: Vec<u32> = (0..pool_size).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(spec.split_seed);
    indices.shuffle(&mut rng);

    let train = indices[..sizes[0] as usize].to_vec();
    let search = indices[sizes[0] as usize..(sizes[0] + sizes[1]) as usize].to_vec();
    let val = indices[(sizes[0] + sizes[1]) as usize..].to_vec();
    debug_assert_eq!(val.len(), sizes[2] as usize);

    Ok(SplitIndices {
        train,
        search,
        val,
        split_seed: spec.split_seed,
    })
}

/// How candidate scores are produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvalMode {
    /// Hidden consistent evaluation: externalized scoring on the frozen
    /// splits, with the protocol's scope rules enforced.
    Hce,
    /// Agents estimate their own quality. Three controlled defects, each
    /// independently switchable: scoring against a fresh re-split per call,
    /// additive Gaussian observation noise, and outright corruption where
    /// the agent reports the metric's perfect value.
    SelfReported {
        resplit_per_call: bool,
        noise_sigma: f64,
        corruption_prob: f64,
    },
}

impl EvalMode {
    pub fn is_self_reported(&self) -> bool {
        matches!(self, EvalMode::SelfReported { .. })
    }

    /// The score the orchestrator ranks parents by under this mode.
    pub fn signal_key(&self) -> ScoreKey {
        match self {
            EvalMode::Hce => ScoreKey::Search,
            EvalMode::SelfReported { .. } => ScoreKey::SelfReported,
        }
    }
}

/// Split-name column of the evaluation log. Extends [`Split`] with the
/// self-reported pseudo-split so agent-estimated scores are distinguishable
/// from protocol evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalName {
    Train,
    Search,
    Val,
    Test,
    SelfReported,
}

impl From<Split> for SignalName {
    fn from(split: Split) -> Self {
        match split {
            Split::Train => SignalName::Train,
            Split::Search => SignalName::Search,
            Split::Val => SignalName::Val,
            Split::Test => SignalName::Test,
        }
    }
}

impl From<ScoreKey> for SignalName {
    fn from(key: ScoreKey) -> Self {
        match key {
            ScoreKey::Search => SignalName::Search,
            ScoreKey::Val => SignalName::Val,
            ScoreKey::Test => SignalName::Test,
            ScoreKey::SelfReported => SignalName::SelfReported,
        }
    }
}

/// One line of the evaluation log: who touched which score, where it came
/// from, and when. Fresh evaluations and reads of recorded scores both land
/// here; the audit works off this trail alone.
#[derive(Debug, Clone, Serialize)]
pub struct EvalLogRecord {
    /// Candidate the score belongs to; absent for scores computed inside a
    /// worker trajectory before the candidate exists.
    pub candidate: Option<CandidateId>,
    /// Worker task the evaluation served, when it happened inside one.
    pub task_id: Option<u64>,
    /// Fingerprint of the split partition the score was computed on.
    pub split_fingerprint: String,
    pub split: SignalName,
    pub score: f64,
    pub scope: Scope,
    pub time: f64,
}

/// Rule used to pick the run's final candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalRule {
    /// Best validation score — the protocol's operative rule.
    ByVal,
    /// Best search signal (or self-reported score, under that mode).
    BySearch,
    /// Best test score. Diagnostic upper bound; requires auditor authority.
    OracleByTest,
}

/// Scores candidates against the frozen splits, enforces scope rules, and
/// keeps the evaluation log.
pub struct Evaluator {
    task: SyntheticTask,
    splits: SplitIndices,
    spec: SplitSpec,
    pool_size: u32,
    mode: EvalMode,
    /// Whether completion-time scoring also records the validation score.
    /// Disabled in analyses that prove search is independent of it.
    score_val_split: bool,
    log: Vec<EvalLogRecord>,
}

impl Evaluator {
    /// Builds the evaluator: draws the run's frozen splits and binds the
    /// task's noise fields to the same seed, so "same split" and "same
    /// noise field" coincide for the lifetime of the run.
    pub fn new(
        mut task: SyntheticTask,
        pool_size: u32,
        spec: SplitSpec,
        mode: EvalMode,
    ) -> Result<Self, EvalError> {
        let splits = make_splits(pool_size, &spec)?;
        task.noise_seed = spec.split_seed;
        Ok(Self {
            task,
            splits,
            spec,
            pool_size,
            mode,
            score_val_split: true,
            log: Vec::new(),
        })
    }

    pub fn task(&self) -> &SyntheticTask {
        &self.task
    }

    pub fn mode(&self) -> &EvalMode {
        &self.mode
    }

    pub fn splits(&self) -> &SplitIndices {
        &self.splits
    }

    pub fn log(&self) -> &[EvalLogRecord] {
        &self.log
    }

    /// Consumes the evaluator, yielding the full evaluation log.
    pub fn into_log(self) -> Vec<EvalLogRecord> {
        self.log
    }

    pub fn set_score_val_split(&mut self, enabled: bool) {
        self.score_val_split = enabled;
    }

    /// Externalized scoring. Checks that `scope` may see `split`, computes
    /// the frozen-split score, and logs the access.
    pub fn evaluate(
        &mut self,
        candidate: Option<CandidateId>,
        task_id: Option<u64>,
        genome: &Genome,
        split: Split,
        scope: Scope,
        now: f64,
    ) -> Result<f64, EvalError> {
        if !scope.may_evaluate(split) {
            return Err(ScopeViolation {
                scope,
                target: AccessTarget::Split(split),
            }
            .into());
        }
        if !self.task.genome_is_valid(genome) {
            return Err(EvalError::MalformedGenome);
        }
        let score = self.task.score(genome, split);
        self.log.push(EvalLogRecord {
            candidate,
            task_id,
            split_fingerprint: format!("{:016x}", self.splits.fingerprint(split)),
            split: split.into(),
            score,
            scope,
            time: now,
        });
        Ok(score)
    }

    /// Agent-estimated scoring for the self-reported mode. No scope gate:
    /// the agent computes this on its own view of the data. Defects apply in
    /// a fixed order — corruption short-circuits, otherwise an optional
    /// fresh re-split replaces the frozen partition and Gaussian noise is
    /// added on top.
    pub fn self_reported_evaluate(
        &mut self,
        candidate: Option<CandidateId>,
        task_id: Option<u64>,
        genome: &Genome,
        rng: &mut ChaCha12Rng,
        now: f64,
    ) -> Result<f64, EvalError> {
        let EvalMode::SelfReported {
            resplit_per_call,
            noise_sigma,
            corruption_prob,
        } = self.mode
        else {
            return Err(EvalError::NotSelfReported);
        };
        if !self.task.genome_is_valid(genome) {
            return Err(EvalError::MalformedGenome);
        }

        if corruption_prob > 0.0 && rng.gen::<f64>() < corruption_prob {
            // Silent metric corruption: the agent reports a perfect score
            // without measuring anything.
            let score = self.task.perfect_score();
            self.log.push(EvalLogRecord {
                candidate,
                task_id,
                split_fingerprint: format!("{:016x}", 0u64),
                split: SignalName::SelfReported,
                score,
                scope: Scope::Worker,
                time: now,
            });
            return Ok(score);
        }

        let (seed, fingerprint) = if resplit_per_call {
            // Actually draw the fresh partition: the reported fingerprint is
            // real, and the noise field is keyed by the fresh seed.
            let fresh_seed: u64 = rng.gen();
            let fresh = make_splits(
                self.pool_size,
                &SplitSpec {
                    split_seed: fresh_seed,
                    ..self.spec
                },
            )?;
            (fresh_seed, fresh.fingerprint(Split::Search))
        } else {
            (self.spec.split_seed, self.splits.fingerprint(Split::Search))
        };

        let mut score = self
            .task
            .score_with_noise_seed(genome, Split::Search, seed);
        if noise_sigma > 0.0 {
            score += rng.sample(rand_distr::Normal::new(0.0, noise_sigma).unwrap());
        }
        self.log.push(EvalLogRecord {
            candidate,
            task_id,
            split_fingerprint: format!("{fingerprint:016x}"),
            split: SignalName::SelfReported,
            score,
            scope: Scope::Worker,
            time: now,
        });
        Ok(score)
    }

    /// Completion-time scoring of a finished candidate. Runs under the
    /// evaluator's own authority: the search signal feeds the orchestrator,
    /// validation feeds final selection, and the test score is recorded for
    /// post-hoc audit only.
    pub fn evaluate_candidate(
        &mut self,
        id: CandidateId,
        genome: &Genome,
        rng: &mut ChaCha12Rng,
        now: f64,
    ) -> Result<EvaluationRecord, EvalError> {
        let mut record = EvaluationRecord::new(now);
        let search = self.evaluate(Some(id), None, genome, Split::Search, Scope::Auditor, now)?;
        record.set(ScoreKey::Search, search);
        if self.score_val_split {
            let val = self.evaluate(Some(id), None, genome, Split::Val, Scope::Auditor, now)?;
            record.set(ScoreKey::Val, val);
        }
        let test = self.evaluate(Some(id), None, genome, Split::Test, Scope::Auditor, now)?;
        record.set(ScoreKey::Test, test);
        if self.mode.is_self_reported() {
            let reported = self.self_reported_evaluate(Some(id), None, genome, rng, now)?;
            record.set(ScoreKey::SelfReported, reported);
        }
        Ok(record)
    }

    /// Logs a read of an already recorded score, e.g. the orchestrator
    /// consulting a parent's search signal at dispatch time.
    pub fn log_read(
        &mut self,
        candidate: CandidateId,
        key: ScoreKey,
        score: f64,
        scope: Scope,
        now: f64,
    ) {
        let fingerprint = match key {
            ScoreKey::Search => self.splits.fingerprint(Split::Search),
            ScoreKey::Val => self.splits.fingerprint(Split::Val),
            ScoreKey::Test => self.splits.fingerprint(Split::Test),
            ScoreKey::SelfReported => 0,
        };
        self.log.push(EvalLogRecord {
            candidate: Some(candidate),
            task_id: None,
            split_fingerprint: format!("{fingerprint:016x}"),
            split: key.into(),
            score,
            scope,
            time: now,
        });
    }

    /// Picks the run's final candidate under `rule`, reading recorded scores
    /// only — no fresh evaluations. Every score consulted is logged, so the
    /// audit sees exactly what final selection looked at. Candidates missing
    /// the rule's score are skipped; ties go to the earlier insertion.
    pub fn final_select(
        &mut self,
        db: &PopulationDB,
        rule: FinalRule,
        scope: Scope,
        now: f64,
    ) -> Result<CandidateId, EvalError> {
        if db.is_empty() {
            return Err(EvalError::EmptyPopulation);
        }
        let key = match rule {
            FinalRule::ByVal => ScoreKey::Val,
            FinalRule::BySearch => self.mode.signal_key(),
            FinalRule::OracleByTest => ScoreKey::Test,
        };
        if !scope.may_read(key) {
            return Err(ScopeViolation {
                scope,
                target: AccessTarget::Score(key),
            }
            .into());
        }
        let orientation = self.task.orientation;
        let mut best: Option<(CandidateId, f64)> = None;
        for candidate in db.iter_in_insertion_order() {
            let Some(score) = candidate.scores.get(key, scope)? else {
                continue;
            };
            self.log_read(candidate.id, key, score, scope, now);
            let replace = match best {
                None => true,
                // Strict improvement only, so ties keep the earlier candidate.
                Some((_, incumbent)) => orientation.better(score, incumbent),
            };
            if replace {
                best = Some((candidate.id, score));
            }
        }
        best.map(|(id, _)| id).ok_or(EvalError::MissingScores(key))
    }
}

/// One rule breach found in an evaluation log.
#[derive(Debug, Clone, Serialize)]
pub struct AuditFinding {
    pub index: usize,
    pub detail: String,
}

/// Post-hoc audit of an evaluation log. Verifies that no worker-scope entry
/// touched validation or test, no orchestrator-scope entry touched test, and
/// that each protocol split kept one fingerprint for the whole run (the
/// self-reported pseudo-split is exempt — re-splitting is its defect).
pub fn audit_log(records: &[EvalLogRecord]) -> Vec<AuditFinding> {
    let mut findings = Vec::new();
    let mut fingerprints: [Option<&str>; 4] = [None; 4];
    for (index, rec) in records.iter().enumerate() {
        let breach = match (rec.scope, rec.split) {
            (Scope::Worker, SignalName::Val | SignalName::Test) => true,
            (Scope::Orchestrator, SignalName::Test) => true,
            _ => false,
        };
        if breach {
            findings.push(AuditFinding {
                index,
                detail: format!("{:?} scope touched {:?}", rec.scope, rec.split),
            });
        }
        let slot = match rec.split {
            SignalName::Train => Some(0),
            SignalName::Search => Some(1),
            SignalName::Val => Some(2),
            SignalName::Test => Some(3),
            SignalName::SelfReported => None,
        };
        if let Some(slot) = slot {
            match fingerprints[slot] {
                None => fingerprints[slot] = Some(&rec.split_fingerprint),
                Some(expected) if expected != rec.split_fingerprint => {
                    findings.push(AuditFinding {
                        index,
                        detail: format!(
                            "{:?} split fingerprint moved from {} to {}",
                            rec.split, expected, rec.split_fingerprint
                        ),
                    });
                }
                Some(_) => {}
            }
        }
    }
    findings
}
