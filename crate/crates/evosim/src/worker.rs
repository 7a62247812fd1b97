//! Simulated workers: stochastic execution of draft/mutation/crossover
//! operators with log-normal durations, a hard execution cap, and crash
//! failures.
//!
//! A worker result is computed eagerly when the task is dispatched, but the
//! orchestrator only sees it when the completion event fires — exactly like
//! a real pool where the work happens out of sight until the callback.
//! Multi-step operators hill-climb on the training signal, the only split a
//! worker is allowed to touch.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluation::{EvalError, Evaluator, Scope, Split};
use crate::population::{CandidateId, OperatorKind};
use crate::task::Genome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WorkerId(pub u32);

#[derive(Debug, Error)]
pub enum WorkerError {
    #[error("task {task_id}: {kind:?} needs {expected} parent genome(s), got {got}")]
    MalformedTask {
        task_id: u64,
        kind: OperatorKind,
        expected: usize,
        got: usize,
    },
    #[error("no idle worker available")]
    NoIdleWorker,
    #[error("worker {0:?} is not busy")]
    NotBusy(WorkerId),
    #[error("worker {0:?} does not exist")]
    UnknownWorker(WorkerId),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// What the orchestrator shares about a parent: its id and the search-signal
/// score it was selected on. Workers never see more than this.
#[derive(Debug, Clone, Serialize)]
pub struct ParentFeedback {
    pub parent: CandidateId,
    pub signal_score: f64,
}

/// One unit of dispatched work.
#[derive(Debug, Clone, Serialize)]
pub struct WorkerTask {
    pub task_id: u64,
    pub operator_kind: OperatorKind,
    pub parent_ids: Vec<CandidateId>,
    pub parent_genomes: Vec<Genome>,
    pub parent_feedback: Vec<ParentFeedback>,
    pub dispatched_at: f64,
}

/// What comes back when the completion event fires.
#[derive(Debug, Clone, Serialize)]
pub struct WorkerResult {
    pub task_id: u64,
    /// Produced genome; absent when the execution failed.
    pub genome: Option<Genome>,
    /// Local-search steps actually taken (1 for single-turn operators).
    pub steps_taken: u32,
    /// Execution time in budget units, after capping.
    pub duration: f64,
    pub failed: bool,
}

/// Whether an operator emits one proposal or refines it with further local
/// steps inside the same execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorStyle {
    SingleTurn,
    MultiStep,
}

/// Stochastic execution model shared by all workers in a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorModel {
    pub style: OperatorStyle,
    /// Local-search budget per execution for multi-step operators.
    pub max_steps: u32,
    /// Scale of each Gaussian move in genome space.
    pub step_scale: f64,
    /// Probability an execution crashes and returns nothing.
    pub failure_prob: f64,
    /// Median of the log-normal duration distribution, in budget units.
    pub duration_median: f64,
    /// Log-normal shape parameter; 0 makes durations deterministic.
    pub duration_sigma: f64,
    /// Hard per-execution cap. Draws above it are truncated to the cap and
    /// additionally fail with probability 1/2 — long jobs die half the time.
    pub duration_cap: f64,
}

impl Default for OperatorModel {
    fn default() -> Self {
        Self {
            style: OperatorStyle::MultiStep,
            max_steps: 3,
            step_scale: 0.3,
            failure_prob: 0.05,
            duration_median: 1.0,
            duration_sigma: 1.0,
            duration_cap: 9.0,
        }
    }
}

impl OperatorModel {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_steps == 0 {
            return Err("max_steps must be at least 1".into());
        }
        if !(self.step_scale.is_finite() && self.step_scale > 0.0) {
            return Err(format!("step_scale must be positive, got {}", self.step_scale));
        }
        if !(0.0..=1.0).contains(&self.failure_prob) {
            return Err(format!("failure_prob must lie in [0,1], got {}", self.failure_prob));
        }
        if !(self.duration_median.is_finite() && self.duration_median > 0.0) {
            return Err(format!(
                "duration_median must be positive, got {}",
                self.duration_median
            ));
        }
        if !(self.duration_sigma.is_finite() && self.duration_sigma >= 0.0) {
            return Err(format!(
                "duration_sigma must be non-negative, got {}",
                self.duration_sigma
            ));
        }
        if !(self.duration_cap.is_finite() && self.duration_cap > 0.0) {
            return Err(format!(
                "duration_cap must be positive, got {}",
                self.duration_cap
            ));
        }
        Ok(())
    }
}

/// Runs one task to completion under the worker's authority. All randomness
/// comes from the caller-supplied stream; the draw order (duration, fate of
/// capped runs, crash, then genome moves) is fixed so replays are exact.
pub fn execute(
    task: &WorkerTask,
    model: &OperatorModel,
    evaluator: &mut Evaluator,
    rng: &mut ChaCha12Rng,
) -> Result<WorkerResult, WorkerError> {
    let expected = task.operator_kind.parent_count();
    if task.parent_genomes.len() != expected {
        return Err(WorkerError::MalformedTask {
            task_id: task.task_id,
            kind: task.operator_kind,
            expected,
            got: task.parent_genomes.len(),
        });
    }

    let raw_duration = if model.duration_sigma == 0.0 {
        model.duration_median
    } else {
        let dist = LogNormal::new(model.duration_median.ln(), model.duration_sigma)
            .expect("validated parameters");
        dist.sample(rng)
    };
    let capped = raw_duration > model.duration_cap;
    let duration = raw_duration.min(model.duration_cap);
    let mut failed = capped && rng.gen::<f64>() < 0.5;
    if !failed && model.failure_prob > 0.0 {
        failed = rng.gen::<f64>() < model.failure_prob;
    }
    if failed {
        return Ok(WorkerResult {
            task_id: task.task_id,
            genome: None,
            steps_taken: 0,
            duration,
            failed: true,
        });
    }

    // Cloned because the refinement loop below needs the evaluator mutably
    // for scoring while still applying genome operators.
    let landscape = evaluator.task().clone();
    let mut current = match task.operator_kind {
        OperatorKind::Draft => landscape.draft(rng),
        OperatorKind::Mutation => landscape.mutate(&task.parent_genomes[0], model.step_scale, rng),
        OperatorKind::Crossover => {
            landscape.crossover(&task.parent_genomes[0], &task.parent_genomes[1], rng)
        }
    };
    let mut steps = 1u32;

    if model.style == OperatorStyle::MultiStep {
        // Greedy local refinement on the training signal: propose a Gaussian
        // move, keep it only if the train score improves.
        let mut current_score = evaluator.evaluate(
            None,
            Some(task.task_id),
            &current,
            Split::Train,
            Scope::Worker,
            task.dispatched_at,
        )?;
        while steps < model.max_steps {
            let proposal = landscape.mutate(&current, model.step_scale, rng);
            let proposal_score = evaluator.evaluate(
                None,
                Some(task.task_id),
                &proposal,
                Split::Train,
                Scope::Worker,
                task.dispatched_at,
            )?;
            if landscape.orientation.better(proposal_score, current_score) {
                current = proposal;
                current_score = proposal_score;
            }
            steps += 1;
        }
    }

    Ok(WorkerResult {
        task_id: task.task_id,
        genome: Some(current),
        steps_taken: steps,
        duration,
        failed: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SlotState {
    Idle,
    Busy { task_id: u64 },
}

/// Per-worker tallies reported at the end of a run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WorkerCounts {
    pub worker: WorkerId,
    pub completed: u32,
    pub failed: u32,
}

/// Fixed-size pool of simulated workers. Only tracks occupancy; the actual
/// execution is [`execute`] plus a scheduled completion event.
#[derive(Debug)]
pub struct WorkerPool {
    slots: Vec<SlotState>,
    completed: Vec<u32>,
    failed: Vec<u32>,
}

impl WorkerPool {
    pub fn new(n_workers: u32) -> Self {
        Self {
            slots: vec![SlotState::Idle; n_workers as usize],
            completed: vec![0; n_workers as usize],
            failed: vec![0; n_workers as usize],
        }
    }

    pub fn n_workers(&self) -> usize {
        self.slots.len()
    }

    pub fn busy_count(&self) -> usize {
        self.slots
            .iter()
            .filter(|s| matches!(s, SlotState::Busy { .. }))
            .count()
    }

    pub fn has_idle(&self) -> bool {
        self.slots.contains(&SlotState::Idle)
    }

    /// Assigns the task to the lowest-indexed idle worker.
    pub fn dispatch(&mut self, task_id: u64) -> Result<WorkerId, WorkerError> {
        let slot = self
            .slots
            .iter()
            .position(|s| *s == SlotState::Idle)
            .ok_or(WorkerError::NoIdleWorker)?;
        self.slots[slot] = SlotState::Busy { task_id };
        Ok(WorkerId(slot as u32))
    }

    /// Marks a busy worker idle again and tallies the outcome.
    pub fn complete(&mut self, worker: WorkerId, failed: bool) -> Result<u64, WorkerError> {
        let slot = self
            .slots
            .get_mut(worker.0 as usize)
            .ok_or(WorkerError::UnknownWorker(worker))?;
        let SlotState::Busy { task_id } = *slot else {
            return Err(WorkerError::NotBusy(worker));
        };
        *slot = SlotState::Idle;
        if failed {
            self.failed[worker.0 as usize] += 1;
        } else {
            self.completed[worker.0 as usize] += 1;
        }
        Ok(task_id)
    }

    pub fn counts(&self) -> Vec<WorkerCounts> {
        (0..self.slots.len())
            .map(|i| WorkerCounts {
                worker: WorkerId(i as u32),
                completed: self.completed[i],
                failed: self.failed[i],
            })
            .collect()
    }
}
