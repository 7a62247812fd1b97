//! How the selection temperature reshapes rank probabilities: near-greedy at
//! low T, uniform at high T. Prints the exact distribution next to empirical
//! frequencies from the sampler.
//!
//!     cargo run --example selection_temperatures

use evosim::evaluation::{EvalMode, Scope, ScoreKey, SplitSpec};
use evosim::evaluation::Evaluator;
use evosim::population::{Candidate, CandidateId, OperatorKind, PopulationDB};
use evosim::selection::{sample_parent, selection_distribution, SelectionPolicy};
use evosim::task::{Genome, SyntheticTask};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

const N: usize = 8;
const DRAWS: u32 = 100_000;

fn main() {
    // A small population with strictly ordered search scores, so rank r is
    // candidate r.
    let task = SyntheticTask::smooth_unimodal(2, 0);
    let mut evaluator =
        Evaluator::new(task.clone(), 1000, SplitSpec::default(), EvalMode::Hce).expect("evaluator");
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let mut db = PopulationDB::new();
    for i in 0..N {
        let genome = Genome(vec![task.center - 0.4 * i as f64, task.center]);
        let id = CandidateId(i as u64);
        let scores = evaluator
            .evaluate_candidate(id, &genome, &mut rng, 0.0)
            .expect("scores");
        db.insert(Candidate {
            id,
            genome,
            parent_ids: vec![],
            operator_kind: OperatorKind::Draft,
            created_at: 0.0,
            scores,
        })
        .expect("insert");
    }
    let ranked = db
        .ranked_view(ScoreKey::Search, task.orientation, Scope::Selector)
        .expect("ranking");

    for temperature in [0.01, 0.2, 1.0, 5.0, 100.0] {
        let ranks: Vec<u32> = (1..=N as u32).collect();
        let exact = selection_distribution(&ranks, temperature).expect("distribution");

        let policy = SelectionPolicy::new(temperature, 0.15).expect("policy");
        let mut counts = vec![0u32; N];
        for _ in 0..DRAWS {
            let picked = sample_parent(
                &db,
                ScoreKey::Search,
                task.orientation,
                &policy,
                Scope::Selector,
                &mut rng,
            )
            .expect("draw");
            let rank = ranked.iter().position(|&(_, id)| id == picked).unwrap();
            counts[rank] += 1;
        }

        println!("T = {temperature}");
        println!("  {:>6} {:>10} {:>10}", "rank", "p(exact)", "freq");
        for (i, (&p, &c)) in exact.iter().zip(&counts).enumerate() {
            println!(
                "  {:>6} {:>10.4} {:>10.4}",
                i + 1,
                p,
                f64::from(c) / f64::from(DRAWS)
            );
        }
        println!();
    }
}
