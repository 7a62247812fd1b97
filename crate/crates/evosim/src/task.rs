//! Synthetic benchmark landscapes with a controllable generalization gap.
//!
//! A task scores real-valued genomes inside a box. The true objective is a
//! smooth Gaussian basin plus an optional cosine ripple, so presets range
//! from trivially unimodal to rugged with many local optima. On top of the
//! true objective each data split carries its own frozen noise field, scaled
//! by `gap_strength`: candidates can look better on one split than another,
//! which is exactly the train/search/val/test disagreement the evaluation
//! protocol has to withstand. Scoring is pure — no RNG, no global state —
//! so the same (genome, split) always yields the same score bit for bit.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::evaluation::Split;

/// A candidate solution: a point in the task's search box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genome(pub Vec<f64>);

impl Genome {
    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Which direction of a score is better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    HigherIsBetter,
    LowerIsBetter,
}

impl Orientation {
    /// True when `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Orientation::HigherIsBetter => a > b,
            Orientation::LowerIsBetter => a < b,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticTask {
    /// Dimensionality of the search box.
    pub dim: usize,
    /// Coordinates of the global optimum (same value along every axis).
    pub center: f64,
    /// Half-width of the search box around the origin.
    pub box_half_width: f64,
    /// Weight of the smooth Gaussian basin term.
    pub smooth_weight: f64,
    /// Width (standard deviation) of the basin.
    pub basin_width: f64,
    /// Weight of the cosine ripple term; positive values add local optima.
    pub rugged_weight: f64,
    /// Ripple cycles per unit length along each axis.
    pub ripple_freq: f64,
    /// Amplitude of the per-split noise fields. Zero means every split sees
    /// the identical landscape.
    pub gap_strength: f64,
    /// Length scale of the split noise fields.
    pub noise_cell: f64,
    /// Seed keying the split noise fields; wired to the split seed by the
    /// evaluator so that "same split" and "same noise" coincide.
    pub noise_seed: u64,
    pub orientation: Orientation,
}

impl SyntheticTask {
    /// A single Gaussian basin, no ripple, no split gap. The easiest preset:
    /// greedy local search from anywhere reaches the optimum.
    pub fn smooth_unimodal(dim: usize, noise_seed: u64) -> Self {
        Self {
            dim,
            center: 1.2,
            box_half_width: 5.0,
            smooth_weight: 1.0,
            basin_width: 2.5,
            rugged_weight: 0.0,
            ripple_freq: 1.0,
            gap_strength: 0.0,
            noise_cell: 0.5,
            noise_seed,
            orientation: Orientation::HigherIsBetter,
        }
    }

    /// Basin plus a strong ripple: a lattice of local optima that traps
    /// short-sighted hill climbing. Still no split gap.
    pub fn rugged_multimodal(dim: usize, noise_seed: u64) -> Self {
        Self {
            dim,
            center: 1.2,
            box_half_width: 5.0,
            smooth_weight: 0.7,
            basin_width: 1.5,
            rugged_weight: 0.3,
            ripple_freq: 1.0,
            gap_strength: 0.0,
            noise_cell: 0.5,
            noise_seed,
            orientation: Orientation::HigherIsBetter,
        }
    }

    /// The rugged landscape with a split gap: each split disagrees with the
    /// true objective by its own noise field, so overfitting the search
    /// signal is possible and measurable.
    pub fn gapped_rugged(dim: usize, noise_seed: u64) -> Self {
        Self {
            gap_strength: 0.02,
            ..Self::rugged_multimodal(dim, noise_seed)
        }
    }

    pub fn preset(name: &str, dim: usize, noise_seed: u64) -> Option<Self> {
        match name {
            "smooth-unimodal" => Some(Self::smooth_unimodal(dim, noise_seed)),
            "rugged-multimodal" => Some(Self::rugged_multimodal(dim, noise_seed)),
            "gapped-rugged" => Some(Self::gapped_rugged(dim, noise_seed)),
            _ => None,
        }
    }

    /// The split-independent objective.
    pub fn true_objective(&self, genome: &Genome) -> f64 {
        let mut dist_sq = 0.0;
        let mut ripple = 0.0;
        for &x in &genome.0 {
            let d = x - self.center;
            dist_sq += d * d;
            ripple += (2.0 * std::f64::consts::PI * self.ripple_freq * d).cos();
        }
        ripple /= self.dim as f64;
        let basin = (-dist_sq / (2.0 * self.basin_width * self.basin_width)).exp();
        self.smooth_weight * basin + self.rugged_weight * ripple
    }

    /// The unique global maximizer of the true objective.
    pub fn optimum_genome(&self) -> Genome {
        Genome(vec![self.center; self.dim])
    }

    /// True objective at the optimum: both landscape terms peak at the
    /// center, so this is simply the sum of the weights.
    pub fn optimum_score(&self) -> f64 {
        self.smooth_weight + self.rugged_weight
    }

    /// Supremum of any split score over all genomes: the optimum plus the
    /// full noise amplitude. A corrupted self-evaluation reports this value.
    pub fn perfect_score(&self) -> f64 {
        self.optimum_score() + self.gap_strength
    }

    /// Split score: true objective plus this split's frozen noise field.
    pub fn score(&self, genome: &Genome, split: Split) -> f64 {
        self.score_with_noise_seed(genome, split, self.noise_seed)
    }

    /// Like [`SyntheticTask::score`], but keyed by an explicit noise seed.
    /// A fresh seed models scoring against a fresh re-split of the data:
    /// same genome, same split name, different frozen noise.
    pub fn score_with_noise_seed(&self, genome: &Genome, split: Split, noise_seed: u64) -> f64 {
        let base = self.true_objective(genome);
        if self.gap_strength == 0.0 {
            return base;
        }
        let field = value_noise(noise_seed, split_tag(split), &genome.0, self.noise_cell);
        base + self.gap_strength * field
    }

    /// Checks dimension, finiteness, and box membership.
    pub fn genome_is_valid(&self, genome: &Genome) -> bool {
        genome.0.len() == self.dim
            && genome
                .0
                .iter()
                .all(|x| x.is_finite() && x.abs() <= self.box_half_width)
    }

    /// Uniform sample from the search box.
    pub fn draft<R: Rng + ?Sized>(&self, rng: &mut R) -> Genome {
        let w = self.box_half_width;
        Genome((0..self.dim).map(|_| rng.gen_range(-w..=w)).collect())
    }

    /// Gaussian perturbation of every coordinate, clamped to the box.
    pub fn mutate<R: Rng + ?Sized>(&self, parent: &Genome, step_scale: f64, rng: &mut R) -> Genome {
        let noise = Normal::new(0.0, step_scale).expect("step scale must be finite and positive");
        let w = self.box_half_width;
        Genome(
            parent
                .0
                .iter()
                .map(|&x| (x + noise.sample(rng)).clamp(-w, w))
                .collect(),
        )
    }

    /// Per-coordinate blend of two parents with an independent uniform
    /// mixing weight per axis. The blend is convex but still clamped: with
    /// both parents on the box wall, `u*xa + (1-u)*xb` can overshoot the
    /// boundary by one rounding step.
    pub fn crossover<R: Rng + ?Sized>(&self, a: &Genome, b: &Genome, rng: &mut R) -> Genome {
        let w = self.box_half_width;
        Genome(
            a.0.iter()
                .zip(&b.0)
                .map(|(&xa, &xb)| {
                    let u: f64 = rng.gen_range(0.0..=1.0);
                    (u * xa + (1.0 - u) * xb).clamp(-w, w)
                })
                .collect(),
        )
    }
}

fn split_tag(split: Split) -> u64 {
    match split {
        Split::Train => 0x7452_41a1,
        Split::Search => 0x5ea2_c4b2,
        Split::Val => 0x7a11_d6c3,
        Split::Test => 0x7e57_e8d4,
    }
}

/// SplitMix64 finalizer; decorrelates consecutive lattice coordinates.
pub(crate) fn mix64(mut h: u64) -> u64 {
    h ^= h >> 30;
    h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h ^= h >> 27;
    h = h.wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

/// Hash of one lattice corner, mapped to [-1, 1].
fn corner_value(seed: u64, tag: u64, coords: &[i64]) -> f64 {
    let mut h = mix64(seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    for &c in coords {
        h = mix64(h ^ (c as u64));
    }
    // Top 53 bits give a uniform double in [0, 1).
    let unit = (h >> 11) as f64 / (1u64 << 53) as f64;
    2.0 * unit - 1.0
}

/// Deterministic lattice value noise in [-1, 1]: hash values at the 2^d
/// surrounding corners, blended with a smoothstep weight per axis. Continuous
/// in x, frozen per (seed, tag).
fn value_noise(seed: u64, tag: u64, x: &[f64], cell: f64) -> f64 {
    debug_assert!(cell > 0.0);
    debug_assert!(x.len() <= 16, "corner enumeration is 2^dim");
    let mut base = Vec::with_capacity(x.len());
    let mut t = Vec::with_capacity(x.len());
    for &xi in x {
        let scaled = xi / cell;
        let lo = scaled.floor();
        base.push(lo as i64);
        let frac = scaled - lo;
        t.push(frac * frac * (3.0 - 2.0 * frac));
    }
    let dim = x.len();
    let mut acc = 0.0;
    let mut coords = vec![0i64; dim];
    for mask in 0u32..(1u32 << dim) {
        let mut weight = 1.0;
        for i in 0..dim {
            if mask & (1 << i) != 0 {
                weight *= t[i];
                coords[i] = base[i] + 1;
            } else {
                weight *= 1.0 - t[i];
                coords[i] = base[i];
            }
        }
        if weight > 0.0 {
            acc += weight * corner_value(seed, tag, &coords);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let mut sxy = 0.0;
        let mut sxx = 0.0;
        let mut syy = 0.0;
        for (x, y) in xs.iter().zip(ys) {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
            syy += (y - my) * (y - my);
        }
        sxy / (sxx * syy).sqrt()
    }

    #[test]
    fn optimum_scores_the_sum_of_weights() {
        let task = SyntheticTask::rugged_multimodal(3, 0);
        let opt = task.optimum_genome();
        let got = task.true_objective(&opt);
        assert!((got - task.optimum_score()).abs() < 1e-12);
        assert!((got - 1.0).abs() < 1e-12); // 0.7 + 0.3
    }

    #[test]
    fn optimum_beats_random_genomes() {
        let task = SyntheticTask::rugged_multimodal(3, 0);
        let best = task.optimum_score();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let g = task.draft(&mut rng);
            assert!(task.true_objective(&g) <= best + 1e-12);
        }
    }

    #[test]
    fn scoring_is_pure() {
        let task = SyntheticTask::gapped_rugged(4, 99);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..100 {
            let g = task.draft(&mut rng);
            for split in [Split::Train, Split::Search, Split::Val, Split::Test] {
                let a = task.score(&g, split);
                let b = task.score(&g, split);
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn zero_gap_makes_all_splits_agree() {
        let task = SyntheticTask::rugged_multimodal(3, 7);
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for _ in 0..200 {
            let g = task.draft(&mut rng);
            let t = task.score(&g, Split::Train);
            let s = task.score(&g, Split::Search);
            let v = task.score(&g, Split::Val);
            let e = task.score(&g, Split::Test);
            assert_eq!(t.to_bits(), s.to_bits());
            assert_eq!(s.to_bits(), v.to_bits());
            assert_eq!(v.to_bits(), e.to_bits());
        }
    }

    #[test]
    fn split_noise_fields_are_independent_across_splits() {
        // Correlation between the search and test noise fields over random
        // genomes should vanish: the fields are keyed by different tags.
        let task = SyntheticTask::gapped_rugged(3, 11);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut search = Vec::new();
        let mut test = Vec::new();
        for _ in 0..10_000 {
            let g = task.draft(&mut rng);
            let base = task.true_objective(&g);
            search.push((task.score(&g, Split::Search) - base) / task.gap_strength);
            test.push((task.score(&g, Split::Test) - base) / task.gap_strength);
        }
        let r = pearson(&search, &test);
        assert!(r.abs() < 0.05, "cross-split noise correlation {r}");
        // And the fields themselves stay within their stated amplitude.
        for v in search.iter().chain(&test) {
            assert!(v.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn search_test_correlation_decreases_with_gap_strength() {
        let gaps = [0.05, 0.2, 0.8];
        let mut rs = Vec::new();
        for gap in gaps {
            let mut task = SyntheticTask::rugged_multimodal(3, 21);
            task.gap_strength = gap;
            let mut rng = ChaCha12Rng::seed_from_u64(4);
            let mut search = Vec::new();
            let mut test = Vec::new();
            for _ in 0..4000 {
                let g = task.draft(&mut rng);
                search.push(task.score(&g, Split::Search));
                test.push(task.score(&g, Split::Test));
            }
            rs.push(pearson(&search, &test));
        }
        assert!(
            rs[0] > rs[1] && rs[1] > rs[2],
            "correlations not decreasing: {rs:?}"
        );
    }

    #[test]
    fn fresh_noise_seed_changes_the_field() {
        let task = SyntheticTask::gapped_rugged(3, 5);
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let g = task.draft(&mut rng);
        let a = task.score_with_noise_seed(&g, Split::Search, 5);
        let b = task.score_with_noise_seed(&g, Split::Search, 6);
        assert_eq!(a.to_bits(), task.score(&g, Split::Search).to_bits());
        assert_ne!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn drafts_stay_in_the_box_and_fill_it() {
        let task = SyntheticTask::smooth_unimodal(3, 0);
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for _ in 0..2000 {
            let g = task.draft(&mut rng);
            assert!(task.genome_is_valid(&g));
            for &x in &g.0 {
                min = min.min(x);
                max = max.max(x);
            }
        }
        assert!(min < -4.5 && max > 4.5, "box not filled: [{min}, {max}]");
    }

    #[test]
    fn mutation_displacement_matches_chi_mean() {
        // Per-coordinate N(0, s^2) noise in d=3 displaces the genome by
        // s * E[chi_3] = s * 2 * sqrt(2/pi) ... for chi with 3 degrees of
        // freedom the mean is sqrt(2) * Gamma(2) / Gamma(1.5) = 1.595769...
        let task = SyntheticTask::smooth_unimodal(3, 0);
        let parent = Genome(vec![0.0; 3]); // far from the box edge: no clamping
        let step = 0.2;
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let n = 20_000;
        let mut total = 0.0;
        for _ in 0..n {
            let child = task.mutate(&parent, step, &mut rng);
            let d: f64 = child
                .0
                .iter()
                .zip(&parent.0)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            total += d.sqrt();
        }
        let got = total / n as f64;
        let expect = step * 1.5957691216057308;
        assert!(
            (got - expect).abs() < 0.01 * expect.max(0.05),
            "mean displacement {got}, expected {expect}"
        );
    }

    #[test]
    fn mutation_respects_the_box() {
        let task = SyntheticTask::smooth_unimodal(2, 0);
        let parent = Genome(vec![5.0, -5.0]);
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        for _ in 0..500 {
            let child = task.mutate(&parent, 3.0, &mut rng);
            assert!(task.genome_is_valid(&child));
        }
    }

    #[test]
    fn crossover_of_boundary_parents_stays_in_the_box() {
        // u*w + (1-u)*w rounds above w for many u (e.g. u = 0.3 at w = 5), so
        // the blend must clamp; otherwise wall-hugging parents breed invalid
        // children.
        let task = SyntheticTask::smooth_unimodal(4, 0);
        let a = Genome(vec![5.0, -5.0, 5.0, -5.0]);
        let b = Genome(vec![5.0, -5.0, -5.0, 5.0]);
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        for _ in 0..2000 {
            let child = task.crossover(&a, &b, &mut rng);
            assert!(task.genome_is_valid(&child), "child {:?}", child.0);
        }
    }

    #[test]
    fn crossover_blends_coordinatewise() {
        let task = SyntheticTask::smooth_unimodal(3, 0);
        let a = Genome(vec![1.0, 2.0, 3.0]);
        let b = Genome(vec![-1.0, 4.0, 3.0]);
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..200 {
            let child = task.crossover(&a, &b, &mut rng);
            for i in 0..3 {
                let lo = a.0[i].min(b.0[i]) - 1e-12;
                let hi = a.0[i].max(b.0[i]) + 1e-12;
                assert!(child.0[i] >= lo && child.0[i] <= hi);
            }
            assert!((child.0[2] - 3.0).abs() < 1e-12); // identical coordinate is preserved
        }
    }

    #[test]
    fn greedy_hill_climb_improves_without_breaking_purity() {
        let task = SyntheticTask::rugged_multimodal(3, 13);
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        for _ in 0..100 {
            let mut current = task.draft(&mut rng);
            let start = task.true_objective(&current);
            let mut best = start;
            for _ in 0..20 {
                let proposal = task.mutate(&current, 0.3, &mut rng);
                let v = task.true_objective(&proposal);
                assert!(v.is_finite());
                if v > best {
                    best = v;
                    current = proposal;
                }
            }
            assert!(best >= start);
        }
    }

    #[test]
    fn genome_validation_rejects_malformed_points() {
        let task = SyntheticTask::smooth_unimodal(3, 0);
        assert!(!task.genome_is_valid(&Genome(vec![0.0, 0.0])));
        assert!(!task.genome_is_valid(&Genome(vec![0.0, 0.0, 6.0])));
        assert!(!task.genome_is_valid(&Genome(vec![0.0, f64::NAN, 0.0])));
        assert!(task.genome_is_valid(&Genome(vec![0.0, -5.0, 5.0])));
    }

    #[test]
    fn presets_resolve_by_name() {
        assert!(SyntheticTask::preset("smooth-unimodal", 3, 0).is_some());
        assert!(SyntheticTask::preset("rugged-multimodal", 3, 0).is_some());
        let gapped = SyntheticTask::preset("gapped-rugged", 3, 0).unwrap();
        assert!(gapped.gap_strength > 0.0);
        assert!(SyntheticTask::preset("unknown", 3, 0).is_none());
    }

    #[test]
    fn perfect_score_bounds_every_split_score() {
        let task = SyntheticTask::gapped_rugged(3, 17);
        let cap = task.perfect_score();
        let mut rng = ChaCha12Rng::seed_from_u64(14);
        for _ in 0..2000 {
            let g = task.draft(&mut rng);
            for split in [Split::Train, Split::Search, Split::Val, Split::Test] {
                assert!(task.score(&g, split) <= cap + 1e-12);
            }
        }
    }
}
