//! Exact sampling of cycle types and Monte Carlo aggregation.
//!
//! A permutation's distribution under the weighted measure depends only on
//! its cycle type, and the type can be generated sequentially: with n of the
//! N points still unplaced, the next cycle length is drawn from
//!
//!   P(l | n remaining) = w_l h_{n-l} / (n h_n),
//!
//! and the walk repeats on n - l until nothing remains. The product of these
//! conditionals is exactly the joint law of the removal-ordered lengths, so
//! samples are exact, not approximate.
//!
//! The inverse-CDF draw walks l = 1, 2, ... accumulating probability until
//! it passes the uniform variate. The number of terms inspected equals the
//! drawn length, so a full sample costs O(N) regardless of how many cycles
//! it contains.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::SeriesTable;

/// Cycle lengths of one sampled permutation, in removal order
/// (the cycle containing the smallest unplaced point first).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleType {
    lengths: Vec<usize>,
}

impl CycleType {
    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    /// Sum of all lengths; equals the permutation size.
    pub fn total_points(&self) -> usize {
        self.lengths.iter().sum()
    }

    /// T, the number of cycles.
    pub fn cycle_count(&self) -> usize {
        self.lengths.len()
    }

    /// C_j for j = 1..=j_max.
    pub fn counts(&self, j_max: usize) -> Vec<u64> {
        let mut c = vec![0u64; j_max];
        for &l in &self.lengths {
            if l <= j_max {
                c[l - 1] += 1;
            }
        }
        c
    }

    /// Lengths sorted descending (ties keep their relative order).
    pub fn ordered(&self) -> Vec<usize> {
        ordered_lengths(self)
    }
}

/// Stable descending sort of the lengths: L^{(1)} >= L^{(2)} >= ...
pub fn ordered_lengths(ct: &CycleType) -> Vec<usize> {
    let mut v = ct.lengths.to_vec();
    v.sort_by(|a, b| b.cmp(a));
    v
}

/// Draw one cycle type. The table must extend to n_max = N and have a
/// positive partition function.
pub fn sample_cycle_type<R: Rng + ?Sized>(table: &SeriesTable, rng: &mut R) -> Result<CycleType> {
    let n_points = table.n_points();
    if table.n_max() < n_points {
        return Err(Error::config("table too short: build with n_max >= n_points"));
    }
    if table.log_h(n_points) == f64::NEG_INFINITY {
        return Err(Error::domain(
            "partition function vanishes: no permutation carries positive weight",
        ));
    }
    let weights = table.weights();
    let mut lengths = Vec::new();
    let mut n = n_points;
    while n > 0 {
        let u: f64 = rng.gen();
        let log_hn = table.log_h(n);
        let inv_n = 1.0 / n as f64;
        let mut acc = 0.0f64;
        let mut chosen = 0usize;
        let mut last_positive = 0usize;
        for l in 1..=n {
            let w = weights[l - 1];
            if w > 0.0 {
                let q = w * inv_n * (table.log_h(n - l) - log_hn).exp();
                if q > 0.0 {
                    last_positive = l;
                    acc += q;
                    if acc >= u {
                        chosen = l;
                        break;
                    }
                }
            }
        }
        if chosen == 0 {
            // The cumulative mass fell a few ulps short of u; land on the
            // largest length that carries mass.
            if last_positive == 0 {
                return Err(Error::domain(format!(
                    "no admissible cycle length at {n} remaining points",
                )));
            }
            chosen = last_positive;
        }
        lengths.push(chosen);
        n -= chosen;
    }
    Ok(CycleType { lengths })
}

/// Monte Carlo controls. `j_track` bounds the per-j moment accumulators;
/// `keep_lengths` retains every sampled type (memory scales with
/// n_samples * average cycle count).
#[derive(Clone, Debug)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub j_track: usize,
    pub keep_lengths: bool,
}

impl McConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        McConfig { n_samples, seed, j_track: 8, keep_lengths: false }
    }
}

/// Aggregated Monte Carlo output.
///
/// `l1_lex`/`l2_lex` are the first two removal-ordered lengths per sample
/// and `l1_ordered`/`l2_ordered` the two largest; a 0 second entry means the
/// sample had a single cycle. Identical (seed, n_samples, j_track) give a
/// bit-identical summary no matter how many threads run the blocks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McSummary {
    pub n_points: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub mean_counts: Vec<f64>,
    pub var_counts: Vec<f64>,
    pub t_histogram: Vec<u64>,
    pub l1_lex: Vec<usize>,
    pub l2_lex: Vec<usize>,
    pub l1_ordered: Vec<usize>,
    pub l2_ordered: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<Vec<usize>>>,
}

impl McSummary {
    /// Mean of T over the samples.
    pub fn t_mean(&self) -> f64 {
        let total: u64 = self.t_histogram.iter().sum();
        let weighted: f64 = self
            .t_histogram
            .iter()
            .enumerate()
            .map(|(i, c)| (i + 1) as f64 * *c as f64)
            .sum();
        weighted / total as f64
    }

    /// Sample variance of T (denominator n-1).
    pub fn t_variance(&self) -> f64 {
        let total: u64 = self.t_histogram.iter().sum();
        let mean = self.t_mean();
        let ss: f64 = self
            .t_histogram
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let d = (i + 1) as f64 - mean;
                d * d * *c as f64
            })
            .sum();
        ss / (total - 1) as f64
    }

    /// Monte Carlo standard error of mean_counts[j-1].
    pub fn count_se(&self, j: usize) -> f64 {
        (self.var_counts[j - 1] / self.n_samples as f64).sqrt()
    }
}

/// Samples are drawn in fixed blocks of this many; block b runs on the RNG
/// substream seeded with seed ^ b. The block structure is part of the
/// output's definition: it makes results independent of thread count.
const BLOCK: usize = 256;

struct BlockStats {
    count_sums: Vec<f64>,
    count_sumsq: Vec<f64>,
    t_hist: Vec<u64>,
    l1_lex: Vec<usize>,
    l2_lex: Vec<usize>,
    l1_ord: Vec<usize>,
    l2_ord: Vec<usize>,
    lengths: Option<Vec<Vec<usize>>>,
}

impl BlockStats {
    fn new(j_track: usize, n_points: usize, keep: bool) -> Self {
        BlockStats {
            count_sums: vec![0.0; j_track],
            count_sumsq: vec![0.0; j_track],
            t_hist: vec![0; n_points],
            l1_lex: Vec::new(),
            l2_lex: Vec::new(),
            l1_ord: Vec::new(),
            l2_ord: Vec::new(),
            lengths: if keep { Some(Vec::new()) } else { None },
        }
    }

    fn absorb(&mut self, ct: &CycleType, j_track: usize) {
        let counts = ct.counts(j_track);
        for (k, c) in counts.iter().enumerate() {
            let c = *c as f64;
            self.count_sums[k] += c;
            self.count_sumsq[k] += c * c;
        }
        self.t_hist[ct.cycle_count() - 1] += 1;
        let lex = ct.lengths();
        self.l1_lex.push(lex[0]);
        self.l2_lex.push(if lex.len() > 1 { lex[1] } else { 0 });
        let ord = ct.ordered();
        self.l1_ord.push(ord[0]);
        self.l2_ord.push(if ord.len() > 1 { ord[1] } else { 0 });
        if let Some(store) = &mut self.lengths {
            store.push(lex.to_vec());
        }
    }
}

/// Run `config.n_samples` exact draws and aggregate. Deterministic in
/// (seed, n_samples, j_track, keep_lengths); parallel over blocks via the
/// current rayon pool.
pub fn run_monte_carlo(table: &SeriesTable, config: &McConfig) -> Result<McSummary> {
    if config.n_samples == 0 {
        return Err(Error::config("n_samples must be at least 1"));
    }
    let n_points = table.n_points();
    let j_track = config.j_track.min(n_points);
    let n_blocks = config.n_samples.div_ceil(BLOCK);

    let blocks: Vec<BlockStats> = (0..n_blocks)
        .into_par_iter()
        .map(|b| -> Result<BlockStats> {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ b as u64);
            let lo = b * BLOCK;
            let hi = ((b + 1) * BLOCK).min(config.n_samples);
            let mut stats = BlockStats::new(j_track, n_points, config.keep_lengths);
            for _ in lo..hi {
                let ct = sample_cycle_type(table, &mut rng)?;
                debug_assert_eq!(ct.total_points(), n_points);
                stats.absorb(&ct, j_track);
            }
            Ok(stats)
        })
        .collect::<Result<Vec<_>>>()?;

    // Sequential fold in block order keeps float sums bit-stable.
    let mut count_sums = vec![0.0f64; j_track];
    let mut count_sumsq = vec![0.0f64; j_track];
    let mut t_histogram = vec![0u64; n_points];
    let mut l1_lex = Vec::with_capacity(config.n_samples);
    let mut l2_lex = Vec::with_capacity(config.n_samples);
    let mut l1_ordered = Vec::with_capacity(config.n_samples);
    let mut l2_ordered = Vec::with_capacity(config.n_samples);
    let mut lengths = if config.keep_lengths { Some(Vec::with_capacity(config.n_samples)) } else { None };
    for b in blocks {
        for k in 0..j_track {
            count_sums[k] += b.count_sums[k];
            count_sumsq[k] += b.count_sumsq[k];
        }
        for (k, c) in b.t_hist.iter().enumerate() {
            t_histogram[k] += c;
        }
        l1_lex.extend_from_slice(&b.l1_lex);
        l2_lex.extend_from_slice(&b.l2_lex);
        l1_ordered.extend_from_slice(&b.l1_ord);
        l2_ordered.extend_from_slice(&b.l2_ord);
        if let (Some(all), Some(blk)) = (&mut lengths, b.lengths) {
            all.extend(blk);
        }
    }

    let n = config.n_samples as f64;
    let mean_counts: Vec<f64> = count_sums.iter().map(|s| s / n).collect();
    let var_counts: Vec<f64> = count_sums
        .iter()
        .zip(&count_sumsq)
        .map(|(s, ss)| {
            if config.n_samples > 1 {
                ((ss - s * s / n) / (n - 1.0)).max(0.0)
            } else {
                0.0
            }
        })
        .collect();

    Ok(McSummary {
        n_points,
        n_samples: config.n_samples,
        seed: config.seed,
        mean_counts,
        var_counts,
        t_histogram,
        l1_lex,
        l2_lex,
        l1_ordered,
        l2_ordered,
        lengths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{SeqSpec, WeightModel};

    fn constant_table(n: usize) -> SeriesTable {
        let m = WeightModel::new(SeqSpec::Constant { c: 1.0 }, SeqSpec::Constant { c: 1.0 });
        SeriesTable::build(&m, n, n).unwrap()
    }

    #[test]
    fn single_point_always_fixed() {
        let t = constant_table(1);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let ct = sample_cycle_type(&t, &mut rng).unwrap();
            assert_eq!(ct.lengths(), &[1]);
        }
    }

    #[test]
    fn forced_full_cycle() {
        // Only w_4 > 0: every sample is the single 4-cycle.
        let m = WeightModel::new(
            SeqSpec::Table { values: vec![0.0, 0.0, 0.0, 2.0] },
            SeqSpec::Table { values: vec![] },
        );
        let t = SeriesTable::build(&m, 4, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            assert_eq!(sample_cycle_type(&t, &mut rng).unwrap().lengths(), &[4]);
        }
    }

    #[test]
    fn lengths_partition_n() {
        let m = WeightModel::new(
            SeqSpec::Power { c: 0.5, gamma0: 0.5 },
            SeqSpec::Polylog { kstar: 0.4, s: 2.0 },
        );
        let t = SeriesTable::build(&m, 100, 100).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let ct = sample_cycle_type(&t, &mut rng).unwrap();
            assert_eq!(ct.total_points(), 100);
            assert!(ct.lengths().iter().all(|&l| (1..=100).contains(&l)));
        }
    }

    #[test]
    fn first_draw_matches_exact_law() {
        // P(L_1 = 1) = 3/4 at N = 2; binomial 4-sigma band around 10^5 draws.
        let t = constant_table(2);
        let summary = run_monte_carlo(&t, &McConfig::new(100_000, 42)).unwrap();
        let ones = summary.l1_lex.iter().filter(|&&l| l == 1).count() as f64;
        let p_hat = ones / 100_000.0;
        let sigma = (0.75 * 0.25 / 100_000.0f64).sqrt();
        assert!((p_hat - 0.75).abs() < 4.0 * sigma, "p_hat = {p_hat}");
    }

    #[test]
    fn mean_count_matches_exact_law() {
        // E[C_1] = 3/2 at N = 2.
        let t = constant_table(2);
        let summary = run_monte_carlo(&t, &McConfig::new(100_000, 9)).unwrap();
        let se = summary.count_se(1);
        assert!((summary.mean_counts[0] - 1.5).abs() < 4.0 * se);
    }

    #[test]
    fn ordered_view() {
        let ct = CycleType { lengths: vec![1, 3, 2] };
        assert_eq!(ordered_lengths(&ct), vec![3, 2, 1]);
        let tied = CycleType { lengths: vec![2, 2, 1] };
        assert_eq!(ordered_lengths(&tied), vec![2, 2, 1]);
        let single = CycleType { lengths: vec![5] };
        assert_eq!(ordered_lengths(&single), vec![5]);
    }

    #[test]
    fn summary_is_deterministic_and_thread_independent() {
        let t = constant_table(30);
        let cfg = McConfig { n_samples: 700, seed: 2024, j_track: 5, keep_lengths: true };
        let a = run_monte_carlo(&t, &cfg).unwrap();
        let b = run_monte_carlo(&t, &cfg).unwrap();
        assert_eq!(a, b);

        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_monte_carlo(&t, &cfg))
            .unwrap();
        assert_eq!(a, single);
    }

    #[test]
    fn histogram_accounts_for_every_sample() {
        let t = constant_table(12);
        let cfg = McConfig::new(1000, 5);
        let s = run_monte_carlo(&t, &cfg).unwrap();
        assert_eq!(s.t_histogram.iter().sum::<u64>(), 1000);
        assert_eq!(s.l1_lex.len(), 1000);
        assert_eq!(s.l1_ordered.len(), 1000);
    }

    #[test]
    fn single_sample_run() {
        let t = constant_table(8);
        let s = run_monte_carlo(&t, &McConfig::new(1, 1)).unwrap();
        assert_eq!(s.n_samples, 1);
        assert_eq!(s.t_histogram.iter().sum::<u64>(), 1);
        assert!(s.var_counts.iter().all(|v| *v == 0.0));
    }
}
