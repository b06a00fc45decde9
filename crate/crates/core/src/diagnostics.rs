//! Statistics that turn replicate genealogies into evidence of convergence to
//! the Kingman coalescent: one-sample KS tests with simulated null
//! thresholds, multiple-merger fractions, clock diagnostics and
//! finite-dimensional distribution distances.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genealogy::{path_statistics, ClockDiagnostics, PartitionPath};
use crate::kingman::{generator, pair_rate, KingmanError, ReferenceLaw};
use crate::numeric::NeumaierSum;
use crate::partition::{merge_profile, Partition, PartitionError};

/// Fewest uncensored replicates accepted by the holding- and jump-time tests.
pub const MIN_REPLICATES: usize = 100;
/// Fewest replicates accepted by [`fdd_compare`].
pub const MIN_FDD_REPLICATES: usize = 1000;
/// Largest sample size for which partition laws are compared exactly.
pub const MAX_FDD_SAMPLE: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("no samples")]
    EmptySample,
    #[error("{got} usable replicates, need at least {needed}")]
    TooFewReplicates { got: usize, needed: usize },
    #[error("no merger events in any path")]
    NoEvents,
    #[error("sample size {0} is outside the supported range")]
    SampleSize(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Kingman(#[from] KingmanError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// One-sample Kolmogorov-Smirnov distance between the empirical CDF of
/// `samples` and `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64, DiagnosticsError> {
    if samples.is_empty() {
        return Err(DiagnosticsError::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let r = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / r - f).max(f - i as f64 / r);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// The `quantile` of the KS statistic for `sample_size` draws under a true
/// continuous null, estimated from `reps` simulated uniform samples.
pub fn calibrate_ks_threshold<R: Rng + ?Sized>(
    sample_size: usize,
    reps: usize,
    quantile: f64,
    rng: &mut R,
) -> Result<f64, DiagnosticsError> {
    if sample_size == 0 || reps == 0 || !(0.0..=1.0).contains(&quantile) {
        return Err(DiagnosticsError::InvalidArgument(format!(
            "sample size {sample_size}, {reps} reps, quantile {quantile}"
        )));
    }
    let mut buf = vec![0.0; sample_size];
    let mut stats: Vec<f64> = (0..reps)
        .map(|_| {
            buf.iter_mut().for_each(|x| *x = rng.random::<f64>());
            ks_statistic(&buf, |u| u.clamp(0.0, 1.0)).expect("non-empty")
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    Ok(empirical_quantile(&stats, quantile))
}

/// Order statistic `ceil(q m)` of an ascending slice (the smallest value when
/// `q = 0`).
pub fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexKs {
    /// 1-based holding-time or jump index.
    pub index: usize,
    pub rate: f64,
    pub samples: usize,
    /// Replicates in which this quantity was not observed.
    pub unobserved: usize,
    pub ks: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldingTimeReport {
    /// The `i`-th holding time tested against `Exp(C(n-i+1, 2))`.
    pub per_index: Vec<IndexKs>,
    /// Sample correlation of holding times `i` and `i+1`, over replicates
    /// observing both.
    pub consecutive_correlation: Vec<f64>,
}

/// KS of each holding time against the Kingman law for the block count it
/// starts from. Only replicates observing the `i`-th jump contribute to index
/// `i`; index 1 needs at least [`MIN_REPLICATES`] of them.
pub fn holding_time_test<P: PartitionPath>(paths: &[P], n: usize) -> Result<HoldingTimeReport, DiagnosticsError> {
    if n < 2 {
        return Err(DiagnosticsError::SampleSize(n));
    }
    let holdings: Vec<Vec<f64>> = paths.iter().map(|p| path_statistics(p).holding_times).collect();
    let mut per_index = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let samples: Vec<f64> = holdings.iter().filter_map(|h| h.get(i).copied()).collect();
        if i == 0 && samples.len() < MIN_REPLICATES {
            return Err(DiagnosticsError::TooFewReplicates { got: samples.len(), needed: MIN_REPLICATES });
        }
        if samples.is_empty() {
            break;
        }
        let law = ReferenceLaw::exponential(pair_rate(n - i))?;
        per_index.push(IndexKs {
            index: i + 1,
            rate: pair_rate(n - i),
            samples: samples.len(),
            unobserved: paths.len() - samples.len(),
            ks: ks_statistic(&samples, |x| law.cdf(x))?,
        });
    }
    let consecutive_correlation = (0..n.saturating_sub(2))
        .map(|i| {
            let pairs: Vec<(f64, f64)> =
                holdings.iter().filter(|h| h.len() > i + 1).map(|h| (h[i], h[i + 1])).collect();
            correlation(&pairs)
        })
        .collect();
    Ok(HoldingTimeReport { per_index, consecutive_correlation })
}

fn correlation(pairs: &[(f64, f64)]) -> f64 {
    let m = pairs.len() as f64;
    if pairs.len() < 2 {
        return f64::NAN;
    }
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / m;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// KS of the `m`-th jump time of the jump counter against
/// `Erlang(m, C(n,2))`. Each entry of `counter_jumps` lists one replicate's
/// counter jump times in increasing order.
pub fn jump_time_test(counter_jumps: &[Vec<f64>], m: usize, n: usize) -> Result<IndexKs, DiagnosticsError> {
    if n < 2 {
        return Err(DiagnosticsError::SampleSize(n));
    }
    if m == 0 {
        return Err(DiagnosticsError::InvalidArgument("jump index starts at 1".into()));
    }
    let samples: Vec<f64> = counter_jumps.iter().filter_map(|j| j.get(m - 1).copied()).collect();
    if samples.len() < MIN_REPLICATES {
        return Err(DiagnosticsError::TooFewReplicates { got: samples.len(), needed: MIN_REPLICATES });
    }
    let rate = pair_rate(n);
    let law = ReferenceLaw::erlang(rate, m as u32)?;
    Ok(IndexKs {
        index: m,
        rate,
        samples: samples.len(),
        unobserved: counter_jumps.len() - samples.len(),
        ks: ks_statistic(&samples, |x| law.cdf(x))?,
    })
}

/// Fraction of merger events that merge three or more lineages or perform
/// two or more simultaneous pair mergers.
pub fn multiple_merger_fraction<P: PartitionPath>(paths: &[P]) -> Result<f64, DiagnosticsError> {
    let (mut events, mut multiple) = (0usize, 0usize);
    for path in paths {
        let mut prev = Partition::singletons(path.sample_size())?;
        for (_, next) in path.jumps() {
            let profile = merge_profile(&prev, next)?
                .ok_or_else(|| DiagnosticsError::InvalidArgument(format!("{next} does not coarsen {prev}")))?;
            events += 1;
            multiple += usize::from(profile.is_multiple_merger());
            prev = next.clone();
        }
    }
    if events == 0 {
        return Err(DiagnosticsError::NoEvents);
    }
    Ok(multiple as f64 / events as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub stderr: f64,
}

impl MeanSe {
    pub fn of(values: &[f64]) -> Self {
        let m = values.len() as f64;
        if values.is_empty() {
            return Self { mean: f64::NAN, stderr: f64::NAN };
        }
        let mean = values.iter().copied().collect::<NeumaierSum>().value() / m;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).collect::<NeumaierSum>().value() / (m - 1.0)
        } else {
            0.0
        };
        Self { mean, stderr: (var / m).sqrt() }
    }
}

/// Monte Carlo means of the clock functionals at one population size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockSummary {
    pub replicates: usize,
    pub censored: usize,
    pub c_at_tau: MeanSe,
    pub sum_c_sq: MeanSe,
    pub sum_d: MeanSe,
    pub tau: MeanSe,
}

/// Summarises per-replicate clock diagnostics; `None` marks a censored
/// replicate whose clock never reached the horizon.
pub fn asymptotic_diagnostics(runs: &[Option<ClockDiagnostics>]) -> ClockSummary {
    let ok: Vec<&ClockDiagnostics> = runs.iter().flatten().collect();
    let field = |f: fn(&ClockDiagnostics) -> f64| MeanSe::of(&ok.iter().map(|d| f(d)).collect::<Vec<_>>());
    ClockSummary {
        replicates: ok.len(),
        censored: runs.len() - ok.len(),
        c_at_tau: field(|d| d.c_at_tau),
        sum_c_sq: field(|d| d.sum_c_sq),
        sum_d: field(|d| d.sum_d),
        tau: field(|d| d.tau as f64),
    }
}

pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

/// `exp(a)` for a dense row-major `m x m` matrix, by scaling and squaring with
/// the Taylor series cut once a term's max-row-sum norm falls below `1e-12`.
pub fn matrix_exponential(a: &[f64], m: usize) -> Vec<f64> {
    assert_eq!(a.len(), m * m);
    let norm = (0..m).map(|i| a[i * m..(i + 1) * m].iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scale = 0.5f64.powi(squarings as i32);
    let scaled: Vec<f64> = a.iter().map(|x| x * scale).collect();
    let mut result = identity(m);
    let mut term = identity(m);
    for k in 1..200 {
        term = matmul(&term, &scaled, m);
        term.iter_mut().for_each(|x| *x /= k as f64);
        result.iter_mut().zip(&term).for_each(|(r, t)| *r += t);
        let term_norm =
            (0..m).map(|i| term[i * m..(i + 1) * m].iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
        if term_norm < 1e-12 {
            break;
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result, m);
    }
    result
}

fn identity(m: usize) -> Vec<f64> {
    let mut id = vec![0.0; m * m];
    (0..m).for_each(|i| id[i * m + i] = 1.0);
    id
}

fn matmul(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * m];
    for i in 0..m {
        for k in 0..m {
            let aik = a[i * m + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..m {
                c[i * m + j] += aik * b[k * m + j];
            }
        }
    }
    c
}

/// Law of the n-coalescent at time `t` started from singletons, over
/// `enumerate_partitions(n)`.
pub fn kingman_marginal(n: usize, t: f64) -> Result<(Vec<Partition>, Vec<f64>), DiagnosticsError> {
    if !(1..=MAX_FDD_SAMPLE).contains(&n) {
        return Err(DiagnosticsError::SampleSize(n));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(DiagnosticsError::InvalidArgument(format!("time {t}")));
    }
    let (states, q) = generator(n)?;
    let m = states.len();
    let qt: Vec<f64> = q.iter().map(|x| x * t).collect();
    let p = matrix_exponential(&qt, m);
    let start = states.iter().position(Partition::is_singletons).expect("singletons are enumerated");
    Ok((states, p[start * m..(start + 1) * m].to_vec()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FddPoint {
    pub time: f64,
    pub total_variation: f64,
    pub replicates: usize,
}

/// Total-variation distance between the empirical law of the paths at each
/// time and the exact n-coalescent marginal. Paths whose observation ends
/// before a time are left out at that time.
pub fn fdd_compare<P: PartitionPath>(paths: &[P], times: &[f64]) -> Result<Vec<FddPoint>, DiagnosticsError> {
    let n = paths.first().map(PartitionPath::sample_size).ok_or(DiagnosticsError::EmptySample)?;
    times
        .iter()
        .map(|&t| {
            let (states, exact) = kingman_marginal(n, t)?;
            let index: HashMap<&Partition, usize> = states.iter().enumerate().map(|(i, s)| (s, i)).collect();
            let mut counts = vec![0usize; states.len()];
            let mut used = 0;
            for p in paths.iter().filter(|p| p.end_time().is_none_or(|end| t <= end)) {
                let state = p.state_at(t);
                counts[index[&state]] += 1;
                used += 1;
            }
            if used < MIN_FDD_REPLICATES {
                return Err(DiagnosticsError::TooFewReplicates { got: used, needed: MIN_FDD_REPLICATES });
            }
            let tv = 0.5 * counts.iter().zip(&exact).map(|(&c, &e)| (c as f64 / used as f64 - e).abs()).sum::<f64>();
            Ok(FddPoint { time: t, total_variation: tv, replicates: used })
        })
        .collect()
}

/// Finite quantiles of the minimum inter-jump gaps; replicates with fewer
/// than two jumps are skipped.
pub fn min_gap_quantiles<P: PartitionPath>(paths: &[P], qs: &[f64]) -> Vec<f64> {
    let mut gaps: Vec<f64> = paths.iter().map(|p| path_statistics(p).min_jump_gap).filter(|g| g.is_finite()).collect();
    gaps.sort_by(f64::total_cmp);
    if gaps.is_empty() {
        return vec![f64::NAN; qs.len()];
    }
    qs.iter().map(|&q| empirical_quantile(&gaps, q)).collect()
}

/// Per-population-size statistics of a convergence experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationStatistics {
    pub population: usize,
    pub replicates: usize,
    pub censored: usize,
    pub ks_holding: Vec<IndexKs>,
    pub holding_correlation: Vec<f64>,
    pub ks_jump: Vec<IndexKs>,
    pub mm_fraction: f64,
    pub clock: ClockSummary,
    /// Quantiles 0.1, 0.5, 0.9 of the minimum inter-jump gap.
    pub min_gap_quantiles: Vec<f64>,
    pub mean_tmrca: MeanSe,
    pub fdd: Vec<FddPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub n: usize,
    pub master_seed: u64,
    pub replicates: usize,
    pub t_max: f64,
    /// KS threshold for `replicates` samples at the 99th null percentile.
    pub ks_threshold: f64,
    pub per_population: Vec<PopulationStatistics>,
    pub verdicts: Verdicts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub first_holding_ks_decreasing: bool,
    pub first_holding_ks_below_threshold_at_largest: bool,
    pub mm_fraction_decreasing: bool,
    pub c_at_tau_decreasing: bool,
    pub sum_c_sq_decreasing: bool,
    pub sum_d_decreasing: bool,
}

impl Verdicts {
    pub fn from_statistics(stats: &[PopulationStatistics], ks_threshold: f64) -> Self {
        let col = |f: &dyn Fn(&PopulationStatistics) -> f64| stats.iter().map(f).collect::<Vec<_>>();
        let first_ks = col(&|s| s.ks_holding.first().map_or(f64::NAN, |k| k.ks));
        Self {
            first_holding_ks_decreasing: strictly_decreasing(&first_ks),
            first_holding_ks_below_threshold_at_largest: first_ks.last().is_some_and(|&k| k < ks_threshold),
            mm_fraction_decreasing: strictly_decreasing(&col(&|s| s.mm_fraction)),
            c_at_tau_decreasing: strictly_decreasing(&col(&|s| s.clock.c_at_tau.mean)),
            sum_c_sq_decreasing: strictly_decreasing(&col(&|s| s.clock.sum_c_sq.mean)),
            sum_d_decreasing: strictly_decreasing(&col(&|s| s.clock.sum_d.mean)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kingman::{simulate_kingman, CoalescentEvent, CoalescentPath};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_sample_ks() {
        assert_eq!(ks_statistic(&[0.3], |_| 0.5).unwrap(), 0.5);
        assert_eq!(ks_statistic(&[], |x| x), Err(DiagnosticsError::EmptySample));
    }

    #[test]
    fn calibration_is_near_asymptotic_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = calibrate_ks_threshold(1000, 2000, 0.99, &mut rng).unwrap();
        // sqrt(n) D_n tends to the Kolmogorov law, whose 99th percentile is 1.628.
        assert!((q * 1000f64.sqrt() - 1.628).abs() < 0.12, "{q}");
    }

    #[test]
    fn kingman_holding_times_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let paths: Vec<_> = (0..2000).map(|_| simulate_kingman(4, &mut rng).unwrap()).collect();
        let report = holding_time_test(&paths, 4).unwrap();
        assert_eq!(report.per_index.len(), 3);
        assert_eq!(report.per_index[0].rate, 6.0);
        assert!(report.per_index.iter().all(|k| k.ks < 0.05));
        assert!(report.consecutive_correlation.iter().all(|c| c.abs() < 0.1));
        let wrong = ReferenceLaw::exponential(1.0).unwrap();
        let first: Vec<f64> = paths.iter().map(|p| p.events[0].time).collect();
        assert!(ks_statistic(&first, |x| wrong.cdf(x)).unwrap() > 0.5);
    }

    #[test]
    fn too_few_replicates() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let paths: Vec<_> = (0..10).map(|_| simulate_kingman(3, &mut rng).unwrap()).collect();
        assert!(matches!(holding_time_test(&paths, 3), Err(DiagnosticsError::TooFewReplicates { .. })));
    }

    #[test]
    fn mm_fraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let paths: Vec<_> = (0..50).map(|_| simulate_kingman(5, &mut rng).unwrap()).collect();
        assert_eq!(multiple_merger_fraction(&paths).unwrap(), 0.0);
        let triple = CoalescentPath {
            n: 3,
            events: vec![CoalescentEvent { time: 0.0, partition: Partition::single_block(3).unwrap() }],
        };
        assert_eq!(multiple_merger_fraction(&[triple]).unwrap(), 1.0);
        let two_pairs = CoalescentPath {
            n: 4,
            events: vec![CoalescentEvent { time: 0.2, partition: "{{1,2},{3,4}}".parse().unwrap() }],
        };
        assert_eq!(multiple_merger_fraction(&[two_pairs]).unwrap(), 1.0);
        let empty: Vec<CoalescentPath> = vec![];
        assert_eq!(multiple_merger_fraction(&empty), Err(DiagnosticsError::NoEvents));
    }

    #[test]
    fn marginal_rows_are_distributions() {
        for n in 2..=5 {
            for t in [0.0, 0.1, 1.0, 7.0] {
                let (states, p) = kingman_marginal(n, t).unwrap();
                assert_eq!(states.len(), p.len());
                assert!(p.iter().all(|&x| x >= -1e-14));
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            }
        }
        let (states, p) = kingman_marginal(2, 0.7).unwrap();
        let single = states.iter().position(|s| s.num_blocks() == 1).unwrap();
        assert!((p[single] - (1.0 - (-0.7f64).exp())).abs() < 1e-12);
        assert!(kingman_marginal(7, 1.0).is_err());
    }

    #[test]
    fn matrix_exponential_of_rotation_generator() {
        let a = [0.0, 2.0, -2.0, 0.0];
        let e = matrix_exponential(&a, 2);
        assert!((e[0] - 2f64.cos()).abs() < 1e-12);
        assert!((e[1] - 2f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn fdd_at_time_zero_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let paths: Vec<_> = (0..1000).map(|_| simulate_kingman(3, &mut rng).unwrap()).collect();
        let pts = fdd_compare(&paths, &[0.0, 0.5]).unwrap();
        assert_eq!(pts[0].total_variation, 0.0);
        assert!(pts[1].total_variation < 0.06);
    }

    #[test]
    fn summaries() {
        let m = MeanSe::of(&[1.0, 2.0, 3.0]);
        assert_eq!(m.mean, 2.0);
        assert!((m.stderr - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let d = ClockDiagnostics { tau: 3, c_at_tau: 1.0, sum_c_sq: 3.0, sum_d: 3.0 };
        let s = asymptotic_diagnostics(&[Some(d), None]);
        assert_eq!((s.replicates, s.censored), (1, 1));
        assert!(strictly_decreasing(&[3.0, 2.0, 1.0]));
        assert!(!strictly_decreasing(&[3.0, 3.0]));
        assert_eq!(empirical_quantile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.0);
    }
}
