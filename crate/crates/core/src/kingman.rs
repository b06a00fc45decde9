//! Kingman's n-coalescent: exact path simulation and the reference laws of its
//! holding and jump times.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genealogy::PartitionPath;
use crate::partition::{enumerate_partitions, merge_profile, Partition, PartitionError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KingmanError {
    #[error("the coalescent needs at least two lineages, got {0}")]
    SampleTooSmall(usize),
    #[error("rate must be positive and finite, got {0}")]
    InvalidRate(f64),
    #[error("Erlang shape must be at least 1")]
    InvalidShape,
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// Total merger rate `k(k-1)/2` with `k` lineages; `alpha_n` when `k = n`.
pub fn pair_rate(k: usize) -> f64 {
    (k * k.saturating_sub(1)) as f64 / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalescentEvent {
    pub time: f64,
    pub partition: Partition,
}

/// A realized n-coalescent, implicitly starting at `(0, singletons)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalescentPath {
    pub n: usize,
    pub events: Vec<CoalescentEvent>,
}

impl CoalescentPath {
    pub fn tmrca(&self) -> Option<f64> {
        self.events.last().filter(|e| e.partition.num_blocks() == 1).map(|e| e.time)
    }
}

impl PartitionPath for CoalescentPath {
    fn sample_size(&self) -> usize {
        self.n
    }

    fn jumps(&self) -> Vec<(f64, &Partition)> {
        self.events.iter().map(|e| (e.time, &e.partition)).collect()
    }

    fn end_time(&self) -> Option<f64> {
        None
    }
}

/// Exponential variate by inversion of a uniform on `(0, 1]`.
pub(crate) fn exponential<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    -u.ln() / rate
}

/// Uniform pair `(i, j)`, `i < j < k`, by indexing the lexicographic pair list.
fn uniform_pair<R: Rng + ?Sized>(k: usize, rng: &mut R) -> (usize, usize) {
    let mut idx = rng.random_range(0..k * (k - 1) / 2);
    let mut i = 0;
    loop {
        let row = k - 1 - i;
        if idx < row {
            return (i, i + 1 + idx);
        }
        idx -= row;
        i += 1;
    }
}

/// Simulates the n-coalescent from the singletons partition until one block
/// remains.
pub fn simulate_kingman<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CoalescentPath, KingmanError> {
    if n < 2 {
        return Err(KingmanError::SampleTooSmall(n));
    }
    let mut state = Partition::singletons(n)?;
    let mut time = 0.0;
    let mut events = Vec::with_capacity(n - 1);
    for k in (2..=n).rev() {
        time += exponential(pair_rate(k), rng);
        let (i, j) = uniform_pair(k, rng);
        state = state.merge_blocks(&[i, j])?;
        events.push(CoalescentEvent { time, partition: state.clone() });
    }
    Ok(CoalescentPath { n, events })
}

/// An n-coalescent generated by uniformization: a Poisson clock of rate
/// `alpha_n` ticks, and a tick with `k` blocks present merges a uniform pair
/// with probability `C(k,2)/alpha_n`. The partition path is exactly Kingman;
/// the tick times are the continuous-time analogue of the coupled jump
/// counter, so the m-th tick is Erlang(m, alpha_n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformizedPath {
    pub path: CoalescentPath,
    pub clock_jumps: Vec<f64>,
}

/// Runs the uniformized chain until the sample has coalesced and at least
/// `min_ticks` clock ticks have been recorded.
pub fn simulate_kingman_uniformized<R: Rng + ?Sized>(
    n: usize,
    min_ticks: usize,
    rng: &mut R,
) -> Result<UniformizedPath, KingmanError> {
    if n < 2 {
        return Err(KingmanError::SampleTooSmall(n));
    }
    let alpha = pair_rate(n);
    let mut state = Partition::singletons(n)?;
    let mut time = 0.0;
    let mut events = Vec::with_capacity(n - 1);
    let mut ticks = Vec::new();
    while state.num_blocks() > 1 || ticks.len() < min_ticks {
        time += exponential(alpha, rng);
        ticks.push(time);
        let k = state.num_blocks();
        if k > 1 && rng.random::<f64>() * alpha < pair_rate(k) {
            let (i, j) = uniform_pair(k, rng);
            state = state.merge_blocks(&[i, j])?;
            events.push(CoalescentEvent { time, partition: state.clone() });
        }
    }
    Ok(UniformizedPath { path: CoalescentPath { n, events }, clock_jumps: ticks })
}

/// Reference distributions for holding and jump times of the limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceLaw {
    Exponential { rate: f64 },
    Erlang { rate: f64, shape: u32 },
}

impl ReferenceLaw {
    pub fn exponential(rate: f64) -> Result<Self, KingmanError> {
        check_rate(rate)?;
        Ok(Self::Exponential { rate })
    }

    pub fn erlang(rate: f64, shape: u32) -> Result<Self, KingmanError> {
        check_rate(rate)?;
        if shape == 0 {
            return Err(KingmanError::InvalidShape);
        }
        Ok(Self::Erlang { rate, shape })
    }

    /// `P[T <= t]`. Negative `t` gives 0.
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t.is_infinite() {
            return 1.0;
        }
        match *self {
            Self::Exponential { rate } => -(-rate * t).exp_m1(),
            Self::Erlang { rate, shape } => erlang_cdf(rate, shape, t),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::Erlang { rate, shape } => shape as f64 / rate,
        }
    }
}

fn check_rate(rate: f64) -> Result<(), KingmanError> {
    if rate > 0.0 && rate.is_finite() {
        Ok(())
    } else {
        Err(KingmanError::InvalidRate(rate))
    }
}

/// `1 - e^{-x} sum_{i<m} x^i / i!` with `x = rate * t`.
fn erlang_cdf(rate: f64, shape: u32, t: f64) -> f64 {
    let x = rate * t;
    if shape == 1 {
        return -(-x).exp_m1();
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for i in 1..shape {
        term *= x / i as f64;
        sum += term;
    }
    (1.0 - (-x).exp() * sum).clamp(0.0, 1.0)
}

/// Checked front end: `theoretical_cdf(exponential|erlang, rate, m, t)`.
pub fn theoretical_cdf(law: ReferenceLaw, t: f64) -> Result<f64, KingmanError> {
    if t < 0.0 || t.is_nan() {
        return Err(KingmanError::NegativeTime(t));
    }
    Ok(law.cdf(t))
}

/// The n-coalescent generator over `enumerate_partitions(n)` as a dense
/// row-major matrix, together with the state list.
pub fn generator(n: usize) -> Result<(Vec<Partition>, Vec<f64>), KingmanError> {
    if n < 1 {
        return Err(KingmanError::SampleTooSmall(n));
    }
    let states = enumerate_partitions(n)?;
    let m = states.len();
    let mut q = vec![0.0; m * m];
    for (i, xi) in states.iter().enumerate() {
        for (j, eta) in states.iter().enumerate() {
            if eta.num_blocks() + 1 != xi.num_blocks() {
                continue;
            }
            if merge_profile(xi, eta)?.is_some() {
                q[i * m + j] = 1.0;
            }
        }
        q[i * m + i] = -pair_rate(xi.num_blocks());
    }
    Ok((states, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_lineages_always_merge_into_one_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let reps = 100_000;
        let mut total = 0.0;
        for _ in 0..reps {
            let path = simulate_kingman(2, &mut rng).unwrap();
            assert_eq!(path.events.len(), 1);
            assert_eq!(path.events[0].partition.to_string(), "{{1,2}}");
            total += path.events[0].time;
        }
        let mean = total / reps as f64;
        // Exp(1) has sd 1, so the standard error is 1/sqrt(reps).
        assert!((mean - 1.0).abs() < 4.0 / (reps as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn tmrca_mean_for_four() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let reps = 100_000;
        let samples: Vec<f64> = (0..reps).map(|_| simulate_kingman(4, &mut rng).unwrap().tmrca().unwrap()).collect();
        let mean = samples.iter().sum::<f64>() / reps as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let expected: f64 = (2..=4).map(|k| 1.0 / pair_rate(k)).sum();
        assert!((expected - 1.5).abs() < 1e-15);
        assert!((mean - expected).abs() < 4.0 * (var / reps as f64).sqrt());
    }

    #[test]
    fn binary_mergers_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let path = simulate_kingman(6, &mut rng).unwrap();
            assert_eq!(path.events.len(), 5);
            let mut prev = Partition::singletons(6).unwrap();
            let mut prev_t = 0.0;
            for e in &path.events {
                assert_eq!(e.partition.num_blocks() + 1, prev.num_blocks());
                assert!(prev.is_refined_by(&e.partition));
                assert!(e.time > prev_t);
                prev = e.partition.clone();
                prev_t = e.time;
            }
            assert_eq!(prev.num_blocks(), 1);
        }
    }

    #[test]
    fn pair_choice_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut hits = [0usize; 6];
        let reps = 60_000;
        for _ in 0..reps {
            let (i, j) = uniform_pair(4, &mut rng);
            assert!(i < j && j < 4);
            let idx = match (i, j) {
                (0, 1) => 0,
                (0, 2) => 1,
                (0, 3) => 2,
                (1, 2) => 3,
                (1, 3) => 4,
                _ => 5,
            };
            hits[idx] += 1;
        }
        for h in hits {
            assert!((h as f64 - 10_000.0).abs() < 400.0, "{hits:?}");
        }
    }

    #[test]
    fn rejects_small_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(simulate_kingman(1, &mut rng), Err(KingmanError::SampleTooSmall(1)));
    }

    #[test]
    fn cdf_examples() {
        let exp10 = ReferenceLaw::exponential(10.0).unwrap();
        assert_eq!(exp10.cdf(0.0), 0.0);
        for &(alpha, t) in &[(0.5, 0.3), (3.0, 1.7), (10.0, 0.05)] {
            let e = ReferenceLaw::exponential(alpha).unwrap().cdf(t);
            let g = ReferenceLaw::erlang(alpha, 1).unwrap().cdf(t);
            assert_eq!(e, g);
            assert!((e - (1.0 - (-alpha * t).exp())).abs() < 1e-15);
        }
        let e2 = ReferenceLaw::erlang(1.0, 2).unwrap().cdf(1.0);
        assert!((e2 - (1.0 - 2.0 * (-1.0f64).exp())).abs() < 1e-15);
        assert!((e2 - 0.26424).abs() < 1e-5);
        assert!(ReferenceLaw::exponential(0.0).is_err());
        assert!(ReferenceLaw::erlang(1.0, 0).is_err());
        assert!(theoretical_cdf(exp10, -1.0).is_err());
    }

    #[test]
    fn cdf_is_monotone_and_reaches_one() {
        let law = ReferenceLaw::erlang(6.0, 4).unwrap();
        let mut prev = 0.0;
        for i in 0..2000 {
            let v = law.cdf(i as f64 * 0.01);
            assert!(v >= prev);
            prev = v;
        }
        assert!((law.cdf(100.0) - 1.0).abs() < 1e-15);
        assert_eq!(law.cdf(f64::INFINITY), 1.0);
    }

    #[test]
    fn uniformized_clock_dominates_mergers() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let u = simulate_kingman_uniformized(4, 3, &mut rng).unwrap();
            assert!(u.clock_jumps.len() >= 3);
            assert_eq!(u.path.tmrca(), u.path.events.last().map(|e| e.time));
            for e in &u.path.events {
                assert!(u.clock_jumps.contains(&e.time));
            }
            // At the singletons partition every tick is a merger.
            assert_eq!(u.clock_jumps[0], u.path.events[0].time);
        }
    }

    #[test]
    fn generator_rows_sum_to_zero() {
        let (states, q) = generator(4).unwrap();
        let m = states.len();
        for i in 0..m {
            let s: f64 = q[i * m..(i + 1) * m].iter().sum();
            assert!(s.abs() < 1e-12);
        }
    }
}
