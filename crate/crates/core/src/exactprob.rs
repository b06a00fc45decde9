//! Exact one-generation transition probabilities of the genealogy given the
//! offspring counts, and the coupled `(Z, S)` chain whose counter `Z` jumps at
//! a rate that does not depend on the current partition.

use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{elementary_symmetric, elementary_symmetric_exact, falling_factorial_big};
use crate::particle::OffspringCounts;
use crate::partition::{enumerate_partitions, merge_profile, Partition, PartitionError};

/// Largest target block count handled by the subset DP.
pub const MAX_TARGET_BLOCKS: usize = 12;

/// Tolerance on the coupled-chain row sum.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactProbError {
    #[error("{blocks} lineages cannot be drawn from a population of {population}")]
    TooManyLineages { blocks: usize, population: usize },
    #[error("block count must be at least 1")]
    ZeroBlocks,
    #[error("target partition has {0} blocks, the DP handles at most {MAX_TARGET_BLOCKS}")]
    TargetTooLarge(usize),
    #[error("environment generations disagree on the population size ({0} vs {1})")]
    PopulationMismatch(usize, usize),
    #[error("coupled transition row sums to {0}, not 1")]
    RowSum(f64),
    #[error("coupling broken: partition changed without a counter jump at step {0}")]
    CouplingBroken(usize),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// Offspring counts for a run of generations, generation 1 first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    generations: Vec<OffspringCounts>,
}

impl Environment {
    pub fn new(generations: Vec<OffspringCounts>) -> Result<Self, ExactProbError> {
        if let Some(first) = generations.first() {
            let n = first.population();
            if let Some(bad) = generations.iter().find(|g| g.population() != n) {
                return Err(ExactProbError::PopulationMismatch(n, bad.population()));
            }
        }
        Ok(Self { generations })
    }

    pub fn generations(&self) -> &[OffspringCounts] {
        &self.generations
    }

    pub fn population(&self) -> Option<usize> {
        self.generations.first().map(OffspringCounts::population)
    }
}

fn check_lineages(k: usize, nu: &OffspringCounts) -> Result<(), ExactProbError> {
    if k == 0 {
        return Err(ExactProbError::ZeroBlocks);
    }
    if k > nu.population() {
        return Err(ExactProbError::TooManyLineages { blocks: k, population: nu.population() });
    }
    Ok(())
}

/// Sum over distinct particle tuples of `prod_j (nu_{i_j})_{b_j}`, by a DP over
/// particles whose state is the set of target blocks already given a parent.
fn distinct_tuple_sum<T, F>(nu: &[usize], b: &[usize], zero: T, one: T, weight: F) -> T
where
    T: Clone + std::ops::AddAssign + for<'a> std::ops::Mul<&'a T, Output = T>,
    F: Fn(usize, usize) -> T,
{
    let m = b.len();
    let full = (1usize << m) - 1;
    let mut dp = vec![zero.clone(); full + 1];
    dp[0] = one;
    let mut reached = vec![false; full + 1];
    reached[0] = true;
    for &v in nu {
        if v == 0 {
            continue;
        }
        let factors: Vec<Option<T>> = b.iter().map(|&bj| (bj <= v).then(|| weight(v, bj))).collect();
        if factors.iter().all(Option::is_none) {
            continue;
        }
        // Descending masks: each particle serves at most one target block.
        for mask in (0..full).rev() {
            if !reached[mask] {
                continue;
            }
            for (j, f) in factors.iter().enumerate() {
                let bit = 1 << j;
                if mask & bit != 0 {
                    continue;
                }
                if let Some(f) = f {
                    let add = dp[mask].clone() * f;
                    dp[mask | bit] += add;
                    reached[mask | bit] = true;
                }
            }
        }
    }
    dp[full].clone()
}

/// [`distinct_tuple_sum`] in `u128`, or `None` on overflow.
fn distinct_tuple_sum_u128(nu: &[usize], b: &[usize]) -> Option<u128> {
    let m = b.len();
    let full = (1usize << m) - 1;
    let mut dp = vec![0u128; full + 1];
    dp[0] = 1;
    for &v in nu {
        if v == 0 {
            continue;
        }
        for mask in (0..full).rev() {
            if dp[mask] == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                let bit = 1 << j;
                if mask & bit != 0 || bj > v {
                    continue;
                }
                let f = (0..bj).try_fold(1u128, |acc, i| acc.checked_mul((v - i) as u128))?;
                dp[mask | bit] = dp[mask | bit].checked_add(dp[mask].checked_mul(f)?)?;
            }
        }
    }
    Some(dp[full])
}

fn falling_f64(v: usize, b: usize) -> f64 {
    (0..b).map(|i| (v - i) as f64).product()
}

fn falling_big(v: usize, b: usize) -> BigUint {
    falling_factorial_big(v as u64, b as u64)
}

fn profile_for(xi: &Partition, eta: &Partition, nu: &OffspringCounts) -> Result<Option<Vec<usize>>, ExactProbError> {
    check_lineages(xi.num_blocks(), nu)?;
    let Some(profile) = merge_profile(xi, eta)? else {
        return Ok(None);
    };
    if profile.counts().len() > MAX_TARGET_BLOCKS {
        return Err(ExactProbError::TargetTooLarge(profile.counts().len()));
    }
    Ok(Some(profile.0))
}

/// `p_{xi eta}` in floating point; zero when `eta` is not a coarsening of `xi`.
pub fn transition_probability(xi: &Partition, eta: &Partition, nu: &OffspringCounts) -> Result<f64, ExactProbError> {
    let Some(b) = profile_for(xi, eta, nu)? else {
        return Ok(0.0);
    };
    let n = nu.population() as f64;
    // Scaling each factor by N^{-b_j} keeps intermediate sums near 1.
    let sum = distinct_tuple_sum(nu.counts(), &b, 0.0, 1.0, |v, bj| falling_f64(v, bj) / n.powi(bj as i32));
    let k = xi.num_blocks();
    let scale: f64 = (0..k).map(|i| n / (n - i as f64)).product();
    Ok(sum * scale)
}

/// `p_{xi eta}` as an exact rational.
pub fn transition_probability_exact(
    xi: &Partition,
    eta: &Partition,
    nu: &OffspringCounts,
) -> Result<BigRational, ExactProbError> {
    let Some(b) = profile_for(xi, eta, nu)? else {
        return Ok(BigRational::zero());
    };
    let sum = match distinct_tuple_sum_u128(nu.counts(), &b) {
        Some(sum) => BigUint::from(sum),
        None => distinct_tuple_sum(nu.counts(), &b, BigUint::zero(), BigUint::one(), falling_big),
    };
    let den = falling_factorial_big(nu.population() as u64, xi.num_blocks() as u64);
    Ok(BigRational::new(BigInt::from(sum), BigInt::from(den)))
}

/// Oracle: `p_{xi eta}` by enumerating every tuple of distinct parents.
/// Exponential in `|eta|`; meant for tiny populations only.
pub fn transition_probability_brute_force(
    xi: &Partition,
    eta: &Partition,
    nu: &OffspringCounts,
) -> Result<BigRational, ExactProbError> {
    let Some(b) = profile_for(xi, eta, nu)? else {
        return Ok(BigRational::zero());
    };
    fn walk(nu: &[usize], b: &[usize], used: &mut Vec<bool>, acc: BigUint, total: &mut BigUint) {
        let Some((&bj, rest)) = b.split_first() else {
            *total += acc;
            return;
        };
        for i in 0..nu.len() {
            if used[i] || nu[i] < bj {
                continue;
            }
            used[i] = true;
            walk(nu, rest, used, &acc * falling_big(nu[i], bj), total);
            used[i] = false;
        }
    }
    let mut total = BigUint::zero();
    walk(nu.counts(), &b, &mut vec![false; nu.population()], BigUint::one(), &mut total);
    let den = falling_factorial_big(nu.population() as u64, xi.num_blocks() as u64);
    Ok(BigRational::new(BigInt::from(total), BigInt::from(den)))
}

/// `p_{xi xi}` for `|xi| = k`: `k! e_k(nu) / (N)_k`.
pub fn identity_probability(k: usize, nu: &OffspringCounts) -> Result<f64, ExactProbError> {
    check_lineages(k, nu)?;
    Ok(identity_probabilities(k, nu)[k])
}

/// `p_{xi xi}` for every block count `0..=k_max` at once (entry 0 is 1).
pub fn identity_probabilities(k_max: usize, nu: &OffspringCounts) -> Vec<f64> {
    let n = nu.population() as f64;
    let e = elementary_symmetric(nu.counts().iter().filter(|&&v| v > 0).map(|&v| v as f64 / n), k_max);
    let mut scale = 1.0;
    (0..=k_max)
        .map(|k| {
            if k > 0 {
                scale *= k as f64 * n / (n - (k - 1) as f64);
            }
            if k > nu.population() {
                0.0
            } else {
                (e[k] * scale).min(1.0)
            }
        })
        .collect()
}

pub fn identity_probability_exact(k: usize, nu: &OffspringCounts) -> Result<BigRational, ExactProbError> {
    check_lineages(k, nu)?;
    let e = elementary_symmetric_exact(nu.counts(), k);
    let k_fact: BigUint = (1..=k as u64).map(BigUint::from).product();
    let den = falling_factorial_big(nu.population() as u64, k as u64);
    Ok(BigRational::new(BigInt::from(&e[k] * k_fact), BigInt::from(den)))
}

/// `p_t = max_xi (1 - p_{xi xi}) = 1 - p_{Delta Delta}` for a sample of `n`.
pub fn max_jump_probability(n: usize, nu: &OffspringCounts) -> Result<f64, ExactProbError> {
    Ok(1.0 - identity_probability(n, nu)?)
}

/// Probability that the counter `Z` jumps in a generation where the partition,
/// currently with `k` blocks, stays put: `(p_kk - p_nn) / p_kk`.
pub fn counter_jump_given_stay(p_kk: f64, p_nn: f64) -> f64 {
    if p_kk <= 0.0 {
        0.0
    } else {
        ((p_kk - p_nn) / p_kk).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoupledState {
    pub z: usize,
    pub s: Partition,
}

impl CoupledState {
    pub fn initial(n: usize) -> Result<Self, ExactProbError> {
        Ok(Self { z: 0, s: Partition::singletons(n)? })
    }
}

/// The four-case law of one coupled step from a given partition.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledRow {
    /// `1 - p_t`: neither `Z` nor `S` moves.
    pub stay: f64,
    /// `p_{xi xi} - p_{Delta Delta}`: `Z` jumps, `S` stays.
    pub counter_only: f64,
    /// `(eta, p_{xi eta})` for every strict coarsening `eta`.
    pub moves: Vec<(Partition, f64)>,
}

impl CoupledRow {
    pub fn total(&self) -> f64 {
        self.stay + self.counter_only + self.moves.iter().map(|(_, p)| p).sum::<f64>()
    }
}

/// All coarsenings of `xi`, `xi` itself included, in the enumeration order of
/// partitions of its blocks.
pub fn coarsenings(xi: &Partition) -> Result<Vec<Partition>, ExactProbError> {
    enumerate_partitions(xi.num_blocks())?
        .iter()
        .map(|q| xi.coarsen(q.labels()).map_err(ExactProbError::from))
        .collect()
}

pub fn coupled_row(xi: &Partition, nu: &OffspringCounts) -> Result<CoupledRow, ExactProbError> {
    let n = xi.n();
    check_lineages(n, nu)?;
    let ids = identity_probabilities(n, nu);
    let p_delta = ids[n];
    let p_xi = ids[xi.num_blocks()];
    let mut moves = Vec::new();
    for eta in coarsenings(xi)? {
        if eta.num_blocks() == xi.num_blocks() {
            continue;
        }
        let p = transition_probability(xi, &eta, nu)?;
        if p > 0.0 {
            moves.push((eta, p));
        }
    }
    let row = CoupledRow { stay: p_delta, counter_only: p_xi - p_delta, moves };
    let total = row.total();
    if (total - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(ExactProbError::RowSum(total));
    }
    Ok(row)
}

pub fn coupled_step<R: Rng + ?Sized>(
    state: &CoupledState,
    nu: &OffspringCounts,
    rng: &mut R,
) -> Result<CoupledState, ExactProbError> {
    let row = coupled_row(&state.s, nu)?;
    let mut u = rng.random::<f64>() * row.total();
    if u < row.stay {
        return Ok(state.clone());
    }
    u -= row.stay;
    if u < row.counter_only {
        return Ok(CoupledState { z: state.z + 1, s: state.s.clone() });
    }
    u -= row.counter_only;
    let last = row.moves.len().saturating_sub(1);
    for (i, (eta, p)) in row.moves.iter().enumerate() {
        if u < *p || i == last {
            return Ok(CoupledState { z: state.z + 1, s: eta.clone() });
        }
        u -= p;
    }
    // Only reachable when moves is empty and rounding pushed u past the first two cases.
    Ok(CoupledState { z: state.z + 1, s: state.s.clone() })
}

/// Trajectory from `(0, Delta_n)` through `env`, initial state included.
pub fn simulate_coupled<R: Rng + ?Sized>(
    n: usize,
    env: &Environment,
    rng: &mut R,
) -> Result<Vec<CoupledState>, ExactProbError> {
    let mut states = vec![CoupledState::initial(n)?];
    for (step, nu) in env.generations().iter().enumerate() {
        let prev = states.last().unwrap();
        let next = coupled_step(prev, nu, rng)?;
        if next.s != prev.s && next.z != prev.z + 1 {
            return Err(ExactProbError::CouplingBroken(step + 1));
        }
        states.push(next);
    }
    Ok(states)
}

/// Exact one-generation transition matrix over `enumerate_partitions(n)`,
/// row-major.
pub fn transition_matrix_exact(n: usize, nu: &OffspringCounts) -> Result<Vec<Vec<BigRational>>, ExactProbError> {
    let states = enumerate_partitions(n)?;
    states.iter().map(|xi| states.iter().map(|eta| transition_probability_exact(xi, eta, nu)).collect()).collect()
}

pub fn transition_matrix(n: usize, nu: &OffspringCounts) -> Result<Vec<Vec<f64>>, ExactProbError> {
    let states = enumerate_partitions(n)?;
    states.iter().map(|xi| states.iter().map(|eta| transition_probability(xi, eta, nu)).collect()).collect()
}

/// CSV matrix with partitions as row and column labels.
pub fn transition_matrix_csv(n: usize, nu: &OffspringCounts) -> Result<String, ExactProbError> {
    let states = enumerate_partitions(n)?;
    let matrix = transition_matrix(n, nu)?;
    let mut out = String::from("from");
    for s in &states {
        let _ = write!(out, ",\"{s}\"");
    }
    out.push('\n');
    for (s, row) in states.iter().zip(&matrix) {
        let _ = write!(out, "\"{s}\"");
        for p in row {
            let _ = write!(out, ",{p:?}");
        }
        out.push('\n');
    }
    Ok(out)
}

/// Lossy conversion used when reporting exact values.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
