//! Numerical checks of the deterministic inequalities behind the convergence
//! argument: clock properties, envelopes on the identity probability,
//! sum-product bounds and block monotonicity. Each checker returns
//! [`BoundReport`]s listing every violation with a witness.
//!
//! Exact inputs are checked in rational arithmetic. Floating-point checks
//! allow a relative slack of [`FLOAT_SLACK`] for rounding.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genealogy::{coalescence_rates_exact_raw, CoalescenceClock, GenealogyError};
use crate::numeric::{binomial, elementary_symmetric, elementary_symmetric_exact, falling_factorial_big, NeumaierSum};
use crate::particle::{generate_offspring, OffspringCounts, ResamplingScheme, WeightState};

/// Relative slack on floating-point comparisons.
pub const FLOAT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("clock has no generations")]
    EmptyClock,
    #[error("grid pair (s = {s}, t = {t}) needs t > s >= 0")]
    InvalidGrid { s: f64, t: f64 },
    #[error("no generations between tau({s}) and tau({t})")]
    EmptyWindow { s: f64, t: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("all weights are zero")]
    ZeroWeights,
    #[error(transparent)]
    Genealogy(#[from] GenealogyError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub trials: u64,
    pub violations: u64,
    /// Minimum of `rhs - lhs` over all trials.
    pub worst_margin: f64,
    /// First violating input, if any.
    pub witness: Option<String>,
    /// Constants fitted from the data rather than asserted.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fitted: BTreeMap<String, f64>,
}

impl BoundReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            trials: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            witness: None,
            fitted: BTreeMap::new(),
        }
    }

    /// Records one trial of `lhs <= rhs`, tolerating a relative slack.
    pub fn check_le(&mut self, lhs: f64, rhs: f64, scale: f64, witness: impl FnOnce() -> String) {
        let tol = FLOAT_SLACK * scale.abs().max(lhs.abs()).max(rhs.abs()).max(1.0);
        self.record(rhs - lhs, rhs - lhs < -tol || lhs.is_nan() || rhs.is_nan(), witness);
    }

    /// Records one trial of an exact comparison with the given margin.
    pub fn check_exact(&mut self, holds: bool, margin: f64, witness: impl FnOnce() -> String) {
        self.record(margin, !holds, witness);
    }

    fn record(&mut self, margin: f64, violated: bool, witness: impl FnOnce() -> String) {
        self.trials += 1;
        self.worst_margin = self.worst_margin.min(margin);
        if violated {
            self.violations += 1;
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
        }
    }

    /// Folds another report on the same inequality into this one.
    pub fn absorb(&mut self, other: BoundReport) {
        debug_assert_eq!(self.name, other.name);
        self.trials += other.trials;
        self.violations += other.violations;
        self.worst_margin = self.worst_margin.min(other.worst_margin);
        if self.witness.is_none() {
            self.witness = other.witness;
        }
        for (k, v) in other.fitted {
            self.fitted.entry(k).or_insert(v);
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Merges `reports` into `acc` by name, keeping first-seen order.
pub fn absorb_all(acc: &mut Vec<BoundReport>, reports: Vec<BoundReport>) {
    for r in reports {
        match acc.iter_mut().find(|a| a.name == r.name) {
            Some(a) => a.absorb(r),
            None => acc.push(r),
        }
    }
}

/// CSV summary `name,trials,violations,worst_margin` with a header line.
pub fn reports_csv(reports: &[BoundReport]) -> String {
    let mut out = String::from("name,trials,violations,worst_margin\n");
    for r in reports {
        out.push_str(&format!("{},{},{},{:?}\n", r.name, r.trials, r.violations, r.worst_margin));
    }
    out
}

/// Clock properties: `0 <= D <= c <= 1` per generation, and for each grid
/// pair `(s', t')` the window-sum bounds
/// `t' - (s'+1) 1{s' > 0} <= sum_{tau(s')+1}^{tau(t')} c <= t' + 1`
/// and `tau(t') >= t'`.
pub fn check_cn_properties(clock: &CoalescenceClock, grid: &[(f64, f64)]) -> Result<Vec<BoundReport>, BoundsError> {
    if clock.is_empty() {
        return Err(BoundsError::EmptyClock);
    }
    let mut rates = BoundReport::new("cn_rates_ordered");
    for r in clock.records() {
        let w = || format!("generation {}: c = {:?}, d = {:?}", r.generation, r.c, r.d);
        rates.check_le(0.0, r.d, 1.0, w);
        rates.check_le(r.d, r.c, 1.0, w);
        rates.check_le(r.c, 1.0, 1.0, w);
    }
    let mut window = BoundReport::new("cn_window_sum");
    let mut ceiling = BoundReport::new("cn_tau_ceiling");
    for &(s, t) in grid {
        if !(s >= 0.0 && t > s) {
            return Err(BoundsError::InvalidGrid { s, t });
        }
        let (tau_s, tau_t) = (clock.tau(s)?, clock.tau(t)?);
        let sum: f64 = clock.records()[tau_s..tau_t].iter().map(|r| r.c).collect::<NeumaierSum>().value();
        let lower = t - if s > 0.0 { s + 1.0 } else { 0.0 };
        let w = || format!("s' = {s:?}, t' = {t:?}: window sum {sum:?}");
        window.check_le(lower, sum, t + 1.0, w);
        window.check_le(sum, t + 1.0, t + 1.0, w);
        ceiling.check_exact(tau_t as f64 >= t, tau_t as f64 - t, || format!("tau({t:?}) = {tau_t}"));
    }
    Ok(vec![rates, window, ceiling])
}

/// `l! e_l(values)`: the sum over ordered tuples of distinct indices of the
/// product of entries. Also returns `(sum |x|)^l` as a magnitude scale.
fn distinct_product_sum(values: impl Iterator<Item = f64> + Clone, l: usize) -> (f64, f64) {
    let e = elementary_symmetric(values.clone(), l);
    let l_fact: f64 = (1..=l).map(|i| i as f64).product();
    let abs: f64 = values.map(f64::abs).sum();
    (l_fact * e[l], abs.powi(l as i32))
}

/// Sum-product bounds over the window `tau(s)+1..=tau(t)`:
/// * `l! e_l(c) <= (t - s + 1)^l <= (t + 1)^l`;
/// * `[(t-s)^l - (c(tau(s)) + C(l,2) sum c^2)(t+1)^l] 1{c(tau(s)) <= t-s}
///   <= l! e_l(c) <= (t-s)^l + c(tau(t)) (t+1)^l`;
///
/// and over `1..=tau(t)`:
/// * `l! e_l(c + B D) <= l! e_l(c) + (sum D)(t+1)^{l-1}(1+B)^l`;
/// * `l! e_l(c - B D) >= l! e_l(c) - (sum D)(t+1)^{l-1}(1+B)^l`.
pub fn check_sum_product_bounds(
    clock: &CoalescenceClock,
    s: f64,
    t: f64,
    l: usize,
    b: f64,
) -> Result<Vec<BoundReport>, BoundsError> {
    if !(s >= 0.0 && t > s) {
        return Err(BoundsError::InvalidGrid { s, t });
    }
    if l == 0 || !(b > 0.0 && b.is_finite()) {
        return Err(BoundsError::InvalidArgument(format!("need l >= 1 and B > 0, got l = {l}, B = {b}")));
    }
    let (tau_s, tau_t) = (clock.tau(s)?, clock.tau(t)?);
    if tau_t <= tau_s {
        return Err(BoundsError::EmptyWindow { s, t });
    }
    let window = &clock.records()[tau_s..tau_t];
    let whole = &clock.records()[..tau_t];
    let li = l as i32;
    let w = || format!("s = {s:?}, t = {t:?}, l = {l}, B = {b:?}");

    let (sp, scale) = distinct_product_sum(window.iter().map(|r| r.c), l);
    let mut a = BoundReport::new("sumprod_window_upper");
    a.check_le(sp, (t - s + 1.0).powi(li), scale, w);
    a.check_le((t - s + 1.0).powi(li), (t + 1.0).powi(li), 1.0, w);

    let c_tau_s = clock.c_at(tau_s);
    let sum_c2: f64 = window.iter().map(|r| r.c * r.c).collect::<NeumaierSum>().value();
    let pairs = binomial(l as u64, 2) as f64;
    let lower = if c_tau_s <= t - s { (t - s).powi(li) - (c_tau_s + pairs * sum_c2) * (t + 1.0).powi(li) } else { 0.0 };
    let upper = (t - s).powi(li) + clock.c_at(tau_t) * (t + 1.0).powi(li);
    let mut two_sided = BoundReport::new("sumprod_window_two_sided");
    two_sided.check_le(lower, sp, scale, w);
    two_sided.check_le(sp, upper, scale, w);

    let (base, base_scale) = distinct_product_sum(whole.iter().map(|r| r.c), l);
    let (plus, plus_scale) = distinct_product_sum(whole.iter().map(|r| r.c + b * r.d), l);
    let (minus, minus_scale) = distinct_product_sum(whole.iter().map(|r| r.c - b * r.d), l);
    let sum_d: f64 = whole.iter().map(|r| r.d).collect::<NeumaierSum>().value();
    let slack = sum_d * (t + 1.0).powi(li - 1) * (1.0 + b).powi(li);
    let mut inflated = BoundReport::new("sumprod_inflated_upper");
    inflated.check_le(plus, base + slack, plus_scale.max(base_scale), w);
    let mut deflated = BoundReport::new("sumprod_deflated_lower");
    deflated.check_le(base - slack, minus, minus_scale.max(base_scale), w);

    Ok(vec![a, two_sided, inflated, deflated])
}

/// `p_{k+1} <= p_k` for the identity probabilities of every row and every
/// `k < k_max`, checked exactly as `(k+1) e_{k+1} <= (N - k) e_k`.
/// Rows are raw counts with `N` their length.
pub fn check_block_monotonicity<T: AsRef<[usize]>>(corpus: &[T], k_max: usize) -> Result<BoundReport, BoundsError> {
    if let Some(min_n) = corpus.iter().map(|r| r.as_ref().len()).min() {
        if k_max > min_n {
            return Err(BoundsError::InvalidArgument(format!(
                "k_max = {k_max} exceeds the smallest population {min_n}"
            )));
        }
    }
    let mut report = BoundReport::new("identity_monotone_in_blocks");
    for row in corpus {
        let nu = row.as_ref();
        let n = nu.len();
        let e = elementary_symmetric_exact(nu, k_max);
        let mut k_fact = BigUint::one();
        for k in 1..k_max {
            k_fact *= BigUint::from(k);
            let lhs = BigUint::from(k + 1) * &e[k + 1];
            let rhs = BigUint::from(n - k) * &e[k];
            let p_k = ratio(&e[k] * &k_fact, falling_factorial_big(n as u64, k as u64));
            let p_next = ratio(&lhs * &k_fact, falling_factorial_big(n as u64, k as u64 + 1));
            report.check_exact(lhs <= rhs, to_f64(&(&p_k - &p_next)), || format!("nu = {nu:?}, k = {k}"));
        }
    }
    Ok(report)
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact ingredients of the identity-probability envelopes for one row.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeInput {
    pub population: usize,
    pub p_kk: BigRational,
    pub c: BigRational,
    pub d: BigRational,
}

pub fn envelope_inputs<T: AsRef<[usize]>>(corpus: &[T], k: usize) -> Result<Vec<EnvelopeInput>, BoundsError> {
    corpus
        .iter()
        .map(|row| {
            let nu = row.as_ref();
            if k < 2 || k > nu.len() {
                return Err(BoundsError::InvalidArgument(format!("k = {k} outside 2..={}", nu.len())));
            }
            let e = elementary_symmetric_exact(nu, k);
            let k_fact: BigUint = (1..=k as u64).map(BigUint::from).product();
            let p_kk = ratio(&e[k] * k_fact, falling_factorial_big(nu.len() as u64, k as u64));
            let (c, d) = coalescence_rates_exact_raw(nu);
            Ok(EnvelopeInput { population: nu.len(), p_kk, c, d })
        })
        .collect()
}

/// `(k-1)! (k-2) exp(2 sqrt(2(k-2)))`, the multiple-merger coefficient of the
/// lower envelope without its free constant `K`.
pub fn lower_envelope_coefficient(k: usize) -> f64 {
    let k_minus_1_fact: f64 = (1..k).map(|i| i as f64).product();
    let m = (k - 2) as f64;
    k_minus_1_fact * m * (2.0 * (2.0 * m).sqrt()).exp()
}

/// Fits and checks both envelopes on the identity probability `p_kk`.
///
/// Lower: `p_kk >= 1 - C(k,2) N^{k-2}/(N-2)_{k-2} [c + B_k d]` with
/// `B_k = K (k-1)! (k-2) exp(2 sqrt(2(k-2)))`; the smallest admissible `K` is
/// fitted. Rows that no `K` can satisfy (no multiple-merger mass to absorb the
/// excess) are violations.
///
/// Upper: `p_kk <= 1 - gamma_N C(k,2) [c - C(k-1,2) d]`; the largest
/// admissible `gamma_N` is fitted per population size and reported with
/// `M = max(0, N (1 - gamma_N))`. Rows forcing `gamma_N <= 0` are violations.
pub fn fit_identity_envelopes(inputs: &[EnvelopeInput], k: usize) -> Result<Vec<BoundReport>, BoundsError> {
    if k < 2 {
        return Err(BoundsError::InvalidArgument(format!("envelopes need k >= 2, got {k}")));
    }
    let pairs = BigRational::from_integer(BigInt::from(binomial(k as u64, 2)));
    let inner_pairs = BigRational::from_integer(BigInt::from(binomial(k as u64 - 1, 2)));
    let coeff = lower_envelope_coefficient(k);

    let mut lower = BoundReport::new(format!("identity_lower_envelope_k{k}"));
    let mut required_k: f64 = 0.0;
    let mut factors = Vec::with_capacity(inputs.len());
    for (i, row) in inputs.iter().enumerate() {
        let n = row.population as u64;
        let factor = &pairs * ratio(BigUint::from(n).pow(k as u32 - 2), falling_factorial_big(n - 2, k as u64 - 2));
        let jump = BigRational::one() - &row.p_kk;
        let excess = &jump - &factor * &row.c;
        if excess.is_positive() {
            let per_k = to_f64(&(&factor * &row.d)) * coeff;
            if per_k > 0.0 {
                required_k = required_k.max(to_f64(&excess) / per_k);
            } else {
                lower.check_exact(false, -to_f64(&excess), || {
                    format!("row {i}: N = {n}, excess {excess} with no D mass")
                });
            }
        }
        factors.push((to_f64(&factor), to_f64(&jump)));
    }
    for (row, (factor, jump)) in inputs.iter().zip(factors) {
        let rhs = factor * (to_f64(&row.c) + required_k * coeff * to_f64(&row.d));
        lower.check_le(jump, rhs, rhs, || format!("N = {}, p_kk = {}", row.population, row.p_kk));
    }
    lower.fitted.insert("K".into(), required_k);

    let mut upper = BoundReport::new(format!("identity_upper_envelope_k{k}"));
    let mut gamma: BTreeMap<usize, BigRational> = BTreeMap::new();
    for row in inputs {
        let q = &pairs * (&row.c - &inner_pairs * &row.d);
        if !q.is_positive() {
            continue;
        }
        let g = (BigRational::one() - &row.p_kk) / q;
        gamma
            .entry(row.population)
            .and_modify(|cur| {
                if g < *cur {
                    *cur = g.clone();
                }
            })
            .or_insert(g);
    }
    for row in inputs {
        let g = gamma.get(&row.population).cloned().unwrap_or_else(BigRational::one);
        let rhs = BigRational::one() - &g * &pairs * (&row.c - &inner_pairs * &row.d);
        upper.check_exact(g.is_positive() && row.p_kk <= rhs, to_f64(&(&rhs - &row.p_kk)), || {
            format!("N = {}, p_kk = {}, gamma = {g}", row.population, row.p_kk)
        });
    }
    for (n, g) in &gamma {
        let g = to_f64(g);
        upper.fitted.insert(format!("gamma_N{n}"), g);
        upper.fitted.insert(format!("M_N{n}"), (*n as f64 * (1.0 - g)).max(0.0));
    }
    Ok(vec![lower, upper])
}

pub fn check_identity_envelopes<T: AsRef<[usize]>>(corpus: &[T], k: usize) -> Result<Vec<BoundReport>, BoundsError> {
    fit_identity_envelopes(&envelope_inputs(corpus, k)?, k)
}

/// Conditional merger ratio `sum w^3 / sum w^2` for multinomial resampling,
/// which equals `[(N)_3^{-1} sum E(nu_i)_3] / [(N)_2^{-1} sum E(nu_i)_2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergerCondition {
    pub lhs_ratio: f64,
}

impl MergerCondition {
    /// Whether the ratio is dominated by the candidate `b_N`.
    pub fn passes_for(&self, b_n: f64) -> bool {
        self.lhs_ratio <= b_n
    }
}

pub fn check_merger_condition(weights: &WeightState) -> Result<MergerCondition, BoundsError> {
    let w = weights.weights();
    let w2: f64 = w.iter().map(|x| x * x).collect::<NeumaierSum>().value();
    if w2 == 0.0 {
        return Err(BoundsError::ZeroWeights);
    }
    let w3: f64 = w.iter().map(|x| x * x * x).collect::<NeumaierSum>().value();
    Ok(MergerCondition { lhs_ratio: w3 / w2 })
}

/// Exact `sum w^3 / sum w^2` for rational weights.
pub fn merger_ratio_exact(weights: &[BigRational]) -> Result<BigRational, BoundsError> {
    let w2: BigRational = weights.iter().map(|x| x * x).sum();
    if w2.is_zero() {
        return Err(BoundsError::ZeroWeights);
    }
    let w3: BigRational = weights.iter().map(|x| x * x * x).sum();
    Ok(w3 / w2)
}

/// Monte Carlo estimate of the conditional merger ratio for any scheme: the
/// mean of `sum (nu_i)_3 / (N)_3` over the mean of `sum (nu_i)_2 / (N)_2`.
pub fn estimate_merger_ratio<R: Rng + ?Sized>(
    scheme: ResamplingScheme,
    weights: &WeightState,
    draws: usize,
    rng: &mut R,
) -> Result<f64, BoundsError> {
    let n = weights.population();
    if draws == 0 || n < 3 {
        return Err(BoundsError::InvalidArgument(format!("need draws >= 1 and N >= 3, got {draws}, {n}")));
    }
    let (mut triples, mut pairs) = (NeumaierSum::default(), NeumaierSum::default());
    for _ in 0..draws {
        let nu =
            generate_offspring(scheme, weights, n, rng).map_err(|e| BoundsError::InvalidArgument(e.to_string()))?;
        for &v in nu.counts() {
            let v = v as f64;
            pairs.add(v * (v - 1.0));
            triples.add(v * (v - 1.0) * (v - 2.0));
        }
    }
    let nf = n as f64;
    let num = triples.value() / (nf * (nf - 1.0) * (nf - 2.0));
    let den = pairs.value() / (nf * (nf - 1.0));
    Ok(if den == 0.0 { 0.0 } else { num / den })
}

/// Random offspring-count rows mixing every resampling scheme with flat,
/// skewed and near-degenerate weights; populations are drawn from `populations`.
pub fn random_offspring_corpus<R: Rng + ?Sized>(
    size: usize,
    populations: &[usize],
    rng: &mut R,
) -> Vec<OffspringCounts> {
    (0..size)
        .map(|i| {
            let n = populations[rng.random_range(0..populations.len())];
            let scheme = ResamplingScheme::ALL[i % ResamplingScheme::ALL.len()];
            let sigma = [0.0, 0.5, 1.5, 4.0][rng.random_range(0..4)];
            let potentials = (0..n)
                .map(|_| {
                    let z: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng);
                    (sigma * z).exp()
                })
                .collect();
            let weights = WeightState::from_potentials(potentials).expect("lognormal potentials are positive");
            generate_offspring(scheme, &weights, n, rng).expect("weights match the population")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn ceiling_clock_passes() {
        let clock = CoalescenceClock::from_rates(std::iter::repeat_n((1.0, 1.0), 5));
        let reports = check_cn_properties(&clock, &[(0.0, 2.5), (1.0, 2.5)]).unwrap();
        assert!(reports.iter().all(BoundReport::passed));
        assert_eq!(reports[2].worst_margin, 0.5);
    }

    #[test]
    fn corrupted_clock_is_flagged() {
        let clock = CoalescenceClock::from_rates([(0.2, 0.3), (0.2, 0.1)]);
        let reports = check_cn_properties(&clock, &[]).unwrap();
        assert_eq!(reports[0].violations, 1);
        assert!(reports[0].witness.as_deref().unwrap().starts_with("generation 1"));
        let clock = CoalescenceClock::from_rates([(1.5, 0.0)]);
        assert_eq!(check_cn_properties(&clock, &[]).unwrap()[0].violations, 1);
    }

    #[test]
    fn grid_errors() {
        let clock = CoalescenceClock::from_rates([(0.5, 0.0); 4]);
        assert!(matches!(check_cn_properties(&clock, &[(1.0, 1.0)]), Err(BoundsError::InvalidGrid { .. })));
        assert!(matches!(check_cn_properties(&CoalescenceClock::new(), &[]), Err(BoundsError::EmptyClock)));
    }

    #[test]
    fn sum_product_example() {
        let clock = CoalescenceClock::from_rates([(0.5, 0.0); 6]);
        let reports = check_sum_product_bounds(&clock, 0.0, 1.0, 1, 1.0).unwrap();
        assert!(reports.iter().all(BoundReport::passed));
        // Window sum is 1 against a bound of 2.
        assert_eq!(reports[0].worst_margin, 0.0);
        assert!(reports[0].trials == 2);
        // With D = 0 the inflated bound is an equality.
        assert_eq!(reports[2].worst_margin, 0.0);
    }

    #[test]
    fn sum_product_negative_controls() {
        // c > 1 lets the window sum overshoot t - s + 1.
        let clock = CoalescenceClock::from_rates([(3.0, 0.0); 4]);
        let reports = check_sum_product_bounds(&clock, 0.0, 1.0, 1, 1.0).unwrap();
        assert_eq!(reports[0].violations, 1);
        // D > c breaks the inflated bound.
        let clock = CoalescenceClock::from_rates([(0.01, 1.0); 100]);
        let reports = check_sum_product_bounds(&clock, 0.0, 0.5, 2, 1.0).unwrap();
        assert_eq!(reports[2].violations, 1);
        assert!(matches!(check_sum_product_bounds(&clock, 0.0, 1.0, 0, 1.0), Err(BoundsError::InvalidArgument(_))));
        assert!(matches!(
            check_sum_product_bounds(&CoalescenceClock::from_rates([(1.0, 0.0); 4]), 0.2, 0.5, 1, 1.0),
            Err(BoundsError::EmptyWindow { .. })
        ));
    }

    #[test]
    fn monotonicity_examples() {
        let r = check_block_monotonicity(&[vec![2, 1, 0]], 3).unwrap();
        assert!(r.passed());
        assert_eq!(r.trials, 2);
        // Counts summing past N break the ordering.
        let r = check_block_monotonicity(&[vec![3, 3, 0]], 2).unwrap();
        assert_eq!(r.violations, 1);
        assert!(check_block_monotonicity(&[vec![1, 1]], 3).is_err());
    }

    #[test]
    fn envelopes_pinch_at_two_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let corpus = random_offspring_corpus(200, &[10, 40], &mut rng);
        let reports = check_identity_envelopes(&corpus, 2).unwrap();
        assert!(reports.iter().all(BoundReport::passed));
        assert_eq!(reports[0].fitted["K"], 0.0);
        assert_eq!(reports[0].worst_margin, 0.0);
        assert_eq!(reports[1].fitted["M_N10"], 0.0);
        assert_eq!(reports[1].fitted["gamma_N10"], 1.0);
    }

    #[test]
    fn envelopes_trivial_for_identity_counts() {
        let corpus = vec![OffspringCounts::identity(8)];
        let reports = check_identity_envelopes(&corpus, 3).unwrap();
        assert!(reports.iter().all(BoundReport::passed));
        assert_eq!(reports[0].worst_margin, 0.0);
    }

    #[test]
    fn envelope_negative_control() {
        let bad = EnvelopeInput { population: 10, p_kk: q(1, 2), c: q(0, 1), d: q(0, 1) };
        let reports = fit_identity_envelopes(&[bad], 3).unwrap();
        assert_eq!(reports[0].violations, 2);
        let bad = EnvelopeInput { population: 10, p_kk: q(3, 2), c: q(1, 10), d: q(0, 1) };
        let reports = fit_identity_envelopes(&[bad], 3).unwrap();
        assert_eq!(reports[1].violations, 1);
    }

    #[test]
    fn merger_condition_examples() {
        let n = 7;
        let uniform = vec![q(1, n); n as usize];
        assert_eq!(merger_ratio_exact(&uniform).unwrap(), q(1, n));
        let mut point = vec![q(0, 1); 5];
        point[0] = q(1, 1);
        assert_eq!(merger_ratio_exact(&point).unwrap(), q(1, 1));
        assert!(merger_ratio_exact(&[q(0, 1)]).is_err());
        let w = WeightState::from_weights(vec![0.5, 0.25, 0.25]).unwrap();
        let r = check_merger_condition(&w).unwrap();
        assert!(r.lhs_ratio <= 0.5 && r.passes_for(0.5));
    }

    #[test]
    fn merger_ratio_estimate_for_multinomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = WeightState::uniform(20);
        let est = estimate_merger_ratio(ResamplingScheme::Multinomial, &w, 20_000, &mut rng).unwrap();
        assert!((est - 0.05).abs() < 0.005, "{est}");
        assert_eq!(estimate_merger_ratio(ResamplingScheme::Systematic, &w, 10, &mut rng).unwrap(), 0.0);
    }
}
