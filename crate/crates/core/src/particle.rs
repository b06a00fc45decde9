//! Forward dynamics of the particle population: weights, resampling into
//! offspring counts, and uniform parental assignment given the counts.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::NeumaierSum;

/// Tolerance on `|sum(w) - 1|` for a valid [`WeightState`].
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParticleError {
    #[error("population size must be at least 2, got {0}")]
    PopulationTooSmall(usize),
    #[error("offspring counts sum to {sum}, expected {expected}")]
    CountsDoNotSumToN { sum: usize, expected: usize },
    #[error("weights sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("weight {index} is {value}, weights must be finite and non-negative")]
    InvalidWeight { index: usize, value: f64 },
    #[error("{weights} weights supplied for a population of {population}")]
    LengthMismatch { weights: usize, population: usize },
    #[error("all potentials are zero")]
    ZeroPotentials,
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
    #[error("parent index {index} out of range for a population of {population}")]
    ParentOutOfRange { index: usize, population: usize },
}

/// Offspring counts `nu^(1:N)` of one generation; sums to `N = counts.len()`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct OffspringCounts(Vec<usize>);

impl OffspringCounts {
    pub fn new(counts: Vec<usize>) -> Result<Self, ParticleError> {
        let sum: usize = counts.iter().sum();
        if sum != counts.len() {
            return Err(ParticleError::CountsDoNotSumToN { sum, expected: counts.len() });
        }
        if counts.is_empty() {
            return Err(ParticleError::PopulationTooSmall(0));
        }
        Ok(Self(counts))
    }

    /// Every individual has exactly one offspring.
    pub fn identity(population: usize) -> Self {
        Self(vec![1; population])
    }

    /// All offspring descend from individual `parent`.
    pub fn point_mass(population: usize, parent: usize) -> Self {
        let mut counts = vec![0; population];
        counts[parent] = population;
        Self(counts)
    }

    pub fn population(&self) -> usize {
        self.0.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }
}

impl AsRef<[usize]> for OffspringCounts {
    fn as_ref(&self) -> &[usize] {
        &self.0
    }
}

impl TryFrom<Vec<usize>> for OffspringCounts {
    type Error = ParticleError;
    fn try_from(v: Vec<usize>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<OffspringCounts> for Vec<usize> {
    fn from(c: OffspringCounts) -> Self {
        c.0
    }
}

/// Parent indices `a^(1:N)` (0-based): `parents[j]` is the parent of child `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParentAssignment(Vec<usize>);

impl ParentAssignment {
    pub fn new(parents: Vec<usize>) -> Result<Self, ParticleError> {
        let population = parents.len();
        if let Some(&index) = parents.iter().find(|&&p| p >= population) {
            return Err(ParticleError::ParentOutOfRange { index, population });
        }
        Ok(Self(parents))
    }

    pub fn identity(population: usize) -> Self {
        Self((0..population).collect())
    }

    pub fn parents(&self) -> &[usize] {
        &self.0
    }

    pub fn parent_of(&self, child: usize) -> usize {
        self.0[child]
    }

    /// Recounts offspring per parent.
    pub fn offspring_counts(&self) -> OffspringCounts {
        let mut counts = vec![0; self.0.len()];
        for &p in &self.0 {
            counts[p] += 1;
        }
        OffspringCounts(counts)
    }
}

/// Normalized weights plus the unnormalized potentials they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightState {
    weights: Vec<f64>,
    potentials: Vec<f64>,
}

impl WeightState {
    pub fn uniform(population: usize) -> Self {
        Self { weights: vec![1.0 / population as f64; population], potentials: vec![1.0; population] }
    }

    /// Normalizes non-negative potentials, accumulating with compensated
    /// summation.
    pub fn from_potentials(potentials: Vec<f64>) -> Result<Self, ParticleError> {
        for (index, &value) in potentials.iter().enumerate() {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ParticleError::InvalidWeight { index, value });
            }
        }
        let total: f64 = potentials.iter().copied().collect::<NeumaierSum>().value();
        if total <= 0.0 {
            return Err(ParticleError::ZeroPotentials);
        }
        let weights = potentials.iter().map(|g| g / total).collect();
        Ok(Self { weights, potentials })
    }

    /// Accepts already-normalized weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self, ParticleError> {
        for (index, &value) in weights.iter().enumerate() {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ParticleError::InvalidWeight { index, value });
            }
        }
        let total: f64 = weights.iter().copied().collect::<NeumaierSum>().value();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(ParticleError::NotNormalized(total));
        }
        Ok(Self { potentials: weights.clone(), weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn potentials(&self) -> &[f64] {
        &self.potentials
    }

    pub fn population(&self) -> usize {
        self.weights.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResamplingScheme {
    Multinomial,
    Residual,
    Stratified,
    Systematic,
    /// Multinomial with uniform weights whatever the weight state says.
    WrightFisher,
}

impl ResamplingScheme {
    pub const ALL: [ResamplingScheme; 5] =
        [Self::Multinomial, Self::Residual, Self::Stratified, Self::Systematic, Self::WrightFisher];
}

/// Resamples `population` offspring from `weights` under `scheme`.
pub fn generate_offspring<R: Rng + ?Sized>(
    scheme: ResamplingScheme,
    weights: &WeightState,
    population: usize,
    rng: &mut R,
) -> Result<OffspringCounts, ParticleError> {
    if population < 2 {
        return Err(ParticleError::PopulationTooSmall(population));
    }
    if weights.population() != population {
        return Err(ParticleError::LengthMismatch { weights: weights.population(), population });
    }
    let w = weights.weights();
    let counts = match scheme {
        ResamplingScheme::Multinomial => multinomial(w, population, rng),
        ResamplingScheme::WrightFisher => {
            let mut counts = vec![0; population];
            for _ in 0..population {
                counts[rng.random_range(0..population)] += 1;
            }
            counts
        }
        ResamplingScheme::Residual => residual(w, population, rng),
        ResamplingScheme::Stratified => {
            let mut points = (0..population).map(|k| k as f64 + rng.random::<f64>());
            count_points(w, population, &mut points)
        }
        ResamplingScheme::Systematic => {
            let u: f64 = rng.random();
            let mut points = (0..population).map(|k| k as f64 + u);
            count_points(w, population, &mut points)
        }
    };
    debug_assert_eq!(counts.iter().sum::<usize>(), population);
    OffspringCounts::new(counts)
}

/// Counts how many of the ascending `points` (in `[0, draws)`) fall into each
/// half-open stratum `[draws * W_{i-1}, draws * W_i)` of the cumulative weights.
fn count_points(w: &[f64], draws: usize, points: &mut dyn Iterator<Item = f64>) -> Vec<usize> {
    let scale = draws as f64;
    let last_positive = w.iter().rposition(|&x| x > 0.0).unwrap_or(w.len() - 1);
    let mut counts = vec![0; w.len()];
    let mut cum = NeumaierSum::default();
    cum.add(w[0] * scale);
    let mut i = 0;
    for u in points {
        while i < last_positive && u >= cum.value() {
            i += 1;
            cum.add(w[i] * scale);
        }
        counts[i] += 1;
    }
    counts
}

/// Multinomial(draws, w) by walking sorted uniforms, generated from
/// normalized exponential spacings.
fn multinomial<R: Rng + ?Sized>(w: &[f64], draws: usize, rng: &mut R) -> Vec<usize> {
    let mut spacings = Vec::with_capacity(draws);
    let mut acc = 0.0;
    for _ in 0..draws {
        acc += rng.sample::<f64, _>(Exp1);
        spacings.push(acc);
    }
    let total = acc + rng.sample::<f64, _>(Exp1);
    let scale = draws as f64 / total;
    let mut points = spacings.into_iter().map(|s| s * scale);
    count_points(w, draws, &mut points)
}

fn residual<R: Rng + ?Sized>(w: &[f64], population: usize, rng: &mut R) -> Vec<usize> {
    let scale = population as f64;
    let mut counts: Vec<usize> = w.iter().map(|&x| (x * scale).floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let remainder = population.saturating_sub(assigned);
    if remainder == 0 {
        return counts;
    }
    let residuals: Vec<f64> = w.iter().zip(&counts).map(|(&x, &c)| (x * scale - c as f64).max(0.0)).collect();
    let total: f64 = residuals.iter().copied().collect::<NeumaierSum>().value();
    let extra = if total > 0.0 {
        let normalized: Vec<f64> = residuals.iter().map(|r| r / total).collect();
        multinomial(&normalized, remainder, rng)
    } else {
        multinomial(w, remainder, rng)
    };
    for (c, e) in counts.iter_mut().zip(extra) {
        *c += e;
    }
    counts
}

/// Uniformly random parent assignment realizing `counts`: the multiset with
/// `nu_i` copies of `i`, uniformly permuted.
pub fn assign_parents<R: Rng + ?Sized>(counts: &OffspringCounts, rng: &mut R) -> ParentAssignment {
    let mut parents = Vec::with_capacity(counts.population());
    for (i, &c) in counts.counts().iter().enumerate() {
        parents.extend(std::iter::repeat_n(i, c));
    }
    parents.shuffle(rng);
    ParentAssignment(parents)
}

/// Draws the parents of `k` distinct children without materializing the full
/// assignment. Under uniform assignment the parents at any `k` fixed child
/// positions are a uniform draw without replacement from the parent multiset.
pub struct ParentSampler {
    prefix: Vec<usize>,
}

impl ParentSampler {
    pub fn new(counts: &OffspringCounts) -> Self {
        let mut prefix = Vec::with_capacity(counts.population());
        let mut acc = 0;
        for &c in counts.counts() {
            acc += c;
            prefix.push(acc);
        }
        Self { prefix }
    }

    /// Parents of `k` distinct children, in draw order.
    pub fn sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R, out: &mut Vec<usize>) {
        let population = self.prefix.len();
        assert!(k <= population, "cannot draw {k} distinct slots from {population}");
        let mut slots: Vec<usize> = Vec::with_capacity(k);
        out.clear();
        while slots.len() < k {
            let slot = rng.random_range(0..population);
            if slots.contains(&slot) {
                continue;
            }
            slots.push(slot);
            out.push(self.prefix.partition_point(|&p| p <= slot));
        }
    }
}

/// Positive distribution of per-particle potentials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialDistribution {
    /// `exp(sigma * Z)`, `Z` standard normal.
    Lognormal {
        sigma: f64,
    },
    Uniform {
        low: f64,
        high: f64,
    },
    /// `high` with probability `p_high`, else `low`.
    TwoPoint {
        low: f64,
        high: f64,
        p_high: f64,
    },
}

impl PotentialDistribution {
    pub fn validate(&self) -> Result<(), ParticleError> {
        let bad = |msg: String| Err(ParticleError::InvalidParameter(msg));
        match *self {
            Self::Lognormal { sigma } if !(sigma >= 0.0 && sigma.is_finite()) => {
                bad(format!("lognormal sigma {sigma}"))
            }
            Self::Uniform { low, high } if !(0.0 <= low && low <= high && high > 0.0 && high.is_finite()) => {
                bad(format!("uniform({low}, {high})"))
            }
            Self::TwoPoint { low, high, p_high }
                if !(0.0 <= low && 0.0 <= high && high.is_finite() && (0.0..=1.0).contains(&p_high)) =>
            {
                bad(format!("two_point({low}, {high}, {p_high})"))
            }
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Lognormal { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                (sigma * z).exp()
            }
            Self::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            Self::TwoPoint { low, high, p_high } => {
                if rng.random::<f64>() < p_high {
                    high
                } else {
                    low
                }
            }
        }
    }
}

/// How weights evolve from one generation to the next.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightModel {
    /// Uniform weights: the neutral case.
    Constant,
    /// Fresh i.i.d. potentials every generation, independent of ancestry.
    IidPotential { potential: PotentialDistribution },
    /// Offspring potential `g_parent^h * xi^(1-h)` with fresh noise `xi`; at
    /// `h = 0` this is `IidPotential`, at `h = 1` potentials are inherited.
    InheritedFitness { potential: PotentialDistribution, heritability: f64 },
    /// All weight on the first particle every generation.
    PointMass,
}

impl WeightModel {
    pub fn validate(&self) -> Result<(), ParticleError> {
        match self {
            Self::Constant | Self::PointMass => Ok(()),
            Self::IidPotential { potential } => potential.validate(),
            Self::InheritedFitness { potential, heritability } => {
                if !(0.0..=1.0).contains(heritability) {
                    return Err(ParticleError::InvalidParameter(format!("heritability {heritability}")));
                }
                potential.validate()
            }
        }
    }

    /// True when a generation's weights do not depend on the ancestry of
    /// its particles.
    pub fn is_memoryless(&self) -> bool {
        !matches!(self, Self::InheritedFitness { .. })
    }

    /// Weights of the founding generation.
    pub fn initial<R: Rng + ?Sized>(&self, population: usize, rng: &mut R) -> Result<WeightState, ParticleError> {
        match self {
            Self::Constant => Ok(WeightState::uniform(population)),
            Self::PointMass => point_mass_weights(population),
            Self::IidPotential { potential } | Self::InheritedFitness { potential, .. } => {
                WeightState::from_potentials((0..population).map(|_| potential.sample(rng)).collect())
            }
        }
    }
}

fn point_mass_weights(population: usize) -> Result<WeightState, ParticleError> {
    let mut g = vec![0.0; population];
    g[0] = 1.0;
    WeightState::from_potentials(g)
}

/// Weights of the children generation given their parents.
pub fn evolve_weights<R: Rng + ?Sized>(
    model: &WeightModel,
    prev: &WeightState,
    parents: &ParentAssignment,
    rng: &mut R,
) -> Result<WeightState, ParticleError> {
    let population = parents.parents().len();
    if prev.population() != population {
        return Err(ParticleError::LengthMismatch { weights: prev.population(), population });
    }
    match model {
        WeightModel::Constant => Ok(WeightState::uniform(population)),
        WeightModel::PointMass => point_mass_weights(population),
        WeightModel::IidPotential { potential } => {
            WeightState::from_potentials((0..population).map(|_| potential.sample(rng)).collect())
        }
        WeightModel::InheritedFitness { potential, heritability } => {
            let h = *heritability;
            let g = parents
                .parents()
                .iter()
                .map(|&a| prev.potentials()[a].powf(h) * potential.sample(rng).powf(1.0 - h))
                .collect();
            WeightState::from_potentials(g)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn systematic_uniform_gives_one_each() {
        let mut r = rng(1);
        for &n in &[2, 3, 7, 10, 100, 1000] {
            for _ in 0..50 {
                let nu = generate_offspring(ResamplingScheme::Systematic, &WeightState::uniform(n), n, &mut r).unwrap();
                assert!(nu.counts().iter().all(|&c| c == 1), "N = {n}: {:?}", nu.counts());
            }
        }
    }

    #[test]
    fn degenerate_weights_give_all_offspring_to_one() {
        let mut r = rng(2);
        let n = 20;
        let mut w = vec![0.0; n];
        w[0] = 1.0;
        let ws = WeightState::from_weights(w).unwrap();
        for scheme in [
            ResamplingScheme::Multinomial,
            ResamplingScheme::Residual,
            ResamplingScheme::Stratified,
            ResamplingScheme::Systematic,
        ] {
            let nu = generate_offspring(scheme, &ws, n, &mut r).unwrap();
            assert_eq!(nu, OffspringCounts::point_mass(n, 0), "{scheme:?}");
        }
        // Trailing zero weights must not absorb rounding slack.
        let mut w = vec![0.0; n];
        w[n - 2] = 1.0;
        let ws = WeightState::from_weights(w).unwrap();
        let nu = generate_offspring(ResamplingScheme::Multinomial, &ws, n, &mut r).unwrap();
        assert_eq!(nu, OffspringCounts::point_mass(n, n - 2));
    }

    #[test]
    fn multinomial_pair_factorial_moment() {
        // E[sum (nu_i)_2] / (N)_2 = sum w_i^2 = 1/N for uniform weights.
        let mut r = rng(3);
        let n = 100;
        let reps = 100_000;
        let w = WeightState::uniform(n);
        let mut acc = 0.0;
        let mut acc_sq = 0.0;
        for _ in 0..reps {
            let nu = generate_offspring(ResamplingScheme::Multinomial, &w, n, &mut r).unwrap();
            let x = nu.counts().iter().map(|&c| (c * c.saturating_sub(1)) as f64).sum::<f64>() / (n * (n - 1)) as f64;
            acc += x;
            acc_sq += x * x;
        }
        let mean = acc / reps as f64;
        let se = ((acc_sq / reps as f64 - mean * mean) / reps as f64).sqrt();
        assert!((mean - 0.01).abs() < 4.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn counts_always_sum_to_population() {
        let mut r = rng(4);
        for scheme in ResamplingScheme::ALL {
            for &n in &[2, 5, 33] {
                for _ in 0..100 {
                    let g: Vec<f64> = (0..n).map(|_| r.random::<f64>().powi(3)).collect();
                    let w = WeightState::from_potentials(g).unwrap();
                    let nu = generate_offspring(scheme, &w, n, &mut r).unwrap();
                    assert_eq!(nu.counts().iter().sum::<usize>(), n);
                }
            }
        }
    }

    #[test]
    fn residual_keeps_deterministic_part() {
        let mut r = rng(5);
        let ws = WeightState::from_weights(vec![0.5, 0.3, 0.2, 0.0]).unwrap();
        for _ in 0..200 {
            let nu = generate_offspring(ResamplingScheme::Residual, &ws, 4, &mut r).unwrap();
            assert!(nu.counts()[0] >= 2);
            assert!(nu.counts()[1] >= 1);
            assert_eq!(nu.counts()[3], 0);
        }
    }

    #[test]
    fn offspring_errors() {
        let mut r = rng(6);
        assert_eq!(
            generate_offspring(ResamplingScheme::Multinomial, &WeightState::uniform(1), 1, &mut r),
            Err(ParticleError::PopulationTooSmall(1))
        );
        assert!(matches!(
            generate_offspring(ResamplingScheme::Multinomial, &WeightState::uniform(3), 4, &mut r),
            Err(ParticleError::LengthMismatch { .. })
        ));
        assert!(matches!(WeightState::from_weights(vec![0.5, 0.4]), Err(ParticleError::NotNormalized(_))));
        assert!(matches!(WeightState::from_potentials(vec![0.0, 0.0]), Err(ParticleError::ZeroPotentials)));
        assert!(OffspringCounts::new(vec![2, 0, 0]).is_err());
    }

    #[test]
    fn forced_assignments() {
        let mut r = rng(7);
        let a = assign_parents(&OffspringCounts::point_mass(5, 0), &mut r);
        assert_eq!(a.parents(), &[0, 0, 0, 0, 0]);
        let a = assign_parents(&OffspringCounts::new(vec![2, 0]).unwrap(), &mut r);
        assert_eq!(a.parents(), &[0, 0]);
        let a = assign_parents(&OffspringCounts::identity(6), &mut r);
        let mut sorted = a.parents().to_vec();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn assignment_recounts_to_counts() {
        let mut r = rng(8);
        for _ in 0..200 {
            let nu = generate_offspring(ResamplingScheme::Multinomial, &WeightState::uniform(12), 12, &mut r).unwrap();
            assert_eq!(assign_parents(&nu, &mut r).offspring_counts(), nu);
        }
    }

    #[test]
    fn parent_sampler_matches_assignment_marginal() {
        // P[parent of a fixed child = i] = nu_i / N.
        let mut r = rng(9);
        let nu = OffspringCounts::new(vec![3, 0, 1, 2, 0, 0]).unwrap();
        let sampler = ParentSampler::new(&nu);
        let mut hits = [0usize; 6];
        let mut pair_same = 0usize;
        let reps = 120_000;
        let mut out = Vec::new();
        for _ in 0..reps {
            sampler.sample(2, &mut r, &mut out);
            hits[out[0]] += 1;
            if out[0] == out[1] {
                pair_same += 1;
            }
        }
        for (i, &c) in nu.counts().iter().enumerate() {
            let expected = reps as f64 * c as f64 / 6.0;
            assert!((hits[i] as f64 - expected).abs() < 5.0 * expected.max(1.0).sqrt(), "{hits:?}");
        }
        // Pair coalescence probability is c_N = sum (nu)_2 / (N)_2 = (6 + 2) / 30.
        let expected = reps as f64 * 8.0 / 30.0;
        assert!((pair_same as f64 - expected).abs() < 5.0 * expected.sqrt());
    }

    #[test]
    fn constant_and_point_mass_potentials_give_uniform_weights() {
        let mut r = rng(10);
        let prev = WeightState::uniform(8);
        let parents = ParentAssignment::identity(8);
        let w = evolve_weights(&WeightModel::Constant, &prev, &parents, &mut r).unwrap();
        assert!(w.weights().iter().all(|&x| x == 0.125));
        let degenerate =
            WeightModel::IidPotential { potential: PotentialDistribution::Uniform { low: 2.0, high: 2.0 } };
        let w = evolve_weights(&degenerate, &prev, &parents, &mut r).unwrap();
        assert!(w.weights().iter().all(|&x| x == 0.125));
        let degenerate = WeightModel::IidPotential { potential: PotentialDistribution::Lognormal { sigma: 0.0 } };
        let w = evolve_weights(&degenerate, &prev, &parents, &mut r).unwrap();
        assert!(w.weights().iter().all(|&x| x == 0.125));
    }

    #[test]
    fn zero_potentials_rejected() {
        let mut r = rng(11);
        let model = WeightModel::IidPotential {
            potential: PotentialDistribution::TwoPoint { low: 0.0, high: 1.0, p_high: 0.0 },
        };
        let prev = WeightState::uniform(4);
        assert_eq!(
            evolve_weights(&model, &prev, &ParentAssignment::identity(4), &mut r),
            Err(ParticleError::ZeroPotentials)
        );
    }

    #[test]
    fn zero_heritability_reproduces_iid_draws() {
        let potential = PotentialDistribution::Lognormal { sigma: 0.7 };
        let iid = WeightModel::IidPotential { potential };
        let inherited = WeightModel::InheritedFitness { potential, heritability: 0.0 };
        let prev = WeightState::from_potentials(vec![1.0, 5.0, 0.1, 2.0]).unwrap();
        let parents = ParentAssignment::new(vec![1, 1, 3, 0]).unwrap();
        let a = evolve_weights(&iid, &prev, &parents, &mut rng(12)).unwrap();
        let b = evolve_weights(&inherited, &prev, &parents, &mut rng(12)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn weight_model_serde_names() {
        let m: WeightModel =
            serde_json::from_str(r#"{"kind":"iid_potential","potential":{"kind":"uniform","low":0.5,"high":2.0}}"#)
                .unwrap();
        assert_eq!(m, WeightModel::IidPotential { potential: PotentialDistribution::Uniform { low: 0.5, high: 2.0 } });
        let s: ResamplingScheme = serde_json::from_str("\"wright_fisher\"").unwrap();
        assert_eq!(s, ResamplingScheme::WrightFisher);
    }
}
