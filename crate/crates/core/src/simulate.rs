//! One replicate of a genealogy experiment: a population evolved under a
//! resampling scheme and weight model, a uniform sample from its final
//! generation, and that sample's lineages traced back until the coalescence
//! clock reaches the horizon.
//!
//! Memoryless weight models draw every reverse-time generation afresh, so
//! generations are produced lazily while tracing. Models with inherited
//! fitness need the forward history; it is regenerated block by block from
//! checkpoints so memory stays at `O(N sqrt(G))` for `G` generations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactprob::{counter_jump_given_stay, identity_probabilities};
use crate::genealogy::{
    sample_individuals, ClockDiagnostics, CoalescenceClock, CounterJump, GenealogyError, GenealogyPath,
    GenealogyTracer, Termination,
};
use crate::particle::{
    assign_parents, evolve_weights, generate_offspring, OffspringCounts, ParentAssignment, ParentSampler,
    ParticleError, ResamplingScheme, WeightModel, WeightState,
};

/// Slack on the per-generation check `0 <= d <= c <= 1`.
const RATE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("sample of {n} does not fit a population of {population}")]
    SampleTooLarge { n: usize, population: usize },
    #[error("generation {generation}: rates c = {c}, d = {d} violate 0 <= d <= c <= 1")]
    RateInvariant { generation: usize, c: f64, d: f64 },
    #[error(transparent)]
    Particle(#[from] ParticleError),
    #[error(transparent)]
    Genealogy(#[from] GenealogyError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateSpec {
    pub population: usize,
    pub sample_size: usize,
    pub scheme: ResamplingScheme,
    pub weight_model: WeightModel,
    /// Rescaled horizon.
    pub t_max: f64,
    /// Most generations simulated; the replicate is censored if the clock has
    /// not reached `t_max` by then.
    pub hard_cap: usize,
    /// Also track the coupled jump counter.
    pub track_counter: bool,
    /// Keep the full per-generation clock in the outcome.
    pub keep_clock: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub path: GenealogyPath,
    /// `None` when censored.
    pub diagnostics: Option<ClockDiagnostics>,
    pub clock: Option<CoalescenceClock>,
    /// Generations simulated backwards.
    pub generations: usize,
}

/// Per-generation bookkeeping shared by both simulation strategies.
struct Backtrace {
    n: usize,
    t_max: f64,
    track_counter: bool,
    clock: CoalescenceClock,
    tracer: GenealogyTracer,
    counter: Vec<CounterJump>,
    parents: Vec<usize>,
}

impl Backtrace {
    /// Absorbs one reverse-time generation; returns true once the clock has
    /// reached the horizon.
    fn step<R: Rng + ?Sized>(
        &mut self,
        counts: &OffspringCounts,
        parents_of: impl FnOnce(&[usize], &mut Vec<usize>, &mut R),
        rng: &mut R,
    ) -> Result<bool, SimulationError> {
        let time = self.clock.reached();
        let record = *self.clock.push_counts(counts);
        if !(record.d >= -RATE_SLACK && record.d <= record.c + RATE_SLACK && record.c <= 1.0 + RATE_SLACK) {
            return Err(SimulationError::RateInvariant { generation: record.generation, c: record.c, d: record.d });
        }
        let blocks = self.tracer.state().num_blocks();
        let mut merged = false;
        if blocks > 1 {
            let mut parents = std::mem::take(&mut self.parents);
            parents_of(self.tracer.lineages(), &mut parents, rng);
            merged = self.tracer.step(&parents, time)?;
            self.parents = parents;
        }
        if self.track_counter {
            let jumped = merged || {
                let p = identity_probabilities(self.n, counts);
                let q = counter_jump_given_stay(p[blocks], p[self.n]);
                q > 0.0 && rng.random::<f64>() < q
            };
            if jumped {
                self.counter.push(CounterJump { generation: record.generation, rescaled_time: time });
            }
        }
        Ok(record.cum >= self.t_max)
    }

    fn finish(self, reached: bool, keep_clock: bool) -> Result<ReplicateOutcome, SimulationError> {
        let generations = self.clock.len();
        let termination = if !reached {
            Termination::Censored
        } else if self.tracer.is_coalesced() {
            Termination::Coalesced
        } else {
            Termination::Horizon
        };
        let diagnostics = if reached { Some(self.clock.diagnostics(self.t_max)?) } else { None };
        let end_time = if reached { self.t_max } else { self.clock.reached() };
        let mut path = self.tracer.finish(termination, end_time);
        if self.track_counter {
            path.counter_jumps = Some(self.counter);
        }
        Ok(ReplicateOutcome { path, diagnostics, clock: keep_clock.then_some(self.clock), generations })
    }
}

pub fn simulate_replicate<R: Rng + ?Sized>(
    spec: &ReplicateSpec,
    rng: &mut R,
) -> Result<ReplicateOutcome, SimulationError> {
    let (n, population) = (spec.sample_size, spec.population);
    if n == 0 || n > population {
        return Err(SimulationError::SampleTooLarge { n, population });
    }
    spec.weight_model.validate()?;
    let sample = sample_individuals(n, population, rng)?;
    let mut bt = Backtrace {
        n,
        t_max: spec.t_max,
        track_counter: spec.track_counter,
        clock: CoalescenceClock::new(),
        tracer: GenealogyTracer::new(&sample, population)?,
        counter: Vec::new(),
        parents: Vec::with_capacity(n),
    };
    let reached = if spec.weight_model.is_memoryless() {
        run_memoryless(spec, &mut bt, rng)?
    } else {
        let mut forward = ChaCha8Rng::seed_from_u64(rng.random());
        run_with_history(spec, &mut bt, &mut forward, rng)?
    };
    bt.finish(reached, spec.keep_clock)
}

fn run_memoryless<R: Rng + ?Sized>(
    spec: &ReplicateSpec,
    bt: &mut Backtrace,
    rng: &mut R,
) -> Result<bool, SimulationError> {
    for _ in 0..spec.hard_cap {
        let weights = spec.weight_model.initial(spec.population, rng)?;
        let counts = generate_offspring(spec.scheme, &weights, spec.population, rng)?;
        let sampler = ParentSampler::new(&counts);
        let done = bt.step(&counts, |lineages, out, rng| sampler.sample(lineages.len(), rng, out), rng)?;
        if done {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Clone)]
struct Checkpoint {
    weights: WeightState,
    rng: ChaCha8Rng,
}

/// Forward generation `f -> f + 1`: the offspring counts of generation `f`
/// and the parents of generation `f + 1`.
fn forward_step(
    spec: &ReplicateSpec,
    weights: &WeightState,
    rng: &mut ChaCha8Rng,
) -> Result<(OffspringCounts, ParentAssignment, WeightState), SimulationError> {
    let counts = generate_offspring(spec.scheme, weights, spec.population, rng)?;
    let assignment = assign_parents(&counts, rng);
    let next = evolve_weights(&spec.weight_model, weights, &assignment, rng)?;
    Ok((counts, assignment, next))
}

fn run_with_history<R: Rng + ?Sized>(
    spec: &ReplicateSpec,
    bt: &mut Backtrace,
    forward: &mut ChaCha8Rng,
    rng: &mut R,
) -> Result<bool, SimulationError> {
    let total = spec.hard_cap;
    let block = ((total as f64).sqrt().ceil() as usize).max(1);
    let mut checkpoints = Vec::with_capacity(total / block + 1);
    let mut weights = spec.weight_model.initial(spec.population, forward)?;
    for f in 0..total {
        if f % block == 0 {
            checkpoints.push(Checkpoint { weights: weights.clone(), rng: forward.clone() });
        }
        weights = forward_step(spec, &weights, forward)?.2;
    }
    // Reverse generation g is forward step total - g.
    for (b, checkpoint) in checkpoints.iter().enumerate().rev() {
        let start = b * block;
        let end = (start + block).min(total);
        let mut replay = checkpoint.clone();
        let mut steps = Vec::with_capacity(end - start);
        for _ in start..end {
            let (counts, assignment, next) = forward_step(spec, &replay.weights, &mut replay.rng)?;
            replay.weights = next;
            steps.push((counts, assignment));
        }
        for (counts, assignment) in steps.iter().rev() {
            let done = bt.step(
                counts,
                |lineages, out, _| {
                    out.clear();
                    out.extend(lineages.iter().map(|&j| assignment.parent_of(j)));
                },
                rng,
            )?;
            if done {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::particle::PotentialDistribution;

    fn spec(population: usize, weight_model: WeightModel) -> ReplicateSpec {
        ReplicateSpec {
            population,
            sample_size: 3,
            scheme: ResamplingScheme::Multinomial,
            weight_model,
            t_max: 1.0,
            hard_cap: 10 * population,
            track_counter: true,
            keep_clock: true,
        }
    }

    #[test]
    fn point_mass_coalesces_at_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = simulate_replicate(&spec(20, WeightModel::PointMass), &mut rng).unwrap();
        assert_eq!(out.generations, 1);
        assert_eq!(out.path.termination, Termination::Coalesced);
        assert_eq!(out.path.events.len(), 1);
        assert_eq!(out.path.events[0].rescaled_time, 0.0);
        let d = out.diagnostics.unwrap();
        assert_eq!((d.c_at_tau, d.sum_c_sq, d.sum_d), (1.0, 1.0, 1.0));
    }

    #[test]
    fn identity_dynamics_are_censored() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = spec(10, WeightModel::Constant);
        s.scheme = ResamplingScheme::Systematic;
        s.hard_cap = 25;
        let out = simulate_replicate(&s, &mut rng).unwrap();
        assert_eq!(out.path.termination, Termination::Censored);
        assert!(out.diagnostics.is_none());
        assert_eq!(out.generations, 25);
    }

    #[test]
    fn neutral_run_reaches_horizon() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let out = simulate_replicate(&spec(50, WeightModel::Constant), &mut rng).unwrap();
        let clock = out.clock.unwrap();
        assert_eq!(clock.tau(1.0).unwrap(), out.generations);
        let d = out.diagnostics.unwrap();
        assert_eq!(d.tau, out.generations);
        // Counter jumps include every merger.
        let counter = out.path.counter_jumps.unwrap();
        for e in &out.path.events {
            assert!(counter.iter().any(|j| j.generation == e.generation));
        }
        assert!(out.path.events.iter().all(|e| e.rescaled_time < 1.0));
    }

    #[test]
    fn inherited_fitness_is_reproducible() {
        let model = WeightModel::InheritedFitness {
            potential: PotentialDistribution::Uniform { low: 0.5, high: 2.0 },
            heritability: 0.5,
        };
        let s = spec(30, model);
        let a = simulate_replicate(&s, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = simulate_replicate(&s, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
        assert!(a.diagnostics.is_some());
    }

    #[test]
    fn history_replay_matches_a_stored_forward_pass() {
        let model = WeightModel::InheritedFitness {
            potential: PotentialDistribution::Lognormal { sigma: 0.3 },
            heritability: 0.8,
        };
        let mut s = spec(12, model);
        s.hard_cap = 40;
        s.t_max = 1e9;
        s.track_counter = false;
        // Replicate by hand: store every forward step, then trace backwards.
        let mut outer = ChaCha8Rng::seed_from_u64(11);
        let sample = sample_individuals(3, 12, &mut outer).unwrap();
        let mut forward = ChaCha8Rng::seed_from_u64(outer.random());
        let mut weights = model.initial(12, &mut forward).unwrap();
        let mut history = Vec::new();
        for _ in 0..40 {
            let (c, a, w) = forward_step(&s, &weights, &mut forward).unwrap();
            history.push((c, a));
            weights = w;
        }
        let mut clock = CoalescenceClock::new();
        let mut tracer = GenealogyTracer::new(&sample, 12).unwrap();
        for (c, a) in history.iter().rev() {
            let time = clock.reached();
            clock.push_counts(c);
            if tracer.is_coalesced() {
                continue;
            }
            let parents: Vec<usize> = tracer.lineages().iter().map(|&j| a.parent_of(j)).collect();
            tracer.step(&parents, time).unwrap();
        }
        let out = simulate_replicate(&s, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(out.clock.unwrap(), clock);
        assert_eq!(out.path.events, tracer.finish(Termination::Censored, 0.0).events);
    }

    #[test]
    fn oversized_sample_is_rejected() {
        let mut s = spec(3, WeightModel::Constant);
        s.sample_size = 4;
        assert!(matches!(
            simulate_replicate(&s, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(SimulationError::SampleTooLarge { .. })
        ));
    }
}
