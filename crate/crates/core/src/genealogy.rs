//! Reverse-time genealogy of a sample: per-generation merger rates, the random
//! clock they define, lineage tracing, and summaries of the resulting
//! partition-valued paths.
//!
//! Generations are counted backwards from the sampled generation: generation
//! `g >= 1` holds the parents of generation `g - 1`. A merger first visible at
//! generation `g` is placed at rescaled time `cum(g - 1)`, the left end of the
//! clock interval mapped to `g`, which makes every path right-continuous.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::NeumaierSum;
use crate::particle::{OffspringCounts, ParentAssignment};
use crate::partition::{merge_profile, Partition, PartitionError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenealogyError {
    #[error("clock reaches {reached} after {generations} generations, short of {requested}")]
    HorizonExceeded { requested: f64, reached: f64, generations: usize },
    #[error("{available} parent assignments supplied, tracing needs {needed}")]
    MissingGenerations { needed: usize, available: usize },
    #[error("invalid sample: {0}")]
    InvalidSample(String),
    #[error("path has not coalesced to a single block")]
    NotCoalesced,
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// `(c_N, D_N)` for one generation:
/// `c = sum (nu_i)_2 / (N)_2` and
/// `d = sum (nu_i)_2 { nu_i + (1/N) sum_{j != i} nu_j^2 } / (N (N)_2)`.
pub fn coalescence_rates(counts: &OffspringCounts) -> (f64, f64) {
    let (c_num, d_num, c_den, d_den) = rate_numerators(counts.counts());
    (c_num as f64 / c_den as f64, d_num as f64 / d_den as f64)
}

/// Exact rational form of [`coalescence_rates`].
pub fn coalescence_rates_exact(counts: &OffspringCounts) -> (BigRational, BigRational) {
    coalescence_rates_exact_raw(counts.counts())
}

/// [`coalescence_rates_exact`] on a raw count vector, with `N` its length and
/// no check that the counts sum to `N`.
pub fn coalescence_rates_exact_raw(counts: &[usize]) -> (BigRational, BigRational) {
    let (c_num, d_num, c_den, d_den) = rate_numerators(counts);
    let r = |a: u128, b: u128| BigRational::new(BigInt::from(a), BigInt::from(b));
    (r(c_num, c_den), r(d_num, d_den))
}

// Integer numerators and denominators; d is scaled by N^2 (N)_2 so that
// `sum (nu_i)_2 (N nu_i + S2 - nu_i^2)` stays integral.
fn rate_numerators(counts: &[usize]) -> (u128, u128, u128, u128) {
    let n = counts.len() as u128;
    let s2: u128 = counts.iter().map(|&v| (v as u128).pow(2)).sum();
    let mut c_num = 0u128;
    let mut d_num = 0u128;
    for &v in counts {
        let v = v as u128;
        if v < 2 {
            continue;
        }
        let pair = v * (v - 1);
        c_num += pair;
        d_num += pair * (n * v + s2 - v * v);
    }
    let pairs = n * (n - 1);
    (c_num, d_num, pairs, n * n * pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockRecord {
    pub generation: usize,
    pub c: f64,
    pub d: f64,
    pub cum: f64,
}

/// Per-generation `(c_N, D_N)` and the running sum of `c_N` that defines the
/// random time change.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoalescenceClock {
    records: Vec<ClockRecord>,
    total: NeumaierSum,
}

/// The clock functionals whose means vanish in the Kingman regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockDiagnostics {
    pub tau: usize,
    /// `c_N(tau_N(t))`.
    pub c_at_tau: f64,
    /// `sum_{r <= tau_N(t)} c_N(r)^2`.
    pub sum_c_sq: f64,
    /// `sum_{r <= tau_N(t)} D_N(r)`.
    pub sum_d: f64,
}

impl CoalescenceClock {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a clock from `(c, d)` pairs without validating them.
    pub fn from_rates(rates: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut clock = Self::new();
        for (c, d) in rates {
            clock.push(c, d);
        }
        clock
    }

    pub fn push(&mut self, c: f64, d: f64) -> &ClockRecord {
        self.total.add(c);
        let generation = self.records.len() + 1;
        self.records.push(ClockRecord { generation, c, d, cum: self.total.value() });
        self.records.last().unwrap()
    }

    pub fn push_counts(&mut self, counts: &OffspringCounts) -> &ClockRecord {
        let (c, d) = coalescence_rates(counts);
        self.push(c, d)
    }

    pub fn records(&self) -> &[ClockRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `sum_{r <= s} c_N(r)`, zero for `s = 0`.
    pub fn cum_at(&self, s: usize) -> f64 {
        if s == 0 {
            0.0
        } else {
            self.records[s - 1].cum
        }
    }

    /// `c_N(s)`, with `c_N(0) = 0`.
    pub fn c_at(&self, s: usize) -> f64 {
        if s == 0 {
            0.0
        } else {
            self.records[s - 1].c
        }
    }

    pub fn d_at(&self, s: usize) -> f64 {
        if s == 0 {
            0.0
        } else {
            self.records[s - 1].d
        }
    }

    /// `tau_N(t) = inf { s >= 0 : sum_{r <= s} c_N(r) >= t }`.
    pub fn tau(&self, t: f64) -> Result<usize, GenealogyError> {
        if t <= 0.0 {
            return Ok(0);
        }
        let i = self.records.partition_point(|r| r.cum < t);
        if i == self.records.len() {
            return Err(GenealogyError::HorizonExceeded {
                requested: t,
                reached: self.cum_at(self.records.len()),
                generations: self.records.len(),
            });
        }
        Ok(i + 1)
    }

    /// Rescaled time at which the path takes its generation-`g` value.
    pub fn rescaled_time_of(&self, generation: usize) -> f64 {
        self.cum_at(generation.saturating_sub(1))
    }

    /// Total clock time accumulated so far.
    pub fn reached(&self) -> f64 {
        self.cum_at(self.records.len())
    }

    pub fn diagnostics(&self, t: f64) -> Result<ClockDiagnostics, GenealogyError> {
        let tau = self.tau(t)?;
        let window = &self.records[..tau];
        Ok(ClockDiagnostics {
            tau,
            c_at_tau: self.c_at(tau),
            sum_c_sq: window.iter().map(|r| r.c * r.c).collect::<NeumaierSum>().value(),
            sum_d: window.iter().map(|r| r.d).collect::<NeumaierSum>().value(),
        })
    }

    /// CSV rows `generation,c,d,cum` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("generation,c,d,cum\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{:?},{:?},{:?}", r.generation, r.c, r.d, r.cum);
        }
        out
    }
}

/// A right-continuous, piecewise-constant partition path started at the
/// singletons partition.
pub trait PartitionPath {
    fn sample_size(&self) -> usize;

    /// `(rescaled time, state entered)` for every jump, in time order.
    fn jumps(&self) -> Vec<(f64, &Partition)>;

    /// Rescaled time at which observation stopped, for paths cut off before
    /// reaching a single block.
    fn end_time(&self) -> Option<f64>;

    fn is_coalesced(&self) -> bool {
        self.sample_size() == 1 || self.jumps().last().is_some_and(|(_, p)| p.num_blocks() == 1)
    }

    /// Value of the path at rescaled time `t`.
    fn state_at(&self, t: f64) -> Partition {
        self.jumps()
            .into_iter()
            .take_while(|(time, _)| *time <= t)
            .last()
            .map(|(_, p)| p.clone())
            .unwrap_or_else(|| Partition::singletons(self.sample_size()).expect("sample size is positive"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Coalesced,
    /// Reached the rescaled horizon with more than one block left.
    Horizon,
    /// The generation budget ran out before the clock reached the horizon.
    Censored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenealogyEvent {
    pub generation: usize,
    pub rescaled_time: f64,
    pub partition: Partition,
}

/// A jump of the coupled counter `Z`, which jumps with every merger and at
/// some extra generations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterJump {
    pub generation: usize,
    pub rescaled_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenealogyPath {
    pub n: usize,
    pub population: usize,
    pub events: Vec<GenealogyEvent>,
    pub termination: Termination,
    /// Last generation examined.
    pub end_generation: usize,
    /// Rescaled time up to which the path is observed.
    pub end_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counter_jumps: Option<Vec<CounterJump>>,
}

impl PartitionPath for GenealogyPath {
    fn sample_size(&self) -> usize {
        self.n
    }

    fn jumps(&self) -> Vec<(f64, &Partition)> {
        self.events.iter().map(|e| (e.rescaled_time, &e.partition)).collect()
    }

    fn end_time(&self) -> Option<f64> {
        match self.termination {
            Termination::Coalesced => None,
            _ => Some(self.end_time),
        }
    }
}

impl GenealogyPath {
    pub fn is_censored(&self) -> bool {
        self.termination == Termination::Censored
    }

    pub fn tmrca_generation(&self) -> Option<usize> {
        match self.termination {
            Termination::Coalesced => self.events.last().map(|e| e.generation),
            _ => None,
        }
    }
}

/// Draws `n` distinct individuals out of `population`.
pub fn sample_individuals<R: Rng + ?Sized>(
    n: usize,
    population: usize,
    rng: &mut R,
) -> Result<Vec<usize>, GenealogyError> {
    if n == 0 || n > population {
        return Err(GenealogyError::InvalidSample(format!("cannot sample {n} of {population}")));
    }
    Ok(rand::seq::index::sample(rng, population, n).into_vec())
}

/// Incremental lineage tracer: one call to [`GenealogyTracer::step`] per
/// generation back in time.
#[derive(Debug, Clone)]
pub struct GenealogyTracer {
    population: usize,
    state: Partition,
    lineages: Vec<usize>,
    generation: usize,
    events: Vec<GenealogyEvent>,
}

impl GenealogyTracer {
    pub fn new(sample: &[usize], population: usize) -> Result<Self, GenealogyError> {
        if sample.is_empty() {
            return Err(GenealogyError::InvalidSample("empty sample".into()));
        }
        let mut seen = vec![false; population];
        for &i in sample {
            if i >= population || std::mem::replace(&mut seen[i], true) {
                return Err(GenealogyError::InvalidSample(format!(
                    "individual {i} repeated or outside a population of {population}"
                )));
            }
        }
        Ok(Self {
            population,
            state: Partition::singletons(sample.len())?,
            lineages: sample.to_vec(),
            generation: 0,
            events: Vec::new(),
        })
    }

    /// Current ancestor of each block, in canonical block order.
    pub fn lineages(&self) -> &[usize] {
        &self.lineages
    }

    pub fn state(&self) -> &Partition {
        &self.state
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn is_coalesced(&self) -> bool {
        self.state.num_blocks() == 1
    }

    /// Moves one generation back. `parents[b]` is the parent of block `b`'s
    /// current ancestor; `rescaled_time` is the clock time assigned to the new
    /// generation. Returns true when blocks merged.
    pub fn step(&mut self, parents: &[usize], rescaled_time: f64) -> Result<bool, GenealogyError> {
        assert_eq!(parents.len(), self.lineages.len(), "one parent per lineage");
        self.generation += 1;
        let next = self.state.coarsen(parents)?;
        let merged = next.num_blocks() < self.state.num_blocks();
        let mut lineages = vec![0; next.num_blocks()];
        for (e, &b) in self.state.labels().iter().enumerate() {
            lineages[next.block_of(e)] = parents[b];
        }
        self.lineages = lineages;
        if merged {
            self.events.push(GenealogyEvent { generation: self.generation, rescaled_time, partition: next.clone() });
        }
        self.state = next;
        Ok(merged)
    }

    pub fn finish(self, termination: Termination, end_time: f64) -> GenealogyPath {
        GenealogyPath {
            n: self.state.n(),
            population: self.population,
            events: self.events,
            termination,
            end_generation: self.generation,
            end_time,
            counter_jumps: None,
        }
    }
}

/// Traces `sample` back through `assignments` (generation 1 first) up to
/// generation `tau_N(horizon)`.
pub fn trace_genealogy(
    sample: &[usize],
    assignments: &[ParentAssignment],
    clock: &CoalescenceClock,
    horizon: f64,
) -> Result<GenealogyPath, GenealogyError> {
    let tau = clock.tau(horizon)?;
    if assignments.len() < tau {
        return Err(GenealogyError::MissingGenerations { needed: tau, available: assignments.len() });
    }
    let population = assignments.first().map_or(usize::MAX, |a| a.parents().len());
    let mut tracer = GenealogyTracer::new(sample, population)?;
    let mut parents = Vec::with_capacity(sample.len());
    for (g, assignment) in assignments.iter().take(tau).enumerate() {
        if tracer.is_coalesced() {
            break;
        }
        parents.clear();
        parents.extend(tracer.lineages().iter().map(|&j| assignment.parent_of(j)));
        tracer.step(&parents, clock.rescaled_time_of(g + 1))?;
    }
    let termination = if tracer.is_coalesced() { Termination::Coalesced } else { Termination::Horizon };
    Ok(tracer.finish(termination, horizon))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStatistics {
    pub holding_times: Vec<f64>,
    pub jump_times: Vec<f64>,
    pub tmrca: Option<f64>,
    /// `sum_k k * (time spent with k blocks)`, up to the TMRCA or the end of
    /// observation.
    pub total_branch_length: f64,
    /// Smallest gap between consecutive jumps; infinite with fewer than two.
    pub min_jump_gap: f64,
    /// Gap from time 0 to the first jump, kept apart from `min_jump_gap`.
    pub first_jump_time: Option<f64>,
    /// Block-count drop at each jump.
    pub merger_sizes: Vec<usize>,
}

pub fn path_statistics(path: &impl PartitionPath) -> PathStatistics {
    let jumps = path.jumps();
    let mut holding_times = Vec::with_capacity(jumps.len());
    let mut merger_sizes = Vec::with_capacity(jumps.len());
    let mut branch = NeumaierSum::default();
    let mut prev_time = 0.0;
    let mut blocks = path.sample_size();
    for (t, p) in &jumps {
        holding_times.push(t - prev_time);
        branch.add(blocks as f64 * (t - prev_time));
        merger_sizes.push(blocks - p.num_blocks());
        blocks = p.num_blocks();
        prev_time = *t;
    }
    let coalesced = path.is_coalesced();
    if !coalesced {
        if let Some(end) = path.end_time() {
            branch.add(blocks as f64 * (end - prev_time).max(0.0));
        }
    }
    let jump_times: Vec<f64> = jumps.iter().map(|(t, _)| *t).collect();
    let min_jump_gap = jump_times.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    PathStatistics {
        tmrca: if coalesced { jump_times.last().copied().or(Some(0.0)) } else { None },
        first_jump_time: jump_times.first().copied(),
        holding_times,
        jump_times,
        total_branch_length: branch.value(),
        min_jump_gap,
        merger_sizes,
    }
}

struct TreeNode {
    height: f64,
    leaf: Option<usize>,
    children: Vec<usize>,
}

/// Newick rendering of a coalesced path; leaves are labelled by 1-based sample
/// index and branch lengths are in rescaled time. Multiple mergers become
/// multifurcations.
pub fn to_newick(path: &impl PartitionPath) -> Result<String, GenealogyError> {
    if !path.is_coalesced() {
        return Err(GenealogyError::NotCoalesced);
    }
    let n = path.sample_size();
    let mut nodes: Vec<TreeNode> =
        (0..n).map(|i| TreeNode { height: 0.0, leaf: Some(i + 1), children: Vec::new() }).collect();
    let mut state = Partition::singletons(n)?;
    let mut block_nodes: Vec<usize> = (0..n).collect();
    for (t, next) in path.jumps() {
        let profile = merge_profile(&state, next)?.ok_or(GenealogyError::NotCoalesced)?;
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); next.num_blocks()];
        for (e, &b) in state.labels().iter().enumerate() {
            let target = next.block_of(e);
            let node = block_nodes[b];
            if !groups[target].contains(&node) {
                groups[target].push(node);
            }
        }
        debug_assert_eq!(groups.iter().map(Vec::len).collect::<Vec<_>>(), profile.counts());
        block_nodes = groups
            .into_iter()
            .map(|children| {
                if children.len() == 1 {
                    children[0]
                } else {
                    nodes.push(TreeNode { height: t, leaf: None, children });
                    nodes.len() - 1
                }
            })
            .collect();
        state = next.clone();
    }
    let mut out = String::new();
    render_node(&nodes, block_nodes[0], None, &mut out);
    out.push(';');
    Ok(out)
}

fn render_node(nodes: &[TreeNode], id: usize, parent_height: Option<f64>, out: &mut String) {
    let node = &nodes[id];
    match node.leaf {
        Some(label) => {
            let _ = write!(out, "{label}");
        }
        None => {
            out.push('(');
            for (i, &child) in node.children.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                render_node(nodes, child, Some(node.height), out);
            }
            out.push(')');
        }
    }
    if let Some(h) = parent_height {
        let _ = write!(out, ":{:?}", h - node.height);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kingman::{CoalescentEvent, CoalescentPath};

    fn counts(v: &[usize]) -> OffspringCounts {
        OffspringCounts::new(v.to_vec()).unwrap()
    }

    fn kingman_path(n: usize, events: &[(f64, &str)]) -> CoalescentPath {
        CoalescentPath {
            n,
            events: events.iter().map(|(t, p)| CoalescentEvent { time: *t, partition: p.parse().unwrap() }).collect(),
        }
    }

    #[test]
    fn rates_examples() {
        assert_eq!(coalescence_rates(&OffspringCounts::identity(7)), (0.0, 0.0));
        assert_eq!(coalescence_rates(&OffspringCounts::point_mass(9, 3)), (1.0, 1.0));
        let (c, d) = coalescence_rates(&counts(&[2, 2, 0, 0]));
        assert_eq!(c, 1.0 / 3.0);
        assert_eq!(d, 0.25);
        let (c, d) = coalescence_rates_exact(&counts(&[2, 2, 0, 0]));
        assert_eq!(c, BigRational::new(1.into(), 3.into()));
        assert_eq!(d, BigRational::new(1.into(), 4.into()));
    }

    #[test]
    fn tau_examples() {
        let clock = CoalescenceClock::from_rates(std::iter::repeat_n((0.5, 0.0), 10));
        assert_eq!(clock.tau(1.0).unwrap(), 2);
        let clock = CoalescenceClock::from_rates([(0.3, 0.0), (0.3, 0.0), (0.5, 0.0)]);
        assert_eq!(clock.tau(0.5).unwrap(), 2);
        assert_eq!(clock.tau(1.0).unwrap(), 3);
        assert!(matches!(clock.tau(1.2), Err(GenealogyError::HorizonExceeded { .. })));
        let clock = CoalescenceClock::from_rates(std::iter::repeat_n((1.0, 1.0), 5));
        let tau = clock.tau(2.5).unwrap();
        assert_eq!(tau, 3);
        assert!(tau as f64 >= 2.5);
        assert_eq!(clock.tau(0.0).unwrap(), 0);
    }

    #[test]
    fn identity_assignments_leave_the_sample_apart() {
        let clock = CoalescenceClock::from_rates(std::iter::repeat_n((0.1, 0.0), 20));
        let assignments = vec![ParentAssignment::identity(6); 20];
        let path = trace_genealogy(&[0, 2, 5], &assignments, &clock, 1.5).unwrap();
        assert!(path.events.is_empty());
        assert_eq!(path.termination, Termination::Horizon);
        assert_eq!(path.state_at(1.0), Partition::singletons(3).unwrap());
    }

    #[test]
    fn forced_coalescence_at_first_generation() {
        let nu = counts(&[2, 0]);
        let mut clock = CoalescenceClock::new();
        clock.push_counts(&nu);
        let assignments = vec![ParentAssignment::new(vec![0, 0]).unwrap()];
        let path = trace_genealogy(&[0, 1], &assignments, &clock, 1.0).unwrap();
        assert_eq!(path.events.len(), 1);
        assert_eq!(path.events[0].generation, 1);
        assert_eq!(path.events[0].rescaled_time, 0.0);
        assert_eq!(path.events[0].partition.to_string(), "{{1,2}}");
        assert_eq!(path.termination, Termination::Coalesced);
    }

    #[test]
    fn tracing_requires_enough_generations() {
        let clock = CoalescenceClock::from_rates(std::iter::repeat_n((0.5, 0.0), 4));
        let assignments = vec![ParentAssignment::identity(4); 1];
        assert_eq!(
            trace_genealogy(&[0, 1], &assignments, &clock, 1.5),
            Err(GenealogyError::MissingGenerations { needed: 3, available: 1 })
        );
        assert!(trace_genealogy(&[0, 0], &vec![ParentAssignment::identity(4); 4], &clock, 1.0).is_err());
    }

    #[test]
    fn tracer_keeps_lineages_aligned_with_blocks() {
        let mut tracer = GenealogyTracer::new(&[4, 1, 7], 8).unwrap();
        // Elements 1 and 3 share parent 5: blocks {1,3},{2}.
        assert!(tracer.step(&[5, 2, 5], 0.2).unwrap());
        assert_eq!(tracer.state().to_string(), "{{1,3},{2}}");
        assert_eq!(tracer.lineages(), &[5, 2]);
        assert!(!tracer.step(&[0, 6], 0.3).unwrap());
        assert_eq!(tracer.lineages(), &[0, 6]);
    }

    #[test]
    fn statistics_example() {
        let path = kingman_path(3, &[(0.4, "{{1,2},{3}}"), (1.0, "{{1,2,3}}")]);
        let s = path_statistics(&path);
        assert_eq!(s.holding_times, vec![0.4, 0.6]);
        assert_eq!(s.tmrca, Some(1.0));
        assert!((s.total_branch_length - 2.4).abs() < 1e-15);
        assert_eq!(s.min_jump_gap, 0.6);
        assert_eq!(s.first_jump_time, Some(0.4));
        assert_eq!(s.merger_sizes, vec![1, 1]);
    }

    #[test]
    fn statistics_of_constant_path() {
        let path = GenealogyPath {
            n: 3,
            population: 10,
            events: vec![],
            termination: Termination::Horizon,
            end_generation: 12,
            end_time: 2.0,
            counter_jumps: None,
        };
        let s = path_statistics(&path);
        assert!(s.jump_times.is_empty());
        assert_eq!(s.tmrca, None);
        assert_eq!(s.min_jump_gap, f64::INFINITY);
        assert_eq!(s.total_branch_length, 6.0);
    }

    #[test]
    fn two_leaf_branch_length() {
        let path = kingman_path(2, &[(0.73, "{{1,2}}")]);
        let s = path_statistics(&path);
        assert_eq!(s.total_branch_length, 2.0 * s.holding_times[0]);
    }

    #[test]
    fn newick_examples() {
        assert_eq!(to_newick(&kingman_path(2, &[(1.0, "{{1,2}}")])).unwrap(), "(1:1.0,2:1.0);");
        assert_eq!(
            to_newick(&kingman_path(3, &[(0.4, "{{1,2},{3}}"), (1.0, "{{1,2,3}}")])).unwrap(),
            "((1:0.4,2:0.4):0.6,3:1.0);"
        );
        assert_eq!(to_newick(&kingman_path(3, &[(0.7, "{{1,2,3}}")])).unwrap(), "(1:0.7,2:0.7,3:0.7);");
        assert_eq!(to_newick(&kingman_path(3, &[(0.4, "{{1,2},{3}}")])), Err(GenealogyError::NotCoalesced));
    }

    #[test]
    fn newick_keeps_simultaneous_pairs_apart() {
        let path = kingman_path(4, &[(0.5, "{{1,3},{2,4}}"), (0.9, "{{1,2,3,4}}")]);
        assert_eq!(to_newick(&path).unwrap(), "((1:0.5,3:0.5):0.4,(2:0.5,4:0.5):0.4);");
    }

    #[test]
    fn diagnostics_of_degenerate_clock() {
        let clock = CoalescenceClock::from_rates(std::iter::repeat_n((1.0, 1.0), 3));
        let d = clock.diagnostics(1.0).unwrap();
        assert_eq!(d.tau, 1);
        assert_eq!((d.c_at_tau, d.sum_c_sq, d.sum_d), (1.0, 1.0, 1.0));
        assert!(clock.to_csv().starts_with("generation,c,d,cum\n1,1.0,1.0,1.0\n"));
    }
}
