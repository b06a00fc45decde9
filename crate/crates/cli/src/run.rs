//! Experiment drivers. Each driver runs its replicates on the current rayon
//! pool with an order-preserving collect, so results do not depend on the
//! worker count; [`run_experiment`] installs a pool of the requested size.

use std::path::PathBuf;

use coalgen::bounds::{
    absorb_all, check_block_monotonicity, check_cn_properties, check_identity_envelopes, check_sum_product_bounds,
    random_offspring_corpus, BoundReport, BoundsError,
};
use coalgen::diagnostics::{
    asymptotic_diagnostics, calibrate_ks_threshold, fdd_compare, holding_time_test, jump_time_test, min_gap_quantiles,
    multiple_merger_fraction, ConvergenceReport, FddPoint, HoldingTimeReport, IndexKs, MeanSe, PopulationStatistics,
    Verdicts, MAX_FDD_SAMPLE, MIN_FDD_REPLICATES,
};
use coalgen::exactprob::{coupled_row, rational_to_f64, simulate_coupled, transition_matrix_exact, Environment};
use coalgen::genealogy::path_statistics;
use coalgen::kingman::{simulate_kingman_uniformized, CoalescentPath};
use coalgen::particle::generate_offspring;
use coalgen::partition::enumerate_partitions;
use coalgen::simulate::{simulate_replicate, ReplicateOutcome, ReplicateSpec, SimulationError};
use coalgen::{CoalescenceClock, GenealogyPath, OffspringCounts, Partition};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig, ExperimentKind};
use crate::output::{emit_outputs, Artifacts};
use crate::seeds::{derive_seed, CALIBRATION_STREAM, CORPUS_STREAM, ENVIRONMENT_STREAM};

/// Null percentile of every calibrated KS threshold.
pub const KS_QUANTILE: f64 = 0.99;
/// Highest counter-jump index tested.
pub const MAX_JUMP_INDEX: usize = 3;
/// Sample genealogies kept per population size for Newick and JSON output.
pub const SAMPLE_PATHS: usize = 5;
/// Censored fraction above which the clock is taken to diverge.
pub const DIVERGENCE_FRACTION: f64 = 0.5;
pub const DEFAULT_COUPLED_GENERATIONS: usize = 3;
pub const DEFAULT_CORPUS_SIZE: usize = 10_000;
/// Draws of `(s, t)` tried per clock before giving up on a non-empty window.
const SUMPROD_ATTEMPTS: usize = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl CliError {
    pub fn config(path: impl Into<String>, err: ConfigError) -> Self {
        let path = path.into();
        match err.line {
            Some(line) => Self::Config { path: format!("{path}:{line}"), message: err.message },
            None => Self::Config { path, message: err.message },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } => 2,
            Self::Io { .. } => 1,
            Self::Internal(_) => 4,
        }
    }
}

impl From<SimulationError> for CliError {
    fn from(e: SimulationError) -> Self {
        Self::Internal(e.to_string())
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        Self::Internal(e.to_string())
    }
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

/// Outcome class of a completed run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Success,
    /// More than half the replicates at some population size were censored.
    ClockDivergence,
    /// A checked inequality or exact identity failed.
    ConsistencyFailure,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Success => 0,
            Self::ClockDivergence => 3,
            Self::ConsistencyFailure => 4,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the machine parallelism.
    pub workers: Option<usize>,
    /// Output directory; overrides the config's.
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub enum ExperimentResults {
    Genealogy(GenealogyRun),
    Kingman(KingmanRun),
    Coupled(CoupledReport),
    Bounds(BoundsSuiteReport),
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub results: ExperimentResults,
    pub status: RunStatus,
    pub notes: Vec<String>,
    pub files: Vec<PathBuf>,
}

/// Runs the configured experiment and writes its artifacts.
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> Result<RunOutcome, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = options.workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build().map_err(internal)?;
    let results = pool.install(|| -> Result<ExperimentResults, CliError> {
        Ok(match config.experiment {
            ExperimentKind::GenealogyConvergence => ExperimentResults::Genealogy(run_genealogy_convergence(config)?),
            ExperimentKind::KingmanReference => ExperimentResults::Kingman(run_kingman_reference(config)?),
            ExperimentKind::CoupledChain => ExperimentResults::Coupled(run_coupled_chain(config)?),
            ExperimentKind::BoundsSuite => ExperimentResults::Bounds(run_bounds_suite(config)?),
        })
    })?;
    let (status, notes) = assess(&results);
    let artifacts = Artifacts::from_results(config, &results)?;
    let dir = options.out_dir.clone().or_else(|| config.output_dir.clone()).unwrap_or_else(|| PathBuf::from("results"));
    let files = emit_outputs(&artifacts, &dir)?;
    Ok(RunOutcome { results, status, notes, files })
}

fn assess(results: &ExperimentResults) -> (RunStatus, Vec<String>) {
    let mut notes = Vec::new();
    let status = match results {
        ExperimentResults::Genealogy(run) => {
            let mut status = RunStatus::Success;
            for p in &run.report.per_population {
                let frac = p.censored as f64 / p.replicates as f64;
                if frac > DIVERGENCE_FRACTION {
                    notes.push(format!(
                        "N = {}: {} of {} replicates censored; the clock does not reach t_max within hard_cap",
                        p.population, p.censored, p.replicates
                    ));
                    status = RunStatus::ClockDivergence;
                }
            }
            status
        }
        ExperimentResults::Kingman(_) => RunStatus::Success,
        ExperimentResults::Coupled(report) => {
            let bad: Vec<usize> = report
                .per_population
                .iter()
                .filter(|p| p.counter_only_at_singletons.iter().any(|&q| q != 0.0))
                .map(|p| p.population)
                .collect();
            if bad.is_empty() {
                RunStatus::Success
            } else {
                notes.push(format!("counter-only probability at singletons is nonzero for N in {bad:?}"));
                RunStatus::ConsistencyFailure
            }
        }
        ExperimentResults::Bounds(report) => {
            let failed: Vec<&str> = report.reports.iter().filter(|r| !r.passed()).map(|r| r.name.as_str()).collect();
            if failed.is_empty() {
                RunStatus::Success
            } else {
                notes.push(format!("bound violations in {}", failed.join(", ")));
                RunStatus::ConsistencyFailure
            }
        }
    };
    (status, notes)
}

fn replicate_rng(master: u64, replicate: u64, population: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, replicate, population))
}

/// Calibrated KS threshold for `sample_size` draws; its seed depends only on
/// the master seed and the sample size.
pub fn calibrated_threshold(master: u64, sample_size: usize, null_replicates: usize) -> Result<f64, CliError> {
    let mut rng = replicate_rng(master, CALIBRATION_STREAM, sample_size as u64);
    calibrate_ks_threshold(sample_size, null_replicates, KS_QUANTILE, &mut rng).map_err(internal)
}

// ---------------------------------------------------------------- genealogy

#[derive(Debug, Clone)]
pub struct PopulationRun {
    pub statistics: PopulationStatistics,
    /// TMRCA in generations over coalesced replicates.
    pub tmrca_generations: MeanSe,
    pub sample_paths: Vec<GenealogyPath>,
    /// Full clock of replicate 0.
    pub first_clock: Option<CoalescenceClock>,
}

#[derive(Debug, Clone)]
pub struct GenealogyRun {
    pub report: ConvergenceReport,
    pub populations: Vec<PopulationRun>,
}

pub fn replicate_spec(config: &ExperimentConfig, population: usize) -> ReplicateSpec {
    ReplicateSpec {
        population,
        sample_size: config.n,
        scheme: config.scheme,
        weight_model: config.weight_model,
        t_max: config.t_max,
        hard_cap: config.hard_cap_for(population),
        track_counter: config.track_counter,
        keep_clock: false,
    }
}

pub fn run_genealogy_convergence(config: &ExperimentConfig) -> Result<GenealogyRun, CliError> {
    let ks_threshold = calibrated_threshold(config.master_seed, config.replicates, config.ks_null_replicates)?;
    let mut populations = Vec::with_capacity(config.population_grid.len());
    for &population in &config.population_grid {
        let spec = replicate_spec(config, population);
        let outcomes = (0..config.replicates)
            .into_par_iter()
            .map(|r| {
                let spec = ReplicateSpec { keep_clock: r == 0, ..spec.clone() };
                simulate_replicate(&spec, &mut replicate_rng(config.master_seed, r as u64, population as u64))
            })
            .collect::<Result<Vec<_>, _>>()?;
        populations.push(population_run(config, population, outcomes)?);
    }
    let per_population: Vec<PopulationStatistics> = populations.iter().map(|p| p.statistics.clone()).collect();
    let verdicts = Verdicts::from_statistics(&per_population, ks_threshold);
    let report = ConvergenceReport {
        n: config.n,
        master_seed: config.master_seed,
        replicates: config.replicates,
        t_max: config.t_max,
        ks_threshold,
        per_population,
        verdicts,
    };
    Ok(GenealogyRun { report, populations })
}

fn population_run(
    config: &ExperimentConfig,
    population: usize,
    mut outcomes: Vec<ReplicateOutcome>,
) -> Result<PopulationRun, CliError> {
    let n = config.n;
    let diagnostics: Vec<_> = outcomes.iter().map(|o| o.diagnostics).collect();
    let first_clock = outcomes.first_mut().and_then(|o| o.clock.take());
    let sample_paths: Vec<GenealogyPath> = outcomes.iter().take(SAMPLE_PATHS).map(|o| o.path.clone()).collect();
    let paths: Vec<GenealogyPath> = outcomes.into_iter().map(|o| o.path).filter(|p| !p.is_censored()).collect();
    let censored = config.replicates - paths.len();

    let holding = holding_time_test(&paths, n)
        .unwrap_or(HoldingTimeReport { per_index: Vec::new(), consecutive_correlation: Vec::new() });
    let counter: Vec<Vec<f64>> = paths
        .iter()
        .filter_map(|p| p.counter_jumps.as_ref())
        .map(|jumps| jumps.iter().map(|j| j.rescaled_time).collect())
        .collect();
    let ks_jump: Vec<IndexKs> = if counter.is_empty() {
        Vec::new()
    } else {
        (1..=MAX_JUMP_INDEX).map_while(|m| jump_time_test(&counter, m, n).ok()).collect()
    };
    let tmrca: Vec<f64> = paths.iter().filter_map(|p| path_statistics(p).tmrca).collect();
    let tmrca_gens: Vec<f64> = paths.iter().filter_map(|p| p.tmrca_generation()).map(|g| g as f64).collect();
    let fdd = fdd_for(&paths, n, &config.fdd_times_or_default());

    let statistics = PopulationStatistics {
        population,
        replicates: config.replicates,
        censored,
        ks_holding: holding.per_index,
        holding_correlation: holding.consecutive_correlation,
        ks_jump,
        mm_fraction: multiple_merger_fraction(&paths).unwrap_or(f64::NAN),
        clock: asymptotic_diagnostics(&diagnostics),
        min_gap_quantiles: min_gap_quantiles(&paths, &[0.1, 0.5, 0.9]),
        mean_tmrca: MeanSe::of(&tmrca),
        fdd,
    };
    Ok(PopulationRun { statistics, tmrca_generations: MeanSe::of(&tmrca_gens), sample_paths, first_clock })
}

fn fdd_for<P: coalgen::PartitionPath>(paths: &[P], n: usize, times: &[f64]) -> Vec<FddPoint> {
    if n > MAX_FDD_SAMPLE || paths.len() < MIN_FDD_REPLICATES || times.is_empty() {
        return Vec::new();
    }
    fdd_compare(paths, times).unwrap_or_default()
}

// ------------------------------------------------------------------ kingman

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KingmanReport {
    pub n: usize,
    pub master_seed: u64,
    pub replicates: usize,
    pub ks_threshold: f64,
    pub holding: HoldingTimeReport,
    /// KS of the m-th uniformized clock tick against `Erlang(m, C(n,2))`.
    pub jumps: Vec<IndexKs>,
    pub tmrca: MeanSe,
    /// `2 (1 - 1/n)`.
    pub expected_tmrca: f64,
    pub fdd: Vec<FddPoint>,
    pub holding_below_threshold: bool,
    pub jumps_below_threshold: bool,
}

#[derive(Debug, Clone)]
pub struct KingmanRun {
    pub report: KingmanReport,
    pub sample_paths: Vec<CoalescentPath>,
}

pub fn run_kingman_reference(config: &ExperimentConfig) -> Result<KingmanRun, CliError> {
    let n = config.n;
    let ks_threshold = calibrated_threshold(config.master_seed, config.replicates, config.ks_null_replicates)?;
    let runs = (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(config.master_seed, r as u64, 0);
            simulate_kingman_uniformized(n, MAX_JUMP_INDEX, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(internal)?;
    let ticks: Vec<Vec<f64>> = runs.iter().map(|u| u.clock_jumps.clone()).collect();
    let paths: Vec<CoalescentPath> = runs.into_iter().map(|u| u.path).collect();

    let holding = holding_time_test(&paths, n).map_err(internal)?;
    let jumps =
        (1..=MAX_JUMP_INDEX).map(|m| jump_time_test(&ticks, m, n)).collect::<Result<Vec<_>, _>>().map_err(internal)?;
    let tmrca: Vec<f64> = paths.iter().filter_map(CoalescentPath::tmrca).collect();
    let report = KingmanReport {
        n,
        master_seed: config.master_seed,
        replicates: config.replicates,
        ks_threshold,
        holding_below_threshold: holding.per_index.iter().all(|k| k.ks < ks_threshold),
        jumps_below_threshold: jumps.iter().all(|k| k.ks < ks_threshold),
        holding,
        jumps,
        tmrca: MeanSe::of(&tmrca),
        expected_tmrca: 2.0 * (1.0 - 1.0 / n as f64),
        fdd: fdd_for(&paths, n, &config.fdd_times_or_default()),
    };
    Ok(KingmanRun { report, sample_paths: paths.into_iter().take(SAMPLE_PATHS).collect() })
}

// ------------------------------------------------------------ coupled chain

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupledPopulation {
    pub population: usize,
    /// Offspring counts per generation, first generation back first.
    pub environment: Vec<Vec<usize>>,
    pub states: Vec<Partition>,
    /// Exact law of `S` after the environment, as reduced fractions.
    pub exact_law: Vec<String>,
    pub exact_law_f64: Vec<f64>,
    pub empirical_law: Vec<f64>,
    pub total_variation: f64,
    /// Probability that only `Z` jumps from the singleton partition, per
    /// generation.
    pub counter_only_at_singletons: Vec<f64>,
    /// Final value of `Z`.
    pub counter: MeanSe,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupledReport {
    pub n: usize,
    pub master_seed: u64,
    pub runs: usize,
    pub generations: usize,
    pub per_population: Vec<CoupledPopulation>,
}

/// Random environment of `generations` offspring rows at `population`, drawn
/// from the configured scheme and weight model.
pub fn random_environment(
    config: &ExperimentConfig,
    population: usize,
    generations: usize,
) -> Result<Environment, CliError> {
    let mut rng = replicate_rng(config.master_seed, ENVIRONMENT_STREAM, population as u64);
    let rows = (0..generations)
        .map(|_| {
            let weights = config.weight_model.initial(population, &mut rng)?;
            generate_offspring(config.scheme, &weights, population, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(internal)?;
    Environment::new(rows).map_err(internal)
}

/// Exact law of `S` after `env`, started from singletons, over
/// `enumerate_partitions(n)`.
pub fn exact_coupled_law(n: usize, env: &Environment) -> Result<Vec<BigRational>, CliError> {
    let states = enumerate_partitions(n).map_err(internal)?;
    let mut law: Vec<BigRational> =
        states.iter().map(|s| if s.is_singletons() { BigRational::one() } else { BigRational::zero() }).collect();
    for nu in env.generations() {
        let matrix = transition_matrix_exact(n, nu).map_err(internal)?;
        let mut next = vec![BigRational::zero(); states.len()];
        for (p, row) in law.iter().zip(&matrix) {
            if p.is_zero() {
                continue;
            }
            for (acc, q) in next.iter_mut().zip(row) {
                *acc += p * q;
            }
        }
        law = next;
    }
    Ok(law)
}

/// Empirical law of `S` and mean final `Z` over `runs` coupled trajectories
/// through `env`; each trajectory is checked for the coupling.
pub fn empirical_coupled_law(
    n: usize,
    env: &Environment,
    runs: usize,
    master: u64,
    population: usize,
) -> Result<(Vec<f64>, MeanSe), CliError> {
    let states = enumerate_partitions(n).map_err(internal)?;
    let finals = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(master, r as u64, population as u64);
            let traj = simulate_coupled(n, env, &mut rng)?;
            let last = traj.last().expect("trajectory includes the initial state");
            Ok((last.s.clone(), last.z))
        })
        .collect::<Result<Vec<_>, coalgen::exactprob::ExactProbError>>()
        .map_err(internal)?;
    let mut counts = vec![0usize; states.len()];
    for (s, _) in &finals {
        let i = states.iter().position(|x| x == s).expect("every partition is enumerated");
        counts[i] += 1;
    }
    let z: Vec<f64> = finals.iter().map(|(_, z)| *z as f64).collect();
    Ok((counts.iter().map(|&c| c as f64 / runs as f64).collect(), MeanSe::of(&z)))
}

pub fn run_coupled_chain(config: &ExperimentConfig) -> Result<CoupledReport, CliError> {
    let n = config.n;
    let generations = config.coupled_generations.unwrap_or(DEFAULT_COUPLED_GENERATIONS);
    let states = enumerate_partitions(n).map_err(internal)?;
    let singletons = Partition::singletons(n).map_err(internal)?;
    let mut per_population = Vec::new();
    for &population in &config.population_grid {
        let env = random_environment(config, population, generations)?;
        let exact = exact_coupled_law(n, &env)?;
        let exact_f64: Vec<f64> = exact.iter().map(rational_to_f64).collect();
        let (empirical, counter) = empirical_coupled_law(n, &env, config.replicates, config.master_seed, population)?;
        let total_variation = 0.5 * exact_f64.iter().zip(&empirical).map(|(a, b)| (a - b).abs()).sum::<f64>();
        let counter_only_at_singletons = env
            .generations()
            .iter()
            .map(|nu| coupled_row(&singletons, nu).map(|row| row.counter_only))
            .collect::<Result<Vec<_>, _>>()
            .map_err(internal)?;
        per_population.push(CoupledPopulation {
            population,
            environment: env.generations().iter().map(|nu| nu.counts().to_vec()).collect(),
            states: states.clone(),
            exact_law: exact.iter().map(ToString::to_string).collect(),
            exact_law_f64: exact_f64,
            empirical_law: empirical,
            total_variation,
            counter_only_at_singletons,
            counter,
        });
    }
    Ok(CoupledReport { n, master_seed: config.master_seed, runs: config.replicates, generations, per_population })
}

// ------------------------------------------------------------ bounds suite

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsSuiteReport {
    pub master_seed: u64,
    pub corpus_size: usize,
    pub populations: Vec<usize>,
    pub clocks: usize,
    /// Random sum-product draws whose window held no generation.
    pub empty_windows: usize,
    pub reports: Vec<BoundReport>,
}

impl BoundsSuiteReport {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(BoundReport::passed)
    }
}

/// Offspring rows checked by the bounds suite.
pub fn bounds_corpus(config: &ExperimentConfig) -> Vec<OffspringCounts> {
    let size = config.corpus_size.unwrap_or(DEFAULT_CORPUS_SIZE);
    let mut rng = replicate_rng(config.master_seed, CORPUS_STREAM, size as u64);
    random_offspring_corpus(size, &config.population_grid, &mut rng)
}

/// Inequality checks on one simulated clock: the `c_N` properties on a fixed
/// and a random grid pair, and the sum-product bounds on one random
/// `(s, t, l, B)` with `l <= 5`, `B <= 3`, redrawn while its window is empty.
/// The sum-product part is `None` if every draw was empty.
pub fn clock_checks<R: Rng + ?Sized>(
    clock: &CoalescenceClock,
    t_max: f64,
    rng: &mut R,
) -> Result<(Vec<BoundReport>, Option<Vec<BoundReport>>), BoundsError> {
    let s1 = rng.random::<f64>() * t_max;
    let t1 = s1 + (t_max - s1) * (1.0 - rng.random::<f64>());
    let grid = [(0.0, t_max), (0.5 * t_max, t_max), (s1, t1)];
    let grid: Vec<(f64, f64)> = grid.into_iter().filter(|(s, t)| t > s).collect();
    let cn = check_cn_properties(clock, &grid)?;
    for _ in 0..SUMPROD_ATTEMPTS {
        let s = rng.random::<f64>() * t_max;
        let t = s + (t_max - s) * (1.0 - rng.random::<f64>());
        let l = rng.random_range(1..=5usize);
        let b = 3.0 * (1.0 - rng.random::<f64>());
        if t <= s {
            continue;
        }
        match check_sum_product_bounds(clock, s, t, l, b) {
            Ok(r) => return Ok((cn, Some(r))),
            Err(BoundsError::EmptyWindow { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    let sumprod = None;
    Ok((cn, sumprod))
}

pub fn run_bounds_suite(config: &ExperimentConfig) -> Result<BoundsSuiteReport, CliError> {
    let corpus = bounds_corpus(config);
    let min_population = *config.population_grid.iter().min().expect("validated non-empty");
    let mut reports = Vec::new();

    let k_max = min_population.min(config.n.max(8));
    let chunks: Vec<BoundReport> =
        corpus.par_chunks(256).map(|chunk| check_block_monotonicity(chunk, k_max)).collect::<Result<_, _>>()?;
    absorb_all(&mut reports, chunks);
    // Envelope constants are fitted over the whole corpus, so these run unchunked.
    let envelopes: Vec<Vec<BoundReport>> =
        (2..=config.n).into_par_iter().map(|k| check_identity_envelopes(&corpus, k)).collect::<Result<_, _>>()?;
    for r in envelopes {
        absorb_all(&mut reports, r);
    }

    let grid = &config.population_grid;
    let clock_results = (0..config.replicates)
        .into_par_iter()
        .map(|r| -> Result<_, CliError> {
            let population = grid[r % grid.len()];
            let spec = ReplicateSpec {
                sample_size: config.n.min(population).max(1),
                track_counter: false,
                keep_clock: true,
                ..replicate_spec(config, population)
            };
            let mut rng = replicate_rng(config.master_seed, r as u64, population as u64);
            let outcome = simulate_replicate(&spec, &mut rng)?;
            let clock = outcome.clock.expect("clock kept");
            if clock.reached() < config.t_max {
                return Ok(None);
            }
            Ok(Some(clock_checks(&clock, config.t_max, &mut rng)?))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut clocks = 0;
    let mut empty_windows = 0;
    for (cn, sumprod) in clock_results.into_iter().flatten() {
        clocks += 1;
        absorb_all(&mut reports, cn);
        match sumprod {
            Some(r) => absorb_all(&mut reports, r),
            None => empty_windows += 1,
        }
    }
    Ok(BoundsSuiteReport {
        master_seed: config.master_seed,
        corpus_size: corpus.len(),
        populations: config.population_grid.clone(),
        clocks,
        empty_windows,
        reports,
    })
}
