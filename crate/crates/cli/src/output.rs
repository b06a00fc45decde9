//! Result artifacts. Every run writes `config.json`, a JSON report,
//! `summary.csv` and `long.csv`; experiments add Newick trees, clocks, sample
//! paths or transition matrices. JSON files carry a `master_seed` field, CSV
//! tables a `master_seed` column, and per-replicate files the seed in their
//! name. Nothing time-dependent is written, so reruns are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use coalgen::exactprob::transition_matrix_csv;
use coalgen::genealogy::to_newick;
use coalgen::PartitionPath;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::run::{CliError, ExperimentResults};

pub const LONG_HEADER: [&str; 5] = ["master_seed", "N", "statistic", "value", "stderr"];

/// One row of the long-format table; `N` is blank for population-free
/// statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct LongRow {
    pub population: Option<usize>,
    pub statistic: String,
    pub value: f64,
    pub stderr: Option<f64>,
}

impl LongRow {
    fn new(population: Option<usize>, statistic: impl Into<String>, value: f64) -> Self {
        Self { population, statistic: statistic.into(), value, stderr: None }
    }

    fn with_se(population: Option<usize>, statistic: impl Into<String>, value: f64, se: f64) -> Self {
        Self { population, statistic: statistic.into(), value, stderr: Some(se) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Everything a run writes, rendered but not yet on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub master_seed: u64,
    pub config_json: String,
    pub report_name: &'static str,
    pub report_json: String,
    pub summary: Table,
    pub long: Vec<LongRow>,
    /// Extra files as `(name, contents)`.
    pub extra: Vec<(String, String)>,
}

/// Shortest round-trip rendering; `NaN` and `inf` spelled as Rust does.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn pretty<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Internal(format!("serialising output: {e}")))
}

impl Artifacts {
    /// Artifacts with only the config echo and empty tables.
    pub fn empty(config: &ExperimentConfig) -> Result<Self, CliError> {
        Ok(Self {
            master_seed: config.master_seed,
            config_json: pretty(config)?,
            report_name: "report.json",
            report_json: pretty(&serde_json::json!({ "master_seed": config.master_seed }))?,
            summary: Table { header: vec!["master_seed".into()], rows: Vec::new() },
            long: Vec::new(),
            extra: Vec::new(),
        })
    }

    pub fn from_results(config: &ExperimentConfig, results: &ExperimentResults) -> Result<Self, CliError> {
        let mut a = Self::empty(config)?;
        let seed = config.master_seed;
        let s = seed.to_string();
        match results {
            ExperimentResults::Genealogy(run) => {
                a.report_json = pretty(&run.report)?;
                a.summary.header = [
                    "master_seed",
                    "N",
                    "replicates",
                    "censored",
                    "ks_holding_1",
                    "ks_threshold",
                    "mm_fraction",
                    "c_at_tau",
                    "sum_c_sq",
                    "sum_d",
                    "tau_generations",
                    "tmrca",
                    "tmrca_generations",
                    "min_gap_q10",
                    "min_gap_q50",
                    "min_gap_q90",
                ]
                .map(String::from)
                .to_vec();
                let mut trees = String::new();
                for p in &run.populations {
                    let st = &p.statistics;
                    let n = Some(st.population);
                    let ks1 = st.ks_holding.first().map_or(f64::NAN, |k| k.ks);
                    let q = |i: usize| st.min_gap_quantiles.get(i).copied().unwrap_or(f64::NAN);
                    let mut row =
                        vec![s.clone(), st.population.to_string(), st.replicates.to_string(), st.censored.to_string()];
                    row.extend(
                        [
                            ks1,
                            run.report.ks_threshold,
                            st.mm_fraction,
                            st.clock.c_at_tau.mean,
                            st.clock.sum_c_sq.mean,
                            st.clock.sum_d.mean,
                            st.clock.tau.mean,
                            st.mean_tmrca.mean,
                            p.tmrca_generations.mean,
                            q(0),
                            q(1),
                            q(2),
                        ]
                        .map(fmt_f64),
                    );
                    a.summary.rows.push(row);

                    a.long.push(LongRow::new(n, "censored", st.censored as f64));
                    for k in &st.ks_holding {
                        a.long.push(LongRow::new(n, format!("ks_holding_{}", k.index), k.ks));
                    }
                    for (i, c) in st.holding_correlation.iter().enumerate() {
                        a.long.push(LongRow::new(n, format!("holding_correlation_{}_{}", i + 1, i + 2), *c));
                    }
                    for k in &st.ks_jump {
                        a.long.push(LongRow::new(n, format!("ks_jump_{}", k.index), k.ks));
                    }
                    a.long.push(LongRow::new(n, "mm_fraction", st.mm_fraction));
                    let c = &st.clock;
                    a.long.push(LongRow::with_se(n, "c_at_tau", c.c_at_tau.mean, c.c_at_tau.stderr));
                    a.long.push(LongRow::with_se(n, "sum_c_sq", c.sum_c_sq.mean, c.sum_c_sq.stderr));
                    a.long.push(LongRow::with_se(n, "sum_d", c.sum_d.mean, c.sum_d.stderr));
                    a.long.push(LongRow::with_se(n, "tau_generations", c.tau.mean, c.tau.stderr));
                    a.long.push(LongRow::with_se(n, "tmrca", st.mean_tmrca.mean, st.mean_tmrca.stderr));
                    let tg = p.tmrca_generations;
                    a.long.push(LongRow::with_se(n, "tmrca_generations", tg.mean, tg.stderr));
                    for (label, v) in ["min_gap_q10", "min_gap_q50", "min_gap_q90"].iter().zip(&st.min_gap_quantiles) {
                        a.long.push(LongRow::new(n, *label, *v));
                    }
                    for f in &st.fdd {
                        a.long.push(LongRow::new(n, format!("fdd_tv_t{}", fmt_f64(f.time)), f.total_variation));
                    }

                    append_trees(&mut trees, seed, n, &p.sample_paths)?;
                    if let Some(clock) = &p.first_clock {
                        a.extra.push((format!("clock_seed{seed}_N{}.csv", st.population), clock.to_csv()));
                    }
                    a.extra.push((
                        format!("paths_N{}.json", st.population),
                        pretty(&serde_json::json!({
                            "master_seed": seed,
                            "N": st.population,
                            "paths": p.sample_paths,
                        }))?,
                    ));
                }
                a.extra.insert(0, ("trees.nwk".into(), trees));
            }
            ExperimentResults::Kingman(run) => {
                let r = &run.report;
                a.report_json = pretty(r)?;
                a.summary.header = [
                    "master_seed",
                    "n",
                    "replicates",
                    "ks_threshold",
                    "ks_holding_max",
                    "ks_jump_max",
                    "tmrca",
                    "tmrca_stderr",
                    "expected_tmrca",
                ]
                .map(String::from)
                .to_vec();
                let max_ks = |v: &[coalgen::diagnostics::IndexKs]| v.iter().map(|k| k.ks).fold(f64::NAN, f64::max);
                let mut row = vec![s.clone(), r.n.to_string(), r.replicates.to_string()];
                row.extend(
                    [
                        r.ks_threshold,
                        max_ks(&r.holding.per_index),
                        max_ks(&r.jumps),
                        r.tmrca.mean,
                        r.tmrca.stderr,
                        r.expected_tmrca,
                    ]
                    .map(fmt_f64),
                );
                a.summary.rows.push(row);
                for k in &r.holding.per_index {
                    a.long.push(LongRow::new(None, format!("ks_holding_{}", k.index), k.ks));
                }
                for k in &r.jumps {
                    a.long.push(LongRow::new(None, format!("ks_jump_{}", k.index), k.ks));
                }
                a.long.push(LongRow::with_se(None, "tmrca", r.tmrca.mean, r.tmrca.stderr));
                for f in &r.fdd {
                    a.long.push(LongRow::new(None, format!("fdd_tv_t{}", fmt_f64(f.time)), f.total_variation));
                }
                let mut trees = String::new();
                append_trees(&mut trees, seed, None, &run.sample_paths)?;
                a.extra.push(("trees.nwk".into(), trees));
            }
            ExperimentResults::Coupled(r) => {
                a.report_json = pretty(r)?;
                a.summary.header =
                    ["master_seed", "N", "runs", "total_variation", "max_counter_only_at_singletons", "mean_counter"]
                        .map(String::from)
                        .to_vec();
                for p in &r.per_population {
                    let n = Some(p.population);
                    let worst = p.counter_only_at_singletons.iter().copied().fold(0.0, f64::max);
                    a.summary.rows.push(vec![
                        s.clone(),
                        p.population.to_string(),
                        r.runs.to_string(),
                        fmt_f64(p.total_variation),
                        fmt_f64(worst),
                        fmt_f64(p.counter.mean),
                    ]);
                    a.long.push(LongRow::new(n, "total_variation", p.total_variation));
                    a.long.push(LongRow::new(n, "max_counter_only_at_singletons", worst));
                    a.long.push(LongRow::with_se(n, "final_counter", p.counter.mean, p.counter.stderr));
                    for (g, row) in p.environment.iter().enumerate() {
                        let nu = coalgen::OffspringCounts::new(row.clone())
                            .map_err(|e| CliError::Internal(e.to_string()))?;
                        let csv = transition_matrix_csv(r.n, &nu).map_err(|e| CliError::Internal(e.to_string()))?;
                        a.extra.push((format!("transitions_seed{seed}_N{}_g{}.csv", p.population, g + 1), csv));
                    }
                }
            }
            ExperimentResults::Bounds(r) => {
                a.report_name = "bounds.json";
                a.report_json = pretty(r)?;
                a.summary.header =
                    ["master_seed", "name", "trials", "violations", "worst_margin"].map(String::from).to_vec();
                for b in &r.reports {
                    a.summary.rows.push(vec![
                        s.clone(),
                        b.name.clone(),
                        b.trials.to_string(),
                        b.violations.to_string(),
                        fmt_f64(b.worst_margin),
                    ]);
                    a.long.push(LongRow::new(None, format!("{}_violations", b.name), b.violations as f64));
                    a.long.push(LongRow::new(None, format!("{}_worst_margin", b.name), b.worst_margin));
                    for (key, v) in &b.fitted {
                        a.long.push(LongRow::new(None, format!("{}_{key}", b.name), *v));
                    }
                }
            }
        }
        Ok(a)
    }
}

fn append_trees<P: PartitionPath>(
    out: &mut String,
    seed: u64,
    population: Option<usize>,
    paths: &[P],
) -> Result<(), CliError> {
    for (r, path) in paths.iter().enumerate() {
        if !path.is_coalesced() {
            continue;
        }
        let tree = to_newick(path).map_err(|e| CliError::Internal(e.to_string()))?;
        let n = population.map(|p| format!(" N={p}")).unwrap_or_default();
        out.push_str(&format!("[master_seed={seed}{n} replicate={r}] {tree}\n"));
    }
    Ok(())
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn csv_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>, path: &Path) -> Result<Vec<u8>, CliError> {
    let io = |e: csv::Error| CliError::Io { path: path.to_path_buf(), source: std::io::Error::other(e) };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io { path: path.to_path_buf(), source: std::io::Error::other(e.to_string()) })
}

/// Writes all artifacts into `dir`, creating it if needed; returns the paths
/// written in order.
pub fn emit_outputs(artifacts: &Artifacts, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: &[u8]| -> Result<(), CliError> {
        let path = dir.join(name);
        write_file(&path, bytes)?;
        written.push(path);
        Ok(())
    };
    put("config.json", artifacts.config_json.as_bytes())?;
    put(artifacts.report_name, artifacts.report_json.as_bytes())?;

    let summary_path = dir.join("summary.csv");
    put("summary.csv", &csv_bytes(&artifacts.summary.header, artifacts.summary.rows.clone(), &summary_path)?)?;

    let long_path = dir.join("long.csv");
    let seed = artifacts.master_seed.to_string();
    let header: Vec<String> = LONG_HEADER.map(String::from).to_vec();
    let rows = artifacts.long.iter().map(|r| {
        vec![
            seed.clone(),
            r.population.map(|p| p.to_string()).unwrap_or_default(),
            r.statistic.clone(),
            fmt_f64(r.value),
            r.stderr.map(fmt_f64).unwrap_or_default(),
        ]
    });
    put("long.csv", &csv_bytes(&header, rows, &long_path)?)?;

    for (name, contents) in &artifacts.extra {
        put(name, contents.as_bytes())?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ExperimentConfig {
        let text = r#"{"experiment": "kingman_reference", "n": 4, "replicates": 10, "master_seed": 99}"#;
        ExperimentConfig::from_json_str(text).unwrap().0
    }

    #[test]
    fn empty_results_write_headers() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_outputs(&Artifacts::empty(&config()).unwrap(), dir.path()).unwrap();
        assert_eq!(files.len(), 4);
        let long = fs::read_to_string(dir.path().join("long.csv")).unwrap();
        assert_eq!(long, "master_seed,N,statistic,value,stderr\n");
        let echo = fs::read_to_string(dir.path().join("config.json")).unwrap();
        assert_eq!(ExperimentConfig::from_json_str(&echo).unwrap().0, config());
        assert!(fs::read_to_string(dir.path().join("report.json")).unwrap().contains("\"master_seed\": 99"));
    }

    #[test]
    fn io_errors_name_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = emit_outputs(&Artifacts::empty(&config()).unwrap(), &blocker.join("sub")).unwrap_err();
        assert!(err.to_string().contains("file/sub"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1e-300, 2.0 / 3.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }
}
