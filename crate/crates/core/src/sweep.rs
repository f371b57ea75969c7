//! Experiment sweeps over (N, K, P) cells with shared landscapes and shared
//! initial populations across algorithms.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engines::{self, Algorithm, RunConfig};
use crate::error::{Error, Result};
use crate::nk_model::Landscape;
use crate::seed;
use crate::stats::{paired_t_test, summarize, welch_t_test, SampleSummary, TTestResult};

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Sweep parameters. Defaults give 10 landscapes x 10 runs of 20,000
/// generations per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub n_values: Vec<usize>,
    pub k_values: Vec<usize>,
    pub p_values: Vec<usize>,
    pub landscapes_per_cell: usize,
    pub runs_per_landscape: usize,
    pub generations: u64,
    pub algorithms: Vec<Algorithm>,
    pub master_seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n_values: vec![50, 100],
            k_values: vec![0, 2, 4, 6, 8, 10, 15],
            p_values: vec![30],
            landscapes_per_cell: 10,
            runs_per_landscape: 10,
            generations: 20_000,
            algorithms: vec![Algorithm::Ea, Algorithm::Hdea],
            master_seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub n: usize,
    pub k: usize,
    pub p: usize,
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SweepConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        SweepConfig::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Collects every problem instead of stopping at the first.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, len) in [
            ("n_values", self.n_values.len()),
            ("k_values", self.k_values.len()),
            ("p_values", self.p_values.len()),
            ("algorithms", self.algorithms.len()),
        ] {
            if len == 0 {
                problems.push(format!("{name} is empty"));
            }
        }
        if self.landscapes_per_cell == 0 {
            problems.push("landscapes_per_cell must be positive".into());
        }
        if self.runs_per_landscape == 0 {
            problems.push("runs_per_landscape must be positive".into());
        }
        if self.generations == 0 {
            problems.push("generations must be positive".into());
        }
        for &n in &self.n_values {
            if n < 2 {
                problems.push(format!("n={n} is too small for crossover"));
            }
            for &k in &self.k_values {
                if k >= n {
                    problems.push(format!("k={k} is not below n={n}"));
                } else if k > crate::nk_model::MAX_K {
                    problems.push(format!("k={k} exceeds {}", crate::nk_model::MAX_K));
                }
            }
        }
        for &p in &self.p_values {
            if p < 2 {
                problems.push(format!("p={p} is below 2"));
            }
        }
        let mut algs = self.algorithms.clone();
        algs.sort();
        algs.dedup();
        if algs.len() != self.algorithms.len() {
            problems.push("algorithms contains duplicates".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    /// Cells in canonical order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &n in &self.n_values {
            for &k in &self.k_values {
                for &p in &self.p_values {
                    cells.push(Cell { n, k, p });
                }
            }
        }
        cells.sort();
        cells.dedup();
        cells
    }

    fn sorted_algorithms(&self) -> Vec<Algorithm> {
        let mut algs = self.algorithms.clone();
        algs.sort();
        algs
    }
}

/// Seed for one sweep element. Landscape seeds pass `run_idx = None` and
/// `algorithm = None`; run seeds pass `algorithm = None` so every algorithm
/// starts from the same population. Absent fields mix in as 0 and present
/// ones as `value + 1`.
pub fn derive_seed(
    master_seed: u64,
    n: usize,
    k: usize,
    landscape_idx: usize,
    run_idx: Option<usize>,
    algorithm: Option<Algorithm>,
) -> u64 {
    seed::mix(&[
        master_seed,
        n as u64,
        k as u64,
        landscape_idx as u64,
        run_idx.map_or(0, |r| r as u64 + 1),
        algorithm.map_or(0, |a| a.id() + 1),
    ])
}

pub fn landscape_seed(master_seed: u64, n: usize, k: usize, landscape_idx: usize) -> u64 {
    derive_seed(master_seed, n, k, landscape_idx, None, None)
}

pub fn run_seed(master_seed: u64, n: usize, k: usize, landscape_idx: usize, run_idx: usize) -> u64 {
    derive_seed(master_seed, n, k, landscape_idx, Some(run_idx), None)
}

/// One line of the raw results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub n: usize,
    pub k: usize,
    pub p: usize,
    pub algorithm: Algorithm,
    pub landscape_idx: usize,
    pub run_idx: usize,
    pub landscape_seed: u64,
    pub run_seed: u64,
    pub final_best: f64,
    pub final_mean: f64,
    pub evaluations: u64,
}

impl RunRow {
    pub fn cell(&self) -> Cell {
        Cell {
            n: self.n,
            k: self.k,
            p: self.p,
        }
    }

    fn sort_key(&self) -> (Cell, usize, usize, Algorithm) {
        (self.cell(), self.landscape_idx, self.run_idx, self.algorithm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmCell {
    pub algorithm: Algorithm,
    pub final_bests: Vec<f64>,
    pub summary: SampleSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub a: Algorithm,
    pub b: Algorithm,
    /// Decides significance.
    pub welch: TTestResult,
    /// Paired over shared (landscape, run) starts, reported alongside.
    pub paired: Option<TTestResult>,
}

impl Comparison {
    pub fn verdict(&self) -> String {
        if !self.welch.significant_at_05 {
            "n.s.".to_string()
        } else if self.welch.t_statistic > 0.0 {
            format!("{}>{}", self.a, self.b)
        } else {
            format!("{}<{}", self.a, self.b)
        }
    }

    /// True when `a` has the higher mean and Welch p < 0.05.
    pub fn a_significantly_better(&self) -> bool {
        self.welch.significant_at_05 && self.welch.t_statistic > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub cell: Cell,
    pub landscape_seeds: Vec<u64>,
    pub algorithms: Vec<AlgorithmCell>,
    pub comparisons: Vec<Comparison>,
}

impl CellResult {
    pub fn algorithm(&self, alg: Algorithm) -> Option<&AlgorithmCell> {
        self.algorithms.iter().find(|a| a.algorithm == alg)
    }

    pub fn comparison(&self, a: Algorithm, b: Algorithm) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.a == a && c.b == b)
    }
}

// (a, b) pairs compared when both are present; `a - b` is the t direction.
const COMPARISONS: [(Algorithm, Algorithm); 3] = [
    (Algorithm::Hdea, Algorithm::Ea),
    (Algorithm::H2p, Algorithm::Ea),
    (Algorithm::Hdea, Algorithm::H2p),
];

/// Aggregates raw rows into per-cell results. Rows are put in canonical
/// order first, so the output depends only on the set of rows.
pub fn summarize_rows(rows: &[RunRow]) -> Result<Vec<CellResult>> {
    let mut sorted: Vec<&RunRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));

    let mut by_cell: BTreeMap<Cell, Vec<&RunRow>> = BTreeMap::new();
    for row in sorted {
        by_cell.entry(row.cell()).or_default().push(row);
    }

    let mut cells = Vec::with_capacity(by_cell.len());
    for (cell, rows) in by_cell {
        let mut landscape_seeds: BTreeMap<usize, u64> = BTreeMap::new();
        let mut per_alg: BTreeMap<Algorithm, Vec<&RunRow>> = BTreeMap::new();
        for row in &rows {
            if let Some(&prev) = landscape_seeds.get(&row.landscape_idx) {
                if prev != row.landscape_seed {
                    return Err(Error::Config(format!(
                        "cell {cell:?} landscape {} has conflicting seeds",
                        row.landscape_idx
                    )));
                }
            }
            landscape_seeds.insert(row.landscape_idx, row.landscape_seed);
            per_alg.entry(row.algorithm).or_default().push(row);
        }

        let mut algorithms = Vec::new();
        for (&algorithm, rows) in &per_alg {
            let final_bests: Vec<f64> = rows.iter().map(|r| r.final_best).collect();
            algorithms.push(AlgorithmCell {
                algorithm,
                summary: summarize(&final_bests)?,
                final_bests,
            });
        }

        let mut comparisons = Vec::new();
        for (a, b) in COMPARISONS {
            let (Some(ra), Some(rb)) = (per_alg.get(&a), per_alg.get(&b)) else {
                continue;
            };
            let xa: Vec<f64> = ra.iter().map(|r| r.final_best).collect();
            let xb: Vec<f64> = rb.iter().map(|r| r.final_best).collect();
            if xa.len() < 2 || xb.len() < 2 {
                continue;
            }
            let keys_a: Vec<_> = ra.iter().map(|r| (r.landscape_idx, r.run_idx)).collect();
            let keys_b: Vec<_> = rb.iter().map(|r| (r.landscape_idx, r.run_idx)).collect();
            let paired = if keys_a == keys_b {
                Some(paired_t_test(&xa, &xb)?)
            } else {
                None
            };
            comparisons.push(Comparison {
                a,
                b,
                welch: welch_t_test(&xa, &xb)?,
                paired,
            });
        }

        cells.push(CellResult {
            cell,
            landscape_seeds: landscape_seeds.into_values().collect(),
            algorithms,
            comparisons,
        });
    }
    Ok(cells)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub code_version: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    pub significance_test: String,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub rows: Vec<RunRow>,
    pub cells: Vec<CellResult>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    /// Worker threads; 0 uses the rayon default.
    pub threads: usize,
    /// When set, every landscape is written here as it is generated.
    pub landscape_dir: Option<PathBuf>,
}

pub fn landscape_file_name(n: usize, k: usize, landscape_idx: usize) -> String {
    format!("nk_n{n}_k{k}_l{landscape_idx}.txt")
}

/// Runs every (cell, landscape, run, algorithm) combination. Each landscape
/// is generated once and shared by all runs on it; runs fan out over the
/// thread pool and rows are sorted canonically afterwards.
pub fn run_sweep(cfg: &SweepConfig, opts: &SweepOptions) -> Result<SweepResult> {
    cfg.validate()?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let threads = pool.current_num_threads();
    let algorithms = cfg.sorted_algorithms();

    let mut rows = Vec::new();
    let mut landscapes_written = std::collections::BTreeSet::new();
    for cell in cfg.cells() {
        for landscape_idx in 0..cfg.landscapes_per_cell {
            let ls_seed = landscape_seed(cfg.master_seed, cell.n, cell.k, landscape_idx);
            let ls = Landscape::generate(cell.n, cell.k, ls_seed)?;
            if let Some(dir) = &opts.landscape_dir {
                if landscapes_written.insert((cell.n, cell.k, landscape_idx)) {
                    let path = dir.join(landscape_file_name(cell.n, cell.k, landscape_idx));
                    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
                    ls.save(file)?;
                }
            }
            let jobs: Vec<(usize, Algorithm)> = (0..cfg.runs_per_landscape)
                .flat_map(|r| algorithms.iter().map(move |&a| (r, a)))
                .collect();
            let batch: Vec<RunRow> = pool.install(|| {
                jobs.par_iter()
                    .map(|&(run_idx, algorithm)| {
                        let seed = run_seed(cfg.master_seed, cell.n, cell.k, landscape_idx, run_idx);
                        let rc = RunConfig {
                            n: cell.n,
                            k: cell.k,
                            p: cell.p,
                            generations: cfg.generations,
                            algorithm,
                            seed,
                            landscape: &ls,
                        };
                        let rec = engines::run(&rc)?;
                        Ok(RunRow {
                            n: cell.n,
                            k: cell.k,
                            p: cell.p,
                            algorithm,
                            landscape_idx,
                            run_idx,
                            landscape_seed: ls_seed,
                            run_seed: seed,
                            final_best: rec.final_best,
                            final_mean: rec.final_mean,
                            evaluations: rec.evaluations,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            rows.extend(batch);
        }
    }
    rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    let cells = summarize_rows(&rows)?;
    Ok(SweepResult {
        config: cfg.clone(),
        rows,
        cells,
        provenance: Provenance {
            code_version: CODE_VERSION.to_string(),
            config_hash: cfg.hash(),
            master_seed: cfg.master_seed,
            threads,
            wall_clock_seconds: start.elapsed().as_secs_f64(),
            significance_test: "Welch unpaired two-tailed t-test, p < 0.05; paired t-test reported alongside".into(),
        },
    })
}
