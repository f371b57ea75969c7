use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use nk_hdea::report::{self, ReportFormat};
use nk_hdea::stats::{summarize, welch_t_test};
use nk_hdea::sweep::{self, RunRow, SweepConfig, SweepOptions};
use nk_hdea::{Algorithm, Landscape};

#[derive(Debug, Parser)]
#[command(name = "nkbench", version, about = "NK landscape EA / HDEA experiment runner")]
struct Cli {
    /// Sweep configuration (TOML with the SweepConfig field names).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Overrides the configured master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Report outputs; repeat or comma-separate. Defaults to csv,table.
    #[arg(long, global = true, value_delimiter = ',')]
    format: Vec<ReportFormat>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write landscape files for every (N, K, landscape) of the sweep.
    Gen,
    /// Run a sweep and write raw results plus the requested reports.
    Run {
        /// Also persist every generated landscape under <out>/landscapes.
        #[arg(long)]
        save_landscapes: bool,
    },
    /// Summarize a raw results CSV.
    Report {
        /// Raw per-run CSV written by `run`.
        #[arg(long)]
        csv: PathBuf,
    },
    /// Welch t-test between two cells, e.g. `--a n=100,k=10,p=30,algorithm=HDEA`.
    Ttest {
        #[arg(long)]
        csv: PathBuf,
        /// Separate CSV for cell B; defaults to --csv.
        #[arg(long)]
        csv_b: Option<PathBuf>,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
}

#[derive(Debug, PartialEq)]
struct CellSelector {
    n: usize,
    k: usize,
    p: usize,
    algorithm: Algorithm,
}

impl CellSelector {
    fn parse(s: &str) -> Result<Self> {
        let (mut n, mut k, mut p, mut algorithm) = (None, None, None, None);
        for part in s.split(',') {
            let (key, value) = part
                .split_once('=')
                .with_context(|| format!("expected key=value, got {part:?}"))?;
            let value = value.trim();
            match key.trim() {
                "n" => n = Some(value.parse()?),
                "k" => k = Some(value.parse()?),
                "p" => p = Some(value.parse()?),
                "algorithm" | "alg" => algorithm = Some(value.parse::<Algorithm>()?),
                other => bail!("unknown cell key {other:?}"),
            }
        }
        Ok(CellSelector {
            n: n.context("cell selector needs n")?,
            k: k.context("cell selector needs k")?,
            p: p.context("cell selector needs p")?,
            algorithm: algorithm.context("cell selector needs algorithm")?,
        })
    }

    fn samples(&self, rows: &[RunRow]) -> Vec<f64> {
        let mut picked: Vec<&RunRow> = rows
            .iter()
            .filter(|r| r.n == self.n && r.k == self.k && r.p == self.p && r.algorithm == self.algorithm)
            .collect();
        picked.sort_by_key(|r| (r.landscape_idx, r.run_idx));
        picked.iter().map(|r| r.final_best).collect()
    }
}

fn load_config(cli: &Cli) -> Result<SweepConfig> {
    let mut cfg = match &cli.config {
        Some(path) => SweepConfig::from_path(path)
            .with_context(|| format!("reading config {}", path.display()))?,
        None => SweepConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn formats(cli: &Cli) -> Vec<ReportFormat> {
    if cli.format.is_empty() {
        vec![ReportFormat::Csv, ReportFormat::Table]
    } else {
        cli.format.clone()
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn cmd_gen(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    ensure_dir(&cli.out)?;
    let mut count = 0;
    for &n in &cfg.n_values {
        for &k in &cfg.k_values {
            for idx in 0..cfg.landscapes_per_cell {
                let seed = sweep::landscape_seed(cfg.master_seed, n, k, idx);
                let ls = Landscape::generate(n, k, seed)?;
                let path = cli.out.join(sweep::landscape_file_name(n, k, idx));
                let file = std::fs::File::create(&path)
                    .with_context(|| format!("creating {}", path.display()))?;
                ls.save(std::io::BufWriter::new(file))?;
                count += 1;
            }
        }
    }
    println!("wrote {count} landscape files to {}", cli.out.display());
    Ok(())
}

fn cmd_run(cli: &Cli, save_landscapes: bool) -> Result<()> {
    let cfg = load_config(cli)?;
    ensure_dir(&cli.out)?;
    let landscape_dir = if save_landscapes {
        let dir = cli.out.join("landscapes");
        ensure_dir(&dir)?;
        Some(dir)
    } else {
        None
    };
    let opts = SweepOptions {
        threads: cli.threads,
        landscape_dir,
    };
    let cells = cfg.cells().len();
    eprintln!(
        "running {cells} cells x {} algorithms x {} runs ({} generations each)",
        cfg.algorithms.len(),
        cfg.landscapes_per_cell * cfg.runs_per_landscape,
        cfg.generations
    );
    let result = sweep::run_sweep(&cfg, &opts)?;
    let written = report::write_sweep_report(&result, &cli.out, &formats(cli))?;
    if formats(cli).contains(&ReportFormat::Table) {
        print!("{}", report::summary_table(&result.cells));
    }
    eprintln!(
        "finished in {:.1}s; wrote {} files to {}",
        result.provenance.wall_clock_seconds,
        written.len(),
        cli.out.display()
    );
    Ok(())
}

fn cmd_report(cli: &Cli, csv: &Path) -> Result<()> {
    let rows = report::read_rows_from_path(csv)
        .with_context(|| format!("reading {}", csv.display()))?;
    if rows.is_empty() {
        bail!("{} contains no rows", csv.display());
    }
    let cells = sweep::summarize_rows(&rows)?;
    ensure_dir(&cli.out)?;
    let files = report::render(&cells, None, None, &formats(cli));
    let written = report::write_files(&cli.out, &files)?;
    if formats(cli).contains(&ReportFormat::Table) {
        print!("{}", report::summary_table(&cells));
    }
    eprintln!("wrote {} files to {}", written.len(), cli.out.display());
    Ok(())
}

fn cmd_ttest(csv: &Path, csv_b: Option<&Path>, a: &str, b: &str) -> Result<()> {
    let rows_a = report::read_rows_from_path(csv)
        .with_context(|| format!("reading {}", csv.display()))?;
    let rows_b = match csv_b {
        Some(path) => report::read_rows_from_path(path)
            .with_context(|| format!("reading {}", path.display()))?,
        None => rows_a.clone(),
    };
    let sel_a = CellSelector::parse(a)?;
    let sel_b = CellSelector::parse(b)?;
    let xa = sel_a.samples(&rows_a);
    let xb = sel_b.samples(&rows_b);
    if xa.is_empty() || xb.is_empty() {
        bail!("no rows match {}", if xa.is_empty() { a } else { b });
    }
    let sa = summarize(&xa)?;
    let sb = summarize(&xb)?;
    let r = welch_t_test(&xa, &xb)?;
    println!("A: {a}  count={} mean={:.6} min={:.6} max={:.6}", sa.count, sa.mean, sa.min, sa.max);
    println!("B: {b}  count={} mean={:.6} min={:.6} max={:.6}", sb.count, sb.mean, sb.min, sb.max);
    println!(
        "Welch t={:.6} df={:.3} p={:.6e}",
        r.t_statistic, r.degrees_of_freedom, r.p_value
    );
    let verdict = match (r.significant_at_05, r.t_statistic > 0.0) {
        (false, _) => "not significant at p<0.05",
        (true, true) => "A significantly higher (p<0.05)",
        (true, false) => "B significantly higher (p<0.05)",
    };
    println!("verdict: {verdict}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Gen => cmd_gen(&cli),
        Command::Run { save_landscapes } => cmd_run(&cli, *save_landscapes),
        Command::Report { csv } => cmd_report(&cli, csv),
        Command::Ttest { csv, csv_b, a, b } => cmd_ttest(csv, csv_b.as_deref(), a, b),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
