//! Raw CSV, summary tables and SVG plots for sweep results.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use tempfile::NamedTempFile;

use crate::engines::Algorithm;
use crate::error::{Error, Result};
use crate::sweep::{CellResult, Provenance, RunRow, SweepResult};

pub const RAW_CSV: &str = "runs.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const COMPARISONS_CSV: &str = "comparisons.csv";
pub const SUMMARY_TABLE: &str = "summary.txt";
pub const PROVENANCE: &str = "provenance.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReportFormat {
    Csv,
    Table,
    Plot,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "table" => Ok(ReportFormat::Table),
            "plot" => Ok(ReportFormat::Plot),
            other => Err(Error::InvalidParameter(format!(
                "unknown format {other:?} (expected csv, table or plot)"
            ))),
        }
    }
}

pub fn write_rows<W: Write>(rows: &[RunRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn rows_to_csv(rows: &[RunRow]) -> String {
    let mut buf = Vec::new();
    write_rows(rows, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<RunRow>> {
    let mut r = csv::Reader::from_reader(input);
    let rows = r.deserialize().collect::<Result<Vec<RunRow>, _>>()?;
    Ok(rows)
}

pub fn read_rows_from_path(path: &Path) -> Result<Vec<RunRow>> {
    read_rows(std::fs::File::open(path)?)
}

/// One row per (cell, algorithm).
pub fn summary_csv(cells: &[CellResult]) -> String {
    let mut s = String::from("n,k,p,algorithm,count,mean,min,max,variance\n");
    for c in cells {
        for a in &c.algorithms {
            let m = &a.summary;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                c.cell.n, c.cell.k, c.cell.p, a.algorithm, m.count, m.mean, m.min, m.max, m.variance
            );
        }
    }
    s
}

pub fn comparisons_csv(cells: &[CellResult]) -> String {
    let mut s = String::from(
        "n,k,p,a,b,welch_t,welch_df,welch_p,significant_at_05,paired_t,paired_p,verdict\n",
    );
    for c in cells {
        for cmp in &c.comparisons {
            let (pt, pp) = cmp
                .paired
                .map(|r| (r.t_statistic.to_string(), r.p_value.to_string()))
                .unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                c.cell.n,
                c.cell.k,
                c.cell.p,
                cmp.a,
                cmp.b,
                cmp.welch.t_statistic,
                cmp.welch.degrees_of_freedom,
                cmp.welch.p_value,
                cmp.welch.significant_at_05,
                pt,
                pp,
                cmp.verdict()
            );
        }
    }
    s
}

/// Human-readable per-cell table: mean [min, max] per algorithm, then the
/// Welch verdict for each comparison.
pub fn summary_table(cells: &[CellResult]) -> String {
    let mut algs: Vec<Algorithm> = cells
        .iter()
        .flat_map(|c| c.algorithms.iter().map(|a| a.algorithm))
        .collect();
    algs.sort();
    algs.dedup();

    let mut s = String::new();
    let _ = write!(s, "{:>5} {:>3} {:>4}", "N", "K", "P");
    for a in &algs {
        let _ = write!(s, "  {:>30}", format!("{a} mean [min, max]"));
    }
    let _ = writeln!(s, "  significance (Welch, p<0.05)");
    for c in cells {
        let _ = write!(s, "{:>5} {:>3} {:>4}", c.cell.n, c.cell.k, c.cell.p);
        for a in &algs {
            let cellstr = match c.algorithm(*a) {
                Some(x) => format!(
                    "{:.6} [{:.6}, {:.6}]",
                    x.summary.mean, x.summary.min, x.summary.max
                ),
                None => "-".to_string(),
            };
            let _ = write!(s, "  {cellstr:>30}");
        }
        let verdicts: Vec<String> = c
            .comparisons
            .iter()
            .map(|cmp| format!("{} vs {}: {} (p={:.3e})", cmp.a, cmp.b, cmp.verdict(), cmp.welch.p_value))
            .collect();
        let _ = writeln!(s, "  {}", verdicts.join("; "));
    }
    s
}

pub fn provenance_toml(p: &Provenance, result: Option<&SweepResult>) -> String {
    let mut s = toml::to_string(p).expect("provenance serializes");
    if let Some(r) = result {
        s.push_str("\n[config]\n");
        s.push_str(&r.config.to_toml());
        s.push_str("\n[landscape_seeds]\n");
        for c in &r.cells {
            let seeds: Vec<String> = c.landscape_seeds.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "n{}_k{}_p{} = [{}]", c.cell.n, c.cell.k, c.cell.p, seeds.join(", "));
        }
    }
    s
}

const PALETTE: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

/// Fitness against K for one (N, P): mean markers joined by lines, with
/// min-max whiskers, one series per algorithm.
pub fn plot_svg(cells: &[CellResult], n: usize, p: usize) -> String {
    let cells: Vec<&CellResult> = cells.iter().filter(|c| c.cell.n == n && c.cell.p == p).collect();
    let mut series: BTreeMap<Algorithm, Vec<(usize, f64, f64, f64)>> = BTreeMap::new();
    for c in &cells {
        for a in &c.algorithms {
            series
                .entry(a.algorithm)
                .or_default()
                .push((c.cell.k, a.summary.mean, a.summary.min, a.summary.max));
        }
    }

    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 130.0, 40.0, 50.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let k_max = cells.iter().map(|c| c.cell.k).max().unwrap_or(1).max(1) as f64;
    let lo = series.values().flatten().map(|x| x.2).fold(f64::INFINITY, f64::min);
    let hi = series.values().flatten().map(|x| x.3).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() && hi > lo {
        let pad = (hi - lo) * 0.08;
        (lo - pad, hi + pad)
    } else {
        (0.0, 1.0)
    };
    let x_of = |k: f64| left + pw * k / k_max;
    let y_of = |f: f64| top + ph * (1.0 - (f - lo) / (hi - lo));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">N={n}, P={p}: best fitness vs K (min-max bars)</text>"#,
        left + pw / 2.0
    );
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let f = lo + (hi - lo) * i as f64 / 5.0;
        let y = y_of(f);
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{f:.3}</text>"##,
            left - 5.0,
            left - 8.0,
            y + 4.0
        );
    }
    let mut ks: Vec<usize> = cells.iter().map(|c| c.cell.k).collect();
    ks.dedup();
    for k in ks {
        let x = x_of(k as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{k}</text>"#,
            top + ph,
            top + ph + 5.0,
            top + ph + 20.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">K</text>"#,
        left + pw / 2.0,
        h - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">fitness</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );

    let count = series.len().max(1) as f64;
    for (i, (alg, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        // offset series horizontally so whiskers do not overlap
        let dx = (i as f64 - (count - 1.0) / 2.0) * 6.0;
        let path: Vec<String> = pts
            .iter()
            .map(|&(k, mean, _, _)| format!("{:.2},{:.2}", x_of(k as f64) + dx, y_of(mean)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.join(" ")
        );
        for &(k, mean, min, max) in pts {
            let x = x_of(k as f64) + dx;
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}"/><circle cx="{x:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                y_of(min),
                y_of(max),
                y_of(mean)
            );
        }
        let ly = top + 15.0 + 20.0 * i as f64;
        let lx = left + pw + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{alg}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn plot_file_name(n: usize, p: usize) -> String {
    format!("fitness_n{n}_p{p}.svg")
}

/// Renders the requested report files. Raw rows are included when given.
pub fn render(
    cells: &[CellResult],
    rows: Option<&[RunRow]>,
    provenance: Option<String>,
    formats: &[ReportFormat],
) -> Vec<(String, String)> {
    let mut files = Vec::new();
    if let Some(rows) = rows {
        files.push((RAW_CSV.to_string(), rows_to_csv(rows)));
    }
    if formats.contains(&ReportFormat::Csv) {
        files.push((SUMMARY_CSV.to_string(), summary_csv(cells)));
        files.push((COMPARISONS_CSV.to_string(), comparisons_csv(cells)));
    }
    if formats.contains(&ReportFormat::Table) {
        files.push((SUMMARY_TABLE.to_string(), summary_table(cells)));
    }
    if formats.contains(&ReportFormat::Plot) {
        let mut np: Vec<(usize, usize)> = cells.iter().map(|c| (c.cell.n, c.cell.p)).collect();
        np.sort();
        np.dedup();
        for (n, p) in np {
            files.push((plot_file_name(n, p), plot_svg(cells, n, p)));
        }
    }
    if let Some(text) = provenance {
        files.push((PROVENANCE.to_string(), text));
    }
    files
}

/// Writes all files into `dir`. Every file is staged as a temporary file in
/// `dir` first; nothing is renamed into place unless all of them were
/// written.
pub fn write_files(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    let mut staged = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let mut tmp = NamedTempFile::new_in(dir)?;
        tmp.write_all(contents.as_bytes())?;
        tmp.as_file().sync_all()?;
        staged.push((tmp, dir.join(name)));
    }
    let mut written = Vec::with_capacity(staged.len());
    for (tmp, path) in staged {
        tmp.persist(&path).map_err(|e| Error::Io(e.error))?;
        written.push(path);
    }
    Ok(written)
}

pub fn write_sweep_report(
    result: &SweepResult,
    dir: &Path,
    formats: &[ReportFormat],
) -> Result<Vec<PathBuf>> {
    let prov = provenance_toml(&result.provenance, Some(result));
    let files = render(&result.cells, Some(&result.rows), Some(prov), formats);
    write_files(dir, &files)
}
