//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any gated criterion fails. Soft criteria are
//! reported with their verdicts but never fail the suite.

use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

use nk_hdea::engines::Algorithm;
use nk_hdea::genetics::{
    binary_tournament, meiosis, one_point_crossover, point_mutate, random_genome, Diploid,
    Population,
};
use nk_hdea::nk_model::{brute_force_optimum, separable_optimum, Genome, Landscape};
use nk_hdea::report;
use nk_hdea::stats::welch_t_test;
use nk_hdea::sweep::{run_sweep, CellResult, RunRow, SweepConfig, SweepOptions, SweepResult};

const GENERATIONS: u64 = 20_000;
const TRIALS: usize = 10_000;

struct Outcome {
    id: &'static str,
    gated: bool,
    pass: bool,
    detail: String,
}

fn protocol(n_values: Vec<usize>, k_values: Vec<usize>, p_values: Vec<usize>, algorithms: Vec<Algorithm>) -> SweepConfig {
    SweepConfig {
        n_values,
        k_values,
        p_values,
        landscapes_per_cell: 10,
        runs_per_landscape: 10,
        generations: GENERATIONS,
        algorithms,
        master_seed: 1,
    }
}

fn cell(res: &SweepResult, n: usize, k: usize, p: usize) -> &CellResult {
    res.cells
        .iter()
        .find(|c| c.cell.n == n && c.cell.k == k && c.cell.p == p)
        .expect("cell present")
}

fn hdea_vs_ea(c: &CellResult) -> String {
    let cmp = c.comparison(Algorithm::Hdea, Algorithm::Ea).expect("comparison present");
    format!(
        "K={}: HDEA {:.5} vs EA {:.5}, p={:.3e}",
        c.cell.k,
        c.algorithm(Algorithm::Hdea).unwrap().summary.mean,
        c.algorithm(Algorithm::Ea).unwrap().summary.mean,
        cmp.welch.p_value
    )
}

fn figure4(res: &SweepResult, id: &'static str, n: usize) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [6, 10, 15] {
        let c = cell(res, n, k, 30);
        let cmp = c.comparison(Algorithm::Hdea, Algorithm::Ea).unwrap();
        pass &= cmp.a_significantly_better();
        parts.push(hdea_vs_ea(c));
    }
    if n == 50 {
        // reported only: no direction is required at K=0
        parts.push(hdea_vs_ea(cell(res, n, 0, 30)));
    }
    Outcome {
        id,
        gated: true,
        pass,
        detail: format!("N={n} HDEA > EA (Welch p<0.05) for K in {{6,10,15}}; {}", parts.join("; ")),
    }
}

fn k0_optimality(res: &SweepResult) -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for alg in [Algorithm::Ea, Algorithm::Hdea] {
        let rows: Vec<&RunRow> = res
            .rows
            .iter()
            .filter(|r| r.n == 50 && r.k == 0 && r.p == 30 && r.algorithm == alg)
            .collect();
        let hits = rows
            .iter()
            .filter(|r| {
                let ls = Landscape::generate(r.n, r.k, r.landscape_seed).unwrap();
                r.final_best == separable_optimum(&ls).unwrap().1
            })
            .count();
        pass &= rows.len() == 100 && hits >= 90;
        parts.push(format!("{alg} {hits}/{}", rows.len()));
    }
    Outcome {
        id: "C3",
        gated: true,
        pass,
        detail: format!("N=50 K=0 P=30 runs at the exact separable optimum (>=90/100): {}", parts.join(", ")),
    }
}

fn small_instance_oracle() -> Outcome {
    let cfg = protocol(vec![12], vec![4], vec![30], vec![Algorithm::Ea, Algorithm::Hdea]);
    let res = run_sweep(&cfg, &SweepOptions::default()).unwrap();
    let mut optima = std::collections::HashMap::new();
    let mut parts = Vec::new();
    let mut pass = true;
    for alg in [Algorithm::Ea, Algorithm::Hdea] {
        let rows: Vec<&RunRow> = res.rows.iter().filter(|r| r.algorithm == alg).collect();
        let hits = rows
            .iter()
            .filter(|r| {
                let opt = *optima.entry(r.landscape_seed).or_insert_with(|| {
                    let ls = Landscape::generate(12, 4, r.landscape_seed).unwrap();
                    brute_force_optimum(&ls).unwrap().1
                });
                r.final_best >= 0.98 * opt
            })
            .count();
        pass &= rows.len() == 100 && hits >= 90;
        parts.push(format!("{alg} {hits}/{}", rows.len()));
    }
    Outcome {
        id: "C4",
        gated: true,
        pass,
        detail: format!(
            "N=12 K=4 runs reaching >=98% of the brute-force optimum over 4096 genomes (>=90/100): {}",
            parts.join(", ")
        ),
    }
}

fn evaluation_parity(res: &SweepResult) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join(report::RAW_CSV);
    std::fs::write(&path, report::rows_to_csv(&res.rows)).unwrap();
    let rows = report::read_rows_from_path(&path).unwrap();
    let bad = rows
        .iter()
        .filter(|r| r.evaluations != r.p as u64 + res.config.generations)
        .count();
    Outcome {
        id: "C5",
        gated: true,
        pass: bad == 0 && rows.len() == res.rows.len(),
        detail: format!(
            "evaluations == P + generations in the CSV: {} rows audited, {bad} mismatches",
            rows.len()
        ),
    }
}

fn determinism(cfg: &SweepConfig, first: &SweepResult) -> Outcome {
    let again = run_sweep(cfg, &SweepOptions { threads: 4, ..Default::default() }).unwrap();
    let a = report::rows_to_csv(&first.rows);
    let b = report::rows_to_csv(&again.rows);
    Outcome {
        id: "C6",
        gated: true,
        pass: a == b,
        detail: format!(
            "raw CSV byte-identical across executions ({} vs {} threads, {} bytes)",
            first.provenance.threads,
            again.provenance.threads,
            a.len()
        ),
    }
}

fn operator_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut violations = [0usize; 5];
    let ls = Landscape::generate(40, 5, 7).unwrap();
    for _ in 0..TRIALS {
        let n = rng.gen_range(2..80);
        let a = random_genome(n, &mut rng);
        let b = random_genome(n, &mut rng);

        let (c1, c2) = one_point_crossover(&a, &b, &mut rng).unwrap();
        let complementary = (0..n).all(|i| {
            let mut got = [c1.get(i), c2.get(i)];
            let mut want = [a.get(i), b.get(i)];
            got.sort();
            want.sort();
            got == want
        });
        violations[0] += usize::from(!complementary || c1.len() != n);

        let m = point_mutate(&a, &mut rng);
        violations[1] += usize::from(m.hamming(&a) != 1 || m.len() != n);

        let d = Diploid::new(a.clone(), 0.0, b.clone(), 0.0).unwrap();
        let gametes = meiosis(&d, &mut rng).unwrap();
        let provenance = gametes.iter().all(|g| {
            g.len() == n && (0..n).all(|i| g.get(i) == a.get(i) || g.get(i) == b.get(i))
        }) && gametes[0] == a
            && gametes[1] == b;
        violations[2] += usize::from(!provenance);

        let p = rng.gen_range(2..20);
        let mut pop = Population::random(&ls, p, &mut rng).unwrap();
        let before = pop.clone();
        let child: Genome = random_genome(40, &mut rng);
        let f = ls.evaluate(&child).unwrap();
        let slot = pop.replace_worst(child.clone(), f);
        let unchanged = (0..p).filter(|&i| pop.members()[i] == before.members()[i]).count();
        let worst = before.fitnesses().iter().copied().fold(f64::INFINITY, f64::min);
        let ok = pop.len() == p
            && before.fitnesses()[slot] == worst
            && pop.members()[slot] == child
            && (0..p).all(|i| i == slot || pop.members()[i] == before.members()[i])
            && unchanged >= p - 1;
        violations[3] += usize::from(!ok);

        // with two entries both are always candidates, so the winner must
        // never be the strictly worse one
        let pair = [rng.gen::<f64>(), rng.gen::<f64>()];
        let w = binary_tournament(&pair, &mut rng).unwrap();
        violations[4] += usize::from(pair[w] < pair[1 - w]);
    }
    let names = ["crossover complementarity", "mutation Hamming-1", "meiosis allele provenance", "replace-worst single slot", "tournament dominance"];
    let detail = names
        .iter()
        .zip(violations)
        .map(|(n, v)| format!("{n} {v}"))
        .collect::<Vec<_>>()
        .join(", ");
    Outcome {
        id: "C7",
        gated: true,
        pass: violations.iter().all(|&v| v == 0),
        detail: format!("{TRIALS} randomized trials each, violations: {detail}"),
    }
}

// Welch test computed directly from the textbook formulas, with the p-value
// taken from statrs' Student-t CDF.
fn reference_welch(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let var = |x: &[f64]| {
        let m = mean(x);
        x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
    };
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (var(a) / na, var(b) / nb);
    let t = (mean(a) - mean(b)) / (sa + sb).sqrt();
    let df = (sa + sb).powi(2) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let p = 2.0 * StudentsT::new(0.0, 1.0, df).unwrap().cdf(-t.abs());
    (t, df, p)
}

fn statistics_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let na = rng.gen_range(2..120);
        let nb = rng.gen_range(2..120);
        let shift = rng.gen_range(-0.05..0.05);
        let spread_a = rng.gen_range(0.01..0.2);
        let spread_b = rng.gen_range(0.01..0.2);
        let a: Vec<f64> = (0..na).map(|_| 0.7 + spread_a * rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..nb).map(|_| 0.7 + shift + spread_b * rng.gen_range(-1.0..1.0)).collect();
        let got = welch_t_test(&a, &b).unwrap();
        let (t, df, p) = reference_welch(&a, &b);
        worst = worst
            .max((got.t_statistic - t).abs())
            .max((got.degrees_of_freedom - df).abs())
            .max((got.p_value - p).abs());
    }
    Outcome {
        id: "C8",
        gated: true,
        pass: worst <= 1e-6,
        detail: format!("Welch t/df/p vs independent reference on 20 random sample pairs, max abs diff {worst:.2e} (tol 1e-6)"),
    }
}

fn soft_report(main: &SweepResult, small_p: &SweepResult) -> Vec<Outcome> {
    let mut out = Vec::new();
    let parts: Vec<String> = [10, 15]
        .iter()
        .map(|&k| {
            let c = cell(small_p, 100, k, 10);
            format!("P=10 {} ({})", hdea_vs_ea(c), c.comparison(Algorithm::Hdea, Algorithm::Ea).unwrap().verdict())
        })
        .collect();
    let shrinks = [10, 15].iter().all(|&k| {
        let diff = |c: &CellResult| {
            c.algorithm(Algorithm::Hdea).unwrap().summary.mean - c.algorithm(Algorithm::Ea).unwrap().summary.mean
        };
        diff(cell(small_p, 100, k, 10)) <= diff(cell(main, 100, k, 30))
    });
    out.push(Outcome {
        id: "C9a",
        gated: false,
        pass: shrinks,
        detail: format!("N=100 HDEA advantage at P=10 no larger than at P=30: {}", parts.join("; ")),
    });

    let mut h2p_sig = 0;
    let mut parts = Vec::new();
    for n in [50, 100] {
        for k in [6, 10, 15] {
            let cmp = cell(main, n, k, 30).comparison(Algorithm::H2p, Algorithm::Ea).unwrap();
            h2p_sig += usize::from(cmp.a_significantly_better());
            parts.push(format!("N={n} K={k} {} p={:.3}", cmp.verdict(), cmp.welch.p_value));
        }
    }
    out.push(Outcome {
        id: "C9b",
        gated: false,
        pass: h2p_sig == 0,
        detail: format!("H2P control shows no significant advantage over EA: {}", parts.join("; ")),
    });
    out
}

fn main() -> ExitCode {
    let start = std::time::Instant::now();
    let mut outcomes = Vec::new();

    let main_cfg = protocol(
        vec![50, 100],
        vec![0, 6, 10, 15],
        vec![30],
        vec![Algorithm::Ea, Algorithm::Hdea, Algorithm::H2p],
    );
    let main = run_sweep(&main_cfg, &SweepOptions { threads: 1, ..Default::default() }).unwrap();
    outcomes.push(figure4(&main, "C1", 100));
    outcomes.push(figure4(&main, "C2", 50));
    outcomes.push(k0_optimality(&main));
    outcomes.push(small_instance_oracle());
    outcomes.push(evaluation_parity(&main));
    outcomes.push(determinism(&main_cfg, &main));
    outcomes.push(operator_properties());
    outcomes.push(statistics_oracle());

    let small_p_cfg = protocol(vec![100], vec![10, 15], vec![10], vec![Algorithm::Ea, Algorithm::Hdea]);
    let small_p = run_sweep(&small_p_cfg, &SweepOptions::default()).unwrap();
    outcomes.extend(soft_report(&main, &small_p));

    let mut failed = 0;
    for o in &outcomes {
        let tag = match (o.gated, o.pass) {
            (true, true) => "PASS",
            (true, false) => "FAIL",
            (false, true) => "SOFT-YES",
            (false, false) => "SOFT-NO",
        };
        println!("{tag:8} [{}] {}", o.id, o.detail);
        failed += usize::from(o.gated && !o.pass);
    }
    println!(
        "acceptance: {} gated criteria, {failed} failed ({:.0}s)",
        outcomes.iter().filter(|o| o.gated).count(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
