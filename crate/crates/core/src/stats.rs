//! Sample summaries and two-sample t-tests.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSummary {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Unbiased sample variance; 0 for a single sample.
    pub variance: f64,
}

pub fn summarize(samples: &[f64]) -> Result<SampleSummary> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("cannot summarize an empty sample".into()));
    }
    let count = samples.len();
    let mean = samples.iter().sum::<f64>() / count as f64;
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let variance = if count > 1 {
        samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64
    } else {
        0.0
    };
    // Rounding in the mean can push it a hair outside [min, max] when all
    // samples are (nearly) equal.
    Ok(SampleSummary {
        count,
        mean: mean.clamp(min, max),
        min,
        max,
        variance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    pub p_value: f64,
    pub significant_at_05: bool,
}

impl TTestResult {
    fn new(t: f64, df: f64) -> Self {
        let p = student_t_two_tailed(t, df);
        TTestResult {
            t_statistic: t,
            degrees_of_freedom: df,
            p_value: p,
            significant_at_05: p < 0.05,
        }
    }

    fn degenerate(df: f64) -> Self {
        TTestResult {
            t_statistic: 0.0,
            degrees_of_freedom: df,
            p_value: 1.0,
            significant_at_05: false,
        }
    }
}

/// Welch's unequal-variance two-sample t-test, two-tailed.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "t-test needs at least 2 samples per group, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let sa = summarize(a)?;
    let sb = summarize(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let qa = sa.variance / na;
    let qb = sb.variance / nb;
    let se2 = qa + qb;
    let diff = sa.mean - sb.mean;
    if se2 == 0.0 {
        if diff == 0.0 {
            return Ok(TTestResult::degenerate(na + nb - 2.0));
        }
        // Two constant samples with different values.
        return Ok(TTestResult {
            t_statistic: diff.signum() * f64::INFINITY,
            degrees_of_freedom: na + nb - 2.0,
            p_value: 0.0,
            significant_at_05: true,
        });
    }
    let t = diff / se2.sqrt();
    let df = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
    Ok(TTestResult::new(t, df))
}

/// Paired t-test on element-wise differences `a[i] - b[i]`, two-tailed.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter(format!(
            "paired t-test needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::InvalidParameter("paired t-test needs at least 2 pairs".into()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let s = summarize(&diffs)?;
    let n = diffs.len() as f64;
    let df = n - 1.0;
    if s.variance == 0.0 {
        if s.mean == 0.0 {
            return Ok(TTestResult::degenerate(df));
        }
        return Ok(TTestResult {
            t_statistic: s.mean.signum() * f64::INFINITY,
            degrees_of_freedom: df,
            p_value: 0.0,
            significant_at_05: true,
        });
    }
    Ok(TTestResult::new(s.mean / (s.variance / n).sqrt(), df))
}

/// `P(|T| >= |t|)` for Student's t with `df` degrees of freedom.
pub fn student_t_two_tailed(t: f64, df: f64) -> f64 {
    if t.is_nan() || df.is_nan() || df <= 0.0 {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    regularized_incomplete_beta(x, df / 2.0, 0.5).clamp(0.0, 1.0)
}

/// Lanczos approximation (g = 7, n = 9), accurate to about 15 digits for
/// positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    let t = x + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta `I_x(a, b)` by Lentz's continued fraction,
/// using the symmetry `I_x(a,b) = 1 - I_{1-x}(b,a)` where the fraction
/// converges slowly.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const MAX_ITER: usize = 1000;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
