use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::report::Metric;
use crate::error::{Error, Result};

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TTestNote {
    /// Every paired difference is zero.
    Identical,
    /// Differences are constant and non-zero, so the standard error is zero.
    DegenerateVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub n: usize,
    pub mean_difference: f64,
    pub t_statistic: f64,
    pub df: usize,
    /// Two-sided.
    pub p_value: f64,
    pub note: Option<TTestNote>,
}

/// Two-sided paired t-test on `a − b`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::InvalidParam(format!(
            "paired samples differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidParam("paired t-test needs at least 2 pairs".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let df = n - 1;

    if d.iter().all(|&x| x == 0.0) {
        return Ok(TTest {
            n,
            mean_difference: 0.0,
            t_statistic: 0.0,
            df,
            p_value: 1.0,
            note: Some(TTestNote::Identical),
        });
    }
    // Rounding leaves a few ulps of spread on "constant" differences.
    if var.sqrt() <= 1e-12 * mean.abs() {
        return Ok(TTest {
            n,
            mean_difference: mean,
            t_statistic: f64::INFINITY.copysign(mean),
            df,
            p_value: 0.0,
            note: Some(TTestNote::DegenerateVariance),
        });
    }
    let t = mean / (var.sqrt() / (n as f64).sqrt());
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(TTest {
        n,
        mean_difference: mean,
        t_statistic: t,
        df,
        p_value: p,
        note: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    pub baseline_tag: String,
    pub system_tag: String,
    pub metric: Metric,
    pub t_statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub mean_difference: f64,
    /// `p < 0.05`, two-sided.
    pub significant: bool,
    pub note: Option<TTestNote>,
}

impl SignificanceResult {
    pub fn new(baseline_tag: &str, system_tag: &str, metric: Metric, test: &TTest) -> Self {
        Self {
            baseline_tag: baseline_tag.to_owned(),
            system_tag: system_tag.to_owned(),
            metric,
            t_statistic: test.t_statistic,
            df: test.df,
            p_value: test.p_value,
            mean_difference: test.mean_difference,
            significant: test.p_value < SIGNIFICANCE_LEVEL,
            note: test.note,
        }
    }

    /// Significant and in the system's favour.
    pub fn is_improvement(&self) -> bool {
        self.significant && self.mean_difference > 0.0
    }
}
