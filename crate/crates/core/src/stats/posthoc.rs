//! All-pairs post-hoc comparisons.

use std::sync::Arc;

use serde::Serialize;

use super::anova::{decompose, validate_groups};
use super::ptukey::{ptukey, qtukey};
use super::special::t_two_sided_p;
use super::StatsError;
use crate::registry::Registry;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseResult {
    pub pair: (usize, usize),
    /// `mean[j] − mean[i]`.
    pub mean_diff: f64,
    pub statistic: f64,
    pub raw_p: f64,
    pub adjusted_p: f64,
    pub significant: bool,
    /// Critical value of the statistic, where the test has one.
    pub critical_value: Option<f64>,
    /// Both samples of the pair have zero variance.
    pub degenerate: bool,
}

pub trait PairwiseTest: Send + Sync {
    fn name(&self) -> &'static str;
    fn compare(&self, groups: &[Vec<f64>], alpha: f64) -> Result<Vec<PairwiseResult>, StatsError>;
}

fn check_alpha(alpha: f64) -> Result<(), StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::Domain(format!("alpha {alpha} not in (0, 1)")));
    }
    Ok(())
}

fn pairs(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..k).flat_map(move |i| (i + 1..k).map(move |j| (i, j)))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_var(v: &[f64], m: f64) -> f64 {
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}

/// Tukey HSD with the Tukey–Kramer standard error for unequal sizes.
pub fn tukey_hsd(groups: &[Vec<f64>], alpha: f64) -> Result<Vec<PairwiseResult>, StatsError> {
    check_alpha(alpha)?;
    let d = decompose(groups)?;
    let k = groups.len();
    let df = d.df_within as f64;
    let msw = d.ss_within / df;
    let q_crit = qtukey(alpha, k, df)?;
    pairs(k)
        .map(|(i, j)| {
            let diff = d.means[j] - d.means[i];
            let se =
                (msw / 2.0 * (1.0 / groups[i].len() as f64 + 1.0 / groups[j].len() as f64)).sqrt();
            let q = diff.abs() / se;
            let p = (1.0 - ptukey(q, k, df)?).max(0.0);
            Ok(PairwiseResult {
                pair: (i, j),
                mean_diff: diff,
                statistic: q,
                raw_p: p,
                adjusted_p: p,
                significant: q > q_crit,
                critical_value: Some(q_crit),
                degenerate: false,
            })
        })
        .collect()
}

/// Welch two-sample t-tests with Bonferroni-adjusted p-values.
pub fn bonferroni_pairwise(
    groups: &[Vec<f64>],
    alpha: f64,
) -> Result<Vec<PairwiseResult>, StatsError> {
    check_alpha(alpha)?;
    validate_groups(groups)?;
    if let Some(g) = groups.iter().find(|g| g.len() < 2) {
        return Err(StatsError::NotEnoughSamples {
            needed: 2,
            found: g.len(),
        });
    }
    let k = groups.len();
    let m = (k * (k - 1) / 2) as f64;
    let stats: Vec<(f64, f64, f64)> = groups
        .iter()
        .map(|g| {
            let mu = mean(g);
            (mu, sample_var(g, mu), g.len() as f64)
        })
        .collect();
    pairs(k)
        .map(|(i, j)| {
            let (mi, vi, ni) = stats[i];
            let (mj, vj, nj) = stats[j];
            let diff = mj - mi;
            let (ai, aj) = (vi / ni, vj / nj);
            let se2 = ai + aj;
            let (t, raw_p, degenerate) = if se2 > 0.0 {
                let df = se2 * se2 / (ai * ai / (ni - 1.0) + aj * aj / (nj - 1.0));
                let t = diff / se2.sqrt();
                (t, t_two_sided_p(t, df)?, false)
            } else if diff == 0.0 {
                (0.0, 1.0, true)
            } else {
                (f64::INFINITY.copysign(diff), 0.0, true)
            };
            let adjusted_p = (raw_p * m).min(1.0);
            Ok(PairwiseResult {
                pair: (i, j),
                mean_diff: diff,
                statistic: t,
                raw_p,
                adjusted_p,
                significant: adjusted_p < alpha,
                critical_value: None,
                degenerate,
            })
        })
        .collect()
}

pub struct TukeyHsd;

impl PairwiseTest for TukeyHsd {
    fn name(&self) -> &'static str {
        "tukey"
    }

    fn compare(&self, groups: &[Vec<f64>], alpha: f64) -> Result<Vec<PairwiseResult>, StatsError> {
        tukey_hsd(groups, alpha)
    }
}

pub struct Bonferroni;

impl PairwiseTest for Bonferroni {
    fn name(&self) -> &'static str {
        "bonferroni"
    }

    fn compare(&self, groups: &[Vec<f64>], alpha: f64) -> Result<Vec<PairwiseResult>, StatsError> {
        bonferroni_pairwise(groups, alpha)
    }
}

pub fn posthoc_registry() -> Registry<dyn PairwiseTest> {
    let mut reg: Registry<dyn PairwiseTest> = Registry::new("post-hoc test");
    for t in [
        Arc::new(TukeyHsd) as Arc<dyn PairwiseTest>,
        Arc::new(Bonferroni),
    ] {
        reg.register(t.name(), t);
    }
    reg
}
