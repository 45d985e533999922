use serde::Serialize;

use super::special::f_sf;
use super::StatsError;

/// Sums of squares below this fraction of their reference count as zero.
const ZERO_RATIO: f64 = 1e-20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaResult {
    pub f_stat: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub p_value: f64,
    pub group_means: Vec<f64>,
    pub ss_between: f64,
    pub ss_within: f64,
    pub ms_between: f64,
    pub ms_within: f64,
}

pub(crate) struct Decomposition {
    pub means: Vec<f64>,
    pub ss_between: f64,
    pub ss_within: f64,
    pub df_between: usize,
    pub df_within: usize,
}

pub(crate) fn validate_groups(groups: &[Vec<f64>]) -> Result<(), StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups(groups.len()));
    }
    if let Some(i) = groups.iter().position(Vec::is_empty) {
        return Err(StatsError::EmptyGroup(i));
    }
    if groups.iter().flatten().any(|x| !x.is_finite()) {
        return Err(StatsError::Domain("non-finite observation".into()));
    }
    Ok(())
}

pub(crate) fn decompose(groups: &[Vec<f64>]) -> Result<Decomposition, StatsError> {
    validate_groups(groups)?;
    let n: usize = groups.iter().map(Vec::len).sum();
    let k = groups.len();
    if n <= k {
        return Err(StatsError::NotEnoughSamples {
            needed: k + 1,
            found: n,
        });
    }
    let means: Vec<f64> = groups
        .iter()
        .map(|g| g.iter().sum::<f64>() / g.len() as f64)
        .collect();
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let ss_between = groups
        .iter()
        .zip(&means)
        .map(|(g, m)| g.len() as f64 * (m - grand).powi(2))
        .sum::<f64>();
    let ss_within = groups
        .iter()
        .zip(&means)
        .map(|(g, m)| g.iter().map(|x| (x - m).powi(2)).sum::<f64>())
        .sum::<f64>();
    let ss_raw = groups.iter().flatten().map(|x| x * x).sum::<f64>();
    let ss_total = ss_between + ss_within;
    if ss_total <= ZERO_RATIO * ss_raw {
        return Err(StatsError::NoVariance);
    }
    if ss_within <= ZERO_RATIO * ss_total {
        return Err(StatsError::InfiniteF);
    }
    Ok(Decomposition {
        means,
        ss_between,
        ss_within,
        df_between: k - 1,
        df_within: n - k,
    })
}

/// One-way ANOVA over independent groups.
pub fn one_way_anova(groups: &[Vec<f64>]) -> Result<AnovaResult, StatsError> {
    let d = decompose(groups)?;
    let ms_between = d.ss_between / d.df_between as f64;
    let ms_within = d.ss_within / d.df_within as f64;
    let f_stat = ms_between / ms_within;
    let p_value = f_sf(f_stat, d.df_between as f64, d.df_within as f64)?;
    Ok(AnovaResult {
        f_stat,
        df_between: d.df_between,
        df_within: d.df_within,
        p_value,
        group_means: d.means,
        ss_between: d.ss_between,
        ss_within: d.ss_within,
        ms_between,
        ms_within,
    })
}
