//! Opinion-density sampling protocol: IQR upper bounds, outlier exclusion,
//! equal-quota stratified train samples and density-preserving test samples.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::AnnotatedInstance;

#[derive(Debug, Error, PartialEq)]
pub enum SamplerError {
    #[error("cannot profile an empty collection")]
    Empty,
}

/// Anything stratifiable by its number of opinions.
pub trait OpinionCount {
    fn opinion_count(&self) -> usize;
}

impl OpinionCount for AnnotatedInstance {
    fn opinion_count(&self) -> usize {
        self.opinions.len()
    }
}

impl OpinionCount for usize {
    fn opinion_count(&self) -> usize {
        *self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QuartileMethod {
    /// Linear interpolation between closest ranks: `h = (n - 1) p`.
    #[default]
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub counts: Vec<usize>,
    pub method: QuartileMethod,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    /// `q3 + 1.5 * iqr`
    pub upper_bound: f64,
}

pub fn quantile(sorted: &[f64], p: f64, method: QuartileMethod) -> f64 {
    match method {
        QuartileMethod::Linear => {
            let h = (sorted.len() - 1) as f64 * p;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

pub fn profile_counts(counts: &[usize]) -> Result<DensityProfile, SamplerError> {
    if counts.is_empty() {
        return Err(SamplerError::Empty);
    }
    let mut sorted: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    sorted.sort_by(f64::total_cmp);
    let method = QuartileMethod::Linear;
    let q1 = quantile(&sorted, 0.25, method);
    let q3 = quantile(&sorted, 0.75, method);
    let iqr = q3 - q1;
    Ok(DensityProfile {
        counts: counts.to_vec(),
        method,
        q1,
        q3,
        iqr,
        upper_bound: q3 + 1.5 * iqr,
    })
}

/// Profile of opinion counts pooled over every instance given (all splits).
pub fn density_profile<T: OpinionCount>(instances: &[T]) -> Result<DensityProfile, SamplerError> {
    let counts: Vec<usize> = instances.iter().map(OpinionCount::opinion_count).collect();
    profile_counts(&counts)
}

/// Bound shared by several data models: the largest individual bound.
pub fn combined_upper_bound(bounds: &[f64]) -> Option<f64> {
    bounds.iter().copied().reduce(f64::max)
}

/// Keeps instances with between 1 and `floor(upper_bound)` opinions.
pub fn exclude_outliers<T: OpinionCount + Clone>(instances: &[T], upper_bound: f64) -> Vec<T> {
    let cap = upper_bound.floor();
    instances
        .iter()
        .filter(|i| {
            let c = i.opinion_count();
            c >= 1 && (c as f64) <= cap
        })
        .cloned()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    TrainEqual,
    TestDensity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub seed: u64,
    pub target_n: usize,
    pub mode: SampleMode,
    pub cap_factor: Option<f64>,
    /// Opinion count -> number of instances available.
    pub available: BTreeMap<usize, usize>,
    /// Opinion count -> number of instances drawn.
    pub strata: BTreeMap<usize, usize>,
}

impl SamplePlan {
    pub fn total(&self) -> usize {
        self.strata.values().sum()
    }
}

#[derive(Debug, Clone)]
pub struct Sample<T> {
    pub items: Vec<T>,
    pub plan: SamplePlan,
    pub warnings: Vec<String>,
}

/// Distributes `target` units over strata proportionally to `weights`, never
/// exceeding `limits`. Units a stratum cannot take are re-offered to the
/// others until the target is met or every stratum is full. Rounding uses
/// largest remainders with ties going to the lower stratum index.
fn allocate(target: usize, weights: &[u64], limits: &[usize]) -> Vec<usize> {
    let mut quotas = vec![0usize; weights.len()];
    loop {
        let assigned: usize = quotas.iter().sum();
        let remaining = target.saturating_sub(assigned) as u128;
        let active: Vec<usize> = (0..weights.len())
            .filter(|&s| quotas[s] < limits[s] && weights[s] > 0)
            .collect();
        if remaining == 0 || active.is_empty() {
            return quotas;
        }
        let total_w: u128 = active.iter().map(|&s| weights[s] as u128).sum();
        let mut shares: Vec<(usize, u128, u128)> = active
            .iter()
            .map(|&s| {
                let num = remaining * weights[s] as u128;
                (s, num / total_w, num % total_w)
            })
            .collect();
        let floor_sum: u128 = shares.iter().map(|s| s.1).sum();
        let mut leftover = remaining - floor_sum;
        let mut order: Vec<usize> = (0..shares.len()).collect();
        order.sort_by(|&a, &b| shares[b].2.cmp(&shares[a].2).then(shares[a].0.cmp(&shares[b].0)));
        for k in order {
            if leftover == 0 {
                break;
            }
            shares[k].1 += 1;
            leftover -= 1;
        }
        for (s, share, _) in shares {
            quotas[s] = (quotas[s] + share as usize).min(limits[s]);
        }
    }
}

fn draw<T: OpinionCount + Clone>(
    instances: &[T],
    quotas: &BTreeMap<usize, usize>,
    seed: u64,
) -> Vec<T> {
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, inst) in instances.iter().enumerate() {
        members.entry(inst.opinion_count()).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::new();
    for (count, idx) in &members {
        let quota = quotas.get(count).copied().unwrap_or(0);
        chosen.extend(index::sample(&mut rng, idx.len(), quota).into_iter().map(|k| idx[k]));
    }
    chosen.sort_unstable();
    chosen.into_iter().map(|i| instances[i].clone()).collect()
}

fn strata_sizes<T: OpinionCount>(instances: &[T]) -> BTreeMap<usize, usize> {
    let mut sizes = BTreeMap::new();
    for inst in instances {
        *sizes.entry(inst.opinion_count()).or_insert(0) += 1;
    }
    sizes
}

fn plan_and_draw<T: OpinionCount + Clone>(
    instances: &[T],
    target_n: usize,
    seed: u64,
    mode: SampleMode,
    cap_factor: Option<f64>,
) -> Sample<T> {
    let available = strata_sizes(instances);
    let keys: Vec<usize> = available.keys().copied().collect();
    let sizes: Vec<usize> = available.values().copied().collect();
    let mut warnings = Vec::new();
    if target_n > instances.len() {
        warnings.push(format!(
            "requested {target_n} instances but only {} are available; returning all",
            instances.len()
        ));
    }
    let quotas = match mode {
        SampleMode::TrainEqual => allocate(target_n, &vec![1; sizes.len()], &sizes),
        SampleMode::TestDensity => {
            let factor = cap_factor.unwrap_or(2.0);
            let cap = if keys.is_empty() {
                0
            } else {
                (factor * target_n as f64 / keys.len() as f64 + 1e-9).floor() as usize
            };
            let limits: Vec<usize> = sizes.iter().map(|&s| s.min(cap)).collect();
            let weights: Vec<u64> = sizes.iter().map(|&s| s as u64).collect();
            allocate(target_n, &weights, &limits)
        }
    };
    let drawn: usize = quotas.iter().sum();
    if drawn < target_n && target_n <= instances.len() {
        warnings.push(format!(
            "stratum caps allow only {drawn} of the requested {target_n} instances"
        ));
    }
    let strata: BTreeMap<usize, usize> = keys.iter().copied().zip(quotas).collect();
    let items = draw(instances, &strata, seed);
    Sample {
        items,
        plan: SamplePlan {
            seed,
            target_n,
            mode,
            cap_factor: match mode {
                SampleMode::TrainEqual => None,
                SampleMode::TestDensity => Some(cap_factor.unwrap_or(2.0)),
            },
            available,
            strata,
        },
        warnings,
    }
}

/// Stratified sample with equal quotas per opinion count. Instances are
/// expected to be outlier-filtered already.
pub fn sample_train<T: OpinionCount + Clone>(instances: &[T], target_n: usize, seed: u64) -> Sample<T> {
    plan_and_draw(instances, target_n, seed, SampleMode::TrainEqual, None)
}

/// Stratified sample with quotas proportional to stratum frequency, each
/// capped at `cap_factor * target_n / strata`.
pub fn sample_test<T: OpinionCount + Clone>(
    instances: &[T],
    target_n: usize,
    seed: u64,
    cap_factor: f64,
) -> Sample<T> {
    plan_and_draw(instances, target_n, seed, SampleMode::TestDensity, Some(cap_factor))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(sizes: &[(usize, usize)]) -> Vec<usize> {
        sizes
            .iter()
            .flat_map(|&(count, n)| std::iter::repeat_n(count, n))
            .collect()
    }

    #[test]
    fn quartiles_by_hand() {
        // sorted [1,1,1,2,2,2,3,3]: Q1 at h=1.75 -> 1, Q3 at h=5.25 -> 2 + 0.25 * 1
        let p = profile_counts(&[1, 1, 1, 2, 2, 2, 3, 3]).unwrap();
        assert_eq!((p.q1, p.q3, p.iqr, p.upper_bound), (1.0, 2.25, 1.25, 4.125));
        let p = profile_counts(&[2, 2, 2, 2]).unwrap();
        assert_eq!((p.iqr, p.upper_bound), (0.0, 2.0));
        assert_eq!(profile_counts(&[]), Err(SamplerError::Empty));
    }

    #[test]
    fn combined_bound_is_max() {
        assert_eq!(combined_upper_bound(&[2.5, 4.0, 4.0]), Some(4.0));
        assert_eq!(combined_upper_bound(&[]), None);
    }

    #[test]
    fn outlier_exclusion() {
        assert_eq!(exclude_outliers(&[0, 1, 2, 3, 4, 5, 10], 4.0), vec![1, 2, 3, 4]);
        assert_eq!(exclude_outliers(&[1, 2, 3, 4], 2.5), vec![1, 2]);
        assert_eq!(exclude_outliers(&[1, 2, 2, 1], 4.0), vec![1, 2, 2, 1]);
    }

    #[test]
    fn equal_quotas() {
        let c = corpus(&[(1, 100), (2, 60), (3, 50), (4, 40)]);
        let s = sample_train(&c, 152, 7);
        assert_eq!(s.plan.strata.values().copied().collect::<Vec<_>>(), vec![38, 38, 38, 38]);
        assert_eq!(s.items.len(), 152);
        let c = corpus(&[(1, 10), (2, 12), (3, 40)]);
        let s = sample_train(&c, 30, 7);
        assert_eq!(s.plan.strata.values().copied().collect::<Vec<_>>(), vec![10, 10, 10]);
    }

    #[test]
    fn remainder_goes_to_low_counts_and_deficit_is_redistributed() {
        let c = corpus(&[(1, 50), (2, 50), (3, 50)]);
        let s = sample_train(&c, 11, 1);
        assert_eq!(s.plan.strata.values().copied().collect::<Vec<_>>(), vec![4, 4, 3]);
        let c = corpus(&[(1, 50), (2, 50), (3, 2)]);
        let s = sample_train(&c, 30, 1);
        assert_eq!(s.plan.strata.values().copied().collect::<Vec<_>>(), vec![14, 14, 2]);
    }

    #[test]
    fn oversized_target_returns_everything() {
        let c = corpus(&[(1, 3), (2, 2)]);
        let s = sample_train(&c, 10, 1);
        assert_eq!(s.items.len(), 5);
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn test_mode_caps_dominant_stratum() {
        let c = corpus(&[(1, 900), (2, 40), (3, 30), (4, 30)]);
        let s = sample_test(&c, 100, 3, 2.0);
        let q = &s.plan.strata;
        assert_eq!(s.items.len(), 100);
        assert!(q[&1] <= 50);
        assert_eq!(q.values().sum::<usize>(), 100);
        // uniform strata behave proportionally
        let c = corpus(&[(1, 20), (2, 20), (3, 20)]);
        let s = sample_test(&c, 30, 3, 2.0);
        assert_eq!(s.plan.strata.values().copied().collect::<Vec<_>>(), vec![10, 10, 10]);
    }

    impl OpinionCount for (usize, usize) {
        fn opinion_count(&self) -> usize {
            self.1
        }
    }

    #[test]
    fn seeded_draws() {
        let c: Vec<usize> = (0..200).map(|i| i % 4 + 1).collect();
        let tagged: Vec<(usize, usize)> = c.iter().copied().enumerate().collect();
        let a = sample_train(&tagged, 40, 11).items;
        let b = sample_train(&tagged, 40, 11).items;
        let d = sample_train(&tagged, 40, 12).items;
        assert_eq!(a, b);
        assert_ne!(a, d);
    }
}
