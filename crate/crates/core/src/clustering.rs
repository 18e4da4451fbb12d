//! Representative days from an hourly history.
//!
//! Each calendar day becomes one feature vector (every signal × every hour,
//! each signal standardized over the whole history). Days are grouped with
//! K-means; every cluster is represented by its medoid, the member day closest
//! to the centroid, so the returned profiles are real days rather than
//! averages. Weights scale cluster sizes to a 365-day year.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::case::{days_from_table, fix_weight_sum, CaseError, HourlyTable, PlanningCase, DAYS_PER_YEAR};

pub type HourlySeries = HourlyTable;

const MAX_RESTARTS: u64 = 10;
const MAX_ITERATIONS: usize = 500;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("K must be at least 1")]
    ZeroClusters,
    #[error("K = {k} exceeds the number of days ({days})")]
    TooManyClusters { k: usize, days: usize },
    #[error("hourly series is empty")]
    EmptySeries,
    #[error("hourly series has a negative or non-finite value")]
    InvalidValue,
    #[error("an empty cluster persisted after {0} restarts")]
    EmptyCluster(u64),
}

/// One representative day.
#[derive(Clone, Debug, PartialEq)]
pub struct RepresentativeProfile {
    pub weight: f64,
    /// Index of the medoid day in the input series.
    pub source_day: usize,
    /// `[signal][hour]`, copied from the medoid day.
    pub values: Vec<Vec<f64>>,
    pub members: Vec<usize>,
}

fn features(series: &HourlySeries) -> Vec<Vec<f64>> {
    let nsig = series.columns.len();
    let mut stats = vec![(0.0, 0.0); nsig];
    for (s, stat) in stats.iter_mut().enumerate() {
        let vals: Vec<f64> = series.days.iter().flat_map(|d| d[s].iter().copied()).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        *stat = (mean, var.sqrt());
    }
    series
        .days
        .iter()
        .map(|d| {
            d.iter()
                .zip(&stats)
                .flat_map(|(sig, &(mean, sd))| sig.iter().map(move |v| if sd > 0.0 { (v - mean) / sd } else { 0.0 }))
                .collect()
        })
        .collect()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn kmeans_pp(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = points.len();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &points[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().enumerate().filter(|(i, _)| !chosen.contains(i)).map(|(_, d)| d).sum();
        let next = if total > 0.0 {
            let mut r = rng.gen::<f64>() * total;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                if chosen.contains(&i) || d == 0.0 {
                    continue;
                }
                pick = Some(i);
                if r < d {
                    break;
                }
                r -= d;
            }
            pick.expect("positive mass")
        } else {
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.gen_range(0..free.len())]
        };
        chosen.push(next);
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(dist2(p, &points[next]));
        }
    }
    chosen
}

/// Lloyd iterations from the given seeds; returns assignments or `None` on an empty cluster.
fn lloyd(points: &[Vec<f64>], seeds: &[usize]) -> Option<(Vec<usize>, Vec<Vec<f64>>)> {
    let k = seeds.len();
    let dim = points[0].len();
    let mut centroids: Vec<Vec<f64>> = seeds.iter().map(|&i| points[i].clone()).collect();
    let nearest = |p: &[f64], cs: &[Vec<f64>]| {
        let mut best = (0, f64::INFINITY);
        for (c, cent) in cs.iter().enumerate() {
            let d = dist2(p, cent);
            if d < best.1 {
                best = (c, d);
            }
        }
        best
    };
    let mut assign: Vec<usize> = points.iter().map(|p| nearest(p, &centroids).0).collect();
    for (c, &s) in seeds.iter().enumerate() {
        assign[s] = c;
    }
    for _ in 0..MAX_ITERATIONS {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assign) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        if counts.contains(&0) {
            return None;
        }
        for ((cent, sum), &cnt) in centroids.iter_mut().zip(sums).zip(&counts) {
            *cent = sum.into_iter().map(|s| s / cnt as f64).collect();
        }
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let (c, d) = nearest(p, &centroids);
            // Move only when strictly closer, so duplicate days keep their cluster.
            if c != assign[i] && d < dist2(p, &centroids[assign[i]]) - 1e-12 {
                assign[i] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut counts = vec![0usize; k];
    for &a in &assign {
        counts[a] += 1;
    }
    if counts.contains(&0) {
        return None;
    }
    Some((assign, centroids))
}

fn check_series(series: &HourlySeries) -> Result<(), ClusterError> {
    if series.days.is_empty() || series.columns.is_empty() {
        return Err(ClusterError::EmptySeries);
    }
    if series.days.iter().flatten().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(ClusterError::InvalidValue);
    }
    Ok(())
}

pub fn build_representative_days(series: &HourlySeries, k: usize, seed: u64) -> Result<Vec<RepresentativeProfile>, ClusterError> {
    if k == 0 {
        return Err(ClusterError::ZeroClusters);
    }
    check_series(series)?;
    let n = series.days.len();
    if k > n {
        return Err(ClusterError::TooManyClusters { k, days: n });
    }
    let points = features(series);
    for attempt in 0..=MAX_RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let seeds = kmeans_pp(&points, k, &mut rng);
        let Some((assign, centroids)) = lloyd(&points, &seeds) else {
            log::debug!("empty cluster on attempt {attempt}, restarting");
            continue;
        };
        let mut reps: Vec<RepresentativeProfile> = (0..k)
            .map(|c| {
                let members: Vec<usize> = (0..n).filter(|&i| assign[i] == c).collect();
                let medoid = *members
                    .iter()
                    .min_by(|&&a, &&b| dist2(&points[a], &centroids[c]).total_cmp(&dist2(&points[b], &centroids[c])))
                    .expect("non-empty cluster");
                RepresentativeProfile {
                    weight: members.len() as f64 * DAYS_PER_YEAR / n as f64,
                    source_day: medoid,
                    values: series.days[medoid].clone(),
                    members,
                }
            })
            .collect();
        reps.sort_by_key(|r| r.source_day);
        let total: f64 = reps.iter().map(|r| r.weight).sum();
        if let Some(last) = reps.last_mut() {
            last.weight += DAYS_PER_YEAR - total;
        }
        return Ok(reps);
    }
    Err(ClusterError::EmptyCluster(MAX_RESTARTS))
}

/// Representatives as an hourly table (one day per representative) plus weights.
pub fn representatives_table(series: &HourlySeries, reps: &[RepresentativeProfile]) -> (HourlyTable, Vec<f64>) {
    let table = HourlyTable {
        columns: series.columns.clone(),
        day_labels: (1..=reps.len()).map(|i| i.to_string()).collect(),
        days: reps.iter().map(|r| r.values.clone()).collect(),
    };
    (table, reps.iter().map(|r| r.weight).collect())
}

/// Replaces the case's representative days; series columns must carry the case's profile names.
pub fn apply_to_case(case: &PlanningCase, series: &HourlySeries, reps: &[RepresentativeProfile]) -> Result<PlanningCase, CaseError> {
    let (table, weights) = representatives_table(series, reps);
    let mut out = case.clone();
    out.representative_days = days_from_table(case, &table, &weights)?;
    fix_weight_sum(&mut out.representative_days);
    out.validate()?;
    Ok(out)
}

/// `[representative_days]` section in case-file syntax, with inline profiles.
pub fn representative_days_toml(series: &HourlySeries, reps: &[RepresentativeProfile], wind_columns: &[String]) -> String {
    let mut out = String::from("[representative_days]\n");
    for r in reps {
        out.push_str("\n[[representative_days.days]]\n");
        out.push_str(&format!("weight = {:?}\n", r.weight));
        for (table, pick_wind) in [("demand_factor", false), ("wind_cf", true)] {
            let entries: Vec<String> = series
                .columns
                .iter()
                .zip(&r.values)
                .filter(|(c, _)| wind_columns.contains(c) == pick_wind)
                .map(|(c, v)| format!("{c} = {v:?}"))
                .collect();
            if !entries.is_empty() {
                out.push_str(&format!("{table} = {{ {} }}\n", entries.join(", ")));
            }
        }
    }
    out
}

/// One row of a stability sweep.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub k: usize,
    pub outcome: Result<crate::ccg::RobustSolution, String>,
}

/// One robust solve per K, each with representatives clustered from `series`.
pub fn stability_sweep(
    template: &PlanningCase,
    series: &HourlySeries,
    ks: &[usize],
    seed: u64,
    config: &crate::ccg::CcgConfig,
) -> Vec<SweepPoint> {
    ks.iter()
        .map(|&k| {
            let outcome = build_representative_days(series, k, seed)
                .map_err(|e| e.to_string())
                .and_then(|reps| apply_to_case(template, series, &reps).map_err(|e| e.to_string()))
                .and_then(|case| crate::ccg::solve_robust_tnep(&case, config).map_err(|e| e.to_string()));
            SweepPoint { k, outcome }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(days: Vec<Vec<Vec<f64>>>) -> HourlySeries {
        HourlyTable {
            columns: (0..days[0].len()).map(|i| format!("s{i}")).collect(),
            day_labels: (1..=days.len()).map(|i| i.to_string()).collect(),
            days,
        }
    }

    #[test]
    fn single_cluster_is_medoid_with_full_weight() {
        let days = (0..7).map(|i| vec![vec![i as f64; 3]]).collect();
        let s = table(days);
        let reps = build_representative_days(&s, 1, 3).unwrap();
        assert_eq!(reps.len(), 1);
        assert_eq!(reps[0].weight, 365.0);
        assert_eq!(reps[0].source_day, 3);
        assert_eq!(reps[0].values, s.days[3]);
    }

    #[test]
    fn identical_days_any_k() {
        let s = table(vec![vec![vec![0.4, 0.6], vec![0.2, 0.1]]; 6]);
        for k in 1..=6 {
            let reps = build_representative_days(&s, k, 11).unwrap();
            assert_eq!(reps.len(), k);
            assert!((reps.iter().map(|r| r.weight).sum::<f64>() - 365.0).abs() < 1e-9);
            assert!(reps.iter().all(|r| r.values == s.days[0]));
        }
    }

    #[test]
    fn errors() {
        let s = table(vec![vec![vec![1.0]]; 3]);
        assert!(matches!(build_representative_days(&s, 0, 0), Err(ClusterError::ZeroClusters)));
        assert!(matches!(build_representative_days(&s, 4, 0), Err(ClusterError::TooManyClusters { .. })));
        let neg = table(vec![vec![vec![-1.0]]; 3]);
        assert!(matches!(build_representative_days(&neg, 1, 0), Err(ClusterError::InvalidValue)));
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let days: Vec<_> = (0..40).map(|i| vec![vec![((i * 37) % 11) as f64, ((i * 13) % 7) as f64], vec![(i % 5) as f64; 2]]).collect();
        let s = table(days);
        let a = build_representative_days(&s, 4, 99).unwrap();
        let b = build_representative_days(&s, 4, 99).unwrap();
        assert_eq!(a, b);
    }

    proptest::proptest! {
        #[test]
        fn weights_and_medoids(vals in proptest::collection::vec(0.0f64..10.0, 24..96), k in 1usize..6) {
            let days: Vec<Vec<Vec<f64>>> = vals.chunks_exact(4).map(|c| vec![c[..2].to_vec(), c[2..].to_vec()]).collect();
            proptest::prop_assume!(k <= days.len());
            let s = table(days);
            let reps = build_representative_days(&s, k, 5).unwrap();
            let total: f64 = reps.iter().map(|r| r.weight).sum();
            proptest::prop_assert!((total - 365.0).abs() <= 1e-6);
            for r in &reps {
                proptest::prop_assert!(r.weight > 0.0);
                proptest::prop_assert_eq!(&r.values, &s.days[r.source_day]);
                proptest::prop_assert!(r.members.contains(&r.source_day));
            }
        }
    }
}
