use serde::{Deserialize, Serialize};

use crate::geometry::{KdTree, PointCloud, Vec3};

/// Statistical filter on the mean distance to each point's `k` nearest neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierConfig {
    /// Cut at `mean + std_ratio * stddev` of the statistic.
    pub std_ratio: f64,
    /// A point is only dropped when its statistic also exceeds this multiple
    /// of the median statistic. Keeps the sparser rim of a clean sampling.
    pub median_ratio: f64,
    /// Upper bound on the dropped fraction.
    pub max_fraction: f64,
}

impl Default for OutlierConfig {
    fn default() -> Self {
        Self {
            std_ratio: 2.0,
            median_ratio: 2.0,
            max_fraction: 0.2,
        }
    }
}

/// Neighbour count for an image of the given resolution.
pub fn adaptive_k(width: usize, height: usize) -> usize {
    let k = ((width * height) as f64).sqrt() / 40.0;
    (k.round() as usize).clamp(8, 64)
}

/// Mean distance from each point to its `k` nearest other points.
pub(crate) fn mean_knn_distance(points: &[Vec3], k: usize) -> Vec<f64> {
    let tree = KdTree::new(points);
    let k = k.min(points.len().saturating_sub(1));
    if k == 0 {
        return vec![0.0; points.len()];
    }
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let found = tree.k_nearest(p, k + 1);
            let mut sum = 0.0;
            let mut taken = 0;
            for (j, d2) in found {
                if j == i || taken == k {
                    continue;
                }
                sum += d2.sqrt();
                taken += 1;
            }
            sum / k as f64
        })
        .collect()
}

/// Applies the cut rule to precomputed statistics; `true` marks an outlier.
pub(crate) fn flags_from_statistic(stat: &[f64], cfg: &OutlierConfig) -> Vec<bool> {
    let n = stat.len();
    if n == 0 {
        return Vec::new();
    }
    let mean = stat.iter().sum::<f64>() / n as f64;
    let var = stat.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n as f64;
    let mut sorted = stat.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let cut = (mean + cfg.std_ratio * var.sqrt()).max(cfg.median_ratio * median);
    let mut flagged: Vec<usize> = (0..n).filter(|&i| stat[i] > cut).collect();
    let cap = (cfg.max_fraction * n as f64).floor() as usize;
    if flagged.len() > cap {
        flagged.sort_by(|&a, &b| stat[b].total_cmp(&stat[a]).then(a.cmp(&b)));
        flagged.truncate(cap);
    }
    let mut flags = vec![false; n];
    for i in flagged {
        flags[i] = true;
    }
    flags
}

pub fn outlier_flags(points: &[Vec3], k: usize, cfg: &OutlierConfig) -> Vec<bool> {
    flags_from_statistic(&mean_knn_distance(points, k), cfg)
}

/// Drops statistical outliers, with `k` chosen from the source image resolution.
pub fn remove_outliers(pc: &PointCloud, resolution: (usize, usize)) -> PointCloud {
    let flags = outlier_flags(&pc.points, adaptive_k(resolution.0, resolution.1), &OutlierConfig::default());
    let keep: Vec<usize> = (0..pc.len()).filter(|&i| !flags[i]).collect();
    pc.select(&keep)
}
