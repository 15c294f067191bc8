//! Lloyd k-means with an outer merge loop.
//!
//! Each round runs Lloyd iterations to an assignment fixpoint, then merges
//! the closest pair of centers if they lie within the merge threshold. Rounds
//! repeat until a round ends without a merge.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::segmentation::features::{Feature, FeatureField, FEATURE_DIMS};

/// Upper bound on Lloyd iterations per round.
pub const MAX_LLOYD_ITERATIONS: usize = 300;

/// Fraction of the feature-space diameter used as the default merge threshold.
pub const DEFAULT_MERGE_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    width: u32,
    height: u32,
    centers: Vec<Feature>,
    labels: Vec<u32>,
    objective_history: Vec<Vec<f64>>,
}

impl ClusterModel {
    /// Number of surviving clusters.
    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn centers(&self) -> &[Feature] {
        &self.centers
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, x: u32, y: u32) -> u32 {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    /// Within-cluster sums of squares after every assignment step, one
    /// vector per merge round.
    pub fn objective_history(&self) -> &[Vec<f64>] {
        &self.objective_history
    }

    /// Within-cluster sum of squared distances for the final model.
    pub fn objective(&self, features: &FeatureField) -> f64 {
        objective(features.features(), &self.labels, &self.centers)
    }
}

/// 10 % of the bounding diameter of the feature cloud.
pub fn default_merge_threshold(features: &FeatureField) -> f64 {
    DEFAULT_MERGE_FRACTION * features.bounding_diameter()
}

#[inline]
fn dist2(a: &Feature, b: &Feature) -> f64 {
    let mut s = 0.0;
    for c in 0..FEATURE_DIMS {
        let d = a[c] - b[c];
        s += d * d;
    }
    s
}

fn objective(points: &[Feature], labels: &[u32], centers: &[Feature]) -> f64 {
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| dist2(p, &centers[l as usize]))
        .sum()
}

/// Nearest center per point; ties go to the lower index.
fn assign(points: &[Feature], centers: &[Feature]) -> Vec<u32> {
    points
        .iter()
        .map(|p| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (i, c) in centers.iter().enumerate() {
                let d = dist2(p, c);
                if d < best_d {
                    best_d = d;
                    best = i;
                }
            }
            best as u32
        })
        .collect()
}

/// D²-weighted seeding. Stops early when every point coincides with a chosen
/// center, so duplicated data yields fewer initial centers.
fn seed_centers(points: &[Feature], k: usize, rng: &mut ChaCha8Rng) -> Vec<Feature> {
    let mut centers = vec![points[rng.random_range(0..points.len())]];
    let mut nearest: Vec<f64> = points.iter().map(|p| dist2(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = nearest.iter().sum();
        if total <= 0.0 {
            break;
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (i, &d) in nearest.iter().enumerate() {
            if d <= 0.0 {
                continue;
            }
            acc += d;
            pick = Some(i);
            if acc > target {
                break;
            }
        }
        let chosen = points[pick.expect("total > 0 implies a positive weight")];
        for (n, p) in nearest.iter_mut().zip(points) {
            *n = n.min(dist2(p, &chosen));
        }
        centers.push(chosen);
    }
    centers
}

/// Means of the members of each cluster; `None` for empty clusters.
fn means(points: &[Feature], labels: &[u32], k: usize) -> Vec<Option<Feature>> {
    let mut sums = vec![[0.0; FEATURE_DIMS]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        let s = &mut sums[l as usize];
        for c in 0..FEATURE_DIMS {
            s[c] += p[c];
        }
        counts[l as usize] += 1;
    }
    sums.into_iter()
        .zip(counts)
        .map(|(mut s, n)| {
            (n > 0).then(|| {
                for v in &mut s {
                    *v /= n as f64;
                }
                s
            })
        })
        .collect()
}

/// Lloyd iterations from `centers` to an assignment fixpoint.
///
/// Returns final centers, labels and the objective after each assignment.
fn lloyd(points: &[Feature], mut centers: Vec<Feature>) -> (Vec<Feature>, Vec<u32>, Vec<f64>) {
    let mut labels = assign(points, &centers);
    let mut trace = vec![objective(points, &labels, &centers)];
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let updated = means(points, &labels, centers.len());
        let mut reseeded = Vec::new();
        let mut next = Vec::with_capacity(centers.len());
        for m in &updated {
            match m {
                Some(c) => next.push(*c),
                None => {
                    // Empty cluster: move it onto the point farthest from its
                    // own center, or drop it when every point sits on one.
                    let far = points
                        .iter()
                        .zip(&labels)
                        .enumerate()
                        .filter(|(j, _)| !reseeded.contains(j))
                        .map(|(j, (p, &l))| (j, dist2(p, &centers[l as usize])))
                        .fold(None, |best: Option<(usize, f64)>, (j, d)| match best {
                            Some((_, bd)) if bd >= d => best,
                            _ => Some((j, d)),
                        });
                    if let Some((j, _)) = far.filter(|&(_, d)| d > 0.0) {
                        reseeded.push(j);
                        next.push(points[j]);
                    }
                }
            }
        }
        let changed_k = next.len() != centers.len() || !reseeded.is_empty();
        centers = next;
        let new_labels = assign(points, &centers);
        let obj = objective(points, &new_labels, &centers);
        debug_assert!(
            obj <= trace[trace.len() - 1] * (1.0 + 1e-12) + 1e-9,
            "k-means objective increased: {} -> {obj}",
            trace[trace.len() - 1]
        );
        trace.push(obj);
        let converged = !changed_k && new_labels == labels;
        labels = new_labels;
        if converged {
            break;
        }
    }
    (centers, labels, trace)
}

/// Clusters `features` into at most `k` groups.
///
/// Deterministic for a fixed `seed`. Centers closer than `merge_threshold`
/// (Euclidean, in weighted feature space) are merged and Lloyd is rerun,
/// until no pair qualifies. The returned model has no empty clusters and
/// every center is the mean of its members.
pub fn kmeans(
    features: &FeatureField,
    k: usize,
    seed: u64,
    merge_threshold: f64,
) -> Result<ClusterModel> {
    let points = features.features();
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > points.len() {
        return Err(Error::TooManyClusters {
            k,
            pixels: points.len(),
        });
    }
    if !(merge_threshold.is_finite() && merge_threshold >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "merge threshold must be finite and non-negative, got {merge_threshold}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = seed_centers(points, k, &mut rng);
    let mut history = Vec::new();
    let threshold2 = merge_threshold * merge_threshold;
    loop {
        let (c, labels, trace) = lloyd(points, centers);
        history.push(trace);

        let mut closest: Option<(usize, usize, f64)> = None;
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                let d = dist2(&c[i], &c[j]);
                if d <= threshold2 && closest.is_none_or(|(_, _, bd)| d < bd) {
                    closest = Some((i, j, d));
                }
            }
        }
        let Some((i, j, _)) = closest else {
            return Ok(ClusterModel {
                width: features.width(),
                height: features.height(),
                centers: c,
                labels,
                objective_history: history,
            });
        };

        let (ni, nj) = labels.iter().fold((0usize, 0usize), |(a, b), &l| {
            (a + usize::from(l as usize == i), b + usize::from(l as usize == j))
        });
        let mut merged = [0.0; FEATURE_DIMS];
        for d in 0..FEATURE_DIMS {
            merged[d] = (c[i][d] * ni as f64 + c[j][d] * nj as f64) / (ni + nj) as f64;
        }
        centers = c;
        centers[i] = merged;
        centers.remove(j);
    }
}
