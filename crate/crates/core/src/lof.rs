//! Local Outlier Factor over standardized 3-feature channel vectors.
//!
//! Built directly from the classical definitions:
//!
//! - k-distance(p): Euclidean distance to the k-th nearest other point;
//! - N_k(p): every other point within k-distance(p), tie-inclusive, so
//!   |N_k(p)| ≥ k;
//! - reach-dist_k(p, o) = max(k-distance(o), d(p, o));
//! - lrd_k(p) = 1 / mean reach-dist over N_k(p), capped at [`LRD_CAP`]
//!   when the mean is zero (co-located duplicates);
//! - LOF_k(p) = mean over o ∈ N_k(p) of lrd_k(o) / lrd_k(p).
//!
//! Flagging takes the top ⌈contamination·n⌉ scores, with ties broken by
//! ascending channel label so runs are bit-reproducible. The neighborhood
//! size adapts per patient as min(n_neighbors, n−1). Neighbor search is
//! brute-force O(n²); patients have at most a few hundred channels.

use crate::channelid::ChannelId;
use crate::error::{Error, Result};
use crate::features::N_FEATURES;
use crate::scalar::Scalar;

/// Local reachability density cap used when all reachability distances are
/// zero (a cluster of exact duplicates).
pub const LRD_CAP: f64 = 1e10;

/// LOF operating point; defaults are n_neighbors = 20, contamination = 0.2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LofConfig<F> {
    pub n_neighbors: usize,
    /// Fraction of channels flagged as outliers, in (0, 0.5].
    pub contamination: F,
}

impl<F: Scalar> Default for LofConfig<F> {
    fn default() -> Self {
        LofConfig {
            n_neighbors: 20,
            contamination: F::from_f64(0.2).expect("0.2 representable"),
        }
    }
}

impl<F: Scalar> LofConfig<F> {
    /// Validated constructor: `n_neighbors ≥ 1`, `contamination ∈ (0, 0.5]`.
    pub fn new(n_neighbors: usize, contamination: F) -> Result<Self> {
        if n_neighbors == 0 {
            return Err(Error::InvalidConfig("n_neighbors must be at least 1".into()));
        }
        let half = F::from_f64(0.5).expect("0.5 representable");
        if !(contamination > F::zero() && contamination <= half) {
            return Err(Error::InvalidConfig(format!(
                "contamination must lie in (0, 0.5], got {contamination}"
            )));
        }
        Ok(LofConfig {
            n_neighbors,
            contamination,
        })
    }
}

/// k-distance and tie-inclusive neighbor set of one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood<F> {
    pub k_distance: F,
    /// Indices of all other points at distance ≤ k_distance.
    pub neighbors: Vec<usize>,
}

/// Per-channel LOF scores with optional flags.
#[derive(Debug, Clone, PartialEq)]
pub struct LofResult<F> {
    pub channels: Vec<ChannelId>,
    pub scores: Vec<F>,
    /// Neighborhood size actually used: min(n_neighbors, n − 1).
    pub effective_k: usize,
    /// Score of the weakest flagged channel; `None` until flags are set.
    pub threshold_tau: Option<F>,
    pub flagged: Vec<bool>,
}

impl<F: Scalar> LofResult<F> {
    /// Channels currently flagged as outliers.
    pub fn outlier_channels(&self) -> Vec<ChannelId> {
        self.channels
            .iter()
            .zip(&self.flagged)
            .filter(|(_, &f)| f)
            .map(|(c, _)| c.clone())
            .collect()
    }
}

fn euclidean<F: Scalar>(a: &[F; N_FEATURES], b: &[F; N_FEATURES]) -> F {
    let mut sum = F::zero();
    for i in 0..N_FEATURES {
        let d = a[i] - b[i];
        sum = sum + d * d;
    }
    sum.sqrt()
}

fn distance_matrix<F: Scalar>(points: &[[F; N_FEATURES]]) -> Vec<Vec<F>> {
    let n = points.len();
    let mut dist = vec![vec![F::zero(); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean(&points[i], &points[j]);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    dist
}

fn neighborhoods_from<F: Scalar>(dist: &[Vec<F>], k: usize) -> Vec<Neighborhood<F>> {
    let n = dist.len();
    let mut result = Vec::with_capacity(n);
    for i in 0..n {
        let mut by_distance: Vec<(F, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (dist[i][j], j))
            .collect();
        by_distance.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .expect("finite distances")
                .then(a.1.cmp(&b.1))
        });
        let k_distance = by_distance[k - 1].0;
        let neighbors = by_distance
            .iter()
            .take_while(|(d, _)| *d <= k_distance)
            .map(|&(_, j)| j)
            .collect();
        result.push(Neighborhood {
            k_distance,
            neighbors,
        });
    }
    result
}

/// k-distance and tie-inclusive neighbor set for every point.
///
/// Requires `n ≥ 2` and `1 ≤ k ≤ n − 1`.
pub fn knn_neighborhoods<F: Scalar>(
    points: &[[F; N_FEATURES]],
    k: usize,
) -> Result<Vec<Neighborhood<F>>> {
    let n = points.len();
    if n < 2 {
        return Err(Error::InsufficientPoints(n));
    }
    if k == 0 || k > n - 1 {
        return Err(Error::InvalidNeighborCount { k, n });
    }
    Ok(neighborhoods_from(&distance_matrix(points), k))
}

/// Compute LOF scores for every channel; flags are left unset.
///
/// `channels` and `points` must be parallel. The effective neighborhood size
/// is min(config.n_neighbors, n − 1).
pub fn lof_scores<F: Scalar>(
    channels: &[ChannelId],
    points: &[[F; N_FEATURES]],
    config: &LofConfig<F>,
) -> Result<LofResult<F>> {
    let n = points.len();
    assert_eq!(channels.len(), n, "one channel per point");
    if n < 2 {
        return Err(Error::InsufficientPoints(n));
    }
    let effective_k = config.n_neighbors.min(n - 1);
    let dist = distance_matrix(points);
    let neighborhoods = neighborhoods_from(&dist, effective_k);

    let cap = F::from_f64(LRD_CAP).expect("cap representable");
    let lrd: Vec<F> = (0..n)
        .map(|i| {
            let hood = &neighborhoods[i];
            let mut sum = F::zero();
            for &o in &hood.neighbors {
                let reach = neighborhoods[o].k_distance.max(dist[i][o]);
                sum = sum + reach;
            }
            let mean = sum / F::from_count(hood.neighbors.len());
            if mean == F::zero() {
                cap
            } else {
                F::one() / mean
            }
        })
        .collect();

    let scores: Vec<F> = (0..n)
        .map(|i| {
            let hood = &neighborhoods[i];
            let mut sum = F::zero();
            for &o in &hood.neighbors {
                sum = sum + lrd[o];
            }
            sum / F::from_count(hood.neighbors.len()) / lrd[i]
        })
        .collect();

    Ok(LofResult {
        channels: channels.to_vec(),
        scores,
        effective_k,
        threshold_tau: None,
        flagged: vec![false; n],
    })
}

/// Number of channels flagged at a contamination level: ⌈c·n⌉ for n ≥ 2.
pub fn flag_count<F: Scalar>(contamination: F, n: usize) -> usize {
    if n < 2 {
        return 0;
    }
    let m = (contamination * F::from_count(n)).ceil();
    m.to_usize().unwrap_or(0).min(n)
}

/// Flag the top ⌈contamination·n⌉ scores as outliers.
///
/// Ranking is by descending score with ties broken by ascending channel
/// label; `threshold_tau` becomes the score of the weakest flagged channel.
pub fn flag_outliers<F: Scalar>(mut result: LofResult<F>, contamination: F) -> LofResult<F> {
    let n = result.scores.len();
    let m = flag_count(contamination, n);
    result.flagged = vec![false; n];
    result.threshold_tau = None;
    if m == 0 {
        return result;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        result.scores[b]
            .partial_cmp(&result.scores[a])
            .expect("finite LOF scores")
            .then_with(|| result.channels[a].raw().cmp(result.channels[b].raw()))
    });
    for &i in order.iter().take(m) {
        result.flagged[i] = true;
    }
    result.threshold_tau = Some(result.scores[order[m - 1]]);
    result
}

/// Score and flag in one step.
pub fn detect<F: Scalar>(
    channels: &[ChannelId],
    points: &[[F; N_FEATURES]],
    config: &LofConfig<F>,
) -> Result<LofResult<F>> {
    let scored = lof_scores(channels, points, config)?;
    Ok(flag_outliers(scored, config.contamination))
}
