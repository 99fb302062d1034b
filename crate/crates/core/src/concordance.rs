//! Spatial concordance between annotated SOZ channels and flagged outliers.
//!
//! Two regimes are computed per patient:
//!
//! - exact matching: full-label set intersection;
//! - index matching: weighted pairwise scoring where a SOZ/outlier pair
//!   earns 2 points for sharing both electrode number and first character,
//!   1 point for sharing the number only, and 0 otherwise.
//!
//! `m_index` is the raw sum over all pairs and can exceed the SOZ count;
//! `r_index` normalizes per-SOZ best matches into [0, 1]. Index precision
//! and recall use per-side best-match credit (pair score / 2), which reduces
//! to the exact metrics when only perfect matches exist. All ratios with a
//! zero denominator are 0.

use std::collections::{BTreeMap, BTreeSet};

use crate::channelid::ChannelId;
use crate::scalar::Scalar;

/// Per-channel overlap classification used by the grid emissions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapState {
    Both,
    SozOnly,
    OutlierOnly,
    Neither,
}

impl OverlapState {
    /// Grid encoding: 0 = Neither, 1 = OutlierOnly, 2 = SozOnly, 3 = Both.
    pub fn code(&self) -> u8 {
        match self {
            OverlapState::Neither => 0,
            OverlapState::OutlierOnly => 1,
            OverlapState::SozOnly => 2,
            OverlapState::Both => 3,
        }
    }
}

/// All concordance metrics for one patient.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcordanceReport<F> {
    pub patient_id: String,
    pub m_exact: usize,
    pub r_exact: F,
    pub m_index: usize,
    pub r_index: F,
    pub exact_precision: F,
    pub exact_recall: F,
    pub exact_f1: F,
    pub index_precision: F,
    pub index_recall: F,
    pub index_f1: F,
    pub n_soz: usize,
    pub n_outliers: usize,
}

fn ratio<F: Scalar>(num: F, den: usize) -> F {
    if den == 0 {
        F::zero()
    } else {
        num / F::from_count(den)
    }
}

fn f1<F: Scalar>(p: F, r: F) -> F {
    let sum = p + r;
    if sum > F::zero() {
        let two = F::one() + F::one();
        two * p * r / sum
    } else {
        F::zero()
    }
}

/// Exact co-occurrence: intersection cardinality and its ratio to |soz|.
pub fn exact_match<F: Scalar>(
    soz: &BTreeSet<ChannelId>,
    outliers: &BTreeSet<ChannelId>,
) -> (usize, F) {
    let m_exact = soz.intersection(outliers).count();
    (m_exact, ratio(F::from_count(m_exact), soz.len()))
}

/// Weighted pairwise score between one SOZ channel and one outlier channel.
///
/// 2 when electrode numbers are present and equal and the first characters
/// match; 1 when only the numbers match; 0 otherwise (including when either
/// number is absent).
pub fn pair_score(s: &ChannelId, o: &ChannelId) -> u8 {
    match (s.number(), o.number()) {
        (Some(a), Some(b)) if a == b => {
            if s.first_char() == o.first_char() {
                2
            } else {
                1
            }
        }
        _ => 0,
    }
}

/// Weighted index similarity: raw pairwise sum and normalized ratio.
///
/// `m_index` sums `pair_score` over the full soz × outliers product;
/// `r_index` sums each SOZ channel's best match and divides by 2·|soz|,
/// guaranteeing a value in [0, 1].
pub fn index_match<F: Scalar>(
    soz: &BTreeSet<ChannelId>,
    outliers: &BTreeSet<ChannelId>,
) -> (usize, F) {
    let mut m_index = 0usize;
    let mut best_sum = 0usize;
    for s in soz {
        let mut best = 0u8;
        for o in outliers {
            let score = pair_score(s, o);
            m_index += score as usize;
            best = best.max(score);
        }
        best_sum += best as usize;
    }
    (m_index, ratio(F::from_count(best_sum), 2 * soz.len()))
}

/// Precision, recall and F1 under exact full-label matching.
pub fn precision_recall_f1_exact<F: Scalar>(
    soz: &BTreeSet<ChannelId>,
    outliers: &BTreeSet<ChannelId>,
) -> (F, F, F) {
    let (m_exact, _) = exact_match::<F>(soz, outliers);
    let p = ratio(F::from_count(m_exact), outliers.len());
    let r = ratio(F::from_count(m_exact), soz.len());
    (p, r, f1(p, r))
}

/// Precision, recall and F1 under weighted index matching.
///
/// Each outlier earns max over SOZ of pair_score/2 ∈ {0, 0.5, 1} toward
/// precision; each SOZ channel earns max over outliers of pair_score/2
/// toward recall.
pub fn precision_recall_f1_index<F: Scalar>(
    soz: &BTreeSet<ChannelId>,
    outliers: &BTreeSet<ChannelId>,
) -> (F, F, F) {
    let two = F::one() + F::one();
    let best_half = |a: &ChannelId, pool: &BTreeSet<ChannelId>| -> F {
        let best = pool.iter().map(|b| pair_score(a, b)).max().unwrap_or(0);
        F::from_count(best as usize) / two
    };
    let mut p_sum = F::zero();
    for o in outliers {
        p_sum = p_sum + best_half(o, soz);
    }
    let mut r_sum = F::zero();
    for s in soz {
        r_sum = r_sum + best_half(s, outliers);
    }
    let p = ratio(p_sum, outliers.len());
    let r = ratio(r_sum, soz.len());
    (p, r, f1(p, r))
}

/// Full per-patient report combining both regimes.
pub fn report<F: Scalar>(
    patient_id: &str,
    soz: &BTreeSet<ChannelId>,
    outliers: &BTreeSet<ChannelId>,
) -> ConcordanceReport<F> {
    let (m_exact, r_exact) = exact_match(soz, outliers);
    let (m_index, r_index) = index_match(soz, outliers);
    let (exact_precision, exact_recall, exact_f1) = precision_recall_f1_exact(soz, outliers);
    let (index_precision, index_recall, index_f1) = precision_recall_f1_index(soz, outliers);
    ConcordanceReport {
        patient_id: patient_id.to_string(),
        m_exact,
        r_exact,
        m_index,
        r_index,
        exact_precision,
        exact_recall,
        exact_f1,
        index_precision,
        index_recall,
        index_f1,
        n_soz: soz.len(),
        n_outliers: outliers.len(),
    }
}

/// Classify every channel of the patient's label universe.
///
/// SOZ labels absent from `all_channels` (annotations covering channels with
/// no chirp data) are appended to the map as `SozOnly` and returned in the
/// warning list.
pub fn overlap_states(
    all_channels: &[ChannelId],
    soz: &BTreeSet<ChannelId>,
    outliers: &BTreeSet<ChannelId>,
) -> (BTreeMap<ChannelId, OverlapState>, Vec<ChannelId>) {
    let mut states = BTreeMap::new();
    for c in all_channels {
        let state = match (soz.contains(c), outliers.contains(c)) {
            (true, true) => OverlapState::Both,
            (true, false) => OverlapState::SozOnly,
            (false, true) => OverlapState::OutlierOnly,
            (false, false) => OverlapState::Neither,
        };
        states.insert(c.clone(), state);
    }
    let mut missing = Vec::new();
    for s in soz {
        if !states.contains_key(s) {
            states.insert(s.clone(), OverlapState::SozOnly);
            missing.push(s.clone());
        }
    }
    (states, missing)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(labels: &[&str]) -> BTreeSet<ChannelId> {
        labels.iter().map(|l| ChannelId::parse(l).unwrap()).collect()
    }

    #[test]
    fn exact_match_counts_full_label_intersection() {
        let soz = set(&["LAT1", "LAT2", "LAT6", "LAT7"]);
        let outliers = set(&["LAT7", "LAH6", "PD1"]);
        let (m, r): (usize, f64) = exact_match(&soz, &outliers);
        assert_eq!(m, 1);
        assert_eq!(r, 0.25);
    }

    #[test]
    fn empty_soz_yields_zeroes() {
        let (m, r): (usize, f64) = exact_match(&set(&[]), &set(&["LAT1"]));
        assert_eq!(m, 0);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn identical_sets_score_full() {
        let s = set(&["A1", "B2", "C3"]);
        let (m, r): (usize, f64) = exact_match(&s, &s.clone());
        assert_eq!(m, 3);
        assert_eq!(r, 1.0);
    }

    #[test]
    fn pair_score_cases() {
        let id = |l: &str| ChannelId::parse(l).unwrap();
        assert_eq!(pair_score(&id("LAT1"), &id("LAT1")), 2);
        assert_eq!(pair_score(&id("RAH2"), &id("LAH2")), 1);
        assert_eq!(pair_score(&id("LAT1"), &id("LAH2")), 0);
        // same number, same first char, different prefix bodies
        assert_eq!(pair_score(&id("LAT3"), &id("LAH3")), 2);
        // absent numbers never match
        assert_eq!(pair_score(&id("EKG"), &id("EKG")), 0);
        assert_eq!(pair_score(&id("EKG"), &id("LAT1")), 0);
    }

    #[test]
    fn index_match_hand_example() {
        let soz = set(&["LAT1", "RAH2"]);
        let outliers = set(&["LAT1", "LAH2"]);
        let (m, r): (usize, f64) = index_match(&soz, &outliers);
        // pair scores {2, 0, 0, 1}
        assert_eq!(m, 3);
        assert_eq!(r, 0.75);
    }

    #[test]
    fn five_perfect_matches_reach_ten_points() {
        let soz = set(&["LAT1", "LAT2", "LAT3", "LAT4", "LAT5"]);
        let (m, r): (usize, f64) = index_match(&soz, &soz.clone());
        assert_eq!(m, 10);
        assert_eq!(r, 1.0);
    }

    #[test]
    fn disjoint_numbers_score_zero() {
        let (m, r): (usize, f64) = index_match(&set(&["LAT1", "LAT2"]), &set(&["PD7", "PD8"]));
        assert_eq!(m, 0);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn exact_prf_direct_count() {
        let (p, r, f): (f64, f64, f64) =
            precision_recall_f1_exact(&set(&["A1", "A2"]), &set(&["A1", "B3"]));
        assert_eq!((p, r, f), (0.5, 0.5, 0.5));
    }

    #[test]
    fn exact_prf_degenerate_cases() {
        let (p, r, f): (f64, f64, f64) = precision_recall_f1_exact(&set(&["A1"]), &set(&[]));
        assert_eq!((p, r, f), (0.0, 0.0, 0.0));
        let s = set(&["A1", "B2"]);
        let (p, r, f): (f64, f64, f64) = precision_recall_f1_exact(&s, &s.clone());
        assert_eq!((p, r, f), (1.0, 1.0, 1.0));
    }

    #[test]
    fn index_prf_perfect_match() {
        let (p, r, f): (f64, f64, f64) =
            precision_recall_f1_index(&set(&["LAT1"]), &set(&["LAT1"]));
        assert_eq!((p, r, f), (1.0, 1.0, 1.0));
    }

    #[test]
    fn index_prf_cross_hemisphere_half_credit() {
        let (p, r, f): (f64, f64, f64) =
            precision_recall_f1_index(&set(&["RAH2"]), &set(&["LAH2"]));
        assert_eq!((p, r), (0.5, 0.5));
        assert_eq!(f, 0.5);
    }

    #[test]
    fn index_prf_no_shared_numbers() {
        let (p, r, f): (f64, f64, f64) =
            precision_recall_f1_index(&set(&["LAT1"]), &set(&["PD9"]));
        assert_eq!((p, r, f), (0.0, 0.0, 0.0));
    }

    #[test]
    fn overlap_states_cover_all_cases() {
        let all: Vec<ChannelId> = ["A1", "A2", "A3", "A4"]
            .iter()
            .map(|l| ChannelId::parse(l).unwrap())
            .collect();
        let soz = set(&["A1", "A2", "Z9"]);
        let outliers = set(&["A1", "A3"]);
        let (states, missing) = overlap_states(&all, &soz, &outliers);
        let get = |l: &str| states[&ChannelId::parse(l).unwrap()];
        assert_eq!(get("A1"), OverlapState::Both);
        assert_eq!(get("A2"), OverlapState::SozOnly);
        assert_eq!(get("A3"), OverlapState::OutlierOnly);
        assert_eq!(get("A4"), OverlapState::Neither);
        assert_eq!(get("Z9"), OverlapState::SozOnly);
        assert_eq!(missing, vec![ChannelId::parse("Z9").unwrap()]);
        assert_eq!(states.len(), 5);
    }

    #[test]
    fn state_codes_match_grid_encoding() {
        assert_eq!(OverlapState::Neither.code(), 0);
        assert_eq!(OverlapState::OutlierOnly.code(), 1);
        assert_eq!(OverlapState::SozOnly.code(), 2);
        assert_eq!(OverlapState::Both.code(), 3);
    }

    #[test]
    fn report_combines_all_metrics() {
        let soz = set(&["LAT1", "RAH2"]);
        let outliers = set(&["LAT1", "LAH2"]);
        let rep: ConcordanceReport<f64> = report("pt1", &soz, &outliers);
        assert_eq!(rep.m_exact, 1);
        assert_eq!(rep.r_exact, 0.5);
        assert_eq!(rep.m_index, 3);
        assert_eq!(rep.r_index, 0.75);
        assert_eq!(rep.n_soz, 2);
        assert_eq!(rep.n_outliers, 2);
        // index credits: LAT1 -> 1.0, LAH2 -> 0.5
        assert_eq!(rep.index_precision, 0.75);
        assert_eq!(rep.index_recall, 0.75);
    }
}
