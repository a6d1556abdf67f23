//! Agreement analytics: inter-rater consensus and cross-classifier flows.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::Quality;

#[derive(Debug, Error)]
pub enum AgreementError {
    #[error("samples have differing rater counts ({0} vs {1})")]
    RaterCountMismatch(usize, usize),
    #[error("sample {0} has fewer than two votes")]
    TooFewVotes(String),
    #[error("decision sets disagree on sample ids (e.g. {0})")]
    IdSetMismatch(String),
}

/// One sample's votes, one per rater.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RaterVotes {
    pub sample_id: String,
    pub votes: Vec<Quality>,
}

/// Consensus statistics for one label group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementRow {
    pub agreeing_votes: u32,
    pub total_votes: u32,
}

impl AgreementRow {
    /// Exact agreement ratio.
    pub fn ratio(&self) -> f64 {
        self.agreeing_votes as f64 / self.total_votes as f64
    }

    /// Exact agreement percentage.
    pub fn percent(&self) -> f64 {
        100.0 * self.ratio()
    }

    /// Whether a claimed percentage is consistent with the exact ratio at
    /// two-decimal rounding. Lets reports flag misprinted figures instead
    /// of hard-coding them.
    pub fn consistent_with_percent(&self, claimed: f64) -> bool {
        (self.percent() - claimed).abs() <= 0.005
    }
}

/// Vote-level consensus per label group, plus tie diagnostics.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AgreementTable {
    pub good: Option<AgreementRow>,
    pub bad: Option<AgreementRow>,
    /// Samples with an even vote split, excluded from both rows.
    pub tied_sample_ids: Vec<String>,
}

/// Groups samples by majority label and reports vote-level agreement.
///
/// Every sample must carry the same number of votes (at least two). Samples
/// with an even split have no consensus; they are excluded from the table
/// and listed in the diagnostics.
pub fn consensus_stats(votes: &[RaterVotes]) -> Result<AgreementTable, AgreementError> {
    let mut rater_count: Option<usize> = None;
    let mut table = AgreementTable::default();
    let mut tally: BTreeMap<Quality, (u32, u32)> = BTreeMap::new();

    for sample in votes {
        let n = sample.votes.len();
        if n < 2 {
            return Err(AgreementError::TooFewVotes(sample.sample_id.clone()));
        }
        match rater_count {
            None => rater_count = Some(n),
            Some(expected) if expected != n => {
                return Err(AgreementError::RaterCountMismatch(expected, n));
            }
            _ => {}
        }

        let bad_votes = sample.votes.iter().filter(|&&v| v == Quality::Bad).count();
        let good_votes = n - bad_votes;
        if bad_votes == good_votes {
            table.tied_sample_ids.push(sample.sample_id.clone());
            continue;
        }
        let (consensus, agreeing) = if bad_votes > good_votes {
            (Quality::Bad, bad_votes)
        } else {
            (Quality::Good, good_votes)
        };
        let entry = tally.entry(consensus).or_insert((0, 0));
        entry.0 += agreeing as u32;
        entry.1 += n as u32;
    }

    table.good = tally.get(&Quality::Good).map(|&(a, t)| AgreementRow {
        agreeing_votes: a,
        total_votes: t,
    });
    table.bad = tally.get(&Quality::Bad).map(|&(a, t)| AgreementRow {
        agreeing_votes: a,
        total_votes: t,
    });
    Ok(table)
}

/// 2x2 cross-tabulation of two classifiers' per-sample decisions, with
/// the sample ids behind each cell for report drill-down.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowMatrix {
    pub both_good: u32,
    pub a_good_b_bad: u32,
    pub a_bad_b_good: u32,
    pub both_bad: u32,
    pub both_good_ids: Vec<String>,
    pub a_good_b_bad_ids: Vec<String>,
    pub a_bad_b_good_ids: Vec<String>,
    pub both_bad_ids: Vec<String>,
}

impl FlowMatrix {
    pub fn total(&self) -> u32 {
        self.both_good + self.a_good_b_bad + self.a_bad_b_good + self.both_bad
    }

    /// (good, bad) marginals of classifier A.
    pub fn a_marginals(&self) -> (u32, u32) {
        (
            self.both_good + self.a_good_b_bad,
            self.a_bad_b_good + self.both_bad,
        )
    }

    /// (good, bad) marginals of classifier B.
    pub fn b_marginals(&self) -> (u32, u32) {
        (
            self.both_good + self.a_bad_b_good,
            self.a_good_b_bad + self.both_bad,
        )
    }

    /// Swapping the classifiers transposes the off-diagonal cells.
    pub fn transposed(&self) -> FlowMatrix {
        FlowMatrix {
            both_good: self.both_good,
            a_good_b_bad: self.a_bad_b_good,
            a_bad_b_good: self.a_good_b_bad,
            both_bad: self.both_bad,
            both_good_ids: self.both_good_ids.clone(),
            a_good_b_bad_ids: self.a_bad_b_good_ids.clone(),
            a_bad_b_good_ids: self.a_good_b_bad_ids.clone(),
            both_bad_ids: self.both_bad_ids.clone(),
        }
    }
}

/// Cross-tabulates two decision sets over the same sample ids.
pub fn flow_matrix(
    decisions_a: &BTreeMap<String, Quality>,
    decisions_b: &BTreeMap<String, Quality>,
) -> Result<FlowMatrix, AgreementError> {
    if decisions_a.len() != decisions_b.len() {
        let example = decisions_a
            .keys()
            .find(|id| !decisions_b.contains_key(*id))
            .or_else(|| decisions_b.keys().find(|id| !decisions_a.contains_key(*id)))
            .cloned()
            .unwrap_or_default();
        return Err(AgreementError::IdSetMismatch(example));
    }

    let mut m = FlowMatrix::default();
    for (id, &a) in decisions_a {
        let Some(&b) = decisions_b.get(id) else {
            return Err(AgreementError::IdSetMismatch(id.clone()));
        };
        match (a, b) {
            (Quality::Good, Quality::Good) => {
                m.both_good += 1;
                m.both_good_ids.push(id.clone());
            }
            (Quality::Good, Quality::Bad) => {
                m.a_good_b_bad += 1;
                m.a_good_b_bad_ids.push(id.clone());
            }
            (Quality::Bad, Quality::Good) => {
                m.a_bad_b_good += 1;
                m.a_bad_b_good_ids.push(id.clone());
            }
            (Quality::Bad, Quality::Bad) => {
                m.both_bad += 1;
                m.both_bad_ids.push(id.clone());
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn votes(id: &str, good: usize, bad: usize) -> RaterVotes {
        let mut v = vec![Quality::Good; good];
        v.extend(std::iter::repeat_n(Quality::Bad, bad));
        RaterVotes {
            sample_id: id.to_string(),
            votes: v,
        }
    }

    #[test]
    fn consensus_matches_published_hifigan_good_row() {
        // 20 Good-consensus samples, 71 of 80 votes agreeing.
        let mut all = Vec::new();
        for i in 0..11 {
            all.push(votes(&format!("u{i}"), 4, 0));
        }
        for i in 0..9 {
            all.push(votes(&format!("s{i}"), 3, 1));
        }
        let table = consensus_stats(&all).unwrap();
        let good = table.good.unwrap();
        assert_eq!(good.agreeing_votes, 71);
        assert_eq!(good.total_votes, 80);
        assert!((good.percent() - 88.75).abs() < 1e-9);
    }

    #[test]
    fn consensus_matches_published_wavernn_bad_row() {
        let mut all = Vec::new();
        for i in 0..25 {
            all.push(votes(&format!("u{i}"), 0, 4));
        }
        for i in 0..2 {
            all.push(votes(&format!("s{i}"), 1, 3));
        }
        let table = consensus_stats(&all).unwrap();
        let bad = table.bad.unwrap();
        assert_eq!(bad.agreeing_votes, 106);
        assert_eq!(bad.total_votes, 108);
        assert!((bad.percent() - 98.1481481481).abs() < 1e-6);
    }

    #[test]
    fn unanimous_votes_hit_100_percent() {
        let all = vec![votes("a", 4, 0), votes("b", 0, 4)];
        let table = consensus_stats(&all).unwrap();
        assert_eq!(table.good.unwrap().percent(), 100.0);
        assert_eq!(table.bad.unwrap().percent(), 100.0);
    }

    #[test]
    fn ties_are_excluded_and_reported() {
        let all = vec![votes("a", 2, 2), votes("b", 3, 1)];
        let table = consensus_stats(&all).unwrap();
        assert_eq!(table.tied_sample_ids, vec!["a".to_string()]);
        assert_eq!(table.good.unwrap().total_votes, 4);
    }

    #[test]
    fn mismatched_rater_counts_rejected() {
        let all = vec![votes("a", 4, 0), votes("b", 2, 1)];
        assert!(matches!(
            consensus_stats(&all),
            Err(AgreementError::RaterCountMismatch(4, 3))
        ));
    }

    fn decisions(pairs: &[(&str, Quality)]) -> BTreeMap<String, Quality> {
        pairs
            .iter()
            .map(|&(id, q)| (id.to_string(), q))
            .collect()
    }

    #[test]
    fn flow_matrix_counts_and_marginals() {
        use Quality::{Bad, Good};
        let a = decisions(&[("1", Good), ("2", Good), ("3", Bad), ("4", Bad)]);
        let b = decisions(&[("1", Good), ("2", Bad), ("3", Good), ("4", Bad)]);
        let m = flow_matrix(&a, &b).unwrap();
        assert_eq!(
            (m.both_good, m.a_good_b_bad, m.a_bad_b_good, m.both_bad),
            (1, 1, 1, 1)
        );
        assert_eq!(m.a_marginals(), (2, 2));
        assert_eq!(m.b_marginals(), (2, 2));
        assert_eq!(m.total(), 4);
        assert_eq!(m.a_good_b_bad_ids, vec!["2".to_string()]);
    }

    #[test]
    fn identical_decisions_have_empty_off_diagonals() {
        use Quality::{Bad, Good};
        let a = decisions(&[("1", Good), ("2", Bad)]);
        let m = flow_matrix(&a, &a).unwrap();
        assert_eq!(m.a_good_b_bad, 0);
        assert_eq!(m.a_bad_b_good, 0);
    }

    #[test]
    fn id_mismatch_rejected() {
        use Quality::Good;
        let a = decisions(&[("1", Good)]);
        let b = decisions(&[("2", Good)]);
        assert!(matches!(
            flow_matrix(&a, &b),
            Err(AgreementError::IdSetMismatch(_))
        ));
    }
}
