//! `screen`: classify extracted pairs against a fitted band profile.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;

use voxscreen::classifier::{classify, BandProfile, Deviation, FeatureKind};

use crate::commands::{CliError, CmdOutcome, FeatureArg};
use crate::records::{
    read_json, write_json, DecisionRecord, DecisionsFile, FeatureDecision, FeatureFile,
    ScreenDecision,
};

#[derive(Debug, Args)]
pub struct ScreenArgs {
    /// Features file from `extract`.
    #[arg(long)]
    pub features: PathBuf,
    /// Band profile from `optimize`.
    #[arg(long)]
    pub profile: PathBuf,
    /// Output decisions file (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Features feeding the combined verdict (repeatable). Defaults to
    /// every feature that has a band for all tags in the features file.
    #[arg(long = "feature", value_enum)]
    pub features_list: Vec<FeatureArg>,
}

pub fn run(args: &ScreenArgs) -> Result<CmdOutcome, CliError> {
    let file: FeatureFile = read_json(&args.features)?;
    let profile_text = std::fs::read_to_string(&args.profile)?;
    let profile = BandProfile::from_json(&profile_text)?;

    let mut tags: Vec<&str> = file.records.iter().map(|r| r.vocoder_tag.as_str()).collect();
    tags.sort();
    tags.dedup();

    let verdict_features: Vec<FeatureKind> = if args.features_list.is_empty() {
        // Intersection of fitted features across the tags we must screen.
        FeatureKind::ALL
            .into_iter()
            .filter(|&f| tags.iter().all(|tag| profile.get(tag, f).is_some()))
            .collect()
    } else {
        crate::commands::feature_kinds(&args.features_list)
    };
    if verdict_features.is_empty() {
        return Err(CliError::Invalid(
            "no feature has a fitted band for every vocoder tag in the features file".into(),
        ));
    }
    for tag in &tags {
        for &feature in &verdict_features {
            if profile.get(tag, feature).is_none() {
                return Err(CliError::MissingBand {
                    vocoder_tag: tag.to_string(),
                    feature,
                });
            }
        }
    }

    let mut bands_used: BTreeMap<String, BTreeMap<FeatureKind, voxscreen::BandFit>> =
        BTreeMap::new();
    for tag in &tags {
        let entry = bands_used.entry(tag.to_string()).or_default();
        for &feature in &verdict_features {
            entry.insert(feature, profile.get(tag, feature).unwrap().clone());
        }
    }

    let mut records = Vec::with_capacity(file.records.len());
    let mut review_count = 0usize;
    for r in &file.records {
        let mut per_feature = BTreeMap::new();
        for &feature in &verdict_features {
            let fit = profile.get(&r.vocoder_tag, feature).unwrap();
            let decision = match r.deviation(feature) {
                Some(d) => {
                    let q = classify(
                        Deviation {
                            feature_kind: feature,
                            d,
                        },
                        &fit.band,
                    )?;
                    FeatureDecision {
                        deviation: Some(d),
                        decision: q.into(),
                        reason: None,
                    }
                }
                None => FeatureDecision {
                    deviation: None,
                    decision: ScreenDecision::Review,
                    reason: Some(unavailable_reason(r, feature)),
                },
            };
            per_feature.insert(feature, decision);
        }

        let verdict = combined_verdict(per_feature.values());
        if verdict == ScreenDecision::Review {
            review_count += 1;
        }
        records.push(DecisionRecord {
            id: r.id.clone(),
            vocoder_tag: r.vocoder_tag.clone(),
            label: r.label,
            per_feature,
            verdict,
        });
    }
    records.sort_by(|a, b| a.id.cmp(&b.id));

    write_json(
        &DecisionsFile {
            verdict_features,
            bands_used,
            records,
        },
        &args.out,
    )?;

    if review_count > 0 {
        eprintln!("screen: {review_count} samples routed to review");
        Ok(CmdOutcome::PartialFailures(review_count))
    } else {
        Ok(CmdOutcome::Clean)
    }
}

/// Bad dominates (a confident rejection stands even when another feature
/// is unavailable), then Review, then Good.
fn combined_verdict<'a, I: Iterator<Item = &'a FeatureDecision>>(decisions: I) -> ScreenDecision {
    let mut verdict = ScreenDecision::Good;
    for d in decisions {
        match d.decision {
            ScreenDecision::Bad => return ScreenDecision::Bad,
            ScreenDecision::Review => verdict = ScreenDecision::Review,
            ScreenDecision::Good => {}
        }
    }
    verdict
}

fn unavailable_reason(r: &crate::records::FeatureRecord, feature: FeatureKind) -> String {
    let mut reasons = Vec::new();
    for (side, features) in [("input", &r.input), ("output", &r.output)] {
        match features {
            None => reasons.push(format!("{side} side not analyzed")),
            Some(f) => {
                if f.value(feature).is_none() {
                    let detail = f
                        .failures
                        .iter()
                        .find(|x| x.feature == feature)
                        .map(|x| x.reason.clone())
                        .unwrap_or_else(|| "value missing".to_string());
                    reasons.push(format!("{side}: {detail}"));
                }
            }
        }
    }
    if reasons.is_empty() {
        "feature unavailable".to_string()
    } else {
        reasons.join("; ")
    }
}

pub(crate) fn _verdict_for_tests(decisions: &[FeatureDecision]) -> ScreenDecision {
    combined_verdict(decisions.iter())
}

#[cfg(test)]
mod tests {
    use super::*;
    use voxscreen::classifier::Quality;

    fn fd(decision: ScreenDecision) -> FeatureDecision {
        FeatureDecision {
            deviation: None,
            decision,
            reason: None,
        }
    }

    #[test]
    fn bad_beats_review_beats_good() {
        use ScreenDecision::*;
        assert_eq!(_verdict_for_tests(&[fd(Good), fd(Good)]), Good);
        assert_eq!(_verdict_for_tests(&[fd(Good), fd(Review)]), Review);
        assert_eq!(_verdict_for_tests(&[fd(Review), fd(Bad)]), Bad);
        assert_eq!(_verdict_for_tests(&[fd(Bad), fd(Good)]), Bad);
    }

    #[test]
    fn quality_converts_to_decision() {
        assert_eq!(ScreenDecision::from(Quality::Good), ScreenDecision::Good);
        assert_eq!(ScreenDecision::from(Quality::Bad), ScreenDecision::Bad);
    }
}
