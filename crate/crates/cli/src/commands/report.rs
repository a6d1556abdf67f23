//! `report`: assemble the evaluation report - per-feature bands, confusion
//! matrices and metrics, scatter data, flow matrices and the consensus
//! table.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;

use voxscreen::agreement::consensus_stats;
use voxscreen::classifier::{ConfusionMatrix, Quality};
use voxscreen::RaterVotes;

use crate::commands::agree::{consensus_section, flow_documents};
use crate::commands::{CliError, CmdOutcome};
use crate::manifest::CorpusManifest;
use crate::records::{
    read_json, write_json, DecisionsFile, EvaluationReport, FeatureFile, FeatureReport,
    ScatterRow, ScreenDecision,
};

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Features file from `extract`.
    #[arg(long)]
    pub features: PathBuf,
    /// Decisions file from `screen`.
    #[arg(long)]
    pub decisions: PathBuf,
    /// Manifest, for the rater-consensus section.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &ReportArgs) -> Result<CmdOutcome, CliError> {
    let features: FeatureFile = read_json(&args.features)?;
    let decisions: DecisionsFile = read_json(&args.decisions)?;
    std::fs::create_dir_all(&args.out)?;

    let report = build_report(&features, &decisions, args.manifest.as_deref())?;
    write_json(&report, &args.out.join("report.json"))?;

    for (feature, section) in &report.per_feature {
        write_scatter_csv(section, &args.out.join(format!("scatter_{feature}.csv")))?;
    }
    crate::commands::agree::write_flow_documents(&decisions, &args.out)?;

    Ok(CmdOutcome::Clean)
}

pub fn build_report(
    features: &FeatureFile,
    decisions: &DecisionsFile,
    manifest: Option<&Path>,
) -> Result<EvaluationReport, CliError> {
    let mut notices = Vec::new();
    let by_id: BTreeMap<&str, &crate::records::FeatureRecord> = features
        .records
        .iter()
        .map(|r| (r.id.as_str(), r))
        .collect();

    let mut per_feature = BTreeMap::new();
    for &feature in &decisions.verdict_features {
        let mut scatter = Vec::new();
        let mut confusion = ConfusionMatrix::default();
        let mut labeled_definite = 0usize;

        for record in &decisions.records {
            let Some(feature_decision) = record.per_feature.get(&feature) else {
                continue;
            };
            let Some(fr) = by_id.get(record.id.as_str()) else {
                notices.push(format!(
                    "decisions reference id '{}' missing from features file",
                    record.id
                ));
                continue;
            };
            let (x, y) = match (
                fr.input.as_ref().and_then(|f| f.value(feature)),
                fr.output.as_ref().and_then(|f| f.value(feature)),
            ) {
                (Some(x), Some(y)) => (x, y),
                _ => continue,
            };
            let decision_str = match feature_decision.decision {
                ScreenDecision::Good => "good",
                ScreenDecision::Bad => "bad",
                ScreenDecision::Review => "review",
            };
            scatter.push(ScatterRow {
                id: record.id.clone(),
                x,
                y,
                label: record
                    .label
                    .map(|l| match l {
                        Quality::Good => "good".to_string(),
                        Quality::Bad => "bad".to_string(),
                    })
                    .unwrap_or_default(),
                decision: decision_str.to_string(),
            });

            if let (Some(label), ScreenDecision::Good | ScreenDecision::Bad) =
                (record.label, feature_decision.decision)
            {
                let decided = match feature_decision.decision {
                    ScreenDecision::Good => Quality::Good,
                    ScreenDecision::Bad => Quality::Bad,
                    ScreenDecision::Review => unreachable!(),
                };
                confusion.record(label, decided);
                labeled_definite += 1;
            }
        }

        let bands: BTreeMap<String, voxscreen::BandFit> = decisions
            .bands_used
            .iter()
            .filter_map(|(tag, fits)| fits.get(&feature).map(|f| (tag.clone(), f.clone())))
            .collect();

        let (confusion, metrics) = if labeled_definite > 0 {
            (Some(confusion), Some(confusion.metrics()))
        } else {
            notices.push(format!(
                "no labeled {feature} decisions; metrics section omitted"
            ));
            (None, None)
        };

        per_feature.insert(
            feature,
            FeatureReport {
                bands,
                confusion,
                metrics,
                scatter,
            },
        );
    }

    let mut flows = BTreeMap::new();
    for doc in flow_documents(decisions)? {
        flows.insert(
            format!("{}_vs_{}", doc.classifier_a, doc.classifier_b),
            doc,
        );
    }

    let consensus = match manifest {
        None => None,
        Some(path) => {
            let manifest = CorpusManifest::load(path)?;
            let votes: Vec<RaterVotes> = manifest
                .rows
                .iter()
                .filter_map(|r| {
                    r.rater_votes.as_ref().map(|v| RaterVotes {
                        sample_id: r.id.clone(),
                        votes: v.clone(),
                    })
                })
                .collect();
            if votes.is_empty() {
                notices.push("manifest has no rater_votes; consensus omitted".into());
                None
            } else {
                Some(consensus_section(&consensus_stats(&votes)?))
            }
        }
    };

    let review_ids: Vec<String> = decisions
        .records
        .iter()
        .filter(|r| r.verdict == ScreenDecision::Review)
        .map(|r| r.id.clone())
        .collect();

    Ok(EvaluationReport {
        per_feature,
        flows,
        consensus,
        review_ids,
        notices,
    })
}

fn write_scatter_csv(section: &FeatureReport, path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(crate::manifest::ManifestError::Csv)?;
    w.write_record(["id", "x", "y", "label", "decision"])
        .map_err(crate::manifest::ManifestError::Csv)?;
    for row in &section.scatter {
        w.write_record([
            row.id.clone(),
            format!("{:.6}", row.x),
            format!("{:.6}", row.y),
            row.label.clone(),
            row.decision.clone(),
        ])
        .map_err(crate::manifest::ManifestError::Csv)?;
    }
    w.flush()?;
    Ok(())
}
