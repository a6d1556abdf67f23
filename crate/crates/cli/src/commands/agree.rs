//! `agree`: standalone agreement analytics - rater consensus from a
//! manifest and/or cross-classifier flow matrices from a decisions file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;

use voxscreen::agreement::consensus_stats;
use voxscreen::classifier::Quality;
use voxscreen::RaterVotes;

use crate::commands::{CliError, CmdOutcome};
use crate::manifest::CorpusManifest;
use crate::records::{read_json, write_json, ConsensusRow, ConsensusSection, DecisionsFile,
    FlowsDocument, ScreenDecision};

#[derive(Debug, Args)]
pub struct AgreeArgs {
    /// Manifest with rater_votes for the consensus table.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Decisions file from `screen` for classifier-vs-classifier flows.
    #[arg(long)]
    pub decisions: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &AgreeArgs) -> Result<CmdOutcome, CliError> {
    if args.manifest.is_none() && args.decisions.is_none() {
        return Err(CliError::Invalid(
            "agree needs --manifest (for consensus) and/or --decisions (for flows)".into(),
        ));
    }
    std::fs::create_dir_all(&args.out)?;

    if let Some(manifest_path) = &args.manifest {
        let manifest = CorpusManifest::load(manifest_path)?;
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
            eprintln!("agree: manifest has no rater_votes; consensus skipped");
        } else {
            let table = consensus_stats(&votes)?;
            let section = consensus_section(&table);
            write_json(&section, &args.out.join("consensus.json"))?;
            write_consensus_csv(&section, &args.out.join("consensus.csv"))?;
        }
    }

    if let Some(decisions_path) = &args.decisions {
        let decisions: DecisionsFile = read_json(decisions_path)?;
        write_flow_documents(&decisions, &args.out)?;
    }

    Ok(CmdOutcome::Clean)
}

pub(crate) fn consensus_section(table: &voxscreen::AgreementTable) -> ConsensusSection {
    let row = |r: &voxscreen::agreement::AgreementRow| ConsensusRow {
        agreeing_votes: r.agreeing_votes,
        total_votes: r.total_votes,
        percent: r.percent(),
    };
    ConsensusSection {
        good: table.good.as_ref().map(row),
        bad: table.bad.as_ref().map(row),
        tied_sample_ids: table.tied_sample_ids.clone(),
    }
}

fn write_consensus_csv(section: &ConsensusSection, path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(crate::manifest::ManifestError::Csv)?;
    w.write_record(["category", "agreeing_votes", "total_votes", "percent"])
        .map_err(crate::manifest::ManifestError::Csv)?;
    for (name, row) in [("good", &section.good), ("bad", &section.bad)] {
        if let Some(r) = row {
            w.write_record([
                name.to_string(),
                r.agreeing_votes.to_string(),
                r.total_votes.to_string(),
                format!("{:.2}", r.percent),
            ])
            .map_err(crate::manifest::ManifestError::Csv)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Builds flow documents for every ordered feature pair, using only
/// samples where both features produced a definite (non-review) decision.
pub(crate) fn flow_documents(decisions: &DecisionsFile) -> Result<Vec<FlowsDocument>, CliError> {
    let mut documents = Vec::new();
    let features = &decisions.verdict_features;
    for i in 0..features.len() {
        for j in i + 1..features.len() {
            let (fa, fb) = (features[i], features[j]);
            let mut map_a: BTreeMap<String, Quality> = BTreeMap::new();
            let mut map_b: BTreeMap<String, Quality> = BTreeMap::new();
            for r in &decisions.records {
                let (Some(da), Some(db)) = (r.per_feature.get(&fa), r.per_feature.get(&fb))
                else {
                    continue;
                };
                let (Some(qa), Some(qb)) = (definite(da.decision), definite(db.decision)) else {
                    continue;
                };
                map_a.insert(r.id.clone(), qa);
                map_b.insert(r.id.clone(), qb);
            }
            if map_a.is_empty() {
                continue;
            }
            let matrix = voxscreen::flow_matrix(&map_a, &map_b)?;
            documents.push(FlowsDocument::from_matrix(fa, fb, matrix));
        }
    }
    Ok(documents)
}

pub(crate) fn write_flow_documents(
    decisions: &DecisionsFile,
    out_dir: &Path,
) -> Result<(), CliError> {
    for doc in flow_documents(decisions)? {
        let stem = format!("flows_{}_vs_{}", doc.classifier_a, doc.classifier_b);
        write_json(&doc, &out_dir.join(format!("{stem}.json")))?;

        let mut w = csv::Writer::from_path(out_dir.join(format!("{stem}.csv")))
            .map_err(crate::manifest::ManifestError::Csv)?;
        w.write_record(["cell", "count"])
            .map_err(crate::manifest::ManifestError::Csv)?;
        for (cell, count) in [
            ("both_good", doc.matrix.both_good),
            ("a_good_b_bad", doc.matrix.a_good_b_bad),
            ("a_bad_b_good", doc.matrix.a_bad_b_good),
            ("both_bad", doc.matrix.both_bad),
        ] {
            w.write_record([cell.to_string(), count.to_string()])
                .map_err(crate::manifest::ManifestError::Csv)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn definite(d: ScreenDecision) -> Option<Quality> {
    match d {
        ScreenDecision::Good => Some(Quality::Good),
        ScreenDecision::Bad => Some(Quality::Bad),
        ScreenDecision::Review => None,
    }
}
