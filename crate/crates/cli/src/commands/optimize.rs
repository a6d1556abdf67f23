//! `optimize`: fit acceptance bands from a labeled features file.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;

use voxscreen::classifier::{optimize_band, BandProfile, ClassifierError, LabeledDeviation};

use crate::commands::{feature_kinds, CliError, CmdOutcome, FeatureArg};
use crate::records::{read_json, write_json, FeatureFile};

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Features file from `extract`.
    #[arg(long)]
    pub features: PathBuf,
    /// Output band profile (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Features to fit (repeatable); defaults to all three.
    #[arg(long = "feature", value_enum)]
    pub features_list: Vec<FeatureArg>,
    /// Only fit bands for this vocoder tag (default: every tag present).
    #[arg(long)]
    pub vocoder_tag: Option<String>,
}

pub fn run(args: &OptimizeArgs) -> Result<CmdOutcome, CliError> {
    let file: FeatureFile = read_json(&args.features)?;
    let kinds = feature_kinds(&args.features_list);

    let mut by_tag: BTreeMap<&str, Vec<&crate::records::FeatureRecord>> = BTreeMap::new();
    for record in &file.records {
        if let Some(tag) = &args.vocoder_tag {
            if &record.vocoder_tag != tag {
                continue;
            }
        }
        by_tag.entry(&record.vocoder_tag).or_default().push(record);
    }

    let any_labeled = by_tag
        .values()
        .flatten()
        .any(|r| r.label.is_some());
    if !any_labeled {
        return Err(ClassifierError::NoLabeledPairs.into());
    }

    let mut profile = BandProfile::default();
    let mut skipped = 0usize;
    for (tag, records) in &by_tag {
        for &feature in &kinds {
            let labeled: Vec<LabeledDeviation> = records
                .iter()
                .filter_map(|r| {
                    let label = r.label?;
                    let d = r.deviation(feature)?;
                    Some(LabeledDeviation { d, label })
                })
                .collect();
            if labeled.is_empty() {
                eprintln!(
                    "optimize: no labeled {feature} deviations for tag '{tag}'; band skipped"
                );
                skipped += 1;
                continue;
            }
            let mut fit = optimize_band(&labeled, feature)?;
            for warning in &fit.warnings {
                eprintln!("optimize: {tag}/{feature}: {warning}");
            }
            if labeled.len() < records.len() {
                fit.warnings.push(format!(
                    "{} of {} pairs lacked a defined {feature} deviation and were excluded",
                    records.len() - labeled.len(),
                    records.len()
                ));
            }
            profile.insert(tag, fit);
        }
    }

    write_json(&profile, &args.out)?;
    if skipped > 0 {
        Ok(CmdOutcome::PartialFailures(skipped))
    } else {
        Ok(CmdOutcome::Clean)
    }
}
