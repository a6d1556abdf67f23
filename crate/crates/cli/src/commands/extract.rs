//! `extract`: run feature extraction over a manifest.

use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;

use voxscreen::features::extract_features;
use voxscreen::spectrogram::spectrogram;
use voxscreen::{decode_wav, AnalysisConfig};

use crate::commands::{CliError, CmdOutcome};
use crate::manifest::{CorpusManifest, ManifestRow};
use crate::records::{write_json, FeatureFile, FeatureRecord};

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Corpus manifest (.csv or .json).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output features file (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Analysis config overrides (JSON, partial is fine).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Also write a flat CSV of the feature table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Worker threads for extraction.
    #[arg(long, default_value_t = 4)]
    pub workers: usize,
    /// Emit per-side spectrogram CSV grids into this directory.
    #[arg(long)]
    pub spectrograms: Option<PathBuf>,
}

pub fn load_config(path: Option<&Path>) -> Result<AnalysisConfig, CliError> {
    let cfg = match path {
        None => AnalysisConfig::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text)?
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(args: &ExtractArgs) -> Result<CmdOutcome, CliError> {
    let manifest = CorpusManifest::load(&args.manifest)?;
    let cfg = load_config(args.config.as_deref())?;
    let base = args
        .manifest
        .parent()
        .unwrap_or(Path::new("."))
        .to_path_buf();
    if let Some(dir) = &args.spectrograms {
        std::fs::create_dir_all(dir)?;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers.max(1))
        .build()
        .map_err(|e| CliError::Invalid(format!("worker pool: {e}")))?;

    let mut records: Vec<FeatureRecord> = pool.install(|| {
        manifest
            .rows
            .par_iter()
            .map(|row| analyze_row(row, &base, &cfg, args.spectrograms.as_deref()))
            .collect()
    });
    // Aggregation order is fixed by id, so worker count never changes output bytes.
    records.sort_by(|a, b| a.id.cmp(&b.id));

    let failed = records.iter().filter(|r| !r.errors.is_empty()).count();
    let file = FeatureFile {
        config: cfg,
        records,
    };
    write_json(&file, &args.out)?;
    if let Some(csv_path) = &args.csv {
        write_csv(&file, csv_path)?;
    }

    if failed > 0 {
        eprintln!("extract: {failed} of {} pairs had extraction errors", file.records.len());
        Ok(CmdOutcome::PartialFailures(failed))
    } else {
        Ok(CmdOutcome::Clean)
    }
}

fn analyze_row(
    row: &ManifestRow,
    base: &Path,
    cfg: &AnalysisConfig,
    spectrogram_dir: Option<&Path>,
) -> FeatureRecord {
    let mut errors = Vec::new();
    let mut analyze_side = |rel: &str, side: &str| {
        let path = base.join(rel);
        match decode_wav(&path) {
            Err(e) => {
                errors.push(format!("{side}: {e}"));
                None
            }
            Ok(clip) => {
                if let Some(dir) = spectrogram_dir {
                    // 30 ms frames at the analysis hop, for visual inspection.
                    if let Ok(spec) = spectrogram(&clip, 0.030, cfg.frame_hop_s) {
                        let out = dir.join(format!("{}_{side}.csv", row.id));
                        if let Ok(f) = std::fs::File::create(out) {
                            let _ = spec.write_csv(std::io::BufWriter::new(f));
                        }
                    }
                }
                match extract_features(&clip, cfg) {
                    Ok(features) => Some(features),
                    Err(e) => {
                        errors.push(format!("{side}: {e}"));
                        None
                    }
                }
            }
        }
    };

    let input = analyze_side(&row.input_path, "input");
    let output = analyze_side(&row.output_path, "output");
    FeatureRecord {
        id: row.id.clone(),
        vocoder_tag: row.vocoder_tag.clone(),
        label: row.label,
        input,
        output,
        errors,
    }
}

fn write_csv(file: &FeatureFile, path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(crate::manifest::ManifestError::Csv)?;
    w.write_record([
        "id",
        "vocoder_tag",
        "label",
        "input_f0_hz",
        "input_hnr_db",
        "input_vtl_cm",
        "input_vtl_in_range",
        "input_voiced_frames",
        "input_total_frames",
        "output_f0_hz",
        "output_hnr_db",
        "output_vtl_cm",
        "output_vtl_in_range",
        "output_voiced_frames",
        "output_total_frames",
        "diagnostics",
    ])
    .map_err(crate::manifest::ManifestError::Csv)?;

    let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    let fmt_flag = |v: Option<bool>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &file.records {
        let mut diagnostics: Vec<String> = r.errors.clone();
        for (side, features) in [("input", &r.input), ("output", &r.output)] {
            if let Some(f) = features {
                for failure in &f.failures {
                    diagnostics.push(format!("{side}/{}: {}", failure.feature, failure.reason));
                }
            }
        }
        let (iv, ov) = (&r.input, &r.output);
        let side = |f: &Option<voxscreen::AcousticFeatures>, g: fn(&voxscreen::AcousticFeatures) -> Option<f64>| {
            f.as_ref().and_then(g)
        };
        w.write_record([
            r.id.clone(),
            r.vocoder_tag.clone(),
            r.label
                .map(|l| format!("{l:?}").to_lowercase())
                .unwrap_or_default(),
            fmt_opt(side(iv, |f| f.median_f0_hz)),
            fmt_opt(side(iv, |f| f.mean_hnr_db)),
            fmt_opt(side(iv, |f| f.vtl_cm)),
            fmt_flag(iv.as_ref().and_then(|f| f.vtl_in_range)),
            iv.as_ref().map(|f| f.voiced_frame_count.to_string()).unwrap_or_default(),
            iv.as_ref().map(|f| f.total_frame_count.to_string()).unwrap_or_default(),
            fmt_opt(side(ov, |f| f.median_f0_hz)),
            fmt_opt(side(ov, |f| f.mean_hnr_db)),
            fmt_opt(side(ov, |f| f.vtl_cm)),
            fmt_flag(ov.as_ref().and_then(|f| f.vtl_in_range)),
            ov.as_ref().map(|f| f.voiced_frame_count.to_string()).unwrap_or_default(),
            ov.as_ref().map(|f| f.total_frame_count.to_string()).unwrap_or_default(),
            diagnostics.join(" | "),
        ])
        .map_err(crate::manifest::ManifestError::Csv)?;
    }
    w.flush()?;
    Ok(())
}
