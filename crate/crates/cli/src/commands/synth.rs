//! `synth`: write a labeled synthetic corpus (WAV files + manifest).

use std::path::PathBuf;

use clap::{Args, ValueEnum};

use voxscreen::lab::{build_corpus, CorpusRecipe};
use voxscreen::encode_wav;

use crate::commands::{CliError, CmdOutcome};
use crate::manifest::{CorpusManifest, ManifestRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RecipeArg {
    /// Bads are strong upward pitch shifts (f0-separable).
    PitchShift,
    /// Bads are heavy additive noise (HNR-separable).
    Noise,
    /// Half pitch-shifted, half noised bads.
    Mixed,
}

impl From<RecipeArg> for CorpusRecipe {
    fn from(r: RecipeArg) -> Self {
        match r {
            RecipeArg::PitchShift => CorpusRecipe::PitchShiftOnly,
            RecipeArg::Noise => CorpusRecipe::NoiseOnly,
            RecipeArg::Mixed => CorpusRecipe::Mixed,
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = RecipeArg::Mixed)]
    pub recipe: RecipeArg,
    #[arg(long, default_value_t = 20)]
    pub n_good: usize,
    #[arg(long, default_value_t = 20)]
    pub n_bad: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value = "synthlab")]
    pub vocoder_tag: String,
}

pub fn run(args: &SynthArgs) -> Result<CmdOutcome, CliError> {
    let entries = build_corpus(args.n_good, args.n_bad, args.recipe.into(), args.seed)?;
    let wav_dir = args.out.join("wav");
    std::fs::create_dir_all(&wav_dir)?;

    let mut rows = Vec::with_capacity(entries.len());
    for entry in &entries {
        let input_rel = format!("wav/{}_input.wav", entry.id);
        let output_rel = format!("wav/{}_output.wav", entry.id);
        encode_wav(&entry.input, args.out.join(&input_rel))
            .map_err(|e| CliError::Invalid(e.to_string()))?;
        encode_wav(&entry.output, args.out.join(&output_rel))
            .map_err(|e| CliError::Invalid(e.to_string()))?;
        rows.push(ManifestRow {
            id: entry.id.clone(),
            input_path: input_rel,
            output_path: output_rel,
            label: Some(entry.label),
            rater_votes: None,
            vocoder_tag: args.vocoder_tag.clone(),
        });
    }
    rows.sort_by(|a, b| a.id.cmp(&b.id));

    let manifest = CorpusManifest { rows };
    manifest.save_csv(&args.out.join("manifest.csv"))?;

    if entries.is_empty() {
        eprintln!("synth: corpus is empty (n_good = 0 and n_bad = 0)");
    } else {
        println!(
            "synth: wrote {} pairs to {}",
            entries.len(),
            args.out.display()
        );
    }
    Ok(CmdOutcome::Clean)
}
