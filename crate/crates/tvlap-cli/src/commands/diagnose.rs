use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use tvlap::analysis::diagnose;

use crate::config::{pick, CliError, CliResult, FileConfig, ModelArgs, DIAGNOSIS_DEFAULTS};
use crate::csvio::{fmt_f64, read_table, CsvWriter};

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Input CSV with at least two value columns (a `time` column and
    /// `truth*` columns are ignored)
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Optional per-channel CSV output
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fault threshold as a multiple of the median channel variance
    #[arg(long)]
    pub ratio: Option<f64>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Flat key=value configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn run(args: DiagnoseArgs) -> CliResult<ExitCode> {
    let file = FileConfig::load(args.config.as_ref())?;
    let config = args.model.resolve(&file, &DIAGNOSIS_DEFAULTS)?;
    let ratio = pick(args.ratio, &file, "ratio", 3.0f64)?;

    let table = read_table(&args.input)?;
    let channels: Vec<(&str, &[f64])> = table
        .headers
        .iter()
        .zip(&table.columns)
        .filter(|(name, _)| name.as_str() != "time" && !name.starts_with("truth"))
        .map(|(name, col)| (name.as_str(), col.as_slice()))
        .collect();
    if channels.len() < 2 {
        return Err(CliError::usage(format!(
            "{}: need at least 2 value columns, found {}",
            args.input.display(),
            channels.len()
        )));
    }

    let report = diagnose(&channels, &config, ratio)?;

    let mut writer = match &args.out {
        Some(path) => Some(CsvWriter::create(path, &["channel", "variance", "faulty"])?),
        None => None,
    };
    println!("{:<12} {:>16} {:>8}", "channel", "d1_variance", "faulty");
    for c in &report {
        println!(
            "{:<12} {:>16.6} {:>8}",
            c.name,
            c.variance,
            if c.faulty { "FAULTY" } else { "ok" }
        );
        if let Some(w) = writer.as_mut() {
            w.row(&[
                c.name.clone(),
                fmt_f64(c.variance),
                if c.faulty { "1" } else { "0" }.to_string(),
            ])?;
        }
    }
    if let Some(w) = writer {
        w.finish()?;
    }
    Ok(ExitCode::SUCCESS)
}
