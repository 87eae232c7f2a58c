use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Args;
use tvlap::analysis::{burn_in_len, ExtremaKind, Tracker};
use tvlap::model::make_tvlap;

use crate::config::{
    pick, CliError, CliResult, FileConfig, ModeChoice, ModelArgs, TRACKING_DEFAULTS,
};
use crate::csvio::{check_monotone_time, fmt_f64, read_table, CsvWriter, Table};

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Input CSV with a `time` column and an `x` (or `value`) column
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output CSV path
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Extrema classification mode
    #[arg(long, value_enum)]
    pub mode: Option<ModeChoice>,
    /// Force extrema detection on (default: enabled when K >= 2)
    #[arg(long, action = clap::ArgAction::SetTrue)]
    pub extrema: bool,
    /// Flat key=value configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Time, value, and optional truth columns of an input table.
pub type SeriesColumns<'t> = (&'t [f64], &'t [f64], Option<&'t [f64]>);

/// Pulls time/value/truth columns out of an input table.
pub fn series_columns<'t>(table: &'t Table, path: &Path) -> CliResult<SeriesColumns<'t>> {
    let time = table
        .column("time")
        .ok_or_else(|| CliError::usage(format!("{}: missing `time` column", path.display())))?;
    let value = table
        .column("x")
        .or_else(|| table.column("value"))
        .ok_or_else(|| {
            CliError::usage(format!(
                "{}: missing value column (expected `x` or `value`)",
                path.display()
            ))
        })?;
    check_monotone_time(time, path)?;
    Ok((time, value, table.column("truth")))
}

pub fn run(args: FilterArgs) -> CliResult<ExitCode> {
    let file = FileConfig::load(args.config.as_ref())?;
    let config = args.model.resolve(&file, &TRACKING_DEFAULTS)?;
    let mode = pick(args.mode, &file, "mode", ModeChoice::Zerocross)?;
    let force_extrema = args.extrema || file.get::<bool>("extrema")?.unwrap_or(false);
    let detect = force_extrema || config.k >= 2;

    let table = read_table(&args.input)?;
    let (time, values, truth) = series_columns(&table, &args.input)?;

    let model = make_tvlap(&config)?;
    let mut tracker = Tracker::new(&model, &config, mode.mode(), detect)?;

    let mut headers: Vec<String> = vec!["n".into(), "time".into(), "fhat".into()];
    for d in 1..=config.k {
        headers.push(format!("d{d}"));
    }
    headers.push("p00".into());
    headers.push("event".into());
    let header_refs: Vec<&str> = headers.iter().map(|h| h.as_str()).collect();
    let mut w = CsvWriter::create(&args.out, &header_refs)?;

    let mut event_count = 0usize;
    let burn = burn_in_len(config.k);
    let mut mse_acc = 0.0;
    let mut mse_n = 0usize;
    for (i, &y) in values.iter().enumerate() {
        let out = tracker.push(y)?;
        let mut fields = vec![format!("{}", out.n), fmt_f64(time[i]), fmt_f64(out.fhat)];
        for d in &out.derivatives {
            fields.push(fmt_f64(*d));
        }
        fields.push(fmt_f64(tracker.state().p[(0, 0)]));
        fields.push(match out.event {
            Some(e) => {
                event_count += 1;
                match e.kind {
                    ExtremaKind::Minimum => "min".into(),
                    ExtremaKind::Maximum => "max".into(),
                }
            }
            None => String::new(),
        });
        w.row(&fields)?;

        if let Some(truth) = truth {
            if i >= burn {
                let e = out.fhat - truth[i];
                mse_acc += e * e;
                mse_n += 1;
            }
        }
    }
    w.finish()?;

    println!("samples: {}", values.len());
    println!("events: {event_count}");
    if mse_n > 0 {
        println!("trend mse (post burn-in): {}", mse_acc / mse_n as f64);
    }
    Ok(ExitCode::SUCCESS)
}
