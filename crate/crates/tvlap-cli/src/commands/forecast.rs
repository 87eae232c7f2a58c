use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use tvlap::analysis::{forecast_extrema, ExtremaKind, ExtremaMode, Tracker};
use tvlap::filter::forecast;
use tvlap::model::make_tvlap;

use crate::config::{pick, CliResult, FileConfig, ModelArgs, TRACKING_DEFAULTS};
use crate::csvio::{fmt_f64, read_table, CsvWriter};

#[derive(Debug, Args)]
pub struct ForecastArgs {
    /// Input CSV with a `time` column and an `x` (or `value`) column
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output CSV path
    #[arg(long)]
    pub out: PathBuf,
    /// Forecast horizon in steps
    #[arg(long)]
    pub steps: Option<usize>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Flat key=value configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn run(args: ForecastArgs) -> CliResult<ExitCode> {
    let file = FileConfig::load(args.config.as_ref())?;
    let config = args.model.resolve(&file, &TRACKING_DEFAULTS)?;
    let steps = pick(args.steps, &file, "steps", 200usize)?;
    if steps == 0 {
        return Err(crate::config::CliError::usage("--steps must be at least 1"));
    }

    let table = read_table(&args.input)?;
    let (_, values, _) = super::filter::series_columns(&table, &args.input)?;

    let model = make_tvlap(&config)?;
    let mut tracker = Tracker::new(&model, &config, ExtremaMode::ZeroCross, false)?;
    for &y in values {
        tracker.push(y)?;
    }
    let state = tracker.state();

    // Predicted extrema along the forecast trajectory (needs K >= 2).
    let mut events: HashMap<usize, ExtremaKind> = HashMap::new();
    if config.k >= 2 {
        for e in forecast_extrema(&model, state, steps, config.epsilon)? {
            events.insert((e.n - state.n) as usize, e.kind);
        }
    }

    let mut w = CsvWriter::create(&args.out, &["k", "fhat", "p00", "event"])?;
    let mut event_count = 0usize;
    for point in forecast(&model, state, steps) {
        let label = match events.get(&point.k) {
            Some(ExtremaKind::Minimum) => {
                event_count += 1;
                "min".to_string()
            }
            Some(ExtremaKind::Maximum) => {
                event_count += 1;
                "max".to_string()
            }
            None => String::new(),
        };
        w.row(&[
            format!("{}", point.k),
            fmt_f64(point.xhat[(0, 0)]),
            fmt_f64(point.p[(0, 0)]),
            label,
        ])?;
    }
    w.finish()?;

    println!("filtered samples: {}", values.len());
    println!("forecast steps: {steps}");
    println!("predicted events: {event_count}");
    Ok(ExitCode::SUCCESS)
}
