use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use tvlap::analysis::burn_in_len;
use tvlap::filter::{forecast, init_state, step};
use tvlap::matrix::Matrix;
use tvlap::model::{make_special, make_tvlap, GVariant, SpecialKind, StateSpaceModel, TvlapConfig};
use tvlap::simgen::gen_sine_exp;

use crate::config::{pick, CliError, CliResult, FileConfig};
use crate::csvio::{fmt_f64, CsvWriter};

/// Estimation window: samples with t in [0, 100]; the 200-step forecast
/// then covers t in (100, 120].
const EST_SAMPLES: usize = 1001;
const PRED_STEPS: usize = 200;

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Comma-separated model list (subset of tvlap,holt,level)
    #[arg(long)]
    pub models: Option<String>,
    /// Number of trials; trial i uses seed (base seed + i)
    #[arg(long)]
    pub trials: Option<usize>,
    /// Base generator seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Optional per-trial CSV output
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat key=value configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ModelChoice {
    Tvlap,
    Holt,
    Level,
}

impl ModelChoice {
    fn name(self) -> &'static str {
        match self {
            ModelChoice::Tvlap => "tvlap",
            ModelChoice::Holt => "holt",
            ModelChoice::Level => "level",
        }
    }

    /// Reference configuration used by the comparison harness.
    ///
    /// The trend model drives the third derivative directly (identity
    /// driver, variance 300^2) with T = 0.001 and R = 1. The baselines
    /// run at their customary noise levels for this scenario family:
    /// Holt with slope variance 1, the local level with variance 0.13.
    fn build(self) -> StateSpaceModel {
        match self {
            ModelChoice::Tvlap => {
                let mut q = Matrix::zeros(5, 5);
                q[(3, 3)] = 300.0 * 300.0;
                let config = TvlapConfig::new(4, 0.001, GVariant::G3, q, 1.0)
                    .expect("reference configuration is valid");
                make_tvlap(&config).expect("reference configuration is valid")
            }
            ModelChoice::Holt => {
                let q = Matrix::from_rows(&[&[1.0]]).expect("1x1");
                make_special(SpecialKind::Holt, 0.001, q, 1.0).expect("valid")
            }
            ModelChoice::Level => {
                let q = Matrix::from_rows(&[&[0.13]]).expect("1x1");
                make_special(SpecialKind::Level, 0.001, q, 1.0).expect("valid")
            }
        }
    }
}

fn parse_models(text: &str) -> CliResult<Vec<ModelChoice>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let choice = match part.trim().to_ascii_lowercase().as_str() {
            "tvlap" => ModelChoice::Tvlap,
            "holt" => ModelChoice::Holt,
            "level" => ModelChoice::Level,
            other => {
                return Err(CliError::usage(format!(
                    "unknown model {other:?} (expected tvlap|holt|level)"
                )))
            }
        };
        if !out.contains(&choice) {
            out.push(choice);
        }
    }
    if out.is_empty() {
        return Err(CliError::usage("--models must name at least one model"));
    }
    Ok(out)
}

/// Estimation MSE over the post-burn-in estimation window and prediction
/// MSE over the forecast horizon, both against the noiseless truth.
fn score(model: &StateSpaceModel, xs: &[f64], truth: &[f64]) -> (f64, f64) {
    let burn = burn_in_len(model.k);
    let mut state = init_state(model.state_dim(), 1e5).expect("valid dimensions");
    let mut est_acc = 0.0;
    for (i, &y) in xs[..EST_SAMPLES].iter().enumerate() {
        state = step(model, &state, y).expect("finite data").state;
        if i >= burn {
            let e = state.xhat[(0, 0)] - truth[i];
            est_acc += e * e;
        }
    }
    let est = est_acc / (EST_SAMPLES - burn) as f64;

    let mut pred_acc = 0.0;
    for point in forecast(model, &state, PRED_STEPS) {
        let e = point.xhat[(0, 0)] - truth[EST_SAMPLES - 1 + point.k];
        pred_acc += e * e;
    }
    (est, pred_acc / PRED_STEPS as f64)
}

pub fn run(args: CompareArgs) -> CliResult<ExitCode> {
    let file = FileConfig::load(args.config.as_ref())?;
    let models = parse_models(&pick(
        args.models.clone(),
        &file,
        "models",
        "tvlap,holt,level".to_string(),
    )?)?;
    let trials = pick(args.trials, &file, "trials", 10usize)?;
    if trials == 0 {
        return Err(CliError::usage("--trials must be at least 1"));
    }
    let base_seed = pick(args.seed, &file, "seed", 1u64)?;

    let built: Vec<(ModelChoice, StateSpaceModel)> =
        models.iter().map(|m| (*m, m.build())).collect();

    let mut writer = match &args.out {
        Some(path) => Some(CsvWriter::create(
            path,
            &["trial", "model", "est_mse", "pred_mse"],
        )?),
        None => None,
    };

    // trial index -> per-model (est, pred); seeds are shared across
    // models within a trial so every model sees the same data.
    let mut results: Vec<Vec<(f64, f64)>> = vec![Vec::new(); built.len()];
    for trial in 0..trials {
        let scenario = gen_sine_exp(base_seed + trial as u64);
        for (idx, (choice, model)) in built.iter().enumerate() {
            let (est, pred) = score(model, &scenario.x, &scenario.truth);
            results[idx].push((est, pred));
            if let Some(w) = writer.as_mut() {
                w.row(&[
                    format!("{}", trial + 1),
                    choice.name().to_string(),
                    fmt_f64(est),
                    fmt_f64(pred),
                ])?;
            }
        }
    }
    if let Some(w) = writer {
        w.finish()?;
    }

    println!(
        "{:<8} {:>12} {:>12} {:>12} {:>12}",
        "model", "best_est", "mean_est", "best_pred", "mean_pred"
    );
    for (idx, (choice, _)) in built.iter().enumerate() {
        let rs = &results[idx];
        let n = rs.len() as f64;
        let best_est = rs.iter().map(|r| r.0).fold(f64::MAX, f64::min);
        let best_pred = rs.iter().map(|r| r.1).fold(f64::MAX, f64::min);
        let mean_est = rs.iter().map(|r| r.0).sum::<f64>() / n;
        let mean_pred = rs.iter().map(|r| r.1).sum::<f64>() / n;
        println!(
            "{:<8} {:>12.4} {:>12.4} {:>12.4} {:>12.4}",
            choice.name(),
            best_est,
            mean_est,
            best_pred,
            mean_pred
        );
    }
    Ok(ExitCode::SUCCESS)
}
