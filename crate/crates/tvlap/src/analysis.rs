//! Online trend tracking, extrema detection, and fault diagnosis.
//!
//! [`Tracker`] wraps the Kalman recursion into a strictly one-pass
//! consumer: each sample yields the trend estimate, its derivatives, and
//! possibly an extremum event. Detection works on the estimated first
//! and second derivatives and comes in two modes:
//!
//! * [`ExtremaMode::Threshold`] — the literal rule: an extremum fires
//!   when `|d1| < epsilon` with a signed `d2`. Under measurement noise a
//!   sampled derivative estimate almost never lands inside a tight
//!   epsilon band, so this mode is mostly of historical interest.
//! * [`ExtremaMode::ZeroCross`] (default) — an extremum fires when the
//!   first-derivative estimate crosses zero with the matching
//!   second-derivative sign.
//!
//! Events are debounced to one per crossing, suppressed during the
//! burn-in window while the diffuse prior collapses, and forced to
//! alternate in kind (a candidate repeating the previous kind is
//! dropped, since between two maxima of a continuous trend there must be
//! a minimum).

use alloc::string::String;
use alloc::vec::Vec;

use crate::filter::{forecast, init_state, step, FilterState};
use crate::model::{make_tvlap, StateSpaceModel, TvlapConfig};
use crate::{Error, Result};

/// Classification of a detected extremum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremaKind {
    Minimum,
    Maximum,
}

/// Extrema detection rule; see the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExtremaMode {
    Threshold,
    #[default]
    ZeroCross,
}

/// A detected or forecast extremum of the trend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremaEvent {
    /// Sample index (filter time) of the event.
    pub n: i64,
    pub kind: ExtremaKind,
    /// First-derivative estimate at detection.
    pub d1: f64,
    /// Second-derivative estimate at detection.
    pub d2: f64,
}

/// Per-sample tracker output.
#[derive(Debug, Clone)]
pub struct TrackOutput {
    pub n: i64,
    /// Trend estimate, state entry 0.
    pub fhat: f64,
    /// Derivative estimates, state entries `1..=K`.
    pub derivatives: Vec<f64>,
    pub event: Option<ExtremaEvent>,
}

/// Pure classification rule shared by tracking and forecasting.
///
/// In threshold mode a minimum (maximum) requires `|d1| < epsilon` and
/// `d2 > 0` (`d2 < 0`), the literal rule. In zero-cross mode `d1_prev`
/// must straddle zero with the matching `d2` sign, and `|d2|` must
/// exceed `epsilon`: a curvature estimate inside the dead-band counts as
/// zero (indeterminate), which keeps the residual ringing of a settled
/// filter from registering as extrema. With no previous derivative
/// available the answer is `None`.
pub fn classify_extremum(
    d1: f64,
    d2: f64,
    epsilon: f64,
    mode: ExtremaMode,
    d1_prev: Option<f64>,
) -> Option<ExtremaKind> {
    match mode {
        ExtremaMode::Threshold => {
            if libm::fabs(d1) < epsilon && d2 > 0.0 {
                Some(ExtremaKind::Minimum)
            } else if libm::fabs(d1) < epsilon && d2 < 0.0 {
                Some(ExtremaKind::Maximum)
            } else {
                None
            }
        }
        ExtremaMode::ZeroCross => {
            let prev = d1_prev?;
            if prev < 0.0 && d1 >= 0.0 && d2 > epsilon {
                Some(ExtremaKind::Minimum)
            } else if prev > 0.0 && d1 <= 0.0 && d2 < -epsilon {
                Some(ExtremaKind::Maximum)
            } else {
                None
            }
        }
    }
}

/// Burn-in length: events and diagnosis statistics are suppressed while
/// the near-infinite prior covariance collapses.
pub fn burn_in_len(k: usize) -> usize {
    (5 * (k + 1)).max(50)
}

/// Streaming trend tracker with O(1) state per sample.
#[derive(Debug, Clone)]
pub struct Tracker {
    model: StateSpaceModel,
    epsilon: f64,
    mode: ExtremaMode,
    detect: bool,
    burn_in: usize,
    state: FilterState,
    prev_d1: Option<f64>,
    last_kind: Option<ExtremaKind>,
}

impl Tracker {
    /// Builds a tracker over `model`. `detect` enables extrema events,
    /// which require a second-derivative state (`K >= 2`).
    pub fn new(
        model: &StateSpaceModel,
        config: &TvlapConfig,
        mode: ExtremaMode,
        detect: bool,
    ) -> Result<Self> {
        if detect && model.k < 2 {
            return Err(Error::ExtremaNeedsOrderTwo { k: model.k });
        }
        let state = init_state(model.state_dim(), config.infinity)?;
        Ok(Self {
            model: model.clone(),
            epsilon: config.epsilon,
            mode,
            detect,
            burn_in: burn_in_len(model.k),
            state,
            prev_d1: None,
            last_kind: None,
        })
    }

    /// Consumes one observation and emits the per-sample output.
    pub fn push(&mut self, y: f64) -> Result<TrackOutput> {
        let out = step(&self.model, &self.state, y)?;
        self.state = out.state;
        let n = self.state.n;
        let fhat = self.state.xhat[(0, 0)];
        let derivatives: Vec<f64> = (1..=self.model.k)
            .map(|i| self.state.xhat[(i, 0)])
            .collect();

        let mut event = None;
        if self.detect {
            let d1 = derivatives[0];
            let d2 = derivatives[1];
            if n >= self.burn_in as i64 {
                if let Some(kind) = classify_extremum(d1, d2, self.epsilon, self.mode, self.prev_d1)
                {
                    if self.last_kind != Some(kind) {
                        event = Some(ExtremaEvent { n, kind, d1, d2 });
                        self.last_kind = Some(kind);
                    }
                }
            }
            self.prev_d1 = Some(d1);
        }

        Ok(TrackOutput {
            n,
            fhat,
            derivatives,
            event,
        })
    }

    /// Current posterior, e.g. for forecasting past the stream end.
    pub fn state(&self) -> &FilterState {
        &self.state
    }
}

/// One-pass batch tracking over a full stream.
pub fn track(
    model: &StateSpaceModel,
    stream: &[f64],
    config: &TvlapConfig,
    mode: ExtremaMode,
    detect: bool,
) -> Result<Vec<TrackOutput>> {
    let mut tracker = Tracker::new(model, config, mode, detect)?;
    let mut out = Vec::with_capacity(stream.len());
    for &y in stream {
        out.push(tracker.push(y)?);
    }
    Ok(out)
}

/// Scans the deterministic forecast trajectory for future extrema via
/// the zero-cross rule. Event indices continue the filter time, i.e.
/// `state.n + k` for the `k`-th forecast step.
pub fn forecast_extrema(
    model: &StateSpaceModel,
    state: &FilterState,
    steps: usize,
    epsilon: f64,
) -> Result<Vec<ExtremaEvent>> {
    if model.k < 2 {
        return Err(Error::ExtremaNeedsOrderTwo { k: model.k });
    }
    if steps == 0 {
        return Err(Error::InvalidArgument {
            what: "forecast horizon must be at least 1 step",
        });
    }
    let mut events = Vec::new();
    let mut prev = Some(state.xhat[(1, 0)]);
    let mut last_kind: Option<ExtremaKind> = None;
    for point in forecast(model, state, steps) {
        let d1 = point.xhat[(1, 0)];
        let d2 = point.xhat[(2, 0)];
        if let Some(kind) = classify_extremum(d1, d2, epsilon, ExtremaMode::ZeroCross, prev) {
            if last_kind != Some(kind) {
                events.push(ExtremaEvent {
                    n: state.n + point.k as i64,
                    kind,
                    d1,
                    d2,
                });
                last_kind = Some(kind);
            }
        }
        prev = Some(d1);
    }
    Ok(events)
}

/// Running variance accumulator for a zero-mean sequence: after `n`
/// updates the variance is the plain average of squares.
#[derive(Debug, Clone, Copy, Default)]
pub struct VarianceMonitor {
    count: u64,
    sum_squares: f64,
}

impl VarianceMonitor {
    pub fn new() -> Self {
        Self::default()
    }

    /// Absorbs one value and returns the updated variance.
    pub fn update(&mut self, value: f64) -> f64 {
        self.count += 1;
        self.sum_squares += value * value;
        self.variance()
    }

    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum_squares / self.count as f64
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }
}

/// Per-channel verdict from [`diagnose`].
#[derive(Debug, Clone)]
pub struct ChannelDiagnosis {
    pub name: String,
    /// Variance of the post-burn-in first-derivative estimates.
    pub variance: f64,
    pub faulty: bool,
}

/// Flags channels whose trend-derivative variance stands out.
///
/// Each channel is tracked independently with the given configuration;
/// the post-burn-in first-derivative estimates feed a
/// [`VarianceMonitor`]. A channel is faulty iff its variance exceeds
/// `ratio` times the median across channels — a relative cut, robust as
/// long as at most half the channels are bad.
pub fn diagnose(
    channels: &[(&str, &[f64])],
    config: &TvlapConfig,
    ratio: f64,
) -> Result<Vec<ChannelDiagnosis>> {
    if channels.len() < 2 {
        return Err(Error::TooFewChannels {
            got: channels.len(),
        });
    }
    if ratio.is_nan() || ratio <= 1.0 {
        return Err(Error::InvalidArgument {
            what: "fault ratio must exceed 1",
        });
    }
    if config.k < 1 {
        return Err(Error::InvalidArgument {
            what: "diagnosis needs a first-derivative state (K >= 1)",
        });
    }
    let first_len = channels[0].1.len();
    for (_, data) in channels {
        if data.len() != first_len {
            return Err(Error::ChannelLengthMismatch {
                first: first_len,
                other: data.len(),
            });
        }
    }

    let model = make_tvlap(config)?;
    let burn = burn_in_len(config.k) as i64;
    let mut variances = Vec::with_capacity(channels.len());
    for (name, data) in channels {
        let mut tracker = Tracker::new(&model, config, ExtremaMode::ZeroCross, false)?;
        let mut monitor = VarianceMonitor::new();
        for &y in *data {
            let out = tracker.push(y)?;
            if out.n >= burn {
                monitor.update(out.derivatives[0]);
            }
        }
        variances.push((String::from(*name), monitor.variance()));
    }

    let mut sorted: Vec<f64> = variances.iter().map(|(_, v)| *v).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("variances are finite"));
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };

    Ok(variances
        .into_iter()
        .map(|(name, variance)| ChannelDiagnosis {
            faulty: variance > ratio * median,
            name,
            variance,
        })
        .collect())
}
