//! Kalman recursion, forecasting, and the covariance Riccati iteration.
//!
//! The measurement update uses the Joseph-form covariance
//! `(I - KH) P (I - KH)' + K R K'`, which stays positive semidefinite
//! even when the recursion starts from the near-infinite prior used
//! here. The covariance is re-symmetrized after every update. Each step
//! surfaces the innovation and its variance so callers can monitor
//! filter health.

use alloc::vec::Vec;

use crate::matrix::Matrix;
use crate::model::{AugmentedModel, StateSpaceModel, DEFAULT_INFINITY};
use crate::{Error, Result};

/// Posterior state estimate and covariance at discrete time `n`.
///
/// `n = -1` denotes the initial prior, before any measurement; the first
/// call to [`step`] produces the posterior at `n = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub n: i64,
    /// Posterior mean, a `dim x 1` column.
    pub xhat: Matrix,
    /// Posterior covariance, symmetric positive semidefinite.
    pub p: Matrix,
}

/// One filter step: the new posterior plus the innovation it consumed.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub state: FilterState,
    /// One-step prediction error `y - H x(n|n-1)`.
    pub innovation: f64,
    /// Predicted variance of the innovation.
    pub innovation_variance: f64,
}

/// Mean forecast and covariance `k` steps past the filtered data.
#[derive(Debug, Clone)]
pub struct ForecastPoint {
    pub k: usize,
    pub xhat: Matrix,
    pub p: Matrix,
}

/// Outcome of the covariance Riccati recursion.
#[derive(Debug, Clone)]
pub struct RiccatiResult {
    pub converged: bool,
    pub p_steady: Matrix,
    pub iters: usize,
}

/// Diffuse initial state: zero mean, `infinity * I` covariance, `n = -1`.
pub fn init_state(dim: usize, infinity: f64) -> Result<FilterState> {
    if dim == 0 {
        return Err(Error::InvalidArgument {
            what: "state dimension must be at least 1",
        });
    }
    if !infinity.is_finite() || infinity <= 0.0 {
        return Err(Error::InvalidArgument {
            what: "initial covariance scale must be positive and finite",
        });
    }
    Ok(FilterState {
        n: -1,
        xhat: Matrix::zeros(dim, 1),
        p: Matrix::identity(dim).scale(infinity),
    })
}

/// Propagates mean and covariance one step through the state equation.
fn time_update(
    phi: &Matrix,
    process_noise: &Matrix,
    xhat: &Matrix,
    p: &Matrix,
) -> Result<(Matrix, Matrix)> {
    let x = phi.matmul(xhat)?;
    let p = phi
        .matmul(p)?
        .matmul(&phi.transpose())?
        .add(process_noise)?
        .symmetrized();
    Ok((x, p))
}

/// Joseph-form measurement update, optionally with a process/measurement
/// cross covariance `M = E[w v']`. With `cross = None` this is the
/// standard update; the correlated variant extends the gain numerator by
/// `M`, the innovation variance by `H M + M' H'`, and the covariance by
/// the matching cross terms. Both paths share this code so that a zero
/// cross covariance reproduces the standard update bit for bit.
fn measurement_update(
    h: &Matrix,
    r: f64,
    cross: Option<&Matrix>,
    xhat: Matrix,
    p: Matrix,
    y: f64,
) -> Result<(Matrix, Matrix, f64, f64)> {
    if !y.is_finite() {
        return Err(Error::NonFinite {
            what: "measurement",
        });
    }
    let dim = p.rows();
    let innovation = y - h.matmul(&xhat)?[(0, 0)];

    let pht = p.matmul(&h.transpose())?;
    let mut s = h.matmul(&pht)?[(0, 0)] + r;
    let numerator = match cross {
        Some(m) => {
            let hm = h.matmul(m)?[(0, 0)];
            s += 2.0 * hm;
            pht.add(m)?
        }
        None => pht,
    };
    if s.is_nan() || s <= 0.0 {
        return Err(Error::NonPositiveInnovationVariance { value: s });
    }

    let gain = numerator.scale(1.0 / s);
    let xnew = xhat.add(&gain.scale(innovation))?;

    let a = Matrix::identity(dim).sub(&gain.matmul(h)?)?;
    let mut pnew = a
        .matmul(&p)?
        .matmul(&a.transpose())?
        .add(&gain.scale(r).matmul(&gain.transpose())?)?;
    if let Some(m) = cross {
        // -(I - KH) M K' and its transpose.
        let c = a.matmul(m)?.matmul(&gain.transpose())?;
        pnew = pnew.sub(&c)?.sub(&c.transpose())?;
    }
    Ok((xnew, pnew.symmetrized(), innovation, s))
}

/// One predict/update cycle: the returned state is the posterior at
/// `state.n + 1` given all measurements through it.
pub fn step(model: &StateSpaceModel, state: &FilterState, y: f64) -> Result<StepResult> {
    let qeff = model.process_noise();
    let (x, p) = time_update(&model.phi, &qeff, &state.xhat, &state.p)?;
    let (xnew, pnew, innovation, s) = measurement_update(&model.h, model.r, None, x, p, y)?;
    Ok(StepResult {
        state: FilterState {
            n: state.n + 1,
            xhat: xnew,
            p: pnew,
        },
        innovation,
        innovation_variance: s,
    })
}

/// Predict/update cycle for an augmented colored-noise model, accounting
/// for the correlation between the driving white sequence in the state
/// and in the measurement. Reduces exactly to [`step`] on the stacked
/// model when the cross covariance is zero.
pub fn step_correlated(model: &AugmentedModel, state: &FilterState, y: f64) -> Result<StepResult> {
    let qeff = model.model.process_noise();
    let (x, p) = time_update(&model.model.phi, &qeff, &state.xhat, &state.p)?;
    let cross = if model.has_cross_correlation() {
        Some(&model.cross_cov)
    } else {
        None
    };
    let (xnew, pnew, innovation, s) =
        measurement_update(&model.model.h, model.model.r, cross, x, p, y)?;
    Ok(StepResult {
        state: FilterState {
            n: state.n + 1,
            xhat: xnew,
            p: pnew,
        },
        innovation,
        innovation_variance: s,
    })
}

/// Open-loop forecast: iterates the time update only, one point per step.
pub fn forecast(model: &StateSpaceModel, state: &FilterState, steps: usize) -> Vec<ForecastPoint> {
    let qeff = model.process_noise();
    let mut x = state.xhat.clone();
    let mut p = state.p.clone();
    let mut out = Vec::with_capacity(steps);
    for k in 1..=steps {
        let (xn, pn) =
            time_update(&model.phi, &qeff, &x, &p).expect("forecast shapes are fixed by the model");
        x = xn;
        p = pn;
        out.push(ForecastPoint {
            k,
            xhat: x.clone(),
            p: p.clone(),
        });
    }
    out
}

/// Iterates the (data-independent) covariance recursion from `p0` until
/// the posterior covariance moves less than `tol` in max-abs norm.
pub fn riccati_recursion(
    model: &StateSpaceModel,
    p0: &Matrix,
    max_iter: usize,
    tol: f64,
) -> Result<RiccatiResult> {
    if max_iter == 0 {
        return Err(Error::InvalidArgument {
            what: "max_iter must be at least 1",
        });
    }
    let dim = model.state_dim();
    if p0.rows() != dim || p0.cols() != dim {
        return Err(Error::DimensionMismatch {
            op: "riccati_recursion",
            left: (dim, dim),
            right: (p0.rows(), p0.cols()),
        });
    }
    let qeff = model.process_noise();
    let zero_x = Matrix::zeros(dim, 1);
    let mut p = p0.clone();
    for it in 1..=max_iter {
        let (_, predicted) = time_update(&model.phi, &qeff, &zero_x, &p)?;
        let (_, posterior, _, _) =
            measurement_update(&model.h, model.r, None, zero_x.clone(), predicted, 0.0)?;
        let delta = posterior.sub(&p)?.max_abs();
        p = posterior;
        if delta < tol {
            return Ok(RiccatiResult {
                converged: true,
                p_steady: p,
                iters: it,
            });
        }
    }
    Ok(RiccatiResult {
        converged: false,
        p_steady: p,
        iters: max_iter,
    })
}

/// [`riccati_recursion`] from the standard diffuse start `1e5 * I`.
pub fn riccati_converged(
    model: &StateSpaceModel,
    max_iter: usize,
    tol: f64,
) -> Result<RiccatiResult> {
    let p0 = Matrix::identity(model.state_dim()).scale(DEFAULT_INFINITY);
    riccati_recursion(model, &p0, max_iter, tol)
}
