//! Executable observability and controllability checks.
//!
//! The Kalman convergence guarantee for these models rests on the
//! observability pair `[Phi, H]` and controllability pair `[Phi, G]`
//! being full rank. Both degrade numerically as the order grows (the
//! transition entries `T^k/k!` shrink toward zero), so the checks report
//! empirical ranks at a stated tolerance instead of claiming a hard
//! order cutoff.

use crate::matrix::{rank, Matrix};
use crate::model::{build_transition, StateSpaceModel};
use crate::{Error, Result};

/// Outcome of the system checks run on a model.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemCheckReport {
    pub observable: bool,
    pub controllable: bool,
    pub obs_rank: usize,
    pub ctrl_rank: usize,
    /// Largest elementwise error of the transition-power identity
    /// `Phi(T)^k = Phi(kT)` over `k = 1..=dim`, evaluated on the trend
    /// block. A self-test of the Taylor structure.
    pub phi_power_max_err: f64,
}

/// Stacked observability matrix `[H; H Phi; ..; H Phi^(dim-1)]`.
pub fn observability_matrix(phi: &Matrix, h: &Matrix) -> Result<Matrix> {
    if !phi.is_square() {
        return Err(Error::NotSquare {
            rows: phi.rows(),
            cols: phi.cols(),
        });
    }
    if h.cols() != phi.rows() {
        return Err(Error::DimensionMismatch {
            op: "observability_matrix",
            left: (phi.rows(), phi.cols()),
            right: (h.rows(), h.cols()),
        });
    }
    let dim = phi.rows();
    let mut out = h.clone();
    let mut row = h.clone();
    for _ in 1..dim {
        row = row.matmul(phi)?;
        out = out.vstack(&row)?;
    }
    Ok(out)
}

/// Horizontally stacked controllability matrix `[G, Phi G, .., Phi^(dim-1) G]`.
pub fn controllability_matrix(phi: &Matrix, g: &Matrix) -> Result<Matrix> {
    if !phi.is_square() {
        return Err(Error::NotSquare {
            rows: phi.rows(),
            cols: phi.cols(),
        });
    }
    if g.rows() != phi.rows() {
        return Err(Error::DimensionMismatch {
            op: "controllability_matrix",
            left: (phi.rows(), phi.cols()),
            right: (g.rows(), g.cols()),
        });
    }
    let dim = phi.rows();
    let mut out = g.clone();
    let mut block = g.clone();
    for _ in 1..dim {
        block = phi.matmul(&block)?;
        out = out.hstack(&block)?;
    }
    Ok(out)
}

/// Core check on raw matrices; `k` and `t` locate the trend block inside
/// a possibly augmented transition. Called by the model constructors so
/// every model carries its report.
pub(crate) fn check_raw(
    phi: &Matrix,
    h: &Matrix,
    g: &Matrix,
    k: usize,
    t: f64,
    tol: f64,
) -> SystemCheckReport {
    let dim = phi.rows();
    let obs = observability_matrix(phi, h).expect("shapes validated by caller");
    let ctrl = controllability_matrix(phi, g).expect("shapes validated by caller");
    let obs_rank = rank(&obs, tol);
    let ctrl_rank = rank(&ctrl, tol);

    // Transition-power self-test on the trend block only; the companion
    // block of an augmented model follows different dynamics.
    let trend_dim = k + 1;
    let mut max_err = 0.0f64;
    if trend_dim <= dim {
        for step in 1..=dim {
            let powered = phi.pow(step).expect("phi is square");
            let block = powered
                .block(0, 0, trend_dim, trend_dim)
                .expect("trend block fits");
            let direct = build_transition(k, step as f64 * t);
            let err = block.sub(&direct).expect("same shape").max_abs();
            max_err = max_err.max(err);
        }
    }

    SystemCheckReport {
        observable: obs_rank == dim,
        controllable: ctrl_rank == dim,
        obs_rank,
        ctrl_rank,
        phi_power_max_err: max_err,
    }
}

/// Runs the observability/controllability checks on a model at the given
/// rank tolerance.
pub fn check_system(model: &StateSpaceModel, tol: f64) -> Result<SystemCheckReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument {
            what: "rank tolerance must be positive",
        });
    }
    Ok(check_raw(
        &model.phi, &model.h, &model.g, model.k, model.t, tol,
    ))
}
