//! State-space model construction.
//!
//! The trend model keeps `f(n)` and its first `K` derivatives as state.
//! Over one time gap `T` the state advances by the Taylor-series
//! transition matrix with entries `T^(j-i)/(j-i)!`, and the measurement
//! row `[1, 0, .., 0]` reads the trend value. The process-noise driver
//! `G` shapes where model error is injected; three standard variants are
//! provided. For colored (ARMA) measurement noise the companion form of
//! the noise transfer function is stacked onto the trend state so the
//! correlated-noise Kalman recursion can treat it exactly.

use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::{Matrix, DEFAULT_RANK_TOL};
use crate::verify::{check_raw, SystemCheckReport};
use crate::{Error, Result};

/// Hard cap on the polynomial order. Observability degrades as the
/// transition entries `T^k/k!` underflow toward zero, so very high orders
/// are rejected outright.
pub const MAX_ORDER: usize = 12;

/// Default threshold under which an estimated first derivative counts as
/// zero in threshold-mode extrema detection.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Default scale of the near-infinite initial covariance.
pub const DEFAULT_INFINITY: f64 = 1e5;

/// Process-noise driver variants, all of which keep the system
/// controllable for moderate orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GVariant {
    /// Column `[T^K/K!, .., T, 1]'`: a scalar disturbance on the highest
    /// derivative, propagated down the Taylor weights.
    G1,
    /// Diagonal of the same weights: one disturbance per state entry,
    /// scaled by its Taylor weight.
    G2,
    /// Identity: one unscaled disturbance per state entry.
    G3,
}

/// Configuration of a trend model.
#[derive(Debug, Clone)]
pub struct TvlapConfig {
    /// Polynomial order `K`; the state has `K + 1` entries.
    pub k: usize,
    /// Model time gap between consecutive samples. This is a pure model
    /// parameter: it may differ from the physical sampling step, in which
    /// case the derivative estimates absorb the scale difference.
    pub t: f64,
    /// Process-noise driver shape.
    pub g_variant: GVariant,
    /// Process-noise covariance; `1x1` for [`GVariant::G1`], `(K+1)x(K+1)`
    /// for the other variants.
    pub q: Matrix,
    /// Measurement-noise variance.
    pub r: f64,
    /// Derivative-zero threshold for threshold-mode extrema detection.
    pub epsilon: f64,
    /// Scale of the initial covariance `P = infinity * I`.
    pub infinity: f64,
}

impl TvlapConfig {
    pub fn new(k: usize, t: f64, g_variant: GVariant, q: Matrix, r: f64) -> Result<Self> {
        let config = Self {
            k,
            t,
            g_variant,
            q,
            r,
            epsilon: DEFAULT_EPSILON,
            infinity: DEFAULT_INFINITY,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn with_infinity(mut self, infinity: f64) -> Result<Self> {
        self.infinity = infinity;
        self.validate()?;
        Ok(self)
    }

    pub fn state_dim(&self) -> usize {
        self.k + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.k > MAX_ORDER {
            return Err(Error::InvalidArgument {
                what: "polynomial order K must be at most 12",
            });
        }
        if !self.t.is_finite() || self.t <= 0.0 {
            return Err(Error::InvalidArgument {
                what: "time gap T must be positive and finite",
            });
        }
        if !self.r.is_finite() || self.r <= 0.0 {
            return Err(Error::InvalidArgument {
                what: "measurement variance R must be positive and finite",
            });
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::InvalidArgument {
                what: "epsilon must be positive",
            });
        }
        if self.infinity.is_nan() || self.infinity <= 0.0 {
            return Err(Error::InvalidArgument {
                what: "infinity must be positive",
            });
        }
        let expected = match self.g_variant {
            GVariant::G1 => 1,
            GVariant::G2 | GVariant::G3 => self.k + 1,
        };
        if self.q.rows() != expected || self.q.cols() != expected {
            return Err(Error::QDimension {
                expected,
                rows: self.q.rows(),
                cols: self.q.cols(),
            });
        }
        if !is_symmetric_psd(&self.q) {
            return Err(Error::InvalidArgument {
                what: "Q must be symmetric positive semidefinite",
            });
        }
        Ok(())
    }
}

/// Symmetry plus an unpivoted LDL' sweep with a small negative slack;
/// adequate for the small covariance matrices configured here.
fn is_symmetric_psd(q: &Matrix) -> bool {
    if !q.is_square() {
        return false;
    }
    let n = q.rows();
    let scale = q.max_abs().max(1.0);
    let tol = 1e-12 * scale;
    for i in 0..n {
        for j in (i + 1)..n {
            if libm::fabs(q[(i, j)] - q[(j, i)]) > 1e-9 * scale {
                return false;
            }
        }
    }
    let mut m = q.clone();
    for k in 0..n {
        let pivot = m[(k, k)];
        if pivot < -tol {
            return false;
        }
        if pivot <= tol {
            continue; // semidefinite direction; nothing to eliminate
        }
        for i in (k + 1)..n {
            let f = m[(i, k)] / pivot;
            for j in k..n {
                let mkj = m[(k, j)];
                m[(i, j)] -= f * mkj;
            }
        }
    }
    true
}

/// Builds the `(K+1) x (K+1)` Taylor transition matrix with entries
/// `T^(j-i)/(j-i)!` above and on the diagonal.
pub fn build_transition(k: usize, t: f64) -> Matrix {
    let dim = k + 1;
    let mut phi = Matrix::zeros(dim, dim);
    // Taylor weights T^d/d! for offsets d = 0..K.
    let mut weights = vec![1.0; dim];
    for d in 1..dim {
        weights[d] = weights[d - 1] * t / d as f64;
    }
    for i in 0..dim {
        for j in i..dim {
            phi[(i, j)] = weights[j - i];
        }
    }
    phi
}

/// Measurement row `[1, 0, .., 0]` of width `K + 1`.
pub fn build_measurement(k: usize) -> Matrix {
    let mut h = Matrix::zeros(1, k + 1);
    h[(0, 0)] = 1.0;
    h
}

/// Builds the noise driver for the chosen variant.
pub fn build_noise_driver(k: usize, t: f64, variant: GVariant) -> Matrix {
    let dim = k + 1;
    // Entry i of the G1 column is T^(K-i)/(K-i)!.
    let mut weights = vec![1.0; dim];
    for d in 1..dim {
        weights[d] = weights[d - 1] * t / d as f64;
    }
    match variant {
        GVariant::G1 => {
            let mut g = Matrix::zeros(dim, 1);
            for i in 0..dim {
                g[(i, 0)] = weights[k - i];
            }
            g
        }
        GVariant::G2 => {
            let mut g = Matrix::zeros(dim, dim);
            for i in 0..dim {
                g[(i, i)] = weights[k - i];
            }
            g
        }
        GVariant::G3 => Matrix::identity(dim),
    }
}

/// Assembled linear system: state `X(n+1) = Phi X(n) + G W(n)`,
/// measurement `Y(n) = H X(n) + V(n)` with `var W = Q`, `var V = r`.
#[derive(Debug, Clone)]
pub struct StateSpaceModel {
    pub phi: Matrix,
    pub h: Matrix,
    pub g: Matrix,
    pub q: Matrix,
    pub r: f64,
    /// Polynomial order of the trend block.
    pub k: usize,
    /// Model time gap.
    pub t: f64,
    /// Observability/controllability report computed at construction.
    /// A failed check downgrades to this advisory flag rather than an
    /// error: the filter still runs, only the convergence guarantee is
    /// lost.
    pub check: SystemCheckReport,
}

impl StateSpaceModel {
    pub fn state_dim(&self) -> usize {
        self.phi.rows()
    }

    /// Effective per-step process-noise covariance `G Q G'`.
    pub fn process_noise(&self) -> Matrix {
        self.g
            .matmul(&self.q)
            .and_then(|gq| gq.matmul(&self.g.transpose()))
            .expect("driver and covariance shapes are validated at construction")
    }
}

/// Assembles the trend model for a validated configuration.
pub fn make_tvlap(config: &TvlapConfig) -> Result<StateSpaceModel> {
    config.validate()?;
    let phi = build_transition(config.k, config.t);
    let h = build_measurement(config.k);
    let g = build_noise_driver(config.k, config.t, config.g_variant);
    let check = check_raw(&phi, &h, &g, config.k, config.t, DEFAULT_RANK_TOL);
    Ok(StateSpaceModel {
        phi,
        h,
        g,
        q: config.q.clone(),
        r: config.r,
        k: config.k,
        t: config.t,
        check,
    })
}

/// Named special cases of the trend model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialKind {
    /// Local level model (order 0).
    Level,
    /// Holt's linear trend method (order 1).
    Holt,
    /// Static target model (order 0).
    Static,
    /// Constant velocity (order 1).
    Cv,
    /// Constant acceleration (order 2).
    Ca,
}

impl SpecialKind {
    pub fn order(self) -> usize {
        match self {
            SpecialKind::Level | SpecialKind::Static => 0,
            SpecialKind::Holt | SpecialKind::Cv => 1,
            SpecialKind::Ca => 2,
        }
    }
}

/// Builds a named special case with the G1 driver.
pub fn make_special(kind: SpecialKind, t: f64, q: Matrix, r: f64) -> Result<StateSpaceModel> {
    let config = TvlapConfig::new(kind.order(), t, GVariant::G1, q, r)?;
    make_tvlap(&config)
}

/// ARMA(p, q) noise description via the transfer function
///
/// ```text
///         theta_0 + theta_1 z^-1 + .. + theta_q z^-q
/// H(z) = --------------------------------------------
///           1 + phi_1 z^-1 + .. + phi_p z^-p
/// ```
///
/// Sign convention: `phi_coeffs` are stored exactly as they appear in the
/// denominator above, i.e. an AR(1) process `v(n) = 0.5 v(n-1) + e(n)` has
/// `phi_coeffs = [-0.5]`. Conventions vary across texts; check yours.
///
/// Construction verifies stability of the autoregressive polynomial by
/// powering the companion matrix: the spec is rejected unless the 200th
/// power has decayed below `1e-6` of the companion's own scale, which
/// admits spectral radii up to roughly 0.93.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmaSpec {
    phi: Vec<f64>,
    theta: Vec<f64>,
}

impl ArmaSpec {
    pub fn new(phi_coeffs: Vec<f64>, theta_coeffs: Vec<f64>) -> Result<Self> {
        if theta_coeffs.is_empty() {
            return Err(Error::InvalidArgument {
                what: "theta coefficients must be non-empty",
            });
        }
        if phi_coeffs
            .iter()
            .chain(theta_coeffs.iter())
            .any(|c| !c.is_finite())
        {
            return Err(Error::NonFinite {
                what: "ARMA coefficients",
            });
        }
        let spec = Self {
            phi: phi_coeffs,
            theta: theta_coeffs,
        };
        if spec.order() > 0 {
            let xi = spec.companion();
            let scale = xi.max_abs();
            if scale > 0.0 {
                let powered = xi.pow(200).expect("companion matrix is square");
                let shrunk = powered.max_abs() < 1e-6 * scale;
                if !shrunk {
                    return Err(Error::UnstableAr);
                }
            }
        }
        Ok(spec)
    }

    /// White noise with gain `theta_0`.
    pub fn white(theta0: f64) -> Result<Self> {
        Self::new(Vec::new(), vec![theta0])
    }

    pub fn phi_coeffs(&self) -> &[f64] {
        &self.phi
    }

    pub fn theta_coeffs(&self) -> &[f64] {
        &self.theta
    }

    /// State dimension `r = max(p, q)` of the companion form.
    pub fn order(&self) -> usize {
        self.phi.len().max(self.theta.len() - 1)
    }

    fn phi_padded(&self, j: usize) -> f64 {
        self.phi.get(j - 1).copied().unwrap_or(0.0)
    }

    fn theta_padded(&self, j: usize) -> f64 {
        self.theta.get(j).copied().unwrap_or(0.0)
    }

    /// Companion matrix with ones on the superdiagonal and
    /// `[-phi_r, .., -phi_1]` as the last row.
    fn companion(&self) -> Matrix {
        let r = self.order();
        let mut xi = Matrix::zeros(r, r);
        for i in 0..r.saturating_sub(1) {
            xi[(i, i + 1)] = 1.0;
        }
        for j in 0..r {
            xi[(r - 1, j)] = -self.phi_padded(r - j);
        }
        xi
    }
}

/// Companion-form state space of an ARMA transfer function:
/// `xi(n+1) = Xi xi(n) + Upsilon e(n)`, `v(n) = Pi xi(n) + lambda e(n)`.
#[derive(Debug, Clone)]
pub struct ArmaCompanion {
    pub xi: Matrix,
    pub upsilon: Matrix,
    pub pi: Matrix,
}

/// Result of [`arma_to_state_space`]. `companion` is `None` for the
/// degenerate white case `r = 0`, where the transfer function is the pure
/// gain `lambda`.
#[derive(Debug, Clone)]
pub struct ArmaStateSpace {
    pub lambda: f64,
    pub companion: Option<ArmaCompanion>,
}

/// Converts an ARMA spec to companion-form state space. After splitting
/// off the direct feedthrough `theta_0`, the remaining strictly proper
/// part has numerator coefficients `beta_i = theta_i - theta_0 phi_i`,
/// which appear reversed in the output row `Pi = [beta_r, .., beta_1]`.
pub fn arma_to_state_space(spec: &ArmaSpec) -> ArmaStateSpace {
    let r = spec.order();
    let lambda = spec.theta[0];
    if r == 0 {
        return ArmaStateSpace {
            lambda,
            companion: None,
        };
    }
    let xi = spec.companion();
    let mut upsilon = Matrix::zeros(r, 1);
    upsilon[(r - 1, 0)] = 1.0;
    let mut pi = Matrix::zeros(1, r);
    for j in 0..r {
        let i = r - j; // beta index for output position j
        pi[(0, j)] = spec.theta_padded(i) - lambda * spec.phi_padded(i);
    }
    ArmaStateSpace {
        lambda,
        companion: Some(ArmaCompanion { xi, upsilon, pi }),
    }
}

/// Trend model stacked with an ARMA noise state.
///
/// `model` holds the stacked system of dimension `K + 1 + r`; its `r`
/// field is the effective measurement variance `lambda^2 * innov_var`.
/// `cross_cov` is the per-step covariance between the driven process
/// noise and the measurement noise, nonzero only in the ARMA block.
#[derive(Debug, Clone)]
pub struct AugmentedModel {
    pub model: StateSpaceModel,
    pub cross_cov: Matrix,
    pub innov_var: f64,
}

impl AugmentedModel {
    /// True when the cross covariance vanishes, i.e. filtering reduces to
    /// the standard recursion on the stacked model.
    pub fn has_cross_correlation(&self) -> bool {
        self.cross_cov.max_abs() > 0.0
    }
}

/// Stacks an ARMA noise model onto a trend model.
///
/// The stacked transition is block-diagonal in the trend and companion
/// blocks, the measurement row becomes `[H | Pi]`, and the driving white
/// sequence of variance `innov_var` enters both the companion state and
/// the measurement, which is what `cross_cov` records. A white spec
/// (`r = 0`) returns the base model unchanged except for the measurement
/// variance `lambda^2 * innov_var`.
pub fn augment(base: &StateSpaceModel, spec: &ArmaSpec, innov_var: f64) -> Result<AugmentedModel> {
    if !innov_var.is_finite() || innov_var <= 0.0 {
        return Err(Error::InvalidArgument {
            what: "innovation variance must be positive and finite",
        });
    }
    let ss = arma_to_state_space(spec);
    let lambda = ss.lambda;
    let base_dim = base.state_dim();

    let Some(comp) = ss.companion else {
        let mut model = base.clone();
        model.r = lambda * lambda * innov_var;
        return Ok(AugmentedModel {
            model,
            cross_cov: Matrix::zeros(base_dim, 1),
            innov_var,
        });
    };

    let r_dim = comp.xi.rows();
    let dim = base_dim + r_dim;

    let mut phi = Matrix::zeros(dim, dim);
    embed(&mut phi, &base.phi, 0, 0);
    embed(&mut phi, &comp.xi, base_dim, base_dim);

    let g_cols = base.g.cols();
    let mut g = Matrix::zeros(dim, g_cols + 1);
    embed(&mut g, &base.g, 0, 0);
    embed(&mut g, &comp.upsilon, base_dim, g_cols);

    let mut q = Matrix::zeros(g_cols + 1, g_cols + 1);
    embed(&mut q, &base.q, 0, 0);
    q[(g_cols, g_cols)] = innov_var;

    let h = base.h.hstack(&comp.pi)?;

    let mut cross_cov = Matrix::zeros(dim, 1);
    for i in 0..r_dim {
        cross_cov[(base_dim + i, 0)] = comp.upsilon[(i, 0)] * innov_var * lambda;
    }

    let check = check_raw(&phi, &h, &g, base.k, base.t, DEFAULT_RANK_TOL);
    Ok(AugmentedModel {
        model: StateSpaceModel {
            phi,
            h,
            g,
            q,
            r: lambda * lambda * innov_var,
            k: base.k,
            t: base.t,
            check,
        },
        cross_cov,
        innov_var,
    })
}

fn embed(target: &mut Matrix, block: &Matrix, r0: usize, c0: usize) {
    for i in 0..block.rows() {
        for j in 0..block.cols() {
            target[(r0 + i, c0 + j)] = block[(i, j)];
        }
    }
}
