//! Measurement-noise estimation and ARMA innovation scaling.
//!
//! `estimate_r` recovers the measurement variance from a historical data
//! block by detrending it with a global least-squares polynomial and
//! taking the residual variance; the polynomial order is accepted once
//! the residuals look wide-sense stationary. For colored noise,
//! `impulse_response` and `innovation_variance` relate the stationary
//! output variance of the ARMA shaping filter to the variance of its
//! driving white sequence through the sum of squared impulse-response
//! terms.

use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::{solve_spd, Matrix};
use crate::model::ArmaSpec;
use crate::{Error, Result};

/// Term cap when summing squared impulse responses for the innovation
/// variance; generous next to the tail-bound stopping rule.
const INNOVATION_MAX_TERMS: usize = 100_000;

/// Result of fitting and variance estimation on a historical block.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    /// Smallest polynomial order whose residuals passed the stationarity
    /// heuristic (or the maximum order tried, when none passed).
    pub chosen_order: usize,
    /// Fit residuals at the chosen order, one per input sample.
    pub residuals: Vec<f64>,
    /// Sample variance of the residuals (denominator `n - 1`).
    pub r_estimate: f64,
    /// Whether the stationarity heuristic accepted the chosen order.
    pub stationarity_passed: bool,
}

/// Estimates the measurement variance from a historical block.
///
/// Orders `0..=max_order` are tried in turn; each order is fit by global
/// least squares over time normalized to `[0, 1]` and its residuals are
/// screened by a cheap stationarity heuristic (split-half mean and
/// variance agreement plus a lag-1 autocorrelation bound). The first
/// passing order wins; if none passes, the report carries the maximum
/// order with `stationarity_passed = false`.
pub fn estimate_r(block: &[f64], max_order: usize) -> Result<ResidualReport> {
    let needed = 4 * (max_order + 1);
    if block.len() < needed {
        return Err(Error::BlockTooShort {
            needed,
            got: block.len(),
        });
    }
    if block.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "historical block",
        });
    }

    let mut last: Option<ResidualReport> = None;
    for order in 0..=max_order {
        let residuals = poly_fit_residuals(block, order)?;
        let passed = looks_stationary(&residuals);
        let report = ResidualReport {
            chosen_order: order,
            r_estimate: sample_variance(&residuals),
            residuals,
            stationarity_passed: passed,
        };
        if passed {
            return Ok(report);
        }
        last = Some(report);
    }
    Ok(last.expect("at least one order is always tried"))
}

/// Least-squares polynomial fit over normalized time, returning the
/// residuals. Normal equations are solved as an SPD system; a tiny ridge
/// proportional to the Gram trace is added if the plain solve reports a
/// non-positive pivot.
fn poly_fit_residuals(block: &[f64], order: usize) -> Result<Vec<f64>> {
    let n = block.len();
    let dim = order + 1;
    let denom = (n - 1).max(1) as f64;

    let mut gram = Matrix::zeros(dim, dim);
    let mut rhs = Matrix::zeros(dim, 1);
    let mut powers = vec![0.0; dim];
    for (i, &x) in block.iter().enumerate() {
        let u = i as f64 / denom;
        let mut p = 1.0;
        for pw in powers.iter_mut() {
            *pw = p;
            p *= u;
        }
        for a in 0..dim {
            for b in 0..dim {
                gram[(a, b)] += powers[a] * powers[b];
            }
            rhs[(a, 0)] += powers[a] * x;
        }
    }

    let coeffs = match solve_spd(&gram, &rhs) {
        Ok(c) => c,
        Err(Error::NotPositiveDefinite { .. }) => {
            let mut trace = 0.0;
            for a in 0..dim {
                trace += gram[(a, a)];
            }
            let mut ridged = gram.clone();
            for a in 0..dim {
                ridged[(a, a)] += 1e-12 * trace;
            }
            solve_spd(&ridged, &rhs)?
        }
        Err(e) => return Err(e),
    };

    let mut residuals = Vec::with_capacity(n);
    for (i, &x) in block.iter().enumerate() {
        let u = i as f64 / denom;
        let mut fit = 0.0;
        let mut p = 1.0;
        for a in 0..dim {
            fit += coeffs[(a, 0)] * p;
            p *= u;
        }
        residuals.push(x - fit);
    }
    Ok(residuals)
}

/// Split-half stationarity heuristic:
/// (a) the half means differ by at most half a pooled standard deviation,
/// (b) the half variances agree within a factor of 2.5,
/// (c) the lag-1 autocorrelation stays inside (-0.9, 0.9).
fn looks_stationary(residuals: &[f64]) -> bool {
    let n = residuals.len();
    let half = n / 2;
    let (a, b) = residuals.split_at(half);
    let (m1, v1) = mean_variance(a);
    let (m2, v2) = mean_variance(b);

    let pooled = {
        let dof = (a.len() - 1 + b.len() - 1).max(1) as f64;
        libm::sqrt(((a.len() - 1) as f64 * v1 + (b.len() - 1) as f64 * v2) / dof)
    };
    if libm::fabs(m1 - m2) > 0.5 * pooled {
        return false;
    }

    let (lo, hi) = if v1 < v2 { (v1, v2) } else { (v2, v1) };
    if hi > 2.5 * lo {
        return false;
    }

    let (mean, var) = mean_variance(residuals);
    if var > 0.0 {
        let mut acc = 0.0;
        for w in residuals.windows(2) {
            acc += (w[0] - mean) * (w[1] - mean);
        }
        let rho1 = acc / (var * (n - 1) as f64);
        if !(-0.9..0.9).contains(&rho1) {
            return false;
        }
    }
    true
}

fn mean_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, ss / (n - 1) as f64)
}

fn sample_variance(xs: &[f64]) -> f64 {
    mean_variance(xs).1
}

/// Impulse response `h(0), h(1), ..` of the ARMA transfer function,
/// computed by driving the difference equation with a unit impulse.
///
/// Truncation: once past the companion order, the series stops at the
/// first term whose geometric tail bound `|h(n)| / (1 - rho)` falls below
/// `tol`, where `rho` is the largest consecutive magnitude ratio over the
/// last ten terms clipped to `[0, 0.999]`. `max_terms` caps the length
/// unconditionally.
pub fn impulse_response(spec: &ArmaSpec, tol: f64, max_terms: usize) -> Result<Vec<f64>> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument {
            what: "tolerance must be positive",
        });
    }
    if max_terms == 0 {
        return Err(Error::InvalidArgument {
            what: "max_terms must be at least 1",
        });
    }
    let p = spec.phi_coeffs().len();
    let r = spec.order();
    let mut h: Vec<f64> = Vec::new();
    let mut n = 0usize;
    loop {
        if h.len() == max_terms {
            break;
        }
        // h(n) = -sum phi_i h(n-i) + theta_n (unit impulse input).
        let mut candidate = spec.theta_coeffs().get(n).copied().unwrap_or(0.0);
        for i in 1..=p {
            if n >= i {
                candidate -= spec.phi_coeffs()[i - 1] * h[n - i];
            }
        }
        if n > r && tail_bound(&h, candidate) < tol {
            break;
        }
        h.push(candidate);
        n += 1;
    }
    Ok(h)
}

/// Geometric tail bound for the candidate term given recent history.
fn tail_bound(history: &[f64], candidate: f64) -> f64 {
    let mut recent: Vec<f64> = history
        .iter()
        .rev()
        .take(9)
        .rev()
        .map(|v| libm::fabs(*v))
        .collect();
    recent.push(libm::fabs(candidate));
    let mut rho = 0.0f64;
    for w in recent.windows(2) {
        let ratio = if w[0] == 0.0 {
            if w[1] == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            w[1] / w[0]
        };
        rho = rho.max(ratio);
    }
    rho = rho.clamp(0.0, 0.999);
    libm::fabs(candidate) / (1.0 - rho)
}

/// Variance of the white sequence driving the ARMA shaping filter, given
/// the stationary output variance `r`: the output variance equals the
/// driving variance times the sum of squared impulse-response terms, so
/// the driver variance is `r / sum(h^2)`.
pub fn innovation_variance(r: f64, spec: &ArmaSpec, tol: f64) -> Result<f64> {
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::InvalidArgument {
            what: "stationary variance r must be positive and finite",
        });
    }
    let h = impulse_response(spec, tol, INNOVATION_MAX_TERMS)?;
    let energy: f64 = h.iter().map(|v| v * v).sum();
    if energy == 0.0 {
        return Err(Error::ZeroImpulseEnergy);
    }
    Ok(r / energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simgen::Rng;
    use alloc::vec;

    #[test]
    fn constant_block_is_order_zero_with_zero_variance() {
        let report = estimate_r(&[3.0; 8], 1).unwrap();
        assert_eq!(report.chosen_order, 0);
        assert_eq!(report.r_estimate, 0.0);
        assert!(report.stationarity_passed);
        assert_eq!(report.residuals.len(), 8);
    }

    #[test]
    fn line_plus_noise_selects_order_one_and_recovers_variance() {
        // Injected noise N(0, 0.25); estimates stay inside [0.15, 0.40].
        for seed in 1..=20u64 {
            let mut rng = Rng::new(seed);
            let block: Vec<f64> = (0..100)
                .map(|i| 2.0 + 3.0 * i as f64 / 99.0 + 0.5 * rng.next_gaussian())
                .collect();
            let report = estimate_r(&block, 3).unwrap();
            assert_eq!(report.chosen_order, 1, "seed {seed}");
            assert!(report.stationarity_passed);
            assert!(
                (0.15..=0.40).contains(&report.r_estimate),
                "seed {seed}: estimate {}",
                report.r_estimate
            );
        }
    }

    #[test]
    fn longer_blocks_recover_injected_variance_within_half() {
        // Cubic trend plus N(0, 0.8) at n = 500: the estimate must land
        // within +-50% of the injected variance for every seed.
        for seed in 1..=20u64 {
            let mut rng = Rng::new(seed);
            let block: Vec<f64> = (0..500)
                .map(|i| {
                    let u = i as f64 / 499.0;
                    1.0 + 4.0 * u - 6.0 * u * u
                        + 2.0 * u * u * u
                        + libm::sqrt(0.8) * rng.next_gaussian()
                })
                .collect();
            let report = estimate_r(&block, 5).unwrap();
            assert!(report.stationarity_passed, "seed {seed}");
            assert!(
                (0.4..=1.2).contains(&report.r_estimate),
                "seed {seed}: estimate {}",
                report.r_estimate
            );
        }
    }

    #[test]
    fn order_zero_residuals_of_a_line_fail_stationarity() {
        // Fitting a constant to a steep line leaves a trend in the
        // residuals, which the split-mean test must reject.
        let block: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let report = estimate_r(&block, 0).unwrap();
        assert!(!report.stationarity_passed);
        assert_eq!(report.chosen_order, 0);
    }

    #[test]
    fn short_block_and_non_finite_are_rejected() {
        assert!(matches!(
            estimate_r(&[1.0; 7], 1),
            Err(Error::BlockTooShort { needed: 8, got: 7 })
        ));
        assert!(matches!(
            estimate_r(&[1.0, f64::INFINITY, 0.0, 1.0], 0),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn impulse_response_pure_gain() {
        let spec = ArmaSpec::white(2.5).unwrap();
        assert_eq!(impulse_response(&spec, 1e-12, 100).unwrap(), vec![2.5]);
    }

    #[test]
    fn impulse_response_ar1_geometric() {
        let spec = ArmaSpec::new(vec![-0.5], vec![1.0]).unwrap();
        let h = impulse_response(&spec, 1e-9, 1000).unwrap();
        assert!(h.len() > 20);
        let mut expect = 1.0;
        for (n, v) in h.iter().enumerate() {
            assert!((v - expect).abs() < 1e-12, "term {n}");
            expect *= 0.5;
        }
    }

    #[test]
    fn impulse_response_arma11_hand_recursion() {
        let spec = ArmaSpec::new(vec![-0.5], vec![1.0, 0.3]).unwrap();
        let h = impulse_response(&spec, 1e-9, 1000).unwrap();
        assert!((h[0] - 1.0).abs() < 1e-15);
        let mut expect = 0.8;
        for (n, v) in h.iter().enumerate().skip(1) {
            assert!((v - expect).abs() < 1e-12, "term {n}");
            expect *= 0.5;
        }
    }

    #[test]
    fn impulse_response_pure_ma_is_exact_and_finite() {
        let spec = ArmaSpec::new(vec![], vec![1.0, 0.0, 0.0, 5.0]).unwrap();
        let h = impulse_response(&spec, 1e-12, 100).unwrap();
        assert_eq!(h, vec![1.0, 0.0, 0.0, 5.0]);
    }

    #[test]
    fn innovation_variance_white_and_ar1() {
        let white = ArmaSpec::white(2.0).unwrap();
        assert!((innovation_variance(8.0, &white, 1e-9).unwrap() - 2.0).abs() < 1e-12);

        // Sum of squares of 0.5^n is 4/3, so the driver variance is 0.75.
        let ar1 = ArmaSpec::new(vec![-0.5], vec![1.0]).unwrap();
        let rbar = innovation_variance(1.0, &ar1, 1e-9).unwrap();
        assert!((rbar - 0.75).abs() < 1e-6);
    }

    #[test]
    fn innovation_variance_is_linear_in_r() {
        let spec = ArmaSpec::new(vec![-0.4, 0.1], vec![1.0, -0.2]).unwrap();
        let a = innovation_variance(1.0, &spec, 1e-10).unwrap();
        let b = innovation_variance(2.0, &spec, 1e-10).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12 * b.abs());
    }

    #[test]
    fn innovation_variance_rejects_zero_energy() {
        let spec = ArmaSpec::new(vec![], vec![0.0]).unwrap();
        assert!(matches!(
            innovation_variance(1.0, &spec, 1e-9),
            Err(Error::ZeroImpulseEnergy)
        ));
    }

    #[test]
    fn squared_sum_converges_under_term_doubling() {
        let spec = ArmaSpec::new(vec![-0.8, 0.15], vec![1.0, 0.4]).unwrap();
        let tol = 1e-8;
        let h1 = impulse_response(&spec, tol, 500).unwrap();
        let h2 = impulse_response(&spec, tol, 1000).unwrap();
        let s1: f64 = h1.iter().map(|v| v * v).sum();
        let s2: f64 = h2.iter().map(|v| v * v).sum();
        assert!(s2 >= s1);
        assert!((s2 - s1) <= tol * s2.max(1.0));
    }
}
