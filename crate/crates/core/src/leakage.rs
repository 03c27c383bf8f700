//! Average information leakage (AIL): the expectation of the per-packet
//! leakage over the eavesdropper SNR `gamma_e ~ Exp(gbar_e)`, conditional on
//! the legitimate SNR `gamma_b`.
//!
//! Integrating by parts turns the AIL into `∫ Ψ(x) exp(-N Ξ(x)) dx`, which is
//! evaluated at the saddle point `x0 = (1+gamma_b)/2^R0 - 1` where the Gaussian
//! argument of the leakage vanishes. [`psi`], [`xi`] and [`saddle_point`]
//! expose those pieces; [`ail_approx`] is the simplified result
//! `exp(-x0/gbar_e)`.

use std::f64::consts::{LN_2, LOG2_E, PI};

use serde::{Deserialize, Serialize};

use crate::core_math::{
    dispersion_unchecked, leakage_given_offset, log2_ratio, q_inv, rate_offset_r0, ChannelStats,
    FblParams, LOG2E_SQ,
};
use crate::error::{Error, Result};
use crate::quadrature;

/// Survival mass of `gamma_e` discarded above the upper integration limit.
pub const TAIL_MASS: f64 = 1e-14;
/// Lower integration limit; `[0, X_MIN]` is covered by the integrand's limit at 0+.
pub const X_MIN: f64 = 1e-12;
pub const DEFAULT_ABS_TOL: f64 = 1e-10;
/// Smallest tolerance [`ail_exact`] accepts; it must leave room for [`TAIL_MASS`].
pub const MIN_ABS_TOL: f64 = 1e-13;
const MAX_PANELS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactQuadrature,
    LaplaceApprox,
    MonteCarlo,
}

/// An AIL value tagged with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeakageEstimate {
    value: f64,
    method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quadrature_abs_err: Option<f64>,
}

impl LeakageEstimate {
    pub fn exact(value: f64, abs_err: f64) -> Self {
        LeakageEstimate {
            value,
            method: Method::ExactQuadrature,
            std_error: None,
            quadrature_abs_err: Some(abs_err),
        }
    }

    pub fn approx(value: f64) -> Self {
        LeakageEstimate {
            value,
            method: Method::LaplaceApprox,
            std_error: None,
            quadrature_abs_err: None,
        }
    }

    pub fn monte_carlo(value: f64, std_error: f64) -> Self {
        LeakageEstimate {
            value,
            method: Method::MonteCarlo,
            std_error: Some(std_error),
            quadrature_abs_err: None,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Present exactly for Monte Carlo estimates.
    pub fn std_error(&self) -> Option<f64> {
        self.std_error
    }

    /// Present exactly for quadrature estimates; includes the truncated tail.
    pub fn quadrature_abs_err(&self) -> Option<f64> {
        self.quadrature_abs_err
    }
}

/// Saddle point of the leakage integrand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleInfo {
    /// `(1+gamma_b)/2^R0 - 1`; negative when the rate offset exceeds the
    /// legitimate capacity.
    pub x0: f64,
    pub r0: f64,
    /// `Ξ''(x0)` as `2/(x0(x0+2))`; `None` unless `x0 > 0`.
    pub xi_second: Option<f64>,
}

impl SaddleInfo {
    pub fn negative_saddle(&self) -> bool {
        self.x0 < 0.0
    }

    /// `Ψ(x0)`, available when `x0 > 0`.
    pub fn psi_at_x0(&self, params: &FblParams, gamma_b: f64, stats: &ChannelStats) -> Option<f64> {
        (self.x0 > 0.0).then(|| psi_with_offset(self.x0, params, self.r0, gamma_b, stats))
    }
}

pub fn saddle_point(params: &FblParams, gamma_b: f64) -> Result<SaddleInfo> {
    let r0 = rate_offset_r0(params, gamma_b)?;
    // (1+gamma_b) 2^{-R0} - 1 via expm1 for accuracy near the boundary.
    let x0 = (gamma_b.ln_1p() - r0 * LN_2).exp_m1();
    let xi_second = (x0 > 0.0).then(|| 2.0 / (x0 * (x0 + 2.0)));
    Ok(SaddleInfo { x0, r0, xi_second })
}

/// `Ψ(x) = sqrt(N/(π x(x+2))) (1 + B(x)/(x(x+2) log2 e)) [1 - F(x)]` with
/// `B(x) = log2((1+gamma_b)/(1+x)) - R0` and `F` the eavesdropper SNR CDF.
pub fn psi(x: f64, params: &FblParams, gamma_b: f64, stats: &ChannelStats) -> Result<f64> {
    check_interior(x)?;
    let r0 = rate_offset_r0(params, gamma_b)?;
    Ok(psi_with_offset(x, params, r0, gamma_b, stats))
}

fn psi_with_offset(x: f64, params: &FblParams, r0: f64, gamma_b: f64, stats: &ChannelStats) -> f64 {
    let n = f64::from(params.n());
    let w = x * (x + 2.0);
    let bracket = log2_ratio(gamma_b, x) - r0;
    (n / (PI * w)).sqrt() * (1.0 + bracket / (w * LOG2_E)) * (-x / stats.gbar_e()).exp()
}

/// `Ξ(x) = B(x)^2 / (2 V_e(x))`.
pub fn xi(x: f64, params: &FblParams, gamma_b: f64) -> Result<f64> {
    check_interior(x)?;
    let r0 = rate_offset_r0(params, gamma_b)?;
    let bracket = log2_ratio(gamma_b, x) - r0;
    Ok(bracket * bracket / (2.0 * dispersion_unchecked(x)))
}

fn check_interior(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("x", x, "finite and > 0"))
    }
}

/// Saddle-point approximation `exp(-x0/gbar_e)`, clamped to 1 when `x0 < 0`.
pub fn ail_approx(
    params: &FblParams,
    gamma_b: f64,
    stats: &ChannelStats,
) -> Result<LeakageEstimate> {
    let saddle = saddle_point(params, gamma_b)?;
    Ok(LeakageEstimate::approx(approx_from_saddle(
        saddle.x0,
        stats.gbar_e(),
    )))
}

pub(crate) fn approx_from_saddle(x0: f64, gbar_e: f64) -> f64 {
    if x0 < 0.0 {
        1.0
    } else {
        (-x0 / gbar_e).exp()
    }
}

/// AIL by adaptive quadrature over `gamma_e`.
///
/// The integral runs over `[X_MIN, gbar_e ln(1/TAIL_MASS)]`; the piece below
/// `X_MIN` is taken from the integrand's limit at 0+ (zero if the legitimate
/// capacity exceeds `R0`, the density `1/gbar_e` otherwise). The reported
/// bound is the quadrature estimate plus `TAIL_MASS`.
pub fn ail_exact(
    params: &FblParams,
    gamma_b: f64,
    stats: &ChannelStats,
    abs_tol: f64,
) -> Result<LeakageEstimate> {
    if abs_tol.is_nan() || abs_tol < MIN_ABS_TOL {
        return Err(Error::domain("abs_tol", abs_tol, ">= 1e-13"));
    }
    let r0 = rate_offset_r0(params, gamma_b)?;
    let n = f64::from(params.n());
    let gbar_e = stats.gbar_e();
    let x_max = gbar_e * (1.0 / TAIL_MASS).ln();
    let x_min = X_MIN.min(1e-3 * x_max);

    let capacity_margin = gamma_b.ln_1p() / LN_2 - r0;
    let limit_at_zero = if capacity_margin > 0.0 {
        0.0
    } else if capacity_margin < 0.0 {
        1.0 / gbar_e
    } else {
        0.5 / gbar_e
    };

    let integrand = |x: f64| leakage_given_offset(n, r0, gamma_b, x) * (-x / gbar_e).exp() / gbar_e;

    let x0 = (gamma_b.ln_1p() - r0 * LN_2).exp_m1();
    let mut breaks = vec![x_min];
    if x0 > x_min && x0 < x_max {
        breaks.push(x0);
    }
    breaks.push(x_max);

    let head = limit_at_zero * x_min;
    match quadrature::integrate(integrand, &breaks, abs_tol - TAIL_MASS, MAX_PANELS) {
        Ok(r) => Ok(LeakageEstimate::exact(
            (head + r.value).min(1.0),
            r.abs_err + TAIL_MASS,
        )),
        Err(r) => Err(Error::QuadratureNonconvergence {
            value: head + r.value,
            abs_err: r.abs_err + TAIL_MASS,
            tol: abs_tol,
            evaluations: r.evaluations,
        }),
    }
}

/// High-SNR limit of [`ail_approx`] for a fixed main-channel gain `‖h_b‖²`
/// (so `gamma_b = rho ‖h_b‖²` and `gbar_e = rho mu_e` grow together):
/// `exp(-‖h_b‖² / (mu_e 2^{R0∞}))` with the dispersion at its limit `log2(e)^2`.
pub fn ail_floor(params: &FblParams, hb_gain: f64, mu_e: f64) -> Result<f64> {
    if !(hb_gain > 0.0 && hb_gain.is_finite()) {
        return Err(Error::domain("hb_gain", hb_gain, "finite and > 0"));
    }
    if !(mu_e > 0.0 && mu_e.is_finite()) {
        return Err(Error::domain("mu_e", mu_e, "finite and > 0"));
    }
    let n = f64::from(params.n());
    let r0_inf = params.rate() + (LOG2E_SQ / n).sqrt() * q_inv(params.eps())?;
    Ok((-hb_gain / (mu_e * 2f64.powf(r0_inf))).exp())
}
