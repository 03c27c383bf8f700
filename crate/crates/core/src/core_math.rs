//! Special functions and per-realization finite-blocklength secrecy quantities.
//!
//! Everything here is linear-domain: SNRs are power ratios, rates are in bits
//! per channel use (bpcu) and dispersions in squared bits per channel use.

use std::f64::consts::{LN_2, LOG2_E, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `log2(e)^2`, the high-SNR limit of the channel dispersion.
pub const LOG2E_SQ: f64 = LOG2_E * LOG2_E;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934_381_868_f64;

/// Transmit SNR and mean channel gains of the legitimate (`b`) and
/// eavesdropper (`e`) links.
///
/// The mean received SNRs are always derived from the stored fields, so they
/// can never drift from `rho * mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    rho: f64,
    mu_b: f64,
    mu_e: f64,
}

impl ChannelStats {
    pub fn new(rho: f64, mu_b: f64, mu_e: f64) -> Result<Self> {
        check_positive("rho", rho)?;
        check_positive("mu_b", mu_b)?;
        check_positive("mu_e", mu_e)?;
        Ok(ChannelStats { rho, mu_b, mu_e })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn mu_b(&self) -> f64 {
        self.mu_b
    }

    pub fn mu_e(&self) -> f64 {
        self.mu_e
    }

    /// Mean SNR of the legitimate link, `rho * mu_b`.
    pub fn gbar_b(&self) -> f64 {
        self.rho * self.mu_b
    }

    /// Mean SNR of the eavesdropper link, `rho * mu_e`.
    pub fn gbar_e(&self) -> f64 {
        self.rho * self.mu_e
    }
}

/// Packet parameters: `m` information bits over `n` channel uses with decoding
/// error probability `eps` at the legitimate receiver, `n <= n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FblParams {
    m: u32,
    n: u32,
    eps: f64,
    n_max: u32,
}

impl FblParams {
    pub fn new(m: u32, n: u32, eps: f64, n_max: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParams("m must be at least 1".into()));
        }
        if n == 0 || n > n_max {
            return Err(Error::InvalidParams(format!(
                "blocklength n = {n} must satisfy 1 <= n <= n_max = {n_max}"
            )));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::domain("eps", eps, "0 < eps < 1"));
        }
        Ok(FblParams { m, n, eps, n_max })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    /// Same packet with a different blocklength.
    pub fn with_n(&self, n: u32) -> Result<Self> {
        FblParams::new(self.m, n, self.eps, self.n_max)
    }

    /// Secrecy rate `m / n`.
    pub fn rate(&self) -> f64 {
        f64::from(self.m) / f64::from(self.n)
    }
}

/// Instantaneous received SNRs for one packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Realization {
    gamma_b: f64,
    gamma_e: f64,
}

impl Realization {
    pub fn new(gamma_b: f64, gamma_e: f64) -> Result<Self> {
        check_snr("gamma_b", gamma_b)?;
        check_snr("gamma_e", gamma_e)?;
        Ok(Realization { gamma_b, gamma_e })
    }

    pub fn gamma_b(&self) -> f64 {
        self.gamma_b
    }

    pub fn gamma_e(&self) -> f64 {
        self.gamma_e
    }
}

/// Gaussian tail probability `Q(x) = P(Z > x)` for standard normal `Z`.
pub fn q_func(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Standard normal density.
fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Inverse of [`q_func`] on `(0, 1)`.
///
/// A rational approximation of the normal quantile (relative error ~1e-9)
/// followed by two Newton steps on `Q(x) - p`.
pub fn q_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("p", p, "0 < p < 1"));
    }
    if p > 0.5 {
        // 1 - p is exact for p in [0.5, 1].
        return Ok(-upper_tail_inv(1.0 - p));
    }
    Ok(upper_tail_inv(p))
}

/// `Q^{-1}(p)` for `0 < p <= 0.5`, i.e. a non-negative result.
fn upper_tail_inv(p: f64) -> f64 {
    let mut x = -normal_quantile_guess(p);
    for _ in 0..2 {
        x += (q_func(x) - p) / normal_pdf(x);
    }
    x
}

/// Acklam's rational approximation of the standard normal quantile.
#[allow(clippy::excessive_precision)]
fn normal_quantile_guess(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_690e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    }
}

/// Channel dispersion `log2(e)^2 * g(g+2)/(g+1)^2`.
pub fn dispersion(gamma: f64) -> Result<f64> {
    check_snr("gamma", gamma)?;
    Ok(dispersion_unchecked(gamma))
}

pub(crate) fn dispersion_unchecked(gamma: f64) -> f64 {
    let g1 = gamma + 1.0;
    LOG2E_SQ * (gamma / g1) * ((gamma + 2.0) / g1)
}

/// Infinite-blocklength secrecy capacity `log2(1+gamma_b) - log2(1+gamma_e)`.
///
/// Not clipped at zero.
pub fn secrecy_capacity(gamma_b: f64, gamma_e: f64) -> Result<f64> {
    check_snr("gamma_b", gamma_b)?;
    check_snr("gamma_e", gamma_e)?;
    Ok(log2_ratio(gamma_b, gamma_e))
}

/// `log2((1+a)/(1+b))` without forming the ratio.
pub(crate) fn log2_ratio(a: f64, b: f64) -> f64 {
    (a.ln_1p() - b.ln_1p()) / LN_2
}

/// Rate offset `R0 = sqrt(V_b/N) Q^{-1}(eps) + m/N`.
pub fn rate_offset_r0(params: &FblParams, gamma_b: f64) -> Result<f64> {
    check_snr("gamma_b", gamma_b)?;
    let n = f64::from(params.n());
    let backoff = (dispersion_unchecked(gamma_b) / n).sqrt() * q_inv(params.eps())?;
    Ok(backoff + params.rate())
}

/// Per-packet leakage
/// `delta = Q( sqrt(N/V_e) [C_s(gamma_b, gamma_e) - sqrt(V_b/N) Q^{-1}(eps) - m/N] )`.
pub fn instantaneous_leakage(params: &FblParams, real: &Realization) -> Result<f64> {
    if real.gamma_e() == 0.0 {
        return Err(Error::SingularEavesdropperSnr);
    }
    let r0 = rate_offset_r0(params, real.gamma_b())?;
    Ok(leakage_given_offset(
        f64::from(params.n()),
        r0,
        real.gamma_b(),
        real.gamma_e(),
    ))
}

/// Leakage with a precomputed rate offset. Requires `gamma_e > 0`.
pub(crate) fn leakage_given_offset(n: f64, r0: f64, gamma_b: f64, gamma_e: f64) -> f64 {
    let bracket = log2_ratio(gamma_b, gamma_e) - r0;
    q_func((n / dispersion_unchecked(gamma_e)).sqrt() * bracket)
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(name, v, "finite and > 0"))
    }
}

fn check_snr(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(name, v, "finite and >= 0"))
    }
}
