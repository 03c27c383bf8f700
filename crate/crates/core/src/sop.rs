//! Infinite-blocklength secrecy outage probability and its equivalence with the
//! saddle-point AIL.

use std::f64::consts::LN_2;

use crate::core_math::{rate_offset_r0, FblParams};
use crate::error::{Error, Result};

/// Redundancy rate `R_e` (bpcu) and mean eavesdropper SNR.
///
/// Negative rates are accepted. They correspond to the negative-saddle regime
/// of the AIL approximation and clamp the outage probability to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SopParams {
    redundancy_rate: f64,
    gbar_e: f64,
}

impl SopParams {
    pub fn new(redundancy_rate: f64, gbar_e: f64) -> Result<Self> {
        if !redundancy_rate.is_finite() {
            return Err(Error::domain("redundancy_rate", redundancy_rate, "finite"));
        }
        if !(gbar_e > 0.0 && gbar_e.is_finite()) {
            return Err(Error::domain("gbar_e", gbar_e, "finite and > 0"));
        }
        Ok(SopParams {
            redundancy_rate,
            gbar_e,
        })
    }

    pub fn redundancy_rate(&self) -> f64 {
        self.redundancy_rate
    }

    pub fn gbar_e(&self) -> f64 {
        self.gbar_e
    }

    /// Whether [`sop`] clamped the result to 1.
    pub fn is_clamped(&self) -> bool {
        self.redundancy_rate < 0.0
    }
}

/// `P_so = Pr{log2(1+gamma_e) > R_e} = exp((1 - 2^{R_e}) / gbar_e)`.
pub fn sop(p: &SopParams) -> f64 {
    if p.is_clamped() {
        return 1.0;
    }
    (-(p.redundancy_rate * LN_2).exp_m1() / p.gbar_e).exp()
}

/// Redundancy rate `log2(1+gamma_b) - sqrt(V_b/N) Q^{-1}(eps) - m/N` at which
/// the outage probability equals the saddle-point AIL.
pub fn corollary_redundancy_rate(params: &FblParams, gamma_b: f64) -> Result<f64> {
    let r0 = rate_offset_r0(params, gamma_b)?;
    Ok(gamma_b.ln_1p() / LN_2 - r0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_math::ChannelStats;
    use crate::leakage::ail_approx;

    #[test]
    fn sop_values() {
        assert_eq!(sop(&SopParams::new(0.0, 0.1).unwrap()), 1.0);
        assert!(sop(&SopParams::new(60.0, 0.1).unwrap()) == 0.0);
        assert!(sop(&SopParams::new(20.0, 10.0).unwrap()) < 1e-40);
        let v = sop(&SopParams::new(0.30694, 0.1).unwrap());
        assert!((v - 0.0934).abs() < 5e-5, "{v}");
    }

    #[test]
    fn negative_rate_clamps() {
        let p = SopParams::new(-0.2, 0.1).unwrap();
        assert!(p.is_clamped());
        assert_eq!(sop(&p), 1.0);
        assert!(SopParams::new(f64::NAN, 0.1).is_err());
        assert!(SopParams::new(0.1, 0.0).is_err());
    }

    #[test]
    fn redundancy_rate_values() {
        let half = FblParams::new(200, 400, 0.5, 1000).unwrap();
        let r = corollary_redundancy_rate(&half, 3.0).unwrap();
        assert!((r - (2.0 - 0.5)).abs() < 1e-15);

        let defaults = FblParams::new(200, 400, 1e-3, 1000).unwrap();
        let r = corollary_redundancy_rate(&defaults, 1.0).unwrap();
        // 1 - R0 with R0 = 0.69304844308641394.
        assert!((r - 0.306_951_556_913_586_06).abs() < 1e-13);

        let p = FblParams::new(7, 31, 0.2, 100).unwrap();
        assert!(corollary_redundancy_rate(&p, 0.0).unwrap() < 0.0);
    }

    #[test]
    fn matches_ail_approx_at_defaults() {
        let p = FblParams::new(200, 400, 1e-3, 1000).unwrap();
        let st = ChannelStats::new(1.0, 1.0, 0.1).unwrap();
        let re = corollary_redundancy_rate(&p, 1.0).unwrap();
        let s = sop(&SopParams::new(re, st.gbar_e()).unwrap());
        let a = ail_approx(&p, 1.0, &st).unwrap().value();
        assert!(((s - a) / a).abs() < 1e-12);
    }

    #[test]
    fn monotone_in_rate_and_mean_snr() {
        let mut prev = f64::INFINITY;
        for k in 0..200 {
            let v = sop(&SopParams::new(0.01 * f64::from(k), 0.5).unwrap());
            assert!(v < prev || k == 0);
            prev = v;
        }
        let mut prev = 0.0;
        for k in 1..200 {
            let v = sop(&SopParams::new(0.7, 0.02 * f64::from(k)).unwrap());
            assert!(v > prev);
            prev = v;
        }
    }
}
