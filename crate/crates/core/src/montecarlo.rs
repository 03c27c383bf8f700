//! Monte Carlo estimation of the AIL from sampled channel realizations.
//!
//! Samples are grouped in blocks of [`BLOCK_SIZE`] consecutive indices. Block
//! `k` draws from ChaCha8 stream `k` of the configured seed, so the draw for
//! any sample index is fixed no matter which worker evaluates it. Per-block
//! statistics are merged with a fixed pairwise tree, which keeps the floating
//! point result independent of the thread count.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core_math::{
    dispersion_unchecked, leakage_given_offset, q_inv, rate_offset_r0, ChannelStats, FblParams,
};
use crate::error::{Error, Result};
use crate::leakage::LeakageEstimate;

pub const BLOCK_SIZE: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum McMode {
    /// `gamma_b` fixed, only `gamma_e` sampled (the AIL definition).
    Conditional,
    /// Both SNRs sampled. Averages over the legitimate fading too, so it is
    /// not the conditional AIL.
    Ergodic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    samples: u64,
    seed: u64,
    mode: McMode,
    workers: Option<usize>,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64, mode: McMode) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidParams("samples must be at least 1".into()));
        }
        Ok(McConfig {
            samples,
            seed,
            mode,
            workers: None,
        })
    }

    /// Runs on a dedicated pool of `workers` threads instead of the global one.
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers.max(1));
        self
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mode(&self) -> McMode {
        self.mode
    }
}

/// Random stream handle; one per sample block.
#[derive(Debug, Clone)]
pub struct SnrStream {
    rng: ChaCha8Rng,
}

impl SnrStream {
    pub fn for_block(seed: u64, block: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(block);
        SnrStream { rng }
    }

    /// Uniform draw on the open interval (0, 1).
    pub fn uniform_open(&mut self) -> f64 {
        self.rng.sample(Open01)
    }
}

/// Exponential SNR with mean `gbar` by inversion, `-gbar ln u`.
pub fn sample_snr(gbar: f64, stream: &mut SnrStream) -> f64 {
    -gbar * stream.uniform_open().ln()
}

/// Running mean and sum of squared deviations (Welford/Chan).
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(a: Moments, b: Moments) -> Moments {
        if a.count == 0 {
            return b;
        }
        if b.count == 0 {
            return a;
        }
        let count = a.count + b.count;
        let (na, nb, n) = (a.count as f64, b.count as f64, count as f64);
        let d = b.mean - a.mean;
        Moments {
            count,
            mean: a.mean + d * nb / n,
            m2: a.m2 + b.m2 + d * d * na * nb / n,
        }
    }
}

fn tree_reduce(mut level: Vec<Moments>) -> Moments {
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|c| {
                if c.len() == 2 {
                    Moments::merge(c[0], c[1])
                } else {
                    c[0]
                }
            })
            .collect();
    }
    level.pop().unwrap_or_default()
}

/// Sample mean of the per-packet leakage with its standard error.
///
/// `gamma_b` is required in conditional mode and ignored in ergodic mode.
pub fn ail_mc(
    params: &FblParams,
    gamma_b: Option<f64>,
    stats: &ChannelStats,
    mc: &McConfig,
) -> Result<LeakageEstimate> {
    let n = f64::from(params.n());
    let gbar_e = stats.gbar_e();
    let gbar_b = stats.gbar_b();
    let mode = mc.mode;

    let conditional_r0 = match (mode, gamma_b) {
        (McMode::Conditional, Some(gb)) => Some(rate_offset_r0(params, gb)?),
        (McMode::Conditional, None) => {
            return Err(Error::InvalidParams(
                "conditional Monte Carlo needs gamma_b".into(),
            ))
        }
        (McMode::Ergodic, _) => None,
    };
    let gb_fixed = gamma_b.unwrap_or(0.0);
    let qinv_eps = q_inv(params.eps())?;
    let rate = params.rate();

    let blocks = mc.samples.div_ceil(BLOCK_SIZE);
    let run_block = |block: u64| {
        let mut stream = SnrStream::for_block(mc.seed, block);
        let start = block * BLOCK_SIZE;
        let end = (start + BLOCK_SIZE).min(mc.samples);
        let mut m = Moments::default();
        for _ in start..end {
            let (gb, r0) = match conditional_r0 {
                Some(r0) => (gb_fixed, r0),
                None => {
                    let gb = sample_snr(gbar_b, &mut stream);
                    (gb, (dispersion_unchecked(gb) / n).sqrt() * qinv_eps + rate)
                }
            };
            let ge = sample_snr(gbar_e, &mut stream);
            m.push(leakage_given_offset(n, r0, gb, ge));
        }
        m
    };

    let collect = || -> Vec<Moments> { (0..blocks).into_par_iter().map(run_block).collect() };
    let per_block = match mc.workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?
            .install(collect),
        None => collect(),
    };

    let total = tree_reduce(per_block);
    let count = total.count as f64;
    let std_error = if total.count > 1 {
        (total.m2 / (count - 1.0)).sqrt() / count.sqrt()
    } else {
        0.0
    };
    Ok(LeakageEstimate::monte_carlo(total.mean, std_error))
}
