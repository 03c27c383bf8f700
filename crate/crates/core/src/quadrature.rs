//! Globally adaptive 21-point Gauss–Kronrod integration on finite intervals.
//!
//! Each panel is integrated with the 21-point Kronrod extension of the
//! 10-point Gauss–Legendre rule; `|K21 - G10|` is the panel error estimate.
//! The panel with the largest estimate is bisected until the summed estimate
//! meets the tolerance or the panel budget runs out.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Kronrod abscissae on [-1, 1] (non-negative half, descending). Odd indices
/// are the 10-point Gauss–Legendre nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss–Legendre weights for the nodes `XGK[1], XGK[3], .., XGK[9]`.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

pub const EVALS_PER_PANEL: usize = 21;

/// Outcome of an adaptive integration. On failure this is the best available
/// estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub evaluations: usize,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Kronrod and Gauss estimates of `∫_a^b f`.
pub fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, gauss * half)
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let (k, g) = gk21(f, a, b);
    Panel {
        a,
        b,
        value: k,
        err: (k - g).abs(),
    }
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, starting from the panels
/// delimited by the sorted `breaks`.
pub fn integrate<F>(
    f: F,
    breaks: &[f64],
    abs_tol: f64,
    max_panels: usize,
) -> Result<QuadResult, QuadResult>
where
    F: Fn(f64) -> f64,
{
    assert!(breaks.len() >= 2, "need at least one interval");
    debug_assert!(breaks.windows(2).all(|w| w[0] < w[1]));

    let mut heap: BinaryHeap<Panel> = breaks.windows(2).map(|w| panel(&f, w[0], w[1])).collect();
    let mut frozen: Vec<Panel> = Vec::new();
    let mut evaluations = heap.len() * EVALS_PER_PANEL;

    let total_err = |heap: &BinaryHeap<Panel>, frozen: &[Panel]| -> f64 {
        heap.iter().chain(frozen).map(|p| p.err).sum()
    };

    let mut err = total_err(&heap, &frozen);
    while err > abs_tol && heap.len() + frozen.len() < max_panels {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // Exhausted floating-point resolution on this panel.
            frozen.push(worst);
            continue;
        }
        let left = panel(&f, worst.a, mid);
        let right = panel(&f, mid, worst.b);
        evaluations += 2 * EVALS_PER_PANEL;
        heap.push(left);
        heap.push(right);
        err = total_err(&heap, &frozen);
    }

    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(frozen);
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let result = QuadResult {
        value: panels.iter().map(|p| p.value).sum(),
        abs_err: panels.iter().map(|p| p.err).sum(),
        evaluations,
        panels: panels.len(),
    };
    if result.abs_err <= abs_tol {
        Ok(result)
    } else {
        Err(result)
    }
}
