//! Blocklength design.
//!
//! The design trades the effective secrecy throughput (EST)
//! `T(N) = (1-eps) m / N` against the AIL. Three formulations are supported:
//! the weighted single objective `λ AIL(N) - (1-λ)/N` solved by enumeration,
//! the AIL-constrained throughput maximization solved in closed form (with an
//! exhaustive scan as its oracle), and the full Pareto frontier.
//!
//! Unless a caller asks otherwise the AIL here is the saddle-point
//! approximation. Ties are always broken toward the smaller blocklength.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::core_math::{dispersion_unchecked, q_inv, ChannelStats, FblParams};
use crate::error::{Error, Result};
use crate::leakage::{ail_exact, approx_from_saddle, DEFAULT_ABS_TOL};

/// Largest `n_max` the enumeration-based solvers accept.
pub const ENUMERATION_LIMIT: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignMethod {
    ClosedForm,
    Exhaustive,
    WeightedScan,
}

impl DesignMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            DesignMethod::ClosedForm => "closed-form",
            DesignMethod::Exhaustive => "exhaustive",
            DesignMethod::WeightedScan => "weighted-scan",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DesignOutcome {
    pub n_star: u32,
    /// `(1-eps) m / n_star`.
    pub est: f64,
    pub ail: f64,
    pub feasible: bool,
    pub method: DesignMethod,
}

impl DesignOutcome {
    fn new(
        params: &FblParams,
        n_star: u32,
        ail: f64,
        feasible: bool,
        method: DesignMethod,
    ) -> Self {
        DesignOutcome {
            n_star,
            est: est_at(params, n_star),
            ail,
            feasible,
            method,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParetoPoint {
    pub n: u32,
    pub est: f64,
    pub ail: f64,
    pub dominated: bool,
}

/// Weight `λ ∈ [0, 1]` on the AIL; `1 - λ` goes to the scaled throughput.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedObjective {
    lambda: f64,
}

impl WeightedObjective {
    pub fn new(lambda: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&lambda) {
            Ok(WeightedObjective { lambda })
        } else {
            Err(Error::domain("lambda", lambda, "0 <= lambda <= 1"))
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn eval(&self, n: u32, ail: f64) -> f64 {
        self.lambda * ail - (1.0 - self.lambda) / f64::from(n)
    }
}

/// Which AIL evaluator a scan uses.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub enum AilModel {
    #[default]
    Approx,
    Exact {
        abs_tol: f64,
    },
}

/// Effective secrecy throughput `(1-eps) m / N`.
pub fn est(params: &FblParams) -> f64 {
    est_at(params, params.n())
}

fn est_at(params: &FblParams, n: u32) -> f64 {
    (1.0 - params.eps()) * f64::from(params.m()) / f64::from(n)
}

/// Saddle-point AIL for every blocklength `1..=n_max`; index `n - 1`.
pub fn approx_curve(params: &FblParams, gamma_b: f64, stats: &ChannelStats) -> Result<Vec<f64>> {
    let backoff = dispersion_unchecked(gamma_b).sqrt() * q_inv(params.eps())?;
    let m = f64::from(params.m());
    let ln_cap = gamma_b.ln_1p();
    Ok((1..=params.n_max())
        .map(|n| {
            let nf = f64::from(n);
            let r0 = backoff / nf.sqrt() + m / nf;
            approx_from_saddle((ln_cap - r0 * LN_2).exp_m1(), stats.gbar_e())
        })
        .collect())
}

fn curve(
    params: &FblParams,
    gamma_b: f64,
    stats: &ChannelStats,
    model: AilModel,
) -> Result<Vec<f64>> {
    match model {
        AilModel::Approx => approx_curve(params, gamma_b, stats),
        AilModel::Exact { abs_tol } => (1..=params.n_max())
            .map(|n| Ok(ail_exact(&params.with_n(n)?, gamma_b, stats, abs_tol)?.value()))
            .collect(),
    }
}

fn check_budget(params: &FblParams) -> Result<()> {
    if params.n_max() > ENUMERATION_LIMIT {
        Err(Error::BudgetExceeded {
            n_max: params.n_max(),
            limit: ENUMERATION_LIMIT,
        })
    } else {
        Ok(())
    }
}

fn check_phi(phi: f64) -> Result<()> {
    if phi > 0.0 && phi < 1.0 {
        Ok(())
    } else {
        Err(Error::domain("phi", phi, "0 < phi < 1"))
    }
}

/// `λ AIL(n) - (1-λ)/n`, i.e. the weighted objective with the EST scaled by
/// `(1-eps) m`.
pub fn weighted_objective(
    n: u32,
    objective: &WeightedObjective,
    gamma_b: f64,
    stats: &ChannelStats,
    params: &FblParams,
) -> Result<f64> {
    let p = params.with_n(n)?;
    let ail = crate::leakage::ail_approx(&p, gamma_b, stats)?.value();
    Ok(objective.eval(n, ail))
}

fn argmin_weighted(objective: &WeightedObjective, curve: &[f64]) -> usize {
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for (i, &ail) in curve.iter().enumerate() {
        let v = objective.eval(i as u32 + 1, ail);
        if v < best_val {
            best = i;
            best_val = v;
        }
    }
    best
}

/// Exhaustive minimization of the weighted objective over `1..=n_max`.
pub fn solve_weighted(
    objective: &WeightedObjective,
    gamma_b: f64,
    stats: &ChannelStats,
    params: &FblParams,
) -> Result<DesignOutcome> {
    check_budget(params)?;
    let curve = approx_curve(params, gamma_b, stats)?;
    let i = argmin_weighted(objective, &curve);
    Ok(DesignOutcome::new(
        params,
        i as u32 + 1,
        curve[i],
        true,
        DesignMethod::WeightedScan,
    ))
}

/// Uniform grid of `points` weights on `[0, 1]` with exact endpoints.
pub fn lambda_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => {
            let last = (points - 1) as f64;
            let mut g: Vec<f64> = (0..points).map(|i| i as f64 / last).collect();
            g.dedup();
            g
        }
    }
}

/// Solves the weighted problem for every `λ` in `lambdas`, sharing one AIL curve.
pub fn weighted_scan(
    lambdas: &[f64],
    gamma_b: f64,
    stats: &ChannelStats,
    params: &FblParams,
) -> Result<Vec<(f64, DesignOutcome)>> {
    check_budget(params)?;
    let curve = approx_curve(params, gamma_b, stats)?;
    lambdas
        .iter()
        .map(|&l| {
            let obj = WeightedObjective::new(l)?;
            let i = argmin_weighted(&obj, &curve);
            Ok((
                l,
                DesignOutcome::new(
                    params,
                    i as u32 + 1,
                    curve[i],
                    true,
                    DesignMethod::WeightedScan,
                ),
            ))
        })
        .collect()
}

/// Quadratic `a η² - b η - m = 0` in `η = sqrt(N)` whose positive root is the
/// smallest real blocklength meeting `AIL <= φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintQuadratic {
    /// `log2((1+gamma_b) / (1 - gbar_e ln φ))`.
    pub a: f64,
    /// `sqrt(V_b) Q^{-1}(eps)`.
    pub b: f64,
    pub m: f64,
}

impl ConstraintQuadratic {
    pub fn new(phi: f64, gamma_b: f64, stats: &ChannelStats, params: &FblParams) -> Result<Self> {
        check_phi(phi)?;
        let a = (gamma_b.ln_1p() - (-stats.gbar_e() * phi.ln()).ln_1p()) / LN_2;
        let b = dispersion_unchecked(gamma_b).sqrt() * q_inv(params.eps())?;
        Ok(ConstraintQuadratic {
            a,
            b,
            m: f64::from(params.m()),
        })
    }

    /// Positive root; `None` when `a <= 0` (no blocklength satisfies the
    /// constraint).
    pub fn eta(&self) -> Option<f64> {
        (self.a > 0.0)
            .then(|| (self.b + (self.b * self.b + 4.0 * self.a * self.m).sqrt()) / (2.0 * self.a))
    }

    /// Uncapped real blocklength `η²`.
    pub fn real_blocklength(&self) -> Option<f64> {
        self.eta().map(|e| e * e)
    }

    /// Relative residual of `a = b/sqrt(N) + m/N` at blocklength `n`.
    pub fn residual(&self, n: f64) -> f64 {
        let rhs = self.b / n.sqrt() + self.m / n;
        ((self.a - rhs) / self.a).abs()
    }
}

/// Smallest blocklength with `AIL <= φ` from the quadratic's root,
/// `min(ceil(η²), n_max)`. Infeasibility is reported through the outcome.
pub fn solve_constrained_closed_form(
    phi: f64,
    gamma_b: f64,
    stats: &ChannelStats,
    params: &FblParams,
) -> Result<DesignOutcome> {
    let quad = ConstraintQuadratic::new(phi, gamma_b, stats, params)?;
    let n_max = params.n_max();
    let n_star = match quad.real_blocklength() {
        Some(n_real) if n_real.ceil() < f64::from(n_max) => n_real.ceil().max(1.0) as u32,
        _ => n_max,
    };
    let ail = crate::leakage::ail_approx(&params.with_n(n_star)?, gamma_b, stats)?.value();
    let feasible = quad.a > 0.0 && ail <= phi;
    Ok(DesignOutcome::new(
        params,
        n_star,
        ail,
        feasible,
        DesignMethod::ClosedForm,
    ))
}

/// First `n` in `1..=n_max` with `AIL(n) <= φ`.
pub fn solve_constrained_oracle(
    phi: f64,
    gamma_b: f64,
    stats: &ChannelStats,
    params: &FblParams,
    model: AilModel,
) -> Result<DesignOutcome> {
    check_phi(phi)?;
    check_budget(params)?;
    let curve = curve(params, gamma_b, stats, model)?;
    let outcome = match curve.iter().position(|&a| a <= phi) {
        Some(i) => DesignOutcome::new(
            params,
            i as u32 + 1,
            curve[i],
            true,
            DesignMethod::Exhaustive,
        ),
        None => DesignOutcome::new(
            params,
            params.n_max(),
            curve[curve.len() - 1],
            false,
            DesignMethod::Exhaustive,
        ),
    };
    Ok(outcome)
}

/// All `(n, EST, AIL)` points for `n = 1..=n_max`, sorted by `n`, with
/// Pareto dominance marked.
pub fn pareto_front(
    gamma_b: f64,
    stats: &ChannelStats,
    params: &FblParams,
) -> Result<Vec<ParetoPoint>> {
    check_budget(params)?;
    let curve = approx_curve(params, gamma_b, stats)?;
    let mut points: Vec<ParetoPoint> = curve
        .iter()
        .enumerate()
        .map(|(i, &ail)| {
            let n = i as u32 + 1;
            ParetoPoint {
                n,
                est: est_at(params, n),
                ail,
                dominated: false,
            }
        })
        .collect();
    mark_dominated(&mut points);
    Ok(points)
}

/// Marks every point beaten by another with `est >=` and `ail <=`, one strict.
pub fn mark_dominated(points: &mut [ParetoPoint]) {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        points[j]
            .est
            .total_cmp(&points[i].est)
            .then(points[i].ail.total_cmp(&points[j].ail))
    });

    // Best AIL among points with strictly larger EST than the current group.
    let mut best_above = f64::INFINITY;
    let mut start = 0;
    while start < order.len() {
        let est = points[order[start]].est;
        let end = start
            + order[start..]
                .iter()
                .take_while(|&&k| points[k].est == est)
                .count();
        let group_min = points[order[start]].ail;
        for &k in &order[start..end] {
            let ail = points[k].ail;
            points[k].dominated = best_above <= ail || group_min < ail;
        }
        best_above = best_above.min(group_min);
        start = end;
    }
}

/// The non-dominated subset, in input order.
pub fn non_dominated(points: &[ParetoPoint]) -> Vec<ParetoPoint> {
    points.iter().copied().filter(|p| !p.dominated).collect()
}

pub fn default_exact_model() -> AilModel {
    AilModel::Exact {
        abs_tol: DEFAULT_ABS_TOL,
    }
}
