//! Parameter sets, JSON sweep specifications and the CSV tables they produce.
//!
//! A [`ParamSet`] is the full, linear-plus-dB user-facing parameter record
//! (SNR in dB, everything else linear). [`SweepSpec`] is the on-disk sweep
//! document; [`run_sweep`] evaluates it point by point (in parallel) and
//! returns rows in range order.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core_math::{ChannelStats, FblParams};
use crate::error::{Error, Result};
use crate::leakage::{ail_approx, ail_exact, ail_floor, DEFAULT_ABS_TOL};
use crate::montecarlo::{ail_mc, McConfig, McMode};
use crate::optimizer::{
    est, lambda_grid, pareto_front, solve_constrained_closed_form, solve_weighted, weighted_scan,
    DesignOutcome, WeightedObjective,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_MC_SAMPLES: u64 = 100_000;
pub const DEFAULT_MC_SEED: u64 = 1;

/// Complete parameter record. Defaults are the reference operating point:
/// m = 200, N = 400, eps = 1e-3, 0 dB, ‖h_b‖² = 1, mu_b = 1, mu_e = 0.1,
/// N_max = 1000, phi = 1e-2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSet {
    pub m: u32,
    pub n: u32,
    pub eps: f64,
    pub snr_db: f64,
    pub hb_gain: f64,
    pub mu_b: f64,
    pub mu_e: f64,
    pub n_max: u32,
    pub phi: f64,
    pub lambda: f64,
    /// Holds the legitimate SNR fixed instead of `rho * hb_gain`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_b: Option<f64>,
    /// Secrecy rate; when set, `m = round(rs * n)` replaces `m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rs: Option<f64>,
}

impl Default for ParamSet {
    fn default() -> Self {
        ParamSet {
            m: 200,
            n: 400,
            eps: 1e-3,
            snr_db: 0.0,
            hb_gain: 1.0,
            mu_b: 1.0,
            mu_e: 0.1,
            n_max: 1000,
            phi: 1e-2,
            lambda: 0.5,
            gamma_b: None,
            rs: None,
        }
    }
}

impl ParamSet {
    pub fn rho(&self) -> f64 {
        crate::db_to_linear(self.snr_db)
    }

    pub fn stats(&self) -> Result<ChannelStats> {
        ChannelStats::new(self.rho(), self.mu_b, self.mu_e)
    }

    /// Legitimate SNR: the fixed override, or `rho * hb_gain`.
    pub fn gamma_b(&self) -> f64 {
        self.gamma_b.unwrap_or(self.rho() * self.hb_gain)
    }

    pub fn effective_m(&self) -> Result<u32> {
        match self.rs {
            None => Ok(self.m),
            Some(rs) => {
                let m = (rs * f64::from(self.n)).round();
                if m >= 1.0 && m <= f64::from(u32::MAX) {
                    Ok(m as u32)
                } else {
                    Err(Error::InvalidParams(format!(
                        "rs = {rs} with n = {} gives m = {m}",
                        self.n
                    )))
                }
            }
        }
    }

    pub fn fbl(&self) -> Result<FblParams> {
        FblParams::new(self.effective_m()?, self.n, self.eps, self.n_max)
    }
}

/// Partial parameter record: config-file `fixed` blocks and CLI flags.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hb_gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_e: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rs: Option<f64>,
}

impl ParamOverrides {
    pub fn apply(&self, base: ParamSet) -> ParamSet {
        ParamSet {
            m: self.m.unwrap_or(base.m),
            n: self.n.unwrap_or(base.n),
            eps: self.eps.unwrap_or(base.eps),
            snr_db: self.snr_db.unwrap_or(base.snr_db),
            hb_gain: self.hb_gain.unwrap_or(base.hb_gain),
            mu_b: self.mu_b.unwrap_or(base.mu_b),
            mu_e: self.mu_e.unwrap_or(base.mu_e),
            n_max: self.n_max.unwrap_or(base.n_max),
            phi: self.phi.unwrap_or(base.phi),
            lambda: self.lambda.unwrap_or(base.lambda),
            gamma_b: self.gamma_b.or(base.gamma_b),
            rs: self.rs.or(base.rs),
        }
    }

    /// Field-wise `self`, falling back to `base`.
    pub fn or(self, base: ParamOverrides) -> ParamOverrides {
        ParamOverrides {
            m: self.m.or(base.m),
            n: self.n.or(base.n),
            eps: self.eps.or(base.eps),
            snr_db: self.snr_db.or(base.snr_db),
            hb_gain: self.hb_gain.or(base.hb_gain),
            mu_b: self.mu_b.or(base.mu_b),
            mu_e: self.mu_e.or(base.mu_e),
            n_max: self.n_max.or(base.n_max),
            phi: self.phi.or(base.phi),
            lambda: self.lambda.or(base.lambda),
            gamma_b: self.gamma_b.or(base.gamma_b),
            rs: self.rs.or(base.rs),
        }
    }

    /// Every field of `p` set explicitly.
    pub fn full(p: &ParamSet) -> Self {
        ParamOverrides {
            m: Some(p.m),
            n: Some(p.n),
            eps: Some(p.eps),
            snr_db: Some(p.snr_db),
            hb_gain: Some(p.hb_gain),
            mu_b: Some(p.mu_b),
            mu_e: Some(p.mu_e),
            n_max: Some(p.n_max),
            phi: Some(p.phi),
            lambda: Some(p.lambda),
            gamma_b: p.gamma_b,
            rs: p.rs,
        }
    }

    fn has(&self, var: SweepVar) -> bool {
        match var {
            SweepVar::SnrDb => self.snr_db.is_some(),
            SweepVar::Eps => self.eps.is_some(),
            SweepVar::M => self.m.is_some(),
            SweepVar::N => self.n.is_some(),
            SweepVar::Lambda => self.lambda.is_some(),
            SweepVar::Phi => self.phi.is_some(),
        }
    }

    fn clear(&mut self, var: SweepVar) {
        match var {
            SweepVar::SnrDb => self.snr_db = None,
            SweepVar::Eps => self.eps = None,
            SweepVar::M => self.m = None,
            SweepVar::N => self.n = None,
            SweepVar::Lambda => self.lambda = None,
            SweepVar::Phi => self.phi = None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    SnrDb,
    Eps,
    M,
    N,
    Lambda,
    Phi,
}

impl SweepVar {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVar::SnrDb => "snr_db",
            SweepVar::Eps => "eps",
            SweepVar::M => "m",
            SweepVar::N => "n",
            SweepVar::Lambda => "lambda",
            SweepVar::Phi => "phi",
        }
    }

    fn is_integer(&self) -> bool {
        matches!(self, SweepVar::M | SweepVar::N)
    }

    fn set(&self, p: &mut ParamSet, v: f64) {
        match self {
            SweepVar::SnrDb => p.snr_db = v,
            SweepVar::Eps => p.eps = v,
            SweepVar::M => p.m = v as u32,
            SweepVar::N => p.n = v as u32,
            SweepVar::Lambda => p.lambda = v,
            SweepVar::Phi => p.phi = v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum SweepRange {
    Linear { start: f64, stop: f64, step: f64 },
    List { values: Vec<f64> },
}

impl SweepRange {
    /// Range values in order. Linear points are `start + i*step`, not accumulated.
    pub fn values(&self) -> Vec<f64> {
        match self {
            SweepRange::List { values } => values.clone(),
            SweepRange::Linear { start, stop, step } => {
                let slack = 1e-9 * step.abs();
                let mut out = Vec::new();
                let mut i = 0u32;
                loop {
                    let v = start + f64::from(i) * step;
                    if v > stop + slack {
                        break;
                    }
                    out.push(v);
                    i += 1;
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputMethod {
    Exact,
    Approx,
    Mc,
    /// High-SNR AIL floor for the configured ‖h_b‖² and mu_e.
    Floor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignMode {
    Constrained,
    Weighted,
}

/// On-disk sweep document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub schema_version: u32,
    pub variable: SweepVar,
    pub range: SweepRange,
    #[serde(default)]
    pub fixed: ParamOverrides,
    #[serde(default)]
    pub methods: Vec<OutputMethod>,
    /// When set, every point is first designed and the AIL columns refer to
    /// the chosen blocklength.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_abs_tol: Option<f64>,
}

/// Schema or parse failure with the offending location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl SweepSpec {
    pub fn from_json(text: &str) -> std::result::Result<Self, ConfigError> {
        let spec: SweepSpec =
            serde_json::from_str(text).map_err(|e| ConfigError(format!("config: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> std::result::Result<(), ConfigError> {
        let err = |field: &str, msg: String| Err(ConfigError(format!("{field}: {msg}")));
        if self.schema_version != SCHEMA_VERSION {
            return err(
                "schema_version",
                format!(
                    "unsupported version {} (expected {SCHEMA_VERSION})",
                    self.schema_version
                ),
            );
        }
        if let SweepRange::Linear { start, stop, step } = self.range {
            if !(step > 0.0 && step.is_finite()) {
                return err("range.step", format!("must be > 0, got {step}"));
            }
            if !(start.is_finite() && stop.is_finite()) || stop < start {
                return err(
                    "range",
                    format!("need finite start <= stop, got {start}..{stop}"),
                );
            }
        }
        let values = self.range.values();
        if values.is_empty() {
            return err("range", "is empty".into());
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return err(&format!("range.values[{i}]"), format!("not finite: {v}"));
            }
            if self.variable.is_integer()
                && (v.fract() != 0.0 || *v < 1.0 || *v > f64::from(u32::MAX))
            {
                return err(
                    &format!("range.values[{i}]"),
                    format!(
                        "{} must be a positive integer, got {v}",
                        self.variable.name()
                    ),
                );
            }
        }
        if self.fixed.has(self.variable) {
            return err(
                &format!("fixed.{}", self.variable.name()),
                "the swept variable must not also be fixed".into(),
            );
        }
        if self.methods.is_empty() && self.design.is_none() {
            return err(
                "methods",
                "request at least one method or a design mode".into(),
            );
        }
        if self.mc_samples == Some(0) {
            return err("mc_samples", "must be at least 1".into());
        }
        if let Some(t) = self.exact_abs_tol {
            if t.is_nan() || t < crate::leakage::MIN_ABS_TOL {
                return err("exact_abs_tol", format!("must be >= 1e-13, got {t}"));
            }
        }
        Ok(())
    }

    /// The same sweep with every default spelled out. Re-running it gives
    /// byte-identical output.
    pub fn effective(&self) -> SweepSpec {
        let base = self.fixed.apply(ParamSet::default());
        let mut fixed = ParamOverrides::full(&base);
        fixed.clear(self.variable);
        let mut methods = self.methods.clone();
        methods.dedup();
        SweepSpec {
            schema_version: SCHEMA_VERSION,
            variable: self.variable,
            range: self.range.clone(),
            fixed,
            methods,
            design: self.design,
            mc_samples: Some(self.mc_samples.unwrap_or(DEFAULT_MC_SAMPLES)),
            mc_seed: Some(self.mc_seed.unwrap_or(DEFAULT_MC_SEED)),
            exact_abs_tol: Some(self.exact_abs_tol.unwrap_or(DEFAULT_ABS_TOL)),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep spec serializes")
    }

    fn request(&self) -> PointRequest {
        PointRequest {
            methods: self.methods.clone(),
            design: self.design,
            mc_samples: self.mc_samples.unwrap_or(DEFAULT_MC_SAMPLES),
            mc_seed: self.mc_seed.unwrap_or(DEFAULT_MC_SEED),
            exact_abs_tol: self.exact_abs_tol.unwrap_or(DEFAULT_ABS_TOL),
        }
    }
}

/// What to compute at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointRequest {
    pub methods: Vec<OutputMethod>,
    pub design: Option<DesignMode>,
    pub mc_samples: u64,
    pub mc_seed: u64,
    pub exact_abs_tol: f64,
}

impl Default for PointRequest {
    fn default() -> Self {
        PointRequest {
            methods: vec![OutputMethod::Approx, OutputMethod::Exact],
            design: None,
            mc_samples: DEFAULT_MC_SAMPLES,
            mc_seed: DEFAULT_MC_SEED,
            exact_abs_tol: DEFAULT_ABS_TOL,
        }
    }
}

/// Values computed at one point; `None` for anything not requested.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointResult {
    pub ail_exact: Option<f64>,
    pub exact_abs_err: Option<f64>,
    pub ail_approx: Option<f64>,
    pub ail_mc: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub ail_floor: Option<f64>,
    pub est: Option<f64>,
    pub design: Option<DesignOutcome>,
}

pub fn evaluate_point(p: &ParamSet, req: &PointRequest) -> Result<PointResult> {
    let stats = p.stats()?;
    let gamma_b = p.gamma_b();
    let mut fbl = p.fbl()?;
    let mut out = PointResult::default();

    if let Some(mode) = req.design {
        let outcome = match mode {
            DesignMode::Constrained => solve_constrained_closed_form(p.phi, gamma_b, &stats, &fbl)?,
            DesignMode::Weighted => {
                solve_weighted(&WeightedObjective::new(p.lambda)?, gamma_b, &stats, &fbl)?
            }
        };
        fbl = fbl.with_n(outcome.n_star)?;
        out.design = Some(outcome);
    }
    out.est = Some(est(&fbl));

    for method in &req.methods {
        match method {
            OutputMethod::Exact => {
                let e = ail_exact(&fbl, gamma_b, &stats, req.exact_abs_tol)?;
                out.ail_exact = Some(e.value());
                out.exact_abs_err = e.quadrature_abs_err();
            }
            OutputMethod::Approx => {
                out.ail_approx = Some(ail_approx(&fbl, gamma_b, &stats)?.value())
            }
            OutputMethod::Mc => {
                let mc = McConfig::new(req.mc_samples, req.mc_seed, McMode::Conditional)?;
                let e = ail_mc(&fbl, Some(gamma_b), &stats, &mc)?;
                out.ail_mc = Some(e.value());
                out.mc_stderr = e.std_error();
            }
            OutputMethod::Floor => out.ail_floor = Some(ail_floor(&fbl, p.hb_gain, p.mu_e)?),
        }
    }
    Ok(out)
}

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    /// Pre-rendered text; must not contain commas or newlines.
    Text(String),
    Empty,
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Float(v) => f.write_str(&format_f64(*v)),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Bool(v) => write!(f, "{v}"),
            Cell::Text(t) => f.write_str(t),
            Cell::Empty => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::to_string).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }
}

fn sweep_header(spec: &SweepSpec) -> Vec<&'static str> {
    let mut h = vec![spec.variable.name()];
    let has = |m: OutputMethod| spec.methods.contains(&m);
    if has(OutputMethod::Exact) {
        h.push("ail_exact");
    }
    if has(OutputMethod::Approx) {
        h.push("ail_approx");
    }
    if has(OutputMethod::Mc) {
        h.extend(["ail_mc", "mc_stderr"]);
    }
    if has(OutputMethod::Floor) {
        h.push("ail_floor");
    }
    h.push("est");
    if spec.design.is_some() {
        h.extend(["n_star", "feasible"]);
    }
    h
}

fn sweep_row(spec: &SweepSpec, value: f64, r: &PointResult) -> Vec<Cell> {
    let swept = if spec.variable.is_integer() {
        Cell::Int(value as u64)
    } else {
        Cell::Float(value)
    };
    let mut row = vec![swept];
    let has = |m: OutputMethod| spec.methods.contains(&m);
    if has(OutputMethod::Exact) {
        row.push(r.ail_exact.into());
    }
    if has(OutputMethod::Approx) {
        row.push(r.ail_approx.into());
    }
    if has(OutputMethod::Mc) {
        row.push(r.ail_mc.into());
        row.push(r.mc_stderr.into());
    }
    if has(OutputMethod::Floor) {
        row.push(r.ail_floor.into());
    }
    row.push(r.est.into());
    if spec.design.is_some() {
        match r.design {
            Some(d) => row.extend([Cell::Int(u64::from(d.n_star)), Cell::Bool(d.feasible)]),
            None => row.extend([Cell::Empty, Cell::Empty]),
        }
    }
    row
}

/// Evaluates every range point; rows come back in range order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Table> {
    spec.validate().map_err(|e| Error::InvalidParams(e.0))?;
    let base = spec.fixed.apply(ParamSet::default());
    let req = spec.request();
    let values = spec.range.values();

    let results: Vec<Result<PointResult>> = values
        .par_iter()
        .map(|&v| {
            let mut p = base;
            spec.variable.set(&mut p, v);
            evaluate_point(&p, &req)
        })
        .collect();

    let mut rows = Vec::with_capacity(values.len());
    for (v, r) in values.iter().zip(results) {
        rows.push(sweep_row(spec, *v, &r?));
    }
    Ok(Table {
        header: sweep_header(spec).into_iter().map(String::from).collect(),
        rows,
    })
}

/// Every blocklength with EST, AIL and dominance, plus the `λ` values of
/// `lambdas` whose weighted solution picked that blocklength
/// (`;`-separated, empty if none).
pub fn pareto_table(p: &ParamSet, lambdas: &[f64]) -> Result<Table> {
    let stats = p.stats()?;
    let fbl = p.fbl()?;
    let gamma_b = p.gamma_b();
    let points = pareto_front(gamma_b, &stats, &fbl)?;
    let scan = weighted_scan(lambdas, gamma_b, &stats, &fbl)?;

    let mut tags: Vec<Vec<f64>> = vec![Vec::new(); points.len()];
    for (l, o) in scan {
        tags[o.n_star as usize - 1].push(l);
    }

    let rows = points
        .iter()
        .zip(&tags)
        .map(|(pt, t)| {
            let lam: Vec<String> = t.iter().map(|&l| format_f64(l)).collect();
            vec![
                Cell::Int(u64::from(pt.n)),
                Cell::Float(pt.est),
                Cell::Float(pt.ail),
                Cell::Bool(pt.dominated),
                Cell::Text(lam.join(";")),
            ]
        })
        .collect();

    Ok(Table {
        header: ["n", "est", "ail", "dominated", "scan_lambdas"]
            .into_iter()
            .map(String::from)
            .collect(),
        rows,
    })
}

/// Default `λ` grid for Pareto tracing: 101 uniform values on `[0, 1]`.
pub fn default_lambda_grid() -> Vec<f64> {
    lambda_grid(101)
}
