//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;

use fblsec_core::core_math::{q_func, q_inv};
use fblsec_core::leakage::{ail_approx, ail_exact, ail_floor, saddle_point, xi, DEFAULT_ABS_TOL};
use fblsec_core::montecarlo::ail_mc;
use fblsec_core::optimizer::{
    lambda_grid, pareto_front, solve_constrained_closed_form, solve_constrained_oracle,
    solve_weighted, weighted_scan, AilModel, ConstraintQuadratic,
};
use fblsec_core::sop::{corollary_redundancy_rate, sop, SopParams};
use fblsec_core::{db_to_linear, ChannelStats, FblParams, McConfig, McMode, WeightedObjective};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SOP_REL_TOL: f64 = 1e-12;
const EXACT_APPROX_BAND: f64 = 0.15;
const EXACT_FLOOR_FOR_BAND: f64 = 1e-5;
const FLOOR_REL_TOL: f64 = 0.01;
const RESIDUAL_REL_TOL: f64 = 1e-9;
const RELIABILITY_GAIN_RANGE: (f64, f64) = (1e5, 1e7);
const MC_SAMPLES: u64 = 1_000_000;
const MC_SEEDS: u64 = 20;
const MC_MIN_PASSES: usize = 19;
const LINEAR_FIT_MIN_R2: f64 = 0.99;
const ROUND_TRIP_TOL: f64 = 1e-10;
const CURVATURE_REL_TOL: f64 = 1e-6;
const LAPLACE_REL_TOL: f64 = 1e-12;

const RS_VALUES: [f64; 3] = [0.2, 0.5, 1.0];

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn defaults(n: u32) -> FblParams {
    FblParams::new(200, n, 1e-3, 1000).unwrap()
}

fn default_stats() -> ChannelStats {
    ChannelStats::new(1.0, 1.0, 0.1).unwrap()
}

fn sop_matches_approx() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut draws, mut worst) = (0, 0.0f64);
    while draws < 1000 {
        let m: u32 = rng.random_range(1..=500);
        let n: u32 = rng.random_range(m..=2000);
        let eps = 10f64.powf(rng.random_range(-9.0..-0.4));
        let rho = db_to_linear(rng.random_range(-10.0..40.0));
        let hb = rng.random_range(0.1..10.0);
        let mu_e = rng.random_range(0.01..2.0);
        let p = FblParams::new(m, n, eps, 2000).unwrap();
        let stats = ChannelStats::new(rho, 1.0, mu_e).unwrap();
        let gb = rho * hb;
        if saddle_point(&p, gb).unwrap().x0 < 0.0 {
            continue;
        }
        let approx = ail_approx(&p, gb, &stats).unwrap().value();
        if approx <= 1e-300 {
            continue;
        }
        let re = corollary_redundancy_rate(&p, gb).unwrap();
        let outage = sop(&SopParams::new(re, stats.gbar_e()).unwrap());
        worst = worst.max(rel(outage, approx));
        draws += 1;
    }
    outcome(
        worst <= SOP_REL_TOL,
        format!("{draws} draws, max rel err {worst:.2e} (tol {SOP_REL_TOL:e})"),
    )
}

fn exact_tracks_approx() -> Outcome {
    let mut worst = (0.0f64, 0.0, 0.0);
    let mut checked = 0;
    for rs in RS_VALUES {
        let p = FblParams::new((rs * 400.0f64).round() as u32, 400, 1e-3, 1000).unwrap();
        for k in 0..=20 {
            let db = -10.0 + 2.0 * f64::from(k);
            let rho = db_to_linear(db);
            let stats = ChannelStats::new(rho, 1.0, 0.1).unwrap();
            let exact = ail_exact(&p, rho, &stats, DEFAULT_ABS_TOL).unwrap().value();
            if exact < EXACT_FLOOR_FOR_BAND {
                continue;
            }
            let approx = ail_approx(&p, rho, &stats).unwrap().value();
            let gap = rel(approx, exact);
            checked += 1;
            if gap > worst.0 {
                worst = (gap, rs, db);
            }
        }
    }
    outcome(
        worst.0 <= EXACT_APPROX_BAND,
        format!(
            "{checked} points, max gap {:.1}% at R_s = {}, {} dB (band {:.0}%)",
            100.0 * worst.0,
            worst.1,
            worst.2,
            100.0 * EXACT_APPROX_BAND
        ),
    )
}

fn floor_at_high_snr() -> Outcome {
    let rho = db_to_linear(60.0);
    let stats = ChannelStats::new(rho, 1.0, 0.1).unwrap();
    let mut parts = Vec::new();
    let mut pass = true;
    for rs in RS_VALUES {
        let p = FblParams::new((rs * 400.0f64).round() as u32, 400, 1e-3, 1000).unwrap();
        let approx = ail_approx(&p, rho, &stats).unwrap().value();
        let floor = ail_floor(&p, 1.0, 0.1).unwrap();
        let r = rel(approx, floor);
        pass &= r <= FLOOR_REL_TOL;
        parts.push(format!("R_s={rs}: {r:.2e}"));
    }
    outcome(
        pass,
        format!("rel gap {} (tol {FLOOR_REL_TOL})", parts.join(", ")),
    )
}

fn closed_form_matches_oracle() -> Outcome {
    let mut mismatches = Vec::new();
    let mut ties = 0;
    let mut worst_residual = 0.0f64;
    for db in [-5.0, 0.0, 5.0, 10.0, 15.0] {
        let rho = db_to_linear(db);
        let stats = ChannelStats::new(rho, 1.0, 0.1).unwrap();
        for m in [100, 200, 300, 400, 500] {
            let p = FblParams::new(m, 1000, 1e-3, 1000).unwrap();
            for k in 0..5 {
                let phi = 10f64.powf(-3.0 + 0.5 * f64::from(k));
                let cf = solve_constrained_closed_form(phi, rho, &stats, &p).unwrap();
                let or = solve_constrained_oracle(phi, rho, &stats, &p, AilModel::Approx).unwrap();
                let quad = ConstraintQuadratic::new(phi, rho, &stats, &p).unwrap();
                if let Some(nr) = quad.real_blocklength() {
                    worst_residual = worst_residual.max(quad.residual(nr));
                }
                if cf.n_star != or.n_star {
                    let flat = cf.n_star.abs_diff(or.n_star) == 1
                        && quad
                            .real_blocklength()
                            .is_some_and(|nr| (nr - nr.round()).abs() <= 1e-9 * nr);
                    if flat {
                        ties += 1;
                    } else {
                        mismatches.push(format!(
                            "({db} dB, m={m}, phi={phi:.0e}): {} vs {}",
                            cf.n_star, or.n_star
                        ));
                    }
                }
            }
        }
    }
    let at_defaults = solve_constrained_closed_form(1e-2, 1.0, &default_stats(), &defaults(1000))
        .unwrap()
        .n_star;
    let pass = mismatches.is_empty()
        && at_defaults.abs_diff(660) <= 1
        && worst_residual <= RESIDUAL_REL_TOL;
    outcome(
        pass,
        format!(
            "125 points, {} mismatches, {ties} flat ties, N* at defaults = {at_defaults}, \
             max residual {worst_residual:.1e}{}",
            mismatches.len(),
            if mismatches.is_empty() {
                String::new()
            } else {
                format!(" [{}]", mismatches.join("; "))
            }
        ),
    )
}

fn eps_for_ail(target: f64) -> f64 {
    let stats = default_stats();
    let ail = |log_eps: f64| {
        let p = FblParams::new(200, 900, 10f64.powf(log_eps), 1000).unwrap();
        ail_approx(&p, 1.0, &stats).unwrap().value()
    };
    let (mut lo, mut hi) = (-40.0f64, (0.5f64).log10());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ail(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    10f64.powf(0.5 * (lo + hi))
}

fn reliability_gain() -> Outcome {
    let eps_tight = eps_for_ail(2e-3);
    let eps_loose = eps_for_ail(1e-2);
    let ratio = eps_tight / eps_loose;
    outcome(
        ratio >= RELIABILITY_GAIN_RANGE.0 && ratio <= RELIABILITY_GAIN_RANGE.1,
        format!(
            "eps(2e-3) = {eps_tight:.4e}, eps(1e-2) = {eps_loose:.4e}, ratio {ratio:.3e} \
             (range [{:e}, {:e}])",
            RELIABILITY_GAIN_RANGE.0, RELIABILITY_GAIN_RANGE.1
        ),
    )
}

fn monte_carlo_consistency() -> Outcome {
    let p = defaults(400);
    let stats = default_stats();
    let exact = ail_exact(&p, 1.0, &stats, DEFAULT_ABS_TOL).unwrap().value();
    let mut passes = 0;
    let mut worst_z = 0.0f64;
    for seed in 1..=MC_SEEDS {
        let mc = McConfig::new(MC_SAMPLES, seed, McMode::Conditional).unwrap();
        let e = ail_mc(&p, Some(1.0), &stats, &mc).unwrap();
        let z = (e.value() - exact).abs() / e.std_error().unwrap();
        worst_z = worst_z.max(z);
        if z <= 3.0 {
            passes += 1;
        }
    }
    outcome(
        passes >= MC_MIN_PASSES,
        format!("{passes}/{MC_SEEDS} seeds within 3 sigma of {exact:.6}, max |z| = {worst_z:.2}"),
    )
}

fn weighted_extremes() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut sets = 0;
    let mut failures = Vec::new();
    while sets < 10 {
        let n_max: u32 = rng.random_range(100..=2000);
        let m: u32 = rng.random_range(1..=n_max / 2);
        let eps = 10f64.powf(rng.random_range(-6.0..-1.0));
        let rho = db_to_linear(rng.random_range(-5.0..20.0));
        let mu_e = rng.random_range(0.01..1.0);
        let p = FblParams::new(m, n_max, eps, n_max).unwrap();
        let stats = ChannelStats::new(rho, 1.0, mu_e).unwrap();
        let at_max = ail_approx(&p, rho, &stats).unwrap().value();
        let before = ail_approx(&p.with_n(n_max - 1).unwrap(), rho, &stats)
            .unwrap()
            .value();
        if at_max >= before {
            continue;
        }
        sets += 1;
        let low = solve_weighted(&WeightedObjective::new(0.0).unwrap(), rho, &stats, &p).unwrap();
        let high = solve_weighted(&WeightedObjective::new(1.0).unwrap(), rho, &stats, &p).unwrap();
        if low.n_star != 1 || high.n_star != n_max {
            failures.push(format!(
                "(m={m}, N^max={n_max}): {} / {}",
                low.n_star, high.n_star
            ));
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{sets} parameter sets, {} failures {}",
            failures.len(),
            failures.join("; ")
        ),
    )
}

fn pareto_soundness() -> Outcome {
    let p = defaults(1000);
    let stats = default_stats();
    let points = pareto_front(1.0, &stats, &p).unwrap();
    let dominates = |a: &fblsec_core::ParetoPoint, b: &fblsec_core::ParetoPoint| {
        a.est >= b.est && a.ail <= b.ail && (a.est > b.est || a.ail < b.ail)
    };

    let mut wrong_marks = 0;
    for b in &points {
        let truly = points.iter().any(|a| dominates(a, b));
        if truly != b.dominated {
            wrong_marks += 1;
        }
    }
    let front: Vec<_> = points.iter().filter(|q| !q.dominated).collect();
    let mut dominated_pairs = 0;
    for a in &front {
        for b in &front {
            if dominates(a, b) {
                dominated_pairs += 1;
            }
        }
    }
    let scan = weighted_scan(&lambda_grid(101), 1.0, &stats, &p).unwrap();
    let outside = scan
        .iter()
        .filter(|(_, o)| points[o.n_star as usize - 1].dominated)
        .count();
    outcome(
        wrong_marks == 0 && dominated_pairs == 0 && outside == 0,
        format!(
            "{} points, front size {}, {dominated_pairs} dominated pairs in front, \
             {outside}/{} scan solutions outside front, {wrong_marks} mislabelled",
            points.len(),
            front.len(),
            scan.len()
        ),
    )
}

fn r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

fn design_curve_shapes() -> Outcome {
    let n_max = 1000;
    let p = defaults(n_max);
    let snr_curve: Vec<u32> = (0..=40)
        .map(|k| {
            let rho = db_to_linear(-10.0 + 0.5 * f64::from(k));
            let stats = ChannelStats::new(rho, 1.0, 0.1).unwrap();
            solve_constrained_closed_form(1e-2, 1.0, &stats, &p)
                .unwrap()
                .n_star
        })
        .collect();
    let non_decreasing = snr_curve.windows(2).all(|w| w[0] <= w[1]);
    let saturates = snr_curve.last() == Some(&n_max) && snr_curve[0] < n_max;

    let stats = default_stats();
    let (mut below_m, mut below_n) = (Vec::new(), Vec::new());
    let mut ceiling_ok = true;
    let mut above = 0;
    for m in (20..=600).step_by(20) {
        let pm = FblParams::new(m, n_max, 1e-3, n_max).unwrap();
        let o = solve_constrained_closed_form(1e-2, 1.0, &stats, &pm).unwrap();
        if o.n_star < n_max {
            below_m.push(f64::from(m));
            below_n.push(f64::from(o.n_star));
        } else {
            above += 1;
            let flat = (1.0 - 1e-3) * f64::from(m) / f64::from(n_max);
            ceiling_ok &= rel(o.est, flat) <= 1e-15;
        }
    }
    let r2 = r_squared(&below_m, &below_n);
    let pass = non_decreasing && saturates && r2 >= LINEAR_FIT_MIN_R2 && ceiling_ok && above > 0;
    outcome(
        pass,
        format!(
            "N*(rho) {}..{} non-decreasing={non_decreasing} saturates={saturates}; \
             N*(m) R^2 = {r2:.5} over {} points, {above} ceiling points EST=(1-eps)m/N^max: {ceiling_ok}",
            snr_curve[0],
            snr_curve[snr_curve.len() - 1],
            below_m.len()
        ),
    )
}

fn round_trip() -> Outcome {
    let (mut worst, mut at) = (0.0f64, 0.0);
    for k in 0..=12_000 {
        let x = -6.0 + 1e-3 * f64::from(k);
        let err = (q_inv(q_func(x)).unwrap() - x).abs();
        if err > worst {
            worst = err;
            at = x;
        }
    }
    outcome(
        worst <= ROUND_TRIP_TOL,
        format!("max |q_inv(q_func(x)) - x| = {worst:.2e} at x = {at:.3} (tol {ROUND_TRIP_TOL:e})"),
    )
}

fn curvature() -> Outcome {
    let p = defaults(400);
    let s = saddle_point(&p, 1.0).unwrap();
    let h = 1e-4;
    let f = |x: f64| xi(x, &p, 1.0).unwrap();
    let fd = (f(s.x0 + h) - 2.0 * f(s.x0) + f(s.x0 - h)) / (h * h);
    let stated = 2.0 / (s.x0 * (s.x0 + 2.0));
    let r = rel(fd, stated);
    outcome(
        r <= CURVATURE_REL_TOL,
        format!("finite difference {fd:.6}, 2/(x0(x0+2)) = {stated:.6}, rel err {r:.2e} (tol {CURVATURE_REL_TOL:e})"),
    )
}

fn laplace_assembly() -> Outcome {
    let mut worst = 0.0f64;
    for (n, gb, rho) in [
        (400, 1.0, 1.0),
        (900, 3.0, 2.0),
        (150, 25.0, 10.0),
        (1000, 0.5, 0.3),
    ] {
        let p = defaults(n);
        let stats = ChannelStats::new(rho, 1.0, 0.1).unwrap();
        let s = saddle_point(&p, gb).unwrap();
        let nn = f64::from(n);
        let assembled = (-nn * xi(s.x0, &p, gb).unwrap()).exp()
            * s.psi_at_x0(&p, gb, &stats).unwrap()
            * (2.0 * PI / (nn * s.xi_second.unwrap())).sqrt();
        let closed = (-s.x0 / stats.gbar_e()).exp();
        worst = worst.max(rel(assembled, closed));
    }
    outcome(
        worst <= LAPLACE_REL_TOL,
        format!("max rel err {worst:.2e} (tol {LAPLACE_REL_TOL:e})"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, Check); 12] = [
        ("1", "SOP equals saddle-point AIL", sop_matches_approx),
        ("2", "exact vs approx within band", exact_tracks_approx),
        ("3", "AIL floor at 60 dB", floor_at_high_snr),
        (
            "4",
            "closed-form blocklength vs oracle",
            closed_form_matches_oracle,
        ),
        ("5", "security-reliability trade", reliability_gain),
        ("6", "Monte Carlo consistency", monte_carlo_consistency),
        ("7", "weighted-objective extremes", weighted_extremes),
        ("8", "Pareto soundness", pareto_soundness),
        ("9", "design-curve shapes", design_curve_shapes),
        ("10a", "q_func/q_inv round trip on [-6, 6]", round_trip),
        ("10b", "finite-difference curvature at x0", curvature),
        ("10c", "Laplace assembly", laplace_assembly),
    ];

    let mut failed = Vec::new();
    for (id, name, run) in criteria {
        let o = run();
        println!(
            "[{}] criterion {id:<3} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!(
            "acceptance: {} failing: {}",
            failed.len(),
            failed.join(", ")
        );
        ExitCode::FAILURE
    }
}
