//! Parameter validation and the mapping from commands to library calls.

use std::time::Instant;

use wglab::arith::{build_mangoldt_table, integer_kth_root};
use wglab::asymptotics::{
    a_scale, error_envelopes, h_windows, mt_power_sum, ErrorProfile, HWindows, ProfileRow,
};
use wglab::circle::{
    decompose_integral, l2_profile, laplace_residual, parseval_check, verify_basic_identity,
    L2Region, L2Weight, SmoothedSumSpec, SplitMode, TripleSetup, DEFAULT_EPS_TRUNC,
};
use wglab::counting::{interval_sums, representation_count, ExponentTriple};

use crate::args::{Command, Exponents, Format, LemmaName, Params};
use crate::error::CliError;
use crate::report::{Cell, Report};

pub const DEFAULT_EPSILON: f64 = 0.01;
pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
/// Threshold on `H / (N^{1-1/k3} L^6)` for the conditional-window flag.
pub const RH_THRESHOLD: f64 = 1.0;

pub const SCAN_COLUMNS: [&str; 15] = [
    "N",
    "H",
    "k1",
    "k2",
    "k3",
    "sum_unweighted",
    "sum_weighted",
    "main_term",
    "weighted_main_term",
    "rel_err",
    "rel_err_weighted",
    "A_ratio",
    "phi",
    "in_uncond_window",
    "wall_ms",
];

/// Fully resolved run: command, merged parameters and worker count.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub params: Params,
    pub workers: usize,
    pub format: Format,
}

/// A finished run. `failure` is set when the computation completed but a
/// check it performs did not pass; the report is still written.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub failure: Option<CliError>,
}

#[derive(Debug, Clone, Copy)]
enum HRule {
    Fixed(u64),
    Theta(f64),
}

#[derive(Debug, Clone)]
enum Job {
    Count { n: u64, triple: ExponentTriple<f64> },
    Interval { n: u64, h: u64, triple: ExponentTriple<f64>, epsilon: f64, per_n: bool },
    Scan { grid: Vec<u64>, rule: HRule, triple: ExponentTriple<f64>, epsilon: f64, c: f64 },
    Identity { n: u64, h: u64, triple: ExponentTriple<f64>, eps_trunc: f64, tolerance: f64 },
    Decompose { n: u64, h: u64, triple: ExponentTriple<f64>, eps_trunc: f64, tolerance: f64, mode: SplitMode<f64> },
    Laplace { n: u64, mu: f64, x: f64 },
    Mt { n: u64, h: u64, lambda: f64 },
    L2 { n: u64, k: u32, eps_trunc: f64, region: L2Region<f64>, weight: L2Weight, c: f64, rel_tol: f64 },
    Parseval { n: u64, k: u32, eps_trunc: f64 },
}

fn require<T: Clone>(v: &Option<T>, flag: &str, command: &str) -> Result<T, CliError> {
    v.clone().ok_or_else(|| CliError::missing(flag, command))
}

fn check(cond: bool, condition: &str, message: impl FnOnce() -> String) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::invalid(condition, message()))
    }
}

fn triple_of(k: &Option<Exponents>) -> Result<ExponentTriple<f64>, CliError> {
    let k = k.clone().map_or_else(|| vec![2, 2, 2], |e| e.0);
    check(k.len() == 3, "k-triple", || format!("--k needs k1,k2,k3, got {k:?}"))?;
    let t = if k[0] == 1 {
        ExponentTriple::exploratory(k[0], k[1], k[2])
    } else {
        ExponentTriple::new(k[0], k[1], k[2])
    };
    t.map_err(|e| CliError::invalid("k-ordered", e.to_string()))
}

fn single_k(k: &Option<Exponents>) -> Result<u32, CliError> {
    let k = k.clone().map_or_else(|| vec![2], |e| e.0);
    check(k.len() == 1 && k[0] >= 1, "k-single", || format!("this lemma takes a single k ≥ 1, got {k:?}"))?;
    Ok(k[0])
}

fn epsilon_of(p: &Params) -> Result<f64, CliError> {
    let e = p.epsilon.unwrap_or(DEFAULT_EPSILON);
    check(e > 0.0 && e < 1.0 / 6.0, "epsilon-range", || format!("epsilon must lie in (0, 1/6), got {e}"))?;
    Ok(e)
}

fn eps_trunc_of(p: &Params) -> Result<f64, CliError> {
    let e = p.eps_trunc.unwrap_or(DEFAULT_EPS_TRUNC);
    check(e > 0.0 && e < 1.0, "eps-trunc-range", || format!("eps-trunc must lie in (0, 1), got {e}"))?;
    Ok(e)
}

fn tolerance_of(p: &Params) -> Result<f64, CliError> {
    let t = p.tolerance.unwrap_or(DEFAULT_TOLERANCE);
    check(t > 0.0 && t.is_finite(), "tolerance-positive", || format!("tolerance must be positive, got {t}"))?;
    Ok(t)
}

fn n_h(p: &Params, command: &str, min_n: u64) -> Result<(u64, u64), CliError> {
    let n = require(&p.n, "N", command)?;
    let h = require(&p.h, "H", command)?;
    check(n >= min_n, "N-minimum", || format!("N must be ≥ {min_n}, got {n}"))?;
    check(h >= 1, "H-positive", || "H must be ≥ 1".into())?;
    check(n.checked_add(h).is_some(), "N-plus-H-overflow", || "N + H overflows".into())?;
    Ok((n, h))
}

fn plan(cfg: &RunConfig) -> Result<Job, CliError> {
    let p = &cfg.params;
    check(cfg.workers >= 1, "workers-positive", || "workers must be ≥ 1".into())?;
    let name = match cfg.command {
        Command::Lemma { name } => name.as_str(),
        c => c.name(),
    };
    let job = match cfg.command {
        Command::Count => Job::Count {
            n: require(&p.n, "N", name)?,
            triple: triple_of(&p.k)?,
        },
        Command::Interval => {
            let (n, h) = n_h(p, name, 3)?;
            Job::Interval { n, h, triple: triple_of(&p.k)?, epsilon: epsilon_of(p)?, per_n: p.per_n }
        }
        Command::Scan => {
            let grid = require(&p.grid, "grid", name)?.points();
            check(!grid.is_empty(), "grid-nonempty", || "the N-grid is empty".into())?;
            let triple = triple_of(&p.k)?;
            let epsilon = epsilon_of(p)?;
            let rule = match (p.h, p.theta) {
                (Some(_), Some(_)) => {
                    return Err(CliError::invalid("H-or-theta", "give either --H or --theta, not both"))
                }
                (Some(h), None) => {
                    check(h >= 1, "H-positive", || "H must be ≥ 1".into())?;
                    HRule::Fixed(h)
                }
                (None, Some(t)) => {
                    check(t > 0.0 && t < 1.0, "theta-range", || format!("theta must lie in (0, 1), got {t}"))?;
                    HRule::Theta(t)
                }
                (None, None) => {
                    let w = h_windows(1000, &triple, DEFAULT_EPSILON, None, RH_THRESHOLD)?;
                    check(!w.empty, "window-nonempty", || "the default H window is empty for this k".into())?;
                    HRule::Theta(0.5 * (w.lower_exponent + w.upper_exponent))
                }
            };
            Job::Scan { grid, rule, triple, epsilon, c: p.c.unwrap_or(DEFAULT_C) }
        }
        Command::Identity => {
            let (n, h) = n_h(p, name, 1)?;
            Job::Identity { n, h, triple: triple_of(&p.k)?, eps_trunc: eps_trunc_of(p)?, tolerance: tolerance_of(p)? }
        }
        Command::Decompose => {
            let (n, h) = n_h(p, name, 1)?;
            let mode = match p.b {
                Some(b) => {
                    check(b > 0.0 && b <= h as f64 / 2.0, "B-range", || format!("B must lie in (0, H/2], got {b}"))?;
                    SplitMode::Unconditional { b }
                }
                None => SplitMode::Conditional,
            };
            Job::Decompose {
                n,
                h,
                triple: triple_of(&p.k)?,
                eps_trunc: eps_trunc_of(p)?,
                tolerance: tolerance_of(p)?,
                mode,
            }
        }
        Command::Lemma { name: lemma } => plan_lemma(lemma, p)?,
    };
    Ok(job)
}

fn plan_lemma(lemma: LemmaName, p: &Params) -> Result<Job, CliError> {
    let name = lemma.as_str();
    let n = require(&p.n, "N", name)?;
    check(n >= 1, "N-positive", || "N must be ≥ 1".into())?;
    let job = match lemma {
        LemmaName::Laplace => {
            let mu = require(&p.mu, "mu", name)?;
            let x = require(&p.x, "X", name)?;
            check(mu > 0.0, "mu-positive", || format!("mu must be positive, got {mu}"))?;
            check(x > 0.0 && x <= 0.5, "X-range", || format!("X must lie in (0, 1/2], got {x}"))?;
            Job::Laplace { n, mu, x }
        }
        LemmaName::Mt => {
            let (n, h) = n_h(p, name, 1)?;
            check(h <= n, "H-at-most-N", || format!("H must be ≤ N, got H={h}, N={n}"))?;
            Job::Mt { n, h, lambda: require(&p.lambda, "lambda", name)? }
        }
        LemmaName::Tolev | LemmaName::Lp | LemmaName::WeightedL2 => {
            let k = single_k(&p.k)?;
            let (region, weight) = match lemma {
                LemmaName::Tolev => {
                    let tau = require(&p.tau, "tau", name)?;
                    check((0.0..=0.5).contains(&tau), "tau-range", || format!("tau must lie in [0, 1/2], got {tau}"))?;
                    (L2Region::Symmetric { half_width: tau }, L2Weight::Unit)
                }
                LemmaName::Lp => {
                    let xi = require(&p.xi, "xi", name)?;
                    check((0.0..=0.5).contains(&xi), "xi-range", || format!("xi must lie in [0, 1/2], got {xi}"))?;
                    (L2Region::Symmetric { half_width: xi }, L2Weight::Unit)
                }
                _ => {
                    let tau = require(&p.tau, "tau", name)?;
                    check(tau > 0.0 && tau < 0.5, "tau-range", || format!("tau must lie in (0, 1/2), got {tau}"))?;
                    (L2Region::Complement { tau }, L2Weight::InverseAlpha)
                }
            };
            Job::L2 {
                n,
                k,
                eps_trunc: eps_trunc_of(p)?,
                region,
                weight,
                c: p.c.unwrap_or(DEFAULT_C),
                rel_tol: tolerance_of(p)?,
            }
        }
        LemmaName::Parseval => Job::Parseval { n, k: single_k(&p.k)?, eps_trunc: eps_trunc_of(p)? },
    };
    Ok(job)
}

fn k_cells(t: &ExponentTriple<f64>) -> [Cell; 3] {
    t.k().map(Cell::from)
}

fn windows(n: u64, h: u64, t: &ExponentTriple<f64>, epsilon: f64) -> Result<HWindows<f64>, CliError> {
    Ok(h_windows(n, t, epsilon, Some(h), RH_THRESHOLD)?)
}

fn counting_table(bound: u64, t: &ExponentTriple<f64>) -> Result<wglab::MangoldtTable64, CliError> {
    let limit = integer_kth_root(bound, t.k()[0])?.max(2);
    Ok(build_mangoldt_table(limit)?)
}

fn count(n: u64, t: &ExponentTriple<f64>) -> Result<Outcome, CliError> {
    let table = counting_table(n, t)?;
    let r = representation_count(n, t, &table)?;
    let mut report = Report::new(&["n", "k1", "k2", "k3", "R"]);
    let [a, b, c] = k_cells(t);
    report.push(vec![n.into(), a, b, c, r.into()]);
    Ok(Outcome { report, failure: None })
}

fn interval(n: u64, h: u64, t: &ExponentTriple<f64>, epsilon: f64, per_n: bool, workers: usize) -> Result<Outcome, CliError> {
    let table = counting_table(n + h, t)?;
    let r = interval_sums(n, h, t, &table, per_n, workers)?;
    let env = error_envelopes(n, h, t)?;
    let w = windows(n, h, t, epsilon)?;
    let flags = w.flags.expect("flags requested");
    let summary: Vec<(&'static str, Cell)> = vec![
        ("N", n.into()),
        ("H", h.into()),
        ("k1", t.k()[0].into()),
        ("k2", t.k()[1].into()),
        ("k3", t.k()[2].into()),
        ("sum_unweighted", r.sum_unweighted.into()),
        ("sum_weighted", r.sum_weighted.into()),
        ("main_term", r.main_term.into()),
        ("weighted_main_term", r.weighted_main_term.into()),
        ("rel_err", r.relative_error_unweighted.into()),
        ("rel_err_weighted", r.relative_error_weighted.into()),
        ("phi", env.phi.into()),
        ("psi", env.psi.into()),
        ("in_uncond_window", flags.in_unconditional.into()),
        ("rh_ratio", flags.rh_ratio.into()),
        ("in_rh_window", flags.in_rh.into()),
    ];
    let report = match r.per_n {
        Some(per_n) => {
            let mut report = Report::new(&["n", "R", "weighted_R"]);
            for (m, v) in per_n {
                report.push(vec![m.into(), v.into(), (v * (-(m as f64) / n as f64).exp()).into()]);
            }
            for (k, v) in summary {
                report.trail(k, v);
            }
            report
        }
        None => {
            let columns: Vec<&'static str> = summary.iter().map(|(k, _)| *k).collect();
            let mut report = Report::new(&columns);
            report.push(summary.into_iter().map(|(_, v)| v).collect());
            report
        }
    };
    Ok(Outcome { report, failure: None })
}

fn scan_row(
    n: u64,
    rule: HRule,
    t: &ExponentTriple<f64>,
    epsilon: f64,
    c: f64,
    table: &wglab::MangoldtTable64,
    workers: usize,
) -> Result<ProfileRow<f64>, CliError> {
    let start = Instant::now();
    check(n >= 3, "N-minimum", || format!("N must be ≥ 3, got {n}"))?;
    let h = match rule {
        HRule::Fixed(h) => h,
        HRule::Theta(theta) => ((n as f64).powf(theta).floor() as u64).max(1),
    };
    let r = interval_sums(n, h, t, table, false, workers)?;
    let a = a_scale(n, c)?;
    let a_minus = a_scale(n, -c)?;
    let env = error_envelopes(n, h, t)?;
    let flags = windows(n, h, t, epsilon)?.flags.expect("flags requested");
    Ok(ProfileRow {
        n,
        h,
        k: t.k(),
        sum_unweighted: r.sum_unweighted,
        sum_weighted: r.sum_weighted,
        main_term: r.main_term,
        weighted_main_term: r.weighted_main_term,
        relative_error: r.relative_error_unweighted,
        relative_error_weighted: r.relative_error_weighted,
        a_scale: a,
        a_ratio: r.relative_error_unweighted.abs() / a_minus,
        phi: env.phi,
        in_unconditional_window: flags.in_unconditional,
        in_rh_window: flags.in_rh,
        workers,
        wall_ms: start.elapsed().as_millis(),
    })
}

fn scan(grid: &[u64], rule: HRule, t: &ExponentTriple<f64>, epsilon: f64, c: f64, workers: usize) -> Result<Outcome, CliError> {
    let top = grid
        .iter()
        .map(|&n| match rule {
            HRule::Fixed(h) => n.saturating_add(h),
            HRule::Theta(theta) => n.saturating_add((n as f64).powf(theta) as u64),
        })
        .max()
        .unwrap_or(3);
    let table = counting_table(top, t)?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &n in grid {
        match scan_row(n, rule, t, epsilon, c, &table, workers) {
            Ok(row) => rows.push(row),
            Err(e) => failures.push((n, e)),
        }
    }
    let profile = ErrorProfile::new(rows);
    let mut report = Report::new(&SCAN_COLUMNS);
    for r in profile.rows() {
        report.push(vec![
            r.n.into(),
            r.h.into(),
            r.k[0].into(),
            r.k[1].into(),
            r.k[2].into(),
            r.sum_unweighted.into(),
            r.sum_weighted.into(),
            r.main_term.into(),
            r.weighted_main_term.into(),
            r.relative_error.into(),
            r.relative_error_weighted.into(),
            r.a_ratio.into(),
            r.phi.into(),
            r.in_unconditional_window.into(),
            r.wall_ms.into(),
        ]);
    }
    const NA: &str = "not-applicable";
    match profile.trend() {
        Some(tr) => {
            report.trail("trend_strictly_decreasing", tr.strictly_decreasing.map_or(Cell::from(NA), Cell::from));
            report.trail("trend_first_rel_err", tr.first_relative_error);
            report.trail("trend_final_rel_err", tr.final_relative_error);
            report.trail("trend_log_log_slope", tr.log_log_slope.map_or(Cell::from(NA), Cell::from));
            let last = profile.rows().last().expect("trend implies rows");
            report.trail("trend_final_A_ratio", last.a_ratio);
        }
        None => {
            for key in ["trend_strictly_decreasing", "trend_first_rel_err", "trend_final_rel_err", "trend_log_log_slope", "trend_final_A_ratio"] {
                report.trail(key, NA);
            }
        }
    }
    report.trail("failed_rows", failures.len());
    for (n, e) in &failures {
        report.trail(&format!("row_error.{n}"), e.to_string());
    }
    let failure = (!failures.is_empty()).then(|| {
        let mut e = CliError::check_failed(format!("{} of {} scan rows failed", failures.len(), grid.len()));
        e.diagnostics = failures
            .iter()
            .enumerate()
            .map(|(i, (n, _))| (format!("failed_N.{i}"), *n as f64))
            .collect();
        e
    });
    Ok(Outcome { report, failure })
}

fn identity(n: u64, h: u64, t: &ExponentTriple<f64>, eps_trunc: f64, tolerance: f64) -> Result<Outcome, CliError> {
    let r = verify_basic_identity(n, h, t, eps_trunc, tolerance)?;
    let mut report = Report::new(&[
        "N", "H", "k1", "k2", "k3", "lhs", "rhs", "rhs_imag", "diff", "tolerance", "passed", "grid_samples",
    ]);
    let [a, b, c] = k_cells(t);
    report.push(vec![
        n.into(),
        h.into(),
        a,
        b,
        c,
        r.lhs.into(),
        r.rhs.into(),
        r.rhs_imag.into(),
        r.diff.into(),
        r.tolerance.into(),
        r.passed.into(),
        r.grid_samples.into(),
    ]);
    let failure = (!r.passed).then(|| {
        let mut e = CliError::check_failed(format!("identity diff {:e} exceeds tolerance {:e}", r.diff, tolerance));
        e.diagnostics = vec![("lhs".into(), r.lhs), ("rhs".into(), r.rhs), ("diff".into(), r.diff)];
        e
    });
    Ok(Outcome { report, failure })
}

fn decompose(
    n: u64,
    h: u64,
    t: &ExponentTriple<f64>,
    eps_trunc: f64,
    tolerance: f64,
    mode: SplitMode<f64>,
) -> Result<Outcome, CliError> {
    let setup = TripleSetup::new(n, t, eps_trunc, integer_kth_root(n + h, t.k()[0])?)?;
    let r = decompose_integral(&setup, h, mode, tolerance)?;
    let mut report = Report::new(&[
        "N", "H", "k1", "k2", "k3", "mode", "B", "I1_re", "I1_im", "I2_re", "I2_im", "I3_re", "I3_im", "I4_re",
        "I4_im", "I5_re", "I5_im", "recombined", "direct_weighted_sum", "discrepancy", "tolerance", "panels",
    ]);
    let [a, b, c] = k_cells(t);
    let mode_name = match mode {
        SplitMode::Unconditional { .. } => "unconditional",
        SplitMode::Conditional => "conditional",
    };
    report.push(vec![
        n.into(),
        h.into(),
        a,
        b,
        c,
        mode_name.into(),
        r.b.into(),
        r.i1.re.into(),
        r.i1.im.into(),
        r.i2.re.into(),
        r.i2.im.into(),
        r.i3.re.into(),
        r.i3.im.into(),
        r.i4.re.into(),
        r.i4.im.into(),
        r.i5.map(|z| z.re).into(),
        r.i5.map(|z| z.im).into(),
        r.recombined.into(),
        r.direct_weighted_sum.into(),
        r.discrepancy.into(),
        r.tolerance.into(),
        r.panels.into(),
    ]);
    Ok(Outcome { report, failure: None })
}

fn lemma_laplace(n: u64, mu: f64, x: f64) -> Result<Outcome, CliError> {
    let r = laplace_residual(n, n, mu, x)?;
    let mut report = Report::new(&["n", "N", "mu", "X", "integral", "main", "residual", "scaled_residual", "panels"]);
    report.push(vec![
        n.into(),
        n.into(),
        mu.into(),
        x.into(),
        r.integral.into(),
        r.main.into(),
        r.residual.into(),
        r.scaled_residual.into(),
        r.panels.into(),
    ]);
    Ok(Outcome { report, failure: None })
}

fn lemma_mt(n: u64, h: u64, lambda: f64) -> Result<Outcome, CliError> {
    let r = mt_power_sum(n, h, lambda)?;
    let mut report = Report::new(&["N", "H", "lambda", "exact_sum", "model", "residual", "scaled_residual"]);
    report.push(vec![
        n.into(),
        h.into(),
        lambda.into(),
        r.exact_sum.into(),
        r.model.into(),
        r.residual.into(),
        r.scaled_residual.into(),
    ]);
    Ok(Outcome { report, failure: None })
}

#[allow(clippy::too_many_arguments)]
fn lemma_l2(
    n: u64,
    k: u32,
    eps_trunc: f64,
    region: L2Region<f64>,
    weight: L2Weight,
    c: f64,
    rel_tol: f64,
) -> Result<Outcome, CliError> {
    let spec = SmoothedSumSpec::new(n, k, eps_trunc)?;
    let r = l2_profile(&spec, region, weight, c, rel_tol)?;
    let (region_name, bound) = match region {
        L2Region::Symmetric { half_width } => ("symmetric", half_width),
        L2Region::Complement { tau } => ("complement", tau),
    };
    let weight_name = match weight {
        L2Weight::Unit => "unit",
        L2Weight::InverseAlpha => "inverse-alpha",
    };
    let mut report = Report::new(&[
        "N",
        "k",
        "region",
        "bound",
        "weight",
        "c",
        "error_integral",
        "full_integral",
        "ratio_unconditional",
        "ratio_rh",
        "ratio_tolev",
        "ratio_weighted",
        "ratio_weighted_error",
        "panels",
    ]);
    report.push(vec![
        n.into(),
        k.into(),
        region_name.into(),
        bound.into(),
        weight_name.into(),
        c.into(),
        r.error_integral.into(),
        r.full_integral.into(),
        r.ratio_unconditional.into(),
        r.ratio_rh.into(),
        r.ratio_tolev.into(),
        r.ratio_weighted.into(),
        r.ratio_weighted_error.into(),
        r.panels.into(),
    ]);
    Ok(Outcome { report, failure: None })
}

fn lemma_parseval(n: u64, k: u32, eps_trunc: f64) -> Result<Outcome, CliError> {
    let spec = SmoothedSumSpec::new(n, k, eps_trunc)?;
    let r = parseval_check(&spec)?;
    let mut report = Report::new(&[
        "N",
        "k",
        "terms",
        "integral",
        "direct",
        "relative_difference",
        "grid_samples",
        "reference_cutoff",
        "tail_bound",
        "measured_tail",
    ]);
    report.push(vec![
        n.into(),
        k.into(),
        spec.terms().len().into(),
        r.integral.into(),
        r.direct.into(),
        r.relative_difference.into(),
        r.grid_samples.into(),
        spec.reference_cutoff().into(),
        spec.tail_bound().into(),
        spec.measured_tail().into(),
    ]);
    Ok(Outcome { report, failure: None })
}

fn opt<T: Into<Cell>>(v: Option<T>) -> Cell {
    v.map_or(Cell::Empty, Into::into)
}

/// Metadata block shared by every command, minus the timing fields.
fn describe(cfg: &RunConfig) -> Vec<(String, String)> {
    let p = &cfg.params;
    let mut r = Report::default();
    r.meta("version", env!("CARGO_PKG_VERSION"));
    r.meta("command", cfg.command.name());
    r.meta(
        "lemma",
        match cfg.command {
            Command::Lemma { name } => Cell::from(name.as_str()),
            _ => Cell::Empty,
        },
    );
    r.meta("N", opt(p.n));
    r.meta("H", opt(p.h));
    r.meta("k", Cell::Empty);
    r.meta("epsilon", p.epsilon.unwrap_or(DEFAULT_EPSILON));
    r.meta("B", opt(p.b));
    r.meta("c", p.c.unwrap_or(DEFAULT_C));
    r.meta("eps_trunc", p.eps_trunc.unwrap_or(DEFAULT_EPS_TRUNC));
    r.meta("tolerance", p.tolerance.unwrap_or(DEFAULT_TOLERANCE));
    r.meta("lambda", opt(p.lambda));
    r.meta("mu", opt(p.mu));
    r.meta("X", opt(p.x));
    r.meta("xi", opt(p.xi));
    r.meta("tau", opt(p.tau));
    r.meta("theta", opt(p.theta));
    r.meta("grid", opt(p.grid.as_ref().map(|g| g.describe())));
    r.meta("per_n", p.per_n);
    r.meta("format", if cfg.format == Format::Json { "json" } else { "csv" });
    r.meta("workers", cfg.workers);
    r.meta("rh_threshold", RH_THRESHOLD);
    r.metadata
}

/// Validates `cfg`, runs it on a pool of `cfg.workers` threads and returns
/// the report with its metadata block filled in.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let job = plan(cfg)?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::invalid("workers-pool", e.to_string()))?;
    let w = cfg.workers;
    let mut outcome = pool.install(|| match &job {
        Job::Count { n, triple } => count(*n, triple),
        Job::Interval { n, h, triple, epsilon, per_n } => interval(*n, *h, triple, *epsilon, *per_n, w),
        Job::Scan { grid, rule, triple, epsilon, c } => scan(grid, *rule, triple, *epsilon, *c, w),
        Job::Identity { n, h, triple, eps_trunc, tolerance } => identity(*n, *h, triple, *eps_trunc, *tolerance),
        Job::Decompose { n, h, triple, eps_trunc, tolerance, mode } => {
            decompose(*n, *h, triple, *eps_trunc, *tolerance, *mode)
        }
        Job::Laplace { n, mu, x } => lemma_laplace(*n, *mu, *x),
        Job::Mt { n, h, lambda } => lemma_mt(*n, *h, *lambda),
        Job::L2 { n, k, eps_trunc, region, weight, c, rel_tol } => {
            lemma_l2(*n, *k, *eps_trunc, *region, *weight, *c, *rel_tol)
        }
        Job::Parseval { n, k, eps_trunc } => lemma_parseval(*n, *k, *eps_trunc),
    })?;
    let mut meta = describe(cfg);
    let k = match &job {
        Job::Count { triple, .. }
        | Job::Interval { triple, .. }
        | Job::Scan { triple, .. }
        | Job::Identity { triple, .. }
        | Job::Decompose { triple, .. } => {
            triple.k().iter().map(u32::to_string).collect::<Vec<_>>().join(",")
        }
        Job::L2 { k, .. } | Job::Parseval { k, .. } => k.to_string(),
        Job::Laplace { .. } | Job::Mt { .. } => String::new(),
    };
    if let Some(slot) = meta.iter_mut().find(|(key, _)| key == "k") {
        slot.1 = k;
    }
    if let Job::Scan { rule: HRule::Theta(t), .. } = job {
        meta.push(("theta_used".into(), Cell::from(t).render()));
    }
    if let Job::Count { triple, .. }
    | Job::Interval { triple, .. }
    | Job::Scan { triple, .. }
    | Job::Identity { triple, .. }
    | Job::Decompose { triple, .. } = &job
    {
        meta.push(("exploratory".into(), triple.is_exploratory().to_string()));
    }
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    meta.push(("timestamp".into(), secs.to_string()));
    meta.push(("wall_ms".into(), start.elapsed().as_millis().to_string()));
    outcome.report.metadata = meta;
    Ok(outcome)
}
