//! Predicted side of every check: main terms, error envelopes, H windows
//! and the exponential-weight power sum.
//!
//! `L` is always the natural logarithm of `N`.

use crate::counting::ExponentTriple;
use crate::error::{LabError, Result};
use crate::scalar::Real;
use crate::summation::pairwise_sum;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Euler's Gamma function for real arguments (reflection below 1/2).
pub fn gamma<T: Real>(x: T) -> T {
    if x < T::of(0.5) {
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma(T::one() - x));
    }
    let x = x - T::one();
    let mut acc = T::of(LANCZOS_COEF[0]);
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += T::of(*c) / (x + T::of_u64(i as u64));
    }
    let t = x + T::of(LANCZOS_G + 0.5);
    (T::TAU()).sqrt() * t.powf(x + T::of(0.5)) * (-t).exp() * acc
}

/// `γ_k = Γ(1 + 1/k)`.
pub fn gamma_factor<T: Real>(k: T) -> Result<T> {
    if !(k > T::zero()) {
        return Err(LabError::invalid(format!("gamma_factor needs k > 0, got {k}")));
    }
    Ok(gamma(T::one() + k.recip()))
}

/// `γ_{k1} γ_{k2} γ_{k3} / Γ(ρ)`.
pub fn main_term_constant<T: Real>(triple: &ExponentTriple<T>) -> T {
    let [g1, g2, g3] = triple.gammas();
    g1 * g2 * g3 / gamma(triple.rho())
}

/// `γ_{k1} γ_{k2} γ_{k3} / Γ(ρ) · H N^{ρ-1}`.
pub fn main_term<T: Real>(n_base: u64, h: u64, triple: &ExponentTriple<T>) -> T {
    main_term_constant(triple) * T::of_u64(h) * T::of_u64(n_base).powf(triple.rho() - T::one())
}

/// Main term for the `e^{-n/N}`-weighted sum: `main_term / e`.
pub fn weighted_main_term<T: Real>(n_base: u64, h: u64, triple: &ExponentTriple<T>) -> T {
    main_term(n_base, h, triple) / T::E()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSumCheck<T> {
    pub exact_sum: T,
    pub model: T,
    pub residual: T,
    /// `residual · N^{1-λ} / H²`; bounded in `N`, `H` if the model is right.
    pub scaled_residual: T,
}

/// Compares `Σ_{n=N+1}^{N+H} e^{-n/N} n^λ` with `H N^λ / e`.
pub fn mt_power_sum<T: Real>(n_base: u64, h: u64, lambda: T) -> Result<PowerSumCheck<T>> {
    if h < 1 || h > n_base {
        return Err(LabError::invalid(format!("mt_power_sum needs 1 ≤ H ≤ N, got H = {h}, N = {n_base}")));
    }
    let nf = T::of_u64(n_base);
    let terms: Vec<T> = (n_base + 1..=n_base + h)
        .map(|n| {
            let x = T::of_u64(n);
            (-x / nf).exp() * x.powf(lambda)
        })
        .collect();
    let exact_sum = pairwise_sum(&terms);
    let hf = T::of_u64(h);
    let model = hf * nf.powf(lambda) / T::E();
    let residual = (exact_sum - model).abs();
    let scaled_residual = residual * nf.powf(T::one() - lambda) / (hf * hf);
    Ok(PowerSumCheck {
        exact_sum,
        model,
        residual,
        scaled_residual,
    })
}

/// `A(N; c) = exp{c (log N / log log N)^{1/3}}`.
pub fn a_scale<T: Real>(n: u64, c: T) -> Result<T> {
    if n < 3 {
        return Err(LabError::invalid(format!("A(N; c) needs N ≥ 3, got {n}")));
    }
    let l = T::of_u64(n).ln();
    Ok((c * (l / l.ln()).cbrt()).exp())
}

/// Membership of one `H` in the windows returned by [`h_windows`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowFlags<T> {
    pub in_unconditional: bool,
    /// `H / (N^{1-1/k3} L^6)`.
    pub rh_ratio: T,
    pub in_rh: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HWindows<T> {
    /// Exponent `1 - 5/(6 k3) + ε`.
    pub lower_exponent: T,
    /// Exponent `1 - ε`.
    pub upper_exponent: T,
    pub lower: T,
    pub upper: T,
    /// Exponent `1 - 5/(6 k3) + 3ε` used inside the proof for the major arc.
    pub proof_lower_exponent: T,
    /// True when `ε ≥ 5/(12 k3)`, i.e. no admissible `H`.
    pub empty: bool,
    /// `N^{1-1/k3} L^6`, the scale `H` must dominate in the conditional result.
    pub rh_scale: T,
    pub flags: Option<WindowFlags<T>>,
}

/// Numeric `H` windows for the unconditional and conditional theorems.
///
/// The conditional growth condition is asymptotic, so only the ratio
/// `H / (N^{1-1/k3} L^6)` is reported and compared against `rh_threshold`.
pub fn h_windows<T: Real>(
    n: u64,
    triple: &ExponentTriple<T>,
    epsilon: T,
    h: Option<u64>,
    rh_threshold: T,
) -> Result<HWindows<T>> {
    if !(epsilon > T::zero() && epsilon < T::one() / T::of(6.0)) {
        return Err(LabError::invalid(format!("epsilon must lie in (0, 1/6), got {epsilon}")));
    }
    if n < 3 {
        return Err(LabError::invalid(format!("h_windows needs N ≥ 3, got {n}")));
    }
    let k3 = T::of_u64(triple.k()[2] as u64);
    let nf = T::of_u64(n);
    let l = nf.ln();
    let base = T::one() - T::of(5.0) / (T::of(6.0) * k3);
    let lower_exponent = base + epsilon;
    let upper_exponent = T::one() - epsilon;
    let rh_scale = nf.powf(T::one() - k3.recip()) * l.powi(6);
    let lower = nf.powf(lower_exponent);
    let upper = nf.powf(upper_exponent);
    let empty = !(lower_exponent < upper_exponent);
    let flags = h.map(|h| {
        let hf = T::of_u64(h);
        let rh_ratio = hf / rh_scale;
        WindowFlags {
            in_unconditional: !empty && hf > lower && hf < upper,
            rh_ratio,
            in_rh: rh_ratio > rh_threshold && hf < upper,
        }
    });
    Ok(HWindows {
        lower_exponent,
        upper_exponent,
        lower,
        upper,
        proof_lower_exponent: base + T::of(3.0) * epsilon,
        empty,
        rh_scale,
        flags,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelopes<T> {
    /// `H² N^{ρ-2} + H^{1/2} N^{ρ-1/2-1/(2k3)} L³`.
    pub phi: T,
    /// `phi + N^{ρ-1/(2k2)-1/(2k3)} L³`.
    pub psi: T,
}

pub fn error_envelopes<T: Real>(n: u64, h: u64, triple: &ExponentTriple<T>) -> Result<Envelopes<T>> {
    if n < 3 {
        return Err(LabError::invalid(format!("error envelopes need N ≥ 3, got {n}")));
    }
    let [_, k2, k3] = triple.k().map(|k| T::of_u64(k as u64));
    let rho = triple.rho();
    let nf = T::of_u64(n);
    let hf = T::of_u64(h);
    let l3 = nf.ln().powi(3);
    let half = T::of(0.5);
    let two = T::of(2.0);
    let phi = hf * hf * nf.powf(rho - two)
        + hf.sqrt() * nf.powf(rho - half - half / k3) * l3;
    let psi = phi + nf.powf(rho - half / k2 - half / k3) * l3;
    Ok(Envelopes { phi, psi })
}

/// One row of a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow<T> {
    pub n: u64,
    pub h: u64,
    pub k: [u32; 3],
    pub sum_unweighted: T,
    pub sum_weighted: T,
    pub main_term: T,
    pub weighted_main_term: T,
    pub relative_error: T,
    pub relative_error_weighted: T,
    /// `A(N; c)` for the caller's `c`.
    pub a_scale: T,
    /// `|relative_error| / A(N; -c)`.
    pub a_ratio: T,
    pub phi: T,
    pub in_unconditional_window: bool,
    pub in_rh_window: bool,
    pub workers: usize,
    pub wall_ms: u128,
}

/// Rows sorted by `N` with trend statistics over the relative error.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorProfile<T> {
    rows: Vec<ProfileRow<T>>,
}

/// Trend summary; `None` fields mean "not applicable" (fewer than two rows).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trend<T> {
    pub strictly_decreasing: Option<bool>,
    pub first_relative_error: T,
    pub final_relative_error: T,
    /// Least-squares slope of `log |rel_err|` against `log N`.
    pub log_log_slope: Option<T>,
}

impl<T: Real> ErrorProfile<T> {
    pub fn new(mut rows: Vec<ProfileRow<T>>) -> Self {
        rows.sort_by_key(|r| (r.n, r.h));
        Self { rows }
    }

    pub fn rows(&self) -> &[ProfileRow<T>] {
        &self.rows
    }

    pub fn trend(&self) -> Option<Trend<T>> {
        let first = self.rows.first()?;
        let last = self.rows.last()?;
        let errs: Vec<T> = self.rows.iter().map(|r| r.relative_error.abs()).collect();
        if self.rows.len() < 2 {
            return Some(Trend {
                strictly_decreasing: None,
                first_relative_error: first.relative_error,
                final_relative_error: last.relative_error,
                log_log_slope: None,
            });
        }
        let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
        let pts: Vec<(T, T)> = self
            .rows
            .iter()
            .zip(&errs)
            .filter(|(_, e)| **e > T::zero())
            .map(|(r, e)| (T::of_u64(r.n).ln(), e.ln()))
            .collect();
        let slope = (pts.len() >= 2).then(|| {
            let m = T::of_u64(pts.len() as u64);
            let mx = pts.iter().map(|p| p.0).fold(T::zero(), |a, b| a + b) / m;
            let my = pts.iter().map(|p| p.1).fold(T::zero(), |a, b| a + b) / m;
            let sxy = pts.iter().fold(T::zero(), |a, p| a + (p.0 - mx) * (p.1 - my));
            let sxx = pts.iter().fold(T::zero(), |a, p| a + (p.0 - mx) * (p.0 - mx));
            sxy / sxx
        });
        Some(Trend {
            strictly_decreasing: Some(decreasing),
            first_relative_error: first.relative_error,
            final_relative_error: last.relative_error,
            log_log_slope: slope,
        })
    }
}
