//! Numerical measurement of the lemma integrals: the Laplace-type formula
//! for `∫ z^{-μ} e(-nα)`, the `L²` profiles of `S̃_k` and `Ẽ_k`, and the
//! full-period Parseval identity.
//!
//! Lemma ratios use implied constant 1. They are diagnostics, not bounds.

use num_complex::Complex;

use super::grid::QuadratureGrid;
use super::sums::{error_term_of, stilde, z_pow, SmoothedSumSpec};
use crate::asymptotics::{a_scale, gamma};
use crate::error::{LabError, Result};
use crate::quadrature::{integrate_refined, Refinement};
use crate::scalar::{unit_phase, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceResidual<T> {
    /// `∫_{-X}^{X} z^{-μ} e(-nα) dα` (real; the imaginary part cancels).
    pub integral: T,
    /// `e^{-n/N} n^{μ-1} / Γ(μ)`.
    pub main: T,
    pub residual: T,
    /// `residual · n · X^μ`.
    pub scaled_residual: T,
    pub panels: usize,
}

/// Measures the truncated Laplace integral against its closed-form main
/// term. Quadrature is refined until successive estimates agree to 1e-10
/// relative.
pub fn laplace_residual<T: Real>(n: u64, n_scale: u64, mu: T, x: T) -> Result<LaplaceResidual<T>> {
    if n == 0 || n_scale == 0 {
        return Err(LabError::invalid("n and N must be ≥ 1"));
    }
    if !(mu > T::zero()) {
        return Err(LabError::invalid(format!("mu must be positive, got {mu}")));
    }
    if !(x > T::zero() && x <= T::of(0.5)) {
        return Err(LabError::invalid(format!("X must lie in (0, 1/2], got {x}")));
    }
    let nf = T::of_u64(n);
    let f = |a: T| {
        let p = z_pow(a, n_scale, mu) * unit_phase(-nf * a);
        let m = z_pow(-a, n_scale, mu) * unit_phase(nf * a);
        [p + m]
    };
    let density = n.max(n_scale) as f64;
    let out = integrate_refined(&f, &[(T::zero(), x)], density, Refinement::default())?;
    let integral = out.values[0];
    if integral.im.abs() > T::of(1e-8) * integral.re.abs() + T::of(1e-12) {
        return Err(LabError::NumericalFailure {
            message: "Laplace integral lost conjugate symmetry".into(),
            diagnostics: vec![
                ("re".into(), integral.re.to_f64_lossy()),
                ("im".into(), integral.im.to_f64_lossy()),
            ],
        });
    }
    let main = (-nf / T::of_u64(n_scale)).exp() * nf.powf(mu - T::one()) / gamma(mu);
    let residual = (integral.re - main).abs();
    Ok(LaplaceResidual {
        integral: integral.re,
        main,
        residual,
        scaled_residual: residual * nf * x.powf(mu),
        panels: out.panels,
    })
}

/// Integration set for [`l2_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum L2Region<T> {
    /// `[-ξ, ξ]`, `0 ≤ ξ ≤ 1/2`.
    Symmetric { half_width: T },
    /// `𝒞 = [-1/2, -τ] ∪ [τ, 1/2]`, `0 < τ < 1/2`.
    Complement { tau: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum L2Weight {
    Unit,
    /// `1/|α|`; only on the complement region.
    InverseAlpha,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Profile<T> {
    pub region: L2Region<T>,
    pub weight: L2Weight,
    /// `∫ |Ẽ_k|² w`.
    pub error_integral: T,
    /// `∫ |S̃_k|² w`.
    pub full_integral: T,
    /// `∫|Ẽ|² / (N^{2/k-1} A(N; -c))` on `[-ξ, ξ]`.
    pub ratio_unconditional: Option<T>,
    /// `∫|Ẽ|² / (N^{1/k} ξ L²)` on `[-ξ, ξ]`, `ξ > 0`.
    pub ratio_rh: Option<T>,
    /// `∫|S̃|² / ((τ N^{1/k} + N^{2/k-1}) L³)` on `[-τ, τ]`.
    pub ratio_tolev: Option<T>,
    /// `∫_𝒞 |S̃|²/|α| / (N^{1/k} L⁴ + τ^{-1} N^{2/k-1} L³)`.
    pub ratio_weighted: Option<T>,
    /// `∫_𝒞 |Ẽ|²/|α| / (N^{1/k} L³)`.
    pub ratio_weighted_error: Option<T>,
    pub panels: usize,
}

/// Integrates `|Ẽ_k|²` and `|S̃_k|²` over `region` with `weight`, refining
/// until a doubling changes both values by less than `rel_tol` relative.
pub fn l2_profile<T: Real>(
    spec: &SmoothedSumSpec<T>,
    region: L2Region<T>,
    weight: L2Weight,
    c: T,
    rel_tol: f64,
) -> Result<L2Profile<T>> {
    let half = T::of(0.5);
    let (lo, hi) = match region {
        L2Region::Symmetric { half_width } => {
            if !(half_width >= T::zero() && half_width <= half) {
                return Err(LabError::invalid(format!("ξ must lie in [0, 1/2], got {half_width}")));
            }
            if weight == L2Weight::InverseAlpha {
                return Err(LabError::invalid("1/|α| weight is singular on [-ξ, ξ]"));
            }
            (T::zero(), half_width)
        }
        L2Region::Complement { tau } => {
            if !(tau > T::zero() && tau < half) {
                return Err(LabError::invalid(format!(
                    "τ must lie in (0, 1/2) for a non-empty complement, got {tau}"
                )));
            }
            (tau, half)
        }
    };

    let (error_integral, full_integral, panels) = if hi > lo {
        let f = |a: T| {
            let w = match weight {
                L2Weight::Unit => T::one(),
                L2Weight::InverseAlpha => a.recip(),
            };
            let e = error_term_of(spec, a).norm_sqr() * w;
            let s = stilde(spec, a).norm_sqr() * w;
            [Complex::new(e, T::zero()), Complex::new(s, T::zero())]
        };
        let control = Refinement {
            rel_tol,
            abs_tol: 0.0,
            max_panels: 1 << 26,
        };
        let density = (spec.max_frequency() + spec.n_scale()) as f64;
        let out = integrate_refined(&f, &[(lo, hi)], density, control)?;
        // both integrands are even in α
        let two = T::of(2.0);
        (out.values[0].re * two, out.values[1].re * two, out.panels)
    } else {
        (T::zero(), T::zero(), 0)
    };

    let n = spec.n_scale();
    let nf = T::of_u64(n);
    let l = nf.ln();
    let inv_k = T::of_u64(spec.k() as u64).recip();
    let n_1k = nf.powf(inv_k);
    let n_2k1 = nf.powf(T::of(2.0) * inv_k - T::one());

    let mut profile = L2Profile {
        region,
        weight,
        error_integral,
        full_integral,
        ratio_unconditional: None,
        ratio_rh: None,
        ratio_tolev: None,
        ratio_weighted: None,
        ratio_weighted_error: None,
        panels,
    };
    match (region, weight) {
        (L2Region::Symmetric { half_width }, L2Weight::Unit) => {
            let a = if n >= 3 { a_scale(n, -c)? } else { T::one() };
            profile.ratio_unconditional = Some(error_integral / (n_2k1 * a));
            if half_width > T::zero() {
                profile.ratio_rh = Some(error_integral / (n_1k * half_width * l * l));
            }
            profile.ratio_tolev = Some(full_integral / ((half_width * n_1k + n_2k1) * l.powi(3)));
        }
        (L2Region::Complement { tau }, L2Weight::InverseAlpha) => {
            let denom = n_1k * l.powi(4) + n_2k1 * l.powi(3) / tau;
            profile.ratio_weighted = Some(full_integral / denom);
            profile.ratio_weighted_error = Some(error_integral / (n_1k * l.powi(3)));
        }
        _ => {}
    }
    Ok(profile)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParsevalCheck<T> {
    /// `∫_{-1/2}^{1/2} |S̃_k|²` by exact grid quadrature.
    pub integral: T,
    /// `Σ Λ(n)² e^{-2n^k/N}`.
    pub direct: T,
    pub relative_difference: T,
    pub grid_samples: usize,
}

/// Full-period Parseval identity for `S̃_k`.
pub fn parseval_check<T: Real>(spec: &SmoothedSumSpec<T>) -> Result<ParsevalCheck<T>> {
    let grid = QuadratureGrid::new(spec.max_frequency())?;
    let samples = grid.sample_stilde(spec);
    let conj: Vec<Complex<T>> = samples.iter().map(|z| z.conj()).collect();
    let integral = grid.mean_of_product(&samples, &conj)?.re;
    let direct = spec.squared_weight_sum();
    Ok(ParsevalCheck {
        integral,
        direct,
        relative_difference: (integral - direct).abs() / direct,
        grid_samples: grid.samples(),
    })
}
