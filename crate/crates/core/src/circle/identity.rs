//! Exact circle-method identities: Fourier recovery of `R(n; k)`, the
//! weighted interval identity, and the `I₁ … I₅` decomposition.

use num_complex::Complex;

use super::grid::{QuadratureGrid, Spectrum};
use super::sums::{model_of, stilde, u_sum, z_pow, SmoothedSumSpec};
use crate::arith::{build_mangoldt_table, integer_kth_root, MangoldtTable};
use crate::counting::{interval_sums, ExponentTriple};
use crate::error::{LabError, Result};
use crate::quadrature::{integrate_refined, Refinement};
use crate::scalar::{unit_phase, Real};

/// The three smoothed sums for one `(N, k)` plus a table shared with the
/// counting side.
#[derive(Debug, Clone)]
pub struct TripleSetup<T> {
    n_scale: u64,
    triple: ExponentTriple<T>,
    table: MangoldtTable<T>,
    specs: [SmoothedSumSpec<T>; 3],
}

impl<T: Real> TripleSetup<T> {
    /// `min_table_limit` lets the caller reserve room for counting, e.g.
    /// `⌊(N + H)^{1/k1}⌋`.
    pub fn new(
        n_scale: u64,
        triple: &ExponentTriple<T>,
        eps_trunc: T,
        min_table_limit: u64,
    ) -> Result<Self> {
        let k = triple.k();
        let mut limit = min_table_limit.max(2);
        for kj in k {
            limit = limit.max(SmoothedSumSpec::required_table_limit(n_scale, kj, eps_trunc)?);
        }
        let table = build_mangoldt_table(limit)?;
        let spec = |kj| SmoothedSumSpec::from_table(&table, n_scale, kj, eps_trunc);
        let specs = [spec(k[0])?, spec(k[1])?, spec(k[2])?];
        Ok(Self {
            n_scale,
            triple: *triple,
            table,
            specs,
        })
    }

    pub fn n_scale(&self) -> u64 {
        self.n_scale
    }

    pub fn triple(&self) -> &ExponentTriple<T> {
        &self.triple
    }

    pub fn table(&self) -> &MangoldtTable<T> {
        &self.table
    }

    pub fn specs(&self) -> &[SmoothedSumSpec<T>; 3] {
        &self.specs
    }

    /// Degree of `S̃_{k1} S̃_{k2} S̃_{k3}` as a trigonometric polynomial.
    pub fn product_bandwidth(&self) -> u64 {
        self.specs.iter().map(|s| s.max_frequency()).sum()
    }

    /// `[S̃_{k1}(α), S̃_{k2}(α), S̃_{k3}(α)]`, reusing equal exponents.
    pub fn stildes(&self, alpha: T) -> [Complex<T>; 3] {
        let k = self.triple.k();
        let s1 = stilde(&self.specs[0], alpha);
        let s2 = if k[1] == k[0] { s1 } else { stilde(&self.specs[1], alpha) };
        let s3 = if k[2] == k[1] { s2 } else { stilde(&self.specs[2], alpha) };
        [s1, s2, s3]
    }

    /// Grid samples of `S̃_{k1} S̃_{k2} S̃_{k3}`.
    pub fn product_samples(&self, grid: &QuadratureGrid<T>) -> Vec<Complex<T>> {
        let k = self.triple.k();
        let s1 = grid.sample_stilde(&self.specs[0]);
        let s2 = (k[1] != k[0]).then(|| grid.sample_stilde(&self.specs[1]));
        let s3 = (k[2] != k[1]).then(|| grid.sample_stilde(&self.specs[2]));
        (0..s1.len())
            .map(|j| {
                let a = s1[j];
                let b = s2.as_ref().map_or(a, |v| v[j]);
                let c = s3.as_ref().map_or(b, |v| v[j]);
                a * b * c
            })
            .collect()
    }
}

/// Outcome of the weighted interval identity check.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport<T> {
    /// `Σ_{N<n≤N+H} e^{-n/N} R(n; k)` by enumeration.
    pub lhs: T,
    /// `∫ S̃S̃S̃ U(-α, H) e(-Nα) dα` on the grid (real part).
    pub rhs: T,
    pub rhs_imag: T,
    pub diff: T,
    pub tolerance: T,
    pub passed: bool,
    pub grid_samples: usize,
}

/// Checks `Σ e^{-n/N} R(n) = ∫ S̃S̃S̃ U(-α,H) e(-Nα) dα` on a grid sized to
/// `Σ max_frequency + N + H`.
pub fn verify_basic_identity<T: Real>(
    n_base: u64,
    h: u64,
    triple: &ExponentTriple<T>,
    eps_trunc: T,
    tolerance: T,
) -> Result<IdentityReport<T>> {
    if h == 0 {
        return Err(LabError::invalid("H must be ≥ 1"));
    }
    let setup = TripleSetup::new(n_base, triple, eps_trunc, counting_limit(n_base, h, triple)?)?;
    let grid = QuadratureGrid::new(setup.product_bandwidth() + n_base + h)?;
    verify_basic_identity_on(&setup, h, &grid, tolerance)
}

/// As [`verify_basic_identity`] on a caller-supplied setup and grid.
pub fn verify_basic_identity_on<T: Real>(
    setup: &TripleSetup<T>,
    h: u64,
    grid: &QuadratureGrid<T>,
    tolerance: T,
) -> Result<IdentityReport<T>> {
    let n_base = setup.n_scale();
    let need = setup.product_bandwidth() + n_base + h;
    if grid.bandwidth_bound() < need {
        return Err(LabError::invalid(format!(
            "grid bandwidth {} below the required {need}",
            grid.bandwidth_bound()
        )));
    }
    let counted = interval_sums(n_base, h, setup.triple(), setup.table(), false, 1)?;
    let product = setup.product_samples(grid);
    let kernel = grid.sample_interval_kernel(n_base, h);
    let rhs = grid.mean_of_product(&product, &kernel)?;
    let diff = (counted.sum_weighted - rhs.re).abs();
    Ok(IdentityReport {
        lhs: counted.sum_weighted,
        rhs: rhs.re,
        rhs_imag: rhs.im,
        diff,
        tolerance,
        passed: diff <= tolerance,
        grid_samples: grid.samples(),
    })
}

fn counting_limit<T: Real>(n_base: u64, h: u64, triple: &ExponentTriple<T>) -> Result<u64> {
    integer_kth_root(n_base + h, triple.k()[0])
}

/// `e^{n/N} · ĉ(n)` for `0 ≤ n ≤ n_max`, where `ĉ(n)` is the `n`-th Fourier
/// coefficient of `S̃_{k1} S̃_{k2} S̃_{k3}`; this equals `R(n; k)`.
pub fn recover_representation_counts<T: Real>(setup: &TripleSetup<T>, n_max: u64) -> Result<Vec<T>> {
    let grid = QuadratureGrid::new(setup.product_bandwidth() + n_max)?;
    let product = setup.product_samples(&grid);
    let spectrum = Spectrum::compute(&grid, &product)?;
    let nf = T::of_u64(setup.n_scale());
    Ok((0..=n_max)
        .map(|n| (T::of_u64(n) / nf).exp() * spectrum.coefficient(n as i64).re)
        .collect())
}

/// Where the identity is integrated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitMode<T> {
    /// Pieces `I₁ … I₄` on `[-B/H, B/H]`, `I₅` on the complement.
    Unconditional { b: T },
    /// Every piece on `[-1/2, 1/2]`; no `I₅`.
    Conditional,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport<T> {
    pub n_base: u64,
    pub h: u64,
    pub triple: ExponentTriple<T>,
    pub b: Option<T>,
    /// `∫ U(-α,H) z^{-ρ} e(-Nα)` on the major interval.
    pub i1: Complex<T>,
    /// Integral of `𝔄 = y₁S̃₂S̃₃ + S̃₁y₂S̃₃ + S̃₁S̃₂y₃`.
    pub i2: Complex<T>,
    /// Integral of `𝔅 = x₁y₂y₃ + y₁x₂y₃ + y₁y₂x₃`.
    pub i3: Complex<T>,
    /// Integral of `ℭ = 2y₁y₂y₃`.
    pub i4: Complex<T>,
    /// `∫_𝒞 S̃S̃S̃ U e(-Nα)`; unconditional mode only.
    pub i5: Option<Complex<T>>,
    /// `Re(γγγ I₁ + I₂ - I₃ - I₄ + I₅)`.
    pub recombined: T,
    pub direct_weighted_sum: T,
    pub discrepancy: T,
    pub tolerance: T,
    pub panels: usize,
}

impl<T: Real> DecompositionReport<T> {
    fn diagnostics(&self) -> Vec<(String, f64)> {
        let mut d = Vec::new();
        let mut push = |name: &str, z: Complex<T>| {
            d.push((format!("{name}.re"), z.re.to_f64_lossy()));
            d.push((format!("{name}.im"), z.im.to_f64_lossy()));
        };
        push("I1", self.i1);
        push("I2", self.i2);
        push("I3", self.i3);
        push("I4", self.i4);
        if let Some(i5) = self.i5 {
            push("I5", i5);
        }
        d.push(("recombined".into(), self.recombined.to_f64_lossy()));
        d.push(("direct".into(), self.direct_weighted_sum.to_f64_lossy()));
        d
    }
}

/// Pointwise integrands `[U z^{-ρ} e(-Nα), 𝔄 K, 𝔅 K, ℭ K]` with `K = U(-α,H) e(-Nα)`.
pub(crate) fn major_integrands<T: Real>(setup: &TripleSetup<T>, h: u64, alpha: T) -> [Complex<T>; 4] {
    let n = setup.n_scale();
    let s = setup.stildes(alpha);
    let x = [0, 1, 2].map(|j| model_of(&setup.specs[j], alpha));
    let y = [s[0] - x[0], s[1] - x[1], s[2] - x[2]];
    let kernel = u_sum(-alpha, h) * unit_phase(-T::of_u64(n) * alpha);
    let a = y[0] * s[1] * s[2] + s[0] * y[1] * s[2] + s[0] * s[1] * y[2];
    let b = x[0] * y[1] * y[2] + y[0] * x[1] * y[2] + y[0] * y[1] * x[2];
    let c = y[0] * y[1] * y[2] * T::of(2.0);
    [
        z_pow(alpha, n, setup.triple.rho()) * kernel,
        a * kernel,
        b * kernel,
        c * kernel,
    ]
}

fn check_conjugate_symmetry<T: Real>(name: &str, z: Complex<T>) -> Result<()> {
    let allowed = T::of(1e-8) * z.re.abs() + T::of(1e-12);
    if z.im.abs() > allowed {
        return Err(LabError::NumericalFailure {
            message: format!("{name} has imaginary part {} beyond the symmetry bound", z.im),
            diagnostics: vec![
                (format!("{name}.re"), z.re.to_f64_lossy()),
                (format!("{name}.im"), z.im.to_f64_lossy()),
            ],
        });
    }
    Ok(())
}

/// Splits the weighted interval sum into `γγγ I₁ + I₂ - I₃ - I₄ (+ I₅)`.
///
/// Every integral over a symmetric set is taken as `∫_0 [F(α) + F(-α)]`
/// with `F(-α)` evaluated independently; the imaginary parts must then
/// cancel (conjugate symmetry) and are checked before being dropped.
/// Panels are doubled until successive estimates of every piece agree to
/// `tolerance`; the recombined total must match the enumerated weighted sum
/// within `10 · tolerance`.
pub fn decompose_integral<T: Real>(
    setup: &TripleSetup<T>,
    h: u64,
    mode: SplitMode<T>,
    tolerance: T,
) -> Result<DecompositionReport<T>> {
    if h == 0 {
        return Err(LabError::invalid("H must be ≥ 1"));
    }
    if !(tolerance > T::zero()) {
        return Err(LabError::invalid("tolerance must be positive"));
    }
    let n_base = setup.n_scale();
    let hf = T::of_u64(h);
    let half = T::of(0.5);
    let (cut, b) = match mode {
        SplitMode::Unconditional { b } => {
            if !(b > T::zero() && b <= hf * half) {
                return Err(LabError::invalid(format!("B must lie in (0, H/2], got B = {b}, H = {h}")));
            }
            (b / hf, Some(b))
        }
        SplitMode::Conditional => (half, None),
    };
    let counted = interval_sums(n_base, h, setup.triple(), setup.table(), false, 1)?;

    let rate = (setup.product_bandwidth() + n_base + h) as f64;
    let control = Refinement {
        rel_tol: 0.0,
        abs_tol: tolerance.to_f64_lossy(),
        max_panels: 1 << 26,
    };

    let major = |a: T| {
        let p = major_integrands(setup, h, a);
        let m = major_integrands(setup, h, -a);
        [p[0] + m[0], p[1] + m[1], p[2] + m[2], p[3] + m[3]]
    };
    let major_out = integrate_refined(&major, &[(T::zero(), cut)], rate, control)?;
    let [i1, i2, i3, i4] = major_out.values;
    let mut panels = major_out.panels;

    let i5 = match b {
        Some(_) if cut < half => {
            let minor = |a: T| {
                let kernel = |t: T| u_sum(-t, h) * unit_phase(-T::of_u64(n_base) * t);
                let p = setup.stildes(a);
                let m = setup.stildes(-a);
                [p[0] * p[1] * p[2] * kernel(a) + m[0] * m[1] * m[2] * kernel(-a)]
            };
            let out = integrate_refined(&minor, &[(cut, half)], rate, control)?;
            panels += out.panels;
            Some(out.values[0])
        }
        Some(_) => Some(Complex::new(T::zero(), T::zero())),
        None => None,
    };

    let [g1, g2, g3] = setup.triple().gammas();
    let total = i1 * (g1 * g2 * g3) + i2 - i3 - i4 + i5.unwrap_or_else(|| Complex::new(T::zero(), T::zero()));
    let report = DecompositionReport {
        n_base,
        h,
        triple: *setup.triple(),
        b,
        i1,
        i2,
        i3,
        i4,
        i5,
        recombined: total.re,
        direct_weighted_sum: counted.sum_weighted,
        discrepancy: (total.re - counted.sum_weighted).abs(),
        tolerance,
        panels,
    };
    for (name, z) in [("I1", i1), ("I2", i2), ("I3", i3), ("I4", i4)] {
        check_conjugate_symmetry(name, z)?;
    }
    if let Some(z) = i5 {
        check_conjugate_symmetry("I5", z)?;
    }
    if report.discrepancy > tolerance * T::of(10.0) {
        return Err(LabError::NumericalFailure {
            message: format!(
                "decomposition recombines to {} but the enumerated weighted sum is {}",
                report.recombined, report.direct_weighted_sum
            ),
            diagnostics: report.diagnostics(),
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::sums::DEFAULT_EPS_TRUNC;
    use crate::counting::representation_count;

    fn setup(n: u64, k: (u32, u32, u32), h: u64) -> TripleSetup<f64> {
        let t = ExponentTriple::new(k.0, k.1, k.2).unwrap();
        TripleSetup::new(n, &t, DEFAULT_EPS_TRUNC, counting_limit(n, h, &t).unwrap()).unwrap()
    }

    #[test]
    fn pointwise_identity_holds() {
        let s = setup(300, (2, 2, 3), 10);
        let g = s.triple().gammas();
        for a in [0.0, 1e-4, 0.013, -0.2, 0.49] {
            let sv = s.stildes(a);
            let x = [0, 1, 2].map(|j| model_of(&s.specs()[j], a));
            let y = [sv[0] - x[0], sv[1] - x[1], sv[2] - x[2]];
            let big_a = y[0] * sv[1] * sv[2] + sv[0] * y[1] * sv[2] + sv[0] * sv[1] * y[2];
            let big_b = x[0] * y[1] * y[2] + y[0] * x[1] * y[2] + y[0] * y[1] * x[2];
            let big_c = y[0] * y[1] * y[2] * 2.0;
            let lhs = sv[0] * sv[1] * sv[2];
            let rhs = x[0] * x[1] * x[2] + big_a - big_b - big_c;
            assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0), "α = {a}");
            let zr = z_pow(a, 300, s.triple().rho()) * (g[0] * g[1] * g[2]);
            assert!((zr - x[0] * x[1] * x[2]).norm() <= 1e-10 * zr.norm());
        }
    }

    #[test]
    fn recovered_counts_match_enumeration() {
        let s = setup(200, (2, 2, 2), 10);
        let rec = recover_representation_counts(&s, 300).unwrap();
        for (n, v) in rec.iter().enumerate() {
            let want = representation_count(n as u64, s.triple(), s.table()).unwrap();
            assert!((v - want).abs() < 1e-8, "n = {n}: {v} vs {want}");
        }
    }

    #[test]
    fn identity_small_case() {
        let t = ExponentTriple::new(2, 2, 2).unwrap();
        let r = verify_basic_identity(200, 10, &t, DEFAULT_EPS_TRUNC, 1e-6).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.lhs > 0.0);
        assert!(r.rhs_imag.abs() < 1e-9);
    }

    #[test]
    fn identity_below_support_is_zero() {
        let t = ExponentTriple::new(2, 2, 2).unwrap();
        let r = verify_basic_identity(5, 3, &t, DEFAULT_EPS_TRUNC, 1e-9).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.rhs.abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn undersized_grid_rejected() {
        let s = setup(200, (2, 2, 2), 10);
        let g = QuadratureGrid::new(100).unwrap();
        assert!(verify_basic_identity_on(&s, 10, &g, 1e-6).is_err());
    }

    #[test]
    fn decomposition_rejects_bad_split() {
        let s = setup(200, (2, 2, 2), 10);
        assert!(decompose_integral(&s, 10, SplitMode::Unconditional { b: 6.0 }, 1e-6).is_err());
        assert!(decompose_integral(&s, 10, SplitMode::Unconditional { b: 0.0 }, 1e-6).is_err());
        assert!(decompose_integral(&s, 10, SplitMode::Conditional, 0.0).is_err());
    }

    #[test]
    fn decomposition_closes_small() {
        let s = setup(200, (2, 2, 2), 10);
        let u = decompose_integral(&s, 10, SplitMode::Unconditional { b: 2.0 }, 1e-7).unwrap();
        assert!(u.discrepancy <= 1e-6, "{u:?}");
        let whole = decompose_integral(&s, 10, SplitMode::Unconditional { b: 5.0 }, 1e-7).unwrap();
        assert_eq!(whole.i5.unwrap().norm(), 0.0);
        let c = decompose_integral(&s, 10, SplitMode::Conditional, 1e-7).unwrap();
        assert!(c.i5.is_none());
        assert!((c.recombined - whole.recombined).abs() < 1e-6);
        assert!((c.i1 - whole.i1).norm() < 1e-6);
    }
}
