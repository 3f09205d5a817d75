//! Pointwise analytic objects: `z`, `z^{-μ}`, `S̃_k`, `U`, `Ẽ_k`.

use num_complex::Complex;

use crate::arith::{build_mangoldt_table, integer_kth_root, MangoldtTable};
use crate::asymptotics::gamma_factor;
use crate::error::{LabError, Result};
use crate::scalar::{unit_phase, Real};

/// Default truncation threshold on `e^{-n^k/N}`.
pub const DEFAULT_EPS_TRUNC: f64 = 1e-15;

/// Support points past the cutoff inspected when measuring the dropped tail.
pub const TAIL_PROBE: usize = 10_000;

/// `z = 1/N - 2πiα`.
#[inline]
pub fn z_of<T: Real>(alpha: T, n_scale: u64) -> Complex<T> {
    Complex::new(T::of_u64(n_scale).recip(), -T::TAU() * alpha)
}

/// Principal-branch `z^{-μ}`. `Re z = 1/N > 0`, so no cut is crossed.
pub fn z_power<T: Real>(alpha: T, n_scale: u64, mu: T) -> Result<Complex<T>> {
    if !(mu > T::zero()) {
        return Err(LabError::invalid(format!("z_power needs mu > 0, got {mu}")));
    }
    Ok(z_pow(alpha, n_scale, mu))
}

#[inline]
pub(crate) fn z_pow<T: Real>(alpha: T, n_scale: u64, mu: T) -> Complex<T> {
    let z = z_of(alpha, n_scale);
    // exp(-μ log z) with log z = ln|z| + i arg z, arg z ∈ (-π/2, π/2)
    let (r, theta) = z.to_polar();
    Complex::from_polar(r.powf(-mu), -mu * theta)
}

/// Term data for the truncated `S̃_k(α) = Σ Λ(n) e^{-n^k/N} e(n^k α)`.
#[derive(Debug, Clone)]
pub struct SmoothedSumSpec<T> {
    n_scale: u64,
    k: u32,
    eps_trunc: T,
    terms: Vec<(u64, T)>,
    max_frequency: u64,
    reference_cutoff: T,
    tail_bound: T,
    measured_tail: T,
    tail_points: usize,
    gamma_k: T,
}

impl<T: Real> SmoothedSumSpec<T> {
    /// Builds the term list from an existing table. The table should extend
    /// well past `(N ln(1/eps))^{1/k}` so the tail probe has points to sum;
    /// [`SmoothedSumSpec::required_table_limit`] gives a sufficient size.
    pub fn from_table(table: &MangoldtTable<T>, n_scale: u64, k: u32, eps_trunc: T) -> Result<Self> {
        if n_scale < 2 {
            return Err(LabError::invalid(format!("smoothing scale N must be ≥ 2, got {n_scale}")));
        }
        if k == 0 {
            return Err(LabError::invalid("k must be ≥ 1"));
        }
        if !(eps_trunc > T::zero() && eps_trunc < T::one()) {
            return Err(LabError::invalid(format!("eps_trunc must lie in (0, 1), got {eps_trunc}")));
        }
        let cutoff = frequency_cutoff(n_scale, eps_trunc);
        let root = integer_kth_root(cutoff, k)?;
        if table.limit() < root {
            return Err(LabError::invalid(format!(
                "Mangoldt table covers 1..{} but {root} is required for N = {n_scale}, k = {k}",
                table.limit()
            )));
        }
        let nf = T::of_u64(n_scale);
        let mut terms = Vec::new();
        let mut tail = T::zero();
        let mut tail_points = 0usize;
        for &(m, lam) in table.support() {
            if m <= root {
                let f = m.pow(k);
                terms.push((f, lam * (-T::of_u64(f) / nf).exp()));
            } else {
                if tail_points == TAIL_PROBE {
                    break;
                }
                let f = T::of_u64(m).powi(k as i32);
                tail += lam * (-f / nf).exp();
                tail_points += 1;
            }
        }
        let max_frequency = terms.last().map(|t| t.0).unwrap_or(0);
        let l = nf.ln();
        let kf = T::of_u64(k as u64);
        let tail_bound = T::of(2.0) * eps_trunc * nf.powf(kf.recip()) * l;
        if tail > tail_bound {
            return Err(LabError::NumericalFailure {
                message: "truncated tail of the smoothed sum exceeds its bound".into(),
                diagnostics: vec![
                    ("tail".into(), tail.to_f64_lossy()),
                    ("bound".into(), tail_bound.to_f64_lossy()),
                ],
            });
        }
        Ok(Self {
            n_scale,
            k,
            eps_trunc,
            terms,
            max_frequency,
            reference_cutoff: (T::of(2.0) * nf * l / kf).powf(kf.recip()),
            tail_bound,
            measured_tail: tail,
            tail_points,
            gamma_k: gamma_factor(kf)?,
        })
    }

    /// Builds a private table large enough for the terms and the tail probe.
    pub fn new(n_scale: u64, k: u32, eps_trunc: T) -> Result<Self> {
        let table = build_mangoldt_table(Self::required_table_limit(n_scale, k, eps_trunc)?)?;
        Self::from_table(&table, n_scale, k, eps_trunc)
    }

    /// Table size covering the retained terms plus [`TAIL_PROBE`] more prime powers.
    pub fn required_table_limit(n_scale: u64, k: u32, eps_trunc: T) -> Result<u64> {
        if k == 0 {
            return Err(LabError::invalid("k must be ≥ 1"));
        }
        let root = integer_kth_root(frequency_cutoff(n_scale, eps_trunc), k)?;
        // π(x) ≥ x / ln x for x ≥ 17; 10⁴ primes fit below root + 1.3e5 · ln-growth
        let span = 130_000f64 * ((root as f64 + 130_000.0).ln() / 130_000f64.ln()).max(1.0);
        Ok(root + span.ceil() as u64)
    }

    pub fn n_scale(&self) -> u64 {
        self.n_scale
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn eps_trunc(&self) -> T {
        self.eps_trunc
    }

    /// `(n^k, Λ(n) e^{-n^k/N})` for every retained prime power `n`.
    pub fn terms(&self) -> &[(u64, T)] {
        &self.terms
    }

    pub fn max_frequency(&self) -> u64 {
        self.max_frequency
    }

    /// Proof-internal truncation point `P = (2NL/k)^{1/k}`, recorded only.
    pub fn reference_cutoff(&self) -> T {
        self.reference_cutoff
    }

    /// `2 · eps · N^{1/k} · log N`.
    pub fn tail_bound(&self) -> T {
        self.tail_bound
    }

    pub fn measured_tail(&self) -> T {
        self.measured_tail
    }

    pub fn tail_points(&self) -> usize {
        self.tail_points
    }

    /// `Γ(1 + 1/k)`.
    pub fn gamma_k(&self) -> T {
        self.gamma_k
    }

    /// `Σ Λ(n)² e^{-2n^k/N}` over retained terms.
    pub fn squared_weight_sum(&self) -> T {
        let sq: Vec<T> = self.terms.iter().map(|t| t.1 * t.1).collect();
        crate::summation::pairwise_sum(&sq)
    }
}

/// Largest frequency `f` with `e^{-f/N} ≥ eps`.
fn frequency_cutoff<T: Real>(n_scale: u64, eps: T) -> u64 {
    let c = T::of_u64(n_scale) * eps.recip().ln();
    c.to_f64_lossy().floor().max(0.0) as u64
}

/// `S̃_k(α)` from the truncated term list.
pub fn stilde<T: Real>(spec: &SmoothedSumSpec<T>, alpha: T) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for &(f, w) in &spec.terms {
        acc += unit_phase(T::of_u64(f) * alpha) * w;
    }
    acc
}

/// `U(α, H) = Σ_{m=1}^{H} e(mα)`.
///
/// Evaluated as `e((H+1)α/2) sin(πHδ)/sin(πδ)` with `δ = α - round(α)`.
/// When `|e(α) - 1| < 1e-8` the denominator is replaced by its series
/// `πδ (1 - (πδ)²/6)` to avoid cancellation.
pub fn u_sum<T: Real>(alpha: T, h: u64) -> Complex<T> {
    let hf = T::of_u64(h);
    let j = alpha.round();
    let delta = alpha - j;
    let pd = T::PI() * delta;
    let gap = T::of(2.0) * pd.sin().abs();
    let ratio = if gap < T::of(1e-8) {
        if delta == T::zero() {
            hf
        } else {
            let series = pd * (T::one() - pd * pd / T::of(6.0));
            (hf * pd).sin() / series
        }
    } else {
        (hf * pd).sin() / pd.sin()
    };
    // U has period 1, so only δ enters the phase
    unit_phase(T::of_u64(h + 1) * delta / T::of(2.0)) * ratio
}

/// `Ẽ_k(α) = S̃_k(α) - γ_k z^{-1/k}`.
pub fn error_term<T: Real>(spec: &SmoothedSumSpec<T>, k: u32, alpha: T) -> Result<Complex<T>> {
    if k != spec.k {
        return Err(LabError::invalid(format!(
            "error_term: spec is for k = {}, asked for k = {k}",
            spec.k
        )));
    }
    Ok(error_term_of(spec, alpha))
}

#[inline]
pub(crate) fn model_of<T: Real>(spec: &SmoothedSumSpec<T>, alpha: T) -> Complex<T> {
    z_pow(alpha, spec.n_scale, T::of_u64(spec.k as u64).recip()) * spec.gamma_k
}

#[inline]
pub(crate) fn error_term_of<T: Real>(spec: &SmoothedSumSpec<T>, alpha: T) -> Complex<T> {
    stilde(spec, alpha) - model_of(spec, alpha)
}
