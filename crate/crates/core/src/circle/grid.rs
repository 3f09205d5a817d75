//! Uniform periodic sampling of `[-1/2, 1/2)` and exact Fourier-coefficient
//! extraction for band-limited integrands.
//!
//! Every phase on the grid is `e(f α_j)` with `α_j = -1/2 + j/M`, computed as
//! `(-1)^f e((f j mod M)/M)` so no floating-point product `f·α` is formed.

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::sums::{u_sum, SmoothedSumSpec};
use crate::error::{LabError, Result};
use crate::scalar::{rational_phase, Real};
use crate::summation::CompensatedComplex;

const SAMPLE_CHUNK: usize = 4096;

/// `M` uniform samples able to integrate trigonometric polynomials of degree
/// up to `bandwidth_bound` exactly.
#[derive(Debug, Clone)]
pub struct QuadratureGrid<T> {
    samples: usize,
    bandwidth_bound: u64,
    twiddles: Vec<Complex<T>>,
}

impl<T: Real> QuadratureGrid<T> {
    /// Smallest 5-smooth `M > 2·bandwidth + 4`.
    pub fn new(bandwidth_bound: u64) -> Result<Self> {
        let min = 2 * bandwidth_bound + 5;
        Self::with_samples(next_smooth(min), bandwidth_bound)
    }

    pub fn with_samples(samples: usize, bandwidth_bound: u64) -> Result<Self> {
        if (samples as u64) <= 2 * bandwidth_bound + 4 {
            return Err(LabError::invalid(format!(
                "grid of {samples} samples aliases bandwidth {bandwidth_bound}; need M > {}",
                2 * bandwidth_bound + 4
            )));
        }
        let m = samples as u64;
        let twiddles = (0..m).map(|r| rational_phase(r as i128, m)).collect();
        Ok(Self {
            samples,
            bandwidth_bound,
            twiddles,
        })
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn bandwidth_bound(&self) -> u64 {
        self.bandwidth_bound
    }

    /// `α_j = -1/2 + j/M`.
    pub fn alpha(&self, j: usize) -> T {
        T::of(-0.5) + T::of_u64(j as u64) / T::of_u64(self.samples as u64)
    }

    /// `e(f α_j)` for any integer frequency.
    #[inline]
    pub fn phase(&self, f: i64, j: usize) -> Complex<T> {
        let m = self.samples as i128;
        let r = (f as i128 * j as i128).rem_euclid(m) as usize;
        let w = self.twiddles[r];
        if f.rem_euclid(2) == 1 {
            -w
        } else {
            w
        }
    }

    /// Evaluates `g(j, α_j)` at every node in parallel.
    pub fn sample<F>(&self, g: F) -> Vec<Complex<T>>
    where
        F: Fn(usize, T) -> Complex<T> + Sync,
    {
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.samples];
        out.par_chunks_mut(SAMPLE_CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| {
                for (i, slot) in chunk.iter_mut().enumerate() {
                    let j = c * SAMPLE_CHUNK + i;
                    *slot = g(j, self.alpha(j));
                }
            });
        out
    }

    /// `S̃_k(α_j)` at every node with exact phases.
    pub fn sample_stilde(&self, spec: &SmoothedSumSpec<T>) -> Vec<Complex<T>> {
        self.sample(|j, _| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for &(f, w) in spec.terms() {
                acc += self.phase(f as i64, j) * w;
            }
            acc
        })
    }

    /// `U(-α_j, H) e(-N α_j)` at every node.
    pub fn sample_interval_kernel(&self, n_base: u64, h: u64) -> Vec<Complex<T>> {
        self.sample(|j, a| u_sum(-a, h) * self.phase(-(n_base as i64), j))
    }

    /// `(1/M) Σ_j F(α_j) G(α_j)` with chunk-ordered compensated reduction.
    pub fn mean_of_product(&self, f: &[Complex<T>], g: &[Complex<T>]) -> Result<Complex<T>> {
        self.check_len(f.len())?;
        self.check_len(g.len())?;
        let parts: Vec<Complex<T>> = f
            .par_chunks(SAMPLE_CHUNK)
            .zip(g.par_chunks(SAMPLE_CHUNK))
            .map(|(a, b)| {
                let mut acc = CompensatedComplex::new();
                for (x, y) in a.iter().zip(b) {
                    acc.add(*x * *y);
                }
                acc.value()
            })
            .collect();
        let mut acc = CompensatedComplex::new();
        for p in parts {
            acc.add(p);
        }
        Ok(acc.value() / T::of_u64(self.samples as u64))
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.samples {
            return Err(LabError::invalid(format!(
                "integrand has {len} samples, grid has {}",
                self.samples
            )));
        }
        Ok(())
    }
}

fn next_smooth(min: u64) -> usize {
    let mut n = min.max(1);
    loop {
        let mut r = n;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return n as usize;
        }
        n += 1;
    }
}

/// `(1/M) Σ_j F(α_j) e(-t α_j)`: the `t`-th Fourier coefficient of a sampled
/// band-limited integrand.
pub fn fourier_coefficient<T: Real>(
    grid: &QuadratureGrid<T>,
    integrand: &[Complex<T>],
    target: i64,
) -> Result<Complex<T>> {
    grid.check_len(integrand.len())?;
    if target.unsigned_abs() > grid.bandwidth_bound() {
        return Err(LabError::invalid(format!(
            "target frequency {target} exceeds grid bandwidth {}",
            grid.bandwidth_bound()
        )));
    }
    let parts: Vec<Complex<T>> = integrand
        .par_chunks(SAMPLE_CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut acc = CompensatedComplex::new();
            for (i, v) in chunk.iter().enumerate() {
                acc.add(*v * grid.phase(-target, c * SAMPLE_CHUNK + i));
            }
            acc.value()
        })
        .collect();
    let mut acc = CompensatedComplex::new();
    for p in parts {
        acc.add(p);
    }
    Ok(acc.value() / T::of_u64(grid.samples() as u64))
}

/// All `M` Fourier coefficients at once, via one FFT.
#[derive(Debug, Clone)]
pub struct Spectrum<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> Spectrum<T> {
    pub fn compute(grid: &QuadratureGrid<T>, integrand: &[Complex<T>]) -> Result<Self> {
        grid.check_len(integrand.len())?;
        let m = grid.samples();
        let mut buf = integrand.to_vec();
        FftPlanner::<T>::new().plan_fft_forward(m).process(&mut buf);
        let scale = T::of_u64(m as u64).recip();
        let coeffs = buf.into_iter().map(|x| x * scale).collect();
        Ok(Self { coeffs })
    }

    /// Coefficient of `e(tα)`, i.e. `(-1)^t X_{t mod M} / M`; meaningful for `|t| ≤ M/2`.
    pub fn coefficient(&self, t: i64) -> Complex<T> {
        let c = self.coeffs[t.rem_euclid(self.coeffs.len() as i64) as usize];
        if t.rem_euclid(2) == 1 {
            -c
        } else {
            c
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::sums::{stilde, DEFAULT_EPS_TRUNC};

    #[test]
    fn grid_size_rules() {
        let g = QuadratureGrid::<f64>::new(100).unwrap();
        assert!(g.samples() > 204);
        assert!(QuadratureGrid::<f64>::with_samples(204, 100).is_err());
        assert!(QuadratureGrid::<f64>::with_samples(205, 100).is_ok());
        assert_eq!(next_smooth(205), 216);
        assert_eq!(g.alpha(0), -0.5);
    }

    #[test]
    fn pure_tone_coefficients() {
        let g = QuadratureGrid::<f64>::new(16).unwrap();
        let tone = g.sample(|j, _| g.phase(5, j));
        let c5 = fourier_coefficient(&g, &tone, 5).unwrap();
        let c4 = fourier_coefficient(&g, &tone, 4).unwrap();
        assert!((c5 - Complex::new(1.0, 0.0)).norm() < 1e-15);
        assert!(c4.norm() < 1e-15);
        assert!(fourier_coefficient(&g, &tone, 17).is_err());
        assert!(fourier_coefficient(&g, &tone[1..], 5).is_err());
    }

    #[test]
    fn exact_on_random_trig_polynomials() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let degree = 300i64;
        let coefs: Vec<Complex<f64>> = (-degree..=degree)
            .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let g = QuadratureGrid::<f64>::new(degree as u64 * 2).unwrap();
        let values = g.sample(|j, _| {
            coefs
                .iter()
                .enumerate()
                .map(|(i, c)| *c * g.phase(i as i64 - degree, j))
                .sum()
        });
        let spectrum = Spectrum::compute(&g, &values).unwrap();
        for t in -degree..=degree {
            let want = coefs[(t + degree) as usize];
            let direct = fourier_coefficient(&g, &values, t).unwrap();
            assert!((direct - want).norm() <= 1e-10 * want.norm().max(1.0), "t = {t}");
            assert!((spectrum.coefficient(t) - want).norm() <= 1e-10 * want.norm().max(1.0), "t = {t}");
        }
        // outside the support everything vanishes
        assert!(fourier_coefficient(&g, &values, degree + 1).unwrap().norm() < 1e-12);
    }

    #[test]
    fn odd_grid_spectrum_signs() {
        let g = QuadratureGrid::<f64>::with_samples(45, 20).unwrap();
        for f in [-7i64, -4, 0, 3, 20, -20] {
            let tone = g.sample(|j, _| g.phase(f, j));
            let s = Spectrum::compute(&g, &tone).unwrap();
            assert!((s.coefficient(f) - Complex::new(1.0, 0.0)).norm() < 1e-12, "f = {f}");
        }
    }

    #[test]
    fn stilde_samples_match_pointwise() {
        let spec = SmoothedSumSpec::<f64>::new(300, 2, DEFAULT_EPS_TRUNC).unwrap();
        let g = QuadratureGrid::<f64>::new(spec.max_frequency()).unwrap();
        let s = g.sample_stilde(&spec);
        for j in [0usize, 1, 17, g.samples() / 2, g.samples() - 1] {
            assert!((s[j] - stilde(&spec, g.alpha(j))).norm() < 1e-9);
        }
    }

    #[test]
    fn kernel_samples_match_pointwise() {
        let g = QuadratureGrid::<f64>::new(600).unwrap();
        let k = g.sample_interval_kernel(500, 20);
        for j in [0usize, 3, 999] {
            let a = g.alpha(j);
            let direct: Complex<f64> = (1..=20u64)
                .map(|m| crate::scalar::unit_phase(-((500 + m) as f64) * a))
                .sum();
            assert!((k[j] - direct).norm() < 1e-10);
        }
    }
}
