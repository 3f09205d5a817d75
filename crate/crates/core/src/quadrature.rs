//! Composite Gauss–Legendre integration with panel doubling.
//!
//! Sub-interval integrals of trigonometric polynomials (and of the
//! non-periodic `z^{-μ}` pieces) are not band-limited, so the exact
//! uniform-grid rule does not apply. Instead each segment is split into
//! equal panels carrying a fixed Gauss–Legendre rule, and the panel density
//! is doubled until two successive estimates agree.
//!
//! Panels are reduced in fixed-size chunks and the chunk partials summed in
//! index order, so results do not depend on the rayon thread count.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::scalar::Real;
use crate::summation::CompensatedComplex;

const PANEL_CHUNK: usize = 512;

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0f64; order];
        let mut weights = vec![0.0f64; order];
        let n = order as f64;
        for i in 0..(order + 1) / 2 {
            // Tricomi initial guess, then Newton on P_n
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(order, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        Self {
            nodes: nodes.into_iter().map(T::of).collect(),
            weights: weights.into_iter().map(T::of).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Stopping rule for [`integrate_refined`].
#[derive(Debug, Clone, Copy)]
pub struct Refinement {
    /// Successive estimates must agree to `rel_tol · max_k |I_k|` ...
    pub rel_tol: f64,
    /// ... or to this absolute amount, whichever is larger.
    pub abs_tol: f64,
    /// Upper bound on the total panel count before giving up.
    pub max_panels: usize,
}

impl Default for Refinement {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_panels: 1 << 24,
        }
    }
}

/// Converged integral estimates for `K` integrands sharing the same nodes.
#[derive(Debug, Clone, Copy)]
pub struct Integral<T, const K: usize> {
    pub values: [Complex<T>; K],
    /// Panels used in the final (accepted) estimate.
    pub panels: usize,
    /// Largest component change between the last two estimates.
    pub last_change: T,
}

fn panels_for<T: Real>(segments: &[(T, T)], density: f64) -> Vec<usize> {
    segments
        .iter()
        .map(|&(a, b)| {
            let len = (b - a).to_f64_lossy();
            ((len * density).ceil() as usize).max(1)
        })
        .collect()
}

/// One composite estimate with `ceil(len · density)` panels per segment.
pub fn integrate_fixed<T, F, const K: usize>(
    f: &F,
    segments: &[(T, T)],
    density: f64,
    rule: &GaussLegendre<T>,
) -> [Complex<T>; K]
where
    T: Real,
    F: Fn(T) -> [Complex<T>; K] + Sync,
{
    let counts = panels_for(segments, density);
    let mut offsets = Vec::with_capacity(counts.len() + 1);
    offsets.push(0usize);
    for c in &counts {
        offsets.push(offsets.last().unwrap() + c);
    }
    let total = *offsets.last().unwrap();
    let half = T::of(0.5);

    let panel_sum = |p: usize| -> [Complex<T>; K] {
        let s = offsets.partition_point(|&o| o <= p) - 1;
        let (a, b) = segments[s];
        let local = p - offsets[s];
        let h = (b - a) / T::of_u64(counts[s] as u64);
        let lo = a + h * T::of_u64(local as u64);
        let mid = lo + h * half;
        let rad = h * half;
        let mut acc = [Complex::new(T::zero(), T::zero()); K];
        for (x, w) in rule.nodes().iter().zip(rule.weights()) {
            let v = f(mid + rad * *x);
            for k in 0..K {
                acc[k] += v[k] * (*w * rad);
            }
        }
        acc
    };

    let partials: Vec<[Complex<T>; K]> = (0..total.div_ceil(PANEL_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = [CompensatedComplex::<T>::new(); K];
            for p in c * PANEL_CHUNK..((c + 1) * PANEL_CHUNK).min(total) {
                let v = panel_sum(p);
                for k in 0..K {
                    acc[k].add(v[k]);
                }
            }
            acc.map(|a| a.value())
        })
        .collect();

    let mut out = [CompensatedComplex::<T>::new(); K];
    for part in partials {
        for k in 0..K {
            out[k].add(part[k]);
        }
    }
    out.map(|a| a.value())
}

/// Doubles the panel density from `initial_density` until two successive
/// estimates agree under `control`.
pub fn integrate_refined<T, F, const K: usize>(
    f: &F,
    segments: &[(T, T)],
    initial_density: f64,
    control: Refinement,
) -> Result<Integral<T, K>>
where
    T: Real,
    F: Fn(T) -> [Complex<T>; K] + Sync,
{
    if segments.is_empty() {
        return Err(LabError::invalid("no integration segments"));
    }
    for &(a, b) in segments {
        if !(b > a) {
            return Err(LabError::invalid(format!("empty or reversed segment [{a}, {b}]")));
        }
    }
    let rule = GaussLegendre::new(16);
    let mut density = initial_density.max(1.0);
    let mut prev = integrate_fixed(f, segments, density, &rule);
    loop {
        density *= 2.0;
        let panels: usize = panels_for(segments, density).iter().sum();
        let cur = integrate_fixed(f, segments, density, &rule);
        let change = (0..K)
            .map(|k| (cur[k] - prev[k]).norm())
            .fold(T::zero(), T::max);
        let scale = cur.iter().map(|z| z.norm()).fold(T::zero(), T::max);
        let allowed = T::of(control.abs_tol).max(T::of(control.rel_tol) * scale);
        if change <= allowed {
            return Ok(Integral {
                values: cur,
                panels,
                last_change: change,
            });
        }
        if panels.saturating_mul(2) > control.max_panels {
            let mut diagnostics = vec![
                ("panels".to_string(), panels as f64),
                ("last_change".to_string(), change.to_f64_lossy()),
                ("allowed".to_string(), allowed.to_f64_lossy()),
            ];
            for (k, z) in cur.iter().enumerate() {
                diagnostics.push((format!("re[{k}]"), z.re.to_f64_lossy()));
                diagnostics.push((format!("im[{k}]"), z.im.to_f64_lossy()));
            }
            return Err(LabError::NumericalFailure {
                message: "composite quadrature did not converge before the panel cap".into(),
                diagnostics,
            });
        }
        prev = cur;
    }
}
