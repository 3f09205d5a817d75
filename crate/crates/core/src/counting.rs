//! Ground-truth side: `R(n; k)` and its short-interval sums by direct
//! enumeration over prime-power triples.

use std::thread;

use crate::arith::{integer_kth_root, pow_at_most, prime_power_points, MangoldtTable};
use crate::asymptotics::{gamma_factor, main_term, weighted_main_term};
use crate::error::{LabError, Result};
use crate::scalar::Real;
use crate::summation::pairwise_sum;

/// Exponents `2 ≤ k1 ≤ k2 ≤ k3` with density `ρ` and `γ_{k_j} = Γ(1 + 1/k_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentTriple<T> {
    k: [u32; 3],
    rho: T,
    gammas: [T; 3],
    exploratory: bool,
}

impl<T: Real> ExponentTriple<T> {
    pub fn new(k1: u32, k2: u32, k3: u32) -> Result<Self> {
        Self::build([k1, k2, k3], 2, false)
    }

    /// Like [`ExponentTriple::new`] but accepts `k1 = 1`; the relaxation is
    /// carried in [`ExponentTriple::is_exploratory`] for report metadata.
    pub fn exploratory(k1: u32, k2: u32, k3: u32) -> Result<Self> {
        Self::build([k1, k2, k3], 1, true)
    }

    fn build(k: [u32; 3], min_k1: u32, exploratory: bool) -> Result<Self> {
        if k[0] < min_k1 || k[0] > k[1] || k[1] > k[2] {
            return Err(LabError::invalid(format!(
                "exponents must satisfy {min_k1} ≤ k1 ≤ k2 ≤ k3, got {k:?}"
            )));
        }
        let kf = k.map(|x| T::of_u64(x as u64));
        let rho = kf[0].recip() + kf[1].recip() + kf[2].recip();
        let gammas = [
            gamma_factor(kf[0])?,
            gamma_factor(kf[1])?,
            gamma_factor(kf[2])?,
        ];
        Ok(Self {
            k,
            rho,
            gammas,
            exploratory: exploratory && k[0] < 2,
        })
    }

    pub fn k(&self) -> [u32; 3] {
        self.k
    }

    /// `1/k1 + 1/k2 + 1/k3`.
    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn gammas(&self) -> [T; 3] {
        self.gammas
    }

    pub fn is_exploratory(&self) -> bool {
        self.exploratory
    }

    /// Smallest `n` with `R(n) > 0`: `2^{k1} + 2^{k2} + 2^{k3}`.
    pub fn min_represented(&self) -> u64 {
        self.k
            .iter()
            .map(|&k| 2u64.saturating_pow(k))
            .fold(0u64, |a, b| a.saturating_add(b))
    }

    fn required_table(&self, bound: u64) -> Result<u64> {
        integer_kth_root(bound, self.k[0])
    }
}

fn check_table<T: Real>(table: &MangoldtTable<T>, triple: &ExponentTriple<T>, bound: u64) -> Result<()> {
    let need = triple.required_table(bound)?;
    if table.limit() < need {
        return Err(LabError::invalid(format!(
            "Mangoldt table covers 1..{} but {need} is required for n ≤ {bound}",
            table.limit()
        )));
    }
    Ok(())
}

/// `R(n; k)`: sum of `Λ(m1)Λ(m2)Λ(m3)` over ordered `m1^{k1} + m2^{k2} + m3^{k3} = n`.
pub fn representation_count<T: Real>(
    n: u64,
    triple: &ExponentTriple<T>,
    table: &MangoldtTable<T>,
) -> Result<T> {
    if n == 0 {
        return Ok(T::zero());
    }
    check_table(table, triple, n)?;
    let [k1, k2, k3] = triple.k;
    let floor3 = 2u64.saturating_pow(k3);
    let mut terms = Vec::new();
    for p1 in prime_power_points(table, k1, n)? {
        let rest1 = n - p1.power;
        for p2 in prime_power_points(table, k2, rest1)? {
            let rest = rest1 - p2.power;
            if rest < floor3 {
                break;
            }
            let m3 = integer_kth_root(rest, k3)?;
            if pow_at_most(m3, k3, rest) == Some(rest) {
                let w3 = table.value(m3);
                if w3 > T::zero() {
                    terms.push(p1.weight * p2.weight * w3);
                }
            }
        }
    }
    Ok(pairwise_sum(&terms))
}

/// Sums of `R(n; k)` over `N < n ≤ N + H`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalReport<T> {
    pub n_base: u64,
    pub h: u64,
    pub triple: ExponentTriple<T>,
    pub sum_unweighted: T,
    /// `Σ e^{-n/N} R(n; k)`.
    pub sum_weighted: T,
    pub main_term: T,
    pub weighted_main_term: T,
    pub relative_error_unweighted: T,
    pub relative_error_weighted: T,
    /// `(n, R(n; k))` for every `n` in the window, when requested.
    pub per_n: Option<Vec<(u64, T)>>,
    pub workers: usize,
}

/// Fills both interval sums in one enumeration pass.
///
/// The outer `m1` loop is striped across `workers` threads (`m1` index
/// `i` goes to worker `i mod workers`); each worker owns its own per-`n`
/// accumulator and the merge runs in worker order, so output is
/// bit-identical for a fixed worker count.
pub fn interval_sums<T: Real>(
    n_base: u64,
    h: u64,
    triple: &ExponentTriple<T>,
    table: &MangoldtTable<T>,
    keep_per_n: bool,
    workers: usize,
) -> Result<IntervalReport<T>> {
    if h == 0 {
        return Err(LabError::invalid("H must be ≥ 1"));
    }
    if n_base == 0 {
        return Err(LabError::invalid("N must be ≥ 1"));
    }
    let top = n_base
        .checked_add(h)
        .ok_or_else(|| LabError::Overflow(format!("N + H = {n_base} + {h}")))?;
    check_table(table, triple, top)?;
    let workers = workers.max(1);
    let [k1, k2, k3] = triple.k;
    let outer = prime_power_points(table, k1, top)?;
    let inner = prime_power_points(table, k2, top)?;
    let floor3 = 2u64.saturating_pow(k3);
    let len = h as usize;

    let run = |worker: usize| -> Result<Vec<T>> {
        let mut acc = vec![T::zero(); len];
        for p1 in outer.iter().skip(worker).step_by(workers) {
            for p2 in inner.iter() {
                let ab = p1.power + p2.power;
                if ab + floor3 > top {
                    break;
                }
                // m3^{k3} ∈ [N + 1 - ab, N + H - ab]
                let hi = top - ab;
                let lo = (n_base + 1).saturating_sub(ab).max(1);
                let m_lo = integer_kth_root(lo - 1, k3)? + 1;
                let m_hi = integer_kth_root(hi, k3)?;
                let w12 = p1.weight * p2.weight;
                for m3 in m_lo.max(2)..=m_hi {
                    let w3 = table.value(m3);
                    if w3 > T::zero() {
                        let n = ab + m3.pow(k3);
                        acc[(n - n_base - 1) as usize] += w12 * w3;
                    }
                }
            }
        }
        Ok(acc)
    };

    let partials: Vec<Vec<T>> = if workers == 1 {
        vec![run(0)?]
    } else {
        thread::scope(|s| {
            let handles: Vec<_> = (0..workers).map(|w| s.spawn(move || run(w))).collect();
            handles
                .into_iter()
                .map(|hd| hd.join().expect("counting worker panicked"))
                .collect::<Result<Vec<_>>>()
        })?
    };

    let mut per_n = vec![T::zero(); len];
    for part in &partials {
        for (slot, v) in per_n.iter_mut().zip(part) {
            *slot += *v;
        }
    }

    let nf = T::of_u64(n_base);
    let weighted: Vec<T> = per_n
        .iter()
        .enumerate()
        .map(|(i, r)| (-T::of_u64(n_base + 1 + i as u64) / nf).exp() * *r)
        .collect();
    let sum_unweighted = pairwise_sum(&per_n);
    let sum_weighted = pairwise_sum(&weighted);
    let main = main_term(n_base, h, triple);
    let wmain = weighted_main_term(n_base, h, triple);

    Ok(IntervalReport {
        n_base,
        h,
        triple: *triple,
        sum_unweighted,
        sum_weighted,
        main_term: main,
        weighted_main_term: wmain,
        relative_error_unweighted: (sum_unweighted - main) / main,
        relative_error_weighted: (sum_weighted - wmain) / wmain,
        per_n: keep_per_n.then(|| {
            per_n
                .iter()
                .enumerate()
                .map(|(i, r)| (n_base + 1 + i as u64, *r))
                .collect()
        }),
        workers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::build_mangoldt_table;
    use std::f64::consts::LN_2;

    fn ln3() -> f64 {
        3f64.ln()
    }

    #[test]
    fn triple_validation() {
        assert!(ExponentTriple::<f64>::new(2, 2, 2).is_ok());
        assert!(ExponentTriple::<f64>::new(1, 2, 2).is_err());
        assert!(ExponentTriple::<f64>::new(3, 2, 4).is_err());
        let x = ExponentTriple::<f64>::exploratory(1, 2, 2).unwrap();
        assert!(x.is_exploratory());
        assert!((x.rho() - 2.0).abs() < 1e-15);
        assert!(!ExponentTriple::<f64>::exploratory(2, 2, 2).unwrap().is_exploratory());
        for k in [(2, 2, 2), (2, 3, 4), (5, 9, 40)] {
            let t = ExponentTriple::<f64>::new(k.0, k.1, k.2).unwrap();
            assert!(t.rho() > 0.0 && t.rho() <= 1.5);
            assert!(t.gammas().iter().all(|g| *g > 0.88 && *g <= 1.0));
        }
    }

    #[test]
    fn small_representation_counts() {
        let table = build_mangoldt_table::<f64>(100).unwrap();
        let t = ExponentTriple::new(2, 2, 2).unwrap();
        let r12 = representation_count(12, &t, &table).unwrap();
        assert!((r12 - LN_2.powi(3)).abs() < 1e-15);
        assert!((r12 - 0.333_024_651_988_929_5).abs() < 1e-15);
        let r17 = representation_count(17, &t, &table).unwrap();
        assert!((r17 - 3.0 * LN_2 * LN_2 * ln3()).abs() < 1e-14);
        assert!((r17 - 1.583_494_755_654_499_3).abs() < 1e-14);
        assert_eq!(representation_count(3, &t, &table).unwrap(), 0.0);
        assert_eq!(representation_count(0, &t, &table).unwrap(), 0.0);
        for k in [(2, 2, 2), (2, 3, 4), (3, 3, 3)] {
            let t = ExponentTriple::new(k.0, k.1, k.2).unwrap();
            for n in 1..t.min_represented() {
                assert_eq!(representation_count(n, &t, &table).unwrap(), 0.0);
            }
            assert!(representation_count(t.min_represented(), &t, &table).unwrap() > 0.0);
        }
    }

    #[test]
    fn table_too_small() {
        let table = build_mangoldt_table::<f64>(10).unwrap();
        let t = ExponentTriple::new(2, 2, 2).unwrap();
        assert!(matches!(
            representation_count(1000, &t, &table),
            Err(LabError::InvalidArgument(_))
        ));
        assert!(interval_sums(1000, 5, &t, &table, false, 1).is_err());
    }

    #[test]
    fn interval_examples() {
        let table = build_mangoldt_table::<f64>(100).unwrap();
        let t = ExponentTriple::new(2, 2, 2).unwrap();
        let r = interval_sums(11, 1, &t, &table, false, 1).unwrap();
        assert!((r.sum_unweighted - LN_2.powi(3)).abs() < 1e-15);

        let r = interval_sums(10, 7, &t, &table, true, 1).unwrap();
        let want = LN_2.powi(3) + 3.0 * LN_2 * LN_2 * ln3();
        assert!((r.sum_unweighted - want).abs() < 1e-14);
        assert!((r.sum_unweighted - 1.916_519_407_643_428_8).abs() < 1e-14);
        for (n, v) in r.per_n.unwrap() {
            if n != 12 && n != 17 {
                assert_eq!(v, 0.0, "n = {n}");
            }
        }

        let r = interval_sums(2, 9, &t, &table, false, 1).unwrap();
        assert_eq!(r.sum_unweighted, 0.0);
        assert_eq!(r.sum_weighted, 0.0);
        assert!(interval_sums(10, 0, &t, &table, false, 1).is_err());
    }

    #[test]
    fn interval_matches_pointwise_and_workers_agree() {
        let table = build_mangoldt_table::<f64>(2_000).unwrap();
        for k in [(2, 2, 2), (2, 3, 4), (3, 3, 3)] {
            let t = ExponentTriple::new(k.0, k.1, k.2).unwrap();
            let r = interval_sums(3000, 250, &t, &table, true, 1).unwrap();
            let per = r.per_n.as_ref().unwrap();
            for &(n, v) in per {
                let direct = representation_count(n, &t, &table).unwrap();
                assert!((v - direct).abs() <= 1e-12 * (1.0 + direct), "n = {n}");
            }
            let e2 = (-2.0f64).exp();
            assert!(r.sum_weighted >= e2 * r.sum_unweighted * (1.0 - 1e-12));
            assert!(r.sum_weighted <= (-1.0f64).exp() * r.sum_unweighted * (1.0 + 1e-12));
            let total: f64 = per.iter().map(|p| p.1).sum();
            assert!((total - r.sum_unweighted).abs() <= 1e-9 * r.sum_unweighted);
            for w in [2, 3, 7] {
                let rw = interval_sums(3000, 250, &t, &table, false, w).unwrap();
                assert!((rw.sum_unweighted - r.sum_unweighted).abs() <= 1e-12 * r.sum_unweighted);
                let again = interval_sums(3000, 250, &t, &table, false, w).unwrap();
                assert_eq!(again.sum_unweighted.to_bits(), rw.sum_unweighted.to_bits());
                assert_eq!(rw.workers, w);
            }
        }
    }

    #[test]
    fn single_precision_runs() {
        let table = build_mangoldt_table::<f32>(100).unwrap();
        let t = ExponentTriple::<f32>::new(2, 2, 2).unwrap();
        let r = representation_count(17, &t, &table).unwrap();
        assert!((r - 1.583_494_8).abs() < 1e-5);
    }
}
