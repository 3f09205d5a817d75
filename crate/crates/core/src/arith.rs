//! Von Mangoldt table and prime-power enumeration.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{LabError, Result};
use crate::scalar::Real;
use crate::summation::pairwise_sum;

/// Largest table accepted by [`build_mangoldt_table`].
pub const DEFAULT_LIMIT_CAP: u64 = 1 << 32;

const CACHE_MAGIC: &[u8; 8] = b"WGLMANG\0";
const CACHE_VERSION: u32 = 1;

/// Dense `Λ(n)` for `1 ≤ n ≤ limit` plus the sparse list of prime powers.
///
/// Immutable after construction and cheap to share across threads by
/// reference.
#[derive(Debug, Clone)]
pub struct MangoldtTable<T> {
    limit: u64,
    values: Vec<T>,
    support: Vec<(u64, T)>,
}

impl<T: Real> MangoldtTable<T> {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// `Λ(n)`; zero for `n = 0`. Panics when `n > limit`.
    #[inline]
    pub fn value(&self, n: u64) -> T {
        self.values[n as usize]
    }

    pub fn get(&self, n: u64) -> Option<T> {
        self.values.get(n as usize).copied()
    }

    /// Values indexed by `n`; slot 0 is an unused zero.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `(n, Λ(n))` for every prime power `n ≤ limit`, ascending.
    pub fn support(&self) -> &[(u64, T)] {
        &self.support
    }

    /// Chebyshev's `ψ(limit)`.
    pub fn psi(&self) -> T {
        pairwise_sum(&self.values)
    }

    /// Support entries with `n ≤ bound`.
    pub fn support_up_to(&self, bound: u64) -> &[(u64, T)] {
        let end = self.support.partition_point(|&(n, _)| n <= bound);
        &self.support[..end]
    }

    fn from_values(limit: u64, values: Vec<T>) -> Self {
        let support = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > T::zero())
            .map(|(n, &v)| (n as u64, v))
            .collect();
        Self {
            limit,
            values,
            support,
        }
    }

    /// Writes the table as `magic, version, limit, values (f64 LE)`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&CACHE_VERSION.to_le_bytes())?;
        w.write_all(&self.limit.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_f64_lossy().to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Loads a cached table and re-derives a 1% random sample of entries by
    /// trial division before accepting it.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(LabError::CorruptCache("bad magic".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != CACHE_VERSION {
            return Err(LabError::CorruptCache(format!(
                "version {version}, expected {CACHE_VERSION}"
            )));
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let limit = u64::from_le_bytes(b8);
        if limit < 2 || limit > DEFAULT_LIMIT_CAP {
            return Err(LabError::CorruptCache(format!("limit {limit} out of range")));
        }
        let mut values = Vec::with_capacity(limit as usize + 1);
        for _ in 0..=limit {
            r.read_exact(&mut b8)
                .map_err(|_| LabError::CorruptCache("truncated value array".into()))?;
            values.push(T::of(f64::from_le_bytes(b8)));
        }
        if r.read(&mut b8)? != 0 {
            return Err(LabError::CorruptCache("trailing bytes".into()));
        }
        let table = Self::from_values(limit, values);
        table.verify_sample(((limit + 1) / 100).max(1) as usize, limit)?;
        Ok(table)
    }

    fn verify_sample(&self, count: usize, seed: u64) -> Result<()> {
        let mut rng = StdRng::seed_from_u64(seed);
        let tol = T::of(1e-12).max(T::epsilon() * T::of(8.0));
        for _ in 0..count {
            let n = rng.gen_range(0..=self.limit);
            let expect = prime_power_base(n)
                .map(|p| T::of_u64(p).ln())
                .unwrap_or_else(T::zero);
            let got = self.value(n);
            if (got - expect).abs() > tol * (T::one() + expect) {
                return Err(LabError::CorruptCache(format!(
                    "entry {n}: stored {got}, recomputed {expect}"
                )));
            }
        }
        Ok(())
    }
}

/// Sieves `Λ(n)` for `n ≤ limit` with the default cap.
pub fn build_mangoldt_table<T: Real>(limit: u64) -> Result<MangoldtTable<T>> {
    build_mangoldt_table_capped(limit, DEFAULT_LIMIT_CAP)
}

pub fn build_mangoldt_table_capped<T: Real>(limit: u64, cap: u64) -> Result<MangoldtTable<T>> {
    if limit < 2 {
        return Err(LabError::invalid(format!("table limit must be ≥ 2, got {limit}")));
    }
    if limit > cap {
        return Err(LabError::ResourceLimit {
            what: format!("table limit {limit}"),
            cap,
        });
    }
    let len = limit as usize + 1;
    let mut composite = vec![false; len];
    let mut values = vec![T::zero(); len];
    for p in 2..len {
        if composite[p] {
            continue;
        }
        if let Some(start) = p.checked_mul(p) {
            let mut j = start;
            while j < len {
                composite[j] = true;
                j += p;
            }
        }
        let log_p = T::of_u64(p as u64).ln();
        let mut q = p;
        loop {
            values[q] = log_p;
            match q.checked_mul(p) {
                Some(next) if next < len => q = next,
                _ => break,
            }
        }
    }
    Ok(MangoldtTable::from_values(limit, values))
}

/// `(m, m^k, Λ(m))` for one prime power `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimePowerPoint<T> {
    pub base: u64,
    pub power: u64,
    pub weight: T,
}

/// All prime powers `m` with `m^k ≤ limit_kth`, ascending in `m`.
pub fn prime_power_points<T: Real>(
    table: &MangoldtTable<T>,
    k: u32,
    limit_kth: u64,
) -> Result<Vec<PrimePowerPoint<T>>> {
    let root = integer_kth_root(limit_kth, k)?;
    if table.limit() < root {
        return Err(LabError::invalid(format!(
            "Mangoldt table covers 1..{} but {root} is required (k = {k}, bound {limit_kth})",
            table.limit()
        )));
    }
    table
        .support_up_to(root)
        .iter()
        .map(|&(m, w)| {
            let power = m
                .checked_pow(k)
                .ok_or_else(|| LabError::Overflow(format!("{m}^{k}")))?;
            Ok(PrimePowerPoint {
                base: m,
                power,
                weight: w,
            })
        })
        .collect()
}

/// `base^k` if it does not exceed `bound`.
#[inline]
pub fn pow_at_most(base: u64, k: u32, bound: u64) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..k {
        acc = acc.checked_mul(base)?;
        if acc > bound {
            return None;
        }
    }
    Some(acc)
}

/// `floor(n^{1/k})`, exact in integer arithmetic.
pub fn integer_kth_root(n: u64, k: u32) -> Result<u64> {
    if k == 0 {
        return Err(LabError::invalid("root index k must be ≥ 1"));
    }
    if k == 1 || n < 2 {
        return Ok(n);
    }
    if k >= 64 {
        return Ok(1);
    }
    let mut r = (n as f64).powf(1.0 / k as f64).round() as u64;
    while r > 0 && pow_at_most(r, k, n).is_none() {
        r -= 1;
    }
    while pow_at_most(r + 1, k, n).is_some() {
        r += 1;
    }
    Ok(r)
}

/// The prime `p` with `n = p^m`, found by trial division; `None` otherwise.
pub fn prime_power_base(n: u64) -> Option<u64> {
    if n < 2 {
        return None;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            let mut r = n;
            while r % d == 0 {
                r /= d;
            }
            return (r == 1).then_some(d);
        }
        d += if d == 2 { 1 } else { 2 };
    }
    Some(n)
}
