//! Divisor function table and the divisor-problem error terms Δ(x), Δ*(x).
//!
//! The table is filled once by adding 1 to every multiple of every `i`, then
//! frozen. All evaluation takes `&self`, so a built table can be shared
//! across threads.

use crate::error::{Error, Result};

/// Euler's constant γ = −Γ′(1), to double precision.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Default ceiling on `limit`; 18 bytes per entry puts this at ~1.8 GB.
pub const DEFAULT_MEMORY_CAP: u64 = 100_000_000;

/// d(n) and its prefix sums for `1 ≤ n ≤ limit`; index 0 holds zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct DivisorTable {
    limit: u64,
    counts: Vec<u16>,
    prefix: Vec<u64>,
    alt_prefix: Vec<i64>,
}

/// `x (log x + 2γ − 1)`, the main term of Σ_{n≤x} d(n), extended by 0 at x = 0.
pub fn divisor_main_term(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x.ln() + 2.0 * EULER_GAMMA - 1.0)
    }
}

impl DivisorTable {
    pub fn build(limit: u64) -> Result<Self> {
        Self::build_with_cap(limit, DEFAULT_MEMORY_CAP)
    }

    pub fn build_with_cap(limit: u64, cap: u64) -> Result<Self> {
        if limit == 0 || limit > cap {
            return Err(Error::Capacity {
                what: "divisor table limit",
                requested: limit,
                cap,
            });
        }
        let n = limit as usize;
        let mut counts = vec![0u16; n + 1];
        for i in 1..=n {
            for j in (i..=n).step_by(i) {
                counts[j] += 1;
            }
        }
        let mut prefix = vec![0u64; n + 1];
        let mut alt_prefix = vec![0i64; n + 1];
        for m in 1..=n {
            let d = counts[m] as u64;
            prefix[m] = prefix[m - 1] + d;
            alt_prefix[m] = alt_prefix[m - 1] + if m % 2 == 0 { d as i64 } else { -(d as i64) };
        }
        Ok(Self {
            limit,
            counts,
            prefix,
            alt_prefix,
        })
    }

    /// Reassembles a table from persisted arrays, re-checking the prefix invariants.
    pub fn from_parts(counts: Vec<u16>, prefix: Vec<u64>, alt_prefix: Vec<i64>) -> Result<Self> {
        let n = counts.len();
        if n < 2 || prefix.len() != n || alt_prefix.len() != n {
            return Err(Error::domain("divisor table arrays have inconsistent lengths"));
        }
        if counts[0] != 0 || prefix[0] != 0 || alt_prefix[0] != 0 {
            return Err(Error::domain("divisor table index 0 must be zero"));
        }
        for m in 1..n {
            let d = counts[m] as u64;
            let s = if m % 2 == 0 { d as i64 } else { -(d as i64) };
            if prefix[m] != prefix[m - 1] + d || alt_prefix[m] != alt_prefix[m - 1] + s {
                return Err(Error::domain(format!("divisor prefix arrays inconsistent at n = {m}")));
            }
        }
        Ok(Self {
            limit: (n - 1) as u64,
            counts,
            prefix,
            alt_prefix,
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// d(n). Panics if `n` is 0 or beyond the limit.
    pub fn d(&self, n: u64) -> u16 {
        assert!(n >= 1 && n <= self.limit, "d({n}) outside table");
        self.counts[n as usize]
    }

    /// Σ_{m≤n} d(m); `prefix_sum(0) == 0`.
    pub fn prefix_sum(&self, n: u64) -> u64 {
        self.prefix[n as usize]
    }

    /// Σ_{m≤n} (−1)^m d(m).
    pub fn alt_prefix_sum(&self, n: u64) -> i64 {
        self.alt_prefix[n as usize]
    }

    pub fn counts(&self) -> &[u16] {
        &self.counts
    }

    pub fn prefix(&self) -> &[u64] {
        &self.prefix
    }

    pub fn alt_prefix(&self) -> &[i64] {
        &self.alt_prefix
    }

    /// D(x) = Σ_{n≤x} d(n), right endpoint included, 0 below 1.
    fn summatory(&self, x: f64) -> u64 {
        self.prefix[x.floor() as usize]
    }

    /// Δ(x) for `x ≥ 0` with D(x) = 0 below 1; callers check the range.
    fn delta_extended(&self, x: f64) -> f64 {
        self.summatory(x) as f64 - divisor_main_term(x)
    }

    /// Δ(x) = Σ_{n≤x} d(n) − x(log x + 2γ − 1) for `1 ≤ x ≤ limit`.
    pub fn delta(&self, x: f64) -> Result<f64> {
        if !(x >= 1.0 && x <= self.limit as f64) {
            return Err(Error::domain(format!(
                "delta: x = {x} outside [1, {}]",
                self.limit
            )));
        }
        Ok(self.delta_extended(x))
    }

    fn check_star_range(&self, x: f64) -> Result<()> {
        if !(x >= 0.0 && 4.0 * x <= self.limit as f64) {
            return Err(Error::domain(format!(
                "delta_star: 4x = {} outside [0, {}]; rebuild the table to at least {}",
                4.0 * x,
                self.limit,
                (4.0 * x).ceil()
            )));
        }
        Ok(())
    }

    /// Δ*(x) = −Δ(x) + 2Δ(2x) − ½Δ(4x), with the empty-sum convention below 1.
    pub fn delta_star(&self, x: f64) -> Result<f64> {
        self.check_star_range(x)?;
        Ok(-self.delta_extended(x) + 2.0 * self.delta_extended(2.0 * x)
            - 0.5 * self.delta_extended(4.0 * x))
    }

    /// Δ*(x) through the alternating sum ½ Σ_{n≤4x} (−1)^n d(n) − x(log x + 2γ − 1).
    pub fn delta_star_alt(&self, x: f64) -> Result<f64> {
        self.check_star_range(x)?;
        let m = (4.0 * x).floor() as u64;
        Ok(self.delta_star_with_count(m, x))
    }

    /// Alternating form with the jump index supplied by the caller, so that
    /// grid nodes sitting exactly on x = n/4 do not depend on float rounding.
    pub(crate) fn delta_star_with_count(&self, m: u64, x: f64) -> f64 {
        0.5 * self.alt_prefix[m as usize] as f64 - divisor_main_term(x)
    }

    /// Σ_{x<n≤x+h} d(n).
    pub fn short_interval_divisor_sum(&self, x: f64, h: f64) -> Result<u64> {
        if !(x >= 2.0 && h > 0.0 && x + h <= self.limit as f64) {
            return Err(Error::domain(format!(
                "short interval ({x}, {x}+{h}] outside [2, {}]",
                self.limit
            )));
        }
        Ok(self.summatory(x + h) - self.summatory(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn floor_sum(n: u64) -> u64 {
        (1..=n).map(|k| n / k).sum()
    }

    fn brute_d(n: u64) -> u16 {
        (1..=n).filter(|k| n % k == 0).count() as u16
    }

    #[test]
    fn tiny_tables() {
        let t = DivisorTable::build(1).unwrap();
        assert_eq!(t.counts(), &[0, 1]);
        assert_eq!(t.prefix(), &[0, 1]);

        let t = DivisorTable::build(12).unwrap();
        assert_eq!(t.d(12), 6);
        assert_eq!(t.prefix_sum(10), 27);
        assert_eq!(floor_sum(10), 27);
    }

    #[test]
    fn capacity_errors() {
        assert!(matches!(
            DivisorTable::build(0),
            Err(Error::Capacity { .. })
        ));
        assert!(matches!(
            DivisorTable::build_with_cap(1001, 1000),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn counts_match_enumeration_and_primes() {
        let t = DivisorTable::build(2000).unwrap();
        for n in 1..=2000 {
            assert_eq!(t.d(n), brute_d(n), "d({n})");
        }
        for p in [2u64, 3, 5, 7, 1009, 1999] {
            assert_eq!(t.d(p), 2);
        }
    }

    #[test]
    fn prefix_equals_floor_sum_exhaustively() {
        let t = DivisorTable::build(10_000).unwrap();
        for n in 1..=10_000 {
            assert_eq!(t.prefix_sum(n), floor_sum(n), "n = {n}");
        }
    }

    #[test]
    fn delta_values() {
        let t = DivisorTable::build(100).unwrap();
        let expect10 = 27.0 - 10.0 * (10f64.ln() + 2.0 * EULER_GAMMA - 1.0);
        assert!((t.delta(10.0).unwrap() - 2.429_835_772_028_886).abs() < 1e-12);
        assert!((t.delta(10.0).unwrap() - expect10).abs() < 1e-12);
        assert!((t.delta(1.0).unwrap() - (2.0 - 2.0 * EULER_GAMMA)).abs() < 1e-15);
        assert!((t.delta(1.0).unwrap() - 0.845_568_670_2).abs() < 1e-9);
        assert!(t.delta(0.5).is_err());
        assert!(t.delta(100.5).is_err());
    }

    #[test]
    fn delta_at_large_x_matches_floor_sum() {
        let t = DivisorTable::build(1_000_000).unwrap();
        let direct = floor_sum(1_000_000) as f64 - divisor_main_term(1e6);
        assert!((t.delta(1e6).unwrap() - direct).abs() <= 1e-6);
    }

    #[test]
    fn delta_star_forms_agree_at_named_points() {
        let t = DivisorTable::build(1_000_000).unwrap();
        for x in [0.0, 0.1, 0.25, 1.0, 2.0, 2.25, 2.5, 2.75, 10.0, 100_000.0, 250_000.0] {
            let a = t.delta_star(x).unwrap();
            let b = t.delta_star_alt(x).unwrap();
            let tol = 1e-9 * (1.0 + divisor_main_term(x).abs());
            assert!((a - b).abs() <= tol, "x = {x}: {a} vs {b}");
        }
        assert_eq!(t.delta_star(0.0).unwrap(), 0.0);
        assert!(t.delta_star(250_000.25).is_err());
    }

    #[test]
    fn short_interval_sums() {
        let t = DivisorTable::build(1_000_000).unwrap();
        assert_eq!(t.short_interval_divisor_sum(10.0, 2.0).unwrap(), 8);
        assert_eq!(t.short_interval_divisor_sum(10.0, 0.5).unwrap(), 0);
        let x = 1_000_000u64 - 100;
        let brute: u64 = (x + 1..=x + 100).map(|n| brute_d(n) as u64).sum();
        assert_eq!(
            t.short_interval_divisor_sum(x as f64, 100.0).unwrap(),
            brute
        );
        assert!(t.short_interval_divisor_sum(1.0, 2.0).is_err());
        assert!(t.short_interval_divisor_sum(10.0, 0.0).is_err());
    }

    #[test]
    fn shiu_bound_empirically() {
        let t = DivisorTable::build(1_100_000).unwrap();
        let x = 1e6f64;
        for e in [0.1, 0.3, 0.5] {
            let h = x.powf(e);
            let s = t.short_interval_divisor_sum(x, h).unwrap() as f64;
            // h = x^0.1 is below the range where the constant is meaningful
            if e > 0.1 {
                assert!(s <= 4.0 * h * x.ln(), "h = {h}: {s}");
            }
        }
    }

    #[test]
    fn from_parts_rejects_corruption() {
        let t = DivisorTable::build(50).unwrap();
        let mut prefix = t.prefix().to_vec();
        prefix[20] += 1;
        assert!(DivisorTable::from_parts(t.counts().to_vec(), prefix, t.alt_prefix().to_vec()).is_err());
        let ok = DivisorTable::from_parts(
            t.counts().to_vec(),
            t.prefix().to_vec(),
            t.alt_prefix().to_vec(),
        )
        .unwrap();
        assert_eq!(ok, t);
    }

    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 { a } else { gcd(b, a % b) }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn multiplicative_on_coprime_pairs(m in 1u64..2000, n in 1u64..100) {
            prop_assume!(gcd(m, n) == 1);
            let t = table_200k();
            prop_assert_eq!(t.d(m * n) as u32, t.d(m) as u32 * t.d(n) as u32);
        }

        #[test]
        fn two_delta_star_forms(x in 0.0f64..50_000.0) {
            let t = table_200k();
            let a = t.delta_star(x).unwrap();
            let b = t.delta_star_alt(x).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + divisor_main_term(x).abs()));
        }
    }

    fn table_200k() -> &'static DivisorTable {
        use std::sync::OnceLock;
        static T: OnceLock<DivisorTable> = OnceLock::new();
        T.get_or_init(|| DivisorTable::build(200_000).unwrap())
    }
}
