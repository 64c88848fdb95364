//! Small numerical building blocks shared by the rest of the crate.
//!
//! * [`CompensatedSum`] is Neumaier's variant of Kahan summation. Partial
//!   sums of schedules feed the denominators of the rate ratios, and those
//!   run to 10^5 terms.
//! * [`SplitMix64`] is a counter-based generator: term `n` of a stream is a
//!   pure function of `(seed, stream, n)`, so random schedules can be
//!   evaluated out of order and from several threads.

use std::iter::FromIterator;
use std::ops::AddAssign;

/// Running sum with a compensation term (Kahan-Babuska-Neumaier).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl AddAssign<f64> for CompensatedSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of an iterator of `f64`.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// The seed used by every random schedule unless one is given explicitly.
pub const DEFAULT_SEED: u64 = 42;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_SALT: u64 = 0xD1B5_4A32_D192_ED03;

/// Counter-based splitmix64.
///
/// The raw word for index `n` is
///
/// ```text
/// z = seed + stream * 0xD1B54A32D192ED03 + (n + 1) * 0x9E3779B97F4A7C15   (mod 2^64)
/// z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
/// z = (z ^ (z >> 27)) * 0x94D049BB133111EB
/// z =  z ^ (z >> 31)
/// ```
///
/// which is exactly the `n`-th output of the sequential splitmix64 generator
/// started from state `seed + stream * 0xD1B54A32D192ED03`. Uniform doubles
/// take the top 53 bits: `(z >> 11) * 2^-53`, a value in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SplitMix64 {
    seed: u64,
    stream: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    #[inline]
    pub fn word(&self, index: u64) -> u64 {
        let base = self.seed.wrapping_add(self.stream.wrapping_mul(STREAM_SALT));
        mix64(base.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform sample in `[0, 1)` for the given index.
    #[inline]
    pub fn uniform(&self, index: u64) -> f64 {
        (self.word(index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        // 1 + 1e-16 * 10^4 loses everything in naive summation.
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        assert!((acc.value() - (1.0 + 1e-12)).abs() < 1e-24);

        let naive: f64 = std::iter::once(1.0)
            .chain(std::iter::repeat(1e-16).take(10_000))
            .sum();
        assert_eq!(naive, 1.0);
    }

    #[test]
    fn neumaier_handles_large_cancellation() {
        assert_eq!(compensated_sum([1.0, 1e100, 1.0, -1e100]), 2.0);
    }

    #[test]
    fn splitmix_matches_sequential_reference() {
        // Sequential splitmix64 seeded with 0 (reference values from the
        // published generator).
        let g = SplitMix64::new(0, 0);
        assert_eq!(g.word(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(g.word(1), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(g.word(2), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn uniform_is_in_unit_interval_and_deterministic() {
        let g = SplitMix64::new(DEFAULT_SEED, 3);
        for n in 0..10_000 {
            let u = g.uniform(n);
            assert!((0.0..1.0).contains(&u));
            assert_eq!(u.to_bits(), SplitMix64::new(DEFAULT_SEED, 3).uniform(n).to_bits());
        }
    }

    #[test]
    fn streams_differ() {
        let a = SplitMix64::new(DEFAULT_SEED, 0);
        let b = SplitMix64::new(DEFAULT_SEED, 1);
        assert!((0..100).any(|n| a.word(n) != b.word(n)));
    }
}
