//! Random selection process and the sparse sequence `a_n(ω)`.
//!
//! Each index `n ≥ 1` is selected independently with probability
//! `σ(n) = n^{-a}`. The selection is driven by a stateless counter-based
//! uniform `u_n = mix64(seed, n)`, so any `X_n` can be recomputed in O(1)
//! and identical `(seed, a, N_max)` always reproduce identical bits.

use std::io::{self, Write};
use std::ops::RangeInclusive;

use crate::numeric::{fmt_sig17, linear_fit, KahanSum};
use crate::{Error, Result};

/// Largest sample length accepted by default (`2^31 - 1`).
pub const DEFAULT_MAX_LEN: u64 = (1 << 31) - 1;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer (Stafford's mix13 variant).
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform variate in `[0, 1)` attached to `(seed, n)`: the `n`-th output
/// of a SplitMix64 stream keyed by `mix64(seed)`, truncated to 53 bits.
#[inline]
pub fn uniform(seed: u64, n: u64) -> f64 {
    let key = mix64(seed ^ GOLDEN_GAMMA);
    let bits = mix64(key.wrapping_add(n.wrapping_mul(GOLDEN_GAMMA)));
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Selection probabilities `σ(n) = n^{-a}` with `0 < a < 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelectionProfile {
    a: f64,
}

impl SelectionProfile {
    pub fn new(a: f64) -> Result<Self> {
        if a > 0.0 && a < 1.0 {
            Ok(Self { a })
        } else {
            Err(Error::ExponentOutOfRange(a))
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// `σ(n) = n^{-a}`; `n` must be at least 1.
    #[inline]
    pub fn sigma(&self, n: u64) -> f64 {
        debug_assert!(n >= 1);
        (n as f64).powf(-self.a)
    }

    /// `W_N = Σ_{n ≤ N} σ(n)` with compensated summation.
    pub fn weight_sum(&self, n: u64) -> f64 {
        (1..=n).map(|k| self.sigma(k)).collect::<KahanSum>().value()
    }

    /// Running weight sums `W_1, …, W_N`.
    pub fn weight_sums(&self, n: u64) -> Vec<f64> {
        let mut acc = KahanSum::new();
        (1..=n)
            .map(|k| {
                acc.add(self.sigma(k));
                acc.value()
            })
            .collect()
    }

    /// Predicted constant `c` in `a_n ≈ c · n^{1/(1-a)}`, from inverting
    /// `W_N ≈ N^{1-a}/(1-a)`.
    pub fn growth_constant(&self) -> f64 {
        (1.0 - self.a).powf(1.0 / (1.0 - self.a))
    }
}

/// A realisation of the selection bits `X_1, …, X_{N_max}`.
///
/// Only the prefix sums `P_n` are stored; `X_n = P_n - P_{n-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionSample {
    profile: SelectionProfile,
    seed: u64,
    prefix: Vec<u32>,
}

/// Draws `X_1..X_{N_max}` with `X_n = 1` iff `u_n < σ(n)`.
pub fn sample_selection(profile: SelectionProfile, n_max: u64, seed: u64) -> Result<SelectionSample> {
    sample_selection_capped(profile, n_max, seed, DEFAULT_MAX_LEN)
}

/// As [`sample_selection`] with an explicit length cap.
pub fn sample_selection_capped(
    profile: SelectionProfile,
    n_max: u64,
    seed: u64,
    max_len: u64,
) -> Result<SelectionSample> {
    if n_max == 0 {
        return Err(Error::EmptyLength);
    }
    if n_max > max_len.min(DEFAULT_MAX_LEN) {
        return Err(Error::SampleTooLong {
            requested: n_max,
            max: max_len.min(DEFAULT_MAX_LEN),
        });
    }
    let mut prefix = Vec::with_capacity(n_max as usize + 1);
    prefix.push(0u32);
    let mut count = 0u32;
    for n in 1..=n_max {
        if uniform(seed, n) < profile.sigma(n) {
            count += 1;
        }
        prefix.push(count);
    }
    Ok(SelectionSample { profile, seed, prefix })
}

impl SelectionSample {
    /// Builds a sample from explicit bits (`bits[0]` is `X_1`). Intended for
    /// diagnostics and tests; the seed is recorded as 0.
    pub fn from_bits(profile: SelectionProfile, bits: &[bool]) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::EmptyLength);
        }
        let mut prefix = Vec::with_capacity(bits.len() + 1);
        prefix.push(0u32);
        let mut count = 0u32;
        for &b in bits {
            count += u32::from(b);
            prefix.push(count);
        }
        Ok(Self {
            profile,
            seed: 0,
            prefix,
        })
    }

    pub fn profile(&self) -> SelectionProfile {
        self.profile
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `N_max`.
    pub fn len(&self) -> u64 {
        (self.prefix.len() - 1) as u64
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `X_n` for `1 ≤ n ≤ N_max`.
    #[inline]
    pub fn bit(&self, n: u64) -> bool {
        let n = n as usize;
        self.prefix[n] != self.prefix[n - 1]
    }

    /// `P_n = X_1 + … + X_n`, with `P_0 = 0`.
    #[inline]
    pub fn prefix(&self, n: u64) -> u64 {
        u64::from(self.prefix[n as usize])
    }

    /// `Y_n = X_n - σ(n)`.
    #[inline]
    pub fn centered(&self, n: u64) -> f64 {
        f64::from(u8::from(self.bit(n))) - self.profile.sigma(n)
    }

    /// `Y_1, …, Y_N` as a vector (index 0 holds `Y_1`).
    pub fn centered_values(&self, n: u64) -> Vec<f64> {
        (1..=n).map(|k| self.centered(k)).collect()
    }

    /// `X_1, …, X_N` as reals (index 0 holds `X_1`).
    pub fn bit_values(&self, n: u64) -> Vec<f64> {
        (1..=n).map(|k| f64::from(u8::from(self.bit(k)))).collect()
    }

    /// Number of selected indices, `P_{N_max}`.
    pub fn count(&self) -> u64 {
        self.prefix(self.len())
    }

    /// Writes `n,x_n,prefix,sigma_n`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "n,x_n,prefix,sigma_n")?;
        for n in 1..=self.len() {
            writeln!(
                w,
                "{},{},{},{}",
                n,
                u8::from(self.bit(n)),
                self.prefix(n),
                fmt_sig17(self.profile.sigma(n))
            )?;
        }
        Ok(())
    }
}

/// The increasing enumeration `a_1 < a_2 < …` of selected indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseSequence {
    terms: Vec<u64>,
    source_seed: u64,
    source_len: u64,
}

pub fn build_sparse_sequence(sample: &SelectionSample) -> SparseSequence {
    let terms = (1..=sample.len()).filter(|&n| sample.bit(n)).collect();
    SparseSequence {
        terms,
        source_seed: sample.seed(),
        source_len: sample.len(),
    }
}

impl SparseSequence {
    /// A sequence with explicitly given terms, which must be strictly
    /// increasing positive integers.
    pub fn from_terms(terms: Vec<u64>) -> Result<Self> {
        if terms.first().is_some_and(|&t| t == 0) || terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid(
                "terms must be strictly increasing positive integers".into(),
            ));
        }
        let source_len = terms.last().copied().unwrap_or(0);
        Ok(Self {
            terms,
            source_seed: 0,
            source_len,
        })
    }

    pub fn terms(&self) -> &[u64] {
        &self.terms
    }

    pub fn len(&self) -> u64 {
        self.terms.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `a_n` for `1 ≤ n ≤ len`.
    #[inline]
    pub fn term(&self, n: u64) -> u64 {
        self.terms[(n - 1) as usize]
    }

    pub fn source_seed(&self) -> u64 {
        self.source_seed
    }

    pub fn source_len(&self) -> u64 {
        self.source_len
    }

    pub fn require(&self, n: u64) -> Result<()> {
        if n > self.len() {
            Err(Error::SequenceTooShort {
                required: n,
                available: self.len(),
            })
        } else {
            Ok(())
        }
    }

    /// Writes `n,a_n`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "n,a_n")?;
        for (i, t) in self.terms.iter().enumerate() {
            writeln!(w, "{},{}", i + 1, t)?;
        }
        Ok(())
    }
}

/// Samples a prefix long enough to contain at least `terms` selected
/// indices. The initial length comes from the growth law
/// `a_n ≈ c · n^{1/(1-a)}` and is doubled until it suffices; because the
/// bits are counter based, the result does not depend on the guesses.
pub fn sample_for_terms(profile: SelectionProfile, seed: u64, terms: u64) -> Result<(SelectionSample, SparseSequence)> {
    if terms == 0 {
        return Err(Error::EmptyLength);
    }
    let expected = profile.growth_constant() * (terms as f64).powf(1.0 / (1.0 - profile.a()));
    // Refuse before allocating when even the typical position of the last
    // term is out of reach.
    if expected > DEFAULT_MAX_LEN as f64 {
        return Err(Error::SampleTooLong {
            requested: expected.min(u64::MAX as f64) as u64,
            max: DEFAULT_MAX_LEN,
        });
    }
    let guess = 1.2 * expected + 1000.0;
    let mut len = (guess.min(DEFAULT_MAX_LEN as f64) as u64).max(terms);
    loop {
        let sample = sample_selection(profile, len, seed)?;
        let seq = build_sparse_sequence(&sample);
        if seq.len() >= terms {
            return Ok((sample, seq));
        }
        if len == DEFAULT_MAX_LEN {
            return Err(Error::SampleTooLong {
                requested: 2 * len,
                max: DEFAULT_MAX_LEN,
            });
        }
        len = (2 * len).min(DEFAULT_MAX_LEN);
    }
}

/// Checks `X_1 + … + X_{a_n} = n` for every term; returns the first
/// offending index.
pub fn check_counting_identity(sample: &SelectionSample, seq: &SparseSequence) -> std::result::Result<(), u64> {
    for (i, &t) in seq.terms().iter().enumerate() {
        let n = i as u64 + 1;
        if t > sample.len() || sample.prefix(t) != n {
            return Err(n);
        }
    }
    if seq.len() != sample.count() {
        return Err(seq.len() + 1);
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthFit {
    /// Least squares slope of `log a_n` against `log n`.
    pub slope: f64,
    /// `a_M / ((1-a) M)^{1/(1-a)}` at the last term `M`.
    pub ratio_tail: f64,
    /// Indices actually used after clipping the window to the sequence.
    pub used: (u64, u64),
}

/// Minimum number of indices a growth window must contain.
pub const MIN_GROWTH_WINDOW: u64 = 100;

/// Fits the growth exponent over `window ∩ [1, len]`.
pub fn growth_fit(seq: &SparseSequence, window: RangeInclusive<u64>, a: f64) -> Result<GrowthFit> {
    let (lo, hi) = (*window.start(), *window.end());
    let top = hi.min(seq.len());
    let lo_eff = lo.max(1);
    if top < lo_eff || top - lo_eff + 1 < MIN_GROWTH_WINDOW {
        return Err(Error::WindowOutOfRange {
            lo,
            hi,
            len: seq.len(),
            min: MIN_GROWTH_WINDOW,
        });
    }
    let (x, y): (Vec<f64>, Vec<f64>) = (lo_eff..=top)
        .map(|n| ((n as f64).ln(), (seq.term(n) as f64).ln()))
        .unzip();
    let slope = linear_fit(&x, &y).slope;
    let m = seq.len();
    let ratio_tail = seq.term(m) as f64 / ((1.0 - a) * m as f64).powf(1.0 / (1.0 - a));
    Ok(GrowthFit {
        slope,
        ratio_tail,
        used: (lo_eff, top),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(a: f64) -> SelectionProfile {
        SelectionProfile::new(a).unwrap()
    }

    #[test]
    fn sample_for_terms_refuses_unreachable_lengths() {
        let p = SelectionProfile::new(0.95).unwrap();
        assert!(matches!(sample_for_terms(p, 1, 300), Err(Error::SampleTooLong { .. })));
        assert!(sample_for_terms(p, 1, 2).is_ok());
    }

    #[test]
    fn sample_for_terms_is_prefix_stable() {
        let (s, q) = sample_for_terms(profile(0.3), 4, 5000).unwrap();
        assert!(q.len() >= 5000);
        let longer = sample_selection(profile(0.3), 2 * s.len(), 4).unwrap();
        let q2 = build_sparse_sequence(&longer);
        assert_eq!(&q2.terms()[..5000], &q.terms()[..5000]);
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(profile(0.3).sigma(1), 1.0);
        assert!((profile(1.0 / 3.0).sigma(8) - 0.5).abs() < 1e-15);
        assert!((profile(0.5).sigma(1_000_000) - 0.001).abs() < 1e-15);
    }

    #[test]
    fn profile_rejects_out_of_range() {
        assert!(SelectionProfile::new(1.0).is_err());
        assert!(SelectionProfile::new(0.0).is_err());
        assert!(SelectionProfile::new(f64::NAN).is_err());
    }

    #[test]
    fn weight_sum_examples() {
        assert_eq!(profile(0.4).weight_sum(1), 1.0);
        // Integral comparison: (N^{1-a} - 1)/(1-a) + σ(N) ≤ W_N ≤ (N^{1-a} - 1)/(1-a) + 1.
        let n = 1_000_000u64;
        let w = profile(0.5).weight_sum(n);
        let integral = ((n as f64).sqrt() - 1.0) / 0.5;
        assert!(w >= integral + 0.001 && w <= integral + 1.0);
        let ratio = w / (n as f64).sqrt();
        assert!((1.9..=2.1).contains(&ratio), "{ratio}");
    }

    #[test]
    fn weight_sums_match_pointwise() {
        let p = profile(0.3);
        let ws = p.weight_sums(50);
        assert!((ws[49] - p.weight_sum(50)).abs() < 1e-12);
        assert!(ws.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn first_bit_always_set() {
        for seed in 0..50 {
            let s = sample_selection(profile(0.9), 10, seed).unwrap();
            assert!(s.bit(1));
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_selection(profile(0.3), 5000, 42).unwrap();
        let b = sample_selection(profile(0.3), 5000, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_selection(profile(0.3), 5000, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn length_guard() {
        assert_eq!(
            sample_selection_capped(profile(0.3), 11, 1, 10),
            Err(Error::SampleTooLong { requested: 11, max: 10 })
        );
        assert_eq!(sample_selection(profile(0.3), 0, 1), Err(Error::EmptyLength));
    }

    #[test]
    fn sparse_sequence_from_bits() {
        let s = SelectionSample::from_bits(profile(0.5), &[true, false, true, true, false]).unwrap();
        assert_eq!(build_sparse_sequence(&s).terms(), &[1, 3, 4]);
        let all = SelectionSample::from_bits(profile(0.5), &[true; 20]).unwrap();
        let seq = build_sparse_sequence(&all);
        assert!(seq.terms().iter().enumerate().all(|(i, &t)| t == i as u64 + 1));
    }

    #[test]
    fn centered_values_in_open_interval() {
        let s = sample_selection(profile(0.3), 2000, 5).unwrap();
        for n in 2..=2000 {
            let y = s.centered(n);
            assert!(y > -1.0 && y < 1.0);
        }
    }

    #[test]
    fn growth_fit_identity_sequence() {
        let all = SelectionSample::from_bits(profile(0.5), &[true; 1000]).unwrap();
        let seq = build_sparse_sequence(&all);
        let fit = growth_fit(&seq, 1..=1000, 0.5).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn growth_fit_rejects_small_window() {
        let all = SelectionSample::from_bits(profile(0.5), &[true; 150]).unwrap();
        let seq = build_sparse_sequence(&all);
        assert!(matches!(
            growth_fit(&seq, 100..=1000, 0.5),
            Err(Error::WindowOutOfRange { .. })
        ));
        assert!(growth_fit(&seq, 1..=1000, 0.5).is_ok());
    }

    #[test]
    fn csv_headers() {
        let s = SelectionSample::from_bits(profile(0.5), &[true, false]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "n,x_n,prefix,sigma_n\n1,1,1,1.0000000000000000\n2,0,1,0.70710678118654757\n"
        );
        let mut buf = Vec::new();
        build_sparse_sequence(&s).write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,a_n\n1,1\n");
    }
}
