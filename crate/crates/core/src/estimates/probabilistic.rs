//! Strong law, pair-sum and Borel-Cantelli diagnostics for the selection
//! bits.

use crate::averages::AverageSeries;
use crate::constants;
use crate::numeric::KahanSum;
use crate::seqgen::{uniform, SelectionProfile, SelectionSample};
use crate::{Error, Result};

/// Domain tag separating the Borel-Cantelli stream from the selection
/// stream of the same seed.
pub const BC_STREAM: u64 = 0x4243_5F44_454E_5349;

/// Exponents `a` for which the pair-sum bound is asserted.
pub const PAIR_SUM_RANGE: (f64, f64) = (0.0, 1.0 / 6.0);

fn check_checkpoints(checkpoints: &[u64], available: u64) -> Result<()> {
    if checkpoints.is_empty() || checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid(
            "checkpoints must be positive and strictly increasing".into(),
        ));
    }
    let last = *checkpoints.last().unwrap();
    if last > available {
        return Err(Error::SampleTooShort {
            required: last,
            available,
        });
    }
    Ok(())
}

/// `(1/W_N) Σ_{n ≤ N} x_n` for arbitrary real `x` (`x[0] = x_1`).
pub fn slln_ratio_from(x: &[f64], profile: SelectionProfile, checkpoints: &[u64]) -> Result<AverageSeries> {
    check_checkpoints(checkpoints, x.len() as u64)?;
    let mut num = KahanSum::new();
    let mut w = KahanSum::new();
    let mut values = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    for (i, &xn) in x.iter().enumerate() {
        let n = i as u64 + 1;
        if next == checkpoints.len() {
            break;
        }
        num.add(xn);
        w.add(profile.sigma(n));
        if n == checkpoints[next] {
            values.push(num.value() / w.value());
            next += 1;
        }
    }
    AverageSeries::real(checkpoints.to_vec(), values, "P_N / W_N")
}

/// `P_N / W_N` at each checkpoint.
pub fn slln_ratio(sample: &SelectionSample, checkpoints: &[u64]) -> Result<AverageSeries> {
    check_checkpoints(checkpoints, sample.len())?;
    let profile = sample.profile();
    let mut w = KahanSum::new();
    let mut values = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    for n in 1..=*checkpoints.last().unwrap() {
        w.add(profile.sigma(n));
        if n == checkpoints[next] {
            values.push(sample.prefix(n) as f64 / w.value());
            next += 1;
        }
    }
    AverageSeries::real(checkpoints.to_vec(), values, "P_N / W_N")
}

/// `Σ_{m=1}^{M} Σ_{n=1}^{N} X_{n+m} X_n` with `M = ⌊N^b⌋`, in `O(N)` time.
pub fn pair_sum_value(sample: &SelectionSample, n: u64, b: f64) -> Result<u64> {
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::Invalid(format!("b must lie in (0, 1), got {b}")));
    }
    let m = (n as f64).powf(b).floor() as u64;
    if sample.len() < n + m {
        return Err(Error::SampleTooShort {
            required: n + m,
            available: sample.len(),
        });
    }
    // For each selected n, the selected indices in (n, n+M] number P_{n+M} − P_n.
    Ok((1..=n)
        .filter(|&k| sample.bit(k))
        .map(|k| sample.prefix(k + m) - sample.prefix(k))
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairSumReport {
    pub n: u64,
    /// `M = ⌊N^b⌋`.
    pub m: u64,
    pub value: u64,
    /// `C · N^{b+1-2a}` with the frozen constant `C`.
    pub bound: f64,
    /// Whether `a` lies in the range where the bound is asserted.
    pub in_range: bool,
}

impl PairSumReport {
    /// `value ≤ bound`, meaningful only when `in_range`.
    pub fn within_bound(&self) -> bool {
        self.value as f64 <= self.bound
    }
}

/// Pair sum together with its frozen bound. Exponents outside `(0, 1/6)`
/// are computed but flagged through `in_range`.
pub fn pair_sum_bound(sample: &SelectionSample, n: u64, b: f64) -> Result<PairSumReport> {
    let a = sample.profile().a();
    let c = constants::pair_sum_constant(a, b).ok_or_else(|| {
        Error::Invalid(format!(
            "no frozen pair-sum constant for a = {a}, b = {b} (key {})",
            constants::pair_sum_key(a, b)
        ))
    })?;
    let value = pair_sum_value(sample, n, b)?;
    Ok(PairSumReport {
        n,
        m: (n as f64).powf(b).floor() as u64,
        value,
        bound: c * (n as f64).powf(b + 1.0 - 2.0 * a),
        in_range: a > PAIR_SUM_RANGE.0 && a < PAIR_SUM_RANGE.1,
    })
}

/// Uniform variate of the Borel-Cantelli stream.
pub fn bc_uniform(seed: u64, n: u64) -> f64 {
    uniform(seed ^ BC_STREAM, n)
}

/// Running density `(1/N) Σ_{n ≤ N} 1_{E_n}` of independent events with
/// `P(E_n) = p(n)`, sampled at the checkpoints (all `≤ n_max`).
pub fn bc_density(p: impl Fn(u64) -> f64, seed: u64, n_max: u64, checkpoints: &[u64]) -> Result<AverageSeries> {
    check_checkpoints(checkpoints, n_max)?;
    let mut hits = 0u64;
    let mut values = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    for n in 1..=*checkpoints.last().unwrap() {
        let pn = p(n);
        if !(0.0..=1.0).contains(&pn) {
            return Err(Error::InvalidProbability { n, value: pn });
        }
        if bc_uniform(seed, n) < pn {
            hits += 1;
        }
        if n == checkpoints[next] {
            values.push(hits as f64 / n as f64);
            next += 1;
        }
    }
    AverageSeries::real(checkpoints.to_vec(), values, "(1/N) Σ 1_{E_n}")
}

/// Expected running density `(1/N) Σ_{n ≤ N} p(n)` at each checkpoint.
pub fn bc_mean_density(p: impl Fn(u64) -> f64, checkpoints: &[u64]) -> Vec<f64> {
    let mut acc = KahanSum::new();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    let last = checkpoints.last().copied().unwrap_or(0);
    for n in 1..=last {
        acc.add(p(n));
        if n == checkpoints[next] {
            out.push(acc.value() / n as f64);
            next += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqgen::sample_selection;

    #[test]
    fn slln_exact_with_sigma_injection() {
        let p = SelectionProfile::new(0.3).unwrap();
        let x: Vec<f64> = (1..=10_000).map(|n| p.sigma(n)).collect();
        let s = slln_ratio_from(&x, p, &[1, 10, 100, 10_000]).unwrap();
        assert!(s.real_values().iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn slln_matches_prefix_ratio() {
        let p = SelectionProfile::new(0.45).unwrap();
        let s = sample_selection(p, 5000, 2).unwrap();
        let a = slln_ratio(&s, &[10, 5000]).unwrap();
        let b = slln_ratio_from(&s.bit_values(5000), p, &[10, 5000]).unwrap();
        for (u, v) in a.values().iter().zip(b.values()) {
            assert!((u - v).norm() < 1e-12);
        }
        for (&n, v) in a.checkpoints().iter().zip(a.real_values()) {
            assert!(v >= 0.0 && v <= n as f64 / p.weight_sum(n) + 1e-12);
        }
        assert!(slln_ratio(&s, &[10, 6000]).is_err());
    }

    #[test]
    fn pair_sum_matches_double_loop() {
        let s = sample_selection(SelectionProfile::new(0.1).unwrap(), 2000, 6).unwrap();
        let (n, b) = (1500u64, 0.5);
        let m = (n as f64).powf(b).floor() as u64;
        let mut direct = 0u64;
        for lag in 1..=m {
            for k in 1..=n {
                direct += u64::from(s.bit(k) && s.bit(k + lag));
            }
        }
        assert_eq!(pair_sum_value(&s, n, b).unwrap(), direct);
    }

    #[test]
    fn pair_sum_degenerate_and_range_flag() {
        let p = SelectionProfile::new(0.1).unwrap();
        let mut bits = vec![false; 2000];
        bits[0] = true;
        let s = SelectionSample::from_bits(p, &bits).unwrap();
        let r = pair_sum_bound(&s, 1000, 0.5).unwrap();
        assert_eq!(r.value, 0);
        assert!(r.in_range && r.within_bound());
        let q = SelectionSample::from_bits(SelectionProfile::new(0.3).unwrap(), &bits).unwrap();
        assert!(pair_sum_bound(&q, 1000, 0.5).is_err());
        assert_eq!(pair_sum_value(&q, 1000, 0.5).unwrap(), 0);
        assert!(pair_sum_value(&q, 1990, 0.5).is_err());
    }

    #[test]
    fn bc_density_degenerate_cases() {
        let cps = [1, 10, 1000];
        let zero = bc_density(|_| 0.0, 1, 1000, &cps).unwrap();
        assert!(zero.real_values().iter().all(|&v| v == 0.0));
        let one = bc_density(|_| 1.0, 1, 1000, &cps).unwrap();
        assert!(one.real_values().iter().all(|&v| v == 1.0));
        assert!(matches!(
            bc_density(|n| if n == 7 { 1.5 } else { 0.1 }, 1, 1000, &cps),
            Err(Error::InvalidProbability { n: 7, .. })
        ));
    }

    #[test]
    fn bc_stream_is_separate_from_selection() {
        assert_ne!(bc_uniform(1, 1), uniform(1, 1));
    }

    #[test]
    fn bc_density_tracks_mean() {
        let p = |n: u64| ((n + 2) as f64).ln().powf(-1.5);
        let cps = [1000, 100_000];
        let mean = bc_mean_density(p, &cps);
        let d = bc_density(p, 3, 100_000, &cps).unwrap().real_values();
        assert!((d[1] - mean[1]).abs() < 0.01, "{d:?} vs {mean:?}");
        assert!(mean[1] < mean[0]);
    }
}
