//! Lacunary tail series
//!
//! ```text
//! term_k = ‖ (1/W_{N_k}) Σ_{n ≤ N_k} Y_n · f(x + u_n α) · g(x + nβ) ‖²,   N_k = [γ^k],
//! ```
//!
//! with `u_n = P_n = X_1 + … + X_n` or `u_n = n`. For trigonometric
//! polynomials `f`, `g` the inner average is itself a polynomial in `x` whose
//! coefficient at `j + l` is `f_j g_l (1/W_N) Σ Y_n e(j u_n α + l n β)`, so
//! each norm is exact.

use num_complex::Complex64;

use crate::numeric::{e, ComplexKahanSum, KahanSum};
use crate::seqgen::{SelectionProfile, SelectionSample};
use crate::systems::{l2_norm_sq, TorusRotationPair, TrigPolynomial};
use crate::{Error, Result};

/// Largest `deg f + deg g` accepted.
pub const MAX_COMBINED_DEGREE: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq)]
pub struct TailReport {
    pub gamma: f64,
    /// `N_k = [γ^k]` for `k = 1..=K` (repeats kept when `γ` is close to 1).
    pub checkpoints: Vec<u64>,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
}

impl TailReport {
    pub fn final_term(&self) -> f64 {
        self.terms.last().copied().unwrap_or(0.0)
    }

    /// `S_K − S_{K−k}` for the partial sums `S`.
    pub fn last_increase(&self, k: usize) -> f64 {
        let s = &self.partial_sums;
        match s.len() {
            0 => 0.0,
            len if len > k => s[len - 1] - s[len - 1 - k],
            len => s[len - 1],
        }
    }
}

/// Tail series for arbitrary coefficients `y[n-1] = Y_n` and `T`-exponents
/// `u(n)`, normalised by the weights of `profile`.
#[allow(clippy::too_many_arguments)]
pub fn tail_series(
    sys: &TorusRotationPair,
    f: &TrigPolynomial,
    g: &TrigPolynomial,
    y: &[f64],
    u: impl Fn(u64) -> u64,
    profile: SelectionProfile,
    gamma: f64,
    k_max: u32,
) -> Result<TailReport> {
    if !(gamma > 1.0) {
        return Err(Error::Invalid(format!("gamma must exceed 1, got {gamma}")));
    }
    if k_max == 0 {
        return Err(Error::EmptyLength);
    }
    let degree = f.degree() + g.degree();
    if degree > MAX_COMBINED_DEGREE {
        return Err(Error::DegreeTooLarge {
            degree,
            capacity: MAX_COMBINED_DEGREE,
        });
    }
    let checkpoints: Vec<u64> = (1..=k_max as i32).map(|k| gamma.powi(k).floor() as u64).collect();
    let n_max = *checkpoints.last().unwrap();
    if (y.len() as u64) < n_max {
        return Err(Error::SampleTooShort {
            required: n_max,
            available: y.len() as u64,
        });
    }
    let pairs: Vec<(i64, i64, Complex64)> = f
        .iter()
        .flat_map(|(j, a)| g.iter().map(move |(l, b)| (j, l, a * b)))
        .collect();
    let mut sums = vec![ComplexKahanSum::new(); pairs.len()];
    let mut w = KahanSum::new();
    let mut terms = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    for n in 1..=n_max {
        w.add(profile.sigma(n));
        let yn = y[(n - 1) as usize];
        if yn != 0.0 {
            let un = u(n) as i64;
            for (s, &(j, l, _)) in sums.iter_mut().zip(&pairs) {
                let phase = sys.alpha.phase(j * un) + sys.beta.phase(l * n as i64);
                s.add(e(phase) * yn);
            }
        }
        while next < checkpoints.len() && checkpoints[next] == n {
            let wn = w.value();
            let inner = TrigPolynomial::from_coeffs(
                pairs
                    .iter()
                    .zip(&sums)
                    .map(|(&(j, l, c), s)| (j + l, c * s.value() / wn)),
            );
            terms.push(l2_norm_sq(&inner));
            next += 1;
        }
    }
    let mut acc = KahanSum::new();
    let partial_sums = terms
        .iter()
        .map(|&t| {
            acc.add(t);
            acc.value()
        })
        .collect();
    Ok(TailReport {
        gamma,
        checkpoints,
        terms,
        partial_sums,
    })
}

/// Tail series with `T`-exponent `P_n = X_1 + … + X_n`.
pub fn prop_main_tail(
    sys: &TorusRotationPair,
    f: &TrigPolynomial,
    g: &TrigPolynomial,
    sample: &SelectionSample,
    gamma: f64,
    k_max: u32,
) -> Result<TailReport> {
    let y = sample.centered_values(sample.len());
    tail_series(sys, f, g, &y, |n| sample.prefix(n), sample.profile(), gamma, k_max)
}

/// Tail series with deterministic `T`-exponent `n`.
pub fn prop_main_ap_tail(
    sys: &TorusRotationPair,
    f: &TrigPolynomial,
    g: &TrigPolynomial,
    sample: &SelectionSample,
    gamma: f64,
    k_max: u32,
) -> Result<TailReport> {
    let y = sample.centered_values(sample.len());
    tail_series(sys, f, g, &y, |n| n, sample.profile(), gamma, k_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqgen::sample_selection;
    use crate::systems::{Angle, IrrationalTag};

    fn pair() -> TorusRotationPair {
        TorusRotationPair::new(
            Angle::irrational(IrrationalTag::Sqrt2Minus1),
            Angle::irrational(IrrationalTag::GoldenMinus1),
        )
    }

    fn ex() -> TrigPolynomial {
        TrigPolynomial::monomial(1, Complex64::new(1.0, 0.0))
    }

    #[test]
    fn constants_reduce_to_centred_sum() {
        let p = SelectionProfile::new(0.3).unwrap();
        let s = sample_selection(p, 1 << 12, 4).unwrap();
        let one = TrigPolynomial::constant(Complex64::new(1.0, 0.0));
        let r = prop_main_tail(&pair(), &one, &one, &s, 2.0, 12).unwrap();
        for (&n, &t) in r.checkpoints.iter().zip(&r.terms) {
            let direct: f64 = (1..=n).map(|k| s.centered(k)).sum::<f64>() / p.weight_sum(n);
            assert!((t - direct * direct).abs() < 1e-12);
        }
        let ap = prop_main_ap_tail(&pair(), &one, &one, &s, 2.0, 12).unwrap();
        assert_eq!(ap.terms, r.terms);
    }

    #[test]
    fn zero_coefficients_give_zero_terms() {
        let p = SelectionProfile::new(0.05).unwrap();
        let y = vec![0.0; 1 << 10];
        let r = tail_series(&pair(), &ex(), &ex(), &y, |n| n, p, 2.0, 10).unwrap();
        assert!(r.terms.iter().all(|&t| t == 0.0));
        assert_eq!(r.last_increase(5), 0.0);
    }

    #[test]
    fn matches_pointwise_average_on_grid() {
        let p = SelectionProfile::new(0.05).unwrap();
        let s = sample_selection(p, 300, 8).unwrap();
        let sys = pair();
        let f = TrigPolynomial::from_triples(&[(0, 1.0, 0.0), (1, 0.5, 0.0)]);
        let g = TrigPolynomial::from_triples(&[(-2, 0.0, 1.0), (1, 0.3, 0.0)]);
        let r = prop_main_tail(&sys, &f, &g, &s, 1.7, 10).unwrap();
        let n = r.checkpoints[9];
        let w = p.weight_sum(n);
        let grid = 64;
        let mean: f64 = (0..grid)
            .map(|i| {
                let x = i as f64 / grid as f64;
                let v: Complex64 = (1..=n)
                    .map(|k| {
                        f.eval(sys.apply_t(x, s.prefix(k) as i64)) * g.eval(sys.apply_s(x, k as i64)) * s.centered(k)
                    })
                    .sum();
                (v / w).norm_sqr()
            })
            .sum::<f64>()
            / grid as f64;
        assert!((mean - r.terms[9]).abs() < 1e-10, "{mean} vs {}", r.terms[9]);
    }

    #[test]
    fn tails_decay_single_seed() {
        let sys = pair();
        let s = sample_selection(SelectionProfile::new(0.05).unwrap(), 1 << 20, 1).unwrap();
        let r = prop_main_tail(&sys, &ex(), &ex(), &s, 2.0, 20).unwrap();
        assert!(r.final_term() < 1e-3 && r.last_increase(5) < 1e-2, "{r:?}");
    }

    #[test]
    fn errors() {
        let p = SelectionProfile::new(0.3).unwrap();
        let y = vec![0.0; 10];
        assert!(tail_series(&pair(), &ex(), &ex(), &y, |n| n, p, 1.0, 3).is_err());
        assert!(matches!(
            tail_series(&pair(), &ex(), &ex(), &y, |n| n, p, 2.0, 5),
            Err(Error::SampleTooShort { .. })
        ));
        let big = TrigPolynomial::monomial(MAX_COMBINED_DEGREE as i64, Complex64::new(1.0, 0.0));
        assert!(matches!(
            tail_series(&pair(), &big, &ex(), &y, |n| n, p, 2.0, 3),
            Err(Error::DegreeTooLarge { .. })
        ));
    }
}
