use num_complex::Complex64;

use crate::numeric::{ComplexKahanSum, KahanSum};
use crate::{Error, Result};

/// Both sides of
///
/// ```text
/// ‖Σ_{n ≤ N} v_n‖² ≤ (2N/M) Σ ‖v_n‖² + (4N/M) Σ_{m=1}^{M} |Σ_{n=1}^{N-m} ⟨v_{n+m}, v_n⟩|
/// ```
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VdcReport {
    pub n: usize,
    pub m: usize,
    pub lhs: f64,
    pub rhs: f64,
}

impl VdcReport {
    /// `lhs ≤ rhs · (1 + rel)`.
    pub fn holds(&self, rel: f64) -> bool {
        self.lhs <= self.rhs * (1.0 + rel)
    }
}

fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    let mut s = ComplexKahanSum::new();
    for (a, b) in u.iter().zip(v) {
        s.add(a * b.conj());
    }
    s.value()
}

fn check_dimensions(v: &[Vec<Complex64>]) -> Result<()> {
    let dim = v.first().map_or(0, Vec::len);
    match v.iter().find(|x| x.len() != dim) {
        Some(bad) => Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        }),
        None => Ok(()),
    }
}

fn lhs_and_energy(v: &[Vec<Complex64>]) -> (f64, f64) {
    let dim = v[0].len();
    let mut total = vec![ComplexKahanSum::new(); dim];
    for x in v {
        for (t, &c) in total.iter_mut().zip(x) {
            t.add(c);
        }
    }
    let lhs = total.iter().map(|t| t.value().norm_sqr()).collect::<KahanSum>().value();
    let energy = v.iter().map(|x| inner(x, x).re).collect::<KahanSum>().value();
    (lhs, energy)
}

fn lag_correlation(v: &[Vec<Complex64>], lag: usize) -> f64 {
    let mut s = ComplexKahanSum::new();
    for i in 0..v.len() - lag {
        s.add(inner(&v[i + lag], &v[i]));
    }
    s.value().norm()
}

/// Evaluates the inequality for vectors `v[0] = v_1, …` in `ℂ^d`.
pub fn vdc_check(v: &[Vec<Complex64>], m: usize) -> Result<VdcReport> {
    let n = v.len();
    if m == 0 || m > n {
        return Err(Error::LagOutOfRange { m, n });
    }
    check_dimensions(v)?;
    let (lhs, energy) = lhs_and_energy(v);
    let corr: KahanSum = (1..=m).map(|lag| lag_correlation(v, lag)).collect();
    let scale = n as f64 / m as f64;
    Ok(VdcReport {
        n,
        m,
        lhs,
        rhs: 2.0 * scale * energy + 4.0 * scale * corr.value(),
    })
}

/// [`vdc_check`] for every `M = 1..=N`, sharing the lag correlations.
pub fn vdc_check_all(v: &[Vec<Complex64>]) -> Result<Vec<VdcReport>> {
    let n = v.len();
    if n == 0 {
        return Err(Error::LagOutOfRange { m: 1, n });
    }
    check_dimensions(v)?;
    let (lhs, energy) = lhs_and_energy(v);
    let mut corr = KahanSum::new();
    Ok((1..=n)
        .map(|m| {
            corr.add(lag_correlation(v, m));
            let scale = n as f64 / m as f64;
            VdcReport {
                n,
                m,
                lhs,
                rhs: 2.0 * scale * energy + 4.0 * scale * corr.value(),
            }
        })
        .collect())
}
