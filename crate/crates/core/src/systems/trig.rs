use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::Angle;
use crate::numeric::{e, KahanSum};
use crate::{Error, Result};

/// Tolerance for the conjugate-symmetry check of real polynomials.
const REAL_TOL: f64 = 1e-12;

/// A trigonometric polynomial `x ↦ Σ c_k e(kx)` on the circle.
///
/// Zero coefficients are never stored, so the zero polynomial has an empty
/// support.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TrigPolynomial {
    coeffs: BTreeMap<i64, Complex64>,
    real: bool,
}

impl TrigPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_coeffs([(0, c)])
    }

    pub fn monomial(k: i64, c: Complex64) -> Self {
        Self::from_coeffs([(k, c)])
    }

    /// Builds a (complex valued) polynomial; repeated frequencies add up.
    pub fn from_coeffs<I: IntoIterator<Item = (i64, Complex64)>>(coeffs: I) -> Self {
        let mut map = BTreeMap::new();
        for (k, c) in coeffs {
            *map.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        map.retain(|_, c: &mut Complex64| *c != Complex64::new(0.0, 0.0));
        Self {
            coeffs: map,
            real: false,
        }
    }

    /// Builds a polynomial flagged as real valued; fails unless
    /// `c_{-k} = conj(c_k)` for every `k`.
    pub fn real<I: IntoIterator<Item = (i64, Complex64)>>(coeffs: I) -> Result<Self> {
        let mut p = Self::from_coeffs(coeffs);
        for (&k, &c) in &p.coeffs {
            let mirror = p.coeff(-k);
            if (mirror - c.conj()).norm() > REAL_TOL {
                return Err(Error::Invalid(format!(
                    "coefficient at {k} is not the conjugate of the one at {}",
                    -k
                )));
            }
        }
        p.real = true;
        Ok(p)
    }

    /// From `[k, re, im]` triples, the observable literal format.
    pub fn from_triples(triples: &[(i64, f64, f64)]) -> Self {
        Self::from_coeffs(triples.iter().map(|&(k, re, im)| (k, Complex64::new(re, im))))
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        self.coeffs.get(&k).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    /// `max |k|` over the support (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// `Σ |c_k|`, an upper bound for the sup norm.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).collect::<KahanSum>().value()
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.coeffs.iter().map(|(&k, &c)| c * e(k as f64 * x)).sum()
    }

    /// Values at the `n` grid points `j/n`.
    pub fn eval_grid(&self, n: usize) -> Vec<Complex64> {
        (0..n).map(|j| self.eval(j as f64 / n as f64)).collect()
    }

    /// The polynomial `x ↦ p(x + m·α)`, with phases computed exactly for
    /// rational angles.
    pub fn rotate(&self, angle: &Angle, m: i64) -> Self {
        let mut out = Self::from_coeffs(self.iter().map(|(k, c)| {
            let ph = angle.phase(k.saturating_mul(m));
            let rot = if ph == 0.0 { Complex64::new(1.0, 0.0) } else { e(ph) };
            (k, c * rot)
        }));
        out.real = self.real;
        out
    }

    /// The polynomial `x ↦ p(x + θ)`.
    pub fn shift(&self, theta: f64) -> Self {
        let mut out = Self::from_coeffs(self.iter().map(|(k, c)| (k, c * e(k as f64 * theta))));
        out.real = self.real;
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_coeffs(self.iter().map(|(k, c)| (k, c * s)))
    }

    /// Coefficients rendered as `[k, re, im]` triples.
    pub fn to_triples(&self) -> Vec<(i64, f64, f64)> {
        self.iter().map(|(k, c)| (k, c.re, c.im)).collect()
    }
}

impl Add for &TrigPolynomial {
    type Output = TrigPolynomial;
    fn add(self, rhs: &TrigPolynomial) -> TrigPolynomial {
        let mut out = TrigPolynomial::from_coeffs(self.iter().chain(rhs.iter()));
        out.real = self.real && rhs.real;
        out
    }
}

impl Sub for &TrigPolynomial {
    type Output = TrigPolynomial;
    fn sub(self, rhs: &TrigPolynomial) -> TrigPolynomial {
        let mut out = TrigPolynomial::from_coeffs(self.iter().chain(rhs.iter().map(|(k, c)| (k, -c))));
        out.real = self.real && rhs.real;
        out
    }
}

impl Mul for &TrigPolynomial {
    type Output = TrigPolynomial;
    // Frequencies add under multiplication.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: &TrigPolynomial) -> TrigPolynomial {
        let mut out = TrigPolynomial::from_coeffs(
            self.iter()
                .flat_map(|(j, a)| rhs.iter().map(move |(k, b)| (j + k, a * b))),
        );
        out.real = self.real && rhs.real;
        out
    }
}

/// Projection onto the rotation-invariant functions: keeps exactly the
/// frequencies `k` with `k·α ∈ ℤ`.
pub fn cond_exp_invariant(f: &TrigPolynomial, angle: &Angle) -> TrigPolynomial {
    let mut out = TrigPolynomial::from_coeffs(f.iter().filter(|&(k, _)| angle.resonant(k)));
    out.real = f.real;
    out
}

/// Number of uniform grid points that makes `|p|²` integrate exactly for a
/// polynomial of the given degree.
pub fn nyquist_grid_size(degree: usize) -> usize {
    2 * degree + 1
}

/// `∫ |p|²` computed as a mean over a Nyquist grid of size `> 2·deg p`.
pub fn l2_norm_sq(p: &TrigPolynomial) -> f64 {
    let n = nyquist_grid_size(p.degree());
    p.eval_grid(n)
        .into_iter()
        .map(|z| z.norm_sqr())
        .collect::<KahanSum>()
        .value()
        / n as f64
}

/// `‖p − q‖_{L²}` on the circle, via [`l2_norm_sq`].
pub fn l2_distance(p: &TrigPolynomial, q: &TrigPolynomial) -> f64 {
    l2_norm_sq(&(p - q)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::IrrationalTag;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cond_exp_examples() {
        let ex = TrigPolynomial::monomial(1, c(1.0, 0.0));
        let irr = Angle::irrational(IrrationalTag::Sqrt2Minus1);
        assert!(cond_exp_invariant(&ex, &irr).is_zero());

        let e2x = TrigPolynomial::monomial(2, c(1.0, 0.0));
        let half = Angle::rational(1, 2).unwrap();
        assert_eq!(cond_exp_invariant(&e2x, &half), e2x);

        let k = TrigPolynomial::constant(c(0.7, -0.2));
        assert_eq!(cond_exp_invariant(&k, &irr), k);
        assert_eq!(cond_exp_invariant(&k, &half), k);
    }

    #[test]
    fn real_flag_requires_symmetry() {
        assert!(TrigPolynomial::real([(1, c(0.5, 0.5)), (-1, c(0.5, -0.5))]).is_ok());
        assert!(TrigPolynomial::real([(1, c(0.5, 0.0))]).is_err());
        let p = TrigPolynomial::real([(0, c(1.0, 0.0)), (2, c(0.0, 1.0)), (-2, c(0.0, -1.0))]).unwrap();
        for j in 0..20 {
            assert!(p.eval(j as f64 / 20.0).im.abs() < 1e-12);
        }
    }

    #[test]
    fn degree_and_l1() {
        let p = TrigPolynomial::from_triples(&[(-3, 1.0, 0.0), (2, 0.0, 2.0)]);
        assert_eq!(p.degree(), 3);
        assert!((p.l1_norm() - 3.0).abs() < 1e-15);
        assert_eq!(TrigPolynomial::zero().degree(), 0);
    }

    #[test]
    fn product_matches_pointwise() {
        let p = TrigPolynomial::from_triples(&[(0, 1.0, 0.0), (1, 0.5, 0.0)]);
        let q = TrigPolynomial::from_triples(&[(-1, 0.3, 0.1), (2, 0.0, -0.4)]);
        let pq = &p * &q;
        for j in 0..13 {
            let x = j as f64 / 13.0 + 0.01;
            assert!((pq.eval(x) - p.eval(x) * q.eval(x)).norm() < 1e-14);
        }
    }

    #[test]
    fn l2_grid_matches_parseval() {
        let p = TrigPolynomial::from_triples(&[(-4, 1.0, 2.0), (0, 0.5, 0.0), (3, 0.0, -1.5)]);
        let parseval: f64 = p.iter().map(|(_, c)| c.norm_sqr()).sum();
        assert!((l2_norm_sq(&p) - parseval).abs() < 1e-12);
    }

    fn poly_strategy() -> impl Strategy<Value = TrigPolynomial> {
        prop::collection::vec((-6i64..=6, -2.0f64..2.0, -2.0f64..2.0), 0..8)
            .prop_map(|t| TrigPolynomial::from_triples(&t))
    }

    fn angle_strategy() -> impl Strategy<Value = Angle> {
        prop_oneof![
            (0i64..12, 1i64..12).prop_map(|(p, q)| Angle::rational(p, q).unwrap()),
            (0usize..5).prop_map(|i| Angle::irrational(IrrationalTag::ALL[i])),
        ]
    }

    proptest! {
        #[test]
        fn projection_is_idempotent(f in poly_strategy(), a in angle_strategy()) {
            let once = cond_exp_invariant(&f, &a);
            prop_assert_eq!(cond_exp_invariant(&once, &a), once);
        }

        #[test]
        fn projection_is_invariant(f in poly_strategy(), a in angle_strategy()) {
            let g = cond_exp_invariant(&f, &a);
            prop_assert!((&g.rotate(&a, 1) - &g).is_zero());
        }

        #[test]
        fn projection_contracts_l1(f in poly_strategy(), a in angle_strategy()) {
            prop_assert!(cond_exp_invariant(&f, &a).l1_norm() <= f.l1_norm() + 1e-15);
        }

        #[test]
        fn l2_grid_equals_parseval(f in poly_strategy()) {
            let parseval: f64 = f.iter().map(|(_, c)| c.norm_sqr()).sum();
            prop_assert!((l2_norm_sq(&f) - parseval).abs() < 1e-10 * (1.0 + parseval));
        }
    }
}
