use num_rational::Ratio;

use crate::{Error, Result};

/// Two rotations `T x = x + s`, `S x = x + t` of `ℤ/mℤ` with uniform
/// measure. All orbit computations are exact integer arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiniteCyclicPair {
    modulus: u64,
    s: u64,
    t: u64,
}

impl FiniteCyclicPair {
    pub fn new(modulus: u64, s: u64, t: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::Invalid("modulus must be positive".into()));
        }
        Ok(Self {
            modulus,
            s: s % modulus,
            t: t % modulus,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn s(&self) -> u64 {
        self.s
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// `T^n x`.
    #[inline]
    pub fn apply_t(&self, x: u64, n: u64) -> u64 {
        ((u128::from(x) + u128::from(n) * u128::from(self.s)) % u128::from(self.modulus)) as u64
    }

    /// `S^n x`.
    #[inline]
    pub fn apply_s(&self, x: u64, n: u64) -> u64 {
        ((u128::from(x) + u128::from(n) * u128::from(self.t)) % u128::from(self.modulus)) as u64
    }

    fn check_table(&self, f: &[i64]) -> Result<()> {
        if f.len() as u64 != self.modulus {
            return Err(Error::TableSize {
                modulus: self.modulus,
                found: f.len(),
            });
        }
        Ok(())
    }

    /// Exact average of `f(T^{k} x0)` over the given iterates `k`.
    pub fn orbit_average(&self, f: &[i64], iterates: &[u64], x0: u64) -> Result<Ratio<i128>> {
        self.check_table(f)?;
        if iterates.is_empty() {
            return Err(Error::EmptyLength);
        }
        let x0 = x0 % self.modulus;
        let sum: i128 = iterates
            .iter()
            .map(|&k| i128::from(f[self.apply_t(x0, k) as usize]))
            .sum();
        Ok(Ratio::new(sum, iterates.len() as i128))
    }

    /// Exact average of `f(T^{u} x0) · g(S^{v} x0)` over iterate pairs
    /// `(u, v)`.
    pub fn pair_average<I>(&self, f: &[i64], g: &[i64], pairs: I, x0: u64) -> Result<Ratio<i128>>
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        self.check_table(f)?;
        self.check_table(g)?;
        let x0 = x0 % self.modulus;
        let mut sum = 0i128;
        let mut count = 0i128;
        for (u, v) in pairs {
            sum += i128::from(f[self.apply_t(x0, u) as usize]) * i128::from(g[self.apply_s(x0, v) as usize]);
            count += 1;
        }
        if count == 0 {
            return Err(Error::EmptyLength);
        }
        Ok(Ratio::new(sum, count))
    }
}

/// Free-function form of [`FiniteCyclicPair::orbit_average`].
pub fn finite_orbit_average(sys: &FiniteCyclicPair, f: &[i64], iterates: &[u64], x0: u64) -> Result<Ratio<i128>> {
    sys.orbit_average(f, iterates, x0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_period_average() {
        let sys = FiniteCyclicPair::new(4, 1, 0).unwrap();
        let its: Vec<u64> = (1..=4).collect();
        assert_eq!(
            finite_orbit_average(&sys, &[0, 1, 0, 1], &its, 0).unwrap(),
            Ratio::new(1, 2)
        );
    }

    #[test]
    fn trivial_modulus() {
        let sys = FiniteCyclicPair::new(1, 5, 9).unwrap();
        let its: Vec<u64> = vec![3, 17, 1_000_000_007];
        assert_eq!(sys.orbit_average(&[-7], &its, 12).unwrap(), Ratio::from_integer(-7));
    }

    #[test]
    fn table_size_checked() {
        let sys = FiniteCyclicPair::new(3, 1, 1).unwrap();
        assert_eq!(
            sys.orbit_average(&[1, 2], &[1], 0),
            Err(Error::TableSize { modulus: 3, found: 2 })
        );
    }

    #[test]
    fn pair_average_matches_direct_sum() {
        let sys = FiniteCyclicPair::new(7, 3, 5).unwrap();
        let f = [1, -2, 0, 4, 5, 1, 1];
        let g = [0, 3, 3, -1, 2, 2, 7];
        let pairs: Vec<(u64, u64)> = (1..=20).map(|n| (n, n * n)).collect();
        let mut direct = 0i128;
        for &(u, v) in &pairs {
            direct += i128::from(f[((2 + 3 * u) % 7) as usize] * g[((2 + 5 * v) % 7) as usize]);
        }
        assert_eq!(sys.pair_average(&f, &g, pairs, 2).unwrap(), Ratio::new(direct, 20));
    }
}
