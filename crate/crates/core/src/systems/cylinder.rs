use std::collections::BTreeMap;

use num_rational::Ratio;

use crate::counterexample::PartialPermutation;
use crate::{Error, Result};

/// A cylinder set of `{0,1}^ℤ`: finitely many coordinates pinned to bits.
///
/// Inserting a conflicting value for an already pinned coordinate marks the
/// constraint inconsistent; its measure is then 0.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CylinderConstraint {
    assignments: BTreeMap<i64, bool>,
    inconsistent: bool,
}

impl CylinderConstraint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pin(coord: i64, bit: bool) -> Self {
        let mut c = Self::new();
        c.insert(coord, bit);
        c
    }

    pub fn insert(&mut self, coord: i64, bit: bool) {
        match self.assignments.get(&coord) {
            Some(&old) if old != bit => self.inconsistent = true,
            Some(_) => {}
            None => {
                self.assignments.insert(coord, bit);
            }
        }
    }

    /// Intersection of two cylinder sets.
    pub fn and(&self, other: &CylinderConstraint) -> Self {
        let mut out = self.clone();
        out.inconsistent |= other.inconsistent;
        for (&k, &b) in &other.assignments {
            out.insert(k, b);
        }
        out
    }

    pub fn is_consistent(&self) -> bool {
        !self.inconsistent
    }

    pub fn coordinates(&self) -> usize {
        self.assignments.len()
    }

    pub fn get(&self, coord: i64) -> Option<bool> {
        self.assignments.get(&coord).copied()
    }

    /// Measure under the `(1/2, 1/2)` Bernoulli product measure:
    /// `0` if inconsistent, else `2^{-k}` for `k` pinned coordinates.
    pub fn measure(&self) -> Result<Ratio<u128>> {
        if self.inconsistent {
            return Ok(Ratio::from_integer(0));
        }
        let k = self.assignments.len() as u32;
        if k >= 128 {
            return Err(Error::Invalid(format!(
                "{k} pinned coordinates overflow a u128 denominator"
            )));
        }
        Ok(Ratio::new_raw(1, 1u128 << k))
    }

    /// Whether a point of `{0,1}^ℤ` (given as a coordinate lookup) lies in
    /// the cylinder.
    pub fn contains(&self, x: impl Fn(i64) -> bool) -> bool {
        !self.inconsistent && self.assignments.iter().all(|(&k, &b)| x(k) == b)
    }
}

/// The event `(T^m x)_0 = bit` for the shift `T`, i.e. `x_m = bit`.
pub fn shift_event(m: i64, bit: bool) -> CylinderConstraint {
    CylinderConstraint::pin(m, bit)
}

/// The event `(S^n x)_0 = bit` for the conjugated shift
/// `S = ψ_π^{-1} T ψ_π`, where `(S^n x)_0 = 1 − x_{π(n)}` for `n ≠ 0`.
pub fn conjugated_coordinate(n: i64, bit: bool, pi: &PartialPermutation) -> Result<CylinderConstraint> {
    if n == 0 {
        return Ok(CylinderConstraint::pin(0, bit));
    }
    let target = pi.forward(n).ok_or(Error::PermutationUndefined(n))?;
    Ok(CylinderConstraint::pin(target, !bit))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_examples() {
        assert_eq!(CylinderConstraint::pin(0, true).measure().unwrap(), Ratio::new(1, 2));
        let mut c = CylinderConstraint::pin(3, true);
        c.insert(5, false);
        assert_eq!(c.measure().unwrap(), Ratio::new(1, 4));
        let mut clash = CylinderConstraint::pin(3, true);
        clash.insert(3, false);
        assert!(!clash.is_consistent());
        assert_eq!(clash.measure().unwrap(), Ratio::from_integer(0));
    }

    #[test]
    fn duplicate_agreeing_pin_is_harmless() {
        let mut c = CylinderConstraint::pin(3, true);
        c.insert(3, true);
        assert_eq!(c.coordinates(), 1);
        assert!(c.is_consistent());
    }

    #[test]
    fn multiplicativity() {
        for k in 0..40i64 {
            let c = (0..k).fold(CylinderConstraint::new(), |acc, i| {
                acc.and(&CylinderConstraint::pin(i * 7 - 50, i % 2 == 0))
            });
            assert_eq!(c.measure().unwrap(), Ratio::new(1, 1u128 << k));
        }
    }

    #[test]
    fn conjugated_events() {
        assert_eq!(shift_event(3, true), CylinderConstraint::pin(3, true));
        let mut pi = PartialPermutation::new();
        pi.insert(5, 7).unwrap();
        assert_eq!(
            conjugated_coordinate(5, true, &pi).unwrap(),
            CylinderConstraint::pin(7, false)
        );
        assert_eq!(conjugated_coordinate(6, true, &pi), Err(Error::PermutationUndefined(6)));

        // π(b) = a: {x_a = 1} ∩ {x_{π(b)} = 0} is empty.
        let mut pi = PartialPermutation::new();
        pi.insert(4, 10).unwrap();
        let event = shift_event(10, true).and(&conjugated_coordinate(4, true, &pi).unwrap());
        assert_eq!(event.measure().unwrap(), Ratio::from_integer(0));
    }
}
