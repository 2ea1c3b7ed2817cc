//! Concrete measure preserving systems.
//!
//! * [`TorusRotationPair`]: two circle rotations `x ↦ x + α`, `x ↦ x + β`
//!   acting on trigonometric polynomials and finite unions of arcs.
//! * [`FiniteCyclicPair`]: two rotations of `ℤ/mℤ`, used as an exact
//!   brute-force oracle.
//! * [`CylinderConstraint`]: the cylinder algebra of `{0,1}^ℤ` with the
//!   `(1/2, 1/2)` Bernoulli measure.

mod angle;
mod circle;
mod cylinder;
mod finite;
mod trig;

pub use angle::{Angle, IrrationalTag};
pub use circle::{CircleSet, MERGE_TOL};
pub use cylinder::{conjugated_coordinate, shift_event, CylinderConstraint};
pub use finite::{finite_orbit_average, FiniteCyclicPair};
pub use trig::{cond_exp_invariant, l2_distance, l2_norm_sq, nyquist_grid_size, TrigPolynomial};

/// `T x = x + α`, `S x = x + β` on the circle with Lebesgue measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TorusRotationPair {
    pub alpha: Angle,
    pub beta: Angle,
}

impl TorusRotationPair {
    pub fn new(alpha: Angle, beta: Angle) -> Self {
        Self { alpha, beta }
    }

    /// `T^n x`.
    pub fn apply_t(&self, x: f64, n: i64) -> f64 {
        (x + self.alpha.phase(n)).rem_euclid(1.0)
    }

    /// `S^n x`.
    pub fn apply_s(&self, x: f64, n: i64) -> f64 {
        (x + self.beta.phase(n)).rem_euclid(1.0)
    }

    /// `T^{-n} A`.
    pub fn preimage_t(&self, set: &CircleSet, n: i64) -> CircleSet {
        set.rotate(self.alpha.phase(n))
    }

    /// `S^{-n} A`.
    pub fn preimage_s(&self, set: &CircleSet, n: i64) -> CircleSet {
        set.rotate(self.beta.phase(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotations_commute() {
        let sys = TorusRotationPair::new(
            Angle::irrational(IrrationalTag::Sqrt2Minus1),
            Angle::irrational(IrrationalTag::GoldenMinus1),
        );
        for (x, m, n) in [(0.1, 3, 5), (0.77, 1000, 17), (0.0, 12345, 999)] {
            let ts = sys.apply_t(sys.apply_s(x, n), m);
            let st = sys.apply_s(sys.apply_t(x, m), n);
            assert!((ts - st).abs() < 1e-12 || (ts - st).abs() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn preimage_preserves_measure() {
        let sys = TorusRotationPair::new(
            Angle::rational(1, 3).unwrap(),
            Angle::irrational(IrrationalTag::EMinus2),
        );
        let a = CircleSet::new(&[(0.0, 0.3), (0.6, 0.65)]).unwrap();
        for n in [1, 7, 100_000] {
            assert!((sys.preimage_t(&a, n).measure() - a.measure()).abs() < 1e-12);
            assert!((sys.preimage_s(&a, n).measure() - a.measure()).abs() < 1e-12);
        }
    }
}
