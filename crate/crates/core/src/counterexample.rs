//! Non-recurrence and non-convergence for non-commuting Bernoulli shifts.
//!
//! On `X = {0,1}^ℤ` with the `(1/2,1/2)` Bernoulli measure, let `T` be the
//! shift and `S = ψ_π^{-1} T ψ_π`, where `(ψ_π x)_n = 1 − x_{π(n)}` for
//! `n ≠ 0` and `π` is a permutation of `ℤ` fixing 0. With
//! `A = {x : x_0 = 1}` one gets
//!
//! ```text
//! T^{-a}A ∩ S^{-b}A = {x : x_a = 1, x_{π(b)} = 0},
//! ```
//!
//! which has measure 0 when `π(b) = a` and 1/4 otherwise. Choosing `π` on
//! the doubled values `2b(n) ↦ 2a(n)` exactly for `n ∈ F` (and working with
//! `T²`, `S²`) prescribes which intersections vanish.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::{self, Write};

use num_rational::Ratio;

use crate::numeric::fmt_sig17;
use crate::systems::{conjugated_coordinate, shift_event};
use crate::{Error, Result};

/// A finite injective partial map on `ℤ` with `π(0) = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialPermutation {
    forward: HashMap<i64, i64>,
    inverse: HashMap<i64, i64>,
}

impl Default for PartialPermutation {
    fn default() -> Self {
        Self::new()
    }
}

impl PartialPermutation {
    pub fn new() -> Self {
        let mut forward = HashMap::new();
        let mut inverse = HashMap::new();
        forward.insert(0, 0);
        inverse.insert(0, 0);
        Self { forward, inverse }
    }

    /// Sets `π(x) = y`. Fails if it would break injectivity, redefine a
    /// point, or move 0.
    pub fn insert(&mut self, x: i64, y: i64) -> Result<()> {
        if (x == 0) != (y == 0) {
            return Err(Error::Invalid("0 must stay fixed".into()));
        }
        match (self.forward.get(&x), self.inverse.get(&y)) {
            (Some(&fy), _) if fy == y => Ok(()),
            (Some(&fy), _) => Err(Error::Invalid(format!("π({x}) is already {fy}"))),
            (None, Some(&ix)) => Err(Error::Invalid(format!("{y} is already the image of {ix}"))),
            (None, None) => {
                self.forward.insert(x, y);
                self.inverse.insert(y, x);
                Ok(())
            }
        }
    }

    pub fn forward(&self, x: i64) -> Option<i64> {
        self.forward.get(&x).copied()
    }

    pub fn inverse(&self, y: i64) -> Option<i64> {
        self.inverse.get(&y).copied()
    }

    pub fn is_image(&self, y: i64) -> bool {
        self.inverse.contains_key(&y)
    }

    /// Number of mapped points, including 0.
    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// Checks `π^{-1}(π(x)) = x` on the whole domain and vice versa.
    pub fn is_consistent(&self) -> bool {
        self.forward.len() == self.inverse.len()
            && self.forward.iter().all(|(x, y)| self.inverse.get(y) == Some(x))
            && self.forward.get(&0) == Some(&0)
    }

    pub fn domain(&self) -> impl Iterator<Item = i64> + '_ {
        self.forward.keys().copied()
    }
}

/// A subset `F ⊆ ℕ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IndexSet {
    Explicit(BTreeSet<u64>),
    /// `⋃_{k ≥ 1} [4^k, 2·4^k]`.
    PowerOfFourBlocks,
    /// All of `ℕ`.
    Naturals,
}

impl IndexSet {
    pub fn empty() -> Self {
        IndexSet::Explicit(BTreeSet::new())
    }

    pub fn contains(&self, n: u64) -> bool {
        match self {
            IndexSet::Explicit(s) => s.contains(&n),
            IndexSet::Naturals => n >= 1,
            IndexSet::PowerOfFourBlocks => {
                if n < 4 {
                    return false;
                }
                let k = 63 - n.leading_zeros();
                // [2^{2j}, 2^{2j+1}] covers bit lengths 2j (all) and 2j+1 (only 2^{2j+1}).
                k.is_multiple_of(2) || n.is_power_of_two()
            }
        }
    }
}

fn check_injective(name: &'static str, seq: &[i64], horizon: u64) -> Result<()> {
    if (seq.len() as u64) < horizon {
        return Err(Error::SequenceTooShort {
            required: horizon,
            available: seq.len() as u64,
        });
    }
    let mut seen = HashSet::with_capacity(horizon as usize);
    for &v in &seq[..horizon as usize] {
        if v == 0 || v.checked_mul(2).is_none() || !seen.insert(v) {
            return Err(Error::NotInjective { name, horizon });
        }
    }
    Ok(())
}

/// Canonical order of candidate images: `2, -2, 4, -4, …`.
fn candidate(j: u64) -> i64 {
    let v = 2 * (j / 2 + 1) as i64;
    if j.is_multiple_of(2) {
        v
    } else {
        -v
    }
}

/// Builds `π` with `π(2b(n)) = 2a(n)` iff `n ∈ F`, for `1 ≤ n ≤ horizon`.
///
/// `a_seq[0]` is `a(1)`. Forced values are placed first; the remaining
/// `2b(n)` take the first unused candidate in the order `2, -2, 4, -4, …`
/// that differs from `2a(n)`.
pub fn build_permutation(a_seq: &[i64], b_seq: &[i64], f: &IndexSet, horizon: u64) -> Result<PartialPermutation> {
    check_injective("a", a_seq, horizon)?;
    check_injective("b", b_seq, horizon)?;
    let mut pi = PartialPermutation::new();
    for n in 1..=horizon {
        if f.contains(n) {
            let i = (n - 1) as usize;
            pi.insert(2 * b_seq[i], 2 * a_seq[i])
                .map_err(|_| Error::Infeasible(n))?;
        }
    }
    let mut cursor = 0u64;
    for n in 1..=horizon {
        if f.contains(n) {
            continue;
        }
        let i = (n - 1) as usize;
        let (src, avoid) = (2 * b_seq[i], 2 * a_seq[i]);
        while pi.is_image(candidate(cursor)) {
            cursor += 1;
        }
        let mut j = cursor;
        while pi.is_image(candidate(j)) || candidate(j) == avoid {
            j += 1;
        }
        pi.insert(src, candidate(j)).map_err(|_| Error::Infeasible(n))?;
    }
    for n in 1..=horizon {
        let i = (n - 1) as usize;
        let hit = pi.forward(2 * b_seq[i]) == Some(2 * a_seq[i]);
        if hit != f.contains(n) {
            return Err(Error::Infeasible(n));
        }
    }
    Ok(pi)
}

/// `μ(T^{-2a(n)}A ∩ S^{-2b(n)}A)` for `A = {x_0 = 1}`, exactly.
pub fn nonrec_measure(n: u64, a_seq: &[i64], b_seq: &[i64], pi: &PartialPermutation) -> Result<Ratio<u128>> {
    let i = n
        .checked_sub(1)
        .filter(|&i| (i as usize) < a_seq.len() && (i as usize) < b_seq.len())
        .ok_or(Error::SequenceTooShort {
            required: n,
            available: a_seq.len().min(b_seq.len()) as u64,
        })? as usize;
    let event = shift_event(2 * a_seq[i], true).and(&conjugated_coordinate(2 * b_seq[i], true, pi)?);
    event.measure()
}

/// One row of the measure table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasureRow {
    pub n: u64,
    pub in_f: bool,
    pub measure: Ratio<u128>,
}

/// Measures for `n = 1..=horizon` after building `π`.
pub fn measure_table(a_seq: &[i64], b_seq: &[i64], f: &IndexSet, horizon: u64) -> Result<Vec<MeasureRow>> {
    let pi = build_permutation(a_seq, b_seq, f, horizon)?;
    (1..=horizon)
        .map(|n| {
            Ok(MeasureRow {
                n,
                in_f: f.contains(n),
                measure: nonrec_measure(n, a_seq, b_seq, &pi)?,
            })
        })
        .collect()
}

/// Writes `n,in_F,measure_num,measure_den`.
pub fn write_measure_csv<W: Write>(rows: &[MeasureRow], mut w: W) -> io::Result<()> {
    writeln!(w, "n,in_F,measure_num,measure_den")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.n,
            u8::from(r.in_f),
            r.measure.numer(),
            r.measure.denom()
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceReport {
    pub liminf_est: f64,
    pub limsup_est: f64,
    pub gap: f64,
    /// Window `[lo, N_max]` the extremes were taken over.
    pub window: (u64, u64),
    /// Running averages `(1/N) Σ_{n ≤ N} μ_n` for `N = 1..=N_max`.
    pub running: Vec<f64>,
}

impl DivergenceReport {
    /// Writes `N,running_average`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "N,running_average")?;
        for (i, v) in self.running.iter().enumerate() {
            writeln!(w, "{},{}", i + 1, fmt_sig17(*v))?;
        }
        Ok(())
    }
}

/// Smallest horizon accepted by [`divergence_gap`].
pub const MIN_DIVERGENCE_HORIZON: u64 = 1024;

/// Cesàro averages of `μ(T^{-a(n)}A ∩ S^{-b(n)}A)` for `a(n) = b(n) = n`
/// and `F = ⋃[4^k, 2·4^k]`.
pub fn divergence_gap(n_max: u64) -> Result<DivergenceReport> {
    let ids: Vec<i64> = (1..=n_max as i64).collect();
    divergence_gap_with(&ids, &ids, &IndexSet::PowerOfFourBlocks, n_max)
}

/// As [`divergence_gap`] for arbitrary injective sequences and `F`. The
/// extremes are taken over the last two complete cycles `[4^{k-2}, N_max]`
/// where `4^k ≤ N_max`.
pub fn divergence_gap_with(a_seq: &[i64], b_seq: &[i64], f: &IndexSet, n_max: u64) -> Result<DivergenceReport> {
    if n_max < MIN_DIVERGENCE_HORIZON {
        return Err(Error::Invalid(format!(
            "divergence horizon {n_max} is below {MIN_DIVERGENCE_HORIZON}"
        )));
    }
    let rows = measure_table(a_seq, b_seq, f, n_max)?;
    // Every measure is 0 or 1/4, so the running sum is an exact count of quarters.
    let mut quarters = 0u64;
    let mut running = Vec::with_capacity(n_max as usize);
    for r in &rows {
        if *r.measure.numer() != 0 {
            debug_assert_eq!(*r.measure.denom(), 4);
            quarters += 1;
        }
        running.push(quarters as f64 / (4 * r.n) as f64);
    }
    let k = (63 - n_max.leading_zeros()) / 2;
    let lo = 4u64.pow(k.saturating_sub(2)).max(1);
    let tail = &running[(lo - 1) as usize..];
    let liminf_est = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let limsup_est = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(DivergenceReport {
        liminf_est,
        limsup_est,
        gap: limsup_est - liminf_est,
        window: (lo, n_max),
        running,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: i64) -> Vec<i64> {
        (1..=n).collect()
    }

    #[test]
    fn block_membership() {
        let f = IndexSet::PowerOfFourBlocks;
        let members: Vec<u64> = (1..=40).filter(|&n| f.contains(n)).collect();
        let expected: Vec<u64> = (4..=8).chain(16..=32).collect();
        assert_eq!(members, expected);
        assert!(f.contains(64) && f.contains(128) && !f.contains(129) && !f.contains(63));
        assert!(!IndexSet::empty().contains(3));
        assert!(IndexSet::Naturals.contains(3));
    }

    #[test]
    fn identity_when_f_is_everything() {
        let pi = build_permutation(&ids(50), &ids(50), &IndexSet::Naturals, 50).unwrap();
        for n in 1..=50 {
            assert_eq!(pi.forward(2 * n), Some(2 * n));
        }
    }

    #[test]
    fn derangement_when_f_is_empty() {
        let pi = build_permutation(&ids(200), &ids(200), &IndexSet::empty(), 200).unwrap();
        assert!(pi.is_consistent());
        for n in 1..=200 {
            assert_ne!(pi.forward(2 * n), Some(2 * n));
        }
    }

    #[test]
    fn permutation_rejects_bad_sequences() {
        assert!(matches!(
            build_permutation(&[1, 2, 2], &ids(3), &IndexSet::empty(), 3),
            Err(Error::NotInjective { name: "a", .. })
        ));
        assert!(matches!(
            build_permutation(&ids(3), &[0, 1, 2], &IndexSet::empty(), 3),
            Err(Error::NotInjective { name: "b", .. })
        ));
    }

    #[test]
    fn measure_examples() {
        let a = ids(40);
        let b: Vec<i64> = (1..=40).map(|n| -3 * n).collect();
        let f = IndexSet::PowerOfFourBlocks;
        let pi = build_permutation(&a, &b, &f, 40).unwrap();
        assert_eq!(nonrec_measure(5, &a, &b, &pi).unwrap(), Ratio::from_integer(0));
        assert_eq!(nonrec_measure(3, &a, &b, &pi).unwrap(), Ratio::new(1, 4));
        assert_eq!(
            crate::systems::CylinderConstraint::pin(0, true).measure().unwrap(),
            Ratio::new(1, 2)
        );
    }

    #[test]
    fn divergence_horizon_guard() {
        assert!(divergence_gap(100).is_err());
    }

    #[test]
    fn divergence_small_horizon() {
        let r = divergence_gap(4u64.pow(5)).unwrap();
        assert!(r.gap > 0.0);
        assert_eq!(r.running.len(), 1024);
    }
}
