use std::fmt;
use std::str::FromStr;

use crate::numeric::KahanSum;
use crate::{Error, Result};

/// Endpoints closer than this are merged.
pub const MERGE_TOL: f64 = 1e-12;

/// A finite union of half-open arcs on the circle `[0, 1)`, stored as sorted
/// disjoint intervals `[lo, hi)` with `0 ≤ lo < hi ≤ 1`. An arc crossing 0
/// is stored as two intervals, one ending at 1 and one starting at 0.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CircleSet {
    arcs: Vec<(f64, f64)>,
}

impl CircleSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        Self { arcs: vec![(0.0, 1.0)] }
    }

    /// Normalises arbitrary `[lo, hi)` pairs inside `[0, 1]`.
    pub fn new(arcs: &[(f64, f64)]) -> Result<Self> {
        for &(lo, hi) in arcs {
            if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
                return Err(Error::Invalid(format!("arc [{lo}, {hi}) is not inside [0, 1]")));
            }
        }
        Ok(Self::normalized(arcs.to_vec()))
    }

    fn normalized(mut arcs: Vec<(f64, f64)>) -> Self {
        arcs.retain(|&(lo, hi)| hi - lo > MERGE_TOL);
        arcs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(arcs.len());
        for (lo, hi) in arcs {
            match out.last_mut() {
                Some(last) if lo <= last.1 + MERGE_TOL => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        if let Some(first) = out.first_mut() {
            if first.0 < MERGE_TOL {
                first.0 = 0.0;
            }
        }
        if let Some(last) = out.last_mut() {
            if last.1 > 1.0 - MERGE_TOL {
                last.1 = 1.0;
            }
        }
        Self { arcs: out }
    }

    pub fn arcs(&self) -> &[(f64, f64)] {
        &self.arcs
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.arcs.iter().map(|&(lo, hi)| hi - lo).collect::<KahanSum>().value()
    }

    pub fn contains(&self, x: f64) -> bool {
        let x = x.rem_euclid(1.0);
        self.arcs.iter().any(|&(lo, hi)| lo <= x && x < hi)
    }

    /// Arcs as seen on the circle: an interval ending at 1 is joined with
    /// one starting at 0. Returned as `(start, length)`.
    pub fn circular_arcs(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self.arcs.iter().map(|&(lo, hi)| (lo, hi - lo)).collect();
        if out.len() >= 2 {
            let first = self.arcs[0];
            let last = self.arcs[self.arcs.len() - 1];
            if first.0 == 0.0 && last.1 == 1.0 {
                let head = out.remove(0);
                let tail = out.last_mut().unwrap();
                tail.1 += head.1;
            }
        }
        out
    }

    /// Translates every arc by `-shift` modulo 1, i.e. returns
    /// `{x : x + shift ∈ A}`.
    pub fn rotate(&self, shift: f64) -> Self {
        let s = shift.rem_euclid(1.0);
        if s == 0.0 {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.arcs.len() + 1);
        for &(lo, hi) in &self.arcs {
            let len = hi - lo;
            let start = (lo - s).rem_euclid(1.0);
            let end = start + len;
            if end <= 1.0 {
                out.push((start, end));
            } else {
                out.push((start, 1.0));
                out.push((0.0, end - 1.0));
            }
        }
        Self::normalized(out)
    }

    pub fn intersect(&self, other: &CircleSet) -> Self {
        let (a, b) = (&self.arcs, &other.arcs);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = a[i].0.max(b[j].0);
            let hi = a[i].1.min(b[j].1);
            if hi > lo {
                out.push((lo, hi));
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::normalized(out)
    }

    /// `[lo, hi)` pairs, the set literal format.
    pub fn to_pairs(&self) -> Vec<(f64, f64)> {
        self.arcs.clone()
    }
}

impl fmt::Display for CircleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.arcs.iter().map(|(lo, hi)| format!("[{lo}, {hi})")).collect();
        if parts.is_empty() {
            f.write_str("∅")
        } else {
            f.write_str(&parts.join(" ∪ "))
        }
    }
}

impl FromStr for CircleSet {
    type Err = Error;

    /// Parses `"[lo, hi)"` pairs separated by whitespace, commas or `∪`.
    fn from_str(s: &str) -> Result<Self> {
        let mut arcs = Vec::new();
        let mut rest = s.trim();
        while let Some(open) = rest.find('[') {
            let close = rest[open..]
                .find(')')
                .ok_or_else(|| Error::Parse(format!("unterminated arc in {s:?}")))?
                + open;
            let body = &rest[open + 1..close];
            let (lo, hi) = body
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("arc {body:?} needs two endpoints")))?;
            let parse = |t: &str| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad endpoint {t:?}")))
            };
            arcs.push((parse(lo)?, parse(hi)?));
            rest = &rest[close + 1..];
        }
        if arcs.is_empty() && !s.trim().is_empty() && s.trim() != "∅" {
            return Err(Error::Parse(format!("no arcs found in {s:?}")));
        }
        CircleSet::new(&arcs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(arcs: &[(f64, f64)]) -> CircleSet {
        CircleSet::new(arcs).unwrap()
    }

    #[test]
    fn rotate_examples() {
        let a = set(&[(0.0, 0.5)]);
        assert_eq!(a.rotate(0.0), a);
        assert_eq!(a.rotate(0.5), set(&[(0.5, 1.0)]));

        let wrap = set(&[(0.9, 1.0), (0.0, 0.1)]);
        let r = wrap.rotate(0.05);
        assert_eq!(r.circular_arcs().len(), 1);
        assert!((r.measure() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn intersect_examples() {
        let a = set(&[(0.1, 0.3), (0.5, 0.9)]);
        assert_eq!(a.intersect(&a), a);
        let left = set(&[(0.0, 0.5)]);
        let right = set(&[(0.5, 1.0)]);
        assert!(left.intersect(&right).is_empty());
        assert_eq!(left.intersect(&right).measure(), 0.0);
    }

    #[test]
    fn normalization_merges_touching_arcs() {
        let s = set(&[(0.2, 0.4), (0.0, 0.1), (0.4, 0.5), (0.05, 0.15)]);
        assert_eq!(s.arcs(), &[(0.0, 0.15), (0.2, 0.5)]);
    }

    #[test]
    fn parse_literal() {
        let s: CircleSet = "[0, 0.3) ∪ [0.5, 0.75)".parse().unwrap();
        assert_eq!(s.arcs(), &[(0.0, 0.3), (0.5, 0.75)]);
        assert!("[0.5, 0.2)".parse::<CircleSet>().is_err());
        assert!("[0.5 0.2)".parse::<CircleSet>().is_err());
        assert!("nonsense".parse::<CircleSet>().is_err());
    }

    fn set_strategy() -> impl Strategy<Value = CircleSet> {
        prop::collection::vec((0.0f64..1.0, 0.0f64..0.4), 0..6).prop_map(|v| {
            let arcs: Vec<(f64, f64)> = v.into_iter().map(|(lo, len)| (lo, (lo + len).min(1.0))).collect();
            CircleSet::new(&arcs).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn rotation_preserves_measure(a in set_strategy(), s in -3.0f64..3.0) {
            prop_assert!((a.rotate(s).measure() - a.measure()).abs() < 1e-12);
        }

        #[test]
        fn rotation_moves_points(a in set_strategy(), s in 0.0f64..1.0, x in 0.0f64..1.0) {
            // x ∈ rotate(A, s) iff x + s ∈ A, away from endpoints
            let y = (x + s).rem_euclid(1.0);
            let near = a.arcs().iter().any(|&(lo, hi)| (y - lo).abs() < 1e-9 || (y - hi).abs() < 1e-9
                || !(1e-9..=1.0 - 1e-9).contains(&y));
            prop_assume!(!near);
            prop_assert_eq!(a.rotate(s).contains(x), a.contains(y));
        }

        #[test]
        fn intersection_bounded_by_operands(a in set_strategy(), b in set_strategy()) {
            let m = a.intersect(&b).measure();
            prop_assert!(m <= a.measure().min(b.measure()) + 1e-12);
        }
    }

    #[test]
    fn intersection_matches_grid_quadrature() {
        // Fine-grid indicator oracle with 10^6 midpoints.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let grid = 1_000_000usize;
        for _ in 0..5 {
            let mut random_set = || {
                let arcs: Vec<(f64, f64)> = (0..4)
                    .map(|_| {
                        let lo: f64 = rng.gen();
                        let hi = (lo + rng.gen::<f64>() * 0.3).min(1.0);
                        (lo, hi)
                    })
                    .collect();
                CircleSet::new(&arcs).unwrap().rotate(rng.gen())
            };
            let a = random_set();
            let b = random_set();
            let exact = a.intersect(&b).measure();
            let hits = (0..grid)
                .filter(|&j| {
                    let x = (j as f64 + 0.5) / grid as f64;
                    a.contains(x) && b.contains(x)
                })
                .count();
            let approx = hits as f64 / grid as f64;
            assert!((exact - approx).abs() < 1e-5, "{exact} vs {approx}");
        }
    }
}
