//! Seeded random instances for the inequality checks.
//!
//! Draws come from the library's counter-based uniform stream under a
//! per-purpose domain tag, so instance `i` of a given seed is always the
//! same no matter how many instances are requested.

use ergolab::seqgen::uniform;
use num_complex::Complex64;

/// Domain tag of the van der Corput instance stream.
pub const VDC_STREAM: u64 = 0x5644_435F_494E_5354;
/// Domain tag of the cubic-inequality instance stream.
pub const CHU_STREAM: u64 = 0x4348_555F_494E_5354;

/// Sequential reader over `uniform(key, 1), uniform(key, 2), …`.
pub struct Stream {
    key: u64,
    counter: u64,
}

impl Stream {
    pub fn new(seed: u64, tag: u64, instance: u64) -> Self {
        Self {
            key: ergolab::seqgen::mix64(seed ^ tag).wrapping_add(instance),
            counter: 0,
        }
    }

    pub fn next_f64(&mut self) -> f64 {
        self.counter += 1;
        uniform(self.key, self.counter)
    }

    /// Uniform integer in `lo..=hi`.
    pub fn next_int(&mut self, lo: usize, hi: usize) -> usize {
        lo + ((self.next_f64() * (hi - lo + 1) as f64) as usize).min(hi - lo)
    }

    pub fn next_complex(&mut self) -> Complex64 {
        Complex64::new(2.0 * self.next_f64() - 1.0, 2.0 * self.next_f64() - 1.0)
    }
}

/// `N ∈ [1, max_n]` vectors of dimension `d ∈ [1, 8]` with entries in the
/// unit square.
pub fn vdc_instance(seed: u64, index: u64, max_n: usize) -> Vec<Vec<Complex64>> {
    let mut s = Stream::new(seed, VDC_STREAM, index);
    let n = s.next_int(1, max_n);
    let d = s.next_int(1, 8);
    // Every third instance is strongly correlated, where the bound is tight.
    let correlated = index.is_multiple_of(3);
    let base: Vec<Complex64> = (0..d).map(|_| s.next_complex()).collect();
    (0..n)
        .map(|k| {
            (0..d)
                .map(|j| {
                    let noise = s.next_complex();
                    if correlated {
                        base[j] * Complex64::from_polar(1.0, 0.1 * k as f64) + noise * 0.05
                    } else {
                        noise
                    }
                })
                .collect()
        })
        .collect()
}

/// Random data for the cubic inequality on a space of `m ∈ [1, 32]` points.
pub struct ChuInstance {
    pub f: Vec<f64>,
    pub weights: Vec<f64>,
    pub p1: Vec<usize>,
    pub p2: Vec<usize>,
}

pub fn chu_instance(seed: u64, index: u64) -> ChuInstance {
    let mut s = Stream::new(seed, CHU_STREAM, index);
    let m = s.next_int(1, 32);
    let atoms1 = s.next_int(1, m);
    let atoms2 = s.next_int(1, m);
    let f: Vec<f64> = (0..m)
        .map(|_| if s.next_f64() < 0.2 { 0.0 } else { s.next_f64() })
        .collect();
    let raw: Vec<f64> = (0..m).map(|_| s.next_f64() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / total).collect();
    let p1 = (0..m).map(|_| s.next_int(0, atoms1 - 1)).collect();
    let p2 = (0..m).map(|_| s.next_int(0, atoms2 - 1)).collect();
    ChuInstance { f, weights, p1, p2 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_in_range() {
        let a = vdc_instance(1, 17, 64);
        assert_eq!(a, vdc_instance(1, 17, 64));
        assert!(!a.is_empty() && a.len() <= 64);
        let mut s = Stream::new(3, CHU_STREAM, 0);
        for _ in 0..1000 {
            let v = s.next_int(2, 5);
            assert!((2..=5).contains(&v));
        }
        let c = chu_instance(1, 4);
        assert!((c.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(c.f.iter().all(|&v| v >= 0.0));
    }
}
