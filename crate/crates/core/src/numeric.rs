//! Small numerical helpers shared by the averaging and estimation kernels.

use num_complex::Complex64;

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of complex values, componentwise.
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexKahanSum {
    re: KahanSum,
    im: KahanSum,
}

impl ComplexKahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// `e(t) = exp(2 pi i t)`.
#[inline]
pub fn e(t: f64) -> Complex64 {
    let (s, c) = (std::f64::consts::TAU * t).sin_cos();
    Complex64::new(c, s)
}

/// Formats a float with 17 significant digits, fixed notation for moderate
/// exponents and scientific notation otherwise (the `%.17g` convention
/// without trailing-zero trimming).
pub fn fmt_sig17(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci.rsplit_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    if (-5..17).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, x)
    } else {
        sci
    }
}

/// Median of a slice (mean of the two middle values for even length).
///
/// Returns `NaN` for an empty slice.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; `NaN` with fewer than three points.
    pub slope_stderr: f64,
}

/// Ordinary least squares fit of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len(), "linear_fit: length mismatch");
    let n = x.len() as f64;
    let mx = x.iter().copied().collect::<KahanSum>().value() / n;
    let my = y.iter().copied().collect::<KahanSum>().value() / n;
    let mut sxx = KahanSum::new();
    let mut sxy = KahanSum::new();
    for (&xi, &yi) in x.iter().zip(y) {
        sxx.add((xi - mx) * (xi - mx));
        sxy.add((xi - mx) * (yi - my));
    }
    let slope = sxy.value() / sxx.value();
    let intercept = my - slope * mx;
    let slope_stderr = if x.len() > 2 {
        let rss: KahanSum = x
            .iter()
            .zip(y)
            .map(|(&xi, &yi)| {
                let r = yi - intercept - slope * xi;
                r * r
            })
            .collect();
        (rss.value() / (n - 2.0) / sxx.value()).sqrt()
    } else {
        f64::NAN
    };
    LinearFit {
        slope,
        intercept,
        slope_stderr,
    }
}

/// Geometric checkpoint grid `round(ratio^k)`, deduplicated, capped at
/// `n_max` and always ending with `n_max`.
pub fn geometric_checkpoints(ratio: f64, n_max: u64) -> Vec<u64> {
    assert!(ratio > 1.0, "checkpoint ratio must exceed 1");
    let mut out: Vec<u64> = Vec::new();
    let mut k = 0i32;
    loop {
        let v = ratio.powi(k).round() as u64;
        if v >= n_max {
            break;
        }
        if v >= 1 && out.last().is_none_or(|&l| v > l) {
            out.push(v);
        }
        k += 1;
    }
    out.push(n_max);
    out
}

/// The lacunary grid `[gamma^k]` for `k = 1..=k_max`, deduplicated.
pub fn lacunary_grid(gamma: f64, k_max: u32) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    for k in 1..=k_max {
        let v = gamma.powi(k as i32).floor() as u64;
        if v >= 1 && out.last().is_none_or(|&l| v > l) {
            out.push(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_beats_naive_on_cancellation() {
        let mut s = KahanSum::new();
        s.add(1.0);
        for _ in 0..1000 {
            s.add(1e-16);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-13).abs() < 1e-20);
    }

    #[test]
    fn sig17_formats() {
        assert_eq!(fmt_sig17(0.5), "0.50000000000000000");
        assert_eq!(fmt_sig17(1.0), "1.0000000000000000");
        assert_eq!(fmt_sig17(0.001), "0.0010000000000000000");
        assert_eq!(fmt_sig17(1e-7), "9.9999999999999995e-8");
        assert_eq!(fmt_sig17(0.1), "0.10000000000000001");
        assert_eq!(fmt_sig17(0.0), "0");
        let x = std::f64::consts::PI;
        assert_eq!(fmt_sig17(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn linear_fit_recovers_line() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 2.0).collect();
        let fit = linear_fit(&x, &y);
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.intercept + 2.0).abs() < 1e-12);
        assert!(fit.slope_stderr < 1e-9);
    }

    #[test]
    fn checkpoints_are_strictly_increasing_and_capped() {
        let cps = geometric_checkpoints(1.25, 100_000);
        assert_eq!(cps[0], 1);
        assert_eq!(*cps.last().unwrap(), 100_000);
        assert!(cps.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(geometric_checkpoints(1.25, 1), vec![1]);
    }

    #[test]
    fn lacunary_grid_powers_of_two() {
        assert_eq!(lacunary_grid(2.0, 5), vec![2, 4, 8, 16, 32]);
    }
}
