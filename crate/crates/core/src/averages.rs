//! Multiple ergodic averages along `n` and along the sparse sequence `a_n`.
//!
//! The three averaging schemes are
//!
//! ```text
//! mixed:  (1/N) Σ f(T^n x)   · g(S^{a_n} x)
//! same:   (1/N) Σ f(T^{a_n} x) · g(S^{a_n} x)
//! full:   (1/N) Σ f(T^n x)   · g(S^n x)
//! ```
//!
//! On circle rotations with trigonometric polynomial observables they are
//! evaluated pointwise or, when an `L²` comparison is needed, as
//! trigonometric polynomials in `x`. On finite cyclic pairs they are exact
//! rationals and serve as brute-force oracles.

use std::io::{self, Write};

use num_complex::Complex64;
use num_rational::Ratio;

use crate::numeric::{e, fmt_sig17, ComplexKahanSum, KahanSum};
use crate::seqgen::{SelectionProfile, SelectionSample, SparseSequence};
use crate::systems::{cond_exp_invariant, CircleSet, FiniteCyclicPair, TorusRotationPair, TrigPolynomial};
use crate::{Error, Result};

/// Default spread threshold for convergence verdicts.
pub const DEFAULT_SPREAD_THRESHOLD: f64 = 0.02;
/// Number of trailing checkpoints inspected by [`AverageSeries::tail_spread`].
pub const VERDICT_WINDOW: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Converging,
    NotConverging,
}

/// Checkpointed values `N ↦ A_N` of a running average.
#[derive(Clone, Debug, PartialEq)]
pub struct AverageSeries {
    checkpoints: Vec<u64>,
    values: Vec<Complex64>,
    real: bool,
    meta: String,
}

impl AverageSeries {
    pub fn new(checkpoints: Vec<u64>, values: Vec<Complex64>, real: bool, meta: impl Into<String>) -> Result<Self> {
        if checkpoints.len() != values.len() {
            return Err(Error::Invalid("checkpoint and value counts differ".into()));
        }
        if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("checkpoints must be strictly increasing".into()));
        }
        Ok(Self {
            checkpoints,
            values,
            real,
            meta: meta.into(),
        })
    }

    pub fn real(checkpoints: Vec<u64>, values: Vec<f64>, meta: impl Into<String>) -> Result<Self> {
        Self::new(
            checkpoints,
            values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
            true,
            meta,
        )
    }

    pub fn checkpoints(&self) -> &[u64] {
        &self.checkpoints
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn meta(&self) -> &str {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn final_value(&self) -> Option<Complex64> {
        self.values.last().copied()
    }

    /// Largest distance between two of the last `k` values (max − min for
    /// real series).
    pub fn tail_spread(&self, k: usize) -> f64 {
        let tail = &self.values[self.values.len().saturating_sub(k)..];
        let mut d: f64 = 0.0;
        for (i, a) in tail.iter().enumerate() {
            for b in &tail[i + 1..] {
                d = d.max((a - b).norm());
            }
        }
        d
    }

    pub fn verdict(&self, threshold: f64) -> Verdict {
        if self.values.len() >= VERDICT_WINDOW && self.tail_spread(VERDICT_WINDOW) <= threshold {
            Verdict::Converging
        } else {
            Verdict::NotConverging
        }
    }

    /// `(min, max)` of the real parts over the last `k` checkpoints.
    pub fn tail_range(&self, k: usize) -> (f64, f64) {
        let tail = &self.values[self.values.len().saturating_sub(k)..];
        tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v.re), hi.max(v.re))
        })
    }

    /// Whether every value has modulus at most `bound` (plus rounding slack).
    pub fn bounded_by(&self, bound: f64) -> bool {
        self.values.iter().all(|v| v.norm() <= bound * (1.0 + 1e-12) + 1e-12)
    }

    /// Writes `N,re,im`, or `N,value` for real series.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        if self.real {
            writeln!(w, "N,value")?;
            for (n, v) in self.checkpoints.iter().zip(&self.values) {
                writeln!(w, "{},{}", n, fmt_sig17(v.re))?;
            }
        } else {
            writeln!(w, "N,re,im")?;
            for (n, v) in self.checkpoints.iter().zip(&self.values) {
                writeln!(w, "{},{},{}", n, fmt_sig17(v.re), fmt_sig17(v.im))?;
            }
        }
        Ok(())
    }
}

/// Which iterates of `T` and `S` are paired at step `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IterateScheme {
    /// `(n, a_n)`
    Mixed,
    /// `(a_n, a_n)`
    SameIterate,
    /// `(n, n)`
    FullDouble,
}

impl IterateScheme {
    fn needs_sequence(self) -> bool {
        !matches!(self, IterateScheme::FullDouble)
    }

    #[inline]
    fn pair(self, n: u64, seq: Option<&SparseSequence>) -> (u64, u64) {
        match self {
            IterateScheme::Mixed => (n, seq.expect("sequence required").term(n)),
            IterateScheme::SameIterate => {
                let a = seq.expect("sequence required").term(n);
                (a, a)
            }
            IterateScheme::FullDouble => (n, n),
        }
    }

    fn label(self) -> &'static str {
        match self {
            IterateScheme::Mixed => "(1/N) Σ f(T^n x) g(S^{a_n} x)",
            IterateScheme::SameIterate => "(1/N) Σ f(T^{a_n} x) g(S^{a_n} x)",
            IterateScheme::FullDouble => "(1/N) Σ f(T^n x) g(S^n x)",
        }
    }
}

fn check_checkpoints(checkpoints: &[u64]) -> Result<u64> {
    if checkpoints.is_empty() || checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid(
            "checkpoints must be positive and strictly increasing".into(),
        ));
    }
    Ok(*checkpoints.last().unwrap())
}

fn torus_series(
    sys: &TorusRotationPair,
    f: &TrigPolynomial,
    g: &TrigPolynomial,
    seq: Option<&SparseSequence>,
    x: f64,
    checkpoints: &[u64],
    scheme: IterateScheme,
) -> Result<AverageSeries> {
    let n_max = check_checkpoints(checkpoints)?;
    if scheme.needs_sequence() {
        seq.ok_or_else(|| Error::Invalid("sparse sequence required".into()))?
            .require(n_max)?;
    }
    let mut acc = ComplexKahanSum::new();
    let mut values = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    for n in 1..=n_max {
        let (u, v) = scheme.pair(n, seq);
        let fx = f.eval(sys.apply_t(x, u as i64));
        let gx = g.eval(sys.apply_s(x, v as i64));
        acc.add(fx * gx);
        if n == checkpoints[next] {
            values.push(acc.value() / n as f64);
            next += 1;
        }
    }
    AverageSeries::new(
        checkpoints.to_vec(),
        values,
        false,
        format!("{} at x = {x}", scheme.label()),
    )
}

/// `(1/N) Σ f(x + nα) g(x + a_n β)` at each checkpoint.
pub fn mixed_average(
    sys: &TorusRotationPair,
    f: &TrigPolynomial,
    g: &TrigPolynomial,
    seq: &SparseSequence,
    x: f64,
    checkpoints: &[u64],
) -> Result<AverageSeries> {
    torus_series(sys, f, g, Some(seq), x, checkpoints, IterateScheme::Mixed)
}

/// `(1/N) Σ f(x + a_n α) g(x + a_n β)` at each checkpoint.
pub fn same_iterate_average(
    sys: &TorusRotationPair,
    f: &TrigPolynomial,
    g: &TrigPolynomial,
    seq: &SparseSequence,
    x: f64,
    checkpoints: &[u64],
) -> Result<AverageSeries> {
    torus_series(sys, f, g, Some(seq), x, checkpoints, IterateScheme::SameIterate)
}

/// `(1/N) Σ f(x + nα) g(x + nβ)` at each checkpoint.
pub fn full_double_average(
    sys: &TorusRotationPair,
    f: &TrigPolynomial,
    g: &TrigPolynomial,
    x: f64,
    checkpoints: &[u64],
) -> Result<AverageSeries> {
    torus_series(sys, f, g, None, x, checkpoints, IterateScheme::FullDouble)
}

/// `f̃(x) · g̃(x)` with `f̃ = E(f | I(T))`, `g̃ = E(g | I(S))`.
pub fn limit_formula(sys: &TorusRotationPair, f: &TrigPolynomial, g: &TrigPolynomial, x: f64) -> Complex64 {
    cond_exp_invariant(f, &sys.alpha).eval(x) * cond_exp_invariant(g, &sys.beta).eval(x)
}

fn average_polynomial(
    sys: &TorusRotationPair,
    f: &TrigPolynomial,
    g: &TrigPolynomial,
    seq: Option<&SparseSequence>,
    n_max: u64,
    scheme: IterateScheme,
) -> Result<TrigPolynomial> {
    if n_max == 0 {
        return Err(Error::EmptyLength);
    }
    if scheme.needs_sequence() {
        seq.ok_or_else(|| Error::Invalid("sparse sequence required".into()))?
            .require(n_max)?;
    }
    let pairs: Vec<(i64, i64, Complex64)> = f
        .iter()
        .flat_map(|(j, a)| g.iter().map(move |(l, b)| (j, l, a * b)))
        .collect();
    let mut sums = vec![ComplexKahanSum::new(); pairs.len()];
    for n in 1..=n_max {
        let (u, v) = scheme.pair(n, seq);
        for (s, &(j, l, _)) in sums.iter_mut().zip(&pairs) {
            let phase = sys.alpha.phase(j * u as i64) + sys.beta.phase(l * v as i64);
            s.add(e(phase));
        }
    }
    Ok(TrigPolynomial::from_coeffs(
        pairs
            .iter()
            .zip(&sums)
            .map(|(&(j, l, c), s)| (j + l, c * s.value() / n_max as f64)),
    ))
}

/// The function `x ↦ (1/N) Σ f(x + a_n α) g(x + a_n β)` as a polynomial.
pub fn same_iterate_polynomial(
    sys: &TorusRotationPair,
    f: &TrigPolynomial,
    g: &TrigPolynomial,
    seq: &SparseSequence,
    n: u64,
) -> Result<TrigPolynomial> {
    average_polynomial(sys, f, g, Some(seq), n, IterateScheme::SameIterate)
}

/// The function `x ↦ (1/N) Σ f(x + nα) g(x + nβ)` as a polynomial.
pub fn full_double_polynomial(
    sys: &TorusRotationPair,
    f: &TrigPolynomial,
    g: &TrigPolynomial,
    n: u64,
) -> Result<TrigPolynomial> {
    average_polynomial(sys, f, g, None, n, IterateScheme::FullDouble)
}

/// The function `x ↦ (1/N) Σ f(x + nα) g(x + a_n β)` as a polynomial.
pub fn mixed_polynomial(
    sys: &TorusRotationPair,
    f: &TrigPolynomial,
    g: &TrigPolynomial,
    seq: &SparseSequence,
    n: u64,
) -> Result<TrigPolynomial> {
    average_polynomial(sys, f, g, Some(seq), n, IterateScheme::Mixed)
}

/// Exact averages on a finite cyclic pair for the given scheme.
pub fn finite_series(
    sys: &FiniteCyclicPair,
    f: &[i64],
    g: &[i64],
    seq: Option<&SparseSequence>,
    x0: u64,
    checkpoints: &[u64],
    scheme: IterateScheme,
) -> Result<Vec<Ratio<i128>>> {
    let n_max = check_checkpoints(checkpoints)?;
    if scheme.needs_sequence() {
        seq.ok_or_else(|| Error::Invalid("sparse sequence required".into()))?
            .require(n_max)?;
    }
    let m = sys.modulus();
    if f.len() as u64 != m || g.len() as u64 != m {
        return Err(Error::TableSize {
            modulus: m,
            found: if f.len() as u64 != m { f.len() } else { g.len() },
        });
    }
    let x0 = x0 % m;
    let mut sum = 0i128;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    for n in 1..=n_max {
        let (u, v) = scheme.pair(n, seq);
        sum += i128::from(f[sys.apply_t(x0, u) as usize]) * i128::from(g[sys.apply_s(x0, v) as usize]);
        if n == checkpoints[next] {
            out.push(Ratio::new(sum, i128::from(n)));
            next += 1;
        }
    }
    Ok(out)
}

/// `(1/N) Σ μ(A ∩ T^{-n}A ∩ S^{-a_n}A)` at each checkpoint, by exact arc
/// arithmetic.
pub fn recurrence_series(
    sys: &TorusRotationPair,
    set: &CircleSet,
    seq: &SparseSequence,
    checkpoints: &[u64],
) -> Result<AverageSeries> {
    let n_max = check_checkpoints(checkpoints)?;
    seq.require(n_max)?;
    let mut acc = KahanSum::new();
    let mut values = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    for n in 1..=n_max {
        let m = set
            .intersect(&sys.preimage_t(set, n as i64))
            .intersect(&sys.preimage_s(set, seq.term(n) as i64))
            .measure();
        acc.add(m);
        if n == checkpoints[next] {
            values.push(acc.value() / n as f64);
            next += 1;
        }
    }
    AverageSeries::real(checkpoints.to_vec(), values, "(1/N) Σ μ(A ∩ T^{-n}A ∩ S^{-a_n}A)")
}

/// The three computable stages of the comparison chain at a fixed `N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrategyChain {
    /// `(1/N) Σ_{n ≤ N} f(T^n x) g(S^{a_n} x)`
    pub via_sequence: Complex64,
    /// `(1/W_N) Σ_{n ≤ N} X_n f(T^{P_n} x) g(S^n x)`
    pub selection_weighted: Complex64,
    /// `(1/W_N) Σ_{n ≤ N} σ_n f(T^{P_n} x) g(S^n x)`
    pub sigma_weighted: Complex64,
}

impl StrategyChain {
    pub fn max_pairwise_gap(&self) -> f64 {
        let (a, b, c) = (self.via_sequence, self.selection_weighted, self.sigma_weighted);
        (a - b).norm().max((a - c).norm()).max((b - c).norm())
    }
}

pub fn strategy_chain(
    sys: &TorusRotationPair,
    f: &TrigPolynomial,
    g: &TrigPolynomial,
    sample: &SelectionSample,
    seq: &SparseSequence,
    x: f64,
    n: u64,
) -> Result<StrategyChain> {
    if sample.len() < n {
        return Err(Error::SampleTooShort {
            required: n,
            available: sample.len(),
        });
    }
    let via_sequence = mixed_average(sys, f, g, seq, x, &[n])?.final_value().unwrap();
    let profile = sample.profile();
    let mut sel = ComplexKahanSum::new();
    let mut sig = ComplexKahanSum::new();
    let mut w = KahanSum::new();
    for k in 1..=n {
        let s = profile.sigma(k);
        w.add(s);
        let term = f.eval(sys.apply_t(x, sample.prefix(k) as i64)) * g.eval(sys.apply_s(x, k as i64));
        if sample.bit(k) {
            sel.add(term);
        }
        sig.add(term * s);
    }
    let w = w.value();
    Ok(StrategyChain {
        via_sequence,
        selection_weighted: sel.value() / w,
        sigma_weighted: sig.value() / w,
    })
}

/// Both sides of `∫ f E(f|P1) E(f|P2) dμ ≥ (∫ f dμ)^3` on a finite space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChuReport {
    pub lhs: f64,
    pub rhs: f64,
}

fn conditional_expectation(f: &[f64], weights: &[f64], atoms: &[usize]) -> Vec<f64> {
    let k = atoms.iter().max().map_or(0, |m| m + 1);
    let mut mass = vec![KahanSum::new(); k];
    let mut integral = vec![KahanSum::new(); k];
    for ((&fx, &w), &atom) in f.iter().zip(weights).zip(atoms) {
        mass[atom].add(w);
        integral[atom].add(w * fx);
    }
    atoms
        .iter()
        .map(|&atom| {
            let m = mass[atom].value();
            if m > 0.0 {
                integral[atom].value() / m
            } else {
                0.0
            }
        })
        .collect()
}

/// Evaluates both sides of the cubic lower bound for a nonnegative `f` on
/// a finite probability space. `p1[i]`, `p2[i]` are the atom labels of
/// point `i` in the two partitions.
pub fn chu_check(f: &[f64], weights: &[f64], p1: &[usize], p2: &[usize]) -> Result<ChuReport> {
    let n = f.len();
    for (name, len) in [("weights", weights.len()), ("p1", p1.len()), ("p2", p2.len())] {
        if len != n {
            return Err(Error::Invalid(format!("{name} has {len} entries, expected {n}")));
        }
    }
    if let Some((index, &value)) = f.iter().enumerate().find(|(_, &v)| v < 0.0 || v.is_nan()) {
        return Err(Error::NegativeEntry { index, value });
    }
    if let Some((index, &value)) = weights.iter().enumerate().find(|(_, &v)| v < 0.0 || v.is_nan()) {
        return Err(Error::NegativeEntry { index, value });
    }
    let total: f64 = weights.iter().copied().collect::<KahanSum>().value();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid(format!("weights sum to {total}, not 1")));
    }
    let e1 = conditional_expectation(f, weights, p1);
    let e2 = conditional_expectation(f, weights, p2);
    let lhs = (0..n)
        .map(|i| weights[i] * f[i] * e1[i] * e2[i])
        .collect::<KahanSum>()
        .value();
    let mean = f.iter().zip(weights).map(|(a, w)| a * w).collect::<KahanSum>().value();
    Ok(ChuReport {
        lhs,
        rhs: mean * mean * mean,
    })
}

/// Uniform probability weights on `m` points.
pub fn uniform_weights(m: usize) -> Vec<f64> {
    vec![1.0 / m as f64; m]
}

/// Plain and `n^{-a}`-weighted averages of `v_1..v_N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedComparison {
    pub plain: Complex64,
    pub weighted: Complex64,
}

impl WeightedComparison {
    pub fn difference(&self) -> f64 {
        (self.plain - self.weighted).norm()
    }
}

/// `(1/N) Σ v_n` against `(1/W_N) Σ n^{-a} v_n`; `v[0]` is `v_1`.
pub fn weighted_compare(v: &[Complex64], a: f64, n: u64) -> Result<WeightedComparison> {
    let profile = SelectionProfile::new(a)?;
    if n == 0 {
        return Err(Error::EmptyLength);
    }
    if (v.len() as u64) < n {
        return Err(Error::SequenceTooShort {
            required: n,
            available: v.len() as u64,
        });
    }
    let mut plain = ComplexKahanSum::new();
    let mut weighted = ComplexKahanSum::new();
    let mut w = KahanSum::new();
    for (i, &z) in v[..n as usize].iter().enumerate() {
        let s = profile.sigma(i as u64 + 1);
        plain.add(z);
        weighted.add(z * s);
        w.add(s);
    }
    Ok(WeightedComparison {
        plain: plain.value() / n as f64,
        weighted: weighted.value() / w.value(),
    })
}

/// Normalising sequence for lacunary averages `A_N = (1/W_N) Σ_{n ≤ N} a_n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LacunaryWeights {
    /// `W_N = N`
    Cesaro,
    /// `W_N = Σ_{n ≤ N} n^{-a}`
    Power(SelectionProfile),
}

/// Samples `A_N` along `N = [γ^k]` up to the number of available terms.
pub fn lacunary_series(terms: &[f64], weights: LacunaryWeights, gamma: f64) -> Result<AverageSeries> {
    if !(gamma > 1.0) {
        return Err(Error::Invalid(format!("gamma must exceed 1, got {gamma}")));
    }
    if let Some((index, &value)) = terms.iter().enumerate().find(|(_, &v)| v < 0.0 || v.is_nan()) {
        return Err(Error::NegativeEntry { index, value });
    }
    let n_max = terms.len() as u64;
    let mut grid: Vec<u64> = Vec::new();
    let mut k = 1i32;
    loop {
        let v = gamma.powi(k).floor() as u64;
        if v > n_max {
            break;
        }
        if v >= 1 && grid.last().is_none_or(|&l| v > l) {
            grid.push(v);
        }
        k += 1;
    }
    if grid.is_empty() {
        return Err(Error::SequenceTooShort {
            required: gamma.floor() as u64,
            available: n_max,
        });
    }
    let mut acc = KahanSum::new();
    let mut w = KahanSum::new();
    let mut values = Vec::with_capacity(grid.len());
    let mut next = 0;
    for (i, &t) in terms.iter().enumerate() {
        let n = i as u64 + 1;
        if next == grid.len() {
            break;
        }
        acc.add(t);
        w.add(match weights {
            LacunaryWeights::Cesaro => 1.0,
            LacunaryWeights::Power(p) => p.sigma(n),
        });
        if n == grid[next] {
            values.push(acc.value() / w.value());
            next += 1;
        }
    }
    AverageSeries::real(grid, values, format!("lacunary γ = {gamma}"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LacunaryVerdict {
    Consistent,
    Inconsistent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LacunaryEstimate {
    pub gamma: f64,
    pub limit: f64,
    /// max − min over the last three lacunary samples.
    pub spread: f64,
    pub depth: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LacunaryReport {
    /// Sorted by decreasing `γ`.
    pub estimates: Vec<LacunaryEstimate>,
    /// max − min of the limit estimates across `γ`.
    pub spread: f64,
    pub verdict: LacunaryVerdict,
}

/// Compares limit estimates along several lacunary grids. The verdict is
/// consistent when the estimates agree within `tol` and the per-grid
/// spreads do not grow (beyond `tol`) as `γ` decreases toward 1.
pub fn lacunary_extrapolate(series: &[(f64, AverageSeries)], tol: f64) -> Result<LacunaryReport> {
    if series.is_empty() {
        return Err(Error::Invalid("no lacunary series given".into()));
    }
    let mut estimates = Vec::with_capacity(series.len());
    for (gamma, s) in series {
        if let Some((index, v)) = s.values().iter().enumerate().find(|(_, v)| v.re < 0.0 || v.im != 0.0) {
            return Err(Error::NegativeEntry { index, value: v.re });
        }
        let limit = s.final_value().ok_or(Error::EmptyLength)?.re;
        let (lo, hi) = s.tail_range(3);
        estimates.push(LacunaryEstimate {
            gamma: *gamma,
            limit,
            spread: hi - lo,
            depth: *s.checkpoints().last().unwrap(),
        });
    }
    estimates.sort_by(|a, b| b.gamma.total_cmp(&a.gamma));
    let lo = estimates.iter().map(|e| e.limit).fold(f64::INFINITY, f64::min);
    let hi = estimates.iter().map(|e| e.limit).fold(f64::NEG_INFINITY, f64::max);
    let spread = hi - lo;
    let shrinking = estimates.windows(2).all(|w| w[1].spread <= w[0].spread + tol);
    let verdict = if spread <= tol && shrinking {
        LacunaryVerdict::Consistent
    } else {
        LacunaryVerdict::Inconsistent
    };
    Ok(LacunaryReport {
        estimates,
        spread,
        verdict,
    })
}
