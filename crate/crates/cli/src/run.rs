//! Executes one experiment kind and writes its artifacts.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ergolab::averages::{
    chu_check, full_double_average, full_double_polynomial, limit_formula, mixed_average, recurrence_series,
    same_iterate_average, same_iterate_polynomial, strategy_chain, AverageSeries,
};
use ergolab::constants;
use ergolab::counterexample::{divergence_gap, measure_table, write_measure_csv, IndexSet};
use ergolab::estimates::{
    bc_density, bc_mean_density, pair_corr_supnorm, pair_sum_value, prop_main_ap_tail, prop_main_tail, slln_ratio,
    unif_est_scaling, vdc_check_all, write_fit_csv, write_scaling_csv, TailReport,
};
use ergolab::numeric::{fmt_sig17, geometric_checkpoints};
use ergolab::seqgen::{check_counting_identity, sample_for_terms, sample_selection, SelectionProfile};
use ergolab::systems::{l2_distance, TorusRotationPair};
use serde_json::json;

use crate::config::{ExperimentConfig, Kind};
use crate::instances::{chu_instance, vdc_instance};

/// Relative slack of the van der Corput comparison.
pub const VDC_REL_TOL: f64 = 1e-12;
/// Absolute slack of the cubic inequality comparison.
pub const CHU_ABS_TOL: f64 = 1e-12;
/// Largest number of vectors in a random van der Corput instance.
pub const VDC_MAX_N: usize = 64;

/// What a run produced.
#[derive(Debug, Default)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    /// Breaches of statements that hold exactly (counting identity, van der
    /// Corput, the cubic inequality, the counterexample dichotomy).
    pub violations: u64,
    pub summary: String,
}

/// Owns the output directory and records every file written into it.
pub struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        body(&mut w)
            .and_then(|_| w.flush())
            .with_context(|| format!("writing {}", path.display()))?;
        self.files.push(path);
        Ok(())
    }

    pub fn into_files(self) -> Vec<PathBuf> {
        self.files
    }
}

/// The eight base points `j/8 + 1/32` used by the torus experiments.
pub fn base_points() -> Vec<f64> {
    (0..8).map(|j| j as f64 / 8.0 + 1.0 / 32.0).collect()
}

fn series_csv(series: &AverageSeries) -> impl FnOnce(&mut dyn Write) -> io::Result<()> + '_ {
    move |w| series.write_csv(w)
}

fn write_meta(out: &mut Output, cfg: &ExperimentConfig) -> Result<()> {
    let meta = json!({
        "kind": cfg.kind.name(),
        "a": cfg.a,
        "eligible_range": cfg.kind.eligible_range().map(|(lo, hi)| [lo, hi]),
        "forced": cfg.forced(),
        "force_flag": cfg.force,
        "seeds": cfg.seeds,
        "nmax": cfg.n_max,
        "checkpoint_ratio": cfg.checkpoint_ratio,
        "gamma": cfg.gamma,
        "k": cfg.k_max,
        "b": cfg.b,
        "alpha": cfg.alpha.value(),
        "beta": cfg.beta.value(),
        "f": cfg.f.to_triples(),
        "g": cfg.g.to_triples(),
        "set": cfg.set.to_pairs(),
        "instances": cfg.instances,
    });
    let text = serde_json::to_string_pretty(&meta)?;
    out.write("meta.json", |w| writeln!(w, "{text}"))
}

/// Runs the configured experiment into `cfg.out`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    if cfg.kind == Kind::Report {
        return crate::report::run_report(cfg);
    }
    let mut out = Output::create(&cfg.out)?;
    write_meta(&mut out, cfg)?;
    let (violations, summary) = match cfg.kind {
        Kind::GenSeq => gen_seq(cfg, &mut out)?,
        Kind::AvgMixed => avg_mixed(cfg, &mut out)?,
        Kind::AvgSame => avg_same(cfg, &mut out)?,
        Kind::Recurrence => recurrence(cfg, &mut out)?,
        Kind::TrigSup => trig_sup(cfg, &mut out)?,
        Kind::ScalingFit => scaling_fit(cfg, &mut out)?,
        Kind::VdcCheck => vdc(cfg, &mut out)?,
        Kind::Slln => slln(cfg, &mut out)?,
        Kind::PairSum => pair_sum(cfg, &mut out)?,
        Kind::BcDensity => bc(cfg, &mut out)?,
        Kind::TailMain | Kind::TailAp => tails(cfg, &mut out)?,
        Kind::Counterexample => counterexample(cfg, &mut out)?,
        Kind::Report => unreachable!(),
    };
    Ok(RunOutcome {
        files: out.into_files(),
        violations,
        summary,
    })
}

fn profile(cfg: &ExperimentConfig) -> Result<SelectionProfile> {
    Ok(SelectionProfile::new(cfg.exponent())?)
}

fn torus(cfg: &ExperimentConfig) -> TorusRotationPair {
    TorusRotationPair::new(cfg.alpha, cfg.beta)
}

fn gen_seq(cfg: &ExperimentConfig, out: &mut Output) -> Result<(u64, String)> {
    let p = profile(cfg)?;
    let mut failures = 0;
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let sample = sample_selection(p, cfg.n_max, seed)?;
        let seq = ergolab::seqgen::build_sparse_sequence(&sample);
        let ok = check_counting_identity(&sample, &seq).is_ok();
        failures += u64::from(!ok);
        out.write(&format!("selection_seed{seed}.csv"), |w| sample.write_csv(w))?;
        out.write(&format!("sequence_seed{seed}.csv"), |w| seq.write_csv(w))?;
        rows.push((seed, sample.count(), ok));
    }
    out.write("gen_seq_summary.csv", |w| {
        writeln!(w, "seed,selected,identity_ok")?;
        for (seed, count, ok) in &rows {
            writeln!(w, "{seed},{count},{}", u8::from(*ok))?;
        }
        Ok(())
    })?;
    Ok((
        failures,
        format!("{} seeds, {failures} counting-identity failures", rows.len()),
    ))
}

fn avg_mixed(cfg: &ExperimentConfig, out: &mut Output) -> Result<(u64, String)> {
    let (p, sys) = (profile(cfg)?, torus(cfg));
    let cps = geometric_checkpoints(cfg.checkpoint_ratio, cfg.n_max);
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let (sample, seq) = sample_for_terms(p, seed, cfg.n_max)?;
        for (j, &x) in base_points().iter().enumerate() {
            let series = mixed_average(&sys, &cfg.f, &cfg.g, &seq, x, &cps)?;
            out.write(&format!("avg_mixed_seed{seed}_x{j}.csv"), series_csv(&series))?;
            let limit = limit_formula(&sys, &cfg.f, &cfg.g, x);
            let chain = strategy_chain(&sys, &cfg.f, &cfg.g, &sample, &seq, x, cfg.n_max)?;
            let last = series.final_value().unwrap();
            rows.push((seed, j, x, last, limit, chain.max_pairwise_gap()));
        }
    }
    out.write("avg_mixed_summary.csv", |w| {
        writeln!(w, "seed,point,x,re,im,limit_re,limit_im,error,chain_gap")?;
        for (seed, j, x, v, l, gap) in &rows {
            writeln!(
                w,
                "{seed},{j},{},{},{},{},{},{},{}",
                fmt_sig17(*x),
                fmt_sig17(v.re),
                fmt_sig17(v.im),
                fmt_sig17(l.re),
                fmt_sig17(l.im),
                fmt_sig17((v - l).norm()),
                fmt_sig17(*gap)
            )?;
        }
        Ok(())
    })?;
    let close = rows.iter().filter(|r| (r.3 - r.4).norm() < 0.05).count();
    Ok((0, format!("{close}/{} averages within 0.05 of the limit", rows.len())))
}

fn avg_same(cfg: &ExperimentConfig, out: &mut Output) -> Result<(u64, String)> {
    let (p, sys) = (profile(cfg)?, torus(cfg));
    let cps = geometric_checkpoints(cfg.checkpoint_ratio, cfg.n_max);
    let full = full_double_polynomial(&sys, &cfg.f, &cfg.g, cfg.n_max)?;
    for (j, &x) in base_points().iter().enumerate() {
        let series = full_double_average(&sys, &cfg.f, &cfg.g, x, &cps)?;
        out.write(&format!("avg_full_x{j}.csv"), series_csv(&series))?;
    }
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let (_, seq) = sample_for_terms(p, seed, cfg.n_max)?;
        for (j, &x) in base_points().iter().enumerate() {
            let series = same_iterate_average(&sys, &cfg.f, &cfg.g, &seq, x, &cps)?;
            out.write(&format!("avg_same_seed{seed}_x{j}.csv"), series_csv(&series))?;
        }
        let same = same_iterate_polynomial(&sys, &cfg.f, &cfg.g, &seq, cfg.n_max)?;
        rows.push((seed, l2_distance(&same, &full)));
    }
    out.write("avg_same_summary.csv", |w| {
        writeln!(w, "seed,l2_distance")?;
        for (seed, d) in &rows {
            writeln!(w, "{seed},{}", fmt_sig17(*d))?;
        }
        Ok(())
    })?;
    let med = ergolab::numeric::median(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    Ok((0, format!("median L2 distance {med:.4}")))
}

fn recurrence(cfg: &ExperimentConfig, out: &mut Output) -> Result<(u64, String)> {
    let (p, sys) = (profile(cfg)?, torus(cfg));
    let cps = geometric_checkpoints(cfg.checkpoint_ratio, cfg.n_max);
    let mut finals = Vec::new();
    for &seed in &cfg.seeds {
        let (_, seq) = sample_for_terms(p, seed, cfg.n_max)?;
        let series = recurrence_series(&sys, &cfg.set, &seq, &cps)?;
        out.write(&format!("recurrence_seed{seed}.csv"), series_csv(&series))?;
        finals.push((seed, series.final_value().unwrap().re));
    }
    let cube = cfg.set.measure().powi(3);
    out.write("recurrence_summary.csv", |w| {
        writeln!(w, "seed,final,measure_cubed")?;
        for (seed, v) in &finals {
            writeln!(w, "{seed},{},{}", fmt_sig17(*v), fmt_sig17(cube))?;
        }
        Ok(())
    })?;
    let above = finals.iter().filter(|r| r.1 >= cube - 0.01).count();
    Ok((
        0,
        format!("{above}/{} seeds with final value ≥ μ(A)³ − 0.01", finals.len()),
    ))
}

fn trig_sup(cfg: &ExperimentConfig, out: &mut Output) -> Result<(u64, String)> {
    let p = profile(cfg)?;
    let n = cfg.n_max as usize;
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let sample = sample_selection(p, 2 * cfg.n_max, seed)?;
        rows.push((seed, pair_corr_supnorm(&sample, n)?));
    }
    out.write("trig_sup.csv", |w| {
        writeln!(w, "a,N,seed,grid_max,upper_bound,grid_size,argmax_lag")?;
        for (seed, b) in &rows {
            writeln!(
                w,
                "{},{n},{seed},{},{},{},{}",
                fmt_sig17(p.a()),
                fmt_sig17(b.grid_max),
                fmt_sig17(b.upper_bound),
                b.grid_size,
                b.argmax_lag
            )?;
        }
        Ok(())
    })?;
    let med = ergolab::numeric::median(&rows.iter().map(|r| r.1.grid_max).collect::<Vec<_>>());
    Ok((0, format!("median grid maximum {med:.3} at N = {n}")))
}

fn scaling_fit(cfg: &ExperimentConfig, out: &mut Output) -> Result<(u64, String)> {
    if !cfg.n_max.is_multiple_of(16) || cfg.n_max < 32 {
        bail!(
            "scaling-fit needs nmax to be a multiple of 16 and at least 32, got {}",
            cfg.n_max
        );
    }
    let sizes: Vec<usize> = (0..5).map(|k| (cfg.n_max as usize / 16) << k).collect();
    let fit = unif_est_scaling(cfg.exponent(), &sizes, &cfg.seeds)?;
    out.write("scaling_rows.csv", |w| write_scaling_csv(&fit.rows, w))?;
    out.write("scaling_fit.csv", |w| write_fit_csv(std::slice::from_ref(&fit), w))?;
    Ok((
        0,
        format!(
            "slope {:.3} ± {:.3} against target {:.3}",
            fit.slope, fit.half_width, fit.target
        ),
    ))
}

/// Number of violated `(instance, M)` pairs among `count` random instances.
pub fn vdc_violations(seed: u64, count: u64) -> Result<(u64, u64)> {
    let mut violations = 0;
    let mut checked = 0;
    for i in 0..count {
        let v = vdc_instance(seed, i, VDC_MAX_N);
        for r in vdc_check_all(&v)? {
            checked += 1;
            violations += u64::from(!r.holds(VDC_REL_TOL));
        }
    }
    Ok((violations, checked))
}

fn vdc(cfg: &ExperimentConfig, out: &mut Output) -> Result<(u64, String)> {
    let max_n = cfg.n_max as usize;
    let mut violations = 0;
    out.write("vdc.csv", |w| {
        writeln!(w, "seed,instance,N,M,lhs,rhs,holds")?;
        for &seed in &cfg.seeds {
            for i in 0..cfg.instances {
                let v = vdc_instance(seed, i, max_n);
                let reports = vdc_check_all(&v).map_err(io::Error::other)?;
                for r in reports {
                    let ok = r.holds(VDC_REL_TOL);
                    violations += u64::from(!ok);
                    // The full table would be huge; keep the binding lag and every breach.
                    if !ok || r.m == 1 {
                        writeln!(
                            w,
                            "{seed},{i},{},{},{},{},{}",
                            r.n,
                            r.m,
                            fmt_sig17(r.lhs),
                            fmt_sig17(r.rhs),
                            u8::from(ok)
                        )?;
                    }
                }
            }
        }
        Ok(())
    })?;
    Ok((violations, format!("{violations} violations")))
}

/// Violations among `count` random instances of the cubic inequality.
pub fn chu_violations(seed: u64, count: u64) -> Result<u64> {
    let mut violations = 0;
    for i in 0..count {
        let c = chu_instance(seed, i);
        let r = chu_check(&c.f, &c.weights, &c.p1, &c.p2)?;
        violations += u64::from(r.lhs < r.rhs - CHU_ABS_TOL);
    }
    Ok(violations)
}

fn slln(cfg: &ExperimentConfig, out: &mut Output) -> Result<(u64, String)> {
    let p = profile(cfg)?;
    let cps = geometric_checkpoints(cfg.checkpoint_ratio, cfg.n_max);
    let mut finals = Vec::new();
    for &seed in &cfg.seeds {
        let sample = sample_selection(p, cfg.n_max, seed)?;
        let series = slln_ratio(&sample, &cps)?;
        out.write(&format!("slln_seed{seed}.csv"), series_csv(&series))?;
        finals.push(series.final_value().unwrap().re);
    }
    let close = finals.iter().filter(|v| (*v - 1.0).abs() < 0.01).count();
    Ok((0, format!("{close}/{} seeds with |P_N/W_N − 1| < 0.01", finals.len())))
}

/// Decades `10^3, 10^4, …` up to `n_max`, ending with `n_max` itself.
pub fn decade_sizes(n_max: u64) -> Vec<u64> {
    let mut sizes: Vec<u64> = std::iter::successors(Some(1000u64), |n| n.checked_mul(10))
        .take_while(|&n| n <= n_max)
        .collect();
    if sizes.last() != Some(&n_max) {
        sizes.push(n_max);
    }
    sizes
}

fn pair_sum(cfg: &ExperimentConfig, out: &mut Output) -> Result<(u64, String)> {
    let p = profile(cfg)?;
    let sizes = decade_sizes(cfg.n_max);
    let m_max = (cfg.n_max as f64).powf(cfg.b).floor() as u64;
    let c = constants::pair_sum_constant(p.a(), cfg.b);
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let sample = sample_selection(p, cfg.n_max + m_max, seed)?;
        for &n in &sizes {
            rows.push((seed, n, pair_sum_value(&sample, n, cfg.b)?));
        }
    }
    let bound = |n: u64| c.map(|c| c * (n as f64).powf(cfg.b + 1.0 - 2.0 * p.a()));
    out.write("pair_sum.csv", |w| {
        writeln!(w, "seed,N,M,value,bound")?;
        for (seed, n, v) in &rows {
            let m = (*n as f64).powf(cfg.b).floor() as u64;
            let b = bound(*n).map(fmt_sig17).unwrap_or_default();
            writeln!(w, "{seed},{n},{m},{v},{b}")?;
        }
        Ok(())
    })?;
    Ok((0, format!("{} pair sums over {} sizes", rows.len(), sizes.len())))
}

/// Event probabilities `p_n = (ln(n + 2))^{-3/2}` of the density experiment.
pub fn bc_probability(n: u64) -> f64 {
    ((n + 2) as f64).ln().powf(-1.5)
}

fn bc(cfg: &ExperimentConfig, out: &mut Output) -> Result<(u64, String)> {
    let cps = geometric_checkpoints(cfg.checkpoint_ratio, cfg.n_max);
    let mean = bc_mean_density(bc_probability, &cps);
    out.write("bc_mean_density.csv", |w| {
        writeln!(w, "N,value")?;
        for (n, v) in cps.iter().zip(&mean) {
            writeln!(w, "{n},{}", fmt_sig17(*v))?;
        }
        Ok(())
    })?;
    let mut finals = Vec::new();
    for &seed in &cfg.seeds {
        let series = bc_density(bc_probability, seed, cfg.n_max, &cps)?;
        out.write(&format!("bc_density_seed{seed}.csv"), series_csv(&series))?;
        finals.push(series.final_value().unwrap().re);
    }
    let med = ergolab::numeric::median(&finals);
    Ok((0, format!("median final density {med:.4}")))
}

fn write_tail(w: &mut dyn Write, r: &TailReport) -> io::Result<()> {
    writeln!(w, "k,N_k,term,partial_sum")?;
    for (i, ((n, t), s)) in r.checkpoints.iter().zip(&r.terms).zip(&r.partial_sums).enumerate() {
        writeln!(w, "{},{n},{},{}", i + 1, fmt_sig17(*t), fmt_sig17(*s))?;
    }
    Ok(())
}

fn tails(cfg: &ExperimentConfig, out: &mut Output) -> Result<(u64, String)> {
    let (p, sys) = (profile(cfg)?, torus(cfg));
    let n = cfg.gamma.powi(cfg.k_max as i32).floor() as u64;
    let name = cfg.kind.name().replace('-', "_");
    let mut finals = Vec::new();
    for &seed in &cfg.seeds {
        let sample = sample_selection(p, n, seed)?;
        let r = match cfg.kind {
            Kind::TailMain => prop_main_tail(&sys, &cfg.f, &cfg.g, &sample, cfg.gamma, cfg.k_max)?,
            _ => prop_main_ap_tail(&sys, &cfg.f, &cfg.g, &sample, cfg.gamma, cfg.k_max)?,
        };
        out.write(&format!("{name}_seed{seed}.csv"), |w| write_tail(w, &r))?;
        finals.push((seed, r.final_term(), r.last_increase(5)));
    }
    out.write(&format!("{name}_summary.csv"), |w| {
        writeln!(w, "seed,final_term,last5_increase")?;
        for (seed, t, d) in &finals {
            writeln!(w, "{seed},{},{}", fmt_sig17(*t), fmt_sig17(*d))?;
        }
        Ok(())
    })?;
    let med = ergolab::numeric::median(&finals.iter().map(|r| r.1).collect::<Vec<_>>());
    Ok((0, format!("median final term {med:.3e}")))
}

fn counterexample(cfg: &ExperimentConfig, out: &mut Output) -> Result<(u64, String)> {
    let ids: Vec<i64> = (1..=cfg.n_max as i64).collect();
    let rows = measure_table(&ids, &ids, &IndexSet::PowerOfFourBlocks, cfg.n_max)?;
    let quarter = num_rational::Ratio::new(1u128, 4);
    let mismatches = rows
        .iter()
        .filter(|r| r.measure != if r.in_f { 0.into() } else { quarter })
        .count() as u64;
    out.write("measures.csv", |w| write_measure_csv(&rows, w))?;
    let mut summary = format!("{mismatches} dichotomy mismatches");
    if cfg.n_max >= ergolab::counterexample::MIN_DIVERGENCE_HORIZON {
        let d = divergence_gap(cfg.n_max)?;
        out.write("divergence.csv", |w| d.write_csv(w))?;
        out.write("divergence_summary.csv", |w| {
            writeln!(w, "N_max,window_lo,liminf,limsup,gap")?;
            writeln!(
                w,
                "{},{},{},{},{}",
                cfg.n_max,
                d.window.0,
                fmt_sig17(d.liminf_est),
                fmt_sig17(d.limsup_est),
                fmt_sig17(d.gap)
            )
        })?;
        summary.push_str(&format!(", Cesàro gap {:.4}", d.gap));
    }
    Ok((mismatches, summary))
}
