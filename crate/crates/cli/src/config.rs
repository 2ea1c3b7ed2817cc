//! Command line and JSON configuration.
//!
//! Flags and the JSON file share one schema ([`Flags`]); flags given on the
//! command line override values from `--config`. [`Flags::validate`] fills
//! defaults and enforces the per-kind eligible range of the exponent `a`.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, ValueEnum};
use ergolab::systems::{Angle, CircleSet, TrigPolynomial};
use serde::{Deserialize, Serialize};

/// Experiment kinds, one per subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    GenSeq,
    AvgMixed,
    AvgSame,
    Recurrence,
    TrigSup,
    VdcCheck,
    Slln,
    PairSum,
    BcDensity,
    TailMain,
    TailAp,
    Counterexample,
    ScalingFit,
    Report,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::GenSeq => "gen-seq",
            Kind::AvgMixed => "avg-mixed",
            Kind::AvgSame => "avg-same",
            Kind::Recurrence => "recurrence",
            Kind::TrigSup => "trig-sup",
            Kind::VdcCheck => "vdc-check",
            Kind::Slln => "slln",
            Kind::PairSum => "pair-sum",
            Kind::BcDensity => "bc-density",
            Kind::TailMain => "tail-main",
            Kind::TailAp => "tail-ap",
            Kind::Counterexample => "counterexample",
            Kind::ScalingFit => "scaling-fit",
            Kind::Report => "report",
        }
    }

    /// Open interval of exponents for which the underlying result is
    /// proved, or `None` when the kind does not use `a`.
    pub fn eligible_range(self) -> Option<(f64, f64)> {
        match self {
            Kind::AvgMixed | Kind::Recurrence | Kind::TailMain => Some((0.0, 1.0 / 14.0)),
            Kind::AvgSame | Kind::TailAp | Kind::TrigSup | Kind::ScalingFit => Some((0.0, 0.5)),
            Kind::PairSum => Some((0.0, 1.0 / 6.0)),
            Kind::GenSeq | Kind::Slln => Some((0.0, 1.0)),
            Kind::VdcCheck | Kind::BcDensity | Kind::Counterexample | Kind::Report => None,
        }
    }

    fn default_nmax(self) -> u64 {
        match self {
            Kind::TrigSup | Kind::ScalingFit => 8192,
            Kind::Slln | Kind::BcDensity => 1_000_000,
            Kind::VdcCheck => 64,
            Kind::Counterexample => 4u64.pow(9),
            Kind::TailMain | Kind::TailAp | Kind::Report => 0,
            _ => 100_000,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("no experiment kind given (pass a subcommand or \"kind\" in the config file)")]
    MissingKind,
    #[error("{kind} requires --{field}")]
    Missing { kind: Kind, field: &'static str },
    #[error("a = {a} is outside the eligible range ({lo:.6}, {hi:.6}) of {kind}; pass --force to run anyway")]
    OutOfRange { kind: Kind, a: f64, lo: f64, hi: f64 },
    #[error("a = {0} must lie in (0, 1)")]
    InvalidExponent(f64),
    #[error("malformed {what} literal {text:?}: {reason}")]
    Literal {
        what: &'static str,
        text: String,
        reason: String,
    },
    #[error("{path}: {reason}")]
    File { path: PathBuf, reason: String },
    #[error("{0}")]
    Invalid(String),
}

/// Every flag, also used as the JSON config schema.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Flags {
    /// Experiment kind (JSON only; on the command line it is the subcommand).
    #[arg(skip)]
    pub kind: Option<Kind>,
    /// Selection exponent: P(X_n = 1) = n^{-a}.
    #[arg(long)]
    pub a: Option<f64>,
    /// Single seed (shorthand for --seeds S).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Seed list: "1..20" (inclusive) or "1,2,5".
    #[arg(long)]
    pub seeds: Option<String>,
    /// Largest N.
    #[arg(long)]
    pub nmax: Option<u64>,
    /// Lacunary ratio for tail series.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Number of lacunary terms for tail series.
    #[arg(long)]
    pub k: Option<u32>,
    /// Lag exponent of the pair sum (M = N^b).
    #[arg(long)]
    pub b: Option<f64>,
    /// Rotation angle of T: "p/q" or sqrt2m1, goldenm1, em2, pim3, sqrt3m1.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Rotation angle of S.
    #[arg(long)]
    pub beta: Option<String>,
    /// Observable f: JSON list of [k, re, im] triples, or a file holding one.
    #[arg(long)]
    pub f: Option<String>,
    /// Observable g.
    #[arg(long)]
    pub g: Option<String>,
    /// Arc list such as "[0, 0.3)" or "[0, 0.1) ∪ [0.5, 0.6)".
    #[arg(long)]
    pub set: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run even if a is outside the kind's eligible range.
    #[arg(long)]
    pub force: bool,
    /// Ratio of the geometric checkpoint grid.
    #[arg(long)]
    pub checkpoint_ratio: Option<f64>,
    /// Number of random instances (vdc-check).
    #[arg(long)]
    pub instances: Option<u64>,
    /// JSON file with any of the above fields (command line flags win).
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Parser, Clone, Debug)]
#[command(
    name = "ergolab",
    version,
    about = "Experiments on multiple ergodic averages along random sparse sequences"
)]
pub struct Cli {
    /// Experiment kind.
    pub kind: Option<Kind>,
    #[command(flatten)]
    pub flags: Flags,
}

/// Validated configuration with every default filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub a: Option<f64>,
    pub seeds: Vec<u64>,
    pub n_max: u64,
    pub checkpoint_ratio: f64,
    pub gamma: f64,
    pub k_max: u32,
    pub b: f64,
    pub alpha: Angle,
    pub beta: Angle,
    pub f: TrigPolynomial,
    pub g: TrigPolynomial,
    pub set: CircleSet,
    pub instances: u64,
    pub out: PathBuf,
    pub force: bool,
}

impl ExperimentConfig {
    /// Whether `a` lies outside the eligible range (only possible with `--force`).
    pub fn forced(&self) -> bool {
        match (self.a, self.kind.eligible_range()) {
            (Some(a), Some((lo, hi))) => !(a > lo && a < hi),
            _ => false,
        }
    }

    /// The exponent, for kinds that require one.
    pub fn exponent(&self) -> f64 {
        self.a.expect("validated config of this kind carries an exponent")
    }
}

pub const DEFAULT_OBSERVABLE: &str = "[[0, 1, 0], [1, 0.5, 0]]";
pub const DEFAULT_SET: &str = "[0, 0.3)";
pub const DEFAULT_OUT: &str = "ergolab-out";

fn literal(what: &'static str, text: &str, reason: impl fmt::Display) -> ConfigError {
    ConfigError::Literal {
        what,
        text: text.to_string(),
        reason: reason.to_string(),
    }
}

/// Parses `"1..20"`, `"3"` or `"1,2,5"`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, ConfigError> {
    let bad = |r: &str| literal("seed list", text, r);
    let t = text.trim();
    let seeds: Vec<u64> = if let Some((lo, hi)) = t.split_once("..") {
        let lo: u64 = lo.trim().parse().map_err(|_| bad("bad lower end"))?;
        let hi: u64 = hi
            .trim()
            .trim_start_matches('=')
            .parse()
            .map_err(|_| bad("bad upper end"))?;
        if hi < lo {
            return Err(bad("empty range"));
        }
        (lo..=hi).collect()
    } else {
        t.split(',')
            .map(|s| s.trim().parse::<u64>().map_err(|_| bad("not an integer")))
            .collect::<Result<_, _>>()?
    };
    if seeds.is_empty() {
        return Err(bad("no seeds"));
    }
    Ok(seeds)
}

/// Parses an observable given inline as JSON `[[k, re, im], …]` or as the
/// path of a file holding that JSON.
pub fn parse_observable(text: &str) -> Result<TrigPolynomial, ConfigError> {
    let trimmed = text.trim();
    let json = if trimmed.starts_with('[') {
        trimmed.to_string()
    } else {
        std::fs::read_to_string(trimmed).map_err(|e| ConfigError::File {
            path: PathBuf::from(trimmed),
            reason: format!("cannot read observable: {e}"),
        })?
    };
    let triples: Vec<(i64, f64, f64)> = serde_json::from_str(&json).map_err(|e| literal("observable", text, e))?;
    if triples.iter().any(|&(_, re, im)| !re.is_finite() || !im.is_finite()) {
        return Err(literal("observable", text, "non-finite coefficient"));
    }
    Ok(TrigPolynomial::from_triples(&triples))
}

pub fn parse_angle(text: &str) -> Result<Angle, ConfigError> {
    text.parse().map_err(|e| literal("angle", text, e))
}

pub fn parse_set(text: &str) -> Result<CircleSet, ConfigError> {
    text.parse().map_err(|e| literal("set", text, e))
}

impl Flags {
    /// Reads a JSON config file.
    pub fn from_json_file(path: &Path) -> Result<Flags, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::File {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| ConfigError::File {
            path: path.to_path_buf(),
            reason: format!("invalid config: {e}"),
        })
    }

    /// Fields set in `self` win over those in `base`.
    pub fn overriding(self, base: Flags) -> Flags {
        Flags {
            kind: self.kind.or(base.kind),
            a: self.a.or(base.a),
            seed: self.seed.or(base.seed),
            seeds: self.seeds.or(base.seeds),
            nmax: self.nmax.or(base.nmax),
            gamma: self.gamma.or(base.gamma),
            k: self.k.or(base.k),
            b: self.b.or(base.b),
            alpha: self.alpha.or(base.alpha),
            beta: self.beta.or(base.beta),
            f: self.f.or(base.f),
            g: self.g.or(base.g),
            set: self.set.or(base.set),
            out: self.out.or(base.out),
            force: self.force || base.force,
            checkpoint_ratio: self.checkpoint_ratio.or(base.checkpoint_ratio),
            instances: self.instances.or(base.instances),
            config: self.config.or(base.config),
        }
    }

    pub fn validate(self) -> Result<ExperimentConfig, ConfigError> {
        let kind = self.kind.ok_or(ConfigError::MissingKind)?;
        let a = match kind.eligible_range() {
            None => None,
            Some((lo, hi)) => {
                let a = self.a.ok_or(ConfigError::Missing { kind, field: "a" })?;
                if !(a > 0.0 && a < 1.0) {
                    return Err(ConfigError::InvalidExponent(a));
                }
                if !(a > lo && a < hi) && !self.force {
                    return Err(ConfigError::OutOfRange { kind, a, lo, hi });
                }
                Some(a)
            }
        };
        let seeds = match (&self.seeds, self.seed) {
            (Some(s), _) => parse_seeds(s)?,
            (None, Some(s)) => vec![s],
            (None, None) => (1..=20).collect(),
        };
        let checkpoint_ratio = self.checkpoint_ratio.unwrap_or(1.25);
        if !(checkpoint_ratio > 1.0) {
            return Err(ConfigError::Invalid(format!(
                "checkpoint ratio must exceed 1, got {checkpoint_ratio}"
            )));
        }
        let gamma = self.gamma.unwrap_or(2.0);
        if !(gamma > 1.0) {
            return Err(ConfigError::Invalid(format!("gamma must exceed 1, got {gamma}")));
        }
        let b = self.b.unwrap_or(0.5);
        if !(b > 0.0 && b < 1.0) {
            return Err(ConfigError::Invalid(format!("b must lie in (0, 1), got {b}")));
        }
        let n_max = self.nmax.unwrap_or(kind.default_nmax());
        let needs_n = !matches!(kind, Kind::TailMain | Kind::TailAp | Kind::Report);
        if needs_n && n_max == 0 {
            return Err(ConfigError::Invalid("nmax must be positive".into()));
        }
        Ok(ExperimentConfig {
            kind,
            a,
            seeds,
            n_max,
            checkpoint_ratio,
            gamma,
            k_max: self.k.unwrap_or(20),
            b,
            alpha: parse_angle(self.alpha.as_deref().unwrap_or("sqrt2m1"))?,
            beta: parse_angle(self.beta.as_deref().unwrap_or("goldenm1"))?,
            f: parse_observable(self.f.as_deref().unwrap_or(DEFAULT_OBSERVABLE))?,
            g: parse_observable(self.g.as_deref().unwrap_or(DEFAULT_OBSERVABLE))?,
            set: parse_set(self.set.as_deref().unwrap_or(DEFAULT_SET))?,
            instances: self.instances.unwrap_or(10_000),
            out: self.out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            force: self.force,
        })
    }
}

/// Merges the command line with an optional `--config` file and validates.
pub fn parse_config(cli: Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut flags = cli.flags;
    if cli.kind.is_some() {
        flags.kind = cli.kind;
    }
    let merged = match flags.config.clone() {
        Some(path) => flags.overriding(Flags::from_json_file(&path)?),
        None => flags,
    };
    merged.validate()
}

/// [`parse_config`] for an argument vector (program name first).
pub fn parse_args<I, T>(args: I) -> anyhow::Result<ExperimentConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    Ok(parse_config(cli)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        std::iter::once("ergolab".to_string())
            .chain(s.split_whitespace().map(str::to_string))
            .collect()
    }

    fn err(s: &str) -> ConfigError {
        parse_args(args(s)).unwrap_err().downcast::<ConfigError>().unwrap()
    }

    #[test]
    fn valid_mixed_config() {
        let c = parse_args(args("avg-mixed --a 0.05 --alpha sqrt2m1 --beta goldenm1 --nmax 100000")).unwrap();
        assert_eq!(c.kind, Kind::AvgMixed);
        assert_eq!(c.a, Some(0.05));
        assert_eq!(c.n_max, 100_000);
        assert_eq!(c.seeds, (1..=20).collect::<Vec<_>>());
        assert_eq!(c.checkpoint_ratio, 1.25);
        assert!(!c.forced());
    }

    #[test]
    fn range_guard() {
        assert!(matches!(err("avg-mixed --a 0.2"), ConfigError::OutOfRange { .. }));
        let c = parse_args(args("avg-mixed --a 0.2 --force")).unwrap();
        assert!(c.forced());
        assert!(parse_args(args("trig-sup --a 0.3 --nmax 8192")).is_ok());
        assert!(matches!(err("pair-sum --a 0.2"), ConfigError::OutOfRange { .. }));
        assert!(matches!(
            err("gen-seq --a 1.5 --force"),
            ConfigError::InvalidExponent(_)
        ));
        assert!(matches!(err("slln"), ConfigError::Missing { field: "a", .. }));
        assert!(parse_args(args("vdc-check")).is_ok());
    }

    #[test]
    fn unknown_kind_and_bad_literals() {
        assert!(parse_args(args("frobnicate --a 0.1")).is_err());
        assert!(matches!(
            err("avg-mixed --a 0.05 --alpha tau"),
            ConfigError::Literal { what: "angle", .. }
        ));
        assert!(matches!(
            err("avg-mixed --a 0.05 --set [0.5,0.2)"),
            ConfigError::Literal { what: "set", .. }
        ));
        assert!(matches!(
            err("avg-mixed --a 0.05 --f [[1,2]]"),
            ConfigError::Literal { what: "observable", .. }
        ));
        assert!(matches!(
            err("gen-seq --a 0.3 --seeds 5..2"),
            ConfigError::Literal { .. }
        ));
        assert!(matches!(
            parse_config(Cli {
                kind: None,
                flags: Flags::default()
            }),
            Err(ConfigError::MissingKind)
        ));
    }

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("1..3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_seeds("4, 9").unwrap(), vec![4, 9]);
        assert_eq!(parse_seeds("7").unwrap(), vec![7]);
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn json_config_is_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"kind": "slln", "a": 0.3, "nmax": 5000, "seeds": "1..3", "f": "[[2, 1, 0]]"}"#,
        )
        .unwrap();
        let c = parse_args(args(&format!("--config {} --nmax 7000", path.display()))).unwrap();
        assert_eq!(c.kind, Kind::Slln);
        assert_eq!(c.n_max, 7000);
        assert_eq!(c.seeds, vec![1, 2, 3]);
        assert_eq!(c.f.degree(), 2);
        std::fs::write(&path, r#"{"kind": "slln", "bogus": 1}"#).unwrap();
        assert!(matches!(
            parse_args(args(&format!("--config {}", path.display())))
                .unwrap_err()
                .downcast::<ConfigError>()
                .unwrap(),
            ConfigError::File { .. }
        ));
    }

    #[test]
    fn observable_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.json");
        std::fs::write(&path, "[[0, 1, 0], [-1, 0, 2]]").unwrap();
        let f = parse_observable(path.to_str().unwrap()).unwrap();
        assert_eq!(f.support_len(), 2);
        assert!(matches!(
            parse_observable("/nonexistent/f.json"),
            Err(ConfigError::File { .. })
        ));
    }
}
