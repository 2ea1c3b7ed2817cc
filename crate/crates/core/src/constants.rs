//! Conformance constants frozen from pilot runs.
//!
//! The values live in `data/constants.txt` as `name = value` lines and are
//! compiled into the crate, so a run can never pick up a re-fitted value.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::{Error, Result};

const SOURCE: &str = include_str!("../data/constants.txt");

/// Parses `name = value` lines, skipping blanks and `#` comments.
pub fn parse(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("constants line {}: missing '='", i + 1)))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("constants line {}: bad value {:?}", i + 1, value.trim())))?;
        if out.insert(name.trim().to_string(), value).is_some() {
            return Err(Error::Parse(format!(
                "constants line {}: duplicate {:?}",
                i + 1,
                name.trim()
            )));
        }
    }
    Ok(out)
}

fn table() -> &'static BTreeMap<String, f64> {
    static TABLE: OnceLock<BTreeMap<String, f64>> = OnceLock::new();
    TABLE.get_or_init(|| parse(SOURCE).expect("bundled constants file is well formed"))
}

pub fn get(name: &str) -> Option<f64> {
    table().get(name).copied()
}

/// Key of the pair-sum constant for exponents `(a, b)`.
pub fn pair_sum_key(a: f64, b: f64) -> String {
    format!("pair_sum.a{a}.b{b}")
}

/// Frozen `C` in `Σ_{m ≤ N^b} Σ_{n ≤ N} X_{n+m} X_n ≤ C · N^{b+1-2a}`.
pub fn pair_sum_constant(a: f64, b: f64) -> Option<f64> {
    get(&pair_sum_key(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_file_parses() {
        assert_eq!(pair_sum_constant(0.1, 0.5), Some(1.5));
        assert_eq!(pair_sum_constant(0.2, 0.5), None);
    }

    #[test]
    fn parse_rejects_malformed_lines() {
        assert!(parse("x 1").is_err());
        assert!(parse("x = one").is_err());
        assert!(parse("x = 1\nx = 2").is_err());
        assert_eq!(parse("# c\n\n y = 2.5 ").unwrap()["y"], 2.5);
    }
}
