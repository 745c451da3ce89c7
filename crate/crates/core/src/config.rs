use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which assertions are compiled into a workload variant.
///
/// Printed as a bit string whose leftmost character is assertion 0, so
/// `"01"` disables assertion 0 and enables assertion 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration(Vec<bool>);

impl Configuration {
    pub fn new(bits: Vec<bool>) -> Self {
        Configuration(bits)
    }

    pub fn all_enabled(n: usize) -> Self {
        Configuration(vec![true; n])
    }

    pub fn all_disabled(n: usize) -> Self {
        Configuration(vec![false; n])
    }

    /// Configuration whose assertion `i` is enabled iff bit `n - 1 - i` of
    /// `code` is set, so that counting `code` upward enumerates bit strings
    /// in lexicographic order.
    pub fn from_index(n: usize, code: u64) -> Self {
        Configuration((0..n).map(|i| code >> (n - 1 - i) & 1 == 1).collect())
    }

    /// All `2^n` configurations in lexicographic bit-string order.
    pub fn enumerate(n: usize) -> impl Iterator<Item = Configuration> {
        assert!(n < 64);
        (0..1u64 << n).map(move |code| Configuration::from_index(n, code))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_enabled(&self, index: usize) -> bool {
        self.0[index]
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn enabled_count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn toggled(&self, index: usize) -> Self {
        let mut bits = self.0.clone();
        bits[index] = !bits[index];
        Configuration(bits)
    }

    pub fn ensure_len(&self, n: usize) -> Result<()> {
        if self.len() == n {
            Ok(())
        } else {
            Err(Error::ConfigLength { expected: n, got: self.len() })
        }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::ConfigSyntax(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()
            .map(Configuration)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leftmost_is_assertion_zero() {
        let c: Configuration = "01".parse().unwrap();
        assert!(!c.is_enabled(0));
        assert!(c.is_enabled(1));
        assert_eq!(c.to_string(), "01");
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let all: Vec<String> = Configuration::enumerate(2).map(|c| c.to_string()).collect();
        assert_eq!(all, ["00", "01", "10", "11"]);
        let empty: Vec<_> = Configuration::enumerate(0).collect();
        assert_eq!(empty, vec![Configuration::new(vec![])]);
    }

    #[test]
    fn rejects_garbage() {
        assert!("01x".parse::<Configuration>().is_err());
        assert_eq!("".parse::<Configuration>().unwrap().len(), 0);
    }
}
