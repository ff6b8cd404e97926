//! Lexicographic orderings of a free-abelian group.

use std::sync::Arc;

use super::{Oracle, Sign, Validity};
use crate::error::{Error, Result};
use crate::group::{FreeProduct, Group, Word};

/// Sign of the first nonzero coordinate, read in the order `perm`, flipped where `negate` is set.
pub struct LexOracle {
    group: Arc<FreeProduct>,
    perm: Vec<usize>,
    negate: Vec<bool>,
}

impl LexOracle {
    pub fn new(group: Arc<FreeProduct>, perm: Option<Vec<usize>>, negate: Option<Vec<bool>>) -> Result<Self> {
        if group.factor_count() != 1 {
            return Err(Error::Unsupported("lexicographic ordering needs a single free-abelian factor".into()));
        }
        let p = group.rank();
        let perm = perm.unwrap_or_else(|| (0..p).collect());
        let mut seen = perm.clone();
        seen.sort_unstable();
        if seen != (0..p).collect::<Vec<_>>() {
            return Err(Error::Invalid(format!("`{perm:?}` is not a permutation of 0..{p}")));
        }
        let negate = negate.unwrap_or_else(|| vec![false; p]);
        if negate.len() != p {
            return Err(Error::Invalid("sign pattern length differs from the rank".into()));
        }
        Ok(LexOracle { group, perm, negate })
    }

    pub fn sign_of_exponents(&self, exps: &[i64]) -> Sign {
        for &c in &self.perm {
            let e = exps[c];
            if e != 0 {
                let s = Sign::from_int(e as i128);
                return if self.negate[c] { s.negate() } else { s };
            }
        }
        Sign::Zero
    }
}

impl Oracle<FreeProduct> for LexOracle {
    fn group(&self) -> &FreeProduct {
        &self.group
    }
    fn sign(&self, w: &Word) -> Result<Sign> {
        Ok(match w.syllables() {
            [] => Sign::Zero,
            [s] => self.sign_of_exponents(&s.exps),
            _ => unreachable!("single-factor words have one syllable"),
        })
    }
    fn validity(&self) -> Validity {
        Validity::Infinite
    }
    fn describe(&self) -> String {
        let mut d = "lex".to_string();
        if self.perm.iter().enumerate().any(|(i, &c)| i != c) {
            let p: Vec<String> = self.perm.iter().map(|c| c.to_string()).collect();
            d += &format!(":perm={}", p.join(","));
        }
        let neg: Vec<&str> =
            self.group.names().iter().zip(&self.negate).filter(|(_, &n)| n).map(|(n, _)| n.as_str()).collect();
        if !neg.is_empty() {
            d += &format!(":neg={}", neg.join(","));
        }
        d
    }
}
