//! The Magnus ordering, extended to free products of free-abelian groups.
//!
//! Each generator `x` maps to `1 + X` in the ring of power series whose variables commute exactly
//! when their generators lie in the same factor. A word is positive when the first nonzero
//! coefficient of its expansion minus one is positive, monomials ordered by degree and then
//! lexicographically by generator index. For free groups this is the classical Magnus ordering.

use std::collections::HashMap;
use std::sync::Arc;

use super::{Oracle, Sign, Validity};
use crate::error::{Error, Result};
use crate::group::{FreeProduct, Group, Letter, Word};

/// A monomial in normal form: maximal same-factor runs, each sorted.
type Mono = Vec<u8>;

struct Expander {
    factor: Vec<u32>,
}

impl Expander {
    fn new(g: &FreeProduct) -> Self {
        Expander { factor: (0..g.rank() as u32).map(|i| g.factor_of(i)).collect() }
    }

    fn append(&self, m: &Mono, x: u8, times: usize) -> Mono {
        let mut out = m.clone();
        let f = self.factor[x as usize];
        for _ in 0..times {
            let start = out.iter().rposition(|&y| self.factor[y as usize] != f).map_or(0, |p| p + 1);
            let at = start + out[start..].partition_point(|&y| y <= x);
            out.insert(at, x);
        }
        out
    }

    /// Expansion of the letters (left to right) truncated beyond degree `d`.
    fn expand(&self, letters: &[Letter], d: usize) -> HashMap<Mono, i128> {
        let mut acc: HashMap<Mono, i128> = HashMap::new();
        acc.insert(Vec::new(), 1);
        for l in letters {
            let x = l.gen as u8;
            let mut next: HashMap<Mono, i128> = HashMap::with_capacity(acc.len() * 2);
            for (m, &c) in &acc {
                *next.entry(m.clone()).or_insert(0) += c;
                let room = d - m.len();
                if l.inv {
                    // 1 - X + X² - ...
                    for k in 1..=room {
                        let coef = if k % 2 == 1 { -c } else { c };
                        *next.entry(self.append(m, x, k)).or_insert(0) += coef;
                    }
                } else if room >= 1 {
                    *next.entry(self.append(m, x, 1)).or_insert(0) += c;
                }
            }
            next.retain(|_, c| *c != 0);
            acc = next;
        }
        acc
    }
}

fn leading(series: &HashMap<Mono, i128>) -> Option<(&Mono, i128)> {
    series
        .iter()
        .filter(|(m, _)| !m.is_empty())
        .min_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(b.0)))
        .map(|(m, &c)| (m, c))
}

/// Sign of `w` in the Magnus ordering. With `degree = None` the truncation is raised from 1 up to
/// `max(2|w|, 1)`; a fixed degree is used as given. Fails rather than guesses when the truncated
/// expansion of a non-identity word is trivial.
pub fn magnus_sign(g: &FreeProduct, w: &Word, degree: Option<usize>) -> Result<Sign> {
    if w.is_id() {
        return Ok(Sign::Zero);
    }
    let letters = g.letters(w);
    let ex = Expander::new(g);
    let top = degree.unwrap_or_else(|| (2 * letters.len()).max(1));
    let start = degree.unwrap_or(1);
    for d in start..=top {
        if let Some((_, c)) = leading(&ex.expand(&letters, d)) {
            return Ok(Sign::from_int(c));
        }
    }
    Err(Error::TruncationTooSmall { word: g.format(w), degree: top })
}

/// The truncated expansion as `monomial → coefficient`, monomials rendered over capitalized
/// generator names; for inspection and tests.
pub fn expansion(g: &FreeProduct, w: &Word, d: usize) -> Vec<(String, i128)> {
    let ex = Expander::new(g);
    let mut out: Vec<(Mono, i128)> = ex.expand(&g.letters(w), d).into_iter().collect();
    out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
    out.into_iter()
        .map(|(m, c)| {
            let name = if m.is_empty() {
                "1".to_string()
            } else {
                m.iter().map(|&x| g.names()[x as usize].to_uppercase()).collect::<Vec<_>>().join("")
            };
            (name, c)
        })
        .collect()
}

/// Exact global oracle (validity ∞).
pub struct MagnusOracle {
    group: Arc<FreeProduct>,
}

impl MagnusOracle {
    pub fn new(group: Arc<FreeProduct>) -> Self {
        MagnusOracle { group }
    }
}

impl Oracle<FreeProduct> for MagnusOracle {
    fn group(&self) -> &FreeProduct {
        &self.group
    }
    fn sign(&self, w: &Word) -> Result<Sign> {
        magnus_sign(&self.group, w, None)
    }
    fn validity(&self) -> Validity {
        Validity::Infinite
    }
    fn describe(&self) -> String {
        "magnus".into()
    }
}
