//! Normal forms in free products of free-abelian groups `Z^{p_1} * ... * Z^{p_k}`.

use serde::{Deserialize, Serialize};

use super::{parse_letters, Group, Letter};
use crate::error::{Error, Result};

/// Factor ranks plus one name per generator, numbered across factors in order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub factors: Vec<u32>,
    pub names: Vec<String>,
}

fn default_names(count: usize) -> Vec<String> {
    (0..count).map(|i| if i < 26 { ((b'a' + i as u8) as char).to_string() } else { format!("g{i}") }).collect()
}

impl GroupSpec {
    pub fn new(factors: Vec<u32>) -> Result<Self> {
        let total = factors.iter().map(|&r| r as usize).sum();
        let spec = GroupSpec { factors, names: default_names(total) };
        spec.validate()?;
        Ok(spec)
    }

    pub fn free(n: u32) -> Self {
        GroupSpec::new(vec![1; n as usize]).expect("free group spec")
    }

    pub fn free_abelian(p: u32) -> Self {
        GroupSpec::new(vec![p]).expect("free abelian spec")
    }

    pub fn validate(&self) -> Result<()> {
        if self.factors.is_empty() {
            return Err(Error::Invalid("group needs at least one factor".into()));
        }
        if self.factors.contains(&0) {
            return Err(Error::Invalid("factor ranks must be at least 1".into()));
        }
        let total: usize = self.factors.iter().map(|&r| r as usize).sum();
        if self.names.len() != total {
            return Err(Error::Invalid(format!("expected {total} generator names, got {}", self.names.len())));
        }
        for (i, n) in self.names.iter().enumerate() {
            if n.is_empty() || n == "id" || n.contains(['.', '^', ' ', ',']) {
                return Err(Error::Invalid(format!("bad generator name `{n}`")));
            }
            if self.names[..i].contains(n) {
                return Err(Error::Invalid(format!("duplicate generator name `{n}`")));
            }
        }
        Ok(())
    }

    /// `F2`, `F3`, `Z`, `Z^2`, `Z*Z`, `Z^2*Z`, ...
    pub fn parse_short(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(n) = s.strip_prefix('F') {
            let n: u32 = n.parse().map_err(|_| Error::Parse(format!("bad group `{s}`")))?;
            if n == 0 {
                return Err(Error::Invalid("F0 is trivial".into()));
            }
            return Ok(GroupSpec::free(n));
        }
        let mut factors = Vec::new();
        for part in s.split('*') {
            let part = part.trim();
            let rank = match part {
                "Z" => 1,
                p => p
                    .strip_prefix("Z^")
                    .and_then(|r| r.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("bad factor `{p}` in `{s}`")))?,
            };
            factors.push(rank);
        }
        GroupSpec::new(factors)
    }

    pub fn short_name(&self) -> String {
        if self.factors.iter().all(|&r| r == 1) && self.factors.len() > 1 {
            return format!("F{}", self.factors.len());
        }
        self.factors
            .iter()
            .map(|&r| if r == 1 { "Z".to_string() } else { format!("Z^{r}") })
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// A non-identity element of one factor, stored as its exponent vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable {
    pub factor: u32,
    pub exps: Vec<i64>,
}

impl Syllable {
    pub fn length(&self) -> usize {
        self.exps.iter().map(|e| e.unsigned_abs() as usize).sum()
    }

    fn is_trivial(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    fn inverse(&self) -> Syllable {
        Syllable { factor: self.factor, exps: self.exps.iter().map(|e| -e).collect() }
    }
}

/// Reduced word: alternating non-trivial syllables. Empty means the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    syllables: Vec<Syllable>,
}

impl Word {
    pub fn id() -> Self {
        Word::default()
    }

    /// Builds a word from syllables, reducing as needed.
    pub fn from_syllables(syllables: impl IntoIterator<Item = Syllable>) -> Self {
        let mut stack = Vec::new();
        for s in syllables {
            Word::push(&mut stack, s);
        }
        Word { syllables: stack }
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_id(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Word length over the standard symmetric generating set (ℓ¹ per syllable).
    pub fn length(&self) -> usize {
        self.syllables.iter().map(Syllable::length).sum()
    }

    fn push(stack: &mut Vec<Syllable>, s: Syllable) {
        if let Some(top) = stack.last_mut() {
            if top.factor == s.factor {
                for (a, b) in top.exps.iter_mut().zip(&s.exps) {
                    *a += b;
                }
                if top.is_trivial() {
                    stack.pop();
                }
                return;
            }
        }
        if !s.is_trivial() {
            stack.push(s);
        }
    }
}

/// `Z^{p_1} * ... * Z^{p_k}` with the normal form above.
#[derive(Clone, Debug)]
pub struct FreeProduct {
    spec: GroupSpec,
    // generator index -> (factor, coordinate)
    gen_pos: Vec<(u32, usize)>,
    offsets: Vec<u32>,
}

impl FreeProduct {
    pub fn new(spec: GroupSpec) -> Result<Self> {
        spec.validate()?;
        let mut gen_pos = Vec::new();
        let mut offsets = Vec::new();
        for (f, &r) in spec.factors.iter().enumerate() {
            offsets.push(gen_pos.len() as u32);
            for c in 0..r as usize {
                gen_pos.push((f as u32, c));
            }
        }
        Ok(FreeProduct { spec, gen_pos, offsets })
    }

    pub fn free(n: u32) -> Self {
        FreeProduct::new(GroupSpec::free(n)).expect("free group")
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn factor_count(&self) -> usize {
        self.spec.factors.len()
    }

    pub fn factor_of(&self, gen: u32) -> u32 {
        self.gen_pos[gen as usize].0
    }

    pub fn factor_generators(&self, factor: u32) -> impl Iterator<Item = u32> + '_ {
        let off = self.offsets[factor as usize];
        off..off + self.spec.factors[factor as usize]
    }

    pub fn is_free_group(&self) -> bool {
        self.spec.factors.iter().all(|&r| r == 1)
    }

    fn letter_syllable(&self, l: Letter) -> Syllable {
        let (f, c) = self.gen_pos[l.gen as usize];
        let mut exps = vec![0; self.spec.factors[f as usize] as usize];
        exps[c] = if l.inv { -1 } else { 1 };
        Syllable { factor: f, exps }
    }

    /// Reduces a raw letter sequence to normal form.
    pub fn normalize(&self, raw: &[Letter]) -> Result<Word> {
        let mut stack = Vec::new();
        for &l in raw {
            if l.gen as usize >= self.gen_pos.len() {
                return Err(Error::UnknownGenerator(format!("#{}", l.gen)));
            }
            Word::push(&mut stack, self.letter_syllable(l));
        }
        Ok(Word { syllables: stack })
    }

    /// Letters of a syllable: positive coordinates ascending, then negative ones descending,
    /// so that the spelling of an inverse is the reversed, inverted spelling.
    fn syllable_letters(&self, s: &Syllable, out: &mut Vec<Letter>) {
        let off = self.offsets[s.factor as usize];
        for (c, &e) in s.exps.iter().enumerate() {
            if e > 0 {
                out.extend(std::iter::repeat_n(Letter::pos(off + c as u32), e as usize));
            }
        }
        for (c, &e) in s.exps.iter().enumerate().rev() {
            if e < 0 {
                out.extend(std::iter::repeat_n(Letter::neg(off + c as u32), (-e) as usize));
            }
        }
    }

    pub fn letters(&self, w: &Word) -> Vec<Letter> {
        let mut out = Vec::with_capacity(w.length());
        for s in &w.syllables {
            self.syllable_letters(s, &mut out);
        }
        out
    }

    /// The automorphism inverting every generator with `mask[gen]` set.
    pub fn negate_generators(&self, w: &Word, mask: &[bool]) -> Word {
        Word::from_syllables(w.syllables.iter().map(|s| {
            let off = self.offsets[s.factor as usize] as usize;
            let exps = s
                .exps
                .iter()
                .enumerate()
                .map(|(c, &e)| if mask.get(off + c).copied().unwrap_or(false) { -e } else { e })
                .collect();
            Syllable { factor: s.factor, exps }
        }))
    }

    pub fn parse_word(&self, s: &str) -> Result<Word> {
        self.normalize(&parse_letters(&self.spec.names, s)?)
    }
}

impl Group for FreeProduct {
    type Elem = Word;

    fn identity(&self) -> Word {
        Word::id()
    }

    fn names(&self) -> &[String] {
        &self.spec.names
    }

    fn letter(&self, l: Letter) -> Word {
        Word { syllables: vec![self.letter_syllable(l)] }
    }

    fn mul(&self, a: &Word, b: &Word) -> Word {
        let mut stack = a.syllables.clone();
        for s in &b.syllables {
            Word::push(&mut stack, s.clone());
        }
        Word { syllables: stack }
    }

    fn inv(&self, a: &Word) -> Word {
        Word { syllables: a.syllables.iter().rev().map(Syllable::inverse).collect() }
    }

    fn describe(&self) -> String {
        self.spec.short_name()
    }

    fn spell(&self, a: &Word) -> Option<Vec<Letter>> {
        Some(self.letters(a))
    }

    fn length(&self, a: &Word) -> Option<usize> {
        Some(a.length())
    }

    fn multiply_letters(&self, letters: &[Letter]) -> Word {
        self.normalize(letters).expect("letters belong to the group")
    }

    fn parse(&self, s: &str) -> Result<Word> {
        self.parse_word(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f2() -> FreeProduct {
        FreeProduct::free(2)
    }

    fn w(g: &FreeProduct, s: &str) -> Word {
        g.parse_word(s).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let g = f2();
        assert!(w(&g, "a.a^-1").is_id());
        let x = w(&g, "a.b.b^-1.a");
        assert_eq!(g.format(&x), "a^2");
        assert_eq!(x.syllables().len(), 1);
        let y = w(&g, "a.b.a^-1");
        assert_eq!(y.syllables().len(), 3);
        assert_eq!(y.length(), 3);
        assert!(matches!(g.parse_word("a.q"), Err(Error::UnknownGenerator(_))));
    }

    #[test]
    fn multiply_and_invert_examples() {
        let g = f2();
        assert!(g.mul(&w(&g, "a"), &w(&g, "a^-1")).is_id());
        assert_eq!(g.format(&g.inv(&w(&g, "a.b"))), "b^-1.a^-1");
        assert_eq!(g.format(&g.mul(&w(&g, "a.b"), &w(&g, "b^-1.a"))), "a^2");
    }

    #[test]
    fn abelian_factor_merges() {
        let g = FreeProduct::new(GroupSpec::new(vec![2, 1]).unwrap()).unwrap();
        let x = w(&g, "b.a.c.a^-1.c^-1.b^-1");
        assert_eq!(x.length(), 6);
        let y = w(&g, "b.a.a^-1.b^-1.a");
        assert_eq!(g.format(&y), "a");
        // ab = ba inside Z^2
        assert_eq!(w(&g, "a.b"), w(&g, "b.a"));
        assert_eq!(g.format(&w(&g, "b^-1.a")), "a.b^-1");
    }

    #[test]
    fn spelling_of_inverse_is_reversed() {
        let g = FreeProduct::new(GroupSpec::new(vec![3, 1]).unwrap()).unwrap();
        let x = w(&g, "a.b^-2.c.d.a^-1.c^-1");
        let sx = g.letters(&x);
        let si = g.letters(&g.inv(&x));
        let rev: Vec<Letter> = sx.iter().rev().map(|l| l.inverse()).collect();
        assert_eq!(si, rev);
    }

    #[test]
    fn short_names() {
        assert_eq!(GroupSpec::parse_short("F2").unwrap(), GroupSpec::free(2));
        assert_eq!(GroupSpec::parse_short("Z*Z").unwrap(), GroupSpec::free(2));
        assert_eq!(GroupSpec::parse_short("Z^2*Z").unwrap().factors, vec![2, 1]);
        assert_eq!(GroupSpec::parse_short("Z^2*Z").unwrap().short_name(), "Z^2*Z");
        assert!(GroupSpec::parse_short("Q").is_err());
        let json = serde_json::to_string(&GroupSpec::free(2)).unwrap();
        assert_eq!(json, r#"{"factors":[1,1],"names":["a","b"]}"#);
    }

    fn raw_letters(n_gens: u32) -> impl Strategy<Value = Vec<Letter>> {
        prop::collection::vec((0..n_gens, any::<bool>()), 0..12)
            .prop_map(|v| v.into_iter().map(|(gen, inv)| Letter { gen, inv }).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 256, rng_seed: prop::test_runner::RngSeed::Fixed(7), ..ProptestConfig::default() })]

        #[test]
        fn normalize_is_idempotent_and_shrinking(raw in raw_letters(3)) {
            let g = FreeProduct::new(GroupSpec::new(vec![2, 1]).unwrap()).unwrap();
            let x = g.normalize(&raw).unwrap();
            prop_assert!(x.length() <= raw.len());
            prop_assert_eq!(g.normalize(&g.letters(&x)).unwrap(), x.clone());
            prop_assert!(g.mul(&x, &g.inv(&x)).is_id());
        }

        #[test]
        fn multiplication_is_associative(a in raw_letters(2), b in raw_letters(2), c in raw_letters(2)) {
            let g = f2();
            let (a, b, c) = (g.multiply_letters(&a), g.multiply_letters(&b), g.multiply_letters(&c));
            prop_assert_eq!(g.mul(&g.mul(&a, &b), &c), g.mul(&a, &g.mul(&b, &c)));
        }
    }
}
