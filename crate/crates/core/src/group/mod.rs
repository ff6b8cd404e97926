//! Groups given by generators, with ball enumeration.

mod word;

pub use word::{FreeProduct, GroupSpec, Syllable, Word};

use std::collections::{HashMap, HashSet};
use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A generator or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub gen: u32,
    pub inv: bool,
}

impl Letter {
    pub fn pos(gen: u32) -> Self {
        Letter { gen, inv: false }
    }

    pub fn neg(gen: u32) -> Self {
        Letter { gen, inv: true }
    }

    pub fn inverse(self) -> Self {
        Letter { gen: self.gen, inv: !self.inv }
    }

    /// Order key: a, a⁻¹, b, b⁻¹, ...
    pub fn key(self) -> u64 {
        2 * self.gen as u64 + self.inv as u64
    }
}

/// A finitely generated group with a computable normal form.
pub trait Group: Send + Sync {
    type Elem: Clone + Eq + Hash + Debug + Send + Sync;

    fn identity(&self) -> Self::Elem;
    fn names(&self) -> &[String];
    fn letter(&self, l: Letter) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    fn describe(&self) -> String;

    /// A canonical geodesic spelling, when the model has one.
    fn spell(&self, _a: &Self::Elem) -> Option<Vec<Letter>> {
        None
    }

    /// Word length over the generators and their inverses, when computable.
    fn length(&self, a: &Self::Elem) -> Option<usize> {
        self.spell(a).map(|l| l.len())
    }

    fn rank(&self) -> usize {
        self.names().len()
    }

    fn is_identity(&self, a: &Self::Elem) -> bool {
        *a == self.identity()
    }

    fn multiply_letters(&self, letters: &[Letter]) -> Self::Elem {
        letters.iter().fold(self.identity(), |acc, &l| self.mul(&acc, &self.letter(l)))
    }

    fn parse(&self, s: &str) -> Result<Self::Elem> {
        Ok(self.multiply_letters(&parse_letters(self.names(), s)?))
    }

    fn format(&self, a: &Self::Elem) -> String {
        match self.spell(a) {
            Some(l) => format_letters(self.names(), &l),
            None => format!("{a:?}"),
        }
    }

    /// `u⁻¹v`: the element whose sign decides `u` versus `v`.
    fn quotient(&self, u: &Self::Elem, v: &Self::Elem) -> Self::Elem {
        self.mul(&self.inv(u), v)
    }

    fn conjugate(&self, gamma: &Self::Elem, w: &Self::Elem) -> Self::Elem {
        self.mul(&self.mul(gamma, w), &self.inv(gamma))
    }
}

/// Renders letters as `a^2.b^-1.a`; the empty word is `id`.
pub fn format_letters(names: &[String], letters: &[Letter]) -> String {
    if letters.is_empty() {
        return "id".to_string();
    }
    let mut parts = Vec::new();
    let mut i = 0;
    while i < letters.len() {
        let l = letters[i];
        let mut j = i;
        while j < letters.len() && letters[j] == l {
            j += 1;
        }
        let e = (j - i) as i64 * if l.inv { -1 } else { 1 };
        let name = &names[l.gen as usize];
        parts.push(if e == 1 { name.clone() } else { format!("{name}^{e}") });
        i = j;
    }
    parts.join(".")
}

/// Parses `a^2.b^-1.a` into letters (no reduction). `id`, `1` and the empty string are the identity.
pub fn parse_letters(names: &[String], s: &str) -> Result<Vec<Letter>> {
    let s = s.trim();
    if s.is_empty() || s == "id" || s == "1" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for tok in s.split('.') {
        let tok = tok.trim();
        let (name, exp) = match tok.split_once('^') {
            Some((n, e)) => {
                let e: i64 = e.trim().parse().map_err(|_| Error::Parse(format!("bad exponent in `{tok}`")))?;
                (n.trim(), e)
            }
            None => (tok, 1),
        };
        let gen = names.iter().position(|n| n == name).ok_or_else(|| Error::UnknownGenerator(name.to_string()))? as u32;
        let l = if exp < 0 { Letter::neg(gen) } else { Letter::pos(gen) };
        out.extend(std::iter::repeat_n(l, exp.unsigned_abs() as usize));
    }
    Ok(out)
}

fn spelling_cmp(a: &[Letter], b: &[Letter]) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.iter().map(|l| l.key()).cmp(b.iter().map(|l| l.key())))
}

/// A ball `B_S(r)`: generator subset `S` (inverses implied) and radius `r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BallSpec {
    pub generators: Vec<u32>,
    pub radius: u32,
}

impl BallSpec {
    pub fn new(mut generators: Vec<u32>, radius: u32) -> Self {
        generators.sort_unstable();
        generators.dedup();
        BallSpec { generators, radius }
    }

    pub fn full<G: Group + ?Sized>(g: &G, radius: u32) -> Self {
        BallSpec::new((0..g.rank() as u32).collect(), radius)
    }

    pub fn with_radius(&self, radius: u32) -> Self {
        BallSpec { generators: self.generators.clone(), radius }
    }

    pub fn letters(&self) -> Vec<Letter> {
        self.generators.iter().flat_map(|&g| [Letter::pos(g), Letter::neg(g)]).collect()
    }

    pub fn contains_generator(&self, gen: u32) -> bool {
        self.generators.binary_search(&gen).is_ok()
    }

    pub fn validate<G: Group + ?Sized>(&self, g: &G) -> Result<()> {
        if self.generators.is_empty() {
            return Err(Error::Invalid("ball needs at least one generator".into()));
        }
        if let Some(&bad) = self.generators.iter().find(|&&x| x as usize >= g.rank()) {
            return Err(Error::Invalid(format!("generator index {bad} out of range")));
        }
        Ok(())
    }
}

/// Spheres of the Cayley graph around `id`, in canonical order, one per call.
pub struct Spheres<'g, G: Group> {
    group: &'g G,
    letters: Vec<Letter>,
    prev: HashSet<G::Elem>,
    cur: Vec<(G::Elem, Vec<Letter>)>,
    started: bool,
}

impl<'g, G: Group> Spheres<'g, G> {
    pub fn new(group: &'g G, generators: &[u32]) -> Self {
        let letters = BallSpec::new(generators.to_vec(), 0).letters();
        Spheres { group, letters, prev: HashSet::new(), cur: Vec::new(), started: false }
    }
}

impl<'g, G: Group> Iterator for Spheres<'g, G> {
    type Item = Vec<(G::Elem, Vec<Letter>)>;

    fn next(&mut self) -> Option<Self::Item> {
        if !self.started {
            self.started = true;
            self.cur = vec![(self.group.identity(), Vec::new())];
            return Some(self.cur.clone());
        }
        let cur_set: HashSet<G::Elem> = self.cur.iter().map(|(e, _)| e.clone()).collect();
        let mut fresh: HashMap<G::Elem, Vec<Letter>> = HashMap::new();
        for (w, sp) in &self.cur {
            for &l in &self.letters {
                let e = self.group.mul(&self.group.letter(l), w);
                if self.prev.contains(&e) || cur_set.contains(&e) {
                    continue;
                }
                let mut cand = Vec::with_capacity(sp.len() + 1);
                cand.push(l);
                cand.extend_from_slice(sp);
                match fresh.get_mut(&e) {
                    Some(best) if spelling_cmp(&cand, best).is_lt() => *best = cand,
                    Some(_) => {}
                    None => {
                        fresh.insert(e, cand);
                    }
                }
            }
        }
        let mut next: Vec<(G::Elem, Vec<Letter>)> = fresh
            .into_iter()
            .map(|(e, sp)| {
                let sp = self.group.spell(&e).unwrap_or(sp);
                (e, sp)
            })
            .collect();
        next.sort_by(|a, b| spelling_cmp(&a.1, &b.1));
        self.prev = cur_set;
        self.cur = next;
        if self.cur.is_empty() {
            None
        } else {
            Some(self.cur.clone())
        }
    }
}

pub const DEFAULT_BALL_CAP: usize = 500_000;

/// The elements of a ball with their canonical spellings, in length-then-lexicographic order.
#[derive(Clone, Debug)]
pub struct Ball<E: Clone + Eq + Hash> {
    pub spec: BallSpec,
    elems: Vec<E>,
    spellings: Vec<Vec<Letter>>,
    index: HashMap<E, usize>,
}

impl<E: Clone + Eq + Hash> Ball<E> {
    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> &[E] {
        &self.elems
    }

    pub fn get(&self, i: usize) -> &E {
        &self.elems[i]
    }

    pub fn spelling(&self, i: usize) -> &[Letter] {
        &self.spellings[i]
    }

    pub fn word_length(&self, i: usize) -> usize {
        self.spellings[i].len()
    }

    pub fn position(&self, e: &E) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn contains(&self, e: &E) -> bool {
        self.index.contains_key(e)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &E)> {
        self.elems.iter().enumerate()
    }

    /// Indices of the elements of length at most `r`; a prefix since the order is by length.
    pub fn prefix_len(&self, r: u32) -> usize {
        self.spellings.partition_point(|s| s.len() <= r as usize)
    }
}

pub fn ball<G: Group>(g: &G, spec: &BallSpec) -> Result<Ball<G::Elem>> {
    ball_capped(g, spec, DEFAULT_BALL_CAP)
}

pub fn ball_capped<G: Group>(g: &G, spec: &BallSpec, cap: usize) -> Result<Ball<G::Elem>> {
    spec.validate(g)?;
    let mut elems = Vec::new();
    let mut spellings = Vec::new();
    for sphere in Spheres::new(g, &spec.generators).take(spec.radius as usize + 1) {
        if elems.len() + sphere.len() > cap {
            return Err(Error::CapExceeded { what: "ball size", cap });
        }
        for (e, sp) in sphere {
            elems.push(e);
            spellings.push(sp);
        }
    }
    let index = elems.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
    Ok(Ball { spec: spec.clone(), elems, spellings, index })
}

/// Rank marker for the ball scheme: a finite rank `n ≥ 2` or countable rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeRank {
    Finite(u32),
    Omega,
}

impl std::str::FromStr for SchemeRank {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "omega" | "ω" | "w" => Ok(SchemeRank::Omega),
            t => t.parse().map(SchemeRank::Finite).map_err(|_| Error::Parse(format!("bad rank `{s}`"))),
        }
    }
}

/// The enumeration of balls of `F_n`: `B_{S_n}(m)` for finite `n`, `B_{S_{m+1}}(m+1)` for `ω`.
///
/// Generator `0` is `a`, `1` is `b`, and `2..` are the extra free generators; `S_k` is the first `k`.
pub fn ball_scheme(n: SchemeRank, m: u32) -> Result<BallSpec> {
    if m < 1 {
        return Err(Error::Invalid("ball scheme index m must be at least 1".into()));
    }
    let (k, radius) = match n {
        SchemeRank::Finite(1) => return Err(Error::Invalid("ball scheme is undefined for rank 1".into())),
        SchemeRank::Finite(0) => return Err(Error::Invalid("rank must be positive".into())),
        SchemeRank::Finite(n) => (n, m),
        SchemeRank::Omega => (m + 1, m + 1),
    };
    Ok(BallSpec::new((0..k).collect(), radius))
}
