//! Finite-scale dynamical realizations and the sign lemma.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{ball, format_letters, Ball, BallSpec, Group, Letter};
use crate::order::{Oracle, Sign, Validity};
use crate::pl::PLMap;
use crate::rational::{self, int, third, Rational};

/// Number of fallback reference points appended after the declared ones.
pub const FALLBACK_REFS: usize = 64;

/// One PL homeomorphism per generator, with cached inverses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    maps: Vec<PLMap>,
    inverses: Vec<PLMap>,
}

impl Action {
    pub fn new(maps: Vec<PLMap>) -> Self {
        let inverses = maps.iter().map(PLMap::inverse).collect();
        Action { maps, inverses }
    }

    pub fn rank(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[PLMap] {
        &self.maps
    }

    pub fn map(&self, l: Letter) -> &PLMap {
        if l.inv {
            &self.inverses[l.gen as usize]
        } else {
            &self.maps[l.gen as usize]
        }
    }

    pub fn set(&mut self, gen: u32, f: PLMap) {
        self.inverses[gen as usize] = f.inverse();
        self.maps[gen as usize] = f;
    }

    /// Sets the map of a letter (setting `s⁻¹` stores the inverse for `s`).
    pub fn set_letter(&mut self, l: Letter, f: PLMap) {
        if l.inv {
            self.set(l.gen, f.inverse());
        } else {
            self.set(l.gen, f);
        }
    }

    /// Image of `x` under the word spelled by `letters` (rightmost letter acts first).
    pub fn eval(&self, letters: &[Letter], x: &Rational) -> Rational {
        letters.iter().rev().fold(x.clone(), |y, &l| self.map(l).eval(&y))
    }

    /// `x` followed by its images along the initial segments of the word, ending at the image.
    pub fn path(&self, letters: &[Letter], x: &Rational) -> Vec<Rational> {
        let mut out = vec![x.clone()];
        for &l in letters.iter().rev() {
            let y = self.map(l).eval(out.last().unwrap());
            out.push(y);
        }
        out
    }

    /// Conjugates every map by `phi`.
    pub fn conjugate(&self, phi: &PLMap) -> Action {
        Action::new(self.maps.iter().map(|f| f.conjugate(phi)).collect())
    }
}

/// Declared references followed by the canonical rational enumeration, without repeats.
pub fn reference_sequence(declared: &[Rational]) -> Vec<Rational> {
    let mut out: Vec<Rational> = declared.to_vec();
    for q in rational::canonical_enumeration(FALLBACK_REFS + declared.len()) {
        if out.len() >= declared.len() + FALLBACK_REFS {
            break;
        }
        if !out.contains(&q) {
            out.push(q);
        }
    }
    out
}

/// Sign of the word at the first reference point it moves, and that point's index;
/// `(Zero, None)` when every reference is fixed (a tie at this scale).
pub fn induced_sign_at(action: &Action, refs: &[Rational], letters: &[Letter]) -> (Sign, Option<usize>) {
    if letters.is_empty() {
        return (Sign::Zero, None);
    }
    for (i, x) in refs.iter().enumerate() {
        let y = action.eval(letters, x);
        if &y != x {
            return (Sign::from_ord(y.cmp(x)), Some(i));
        }
    }
    (Sign::Zero, None)
}

/// The ordering induced by an action at a sequence of reference points.
pub struct ActionOracle<G: Group> {
    group: Arc<G>,
    action: Action,
    refs: Vec<Rational>,
    validity: Validity,
    description: String,
}

impl<G: Group> ActionOracle<G> {
    /// `refs` should already include any fallback points.
    pub fn new(group: Arc<G>, action: Action, refs: Vec<Rational>, validity: Validity, description: String) -> Self {
        ActionOracle { group, action, refs, validity, description }
    }

    pub fn action(&self) -> &Action {
        &self.action
    }

    pub fn refs(&self) -> &[Rational] {
        &self.refs
    }

    fn letters(&self, w: &G::Elem) -> Result<Vec<Letter>> {
        self.group
            .spell(w)
            .ok_or_else(|| Error::Unsupported("action oracles need a group with canonical spellings".into()))
    }
}

impl<G: Group> Oracle<G> for ActionOracle<G> {
    fn group(&self) -> &G {
        &self.group
    }

    fn sign(&self, w: &G::Elem) -> Result<Sign> {
        let letters = self.letters(w)?;
        match induced_sign_at(&self.action, &self.refs, &letters) {
            (Sign::Zero, _) if !letters.is_empty() => Err(Error::TieAtScale(self.group.format(w))),
            (s, _) => Ok(s),
        }
    }

    /// Compares the images of `u` and `v` directly, which only uses the two spellings.
    fn compare(&self, u: &G::Elem, v: &G::Elem) -> Result<Sign> {
        let (lu, lv) = (self.letters(u)?, self.letters(v)?);
        for x in &self.refs {
            let (a, b) = (self.action.eval(&lu, x), self.action.eval(&lv, x));
            if a != b {
                return Ok(Sign::from_ord(b.cmp(&a)));
            }
        }
        if u == v {
            Ok(Sign::Zero)
        } else {
            Err(Error::TieAtScale(self.group.format(&self.group.quotient(u, v))))
        }
    }

    fn validity(&self) -> Validity {
        self.validity
    }

    fn describe(&self) -> String {
        self.description.clone()
    }
}

/// The order-preserving map of the realization: `t(id) = 0`; each new word goes one above the
/// current maximum, one below the current minimum, or to the midpoint of its two neighbours.
/// `words[0]` must be the identity.
pub fn build_t<G: Group>(o: &dyn Oracle<G>, words: &[G::Elem]) -> Result<Vec<Rational>> {
    let g = o.group();
    match words.first() {
        Some(w) if g.is_identity(w) => {}
        _ => return Err(Error::Invalid("enumeration must start with the identity".into())),
    }
    let mut t = vec![Rational::from_integer(0.into()); words.len()];
    let mut sorted: Vec<usize> = vec![0];
    for i in 1..words.len() {
        // first placed index whose word is above words[i]
        let (mut lo, mut hi) = (0usize, sorted.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match o.compare(&words[sorted[mid]], &words[i])? {
                Sign::Pos => lo = mid + 1,
                Sign::Neg => hi = mid,
                Sign::Zero => {
                    return Err(Error::Inconsistent(format!(
                        "`{}` and `{}` compare equal",
                        g.format(&words[sorted[mid]]),
                        g.format(&words[i])
                    )))
                }
            }
        }
        t[i] = if lo == sorted.len() {
            &t[sorted[lo - 1]] + int(1)
        } else if lo == 0 {
            &t[sorted[0]] - int(1)
        } else {
            rational::midpoint(&t[sorted[lo - 1]], &t[sorted[lo]])
        };
        sorted.insert(lo, i);
    }
    Ok(t)
}

/// λ⁻ and λ⁺ of a ball together with their positions in it.
#[derive(Clone, Debug, Serialize)]
pub struct Extremes {
    pub radius: u32,
    pub lambda_minus: String,
    pub lambda_plus: String,
    #[serde(skip)]
    pub minus_index: usize,
    #[serde(skip)]
    pub plus_index: usize,
    /// Generators `δ±` with `δ±·λ±(n) = λ±(n+1)`, when the next ball was available.
    pub delta_minus: Option<String>,
    pub delta_plus: Option<String>,
}

fn extremes_among<G: Group>(o: &dyn Oracle<G>, b: &Ball<G::Elem>, upto: usize) -> Result<(usize, usize)> {
    let (mut lo, mut hi) = (0usize, 0usize);
    for i in 1..upto {
        if o.compare(b.get(i), b.get(lo))? == Sign::Pos {
            lo = i;
        }
        if o.compare(b.get(hi), b.get(i))? == Sign::Pos {
            hi = i;
        }
    }
    Ok((lo, hi))
}

/// The minimum and maximum of `B_n` under `o`, with the length and `δ±` checks.
pub fn extremes<G: Group>(o: &dyn Oracle<G>, spec: &BallSpec) -> Result<Extremes> {
    let g = o.group();
    let n = spec.radius;
    o.validity().require(n + 1)?;
    let b = ball(g, &spec.with_radius(n + 1))?;
    let (lo, hi) = extremes_among(o, &b, b.prefix_len(n))?;
    let (lo1, hi1) = extremes_among(o, &b, b.len())?;
    for i in [lo, hi] {
        if b.word_length(i) != n as usize {
            return Err(Error::Postcondition(format!(
                "extreme `{}` of B({n}) has length {}",
                format_letters(g.names(), b.spelling(i)),
                b.word_length(i)
            )));
        }
    }
    let delta = |from: usize, to: usize| -> Result<String> {
        spec.letters()
            .into_iter()
            .find(|&l| g.mul(&g.letter(l), b.get(from)) == *b.get(to))
            .map(|l| format_letters(g.names(), &[l]))
            .ok_or_else(|| Error::Postcondition("no generator carries λ(n) to λ(n+1)".into()))
    };
    Ok(Extremes {
        radius: n,
        lambda_minus: format_letters(g.names(), b.spelling(lo)),
        lambda_plus: format_letters(g.names(), b.spelling(hi)),
        minus_index: lo,
        plus_index: hi,
        delta_minus: Some(delta(lo, lo1)?),
        delta_plus: Some(delta(hi, hi1)?),
    })
}

/// The square `[lo, hi]²` spanned by the images of λ∓ of a ball.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoxSquare {
    pub radius: u32,
    #[serde(serialize_with = "rational::serde_str")]
    pub lo: Rational,
    #[serde(serialize_with = "rational::serde_str")]
    pub hi: Rational,
    pub lambda_minus: String,
    pub lambda_plus: String,
}

impl BoxSquare {
    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

/// A realization of an ordering on `B_r`: t placed on `B_{r+1}`, generator maps interpolating
/// every placed pair `(t(w), t(sw))`.
#[derive(Clone)]
pub struct FiniteRealization<G: Group> {
    pub group: Arc<G>,
    /// `B_{r+1}`: the placed words.
    pub placed: Ball<G::Elem>,
    pub scope_radius: u32,
    pub t: Vec<Rational>,
    pub action: Action,
    pub reference: Rational,
    pub source: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundTrip {
    pub words: usize,
    pub mismatches: Vec<String>,
    pub moved_reference: bool,
}

impl RoundTrip {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty() && self.moved_reference
    }
}

impl<G: Group> FiniteRealization<G> {
    pub fn t_of(&self, w: &G::Elem) -> Option<&Rational> {
        self.placed.position(w).map(|i| &self.t[i])
    }

    pub fn letters_of(&self, i: usize) -> &[Letter] {
        self.placed.spelling(i)
    }

    pub fn name(&self, i: usize) -> String {
        format_letters(self.group.names(), self.placed.spelling(i))
    }

    /// λ∓ of `B_n` (n ≤ r + 1) read off the t-map.
    pub fn extreme_indices(&self, n: u32) -> (usize, usize) {
        let upto = self.placed.prefix_len(n);
        let lo = (0..upto).min_by(|&a, &b| self.t[a].cmp(&self.t[b])).unwrap();
        let hi = (0..upto).max_by(|&a, &b| self.t[a].cmp(&self.t[b])).unwrap();
        (lo, hi)
    }

    pub fn box_of(&self, n: u32) -> Result<BoxSquare> {
        if n > self.scope_radius + 1 {
            return Err(Error::OutOfScope { word: format!("B({n})"), radius: self.scope_radius });
        }
        let (lo, hi) = self.extreme_indices(n);
        Ok(BoxSquare {
            radius: n,
            lo: self.t[lo].clone(),
            hi: self.t[hi].clone(),
            lambda_minus: self.name(lo),
            lambda_plus: self.name(hi),
        })
    }

    /// Signs at the reference point for the words of `B_n`, evaluated along their spellings.
    pub fn induced_signs(&self, n: u32) -> Vec<Sign> {
        let refs = reference_sequence(std::slice::from_ref(&self.reference));
        (0..self.placed.prefix_len(n))
            .map(|i| induced_sign_at(&self.action, &refs, self.placed.spelling(i)).0)
            .collect()
    }

    /// The reference point's orbit reproduces `o`'s signs on `B_r`, and every non-identity word
    /// moves the reference.
    pub fn round_trip(&self, o: &dyn Oracle<G>) -> Result<RoundTrip> {
        let upto = self.placed.prefix_len(self.scope_radius);
        let mut mismatches = Vec::new();
        let mut moved = true;
        for i in 0..upto {
            let letters = self.placed.spelling(i);
            let y = self.action.eval(letters, &self.reference);
            let s = Sign::from_ord(y.cmp(&self.reference));
            if !letters.is_empty() && s == Sign::Zero {
                moved = false;
            }
            if s != o.sign(self.placed.get(i))? {
                mismatches.push(self.name(i));
            }
        }
        Ok(RoundTrip { words: upto, mismatches, moved_reference: moved })
    }

    /// t-values as `(word, value)` pairs for serialization.
    pub fn t_table(&self) -> Vec<(String, String)> {
        (0..self.placed.len()).map(|i| (self.name(i), rational::format(&self.t[i]))).collect()
    }
}

/// Builds the realization of `o` on `spec` (scope radius `r = spec.radius`).
pub fn realize<G: Group>(group: Arc<G>, o: &dyn Oracle<G>, spec: &BallSpec) -> Result<FiniteRealization<G>> {
    let r = spec.radius;
    o.validity().require(r + 1)?;
    let placed = ball(&*group, &spec.with_radius(r + 1))?;
    let t = build_t(o, placed.elems())?;
    let mut maps = Vec::with_capacity(group.rank());
    for gen in 0..group.rank() as u32 {
        if !spec.contains_generator(gen) {
            maps.push(PLMap::identity());
            continue;
        }
        let s = group.letter(Letter::pos(gen));
        let mut pts: Vec<(Rational, Rational)> = placed
            .iter()
            .filter_map(|(i, w)| placed.position(&group.mul(&s, w)).map(|j| (t[i].clone(), t[j].clone())))
            .collect();
        pts.sort();
        let f = PLMap::through(pts).map_err(|e| match e {
            Error::NonMonotone(m) => Error::Inconsistent(format!("ordering is not left-invariant: {m}")),
            e => e,
        })?;
        maps.push(f);
    }
    Ok(FiniteRealization {
        group,
        placed,
        scope_radius: r,
        t,
        action: Action::new(maps),
        reference: Rational::from_integer(0.into()),
        source: o.describe(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SignLemmaReport {
    pub square: BoxSquare,
    pub words: usize,
    pub paths_inside: bool,
    pub endpoints_equal: bool,
    pub first_divergence: Option<String>,
}

impl SignLemmaReport {
    pub fn ok(&self) -> bool {
        self.paths_inside && self.endpoints_equal
    }
}

/// Checks that maps agreeing with the realization inside the box of `B_n` give the same
/// evaluations on `B_n`. Tampered maps that differ inside the box violate the precondition.
pub fn check_sign_lemma<G: Group>(r: &FiniteRealization<G>, tampered: &Action, n: u32) -> Result<SignLemmaReport> {
    let square = r.box_of(n)?;
    for gen in 0..r.action.rank() {
        if !r.action.maps()[gen].agrees_in_square(&tampered.maps()[gen], &square.lo, &square.hi) {
            return Err(Error::Precondition(format!(
                "tampered map for `{}` differs from the realization inside the box [{}, {}]²",
                r.group.names()[gen],
                rational::format(&square.lo),
                rational::format(&square.hi)
            )));
        }
    }
    let upto = r.placed.prefix_len(n);
    let mut paths_inside = true;
    let mut endpoints_equal = true;
    let mut first_divergence = None;
    for i in 0..upto {
        let letters = r.placed.spelling(i);
        let p = r.action.path(letters, &r.reference);
        let q = tampered.path(letters, &r.reference);
        if !p.iter().chain(&q).all(|x| square.contains(x)) {
            paths_inside = false;
            first_divergence.get_or_insert_with(|| r.name(i));
        }
        if p.last() != q.last() {
            endpoints_equal = false;
            first_divergence.get_or_insert_with(|| r.name(i));
        }
    }
    Ok(SignLemmaReport { square, words: upto, paths_inside, endpoints_equal, first_divergence })
}

/// Conjugates the realization so that its reference sits at `k` and the box of its scope ball
/// becomes `[k − 1/3, k + 1/3]²`. Induced signs are unchanged.
pub fn rescale_block<G: Group>(r: &FiniteRealization<G>, k: i64) -> Result<FiniteRealization<G>> {
    let b = r.box_of(r.scope_radius)?;
    if !(b.lo < r.reference && r.reference < b.hi) {
        return Err(Error::Precondition("degenerate box: λ⁻ ≺ id ≺ λ⁺ fails".into()));
    }
    let kq = int(k);
    let phi = PLMap::rescaler((&b.lo, &r.reference, &b.hi), (&(&kq - third()), &kq, &(&kq + third())))?;
    Ok(FiniteRealization {
        group: r.group.clone(),
        placed: r.placed.clone(),
        scope_radius: r.scope_radius,
        t: r.t.iter().map(|x| phi.eval(x)).collect(),
        action: r.action.conjugate(&phi),
        reference: kq,
        source: r.source.clone(),
    })
}
