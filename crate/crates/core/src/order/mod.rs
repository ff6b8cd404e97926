//! Ordering oracles and the operations on them.

pub mod axioms;
pub mod closure;
pub mod cone;
pub mod lex;
pub mod magnus;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{format_letters, Ball, BallSpec, FreeProduct, Group};

pub use axioms::{check_axioms, conjugate_oracle, dist, in_neighborhood, AxiomReport, DistReport, Violation};
pub use closure::{closure_search, property_e_search, ClosureOutcome, EChoice, EReport, EStatus, Labeled};
pub use cone::{cone_search, ConeOutcome};
pub use lex::LexOracle;
pub use magnus::{magnus_sign, MagnusOracle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn from_ord(o: std::cmp::Ordering) -> Self {
        match o {
            std::cmp::Ordering::Less => Sign::Neg,
            std::cmp::Ordering::Equal => Sign::Zero,
            std::cmp::Ordering::Greater => Sign::Pos,
        }
    }

    pub fn from_int(x: i128) -> Self {
        Sign::from_ord(x.cmp(&0))
    }

    pub fn negate(self) -> Self {
        match self {
            Sign::Neg => Sign::Pos,
            Sign::Zero => Sign::Zero,
            Sign::Pos => Sign::Neg,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Neg => "-",
            Sign::Zero => "0",
            Sign::Pos => "+",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "pos" | "positive" => Ok(Sign::Pos),
            "-" | "neg" | "negative" => Ok(Sign::Neg),
            "0" | "zero" => Ok(Sign::Zero),
            other => Err(Error::Parse(format!("bad sign `{other}`"))),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl Serialize for Sign {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.symbol())
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Sign::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Radius of the ball on which an oracle's signs are guaranteed to come from a left-ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Validity {
    Radius(u32),
    Infinite,
}

impl Validity {
    pub fn covers(self, r: u32) -> bool {
        match self {
            Validity::Infinite => true,
            Validity::Radius(v) => r <= v,
        }
    }

    pub fn require(self, r: u32) -> Result<()> {
        match self {
            Validity::Radius(v) if r > v => Err(Error::ValidityExceeded { needed: r, available: v }),
            _ => Ok(()),
        }
    }

    pub fn shrink(self, by: u32) -> Self {
        match self {
            Validity::Infinite => Validity::Infinite,
            Validity::Radius(v) => Validity::Radius(v.saturating_sub(by)),
        }
    }

    pub fn min(self, other: Validity) -> Validity {
        match (self, other) {
            (Validity::Infinite, x) | (x, Validity::Infinite) => x,
            (Validity::Radius(a), Validity::Radius(b)) => Validity::Radius(a.min(b)),
        }
    }
}

impl fmt::Display for Validity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Validity::Infinite => f.write_str("inf"),
            Validity::Radius(r) => write!(f, "{r}"),
        }
    }
}

impl Serialize for Validity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Validity::Infinite => s.serialize_str("inf"),
            Validity::Radius(r) => s.serialize_u32(*r),
        }
    }
}

/// A sign function on a group. `compare(u, v)` is the sign of `u⁻¹v`, positive when `u ≺ v`.
pub trait Oracle<G: Group>: Send + Sync {
    fn group(&self) -> &G;
    fn sign(&self, w: &G::Elem) -> Result<Sign>;
    fn validity(&self) -> Validity;
    fn describe(&self) -> String;

    fn compare(&self, u: &G::Elem, v: &G::Elem) -> Result<Sign> {
        self.sign(&self.group().quotient(u, v))
    }
}

pub type DynOracle<G> = Arc<dyn Oracle<G>>;

/// `w ↦ −sign(w)`: the reversed ordering.
pub struct Reversed<G: Group> {
    pub inner: DynOracle<G>,
}

impl<G: Group> Oracle<G> for Reversed<G> {
    fn group(&self) -> &G {
        self.inner.group()
    }
    fn sign(&self, w: &G::Elem) -> Result<Sign> {
        Ok(self.inner.sign(w)?.negate())
    }
    fn validity(&self) -> Validity {
        self.inner.validity()
    }
    fn describe(&self) -> String {
        format!("reverse({})", self.inner.describe())
    }
}

/// `w ↦ sign(σ(w))` for the automorphism `σ` inverting a set of generators.
pub struct Negated {
    pub inner: DynOracle<FreeProduct>,
    pub mask: Vec<bool>,
}

impl Oracle<FreeProduct> for Negated {
    fn group(&self) -> &FreeProduct {
        self.inner.group()
    }
    fn sign(&self, w: &crate::group::Word) -> Result<Sign> {
        self.inner.sign(&self.group().negate_generators(w, &self.mask))
    }
    fn validity(&self) -> Validity {
        self.inner.validity()
    }
    fn describe(&self) -> String {
        let names: Vec<&str> =
            self.group().names().iter().zip(&self.mask).filter(|(_, &m)| m).map(|(n, _)| n.as_str()).collect();
        format!("{}:neg={}", self.inner.describe(), names.join(","))
    }
}

/// Conjugate of an oracle: `sign'(w) = sign(γ w γ⁻¹)`.
pub struct Conjugated<G: Group> {
    pub inner: DynOracle<G>,
    pub gamma: G::Elem,
    gamma_inv: G::Elem,
    shrink: u32,
}

impl<G: Group> Conjugated<G> {
    pub fn new(inner: DynOracle<G>, gamma: G::Elem) -> Self {
        let g = inner.group();
        let gamma_inv = g.inv(&gamma);
        let shrink = g.length(&gamma).map_or(u32::MAX, |l| 2 * l as u32);
        Conjugated { inner, gamma, gamma_inv, shrink }
    }
}

impl<G: Group> Oracle<G> for Conjugated<G> {
    fn group(&self) -> &G {
        self.inner.group()
    }
    fn sign(&self, w: &G::Elem) -> Result<Sign> {
        let g = self.group();
        self.inner.sign(&g.mul(&g.mul(&self.gamma, w), &self.gamma_inv))
    }
    fn validity(&self) -> Validity {
        self.inner.validity().shrink(self.shrink)
    }
    fn describe(&self) -> String {
        format!("{}:conj={}", self.inner.describe(), self.group().format(&self.gamma))
    }
}

/// An oracle on a ball, frozen: signs listed in the ball's canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignVector {
    pub ball: BallSpec,
    pub words: Vec<String>,
    pub signs: Vec<Sign>,
}

#[derive(Serialize)]
struct SignLine<'a> {
    word: &'a str,
    sign: Sign,
}

impl SignVector {
    /// Evaluates `o` on every element of `ball` (in parallel).
    pub fn of<G: Group>(o: &dyn Oracle<G>, ball: &Ball<G::Elem>) -> Result<SignVector> {
        o.validity().require(ball.spec.radius)?;
        let signs = ball.elems().par_iter().map(|w| o.sign(w)).collect::<Result<Vec<_>>>()?;
        Ok(SignVector::from_signs(o.group(), ball, signs))
    }

    pub fn from_signs<G: Group>(g: &G, ball: &Ball<G::Elem>, signs: Vec<Sign>) -> SignVector {
        let words = (0..ball.len()).map(|i| format_letters(g.names(), ball.spelling(i))).collect();
        SignVector { ball: ball.spec.clone(), words, signs }
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    /// Index of the first word (in canonical order) where the two vectors differ.
    pub fn first_difference(&self, other: &SignVector) -> Option<usize> {
        self.signs.iter().zip(&other.signs).position(|(a, b)| a != b)
    }

    pub fn get(&self, word: &str) -> Option<Sign> {
        self.words.iter().position(|w| w == word).map(|i| self.signs[i])
    }

    pub fn to_json_lines(&self) -> String {
        self.words
            .iter()
            .zip(&self.signs)
            .map(|(w, &s)| serde_json::to_string(&SignLine { word: w, sign: s }).expect("serializable") + "\n")
            .collect()
    }
}
