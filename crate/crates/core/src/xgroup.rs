//! The group `⟨a, b | bab⁻¹ = a⁻²⟩` as pairs `(t, n)` = `a^t bⁿ` with `t` dyadic, its isolated
//! ordering, and certificates for isolation and for the cone not being finitely generated.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{ball, format_letters, BallSpec, Group, Letter};
use crate::order::{closure_search, cone_search, Oracle, Sign, SignVector, Validity};
use crate::rational::Rational;

/// `m / 2^e`, normalized so that `m` is odd or `e = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    m: i128,
    e: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { m: 0, e: 0 };

    pub fn new(m: i128, e: u32) -> Self {
        let mut d = Dyadic { m, e };
        d.normalize();
        d
    }

    pub fn int(m: i128) -> Self {
        Dyadic { m, e: 0 }
    }

    fn normalize(&mut self) {
        if self.m == 0 {
            self.e = 0;
            return;
        }
        let z = self.m.trailing_zeros().min(self.e);
        self.m >>= z;
        self.e -= z;
    }

    pub fn mantissa(self) -> i128 {
        self.m
    }

    pub fn exponent(self) -> u32 {
        self.e
    }

    pub fn signum(self) -> i128 {
        self.m.signum()
    }

    fn widen(self, e: u32) -> i128 {
        self.m.checked_shl(e - self.e).filter(|v| v >> (e - self.e) == self.m).expect("dyadic overflow")
    }

    /// `(−2)ⁿ · self`.
    pub fn scale(self, n: i64) -> Dyadic {
        let sign = if n.rem_euclid(2) == 1 { -1 } else { 1 };
        if n >= 0 {
            let m = self.m.checked_mul(1i128.checked_shl(n as u32).expect("dyadic overflow")).expect("dyadic overflow");
            Dyadic::new(sign * m, self.e)
        } else {
            Dyadic::new(sign * self.m, self.e + n.unsigned_abs() as u32)
        }
    }

    pub fn half(self) -> Dyadic {
        Dyadic::new(self.m, self.e + 1)
    }

    pub fn to_rational(self) -> Rational {
        Rational::new(self.m.into(), num_bigint::BigInt::from(1) << self.e as usize)
    }

    /// Generator of the subgroup of `ℤ[1/2]` spanned by the values.
    pub fn gcd(values: &[Dyadic]) -> Dyadic {
        let e = values.iter().map(|d| d.e).max().unwrap_or(0);
        let g = values.iter().fold(0i128, |acc, d| acc.gcd(&d.widen(e)));
        Dyadic::new(g, e)
    }

    /// Whether `self` is an integer multiple of `d`.
    pub fn is_multiple_of(self, d: Dyadic) -> bool {
        if d.m == 0 {
            return self.m == 0;
        }
        let e = self.e.max(d.e);
        self.widen(e) % d.widen(e) == 0
    }

    pub fn parse(s: &str) -> Result<Dyadic> {
        let bad = || Error::Parse(format!("bad dyadic `{s}`"));
        let (num, den) = match s.split_once('/') {
            Some((a, b)) => {
                (a.trim().parse::<i128>().map_err(|_| bad())?, b.trim().parse::<i128>().map_err(|_| bad())?)
            }
            None => (s.trim().parse::<i128>().map_err(|_| bad())?, 1),
        };
        if den <= 0 || den.count_ones() != 1 {
            return Err(bad());
        }
        Ok(Dyadic::new(num, den.trailing_zeros()))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.e == 0 {
            write!(f, "{}", self.m)
        } else {
            write!(f, "{}/{}", self.m, 1i128 << self.e)
        }
    }
}

/// `a^t bⁿ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct XElem {
    pub t: Dyadic,
    pub n: i64,
}

impl XElem {
    pub fn new(t: Dyadic, n: i64) -> Self {
        XElem { t, n }
    }

    pub fn in_gamma1(&self) -> bool {
        self.n == 0
    }
}

pub struct XGroup {
    names: Vec<String>,
}

impl Default for XGroup {
    fn default() -> Self {
        XGroup { names: vec!["a".into(), "b".into()] }
    }
}

impl XGroup {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn a(&self) -> XElem {
        XElem::new(Dyadic::int(1), 0)
    }

    pub fn b(&self) -> XElem {
        XElem::new(Dyadic::ZERO, 1)
    }

    pub fn pow(&self, x: &XElem, k: i64) -> XElem {
        let base = if k < 0 { self.inv(x) } else { *x };
        (0..k.unsigned_abs()).fold(self.identity(), |acc, _| self.mul(&acc, &base))
    }

    /// A shortest spelling found by breadth-first search up to `max_len`.
    pub fn shortest_spelling(&self, x: &XElem, max_len: u32) -> Option<Vec<Letter>> {
        let b = ball(self, &BallSpec::full(self, max_len)).ok()?;
        b.position(x).map(|i| b.spelling(i).to_vec())
    }
}

impl Group for XGroup {
    type Elem = XElem;

    fn identity(&self) -> XElem {
        XElem::new(Dyadic::ZERO, 0)
    }

    fn names(&self) -> &[String] {
        &self.names
    }

    fn letter(&self, l: Letter) -> XElem {
        let x = if l.gen == 0 { self.a() } else { self.b() };
        if l.inv {
            self.inv(&x)
        } else {
            x
        }
    }

    fn mul(&self, x: &XElem, y: &XElem) -> XElem {
        XElem::new(x.t + y.t.scale(x.n), x.n + y.n)
    }

    fn inv(&self, x: &XElem) -> XElem {
        XElem::new(-x.t.scale(-x.n), -x.n)
    }

    fn describe(&self) -> String {
        "<a,b | bab^-1 = a^-2>".into()
    }

    /// Normal form `a^t.b^n`.
    fn format(&self, x: &XElem) -> String {
        let mut parts = Vec::new();
        if x.t != Dyadic::ZERO {
            parts.push(if x.t == Dyadic::int(1) { "a".to_string() } else { format!("a^{}", x.t) });
        }
        if x.n != 0 {
            parts.push(if x.n == 1 { "b".to_string() } else { format!("b^{}", x.n) });
        }
        if parts.is_empty() {
            "id".into()
        } else {
            parts.join(".")
        }
    }

    /// Words over `a, b`; `a` may carry a dyadic exponent (`a^1/2`).
    fn parse(&self, s: &str) -> Result<XElem> {
        let s = s.trim();
        if s == "id" || s.is_empty() {
            return Ok(self.identity());
        }
        let mut acc = self.identity();
        for tok in s.split('.') {
            let (name, exp) = match tok.trim().split_once('^') {
                Some((n, e)) => (n.trim(), e.trim()),
                None => (tok.trim(), "1"),
            };
            let x = match name {
                "a" => XElem::new(Dyadic::parse(exp)?, 0),
                "b" => {
                    let k: i64 = exp.parse().map_err(|_| Error::Parse(format!("bad exponent in `{tok}`")))?;
                    self.pow(&self.b(), k)
                }
                other => return Err(Error::UnknownGenerator(other.into())),
            };
            acc = self.mul(&acc, &x);
        }
        Ok(acc)
    }
}

/// The ordering with `b` dominant: positive iff `n > 0`, or `n = 0` and `t > 0`.
pub struct XSignOracle {
    group: Arc<XGroup>,
}

impl XSignOracle {
    pub fn new(group: Arc<XGroup>) -> Self {
        XSignOracle { group }
    }
}

pub fn xsign(x: &XElem) -> Sign {
    if x.n != 0 {
        Sign::from_int(x.n as i128)
    } else {
        Sign::from_int(x.t.signum())
    }
}

impl Oracle<XGroup> for XSignOracle {
    fn group(&self) -> &XGroup {
        &self.group
    }
    fn sign(&self, w: &XElem) -> Result<Sign> {
        Ok(xsign(w))
    }
    fn validity(&self) -> Validity {
        Validity::Infinite
    }
    fn describe(&self) -> String {
        "xsign".into()
    }
}

/// Writes a positive element as a product of `b`'s and positive elements of `Γ₁`, using
/// `bⁿ g₁ = bⁿ⁻¹ g₁⁻² b` when `g₁` is negative.
pub fn decompose_positive(g: &XGroup, u: &XElem) -> Result<Vec<XElem>> {
    if xsign(u) != Sign::Pos {
        return Err(Error::Precondition(format!("`{}` is not positive", g.format(u))));
    }
    if u.n == 0 {
        return Ok(vec![*u]);
    }
    // u = bⁿ g₁ with g₁ = (t / (−2)ⁿ, 0)
    let s = u.t.scale(-u.n);
    let b = g.b();
    let mut out = Vec::new();
    match s.signum() {
        0 => out.extend(std::iter::repeat_n(b, u.n as usize)),
        1 => {
            out.extend(std::iter::repeat_n(b, u.n as usize));
            out.push(XElem::new(s, 0));
        }
        _ => {
            out.extend(std::iter::repeat_n(b, u.n as usize - 1));
            // b g₁ b⁻¹ = g₁⁻² = (−2s, 0) is positive
            out.push(XElem::new(s.scale(1), 0));
            out.push(b);
        }
    }
    Ok(out)
}

fn forced_positive(x: &XElem) -> bool {
    (x.n == 1 && x.t == Dyadic::ZERO) || (x.n == 0 && x.t.signum() > 0)
}

#[derive(Clone, Debug, Serialize)]
pub struct IsolationReport {
    pub cone_radius: u32,
    pub ball_size: usize,
    pub unique_cone: bool,
    pub matches_xsign: bool,
    pub cone_nodes: u64,
    /// Solutions found with seeds `a = +, b = −` (informational; at most two searched).
    pub other_seeds_solutions: usize,
    pub other_seeds_complete: bool,
    pub decompose_radius: u32,
    pub decompositions: usize,
    pub decompositions_ok: bool,
    pub first_failure: Option<String>,
}

impl IsolationReport {
    pub fn ok(&self) -> bool {
        self.unique_cone && self.matches_xsign && self.decompositions_ok
    }
}

/// Decomposes every positive element of length ≤ `decompose_radius` and checks that the cone
/// axioms on the ball of radius `cone_radius`, seeded with `a, b` positive, force `xsign`.
pub fn isolation_probe(g: &XGroup, cone_radius: u32, decompose_radius: u32, node_cap: u64) -> Result<IsolationReport> {
    if cone_radius == 0 {
        return Err(Error::Invalid("probe radius must be at least 1".into()));
    }
    let spec = BallSpec::full(g, cone_radius);
    let out = cone_search(g, &spec, &[(g.a(), Sign::Pos), (g.b(), Sign::Pos)], 2, node_cap)?;
    let b = ball(g, &spec)?;
    let want: Vec<Sign> = b.elems().iter().map(xsign).collect();
    let unique = out.unique().is_some();
    let matches = out.unique().is_some_and(|sv| sv.signs == want);
    let other = cone_search(g, &spec, &[(g.a(), Sign::Pos), (g.b(), Sign::Neg)], 2, node_cap)?;

    let db = ball(g, &BallSpec::full(g, decompose_radius))?;
    let mut count = 0;
    let mut first_failure = None;
    for (i, u) in db.iter() {
        if xsign(u) != Sign::Pos {
            continue;
        }
        count += 1;
        let parts = decompose_positive(g, u)?;
        let product = parts.iter().fold(g.identity(), |acc, x| g.mul(&acc, x));
        if product != *u || !parts.iter().all(forced_positive) {
            first_failure.get_or_insert_with(|| format_letters(g.names(), db.spelling(i)));
        }
    }
    Ok(IsolationReport {
        cone_radius,
        ball_size: b.len(),
        unique_cone: unique,
        matches_xsign: matches,
        cone_nodes: out.nodes,
        other_seeds_solutions: other.solutions.len(),
        other_seeds_complete: other.complete,
        decompose_radius,
        decompositions: count,
        decompositions_ok: first_failure.is_none(),
        first_failure,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NonFgWitness {
    pub length_bound: u32,
    /// Positive elements of length ≤ L.
    pub generators: usize,
    /// Their `Γ₁` parts, which span `d ℤ`.
    pub gamma1_parts: Vec<String>,
    pub d: String,
    pub witness: String,
    pub witness_spelling: Option<String>,
    pub witness_positive: bool,
    /// `d/2` is not a multiple of `d`, and products of the generators landing in `Γ₁` only
    /// use the `Γ₁` generators (the `b`-exponents are nonnegative and must sum to zero).
    pub algebraic: bool,
    pub closure_depth: usize,
    pub closure_explored: usize,
    pub absent_from_closure: bool,
}

impl NonFgWitness {
    pub fn ok(&self) -> bool {
        self.witness_positive && self.algebraic && self.absent_from_closure
    }
}

pub fn non_fg_witness(g: &XGroup, l: u32, cap: usize) -> Result<NonFgWitness> {
    if l < 2 {
        return Err(Error::Invalid("length bound must be at least 2".into()));
    }
    let b = ball(g, &BallSpec::full(g, l))?;
    let s: Vec<XElem> = b.elems().iter().filter(|x| xsign(x) == Sign::Pos).copied().collect();
    let parts: Vec<Dyadic> = s.iter().filter(|x| x.n == 0).map(|x| x.t).collect();
    let d = Dyadic::gcd(&parts);
    let w = XElem::new(d.half(), 0);
    let algebraic = d != Dyadic::ZERO
        && !w.t.is_multiple_of(d)
        && parts.iter().all(|t| t.is_multiple_of(d))
        && s.iter().all(|x| x.n >= 0);
    let depth = 2 * l as usize;
    let closure = closure_search(g, &s, &w, depth, cap)?;
    let spelling = g.shortest_spelling(&w, l + 2).map(|sp| format_letters(g.names(), &sp));
    let mut shown: Vec<String> = parts.iter().map(|t| t.to_string()).collect();
    shown.sort();
    shown.dedup();
    Ok(NonFgWitness {
        length_bound: l,
        generators: s.len(),
        gamma1_parts: shown,
        d: d.to_string(),
        witness: g.format(&w),
        witness_spelling: spelling,
        witness_positive: xsign(&w) == Sign::Pos,
        algebraic,
        closure_depth: closure.depth,
        closure_explored: closure.explored,
        absent_from_closure: closure.witness.is_none(),
    })
}

/// Sign vector of `xsign` on the ball, for comparisons with searched cones.
pub fn xsign_vector(g: &XGroup, spec: &BallSpec) -> Result<SignVector> {
    let b = ball(g, spec)?;
    Ok(SignVector::from_signs(g, &b, b.elems().iter().map(xsign).collect()))
}

impl std::ops::Add for Dyadic {
    type Output = Dyadic;
    fn add(self, o: Dyadic) -> Dyadic {
        let e = self.e.max(o.e);
        Dyadic::new(self.widen(e).checked_add(o.widen(e)).expect("dyadic overflow"), e)
    }
}

impl std::ops::Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { m: -self.m, e: self.e }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::{check_axioms, property_e_search, EStatus, Labeled};

    fn x() -> XGroup {
        XGroup::new()
    }

    #[test]
    fn multiplication_examples() {
        let g = x();
        let ab = g.mul(&g.a(), &g.b());
        assert_eq!(g.mul(&ab, &ab), g.parse("a^-1.b^2").unwrap());
        assert_eq!(g.mul(&ab, &ab), XElem::new(Dyadic::int(-1), 2));
        let bab = g.conjugate(&g.b(), &g.a());
        assert_eq!(bab, XElem::new(Dyadic::int(-2), 0));
        assert_eq!(bab, g.pow(&g.a(), -2));
        assert!(g.is_identity(&g.mul(&g.inv(&ab), &ab)));
        let half = g.parse("b^-1.a^-1.b").unwrap();
        assert_eq!(half, XElem::new(Dyadic::new(1, 1), 0));
        assert_eq!(g.format(&half), "a^1/2");
        assert_eq!(g.parse("a^1/2").unwrap(), half);
    }

    #[test]
    fn relation_holds_on_gamma1() {
        let g = x();
        for m in -9i128..9 {
            for e in 0..4 {
                let u = XElem::new(Dyadic::new(m, e), 0);
                assert_eq!(g.conjugate(&g.b(), &u), g.pow(&u, -2));
            }
        }
    }

    #[test]
    fn sign_examples() {
        let g = x();
        assert_eq!(xsign(&g.a()), Sign::Pos);
        assert_eq!(xsign(&g.b()), Sign::Pos);
        assert_eq!(xsign(&XElem::new(Dyadic::int(-2), 1)), Sign::Pos);
        assert_eq!(xsign(&g.identity()), Sign::Zero);
    }

    #[test]
    fn decomposition_examples() {
        let g = x();
        assert_eq!(decompose_positive(&g, &g.b()).unwrap(), vec![g.b()]);
        assert_eq!(decompose_positive(&g, &g.a()).unwrap(), vec![g.a()]);
        let u = XElem::new(Dyadic::int(-2), 1);
        assert_eq!(g.mul(&g.b(), &g.a()), u);
        assert_eq!(decompose_positive(&g, &u).unwrap(), vec![g.b(), g.a()]);
        // b·a^-1 = (2, 1) needs the rewriting
        let v = g.mul(&g.b(), &g.inv(&g.a()));
        let parts = decompose_positive(&g, &v).unwrap();
        assert_eq!(parts.iter().fold(g.identity(), |acc, p| g.mul(&acc, p)), v);
        assert!(parts.iter().all(forced_positive));
        assert!(decompose_positive(&g, &g.inv(&g.b())).is_err());
    }

    #[test]
    fn xsign_axioms_small() {
        let g = Arc::new(x());
        let o = XSignOracle::new(g.clone());
        assert!(check_axioms(&o, &BallSpec::full(&*g, 5)).unwrap().ok());
    }

    #[test]
    fn isolation_and_non_fg() {
        let g = x();
        let rep = isolation_probe(&g, 3, 4, crate::order::cone::DEFAULT_NODE_CAP).unwrap();
        assert!(rep.ok(), "{rep:?}");
        let w = non_fg_witness(&g, 2, 100_000).unwrap();
        assert!(w.ok(), "{w:?}");
        assert_eq!(w.witness, "a^1/2");
        assert_eq!(w.d, "1");
        assert_eq!(w.witness_spelling.as_deref(), Some("b^-1.a^-1.b"));
        assert_eq!(w.closure_depth, 4);
    }

    #[test]
    fn property_e_on_two_candidates() {
        let g = x();
        let bab = g.conjugate(&g.b(), &g.a());
        let cands = [Labeled::new("a", g.a()), Labeled::new("bab^-1", bab)];
        let r = property_e_search(&g, &[], &cands, 3, crate::order::closure::DEFAULT_CLOSURE_CAP).unwrap();
        let pp = r.choice(&[1, 1]).unwrap();
        assert_eq!(pp.status, EStatus::Refuted);
        assert_eq!(pp.witness, vec!["a", "a", "bab^-1"]);
        assert!(r.compatible().count() >= 1);
    }

    #[test]
    fn dyadic_arithmetic() {
        let h = Dyadic::new(1, 1);
        assert_eq!(h + h, Dyadic::int(1));
        assert_eq!(Dyadic::int(3).scale(-1), Dyadic::new(-3, 1));
        assert_eq!(Dyadic::int(3).scale(2), Dyadic::int(12));
        assert_eq!(Dyadic::gcd(&[Dyadic::int(4), Dyadic::int(6)]), Dyadic::int(2));
        assert_eq!(Dyadic::gcd(&[Dyadic::new(3, 2), Dyadic::int(1)]), Dyadic::new(1, 2));
        assert!(Dyadic::int(6).is_multiple_of(Dyadic::new(3, 1)));
        assert!(!h.is_multiple_of(Dyadic::int(1)));
        assert_eq!(Dyadic::parse("-3/4").unwrap(), Dyadic::new(-3, 2));
        assert!(Dyadic::parse("1/3").is_err());
        assert_eq!(Dyadic::new(-3, 2).to_string(), "-3/4");
    }
}
