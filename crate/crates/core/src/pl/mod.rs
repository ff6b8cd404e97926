//! Piecewise-linear orientation-preserving homeomorphisms of the line, exact over the rationals.

pub mod svg;

use std::cmp::Ordering;
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, int, Rational};

/// A PL homeomorphism: breakpoints strictly increasing in both coordinates, plus the slopes of
/// the two affine tails. Kept in canonical form (no collinear breakpoints; affine maps anchored
/// at `x = 0`), so structural equality is equality of maps.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PLMap {
    pts: Vec<(Rational, Rational)>,
    left_slope: Rational,
    right_slope: Rational,
}

/// An open interval; `None` endpoints are infinite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Interval {
    #[serde(serialize_with = "opt_rational")]
    pub lo: Option<Rational>,
    #[serde(serialize_with = "opt_rational")]
    pub hi: Option<Rational>,
}

fn opt_rational<S: serde::Serializer>(x: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(x) => s.serialize_str(&rational::format(x)),
        None => s.serialize_none(),
    }
}

impl Interval {
    pub fn bounded(lo: Rational, hi: Rational) -> Self {
        Interval { lo: Some(lo), hi: Some(hi) }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo.as_ref().is_none_or(|lo| lo < x) && self.hi.as_ref().is_none_or(|hi| x < hi)
    }
}

fn slope(p: &(Rational, Rational), q: &(Rational, Rational)) -> Rational {
    (&q.1 - &p.1) / (&q.0 - &p.0)
}

impl PLMap {
    pub fn identity() -> Self {
        PLMap::affine(Rational::one(), Rational::zero()).expect("identity")
    }

    pub fn translation(c: Rational) -> Self {
        PLMap::affine(Rational::one(), c).expect("translation")
    }

    /// `x ↦ slope·x + intercept`.
    pub fn affine(slope: Rational, intercept: Rational) -> Result<Self> {
        if !slope.is_positive() {
            return Err(Error::NonMonotone("affine slope must be positive".into()));
        }
        Ok(PLMap { pts: vec![(Rational::zero(), intercept)], left_slope: slope.clone(), right_slope: slope })
    }

    /// The map through `points`, linear between them, with the given tail slopes.
    pub fn interpolate(points: Vec<(Rational, Rational)>, left_slope: Rational, right_slope: Rational) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Invalid("interpolation needs at least one point".into()));
        }
        if !left_slope.is_positive() || !right_slope.is_positive() {
            return Err(Error::NonMonotone("tail slopes must be positive".into()));
        }
        for w in points.windows(2) {
            if w[0].0 >= w[1].0 || w[0].1 >= w[1].1 {
                return Err(Error::NonMonotone(format!(
                    "points ({}, {}) and ({}, {}) are not strictly increasing",
                    rational::format(&w[0].0),
                    rational::format(&w[0].1),
                    rational::format(&w[1].0),
                    rational::format(&w[1].1)
                )));
            }
        }
        Ok(PLMap { pts: points, left_slope, right_slope }.canonical())
    }

    /// Identity-slope tails.
    pub fn through(points: Vec<(Rational, Rational)>) -> Result<Self> {
        PLMap::interpolate(points, Rational::one(), Rational::one())
    }

    fn canonical(self) -> Self {
        let PLMap { pts, left_slope, right_slope } = self;
        let n = pts.len();
        let mut keep = Vec::with_capacity(n);
        for i in 0..n {
            let inc = if i == 0 { left_slope.clone() } else { slope(&pts[i - 1], &pts[i]) };
            let out = if i + 1 == n { right_slope.clone() } else { slope(&pts[i], &pts[i + 1]) };
            keep.push(inc != out);
        }
        let kept: Vec<_> = pts.iter().zip(&keep).filter(|(_, &k)| k).map(|(p, _)| p.clone()).collect();
        if kept.is_empty() {
            // affine: re-anchor at the origin
            let (x, y) = &pts[0];
            let at0 = y - &left_slope * x;
            return PLMap { pts: vec![(Rational::zero(), at0)], left_slope, right_slope };
        }
        PLMap { pts: kept, left_slope, right_slope }
    }

    pub fn breakpoints(&self) -> &[(Rational, Rational)] {
        &self.pts
    }

    pub fn left_slope(&self) -> &Rational {
        &self.left_slope
    }

    pub fn right_slope(&self) -> &Rational {
        &self.right_slope
    }

    pub fn is_affine(&self) -> bool {
        self.pts.len() == 1 && self.left_slope == self.right_slope
    }

    pub fn is_identity(&self) -> bool {
        self.is_affine() && self.left_slope.is_one() && self.pts[0].1.is_zero()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let first = &self.pts[0];
        if x <= &first.0 {
            return &first.1 + &self.left_slope * (x - &first.0);
        }
        let last = self.pts.last().unwrap();
        if x >= &last.0 {
            return &last.1 + &self.right_slope * (x - &last.0);
        }
        let i = self.pts.partition_point(|p| &p.0 <= x);
        let (p, q) = (&self.pts[i - 1], &self.pts[i]);
        if &p.0 == x {
            return p.1.clone();
        }
        &p.1 + (x - &p.0) * slope(p, q)
    }

    pub fn inverse(&self) -> PLMap {
        PLMap {
            pts: self.pts.iter().map(|(x, y)| (y.clone(), x.clone())).collect(),
            left_slope: self.left_slope.recip(),
            right_slope: self.right_slope.recip(),
        }
        .canonical()
    }

    /// `self ∘ g`: apply `g` first.
    pub fn compose(&self, g: &PLMap) -> PLMap {
        let ginv = g.inverse();
        let mut xs: Vec<Rational> = g.pts.iter().map(|p| p.0.clone()).collect();
        xs.extend(self.pts.iter().map(|p| ginv.eval(&p.0)));
        xs.sort();
        xs.dedup();
        let pts = xs
            .into_iter()
            .map(|x| {
                let y = self.eval(&g.eval(&x));
                (x, y)
            })
            .collect();
        PLMap { pts, left_slope: &self.left_slope * &g.left_slope, right_slope: &self.right_slope * &g.right_slope }
            .canonical()
    }

    /// `φ ∘ self ∘ φ⁻¹`.
    pub fn conjugate(&self, phi: &PLMap) -> PLMap {
        phi.compose(self).compose(&phi.inverse())
    }

    /// Iterates `self` `k` times; negative `k` iterates the inverse.
    pub fn power(&self, k: i64) -> PLMap {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        (0..k.unsigned_abs()).fold(PLMap::identity(), |acc, _| base.compose(&acc))
    }

    /// The bump of the perturbation step: supported on `(x0, y0)`, pushing `x1` to `(y1 + y0)/2`.
    pub fn bump(x0: &Rational, x1: &Rational, y1: &Rational, y0: &Rational) -> Result<PLMap> {
        if !(x0 < x1 && x1 < y1 && y1 < y0) {
            return Err(Error::Invalid(format!(
                "bump needs x0 < x1 < y1 < y0, got {}, {}, {}, {}",
                rational::format(x0),
                rational::format(x1),
                rational::format(y1),
                rational::format(y0)
            )));
        }
        PLMap::through(vec![
            (x0.clone(), x0.clone()),
            (x1.clone(), rational::midpoint(y1, y0)),
            (y0.clone(), y0.clone()),
        ])
    }

    /// Sends `a ↦ a'`, `c ↦ c'`, `b ↦ b'`, linear in between, slope-one tails.
    pub fn rescaler(src: (&Rational, &Rational, &Rational), dst: (&Rational, &Rational, &Rational)) -> Result<PLMap> {
        if !(src.0 < src.1 && src.1 < src.2) || !(dst.0 < dst.1 && dst.1 < dst.2) {
            return Err(Error::NonMonotone("rescaler triples must be strictly increasing".into()));
        }
        PLMap::through(vec![
            (src.0.clone(), dst.0.clone()),
            (src.1.clone(), dst.1.clone()),
            (src.2.clone(), dst.2.clone()),
        ])
    }

    /// Maximal open intervals on which the map moves points.
    pub fn support(&self) -> Vec<Interval> {
        // Candidate points: breakpoints and the roots of f(x) - x on every linear piece.
        let mut cands: Vec<Rational> = self.pts.iter().map(|p| p.0.clone()).collect();
        let n = self.pts.len();
        let mut root_of = |p: &(Rational, Rational), s: &Rational| {
            // f(x) = p.1 + s (x - p.0) = x  ⇔  x = (p.1 - s p.0) / (1 - s)
            if !s.is_one() {
                cands.push((&p.1 - s * &p.0) / (Rational::one() - s));
            }
        };
        root_of(&self.pts[0], &self.left_slope);
        root_of(&self.pts[n - 1], &self.right_slope);
        for w in self.pts.windows(2) {
            root_of(&w[0], &slope(&w[0], &w[1]));
        }
        cands.sort();
        cands.dedup();
        let moves = |x: &Rational| &self.eval(x) != x;
        // Walk the alternating sequence: gap, point, gap, ..., gap.
        let mut out: Vec<Interval> = Vec::new();
        let mut open: Option<Option<Rational>> = None; // start of the current moving run
        let m = cands.len();
        for i in 0..=m {
            let gap_sample = match i {
                0 => &cands[0] - int(1),
                _ if i == m => &cands[m - 1] + int(1),
                _ => rational::midpoint(&cands[i - 1], &cands[i]),
            };
            let gap_lo = if i == 0 { None } else { Some(cands[i - 1].clone()) };
            if moves(&gap_sample) {
                if open.is_none() {
                    open = Some(gap_lo);
                }
            } else if let Some(lo) = open.take() {
                out.push(Interval { lo, hi: gap_lo });
            }
            if i < m {
                let p = &cands[i];
                if !moves(p) {
                    if let Some(lo) = open.take() {
                        out.push(Interval { lo, hi: Some(p.clone()) });
                    }
                }
            }
        }
        if let Some(lo) = open {
            out.push(Interval { lo, hi: None });
        }
        out
    }

    /// The part of the graph inside the square `[lo, hi]²`, as a canonical polyline
    /// (entry point, interior breakpoints, exit point), or `None` if it misses the square.
    pub fn graph_in_square(&self, lo: &Rational, hi: &Rational) -> Option<Vec<(Rational, Rational)>> {
        let inv = self.inverse();
        let p = std::cmp::max(lo.clone(), inv.eval(lo));
        let q = std::cmp::min(hi.clone(), inv.eval(hi));
        if p > q {
            return None;
        }
        let mut pts = vec![(p.clone(), self.eval(&p))];
        pts.extend(self.pts.iter().filter(|b| b.0 > p && b.0 < q).cloned());
        if q > p {
            pts.push((q.clone(), self.eval(&q)));
        }
        // drop collinear interior points
        let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(pts.len());
        for pt in pts {
            while out.len() >= 2 {
                let k = out.len();
                if slope(&out[k - 2], &out[k - 1]) == slope(&out[k - 1], &pt) {
                    out.pop();
                } else {
                    break;
                }
            }
            out.push(pt);
        }
        Some(out)
    }

    /// Whether the graphs of `self` and `other` coincide inside `[lo, hi]²`.
    pub fn agrees_in_square(&self, other: &PLMap, lo: &Rational, hi: &Rational) -> bool {
        self.graph_in_square(lo, hi) == other.graph_in_square(lo, hi)
    }

    /// Replaces the map on `[a, b]` by the polyline `pts`, which must start at `(a, f(a))` and
    /// end at `(b, f(b))`.
    pub fn splice(&self, pts: Vec<(Rational, Rational)>) -> Result<PLMap> {
        let (a, b) = match (pts.first(), pts.last()) {
            (Some(a), Some(b)) => (a.clone(), b.clone()),
            _ => return Err(Error::Invalid("empty splice".into())),
        };
        if self.eval(&a.0) != a.1 || self.eval(&b.0) != b.1 {
            return Err(Error::Invalid("splice endpoints must lie on the graph".into()));
        }
        let mut all: Vec<_> = self.pts.iter().filter(|p| p.0 < a.0).cloned().collect();
        all.extend(pts);
        all.extend(self.pts.iter().filter(|p| p.0 > b.0).cloned());
        // Keep tails anchored on the original lines.
        let first = self.pts[0].clone();
        let last = self.pts.last().unwrap().clone();
        if first.0 > a.0 {
            all.insert(0, (&a.0 - int(1), self.eval(&(&a.0 - int(1)))));
        }
        if last.0 < b.0 {
            all.push((&b.0 + int(1), self.eval(&(&b.0 + int(1)))));
        }
        PLMap::interpolate(all, self.left_slope.clone(), self.right_slope.clone())
    }

    /// `x,y` rows of the breakpoints, preceded by a comment line with the tail slopes.
    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# left_slope={} right_slope={}\nx,y\n",
            rational::format(&self.left_slope),
            rational::format(&self.right_slope)
        );
        for (x, y) in &self.pts {
            let _ = writeln!(s, "{},{}", rational::format(x), rational::format(y));
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(PLMapRepr::from(self)).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<PLMap> {
        let r: PLMapRepr = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        r.try_into()
    }

    /// Strictly-increasing check at sample points; used by property tests.
    pub fn is_increasing_at(&self, x: &Rational, y: &Rational) -> bool {
        match x.cmp(y) {
            Ordering::Less => self.eval(x) < self.eval(y),
            Ordering::Greater => self.eval(x) > self.eval(y),
            Ordering::Equal => true,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PLMapRepr {
    points: Vec<(String, String)>,
    left_slope: String,
    right_slope: String,
}

impl From<&PLMap> for PLMapRepr {
    fn from(f: &PLMap) -> Self {
        PLMapRepr {
            points: f.pts.iter().map(|(x, y)| (rational::format(x), rational::format(y))).collect(),
            left_slope: rational::format(&f.left_slope),
            right_slope: rational::format(&f.right_slope),
        }
    }
}

impl TryFrom<PLMapRepr> for PLMap {
    type Error = Error;
    fn try_from(r: PLMapRepr) -> Result<PLMap> {
        let pts =
            r.points.iter().map(|(x, y)| Ok((rational::parse(x)?, rational::parse(y)?))).collect::<Result<Vec<_>>>()?;
        PLMap::interpolate(pts, rational::parse(&r.left_slope)?, rational::parse(&r.right_slope)?)
    }
}

impl Serialize for PLMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PLMapRepr::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for PLMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PLMapRepr::deserialize(d)?;
        r.try_into().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;
    use proptest::prelude::*;

    fn q(n: i64) -> Rational {
        int(n)
    }

    #[test]
    fn eval_compose_inverse_examples() {
        let t = PLMap::translation(q(1));
        assert_eq!(t.eval(&q(3)), q(4));
        let d = PLMap::affine(q(2), q(0)).unwrap();
        assert_eq!(t.compose(&d).eval(&q(3)), q(7));
        let f = PLMap::through(vec![(q(0), q(0)), (q(1), q(3)), (q(2), q(4))]).unwrap();
        let id = f.compose(&f.inverse());
        assert!(id.is_identity());
        assert_eq!(f.inverse().inverse(), f);
    }

    #[test]
    fn interpolate_examples() {
        let f = PLMap::through(vec![(q(0), q(0)), (q(1), q(2)), (q(3), q(3))]).unwrap();
        assert_eq!(f.eval(&frac(1, 2)), q(1));
        let g = PLMap::through(vec![(q(5), q(5))]).unwrap();
        assert!(g.is_identity());
        assert!(matches!(PLMap::through(vec![(q(0), q(1)), (q(1), q(0))]), Err(Error::NonMonotone(_))));
    }

    #[test]
    fn bump_examples() {
        let b = PLMap::bump(&q(0), &q(1), &q(2), &q(3)).unwrap();
        assert_eq!(b.eval(&q(1)), frac(5, 2));
        assert_eq!(b.eval(&q(0)), q(0));
        assert_eq!(b.eval(&q(3)), q(3));
        assert_eq!(b.support(), vec![Interval::bounded(q(0), q(3))]);
        assert!(PLMap::bump(&q(0), &q(2), &q(1), &q(3)).is_err());
    }

    #[test]
    fn support_examples() {
        assert!(PLMap::identity().support().is_empty());
        assert_eq!(PLMap::translation(q(1)).support(), vec![Interval { lo: None, hi: None }]);
        // x ↦ 2x fixes only 0
        let d = PLMap::affine(q(2), q(0)).unwrap();
        assert_eq!(d.support(), vec![Interval { lo: None, hi: Some(q(0)) }, Interval { lo: Some(q(0)), hi: None }]);
        // two bumps sharing the endpoint 3
        let b1 = PLMap::bump(&q(0), &q(1), &q(2), &q(3)).unwrap();
        let b2 = PLMap::bump(&q(3), &q(4), &q(5), &q(6)).unwrap();
        assert_eq!(b1.compose(&b2).support(), vec![Interval::bounded(q(0), q(3)), Interval::bounded(q(3), q(6))]);
        // fixed on a whole segment in the middle
        let f = PLMap::through(vec![(q(0), q(1)), (q(2), q(2)), (q(4), q(4)), (q(5), q(7))]).unwrap();
        assert_eq!(f.support(), vec![Interval { lo: None, hi: Some(q(2)) }, Interval { lo: Some(q(4)), hi: None }]);
    }

    #[test]
    fn rescaler_examples() {
        let k = q(5);
        let r = PLMap::rescaler((&q(-1), &q(0), &q(1)), (&(&k - frac(1, 3)), &k, &(&k + frac(1, 3)))).unwrap();
        assert_eq!(r.eval(&q(0)), k);
        assert_eq!(r.eval(&frac(-1, 2)), (&k - frac(1, 3) + &k) / q(2));
        let same = PLMap::rescaler((&q(-1), &q(0), &q(1)), (&q(-1), &q(0), &q(1))).unwrap();
        assert!(same.is_identity());
        assert!(PLMap::rescaler((&q(0), &q(0), &q(1)), (&q(-1), &q(0), &q(1))).is_err());
    }

    #[test]
    fn canonical_form_prunes_collinear_points() {
        let f = PLMap::through(vec![(q(0), q(0)), (q(1), q(1)), (q(2), q(2))]).unwrap();
        assert!(f.is_identity());
        let g = PLMap::through(vec![(q(0), q(0)), (q(1), q(2)), (q(2), q(4)), (q(3), q(5))]).unwrap();
        assert_eq!(g.breakpoints().len(), 2);
    }

    #[test]
    fn graph_in_square_and_splice() {
        let f = PLMap::through(vec![(q(-1), q(-2)), (q(0), q(0)), (q(1), q(3))]).unwrap();
        let g = f.graph_in_square(&q(-1), &q(1)).unwrap();
        assert_eq!(g.first().unwrap(), &(frac(-1, 2), q(-1)));
        assert_eq!(g.last().unwrap(), &(frac(1, 3), q(1)));
        // tamper above the square: same restricted graph
        let bump = PLMap::bump(&q(2), &q(3), &q(4), &q(5)).unwrap();
        assert!(bump.compose(&f).agrees_in_square(&f, &q(-1), &q(1)));
        let inside = PLMap::bump(&frac(-1, 2), &q(0), &frac(1, 4), &frac(1, 2)).unwrap();
        assert!(!inside.compose(&f).agrees_in_square(&f, &q(-1), &q(1)));
        let s = f.splice(vec![(q(0), q(0)), (frac(1, 2), q(2)), (q(1), q(3))]).unwrap();
        assert_eq!(s.eval(&frac(1, 2)), q(2));
        assert_eq!(s.eval(&q(-1)), q(-2));
        assert_eq!(s.eval(&q(7)), f.eval(&q(7)));
    }

    #[test]
    fn json_round_trip() {
        let f = PLMap::bump(&q(0), &q(1), &q(2), &q(3)).unwrap();
        assert_eq!(PLMap::from_json(&f.to_json()).unwrap(), f);
        assert!(f.to_csv().contains("1,5/2"));
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-40i64..40, 1i64..6).prop_map(|(n, d)| frac(n, d))
    }

    fn plmap() -> impl Strategy<Value = PLMap> {
        (prop::collection::btree_set(-30i64..30, 1..6), prop::collection::vec(1i64..5, 6), 1i64..4, 1i64..4).prop_map(
            |(xs, gaps, ls, rs)| {
                let mut y = 0i64;
                let pts = xs
                    .into_iter()
                    .zip(gaps)
                    .map(|(x, g)| {
                        y += g;
                        (q(x), frac(y, 2))
                    })
                    .collect();
                PLMap::interpolate(pts, frac(ls, 2), q(rs)).unwrap()
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 128, rng_seed: prop::test_runner::RngSeed::Fixed(11), ..ProptestConfig::default() })]

        #[test]
        fn compose_is_associative(f in plmap(), g in plmap(), h in plmap(), x in small_rational()) {
            let a = f.compose(&g).compose(&h);
            let b = f.compose(&g.compose(&h));
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.eval(&x), f.eval(&g.eval(&h.eval(&x))));
        }

        #[test]
        fn inverse_round_trips(f in plmap(), x in small_rational()) {
            prop_assert_eq!(f.inverse().inverse(), f.clone());
            prop_assert_eq!(f.inverse().eval(&f.eval(&x)), x);
            prop_assert!(f.compose(&f.inverse()).is_identity());
        }

        #[test]
        fn eval_is_strictly_increasing(f in plmap(), x in small_rational(), y in small_rational()) {
            prop_assert!(f.is_increasing_at(&x, &y));
        }

        #[test]
        fn conjugated_support_is_image_of_support(
            f in plmap(), a in -10i64..10, w in prop::collection::vec(1i64..4, 3)
        ) {
            let x0 = q(a);
            let x1 = &x0 + q(w[0]);
            let y1 = &x1 + q(w[1]);
            let y0 = &y1 + q(w[2]);
            let b = PLMap::bump(&x0, &x1, &y1, &y0).unwrap();
            let c = b.conjugate(&f);
            let image = vec![Interval::bounded(f.eval(&x0), f.eval(&y0))];
            prop_assert_eq!(c.support(), image);
        }

        #[test]
        fn bump_postconditions(a in -20i64..20, w in prop::collection::vec((1i64..5, 1i64..4), 3)) {
            let x0 = q(a);
            let x1 = &x0 + frac(w[0].0, w[0].1);
            let y1 = &x1 + frac(w[1].0, w[1].1);
            let y0 = &y1 + frac(w[2].0, w[2].1);
            let b = PLMap::bump(&x0, &x1, &y1, &y0).unwrap();
            prop_assert_eq!(b.eval(&x0), x0.clone());
            prop_assert_eq!(b.eval(&y0), y0.clone());
            prop_assert!(b.eval(&x1) > y1);
            prop_assert_eq!(b.support(), vec![Interval::bounded(x0.clone(), y0.clone())]);
            prop_assert_eq!(b.eval(&(&x0 - q(1))), &x0 - q(1));
        }
    }
}
