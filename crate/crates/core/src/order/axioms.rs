//! Cone axioms on a ball, the conjugation action, and the ball metric.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::{Conjugated, DynOracle, Oracle, Sign, SignVector};
use crate::error::{Error, Result};
use crate::group::{ball, format_letters, BallSpec, Group, Spheres};
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// The identity did not get sign zero.
    Identity { sign: Sign },
    /// `w` and `w⁻¹` are both positive.
    O2 { word: String },
    /// `sign(w⁻¹) ≠ −sign(w)` in some other way.
    Inverse { word: String, sign: Sign, inverse_sign: Sign },
    /// `u, v` positive but `uv` not.
    O1 { u: String, v: String, uv: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub ball: BallSpec,
    pub ball_size: usize,
    pub pairs_checked: u64,
    pub violation_count: usize,
    /// The first violations found, capped for readability.
    pub violations: Vec<Violation>,
}

impl AxiomReport {
    pub fn ok(&self) -> bool {
        self.violation_count == 0
    }
}

const MAX_LISTED: usize = 64;

/// Checks O1 (for in-ball products), O2, O3 and antisymmetry of `o` on the ball.
pub fn check_axioms<G: Group>(o: &dyn Oracle<G>, spec: &BallSpec) -> Result<AxiomReport> {
    let g = o.group();
    o.validity().require(spec.radius)?;
    let b = ball(g, spec)?;
    let sv = SignVector::of(o, &b)?;
    let signs = &sv.signs;
    let name = |i: usize| format_letters(g.names(), b.spelling(i));
    let mut violations = Vec::new();
    for (i, w) in b.iter() {
        if g.is_identity(w) {
            if signs[i] != Sign::Zero {
                violations.push(Violation::Identity { sign: signs[i] });
            }
            continue;
        }
        if signs[i] == Sign::Zero {
            return Err(Error::TotalityBreach(name(i)));
        }
        let j = b.position(&g.inv(w)).expect("balls are inverse-closed");
        if i < j {
            if signs[i] == Sign::Pos && signs[j] == Sign::Pos {
                violations.push(Violation::O2 { word: name(i) });
            } else if signs[j] != signs[i].negate() {
                violations.push(Violation::Inverse { word: name(i), sign: signs[i], inverse_sign: signs[j] });
            }
        }
    }
    let pos: Vec<usize> = (0..b.len()).filter(|&i| signs[i] == Sign::Pos).collect();
    let o1: Vec<(u64, Vec<Violation>, usize)> = pos
        .par_iter()
        .map(|&i| {
            let mut checked = 0u64;
            let mut found = Vec::new();
            let mut count = 0usize;
            for &j in &pos {
                let uv = g.mul(b.get(i), b.get(j));
                if let Some(k) = b.position(&uv) {
                    checked += 1;
                    if signs[k] != Sign::Pos {
                        count += 1;
                        if found.len() < MAX_LISTED {
                            found.push(Violation::O1 { u: name(i), v: name(j), uv: name(k) });
                        }
                    }
                }
            }
            (checked, found, count)
        })
        .collect();
    let mut pairs_checked = 0;
    let mut violation_count = violations.len();
    for (c, f, n) in o1 {
        pairs_checked += c;
        violation_count += n;
        violations.extend(f);
    }
    violations.truncate(MAX_LISTED);
    Ok(AxiomReport { ball: spec.clone(), ball_size: b.len(), pairs_checked, violation_count, violations })
}

/// The conjugate ordering `w ↦ sign(γ w γ⁻¹)`; its validity shrinks by `2|γ|`.
pub fn conjugate_oracle<G: Group + 'static>(o: DynOracle<G>, gamma: G::Elem) -> DynOracle<G> {
    Arc::new(Conjugated::new(o, gamma))
}

/// Whether every `f` is positive.
pub fn in_neighborhood<G: Group>(o: &dyn Oracle<G>, fs: &[G::Elem]) -> Result<bool> {
    for f in fs {
        if let Some(l) = o.group().length(f) {
            o.validity().require(l as u32)?;
        }
        if o.sign(f)? != Sign::Pos {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, Serialize)]
pub struct DistReport {
    /// `1/n`, or `0` when the oracles agree on every ball up to `scale`.
    #[serde(serialize_with = "rational::serde_str")]
    pub value: Rational,
    pub agree_at_scale: bool,
    pub scale: u32,
    /// Largest radius of agreement found (equal to `scale` when they agree at scale).
    pub agreement_radius: u32,
    /// First word (canonical order) with different signs.
    pub first_difference: Option<String>,
}

/// `1/n` for the largest ball `B_n` (n ≤ max_n) where the two oracles coincide, clamped to `n ≥ 1`;
/// `0` with `agree_at_scale` if they agree on `B_{max_n}`. Spheres are compared lazily, so the
/// cost stops at the first difference.
pub fn dist<G: Group>(o1: &dyn Oracle<G>, o2: &dyn Oracle<G>, max_n: u32) -> Result<DistReport> {
    o1.validity().require(max_n)?;
    o2.validity().require(max_n)?;
    let g = o1.group();
    let gens: Vec<u32> = (0..g.rank() as u32).collect();
    for (r, sphere) in Spheres::new(g, &gens).enumerate().take(max_n as usize + 1) {
        let diff = sphere.par_iter().map(|(w, _)| Ok(o1.sign(w)? != o2.sign(w)?)).collect::<Result<Vec<bool>>>()?;
        if let Some(i) = diff.iter().position(|&d| d) {
            let n = (r as u32).saturating_sub(1).max(1);
            return Ok(DistReport {
                value: Rational::new(1.into(), n.into()),
                agree_at_scale: false,
                scale: max_n,
                agreement_radius: r as u32 - 1,
                first_difference: Some(format_letters(g.names(), &sphere[i].1)),
            });
        }
    }
    Ok(DistReport {
        value: Rational::from_integer(0.into()),
        agree_at_scale: true,
        scale: max_n,
        agreement_radius: max_n,
        first_difference: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{FreeProduct, GroupSpec, Word};
    use crate::order::{LexOracle, MagnusOracle, Negated, Reversed, Validity};
    use crate::rational::int;

    fn magnus(n: u32) -> (Arc<FreeProduct>, DynOracle<FreeProduct>) {
        let g = Arc::new(FreeProduct::free(n));
        (g.clone(), Arc::new(MagnusOracle::new(g)))
    }

    struct Broken(Arc<FreeProduct>);
    impl Oracle<FreeProduct> for Broken {
        fn group(&self) -> &FreeProduct {
            &self.0
        }
        fn sign(&self, w: &Word) -> Result<Sign> {
            Ok(if w.is_id() { Sign::Zero } else { Sign::Pos })
        }
        fn validity(&self) -> Validity {
            Validity::Infinite
        }
        fn describe(&self) -> String {
            "all-positive".into()
        }
    }

    #[test]
    fn builtin_oracles_satisfy_axioms() {
        let (g, m) = magnus(2);
        let r = check_axioms(&*m, &BallSpec::full(&*g, 3)).unwrap();
        assert!(r.ok(), "{:?}", r.violations);
        assert_eq!(r.ball_size, 53);
        let z2 = Arc::new(FreeProduct::new(GroupSpec::free_abelian(2)).unwrap());
        let lex = LexOracle::new(z2.clone(), None, None).unwrap();
        assert!(check_axioms(&lex, &BallSpec::full(&*z2, 3)).unwrap().ok());
    }

    #[test]
    fn o2_violation_is_reported() {
        let g = Arc::new(FreeProduct::free(1));
        let r = check_axioms(&Broken(g.clone()), &BallSpec::full(&*g, 1)).unwrap();
        assert_eq!(r.violations[0], Violation::O2 { word: "a".into() });
        // a·a⁻¹ = id is not positive either
        assert!(r.violations.contains(&Violation::O1 { u: "a".into(), v: "a^-1".into(), uv: "id".into() }));
    }

    #[test]
    fn validity_is_enforced() {
        let (g, m) = magnus(2);
        let c = conjugate_oracle(m, g.parse_word("a").unwrap());
        assert_eq!(c.validity(), Validity::Infinite);
        struct Short(Arc<FreeProduct>);
        impl Oracle<FreeProduct> for Short {
            fn group(&self) -> &FreeProduct {
                &self.0
            }
            fn sign(&self, _: &Word) -> Result<Sign> {
                Ok(Sign::Zero)
            }
            fn validity(&self) -> Validity {
                Validity::Radius(2)
            }
            fn describe(&self) -> String {
                String::new()
            }
        }
        assert!(matches!(
            check_axioms(&Short(g.clone()), &BallSpec::full(&*g, 3)),
            Err(Error::ValidityExceeded { needed: 3, available: 2 })
        ));
        assert!(matches!(check_axioms(&Short(g.clone()), &BallSpec::full(&*g, 1)), Err(Error::TotalityBreach(_))));
        let c = Conjugated::new(Arc::new(Short(g.clone())), g.parse_word("a.b").unwrap());
        assert_eq!(c.validity(), Validity::Radius(0));
    }

    #[test]
    fn conjugation_examples() {
        let (g, m) = magnus(2);
        let b3 = ball(&*g, &BallSpec::full(&*g, 3)).unwrap();
        let base = SignVector::of(&*m, &b3).unwrap();
        let same = conjugate_oracle(m.clone(), g.identity());
        assert_eq!(SignVector::of(&*same, &b3).unwrap(), base);
        let gamma = g.parse_word("a.b^-1").unwrap();
        let there = conjugate_oracle(m.clone(), gamma.clone());
        let back = conjugate_oracle(there.clone(), g.inv(&gamma));
        assert_eq!(SignVector::of(&*back, &b3).unwrap(), base);
        // γ(V_f) = V_{fγ⁻¹}: the conjugate lies in V_f iff the original lies in V_{γ f γ⁻¹}
        for f in b3.elems().iter().filter(|w| !w.is_id()) {
            let lhs = in_neighborhood(&*there, std::slice::from_ref(f)).unwrap();
            let rhs = in_neighborhood(&*m, &[g.conjugate(&gamma, f)]).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn neighborhood_examples() {
        let (g, m) = magnus(2);
        assert!(in_neighborhood(&*m, &[]).unwrap());
        let a = g.parse_word("a").unwrap();
        let b = g.parse_word("b").unwrap();
        assert!(in_neighborhood(&*m, &[a.clone(), b]).unwrap());
        assert!(!in_neighborhood(&*m, &[g.inv(&a)]).unwrap());
    }

    #[test]
    fn dist_examples() {
        let (g, m) = magnus(2);
        let d = dist(&*m, &*m, 4).unwrap();
        assert!(d.agree_at_scale);
        assert_eq!(d.value, int(0));
        let neg = Negated { inner: m.clone(), mask: vec![true, false] };
        let d = dist(&*m, &neg, 4).unwrap();
        assert_eq!(d.value, int(1));
        assert_eq!(d.first_difference.as_deref(), Some("a"));
        // conjugating by a long word keeps agreement on small balls
        let c = Conjugated::new(m.clone(), g.parse_word("b^3").unwrap());
        let d = dist(&*m, &c, 6).unwrap();
        assert!(d.value <= int(1));
    }

    #[test]
    fn dist_is_an_ultrametric_on_samples() {
        let (g, m) = magnus(2);
        let words = ["a", "b", "a.b", "b^-1.a^2", "a.b.a^-1"];
        let mut oracles: Vec<DynOracle<FreeProduct>> = vec![m.clone(), Arc::new(Reversed { inner: m.clone() })];
        for w in words {
            oracles.push(conjugate_oracle(m.clone(), g.parse_word(w).unwrap()));
        }
        let n = 5;
        let d = |i: usize, j: usize| dist(&*oracles[i], &*oracles[j], n).unwrap().value;
        for i in 0..oracles.len() {
            for j in 0..oracles.len() {
                assert_eq!(d(i, j), d(j, i));
                for k in 0..oracles.len() {
                    assert!(d(i, k) <= std::cmp::max(d(i, j), d(j, k)));
                }
            }
        }
    }
}
