//! Bounded semigroup closures and the property-(E) search over sign choices.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::Group;

/// A group element with the label used in witnesses.
#[derive(Clone, Debug)]
pub struct Labeled<E> {
    pub label: String,
    pub elem: E,
}

impl<E> Labeled<E> {
    pub fn new(label: impl Into<String>, elem: E) -> Self {
        Labeled { label: label.into(), elem }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureOutcome {
    /// Generator indices of a product equal to the target, if one was found.
    pub witness: Option<Vec<usize>>,
    /// Distinct elements explored.
    pub explored: usize,
    /// Longest product length explored.
    pub depth: usize,
}

pub const DEFAULT_CLOSURE_CAP: usize = 2_000_000;

/// Breadth-first search of products `s₁⋯s_k` (k ≤ depth) of the generators for `target`,
/// deduplicating globally. The witness is shortest.
pub fn closure_search<G: Group>(
    g: &G,
    gens: &[G::Elem],
    target: &G::Elem,
    depth: usize,
    cap: usize,
) -> Result<ClosureOutcome> {
    // parent[i] = (index of prefix product or usize::MAX for length one, generator index)
    let mut elems: Vec<G::Elem> = Vec::new();
    let mut parent: Vec<(usize, usize)> = Vec::new();
    let mut seen: HashMap<G::Elem, usize> = HashMap::new();
    let trace = |parent: &[(usize, usize)], mut i: usize| {
        let mut out = Vec::new();
        loop {
            let (p, s) = parent[i];
            out.push(s);
            if p == usize::MAX {
                break;
            }
            i = p;
        }
        out.reverse();
        out
    };
    let mut frontier = Vec::new();
    for (s, e) in gens.iter().enumerate() {
        if seen.contains_key(e) {
            continue;
        }
        let i = elems.len();
        elems.push(e.clone());
        parent.push((usize::MAX, s));
        seen.insert(e.clone(), i);
        if e == target {
            return Ok(ClosureOutcome { witness: Some(vec![s]), explored: elems.len(), depth: 1 });
        }
        frontier.push(i);
    }
    let mut reached = if gens.is_empty() { 0 } else { 1 };
    for level in 2..=depth {
        if frontier.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for &i in &frontier {
            for (s, e) in gens.iter().enumerate() {
                let p = g.mul(&elems[i], e);
                if seen.contains_key(&p) {
                    continue;
                }
                if elems.len() >= cap {
                    return Err(Error::CapExceeded { what: "closure size", cap });
                }
                let k = elems.len();
                elems.push(p.clone());
                parent.push((i, s));
                seen.insert(p.clone(), k);
                if &p == target {
                    return Ok(ClosureOutcome {
                        witness: Some(trace(&parent, k)),
                        explored: elems.len(),
                        depth: level,
                    });
                }
                next.push(k);
            }
        }
        frontier = next;
        reached = level;
    }
    Ok(ClosureOutcome { witness: None, explored: elems.len(), depth: reached })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EStatus {
    Compatible,
    Refuted,
}

#[derive(Clone, Debug, Serialize)]
pub struct EChoice {
    pub eta: Vec<i8>,
    pub status: EStatus,
    /// Factors of a product equal to `id` (refuted choices only).
    pub witness: Vec<String>,
    pub explored: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct EReport {
    pub closure_len: usize,
    pub choices: Vec<EChoice>,
}

impl EReport {
    pub fn compatible(&self) -> impl Iterator<Item = &EChoice> {
        self.choices.iter().filter(|c| c.status == EStatus::Compatible)
    }

    pub fn choice(&self, eta: &[i8]) -> Option<&EChoice> {
        self.choices.iter().find(|c| c.eta == eta)
    }
}

fn inverse_label(l: &str) -> String {
    if l.chars().all(|c| c.is_alphanumeric() || c == '_') {
        format!("{l}^-1")
    } else {
        format!("({l})^-1")
    }
}

/// For every `η ∈ {±1}^k`, searches the closure of `required ∪ {f_i^{η_i}}` (products of at most
/// `closure_len` factors) for the identity. Choices whose bounded closure avoids `id` are
/// reported compatible; the others carry a product equal to `id`.
pub fn property_e_search<G: Group>(
    g: &G,
    required: &[Labeled<G::Elem>],
    candidates: &[Labeled<G::Elem>],
    closure_len: usize,
    cap: usize,
) -> Result<EReport> {
    for l in required.iter().chain(candidates) {
        if g.is_identity(&l.elem) {
            return Err(Error::Invalid(format!("`{}` is the identity", l.label)));
        }
    }
    if candidates.len() > 16 {
        return Err(Error::CapExceeded { what: "candidate count", cap: 16 });
    }
    let k = candidates.len();
    let etas: Vec<Vec<i8>> = (0..1u32 << k)
        .map(|bits| (0..k).map(|i| if bits >> (k - 1 - i) & 1 == 0 { 1 } else { -1 }).collect())
        .collect();
    let id = g.identity();
    let choices = etas
        .into_par_iter()
        .map(|eta| {
            let mut gens: Vec<Labeled<G::Elem>> = required.to_vec();
            for (c, &e) in candidates.iter().zip(&eta) {
                gens.push(if e > 0 { c.clone() } else { Labeled::new(inverse_label(&c.label), g.inv(&c.elem)) });
            }
            let elems: Vec<G::Elem> = gens.iter().map(|l| l.elem.clone()).collect();
            let out = closure_search(g, &elems, &id, closure_len, cap)?;
            Ok(match out.witness {
                Some(w) => EChoice {
                    eta,
                    status: EStatus::Refuted,
                    witness: w.iter().map(|&i| gens[i].label.clone()).collect(),
                    explored: out.explored,
                },
                None => EChoice { eta, status: EStatus::Compatible, witness: Vec::new(), explored: out.explored },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EReport { closure_len, choices })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FreeProduct;

    #[test]
    fn single_candidate_in_free_group() {
        let g = FreeProduct::free(2);
        let a = g.parse_word("a").unwrap();
        let r = property_e_search(&g, &[], &[Labeled::new("a", a)], 6, DEFAULT_CLOSURE_CAP).unwrap();
        assert_eq!(r.compatible().count(), 2);
    }

    #[test]
    fn required_generators_force_the_sign() {
        let g = FreeProduct::free(2);
        let w = |s: &str| g.parse_word(s).unwrap();
        let req = [Labeled::new("a", w("a")), Labeled::new("b", w("b"))];
        let r = property_e_search(&g, &req, &[Labeled::new("b^-1", w("b^-1"))], 4, DEFAULT_CLOSURE_CAP).unwrap();
        let plus = r.choice(&[1]).unwrap();
        assert_eq!(plus.status, EStatus::Refuted);
        assert_eq!(plus.witness, vec!["b", "b^-1"]);
        assert_eq!(r.choice(&[-1]).unwrap().status, EStatus::Compatible);
    }

    #[test]
    fn closure_finds_shortest_product() {
        let g = FreeProduct::free(1);
        let a2 = g.parse_word("a^2").unwrap();
        let am3 = g.parse_word("a^-3").unwrap();
        let out = closure_search(&g, &[a2, am3], &g.identity(), 6, 1000).unwrap();
        assert_eq!(out.witness.unwrap().len(), 5);
        let a = g.parse_word("a").unwrap();
        assert!(matches!(
            closure_search(&g, &[a.clone(), g.parse_word("a^7").unwrap()], &g.parse_word("a^-1").unwrap(), 50, 10),
            Err(Error::CapExceeded { .. })
        ));
    }
}
