//! Sign assignments on a ball satisfying the cone axioms, found by backtracking with unit
//! propagation.
//!
//! One boolean per inverse pair `{w, w⁻¹}`; every in-ball product `uv` gives the clause
//! `¬u⁺ ∨ ¬v⁺ ∨ (uv)⁺`. Branching takes the canonically smallest unassigned pair, positive first.

use std::collections::HashSet;

use serde::Serialize;

use super::{Sign, SignVector};
use crate::error::{Error, Result};
use crate::group::{ball, BallSpec, Group};

#[derive(Clone, Debug, Serialize)]
pub struct ConeOutcome {
    /// Assignments found, in search order (at most the requested number).
    pub solutions: Vec<SignVector>,
    /// True when the whole search space was exhausted, so `solutions` lists every assignment.
    pub complete: bool,
    pub variables: usize,
    pub clauses: usize,
    pub nodes: u64,
}

impl ConeOutcome {
    /// No assignment exists at this radius.
    pub fn refuted(&self) -> bool {
        self.complete && self.solutions.is_empty()
    }

    pub fn unique(&self) -> Option<&SignVector> {
        (self.complete && self.solutions.len() == 1).then(|| &self.solutions[0])
    }
}

pub const DEFAULT_NODE_CAP: u64 = 5_000_000;

type Lit = u32;

fn lit(var: usize, positive: bool) -> Lit {
    (2 * var + usize::from(!positive)) as Lit
}

fn neg(l: Lit) -> Lit {
    l ^ 1
}

struct Solver {
    clauses: Vec<Vec<Lit>>,
    occurs: Vec<Vec<usize>>, // literal -> clauses containing it
    value: Vec<Option<bool>>,
    trail: Vec<usize>,
    nodes: u64,
    node_cap: u64,
}

impl Solver {
    fn lit_value(&self, l: Lit) -> Option<bool> {
        self.value[(l / 2) as usize].map(|v| v == l.is_multiple_of(2))
    }

    fn assign(&mut self, l: Lit) {
        self.value[(l / 2) as usize] = Some(l.is_multiple_of(2));
        self.trail.push((l / 2) as usize);
    }

    fn undo(&mut self, len: usize) {
        while self.trail.len() > len {
            let v = self.trail.pop().unwrap();
            self.value[v] = None;
        }
    }

    /// Makes `pending` true and propagates; false on conflict.
    fn propagate(&mut self, mut pending: Vec<Lit>) -> bool {
        while let Some(l) = pending.pop() {
            match self.lit_value(l) {
                Some(true) => continue,
                Some(false) => return false,
                None => self.assign(l),
            }
            let falsified = neg(l);
            for ci in 0..self.occurs[falsified as usize].len() {
                let c = self.occurs[falsified as usize][ci];
                let mut open = None;
                let mut n_open = 0;
                let mut sat = false;
                for &x in &self.clauses[c] {
                    match self.lit_value(x) {
                        Some(true) => {
                            sat = true;
                            break;
                        }
                        Some(false) => {}
                        None => {
                            n_open += 1;
                            open = Some(x);
                        }
                    }
                }
                if sat {
                    continue;
                }
                match n_open {
                    0 => return false,
                    1 => pending.push(open.unwrap()),
                    _ => {}
                }
            }
        }
        true
    }

    fn search(&mut self, pending: Vec<Lit>, limit: usize, found: &mut Vec<Vec<bool>>) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > self.node_cap {
            return Err(Error::CapExceeded { what: "cone search nodes", cap: self.node_cap as usize });
        }
        let mark = self.trail.len();
        if !self.propagate(pending) {
            self.undo(mark);
            return Ok(false);
        }
        let Some(var) = self.value.iter().position(Option::is_none) else {
            found.push(self.value.iter().map(|v| v.unwrap()).collect());
            self.undo(mark);
            return Ok(found.len() >= limit);
        };
        for positive in [true, false] {
            if self.search(vec![lit(var, positive)], limit, found)? {
                self.undo(mark);
                return Ok(true);
            }
        }
        self.undo(mark);
        Ok(false)
    }
}

/// Searches for up to `max_solutions` sign assignments on the ball that satisfy the cone
/// constraints and the seeds. Exceeding `node_cap` is an error (inconclusive), distinct from a
/// refutation.
pub fn cone_search<G: Group>(
    g: &G,
    spec: &BallSpec,
    seeds: &[(G::Elem, Sign)],
    max_solutions: usize,
    node_cap: u64,
) -> Result<ConeOutcome> {
    let b = ball(g, spec)?;
    let n = b.len();
    // element index -> literal that means "this element is positive"
    let mut elit: Vec<Option<Lit>> = vec![None; n];
    let mut reps = Vec::new();
    for (i, w) in b.iter() {
        if g.is_identity(w) || elit[i].is_some() {
            continue;
        }
        let j = b.position(&g.inv(w)).expect("balls are inverse-closed");
        if j == i {
            return Err(Error::Unsupported(format!("`{}` has order two", g.format(w))));
        }
        let v = reps.len();
        reps.push(i);
        elit[i] = Some(lit(v, true));
        elit[j] = Some(lit(v, false));
    }
    let mut set: HashSet<Vec<Lit>> = HashSet::new();
    for i in 0..n {
        let Some(li) = elit[i] else { continue };
        for j in 0..n {
            let Some(lj) = elit[j] else { continue };
            let Some(k) = b.position(&g.mul(b.get(i), b.get(j))) else { continue };
            let Some(lk) = elit[k] else { continue };
            let mut c = vec![neg(li), neg(lj), lk];
            c.sort_unstable();
            c.dedup();
            if c.windows(2).any(|p| p[0] ^ 1 == p[1] && p[0] % 2 == 0) {
                continue; // tautology
            }
            set.insert(c);
        }
    }
    let mut clauses: Vec<Vec<Lit>> = set.into_iter().collect();
    clauses.sort();
    let mut occurs = vec![Vec::new(); 2 * reps.len()];
    for (ci, c) in clauses.iter().enumerate() {
        for &l in c {
            occurs[l as usize].push(ci);
        }
    }
    let n_clauses = clauses.len();
    let mut solver = Solver { clauses, occurs, value: vec![None; reps.len()], trail: Vec::new(), nodes: 0, node_cap };
    let mut units = Vec::new();
    let mut contradiction = false;
    for (w, s) in seeds {
        let i = b.position(w).ok_or_else(|| Error::Invalid(format!("seed `{}` lies outside the ball", g.format(w))))?;
        match (elit[i], s) {
            (None, Sign::Zero) => {}
            (None, _) | (Some(_), Sign::Zero) => contradiction = true,
            (Some(l), Sign::Pos) => units.push(l),
            (Some(l), Sign::Neg) => units.push(neg(l)),
        }
    }
    let mut found = Vec::new();
    let stopped = if contradiction { false } else { solver.search(units, max_solutions.max(1), &mut found)? };
    let solutions = found
        .into_iter()
        .map(|vals| {
            let signs = (0..n)
                .map(|i| match elit[i] {
                    None => Sign::Zero,
                    Some(l) => {
                        if vals[(l / 2) as usize] == (l % 2 == 0) {
                            Sign::Pos
                        } else {
                            Sign::Neg
                        }
                    }
                })
                .collect();
            SignVector::from_signs(g, &b, signs)
        })
        .collect();
    Ok(ConeOutcome { solutions, complete: !stopped, variables: reps.len(), clauses: n_clauses, nodes: solver.nodes })
}
