//! Gluing realizations of many orderings of a free group into one action whose induced ordering
//! has all of them in the closure of its conjugation orbit.
//!
//! Station `k` carries an ordering and a ball. Its realization is rescaled so the box sits on
//! `[k − 1/3, k + 1/3]²`; the generator maps are glued by linear interpolation between boxes, and
//! `a`, `b` are modified between consecutive boxes so that some word carries `k + 1/3` to
//! `k + 2/3` ("bridges").

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{format_letters, BallSpec, FreeProduct, Group, Letter, Word};
use crate::order::{conjugate_oracle, DynOracle, SignVector, Validity};
use crate::pl::svg::{Curve, Plot, Square};
use crate::pl::PLMap;
use crate::rational::{self, int, serde_str, third, Rational};
use crate::realize::{realize, reference_sequence, rescale_block, Action, ActionOracle, BoxSquare, FiniteRealization};

/// One entry of the finite assignment `k ↦ (ball, ordering)`.
#[derive(Clone)]
pub struct Station {
    pub k: i64,
    pub ball: BallSpec,
    pub oracle: DynOracle<FreeProduct>,
}

/// Stations over a contiguous range of integers containing 0.
#[derive(Clone)]
pub struct StationAssignment {
    pub group: Arc<FreeProduct>,
    pub stations: Vec<Station>,
}

impl StationAssignment {
    pub fn new(group: Arc<FreeProduct>, mut stations: Vec<Station>) -> Result<Self> {
        if !group.is_free_group() || group.rank() < 2 {
            return Err(Error::Precondition("stations need a free group of rank at least 2".into()));
        }
        if stations.is_empty() {
            return Err(Error::Invalid("no stations".into()));
        }
        stations.sort_by_key(|s| s.k);
        let first = stations[0].k;
        for (i, s) in stations.iter().enumerate() {
            if s.k != first + i as i64 {
                return Err(Error::Invalid("station indices must be consecutive integers".into()));
            }
            s.ball.validate(&*group)?;
            if !(s.ball.contains_generator(0) && s.ball.contains_generator(1)) {
                return Err(Error::Precondition(format!("station {} ball must contain a and b", s.k)));
            }
            if s.ball.radius == 0 {
                return Err(Error::Invalid(format!("station {} has radius 0", s.k)));
            }
        }
        if !stations.iter().any(|s| s.k == 0) {
            return Err(Error::Invalid("station indices must include 0".into()));
        }
        for gen in 0..group.rank() as u32 {
            if !stations.iter().any(|s| s.ball.contains_generator(gen)) {
                return Err(Error::Precondition(format!(
                    "generator `{}` appears in no station",
                    group.names()[gen as usize]
                )));
            }
        }
        Ok(StationAssignment { group, stations })
    }
}

/// A station's realization, rescaled onto its box.
#[derive(Clone)]
pub struct Block {
    pub k: i64,
    pub realization: FiniteRealization<FreeProduct>,
    pub square: BoxSquare,
}

pub fn build_blocks(assign: &StationAssignment) -> Result<Vec<Block>> {
    assign
        .stations
        .par_iter()
        .map(|s| {
            let r = realize(assign.group.clone(), &*s.oracle, &s.ball)?;
            let realization = rescale_block(&r, s.k)?;
            let square = realization.box_of(s.ball.radius)?;
            Ok(Block { k: s.k, realization, square })
        })
        .collect()
}

/// Concatenates each block's graph inside its square and interpolates linearly in between,
/// with slope-one tails.
pub fn glue_generator(gen: u32, blocks: &[Block]) -> Result<PLMap> {
    let mut pts: Vec<(Rational, Rational)> = Vec::new();
    for b in blocks {
        let f = &b.realization.action.maps()[gen as usize];
        let seg = f
            .graph_in_square(&b.square.lo, &b.square.hi)
            .ok_or_else(|| Error::Postcondition(format!("generator {gen} misses the box of station {}", b.k)))?;
        pts.extend(seg);
    }
    PLMap::through(pts)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BridgeCase {
    /// `h(k + 1/3) = x₀`, `h(x₀) = k + 2/3`; witness `h²`.
    One,
    /// `h(k + 1/3) = x₀ = f(k + 2/3)`; witness `f⁻¹h`.
    Two,
}

#[derive(Clone, Debug, Serialize)]
pub struct BridgeWitness {
    pub k: i64,
    pub case: BridgeCase,
    pub word: String,
    #[serde(serialize_with = "serde_str")]
    pub x0: Rational,
    /// `k + 1/3` and its images along the word, ending at `k + 2/3`.
    pub iterates: Vec<String>,
    pub iterates_in_interval: bool,
    pub reaches_target: bool,
    #[serde(skip)]
    pub letters: Vec<Letter>,
}

impl BridgeWitness {
    pub fn ok(&self) -> bool {
        self.iterates_in_interval && self.reaches_target
    }
}

/// `sup{x ∈ [top − 2/3, top] : f(x) ≤ top}`. The set is nonempty when `f` keeps the station
/// point inside its box, which holds for every generator of the station's ball.
fn l_point(f: &PLMap, top: &Rational) -> Result<Rational> {
    let x = if f.eval(top) <= *top { top.clone() } else { f.inverse().eval(top) };
    if x < top - third() - third() {
        return Err(Error::Postcondition("generator pushes the whole box above it".into()));
    }
    Ok(x)
}

/// `inf{x ∈ [bottom, bottom + 2/3] : f(x) ≥ bottom}`.
fn r_point(f: &PLMap, bottom: &Rational) -> Result<Rational> {
    let x = if f.eval(bottom) >= *bottom { bottom.clone() } else { f.inverse().eval(bottom) };
    if x > bottom + third() + third() {
        return Err(Error::Postcondition("generator pulls the whole box below it".into()));
    }
    Ok(x)
}

/// Modifies `a` and `b` strictly between boxes `k` and `k + 1` so that a word carries `k + 1/3`
/// to `k + 2/3` through `[k − 1/3, k + 4/3]`.
pub fn bridge(action: &mut Action, names: &[String], k: i64) -> Result<BridgeWitness> {
    let top = int(k) + third();
    let bottom = int(k + 1) - third();
    let x0 = rational::midpoint(&top, &bottom);
    let letters = [Letter::pos(0), Letter::neg(0), Letter::pos(1), Letter::neg(1)];
    let lr: Vec<(Rational, Rational)> = letters
        .iter()
        .map(|&l| Ok((l_point(action.map(l), &top)?, r_point(action.map(l), &bottom)?)))
        .collect::<Result<_>>()?;
    let case_one = (0..4).find(|&i| lr[i].0 < top && lr[i].1 == bottom);
    let (case, word) = if let Some(i) = case_one {
        let h = letters[i];
        let f = action.map(h).clone();
        let end = f.eval(&bottom);
        if end <= bottom {
            return Err(Error::Postcondition(format!("degenerate bridge at {k}: h fixes k + 2/3")));
        }
        let new = f.splice(vec![
            (lr[i].0.clone(), top.clone()),
            (top.clone(), x0.clone()),
            (x0.clone(), bottom.clone()),
            (bottom.clone(), end),
        ])?;
        action.set_letter(h, new);
        (BridgeCase::One, vec![h, h])
    } else {
        let hi = (0..2).find(|&i| lr[i].0 < top);
        let fi = (2..4).find(|&i| lr[i].0 < top);
        let (Some(hi), Some(fi)) = (hi, fi) else {
            return Err(Error::Postcondition(format!("degenerate bridge at {k}: a generator fixes k + 1/3")));
        };
        let (h, f) = (letters[hi], letters[fi]);
        let hm = action.map(h).clone();
        let fm = action.map(f).clone();
        let new_h = hm.splice(vec![
            (lr[hi].0.clone(), top.clone()),
            (top.clone(), x0.clone()),
            (lr[hi].1.clone(), bottom.clone()),
        ])?;
        let new_f = fm.splice(vec![
            (lr[fi].0.clone(), top.clone()),
            (bottom.clone(), x0.clone()),
            (lr[fi].1.clone(), bottom.clone()),
        ])?;
        action.set_letter(h, new_h);
        action.set_letter(f, new_f);
        (BridgeCase::Two, vec![f.inverse(), h])
    };
    let path = action.path(&word, &top);
    let lo = int(k) - third();
    let hi = int(k + 1) + third();
    Ok(BridgeWitness {
        k,
        case,
        word: format_letters(names, &word),
        x0,
        iterates: path.iter().map(rational::format).collect(),
        iterates_in_interval: path.iter().all(|x| &lo <= x && x <= &hi),
        reaches_target: path.last() == Some(&bottom),
        letters: word,
    })
}

/// The assembled action with the words used to move between stations.
pub struct Assembly {
    pub group: Arc<FreeProduct>,
    pub blocks: Vec<Block>,
    pub action: Action,
    pub bridges: Vec<BridgeWitness>,
    /// `u_k` carries `k` to `k + 1`, for every consecutive pair of stations.
    pub steps: Vec<(i64, Word)>,
    /// The boxes of every block still carry the block's graphs after bridging.
    pub boxes_preserved: bool,
}

impl Assembly {
    /// `w_k` with `w_k(0) = k`.
    pub fn conjugator(&self, k: i64) -> Result<Word> {
        let g = &*self.group;
        let step = |j: i64| {
            self.steps
                .iter()
                .find(|(i, _)| *i == j)
                .map(|(_, u)| u.clone())
                .ok_or_else(|| Error::Invalid(format!("no station at {k}")))
        };
        let mut w = g.identity();
        if k > 0 {
            for j in 0..k {
                w = g.mul(&step(j)?, &w);
            }
        } else {
            for j in (k..0).rev() {
                w = g.mul(&g.inv(&step(j)?), &w);
            }
        }
        Ok(w)
    }

    pub fn svg(&self, width: u32, height: u32) -> String {
        let lo = int(self.blocks[0].k - 1);
        let hi = int(self.blocks.last().unwrap().k + 1);
        let mut plot = Plot::new(lo, hi);
        plot.width = width;
        plot.height = height;
        plot.title = "assembled generators".into();
        for (i, f) in self.action.maps().iter().enumerate() {
            plot.curves.push(Curve { map: f, label: self.group.names()[i].clone() });
        }
        for b in &self.blocks {
            plot.squares.push(Square {
                lo: b.square.lo.clone(),
                hi: b.square.hi.clone(),
                label: format!("station {}", b.k),
                dashed: false,
            });
        }
        for w in &self.bridges {
            plot.squares.push(Square {
                lo: int(w.k) - third(),
                hi: int(w.k + 1) + third(),
                label: format!("bridge {}", w.k),
                dashed: true,
            });
        }
        plot.render()
    }
}

pub fn assemble(assign: &StationAssignment) -> Result<Assembly> {
    let g = &*assign.group;
    let blocks = build_blocks(assign)?;
    let maps = (0..g.rank() as u32).map(|s| glue_generator(s, &blocks)).collect::<Result<Vec<_>>>()?;
    let mut action = Action::new(maps);
    let mut bridges = Vec::new();
    for pair in blocks.windows(2) {
        bridges.push(bridge(&mut action, g.names(), pair[0].k)?);
    }
    let boxes_preserved = blocks.iter().all(|b| {
        (0..g.rank())
            .all(|s| b.realization.action.maps()[s].agrees_in_square(&action.maps()[s], &b.square.lo, &b.square.hi))
    });
    if !boxes_preserved {
        return Err(Error::Postcondition("bridging changed a station box".into()));
    }
    let mut steps = Vec::new();
    for (pair, br) in blocks.windows(2).zip(&bridges) {
        let (from, to) = (&pair[0], &pair[1]);
        let (_, plus) = from.realization.extreme_indices(from.square.radius);
        let (minus, _) = to.realization.extreme_indices(to.square.radius);
        let lambda_plus = from.realization.placed.get(plus);
        let lambda_minus = to.realization.placed.get(minus);
        let u = g.mul(&g.mul(&g.inv(lambda_minus), &g.multiply_letters(&br.letters)), lambda_plus);
        let image = action.eval(&g.letters(&u), &int(from.k));
        if image != int(to.k) {
            return Err(Error::Postcondition(format!(
                "step word {} sends {} to {}",
                g.format(&u),
                from.k,
                rational::format(&image)
            )));
        }
        steps.push((from.k, u));
    }
    Ok(Assembly { group: assign.group.clone(), blocks, action, bridges, steps, boxes_preserved })
}

/// The ordering induced at `0`, then at the canonical enumeration of the rationals.
pub fn dense_oracle(assembly: &Assembly) -> DynOracle<FreeProduct> {
    Arc::new(ActionOracle::new(
        assembly.group.clone(),
        assembly.action.clone(),
        reference_sequence(&[int(0)]),
        Validity::Infinite,
        "dense-orbit".into(),
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityWitness {
    pub k: i64,
    pub target: String,
    pub w_k: String,
    pub w_k_length: usize,
    #[serde(serialize_with = "serde_str")]
    pub w_k_at_zero: Rational,
    pub words: usize,
    pub matched: bool,
    pub first_mismatch: Option<String>,
}

/// Conjugates the assembled ordering by `w_k⁻¹` and compares it with station `k`'s ordering on
/// the station's ball.
pub fn density_witness(
    assign: &StationAssignment,
    assembly: &Assembly,
    dense: &DynOracle<FreeProduct>,
    k: i64,
) -> Result<DensityWitness> {
    let g = &*assign.group;
    let station =
        assign.stations.iter().find(|s| s.k == k).ok_or_else(|| Error::Invalid(format!("no station at {k}")))?;
    let w = assembly.conjugator(k)?;
    let at_zero = assembly.action.eval(&g.letters(&w), &int(0));
    if at_zero != int(k) {
        return Err(Error::Postcondition(format!("w_{k}(0) = {}", rational::format(&at_zero))));
    }
    let conj = conjugate_oracle(dense.clone(), g.inv(&w));
    let b = crate::group::ball(g, &station.ball)?;
    let got = SignVector::of(&*conj, &b)?;
    let want = SignVector::of(&*station.oracle, &b)?;
    let diff = got.first_difference(&want);
    Ok(DensityWitness {
        k,
        target: station.oracle.describe(),
        w_k: g.format(&w),
        w_k_length: w.length(),
        w_k_at_zero: at_zero,
        words: b.len(),
        matched: diff.is_none(),
        first_mismatch: diff.map(|i| got.words[i].clone()),
    })
}
