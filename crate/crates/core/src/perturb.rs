//! Non-isolation at finite scale: perturb the dynamical realization of an ordering on `G * H`
//! by conjugating the `H` generators with a bump placed beyond the box of `B_n`.
//!
//! `G` is the first factor and `H` the free product of the remaining ones.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{ball, format_letters, BallSpec, FreeProduct, Group, Letter, Word};
use crate::order::{
    check_axioms, dist, property_e_search, AxiomReport, DistReport, DynOracle, EReport, Labeled, Oracle, Sign,
    SignVector, Validity,
};
use crate::pl::PLMap;
use crate::rational::{self, serde_str, third, Rational};
use crate::realize::{extremes, realize, reference_sequence, Action, ActionOracle, FiniteRealization};

#[derive(Clone, Debug, Serialize)]
pub struct GhChoice {
    pub g: String,
    pub h: String,
    /// The letters were exchanged so that `gλ ≻ hλ`; `h` then comes from the first factor.
    pub swapped: bool,
    /// `λ⁺_{n+1}`.
    pub lambda: String,
    #[serde(skip)]
    pub g_letter: Letter,
    #[serde(skip)]
    pub h_letter: Letter,
    #[serde(skip)]
    pub lambda_word: Word,
}

fn is_h_side(group: &FreeProduct, gen: u32) -> bool {
    group.factor_of(gen) != 0
}

fn require_two_factors(group: &FreeProduct) -> Result<()> {
    if group.factor_count() < 2 {
        return Err(Error::Precondition("perturbation needs a free product of at least two factors".into()));
    }
    Ok(())
}

/// Picks `g ∈ G₀^±` and `h ∈ H₀^±` moving `λ⁺_{n+1}` up, relabelled so that `hλ ≺ gλ`.
pub fn choose_gh(o: &dyn Oracle<FreeProduct>, n: u32) -> Result<GhChoice> {
    let group = o.group();
    require_two_factors(group)?;
    let ext = extremes(o, &BallSpec::full(group, n + 1))?;
    let lambda = group.parse_word(&ext.lambda_plus)?;
    let pick = |h_side: bool| -> Result<Letter> {
        for gen in (0..group.rank() as u32).filter(|&s| is_h_side(group, s) == h_side) {
            for l in [Letter::pos(gen), Letter::neg(gen)] {
                if o.compare(&lambda, &group.mul(&group.letter(l), &lambda))? == Sign::Pos {
                    return Ok(l);
                }
            }
        }
        Err(Error::Inconsistent("no generator of a factor moves λ⁺ up".into()))
    };
    let (mut g, mut h) = (pick(false)?, pick(true)?);
    let (gl, hl) = (group.mul(&group.letter(g), &lambda), group.mul(&group.letter(h), &lambda));
    let swapped = match o.compare(&hl, &gl)? {
        Sign::Pos => false,
        Sign::Neg => {
            std::mem::swap(&mut g, &mut h);
            true
        }
        Sign::Zero => return Err(Error::Inconsistent("gλ and hλ compare equal".into())),
    };
    Ok(GhChoice {
        g: format_letters(group.names(), &[g]),
        h: format_letters(group.names(), &[h]),
        swapped,
        lambda: ext.lambda_plus,
        g_letter: g,
        h_letter: h,
        lambda_word: lambda,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbationPlan {
    pub n: u32,
    pub g: String,
    pub h: String,
    pub swapped: bool,
    pub lambda_n: String,
    pub lambda_n1: String,
    #[serde(serialize_with = "serde_str")]
    pub t_lambda: Rational,
    #[serde(serialize_with = "serde_str")]
    pub t_h_lambda: Rational,
    #[serde(serialize_with = "serde_str")]
    pub t_g_lambda: Rational,
    #[serde(serialize_with = "serde_str")]
    pub x0: Rational,
    #[serde(serialize_with = "serde_str")]
    pub x1: Rational,
    #[serde(serialize_with = "serde_str")]
    pub y1: Rational,
    #[serde(serialize_with = "serde_str")]
    pub y0: Rational,
    pub phi: PLMap,
    /// Generators whose maps get conjugated by `φ`.
    pub conjugated: Vec<String>,
    #[serde(skip)]
    pub conjugated_gens: Vec<u32>,
}

/// Places the bump: `x0, x1` trisect `(t(λ), t(hλ))`, `y1, y0` trisect `(t(gλ), t(gλ) + 1)`.
/// Verifies the chain, the bump, and the two inequalities the argument needs.
pub fn build_plan(r: &FiniteRealization<FreeProduct>, choice: &GhChoice, n: u32) -> Result<PerturbationPlan> {
    let group = &*r.group;
    if r.scope_radius < n + 1 {
        return Err(Error::Precondition(format!("realization scope {} is below n + 1", r.scope_radius)));
    }
    let t = |w: &Word| {
        r.t_of(w).cloned().ok_or_else(|| Error::OutOfScope { word: group.format(w), radius: r.scope_radius })
    };
    let lambda = &choice.lambda_word;
    let hl = group.mul(&group.letter(choice.h_letter), lambda);
    let gl = group.mul(&group.letter(choice.g_letter), lambda);
    let (tl, th, tg) = (t(lambda)?, t(&hl)?, t(&gl)?);
    let step = (&th - &tl) * third();
    let x0 = &tl + &step;
    let x1 = &x0 + &step;
    let y1 = &tg + third();
    let y0 = &y1 + third();
    let chain = [&tl, &x0, &x1, &th, &tg, &y1, &y0];
    if !chain.windows(2).all(|p| p[0] < p[1]) {
        return Err(Error::Postcondition(format!(
            "chain fails: {}",
            chain.iter().map(|x| rational::format(x)).collect::<Vec<_>>().join(" < ")
        )));
    }
    let phi = PLMap::bump(&x0, &x1, &y1, &y0)?;
    let support = phi.support();
    if support.len() != 1 || support[0].lo.as_ref() != Some(&x0) || support[0].hi.as_ref() != Some(&y0) {
        return Err(Error::Postcondition("bump support is not (x0, y0)".into()));
    }
    if phi.eval(&x1) <= y1 {
        return Err(Error::Postcondition("bump does not push x1 above y1".into()));
    }
    let conjugated_gens: Vec<u32> =
        (0..group.rank() as u32).filter(|&s| is_h_side(group, s) != choice.swapped).collect();
    // the conjugated side must contain h
    debug_assert!(conjugated_gens.contains(&choice.h_letter.gen));
    let (_, plus_n) = r.extreme_indices(n);
    let t_lambda_n = r.t[plus_n].clone();

    // φ ∘ D(hλ) ∘ φ⁻¹ (0) > D(gλ)(0)
    let h_lambda_letters = group.letters(&hl);
    let zero = Rational::from_integer(0.into());
    let lhs = phi.eval(&r.action.eval(&h_lambda_letters, &phi.inverse().eval(&zero)));
    if lhs <= tg {
        return Err(Error::Postcondition("conjugated hλ does not pass gλ".into()));
    }
    // φ ∘ D(h̄) ∘ φ⁻¹ = D(h̄) on placed points up to t(λ⁺_n)
    for &s in &conjugated_gens {
        for l in [Letter::pos(s), Letter::neg(s)] {
            let f = r.action.map(l);
            let conj = f.conjugate(&phi);
            if let Some(x) = r.t.iter().filter(|x| **x <= t_lambda_n).find(|x| conj.eval(x) != f.eval(x)) {
                return Err(Error::Postcondition(format!(
                    "conjugation changes `{}` at {} below t(λ⁺_n)",
                    format_letters(group.names(), &[l]),
                    rational::format(x)
                )));
            }
        }
    }
    Ok(PerturbationPlan {
        n,
        g: choice.g.clone(),
        h: choice.h.clone(),
        swapped: choice.swapped,
        lambda_n: r.name(plus_n),
        lambda_n1: choice.lambda.clone(),
        t_lambda: tl,
        t_h_lambda: th,
        t_g_lambda: tg,
        x0,
        x1,
        y1,
        y0,
        phi,
        conjugated: conjugated_gens.iter().map(|&s| group.names()[s as usize].clone()).collect(),
        conjugated_gens,
    })
}

/// Leaves one side's generator maps alone and conjugates the other side's by `φ`.
pub fn perturbed_action(r: &FiniteRealization<FreeProduct>, plan: &PerturbationPlan) -> Action {
    let mut act = r.action.clone();
    for &s in &plan.conjugated_gens {
        act.set(s, r.action.maps()[s as usize].conjugate(&plan.phi));
    }
    act
}

/// A perturbed ordering with everything needed to audit it.
pub struct Perturbation {
    pub group: Arc<FreeProduct>,
    pub n: u32,
    pub realization: FiniteRealization<FreeProduct>,
    pub choice: GhChoice,
    pub plan: PerturbationPlan,
    pub action: Action,
    pub oracle: DynOracle<FreeProduct>,
}

/// Validity of the induced ordering: for free groups the action is a genuine action and the
/// induced ordering is global; with free-abelian factors of rank ≥ 2 the interpolated maps need
/// not commute, so only words of length ≤ n + 2 are trusted.
fn induced_validity(group: &FreeProduct, n: u32) -> Validity {
    if group.is_free_group() {
        Validity::Infinite
    } else {
        Validity::Radius(n + 2)
    }
}

pub fn perturb(group: Arc<FreeProduct>, o: &dyn Oracle<FreeProduct>, n: u32) -> Result<Perturbation> {
    if n == 0 {
        return Err(Error::Invalid("n must be at least 1".into()));
    }
    require_two_factors(&group)?;
    o.validity().require(n + 3)?;
    let choice = choose_gh(o, n)?;
    let realization = realize(group.clone(), o, &BallSpec::full(&*group, n + 1))?;
    let plan = build_plan(&realization, &choice, n)?;
    let action = perturbed_action(&realization, &plan);
    let oracle: DynOracle<FreeProduct> = Arc::new(ActionOracle::new(
        group.clone(),
        action.clone(),
        reference_sequence(std::slice::from_ref(&realization.reference)),
        induced_validity(&group, n),
        format!("perturbed({}, n={n})", o.describe()),
    ));
    Ok(Perturbation { group, n, realization, choice, plan, action, oracle })
}

pub fn perturbed_oracle(
    group: Arc<FreeProduct>,
    o: &dyn Oracle<FreeProduct>,
    n: u32,
) -> Result<DynOracle<FreeProduct>> {
    Ok(perturb(group, o, n)?.oracle)
}

#[derive(Clone, Debug, Serialize)]
pub struct AgreementBall {
    pub radius: u32,
    pub words: usize,
    pub agree: bool,
    pub first_difference: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlipWitness {
    /// `(hλ)⁻¹ gλ`.
    pub word: String,
    pub length: usize,
    pub h_lambda: String,
    pub g_lambda: String,
    /// `sign((hλ)⁻¹ gλ)` under the base ordering.
    pub base_sign: Sign,
    /// The same comparison after perturbation, evaluated on `hλ` and `gλ`.
    pub perturbed_sign: Sign,
}

impl FlipWitness {
    pub fn flipped(&self) -> bool {
        self.base_sign == Sign::Pos && self.perturbed_sign == Sign::Neg
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbReport {
    pub group: String,
    pub base: String,
    pub n: u32,
    pub choice: GhChoice,
    pub plan: PerturbationPlan,
    pub validity: Validity,
    pub agreement_ball: AgreementBall,
    pub box_agreement: bool,
    pub untouched_maps_identical: bool,
    pub flip_witness: FlipWitness,
    pub axioms: AxiomReport,
    pub distance: DistReport,
    /// `dist ≤ 1/n` and a disagreement of length ≤ 2n + 4 was exhibited.
    pub distance_ok: bool,
}

impl PerturbReport {
    pub fn ok(&self) -> bool {
        self.agreement_ball.agree
            && self.box_agreement
            && self.untouched_maps_identical
            && self.flip_witness.flipped()
            && self.axioms.ok()
            && self.distance_ok
    }
}

impl Perturbation {
    pub fn flip_word(&self) -> Word {
        let g = &*self.group;
        let lambda = &self.choice.lambda_word;
        let hl = g.mul(&g.letter(self.choice.h_letter), lambda);
        let gl = g.mul(&g.letter(self.choice.g_letter), lambda);
        g.quotient(&hl, &gl)
    }

    /// Checks agreement on `B_n`, the box condition, the flip, the axioms on `B_{n+2}` and the
    /// distance against `base`.
    pub fn verify(&self, base: &dyn Oracle<FreeProduct>) -> Result<PerturbReport> {
        let g = &*self.group;
        let n = self.n;
        let p = &*self.oracle;
        let bn = ball(g, &BallSpec::full(g, n))?;
        let (sv_base, sv_pert) = (SignVector::of(base, &bn)?, SignVector::of(p, &bn)?);
        let diff = sv_base.first_difference(&sv_pert);
        let agreement_ball = AgreementBall {
            radius: n,
            words: bn.len(),
            agree: diff.is_none(),
            first_difference: diff.map(|i| sv_base.words[i].clone()),
        };
        let square = self.realization.box_of(n)?;
        let box_agreement = (0..g.rank()).all(|s| {
            self.realization.action.maps()[s].agrees_in_square(&self.action.maps()[s], &square.lo, &square.hi)
        });
        let untouched_maps_identical = (0..g.rank() as u32)
            .filter(|s| !self.plan.conjugated_gens.contains(s))
            .all(|s| self.realization.action.maps()[s as usize] == self.action.maps()[s as usize]);
        let lambda = &self.choice.lambda_word;
        let hl = g.mul(&g.letter(self.choice.h_letter), lambda);
        let gl = g.mul(&g.letter(self.choice.g_letter), lambda);
        let w = g.quotient(&hl, &gl);
        let flip_witness = FlipWitness {
            word: g.format(&w),
            length: w.length(),
            h_lambda: g.format(&hl),
            g_lambda: g.format(&gl),
            base_sign: base.sign(&w)?,
            perturbed_sign: p.compare(&hl, &gl)?,
        };
        let axioms = check_axioms(p, &BallSpec::full(g, n + 2))?;
        let validity = p.validity();
        let scale = match validity {
            Validity::Infinite => 2 * n + 4,
            Validity::Radius(v) => v,
        };
        let distance = dist(base, p, scale)?;
        let bound = Rational::new(1.into(), n.into());
        let witnessed = match &distance.first_difference {
            Some(word) => g.parse_word(word)?.length() <= (2 * n + 4) as usize,
            // beyond the trusted radius the disagreement is the flipped comparison itself
            None => flip_witness.flipped() && flip_witness.length <= (2 * n + 4) as usize,
        };
        let distance_ok = distance.value <= bound && witnessed;
        Ok(PerturbReport {
            group: g.spec().short_name(),
            base: base.describe(),
            n,
            choice: self.choice.clone(),
            plan: self.plan.clone(),
            validity,
            agreement_ball,
            box_agreement,
            untouched_maps_identical,
            flip_witness,
            axioms,
            distance,
            distance_ok,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClaimAReport {
    pub n: u32,
    pub f: Vec<String>,
    pub gamma_star: String,
    pub gamma_star_base_positive: bool,
    pub gamma_star_inverse_perturbed_positive: bool,
    pub f_perturbed_positive: bool,
    pub candidates: Vec<String>,
    pub property_e: EReport,
    pub compatible_found: bool,
}

impl ClaimAReport {
    pub fn ok(&self) -> bool {
        self.gamma_star_base_positive
            && self.gamma_star_inverse_perturbed_positive
            && self.f_perturbed_positive
            && self.compatible_found
    }
}

/// Builds `γ* = (hλ)⁻¹ gλ` from a perturbation at radius `n` and checks that `F ∪ {γ*⁻¹}` is
/// positive afterwards. Then searches bounded closures of `F ∪ {γ*⁻¹}` together with sign choices
/// on `candidate_count` inverse-pair representatives from `B_2`.
pub fn claim_a_report(
    group: Arc<FreeProduct>,
    o: &dyn Oracle<FreeProduct>,
    f: &[Word],
    n: u32,
    candidate_count: usize,
    closure_len: usize,
) -> Result<ClaimAReport> {
    let g = &*group;
    for w in f {
        if w.length() > n as usize {
            return Err(Error::Precondition(format!("`{}` lies outside B({n})", g.format(w))));
        }
        if o.sign(w)? != Sign::Pos {
            return Err(Error::Precondition(format!("`{}` is not positive", g.format(w))));
        }
    }
    let p = perturb(group.clone(), o, n)?;
    let gamma = p.flip_word();
    let gamma_inv = g.inv(&gamma);
    let lambda = &p.choice.lambda_word;
    let hl = g.mul(&g.letter(p.choice.h_letter), lambda);
    let gl = g.mul(&g.letter(p.choice.g_letter), lambda);
    // γ*⁻¹ = (gλ)⁻¹ hλ is positive exactly when gλ ≺ hλ
    let gamma_inv_pos = p.oracle.compare(&gl, &hl)? == Sign::Pos;
    let mut f_pos = true;
    for w in f {
        f_pos &= p.oracle.sign(w)? == Sign::Pos;
    }
    let mut required: Vec<Labeled<Word>> = f.iter().map(|w| Labeled::new(g.format(w), w.clone())).collect();
    required.push(Labeled::new(g.format(&gamma_inv), gamma_inv.clone()));
    let taken: Vec<Word> = required.iter().flat_map(|l| [l.elem.clone(), g.inv(&l.elem)]).collect();
    let b2 = ball(g, &BallSpec::full(g, 2))?;
    let mut candidates: Vec<Labeled<Word>> = Vec::new();
    for (_, w) in b2.iter() {
        if candidates.len() == candidate_count {
            break;
        }
        let wi = g.inv(w);
        if w.is_id() || taken.contains(w) || candidates.iter().any(|c| c.elem == *w || c.elem == wi) {
            continue;
        }
        candidates.push(Labeled::new(g.format(w), w.clone()));
    }
    let property_e =
        property_e_search(g, &required, &candidates, closure_len, crate::order::closure::DEFAULT_CLOSURE_CAP)?;
    let compatible_found = property_e.compatible().next().is_some();
    Ok(ClaimAReport {
        n,
        f: f.iter().map(|w| g.format(w)).collect(),
        gamma_star: g.format(&gamma),
        gamma_star_base_positive: o.sign(&gamma)? == Sign::Pos,
        gamma_star_inverse_perturbed_positive: gamma_inv_pos,
        f_perturbed_positive: f_pos,
        candidates: candidates.iter().map(|c| c.label.clone()).collect(),
        property_e,
        compatible_found,
    })
}
