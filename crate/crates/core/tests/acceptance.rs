//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line with its wall time;
//! the test fails if any criterion fails or overruns its time bound.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use freelo::config::{parse_group, parse_stations, product_oracle, GroupChoice};
use freelo::dense::{assemble, dense_oracle, density_witness};
use freelo::group::{ball, BallSpec, FreeProduct, Group};
use freelo::order::{check_axioms, cone_search, property_e_search, Labeled, Sign, SignVector};
use freelo::perturb::{claim_a_report, perturb};
use freelo::pl::{Interval, PLMap};
use freelo::rational::{self, int, Rational};
use freelo::realize::{check_sign_lemma, induced_sign_at, realize, Action};
use freelo::xgroup::{isolation_probe, non_fg_witness, XGroup, XSignOracle};
use freelo::Error;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (u32, fn() -> Check, Option<Duration>);

fn product(name: &str) -> Arc<FreeProduct> {
    match parse_group(name).unwrap() {
        GroupChoice::Product(g) => g,
        GroupChoice::X(_) => unreachable!(),
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e(err: Error) -> String {
    err.to_string()
}

/// Lexicographic sign on ℤ^p read off the normal form, independent of the library's lex oracle.
fn lex_sign_by_hand(g: &FreeProduct, w: &freelo::group::Word) -> Sign {
    let mut exps = vec![0i64; g.rank()];
    for l in g.letters(w) {
        exps[l.gen as usize] += if l.inv { -1 } else { 1 };
    }
    exps.iter().find(|&&x| x != 0).map_or(Sign::Zero, |&x| Sign::from_int(x as i128))
}

fn criterion_1() -> Check {
    let z2 = product("Z^2");
    let lex = product_oracle(&z2, "lex").map_err(e)?;
    let r1 = check_axioms(&*lex, &BallSpec::full(&*z2, 3)).map_err(e)?;
    ensure(r1.ok(), || format!("lex-Z^2: {} violations", r1.violation_count))?;

    let f2 = product("F2");
    let magnus = product_oracle(&f2, "magnus").map_err(e)?;
    let r2 = check_axioms(&*magnus, &BallSpec::full(&*f2, 3)).map_err(e)?;
    ensure(r2.ball_size == 53, || format!("B_3(F2) has {} words", r2.ball_size))?;
    ensure(r2.ok(), || format!("magnus-F2: {} violations", r2.violation_count))?;

    let x = Arc::new(XGroup::new());
    let xs = XSignOracle::new(x.clone());
    let r3 = check_axioms(&xs, &BallSpec::full(&*x, 8)).map_err(e)?;
    ensure(r3.ok(), || format!("xsign: {} violations", r3.violation_count))?;
    Ok(format!("lex-Z^2 r3 {} words, magnus-F2 r3 53 words, xsign r8 {} words", r1.ball_size, r3.ball_size))
}

fn criterion_2() -> Check {
    let f2 = product("F2");
    let magnus = product_oracle(&f2, "magnus").map_err(e)?;
    let r = realize(f2.clone(), &*magnus, &BallSpec::full(&*f2, 3)).map_err(e)?;
    let rt = r.round_trip(&*magnus).map_err(e)?;
    ensure(rt.ok() && rt.words == 53, || format!("magnus-F2 mismatches {:?}", rt.mismatches))?;

    let z2 = product("Z^2");
    let lex = product_oracle(&z2, "lex").map_err(e)?;
    let spec = BallSpec::full(&*z2, 3);
    let r = realize(z2.clone(), &*lex, &spec).map_err(e)?;
    let rt = r.round_trip(&*lex).map_err(e)?;
    ensure(rt.ok(), || format!("lex-Z^2 mismatches {:?}", rt.mismatches))?;
    // the induced signs also match lexicographic order computed by hand
    let b = ball(&*z2, &spec).map_err(e)?;
    for (i, w) in b.iter() {
        let (s, _) = induced_sign_at(&r.action, std::slice::from_ref(&r.reference), b.spelling(i));
        ensure(s == lex_sign_by_hand(&z2, w), || format!("lex-Z^2 `{}`", z2.format(w)))?;
    }

    let x = Arc::new(XGroup::new());
    let xs = XSignOracle::new(x.clone());
    let r = realize(x.clone(), &xs, &BallSpec::full(&*x, 3)).map_err(e)?;
    let rt = r.round_trip(&xs).map_err(e)?;
    ensure(rt.ok(), || format!("xsign mismatches {:?}", rt.mismatches))?;
    Ok(format!("magnus-F2 53/53, lex-Z^2 {}/{}, xsign {}/{}", b.len(), b.len(), rt.words, rt.words))
}

fn criterion_3() -> Check {
    let f2 = product("F2");
    let magnus = product_oracle(&f2, "magnus").map_err(e)?;
    let r = realize(f2.clone(), &*magnus, &BallSpec::full(&*f2, 2)).map_err(e)?;
    let sq = r.box_of(2).map_err(e)?;
    let b2 = ball(&*f2, &BallSpec::full(&*f2, 2)).map_err(e)?;
    ensure(b2.len() == 17, || format!("B_2 has {} words", b2.len()))?;

    // bumps above and below the box, composed on both sides of every generator
    let up = PLMap::bump(&(&sq.hi + int(1)), &(&sq.hi + int(2)), &(&sq.hi + int(3)), &(&sq.hi + int(5))).map_err(e)?;
    let down =
        PLMap::bump(&(&sq.lo - int(7)), &(&sq.lo - int(5)), &(&sq.lo - int(3)), &(&sq.lo - int(1))).map_err(e)?;
    let outside = Action::new(
        r.action
            .maps()
            .iter()
            .enumerate()
            .map(|(i, f)| if i == 0 { up.compose(f).compose(&down) } else { down.compose(f).compose(&up) })
            .collect(),
    );
    let rep = check_sign_lemma(&r, &outside, 2).map_err(e)?;
    ensure(rep.ok(), || format!("paths left the box at {:?}", rep.first_divergence))?;
    let mut changed = 0;
    for (i, w) in b2.iter() {
        let (s, _) = induced_sign_at(&outside, std::slice::from_ref(&r.reference), b2.spelling(i));
        if s != magnus.sign(w).map_err(e)? {
            changed += 1;
        }
    }
    ensure(changed == 0, || format!("{changed} of 17 signs changed"))?;

    let mid = rational::midpoint(&sq.lo, &sq.hi);
    let inside = PLMap::bump(&sq.lo, &mid, &rational::midpoint(&mid, &sq.hi), &sq.hi).map_err(e)?;
    let mut maps = r.action.maps().to_vec();
    maps[1] = inside.compose(&maps[1]);
    match check_sign_lemma(&r, &Action::new(maps), 2) {
        Err(Error::Precondition(_)) => {}
        other => return Err(format!("inside tampering not detected: {:?}", other.map(|x| x.ok()))),
    }
    Ok(format!("17/17 signs kept, box [{}, {}] tampering rejected", rational::format(&sq.lo), rational::format(&sq.hi)))
}

fn criterion_4() -> Check {
    let mut lines = Vec::new();
    // the Z^2*Z base agrees with an exhaustive cone search seeded with its own B_2 signs
    let z2z = product("Z^2*Z");
    let base = product_oracle(&z2z, "magnus").map_err(e)?;
    let spec2 = BallSpec::full(&*z2z, 2);
    let b = ball(&*z2z, &spec2).map_err(e)?;
    let want = SignVector::of(&*base, &b).map_err(e)?;
    let seeds: Vec<_> = b.iter().filter(|(_, w)| !w.is_id()).map(|(_, w)| (w.clone(), base.sign(w).unwrap())).collect();
    let cone = cone_search(&*z2z, &spec2, &seeds, 2, freelo::order::cone::DEFAULT_NODE_CAP).map_err(e)?;
    ensure(cone.unique() == Some(&want), || "Z^2*Z base is not a cone on B_2".into())?;

    for (name, g) in [("Z*Z", product("Z*Z")), ("Z^2*Z", z2z)] {
        let o = product_oracle(&g, "magnus").map_err(e)?;
        for n in 1..=3u32 {
            let rep = perturb(g.clone(), &*o, n).and_then(|p| p.verify(&*o)).map_err(e)?;
            let tag = format!("{name} n={n}");
            ensure(rep.agreement_ball.agree && rep.agreement_ball.radius == n, || {
                format!("{tag}: (a) differs at {:?}", rep.agreement_ball.first_difference)
            })?;
            ensure(rep.flip_witness.flipped(), || format!("{tag}: (b) {} not flipped", rep.flip_witness.word))?;
            ensure(rep.axioms.ok() && rep.axioms.ball.radius == n + 2, || format!("{tag}: (c) axioms on B_{}", n + 2))?;
            let bound = Rational::new(1.into(), (n as i64).into());
            let witness_len = match &rep.distance.first_difference {
                Some(w) => g.parse_word(w).map_err(e)?.length(),
                None => rep.flip_witness.length,
            };
            ensure(rep.distance.value <= bound && witness_len <= 2 * n as usize + 4, || {
                format!("{tag}: (d) dist {} witness length {witness_len}", rational::format(&rep.distance.value))
            })?;
            ensure(rep.ok(), || format!("{tag}: report not ok"))?;
            lines.push(format!("{tag} dist {}", rational::format(&rep.distance.value)));
        }
    }
    Ok(lines.join(", "))
}

fn criterion_5() -> Check {
    let g = product("Z*Z");
    let o = product_oracle(&g, "magnus").map_err(e)?;
    let f = vec![g.parse_word("a").map_err(e)?, g.parse_word("b").map_err(e)?, g.parse_word("a.b^-1").map_err(e)?];
    let c = claim_a_report(g.clone(), &*o, &f, 2, 4, 6).map_err(e)?;
    ensure(c.gamma_star_base_positive, || format!("γ* = {} not base-positive", c.gamma_star))?;
    ensure(c.gamma_star_inverse_perturbed_positive && c.f_perturbed_positive, || "F ∪ {γ*⁻¹} not all positive".into())?;
    ensure(c.compatible_found, || "no compatible sign choice".into())?;
    ensure(c.candidates.len() == 4, || format!("{} candidates", c.candidates.len()))?;
    let found = c.property_e.compatible().count();
    Ok(format!("γ* = {}, {found} compatible choices of 16", c.gamma_star))
}

fn criterion_6() -> Check {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/stations_f2.json");
    let st = parse_stations(&std::fs::read_to_string(path).map_err(|x| x.to_string())?).map_err(e)?;
    ensure(st.stations.len() == 3, || "three stations expected".into())?;
    let g = st.group.clone();
    let asm = assemble(&st).map_err(e)?;
    for b in &asm.bridges {
        ensure(b.ok(), || format!("bridge {} ({}) fails (P)", b.k, b.word))?;
    }
    ensure(asm.bridges.len() == 2, || format!("{} bridges", asm.bridges.len()))?;
    let dense = dense_oracle(&asm);
    for s in &st.stations {
        let w = density_witness(&st, &asm, &dense, s.k).map_err(e)?;
        ensure(w.matched && w.words == 17, || format!("station {}: mismatch at {:?}", s.k, w.first_mismatch))?;
        // read the station's ordering directly off the action at the point k
        let b = ball(&*g, &s.ball).map_err(e)?;
        for (i, u) in b.iter() {
            let (sign, _) = induced_sign_at(&asm.action, &[int(s.k)], b.spelling(i));
            if sign != Sign::Zero {
                ensure(sign == s.oracle.sign(u).map_err(e)?, || format!("station {}: `{}` at k", s.k, g.format(u)))?;
            }
        }
    }
    let ax = check_axioms(&*dense, &BallSpec::full(&*g, 2)).map_err(e)?;
    ensure(ax.ok(), || format!("{} axiom violations", ax.violation_count))?;
    let cases: Vec<String> = asm.bridges.iter().map(|b| format!("{}:{}", b.k, b.word)).collect();
    Ok(format!("bridges [{}], 3×17 signs reproduced", cases.join(", ")))
}

fn criterion_7() -> Check {
    let x = XGroup::new();
    let iso = isolation_probe(&x, 4, 6, freelo::order::cone::DEFAULT_NODE_CAP).map_err(e)?;
    ensure(iso.unique_cone && iso.matches_xsign, || "cone on B_4 not unique or not xsign".into())?;
    ensure(iso.decompositions_ok, || format!("no decomposition for {:?}", iso.first_failure))?;
    let w = non_fg_witness(&x, 2, freelo::order::closure::DEFAULT_CLOSURE_CAP).map_err(e)?;
    ensure(w.witness == "a^1/2", || format!("witness {}", w.witness))?;
    // a^{1/2} = b⁻¹a⁻¹b computed here from the relation bab⁻¹ = a⁻²
    let half = x.parse("b^-1.a^-1.b").map_err(e)?;
    ensure(x.format(&half) == "a^1/2", || format!("b^-1.a^-1.b = {}", x.format(&half)))?;
    ensure(w.absent_from_closure && w.closure_depth == 4, || format!("closure evidence at depth {}", w.closure_depth))?;
    Ok(format!("unique cone on {} words, {} decompositions, witness a^1/2", iso.ball_size, iso.decompositions))
}

fn criterion_8() -> Check {
    let x = XGroup::new();
    let cands =
        vec![Labeled::new("a", x.parse("a").map_err(e)?), Labeled::new("bab^-1", x.parse("b.a.b^-1").map_err(e)?)];
    let rep = property_e_search(&x, &[], &cands, 3, freelo::order::closure::DEFAULT_CLOSURE_CAP).map_err(e)?;
    let pp = rep.choice(&[1, 1]).ok_or("no (+,+) entry")?;
    ensure(format!("{:?}", pp.status) == "Refuted", || format!("(+,+) is {:?}", pp.status))?;
    ensure(pp.witness == ["a", "a", "bab^-1"], || format!("witness {:?}", pp.witness))?;
    // the witness multiplies to the identity
    let prod = pp
        .witness
        .iter()
        .map(|w| x.parse(if w == "bab^-1" { "b.a.b^-1" } else { w }).unwrap())
        .fold(x.identity(), |acc, y| x.mul(&acc, &y));
    ensure(x.is_identity(&prod), || "witness product is not the identity".into())?;
    let compatible: Vec<String> = rep.compatible().map(|c| format!("{:?}", c.eta)).collect();
    ensure(!compatible.is_empty(), || "no compatible choice".into())?;
    Ok(format!("(+,+) refuted by a·a·bab^-1, compatible {}", compatible.join(" ")))
}

fn random_rational(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Rational {
    let d = rng.gen_range(1..=12i64);
    Rational::new(rng.gen_range(lo * d..=hi * d).into(), d.into())
}

fn positive_rational(rng: &mut ChaCha8Rng) -> Rational {
    Rational::new(rng.gen_range(1..=20i64).into(), rng.gen_range(1..=8i64).into())
}

fn random_map(rng: &mut ChaCha8Rng) -> PLMap {
    let k = rng.gen_range(1..=5);
    let (mut x, mut y) = (random_rational(rng, -5, 5), random_rational(rng, -5, 5));
    let mut pts = Vec::new();
    for _ in 0..k {
        pts.push((x.clone(), y.clone()));
        x += positive_rational(rng);
        y += positive_rational(rng);
    }
    PLMap::interpolate(pts, positive_rational(rng), positive_rational(rng)).unwrap()
}

fn criterion_9() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for i in 0..1000 {
        let f = random_map(&mut rng);
        let g = random_map(&mut rng);
        let fi = f.inverse();
        ensure(f.compose(&fi).is_identity() && fi.compose(&f).is_identity(), || format!("round trip {i}"))?;
        let fg = f.compose(&g);
        let x = random_rational(&mut rng, -20, 20);
        ensure(fg.eval(&x) == f.eval(&g.eval(&x)), || format!("compose {i} at {}", rational::format(&x)))?;
        ensure(fg.inverse() == g.inverse().compose(&fi), || format!("(fg)^-1 {i}"))?;
    }
    for i in 0..100 {
        let x0 = random_rational(&mut rng, -10, 10);
        let x1 = &x0 + positive_rational(&mut rng);
        let y1 = &x1 + positive_rational(&mut rng);
        let y0 = &y1 + positive_rational(&mut rng);
        let phi = PLMap::bump(&x0, &x1, &y1, &y0).map_err(e)?;
        ensure(phi.support() == vec![Interval::bounded(x0.clone(), y0.clone())], || format!("bump {i} support"))?;
        ensure(phi.eval(&x1) > y1, || format!("bump {i}: φ(x1) ≤ y1"))?;
        let left = &x0 - positive_rational(&mut rng);
        let right = &y0 + positive_rational(&mut rng);
        ensure(phi.eval(&left) == left && phi.eval(&right) == right && phi.eval(&x0) == x0, || {
            format!("bump {i} tails")
        })?;
        let t = Rational::new(rng.gen_range(1..100i64).into(), 100.into());
        let inner = &x0 + (&y0 - &x0) * t;
        ensure((phi.eval(&inner) - &inner).is_positive(), || format!("bump {i} not above the diagonal"))?;
    }
    let bad = PLMap::interpolate(vec![(int(0), int(1)), (int(1), int(0))], int(1), int(1));
    ensure(matches!(bad, Err(Error::NonMonotone(_))), || "non-monotone input accepted".into())?;
    Ok("1000 round trips, 100 bumps, non-monotone rejected".into())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        (1, criterion_1, Some(Duration::from_secs(10))),
        (2, criterion_2, None),
        (3, criterion_3, None),
        (4, criterion_4, Some(Duration::from_secs(60))),
        (5, criterion_5, None),
        (6, criterion_6, Some(Duration::from_secs(60))),
        (7, criterion_7, None),
        (8, criterion_8, None),
        (9, criterion_9, None),
    ];
    let mut failed = Vec::new();
    writeln!(std::io::stdout().lock()).unwrap();
    for (k, run, limit) in criteria {
        let t = Instant::now();
        let mut result = run();
        let took = t.elapsed();
        if let (Ok(_), Some(limit)) = (&result, limit) {
            if took > limit {
                result = Err(format!("took {took:.2?}, bound {limit:?}"));
            }
        }
        let line = match &result {
            Ok(msg) => format!("criterion {k}: PASS ({:.2} s) {msg}", took.as_secs_f64()),
            Err(msg) => format!("criterion {k}: FAIL ({:.2} s) {msg}", took.as_secs_f64()),
        };
        // written past the test harness capture so the lines show up in plain `cargo test` output
        writeln!(std::io::stdout().lock(), "{line}").unwrap();
        if result.is_err() {
            failed.push(k);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
