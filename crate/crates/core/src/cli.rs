//! Subcommands shared by the binary and the C interface. Every report is JSON with a top-level
//! `schema` field; `ok` is false when an asserted postcondition failed.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Subcommand;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::{parse_generators, parse_group, parse_stations, product_oracle, x_oracle, GroupChoice};
use crate::dense::{assemble, dense_oracle, density_witness};
use crate::error::{Error, Result};
use crate::group::{BallSpec, Group};
use crate::order::{check_axioms, dist, property_e_search, DynOracle, Labeled};
use crate::perturb::{claim_a_report, perturb};
use crate::pl::svg::{Curve, Plot, Square};
use crate::rational::{self, int};
use crate::realize::{extremes, realize};
use crate::xgroup::{isolation_probe, non_fg_witness, XSignOracle};

pub const SCHEMA_VERSION: u32 = 1;

fn default_oracle() -> String {
    "magnus".into()
}
fn default_svg_size() -> u32 {
    640
}
fn default_closure_len() -> usize {
    6
}
fn default_candidates() -> usize {
    4
}
fn default_probe() -> u32 {
    4
}
fn default_decompose() -> u32 {
    6
}
fn default_non_fg() -> u32 {
    2
}
fn default_axioms_radius() -> u32 {
    8
}

#[derive(Debug, Clone, Subcommand, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    /// Check the cone axioms of an ordering on a ball.
    Axioms {
        /// F2, Z^2, Z*Z, Z^2*Z, X, ...
        #[arg(long)]
        group: String,
        #[arg(long, default_value = "magnus")]
        #[serde(default = "default_oracle")]
        oracle: String,
        #[arg(long)]
        radius: u32,
        /// Generator subset, e.g. `a,b` (default: all).
        #[arg(long)]
        #[serde(default)]
        generators: Option<String>,
    },
    /// Build the dynamical realization of an ordering on a ball.
    Realize {
        #[arg(long)]
        group: String,
        #[arg(long, default_value = "magnus")]
        #[serde(default = "default_oracle")]
        oracle: String,
        #[arg(long)]
        radius: u32,
        #[arg(long)]
        #[serde(default)]
        generators: Option<String>,
        /// Breakpoints of the generator maps.
        #[arg(long)]
        #[serde(default)]
        csv: Option<PathBuf>,
        #[arg(long)]
        #[serde(default)]
        svg: Option<PathBuf>,
        #[arg(long, default_value_t = 640)]
        #[serde(default = "default_svg_size")]
        svg_size: u32,
    },
    /// Perturb an ordering of a free product away from itself outside B(n).
    Perturb {
        #[arg(long)]
        group: String,
        #[arg(long, default_value = "magnus")]
        #[serde(default = "default_oracle")]
        oracle: String,
        #[arg(long)]
        n: u32,
        /// Comma-separated positive words F ⊂ B(n) for the property-(E) certificate.
        #[arg(long)]
        #[serde(default)]
        claim_a: Option<String>,
        #[arg(long, default_value_t = 6)]
        #[serde(default = "default_closure_len")]
        closure_len: usize,
        #[arg(long, default_value_t = 4)]
        #[serde(default = "default_candidates")]
        candidates: usize,
        #[arg(long)]
        #[serde(default)]
        svg: Option<PathBuf>,
        #[arg(long, default_value_t = 640)]
        #[serde(default = "default_svg_size")]
        svg_size: u32,
    },
    /// Glue station realizations into one action and check the density witnesses.
    DenseOrbit {
        /// Station file (JSON).
        #[arg(long)]
        stations: PathBuf,
        #[arg(long)]
        #[serde(default)]
        svg: Option<PathBuf>,
        #[arg(long, default_value_t = 640)]
        #[serde(default = "default_svg_size")]
        svg_size: u32,
    },
    /// Isolation and non-finite-generation certificates for <a,b | bab^-1 = a^-2>.
    Example {
        /// Cone-search radius.
        #[arg(long, default_value_t = 4)]
        #[serde(default = "default_probe")]
        probe: u32,
        /// Decompose every positive element up to this length.
        #[arg(long, default_value_t = 6)]
        #[serde(default = "default_decompose")]
        decompose: u32,
        /// Length bound for the cone generators in the non-finite-generation witness.
        #[arg(long, default_value_t = 2)]
        #[serde(default = "default_non_fg")]
        non_fg: u32,
        #[arg(long, default_value_t = 8)]
        #[serde(default = "default_axioms_radius")]
        axioms_radius: u32,
    },
    /// Search bounded closures for every sign choice on the candidates.
    PropertyE {
        #[arg(long)]
        group: String,
        /// Comma-separated words that must stay positive.
        #[arg(long, default_value = "")]
        #[serde(default)]
        required: String,
        /// Comma-separated candidate words.
        #[arg(long)]
        candidates: String,
        #[arg(long, default_value_t = 6)]
        #[serde(default = "default_closure_len")]
        closure_len: usize,
    },
    /// Distance between two orderings: 1/n for the largest ball where they agree.
    Dist {
        #[arg(long)]
        group: String,
        #[arg(long, default_value = "magnus")]
        #[serde(default = "default_oracle")]
        oracle: String,
        #[arg(long)]
        other: String,
        #[arg(long)]
        max_n: u32,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Axioms { .. } => "axioms",
            Command::Realize { .. } => "realize",
            Command::Perturb { .. } => "perturb",
            Command::DenseOrbit { .. } => "dense-orbit",
            Command::Example { .. } => "example",
            Command::PropertyE { .. } => "property-e",
            Command::Dist { .. } => "dist",
        }
    }
}

pub struct Outcome {
    pub report: Value,
    pub ok: bool,
}

fn schema(cmd: &str) -> String {
    format!("freelo.{cmd}/{SCHEMA_VERSION}")
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display())))
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn ball_spec<G: Group + ?Sized>(g: &G, generators: &Option<String>, radius: u32) -> Result<BallSpec> {
    Ok(match generators {
        Some(s) => BallSpec::new(parse_generators(g, s)?, radius),
        None => BallSpec::full(g, radius),
    })
}

fn split_words(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).collect()
}

pub fn run(cmd: &Command) -> Result<Outcome> {
    let mut out = match cmd {
        Command::Axioms { group, oracle, radius, generators } => axioms(group, oracle, *radius, generators)?,
        Command::Realize { group, oracle, radius, generators, csv, svg, svg_size } => {
            run_realize(group, oracle, *radius, generators, csv.as_deref(), svg.as_deref(), *svg_size)?
        }
        Command::Perturb { group, oracle, n, claim_a, closure_len, candidates, svg, svg_size } => {
            run_perturb(group, oracle, *n, claim_a.as_deref(), *closure_len, *candidates, svg.as_deref(), *svg_size)?
        }
        Command::DenseOrbit { stations, svg, svg_size } => {
            let text = fs::read_to_string(stations)
                .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", stations.display())))?;
            run_dense(&text, svg.as_deref(), *svg_size)?
        }
        Command::Example { probe, decompose, non_fg, axioms_radius } => {
            run_example(*probe, *decompose, *non_fg, *axioms_radius)?
        }
        Command::PropertyE { group, required, candidates, closure_len } => {
            run_property_e(group, required, candidates, *closure_len)?
        }
        Command::Dist { group, oracle, other, max_n } => run_dist(group, oracle, other, *max_n)?,
    };
    if let Value::Object(m) = &mut out.report {
        m.insert("schema".into(), Value::String(schema(cmd.name())));
        m.insert("ok".into(), Value::Bool(out.ok));
    }
    Ok(out)
}

/// Runs a command given as JSON, e.g. `{"command": "axioms", "group": "F2", "radius": 3}`.
pub fn run_json(text: &str) -> Result<Outcome> {
    let cmd: Command = serde_json::from_str(text).map_err(|e| Error::Parse(format!("command: {e}")))?;
    run(&cmd)
}

fn axioms(group: &str, oracle: &str, radius: u32, generators: &Option<String>) -> Result<Outcome> {
    let (report, desc) = match parse_group(group)? {
        GroupChoice::Product(g) => {
            let o = product_oracle(&g, oracle)?;
            (check_axioms(&*o, &ball_spec(&*g, generators, radius)?)?, o.describe())
        }
        GroupChoice::X(g) => {
            let o = x_oracle(&g, oracle)?;
            (check_axioms(&*o, &ball_spec(&*g, generators, radius)?)?, o.describe())
        }
    };
    Ok(Outcome { ok: report.ok(), report: json!({ "group": group, "oracle": desc, "report": report }) })
}

fn realize_generic<G: Group + 'static>(
    g: Arc<G>,
    o: DynOracle<G>,
    spec: &BallSpec,
    csv: Option<&Path>,
    svg: Option<&Path>,
    svg_size: u32,
) -> Result<Outcome> {
    let r = realize(g.clone(), &*o, spec)?;
    let rt = r.round_trip(&*o)?;
    let ext = extremes(&*o, spec)?;
    let boxes = (1..=spec.radius).map(|n| r.box_of(n)).collect::<Result<Vec<_>>>()?;
    let maps: serde_json::Map<String, Value> = spec
        .generators
        .iter()
        .map(|&s| (g.names()[s as usize].clone(), r.action.maps()[s as usize].to_json()))
        .collect();
    let t: Vec<Value> = r.t_table().into_iter().map(|(w, x)| json!({ "word": w, "t": x })).collect();
    if let Some(p) = csv {
        let mut s = String::new();
        for &gen in &spec.generators {
            s.push_str(&format!("# generator {}\n", g.names()[gen as usize]));
            s.push_str(&r.action.maps()[gen as usize].to_csv());
        }
        write(p, &s)?;
    }
    if let Some(p) = svg {
        let lo = r.t.iter().min().cloned().unwrap_or_else(|| int(0)) - int(1);
        let hi = r.t.iter().max().cloned().unwrap_or_else(|| int(0)) + int(1);
        let mut plot = Plot::new(lo, hi);
        plot.width = svg_size;
        plot.height = svg_size;
        plot.title = format!("realization of {} on B({})", o.describe(), spec.radius);
        for &s in &spec.generators {
            plot.curves.push(Curve { map: &r.action.maps()[s as usize], label: g.names()[s as usize].clone() });
        }
        for b in &boxes {
            plot.squares.push(Square {
                lo: b.lo.clone(),
                hi: b.hi.clone(),
                label: format!("B({})", b.radius),
                dashed: false,
            });
        }
        write(p, &plot.render())?;
    }
    Ok(Outcome {
        ok: rt.ok(),
        report: json!({
            "group": g.describe(),
            "oracle": o.describe(),
            "ball": spec,
            "scope_radius": r.scope_radius,
            "reference": rational::format(&r.reference),
            "extremes": ext,
            "boxes": boxes,
            "round_trip": rt,
            "t": t,
            "generators": maps,
        }),
    })
}

fn run_realize(
    group: &str,
    oracle: &str,
    radius: u32,
    generators: &Option<String>,
    csv: Option<&Path>,
    svg: Option<&Path>,
    svg_size: u32,
) -> Result<Outcome> {
    match parse_group(group)? {
        GroupChoice::Product(g) => {
            let o = product_oracle(&g, oracle)?;
            let spec = ball_spec(&*g, generators, radius)?;
            realize_generic(g, o, &spec, csv, svg, svg_size)
        }
        GroupChoice::X(g) => {
            let o = x_oracle(&g, oracle)?;
            let spec = ball_spec(&*g, generators, radius)?;
            realize_generic(g, o, &spec, csv, svg, svg_size)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_perturb(
    group: &str,
    oracle: &str,
    n: u32,
    claim_a: Option<&str>,
    closure_len: usize,
    candidates: usize,
    svg: Option<&Path>,
    svg_size: u32,
) -> Result<Outcome> {
    let GroupChoice::Product(g) = parse_group(group)? else {
        return Err(Error::Unsupported("perturbation needs a free product".into()));
    };
    let o = product_oracle(&g, oracle)?;
    let p = perturb(g.clone(), &*o, n)?;
    let rep = p.verify(&*o)?;
    let mut ok = rep.ok();
    // the sequence of perturbations at radius 1..=n approaching the base ordering
    let mut distances = Vec::new();
    for m in 1..=n {
        let d = if m == n { rep.distance.clone() } else { perturb(g.clone(), &*o, m)?.verify(&*o)?.distance };
        distances.push(json!({ "n": m, "dist": d }));
    }
    let claim = match claim_a {
        Some(f) => {
            let words = split_words(f).into_iter().map(|w| g.parse_word(w)).collect::<Result<Vec<_>>>()?;
            let c = claim_a_report(g.clone(), &*o, &words, n, candidates, closure_len)?;
            ok &= c.ok();
            Some(c)
        }
        None => None,
    };
    if let Some(path) = svg {
        let plan = &p.plan;
        let square = p.realization.box_of(n)?;
        let lo = square.lo.clone() - int(1);
        let hi = plan.y0.clone() + int(1);
        let h = p.choice.h_letter.gen as usize;
        let mut plot = Plot::new(lo, hi);
        plot.width = svg_size;
        plot.height = svg_size;
        plot.title = format!("perturbation of {} at n = {n}", o.describe());
        plot.curves.push(Curve { map: &plan.phi, label: "phi".into() });
        plot.curves.push(Curve { map: &p.realization.action.maps()[h], label: format!("{} before", g.names()[h]) });
        plot.curves.push(Curve { map: &p.action.maps()[h], label: format!("{} after", g.names()[h]) });
        plot.squares.push(Square {
            lo: square.lo.clone(),
            hi: square.hi.clone(),
            label: format!("B({n})"),
            dashed: false,
        });
        plot.squares.push(Square { lo: plan.x0.clone(), hi: plan.y0.clone(), label: "supp(phi)".into(), dashed: true });
        write(path, &plot.render())?;
    }
    let mut report = to_value(&rep);
    if let Value::Object(m) = &mut report {
        m.insert("distances".into(), Value::Array(distances));
        if let Some(c) = claim {
            m.insert("claim_a".into(), to_value(&c));
        }
    }
    Ok(Outcome { ok, report })
}

/// Runs the dense-orbit pipeline on the text of a station file.
pub fn run_dense(stations_json: &str, svg: Option<&Path>, svg_size: u32) -> Result<Outcome> {
    let st = parse_stations(stations_json)?;
    let g = st.group.clone();
    let asm = assemble(&st)?;
    let dense = dense_oracle(&asm);
    let witnesses = st.stations.iter().map(|s| density_witness(&st, &asm, &dense, s.k)).collect::<Result<Vec<_>>>()?;
    let mut balls: Vec<BallSpec> = st.stations.iter().map(|s| s.ball.clone()).collect();
    balls.sort_by(|a, b| (a.radius, &a.generators).cmp(&(b.radius, &b.generators)));
    balls.dedup();
    let axioms = balls.iter().map(|b| check_axioms(&*dense, b)).collect::<Result<Vec<_>>>()?;
    if let Some(p) = svg {
        write(p, &asm.svg(svg_size, svg_size))?;
    }
    let ok = asm.bridges.iter().all(|b| b.ok())
        && asm.boxes_preserved
        && witnesses.iter().all(|w| w.matched)
        && axioms.iter().all(|a| a.ok());
    let stations: Vec<Value> =
        st.stations.iter().map(|s| json!({ "k": s.k, "oracle": s.oracle.describe(), "ball": s.ball })).collect();
    let steps: Vec<Value> = asm.steps.iter().map(|(k, u)| json!({ "k": k, "u_k": g.format(u) })).collect();
    let generators: serde_json::Map<String, Value> =
        asm.action.maps().iter().enumerate().map(|(i, f)| (g.names()[i].clone(), f.to_json())).collect();
    Ok(Outcome {
        ok,
        report: json!({
            "group": g.spec().short_name(),
            "references": "0, then the canonical enumeration 1, -1, 1/2, -1/2, 2, -2, ...",
            "stations": stations,
            "bridges": asm.bridges,
            "steps": steps,
            "witnesses": witnesses,
            "axioms": axioms,
            "generators": generators,
        }),
    })
}

fn run_example(probe: u32, decompose: u32, non_fg: u32, axioms_radius: u32) -> Result<Outcome> {
    let g = Arc::new(crate::xgroup::XGroup::new());
    let o = XSignOracle::new(g.clone());
    let ax = check_axioms(&o, &BallSpec::full(&*g, axioms_radius))?;
    let iso = isolation_probe(&g, probe, decompose, crate::order::cone::DEFAULT_NODE_CAP)?;
    let w = non_fg_witness(&g, non_fg, crate::order::closure::DEFAULT_CLOSURE_CAP)?;
    Ok(Outcome {
        ok: ax.ok() && iso.ok() && w.ok(),
        report: json!({
            "group": g.describe(),
            "axioms": { "radius": axioms_radius, "ok": ax.ok(), "report": ax },
            "unique_cone": iso.unique_cone,
            "decompositions": iso.decompositions,
            "isolation": iso,
            "witness": w.witness.clone(),
            "non_fg": w,
        }),
    })
}

fn labeled<G: Group>(g: &G, s: &str) -> Result<Vec<Labeled<G::Elem>>> {
    split_words(s).into_iter().map(|w| Ok(Labeled::new(w, g.parse(w)?))).collect()
}

fn run_property_e(group: &str, required: &str, candidates: &str, closure_len: usize) -> Result<Outcome> {
    let cap = crate::order::closure::DEFAULT_CLOSURE_CAP;
    let report = match parse_group(group)? {
        GroupChoice::Product(g) => {
            property_e_search(&*g, &labeled(&*g, required)?, &labeled(&*g, candidates)?, closure_len, cap)?
        }
        GroupChoice::X(g) => {
            property_e_search(&*g, &labeled(&*g, required)?, &labeled(&*g, candidates)?, closure_len, cap)?
        }
    };
    let compatible = report.compatible().count();
    Ok(Outcome {
        ok: true,
        report: json!({
            "group": group,
            "required": split_words(required),
            "candidates": split_words(candidates),
            "compatible_choices": compatible,
            "report": report,
        }),
    })
}

fn run_dist(group: &str, oracle: &str, other: &str, max_n: u32) -> Result<Outcome> {
    let (d, a, b) = match parse_group(group)? {
        GroupChoice::Product(g) => {
            let (o1, o2) = (product_oracle(&g, oracle)?, product_oracle(&g, other)?);
            (dist(&*o1, &*o2, max_n)?, o1.describe(), o2.describe())
        }
        GroupChoice::X(g) => {
            let (o1, o2) = (x_oracle(&g, oracle)?, x_oracle(&g, other)?);
            (dist(&*o1, &*o2, max_n)?, o1.describe(), o2.describe())
        }
    };
    Ok(Outcome { ok: true, report: json!({ "group": group, "oracle": a, "other": b, "dist": d }) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_commands() {
        let out = run_json(r#"{"command":"axioms","group":"F2","radius":2}"#).unwrap();
        assert!(out.ok);
        assert_eq!(out.report["schema"], "freelo.axioms/1");
        assert!(matches!(run_json(r#"{"command":"axioms","group":"F2"}"#), Err(Error::Parse(_))));
        assert!(matches!(run_json(r#"{"command":"nope"}"#), Err(Error::Parse(_))));
        let out = run_json(r#"{"command":"dist","group":"F2","other":"magnus:neg=a","max_n":3}"#).unwrap();
        assert_eq!(out.report["dist"]["value"], "1");
    }

    #[test]
    fn reports_are_deterministic() {
        let cmd = r#"{"command":"realize","group":"F2","radius":2}"#;
        let a = serde_json::to_string(&run_json(cmd).unwrap().report).unwrap();
        let b = serde_json::to_string(&run_json(cmd).unwrap().report).unwrap();
        assert_eq!(a, b);
    }
}
