//! Parsing of group names, oracle specifications and station files.
//!
//! Oracle specs are a base followed by `:`-separated modifiers applied left to right:
//! `magnus`, `lex`, `xsign` as bases; `neg=a,b`, `conj=<word>`, `perm=1,0`, `reverse` as modifiers.
//! `perm` only applies directly after `lex`.

use std::sync::Arc;

use serde::Deserialize;

use crate::dense::{Station, StationAssignment};
use crate::error::{Error, Result};
use crate::group::{BallSpec, FreeProduct, Group, GroupSpec};
use crate::order::{Conjugated, DynOracle, LexOracle, MagnusOracle, Negated, Reversed};
use crate::xgroup::{XGroup, XSignOracle};

/// A parsed `--group` argument.
#[derive(Clone)]
pub enum GroupChoice {
    Product(Arc<FreeProduct>),
    X(Arc<XGroup>),
}

pub fn parse_group(s: &str) -> Result<GroupChoice> {
    match s.trim() {
        "X" | "x" | "BS" => Ok(GroupChoice::X(Arc::new(XGroup::new()))),
        other => Ok(GroupChoice::Product(Arc::new(FreeProduct::new(GroupSpec::parse_short(other)?)?))),
    }
}

fn generator_index<G: Group + ?Sized>(g: &G, name: &str) -> Result<u32> {
    g.names()
        .iter()
        .position(|n| n == name.trim())
        .map(|i| i as u32)
        .ok_or_else(|| Error::UnknownGenerator(name.trim().into()))
}

/// `a,b` → generator indices.
pub fn parse_generators<G: Group + ?Sized>(g: &G, s: &str) -> Result<Vec<u32>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| generator_index(g, t)).collect()
}

fn split_spec(s: &str) -> (&str, Vec<(&str, Option<&str>)>) {
    let mut parts = s.trim().split(':');
    let base = parts.next().unwrap_or("").trim();
    let mods = parts
        .map(|m| match m.split_once('=') {
            Some((k, v)) => (k.trim(), Some(v.trim())),
            None => (m.trim(), None),
        })
        .collect();
    (base, mods)
}

fn need<'a>(key: &str, v: Option<&'a str>) -> Result<&'a str> {
    v.ok_or_else(|| Error::Parse(format!("modifier `{key}` needs a value")))
}

pub fn product_oracle(g: &Arc<FreeProduct>, spec: &str) -> Result<DynOracle<FreeProduct>> {
    let (base, mods) = split_spec(spec);
    let mut rest = &mods[..];
    let mut o: DynOracle<FreeProduct> = match base {
        "magnus" => Arc::new(MagnusOracle::new(g.clone())),
        "lex" => {
            let mut perm = None;
            if let Some((("perm", v), tail)) = rest.split_first().map(|(a, t)| (*a, t)) {
                let v = need("perm", v)?;
                perm = Some(
                    v.split(',')
                        .map(|x| x.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad permutation `{v}`"))))
                        .collect::<Result<Vec<_>>>()?,
                );
                rest = tail;
            }
            Arc::new(LexOracle::new(g.clone(), perm, None)?)
        }
        "xsign" => return Err(Error::Unsupported("xsign needs --group X".into())),
        other => return Err(Error::Parse(format!("unknown oracle `{other}`"))),
    };
    for &(key, v) in rest {
        o = match key {
            "neg" => {
                let mut mask = vec![false; g.rank()];
                for i in parse_generators(&**g, need(key, v)?)? {
                    mask[i as usize] = true;
                }
                Arc::new(Negated { inner: o, mask })
            }
            "conj" => Arc::new(Conjugated::new(o, g.parse_word(need(key, v)?)?)),
            "reverse" => Arc::new(Reversed { inner: o }),
            "perm" => return Err(Error::Parse("`perm` must directly follow `lex`".into())),
            other => return Err(Error::Parse(format!("unknown modifier `{other}`"))),
        };
    }
    Ok(o)
}

pub fn x_oracle(g: &Arc<XGroup>, spec: &str) -> Result<DynOracle<XGroup>> {
    let (base, mods) = split_spec(spec);
    let mut o: DynOracle<XGroup> = match base {
        "xsign" => Arc::new(XSignOracle::new(g.clone())),
        other => return Err(Error::Unsupported(format!("oracle `{other}` is not available on X"))),
    };
    for (key, v) in mods {
        o = match key {
            "conj" => Arc::new(Conjugated::new(o, g.parse(need(key, v)?)?)),
            "reverse" => Arc::new(Reversed { inner: o }),
            other => return Err(Error::Unsupported(format!("modifier `{other}` is not available on X"))),
        };
    }
    Ok(o)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BallFile {
    generators: Vec<String>,
    radius: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StationFileEntry {
    k: i64,
    oracle: String,
    #[serde(default)]
    ball: Option<BallFile>,
}

/// `{"group": "F2", "ball": {...}, "stations": [{"k": 0, "oracle": "magnus"}, ...]}`; a station
/// may override the shared ball. A `schema` field is accepted and ignored.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StationFile {
    #[serde(default)]
    #[allow(dead_code)]
    schema: Option<String>,
    group: String,
    #[serde(default)]
    ball: Option<BallFile>,
    stations: Vec<StationFileEntry>,
}

pub fn parse_stations(json: &str) -> Result<StationAssignment> {
    let file: StationFile = serde_json::from_str(json).map_err(|e| Error::Parse(format!("station file: {e}")))?;
    let g = match parse_group(&file.group)? {
        GroupChoice::Product(g) => g,
        GroupChoice::X(_) => return Err(Error::Unsupported("stations need a free group".into())),
    };
    let to_spec = |b: &BallFile| -> Result<BallSpec> {
        let gens = b.generators.iter().map(|n| generator_index(&*g, n)).collect::<Result<Vec<_>>>()?;
        Ok(BallSpec::new(gens, b.radius))
    };
    let shared = file.ball.as_ref().map(to_spec).transpose()?;
    let stations = file
        .stations
        .iter()
        .map(|s| {
            let ball = match (&s.ball, &shared) {
                (Some(b), _) => to_spec(b)?,
                (None, Some(b)) => b.clone(),
                (None, None) => return Err(Error::Invalid(format!("station {} has no ball", s.k))),
            };
            Ok(Station { k: s.k, ball, oracle: product_oracle(&g, &s.oracle)? })
        })
        .collect::<Result<Vec<_>>>()?;
    StationAssignment::new(g, stations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::Sign;

    fn f2() -> Arc<FreeProduct> {
        match parse_group("F2").unwrap() {
            GroupChoice::Product(g) => g,
            _ => unreachable!(),
        }
    }

    #[test]
    fn oracle_specs() {
        let g = f2();
        let a = g.parse_word("a").unwrap();
        let b = g.parse_word("b").unwrap();
        assert_eq!(product_oracle(&g, "magnus").unwrap().sign(&a).unwrap(), Sign::Pos);
        let n = product_oracle(&g, "magnus:neg=a").unwrap();
        assert_eq!(n.sign(&a).unwrap(), Sign::Neg);
        assert_eq!(n.sign(&b).unwrap(), Sign::Pos);
        assert_eq!(n.describe(), "magnus:neg=a");
        assert_eq!(product_oracle(&g, "magnus:conj=b").unwrap().describe(), "magnus:conj=b");
        assert_eq!(product_oracle(&g, "magnus:reverse").unwrap().sign(&a).unwrap(), Sign::Neg);
        assert!(matches!(product_oracle(&g, "nope"), Err(Error::Parse(_))));
        assert!(matches!(product_oracle(&g, "magnus:neg=z"), Err(Error::UnknownGenerator(_))));
        assert!(matches!(product_oracle(&g, "lex"), Err(Error::Unsupported(_))));
        let z2 = match parse_group("Z^2").unwrap() {
            GroupChoice::Product(g) => g,
            _ => unreachable!(),
        };
        let lex = product_oracle(&z2, "lex:perm=1,0:neg=b").unwrap();
        assert_eq!(lex.sign(&z2.parse_word("a.b").unwrap()).unwrap(), Sign::Neg);
        assert_eq!(lex.sign(&z2.parse_word("a").unwrap()).unwrap(), Sign::Pos);
    }

    #[test]
    fn x_specs() {
        let GroupChoice::X(g) = parse_group("X").unwrap() else { unreachable!() };
        let o = x_oracle(&g, "xsign").unwrap();
        assert_eq!(o.sign(&g.b()).unwrap(), Sign::Pos);
        assert!(x_oracle(&g, "magnus").is_err());
    }

    #[test]
    fn station_file() {
        let json = r#"{"group":"F2","ball":{"generators":["a","b"],"radius":2},
            "stations":[{"k":0,"oracle":"magnus"},{"k":1,"oracle":"magnus:neg=a"}]}"#;
        let st = parse_stations(json).unwrap();
        assert_eq!(st.stations.len(), 2);
        assert!(parse_stations(r#"{"group":"F2","stations":[{"k":0,"oracle":"magnus"}]}"#).is_err());
        assert!(matches!(parse_stations("{"), Err(Error::Parse(_))));
    }
}
