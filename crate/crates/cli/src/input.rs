use std::fs;

use serde_json::Value;
use thickset_core::ballsys::{BallSystem, ExplicitNode, Norm};
use thickset_core::cantor::{AffineMap1D, IfsSet1D};
use thickset_core::product2d::Triangle;
use thickset_core::scalar::{int, parse_exact, Exact, Interval};
use thickset_core::{Error, Result};

pub const SCHEMA: &str = "thickset/1";

fn load_json(text: &str) -> Result<Value> {
    let body = if text.trim_start().starts_with('{') {
        text.to_string()
    } else {
        fs::read_to_string(text).map_err(|e| Error::Parse(format!("cannot read {text}: {e}")))?
    };
    let v: Value =
        serde_json::from_str(&body).map_err(|e| Error::Parse(format!("malformed JSON: {e}")))?;
    if let Some(s) = v.get("schema") {
        if s.as_str() != Some(SCHEMA) {
            return Err(Error::Parse(format!(
                "unsupported schema {s}, expected {SCHEMA}"
            )));
        }
    }
    Ok(v)
}

fn looks_like_json(s: &str) -> bool {
    let t = s.trim_start();
    t.starts_with('{') || t.ends_with(".json")
}

fn num(v: &Value, key: &str) -> Result<Exact> {
    let field = v
        .get(key)
        .ok_or_else(|| Error::Parse(format!("missing field {key:?}")))?;
    value_exact(field)
}

fn value_exact(v: &Value) -> Result<Exact> {
    match v {
        Value::String(s) => parse_exact(s),
        Value::Number(n) => parse_exact(&n.to_string()),
        other => Err(Error::Parse(format!("expected a number, got {other}"))),
    }
}

fn exact_list(v: &Value) -> Result<Vec<Exact>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("expected an array, got {v}")))?
        .iter()
        .map(value_exact)
        .collect()
}

fn kind(v: &Value) -> Result<&str> {
    v.get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse("missing string field \"kind\"".into()))
}

/// `middle_cantor:1/3`, `off_center:3/10`, or JSON, with an optional
/// `@mu,nu` suffix applying `x ↦ mu·x + nu`.
pub fn parse_set(spec: &str) -> Result<IfsSet1D> {
    let (base, affine) = match spec.rsplit_once('@') {
        Some((b, a)) if !looks_like_json(spec) || !a.contains('}') => (b, Some(a)),
        _ => (spec, None),
    };
    let set = if looks_like_json(base) {
        set_from_json(&load_json(base)?)?
    } else {
        let (name, arg) = base
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("set spec {base:?} needs the form name:value")))?;
        let x = parse_exact(arg)?;
        match name.trim() {
            "middle_cantor" => IfsSet1D::middle_cantor(&x)?,
            "off_center" => IfsSet1D::off_center(&x)?,
            other => return Err(Error::Parse(format!("unknown set kind {other:?}"))),
        }
    };
    match affine {
        None => Ok(set),
        Some(a) => {
            let (mu, nu) = a
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("affine suffix {a:?} needs mu,nu")))?;
            set.affine_image(&parse_exact(mu)?, &parse_exact(nu)?)
        }
    }
}

fn set_from_json(v: &Value) -> Result<IfsSet1D> {
    match kind(v)? {
        "middle_cantor" => IfsSet1D::middle_cantor(&num(v, "epsilon")?),
        "off_center" => IfsSet1D::off_center(&num(v, "a")?),
        "ifs1d" => {
            let hull = exact_list(v.get("hull").unwrap_or(&Value::Null))?;
            if hull.len() != 2 {
                return Err(Error::Parse("hull must be [lo, hi]".into()));
            }
            let branches = v
                .get("branches")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("missing array \"branches\"".into()))?
                .iter()
                .map(|b| AffineMap1D::new(num(b, "scale")?, num(b, "offset")?))
                .collect::<Result<Vec<_>>>()?;
            let [lo, hi]: [Exact; 2] = hull.try_into().expect("length checked");
            IfsSet1D::new(Interval::new(lo, hi)?, branches)
        }
        other => Err(Error::Parse(format!("unknown set kind {other:?}"))),
    }
}

/// `grid:n,rho,d[,seed]`, `hex[:gamma]`, or JSON.
pub fn parse_system(spec: &str, seed: u64) -> Result<BallSystem> {
    if looks_like_json(spec) {
        return system_from_json(&load_json(spec)?, seed);
    }
    let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
    let parts: Vec<&str> = args.split(',').filter(|s| !s.trim().is_empty()).collect();
    match name.trim() {
        "grid" | "grid_ifs" => {
            if parts.len() < 3 || parts.len() > 4 {
                return Err(Error::Parse("grid spec is grid:n,rho,d[,seed]".into()));
            }
            let n: u32 = parts[0]
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad grid size {:?}", parts[0])))?;
            let s = match parts.get(3) {
                Some(p) => p
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad seed {p:?}")))?,
                None => seed,
            };
            BallSystem::grid_ifs(n, parse_exact(parts[1])?, parse_exact(parts[2])?, s)
        }
        "hex" | "hex_packing" => {
            let gamma = match parts.first() {
                Some(g) => parse_exact(g)?,
                None => int(1),
            };
            BallSystem::hex_packing(gamma)
        }
        other => Err(Error::Parse(format!("unknown system kind {other:?}"))),
    }
}

fn system_from_json(v: &Value, seed: u64) -> Result<BallSystem> {
    match kind(v)? {
        "grid_ifs" => {
            let n = v
                .get("n")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse("grid_ifs needs integer n".into()))?;
            let s = v.get("seed").and_then(Value::as_u64).unwrap_or(seed);
            BallSystem::grid_ifs(n as u32, num(v, "rho")?, num(v, "d")?, s)
        }
        "hex_packing" => {
            let gamma = match v.get("gamma") {
                Some(g) => value_exact(g)?,
                None => int(1),
            };
            BallSystem::hex_packing(gamma)
        }
        "explicit_tree" => {
            let norm = match v.get("norm").and_then(Value::as_str).unwrap_or("l2") {
                "l2" => Norm::L2,
                "linf" => Norm::Linf,
                other => return Err(Error::Parse(format!("unknown norm {other:?}"))),
            };
            let nodes = v
                .get("nodes")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("explicit_tree needs array \"nodes\"".into()))?
                .iter()
                .map(|n| {
                    let children = match n.get("children") {
                        None => Vec::new(),
                        Some(c) => c
                            .as_array()
                            .ok_or_else(|| Error::Parse("children must be an array".into()))?
                            .iter()
                            .map(|i| {
                                i.as_u64().map(|i| i as usize).ok_or_else(|| {
                                    Error::Parse("child indices must be integers".into())
                                })
                            })
                            .collect::<Result<Vec<_>>>()?,
                    };
                    Ok(ExplicitNode {
                        center: exact_list(n.get("center").unwrap_or(&Value::Null))?,
                        radius: num(n, "radius")?,
                        children,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            BallSystem::explicit(norm, nodes)
        }
        other => Err(Error::Parse(format!("unknown system kind {other:?}"))),
    }
}

/// `equilateral`, `right`, or `x1,y1;x2,y2;x3,y3`.
pub fn parse_triangle(spec: &str, bits: u32) -> Result<Triangle> {
    match spec.trim() {
        "equilateral" => return Ok(Triangle::equilateral(bits)),
        "right" => {
            return Ok(Triangle::from_exact([
                [int(0), int(0)],
                [int(1), int(0)],
                [int(0), int(1)],
            ]))
        }
        _ => {}
    }
    let pts: Vec<[Exact; 2]> = spec
        .split(';')
        .map(|p| {
            let (x, y) = p
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("vertex {p:?} needs x,y")))?;
            Ok([parse_exact(x)?, parse_exact(y)?])
        })
        .collect::<Result<Vec<_>>>()?;
    let pts: [[Exact; 2]; 3] = pts
        .try_into()
        .map_err(|_| Error::Parse("a triangle needs exactly three vertices".into()))?;
    Ok(Triangle::from_exact(pts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use thickset_core::scalar::rat;

    #[test]
    fn set_specs() {
        let a = parse_set("middle_cantor:1/3").unwrap();
        let b =
            parse_set(r#"{"schema":"thickset/1","kind":"middle_cantor","epsilon":"1/3"}"#).unwrap();
        assert_eq!(a, b);
        let c = parse_set(r#"{"kind":"ifs1d","hull":["0","1"],"branches":[{"scale":"1/3","offset":"0"},{"scale":"1/3","offset":"2/3"}]}"#).unwrap();
        assert_eq!(a, c);
        let s = parse_set("middle_cantor:1/3@1/2,1").unwrap();
        assert_eq!(s.hull(), &Interval::new(int(1), rat(3, 2)).unwrap());
        assert!(parse_set("cantor:1/3").is_err());
        assert!(parse_set(r#"{"kind":"middle_cantor""#).is_err());
        assert!(
            parse_set(r#"{"schema":"other/2","kind":"middle_cantor","epsilon":"1/3"}"#).is_err()
        );
    }

    #[test]
    fn system_specs() {
        let g = parse_system("grid:10,19/200,1/100", 7).unwrap();
        let j = parse_system(
            r#"{"kind":"grid_ifs","n":10,"rho":"0.095","d":"0.01","seed":7}"#,
            0,
        )
        .unwrap();
        assert_eq!(g, j);
        assert!(parse_system("hex:99999/100000", 0).is_ok());
        assert!(parse_system("grid:10,1/10,1/100", 0).is_err());
    }

    #[test]
    fn triangles() {
        assert!(parse_triangle("0,0;1,0;0,1", 64).is_ok());
        assert!(parse_triangle("0,0;1,0", 64).is_err());
    }
}
