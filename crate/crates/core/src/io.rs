//! JSON input schemas with located validation errors, and the matching writers.
//!
//! Locations are JSONPath-like strings such as `$.levels[1].tables[0][3]`.

use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Ratio;
use serde_json::{json, Map, Number, Value};

use crate::abelian::{FinAbGroup, GroupElem, Subgroup, TorusValue};
use crate::error::{Error, Result};
use crate::filtered::{FilteredEmbedding, FilteredGroup, RelationSystem};
use crate::gowers::ComplexFunction;
use crate::systems::{Cocycle, GammaSystem, WeightFiltration};
use crate::target::{Torus, TorusFunction};
use crate::towers::{LevelSpec, TowerSpec};

fn at(loc: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{loc}: {msg}"))
}

fn relocate(loc: &str, e: Error) -> Error {
    match e {
        Error::Parse(_) | Error::Guard { .. } => e,
        other => at(loc, other),
    }
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("malformed JSON at line {}, column {}: {e}", e.line(), e.column())))
}

fn field<'a>(v: &'a Value, key: &str, loc: &str) -> Result<&'a Value> {
    let obj = v.as_object().ok_or_else(|| at(loc, "expected an object"))?;
    obj.get(key).ok_or_else(|| at(loc, format!("missing field \"{key}\"")))
}

fn array<'a>(v: &'a Value, loc: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| at(loc, "expected an array"))
}

fn int(v: &Value, loc: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| at(loc, format!("expected an integer, got {v}")))
}

fn count(v: &Value, loc: &str) -> Result<usize> {
    v.as_u64().map(|n| n as usize).ok_or_else(|| at(loc, format!("expected a non-negative integer, got {v}")))
}

fn ints(v: &Value, loc: &str) -> Result<Vec<i64>> {
    array(v, loc)?.iter().enumerate().map(|(i, x)| int(x, &format!("{loc}[{i}]"))).collect()
}

fn real(v: &Value, loc: &str) -> Result<f64> {
    let x = v.as_f64().ok_or_else(|| at(loc, format!("expected a number, got {v}")))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(at(loc, "number is not finite"))
    }
}

pub fn group_from_json(v: &Value, loc: &str) -> Result<FinAbGroup> {
    let l = format!("{loc}.moduli");
    FinAbGroup::new(ints(field(v, "moduli", loc)?, &l)?).map_err(|e| relocate(&l, e))
}

/// An element as `[1,0,3]` or `{"coeffs":[1,0,3]}`, reduced into `g`.
pub fn elem_from_json(v: &Value, g: &FinAbGroup, loc: &str) -> Result<GroupElem> {
    let (raw, l) = if v.is_object() {
        (field(v, "coeffs", loc)?, format!("{loc}.coeffs"))
    } else {
        (v, loc.to_string())
    };
    let c = ints(raw, &l)?;
    if c.len() != g.rank() {
        return Err(at(&l, format!("expected {} coefficients, got {}", g.rank(), c.len())));
    }
    Ok(g.reduce(&c))
}

fn elems_from_json(v: &Value, g: &FinAbGroup, loc: &str) -> Result<Vec<GroupElem>> {
    array(v, loc)?.iter().enumerate().map(|(i, x)| elem_from_json(x, g, &format!("{loc}[{i}]"))).collect()
}

fn torus_from_json(v: &Value, loc: &str) -> Result<TorusValue> {
    let s = v.as_str().ok_or_else(|| at(loc, format!("expected a \"p/q\" string, got {v}")))?;
    TorusValue::from_str(s).map_err(|e| at(loc, e))
}

/// Either the full form `{"points":n,"gamma":{...},"action":[...]}` or `{"translation":{"moduli":[...]}}`.
pub fn system_from_json(v: &Value, loc: &str) -> Result<GammaSystem> {
    let translation = match v.get("translation") {
        Some(t) => Some(GammaSystem::translation(&group_from_json(t, &format!("{loc}.translation"))?)),
        None => None,
    };
    if let (Some(t), None) = (&translation, v.get("action")) {
        return Ok(t.clone());
    }
    let n = count(field(v, "points", loc)?, &format!("{loc}.points"))?;
    let gamma = group_from_json(field(v, "gamma", loc)?, &format!("{loc}.gamma"))?;
    let l = format!("{loc}.action");
    let action = array(field(v, "action", loc)?, &l)?
        .iter()
        .enumerate()
        .map(|(i, perm)| {
            let pl = format!("{l}[{i}]");
            array(perm, &pl)?
                .iter()
                .enumerate()
                .map(|(j, y)| {
                    let y = count(y, &format!("{pl}[{j}]"))?;
                    u32::try_from(y).map_err(|_| at(&format!("{pl}[{j}]"), "point index too large"))
                })
                .collect::<Result<Vec<u32>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let sys = GammaSystem::new(n, gamma, action).map_err(|e| relocate(loc, e))?;
    match translation {
        Some(t) if t.gamma() == sys.gamma() && t.generators() == sys.generators() => Ok(t),
        Some(_) => Err(at(loc, "\"translation\" disagrees with the listed action")),
        None => Ok(sys),
    }
}

fn domain_from_json(v: &Value, loc: &str) -> Result<Arc<GammaSystem>> {
    Ok(Arc::new(system_from_json(field(v, "domain", loc)?, &format!("{loc}.domain"))?))
}

pub fn torus_function_from_json(v: &Value, loc: &str) -> Result<TorusFunction> {
    let domain = domain_from_json(v, loc)?;
    let l = format!("{loc}.values");
    let values = array(field(v, "values", loc)?, &l)?
        .iter()
        .enumerate()
        .map(|(i, x)| torus_from_json(x, &format!("{l}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    TorusFunction::new(domain, Torus, values).map_err(|e| relocate(&l, e))
}

/// Values are `{"re":..,"im":..}` objects or plain reals.
pub fn complex_function_from_json(v: &Value, loc: &str) -> Result<ComplexFunction> {
    let domain = domain_from_json(v, loc)?;
    let l = format!("{loc}.values");
    let values = array(field(v, "values", loc)?, &l)?
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let xl = format!("{l}[{i}]");
            if x.is_object() {
                Ok(Complex64::new(real(field(x, "re", &xl)?, &format!("{xl}.re"))?, real(field(x, "im", &xl)?, &format!("{xl}.im"))?))
            } else {
                Ok(Complex64::new(real(x, &xl)?, 0.0))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    ComplexFunction::new(domain, values).map_err(|e| relocate(&l, e))
}

/// A cocycle with torus values or values in a finite abelian group.
#[derive(Clone, Debug)]
pub enum AnyCocycle {
    Torus(Cocycle<Torus>),
    Group(Cocycle<FinAbGroup>),
}

impl AnyCocycle {
    pub fn system(&self) -> &Arc<GammaSystem> {
        match self {
            AnyCocycle::Torus(c) => c.system(),
            AnyCocycle::Group(c) => c.system(),
        }
    }
}

/// System fields plus `"target"` (`"torus"` or a group) and one table per generator.
pub fn cocycle_from_json(v: &Value, loc: &str) -> Result<AnyCocycle> {
    let sys = Arc::new(system_from_json(v, loc)?);
    let tl = format!("{loc}.target");
    let target = field(v, "target", loc)?;
    let l = format!("{loc}.tables");
    let tables = array(field(v, "tables", loc)?, &l)?;
    if target.as_str() == Some("torus") {
        let t = tables
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let rl = format!("{l}[{i}]");
                array(row, &rl)?.iter().enumerate().map(|(j, x)| torus_from_json(x, &format!("{rl}[{j}]"))).collect()
            })
            .collect::<Result<Vec<Vec<_>>>>()?;
        Ok(AnyCocycle::Torus(Cocycle::new(sys, Torus, t).map_err(|e| relocate(&l, e))?))
    } else if target.is_object() {
        let u = group_from_json(target, &tl)?;
        let t = tables
            .iter()
            .enumerate()
            .map(|(i, row)| elems_from_json(row, &u, &format!("{l}[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        Ok(AnyCocycle::Group(Cocycle::new(sys, u, t).map_err(|e| relocate(&l, e))?))
    } else {
        Err(at(&tl, "expected \"torus\" or a group object"))
    }
}

fn chain_from_json(v: &Value, g: &FinAbGroup, loc: &str) -> Result<Vec<Subgroup>> {
    array(v, loc)?
        .iter()
        .enumerate()
        .map(|(i, gens)| {
            let l = format!("{loc}[{i}]");
            Subgroup::span(g, elems_from_json(gens, g, &l)?).map_err(|e| relocate(&l, e))
        })
        .collect()
}

/// `{"moduli":[...],"chain":[[gens of A_1],[gens of A_2],...]}` with an optional `"degree"`.
pub fn filtered_group_from_json(v: &Value, loc: &str) -> Result<FilteredGroup> {
    let g = group_from_json(v, loc)?;
    let above = match v.get("chain") {
        Some(c) => chain_from_json(c, &g, &format!("{loc}.chain"))?,
        None => vec![],
    };
    let fg = FilteredGroup::new(&g, above).map_err(|e| relocate(&format!("{loc}.chain"), e))?;
    match v.get("degree") {
        Some(d) => fg.with_degree(count(d, &format!("{loc}.degree"))?).map_err(|e| relocate(loc, e)),
        None => Ok(fg),
    }
}

/// `{"ambient":<filtered group>,"subgroup":[gens in B]}` with the induced filtration on `A`.
pub fn embedding_from_json(v: &Value, loc: &str) -> Result<FilteredEmbedding> {
    let amb = filtered_group_from_json(field(v, "ambient", loc)?, &format!("{loc}.ambient"))?;
    let l = format!("{loc}.subgroup");
    let gens = elems_from_json(field(v, "subgroup", loc)?, amb.group(), &l)?;
    let a = Subgroup::span(amb.group(), gens).map_err(|e| relocate(&l, e))?;
    FilteredEmbedding::from_subgroup(&amb, &a).map_err(|e| relocate(loc, e))
}

/// `{"n":2,"relations":[{"m":[2,0],"j":1}]}`.
pub fn relations_from_json(v: &Value, loc: &str) -> Result<RelationSystem> {
    let n = count(field(v, "n", loc)?, &format!("{loc}.n"))?;
    let l = format!("{loc}.relations");
    let rels = array(field(v, "relations", loc)?, &l)?
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let rl = format!("{l}[{i}]");
            let m = ints(field(r, "m", &rl)?, &format!("{rl}.m"))?;
            if m.len() != n {
                return Err(at(&format!("{rl}.m"), format!("expected {n} coefficients, got {}", m.len())));
            }
            Ok((m, count(field(r, "j", &rl)?, &format!("{rl}.j"))?))
        })
        .collect::<Result<Vec<_>>>()?;
    RelationSystem::new(n, rels).map_err(|e| relocate(&l, e))
}

/// `{"gamma":{...},"k":2,"levels":[{"fiber":{...},"weights":[[gens of U_>1],...],"tables":[[elems]...]}]}`.
pub fn tower_from_json(v: &Value, loc: &str) -> Result<TowerSpec> {
    let gamma = group_from_json(field(v, "gamma", loc)?, &format!("{loc}.gamma"))?;
    let k = count(field(v, "k", loc)?, &format!("{loc}.k"))?;
    let l = format!("{loc}.levels");
    let levels = array(field(v, "levels", loc)?, &l)?
        .iter()
        .enumerate()
        .map(|(i, lv)| {
            let ll = format!("{l}[{i}]");
            let u = group_from_json(field(lv, "fiber", &ll)?, &format!("{ll}.fiber"))?;
            let above = match lv.get("weights") {
                Some(w) => chain_from_json(w, &u, &format!("{ll}.weights"))?,
                None => vec![],
            };
            let weights = WeightFiltration::new(&u, above).map_err(|e| relocate(&format!("{ll}.weights"), e))?;
            let tl = format!("{ll}.tables");
            let tables = array(field(lv, "tables", &ll)?, &tl)?
                .iter()
                .enumerate()
                .map(|(j, row)| elems_from_json(row, &u, &format!("{tl}[{j}]")))
                .collect::<Result<Vec<_>>>()?;
            if tables.len() != gamma.rank() {
                return Err(at(&tl, format!("expected {} tables, got {}", gamma.rank(), tables.len())));
            }
            Ok(LevelSpec { weights, tables })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TowerSpec { gamma, k, levels })
}

/// A float with twelve digits after the point; non-finite values become `null`.
pub fn float(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let x = if x == 0.0 { 0.0 } else { x };
    Number::from_str(&format!("{x:.12}")).map(Value::Number).unwrap_or(Value::Null)
}

pub fn complex(z: Complex64) -> Value {
    json!({"re": float(z.re), "im": float(z.im)})
}

pub fn ratio(r: &Ratio<i128>) -> Value {
    Value::String(format!("{}/{}", r.numer(), r.denom()))
}

pub fn group_json(g: &FinAbGroup) -> Value {
    json!({ "moduli": g.moduli() })
}

pub fn elems_json(xs: &[GroupElem]) -> Value {
    Value::Array(xs.iter().map(|x| json!(x.coeffs)).collect())
}

pub fn subgroup_json(h: &Subgroup) -> Value {
    elems_json(&h.generators())
}

pub fn system_json(s: &GammaSystem) -> Value {
    let mut v = json!({
        "points": s.len(),
        "gamma": group_json(s.gamma()),
        "action": s.generators(),
    });
    if let Some(g) = s.translation_group() {
        v.as_object_mut().expect("object").insert("translation".into(), group_json(g));
    }
    v
}

pub fn torus_function_json(f: &TorusFunction) -> Value {
    json!({ "domain": system_json(f.domain()), "values": f.values() })
}

pub fn complex_function_json(f: &ComplexFunction) -> Value {
    json!({
        "domain": system_json(f.domain()),
        "values": f.values().iter().map(|&z| complex(z)).collect::<Vec<_>>(),
    })
}

pub fn cocycle_json(c: &AnyCocycle) -> Value {
    let mut out = system_json(c.system());
    let obj = out.as_object_mut().expect("object");
    match c {
        AnyCocycle::Torus(c) => {
            obj.insert("target".into(), json!("torus"));
            obj.insert("tables".into(), json!(c.tables()));
        }
        AnyCocycle::Group(c) => {
            obj.insert("target".into(), group_json(c.target()));
            obj.insert(
                "tables".into(),
                Value::Array(c.tables().iter().map(|t| elems_json(t)).collect()),
            );
        }
    }
    out
}

pub fn filtered_group_json(f: &FilteredGroup) -> Value {
    let chain: Vec<Value> = f.chain()[1..].iter().filter(|s| !s.is_trivial()).map(subgroup_json).collect();
    json!({ "moduli": f.group().moduli(), "chain": chain, "degree": f.degree() })
}

pub fn embedding_json(e: &FilteredEmbedding) -> Value {
    json!({ "ambient": filtered_group_json(e.amb()), "subgroup": subgroup_json(e.image()) })
}

pub fn relations_json(r: &RelationSystem) -> Value {
    let rels: Vec<Value> = r.relations.iter().map(|(m, j)| json!({"m": m, "j": j})).collect();
    json!({ "n": r.n, "relations": rels })
}

pub fn tower_json(t: &TowerSpec) -> Value {
    let levels: Vec<Value> = t
        .levels
        .iter()
        .map(|l| {
            let w = &l.weights;
            let above: Vec<Value> = w.chain()[1..].iter().filter(|s| !s.is_trivial()).map(subgroup_json).collect();
            json!({
                "fiber": group_json(w.group()),
                "weights": above,
                "tables": l.tables.iter().map(|t| elems_json(t)).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "gamma": group_json(&t.gamma), "k": t.k, "levels": levels })
}

/// Flat `key -> value` rows of an object, for CSV output of scalar reports.
pub fn flatten(v: &Value) -> Vec<(String, String)> {
    fn rec(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    rec(&p, x, out);
                }
            }
            Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    rec(&format!("{prefix}[{i}]"), x, out);
                }
            }
            Value::String(s) => out.push((prefix.to_string(), s.clone())),
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut out = Vec::new();
    rec("", v, &mut out);
    out
}

/// An empty object to build reports in insertion order.
pub fn report() -> Map<String, Value> {
    Map::new()
}
