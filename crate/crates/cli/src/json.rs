//! JSON file formats with field-path diagnostics.

use cachekit::gf2::BitVector;
use cachekit::icmap::{ICInstance, IcUser};
use cachekit::icschemes::{members, message_set, Composite, LinearSpec, MessageSet};
use cachekit::scalar::{format_rational, int, parse_rational, to_f64};
use cachekit::Rational;
use serde_json::{json, Map, Value};

use crate::CliError;

/// `{"exact": "p/q", "decimal": x}`.
pub fn rational(r: &Rational) -> Value {
    json!({ "exact": format_rational(r), "decimal": to_f64(r) })
}

fn schema(path: &str, msg: impl Into<String>) -> CliError {
    CliError::Schema {
        path: path.to_string(),
        msg: msg.into(),
    }
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, CliError> {
    v.as_object().ok_or_else(|| schema(path, "expected an object"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, CliError> {
    v.as_array().ok_or_else(|| schema(path, "expected an array"))
}

fn uint(v: &Value, path: &str) -> Result<u64, CliError> {
    v.as_u64().ok_or_else(|| schema(path, "expected a nonnegative integer"))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, CliError> {
    obj.get(key).ok_or_else(|| schema(&format!("{path}.{key}"), "missing field"))
}

fn reject_unknown(obj: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<(), CliError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(&format!("{path}.{k}"), "unknown field")),
        None => Ok(()),
    }
}

/// 1-based message indices, each below `count`.
fn indices(v: &Value, count: usize, path: &str) -> Result<Vec<usize>, CliError> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let p = format!("{path}[{i}]");
            let m = uint(x, &p)? as usize;
            if m == 0 || m > count {
                return Err(schema(&p, format!("message index {m} outside 1..={count}")));
            }
            Ok(m - 1)
        })
        .collect()
}

/// Exact rational from a JSON integer or a `"p/q"` string.
pub fn parse_exact(v: &Value, path: &str) -> Result<Rational, CliError> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(int)
            .ok_or_else(|| schema(path, "expected an integer or a \"p/q\" string")),
        Value::String(s) => parse_rational(s).map_err(|e| schema(path, e.to_string())),
        _ => Err(schema(path, "expected an integer or a \"p/q\" string")),
    }
}

/// `{"messages": n, "lengths": [int]?, "labels": [str]?, "users": [{"demand": [..], "side": [..]}]}`.
pub fn parse_instance(v: &Value) -> Result<ICInstance, CliError> {
    let root = object(v, "$")?;
    reject_unknown(root, &["messages", "lengths", "labels", "users"], "$")?;
    let n = uint(field(root, "messages", "$")?, "$.messages")? as usize;
    if n == 0 || n > 63 {
        return Err(schema("$.messages", "message count must lie in 1..=63"));
    }
    let lengths = match root.get("lengths") {
        None => vec![int(1); n],
        Some(l) => {
            let items = array(l, "$.lengths")?;
            if items.len() != n {
                return Err(schema("$.lengths", format!("expected {n} entries, got {}", items.len())));
            }
            let mut out = Vec::with_capacity(n);
            for (i, x) in items.iter().enumerate() {
                let p = format!("$.lengths[{i}]");
                let len = uint(x, &p)?;
                if len == 0 {
                    return Err(schema(&p, "message length must be positive"));
                }
                out.push(int(len as i64));
            }
            out
        }
    };
    let labels = match root.get("labels") {
        None => (1..=n).map(|m| m.to_string()).collect(),
        Some(l) => {
            let items = array(l, "$.labels")?;
            if items.len() != n {
                return Err(schema("$.labels", format!("expected {n} entries, got {}", items.len())));
            }
            items
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    x.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| schema(&format!("$.labels[{i}]"), "expected a string"))
                })
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    let users_v = array(field(root, "users", "$")?, "$.users")?;
    if users_v.is_empty() {
        return Err(schema("$.users", "at least one user is required"));
    }
    let mut users = Vec::with_capacity(users_v.len());
    for (j, u) in users_v.iter().enumerate() {
        let path = format!("$.users[{j}]");
        let obj = object(u, &path)?;
        reject_unknown(obj, &["demand", "side"], &path)?;
        let demand = indices(field(obj, "demand", &path)?, n, &format!("{path}.demand"))?;
        let side = match obj.get("side") {
            Some(s) => indices(s, n, &format!("{path}.side"))?,
            None => Vec::new(),
        };
        if demand.is_empty() {
            return Err(schema(&format!("{path}.demand"), "demand set must be nonempty"));
        }
        if let Some(m) = demand.iter().find(|m| side.contains(m)) {
            return Err(schema(&format!("{path}.side"), format!("message {} is both demanded and known", m + 1)));
        }
        users.push(IcUser::new(demand, side));
    }
    ICInstance::with_labels(lengths, users, labels).map_err(|e| schema("$", e.to_string()))
}

pub fn instance_to_json(ic: &ICInstance) -> Value {
    let one_based = |s: &std::collections::BTreeSet<usize>| s.iter().map(|m| m + 1).collect::<Vec<_>>();
    let lengths: Vec<Value> = ic
        .lengths()
        .iter()
        .map(|l| match l.is_integer() {
            true => json!(to_f64(l) as u64),
            false => json!(format_rational(l)),
        })
        .collect();
    json!({
        "messages": ic.message_count(),
        "lengths": lengths,
        "labels": (0..ic.message_count()).map(|m| ic.label(m)).collect::<Vec<_>>(),
        "users": ic.users().iter().map(|u| json!({
            "demand": one_based(&u.demand),
            "side": one_based(&u.side),
        })).collect::<Vec<_>>(),
    })
}

/// A linear spec plus optional decode sets `K_j` (1-based).
pub struct SpecFile {
    pub spec: LinearSpec,
    pub decode_sets: Option<Vec<MessageSet>>,
}

/// `{"messages": [{"id", "bits"}], "composites": [{"subset": [..], "rows": [hex]}], "decode_sets": [[..]]?}`.
///
/// Composite rows cover the bits of the messages in `subset`, in increasing
/// message order; hex is big-endian with the first column as the top bit.
pub fn parse_spec(v: &Value) -> Result<SpecFile, CliError> {
    let root = object(v, "$")?;
    reject_unknown(root, &["messages", "composites", "decode_sets"], "$")?;
    let msgs = array(field(root, "messages", "$")?, "$.messages")?;
    let n = msgs.len();
    if n == 0 || n > 63 {
        return Err(schema("$.messages", "message count must lie in 1..=63"));
    }
    let mut bits = vec![None; n];
    for (i, m) in msgs.iter().enumerate() {
        let path = format!("$.messages[{i}]");
        let obj = object(m, &path)?;
        reject_unknown(obj, &["id", "bits"], &path)?;
        let id = uint(field(obj, "id", &path)?, &format!("{path}.id"))? as usize;
        if id == 0 || id > n {
            return Err(schema(&format!("{path}.id"), format!("id must lie in 1..={n}")));
        }
        if bits[id - 1].is_some() {
            return Err(schema(&format!("{path}.id"), format!("duplicate id {id}")));
        }
        bits[id - 1] = Some(uint(field(obj, "bits", &path)?, &format!("{path}.bits"))? as usize);
    }
    let bits: Vec<usize> = bits.into_iter().map(|b| b.expect("ids are a permutation")).collect();
    let mut composites = Vec::new();
    if let Some(cs) = root.get("composites") {
        for (c, comp) in array(cs, "$.composites")?.iter().enumerate() {
            let path = format!("$.composites[{c}]");
            let obj = object(comp, &path)?;
            reject_unknown(obj, &["subset", "rows"], &path)?;
            let subset = message_set(indices(field(obj, "subset", &path)?, n, &format!("{path}.subset"))?);
            if subset == 0 {
                return Err(schema(&format!("{path}.subset"), "subset must be nonempty"));
            }
            let width: usize = members(subset).map(|i| bits[i]).sum();
            let rows = array(field(obj, "rows", &path)?, &format!("{path}.rows"))?
                .iter()
                .enumerate()
                .map(|(r, x)| {
                    let p = format!("{path}.rows[{r}]");
                    let hex = x.as_str().ok_or_else(|| schema(&p, "expected a hex string"))?;
                    BitVector::from_hex(hex, width).map_err(|e| schema(&p, e.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            composites.push(Composite { subset, rows });
        }
    }
    let decode_sets = match root.get("decode_sets") {
        None => None,
        Some(d) => Some(
            array(d, "$.decode_sets")?
                .iter()
                .enumerate()
                .map(|(j, k)| indices(k, n, &format!("$.decode_sets[{j}]")).map(message_set))
                .collect::<Result<Vec<_>, _>>()?,
        ),
    };
    let spec = LinearSpec::new(bits, composites).map_err(|e| schema("$.composites", e.to_string()))?;
    Ok(SpecFile { spec, decode_sets })
}

pub fn spec_to_json(spec: &LinearSpec, decode_sets: Option<&[MessageSet]>) -> Value {
    let mut out = json!({
        "messages": spec.bits().iter().enumerate().map(|(i, b)| json!({"id": i + 1, "bits": b})).collect::<Vec<_>>(),
        "composites": spec.composites().iter().map(|c| json!({
            "subset": members(c.subset).map(|i| i + 1).collect::<Vec<_>>(),
            "rows": c.rows.iter().map(BitVector::to_hex).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    });
    if let Some(k) = decode_sets {
        out["decode_sets"] = json!(k.iter().map(|&s| one_based(s)).collect::<Vec<_>>());
    }
    out
}

pub fn one_based(set: MessageSet) -> Vec<usize> {
    members(set).map(|i| i + 1).collect()
}
