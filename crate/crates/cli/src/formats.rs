//! JSON file formats. Node numbers in files are 1-based; extension-field
//! elements are packed integers sum_i c_i p^i.
//!
//! Every document starts with `"schema": 1`; readers accept documents that
//! omit it.

use std::path::Path;

use msrlab::code::{ArrayCode, CodeParams, DataFill};
use msrlab::reduction::{PhiPair, PhiSystem};
use msrlab::repair::{NodeRepair, RepairScheme};
use msrlab::{Field, Matrix, Subspace};
use serde_json::{json, Map, Value};

use crate::CliError;

pub const SCHEMA: u64 = 1;

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Format(msg.into())
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
}

/// A new object holding the schema tag.
pub fn document() -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m
}

fn object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>, CliError> {
    let m = v.as_object().ok_or_else(|| bad(format!("{what}: expected an object")))?;
    match m.get("schema") {
        None => {}
        Some(s) if s.as_u64() == Some(SCHEMA) => {}
        Some(s) => return Err(bad(format!("{what}: unsupported schema {s}"))),
    }
    Ok(m)
}

fn field_of<'a>(m: &'a Map<String, Value>, key: &str, what: &str) -> Result<&'a Value, CliError> {
    m.get(key).ok_or_else(|| bad(format!("{what}: missing \"{key}\"")))
}

fn uint(v: &Value, what: &str) -> Result<u64, CliError> {
    v.as_u64().ok_or_else(|| bad(format!("{what}: expected a nonnegative integer")))
}

fn usize_of(m: &Map<String, Value>, key: &str, what: &str) -> Result<usize, CliError> {
    Ok(uint(field_of(m, key, what)?, &format!("{what}.{key}"))? as usize)
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>, CliError> {
    v.as_array().ok_or_else(|| bad(format!("{what}: expected an array")))
}

pub fn field_to_json(f: &Field) -> Value {
    json!({
        "p": f.characteristic(),
        "m": f.degree(),
        "reduction": f.reduction().map(|r| r.to_vec()),
    })
}

pub fn field_from_json(v: &Value) -> Result<Field, CliError> {
    let m = object(v, "field")?;
    let p = uint(field_of(m, "p", "field")?, "field.p")?;
    let deg = match m.get("m") {
        None => 1,
        Some(x) => uint(x, "field.m")?,
    };
    let deg = u32::try_from(deg).map_err(|_| bad("field.m is too large"))?;
    let reduction = match m.get("reduction") {
        None | Some(Value::Null) => None,
        Some(r) => Some(
            array(r, "field.reduction")?
                .iter()
                .map(|c| uint(c, "field.reduction"))
                .collect::<Result<Vec<_>, _>>()?,
        ),
    };
    Ok(Field::new(p, deg, reduction.as_deref())?)
}

pub fn matrix_to_json(m: &Matrix) -> Value {
    Value::Array(m.to_rows().into_iter().map(|r| json!(r)).collect())
}

/// A matrix with `cols` columns and, if given, exactly `rows` rows.
pub fn matrix_from_json(f: &Field, v: &Value, rows: Option<usize>, cols: usize, what: &str) -> Result<Matrix, CliError> {
    let list = array(v, what)?;
    if let Some(r) = rows {
        if list.len() != r {
            return Err(bad(format!("{what}: expected {r} rows, got {}", list.len())));
        }
    }
    let mut data = Vec::with_capacity(list.len() * cols);
    for (i, row) in list.iter().enumerate() {
        let row = array(row, what)?;
        if row.len() != cols {
            return Err(bad(format!("{what}: row {} has {} entries, expected {cols}", i + 1, row.len())));
        }
        for x in row {
            data.push(f.check(uint(x, what)?)?);
        }
    }
    Ok(Matrix::from_vec(f, list.len(), cols, data)?)
}

pub fn code_to_json(code: &ArrayCode) -> Value {
    let p = code.params();
    let mut doc = document();
    doc.insert("field".into(), field_to_json(code.field()));
    doc.insert("ell".into(), json!(p.ell));
    doc.insert("k".into(), json!(p.k));
    doc.insert("r".into(), json!(p.r));
    doc.insert(
        "encoding".into(),
        Value::Array(
            code.encoding()
                .iter()
                .map(|row| Value::Array(row.iter().map(matrix_to_json).collect()))
                .collect(),
        ),
    );
    Value::Object(doc)
}

pub fn code_from_json(v: &Value) -> Result<ArrayCode, CliError> {
    let m = object(v, "code")?;
    let field = field_from_json(field_of(m, "field", "code")?)?;
    let ell = usize_of(m, "ell", "code")?;
    let k = usize_of(m, "k", "code")?;
    let r = usize_of(m, "r", "code")?;
    let params = CodeParams::new(ell, k, r)?;
    let grid = array(field_of(m, "encoding", "code")?, "code.encoding")?;
    if grid.len() != r {
        return Err(bad(format!("code.encoding: expected {r} parity rows, got {}", grid.len())));
    }
    let mut enc = Vec::with_capacity(r);
    for (t, row) in grid.iter().enumerate() {
        let row = array(row, "code.encoding")?;
        if row.len() != k {
            return Err(bad(format!("code.encoding[{}]: expected {k} matrices, got {}", t + 1, row.len())));
        }
        enc.push(
            row.iter()
                .enumerate()
                .map(|(j, mv)| matrix_from_json(&field, mv, Some(ell), ell, &format!("A_{{{},{}}}", t + 1, j + 1)))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    Ok(ArrayCode::new(&field, params, enc)?)
}

pub fn scheme_to_json(scheme: &RepairScheme) -> Value {
    let mut doc = document();
    doc.insert(
        "nodes".into(),
        Value::Array(
            scheme
                .nodes
                .values()
                .map(|rep| {
                    json!({
                        "failed": rep.failed + 1,
                        "helpers": rep
                            .helpers
                            .iter()
                            .map(|h| h.as_ref().map_or(Value::Null, matrix_to_json))
                            .collect::<Vec<_>>(),
                    })
                })
                .collect(),
        ),
    );
    Value::Object(doc)
}

pub fn scheme_from_json(v: &Value, code: &ArrayCode) -> Result<RepairScheme, CliError> {
    let m = object(v, "scheme")?;
    let p = code.params();
    let mut scheme = RepairScheme::default();
    for entry in array(field_of(m, "nodes", "scheme")?, "scheme.nodes")? {
        let e = object(entry, "scheme node")?;
        let failed = usize_of(e, "failed", "scheme node")?;
        if failed == 0 || failed > p.k {
            return Err(bad(format!("scheme: failed node {failed} is not in 1..={}", p.k)));
        }
        if scheme.get(failed - 1).is_some() {
            return Err(bad(format!("scheme: node {failed} listed twice")));
        }
        let helpers = array(field_of(e, "helpers", "scheme node")?, "scheme helpers")?;
        if helpers.len() != p.n() {
            return Err(bad(format!("scheme node {failed}: expected {} helper entries", p.n())));
        }
        let helpers = helpers
            .iter()
            .enumerate()
            .map(|(j, h)| match h {
                Value::Null => Ok(None),
                h => matrix_from_json(code.field(), h, Some(p.repair_dim()), p.ell, &format!("S_{{{failed},{}}}", j + 1)).map(Some),
            })
            .collect::<Result<Vec<_>, _>>()?;
        scheme.insert(NodeRepair {
            failed: failed - 1,
            helpers,
        });
    }
    Ok(scheme)
}

pub fn system_to_json(sys: &PhiSystem) -> Value {
    let mut doc = document();
    doc.insert("field".into(), field_to_json(sys.field()));
    doc.insert("ell".into(), json!(sys.ell()));
    doc.insert("r".into(), json!(sys.r()));
    doc.insert(
        "pairs".into(),
        Value::Array(
            sys.pairs()
                .iter()
                .map(|p| json!({"phi": matrix_to_json(&p.phi), "s": matrix_to_json(p.s.basis())}))
                .collect(),
        ),
    );
    Value::Object(doc)
}

pub fn system_from_json(v: &Value) -> Result<PhiSystem, CliError> {
    let m = object(v, "system")?;
    let field = field_from_json(field_of(m, "field", "system")?)?;
    let ell = usize_of(m, "ell", "system")?;
    let r = usize_of(m, "r", "system")?;
    let pairs = array(field_of(m, "pairs", "system")?, "system.pairs")?
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let pm = object(p, "system pair")?;
            let phi = matrix_from_json(&field, field_of(pm, "phi", "pair")?, Some(ell), ell, &format!("Phi_{}", i + 1))?;
            let s = matrix_from_json(&field, field_of(pm, "s", "pair")?, None, ell, &format!("S_{}", i + 1))?;
            Ok(PhiPair {
                phi,
                s: Subspace::span(&s),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(PhiSystem::new(&field, ell, r, pairs)?)
}

pub fn data_to_json(fill: &DataFill) -> Value {
    let mut doc = document();
    doc.insert("systematic".into(), json!(fill.systematic));
    Value::Object(doc)
}

pub fn data_from_json(v: &Value, code: &ArrayCode) -> Result<DataFill, CliError> {
    let m = object(v, "data")?;
    let p = code.params();
    let rows = array(field_of(m, "systematic", "data")?, "data.systematic")?;
    if rows.len() != p.k {
        return Err(bad(format!("data: expected {} vectors, got {}", p.k, rows.len())));
    }
    let systematic = rows
        .iter()
        .map(|r| {
            let r = array(r, "data vector")?;
            if r.len() != p.ell {
                return Err(bad(format!("data: vectors must have length {}", p.ell)));
            }
            r.iter()
                .map(|x| Ok(code.field().check(uint(x, "data entry")?)?))
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DataFill { systematic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use msrlab::code::known;

    #[test]
    fn code_round_trip() {
        for code in [known::fig1(), known::table1()] {
            let v = code_to_json(&code);
            assert_eq!(code_from_json(&v).unwrap(), code);
            let text = crate::json::to_string(&v);
            assert_eq!(code_from_json(&serde_json::from_str(&text).unwrap()).unwrap(), code);
        }
    }

    #[test]
    fn extension_field_round_trip() {
        let f = Field::new(2, 2, Some(&[1, 1, 1])).unwrap();
        assert_eq!(field_from_json(&field_to_json(&f)).unwrap(), f);
        assert!(field_from_json(&json!({"p": 2, "m": 2, "reduction": [1, 0, 1]})).is_err());
        assert!(field_from_json(&json!({"p": 4, "m": 1, "reduction": null})).is_err());
    }

    #[test]
    fn rejects_malformed_documents() {
        let mut v = code_to_json(&known::fig1());
        v["schema"] = json!(2);
        assert!(code_from_json(&v).is_err());
        let mut v = code_to_json(&known::fig1());
        v["encoding"][0][0] = json!([[1, 0], [0, 2]]);
        assert!(code_from_json(&v).is_err());
        let mut v = code_to_json(&known::fig1());
        v["k"] = json!(3);
        assert!(code_from_json(&v).is_err());
    }
}
