//! JSON form of the data model. Scalars are strings (`"p/q"` for rationals),
//! points are `{"re", "im"}` objects, transports are keyed by `"i->j"`.
//! Object keys are emitted in sorted order so output is byte-stable.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::convolution::{Splitting, TensorIndex};
use crate::error::{Error, Result};
use crate::gauss::GaussRat;
use crate::geometry::Configuration;
use crate::matrix::Matrix;
use crate::scalar::{parse_rational, Scalar};
use crate::sheaf::{CircleLocalSystem, LocalizedPerv};

fn parse_err(what: impl Into<String>) -> Error {
    Error::Parse(what.into())
}

pub fn gauss_to_json(z: &GaussRat) -> Value {
    json!({ "re": z.re.to_text(), "im": z.im.to_text() })
}

pub fn gauss_from_json(v: &Value) -> Result<GaussRat> {
    let part = |k: &str| -> Result<_> {
        let s = v
            .get(k)
            .and_then(Value::as_str)
            .ok_or_else(|| parse_err(format!("point needs string field {k:?}")))?;
        parse_rational(s)
    };
    Ok(GaussRat::new(part("re")?, part("im")?))
}

pub fn config_to_json(c: &Configuration) -> Value {
    Value::Array(c.points().iter().map(gauss_to_json).collect())
}

pub fn config_from_json(v: &Value) -> Result<Configuration> {
    let pts = v
        .as_array()
        .ok_or_else(|| parse_err("points must be an array"))?;
    Configuration::new(pts.iter().map(gauss_from_json).collect::<Result<_>>()?)
}

pub fn matrix_to_json<K: Scalar>(m: &Matrix<K>) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| {
                Value::Array(
                    m.row(i)
                        .iter()
                        .map(|x| Value::String(x.to_text()))
                        .collect(),
                )
            })
            .collect(),
    )
}

/// Reads a matrix of known shape; a matrix with zero rows is `[]`.
pub fn matrix_from_json<K: Scalar>(v: &Value, rows: usize, cols: usize) -> Result<Matrix<K>> {
    let rs = v
        .as_array()
        .ok_or_else(|| parse_err("matrix must be an array of rows"))?;
    if rs.len() != rows {
        return Err(Error::Shape(format!(
            "expected {rows} rows, found {}",
            rs.len()
        )));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for r in rs {
        let r = r
            .as_array()
            .ok_or_else(|| parse_err("matrix row must be an array"))?;
        if r.len() != cols {
            return Err(Error::Shape(format!(
                "expected {cols} columns, found {}",
                r.len()
            )));
        }
        for x in r {
            let s = x
                .as_str()
                .ok_or_else(|| parse_err("matrix entries are strings"))?;
            data.push(K::from_text(s)?);
        }
    }
    Matrix::from_vec(rows, cols, data)
}

/// Reads a matrix whose shape is implied by its rows.
pub fn matrix_from_json_any<K: Scalar>(v: &Value) -> Result<Matrix<K>> {
    let rs = v
        .as_array()
        .ok_or_else(|| parse_err("matrix must be an array of rows"))?;
    let cols = rs.first().and_then(Value::as_array).map_or(0, Vec::len);
    matrix_from_json(v, rs.len(), cols)
}

fn pair_key(i: usize, j: usize) -> String {
    format!("{i}->{j}")
}

fn parse_pair_key(s: &str) -> Result<(usize, usize)> {
    let bad = || parse_err(format!("bad transport key {s:?}"));
    let (a, b) = s.split_once("->").ok_or_else(bad)?;
    Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
}

pub fn perv_to_json<K: Scalar>(f: &LocalizedPerv<K>) -> Value {
    let phi: Vec<Value> = f
        .phis()
        .iter()
        .map(|p| json!({ "dim": p.dim(), "monodromy": matrix_to_json(p.monodromy()) }))
        .collect();
    let mplus: Map<String, Value> = f
        .transports()
        .iter()
        .map(|(&(i, j), m)| (pair_key(i, j), matrix_to_json(m)))
        .collect();
    json!({ "points": config_to_json(f.config()), "phi": phi, "mplus": mplus })
}

pub fn perv_from_json<K: Scalar>(v: &Value) -> Result<LocalizedPerv<K>> {
    let config = config_from_json(
        v.get("points")
            .ok_or_else(|| parse_err("missing \"points\""))?,
    )?;
    let phi_v = v
        .get("phi")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("missing \"phi\" array"))?;
    let phi = phi_v
        .iter()
        .map(|p| {
            let dim =
                p.get("dim")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| parse_err("phi entry needs \"dim\""))? as usize;
            let t = matrix_from_json(
                p.get("monodromy")
                    .ok_or_else(|| parse_err("phi entry needs \"monodromy\""))?,
                dim,
                dim,
            )?;
            CircleLocalSystem::new(t)
        })
        .collect::<Result<Vec<_>>>()?;
    if phi.len() != config.len() {
        return Err(Error::Shape(format!(
            "{} phi entries for {} points",
            phi.len(),
            config.len()
        )));
    }
    let mut mplus = BTreeMap::new();
    if let Some(m) = v.get("mplus") {
        let m = m
            .as_object()
            .ok_or_else(|| parse_err("\"mplus\" must be an object"))?;
        for (k, x) in m {
            let (i, j) = parse_pair_key(k)?;
            if i >= phi.len() || j >= phi.len() {
                return Err(Error::UnknownPoint(k.clone()));
            }
            mplus.insert((i, j), matrix_from_json(x, phi[j].dim(), phi[i].dim())?);
        }
    }
    LocalizedPerv::new(config, phi, mplus)
}

pub fn tensor_index_to_json(index: &[TensorIndex]) -> Value {
    Value::Array(
        index
            .iter()
            .map(|t| {
                let s: Vec<Value> = t
                    .splittings
                    .iter()
                    .map(|s| {
                        json!({
                            "left": s.left,
                            "right": s.right,
                            "offset": s.offset,
                            "left_dim": s.left_dim,
                            "right_dim": s.right_dim,
                        })
                    })
                    .collect();
                json!({ "point": gauss_to_json(&t.point), "splittings": s })
            })
            .collect(),
    )
}

pub fn tensor_index_from_json(v: &Value) -> Result<Vec<TensorIndex>> {
    let field = |o: &Value, k: &str| -> Result<usize> {
        o.get(k)
            .and_then(Value::as_u64)
            .map(|x| x as usize)
            .ok_or_else(|| parse_err(format!("splitting needs {k:?}")))
    };
    v.as_array()
        .ok_or_else(|| parse_err("tensor index must be an array"))?
        .iter()
        .map(|t| {
            let point = gauss_from_json(
                t.get("point")
                    .ok_or_else(|| parse_err("index entry needs \"point\""))?,
            )?;
            let splittings = t
                .get("splittings")
                .and_then(Value::as_array)
                .ok_or_else(|| parse_err("index entry needs \"splittings\""))?
                .iter()
                .map(|s| {
                    Ok(Splitting {
                        left: field(s, "left")?,
                        right: field(s, "right")?,
                        offset: field(s, "offset")?,
                        left_dim: field(s, "left_dim")?,
                        right_dim: field(s, "right_dim")?,
                    })
                })
                .collect::<Result<_>>()?;
            Ok(TensorIndex { point, splittings })
        })
        .collect()
}

pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

pub fn parse(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))
}
