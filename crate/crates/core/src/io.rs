//! JSON instance files.
//!
//! ```json
//! { "n": 2, "m": 1,
//!   "objective": [[1, 1, -3], [1, 2, -1], [2, 2, -2]],
//!   "constraints": [ { "matrix": [[1, 1, 3], [1, 2, 4], [2, 2, 6]], "rhs": 1 } ],
//!   "linear": { "objective": [0, 0], "constraints": [[0, 0]] } }
//! ```
//!
//! Triplets are 1-based and must lie in the upper triangle (`i <= j`);
//! missing entries are zero. The `linear` block is optional. The bare tokens
//! `NaN`, `Infinity` and `-Infinity` are accepted by the reader so that such
//! files fail validation with a precise message instead of a syntax error.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::qcqp::{homogenize, Constraint, GeneralQcqpInstance, QcqpInstance};

const DUPLICATE_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Number {
    Num(f64),
    Special(String),
}

impl Number {
    fn value(&self) -> Result<f64> {
        match self {
            Number::Num(v) => Ok(*v),
            Number::Special(s) => match s.as_str() {
                "NaN" => Ok(f64::NAN),
                "Infinity" => Ok(f64::INFINITY),
                "-Infinity" => Ok(f64::NEG_INFINITY),
                other => Err(Error::Parse(format!("expected a number, found \"{other}\""))),
            },
        }
    }
}

#[derive(Debug, Deserialize)]
struct RawConstraint {
    matrix: Vec<(i64, i64, Number)>,
    rhs: Number,
}

#[derive(Debug, Deserialize)]
struct RawLinear {
    objective: Vec<Number>,
    constraints: Vec<Vec<Number>>,
}

#[derive(Debug, Deserialize)]
struct RawInstance {
    n: usize,
    m: usize,
    objective: Vec<(i64, i64, Number)>,
    constraints: Vec<RawConstraint>,
    #[serde(default)]
    linear: Option<RawLinear>,
}

#[derive(Debug, Serialize)]
struct OutConstraint {
    matrix: Vec<(usize, usize, f64)>,
    rhs: f64,
}

#[derive(Debug, Serialize)]
struct OutInstance {
    n: usize,
    m: usize,
    objective: Vec<(usize, usize, f64)>,
    constraints: Vec<OutConstraint>,
}

/// Quotes bare non-finite tokens outside string literals.
fn quote_special_tokens(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_string = false;
    let mut escaped = false;
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        if in_string {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            rest = &rest[c.len_utf8()..];
            continue;
        }
        if c == '"' {
            in_string = true;
            out.push(c);
            rest = &rest[1..];
            continue;
        }
        let mut matched = false;
        for token in ["-Infinity", "Infinity", "NaN"] {
            if rest.starts_with(token) {
                out.push('"');
                out.push_str(token);
                out.push('"');
                rest = &rest[token.len()..];
                matched = true;
                break;
            }
        }
        if !matched {
            out.push(c);
            rest = &rest[c.len_utf8()..];
        }
    }
    out
}

fn build_matrix(n: usize, triplets: &[(i64, i64, Number)], context: &str) -> Result<SymMatrix> {
    let mut entries: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, j, v) in triplets {
        let v = v.value()?;
        if !v.is_finite() {
            return Err(Error::NonFinite(format!(
                "non-finite entry in {context} at ({i}, {j})"
            )));
        }
        if *i < 1 || *j < 1 || *i as usize > n || *j as usize > n {
            return Err(Error::InvalidTriplet {
                context: context.into(),
                reason: format!("index ({i}, {j}) outside 1..={n}"),
            });
        }
        if i > j {
            return Err(Error::InvalidTriplet {
                context: context.into(),
                reason: format!("({i}, {j}) is below the diagonal; give the upper triangle only"),
            });
        }
        let key = (*i as usize - 1, *j as usize - 1);
        match entries.get(&key) {
            None => {
                entries.insert(key, v);
            }
            Some(&prev) => {
                let scale = prev.abs().max(v.abs()).max(f64::MIN_POSITIVE);
                if (prev - v).abs() > DUPLICATE_REL_TOL * scale {
                    return Err(Error::Asymmetric {
                        context: context.into(),
                        i: *i as usize,
                        j: *j as usize,
                        a: prev,
                        b: v,
                    });
                }
                entries.insert(key, 0.5 * (prev + v));
            }
        }
    }
    let mut m = SymMatrix::zeros(n);
    for ((i, j), v) in entries {
        m.set(i, j, v);
    }
    Ok(m)
}

type LinearTerms = (Vec<f64>, Vec<Vec<f64>>);

fn parse_general(text: &str) -> Result<(QcqpInstance, Option<LinearTerms>)> {
    let raw: RawInstance =
        serde_json::from_str(&quote_special_tokens(text)).map_err(|e| Error::Parse(e.to_string()))?;
    if raw.n == 0 {
        return Err(Error::DimensionMismatch("n must be at least 1".into()));
    }
    if raw.m == 0 {
        return Err(Error::NoConstraints);
    }
    if raw.constraints.len() != raw.m {
        return Err(Error::DimensionMismatch(format!(
            "m = {} but {} constraints given",
            raw.m,
            raw.constraints.len()
        )));
    }
    let objective = build_matrix(raw.n, &raw.objective, "objective")?;
    let mut constraints = Vec::with_capacity(raw.m);
    for (p, c) in raw.constraints.iter().enumerate() {
        let ctx = format!("constraint {}", p + 1);
        let matrix = build_matrix(raw.n, &c.matrix, &ctx)?;
        let rhs = c.rhs.value()?;
        if !rhs.is_finite() {
            return Err(Error::NonFinite(format!("non-finite entry in rhs of {ctx}")));
        }
        constraints.push(Constraint { matrix, rhs });
    }
    let inst = QcqpInstance::new(objective, constraints)?;
    let linear = match raw.linear {
        None => None,
        Some(l) => {
            let obj = l
                .objective
                .iter()
                .map(Number::value)
                .collect::<Result<Vec<_>>>()?;
            let cons = l
                .constraints
                .iter()
                .map(|row| row.iter().map(Number::value).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            Some((obj, cons))
        }
    };
    Ok((inst, linear))
}

/// Parses a general instance; absent linear terms are zero.
pub fn parse_general_instance(text: &str) -> Result<GeneralQcqpInstance> {
    let (inst, linear) = parse_general(text)?;
    let n = inst.n();
    let m = inst.m();
    let (obj, cons) = linear.unwrap_or_else(|| (vec![0.0; n], vec![vec![0.0; n]; m]));
    GeneralQcqpInstance::new(inst, obj, cons)
}

/// Parses an instance. Files carrying a `linear` block with any nonzero
/// term are homogenized (variable 1 becomes `x_0`).
pub fn parse_instance(text: &str) -> Result<QcqpInstance> {
    let (inst, linear) = parse_general(text)?;
    match linear {
        Some((obj, cons)) if obj.iter().chain(cons.iter().flatten()).any(|&v| v != 0.0) => {
            Ok(homogenize(&GeneralQcqpInstance::new(inst, obj, cons)?))
        }
        Some((obj, cons)) => {
            GeneralQcqpInstance::new(inst.clone(), obj, cons)?;
            Ok(inst)
        }
        None => Ok(inst),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.display().to_string()),
        _ => Error::Io(e),
    })
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<QcqpInstance> {
    parse_instance(&read(path.as_ref())?)
}

pub fn load_general_instance(path: impl AsRef<Path>) -> Result<GeneralQcqpInstance> {
    parse_general_instance(&read(path.as_ref())?)
}

fn triplets(m: &SymMatrix) -> Vec<(usize, usize, f64)> {
    let n = m.n();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            let v = m.get(i, j);
            if v != 0.0 {
                out.push((i + 1, j + 1, v));
            }
        }
    }
    out
}

pub fn instance_to_json_value(inst: &QcqpInstance) -> serde_json::Value {
    let out = OutInstance {
        n: inst.n(),
        m: inst.m(),
        objective: triplets(inst.objective()),
        constraints: inst
            .constraints()
            .iter()
            .map(|c| OutConstraint {
                matrix: triplets(&c.matrix),
                rhs: c.rhs,
            })
            .collect(),
    };
    serde_json::to_value(out).expect("instance serializes")
}

pub fn instance_to_json(inst: &QcqpInstance) -> String {
    serde_json::to_string_pretty(&instance_to_json_value(inst)).expect("instance serializes")
}

pub fn save_instance(inst: &QcqpInstance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, instance_to_json(inst) + "\n")?;
    Ok(())
}
