//! File formats behind the `glocal` binary: problem families, scenarios,
//! state snapshots, and module generators, all JSON, plus the canonical
//! writer that makes every emitted artifact deterministic.
//!
//! A *problem file* is `{"ambient_dim": n, "problems": [...]}`; each problem
//! carries an `id`, an orthonormal `basis` for its carrier (rows, ambient
//! coordinates), a `feasible` shape in carrier coordinates, and a `utility`
//! as a list of `{"exponents", "coeff"}` terms. Coefficients are `"num/den"`
//! strings (exact) or JSON numbers (converted to the exact binary rational).
//! A *scenario* replaces `problems` with a `sequence` and adds the
//! `true_utility` the sequence is probing. A *module file* lists generators
//! of a submodule of P^λ in the same term format extended with a `position`
//! index. A *state snapshot* embeds the build options and the input family;
//! loading rebuilds the state deterministically, so saving a loaded snapshot
//! reproduces the file byte for byte.
//!
//! Canonical writing rules: object keys are sorted (the default map is a
//! B-tree), rational coefficients are `"num/den"` strings, floats use the
//! shortest decimal that round-trips, and the text ends with one newline.

use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::groebner::{ModuleElement, ModuleOrder};
use crate::poly::{Monomial, QPoly};
use crate::problems::LocalProblem;
use crate::qlin::{qfrom_f64, QScalar};
use crate::space::{FeasibleSet, Shape, Subspace, Vector};
use crate::surrogate::{BuildOptions, SurrogateState};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid input: {0}")]
    Validation(String),
}

type Result<T> = std::result::Result<T, IoError>;

// ---------------------------------------------------------------------------
// Wire representations

/// A coefficient as it appears on disk: exact `"num/den"` text or a number.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CoeffRepr {
    Text(String),
    Number(f64),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRepr {
    pub exponents: Vec<u32>,
    pub coeff: CoeffRepr,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FeasibleRepr {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Polytope { a: Vec<Vec<f64>>, b: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemRepr {
    pub id: String,
    /// Orthonormal carrier basis, one row per basis vector.
    pub basis: Vec<Vec<f64>>,
    /// Shape in carrier coordinates (dimension = number of basis rows).
    pub feasible: FeasibleRepr,
    pub utility: Vec<TermRepr>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFileRepr {
    pub ambient_dim: usize,
    pub problems: Vec<ProblemRepr>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioRepr {
    pub ambient_dim: usize,
    pub true_utility: Vec<TermRepr>,
    pub sequence: Vec<ProblemRepr>,
    #[serde(default)]
    pub budget: Option<usize>,
}

/// One term of one component of a module element: the polynomial term
/// format extended with the component's position index.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleTermRepr {
    pub position: usize,
    pub exponents: Vec<u32>,
    pub coeff: CoeffRepr,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleFileRepr {
    pub nvars: usize,
    pub positions: usize,
    /// `"top_grevlex"` (default) or `"pot_grevlex"`.
    #[serde(default)]
    pub order: Option<String>,
    pub generators: Vec<Vec<ModuleTermRepr>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptionsRepr {
    #[serde(default)]
    degree: Option<usize>,
    samples: usize,
    seed: u64,
}

pub fn parse_problem_file(text: &str) -> Result<ProblemFileRepr> {
    serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))
}

pub fn parse_scenario(text: &str) -> Result<ScenarioRepr> {
    serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))
}

pub fn parse_module_file(text: &str) -> Result<ModuleFileRepr> {
    serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))
}

// ---------------------------------------------------------------------------
// Wire -> exact objects

pub fn parse_coeff(c: &CoeffRepr) -> Result<QScalar> {
    match c {
        CoeffRepr::Text(s) => QScalar::from_str(s.trim())
            .map_err(|e| IoError::Schema(format!("bad coefficient {s:?}: {e}"))),
        CoeffRepr::Number(x) => {
            if !x.is_finite() {
                return Err(IoError::Schema(format!("non-finite coefficient {x}")));
            }
            Ok(qfrom_f64(*x))
        }
    }
}

pub fn utility_from_terms(nvars: usize, terms: &[TermRepr]) -> Result<QPoly> {
    let mut parsed = Vec::with_capacity(terms.len());
    for (i, t) in terms.iter().enumerate() {
        if t.exponents.len() != nvars {
            return Err(IoError::Schema(format!(
                "term {i} has {} exponents, ambient dimension is {nvars}",
                t.exponents.len()
            )));
        }
        parsed.push((Monomial(t.exponents.clone()), parse_coeff(&t.coeff)?));
    }
    Ok(QPoly::from_terms(nvars, parsed))
}

fn shape_from_repr(repr: &FeasibleRepr) -> Shape {
    match repr {
        FeasibleRepr::Box { lower, upper } => Shape::Box {
            lower: lower.clone(),
            upper: upper.clone(),
        },
        FeasibleRepr::Polytope { a, b } => Shape::Polytope {
            a: a.clone(),
            b: b.clone(),
        },
        FeasibleRepr::Ball { center, radius } => Shape::Ball {
            center: center.clone(),
            radius: *radius,
        },
    }
}

pub fn problem_from_repr(ambient: usize, repr: &ProblemRepr) -> Result<LocalProblem> {
    let context = |what: &str| format!("problem {:?}: {what}", repr.id);
    for (i, row) in repr.basis.iter().enumerate() {
        if row.len() != ambient {
            return Err(IoError::Schema(context(&format!(
                "basis row {i} has {} entries, ambient dimension is {ambient}",
                row.len()
            ))));
        }
    }
    let rows: Vec<Vector> = repr.basis.iter().map(|r| Vector(r.clone())).collect();
    let carrier = Subspace::from_orthonormal(ambient, rows)
        .map_err(|e| IoError::Validation(context(&e.to_string())))?;
    let feasible = FeasibleSet::new(carrier, shape_from_repr(&repr.feasible))
        .map_err(|e| IoError::Validation(context(&e.to_string())))?;
    let utility = utility_from_terms(ambient, &repr.utility)
        .map_err(|e| IoError::Schema(context(&e.to_string())))?;
    LocalProblem::new(repr.id.clone(), feasible, utility)
        .map_err(|e| IoError::Validation(context(&e.to_string())))
}

pub fn problems_from_file(repr: &ProblemFileRepr) -> Result<Vec<LocalProblem>> {
    repr.problems
        .iter()
        .map(|p| problem_from_repr(repr.ambient_dim, p))
        .collect()
}

// ---------------------------------------------------------------------------
// Exact objects -> canonical JSON

pub fn coeff_json(c: &QScalar) -> Value {
    Value::String(format!("{}/{}", c.numer(), c.denom()))
}

/// Terms in the polynomial's deterministic (exponent-lexicographic) order.
pub fn utility_json(p: &QPoly) -> Value {
    let terms: Vec<Value> = p
        .terms()
        .map(|(m, c)| json!({ "exponents": m.0, "coeff": coeff_json(c) }))
        .collect();
    Value::Array(terms)
}

pub fn feasible_json(f: &FeasibleSet) -> Value {
    match &f.shape {
        Shape::Box { lower, upper } => json!({
            "type": "box", "lower": lower, "upper": upper,
        }),
        Shape::Polytope { a, b } => json!({
            "type": "polytope", "a": a, "b": b,
        }),
        Shape::Ball { center, radius } => json!({
            "type": "ball", "center": center, "radius": radius,
        }),
    }
}

pub fn problem_json(p: &LocalProblem) -> Value {
    let basis: Vec<Vec<f64>> = p.carrier().basis().iter().map(|b| b.0.clone()).collect();
    json!({
        "id": p.id,
        "basis": basis,
        "feasible": feasible_json(&p.feasible),
        "utility": utility_json(&p.utility),
    })
}

pub fn family_json(ambient: usize, problems: &[LocalProblem]) -> Value {
    json!({
        "ambient_dim": ambient,
        "problems": problems.iter().map(problem_json).collect::<Vec<_>>(),
    })
}

// ---------------------------------------------------------------------------
// State snapshots

pub const SNAPSHOT_SCHEMA: &str = "glocal-state/1";

/// Everything needed to reproduce `state`: the schema tag, the build
/// options, the input family, and (informationally) the computed state.
pub fn snapshot_json(state: &SurrogateState, opts: &BuildOptions) -> Value {
    json!({
        "schema": SNAPSHOT_SCHEMA,
        "options": { "degree": opts.degree, "samples": opts.samples, "seed": opts.seed },
        "input": family_json(state.partition.ambient, &state.problems),
        "state": state.to_json(),
    })
}

/// Read back the inputs a snapshot was built from. The embedded `state` is
/// not trusted: callers rebuild it with `build_state`, which is
/// deterministic, so save-after-load reproduces the snapshot exactly.
pub fn load_snapshot(text: &str) -> Result<(Vec<LocalProblem>, BuildOptions)> {
    let v: Value = serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))?;
    let obj = v
        .as_object()
        .ok_or_else(|| IoError::Schema("snapshot must be a JSON object".into()))?;
    match obj.get("schema").and_then(Value::as_str) {
        Some(SNAPSHOT_SCHEMA) => {}
        Some(other) => {
            return Err(IoError::Schema(format!(
                "unrecognized snapshot schema {other:?} (expected {SNAPSHOT_SCHEMA:?})"
            )))
        }
        None => return Err(IoError::Schema("snapshot lacks a schema tag".into())),
    }
    let options: OptionsRepr = obj
        .get("options")
        .cloned()
        .ok_or_else(|| IoError::Schema("snapshot lacks options".into()))
        .and_then(|o| serde_json::from_value(o).map_err(|e| IoError::Schema(e.to_string())))?;
    let input: ProblemFileRepr = obj
        .get("input")
        .cloned()
        .ok_or_else(|| IoError::Schema("snapshot lacks the input family".into()))
        .and_then(|o| serde_json::from_value(o).map_err(|e| IoError::Schema(e.to_string())))?;
    let problems = problems_from_file(&input)?;
    if problems.is_empty() {
        return Err(IoError::Schema("snapshot input family is empty".into()));
    }
    let opts = BuildOptions {
        degree: options.degree,
        samples: options.samples,
        seed: options.seed,
        region: None,
    };
    Ok((problems, opts))
}

// ---------------------------------------------------------------------------
// Module generators

pub fn module_order_from_name(name: Option<&str>) -> Result<ModuleOrder> {
    match name {
        None | Some("top_grevlex") => Ok(ModuleOrder::TOP_GREVLEX),
        Some("pot_grevlex") => Ok(ModuleOrder::POT_GREVLEX),
        Some(other) => Err(IoError::Schema(format!(
            "unknown module order {other:?} (expected \"top_grevlex\" or \"pot_grevlex\")"
        ))),
    }
}

pub fn module_elements_from_file(repr: &ModuleFileRepr) -> Result<Vec<ModuleElement>> {
    if repr.positions == 0 {
        return Err(IoError::Schema("positions must be at least 1".into()));
    }
    repr.generators
        .iter()
        .enumerate()
        .map(|(g, terms)| {
            let mut per_position: Vec<Vec<(Monomial, QScalar)>> =
                vec![Vec::new(); repr.positions];
            for (i, t) in terms.iter().enumerate() {
                let context = format!("generator {g}, term {i}");
                if t.position >= repr.positions {
                    return Err(IoError::Schema(format!(
                        "{context}: position {} out of range (positions = {})",
                        t.position, repr.positions
                    )));
                }
                if t.exponents.len() != repr.nvars {
                    return Err(IoError::Schema(format!(
                        "{context}: {} exponents, nvars is {}",
                        t.exponents.len(),
                        repr.nvars
                    )));
                }
                per_position[t.position]
                    .push((Monomial(t.exponents.clone()), parse_coeff(&t.coeff)?));
            }
            let components: Vec<QPoly> = per_position
                .into_iter()
                .map(|ts| QPoly::from_terms(repr.nvars, ts))
                .collect();
            ModuleElement::new(components).map_err(|e| IoError::Validation(e.to_string()))
        })
        .collect()
}

pub fn module_order_name(ord: &ModuleOrder) -> &'static str {
    if *ord == ModuleOrder::POT_GREVLEX {
        "pot_grevlex"
    } else {
        "top_grevlex"
    }
}

/// Elements as arrays of position-extended terms, position-major, each
/// component's terms in its deterministic order.
pub fn module_elements_json(elements: &[ModuleElement]) -> Value {
    let gens: Vec<Value> = elements
        .iter()
        .map(|e| {
            let terms: Vec<Value> = e
                .terms()
                .map(|(pos, m, c)| {
                    json!({ "position": pos, "exponents": m.0, "coeff": coeff_json(c) })
                })
                .collect();
            Value::Array(terms)
        })
        .collect();
    Value::Array(gens)
}

// ---------------------------------------------------------------------------
// Canonical writing and file plumbing

/// Pretty-printed JSON with sorted keys and a trailing newline; the same
/// value always yields the same bytes.
pub fn canonical_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}
