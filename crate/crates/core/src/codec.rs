//! JSON forms of measures, strategies, trees and vertex sets.
//!
//! Rationals are always canonical strings; see [`crate::rational::canonical`].

use serde_json::{json, Map, Value};

use crate::hedging::{DynamicPosition, SemiStaticStrategy};
use crate::model::{FilteredModel, Measure};
use crate::polytope::VertexSet;
use crate::rational::{rational_from_json, rational_to_json, vec_to_json, Rational};
use crate::tree::{AtomicTree, TreeNode};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("field `{field}`: {message}")]
pub struct CodecError {
    pub field: String,
    pub message: String,
}

pub(crate) fn err(field: impl Into<String>, message: impl Into<String>) -> CodecError {
    CodecError {
        field: field.into(),
        message: message.into(),
    }
}

pub(crate) fn get<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value, CodecError> {
    v.get(key)
        .ok_or_else(|| err(format!("{path}.{key}"), "missing"))
}

pub(crate) fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, CodecError> {
    v.as_array().ok_or_else(|| err(path, "expected an array"))
}

pub(crate) fn as_usize(v: &Value, path: &str) -> Result<usize, CodecError> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| err(path, "expected a nonnegative integer"))
}

pub(crate) fn rationals(v: &Value, path: &str) -> Result<Vec<Rational>, CodecError> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| rational_from_json(x).map_err(|e| err(format!("{path}[{i}]"), e.to_string())))
        .collect()
}

pub(crate) fn usizes(v: &Value, path: &str) -> Result<Vec<usize>, CodecError> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| as_usize(x, &format!("{path}[{i}]")))
        .collect()
}

pub fn measure_to_json(q: &Measure) -> Value {
    json!({ "weights": vec_to_json(q.weights()), "support": q.support() })
}

/// Accepts `{weights: [...]}` or a bare weight array.
pub fn measure_from_json(v: &Value) -> Result<Measure, CodecError> {
    let w = match v {
        Value::Array(_) => rationals(v, "measure")?,
        _ => rationals(get(v, "weights", "measure")?, "measure.weights")?,
    };
    Measure::new(w).map_err(|e| err("measure", e.to_string()))
}

pub fn vertex_set_to_json(vs: &VertexSet) -> Value {
    Value::Array(vs.vertices.iter().map(measure_to_json).collect())
}

pub fn vertices_from_json(v: &Value) -> Result<Vec<Measure>, CodecError> {
    as_array(v, "vertices")?.iter().map(measure_from_json).collect()
}

/// Only nonzero dynamic entries are written.
pub fn strategy_to_json(s: &SemiStaticStrategy) -> Value {
    let dynamic: Vec<Value> = s
        .dynamic
        .entries()
        .filter(|(_, _, _, v)| !num_traits::Zero::is_zero(*v))
        .map(|(k, cell, asset, v)| json!({ "k": k, "cell": cell, "asset": asset, "value": rational_to_json(v) }))
        .collect();
    json!({
        "cash": rational_to_json(&s.cash),
        "static": vec_to_json(&s.statics),
        "dynamic": dynamic,
    })
}

pub fn strategy_from_json(v: &Value, model: &FilteredModel) -> Result<SemiStaticStrategy, CodecError> {
    let cash = rational_from_json(get(v, "cash", "strategy")?).map_err(|e| err("strategy.cash", e.to_string()))?;
    let statics = rationals(get(v, "static", "strategy")?, "strategy.static")?;
    if statics.len() != model.claims().len() {
        return Err(err("strategy.static", format!("expected {} entries", model.claims().len())));
    }
    let mut dynamic = DynamicPosition::zeros(model);
    for (i, e) in as_array(get(v, "dynamic", "strategy")?, "strategy.dynamic")?.iter().enumerate() {
        let path = format!("strategy.dynamic[{i}]");
        let k = as_usize(get(e, "k", &path)?, &path)?;
        let cell = as_usize(get(e, "cell", &path)?, &path)?;
        let asset = as_usize(get(e, "asset", &path)?, &path)?;
        let value = rational_from_json(get(e, "value", &path)?).map_err(|x| err(&path, x.to_string()))?;
        let in_range = (1..=model.steps()).contains(&k)
            && cell < model.filtration().partition(k - 1).len()
            && asset < model.assets();
        if !in_range {
            return Err(err(path, "index out of range"));
        }
        dynamic.set(k, cell, asset, value);
    }
    Ok(SemiStaticStrategy { cash, statics, dynamic })
}

pub fn tree_to_json(t: &AtomicTree) -> Value {
    let nodes: Vec<Value> = t
        .nodes()
        .iter()
        .map(|n| {
            let mut m = Map::new();
            m.insert("cell".into(), json!(n.cell));
            m.insert("birth".into(), json!(n.birth));
            m.insert("parent".into(), n.parent.map_or(Value::Null, |p| json!(p)));
            Value::Object(m)
        })
        .collect();
    json!({ "nodes": nodes })
}

pub fn tree_from_json(v: &Value) -> Result<AtomicTree, CodecError> {
    let nodes = as_array(get(v, "nodes", "tree")?, "tree.nodes")?;
    let mut out = Vec::with_capacity(nodes.len());
    for (i, n) in nodes.iter().enumerate() {
        let path = format!("tree.nodes[{i}]");
        let cell = usizes(get(n, "cell", &path)?, &format!("{path}.cell"))?;
        let birth = as_usize(get(n, "birth", &path)?, &format!("{path}.birth"))?;
        let parent = match n.get("parent") {
            None | Some(Value::Null) => None,
            Some(p) => {
                let p = as_usize(p, &format!("{path}.parent"))?;
                if p >= nodes.len() {
                    return Err(err(format!("{path}.parent"), "no such node"));
                }
                Some(p)
            }
        };
        out.push(TreeNode { cell, birth, parent });
    }
    Ok(AtomicTree::new(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FiltrationSpec, ModelParts};
    use crate::rational::{int, ints, ratio};

    fn model() -> FilteredModel {
        FilteredModel::new(ModelParts {
            outcomes: vec!["u".into(), "m".into(), "d".into()],
            times: ints(&[0, 1]),
            filtration: FiltrationSpec::Natural,
            prices: vec![vec![ints(&[0, 0, 0]), ints(&[1, 0, -1])]],
            claims: vec![vec![ratio(1, 2), ratio(-1, 2), ratio(1, 2)]],
            prior_support: None,
        })
        .unwrap()
    }

    #[test]
    fn measure_round_trip() {
        let q = Measure::new(vec![ratio(1, 4), ratio(1, 2), ratio(1, 4)]).unwrap();
        let v = measure_to_json(&q);
        assert_eq!(v["weights"], json!(["1/4", "1/2", "1/4"]));
        assert_eq!(measure_from_json(&v).unwrap(), q);
    }

    #[test]
    fn strategy_round_trip() {
        let m = model();
        let mut d = DynamicPosition::zeros(&m);
        d.set(1, 0, 0, ratio(-3, 7));
        let s = SemiStaticStrategy {
            cash: ratio(1, 2),
            statics: vec![int(-1)],
            dynamic: d,
        };
        let v = strategy_to_json(&s);
        assert_eq!(strategy_from_json(&v, &m).unwrap(), s);
    }

    #[test]
    fn tree_round_trip() {
        let t = AtomicTree::new(vec![
            TreeNode {
                cell: vec![0, 1, 2],
                birth: 0,
                parent: None,
            },
            TreeNode {
                cell: vec![0],
                birth: 1,
                parent: Some(0),
            },
        ]);
        assert_eq!(tree_from_json(&tree_to_json(&t)).unwrap(), t);
    }

    #[test]
    fn floats_are_rejected() {
        assert!(measure_from_json(&json!([0.5, 0.5])).is_err());
    }
}
