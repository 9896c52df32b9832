//! Scenario files: a model plus optional jumps, named payoffs and named measures.
//!
//! ```json
//! {
//!   "name": "trinomial",
//!   "outcomes": ["u", "m", "d"],
//!   "times": [0, 1],
//!   "filtration": "natural",
//!   "prices": [[[0, 0, 0], [1, 0, -1]]],
//!   "claims": [{"name": "psi", "payoff": ["1/2", "-1/2", "1/2"]}],
//!   "payoffs": {"abs_S1": [1, 0, 1]}
//! }
//! ```
//!
//! Payoffs, claims and jumps are given per outcome; measures per atom (cell of
//! the terminal partition). Explicit filtrations list cells as outcome labels.

use serde_json::Value;

use crate::codec::{as_array, err, get, rationals, CodecError};
use crate::enlargement::SingleJump;
use crate::model::{validate_model, FilteredModel, FiltrationSpec, Measure, ModelParts, ValidationReport};
use crate::rational::{parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("JSON syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error(transparent)]
    Field(#[from] CodecError),
    #[error("invalid model:\n{0}")]
    Invalid(ValidationReport),
    #[error("{0}")]
    Other(String),
}

/// A parsed but not yet validated scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioSpec {
    pub name: String,
    pub description: String,
    pub parts: ModelParts,
    pub claim_names: Vec<String>,
    /// `(tau, mark)` per outcome.
    pub jumps: Vec<(Vec<Option<usize>>, Vec<Rational>)>,
    pub payoffs: Vec<(String, Vec<Rational>)>,
    pub measures: Vec<(String, Vec<Rational>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub model: FilteredModel,
    pub claim_names: Vec<String>,
    pub jumps: Vec<SingleJump>,
    /// Per outcome.
    pub payoffs: Vec<(String, Vec<Rational>)>,
    /// Per atom.
    pub measures: Vec<(String, Vec<Rational>)>,
}

fn label_index(labels: &[String], v: &Value, path: &str) -> Result<usize, CodecError> {
    match v {
        Value::String(s) => labels
            .iter()
            .position(|l| l == s)
            .ok_or_else(|| err(path, format!("unknown outcome `{s}`"))),
        Value::Number(n) => n
            .as_u64()
            .map(|i| i as usize)
            .filter(|&i| i < labels.len())
            .ok_or_else(|| err(path, "outcome index out of range")),
        _ => Err(err(path, "expected an outcome label or index")),
    }
}

fn named_vectors(v: Option<&Value>, path: &str) -> Result<Vec<(String, Vec<Rational>)>, CodecError> {
    let Some(v) = v else { return Ok(Vec::new()) };
    let obj = v.as_object().ok_or_else(|| err(path, "expected an object of named vectors"))?;
    // serde_json's map is ordered by key, which keeps reports deterministic.
    obj.iter()
        .map(|(k, x)| Ok((k.clone(), rationals(x, &format!("{path}.{k}"))?)))
        .collect()
}

pub fn parse_scenario(text: &str) -> Result<ScenarioSpec, ScenarioError> {
    let root: Value = serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let name = root.get("name").and_then(Value::as_str).unwrap_or("unnamed").to_string();
    let description = root
        .get("description")
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_string();
    let outcomes: Vec<String> = as_array(get(&root, "outcomes", "$")?, "outcomes")?
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| err(format!("outcomes[{i}]"), "expected a string label"))
        })
        .collect::<Result<_, _>>()?;
    let times = rationals(get(&root, "times", "$")?, "times")?;

    let filtration = match get(&root, "filtration", "$")? {
        Value::String(s) if s == "natural" => FiltrationSpec::Natural,
        Value::String(s) => return Err(err("filtration", format!("unknown filtration `{s}`")).into()),
        v => {
            let mut ps = Vec::new();
            for (k, p) in as_array(v, "filtration")?.iter().enumerate() {
                let mut cells = Vec::new();
                for (c, cell) in as_array(p, &format!("filtration[{k}]"))?.iter().enumerate() {
                    let path = format!("filtration[{k}][{c}]");
                    cells.push(
                        as_array(cell, &path)?
                            .iter()
                            .map(|x| label_index(&outcomes, x, &path))
                            .collect::<Result<Vec<_>, _>>()?,
                    );
                }
                ps.push(cells);
            }
            FiltrationSpec::Explicit(ps)
        }
    };

    let mut prices = Vec::new();
    for (j, asset) in as_array(get(&root, "prices", "$")?, "prices")?.iter().enumerate() {
        let mut rows = Vec::new();
        for (k, row) in as_array(asset, &format!("prices[{j}]"))?.iter().enumerate() {
            rows.push(rationals(row, &format!("prices[{j}][{k}]"))?);
        }
        prices.push(rows);
    }

    let mut claims = Vec::new();
    let mut claim_names = Vec::new();
    if let Some(cs) = root.get("claims") {
        for (i, c) in as_array(cs, "claims")?.iter().enumerate() {
            let path = format!("claims[{i}]");
            match c {
                Value::Array(_) => {
                    claim_names.push(format!("psi{}", i + 1));
                    claims.push(rationals(c, &path)?);
                }
                _ => {
                    let n = c.get("name").and_then(Value::as_str).map_or(format!("psi{}", i + 1), str::to_string);
                    claim_names.push(n);
                    claims.push(rationals(get(c, "payoff", &path)?, &format!("{path}.payoff"))?);
                }
            }
        }
    }

    let prior_support = match root.get("prior_support") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            as_array(v, "prior_support")?
                .iter()
                .enumerate()
                .map(|(i, x)| label_index(&outcomes, x, &format!("prior_support[{i}]")))
                .collect::<Result<Vec<_>, _>>()?,
        ),
    };

    let mut jumps = Vec::new();
    if let Some(js) = root.get("jumps") {
        for (i, j) in as_array(js, "jumps")?.iter().enumerate() {
            let path = format!("jumps[{i}]");
            let tau = as_array(get(j, "tau", &path)?, &format!("{path}.tau"))?
                .iter()
                .enumerate()
                .map(|(o, t)| match t {
                    Value::String(s) if s == "inf" => Ok(None),
                    Value::Number(n) if n.as_u64().is_some() => Ok(n.as_u64().map(|x| x as usize)),
                    _ => Err(err(format!("{path}.tau[{o}]"), "expected a time index or \"inf\"")),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mark = rationals(get(j, "mark", &path)?, &format!("{path}.mark"))?;
            jumps.push((tau, mark));
        }
    }

    Ok(ScenarioSpec {
        name,
        description,
        parts: ModelParts {
            outcomes,
            times,
            filtration,
            prices,
            claims,
            prior_support,
        },
        claim_names,
        jumps,
        payoffs: named_vectors(root.get("payoffs"), "payoffs")?,
        measures: named_vectors(root.get("measures"), "measures")?,
    })
}

impl ScenarioSpec {
    pub fn validate(&self) -> ValidationReport {
        validate_model(&self.parts)
    }

    pub fn build(self) -> Result<Scenario, ScenarioError> {
        let report = self.validate();
        if !report.is_valid() {
            return Err(ScenarioError::Invalid(report));
        }
        let model = FilteredModel::new(self.parts).map_err(|e| ScenarioError::Other(e.to_string()))?;
        let jumps = self
            .jumps
            .into_iter()
            .enumerate()
            .map(|(i, (tau, mark))| {
                SingleJump::new(tau, mark, model.n_outcomes(), model.steps())
                    .map_err(|e| err(format!("jumps[{i}]"), e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (name, v) in &self.payoffs {
            if v.len() != model.n_outcomes() {
                return Err(err(format!("payoffs.{name}"), format!("expected {} entries", model.n_outcomes())).into());
            }
        }
        for (name, v) in &self.measures {
            if v.len() != model.n_atoms() {
                return Err(err(format!("measures.{name}"), format!("expected {} entries", model.n_atoms())).into());
            }
        }
        Ok(Scenario {
            name: self.name,
            description: self.description,
            model,
            claim_names: self.claim_names,
            jumps,
            payoffs: self.payoffs,
            measures: self.measures,
        })
    }
}

pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    parse_scenario(text)?.build()
}

/// Comma-separated rationals, e.g. `1/4,1/2,1/4`.
pub fn parse_inline_vector(s: &str) -> Result<Vec<Rational>, ScenarioError> {
    s.trim_matches(|c| c == '[' || c == ']' || c == '(' || c == ')')
        .split(',')
        .map(|x| parse_rational(x.trim()).map_err(|e| ScenarioError::Other(e.to_string())))
        .collect()
}

impl Scenario {
    /// Payoff per outcome: a named payoff, a claim name, or an inline vector.
    pub fn payoff_outcomes(&self, spec: &str) -> Result<(String, Vec<Rational>), ScenarioError> {
        if let Some((n, v)) = self.payoffs.iter().find(|(n, _)| n == spec) {
            return Ok((n.clone(), v.clone()));
        }
        if let Some(i) = self.claim_names.iter().position(|n| n == spec) {
            return Ok((spec.to_string(), self.model.raw().claims[i].clone()));
        }
        let v = parse_inline_vector(spec).map_err(|_| {
            let known: Vec<&str> = self
                .payoffs
                .iter()
                .map(|(n, _)| n.as_str())
                .chain(self.claim_names.iter().map(String::as_str))
                .collect();
            ScenarioError::Other(format!("unknown payoff `{spec}` (known: {})", known.join(", ")))
        })?;
        if v.len() != self.model.n_outcomes() && v.len() != self.model.n_atoms() {
            return Err(ScenarioError::Other(format!(
                "inline payoff has {} entries, expected {}",
                v.len(),
                self.model.n_outcomes()
            )));
        }
        Ok((spec.to_string(), v))
    }

    /// Payoff per atom of the model.
    pub fn payoff_atoms(&self, spec: &str) -> Result<(String, Vec<Rational>), ScenarioError> {
        let (name, v) = self.payoff_outcomes(spec)?;
        if v.len() == self.model.n_outcomes() {
            let atoms = self
                .model
                .outcome_vector_to_atoms(&name, &v)
                .map_err(|e| ScenarioError::Other(e.to_string()))?;
            Ok((name, atoms))
        } else {
            Ok((name, v))
        }
    }

    /// Named measure or inline weights (per atom).
    pub fn measure(&self, spec: &str) -> Result<(String, Measure), ScenarioError> {
        let (name, w) = match self.measures.iter().find(|(n, _)| n == spec) {
            Some((n, w)) => (n.clone(), w.clone()),
            None => (spec.to_string(), parse_inline_vector(spec)?),
        };
        let q = Measure::new(w).map_err(|e| ScenarioError::Other(format!("measure `{name}`: {e}")))?;
        self.model
            .check_measure(&q)
            .map_err(|e| ScenarioError::Other(format!("measure `{name}`: {e}")))?;
        Ok((name, q))
    }
}
