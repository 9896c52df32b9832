//! One function per subcommand. Each returns a [`Report`] carrying both the
//! JSON result and a short text rendering.

use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};
use semistatic::codec::{measure_to_json, strategy_to_json, tree_to_json, vertex_set_to_json};
use semistatic::duality::{arbitrage_certificate, superhedge, verify_duality, DualityError, RobustPrice, SuperhedgeResult};
use semistatic::enlargement::{enlarge, informed_compare, jeulin_yor, traces_coincide, InformedReport};
use semistatic::hedging::{is_semistatically_complete, replicate, Replication, SemiStaticStrategy};
use semistatic::model::{FilteredModel, Measure};
use semistatic::polytope::{build_constraints, enumerate_extreme_points, is_extreme, Certificate, VertexSet};
use semistatic::rational::{canonical, rational_to_json, vec_to_json, Rational, Tuple};
use semistatic::scenario::{parse_inline_vector, Scenario};
use semistatic::tree::{extract_tree, sigma_tree_expectation, TreeOutcome};
use semistatic::verify::{self, SuiteReport};
use serde_json::{json, Value};

pub struct Report {
    pub command: &'static str,
    pub scenario: Option<String>,
    pub passed: bool,
    pub result: Value,
    pub text: String,
}

impl Report {
    fn new(command: &'static str, s: Option<&Scenario>, passed: bool, result: Value, text: String) -> Self {
        Self {
            command,
            scenario: s.map(|s| s.name.clone()),
            passed,
            result,
            text,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "scenario": self.scenario,
            "passed": self.passed,
            "result": self.result,
        })
    }
}

fn cell_label(model: &FilteredModel, cell: &[usize]) -> String {
    let names: Vec<&str> = cell.iter().map(|&a| model.atom_labels()[a].as_str()).collect();
    format!("{{{}}}", names.join(","))
}

fn certificate_json(c: &Certificate) -> Value {
    match c {
        Certificate::Independent { support, rank } => json!({ "independent": { "support": support, "rank": rank } }),
        Certificate::Direction(d) => json!({ "direction": vec_to_json(d) }),
    }
}

fn price_json(p: &RobustPrice, vs: &VertexSet) -> Value {
    match p {
        RobustPrice::Value { value, argmax } => json!({
            "value": rational_to_json(value),
            "argmax": argmax.iter().map(|&i| measure_to_json(&vs.vertices[i])).collect::<Vec<_>>(),
        }),
        RobustPrice::Empty => json!({ "value": null, "empty": true }),
    }
}

fn price_text(p: &RobustPrice) -> String {
    match p {
        RobustPrice::Value { value, .. } => canonical(value),
        RobustPrice::Empty => "-inf (no calibrated measure)".into(),
    }
}

fn strategy_text(s: &SemiStaticStrategy) -> String {
    let mut out = format!("cash {}, static {}", canonical(&s.cash), Tuple(&s.statics));
    let dynamic: Vec<String> = s
        .dynamic
        .entries()
        .filter(|(_, _, _, v)| !num_traits::Zero::is_zero(*v))
        .map(|(k, c, j, v)| format!("H[k={k},cell={c},asset={j}]={}", canonical(v)))
        .collect();
    if !dynamic.is_empty() {
        let _ = write!(out, ", dynamic {}", dynamic.join(" "));
    }
    out
}

/// A vertex index, a named measure, or inline weights.
fn measure_arg(s: &Scenario, spec: &str) -> Result<(String, Measure)> {
    if let Ok(i) = spec.parse::<usize>() {
        let vs = enumerate_extreme_points(&build_constraints(&s.model));
        let q = vs
            .vertices
            .get(i)
            .cloned()
            .ok_or_else(|| anyhow!("vertex index {i} out of range ({} vertices)", vs.len()))?;
        return Ok((format!("vertex {i}"), q));
    }
    Ok(s.measure(spec)?)
}

pub fn validate(s: &Scenario) -> Report {
    let m = &s.model;
    let partitions: Vec<Vec<String>> = m
        .filtration()
        .partitions()
        .iter()
        .map(|p| p.cells().iter().map(|c| cell_label(m, c)).collect())
        .collect();
    let allowed: Vec<&str> = (0..m.n_atoms())
        .filter(|&a| m.priors().is_allowed(a))
        .map(|a| m.atom_labels()[a].as_str())
        .collect();
    let result = json!({
        "valid": true,
        "outcomes": m.n_outcomes(),
        "atoms": m.atom_labels(),
        "steps": m.steps(),
        "assets": m.assets(),
        "claims": s.claim_names,
        "filtration": partitions,
        "prior_support": allowed,
        "jumps": s.jumps.len(),
    });
    let mut text = format!(
        "{}: valid; {} outcomes, {} atoms, {} steps, {} assets, {} claims\n",
        s.name,
        m.n_outcomes(),
        m.n_atoms(),
        m.steps(),
        m.assets(),
        s.claim_names.len()
    );
    for (k, p) in partitions.iter().enumerate() {
        let _ = writeln!(text, "  F_{k}: {}", p.join(" "));
    }
    Report::new("validate", Some(s), true, result, text)
}

pub fn extremes(s: &Scenario) -> Report {
    let vs = enumerate_extreme_points(&build_constraints(&s.model));
    let certificate = if vs.is_empty() { arbitrage_certificate(&s.model) } else { None };
    let result = json!({
        "count": vs.len(),
        "vertices": vertex_set_to_json(&vs),
        "certificates": vs.certificates.iter().map(certificate_json).collect::<Vec<_>>(),
        "arbitrage": certificate.as_ref().map(strategy_to_json),
    });
    let mut text = format!("{} vertices over atoms {}\n", vs.len(), s.model.atom_labels().join(" "));
    for q in &vs.vertices {
        let _ = writeln!(text, "  {}", Tuple(q.weights()));
    }
    if let Some(c) = &certificate {
        let _ = writeln!(text, "arbitrage: {}", strategy_text(c));
    }
    Report::new("extremes", Some(s), true, result, text)
}

/// Passes when extremality and completeness agree for the measure.
pub fn complete(s: &Scenario, measure: &str) -> Result<Report> {
    let (name, q) = measure_arg(s, measure)?;
    let cs = build_constraints(&s.model);
    let (extreme, cert) = is_extreme(&q, &cs)?;
    let c = is_semistatically_complete(&q, &s.model)?;
    let result = json!({
        "measure": name,
        "weights": measure_to_json(&q),
        "complete": c.complete,
        "rank": c.rank,
        "support_size": c.support.len(),
        "extreme": extreme,
        "certificate": certificate_json(&cert),
    });
    let text = format!(
        "{name} {}: complete={} (rank {} on {} charged atoms), extreme={}\n",
        Tuple(q.weights()),
        c.complete,
        c.rank,
        c.support.len(),
        extreme
    );
    Ok(Report::new("complete", Some(s), extreme == c.complete, result, text))
}

pub fn replicate_cmd(s: &Scenario, payoff: &str, measure: &str) -> Result<Report> {
    let (pname, x) = s.payoff_atoms(payoff)?;
    let (mname, q) = measure_arg(s, measure)?;
    let r = replicate(&x, &q, &s.model)?;
    let (passed, result, text) = match &r {
        Replication::Replicated(st) => (
            true,
            json!({ "replicable": true, "strategy": strategy_to_json(st) }),
            format!("{pname} under {mname}: replicated by {}\n", strategy_text(st)),
        ),
        Replication::NotReplicable { residual } => (
            false,
            json!({ "replicable": false, "residual": vec_to_json(residual) }),
            format!("{pname} under {mname}: not replicable, residual {}\n", Tuple(residual)),
        ),
    };
    Ok(Report::new("replicate", Some(s), passed, result, text))
}

pub fn price(s: &Scenario, payoff: &str) -> Result<Report> {
    let (pname, x) = s.payoff_atoms(payoff)?;
    let vs = enumerate_extreme_points(&build_constraints(&s.model));
    let p = semistatic::duality::robust_price_over(&x, &vs);
    let result = json!({ "payoff": pname, "price": price_json(&p, &vs) });
    let text = format!("robust price of {pname}: {}\n", price_text(&p));
    Ok(Report::new("price", Some(s), !vs.is_empty(), result, text))
}

pub fn superhedge_cmd(s: &Scenario, payoff: &str) -> Result<Report> {
    let (pname, x) = s.payoff_atoms(payoff)?;
    Ok(match superhedge(&x, &s.model) {
        SuperhedgeResult::Optimal { price, strategy, tight } => {
            let result = json!({
                "payoff": pname,
                "price": rational_to_json(&price),
                "strategy": strategy_to_json(&strategy),
                "tight": tight,
            });
            let text = format!(
                "superhedging price of {pname}: {}\n  {}\n  tight on {}\n",
                canonical(&price),
                strategy_text(&strategy),
                cell_label(&s.model, &tight)
            );
            Report::new("superhedge", Some(s), true, result, text)
        }
        SuperhedgeResult::Unbounded => Report::new(
            "superhedge",
            Some(s),
            false,
            json!({ "payoff": pname, "price": null, "unbounded": true }),
            format!("superhedging price of {pname}: unbounded below (no calibrated measure)\n"),
        ),
    })
}

pub fn duality(s: &Scenario, payoff: &str) -> Result<Report> {
    let (pname, x) = s.payoff_atoms(payoff)?;
    Ok(match verify_duality(&x, &s.model) {
        Ok(r) => {
            let result = json!({
                "payoff": pname,
                "primal": rational_to_json(&r.primal),
                "dual": rational_to_json(&r.dual),
                "gap": rational_to_json(&r.gap),
                "strategy": strategy_to_json(&r.strategy),
                "tight": r.tight,
                "argmax": r.argmax.iter().map(measure_to_json).collect::<Vec<_>>(),
                "dominates": r.dominates,
                "slackness": r.slackness,
            });
            let text = format!(
                "{pname}: primal {} dual {} gap {}; dominates={} slackness={}\n",
                canonical(&r.primal),
                canonical(&r.dual),
                canonical(&r.gap),
                r.dominates,
                r.slackness
            );
            Report::new("duality", Some(s), r.holds(), result, text)
        }
        Err(DualityError::EmptyMeasureSet(cert)) => Report::new(
            "duality",
            Some(s),
            false,
            json!({ "payoff": pname, "empty": true, "arbitrage": strategy_to_json(&cert) }),
            format!("{pname}: no calibrated measure; arbitrage {}\n", strategy_text(&cert)),
        ),
    })
}

pub fn tree(s: &Scenario, measure: &str) -> Result<Report> {
    let (mname, q) = measure_arg(s, measure)?;
    let m = &s.model;
    Ok(match extract_tree(&q, m)? {
        TreeOutcome::Tree(ex) => {
            let expectations: Vec<Value> = s
                .claim_names
                .iter()
                .zip(m.claims())
                .map(|(n, c)| {
                    let e = sigma_tree_expectation(&c.payoff, &ex.tree, &q);
                    let leafwise: Vec<Value> = ex
                        .tree
                        .leaf_cells()
                        .iter()
                        .map(|cell| rational_to_json(&e[cell[0]]))
                        .collect();
                    json!({ "claim": n, "per_atom": vec_to_json(&e), "per_leaf": leafwise })
                })
                .collect();
            let c = &ex.conditions;
            let result = json!({
                "measure": mname,
                "tree": tree_to_json(&ex.tree),
                "dim": ex.tree.dim(),
                "leaves": ex.tree.leaf_cells(),
                "expectations": expectations,
                "conditions": {
                    "passed": c.passed(),
                    "leaf_completeness": c.leaf_completeness(),
                    "claim_rank": c.claim_rank,
                    "constant_before_zeta": c.constant_before_zeta(),
                },
            });
            let mut text = ex.tree.render(|cell| cell_label(m, cell));
            if !text.ends_with('\n') {
                text.push('\n');
            }
            let _ = writeln!(text, "dim {}, conditions {}", ex.tree.dim(), if c.passed() { "hold" } else { "fail" });
            for e in &expectations {
                let per_leaf: Vec<&str> = e["per_leaf"].as_array().into_iter().flatten().filter_map(Value::as_str).collect();
                let _ = writeln!(text, "E[{} | tree] per leaf: ({})", e["claim"].as_str().unwrap_or("?"), per_leaf.join(", "));
            }
            Report::new("tree", Some(s), c.passed(), result, text)
        }
        TreeOutcome::NoTree(why) => Report::new(
            "tree",
            Some(s),
            false,
            json!({ "measure": mname, "tree": null, "reason": why }),
            format!("no atomic tree under {mname}: {why}\n"),
        ),
    })
}

pub fn enlarge_cmd(s: &Scenario, measure: Option<&str>) -> Result<Report> {
    if s.jumps.is_empty() {
        bail!("scenario {} declares no jumps", s.name);
    }
    let em = enlarge(&s.model, s.jumps.clone())?;
    let g = em.g_model();
    let q = match measure {
        Some(spec) => Measure::new(parse_inline_vector(spec)?).context("measure over the enlarged atoms")?,
        None => Measure::uniform(g.n_atoms()),
    };
    if q.len() != g.n_atoms() {
        bail!("measure has {} weights, the enlarged model has {} atoms", q.len(), g.n_atoms());
    }
    let partitions: Vec<Vec<String>> = em
        .g()
        .partitions()
        .iter()
        .map(|p| p.cells().iter().map(|c| cell_label(g, c)).collect())
        .collect();
    let mut passed = true;
    let mut jumps = Vec::new();
    let mut text = format!("enlarged filtration over atoms {}\n", g.atom_labels().join(" "));
    for (k, p) in partitions.iter().enumerate() {
        let _ = writeln!(text, "  G_{k}: {}", p.join(" "));
    }
    for i in 0..em.jumps().len() {
        let jy = jeulin_yor(&em, &q, i)?;
        let traces = traces_coincide(&em, i)?;
        passed &= jy.holds() && traces;
        let rows = |m: &Vec<Vec<Rational>>| m.iter().map(|r| vec_to_json(r)).collect::<Vec<_>>();
        jumps.push(json!({
            "azema": rows(&jy.z),
            "compensator_increments": rows(&jy.da),
            "martingale": rows(&jy.m),
            "violations": jy.violations,
            "predictable": jy.predictable,
            "compensated": jy.compensated,
            "supermartingale": jy.supermartingale,
            "traces_coincide": traces,
        }));
        let _ = writeln!(
            text,
            "jump {i}: martingale={} predictable={} compensated={} supermartingale={} traces={}",
            jy.violations.is_empty(),
            jy.predictable,
            jy.compensated,
            jy.supermartingale,
            traces
        );
    }
    let result = json!({
        "atoms": g.atom_labels(),
        "filtration": partitions,
        "measure": measure_to_json(&q),
        "jumps": jumps,
    });
    Ok(Report::new("enlarge", Some(s), passed, result, text))
}

fn informed_json(r: &InformedReport) -> Value {
    json!({
        "ext_f": vertex_set_to_json(&r.ext_f),
        "ext_g": vertex_set_to_json(&r.ext_g),
        "coinciding_lifts": r.lifts.iter().map(|l| l.iter().map(measure_to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "corollary": r.corollary,
        "informed_arbitrage": r.informed_arbitrage(),
        "arbitrage": r.arbitrage.as_ref().map(strategy_to_json),
        "prices": r.prices.iter().map(|p| json!({
            "payoff": p.name,
            "uninformed": p.f.as_ref().map(|f| price_json(f, &r.ext_f)),
            "informed": price_json(&p.g, &r.ext_g),
            "dominated": p.dominated(),
        })).collect::<Vec<_>>(),
    })
}

pub fn informed_compare_cmd(s: &Scenario, payoffs: &[String]) -> Result<Report> {
    if s.jumps.is_empty() {
        bail!("scenario {} declares no jumps", s.name);
    }
    let named: Vec<(String, Vec<Rational>)> = if payoffs.is_empty() {
        s.payoffs.clone()
    } else {
        payoffs.iter().map(|p| s.payoff_outcomes(p)).collect::<Result<_, _>>()?
    };
    for (n, v) in &named {
        if v.len() != s.model.n_outcomes() {
            bail!("payoff {n} must be given per outcome ({} entries)", s.model.n_outcomes());
        }
    }
    let em = enlarge(&s.model, s.jumps.clone())?;
    let r = informed_compare(&em, &named)?;
    let mut text = format!(
        "ext M(F): {} vertices; ext M(G): {} vertices\n",
        r.ext_f.len(),
        r.ext_g.len()
    );
    if let Some(c) = r.corollary {
        let _ = writeln!(text, "vertex sets match coinciding lifts: {c}");
    }
    if let Some(a) = &r.arbitrage {
        let _ = writeln!(text, "informed arbitrage: {}", strategy_text(a));
    }
    for p in &r.prices {
        let f = p.f.as_ref().map_or("n/a".to_string(), price_text);
        let _ = writeln!(text, "{}: uninformed {} informed {}", p.name, f, price_text(&p.g));
    }
    Ok(Report::new("informed-compare", Some(s), r.passed(), informed_json(&r), text))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    JacodYor,
    Duality,
    JeulinYor,
    Corollary54,
    Multinomial,
    All,
}

pub struct VerifyArgs {
    pub suite: Suite,
    pub seed: u64,
    pub cases: Option<usize>,
    pub pmax: u32,
    pub mmax: u32,
}

fn suite_text(r: &SuiteReport) -> String {
    let mut t = format!(
        "{} seed={} cases={} checks={} {}\n",
        r.suite,
        r.seed,
        r.cases,
        r.checks,
        if r.passed() { "PASS" } else { "FAIL" }
    );
    for f in &r.failures {
        let _ = writeln!(t, "  {f}");
    }
    t
}

pub fn verify_cmd(a: &VerifyArgs) -> Report {
    let n = |default: usize| a.cases.unwrap_or(default);
    let mut reports: Vec<SuiteReport> = Vec::new();
    let mut bounds = None;
    let all = a.suite == Suite::All;
    if all || a.suite == Suite::JacodYor {
        reports.push(verify::jacod_yor_suite(a.seed, n(verify::JACOD_YOR_CASES)));
    }
    if all || a.suite == Suite::Duality {
        reports.push(verify::duality_suite(a.seed, n(verify::DUALITY_CASES), verify::DUALITY_PAYOFFS));
    }
    if all || a.suite == Suite::JeulinYor {
        reports.push(verify::jeulin_yor_suite(a.seed, n(verify::JEULIN_YOR_CASES)));
    }
    if all || a.suite == Suite::Corollary54 {
        reports.push(verify::corollary54_suite(a.seed, n(verify::COROLLARY_CASES)));
    }
    if all || a.suite == Suite::Multinomial {
        let (r, b) = verify::multinomial_suite(a.pmax, a.mmax);
        reports.push(r);
        bounds = Some(b);
    }
    let passed = reports.iter().all(SuiteReport::passed);
    let mut result = json!({ "suites": reports.iter().map(SuiteReport::to_json).collect::<Vec<_>>() });
    let mut text: String = reports.iter().map(suite_text).collect();
    if let Some(b) = bounds {
        result["multinomial"] = Value::Array(
            b.iter()
                .map(|r| json!({ "p": r.p, "m": r.m, "lhs": r.lhs.to_string(), "rhs": r.rhs.to_string(), "holds": r.holds }))
                .collect(),
        );
        if a.suite == Suite::Multinomial {
            for r in &b {
                let _ = writeln!(text, "  p={} m={}: {} <= {} {}", r.p, r.m, r.lhs, r.rhs, r.holds);
            }
        }
    }
    Report::new("verify", None, passed, result, text)
}
