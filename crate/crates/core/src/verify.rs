//! Seeded property suites over random models.
//!
//! Cases are drawn sequentially from one ChaCha stream and evaluated in
//! parallel; results are collected in case order, so reports do not depend on
//! the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::bounds::{verify_multinomial_inequality, BoundReport};
use crate::duality::{robust_price_over, verify_duality_with};
use crate::enlargement::{enlarge, informed_compare, jeulin_yor, traces_coincide};
use crate::hedging::{equivalence_check, CheckKind};
use crate::model::{FilteredModel, Measure};
use crate::polytope::{build_constraints, enumerate_extreme_points};
use crate::random::{random_jump_set, random_measure, random_model, random_payoff, ModelConfig, RandomModel};
use crate::rational::{canonical, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub cases: usize,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "seed": self.seed,
            "cases": self.cases,
            "checks": self.checks,
            "passed": self.passed(),
            "failures": self.failures,
        })
    }
}

/// Outcome of one case: checks run and failure messages.
type CaseResult = (usize, Vec<String>);

fn collect(suite: &str, seed: u64, results: Vec<CaseResult>) -> SuiteReport {
    let cases = results.len();
    let checks = results.iter().map(|r| r.0).sum();
    let failures = results
        .into_iter()
        .enumerate()
        .flat_map(|(i, (_, f))| f.into_iter().map(move |m| format!("case {i}: {m}")))
        .collect();
    SuiteReport {
        suite: suite.to_string(),
        seed,
        cases,
        checks,
        failures,
    }
}

/// Random convex combination of a few vertices.
fn sample_combination<R: Rng>(rng: &mut R, vertices: &[Measure]) -> Measure {
    let k = rng.gen_range(1..=vertices.len().min(3));
    let parts: Vec<(i64, usize)> = (0..k)
        .map(|_| (rng.gen_range(1..=5), rng.gen_range(0..vertices.len())))
        .collect();
    let total: i64 = parts.iter().map(|p| p.0).sum();
    let weighted: Vec<(Rational, &Measure)> = parts
        .iter()
        .map(|&(w, i)| (Rational::new(w.into(), total.into()), &vertices[i]))
        .collect();
    Measure::mixture(&weighted).expect("convex combination")
}

struct ModelCase {
    model: RandomModel,
    seed: u64,
}

fn draw_models(seed: u64, count: usize, cfg: &ModelConfig) -> Vec<ModelCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| ModelCase {
            model: random_model(&mut rng, cfg),
            seed: rng.gen(),
        })
        .collect()
}

/// Extremality and completeness agree at every vertex, midpoint and sampled combination.
pub fn jacod_yor_suite(seed: u64, count: usize) -> SuiteReport {
    let cases = draw_models(seed, count, &ModelConfig::default());
    let results = cases
        .par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
            let model = FilteredModel::new(c.model.parts.clone()).expect("generated model is valid");
            let cs = build_constraints(&model);
            let vs = enumerate_extreme_points(&cs);
            if vs.is_empty() {
                return (1, vec!["calibrated measure set is empty".to_string()]);
            }
            let mut checks = Vec::new();
            for (i, v) in vs.vertices.iter().enumerate() {
                checks.push(equivalence_check(CheckKind::Vertex(i), v.clone(), &cs, &model));
            }
            let half = Rational::new(1.into(), 2.into());
            for i in 0..vs.len().min(6) {
                for j in i + 1..vs.len().min(6) {
                    let mid = Measure::mixture(&[(half.clone(), &vs.vertices[i]), (half.clone(), &vs.vertices[j])])
                        .expect("midpoint");
                    checks.push(equivalence_check(CheckKind::Midpoint(i, j), mid, &cs, &model));
                }
            }
            for _ in 0..4 {
                let q = sample_combination(&mut rng, &vs.vertices);
                checks.push(equivalence_check(CheckKind::Sample, q, &cs, &model));
            }
            let q0 = Measure::new(c.model.q0.clone()).expect("q0 is a probability");
            checks.push(equivalence_check(CheckKind::Sample, q0, &cs, &model));
            let failures = checks
                .iter()
                .filter(|c| !c.ok)
                .map(|c| format!("{:?}: extreme={} complete={}", c.kind, c.extreme, c.complete))
                .collect();
            (checks.len(), failures)
        })
        .collect();
    collect("jacod-yor", seed, results)
}

/// Superhedging price equals the robust price with complementary slackness.
pub fn duality_suite(seed: u64, count: usize, payoffs: usize) -> SuiteReport {
    let cases = draw_models(seed, count, &ModelConfig::default());
    let results = cases
        .par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
            let model = FilteredModel::new(c.model.parts.clone()).expect("generated model is valid");
            let vs = enumerate_extreme_points(&build_constraints(&model));
            let mut failures = Vec::new();
            let mut checks = 0;
            let mut last: Option<(Vec<Rational>, Rational)> = None;
            for p in 0..payoffs {
                let phi = random_payoff(&mut rng, model.n_atoms());
                checks += 1;
                match verify_duality_with(&phi, &model, &vs, robust_price_over(&phi, &vs)) {
                    Ok(r) if r.holds() => {
                        if let Some((prev_phi, prev_price)) = &last {
                            // Monotonicity against the pointwise max of the two payoffs.
                            let upper: Vec<Rational> =
                                phi.iter().zip(prev_phi).map(|(a, b)| a.max(b).clone()).collect();
                            let up = robust_price_over(&upper, &vs);
                            checks += 1;
                            if let crate::duality::RobustPrice::Value { value, .. } = up {
                                if value < r.primal || &value < prev_price {
                                    failures.push(format!("payoff {p}: monotonicity fails"));
                                }
                            }
                        }
                        last = Some((phi, r.primal));
                    }
                    Ok(r) => failures.push(format!(
                        "payoff {p}: primal {} dual {} dominates={} slackness={}",
                        canonical(&r.primal),
                        canonical(&r.dual),
                        r.dominates,
                        r.slackness
                    )),
                    Err(e) => failures.push(format!("payoff {p}: {e}")),
                }
            }
            (checks, failures)
        })
        .collect();
    collect("duality", seed, results)
}

fn enlargement_config(claims: bool) -> ModelConfig {
    ModelConfig {
        max_claims: if claims { 2 } else { 0 },
        duplicate_outcomes: true,
        ..ModelConfig::default()
    }
}

/// Jeulin-Yor martingale property, compensator predictability and trace coincidence.
pub fn jeulin_yor_suite(seed: u64, count: usize) -> SuiteReport {
    let cases = draw_models(seed, count, &enlargement_config(true));
    let results = cases
        .par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
            let model = FilteredModel::new(c.model.parts.clone()).expect("generated model is valid");
            let jumps = random_jump_set(&mut rng, &model);
            let em = match enlarge(&model, jumps) {
                Ok(em) => em,
                Err(e) => return (1, vec![format!("enlarge: {e}")]),
            };
            let q = Measure::new(random_measure(&mut rng, em.g_model().n_atoms())).expect("probability");
            let mut failures = Vec::new();
            let mut checks = 0;
            for i in 0..em.jumps().len() {
                checks += 2;
                match jeulin_yor(&em, &q, i) {
                    Ok(jy) if jy.holds() => {}
                    Ok(jy) => failures.push(format!(
                        "jump {i}: violations {:?} predictable={} compensated={} supermartingale={}",
                        jy.violations, jy.predictable, jy.compensated, jy.supermartingale
                    )),
                    Err(e) => failures.push(format!("jump {i}: {e}")),
                }
                if !traces_coincide(&em, i).unwrap_or(false) {
                    failures.push(format!("jump {i}: traces before the jump differ"));
                }
            }
            (checks, failures)
        })
        .collect();
    collect("jeulin-yor", seed, results)
}

/// Without claims, the enlarged vertices are exactly the base vertices under which the filtrations coincide.
pub fn corollary54_suite(seed: u64, count: usize) -> SuiteReport {
    let cases = draw_models(seed, count, &enlargement_config(false));
    let results = cases
        .par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
            let model = FilteredModel::new(c.model.parts.clone()).expect("generated model is valid");
            let jumps = random_jump_set(&mut rng, &model);
            let em = match enlarge(&model, jumps) {
                Ok(em) => em,
                Err(e) => return (1, vec![format!("enlarge: {e}")]),
            };
            let base_payoff = random_payoff(&mut rng, model.n_atoms());
            let atom_of = model.atoms().cell_index(model.n_outcomes());
            let payoff: Vec<Rational> = atom_of.iter().map(|&a| base_payoff[a].clone()).collect();
            match informed_compare(&em, &[("phi".to_string(), payoff)]) {
                Ok(r) => {
                    let mut failures = Vec::new();
                    if r.corollary != Some(true) {
                        failures.push(format!(
                            "vertex sets differ: |ext G| = {}, coinciding lifts = {}",
                            r.ext_g.len(),
                            r.lifts.iter().map(Vec::len).sum::<usize>()
                        ));
                    }
                    if !r.prices.iter().all(|p| p.dominated()) {
                        failures.push("informed price exceeds uninformed price".to_string());
                    }
                    (2, failures)
                }
                Err(e) => (1, vec![e.to_string()]),
            }
        })
        .collect();
    collect("corollary54", seed, results)
}

pub fn multinomial_suite(p_max: u32, m_max: u32) -> (SuiteReport, Vec<BoundReport>) {
    let reports = verify_multinomial_inequality(p_max, m_max);
    let failures = reports
        .iter()
        .filter(|r| !r.holds)
        .map(|r| format!("p={} m={}: {} > {}", r.p, r.m, r.lhs, r.rhs))
        .collect();
    (
        SuiteReport {
            suite: "multinomial".into(),
            seed: 0,
            cases: reports.len(),
            checks: reports.len(),
            failures,
        },
        reports,
    )
}

/// Default sizes used by `verify --suite all`.
pub const JACOD_YOR_CASES: usize = 200;
pub const DUALITY_CASES: usize = 200;
pub const DUALITY_PAYOFFS: usize = 5;
pub const JEULIN_YOR_CASES: usize = 200;
pub const COROLLARY_CASES: usize = 100;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_on_a_few_cases() {
        assert!(jacod_yor_suite(1, 10).passed());
        assert!(duality_suite(1, 10, 3).passed());
        assert!(jeulin_yor_suite(1, 10).passed());
        let r = corollary54_suite(1, 10);
        assert!(r.passed(), "{:?}", r.failures);
        assert!(multinomial_suite(3, 4).0.passed());
    }

    #[test]
    fn suites_are_deterministic() {
        assert_eq!(jacod_yor_suite(5, 8), jacod_yor_suite(5, 8));
        assert_eq!(corollary54_suite(5, 8), corollary54_suite(5, 8));
    }
}
