//! The ten acceptance criteria, one PASS/FAIL line each.
//! Runs without the libtest harness so the lines always reach stdout.

use std::process::Command;
use std::time::{Duration, Instant};

use semistatic::bounds::{multinomial_lhs, verify_multinomial_inequality};
use semistatic::duality::{robust_price, superhedge, RobustPrice, SuperhedgeResult};
use semistatic::enlargement::{enlarge, informed_compare};
use semistatic::hedging::is_semistatically_complete;
use semistatic::model::{FilteredModel, Measure};
use semistatic::polytope::{build_constraints, enumerate_extreme_points};
use semistatic::rational::{int, ratio, Rational};
use semistatic::scenario::{load_scenario, Scenario};
use semistatic::tree::{check_theorem_conditions, extract_tree, sigma_tree_expectation, TreeOutcome};
use semistatic::verify;

fn scenario(name: &str) -> Scenario {
    let path = format!("{}/../../scenarios/{name}.json", env!("CARGO_MANIFEST_DIR"));
    load_scenario(&std::fs::read_to_string(&path).expect("scenario file")).expect("valid scenario")
}

fn payoff(s: &Scenario, name: &str) -> Vec<Rational> {
    s.payoff_atoms(name).expect("named payoff").1
}

fn value(p: &RobustPrice) -> Option<Rational> {
    match p {
        RobustPrice::Value { value, .. } => Some(value.clone()),
        RobustPrice::Empty => None,
    }
}

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn suite(r: verify::SuiteReport) -> Outcome {
    if r.passed() {
        Ok(format!("{} cases, {} checks", r.cases, r.checks))
    } else {
        Err(format!("{} failures, first: {}", r.failures.len(), r.failures[0]))
    }
}

fn jacod_yor() -> Outcome {
    let start = Instant::now();
    let r = verify::jacod_yor_suite(0, verify::JACOD_YOR_CASES);
    let took = start.elapsed();
    check(r.cases >= 200, "fewer than 200 models")?;
    check(took < Duration::from_secs(60), format!("took {took:?}"))?;
    suite(r).map(|m| format!("{m} in {:.1}s", took.as_secs_f64()))
}

fn duality() -> Outcome {
    check(verify::DUALITY_PAYOFFS >= 5, "fewer than 5 payoffs")?;
    suite(verify::duality_suite(0, verify::DUALITY_CASES, verify::DUALITY_PAYOFFS))
}

/// Superhedging LP price, an independent route to the same number.
fn lp_price(phi: &[Rational], m: &FilteredModel) -> Option<Rational> {
    match superhedge(phi, m) {
        SuperhedgeResult::Optimal { price, .. } => Some(price),
        SuperhedgeResult::Unbounded => None,
    }
}

fn trinomial() -> Outcome {
    let plain = scenario("trinomial");
    let vs = enumerate_extreme_points(&build_constraints(&plain.model));
    let want = vec![
        Measure::new(vec![ratio(1, 2), int(0), ratio(1, 2)]).unwrap(),
        Measure::new(vec![int(0), int(1), int(0)]).unwrap(),
    ];
    check(vs.vertices == want, format!("vertices {vs}"))?;
    let abs = payoff(&plain, "abs_S1");
    let p0 = value(&robust_price(&abs, &plain.model).0);
    check(p0 == Some(int(1)) && lp_price(&abs, &plain.model) == Some(int(1)), "price without claim is not 1")?;

    let cal = scenario("trinomial_calibrated");
    let vs = enumerate_extreme_points(&build_constraints(&cal.model));
    let unique = Measure::new(vec![ratio(1, 4), ratio(1, 2), ratio(1, 4)]).unwrap();
    check(vs.vertices == vec![unique.clone()], format!("calibrated vertices {vs}"))?;
    let c = is_semistatically_complete(&unique, &cal.model).map_err(|e| e.to_string())?;
    check(c.complete, "unique measure not complete")?;
    let p1 = value(&robust_price(&abs, &cal.model).0);
    check(
        p1 == Some(ratio(1, 2)) && lp_price(&abs, &cal.model) == Some(ratio(1, 2)),
        "price with claim is not 1/2",
    )?;
    Ok("vertices, completeness and prices 1, 1/2 match".into())
}

fn glued() -> Outcome {
    let s = scenario("glued_two_vol");
    let (s1, s2, k) = (int(4), int(1), int(2));
    // λ σ₁² + (1 − λ) σ₂² = K′
    let lambda = (&k - &s2) / (&s1 - &s2);
    check(lambda == ratio(1, 3), "calibration weight")?;
    let (_, q) = s.measure("lambda").map_err(|e| e.to_string())?;
    let a1 = vec![0, 1, 2];
    let a2 = vec![3, 4, 5];
    check(q.mass(&a1) == lambda, "Q(A1) differs from λ")?;
    let vs = enumerate_extreme_points(&build_constraints(&s.model));
    check(vs.vertices.contains(&q), "λ-measure is not a vertex")?;
    let TreeOutcome::Tree(ex) = extract_tree(&q, &s.model).map_err(|e| e.to_string())? else {
        return Err("no tree".into());
    };
    let nodes: Vec<Vec<usize>> = ex.tree.nodes().iter().map(|n| n.cell.clone()).collect();
    check(nodes == vec![(0..6).collect(), a1.clone(), a2.clone()], format!("tree {nodes:?}"))?;
    check(ex.tree.dim() == 2, "dim")?;
    check(check_theorem_conditions(&ex.tree, &q, &s.model).passed(), "conditions")?;
    let e = sigma_tree_expectation(&s.model.claims()[0].payoff, &ex.tree, &q);
    check(e[a1[0]] == int(2) && e[a2[0]] == int(-1), "leafwise expectation")?;
    Ok("λ = 1/3, tree {Ω, A1, A2}, dim 2, E[ψ|tree] = (2, -1)".into())
}

fn jump_counterexample() -> Outcome {
    let s = scenario("jump_counterexample");
    let (_, q) = s.measure("q").map_err(|e| e.to_string())?;
    let c = is_semistatically_complete(&q, &s.model).map_err(|e| e.to_string())?;
    check(c.complete, "not complete")?;
    match extract_tree(&q, &s.model).map_err(|e| e.to_string())? {
        TreeOutcome::NoTree(why) => Ok(format!("complete, NoTree ({why})")),
        TreeOutcome::Tree(_) => Err("a tree was extracted".into()),
    }
}

fn informed_arbitrage() -> Outcome {
    let s = scenario("informed_arbitrage");
    let em = enlarge(&s.model, s.jumps.clone()).map_err(|e| e.to_string())?;
    let r = informed_compare(&em, &[]).map_err(|e| e.to_string())?;
    check(!r.ext_f.is_empty(), "M(F) is empty")?;
    check(r.ext_g.is_empty(), "M(G) is not empty")?;
    let cert = r.arbitrage.ok_or("no certificate")?;
    let g = em.g_model();
    let pay = cert.payoff(g).map_err(|e| e.to_string())?;
    let ok = cert.cash == int(0) && (0..g.n_atoms()).filter(|&a| g.priors().is_allowed(a)).all(|a| pay[a] >= int(1));
    check(ok, "certificate does not pay at least 1 at zero cost")?;
    Ok(format!("|ext M(F)| = {}, M(G) empty, certificate verified", r.ext_f.len()))
}

fn multinomial() -> Outcome {
    let reports = verify_multinomial_inequality(5, 6);
    let strict: Vec<_> = reports.iter().filter(|b| b.p < b.m).collect();
    check(strict.len() == 15, "range 1 <= p < m <= 6 not covered")?;
    check(reports.iter().all(|b| b.holds), "inequality fails")?;
    check(multinomial_lhs(2, 2) == 4.into(), "lhs(2,2)")?;
    check((1..=6).all(|m| multinomial_lhs(1, m) == 0.into()), "lhs(1,m)")?;
    Ok(format!("{} pairs hold", reports.len()))
}

fn determinism() -> Outcome {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_semistatic"))
            .args(["verify", "--suite", "all"])
            .env("SEMISTATIC_THREADS", threads)
            .output()
            .expect("binary runs")
    };
    let a = run("1");
    let b = run("1");
    let c = run("4");
    check(a.status.success(), format!("exit status {:?}", a.status.code()))?;
    check(a.stdout == b.stdout, "two runs differ")?;
    check(a.stdout == c.stdout, "thread count changes the report")?;
    Ok(format!("{} bytes identical across 3 runs", a.stdout.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("Jacod-Yor equivalence on 200 random models", jacod_yor),
        ("duality on 200 models x 5 payoffs", duality),
        ("trinomial regression", trinomial),
        ("glued two-volatility tree", glued),
        ("jump counterexample", jump_counterexample),
        ("Jeulin-Yor on 200 random triples", || suite(verify::jeulin_yor_suite(0, verify::JEULIN_YOR_CASES))),
        ("enlarged vertices are the coinciding base vertices", || {
            suite(verify::corollary54_suite(0, verify::COROLLARY_CASES))
        }),
        ("informed arbitrage", informed_arbitrage),
        ("multinomial inequality", multinomial),
        ("determinism of verify --suite all", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {:>2}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
