//! Quasi-sure superhedging, robust pricing over vertices, and arbitrage detection.
//!
//! Quasi-sure domination is pointwise domination on the prior-allowed atoms.

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::hedging::{HedgingSpan, SemiStaticStrategy, SpanElement};
use crate::linalg::Vector;
use crate::lp::{self, LpOutcome};
use crate::model::{FilteredModel, Measure};
use crate::polytope::{build_constraints, enumerate_extreme_points, VertexSet};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SuperhedgeResult {
    Optimal {
        price: Rational,
        strategy: SemiStaticStrategy,
        /// Allowed atoms where the strategy's payoff equals `Φ`.
        tight: Vec<usize>,
    },
    /// No finite price: the calibrated measure set is empty.
    Unbounded,
}

/// Columns of the LP: every span element split into ± parts, then one slack per allowed atom.
fn lp_system(span: &HedgingSpan, model: &FilteredModel, rhs: &[Rational]) -> (Vec<Vector>, Vector, Vec<usize>) {
    let allowed: Vec<usize> = (0..model.n_atoms()).filter(|&a| model.priors().is_allowed(a)).collect();
    let k = span.vectors.len();
    let rows = allowed
        .iter()
        .enumerate()
        .map(|(r, &a)| {
            let mut row = Vec::with_capacity(2 * k + allowed.len());
            for v in &span.vectors {
                row.push(v[a].clone());
            }
            for v in &span.vectors {
                row.push(-v[a].clone());
            }
            for s in 0..allowed.len() {
                row.push(if s == r { -Rational::one() } else { Rational::zero() });
            }
            row
        })
        .collect();
    let b = allowed.iter().map(|&a| rhs[a].clone()).collect();
    (rows, b, allowed)
}

fn coefficients(x: &[Rational], k: usize) -> Vector {
    (0..k).map(|i| &x[i] - &x[k + i]).collect()
}

/// Cheapest semi-static strategy dominating `Φ` on every allowed atom.
pub fn superhedge(phi: &[Rational], model: &FilteredModel) -> SuperhedgeResult {
    let span = HedgingSpan::new(model);
    let (rows, b, allowed) = lp_system(&span, model, phi);
    let k = span.vectors.len();
    let mut cost = vec![Rational::zero(); rows.first().map_or(2 * k, Vec::len)];
    // Constant element is column 0.
    debug_assert_eq!(span.elements[0], SpanElement::Constant);
    cost[0] = Rational::one();
    cost[k] = -Rational::one();
    match lp::solve(&rows, &b, &cost) {
        LpOutcome::Optimal { x, value } => {
            let strategy = span.strategy_from_coefficients(&coefficients(&x, k), model);
            let tight = allowed
                .iter()
                .enumerate()
                .filter(|(r, _)| x[2 * k + r].is_zero())
                .map(|(_, &a)| a)
                .collect();
            SuperhedgeResult::Optimal {
                price: value,
                strategy,
                tight,
            }
        }
        LpOutcome::Unbounded => SuperhedgeResult::Unbounded,
        // x large enough always dominates.
        LpOutcome::Infeasible => unreachable!("superhedging LP is always feasible"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RobustPrice {
    Value {
        value: Rational,
        /// Indices into the vertex set, in canonical order.
        argmax: Vec<usize>,
    },
    /// `𝓜 = ∅`; the supremum is `−∞`.
    Empty,
}

pub fn robust_price_over(phi: &[Rational], vertices: &VertexSet) -> RobustPrice {
    let values: Vec<Rational> = vertices
        .vertices
        .par_iter()
        .map(|q| q.expectation(phi))
        .collect();
    let Some(value) = values.iter().max().cloned() else {
        return RobustPrice::Empty;
    };
    let argmax = (0..values.len()).filter(|&i| values[i] == value).collect();
    RobustPrice::Value { value, argmax }
}

/// `max_{Q ∈ ext 𝓜} E_Q[Φ]`.
pub fn robust_price(phi: &[Rational], model: &FilteredModel) -> (RobustPrice, VertexSet) {
    let vs = enumerate_extreme_points(&build_constraints(model));
    (robust_price_over(phi, &vs), vs)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualityReport {
    pub primal: Rational,
    pub dual: Rational,
    pub gap: Rational,
    pub strategy: SemiStaticStrategy,
    pub tight: Vec<usize>,
    pub argmax: Vec<Measure>,
    /// Strategy payoff dominates `Φ` on every allowed atom.
    pub dominates: bool,
    /// Every argmax vertex charges only tight atoms.
    pub slackness: bool,
}

impl DualityReport {
    pub fn holds(&self) -> bool {
        self.gap.is_zero() && self.dominates && self.slackness
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DualityError {
    #[error("the calibrated martingale measure set is empty (arbitrage)")]
    EmptyMeasureSet(Box<SemiStaticStrategy>),
}

pub fn verify_duality(phi: &[Rational], model: &FilteredModel) -> Result<DualityReport, DualityError> {
    let (price, vs) = robust_price(phi, model);
    verify_duality_with(phi, model, &vs, price)
}

pub(crate) fn verify_duality_with(
    phi: &[Rational],
    model: &FilteredModel,
    vs: &VertexSet,
    price: RobustPrice,
) -> Result<DualityReport, DualityError> {
    let (RobustPrice::Value { value: dual, argmax }, SuperhedgeResult::Optimal { price: primal, strategy, tight }) =
        (price, superhedge(phi, model))
    else {
        let cert = arbitrage_certificate(model).expect("empty measure set admits a certificate");
        return Err(DualityError::EmptyMeasureSet(Box::new(cert)));
    };
    let payoff = strategy.payoff(model).expect("strategy built from the model");
    let dominates = (0..model.n_atoms())
        .filter(|&a| model.priors().is_allowed(a))
        .all(|a| payoff[a] >= phi[a]);
    let argmax: Vec<Measure> = argmax.into_iter().map(|i| vs.vertices[i].clone()).collect();
    let slackness = argmax
        .iter()
        .all(|q| q.support().iter().all(|a| tight.binary_search(a).is_ok()));
    Ok(DualityReport {
        gap: &primal - &dual,
        primal,
        dual,
        strategy,
        tight,
        argmax,
        dominates,
        slackness,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArbitrageResult {
    Feasible(usize),
    /// A zero-cost strategy paying at least 1 on every allowed atom.
    Arbitrage(SemiStaticStrategy),
}

/// Zero-cost semi-static strategy with payoff `≥ 1` on every allowed atom, if one exists.
pub fn arbitrage_certificate(model: &FilteredModel) -> Option<SemiStaticStrategy> {
    let span = HedgingSpan::new(model);
    let ones = vec![Rational::one(); model.n_atoms()];
    let (mut rows, b, _) = lp_system(&span, model, &ones);
    let k = span.vectors.len();
    // Cash is pinned at zero by removing its columns.
    for row in rows.iter_mut() {
        row[0] = Rational::zero();
        row[k] = Rational::zero();
    }
    let cost = vec![Rational::zero(); rows.first().map_or(2 * k, Vec::len)];
    match lp::solve(&rows, &b, &cost) {
        LpOutcome::Optimal { x, .. } => Some(span.strategy_from_coefficients(&coefficients(&x, k), model)),
        _ => None,
    }
}

pub fn detect_arbitrage(model: &FilteredModel) -> ArbitrageResult {
    let vs = enumerate_extreme_points(&build_constraints(model));
    if !vs.is_empty() {
        return ArbitrageResult::Feasible(vs.len());
    }
    ArbitrageResult::Arbitrage(
        arbitrage_certificate(model).expect("an empty measure set admits a strictly positive gain"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FiltrationSpec, ModelParts};
    use crate::rational::{int, ints, ratio};

    fn trinomial(claims: Vec<Vec<Rational>>) -> FilteredModel {
        FilteredModel::new(ModelParts {
            outcomes: vec!["u".into(), "m".into(), "d".into()],
            times: ints(&[0, 1]),
            filtration: FiltrationSpec::Natural,
            prices: vec![vec![ints(&[0, 0, 0]), ints(&[1, 0, -1])]],
            claims,
            prior_support: None,
        })
        .unwrap()
    }

    fn psi() -> Vec<Rational> {
        vec![ratio(1, 2), ratio(-1, 2), ratio(1, 2)]
    }

    #[test]
    fn superhedge_abs_without_claim() {
        let m = trinomial(vec![]);
        let SuperhedgeResult::Optimal { price, strategy, .. } = superhedge(&ints(&[1, 0, 1]), &m) else {
            panic!()
        };
        assert_eq!(price, int(1));
        assert_eq!(strategy.cash, int(1));
        assert_eq!(strategy.dynamic.get(1, 0, 0), &int(0));
    }

    #[test]
    fn superhedge_abs_with_claim() {
        let m = trinomial(vec![psi()]);
        let SuperhedgeResult::Optimal { price, strategy, .. } = superhedge(&ints(&[1, 0, 1]), &m) else {
            panic!()
        };
        assert_eq!(price, ratio(1, 2));
        assert_eq!(strategy.statics, vec![int(1)]);
    }

    #[test]
    fn constants_and_claims_price_trivially() {
        let m = trinomial(vec![psi()]);
        let r = verify_duality(&ints(&[3, 3, 3]), &m).unwrap();
        assert_eq!(r.primal, int(3));
        let r = verify_duality(&psi(), &m).unwrap();
        assert_eq!(r.primal, int(0));
        assert!(r.holds());
    }

    #[test]
    fn robust_price_examples() {
        let (p, vs) = robust_price(&ints(&[1, 0, 1]), &trinomial(vec![]));
        assert_eq!(
            p,
            RobustPrice::Value {
                value: int(1),
                argmax: vec![0]
            }
        );
        assert_eq!(vs.vertices[0].weights(), &[ratio(1, 2), int(0), ratio(1, 2)]);
        let (p, _) = robust_price(&ints(&[1, 0, 1]), &trinomial(vec![psi()]));
        assert!(matches!(p, RobustPrice::Value { value, .. } if value == ratio(1, 2)));
    }

    #[test]
    fn duality_on_trinomial() {
        let r = verify_duality(&ints(&[1, 0, 1]), &trinomial(vec![])).unwrap();
        assert!(r.holds());
        assert_eq!(r.primal, int(1));
    }

    #[test]
    fn miscalibrated_claim_is_arbitrage() {
        // ψ = S₁ + 1 has positive price under every martingale measure.
        let m = trinomial(vec![ints(&[2, 1, 0])]);
        let ArbitrageResult::Arbitrage(s) = detect_arbitrage(&m) else {
            panic!()
        };
        assert_eq!(s.cash, int(0));
        assert!(s.payoff(&m).unwrap().iter().all(|v| *v >= int(1)));
        assert_eq!(detect_arbitrage(&trinomial(vec![])), ArbitrageResult::Feasible(2));
        assert!(matches!(superhedge(&ints(&[0, 0, 0]), &m), SuperhedgeResult::Unbounded));
    }
}
