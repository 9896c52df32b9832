//! Seeded generators of small arbitrage-free models, measures, jumps and payoffs.
//!
//! Models are recombination-free trees. Every node draws conditional
//! probabilities first and then picks increments that make each asset a
//! martingale under them, so the product measure `q0` is always calibrated:
//! claims are centred under `q0`.

use num_traits::Zero;
use rand::Rng;

use crate::enlargement::SingleJump;
use crate::model::{FiltrationSpec, ModelParts};
use crate::rational::{int, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub max_atoms: usize,
    pub max_steps: usize,
    pub max_claims: usize,
    pub max_assets: usize,
    /// Split some atoms into two raw outcomes, so enlargements can see more than `F_K`.
    pub duplicate_outcomes: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            max_atoms: 8,
            max_steps: 3,
            max_claims: 2,
            max_assets: 2,
            duplicate_outcomes: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomModel {
    pub parts: ModelParts,
    /// Interior calibrated measure, per atom.
    pub q0: Vec<Rational>,
}

struct Node {
    depth: usize,
    parent: Option<usize>,
    prob: Rational,
    /// `[asset]` price at this node.
    price: Vec<Rational>,
}

pub fn random_model<R: Rng>(rng: &mut R, cfg: &ModelConfig) -> RandomModel {
    let steps = rng.gen_range(1..=cfg.max_steps.max(1));
    let assets = rng.gen_range(1..=cfg.max_assets.max(1));
    let mut nodes = vec![Node {
        depth: 0,
        parent: None,
        prob: int(1),
        price: vec![Rational::zero(); assets],
    }];
    let mut level: Vec<usize> = vec![0];
    for depth in 1..=steps {
        let mut next = Vec::new();
        for (i, &p) in level.iter().enumerate() {
            let pending = level.len() - i - 1;
            let budget = cfg.max_atoms.saturating_sub(next.len() + pending).max(1);
            let b = rng.gen_range(1..=budget.min(3));
            let weights: Vec<i64> = (0..b).map(|_| rng.gen_range(1..=3)).collect();
            let total: i64 = weights.iter().sum();
            let probs: Vec<Rational> = weights.iter().map(|&w| Rational::new(w.into(), total.into())).collect();
            let mut increments = vec![vec![Rational::zero(); assets]; b];
            for j in 0..assets {
                let mut acc = Rational::zero();
                for c in 0..b - 1 {
                    let d = int(rng.gen_range(-3..=3));
                    acc += &probs[c] * &d;
                    increments[c][j] = d;
                }
                if b > 1 {
                    increments[b - 1][j] = -acc / &probs[b - 1];
                }
            }
            for c in 0..b {
                let price = (0..assets)
                    .map(|j| &nodes[p].price[j] + &increments[c][j])
                    .collect();
                nodes.push(Node {
                    depth,
                    parent: Some(p),
                    prob: &nodes[p].prob * &probs[c],
                    price,
                });
                next.push(nodes.len() - 1);
            }
        }
        level = next;
    }

    let leaves = level;
    let ancestor = |leaf: usize, k: usize| -> usize {
        let mut n = leaf;
        while nodes[n].depth > k {
            n = nodes[n].parent.expect("non-root");
        }
        n
    };
    // Raw outcomes: each leaf once, sometimes twice.
    let mut owner: Vec<usize> = Vec::new();
    let mut outcomes = Vec::new();
    for (li, _) in leaves.iter().enumerate() {
        let copies = if cfg.duplicate_outcomes && rng.gen_bool(0.4) { 2 } else { 1 };
        for c in 0..copies {
            owner.push(li);
            outcomes.push(if copies == 1 { format!("w{li}") } else { format!("w{li}{}", ['a', 'b'][c]) });
        }
    }
    let prices = (0..assets)
        .map(|j| {
            (0..=steps)
                .map(|k| owner.iter().map(|&li| nodes[ancestor(leaves[li], k)].price[j].clone()).collect())
                .collect()
        })
        .collect();
    let filtration = (0..=steps)
        .map(|k| {
            let mut cells: Vec<(usize, Vec<usize>)> = Vec::new();
            for (o, &li) in owner.iter().enumerate() {
                let a = ancestor(leaves[li], k);
                match cells.iter_mut().find(|(x, _)| *x == a) {
                    Some((_, c)) => c.push(o),
                    None => cells.push((a, vec![o])),
                }
            }
            cells.into_iter().map(|(_, c)| c).collect()
        })
        .collect();
    let q0: Vec<Rational> = leaves.iter().map(|&l| nodes[l].prob.clone()).collect();
    let n_claims = rng.gen_range(0..=cfg.max_claims);
    let claims = (0..n_claims)
        .map(|_| {
            let f: Vec<Rational> = (0..leaves.len()).map(|_| int(rng.gen_range(-3..=3))).collect();
            let mean: Rational = f.iter().zip(&q0).map(|(x, p)| x * p).sum();
            owner.iter().map(|&li| &f[li] - &mean).collect()
        })
        .collect();
    RandomModel {
        parts: ModelParts {
            outcomes,
            times: (0..=steps as i64).map(int).collect(),
            filtration: FiltrationSpec::Explicit(filtration),
            prices,
            claims,
            prior_support: None,
        },
        q0,
    }
}

/// Integer weights in `0..=4`, normalized; about one atom in four is null.
pub fn random_measure<R: Rng>(rng: &mut R, n: usize) -> Vec<Rational> {
    loop {
        let w: Vec<i64> = (0..n)
            .map(|_| if rng.gen_bool(0.25) { 0 } else { rng.gen_range(1..=4) })
            .collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w.iter().map(|&x| Rational::new(x.into(), total.into())).collect();
        }
    }
}

/// Marks in `{0, 1, 2}`, jump times uniform on `0..=steps`.
pub fn random_jump<R: Rng>(rng: &mut R, n: usize, steps: usize) -> SingleJump {
    let mark: Vec<Rational> = (0..n)
        .map(|_| if rng.gen_bool(1.0 / 3.0) { int(0) } else { int(rng.gen_range(1..=2)) })
        .collect();
    let tau = mark
        .iter()
        .map(|m| (!m.is_zero()).then(|| rng.gen_range(0..=steps)))
        .collect();
    SingleJump::new(tau, mark, n, steps).expect("generated jumps are well formed")
}

/// One or two jumps over the raw outcomes of a model.
pub fn random_jump_set<R: Rng>(rng: &mut R, model: &crate::model::FilteredModel) -> Vec<SingleJump> {
    let count = rng.gen_range(1..=2);
    (0..count)
        .map(|_| random_jump(rng, model.n_outcomes(), model.steps()))
        .collect()
}

pub fn random_payoff<R: Rng>(rng: &mut R, n: usize) -> Vec<Rational> {
    (0..n).map(|_| int(rng.gen_range(-5..=5))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FilteredModel, Measure};
    use crate::polytope::{build_constraints, member};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_models_are_valid_and_calibrated() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dup in [false, true] {
            let cfg = ModelConfig {
                duplicate_outcomes: dup,
                ..ModelConfig::default()
            };
            for _ in 0..50 {
                let rm = random_model(&mut rng, &cfg);
                let m = FilteredModel::new(rm.parts).unwrap();
                assert!(m.n_atoms() <= 8);
                let q0 = Measure::new(rm.q0).unwrap();
                assert!(member(&q0, &build_constraints(&m)));
            }
        }
    }
}
