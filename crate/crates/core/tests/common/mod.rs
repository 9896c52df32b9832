#![allow(dead_code)]

use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use semistatic::model::{FilteredModel, Measure};
use semistatic::random::{random_model, ModelConfig};
use semistatic::rational::Rational;

pub fn model_from_seed(seed: u64, cfg: &ModelConfig) -> (FilteredModel, Vec<Rational>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rm = random_model(&mut rng, cfg);
    (FilteredModel::new(rm.parts).expect("valid"), rm.q0)
}

/// Calibration rows written out directly from prices and claims, last row `Σq = 1`.
pub fn oracle_rows(m: &FilteredModel) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let n = m.n_atoms();
    let mut rows = Vec::new();
    for k in 1..=m.steps() {
        for cell in m.filtration().partition(k - 1).cells() {
            for j in 0..m.assets() {
                let mut row = vec![Rational::zero(); n];
                for &a in cell {
                    row[a] = m.prices().value(j, k, a) - m.prices().value(j, k - 1, a);
                }
                rows.push(row);
            }
        }
    }
    for c in m.claims() {
        rows.push(c.payoff.clone());
    }
    rows.push(vec![Rational::one(); n]);
    let mut b = vec![Rational::zero(); rows.len()];
    *b.last_mut().unwrap() = Rational::one();
    (rows, b)
}

/// Plain Gauss-Jordan on `[A | b]`. Returns the unique solution, or `None`
/// if the system is inconsistent or underdetermined.
pub fn unique_solution(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(r, x)| r.iter().cloned().chain(std::iter::once(x.clone())).collect())
        .collect();
    let mut row = 0;
    for c in 0..cols {
        let p = (row..m.len()).find(|&r| !m[r][c].is_zero())?;
        m.swap(row, p);
        let inv = Rational::one() / &m[row][c];
        for x in m[row].iter_mut() {
            *x *= &inv;
        }
        for r in 0..m.len() {
            if r != row && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for k in 0..=cols {
                    let d = &f * &m[row][k];
                    m[r][k] -= d;
                }
            }
        }
        row += 1;
    }
    if m[row..].iter().any(|r| !r[cols].is_zero()) {
        return None;
    }
    Some((0..cols).map(|c| m[c][cols].clone()).collect())
}

/// Every support whose restricted system has a unique, strictly positive solution.
pub fn brute_force_vertices(m: &FilteredModel) -> Vec<Measure> {
    let (rows, b) = oracle_rows(m);
    let allowed: Vec<usize> = (0..m.n_atoms()).filter(|&a| m.priors().is_allowed(a)).collect();
    let mut out = Vec::new();
    for mask in 1u32..(1 << allowed.len()) {
        let support: Vec<usize> = (0..allowed.len()).filter(|i| mask >> i & 1 == 1).map(|i| allowed[i]).collect();
        let sub: Vec<Vec<Rational>> = rows.iter().map(|r| support.iter().map(|&a| r[a].clone()).collect()).collect();
        if let Some(x) = unique_solution(&sub, &b) {
            if x.iter().all(|v| v > &Rational::zero()) {
                let mut w = vec![Rational::zero(); m.n_atoms()];
                for (&a, v) in support.iter().zip(x) {
                    w[a] = v;
                }
                out.push(Measure::new(w).expect("probability"));
            }
        }
    }
    out.sort();
    out
}
