//! The calibrated martingale measure polytope and its vertices.
//!
//! `𝓜` is `{q ≥ 0 : A q = b}` with zero bounds on atoms outside the prior
//! support. Vertices are computed as the extreme rays of the homogeneous cone
//! `{q ≥ 0 : A₀ q = 0}` (all rows except normalization) by double description,
//! then scaled to total mass one.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::linalg::{self, Matrix, Vector};
use crate::model::{FilteredModel, Measure};
use crate::rational::{canonical, Rational, Tuple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowLabel {
    Martingale { k: usize, cell: usize, asset: usize },
    Calibration { claim: usize },
    Normalization,
}

impl fmt::Display for RowLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowLabel::Martingale { k, cell, asset } => {
                write!(f, "martingale(k={k}, cell={cell}, asset={asset})")
            }
            RowLabel::Calibration { claim } => write!(f, "calibration(claim={claim})"),
            RowLabel::Normalization => write!(f, "normalization"),
        }
    }
}

/// Equality rows over atoms plus the prior-support zero bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSystem {
    rows: Matrix,
    rhs: Vector,
    labels: Vec<RowLabel>,
    allowed: Vec<bool>,
}

impl ConstraintSystem {
    pub fn dim(&self) -> usize {
        self.allowed.len()
    }

    pub fn rows(&self) -> &[Vector] {
        &self.rows
    }

    pub fn rhs(&self) -> &[Rational] {
        &self.rhs
    }

    pub fn labels(&self) -> &[RowLabel] {
        &self.labels
    }

    pub fn allowed(&self) -> &[bool] {
        &self.allowed
    }

    /// First violated condition, if any.
    pub fn violation(&self, q: &[Rational]) -> Option<String> {
        if q.len() != self.dim() {
            return Some(format!("length {} != {}", q.len(), self.dim()));
        }
        for (i, w) in q.iter().enumerate() {
            if w.is_negative() {
                return Some(format!("weight {i} is negative"));
            }
            if !w.is_zero() && !self.allowed[i] {
                return Some(format!("weight {i} charges an atom outside the prior support"));
            }
        }
        for ((row, b), label) in self.rows.iter().zip(&self.rhs).zip(&self.labels) {
            let v = linalg::dot(row, q);
            if &v != b {
                return Some(format!("{label}: {} != {}", canonical(&v), canonical(b)));
            }
        }
        None
    }
}

pub fn build_constraints(model: &FilteredModel) -> ConstraintSystem {
    let n = model.n_atoms();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for k in 1..=model.steps() {
        for (c, cell) in model.filtration().partition(k - 1).cells().iter().enumerate() {
            for j in 0..model.assets() {
                let mut row = vec![Rational::zero(); n];
                for &a in cell {
                    row[a] = model.prices().increment(j, k, a);
                }
                rows.push(row);
                labels.push(RowLabel::Martingale { k, cell: c, asset: j });
            }
        }
    }
    for (i, claim) in model.claims().iter().enumerate() {
        rows.push(claim.payoff.clone());
        labels.push(RowLabel::Calibration { claim: i });
    }
    rows.push(vec![Rational::one(); n]);
    labels.push(RowLabel::Normalization);
    let mut rhs = vec![Rational::zero(); rows.len()];
    *rhs.last_mut().unwrap() = Rational::one();
    ConstraintSystem {
        rows,
        rhs,
        labels,
        allowed: model.priors().allowed().to_vec(),
    }
}

/// Why a measure is or is not a vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// The constraint columns on `support` have full column rank.
    Independent { support: Vec<usize>, rank: usize },
    /// `A d = 0`, `d ≠ 0`, `supp d ⊆ supp Q`: `Q ± εd` both lie in the polytope.
    Direction(Vector),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolytopeError {
    #[error("measure violates the constraint system: {0}")]
    ConstraintViolation(String),
}

pub fn member(q: &Measure, cs: &ConstraintSystem) -> bool {
    cs.violation(q.weights()).is_none()
}

pub fn is_extreme(q: &Measure, cs: &ConstraintSystem) -> Result<(bool, Certificate), PolytopeError> {
    if let Some(v) = cs.violation(q.weights()) {
        return Err(PolytopeError::ConstraintViolation(v));
    }
    let support = q.support();
    Ok(extremality_of_support(&support, cs))
}

fn extremality_of_support(support: &[usize], cs: &ConstraintSystem) -> (bool, Certificate) {
    let sub: Matrix = cs.rows.iter().map(|r| linalg::restrict(r, support)).collect();
    let null = linalg::nullspace(&sub, support.len());
    match null.first() {
        None => (
            true,
            Certificate::Independent {
                support: support.to_vec(),
                rank: support.len(),
            },
        ),
        Some(d) => {
            let mut full = vec![Rational::zero(); cs.dim()];
            for (&i, v) in support.iter().zip(primitive(d)) {
                full[i] = v;
            }
            (false, Certificate::Direction(full))
        }
    }
}

/// Scales a nonzero vector to coprime integers with a positive leading entry.
pub fn primitive(v: &[Rational]) -> Vector {
    let l = v
        .iter()
        .filter(|x| !x.is_zero())
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    let lead_negative = ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    let g = if lead_negative { -g } else { g };
    ints.into_iter().map(|x| Rational::from_integer(x / &g)).collect()
}

/// Vertices of `𝓜` in canonical order with their certificates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    pub vertices: Vec<Measure>,
    pub certificates: Vec<Certificate>,
}

impl VertexSet {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Canonical vertex order: support index list first, then weights.
pub fn canonical_order(a: &Measure, b: &Measure) -> std::cmp::Ordering {
    a.support()
        .cmp(&b.support())
        .then_with(|| a.weights().cmp(b.weights()))
}

struct Ray {
    v: Vector,
    /// Sorted coordinates where the ray vanishes (within the allowed set).
    zeros: Vec<usize>,
}

fn zero_set(v: &[Rational], coords: &[usize]) -> Vec<usize> {
    coords.iter().copied().filter(|&i| v[i].is_zero()).collect()
}

fn contains_all(sup: &[usize], sub: &[usize]) -> bool {
    // both sorted
    let mut it = sup.iter();
    sub.iter().all(|x| it.by_ref().any(|y| y == x))
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|x| b.binary_search(x).is_ok()).collect()
}

pub fn enumerate_extreme_points(cs: &ConstraintSystem) -> VertexSet {
    let n = cs.dim();
    let coords: Vec<usize> = (0..n).filter(|&i| cs.allowed[i]).collect();
    let mut rays: Vec<Ray> = coords
        .iter()
        .map(|&i| {
            let mut v = vec![Rational::zero(); n];
            v[i] = Rational::one();
            Ray {
                zeros: coords.iter().copied().filter(|&c| c != i).collect(),
                v,
            }
        })
        .collect();

    let homogeneous: Vec<&Vector> = cs
        .rows
        .iter()
        .zip(&cs.labels)
        .filter(|(_, l)| **l != RowLabel::Normalization)
        .map(|(r, _)| r)
        .collect();
    let mut inserted: Matrix = Vec::new();
    for row in homogeneous {
        let restricted = linalg::restrict(row, &coords);
        let mut trial = inserted.clone();
        trial.push(restricted);
        if linalg::rank(&trial, coords.len()) == inserted.len() {
            continue;
        }
        inserted = trial;

        let values: Vec<Rational> = rays.iter().map(|r| linalg::dot(row, &r.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_negative()).collect();
        let mut next: Vec<Ray> = Vec::new();
        for &p in &pos {
            for &m in &neg {
                let common = intersect(&rays[p].zeros, &rays[m].zeros);
                let adjacent = (0..rays.len())
                    .all(|t| t == p || t == m || !contains_all(&rays[t].zeros, &common));
                if !adjacent {
                    continue;
                }
                // (a·r⁺) r⁻ − (a·r⁻) r⁺ vanishes on the new row and stays ≥ 0.
                let mut v = linalg::scaled(&values[p], &rays[m].v);
                linalg::axpy(&-values[m].clone(), &rays[p].v, &mut v);
                let zeros = zero_set(&v, &coords);
                next.push(Ray { v, zeros });
            }
        }
        let mut kept: Vec<Ray> = Vec::new();
        for (i, r) in rays.into_iter().enumerate() {
            if values[i].is_zero() {
                kept.push(r);
            }
        }
        kept.extend(next);
        rays = kept;
        if rays.is_empty() {
            break;
        }
    }

    let mut vertices: Vec<Measure> = rays
        .into_iter()
        .map(|r| Measure::normalized(r.v).expect("extreme rays are nonzero and nonnegative"))
        .collect();
    vertices.sort_by(canonical_order);
    vertices.dedup();
    let certificates = vertices
        .iter()
        .map(|q| extremality_of_support(&q.support(), cs).1)
        .collect();
    VertexSet {
        vertices,
        certificates,
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, q) in self.vertices.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", Tuple(q.weights()))?;
        }
        Ok(())
    }
}
