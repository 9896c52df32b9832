//! Semi-static strategies, replication and the unhedgeable-part decomposition.

use num_traits::{One, Zero};

use crate::linalg::{self, Matrix, Vector};
use crate::model::{FilteredModel, Measure};
use crate::polytope::{self, build_constraints, enumerate_extreme_points, ConstraintSystem};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HedgingError {
    #[error("dynamic position shape does not match the model: {0}")]
    Shape(String),
    #[error("measure is not a calibrated martingale measure: {0}")]
    NotCalibrated(String),
    #[error("semi-static completeness fails under the measure (rank {rank} < {support})")]
    NotComplete { rank: usize, support: usize },
    #[error("the calibrated martingale measure set is empty")]
    EmptyMeasureSet,
    #[error("payoff has length {found}, expected {expected}")]
    PayoffLength { expected: usize, found: usize },
}

/// Predictable integrand: `values[k-1][cell of P_{k-1}][asset]` for `k = 1..=K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicPosition {
    values: Vec<Vec<Vec<Rational>>>,
}

impl DynamicPosition {
    pub fn zeros(model: &FilteredModel) -> Self {
        Self {
            values: (1..=model.steps())
                .map(|k| vec![vec![Rational::zero(); model.assets()]; model.filtration().partition(k - 1).len()])
                .collect(),
        }
    }

    pub fn from_values(values: Vec<Vec<Vec<Rational>>>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[Vec<Vec<Rational>>] {
        &self.values
    }

    /// Value at step `k ≥ 1`.
    pub fn get(&self, k: usize, cell: usize, asset: usize) -> &Rational {
        &self.values[k - 1][cell][asset]
    }

    pub fn set(&mut self, k: usize, cell: usize, asset: usize, v: Rational) {
        self.values[k - 1][cell][asset] = v;
    }

    pub fn check_shape(&self, model: &FilteredModel) -> Result<(), HedgingError> {
        if self.values.len() != model.steps() {
            return Err(HedgingError::Shape(format!(
                "{} steps, expected {}",
                self.values.len(),
                model.steps()
            )));
        }
        for (i, step) in self.values.iter().enumerate() {
            let cells = model.filtration().partition(i).len();
            if step.len() != cells || step.iter().any(|c| c.len() != model.assets()) {
                return Err(HedgingError::Shape(format!("step {} expects {cells} cells", i + 1)));
            }
        }
        Ok(())
    }

    /// Nonzero entries as `(k, cell, asset, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, &Rational)> {
        self.values.iter().enumerate().flat_map(|(i, step)| {
            step.iter().enumerate().flat_map(move |(c, assets)| {
                assets
                    .iter()
                    .enumerate()
                    .map(move |(j, v)| (i + 1, c, j, v))
            })
        })
    }
}

/// `x + Σ a_i ψ_i + (H·S)_T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemiStaticStrategy {
    pub cash: Rational,
    pub statics: Vec<Rational>,
    pub dynamic: DynamicPosition,
}

impl SemiStaticStrategy {
    pub fn payoff(&self, model: &FilteredModel) -> Result<Vector, HedgingError> {
        if self.statics.len() != model.claims().len() {
            return Err(HedgingError::Shape(format!(
                "{} static positions for {} claims",
                self.statics.len(),
                model.claims().len()
            )));
        }
        let mut out = terminal_gain(&self.dynamic, model)?;
        for v in out.iter_mut() {
            *v += &self.cash;
        }
        for (a, c) in self.statics.iter().zip(model.claims()) {
            linalg::axpy(a, &c.payoff, &mut out);
        }
        Ok(out)
    }
}

/// `Σ_k H_k · (S_k − S_{k−1})` per atom.
pub fn terminal_gain(h: &DynamicPosition, model: &FilteredModel) -> Result<Vector, HedgingError> {
    h.check_shape(model)?;
    let mut out = vec![Rational::zero(); model.n_atoms()];
    for k in 1..=model.steps() {
        for (c, cell) in model.filtration().partition(k - 1).cells().iter().enumerate() {
            for j in 0..model.assets() {
                let v = h.get(k, c, j);
                if v.is_zero() {
                    continue;
                }
                for &a in cell {
                    out[a] += v * model.prices().increment(j, k, a);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpanElement {
    Constant,
    Claim(usize),
    Gain { k: usize, cell: usize, asset: usize },
}

/// Payoffs of the elementary semi-static positions, in column order
/// `1, ψ_1..ψ_n, 1_A ΔS^j_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HedgingSpan {
    pub elements: Vec<SpanElement>,
    pub vectors: Matrix,
}

impl HedgingSpan {
    pub fn new(model: &FilteredModel) -> Self {
        let n = model.n_atoms();
        let mut elements = vec![SpanElement::Constant];
        let mut vectors = vec![vec![Rational::one(); n]];
        for (i, c) in model.claims().iter().enumerate() {
            elements.push(SpanElement::Claim(i));
            vectors.push(c.payoff.clone());
        }
        let (ge, gv) = gain_vectors(model);
        elements.extend(ge);
        vectors.extend(gv);
        Self { elements, vectors }
    }

    /// Rank of the span restricted to the given atoms.
    pub fn rank_on(&self, atoms: &[usize]) -> usize {
        let rows: Matrix = self.vectors.iter().map(|v| linalg::restrict(v, atoms)).collect();
        linalg::rank(&rows, atoms.len())
    }

    pub fn strategy_from_coefficients(&self, coeffs: &[Rational], model: &FilteredModel) -> SemiStaticStrategy {
        let mut s = SemiStaticStrategy {
            cash: Rational::zero(),
            statics: vec![Rational::zero(); model.claims().len()],
            dynamic: DynamicPosition::zeros(model),
        };
        for (e, c) in self.elements.iter().zip(coeffs) {
            match *e {
                SpanElement::Constant => s.cash += c,
                SpanElement::Claim(i) => s.statics[i] += c,
                SpanElement::Gain { k, cell, asset } => {
                    let v = s.dynamic.get(k, cell, asset) + c;
                    s.dynamic.set(k, cell, asset, v);
                }
            }
        }
        s
    }
}

/// Elementary gains `1_A (S^j_k − S^j_{k−1})` for `A ∈ P_{k−1}`.
pub fn gain_vectors(model: &FilteredModel) -> (Vec<SpanElement>, Matrix) {
    let n = model.n_atoms();
    let mut elements = Vec::new();
    let mut vectors = Vec::new();
    for k in 1..=model.steps() {
        for (c, cell) in model.filtration().partition(k - 1).cells().iter().enumerate() {
            for j in 0..model.assets() {
                let mut v = vec![Rational::zero(); n];
                for &a in cell {
                    v[a] = model.prices().increment(j, k, a);
                }
                elements.push(SpanElement::Gain { k, cell: c, asset: j });
                vectors.push(v);
            }
        }
    }
    (elements, vectors)
}

fn require_calibrated(q: &Measure, cs: &ConstraintSystem) -> Result<(), HedgingError> {
    match cs.violation(q.weights()) {
        Some(v) => Err(HedgingError::NotCalibrated(v)),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletenessReport {
    pub complete: bool,
    pub rank: usize,
    pub support: Vec<usize>,
}

pub fn is_semistatically_complete(q: &Measure, model: &FilteredModel) -> Result<CompletenessReport, HedgingError> {
    require_calibrated(q, &build_constraints(model))?;
    Ok(completeness_unchecked(q, model))
}

fn completeness_unchecked(q: &Measure, model: &FilteredModel) -> CompletenessReport {
    let support = q.support();
    let rank = HedgingSpan::new(model).rank_on(&support);
    CompletenessReport {
        complete: rank == support.len(),
        rank,
        support,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Replication {
    Replicated(SemiStaticStrategy),
    /// `X` minus its `L²(Q)` projection onto the span; zero on null atoms.
    NotReplicable { residual: Vector },
}

/// Replicates `X` on the support of `Q`. The returned strategy is the basic
/// solution taking pivots in column order, free coefficients set to zero.
pub fn replicate(x: &[Rational], q: &Measure, model: &FilteredModel) -> Result<Replication, HedgingError> {
    if x.len() != model.n_atoms() {
        return Err(HedgingError::PayoffLength {
            expected: model.n_atoms(),
            found: x.len(),
        });
    }
    require_calibrated(q, &build_constraints(model))?;
    let span = HedgingSpan::new(model);
    let support = q.support();
    // Columns are span elements; rows are support atoms.
    let cols: Matrix = span.vectors.iter().map(|v| linalg::restrict(v, &support)).collect();
    let system = linalg::transpose(&cols, support.len());
    if let Some(c) = linalg::solve(&system, span.vectors.len(), &linalg::restrict(x, &support)) {
        return Ok(Replication::Replicated(span.strategy_from_coefficients(&c, model)));
    }
    let basis = linalg::gram_schmidt(&span.vectors, q.weights());
    let p = linalg::project(x, &basis, q.weights());
    let residual = (0..x.len())
        .map(|i| if q.charges(i) { &x[i] - &p[i] } else { Rational::zero() })
        .collect();
    Ok(Replication::NotReplicable { residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Vertex(usize),
    Midpoint(usize, usize),
    Barycenter,
    Sample,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceCheck {
    pub kind: CheckKind,
    pub measure: Measure,
    pub extreme: bool,
    pub complete: bool,
    /// Vertices must be extreme and complete, combinations neither.
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JacodYorReport {
    pub vertex_count: usize,
    pub checks: Vec<EquivalenceCheck>,
}

impl JacodYorReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }
}

/// Extremality and completeness of a calibrated measure, both computed independently.
pub fn equivalence_check(kind: CheckKind, q: Measure, cs: &ConstraintSystem, model: &FilteredModel) -> EquivalenceCheck {
    let extreme = polytope::is_extreme(&q, cs).map(|(e, _)| e).unwrap_or(false);
    let complete = completeness_unchecked(&q, model).complete;
    let ok = match kind {
        CheckKind::Vertex(_) => extreme && complete,
        CheckKind::Midpoint(..) | CheckKind::Barycenter => !extreme && !complete,
        CheckKind::Sample => extreme == complete,
    };
    EquivalenceCheck {
        kind,
        measure: q,
        extreme,
        complete,
        ok,
    }
}

/// Every vertex is complete; every midpoint and the barycenter are neither extreme nor complete.
pub fn verify_jacod_yor(model: &FilteredModel) -> Result<JacodYorReport, HedgingError> {
    let cs = build_constraints(model);
    let vs = enumerate_extreme_points(&cs);
    if vs.is_empty() {
        return Err(HedgingError::EmptyMeasureSet);
    }
    let mut checks = Vec::new();
    for (i, v) in vs.vertices.iter().enumerate() {
        checks.push(equivalence_check(CheckKind::Vertex(i), v.clone(), &cs, model));
    }
    let half = Rational::new(1.into(), 2.into());
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            let mid = Measure::mixture(&[(half.clone(), &vs.vertices[i]), (half.clone(), &vs.vertices[j])])
                .expect("midpoint of probability vectors");
            checks.push(equivalence_check(CheckKind::Midpoint(i, j), mid, &cs, model));
        }
    }
    if vs.len() > 2 {
        let w = Rational::new(1.into(), (vs.len() as i64).into());
        let parts: Vec<_> = vs.vertices.iter().map(|v| (w.clone(), v)).collect();
        let bary = Measure::mixture(&parts).expect("barycenter");
        checks.push(equivalence_check(CheckKind::Barycenter, bary, &cs, model));
    }
    Ok(JacodYorReport {
        vertex_count: vs.len(),
        checks,
    })
}

/// Unhedgeable parts grouped by jump time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub time: usize,
    /// Orthogonal (not normalized) terminal values.
    pub basis: Matrix,
    /// `martingales[b][k]` = `E_Q[basis[b] | 𝓕_k]`.
    pub martingales: Vec<Matrix>,
    /// Charged cells of `P_{time−1}` (of `P_0` at time 0) where the block moves.
    pub atoms: Vec<Vec<usize>>,
}

impl Block {
    /// Zero strictly before `time` and constant from `time` on, on the support.
    pub fn has_single_jump(&self, q: &Measure) -> bool {
        self.martingales.iter().zip(&self.basis).all(|(m, terminal)| {
            m.iter().enumerate().all(|(k, mk)| {
                (0..mk.len()).filter(|&a| q.charges(a)).all(|a| {
                    if k < self.time {
                        mk[a].is_zero()
                    } else {
                        mk[a] == terminal[a]
                    }
                })
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnhedgeableDecomposition {
    /// `residuals[i][k]` = `V^i_k`.
    pub residuals: Vec<Matrix>,
    pub blocks: Vec<Block>,
}

impl UnhedgeableDecomposition {
    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block atoms at a common time are pairwise disjoint.
    pub fn atoms_disjoint(&self) -> bool {
        self.blocks.iter().all(|b| {
            b.atoms.iter().enumerate().all(|(i, x)| {
                b.atoms[i + 1..]
                    .iter()
                    .all(|y| x.iter().all(|a| !y.contains(a)))
            })
        })
    }
}

/// Elements of `span(vectors)` that are constant on the charged part of every cell.
fn measurable_subspace(vectors: &[Vector], cells: &[Vec<usize>], q: &Measure) -> Matrix {
    let mut constraints: Matrix = Vec::new();
    for cell in cells {
        let charged: Vec<usize> = cell.iter().copied().filter(|&a| q.charges(a)).collect();
        for w in charged.windows(2) {
            constraints.push(vectors.iter().map(|v| &v[w[1]] - &v[w[0]]).collect());
        }
    }
    let null = if constraints.is_empty() {
        (0..vectors.len())
            .map(|i| {
                let mut e = vec![Rational::zero(); vectors.len()];
                e[i] = Rational::one();
                e
            })
            .collect()
    } else {
        linalg::nullspace(&constraints, vectors.len())
    };
    null.iter()
        .map(|c| {
            let mut v = vec![Rational::zero(); vectors[0].len()];
            for (ci, vi) in c.iter().zip(vectors) {
                linalg::axpy(ci, vi, &mut v);
            }
            v
        })
        .collect()
}

fn martingale_of(x: &[Rational], q: &Measure, model: &FilteredModel) -> Matrix {
    (0..=model.steps())
        .map(|k| model.conditional_expectation(x, k, q))
        .collect()
}

pub fn decompose_unhedgeable(q: &Measure, model: &FilteredModel) -> Result<UnhedgeableDecomposition, HedgingError> {
    let report = is_semistatically_complete(q, model)?;
    if !report.complete {
        return Err(HedgingError::NotComplete {
            rank: report.rank,
            support: report.support.len(),
        });
    }
    let w = q.weights();
    let (_, gains) = gain_vectors(model);
    let gain_basis = linalg::gram_schmidt(&gains, w);
    let terminals: Matrix = model
        .claims()
        .iter()
        .map(|c| {
            let p = linalg::project(&c.payoff, &gain_basis, w);
            (0..p.len())
                .map(|a| if q.charges(a) { &c.payoff[a] - &p[a] } else { Rational::zero() })
                .collect()
        })
        .collect();
    let residuals = terminals.iter().map(|v| martingale_of(v, q, model)).collect();

    let mut blocks = Vec::new();
    if !terminals.is_empty() {
        let mut sequence: Matrix = Vec::new();
        let mut found = 0;
        for k in 0..=model.steps() {
            let rk = measurable_subspace(&terminals, model.filtration().partition(k).cells(), q);
            sequence.extend(rk);
            let ortho = linalg::gram_schmidt(&sequence, w);
            if ortho.len() > found {
                let basis: Matrix = ortho[found..].to_vec();
                found = ortho.len();
                let before = model.filtration().partition_before(k);
                let atoms = before
                    .cells()
                    .iter()
                    .filter(|cell| {
                        cell.iter()
                            .any(|&a| q.charges(a) && basis.iter().any(|b| !b[a].is_zero()))
                    })
                    .cloned()
                    .collect();
                let martingales = basis.iter().map(|b| martingale_of(b, q, model)).collect();
                blocks.push(Block {
                    time: k,
                    basis,
                    martingales,
                    atoms,
                });
            }
        }
    }
    Ok(UnhedgeableDecomposition { residuals, blocks })
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

    fn interior() -> Measure {
        Measure::new(vec![ratio(1, 4), ratio(1, 2), ratio(1, 4)]).unwrap()
    }

    #[test]
    fn gain_of_unit_position_is_the_price() {
        let m = trinomial(vec![]);
        let mut h = DynamicPosition::zeros(&m);
        assert_eq!(terminal_gain(&h, &m).unwrap(), ints(&[0, 0, 0]));
        h.set(1, 0, 0, int(1));
        assert_eq!(terminal_gain(&h, &m).unwrap(), ints(&[1, 0, -1]));
    }

    #[test]
    fn two_period_gain_stays_on_its_cell() {
        // u→{uu,ud}, d→{du,dd}; trade only on the up cell at step 2.
        let m = FilteredModel::new(ModelParts {
            outcomes: vec!["uu".into(), "ud".into(), "du".into(), "dd".into()],
            times: ints(&[0, 1, 2]),
            filtration: FiltrationSpec::Natural,
            prices: vec![vec![ints(&[0, 0, 0, 0]), ints(&[1, 1, -1, -1]), ints(&[2, 0, 0, -2])]],
            claims: vec![],
            prior_support: None,
        })
        .unwrap();
        let mut h = DynamicPosition::zeros(&m);
        h.set(2, 0, 0, int(1));
        assert_eq!(terminal_gain(&h, &m).unwrap(), ints(&[1, -1, 0, 0]));
    }

    #[test]
    fn completeness_examples() {
        let m = trinomial(vec![]);
        let edge = Measure::new(vec![ratio(1, 2), int(0), ratio(1, 2)]).unwrap();
        assert!(is_semistatically_complete(&edge, &m).unwrap().complete);
        let r = is_semistatically_complete(&interior(), &m).unwrap();
        assert!(!r.complete);
        assert_eq!(r.rank, 2);
        let m = trinomial(vec![psi()]);
        assert!(is_semistatically_complete(&interior(), &m).unwrap().complete);
    }

    #[test]
    fn replicate_middle_indicator_with_claim() {
        let m = trinomial(vec![psi()]);
        let Replication::Replicated(s) = replicate(&ints(&[0, 1, 0]), &interior(), &m).unwrap() else {
            panic!("replicable");
        };
        assert_eq!(s.cash, ratio(1, 2));
        assert_eq!(s.statics, vec![int(-1)]);
        assert_eq!(s.dynamic.get(1, 0, 0), &int(0));
        assert_eq!(s.payoff(&m).unwrap(), ints(&[0, 1, 0]));
    }

    #[test]
    fn claim_replicates_itself() {
        let m = trinomial(vec![psi()]);
        let Replication::Replicated(s) = replicate(&psi(), &interior(), &m).unwrap() else {
            panic!("replicable");
        };
        assert_eq!(s.payoff(&m).unwrap(), psi());
    }

    #[test]
    fn middle_indicator_not_replicable_without_claim() {
        let m = trinomial(vec![]);
        let Replication::NotReplicable { residual } = replicate(&ints(&[0, 1, 0]), &interior(), &m).unwrap() else {
            panic!("not replicable");
        };
        assert_eq!(residual, vec![ratio(-1, 2), ratio(1, 2), ratio(-1, 2)]);
    }

    #[test]
    fn uncalibrated_measure_is_rejected() {
        let m = trinomial(vec![psi()]);
        let q = Measure::new(vec![ratio(1, 2), int(0), ratio(1, 2)]).unwrap();
        assert!(matches!(
            is_semistatically_complete(&q, &m),
            Err(HedgingError::NotCalibrated(_))
        ));
    }

    #[test]
    fn jacod_yor_on_trinomial() {
        let r = verify_jacod_yor(&trinomial(vec![])).unwrap();
        assert_eq!(r.vertex_count, 2);
        assert_eq!(r.checks.len(), 3);
        assert!(r.passed());
        assert_eq!(r.checks[2].measure, interior());
        let r = verify_jacod_yor(&trinomial(vec![psi()])).unwrap();
        assert_eq!(r.vertex_count, 1);
        assert!(r.passed());
    }

    #[test]
    fn calibrated_trinomial_decomposes_into_one_block() {
        let m = trinomial(vec![psi()]);
        let d = decompose_unhedgeable(&interior(), &m).unwrap();
        assert_eq!(d.residuals[0][1], psi());
        assert_eq!(d.residuals[0][0], ints(&[0, 0, 0]));
        assert_eq!(d.blocks.len(), 1);
        assert_eq!(d.blocks[0].time, 1);
        assert_eq!(d.blocks[0].atoms, vec![vec![0, 1, 2]]);
        assert!(d.blocks[0].has_single_jump(&interior()));
    }

    #[test]
    fn complete_model_without_claims_has_empty_decomposition() {
        let m = trinomial(vec![]);
        let q = Measure::new(vec![ratio(1, 2), int(0), ratio(1, 2)]).unwrap();
        assert!(decompose_unhedgeable(&q, &m).unwrap().is_empty());
        assert!(matches!(
            decompose_unhedgeable(&interior(), &m),
            Err(HedgingError::NotComplete { .. })
        ));
    }
}
