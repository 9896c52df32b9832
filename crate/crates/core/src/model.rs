//! Finite filtered market models.
//!
//! A model is assembled from raw [`ModelParts`] (outcomes, a time grid, a
//! refining sequence of partitions, an adapted price array, static claims and a
//! prior support mask). [`FilteredModel::new`] validates the parts and quotients
//! the outcome set by the terminal partition: measures, claims and prices are
//! then indexed by *atoms*, the cells of `P_K`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::rational::{canonical, Rational};

/// Time labels `t_0 = 0 < t_1 < … < t_K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeGrid {
    times: Vec<Rational>,
}

impl TimeGrid {
    pub fn new(times: Vec<Rational>) -> Result<Self, ModelError> {
        let mut report = ValidationReport::default();
        check_times(&times, &mut report);
        if report.is_valid() {
            Ok(Self { times })
        } else {
            Err(ModelError::Invalid(report))
        }
    }

    /// Unit grid `0, 1, …, steps`.
    pub fn unit(steps: usize) -> Self {
        Self {
            times: (0..=steps).map(|k| Rational::from_integer((k as i64).into())).collect(),
        }
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn times(&self) -> &[Rational] {
        &self.times
    }
}

fn check_times(times: &[Rational], report: &mut ValidationReport) {
    if times.len() < 2 {
        report.push(Violation::TooFewTimes { found: times.len() });
        return;
    }
    if !times[0].is_zero() {
        report.push(Violation::TimeOrigin);
    }
    for k in 1..times.len() {
        if times[k] <= times[k - 1] {
            report.push(Violation::TimesNotIncreasing { index: k });
        }
    }
}

/// A set partition of `0..n`, normalized: every cell sorted, cells ordered by
/// their smallest element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    cells: Vec<Vec<usize>>,
}

impl Partition {
    /// Normalizes but does not validate; see [`Partition::defects`].
    pub fn from_cells(cells: Vec<Vec<usize>>) -> Self {
        let mut cells: Vec<Vec<usize>> = cells
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c.dedup();
                c
            })
            .collect();
        cells.sort_by(|a, b| a.first().cmp(&b.first()).then_with(|| a.cmp(b)));
        Self { cells }
    }

    pub fn trivial(n: usize) -> Self {
        Self::from_cells(vec![(0..n).collect()])
    }

    pub fn discrete(n: usize) -> Self {
        Self::from_cells((0..n).map(|i| vec![i]).collect())
    }

    /// Groups `0..n` by a key; cells appear in order of first element.
    pub fn by_key<K: Ord>(n: usize, key: impl Fn(usize) -> K) -> Self {
        let mut groups: BTreeMap<K, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            groups.entry(key(i)).or_default().push(i);
        }
        Self::from_cells(groups.into_values().collect())
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cell index of every element of `0..n`. Assumes `self` partitions `0..n`.
    pub fn cell_index(&self, n: usize) -> Vec<usize> {
        let mut idx = vec![usize::MAX; n];
        for (c, cell) in self.cells.iter().enumerate() {
            for &i in cell {
                if i < n {
                    idx[i] = c;
                }
            }
        }
        idx
    }

    /// Every cell of `self` lies inside a cell of `coarser`.
    pub fn refines(&self, coarser: &Partition, n: usize) -> bool {
        let idx = coarser.cell_index(n);
        self.cells
            .iter()
            .all(|cell| cell.iter().all(|&i| idx[i] == idx[cell[0]]))
    }

    /// Whether `set` (sorted) is a union of cells.
    pub fn is_union_of_cells(&self, set: &[usize]) -> bool {
        self.cells.iter().all(|cell| {
            let inside = cell.iter().filter(|i| set.binary_search(i).is_ok()).count();
            inside == 0 || inside == cell.len()
        })
    }

    /// Cells contained in `set` (sorted), in partition order.
    pub fn cells_within<'a>(&'a self, set: &'a [usize]) -> impl Iterator<Item = (usize, &'a Vec<usize>)> + 'a {
        self.cells
            .iter()
            .enumerate()
            .filter(move |(_, cell)| cell.iter().all(|i| set.binary_search(i).is_ok()))
    }

    /// Common refinement of `self` with the level sets of `key`.
    pub fn split_by<K: Ord>(&self, key: impl Fn(usize) -> K) -> Self {
        let mut out = Vec::new();
        for cell in &self.cells {
            let mut groups: BTreeMap<K, Vec<usize>> = BTreeMap::new();
            for &i in cell {
                groups.entry(key(i)).or_default().push(i);
            }
            out.extend(groups.into_values());
        }
        Self::from_cells(out)
    }

    fn defects(&self, n: usize, k: usize, report: &mut ValidationReport) {
        let mut seen = vec![false; n];
        for (c, cell) in self.cells.iter().enumerate() {
            if cell.is_empty() {
                report.push(Violation::EmptyCell { k, cell: c });
            }
            for &i in cell {
                if i >= n {
                    report.push(Violation::OutcomeOutOfRange { k, outcome: i });
                } else if seen[i] {
                    report.push(Violation::OverlappingCells { k, outcome: i });
                } else {
                    seen[i] = true;
                }
            }
        }
        for (i, s) in seen.iter().enumerate() {
            if !s {
                report.push(Violation::UncoveredOutcome { k, outcome: i });
            }
        }
    }
}

/// Partitions `P_0, …, P_K`, each refining its predecessor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Filtration {
    partitions: Vec<Partition>,
}

impl Filtration {
    pub fn new(partitions: Vec<Partition>) -> Self {
        Self { partitions }
    }

    pub fn steps(&self) -> usize {
        self.partitions.len() - 1
    }

    pub fn partition(&self, k: usize) -> &Partition {
        &self.partitions[k]
    }

    /// `P_{k-1}` with the convention `P_{-1} = P_0`.
    pub fn partition_before(&self, k: usize) -> &Partition {
        &self.partitions[k.saturating_sub(1)]
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    /// `E_Q[X | 𝓕_k]`, zero on `Q`-null cells.
    pub fn conditional_expectation(&self, x: &[Rational], k: usize, q: &Measure) -> Vec<Rational> {
        conditional_expectation_on(self.partition(k), x, q)
    }
}

/// Conditional expectation onto the σ-algebra generated by a partition.
pub fn conditional_expectation_on(p: &Partition, x: &[Rational], q: &Measure) -> Vec<Rational> {
    let w = q.weights();
    let mut out = vec![Rational::zero(); x.len()];
    for cell in p.cells() {
        let mass: Rational = cell.iter().map(|&i| &w[i]).sum();
        if mass.is_zero() {
            continue;
        }
        let num: Rational = cell.iter().map(|&i| &w[i] * &x[i]).sum();
        let v = num / mass;
        for &i in cell {
            out[i] = v.clone();
        }
    }
    out
}

/// Prices `S^j_k(ω)` indexed `[asset][time][outcome]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriceProcess {
    values: Vec<Vec<Vec<Rational>>>,
}

impl PriceProcess {
    pub fn new(values: Vec<Vec<Vec<Rational>>>) -> Self {
        Self { values }
    }

    pub fn assets(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, asset: usize, k: usize, outcome: usize) -> &Rational {
        &self.values[asset][k][outcome]
    }

    /// `S^j_k − S^j_{k−1}` for `k ≥ 1`.
    pub fn increment(&self, asset: usize, k: usize, outcome: usize) -> Rational {
        &self.values[asset][k][outcome] - &self.values[asset][k - 1][outcome]
    }

    pub fn path(&self, asset: usize, k: usize) -> &[Rational] {
        &self.values[asset][k]
    }

    pub fn values(&self) -> &[Vec<Vec<Rational>>] {
        &self.values
    }
}

/// Payoff of a statically traded claim, one value per atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaticClaim {
    pub payoff: Vec<Rational>,
}

/// Atoms that calibrated measures may charge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorSupport {
    allowed: Vec<bool>,
}

impl PriorSupport {
    pub fn all(n: usize) -> Self {
        Self {
            allowed: vec![true; n],
        }
    }

    pub fn new(allowed: Vec<bool>) -> Result<Self, ModelError> {
        if allowed.iter().any(|&a| a) {
            Ok(Self { allowed })
        } else {
            Err(ModelError::Invalid(ValidationReport {
                violations: vec![Violation::EmptyPriorSupport],
            }))
        }
    }

    pub fn allowed(&self) -> &[bool] {
        &self.allowed
    }

    pub fn is_allowed(&self, atom: usize) -> bool {
        self.allowed[atom]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FiltrationSpec {
    /// Generated by the price process.
    Natural,
    /// One partition of the outcome indices per time index.
    Explicit(Vec<Vec<Vec<usize>>>),
}

/// Unvalidated model description over raw outcomes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelParts {
    pub outcomes: Vec<String>,
    pub times: Vec<Rational>,
    pub filtration: FiltrationSpec,
    /// `[asset][time][outcome]`
    pub prices: Vec<Vec<Vec<Rational>>>,
    /// One payoff per outcome for each claim.
    pub claims: Vec<Vec<Rational>>,
    /// Outcome indices priors may charge; `None` means all.
    pub prior_support: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoOutcomes,
    DuplicateOutcome { index: usize },
    TooFewTimes { found: usize },
    TimeOrigin,
    TimesNotIncreasing { index: usize },
    FiltrationLength { expected: usize, found: usize },
    EmptyCell { k: usize, cell: usize },
    OutcomeOutOfRange { k: usize, outcome: usize },
    OverlappingCells { k: usize, outcome: usize },
    UncoveredOutcome { k: usize, outcome: usize },
    Refinement { k: usize, cell: usize },
    NoAssets,
    PriceShape { asset: usize },
    InitialPrice { asset: usize, outcome: usize },
    Adaptedness { asset: usize, k: usize, cell: usize },
    ClaimLength { claim: usize },
    ClaimNotTerminal { claim: usize, cell: usize },
    PriorOutOfRange { index: usize },
    EmptyPriorSupport,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NoOutcomes => write!(f, "outcome set is empty"),
            DuplicateOutcome { index } => write!(f, "outcome label {index} is duplicated"),
            TooFewTimes { found } => write!(f, "time grid needs at least 2 labels, found {found}"),
            TimeOrigin => write!(f, "time grid must start at 0"),
            TimesNotIncreasing { index } => write!(f, "time labels not strictly increasing at index {index}"),
            FiltrationLength { expected, found } => {
                write!(f, "filtration has {found} partitions, expected {expected}")
            }
            EmptyCell { k, cell } => write!(f, "partition {k}: cell {cell} is empty"),
            OutcomeOutOfRange { k, outcome } => write!(f, "partition {k}: outcome {outcome} out of range"),
            OverlappingCells { k, outcome } => write!(f, "partition {k}: outcome {outcome} lies in two cells"),
            UncoveredOutcome { k, outcome } => write!(f, "partition {k}: outcome {outcome} not covered"),
            Refinement { k, cell } => {
                write!(f, "refinement violated at k={k}: cell {cell} straddles cells of partition {}", k - 1)
            }
            NoAssets => write!(f, "no dynamically traded asset"),
            PriceShape { asset } => write!(f, "price array of asset {asset} has the wrong shape"),
            InitialPrice { asset, outcome } => {
                write!(f, "asset {asset}: initial price must be 0 (outcome {outcome})")
            }
            Adaptedness { asset, k, cell } => {
                write!(f, "adaptedness violated at k={k}: asset {asset} not constant on cell {cell}")
            }
            ClaimLength { claim } => write!(f, "claim {claim} has the wrong length"),
            ClaimNotTerminal { claim, cell } => {
                write!(f, "claim {claim} is not constant on terminal cell {cell}")
            }
            PriorOutOfRange { index } => write!(f, "prior support index {index} out of range"),
            EmptyPriorSupport => write!(f, "prior support is empty"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid model:\n{0}")]
    Invalid(ValidationReport),
    #[error("expected a vector of length {expected}, found {found}")]
    Length { expected: usize, found: usize },
    #[error("measure weight {index} is negative")]
    NegativeWeight { index: usize },
    #[error("measure weights sum to {0}, not 1")]
    WeightSum(String),
    #[error("measure charges atom {atom} outside the prior support")]
    OutsidePriors { atom: usize },
    #[error("{what} is not constant on terminal atom {atom}")]
    NotTerminalMeasurable { what: String, atom: usize },
}

/// Coarsest partitions making `S_0, …, S_k` constant on each cell.
pub fn natural_filtration(prices: &PriceProcess) -> Filtration {
    let n = prices.values.first().and_then(|a| a.first()).map_or(0, Vec::len);
    let steps = prices.values.first().map_or(0, |a| a.len().saturating_sub(1));
    let partitions = (0..=steps)
        .map(|k| {
            Partition::by_key(n, |i| {
                (0..prices.assets())
                    .flat_map(|j| (0..=k).map(move |l| (j, l)))
                    .map(|(j, l)| prices.values[j][l][i].clone())
                    .collect::<Vec<_>>()
            })
        })
        .collect();
    Filtration::new(partitions)
}

fn prices_well_shaped(parts: &ModelParts, report: &mut ValidationReport) -> bool {
    let n = parts.outcomes.len();
    let steps = parts.times.len();
    let mut ok = true;
    for (j, a) in parts.prices.iter().enumerate() {
        if a.len() != steps || a.iter().any(|row| row.len() != n) {
            report.push(Violation::PriceShape { asset: j });
            ok = false;
        }
    }
    ok
}

fn resolve_filtration(parts: &ModelParts) -> Filtration {
    match &parts.filtration {
        FiltrationSpec::Natural => natural_filtration(&PriceProcess::new(parts.prices.clone())),
        FiltrationSpec::Explicit(ps) => {
            Filtration::new(ps.iter().cloned().map(Partition::from_cells).collect())
        }
    }
}

/// Lists every violated structural invariant of a raw model description.
pub fn validate_model(parts: &ModelParts) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = parts.outcomes.len();
    if n == 0 {
        report.push(Violation::NoOutcomes);
    }
    for i in 0..n {
        if parts.outcomes[..i].contains(&parts.outcomes[i]) {
            report.push(Violation::DuplicateOutcome { index: i });
        }
    }
    check_times(&parts.times, &mut report);
    if parts.prices.is_empty() {
        report.push(Violation::NoAssets);
    }
    let shaped = prices_well_shaped(parts, &mut report);
    if !report.is_valid() {
        return report;
    }

    let filtration = resolve_filtration(parts);
    if filtration.partitions.len() != parts.times.len() {
        report.push(Violation::FiltrationLength {
            expected: parts.times.len(),
            found: filtration.partitions.len(),
        });
        return report;
    }
    let before = report.violations.len();
    for (k, p) in filtration.partitions.iter().enumerate() {
        p.defects(n, k, &mut report);
    }
    let partitions_ok = report.violations.len() == before;
    if partitions_ok {
        for k in 1..filtration.partitions.len() {
            let prev = filtration.partitions[k - 1].cell_index(n);
            for (c, cell) in filtration.partitions[k].cells.iter().enumerate() {
                if cell.iter().any(|&i| prev[i] != prev[cell[0]]) {
                    report.push(Violation::Refinement { k, cell: c });
                }
            }
        }
    }

    if shaped {
        for (j, a) in parts.prices.iter().enumerate() {
            for (i, v) in a[0].iter().enumerate() {
                if !v.is_zero() {
                    report.push(Violation::InitialPrice { asset: j, outcome: i });
                    break;
                }
            }
            if partitions_ok {
                for (k, p) in filtration.partitions.iter().enumerate() {
                    for (c, cell) in p.cells.iter().enumerate() {
                        if cell.iter().any(|&i| a[k][i] != a[k][cell[0]]) {
                            report.push(Violation::Adaptedness { asset: j, k, cell: c });
                        }
                    }
                }
            }
        }
    }

    let terminal = filtration.partitions.last();
    for (c, claim) in parts.claims.iter().enumerate() {
        if claim.len() != n {
            report.push(Violation::ClaimLength { claim: c });
            continue;
        }
        if let (true, Some(p)) = (partitions_ok, terminal) {
            for (ci, cell) in p.cells.iter().enumerate() {
                if cell.iter().any(|&i| claim[i] != claim[cell[0]]) {
                    report.push(Violation::ClaimNotTerminal { claim: c, cell: ci });
                }
            }
        }
    }

    if let Some(ps) = &parts.prior_support {
        if ps.is_empty() {
            report.push(Violation::EmptyPriorSupport);
        }
        for &i in ps {
            if i >= n {
                report.push(Violation::PriorOutOfRange { index: i });
            }
        }
    }
    report
}

/// A validated model whose measures live on the cells of `P_K` (atoms).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilteredModel {
    raw: ModelParts,
    raw_filtration: Filtration,
    atoms: Partition,
    atom_labels: Vec<String>,
    grid: TimeGrid,
    filtration: Filtration,
    prices: PriceProcess,
    claims: Vec<StaticClaim>,
    priors: PriorSupport,
}

impl FilteredModel {
    pub fn new(parts: ModelParts) -> Result<Self, ModelError> {
        let report = validate_model(&parts);
        if !report.is_valid() {
            return Err(ModelError::Invalid(report));
        }
        let raw_filtration = resolve_filtration(&parts);
        let n = parts.outcomes.len();
        let atoms = raw_filtration.partitions.last().expect("K ≥ 1").clone();
        let atom_of = atoms.cell_index(n);
        let reps: Vec<usize> = atoms.cells.iter().map(|c| c[0]).collect();

        let atom_labels = atoms
            .cells
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&i| parts.outcomes[i].as_str())
                    .collect::<Vec<_>>()
                    .join("|")
            })
            .collect();
        let filtration = Filtration::new(
            raw_filtration
                .partitions
                .iter()
                .map(|p| {
                    Partition::from_cells(
                        p.cells
                            .iter()
                            .map(|cell| {
                                let mut a: Vec<usize> = cell.iter().map(|&i| atom_of[i]).collect();
                                a.sort_unstable();
                                a.dedup();
                                a
                            })
                            .collect(),
                    )
                })
                .collect(),
        );
        let prices = PriceProcess::new(
            parts
                .prices
                .iter()
                .map(|a| {
                    a.iter()
                        .map(|row| reps.iter().map(|&i| row[i].clone()).collect())
                        .collect()
                })
                .collect(),
        );
        let claims = parts
            .claims
            .iter()
            .map(|c| StaticClaim {
                payoff: reps.iter().map(|&i| c[i].clone()).collect(),
            })
            .collect();
        let allowed = match &parts.prior_support {
            None => vec![true; atoms.len()],
            Some(ps) => {
                let mut a = vec![false; atoms.len()];
                for &i in ps {
                    a[atom_of[i]] = true;
                }
                a
            }
        };
        let grid = TimeGrid::new(parts.times.clone())?;
        Ok(Self {
            raw: parts,
            raw_filtration,
            atoms,
            atom_labels,
            grid,
            filtration,
            prices,
            claims,
            priors: PriorSupport::new(allowed)?,
        })
    }

    pub fn raw(&self) -> &ModelParts {
        &self.raw
    }

    /// The filtration over raw outcomes (before quotienting).
    pub fn raw_filtration(&self) -> &Filtration {
        &self.raw_filtration
    }

    /// Raw outcome indices of every atom.
    pub fn atoms(&self) -> &Partition {
        &self.atoms
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn n_outcomes(&self) -> usize {
        self.raw.outcomes.len()
    }

    pub fn atom_labels(&self) -> &[String] {
        &self.atom_labels
    }

    pub fn atom_index(&self, label: &str) -> Option<usize> {
        self.atom_labels.iter().position(|l| l == label).or_else(|| {
            let o = self.raw.outcomes.iter().position(|l| l == label)?;
            self.atoms.cells.iter().position(|c| c.contains(&o))
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn steps(&self) -> usize {
        self.grid.steps()
    }

    pub fn filtration(&self) -> &Filtration {
        &self.filtration
    }

    pub fn prices(&self) -> &PriceProcess {
        &self.prices
    }

    pub fn assets(&self) -> usize {
        self.prices.assets()
    }

    pub fn claims(&self) -> &[StaticClaim] {
        &self.claims
    }

    pub fn priors(&self) -> &PriorSupport {
        &self.priors
    }

    pub fn conditional_expectation(&self, x: &[Rational], k: usize, q: &Measure) -> Vec<Rational> {
        self.filtration.conditional_expectation(x, k, q)
    }

    /// Checks length and prior support of a measure over atoms.
    pub fn check_measure(&self, q: &Measure) -> Result<(), ModelError> {
        if q.len() != self.n_atoms() {
            return Err(ModelError::Length {
                expected: self.n_atoms(),
                found: q.len(),
            });
        }
        for (a, w) in q.weights().iter().enumerate() {
            if !w.is_zero() && !self.priors.is_allowed(a) {
                return Err(ModelError::OutsidePriors { atom: a });
            }
        }
        Ok(())
    }

    /// Converts a per-outcome vector into a per-atom one; it must be constant on atoms.
    pub fn outcome_vector_to_atoms(&self, what: &str, v: &[Rational]) -> Result<Vec<Rational>, ModelError> {
        if v.len() != self.n_outcomes() {
            return Err(ModelError::Length {
                expected: self.n_outcomes(),
                found: v.len(),
            });
        }
        self.atoms
            .cells
            .iter()
            .enumerate()
            .map(|(a, cell)| {
                if cell.iter().any(|&i| v[i] != v[cell[0]]) {
                    Err(ModelError::NotTerminalMeasurable {
                        what: what.to_string(),
                        atom: a,
                    })
                } else {
                    Ok(v[cell[0]].clone())
                }
            })
            .collect()
    }
}

/// A probability measure over atoms, exact and normalized.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Measure {
    weights: Vec<Rational>,
}

impl Measure {
    pub fn new(weights: Vec<Rational>) -> Result<Self, ModelError> {
        if let Some(i) = weights.iter().position(Signed::is_negative) {
            return Err(ModelError::NegativeWeight { index: i });
        }
        let sum: Rational = weights.iter().sum();
        if sum != Rational::from_integer(1.into()) {
            return Err(ModelError::WeightSum(canonical(&sum)));
        }
        Ok(Self { weights })
    }

    /// Scales nonnegative weights with positive total to sum to one.
    pub fn normalized(weights: Vec<Rational>) -> Result<Self, ModelError> {
        let sum: Rational = weights.iter().sum();
        if sum.is_zero() {
            return Err(ModelError::WeightSum("0".into()));
        }
        Self::new(weights.into_iter().map(|w| w / &sum).collect())
    }

    pub fn dirac(n: usize, i: usize) -> Self {
        let mut w = vec![Rational::zero(); n];
        w[i] = Rational::from_integer(1.into());
        Self { weights: w }
    }

    pub fn uniform(n: usize) -> Self {
        let w = Rational::new(1.into(), (n as i64).into());
        Self {
            weights: vec![w; n],
        }
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len())
            .filter(|&i| !self.weights[i].is_zero())
            .collect()
    }

    pub fn charges(&self, i: usize) -> bool {
        !self.weights[i].is_zero()
    }

    pub fn mass(&self, set: &[usize]) -> Rational {
        set.iter().map(|&i| &self.weights[i]).sum()
    }

    pub fn expectation(&self, x: &[Rational]) -> Rational {
        crate::linalg::dot(&self.weights, x)
    }

    /// Convex combination `Σ λ_i Q_i`; `lambdas` must be nonnegative and sum to one.
    pub fn mixture(parts: &[(Rational, &Measure)]) -> Result<Self, ModelError> {
        let n = parts.first().map_or(0, |(_, m)| m.len());
        let mut w = vec![Rational::zero(); n];
        for (l, m) in parts {
            crate::linalg::axpy(l, &m.weights, &mut w);
        }
        Self::new(w)
    }
}
