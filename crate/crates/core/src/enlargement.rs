//! Progressive enlargement by single-jump processes `X 1_{τ ≤ k}`.
//!
//! The enlarged model lives on the atoms of `G_K`; the base filtration is
//! carried over to those atoms (`f_on_g`) so that Azéma supermartingales,
//! compensators and Jeulin-Yor martingales can all be computed on one space.

use num_traits::{Signed, Zero};

use crate::duality::{arbitrage_certificate, robust_price_over, RobustPrice};
use crate::hedging::SemiStaticStrategy;
use crate::linalg::{Matrix, Vector};
use crate::model::{conditional_expectation_on, Filtration, FilteredModel, FiltrationSpec, Measure, ModelError, Partition};
use crate::polytope::{build_constraints, canonical_order, enumerate_extreme_points, VertexSet};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnlargementError {
    #[error("jump {jump}: {what} has length {found}, expected {expected}")]
    Length {
        jump: usize,
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("jump {jump}: negative mark at outcome {outcome}")]
    NegativeMark { jump: usize, outcome: usize },
    #[error("jump {jump}: jump time {time} beyond the horizon at outcome {outcome}")]
    TimeOutOfRange { jump: usize, outcome: usize, time: usize },
    #[error("jump {jump}: positive mark with infinite jump time at outcome {outcome}")]
    MarkWithoutTime { jump: usize, outcome: usize },
    #[error("no jump with index {0}")]
    NoSuchJump(usize),
    #[error("compensator increment at k={k} meets a vanishing survival probability on charged atom {atom}")]
    SingularCompensator { k: usize, atom: usize },
    #[error("integrand at k={k} is not predictable on base cell {cell}")]
    NotPredictable { k: usize, cell: usize },
    #[error("measure has length {found}, expected {expected}")]
    MeasureLength { expected: usize, found: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `X 1_{[τ, T]}` over raw outcomes; `τ = None` means never.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingleJump {
    tau: Vec<Option<usize>>,
    mark: Vec<Rational>,
}

impl SingleJump {
    /// Validates against `n` outcomes and horizon `steps`. `τ` is reset to
    /// never wherever the mark vanishes.
    pub fn new(tau: Vec<Option<usize>>, mark: Vec<Rational>, n: usize, steps: usize) -> Result<Self, EnlargementError> {
        Self::checked(0, tau, mark, n, steps)
    }

    fn checked(
        jump: usize,
        mut tau: Vec<Option<usize>>,
        mark: Vec<Rational>,
        n: usize,
        steps: usize,
    ) -> Result<Self, EnlargementError> {
        for (what, len) in [("tau", tau.len()), ("mark", mark.len())] {
            if len != n {
                return Err(EnlargementError::Length {
                    jump,
                    what,
                    expected: n,
                    found: len,
                });
            }
        }
        for i in 0..n {
            if mark[i].is_negative() {
                return Err(EnlargementError::NegativeMark { jump, outcome: i });
            }
            if mark[i].is_zero() {
                tau[i] = None;
                continue;
            }
            match tau[i] {
                None => return Err(EnlargementError::MarkWithoutTime { jump, outcome: i }),
                Some(t) if t > steps => {
                    return Err(EnlargementError::TimeOutOfRange { jump, outcome: i, time: t })
                }
                _ => {}
            }
        }
        Ok(Self { tau, mark })
    }

    pub fn tau(&self) -> &[Option<usize>] {
        &self.tau
    }

    pub fn mark(&self) -> &[Rational] {
        &self.mark
    }

    /// What the jump reveals by time `k` at outcome `i`.
    fn observed(&self, i: usize, k: usize) -> Option<(usize, Rational)> {
        match self.tau[i] {
            Some(t) if t <= k => Some((t, self.mark[i].clone())),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnlargedModel {
    base: FilteredModel,
    jumps: Vec<SingleJump>,
    g: FilteredModel,
    g_to_f: Vec<usize>,
    f_on_g: Filtration,
    atom_jumps: Vec<SingleJump>,
}

/// Refines the base filtration by the level sets of every `X_i 1_{τ_i ≤ l}`, `l ≤ k`.
pub fn enlarge(model: &FilteredModel, jumps: Vec<SingleJump>) -> Result<EnlargedModel, EnlargementError> {
    let n = model.n_outcomes();
    let steps = model.steps();
    let jumps = jumps
        .into_iter()
        .enumerate()
        .map(|(j, s)| SingleJump::checked(j, s.tau, s.mark, n, steps))
        .collect::<Result<Vec<_>, _>>()?;
    let raw_f = model.raw_filtration();
    let g_cells: Vec<Vec<Vec<usize>>> = (0..=steps)
        .map(|k| {
            raw_f
                .partition(k)
                .split_by(|i| jumps.iter().map(|s| s.observed(i, k)).collect::<Vec<_>>())
                .cells()
                .to_vec()
        })
        .collect();

    let f_atom = model.atoms().cell_index(n);
    let mut parts = model.raw().clone();
    parts.filtration = FiltrationSpec::Explicit(g_cells);
    parts.prior_support = Some(
        (0..n)
            .filter(|&i| model.priors().is_allowed(f_atom[i]))
            .collect(),
    );
    let g = FilteredModel::new(parts)?;

    let reps: Vec<usize> = g.atoms().cells().iter().map(|c| c[0]).collect();
    let g_to_f: Vec<usize> = reps.iter().map(|&i| f_atom[i]).collect();
    let g_atom = g.atoms().cell_index(n);
    let f_on_g = Filtration::new(
        raw_f
            .partitions()
            .iter()
            .map(|p| {
                Partition::from_cells(
                    p.cells()
                        .iter()
                        .map(|cell| {
                            let mut a: Vec<usize> = cell.iter().map(|&i| g_atom[i]).collect();
                            a.sort_unstable();
                            a.dedup();
                            a
                        })
                        .collect(),
                )
            })
            .collect(),
    );
    let atom_jumps = jumps
        .iter()
        .map(|s| SingleJump {
            tau: reps.iter().map(|&i| s.tau[i]).collect(),
            mark: reps.iter().map(|&i| s.mark[i].clone()).collect(),
        })
        .collect();
    Ok(EnlargedModel {
        base: model.clone(),
        jumps,
        g,
        g_to_f,
        f_on_g,
        atom_jumps,
    })
}

impl EnlargedModel {
    pub fn base(&self) -> &FilteredModel {
        &self.base
    }

    pub fn jumps(&self) -> &[SingleJump] {
        &self.jumps
    }

    /// The model under the enlarged filtration, over `G_K` atoms.
    pub fn g_model(&self) -> &FilteredModel {
        &self.g
    }

    pub fn g(&self) -> &Filtration {
        self.g.filtration()
    }

    /// Base filtration expressed on `G_K` atoms.
    pub fn f_on_g(&self) -> &Filtration {
        &self.f_on_g
    }

    /// Base atom containing each enlarged atom.
    pub fn g_to_f(&self) -> &[usize] {
        &self.g_to_f
    }

    /// Jump `i` over enlarged atoms.
    pub fn atom_jump(&self, i: usize) -> Result<&SingleJump, EnlargementError> {
        self.atom_jumps.get(i).ok_or(EnlargementError::NoSuchJump(i))
    }

    /// `F` enlarged by jump `i` alone, over `G_K` atoms.
    pub fn single_jump_filtration(&self, i: usize) -> Result<Filtration, EnlargementError> {
        let s = self.atom_jump(i)?;
        Ok(Filtration::new(
            self.f_on_g
                .partitions()
                .iter()
                .enumerate()
                .map(|(k, p)| p.split_by(|a| s.observed(a, k)))
                .collect(),
        ))
    }

    /// Image of a measure on enlarged atoms under the map to base atoms.
    pub fn pushforward(&self, q: &Measure) -> Measure {
        let mut w = vec![Rational::zero(); self.base.n_atoms()];
        for (a, v) in q.weights().iter().enumerate() {
            w[self.g_to_f[a]] += v;
        }
        Measure::new(w).expect("pushforward of a probability measure")
    }

    fn check(&self, q: &Measure) -> Result<(), EnlargementError> {
        if q.len() != self.g.n_atoms() {
            return Err(EnlargementError::MeasureLength {
                expected: self.g.n_atoms(),
                found: q.len(),
            });
        }
        Ok(())
    }
}

/// `min{k : S_k ≠ 0}` per atom.
pub fn first_move_time(model: &FilteredModel) -> Vec<Option<usize>> {
    (0..model.n_atoms())
        .map(|a| {
            (0..=model.steps()).find(|&k| (0..model.assets()).any(|j| !model.prices().value(j, k, a).is_zero()))
        })
        .collect()
}

fn indicator(f: impl Fn(usize) -> bool, n: usize) -> Vector {
    (0..n)
        .map(|a| Rational::from_integer(if f(a) { 1 } else { 0 }.into()))
        .collect()
}

/// `Z_k = Q(τ > k | 𝓕_k)`, indexed `[k][atom]`.
pub fn azema(em: &EnlargedModel, q: &Measure, jump: usize) -> Result<Matrix, EnlargementError> {
    em.check(q)?;
    let s = em.atom_jump(jump)?;
    let n = q.len();
    Ok((0..=em.base.steps())
        .map(|k| {
            let survive = indicator(|a| s.tau[a].is_none_or(|t| t > k), n);
            em.f_on_g.conditional_expectation(&survive, k, q)
        })
        .collect())
}

/// Increments of the dual predictable projection: `ΔA_0 = E[X 1_{τ=0} | 𝓕_0]`,
/// `ΔA_k = E[X 1_{τ=k} | 𝓕_{k−1}]`.
pub fn compensator(em: &EnlargedModel, q: &Measure, jump: usize) -> Result<Matrix, EnlargementError> {
    em.check(q)?;
    let s = em.atom_jump(jump)?;
    Ok((0..=em.base.steps())
        .map(|k| {
            let x: Vector = (0..q.len())
                .map(|a| if s.tau[a] == Some(k) { s.mark[a].clone() } else { Rational::zero() })
                .collect();
            em.f_on_g.conditional_expectation(&x, k.saturating_sub(1), q)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JeulinYor {
    pub z: Matrix,
    pub da: Matrix,
    /// `M_k`, indexed `[k][atom]`.
    pub m: Matrix,
    /// `(k, cell)` of charged single-jump cells where `E[ΔM_k | 𝓖_{k−1}] ≠ 0`.
    pub violations: Vec<(usize, usize)>,
    /// `ΔA_k` constant on every `𝓕_{k−1}` cell.
    pub predictable: bool,
    /// `X 1_{τ≤k} − A_k` is an `𝔽`-martingale on the support.
    pub compensated: bool,
    /// `E[Z_{k+1} | 𝓕_k] ≤ Z_k`.
    pub supermartingale: bool,
}

impl JeulinYor {
    pub fn holds(&self) -> bool {
        self.violations.is_empty() && self.predictable && self.compensated && self.supermartingale
    }
}

fn constant_on_cells(x: &[Rational], p: &Partition) -> bool {
    p.cells().iter().all(|c| c.iter().all(|&a| x[a] == x[c[0]]))
}

/// `M_k = X 1_{τ≤k} − Σ_{l ≤ k∧τ} ΔA_l / Z_{l−1}` with `Z_{−1} = 1`, and its
/// martingale check against `F` enlarged by this jump alone.
pub fn jeulin_yor(em: &EnlargedModel, q: &Measure, jump: usize) -> Result<JeulinYor, EnlargementError> {
    let z = azema(em, q, jump)?;
    let da = compensator(em, q, jump)?;
    let s = em.atom_jump(jump)?;
    let n = q.len();
    let steps = em.base.steps();
    let f = &em.f_on_g;

    let mut m = Vec::with_capacity(steps + 1);
    let mut running = vec![Rational::zero(); n];
    for l in 0..=steps {
        for a in 0..n {
            if s.tau[a].is_some_and(|t| t < l) || da[l][a].is_zero() {
                continue;
            }
            let z_prev = if l == 0 { Rational::from_integer(1.into()) } else { z[l - 1][a].clone() };
            if z_prev.is_zero() {
                if q.charges(a) {
                    return Err(EnlargementError::SingularCompensator { k: l, atom: a });
                }
                continue;
            }
            running[a] += &da[l][a] / z_prev;
        }
        let mk: Vector = (0..n)
            .map(|a| {
                let jumped = if s.tau[a].is_some_and(|t| t <= l) { s.mark[a].clone() } else { Rational::zero() };
                jumped - &running[a]
            })
            .collect();
        m.push(mk);
    }

    let gi = em.single_jump_filtration(jump)?;
    let mut violations = Vec::new();
    for k in 0..=steps {
        let (inc, p) = if k == 0 {
            (m[0].clone(), f.partition(0))
        } else {
            ((0..n).map(|a| &m[k][a] - &m[k - 1][a]).collect::<Vector>(), gi.partition(k - 1))
        };
        let ce = conditional_expectation_on(p, &inc, q);
        for (c, cell) in p.cells().iter().enumerate() {
            if cell.iter().any(|&a| q.charges(a)) && !ce[cell[0]].is_zero() {
                violations.push((k, c));
            }
        }
    }

    let predictable = (1..=steps).all(|k| constant_on_cells(&da[k], f.partition(k - 1)))
        && constant_on_cells(&da[0], f.partition(0));
    let mut compensated = true;
    let mut a_cum = vec![Rational::zero(); n];
    let mut prev: Option<Vector> = None;
    for k in 0..=steps {
        for a in 0..n {
            a_cum[a] += &da[k][a];
        }
        let y: Vector = (0..n)
            .map(|a| {
                let j = if s.tau[a].is_some_and(|t| t <= k) { s.mark[a].clone() } else { Rational::zero() };
                j - &a_cum[a]
            })
            .collect();
        let (inc, p) = match &prev {
            None => (y.clone(), f.partition(0)),
            Some(pv) => ((0..n).map(|a| &y[a] - &pv[a]).collect::<Vector>(), f.partition(k - 1)),
        };
        let ce = conditional_expectation_on(p, &inc, q);
        if (0..n).any(|a| q.charges(a) && !ce[a].is_zero()) {
            compensated = false;
        }
        prev = Some(y);
    }
    let supermartingale = (0..steps).all(|k| {
        let ce = f.conditional_expectation(&z[k + 1], k, q);
        (0..n).all(|a| !q.charges(a) || ce[a] <= z[k][a])
    });
    Ok(JeulinYor {
        z,
        da,
        m,
        violations,
        predictable,
        compensated,
        supermartingale,
    })
}

/// `F`-predictable `J` agreeing with a `G`-predictable `H` on `{k ≤ τ}`.
/// Both are indexed `[k−1][atom]` for `k = 1..=K`.
pub fn predictable_reduction(h: &[Vector], em: &EnlargedModel, jump: usize) -> Result<Matrix, EnlargementError> {
    let s = em.atom_jump(jump)?;
    let n = em.g.n_atoms();
    let mut out = Vec::with_capacity(h.len());
    for (i, hk) in h.iter().enumerate() {
        let k = i + 1;
        let mut j = vec![Rational::zero(); n];
        for (c, cell) in em.f_on_g.partition(k - 1).cells().iter().enumerate() {
            let alive: Vec<usize> = cell.iter().copied().filter(|&a| s.tau[a].is_none_or(|t| t >= k)).collect();
            let Some(&first) = alive.first() else { continue };
            if alive.iter().any(|&a| hk[a] != hk[first]) {
                return Err(EnlargementError::NotPredictable { k, cell: c });
            }
            for &a in cell {
                j[a] = hk[first].clone();
            }
        }
        out.push(j);
    }
    Ok(out)
}

/// `F_k ∩ {τ > k}` and `G^τ_k ∩ {τ > k}` have the same cells for every `k`.
pub fn traces_coincide(em: &EnlargedModel, jump: usize) -> Result<bool, EnlargementError> {
    let s = em.atom_jump(jump)?;
    let gi = em.single_jump_filtration(jump)?;
    let trace = |p: &Partition, k: usize| -> Vec<Vec<usize>> {
        let mut cells: Vec<Vec<usize>> = p
            .cells()
            .iter()
            .map(|c| c.iter().copied().filter(|&a| s.tau[a].is_none_or(|t| t > k)).collect::<Vec<_>>())
            .filter(|c| !c.is_empty())
            .collect();
        cells.sort();
        cells
    };
    Ok((0..=em.base.steps()).all(|k| trace(em.f_on_g.partition(k), k) == trace(gi.partition(k), k)))
}

/// Charged cells of `g` equal the charged cells of `f` at every time.
pub fn coincide_under(q: &Measure, f: &Filtration, g: &Filtration) -> bool {
    let charged_cells = |p: &Partition| -> Vec<Vec<usize>> {
        let mut cells: Vec<Vec<usize>> = p
            .cells()
            .iter()
            .map(|c| c.iter().copied().filter(|&a| q.charges(a)).collect::<Vec<_>>())
            .filter(|c| !c.is_empty())
            .collect();
        cells.sort();
        cells
    };
    (0..=f.steps()).all(|k| charged_cells(f.partition(k)) == charged_cells(g.partition(k)))
}

/// `𝔽` and `𝔾` coincide under `Q` (a measure on enlarged atoms).
pub fn filtrations_coincide(q: &Measure, em: &EnlargedModel) -> bool {
    coincide_under(q, &em.f_on_g, em.g())
}

/// Lifts of a base measure that put each charged base atom's mass on one
/// enlarged atom and under which the two filtrations coincide.
pub fn coinciding_lifts(q: &Measure, em: &EnlargedModel) -> Vec<Measure> {
    let n = em.g.n_atoms();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); em.base.n_atoms()];
    for a in 0..n {
        members[em.g_to_f[a]].push(a);
    }
    let charged = q.support();
    let mut out = Vec::new();
    let mut choice = vec![0usize; charged.len()];
    loop {
        let mut w = vec![Rational::zero(); n];
        for (slot, &fa) in charged.iter().enumerate() {
            w[members[fa][choice[slot]]] = q.weights()[fa].clone();
        }
        let lift = Measure::new(w).expect("lift preserves total mass");
        if filtrations_coincide(&lift, em) {
            out.push(lift);
        }
        // Odometer over the choices.
        let mut slot = 0;
        loop {
            if slot == charged.len() {
                out.sort_by(canonical_order);
                return out;
            }
            choice[slot] += 1;
            if choice[slot] < members[charged[slot]].len() {
                break;
            }
            choice[slot] = 0;
            slot += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriceComparison {
    pub name: String,
    /// `None` when the payoff is not measurable at the base terminal time.
    pub f: Option<RobustPrice>,
    pub g: RobustPrice,
}

impl PriceComparison {
    /// The informed price never exceeds the uninformed one.
    pub fn dominated(&self) -> bool {
        match (&self.f, &self.g) {
            (_, RobustPrice::Empty) | (None, _) => true,
            (Some(RobustPrice::Value { value: f, .. }), RobustPrice::Value { value: g, .. }) => g <= f,
            (Some(RobustPrice::Empty), RobustPrice::Value { .. }) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InformedReport {
    pub ext_f: VertexSet,
    pub ext_g: VertexSet,
    /// For every base vertex, its lifts under which `𝔽` and `𝔾` coincide.
    pub lifts: Vec<Vec<Measure>>,
    /// Exact comparison of `ext 𝓜(𝔾)` with the coinciding lifts; asserted only without claims.
    pub corollary: Option<bool>,
    pub prices: Vec<PriceComparison>,
    /// Certificate when `𝓜(𝔾) = ∅`.
    pub arbitrage: Option<SemiStaticStrategy>,
}

impl InformedReport {
    pub fn informed_arbitrage(&self) -> bool {
        self.ext_g.is_empty()
    }

    pub fn passed(&self) -> bool {
        self.corollary != Some(false) && self.prices.iter().all(PriceComparison::dominated)
    }
}

/// Compares calibrated vertex sets and robust prices before and after enlargement.
/// Payoffs are given per raw outcome.
pub fn informed_compare(em: &EnlargedModel, payoffs: &[(String, Vector)]) -> Result<InformedReport, EnlargementError> {
    let (ext_f, ext_g) = rayon::join(
        || enumerate_extreme_points(&build_constraints(&em.base)),
        || enumerate_extreme_points(&build_constraints(&em.g)),
    );
    let lifts: Vec<Vec<Measure>> = ext_f.vertices.iter().map(|q| coinciding_lifts(q, em)).collect();
    let corollary = em.base.claims().is_empty().then(|| {
        let mut expected: Vec<Measure> = lifts.iter().flatten().cloned().collect();
        expected.sort_by(canonical_order);
        expected.dedup();
        expected == ext_g.vertices
    });
    let mut prices = Vec::new();
    for (name, v) in payoffs {
        let f = em
            .base
            .outcome_vector_to_atoms(name, v)
            .ok()
            .map(|x| robust_price_over(&x, &ext_f));
        let g = robust_price_over(&em.g.outcome_vector_to_atoms(name, v)?, &ext_g);
        prices.push(PriceComparison {
            name: name.clone(),
            f,
            g,
        });
    }
    let arbitrage = if ext_g.is_empty() { arbitrage_certificate(&em.g) } else { None };
    Ok(InformedReport {
        ext_f,
        ext_g,
        lifts,
        corollary,
        prices,
        arbitrage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParts;
    use crate::rational::{int, ints, ratio};

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn two_atoms() -> FilteredModel {
        FilteredModel::new(ModelParts {
            outcomes: names(&["a", "b"]),
            times: ints(&[0, 1, 2]),
            filtration: FiltrationSpec::Natural,
            prices: vec![vec![ints(&[0, 0]), ints(&[1, -1]), ints(&[1, -1])]],
            claims: vec![],
            prior_support: None,
        })
        .unwrap()
    }

    fn trinomial() -> FilteredModel {
        FilteredModel::new(ModelParts {
            outcomes: names(&["u", "m", "d"]),
            times: ints(&[0, 1]),
            filtration: FiltrationSpec::Natural,
            prices: vec![vec![ints(&[0, 0, 0]), ints(&[1, 0, -1])]],
            claims: vec![],
            prior_support: None,
        })
        .unwrap()
    }

    #[test]
    fn zero_mark_changes_nothing() {
        let m = trinomial();
        let j = SingleJump::new(vec![Some(0); 3], ints(&[0, 0, 0]), 3, 1).unwrap();
        let em = enlarge(&m, vec![j]).unwrap();
        assert_eq!(em.g(), m.filtration());
    }

    #[test]
    fn initial_enlargement_splits_time_zero() {
        let m = trinomial();
        let j = SingleJump::new(vec![Some(0), None, None], ints(&[1, 0, 0]), 3, 1).unwrap();
        let em = enlarge(&m, vec![j]).unwrap();
        assert_eq!(em.g().partition(0).cells(), &[vec![0], vec![1, 2]]);
    }

    #[test]
    fn two_atom_azema_compensator_and_martingale() {
        let m = two_atoms();
        let j = SingleJump::new(vec![Some(1), None], ints(&[1, 0]), 2, 2).unwrap();
        let em = enlarge(&m, vec![j]).unwrap();
        let q = Measure::uniform(2);
        let z = azema(&em, &q, 0).unwrap();
        assert_eq!(z[0], ints(&[1, 1]));
        assert_eq!(z[1], ints(&[0, 1]));
        let da = compensator(&em, &q, 0).unwrap();
        assert_eq!(da[1], vec![ratio(1, 2), ratio(1, 2)]);
        let jy = jeulin_yor(&em, &q, 0).unwrap();
        assert_eq!(jy.m[1], vec![ratio(1, 2), ratio(-1, 2)]);
        assert!(jy.holds());
    }

    #[test]
    fn immediate_jump_is_compensated_at_birth() {
        let m = trinomial();
        let j = SingleJump::new(vec![Some(0); 3], ints(&[2, 2, 2]), 3, 1).unwrap();
        let em = enlarge(&m, vec![j]).unwrap();
        let q = Measure::uniform(3);
        assert_eq!(azema(&em, &q, 0).unwrap()[0], ints(&[0, 0, 0]));
        assert_eq!(compensator(&em, &q, 0).unwrap()[0], ints(&[2, 2, 2]));
        let jy = jeulin_yor(&em, &q, 0).unwrap();
        assert!(jy.m.iter().all(|mk| mk.iter().all(|v| v.is_zero())));
        assert!(jy.holds());
    }

    #[test]
    fn reduction_keeps_pre_jump_values() {
        // F_1 is trivial here, so J_2 must be a single value: the one before the jump.
        let m = FilteredModel::new(ModelParts {
            outcomes: names(&["a", "b"]),
            times: ints(&[0, 1, 2]),
            filtration: FiltrationSpec::Natural,
            prices: vec![vec![ints(&[0, 0]), ints(&[0, 0]), ints(&[1, -1])]],
            claims: vec![],
            prior_support: None,
        })
        .unwrap();
        let j = SingleJump::new(vec![Some(1), None], ints(&[1, 0]), 2, 2).unwrap();
        let em = enlarge(&m, vec![j]).unwrap();
        let h = vec![ints(&[3, 3]), ints(&[7, 5])];
        let r = predictable_reduction(&h, &em, 0).unwrap();
        assert_eq!(r[1], ints(&[5, 5]));
        assert_eq!(r[0], ints(&[3, 3]));
        assert!(traces_coincide(&em, 0).unwrap());
    }

    #[test]
    fn coincidence_examples() {
        let m = trinomial();
        let j = SingleJump::new(vec![Some(0), None, None], ints(&[1, 0, 0]), 3, 1).unwrap();
        let em = enlarge(&m, vec![j]).unwrap();
        assert!(filtrations_coincide(&Measure::dirac(3, 1), &em));
        assert!(!filtrations_coincide(&Measure::uniform(3), &em));
    }

    #[test]
    fn corollary_on_trinomial_initial_enlargement() {
        let m = trinomial();
        let j = SingleJump::new(vec![Some(0), None, None], ints(&[1, 0, 0]), 3, 1).unwrap();
        let em = enlarge(&m, vec![j]).unwrap();
        let r = informed_compare(&em, &[("abs".into(), ints(&[1, 0, 1]))]).unwrap();
        assert_eq!(r.ext_g.vertices, vec![Measure::dirac(3, 1)]);
        assert_eq!(r.corollary, Some(true));
        assert!(r.passed());
        let RobustPrice::Value { value, .. } = &r.prices[0].g else { panic!() };
        assert_eq!(value, &int(0));
    }

    #[test]
    fn first_moves() {
        assert_eq!(first_move_time(&trinomial()), vec![Some(1), None, Some(1)]);
    }
}
