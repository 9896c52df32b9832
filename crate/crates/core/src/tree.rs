//! Atomic trees: validation, full-tree checks, `σ(𝐓)` expectations, the
//! sufficient conditions for completeness, and extraction from a complete measure.
//!
//! Node cells are sets of atoms. Every test on a node works modulo `Q`-null
//! atoms: only the charged part of a cell matters.

use std::fmt;

use num_traits::Zero;

use crate::hedging::{self, DynamicPosition, HedgingError, HedgingSpan, SpanElement};
use crate::linalg::{self, Matrix, Vector};
use crate::model::{Filtration, FilteredModel, Measure};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    /// Sorted atom indices.
    pub cell: Vec<usize>,
    pub birth: usize,
    pub parent: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomicTree {
    nodes: Vec<TreeNode>,
}

impl AtomicTree {
    pub fn new(nodes: Vec<TreeNode>) -> Self {
        let nodes = nodes
            .into_iter()
            .map(|mut n| {
                n.cell.sort_unstable();
                n.cell.dedup();
                n
            })
            .collect();
        Self { nodes }
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn children(&self, i: usize) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&c| self.nodes[c].parent == Some(i))
            .collect()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.nodes.iter().all(|n| n.parent != Some(i)))
            .collect()
    }

    /// Number of leaves.
    pub fn dim(&self) -> usize {
        self.leaves().len()
    }

    /// Birth time of the leaf containing each atom (`None` off the leaves).
    pub fn zeta(&self, n_atoms: usize) -> Vec<Option<usize>> {
        let mut z = vec![None; n_atoms];
        for l in self.leaves() {
            for &a in &self.nodes[l].cell {
                z[a] = Some(self.nodes[l].birth);
            }
        }
        z
    }

    /// Leaf cells, in node order.
    pub fn leaf_cells(&self) -> Vec<Vec<usize>> {
        self.leaves().into_iter().map(|l| self.nodes[l].cell.clone()).collect()
    }

    /// Indented rendering, one node per line.
    pub fn render(&self, label: impl Fn(&[usize]) -> String) -> String {
        let mut out = String::new();
        let roots: Vec<usize> = (0..self.nodes.len()).filter(|&i| self.nodes[i].parent.is_none()).collect();
        for (i, &r) in roots.iter().enumerate() {
            self.render_node(r, "", i + 1 == roots.len(), true, &label, &mut out);
        }
        out
    }

    fn render_node(
        &self,
        i: usize,
        prefix: &str,
        last: bool,
        root: bool,
        label: &impl Fn(&[usize]) -> String,
        out: &mut String,
    ) {
        let n = &self.nodes[i];
        let branch = if root {
            ""
        } else if last {
            "`-- "
        } else {
            "|-- "
        };
        out.push_str(&format!("{prefix}{branch}{} (t={})\n", label(&n.cell), n.birth));
        let child_prefix = if root {
            prefix.to_string()
        } else if last {
            format!("{prefix}    ")
        } else {
            format!("{prefix}|   ")
        };
        let kids = self.children(i);
        for (j, &c) in kids.iter().enumerate() {
            self.render_node(c, &child_prefix, j + 1 == kids.len(), false, label, out);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("cell is not measurable at the terminal time")]
    NotMeasurable,
    #[error(transparent)]
    Hedging(#[from] HedgingError),
}

/// First `k` with `A` a union of `P_k` cells.
pub fn birth_time(cell: &[usize], filtration: &Filtration) -> Result<usize, TreeError> {
    let mut sorted = cell.to_vec();
    sorted.sort_unstable();
    (0..=filtration.steps())
        .find(|&k| filtration.partition(k).is_union_of_cells(&sorted))
        .ok_or(TreeError::NotMeasurable)
}

fn charged(cell: &[usize], q: &Measure) -> Vec<usize> {
    cell.iter().copied().filter(|&a| q.charges(a)).collect()
}

/// `A` is, up to null atoms, a single charged cell of `P_k`.
fn is_charged_atom(cell: &[usize], k: usize, q: &Measure, model: &FilteredModel) -> bool {
    let c = charged(cell, q);
    if c.is_empty() {
        return false;
    }
    model
        .filtration()
        .partition(k)
        .cells()
        .iter()
        .any(|p| charged(p, q) == c)
}

/// `A` is, up to null atoms, a union of `P_k` cells.
fn is_measurable_mod_null(cell: &[usize], k: usize, q: &Measure, model: &FilteredModel) -> bool {
    let c = charged(cell, q);
    model.filtration().partition(k).cells().iter().all(|p| {
        let pc = charged(p, q);
        let inside = pc.iter().filter(|a| c.binary_search(a).is_ok()).count();
        inside == 0 || inside == pc.len()
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeViolation {
    NotNonNullAtom { node: usize },
    BirthNotMinimal { node: usize },
    Nesting { a: usize, b: usize },
    ParentNotSuperset { node: usize },
    NoMassDrop { node: usize },
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeViolation::NotNonNullAtom { node } => {
                write!(f, "node {node} is not a non-null atom at its birth time")
            }
            TreeViolation::BirthNotMinimal { node } => {
                write!(f, "node {node} is already measurable before its birth time")
            }
            TreeViolation::Nesting { a, b } => write!(f, "nodes {a} and {b} overlap without nesting"),
            TreeViolation::ParentNotSuperset { node } => write!(f, "node {node} is not inside its parent"),
            TreeViolation::NoMassDrop { node } => {
                write!(f, "node {node} carries all the mass of its parent")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TreeReport {
    pub violations: Vec<TreeViolation>,
}

impl TreeReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_atomic_tree(t: &AtomicTree, q: &Measure, model: &FilteredModel) -> TreeReport {
    let mut violations = Vec::new();
    let nodes = t.nodes();
    for (i, n) in nodes.iter().enumerate() {
        if n.birth > model.steps() || !is_charged_atom(&n.cell, n.birth, q, model) {
            violations.push(TreeViolation::NotNonNullAtom { node: i });
            continue;
        }
        if n.birth > 0 && is_measurable_mod_null(&n.cell, n.birth - 1, q, model) {
            violations.push(TreeViolation::BirthNotMinimal { node: i });
        }
    }
    for i in 0..nodes.len() {
        for j in 0..nodes.len() {
            if nodes[i].birth >= nodes[j].birth || i == j {
                continue;
            }
            let (a, b) = (charged(&nodes[i].cell, q), charged(&nodes[j].cell, q));
            let meet = b.iter().filter(|x| a.binary_search(x).is_ok()).count();
            if meet != 0 && meet != b.len() {
                violations.push(TreeViolation::Nesting { a: i, b: j });
            }
        }
    }
    for (i, n) in nodes.iter().enumerate() {
        let Some(p) = n.parent else { continue };
        let parent = charged(&nodes[p].cell, q);
        let child = charged(&n.cell, q);
        if !child.iter().all(|a| parent.binary_search(a).is_ok()) {
            violations.push(TreeViolation::ParentNotSuperset { node: i });
        } else if q.mass(&parent) == q.mass(&child) {
            violations.push(TreeViolation::NoMassDrop { node: i });
        }
    }
    TreeReport { violations }
}

/// Leaves partition the support, and each parent is an atom just before its children are born.
pub fn is_full(t: &AtomicTree, q: &Measure, model: &FilteredModel) -> bool {
    let mut count = vec![0usize; model.n_atoms()];
    for cell in t.leaf_cells() {
        for a in charged(&cell, q) {
            count[a] += 1;
        }
    }
    if q.support().iter().any(|&a| count[a] != 1) {
        return false;
    }
    t.nodes().iter().all(|n| match n.parent {
        None => true,
        Some(p) => is_charged_atom(&t.nodes()[p].cell, n.birth.saturating_sub(1), q, model),
    })
}

/// `Σ_leaves E_Q[X 1_A]/Q(A) · 1_A`, zero off the leaves.
pub fn sigma_tree_expectation(x: &[Rational], t: &AtomicTree, q: &Measure) -> Vector {
    let mut out = vec![Rational::zero(); x.len()];
    for cell in t.leaf_cells() {
        let mass = q.mass(&cell);
        if mass.is_zero() {
            continue;
        }
        let num: Rational = cell.iter().map(|&a| &q.weights()[a] * &x[a]).sum();
        let v = num / mass;
        for &a in &cell {
            out[a] = v.clone();
        }
    }
    out
}

/// `E_Q[X | 𝓕_ζ]` evaluated pathwise; zero where `ζ` is undefined.
pub fn stopped_conditional_expectation(x: &[Rational], zeta: &[Option<usize>], q: &Measure, model: &FilteredModel) -> Vector {
    let by_time: Matrix = (0..=model.steps())
        .map(|k| model.conditional_expectation(x, k, q))
        .collect();
    zeta.iter()
        .enumerate()
        .map(|(a, z)| z.map_or_else(Rational::zero, |k| by_time[k][a].clone()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafCompleteness {
    pub leaf: usize,
    pub rank: usize,
    pub charged: usize,
}

impl LeafCompleteness {
    pub fn holds(&self) -> bool {
        self.rank == self.charged
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremReport {
    pub leaves: Vec<LeafCompleteness>,
    pub claim_rank: usize,
    pub dim: usize,
    /// `(atom, asset, k)` where `S_k ≠ 0` with `k ≤ ζ`.
    pub moves_before_zeta: Vec<(usize, usize, usize)>,
}

impl TheoremReport {
    pub fn leaf_completeness(&self) -> bool {
        self.leaves.iter().all(LeafCompleteness::holds)
    }

    pub fn claim_rank_ok(&self) -> bool {
        self.claim_rank + 1 == self.dim
    }

    pub fn constant_before_zeta(&self) -> bool {
        self.moves_before_zeta.is_empty()
    }

    pub fn passed(&self) -> bool {
        self.leaf_completeness() && self.claim_rank_ok() && self.constant_before_zeta()
    }

    pub fn first_failure(&self) -> Option<String> {
        if let Some(l) = self.leaves.iter().find(|l| !l.holds()) {
            return Some(format!(
                "leaf {} is not complete after its birth (rank {} < {})",
                l.leaf, l.rank, l.charged
            ));
        }
        if !self.claim_rank_ok() {
            return Some(format!(
                "tree expectations of the claims have rank {}, need dim - 1 = {}",
                self.claim_rank,
                self.dim.saturating_sub(1)
            ));
        }
        if let Some(&(a, j, k)) = self.moves_before_zeta.first() {
            return Some(format!("asset {j} moves at k={k} on atom {a} before the end of the tree"));
        }
        None
    }
}

pub fn check_theorem_conditions(t: &AtomicTree, q: &Measure, model: &FilteredModel) -> TheoremReport {
    let n = model.n_atoms();
    let (elements, gains) = hedging::gain_vectors(model);
    let mut leaves = Vec::new();
    for l in t.leaves() {
        let node = &t.nodes()[l];
        let atoms = charged(&node.cell, q);
        let mut rows: Matrix = vec![vec![Rational::from_integer(1.into()); atoms.len()]];
        for (e, g) in elements.iter().zip(&gains) {
            let SpanElement::Gain { k, cell, .. } = *e else { continue };
            if k <= node.birth {
                continue;
            }
            let b = &model.filtration().partition(k - 1).cells()[cell];
            if b.iter().all(|a| node.cell.binary_search(a).is_ok()) {
                rows.push(linalg::restrict(g, &atoms));
            }
        }
        leaves.push(LeafCompleteness {
            leaf: l,
            rank: linalg::rank(&rows, atoms.len()),
            charged: atoms.len(),
        });
    }

    let support = q.support();
    let projected: Matrix = model
        .claims()
        .iter()
        .map(|c| linalg::restrict(&sigma_tree_expectation(&c.payoff, t, q), &support))
        .collect();
    let claim_rank = if projected.is_empty() {
        0
    } else {
        linalg::rank(&projected, support.len())
    };

    let zeta = t.zeta(n);
    let mut moves = Vec::new();
    for &a in &support {
        let Some(z) = zeta[a] else { continue };
        for j in 0..model.assets() {
            for k in 0..=z.min(model.steps()) {
                if !model.prices().value(j, k, a).is_zero() {
                    moves.push((a, j, k));
                }
            }
        }
    }
    TheoremReport {
        leaves,
        claim_rank,
        dim: t.dim(),
        moves_before_zeta: moves,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedTree {
    pub tree: AtomicTree,
    /// `H^i` with `ψ_i = E_Q[ψ_i | σ(𝐓)] + (H^i·S)_T` on the support.
    pub representations: Vec<DynamicPosition>,
    pub conditions: TheoremReport,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeOutcome {
    Tree(ExtractedTree),
    NoTree(String),
}

/// Builds the tree by splitting, at every block time, each block atom into
/// its charged cells at that time. Fails with a diagnostic whenever the block
/// structure does not produce a full tree satisfying the sufficient conditions.
pub fn extract_tree(q: &Measure, model: &FilteredModel) -> Result<TreeOutcome, TreeError> {
    let decomposition = hedging::decompose_unhedgeable(q, model)?;
    let mut nodes: Vec<TreeNode> = model
        .filtration()
        .partition(0)
        .cells()
        .iter()
        .filter(|c| !charged(c, q).is_empty())
        .map(|c| TreeNode {
            cell: c.clone(),
            birth: 0,
            parent: None,
        })
        .collect();

    for block in decomposition.blocks.iter().filter(|b| b.time > 0) {
        let k = block.time;
        for atom in &block.atoms {
            let target = charged(atom, q);
            let tree = AtomicTree::new(nodes.clone());
            let Some(leaf) = tree
                .leaves()
                .into_iter()
                .find(|&l| charged(&nodes[l].cell, q) == target)
            else {
                return Ok(TreeOutcome::NoTree(format!(
                    "unhedgeable part jumping at k={k} is carried by atoms {:?}, which is not a leaf of the tree built so far",
                    atom
                )));
            };
            let parts: Vec<Vec<usize>> = model
                .filtration()
                .partition(k)
                .cells()
                .iter()
                .filter(|c| c.iter().all(|a| nodes[leaf].cell.binary_search(a).is_ok()))
                .filter(|c| !charged(c, q).is_empty())
                .cloned()
                .collect();
            if parts.len() < 2 {
                return Ok(TreeOutcome::NoTree(format!(
                    "leaf {:?} does not split at k={k}",
                    nodes[leaf].cell
                )));
            }
            for cell in parts {
                nodes.push(TreeNode {
                    cell,
                    birth: k,
                    parent: Some(leaf),
                });
            }
        }
    }
    let tree = AtomicTree::new(nodes);

    let report = validate_atomic_tree(&tree, q, model);
    if let Some(v) = report.violations.first() {
        return Ok(TreeOutcome::NoTree(format!("invalid atomic tree: {v}")));
    }
    if !is_full(&tree, q, model) {
        return Ok(TreeOutcome::NoTree("tree is not full".into()));
    }

    let support = q.support();
    let span = HedgingSpan::new(model);
    let gain_idx: Vec<usize> = (0..span.elements.len())
        .filter(|&i| matches!(span.elements[i], SpanElement::Gain { .. }))
        .collect();
    let cols: Matrix = gain_idx
        .iter()
        .map(|&i| linalg::restrict(&span.vectors[i], &support))
        .collect();
    let system = linalg::transpose(&cols, support.len());
    let mut representations = Vec::new();
    for (i, claim) in model.claims().iter().enumerate() {
        let e = sigma_tree_expectation(&claim.payoff, &tree, q);
        let r: Vector = support.iter().map(|&a| &claim.payoff[a] - &e[a]).collect();
        let solution = if cols.is_empty() {
            linalg::is_zero_vec(&r).then(Vec::new)
        } else {
            linalg::solve(&system, cols.len(), &r)
        };
        let Some(c) = solution else {
            return Ok(TreeOutcome::NoTree(format!(
                "claim {i} minus its tree expectation is not a dynamic gain"
            )));
        };
        let mut full = vec![Rational::zero(); span.elements.len()];
        for (&idx, v) in gain_idx.iter().zip(c) {
            full[idx] = v;
        }
        representations.push(span.strategy_from_coefficients(&full, model).dynamic);
    }

    let conditions = check_theorem_conditions(&tree, q, model);
    if let Some(why) = conditions.first_failure() {
        return Ok(TreeOutcome::NoTree(why));
    }
    Ok(TreeOutcome::Tree(ExtractedTree {
        tree,
        representations,
        conditions,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FiltrationSpec, ModelParts};
    use crate::rational::{int, ints, ratio};

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
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

    fn glued() -> (FilteredModel, Measure) {
        let m = FilteredModel::new(ModelParts {
            outcomes: names(&["u1", "m1", "d1", "u2", "m2", "d2"]),
            times: ints(&[0, 1, 2]),
            filtration: FiltrationSpec::Explicit(vec![
                vec![vec![0, 1, 2, 3, 4, 5]],
                vec![vec![0, 1, 2], vec![3, 4, 5]],
                (0..6).map(|i| vec![i]).collect(),
            ]),
            prices: vec![vec![ints(&[0; 6]), ints(&[0; 6]), ints(&[2, 0, -2, 1, 0, -1])]],
            claims: vec![ints(&[2, -2, 2, -1, -2, -1])],
            prior_support: None,
        })
        .unwrap();
        let q = Measure::new(vec![ratio(1, 6), int(0), ratio(1, 6), ratio(1, 3), int(0), ratio(1, 3)]).unwrap();
        (m, q)
    }

    fn root(n: usize) -> TreeNode {
        TreeNode {
            cell: (0..n).collect(),
            birth: 0,
            parent: None,
        }
    }

    #[test]
    fn birth_times() {
        let m = trinomial();
        assert_eq!(birth_time(&[0, 1, 2], m.filtration()).unwrap(), 0);
        assert_eq!(birth_time(&[0], m.filtration()).unwrap(), 1);
        let (g, _) = glued();
        assert_eq!(birth_time(&[0, 1, 2], g.filtration()).unwrap(), 1);
    }

    #[test]
    fn validation_examples() {
        let m = trinomial();
        let q = Measure::new(vec![ratio(1, 4), ratio(1, 2), ratio(1, 4)]).unwrap();
        assert!(validate_atomic_tree(&AtomicTree::new(vec![root(3)]), &q, &m).is_valid());
        let t = AtomicTree::new(vec![
            root(3),
            TreeNode {
                cell: vec![0],
                birth: 1,
                parent: Some(0),
            },
        ]);
        assert!(validate_atomic_tree(&t, &q, &m).is_valid());
        assert!(!is_full(&t, &q, &m));

        let q = Measure::new(vec![int(0), ratio(1, 2), ratio(1, 2)]).unwrap();
        let r = validate_atomic_tree(&t, &q, &m);
        assert_eq!(r.violations, vec![TreeViolation::NotNonNullAtom { node: 1 }]);
    }

    #[test]
    fn glued_tree_is_extracted() {
        let (m, q) = glued();
        let TreeOutcome::Tree(ex) = extract_tree(&q, &m).unwrap() else {
            panic!("expected a tree");
        };
        assert_eq!(ex.tree.dim(), 2);
        assert_eq!(ex.tree.leaf_cells(), vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert!(ex.conditions.passed());
        let e = sigma_tree_expectation(&m.claims()[0].payoff, &ex.tree, &q);
        assert_eq!(e, ints(&[2, 2, 2, -1, -1, -1]));
        let zeta = ex.tree.zeta(6);
        let stopped = stopped_conditional_expectation(&m.claims()[0].payoff, &zeta, &q, &m);
        for a in q.support() {
            assert_eq!(stopped[a], e[a]);
        }
        assert!(is_full(&ex.tree, &q, &m));
    }

    #[test]
    fn trivial_tree_on_interior_trinomial_fails_leaf_completeness() {
        let m = trinomial();
        let q = Measure::new(vec![ratio(1, 4), ratio(1, 2), ratio(1, 4)]).unwrap();
        let r = check_theorem_conditions(&AtomicTree::new(vec![root(3)]), &q, &m);
        assert!(!r.leaf_completeness());
        assert!(r.claim_rank_ok());
    }

    #[test]
    fn complete_model_gives_root_only() {
        let m = trinomial();
        let q = Measure::new(vec![ratio(1, 2), int(0), ratio(1, 2)]).unwrap();
        let TreeOutcome::Tree(ex) = extract_tree(&q, &m).unwrap() else {
            panic!("expected a tree");
        };
        assert_eq!(ex.tree.nodes().len(), 1);
    }

    #[test]
    fn jumping_model_is_complete_without_tree() {
        let m = FilteredModel::new(ModelParts {
            outcomes: names(&["j", "a+", "a-", "b+", "b-"]),
            times: ints(&[0, 1, 2]),
            filtration: FiltrationSpec::Explicit(vec![
                vec![vec![0, 1, 2, 3, 4]],
                vec![vec![0], vec![1, 2], vec![3, 4]],
                (0..5).map(|i| vec![i]).collect(),
            ]),
            prices: vec![vec![ints(&[0; 5]), ints(&[2, -1, -1, -1, -1]), ints(&[2, 1, -3, 0, -2])]],
            claims: vec![vec![ratio(1, 3), ratio(4, 3), ratio(4, 3), ratio(-5, 3), ratio(-5, 3)]],
            prior_support: None,
        })
        .unwrap();
        let q = Measure::new(vec![ratio(1, 3), ratio(1, 6), ratio(1, 6), ratio(1, 6), ratio(1, 6)]).unwrap();
        assert!(hedging::is_semistatically_complete(&q, &m).unwrap().complete);
        assert!(matches!(extract_tree(&q, &m).unwrap(), TreeOutcome::NoTree(_)));
    }

    #[test]
    fn render_shows_nesting() {
        let t = AtomicTree::new(vec![
            root(2),
            TreeNode {
                cell: vec![0],
                birth: 1,
                parent: Some(0),
            },
            TreeNode {
                cell: vec![1],
                birth: 1,
                parent: Some(0),
            },
        ]);
        let s = t.render(|c| format!("{c:?}"));
        assert_eq!(s, "[0, 1] (t=0)\n|-- [0] (t=1)\n`-- [1] (t=1)\n");
    }
}
