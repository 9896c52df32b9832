//! Dense exact linear algebra over the rationals.
//!
//! Matrices are row-major `Vec<Vec<Rational>>`. Sizes in this crate are tiny
//! (tens of rows and columns), so nothing here is clever about fill-in.

use num_traits::{One, Zero};

use crate::rational::Rational;

pub type Vector = Vec<Rational>;
pub type Matrix = Vec<Vector>;

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// `Σ w_i a_i b_i`: the inner product of `L²(w)`.
pub fn weighted_dot(a: &[Rational], b: &[Rational], w: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), w.len());
    let mut acc = Rational::zero();
    for ((x, y), wi) in a.iter().zip(b).zip(w) {
        if wi.is_zero() || x.is_zero() || y.is_zero() {
            continue;
        }
        acc += x * y * wi;
    }
    acc
}

pub fn is_zero_vec(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn axpy(alpha: &Rational, x: &[Rational], y: &mut [Rational]) {
    if alpha.is_zero() {
        return;
    }
    for (yi, xi) in y.iter_mut().zip(x) {
        if !xi.is_zero() {
            *yi += alpha * xi;
        }
    }
}

pub fn scaled(alpha: &Rational, x: &[Rational]) -> Vector {
    x.iter().map(|v| alpha * v).collect()
}

pub fn transpose(m: &[Vector], ncols: usize) -> Matrix {
    (0..ncols)
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

/// Keep only the listed coordinates of every vector.
pub fn restrict(v: &[Rational], coords: &[usize]) -> Vector {
    coords.iter().map(|&i| v[i].clone()).collect()
}

/// Reduced row echelon form.
#[derive(Debug, Clone)]
pub struct Rref {
    /// Nonzero rows of the reduced matrix, one per pivot.
    pub rows: Matrix,
    /// Pivot column of each row, strictly increasing.
    pub pivots: Vec<usize>,
    /// For each reduced row, which input rows were combined last into the pivot position;
    /// `basis_rows[i]` is the index of the original row that supplied pivot `i`.
    pub basis_rows: Vec<usize>,
    pub ncols: usize,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

pub fn rref(m: &[Vector], ncols: usize) -> Rref {
    let mut a: Matrix = m.to_vec();
    let mut origin: Vec<usize> = (0..a.len()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == a.len() {
            break;
        }
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        origin.swap(r, p);
        let inv = Rational::one() / &a[r][c];
        for v in a[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = -row[c].clone();
                axpy(&f, &pivot_row, row);
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    origin.truncate(r);
    Rref {
        rows: a,
        pivots,
        basis_rows: origin,
        ncols,
    }
}

pub fn rank(m: &[Vector], ncols: usize) -> usize {
    rref(m, ncols).rank()
}

/// Rank of a list of vectors of common length.
pub fn rank_of(vectors: &[Vector]) -> usize {
    match vectors.first() {
        None => 0,
        Some(v) => rank(vectors, v.len()),
    }
}

/// Basis of `{x : M x = 0}`; one vector per free column, free entry set to 1.
pub fn nullspace(m: &[Vector], ncols: usize) -> Matrix {
    let red = rref(m, ncols);
    let mut is_pivot = vec![false; ncols];
    for &p in &red.pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|&c| !is_pivot[c]) {
        let mut x = vec![Rational::zero(); ncols];
        x[free] = Rational::one();
        for (row, &p) in red.rows.iter().zip(&red.pivots) {
            x[p] = -row[free].clone();
        }
        basis.push(x);
    }
    basis
}

/// A solution of `M x = b` with every non-pivot coordinate set to zero, or `None`
/// when the system is inconsistent. Pivots are chosen left to right, so earlier
/// columns are preferred.
pub fn solve(m: &[Vector], ncols: usize, b: &[Rational]) -> Option<Vector> {
    let aug: Matrix = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let red = rref(&aug, ncols + 1);
    if red.pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![Rational::zero(); ncols];
    for (row, &p) in red.rows.iter().zip(&red.pivots) {
        x[p] = row[ncols].clone();
    }
    Some(x)
}

/// Indices of a maximal linearly independent subfamily, chosen greedily in order.
pub fn independent_subset(vectors: &[Vector]) -> Vec<usize> {
    let Some(first) = vectors.first() else {
        return Vec::new();
    };
    // Column echelon of the vectors-as-columns matrix: pivots = chosen vectors.
    let cols = transpose(vectors, first.len());
    rref(&cols, vectors.len()).pivots
}

/// Gram-Schmidt under `⟨x, y⟩ = Σ w x y`, without normalization. Vectors that
/// are zero in `L²(w)` after projection are dropped.
pub fn gram_schmidt(vectors: &[Vector], w: &[Rational]) -> Matrix {
    let mut basis: Matrix = Vec::new();
    let mut norms: Vec<Rational> = Vec::new();
    for v in vectors {
        let mut u = v.clone();
        for (b, nb) in basis.iter().zip(&norms) {
            let c = weighted_dot(&u, b, w) / nb;
            axpy(&-c, b, &mut u);
        }
        let n = weighted_dot(&u, &u, w);
        if !n.is_zero() {
            basis.push(u);
            norms.push(n);
        }
    }
    basis
}

/// Orthogonal projection of `x` onto the span of an orthogonal family under `w`.
pub fn project(x: &[Rational], orthogonal: &[Vector], w: &[Rational]) -> Vector {
    let mut p = vec![Rational::zero(); x.len()];
    for b in orthogonal {
        let nb = weighted_dot(b, b, w);
        let c = weighted_dot(x, b, w) / nb;
        axpy(&c, b, &mut p);
    }
    p
}

/// Determinant by elimination; used for small certificate checks.
pub fn determinant(m: &[Vector]) -> Rational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= &a[c][c];
        let pivot = a[c].clone();
        for row in a.iter_mut().skip(c + 1) {
            if !row[c].is_zero() {
                let f = -(&row[c] / &pivot[c]);
                axpy(&f, &pivot, row);
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ints, ratio};

    #[test]
    fn nullspace_of_trinomial_constraints() {
        // q_u - q_d = 0, q_u + q_m + q_d = 1 (homogeneous part)
        let m = vec![ints(&[1, 0, -1]), ints(&[1, 1, 1])];
        let ns = nullspace(&m, 3);
        assert_eq!(ns, vec![ints(&[1, -2, 1])]);
    }

    #[test]
    fn solve_prefers_leading_columns() {
        // x + y = 2 has basic solution (2, 0).
        let m = vec![ints(&[1, 1])];
        assert_eq!(solve(&m, 2, &ints(&[2])).unwrap(), ints(&[2, 0]));
        // inconsistent
        let m = vec![ints(&[1, 1]), ints(&[2, 2])];
        assert!(solve(&m, 2, &ints(&[1, 3])).is_none());
    }

    #[test]
    fn gram_schmidt_is_orthogonal_under_weights() {
        let w = vec![ratio(1, 4), ratio(1, 2), ratio(1, 4)];
        let vs = vec![ints(&[1, 1, 1]), ints(&[1, 0, -1]), ints(&[1, 0, 1])];
        let b = gram_schmidt(&vs, &w);
        assert_eq!(b.len(), 3);
        for i in 0..3 {
            for j in 0..i {
                assert_eq!(weighted_dot(&b[i], &b[j], &w), int(0));
            }
        }
    }

    #[test]
    fn independent_subset_greedy() {
        let vs = vec![ints(&[1, 0]), ints(&[2, 0]), ints(&[0, 1])];
        assert_eq!(independent_subset(&vs), vec![0, 2]);
    }

    #[test]
    fn determinant_small() {
        let m = vec![ints(&[2, 1]), ints(&[1, 3])];
        assert_eq!(determinant(&m), int(5));
    }
}
