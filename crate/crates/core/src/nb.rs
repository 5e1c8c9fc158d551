// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! The non-backtracking operator on oriented edges and its relatives.
//!
//! `B[k→l, i→j] = 1` exactly when `j = k` and `i ≠ l`, so `(Bv)[k→l]` sums
//! the values flowing into `k` minus the value on the reversal `l→k`.
//!
//! # Reduced companion form
//!
//! Substituting `t = 1/λ` into the Ihara–Bass identity
//! `det(I − tB) = (1 − t²)^(m−n) det(I − tA + t²(D − I))` and multiplying by
//! `λ^(2m)` gives
//!
//! ```text
//! det(λI − B) = (λ² − 1)^(m−n) · det(λ²I − λA + (D − I)).
//! ```
//!
//! The quadratic matrix polynomial on the right is the characteristic
//! polynomial of the `2n × 2n` block matrix `K = [[A, −(D − I)], [I, 0]]`
//! (eliminate the lower block of `(λI − K)x = 0`). Hence the NB spectrum is the
//! spectrum of `K` together with `m − n` extra copies of `+1` and of `−1`.
//! For a tree `m − n = −1`, and `K` carries one surplus `+1` and one surplus
//! `−1` that are not NB eigenvalues.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{NumAssign, One, Zero};
use thiserror::Error;

use crate::exact::IntMatrix;
use crate::graph::{shell_decomposition, Graph, GraphError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NbError {
    #[error("vector has length {found}, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("B is singular: the 1-shell has {s1} nodes")]
    NonEmptyOneShell { s1: usize },
    #[error("graph has {n} nodes; the exact walk oracle is limited to {max}")]
    SizeGuard { n: usize, max: usize },
    #[error("the new node needs at least one neighbor")]
    EmptyAttachment,
    #[error("attachment set lists node {0} twice")]
    RepeatedAttachment(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Exact(#[from] crate::exact::ExactError),
}

/// Values indexed by the canonical oriented-edge order.
pub type EdgeVector = Vec<Complex64>;

/// Node limit for the brute-force walk counter.
pub const WALK_ORACLE_MAX_NODES: usize = 10;

/// The NB matrix of a graph, held both as a matrix-free operator and as
/// explicit sparse rows.
#[derive(Debug, Clone)]
pub struct NbOperator {
    graph: Graph,
    rows: Vec<Vec<usize>>,
}

impl NbOperator {
    pub fn build(graph: &Graph) -> Self {
        let rows = (0..graph.dim())
            .map(|e| {
                let rev = graph.reverse(e);
                graph.in_edges(graph.source(e)).filter(|&f| f != rev).collect()
            })
            .collect();
        NbOperator { graph: graph.clone(), rows }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Column indices of the ones in row `e`, ascending.
    pub fn row(&self, e: usize) -> &[usize] {
        &self.rows[e]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    fn check_len(&self, len: usize) -> Result<(), NbError> {
        if len == self.dim() {
            Ok(())
        } else {
            Err(NbError::Dimension { expected: self.dim(), found: len })
        }
    }

    /// Sum of `v[i→k]` over the in-neighbors of every node `k`.
    pub fn into_sums<T: NumAssign + Copy>(&self, v: &[T]) -> Vec<T> {
        let g = &self.graph;
        let mut into = vec![T::zero(); g.n()];
        for (e, &x) in v.iter().enumerate() {
            into[g.target(e)] += x;
        }
        into
    }

    /// Sum of `v[k→i]` over the out-neighbors of every node `k`.
    pub fn from_sums<T: NumAssign + Copy>(&self, v: &[T]) -> Vec<T> {
        let g = &self.graph;
        let mut from = vec![T::zero(); g.n()];
        for (e, &x) in v.iter().enumerate() {
            from[g.source(e)] += x;
        }
        from
    }

    /// Matrix-free `Bv`, linear in the number of oriented edges.
    pub fn apply<T: NumAssign + Copy>(&self, v: &[T]) -> Result<Vec<T>, NbError> {
        self.check_len(v.len())?;
        let mut out = vec![T::zero(); v.len()];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    /// `out = Bv` without allocation. Lengths are the caller's responsibility.
    pub fn apply_into<T: NumAssign + Copy>(&self, v: &[T], out: &mut [T]) {
        let g = &self.graph;
        let into = self.into_sums(v);
        for (e, slot) in out.iter_mut().enumerate() {
            *slot = into[g.source(e)] - v[g.reverse(e)];
        }
    }

    /// `Bv` through the explicit sparse rows.
    pub fn apply_explicit<T: NumAssign + Copy>(&self, v: &[T]) -> Result<Vec<T>, NbError> {
        self.check_len(v.len())?;
        Ok(self
            .rows
            .iter()
            .map(|row| row.iter().fold(T::zero(), |acc, &c| acc + v[c]))
            .collect())
    }

    /// `Bᵀv`: `(Bᵀv)[i→j] = from(j) − v[j→i]`.
    pub fn apply_adjoint<T: NumAssign + Copy>(&self, v: &[T]) -> Result<Vec<T>, NbError> {
        self.check_len(v.len())?;
        let g = &self.graph;
        let from = self.from_sums(v);
        Ok((0..v.len()).map(|e| from[g.target(e)] - v[g.reverse(e)]).collect())
    }

    /// `BᵀBv`: `(d_l − 2)·into(l) + v[k→l]`.
    pub fn apply_btb<T: NumAssign + Copy + From<i32>>(&self, v: &[T]) -> Result<Vec<T>, NbError> {
        self.check_len(v.len())?;
        let g = &self.graph;
        let into = self.into_sums(v);
        Ok((0..v.len())
            .map(|e| {
                let l = g.target(e);
                T::from(g.degree(l) as i32 - 2) * into[l] + v[e]
            })
            .collect())
    }

    /// `BBᵀv`: `(d_k − 2)·from(k) + v[k→l]`.
    pub fn apply_bbt<T: NumAssign + Copy + From<i32>>(&self, v: &[T]) -> Result<Vec<T>, NbError> {
        self.check_len(v.len())?;
        let g = &self.graph;
        let from = self.from_sums(v);
        Ok((0..v.len())
            .map(|e| {
                let k = g.source(e);
                T::from(g.degree(k) as i32 - 2) * from[k] + v[e]
            })
            .collect())
    }

    /// Edge reversal `P`: `(Pv)[i→j] = v[j→i]`.
    pub fn apply_p<T: Copy>(&self, v: &[T]) -> Result<Vec<T>, NbError> {
        self.check_len(v.len())?;
        Ok((0..v.len()).map(|e| v[self.graph.reverse(e)]).collect())
    }

    pub fn to_int_matrix(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.dim(), self.dim());
        for (r, row) in self.rows.iter().enumerate() {
            for &c in row {
                m.set(r, c, 1);
            }
        }
        m
    }

    pub fn p_matrix(&self) -> IntMatrix {
        IntMatrix::from_fn(self.dim(), self.dim(), |i, j| i64::from(self.graph.reverse(i) == j))
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (r, row) in self.rows.iter().enumerate() {
            for &c in row {
                m[(r, c)] = Complex64::one();
            }
        }
        m
    }

    pub fn to_dense_real(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (r, row) in self.rows.iter().enumerate() {
            for &c in row {
                m[(r, c)] = 1.0;
            }
        }
        m
    }

    /// `B^p` in exact integers.
    pub fn power(&self, p: u32) -> Result<IntMatrix, NbError> {
        Ok(self.to_int_matrix().checked_pow(p)?)
    }

    /// Closed-form inverse for graphs with empty 1-shell:
    /// row `k→l` is supported on the edges `l→j`, with value `1/(d_l − 1)`
    /// except `(2 − d_l)/(d_l − 1)` on the reversal `l→k`.
    pub fn inverse(&self) -> Result<SparseRational, NbError> {
        let g = &self.graph;
        let shell = shell_decomposition(g);
        if shell.s1 > 0 {
            return Err(NbError::NonEmptyOneShell { s1: shell.s1 });
        }
        let rows = (0..g.dim())
            .map(|e| {
                let l = g.target(e);
                let d = g.degree(l) as i64;
                let rev = g.reverse(e);
                g.out_edges(l)
                    .map(|f| {
                        let num = if f == rev { 2 - d } else { 1 };
                        (f, Rational64::new(num, d - 1))
                    })
                    .collect()
            })
            .collect();
        Ok(SparseRational { dim: g.dim(), rows })
    }

    /// `B · M` for a sparse rational `M`, exactly.
    pub fn mul_rational(&self, m: &SparseRational) -> SparseRational {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut acc = vec![Rational64::zero(); m.dim];
                for &c in row {
                    for &(j, x) in &m.rows[c] {
                        acc[j] += x;
                    }
                }
                acc.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).collect()
            })
            .collect();
        SparseRational { dim: m.dim, rows }
    }
}

/// Sparse square matrix with exact rational entries, stored by rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseRational {
    pub dim: usize,
    pub rows: Vec<Vec<(usize, Rational64)>>,
}

impl SparseRational {
    pub fn is_identity(&self) -> bool {
        self.rows
            .iter()
            .enumerate()
            .all(|(i, row)| row.len() == 1 && row[0].0 == i && row[0].1.is_one())
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, x) in row {
                m[(i, j)] = Complex64::new(*x.numer() as f64 / *x.denom() as f64, 0.0);
            }
        }
        m
    }
}

/// Counts NB-walks of `p + 1` edges that start with `start` and end with
/// `end` by depth-first enumeration. This is the oracle for `(B^p)[end, start]`.
pub fn nb_walk_count(g: &Graph, start: usize, end: usize, p: usize) -> Result<u64, NbError> {
    if g.n() > WALK_ORACLE_MAX_NODES {
        return Err(NbError::SizeGuard { n: g.n(), max: WALK_ORACLE_MAX_NODES });
    }
    for e in [start, end] {
        if e >= g.dim() {
            return Err(NbError::Dimension { expected: g.dim(), found: e });
        }
    }
    fn walk(g: &Graph, current: (usize, usize), end: (usize, usize), steps: usize) -> u64 {
        if steps == 0 {
            return u64::from(current == end);
        }
        let (i, j) = current;
        g.neighbors(j).iter().filter(|&&k| k != i).map(|&k| walk(g, (j, k), end, steps - 1)).sum()
    }
    let s = (g.source(start), g.target(start));
    let t = (g.source(end), g.target(end));
    Ok(walk(g, s, t, p))
}

/// The `2n × 2n` matrix `[[A, −(D − I)], [I, 0]]`.
pub fn reduced_companion(g: &Graph) -> DMatrix<f64> {
    let n = g.n();
    let mut k = DMatrix::zeros(2 * n, 2 * n);
    for &(u, v) in g.edges() {
        k[(u, v)] = 1.0;
        k[(v, u)] = 1.0;
    }
    for u in 0..n {
        k[(u, n + u)] = 1.0 - g.degree(u) as f64;
        k[(n + u, u)] = 1.0;
    }
    k
}

/// Block pieces of the NB matrix after adding a node `c` with the given
/// neighbors. Old ("blue") edges keep the host order; the new ("yellow")
/// edges are ordered `c→u` for each neighbor `u`, then `u→c`.
///
/// ```text
/// B^c = [[B, D],
///        [E, F]]
/// ```
#[derive(Debug, Clone)]
pub struct AdditionBlocks {
    pub neighbors: Vec<usize>,
    pub d: usize,
    pub b: IntMatrix,
    pub d_block: IntMatrix,
    pub e_block: IntMatrix,
    pub f_block: IntMatrix,
    pub x: IntMatrix,
    /// The graph with the new node, which is node `n`.
    pub extended: Graph,
    /// Position of each block-ordered edge in `extended`'s canonical order.
    pub to_canonical: Vec<usize>,
}

impl AdditionBlocks {
    pub fn new(g: &Graph, neighbors: &[usize]) -> Result<Self, NbError> {
        if neighbors.is_empty() {
            return Err(NbError::EmptyAttachment);
        }
        let mut sorted = neighbors.to_vec();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(NbError::RepeatedAttachment(w[0]));
        }
        let extended = g.with_new_node(&sorted)?;
        let c = g.n();
        let dim = g.dim();
        let d = sorted.len();
        let yellow_out = |u: usize| sorted.binary_search(&u).expect("neighbor");
        let yellow_in = |u: usize| d + sorted.binary_search(&u).expect("neighbor");

        let b = NbOperator::build(g).to_int_matrix();
        let mut d_block = IntMatrix::zeros(dim, 2 * d);
        let mut e_block = IntMatrix::zeros(2 * d, dim);
        let mut f_block = IntMatrix::zeros(2 * d, 2 * d);
        for &k in &sorted {
            for e in g.out_edges(k) {
                d_block.set(e, yellow_out(k), 1);
            }
            for e in g.in_edges(k) {
                e_block.set(yellow_in(k), e, 1);
            }
            for &l in &sorted {
                if k != l {
                    f_block.set(yellow_out(l), yellow_in(k), 1);
                }
            }
        }
        let x = d_block.checked_mul(&f_block)?.checked_mul(&e_block)?;

        let mut to_canonical = Vec::with_capacity(dim + 2 * d);
        for e in 0..dim {
            let (u, v) = (g.source(e), g.target(e));
            to_canonical.push(extended.edge_index(u, v).expect("host edge"));
        }
        for &u in &sorted {
            to_canonical.push(extended.edge_index(c, u).expect("new edge"));
        }
        for &u in &sorted {
            to_canonical.push(extended.edge_index(u, c).expect("new edge"));
        }
        Ok(AdditionBlocks {
            neighbors: sorted,
            d,
            b,
            d_block,
            e_block,
            f_block,
            x,
            extended,
            to_canonical,
        })
    }

    /// `[[B, D], [E, F]]` in block order.
    pub fn block_matrix(&self) -> IntMatrix {
        let dim = self.b.rows();
        let total = dim + 2 * self.d;
        IntMatrix::from_fn(total, total, |i, j| match (i < dim, j < dim) {
            (true, true) => self.b.get(i, j),
            (true, false) => self.d_block.get(i, j - dim),
            (false, true) => self.e_block.get(i - dim, j),
            (false, false) => self.f_block.get(i - dim, j - dim),
        })
    }

    /// Closed form `X[k→l, i→j] = a_ck · a_cj · (1 − δ_jk)`.
    pub fn x_closed_form(&self, g: &Graph) -> IntMatrix {
        let adjacent = |u: usize| self.neighbors.binary_search(&u).is_ok();
        IntMatrix::from_fn(g.dim(), g.dim(), |r, s| {
            let k = g.source(r);
            let j = g.target(s);
            i64::from(adjacent(k) && adjacent(j) && j != k)
        })
    }
}
