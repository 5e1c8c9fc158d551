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

//! Explicit eigenvector families (kernel, λ = 1, λ = −1), the Ihara–Bass
//! determinant check, and single-leaf peeling with eigenvector lifting.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::SpectrumError;
use crate::exact::{kernel_chain_ranks, rational_rank};
use crate::graph::{cycle_basis, shell_decomposition, Graph, GraphError};
use crate::linalg::{determinant, eig, numerical_rank, CMatrix, LogDet, DEFAULT_EPS_RANK};
use crate::nb::{EdgeVector, NbOperator};
use crate::serde_complex;

#[derive(Debug, Clone, Serialize)]
pub struct LayerCheck {
    pub layer: usize,
    /// Oriented edge `other → node`, pointing toward the leaves.
    pub edge: usize,
    /// `B^layer χ = 0` exactly.
    pub annihilated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelReport {
    /// `χ^{j→i}` for every leaf `i` with neighbor `j`.
    pub basis: Vec<Vec<i64>>,
    /// `dim − rank(B)` over the rationals.
    pub gm: usize,
    /// `dim − rank(B^k)` once the ranks stabilize.
    pub am: usize,
    pub predicted_gm: usize,
    pub predicted_am: usize,
    pub chain_ranks: Vec<usize>,
    pub basis_in_kernel: bool,
    pub layers: Vec<LayerCheck>,
}

impl KernelReport {
    pub fn consistent(&self) -> bool {
        self.gm == self.predicted_gm
            && self.am == self.predicted_am
            && self.basis_in_kernel
            && self.layers.iter().all(|l| l.annihilated)
    }
}

fn chi(dim: usize, e: usize) -> Vec<i64> {
    let mut v = vec![0; dim];
    v[e] = 1;
    v
}

/// Exact description of the eigenvalue 0.
pub fn kernel_report(g: &Graph) -> Result<KernelReport, SpectrumError> {
    let op = NbOperator::build(g);
    let dim = op.dim();
    let int = op.to_int_matrix();
    let shell = shell_decomposition(g);
    let basis: Vec<Vec<i64>> = (0..g.n())
        .filter(|&i| g.degree(i) == 1)
        .map(|i| chi(dim, g.edge_index(g.neighbors(i)[0], i).expect("leaf edge")))
        .collect();
    let mut basis_in_kernel = true;
    for v in &basis {
        basis_in_kernel &= op.apply(v)?.iter().all(|&x| x == 0);
    }
    let mut layers = Vec::new();
    for (depth, layer) in shell.layers.iter().enumerate() {
        for edge in &layer.edges {
            let mut directions = vec![edge.outward];
            if edge.same_layer {
                directions.push(g.reverse(edge.outward));
            }
            for e in directions {
                let mut v = chi(dim, e);
                for _ in 0..=depth {
                    v = op.apply(&v)?;
                }
                layers.push(LayerCheck { layer: depth + 1, edge: e, annihilated: v.iter().all(|&x| x == 0) });
            }
        }
    }
    let chain_ranks = kernel_chain_ranks(&int);
    Ok(KernelReport {
        gm: dim - rational_rank(&int),
        am: dim - chain_ranks.last().copied().unwrap_or(dim),
        predicted_gm: shell.n1,
        predicted_am: if shell.two_core_is_empty() { dim } else { 2 * shell.s1 },
        chain_ranks,
        basis,
        basis_in_kernel,
        layers,
    })
}

/// One circulation per fundamental cycle: `Σ (χ^{u→v} − χ^{v→u})` around
/// the cycle. Each satisfies `Bv = v` in integers.
pub fn eig1_basis(g: &Graph) -> Vec<Vec<i64>> {
    cycle_basis(g)
        .fundamental_cycles
        .iter()
        .map(|c| {
            let mut v = vec![0i64; g.dim()];
            for (a, b) in c.arcs() {
                let e = g.edge_index(a, b).expect("cycle arc");
                v[e] += 1;
                v[g.reverse(e)] -= 1;
            }
            v
        })
        .collect()
}

/// `into(l) = 0` at every node and `v[k→l] + sign·v[l→k] = 0` on every edge.
pub fn satisfies_flow_system(g: &Graph, v: &[i64], sign: i64) -> bool {
    let into_ok = (0..g.n()).all(|l| g.in_edges(l).map(|e| v[e]).sum::<i64>() == 0);
    let edge_ok = (0..g.dim()).all(|e| v[e] + sign * v[g.reverse(e)] == 0);
    into_ok && edge_ok
}

#[derive(Debug, Clone)]
pub struct MinusOneBasis {
    /// Orthonormal basis of `ker(B + I)` from the SVD.
    pub null_space: CMatrix,
    /// One alternating vector per even fundamental cycle.
    pub constructive: Vec<Vec<i64>>,
}

/// Eigenvectors for `λ = −1`, by rank (authoritative) and by construction.
pub fn eig_minus1_basis(g: &Graph) -> Result<MinusOneBasis, SpectrumError> {
    let op = NbOperator::build(g);
    let dim = op.dim();
    let shifted = op.to_dense() + CMatrix::identity(dim, dim);
    let rank = numerical_rank(&shifted, DEFAULT_EPS_RANK)?;
    let null_space = rank.null_space.unwrap_or_else(|| CMatrix::zeros(dim, 0));
    let constructive = cycle_basis(g)
        .fundamental_cycles
        .iter()
        .filter(|c| c.is_even())
        .map(|c| {
            let mut v = vec![0i64; dim];
            for (i, (a, b)) in c.arcs().enumerate() {
                let e = g.edge_index(a, b).expect("cycle arc");
                let s = if i % 2 == 0 { 1 } else { -1 };
                v[e] = s;
                v[g.reverse(e)] = s;
            }
            v
        })
        .collect();
    Ok(MinusOneBasis { null_space, constructive })
}

#[derive(Debug, Clone, Serialize)]
pub struct IharaBassSample {
    #[serde(serialize_with = "serde_complex::complex")]
    pub t: Complex64,
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IharaBassReport {
    pub samples: Vec<IharaBassSample>,
    pub max_residual: f64,
    pub evaluated: usize,
}

/// Evaluates `det(I − tB)` against `(1 − t²)^(m−n) det(I − tA + t²(D − I))`
/// at each sample. When `m < n` the power is moved to the left side. Samples
/// with `|1 − tλ| < 1e−3` for some eigenvalue are skipped.
pub fn verify_ihara_bass(g: &Graph, samples: &[Complex64]) -> Result<IharaBassReport, SpectrumError> {
    let op = NbOperator::build(g);
    let b = op.to_dense();
    let dim = op.dim();
    let n = g.n();
    let eigenvalues = eig(&b)?.values;
    let mut adjacency = DMatrix::<f64>::zeros(n, n);
    for &(u, v) in g.edges() {
        adjacency[(u, v)] = 1.0;
        adjacency[(v, u)] = 1.0;
    }
    let excess = g.m() as i64 - n as i64;
    let mut out = Vec::with_capacity(samples.len());
    let mut max_residual: f64 = 0.0;
    let mut evaluated = 0;
    for &t in samples {
        if let Some(lambda) = eigenvalues.iter().find(|&&l| (Complex64::new(1.0, 0.0) - t * l).norm() < 1e-3) {
            out.push(IharaBassSample {
                t,
                residual: None,
                skipped: Some(format!("t is within 1e-3 of the pole 1/{lambda}")),
            });
            continue;
        }
        let lhs_matrix = CMatrix::identity(dim, dim) - &b * t;
        let rhs_matrix = CMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { Complex64::new(1.0, 0.0) + t * t * (g.degree(i) as f64 - 1.0) } else { Complex64::new(0.0, 0.0) };
            diag - t * adjacency[(i, j)]
        });
        let factor = LogDet::from_complex(Complex64::new(1.0, 0.0) - t * t);
        let mut lhs = determinant(&lhs_matrix)?;
        let mut rhs = determinant(&rhs_matrix)?;
        if excess >= 0 {
            rhs = rhs.mul(factor.powi(excess));
        } else {
            lhs = lhs.mul(factor.powi(-excess));
        }
        let residual = LogDet::relative_difference(lhs, rhs);
        max_residual = max_residual.max(residual);
        evaluated += 1;
        out.push(IharaBassSample { t, residual: Some(residual), skipped: None });
    }
    Ok(IharaBassReport { samples: out, max_residual, evaluated })
}

/// Seeded sample points `r·e^{iθ}` with `r` uniform in `[r_min, r_max]`.
pub fn random_samples(seed: u64, count: usize, r_min: f64, r_max: f64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = rng.gen_range(r_min..=r_max);
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            Complex64::from_polar(r, theta)
        })
        .collect()
}

/// Removes one degree-1 node. Returns the smaller graph and the map from its
/// node ids to the original ids.
pub fn peel_leaf(g: &Graph, leaf: usize) -> Result<(Graph, Vec<usize>), SpectrumError> {
    if leaf >= g.n() {
        return Err(GraphError::UnknownNode { node: leaf }.into());
    }
    if g.degree(leaf) != 1 {
        return Err(SpectrumError::NotALeaf(leaf));
    }
    let keep: Vec<usize> = (0..g.n()).filter(|&u| u != leaf).collect();
    Ok(g.induced(&keep)?)
}

/// Lifts an eigenvector of the peeled graph back to `g`. With leaf `i` and
/// neighbor `j`: `v[i→j] = 0` and `λ·v[j→i] = Σ_k v'[k→j]`; every other
/// coordinate is copied.
pub fn lift_eigenvector(
    g: &Graph,
    peeled: &Graph,
    map: &[usize],
    leaf: usize,
    lambda: Complex64,
    v: &[Complex64],
) -> EdgeVector {
    let mut out = vec![Complex64::new(0.0, 0.0); g.dim()];
    for e in 0..peeled.dim() {
        let (a, b) = (map[peeled.source(e)], map[peeled.target(e)]);
        out[g.edge_index(a, b).expect("peeled edge exists in g")] = v[e];
    }
    let j = g.neighbors(leaf)[0];
    let into_j: Complex64 = g.in_edges(j).map(|e| out[e]).sum();
    out[g.edge_index(j, leaf).expect("leaf edge")] = into_j / lambda;
    out
}
