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

//! Block diagonalization `B = QVQᵀP + RUR*` for diagonalizable `B`: unit
//! eigenvectors are orthonormal, the others are normalized against the
//! symmetric bilinear form `⟨x, y⟩ = xᵀPy`.

use num_complex::Complex64;
use serde::Serialize;

use super::{Class, SpectrumError, SpectrumReport};
use crate::graph::Graph;
use crate::linalg::{CMatrix, CVector};
use crate::nb::NbOperator;
use crate::serde_complex;

#[derive(Debug, Clone, Serialize)]
pub struct DiagonalizationResiduals {
    /// `max |QᵀPQ − I|`.
    pub qt_p_q: f64,
    /// `max |R*R − I|`.
    pub r_star_r: f64,
    /// `max |QᵀPR|`.
    pub qt_p_r: f64,
    /// `max |R*Q|`.
    pub r_star_q: f64,
    /// `‖QVQᵀP + RUR* − B‖_F / ‖B‖_F`.
    pub reconstruction: f64,
    /// Largest `‖(vᵀP)B − λ vᵀP‖ / ‖v‖` over all columns.
    pub left_eigenvector: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagonalizationBlocks {
    #[serde(skip)]
    pub q: CMatrix,
    #[serde(skip)]
    pub r: CMatrix,
    #[serde(serialize_with = "serde_complex::complex_vec")]
    pub v: Vec<Complex64>,
    #[serde(serialize_with = "serde_complex::complex_vec")]
    pub u: Vec<Complex64>,
    pub residuals: DiagonalizationResiduals,
    /// Clusters where P-orthogonality was imposed by construction rather
    /// than following from distinct eigenvalues.
    pub relaxed: Vec<String>,
}

fn p_form(g: &Graph, x: &CVector, y: &CVector) -> Complex64 {
    (0..g.dim()).map(|e| x[e] * y[g.reverse(e)]).sum()
}

fn orthonormalize(basis: &CMatrix) -> Vec<CVector> {
    let mut out: Vec<CVector> = Vec::new();
    for j in 0..basis.ncols() {
        let mut w = basis.column(j).into_owned();
        for _ in 0..2 {
            for q in &out {
                let c = q.dotc(&w);
                w -= q * c;
            }
        }
        let norm = w.norm();
        if norm > 1e-12 {
            out.push(w / Complex64::new(norm, 0.0));
        }
    }
    out
}

/// Gram–Schmidt for `⟨x, y⟩ = xᵀPy`. Picks the remaining vector with the
/// largest self-product; if all are P-isotropic, tries pairwise sums.
fn p_orthonormalize(g: &Graph, basis: &CMatrix) -> (Vec<CVector>, bool) {
    let mut pool: Vec<CVector> = (0..basis.ncols()).map(|j| basis.column(j).into_owned()).collect();
    let mut out = Vec::new();
    let mut degenerate = false;
    while !pool.is_empty() {
        let score = |w: &CVector| p_form(g, w, w).norm() / w.norm_squared().max(f64::MIN_POSITIVE);
        let (best, best_score) = pool
            .iter()
            .enumerate()
            .map(|(i, w)| (i, score(w)))
            .fold((0, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        let mut w = pool.remove(best);
        if best_score < 1e-8 {
            let partner = pool
                .iter()
                .enumerate()
                .map(|(i, x)| (i, score(&(&w + x))))
                .fold((usize::MAX, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            if partner.0 != usize::MAX && partner.1 >= 1e-8 {
                w += &pool[partner.0];
            } else {
                degenerate = true;
            }
        }
        let s = p_form(g, &w, &w);
        let q = if s.norm() > 0.0 { &w / s.sqrt() } else { w.clone() / Complex64::new(w.norm(), 0.0) };
        for x in pool.iter_mut() {
            let c = p_form(g, &q, x);
            *x -= &q * c;
        }
        pool.retain(|x| x.norm() > 1e-12);
        out.push(q);
    }
    (out, degenerate)
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Builds `Q`, `R`, `V`, `U` from the cluster eigenbases of `report`.
pub fn assemble_diagonalization(g: &Graph, report: &SpectrumReport) -> Result<DiagonalizationBlocks, SpectrumError> {
    if !report.diagonalizability.diagonalizable {
        return Err(SpectrumError::Defective(report.diagonalizability.defective.clone()));
    }
    let dim = g.dim();
    let mut q_cols = Vec::new();
    let mut r_cols = Vec::new();
    let mut v = Vec::new();
    let mut u = Vec::new();
    let mut relaxed = Vec::new();
    for (cluster, basis) in report.clusters.iter().zip(&report.cluster_bases) {
        if cluster.class == Class::Unit {
            for col in orthonormalize(basis) {
                r_cols.push(col);
                u.push(cluster.centroid);
            }
        } else {
            let (cols, degenerate) = p_orthonormalize(g, basis);
            if cols.len() > 1 {
                relaxed.push(format!(
                    "P-orthonormalized within the {}-dimensional eigenspace at {:.6}",
                    cols.len(),
                    cluster.centroid
                ));
            }
            if degenerate {
                relaxed.push(format!("P-isotropic eigenvectors at {:.6}; QᵀPQ = I not attainable", cluster.centroid));
            }
            for col in cols {
                q_cols.push(col);
                v.push(cluster.centroid);
            }
        }
    }
    let q = if q_cols.is_empty() { CMatrix::zeros(dim, 0) } else { CMatrix::from_columns(&q_cols) };
    let r = if r_cols.is_empty() { CMatrix::zeros(dim, 0) } else { CMatrix::from_columns(&r_cols) };
    let permute_cols = |m: &CMatrix| CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(g.reverse(i), j)]);
    let pq = permute_cols(&q);
    let pr = permute_cols(&r);

    let qt_p_q = max_abs(&(q.transpose() * &pq - CMatrix::identity(q.ncols(), q.ncols())));
    let r_star_r = max_abs(&(r.adjoint() * &r - CMatrix::identity(r.ncols(), r.ncols())));
    let qt_p_r = if q.ncols() * r.ncols() == 0 { 0.0 } else { max_abs(&(q.transpose() * &pr)) };
    let r_star_q = if q.ncols() * r.ncols() == 0 { 0.0 } else { max_abs(&(r.adjoint() * &q)) };

    let b = NbOperator::build(g).to_dense();
    let vd = CMatrix::from_diagonal(&CVector::from_vec(v.clone()));
    let ud = CMatrix::from_diagonal(&CVector::from_vec(u.clone()));
    // (M P)[i, j] = M[i, rev(j)]
    let qvq = &q * vd * q.transpose();
    let qvqp = CMatrix::from_fn(dim, dim, |i, j| qvq[(i, g.reverse(j))]);
    let rur = &r * ud * r.adjoint();
    let reconstruction = (qvqp + rur - &b).norm() / b.norm().max(f64::MIN_POSITIVE);

    let mut left_eigenvector: f64 = 0.0;
    for (cols, vals) in [(&q, &v), (&r, &u)] {
        for (j, &lambda) in vals.iter().enumerate() {
            let pv = pq_col(g, cols, j);
            let lhs = pv.transpose() * &b;
            let res = (lhs - pv.transpose() * lambda).norm() / pv.norm().max(f64::MIN_POSITIVE);
            left_eigenvector = left_eigenvector.max(res);
        }
    }

    Ok(DiagonalizationBlocks {
        q,
        r,
        v,
        u,
        residuals: DiagonalizationResiduals { qt_p_q, r_star_r, qt_p_r, r_star_q, reconstruction, left_eigenvector },
        relaxed,
    })
}

fn pq_col(g: &Graph, m: &CMatrix, j: usize) -> CVector {
    CVector::from_fn(m.nrows(), |i, _| m[(g.reverse(i), j)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_graph;
    use crate::spectrum::compute_spectrum;

    #[test]
    fn c4_is_unitary_only() {
        let g = load_graph("0 1\n1 2\n2 3\n3 0").unwrap();
        let d = assemble_diagonalization(&g, &compute_spectrum(&g).unwrap()).unwrap();
        assert_eq!(d.q.ncols(), 0);
        assert_eq!(d.r.ncols(), 8);
        assert!(d.residuals.reconstruction <= 1e-10);
    }

    #[test]
    fn k4_full_assembly() {
        let g = load_graph("0 1\n0 2\n0 3\n1 2\n1 3\n2 3").unwrap();
        let d = assemble_diagonalization(&g, &compute_spectrum(&g).unwrap()).unwrap();
        let r = &d.residuals;
        assert!(r.reconstruction <= 1e-6, "{r:?}");
        assert!(r.qt_p_q <= 1e-8 && r.r_star_r <= 1e-8 && r.qt_p_r <= 1e-8 && r.r_star_q <= 1e-8, "{r:?}");
        assert!(r.left_eigenvector <= 1e-8);
    }

    #[test]
    fn defective_input_is_refused() {
        let g = load_graph("0 1\n1 2\n1 3\n2 3").unwrap();
        let err = assemble_diagonalization(&g, &compute_spectrum(&g).unwrap()).unwrap_err();
        assert!(matches!(err, SpectrumError::Defective(_)));
    }
}
