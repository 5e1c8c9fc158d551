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

//! The full spectral pipeline: dense eigenvalues, exact zero multiplicity,
//! clustering, geometric multiplicities, magnitude classes, the companion
//! cross-check and the multiplicity ledger.

mod bases;
mod diagonalize;
mod ledger;

pub use bases::{
    eig1_basis, eig_minus1_basis, kernel_report, lift_eigenvector, peel_leaf, random_samples, satisfies_flow_system,
    verify_ihara_bass,
    IharaBassReport, IharaBassSample, KernelReport, LayerCheck, MinusOneBasis,
};
pub use diagonalize::{assemble_diagonalization, DiagonalizationBlocks, DiagonalizationResiduals};
pub use ledger::{leading_report, LeadingReport, LedgerRow, RowStatus};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::exact::kernel_chain_ranks;
use crate::graph::{nb_period, shell_decomposition, two_core, Graph, GraphError};
use crate::linalg::{
    cluster_eigenvalues, eig_with_cap, multiset_distance, numerical_rank, spectral_order, CMatrix, LinalgError,
    DEFAULT_DELTA_CLUSTER, DEFAULT_EPS_RANK, DEFAULT_MAX_DIM,
};
use crate::motifs::{root_of_unity_order, MotifError};
use crate::nb::{reduced_companion, NbError, NbOperator};
use crate::serde_complex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Nb(#[from] NbError),
    #[error(transparent)]
    Motif(#[from] MotifError),
    #[error("B is not diagonalizable; defective clusters at {0:?}")]
    Defective(Vec<Complex64>),
    #[error("node {0} is not a leaf")]
    NotALeaf(usize),
    #[error("the leading structure is undefined for this graph: {0}")]
    NoLeadingStructure(String),
}

/// Numerical tolerances for the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumOptions {
    pub eps_rank: f64,
    pub delta_cluster: f64,
    pub tau_band: f64,
    pub max_dim: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            eps_rank: DEFAULT_EPS_RANK,
            delta_cluster: DEFAULT_DELTA_CLUSTER,
            tau_band: 1e-6,
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Class {
    Inner,
    Unit,
    Outer,
    Leading,
}

impl Class {
    pub fn as_str(self) -> &'static str {
        match self {
            Class::Inner => "inner",
            Class::Unit => "unit",
            Class::Outer => "outer",
            Class::Leading => "leading",
        }
    }
}

/// Magnitude class of `λ` given the spectral radius `ρ`. The unit band is
/// tested before the leading one, so every eigenvalue of a cycle graph is unit.
pub fn classify(lambda: Complex64, rho: f64, tau_band: f64) -> Class {
    let r = lambda.norm();
    if r < 1.0 - tau_band {
        Class::Inner
    } else if (r - 1.0).abs() <= tau_band {
        Class::Unit
    } else if (rho - r).abs() <= tau_band * rho {
        Class::Leading
    } else {
        Class::Outer
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterReport {
    #[serde(serialize_with = "serde_complex::complex")]
    pub centroid: Complex64,
    pub am: usize,
    pub gm: usize,
    pub class: Class,
    /// Unit cluster whose modulus is not exactly 1 but inside the band.
    pub band_flag: bool,
    /// Smallest `r ≤ 2m` with `|λ^r − 1| < 1e−6`.
    pub root_order: Option<usize>,
    /// Positions in `SpectrumReport::eigenvalues`.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroSummary {
    /// From the exact rank chain of `B^k`.
    pub am: usize,
    pub gm: usize,
    pub chain_ranks: Vec<usize>,
    /// Largest modulus among the eigensolver values replaced by exact zeros.
    pub snapped_max_modulus: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodInfo {
    pub nu: Option<usize>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompanionCheck {
    /// `full` on md2 graphs, `nonzero` when zeros are excluded.
    pub scope: &'static str,
    pub compared: usize,
    pub max_distance: f64,
    pub agrees: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagonalizabilityVerdict {
    pub diagonalizable: bool,
    #[serde(serialize_with = "serde_complex::complex_vec")]
    pub defective: Vec<Complex64>,
    /// The conjecture predicts diagonalizable exactly when the 1-shell is empty.
    pub conjecture_corroborated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub n: usize,
    pub m: usize,
    pub dim: usize,
    pub options: SpectrumOptions,
    #[serde(serialize_with = "serde_complex::complex_vec")]
    pub eigenvalues: Vec<Complex64>,
    pub clusters: Vec<ClusterReport>,
    pub rho: f64,
    pub period: PeriodInfo,
    pub unit_orders: Vec<usize>,
    pub zero: ZeroSummary,
    pub companion: CompanionCheck,
    pub max_residual: f64,
    pub ledger: Vec<LedgerRow>,
    pub diagonalizability: DiagonalizabilityVerdict,
    /// Eigenvector basis of each cluster, `gm` columns each.
    #[serde(skip)]
    pub cluster_bases: Vec<CMatrix>,
}

impl SpectrumReport {
    /// Index of the cluster containing `λ`, if any lies within `delta_cluster`.
    pub fn cluster_near(&self, lambda: Complex64) -> Option<usize> {
        self.clusters
            .iter()
            .position(|c| (c.centroid - lambda).norm() <= self.options.delta_cluster.max(1e-9))
    }

    pub fn gm_at(&self, lambda: Complex64) -> usize {
        self.cluster_near(lambda).map_or(0, |i| self.clusters[i].gm)
    }

    pub fn am_at(&self, lambda: Complex64) -> usize {
        self.cluster_near(lambda).map_or(0, |i| self.clusters[i].am)
    }

    pub fn class_of(&self, position: usize) -> (Class, usize, usize) {
        let c = self.clusters.iter().find(|c| c.members.contains(&position)).expect("every value is clustered");
        (c.class, c.am, c.gm)
    }
}

/// Number of independent cycles, `m − n + 1`.
pub fn cyclomatic(g: &Graph) -> i64 {
    g.m() as i64 - g.n() as i64 + 1
}

/// Runs the whole pipeline with default tolerances.
pub fn compute_spectrum(g: &Graph) -> Result<SpectrumReport, SpectrumError> {
    compute_spectrum_with(g, &SpectrumOptions::default())
}

pub fn compute_spectrum_with(g: &Graph, opts: &SpectrumOptions) -> Result<SpectrumReport, SpectrumError> {
    let op = NbOperator::build(g);
    let dim = op.dim();
    let dense = op.to_dense();
    let decomposition = eig_with_cap(&dense, opts.max_dim)?;
    let max_residual = decomposition.max_residual(&dense);
    let mut values = decomposition.values.clone();

    let chain_ranks = kernel_chain_ranks(&op.to_int_matrix());
    let am0 = dim - chain_ranks.last().copied().unwrap_or(dim);
    let snapped_max_modulus = snap_zeros(&mut values, am0);

    let mut clusters: Vec<ClusterReport> = Vec::new();
    let mut cluster_bases = Vec::new();
    let raw_clusters = cluster_eigenvalues(&values, opts.delta_cluster);
    let rho = raw_clusters.iter().map(|c| c.centroid.norm()).fold(0.0, f64::max);
    let centroids: Vec<Complex64> = raw_clusters.iter().map(|c| c.centroid).collect();
    for ci in spectral_order(&centroids) {
        let cl = &raw_clusters[ci];
        let centroid = if am0 > 0 && cl.members.iter().all(|&i| values[i] == Complex64::new(0.0, 0.0)) {
            Complex64::new(0.0, 0.0)
        } else {
            cl.centroid
        };
        let (gm, basis) = if cl.multiplicity() == 1 {
            (1, decomposition.vectors.columns(cl.members[0], 1).into_owned())
        } else {
            let shifted = &dense - CMatrix::identity(dim, dim) * centroid;
            let rank = numerical_rank(&shifted, opts.eps_rank)?;
            let basis = rank.null_space.unwrap_or_else(|| CMatrix::zeros(dim, 0));
            (rank.nullity, basis)
        };
        let class = if rho > 0.0 { classify(centroid, rho, opts.tau_band) } else { Class::Inner };
        let band_flag = class == Class::Unit && (centroid.norm() - 1.0).abs() > 1e-12;
        let root_order =
            if centroid.norm() > 0.5 { root_of_unity_order(centroid, 2 * g.m(), 1e-6) } else { None };
        clusters.push(ClusterReport {
            centroid,
            am: cl.multiplicity(),
            gm,
            class,
            band_flag,
            root_order,
            members: cl.members.clone(),
        });
        cluster_bases.push(basis);
    }
    let gm0 = clusters.iter().find(|c| c.centroid.norm() == 0.0).map_or(0, |c| c.gm);

    let mut unit_orders: Vec<usize> = clusters
        .iter()
        .filter(|c| c.class == Class::Unit)
        .filter_map(|c| c.root_order)
        .collect();
    unit_orders.sort_unstable();
    unit_orders.dedup();

    let period = period_info(g);
    let companion = companion_check(g, &values, am0, opts)?;

    let defective: Vec<Complex64> = clusters.iter().filter(|c| c.gm != c.am).map(|c| c.centroid).collect();
    let shell = shell_decomposition(g);
    let diagonalizable = defective.is_empty();
    let diagonalizability = DiagonalizabilityVerdict {
        diagonalizable,
        defective,
        conjecture_corroborated: diagonalizable == (shell.s1 == 0),
    };

    let mut report = SpectrumReport {
        n: g.n(),
        m: g.m(),
        dim,
        options: *opts,
        eigenvalues: values,
        clusters,
        rho,
        period,
        unit_orders,
        zero: ZeroSummary { am: am0, gm: gm0, chain_ranks, snapped_max_modulus },
        companion,
        max_residual,
        ledger: Vec::new(),
        diagonalizability,
        cluster_bases,
    };
    report.ledger = ledger::build_ledger(g, &report)?;
    Ok(report)
}

/// Replaces the `count` smallest-modulus values by exact zeros. Nilpotent
/// Jordan blocks of size `k` scatter their zeros to radius about `ε^(1/k)`,
/// so clustering them at a fixed radius would split them.
fn snap_zeros(values: &mut [Complex64], count: usize) -> f64 {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].norm().total_cmp(&values[b].norm()));
    let mut worst: f64 = 0.0;
    for &i in order.iter().take(count) {
        worst = worst.max(values[i].norm());
        values[i] = Complex64::new(0.0, 0.0);
    }
    worst
}

fn period_info(g: &Graph) -> PeriodInfo {
    let Some((core, _)) = two_core(g) else {
        return PeriodInfo { nu: None, note: Some("tree: B is nilpotent".into()) };
    };
    match nb_period(&core) {
        Ok(nu) => PeriodInfo { nu: Some(nu), note: None },
        Err(GraphError::CycleGraph { length }) => PeriodInfo {
            nu: Some(length),
            note: Some(format!("2-core is the cycle C{length}; every eigenvalue has modulus 1")),
        },
        Err(e) => PeriodInfo { nu: None, note: Some(e.to_string()) },
    }
}

/// Spectrum through the `2n × 2n` companion matrix, adjusted by `m − n`
/// copies of `±1`.
pub fn companion_spectrum(g: &Graph) -> Result<Vec<Complex64>, SpectrumError> {
    let k = crate::linalg::to_complex(&reduced_companion(g));
    let mut values = eig_with_cap(&k, 2 * DEFAULT_MAX_DIM)?.values;
    let excess = g.m() as i64 - g.n() as i64;
    if excess >= 0 {
        for _ in 0..excess {
            values.push(Complex64::new(1.0, 0.0));
            values.push(Complex64::new(-1.0, 0.0));
        }
    } else {
        for target in [1.0, -1.0] {
            for _ in 0..(-excess) {
                let t = Complex64::new(target, 0.0);
                let pos = (0..values.len())
                    .min_by(|&a, &b| (values[a] - t).norm().total_cmp(&(values[b] - t).norm()))
                    .expect("companion has eigenvalues");
                values.remove(pos);
            }
        }
    }
    Ok(values)
}

fn companion_check(
    g: &Graph,
    values: &[Complex64],
    am0: usize,
    opts: &SpectrumOptions,
) -> Result<CompanionCheck, SpectrumError> {
    let mut other = companion_spectrum(g)?;
    snap_zeros(&mut other, am0);
    let scope = if g.is_md2() { "full" } else { "nonzero" };
    let keep = |v: &[Complex64]| -> Vec<Complex64> {
        if g.is_md2() {
            v.to_vec()
        } else {
            v.iter().copied().filter(|z| z.norm() > 0.0).collect()
        }
    };
    let a = keep(values);
    let b = keep(&other);
    let (max_distance, agrees) = match multiset_distance(&a, &b) {
        Some(d) => (d, d <= opts.delta_cluster),
        None => (f64::INFINITY, false),
    };
    Ok(CompanionCheck { scope, compared: a.len(), max_distance, agrees })
}

/// Multiset comparison of two spectra at radius `delta`.
pub fn spectra_agree(a: &[Complex64], b: &[Complex64], delta: f64) -> bool {
    multiset_distance(a, b).is_some_and(|d| d <= delta)
}

/// `B` as a dense real matrix, for callers that need explicit entries.
pub fn dense_operator(g: &Graph) -> DMatrix<f64> {
    NbOperator::build(g).to_dense_real()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_graph;
    use std::f64::consts::PI;

    #[test]
    fn classify_examples() {
        assert_eq!(classify(Complex64::new(0.0, 0.0), 2.0, 1e-6), Class::Inner);
        assert_eq!(classify(Complex64::new(0.0, 1.0), 2.0, 1e-6), Class::Unit);
        assert_eq!(classify(Complex64::new(-0.5, 7f64.sqrt() / 2.0), 2.0, 1e-6), Class::Outer);
        assert_eq!(classify(Complex64::new(2.0, 0.0), 2.0, 1e-6), Class::Leading);
    }

    #[test]
    fn c5_is_all_unit() {
        let r = compute_spectrum(&load_graph("0 1\n1 2\n2 3\n3 4\n4 0").unwrap()).unwrap();
        assert_eq!(r.clusters.len(), 5);
        assert!(r.clusters.iter().all(|c| c.class == Class::Unit && c.am == 2 && c.gm == 2));
        assert!((r.rho - 1.0).abs() < 1e-10);
        for k in 0..5 {
            let root = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 5.0);
            assert_eq!(r.gm_at(root), 2);
        }
    }

    #[test]
    fn k4_clusters() {
        let r = compute_spectrum(&load_graph("0 1\n0 2\n0 3\n1 2\n1 3\n2 3").unwrap()).unwrap();
        let outer = Complex64::new(-0.5, 7f64.sqrt() / 2.0);
        assert_eq!((r.am_at(outer), r.gm_at(outer)), (3, 3));
        let lead = r.cluster_near(Complex64::new(2.0, 0.0)).unwrap();
        assert_eq!(r.clusters[lead].class, Class::Leading);
        assert_eq!((r.clusters[lead].am, r.clusters[lead].gm), (1, 1));
        assert!(r.diagonalizability.diagonalizable);
        assert!(r.companion.agrees);
        assert_eq!(r.period.nu, Some(1));
    }

    #[test]
    fn paw_zero_cluster() {
        let r = compute_spectrum(&load_graph("0 1\n1 2\n1 3\n2 3").unwrap()).unwrap();
        assert_eq!((r.zero.am, r.zero.gm), (2, 1));
        assert!(!r.diagonalizability.diagonalizable);
        assert!(r.diagonalizability.conjecture_corroborated);
        assert!(r.companion.agrees);
        assert_eq!(r.companion.scope, "nonzero");
    }

    #[test]
    fn tree_is_all_zero() {
        let r = compute_spectrum(&load_graph("0 1\n1 2\n1 3\n3 4").unwrap()).unwrap();
        assert_eq!(r.zero.am, 8);
        assert_eq!(r.zero.gm, 3);
        assert_eq!(r.clusters.len(), 1);
        assert_eq!(r.clusters[0].class, Class::Inner);
        assert!(r.companion.agrees);
    }
}
