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

//! Predicted versus observed multiplicities, one row per category of the
//! magnitude classification, and the leading-eigenvalue structure.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{cyclomatic, Class, SpectrumError, SpectrumReport};
use crate::graph::{is_bipartite, shell_decomposition, two_core, Graph};
use crate::motifs::{predict_unit_spectrum, primitive_roots};
use crate::serde_complex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Match,
    Mismatch,
    /// Motif prediction differs from the observed rank; reported, not an error.
    Discrepancy,
    ConjectureHolds,
    ConjectureViolated,
}

#[derive(Debug, Clone, Serialize)]
pub struct LedgerRow {
    pub category: &'static str,
    pub subcategory: String,
    pub quantity: &'static str,
    pub predicted: usize,
    pub observed: usize,
    pub status: RowStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl LedgerRow {
    fn exact(category: &'static str, sub: impl Into<String>, quantity: &'static str, predicted: usize, observed: usize) -> Self {
        LedgerRow {
            category,
            subcategory: sub.into(),
            quantity,
            predicted,
            observed,
            status: if predicted == observed { RowStatus::Match } else { RowStatus::Mismatch },
            note: None,
        }
    }

    /// True unless a theorem row disagrees.
    pub fn is_consistent(&self) -> bool {
        self.status != RowStatus::Mismatch
    }
}

pub(super) fn build_ledger(g: &Graph, r: &SpectrumReport) -> Result<Vec<LedgerRow>, SpectrumError> {
    let shell = shell_decomposition(g);
    let cyc = cyclomatic(g);
    let mut rows = Vec::new();

    rows.push(LedgerRow::exact("inner", "lambda = 0", "GM", shell.n1, r.zero.gm));
    let am0 = if shell.two_core_is_empty() { 2 * g.m() } else { 2 * shell.s1 };
    rows.push(LedgerRow::exact("inner", "lambda = 0", "AM", am0, r.zero.am));
    let inner_nonzero: usize = r
        .clusters
        .iter()
        .filter(|c| c.class == Class::Inner && c.centroid.norm() > 0.0)
        .map(|c| c.am)
        .sum();
    rows.push(LedgerRow::exact("inner", "0 < |lambda| < 1", "count", 0, inner_nonzero));
    let irrational: usize = r
        .clusters
        .iter()
        .filter(|c| c.class == Class::Unit && c.root_order.is_none())
        .map(|c| c.am)
        .sum();
    rows.push(LedgerRow::exact("unit", "lambda^r != 1 for all r", "count", 0, irrational));

    if let Some((core, _)) = two_core(g) {
        let prediction = predict_unit_spectrum(&core)?;
        let mut orders: Vec<usize> = prediction.orders.iter().map(|o| o.order).collect();
        orders.extend(r.unit_orders.iter().copied().filter(|&o| o >= 3));
        orders.sort_unstable();
        orders.dedup();
        for o in orders {
            let (predicted, raw) = prediction.for_order(o).map_or((0, 0), |p| (p.independent, p.raw));
            let gms: Vec<usize> = primitive_roots(o).into_iter().map(|z| r.gm_at(z)).collect();
            let observed = gms[0];
            let uniform = gms.iter().all(|&x| x == observed);
            let mut notes = vec![format!("raw motif count {raw}")];
            if !uniform {
                notes.push(format!("primitive roots disagree: {gms:?}"));
            }
            let ams: Vec<usize> = primitive_roots(o).into_iter().map(|z| r.am_at(z)).collect();
            if ams != gms {
                notes.push(format!("AM {ams:?} differs from GM"));
            }
            let status = if predicted == observed && uniform { RowStatus::Match } else { RowStatus::Discrepancy };
            rows.push(LedgerRow {
                category: "unit",
                subcategory: format!("primitive order {o}"),
                quantity: "GM",
                predicted,
                observed,
                status,
                note: Some(notes.join("; ")),
            });
        }
    }

    let one = Complex64::new(1.0, 0.0);
    let minus_one = Complex64::new(-1.0, 0.0);
    let (gm1, gm_minus1) = match cyc {
        c if c <= 0 => (0, 0),
        1 => {
            let (core, _) = two_core(g).expect("unicyclic graphs have a 2-core");
            (2, if core.n() % 2 == 0 { 2 } else { 0 })
        }
        c => (c as usize, c as usize - 1 + usize::from(is_bipartite(g))),
    };
    for (sub, lambda, predicted) in [("lambda = 1", one, gm1), ("lambda = -1", minus_one, gm_minus1)] {
        rows.push(LedgerRow::exact("unit", sub, "GM", predicted, r.gm_at(lambda)));
        rows.push(LedgerRow::exact("unit", sub, "AM", predicted, r.am_at(lambda)));
    }

    if cyc >= 2 {
        let outer: Vec<_> = r.clusters.iter().filter(|c| c.class == Class::Outer).collect();
        let violating = outer.iter().filter(|c| c.gm != 1 || c.am != 1).count();
        rows.push(LedgerRow {
            category: "outer",
            subcategory: "1 < |lambda| < rho".into(),
            quantity: "clusters with AM or GM != 1",
            predicted: 0,
            observed: violating,
            status: if violating == 0 { RowStatus::ConjectureHolds } else { RowStatus::ConjectureViolated },
            note: Some(format!("{} outer clusters", outer.len())),
        });
        if let Some(nu) = r.period.nu {
            let leading: Vec<_> = r.clusters.iter().filter(|c| c.class == Class::Leading).collect();
            rows.push(LedgerRow::exact("leading", "|lambda| = rho", "count", nu, leading.len()));
            let simple = leading.iter().filter(|c| c.am == 1 && c.gm == 1).count();
            rows.push(LedgerRow::exact("leading", "|lambda| = rho", "simple", leading.len(), simple));
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct LeadingReport {
    pub rho: f64,
    pub nu: usize,
    #[serde(serialize_with = "serde_complex::complex_vec")]
    pub leading: Vec<Complex64>,
    pub all_simple: bool,
    /// Largest distance from a leading eigenvalue to the nearest `ρ·e^(2πik/ν)`.
    pub rotation_error: f64,
    /// Leading set is exactly `{ρ·e^(2πik/ν)}`, each simple, within `δ_cluster`.
    pub matches_rotations: bool,
}

/// Compares the leading clusters with the rotations `ρ·e^(2πik/ν)`.
pub fn leading_report(g: &Graph, r: &SpectrumReport) -> Result<LeadingReport, SpectrumError> {
    if g.is_tree() {
        return Err(SpectrumError::NoLeadingStructure("tree: every eigenvalue is 0".into()));
    }
    if cyclomatic(g) == 1 {
        return Err(SpectrumError::NoLeadingStructure(
            "single cycle: rho = 1 and every nonzero eigenvalue is leading".into(),
        ));
    }
    let nu = r.period.nu.ok_or_else(|| SpectrumError::NoLeadingStructure(r.period.note.clone().unwrap_or_default()))?;
    let leading_clusters: Vec<_> = r.clusters.iter().filter(|c| c.class == Class::Leading).collect();
    let leading: Vec<Complex64> = leading_clusters.iter().map(|c| c.centroid).collect();
    let all_simple = leading_clusters.iter().all(|c| c.am == 1 && c.gm == 1);
    let rotations: Vec<Complex64> =
        (0..nu).map(|k| Complex64::from_polar(r.rho, 2.0 * PI * k as f64 / nu as f64)).collect();
    let rotation_error = leading
        .iter()
        .map(|z| rotations.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let covered = rotations
        .iter()
        .all(|w| leading.iter().any(|z| (z - w).norm() <= r.options.delta_cluster));
    let matches_rotations =
        all_simple && leading.len() == nu && covered && rotation_error <= r.options.delta_cluster;
    Ok(LeadingReport { rho: r.rho, nu, leading, all_simple, rotation_error, matches_rotations })
}
