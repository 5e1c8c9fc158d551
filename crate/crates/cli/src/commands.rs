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

//! The four subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use nbspec::graph::{is_bipartite, load_graph, shell_decomposition, two_core, Graph, GraphError};
use nbspec::linalg::{eig, LinalgError};
use nbspec::motifs::{find_motifs, predict_unit_spectrum, MotifError, MotifKind, OrderPrediction};
use nbspec::nb::{nb_walk_count, NbError, NbOperator};
use nbspec::perturbation::{perron, run_probe, PerturbationError, PerturbationReport};
use nbspec::spectrum::{
    compute_spectrum_with, cyclomatic, kernel_report, leading_report, lift_eigenvector, peel_leaf, random_samples,
    spectra_agree, verify_ihara_bass, DiagonalizabilityVerdict, LeadingReport, SpectrumError, SpectrumOptions,
    SpectrumReport,
};
use num_complex::Complex64;
use serde::Serialize;

use crate::output::{emit, format_float, to_csv, to_json};

pub const SCHEMA_VERSION: u32 = 1;
const WALK_MAX_NODES: usize = 8;
const WALK_MAX_POWER: usize = 6;

#[derive(Debug)]
pub enum CliError {
    /// Bad input or configuration; exit code 2.
    Validation(String),
    /// A numerical routine failed; exit code 3.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<LinalgError> for CliError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::DimensionCap { .. } => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<NbError> for CliError {
    fn from(e: NbError) -> Self {
        match e {
            NbError::Exact(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<MotifError> for CliError {
    fn from(e: MotifError) -> Self {
        match e {
            MotifError::Linalg(l) => l.into(),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<SpectrumError> for CliError {
    fn from(e: SpectrumError) -> Self {
        match e {
            SpectrumError::Linalg(l) => l.into(),
            SpectrumError::Graph(g) => g.into(),
            SpectrumError::Nb(n) => n.into(),
            SpectrumError::Motif(m) => m.into(),
            SpectrumError::Defective(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<PerturbationError> for CliError {
    fn from(e: PerturbationError) -> Self {
        match e {
            PerturbationError::Graph(g) => g.into(),
            PerturbationError::Nb(n) => n.into(),
            PerturbationError::Bipartite => CliError::Validation(e.to_string()),
            PerturbationError::Linalg(l) => l.into(),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    pub output: Option<PathBuf>,
    pub options: SpectrumOptions,
    pub seed: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let o = &self.options;
        for (name, v) in [("--tol-rank", o.eps_rank), ("--tol-cluster", o.delta_cluster), ("--tol-band", o.tau_band)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Validation(format!("{name} must be positive, got {v}")));
            }
        }
        if o.max_dim < 2 {
            return Err(CliError::Validation(format!("--max-dim must be at least 2, got {}", o.max_dim)));
        }
        Ok(())
    }

    fn load(&self) -> Result<Graph, CliError> {
        let text = fs::read_to_string(&self.input)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", self.input.display())))?;
        Ok(load_graph(&text)?)
    }

    fn write(&self, path: Option<&Path>, contents: &str) -> Result<(), CliError> {
        emit(path, contents).map_err(|e| CliError::Validation(format!("cannot write output: {e}")))
    }

    fn input_name(&self) -> String {
        self.input.display().to_string()
    }
}

/// Whether every invariant held; `false` maps to exit code 1.
pub type Passed = bool;

#[derive(Serialize)]
struct GraphSummary {
    n: usize,
    m: usize,
    dim: usize,
    min_degree: usize,
    md2: bool,
    tree: bool,
    bipartite: bool,
    cyclomatic: i64,
}

#[derive(Serialize)]
struct ShellSummary {
    s1: usize,
    n1: usize,
    layers: usize,
    two_core_nodes: Vec<i64>,
}

#[derive(Serialize)]
struct MotifSummary {
    kind: MotifKind,
    size: usize,
    nodes: Vec<i64>,
    anchors: Vec<i64>,
}

#[derive(Serialize)]
struct AnalyzeReport<'a> {
    schema_version: u32,
    command: &'static str,
    input: String,
    graph: GraphSummary,
    shell: ShellSummary,
    am0: usize,
    gm0: usize,
    gm_plus1: usize,
    gm_minus1: usize,
    gm_i: usize,
    rho: f64,
    nu: Option<usize>,
    motifs: Vec<MotifSummary>,
    unit_prediction: Vec<OrderPrediction>,
    diagonalizability: &'a DiagonalizabilityVerdict,
    leading: Option<LeadingReport>,
    leading_note: Option<String>,
    nb_centrality: Option<Vec<f64>>,
    spectrum: &'a SpectrumReport,
}

fn graph_summary(g: &Graph) -> GraphSummary {
    GraphSummary {
        n: g.n(),
        m: g.m(),
        dim: g.dim(),
        min_degree: g.min_degree(),
        md2: g.is_md2(),
        tree: g.is_tree(),
        bipartite: is_bipartite(g),
        cyclomatic: cyclomatic(g),
    }
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<Passed, CliError> {
    let g = cfg.load()?;
    let report = compute_spectrum_with(&g, &cfg.options)?;
    let labels = g.labels();
    let shell = shell_decomposition(&g);
    let (motifs, unit_prediction) = match two_core(&g) {
        Some((core, map)) => {
            let to_label = |v: &[usize]| v.iter().map(|&u| labels[map[u]]).collect::<Vec<_>>();
            let motifs = find_motifs(&core)?
                .into_iter()
                .map(|m| MotifSummary { kind: m.kind, size: m.size, nodes: to_label(&m.nodes), anchors: to_label(&m.anchors) })
                .collect();
            (motifs, predict_unit_spectrum(&core)?.orders)
        }
        None => (Vec::new(), Vec::new()),
    };
    let (leading, leading_note) = match leading_report(&g, &report) {
        Ok(l) => (Some(l), None),
        Err(SpectrumError::NoLeadingStructure(note)) => (None, Some(note)),
        Err(e) => return Err(e.into()),
    };
    let nb_centrality = match perron(&g) {
        Ok(p) => Some(p.centrality),
        Err(PerturbationError::Linalg(e)) => return Err(e.into()),
        Err(PerturbationError::PowerIteration { .. }) => None,
        Err(_) => None,
    };
    let doc = AnalyzeReport {
        schema_version: SCHEMA_VERSION,
        command: "analyze",
        input: cfg.input_name(),
        graph: graph_summary(&g),
        shell: ShellSummary {
            s1: shell.s1,
            n1: shell.n1,
            layers: shell.layers.len(),
            two_core_nodes: shell.two_core_nodes.iter().map(|&u| labels[u]).collect(),
        },
        am0: report.zero.am,
        gm0: report.zero.gm,
        gm_plus1: report.gm_at(Complex64::new(1.0, 0.0)),
        gm_minus1: report.gm_at(Complex64::new(-1.0, 0.0)),
        gm_i: report.gm_at(Complex64::new(0.0, 1.0)),
        rho: report.rho,
        nu: report.period.nu,
        motifs,
        unit_prediction,
        diagonalizability: &report.diagonalizability,
        leading,
        leading_note,
        nb_centrality,
        spectrum: &report,
    };
    let json = to_json(&doc).map_err(|e| CliError::Numerical(e.to_string()))?;
    cfg.write(cfg.output.as_deref(), &json)?;
    Ok(true)
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Passed, CliError> {
    let g = cfg.load()?;
    let report = compute_spectrum_with(&g, &cfg.options)?;
    let rows: Vec<Vec<String>> = report
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let (class, am, gm) = report.class_of(i);
            vec![format_float(z.re), format_float(z.im), class.as_str().to_string(), am.to_string(), gm.to_string()]
        })
        .collect();
    let csv = to_csv(&["re", "im", "class", "am", "gm"], &rows).map_err(|e| CliError::Numerical(e.to_string()))?;
    cfg.write(cfg.output.as_deref(), &csv)?;
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Which {
    IharaBass,
    Table1,
    Walks,
    Peel,
}

#[derive(Serialize)]
struct Check {
    name: String,
    passed: bool,
    residual: Option<f64>,
    detail: String,
}

#[derive(Serialize)]
struct VerifyReport {
    schema_version: u32,
    command: &'static str,
    input: String,
    which: Which,
    passed: bool,
    checks: Vec<Check>,
}

pub fn cmd_verify(cfg: &RunConfig, which: Which) -> Result<Passed, CliError> {
    let g = cfg.load()?;
    let checks = match which {
        Which::IharaBass => verify_ihara(&g, cfg.seed)?,
        Which::Table1 => verify_table1(&g, &cfg.options)?,
        Which::Walks => verify_walks(&g)?,
        Which::Peel => verify_peel(&g, &cfg.options)?,
    };
    let passed = checks.iter().all(|c| c.passed);
    let doc = VerifyReport { schema_version: SCHEMA_VERSION, command: "verify", input: cfg.input_name(), which, passed, checks };
    let json = to_json(&doc).map_err(|e| CliError::Numerical(e.to_string()))?;
    cfg.write(cfg.output.as_deref(), &json)?;
    Ok(passed)
}

fn verify_ihara(g: &Graph, seed: u64) -> Result<Vec<Check>, CliError> {
    let report = verify_ihara_bass(g, &random_samples(seed, 20, 0.1, 1.5))?;
    let mut checks: Vec<Check> = report
        .samples
        .iter()
        .filter_map(|s| {
            s.residual.map(|r| Check {
                name: format!("det(I - tB) at t = {:.6}", s.t),
                passed: r <= 1e-8,
                residual: Some(r),
                detail: "relative residual".into(),
            })
        })
        .collect();
    checks.push(Check {
        name: "samples evaluated".into(),
        passed: report.evaluated > 0,
        residual: Some(report.max_residual),
        detail: format!("{} of {} samples away from 1/lambda", report.evaluated, report.samples.len()),
    });
    Ok(checks)
}

fn verify_table1(g: &Graph, opts: &SpectrumOptions) -> Result<Vec<Check>, CliError> {
    let report = compute_spectrum_with(g, opts)?;
    Ok(report
        .ledger
        .iter()
        .map(|row| Check {
            name: format!("{} / {} / {}", row.category, row.subcategory, row.quantity),
            passed: row.is_consistent(),
            residual: None,
            detail: format!(
                "predicted {} observed {} ({:?}){}",
                row.predicted,
                row.observed,
                row.status,
                row.note.as_deref().map(|n| format!(": {n}")).unwrap_or_default()
            ),
        })
        .collect())
}

fn verify_walks(g: &Graph) -> Result<Vec<Check>, CliError> {
    if g.n() > WALK_MAX_NODES {
        return Err(CliError::Validation(format!("walks needs n <= {WALK_MAX_NODES}, got {}", g.n())));
    }
    let op = NbOperator::build(g);
    let mut checks = Vec::new();
    for p in 0..=WALK_MAX_POWER {
        let bp = op.power(p as u32)?;
        let mut mismatches = 0usize;
        for end in 0..g.dim() {
            for start in 0..g.dim() {
                if bp.get(end, start) as u64 != nb_walk_count(g, start, end, p)? {
                    mismatches += 1;
                }
            }
        }
        checks.push(Check {
            name: format!("B^{p} counts NB-walks of length {}", p + 1),
            passed: mismatches == 0,
            residual: Some(mismatches as f64),
            detail: format!("{mismatches} mismatched entries"),
        });
    }
    Ok(checks)
}

fn verify_peel(g: &Graph, opts: &SpectrumOptions) -> Result<Vec<Check>, CliError> {
    let kernel = kernel_report(g)?;
    let mut checks = vec![Check {
        name: "kernel: GM(0) = n1, AM(0) = 2 s1, layer annihilation".into(),
        passed: kernel.consistent(),
        residual: None,
        detail: format!(
            "gm {} (predicted {}), am {} (predicted {})",
            kernel.gm, kernel.predicted_gm, kernel.am, kernel.predicted_am
        ),
    }];
    if g.n() <= 2 {
        return Ok(checks);
    }
    let full = compute_spectrum_with(g, opts)?;
    let nonzero = |r: &SpectrumReport| r.eigenvalues.iter().copied().filter(|z| z.norm() > 0.0).collect::<Vec<_>>();
    let b = NbOperator::build(g).to_dense();
    for leaf in (0..g.n()).filter(|&u| g.degree(u) == 1) {
        let (peeled, map) = peel_leaf(g, leaf)?;
        let small = compute_spectrum_with(&peeled, opts)?;
        checks.push(Check {
            name: format!("peeling leaf {} keeps the nonzero spectrum", g.labels()[leaf]),
            passed: spectra_agree(&nonzero(&full), &nonzero(&small), 1e-6),
            residual: None,
            detail: format!("{} nonzero eigenvalues", nonzero(&small).len()),
        });
        let dec = eig(&NbOperator::build(&peeled).to_dense())?;
        let mut worst: f64 = 0.0;
        for (k, &lambda) in dec.values.iter().enumerate() {
            if lambda.norm() < 1e-6 {
                continue;
            }
            let v: Vec<Complex64> = dec.vectors.column(k).iter().copied().collect();
            let lifted = nbspec::linalg::CVector::from_vec(lift_eigenvector(g, &peeled, &map, leaf, lambda, &v));
            let res = (&b * &lifted - &lifted * lambda).norm() / lifted.norm();
            worst = worst.max(res);
        }
        checks.push(Check {
            name: format!("lifted eigenvectors across leaf {}", g.labels()[leaf]),
            passed: worst <= 1e-8,
            residual: Some(worst),
            detail: "largest relative residual of B v - lambda v".into(),
        });
    }
    Ok(checks)
}

#[derive(Serialize)]
struct PerturbDocument<'a> {
    schema_version: u32,
    command: &'static str,
    input: String,
    attach: Vec<i64>,
    failures: Vec<String>,
    probe: &'a PerturbationReport,
}

pub fn cmd_perturb(cfg: &RunConfig, attach: &[i64]) -> Result<Passed, CliError> {
    let g = cfg.load()?;
    let labels = g.labels();
    let neighbors = attach
        .iter()
        .map(|&a| {
            labels.iter().position(|&l| l == a).ok_or_else(|| CliError::Validation(format!("--attach: unknown node {a}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let probe = run_probe(&g, &neighbors, cfg.seed)?;
    let failures = probe.failures();
    let doc = PerturbDocument {
        schema_version: SCHEMA_VERSION,
        command: "perturb",
        input: cfg.input_name(),
        attach: probe.neighbors.iter().map(|&u| labels[u]).collect(),
        failures: failures.clone(),
        probe: &probe,
    };
    let json = to_json(&doc).map_err(|e| CliError::Numerical(e.to_string()))?;
    let rows: Vec<Vec<String>> = probe
        .disks
        .iter()
        .map(|d| vec![format_float(d.t), d.i.to_string(), format_float(d.center_re), format_float(d.center_im), format_float(d.radius)])
        .collect();
    let csv =
        to_csv(&["t", "i", "center_re", "center_im", "radius"], &rows).map_err(|e| CliError::Numerical(e.to_string()))?;
    cfg.write(cfg.output.as_deref(), &json)?;
    if let Some(out) = &cfg.output {
        cfg.write(Some(&disk_path(out)), &csv)?;
    }
    Ok(failures.is_empty())
}

/// `report.json` → `report.disks.csv`.
pub fn disk_path(output: &Path) -> PathBuf {
    output.with_extension("disks.csv")
}
