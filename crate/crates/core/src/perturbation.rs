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

//! Adding one node `c` to a host graph and tracking the Perron eigenvalue.
//!
//! With the new oriented edges appended in the order `[c→u …, u→c …]` the
//! extended NB-matrix is `[[B, D], [E, F]]` with `F² = 0` and `DE = 0`, so a
//! Schur complement gives
//! `det(B^c − tI) = t^{2d} det(B − tI) det(I + Y(t)X/t²)` where
//! `Y(t) = (B − tI)⁻¹` and `X = DFE`. The new Perron eigenvalue `λ_c` is the
//! root of `y(t) + t²`, `y(t)` being the most negative eigenvalue of `Y(t)X`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{is_bipartite, Graph, GraphError};
use crate::linalg::{eig, to_complex, CMatrix, CVector, EigenTriple, LinalgError, LogDet, Lu};
use crate::nb::{AdditionBlocks, EdgeVector, NbError, NbOperator};

pub const DEFAULT_EPS_GAP: f64 = 1e-6;
pub const DEFAULT_F_TOL: f64 = 1e-10;
const PERRON_TOL: f64 = 1e-10;
const MAX_POWER_ITERATIONS: usize = 1_000_000;
const NEAR_SINGULAR_PIVOT: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerturbationError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Nb(#[from] NbError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("host is bipartite: B has period 2 and power iteration cannot single out ρ; use leading_report for the ±ρ pair")]
    Bipartite,
    #[error("power iteration stalled after {iterations} steps (residual {residual:e})")]
    PowerIteration { iterations: usize, residual: f64 },
    #[error("t = {t} is not above λ + ε_gap = {bound}")]
    TooCloseToPerron { t: f64, bound: f64 },
    #[error("t = {0} is numerically an eigenvalue of B")]
    NearSingular(Complex64),
    #[error("y(t) + t² stays negative up to t = {cap}")]
    BracketCap { cap: f64 },
    #[error("y(t) + t² = {value} is not negative just above λ")]
    NoNegativeStart { value: f64 },
    #[error("host spectrum is defective or too ill-conditioned to invert the eigenvector matrix")]
    Defective,
}

/// Perron eigenpair of `B`, with `vᴸ = P vᴿ / (vᴿᵀ P vᴿ)` so that `vᴸ · vᴿ = 1`.
#[derive(Debug, Clone, Serialize)]
pub struct Perron {
    pub lambda: f64,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
    /// NB-centrality: the sum of `vᴿ` over the edges into each node.
    pub centrality: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

fn check_host(g: &Graph) -> Result<(), PerturbationError> {
    if !g.is_md2() {
        return Err(GraphError::NotMinDegreeTwo { min_degree: g.min_degree() }.into());
    }
    if g.is_cycle() {
        return Err(GraphError::CycleGraph { length: g.n() }.into());
    }
    if is_bipartite(g) {
        return Err(PerturbationError::Bipartite);
    }
    Ok(())
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Power iteration on `B + I`, which stays primitive when the host has
/// several leading eigenvalues of equal modulus.
pub fn perron(g: &Graph) -> Result<Perron, PerturbationError> {
    check_host(g)?;
    let op = NbOperator::build(g);
    let dim = g.dim();
    let mut v = vec![1.0 / (dim as f64).sqrt(); dim];
    let mut bv = vec![0.0; dim];
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < MAX_POWER_ITERATIONS {
        iterations += 1;
        op.apply_into(&v, &mut bv);
        lambda = v.iter().zip(&bv).map(|(a, b)| a * b).sum();
        residual = bv.iter().zip(&v).map(|(b, a)| (b - lambda * a).powi(2)).sum::<f64>().sqrt();
        if residual <= PERRON_TOL {
            break;
        }
        for (a, b) in v.iter_mut().zip(&bv) {
            *a += b;
        }
        let norm = norm2(&v);
        v.iter_mut().for_each(|a| *a /= norm);
    }
    if residual > PERRON_TOL {
        return Err(PerturbationError::PowerIteration { iterations, residual });
    }
    let pv: Vec<f64> = (0..dim).map(|e| v[g.reverse(e)]).collect();
    let s: f64 = pv.iter().zip(&v).map(|(a, b)| a * b).sum();
    let left = pv.iter().map(|x| x / s).collect();
    let centrality = op.into_sums(&v);
    Ok(Perron { lambda, right: v, left, centrality, iterations, residual })
}

/// Solves `(B − tI)x = w` by LU.
pub fn resolvent_apply(g: &Graph, t: Complex64, w: &[Complex64]) -> Result<EdgeVector, PerturbationError> {
    let lu = shifted_lu(&NbOperator::build(g).to_dense(), t)?;
    Ok(lu.solve(&CVector::from_column_slice(w))?.iter().copied().collect())
}

/// `Y(t)w = Σ vᴿ_i (vᴸ_i · w) / (λ_i − t)` from a full eigen-decomposition.
pub fn resolvent_apply_spectral(triple: &EigenTriple, t: Complex64, w: &[Complex64]) -> Result<EdgeVector, PerturbationError> {
    let n = triple.values.len();
    if w.len() != n {
        return Err(LinalgError::Dimension { expected: n, found: w.len() }.into());
    }
    let w = CVector::from_column_slice(w);
    let mut x = CVector::zeros(n);
    for (i, &lambda) in triple.values.iter().enumerate() {
        if (lambda - t).norm() < 1e-8 {
            return Err(PerturbationError::NearSingular(t));
        }
        let coeff = triple.left.column(i).transpose() * &w;
        x += triple.right.column(i) * (coeff[(0, 0)] / (lambda - t));
    }
    Ok(x.iter().copied().collect())
}

fn shifted_lu(b: &CMatrix, t: Complex64) -> Result<Lu, PerturbationError> {
    let mut a = b.clone();
    for i in 0..a.nrows() {
        a[(i, i)] -= t;
    }
    let lu = Lu::new(&a)?;
    if lu.pivot_ratio() < NEAR_SINGULAR_PIVOT {
        return Err(PerturbationError::NearSingular(t));
    }
    Ok(lu)
}

/// Spectral radius of an entrywise nonnegative matrix via shifted power
/// iteration with Collatz–Wielandt bounds; falls back to a dense solve when
/// the bounds do not close (reducible input).
fn nonnegative_radius(m: &DMatrix<f64>) -> Result<f64, PerturbationError> {
    let k = m.nrows();
    if k == 0 {
        return Ok(0.0);
    }
    let mut x = DMatrix::from_element(k, 1, 1.0);
    for _ in 0..20_000 {
        let y = m * &x;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..k {
            let r = y[i] / x[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if hi == 0.0 {
            return Ok(0.0);
        }
        if hi - lo <= 1e-14 * hi {
            return Ok(0.5 * (hi + lo));
        }
        x += y;
        let scale = x.max();
        x /= scale;
    }
    let values = eig(&to_complex(m))?.values;
    Ok(values.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LambdaC {
    pub lambda_c: f64,
    /// Perron eigenvalue of the extended graph from power iteration.
    pub direct: f64,
    /// `y(λ_c) + λ_c²` at the returned point.
    pub f_value: f64,
    pub bracket: (f64, f64),
    pub steps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Disk {
    pub center_re: f64,
    pub center_im: f64,
    pub radius: f64,
}

impl Disk {
    pub fn center(&self) -> Complex64 {
        Complex64::new(self.center_re, self.center_im)
    }

    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        (z - self.center()).norm() <= self.radius + slack
    }
}

/// Gershgorin disks of `H = TLXRT` at one `t`.
#[derive(Debug, Clone, Serialize)]
pub struct DiskSnapshot {
    pub t: f64,
    pub y: f64,
    pub disks: Vec<Disk>,
    /// Disks that contain `y(t)`.
    pub containing: Vec<usize>,
    pub first_disjoint: bool,
    /// `max_i (|H_ii| + r_i) / t²`.
    pub magnitude_ratio: f64,
}

pub struct Probe {
    host: Graph,
    blocks: AdditionBlocks,
    perron: Perron,
    b: CMatrix,
    /// Columns of `X` that are not identically zero.
    support: Vec<usize>,
    x_support: CMatrix,
    pub eps_gap: f64,
    pub f_tol: f64,
}

impl Probe {
    /// `neighbors` are node indices of `host`.
    pub fn new(host: &Graph, neighbors: &[usize]) -> Result<Self, PerturbationError> {
        let perron = perron(host)?;
        let blocks = AdditionBlocks::new(host, neighbors)?;
        let b = NbOperator::build(host).to_dense();
        let dim = host.dim();
        let support: Vec<usize> = (0..dim).filter(|&s| (0..dim).any(|r| blocks.x.get(r, s) != 0)).collect();
        let x_support = CMatrix::from_fn(dim, support.len(), |r, c| Complex64::new(blocks.x.get(r, support[c]) as f64, 0.0));
        Ok(Probe { host: host.clone(), blocks, perron, b, support, x_support, eps_gap: DEFAULT_EPS_GAP, f_tol: DEFAULT_F_TOL })
    }

    pub fn host(&self) -> &Graph {
        &self.host
    }

    pub fn blocks(&self) -> &AdditionBlocks {
        &self.blocks
    }

    pub fn perron(&self) -> &Perron {
        &self.perron
    }

    pub fn lambda(&self) -> f64 {
        self.perron.lambda
    }

    pub fn d(&self) -> usize {
        self.blocks.d
    }

    /// `α₁₁ = vᴸ X vᴿ` for the Perron pair.
    pub fn alpha11(&self) -> f64 {
        let dim = self.host.dim();
        let mut acc = 0.0;
        for r in 0..dim {
            for &s in &self.support {
                acc += self.perron.left[r] * self.blocks.x.get(r, s) as f64 * self.perron.right[s];
            }
        }
        acc
    }

    /// `Y(t)X` as a full `2m × 2m` matrix.
    pub fn yx(&self, t: Complex64) -> Result<CMatrix, PerturbationError> {
        let z = shifted_lu(&self.b, t)?.solve_matrix(&self.x_support)?;
        let dim = self.host.dim();
        let mut out = CMatrix::zeros(dim, dim);
        for (c, &s) in self.support.iter().enumerate() {
            out.set_column(s, &z.column(c));
        }
        Ok(out)
    }

    /// `−Y(t)X` restricted to the support of `X`; nonnegative for real `t > λ`.
    fn restricted(&self, t: f64) -> Result<DMatrix<f64>, PerturbationError> {
        let z = shifted_lu(&self.b, Complex64::new(t, 0.0))?.solve_matrix(&self.x_support)?;
        let k = self.support.len();
        Ok(DMatrix::from_fn(k, k, |a, c| (-z[(self.support[a], c)].re).max(0.0)))
    }

    pub fn y_of_t(&self, t: f64) -> Result<f64, PerturbationError> {
        let bound = self.lambda() + self.eps_gap;
        if t < bound {
            return Err(PerturbationError::TooCloseToPerron { t, bound });
        }
        if self.support.is_empty() {
            return Ok(0.0);
        }
        Ok(-nonnegative_radius(&self.restricted(t)?)?)
    }

    /// Whether `y(t)` is a simple eigenvalue of `Y(t)X` with no other
    /// eigenvalue of the same modulus.
    pub fn y_is_simple(&self, t: f64) -> Result<bool, PerturbationError> {
        let y = self.y_of_t(t)?;
        if self.support.is_empty() {
            return Ok(true);
        }
        let values = eig(&to_complex(&self.restricted(t)?))?.values;
        let tol = 1e-8 * y.abs().max(1e-300);
        Ok(values.iter().filter(|z| (z.norm() - y.abs()).abs() <= tol).count() == 1)
    }

    pub fn f(&self, t: f64) -> Result<f64, PerturbationError> {
        Ok(self.y_of_t(t)? + t * t)
    }

    /// Bisection for the root of `y(t) + t²` over an expanding bracket.
    pub fn find_lambda_c(&self) -> Result<LambdaC, PerturbationError> {
        let lambda = self.lambda();
        if self.support.is_empty() {
            return Ok(LambdaC { lambda_c: lambda, direct: lambda, f_value: 0.0, bracket: (lambda, lambda), steps: 0 });
        }
        let mut lo = lambda + self.eps_gap;
        let f_lo = self.f(lo)?;
        if f_lo >= 0.0 {
            return Err(PerturbationError::NoNegativeStart { value: f_lo });
        }
        let cap = 2f64.powi(20) * (1.0 + lambda);
        let mut step = 1.0;
        let mut hi = lambda + step;
        while self.f(hi)? <= 0.0 {
            lo = hi;
            step *= 2.0;
            if step > cap {
                return Err(PerturbationError::BracketCap { cap: lambda + cap });
            }
            hi = lambda + step;
        }
        let bracket = (lo, hi);
        let mut steps = 0;
        let (mut root, mut f_root) = (hi, self.f(hi)?);
        while steps < 200 {
            steps += 1;
            let mid = 0.5 * (lo + hi);
            let fm = self.f(mid)?;
            if fm.abs() < f_root.abs() {
                root = mid;
                f_root = fm;
            }
            if fm.abs() <= self.f_tol || hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
            if fm < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let direct = perron(&self.blocks.extended)?.lambda;
        Ok(LambdaC { lambda_c: root, direct, f_value: f_root, bracket, steps })
    }

    /// Distance from `−t²` to the nearest eigenvalue of `Y(t)X`.
    pub fn eigen_residual(&self, t: f64) -> Result<f64, PerturbationError> {
        if self.support.is_empty() {
            return Ok(t * t);
        }
        let values = eig(&to_complex(&self.restricted(t)?))?.values;
        Ok(values.iter().map(|z| (z - t * t).norm()).fold(f64::INFINITY, f64::min))
    }

    /// Relative error of `det(B^c − tI) = t^{2d} det(B − tI) det(I + Y(t)X/t²)`.
    pub fn yx_identity_residual(&self, t: Complex64) -> Result<f64, PerturbationError> {
        let bc = to_complex(&int_to_dense(&self.blocks.block_matrix()));
        let lhs = shifted_lu(&bc, t)?.log_det();
        let host = shifted_lu(&self.b, t)?.log_det();
        let dim = self.host.dim();
        let t2 = t * t;
        let m = CMatrix::identity(dim, dim) + self.yx(t)? / t2;
        let rhs = LogDet::from_complex(t).powi(2 * self.d() as i64).mul(host).mul(Lu::new(&m)?.log_det());
        Ok(LogDet::relative_difference(lhs, rhs))
    }

    /// Complex sample points away from both spectra.
    pub fn yx_samples(&self, seed: u64, count: usize) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bc = to_complex(&int_to_dense(&self.blocks.block_matrix()));
        let r_max = self.lambda() + 2.0;
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0;
        while out.len() < count && attempts < 100 * count.max(1) {
            attempts += 1;
            let r = rng.gen_range(0.5..r_max);
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            let t = Complex64::from_polar(r, theta);
            let ok = |a: &CMatrix| shifted_lu(a, t).map(|lu| lu.pivot_ratio() > 1e-6).unwrap_or(false);
            if ok(&self.b) && ok(&bc) {
                out.push(t);
            }
        }
        out
    }

    /// Gershgorin disks of `H = TLXRT`, with `R` the host eigenvectors
    /// ordered by decreasing modulus and then by argument in `[0, 2π)`,
    /// `L = R⁻¹` and `T_ii = 1/√(λ_i − t)`.
    pub fn gershgorin_trace(&self, ts: &[f64]) -> Result<Vec<DiskSnapshot>, PerturbationError> {
        let decomposition = eig(&self.b)?;
        let n = decomposition.values.len();
        let mut order: Vec<usize> = (0..n).collect();
        let arg = |z: Complex64| {
            let a = z.arg();
            if a < -1e-12 {
                a + std::f64::consts::TAU
            } else {
                a.max(0.0)
            }
        };
        let vals = &decomposition.values;
        order.sort_by(|&a, &b| {
            let (ma, mb) = (vals[a].norm(), vals[b].norm());
            if (ma - mb).abs() > 1e-9 * ma.max(mb) {
                mb.total_cmp(&ma)
            } else {
                arg(vals[a]).total_cmp(&arg(vals[b]))
            }
        });
        let values: Vec<Complex64> = order.iter().map(|&i| vals[i]).collect();
        let r = CMatrix::from_fn(n, n, |i, j| decomposition.vectors[(i, order[j])]);
        let lu = Lu::new(&r)?;
        if lu.pivot_ratio() < 1e-12 {
            return Err(PerturbationError::Defective);
        }
        let l = lu.inverse()?;
        let lambda_diag = CMatrix::from_diagonal(&CVector::from_vec(values.clone()));
        let reconstruction = (&r * lambda_diag * &l - &self.b).norm();
        if reconstruction > 1e-6 * self.b.norm() {
            return Err(PerturbationError::Defective);
        }
        let x = to_complex(&int_to_dense(&self.blocks.x));
        let k = &l * x * &r;

        let mut out = Vec::with_capacity(ts.len());
        for &t in ts {
            let y = self.y_of_t(t)?;
            let tdiag: Vec<Complex64> = values.iter().map(|&v| 1.0 / (v - t).sqrt()).collect();
            let h = CMatrix::from_fn(n, n, |i, j| tdiag[i] * k[(i, j)] * tdiag[j]);
            let disks: Vec<Disk> = (0..n)
                .map(|i| {
                    let radius = (0..n).filter(|&j| j != i).map(|j| h[(i, j)].norm()).sum();
                    Disk { center_re: h[(i, i)].re, center_im: h[(i, i)].im, radius }
                })
                .collect();
            let scale = disks.iter().map(|d| d.center().norm() + d.radius).fold(0.0, f64::max);
            let slack = 1e-9 * scale.max(1.0);
            let yz = Complex64::new(y, 0.0);
            let containing = (0..n).filter(|&i| disks[i].contains(yz, slack)).collect();
            let first_disjoint = n > 0
                && (1..n).all(|j| (disks[0].center() - disks[j].center()).norm() > disks[0].radius + disks[j].radius);
            out.push(DiskSnapshot { t, y, disks, containing, first_disjoint, magnitude_ratio: scale / (t * t) });
        }
        Ok(out)
    }
}

fn int_to_dense(m: &crate::exact::IntMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j) as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct YSample {
    pub t: f64,
    pub y: f64,
    pub f: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiskRow {
    pub t: f64,
    pub i: usize,
    pub center_re: f64,
    pub center_im: f64,
    pub radius: f64,
}

/// Everything one probe produces, ready for serialization.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbationReport {
    pub neighbors: Vec<usize>,
    pub d: usize,
    pub lambda: f64,
    pub lambda_c: f64,
    pub lambda_c_direct: f64,
    pub eigen_drop: f64,
    pub alpha11: f64,
    pub f_value: f64,
    /// Distance from `−λ_c²` to the spectrum of `Y(λ_c)X`.
    pub eigen_residual: f64,
    pub yx_identity_max_residual: f64,
    pub yx_identity_samples: usize,
    pub y_samples: Vec<YSample>,
    pub y_negative: bool,
    pub y_simple: bool,
    pub sign_changes: usize,
    pub y_in_disks: bool,
    pub first_disk_isolated_near_lambda: bool,
    pub disks: Vec<DiskRow>,
}

impl PerturbationReport {
    /// The per-probe invariants at the default tolerances.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |ok: bool, what: &str| {
            if !ok {
                out.push(what.to_string());
            }
        };
        check((self.lambda_c - self.lambda_c_direct).abs() <= 1e-6, "λ_c matches the direct Perron value");
        check(self.yx_identity_max_residual <= 1e-8, "determinant identity");
        check(self.alpha11 >= 0.0, "α₁₁ ≥ 0");
        check(self.y_in_disks, "y(t) lies in the Gershgorin union");
        if self.d >= 2 {
            check(self.lambda_c > self.lambda, "λ_c > λ");
            check(self.eigen_residual <= 1e-6, "−λ_c² is an eigenvalue of Y(λ_c)X");
            check(self.y_negative, "y(t) < 0");
            check(self.sign_changes == 1, "one sign change of y(t) + t²");
            check(self.first_disk_isolated_near_lambda, "first disk isolated near λ");
        } else {
            check(self.eigen_drop == 0.0, "no eigen-drop for a single edge");
        }
        out
    }
}

/// Runs every check of the pipeline on `host + c` with `c` adjacent to `neighbors`.
pub fn run_probe(host: &Graph, neighbors: &[usize], seed: u64) -> Result<PerturbationReport, PerturbationError> {
    let probe = Probe::new(host, neighbors)?;
    let lambda = probe.lambda();
    let lc = probe.find_lambda_c()?;
    let span = (lc.lambda_c - lambda).max(1.0) * 8.0;
    let y_samples: Vec<YSample> = (0..24)
        .map(|k| {
            let e = (-6.0 + k as f64 * (span.log10() + 6.0) / 23.0).min(span.log10());
            let t = lambda + 10f64.powf(e).max(2.0 * probe.eps_gap);
            probe.f(t).map(|f| YSample { t, y: f - t * t, f })
        })
        .collect::<Result<_, _>>()?;
    let sign_changes = y_samples.windows(2).filter(|w| (w[0].f < 0.0) != (w[1].f < 0.0)).count();
    let y_negative = y_samples.iter().all(|s| s.y < 0.0);
    let y_simple = probe.d() < 2 || [y_samples[0].t, lc.lambda_c, y_samples[23].t].iter().all(|&t| probe.y_is_simple(t).unwrap_or(false));

    let ts = yx_points(&probe, seed);
    let yx_identity_max_residual =
        ts.iter().map(|&t| probe.yx_identity_residual(t)).collect::<Result<Vec<_>, _>>()?.into_iter().fold(0.0, f64::max);
    let eigen_residual = if probe.d() >= 2 { probe.eigen_residual(lc.lambda_c)? } else { 0.0 };

    let scale = 1.0 + lambda;
    let mut disk_ts: Vec<f64> = [1e-4, 1e-3, 1e-2, 1e-1, 1.0].iter().map(|s| lambda + s * scale).collect();
    if lc.lambda_c > lambda + probe.eps_gap {
        disk_ts.push(lc.lambda_c);
    }
    disk_ts.push(lambda + 100.0 * scale * scale);
    let snapshots = probe.gershgorin_trace(&disk_ts)?;
    let y_in_disks = snapshots.iter().all(|s| !s.containing.is_empty());
    let first_disk_isolated_near_lambda =
        snapshots[0].first_disjoint && snapshots[0].containing.contains(&0) && snapshots[0].containing.len() == 1;
    let disks = snapshots
        .iter()
        .flat_map(|s| {
            s.disks.iter().enumerate().map(move |(i, d)| DiskRow {
                t: s.t,
                i,
                center_re: d.center_re,
                center_im: d.center_im,
                radius: d.radius,
            })
        })
        .collect();

    Ok(PerturbationReport {
        neighbors: probe.blocks.neighbors.clone(),
        d: probe.d(),
        lambda,
        lambda_c: lc.lambda_c,
        lambda_c_direct: lc.direct,
        eigen_drop: lc.lambda_c - lambda,
        alpha11: probe.alpha11(),
        f_value: lc.f_value,
        eigen_residual,
        yx_identity_max_residual,
        yx_identity_samples: ts.len(),
        y_samples,
        y_negative,
        y_simple,
        sign_changes,
        y_in_disks,
        first_disk_isolated_near_lambda,
        disks,
    })
}

fn yx_points(probe: &Probe, seed: u64) -> Vec<Complex64> {
    probe.yx_samples(seed, 10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_graph;
    use crate::linalg::eig_with_left;

    fn k4() -> Graph {
        load_graph("0 1\n0 2\n0 3\n1 2\n1 3\n2 3").unwrap()
    }

    fn bowtie() -> Graph {
        load_graph("0 1\n0 2\n0 3\n0 4\n1 2\n3 4").unwrap()
    }

    #[test]
    fn perron_of_k4_is_constant() {
        let p = perron(&k4()).unwrap();
        assert!((p.lambda - 2.0).abs() < 1e-10);
        let first = p.right[0];
        assert!(p.right.iter().all(|x| (x - first).abs() < 1e-9));
        let dot: f64 = p.left.iter().zip(&p.right).map(|(a, b)| a * b).sum();
        assert!((dot - 1.0).abs() < 1e-12);
    }

    #[test]
    fn perron_of_bowtie_matches_dense_spectrum() {
        let g = bowtie();
        let p = perron(&g).unwrap();
        let values = eig(&NbOperator::build(&g).to_dense()).unwrap().values;
        let best = values.iter().filter(|z| z.im.abs() < 1e-9).map(|z| z.re).fold(f64::MIN, f64::max);
        assert!((p.lambda - best).abs() <= 1e-8);
        assert!(p.right.iter().all(|&x| x > 0.0) && p.left.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn perron_rejections() {
        let c5 = load_graph("0 1\n1 2\n2 3\n3 4\n4 0").unwrap();
        assert!(matches!(perron(&c5), Err(PerturbationError::Graph(GraphError::CycleGraph { .. }))));
        let k33 = load_graph("0 3\n0 4\n0 5\n1 3\n1 4\n1 5\n2 3\n2 4\n2 5").unwrap();
        assert_eq!(perron(&k33).unwrap_err(), PerturbationError::Bipartite);
        let paw = load_graph("0 1\n1 2\n2 0\n2 3").unwrap();
        assert!(matches!(perron(&paw), Err(PerturbationError::Graph(GraphError::NotMinDegreeTwo { .. }))));
    }

    #[test]
    fn resolvent_paths_agree() {
        let g = bowtie();
        let dim = g.dim();
        let w: Vec<Complex64> = (0..dim).map(|i| Complex64::new(1.0 + i as f64, -(i as f64) * 0.5)).collect();
        let t = Complex64::new(0.3, 0.7);
        let lu = resolvent_apply(&g, t, &w).unwrap();
        let triple = eig_with_left(&NbOperator::build(&g).to_dense(), 1e-6).unwrap();
        let spectral = resolvent_apply_spectral(&triple, t, &w).unwrap();
        let diff: f64 = lu.iter().zip(&spectral).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff <= 1e-8, "{diff}");
    }

    #[test]
    fn resolvent_matches_neumann_series() {
        let g = k4();
        let op = NbOperator::build(&g);
        let t = Complex64::new(6.0, 1.0);
        let w: Vec<Complex64> = (0..g.dim()).map(|i| Complex64::new(f64::from(i as u8 % 3), 0.0)).collect();
        let x = resolvent_apply(&g, t, &w).unwrap();
        // (B − t)⁻¹ = −Σ Bᵏ / t^{k+1}
        let mut term: Vec<Complex64> = w.iter().map(|z| -z / t).collect();
        let mut sum = term.clone();
        for _ in 0..200 {
            term = op.apply(&term).unwrap().into_iter().map(|z| z / t).collect();
            sum.iter_mut().zip(&term).for_each(|(s, z)| *s += z);
        }
        let diff: f64 = x.iter().zip(&sum).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-10);
    }

    #[test]
    fn resolvent_at_zero_is_the_closed_form_inverse() {
        let g = bowtie();
        let w: Vec<Complex64> = (0..g.dim()).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let x = resolvent_apply(&g, Complex64::new(0.0, 0.0), &w).unwrap();
        let inv = NbOperator::build(&g).inverse().unwrap().to_dense();
        let expected = inv * CVector::from_vec(w);
        let diff = (CVector::from_vec(x) - expected).norm();
        assert!(diff < 1e-10);
        assert_eq!(resolvent_apply(&g, Complex64::new(0.5, 0.0), &vec![Complex64::new(0.0, 0.0); g.dim()]).unwrap().iter().map(|z| z.norm()).sum::<f64>(), 0.0);
    }

    #[test]
    fn k4_full_attachment_gives_k5() {
        let probe = Probe::new(&k4(), &[0, 1, 2, 3]).unwrap();
        let lc = probe.find_lambda_c().unwrap();
        assert!((lc.lambda_c - 3.0).abs() <= 1e-6, "{lc:?}");
        assert!((lc.direct - 3.0).abs() <= 1e-8);
        assert!(probe.eigen_residual(lc.lambda_c).unwrap() <= 1e-6);
    }

    #[test]
    fn y_is_negative_and_vanishes_at_infinity() {
        let probe = Probe::new(&k4(), &[0, 1]).unwrap();
        let lambda = probe.lambda();
        let mut prev = f64::NEG_INFINITY;
        for s in [1e-5, 1e-3, 0.1, 1.0, 10.0, 1e3, 1e5] {
            let y = probe.y_of_t(lambda + s).unwrap();
            assert!(y < 0.0);
            assert!(y > prev);
            prev = y;
        }
        assert!(prev.abs() < 1e-4);
        assert!(matches!(probe.y_of_t(lambda), Err(PerturbationError::TooCloseToPerron { .. })));
    }

    #[test]
    fn single_edge_addition_is_trivial() {
        let report = run_probe(&bowtie(), &[1], 3).unwrap();
        assert_eq!(report.eigen_drop, 0.0);
        assert!(report.y_samples.iter().all(|s| s.y == 0.0));
        assert!(report.failures().is_empty(), "{:?}", report.failures());
    }

    #[test]
    fn bowtie_probe_passes_every_check() {
        let report = run_probe(&bowtie(), &[1, 2], 11).unwrap();
        assert!(report.lambda_c > report.lambda);
        assert!(report.failures().is_empty(), "{:?}", report.failures());
        assert_eq!(report.yx_identity_samples, 10);
    }

    #[test]
    fn alpha11_matches_the_gershgorin_corner() {
        let probe = Probe::new(&bowtie(), &[1, 3]).unwrap();
        let t = probe.lambda() + 0.5;
        let snap = &probe.gershgorin_trace(&[t]).unwrap()[0];
        let expected = probe.alpha11() / (probe.lambda() - t);
        assert!((snap.disks[0].center() - expected).norm() < 1e-8);
        assert!(probe.alpha11() > 0.0);
    }

    #[test]
    fn disks_shrink_below_t_squared() {
        let probe = Probe::new(&k4(), &[0, 2, 3]).unwrap();
        let snap = probe.gershgorin_trace(&[1e4]).unwrap();
        assert!(snap[0].magnitude_ratio < 1.0);
    }
}
