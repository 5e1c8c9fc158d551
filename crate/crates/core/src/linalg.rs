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

//! Dense complex linear algebra: a nonsymmetric eigensolver (balancing,
//! Hessenberg reduction, single-shift complex QR, back-substitution), LU
//! solves and overflow-safe determinants, SVD-based numerical rank, and
//! eigenvalue clustering.

use std::cmp::Ordering;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::Zero;
use thiserror::Error;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Default cap on the dense dimension.
pub const DEFAULT_MAX_DIM: usize = 2000;
/// Relative singular-value threshold for numerical rank.
pub const DEFAULT_EPS_RANK: f64 = 1e-8;
/// Single-linkage radius for eigenvalue clusters.
pub const DEFAULT_DELTA_CLUSTER: f64 = 1e-6;

const ITERATIONS_PER_EIGENVALUE: usize = 60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {dim} exceeds the dense cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("QR iteration did not converge after {iterations} sweeps; {} eigenvalues converged", converged.len())]
    NoConvergence { iterations: usize, converged: Vec<Complex64> },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("length mismatch: {expected} vs {found}")]
    Dimension { expected: usize, found: usize },
    #[error("singular value decomposition failed to converge")]
    SvdFailure,
}

fn check_square(a: &CMatrix, cap: usize) -> Result<usize, LinalgError> {
    let (rows, cols) = a.shape();
    if rows != cols {
        return Err(LinalgError::NotSquare { rows, cols });
    }
    if rows > cap {
        return Err(LinalgError::DimensionCap { dim: rows, cap });
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    Ok(rows)
}

fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

pub fn to_complex(a: &DMatrix<f64>) -> CMatrix {
    a.map(|x| Complex64::new(x, 0.0))
}

/// Right eigenpairs, sorted by decreasing modulus and then by argument.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<Complex64>,
    /// Unit-norm right eigenvectors as columns.
    pub vectors: CMatrix,
}

impl EigenDecomposition {
    /// Largest `‖Ax − λx‖` over all pairs.
    pub fn max_residual(&self, a: &CMatrix) -> f64 {
        (0..self.values.len())
            .map(|i| {
                let x = self.vectors.column(i);
                (a * x - x * self.values[i]).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Right and binormalized left eigenvectors: `left.column(i)ᵀ A = λ_i left.column(i)ᵀ`
/// and `Lᵀ R = I` across each cluster.
#[derive(Debug, Clone)]
pub struct EigenTriple {
    pub values: Vec<Complex64>,
    pub right: CMatrix,
    pub left: CMatrix,
}

/// Eigen-decomposition with the default dimension cap.
pub fn eig(a: &CMatrix) -> Result<EigenDecomposition, LinalgError> {
    eig_with_cap(a, DEFAULT_MAX_DIM)
}

pub fn eig_with_cap(a: &CMatrix, cap: usize) -> Result<EigenDecomposition, LinalgError> {
    let n = check_square(a, cap)?;
    if n == 0 {
        return Ok(EigenDecomposition { values: Vec::new(), vectors: CMatrix::zeros(0, 0) });
    }
    let (mut h, scale) = balance(a);
    let mut z = hessenberg(&mut h);
    schur(&mut h, &mut z)?;
    let values: Vec<Complex64> = (0..n).map(|i| h[(i, i)]).collect();
    let mut vectors = triangular_eigenvectors(&h);
    vectors = &z * vectors;
    for j in 0..n {
        for i in 0..n {
            vectors[(i, j)] *= scale[i];
        }
        normalize_column(&mut vectors, j);
    }
    let order = spectral_order(&values);
    let values = order.iter().map(|&i| values[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    Ok(EigenDecomposition { values, vectors })
}

/// Eigenvalues with right and left eigenvectors. Left vectors come from the
/// eigenvectors of `Aᵀ`, paired with the right ones by eigenvalue proximity and
/// binormalized within each cluster of radius `delta`.
pub fn eig_with_left(a: &CMatrix, delta: f64) -> Result<EigenTriple, LinalgError> {
    let right = eig(a)?;
    let left = eig(&a.transpose())?;
    let n = right.values.len();
    let mut used = vec![false; n];
    let mut lmat = CMatrix::zeros(n, n);
    for i in 0..n {
        let best = (0..n)
            .filter(|&j| !used[j])
            .min_by(|&p, &q| {
                let dp = (left.values[p] - right.values[i]).norm();
                let dq = (left.values[q] - right.values[i]).norm();
                dp.total_cmp(&dq)
            })
            .expect("same dimension");
        used[best] = true;
        lmat.set_column(i, &left.vectors.column(best));
    }
    for cluster in cluster_eigenvalues(&right.values, delta) {
        let idx = &cluster.members;
        let k = idx.len();
        let wt = CMatrix::from_fn(k, n, |r, c| lmat[(c, idx[r])]);
        let x = CMatrix::from_fn(n, k, |r, c| right.vectors[(r, idx[c])]);
        let m = &wt * &x;
        let minv = Lu::new(&m).and_then(|lu| lu.inverse()).map_err(|_| LinalgError::Singular)?;
        // new Wᵀ = M⁻¹ Wᵀ so that Wᵀ X = I
        let new_wt = &minv * &wt;
        for (r, &col) in idx.iter().enumerate() {
            for c in 0..n {
                lmat[(c, col)] = new_wt[(r, c)];
            }
        }
    }
    Ok(EigenTriple { values: right.values, right: right.vectors, left: lmat })
}

fn normalize_column(m: &mut CMatrix, j: usize) {
    let norm = m.column(j).norm();
    if norm == 0.0 {
        return;
    }
    // fix the phase so the largest entry is real and positive
    let (mut best, mut best_abs) = (0, -1.0);
    for i in 0..m.nrows() {
        let a = m[(i, j)].norm();
        if a > best_abs * (1.0 + 1e-12) {
            best = i;
            best_abs = a;
        }
    }
    let phase = m[(best, j)].conj() / m[(best, j)].norm();
    for i in 0..m.nrows() {
        m[(i, j)] = m[(i, j)] * phase / norm;
    }
}

/// Indices sorting values by decreasing modulus; near-equal moduli are
/// ordered by argument in `(−π, π]`.
pub fn spectral_order(values: &[Complex64]) -> Vec<usize> {
    let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tol = 1e-9 * scale;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].norm().total_cmp(&values[a].norm()));
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end - 1]].norm() - values[order[end]].norm() <= tol {
            end += 1;
        }
        order[start..end].sort_by(|&a, &b| stable_arg(values[a], tol).total_cmp(&stable_arg(values[b], tol)));
        start = end;
    }
    order
}

fn stable_arg(z: Complex64, tol: f64) -> f64 {
    if z.norm() <= tol {
        return 0.0;
    }
    let im = if z.im.abs() <= tol { 0.0 } else { z.im };
    let arg = im.atan2(z.re);
    if arg <= -PI + 1e-12 {
        PI
    } else {
        arg
    }
}

/// Radix-2 diagonal scaling `D⁻¹AD`; returns the scaled matrix and `D`.
fn balance(a: &CMatrix) -> (CMatrix, Vec<f64>) {
    let n = a.nrows();
    let mut b = a.clone();
    let mut scale = vec![1.0; n];
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += abs1(b[(j, i)]);
                    r += abs1(b[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / 2.0;
            while c < g {
                f *= 2.0;
                c *= 4.0;
            }
            g = r * 2.0;
            while c >= g {
                f /= 2.0;
                c /= 4.0;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                scale[i] *= f;
                for j in 0..n {
                    b[(i, j)] /= f;
                    b[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
    (b, scale)
}

/// Householder reduction to upper Hessenberg form in place; returns the
/// accumulated unitary `Q` with `A = Q H Q*`.
fn hessenberg(h: &mut CMatrix) -> CMatrix {
    let n = h.nrows();
    let mut q = CMatrix::identity(n, n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x[0] / x[0].norm() };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H ← (I − 2vv*) H
        for j in 0..n {
            let mut dot = Complex64::zero();
            for (t, vi) in v.iter().enumerate() {
                dot += vi.conj() * h[(k + 1 + t, j)];
            }
            let dot = dot * 2.0;
            for (t, vi) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= vi * dot;
            }
        }
        // H ← H (I − 2vv*), Q ← Q (I − 2vv*)
        for m in [&mut *h, &mut q] {
            for i in 0..n {
                let mut dot = Complex64::zero();
                for (t, vi) in v.iter().enumerate() {
                    dot += m[(i, k + 1 + t)] * vi;
                }
                let dot = dot * 2.0;
                for (t, vi) in v.iter().enumerate() {
                    m[(i, k + 1 + t)] -= dot * vi.conj();
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = Complex64::zero();
        }
    }
    q
}

struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    /// Rotation `G` with `G·[a; b] = [r; 0]`.
    fn new(a: Complex64, b: Complex64) -> Self {
        let an = a.norm();
        let bn = b.norm();
        if bn == 0.0 {
            return Givens { c: 1.0, s: Complex64::zero() };
        }
        if an == 0.0 {
            return Givens { c: 0.0, s: b.conj() / bn };
        }
        let r = an.hypot(bn);
        Givens { c: an / r, s: (a / an) * b.conj() / r }
    }

    fn rows(&self, m: &mut CMatrix, k: usize, cols: std::ops::Range<usize>) {
        for j in cols {
            let x = m[(k, j)];
            let y = m[(k + 1, j)];
            m[(k, j)] = x * self.c + self.s * y;
            m[(k + 1, j)] = -self.s.conj() * x + y * self.c;
        }
    }

    fn cols(&self, m: &mut CMatrix, k: usize, rows: std::ops::Range<usize>) {
        for i in rows {
            let x = m[(i, k)];
            let y = m[(i, k + 1)];
            m[(i, k)] = x * self.c + y * self.s.conj();
            m[(i, k + 1)] = -x * self.s + y * self.c;
        }
    }
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let p = (a - d) * 0.5;
    let bc = b * c;
    let disc = (p * p + bc).sqrt();
    let den1 = p + disc;
    let den2 = p - disc;
    let den = if den1.norm() >= den2.norm() { den1 } else { den2 };
    if den.norm() == 0.0 {
        d
    } else {
        d - bc / den
    }
}

/// Reduces an upper Hessenberg `h` to upper triangular Schur form in place,
/// accumulating the unitary transformations into `z`.
fn schur(h: &mut CMatrix, z: &mut CMatrix) -> Result<(), LinalgError> {
    let n = h.nrows();
    let eps = f64::EPSILON;
    let hnorm = h.iter().map(|x| x.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let max_total = ITERATIONS_PER_EIGENVALUE * n.max(1);
    let mut total = 0usize;
    let mut iter = 0usize;
    let mut hi = n - 1;
    let mut rotations: Vec<Givens> = Vec::with_capacity(n);
    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let mut s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if s == 0.0 {
                s = hnorm;
            }
            if h[(lo, lo - 1)].norm() <= eps * s {
                h[(lo, lo - 1)] = Complex64::zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > max_total {
            let converged = (hi + 1..n).map(|i| h[(i, i)]).collect();
            return Err(LinalgError::NoConvergence { iterations: total, converged });
        }
        let mu = if iter % 10 == 0 {
            let sub = h[(hi, hi - 1)].norm() + if hi >= 2 { h[(hi - 1, hi - 2)].norm() } else { 0.0 };
            let angle = 0.7 * (iter / 10) as f64 + 0.3;
            h[(hi, hi)] + Complex64::from_polar(0.75 * sub, angle)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        rotations.clear();
        for k in lo..hi {
            let g = Givens::new(h[(k, k)], h[(k + 1, k)]);
            g.rows(h, k, k..n);
            h[(k + 1, k)] = Complex64::zero();
            rotations.push(g);
        }
        for (t, g) in rotations.iter().enumerate() {
            let k = lo + t;
            g.cols(h, k, 0..(k + 2).min(hi + 1));
            g.cols(z, k, 0..n);
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            h[(i, j)] = Complex64::zero();
        }
    }
    Ok(())
}

/// Eigenvectors of an upper triangular matrix by back-substitution; column
/// `k` has a unit entry at position `k` and zeros below.
fn triangular_eigenvectors(t: &CMatrix) -> CMatrix {
    let n = t.nrows();
    let tnorm = t.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let smin = (f64::EPSILON * tnorm).max(f64::MIN_POSITIVE);
    let mut y = CMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = Complex64::zero();
            for j in i + 1..=k {
                acc += t[(i, j)] * y[(j, k)];
            }
            let mut den = t[(i, i)] - lambda;
            if den.norm() < smin {
                den = Complex64::new(smin, 0.0);
            }
            y[(i, k)] = -acc / den;
        }
        // rescale to keep entries bounded when denominators were tiny
        let big = (0..=k).map(|i| y[(i, k)].norm()).fold(0.0, f64::max);
        if big > 1e100 {
            for i in 0..=k {
                y[(i, k)] /= big;
            }
        }
    }
    y
}

/// `value = mantissa · 2^exponent`; the zero determinant has mantissa 0 and
/// exponent `i64::MIN`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub mantissa: Complex64,
    pub exponent: i64,
}

impl LogDet {
    pub const ZERO: LogDet = LogDet { mantissa: Complex64 { re: 0.0, im: 0.0 }, exponent: i64::MIN };
    pub const ONE: LogDet = LogDet { mantissa: Complex64 { re: 1.0, im: 0.0 }, exponent: 0 };

    pub fn from_complex(z: Complex64) -> Self {
        Self::ONE.mul_complex(z)
    }

    pub fn is_zero(&self) -> bool {
        self.exponent == i64::MIN
    }

    fn normalized(mut self) -> Self {
        if self.mantissa.norm() == 0.0 {
            return Self::ZERO;
        }
        let e = self.mantissa.norm().log2().floor() as i64;
        self.mantissa /= 2f64.powi(e as i32);
        self.exponent += e;
        self
    }

    pub fn mul_complex(self, z: Complex64) -> Self {
        if self.is_zero() || z.norm() == 0.0 {
            return Self::ZERO;
        }
        LogDet { mantissa: self.mantissa * z, exponent: self.exponent }.normalized()
    }

    pub fn mul(self, other: LogDet) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        LogDet { mantissa: self.mantissa * other.mantissa, exponent: self.exponent + other.exponent }.normalized()
    }

    pub fn powi(self, p: i64) -> Self {
        if p == 0 {
            return Self::ONE;
        }
        if self.is_zero() {
            return if p > 0 { Self::ZERO } else { LogDet { mantissa: Complex64::new(f64::INFINITY, 0.0), exponent: 0 } };
        }
        let mut acc = Self::ONE;
        let base = if p > 0 { self } else { self.recip() };
        for _ in 0..p.unsigned_abs() {
            acc = acc.mul(base);
        }
        acc
    }

    pub fn recip(self) -> Self {
        LogDet { mantissa: 1.0 / self.mantissa, exponent: -self.exponent }.normalized()
    }

    pub fn to_complex(self) -> Complex64 {
        if self.is_zero() {
            return Complex64::zero();
        }
        let e = self.exponent.clamp(-2000, 2000) as i32;
        // split the power to avoid premature overflow in 2^e
        self.mantissa * 2f64.powi(e / 2) * 2f64.powi(e - e / 2)
    }

    /// `|a − b| / max(|a|, |b|)`, computed without leaving mantissa form.
    pub fn relative_difference(a: LogDet, b: LogDet) -> f64 {
        match (a.is_zero(), b.is_zero()) {
            (true, true) => 0.0,
            (true, false) | (false, true) => 1.0,
            _ => {
                let (big, small) = if (a.exponent, a.mantissa.norm()) >= (b.exponent, b.mantissa.norm()) { (a, b) } else { (b, a) };
                let shift = (small.exponent - big.exponent).max(-2000) as i32;
                let s = small.mantissa * 2f64.powi(shift);
                (big.mantissa - s).norm() / big.mantissa.norm().max(s.norm())
            }
        }
    }
}

/// LU factorization with partial pivoting, `PA = LU`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
    swaps: usize,
    singular: bool,
}

impl Lu {
    pub fn new(a: &CMatrix) -> Result<Self, LinalgError> {
        let n = check_square(a, usize::MAX)?;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let mut singular = false;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                lu.swap_rows(p, k);
                perm.swap(p, k);
                swaps += 1;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Lu { lu, perm, swaps, singular })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn log_det(&self) -> LogDet {
        if self.singular {
            return LogDet::ZERO;
        }
        let mut d = if self.swaps % 2 == 0 { LogDet::ONE } else { LogDet::from_complex(Complex64::new(-1.0, 0.0)) };
        for i in 0..self.dim() {
            d = d.mul_complex(self.lu[(i, i)]);
        }
        d
    }

    /// Smallest pivot modulus relative to the largest; 0 when singular.
    pub fn pivot_ratio(&self) -> f64 {
        if self.singular {
            return 0.0;
        }
        let mods: Vec<f64> = (0..self.dim()).map(|i| self.lu[(i, i)].norm()).collect();
        let max = mods.iter().copied().fold(0.0, f64::max);
        let min = mods.iter().copied().fold(f64::INFINITY, f64::min);
        if max == 0.0 {
            0.0
        } else {
            min / max
        }
    }

    pub fn solve(&self, b: &CVector) -> Result<CVector, LinalgError> {
        let n = self.dim();
        if b.len() != n {
            return Err(LinalgError::Dimension { expected: n, found: b.len() });
        }
        if self.singular {
            return Err(LinalgError::Singular);
        }
        let mut x = CVector::from_fn(n, |i, _| b[self.perm[i]]);
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[(i, j)];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[(i, j)];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] /= self.lu[(i, i)];
        }
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::Singular);
        }
        Ok(x)
    }

    pub fn solve_matrix(&self, b: &CMatrix) -> Result<CMatrix, LinalgError> {
        let mut out = CMatrix::zeros(b.nrows(), b.ncols());
        for j in 0..b.ncols() {
            let col = self.solve(&b.column(j).into_owned())?;
            out.set_column(j, &col);
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<CMatrix, LinalgError> {
        self.solve_matrix(&CMatrix::identity(self.dim(), self.dim()))
    }
}

pub fn solve(a: &CMatrix, b: &CVector) -> Result<CVector, LinalgError> {
    Lu::new(a)?.solve(b)
}

pub fn determinant(a: &CMatrix) -> Result<LogDet, LinalgError> {
    Ok(Lu::new(a)?.log_det())
}

#[derive(Debug, Clone)]
pub struct RankReport {
    pub rank: usize,
    pub nullity: usize,
    pub singular_values: Vec<f64>,
    /// Orthonormal null-space basis as columns (square input only).
    pub null_space: Option<CMatrix>,
}

/// Rank from singular values above `eps_rank · σ_max`.
pub fn numerical_rank(a: &CMatrix, eps_rank: f64) -> Result<RankReport, LinalgError> {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Ok(RankReport { rank: 0, nullity: cols, singular_values: Vec::new(), null_space: None });
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    let svd = nalgebra::linalg::SVD::try_new(a.clone(), false, rows >= cols, f64::EPSILON, 0)
        .ok_or(LinalgError::SvdFailure)?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = singular_values.first().copied().unwrap_or(0.0);
    let rank = if smax == 0.0 { 0 } else { singular_values.iter().filter(|&&s| s > eps_rank * smax).count() };
    let nullity = cols - rank;
    let null_space = match (&svd.v_t, nullity) {
        (Some(v_t), k) if k > 0 => {
            let mut basis = CMatrix::zeros(cols, k);
            for (c, &row) in order[rank..].iter().enumerate() {
                for i in 0..cols {
                    basis[(i, c)] = v_t[(row, i)].conj();
                }
            }
            Some(basis)
        }
        _ => None,
    };
    Ok(RankReport { rank, nullity, singular_values, null_space })
}

/// Rank of a set of column vectors.
pub fn column_rank(vectors: &[CVector], eps_rank: f64) -> Result<usize, LinalgError> {
    if vectors.is_empty() {
        return Ok(0);
    }
    let m = CMatrix::from_columns(vectors);
    // rank is invariant under transposition; the SVD wants rows ≥ cols
    let m = if m.nrows() >= m.ncols() { m } else { m.transpose() };
    Ok(numerical_rank(&m, eps_rank)?.rank)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub centroid: Complex64,
    /// Indices into the clustered slice, ascending.
    pub members: Vec<usize>,
}

impl Cluster {
    pub fn multiplicity(&self) -> usize {
        self.members.len()
    }
}

/// Single-linkage clustering: values within `delta` of each other (possibly
/// through a chain) share a cluster. Clusters are ordered by their first member.
pub fn cluster_eigenvalues(values: &[Complex64], delta: f64) -> Vec<Cluster> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].re.total_cmp(&values[b].re));
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            if values[j].re - values[i].re > delta {
                break;
            }
            if (values[i] - values[j]).norm() <= delta {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
        .into_iter()
        .map(|members| {
            let sum: Complex64 = members.iter().map(|&i| values[i]).sum();
            Cluster { centroid: sum / members.len() as f64, members }
        })
        .collect()
}

/// Compares two multisets of complex numbers up to `tol` by sorting both with
/// the same key and greedily matching nearest neighbors. Returns the largest
/// matched distance, or `None` when sizes differ.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| a[j].norm().partial_cmp(&a[i].norm()).unwrap_or(Ordering::Equal));
    for i in order {
        let (best, dist) = (0..b.len())
            .filter(|&j| !used[j])
            .map(|j| (j, (a[i] - b[j]).norm()))
            .fold((usize::MAX, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
        used[best] = true;
        worst = worst.max(dist);
    }
    Some(worst)
}
