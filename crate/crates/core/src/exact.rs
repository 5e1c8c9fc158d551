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

//! Exact integer and modular matrix arithmetic for the claims that hold
//! exactly: walk counts, nilpotency, symmetry and generalized-kernel ranks.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("integer overflow in exact matrix arithmetic")]
    Overflow,
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    Dimension { left: (usize, usize), right: (usize, usize) },
}

/// Dense row-major matrix of `i64` with overflow-checked arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        IntMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: i64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn nonzeros(&self) -> usize {
        self.data.iter().filter(|&&x| x != 0).count()
    }

    pub fn checked_mul(&self, rhs: &IntMatrix) -> Result<IntMatrix, ExactError> {
        if self.cols != rhs.rows {
            return Err(ExactError::Dimension {
                left: (self.rows, self.cols),
                right: (rhs.rows, rhs.cols),
            });
        }
        let mut out = IntMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if b == 0 {
                        continue;
                    }
                    let prod = a.checked_mul(b).ok_or(ExactError::Overflow)?;
                    let slot = &mut out.data[i * rhs.cols + j];
                    *slot = slot.checked_add(prod).ok_or(ExactError::Overflow)?;
                }
            }
        }
        Ok(out)
    }

    pub fn checked_pow(&self, p: u32) -> Result<IntMatrix, ExactError> {
        let mut result = IntMatrix::identity(self.rows);
        for _ in 0..p {
            result = result.checked_mul(self)?;
        }
        Ok(result)
    }

    pub fn mul_vec(&self, v: &[i64]) -> Result<Vec<i64>, ExactError> {
        if v.len() != self.cols {
            return Err(ExactError::Dimension { left: (self.rows, self.cols), right: (v.len(), 1) });
        }
        (0..self.rows)
            .map(|i| {
                (0..self.cols).try_fold(0i64, |acc, j| {
                    let prod = self.get(i, j).checked_mul(v[j]).ok_or(ExactError::Overflow)?;
                    acc.checked_add(prod).ok_or(ExactError::Overflow)
                })
            })
            .collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(|&x| x as f64).collect()
    }
}

/// Mersenne prime 2^61 − 1.
pub const PRIME_A: u64 = (1 << 61) - 1;
/// Largest prime below 2^61.
pub const PRIME_B: u64 = 2_305_843_009_213_693_921;

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, p);
        }
        base = mulmod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Dense square matrix over Z/pZ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModMatrix {
    n: usize,
    p: u64,
    data: Vec<u64>,
}

impl ModMatrix {
    pub fn from_int(m: &IntMatrix, p: u64) -> Self {
        assert_eq!(m.rows, m.cols, "square matrix expected");
        let data = m.data.iter().map(|&x| x.rem_euclid(p as i64) as u64).collect();
        ModMatrix { n: m.rows, p, data }
    }

    pub fn mul(&self, rhs: &ModMatrix) -> ModMatrix {
        let n = self.n;
        let p = self.p;
        let mut data = vec![0u64; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    let b = rhs.data[k * n + j];
                    if b != 0 {
                        let slot = &mut data[i * n + j];
                        *slot = (*slot + mulmod(a, b, p)) % p;
                    }
                }
            }
        }
        ModMatrix { n, p, data }
    }

    /// Rank by Gaussian elimination over the field.
    pub fn rank(&self) -> usize {
        let n = self.n;
        let p = self.p;
        let mut a = self.data.clone();
        let mut rank = 0;
        for col in 0..n {
            let Some(pivot) = (rank..n).find(|&r| a[r * n + col] != 0) else {
                continue;
            };
            for j in 0..n {
                a.swap(rank * n + j, pivot * n + j);
            }
            let inv = powmod(a[rank * n + col], p - 2, p);
            for r in 0..n {
                if r == rank || a[r * n + col] == 0 {
                    continue;
                }
                let factor = mulmod(a[r * n + col], inv, p);
                for j in col..n {
                    let sub = mulmod(factor, a[rank * n + j], p);
                    a[r * n + j] = (a[r * n + j] + p - sub) % p;
                }
            }
            rank += 1;
        }
        rank
    }
}

/// Rank of an integer matrix over the rationals. Ranks modulo a prime never
/// exceed the rational rank, so the maximum over two large primes is exact
/// unless both primes divide the same nonzero minor.
pub fn rational_rank(m: &IntMatrix) -> usize {
    [PRIME_A, PRIME_B]
        .iter()
        .map(|&p| ModMatrix::from_int(m, p).rank())
        .max()
        .unwrap_or(0)
}

/// Ranks of `M, M², M³, …` until they stop decreasing. Returns the sequence
/// starting with `rank(M⁰) = n`; the last entry is the stable rank, and
/// `n − stable` is the algebraic multiplicity of the eigenvalue 0.
pub fn kernel_chain_ranks(m: &IntMatrix) -> Vec<usize> {
    let n = m.rows;
    let mut ranks = vec![n];
    let mut powers: Vec<ModMatrix> = [PRIME_A, PRIME_B].iter().map(|&p| ModMatrix::from_int(m, p)).collect();
    let base = powers.clone();
    loop {
        let r = powers.iter().map(ModMatrix::rank).max().unwrap_or(0);
        let last = *ranks.last().expect("nonempty");
        if r == last {
            break;
        }
        ranks.push(r);
        if r == 0 {
            break;
        }
        for (pw, b) in powers.iter_mut().zip(&base) {
            *pw = pw.mul(b);
        }
    }
    ranks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_power_of_a_shift() {
        let shift = IntMatrix::from_fn(4, 4, |i, j| i64::from(j == i + 1));
        assert!(!shift.checked_pow(3).unwrap().is_zero());
        assert!(shift.checked_pow(4).unwrap().is_zero());
        assert_eq!(kernel_chain_ranks(&shift), vec![4, 3, 2, 1, 0]);
    }

    #[test]
    fn overflow_is_reported() {
        let big = IntMatrix::from_fn(2, 2, |_, _| i64::MAX / 2);
        assert_eq!(big.checked_mul(&big), Err(ExactError::Overflow));
    }

    #[test]
    fn rank_of_small_matrices() {
        let m = IntMatrix::from_fn(3, 3, |i, j| (i * 3 + j) as i64);
        assert_eq!(rational_rank(&m), 2);
        assert_eq!(rational_rank(&IntMatrix::identity(5)), 5);
        assert_eq!(rational_rank(&IntMatrix::zeros(3, 3)), 0);
        // negative entries reduce correctly
        let m = IntMatrix::from_fn(2, 2, |i, j| if i == j { -1 } else { 1 });
        assert_eq!(rational_rank(&m), 1);
    }

    #[test]
    fn chain_for_invertible_matrix() {
        assert_eq!(kernel_chain_ranks(&IntMatrix::identity(3)), vec![3]);
    }
}
