//! Dense row-major matrices with the handful of kernels the bounds need:
//! norms, Gram products, Cholesky solves and extreme eigenvalues.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<Vec<Vec<f64>>> for DenseMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        DenseMatrix::from_rows(&rows)
    }
}

impl From<DenseMatrix> for Vec<Vec<f64>> {
    fn from(m: DenseMatrix) -> Self {
        (0..m.rows).map(|i| m.row(i).to_vec()).collect()
    }
}

/// Frobenius, operator and largest-row norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixNorms {
    pub frobenius: f64,
    pub operator: f64,
    pub row_l2_max: f64,
}

const EIG_TOL: f64 = 1e-8;
const EIG_MAX_ITER: usize = 10_000;

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in d.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        ensure(data.len() == rows * cols, "data length must equal rows*cols")?;
        ensure(data.iter().all(|v| v.is_finite()), "matrix entries must be finite")?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        ensure(rows.iter().all(|row| row.len() == c), "ragged matrix rows")?;
        Self::from_vec(r, c, rows.concat())
    }

    /// Parse comma-separated rows.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let row: std::result::Result<Vec<f64>, _> = line.split(',').map(|v| v.trim().parse::<f64>()).collect();
            rows.push(row.map_err(|e| Error::Invalid(format!("bad matrix entry: {e}")))?);
        }
        Self::from_rows(&rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| a * v).collect() }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        ensure(self.cols == other.rows, "inner dimensions differ")?;
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for (o, b) in orow.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Aᵀ x`.
    pub fn tmatvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += xi * a;
            }
        }
        out
    }

    /// `AᵀA`.
    pub fn gram(&self) -> Self {
        let p = self.cols;
        let mut g = Self::zeros(p, p);
        for i in 0..self.rows {
            let r = self.row(i);
            for j in 0..p {
                let a = r[j];
                if a == 0.0 {
                    continue;
                }
                let grow = &mut g.data[j * p..(j + 1) * p];
                for k in j..p {
                    grow[k] += a * r[k];
                }
            }
        }
        for j in 0..p {
            for k in 0..j {
                g.data[j * p + k] = g.data[k * p + j];
            }
        }
        g
    }

    /// `xᵀ A x` for square `A`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.matvec(x))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max_i ‖A_i·‖₂`.
    pub fn row_l2_max(&self) -> f64 {
        (0..self.rows).map(|i| norm2(self.row(i))).fold(0.0, f64::max)
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        if self.data.iter().all(|&v| v == 0.0) {
            return 0.0;
        }
        let m = if self.rows < self.cols { self.transpose().gram() } else { self.gram() };
        m.sym_max_eigen().max(0.0).sqrt()
    }

    pub fn norms(&self) -> MatrixNorms {
        MatrixNorms { frobenius: self.frobenius(), operator: self.operator_norm(), row_l2_max: self.row_l2_max() }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    /// Largest eigenvalue of a symmetric matrix by power iteration on the
    /// shifted matrix `M + sI`, which is positive semidefinite.
    pub fn sym_max_eigen(&self) -> f64 {
        let n = self.rows;
        if n == 0 {
            return 0.0;
        }
        // Gershgorin lower bound gives the shift
        let lower = (0..n)
            .map(|i| self.get(i, i) - (0..n).filter(|&j| j != i).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let shift = (-lower).max(0.0);
        let mut v = start_vector(n);
        let mut rho = f64::NAN;
        let mut stable = 0;
        for _ in 0..EIG_MAX_ITER {
            let mut w = self.matvec(&v);
            for (wi, vi) in w.iter_mut().zip(&v) {
                *wi += shift * vi;
            }
            let new_rho = dot(&v, &w);
            let nw = norm2(&w);
            if nw == 0.0 {
                return -shift;
            }
            let resid = w.iter().zip(&v).map(|(a, b)| (a - new_rho * b).powi(2)).sum::<f64>().sqrt();
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / nw;
            }
            if (new_rho - rho).abs() <= 1e-15 * new_rho.abs() {
                stable += 1;
            } else {
                stable = 0;
            }
            rho = new_rho;
            if resid <= EIG_TOL * EIG_TOL * rho.abs() || stable >= 3 {
                break;
            }
        }
        rho - shift
    }

    /// Smallest eigenvalue of a symmetric positive semidefinite matrix by
    /// inverse iteration on `M + τI` with a tiny shift `τ`.
    pub fn psd_min_eigen(&self) -> Result<f64> {
        let n = self.rows;
        ensure(self.is_square() && n > 0, "square non-empty matrix required")?;
        let top = self.sym_max_eigen();
        if top <= 0.0 {
            return Ok(top);
        }
        let tau = 1e-12 * top;
        let mut shifted = self.clone();
        for i in 0..n {
            shifted.data[i * n + i] += tau;
        }
        let chol = shifted.cholesky()?;
        let mut v = start_vector(n);
        let mut mu = f64::NAN;
        let mut stable = 0;
        for _ in 0..EIG_MAX_ITER {
            let w = chol_solve(&chol, &v);
            let nw = norm2(&w);
            // Rayleigh quotient of the shifted inverse
            let new_mu = dot(&v, &w);
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / nw;
            }
            if (new_mu - mu).abs() <= 1e-15 * new_mu.abs() {
                stable += 1;
            } else {
                stable = 0;
            }
            mu = new_mu;
            if stable >= 3 {
                break;
            }
        }
        Ok(self.quadratic_form(&v).max(0.0))
    }

    /// Lower-triangular Cholesky factor, row-major.
    pub fn cholesky(&self) -> Result<Self> {
        ensure(self.is_square(), "square matrix required")?;
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                if i == j {
                    if s <= 0.0 {
                        return Err(Error::RankDeficient);
                    }
                    l.set(i, i, s.sqrt());
                } else {
                    l.set(i, j, s / l.get(j, j));
                }
            }
        }
        Ok(l)
    }

    /// Solve `M x = b` for symmetric positive definite `M`.
    pub fn solve_spd(&self, b: &[f64]) -> Result<Vec<f64>> {
        let l = self.cholesky()?;
        Ok(chol_solve(&l, b))
    }

    /// Inverse of a symmetric positive definite matrix.
    pub fn inverse_spd(&self) -> Result<Self> {
        let l = self.cholesky()?;
        let n = self.rows;
        let mut inv = Self::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = chol_solve(&l, &e);
            for i in 0..n {
                inv.set(i, j, col[i]);
            }
        }
        Ok(inv)
    }

    /// `D A D` for diagonal `D = diag(d)`.
    pub fn sandwich_diag(&self, d: &[f64]) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[i * self.cols + j] *= d[i] * d[j];
            }
        }
        out
    }

    /// `A D` for diagonal `D = diag(d)`.
    pub fn right_diag(&self, d: &[f64]) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[i * self.cols + j] *= d[j];
            }
        }
        out
    }

    /// Matrix with i.i.d. standard normal entries.
    pub fn gaussian(rows: usize, cols: usize, stream: RngStream) -> Self {
        let mut rng = stream.rng();
        let data = (0..rows * cols).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
        Self { rows, cols, data }
    }
}

fn start_vector(n: usize) -> Vec<f64> {
    let mut rng = RngStream::new(0x5EED, 0).rng();
    let v: Vec<f64> = (0..n).map(|_| 0.5 + rng.random::<f64>()).collect();
    let nv = norm2(&v);
    v.into_iter().map(|x| x / nv).collect()
}

pub(crate) fn chol_solve(l: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l.get(i, k) * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l.get(k, i) * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    y
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
