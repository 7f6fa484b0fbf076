//! Small dense complex matrices (N <= 3 in practice) and the handful of
//! closed-form operations the adiabatic engine needs.

use num_complex::Complex64;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from rows; panics if the rows are ragged.
    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), dim, "matrix rows must form a square");
            data.extend_from_slice(r);
        }
        CMatrix { dim, data }
    }

    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&v| C64::new(v, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self[(r, c)] * v[c]).sum())
            .collect()
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, w: &[C64]) -> Vec<C64> {
        (0..self.dim)
            .map(|c| (0..self.dim).map(|r| w[r] * self[(r, c)]).sum())
            .collect()
    }

    pub fn shifted(&self, lambda: C64) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            m[(i, i)] -= lambda;
        }
        m
    }

    pub fn determinant(&self) -> C64 {
        match self.dim {
            0 => C64::new(1.0, 0.0),
            1 => self[(0, 0)],
            2 => self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)],
            3 => {
                let m = |r, c| self[(r, c)];
                m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
                    - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                    + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
            }
            _ => lu_determinant(self),
        }
    }

    /// Classical adjugate (transposed cofactor matrix), N = 2 or 3.
    pub fn adjugate(&self) -> Result<Self> {
        let m = |r: usize, c: usize| self[(r, c)];
        match self.dim {
            2 => Ok(CMatrix::from_rows(&[
                [m(1, 1), -m(0, 1)],
                [-m(1, 0), m(0, 0)],
            ])),
            3 => {
                let mut adj = CMatrix::zeros(3);
                for r in 0..3 {
                    for c in 0..3 {
                        let (r0, r1) = others(r);
                        let (c0, c1) = others(c);
                        let minor = m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0);
                        let sign = if (r + c) % 2 == 0 { 1.0 } else { -1.0 };
                        adj[(c, r)] = minor * sign;
                    }
                }
                Ok(adj)
            }
            n => Err(Error::UnsupportedDimension(n)),
        }
    }

    /// Monic characteristic polynomial coefficients `[a_0, ..., a_{N-1}]` of
    /// `det(lambda I - M) = lambda^N + a_{N-1} lambda^{N-1} + ... + a_0`.
    pub fn char_poly(&self) -> Result<Vec<C64>> {
        let m = |r: usize, c: usize| self[(r, c)];
        match self.dim {
            2 => Ok(vec![self.determinant(), -self.trace()]),
            3 => {
                let minors = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2)
                    - m(0, 2) * m(2, 0)
                    + m(1, 1) * m(2, 2)
                    - m(1, 2) * m(2, 1);
                Ok(vec![-self.determinant(), minors, -self.trace()])
            }
            n => Err(Error::UnsupportedDimension(n)),
        }
    }

    /// Induced 1-norm (max column sum).
    pub fn norm_one(&self) -> f64 {
        (0..self.dim)
            .map(|c| (0..self.dim).map(|r| self[(r, c)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.dim;
        let mut a = self.clone();
        let mut inv = CMatrix::identity(n);
        for col in 0..n {
            let pivot = (col..n).max_by(|&i, &j| {
                a[(i, col)]
                    .norm()
                    .partial_cmp(&a[(j, col)].norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
            if a[(pivot, col)].norm() == 0.0 || !a[(pivot, col)].norm().is_finite() {
                return None;
            }
            if pivot != col {
                for c in 0..n {
                    a.data.swap(pivot * n + c, col * n + c);
                    inv.data.swap(pivot * n + c, col * n + c);
                }
            }
            let p = a[(col, col)];
            for c in 0..n {
                a[(col, c)] /= p;
                inv[(col, c)] /= p;
            }
            for r in 0..n {
                if r != col {
                    let f = a[(r, col)];
                    if f != C64::new(0.0, 0.0) {
                        for c in 0..n {
                            let (ac, ic) = (a[(col, c)], inv[(col, c)]);
                            a[(r, c)] -= f * ac;
                            inv[(r, c)] -= f * ic;
                        }
                    }
                }
            }
        }
        Some(inv)
    }

    /// 1-norm condition number; infinite when the matrix is singular.
    pub fn condition(&self) -> f64 {
        match self.inverse() {
            Some(inv) => self.norm_one() * inv.norm_one(),
            None => f64::INFINITY,
        }
    }
}

fn others(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

fn lu_determinant(m: &CMatrix) -> C64 {
    let n = m.dim;
    let mut a = m.clone();
    let mut det = C64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[(i, col)].norm().total_cmp(&a[(j, col)].norm()))
            .unwrap();
        if a[(pivot, col)].norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if pivot != col {
            for c in 0..n {
                a.data.swap(pivot * n + c, col * n + c);
            }
            det = -det;
        }
        det *= a[(col, col)];
        for r in col + 1..n {
            let f = a[(r, col)] / a[(col, col)];
            for c in col..n {
                let v = a[(col, c)];
                a[(r, c)] -= f * v;
            }
        }
    }
    det
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

/// Bilinear (non-conjugating) product `w . v`.
pub fn dot(w: &[C64], v: &[C64]) -> C64 {
    w.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Solves `A x = b` for a small square system; `None` if singular.
pub fn solve(a: &CMatrix, b: &[C64]) -> Option<Vec<C64>> {
    let inv = a.inverse()?;
    Some(inv.mul_vec(b))
}
