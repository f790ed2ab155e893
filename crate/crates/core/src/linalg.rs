//! Small dense linear algebra helpers.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// 2×2 complex matrix stored row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
    ]);
    pub const ZERO: Mat2 = Mat2([[C64::new(0.0, 0.0); 2]; 2]);

    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Self::new(a, C64::new(0.0, 0.0), C64::new(0.0, 0.0), d)
    }

    pub fn upper(x: C64) -> Self {
        Self::new(C64::new(1.0, 0.0), x, C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn lower(x: C64) -> Self {
        Self::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), x, C64::new(1.0, 0.0))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn inv(&self) -> Mat2 {
        let d = self.det();
        let m = &self.0;
        Mat2::new(m[1][1] / d, -m[0][1] / d, -m[1][0] / d, m[0][0] / d)
    }

    pub fn conj_transpose(&self) -> Mat2 {
        let m = &self.0;
        Mat2::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn scale(&self, s: C64) -> Mat2 {
        let m = &self.0;
        Mat2::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    /// σ₁ M σ₁.
    pub fn swap_sigma1(&self) -> Mat2 {
        let m = &self.0;
        Mat2::new(m[1][1], m[1][0], m[0][1], m[0][0])
    }

    /// Max-abs entry norm.
    pub fn norm_max(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(C64::new(-1.0, 0.0))
    }
}

/// Ratio of extreme singular values.
pub fn condition_number(a: &DMatrix<C64>) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Smallest singular value.
pub fn smallest_singular_value(a: &DMatrix<C64>) -> f64 {
    a.clone().singular_values().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// LU solve with partial pivoting; `rhs` may hold several columns.
pub fn lu_solve(a: DMatrix<C64>, rhs: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let x = a.lu().solve(rhs).ok_or(Error::Singular { cond: f64::INFINITY })?;
    if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(x)
    } else {
        Err(Error::Singular { cond: f64::INFINITY })
    }
}

/// Solve a square system, reporting the condition number alongside.
pub fn solve_with_condition(a: DMatrix<C64>, rhs: DVector<C64>) -> Result<(DVector<C64>, f64)> {
    let cond = condition_number(&a);
    if !cond.is_finite() || cond > 1e15 {
        return Err(Error::Singular { cond });
    }
    let x = lu_solve(a, &DMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice()))?;
    Ok((DVector::from_column_slice(x.as_slice()), cond))
}

/// Determinant by LU factorisation.
pub fn determinant(a: &DMatrix<C64>) -> C64 {
    a.clone().lu().determinant()
}
