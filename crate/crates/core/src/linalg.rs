//! Fixed-size 2-D algebra: vectors, general 2×2 matrices and symmetric 2×2
//! matrices with closed-form eigenvalues.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Eigenvalue tolerance used for every positive-semidefinite test.
pub const TOL_PSD: f64 = 1e-9;

/// A point or displacement in the plane (meters).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Bit pattern of both components; used to group exactly-equal positions.
    pub fn bits(self) -> (u64, u64) {
        (self.x.to_bits(), self.y.to_bits())
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self * rhs.x, self * rhs.y)
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(v: [f64; 2]) -> Self {
        Vec2::new(v[0], v[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

/// General (not necessarily symmetric) 2×2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);
    pub const ZERO: Mat2 = Mat2::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub fn diag(d1: f64, d2: f64) -> Self {
        Self::new(d1, 0.0, 0.0, d2)
    }

    pub fn scaled_identity(s: f64) -> Self {
        Self::diag(s, s)
    }

    pub fn from_rows(rows: [[f64; 2]; 2]) -> Self {
        Self::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn to_rows(self) -> [[f64; 2]; 2] {
        [[self.m11, self.m12], [self.m21, self.m22]]
    }

    pub fn transpose(self) -> Mat2 {
        Mat2::new(self.m11, self.m21, self.m12, self.m22)
    }

    pub fn det(self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(self) -> f64 {
        self.m11 + self.m22
    }

    /// Inverse, or `None` when `|det| < min_det`.
    pub fn inverse(self, min_det: f64) -> Option<Mat2> {
        let det = self.det();
        if !(det.abs() >= min_det) {
            return None;
        }
        let inv = 1.0 / det;
        Some(Mat2::new(
            self.m22 * inv,
            -self.m12 * inv,
            -self.m21 * inv,
            self.m11 * inv,
        ))
    }

    pub fn mul_vec(self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.m11 * v.x + self.m12 * v.y,
            self.m21 * v.x + self.m22 * v.y,
        )
    }

    pub fn scale(self, s: f64) -> Mat2 {
        Mat2::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    /// Symmetric part `(M + Mᵀ)/2`.
    pub fn symmetrize(self) -> SymMat2 {
        SymMat2::new(self.m11, 0.5 * (self.m12 + self.m21), self.m22)
    }

    /// `M · S · Mᵀ` for symmetric `S`, symmetric by construction.
    pub fn congruence(self, s: SymMat2) -> SymMat2 {
        let ms = self * s.to_mat();
        let a11 = ms.m11 * self.m11 + ms.m12 * self.m12;
        let a12 = ms.m11 * self.m21 + ms.m12 * self.m22;
        let a22 = ms.m21 * self.m21 + ms.m22 * self.m22;
        SymMat2::new(a11, a12, a22)
    }

    pub fn is_finite(self) -> bool {
        self.m11.is_finite() && self.m12.is_finite() && self.m21.is_finite() && self.m22.is_finite()
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, r: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 + r.m11,
            self.m12 + r.m12,
            self.m21 + r.m21,
            self.m22 + r.m22,
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, r: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 - r.m11,
            self.m12 - r.m12,
            self.m21 - r.m21,
            self.m22 - r.m22,
        )
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, r: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 * r.m11 + self.m12 * r.m21,
            self.m11 * r.m12 + self.m12 * r.m22,
            self.m21 * r.m11 + self.m22 * r.m21,
            self.m21 * r.m12 + self.m22 * r.m22,
        )
    }
}

/// Symmetric 2×2 matrix storing a single off-diagonal entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymMat2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl SymMat2 {
    pub const ZERO: SymMat2 = SymMat2::new(0.0, 0.0, 0.0);
    pub const IDENTITY: SymMat2 = SymMat2::new(1.0, 0.0, 1.0);

    pub const fn new(a11: f64, a12: f64, a22: f64) -> Self {
        Self { a11, a12, a22 }
    }

    pub fn diag(d1: f64, d2: f64) -> Self {
        Self::new(d1, 0.0, d2)
    }

    pub fn scaled_identity(s: f64) -> Self {
        Self::new(s, 0.0, s)
    }

    pub fn to_mat(self) -> Mat2 {
        Mat2::new(self.a11, self.a12, self.a12, self.a22)
    }

    pub fn trace(self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    pub fn scale(self, s: f64) -> SymMat2 {
        SymMat2::new(self.a11 * s, self.a12 * s, self.a22 * s)
    }

    pub fn add_identity(self, s: f64) -> SymMat2 {
        SymMat2::new(self.a11 + s, self.a12, self.a22 + s)
    }

    /// Eigenvalues `(λ_min, λ_max)` from the trace/determinant formula.
    pub fn eigenvalues(self) -> (f64, f64) {
        let mid = 0.5 * (self.a11 + self.a22);
        let rad = (0.5 * (self.a11 - self.a22)).hypot(self.a12);
        (mid - rad, mid + rad)
    }

    pub fn min_eigenvalue(self) -> f64 {
        self.eigenvalues().0
    }

    /// Eigen-decomposition `[(λ_max, v_max), (λ_min, v_min)]` with unit
    /// eigenvectors. Diagonal input yields the coordinate axes in index order.
    pub fn eigen(self) -> [(f64, Vec2); 2] {
        if self.a12 == 0.0 {
            let e1 = (self.a11, Vec2::new(1.0, 0.0));
            let e2 = (self.a22, Vec2::new(0.0, 1.0));
            return if self.a11 >= self.a22 {
                [e1, e2]
            } else {
                [e2, e1]
            };
        }
        let (lmin, lmax) = self.eigenvalues();
        // (a12, λ - a11) spans the λ eigenspace when a12 != 0.
        let v = Vec2::new(self.a12, lmax - self.a11);
        let v = (1.0 / v.norm()) * v;
        [(lmax, v), (lmin, Vec2::new(-v.y, v.x))]
    }

    pub fn is_psd(self) -> bool {
        self.min_eigenvalue() >= -TOL_PSD
    }

    /// A factor `L` with `L·Lᵀ = self` for PSD input (eigen square root, so
    /// singular matrices are fine). Negative eigenvalues are clamped to 0.
    pub fn sqrt_factor(self) -> Mat2 {
        let [(l1, v1), (l2, v2)] = self.eigen();
        let s1 = l1.max(0.0).sqrt();
        let s2 = l2.max(0.0).sqrt();
        Mat2::new(v1.x * s1, v2.x * s2, v1.y * s1, v2.y * s2)
    }

    pub fn is_finite(self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a22.is_finite()
    }
}

impl Add for SymMat2 {
    type Output = SymMat2;
    fn add(self, r: SymMat2) -> SymMat2 {
        SymMat2::new(self.a11 + r.a11, self.a12 + r.a12, self.a22 + r.a22)
    }
}

impl Sub for SymMat2 {
    type Output = SymMat2;
    fn sub(self, r: SymMat2) -> SymMat2 {
        SymMat2::new(self.a11 - r.a11, self.a12 - r.a12, self.a22 - r.a22)
    }
}
