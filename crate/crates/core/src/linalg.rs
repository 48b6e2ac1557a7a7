//! Fixed-size 2×2 complex linear algebra for the coin space.

use core::ops::{Add, AddAssign, Mul, Sub};

use num_complex::Complex64 as C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// General complex 2×2 matrix, row-major, index 0 is the right chirality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const IDENTITY: Mat2 = Mat2([[C64::new(1.0, 0.0), ZERO], [ZERO, C64::new(1.0, 0.0)]]);

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        Mat2([
            [C64::new(m[0][0], 0.0), C64::new(m[0][1], 0.0)],
            [C64::new(m[1][0], 0.0), C64::new(m[1][1], 0.0)],
        ])
    }

    /// `|u⟩⟨v|`
    pub fn outer(u: [C64; 2], v: [C64; 2]) -> Self {
        Mat2([
            [u[0] * v[0].conj(), u[0] * v[1].conj()],
            [u[1] * v[0].conj(), u[1] * v[1].conj()],
        ])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|M − M†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        (*self - self.adjoint()).max_abs()
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        Mat2([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

/// Hermitian 2×2 matrix `[[rr, rl], [conj(rl), ll]]`.
///
/// Only four reals are stored, so hermiticity holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HermitianMatrix2 {
    pub rr: f64,
    pub ll: f64,
    pub rl: C64,
}

impl HermitianMatrix2 {
    pub const ZERO: HermitianMatrix2 = HermitianMatrix2 { rr: 0.0, ll: 0.0, rl: ZERO };

    pub const fn new(rr: f64, ll: f64, rl: C64) -> Self {
        HermitianMatrix2 { rr, ll, rl }
    }

    /// Hermitian part `(M + M†)/2` of a general matrix.
    pub fn hermitian_part(m: &Mat2) -> Self {
        let m = &m.0;
        HermitianMatrix2 {
            rr: m[0][0].re,
            ll: m[1][1].re,
            rl: (m[0][1] + m[1][0].conj()) * 0.5,
        }
    }

    pub fn to_mat2(&self) -> Mat2 {
        Mat2([
            [C64::new(self.rr, 0.0), self.rl],
            [self.rl.conj(), C64::new(self.ll, 0.0)],
        ])
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self.rr + self.ll
    }

    #[inline]
    pub fn determinant(&self) -> f64 {
        self.rr * self.ll - self.rl.norm_sqr()
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianMatrix2 { rr: self.rr * s, ll: self.ll * s, rl: self.rl * s }
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.rr == 0.0 && self.ll == 0.0 && self.rl.re == 0.0 && self.rl.im == 0.0
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &HermitianMatrix2) -> f64 {
        let d = *self - *other;
        libm::fabs(d.rr).max(libm::fabs(d.ll)).max(d.rl.norm())
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_diff(&HermitianMatrix2::ZERO)
    }

    pub fn is_finite(&self) -> bool {
        self.rr.is_finite() && self.ll.is_finite() && self.rl.is_finite()
    }
}

impl Add for HermitianMatrix2 {
    type Output = HermitianMatrix2;
    fn add(self, rhs: HermitianMatrix2) -> HermitianMatrix2 {
        HermitianMatrix2 { rr: self.rr + rhs.rr, ll: self.ll + rhs.ll, rl: self.rl + rhs.rl }
    }
}

impl AddAssign for HermitianMatrix2 {
    fn add_assign(&mut self, rhs: HermitianMatrix2) {
        *self = *self + rhs;
    }
}

impl Sub for HermitianMatrix2 {
    type Output = HermitianMatrix2;
    fn sub(self, rhs: HermitianMatrix2) -> HermitianMatrix2 {
        HermitianMatrix2 { rr: self.rr - rhs.rr, ll: self.ll - rhs.ll, rl: self.rl - rhs.rl }
    }
}

/// Eigenvalues of a 2×2 Hermitian matrix, `lambda1 >= lambda2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair2 {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl EigenPair2 {
    /// Trace norm `|λ1| + |λ2|`.
    pub fn trace_norm(&self) -> f64 {
        libm::fabs(self.lambda1) + libm::fabs(self.lambda2)
    }
}

/// Closed-form eigenvalues `h ± sqrt(d² + |c|²)` with `h` the half trace,
/// `d` the half difference of the diagonal and `c` the off-diagonal entry.
pub fn herm2_eigenvalues(m: &HermitianMatrix2) -> EigenPair2 {
    let h = 0.5 * (m.rr + m.ll);
    let d = 0.5 * (m.rr - m.ll);
    let r = libm::hypot(d, libm::hypot(m.rl.re, m.rl.im));
    EigenPair2 { lambda1: h + r, lambda2: h - r }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn eigenvalues_of_initial_localized_block() {
        let m = HermitianMatrix2::new(1.0, 1.0, C64::new(0.0, -1.0)).scale(1.0 / (2.0 * PI));
        let e = herm2_eigenvalues(&m);
        assert!((e.lambda1 - 1.0 / PI).abs() < 1e-15);
        assert!(e.lambda2.abs() < 1e-15);
    }

    #[test]
    fn eigenvalues_of_off_diagonal_block() {
        let m = HermitianMatrix2::new(0.0, 0.0, C64::new(0.0, -1.0)).scale(1.0 / (2.0 * PI));
        let e = herm2_eigenvalues(&m);
        assert!((e.lambda1 - 0.5 / PI).abs() < 1e-15);
        assert!((e.lambda2 + 0.5 / PI).abs() < 1e-15);
    }

    #[test]
    fn eigenvalues_of_identity() {
        let e = herm2_eigenvalues(&HermitianMatrix2::new(1.0, 1.0, C64::new(0.0, 0.0)));
        assert_eq!((e.lambda1, e.lambda2), (1.0, 1.0));
    }

    #[test]
    fn hermitian_part_round_trip() {
        let h = HermitianMatrix2::new(0.3, -0.7, C64::new(0.1, 0.25));
        assert_eq!(HermitianMatrix2::hermitian_part(&h.to_mat2()), h);
        assert_eq!(h.to_mat2().hermiticity_defect(), 0.0);
    }

    #[test]
    fn mat2_product_matches_hand_expansion() {
        let a = Mat2([[C64::new(1.0, 2.0), C64::new(0.0, 1.0)], [C64::new(3.0, 0.0), C64::new(-1.0, 0.0)]]);
        let b = Mat2::IDENTITY.scale(C64::new(0.0, 1.0));
        let p = a * b;
        assert_eq!(p.0[0][0], C64::new(-2.0, 1.0));
        assert_eq!(p.0[1][0], C64::new(0.0, 3.0));
        assert_eq!((a * Mat2::IDENTITY), a);
    }
}
