//! Small dense linear algebra over `C^3` and low-dimensional real spaces.
//!
//! Everything here is sized for the geometry of `CP^2 x CP^2`; nothing tries
//! to be a general matrix library.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::math::sqrt;
pub use num_complex::Complex64 as C64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Unit complex number `e^{i a}`.
#[inline]
pub fn cis(a: f64) -> C64 {
    C64::new(crate::math::cos(a), crate::math::sin(a))
}

/// A vector in `C^3`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CVec3(pub [C64; 3]);

impl CVec3 {
    pub const ZERO: CVec3 = CVec3([ZERO; 3]);

    pub fn new(a: C64, b: C64, c: C64) -> Self {
        CVec3([a, b, c])
    }

    pub fn real(a: f64, b: f64, c: f64) -> Self {
        CVec3([C64::new(a, 0.0), C64::new(b, 0.0), C64::new(c, 0.0)])
    }

    pub fn basis(i: usize) -> Self {
        let mut v = Self::ZERO;
        v.0[i] = ONE;
        v
    }

    /// Hermitian product `sum conj(a_k) b_k`.
    #[inline]
    pub fn hdot(&self, other: &CVec3) -> C64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1] + self.0[2].conj() * other.0[2]
    }

    /// Bilinear pairing `sum a_k b_k`.
    #[inline]
    pub fn dot(&self, other: &CVec3) -> C64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        sqrt(self.norm_sqr())
    }

    pub fn conj(&self) -> CVec3 {
        CVec3([self.0[0].conj(), self.0[1].conj(), self.0[2].conj()])
    }

    /// Componentwise product.
    pub fn hadamard(&self, other: &CVec3) -> CVec3 {
        CVec3([self.0[0] * other.0[0], self.0[1] * other.0[1], self.0[2] * other.0[2]])
    }

    pub fn scale(&self, s: C64) -> CVec3 {
        CVec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    pub fn scale_re(&self, s: f64) -> CVec3 {
        CVec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    /// Bilinear cross product; `a.cross(b).dot(a) == 0`.
    pub fn cross(&self, o: &CVec3) -> CVec3 {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = o.0;
        CVec3([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])
    }

    pub fn normalized(&self) -> CVec3 {
        self.scale_re(1.0 / self.norm())
    }

    /// Component orthogonal to the unit vector `unit` (Hermitian projection).
    pub fn horizontal(&self, unit: &CVec3) -> CVec3 {
        *self - unit.scale(unit.hdot(self))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<usize> for CVec3 {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVec3 {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

impl Add for CVec3 {
    type Output = CVec3;
    fn add(self, o: CVec3) -> CVec3 {
        CVec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for CVec3 {
    type Output = CVec3;
    fn sub(self, o: CVec3) -> CVec3 {
        CVec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl AddAssign for CVec3 {
    fn add_assign(&mut self, o: CVec3) {
        *self = *self + o;
    }
}

impl SubAssign for CVec3 {
    fn sub_assign(&mut self, o: CVec3) {
        *self = *self - o;
    }
}

impl Neg for CVec3 {
    type Output = CVec3;
    fn neg(self) -> CVec3 {
        CVec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<f64> for CVec3 {
    type Output = CVec3;
    fn mul(self, s: f64) -> CVec3 {
        self.scale_re(s)
    }
}

impl Mul<C64> for CVec3 {
    type Output = CVec3;
    fn mul(self, s: C64) -> CVec3 {
        self.scale(s)
    }
}

/// A vector of `C^3 x C^3`: a point of the product or a tangent vector to it.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Pair {
    pub x: CVec3,
    pub y: CVec3,
}

impl Pair {
    pub const ZERO: Pair = Pair { x: CVec3::ZERO, y: CVec3::ZERO };

    pub fn new(x: CVec3, y: CVec3) -> Self {
        Pair { x, y }
    }

    /// Hermitian product summed over both factors.
    pub fn hdot(&self, o: &Pair) -> C64 {
        self.x.hdot(&o.x) + self.y.hdot(&o.y)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x.norm_sqr() + self.y.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        sqrt(self.norm_sqr())
    }

    pub fn scale(&self, s: C64) -> Pair {
        Pair { x: self.x.scale(s), y: self.y.scale(s) }
    }

    pub fn scale_re(&self, s: f64) -> Pair {
        Pair { x: self.x.scale_re(s), y: self.y.scale_re(s) }
    }

    /// Multiplication by `i`, the complex structure.
    pub fn times_i(&self) -> Pair {
        self.scale(I)
    }

    /// Real coordinates `(Re x0, Im x0, ..., Re y2, Im y2)`.
    pub fn to_real(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        for k in 0..3 {
            out[2 * k] = self.x.0[k].re;
            out[2 * k + 1] = self.x.0[k].im;
            out[6 + 2 * k] = self.y.0[k].re;
            out[6 + 2 * k + 1] = self.y.0[k].im;
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Pair {
    type Output = Pair;
    fn add(self, o: Pair) -> Pair {
        Pair { x: self.x + o.x, y: self.y + o.y }
    }
}

impl Sub for Pair {
    type Output = Pair;
    fn sub(self, o: Pair) -> Pair {
        Pair { x: self.x - o.x, y: self.y - o.y }
    }
}

impl AddAssign for Pair {
    fn add_assign(&mut self, o: Pair) {
        *self = *self + o;
    }
}

impl Neg for Pair {
    type Output = Pair;
    fn neg(self) -> Pair {
        Pair { x: -self.x, y: -self.y }
    }
}

impl Mul<f64> for Pair {
    type Output = Pair;
    fn mul(self, s: f64) -> Pair {
        self.scale_re(s)
    }
}

impl Mul<C64> for Pair {
    type Output = Pair;
    fn mul(self, s: C64) -> Pair {
        self.scale(s)
    }
}

/// A complex 3x3 matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat3(pub [[C64; 3]; 3]);

impl CMat3 {
    pub const ZERO: CMat3 = CMat3([[ZERO; 3]; 3]);

    pub fn identity() -> Self {
        Self::diag_re([1.0, 1.0, 1.0])
    }

    pub fn diag_re(d: [f64; 3]) -> Self {
        let mut m = Self::ZERO;
        for (k, v) in d.iter().enumerate() {
            m.0[k][k] = C64::new(*v, 0.0);
        }
        m
    }

    pub fn diag(d: [C64; 3]) -> Self {
        let mut m = Self::ZERO;
        for k in 0..3 {
            m.0[k][k] = d[k];
        }
        m
    }

    /// `u v^dagger`.
    pub fn outer(u: &CVec3, v: &CVec3) -> Self {
        let mut m = Self::ZERO;
        for r in 0..3 {
            for s in 0..3 {
                m.0[r][s] = u.0[r] * v.0[s].conj();
            }
        }
        m
    }

    pub fn apply(&self, v: &CVec3) -> CVec3 {
        let mut out = CVec3::ZERO;
        for r in 0..3 {
            out.0[r] = self.0[r][0] * v.0[0] + self.0[r][1] * v.0[1] + self.0[r][2] * v.0[2];
        }
        out
    }

    pub fn mul(&self, o: &CMat3) -> CMat3 {
        let mut m = Self::ZERO;
        for r in 0..3 {
            for s in 0..3 {
                m.0[r][s] = (0..3).map(|k| self.0[r][k] * o.0[k][s]).sum();
            }
        }
        m
    }

    pub fn adjoint(&self) -> CMat3 {
        let mut m = Self::ZERO;
        for r in 0..3 {
            for s in 0..3 {
                m.0[r][s] = self.0[s][r].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> CMat3 {
        let mut m = Self::ZERO;
        for r in 0..3 {
            for s in 0..3 {
                m.0[r][s] = self.0[s][r];
            }
        }
        m
    }

    pub fn add(&self, o: &CMat3) -> CMat3 {
        let mut m = *self;
        for r in 0..3 {
            for s in 0..3 {
                m.0[r][s] += o.0[r][s];
            }
        }
        m
    }

    pub fn scale(&self, s: C64) -> CMat3 {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for z in row.iter_mut() {
                *z *= s;
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flat_map(|r| r.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |M - M^dagger|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..3 {
            for s in 0..3 {
                d = d.max((self.0[r][s] - self.0[s][r].conj()).norm());
            }
        }
        d
    }

    pub fn is_diagonal(&self) -> bool {
        (0..3).all(|r| (0..3).all(|s| r == s || self.0[r][s] == ZERO))
    }

    pub fn diagonal_re(&self) -> [f64; 3] {
        [self.0[0][0].re, self.0[1][1].re, self.0[2][2].re]
    }

    pub fn det(&self) -> C64 {
        det3(&self.0)
    }

    /// Matrix exponential by scaling and squaring of a Taylor series.
    pub fn expm(&self) -> CMat3 {
        let norm = self.max_abs() * 3.0;
        let mut squarings = 0;
        let mut scale = 1.0;
        while norm * scale > 0.5 {
            scale *= 0.5;
            squarings += 1;
        }
        let a = self.scale(C64::new(scale, 0.0));
        let mut term = CMat3::identity();
        let mut sum = CMat3::identity();
        for k in 1..=18 {
            term = term.mul(&a).scale(C64::new(1.0 / k as f64, 0.0));
            sum = sum.add(&term);
        }
        for _ in 0..squarings {
            sum = sum.mul(&sum);
        }
        sum
    }
}

/// Determinant of a complex 3x3 array.
pub fn det3(m: &[[C64; 3]; 3]) -> C64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Determinant of a real 3x3 array.
pub fn det3_re(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Dense real symmetric matrix stored row major.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMat {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SymMat {
    pub fn zeros(n: usize) -> Self {
        SymMat { n, data: vec![0.0; n * n] }
    }

    #[inline]
    pub fn get(&self, r: usize, s: usize) -> f64 {
        self.data[r * self.n + s]
    }

    #[inline]
    pub fn set(&mut self, r: usize, s: usize, v: f64) {
        self.data[r * self.n + s] = v;
    }

    /// Eigenvalues in ascending order (cyclic Jacobi).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = self.data.clone();
        for _sweep in 0..100 {
            let mut off = 0.0;
            for r in 0..n {
                for s in 0..n {
                    if r != s {
                        off += a[r * n + s] * a[r * n + s];
                    }
                }
            }
            let scale: f64 = a.iter().map(|v| v * v).sum::<f64>();
            if off <= 1e-30 * scale.max(1e-300) {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + sqrt(theta * theta + 1.0));
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let cs = 1.0 / sqrt(t * t + 1.0);
                    let sn = t * cs;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = cs * akp - sn * akq;
                        a[k * n + q] = sn * akp + cs * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = cs * apk - sn * aqk;
                        a[q * n + k] = sn * apk + cs * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|k| a[k * n + k]).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        ev
    }
}

/// Singular values (ascending) of the real matrix whose columns are given,
/// each column a flat real vector.
pub fn singular_values(columns: &[Vec<f64>]) -> Vec<f64> {
    let k = columns.len();
    let mut g = SymMat::zeros(k);
    for r in 0..k {
        for s in r..k {
            let v: f64 = columns[r].iter().zip(&columns[s]).map(|(a, b)| a * b).sum();
            g.set(r, s, v);
            g.set(s, r, v);
        }
    }
    g.eigenvalues().into_iter().map(|e| sqrt(e.max(0.0))).collect()
}

/// Solves the dense real system `a x = b` by partial-pivot elimination.
/// Returns `None` for a numerically singular matrix.
pub fn solve_real(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flat_map(|r| r.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..n {
        let piv = (col..n).max_by(|&r, &s| a[r][col].abs().partial_cmp(&a[s][col].abs()).unwrap())?;
        if a[piv][col].abs() <= 1e-300 + 1e-15 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in (col + 1)..n {
            let f = a[r][col] / a[col][col];
            for s in col..n {
                a[r][s] -= f * a[col][s];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for s in (r + 1)..n {
            acc -= a[r][s] * x[s];
        }
        x[r] = acc / a[r][r];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_matches_known_spectrum() {
        let mut m = SymMat::zeros(3);
        let vals = [[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]];
        for r in 0..3 {
            for s in 0..3 {
                m.set(r, s, vals[r][s]);
            }
        }
        let ev = m.eigenvalues();
        let s2 = sqrt(2.0);
        assert!((ev[0] - (2.0 - s2)).abs() < 1e-12);
        assert!((ev[1] - 2.0).abs() < 1e-12);
        assert!((ev[2] - (2.0 + s2)).abs() < 1e-12);
    }

    #[test]
    fn expm_of_diagonal_generator() {
        let m = CMat3::diag([c(0.0, -0.3), c(0.0, 1.1), c(0.2, 0.0)]);
        let e = m.expm();
        assert!((e.0[0][0] - cis(-0.3)).norm() < 1e-14);
        assert!((e.0[1][1] - cis(1.1)).norm() < 1e-14);
        assert!((e.0[2][2] - C64::new(crate::math::exp(0.2), 0.0)).norm() < 1e-14);
        assert!(e.0[0][1].norm() < 1e-15);
    }

    #[test]
    fn cross_is_bilinear_orthogonal() {
        let a = CVec3::new(c(1.0, 2.0), c(-0.5, 0.1), c(0.3, -1.0));
        let b = CVec3::new(c(0.2, 0.0), c(1.0, 1.0), c(-2.0, 0.5));
        let x = a.cross(&b);
        assert!(x.dot(&a).norm() < 1e-14);
        assert!(x.dot(&b).norm() < 1e-14);
    }

    #[test]
    fn solve_small_system() {
        let a = alloc::vec![alloc::vec![2.0, 1.0], alloc::vec![1.0, 3.0]];
        let x = solve_real(a, alloc::vec![3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
    }
}
