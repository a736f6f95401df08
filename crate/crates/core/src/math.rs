//! Scalar helpers and small dense linear algebra shared by the solvers.
//!
//! Everything here works on row-major slices so the hot loops in the tracker
//! can reuse caller-owned workspaces.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

pub use num_complex::Complex64 as C64;

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}
#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}
#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}
#[inline]
pub fn acos(x: f64) -> f64 {
    libm::acos(x)
}

/// Field operations needed by the evaluators and the LU solver.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(v: f64) -> Self;
    /// Real scalars keep only the real part.
    fn from_c64(c: C64) -> Self;
    fn to_c64(self) -> C64;
    /// Cheap magnitude used for pivoting and norms (`|re| + |im|` for complex).
    fn mag(self) -> f64;
    /// Euclidean modulus.
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn one() -> Self {
        1.0
    }
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn from_c64(c: C64) -> Self {
        c.re
    }
    #[inline]
    fn to_c64(self) -> C64 {
        C64::new(self, 0.0)
    }
    #[inline]
    fn mag(self) -> f64 {
        abs(self)
    }
    #[inline]
    fn modulus(self) -> f64 {
        abs(self)
    }
}

impl Scalar for C64 {
    #[inline]
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    #[inline]
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    #[inline]
    fn from_f64(v: f64) -> Self {
        C64::new(v, 0.0)
    }
    #[inline]
    fn from_c64(c: C64) -> Self {
        c
    }
    #[inline]
    fn to_c64(self) -> C64 {
        self
    }
    #[inline]
    fn mag(self) -> f64 {
        abs(self.re) + abs(self.im)
    }
    #[inline]
    fn modulus(self) -> f64 {
        hypot(self.re, self.im)
    }
}

/// Max-modulus norm.
pub fn norm_inf<T: Scalar>(v: &[T]) -> f64 {
    v.iter().fold(0.0, |m, x| f64::max(m, x.modulus()))
}

pub fn norm2(v: &[f64]) -> f64 {
    sqrt(v.iter().map(|x| x * x).sum())
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    sqrt(dist2(a, b))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// In-place LU factorisation with partial pivoting of the row-major `n × n`
/// matrix `a`. Returns `false` when a zero pivot is hit.
pub fn lu_factor<T: Scalar>(a: &mut [T], n: usize, piv: &mut [usize]) -> bool {
    debug_assert!(a.len() >= n * n && piv.len() >= n);
    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].mag();
        for i in k + 1..n {
            let m = a[i * n + k].mag();
            if m > best {
                best = m;
                p = i;
            }
        }
        piv[k] = p;
        if best == 0.0 || !best.is_finite() {
            return false;
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
        }
        let inv = T::one() / a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] * inv;
            a[i * n + k] = f;
            if f != T::zero() {
                for j in k + 1..n {
                    let u = a[k * n + j];
                    a[i * n + j] -= f * u;
                }
            }
        }
    }
    true
}

/// Solves `A x = b` in place given the output of [`lu_factor`].
pub fn lu_solve<T: Scalar>(lu: &[T], n: usize, piv: &[usize], b: &mut [T]) {
    for k in 0..n {
        let p = piv[k];
        if p != k {
            b.swap(k, p);
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for j in 0..i {
            s -= lu[i * n + j] * b[j];
        }
        b[i] = s;
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= lu[i * n + j] * b[j];
        }
        b[i] = s / lu[i * n + i];
    }
}

/// Convenience wrapper: solves a square system, returning `None` if singular.
pub fn solve<T: Scalar>(mut a: Vec<T>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    let mut piv = vec![0; n];
    if !lu_factor(&mut a, n, &mut piv) {
        return None;
    }
    lu_solve(&a, n, &piv, &mut b);
    if b.iter().all(|x| x.modulus().is_finite()) {
        Some(b)
    } else {
        None
    }
}

/// Infinity-norm condition number of a square matrix (via explicit inverse).
pub fn condition_inf<T: Scalar>(a: &[T], n: usize) -> f64 {
    let norm_a = (0..n)
        .map(|i| (0..n).map(|j| a[i * n + j].modulus()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut lu = a[..n * n].to_vec();
    let mut piv = vec![0; n];
    if !lu_factor(&mut lu, n, &mut piv) {
        return f64::INFINITY;
    }
    let mut row_sums = vec![0.0; n];
    let mut col = vec![T::zero(); n];
    for j in 0..n {
        for (i, c) in col.iter_mut().enumerate() {
            *c = if i == j { T::one() } else { T::zero() };
        }
        lu_solve(&lu, n, &piv, &mut col);
        for i in 0..n {
            row_sums[i] += col[i].modulus();
        }
    }
    let norm_inv = row_sums.iter().cloned().fold(0.0, f64::max);
    norm_a * norm_inv
}

/// Minimum-norm solution of the underdetermined system `J Δ = r` with `J`
/// of shape `m × n` (`m < n`), `Δ = Jᵀ (J Jᵀ)⁻¹ r`.
pub fn min_norm_solve(j: &[f64], m: usize, n: usize, r: &[f64]) -> Option<Vec<f64>> {
    let mut jjt = vec![0.0; m * m];
    for a in 0..m {
        for b in 0..m {
            jjt[a * m + b] = (0..n).map(|k| j[a * n + k] * j[b * n + k]).sum();
        }
    }
    let y = solve(jjt, r.to_vec())?;
    let mut out = vec![0.0; n];
    for (a, ya) in y.iter().enumerate() {
        for k in 0..n {
            out[k] += j[a * n + k] * ya;
        }
    }
    Some(out)
}

/// Singular value decomposition of a real 2×2 matrix `[[a, b], [c, d]]`.
///
/// Returns `(σ_max, σ_min, θ)` where `θ` is the angle of the left singular
/// vector belonging to `σ_max`.
pub fn svd2(a: f64, b: f64, c: f64, d: f64) -> (f64, f64, f64) {
    // M Mᵀ = [[p, r], [r, q]]
    let p = a * a + b * b;
    let q = c * c + d * d;
    let r = a * c + b * d;
    let mean = 0.5 * (p + q);
    let diff = 0.5 * (p - q);
    let rad = hypot(diff, r);
    let l1 = mean + rad;
    let l2 = f64::max(mean - rad, 0.0);
    let theta = 0.5 * atan2(2.0 * r, p - q);
    (sqrt(l1), sqrt(l2), theta)
}

/// Wraps an angle to `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * core::f64::consts::PI;
    let mut x = a - two_pi * floor((a + core::f64::consts::PI) / two_pi);
    if x <= -core::f64::consts::PI {
        x += two_pi;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_complex_system() {
        let a = vec![
            C64::new(2.0, 1.0),
            C64::new(0.5, 0.0),
            C64::new(-1.0, 0.3),
            C64::new(0.0, 2.0),
        ];
        let x = vec![C64::new(1.0, -1.0), C64::new(0.25, 3.0)];
        let b = vec![a[0] * x[0] + a[1] * x[1], a[2] * x[0] + a[3] * x[1]];
        let got = solve(a, b).unwrap();
        assert!((got[0] - x[0]).norm() < 1e-14);
        assert!((got[1] - x[1]).norm() < 1e-14);
    }

    #[test]
    fn singular_matrix_is_reported() {
        assert!(solve(vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 1.0]).is_none());
    }

    #[test]
    fn svd2_matches_diagonal() {
        let (s1, s2, th) = svd2(0.0, 0.0, 0.0, 3.0);
        assert!((s1 - 3.0).abs() < 1e-15 && s2.abs() < 1e-15);
        assert!((th.abs() - core::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn min_norm_step_is_orthogonal_to_kernel() {
        // single row [1, 1]: minimal-norm solution of x + y = 2 is (1, 1)
        let d = min_norm_solve(&[1.0, 1.0], 1, 2, &[2.0]).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-15 && (d[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * core::f64::consts::PI) - core::f64::consts::PI).abs() < 1e-12);
        assert!((wrap_angle(-0.5) + 0.5).abs() < 1e-15);
    }
}
