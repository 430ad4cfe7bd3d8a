//! Small helpers for vectors of `C³`.

use crate::{C64, V3};

pub const ZERO: V3 = [C64::new(0.0, 0.0); 3];

#[inline]
pub fn real(x: [f64; 3]) -> V3 {
    [C64::new(x[0], 0.0), C64::new(x[1], 0.0), C64::new(x[2], 0.0)]
}

#[inline]
pub fn add(a: &V3, b: &V3) -> V3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: &V3, b: &V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(c: C64, a: &V3) -> V3 {
    [c * a[0], c * a[1], c * a[2]]
}

#[inline]
pub fn scale_re(c: f64, a: &V3) -> V3 {
    [a[0] * c, a[1] * c, a[2] * c]
}

/// Complex bilinear product `Σ aⱼbⱼ` (no conjugation).
#[inline]
pub fn dot(a: &V3, b: &V3) -> C64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Hermitian product `Σ conj(aⱼ) bⱼ`.
#[inline]
pub fn hdot(a: &V3, b: &V3) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]
}

#[inline]
pub fn cross(a: &V3, b: &V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn conj(a: &V3) -> V3 {
    [a[0].conj(), a[1].conj(), a[2].conj()]
}

#[inline]
pub fn norm_sqr(a: &V3) -> f64 {
    a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr()
}

#[inline]
pub fn norm(a: &V3) -> f64 {
    norm_sqr(a).sqrt()
}

#[inline]
pub fn re(a: &V3) -> [f64; 3] {
    [a[0].re, a[1].re, a[2].re]
}

#[inline]
pub fn im(a: &V3) -> [f64; 3] {
    [a[0].im, a[1].im, a[2].im]
}

#[inline]
pub fn dist(a: &V3, b: &V3) -> f64 {
    norm(&sub(a, b))
}

#[inline]
pub fn is_finite(a: &V3) -> bool {
    a.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

#[inline]
pub fn rdot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn rcross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn rnorm(a: &[f64; 3]) -> f64 {
    rdot(a, a).sqrt()
}
