//! FFT conventions, quadrature rules and spectral operators shared by the
//! disc, loop and conformal-map code.
//!
//! Coefficients follow `c_k = (1/N) Σ_j x_j e^{-2πijk/N}` so that
//! `x_j = Σ_k c_k e^{2πijk/N}`. Index `k ≥ N/2` stands for frequency `k − N`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::C64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Samples → normalized Fourier coefficients.
pub fn forward(samples: &[C64]) -> Vec<C64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    if n == 0 {
        return buf;
    }
    plan(n, false).process(&mut buf);
    let s = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= s);
    buf
}

/// Normalized Fourier coefficients → samples.
pub fn inverse(coeffs: &[C64]) -> Vec<C64> {
    let mut buf = coeffs.to_vec();
    if !buf.is_empty() {
        plan(buf.len(), true).process(&mut buf);
    }
    buf
}

/// Signed frequency of FFT bin `k` in a transform of length `n`.
#[inline]
pub fn freq(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Bin holding signed frequency `m` in a transform of length `n`.
#[inline]
pub fn bin(m: i64, n: usize) -> usize {
    m.rem_euclid(n as i64) as usize
}

/// Uniform angles `2πj/n`.
pub fn angles(n: usize) -> Vec<f64> {
    (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
}

/// Derivative in the angle of a periodic function given by samples.
pub fn derivative(samples: &[C64]) -> Vec<C64> {
    let n = samples.len();
    let mut c = forward(samples);
    for (k, ck) in c.iter_mut().enumerate() {
        let m = freq(k, n);
        if 2 * m.unsigned_abs() as usize == n {
            *ck = C64::new(0.0, 0.0);
        } else {
            *ck *= C64::new(0.0, m as f64);
        }
    }
    inverse(&c)
}

/// Harmonic conjugate of a real periodic function on the circle, normalized
/// to zero mean: `cos kφ ↦ sin kφ`.
pub fn conjugate(samples: &[f64]) -> Vec<f64> {
    let n = samples.len();
    let cs: Vec<C64> = samples.iter().map(|&x| C64::new(x, 0.0)).collect();
    let mut c = forward(&cs);
    for (k, ck) in c.iter_mut().enumerate() {
        let m = freq(k, n);
        *ck *= match m.signum() {
            1 => C64::new(0.0, -1.0),
            -1 => C64::new(0.0, 1.0),
            _ => C64::new(0.0, 0.0),
        };
        if 2 * m.unsigned_abs() as usize == n {
            *ck = C64::new(0.0, 0.0);
        }
    }
    inverse(&c).into_iter().map(|z| z.re).collect()
}

/// Trigonometric interpolant of uniformly sampled periodic data.
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    coeffs: Vec<(i64, C64)>,
}

impl TrigInterpolant {
    pub fn new(samples: &[C64]) -> Self {
        let n = samples.len();
        let c = forward(samples);
        let coeffs = c.iter().enumerate().map(|(k, &ck)| (freq(k, n), ck)).collect();
        Self { coeffs }
    }

    pub fn eval(&self, angle: f64) -> C64 {
        let n = self.coeffs.len();
        self.coeffs
            .iter()
            .map(|&(m, c)| {
                if n % 2 == 0 && 2 * m.unsigned_abs() as usize == n {
                    c * (m as f64 * angle).cos()
                } else {
                    c * C64::from_polar(1.0, m as f64 * angle)
                }
            })
            .sum()
    }
}

/// Gauss–Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            } else {
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
            }
            // p1 = P_n(z), p0 = P_{n-1}(z)
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = mid - half * z;
        x[n - 1 - i] = mid + half * z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp) * half;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Smallest power of two `≥ n`.
pub fn pow2_at_least(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_frequency_layout() {
        let n = 16;
        let xs: Vec<C64> = angles(n)
            .iter()
            .map(|&a| C64::from_polar(1.0, 3.0 * a) + 2.0 * C64::from_polar(1.0, -2.0 * a))
            .collect();
        let c = forward(&xs);
        assert!((c[bin(3, n)] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((c[bin(-2, n)] - C64::new(2.0, 0.0)).norm() < 1e-14);
        let back = inverse(&c);
        for (a, b) in back.iter().zip(&xs) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn derivative_of_trig_polynomial() {
        let n = 32;
        let xs: Vec<C64> = angles(n).iter().map(|&a| C64::new(a.sin(), (2.0 * a).cos())).collect();
        let d = derivative(&xs);
        for (a, v) in angles(n).iter().zip(&d) {
            let exact = C64::new(a.cos(), -2.0 * (2.0 * a).sin());
            assert!((v - exact).norm() < 1e-12);
        }
    }

    #[test]
    fn conjugate_maps_cos_to_sin() {
        let n = 64;
        let xs: Vec<f64> = angles(n).iter().map(|&a| (3.0 * a).cos() + 0.5).collect();
        let y = conjugate(&xs);
        for (a, v) in angles(n).iter().zip(&y) {
            assert!((v - (3.0 * a).sin()).abs() < 1e-13);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7, 0.0, 2.0);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(13)).sum();
        assert!((s - 2f64.powi(14) / 14.0).abs() < 1e-9);
        let (x, w) = gauss_legendre(1, -1.0, 1.0);
        assert!(x[0].abs() < 1e-15 && (w[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn interpolant_reproduces_band_limited_data() {
        let n = 16;
        let f = |a: f64| C64::new((2.0 * a).cos(), a.sin());
        let xs: Vec<C64> = angles(n).iter().map(|&a| f(a)).collect();
        let ti = TrigInterpolant::new(&xs);
        for a in [0.1, 1.3, 4.0] {
            assert!((ti.eval(a) - f(a)).norm() < 1e-13);
        }
    }
}
