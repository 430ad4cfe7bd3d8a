//! Loops `S¹ → C³` as truncated Fourier series `Σ_{|n|≤N} ĉₙ e^{ins}`, the
//! Sobolev class `W^{k,2}`, curves of loops and their polynomial smoothing.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cvec;
use crate::quadric;
use crate::spectral;
use crate::{Error, Result, Tolerances, C64, V3};

pub const LOOP_SCHEME_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Loop {
    /// `coeffs[n + N]` holds `ĉₙ`.
    coeffs: Vec<V3>,
    sobolev_k: u32,
}

impl Loop {
    pub fn new(coeffs: Vec<V3>, sobolev_k: u32) -> Result<Self> {
        if coeffs.len() % 2 == 0 {
            return Err(Error::Precondition("loop needs 2N+1 Fourier coefficients".into()));
        }
        if sobolev_k == 0 {
            return Err(Error::Precondition("Sobolev index must be ≥ 1".into()));
        }
        Ok(Self { coeffs, sobolev_k })
    }

    pub fn constant(z: V3, modes: usize, sobolev_k: u32) -> Self {
        let mut coeffs = vec![cvec::ZERO; 2 * modes + 1];
        coeffs[modes] = z;
        Self { coeffs, sobolev_k: sobolev_k.max(1) }
    }

    /// Least-squares trigonometric fit of uniform samples, truncated at `modes`;
    /// returns the ℓ² norm of the discarded modes.
    pub fn from_samples(samples: &[V3], modes: usize, sobolev_k: u32) -> Result<(Self, f64)> {
        let g = samples.len();
        if g < 2 * modes + 1 {
            return Err(Error::Precondition(format!("{g} samples cannot carry {modes} modes")));
        }
        let mut coeffs = vec![cvec::ZERO; 2 * modes + 1];
        let mut dropped = 0.0;
        for d in 0..3 {
            let s: Vec<C64> = samples.iter().map(|v| v[d]).collect();
            let c = spectral::forward(&s);
            for (k, ck) in c.iter().enumerate() {
                let m = spectral::freq(k, g);
                if m.unsigned_abs() as usize <= modes {
                    coeffs[(m + modes as i64) as usize][d] = *ck;
                } else {
                    dropped += ck.norm_sqr();
                }
            }
        }
        Ok((Self::new(coeffs, sobolev_k)?, dropped.sqrt()))
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn sobolev_k(&self) -> u32 {
        self.sobolev_k
    }

    pub fn coeffs(&self) -> &[V3] {
        &self.coeffs
    }

    pub fn coeff(&self, n: i64) -> V3 {
        let m = self.modes() as i64;
        if n.abs() > m {
            cvec::ZERO
        } else {
            self.coeffs[(n + m) as usize]
        }
    }

    /// Default evaluation grid: power of two `≥ 4N` (at least 8).
    pub fn default_grid(&self) -> usize {
        spectral::pow2_at_least((4 * self.modes()).max(8))
    }

    pub fn eval(&self, s: f64) -> V3 {
        let m = self.modes() as i64;
        let mut acc = cvec::ZERO;
        for (j, c) in self.coeffs.iter().enumerate() {
            acc = cvec::add(&acc, &cvec::scale(C64::from_polar(1.0, (j as i64 - m) as f64 * s), c));
        }
        acc
    }

    /// Values at `s_j = 2πj/g`.
    pub fn samples(&self, g: usize) -> Vec<V3> {
        assert!(g >= self.coeffs.len(), "grid {g} too small for {} modes", self.modes());
        let m = self.modes() as i64;
        let mut out = vec![cvec::ZERO; g];
        for d in 0..3 {
            let mut c = vec![C64::new(0.0, 0.0); g];
            for (j, a) in self.coeffs.iter().enumerate() {
                c[spectral::bin(j as i64 - m, g)] = a[d];
            }
            for (o, v) in out.iter_mut().zip(spectral::inverse(&c)) {
                o[d] = v;
            }
        }
        out
    }

    /// `(Σ (1+n²)^k |ĉₙ|²)^{1/2}`.
    pub fn sobolev_norm(&self) -> f64 {
        let m = self.modes() as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let n = (j as i64 - m) as f64;
                (1.0 + n * n).powi(self.sobolev_k as i32) * cvec::norm_sqr(c)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Drops all modes `|n| > modes`.
    pub fn truncate(&self, modes: usize) -> Loop {
        let m = self.modes();
        let keep = modes.min(m);
        let coeffs = self.coeffs[m - keep..=m + keep].to_vec();
        Loop { coeffs, sobolev_k: self.sobolev_k }
    }

    /// Pads with zero modes up to `modes`.
    pub fn pad(&self, modes: usize) -> Loop {
        let m = self.modes();
        if modes <= m {
            return self.clone();
        }
        let mut coeffs = vec![cvec::ZERO; 2 * modes + 1];
        coeffs[modes - m..=modes + m].copy_from_slice(&self.coeffs);
        Loop { coeffs, sobolev_k: self.sobolev_k }
    }

    pub fn lerp(&self, other: &Loop, w: f64) -> Loop {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| cvec::add(&cvec::scale_re(1.0 - w, a), &cvec::scale_re(w, b)))
            .collect();
        Loop { coeffs, sobolev_k: self.sobolev_k }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&LoopFile {
            scheme_version: LOOP_SCHEME_VERSION,
            sobolev_k: self.sobolev_k,
            modes: self.modes(),
            coefficients: self.coeffs.clone(),
        })
        .expect("loop serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: LoopFile = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        f.into_loop()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoopFile {
    scheme_version: u32,
    sobolev_k: u32,
    modes: usize,
    coefficients: Vec<V3>,
}

impl LoopFile {
    fn into_loop(self) -> Result<Loop> {
        if self.scheme_version != LOOP_SCHEME_VERSION {
            return Err(Error::Config(format!("unsupported loop scheme {}", self.scheme_version)));
        }
        if self.coefficients.len() != 2 * self.modes + 1 {
            return Err(Error::Config("loop modes do not match coefficient count".into()));
        }
        Loop::new(self.coefficients, self.sobolev_k)
    }
}

/// Sup-distance of two loops on a common grid.
pub fn loop_distance(x: &Loop, y: &Loop) -> f64 {
    let g = x.default_grid().max(y.default_grid());
    x.samples(g)
        .iter()
        .zip(y.samples(g))
        .map(|(a, b)| cvec::dist(a, &b))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopAnalysis {
    /// `max |Σzⱼ² − 1|` over the grid.
    pub quadric_defect: f64,
    /// `min ‖Im z‖` over the grid.
    pub kappa_min: f64,
    pub sobolev_norm: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub grid: usize,
}

pub fn loop_analyze(x: &Loop) -> LoopAnalysis {
    let grid = x.default_grid();
    let mut a = LoopAnalysis {
        quadric_defect: 0.0,
        kappa_min: f64::INFINITY,
        sobolev_norm: x.sobolev_norm(),
        u_min: f64::INFINITY,
        u_max: 0.0,
        grid,
    };
    for z in x.samples(grid) {
        a.quadric_defect = a.quadric_defect.max(quadric::quadric_defect(&z));
        a.kappa_min = a.kappa_min.min(quadric::kappa(&z));
        let u = quadric::exhaustion(&z);
        a.u_min = a.u_min.min(u);
        a.u_max = a.u_max.max(u);
    }
    a
}

/// `ρ∘x` re-expanded with the same number of modes; returns the truncation
/// defect alongside.
pub fn loop_retract(x: &Loop, tol: &Tolerances) -> Result<(Loop, f64)> {
    let g = x.default_grid();
    let values = x
        .samples(g)
        .iter()
        .map(|w| quadric::retract(w, tol.cut))
        .collect::<Result<Vec<_>>>()?;
    let (out, defect) = Loop::from_samples(&values, x.modes(), x.sobolev_k())?;
    if defect > tol.spectral {
        return Err(Error::SpectralOverflow { residual: defect, limit: tol.spectral });
    }
    Ok((out, defect))
}

/// `sup_s u(ρ(x(s)))` on the evaluation grid.
pub fn loop_exhaustion(x: &Loop, tol: &Tolerances) -> Result<f64> {
    let mut best: f64 = 0.0;
    for w in x.samples(x.default_grid()) {
        best = best.max(quadric::exhaustion(&quadric::retract(&w, tol.cut)?));
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    /// Linear in Fourier coefficients between consecutive samples.
    #[default]
    PiecewiseLinear,
}

/// A sampled curve `t ↦ x_t`, `t ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopCurve {
    times: Vec<f64>,
    loops: Vec<Loop>,
    interpolation: Interpolation,
}

impl LoopCurve {
    pub fn new(times: Vec<f64>, loops: Vec<Loop>) -> Result<Self> {
        if times.len() < 2 || times.len() != loops.len() {
            return Err(Error::Precondition("curve needs ≥ 2 matching times and loops".into()));
        }
        if times[0] != 0.0 || *times.last().unwrap() != 1.0 {
            return Err(Error::Precondition("curve times must run from 0 to 1".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Precondition("curve times must be strictly increasing".into()));
        }
        let (modes, k) = (loops[0].modes(), loops[0].sobolev_k());
        if loops.iter().any(|l| l.modes() != modes || l.sobolev_k() != k) {
            return Err(Error::Precondition("all loops of a curve need the same modes and Sobolev index".into()));
        }
        Ok(Self { times, loops, interpolation: Interpolation::PiecewiseLinear })
    }

    /// Uniform sampling of `f` at `n + 1` times.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> Loop) -> Result<Self> {
        let times: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let loops = times.iter().map(|&t| f(t)).collect();
        Self::new(times, loops)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn loops(&self) -> &[Loop] {
        &self.loops
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn at(&self, t: f64) -> Loop {
        let t = t.clamp(0.0, 1.0);
        let i = match self.times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => return self.loops[i].clone(),
            Err(i) => i.max(1) - 1,
        };
        let w = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        self.loops[i].lerp(&self.loops[i + 1], w)
    }

    /// Largest sup-distance between consecutive loops.
    pub fn max_step(&self) -> f64 {
        self.loops.windows(2).map(|w| loop_distance(&w[0], &w[1])).fold(0.0, f64::max)
    }

    pub fn check_continuity(&self, bound: f64) -> Result<()> {
        for (i, w) in self.loops.windows(2).enumerate() {
            let d = loop_distance(&w[0], &w[1]);
            if d > bound {
                return Err(Error::Precondition(format!(
                    "curve jumps by {d:e} > {bound:e} between samples {i} and {}",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn is_closed(&self, tol: f64) -> bool {
        loop_distance(&self.loops[0], self.loops.last().unwrap()) <= tol
    }

    /// Same loops traversed backwards.
    pub fn reversed(&self) -> LoopCurve {
        let times = self.times.iter().rev().map(|t| 1.0 - t).collect();
        let loops = self.loops.iter().rev().cloned().collect();
        LoopCurve { times, loops, interpolation: self.interpolation }
    }

    /// `self` followed by `other` (which must start where `self` ends), each
    /// taking half of the unit interval.
    pub fn concat(&self, other: &LoopCurve) -> Result<LoopCurve> {
        let mut times: Vec<f64> = self.times.iter().map(|t| 0.5 * t).collect();
        let mut loops = self.loops.clone();
        times.extend(other.times.iter().skip(1).map(|t| 0.5 + 0.5 * t));
        loops.extend(other.loops.iter().skip(1).cloned());
        LoopCurve::new(times, loops)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CurveFile {
            scheme_version: LOOP_SCHEME_VERSION,
            interpolation: self.interpolation,
            sobolev_k: self.loops[0].sobolev_k(),
            modes: self.loops[0].modes(),
            times: self.times.clone(),
            loops: self.loops.iter().map(|l| l.coeffs.clone()).collect(),
        })
        .expect("curve serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: CurveFile = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if f.scheme_version != LOOP_SCHEME_VERSION {
            return Err(Error::Config(format!("unsupported curve scheme {}", f.scheme_version)));
        }
        let loops = f
            .loops
            .into_iter()
            .map(|c| {
                LoopFile { scheme_version: LOOP_SCHEME_VERSION, sobolev_k: f.sobolev_k, modes: f.modes, coefficients: c }
                    .into_loop()
            })
            .collect::<Result<Vec<_>>>()?;
        LoopCurve::new(f.times, loops)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveFile {
    scheme_version: u32,
    interpolation: Interpolation,
    sobolev_k: u32,
    modes: usize,
    times: Vec<f64>,
    loops: Vec<Vec<V3>>,
}

/// A curve `t ↦ ρ(P(t))` with `P` a polynomial in `t` with loop-valued
/// coefficients (Chebyshev basis on `[0, 1]`).
#[derive(Debug, Clone)]
pub struct SmoothedCurve {
    cheb: Vec<Vec<V3>>,
    modes: usize,
    sobolev_k: u32,
    /// Sup-distance to the input loops on the sample times.
    pub sup_error: f64,
}

fn chebyshev(t: f64, degree: usize) -> Vec<f64> {
    let x = 2.0 * t - 1.0;
    let mut out = Vec::with_capacity(degree + 1);
    out.push(1.0);
    if degree >= 1 {
        out.push(x);
    }
    for k in 2..=degree {
        let next = 2.0 * x * out[k - 1] - out[k - 2];
        out.push(next);
    }
    out
}

impl SmoothedCurve {
    pub fn degree(&self) -> usize {
        self.cheb.len() - 1
    }

    /// The ambient polynomial `P(t)` before retraction.
    pub fn ambient(&self, t: f64) -> Loop {
        let basis = chebyshev(t, self.degree());
        let mut coeffs = vec![cvec::ZERO; 2 * self.modes + 1];
        for (b, layer) in basis.iter().zip(&self.cheb) {
            for (o, c) in coeffs.iter_mut().zip(layer) {
                *o = cvec::add(o, &cvec::scale_re(*b, c));
            }
        }
        Loop { coeffs, sobolev_k: self.sobolev_k }
    }

    pub fn eval(&self, t: f64, tol: &Tolerances) -> Result<Loop> {
        let p = self.ambient(t);
        let g = p.default_grid();
        let values = p
            .samples(g)
            .iter()
            .map(|w| quadric::retract(w, tol.cut))
            .collect::<Result<Vec<_>>>()?;
        Ok(Loop::from_samples(&values, self.modes, self.sobolev_k)?.0)
    }
}

/// Least-squares polynomial fit of degree `degree` in `t` to the curve's
/// loops, composed with the retraction.
pub fn smooth_curve(curve: &LoopCurve, degree: usize, tol: &Tolerances) -> Result<SmoothedCurve> {
    let n = curve.len();
    if degree + 1 > n {
        return Err(Error::Precondition(format!("degree {degree} needs more than {n} samples")));
    }
    let modes = curve.loops[0].modes();
    let width = 2 * modes + 1;
    let a = DMatrix::from_fn(n, degree + 1, |i, k| chebyshev(curve.times[i], degree)[k]);
    let channels = 2 * 3 * width;
    let b = DMatrix::from_fn(n, channels, |i, ch| {
        let (j, rest) = (ch / 6, ch % 6);
        let z = curve.loops[i].coeffs[j][rest / 2];
        if rest % 2 == 0 {
            z.re
        } else {
            z.im
        }
    });
    let svd = a.svd(true, true);
    let x = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::Precondition(format!("least squares failed: {e}")))?;
    let cheb = (0..=degree)
        .map(|k| {
            (0..width)
                .map(|j| std::array::from_fn(|d| C64::new(x[(k, 6 * j + 2 * d)], x[(k, 6 * j + 2 * d + 1)])))
                .collect()
        })
        .collect();
    let mut out = SmoothedCurve { cheb, modes, sobolev_k: curve.loops[0].sobolev_k(), sup_error: 0.0 };
    let mut err: f64 = 0.0;
    for (t, l) in curve.times.iter().zip(&curve.loops) {
        err = err.max(loop_distance(&out.eval(*t, tol)?, l));
    }
    out.sup_error = err;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cvec::real;
    use proptest::prelude::*;
    use std::f64::consts::SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn analyze_examples() {
        let x = Loop::constant(real([1.0, 0.0, 0.0]), 4, 1);
        let a = loop_analyze(&x);
        assert!((a.sobolev_norm - 1.0).abs() < 1e-15 && a.kappa_min.abs() < 1e-15);
        assert!(a.grid >= 16);

        let v = c(0.3, -0.4);
        let mut coeffs = vec![cvec::ZERO; 9];
        coeffs[5] = [v, c(0.0, 0.0), c(0.0, 0.0)];
        let mode = Loop::new(coeffs, 1).unwrap();
        assert!((mode.sobolev_norm() - SQRT_2 * v.norm()).abs() < 1e-15);

        let off = Loop::constant(real([(1.0f64 + 1e-3).sqrt(), 0.0, 0.0]), 2, 1);
        assert!((loop_analyze(&off).quadric_defect - 1e-3).abs() < 1e-15);
    }

    fn circle_on_quadric() -> Loop {
        // s ↦ (cos s, sin s, 0) has Σz² = 1
        let mut coeffs = vec![cvec::ZERO; 5];
        coeffs[3] = [c(0.5, 0.0), c(0.0, -0.5), c(0.0, 0.0)];
        coeffs[1] = [c(0.5, 0.0), c(0.0, 0.5), c(0.0, 0.0)];
        Loop::new(coeffs, 1).unwrap()
    }

    #[test]
    fn retract_examples() {
        let tol = Tolerances::default();
        let on = circle_on_quadric().pad(8);
        let (r, _) = loop_retract(&on, &tol).unwrap();
        assert!(loop_distance(&r, &on) < 1e-12);

        let two = Loop::constant(real([2.0, 0.0, 0.0]), 3, 1);
        let (r, _) = loop_retract(&two, &tol).unwrap();
        assert!(loop_distance(&r, &Loop::constant(real([1.0, 0.0, 0.0]), 3, 1)) < 1e-15);

        // s ↦ (cos s, 0, 0): Σw² = cos² s vanishes at s = π/2
        let mut coeffs = vec![cvec::ZERO; 9];
        coeffs[3] = real([0.5, 0.0, 0.0]);
        coeffs[5] = real([0.5, 0.0, 0.0]);
        let crossing = Loop::new(coeffs, 1).unwrap();
        assert!(matches!(loop_retract(&crossing, &tol), Err(Error::BranchCut { .. })));
    }

    #[test]
    fn retract_is_idempotent() {
        let tol = Tolerances::default();
        let mut coeffs = vec![cvec::ZERO; 33];
        coeffs[16] = [c(1.1, 0.2), c(0.3, 0.0), c(0.0, 0.1)];
        coeffs[17] = [c(0.0, 0.05), c(0.04, 0.0), c(0.02, 0.0)];
        coeffs[14] = [c(0.01, 0.0), c(0.0, 0.02), c(0.0, 0.0)];
        let x = Loop::new(coeffs, 1).unwrap();
        let (once, _) = loop_retract(&x, &tol).unwrap();
        let (twice, _) = loop_retract(&once, &tol).unwrap();
        let change = once.coeffs().iter().zip(twice.coeffs()).map(|(a, b)| cvec::dist(a, b)).fold(0.0, f64::max);
        assert!(change <= 1e-12, "{change}");
        assert!(loop_analyze(&once).quadric_defect < 1e-10);
    }

    #[test]
    fn exhaustion_examples() {
        let tol = Tolerances::default();
        assert_eq!(loop_exhaustion(&Loop::constant(real([1.0, 0.0, 0.0]), 2, 1), &tol).unwrap(), 1.0);
        let p = Loop::constant([c(SQRT_2, 0.0), c(0.0, 1.0), c(0.0, 0.0)], 2, 1);
        assert!((loop_exhaustion(&p, &tol).unwrap() - 3.0).abs() < 1e-14);
        let mixed = Loop::constant(real([1.0, 0.0, 0.0]), 2, 1).lerp(&p, 0.5);
        let per_sample = mixed
            .samples(mixed.default_grid())
            .iter()
            .map(|w| quadric::exhaustion(&quadric::retract(w, tol.cut).unwrap()))
            .fold(0.0, f64::max);
        assert_eq!(loop_exhaustion(&mixed, &tol).unwrap(), per_sample);
        let on = circle_on_quadric();
        assert!((loop_exhaustion(&on, &tol).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn smoothing_examples() {
        let tol = Tolerances::default();
        let p = Loop::constant([c(SQRT_2, 0.0), c(0.0, 1.0), c(0.0, 0.0)], 2, 1);
        let flat = LoopCurve::from_fn(8, |_| p.clone()).unwrap();
        let s = smooth_curve(&flat, 0, &tol).unwrap();
        assert!(s.sup_error <= 1e-12);

        let curve = LoopCurve::from_fn(40, |t| {
            let (a, b) = (1.3 * t, 0.4 * t);
            let z = [c(a.cosh() * b.cos(), 0.0), c(a.cosh() * b.sin(), 0.0), c(0.0, a.sinh())];
            Loop::constant(z, 2, 1)
        })
        .unwrap();
        let lo = smooth_curve(&curve, 2, &tol).unwrap();
        let hi = smooth_curve(&curve, 4, &tol).unwrap();
        assert!(hi.sup_error < lo.sup_error, "{} vs {}", hi.sup_error, lo.sup_error);
        let on = loop_analyze(&hi.eval(0.37, &tol).unwrap()).quadric_defect;
        assert!(on < 1e-12);

        // Σw² = 1 − 1.21 t² reaches the cut before t = 1
        let toward_cut =
            LoopCurve::from_fn(10, |t| Loop::constant([c(1.0, 0.0), c(0.0, 1.1 * t), c(0.0, 0.0)], 1, 1)).unwrap();
        assert!(matches!(smooth_curve(&toward_cut, 1, &tol), Err(Error::BranchCut { .. })));
    }

    #[test]
    fn curve_validation_and_serialization() {
        let p = Loop::constant(real([1.0, 0.0, 0.0]), 1, 2);
        assert!(LoopCurve::new(vec![0.0, 0.5], vec![p.clone(), p.clone()]).is_err());
        assert!(LoopCurve::new(vec![0.0, 0.0, 1.0], vec![p.clone(), p.clone(), p.clone()]).is_err());
        let circle = Loop::new(circle_on_quadric().coeffs()[1..4].to_vec(), 2).unwrap();
        assert!(LoopCurve::new(vec![0.0, 0.25, 1.0], vec![p.clone(), circle_on_quadric().truncate(1), p.clone()]).is_err());
        let curve = LoopCurve::new(vec![0.0, 0.25, 1.0], vec![p.clone(), circle.clone(), p.clone()]).unwrap();
        let back = LoopCurve::from_json(&curve.to_json()).unwrap();
        assert_eq!(back, curve);
        assert!(curve.is_closed(1e-15));
        assert!(loop_distance(&curve.at(0.125), &p.lerp(&circle, 0.5)) < 1e-15);
        assert!(Loop::from_json(&p.to_json()).unwrap() == p);
    }

    proptest! {
        #[test]
        fn sobolev_norm_monotone_under_truncation(
            raw in proptest::collection::vec(-1.0f64..1.0, 6 * 9),
            keep in 0usize..4,
            k in 1u32..4,
        ) {
            let coeffs: Vec<V3> = raw.chunks(6).map(|w| [c(w[0], w[1]), c(w[2], w[3]), c(w[4], w[5])]).collect();
            let x = Loop::new(coeffs, k).unwrap();
            prop_assert!(x.truncate(keep).sobolev_norm() <= x.sobolev_norm());
        }
    }
}
