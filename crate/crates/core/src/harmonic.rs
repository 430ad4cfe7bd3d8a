//! Harmonic measure of boundary arcs of the unit disc, polynomial
//! certificates `θ` with `θ(0) = δ`, `Re θ < 1` on the closed disc and
//! `Re θ < 0` off the arcs, and the model kernel on `Δ̄(3/ε) ∖ V`.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::spectral;
use crate::{Error, Result, C64};

/// Finite union of open arcs `{e^{iφ} : a < φ < b}` of the unit circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryArcSet {
    /// Disjoint, sorted by start, starts in `[0, 2π)`, `0 < b − a ≤ 2π`.
    arcs: Vec<(f64, f64)>,
}

impl BoundaryArcSet {
    pub fn empty() -> Self {
        Self { arcs: Vec::new() }
    }

    pub fn full() -> Self {
        Self { arcs: vec![(0.0, TAU)] }
    }

    /// Normalizes starts into `[0, 2π)` and merges overlapping arcs.
    pub fn new(arcs: &[(f64, f64)]) -> Result<Self> {
        let mut list = Vec::new();
        for &(a, b) in arcs {
            if !a.is_finite() || !b.is_finite() || b <= a {
                return Err(Error::Precondition(format!("arc ({a}, {b}) is not an open arc")));
            }
            if b - a >= TAU {
                return Ok(Self::full());
            }
            let s = a.rem_euclid(TAU);
            list.push((s, s + (b - a)));
        }
        list.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (a, b) in list {
            match merged.last_mut() {
                Some(last) if a < last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        // an arc running past 2π may overlap the first ones
        while merged.len() > 1 {
            let end = merged.last().unwrap().1 - TAU;
            if end > merged[0].0 {
                let first = merged.remove(0);
                let last = merged.last_mut().unwrap();
                last.1 = last.1.max(first.1 + TAU);
            } else {
                break;
            }
        }
        if let [(a, b)] = merged[..] {
            if b - a >= TAU {
                return Ok(Self::full());
            }
        }
        Ok(Self { arcs: merged })
    }

    pub fn arcs(&self) -> &[(f64, f64)] {
        &self.arcs
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn is_full(&self) -> bool {
        matches!(self.arcs[..], [(a, b)] if b - a >= TAU)
    }

    pub fn total_length(&self) -> f64 {
        self.arcs.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, phi: f64) -> bool {
        if self.is_full() {
            return true;
        }
        let p = phi.rem_euclid(TAU);
        self.arcs.iter().any(|&(a, b)| (a < p && p < b) || (a < p + TAU && p + TAU < b))
    }

    pub fn rotate(&self, alpha: f64) -> BoundaryArcSet {
        if self.is_full() {
            return self.clone();
        }
        let moved: Vec<_> = self.arcs.iter().map(|&(a, b)| (a + alpha, b + alpha)).collect();
        Self::new(&moved).expect("rotation preserves validity")
    }

    /// Each arc shortened by `fraction` of its length, evenly at both ends.
    /// The full circle has no complement to keep away from and is returned
    /// unchanged.
    pub fn shrink(&self, fraction: f64) -> BoundaryArcSet {
        if self.is_full() {
            return self.clone();
        }
        let arcs = self
            .arcs
            .iter()
            .map(|&(a, b)| {
                let m = 0.5 * fraction * (b - a);
                (a + m, b - m)
            })
            .collect();
        BoundaryArcSet { arcs }
    }

    /// Endpoints of all arcs; they lie on `∂Δ ∖ Γ`.
    pub fn endpoints(&self) -> Vec<f64> {
        if self.is_full() {
            return Vec::new();
        }
        self.arcs.iter().flat_map(|&(a, b)| [a, b]).collect()
    }
}

/// Poisson integral of the indicator of `Γ` at the centre.
pub fn arc_measure(gamma: &BoundaryArcSet) -> f64 {
    gamma.total_length() / TAU
}

/// Fourier coefficient `k` of the indicator of `Γ`.
fn indicator_coeff(gamma: &BoundaryArcSet, k: i64) -> C64 {
    if k == 0 {
        return C64::new(arc_measure(gamma), 0.0);
    }
    let kf = k as f64;
    gamma
        .arcs()
        .iter()
        .map(|&(a, b)| (C64::from_polar(1.0, -kf * a) - C64::from_polar(1.0, -kf * b)) / C64::new(0.0, TAU * kf))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub pass: bool,
    pub center_error: f64,
    /// `max Re θ` over the radial-angular grid of the closed disc.
    pub max_re_disc: f64,
    /// `max Re θ` over grid points of `∂Δ ∖ Γ` and the arc endpoints.
    pub max_re_off_gamma: f64,
    pub grid: usize,
    pub radii: usize,
}

/// A polynomial `θ(ζ) = Σ aₖ ζᵏ` witnessing harmonic measure `> δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicCertificate {
    pub coeffs: Vec<C64>,
    pub delta: f64,
    pub report: Option<CertificateReport>,
}

impl HarmonicCertificate {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// `Re θ(r e^{2πij/n})` for `j < n`.
    fn real_part_on_circle(&self, r: f64, n: usize) -> Vec<f64> {
        let mut c = vec![C64::new(0.0, 0.0); n];
        let mut rk = 1.0;
        for (k, a) in self.coeffs.iter().enumerate() {
            c[k % n] += a * rk;
            rk *= r;
        }
        spectral::inverse(&c).into_iter().map(|z| z.re).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertificateConfig {
    /// Share of the slack `ω(0) − δ` spent on shortening the arcs; the rest
    /// is the margin left for the Fejér tails.
    pub shrink: f64,
    pub initial_degree: usize,
    pub max_degree: usize,
    /// Boundary grid points per unit of degree.
    pub grid_factor: usize,
}

impl Default for CertificateConfig {
    fn default() -> Self {
        Self { shrink: 0.5, initial_degree: 16, max_degree: 16384, grid_factor: 4 }
    }
}

impl CertificateConfig {
    fn grid(&self, degree: usize) -> usize {
        spectral::pow2_at_least((self.grid_factor * degree).max(256))
    }
}

/// Fejér-smoothed indicator of the shrunk arcs, completed analytically and
/// shifted to take the value `δ` at the origin; the degree doubles until the
/// verifier accepts.
pub fn certificate_build(gamma: &BoundaryArcSet, delta: f64, cfg: &CertificateConfig) -> Result<HarmonicCertificate> {
    if !(delta > 0.0) {
        return Err(Error::Precondition(format!("level δ = {delta} must be positive")));
    }
    if !(cfg.shrink > 0.0 && cfg.shrink < 1.0) {
        return Err(Error::Config(format!("certificate shrink {} must lie in (0, 1)", cfg.shrink)));
    }
    if delta >= arc_measure(gamma) {
        return Err(Error::Infeasible(format!(
            "δ = {delta} is not below the harmonic measure {} of the arcs",
            arc_measure(gamma)
        )));
    }
    if gamma.is_full() {
        let mut c = HarmonicCertificate { coeffs: vec![C64::new(delta, 0.0)], delta, report: None };
        c.report = Some(certificate_verify(&c, gamma, cfg.grid(1)));
        return Ok(c);
    }
    let measure = arc_measure(gamma);
    let shrunk = gamma.shrink(cfg.shrink * (measure - delta) / measure);
    if delta >= arc_measure(&shrunk) {
        return Err(Error::Infeasible(format!(
            "δ = {delta} is not below the measure {} of the shrunk arcs",
            arc_measure(&shrunk)
        )));
    }
    let mut degree = cfg.initial_degree.max(1);
    let mut best = f64::INFINITY;
    loop {
        let mut coeffs = vec![C64::new(delta, 0.0)];
        for k in 1..degree {
            let w = 1.0 - k as f64 / degree as f64;
            coeffs.push(2.0 * w * indicator_coeff(&shrunk, k as i64));
        }
        let mut cert = HarmonicCertificate { coeffs, delta, report: None };
        let report = certificate_verify(&cert, gamma, cfg.grid(degree));
        if report.pass {
            cert.report = Some(report);
            return Ok(cert);
        }
        best = best.min(report.max_re_off_gamma.max(report.max_re_disc - 1.0));
        if degree >= cfg.max_degree {
            return Err(Error::DegreeExhausted { max_degree: cfg.max_degree, best_margin: -best });
        }
        degree = (2 * degree).min(cfg.max_degree);
    }
}

/// Grid check of `θ(0) = δ`, `Re θ < 1` on `Δ̄` and `Re θ < 0` on `∂Δ ∖ Γ`.
pub fn certificate_verify(c: &HarmonicCertificate, gamma: &BoundaryArcSet, grid: usize) -> CertificateReport {
    let grid = grid.max(8);
    let center_error = (c.eval(C64::new(0.0, 0.0)) - c.delta).norm();
    let radii = 8;
    let mut max_re_disc = f64::NEG_INFINITY;
    for j in 1..=radii {
        let r = j as f64 / radii as f64;
        let m = c.real_part_on_circle(r, grid).into_iter().fold(f64::NEG_INFINITY, f64::max);
        max_re_disc = max_re_disc.max(m);
    }
    max_re_disc = max_re_disc.max(c.eval(C64::new(0.0, 0.0)).re);
    let boundary = c.real_part_on_circle(1.0, grid);
    let mut max_off = f64::NEG_INFINITY;
    for (phi, v) in spectral::angles(grid).into_iter().zip(&boundary) {
        if !gamma.contains(phi) {
            max_off = max_off.max(*v);
        }
    }
    for phi in gamma.endpoints() {
        max_off = max_off.max(c.eval(C64::from_polar(1.0, phi)).re);
    }
    let pass = center_error <= 1e-12 && max_re_disc < 1.0 && max_off < 0.0;
    CertificateReport { pass, center_error, max_re_disc, max_re_off_gamma: max_off, grid, radii }
}

/// `g(s) = 1 − √(1 − s)`, principal branch, `g(0) = 0`.
pub fn g(s: C64) -> C64 {
    1.0 - (1.0 - s).sqrt()
}

/// `g_σ(s) = g(s/σ)`.
pub fn g_sigma(s: C64, sigma: f64) -> C64 {
    g(s / sigma)
}

/// `ψ(t) = σ t (2 − t)`, the inverse of `g_σ`.
pub fn psi(t: C64, sigma: f64) -> C64 {
    sigma * t * (2.0 - t)
}

/// `s ∈ U = Δ(ε) ∪ {0 < arg s < ε}`.
pub fn in_u(s: C64, eps: f64) -> bool {
    s.norm() < eps || (s.norm() > 0.0 && s.arg() > 0.0 && s.arg() < eps)
}

/// `t ∈ V = g(U)`: the principal branch has `Re √(1 − s) > 0`, so `V` is
/// the part of `ψ₁⁻¹(U)` with `Re t < 1`.
pub fn in_v(t: C64, eps: f64) -> bool {
    t.re < 1.0 && in_u(psi(t, 1.0), eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    pub radial: usize,
    pub angular: usize,
    /// Samples along each of the three pieces of `∂U`.
    pub boundary: usize,
    pub initial_degree: usize,
    pub max_degree: usize,
    /// One-sided least-squares sweeps per degree.
    pub sweeps: usize,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { radial: 48, angular: 256, boundary: 600, initial_degree: 8, max_degree: 128, sweeps: 60 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub degree: usize,
    pub samples: usize,
    /// `max Re θ` over the samples of `Δ̄(3/ε) ∖ V`; negative on success.
    pub max_re_complement: f64,
    /// `max Re θ` over all samples of `Δ̄(3/ε)`.
    pub max_re_disc: f64,
}

/// `θ(t) = Σ aₖ (t/R)ᵏ` with `R = 3/ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RungeKernel {
    pub epsilon: f64,
    pub radius: f64,
    pub scaled_coeffs: Vec<C64>,
    pub delta: f64,
    pub report: KernelReport,
}

impl RungeKernel {
    pub fn eval(&self, t: C64) -> C64 {
        let z = t / self.radius;
        self.scaled_coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
    }
}

/// Sample points of `Δ̄(3/ε)`, split by membership in `V`.
pub fn kernel_samples(eps: f64, cfg: &KernelConfig) -> (Vec<C64>, Vec<C64>) {
    let r_max = 3.0 / eps;
    let mut pts = Vec::new();
    for i in 1..=cfg.radial {
        let r = r_max * i as f64 / cfg.radial as f64;
        for phi in spectral::angles(cfg.angular) {
            pts.push(C64::from_polar(r, phi));
        }
    }
    // ∂V is the image of ∂U; approach the rays from inside the sector
    let far = 4.0 * r_max * r_max;
    let nb = cfg.boundary.max(2);
    for j in 0..nb {
        let x = eps * (far / eps).powf(j as f64 / (nb - 1) as f64);
        for arg in [1e-12, eps - 1e-12] {
            pts.push(g(C64::from_polar(x, arg)));
        }
        let phi = eps + (TAU - eps) * j as f64 / (nb - 1) as f64;
        pts.push(g(C64::from_polar(eps, phi)));
    }
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for t in pts.into_iter().filter(|t| t.norm() <= r_max) {
        if in_v(t, eps) {
            inside.push(t);
        } else {
            outside.push(t);
        }
    }
    (inside, outside)
}

/// Constructive replacement of the Runge step: `θ(0) = 1` fixed, `Re θ < 0`
/// sought on sampled `Δ̄(3/ε) ∖ V` by one-sided least squares (fit, then
/// clamp the targets to `min(Re θ, −1)`) with doubling degree.
pub fn runge_kernel(eps: f64, cfg: &KernelConfig) -> Result<RungeKernel> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Precondition(format!("ε = {eps} must lie in (0, 1)")));
    }
    let radius = 3.0 / eps;
    let (inside, outside) = kernel_samples(eps, cfg);
    let zs: Vec<C64> = outside.iter().map(|t| t / radius).collect();
    let mut best = f64::INFINITY;
    let mut degree = cfg.initial_degree.max(1);
    loop {
        let powers = |z: C64| {
            let mut p = Vec::with_capacity(degree);
            let mut zk = z;
            for _ in 0..degree {
                p.push(zk);
                zk *= z;
            }
            p
        };
        let rows: Vec<Vec<C64>> = zs.iter().map(|&z| powers(z)).collect();
        let a = DMatrix::from_fn(zs.len(), 2 * degree, |i, j| {
            if j < degree {
                rows[i][j].re
            } else {
                -rows[i][j - degree].im
            }
        });
        let qr = a.clone().qr();
        let (q, r) = (qr.q(), qr.r());
        let mut target = DVector::from_element(zs.len(), -1.0);
        let mut found = None;
        for _ in 0..cfg.sweeps.max(1) {
            let rhs = q.transpose() * target.add_scalar(-1.0);
            let Some(x) = r.solve_upper_triangular(&rhs) else { break };
            let values = (&a * &x).add_scalar(1.0);
            let worst = values.max();
            best = best.min(worst);
            if worst < 0.0 {
                found = Some((x, worst));
                break;
            }
            target = values.map(|v| v.min(-1.0));
        }
        if let Some((x, worst)) = found {
            let mut scaled_coeffs = vec![C64::new(1.0, 0.0)];
            scaled_coeffs.extend((0..degree).map(|k| C64::new(x[k], x[k + degree])));
            let mut kernel = RungeKernel {
                epsilon: eps,
                radius,
                scaled_coeffs,
                delta: 0.0,
                report: KernelReport { degree, samples: zs.len(), max_re_complement: worst, max_re_disc: 0.0 },
            };
            let sup = inside.iter().chain(&outside).map(|&t| kernel.eval(t).re).fold(1.0, f64::max);
            kernel.delta = 0.9 / sup;
            kernel.report.max_re_disc = sup;
            return Ok(kernel);
        }
        if degree >= cfg.max_degree {
            return Err(Error::DegreeExhausted { max_degree: cfg.max_degree, best_margin: -best });
        }
        degree = (2 * degree).min(cfg.max_degree);
    }
}

/// `(1 + s)/(1 − s)`, which maps `Δ` onto the right half plane.
pub fn cayley(s: C64) -> C64 {
    (1.0 + s) / (1.0 - s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn measure_examples() {
        assert_eq!(arc_measure(&BoundaryArcSet::full()), 1.0);
        assert_eq!(arc_measure(&BoundaryArcSet::empty()), 0.0);
        let half = BoundaryArcSet::new(&[(0.3, 0.3 + PI)]).unwrap();
        assert!((arc_measure(&half) - 0.5).abs() < 1e-15);
        let wrapped = BoundaryArcSet::new(&[(6.0, 7.0), (0.5, 1.0)]).unwrap();
        assert_eq!(wrapped.arcs().len(), 1);
        assert!((arc_measure(&wrapped) - (1.0 + TAU - 6.0) / TAU).abs() < 1e-14);
    }

    #[test]
    fn measure_is_additive_and_rotation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let mut cuts: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..TAU)).collect();
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let arcs: Vec<_> = cuts.chunks(2).map(|w| (w[0], w[1])).collect();
            let whole = BoundaryArcSet::new(&arcs).unwrap();
            let parts: f64 = arcs.iter().map(|&a| arc_measure(&BoundaryArcSet::new(&[a]).unwrap())).sum();
            assert!((arc_measure(&whole) - parts).abs() < 1e-14);
            let alpha = rng.gen_range(-10.0..10.0);
            assert!((arc_measure(&whole.rotate(alpha)) - arc_measure(&whole)).abs() < 1e-14);
        }
    }

    #[test]
    fn certificate_examples() {
        let cfg = CertificateConfig::default();
        let full = certificate_build(&BoundaryArcSet::full(), 0.5, &cfg).unwrap();
        assert_eq!(full.coeffs, vec![C64::new(0.5, 0.0)]);
        assert!(full.report.unwrap().pass);

        let half = BoundaryArcSet::new(&[(0.0, PI)]).unwrap();
        let c = certificate_build(&half, 0.3, &cfg).unwrap();
        assert!(certificate_verify(&c, &half, 4 * c.report.as_ref().unwrap().grid).pass);

        assert!(matches!(
            certificate_build(&BoundaryArcSet::empty(), 0.1, &cfg),
            Err(Error::Infeasible(_))
        ));

        let constant = HarmonicCertificate { coeffs: vec![C64::new(0.2, 0.0)], delta: 0.2, report: None };
        assert!(certificate_verify(&constant, &BoundaryArcSet::full(), 64).pass);
        let shifted = HarmonicCertificate { coeffs: vec![C64::new(0.25, 0.0)], delta: 0.2, report: None };
        let r = certificate_verify(&shifted, &BoundaryArcSet::full(), 64);
        assert!(!r.pass && r.center_error > 1e-12);
    }

    #[test]
    fn verifier_rejects_positive_values_off_the_arcs() {
        let half = BoundaryArcSet::new(&[(0.0, PI)]).unwrap();
        // Re θ = 0.1 + 0.5 cos φ is positive near φ = 2π
        let bad = HarmonicCertificate { coeffs: vec![C64::new(0.1, 0.0), C64::new(0.5, 0.0)], delta: 0.1, report: None };
        let r = certificate_verify(&bad, &half, 256);
        assert!(!r.pass && r.max_re_off_gamma > 0.0);
    }

    #[test]
    fn branch_maps() {
        assert_eq!(g(C64::new(0.0, 0.0)), C64::new(0.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let s = C64::from_polar(rng.gen_range(0.0..0.999), rng.gen_range(0.0..TAU));
            let sigma = rng.gen_range(0.2..1.0);
            let back = psi(g_sigma(s, sigma), sigma);
            assert!((back - s).norm() < 1e-13 * (1.0 + s.norm()));
            assert!(cayley(s).re > 0.0);
            assert!((1.0 - g(s)).re > 0.0);
        }
    }

    #[test]
    fn kernel_samples_cover_both_sides() {
        let (inside, outside) = kernel_samples(0.5, &KernelConfig::default());
        assert!(!inside.is_empty() && !outside.is_empty());
        assert!(inside.iter().all(|t| in_v(*t, 0.5)));
        // V reaches the outer circle along the channel above Re t ≈ 1
        assert!(in_v(C64::new(0.5, 5.5), 0.5));
        assert!(!in_v(C64::new(1.5, 5.5), 0.5));
        assert!(matches!(runge_kernel(1.0, &KernelConfig::default()), Err(Error::Precondition(_))));
    }
}
