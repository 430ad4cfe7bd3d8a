//! Regular lifts of curves of loops into families of loop-discs, safety radii,
//! and analytic continuation of a function on `M'`-loops by sliding discs.
//!
//! A lift assigns to every grid time `tᵢ` a loop-disc `ξᵢ(σ)` centred at the
//! curve loop `xᵢ` whose boundary circle avoids `K`. The continued value at
//! `y` near `xᵢ` is the boundary mean
//! `fᵢ(y) = ⨍_{|σ|=1} f(ρ(ξᵢ(σ) − xᵢ + y))`, which is defined even when `xᵢ`
//! itself touches `K`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cvec;
use crate::exec::ExecMode;
use crate::loops::{Loop, LoopCurve};
use crate::quadric;
use crate::spectral;
use crate::{Error, Result, Tolerances, C64, V3};

/// `Ξ(σ, s) = Σ_{m ≤ M} σᵐ A_m(s)` with loop coefficients `A_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopDisc {
    rings: Vec<Loop>,
}

impl LoopDisc {
    pub fn new(rings: Vec<Loop>) -> Result<Self> {
        let Some(first) = rings.first() else {
            return Err(Error::Precondition("loop-disc needs at least one coefficient loop".into()));
        };
        if rings.iter().any(|r| r.modes() != first.modes()) {
            return Err(Error::Precondition("coefficient loops differ in mode count".into()));
        }
        Ok(Self { rings })
    }

    pub fn constant(x: &Loop, m_deg: usize) -> Self {
        let zero = Loop::constant(cvec::ZERO, x.modes(), x.sobolev_k());
        let mut rings = vec![zero; m_deg + 1];
        rings[0] = x.clone();
        Self { rings }
    }

    /// Fits `field(σ, s)` sampled on `|σ| = 1`; returns the disc and the ℓ²
    /// size of everything the fit discards (negative σ-powers, σ-degree above
    /// `m_deg`, loop modes above `modes`), maximised over the samples.
    pub fn from_field<F>(m_deg: usize, modes: usize, sobolev_k: u32, field: F, exec: ExecMode) -> Result<(Self, f64)>
    where
        F: Fn(C64, f64) -> Result<V3> + Sync,
    {
        let ns = spectral::pow2_at_least((2 * (m_deg + 1)).max(16));
        let g = spectral::pow2_at_least((4 * modes).max(8));
        let sigmas: Vec<C64> = spectral::angles(ns).into_iter().map(|a| C64::from_polar(1.0, a)).collect();
        let s_grid = spectral::angles(g);
        // per s: σ-coefficients 0..=m_deg and the dropped part
        let columns = exec.try_map_range(g, |k| {
            let vals = sigmas.iter().map(|sg| field(*sg, s_grid[k])).collect::<Result<Vec<V3>>>()?;
            let mut kept = vec![cvec::ZERO; m_deg + 1];
            let mut dropped = 0.0;
            for d in 0..3 {
                let c = spectral::forward(&vals.iter().map(|v| v[d]).collect::<Vec<_>>());
                for (j, cj) in c.iter().enumerate() {
                    let m = spectral::freq(j, ns);
                    if (0..=m_deg as i64).contains(&m) {
                        kept[m as usize][d] = *cj;
                    } else {
                        dropped += cj.norm_sqr();
                    }
                }
            }
            Ok::<_, Error>((kept, dropped.sqrt()))
        })?;
        let mut residual = columns.iter().map(|c| c.1).fold(0.0, f64::max);
        let mut rings = Vec::with_capacity(m_deg + 1);
        for m in 0..=m_deg {
            let samples: Vec<V3> = columns.iter().map(|c| c.0[m]).collect();
            let (ring, dropped) = Loop::from_samples(&samples, modes, sobolev_k)?;
            residual = residual.max(dropped);
            rings.push(ring);
        }
        Ok((Self { rings }, residual))
    }

    pub fn m_deg(&self) -> usize {
        self.rings.len() - 1
    }

    pub fn modes(&self) -> usize {
        self.rings[0].modes()
    }

    pub fn rings(&self) -> &[Loop] {
        &self.rings
    }

    /// The loop `Ξ(0, ·)`.
    pub fn center(&self) -> &Loop {
        &self.rings[0]
    }

    pub fn slice(&self, sigma: C64) -> Loop {
        let n = self.rings[0].coeffs().len();
        let mut coeffs = vec![cvec::ZERO; n];
        let mut pw = C64::new(1.0, 0.0);
        for ring in &self.rings {
            for (c, a) in coeffs.iter_mut().zip(ring.coeffs()) {
                *c = cvec::add(c, &cvec::scale(pw, a));
            }
            pw *= sigma;
        }
        Loop::new(coeffs, self.rings[0].sobolev_k()).expect("odd coefficient count")
    }

    /// Number of σ-samples used for sup norms over the closed disc.
    pub fn check_circle(&self) -> usize {
        spectral::pow2_at_least((2 * (self.m_deg() + 1)).max(16))
    }

    /// Values `Ξ(r e^{iφ_j}, s_k)` for all `j`, `k`, on the circle of radius `r`.
    pub fn circle_values(&self, r: f64) -> Vec<Vec<V3>> {
        let g = self.rings[0].default_grid();
        spectral::angles(self.check_circle())
            .into_iter()
            .map(|a| self.slice(C64::from_polar(r, a)).samples(g))
            .collect()
    }

    /// Sup distance over `Δ̄ × S¹`, attained on the boundary circle.
    pub fn distance(&self, other: &LoopDisc) -> f64 {
        let (a, b) = (self.circle_values(1.0), other.circle_values(1.0));
        a.iter()
            .zip(&b)
            .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| cvec::dist(p, q)))
            .fold(0.0, f64::max)
    }

    /// `min κ` on the closed disc, over radii `0, 1/8, …, 1`.
    pub fn interior_kappa(&self) -> f64 {
        (0..=8)
            .map(|i| min_kappa(&self.circle_values(i as f64 / 8.0)))
            .fold(f64::INFINITY, f64::min)
    }
}

fn min_kappa(values: &[Vec<V3>]) -> f64 {
    values.iter().flatten().map(quadric::kappa).fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LiftConfig {
    pub eps_push: f64,
    pub max_retries: usize,
    /// σ-degree of every loop-disc.
    pub m_deg: usize,
    /// Width of the ramp `χ(t) = min(1, t/ramp)`; `0` keeps `χ ≡ 1`.
    pub ramp: f64,
    /// Admissible `‖ξ_t(0) − x_t‖`.
    pub center_tol: f64,
    pub seed: u64,
}

impl Default for LiftConfig {
    fn default() -> Self {
        Self { eps_push: 0.05, max_retries: 4, m_deg: 32, ramp: 0.25, center_tol: 1e-8, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularLift {
    pub times: Vec<f64>,
    pub discs: Vec<LoopDisc>,
    /// `min κ` over all boundary circles.
    pub boundary_kappa: f64,
    /// Grid index where `boundary_kappa` is attained.
    pub worst_index: usize,
    /// `min κ` over the closed disc at `t = 0`.
    pub initial_kappa: f64,
    pub center_error: f64,
    pub fit_residual: f64,
    pub retries: usize,
}

impl RegularLift {
    pub fn check(&self, cfg: &LiftConfig, tol: &Tolerances) -> Result<()> {
        let margin = self.boundary_kappa.min(self.initial_kappa);
        if !(margin > tol.k_set) || !(self.center_error <= cfg.center_tol) {
            return Err(Error::LiftFailure { retries: self.retries, margin, t_index: self.worst_index });
        }
        Ok(())
    }
}

/// Builds the lift `ξᵢ(σ) = field(i, σ, ·)` for every grid time and records
/// the membership diagnostics; no pass/fail decision is made here.
pub fn lift_from_field<F>(curve: &LoopCurve, m_deg: usize, field: F, exec: ExecMode) -> Result<RegularLift>
where
    F: Fn(usize, C64, f64) -> Result<V3> + Sync,
{
    let modes = curve.loops()[0].modes();
    let k = curve.loops()[0].sobolev_k();
    let fits = exec.try_map_range(curve.len(), |i| {
        let (disc, res) = LoopDisc::from_field(m_deg, modes, k, |sg, s| field(i, sg, s), ExecMode::Sequential)?;
        let kappa = min_kappa(&disc.circle_values(1.0));
        let center = crate::loops::loop_distance(disc.center(), &curve.loops()[i]);
        Ok::<_, Error>((disc, res, kappa, center))
    })?;
    let mut lift = RegularLift {
        times: curve.times().to_vec(),
        discs: Vec::with_capacity(fits.len()),
        boundary_kappa: f64::INFINITY,
        worst_index: 0,
        initial_kappa: 0.0,
        center_error: 0.0,
        fit_residual: 0.0,
        retries: 0,
    };
    for (i, (disc, res, kappa, center)) in fits.into_iter().enumerate() {
        if kappa < lift.boundary_kappa {
            lift.boundary_kappa = kappa;
            lift.worst_index = i;
        }
        lift.center_error = lift.center_error.max(center);
        lift.fit_residual = lift.fit_residual.max(res);
        lift.discs.push(disc);
    }
    lift.initial_kappa = lift.discs[0].interior_kappa();
    Ok(lift)
}

/// Unit tangent field pushing `x` in an imaginary direction: along `i·Im x`
/// where that is visible, along a seeded real direction otherwise.
fn push_direction(x: &V3, fallback: &[f64; 3], phase: C64) -> V3 {
    let y = cvec::im(x);
    let ny = cvec::rnorm(&y);
    let dir = if ny > 1e-3 { y.map(|c| c / ny) } else { *fallback };
    let v = quadric::project_tangent(x, &cvec::scale(C64::i() * phase, &cvec::real(dir)));
    let n = cvec::norm(&v);
    if n > 0.0 {
        cvec::scale_re(1.0 / n, &v)
    } else {
        v
    }
}

/// Generic regular lift `Ξ = ρ(x_t + χ(t) σ ε_push v(t, s))`, retried with
/// re-seeded phases until the membership checks pass.
pub fn build_regular_lift(curve: &LoopCurve, cfg: &LiftConfig, tol: &Tolerances, exec: ExecMode) -> Result<RegularLift> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst = (f64::NEG_INFINITY, 0);
    for attempt in 0..=cfg.max_retries {
        let (phase, fallback) = if attempt == 0 {
            (C64::new(1.0, 0.0), [0.0, 0.0, 1.0])
        } else {
            let d: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let n = cvec::rnorm(&d).max(1e-12);
            (C64::from_polar(1.0, rng.gen_range(-0.5..0.5)), d.map(|c| c / n))
        };
        let chi = |t: f64| if cfg.ramp > 0.0 { (t / cfg.ramp).min(1.0) } else { 1.0 };
        let loops = curve.loops();
        let times = curve.times();
        let mut lift = lift_from_field(
            curve,
            cfg.m_deg,
            |i, sg, s| {
                let x = loops[i].eval(s);
                let v = push_direction(&x, &fallback, phase);
                quadric::retract(&cvec::add(&x, &cvec::scale(sg * (chi(times[i]) * cfg.eps_push), &v)), tol.cut)
            },
            exec,
        )?;
        lift.retries = attempt;
        match lift.check(cfg, tol) {
            Ok(()) => return Ok(lift),
            Err(Error::LiftFailure { margin, t_index, .. }) => {
                if margin > worst.0 {
                    worst = (margin, t_index);
                }
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::LiftFailure { retries: cfg.max_retries, margin: worst.0, t_index: worst.1 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyRadius {
    pub eps: f64,
    /// Smallest ambient perturbation radius keeping `Σz²` off the cut.
    pub cut_margin: f64,
    /// Perturbation radius keeping boundary values off `K`.
    pub k_margin: f64,
    /// Ratio of the boundary `κ` to the K margin.
    pub calibration: f64,
}

/// Retracted boundary values kept for margin sampling: per disc the 16 of
/// lowest `κ` and a uniform subsample of 64. Also returns the smallest cut
/// radius `√(|z|² + 1) − |z|` over all boundary values.
fn boundary_sample(lift: &RegularLift, tol: &Tolerances) -> Result<(f64, Vec<V3>)> {
    let mut cut = f64::INFINITY;
    let mut kept = Vec::new();
    for disc in &lift.discs {
        let values = disc
            .circle_values(1.0)
            .into_iter()
            .flatten()
            .map(|z| quadric::retract(&z, tol.cut))
            .collect::<Result<Vec<_>>>()?;
        for z in &values {
            let n = cvec::norm(z);
            cut = cut.min((n * n + 1.0).sqrt() - n);
        }
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| quadric::kappa(&values[a]).total_cmp(&quadric::kappa(&values[b])));
        kept.extend(order.iter().take(16).map(|&i| values[i]));
        kept.extend(values.iter().step_by((values.len() / 64).max(1)));
    }
    Ok((cut, kept))
}

fn random_unit(rng: &mut ChaCha8Rng) -> V3 {
    let v: V3 = std::array::from_fn(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    cvec::scale_re(1.0 / cvec::norm(&v).max(1e-12), &v)
}

/// `κ(ρ(z + r d))`, or `0` where the ray leaves the retraction tube.
fn ray_kappa(z: &V3, d: &V3, r: f64, tol: &Tolerances) -> f64 {
    quadric::retract(&cvec::add(z, &cvec::scale_re(r, d)), tol.cut).map_or(0.0, |w| quadric::kappa(&w))
}

/// Real gradient of `κ ∘ ρ` at `z`, as a vector of `C³ = R⁶`.
fn kappa_gradient(z: &V3, tol: &Tolerances) -> V3 {
    let h = 1e-6;
    let mut g = cvec::ZERO;
    for j in 0..3 {
        for (unit, slot) in [(C64::new(1.0, 0.0), 0), (C64::new(0.0, 1.0), 1)] {
            let mut e = cvec::ZERO;
            e[j] = unit;
            let slope = (ray_kappa(z, &e, h, tol) - ray_kappa(z, &e, -h, tol)) / (2.0 * h);
            if slot == 0 {
                g[j].re = slope;
            } else {
                g[j].im = slope;
            }
        }
    }
    g
}

/// Distance along `d` from `z` to the first point with `κ ∘ ρ ≤ τ_K`, capped
/// at `cap`. Steps of `κ/8` cannot jump over a zero of a function whose
/// slope stays below 8.
fn ray_radius(z: &V3, d: &V3, cap: f64, tol: &Tolerances) -> f64 {
    let mut r = 0.0;
    let mut k = quadric::kappa(z);
    while k > tol.k_set {
        if r >= cap {
            return cap;
        }
        let step = (k / 8.0).max(1e-3 * tol.k_set);
        let next = ray_kappa(z, d, r + step, tol);
        if next <= tol.k_set {
            let (mut lo, mut hi) = (r, r + step);
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if ray_kappa(z, d, mid, tol) > tol.k_set {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return lo;
        }
        r += step;
        k = next;
    }
    r
}

/// Calibrated K margin: the smallest sampled radius by which boundary values
/// can be perturbed, before retraction, while `κ` stays above `τ_K`. Probes the
/// steepest-descent direction of `κ ∘ ρ` and three seeded random directions
/// at the lowest-`κ` values and at a uniform subsample.
fn calibrated_k_margin(values: &[V3], cap: f64, seed: u64, tol: &Tolerances) -> f64 {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| quadric::kappa(&values[a]).total_cmp(&quadric::kappa(&values[b])));
    let stride = (values.len() / 1024).max(1);
    let mut picked: Vec<usize> = order.iter().take(512).copied().collect();
    picked.extend((0..values.len()).step_by(stride));
    picked.sort_unstable();
    picked.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = cap;
    for &i in &picked {
        let z = &values[i];
        let g = kappa_gradient(z, tol);
        let gn = cvec::norm(&g);
        if gn > 0.0 {
            best = best.min(ray_radius(z, &cvec::scale_re(-1.0 / gn, &g), best, tol));
        }
        for _ in 0..3 {
            let d = random_unit(&mut rng);
            best = best.min(ray_radius(z, &d, best, tol));
        }
    }
    best
}

/// `ε = min(cut margin, K margin) / 3`, with the calibrated K margin of the
/// boundary values.
pub fn safety_radius(lift: &RegularLift, seed: u64, tol: &Tolerances) -> Result<SafetyRadius> {
    if !(lift.initial_kappa > tol.k_set) {
        return Err(Error::DegenerateLift(format!("t = 0 disc meets K (κ = {:e})", lift.initial_kappa)));
    }
    if !(lift.boundary_kappa > tol.k_set) {
        return Err(Error::DegenerateLift(format!(
            "boundary circle meets K at t-index {} (κ = {:e})",
            lift.worst_index, lift.boundary_kappa
        )));
    }
    let (cut_margin, values) = boundary_sample(lift, tol)?;
    let k_margin = calibrated_k_margin(&values, cut_margin, seed, tol);
    if !(cut_margin > tol.k_set) || !(k_margin > tol.k_set) {
        return Err(Error::DegenerateLift(format!("margins underflow: cut {cut_margin:e}, K {k_margin:e}")));
    }
    Ok(SafetyRadius {
        eps: cut_margin.min(k_margin) / 3.0,
        cut_margin,
        k_margin,
        calibration: lift.boundary_kappa / k_margin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SlideConfig {
    /// Boundary nodes of the σ-circle.
    pub n_sigma: usize,
    /// Minimal s-grid handed to `f`.
    pub grid: usize,
    pub seed: u64,
}

impl Default for SlideConfig {
    fn default() -> Self {
        Self { n_sigma: 48, grid: 128, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub t: f64,
    pub center: Loop,
    pub value: C64,
    pub delta1: f64,
    /// `|fᵢ(y*) − fᵢ₊₁(y*)|` at the probe between this record and the next.
    pub residual: f64,
    pub kappa_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationChain {
    pub records: Vec<ChainRecord>,
    pub safety: SafetyRadius,
    /// Largest t-gap of the grid; every gap passed the step rule.
    pub delta: f64,
    pub delta1: f64,
    /// Sampled Lipschitz constant of the nearby-lift map in `y`.
    pub lift_lipschitz: f64,
    pub sigma_offset: f64,
}

impl ContinuationChain {
    pub fn first(&self) -> C64 {
        self.records[0].value
    }

    pub fn last(&self) -> C64 {
        self.records[self.records.len() - 1].value
    }

    pub fn increment(&self) -> C64 {
        self.last() - self.first()
    }

    pub fn max_residual(&self) -> f64 {
        self.records.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    /// CSV with header `t,re,im,delta1,residual,kappa_margin`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re,im,delta1,residual,kappa_margin\n");
        for r in &self.records {
            out.push_str(&format!(
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                r.t, r.value.re, r.value.im, r.delta1, r.residual, r.kappa_margin
            ));
        }
        out
    }
}

/// `⨍ f(ρ(ξ(σ) − x + y))` over the σ-nodes, with `shift = y − x` on the grid.
fn disc_mean<F>(f: &F, disc: &LoopDisc, shift: Option<&[V3]>, nodes: &[C64], g: usize, tol: &Tolerances) -> Result<C64>
where
    F: Fn(&[V3]) -> Result<C64> + Sync,
{
    let mut acc = C64::new(0.0, 0.0);
    for sg in nodes {
        let raw = disc.slice(*sg).samples(g);
        let vals = raw
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let w = match shift {
                    Some(sh) => cvec::add(z, &sh[k]),
                    None => *z,
                };
                quadric::retract(&w, tol.cut)
            })
            .collect::<Result<Vec<_>>>()?;
        acc += f(&vals)?;
    }
    Ok(acc / nodes.len() as f64)
}

fn sigma_nodes(n: usize, offset: f64) -> Vec<C64> {
    (0..n).map(|j| C64::from_polar(1.0, TAU * (j as f64 + offset) / n as f64)).collect()
}

/// Continues `f` along `curve` with the sliding discs of `lift`.
///
/// The step rule is checked on every grid gap: the discs must be closer than
/// `ε/2` and the probe `y* = ρ((xᵢ + xᵢ₊₁)/2)` must lie within `δ₁` of both
/// centres.
pub fn slide<F>(
    f: &F,
    curve: &LoopCurve,
    lift: &RegularLift,
    cfg: &SlideConfig,
    tol: &Tolerances,
    exec: ExecMode,
) -> Result<ContinuationChain>
where
    F: Fn(&[V3]) -> Result<C64> + Sync,
{
    if lift.discs.len() != curve.len() {
        return Err(Error::GridMismatch { left: lift.discs.len(), right: curve.len() });
    }
    let safety = safety_radius(lift, cfg.seed, tol)?;
    let lip = lift_lipschitz(&boundary_sample(lift, tol)?.1, cfg.seed, tol)?;
    let delta1 = safety.eps / (2.0 * lip);
    let n = curve.len();
    let loops = curve.loops();
    let g = spectral::pow2_at_least(cfg.grid.max(loops[0].default_grid()));
    let samples: Vec<Vec<V3>> = loops.iter().map(|x| x.samples(g)).collect();

    let disc_gaps = exec.map_range(n - 1, |i| lift.discs[i].distance(&lift.discs[i + 1]));
    let mut delta: f64 = 0.0;
    for (i, d) in disc_gaps.iter().enumerate() {
        if !(*d < safety.eps / 2.0) {
            return Err(Error::StepFailure { index: i, distance: *d, bound: safety.eps / 2.0 });
        }
        delta = delta.max(lift.times[i + 1] - lift.times[i]);
    }
    let probes = exec.try_map_range(n - 1, |i| {
        samples[i]
            .iter()
            .zip(&samples[i + 1])
            .map(|(a, b)| quadric::retract(&cvec::scale_re(0.5, &cvec::add(a, b)), tol.cut))
            .collect::<Result<Vec<V3>>>()
    })?;
    for i in 0..n - 1 {
        for side in [i, i + 1] {
            let d = probes[i].iter().zip(&samples[side]).map(|(p, x)| cvec::dist(p, x)).fold(0.0, f64::max);
            if !(d < delta1) {
                return Err(Error::StepFailure { index: i, distance: d, bound: delta1 });
            }
        }
    }

    let offset = ChaCha8Rng::seed_from_u64(cfg.seed).gen_range(0.0..1.0);
    let nodes = sigma_nodes(cfg.n_sigma, offset);
    let shift = |i: usize, y: &[V3]| -> Vec<V3> { y.iter().zip(&samples[i]).map(|(a, b)| cvec::sub(a, b)).collect() };
    let evaluated = exec.try_map_range(n, |i| {
        let disc = &lift.discs[i];
        let value = disc_mean(f, disc, None, &nodes, g, tol)?;
        let left = if i + 1 < n { Some(disc_mean(f, disc, Some(&shift(i, &probes[i])), &nodes, g, tol)?) } else { None };
        let right = if i > 0 { Some(disc_mean(f, disc, Some(&shift(i, &probes[i - 1])), &nodes, g, tol)?) } else { None };
        Ok::<_, Error>((value, left, right))
    })?;
    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let residual = match (evaluated[i].1, evaluated.get(i + 1).and_then(|e| e.2)) {
            (Some(a), Some(b)) => (a - b).norm(),
            _ => 0.0,
        };
        if !(residual <= tol.overlap) {
            return Err(Error::OverlapMismatch { index: i, residual, limit: tol.overlap });
        }
        records.push(ChainRecord {
            t: lift.times[i],
            center: loops[i].clone(),
            value: evaluated[i].0,
            delta1,
            residual,
            kappa_margin: min_kappa(&lift.discs[i].circle_values(1.0)),
        });
    }
    Ok(ContinuationChain { records, safety, delta, delta1, lift_lipschitz: lip, sigma_offset: offset })
}

/// Sampled Lipschitz constant of `y ↦ ρ(ξ − x + y)` in the sup norm, i.e. of
/// `ρ` at the (retracted) boundary values.
fn lift_lipschitz(values: &[V3], seed: u64, tol: &Tolerances) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let stride = (values.len() / 4096).max(1);
    let h = 1e-5;
    let mut best = 1.0f64;
    for z in values.iter().step_by(stride) {
        for _ in 0..4 {
            let d = random_unit(&mut rng);
            let moved = quadric::retract(&cvec::add(z, &cvec::scale_re(h, &d)), tol.cut)?;
            best = best.max(cvec::dist(&moved, z) / h);
        }
    }
    Ok(best)
}

/// `|⨍ f(D(σ)) − f(D(0))|` for a disc lying in `M'`-loops.
pub fn mean_value_audit<F>(f: &F, disc: &LoopDisc, n_sigma: usize, grid: usize, tol: &Tolerances) -> Result<f64>
where
    F: Fn(&[V3]) -> Result<C64> + Sync,
{
    let kappa = disc.interior_kappa();
    if !(kappa > tol.k_set) {
        return Err(Error::Precondition(format!("disc meets K-loops (κ = {kappa:e})")));
    }
    let g = spectral::pow2_at_least(grid.max(disc.center().default_grid()));
    let nodes = sigma_nodes(n_sigma, 0.0);
    let mean = disc_mean(f, disc, None, &nodes, g, tol)?;
    let center = disc
        .center()
        .samples(g)
        .iter()
        .map(|z| quadric::retract(z, tol.cut))
        .collect::<Result<Vec<_>>>()?;
    Ok((mean - f(&center)?).norm())
}
