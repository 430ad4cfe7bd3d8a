//! The loop-space function `f(x) = ∫_Δ ξ*ω` for `ω = z₁dz₂∧dz₃ − z₂dz₁∧dz₃ + z₃dz₁∧dz₂`,
//! its differential, the period `∫_K ω`, and the closed curve of circles on
//! `K = S²` along which `f` has no single-valued continuation.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::continuation::{self, build_regular_lift, ContinuationChain, LiftConfig, RegularLift, SlideConfig};
use crate::cvec;
use crate::exec::ExecMode;
use crate::loops::{Loop, LoopCurve};
use crate::quadric;
use crate::spectral;
use crate::{Error, Result, Tolerances, C64, V3};

/// How the cover lift `w(θ)` of a loop is filled in over the disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExtensionSchedule {
    /// `W(r, θ) = Σ ĉₙ r^{β|n|} e^{inθ}`.
    Harmonic { beta: f64 },
    /// `W(r, θ) = (1 − rᵖ) w* + rᵖ w(θ)` with an anchor `w*` chosen to keep
    /// the segments away from the origin.
    Cone { power: u32 },
    /// Cone on the unit sphere: with `h = rᵖ`, `ν = |w|`, `u = w/ν`,
    /// `W = (1 − h + hν)((1 − h) u* + h u)` for a unit anchor `u*` far from
    /// every `−u(θ)`.
    Spherical { power: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FEvalConfig {
    /// Angular grid (rounded up to a power of two and to the loop's own grid).
    pub angular: usize,
    /// Gauss–Legendre nodes in `r`.
    pub radial: usize,
    /// A schedule is accepted when `min |W| ≥ zero_fraction · min |w|`.
    pub zero_fraction: f64,
    pub schedules: Vec<ExtensionSchedule>,
    /// Also integrate at half the radial resolution and report the difference.
    pub estimate_defect: bool,
}

impl Default for FEvalConfig {
    fn default() -> Self {
        Self {
            angular: 128,
            radial: 24,
            zero_fraction: 0.2,
            schedules: vec![
                ExtensionSchedule::Harmonic { beta: 1.0 },
                ExtensionSchedule::Spherical { power: 2 },
                ExtensionSchedule::Harmonic { beta: 2.0 },
                ExtensionSchedule::Cone { power: 2 },
                ExtensionSchedule::Spherical { power: 4 },
            ],
            estimate_defect: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopFunctionValue {
    pub value: C64,
    pub schedule: ExtensionSchedule,
    pub angular: usize,
    pub radial: usize,
    /// `min |W|` over the quadrature grid.
    pub zero_margin: f64,
    /// Difference to the same schedule at half the radial resolution.
    pub radial_defect: Option<f64>,
}

/// Closed cover lift of sampled loop values with its Fourier data.
struct CoverData {
    w: Vec<[C64; 2]>,
    coeffs: [Vec<C64>; 2],
    dw: Vec<[C64; 2]>,
    min_norm: f64,
}

fn cover_data(samples: &[V3], tol: &Tolerances) -> Result<CoverData> {
    let lift = quadric::cover_lift(samples, tol)?;
    if !lift.closed {
        return Err(Error::NotNullHomotopic);
    }
    let w = lift.path;
    let comp = |d: usize| w.iter().map(|p| p[d]).collect::<Vec<_>>();
    let (w0, w1) = (comp(0), comp(1));
    let (d0, d1) = (spectral::derivative(&w0), spectral::derivative(&w1));
    let dw = d0.into_iter().zip(d1).map(|(a, b)| [a, b]).collect();
    let min_norm = w.iter().map(quadric::cover_norm).fold(f64::INFINITY, f64::min);
    Ok(CoverData { coeffs: [spectral::forward(&w0), spectral::forward(&w1)], w, dw, min_norm })
}

/// `min_λ∈[0,1] |c + λ(w − c)|`.
fn segment_clearance(c: &[C64; 2], w: &[C64; 2]) -> f64 {
    let d = [w[0] - c[0], w[1] - c[1]];
    let dd = d[0].norm_sqr() + d[1].norm_sqr();
    let lam = if dd > 0.0 {
        (-(c[0].conj() * d[0] + c[1].conj() * d[1]).re / dd).clamp(0.0, 1.0)
    } else {
        0.0
    };
    quadric::cover_norm(&[c[0] + lam * d[0], c[1] + lam * d[1]])
}

fn unit(w: &[C64; 2]) -> [C64; 2] {
    let n = quadric::cover_norm(w);
    [w[0] / n, w[1] / n]
}

fn to_r4(u: &[C64; 2]) -> [f64; 4] {
    [u[0].re, u[0].im, u[1].re, u[1].im]
}

fn from_r4(x: &[f64]) -> [C64; 2] {
    unit(&[C64::new(x[0], x[1]), C64::new(x[2], x[3])])
}

/// Unit anchor maximising `min_θ |u* + u(θ)|` over candidates: the samples,
/// their mean, the least-covered direction of their covariance in `R⁴`, and
/// the vertices of the 24-cell.
fn sphere_anchor(w: &[[C64; 2]]) -> [C64; 2] {
    let stride = (w.len() / 64).max(1);
    let units: Vec<[C64; 2]> = w.iter().step_by(stride).map(unit).collect();
    let mut mean = [0.0; 4];
    let mut cov = nalgebra::Matrix4::<f64>::zeros();
    for u in &units {
        let x = nalgebra::Vector4::from(to_r4(u));
        cov += x * x.transpose();
        for (m, xi) in mean.iter_mut().zip(x.iter()) {
            *m += xi;
        }
    }
    let mut candidates = units.clone();
    if mean.iter().map(|m| m * m).sum::<f64>() > 1e-24 {
        candidates.push(from_r4(&mean));
    }
    let eig = cov.symmetric_eigen();
    let k = eig.eigenvalues.imin();
    let least: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    candidates.push(from_r4(&least));
    candidates.push(from_r4(&least.iter().map(|x| -x).collect::<Vec<_>>()));
    for j in 0..4 {
        for sign in [1.0, -1.0] {
            let mut x = [0.0; 4];
            x[j] = sign;
            candidates.push(from_r4(&x));
        }
    }
    for bits in 0..16u32 {
        let x: Vec<f64> = (0..4).map(|j| if bits >> j & 1 == 1 { -0.5 } else { 0.5 }).collect();
        candidates.push(from_r4(&x));
    }
    let mut best = (f64::NEG_INFINITY, candidates[0]);
    for c in &candidates {
        let clearance = units
            .iter()
            .map(|u| quadric::cover_norm(&[c[0] + u[0], c[1] + u[1]]))
            .fold(f64::INFINITY, f64::min);
        if clearance > best.0 {
            best = (clearance, *c);
        }
    }
    best.1
}

fn cone_anchor(w: &[[C64; 2]]) -> [C64; 2] {
    let stride = (w.len() / 64).max(1);
    let mut best = (f64::NEG_INFINITY, w[0]);
    for c in w.iter().step_by(stride) {
        let clearance = w.iter().step_by(stride).map(|p| segment_clearance(c, p)).fold(f64::INFINITY, f64::min);
        if clearance > best.0 {
            best = (clearance, *c);
        }
    }
    best.1
}

/// `(W, ∂_r W, ∂_θ W)` on the angular grid at radius `r`.
fn extension_ring(data: &CoverData, schedule: ExtensionSchedule, anchor: &[C64; 2], r: f64) -> Vec<[[C64; 2]; 3]> {
    let n = data.w.len();
    match schedule {
        ExtensionSchedule::Harmonic { beta } => {
            // damp[|m|] = r^{β|m|}
            let rb = r.powf(beta);
            let mut damp = vec![1.0; n / 2 + 1];
            for m in 1..damp.len() {
                damp[m] = damp[m - 1] * rb;
            }
            let mut out = vec![[[C64::new(0.0, 0.0); 2]; 3]; n];
            let mut val = vec![C64::new(0.0, 0.0); n];
            let mut dr = vec![C64::new(0.0, 0.0); n];
            let mut dt = vec![C64::new(0.0, 0.0); n];
            for d in 0..2 {
                for (k, c) in data.coeffs[d].iter().enumerate() {
                    let m = spectral::freq(k, n);
                    let am = m.unsigned_abs() as usize;
                    if 2 * am == n {
                        val[k] = C64::new(0.0, 0.0);
                        dr[k] = val[k];
                        dt[k] = val[k];
                        continue;
                    }
                    val[k] = c * damp[am];
                    // ∂_r r^{β|m|} = β|m| r^{β|m|} / r, continued by 0 at r = 0 for |m| > 0
                    dr[k] = if am == 0 || r == 0.0 { C64::new(0.0, 0.0) } else { val[k] * (beta * am as f64 / r) };
                    dt[k] = val[k] * C64::new(0.0, m as f64);
                }
                let (v, vr, vt) = (spectral::inverse(&val), spectral::inverse(&dr), spectral::inverse(&dt));
                for j in 0..n {
                    out[j][0][d] = v[j];
                    out[j][1][d] = vr[j];
                    out[j][2][d] = vt[j];
                }
            }
            out
        }
        ExtensionSchedule::Cone { power } => {
            let p = power as f64;
            let h = r.powf(p);
            let dh = p * r.powf(p - 1.0);
            (0..n)
                .map(|j| {
                    let (w, dw) = (data.w[j], data.dw[j]);
                    let mut o = [[C64::new(0.0, 0.0); 2]; 3];
                    for d in 0..2 {
                        o[0][d] = anchor[d] + h * (w[d] - anchor[d]);
                        o[1][d] = dh * (w[d] - anchor[d]);
                        o[2][d] = h * dw[d];
                    }
                    o
                })
                .collect()
        }
        ExtensionSchedule::Spherical { power } => {
            let p = power as f64;
            let h = r.powf(p);
            let dh = p * r.powf(p - 1.0);
            (0..n)
                .map(|j| {
                    let (w, dw) = (data.w[j], data.dw[j]);
                    let nu = quadric::cover_norm(&w);
                    let u = [w[0] / nu, w[1] / nu];
                    let dnu = (w[0].conj() * dw[0] + w[1].conj() * dw[1]).re / nu;
                    let du = [(dw[0] - dnu * u[0]) / nu, (dw[1] - dnu * u[1]) / nu];
                    let scale = 1.0 - h + h * nu;
                    let mut o = [[C64::new(0.0, 0.0); 2]; 3];
                    for d in 0..2 {
                        let v = (1.0 - h) * anchor[d] + h * u[d];
                        o[0][d] = scale * v;
                        o[1][d] = dh * (nu - 1.0) * v + scale * dh * (u[d] - anchor[d]);
                        o[2][d] = h * dnu * v + scale * h * du[d];
                    }
                    o
                })
                .collect()
        }
    }
}

/// `∫₀¹∫₀^{2π} ω(∂_r ξ, ∂_θ ξ) dθ dr` with `ξ` the pushed-down extension;
/// returns the value and `min |W|`.
/// Rings whose `min |W|` falls below `floor` skip the quadrature.
fn integrate(
    data: &CoverData,
    schedule: ExtensionSchedule,
    anchor: &[C64; 2],
    radial: usize,
    floor: f64,
    exec: ExecMode,
) -> (C64, f64) {
    let (nodes, weights) = spectral::gauss_legendre(radial, 0.0, 1.0);
    let n = data.w.len();
    let rings = exec.map_range(radial, |i| {
        let ring = extension_ring(data, schedule, anchor, nodes[i]);
        let margin = ring.iter().map(|p| quadric::cover_norm(&p[0])).fold(f64::INFINITY, f64::min);
        let mut acc = C64::new(0.0, 0.0);
        if !(margin >= floor) {
            return (acc, margin);
        }
        for [w, wr, wt] in &ring {
            let (z, [zr, zt]) = quadric::cover_push_jet(w, &[*wr, *wt]);
            acc += quadric::omega(&z, &zr, &zt);
        }
        (acc * (TAU / n as f64), margin)
    });
    let mut total = C64::new(0.0, 0.0);
    let mut margin = f64::INFINITY;
    for ((v, m), wgt) in rings.into_iter().zip(&weights) {
        total += v * *wgt;
        margin = margin.min(m);
    }
    (total, margin)
}

fn eval_schedule(data: &CoverData, schedule: ExtensionSchedule, cfg: &FEvalConfig, exec: ExecMode) -> Result<LoopFunctionValue> {
    let anchor = match schedule {
        ExtensionSchedule::Cone { .. } => cone_anchor(&data.w),
        ExtensionSchedule::Spherical { .. } => sphere_anchor(&data.w),
        ExtensionSchedule::Harmonic { .. } => [C64::new(0.0, 0.0); 2],
    };
    let floor = cfg.zero_fraction * data.min_norm;
    let (value, margin) = integrate(data, schedule, &anchor, cfg.radial, floor, exec);
    if !(margin >= floor) {
        return Err(Error::ExtensionHitsZero { margin });
    }
    let radial_defect = cfg
        .estimate_defect
        .then(|| (value - integrate(data, schedule, &anchor, (cfg.radial / 2).max(1), floor, exec).0).norm());
    Ok(LoopFunctionValue {
        value,
        schedule,
        angular: data.w.len(),
        radial: cfg.radial,
        zero_margin: margin,
        radial_defect,
    })
}

fn sample_grid(x: &Loop, cfg: &FEvalConfig) -> usize {
    spectral::pow2_at_least(cfg.angular.max(x.default_grid()))
}

/// `f` on uniformly sampled loop values (one period, on `M'`), trying the
/// configured extension schedules in order.
pub fn f_eval_samples(samples: &[V3], cfg: &FEvalConfig, tol: &Tolerances, exec: ExecMode) -> Result<LoopFunctionValue> {
    let data = cover_data(samples, tol)?;
    let mut best = 0.0f64;
    for &schedule in &cfg.schedules {
        match eval_schedule(&data, schedule, cfg, exec) {
            Ok(v) => return Ok(v),
            Err(Error::ExtensionHitsZero { margin }) => best = best.max(margin),
            Err(e) => return Err(e),
        }
    }
    Err(Error::ExtensionHitsZero { margin: best })
}

/// `f` with one prescribed extension schedule.
pub fn f_eval_with(
    samples: &[V3],
    schedule: ExtensionSchedule,
    cfg: &FEvalConfig,
    tol: &Tolerances,
    exec: ExecMode,
) -> Result<LoopFunctionValue> {
    eval_schedule(&cover_data(samples, tol)?, schedule, cfg, exec)
}

pub fn f_eval(x: &Loop, cfg: &FEvalConfig, tol: &Tolerances, exec: ExecMode) -> Result<LoopFunctionValue> {
    f_eval_samples(&x.samples(sample_grid(x, cfg)), cfg, tol, exec)
}

/// `df_x(v) = ∫₀^{2π} ω(v(θ), x′(θ)) dθ` on uniform samples.
pub fn df_eval_samples(x: &[V3], v: &[V3], tol: &Tolerances) -> Result<C64> {
    if x.len() != v.len() {
        return Err(Error::GridMismatch { left: x.len(), right: v.len() });
    }
    for (z, t) in x.iter().zip(v) {
        let defect = cvec::dot(z, t).norm();
        if defect > tol.manifold.max(1e-12 * cvec::norm(t)) * (1.0 + cvec::norm(t)) {
            return Err(Error::TangencyViolation { defect });
        }
    }
    let n = x.len();
    let comp = |d: usize| spectral::derivative(&x.iter().map(|p| p[d]).collect::<Vec<_>>());
    let dx = [comp(0), comp(1), comp(2)];
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        let xp = [dx[0][j], dx[1][j], dx[2][j]];
        acc += quadric::omega(&x[j], &v[j], &xp);
    }
    Ok(acc * (TAU / n as f64))
}

pub fn df_eval(x: &Loop, v: &Loop, tol: &Tolerances) -> Result<C64> {
    let g = spectral::pow2_at_least(x.default_grid().max(v.default_grid()));
    df_eval_samples(&x.samples(g), &v.samples(g), tol)
}

/// `∫_{S²} ω` over the real unit sphere, by Gauss–Legendre in the polar
/// angle (`resolution` nodes) and the trapezoid rule in azimuth.
pub fn period_k(resolution: usize, outward: bool) -> f64 {
    let (nodes, weights) = spectral::gauss_legendre(resolution.max(1), 0.0, PI);
    let na = 2 * resolution.max(2);
    let mut total = 0.0;
    for (th, wt) in nodes.iter().zip(&weights) {
        let (st, ct) = th.sin_cos();
        let mut ring = 0.0;
        for ph in spectral::angles(na) {
            let (sp, cp) = ph.sin_cos();
            let x = cvec::real([st * cp, st * sp, ct]);
            let x_th = cvec::real([ct * cp, ct * sp, -st]);
            let x_ph = cvec::real([-st * sp, st * cp, 0.0]);
            ring += quadric::omega(&x, &x_th, &x_ph).re;
        }
        total += wt * ring * TAU / na as f64;
    }
    if outward {
        total
    } else {
        -total
    }
}

/// Default polar resolution of [`period_k`].
pub const PERIOD_RESOLUTION: usize = 16;

/// Polar angle profile of the collapse map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollapseProfile {
    Linear,
    /// `3t² − 2t³`, flat at both ends.
    #[default]
    Smooth,
}

impl CollapseProfile {
    pub fn angle(self, t: f64) -> f64 {
        let h = match self {
            CollapseProfile::Linear => t,
            CollapseProfile::Smooth => t * t * (3.0 - 2.0 * t),
        };
        PI * h
    }
}

/// Circles on `S²` through `p = (0,0,1)` tangent to `e₁`: the plane with
/// normal `n = (0, sin φ, cos φ)` cuts a circle of radius `sin φ` centred at
/// `cos φ · n`. At `φ = 0` and `φ = π` the circle degenerates to `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pencil {
    pub phi: f64,
}

impl Pencil {
    pub const BASE: [f64; 3] = [0.0, 0.0, 1.0];
    const E1: [f64; 3] = [1.0, 0.0, 0.0];

    fn parts(&self) -> ([f64; 3], f64, [f64; 3]) {
        let (sp, cp) = self.phi.sin_cos();
        ([0.0, cp * sp, cp * cp], sp, [0.0, cp, -sp])
    }

    pub fn point(&self, s: f64) -> [f64; 3] {
        let (c, r, m) = self.parts();
        let (ss, cs) = s.sin_cos();
        std::array::from_fn(|j| c[j] - r * cs * m[j] + r * ss * Self::E1[j])
    }

    /// Unit tangent direction `sin s · m + cos s · e₁` (defined also where the
    /// circle degenerates).
    pub fn tangent(&self, s: f64) -> [f64; 3] {
        let (_, _, m) = self.parts();
        let (ss, cs) = s.sin_cos();
        std::array::from_fn(|j| ss * m[j] + cs * Self::E1[j])
    }

    /// Orthonormal tangent frame `(a, b)` at `point(s)`, the tangent rotated
    /// by `−s` about the normal; it is `(e₁, e₂)` for every `s` at `φ = 0`.
    pub fn frame(&self, s: f64) -> ([f64; 3], [f64; 3]) {
        let x = self.point(s);
        let t = self.tangent(s);
        let nrm = cvec::rcross(&x, &t);
        let (ss, cs) = s.sin_cos();
        let a: [f64; 3] = std::array::from_fn(|j| cs * t[j] - ss * nrm[j]);
        (a, cvec::rcross(&x, &a))
    }

    pub fn as_loop(&self, modes: usize, sobolev_k: u32) -> Loop {
        let (c, r, m) = self.parts();
        let mut coeffs = vec![cvec::ZERO; 2 * modes + 1];
        coeffs[modes] = cvec::real(c);
        if modes >= 1 {
            for j in 0..3 {
                let cos_part = C64::new(-0.5 * r * m[j], 0.0);
                let sin_part = C64::new(0.0, -0.5 * r * Self::E1[j]);
                coeffs[modes + 1][j] = cos_part + sin_part;
                coeffs[modes - 1][j] = cos_part - sin_part;
            }
        }
        Loop::new(coeffs, sobolev_k).expect("odd coefficient count")
    }
}

/// Parameters of the demonstration curve and its lift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DemoConfig {
    /// Grid points on the sweep through the pencil of circles.
    pub sweep_points: usize,
    /// Grid points on each of the two legs between `p` and `q`.
    pub leg_points: usize,
    pub profile: CollapseProfile,
    /// Loop modes `N` of the curve and of the disc coefficients.
    pub modes: usize,
    /// σ-degree of the lift discs.
    pub m_deg: usize,
    /// Disc size `ε` in `ρ(x + ε(σ(a − b) + (i/2)σ²b))`.
    pub eps_push: f64,
    /// Offset of the base point `q = ρ(p + iβ₀ e₁)` as a fraction of `eps_push`.
    pub leg_offset: f64,
    /// Traverse the sweep from `φ = π` back to `φ = 0`.
    pub reversed: bool,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            sweep_points: 800,
            leg_points: 16,
            profile: CollapseProfile::Linear,
            modes: 32,
            m_deg: 32,
            eps_push: 0.4,
            leg_offset: 0.05,
            reversed: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum DemoPhase {
    /// Offset `β` along `e₁`, disc frame of the sweep start.
    LegIn(f64),
    Sweep(f64),
    /// Offset `β` along `e₁`, disc frame of the sweep end.
    LegOut(f64),
}

/// The closed curve `q → p → (circles of the pencil) → p → q` of loops, with
/// the base loop `q` the constant loop at `ρ(p + iβ₀e₁) ∈ M'`.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoCurve {
    pub config: DemoConfig,
    pub curve: LoopCurve,
    /// Index range of the sweep inside the curve grid.
    pub sweep: std::ops::Range<usize>,
    phases: Vec<DemoPhase>,
}

impl DemoCurve {
    pub fn new(config: &DemoConfig) -> Result<Self> {
        if config.sweep_points < 2 || config.leg_points < 2 || config.modes < 1 {
            return Err(Error::Config("demo grids need at least two points and one mode".into()));
        }
        if !(config.eps_push > 0.0) || !(config.leg_offset > 0.0) {
            return Err(Error::Config("demo push scale and leg offset must be positive".into()));
        }
        let beta0 = config.leg_offset * config.eps_push;
        let leg = |j: usize| beta0 * (1.0 - j as f64 / (config.leg_points - 1) as f64);
        let mut phases: Vec<DemoPhase> = (0..config.leg_points - 1).map(|j| DemoPhase::LegIn(leg(j))).collect();
        let sweep_start = phases.len();
        for j in 0..config.sweep_points {
            let mut t = j as f64 / (config.sweep_points - 1) as f64;
            if config.reversed {
                t = 1.0 - t;
            }
            phases.push(DemoPhase::Sweep(config.profile.angle(t)));
        }
        let sweep = sweep_start..phases.len();
        phases.extend((0..config.leg_points - 1).rev().map(|j| DemoPhase::LegOut(leg(j))));
        let n = phases.len();
        let loops = phases.iter().map(|ph| Self::center_loop(*ph, config.modes)).collect();
        let times = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        Ok(Self { config: config.clone(), curve: LoopCurve::new(times, loops)?, sweep, phases })
    }

    fn center_loop(phase: DemoPhase, modes: usize) -> Loop {
        match phase {
            DemoPhase::Sweep(phi) => Pencil { phi }.as_loop(modes, 1),
            DemoPhase::LegIn(beta) | DemoPhase::LegOut(beta) => Loop::constant(Self::leg_point(beta), modes, 1),
        }
    }

    fn leg_point(beta: f64) -> V3 {
        let w = [C64::new(0.0, beta), C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        quadric::retract(&w, 0.0).expect("leg points stay near p")
    }

    /// The constant base loop `q`.
    pub fn base(&self) -> &Loop {
        &self.curve.loops()[0]
    }

    /// Frame rotation making the disc frame constant at the sweep start.
    fn rotation(&self) -> f64 {
        if self.config.reversed {
            2.0
        } else {
            0.0
        }
    }

    fn frame(&self, phi: f64, s: f64) -> ([f64; 3], [f64; 3]) {
        let pencil = Pencil { phi };
        let (a, b) = pencil.frame(s);
        let (sr, cr) = (self.rotation() * s).sin_cos();
        let a2: [f64; 3] = std::array::from_fn(|j| cr * a[j] + sr * b[j]);
        (a2, cvec::rcross(&pencil.point(s), &a2))
    }

    fn endpoint_angles(&self) -> (f64, f64) {
        let (first, last) = (0.0, PI);
        if self.config.reversed {
            (last, first)
        } else {
            (first, last)
        }
    }

    /// Disc value `ρ(c + ε(σ(a − b) + (i/2)σ²b))` at grid index `i`, where `c`
    /// is the pre-retraction centre.
    pub fn disc_value(&self, i: usize, sigma: C64, s: f64, cut: f64) -> Result<V3> {
        let (start, end) = self.endpoint_angles();
        let (centre, (a, b)) = match self.phases[i] {
            DemoPhase::Sweep(phi) => (cvec::real(Pencil { phi }.point(s)), self.frame(phi, s)),
            DemoPhase::LegIn(beta) => {
                ([C64::new(0.0, beta), C64::new(0.0, 0.0), C64::new(1.0, 0.0)], self.frame(start, s))
            }
            DemoPhase::LegOut(beta) => {
                ([C64::new(0.0, beta), C64::new(0.0, 0.0), C64::new(1.0, 0.0)], self.frame(end, s))
            }
        };
        let e = self.config.eps_push;
        let lin = sigma * e;
        let quad = C64::new(0.0, 0.5) * sigma * sigma * e;
        let w: V3 = std::array::from_fn(|j| centre[j] + lin * (a[j] - b[j]) + quad * b[j]);
        quadric::retract(&w, cut)
    }

    pub fn lift(&self, tol: &Tolerances, exec: ExecMode) -> Result<RegularLift> {
        let lift = continuation::lift_from_field(&self.curve, self.config.m_deg, |i, sg, s| self.disc_value(i, sg, s, tol.cut), exec)?;
        let cfg = LiftConfig { m_deg: self.config.m_deg, ..LiftConfig::default() };
        lift.check(&cfg, tol)?;
        Ok(lift)
    }
}

/// Outcome of continuing `f` around a closed curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonodromyReport {
    pub increment: C64,
    pub start: C64,
    pub end: C64,
    /// `f` evaluated directly at the base loop.
    pub direct_start: C64,
    pub chain: ContinuationChain,
    pub boundary_kappa: f64,
    pub initial_kappa: f64,
    pub fit_residual: f64,
}

fn chain_f<'a>(cfg: &'a FEvalConfig, tol: &Tolerances) -> impl Fn(&[V3]) -> Result<C64> + Sync + 'a {
    let tol = *tol;
    move |samples: &[V3]| Ok(f_eval_samples(samples, cfg, &tol, ExecMode::Sequential)?.value)
}

fn report(
    curve: &LoopCurve,
    lift: &RegularLift,
    fcfg: &FEvalConfig,
    scfg: &SlideConfig,
    tol: &Tolerances,
    exec: ExecMode,
) -> Result<MonodromyReport> {
    let f = chain_f(fcfg, tol);
    let chain = continuation::slide(&f, curve, lift, scfg, tol, exec)?;
    let g = spectral::pow2_at_least(scfg.grid.max(curve.loops()[0].default_grid()));
    let direct_start = f(&curve.loops()[0].samples(g))?;
    Ok(MonodromyReport {
        increment: chain.increment(),
        start: chain.first(),
        end: chain.last(),
        direct_start,
        boundary_kappa: lift.boundary_kappa,
        initial_kappa: lift.initial_kappa,
        fit_residual: lift.fit_residual,
        chain,
    })
}

/// Continues `f` around the demonstration curve.
pub fn demo_increment(
    demo: &DemoCurve,
    fcfg: &FEvalConfig,
    scfg: &SlideConfig,
    tol: &Tolerances,
    exec: ExecMode,
) -> Result<MonodromyReport> {
    let lift = demo.lift(tol, exec)?;
    report(&demo.curve, &lift, fcfg, scfg, tol, exec)
}

/// `f_end − f_start` along a closed curve, with the generic imaginary-push lift.
pub fn monodromy_increment(
    curve: &LoopCurve,
    fcfg: &FEvalConfig,
    lcfg: &LiftConfig,
    scfg: &SlideConfig,
    tol: &Tolerances,
    exec: ExecMode,
) -> Result<MonodromyReport> {
    let first = &curve.loops()[0];
    let last = &curve.loops()[curve.len() - 1];
    let gap = crate::loops::loop_distance(first, last);
    if gap > tol.manifold {
        return Err(Error::Precondition(format!("curve is not closed (gap {gap:e})")));
    }
    let lift = build_regular_lift(curve, lcfg, tol, exec)?;
    report(curve, &lift, fcfg, scfg, tol, exec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cvec::real;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// A small circle in `M'` about a point off `K`.
    fn small_loop(radius: f64, modes: usize) -> Loop {
        let base = [c(1.2, 0.0), c(0.0, 0.663324958071080), c(0.0, 0.0)];
        let mut coeffs = vec![cvec::ZERO; 2 * modes + 1];
        coeffs[modes] = base;
        coeffs[modes + 1] = [c(0.0, 0.0), c(radius, 0.0), c(0.0, 0.0)];
        coeffs[modes - 1] = [c(0.0, 0.0), c(0.0, 0.0), c(radius, 0.0)];
        let x = Loop::new(coeffs, 1).unwrap();
        crate::loops::loop_retract(&x, &Tolerances::default()).unwrap().0
    }

    #[test]
    fn constant_loop_has_zero_value() {
        let tol = Tolerances::default();
        let p = Loop::constant([c(1.2, 0.0), c(0.0, 0.663324958071080), c(0.0, 0.0)], 4, 1);
        let v = f_eval(&p, &FEvalConfig::default(), &tol, ExecMode::Sequential).unwrap();
        assert!(v.value.norm() < 1e-14);
    }

    #[test]
    fn real_loops_are_rejected() {
        let tol = Tolerances::default();
        let p = Loop::constant(real([0.0, 0.0, 1.0]), 2, 1);
        assert!(matches!(
            f_eval(&p, &FEvalConfig::default(), &tol, ExecMode::Sequential),
            Err(Error::CriticalPoint { .. })
        ));
    }

    #[test]
    fn non_contractible_loop_is_rejected() {
        // the image of w(θ) = (e^{iθ/2}, 0) closes only after two turns
        let tol = Tolerances::default();
        let samples: Vec<V3> = spectral::angles(128)
            .into_iter()
            .map(|t| quadric::cover_push_raw(&[C64::from_polar(1.0, t / 2.0), c(0.0, 0.0)]))
            .collect();
        assert!(matches!(
            f_eval_samples(&samples, &FEvalConfig::default(), &tol, ExecMode::Sequential),
            Err(Error::NotNullHomotopic)
        ));
    }

    #[test]
    fn schedules_agree() {
        let tol = Tolerances::default();
        let cfg = FEvalConfig::default();
        let x = small_loop(0.2, 24);
        let samples = x.samples(256);
        let vals: Vec<C64> = cfg
            .schedules
            .iter()
            .map(|s| f_eval_with(&samples, *s, &cfg, &tol, ExecMode::Sequential).unwrap().value)
            .collect();
        for v in &vals {
            assert!((v - vals[0]).norm() < 1e-9, "{vals:?}");
        }
        assert!(vals[0].norm() > 1e-3, "{vals:?}");
    }

    #[test]
    fn differential_is_linear_and_vanishes_on_constants() {
        let tol = Tolerances::default();
        let x = small_loop(0.2, 24);
        let g = 64;
        let xs = x.samples(g);
        let v: Vec<V3> = xs
            .iter()
            .enumerate()
            .map(|(j, z)| quadric::project_tangent(z, &[c(0.1 * j as f64, 1.0), c(0.5, -0.2), c(0.3, 0.7)]))
            .collect();
        let d = df_eval_samples(&xs, &v, &tol).unwrap();
        let iv: Vec<V3> = v.iter().map(|t| cvec::scale(C64::i(), t)).collect();
        let two: Vec<V3> = v.iter().map(|t| cvec::scale_re(2.0, t)).collect();
        assert!((df_eval_samples(&xs, &iv, &tol).unwrap() - C64::i() * d).norm() <= 1e-12 * (1.0 + d.norm()));
        assert!((df_eval_samples(&xs, &two, &tol).unwrap() - 2.0 * d).norm() <= 1e-12 * (1.0 + d.norm()));
        let p = Loop::constant(xs[0], 2, 1).samples(g);
        let vp: Vec<V3> = vec![quadric::project_tangent(&xs[0], &[c(1.0, 0.0), c(0.0, 1.0), c(0.5, 0.0)]); g];
        assert!(df_eval_samples(&p, &vp, &tol).unwrap().norm() < 1e-15);
        let bad: Vec<V3> = vec![xs[0]; g];
        assert!(matches!(df_eval_samples(&xs, &bad, &tol), Err(Error::TangencyViolation { .. })));
    }

    #[test]
    fn period_examples() {
        assert!((period_k(PERIOD_RESOLUTION, true) - 4.0 * PI).abs() < 1e-8);
        assert!((period_k(PERIOD_RESOLUTION, false) + 4.0 * PI).abs() < 1e-8);
        for n in 2..8 {
            assert!(period_k(n, true).abs() > 1.0);
        }
    }

    #[test]
    fn pencil_geometry() {
        for phi in [0.0, 0.4, 1.3, 2.9, PI] {
            let p = Pencil { phi };
            let l = p.as_loop(4, 1);
            for s in spectral::angles(16) {
                let x = p.point(s);
                assert!((cvec::rnorm(&x) - 1.0).abs() < 1e-14);
                assert!(cvec::dist(&l.eval(s), &real(x)) < 1e-14);
                let (a, b) = p.frame(s);
                assert!(cvec::rdot(&a, &x).abs() < 1e-14 && cvec::rdot(&b, &x).abs() < 1e-14);
                assert!((cvec::rnorm(&a) - 1.0).abs() < 1e-14 && cvec::rdot(&a, &b).abs() < 1e-14);
            }
            assert!(cvec::rnorm(&cvec::rcross(&p.point(0.0), &[0.0, 0.0, 1.0])) < 1e-15);
        }
        let (a, b) = Pencil { phi: 0.0 }.frame(1.1);
        assert!((a[0] - 1.0).abs() < 1e-15 && (b[1] - 1.0).abs() < 1e-15);
        let (a, _) = Pencil { phi: PI }.frame(0.7);
        assert!((a[0] - (1.4f64).cos()).abs() < 1e-14);
    }

    #[test]
    fn differential_matches_finite_differences() {
        let tol = Tolerances::default();
        let cfg = FEvalConfig::default();
        let xs = small_loop(0.2, 24).samples(256);
        let v: Vec<V3> = spectral::angles(256)
            .iter()
            .zip(&xs)
            .map(|(s, z)| quadric::project_tangent(z, &[c(s.cos(), 0.3), c(0.2, s.sin()), c((2.0 * s).cos(), 0.0)]))
            .collect();
        let push = |h: f64| -> Vec<V3> {
            xs.iter().zip(&v).map(|(z, t)| quadric::retract(&cvec::add(z, &cvec::scale_re(h, t)), tol.cut).unwrap()).collect()
        };
        let h = 1e-4;
        let f = |h: f64| f_eval_samples(&push(h), &cfg, &tol, ExecMode::Sequential).unwrap().value;
        let fd = (f(h) - f(-h)) / (2.0 * h);
        let d = df_eval_samples(&xs, &v, &tol).unwrap();
        assert!((fd - d).norm() < 1e-6 * (1.0 + d.norm()), "{fd} vs {d}");
    }
}
