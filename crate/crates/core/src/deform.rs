//! Fiber charts along the kernel of `∂u` and boundary pushing of a single disc.
//!
//! For `z ∈ M'` the complex line `E_z = {v ∈ T_zM : ∂u(v) = 0}` is spanned by
//! [`quadric::kernel_section`]. The chart map `φ(z, τ)` sends `τ ∈ C` to the
//! point `ζ ∈ M` on the holomorphic level set `q(ζ, z) = 0` of the second
//! order Taylor polynomial of `v = u∘ρ` whose `E_z`-component is `τ`. On such a
//! fiber `u∘φ` has a nondegenerate minimum at `τ = 0`.
//!
//! [`push_disc`] deforms a disc `κ` with boundary in `M(a, b)` so that the
//! boundary level of `u` rises by `α` while every slice stays holomorphic.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::cvec;
use crate::disc::AnalyticDisc;
use crate::quadric::{self, QuadricPoint, RegionSpec};
use crate::spectral::{self, TrigInterpolant};
use crate::{Error, ExecMode, Result, Tolerances, C64, V3};

const NEWTON_MAX_ITER: usize = 40;
const CHART_RESIDUAL: f64 = 1e-10;

/// Chart radius `r_V(z)` in units of `|τ|`.
pub fn chart_radius(z: &V3) -> f64 {
    0.5 * quadric::kappa(z).min(1.0) / (1.0 + quadric::exhaustion(z)).sqrt()
}

/// A point of the fiber chart at `base`, with coordinate `tau` along
/// [`quadric::e_basis`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberChart {
    pub base: QuadricPoint,
    pub tau: C64,
    pub radius: f64,
}

impl FiberChart {
    pub fn new(base: QuadricPoint, tau: C64, tol: &Tolerances) -> Result<Self> {
        let k = quadric::kappa(base.z());
        if k <= tol.k_set {
            return Err(Error::CriticalPoint { kappa: k });
        }
        let radius = chart_radius(base.z());
        if tau.norm() >= radius {
            return Err(Error::OutOfChart { tau: tau.norm(), radius });
        }
        Ok(Self { base, tau, radius })
    }
}

/// Holomorphic gradient `∂v/∂zᵢ = z̄ᵢ − u zᵢ` of `v = u∘ρ` at `z ∈ M`.
fn gradient(z: &V3) -> V3 {
    let u = quadric::exhaustion(z);
    let zb = cvec::conj(z);
    cvec::sub(&zb, &cvec::scale_re(u, z))
}

/// Holomorphic Hessian `∂²v/∂zᵢ∂zⱼ = −(z̄ᵢzⱼ + zᵢz̄ⱼ) − u δᵢⱼ + 3u zᵢzⱼ` at `z ∈ M`.
fn hessian(z: &V3) -> [[C64; 3]; 3] {
    let u = quadric::exhaustion(z);
    let mut h = [[C64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            h[i][j] = -(z[i].conj() * z[j] + z[i] * z[j].conj()) + 3.0 * u * z[i] * z[j];
            if i == j {
                h[i][j] -= u;
            }
        }
    }
    h
}

fn mat_vec(h: &[[C64; 3]; 3], d: &V3) -> V3 {
    let mut out = cvec::ZERO;
    for i in 0..3 {
        out[i] = h[i][0] * d[0] + h[i][1] * d[1] + h[i][2] * d[2];
    }
    out
}

/// Level-set polynomial `q(ζ, z) = 2∇v·(ζ−z) + (ζ−z)ᵀ H (ζ−z)`.
pub fn level_polynomial(zeta: &V3, z: &V3) -> C64 {
    let d = cvec::sub(zeta, z);
    let hd = mat_vec(&hessian(z), &d);
    2.0 * cvec::dot(&gradient(z), &d) + cvec::dot(&d, &hd)
}

/// Residuals of the three chart equations at `ζ`.
fn chart_equations(zeta: &V3, z: &V3, grad: &V3, hess: &[[C64; 3]; 3], e: &V3, tau: C64) -> [C64; 3] {
    let d = cvec::sub(zeta, z);
    let hd = mat_vec(hess, &d);
    [
        quadric::quadric_form(zeta) - 1.0,
        2.0 * cvec::dot(grad, &d) + cvec::dot(&d, &hd),
        cvec::hdot(e, &d) - tau,
    ]
}

fn max_norm(r: &[C64; 3]) -> f64 {
    r.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// `φ(z, τ·e)` for a unit vector `e ∈ E_z`, by Newton iteration from `z + τe`.
pub fn fiber_point(z: &V3, e: &V3, tau: C64) -> Result<V3> {
    if tau == C64::new(0.0, 0.0) {
        return Ok(*z);
    }
    let grad = gradient(z);
    let hess = hessian(z);
    let mut zeta = cvec::add(z, &cvec::scale(tau, e));
    let mut res = chart_equations(&zeta, z, &grad, &hess, e, tau);
    let mut r = max_norm(&res);
    for _ in 0..NEWTON_MAX_ITER {
        if r <= 1e-15 {
            break;
        }
        let d = cvec::sub(&zeta, z);
        let row2 = cvec::add(&cvec::scale_re(2.0, &grad), &cvec::scale_re(2.0, &mat_vec(&hess, &d)));
        let jac = Matrix3::new(
            2.0 * zeta[0],
            2.0 * zeta[1],
            2.0 * zeta[2],
            row2[0],
            row2[1],
            row2[2],
            e[0].conj(),
            e[1].conj(),
            e[2].conj(),
        );
        let rhs = Vector3::new(res[0], res[1], res[2]);
        let step = jac.lu().solve(&rhs).ok_or(Error::NewtonDivergence { residual: r })?;
        let next = [zeta[0] - step[0], zeta[1] - step[1], zeta[2] - step[2]];
        let next_res = chart_equations(&next, z, &grad, &hess, e, tau);
        let nr = max_norm(&next_res);
        if !nr.is_finite() || nr > 4.0 * r.max(1e-14) {
            return Err(Error::NewtonDivergence { residual: r });
        }
        let small_step = step.iter().map(|c| c.norm()).fold(0.0, f64::max) <= 1e-16 * (1.0 + cvec::norm(&next));
        zeta = next;
        res = next_res;
        r = nr;
        if small_step {
            break;
        }
    }
    if !(r <= CHART_RESIDUAL) {
        return Err(Error::NewtonDivergence { residual: r });
    }
    Ok(zeta)
}

/// `φ` on a chart: the point of the level set `q(·, z) = 0` in `M` whose
/// `E_z`-component is `τ·e_basis(z)`.
pub fn phi_map(chart: &FiberChart, tol: &Tolerances) -> Result<QuadricPoint> {
    let z = chart.base.z();
    if chart.tau.norm() >= chart.radius {
        return Err(Error::OutOfChart { tau: chart.tau.norm(), radius: chart.radius });
    }
    let e = quadric::e_basis(&chart.base, tol)?;
    let zeta = fiber_point(z, &e.v, chart.tau)?;
    QuadricPoint::new(zeta, tol)
}

/// Residuals `(|Σζ²−1|, |q(ζ,z)|, |⟨ζ−z, e⟩ − τ|)` of a chart image.
pub fn chart_residuals(chart: &FiberChart, image: &QuadricPoint, tol: &Tolerances) -> Result<[f64; 3]> {
    let z = chart.base.z();
    let e = quadric::e_basis(&chart.base, tol)?;
    let r = chart_equations(image.z(), z, &gradient(z), &hessian(z), &e.v, chart.tau);
    Ok([r[0].norm(), r[1].norm(), r[2].norm()])
}

/// Profile of `u∘φ` along the real line `τ = t·e^{iβ}` of a fiber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberScan {
    pub beta: f64,
    pub radius: f64,
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    /// The sample at `t = 0` is the strict minimum.
    pub min_at_zero: bool,
    /// `u` strictly decreases towards 0 on `t < 0`.
    pub monotone_left: bool,
    /// `u` strictly increases away from 0 on `t > 0`.
    pub monotone_right: bool,
}

impl FiberScan {
    pub fn passes(&self) -> bool {
        self.min_at_zero && self.monotone_left && self.monotone_right
    }
}

/// Samples `u∘φ` at `t = r_V·j/steps`, `|j| < steps`.
pub fn fiber_line_scan(z: &QuadricPoint, beta: f64, steps: usize, tol: &Tolerances) -> Result<FiberScan> {
    if steps < 2 {
        return Err(Error::Precondition("fiber scan needs at least 2 steps per side".into()));
    }
    let e = quadric::e_basis(z, tol)?;
    let radius = chart_radius(z.z());
    let dir = C64::from_polar(1.0, beta);
    let n = steps as i64;
    let mut t = Vec::with_capacity(2 * steps - 1);
    let mut u = Vec::with_capacity(2 * steps - 1);
    for j in -(n - 1)..n {
        let tj = radius * j as f64 / n as f64;
        let zeta = fiber_point(z.z(), &e.v, dir * tj)?;
        t.push(tj);
        u.push(quadric::exhaustion(&zeta));
    }
    let mid = steps - 1;
    let min_at_zero = u.iter().enumerate().all(|(k, &v)| k == mid || v > u[mid]);
    let monotone_left = u[..=mid].windows(2).all(|w| w[0] > w[1]);
    let monotone_right = u[mid..].windows(2).all(|w| w[1] > w[0]);
    Ok(FiberScan { beta, radius, t, u, min_at_zero, monotone_left, monotone_right })
}

/// Boundary rise `α` of a push problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaSpec {
    Absolute { value: f64 },
    /// A multiple of the computed `δ₀`.
    Fraction { of_delta0: f64 },
    /// Values on a uniform grid of `∂Δ`, interpolated trigonometrically.
    Samples { values: Vec<f64> },
}

/// Tolerance `η` of a push problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EtaSpec {
    Absolute { value: f64 },
    Fraction { of_delta0: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PushProblem {
    /// The disc `κ`, lying in `M` with boundary in `M(a, b)`.
    pub disc: AnalyticDisc,
    pub alpha: AlphaSpec,
    pub eta: EtaSpec,
    /// Substitution exponent `J` in `σ = (ts)^J`.
    pub j_exponent: usize,
    pub region: RegionSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PushConfig {
    /// Boundary samples of `κ` used for `δ₀`.
    pub boundary_samples: usize,
    /// Radial root-finds per level curve.
    pub level_angles: usize,
    /// Largest `σ`-degree of the Fejér approximation.
    pub max_degree: usize,
    /// Steps of the verification grid in `t`.
    pub t_steps: usize,
    pub theodorsen_max_iter: usize,
    pub theodorsen_tol: f64,
}

impl Default for PushConfig {
    fn default() -> Self {
        Self {
            boundary_samples: 64,
            level_angles: 64,
            max_degree: 128,
            t_steps: 16,
            theodorsen_max_iter: 200,
            theodorsen_tol: 1e-13,
        }
    }
}

/// Per-check margins of [`push_disc`]. Positive margins pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushReport {
    pub delta0: f64,
    pub eta: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Fejér degrees in `s` and `σ`.
    pub s_degree: usize,
    pub sigma_degree: usize,
    /// `max |u∘ψ − u∘ρ∘χ|` on the offset check grid.
    pub fejer_defect: f64,
    /// Relative energy of negative `σ`-frequencies of `ψ`.
    pub antiholomorphic_energy: f64,
    pub theodorsen_iterations: usize,
    /// Largest jump of the section `g` between neighboring samples.
    pub section_jump: f64,
    /// `max |λ(0,s) − κ(s)|`.
    pub check_i: f64,
    /// `max_t |λ(t,0) − κ(0)|`.
    pub check_ii: f64,
    pub margin_iii: f64,
    pub margin_iv: f64,
    /// Added coefficients sit only on exponents `i + jJ`, `j ≥ 1`.
    pub support_ok: bool,
    pub min_cut_margin: f64,
    pub boundary_grid: usize,
    pub t_grid: Vec<f64>,
}

impl PushReport {
    pub fn passes(&self) -> bool {
        self.check_i <= 1e-10 && self.check_ii <= 1e-10 && self.margin_iii > 0.0 && self.margin_iv > 0.0 && self.support_ok
    }
}

/// A monomial `c·s^exponent·t^t_power` added to `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PushTerm {
    pub exponent: usize,
    pub t_power: usize,
    pub coeff: V3,
}

/// The deformation `λ(t, s) = ρ(κ(s) + Σ c s^e t^p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushedFamily {
    pub kappa: AnalyticDisc,
    pub terms: Vec<PushTerm>,
    pub report: PushReport,
}

impl PushedFamily {
    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.exponent).max().unwrap_or(0).max(self.kappa.degree())
    }

    /// The polynomial disc `κ + Σ c t^p s^e` before retraction.
    pub fn pre_disc(&self, t: f64) -> Result<AnalyticDisc> {
        let deg = self.degree();
        let mut coeffs = vec![cvec::ZERO; deg + 1];
        coeffs[..=self.kappa.degree()].copy_from_slice(self.kappa.coeffs());
        for term in &self.terms {
            let w = t.powi(term.t_power as i32);
            coeffs[term.exponent] = cvec::add(&coeffs[term.exponent], &cvec::scale_re(w, &term.coeff));
        }
        AnalyticDisc::new(coeffs, spectral::pow2_at_least(4 * deg.max(1)))
    }

    pub fn eval(&self, t: f64, s: C64, tol: &Tolerances) -> Result<V3> {
        quadric::retract(&self.pre_disc(t)?.eval(s), tol.cut)
    }
}

/// Boundary data of `κ` at one sample.
struct BoundaryPoint {
    z: V3,
    g: V3,
    radius: f64,
    alpha: f64,
}

fn boundary_point(disc: &AnalyticDisc, angle: f64, alpha: f64, tol: &Tolerances) -> Result<BoundaryPoint> {
    let z = disc.eval(C64::from_polar(1.0, angle));
    let g = quadric::kernel_section(&z, tol)?;
    Ok(BoundaryPoint { z, g, radius: chart_radius(&z), alpha })
}

fn rise(p: &BoundaryPoint, tau: C64) -> Result<f64> {
    Ok(quadric::exhaustion(&fiber_point(&p.z, &p.g, tau)?) - quadric::exhaustion(&p.z))
}

/// `δ₀`: half the smallest rise of `u` at `0.9·r_V` over the boundary samples.
pub fn delta0(disc: &AnalyticDisc, cfg: &PushConfig, tol: &Tolerances, exec: ExecMode) -> Result<f64> {
    let n = cfg.boundary_samples;
    let m = cfg.level_angles;
    let rises = exec.try_map_range(n, |k| {
        let p = boundary_point(disc, std::f64::consts::TAU * k as f64 / n as f64, 0.0, tol)?;
        let mut lo = f64::INFINITY;
        for l in 0..m {
            let th = std::f64::consts::TAU * l as f64 / m as f64;
            lo = lo.min(rise(&p, C64::from_polar(0.9 * p.radius, th))?);
        }
        Ok::<_, Error>(lo)
    })?;
    let lo = rises.into_iter().fold(f64::INFINITY, f64::min);
    if !(lo > 0.0) {
        return Err(Error::Precondition(format!("u does not rise across the fiber charts (min rise {lo:e})")));
    }
    Ok(0.5 * lo)
}

/// Radius of the level curve `u∘φ = u(z) + α` in direction `θ`.
fn level_radius(p: &BoundaryPoint, theta: f64, index: usize) -> Result<f64> {
    let dir = C64::from_polar(1.0, theta);
    let h = |r: f64| rise(p, dir * r).map(|v| v - p.alpha);
    let (mut a, mut b) = (0.0, 0.9 * p.radius);
    let (mut fa, mut fb) = (-p.alpha, h(b)?);
    if !(fb > 0.0) {
        return Err(Error::LevelCurveNotFound { index });
    }
    // Illinois regula falsi.
    let mut side = 0i8;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = h(c)?;
        if fc == 0.0 || (b - a).abs() <= 1e-15 * p.radius {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if fc.abs() <= 1e-16 {
            return Ok(c);
        }
    }
    Ok(0.5 * (a + b))
}

/// Boundary values `f(e^{iφₗ})` of the Riemann map of the inside of a
/// star-shaped curve `r = R(θ)`, normalized `f(0) = 0`, `f′(0) > 0`.
fn theodorsen(log_r: &[f64], n_phi: usize, phi_offset: f64, cfg: &PushConfig) -> Result<(Vec<C64>, usize)> {
    let interp = TrigInterpolant::new(&log_r.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
    let at = |theta: f64| interp.eval(theta).re;
    let phis: Vec<f64> = (0..n_phi).map(|l| std::f64::consts::TAU * (l as f64 + phi_offset) / n_phi as f64).collect();
    let mut theta = phis.clone();
    let mut last = f64::INFINITY;
    let mut iters = 0;
    loop {
        iters += 1;
        let lr: Vec<f64> = theta.iter().map(|&th| at(th)).collect();
        let conj = spectral::conjugate(&lr);
        let next: Vec<f64> = phis.iter().zip(&conj).map(|(p, c)| p + c).collect();
        let update = next.iter().zip(&theta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        theta = next;
        if update <= cfg.theodorsen_tol {
            break;
        }
        if iters >= cfg.theodorsen_max_iter || (iters > 3 && update > 0.9 * last) || !update.is_finite() {
            return Err(Error::ConformalStall { update });
        }
        last = update;
    }
    Ok((theta.iter().map(|&th| C64::from_polar(at(th).exp(), th)).collect(), iters))
}

/// `ψ(s, e^{iφₗ})` for one boundary sample.
fn psi_row(
    p: &BoundaryPoint,
    index: usize,
    n_phi: usize,
    phi_offset: f64,
    cfg: &PushConfig,
) -> Result<(Vec<V3>, usize)> {
    let m = cfg.level_angles;
    let log_r = (0..m)
        .map(|l| level_radius(p, std::f64::consts::TAU * l as f64 / m as f64, index).map(f64::ln))
        .collect::<Result<Vec<_>>>()?;
    let (boundary, iters) = theodorsen(&log_r, n_phi, phi_offset, cfg)?;
    let row = boundary.iter().map(|&w| fiber_point(&p.z, &p.g, w)).collect::<Result<Vec<_>>>()?;
    Ok((row, iters))
}

fn alpha_fn(spec: &AlphaSpec, delta0: f64) -> Box<dyn Fn(f64) -> f64 + Sync> {
    match spec {
        AlphaSpec::Absolute { value } => {
            let v = *value;
            Box::new(move |_| v)
        }
        AlphaSpec::Fraction { of_delta0 } => {
            let v = of_delta0 * delta0;
            Box::new(move |_| v)
        }
        AlphaSpec::Samples { values } => {
            let interp = TrigInterpolant::new(&values.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
            Box::new(move |angle| interp.eval(angle).re)
        }
    }
}

/// Fejér-weighted coefficients `wᵢⱼ aᵢⱼ`, `|i| ≤ I`, `1 ≤ j ≤ D`, of samples
/// on an `n_s × n_σ` torus grid, and the relative negative-`j` energy.
fn fejer_coefficients(grid: &[Vec<V3>], s_deg: usize, sigma_deg: usize) -> (Vec<(i64, usize, V3)>, f64) {
    let n_s = grid.len();
    let n_sig = grid[0].len();
    let mut coeffs = vec![vec![cvec::ZERO; n_sig]; n_s];
    for d in 0..3 {
        let rows: Vec<Vec<C64>> = grid.iter().map(|row| spectral::forward(&row.iter().map(|v| v[d]).collect::<Vec<_>>())).collect();
        for l in 0..n_sig {
            let col = spectral::forward(&rows.iter().map(|r| r[l]).collect::<Vec<_>>());
            for k in 0..n_s {
                coeffs[k][l][d] = col[k];
            }
        }
    }
    let mut neg = 0.0;
    let mut total = 0.0;
    for row in &coeffs {
        for (l, c) in row.iter().enumerate() {
            let e = cvec::norm_sqr(c);
            total += e;
            if spectral::freq(l, n_sig) < 0 {
                neg += e;
            }
        }
    }
    let mut out = Vec::new();
    for i in -(s_deg as i64)..=(s_deg as i64) {
        let wi = 1.0 - i.unsigned_abs() as f64 / (s_deg as f64 + 1.0);
        for j in 1..=sigma_deg {
            let wj = 1.0 - j as f64 / (sigma_deg as f64 + 1.0);
            let c = coeffs[spectral::bin(i, n_s)][spectral::bin(j as i64, n_sig)];
            out.push((i, j, cvec::scale_re(wi * wj, &c)));
        }
    }
    (out, (neg / total.max(f64::MIN_POSITIVE)).sqrt())
}

/// `χ − κ` on the torus grid shifted by half a cell in both angles.
fn chi_offset_grid(terms: &[(i64, usize, V3)], n_s: usize, n_sig: usize) -> Vec<Vec<V3>> {
    let mut out = vec![vec![cvec::ZERO; n_sig]; n_s];
    for d in 0..3 {
        let mut c = vec![vec![C64::new(0.0, 0.0); n_sig]; n_s];
        for &(i, j, coeff) in terms {
            let shift = std::f64::consts::PI * (i as f64 / n_s as f64 + j as f64 / n_sig as f64);
            c[spectral::bin(i, n_s)][spectral::bin(j as i64, n_sig)] += coeff[d] * C64::from_polar(1.0, shift);
        }
        let rows: Vec<Vec<C64>> = c.iter().map(|r| spectral::inverse(r)).collect();
        for l in 0..n_sig {
            let col = spectral::inverse(&rows.iter().map(|r| r[l]).collect::<Vec<_>>());
            for k in 0..n_s {
                out[k][l][d] = col[k];
            }
        }
    }
    out
}

/// Boundary pushing of a single disc: returns `λ(t, ·)` with
/// `λ(0, ·) = κ`, `λ(t, 0) = κ(0)` and boundary rise `u∘λ(1, ·) − u∘κ ≈ α`.
pub fn push_disc(problem: &PushProblem, cfg: &PushConfig, tol: &Tolerances, exec: ExecMode) -> Result<PushedFamily> {
    problem.region.validate()?;
    let disc = &problem.disc;
    let big_j = problem.j_exponent;
    if big_j < 2 {
        return Err(Error::Precondition("substitution exponent J must be at least 2".into()));
    }
    let grid = disc.boundary_samples();
    for z in &grid {
        if quadric::quadric_defect(z) > tol.manifold {
            return Err(Error::Precondition(format!("disc leaves M (defect {:e})", quadric::quadric_defect(z))));
        }
        let c = quadric::classify(&QuadricPoint::new(*z, tol)?, &problem.region, tol);
        if !c.open_shell || c.in_k {
            return Err(Error::Precondition(format!("disc boundary leaves M(a,b) ∖ K (u = {}, κ = {:e})", c.u, c.kappa)));
        }
    }
    let d0 = delta0(disc, cfg, tol, exec)?;
    let eta = match problem.eta {
        EtaSpec::Absolute { value } => value,
        EtaSpec::Fraction { of_delta0 } => of_delta0 * d0,
    };
    if !(eta > 0.0) {
        return Err(Error::Precondition(format!("η must be positive, got {eta}")));
    }
    if let AlphaSpec::Samples { values } = &problem.alpha {
        if values.is_empty() {
            return Err(Error::Precondition("α needs at least one sample".into()));
        }
    }
    let alpha = alpha_fn(&problem.alpha, d0);
    let check_angles = spectral::angles(grid.len());
    let (mut alpha_min, mut alpha_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &a in &check_angles {
        let v = alpha(a);
        alpha_min = alpha_min.min(v);
        alpha_max = alpha_max.max(v);
    }
    if !(alpha_min > 0.0 && alpha_max <= d0) {
        return Err(Error::Precondition(format!("α must lie in (0, δ₀ = {d0:e}], got [{alpha_min:e}, {alpha_max:e}]")));
    }

    // ψ on a torus grid with s-offset `so` and φ-offset `po`.
    let psi_grid = |n_s: usize, n_sig: usize, so: f64, po: f64| -> Result<(Vec<BoundaryPoint>, Vec<Vec<V3>>, usize)> {
        let rows = exec.try_map_range(n_s, |k| {
            let angle = std::f64::consts::TAU * (k as f64 + so) / n_s as f64;
            let p = boundary_point(disc, angle, alpha(angle), tol)?;
            let (row, iters) = psi_row(&p, k, n_sig, po, cfg)?;
            Ok::<_, Error>((p, row, iters))
        })?;
        let mut pts = Vec::with_capacity(n_s);
        let mut vals = Vec::with_capacity(n_s);
        let mut iters = 0;
        for (p, row, it) in rows {
            pts.push(p);
            vals.push(row);
            iters = iters.max(it);
        }
        Ok((pts, vals, iters))
    };

    let mut s_deg = 4usize.min(big_j - 1);
    let mut sigma_deg = 8usize;
    let (terms, fejer_defect, antiholomorphic_energy, theodorsen_iterations, section_jump) = loop {
        let n_s = (4 * s_deg).max(8).next_power_of_two();
        let n_sig = (4 * sigma_deg).next_power_of_two();
        let (pts, vals, iters) = psi_grid(n_s, n_sig, 0.0, 0.0)?;
        let (terms, anti) = fejer_coefficients(&vals, s_deg, sigma_deg);
        let (cpts, cvals, citers) = psi_grid(n_s, n_sig, 0.5, 0.5)?;
        let added = chi_offset_grid(&terms, n_s, n_sig);
        let mut defect: f64 = 0.0;
        for ((p, row), add) in cpts.iter().zip(&cvals).zip(&added) {
            for (psi, a) in row.iter().zip(add) {
                let approx = quadric::retract(&cvec::add(&p.z, a), tol.cut)?;
                defect = defect.max((quadric::exhaustion(&approx) - quadric::exhaustion(psi)).abs());
            }
        }
        if defect < 0.5 * eta {
            let jump = pts
                .iter()
                .zip(pts.iter().cycle().skip(1))
                .map(|(a, b)| cvec::dist(&a.g, &b.g))
                .fold(0.0, f64::max);
            break (terms, defect, anti, iters.max(citers), jump);
        }
        let next_s = (2 * s_deg).min(big_j - 1);
        let next_sigma = (2 * sigma_deg).min(cfg.max_degree);
        if next_s == s_deg && next_sigma == sigma_deg {
            return Err(Error::FejerBudget { max_degree: cfg.max_degree.max(big_j - 1), defect, eta });
        }
        s_deg = next_s;
        sigma_deg = next_sigma;
    };

    let push_terms: Vec<PushTerm> = terms
        .iter()
        .map(|&(i, j, coeff)| PushTerm { exponent: (i + (j * big_j) as i64) as usize, t_power: j * big_j, coeff })
        .collect();
    let support_ok = terms.iter().all(|&(i, j, _)| j >= 1 && i + ((j * big_j) as i64) >= 1);
    let mut family = PushedFamily {
        kappa: disc.clone(),
        terms: push_terms,
        report: PushReport {
            delta0: d0,
            eta,
            alpha_min,
            alpha_max,
            s_degree: s_deg,
            sigma_degree: sigma_deg,
            fejer_defect,
            antiholomorphic_energy,
            theodorsen_iterations,
            section_jump,
            check_i: 0.0,
            check_ii: 0.0,
            margin_iii: f64::INFINITY,
            margin_iv: f64::INFINITY,
            support_ok,
            min_cut_margin: f64::INFINITY,
            boundary_grid: 0,
            t_grid: (0..=cfg.t_steps).map(|k| k as f64 / cfg.t_steps as f64).collect(),
        },
    };
    verify_family(&mut family, &*alpha, tol, exec)?;
    Ok(family)
}

/// Fills the check fields of the report on the full verification grid.
fn verify_family(family: &mut PushedFamily, alpha: &(dyn Fn(f64) -> f64 + Sync), tol: &Tolerances, exec: ExecMode) -> Result<()> {
    let kappa0 = family.kappa.center();
    let probe = family.pre_disc(1.0)?;
    let n = probe.grid();
    let angles = spectral::angles(n);
    let base = AnalyticDisc::new(family.kappa.coeffs().to_vec(), n)?.boundary_samples();
    let base_u: Vec<f64> = base.iter().map(quadric::exhaustion).collect();
    let alphas: Vec<f64> = angles.iter().map(|&a| alpha(a)).collect();
    let eta = family.report.eta;
    let times = family.report.t_grid.clone();
    let rows = exec.try_map_range(times.len(), |ti| {
        let t = times[ti];
        let pre = family.pre_disc(t)?;
        let mut cut = f64::INFINITY;
        let mut lam = Vec::with_capacity(n);
        for w in pre.boundary_samples() {
            cut = cut.min(quadric::cut_margin(&w));
            lam.push(quadric::retract(&w, tol.cut)?);
        }
        let center = quadric::retract(&pre.eval(C64::new(0.0, 0.0)), tol.cut)?;
        let mut margin_iv = f64::INFINITY;
        let mut margin_iii = f64::INFINITY;
        for k in 0..n {
            let d = quadric::exhaustion(&lam[k]) - base_u[k];
            margin_iv = margin_iv.min((d + eta).min(alphas[k] + eta - d));
            margin_iii = margin_iii.min((d - (alphas[k] - eta)).min(alphas[k] + eta - d));
        }
        let check_i = lam.iter().zip(&base).map(|(a, b)| cvec::dist(a, b)).fold(0.0, f64::max);
        Ok::<_, Error>((cvec::dist(&center, &kappa0), cut, margin_iv, margin_iii, check_i))
    })?;
    let r = &mut family.report;
    r.boundary_grid = n;
    r.check_i = rows[0].4;
    r.margin_iii = rows[rows.len() - 1].3;
    for row in &rows {
        r.check_ii = r.check_ii.max(row.0);
        r.min_cut_margin = r.min_cut_margin.min(row.1);
        r.margin_iv = r.margin_iv.min(row.2);
    }
    Ok(())
}

/// An affine disc `σ ↦ p + σ·n` with `n` null and `p·n = 0`, which lies in `M`.
pub fn affine_disc(p: &V3, n: &V3, tol: &Tolerances) -> Result<AnalyticDisc> {
    if quadric::quadric_defect(p) > tol.manifold || cvec::dot(n, n).norm() > tol.manifold || cvec::dot(p, n).norm() > tol.manifold {
        return Err(Error::Precondition("affine disc needs p ∈ M, n·n = 0 and p·n = 0".into()));
    }
    AnalyticDisc::new(vec![*p, *n], 8)
}

/// A null vector `n` with `p·n = 0` and `|n| = scale`, rotated by `phase`
/// inside the two-dimensional space of such vectors.
pub fn null_direction(p: &V3, phase: f64, scale: f64) -> Result<V3> {
    // T_pM ∩ {n·n = 0}: two complex lines; take a basis (v, w) of T_pM with
    // v·v = w·w = 1, v·w = 0 so that v ± i w are null.
    let seeds = [cvec::real([1.0, 0.0, 0.0]), cvec::real([0.0, 1.0, 0.0]), cvec::real([0.0, 0.0, 1.0])];
    let mut basis: Vec<V3> = Vec::new();
    for s in seeds {
        let mut v = quadric::project_tangent(p, &s);
        for b in &basis {
            v = cvec::sub(&v, &cvec::scale(cvec::dot(b, &v), b));
        }
        let q = cvec::dot(&v, &v);
        if q.norm() > 1e-6 {
            basis.push(cvec::scale(q.sqrt().inv(), &v));
        }
        if basis.len() == 2 {
            break;
        }
    }
    if basis.len() < 2 {
        return Err(Error::Precondition("no null direction found".into()));
    }
    let n = cvec::add(&basis[0], &cvec::scale(C64::new(0.0, 1.0), &basis[1]));
    let n = cvec::scale(C64::from_polar(scale / cvec::norm(&n), phase), &n);
    Ok(n)
}
