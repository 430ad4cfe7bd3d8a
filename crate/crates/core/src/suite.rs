//! Seeded generators of test objects and the invariant checks run by the
//! `verify` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::continuation::{self, LiftConfig, LoopDisc, SlideConfig};
use crate::cvec;
use crate::deform::{self, AlphaSpec, EtaSpec, PushConfig, PushProblem};
use crate::disc::AnalyticDisc;
use crate::harmonic::{self, BoundaryArcSet, CertificateConfig, KernelConfig};
use crate::loops::{self, Loop, LoopCurve};
use crate::monodromy::{self, ExtensionSchedule, FEvalConfig};
use crate::quadric::{self, QuadricPoint, RegionSpec};
use crate::{Error, ExecMode, Result, Tolerances, C64, V3};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_v3(rng: &mut ChaCha8Rng, re: f64, im: f64) -> V3 {
    std::array::from_fn(|_| c(rng.gen_range(-re..re), rng.gen_range(-im..im)))
}

/// A point of the retraction domain with `Σw²` at distance `≥ 0.05` from the cut.
pub fn random_ambient(rng: &mut ChaCha8Rng) -> V3 {
    loop {
        let w = random_v3(rng, 2.0, 1.0);
        if quadric::cut_margin(&w) >= 0.05 {
            return w;
        }
    }
}

/// A point of `M` with `κ ≥ kappa_min` and `u` in `u_range`.
pub fn random_m_prime_point(rng: &mut ChaCha8Rng, kappa_min: f64, u_range: (f64, f64)) -> V3 {
    loop {
        let w = random_v3(rng, 1.5, 1.0);
        if quadric::cut_margin(&w) < 0.05 {
            continue;
        }
        let z = quadric::retract(&w, 0.0).expect("cut margin checked");
        let u = quadric::exhaustion(&z);
        if quadric::kappa(&z) >= kappa_min && u > u_range.0 && u < u_range.1 {
            return z;
        }
    }
}

/// A small null-homotopic loop in `M'`: a point of `M'` plus random modes
/// `|n| ≤ 2` of size `≤ 0.15κ`, retracted. The size is also capped so that
/// `w·w` stays within `0.3` of `1` and the retracted loop is band-limited to
/// machine precision.
pub fn random_m_prime_loop(rng: &mut ChaCha8Rng, modes: usize, tol: &Tolerances) -> Result<Loop> {
    let z = random_m_prime_point(rng, 0.4, (1.0, 6.0));
    let size = (0.15 * quadric::kappa(&z)).min(0.05 / (1.0 + cvec::norm(&z)));
    let mut coeffs = vec![cvec::ZERO; 2 * modes + 1];
    coeffs[modes] = z;
    for n in [-2i64, -1, 1, 2] {
        let v = random_v3(rng, 1.0, 1.0);
        let v = cvec::scale_re(size / (cvec::norm(&v) * n.unsigned_abs() as f64), &v);
        coeffs[(modes as i64 + n) as usize] = v;
    }
    Ok(loops::loop_retract(&Loop::new(coeffs, 1)?, tol)?.0)
}

/// Tangent samples `v(s) ∈ T_{x(s)}M` from a random band-limited field.
pub fn random_tangent(rng: &mut ChaCha8Rng, samples: &[V3]) -> Vec<V3> {
    let n = samples.len();
    let a = random_v3(rng, 1.0, 1.0);
    let b = random_v3(rng, 1.0, 1.0);
    let d = random_v3(rng, 1.0, 1.0);
    samples
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let s = TAU * k as f64 / n as f64;
            let w = cvec::add(&a, &cvec::add(&cvec::scale(C64::from_polar(1.0, s), &b), &cvec::scale(C64::from_polar(1.0, -s), &d)));
            quadric::project_tangent(z, &w)
        })
        .collect()
}

/// A loop-disc `Ξ(σ) = ρ(x + σ·r·w)` in `M'`-loops about a random loop `x`.
pub fn random_m_prime_disc(rng: &mut ChaCha8Rng, modes: usize, m_deg: usize, tol: &Tolerances) -> Result<LoopDisc> {
    let x = random_m_prime_loop(rng, modes, tol)?;
    let k = x.samples(x.default_grid()).iter().map(quadric::kappa).fold(f64::INFINITY, f64::min);
    let w = random_v3(rng, 1.0, 1.0);
    let w2 = random_v3(rng, 1.0, 1.0);
    let reach = x.samples(x.default_grid()).iter().map(cvec::norm).fold(0.0, f64::max);
    let r = (0.2 * k).min(0.1 / (1.0 + reach)) / (cvec::norm(&w) + cvec::norm(&w2));
    let tol = *tol;
    let (disc, _) = LoopDisc::from_field(
        m_deg,
        modes,
        1,
        |sg, s| {
            let push = cvec::add(&cvec::scale(sg * r, &w), &cvec::scale(sg * r * C64::from_polar(1.0, s), &w2));
            quadric::retract(&cvec::add(&x.eval(s), &push), tol.cut)
        },
        ExecMode::Sequential,
    )?;
    Ok(disc)
}

/// A union of one to four disjoint arcs of `∂Δ`.
pub fn random_arc_set(rng: &mut ChaCha8Rng) -> Result<BoundaryArcSet> {
    let n = rng.gen_range(1..=4usize);
    let mut cuts: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(0.0..TAU)).collect();
    cuts.sort_by(f64::total_cmp);
    let offset = rng.gen_range(0.0..TAU);
    let arcs: Vec<(f64, f64)> = cuts
        .chunks(2)
        .filter(|p| p[1] - p[0] > 0.05)
        .map(|p| ((p[0] + offset) % TAU, (p[0] + offset) % TAU + (p[1] - p[0])))
        .collect();
    if arcs.is_empty() {
        return BoundaryArcSet::new(&[(offset, offset + 1.0)]);
    }
    BoundaryArcSet::new(&arcs)
}

/// A push problem on an affine disc `p + σn` (or a constant disc) in `M(a, b)`.
pub fn random_push_problem(rng: &mut ChaCha8Rng, tol: &Tolerances) -> Result<PushProblem> {
    let p = random_m_prime_point(rng, 0.5, (1.8, 4.0));
    let u = quadric::exhaustion(&p);
    let scale = rng.gen_range(0.0..0.08) * quadric::kappa(&p).min(1.0);
    let disc = if scale < 0.01 {
        AnalyticDisc::constant(p, 1, 8)?
    } else {
        deform::affine_disc(&p, &deform::null_direction(&p, rng.gen_range(0.0..TAU), scale)?, tol)?
    };
    Ok(PushProblem {
        disc,
        alpha: AlphaSpec::Fraction { of_delta0: rng.gen_range(0.3..0.7) },
        eta: EtaSpec::Fraction { of_delta0: 0.1 },
        j_exponent: 128,
        region: RegionSpec::new(u - 0.7, u + 0.7, u)?,
    })
}

/// A closed curve `t ↦ R(t)·x₀` in `M'`-loops, `R(t)` a small closed path of
/// real rotations (which preserve `κ`), sampled at `points + 1` times.
pub fn random_closed_m_prime_curve(rng: &mut ChaCha8Rng, points: usize, modes: usize, tol: &Tolerances) -> Result<LoopCurve> {
    let x0 = random_m_prime_loop(rng, modes, tol)?;
    let a: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-0.12..0.12));
    let b: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-0.12..0.12));
    LoopCurve::from_fn(points, |t| {
        let (s, co) = (TAU * t).sin_cos();
        let axis: [f64; 3] = std::array::from_fn(|i| a[i] * s + b[i] * (1.0 - co));
        let r = rotation(axis);
        let coeffs = x0.coeffs().iter().map(|v| rotate(&r, v)).collect();
        Loop::new(coeffs, x0.sobolev_k()).expect("rotated loop")
    })
}

/// Rodrigues rotation by the vector `axis` (angle `|axis|`).
fn rotation(axis: [f64; 3]) -> [[f64; 3]; 3] {
    let th = cvec::rnorm(&axis);
    if th == 0.0 {
        return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    }
    let k = [axis[0] / th, axis[1] / th, axis[2] / th];
    let (s, c) = th.sin_cos();
    let mut r = [[0.0; 3]; 3];
    let kx = [[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]];
    for i in 0..3 {
        for j in 0..3 {
            let id = if i == j { 1.0 } else { 0.0 };
            r[i][j] = c * id + s * kx[i][j] + (1.0 - c) * k[i] * k[j];
        }
    }
    r
}

fn rotate(r: &[[f64; 3]; 3], v: &V3) -> V3 {
    std::array::from_fn(|i| v[0] * r[i][0] + v[1] * r[i][1] + v[2] * r[i][2])
}

/// One line of the `verify` report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub pass: bool,
    /// The measured quantity.
    pub value: f64,
    /// The bound it is compared against.
    pub bound: f64,
    pub detail: String,
}

impl PropertyResult {
    fn at_most(name: &str, value: f64, bound: f64, detail: String) -> Self {
        Self { name: name.into(), pass: value <= bound, value, bound, detail }
    }

    fn at_least(name: &str, value: f64, bound: f64, detail: String) -> Self {
        Self { name: name.into(), pass: value >= bound, value, bound, detail }
    }

    fn error(name: &str, e: &Error) -> Self {
        Self { name: name.into(), pass: false, value: f64::NAN, bound: f64::NAN, detail: format!("{}: {e}", e.kind()) }
    }
}

/// Sizes of the `verify` suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub retraction_points: usize,
    pub holomorphy_pairs: usize,
    pub mean_value_discs: usize,
    pub extension_loops: usize,
    pub fiber_points: usize,
    pub fiber_phases: usize,
    pub push_problems: usize,
    pub certificate_sets: usize,
    pub closed_curves: usize,
    pub kernel_epsilons: Vec<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            retraction_points: 2000,
            holomorphy_pairs: 10,
            mean_value_discs: 4,
            extension_loops: 10,
            fiber_points: 10,
            fiber_phases: 8,
            push_problems: 1,
            certificate_sets: 20,
            closed_curves: 1,
            kernel_epsilons: vec![0.8],
        }
    }
}

/// Idempotence, fixed points and complex differentiability of `ρ`.
pub fn retraction_properties(seed: u64, n: usize, tol: &Tolerances) -> Vec<PropertyResult> {
    let mut rng = rng(seed);
    let (mut idem, mut fixed) = (0.0f64, 0.0f64);
    let (mut r3, mut r4) = (0.0f64, 0.0f64);
    let res = |w: &V3, v: &V3, e: f64| -> Result<f64> {
        let base = quadric::retract(w, tol.cut)?;
        let real = cvec::sub(&quadric::retract(&cvec::add(w, &cvec::scale_re(e, v)), tol.cut)?, &base);
        let imag = cvec::sub(&quadric::retract(&cvec::add(w, &cvec::scale(c(0.0, e), v)), tol.cut)?, &base);
        Ok(cvec::dist(&imag, &cvec::scale(c(0.0, 1.0), &real)))
    };
    for _ in 0..n {
        let w = random_ambient(&mut rng);
        let v = random_v3(&mut rng, 1.0, 1.0);
        let v = cvec::scale_re(1.0 / cvec::norm(&v), &v);
        let step = || -> Result<(f64, f64, f64, f64)> {
            let z = quadric::retract(&w, tol.cut)?;
            let zz = quadric::retract(&z, tol.cut)?;
            Ok((cvec::dist(&z, &zz), cvec::dist(&zz, &z), res(&w, &v, 1e-3)?, res(&w, &v, 1e-4)?))
        };
        match step() {
            Ok((a, b, c3, c4)) => {
                idem = idem.max(a);
                fixed = fixed.max(b);
                r3 = r3.max(c3);
                r4 = r4.max(c4);
            }
            Err(e) => return vec![PropertyResult::error("retraction", &e)],
        }
    }
    vec![
        PropertyResult::at_most("retraction_idempotence", idem, 1e-12, format!("{n} points")),
        PropertyResult::at_most("retraction_fixed_points", fixed, 1e-12, format!("{n} points")),
        PropertyResult::at_least("retraction_holomorphy_ratio", r3 / r4, 50.0, format!("residual {r3:e} at 1e-3, {r4:e} at 1e-4")),
    ]
}

pub fn period_properties() -> Vec<PropertyResult> {
    let r = monodromy::PERIOD_RESOLUTION;
    let e1 = (monodromy::period_k(r / 2, true) - 4.0 * PI).abs();
    let e2 = (monodromy::period_k(r, true) - 4.0 * PI).abs();
    vec![
        PropertyResult::at_most("period_error", e2, 1e-8, format!("resolution {r}")),
        PropertyResult::at_least("period_convergence_ratio", e1 / e2.max(f64::MIN_POSITIVE), 10.0, format!("errors {e1:e}, {e2:e}")),
    ]
}

fn f_samples(samples: &[V3], cfg: &FEvalConfig, tol: &Tolerances) -> Result<C64> {
    Ok(monodromy::f_eval_samples(samples, cfg, tol, ExecMode::Sequential)?.value)
}

/// Central-difference order of `f` along tangents and complex linearity of `df`.
pub fn holomorphy_properties(seed: u64, n: usize, tol: &Tolerances) -> Vec<PropertyResult> {
    let run = || -> Result<Vec<PropertyResult>> {
        let mut rng = rng(seed);
        let cfg = FEvalConfig::default();
        let (mut lo, mut hi, mut lin) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
        for _ in 0..n {
            let x = random_m_prime_loop(&mut rng, 16, tol)?;
            let xs = x.samples(128);
            let v = random_tangent(&mut rng, &xs);
            let df = monodromy::df_eval_samples(&xs, &v, tol)?;
            let iv: Vec<V3> = v.iter().map(|a| cvec::scale(c(0.0, 1.0), a)).collect();
            lin = lin.max((monodromy::df_eval_samples(&xs, &iv, tol)? - c(0.0, 1.0) * df).norm());
            let vn = v.iter().map(cvec::norm).fold(0.0, f64::max);
            let fd = |h: f64| -> Result<f64> {
                let moved = |sign: f64| -> Result<Vec<V3>> {
                    xs.iter().zip(&v).map(|(z, w)| quadric::retract(&cvec::add(z, &cvec::scale_re(sign * h / vn, w)), tol.cut)).collect()
                };
                let quotient = (f_samples(&moved(1.0)?, &cfg, tol)? - f_samples(&moved(-1.0)?, &cfg, tol)?) / (2.0 * h / vn);
                Ok((quotient - df).norm())
            };
            let order = (fd(0.02)? / fd(0.01)?).log2();
            lo = lo.min(order);
            hi = hi.max(order);
        }
        Ok(vec![
            PropertyResult::at_most("df_finite_difference_order", (lo - 2.0).abs().max((hi - 2.0).abs()), 0.2, format!("orders in [{lo:.3}, {hi:.3}] over {n} pairs")),
            PropertyResult::at_most("df_complex_linearity", lin, 1e-12, format!("{n} pairs")),
        ])
    };
    run().unwrap_or_else(|e| vec![PropertyResult::error("holomorphy", &e)])
}

/// Boundary means against centre values, and their decay under doubling of
/// the σ-grid.
pub fn mean_value_properties(seed: u64, n: usize, tol: &Tolerances) -> Vec<PropertyResult> {
    let run = || -> Result<Vec<PropertyResult>> {
        let mut rng = rng(seed);
        let cfg = FEvalConfig::default();
        let f = |s: &[V3]| f_samples(s, &cfg, tol);
        let (mut worst, mut worst_ratio) = (0.0f64, f64::INFINITY);
        for _ in 0..n {
            let disc = random_m_prime_disc(&mut rng, 16, 16, tol)?;
            let coarse = continuation::mean_value_audit(&f, &disc, 4, 128, tol)?;
            let fine = continuation::mean_value_audit(&f, &disc, 8, 128, tol)?;
            worst = worst.max(fine);
            worst_ratio = worst_ratio.min(coarse / fine.max(f64::MIN_POSITIVE));
        }
        Ok(vec![
            PropertyResult::at_most("mean_value_residual", worst, 1e-6, format!("{n} discs, 8 nodes")),
            PropertyResult::at_least("mean_value_doubling_ratio", worst_ratio, 2.0, "4 → 8 nodes".into()),
        ])
    };
    run().unwrap_or_else(|e| vec![PropertyResult::error("mean_value", &e)])
}

pub fn extension_properties(seed: u64, n: usize, tol: &Tolerances) -> Vec<PropertyResult> {
    let run = || -> Result<Vec<PropertyResult>> {
        let mut rng = rng(seed);
        let cfg = FEvalConfig::default();
        let mut worst = 0.0f64;
        for _ in 0..n {
            let x = random_m_prime_loop(&mut rng, 16, tol)?;
            let xs = x.samples(128);
            let a = monodromy::f_eval_with(&xs, ExtensionSchedule::Harmonic { beta: 1.0 }, &cfg, tol, ExecMode::Sequential)?;
            let b = monodromy::f_eval_with(&xs, ExtensionSchedule::Spherical { power: 2 }, &cfg, tol, ExecMode::Sequential)?;
            worst = worst.max((a.value - b.value).norm());
        }
        Ok(vec![PropertyResult::at_most("extension_independence", worst, 1e-6, format!("{n} loops, harmonic vs spherical"))])
    };
    run().unwrap_or_else(|e| vec![PropertyResult::error("extension_independence", &e)])
}

pub fn fiber_properties(seed: u64, n: usize, phases: usize, tol: &Tolerances) -> Vec<PropertyResult> {
    let mut rng = rng(seed);
    let mut failures = 0usize;
    let mut worst = 0.0f64;
    for _ in 0..n {
        let z = random_m_prime_point(&mut rng, 0.05, (1.0, 8.0));
        let zq = match QuadricPoint::new(z, tol) {
            Ok(z) => z,
            Err(e) => return vec![PropertyResult::error("fiber_scan", &e)],
        };
        for k in 0..phases {
            match deform::fiber_line_scan(&zq, PI * k as f64 / phases as f64, 32, tol) {
                Ok(s) if s.passes() => {}
                Ok(_) => failures += 1,
                Err(e) => return vec![PropertyResult::error("fiber_scan", &e)],
            }
            let tau = C64::from_polar(0.5 * deform::chart_radius(&z), TAU * k as f64 / phases as f64);
            let chart = match deform::FiberChart::new(zq, tau, tol) {
                Ok(c) => c,
                Err(e) => return vec![PropertyResult::error("fiber_chart", &e)],
            };
            match deform::phi_map(&chart, tol).and_then(|img| deform::chart_residuals(&chart, &img, tol)) {
                Ok(r) => worst = worst.max(r.iter().cloned().fold(0.0, f64::max)),
                Err(e) => return vec![PropertyResult::error("fiber_chart", &e)],
            }
        }
    }
    vec![
        PropertyResult::at_most("fiber_scan_failures", failures as f64, 0.0, format!("{n} points × {phases} phases")),
        PropertyResult::at_most("fiber_chart_residual", worst, 1e-10, "q = 0, Σζ² = 1 and E-component".into()),
    ]
}

pub fn push_properties(seed: u64, n: usize, tol: &Tolerances, exec: ExecMode) -> Vec<PropertyResult> {
    let mut rng = rng(seed);
    let mut out = Vec::new();
    for k in 0..n {
        let name = format!("push_disc_{k}");
        let mut run = || -> Result<deform::PushReport> {
            let p = random_push_problem(&mut rng, tol)?;
            Ok(deform::push_disc(&p, &PushConfig::default(), tol, exec)?.report)
        };
        match run() {
            Ok(r) => out.push(PropertyResult {
                name,
                pass: r.passes(),
                value: r.margin_iii.min(r.margin_iv),
                bound: 0.0,
                detail: format!("(i) {:e}, (ii) {:e}, (iii) {:e}, (iv) {:e}", r.check_i, r.check_ii, r.margin_iii, r.margin_iv),
            }),
            Err(e) => out.push(PropertyResult::error(&name, &e)),
        }
    }
    out
}

pub fn harmonic_properties(seed: u64, n: usize) -> Vec<PropertyResult> {
    let mut out = Vec::new();
    let add = || -> Result<f64> {
        let a = BoundaryArcSet::new(&[(0.3, 1.1)])?;
        let b = BoundaryArcSet::new(&[(2.0, 4.5)])?;
        let ab = BoundaryArcSet::new(&[(0.3, 1.1), (2.0, 4.5)])?;
        Ok((harmonic::arc_measure(&ab) - harmonic::arc_measure(&a) - harmonic::arc_measure(&b)).abs()
            + (harmonic::arc_measure(&a) - 0.8 / TAU).abs())
    };
    match add() {
        Ok(v) => out.push(PropertyResult::at_most("arc_measure_additivity", v, 1e-14, "exact arc lengths".into())),
        Err(e) => out.push(PropertyResult::error("arc_measure_additivity", &e)),
    }
    let mut rng = rng(seed);
    let mut failures = 0usize;
    for _ in 0..n {
        let ok = (|| -> Result<bool> {
            let gamma = random_arc_set(&mut rng)?;
            let delta = 0.5 * harmonic::arc_measure(&gamma);
            let cfg = CertificateConfig::default();
            let cert = harmonic::certificate_build(&gamma, delta, &cfg)?;
            Ok(harmonic::certificate_verify(&cert, &gamma, 4 * 4 * cert.degree().max(64)).pass)
        })()
        .unwrap_or(false);
        if !ok {
            failures += 1;
        }
    }
    out.push(PropertyResult::at_most("certificate_round_trip_failures", failures as f64, 0.0, format!("{n} arc sets")));
    out
}

pub fn kernel_properties(epsilons: &[f64]) -> Vec<PropertyResult> {
    epsilons
        .iter()
        .map(|&eps| {
            let name = format!("runge_kernel_eps_{eps}");
            match harmonic::runge_kernel(eps, &KernelConfig::default()) {
                Ok(k) => PropertyResult::kernel_line(&name, &k),
                Err(e) => PropertyResult::error(&name, &e),
            }
        })
        .collect()
}

impl PropertyResult {
    fn kernel_line(name: &str, k: &harmonic::RungeKernel) -> Self {
        Self {
            name: name.into(),
            pass: k.delta > 0.0 && k.report.max_re_complement < 0.0,
            value: k.report.max_re_complement,
            bound: 0.0,
            detail: format!("δ = {:e}, degree {}", k.delta, k.report.degree),
        }
    }
}

/// Continuation around closed curves in `M'`-loops returns to the start.
pub fn closed_curve_properties(seed: u64, n: usize, tol: &Tolerances, exec: ExecMode) -> Vec<PropertyResult> {
    let mut rng = rng(seed);
    let mut worst_inc = 0.0f64;
    let mut worst_direct = 0.0f64;
    for _ in 0..n {
        let mut run = || -> Result<(f64, f64)> {
            let curve = random_closed_m_prime_curve(&mut rng, 81, 16, tol)?;
            let fcfg = FEvalConfig::default();
            let lcfg = LiftConfig { m_deg: 16, ..LiftConfig::default() };
            let scfg = SlideConfig { seed, ..SlideConfig::default() };
            let rep = monodromy::monodromy_increment(&curve, &fcfg, &lcfg, &scfg, tol, exec)?;
            let mut direct = 0.0f64;
            for (r, x) in rep.chain.records.iter().zip(curve.loops()) {
                direct = direct.max((r.value - f_samples(&x.samples(128), &fcfg, tol)?).norm());
            }
            Ok((rep.increment.norm(), direct))
        };
        match run() {
            Ok((a, b)) => {
                worst_inc = worst_inc.max(a);
                worst_direct = worst_direct.max(b);
            }
            Err(e) => return vec![PropertyResult::error("closed_curve", &e)],
        }
    }
    vec![
        PropertyResult::at_most("closed_curve_increment", worst_inc, 1e-6, format!("{n} curves")),
        PropertyResult::at_most("closed_curve_direct_match", worst_direct, 1e-6, "chain vs direct f".into()),
    ]
}

/// Every property of the `verify` command, in a fixed order.
pub fn verify_all(seed: u64, cfg: &VerifyConfig, tol: &Tolerances, exec: ExecMode) -> Vec<PropertyResult> {
    let mut out = retraction_properties(seed, cfg.retraction_points, tol);
    out.extend(period_properties());
    out.extend(holomorphy_properties(seed, cfg.holomorphy_pairs, tol));
    out.extend(mean_value_properties(seed, cfg.mean_value_discs, tol));
    out.extend(extension_properties(seed, cfg.extension_loops, tol));
    out.extend(fiber_properties(seed, cfg.fiber_points, cfg.fiber_phases, tol));
    out.extend(push_properties(seed, cfg.push_problems, tol, exec));
    out.extend(harmonic_properties(seed, cfg.certificate_sets));
    out.extend(kernel_properties(&cfg.kernel_epsilons));
    out.extend(closed_curve_properties(seed, cfg.closed_curves, tol, exec));
    out
}
