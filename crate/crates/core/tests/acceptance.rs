//! Acceptance criteria. Each test prints one `criterion N ... PASS|FAIL` line.
//!
//! The tests hold a global lock so the timed criteria are not measured under
//! contention with each other.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::Instant;

use loopcont::cli::{self, CommandName, RunConfig, EXIT_OK};
use loopcont::continuation::{self, LiftConfig, SlideConfig};
use loopcont::deform::{self, PushConfig};
use loopcont::harmonic::{self, BoundaryArcSet, CertificateConfig, KernelConfig};
use loopcont::monodromy::{self, CollapseProfile, ExtensionSchedule, FEvalConfig};
use loopcont::quadric;
use loopcont::{cvec, suite, ExecMode, Tolerances, C64, V3};
use rand::Rng;
use serde_json::Value;

static LOCK: Mutex<()> = Mutex::new(());
static DEMO_SEED0: OnceLock<Value> = OnceLock::new();

fn serial() -> MutexGuard<'static, ()> {
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(n: u32, name: &str, pass: bool, detail: String) {
    // straight to the handle so the line survives the test harness's capture
    let line = format!("criterion {n:>2} {name}: {} ({detail})\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {n} {name} failed: {detail}");
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn four_pi() -> f64 {
    // area of the unit sphere
    4.0 * PI
}

fn f_at(samples: &[V3], tol: &Tolerances) -> C64 {
    monodromy::f_eval_samples(samples, &FEvalConfig::default(), tol, ExecMode::Sequential).unwrap().value
}

/// `w / √(w·w)` with the principal root, written out independently.
fn retract_oracle(w: &V3) -> V3 {
    let q = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
    let r = q.sqrt();
    [w[0] / r, w[1] / r, w[2] / r]
}

fn dist(a: &V3, b: &V3) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).norm_sqr()).sum::<f64>().sqrt()
}

#[test]
fn criterion_01_retraction() {
    let _g = serial();
    let tol = Tolerances::default();
    let start = Instant::now();
    let mut rng = suite::rng(101);
    let (mut idem, mut fixed, mut oracle) = (0.0f64, 0.0f64, 0.0f64);
    let (mut r3, mut r4) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let w = suite::random_ambient(&mut rng);
        let z = quadric::retract(&w, tol.cut).unwrap();
        oracle = oracle.max(dist(&z, &retract_oracle(&w)));
        idem = idem.max(dist(&quadric::retract(&z, tol.cut).unwrap(), &z));
        let on_m = retract_oracle(&w);
        fixed = fixed.max(dist(&quadric::retract(&on_m, tol.cut).unwrap(), &on_m));
        let v: V3 = std::array::from_fn(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let v = cvec::scale_re(1.0 / cvec::norm(&v), &v);
        let residual = |eps: f64| {
            let a = quadric::retract(&cvec::add(&w, &cvec::scale(c(0.0, eps), &v)), tol.cut).unwrap();
            let b = quadric::retract(&cvec::add(&w, &cvec::scale_re(eps, &v)), tol.cut).unwrap();
            let lhs = cvec::sub(&a, &z);
            let rhs = cvec::scale(c(0.0, 1.0), &cvec::sub(&b, &z));
            dist(&lhs, &rhs)
        };
        r3 = r3.max(residual(1e-3));
        r4 = r4.max(residual(1e-4));
    }
    let secs = start.elapsed().as_secs_f64();
    let ratio = r3 / r4;
    let pass = idem <= 1e-12 && fixed <= 1e-12 && oracle <= 1e-12 && ratio >= 50.0 && secs < 5.0;
    verdict(
        1,
        "retraction",
        pass,
        format!("idempotence {idem:.2e}, fixed {fixed:.2e}, vs oracle {oracle:.2e}, CR ratio {ratio:.1}, {secs:.2} s"),
    );
}

#[test]
fn criterion_02_period() {
    let _g = serial();
    let start = Instant::now();
    let res = monodromy::PERIOD_RESOLUTION;
    let fine = monodromy::period_k(res, true);
    let coarse = monodromy::period_k(res / 2, true);
    let (e1, e0) = ((fine - four_pi()).abs(), (coarse - four_pi()).abs());
    let ratio = e0 / e1;
    let secs = start.elapsed().as_secs_f64();
    let pass = e1 <= 1e-8 && ratio >= 10.0 && secs < 1.0;
    verdict(2, "period", pass, format!("error {e1:.2e} at {res}, {e0:.2e} at {}, ratio {ratio:.1}, {secs:.3} s", res / 2));
}

fn demo_summary(cfg: &RunConfig) -> (i32, Value, f64) {
    let start = Instant::now();
    let out = cli::execute(cfg, CommandName::DemoMonodromy);
    (out.code, out.summary, start.elapsed().as_secs_f64())
}

fn increment(summary: &Value) -> Option<C64> {
    let inc = &summary["result"]["increment"];
    Some(c(inc["re"].as_f64()?, inc["im"].as_f64()?))
}

fn seed0_demo() -> &'static Value {
    DEMO_SEED0.get_or_init(|| demo_summary(&RunConfig::default()).1)
}

#[test]
fn criterion_03_demo_monodromy() {
    let _g = serial();
    let defaults = RunConfig::default();
    let grids_ok = defaults.grids.t_grid >= 64 && defaults.grids.n_loop >= 32 && defaults.grids.m_deg >= 32;
    let mut pass = grids_ok;
    let mut lines = Vec::new();
    let mut signs = Vec::new();
    for seed in 0..5u64 {
        let (code, summary, secs) = if seed == 0 {
            let start = Instant::now();
            let s = seed0_demo().clone();
            (s["exit_code"].as_i64().unwrap_or(-1) as i32, s, start.elapsed().as_secs_f64())
        } else {
            demo_summary(&RunConfig { seed, ..RunConfig::default() })
        };
        let Some(inc) = increment(&summary) else {
            pass = false;
            lines.push(format!("seed {seed}: {}", summary["result"]["error"]));
            continue;
        };
        let sign = if inc.re >= 0.0 { 1.0 } else { -1.0 };
        let err = (inc - sign * four_pi()).norm();
        let recorded = summary["result"]["sign"].as_i64() == Some(sign as i64);
        signs.push(sign);
        pass &= code == EXIT_OK && err <= 1e-3 && recorded && secs < 300.0;
        lines.push(format!("seed {seed}: {:.10}{:+.2e}i err {err:.2e} {secs:.0} s", inc.re, inc.im));
    }
    pass &= signs.len() == 5 && signs.iter().all(|s| *s == signs[0]);
    verdict(3, "demo monodromy ±4π", pass, lines.join("; "));
}

#[test]
fn criterion_04_single_valued_on_m_prime() {
    let _g = serial();
    let tol = Tolerances::default();
    let mut rng = suite::rng(404);
    let (mut worst_inc, mut worst_direct) = (0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for k in 0..10 {
        let curve = suite::random_closed_m_prime_curve(&mut rng, 81, 16, &tol).unwrap();
        let lcfg = LiftConfig { m_deg: 16, ..LiftConfig::default() };
        let scfg = SlideConfig { seed: k, ..SlideConfig::default() };
        match monodromy::monodromy_increment(&curve, &FEvalConfig::default(), &lcfg, &scfg, &tol, ExecMode::Parallel) {
            Ok(rep) => {
                worst_inc = worst_inc.max(rep.increment.norm());
                for (r, x) in rep.chain.records.iter().zip(curve.loops()) {
                    worst_direct = worst_direct.max((r.value - f_at(&x.samples(128), &tol)).norm());
                }
            }
            Err(e) => failures.push(format!("curve {k}: {e}")),
        }
    }
    let pass = failures.is_empty() && worst_inc <= 1e-6 && worst_direct <= 1e-6;
    verdict(4, "single-valued on M' curves", pass, format!("|increment| ≤ {worst_inc:.2e}, chain vs direct {worst_direct:.2e}, {failures:?}"));
}

#[test]
fn criterion_05_holomorphy_of_f() {
    let _g = serial();
    let tol = Tolerances::default();
    let mut rng = suite::rng(505);
    let (mut lo, mut hi, mut lin) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for _ in 0..100 {
        let x = suite::random_m_prime_loop(&mut rng, 16, &tol).unwrap();
        let xs = x.samples(128);
        let v = suite::random_tangent(&mut rng, &xs);
        let df = monodromy::df_eval_samples(&xs, &v, &tol).unwrap();
        let iv: Vec<V3> = v.iter().map(|a| cvec::scale(c(0.0, 1.0), a)).collect();
        lin = lin.max((monodromy::df_eval_samples(&xs, &iv, &tol).unwrap() - c(0.0, 1.0) * df).norm());
        // central differences of f along the retracted straight line
        let err = |h: f64| {
            let moved = |sign: f64| -> Vec<V3> {
                xs.iter().zip(&v).map(|(z, w)| retract_oracle(&cvec::add(z, &cvec::scale_re(sign * h, w)))).collect()
            };
            ((f_at(&moved(1.0), &tol) - f_at(&moved(-1.0), &tol)) / (2.0 * h) - df).norm()
        };
        let vn = v.iter().map(cvec::norm).fold(0.0, f64::max);
        let order = (err(0.02 / vn) / err(0.01 / vn)).log2();
        lo = lo.min(order);
        hi = hi.max(order);
    }
    let pass = (lo - 2.0).abs() <= 0.2 && (hi - 2.0).abs() <= 0.2 && lin <= 1e-12;
    verdict(5, "holomorphy of f", pass, format!("FD orders in [{lo:.3}, {hi:.3}], |df(iv) − i df(v)| ≤ {lin:.2e}"));
}

#[test]
fn criterion_06_mean_value() {
    let _g = serial();
    let tol = Tolerances::default();
    let f = |s: &[V3]| Ok(f_at(s, &tol));
    let mut rng = suite::rng(606);
    let (mut worst, mut worst_ratio, mut oracle) = (0.0f64, f64::INFINITY, 0.0f64);
    for _ in 0..20 {
        let disc = suite::random_m_prime_disc(&mut rng, 16, 16, &tol).unwrap();
        let coarse = continuation::mean_value_audit(&f, &disc, 4, 128, &tol).unwrap();
        let fine = continuation::mean_value_audit(&f, &disc, 8, 128, &tol).unwrap();
        worst = worst.max(fine);
        worst_ratio = worst_ratio.min(coarse / fine.max(f64::MIN_POSITIVE));
        // boundary mean over 64 nodes against the centre value
        let centre = f_at(&disc.slice(c(0.0, 0.0)).samples(128), &tol);
        let mean = (0..64)
            .map(|k| f_at(&disc.slice(C64::from_polar(1.0, TAU * k as f64 / 64.0)).samples(128), &tol))
            .sum::<C64>()
            / 64.0;
        oracle = oracle.max((mean - centre).norm());
    }
    let pass = worst <= 1e-6 && worst_ratio >= 2.0 && oracle <= 1e-6;
    verdict(6, "mean-value identity", pass, format!("residual {worst:.2e}, doubling ratio ≥ {worst_ratio:.1}, 64-node oracle {oracle:.2e}"));
}

#[test]
fn criterion_07_extension_independence() {
    let _g = serial();
    let tol = Tolerances::default();
    let cfg = FEvalConfig::default();
    let mut rng = suite::rng(707);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let xs = suite::random_m_prime_loop(&mut rng, 16, &tol).unwrap().samples(128);
        let a = monodromy::f_eval_with(&xs, ExtensionSchedule::Harmonic { beta: 1.0 }, &cfg, &tol, ExecMode::Sequential).unwrap();
        let b = monodromy::f_eval_with(&xs, ExtensionSchedule::Spherical { power: 2 }, &cfg, &tol, ExecMode::Sequential).unwrap();
        worst = worst.max((a.value - b.value).norm());
    }
    verdict(7, "extension independence", worst <= 1e-6, format!("max difference {worst:.2e} over 50 loops"));
}

#[test]
fn criterion_08_fiber_scans() {
    let _g = serial();
    let tol = Tolerances::default();
    let mut rng = suite::rng(808);
    let mut bad = Vec::new();
    for k in 0..50 {
        let z = quadric::QuadricPoint::new(suite::random_m_prime_point(&mut rng, 0.05, (1.0, 8.0)), &tol).unwrap();
        for p in 0..8 {
            let beta = PI * p as f64 / 8.0;
            let scan = deform::fiber_line_scan(&z, beta, 32, &tol).unwrap();
            // re-derive the verdict from the raw profile
            let mid = scan.t.iter().position(|t| *t == 0.0).unwrap();
            let within = scan.t.iter().all(|t| t.abs() < scan.radius);
            let left = scan.u[..=mid].windows(2).all(|w| w[0] > w[1]);
            let right = scan.u[mid..].windows(2).all(|w| w[0] < w[1]);
            if !(within && left && right && scan.passes()) {
                bad.push((k, p));
            }
        }
    }
    verdict(8, "fiber critical point", bad.is_empty(), format!("{} of 400 scans fail {bad:?}", bad.len()));
}

#[test]
fn criterion_09_push_disc() {
    let _g = serial();
    let tol = Tolerances::default();
    let mut rng = suite::rng(909);
    let mut lines = Vec::new();
    let mut pass = true;
    for k in 0..10 {
        let problem = suite::random_push_problem(&mut rng, &tol).unwrap();
        let start = Instant::now();
        let family = match deform::push_disc(&problem, &PushConfig::default(), &tol, ExecMode::Parallel) {
            Ok(f) => f,
            Err(e) => {
                pass = false;
                lines.push(format!("#{k}: {e}"));
                continue;
            }
        };
        let secs = start.elapsed().as_secs_f64();
        let r = &family.report;
        // recheck (i)–(iv) on an odd boundary grid incommensurate with the
        // report's, retracting with the oracle formula
        let n = 8191;
        let (alpha, eta) = (r.alpha_min, r.eta);
        let (mut i_err, mut ii_err, mut m3, mut m4) = (0.0f64, 0.0f64, f64::INFINITY, f64::INFINITY);
        let centre = problem.disc.eval(c(0.0, 0.0));
        let boundary: Vec<(C64, V3)> =
            (0..n).map(|j| C64::from_polar(1.0, TAU * j as f64 / n as f64)).map(|s| (s, problem.disc.eval(s))).collect();
        for &t in &r.t_grid {
            let pre = family.pre_disc(t).unwrap();
            ii_err = ii_err.max(dist(&retract_oracle(&pre.eval(c(0.0, 0.0))), &centre));
            for (s, kappa) in &boundary {
                let lambda = retract_oracle(&pre.eval(*s));
                if t == 0.0 {
                    i_err = i_err.max(dist(&lambda, kappa));
                }
                let du = quadric::exhaustion(&lambda) - quadric::exhaustion(kappa);
                m4 = m4.min((du + eta).min(alpha + eta - du));
                if t == 1.0 {
                    m3 = m3.min((du - (alpha - eta)).min(alpha + eta - du));
                }
            }
        }
        let ok = r.passes() && alpha == r.alpha_max && i_err <= 1e-10 && ii_err <= 1e-10 && m3 > 0.0 && m4 > 0.0 && secs < 120.0;
        pass &= ok;
        lines.push(format!("#{k}: (i) {i_err:.1e} (ii) {ii_err:.1e} (iii) {m3:.2e} (iv) {m4:.2e} {secs:.1} s"));
    }
    verdict(9, "push_disc conclusions", pass, lines.join("; "));
}

#[test]
fn criterion_10_harmonic() {
    let _g = serial();
    let mut rng = suite::rng(1010);
    // arc measure against arc length over 2π, and additivity under splitting
    let mut additivity = 0.0f64;
    for _ in 0..100 {
        let gamma = suite::random_arc_set(&mut rng).unwrap();
        let exact = gamma.arcs().iter().map(|(a, b)| b - a).sum::<f64>() / TAU;
        let mut halves = Vec::new();
        for &(a, b) in gamma.arcs() {
            let m = 0.5 * (a + b);
            halves.push(harmonic::arc_measure(&BoundaryArcSet::new(&[(a, m)]).unwrap()));
            halves.push(harmonic::arc_measure(&BoundaryArcSet::new(&[(m, b)]).unwrap()));
        }
        let whole = harmonic::arc_measure(&gamma);
        additivity = additivity.max((whole - exact).abs()).max((halves.iter().sum::<f64>() - whole).abs());
    }
    // certificates, checked here on an independent boundary grid
    let mut cert_fail = Vec::new();
    for k in 0..100 {
        let gamma = suite::random_arc_set(&mut rng).unwrap();
        let delta = 0.5 * harmonic::arc_measure(&gamma);
        let ok = match harmonic::certificate_build(&gamma, delta, &CertificateConfig::default()) {
            Ok(cert) => {
                let n = 8 * cert.degree().max(64) + 3;
                let centre_ok = (cert.eval(c(0.0, 0.0)).re - delta).abs() <= 1e-12;
                let boundary_ok = (0..n).all(|j| {
                    let phi = TAU * j as f64 / n as f64;
                    let re = cert.eval(C64::from_polar(1.0, phi)).re;
                    re < 1.0 && (gamma.contains(phi) || re < 0.0)
                });
                centre_ok && boundary_ok && cert.report.as_ref().is_some_and(|r| r.pass)
            }
            Err(_) => false,
        };
        if !ok {
            cert_fail.push(k);
        }
    }
    let mut kernels = Vec::new();
    let mut kernels_ok = true;
    for eps in [0.3, 0.5, 0.8] {
        match harmonic::runge_kernel(eps, &KernelConfig::default()) {
            Ok(k) => {
                let (inside, outside) = harmonic::kernel_samples(eps, &KernelConfig::default());
                let constraints = outside.iter().all(|t| k.eval(*t).re < 0.0) && inside.len() + outside.len() > 0;
                kernels_ok &= k.delta > 0.0 && constraints;
                kernels.push(format!("ε {eps}: δ {:.3e}", k.delta));
            }
            Err(e) => {
                kernels_ok = false;
                kernels.push(format!("ε {eps}: {e}"));
            }
        }
    }
    let pass = additivity <= 1e-14 && cert_fail.is_empty() && kernels_ok;
    verdict(
        10,
        "harmonic suite",
        pass,
        format!("additivity {additivity:.1e}, certificate failures {cert_fail:?}, kernels [{}]", kernels.join("; ")),
    );
}

#[test]
fn criterion_11_homotopy_invariance() {
    let _g = serial();
    let linear = increment(seed0_demo());
    // a reparametrization shares every disc with the linear sweep; the
    // smaller push changes all of them
    let mut smooth = RunConfig::default();
    smooth.demo.profile = CollapseProfile::Smooth;
    // the smooth profile moves fastest mid-sweep, so it needs a finer t-grid
    smooth.grids.t_grid = 1152;
    let mut deformed = RunConfig::default();
    deformed.demo.eps_push = 0.36;
    let mut pass = linear.is_some();
    let mut lines = vec![format!("linear {linear:?}")];
    for (name, cfg) in [("smooth", smooth), ("deformed", deformed)] {
        let (code, summary, secs) = demo_summary(&cfg);
        let other = increment(&summary);
        let diff = match (linear, other) {
            (Some(a), Some(b)) => (a - b).norm(),
            _ => f64::INFINITY,
        };
        pass &= code == EXIT_OK && diff <= 2e-3;
        lines.push(format!("{name} {other:?} differs by {diff:.2e} ({secs:.0} s)"));
    }
    verdict(11, "homotopy invariance", pass, lines.join("; "));
}

#[test]
fn criterion_12_determinism() {
    let _g = serial();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut texts = Vec::new();
    let mut codes = Vec::new();
    for d in &dirs {
        let mut cfg = RunConfig::default();
        cfg.output.dir = d.path().to_path_buf();
        let out = cli::execute(&cfg, CommandName::Verify);
        cli::write_outputs(&cfg, &out, 0.0).unwrap();
        codes.push(out.code);
        texts.push(std::fs::read(d.path().join(&cfg.output.summary)).unwrap());
    }
    let same = texts[0] == texts[1];
    verdict(12, "determinism", same, format!("{} bytes, exit codes {codes:?}", texts[0].len()));
}
