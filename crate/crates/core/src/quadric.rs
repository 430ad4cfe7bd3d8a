//! The quadric `M = {Σzⱼ² = 1} ⊂ C³`, its real sphere `K = M ∩ R³`, the
//! exhaustion `u = |z|²` and the explicit holomorphic retraction
//! `ρ(w) = w / √(Σwⱼ²)`.
//!
//! `M' = M ∖ K` is parametrized by `(C² ∖ {0}) / ±` through [`cover_push`].

use serde::{Deserialize, Serialize};

use crate::cvec::{self, rdot, rnorm};
use crate::{Error, Result, Tolerances, C64, V3};

/// A point of the ambient space `C³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbientPoint(pub V3);

impl AmbientPoint {
    pub fn new(w: V3) -> Result<Self> {
        if cvec::is_finite(&w) {
            Ok(Self(w))
        } else {
            Err(Error::Precondition("ambient point has non-finite entries".into()))
        }
    }
}

/// A point on the quadric, checked against the manifold tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadricPoint(V3);

impl QuadricPoint {
    pub fn new(z: V3, tol: &Tolerances) -> Result<Self> {
        let defect = quadric_defect(&z);
        if !cvec::is_finite(&z) || defect > tol.manifold {
            return Err(Error::Precondition(format!("point off the quadric by {defect:e}")));
        }
        Ok(Self(z))
    }

    pub fn z(&self) -> &V3 {
        &self.0
    }
}

/// Levels `a < c < b` of `u` with `a > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl RegionSpec {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let r = Self { a, b, c };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 1.0 && self.a < self.c && self.c < self.b) {
            return Err(Error::Precondition(format!(
                "region levels must satisfy 1 < a < c < b, got a={} c={} b={}",
                self.a, self.c, self.b
            )));
        }
        Ok(())
    }
}

/// A tangent vector `v ∈ T_zM`, i.e. `Σzⱼvⱼ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub base: QuadricPoint,
    pub v: V3,
}

impl TangentVector {
    pub fn new(base: QuadricPoint, v: V3, tol: &Tolerances) -> Result<Self> {
        let defect = cvec::dot(base.z(), &v).norm();
        if defect > tol.manifold {
            return Err(Error::TangencyViolation { defect });
        }
        Ok(Self { base, v })
    }
}

/// A point of `C² ∖ {0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverPoint(pub [C64; 2]);

impl CoverPoint {
    pub fn new(w: [C64; 2], tol: &Tolerances) -> Result<Self> {
        let norm = cover_norm(&w);
        if norm < tol.zero {
            return Err(Error::ZeroPoint { norm });
        }
        Ok(Self(w))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    /// `u(z) = |z|²`.
    pub u: f64,
    /// `κ(z) = ‖Im z‖₂`, the K-distance proxy.
    pub kappa: f64,
    pub in_k: bool,
    pub in_m_prime: bool,
    /// `u < a`.
    pub below_a: bool,
    /// `a < u < b`.
    pub open_shell: bool,
    /// `a ≤ u ≤ b`.
    pub closed_shell: bool,
}

#[inline]
pub fn quadric_form(w: &V3) -> C64 {
    cvec::dot(w, w)
}

#[inline]
pub fn quadric_defect(z: &V3) -> f64 {
    (quadric_form(z) - 1.0).norm()
}

#[inline]
pub fn exhaustion(z: &V3) -> f64 {
    cvec::norm_sqr(z)
}

#[inline]
pub fn kappa(z: &V3) -> f64 {
    rnorm(&cvec::im(z))
}

/// `ρ(w) = w/√(Σw²)` on raw coordinates.
#[inline]
pub fn retract(w: &V3, cut: f64) -> Result<V3> {
    let g = quadric_form(w);
    if !(g.re > 0.0 || g.im.abs() > cut) {
        return Err(Error::BranchCut { re: g.re, im: g.im, margin: cut });
    }
    let s = g.sqrt().inv();
    Ok(cvec::scale(s, w))
}

/// Distance of `Σw²` from the cut `(-∞, 0]`, the retraction-domain margin.
#[inline]
pub fn cut_margin(w: &V3) -> f64 {
    let g = quadric_form(w);
    if g.re > 0.0 {
        g.norm()
    } else {
        g.im.abs()
    }
}

pub fn retract_ambient(w: &AmbientPoint, tol: &Tolerances) -> Result<QuadricPoint> {
    let z = retract(&w.0, tol.cut)?;
    QuadricPoint::new(z, tol)
}

pub fn classify(z: &QuadricPoint, region: &RegionSpec, tol: &Tolerances) -> Classification {
    let u = exhaustion(z.z());
    let k = kappa(z.z());
    let in_k = k <= tol.k_set;
    Classification {
        u,
        kappa: k,
        in_k,
        in_m_prime: !in_k,
        below_a: u < region.a,
        open_shell: region.a < u && u < region.b,
        closed_shell: region.a <= u && u <= region.b,
    }
}

/// Holomorphic projection `v − (Σzⱼvⱼ) z` onto `T_zM`.
#[inline]
pub fn project_tangent(z: &V3, v: &V3) -> V3 {
    cvec::sub(v, &cvec::scale(cvec::dot(z, v), z))
}

/// Unit vector spanning `E_z = {Σzⱼvⱼ = 0, Σz̄ⱼvⱼ = 0}`, smooth in `z` on `M'`
/// (no phase normalization).
pub fn kernel_section(z: &V3, tol: &Tolerances) -> Result<V3> {
    let k = kappa(z);
    if k <= tol.k_set {
        return Err(Error::CriticalPoint { kappa: k });
    }
    let v = cvec::cross(z, &cvec::conj(z));
    let n = cvec::norm(&v);
    if n <= tol.k_set {
        return Err(Error::CriticalPoint { kappa: k });
    }
    Ok(cvec::scale_re(1.0 / n, &v))
}

/// Deterministic basis vector of `E_z`: the kernel section rotated so that
/// its largest-modulus coordinate (lowest index on ties) is real positive.
pub fn e_basis(z: &QuadricPoint, tol: &Tolerances) -> Result<TangentVector> {
    let v = kernel_section(z.z(), tol)?;
    let mut pivot = 0;
    for j in 1..3 {
        if v[j].norm() > v[pivot].norm() * (1.0 + 1e-12) {
            pivot = j;
        }
    }
    let phase = v[pivot].conj() / v[pivot].norm();
    Ok(TangentVector { base: *z, v: cvec::scale(phase, &v) })
}

/// `ω_z(v, w) = z₁(v₂w₃−v₃w₂) − z₂(v₁w₃−v₃w₁) + z₃(v₁w₂−v₂w₁) = z·(v×w)`.
#[inline]
pub fn omega(z: &V3, v: &V3, w: &V3) -> C64 {
    cvec::dot(z, &cvec::cross(v, w))
}

pub fn omega_eval(z: &QuadricPoint, v: &TangentVector, w: &TangentVector) -> C64 {
    omega(z.z(), &v.v, &w.v)
}

#[inline]
pub fn cover_norm(w: &[C64; 2]) -> f64 {
    (w[0].norm_sqr() + w[1].norm_sqr()).sqrt()
}

/// The null-cone map `w ↦ (i(w₁²+w₂²), w₁²−w₂², 2w₁w₂)`.
#[inline]
fn cone(w: &[C64; 2]) -> V3 {
    let (a, b) = (w[0] * w[0], w[1] * w[1]);
    [C64::i() * (a + b), a - b, 2.0 * w[0] * w[1]]
}

#[inline]
fn cone_diff(w: &[C64; 2], dw: &[C64; 2]) -> V3 {
    let (a, b) = (w[0] * dw[0], w[1] * dw[1]);
    [
        C64::i() * 2.0 * (a + b),
        2.0 * (a - b),
        2.0 * (w[1] * dw[0] + w[0] * dw[1]),
    ]
}

/// Composite of the cone map with `z ↦ (1+|Re z|⁻²)^{1/2} Re z + i Im z`.
#[inline]
pub fn cover_push_raw(w: &[C64; 2]) -> V3 {
    let z0 = cone(w);
    let x = cvec::re(&z0);
    let y = cvec::im(&z0);
    let a = (1.0 + 1.0 / rdot(&x, &x)).sqrt();
    [
        C64::new(a * x[0], y[0]),
        C64::new(a * x[1], y[1]),
        C64::new(a * x[2], y[2]),
    ]
}

/// [`cover_push_raw`] together with its (real-linear) differential applied to
/// the given directions.
pub fn cover_push_jet<const K: usize>(w: &[C64; 2], dirs: &[[C64; 2]; K]) -> (V3, [V3; K]) {
    let z0 = cone(w);
    let x = cvec::re(&z0);
    let y = cvec::im(&z0);
    let s = rdot(&x, &x);
    let a = (1.0 + 1.0 / s).sqrt();
    let z = [
        C64::new(a * x[0], y[0]),
        C64::new(a * x[1], y[1]),
        C64::new(a * x[2], y[2]),
    ];
    let mut out = [cvec::ZERO; K];
    for (o, dw) in out.iter_mut().zip(dirs) {
        let dz0 = cone_diff(w, dw);
        let dx = cvec::re(&dz0);
        let dy = cvec::im(&dz0);
        let da = -rdot(&x, &dx) / (a * s * s);
        for j in 0..3 {
            o[j] = C64::new(a * dx[j] + da * x[j], dy[j]);
        }
    }
    (z, out)
}

pub fn cover_push(w: &CoverPoint, tol: &Tolerances) -> Result<QuadricPoint> {
    let norm = cover_norm(&w.0);
    if norm < tol.zero {
        return Err(Error::ZeroPoint { norm });
    }
    Ok(QuadricPoint(cover_push_raw(&w.0)))
}

/// One of the two preimages `±w` of a point of `M'` under [`cover_push_raw`].
pub fn cover_preimage(z: &V3, tol: &Tolerances) -> Result<[C64; 2]> {
    let x = cvec::re(z);
    let y = cvec::im(z);
    let ny2 = rdot(&y, &y);
    if ny2.sqrt() <= tol.k_set {
        return Err(Error::CriticalPoint { kappa: ny2.sqrt() });
    }
    let shrink = 1.0 / (1.0 + 1.0 / ny2).sqrt();
    let z0 = [
        C64::new(x[0] * shrink, y[0]),
        C64::new(x[1] * shrink, y[1]),
        C64::new(x[2] * shrink, y[2]),
    ];
    let s = -C64::i() * z0[0];
    let a = 0.5 * (s + z0[1]);
    let b = 0.5 * (s - z0[1]);
    Ok(if a.norm() >= b.norm() {
        let w1 = a.sqrt();
        [w1, z0[2] / (2.0 * w1)]
    } else {
        let w2 = b.sqrt();
        [z0[2] / (2.0 * w2), w2]
    })
}

#[inline]
fn cover_dist(a: &[C64; 2], b: &[C64; 2]) -> f64 {
    ((a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr()).sqrt()
}

/// Branch-tracked lift of a sampled loop in `M'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverLift {
    pub path: Vec<[C64; 2]>,
    /// The lift returns to its start (not its negative) after one period.
    pub closed: bool,
    /// Largest admissible step `min |w|` used for tracking.
    pub step_bound: f64,
}

/// Lifts uniformly sampled loop values (one period, without the repeated
/// endpoint) through [`cover_push_raw`], choosing the nearer of `±w` at
/// every sample.
pub fn cover_lift(samples: &[V3], tol: &Tolerances) -> Result<CoverLift> {
    let pre = samples
        .iter()
        .map(|z| cover_preimage(z, tol))
        .collect::<Result<Vec<_>>>()?;
    let bound = pre.iter().map(cover_norm).fold(f64::INFINITY, f64::min);
    let mut path = Vec::with_capacity(pre.len());
    let mut prev = pre[0];
    path.push(prev);
    let n = pre.len();
    let mut closed = true;
    for idx in 1..=n {
        let cand = pre[idx % n];
        let neg = [-cand[0], -cand[1]];
        let (dp, dn) = (cover_dist(&cand, &prev), cover_dist(&neg, &prev));
        let (next, step) = if dp <= dn { (cand, dp) } else { (neg, dn) };
        if step >= bound {
            return Err(Error::TrackingLoss { index: idx, step, bound });
        }
        if idx == n {
            closed = cover_dist(&next, &path[0]) < cover_dist(&next, &[-path[0][0], -path[0][1]]);
        } else {
            path.push(next);
        }
        prev = next;
    }
    Ok(CoverLift { path, closed, step_bound: bound })
}
