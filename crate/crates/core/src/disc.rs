//! Finite-spectrum analytic discs `σ ↦ Σ aₘσᵐ` into `C³`.
//!
//! A disc is sampled on a uniform grid of `∂Δ`; by the maximum principle the
//! sup-distance of two discs is attained there.

use serde::{Deserialize, Serialize};

use crate::cvec;
use crate::quadric;
use crate::spectral;
use crate::{Error, Result, Tolerances, C64, V3};

pub const DISC_SCHEME_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticDisc {
    coeffs: Vec<V3>,
    grid: usize,
}

/// Holomorphy report of [`analytic_project`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    /// ℓ² energy of the negative frequencies.
    pub residual: f64,
    /// ℓ² energy of nonnegative frequencies above the retained degree.
    pub tail: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct DiscDistance(pub f64);

fn check_grid(grid: usize, degree: usize) -> Result<()> {
    if !grid.is_power_of_two() || grid < 4 * degree.max(1) {
        return Err(Error::Precondition(format!(
            "disc grid {grid} must be a power of two ≥ 4·degree = {}",
            4 * degree.max(1)
        )));
    }
    Ok(())
}

impl AnalyticDisc {
    pub fn new(coeffs: Vec<V3>, grid: usize) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Precondition("disc needs at least one coefficient".into()));
        }
        check_grid(grid, coeffs.len() - 1)?;
        Ok(Self { coeffs, grid })
    }

    pub fn constant(z: V3, degree: usize, grid: usize) -> Result<Self> {
        let mut coeffs = vec![cvec::ZERO; degree + 1];
        coeffs[0] = z;
        Self::new(coeffs, grid)
    }

    pub fn coeffs(&self) -> &[V3] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn center(&self) -> V3 {
        self.coeffs[0]
    }

    /// Norm of the top coefficient, a spectral-decay indicator.
    pub fn tail_coefficient(&self) -> f64 {
        cvec::norm(&self.coeffs[self.degree()])
    }

    pub fn eval(&self, sigma: C64) -> V3 {
        let mut acc = cvec::ZERO;
        for a in self.coeffs.iter().rev() {
            acc = cvec::add(&cvec::scale(sigma, &acc), a);
        }
        acc
    }

    /// Values at `r·e^{2πij/N}`, `j = 0..N`.
    pub fn samples_at_radius(&self, r: f64) -> Vec<V3> {
        let n = self.grid;
        let mut out = vec![cvec::ZERO; n];
        for d in 0..3 {
            let mut c = vec![C64::new(0.0, 0.0); n];
            let mut rm = 1.0;
            for (m, a) in self.coeffs.iter().enumerate() {
                c[m] = a[d] * rm;
                rm *= r;
            }
            for (o, v) in out.iter_mut().zip(spectral::inverse(&c)) {
                o[d] = v;
            }
        }
        out
    }

    pub fn boundary_samples(&self) -> Vec<V3> {
        self.samples_at_radius(1.0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&DiscFile {
            scheme_version: DISC_SCHEME_VERSION,
            degree: self.degree(),
            grid: self.grid,
            coefficients: self.coeffs.clone(),
        })
        .expect("disc serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: DiscFile = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if f.scheme_version != DISC_SCHEME_VERSION {
            return Err(Error::Config(format!("unsupported disc scheme {}", f.scheme_version)));
        }
        if f.coefficients.len() != f.degree + 1 {
            return Err(Error::Config("disc degree does not match coefficient count".into()));
        }
        Self::new(f.coefficients, f.grid)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiscFile {
    scheme_version: u32,
    degree: usize,
    grid: usize,
    coefficients: Vec<V3>,
}

/// Nonnegative-frequency part of scalar boundary samples, truncated at
/// `degree`, with the holomorphy report.
pub fn analytic_project_scalar(samples: &[C64], degree: usize) -> (Vec<C64>, ProjectionReport) {
    let n = samples.len();
    let c = spectral::forward(samples);
    let mut coeffs = vec![C64::new(0.0, 0.0); degree + 1];
    let (mut neg, mut tail) = (0.0, 0.0);
    for (k, ck) in c.iter().enumerate() {
        let m = spectral::freq(k, n);
        if m < 0 {
            neg += ck.norm_sqr();
        } else if (m as usize) <= degree {
            coeffs[m as usize] = *ck;
        } else {
            tail += ck.norm_sqr();
        }
    }
    (coeffs, ProjectionReport { residual: neg.sqrt(), tail: tail.sqrt() })
}

/// Projects uniform boundary samples onto a disc of the given degree.
pub fn analytic_project(samples: &[V3], degree: usize) -> Result<(AnalyticDisc, ProjectionReport)> {
    let n = samples.len();
    check_grid(n, degree)?;
    let mut coeffs = vec![cvec::ZERO; degree + 1];
    let (mut neg, mut tail) = (0.0, 0.0);
    for d in 0..3 {
        let s: Vec<C64> = samples.iter().map(|v| v[d]).collect();
        let (cd, rep) = analytic_project_scalar(&s, degree);
        for (o, v) in coeffs.iter_mut().zip(cd) {
            o[d] = v;
        }
        neg += rep.residual * rep.residual;
        tail += rep.tail * rep.tail;
    }
    Ok((
        AnalyticDisc { coeffs, grid: n },
        ProjectionReport { residual: neg.sqrt(), tail: tail.sqrt() },
    ))
}

/// `ρ∘x`, re-expanded on the boundary grid. Fails when the retracted samples
/// are not resolved by the disc's spectrum.
pub fn disc_retract(x: &AnalyticDisc, tol: &Tolerances) -> Result<(AnalyticDisc, ProjectionReport)> {
    let samples = x
        .boundary_samples()
        .iter()
        .map(|w| quadric::retract(w, tol.cut))
        .collect::<Result<Vec<_>>>()?;
    let (disc, rep) = analytic_project(&samples, x.degree())?;
    let defect = rep.residual.max(rep.tail);
    if defect > tol.spectral {
        return Err(Error::SpectralOverflow { residual: defect, limit: tol.spectral });
    }
    Ok((disc, rep))
}

/// Trapezoidal mean of `f` over the boundary samples of `x`.
pub fn boundary_mean<F>(x: &AnalyticDisc, mut f: F) -> Result<C64>
where
    F: FnMut(&V3) -> Result<C64>,
{
    let samples = x.boundary_samples();
    let mut acc = C64::new(0.0, 0.0);
    for s in &samples {
        acc += f(s)?;
    }
    Ok(acc / samples.len() as f64)
}

pub fn disc_distance(x: &AnalyticDisc, y: &AnalyticDisc) -> Result<DiscDistance> {
    if x.grid != y.grid {
        return Err(Error::GridMismatch { left: x.grid, right: y.grid });
    }
    let (a, b) = (x.boundary_samples(), y.boundary_samples());
    Ok(DiscDistance(
        a.iter().zip(&b).map(|(p, q)| cvec::dist(p, q)).fold(0.0, f64::max),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cvec::real;
    use crate::spectral::angles;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample(n: usize, f: impl Fn(C64) -> V3) -> Vec<V3> {
        angles(n).iter().map(|&a| f(C64::from_polar(1.0, a))).collect()
    }

    #[test]
    fn projection_examples() {
        let sq = sample(256, |s| [s * s, c(0.0, 0.0), c(0.0, 0.0)]);
        let (d, rep) = analytic_project(&sq, 64).unwrap();
        assert!((d.coeffs()[2][0] - 1.0).norm() < 1e-14);
        let others: f64 = d.coeffs().iter().enumerate().filter(|(m, _)| *m != 2).map(|(_, a)| cvec::norm(a)).fold(0.0, f64::max);
        assert!(others <= 1e-14 && rep.residual <= 1e-14);

        let anti = sample(256, |s| [s.conj(), c(0.0, 0.0), c(0.0, 0.0)]);
        let (_, rep) = analytic_project(&anti, 64).unwrap();
        assert!((rep.residual - 1.0).abs() < 1e-14);
    }

    #[test]
    fn projection_recovers_random_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let coeffs: Vec<V3> = (0..=64)
            .map(|_| std::array::from_fn(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
            .collect();
        let disc = AnalyticDisc::new(coeffs.clone(), 256).unwrap();
        let (back, _) = analytic_project(&disc.boundary_samples(), 64).unwrap();
        for (a, b) in back.coeffs().iter().zip(&coeffs) {
            assert!(cvec::dist(a, b) < 1e-12);
        }
    }

    #[test]
    fn retract_examples() {
        let tol = Tolerances::default();
        let k = AnalyticDisc::constant(real([1.0, 0.0, 0.0]), 64, 256).unwrap();
        let (r, _) = disc_retract(&k, &tol).unwrap();
        assert!(cvec::dist(&r.center(), &k.center()) < 1e-15);
        assert!(r.coeffs().iter().skip(1).all(|a| cvec::norm(a) < 1e-15));

        let mut coeffs = vec![cvec::ZERO; 65];
        coeffs[0] = real([1.0, 0.0, 0.0]);
        coeffs[1] = real([0.0, 0.1, 0.0]);
        let x = AnalyticDisc::new(coeffs, 256).unwrap();
        let (r, rep) = disc_retract(&x, &tol).unwrap();
        assert!(rep.residual <= tol.spectral);
        let worst = r.boundary_samples().iter().map(quadric::quadric_defect).fold(0.0, f64::max);
        assert!(worst <= 1e-10, "{worst}");
        let center = quadric::retract(&x.eval(c(0.0, 0.0)), tol.cut).unwrap();
        assert!(cvec::dist(&r.eval(c(0.0, 0.0)), &center) < 1e-10);

        let mut coeffs = vec![cvec::ZERO; 65];
        coeffs[1] = real([0.0, 0.0, 1.0]);
        let bad = AnalyticDisc::new(coeffs, 256).unwrap();
        assert!(matches!(disc_retract(&bad, &tol), Err(Error::BranchCut { .. })));
    }

    #[test]
    fn boundary_mean_examples() {
        let mut coeffs = vec![cvec::ZERO; 9];
        coeffs[0] = [c(0.3, 0.2), c(1.0, 0.0), c(0.0, 0.0)];
        coeffs[3] = [c(0.5, -0.1), c(0.0, 0.0), c(0.0, 0.0)];
        let x = AnalyticDisc::new(coeffs, 64).unwrap();
        let m = boundary_mean(&x, |v| Ok(v[0])).unwrap();
        assert!((m - c(0.3, 0.2)).norm() < 1e-15);
        let k = boundary_mean(&x, |_| Ok(c(2.0, -1.0))).unwrap();
        assert!((k - c(2.0, -1.0)).norm() < 1e-15);

        // nonholomorphic composite: |first coordinate|², against a dense quadrature
        let f = |v: &V3| Ok(c(v[0].norm_sqr(), 0.0));
        let coarse = boundary_mean(&x, f).unwrap();
        let n = 20000;
        let dense: f64 = (0..n)
            .map(|j| x.eval(C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64))[0].norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((coarse.re - dense).abs() < 1e-12);
        assert!((coarse.re - x.center()[0].norm_sqr()).abs() > 0.1);
    }

    #[test]
    fn distance_examples() {
        let z = AnalyticDisc::constant(cvec::ZERO, 4, 16).unwrap();
        assert_eq!(disc_distance(&z, &z).unwrap().0, 0.0);
        let e = AnalyticDisc::constant(real([0.0, 0.0, 1.0]), 4, 16).unwrap();
        assert!((disc_distance(&z, &e).unwrap().0 - 1.0).abs() < 1e-15);
        let v = [c(0.3, 0.4), c(0.0, 1.0), c(-2.0, 0.0)];
        let lin = AnalyticDisc::new(vec![cvec::ZERO, v, cvec::ZERO, cvec::ZERO, cvec::ZERO], 16).unwrap();
        assert!((disc_distance(&lin, &z).unwrap().0 - cvec::norm(&v)).abs() < 1e-14);
        let other = AnalyticDisc::constant(cvec::ZERO, 4, 32).unwrap();
        assert!(matches!(disc_distance(&z, &other), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn maximum_principle_on_interior_radii() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let coeffs: Vec<V3> = (0..=16)
            .map(|m| std::array::from_fn(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * 0.7f64.powi(m)))
            .collect();
        let x = AnalyticDisc::new(coeffs, 64).unwrap();
        let bmax = x.boundary_samples().iter().map(cvec::norm).fold(0.0, f64::max);
        for r in [0.5, 0.9] {
            let imax = x.samples_at_radius(r).iter().map(cvec::norm).fold(0.0, f64::max);
            assert!(imax <= bmax + 1e-12);
        }
    }

    #[test]
    fn projection_is_idempotent_on_coefficients() {
        let samples = sample(64, |s| [s.exp(), (s * s).conj(), c(1.0, 0.0) / (c(3.0, 0.0) - s)]);
        let (once, _) = analytic_project(&samples, 16).unwrap();
        let (twice, _) = analytic_project(&once.boundary_samples(), 16).unwrap();
        for (a, b) in once.coeffs().iter().zip(twice.coeffs()) {
            assert!(cvec::dist(a, b) < 1e-15);
        }
    }

    #[test]
    fn json_roundtrip() {
        let x = AnalyticDisc::new(vec![real([1.0, 0.0, 0.0]), [c(0.0, 0.5), c(0.1, 0.0), c(0.0, 0.0)]], 8).unwrap();
        assert_eq!(AnalyticDisc::from_json(&x.to_json()).unwrap(), x);
        assert!(AnalyticDisc::new(vec![cvec::ZERO; 5], 12).is_err());
    }
}
