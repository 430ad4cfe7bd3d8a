//! Numerical analytic continuation on the loop space of the complex quadric
//! `M = {z ∈ C³ : z₁² + z₂² + z₃² = 1}`.
//!
//! The crate is organised bottom-up:
//!
//! * [`quadric`]: the manifold, its holomorphic retraction, tangent data, the
//!   holomorphic 2-form and the double cover of `M ∖ K`.
//! * [`disc`]: finite-spectrum analytic discs.
//! * [`loops`]: Fourier loops into `C³`, curves of loops, polynomial smoothing.
//! * [`harmonic`]: harmonic-measure certificates and the Runge-type kernel.
//! * [`deform`]: fiber charts along the `∂u`-kernel and boundary pushing of discs.
//! * [`continuation`]: regular lifts and the sliding-disc continuation.
//! * [`monodromy`]: the loop-space function `f(x) = ∫ ξ*ω` and its monodromy.
//! * [`suite`]: seeded generators and the invariant checks behind `verify`.
//! * [`cli`]: configuration, batch commands and structured outputs.

pub mod cli;
pub mod continuation;
pub mod cvec;
pub mod deform;
pub mod disc;
pub mod error;
pub mod exec;
pub mod harmonic;
pub mod loops;
pub mod monodromy;
pub mod quadric;
pub mod spectral;
pub mod suite;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use exec::ExecMode;

/// A vector of `C³`.
pub type V3 = [C64; 3];

/// Numerical tolerances shared across modules. Defaults are the documented
/// configuration values; the CLI exposes every field.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Quadric membership `|Σzⱼ² − 1|`.
    pub manifold: f64,
    /// K-membership threshold on `κ(z) = ‖Im z‖`.
    pub k_set: f64,
    /// Allowed holomorphy / truncation defect of spectral representations.
    pub spectral: f64,
    /// Overlap consistency of continuation chains.
    pub overlap: f64,
    /// Distance of `Σw²` to the cut `(-∞, 0]`.
    pub cut: f64,
    /// Minimal norm of a cover point.
    pub zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            manifold: 1e-10,
            k_set: 1e-9,
            spectral: 1e-9,
            overlap: 1e-6,
            cut: 1e-9,
            zero: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("manifold", self.manifold),
            ("k_set", self.k_set),
            ("spectral", self.spectral),
            ("overlap", self.overlap),
            ("cut", self.cut),
            ("zero", self.zero),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("tolerance `{name}` must be positive, got {v}")));
            }
        }
        Ok(())
    }
}
