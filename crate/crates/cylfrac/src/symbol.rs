//! The Fourier symbol of the conformal fractional Laplacian on the cylinder,
//! its integer-order product form, and the normalization constants.
//!
//! The projection of the operator onto the k-th spherical-harmonic eigenspace
//! acts on one-dimensional Fourier transforms as multiplication by
//!
//! ```text
//! Theta^k_gamma(xi) = 2^{2 gamma} |Gamma(1/2 + gamma/2 + sqrt((n/2-1)^2 - mu_k)/2 + i xi/2)|^2
//!                               / |Gamma(1/2 - gamma/2 + sqrt((n/2-1)^2 - mu_k)/2 + i xi/2)|^2
//! ```
//!
//! with `mu_k = -k(k + n - 2)`. Evaluation goes through `log |Gamma|^2`
//! differences so the ratio stays finite for arbitrarily large frequencies.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun;

/// Fractional evaluations refuse orders closer than this to an integer; the
/// `Gamma(-gamma)` factors in the normalization constants degenerate there and
/// integer orders take the product-formula path instead.
pub const INTEGER_GAMMA_GUARD: f64 = 1e-8;

/// Dimension, order and spherical-harmonic mode of one operator projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderParams {
    n: u32,
    gamma: f64,
    k: u32,
}

impl CylinderParams {
    /// Requires `n >= 2` and `0 < gamma < n/2`.
    pub fn new(n: u32, gamma: f64, k: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("dimension n = {n} must be >= 2")));
        }
        if !(gamma > 0.0 && gamma < n as f64 / 2.0) || !gamma.is_finite() {
            return Err(Error::Domain(format!(
                "order gamma = {gamma} outside (0, n/2) for n = {n}"
            )));
        }
        Ok(CylinderParams { n, gamma, k })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Scattering parameter `s = n/2 + gamma`.
    pub fn s(&self) -> f64 {
        self.n as f64 / 2.0 + self.gamma
    }

    /// Extension weight exponent `a = 1 - 2 gamma`.
    pub fn a(&self) -> f64 {
        1.0 - 2.0 * self.gamma
    }

    /// Laplacian eigenvalue `mu_k = -k(k + n - 2)` on the sphere.
    pub fn mu_k(&self) -> f64 {
        -((self.k * (self.k + self.n - 2)) as f64)
    }

    /// `sqrt((n/2 - 1)^2 - mu_k)`, the square root entering every Gamma
    /// argument. Non-negative for all admissible parameters.
    pub fn sqrt_disc(&self) -> f64 {
        let half = self.n as f64 / 2.0 - 1.0;
        (half * half - self.mu_k()).sqrt()
    }

    /// True when the order is too close to an integer for the fractional
    /// evaluation path.
    pub fn gamma_is_near_integer(&self) -> bool {
        (self.gamma - self.gamma.round()).abs() <= INTEGER_GAMMA_GUARD
    }
}

/// The full set of closed-form constants attached to one `(n, gamma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationConstants {
    /// Fractional curvature of the cylinder, `c_{n,gamma}`; also the sharp
    /// fractional Hardy constant.
    pub c_ngamma: f64,
    /// Scattering normalization `d_gamma = 2^{2 gamma} Gamma(gamma) / Gamma(-gamma)`.
    pub d_gamma: f64,
    /// Neumann-trace normalization `-2^{2 gamma - 1} Gamma(gamma) / (gamma Gamma(-gamma))`.
    pub dtilde_gamma: f64,
    /// Singular-integral constant `kappa_{n,gamma}`.
    pub kappa_ngamma: f64,
    /// Boundary-term constant of the conserved Hamiltonian.
    pub c_hamiltonian: f64,
    /// Fractional curvature of the round unit sphere.
    pub q_sphere: f64,
}

fn check_gamma_range(n: u32, gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < n as f64 / 2.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!(
            "order gamma = {gamma} outside (0, n/2) for n = {n}"
        )));
    }
    Ok(())
}

/// `log Theta^k_gamma(xi)`; shared by [`theta`] and the linearization module.
pub(crate) fn ln_theta(params: &CylinderParams, xi: f64) -> Result<f64> {
    let g = params.gamma;
    let d = params.sqrt_disc();
    // |Gamma|^2 is even in the imaginary part: evaluate at |xi|.
    let y = xi.abs() / 2.0;
    let num = Complex64::new(0.5 + g / 2.0 + d / 2.0, y);
    let den = Complex64::new(0.5 - g / 2.0 + d / 2.0, y);
    if den.re <= 0.0 && den.im == 0.0 && den.re.fract() == 0.0 {
        // cannot happen for admissible parameters: den.re = (1 - gamma + d)/2
        // and d >= n/2 - 1 >= 0 force den.re > (1 - n/2 + d)/2 ... >= 0 only
        // at gamma = d + 1; assert instead of silently continuing.
        return Err(Error::GammaPole(den));
    }
    Ok(2.0 * g * std::f64::consts::LN_2 + specfun::ln_abs_gamma_sq(num)?
        - specfun::ln_abs_gamma_sq(den)?)
}

/// Fourier symbol `Theta^k_gamma(xi)` of the operator projection `P^k_gamma`.
///
/// Strictly positive, even in `xi`, and strictly increasing in `|xi|`.
/// Requires a non-integer order; integer orders go through [`theta_integer`].
pub fn theta(params: &CylinderParams, xi: f64) -> Result<f64> {
    if params.gamma_is_near_integer() {
        return Err(Error::Domain(format!(
            "gamma = {} is within {INTEGER_GAMMA_GUARD} of an integer; use theta_integer",
            params.gamma
        )));
    }
    Ok(ln_theta(params, xi)?.exp())
}

/// Integer-order symbol `Theta^k_m(xi)` via the finite product
///
/// ```text
/// 2^{2m} prod_{j=1}^{m} ( (m + 1 - 2j + sqrt((n/2-1)^2 + k(k+n-2)))^2 / 4 + xi^2 / 4 )
/// ```
///
/// For `m = 1` this is exactly `xi^2 + (n-2)^2/4 - mu_k`, the conformal
/// Laplacian symbol. The product reproduces the `gamma -> m` limit of
/// [`theta`] for every `m < n/2`.
pub fn theta_integer(n: u32, m: u32, k: u32, xi: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("dimension n = {n} must be >= 2")));
    }
    if m < 1 || (m as f64) >= n as f64 / 2.0 {
        return Err(Error::Domain(format!(
            "integer order m = {m} outside [1, n/2) for n = {n}"
        )));
    }
    let half = n as f64 / 2.0 - 1.0;
    let d = (half * half + (k * (k + n - 2)) as f64).sqrt();
    let mut prod = 1.0f64;
    for j in 1..=m {
        let c = (m as f64) + 1.0 - 2.0 * (j as f64) + d;
        prod *= c * c / 4.0 + xi * xi / 4.0;
    }
    Ok(4.0f64.powi(m as i32) * prod)
}

/// Fractional curvature `c_{n,gamma}` of the cylindrical metric,
/// `2^{2 gamma} (Gamma((n/2 + gamma)/2) / Gamma((n/2 - gamma)/2))^2`.
///
/// Shares the exact evaluation path of [`theta`] at `xi = 0`, `k = 0`, so the
/// identity `Theta^0_gamma(0) = c_{n,gamma}` holds to rounding.
pub fn yamabe_constant(n: u32, gamma: f64) -> Result<f64> {
    check_gamma_range(n, gamma)?;
    let xp = Complex64::new(n as f64 / 4.0 + gamma / 2.0, 0.0);
    let xm = Complex64::new(n as f64 / 4.0 - gamma / 2.0, 0.0);
    Ok((2.0 * gamma * std::f64::consts::LN_2 + specfun::ln_abs_gamma_sq(xp)?
        - specfun::ln_abs_gamma_sq(xm)?)
        .exp())
}

/// Sharp constant of the fractional Hardy inequality on `R^n`; equal to
/// `c_{n,gamma}` (the cylinder curvature), which this function documents by
/// delegating outright.
pub fn hardy_constant(n: u32, gamma: f64) -> Result<f64> {
    yamabe_constant(n, gamma)
}

/// Fractional curvature of the round unit sphere,
/// `Q_gamma = Gamma(n/2 + gamma) / Gamma(n/2 - gamma)`.
pub fn sphere_curvature(n: u32, gamma: f64) -> Result<f64> {
    check_gamma_range(n, gamma)?;
    let h = n as f64 / 2.0;
    Ok(specfun::gamma_real(h + gamma)? / specfun::gamma_real(h - gamma)?)
}

/// Scattering normalization `d_gamma = 2^{2 gamma} Gamma(gamma) / Gamma(-gamma)`,
/// defined for non-integer `gamma in (0, n/2)`. Negative for `gamma in (0,1)`.
pub fn d_gamma(gamma: f64) -> Result<f64> {
    if gamma <= 0.0 || (gamma - gamma.round()).abs() <= INTEGER_GAMMA_GUARD {
        return Err(Error::Domain(format!(
            "d_gamma requires non-integer gamma > 0, got {gamma}"
        )));
    }
    Ok(4.0f64.powf(gamma) * specfun::gamma_real(gamma)? / specfun::gamma_real(-gamma)?)
}

/// All normalization constants for one `(n, gamma)` with `gamma in (0, 1)`,
/// the range on which the extension problem and its Hamiltonian live.
pub fn scattering_constants(n: u32, gamma: f64) -> Result<NormalizationConstants> {
    check_gamma_range(n, gamma)?;
    if gamma >= 1.0 {
        return Err(Error::Domain(format!(
            "scattering constants require gamma in (0,1), got {gamma}"
        )));
    }
    let c_ngamma = yamabe_constant(n, gamma)?;
    let d = d_gamma(gamma)?;
    let dtilde = -d / (2.0 * gamma);
    let h = n as f64 / 2.0;
    let kappa = std::f64::consts::PI.powf(-h)
        * 4.0f64.powf(gamma)
        * gamma
        * specfun::gamma_real(h + gamma)?
        / specfun::gamma_real(1.0 - gamma)?;
    let c_ham = (n as f64 - 2.0 * gamma) / (2.0 * n as f64) * c_ngamma / dtilde;
    Ok(NormalizationConstants {
        c_ngamma,
        d_gamma: d,
        dtilde_gamma: dtilde,
        kappa_ngamma: kappa,
        c_hamiltonian: c_ham,
        q_sphere: sphere_curvature(n, gamma)?,
    })
}

/// Applies `Theta^k_gamma` as a Fourier multiplier: coefficient-wise
/// multiplication of `vhat` by the symbol at the matching frequency.
pub fn apply_multiplier(
    vhat: &[Complex64],
    freqs: &[f64],
    params: &CylinderParams,
) -> Result<Vec<Complex64>> {
    if vhat.len() != freqs.len() {
        return Err(Error::Domain(format!(
            "coefficient/frequency length mismatch: {} vs {}",
            vhat.len(),
            freqs.len()
        )));
    }
    vhat.iter()
        .zip(freqs)
        .map(|(&c, &xi)| Ok(c * theta(params, xi)?))
        .collect()
}
