//! Metric data of the AdS-type extension: coefficient functions of the
//! compactified metric, the lower-order term, the special defining function
//! `rho*`, the homoclinic bubble constant, and the monotone Gamma-ratio
//! `X(n, gamma)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::{self, Hyp2F1Strategy};
use crate::symbol;

/// Coefficients of the radial extension problem at one `rho in (0, 2)`:
///
/// ```text
/// e  = (1 + rho^2/4)   (1 - rho^2/4)^{n-1}
/// e1 = (1 + rho^2/4)^-1(1 - rho^2/4)^{n-1}
/// e2 = (n-1+a)/4 (1 - rho^2/4)^{n-2} (n - 2 + n rho^2/4)
/// ```
///
/// together with the lower-order term `E(rho)` of the divergence-form
/// equation, related by `e2 = E e rho^{-a}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricCoefficients {
    pub rho: f64,
    pub e: f64,
    pub e1: f64,
    pub e2: f64,
    /// `E(rho)`, the zeroth-order coefficient multiplying `V`.
    pub lower_order: f64,
}

/// The special defining function at one radial point, plus its right
/// endpoint `rho*_0 = alpha^{-1/(n/2 - gamma)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefiningFunction {
    pub rho_star: f64,
    pub rho_star_endpoint: f64,
}

/// The explicit homoclinic trace `v_inf(t) = C (cosh t)^{-(n-2 gamma)/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BubbleProfile {
    pub n: u32,
    pub gamma: f64,
    /// Normalization constant `C > 1`.
    pub c: f64,
}

impl BubbleProfile {
    pub fn new(n: u32, gamma: f64) -> Result<Self> {
        Ok(BubbleProfile {
            n,
            gamma,
            c: bubble_constant(n, gamma)?,
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        self.c * t.cosh().powf(-(self.n as f64 - 2.0 * self.gamma) / 2.0)
    }
}

/// Extension-metric coefficients at `rho in (0, 2)` for `gamma in (0, 1)`.
pub fn metric_coeffs(rho: f64, n: u32, gamma: f64) -> Result<MetricCoefficients> {
    if !(rho > 0.0 && rho < 2.0) {
        return Err(Error::Domain(format!("rho = {rho} outside (0, 2)")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Domain(format!("gamma = {gamma} outside (0, 1)")));
    }
    let a = 1.0 - 2.0 * gamma;
    let nf = n as f64;
    let plus = 1.0 + rho * rho / 4.0;
    let minus = 1.0 - rho * rho / 4.0;
    let e = plus * minus.powi(n as i32 - 1);
    let e1 = minus.powi(n as i32 - 1) / plus;
    let e2 = (nf - 1.0 + a) / 4.0 * minus.powi(n as i32 - 2) * (nf - 2.0 + nf * rho * rho / 4.0);
    let lower_order =
        (nf - 1.0 + a) / 4.0 * rho.powf(a) * (nf - 2.0 + nf * rho * rho / 4.0) / (plus * minus);
    Ok(MetricCoefficients {
        rho,
        e,
        e1,
        e2,
        lower_order,
    })
}

/// Connection coefficient `alpha` of the scattering solution at `k = 0`,
/// `xi = 0`: `alpha = Gamma(n/2) Gamma(gamma) / Gamma(n/4 + gamma/2)^2`.
pub fn alpha_zero_mode(n: u32, gamma: f64) -> Result<f64> {
    let nf = n as f64;
    Ok(specfun::gamma_real(nf / 2.0)? * specfun::gamma_real(gamma)?
        / specfun::gamma_real(nf / 4.0 + gamma / 2.0)?.powi(2))
}

/// The special defining function `rho*(rho)` that removes the lower-order
/// term from the extension problem:
///
/// ```text
/// (rho*)^{n/2 - gamma} = alpha^{-1} (4 rho / (4 + rho^2))^{n/2 - gamma}
///                        2F1(n/4 - gamma/2, n/4 - gamma/2; n/2; z^2),
/// z = (4 - rho^2) / (4 + rho^2),
/// ```
///
/// with `alpha` the zero-mode connection coefficient. Strictly increasing on
/// `(0, 2)` with `rho*(0+) = 0` and `rho*(2-) = alpha^{-1/(n/2 - gamma)}`.
pub fn special_defining_function(rho: f64, n: u32, gamma: f64) -> Result<DefiningFunction> {
    if !(rho > 0.0 && rho < 2.0) {
        return Err(Error::Domain(format!("rho = {rho} outside (0, 2)")));
    }
    if !(gamma > 0.0 && gamma < n as f64 / 2.0) {
        return Err(Error::Domain(format!("gamma = {gamma} outside (0, n/2)")));
    }
    if (gamma - gamma.round()).abs() <= symbol::INTEGER_GAMMA_GUARD {
        return Err(Error::Domain(format!(
            "special defining function requires non-integer gamma, got {gamma}"
        )));
    }
    let nf = n as f64;
    let p = nf / 2.0 - gamma;
    let alpha = alpha_zero_mode(n, gamma)?;
    let z = (4.0 - rho * rho) / (4.0 + rho * rho);
    let ab = Complex64::new(nf / 4.0 - gamma / 2.0, 0.0);
    let f = specfun::hyp2f1_with_strategy(
        ab,
        ab,
        Complex64::new(nf / 2.0, 0.0),
        z * z,
        Hyp2F1Strategy { threshold: 0.5 },
    )?
    .re;
    let val = (4.0 * rho / (4.0 + rho * rho)).powf(p) * f / alpha;
    Ok(DefiningFunction {
        rho_star: val.powf(1.0 / p),
        rho_star_endpoint: alpha.powf(-1.0 / p),
    })
}

/// Normalization constant of the homoclinic bubble,
/// `C = (c_{n,gamma} Gamma(n/2 - gamma) / Gamma(n/2 + gamma))^{-(n - 2 gamma)/(4 gamma)} > 1`.
pub fn bubble_constant(n: u32, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < n as f64 / 2.0) {
        return Err(Error::Domain(format!("gamma = {gamma} outside (0, n/2)")));
    }
    let nf = n as f64;
    let h = nf / 2.0;
    let ln_base = symbol::yamabe_constant(n, gamma)?.ln()
        + specfun::gamma_real(h - gamma)?.ln()
        - specfun::gamma_real(h + gamma)?.ln();
    Ok((-(nf - 2.0 * gamma) / (4.0 * gamma) * ln_base).exp())
}

/// The Gamma-ratio
/// `X(n, gamma) = [G((n/2+g)/2) / G((n/2-g)/2)] [G((n/2-g)/2 + 1/2) / G((n/2+g)/2 + 1/2)]`,
/// increasing in `n` and decreasing in `gamma`; `X(n, 0) = 1`, so `X < 1` for
/// `gamma > 0`. `n` is real so that monotonicity in `n` is testable by
/// differentiation.
pub fn x_function(n: f64, gamma: f64) -> Result<f64> {
    check_x_domain(n, gamma)?;
    let q = n / 4.0;
    let g2 = gamma / 2.0;
    Ok((specfun::gamma_real(q + g2)?.ln() - specfun::gamma_real(q - g2)?.ln()
        + specfun::gamma_real(q - g2 + 0.5)?.ln()
        - specfun::gamma_real(q + g2 + 0.5)?.ln())
    .exp())
}

fn check_x_domain(n: f64, gamma: f64) -> Result<()> {
    if !(gamma >= 0.0 && gamma < n / 2.0) {
        return Err(Error::Domain(format!(
            "X(n, gamma) requires 0 <= gamma < n/2, got n = {n}, gamma = {gamma}"
        )));
    }
    Ok(())
}

/// Partial derivatives `(d/dn log X, d/dgamma log X)` via digamma.
pub fn x_log_partials(n: f64, gamma: f64) -> Result<(f64, f64)> {
    check_x_domain(n, gamma)?;
    let psi = |x: f64| -> Result<f64> { Ok(specfun::digamma(Complex64::new(x, 0.0))?.re) };
    let q = n / 4.0;
    let g2 = gamma / 2.0;
    let dn = 0.25 * (psi(q + g2)? + psi(q - g2 + 0.5)? - psi(q - g2)? - psi(q + g2 + 0.5)?);
    let dg = 0.5 * (psi(q + g2)? - psi(q - g2 + 0.5)? + psi(q - g2)? - psi(q + g2 + 0.5)?);
    Ok((dn, dg))
}

/// The same partials through the explicit sign-definite series: the
/// independent route for the digamma-combination values.
///
/// ```text
/// d/dn     log X =  (gamma/4) sum_m (m + n/4 + 1/4) / D_m            > 0
/// d/dgamma log X = -(1/2) sum_m [(m + n/4)(m + n/4 + 1/2) + g^2/4] / D_m < 0
/// D_m = [(m + n/4)^2 - g^2/4] [(m + n/4 + 1/2)^2 - g^2/4]
/// ```
///
/// The summands decay like `1/m^2`, so the bare partial sums converge too
/// slowly for tight tolerances; the truncation is closed by a two-term
/// Richardson extrapolation of the partial sums at `terms/4`, `terms/2` and
/// `terms` (tail model `c1/M + c2/M^2`), leaving a residual `O(1/terms^3)`.
pub fn x_log_partials_series(n: f64, gamma: f64, terms: usize) -> Result<(f64, f64)> {
    check_x_domain(n, gamma)?;
    let g24 = gamma * gamma / 4.0;
    let terms = terms.max(16);
    let (m1, m2) = (terms / 4, terms / 2);
    let mut dn = 0.0;
    let mut dg = 0.0;
    let mut checkpoints = [(0.0, 0.0); 3];
    for m in 0..terms {
        let u = m as f64 + n / 4.0;
        let d = (u * u - g24) * ((u + 0.5) * (u + 0.5) - g24);
        dn += (u + 0.25) / d;
        dg += (u * (u + 0.5) + g24) / d;
        if m + 1 == m1 {
            checkpoints[0] = (dn, dg);
        } else if m + 1 == m2 {
            checkpoints[1] = (dn, dg);
        }
    }
    checkpoints[2] = (dn, dg);
    let extrapolate = |s: [f64; 3]| {
        // s = [S(M/4), S(M/2), S(M)], tail = c1/M + c2/M^2
        let e1 = s[2] - s[1]; //   c1/M + 3 c2/M^2
        let e2 = s[1] - s[0]; // 2 c1/M + 12 c2/M^2
        let x = 2.0 * e1 - e2 / 2.0;
        let y = (e2 - 2.0 * e1) / 6.0;
        s[2] + x + y
    };
    let dn = extrapolate([checkpoints[0].0, checkpoints[1].0, checkpoints[2].0]);
    let dg = extrapolate([checkpoints[0].1, checkpoints[1].1, checkpoints[2].1]);
    Ok((gamma / 4.0 * dn, -0.5 * dg))
}
