//! Linearization of the constant-curvature equation around the cylinder
//! equilibrium: the Gamma-ratio function `F(beta)`, the unique positive root
//! of `F(beta) = 1` at mode `k = 0`, the resulting period `2 pi / sqrt(lambda)`,
//! and the numeric scan behind the no-periodic-solutions conjecture for
//! `k >= 1`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry;
use crate::specfun;
use crate::symbol::CylinderParams;

/// Outcome of the root solve for one `(n, gamma, k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizationResult {
    /// `lambda^k`, present only when `F(0) < 1` (guaranteed for `k = 0`).
    pub lambda: Option<f64>,
    /// `2 pi / sqrt(lambda)` whenever `lambda` is present.
    pub period: Option<f64>,
    /// `f_k = F(0)`; equals `(n - 2 gamma)/(n + 2 gamma)` at `k = 0`.
    pub f0: f64,
    /// Bracket `[lo, hi]` in `beta` handed to the bisection.
    pub bracket: (f64, f64),
}

fn ln_f_denominator(n: u32, gamma: f64) -> Result<f64> {
    let nf = n as f64;
    let xp = Complex64::new((nf / 2.0 + gamma) / 2.0, 0.0);
    let xm = Complex64::new((nf / 2.0 - gamma) / 2.0, 0.0);
    Ok(((nf + 2.0 * gamma) / (nf - 2.0 * gamma)).ln() + specfun::ln_abs_gamma_sq(xp)?
        - specfun::ln_abs_gamma_sq(xm)?)
}

fn ln_f(params: &CylinderParams, beta: f64) -> Result<f64> {
    let g = params.gamma();
    let d = params.sqrt_disc();
    let ak = Complex64::new(0.5 + g / 2.0 + d / 2.0, beta.abs());
    let atk = Complex64::new(0.5 - g / 2.0 + d / 2.0, beta.abs());
    Ok(specfun::ln_abs_gamma_sq(ak)? - specfun::ln_abs_gamma_sq(atk)?
        - ln_f_denominator(params.n(), g)?)
}

/// The ratio `F(beta)`, the left side of the linearized-period equation
/// normalized so that the root condition reads `F(beta) = 1`:
///
/// ```text
/// F(beta) = [|Gamma(alpha_k + i beta)|^2 / |Gamma(alpha~_k + i beta)|^2]
///         / [(n + 2 gamma)/(n - 2 gamma) (Gamma((n/2+gamma)/2) / Gamma((n/2-gamma)/2))^2]
/// ```
///
/// with `alpha_k = 1/2 + gamma/2 + sqrt((n/2-1)^2 - mu_k)/2` and
/// `alpha~_k = alpha_k - gamma`. Strictly increasing in `beta >= 0` and
/// unbounded.
pub fn f_beta(n: u32, gamma: f64, k: u32, beta: f64) -> Result<f64> {
    if beta < 0.0 {
        return Err(Error::Domain(format!("beta = {beta} must be >= 0")));
    }
    let params = CylinderParams::new(n, gamma, k)?;
    Ok(ln_f(&params, beta)?.exp())
}

/// `(log F)'(beta) = 2 Im[psi(alpha~_k + i beta) - psi(alpha_k + i beta)]`,
/// the digamma route.
pub fn log_f_prime(n: u32, gamma: f64, k: u32, beta: f64) -> Result<f64> {
    let params = CylinderParams::new(n, gamma, k)?;
    let g = params.gamma();
    let d = params.sqrt_disc();
    let ak = Complex64::new(0.5 + g / 2.0 + d / 2.0, beta);
    let atk = Complex64::new(0.5 - g / 2.0 + d / 2.0, beta);
    Ok(2.0 * (specfun::digamma(atk)? - specfun::digamma(ak)?).im)
}

/// `(log F)'(beta)` by its manifestly positive series:
///
/// ```text
/// 2 gamma beta sum_m (2m + 1 + D) /
///   { [(m + (1+D)/2)^2 - beta^2 - gamma^2/4]^2 + beta^2 (2m + 1 + D)^2 }
/// ```
///
/// with `D = sqrt((n/2-1)^2 - mu_k)`. Every summand is positive for
/// `beta, gamma > 0`, which is the monotonicity statement in series form.
pub fn log_f_prime_series(n: u32, gamma: f64, k: u32, beta: f64, terms: usize) -> Result<f64> {
    let params = CylinderParams::new(n, gamma, k)?;
    let d = params.sqrt_disc();
    let g24 = gamma * gamma / 4.0;
    let mut s = 0.0;
    for m in 0..terms {
        let mf = m as f64;
        let top = 2.0 * mf + 1.0 + d;
        let q = (mf + (1.0 + d) / 2.0).powi(2) - beta * beta - g24;
        s += top / (q * q + beta * beta * top * top);
    }
    Ok(2.0 * gamma * beta * s)
}

const BISECT_TOL: f64 = 1e-12;
const BISECT_MAX_IT: usize = 500;
const BRACKET_MAX_DOUBLINGS: usize = 60;

/// Solves `F(beta) = 1` for one mode.
///
/// When `f_k = F(0) < 1` the monotone unbounded `F` has a unique positive
/// root; the bracket starts at `[0, 1]` and doubles its right end until
/// `F > 1`, then plain bisection runs to `|F - 1| <= 1e-12`. The root gives
/// `lambda = (2 beta)^2` and `period = 2 pi / sqrt(lambda)`. When
/// `F(0) >= 1` (expected for every `k >= 1`) there is no positive root and
/// `lambda` is absent.
pub fn solve_lambda(n: u32, gamma: f64, k: u32) -> Result<LinearizationResult> {
    let f0 = f_beta(n, gamma, k, 0.0)?;
    if f0 >= 1.0 - 1e-14 {
        return Ok(LinearizationResult {
            lambda: None,
            period: None,
            f0,
            bracket: (0.0, 0.0),
        });
    }
    let mut hi = 1.0;
    let mut doublings = 0;
    while f_beta(n, gamma, k, hi)? <= 1.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > BRACKET_MAX_DOUBLINGS {
            return Err(Error::IterationLimit(format!(
                "bracket for F(beta) = 1 did not close after {BRACKET_MAX_DOUBLINGS} doublings"
            )));
        }
    }
    let bracket = (0.0, hi);
    let mut lo = 0.0;
    let mut hi_b = hi;
    let mut beta = 0.5 * hi;
    let mut converged = false;
    for _ in 0..BISECT_MAX_IT {
        beta = 0.5 * (lo + hi_b);
        let f = f_beta(n, gamma, k, beta)?;
        if (f - 1.0).abs() <= BISECT_TOL {
            converged = true;
            break;
        }
        if f < 1.0 {
            lo = beta;
        } else {
            hi_b = beta;
        }
    }
    if !converged {
        return Err(Error::IterationLimit(format!(
            "bisection for F(beta) = 1 at (n={n}, gamma={gamma}, k={k}) exceeded {BISECT_MAX_IT} iterations"
        )));
    }
    let lambda = (2.0 * beta).powi(2);
    Ok(LinearizationResult {
        lambda: Some(lambda),
        period: Some(2.0 * std::f64::consts::PI / lambda.sqrt()),
        f0,
        bracket,
    })
}

/// One row of the conjecture scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub n: u32,
    pub gamma: f64,
    pub k: u32,
    pub f_k: f64,
}

/// Report of the `f_k` scan. Records observations; never asserts.
#[derive(Debug, Clone, Default)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    /// `(n, gamma, k)` where `f_{k+1} <= f_k` broke monotonicity in `k`.
    pub k_monotonicity_violations: Vec<(u32, f64, u32)>,
    /// `(n, gamma)` where `f_1 <= 1`.
    pub f1_above_one_violations: Vec<(u32, f64)>,
    /// `(n, gamma)` where `f_1` failed to increase against the previous
    /// gamma grid point at the same `n`.
    pub f1_gamma_monotonicity_violations: Vec<(u32, f64)>,
}

/// Tabulates `f_k = F(0)` over the grid and flags the three numerically
/// observed behaviors from the conjecture: `f_k` increasing in `k`,
/// `f_1 > 1`, and `f_1` increasing in `gamma`.
pub fn conjecture_scan(n_values: &[u32], gammas: &[f64], k_max: u32) -> Result<ScanReport> {
    if n_values.is_empty() || gammas.is_empty() {
        return Err(Error::Domain("conjecture scan needs non-empty grids".into()));
    }
    let mut report = ScanReport::default();
    for &n in n_values {
        let mut prev_f1: Option<f64> = None;
        for &gamma in gammas {
            if gamma <= 0.0 || gamma >= n as f64 / 2.0 {
                return Err(Error::Domain(format!(
                    "scan gamma = {gamma} outside (0, n/2) for n = {n}"
                )));
            }
            let mut prev_fk: Option<f64> = None;
            let mut f1 = None;
            for k in 0..=k_max {
                let f_k = f_beta(n, gamma, k, 0.0)?;
                report.rows.push(ScanRow { n, gamma, k, f_k });
                if let Some(p) = prev_fk {
                    if f_k <= p {
                        report.k_monotonicity_violations.push((n, gamma, k));
                    }
                }
                if k == 1 {
                    f1 = Some(f_k);
                    if f_k <= 1.0 {
                        report.f1_above_one_violations.push((n, gamma));
                    }
                }
                prev_fk = Some(f_k);
            }
            if let (Some(now), Some(before)) = (f1, prev_f1) {
                if now <= before {
                    report.f1_gamma_monotonicity_violations.push((n, gamma));
                }
            }
            prev_f1 = f1.or(prev_f1);
        }
    }
    Ok(report)
}

/// Closed form for `f_1` used as a cross-check:
/// `f_1 = (n - 2 gamma)/(n + 2 gamma) X(n, gamma)^{-2}`.
pub fn f1_closed_form(n: u32, gamma: f64) -> Result<f64> {
    let x = geometry::x_function(n as f64, gamma)?;
    Ok((n as f64 - 2.0 * gamma) / (n as f64 + 2.0 * gamma) / (x * x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn f_at_zero_is_rational_for_k0() {
        for (n, gamma) in [(3u32, 0.5), (4, 0.3), (7, 2.1)] {
            let f0 = f_beta(n, gamma, 0, 0.0).unwrap();
            let want = (n as f64 - 2.0 * gamma) / (n as f64 + 2.0 * gamma);
            assert_relative_eq!(f0, want, max_relative = 1e-13);
            assert!(f0 < 1.0);
        }
    }

    #[test]
    fn f_is_increasing_and_unbounded() {
        let mut last = f_beta(4, 0.5, 0, 0.0).unwrap();
        for i in 1..200 {
            let beta = i as f64 * 0.05;
            let now = f_beta(4, 0.5, 0, beta).unwrap();
            assert!(now > last, "F not increasing at beta = {beta}");
            last = now;
        }
        assert!(f_beta(4, 0.5, 0, 50.0).unwrap() > 10.0);
        // log-space evaluation stays finite at extreme beta
        assert!(f_beta(4, 0.5, 0, 1e6).unwrap().is_finite());
    }

    #[test]
    fn f_consistent_with_symbol() {
        // Theta^k_gamma(2 beta) = c_{n,gamma} (n+2gamma)/(n-2gamma) F(beta)
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let n = rng.gen_range(3..8);
            let gamma = rng.gen_range(0.05..0.95);
            let k = rng.gen_range(0..3);
            let beta = rng.gen_range(0.0..10.0);
            let params = CylinderParams::new(n, gamma, k).unwrap();
            let lhs = symbol::theta(&params, 2.0 * beta).unwrap();
            let rhs = symbol::yamabe_constant(n, gamma).unwrap()
                * (n as f64 + 2.0 * gamma)
                / (n as f64 - 2.0 * gamma)
                * f_beta(n, gamma, k, beta).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn log_f_prime_routes_agree_and_are_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..40 {
            let n = rng.gen_range(3..8);
            let gamma = rng.gen_range(0.1..0.9);
            let k = rng.gen_range(0..3);
            let beta = rng.gen_range(0.01..5.0);
            let dig = log_f_prime(n, gamma, k, beta).unwrap();
            let ser = log_f_prime_series(n, gamma, k, beta, 100_000).unwrap();
            assert!(dig > 0.0);
            assert!(ser > 0.0);
            assert!(
                (dig - ser).abs() <= 1e-6 * dig.max(1.0),
                "routes disagree at (n={n}, gamma={gamma}, k={k}, beta={beta}): {dig} vs {ser}"
            );
        }
    }

    #[test]
    fn lambda_regression_n3_half() {
        // frozen root of beta coth(pi beta) = 2/pi (closed form at
        // n = 3, gamma = 1/2), solved independently at high precision
        let r = solve_lambda(3, 0.5, 0).unwrap();
        let lambda = r.lambda.unwrap();
        assert_relative_eq!(lambda, 1.486282803429032, max_relative = 1e-10);
        assert_relative_eq!(r.period.unwrap(), 5.153818758412289, max_relative = 1e-10);
        assert!((f_beta(3, 0.5, 0, lambda.sqrt() / 2.0).unwrap() - 1.0).abs() <= 1e-12);
        assert_relative_eq!(
            r.period.unwrap() * lambda.sqrt(),
            2.0 * std::f64::consts::PI,
            epsilon = 1e-12
        );
    }

    #[test]
    fn lambda_classical_limit() {
        for n in [3u32, 4, 5] {
            let r = solve_lambda(n, 0.999, 0).unwrap();
            let lambda = r.lambda.unwrap();
            assert!(
                (lambda - (n as f64 - 2.0)).abs() <= 0.05,
                "lambda({n}, 0.999) = {lambda}"
            );
        }
    }

    #[test]
    fn lambda_absent_for_k1() {
        // f_1 > 1 at these parameters, so no positive root by monotonicity
        let r = solve_lambda(4, 0.5, 1).unwrap();
        assert!(r.lambda.is_none());
        assert!(r.period.is_none());
        assert!(r.f0 > 1.0);
    }

    #[test]
    fn root_uniqueness_via_single_sign_change() {
        let r = solve_lambda(3, 0.5, 0).unwrap();
        let root_beta = r.lambda.unwrap().sqrt() / 2.0;
        let (lo, hi) = r.bracket;
        let mut sign_changes = 0;
        let mut prev = f_beta(3, 0.5, 0, lo).unwrap() - 1.0;
        for i in 1..=1000 {
            let beta = lo + (hi - lo) * i as f64 / 1000.0;
            let now = f_beta(3, 0.5, 0, beta).unwrap() - 1.0;
            if prev < 0.0 && now >= 0.0 {
                sign_changes += 1;
                assert!((beta - root_beta).abs() <= (hi - lo) / 1000.0 + 1e-9);
            }
            assert!(now > prev, "F not increasing inside the bracket");
            prev = now;
        }
        assert_eq!(sign_changes, 1);
    }

    #[test]
    fn scan_reproduces_closed_forms() {
        let gammas: Vec<f64> = (1..=20).map(|i| i as f64 / 21.0).collect();
        let report = conjecture_scan(&[3, 4, 5], &gammas, 3).unwrap();
        for row in &report.rows {
            if row.k == 0 {
                let want = (row.n as f64 - 2.0 * row.gamma) / (row.n as f64 + 2.0 * row.gamma);
                assert_relative_eq!(row.f_k, want, max_relative = 1e-12);
                assert!(row.f_k < 1.0);
            }
            if row.k == 1 {
                let want = f1_closed_form(row.n, row.gamma).unwrap();
                assert_relative_eq!(row.f_k, want, max_relative = 1e-11);
            }
        }
        assert!(report.k_monotonicity_violations.is_empty());
        assert!(report.f1_above_one_violations.is_empty());
        assert!(report.f1_gamma_monotonicity_violations.is_empty());
    }

    #[test]
    fn f1_tends_to_one_as_gamma_vanishes() {
        let mut last = f_beta(4, 0.5, 1, 0.0).unwrap();
        for gamma in [0.1, 0.01, 1e-3, 1e-4, 1e-6] {
            let f1 = f_beta(4, gamma, 1, 0.0).unwrap();
            assert!(f1 > 1.0);
            assert!(f1 < last, "f_1 decreasing toward 1 as gamma -> 0");
            last = f1;
        }
        assert_relative_eq!(f_beta(4, 1e-8, 1, 0.0).unwrap(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn scan_rejects_bad_grids() {
        assert!(conjecture_scan(&[], &[0.5], 2).is_err());
        assert!(conjecture_scan(&[3], &[1.7], 2).is_err());
    }
}
