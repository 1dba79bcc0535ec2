//! Gauss quadrature rules for the extension-problem integrals.
//!
//! The Hamiltonian integrands carry the degenerate weight `rho^a`,
//! `a = 1 - 2 gamma`, on `(0, 2)`, and behind it algebraic endpoint families
//! `rho^{2 gamma k + 2 m}` and `rho^{4 gamma - 2 + ...}` coming from the
//! boundary expansion of the extension field. The composite rule below uses a
//! Gauss-Jacobi panel with weight exponent `-|1 - 2 gamma|` on `(0, delta]`
//! (which renders the worst surviving family `rho^{2|1-2gamma|}`, tame for
//! Gauss nodes) and Gauss-Legendre on `[delta, 2)`.

use crate::error::{Error, Result};
use crate::specfun;

const NEWTON_EPS: f64 = 1e-14;
const NEWTON_MAX_IT: usize = 30;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..NEWTON_MAX_IT {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= NEWTON_EPS {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Nodes and weights of the `n`-point Gauss-Jacobi rule on `[-1, 1]` with
/// weight `(1 - x)^alf (1 + x)^bet`, nodes ascending. Requires
/// `alf, bet > -1`.
pub fn gauss_jacobi(n: usize, alf: f64, bet: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(alf > -1.0 && bet > -1.0) {
        return Err(Error::Domain(format!(
            "Jacobi weight exponents must exceed -1, got ({alf}, {bet})"
        )));
    }
    assert!(n >= 2);
    let nf = n as f64;
    let alfbet = alf + bet;
    // descending nodes, NR-style initial guesses refined by Newton
    let mut xd = vec![0.0; n];
    let mut wd = vec![0.0; n];
    for i in 0..n {
        let mut z: f64;
        if i == 0 {
            let an = alf / nf;
            let bn = bet / nf;
            let r1 = (1.0 + alf) * (2.78 / (4.0 + nf * nf) + 0.768 * an / nf);
            let r2 = 1.0 + 1.48 * an + 0.96 * bn + 0.452 * an * an + 0.83 * an * bn;
            z = 1.0 - r1 / r2;
        } else if i == 1 {
            let r1 = (4.1 + alf) / ((1.0 + alf) * (1.0 + 0.156 * alf));
            let r2 = 1.0 + 0.06 * (nf - 8.0) * (1.0 - 0.12 * alf) / nf;
            let r3 = 1.0 + 0.012 * bet * (1.0 + 0.25 * alf.abs()) / nf;
            z = xd[0] - (1.0 - xd[0]) * r1 * r2 * r3;
        } else if i == 2 {
            let r1 = (1.67 + 0.28 * alf) / (1.0 + 0.37 * alf);
            let r2 = 1.0 + 0.22 * (nf - 8.0) / nf;
            let r3 = 1.0 + 8.0 * bet / ((6.28 + bet) * nf * nf);
            z = xd[1] - (xd[0] - xd[1]) * r1 * r2 * r3;
        } else if i == n - 2 {
            let r1 = (1.0 + 0.235 * bet) / (0.766 + 0.119 * bet);
            let r2 = 1.0 / (1.0 + 0.639 * (nf - 4.0) / (1.0 + 0.71 * (nf - 4.0)));
            let r3 = 1.0 / (1.0 + 20.0 * alf / ((7.5 + alf) * nf * nf));
            z = xd[i - 1] + (xd[i - 1] - xd[i - 3]) * r1 * r2 * r3;
        } else if i == n - 1 {
            let r1 = (1.0 + 0.37 * bet) / (1.67 + 0.28 * bet);
            let r2 = 1.0 / (1.0 + 0.22 * (nf - 8.0) / nf);
            let r3 = 1.0 / (1.0 + 8.0 * alf / ((6.28 + alf) * nf * nf));
            z = xd[i - 1] + (xd[i - 1] - xd[i - 3]) * r1 * r2 * r3;
        } else {
            z = 3.0 * xd[i - 1] - 3.0 * xd[i - 2] + xd[i - 3];
        }
        let mut pp = 0.0;
        let mut p2 = 0.0;
        let mut converged = false;
        for _ in 0..NEWTON_MAX_IT {
            let mut temp = 2.0 + alfbet;
            let mut p1 = (alf - bet + temp * z) / 2.0;
            p2 = 1.0;
            for j in 2..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                temp = 2.0 * jf + alfbet;
                let a = 2.0 * jf * (jf + alfbet) * (temp - 2.0);
                let b = (temp - 1.0) * (alf * alf - bet * bet + temp * (temp - 2.0) * z);
                let c = 2.0 * (jf - 1.0 + alf) * (jf - 1.0 + bet) * temp;
                p1 = (b * p2 - c * p3) / a;
            }
            pp = (nf * (alf - bet - temp * z) * p1 + 2.0 * (nf + alf) * (nf + bet) * p2)
                / (temp * (1.0 - z * z));
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= NEWTON_EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::IterationLimit(format!(
                "Gauss-Jacobi Newton iteration stalled at node {i} of {n}"
            )));
        }
        xd[i] = z;
        let lg = |v: f64| specfun::gamma_real(v).map(|g| g.ln());
        wd[i] = ((lg(alf + nf)? + lg(bet + nf)? - lg(nf + 1.0)? - lg(nf + alfbet + 1.0)?).exp())
            * (2.0 * nf + alfbet)
            * 2f64.powf(alfbet)
            / (pp * p2);
    }
    xd.reverse();
    wd.reverse();
    Ok((xd, wd))
}

/// Composite rule evaluating `int_0^2 rho^a f(rho) drho` for the extension
/// weight `a = 1 - 2 gamma`: Gauss-Jacobi with weight exponent
/// `-|1 - 2 gamma|` on `(0, delta]` plus Gauss-Legendre on `[delta, 2)`.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    nodes: Vec<f64>,
    /// Effective weights: `sum_i eff_w[i] * f(nodes[i])` approximates
    /// `int_0^2 rho^a f(rho) drho`.
    eff_weights: Vec<f64>,
    delta: f64,
}

impl CompositeRule {
    /// Default split point between the Jacobi and Legendre panels.
    pub const DELTA: f64 = 0.1;

    pub fn new(gamma: f64, n_jacobi: usize, n_legendre: usize) -> Result<Self> {
        Self::with_delta(gamma, n_jacobi, n_legendre, Self::DELTA)
    }

    pub fn with_delta(gamma: f64, n_jacobi: usize, n_legendre: usize, delta: f64) -> Result<Self> {
        if !(0.0 < gamma && gamma < 1.0) {
            return Err(Error::Domain(format!(
                "composite rule requires gamma in (0,1), got {gamma}"
            )));
        }
        let a = 1.0 - 2.0 * gamma;
        // a > -1 always holds here; the quadrature-failure guard of the spec
        debug_assert!(a > -1.0);
        let wexp = -(1.0 - 2.0 * gamma).abs();
        let (xj, wj) = gauss_jacobi(n_jacobi, 0.0, wexp)?;
        let (xl, wl) = gauss_legendre(n_legendre);
        let mut nodes = Vec::with_capacity(n_jacobi + n_legendre);
        let mut eff = Vec::with_capacity(n_jacobi + n_legendre);
        let scale = (delta / 2.0).powf(1.0 + wexp);
        for (x, w) in xj.iter().zip(&wj) {
            let rho = delta * (x + 1.0) / 2.0;
            nodes.push(rho);
            // integrand carries rho^a; the Jacobi weight supplies rho^wexp
            eff.push(w * scale * rho.powf(a - wexp));
        }
        for (x, w) in xl.iter().zip(&wl) {
            let rho = delta + (2.0 - delta) * (x + 1.0) / 2.0;
            nodes.push(rho);
            eff.push(w * (2.0 - delta) / 2.0 * rho.powf(a));
        }
        Ok(CompositeRule {
            nodes,
            eff_weights: eff,
            delta,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn effective_weights(&self) -> &[f64] {
        &self.eff_weights
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `int_0^2 rho^a f(rho) drho`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.eff_weights)
            .map(|(&rho, &w)| w * f(rho))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_moments() {
        let (x, w) = gauss_legendre(12);
        for k in 0..=23u32 {
            let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k as i32)).sum();
            let want = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!(
                (got - want).abs() < 1e-14,
                "GL moment {k} wrong: {got} vs {want}"
            );
        }
    }

    #[test]
    fn jacobi_moments_against_beta_integrals() {
        // int_{-1}^{1} (1+x)^b x^k dx via substitution t = (1+x)/2:
        // 2^{b+1} sum_j C(k,j) 2^j (-1)^{k-j} B(b+j+1, 1)... simpler: compare
        // with high-order Gauss-Legendre applied to (1+x)^b * x^k away from
        // the singular endpoint is unreliable, so use the exact recursion
        // m_k = int (1+x)^b x^k dx = [2^{b+1} k! / prod_{j=0}^{k}(b+1+j)] * P
        // Easiest trustworthy check: moments of (1+x)^b against mpmath-frozen
        // values for b = -0.4.
        let b = -0.4;
        let (x, w) = gauss_jacobi(40, 0.0, b).unwrap();
        // m_k = int_{-1}^1 (1+x)^b x^k dx, frozen: computed from the binomial
        // expansion int_0^2 u^b (u-1)^k du with u = 1+x, exact rationals in
        // Gamma form: int_0^2 u^{b+j} du = 2^{b+j+1}/(b+j+1).
        let exact = |k: u32| -> f64 {
            let mut s = 0.0;
            for j in 0..=k {
                let binom = (0..j).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64);
                let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                s += binom * sign * 2f64.powf(b + j as f64 + 1.0) / (b + j as f64 + 1.0);
            }
            s
        };
        for k in 0..15u32 {
            let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k as i32)).sum();
            assert_relative_eq!(got, exact(k), max_relative = 1e-12);
        }
    }

    #[test]
    fn jacobi_reduces_to_legendre() {
        let (xj, wj) = gauss_jacobi(16, 0.0, 0.0).unwrap();
        let (xl, wl) = gauss_legendre(16);
        for i in 0..16 {
            assert_relative_eq!(xj[i], xl[i], epsilon = 1e-12);
            assert_relative_eq!(wj[i], wl[i], max_relative = 1e-12);
        }
    }

    #[test]
    fn composite_rule_weight_sanity() {
        // int_0^2 rho^a drho = 2^{1+a}/(1+a) to 1e-12, for gammas on both
        // sides of 1/2 (the Jacobi panel weight differs from rho^a below 1/2,
        // which costs polynomial order but keeps the field families tame).
        for (gamma, n_gj) in [(0.3, 2600), (0.5, 64), (0.7, 64), (0.45, 2600), (0.9, 64)] {
            let a = 1.0 - 2.0 * gamma;
            let rule = CompositeRule::new(gamma, n_gj, 200).unwrap();
            let got = rule.integrate(|_| 1.0);
            let want = 2f64.powf(1.0 + a) / (1.0 + a);
            assert!(
                (got - want).abs() <= 1e-12 * want.abs(),
                "gamma={gamma}: {got} vs {want} (rel {})",
                ((got - want) / want).abs()
            );
        }
    }

    #[test]
    fn composite_rule_smooth_integrand() {
        // int_0^2 rho^a cos(rho) drho, frozen by the same rule at much higher
        // order for one gamma, plus a cross-check between two resolutions.
        let rule = CompositeRule::new(0.7, 80, 240).unwrap();
        let fine = CompositeRule::new(0.7, 160, 480).unwrap();
        let got = rule.integrate(f64::cos);
        let want = fine.integrate(f64::cos);
        assert_relative_eq!(got, want, max_relative = 1e-12);
    }

    #[test]
    fn composite_rule_rejects_bad_gamma() {
        assert!(CompositeRule::new(1.2, 16, 16).is_err());
        assert!(CompositeRule::new(0.0, 16, 16).is_err());
    }
}
