//! End-to-end verification suite. Each criterion is a self-contained check
//! with pinned tolerances; the integration tests and the CLI `verify-all`
//! subcommand both run exactly these.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::extension::{
    neumann_trace, oracle_symbol, ExtensionField, HamiltonianEvaluator, QuadratureResolution,
};
use crate::geometry::{self, BubbleProfile};
use crate::linearization;
use crate::specfun;
use crate::symbol::{self, CylinderParams};
use crate::{fowler, Result};

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn status_line(&self) -> String {
        format!(
            "[{}] criterion {:2} {:32} {} ({:.2}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

fn run<F: FnOnce() -> Result<(bool, String)>>(
    id: u32,
    name: &'static str,
    body: F,
) -> CriterionResult {
    let start = Instant::now();
    let (passed, detail) = match body() {
        Ok(x) => x,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        id,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Criterion 1: the cylinder constant approaches `(n-2)^2/4` as the order
/// tends to one.
pub fn classical_limit_constant() -> CriterionResult {
    run(1, "classical-limit constant", || {
        let mut worst = 0.0f64;
        for n in 3..=8u32 {
            let c = symbol::yamabe_constant(n, 1.0 - 1e-6)?;
            let classical = ((n - 2) as f64).powi(2) / 4.0;
            worst = worst.max((c - classical).abs() / classical);
        }
        Ok((worst <= 1e-4, format!("max rel dev {worst:.2e} (tol 1e-4)")))
    })
}

/// Criterion 2: `Theta^0_gamma(0) = c_{n,gamma}` on a 20x20 grid.
pub fn symbol_identity_at_zero() -> CriterionResult {
    run(2, "symbol identity at zero", || {
        let mut worst = 0.0f64;
        let mut checked = 0;
        for n in 2..=21u32 {
            for j in 1..=20 {
                let gamma = n as f64 / 2.0 * j as f64 / 21.0;
                let params = match CylinderParams::new(n, gamma, 0) {
                    Ok(p) if !p.gamma_is_near_integer() => p,
                    _ => continue,
                };
                let t = symbol::theta(&params, 0.0)?;
                let c = symbol::yamabe_constant(n, gamma)?;
                worst = worst.max((t - c).abs() / c);
                checked += 1;
            }
        }
        Ok((
            worst <= 1e-12 && checked >= 350,
            format!("max rel dev {worst:.2e} over {checked} pairs (tol 1e-12)"),
        ))
    })
}

/// Criterion 3: the fractional symbol at `|gamma - 1| = 1e-6` reduces to the
/// conformal-Laplacian symbol `xi^2 + (n-2)^2/4 - mu_k`, relative deviation
/// at most `1e-4` over the frequency grid.
pub fn integer_reduction() -> CriterionResult {
    run(3, "integer reduction", || {
        let mut worst = 0.0f64;
        for n in [3u32, 4, 5] {
            for k in [0u32, 1, 2] {
                for gamma in [1.0 - 1e-6, 1.0 + 1e-6] {
                    let params = CylinderParams::new(n, gamma, k)?;
                    for i in 0..=100 {
                        let xi = i as f64 * 0.1;
                        let t = symbol::theta(&params, xi)?;
                        let want = symbol::theta_integer(n, 1, k, xi)?;
                        worst = worst.max((t - want).abs() / want);
                    }
                }
            }
        }
        Ok((worst <= 1e-4, format!("max rel dev {worst:.2e} (tol 1e-4)")))
    })
}

/// Criterion 4: the mode-ODE oracle reproduces the closed-form symbol to
/// `1e-6` relative over the full test matrix.
pub fn oracle_equivalence() -> CriterionResult {
    run(4, "symbol oracle equivalence", || {
        let mut worst = 0.0f64;
        for n in [3u32, 4, 5] {
            for gamma in [0.3, 0.5, 0.7] {
                for k in [0u32, 1, 2] {
                    for xi in [0.0, 1.0, 2.0] {
                        let params = CylinderParams::new(n, gamma, k)?;
                        let oracle = oracle_symbol(&params, xi, 240)?;
                        let closed = symbol::theta(&params, xi)?;
                        worst = worst.max((oracle - closed).abs() / closed);
                    }
                }
            }
        }
        Ok((worst <= 1e-6, format!("max rel dev {worst:.2e} over 81 solves (tol 1e-6)")))
    })
}

/// Criterion 5: `lambda^0(n, 0.999)` within 0.05 of `n - 2`.
pub fn period_limit() -> CriterionResult {
    run(5, "linearized period limit", || {
        let mut worst = 0.0f64;
        for n in [3u32, 4, 5] {
            let r = linearization::solve_lambda(n, 0.999, 0)?;
            let lambda = r.lambda.ok_or_else(|| {
                crate::Error::Domain(format!("no root found at n = {n}, gamma = 0.999"))
            })?;
            worst = worst.max((lambda - (n as f64 - 2.0)).abs());
            let period = r.period.unwrap();
            if (period * lambda.sqrt() - 2.0 * std::f64::consts::PI).abs() > 1e-12 {
                return Ok((false, "period-lambda identity broken".into()));
            }
        }
        Ok((worst <= 0.05, format!("max |lambda - (n-2)| = {worst:.2e} (tol 0.05)")))
    })
}

/// Criterion 6: small-amplitude Fowler orbits recover `2 pi / sqrt(n-2)`.
pub fn fowler_period_consistency() -> CriterionResult {
    run(6, "classical period consistency", || {
        let mut worst = 0.0f64;
        for n in [3u32, 4] {
            let state = fowler::FowlerState::new(1.0 + 1e-3, 0.0, n)?;
            let p = fowler::orbit_period(&state)?;
            worst = worst.max((p - fowler::minimal_period(n)).abs());
        }
        Ok((worst <= 1e-3, format!("max |period - L1| = {worst:.2e} (tol 1e-3)")))
    })
}

const HAMILTONIAN_CASES: [(u32, f64); 3] = [(3, 0.5), (4, 0.3), (4, 0.7)];
const BASE_SAMPLES: usize = 8192;

fn bubble_field(n: u32, gamma: f64, samples: usize) -> Result<ExtensionField> {
    let bubble = BubbleProfile::new(n, gamma)?;
    let period = 40.0;
    ExtensionField::from_trace_fn(n, gamma, period, samples, move |t| {
        bubble.value(t - period / 2.0)
    })
}

fn spread_of<F: Fn(f64) -> crate::extension::HamiltonianValue>(eval: F) -> (f64, f64) {
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    let mut scale = 0.0f64;
    for dt in [0.0, 0.5, 1.0, 2.0, 4.0] {
        let h = eval(20.0 + dt);
        lo = lo.min(h.total);
        hi = hi.max(h.total);
        scale = scale.max(h.component_scale());
    }
    (hi - lo, scale)
}

/// Criterion 7: both Hamiltonians are constant along the bubble trace to
/// `1e-4` of the component scale, and halving the grid shrinks the spread by
/// a factor of at least two.
pub fn hamiltonian_constancy() -> CriterionResult {
    run(7, "Hamiltonian constancy", || {
        let mut detail = String::new();
        let mut ok = true;
        for (n, gamma) in HAMILTONIAN_CASES {
            let base = bubble_field(n, gamma, BASE_SAMPLES)?;
            let fine = bubble_field(n, gamma, 2 * BASE_SAMPLES)?;
            let res = QuadratureResolution::default();
            let ev_base = HamiltonianEvaluator::new(&base, res)?;
            let ev_fine = HamiltonianEvaluator::new(&fine, res.doubled())?;
            let (sp_h, sc_h) = spread_of(|t| ev_base.hamiltonian(t));
            let (sp_h2, _) = spread_of(|t| ev_fine.hamiltonian(t));
            let (sp_s, sc_s) = spread_of(|t| ev_base.hamiltonian_star(t));
            let (sp_s2, _) = spread_of(|t| ev_fine.hamiltonian_star(t));
            let rel_h = sp_h / sc_h;
            let rel_s = sp_s / sc_s;
            let ratio_h = sp_h / sp_h2.max(1e-300);
            let ratio_s = sp_s / sp_s2.max(1e-300);
            let case_ok = rel_h <= 1e-4 && rel_s <= 1e-4 && ratio_h >= 2.0 && ratio_s >= 2.0;
            ok &= case_ok;
            detail.push_str(&format!(
                "({n},{gamma}): H {rel_h:.1e} x{ratio_h:.1}, H* {rel_s:.1e} x{ratio_s:.1}; "
            ));
        }
        detail.push_str("(tol 1e-4, refinement >= 2x)");
        Ok((ok, detail))
    })
}

/// Criterion 8: the weighted Neumann trace of the bubble field satisfies the
/// nonlinear boundary condition to `1e-4` relative.
pub fn nonlinear_boundary_condition() -> CriterionResult {
    run(8, "nonlinear boundary condition", || {
        let mut worst = 0.0f64;
        for (n, gamma) in HAMILTONIAN_CASES {
            let field = bubble_field(n, gamma, BASE_SAMPLES)?;
            let c = symbol::yamabe_constant(n, gamma)?;
            let p = (n as f64 + 2.0 * gamma) / (n as f64 - 2.0 * gamma);
            let ts = [20.0, 21.0, 22.0];
            let flux = neumann_trace(&field, &ts)?;
            for (&t, &got) in ts.iter().zip(&flux) {
                let want = c * field.trace(t).powf(p);
                worst = worst.max((got - want).abs() / want.abs());
            }
        }
        Ok((worst <= 1e-4, format!("max rel dev {worst:.2e} (tol 1e-4)")))
    })
}

/// Criterion 9: the bubble constant exceeds one on the admissible grid and
/// approaches `sqrt(2)` at `(n, gamma) = (4, 1)`.
pub fn bubble_constant_checks() -> CriterionResult {
    run(9, "bubble constant", || {
        for n in 2..=10u32 {
            for j in 1..=9 {
                let gamma = j as f64 / 10.0;
                if gamma >= n as f64 / 2.0 {
                    continue;
                }
                if geometry::bubble_constant(n, gamma)? <= 1.0 {
                    return Ok((false, format!("C(n={n}, gamma={gamma}) <= 1")));
                }
            }
        }
        let dev = (geometry::bubble_constant(4, 1.0 - 1e-6)? - std::f64::consts::SQRT_2).abs();
        Ok((
            dev <= 1e-4,
            format!("C > 1 on grid; |C(4, 1-1e-6) - sqrt2| = {dev:.2e} (tol 1e-4)"),
        ))
    })
}

/// Criterion 10: monotonicity suite. Partial-derivative signs of `log X` on
/// a 50x50 grid with series/digamma cross-agreement, and positivity of
/// `(log F)'` at 1000 random points.
pub fn monotonicity_suite() -> CriterionResult {
    run(10, "monotonicity suite", || {
        for i in 0..50 {
            for j in 1..=50 {
                let n = 2.05 + 8.0 * i as f64 / 49.0;
                let gamma = 0.95 * (n / 2.0) * j as f64 / 51.0;
                let (dn, dg) = geometry::x_log_partials(n, gamma)?;
                if dn <= 0.0 || dg >= 0.0 {
                    return Ok((false, format!("sign violation at ({n}, {gamma})")));
                }
            }
        }
        // series-vs-digamma agreement on a subgrid
        let mut worst = 0.0f64;
        for i in 0..5 {
            for j in 1..=5 {
                let n = 3.0 + 6.0 * i as f64 / 4.0;
                let gamma = 0.9 * j as f64 / 5.0;
                let (dn, dg) = geometry::x_log_partials(n, gamma)?;
                let (dn_s, dg_s) = geometry::x_log_partials_series(n, gamma, 400_000)?;
                worst = worst.max((dn - dn_s).abs()).max((dg - dg_s).abs());
            }
        }
        if worst > 1e-8 {
            return Ok((false, format!("series/digamma deviation {worst:.2e} > 1e-8")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..1000 {
            let n = rng.gen_range(3..9u32);
            let gamma = rng.gen_range(0.05..0.95);
            let k = rng.gen_range(0..3u32);
            let beta = rng.gen_range(0.01..20.0);
            if linearization::log_f_prime(n, gamma, k, beta)? <= 0.0 {
                return Ok((
                    false,
                    format!("(log F)' <= 0 at (n={n}, gamma={gamma}, k={k}, beta={beta})"),
                ));
            }
        }
        Ok((
            true,
            format!("signs hold on 50x50; series dev {worst:.1e}; (log F)' > 0 at 1000 pts"),
        ))
    })
}

/// Criterion 11: the fitted leading-correction exponent and coefficient of
/// `rho*` match `2 gamma` and `2 c_{n,gamma}/((n-2 gamma) d_gamma)`.
pub fn rho_star_expansion() -> CriterionResult {
    run(11, "special defining function expansion", || {
        let mut detail = String::new();
        for (n, gamma) in [(3u32, 0.5), (5, 0.7)] {
            let c = symbol::yamabe_constant(n, gamma)?;
            let d = symbol::d_gamma(gamma)?;
            let kappa = (2.0 * c / ((n as f64 - 2.0 * gamma) * d)).abs();
            let npts = 25usize;
            let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
            for i in 0..npts {
                let rho = 1e-4 * 100f64.powf(i as f64 / (npts - 1) as f64);
                let r = geometry::special_defining_function(rho, n, gamma)?.rho_star;
                let x = rho.ln();
                let y = (r / rho - 1.0).abs().ln();
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
            }
            let nf = npts as f64;
            let slope = (nf * sxy - sx * sy) / (nf * sxx - sx * sx);
            let coeff = ((sy - slope * sx) / nf).exp();
            if (slope - 2.0 * gamma).abs() > 0.05 {
                return Ok((false, format!("(n={n}): exponent {slope} vs {}", 2.0 * gamma)));
            }
            if (coeff - kappa).abs() > 0.05 * kappa {
                return Ok((false, format!("(n={n}): coefficient {coeff} vs {kappa}")));
            }
            detail.push_str(&format!(
                "({n},{gamma}): exp dev {:.1e}, coeff dev {:.1e}; ",
                (slope - 2.0 * gamma).abs(),
                (coeff - kappa).abs() / kappa
            ));
        }
        detail.push_str("(tol 0.05 / 5%)");
        Ok((true, detail))
    })
}

/// Criterion 12: the special-function identity suite at its stated
/// tolerances, 100 randomized cases each with a fixed seed.
pub fn specfun_identity_suite() -> CriterionResult {
    run(12, "special-function identities", || {
        let mut rng = ChaCha8Rng::seed_from_u64(20240601);
        let z = |re: f64, im: f64| Complex64::new(re, im);
        // recurrence
        for _ in 0..100 {
            let mut p = z(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
            if p.im.abs() < 1e-3 && p.re < 0.5 {
                p.im += 0.1;
            }
            let lhs = specfun::gamma(p + 1.0)?;
            let rhs = p * specfun::gamma(p)?;
            if (lhs - rhs).norm() > 1e-12 * lhs.norm() {
                return Ok((false, format!("recurrence residual at {p}")));
            }
        }
        // duplication
        for _ in 0..100 {
            let p = z(rng.gen_range(0.1..15.0), rng.gen_range(-10.0..10.0));
            let lhs = specfun::gamma(p)? * specfun::gamma(p + 0.5)?;
            let rhs = Complex64::new(2.0, 0.0).powc(1.0 - 2.0 * p)
                * std::f64::consts::PI.sqrt()
                * specfun::gamma(2.0 * p)?;
            if (lhs - rhs).norm() > 1e-11 * lhs.norm() {
                return Ok((false, format!("duplication residual at {p}")));
            }
        }
        // conjugation (exact)
        for _ in 0..100 {
            let p = z(rng.gen_range(-10.0..10.0), rng.gen_range(0.01..10.0));
            if specfun::gamma(p.conj())? != specfun::gamma(p)?.conj() {
                return Ok((false, format!("conjugation broken at {p}")));
            }
        }
        // connection formula: direct series vs transformed path
        let mut done = 0;
        while done < 100 {
            let a = z(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            let b = z(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            let c = z(rng.gen_range(0.5..4.0), 0.0);
            let s = c - a - b;
            if s.im.abs() < 1e-3 && (s.re - s.re.round()).abs() < 1e-3 {
                continue;
            }
            let x: f64 = rng.gen_range(0.76..0.95);
            let direct = specfun::hyp2f1_with_strategy(
                a,
                b,
                c,
                x,
                specfun::Hyp2F1Strategy { threshold: 0.99 },
            )?;
            let connected = specfun::hyp2f1(a, b, c, x)?;
            if (direct - connected).norm() > 1e-10 * (1.0 + direct.norm()) {
                return Ok((false, format!("connection residual: a={a} b={b} c={c} x={x}")));
            }
            done += 1;
        }
        // Beta asymptotics: error shrinks monotonically as z1 doubles
        let z2 = 1.5;
        let mut last = f64::INFINITY;
        let mut z1 = 100.0;
        while z1 <= 10_000.0 {
            let ratio = specfun::beta(z(z1, 0.0), z(z2, 0.0))?.re * z1.powf(z2)
                / specfun::gamma_real(z2)?;
            let err = (ratio - 1.0).abs();
            if err >= last {
                return Ok((false, format!("Beta asymptotics not improving at z1 = {z1}")));
            }
            last = err;
            z1 *= 2.0;
        }
        // F(.;0) = 1 and argument symmetry
        for _ in 0..100 {
            let a = z(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let b = z(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let c = z(rng.gen_range(0.3..4.0), 0.0);
            if specfun::hyp2f1(a, b, c, 0.0)? != z(1.0, 0.0) {
                return Ok((false, "F(a,b;c;0) != 1".into()));
            }
            let x: f64 = rng.gen_range(-0.7..0.7);
            let lhs = specfun::hyp2f1(a, b, c, x)?;
            let rhs = specfun::hyp2f1(b, a, c, x)?;
            if (lhs - rhs).norm() > 1e-13 * (1.0 + lhs.norm()) {
                return Ok((false, "argument symmetry broken".into()));
            }
        }
        Ok((true, "recurrence, duplication, conjugation, connection, Beta, 2F1 all pass".into()))
    })
}

/// Criterion 13: the `f_k` conjecture scan; flags are reported, and the
/// expected observation (no violations) is the pass condition.
pub fn conjecture_scan_report() -> CriterionResult {
    run(13, "mode conjecture scan", || {
        let n_values: Vec<u32> = (3..=10).collect();
        let gammas: Vec<f64> = (1..=50).map(|j| j as f64 / 51.0).collect();
        let report = linearization::conjecture_scan(&n_values, &gammas, 3)?;
        let violations = report.k_monotonicity_violations.len()
            + report.f1_above_one_violations.len()
            + report.f1_gamma_monotonicity_violations.len();
        Ok((
            violations == 0,
            format!(
                "{} rows scanned; flagged rows: {} k-monotonicity, {} f1<=1, {} f1-gamma",
                report.rows.len(),
                report.k_monotonicity_violations.len(),
                report.f1_above_one_violations.len(),
                report.f1_gamma_monotonicity_violations.len()
            ),
        ))
    })
}

/// Runs all thirteen criteria in order.
pub fn run_all() -> Vec<CriterionResult> {
    vec![
        classical_limit_constant(),
        symbol_identity_at_zero(),
        integer_reduction(),
        oracle_equivalence(),
        period_limit(),
        fowler_period_consistency(),
        hamiltonian_constancy(),
        nonlinear_boundary_condition(),
        bubble_constant_checks(),
        monotonicity_suite(),
        rho_star_expansion(),
        specfun_identity_suite(),
        conjecture_scan_report(),
    ]
}
