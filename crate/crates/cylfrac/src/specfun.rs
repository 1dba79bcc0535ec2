//! Complex-argument special functions: Gamma, digamma, Beta and the Gauss
//! hypergeometric function.
//!
//! The implementations are tuned for the identities the rest of the crate
//! leans on: the recurrence `Gamma(z+1) = z Gamma(z)`, the duplication
//! formula, conjugation symmetry `Gamma(conj z) = conj Gamma(z)` (enforced
//! structurally by evaluating in the upper half-plane only), and the `2F1`
//! connection formula between the arguments `x` and `1 - x`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Euler-Mascheroni constant.
pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_7;

/// Lanczos coefficients, g = 4.7421875, 15 terms (Godfrey's set).
const LANCZOS_G: f64 = 4.742_187_5;
const LANCZOS_C0: f64 = 0.999_999_999_999_997_092;
const LANCZOS_COF: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];

fn is_nonpositive_integer(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0
}

/// Log-Gamma for `Re(z) >= 0.5` via the Lanczos series. Not exposed: callers
/// go through [`ln_gamma`], which handles the reflection half-plane.
fn ln_gamma_lanczos(z: Complex64) -> Complex64 {
    debug_assert!(z.re >= 0.5);
    let mut ser = Complex64::new(LANCZOS_C0, 0.0);
    for (j, c) in LANCZOS_COF.iter().enumerate() {
        ser += c / (z + j as f64 + 1.0);
    }
    let tmp = z + LANCZOS_G + 0.5;
    (z + 0.5) * tmp.ln() - tmp + (SQRT_TWO_PI * ser / z).ln()
}

/// Natural logarithm of the Gamma function.
///
/// For `Re(z) < 0.5` the value comes from the reflection formula in log form;
/// its imaginary part may then differ from the principal branch by a multiple
/// of `2 pi`, which is harmless for every caller in this crate (all consumers
/// exponentiate or take real parts of differences).
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if is_nonpositive_integer(z) {
        return Err(Error::GammaPole(z));
    }
    if z.im < 0.0 {
        return Ok(ln_gamma(z.conj())?.conj());
    }
    if z.re >= 0.5 {
        Ok(ln_gamma_lanczos(z))
    } else {
        // log Gamma(z) = log pi - log sin(pi z) - log Gamma(1 - z)
        let sin = (std::f64::consts::PI * z).sin();
        if sin == Complex64::new(0.0, 0.0) {
            return Err(Error::GammaPole(z));
        }
        Ok(Complex64::new(std::f64::consts::PI.ln(), 0.0)
            - sin.ln()
            - ln_gamma_lanczos(Complex64::new(1.0, 0.0) - z))
    }
}

/// Gamma function of a complex argument.
///
/// Conjugation symmetry holds exactly: arguments in the lower half-plane are
/// evaluated as `conj(Gamma(conj z))`.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    if is_nonpositive_integer(z) {
        return Err(Error::GammaPole(z));
    }
    if z.im < 0.0 {
        return Ok(gamma(z.conj())?.conj());
    }
    if z.re >= 0.5 {
        Ok(ln_gamma_lanczos(z).exp())
    } else {
        let sin = (std::f64::consts::PI * z).sin();
        if sin == Complex64::new(0.0, 0.0) {
            return Err(Error::GammaPole(z));
        }
        Ok(std::f64::consts::PI / (sin * ln_gamma_lanczos(Complex64::new(1.0, 0.0) - z).exp()))
    }
}

/// Gamma function restricted to real arguments.
pub fn gamma_real(x: f64) -> Result<f64> {
    Ok(gamma(Complex64::new(x, 0.0))?.re)
}

/// `|Gamma(z)|^2`, evaluated as `Gamma(z) * Gamma(conj z)`.
pub fn abs_gamma_sq(z: Complex64) -> Result<f64> {
    let g = gamma(z)?;
    Ok(g.norm_sqr())
}

/// `log |Gamma(z)|^2 = 2 Re log Gamma(z)`, the overflow-safe form used by the
/// symbol and linearization modules.
pub fn ln_abs_gamma_sq(z: Complex64) -> Result<f64> {
    Ok(2.0 * ln_gamma(z)?.re)
}

/// Digamma function `psi(z) = Gamma'(z) / Gamma(z)`.
///
/// The argument is shifted by the recurrence `psi(z) = psi(z+1) - 1/z` until
/// `Re(z) > 10`, then the asymptotic Bernoulli series applies. The defining
/// series expansion is kept in the tests as the independent oracle.
pub fn digamma(z: Complex64) -> Result<Complex64> {
    if is_nonpositive_integer(z) {
        return Err(Error::GammaPole(z));
    }
    if z.im < 0.0 {
        return Ok(digamma(z.conj())?.conj());
    }
    let mut z = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while z.re <= 10.0 {
        acc -= 1.0 / z;
        z += 1.0;
    }
    // psi(z) ~ ln z - 1/(2z) - sum B_{2n} / (2n z^{2n})
    const COEF: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32760.0,
        1.0 / 12.0,
    ];
    let inv2 = 1.0 / (z * z);
    let mut series = Complex64::new(0.0, 0.0);
    let mut p = inv2;
    for c in COEF {
        series += c * p;
        p *= inv2;
    }
    Ok(acc + z.ln() - 0.5 / z - series)
}

/// Beta function `B(z1, z2) = Gamma(z1) Gamma(z2) / Gamma(z1 + z2)`, computed
/// in log space so that large arguments (needed by the asymptotic law
/// `B(z1, z2) ~ Gamma(z2) z1^{-z2}`) do not overflow.
pub fn beta(z1: Complex64, z2: Complex64) -> Result<Complex64> {
    let l = ln_gamma(z1)? + ln_gamma(z2)? - ln_gamma(z1 + z2)?;
    Ok(l.exp())
}

/// How [`hyp2f1`] decides between the direct power series and the `1 - x`
/// connection formula. `threshold` is the value of `x` above which the
/// connection route is taken.
#[derive(Debug, Clone, Copy)]
pub struct Hyp2F1Strategy {
    pub threshold: f64,
}

impl Default for Hyp2F1Strategy {
    fn default() -> Self {
        Hyp2F1Strategy { threshold: 0.75 }
    }
}

const HYP_MAX_TERMS: usize = 100_000;
const HYP_TOL: f64 = 1e-15;

/// Raw power series for `2F1(a, b; c; x)` with adaptive truncation: stop once
/// the term magnitude drops below `1e-15` of the partial sum for three
/// consecutive terms.
fn hyp2f1_series(a: Complex64, b: Complex64, c: Complex64, x: f64) -> Result<Complex64> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut small = 0u32;
    for n in 0..HYP_MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * x;
        sum += term;
        if term.norm() < HYP_TOL * sum.norm() {
            small += 1;
            if small >= 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergence(format!(
        "2F1 series at x = {x} exceeded {HYP_MAX_TERMS} terms"
    )))
}

/// Gauss hypergeometric function `2F1(a, b; c; x)` for real `x` with
/// `|x| < 1`, or `x = 1` when `Re(c - a - b) > 0`.
pub fn hyp2f1(a: Complex64, b: Complex64, c: Complex64, x: f64) -> Result<Complex64> {
    hyp2f1_with_strategy(a, b, c, x, Hyp2F1Strategy::default())
}

/// [`hyp2f1`] with an explicit series/connection switch point.
pub fn hyp2f1_with_strategy(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    x: f64,
    strategy: Hyp2F1Strategy,
) -> Result<Complex64> {
    if is_nonpositive_integer(c) {
        return Err(Error::HypPole(c));
    }
    if x == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("2F1 argument x = {x} outside [-1, 1]")));
    }
    if x > strategy.threshold {
        let s = c - a - b;
        let near_int = s.im.abs() < 1e-6 && (s.re - s.re.round()).abs() < 1e-6;
        if near_int {
            return Err(Error::NonConvergence(format!(
                "connection formula degenerate: c - a - b = {s} is within 1e-6 of an integer"
            )));
        }
        if x == 1.0 {
            if s.re <= 0.0 {
                return Err(Error::NonConvergence(
                    "2F1 at x = 1 requires Re(c - a - b) > 0".into(),
                ));
            }
            // Gauss summation: only the first connection term survives.
            return Ok((ln_gamma(c)? + ln_gamma(s)? - ln_gamma(c - a)? - ln_gamma(c - b)?).exp());
        }
        let u = 1.0 - x;
        let t1 = (ln_gamma(c)? + ln_gamma(s)? - ln_gamma(c - a)? - ln_gamma(c - b)?).exp()
            * hyp2f1_series(a, b, a + b - c + 1.0, u)?;
        let t2 = Complex64::new(u, 0.0).powc(s)
            * (ln_gamma(c)? + ln_gamma(-s)? - ln_gamma(a)? - ln_gamma(b)?).exp()
            * hyp2f1_series(c - a, c - b, -s + 1.0, u)?;
        Ok(t1 + t2)
    } else {
        hyp2f1_series(a, b, c, x)
    }
}
