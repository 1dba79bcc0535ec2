//! The classical `gamma = 1` system on the cylinder: the second-order Fowler
//! ODE `v'' = (n-2)^2/4 (v - v^{(n+2)/(n-2)})`, its first integral, orbit
//! integration and period extraction. This is the ground truth the fractional
//! linearization must limit onto as `gamma -> 1`.

use crate::error::{Error, Result};

/// Phase-space state of the Fowler system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FowlerState {
    pub v: f64,
    pub vdot: f64,
    pub n: u32,
}

impl FowlerState {
    pub fn new(v: f64, vdot: f64, n: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("Fowler system needs n >= 3, got {n}")));
        }
        if v <= 0.0 {
            return Err(Error::Domain(format!("v = {v} must be positive")));
        }
        Ok(FowlerState { v, vdot, n })
    }
}

/// First integral
/// `H_1 = v'^2/2 + (n-2)^2/4 ((n-2)/(2n) v^{2n/(n-2)} - v^2/2)`,
/// conserved along exact trajectories. The equilibrium `v = 1` sits at the
/// level `-(n-2)^2/(4n)`; the homoclinic orbit sits at level `0`.
pub fn h1(state: &FowlerState) -> f64 {
    let n = state.n as f64;
    let c = (n - 2.0) * (n - 2.0) / 4.0;
    0.5 * state.vdot * state.vdot
        + c * ((n - 2.0) / (2.0 * n) * state.v.powf(2.0 * n / (n - 2.0))
            - 0.5 * state.v * state.v)
}

/// Energy of the equilibrium `v = 1`: `-(n-2)^2/(4n)`.
pub fn equilibrium_level(n: u32) -> f64 {
    let nf = n as f64;
    -(nf - 2.0) * (nf - 2.0) / (4.0 * nf)
}

fn accel(v: f64, n: f64) -> f64 {
    (n - 2.0) * (n - 2.0) / 4.0 * (v - v.powf((n + 2.0) / (n - 2.0)))
}

/// One RK4 step of the system `v' = w`, `w' = accel(v)`.
fn rk4_step(v: f64, w: f64, n: f64, dt: f64) -> (f64, f64) {
    let (k1v, k1w) = (w, accel(v, n));
    let (k2v, k2w) = (w + 0.5 * dt * k1w, accel(v + 0.5 * dt * k1v, n));
    let (k3v, k3w) = (w + 0.5 * dt * k2w, accel(v + 0.5 * dt * k2v, n));
    let (k4v, k4w) = (w + dt * k3w, accel(v + dt * k3v, n));
    (
        v + dt * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0,
        w + dt * (k1w + 2.0 * k2w + 2.0 * k3w + k4w) / 6.0,
    )
}

/// Sampled trajectory with its conservation diagnostics.
#[derive(Debug, Clone)]
pub struct Orbit {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    pub vdot: Vec<f64>,
    pub h1: Vec<f64>,
    /// `max_t |H_1(t) - H_1(0)|` over the recorded samples.
    pub max_drift: f64,
}

/// Fixed-step RK4 integration of the Fowler ODE up to `t_end`, recording every
/// step. Errors out if the orbit loses positivity.
pub fn integrate_orbit(initial: &FowlerState, t_end: f64, dt: f64) -> Result<Orbit> {
    if dt <= 0.0 || t_end <= 0.0 {
        return Err(Error::Domain(format!(
            "need positive dt and t_end, got dt = {dt}, t_end = {t_end}"
        )));
    }
    let n = initial.n as f64;
    let steps = (t_end / dt).ceil() as usize;
    let mut t = Vec::with_capacity(steps + 1);
    let mut vs = Vec::with_capacity(steps + 1);
    let mut ws = Vec::with_capacity(steps + 1);
    let mut hs = Vec::with_capacity(steps + 1);
    let h0 = h1(initial);
    let mut v = initial.v;
    let mut w = initial.vdot;
    let mut max_drift = 0.0f64;
    t.push(0.0);
    vs.push(v);
    ws.push(w);
    hs.push(h0);
    for i in 1..=steps {
        let (nv, nw) = rk4_step(v, w, n, dt);
        v = nv;
        w = nw;
        let ti = i as f64 * dt;
        if v <= 0.0 {
            return Err(Error::PositivityLoss { t: ti, v });
        }
        let h = h1(&FowlerState { v, vdot: w, n: initial.n });
        max_drift = max_drift.max((h - h0).abs());
        t.push(ti);
        vs.push(v);
        ws.push(w);
        hs.push(h);
    }
    Ok(Orbit {
        t,
        v: vs,
        vdot: ws,
        h1: hs,
        max_drift,
    })
}

/// Period of a closed orbit through `initial`, detected on the section
/// `v' = 0`.
///
/// Requires the initial state inside the bounded component: energy strictly
/// between the equilibrium level and the homoclinic level `0`. The section
/// crossings are located by sign change of `v'` and refined on the cubic
/// Hermite interpolant of `v'` (values and slopes `v''` at the bracketing
/// steps); the period is the time of the second crossing.
pub fn orbit_period(initial: &FowlerState) -> Result<f64> {
    orbit_period_with_step(initial, 1e-3)
}

pub fn orbit_period_with_step(initial: &FowlerState, dt: f64) -> Result<f64> {
    let level = h1(initial);
    if level >= 0.0 || level <= equilibrium_level(initial.n) {
        return Err(Error::Domain(format!(
            "initial state is outside the bounded component: H1 = {level}"
        )));
    }
    let n = initial.n as f64;
    // Generous bound: periods grow toward the homoclinic but stay modest at
    // the energies reachable with v in (0, ~2); cap the search window.
    let t_max = 2000.0;
    let steps = (t_max / dt).ceil() as usize;
    let mut v = initial.v;
    let mut w = initial.vdot;
    let mut crossings = Vec::new();
    let start_on_section = w == 0.0;
    for i in 0..steps {
        let t0 = i as f64 * dt;
        let (nv, nw) = rk4_step(v, w, n, dt);
        if nv <= 0.0 {
            return Err(Error::PositivityLoss { t: t0 + dt, v: nv });
        }
        if w != 0.0 && (w.signum() != nw.signum() || nw == 0.0) {
            // refine the crossing time inside [t0, t0 + dt] on the Hermite
            // cubic of v' built from (w, accel(v)) and (nw, accel(nv))
            let tau = refine_crossing(w, accel(v, n) * dt, nw, accel(nv, n) * dt);
            crossings.push(t0 + tau * dt);
            let needed = if start_on_section { 2 } else { 3 };
            if crossings.len() == needed {
                return Ok(if start_on_section {
                    crossings[1]
                } else {
                    crossings[2] - crossings[0]
                });
            }
        }
        v = nv;
        w = nw;
    }
    Err(Error::NonConvergence(format!(
        "no period detected within t = {t_max}; orbit may not be closed"
    )))
}

/// Root in `[0, 1]` of the cubic Hermite interpolant with endpoint values
/// `f0`, `f1` and endpoint derivatives `d0`, `d1` (already scaled by the step
/// length). Falls back to the secant point if the bisection degenerates.
fn refine_crossing(f0: f64, d0: f64, f1: f64, d1: f64) -> f64 {
    let hermite = |s: f64| {
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * f0 + h10 * d0 + h01 * f1 + h11 * d1
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let (flo, fhi) = (hermite(lo), hermite(hi));
    if flo == 0.0 {
        return 0.0;
    }
    if flo.signum() == fhi.signum() {
        return f0 / (f0 - f1); // secant fallback
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let fm = hermite(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Minimal period of the linearization at the equilibrium,
/// `L_1 = 2 pi / sqrt(n - 2)`.
pub fn minimal_period(n: u32) -> f64 {
    2.0 * std::f64::consts::PI / ((n as f64 - 2.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn h1_reference_values() {
        let s = FowlerState::new(1.0, 0.0, 3).unwrap();
        assert_relative_eq!(h1(&s), -1.0 / 12.0, epsilon = 1e-15);
        let s = FowlerState::new(1.0, 0.0, 4).unwrap();
        assert_relative_eq!(h1(&s), -0.25, epsilon = 1e-15);
        // homoclinic level: H1 -> 0 as (v, v') -> (0, 0)
        let s = FowlerState::new(1e-9, 0.0, 3).unwrap();
        assert!(h1(&s).abs() < 1e-18);
        assert_relative_eq!(equilibrium_level(3), -1.0 / 12.0, epsilon = 1e-15);
    }

    #[test]
    fn equilibrium_is_stationary() {
        let orbit = integrate_orbit(&FowlerState::new(1.0, 0.0, 3).unwrap(), 10.0, 1e-2).unwrap();
        assert!(orbit.max_drift < 1e-16);
        for &v in &orbit.v {
            assert_relative_eq!(v, 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn h1_drift_stays_small() {
        let orbit =
            integrate_orbit(&FowlerState::new(0.5, 0.0, 3).unwrap(), 50.0, 1e-3).unwrap();
        assert!(
            orbit.max_drift <= 1e-8,
            "H1 drift {} exceeds 1e-8 over 50 time units",
            orbit.max_drift
        );
    }

    #[test]
    fn near_homoclinic_orbit_has_long_period() {
        // a level just below the homoclinic one: bounded, long period
        let n = 3u32;
        // choose v0 small on the inner branch; H1(v0, 0) < 0 but close to 0
        let v0 = 0.05;
        let state = FowlerState::new(v0, 0.0, n).unwrap();
        assert!(h1(&state) < 0.0 && h1(&state) > equilibrium_level(n));
        let p = orbit_period_with_step(&state, 1e-3).unwrap();
        let p_mid = orbit_period_with_step(&FowlerState::new(0.5, 0.0, n).unwrap(), 1e-3).unwrap();
        assert!(p > p_mid, "period should grow toward the homoclinic: {p} vs {p_mid}");
    }

    #[test]
    fn period_reference_values() {
        // frozen from high-precision action quadrature of the level sets
        let p = orbit_period_with_step(&FowlerState::new(0.5, 0.0, 3).unwrap(), 1e-3).unwrap();
        assert_relative_eq!(p, 8.12962959055379741, max_relative = 1e-7);
        let p = orbit_period_with_step(&FowlerState::new(1.2, 0.0, 3).unwrap(), 1e-3).unwrap();
        assert_relative_eq!(p, 7.00826364732328511, max_relative = 1e-7);
        let p = orbit_period_with_step(&FowlerState::new(0.8, 0.0, 4).unwrap(), 1e-3).unwrap();
        assert_relative_eq!(p, 4.55925379003288267, max_relative = 1e-7);
    }

    #[test]
    fn small_amplitude_period_is_linearized_period() {
        for n in [3u32, 4] {
            let p = orbit_period_with_step(&FowlerState::new(1.0 + 1e-3, 0.0, n).unwrap(), 1e-3)
                .unwrap();
            assert!(
                (p - minimal_period(n)).abs() <= 1e-3,
                "period({n}) = {p} vs L1 = {}",
                minimal_period(n)
            );
        }
    }

    #[test]
    fn period_monotone_in_amplitude() {
        let p_wide =
            orbit_period_with_step(&FowlerState::new(1.2, 0.0, 3).unwrap(), 1e-3).unwrap();
        let p_narrow =
            orbit_period_with_step(&FowlerState::new(1.05, 0.0, 3).unwrap(), 1e-3).unwrap();
        assert!(p_wide > p_narrow);
    }

    #[test]
    fn unbounded_initial_states_rejected() {
        // H1 >= 0: outside the bounded component
        let s = FowlerState::new(2.5, 0.0, 3).unwrap();
        assert!(h1(&s) > 0.0);
        assert!(orbit_period(&s).is_err());
        assert!(FowlerState::new(-0.1, 0.0, 3).is_err());
        assert!(FowlerState::new(1.0, 0.0, 2).is_err());
    }
}
