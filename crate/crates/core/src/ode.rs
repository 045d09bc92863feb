//! Adaptive Dormand-Prince 5(4) integration with a per-step projection hook.

use core::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::linalg::{CVec3, Pair};
use crate::math::pow;

/// State spaces the integrator can step in.
pub trait OdeState: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    /// Norm used for the local error estimate.
    fn magnitude(&self) -> f64;
}

impl OdeState for CVec3 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl OdeState for Pair {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    /// Local error target per step (states are kept at unit scale).
    pub tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { tol: 1e-12, initial_step: 1e-2, max_step: 0.1, min_step: 1e-12, max_steps: 2_000_000 }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions { tol, ..Self::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `dy/dt = field(t, y)` from `t0` to `t1` (either direction).
///
/// After every accepted step the state is passed through `post` (typically a
/// renormalisation and a projection back onto a constraint surface) and then
/// to `observe`.
pub fn integrate<V, F, P, O>(
    y0: V,
    t0: f64,
    t1: f64,
    opts: &OdeOptions,
    mut field: F,
    mut post: P,
    mut observe: O,
) -> Result<(V, OdeStats)>
where
    V: OdeState,
    F: FnMut(f64, &V) -> Result<V>,
    P: FnMut(&V) -> Result<V>,
    O: FnMut(f64, &V),
{
    let mut stats = OdeStats { accepted: 0, rejected: 0 };
    if t1 == t0 {
        return Ok((y0, stats));
    }
    let dir = if t1 > t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.initial_step.min(opts.max_step).min(span);
    let mut k1 = field(t, &y)?;
    while (t1 - t) * dir > 0.0 {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::NoConvergence { what: "flow integration", iterations: opts.max_steps, residual: t });
        }
        let remaining = (t1 - t).abs();
        let last = h >= remaining;
        let hs = if last { remaining } else { h };
        let sh = hs * dir;
        let k2 = field(t + C2 * sh, &(y + k1 * (A21 * sh)))?;
        let k3 = field(t + C3 * sh, &(y + k1 * (A31 * sh) + k2 * (A32 * sh)))?;
        let k4 = field(t + C4 * sh, &(y + k1 * (A41 * sh) + k2 * (A42 * sh) + k3 * (A43 * sh)))?;
        let k5 = field(
            t + C5 * sh,
            &(y + k1 * (A51 * sh) + k2 * (A52 * sh) + k3 * (A53 * sh) + k4 * (A54 * sh)),
        )?;
        let k6 = field(
            t + sh,
            &(y + k1 * (A61 * sh) + k2 * (A62 * sh) + k3 * (A63 * sh) + k4 * (A64 * sh) + k5 * (A65 * sh)),
        )?;
        let y5 = y + k1 * (B1 * sh) + k3 * (B3 * sh) + k4 * (B4 * sh) + k5 * (B5 * sh) + k6 * (B6 * sh);
        let k7 = field(t + sh, &y5)?;
        let err_vec = k1 * (E1 * sh) + k3 * (E3 * sh) + k4 * (E4 * sh) + k5 * (E5 * sh) + k6 * (E6 * sh) + k7 * (E7 * sh);
        let err = err_vec.magnitude() / opts.tol;
        if !err.is_finite() {
            return Err(Error::StepCollapse { t, step: hs });
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + sh };
            y = post(&y5)?;
            k1 = field(t, &y)?;
            stats.accepted += 1;
            observe(t, &y);
            let grow = if err < 1e-10 { 5.0 } else { (0.9 * pow(err, -0.2)).clamp(0.2, 5.0) };
            h = (hs * grow).min(opts.max_step);
        } else {
            stats.rejected += 1;
            let shrink = (0.9 * pow(err, -0.2)).clamp(0.1, 0.9);
            h = hs * shrink;
            if h < opts.min_step {
                return Err(Error::StepCollapse { t, step: h });
            }
        }
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, cis, ZERO};

    #[test]
    fn rotation_is_integrated_accurately() {
        let y0 = CVec3::new(c(1.0, 0.0), ZERO, ZERO);
        let (y, stats) = integrate(
            y0,
            0.0,
            3.0,
            &OdeOptions::with_tol(1e-12),
            |_, v: &CVec3| Ok(v.scale(c(0.0, 2.0))),
            |v| Ok(*v),
            |_, _| {},
        )
        .unwrap();
        assert!((y.0[0] - cis(6.0)).norm() < 1e-10);
        assert!(stats.accepted > 10);
    }

    #[test]
    fn backward_integration_inverts_forward() {
        let f = |t: f64, v: &CVec3| Ok(v.scale(c(-0.3 * t, 1.0)));
        let y0 = CVec3::real(0.2, -1.0, 0.5);
        let (y1, _) = integrate(y0, 0.0, 1.5, &OdeOptions::default(), f, |v| Ok(*v), |_, _| {}).unwrap();
        let (y2, _) = integrate(y1, 1.5, 0.0, &OdeOptions::default(), f, |v| Ok(*v), |_, _| {}).unwrap();
        assert!((y2 - y0).norm() < 1e-9);
    }

    #[test]
    fn blow_up_collapses_step() {
        let r = integrate(
            CVec3::real(1.0, 0.0, 0.0),
            0.0,
            2.0,
            &OdeOptions::default(),
            |_, v: &CVec3| Ok(CVec3::real(v.0[0].re * v.0[0].re * v.0[0].re, 0.0, 0.0)),
            |v| Ok(*v),
            |_, _| {},
        );
        assert!(matches!(r, Err(Error::StepCollapse { .. })));
    }
}
