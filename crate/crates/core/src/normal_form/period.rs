//! Anharmonic periods: from the normal form, and measured by integrating
//! the testbed Hamiltonian.

use std::f64::consts::TAU;

use super::engine::{lie_normalize, taylor_invariant_expansion, NfParams};
use super::poly::{InvariantPoly, W1, W2};
use crate::autodiff::Dual;
use crate::error::{Error, Result};
use crate::reduction::{check_chart, consolidated_excess_generic, ConsolidatedParams};

/// Linear normal-form coordinates `(Q1, P1, Q2, P2)` of a point `(q, u)`.
pub fn linear_normal_coordinates(cp: &ConsolidatedParams, x: [f64; 4]) -> [f64; 4] {
    let a = 2.0 * (cp.f1 + cp.f2);
    let b = cp.f1 - cp.f2;
    let [q1, q2, u1, u2] = x;
    [
        0.5 * (q1 / a - u2 / b),
        0.5 * (q2 / a + u1 / b),
        0.5 * (q2 / a - u1 / b),
        0.5 * (q1 / a + u2 / b),
    ]
}

/// `(w1, w2, v3, v4)` of phase-space coordinates `(Q1, P1, Q2, P2)`.
pub fn invariants(y: [f64; 4]) -> [f64; 4] {
    let [q1, p1, q2, p2] = y;
    [
        0.5 * (q1 * q1 + p1 * p1),
        0.5 * (q2 * q2 + p2 * p2),
        q1 * q2 - p1 * p2,
        q1 * p2 + q2 * p1,
    ]
}

/// Linear period `2π/(f1 − f2)` of the rotation of `(w3, w4)`.
pub fn linear_period(cp: &ConsolidatedParams) -> f64 {
    TAU / (cp.f1 - cp.f2)
}

/// Floating-point Birkhoff normal form through invariant degree 4.
#[derive(Debug, Clone)]
pub struct NormalForm {
    pub params: ConsolidatedParams,
    /// `4(f1 − f2)(f1 + f2)`: normal-form time per unit physical time.
    pub multiplier: f64,
    pub normal: InvariantPoly<f64>,
}

impl NormalForm {
    pub fn new(cp: &ConsolidatedParams) -> Result<Self> {
        super::check_params(cp)?;
        let p = NfParams::new(cp.f1, cp.f2, cp.mu);
        let h = taylor_invariant_expansion(&p, 4)?;
        Ok(Self {
            params: *cp,
            multiplier: p.multiplier(),
            normal: lie_normalize(&h, 4)?.normal,
        })
    }

    /// `H_2 + … + H_order` for `order ∈ {4, 6, 8}`.
    pub fn truncated(&self, order: u32) -> Result<InvariantPoly<f64>> {
        if !matches!(order, 4 | 6 | 8) {
            return Err(Error::Precondition(format!("normal-form order {order} not in {{4, 6, 8}}")));
        }
        Ok(self.normal.truncate(order / 2))
    }

    /// Period of the `(w3, w4)` rotation under the truncated normal form, in
    /// physical time: `2π·c/|∂H/∂w1 + ∂H/∂w2|` with `c` the multiplier.
    pub fn period(&self, w1: f64, w2: f64, order: u32) -> Result<f64> {
        if w1 < 0.0 || w2 < 0.0 {
            return Err(Error::Precondition("actions must be nonnegative".into()));
        }
        let h = self.truncated(order)?;
        let rate = rotation_rate(&h, w1, w2);
        if rate == 0.0 || !rate.is_finite() {
            return Err(Error::ZeroFrequency);
        }
        Ok(TAU * self.multiplier / rate.abs())
    }

    /// Normal-form period at the energy and SO(2) momentum of the phase
    /// point `x = (q, u)`. The momentum `w2 − w1` is preserved by the
    /// normalising transformation; `w1` is then fixed by the energy.
    pub fn matched_period(&self, x: [f64; 4], order: u32) -> Result<f64> {
        let h = self.truncated(order)?;
        let w = invariants(linear_normal_coordinates(&self.params, x));
        let momentum = w[W2] - w[W1];
        let energy = consolidated_excess_generic(&self.params, x);
        let mut w1 = w[W1];
        for _ in 0..50 {
            let w2 = w1 + momentum;
            let g = h.eval_f64(&[w1, w2, 0.0, 0.0]) - energy;
            let dw = g / rotation_rate(&h, w1, w2);
            w1 -= dw;
            if dw.abs() <= 1e-17 * w1.abs().max(1e-300) {
                break;
            }
        }
        self.period(w1, w1 + momentum, order)
    }
}

fn rotation_rate(h: &InvariantPoly<f64>, w1: f64, w2: f64) -> f64 {
    let x = [w1, w2, 0.0, 0.0];
    h.derivative(W1).eval_f64(&x) + h.derivative(W2).eval_f64(&x)
}

/// See [`NormalForm::period`].
pub fn nf_period(cp: &ConsolidatedParams, w1: f64, w2: f64, order: u32) -> Result<f64> {
    NormalForm::new(cp)?.period(w1, w2, order)
}

fn vector_field(cp: &ConsolidatedParams, x: &[f64; 4]) -> [f64; 4] {
    let g = consolidated_excess_generic(cp, Dual::<4>::seed(*x)).d;
    [g[2], g[3], -g[0], -g[1]]
}

fn rk4(cp: &ConsolidatedParams, x: &[f64; 4], h: f64) -> [f64; 4] {
    let add = |a: &[f64; 4], k: &[f64; 4], s: f64| [0, 1, 2, 3].map(|i| a[i] + s * k[i]);
    let k1 = vector_field(cp, x);
    let k2 = vector_field(cp, &add(x, &k1, 0.5 * h));
    let k3 = vector_field(cp, &add(x, &k2, 0.5 * h));
    let k4 = vector_field(cp, &add(x, &k3, h));
    [0, 1, 2, 3].map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

fn phase(cp: &ConsolidatedParams, x: &[f64; 4]) -> f64 {
    let w = invariants(linear_normal_coordinates(cp, *x));
    w[3].atan2(w[2])
}

fn wrap(a: f64) -> f64 {
    (a + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI
}

/// Time for the phase of `v3 + i·v4` to advance by a full turn, with
/// fixed RK4 step `h` and a root-found partial final step. The phase is
/// always compared with its initial value and time is `k·h`, so no
/// rounding accumulates over the many steps.
fn phase_period(cp: &ConsolidatedParams, x0: [f64; 4], h: f64, t_max: f64) -> Result<f64> {
    let theta0 = phase(cp, &x0);
    let mut x = x0;
    let mut prev = 0.0;
    let mut steps = 0u64;
    let mut direction = 0.0;
    while (steps as f64) * h < t_max {
        let t = steps as f64 * h;
        let next = rk4(cp, &x, h);
        let rel = wrap(phase(cp, &next) - theta0);
        let step = wrap(rel - prev);
        if direction == 0.0 {
            direction = step.signum();
        } else if step * direction < -1e-9 {
            return Err(Error::NotPeriodic(format!("phase reversed at t = {t}")));
        }
        // the relative phase passes through zero from the side opposite to
        // the direction of rotation exactly when a full turn completes
        if t > 0.0 && prev * direction < 0.0 && rel * direction >= 0.0 && step.abs() < std::f64::consts::PI {
            let residual = |tau: f64| direction * wrap(phase(cp, &rk4(cp, &x, tau)) - theta0);
            return Ok(t + bracket_root(residual, 0.0, h));
        }
        prev = rel;
        x = next;
        steps += 1;
    }
    Err(Error::NotPeriodic(format!("no full phase turn within t = {t_max}")))
}

/// Root of a function increasing on `[a, b]` by bisection with secant steps.
fn bracket_root(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        let mut m = if fb != fa { b - fb * (b - a) / (fb - fa) } else { 0.5 * (a + b) };
        if !(m > a && m < b) {
            m = 0.5 * (a + b);
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
        let mid = 0.5 * (a + b);
        if b - a <= 4.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE) {
            return mid;
        }
        // Bisect when secant steps stall near one end.
        let fmid = f(mid);
        if (fmid < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fmid;
        } else {
            b = mid;
            fb = fmid;
        }
    }
    0.5 * (a + b)
}

/// Steps per estimated period on the finest of the three grids.
const STEPS_PER_PERIOD: f64 = 16000.0;

/// Numerically measured period of the SO(2)-reduced orbit through
/// `ε·(q0, u0)`: the time for the phase of `(w3, w4)` in linear normal
/// coordinates to advance by 2π. RK4 on three step sizes `h, h/2, h/4`
/// with `h ≤ T0/4000`, then Richardson extrapolation of the `h⁴` and
/// `h⁵` error terms.
pub fn measure_period(cp: &ConsolidatedParams, q0: [f64; 2], u0: [f64; 2], epsilon: f64) -> Result<f64> {
    super::check_params(cp)?;
    let x0 = [epsilon * q0[0], epsilon * q0[1], epsilon * u0[0], epsilon * u0[1]];
    check_chart(x0[0], x0[1])?;
    let t0 = linear_period(cp);
    let t_max = 20.0 * t0;
    let rough = phase_period(cp, x0, t0 / 2000.0, t_max)?;
    let h = rough / (STEPS_PER_PERIOD / 4.0);
    let t1 = phase_period(cp, x0, h, t_max)?;
    let t2 = phase_period(cp, x0, h / 2.0, t_max)?;
    let t4 = phase_period(cp, x0, h / 4.0, t_max)?;
    // T(h) = T + C h⁴ + D h⁵
    let r1 = (16.0 * t2 - t1) / 15.0;
    let r2 = (16.0 * t4 - t2) / 15.0;
    Ok((32.0 * r2 - r1) / 31.0)
}
