//! Second-order splitting integrator for the reduced system with optional
//! momentum-preserving dissipation, and a classical RK4 reference stepper.
//!
//! The reduced Hamiltonian splits as `H0 + H1 + H2 + H3`, where `H0` is the
//! potential part `H(q, 0)`, `H1` geodesic motion on the unit sphere, `H2` a
//! radial dilation and `H3` a rigid rotation of the chart. Each piece, and the
//! dissipation field, is integrated exactly.

use serde::{Deserialize, Serialize};

use crate::autodiff::{Dual, Real};
use crate::error::{Error, Result};
use crate::model::BodyParams;
use crate::reduction::{
    chart_f, reduced_hamiltonian_generic, reduced_jacobian, so2_momentum, MomentumLevel, ReducedState, CHART_GUARD,
};

/// Body parameters and momentum level together with the two coefficients
/// the split Hamiltonians use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Splitting {
    pub body: BodyParams,
    pub nu: MomentumLevel,
    pub fp: f64,
    pub fl: f64,
}

impl Splitting {
    pub fn new(body: BodyParams, nu: MomentumLevel) -> Self {
        Self {
            body,
            nu,
            fp: body.m1 / body.det(),
            fl: body.ml() * nu.nu_a[2] / body.m1,
        }
    }

    /// The full reduced Hamiltonian.
    pub fn hamiltonian(&self, s: &ReducedState) -> f64 {
        reduced_hamiltonian_generic(&self.body, &self.nu, s.to_array())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub eps: f64,
    pub r_stop: f64,
    pub q_max: f64,
    pub sample_stride: usize,
}

impl IntegratorConfig {
    pub fn new(dt: f64, eps: f64) -> Self {
        Self {
            dt,
            eps,
            r_stop: 0.5,
            q_max: CHART_GUARD,
            sample_stride: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.dt > 0.0
            && self.dt.is_finite()
            && self.eps >= 0.0
            && 0.0 < self.r_stop
            && self.r_stop < self.q_max
            && self.q_max < 1.0
            && self.sample_stride > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!("invalid integrator configuration {self:?}")))
        }
    }
}

/// The four pieces of the split Hamiltonian.
pub fn split_hamiltonians<T: Real>(sp: &Splitting, x: [T; 4]) -> [T; 4] {
    let [q1, q2, p1, p2] = x;
    let zero = T::cst(0.0);
    let h0 = reduced_hamiltonian_generic(&sp.body, &sp.nu, [q1, q2, zero, zero]);
    let r2 = q1 * q1 + q2 * q2;
    let g3 = (T::cst(1.0) - r2).sqrt();
    let qp = q1 * p1 + q2 * p2;
    let h1 = (p1 * p1 + p2 * p2 - qp * qp).scale(0.5 * sp.fp);
    let h2 = (qp * g3).scale(sp.fp * sp.fl);
    let h3 = -(chart_f(r2) * (q1 * p2 - q2 * p1)).scale(sp.fp * sp.nu.nu_theta);
    [h0, h1, h2, h3]
}

/// Hamiltonian vector field of piece `k` of the splitting.
pub fn split_field(sp: &Splitting, k: usize, s: &ReducedState) -> [f64; 4] {
    let g = split_hamiltonians(sp, Dual::<4>::seed(s.to_array()))[k].d;
    [g[2], g[3], -g[0], -g[1]]
}

/// Radial dissipation field `R`: `q` fixed, `p` pushed along `q`.
pub fn dissipation_field(sp: &Splitting, s: &ReducedState) -> [f64; 4] {
    dissipation_generic(sp, s.to_array())
}

fn dissipation_generic<T: Real>(sp: &Splitting, x: [T; 4]) -> [T; 4] {
    let [q1, q2, p1, p2] = x;
    let r2 = q1 * q1 + q2 * q2;
    let g3 = (T::cst(1.0) - r2).sqrt();
    let k = -(q1 * p1 + q2 * p2) * g3 - r2.scale(sp.fl);
    [T::cst(0.0), T::cst(0.0), k * q1, k * q2]
}

/// Reduced Hamiltonian field plus `eps` times the dissipation.
pub fn combined_field(sp: &Splitting, eps: f64, s: &ReducedState) -> [f64; 4] {
    let g = reduced_hamiltonian_generic(&sp.body, &sp.nu, Dual::<4>::seed(s.to_array())).d;
    let r = dissipation_field(sp, s);
    [g[2], g[3], -g[0] + eps * r[2], -g[1] + eps * r[3]]
}

/// Exact Jacobian of [`combined_field`].
pub fn combined_jacobian(sp: &Splitting, eps: f64, s: &ReducedState) -> [[f64; 4]; 4] {
    let mut jac = reduced_jacobian(&sp.body, &sp.nu, s);
    let r = dissipation_generic(sp, Dual::<4>::seed(s.to_array()));
    for i in 2..4 {
        for j in 0..4 {
            jac[i][j] += eps * r[i].d[j];
        }
    }
    jac
}

fn sub_flow_guard(flow: &'static str, q1: f64, q2: f64, limit: f64) -> Result<()> {
    let radius = q1.hypot(q2);
    if radius <= limit {
        Ok(())
    } else {
        Err(Error::SubFlowChart { flow, radius })
    }
}

/// `expm1(z)/z`, continuous at zero.
fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-5 {
        1.0 + z / 2.0 + z * z / 6.0
    } else {
        z.exp_m1() / z
    }
}

/// Exact flow of `H0`: a momentum kick `p ← p − t∇H0(q)`.
pub fn flow_h0(t: f64, s: &ReducedState, sp: &Splitting) -> Result<ReducedState> {
    sub_flow_guard("H0", s.q1, s.q2, CHART_GUARD)?;
    let [q1, q2] = Dual::<2>::seed([s.q1, s.q2]);
    let zero = Dual::constant(0.0);
    let g = reduced_hamiltonian_generic(&sp.body, &sp.nu, [q1, q2, zero, zero]).d;
    Ok(ReducedState::new(s.q1, s.q2, s.p1 - t * g[0], s.p2 - t * g[1]))
}

/// Exact flow of `H1`: uniform motion along a great circle of the unit
/// sphere, lifted from `q` to `(q1, q2, Γ3)`.
pub fn flow_h1(t: f64, s: &ReducedState, sp: &Splitting) -> Result<ReducedState> {
    sub_flow_guard("H1", s.q1, s.q2, CHART_GUARD)?;
    let (q1, q2) = (s.q1, s.q2);
    let g3 = (1.0 - q1 * q1 - q2 * q2).sqrt();
    let qp = q1 * s.p1 + q2 * s.p2;
    let v0 = [sp.fp * (s.p1 - qp * q1), sp.fp * (s.p2 - qp * q2)];
    let v3 = -(q1 * v0[0] + q2 * v0[1]) / g3;
    let speed = (v0[0] * v0[0] + v0[1] * v0[1] + v3 * v3).sqrt();
    if speed == 0.0 {
        return Ok(*s);
    }
    let theta = speed * t;
    // the vertical component along the arc is `a cos θ + b sin θ`; it must
    // stay above the height of the chart guard
    let (a, b) = (g3, v3 / speed);
    let floor = (1.0 - CHART_GUARD * CHART_GUARD).sqrt();
    let (lo, hi) = if theta >= 0.0 { (0.0, theta) } else { (theta, 0.0) };
    let tau = std::f64::consts::TAU;
    let bottom = b.atan2(a) + std::f64::consts::PI;
    let k = ((lo - bottom) / tau).ceil();
    let lowest = if bottom + k * tau <= hi {
        -a.hypot(b)
    } else {
        let (sl, cl) = lo.sin_cos();
        let (sh, ch) = hi.sin_cos();
        (a * cl + b * sl).min(a * ch + b * sh)
    };
    if lowest < floor {
        let radius = if lowest <= 0.0 { 1.0 } else { (1.0 - lowest * lowest).sqrt() };
        return Err(Error::SubFlowChart { flow: "H1", radius });
    }
    let (sn, cs) = theta.sin_cos();
    let mut x = [
        cs * q1 + sn * v0[0] / speed,
        cs * q2 + sn * v0[1] / speed,
        cs * g3 + sn * v3 / speed,
    ];
    let mut v = [
        cs * v0[0] - sn * speed * q1,
        cs * v0[1] - sn * speed * q2,
        cs * v3 - sn * speed * g3,
    ];
    let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    x.iter_mut().for_each(|c| *c /= n);
    let radial = x[0] * v[0] + x[1] * v[1] + x[2] * v[2];
    for i in 0..3 {
        v[i] -= radial * x[i];
    }
    let k = v[2] / x[2];
    Ok(ReducedState::new(
        x[0],
        x[1],
        (v[0] - k * x[0]) / sp.fp,
        (v[1] - k * x[1]) / sp.fp,
    ))
}

/// Exact flow of `H2`: `q` moves along its ray with `|q|/(1 + Γ3)` growing
/// like `exp(Fp·Fl·t)`; `p` follows from conservation of `H2` and of the
/// diagonal-rotation momentum.
pub fn flow_h2(t: f64, s: &ReducedState, sp: &Splitting) -> Result<ReducedState> {
    sub_flow_guard("H2", s.q1, s.q2, CHART_GUARD)?;
    let r2 = s.q1 * s.q1 + s.q2 * s.q2;
    let g0 = (1.0 - r2).sqrt();
    let rho0_sq = r2 / ((1.0 + g0) * (1.0 + g0));
    let growth = (sp.fp * sp.fl * t).exp();
    let rho_sq = rho0_sq * growth * growth;
    if rho_sq >= 1.0 {
        return Err(Error::SubFlowChart { flow: "H2", radius: 1.0 });
    }
    let lambda = growth * (1.0 + rho0_sq) / (1.0 + rho_sq);
    let (q1, q2) = (lambda * s.q1, lambda * s.q2);
    sub_flow_guard("H2", q1, q2, CHART_GUARD)?;
    let g = (1.0 - rho_sq) / (1.0 + rho_sq);
    let qp = s.q1 * s.p1 + s.q2 * s.p2;
    let k = qp * (lambda * lambda - 1.0) / (g * (g + g0));
    Ok(ReducedState::new(
        q1,
        q2,
        (s.p1 + k * s.q1) / lambda,
        (s.p2 + k * s.q2) / lambda,
    ))
}

/// Exact flow of `H3`: `q` rotates rigidly at a rate fixed by `|q|`, and
/// `p` rotates with it plus a drift along `q` proportional to the conserved
/// momentum.
pub fn flow_h3(t: f64, s: &ReducedState, sp: &Splitting) -> Result<ReducedState> {
    sub_flow_guard("H3", s.q1, s.q2, CHART_GUARD)?;
    let r2 = s.q1 * s.q1 + s.q2 * s.q2;
    let g3 = (1.0 - r2).sqrt();
    let f = chart_f(r2);
    let k = sp.fp * sp.nu.nu_theta;
    let omega = k * f;
    let drift = k * so2_momentum(s) * f * f / g3;
    let (sn, cs) = (omega * t).sin_cos();
    let rot = |a: f64, b: f64| (cs * a + sn * b, -sn * a + cs * b);
    let (q1, q2) = rot(s.q1, s.q2);
    let (p1, p2) = rot(s.p1 + drift * t * s.q1, s.p2 + drift * t * s.q2);
    Ok(ReducedState::new(q1, q2, p1, p2))
}

/// Exact flow of `eps·R`. Only the component of `p` along `q` changes, so
/// the diagonal-rotation momentum is untouched.
pub fn flow_dissipation(t: f64, s: &ReducedState, sp: &Splitting, eps: f64) -> ReducedState {
    if eps == 0.0 {
        return *s;
    }
    let r2 = s.q1 * s.q1 + s.q2 * s.q2;
    let g3 = (1.0 - r2).sqrt();
    let qp = s.q1 * s.p1 + s.q2 * s.p2;
    let rate = eps * g3 * r2;
    let k = -eps * (g3 * qp + sp.fl * r2) * t * phi1(-rate * t);
    ReducedState::new(s.q1, s.q2, s.p1 + k * s.q1, s.p2 + k * s.q2)
}

/// One palindromic step `G½ F0½ F3½ F2½ F1 F2½ F3½ F0½ G½`.
pub fn step(s: &ReducedState, cfg: &IntegratorConfig, sp: &Splitting) -> Result<ReducedState> {
    let h = 0.5 * cfg.dt;
    let guard = |flow: &'static str, x: ReducedState| -> Result<ReducedState> {
        sub_flow_guard(flow, x.q1, x.q2, cfg.q_max)?;
        Ok(x)
    };
    let mut x = flow_dissipation(h, s, sp, cfg.eps);
    x = guard("H0", flow_h0(h, &x, sp)?)?;
    x = guard("H3", flow_h3(h, &x, sp)?)?;
    x = guard("H2", flow_h2(h, &x, sp)?)?;
    x = guard("H1", flow_h1(cfg.dt, &x, sp)?)?;
    x = guard("H2", flow_h2(h, &x, sp)?)?;
    x = guard("H3", flow_h3(h, &x, sp)?)?;
    x = guard("H0", flow_h0(h, &x, sp)?)?;
    Ok(flow_dissipation(h, &x, sp, cfg.eps))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    Escaped,
    ChartViolation,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::Completed => "completed",
            Termination::Escaped => "escaped",
            Termination::ChartViolation => "chart_violation",
        })
    }
}

/// Sampled trajectory. `energy` holds `H − H(s0)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<ReducedState>,
    pub radius: Vec<f64>,
    pub energy: Vec<f64>,
    pub so2_momentum: Vec<f64>,
    /// Largest radius over every step, not only the samples.
    pub max_r: f64,
    pub steps: usize,
    pub termination: Termination,
}

impl TrajectoryRecord {
    fn push(&mut self, t: f64, s: ReducedState, h: f64) {
        self.times.push(t);
        self.states.push(s);
        self.radius.push(s.radius());
        self.energy.push(h);
        self.so2_momentum.push(so2_momentum(&s));
    }

    pub fn final_state(&self) -> ReducedState {
        *self.states.last().expect("a record always holds the initial sample")
    }
}

/// Runs `n_steps` steps, sampling every `sample_stride` steps and stopping
/// early once `|q|` exceeds `r_stop` or a sub-flow leaves the chart.
pub fn integrate(s0: &ReducedState, cfg: &IntegratorConfig, sp: &Splitting, n_steps: usize) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    sub_flow_guard("initial", s0.q1, s0.q2, cfg.q_max)?;
    let h0 = sp.hamiltonian(s0);
    let mut rec = TrajectoryRecord {
        times: Vec::new(),
        states: Vec::new(),
        radius: Vec::new(),
        energy: Vec::new(),
        so2_momentum: Vec::new(),
        max_r: s0.radius(),
        steps: 0,
        termination: Termination::Completed,
    };
    rec.push(0.0, *s0, 0.0);
    let mut s = *s0;
    for n in 1..=n_steps {
        let t = n as f64 * cfg.dt;
        match step(&s, cfg, sp) {
            Ok(next) => s = next,
            Err(_) => {
                rec.termination = Termination::ChartViolation;
                rec.steps = n - 1;
                rec.max_r = 1.0_f64.min(rec.max_r.max(cfg.q_max));
                return Ok(rec);
            }
        }
        let r = s.radius();
        rec.max_r = rec.max_r.max(r);
        let escaped = r > cfg.r_stop;
        if n % cfg.sample_stride == 0 || escaped || n == n_steps {
            rec.push(t, s, sp.hamiltonian(&s) - h0);
        }
        if escaped {
            rec.termination = Termination::Escaped;
            rec.steps = n;
            return Ok(rec);
        }
    }
    rec.steps = n_steps;
    Ok(rec)
}

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_reference<const N: usize, F>(field: F, x: &[f64; N], dt: f64) -> [f64; N]
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let shift = |a: &[f64; N], k: &[f64; N], h: f64| {
        let mut out = *a;
        for i in 0..N {
            out[i] += h * k[i];
        }
        out
    };
    let k1 = field(x);
    let k2 = field(&shift(x, &k1, 0.5 * dt));
    let k3 = field(&shift(x, &k2, 0.5 * dt));
    let k4 = field(&shift(x, &k3, dt));
    let mut out = *x;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}
