//! Canonical slice coordinates for the reduction by translations and body
//! rotations about the symmetry axis.
//!
//! `(q1, q2)` are the horizontal components of the body-frame vertical Γ in a
//! frame comoving with the body spin, and `(p1, p2)` their conjugate momenta.
//! The reduced systems are parametrised by the conserved momenta
//! [`MomentumLevel`].

use serde::{Deserialize, Serialize};

use crate::autodiff::{Dual, Jet2, Real};
use crate::error::{Error, Result};
use crate::model::{cross, BodyParams, FullState, Vec3, E3};

/// Largest admissible `|q|`. Γ₃ = √(1 − |q|²) stays bounded away from zero.
pub const CHART_GUARD: f64 = 0.999;

pub type Mat3 = [[f64; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReducedState {
    pub q1: f64,
    pub q2: f64,
    pub p1: f64,
    pub p2: f64,
}

impl ReducedState {
    pub const ORIGIN: Self = Self {
        q1: 0.0,
        q2: 0.0,
        p1: 0.0,
        p2: 0.0,
    };

    pub fn new(q1: f64, q2: f64, p1: f64, p2: f64) -> Self {
        Self { q1, q2, p1, p2 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.q1, self.q2, self.p1, self.p2]
    }

    pub fn from_array(x: [f64; 4]) -> Self {
        Self::new(x[0], x[1], x[2], x[3])
    }

    #[inline]
    pub fn radius(&self) -> f64 {
        self.q1.hypot(self.q2)
    }

    /// Rotates `(q1, q2)` and `(p1, p2)` simultaneously by `angle`.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            q1: c * self.q1 - s * self.q2,
            q2: s * self.q1 + c * self.q2,
            p1: c * self.p1 - s * self.p2,
            p2: s * self.p1 + c * self.p2,
        }
    }
}

/// Conserved linear momentum `nu_a` and spin momentum `nu_theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumLevel {
    pub nu_a: Vec3,
    pub nu_theta: f64,
}

impl MomentumLevel {
    pub fn vertical(nu3: f64, nu_theta: f64) -> Self {
        Self {
            nu_a: [0.0, 0.0, nu3],
            nu_theta,
        }
    }

    /// Vertical momenta are fixed by the coadjoint action of rotations about
    /// the vertical; only there the extra SO(2) symmetry survives.
    pub fn is_vertical(&self) -> bool {
        self.nu_a[0] == 0.0 && self.nu_a[1] == 0.0
    }
}

/// Coefficients of the reduced Hamiltonian at vertical momentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedCoeffs {
    pub fp: f64,
    pub fq: f64,
    pub fl: f64,
}

impl DerivedCoeffs {
    pub fn new(p: &BodyParams, nu3: f64) -> Self {
        Self {
            fp: p.m1 / p.det(),
            fq: p.mgl() - nu3 * nu3 * (1.0 / p.m3 - 1.0 / p.m1),
            fl: p.ml() * nu3 / p.m1,
        }
    }
}

/// Two-parameter family (after an overall scaling) that carries the
/// nonlinear normal form: mode frequencies `f1 > f2 > 0` and the potential
/// coefficient `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsolidatedParams {
    pub f1: f64,
    pub f2: f64,
    pub mu: f64,
}

impl ConsolidatedParams {
    /// The parameter block of the published normal-form period check.
    pub fn table_one() -> Self {
        Self {
            f1: 5f64.sqrt() / 2.0,
            f2: 1.0,
            mu: 0.5,
        }
    }

    pub fn fp(&self) -> f64 {
        self.f1 + self.f2
    }

    pub fn fq(&self) -> f64 {
        -self.f1 * self.f2 / (self.f1 + self.f2)
    }
}

pub fn check_chart(q1: f64, q2: f64) -> Result<()> {
    let r2 = q1 * q1 + q2 * q2;
    if r2 <= CHART_GUARD * CHART_GUARD {
        Ok(())
    } else {
        Err(Error::ChartDomain {
            radius: r2.sqrt(),
            limit: CHART_GUARD,
        })
    }
}

/// `f = 1/(1 + √(1 − |q|²))`, the smooth root of `|q|²f² − 2f + 1 = 0`.
#[inline]
pub fn chart_f<T: Real>(r2: T) -> T {
    T::cst(1.0) / (T::cst(1.0) + (T::cst(1.0) - r2).sqrt())
}

/// The rotation `A(q)` carrying the vertical to the tilted body axis, with
/// `Aᵀe₃ = (q1, q2, √(1 − |q|²))`.
pub fn attitude_matrix(q1: f64, q2: f64) -> Result<Mat3> {
    check_chart(q1, q2)?;
    Ok(attitude_matrix_unchecked(q1, q2))
}

fn attitude_matrix_unchecked(q1: f64, q2: f64) -> Mat3 {
    let f = chart_f(q1 * q1 + q2 * q2);
    // x = −e₃ × q
    let x = [q2, -q1, 0.0];
    let xh = [[0.0, -x[2], x[1]], [x[2], 0.0, -x[0]], [-x[1], x[0], 0.0]];
    let mut a = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let sq: f64 = (0..3).map(|k| xh[i][k] * xh[k][j]).sum();
            a[i][j] = if i == j { 1.0 } else { 0.0 } + xh[i][j] + f * sq;
        }
    }
    a
}

fn mat_t_vec(a: &Mat3, v: Vec3) -> Vec3 {
    [
        a[0][0] * v[0] + a[1][0] * v[1] + a[2][0] * v[2],
        a[0][1] * v[0] + a[1][1] * v[1] + a[2][1] * v[2],
        a[0][2] * v[0] + a[1][2] * v[1] + a[2][2] * v[2],
    ]
}

/// Reduced Hamiltonian at a general momentum level, generic over the scalar
/// type so that gradients and Hessians come from automatic differentiation.
/// No chart check.
pub fn reduced_hamiltonian_generic<T: Real>(p: &BodyParams, nu: &MomentumLevel, x: [T; 4]) -> T {
    let [q1, q2, p1, p2] = x;
    let det = p.det();
    let ml_m1 = p.ml() / p.m1;
    let nt = nu.nu_theta;
    let r2 = q1 * q1 + q2 * q2;
    let g3 = (T::cst(1.0) - r2).sqrt();
    let f = T::cst(1.0) / (T::cst(1.0) + g3);
    let pt1 = p2 - (f * q1).scale(nt) - T::cst(ml_m1 * nu.nu_a[1]);
    let pt2 = -p1 - (f * q2).scale(nt) + T::cst(ml_m1 * nu.nu_a[0]);
    // ν·Γ⁻ with Γ⁻ = q1e₁ + q2e₂ − Γ₃e₃
    let nu_g = q1.scale(nu.nu_a[0]) + q2.scale(nu.nu_a[1]) - g3.scale(nu.nu_a[2]);
    let twist = q1 * pt2 - q2 * pt1;
    let kinetic = (pt1 * pt1 + pt2 * pt2 - twist * twist).scale(p.m1 / (2.0 * det));
    let axial = (nu_g * nu_g).scale(0.5 * (1.0 / p.m3 - p.i1 / det));
    let coupling = (twist * nu_g + pt1.scale(nu.nu_a[1]) - pt2.scale(nu.nu_a[0])).scale(p.ml() / det);
    kinetic + axial + coupling - g3.scale(p.mgl())
}

/// Vertical-momentum form written with [`DerivedCoeffs`]; differs from
/// [`reduced_hamiltonian_generic`] by a state-independent constant.
pub fn reduced_hamiltonian_vertical_generic<T: Real>(
    d: &DerivedCoeffs,
    mgl: f64,
    nu_theta: f64,
    x: [T; 4],
) -> T {
    let [q1, q2, p1, p2] = x;
    let r2 = q1 * q1 + q2 * q2;
    let g3 = (T::cst(1.0) - r2).sqrt();
    let f = T::cst(1.0) / (T::cst(1.0) + g3);
    let a = p1 + (g3 * q1).scale(d.fl) + (f * q2).scale(nu_theta);
    let b = p2 + (g3 * q2).scale(d.fl) - (f * q1).scale(nu_theta);
    let qp = q1 * p1 + q2 * p2;
    (a * a - qp * qp + b * b).scale(0.5 * d.fp)
        + r2.scale(0.5 * d.fq)
        + ((f - T::cst(0.5)) * r2).scale(mgl)
        + (r2 * r2).scale(0.5 * d.fp * d.fl * d.fl)
}

pub fn reduced_hamiltonian(p: &BodyParams, nu: &MomentumLevel, s: &ReducedState) -> Result<f64> {
    check_chart(s.q1, s.q2)?;
    Ok(reduced_hamiltonian_generic(p, nu, s.to_array()))
}

pub fn reduced_hamiltonian_vertical(
    p: &BodyParams,
    nu3: f64,
    nu_theta: f64,
    s: &ReducedState,
) -> Result<f64> {
    check_chart(s.q1, s.q2)?;
    let d = DerivedCoeffs::new(p, nu3);
    Ok(reduced_hamiltonian_vertical_generic(&d, p.mgl(), nu_theta, s.to_array()))
}

/// Value of the general reduced Hamiltonian at the origin. At vertical
/// momentum this is the constant separating it from the vertical form.
pub fn vertical_energy_offset(p: &BodyParams, nu: &MomentumLevel) -> f64 {
    reduced_hamiltonian_generic(p, nu, [0.0; 4])
}

/// `(∂H/∂q1, ∂H/∂q2, ∂H/∂p1, ∂H/∂p2)`.
pub fn reduced_gradient(p: &BodyParams, nu: &MomentumLevel, s: &ReducedState) -> Result<[f64; 4]> {
    check_chart(s.q1, s.q2)?;
    Ok(reduced_gradient_unchecked(p, nu, s))
}

pub(crate) fn reduced_gradient_unchecked(p: &BodyParams, nu: &MomentumLevel, s: &ReducedState) -> [f64; 4] {
    reduced_hamiltonian_generic(p, nu, Dual::<4>::seed(s.to_array())).d
}

/// Hessian of the reduced Hamiltonian.
pub fn reduced_hessian(p: &BodyParams, nu: &MomentumLevel, s: &ReducedState) -> [[f64; 4]; 4] {
    reduced_hamiltonian_generic(p, nu, Jet2::<4>::seed(s.to_array())).h
}

/// Hamilton's equations of the reduced system.
pub fn reduced_vector_field(p: &BodyParams, nu: &MomentumLevel, s: &ReducedState) -> [f64; 4] {
    let g = reduced_gradient_unchecked(p, nu, s);
    [g[2], g[3], -g[0], -g[1]]
}

/// Linearisation of the reduced Hamiltonian vector field, `𝕁·D²H`.
pub fn reduced_jacobian(p: &BodyParams, nu: &MomentumLevel, s: &ReducedState) -> [[f64; 4]; 4] {
    symplectic_jacobian(&reduced_hessian(p, nu, s))
}

/// `𝕁·Hess` for the canonical structure on `(q1, q2, p1, p2)`.
pub fn symplectic_jacobian(h: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    [h[2], h[3], h[0].map(|v| -v), h[1].map(|v| -v)]
}

/// Maps a reduced state back to impulse variables, in the comoving frame
/// where the group coordinates vanish. The spin component is `Π₃ = −ν^θ`.
pub fn reconstruct_full(p: &BodyParams, nu: &MomentumLevel, s: &ReducedState) -> Result<FullState> {
    check_chart(s.q1, s.q2)?;
    let (q1, q2) = (s.q1, s.q2);
    let r2 = q1 * q1 + q2 * q2;
    let g3 = (1.0 - r2).sqrt();
    let f = chart_f(r2);
    let ml_m1 = p.ml() / p.m1;
    let nt = nu.nu_theta;
    let pt = [
        s.p2 - f * q1 * nt - ml_m1 * nu.nu_a[1],
        -s.p1 - f * q2 * nt + ml_m1 * nu.nu_a[0],
        0.0,
    ];
    let a = attitude_matrix_unchecked(q1, q2);
    let inner = mat_t_vec(&a, cross(E3, pt));
    let c = cross(E3, inner);
    Ok(FullState {
        pi: [-c[0], -c[1], -c[2] - nt],
        p: mat_t_vec(&a, nu.nu_a),
        gamma: [q1, q2, g3],
    })
}

/// Momentum of the diagonal rotation of `(q, p)`: `q1p2 − q2p1`.
#[inline]
pub fn so2_momentum(s: &ReducedState) -> f64 {
    s.q1 * s.p2 - s.q2 * s.p1
}

/// Normal-form testbed Hamiltonian in `(q, u)` with `F_l` removed by a
/// symplectic shift and spin normalised away, minus its value `μ` at the
/// origin. Written so that small energies carry no cancellation error.
pub fn consolidated_excess_generic<T: Real>(cp: &ConsolidatedParams, x: [T; 4]) -> T {
    let [q1, q2, u1, u2] = x;
    let r2 = q1 * q1 + q2 * q2;
    let g3 = (T::cst(1.0) - r2).sqrt();
    let f = T::cst(1.0) / (T::cst(1.0) + g3);
    let a = u1 + f * q2;
    let b = u2 - f * q1;
    let qu = q1 * u1 + q2 * u2;
    // √(1 − s) − 1 + s/2 = −s²f²/2
    let rf = r2 * f;
    (a * a - qu * qu + b * b).scale(0.5 * cp.fp()) + r2.scale(0.5 * cp.fq()) - (rf * rf).scale(0.5 * cp.mu)
}

pub fn consolidated_hamiltonian(cp: &ConsolidatedParams, q1: f64, q2: f64, u1: f64, u2: f64) -> Result<f64> {
    check_chart(q1, q2)?;
    Ok(cp.mu + consolidated_excess_generic(cp, [q1, q2, u1, u2]))
}

/// Maps the vertical-momentum coefficients at spin `se` to consolidated
/// form. Frequencies are the magnitudes of the imaginary parts of the
/// linear spectrum, `½(F_p·S_e ± √(F_p²S_e² + 4F_pF_q))`; the conjugate
/// momentum is measured in units of `se`, which rescales the potential
/// coefficient to `μ = −mgl/S_e`.
pub fn consolidate_params(d: &DerivedCoeffs, mgl: f64, se: f64) -> Result<ConsolidatedParams> {
    let disc = d.fp * d.fp * se * se + 4.0 * d.fp * d.fq;
    if d.fq >= 0.0 {
        return Err(Error::NotInGap(format!("F_q = {} is not negative", d.fq)));
    }
    if disc <= 0.0 || se == 0.0 {
        return Err(Error::NotInGap(format!(
            "F_p²S_e² + 4F_pF_q = {disc} is not positive"
        )));
    }
    let b = d.fp * se.abs();
    let root = disc.sqrt();
    Ok(ConsolidatedParams {
        f1: 0.5 * (b + root),
        f2: 0.5 * (b - root),
        mu: -mgl / se,
    })
}
