//! The Kirchhoff model of a submerged axisymmetric body in Poisson-reduced
//! impulse variables (Π, P, Γ).
//!
//! This is the unreduced reference system. The canonical reduced system in
//! [`crate::reduction`] is validated against it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

pub const E3: Vec3 = [0.0, 0.0, 1.0];

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn axpy(k: f64, a: Vec3, b: Vec3) -> Vec3 {
    [k * a[0] + b[0], k * a[1] + b[1], k * a[2] + b[2]]
}

/// Physical constants of the vehicle: added inertia `i1`/`i3`, added mass
/// `m1`/`m3`, body mass, centre-of-mass offset `l` below the centre of
/// buoyancy, and gravity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyParams {
    pub i1: f64,
    pub i3: f64,
    pub m1: f64,
    pub m3: f64,
    pub mass: f64,
    pub l: f64,
    pub g: f64,
}

impl Default for BodyParams {
    /// The reference vehicle used by the published experiments. `i3` is not
    /// fixed there and does not influence any reduced quantity; it is set to 1.
    fn default() -> Self {
        Self {
            i1: 4.0,
            i3: 1.0,
            m1: 1.0,
            m3: 0.5,
            mass: 1.0,
            l: 1.0,
            g: 1.0,
        }
    }
}

impl BodyParams {
    /// Checks the physical inequalities, reporting the first violated one.
    pub fn validate(&self) -> Result<()> {
        let checks: [(bool, &'static str); 5] = [
            (self.i1 > 0.0, "I1 > 0"),
            (self.i3 > 0.0, "I3 > 0"),
            (self.m1 > 0.0, "M1 > 0"),
            (self.m3 > 0.0, "M3 > 0"),
            (self.det() > 0.0, "I1·M1 − m²l² > 0"),
        ];
        for (ok, what) in checks {
            if !ok {
                return Err(Error::InvalidParams(what));
            }
        }
        if ![self.mass, self.l, self.g].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParams("finite m, l, g"));
        }
        Ok(())
    }

    /// `I1·M1 − m²l²`, the determinant of the transverse inertia block.
    #[inline]
    pub fn det(&self) -> f64 {
        self.i1 * self.m1 - self.mass * self.mass * self.l * self.l
    }

    #[inline]
    pub fn ml(&self) -> f64 {
        self.mass * self.l
    }

    #[inline]
    pub fn mgl(&self) -> f64 {
        self.mass * self.g * self.l
    }
}

/// Angular impulse `pi`, linear impulse `p` and body-frame vertical `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullState {
    pub pi: Vec3,
    pub p: Vec3,
    pub gamma: Vec3,
}

impl FullState {
    pub fn to_array(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        out[..3].copy_from_slice(&self.pi);
        out[3..6].copy_from_slice(&self.p);
        out[6..].copy_from_slice(&self.gamma);
        out
    }

    pub fn from_array(x: &[f64; 9]) -> Self {
        Self {
            pi: [x[0], x[1], x[2]],
            p: [x[3], x[4], x[5]],
            gamma: [x[6], x[7], x[8]],
        }
    }

    /// Rotates all three vectors about the symmetry axis by `angle`.
    pub fn rotated_about_axis(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let rot = |v: Vec3| [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]];
        Self {
            pi: rot(self.pi),
            p: rot(self.p),
            gamma: rot(self.gamma),
        }
    }
}

/// Vertical linear impulse `pe` and spin `se` of an axisymmetric relative
/// equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSpec {
    pub pe: f64,
    pub se: f64,
}

/// Inverts the Legendre transform `Π = IΩ + ml e₃×v`, `P = Mv − ml e₃×Ω`.
pub fn velocities_from_momenta(p: &BodyParams, pi: Vec3, pl: Vec3) -> (Vec3, Vec3) {
    let det = p.det();
    let ml = p.ml();
    let omega = [
        (p.m1 * pi[0] + ml * pl[1]) / det,
        (p.m1 * pi[1] - ml * pl[0]) / det,
        pi[2] / p.i3,
    ];
    let v = [
        (p.i1 * pl[0] - ml * pi[1]) / det,
        (p.i1 * pl[1] + ml * pi[0]) / det,
        pl[2] / p.m3,
    ];
    (omega, v)
}

/// The forward Legendre map, `(Ω, v) ↦ (Π, P)`.
pub fn momenta_from_velocities(p: &BodyParams, omega: Vec3, v: Vec3) -> (Vec3, Vec3) {
    let ml = p.ml();
    let e3v = cross(E3, v);
    let e3w = cross(E3, omega);
    let pi = [
        p.i1 * omega[0] + ml * e3v[0],
        p.i1 * omega[1] + ml * e3v[1],
        p.i3 * omega[2] + ml * e3v[2],
    ];
    let pl = [
        p.m1 * v[0] - ml * e3w[0],
        p.m1 * v[1] - ml * e3w[1],
        p.m3 * v[2] - ml * e3w[2],
    ];
    (pi, pl)
}

/// Total energy, kinetic (in impulse form) plus gravitational potential.
pub fn hamiltonian_full(p: &BodyParams, s: &FullState) -> f64 {
    let det = p.det();
    let (pi, pl) = (s.pi, s.p);
    p.m1 / (2.0 * det) * (pi[0] * pi[0] + pi[1] * pi[1])
        + pi[2] * pi[2] / (2.0 * p.i3)
        + p.i1 / (2.0 * det) * (pl[0] * pl[0] + pl[1] * pl[1])
        + pl[2] * pl[2] / (2.0 * p.m3)
        + p.ml() / det * (pi[0] * pl[1] - pi[1] * pl[0])
        - p.mgl() * s.gamma[2]
}

/// Right-hand side of the Kirchhoff equations.
pub fn full_vector_field(p: &BodyParams, s: &FullState) -> FullState {
    let (omega, v) = velocities_from_momenta(p, s.pi, s.p);
    let torque = cross(s.gamma, E3);
    let dpi = axpy(
        -p.mgl(),
        torque,
        axpy(1.0, cross(s.pi, omega), cross(s.p, v)),
    );
    FullState {
        pi: dpi,
        p: cross(s.p, omega),
        gamma: cross(s.gamma, omega),
    }
}

/// The three Casimirs `(|P|², P·Γ, |Γ|²)` of the Kirchhoff bracket.
pub fn casimirs(s: &FullState) -> (f64, f64, f64) {
    (dot(s.p, s.p), dot(s.p, s.gamma), dot(s.gamma, s.gamma))
}

/// The subcasimir `Π·Γ`, conserved only when the momentum level is vertical.
pub fn subcasimir(s: &FullState) -> f64 {
    dot(s.pi, s.gamma)
}

/// Impulse-variable image of the spinning, vertically translating equilibrium.
pub fn relative_equilibrium_state(_p: &BodyParams, e: &EquilibriumSpec) -> FullState {
    FullState {
        pi: [0.0, 0.0, e.se],
        p: [0.0, 0.0, e.pe],
        gamma: E3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(rng: &mut ChaCha8Rng) -> FullState {
        let mut v = [0.0f64; 9];
        for x in v.iter_mut() {
            *x = rng.gen_range(-2.0..2.0);
        }
        let n = (v[6] * v[6] + v[7] * v[7] + v[8] * v[8]).sqrt();
        for x in v[6..].iter_mut() {
            *x /= n;
        }
        FullState::from_array(&v)
    }

    /// The 9×9 Poisson structure matrix, used only as an oracle.
    fn structure_matrix(s: &FullState) -> [[f64; 9]; 9] {
        let hat = |x: Vec3| [[0.0, -x[2], x[1]], [x[2], 0.0, -x[0]], [-x[1], x[0], 0.0]];
        let blocks = [
            [Some(hat(s.pi)), Some(hat(s.p)), Some(hat(s.gamma))],
            [Some(hat(s.p)), None, None],
            [Some(hat(s.gamma)), None, None],
        ];
        let mut j = [[0.0; 9]; 9];
        for (bi, row) in blocks.iter().enumerate() {
            for (bj, blk) in row.iter().enumerate() {
                if let Some(b) = blk {
                    for r in 0..3 {
                        for c in 0..3 {
                            j[3 * bi + r][3 * bj + c] = b[r][c];
                        }
                    }
                }
            }
        }
        j
    }

    #[test]
    fn validate_accepts_reference_vehicle() {
        assert!(BodyParams::default().validate().is_ok());
    }

    #[test]
    fn validate_reports_violated_inequality() {
        let p = BodyParams {
            i1: 1.0,
            ..BodyParams::default()
        };
        assert_eq!(p.validate(), Err(Error::InvalidParams("I1·M1 − m²l² > 0")));
        let p = BodyParams {
            m3: -0.5,
            ..BodyParams::default()
        };
        assert_eq!(p.validate(), Err(Error::InvalidParams("M3 > 0")));
    }

    #[test]
    fn equilibrium_velocities() {
        let p = BodyParams::default();
        let (w, v) = velocities_from_momenta(&p, [0.0, 0.0, 6.0], [0.0, 0.0, 1.5]);
        assert_eq!(w, [0.0, 0.0, 6.0 / p.i3]);
        assert_eq!(v, [0.0, 0.0, 1.5 / p.m3]);
        let (w, v) = velocities_from_momenta(&p, [0.0; 3], [0.0; 3]);
        assert_eq!((w, v), ([0.0; 3], [0.0; 3]));
    }

    #[test]
    fn legendre_round_trip() {
        let p = BodyParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let s = random_state(&mut rng);
            let (w, v) = velocities_from_momenta(&p, s.pi, s.p);
            let (pi, pl) = momenta_from_velocities(&p, w, v);
            for k in 0..3 {
                assert!((pi[k] - s.pi[k]).abs() < 1e-12);
                assert!((pl[k] - s.p[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn energy_forms_agree() {
        let p = BodyParams::default();
        let rest = FullState {
            pi: [0.0; 3],
            p: [0.0; 3],
            gamma: E3,
        };
        assert_eq!(hamiltonian_full(&p, &rest), -p.mgl());

        let eq = relative_equilibrium_state(&p, &EquilibriumSpec { pe: 1.5, se: 6.0 });
        let expected = 0.5 * 36.0 / p.i3 + 0.5 * 1.5 * 1.5 / p.m3 - p.mgl();
        assert!((hamiltonian_full(&p, &eq) - expected).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let s = random_state(&mut rng);
            let (w, v) = velocities_from_momenta(&p, s.pi, s.p);
            let oracle = 0.5 * dot(w, s.pi) + 0.5 * dot(v, s.p) - p.mgl() * s.gamma[2];
            assert!((hamiltonian_full(&p, &s) - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn relative_equilibrium_is_fixed_point() {
        let p = BodyParams::default();
        let zero = relative_equilibrium_state(&p, &EquilibriumSpec { pe: 0.0, se: 0.0 });
        assert_eq!(zero.gamma, E3);
        assert_eq!(zero.pi, [0.0; 3]);
        let s = relative_equilibrium_state(&p, &EquilibriumSpec { pe: 1.5, se: 6.0 });
        assert_eq!(s.pi, [0.0, 0.0, 6.0]);
        assert_eq!(s.p, [0.0, 0.0, 1.5]);
        let f = full_vector_field(&p, &s).to_array();
        assert!(f.iter().all(|x| x.abs() <= 1e-14));
        assert_eq!(casimirs(&s), (2.25, 1.5, 1.0));
        let orthogonal = FullState {
            pi: [0.0; 3],
            p: [0.0, 1.0, 0.0],
            gamma: [1.0, 0.0, 0.0],
        };
        assert_eq!(casimirs(&orthogonal), (1.0, 0.0, 1.0));
    }

    #[test]
    fn vector_field_matches_bracket_form() {
        let p = BodyParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let s = random_state(&mut rng);
            let x = s.to_array();
            let h = 1e-3;
            let mut grad = [0.0; 9];
            let energy_at = |i: usize, d: f64| {
                let mut y = x;
                y[i] += d;
                hamiltonian_full(&p, &FullState::from_array(&y))
            };
            for (i, g) in grad.iter_mut().enumerate() {
                *g = (8.0 * (energy_at(i, h) - energy_at(i, -h))
                    - (energy_at(i, 2.0 * h) - energy_at(i, -2.0 * h)))
                    / (12.0 * h);
            }
            let j = structure_matrix(&s);
            let f = full_vector_field(&p, &s).to_array();
            for i in 0..9 {
                let jx: f64 = (0..9).map(|k| j[i][k] * grad[k]).sum();
                assert!((jx - f[i]).abs() < 1e-10, "component {i}: {jx} vs {}", f[i]);
            }
        }
    }
}
