//! Stability of the vertically falling spinning equilibrium and the linear
//! symplectic tests behind it.
//!
//! The equilibrium is `q = p = 0` of the reduced system at vertical momentum
//! `(0, 0, Pe)` and spin `Se`. Closed-form thresholds and eigenvalues are
//! computed from [`DerivedCoeffs`]; the generic routines at the bottom act on
//! arbitrary 4×4 Hessians.

use nalgebra::{Matrix2x4, Matrix4, Matrix4x2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::BodyParams;
use crate::reduction::{reduced_hessian, symplectic_jacobian, DerivedCoeffs, MomentumLevel, ReducedState};

/// Tolerance on `Pe² − C` for the boundary tags.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilityClass {
    /// Energy-momentum confinement: the reduced Hessian is definite.
    EMRegion,
    /// Spectrally stable but not energy-momentum stable.
    Gap,
    SpectrallyUnstable,
    BoundaryC1,
    BoundaryC2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: [Complex64; 4],
    pub max_real_part: f64,
    /// Positive mode frequencies `f1 ≥ f2` when the spectrum is elliptic.
    pub frequencies: Option<(f64, f64)>,
}

impl SpectrumReport {
    fn from_eigenvalues(eigenvalues: [Complex64; 4]) -> Self {
        let max_real_part = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let elliptic = eigenvalues.iter().all(|z| z.re.abs() <= 1e-10 && z.norm() > 1e-10);
        let frequencies = elliptic.then(|| {
            let mut f: Vec<f64> = eigenvalues.iter().map(|z| z.im.abs()).collect();
            f.sort_by(|a, b| b.total_cmp(a));
            (f[0], f[f.len() - 1])
        });
        Self {
            eigenvalues,
            max_real_part,
            frequencies,
        }
    }

    pub fn is_elliptic(&self) -> bool {
        self.frequencies.is_some()
    }
}

pub fn derived_coeffs(p: &BodyParams, pe: f64) -> DerivedCoeffs {
    DerivedCoeffs::new(p, pe)
}

/// Squared-momentum thresholds `(C1, C2)` for energy-momentum and spectral
/// stability. Both are `+∞` when `M1 ≤ M3`.
pub fn thresholds(p: &BodyParams, se: f64) -> (f64, f64) {
    if p.m1 <= p.m3 {
        return (f64::INFINITY, f64::INFINITY);
    }
    let k = p.m1 * p.m3 / (p.m1 - p.m3);
    let c1 = k * p.mgl();
    (c1, c1 + k * p.m1 * se * se / (4.0 * p.det()))
}

pub fn classify(p: &BodyParams, pe: f64, se: f64) -> StabilityClass {
    let (c1, c2) = thresholds(p, se);
    let pe2 = pe * pe;
    let near = |c: f64| (pe2 - c).abs() <= BOUNDARY_TOL * c.abs().max(1.0);
    if c1.is_finite() && near(c1) {
        StabilityClass::BoundaryC1
    } else if c2.is_finite() && near(c2) {
        StabilityClass::BoundaryC2
    } else if pe2 < c1 {
        StabilityClass::EMRegion
    } else if pe2 < c2 {
        StabilityClass::Gap
    } else {
        StabilityClass::SpectrallyUnstable
    }
}

/// `Fp²Se² + 4FpFq`; spectral stability holds exactly when it is positive.
pub fn spectral_discriminant(d: &DerivedCoeffs, se: f64) -> f64 {
    d.fp * d.fp * se * se + 4.0 * d.fp * d.fq
}

/// Closed-form eigenvalues of the linearisation at the equilibrium.
pub fn linear_spectrum(p: &BodyParams, pe: f64, se: f64) -> SpectrumReport {
    let d = derived_coeffs(p, pe);
    let centre = Complex64::new(0.0, -0.5 * d.fp * se);
    let root = 0.5 * Complex64::new(-spectral_discriminant(&d, se), 0.0).sqrt();
    let (l1, l2) = (centre + root, centre - root);
    SpectrumReport::from_eigenvalues([l1, l2, l1.conj(), l2.conj()])
}

/// Hessian of the reduced Hamiltonian at the equilibrium.
pub fn equilibrium_hessian(p: &BodyParams, pe: f64, se: f64) -> Matrix4<f64> {
    let h = reduced_hessian(p, &MomentumLevel::vertical(pe, se), &ReducedState::ORIGIN);
    Matrix4::from_fn(|i, j| h[i][j])
}

/// `𝕁·D²H` at the equilibrium.
pub fn linearization(p: &BodyParams, pe: f64, se: f64) -> Matrix4<f64> {
    let h = reduced_hessian(p, &MomentumLevel::vertical(pe, se), &ReducedState::ORIGIN);
    let l = symplectic_jacobian(&h);
    Matrix4::from_fn(|i, j| l[i][j])
}

/// Spectrum from a dense eigensolve of [`linearization`].
pub fn dense_spectrum(p: &BodyParams, pe: f64, se: f64) -> SpectrumReport {
    let ev = linearization(p, pe, se).complex_eigenvalues();
    SpectrumReport::from_eigenvalues([ev[0], ev[1], ev[2], ev[3]])
}

/// Hessian of the diagonal-rotation momentum `q1p2 − q2p1`.
pub fn so2_momentum_hessian() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0, //
        0.0, -1.0, 0.0, 0.0, //
        1.0, 0.0, 0.0, 0.0,
    )
}

fn canonical_structure() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, -1.0, 0.0, 0.0,
    )
}

pub fn is_positive_definite(m: &Matrix4<f64>) -> bool {
    m.cholesky().is_some()
}

/// `Re(a)² + bc` for the equivariant block form `[[a, b], [c, −ā]]` of a
/// 4×4 infinitesimally symplectic map.
pub fn hopf_discriminant(a: Complex64, b: f64, c: f64) -> f64 {
    a.re * a.re + b * c
}

/// The eigenvalues `i·Im(a) ± √D` of the block form.
pub fn hopf_eigenvalues(a: Complex64, b: f64, c: f64) -> [Complex64; 2] {
    let centre = Complex64::new(0.0, a.im);
    let root = Complex64::new(hopf_discriminant(a, b, c), 0.0).sqrt();
    [centre + root, centre - root]
}

/// Equivariant blocks of the Kirchhoff linearisation in complex notation
/// `q = q1 + iq2`, `p = p1 + ip2`: `a = Fp·F`, `b = Fp`,
/// `c = −(Fp|F|² + Fq)` with `F = Fl − iSe/2`.
pub fn kirchhoff_hopf_blocks(d: &DerivedCoeffs, se: f64) -> (Complex64, f64, f64) {
    let f = Complex64::new(d.fl, -0.5 * se);
    (d.fp * f, d.fp, -(d.fp * f.norm_sqr() + d.fq))
}

pub fn kirchhoff_discriminant(p: &BodyParams, pe: f64, se: f64) -> f64 {
    let (a, b, c) = kirchhoff_hopf_blocks(&derived_coeffs(p, pe), se);
    hopf_discriminant(a, b, c)
}

/// Central-difference slope `dD/dPe` at the collision `Pe = √C2`.
pub fn hopf_transversality(p: &BodyParams, se: f64) -> Result<f64> {
    let (_, c2) = thresholds(p, se);
    if !c2.is_finite() {
        return Err(Error::Precondition("no eigenvalue collision when M1 <= M3".into()));
    }
    let pe = c2.sqrt();
    let h = 1e-6 * pe.max(1.0);
    Ok((kirchhoff_discriminant(p, pe + h, se) - kirchhoff_discriminant(p, pe - h, se)) / (2.0 * h))
}

/// One normal mode of an elliptic 4×4 linear Hamiltonian system: signed
/// frequency (its sign is the Krein sign) and the SO(2) type on the mode's
/// real eigenspace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KreinMode {
    pub omega: f64,
    pub n: i32,
}

/// Signed frequencies and rotation types for `H = ½xᵀ·hess·x` with the
/// SO(2) momentum `½xᵀ·jhess·x`, sorted by signed frequency.
///
/// On each real eigenspace the restricted quadratic forms become
/// `½k(x² + y²)` in a symplectic basis, and `k` is read off from the
/// determinant and trace of the restriction in an arbitrary basis.
pub fn krein_modes(hess: &Matrix4<f64>, jhess: &Matrix4<f64>) -> Result<[KreinMode; 2]> {
    let jstruct = canonical_structure();
    let l = jstruct * hess;
    let ev = l.complex_eigenvalues();
    let scale = ev.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    if ev.iter().any(|z| z.re.abs() > 1e-9 * scale || z.norm() < 1e-9 * scale) {
        return Err(Error::Precondition("linearisation is not elliptic".into()));
    }
    let mut freqs: Vec<f64> = ev.iter().filter(|z| z.im > 0.0).map(|z| z.im).collect();
    if freqs.len() != 2 || (freqs[0] - freqs[1]).abs() < 1e-8 * scale {
        return Err(Error::Precondition("frequencies are not simple".into()));
    }
    freqs.sort_by(|a, b| b.total_cmp(a));
    let l2 = l * l;
    let mut modes = [KreinMode { omega: 0.0, n: 0 }; 2];
    for (mode, w) in modes.iter_mut().zip(freqs) {
        let basis = real_eigenspace(&(l2 + Matrix4::identity() * (w * w)));
        let area = (basis.column(0).transpose() * jstruct * basis.column(1))[(0, 0)];
        let restricted = |m: &Matrix4<f64>| {
            let r = basis.transpose() * m * basis;
            let k = r.determinant().max(0.0).sqrt() / area.abs();
            k.copysign(r.trace())
        };
        let omega = restricted(hess);
        let n = restricted(jhess);
        if (omega.abs() - w).abs() > 1e-6 * scale {
            return Err(Error::Precondition("restricted Hessian is not definite".into()));
        }
        mode.omega = omega;
        mode.n = n.round() as i32;
    }
    modes.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    Ok(modes)
}

/// Two-dimensional null space of `m` from its smallest singular values.
fn real_eigenspace(m: &Matrix4<f64>) -> Matrix4x2<f64> {
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let mut idx = [0usize, 1, 2, 3];
    idx.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let rows = Matrix2x4::from_rows(&[vt.row(idx[0]).into_owned(), vt.row(idx[1]).into_owned()]);
    rows.transpose()
}

/// Formal stability of a 4-dimensional elliptic equilibrium with signed
/// frequencies `omega1 < 0 < omega2` and rotation types `(n1, n2)`.
///
/// Returns `Some(λ)` with `(ω_j + λn_j)` of one common sign, so that
/// `D²H + λD²J` is definite, or `None` at an `n1:n2` resonance.
pub fn resonance_formal_stability(omega1: f64, omega2: f64, n1: i32, n2: i32) -> Result<Option<f64>> {
    if !(omega1 < 0.0 && 0.0 < omega2) {
        return Err(Error::Precondition(format!(
            "expected omega1 < 0 < omega2, got ({omega1}, {omega2})"
        )));
    }
    if n1 == 0 && n2 == 0 {
        return Err(Error::Precondition("trivial SO(2) action".into()));
    }
    let (a, b) = (omega1 * n2 as f64, omega2 * n1 as f64);
    if (a - b).abs() <= 1e-12 * (a.abs() + b.abs()) {
        return Ok(None);
    }
    let modes = [(omega1, n1 as f64), (omega2, n2 as f64)];
    for sign in [1.0, -1.0] {
        if let Some(lambda) = common_sign_point(&modes, sign) {
            return Ok(Some(lambda));
        }
    }
    Ok(None)
}

/// A point in `{λ : sign·(ω_j + λn_j) > 0 for all j}`, if nonempty.
fn common_sign_point(modes: &[(f64, f64)], sign: f64) -> Option<f64> {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for &(w, n) in modes {
        let (w, n) = (sign * w, sign * n);
        if n == 0.0 {
            if w <= 0.0 {
                return None;
            }
        } else if n > 0.0 {
            lo = lo.max(-w / n);
        } else {
            hi = hi.min(-w / n);
        }
    }
    if lo >= hi {
        return None;
    }
    Some(match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo + 1.0 + lo.abs(),
        (false, true) => hi - 1.0 - hi.abs(),
        (false, false) => 0.0,
    })
}

/// Smallest eigenvalue of a symmetric 4×4 matrix.
pub fn min_eigenvalue(m: &Matrix4<f64>) -> f64 {
    m.symmetric_eigenvalues().min()
}

/// Maximises the concave function `λ ↦ λ_min(hess + λ·jhess)`.
/// Returns the maximiser and the maximum; the form is positive definite
/// for some `λ` exactly when the maximum is positive.
pub fn lambda_search(hess: &Matrix4<f64>, jhess: &Matrix4<f64>) -> (f64, f64) {
    let g = |lam: f64| min_eigenvalue(&(hess + jhess * lam));
    let bound = 2.0 * hess.norm() / jhess.norm().max(1e-300) * 2.0 + 1.0;
    let (mut a, mut b) = (-bound, bound);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..200 {
        if g1 < g2 {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + ratio * (b - a);
            g2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - ratio * (b - a);
            g1 = g(x1);
        }
        if b - a <= 1e-13 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
    }
    let lam = 0.5 * (a + b);
    (lam, g(lam))
}

/// The λ-search applied at the Kirchhoff equilibrium. `Some(λ)` when
/// `D²H + λ·D²(q1p2 − q2p1)` is positive definite.
pub fn formal_stability_lambda(p: &BodyParams, pe: f64, se: f64) -> Option<f64> {
    let h = equilibrium_hessian(p, pe, se);
    let (lam, value) = lambda_search(&h, &so2_momentum_hessian());
    (value > 1e-12 * h.norm().max(1.0)).then_some(lam)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SE: f64 = 6.0;

    fn reference() -> BodyParams {
        BodyParams::default()
    }

    fn pe_grid() -> impl Iterator<Item = f64> {
        (0..50).map(|k| 0.013 + 0.05 * k as f64)
    }

    #[test]
    fn derived_coeffs_reference_values() {
        let p = reference();
        let d = derived_coeffs(&p, 1.5);
        assert!((d.fp - 1.0 / 3.0).abs() < 1e-15);
        assert!((d.fq + 1.25).abs() < 1e-15);
        assert!((d.fl - 1.5).abs() < 1e-15);
        assert_eq!(derived_coeffs(&p, 0.0).fq, p.mgl());
        let equal = BodyParams { m3: 1.0, ..p };
        assert_eq!(derived_coeffs(&equal, 3.7).fq, equal.mgl());
    }

    #[test]
    fn thresholds_reference_values() {
        let p = reference();
        let (c1, c2) = thresholds(&p, SE);
        assert!((c1 - 1.0).abs() < 1e-14 && (c2 - 4.0).abs() < 1e-14);
        let (a, b) = thresholds(&p, 0.0);
        assert_eq!(a, b);
        let (a2, b2) = thresholds(&p, 2.0 * SE);
        assert!(((b2 - a2) - 4.0 * (c2 - c1)).abs() < 1e-12);
        let prolate = BodyParams { m3: 2.0, ..p };
        assert_eq!(thresholds(&prolate, SE), (f64::INFINITY, f64::INFINITY));
        assert_eq!(classify(&prolate, 100.0, SE), StabilityClass::EMRegion);
    }

    #[test]
    fn classify_reference_points() {
        let p = reference();
        assert_eq!(classify(&p, 0.5, SE), StabilityClass::EMRegion);
        assert_eq!(classify(&p, 1.5, SE), StabilityClass::Gap);
        assert_eq!(classify(&p, 2.5, SE), StabilityClass::SpectrallyUnstable);
        assert_eq!(classify(&p, 1.0, SE), StabilityClass::BoundaryC1);
        assert_eq!(classify(&p, 2.0, SE), StabilityClass::BoundaryC2);
    }

    #[test]
    fn spectrum_reference_values() {
        let p = reference();
        let s = linear_spectrum(&p, 1.5, SE);
        let (f1, f2) = s.frequencies.unwrap();
        let r = (7.0f64 / 3.0).sqrt();
        assert!((f1 - (1.0 + 0.5 * r)).abs() < 1e-14);
        assert!((f2 - (0.5 * r - 1.0).abs()).abs() < 1e-14);

        let s0 = linear_spectrum(&p, 0.5, 0.0);
        let d = derived_coeffs(&p, 0.5);
        let w = (d.fp * d.fq).sqrt();
        for z in s0.eigenvalues {
            assert!(z.re.abs() < 1e-15 && (z.im.abs() - w).abs() < 1e-14);
        }

        let collision = linear_spectrum(&p, 2.0, SE);
        assert!(spectral_discriminant(&derived_coeffs(&p, 2.0), SE).abs() < 1e-13);
        assert!((collision.eigenvalues[0] - collision.eigenvalues[1]).norm() < 1e-6);
    }

    #[test]
    fn spectrum_matches_dense_eigensolve() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 200 {
            let p = BodyParams {
                i1: rng.gen_range(0.5..5.0),
                i3: rng.gen_range(0.5..5.0),
                m1: rng.gen_range(0.5..3.0),
                m3: rng.gen_range(0.2..3.0),
                mass: rng.gen_range(0.2..2.0),
                l: rng.gen_range(-1.0..1.0),
                g: rng.gen_range(0.0..2.0),
            };
            if p.validate().is_err() {
                continue;
            }
            let (pe, se) = (rng.gen_range(-3.0..3.0), rng.gen_range(-8.0..8.0));
            if spectral_discriminant(&derived_coeffs(&p, pe), se).abs() < 1e-3 {
                continue;
            }
            let closed = linear_spectrum(&p, pe, se).eigenvalues;
            let dense = dense_spectrum(&p, pe, se).eigenvalues;
            let scale = closed.iter().map(|z| z.norm()).fold(1.0, f64::max);
            for z in closed {
                let best = dense.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
                assert!(best < 1e-10 * scale, "{z} not in {dense:?}");
            }
            checked += 1;
        }
    }

    #[test]
    fn classification_consistency_on_grid() {
        let p = reference();
        for pe in pe_grid() {
            let h = equilibrium_hessian(&p, pe, SE);
            let s = linear_spectrum(&p, pe, SE);
            match classify(&p, pe, SE) {
                StabilityClass::EMRegion => assert!(is_positive_definite(&h)),
                StabilityClass::Gap => {
                    assert!(!is_positive_definite(&h) && !is_positive_definite(&-h));
                    assert!(s.is_elliptic());
                }
                StabilityClass::SpectrallyUnstable => assert!(s.max_real_part > 0.0),
                other => panic!("grid point {pe} landed on {other:?}"),
            }
        }
    }

    #[test]
    fn lambda_search_reproduces_spectral_condition() {
        let p = reference();
        for pe in pe_grid() {
            let disc = spectral_discriminant(&derived_coeffs(&p, pe), SE);
            let found = formal_stability_lambda(&p, pe, SE);
            assert_eq!(found.is_some(), disc > 0.0, "Pe = {pe}");
            if let Some(lam) = found {
                let m = equilibrium_hessian(&p, pe, SE) + so2_momentum_hessian() * lam;
                assert!(is_positive_definite(&m));
            }
        }
    }

    #[test]
    fn lambda_search_matches_closed_form_optimum() {
        // For the block form, the |q|² coefficient is maximised at λ = FpSe/2.
        let p = reference();
        let d = derived_coeffs(&p, 1.5);
        let h = equilibrium_hessian(&p, 1.5, SE);
        let (lam, value) = lambda_search(&h, &so2_momentum_hessian());
        assert!(value > 0.0);
        let alt = min_eigenvalue(&(h + so2_momentum_hessian() * (0.5 * d.fp * SE)));
        assert!(alt > 0.0 && value >= alt - 1e-12 && lam.is_finite());
    }

    #[test]
    fn resonance_examples() {
        assert_eq!(resonance_formal_stability(-1.0, 1.0, -1, 1).unwrap(), None);
        let lam = resonance_formal_stability(-1.0, 2.0, -1, 1).unwrap().unwrap();
        let (a, b) = (-1.0 - lam, 2.0 + lam);
        assert!(a * b > 0.0);
        assert!(resonance_formal_stability(1.0, 2.0, 1, 1).is_err());
        assert!(resonance_formal_stability(-1.0, 2.0, 0, 0).is_err());
    }

    proptest! {
        #[test]
        fn resonance_lambda_makes_form_definite(
            w1 in -5.0f64..-0.01, w2 in 0.01f64..5.0, n1 in -3i32..=3, n2 in -3i32..=3,
        ) {
            prop_assume!(n1 != 0 || n2 != 0);
            let res = resonance_formal_stability(w1, w2, n1, n2).unwrap();
            let resonant = (w1 * n2 as f64 - w2 * n1 as f64).abs() <= 1e-12 * (w1 * n2 as f64).abs().max((w2 * n1 as f64).abs());
            prop_assert_eq!(res.is_none(), resonant);
            if let Some(lam) = res {
                let a = w1 + lam * n1 as f64;
                let b = w2 + lam * n2 as f64;
                prop_assert!(a * b > 0.0 && a != 0.0);
            }
        }
    }

    #[test]
    fn hopf_discriminant_examples() {
        let a = Complex64::new(0.0, 1.0);
        assert_eq!(hopf_discriminant(a, -1.0, 1.0), -1.0);
        let [l1, l2] = hopf_eigenvalues(a, -1.0, 1.0);
        assert!((l1 - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        assert!(l2.norm() < 1e-15);
        let [u, _] = hopf_eigenvalues(Complex64::new(1.0, 0.5), 1.0, 1.0);
        assert!(u.re > 0.0);
    }

    #[test]
    fn kirchhoff_blocks_reproduce_spectrum() {
        let p = reference();
        for pe in pe_grid() {
            let d = derived_coeffs(&p, pe);
            let (a, b, c) = kirchhoff_hopf_blocks(&d, SE);
            let disc = hopf_discriminant(a, b, c);
            assert!((disc + 0.25 * spectral_discriminant(&d, SE)).abs() < 1e-12);
            let from_blocks = hopf_eigenvalues(a, b, c);
            let closed = linear_spectrum(&p, pe, SE).eigenvalues;
            for z in from_blocks {
                assert!(closed.iter().any(|w| (w - z).norm() < 1e-12));
            }
            if disc > 0.0 {
                assert!(from_blocks[0].re > 0.0);
            }
        }
    }

    #[test]
    fn hopf_transversality_at_collision() {
        let p = reference();
        assert!(kirchhoff_discriminant(&p, 2.0, SE).abs() < 1e-13);
        let slope = hopf_transversality(&p, SE).unwrap();
        let analytic = derived_coeffs(&p, 2.0).fp * 2.0 * 2.0 * (1.0 / p.m3 - 1.0 / p.m1);
        assert!(slope.abs() >= 1e-6);
        assert!((slope - analytic).abs() < 1e-6);
    }

    #[test]
    fn krein_modes_in_gap() {
        let p = reference();
        let modes = krein_modes(&equilibrium_hessian(&p, 1.5, SE), &so2_momentum_hessian()).unwrap();
        let r = (7.0f64 / 3.0).sqrt();
        let mut mags = [modes[0].omega.abs(), modes[1].omega.abs()];
        mags.sort_by(|a, b| b.total_cmp(a));
        assert!((mags[0] - (1.0 + 0.5 * r)).abs() < 1e-9);
        assert!((mags[1] - (1.0 - 0.5 * r)).abs() < 1e-9);
        assert!(modes[0].omega < 0.0 && modes[1].omega > 0.0);
        assert!(modes.iter().all(|m| m.n.abs() == 1));
        assert_eq!(modes[0].n, -modes[1].n);
        let lam = resonance_formal_stability(modes[0].omega, modes[1].omega, modes[0].n, modes[1].n)
            .unwrap()
            .expect("gap equilibrium is formally stable");
        let m = equilibrium_hessian(&p, 1.5, SE) + so2_momentum_hessian() * lam;
        assert!(is_positive_definite(&m) || is_positive_definite(&-m));
    }

    #[test]
    fn krein_modes_positive_in_em_region() {
        let p = reference();
        let modes = krein_modes(&equilibrium_hessian(&p, 0.5, SE), &so2_momentum_hessian()).unwrap();
        assert!(modes.iter().all(|m| m.omega > 0.0));
        assert!(krein_modes(&equilibrium_hessian(&p, 2.5, SE), &so2_momentum_hessian()).is_err());
    }

    #[test]
    fn krein_sign_matches_quadratic_form_on_standard_oscillators() {
        let h = Matrix4::from_diagonal(&nalgebra::Vector4::new(-2.0, 3.0, -2.0, 3.0));
        let j = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, -1.0, 1.0, -1.0));
        let modes = krein_modes(&h, &j).unwrap();
        assert_eq!(modes[0], KreinMode { omega: -2.0, n: 1 });
        assert!((modes[1].omega - 3.0).abs() < 1e-12 && modes[1].n == -1);
    }
}
