//! Birkhoff normal form of the vertical-momentum reduced Hamiltonian in
//! SO(2)-invariants, the closed-form coefficients it is checked against,
//! and the anharmonic-period test.

mod engine;
mod period;
mod poly;
mod printed;

use serde::Serialize;

pub use engine::{lie_normalize, lie_transform, taylor_invariant_expansion, NfParams, Normalized, MAX_DEGREE};
pub use period::{
    invariants, linear_normal_coordinates, linear_period, measure_period, nf_period, NormalForm,
};
pub use poly::{poisson_bracket_w, Exponents, InvariantPoly, Scalar, V3, V4, W1, W2};
pub use printed::{
    a_coefficients, d4_root_mu, prefactors, printed_term, printed_twist, ACoeffs, NormalFormCoeffs, TwistReport,
    TWIST_DEGREES,
};

use crate::error::{Error, Result};
use crate::reduction::ConsolidatedParams;

fn check_params(cp: &ConsolidatedParams) -> Result<()> {
    if cp.f1 > cp.f2 && cp.f2 > 0.0 && cp.mu.is_finite() {
        Ok(())
    } else {
        Err(Error::NotInGap(format!("need f1 > f2 > 0, got f1 = {}, f2 = {}", cp.f1, cp.f2)))
    }
}

pub fn nf_coefficients(cp: &ConsolidatedParams) -> Result<NormalFormCoeffs> {
    check_params(cp)?;
    let p = NfParams::new(cp.f1, cp.f2, cp.mu);
    let (omega1, omega2) = p.omegas();
    let a = a_coefficients(&cp.f1, &cp.f2, &cp.mu);
    Ok(NormalFormCoeffs {
        omega1,
        omega2,
        multiplier: p.multiplier(),
        a20: a.a20,
        a21: a.a21,
        a30: a.a30,
        a31: a.a31,
        a32: a.a32,
        a40: a.a40,
        a41: a.a41,
        a42: a.a42,
        prefactors: prefactors(&cp.f1, &cp.f2),
    })
}

pub fn twist_determinants(cp: &ConsolidatedParams) -> Result<TwistReport> {
    check_params(cp)?;
    let [d4, d6, d8] = printed_twist(&NfParams::new(cp.f1, cp.f2, cp.mu));
    let scale = cp.f1.max(cp.mu.abs());
    let first_nonzero = [d4, d6, d8]
        .iter()
        .zip(TWIST_DEGREES)
        .position(|(d, deg)| d.abs() > 1e-12 * scale.powi(deg))
        .map(|i| i as u32 + 2);
    Ok(TwistReport { d4, d6, d8, first_nonzero })
}

/// Everything the normal-form check reports for one parameter point.
#[derive(Debug, Clone, Serialize)]
pub struct NormalFormData {
    pub params: ConsolidatedParams,
    pub coeffs: NormalFormCoeffs,
    pub twist: TwistReport,
}

pub fn normal_form_data(cp: &ConsolidatedParams) -> Result<NormalFormData> {
    Ok(NormalFormData {
        params: *cp,
        coeffs: nf_coefficients(cp)?,
        twist: twist_determinants(cp)?,
    })
}
