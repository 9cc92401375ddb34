//! Closed-form normal-form coefficients and twist determinants as
//! polynomials in `(f1, f2, μ)`.

use serde::Serialize;

use super::engine::NfParams;
use super::poly::{InvariantPoly, Scalar};

fn k<S: Scalar>(n: i64) -> S {
    S::from_i64(n)
}

/// `Σ c_i x^(d−i) y^i` for the listed coefficients.
fn binary<S: Scalar>(x: &S, y: &S, coeffs: &[i64]) -> S {
    let d = coeffs.len() as u32 - 1;
    coeffs
        .iter()
        .enumerate()
        .fold(S::zero(), |acc, (i, &c)| acc + k::<S>(c) * x.ipow(d - i as u32) * y.ipow(i as u32))
}

/// The coefficients `A20 … A42` at `(x, y) = (f1, f2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ACoeffs<S: Scalar> {
    pub a20: S,
    pub a21: S,
    pub a30: S,
    pub a31: S,
    pub a32: S,
    pub a40: S,
    pub a41: S,
    pub a42: S,
}

pub fn a_coefficients<S: Scalar>(x: &S, y: &S, mu: &S) -> ACoeffs<S> {
    let f = x.clone() + y.clone();
    let xy = x.clone() * y.clone();
    let (f2, f3) = (f.ipow(2), f.ipow(3));
    let (m2, m3) = (mu.ipow(2), mu.ipow(3));
    let b = |c: &[i64]| binary(x, y, c);
    ACoeffs {
        a20: -f.clone() * mu.clone() + f.clone() * y.clone(),
        a21: k::<S>(-4) * f.clone() * mu.clone() + k::<S>(8) * xy.clone(),
        a30: k::<S>(2) * f2.clone() * m2.clone() - k::<S>(2) * f.clone() * b(&[3, 1]) * mu.clone() * y.clone()
            + k::<S>(4) * f.clone() * x.clone() * y.ipow(2),
        a31: k::<S>(15) * f2.clone() * m2.clone() - f.clone() * b(&[5, 44, 11]) * mu.clone()
            + b(&[5, 38, 17]) * xy.clone(),
        a32: k::<S>(15) * f2.clone() * m2.clone() - f.clone() * b(&[11, 44, 5]) * mu.clone()
            + b(&[17, 38, 5]) * xy.clone(),
        a40: k::<S>(-16) * f3.clone() * m3.clone() + k::<S>(2) * b(&[1, 36, 11]) * f2.clone() * m2.clone()
            - k::<S>(2) * f.clone() * b(&[2, 55, 36, 3]) * mu.clone() * y.clone()
            + k::<S>(2) * f.clone() * b(&[1, 26, 5]) * x.clone() * y.ipow(2),
        a41: k::<S>(-182) * f3.clone() * m3.clone() + k::<S>(26) * b(&[3, 31, 8]) * f2.clone() * m2.clone()
            - k::<S>(2) * b(&[13, 1]) * f.clone() * b(&[8, 49, 21]) * mu.clone() * y.clone()
            + k::<S>(2) * b(&[65, 367, 267, 29]) * x.clone() * y.ipow(2),
        a42: k::<S>(-354) * f3 * m3 + k::<S>(3) * b(&[95, 518, 95]) * f2 * m2
            - k::<S>(3) * f * b(&[9, 274, 850, 274, 9]) * mu.clone()
            + k::<S>(3) * b(&[9, 204, 518, 204, 9]) * xy,
    }
}

/// Overall factors of the degree-2, 3 and 4 normal-form terms.
pub fn prefactors<S: Scalar>(x: &S, y: &S) -> [S; 3] {
    let f = x.clone() + y.clone();
    let d2 = (x.clone() - y.clone()).ipow(2);
    [
        k::<S>(8) * f.ipow(3),
        k::<S>(-32) * f.ipow(5) / d2.clone(),
        k::<S>(64) * f.ipow(7) / d2.ipow(2),
    ]
}

/// Half of each normal-form term, labelled with `w1` carrying the
/// frequency `f2`. The full term adds its `w1 ↔ w2`, `f1 ↔ f2` image.
fn fragment<S: Scalar>(x: &S, y: &S, mu: &S, degree: u32) -> InvariantPoly<S> {
    let a = a_coefficients(x, y, mu);
    let half = S::ratio(1, 2);
    let terms: Vec<([u32; 4], S)> = match degree {
        2 => vec![([2, 0, 0, 0], a.a20), ([1, 1, 0, 0], half * a.a21)],
        3 => vec![([3, 0, 0, 0], a.a30), ([2, 1, 0, 0], a.a31)],
        4 => vec![([4, 0, 0, 0], a.a40), ([3, 1, 0, 0], a.a41), ([2, 2, 0, 0], half * a.a42)],
        _ => vec![],
    };
    let mut p = InvariantPoly::zero();
    for (e, c) in terms {
        p.add_term(e, c);
    }
    p
}

fn swap_w<S: Scalar>(p: &InvariantPoly<S>) -> InvariantPoly<S> {
    let mut out = InvariantPoly::zero();
    for (e, c) in p.terms() {
        out.add_term([e[1], e[0], e[2], e[3]], c.clone());
    }
    out
}

/// The closed-form homogeneous normal-form term of invariant degree
/// `degree ∈ {2, 3, 4}` as a polynomial in `w1`, `w2`, with `w1` the
/// action of frequency `ω1 = c·f1`.
pub fn printed_term<S: Scalar>(p: &NfParams<S>, degree: u32) -> InvariantPoly<S> {
    let (x, y, mu) = (&p.f1, &p.f2, &p.mu);
    let own = swap_w(&fragment(x, y, mu, degree));
    let image = fragment(y, x, mu, degree);
    let pre = prefactors(x, y)[degree as usize - 2].clone();
    (&own + &image).scale(&pre)
}

/// The closed-form twist determinants `(D4, D6, D8)`.
pub fn printed_twist<S: Scalar>(p: &NfParams<S>) -> [S; 3] {
    let (x, y, mu) = (&p.f1, &p.f2, &p.mu);
    let f = x.clone() + y.clone();
    let d = x.clone() - y.clone();
    let xy = x.clone() * y.clone();
    let b = |c: &[i64]| binary(x, y, c);
    let d4 = k::<S>(128) * d.ipow(2) * f.ipow(5)
        * (-f.clone() * b(&[1, 4, 1]) * mu.clone() + b(&[1, 10, 1]) * xy.clone());
    let d6 = k::<S>(-2048) * f.ipow(9)
        * (b(&[2, 13, 2]) * f.ipow(2) * mu.ipow(2) - f.clone() * b(&[11, 46, 11]) * mu.clone() * xy.clone()
            + b(&[9, 50, 9]) * xy.ipow(2))
        * d;
    let d8 = k::<S>(16384) * f.ipow(11)
        * (k::<S>(-2) * b(&[8, 91, 177, 91, 8]) * f.ipow(3) * mu.ipow(3)
            + b(&[2, 150, 1113, 1970, 1113, 150, 2]) * f.ipow(2) * mu.ipow(2)
            - f.clone() * b(&[4, 345, 2226, 3850, 2226, 345, 4]) * mu.clone() * xy.clone()
            + b(&[2, 211, 1466, 2642, 1466, 211, 2]) * xy.ipow(2));
    [d4, d6, d8]
}

/// Value of `μ` at which the closed-form `D4` vanishes.
pub fn d4_root_mu<S: Scalar>(f1: &S, f2: &S) -> S {
    let xy = f1.clone() * f2.clone();
    binary(f1, f2, &[1, 10, 1]) * xy / ((f1.clone() + f2.clone()) * binary(f1, f2, &[1, 4, 1]))
}

/// Homogeneity degrees of `(D4, D6, D8)` in `(f1, f2, μ)`.
pub const TWIST_DEGREES: [i32; 3] = [11, 16, 21];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalFormCoeffs {
    pub omega1: f64,
    pub omega2: f64,
    pub multiplier: f64,
    pub a20: f64,
    pub a21: f64,
    pub a30: f64,
    pub a31: f64,
    pub a32: f64,
    pub a40: f64,
    pub a41: f64,
    pub a42: f64,
    /// Factors of the degree-2, 3 and 4 terms.
    pub prefactors: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwistReport {
    pub d4: f64,
    pub d6: f64,
    pub d8: f64,
    /// Smallest `k` with `D_{2k}` clearly nonzero.
    pub first_nonzero: Option<u32>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal_form::engine::{lie_normalize, taylor_invariant_expansion};
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type Q = BigRational;

    fn random_point(rng: &mut ChaCha8Rng) -> NfParams<Q> {
        let f2 = Q::ratio(rng.gen_range(1..30), rng.gen_range(1..11));
        let f1 = f2.clone() + Q::ratio(rng.gen_range(1..30), rng.gen_range(1..11));
        let mu = Q::ratio(rng.gen_range(-30..30), rng.gen_range(1..11));
        NfParams::new(f1, f2, mu)
    }

    #[test]
    fn engine_reproduces_closed_form_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..3 {
            let p = random_point(&mut rng);
            let h = taylor_invariant_expansion(&p, 4).unwrap();
            let n = lie_normalize(&h, 4).unwrap();
            let (o1, o2) = p.omegas();
            let twist = printed_twist(&p);
            for degree in 2..=4u32 {
                let term = n.normal.homogeneous(degree);
                assert_eq!(term, printed_term(&p, degree), "degree {degree}");
                let swapped = term.eval(&[o2.clone(), o1.clone(), Q::from_i64(0), Q::from_i64(0)]);
                assert_eq!(swapped, twist[degree as usize - 2], "twist degree {degree}");
            }
        }
    }

    #[test]
    fn a20_example() {
        let a = a_coefficients(&2.0, &1.0, &0.0);
        assert_eq!(a.a20, 3.0);
    }

    #[test]
    fn companion_coefficients_are_swaps() {
        let (x, y, mu) = (Q::ratio(7, 3), Q::ratio(2, 5), Q::ratio(-3, 4));
        let a = a_coefficients(&x, &y, &mu);
        let s = a_coefficients(&y, &x, &mu);
        assert_eq!(a.a32, s.a31);
        assert_eq!(a.a21, s.a21);
        assert_eq!(a.a42, s.a42);
    }

    #[test]
    fn d4_root() {
        let (x, y) = (Q::ratio(9, 4), Q::from_i64(1));
        let mu = d4_root_mu(&x, &y);
        let [d4, _, _] = printed_twist(&NfParams::new(x, y, mu));
        assert_eq!(d4, Q::from_i64(0));
    }

    #[test]
    fn twist_homogeneity() {
        let p = NfParams::new(Q::ratio(5, 3), Q::ratio(1, 2), Q::ratio(3, 7));
        let two = Q::from_i64(2);
        let q = NfParams::new(p.f1.clone() * two.clone(), p.f2.clone() * two.clone(), p.mu.clone() * two.clone());
        let (a, b) = (printed_twist(&p), printed_twist(&q));
        for i in 0..3 {
            assert_eq!(b[i].clone(), a[i].clone() * two.ipow(TWIST_DEGREES[i] as u32));
        }
    }
}
