//! Polynomials in the SO(2)-invariants with exact or floating coefficients.
//!
//! Variables are `(w1, w2, v3, v4)` with `v3 = √2·w3` and `v4 = √2·w4`, so
//! that the expansion of the testbed Hamiltonian has rational coefficients
//! whenever the parameters are rational. They satisfy `v3² + v4² = 4w1w2`.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Coefficient field.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Whether arithmetic is exact.
    const EXACT: bool;

    fn from_i64(n: i64) -> Self;
    fn to_f64(&self) -> f64;

    /// Zero test: exact for rationals, relative to `scale` for floats.
    fn is_negligible(&self, scale: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.to_f64().abs() <= 1e-13 * scale
        }
    }

    fn ratio(n: i64, d: i64) -> Self {
        Self::from_i64(n) / Self::from_i64(d)
    }

    fn ipow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| acc * self.clone())
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Exponents of `w1^a w2^b v3^c v4^e`.
pub type Exponents = [u32; 4];

pub const W1: usize = 0;
pub const W2: usize = 1;
pub const V3: usize = 2;
pub const V4: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantPoly<S: Scalar> {
    terms: BTreeMap<Exponents, S>,
}

impl<S: Scalar> Default for InvariantPoly<S> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<S: Scalar> InvariantPoly<S> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn constant(c: S) -> Self {
        Self::monomial([0; 4], c)
    }

    pub fn var(i: usize) -> Self {
        let mut e = [0; 4];
        e[i] = 1;
        Self::monomial(e, S::one())
    }

    pub fn monomial(e: Exponents, c: S) -> Self {
        let mut p = Self::zero();
        p.add_term(e, c);
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &S)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &Exponents) -> S {
        self.terms.get(e).cloned().unwrap_or_else(S::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, e: Exponents, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                let sum = v.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *v = sum;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn degree_of(e: &Exponents) -> u32 {
        e.iter().sum()
    }

    /// Highest total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Self::degree_of).max()
    }

    pub fn homogeneous(&self, d: u32) -> Self {
        self.filter(|e| Self::degree_of(e) == d)
    }

    pub fn truncate(&self, max_degree: u32) -> Self {
        self.filter(|e| Self::degree_of(e) <= max_degree)
    }

    fn filter(&self, keep: impl Fn(&Exponents) -> bool) -> Self {
        Self {
            terms: self.terms.iter().filter(|(e, _)| keep(e)).map(|(e, c)| (*e, c.clone())).collect(),
        }
    }

    pub fn scale(&self, k: &S) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            out.add_term(*e, c.clone() * k.clone());
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(S::one()), |acc, _| &acc * self)
    }

    /// Product truncated at total degree `max_degree`.
    pub fn mul_truncated(&self, other: &Self, max_degree: u32) -> Self {
        let mut out = Self::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]];
                if Self::degree_of(&e) <= max_degree {
                    out.add_term(e, ca.clone() * cb.clone());
                }
            }
        }
        out
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut d = *e;
                d[i] -= 1;
                out.add_term(d, c.clone() * S::from_i64(e[i] as i64));
            }
        }
        out
    }

    pub fn eval(&self, x: &[S; 4]) -> S {
        let mut acc = S::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for i in 0..4 {
                m = m * x[i].ipow(e[i]);
            }
            acc = acc + m;
        }
        acc
    }

    pub fn eval_f64(&self, x: &[f64; 4]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c.to_f64() * (0..4).map(|i| x[i].powi(e[i] as i32)).product::<f64>())
            .sum()
    }

    /// Evaluation at the unscaled invariants `(w1, w2, w3, w4)`.
    pub fn eval_w(&self, w: &[f64; 4]) -> f64 {
        let s = std::f64::consts::SQRT_2;
        self.eval_f64(&[w[0], w[1], s * w[2], s * w[3]])
    }

    /// True when only `w1` and `w2` occur.
    pub fn is_normal(&self) -> bool {
        self.terms.keys().all(|e| e[V3] == 0 && e[V4] == 0)
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> InvariantPoly<T> {
        let mut out = InvariantPoly::zero();
        for (e, c) in &self.terms {
            out.add_term(*e, f(c));
        }
        out
    }

    /// Reduces every power `v4^e`, `e ≥ 2`, with `v4² = 4w1w2 − v3²`, so the
    /// result has `v4`-degree at most one. Values on the invariant variety are
    /// unchanged.
    pub fn canonicalize(&self) -> Self {
        let mut out = Self::zero();
        let mut stack: Vec<(Exponents, S)> = self.terms.iter().map(|(e, c)| (*e, c.clone())).collect();
        while let Some((e, c)) = stack.pop() {
            if e[V4] < 2 {
                out.add_term(e, c);
                continue;
            }
            let mut a = e;
            a[V4] -= 2;
            a[W1] += 1;
            a[W2] += 1;
            stack.push((a, c.clone() * S::from_i64(4)));
            let mut b = e;
            b[V4] -= 2;
            b[V3] += 2;
            stack.push((b, -c));
        }
        out
    }

    /// Bracket of two invariants:
    /// `{w1,v3} = {w2,v3} = v4`, `{w1,v4} = {w2,v4} = −v3`,
    /// `{v3,v4} = −2(w1 + w2)`, `{w1,w2} = 0`.
    /// The result is not canonicalised; see [`poisson_bracket_w`].
    pub fn bracket_raw(&self, other: &Self) -> Self {
        let d: Vec<Self> = (0..4).map(|i| self.derivative(i)).collect();
        let g: Vec<Self> = (0..4).map(|i| other.derivative(i)).collect();
        let two = S::from_i64(2);
        let v3 = Self::var(V3);
        let v4 = Self::var(V4);
        let w12 = &Self::var(W1) + &Self::var(W2);
        let mut out = Self::zero();
        for i in [W1, W2] {
            // {w_i, v3} = v4, {w_i, v4} = −v3
            out = &out + &(&(&(&d[i] * &g[V3]) - &(&d[V3] * &g[i])) * &v4);
            out = &out - &(&(&(&d[i] * &g[V4]) - &(&d[V4] * &g[i])) * &v3);
        }
        let cross = &(&d[V3] * &g[V4]) - &(&d[V4] * &g[V3]);
        &out - &(&cross * &w12).scale(&two)
    }
}

/// Bracket of two invariants, reduced to canonical form.
pub fn poisson_bracket_w<S: Scalar>(f: &InvariantPoly<S>, g: &InvariantPoly<S>) -> InvariantPoly<S> {
    f.bracket_raw(g).canonicalize()
}

impl<S: Scalar> Add for &InvariantPoly<S> {
    type Output = InvariantPoly<S>;
    fn add(self, o: Self) -> InvariantPoly<S> {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl<S: Scalar> Sub for &InvariantPoly<S> {
    type Output = InvariantPoly<S>;
    fn sub(self, o: Self) -> InvariantPoly<S> {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl<S: Scalar> Mul for &InvariantPoly<S> {
    type Output = InvariantPoly<S>;
    fn mul(self, o: Self) -> InvariantPoly<S> {
        self.mul_truncated(o, u32::MAX)
    }
}

impl<S: Scalar> Neg for &InvariantPoly<S> {
    type Output = InvariantPoly<S>;
    fn neg(self) -> InvariantPoly<S> {
        self.scale(&-S::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::ratio(n, d)
    }

    fn random_poly(rng: &mut ChaCha8Rng, max_degree: u32) -> InvariantPoly<Q> {
        let mut p = InvariantPoly::zero();
        for _ in 0..6 {
            let mut e = [0u32; 4];
            let d = rng.gen_range(0..=max_degree);
            for _ in 0..d {
                e[rng.gen_range(0..4)] += 1;
            }
            p.add_term(e, q(rng.gen_range(-9..=9), rng.gen_range(1..=5)));
        }
        p
    }

    /// Point on the variety from phase-space coordinates.
    fn invariants_of(x: [f64; 4]) -> [f64; 4] {
        let [q1, p1, q2, p2] = x;
        [
            0.5 * (q1 * q1 + p1 * p1),
            0.5 * (q2 * q2 + p2 * p2),
            q1 * q2 - p1 * p2,
            q1 * p2 + q2 * p1,
        ]
    }

    #[test]
    fn bracket_table() {
        let w = |i| InvariantPoly::<Q>::var(i);
        let br = poisson_bracket_w;
        assert_eq!(br(&w(V3), &w(V4)), (&w(W1) + &w(W2)).scale(&q(-2, 1)));
        assert_eq!(br(&w(W1), &w(V3)), w(V4));
        assert_eq!(br(&w(W2), &w(V4)), -&w(V3));
        assert!(br(&w(W1), &w(W2)).is_zero());
        // Unscaled: {w3, w4} = −(w1 + w2).
        let w3w4 = br(&w(V3), &w(V4)).scale(&q(1, 2));
        assert_eq!(w3w4, -&(&w(W1) + &w(W2)));
    }

    #[test]
    fn bracket_is_antisymmetric_and_satisfies_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let f = random_poly(&mut rng, 3);
            let g = random_poly(&mut rng, 3);
            let h = random_poly(&mut rng, 3);
            assert!(poisson_bracket_w(&f, &f).is_zero());
            assert_eq!(poisson_bracket_w(&f, &g), -&poisson_bracket_w(&g, &f));
            let jac = &(&f.bracket_raw(&g.bracket_raw(&h)) + &g.bracket_raw(&h.bracket_raw(&f)))
                + &h.bracket_raw(&f.bracket_raw(&g));
            assert!(jac.is_zero());
        }
    }

    #[test]
    fn relation_is_a_casimir() {
        let w = |i| InvariantPoly::<Q>::var(i);
        let rel = &(&w(W1) * &w(W2)).scale(&q(4, 1)) - &(&w(V3).pow(2) + &w(V4).pow(2));
        for i in 0..4 {
            assert!(w(i).bracket_raw(&rel).is_zero());
        }
        assert!(rel.canonicalize().is_zero());
    }

    #[test]
    fn canonical_form_agrees_on_variety() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let polys: Vec<_> = (0..10).map(|_| random_poly(&mut rng, 5)).collect();
        for p in &polys {
            let c = p.canonicalize();
            assert!(c.terms().all(|(e, _)| e[V4] <= 1));
            let pf = p.map_coeffs(|c| Scalar::to_f64(c));
            let cf = c.map_coeffs(|c| Scalar::to_f64(c));
            for _ in 0..100 {
                let x = [(); 4].map(|_| rng.gen_range(-1.0..1.0));
                let w = invariants_of(x);
                let (a, b) = (pf.eval_f64(&w), cf.eval_f64(&w));
                assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn bracket_matches_phase_space_bracket_up_to_sign() {
        // On (Q1, P1, Q2, P2) with the canonical bracket, the invariants
        // bracket with the opposite sign of the table.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let f = random_poly(&mut rng, 2).map_coeffs(|c| Scalar::to_f64(c));
        let g = random_poly(&mut rng, 2).map_coeffs(|c| Scalar::to_f64(c));
        let fg = poisson_bracket_w(&f, &g);
        let h = 1e-5;
        for _ in 0..20 {
            let x: [f64; 4] = [(); 4].map(|_| rng.gen_range(-1.0..1.0));
            let grad = |p: &InvariantPoly<f64>| -> [f64; 4] {
                let mut out = [0.0; 4];
                for i in 0..4 {
                    let (mut a, mut b) = (x, x);
                    a[i] += h;
                    b[i] -= h;
                    out[i] = (p.eval_f64(&invariants_of(a)) - p.eval_f64(&invariants_of(b))) / (2.0 * h);
                }
                out
            };
            let (df, dg) = (grad(&f), grad(&g));
            let canonical = df[0] * dg[1] - df[1] * dg[0] + df[2] * dg[3] - df[3] * dg[2];
            let table = fg.eval_f64(&invariants_of(x));
            assert!((canonical + table).abs() < 1e-6 * (1.0 + table.abs()), "{canonical} vs {table}");
        }
    }
}
