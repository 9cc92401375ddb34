//! Taylor expansion of the testbed Hamiltonian in invariants and its
//! Birkhoff normalisation by Lie series.


use super::poly::{InvariantPoly, Scalar, V3, V4, W1, W2};
use crate::error::{Error, Result};

/// Largest supported invariant degree (phase-space order 10).
pub const MAX_DEGREE: u32 = 5;

/// Parameters `(f1, f2, μ)` over an arbitrary coefficient field.
#[derive(Debug, Clone, PartialEq)]
pub struct NfParams<S: Scalar> {
    pub f1: S,
    pub f2: S,
    pub mu: S,
}

impl<S: Scalar> NfParams<S> {
    pub fn new(f1: S, f2: S, mu: S) -> Self {
        Self { f1, f2, mu }
    }

    /// Basis scale `2(f1 + f2)` of the position components.
    pub fn basis_a(&self) -> S {
        S::from_i64(2) * (self.f1.clone() + self.f2.clone())
    }

    /// Basis scale `f1 − f2` of the momentum components.
    pub fn basis_b(&self) -> S {
        self.f1.clone() - self.f2.clone()
    }

    /// Symplectic multiplier `4(f1 − f2)(f1 + f2)` of the basis.
    pub fn multiplier(&self) -> S {
        S::from_i64(2) * self.basis_a() * self.basis_b()
    }

    pub fn omegas(&self) -> (S, S) {
        let c = self.multiplier();
        (c.clone() * self.f1.clone(), c * self.f2.clone())
    }
}

/// Coefficients of `√(1 − s) = Σ c_k s^k`.
fn sqrt_series<S: Scalar>(n: usize) -> Vec<S> {
    let mut c = vec![S::one()];
    for k in 1..=n {
        let prev = c[k - 1].clone();
        c.push(prev * S::ratio(2 * k as i64 - 3, 2 * k as i64));
    }
    c
}

fn series_in<S: Scalar>(coeffs: &[S], s: &InvariantPoly<S>, max_degree: u32) -> InvariantPoly<S> {
    let mut out = InvariantPoly::zero();
    let mut power = InvariantPoly::constant(S::one());
    for c in coeffs {
        out = &out + &power.scale(c);
        power = power.mul_truncated(s, max_degree);
        if power.is_zero() {
            break;
        }
    }
    out
}

/// Expansion of `H − μ` in the invariants of the linear normal-form
/// coordinates, through invariant degree `max_degree`, in canonical form.
///
/// With `q = a(Q1 + P2, P1 + Q2)` and `u = b(P1 − Q2, P2 − Q1)` the building
/// blocks are `|q|² = 2a²(w1 + w2 + v4)`, `|u|² = 2b²(w1 + w2 − v4)`,
/// `q·u = −2ab·v3` and `q1u2 − q2u1 = 2ab(w2 − w1)`.
pub fn taylor_invariant_expansion<S: Scalar>(p: &NfParams<S>, max_degree: u32) -> Result<InvariantPoly<S>> {
    if max_degree > MAX_DEGREE {
        return Err(Error::OrderOverflow(max_degree as usize));
    }
    let d = max_degree;
    let (a, b) = (p.basis_a(), p.basis_b());
    let two = S::from_i64(2);
    let w1 = InvariantPoly::<S>::var(W1);
    let w2 = InvariantPoly::<S>::var(W2);
    let v3 = InvariantPoly::<S>::var(V3);
    let v4 = InvariantPoly::<S>::var(V4);
    let w12 = &w1 + &w2;
    let s = (&w12 + &v4).scale(&(two.clone() * a.clone() * a.clone()));
    let uu = (&w12 - &v4).scale(&(two.clone() * b.clone() * b.clone()));
    let x = v3.scale(&(-two.clone() * a.clone() * b.clone()));
    let l = (&w2 - &w1).scale(&(two.clone() * a * b));

    let n = d as usize + 1;
    let c = sqrt_series::<S>(n + 1);
    let f_coeffs: Vec<S> = (0..n).map(|k| -c[k + 1].clone()).collect();
    let mut f2_coeffs = vec![S::zero(); n];
    for i in 0..n {
        for j in 0..n - i {
            f2_coeffs[i + j] = f2_coeffs[i + j].clone() + f_coeffs[i].clone() * f_coeffs[j].clone();
        }
    }
    let f = series_in(&f_coeffs, &s, d);
    let f2 = series_in(&f2_coeffs, &s, d);
    let mut pot = c.clone();
    pot[0] = S::zero();
    pot[1] = S::zero();
    let potential = series_in(&pot[..n.min(pot.len())], &s, d);

    let fp = p.f1.clone() + p.f2.clone();
    let fq = -(p.f1.clone() * p.f2.clone()) / fp.clone();
    let kinetic = &(&(&uu + &f2.mul_truncated(&s, d)) - &f.mul_truncated(&l, d).scale(&two)) - &x.mul_truncated(&x, d);
    let h = &(&kinetic.scale(&(fp / two)) + &s.scale(&(fq / S::from_i64(2)))) + &potential.scale(&p.mu);
    Ok(h.truncate(d).canonicalize())
}

/// Result of [`lie_normalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized<S: Scalar> {
    /// Normal form, a polynomial in `w1`, `w2` only.
    pub normal: InvariantPoly<S>,
    /// Nonzero generators in the order they were applied.
    pub generators: Vec<InvariantPoly<S>>,
}

/// Rotation average of `v3^i v4^j` over the circle `v3² + v4² = 1`.
fn circle_average<S: Scalar>(i: u32, j: u32) -> S {
    if i % 2 == 1 || j % 2 == 1 {
        return S::zero();
    }
    let dfact = |n: i64| -> S {
        let mut acc = S::one();
        let mut k = n;
        while k > 1 {
            acc = acc * S::from_i64(k);
            k -= 2;
        }
        acc
    };
    dfact(i as i64 - 1) * dfact(j as i64 - 1) / dfact((i + j) as i64)
}

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, t| acc * (n - t) as i64 / (t + 1) as i64)
}

/// Solves `R g = t` for binary forms `Σ g_i v3^i v4^(m−i)` where
/// `R = −v4∂/∂v3 + v3∂/∂v4`. The right-hand side must have zero circle
/// average; the returned solution has zero circle average too.
fn solve_rotation<S: Scalar>(m: u32, t: &[S]) -> Vec<S> {
    let n = m as usize + 1;
    let mut rows: Vec<Vec<S>> = vec![vec![S::zero(); n + 1]; n];
    for i in 0..n {
        if i > 0 {
            rows[i - 1][i] = S::from_i64(-(i as i64));
        }
        if i + 1 < n {
            rows[i + 1][i] = S::from_i64(m as i64 - i as i64);
        }
        rows[i][n] = t[i].clone();
    }
    let scale = t.iter().map(|v| v.to_f64().abs()).fold(1.0, f64::max) * m.max(1) as f64;
    let negligible = |v: &S| v.is_negligible(scale);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(pr) = (r..n)
            .filter(|&k| !negligible(&rows[k][col]))
            .max_by(|&x, &y| rows[x][col].to_f64().abs().total_cmp(&rows[y][col].to_f64().abs()))
        else {
            continue;
        };
        rows.swap(r, pr);
        let pv = rows[r][col].clone();
        for c in col..=n {
            rows[r][c] = rows[r][c].clone() / pv.clone();
        }
        for k in 0..n {
            if k != r && !rows[k][col].is_zero() {
                let factor = rows[k][col].clone();
                for c in col..=n {
                    rows[k][c] = rows[k][c].clone() - factor.clone() * rows[r][c].clone();
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    let mut g = vec![S::zero(); n];
    for (row, &col) in pivots.iter().enumerate() {
        g[col] = rows[row][n].clone();
    }
    if m % 2 == 0 {
        let avg = (0..n).fold(S::zero(), |acc, i| acc + g[i].clone() * circle_average::<S>(i as u32, m - i as u32));
        for j in 0..=m / 2 {
            let i = 2 * j as usize;
            g[i] = g[i].clone() - avg.clone() * S::from_i64(binomial(m / 2, j));
        }
    }
    g
}

/// Kernel part and generator for one homogeneous degree: returns `g` with
/// `(ω1 − ω2)·R g = −(h − avg h)`.
fn homological_generator<S: Scalar>(h: &InvariantPoly<S>, delta: &S) -> InvariantPoly<S> {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(u32, u32, u32), Vec<S>> = BTreeMap::new();
    for (e, c) in h.terms() {
        let m = e[V3] + e[V4];
        let v = groups.entry((e[W1], e[W2], m)).or_insert_with(|| vec![S::zero(); m as usize + 1]);
        v[e[V3] as usize] = v[e[V3] as usize].clone() + c.clone();
    }
    let mut g = InvariantPoly::zero();
    for ((a, b, m), coeffs) in groups {
        let mut target: Vec<S> = coeffs.iter().map(|c| -c.clone() / delta.clone()).collect();
        if m % 2 == 0 {
            let avg = (0..=m).fold(S::zero(), |acc, i| {
                acc + coeffs[i as usize].clone() * circle_average::<S>(i, m - i)
            });
            for j in 0..=m / 2 {
                let i = 2 * j as usize;
                target[i] = target[i].clone() + avg.clone() * S::from_i64(binomial(m / 2, j)) / delta.clone();
            }
        }
        let sol = solve_rotation(m, &target);
        for (i, c) in sol.into_iter().enumerate() {
            g.add_term([a, b, i as u32, m - i as u32], c);
        }
    }
    g
}

/// `exp(ad_G) H = H + {G, H} + {G, {G, H}}/2 + …`, truncated at `max_degree`.
pub fn lie_transform<S: Scalar>(h: &InvariantPoly<S>, g: &InvariantPoly<S>, max_degree: u32) -> InvariantPoly<S> {
    let mut out = h.clone();
    let mut term = h.clone();
    for n in 1.. {
        term = g.bracket_raw(&term).truncate(max_degree).canonicalize().scale(&S::ratio(1, n));
        if term.is_zero() {
            break;
        }
        out = &out + &term;
    }
    out
}

/// Degree-by-degree Birkhoff normalisation through `max_degree`.
///
/// The quadratic part must be `ω1w1 − ω2w2` with `ω1 ≠ ω2`. On it the
/// homological operator is `(ω1 − ω2)(−v4∂/∂v3 + v3∂/∂v4)`, whose kernel on
/// the invariant variety consists of functions of `w1`, `w2`.
pub fn lie_normalize<S: Scalar>(h: &InvariantPoly<S>, max_degree: u32) -> Result<Normalized<S>> {
    if max_degree > MAX_DEGREE {
        return Err(Error::OrderOverflow(max_degree as usize));
    }
    let h = h.canonicalize();
    let h1 = h.homogeneous(1);
    let omega1 = h1.coeff(&[1, 0, 0, 0]);
    let omega2 = -h1.coeff(&[0, 1, 0, 0]);
    let scale = omega1.to_f64().abs() + omega2.to_f64().abs();
    let stray = h1.terms().filter(|(e, _)| e[V3] + e[V4] > 0).map(|(_, c)| c.to_f64().abs()).fold(0.0, f64::max);
    if stray > 1e-12 * scale || (stray > 0.0 && S::EXACT) {
        return Err(Error::Precondition("quadratic part is not in normal form".into()));
    }
    let delta = omega1 - omega2;
    if delta.is_negligible(scale) {
        return Err(Error::Resonance);
    }
    let mut current = h.filter_normal_quadratic();
    let mut generators = Vec::new();
    for d in 2..=max_degree {
        let hd = current.homogeneous(d);
        let g = homological_generator(&hd, &delta);
        if g.is_zero() {
            continue;
        }
        current = lie_transform(&current, &g, max_degree);
        generators.push(g);
    }
    let normal = current.truncate(max_degree);
    debug_assert!(!S::EXACT || normal.is_normal());
    Ok(Normalized {
        normal: normal.filter_normal_terms(),
        generators,
    })
}

impl<S: Scalar> InvariantPoly<S> {
    /// Drops stray non-normal degree-1 residues left by floating point.
    fn filter_normal_quadratic(&self) -> Self {
        let mut out = Self::zero();
        for (e, c) in self.terms() {
            if Self::degree_of(e) != 1 || e[V3] + e[V4] == 0 {
                out.add_term(*e, c.clone());
            }
        }
        out
    }

    /// Keeps only the `w1`, `w2` part, discarding floating-point residues.
    fn filter_normal_terms(&self) -> Self {
        let mut out = Self::zero();
        for (e, c) in self.terms() {
            if e[V3] + e[V4] == 0 {
                out.add_term(*e, c.clone());
            }
        }
        out
    }
}
