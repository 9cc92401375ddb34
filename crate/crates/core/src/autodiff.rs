//! Forward-mode automatic differentiation.
//!
//! The Hamiltonians in this crate are written once, generically over [`Real`],
//! and evaluated with `f64` for values, [`Dual`] for exact gradients and
//! [`Jet2`] for exact Hessians.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar arithmetic needed by the model Hamiltonians.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sqrt(self) -> Self;

    fn scale(self, k: f64) -> Self {
        self * Self::cst(k)
    }

    fn sq(self) -> Self {
        self * self
    }
}

impl Real for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        self * k
    }
}

/// First-order dual number carrying a gradient with respect to `N` seeds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<const N: usize> {
    pub v: f64,
    pub d: [f64; N],
}

impl<const N: usize> Dual<N> {
    pub fn constant(v: f64) -> Self {
        Self { v, d: [0.0; N] }
    }

    /// Independent variable number `i`.
    pub fn var(v: f64, i: usize) -> Self {
        let mut d = [0.0; N];
        d[i] = 1.0;
        Self { v, d }
    }

    pub fn seed(x: [f64; N]) -> [Self; N] {
        let mut out = [Self::constant(0.0); N];
        for i in 0..N {
            out[i] = Self::var(x[i], i);
        }
        out
    }

    #[inline]
    fn chain(self, v: f64, dv: f64) -> Self {
        let mut d = self.d;
        for x in d.iter_mut() {
            *x *= dv;
        }
        Self { v, d }
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, o: Self) -> Self {
        self.v += o.v;
        for i in 0..N {
            self.d[i] += o.d[i];
        }
        self
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, o: Self) -> Self {
        self.v -= o.v;
        for i in 0..N {
            self.d[i] -= o.d[i];
        }
        self
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let mut d = [0.0; N];
        for i in 0..N {
            d[i] = self.d[i] * o.v + self.v * o.d[i];
        }
        Self { v: self.v * o.v, d }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = 1.0 / o.v;
        let v = self.v * inv;
        let mut d = [0.0; N];
        for i in 0..N {
            d[i] = (self.d[i] - v * o.d[i]) * inv;
        }
        Self { v, d }
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.chain(-self.v, -1.0)
    }
}

impl<const N: usize> Real for Dual<N> {
    fn cst(v: f64) -> Self {
        Self::constant(v)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r)
    }
    fn scale(self, k: f64) -> Self {
        self.chain(self.v * k, k)
    }
}

/// Second-order jet: value, gradient and Hessian with respect to `N` seeds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2<const N: usize> {
    pub v: f64,
    pub g: [f64; N],
    pub h: [[f64; N]; N],
}

impl<const N: usize> Jet2<N> {
    pub fn constant(v: f64) -> Self {
        Self {
            v,
            g: [0.0; N],
            h: [[0.0; N]; N],
        }
    }

    pub fn seed(x: [f64; N]) -> [Self; N] {
        let mut out = [Self::constant(0.0); N];
        for i in 0..N {
            out[i].v = x[i];
            out[i].g[i] = 1.0;
        }
        out
    }

    /// Applies a scalar function with derivatives `d1`, `d2` at `self.v`.
    fn unary(self, v: f64, d1: f64, d2: f64) -> Self {
        let mut g = [0.0; N];
        let mut h = [[0.0; N]; N];
        for i in 0..N {
            g[i] = d1 * self.g[i];
            for j in 0..N {
                h[i][j] = d1 * self.h[i][j] + d2 * self.g[i] * self.g[j];
            }
        }
        Self { v, g, h }
    }
}

impl<const N: usize> Add for Jet2<N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self.v += o.v;
        for i in 0..N {
            self.g[i] += o.g[i];
            for j in 0..N {
                self.h[i][j] += o.h[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Sub for Jet2<N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<const N: usize> Mul for Jet2<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut g = [0.0; N];
        let mut h = [[0.0; N]; N];
        for i in 0..N {
            g[i] = self.g[i] * o.v + self.v * o.g[i];
            for j in 0..N {
                h[i][j] = self.h[i][j] * o.v
                    + self.v * o.h[i][j]
                    + self.g[i] * o.g[j]
                    + self.g[j] * o.g[i];
            }
        }
        Self {
            v: self.v * o.v,
            g,
            h,
        }
    }
}

impl<const N: usize> Div for Jet2<N> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let r = 1.0 / o.v;
        self * o.unary(r, -r * r, 2.0 * r * r * r)
    }
}

impl<const N: usize> Neg for Jet2<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.unary(-self.v, -1.0, 0.0)
    }
}

impl<const N: usize> Real for Jet2<N> {
    fn cst(v: f64) -> Self {
        Self::constant(v)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.unary(r, 0.5 / r, -0.25 / (r * self.v))
    }
    fn scale(self, k: f64) -> Self {
        self.unary(self.v * k, k, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f<T: Real>(x: T, y: T) -> T {
        (x * y + T::cst(1.0)).sqrt() / (x - y.scale(3.0))
    }

    #[test]
    fn dual_and_jet_match_finite_differences() {
        let (x, y) = (0.7, -0.3);
        let [dx, dy] = Dual::<2>::seed([x, y]);
        let d = f(dx, dy);
        let [jx, jy] = Jet2::<2>::seed([x, y]);
        let j = f(jx, jy);
        let h = 1e-5;
        let fx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
        let fy = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
        let fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h))
            / (4.0 * h * h);
        let fxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
        assert!((d.d[0] - fx).abs() < 1e-8);
        assert!((d.d[1] - fy).abs() < 1e-8);
        assert_eq!(d.d, j.g);
        assert!((j.h[0][1] - fxy).abs() < 1e-5);
        assert!((j.h[0][0] - fxx).abs() < 1e-4);
        assert_eq!(j.h[0][1], j.h[1][0]);
    }
}
