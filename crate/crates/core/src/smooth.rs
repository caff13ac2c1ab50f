//! Smooth vector-valued maps with exact forward-mode derivatives.
//!
//! A [`SmoothFn`] wraps a closure written once at the nested-dual level
//! [`D2`]; plain values, Jacobians and second derivatives are all obtained by
//! seeding the inputs, so there is a single definition per map and no
//! divergence between the value and derivative paths.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::dual::{Real, D2};

type BoxedMap = Arc<dyn Fn(&[D2], &mut [D2]) + Send + Sync>;

/// A smooth map `R^in -> R^out`.
#[derive(Clone)]
pub struct SmoothFn {
    input_dim: usize,
    output_dim: usize,
    f: BoxedMap,
}

impl std::fmt::Debug for SmoothFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SmoothFn({} -> {})", self.input_dim, self.output_dim)
    }
}

impl SmoothFn {
    pub fn new(
        input_dim: usize,
        output_dim: usize,
        f: impl Fn(&[D2], &mut [D2]) + Send + Sync + 'static,
    ) -> Self {
        SmoothFn {
            input_dim,
            output_dim,
            f: Arc::new(f),
        }
    }

    /// Constant map ignoring its input.
    pub fn constant(input_dim: usize, values: Vec<f64>) -> Self {
        let out_dim = values.len();
        SmoothFn::new(input_dim, out_dim, move |_, out| {
            for (o, v) in out.iter_mut().zip(&values) {
                *o = D2::lift(*v);
            }
        })
    }

    /// The identity on `R^n`.
    pub fn identity(n: usize) -> Self {
        SmoothFn::new(n, n, |x, out| out.copy_from_slice(x))
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    /// Raw evaluation at a seeded input.
    pub fn eval_seeded(&self, x: &[D2], out: &mut [D2]) {
        debug_assert_eq!(x.len(), self.input_dim);
        debug_assert_eq!(out.len(), self.output_dim);
        (self.f)(x, out)
    }

    /// Plain value.
    pub fn value(&self, u: &[f64]) -> Vec<f64> {
        let x: Vec<D2> = u.iter().map(|&v| D2::lift(v)).collect();
        let mut out = vec![D2::lift(0.0); self.output_dim];
        self.eval_seeded(&x, &mut out);
        out.iter().map(|d| d.value()).collect()
    }

    /// Value together with the Jacobian (`output_dim x input_dim`).
    pub fn jet1(&self, u: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
        let mut jac = DMatrix::zeros(self.output_dim, self.input_dim);
        let mut value = vec![0.0; self.output_dim];
        let mut x: Vec<D2> = u.iter().map(|&v| D2::lift(v)).collect();
        let mut out = vec![D2::lift(0.0); self.output_dim];
        for k in 0..self.input_dim {
            x[k] = D2::seeded(u[k], 1.0, 0.0);
            self.eval_seeded(&x, &mut out);
            x[k] = D2::lift(u[k]);
            for (a, o) in out.iter().enumerate() {
                jac[(a, k)] = o.eps.re;
                value[a] = o.re.re;
            }
        }
        (value, jac)
    }

    /// Directional second derivative `d_i d_j f` of every component.
    pub fn second(&self, u: &[f64], i: usize, j: usize) -> Vec<f64> {
        let mut x: Vec<D2> = u.iter().map(|&v| D2::lift(v)).collect();
        x[i] = D2::seeded(u[i], 1.0, 0.0);
        // seeds accumulate when i == j
        x[j] = D2::seeded(u[j], x[j].eps.re, 1.0);
        let mut out = vec![D2::lift(0.0); self.output_dim];
        self.eval_seeded(&x, &mut out);
        out.iter().map(|o| o.eps.eps).collect()
    }
}

/// Generic Gauss–Jordan inverse for small matrices over any [`Real`] scalar.
/// Row-major `n x n` input; returns `None` when a pivot vanishes.
pub fn invert_small<T: Real>(a: &[T], n: usize) -> Option<Vec<T>> {
    let mut m = a.to_vec();
    let mut inv: Vec<T> = (0..n * n)
        .map(|k| {
            if k / n == k % n {
                T::one()
            } else {
                T::zero()
            }
        })
        .collect();
    for col in 0..n {
        let mut piv = col;
        let mut best = m[col * n + col].value().abs();
        for r in col + 1..n {
            let cand = m[r * n + col].value().abs();
            if cand > best {
                best = cand;
                piv = r;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return None;
        }
        if piv != col {
            for c in 0..n {
                m.swap(col * n + c, piv * n + c);
                inv.swap(col * n + c, piv * n + c);
            }
        }
        let d = m[col * n + col];
        for c in 0..n {
            m[col * n + c] = m[col * n + c] / d;
            inv[col * n + c] = inv[col * n + c] / d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = m[r * n + col];
            if factor == T::zero() {
                continue;
            }
            for c in 0..n {
                m[r * n + c] = m[r * n + c] - factor * m[col * n + c];
                inv[r * n + c] = inv[r * n + c] - factor * inv[col * n + c];
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::Real;
    use approx::assert_relative_eq;

    fn trig_map() -> SmoothFn {
        SmoothFn::new(2, 2, |x, out| {
            out[0] = x[0].sin() * x[1];
            out[1] = x[0] * x[0] + x[1].exp();
        })
    }

    #[test]
    fn jet1_matches_hand_jacobian() {
        let f = trig_map();
        let u = [0.3, -0.8];
        let (v, j) = f.jet1(&u);
        assert_relative_eq!(v[0], 0.3f64.sin() * -0.8, epsilon = 1e-15);
        assert_relative_eq!(j[(0, 0)], 0.3f64.cos() * -0.8, epsilon = 1e-15);
        assert_relative_eq!(j[(0, 1)], 0.3f64.sin(), epsilon = 1e-15);
        assert_relative_eq!(j[(1, 0)], 0.6, epsilon = 1e-15);
        assert_relative_eq!(j[(1, 1)], (-0.8f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn second_derivatives_including_diagonal() {
        let f = trig_map();
        let u = [0.3, -0.8];
        let d00 = f.second(&u, 0, 0);
        assert_relative_eq!(d00[0], -(0.3f64.sin()) * -0.8, epsilon = 1e-14);
        assert_relative_eq!(d00[1], 2.0, epsilon = 1e-14);
        let d01 = f.second(&u, 0, 1);
        assert_relative_eq!(d01[0], 0.3f64.cos(), epsilon = 1e-14);
        assert_relative_eq!(d01[1], 0.0, epsilon = 1e-14);
        let d11 = f.second(&u, 1, 1);
        assert_relative_eq!(d11[1], (-0.8f64).exp(), epsilon = 1e-14);
    }

    #[test]
    fn invert_small_recovers_inverse() {
        let a = [2.0, 1.0, 0.5, 1.0, 3.0, 0.0, 0.0, 1.0, 1.0];
        let inv = invert_small(&a, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += a[i * 3 + k] * inv[k * 3 + j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(s, expect, epsilon = 1e-12);
            }
        }
        assert!(invert_small(&[0.0; 4], 2).is_none());
    }
}
