//! Chart-based Riemannian manifolds: metric evaluation, Christoffel symbols,
//! curvature, and covariant differentiation of fields along maps.
//!
//! A manifold is a single coordinate chart with a smooth metric evaluator.
//! First derivatives of the metric always come from forward-mode duals;
//! second derivatives (needed for curvature) come either from nested duals or
//! from central differences of the dual gradient, depending on [`DiffMode`].

use nalgebra::{DMatrix, DVector};

use crate::dual::{Real, D2};
use crate::error::{GeomError, Result};
use crate::smooth::SmoothFn;
use crate::tensor::{Tensor3, Tensor4};

/// Region of `R^n` covered by the chart.
#[derive(Clone, Debug)]
pub enum ChartDomain {
    All,
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Open ball `|x|^2 < radius_sq` centered at the origin.
    Ball { radius_sq: f64 },
}

impl ChartDomain {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            ChartDomain::All => x.iter().all(|v| v.is_finite()),
            ChartDomain::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| v.is_finite() && *v >= *l && *v <= *h),
            ChartDomain::Ball { radius_sq } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                r2.is_finite() && r2 < *radius_sq
            }
        }
    }

    /// Bounding box used by grid samplers; unbounded directions fall back to
    /// the given default half-width around the origin.
    pub fn sampling_box(&self, dim: usize, default_half_width: f64) -> (Vec<f64>, Vec<f64>) {
        match self {
            ChartDomain::All => (
                vec![-default_half_width; dim],
                vec![default_half_width; dim],
            ),
            ChartDomain::Box { lo, hi } => (lo.clone(), hi.clone()),
            ChartDomain::Ball { radius_sq } => {
                // inscribed box
                let a = (radius_sq / dim as f64).sqrt() * 0.95;
                (vec![-a; dim], vec![a; dim])
            }
        }
    }
}

/// How second derivatives of the metric are obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiffMode {
    /// Exact second derivatives from nested duals.
    NestedDual,
    /// Central differences of the dual gradient with step `h`.
    FdSecond { h: f64 },
}

impl Default for DiffMode {
    fn default() -> Self {
        DiffMode::NestedDual
    }
}

/// A point of the chart.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub coords: DVector<f64>,
}

impl Point {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        Point {
            coords: DVector::from_vec(coords.into()),
        }
    }
    pub fn dim(&self) -> usize {
        self.coords.len()
    }
    pub fn as_slice(&self) -> &[f64] {
        self.coords.as_slice()
    }
}

/// A tangent vector in the coordinate frame at `base`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub base: Point,
    pub comp: DVector<f64>,
}

impl TangentVector {
    pub fn new(base: Point, comp: impl Into<Vec<f64>>) -> Self {
        TangentVector {
            base,
            comp: DVector::from_vec(comp.into()),
        }
    }
}

fn same_base(a: &Point, b: &Point) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(GeomError::BaseMismatch)
    }
}

/// A Riemannian manifold presented on a single chart.
#[derive(Clone, Debug)]
pub struct ChartedManifold {
    dim: usize,
    metric: SmoothFn,
    domain: ChartDomain,
    mode: DiffMode,
    name: String,
}

impl ChartedManifold {
    pub fn new(
        dim: usize,
        metric: SmoothFn,
        domain: ChartDomain,
        mode: DiffMode,
        name: impl Into<String>,
    ) -> Result<Self> {
        if metric.input_dim() != dim || metric.output_dim() != dim * dim {
            return Err(GeomError::DimensionMismatch(format!(
                "metric evaluator must map R^{dim} to R^{}, got R^{} -> R^{}",
                dim * dim,
                metric.input_dim(),
                metric.output_dim()
            )));
        }
        Ok(ChartedManifold {
            dim,
            metric,
            domain,
            mode,
            name: name.into(),
        })
    }

    /// Flat `R^n` with the identity metric.
    pub fn euclidean(n: usize) -> Self {
        let metric = SmoothFn::new(n, n * n, move |_, out| {
            for a in 0..n {
                for b in 0..n {
                    out[a * n + b] = D2::lift(if a == b { 1.0 } else { 0.0 });
                }
            }
        });
        ChartedManifold::new(n, metric, ChartDomain::All, DiffMode::NestedDual, "euclidean")
            .expect("dimensions are consistent by construction")
    }

    /// Flat box chart `[0, period]^n`; grids treat opposite faces as glued.
    pub fn flat_torus(n: usize, period: f64) -> Self {
        let mut m = ChartedManifold::euclidean(n);
        m.domain = ChartDomain::Box {
            lo: vec![0.0; n],
            hi: vec![period; n],
        };
        m.name = "flat-torus".into();
        m
    }

    /// Constant-curvature chart `g_ab = δ_ab / (1 + (c/4)|x|^2)^2`.
    /// Covers all of `R^n` for `c >= 0`, the ball `|x|^2 < 4/|c|` otherwise.
    pub fn conformal(n: usize, c: f64) -> Self {
        let metric = SmoothFn::new(n, n * n, move |x, out| {
            let mut r2 = D2::lift(0.0);
            for v in x {
                r2 = r2 + *v * *v;
            }
            let lam = D2::lift(1.0) + D2::lift(c / 4.0) * r2;
            let factor = D2::lift(1.0) / (lam * lam);
            for a in 0..n {
                for b in 0..n {
                    out[a * n + b] = if a == b { factor } else { D2::lift(0.0) };
                }
            }
        });
        let domain = if c < 0.0 {
            ChartDomain::Ball {
                radius_sq: 4.0 / c.abs(),
            }
        } else {
            ChartDomain::All
        };
        ChartedManifold::new(n, metric, domain, DiffMode::NestedDual, "conformal")
            .expect("dimensions are consistent by construction")
    }

    /// Band around the equator of the unit sphere: coordinates `(θ, φ)` with
    /// `g = diag(1, cos²θ)`, `|θ| <= half_width < π/2`.
    pub fn sphere_band(half_width: f64) -> Self {
        let metric = SmoothFn::new(2, 4, |x, out| {
            let c = x[0].cos();
            out[0] = D2::lift(1.0);
            out[1] = D2::lift(0.0);
            out[2] = D2::lift(0.0);
            out[3] = c * c;
        });
        let domain = ChartDomain::Box {
            lo: vec![-half_width, -std::f64::consts::PI],
            hi: vec![half_width, std::f64::consts::PI],
        };
        ChartedManifold::new(2, metric, domain, DiffMode::NestedDual, "sphere-band")
            .expect("dimensions are consistent by construction")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &ChartDomain {
        &self.domain
    }

    pub fn diff_mode(&self) -> DiffMode {
        self.mode
    }

    pub fn set_diff_mode(&mut self, mode: DiffMode) {
        self.mode = mode;
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(GeomError::DimensionMismatch(format!(
                "point has {} coordinates, chart dimension is {}",
                x.len(),
                self.dim
            )));
        }
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(GeomError::OutsideDomain { point: x.to_vec() })
        }
    }

    /// Metric matrix at `x`, symmetrized.
    pub fn metric(&self, x: &Point) -> Result<DMatrix<f64>> {
        self.metric_at(x.as_slice())
    }

    pub fn metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        Ok(self.metric_unchecked(x))
    }

    fn metric_unchecked(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim;
        let raw = self.metric.value(x);
        let mut g = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                g[(a, b)] = 0.5 * (raw[a * n + b] + raw[b * n + a]);
            }
        }
        g
    }

    /// Symmetry and positive-definiteness diagnostics for the raw evaluator.
    pub fn check_metric_at(&self, x: &[f64]) -> Result<()> {
        self.check_point(x)?;
        let n = self.dim;
        let raw = self.metric.value(x);
        for a in 0..n {
            for b in 0..n {
                if (raw[a * n + b] - raw[b * n + a]).abs() > 1e-12 {
                    return Err(GeomError::Config(format!(
                        "metric is not symmetric at {x:?}: |g[{a}{b}] - g[{b}{a}]| = {:.3e}",
                        (raw[a * n + b] - raw[b * n + a]).abs()
                    )));
                }
            }
        }
        let g = self.metric_unchecked(x);
        if g.clone().cholesky().is_none() {
            return Err(GeomError::Config(format!(
                "metric is not positive definite at {x:?}"
            )));
        }
        Ok(())
    }

    /// Metric and its first derivatives `dg[(c,a,b)] = ∂_c g_ab`, both symmetrized in `(a,b)`.
    pub fn metric_d1(&self, x: &[f64]) -> Result<(DMatrix<f64>, Tensor3)> {
        self.check_point(x)?;
        let n = self.dim;
        let mut g = DMatrix::zeros(n, n);
        let mut dg = Tensor3::zeros(n);
        let mut inp: Vec<D2> = x.iter().map(|&v| D2::lift(v)).collect();
        let mut out = vec![D2::lift(0.0); n * n];
        for c in 0..n {
            inp[c] = D2::seeded(x[c], 1.0, 0.0);
            self.metric.eval_seeded(&inp, &mut out);
            inp[c] = D2::lift(x[c]);
            for a in 0..n {
                for b in 0..n {
                    let d = 0.5 * (out[a * n + b].eps.re + out[b * n + a].eps.re);
                    dg[(c, a, b)] = d;
                    g[(a, b)] = 0.5 * (out[a * n + b].re.re + out[b * n + a].re.re);
                }
            }
        }
        Ok((g, dg))
    }

    /// Metric with first and second derivatives
    /// `d2g[(c,d,a,b)] = ∂_c ∂_d g_ab`, symmetrized in `(a,b)` and `(c,d)`.
    pub fn metric_d2(&self, x: &[f64]) -> Result<(DMatrix<f64>, Tensor3, Tensor4)> {
        self.check_point(x)?;
        let n = self.dim;
        match self.mode {
            DiffMode::NestedDual => {
                let mut g = DMatrix::zeros(n, n);
                let mut dg = Tensor3::zeros(n);
                let mut d2g = Tensor4::zeros(n);
                let mut inp: Vec<D2> = x.iter().map(|&v| D2::lift(v)).collect();
                let mut out = vec![D2::lift(0.0); n * n];
                for c in 0..n {
                    for d in c..n {
                        inp[c] = D2::seeded(x[c], 1.0, 0.0);
                        // seeds accumulate when c == d
                        inp[d] = D2::seeded(x[d], inp[d].eps.re, 1.0);
                        self.metric.eval_seeded(&inp, &mut out);
                        inp[c] = D2::lift(x[c]);
                        inp[d] = D2::lift(x[d]);
                        for a in 0..n {
                            for b in a..n {
                                let sec = 0.5 * (out[a * n + b].eps.eps + out[b * n + a].eps.eps);
                                d2g[(c, d, a, b)] = sec;
                                d2g[(c, d, b, a)] = sec;
                                d2g[(d, c, a, b)] = sec;
                                d2g[(d, c, b, a)] = sec;
                                if d == c {
                                    let v = 0.5 * (out[a * n + b].re.re + out[b * n + a].re.re);
                                    g[(a, b)] = v;
                                    g[(b, a)] = v;
                                }
                                let fst = 0.5 * (out[a * n + b].eps.re + out[b * n + a].eps.re);
                                dg[(c, a, b)] = fst;
                                dg[(c, b, a)] = fst;
                            }
                        }
                    }
                }
                Ok((g, dg, d2g))
            }
            DiffMode::FdSecond { h } => {
                let (g, dg) = self.metric_d1(x)?;
                let mut d2g = Tensor4::zeros(n);
                let mut xp = x.to_vec();
                for c in 0..n {
                    xp[c] = x[c] + h;
                    let (_, dgp) = self.metric_d1_unchecked(&xp);
                    xp[c] = x[c] - h;
                    let (_, dgm) = self.metric_d1_unchecked(&xp);
                    xp[c] = x[c];
                    for d in 0..n {
                        for a in 0..n {
                            for b in 0..n {
                                d2g[(c, d, a, b)] = (dgp[(d, a, b)] - dgm[(d, a, b)]) / (2.0 * h);
                            }
                        }
                    }
                }
                // symmetrize the derivative pair
                for c in 0..n {
                    for d in c + 1..n {
                        for a in 0..n {
                            for b in 0..n {
                                let s = 0.5 * (d2g[(c, d, a, b)] + d2g[(d, c, a, b)]);
                                d2g[(c, d, a, b)] = s;
                                d2g[(d, c, a, b)] = s;
                            }
                        }
                    }
                }
                Ok((g, dg, d2g))
            }
        }
    }

    /// `metric_d1` without the domain check, for interior FD stencil points.
    fn metric_d1_unchecked(&self, x: &[f64]) -> (DMatrix<f64>, Tensor3) {
        let n = self.dim;
        let mut g = DMatrix::zeros(n, n);
        let mut dg = Tensor3::zeros(n);
        let mut inp: Vec<D2> = x.iter().map(|&v| D2::lift(v)).collect();
        let mut out = vec![D2::lift(0.0); n * n];
        for c in 0..n {
            inp[c] = D2::seeded(x[c], 1.0, 0.0);
            self.metric.eval_seeded(&inp, &mut out);
            inp[c] = D2::lift(x[c]);
            for a in 0..n {
                for b in 0..n {
                    dg[(c, a, b)] = 0.5 * (out[a * n + b].eps.re + out[b * n + a].eps.re);
                    g[(a, b)] = 0.5 * (out[a * n + b].re.re + out[b * n + a].re.re);
                }
            }
        }
        (g, dg)
    }

    pub fn inverse_metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.metric_at(x)?;
        g.try_inverse()
            .ok_or_else(|| GeomError::SingularMetric { point: x.to_vec() })
    }

    /// Christoffel symbols `Γ^a_{bc}`, symmetric in `(b, c)` by construction.
    pub fn christoffel(&self, x: &Point) -> Result<Tensor3> {
        self.christoffel_at(x.as_slice())
    }

    pub fn christoffel_at(&self, x: &[f64]) -> Result<Tensor3> {
        let (g, dg) = self.metric_d1(x)?;
        self.christoffel_from(x, &g, &dg)
    }

    fn christoffel_from(&self, x: &[f64], g: &DMatrix<f64>, dg: &Tensor3) -> Result<Tensor3> {
        let n = self.dim;
        let ginv = g
            .clone()
            .try_inverse()
            .ok_or_else(|| GeomError::SingularMetric { point: x.to_vec() })?;
        let mut gamma = Tensor3::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in b..n {
                    let mut s = 0.0;
                    for d in 0..n {
                        s += ginv[(a, d)] * (dg[(b, d, c)] + dg[(c, d, b)] - dg[(d, b, c)]);
                    }
                    let v = 0.5 * s;
                    gamma[(a, b, c)] = v;
                    gamma[(a, c, b)] = v;
                }
            }
        }
        Ok(gamma)
    }

    /// Christoffel symbols together with their coordinate derivatives
    /// `dgamma[(d,a,b,c)] = ∂_d Γ^a_{bc}`.
    pub fn christoffel_with_derivs(&self, x: &[f64]) -> Result<(Tensor3, Tensor4)> {
        let n = self.dim;
        let (g, dg, d2g) = self.metric_d2(x)?;
        let ginv = g
            .clone()
            .try_inverse()
            .ok_or_else(|| GeomError::SingularMetric { point: x.to_vec() })?;
        let gamma = self.christoffel_from(x, &g, &dg)?;
        // ∂_d g^{ae} = -g^{af} (∂_d g_fh) g^{he}
        let mut dginv = vec![DMatrix::zeros(n, n); n];
        for d in 0..n {
            let mut dgd = DMatrix::zeros(n, n);
            for f in 0..n {
                for h in 0..n {
                    dgd[(f, h)] = dg[(d, f, h)];
                }
            }
            dginv[d] = -(&ginv * dgd * &ginv);
        }
        let mut dgamma = Tensor4::zeros(n);
        for d in 0..n {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let mut s = 0.0;
                        for e in 0..n {
                            s += dginv[d][(a, e)] * (dg[(b, e, c)] + dg[(c, e, b)] - dg[(e, b, c)])
                                + ginv[(a, e)]
                                    * (d2g[(d, b, e, c)] + d2g[(d, c, e, b)] - d2g[(d, e, b, c)]);
                        }
                        dgamma[(d, a, b, c)] = 0.5 * s;
                    }
                }
            }
        }
        Ok((gamma, dgamma))
    }

    /// Curvature components `R^a_{bcd}` in the convention
    /// `R(∂_c, ∂_d) ∂_b = R^a_{bcd} ∂_a`, so that on a constant-curvature
    /// chart `R(X,Y)Z = c (g(Y,Z) X - g(X,Z) Y)`.
    pub fn riemann(&self, x: &[f64]) -> Result<Tensor4> {
        let n = self.dim;
        let (gamma, dgamma) = self.christoffel_with_derivs(x)?;
        let mut r = Tensor4::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut v = dgamma[(c, a, d, b)] - dgamma[(d, a, c, b)];
                        for e in 0..n {
                            v += gamma[(a, c, e)] * gamma[(e, d, b)]
                                - gamma[(a, d, e)] * gamma[(e, c, b)];
                        }
                        r[(a, b, c, d)] = v;
                    }
                }
            }
        }
        Ok(r)
    }

    /// `R(X, Y) Z` at the common base point of the three vectors.
    pub fn riemann_op(
        &self,
        x: &TangentVector,
        y: &TangentVector,
        z: &TangentVector,
    ) -> Result<TangentVector> {
        same_base(&x.base, &y.base)?;
        same_base(&x.base, &z.base)?;
        let r = self.riemann(x.base.as_slice())?;
        let comp = riemann_apply(&r, &x.comp, &y.comp, &z.comp);
        Ok(TangentVector {
            base: x.base.clone(),
            comp,
        })
    }

    /// Ambient covariant derivative of a field along the `dir`-th parameter
    /// curve of a map: `∇̄_dir W = (∂_dir W^a + Γ^a_bc W^b ∂_dir x^c) ∂_a`.
    ///
    /// `patch` maps `R^k` into the chart and `field` gives ambient components
    /// over the same parameters.
    pub fn covariant_derivative_along(
        &self,
        patch: &SmoothFn,
        field: &SmoothFn,
        u: &[f64],
        dir: usize,
    ) -> Result<TangentVector> {
        let n = self.dim;
        let (x, jx) = patch.jet1(u);
        self.check_point(&x)?;
        let (w, jw) = field.jet1(u);
        let gamma = self.christoffel_at(&x)?;
        let mut comp = DVector::zeros(n);
        for a in 0..n {
            let mut v = jw[(a, dir)];
            for b in 0..n {
                for c in 0..n {
                    v += gamma[(a, b, c)] * w[b] * jx[(c, dir)];
                }
            }
            comp[a] = v;
        }
        Ok(TangentVector {
            base: Point::new(x),
            comp,
        })
    }

    /// `g`-inner product of two tangent vectors at their common base.
    pub fn inner(&self, v: &TangentVector, w: &TangentVector) -> Result<f64> {
        same_base(&v.base, &w.base)?;
        let g = self.metric_at(v.base.as_slice())?;
        Ok((&g * &w.comp).dot(&v.comp))
    }

    /// `g`-norm of a tangent vector.
    pub fn norm(&self, v: &TangentVector) -> Result<f64> {
        Ok(self.inner(v, v)?.max(0.0).sqrt())
    }
}

/// Contract curvature components with three vectors: `(R(X,Y)Z)^a = R^a_{bcd} Z^b X^c Y^d`.
pub fn riemann_apply(
    r: &Tensor4,
    x: &DVector<f64>,
    y: &DVector<f64>,
    z: &DVector<f64>,
) -> DVector<f64> {
    let n = r.dim();
    let mut out = DVector::zeros(n);
    for a in 0..n {
        let mut v = 0.0;
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    v += r[(a, b, c, d)] * z[b] * x[c] * y[d];
                }
            }
        }
        out[a] = v;
    }
    out
}
