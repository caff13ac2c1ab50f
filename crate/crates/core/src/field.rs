//! Vector fields along submanifold patches and the geometry of their images
//! in the tangent bundle: frames, induced metric, conjugate derivative,
//! ξ-connection, the shape-operator obstruction, and the totally-geodesic
//! residual conditions.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::manifold::{riemann_apply, ChartedManifold, Point, TangentVector};
use crate::sasaki::{BundlePoint, BundleTangent};
use crate::smooth::SmoothFn;
use crate::tensor::{Tensor3, Tensor4};

/// Directions handed to covariant derivatives must be tangent to the patch
/// up to this defect when the field only exists along the patch.
const TANGENCY_TOL: f64 = 1e-8;
/// Normality precondition tolerance for the normal-bundle connection.
const NORMALITY_TOL: f64 = 1e-8;
/// Residual norm below which a Gram–Schmidt candidate is treated as
/// linearly dependent.
const GRAM_SCHMIDT_TOL: f64 = 1e-10;

/// An immersed patch `u ∈ D ⊂ R^l → x(u) ∈ M^n`.
#[derive(Clone, Debug)]
pub struct SubmanifoldPatch {
    ambient: ChartedManifold,
    intrinsic_dim: usize,
    immersion: SmoothFn,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl SubmanifoldPatch {
    pub fn new(
        ambient: ChartedManifold,
        immersion: SmoothFn,
        lo: Vec<f64>,
        hi: Vec<f64>,
    ) -> Result<Self> {
        let l = immersion.input_dim();
        if immersion.output_dim() != ambient.dim() {
            return Err(GeomError::DimensionMismatch(format!(
                "immersion has {} components, ambient dimension is {}",
                immersion.output_dim(),
                ambient.dim()
            )));
        }
        if l > ambient.dim() {
            return Err(GeomError::DimensionMismatch(format!(
                "intrinsic dimension {} exceeds ambient dimension {}",
                l,
                ambient.dim()
            )));
        }
        if lo.len() != l || hi.len() != l {
            return Err(GeomError::DimensionMismatch(format!(
                "domain box has {} coordinates, intrinsic dimension is {l}",
                lo.len()
            )));
        }
        Ok(SubmanifoldPatch {
            ambient,
            intrinsic_dim: l,
            immersion,
            lo,
            hi,
        })
    }

    /// Full-dimension patch: the identity immersion over a box.
    pub fn full(ambient: ChartedManifold, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let n = ambient.dim();
        SubmanifoldPatch::new(ambient, SmoothFn::identity(n), lo, hi)
    }

    pub fn ambient(&self) -> &ChartedManifold {
        &self.ambient
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic_dim
    }

    pub fn immersion(&self) -> &SmoothFn {
        &self.immersion
    }

    pub fn domain(&self) -> (&[f64], &[f64]) {
        (&self.lo, &self.hi)
    }

    pub fn check_u(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.intrinsic_dim {
            return Err(GeomError::DimensionMismatch(format!(
                "parameter has {} coordinates, intrinsic dimension is {}",
                u.len(),
                self.intrinsic_dim
            )));
        }
        let inside = u
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| v.is_finite() && *v >= *l && *v <= *h);
        if inside {
            Ok(())
        } else {
            Err(GeomError::OutsidePatch { u: u.to_vec() })
        }
    }

    /// Ambient position and Jacobian (`n x l`) of the immersion.
    pub fn jacobian(&self, u: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        self.check_u(u)?;
        let (x, j) = self.immersion.jet1(u);
        self.ambient.check_point(&x)?;
        Ok((x, j))
    }

    /// First fundamental form `g_ij = ḡ(∂_i x, ∂_j x)`.
    pub fn first_fundamental_form(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        let (x, j) = self.jacobian(u)?;
        let g = self.ambient.metric_at(&x)?;
        let g1 = j.transpose() * g * &j;
        let eig = g1.clone().symmetric_eigen();
        let (min, max) = (eig.eigenvalues.min(), eig.eigenvalues.max());
        if min <= 0.0 || max / min > 1e12 {
            return Err(GeomError::DegenerateImmersion {
                u: u.to_vec(),
                cond: if min > 0.0 { max / min } else { f64::INFINITY },
            });
        }
        Ok(g1)
    }

    /// Second covariant derivative of the immersion along coordinate
    /// directions: `∇̄_i ∂_j = (∂_i∂_j x^a + Γ^a_bc ∂_i x^b ∂_j x^c) ∂_a`.
    pub fn second_immersion_derivative(&self, u: &[f64], i: usize, j: usize) -> Result<DVector<f64>> {
        let (x, jx) = self.jacobian(u)?;
        let gamma = self.ambient.christoffel_at(&x)?;
        Ok(second_immersion_from(&self.immersion, &gamma, u, &jx, i, j))
    }

    /// Orthonormal (under `ḡ`) basis of the normal space at `x(u)`:
    /// Gram–Schmidt of the chart basis against the Jacobian columns, keeping
    /// the first `n - l` independent residuals in coordinate order.
    pub fn normal_basis(&self, u: &[f64]) -> Result<Vec<DVector<f64>>> {
        let n = self.ambient.dim();
        let l = self.intrinsic_dim;
        let (x, jx) = self.jacobian(u)?;
        let g = self.ambient.metric_at(&x)?;
        let g1 = self.first_fundamental_form(u)?;
        let g1inv = g1
            .try_inverse()
            .ok_or_else(|| GeomError::SingularMetric { point: x.clone() })?;
        let mut normals: Vec<DVector<f64>> = Vec::with_capacity(n - l);
        for a in 0..n {
            if normals.len() == n - l {
                break;
            }
            let mut w = DVector::zeros(n);
            w[a] = 1.0;
            // remove the tangential part
            let coeffs = &g1inv * (jx.transpose() * (&g * &w));
            w -= &jx * coeffs;
            // orthogonalize against accepted normals
            for eta in &normals {
                let proj = (&g * &w).dot(eta);
                w -= eta * proj;
            }
            let norm = (&g * &w).dot(&w).max(0.0).sqrt();
            if norm > GRAM_SCHMIDT_TOL {
                normals.push(w / norm);
            }
        }
        if normals.len() != n - l {
            return Err(GeomError::DegenerateImmersion {
                u: u.to_vec(),
                cond: f64::INFINITY,
            });
        }
        Ok(normals)
    }
}

fn second_immersion_from(
    immersion: &SmoothFn,
    gamma: &Tensor3,
    u: &[f64],
    jx: &DMatrix<f64>,
    i: usize,
    j: usize,
) -> DVector<f64> {
    let n = immersion.output_dim();
    let dd = immersion.second(u, i, j);
    let mut out = DVector::zeros(n);
    for a in 0..n {
        let mut v = dd[a];
        for b in 0..n {
            for c in 0..n {
                v += gamma[(a, b, c)] * jx[(b, i)] * jx[(c, j)];
            }
        }
        out[a] = v;
    }
    out
}

/// Residual data of the totally-geodesic conditions at one sample point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TGReport {
    /// Sample location in patch parameters.
    pub u: Vec<f64>,
    /// Condition (a): largest `ḡ`-norm of the normal component of
    /// `*∇_{∂_i} ∂_j` over coordinate pairs.
    pub res_a: f64,
    /// Condition (b): largest `ḡ`-norm of
    /// `∇̄_i ∇̄_j ξ − ∇̄_{tan(*∇_i ∂_j)} ξ − ½ R̄(∂_i, ∂_j) ξ`.
    pub res_b: f64,
    /// Condition number of the induced metric of `ξ(F^l)`.
    pub frame_cond: f64,
}

impl TGReport {
    pub fn max_residual(&self) -> f64 {
        self.res_a.max(self.res_b)
    }
}

/// A vector field `ξ(u)` in ambient components over a patch.
#[derive(Clone, Debug)]
pub struct FieldAlongPatch {
    patch: SubmanifoldPatch,
    value: SmoothFn,
}

/// Shared per-point data for the residual computations.
struct PointData {
    x: Vec<f64>,
    jx: DMatrix<f64>,
    g: DMatrix<f64>,
    g1: DMatrix<f64>,
    g1inv: DMatrix<f64>,
    gamma: Tensor3,
    dgamma: Tensor4,
    riemann: Tensor4,
    xi: DVector<f64>,
    dxi: DMatrix<f64>,
    /// `∇̄_i ξ` for each patch direction.
    nabla_xi: Vec<DVector<f64>>,
}

impl FieldAlongPatch {
    pub fn new(patch: SubmanifoldPatch, value: SmoothFn) -> Result<Self> {
        if value.input_dim() != patch.intrinsic_dim()
            || value.output_dim() != patch.ambient().dim()
        {
            return Err(GeomError::DimensionMismatch(format!(
                "field must map R^{} to R^{}, got R^{} -> R^{}",
                patch.intrinsic_dim(),
                patch.ambient().dim(),
                value.input_dim(),
                value.output_dim()
            )));
        }
        Ok(FieldAlongPatch { patch, value })
    }

    /// The zero section over a patch.
    pub fn zero(patch: SubmanifoldPatch) -> Self {
        let l = patch.intrinsic_dim();
        let n = patch.ambient().dim();
        FieldAlongPatch {
            patch,
            value: SmoothFn::constant(l, vec![0.0; n]),
        }
    }

    pub fn patch(&self) -> &SubmanifoldPatch {
        &self.patch
    }

    pub fn value_fn(&self) -> &SmoothFn {
        &self.value
    }

    pub fn ambient(&self) -> &ChartedManifold {
        self.patch.ambient()
    }

    /// The bundle point `z = (x(u), ξ(u))`.
    pub fn bundle_point(&self, u: &[f64]) -> Result<BundlePoint> {
        self.patch.check_u(u)?;
        let x = self.patch.immersion().value(u);
        self.ambient().check_point(&x)?;
        let xi = self.value.value(u);
        Ok(BundlePoint::new(Point::new(x), xi))
    }

    fn point_data(&self, u: &[f64], with_curvature: bool) -> Result<PointData> {
        self.patch.check_u(u)?;
        let n = self.ambient().dim();
        let l = self.patch.intrinsic_dim();
        let (x, jx) = self.patch.immersion().jet1(u);
        self.ambient().check_point(&x)?;
        let g = self.ambient().metric_at(&x)?;
        let g1 = jx.transpose() * &g * &jx;
        let g1inv = g1.clone().try_inverse().ok_or_else(|| {
            GeomError::DegenerateImmersion {
                u: u.to_vec(),
                cond: f64::INFINITY,
            }
        })?;
        let (gamma, dgamma) = if with_curvature {
            self.ambient().christoffel_with_derivs(&x)?
        } else {
            (self.ambient().christoffel_at(&x)?, Tensor4::zeros(0))
        };
        let riemann = if with_curvature {
            riemann_from_parts(&gamma, &dgamma)
        } else {
            Tensor4::zeros(0)
        };
        let (xi_v, dxi) = self.value.jet1(u);
        let xi = DVector::from_vec(xi_v);
        let mut nabla_xi = Vec::with_capacity(l);
        for i in 0..l {
            let mut out = DVector::zeros(n);
            for a in 0..n {
                let mut v = dxi[(a, i)];
                for b in 0..n {
                    for c in 0..n {
                        v += gamma[(a, b, c)] * xi[b] * jx[(c, i)];
                    }
                }
                out[a] = v;
            }
            nabla_xi.push(out);
        }
        Ok(PointData {
            x,
            jx,
            g,
            g1,
            g1inv,
            gamma,
            dgamma,
            riemann,
            xi,
            dxi,
            nabla_xi,
        })
    }

    /// Ambient covariant derivative `∇̄_i ξ` at `x(u)`.
    pub fn covariant_derivative(&self, u: &[f64], i: usize) -> Result<DVector<f64>> {
        let d = self.point_data(u, false)?;
        Ok(d.nabla_xi[i].clone())
    }

    /// Largest `ḡ`-norm of `∇̄_i ξ` over patch directions; zero iff the field
    /// is parallel along the patch at `u`.
    pub fn parallel_defect(&self, u: &[f64]) -> Result<f64> {
        let d = self.point_data(u, false)?;
        let mut worst = 0.0_f64;
        for nab in &d.nabla_xi {
            worst = worst.max((&d.g * nab).dot(nab).max(0.0).sqrt());
        }
        Ok(worst)
    }

    /// `ḡ`-norm of the field value.
    pub fn length(&self, u: &[f64]) -> Result<f64> {
        let d = self.point_data(u, false)?;
        Ok((&d.g * &d.xi).dot(&d.xi).max(0.0).sqrt())
    }

    /// Second ambient covariant derivative `∇̄_i (∇̄_j ξ)`, treating
    /// `η_j(u) = ∇̄_j ξ` as a field along the patch in its own right.
    pub fn second_covariant_derivative(&self, u: &[f64], i: usize, j: usize) -> Result<DVector<f64>> {
        let d = self.point_data(u, true)?;
        Ok(self.second_covariant_from(&d, u, i, j))
    }

    fn second_covariant_from(&self, d: &PointData, u: &[f64], i: usize, j: usize) -> DVector<f64> {
        let n = self.ambient().dim();
        let ddxi = self.value.second(u, i, j);
        let ddx = self.patch.immersion().second(u, i, j);
        let eta_j = &d.nabla_xi[j];
        let mut out = DVector::zeros(n);
        for a in 0..n {
            // ∂_i η_j^a by the chain rule, then the Γ·η_j·∂_i x correction
            let mut v = ddxi[a];
            for b in 0..n {
                for c in 0..n {
                    let mut dgam_dir = 0.0;
                    for e in 0..n {
                        dgam_dir += d.dgamma[(e, a, b, c)] * d.jx[(e, i)];
                    }
                    v += dgam_dir * d.xi[b] * d.jx[(c, j)];
                    v += d.gamma[(a, b, c)]
                        * (d.dxi[(b, i)] * d.jx[(c, j)] + d.xi[b] * ddx[c] + eta_j[b] * d.jx[(c, i)]);
                }
            }
            out[a] = v;
        }
        out
    }

    /// Coefficients of the tangential part of an ambient vector in the
    /// coordinate tangent basis, together with the normal remainder.
    fn split_tangential(&self, d: &PointData, w: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let coeffs = &d.g1inv * (d.jx.transpose() * (&d.g * w));
        let normal = w - &d.jx * &coeffs;
        (coeffs, normal)
    }

    fn norm_g(d: &PointData, v: &DVector<f64>) -> f64 {
        (&d.g * v).dot(v).max(0.0).sqrt()
    }

    /// Coordinate frame of `ξ(F^l)` at `z = (x(u), ξ(u))`:
    /// `ẽ_i = (∂/∂u^i)^h + (∇̄_i ξ)^v`.
    pub fn tangent_frame(&self, u: &[f64]) -> Result<Vec<BundleTangent>> {
        let d = self.point_data(u, false)?;
        // surface the rank check before handing out a frame
        let eig = d.g1.clone().symmetric_eigen();
        let (min, max) = (eig.eigenvalues.min(), eig.eigenvalues.max());
        if min <= 0.0 || max / min > 1e12 {
            return Err(GeomError::DegenerateImmersion {
                u: u.to_vec(),
                cond: if min > 0.0 { max / min } else { f64::INFINITY },
            });
        }
        let z = BundlePoint::new(Point::new(d.x.clone()), d.xi.as_slice().to_vec());
        let l = self.patch.intrinsic_dim();
        let mut frame = Vec::with_capacity(l);
        for i in 0..l {
            frame.push(BundleTangent {
                base: z.clone(),
                h: d.jx.column(i).into_owned(),
                v: d.nabla_xi[i].clone(),
            });
        }
        Ok(frame)
    }

    /// Metric induced on `ξ(F^l)` by the Sasaki metric:
    /// `g_ij + ḡ(∇̄_i ξ, ∇̄_j ξ)`.
    pub fn induced_metric(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        let d = self.point_data(u, false)?;
        Ok(Self::induced_from(&d, self.patch.intrinsic_dim()))
    }

    fn induced_from(d: &PointData, l: usize) -> DMatrix<f64> {
        let mut m = d.g1.clone();
        for i in 0..l {
            for j in 0..l {
                m[(i, j)] += (&d.g * &d.nabla_xi[j]).dot(&d.nabla_xi[i]);
            }
        }
        m
    }

    /// The conjugate derivative `(∇̄ξ)* W`: the unique patch-tangent vector
    /// with `g((∇̄ξ)* W, X) = ḡ(∇̄_X ξ, W)` for all tangent `X`; in
    /// coordinates `g^{ik} ḡ(∇̄_k ξ, W)`.
    pub fn conjugate_derivative(&self, u: &[f64], w: &TangentVector) -> Result<DVector<f64>> {
        let d = self.point_data(u, false)?;
        if w.base.as_slice() != d.x.as_slice() {
            return Err(GeomError::BaseMismatch);
        }
        Ok(self.conjugate_from(&d, &w.comp))
    }

    fn conjugate_from(&self, d: &PointData, w: &DVector<f64>) -> DVector<f64> {
        let l = self.patch.intrinsic_dim();
        let mut rhs = DVector::zeros(l);
        for k in 0..l {
            rhs[k] = (&d.g * w).dot(&d.nabla_xi[k]);
        }
        &d.g1inv * rhs
    }

    /// Normal frame of `ξ(F^l)` at `z = (x(u), ξ(u))`: for a `ḡ`-orthonormal
    /// normal basis `η_α` and the coordinate tangent basis `Z_i`,
    /// the `2n - l` vectors
    /// `η_α^h`, `η_α^v − ((∇̄ξ)* η_α)^h`, `Z_i^v − ((∇̄ξ)* Z_i)^h`.
    pub fn normal_frame(&self, u: &[f64]) -> Result<Vec<BundleTangent>> {
        let d = self.point_data(u, false)?;
        let n = self.ambient().dim();
        let l = self.patch.intrinsic_dim();
        let z = BundlePoint::new(Point::new(d.x.clone()), d.xi.as_slice().to_vec());
        let normals = self.patch.normal_basis(u)?;
        let mut frame = Vec::with_capacity(2 * n - l);
        for eta in &normals {
            frame.push(BundleTangent {
                base: z.clone(),
                h: eta.clone(),
                v: DVector::zeros(n),
            });
        }
        for eta in &normals {
            let conj = self.conjugate_from(&d, eta);
            frame.push(BundleTangent {
                base: z.clone(),
                h: -(&d.jx * conj),
                v: eta.clone(),
            });
        }
        for i in 0..l {
            let zi = d.jx.column(i).into_owned();
            let conj = self.conjugate_from(&d, &zi);
            frame.push(BundleTangent {
                base: z.clone(),
                h: -(&d.jx * conj),
                v: zi,
            });
        }
        Ok(frame)
    }

    /// The ξ-connection on coordinate fields of the patch:
    /// `*∇_{∂_i} ∂_j = ∇̄_{∂_i} ∂_j + ½ [R̄(ξ, ∇̄_i ξ) ∂_j + R̄(ξ, ∇̄_j ξ) ∂_i]`,
    /// returned as an ambient vector at `x(u)`.
    pub fn xi_connection(&self, u: &[f64], i: usize, j: usize) -> Result<DVector<f64>> {
        let d = self.point_data(u, true)?;
        Ok(self.xi_connection_from(&d, u, i, j))
    }

    fn xi_connection_from(&self, d: &PointData, u: &[f64], i: usize, j: usize) -> DVector<f64> {
        let base = second_immersion_from(self.patch.immersion(), &d.gamma, u, &d.jx, i, j);
        base + self.curvature_correction(d, i, j)
    }

    /// `h_ξ(∂_i, ∂_j) = ½ [R̄(ξ, ∇̄_i ξ) ∂_j + R̄(ξ, ∇̄_j ξ) ∂_i]`.
    fn curvature_correction(&self, d: &PointData, i: usize, j: usize) -> DVector<f64> {
        let dxj = d.jx.column(j).into_owned();
        let dxi = d.jx.column(i).into_owned();
        (riemann_apply(&d.riemann, &d.xi, &d.nabla_xi[i], &dxj)
            + riemann_apply(&d.riemann, &d.xi, &d.nabla_xi[j], &dxi))
            * 0.5
    }

    /// `∇̄_W ξ` for an ambient direction `W`; requires `W` tangent to the
    /// patch since the field only exists along it.
    fn derivative_in_ambient_direction(&self, d: &PointData, w: &DVector<f64>) -> Result<DVector<f64>> {
        let (coeffs, normal) = self.split_tangential(d, w);
        let defect = Self::norm_g(d, &normal);
        let scale = 1.0 + Self::norm_g(d, w);
        if defect > TANGENCY_TOL * scale {
            return Err(GeomError::ExtensionRequired { defect });
        }
        let n = self.ambient().dim();
        let mut out = DVector::zeros(n);
        for (k, nab) in d.nabla_xi.iter().enumerate() {
            out += nab * coeffs[k];
        }
        Ok(out)
    }

    /// The symmetric obstruction
    /// `Ω_ξ(∂_i, ∂_j) = ∇̄_{h_ξ(∂_i,∂_j)} ξ + ½[(∇̄_i A_ξ)∂_j + (∇̄_j A_ξ)∂_i]`
    /// with `A_ξ Y = −∇̄_Y ξ`, so `(∇̄_i A_ξ)∂_j = −∇̄_i ∇̄_j ξ + ∇̄_{∇̄_i ∂_j} ξ`.
    ///
    /// For `l < n` the derivative directions must stay tangent to the patch;
    /// otherwise the field would need an ambient extension and
    /// [`GeomError::ExtensionRequired`] is returned.
    pub fn omega_xi(&self, u: &[f64], i: usize, j: usize) -> Result<DVector<f64>> {
        let d = self.point_data(u, true)?;
        let h = self.curvature_correction(&d, i, j);
        let nabla_h_xi = self.derivative_in_ambient_direction(&d, &h)?;
        let sec_ij = second_immersion_from(self.patch.immersion(), &d.gamma, u, &d.jx, i, j);
        let a_term = |i: usize, j: usize| -> Result<DVector<f64>> {
            let second = self.second_covariant_from(&d, u, i, j);
            let transport = self.derivative_in_ambient_direction(&d, &sec_ij)?;
            Ok(transport - second)
        };
        let part = (a_term(i, j)? + a_term(j, i)?) * 0.5;
        Ok(nabla_h_xi + part)
    }

    /// Residuals of the two totally-geodesic conditions at `u`.
    pub fn tg_residuals(&self, u: &[f64]) -> Result<TGReport> {
        let d = self.point_data(u, true)?;
        let l = self.patch.intrinsic_dim();
        let mut res_a = 0.0_f64;
        let mut res_b = 0.0_f64;
        for i in 0..l {
            for j in 0..l {
                let star = self.xi_connection_from(&d, u, i, j);
                let (coeffs, normal) = self.split_tangential(&d, &star);
                res_a = res_a.max(Self::norm_g(&d, &normal));

                let second = self.second_covariant_from(&d, u, i, j);
                let mut transported = DVector::zeros(self.ambient().dim());
                for (k, nab) in d.nabla_xi.iter().enumerate() {
                    transported += nab * coeffs[k];
                }
                let dxi_col = d.jx.column(i).into_owned();
                let dxj_col = d.jx.column(j).into_owned();
                let curv = riemann_apply(&d.riemann, &dxi_col, &dxj_col, &d.xi) * 0.5;
                let resv = second - transported - curv;
                res_b = res_b.max(Self::norm_g(&d, &resv));
            }
        }
        let induced = Self::induced_from(&d, l);
        let eig = induced.symmetric_eigen();
        let (min, max) = (eig.eigenvalues.min(), eig.eigenvalues.max());
        let frame_cond = if min > 0.0 { max / min } else { f64::INFINITY };
        Ok(TGReport {
            u: u.to_vec(),
            res_a,
            res_b,
            frame_cond,
        })
    }

    /// Normal-bundle covariant derivative `∇^⊥_i ξ`: the normal projection
    /// of `∇̄_i ξ`. Requires `ξ(u)` normal to the patch.
    pub fn normal_covariant_derivative(&self, u: &[f64], i: usize) -> Result<DVector<f64>> {
        let d = self.point_data(u, false)?;
        let scale = 1.0 + Self::norm_g(&d, &d.xi);
        for k in 0..self.patch.intrinsic_dim() {
            let col = d.jx.column(k).into_owned();
            let defect = (&d.g * &col).dot(&d.xi).abs();
            if defect > NORMALITY_TOL * scale {
                return Err(GeomError::NotNormal {
                    u: u.to_vec(),
                    defect,
                });
            }
        }
        let (_, normal) = self.split_tangential(&d, &d.nabla_xi[i]);
        Ok(normal)
    }

    /// Largest normal component of the plain second fundamental form
    /// `∇̄_i ∂_j` of the underlying patch (no ξ-correction).
    pub fn sff_residual(&self, u: &[f64]) -> Result<f64> {
        let d = self.point_data(u, false)?;
        let l = self.patch.intrinsic_dim();
        let mut worst = 0.0_f64;
        for i in 0..l {
            for j in i..l {
                let sec = second_immersion_from(self.patch.immersion(), &d.gamma, u, &d.jx, i, j);
                let (_, normal) = self.split_tangential(&d, &sec);
                worst = worst.max(Self::norm_g(&d, &normal));
            }
        }
        Ok(worst)
    }
}

/// Assemble curvature components from Christoffel symbols and their
/// derivatives (shared with the manifold-level computation).
pub fn riemann_from_parts(gamma: &Tensor3, dgamma: &Tensor4) -> Tensor4 {
    let n = gamma.dim();
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
    r
}
