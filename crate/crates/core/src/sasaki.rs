//! Sasaki-metric geometry of the tangent bundle `TM^n`.
//!
//! Tangent vectors of `TM` are kept in horizontal/vertical form: the raw
//! induced-coordinate components `(X̃^a, X̃^{n+a})` relate to the split via
//! the connection map, `H^a = X̃^a` and `V^a = X̃^{n+a} + Γ^a_bc ξ^b X̃^c`.
//! The assembled `2n x 2n` coordinate metric provides an independent route
//! to the Levi-Civita connection of the bundle, used as the oracle for the
//! lift-wise covariant-derivative formulas.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::manifold::{riemann_apply, ChartedManifold, Point, TangentVector};
use crate::smooth::SmoothFn;
use crate::tensor::Tensor3;

/// A point `z = (x, ξ)` of the tangent bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct BundlePoint {
    pub x: Point,
    pub xi: DVector<f64>,
}

impl BundlePoint {
    pub fn new(x: Point, xi: impl Into<Vec<f64>>) -> Self {
        BundlePoint {
            x,
            xi: DVector::from_vec(xi.into()),
        }
    }
    pub fn dim(&self) -> usize {
        self.x.dim()
    }
}

/// A tangent vector of `TM` at `base`, stored as horizontal and vertical
/// parts, both vectors at `base.x`.
#[derive(Clone, Debug, PartialEq)]
pub struct BundleTangent {
    pub base: BundlePoint,
    pub h: DVector<f64>,
    pub v: DVector<f64>,
}

impl BundleTangent {
    pub fn new(base: BundlePoint, h: impl Into<Vec<f64>>, v: impl Into<Vec<f64>>) -> Self {
        BundleTangent {
            base,
            h: DVector::from_vec(h.into()),
            v: DVector::from_vec(v.into()),
        }
    }

    /// Horizontal lift of a base vector.
    pub fn horizontal(base: BundlePoint, x: DVector<f64>) -> Self {
        let n = base.dim();
        BundleTangent {
            base,
            h: x,
            v: DVector::zeros(n),
        }
    }

    /// Vertical lift of a base vector.
    pub fn vertical(base: BundlePoint, x: DVector<f64>) -> Self {
        let n = base.dim();
        BundleTangent {
            base,
            h: DVector::zeros(n),
            v: x,
        }
    }
}

fn same_bundle_base(a: &BundlePoint, b: &BundlePoint) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(GeomError::BaseMismatch)
    }
}

/// Which lifts the covariant derivative acts on: direction lift first,
/// argument-field lift second.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiftKind {
    HH,
    VH,
    HV,
    VV,
}

/// Split raw induced-coordinate components into horizontal and vertical parts.
pub fn split(m: &ChartedManifold, z: &BundlePoint, raw: &[f64]) -> Result<BundleTangent> {
    let n = m.dim();
    if raw.len() != 2 * n {
        return Err(GeomError::DimensionMismatch(format!(
            "raw components have length {}, expected {}",
            raw.len(),
            2 * n
        )));
    }
    let gamma = m.christoffel(&z.x)?;
    let mut h = DVector::zeros(n);
    let mut v = DVector::zeros(n);
    for a in 0..n {
        h[a] = raw[a];
        let mut k = raw[n + a];
        for b in 0..n {
            for c in 0..n {
                k += gamma[(a, b, c)] * z.xi[b] * raw[c];
            }
        }
        v[a] = k;
    }
    Ok(BundleTangent {
        base: z.clone(),
        h,
        v,
    })
}

/// Inverse of [`split`]: raw components of the tangent with the given
/// horizontal and vertical parts.
pub fn assemble(m: &ChartedManifold, z: &BundlePoint, h: &DVector<f64>, v: &DVector<f64>) -> Result<Vec<f64>> {
    let n = m.dim();
    let gamma = m.christoffel(&z.x)?;
    let mut raw = vec![0.0; 2 * n];
    for a in 0..n {
        raw[a] = h[a];
        let mut k = v[a];
        for b in 0..n {
            for c in 0..n {
                k -= gamma[(a, b, c)] * z.xi[b] * h[c];
            }
        }
        raw[n + a] = k;
    }
    Ok(raw)
}

/// The Sasaki scalar product
/// `g_s(X̃, Ỹ) = ḡ(π_* X̃, π_* Ỹ) + ḡ(K X̃, K Ỹ)`.
pub fn sasaki_inner(
    m: &ChartedManifold,
    z: &BundlePoint,
    a: &BundleTangent,
    b: &BundleTangent,
) -> Result<f64> {
    same_bundle_base(&a.base, z)?;
    same_bundle_base(&b.base, z)?;
    let g = m.metric(&z.x)?;
    Ok((&g * &b.h).dot(&a.h) + (&g * &b.v).dot(&a.v))
}

/// The assembled `2n x 2n` Sasaki metric in induced coordinates `(x^a, ξ^a)`.
///
/// With `A^a_c = Γ^a_bc ξ^b` the blocks are
/// `[[ g + Aᵀ g A , Aᵀ g ], [ g A , g ]]`.
pub fn sasaki_matrix(m: &ChartedManifold, z: &BundlePoint) -> Result<DMatrix<f64>> {
    let n = m.dim();
    let g = m.metric(&z.x)?;
    let gamma = m.christoffel(&z.x)?;
    let mut a_mat = DMatrix::zeros(n, n);
    for a in 0..n {
        for c in 0..n {
            let mut s = 0.0;
            for b in 0..n {
                s += gamma[(a, b, c)] * z.xi[b];
            }
            a_mat[(a, c)] = s;
        }
    }
    let ga = &g * &a_mat;
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    let top_left = &g + a_mat.transpose() * &ga;
    let top_right = a_mat.transpose() * &g;
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = top_left[(i, j)];
            out[(i, n + j)] = top_right[(i, j)];
            out[(n + i, j)] = ga[(i, j)];
            out[(n + i, n + j)] = g[(i, j)];
        }
    }
    Ok(out)
}

/// Covariant derivative on `(TM, g_s)` of a lifted field in a lifted
/// direction, evaluated at `z = (x, ξ)`:
///
/// - `HH`: `(∇̄_X Y)^h − ½ (R̄(X, Y)ξ)^v`
/// - `VH`: `½ (R̄(ξ, X) Y)^h`
/// - `HV`: `(∇̄_X Y)^v + ½ (R̄(ξ, Y) X)^h`
/// - `VV`: `0`
///
/// `y_field` gives the base field `Y` in ambient components near `x`; it is
/// extended fiber-constant, which the assembled-matrix oracle validates.
pub fn kowalski_nabla(
    m: &ChartedManifold,
    z: &BundlePoint,
    kind: LiftKind,
    x_dir: &TangentVector,
    y_field: &SmoothFn,
) -> Result<BundleTangent> {
    if x_dir.base != z.x {
        return Err(GeomError::BaseMismatch);
    }
    let n = m.dim();
    let xs = z.x.as_slice();
    match kind {
        LiftKind::VV => Ok(BundleTangent::new(
            z.clone(),
            vec![0.0; n],
            vec![0.0; n],
        )),
        LiftKind::VH => {
            let y = DVector::from_vec(y_field.value(xs));
            let r = m.riemann(xs)?;
            let h = riemann_apply(&r, &z.xi, &x_dir.comp, &y) * 0.5;
            Ok(BundleTangent {
                base: z.clone(),
                h,
                v: DVector::zeros(n),
            })
        }
        LiftKind::HH | LiftKind::HV => {
            let (y, jy) = y_field.jet1(xs);
            let y = DVector::from_vec(y);
            let gamma = m.christoffel(&z.x)?;
            let mut nab = DVector::zeros(n);
            for a in 0..n {
                let mut s = 0.0;
                for c in 0..n {
                    s += jy[(a, c)] * x_dir.comp[c];
                    for b in 0..n {
                        s += gamma[(a, b, c)] * y[b] * x_dir.comp[c];
                    }
                }
                nab[a] = s;
            }
            let r = m.riemann(xs)?;
            if kind == LiftKind::HH {
                let v = riemann_apply(&r, &x_dir.comp, &y, &z.xi) * (-0.5);
                Ok(BundleTangent {
                    base: z.clone(),
                    h: nab,
                    v,
                })
            } else {
                let h = riemann_apply(&r, &z.xi, &y, &x_dir.comp) * 0.5;
                Ok(BundleTangent {
                    base: z.clone(),
                    h,
                    v: nab,
                })
            }
        }
    }
}

/// Covariant derivative in the direction of a general bundle tangent,
/// assembled by linearity from the four lift cases.
pub fn kowalski_connection(
    m: &ChartedManifold,
    z: &BundlePoint,
    direction: &BundleTangent,
    field_lift: LiftKind,
    y_field: &SmoothFn,
) -> Result<BundleTangent> {
    same_bundle_base(&direction.base, z)?;
    let horizontal_kind = match field_lift {
        LiftKind::HH | LiftKind::VH => (LiftKind::HH, LiftKind::VH),
        LiftKind::HV | LiftKind::VV => (LiftKind::HV, LiftKind::VV),
    };
    let xh = TangentVector {
        base: z.x.clone(),
        comp: direction.h.clone(),
    };
    let xv = TangentVector {
        base: z.x.clone(),
        comp: direction.v.clone(),
    };
    let part_h = kowalski_nabla(m, z, horizontal_kind.0, &xh, y_field)?;
    let part_v = kowalski_nabla(m, z, horizontal_kind.1, &xv, y_field)?;
    Ok(BundleTangent {
        base: z.clone(),
        h: part_h.h + part_v.h,
        v: part_h.v + part_v.v,
    })
}

/// Christoffel symbols of the assembled Sasaki metric in the `2n` induced
/// coordinates, by central differences with step `h`. This is the
/// brute-force reference connection for cross-checking both the lift-wise
/// formulas and the geodesic system.
pub fn sasaki_christoffel_fd(m: &ChartedManifold, z: &BundlePoint, h: f64) -> Result<Tensor3> {
    let n = m.dim();
    let nn = 2 * n;
    let at = |q: &[f64]| -> Result<DMatrix<f64>> {
        let z = BundlePoint::new(Point::new(q[..n].to_vec()), q[n..].to_vec());
        sasaki_matrix(m, &z)
    };
    let mut q0 = Vec::with_capacity(nn);
    q0.extend_from_slice(z.x.as_slice());
    q0.extend(z.xi.iter());
    let g = at(&q0)?;
    let ginv = g
        .try_inverse()
        .ok_or_else(|| GeomError::SingularMetric { point: q0.clone() })?;
    let mut dg = vec![DMatrix::zeros(nn, nn); nn];
    let mut q = q0.clone();
    for c in 0..nn {
        q[c] = q0[c] + h;
        let gp = at(&q)?;
        q[c] = q0[c] - h;
        let gm = at(&q)?;
        q[c] = q0[c];
        dg[c] = (gp - gm) / (2.0 * h);
    }
    let mut gamma = Tensor3::zeros(nn);
    for a in 0..nn {
        for b in 0..nn {
            for c in 0..nn {
                let mut s = 0.0;
                for d in 0..nn {
                    s += ginv[(a, d)] * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]);
                }
                gamma[(a, b, c)] = 0.5 * s;
            }
        }
    }
    Ok(gamma)
}
