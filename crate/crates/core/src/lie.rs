//! Lie-algebra reductions for groups with bi-invariant metrics.
//!
//! For a bi-invariant metric the Levi-Civita connection on left-invariant
//! fields is `∇_X Y = ½ [X, Y]`, so the totally-geodesic questions along a
//! Lie subgroup reduce to bracket algebra: a left-invariant field is
//! parallel along the subgroup iff it centralizes the subalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::tensor::Tensor3;

const ALGEBRA_TOL: f64 = 1e-12;
const SUBALGEBRA_TOL: f64 = 1e-10;

/// Structure constants and an ad-invariant inner product:
/// `[e_i, e_j] = c^k_{ij} e_k`, stored with index order `(k, i, j)`.
#[derive(Clone, Debug)]
pub struct LieAlgebraModel {
    dim: usize,
    structure: Tensor3,
    inner: DMatrix<f64>,
}

impl LieAlgebraModel {
    /// Validates antisymmetry, the Jacobi identity, and ad-invariance of the
    /// inner product (the bi-invariance condition) before accepting the data.
    pub fn new(structure: Tensor3, inner: DMatrix<f64>) -> Result<Self> {
        let n = structure.dim();
        if inner.nrows() != n || inner.ncols() != n {
            return Err(GeomError::DimensionMismatch(format!(
                "inner product is {}x{}, algebra dimension is {n}",
                inner.nrows(),
                inner.ncols()
            )));
        }
        if inner.clone().cholesky().is_none() {
            return Err(GeomError::InvalidAlgebra {
                property: "positive-definite inner product",
                defect: f64::NAN,
            });
        }
        let model = LieAlgebraModel {
            dim: n,
            structure,
            inner,
        };
        // antisymmetry
        let mut defect = 0.0_f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    defect =
                        defect.max((model.structure[(k, i, j)] + model.structure[(k, j, i)]).abs());
                }
            }
        }
        if defect > ALGEBRA_TOL {
            return Err(GeomError::InvalidAlgebra {
                property: "bracket antisymmetry",
                defect,
            });
        }
        // Jacobi identity on basis triples
        let mut defect = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let ei = basis(n, i);
                    let ej = basis(n, j);
                    let ek = basis(n, k);
                    let s = model.bracket(&ei, &model.bracket(&ej, &ek))
                        + model.bracket(&ej, &model.bracket(&ek, &ei))
                        + model.bracket(&ek, &model.bracket(&ei, &ej));
                    defect = defect.max(s.amax());
                }
            }
        }
        if defect > ALGEBRA_TOL {
            return Err(GeomError::InvalidAlgebra {
                property: "Jacobi identity",
                defect,
            });
        }
        // ad-invariance: ⟨[X,Y],Z⟩ + ⟨Y,[X,Z]⟩ = 0
        let mut defect = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let ei = basis(n, i);
                    let ej = basis(n, j);
                    let ek = basis(n, k);
                    let v = model.inner_product(&model.bracket(&ei, &ej), &ek)
                        + model.inner_product(&ej, &model.bracket(&ei, &ek));
                    defect = defect.max(v.abs());
                }
            }
        }
        if defect > ALGEBRA_TOL {
            return Err(GeomError::InvalidAlgebra {
                property: "ad-invariance of the inner product",
                defect,
            });
        }
        Ok(model)
    }

    /// `so(3)` with `[e_1,e_2]=e_3, [e_2,e_3]=e_1, [e_3,e_1]=e_2` and the
    /// identity inner product.
    pub fn so3() -> Self {
        let mut c = Tensor3::zeros(3);
        for (k, i, j) in [(2, 0, 1), (0, 1, 2), (1, 2, 0)] {
            c[(k, i, j)] = 1.0;
            c[(k, j, i)] = -1.0;
        }
        LieAlgebraModel::new(c, DMatrix::identity(3, 3)).expect("so(3) data is valid")
    }

    /// `so(3) ⊕ R`: a central direction appended to `so(3)`.
    pub fn so3_plus_r() -> Self {
        let mut c = Tensor3::zeros(4);
        for (k, i, j) in [(2, 0, 1), (0, 1, 2), (1, 2, 0)] {
            c[(k, i, j)] = 1.0;
            c[(k, j, i)] = -1.0;
        }
        LieAlgebraModel::new(c, DMatrix::identity(4, 4)).expect("so(3)⊕R data is valid")
    }

    /// The abelian algebra `R^k`.
    pub fn abelian(k: usize) -> Self {
        LieAlgebraModel::new(Tensor3::zeros(k), DMatrix::identity(k, k))
            .expect("abelian data is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for k in 0..n {
            let mut v = 0.0;
            for i in 0..n {
                for j in 0..n {
                    v += self.structure[(k, i, j)] * x[i] * y[j];
                }
            }
            out[k] = v;
        }
        out
    }

    pub fn inner_product(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (&self.inner * y).dot(x)
    }

    pub fn norm(&self, x: &DVector<f64>) -> f64 {
        self.inner_product(x, x).max(0.0).sqrt()
    }

    /// Levi-Civita connection on left-invariant fields: `∇_X Y = ½ [X, Y]`.
    pub fn nabla(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.bracket(x, y) * 0.5
    }

    /// Curvature on left-invariant fields: `R(X,Y)Z = -¼ [[X,Y],Z]`.
    pub fn curvature(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        self.bracket(&self.bracket(x, y), z) * -0.25
    }

    /// Parallelism defect of a left-invariant field along the subgroup with
    /// the given subalgebra basis: `max_X ‖∇_X ξ‖ = max_X ½‖[X, ξ]‖` over
    /// the basis. Zero iff `ξ` centralizes the subalgebra.
    pub fn field_residual(&self, subalgebra_basis: &[DVector<f64>], xi: &DVector<f64>) -> Result<f64> {
        self.check_subalgebra(subalgebra_basis)?;
        let mut worst = 0.0_f64;
        for x in subalgebra_basis {
            worst = worst.max(self.norm(&self.nabla(x, xi)));
        }
        Ok(worst)
    }

    /// Verifies the basis spans a subalgebra: every pairwise bracket must lie
    /// in the span of the basis.
    pub fn check_subalgebra(&self, basis: &[DVector<f64>]) -> Result<()> {
        if basis.is_empty() {
            return Ok(());
        }
        let n = self.dim;
        let m = basis.len();
        let mut b = DMatrix::zeros(n, m);
        for (j, v) in basis.iter().enumerate() {
            if v.len() != n {
                return Err(GeomError::DimensionMismatch(format!(
                    "basis vector has {} components, algebra dimension is {n}",
                    v.len()
                )));
            }
            b.set_column(j, v);
        }
        let gram = b.transpose() * &self.inner * &b;
        let gram_inv = gram
            .try_inverse()
            .ok_or(GeomError::InvalidAlgebra {
                property: "linearly independent subalgebra basis",
                defect: f64::NAN,
            })?;
        let mut defect = 0.0_f64;
        for i in 0..m {
            for j in 0..m {
                let w = self.bracket(&basis[i], &basis[j]);
                let coeffs = &gram_inv * (b.transpose() * &self.inner * &w);
                let resid = &w - &b * coeffs;
                defect = defect.max(self.norm(&resid));
            }
        }
        if defect > SUBALGEBRA_TOL {
            Err(GeomError::NotSubalgebra { defect })
        } else {
            Ok(())
        }
    }
}

fn basis(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}
