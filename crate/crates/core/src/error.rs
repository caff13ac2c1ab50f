use thiserror::Error;

/// Errors raised by the geometry kernel and the layers above it.
#[derive(Debug, Error)]
pub enum GeomError {
    #[error("point {point:?} lies outside the chart domain")]
    OutsideDomain { point: Vec<f64> },
    #[error("parameter {u:?} lies outside the patch domain")]
    OutsidePatch { u: Vec<f64> },
    #[error("metric matrix is singular at {point:?}")]
    SingularMetric { point: Vec<f64> },
    #[error("tangent vectors are based at different points")]
    BaseMismatch,
    #[error("immersion is rank-deficient at {u:?} (condition {cond:.3e})")]
    DegenerateImmersion { u: Vec<f64>, cond: f64 },
    #[error("derivative direction has a normal component ({defect:.3e}); the field is only defined along the patch and would need an ambient extension")]
    ExtensionRequired { defect: f64 },
    #[error("field is not normal to the patch at {u:?} (tangential inner product {defect:.3e})")]
    NotNormal { u: Vec<f64>, defect: f64 },
    #[error("basis is not closed under the bracket (defect {defect:.3e})")]
    NotSubalgebra { defect: f64 },
    #[error("algebra data violates {property}: defect {defect:.3e}")]
    InvalidAlgebra { property: &'static str, defect: f64 },
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("tolerances conflict: pass tolerance {pass:.3e} must be below fail tolerance {fail:.3e}")]
    ToleranceConflict { pass: f64, fail: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
