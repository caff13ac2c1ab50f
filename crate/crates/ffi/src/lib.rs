//! C ABI for the tangent-bundle geometry engine.
//!
//! Conventions:
//! - every fallible call returns an [`SgStatus`] code and writes results
//!   through out-pointers;
//! - handles are opaque and freed with their matching `_free` function;
//! - strings returned through `char**` are NUL-terminated, owned by the
//!   library, and released with [`sg_string_free`];
//! - [`sg_last_error_message`] holds a thread-local description of the most
//!   recent failure until the next failing call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;
use std::slice;

use sasaki_core::geodesic::{integrate, trace_to_csv};
use sasaki_core::scenario::{run_scenario, GridSpec, ScenarioOverrides, Tolerances};
use sasaki_core::{
    BundleGeodesicState, ChartedManifold, GeomError, Point, RunConfig, TangentVector,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SgStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// An argument failed validation (dimension, range, encoding).
    InvalidArgument = 2,
    /// A point left the chart or patch domain.
    DomainError = 3,
    /// A matrix inversion failed (degenerate metric or frame).
    Singular = 4,
    /// Unknown scenario or builtin name.
    NotFound = 5,
    /// Any other runtime failure; see `sg_last_error_message`.
    RuntimeError = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &GeomError) -> SgStatus {
    match err {
        GeomError::OutsideDomain { .. } | GeomError::OutsidePatch { .. } => SgStatus::DomainError,
        GeomError::SingularMetric { .. } | GeomError::DegenerateImmersion { .. } => {
            SgStatus::Singular
        }
        GeomError::UnknownScenario(_) => SgStatus::NotFound,
        GeomError::DimensionMismatch(_)
        | GeomError::Config(_)
        | GeomError::ToleranceConflict { .. } => SgStatus::InvalidArgument,
        _ => SgStatus::RuntimeError,
    }
}

fn fail(err: GeomError) -> SgStatus {
    let code = status_of(&err);
    set_error(err.to_string());
    code
}

/// Message describing the most recent failure on this thread, or NULL when
/// no failure has been recorded. The pointer stays valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn sg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |c| c.as_ptr())
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must have been returned by a `sasaki` call and not freed before.
#[no_mangle]
pub unsafe extern "C" fn sg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Opaque manifold handle.
pub struct SgManifold {
    inner: ChartedManifold,
}

/// Flat `R^n`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_manifold_euclidean(dim: usize, out: *mut *mut SgManifold) -> SgStatus {
    if out.is_null() {
        return SgStatus::NullArgument;
    }
    if dim == 0 {
        set_error("dimension must be at least 1");
        return SgStatus::InvalidArgument;
    }
    *out = Box::into_raw(Box::new(SgManifold {
        inner: ChartedManifold::euclidean(dim),
    }));
    SgStatus::Ok
}

/// Constant-curvature conformal chart (curvature of either sign).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_manifold_conformal(
    dim: usize,
    curvature: f64,
    out: *mut *mut SgManifold,
) -> SgStatus {
    if out.is_null() {
        return SgStatus::NullArgument;
    }
    if dim == 0 || !curvature.is_finite() {
        set_error("dimension must be at least 1 and the curvature finite");
        return SgStatus::InvalidArgument;
    }
    *out = Box::into_raw(Box::new(SgManifold {
        inner: ChartedManifold::conformal(dim, curvature),
    }));
    SgStatus::Ok
}

/// Band of half-width `half_width` around the unit-sphere equator
/// (coordinates θ, φ; requires `0 < half_width < π/2`).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_manifold_sphere_band(
    half_width: f64,
    out: *mut *mut SgManifold,
) -> SgStatus {
    if out.is_null() {
        return SgStatus::NullArgument;
    }
    if !(half_width > 0.0 && half_width < std::f64::consts::FRAC_PI_2) {
        set_error("half_width must lie in (0, PI/2)");
        return SgStatus::InvalidArgument;
    }
    *out = Box::into_raw(Box::new(SgManifold {
        inner: ChartedManifold::sphere_band(half_width),
    }));
    SgStatus::Ok
}

/// Destroy a manifold handle.
///
/// # Safety
/// `m` must be a handle from a `sg_manifold_*` constructor, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sg_manifold_free(m: *mut SgManifold) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Chart dimension of the manifold (0 for a NULL handle).
///
/// # Safety
/// `m` must be a live manifold handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sg_manifold_dim(m: *const SgManifold) -> usize {
    m.as_ref().map_or(0, |m| m.inner.dim())
}

/// Metric matrix at `x`, written row-major into `out` (`dim*dim` entries).
///
/// # Safety
/// `x` must point to `dim` readable doubles and `out` to `dim*dim` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn sg_manifold_metric(
    m: *const SgManifold,
    x: *const f64,
    out: *mut f64,
) -> SgStatus {
    let Some(m) = m.as_ref() else {
        return SgStatus::NullArgument;
    };
    if x.is_null() || out.is_null() {
        return SgStatus::NullArgument;
    }
    let n = m.inner.dim();
    let xs = slice::from_raw_parts(x, n);
    match m.inner.metric_at(xs) {
        Ok(g) => {
            let dst = slice::from_raw_parts_mut(out, n * n);
            for a in 0..n {
                for b in 0..n {
                    dst[a * n + b] = g[(a, b)];
                }
            }
            SgStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Christoffel symbols at `x`, written into `out` with layout
/// `out[(a*dim + b)*dim + c] = Γ^a_{bc}` (`dim^3` entries).
///
/// # Safety
/// `x` must point to `dim` readable doubles and `out` to `dim^3` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn sg_manifold_christoffel(
    m: *const SgManifold,
    x: *const f64,
    out: *mut f64,
) -> SgStatus {
    let Some(m) = m.as_ref() else {
        return SgStatus::NullArgument;
    };
    if x.is_null() || out.is_null() {
        return SgStatus::NullArgument;
    }
    let n = m.inner.dim();
    let xs = slice::from_raw_parts(x, n);
    match m.inner.christoffel_at(xs) {
        Ok(gamma) => {
            let dst = slice::from_raw_parts_mut(out, n * n * n);
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        dst[(a * n + b) * n + c] = gamma[(a, b, c)];
                    }
                }
            }
            SgStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Curvature operator `R(X, Y) Z` at `x`, written into `out` (`dim` entries).
///
/// # Safety
/// `x`, `xv`, `yv`, `zv` must each point to `dim` readable doubles and `out`
/// to `dim` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sg_manifold_curvature_op(
    m: *const SgManifold,
    x: *const f64,
    xv: *const f64,
    yv: *const f64,
    zv: *const f64,
    out: *mut f64,
) -> SgStatus {
    let Some(m) = m.as_ref() else {
        return SgStatus::NullArgument;
    };
    if x.is_null() || xv.is_null() || yv.is_null() || zv.is_null() || out.is_null() {
        return SgStatus::NullArgument;
    }
    let n = m.inner.dim();
    let base = Point::new(slice::from_raw_parts(x, n).to_vec());
    let tv = |p: *const f64| TangentVector::new(base.clone(), slice::from_raw_parts(p, n).to_vec());
    match m.inner.riemann_op(&tv(xv), &tv(yv), &tv(zv)) {
        Ok(r) => {
            let dst = slice::from_raw_parts_mut(out, n);
            for a in 0..n {
                dst[a] = r.comp[a];
            }
            SgStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Run a registered scenario; the JSON report is returned through
/// `json_out`. `grid_points == 0` and non-positive tolerances select the
/// defaults.
///
/// # Safety
/// `name` must be a NUL-terminated string and `json_out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_scenario_run(
    name: *const c_char,
    grid_points: u32,
    tol_pass: f64,
    tol_fail: f64,
    json_out: *mut *mut c_char,
) -> SgStatus {
    if name.is_null() || json_out.is_null() {
        return SgStatus::NullArgument;
    }
    let Ok(name) = CStr::from_ptr(name).to_str() else {
        set_error("scenario name is not valid UTF-8");
        return SgStatus::InvalidArgument;
    };
    let mut overrides = ScenarioOverrides::default();
    if grid_points > 0 {
        overrides.grid = Some(GridSpec {
            points_per_dim: grid_points as usize,
            ..GridSpec::default()
        });
    }
    if tol_pass > 0.0 || tol_fail > 0.0 {
        let d = Tolerances::default();
        overrides.tolerances = Some(Tolerances {
            pass: if tol_pass > 0.0 { tol_pass } else { d.pass },
            fail: if tol_fail > 0.0 { tol_fail } else { d.fail },
        });
    }
    match run_scenario(name, &overrides) {
        Ok(report) => match serde_string(&report) {
            Ok(c) => {
                *json_out = c.into_raw();
                SgStatus::Ok
            }
            Err(code) => code,
        },
        Err(e) => fail(e),
    }
}

fn serde_string<T: serde::Serialize>(value: &T) -> Result<CString, SgStatus> {
    let body = serde_json::to_string(value).map_err(|e| {
        set_error(format!("serialization failed: {e}"));
        SgStatus::RuntimeError
    })?;
    CString::new(body).map_err(|_| {
        set_error("serialized report contained a NUL byte");
        SgStatus::RuntimeError
    })
}

/// Integrate the bundle geodesic from `(x0, xdot0, xi0, xidot0)` to
/// `sigma_end` with fixed RK4 steps and return the CSV trace
/// (`sigma,x1..xn,xdot1..xdotn,xi1..xin,xidot1..xidotn,energy`).
/// `truncated_out` receives 1 when the trace stopped at the chart boundary.
///
/// # Safety
/// The four state pointers must each point to `dim` readable doubles;
/// `csv_out` must be valid; `truncated_out` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn sg_geodesic_trace_csv(
    m: *const SgManifold,
    x0: *const f64,
    xdot0: *const f64,
    xi0: *const f64,
    xidot0: *const f64,
    sigma_end: f64,
    step: f64,
    csv_out: *mut *mut c_char,
    truncated_out: *mut i32,
) -> SgStatus {
    let Some(m) = m.as_ref() else {
        return SgStatus::NullArgument;
    };
    if x0.is_null() || xdot0.is_null() || xi0.is_null() || xidot0.is_null() || csv_out.is_null() {
        return SgStatus::NullArgument;
    }
    if !(sigma_end > 0.0 && step > 0.0) {
        set_error("sigma_end and step must be positive");
        return SgStatus::InvalidArgument;
    }
    let n = m.inner.dim();
    let take = |p: *const f64| slice::from_raw_parts(p, n).to_vec();
    let s0 = BundleGeodesicState::new(take(x0), take(xdot0), take(xi0), take(xidot0));
    match integrate(&m.inner, &s0, sigma_end, step) {
        Ok(trace) => {
            let csv = trace_to_csv(&trace);
            match CString::new(csv) {
                Ok(c) => {
                    *csv_out = c.into_raw();
                    if !truncated_out.is_null() {
                        *truncated_out = trace.truncated as i32;
                    }
                    SgStatus::Ok
                }
                Err(_) => {
                    set_error("trace contained a NUL byte");
                    SgStatus::RuntimeError
                }
            }
        }
        Err(e) => fail(e),
    }
}

/// Run the totally-geodesic residual sweep described by a JSON run
/// configuration (the same schema the CLI accepts) and return the report.
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `json_out` valid.
#[no_mangle]
pub unsafe extern "C" fn sg_residual_from_config(
    config_json: *const c_char,
    json_out: *mut *mut c_char,
) -> SgStatus {
    if config_json.is_null() || json_out.is_null() {
        return SgStatus::NullArgument;
    }
    let Ok(src) = CStr::from_ptr(config_json).to_str() else {
        set_error("config is not valid UTF-8");
        return SgStatus::InvalidArgument;
    };
    let run = || -> Result<sasaki_core::TGReport, GeomError> {
        let cfg = RunConfig::from_json(src)?;
        let m = cfg.build_manifold()?;
        let patch = cfg.build_patch(&m)?;
        let field = cfg.build_field(patch)?;
        let grid = cfg.grid();
        let (lo, hi) = field.patch().domain();
        let mut worst: Option<sasaki_core::TGReport> = None;
        for u in sasaki_core::scenario::grid_points(lo, hi, &grid) {
            let rep = field.tg_residuals(&u)?;
            let replace = worst
                .as_ref()
                .map_or(true, |w| rep.max_residual() > w.max_residual());
            if replace {
                worst = Some(rep);
            }
        }
        worst.ok_or_else(|| GeomError::Config("grid produced no samples".into()))
    };
    match run() {
        Ok(report) => match serde_string(&report) {
            Ok(c) => {
                *json_out = c.into_raw();
                SgStatus::Ok
            }
            Err(code) => code,
        },
        Err(e) => fail(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    unsafe fn euclidean(dim: usize) -> *mut SgManifold {
        let mut h: *mut SgManifold = ptr::null_mut();
        assert_eq!(sg_manifold_euclidean(dim, &mut h), SgStatus::Ok);
        h
    }

    #[test]
    fn manifold_lifecycle_and_metric() {
        unsafe {
            let h = euclidean(2);
            assert_eq!(sg_manifold_dim(h), 2);
            let x = [0.3, -0.7];
            let mut g = [0.0; 4];
            assert_eq!(sg_manifold_metric(h, x.as_ptr(), g.as_mut_ptr()), SgStatus::Ok);
            assert_eq!(g, [1.0, 0.0, 0.0, 1.0]);
            sg_manifold_free(h);
        }
    }

    #[test]
    fn christoffel_and_curvature_through_the_abi() {
        unsafe {
            let mut h: *mut SgManifold = ptr::null_mut();
            assert_eq!(sg_manifold_conformal(2, 1.0, &mut h), SgStatus::Ok);
            let x = [2.0, 0.0];
            let mut gamma = [0.0; 8];
            assert_eq!(
                sg_manifold_christoffel(h, x.as_ptr(), gamma.as_mut_ptr()),
                SgStatus::Ok
            );
            // Γ^1_11 = -1/2 at (2, 0)
            assert!((gamma[0] + 0.5).abs() < 1e-12);

            let origin = [0.0, 0.0];
            let e1 = [1.0, 0.0];
            let e2 = [0.0, 1.0];
            let mut out = [0.0; 2];
            assert_eq!(
                sg_manifold_curvature_op(
                    h,
                    origin.as_ptr(),
                    e1.as_ptr(),
                    e2.as_ptr(),
                    e2.as_ptr(),
                    out.as_mut_ptr()
                ),
                SgStatus::Ok
            );
            assert!((out[0] - 1.0).abs() < 1e-12 && out[1].abs() < 1e-12);
            sg_manifold_free(h);
        }
    }

    #[test]
    fn domain_error_surfaces_with_message() {
        unsafe {
            let mut h: *mut SgManifold = ptr::null_mut();
            assert_eq!(sg_manifold_sphere_band(0.5, &mut h), SgStatus::Ok);
            let x = [1.0, 0.0]; // outside the band
            let mut g = [0.0; 4];
            assert_eq!(
                sg_manifold_metric(h, x.as_ptr(), g.as_mut_ptr()),
                SgStatus::DomainError
            );
            let msg = CStr::from_ptr(sg_last_error_message()).to_str().unwrap();
            assert!(msg.contains("chart domain"), "{msg}");
            sg_manifold_free(h);
        }
    }

    #[test]
    fn scenario_round_trip_through_json() {
        unsafe {
            let name = CString::new("lie-centralizer").unwrap();
            let mut out: *mut c_char = ptr::null_mut();
            assert_eq!(
                sg_scenario_run(name.as_ptr(), 0, -1.0, -1.0, &mut out),
                SgStatus::Ok
            );
            let body = CStr::from_ptr(out).to_str().unwrap().to_string();
            sg_string_free(out);
            let v: serde_json::Value = serde_json::from_str(&body).unwrap();
            assert_eq!(v["outcome"], "pass");

            let bogus = CString::new("missing-scenario").unwrap();
            let mut out: *mut c_char = ptr::null_mut();
            assert_eq!(
                sg_scenario_run(bogus.as_ptr(), 0, -1.0, -1.0, &mut out),
                SgStatus::NotFound
            );
        }
    }

    #[test]
    fn geodesic_csv_through_the_abi() {
        unsafe {
            let h = euclidean(2);
            let x0 = [0.0, 0.0];
            let xdot0 = [1.0, 0.0];
            let xi0 = [0.0, 0.0];
            let xidot0 = [0.0, 1.0];
            let mut out: *mut c_char = ptr::null_mut();
            let mut truncated = -1;
            assert_eq!(
                sg_geodesic_trace_csv(
                    h,
                    x0.as_ptr(),
                    xdot0.as_ptr(),
                    xi0.as_ptr(),
                    xidot0.as_ptr(),
                    1.0,
                    0.01,
                    &mut out,
                    &mut truncated
                ),
                SgStatus::Ok
            );
            assert_eq!(truncated, 0);
            let body = CStr::from_ptr(out).to_str().unwrap().to_string();
            sg_string_free(out);
            assert!(body.starts_with("sigma,x1,x2,"));
            let last = body.lines().last().unwrap();
            let first_field: f64 = last.split(',').next().unwrap().parse().unwrap();
            assert!((first_field - 1.0).abs() < 1e-12);
            sg_manifold_free(h);
        }
    }

    #[test]
    fn residual_from_config_json() {
        unsafe {
            let cfg = CString::new(
                r#"{
                    "manifold": {"builtin": "sphere-band", "half_width": 1.3},
                    "patch": {"builtin": "full", "domain": {"lo": [-1.0, -2.0], "hi": [1.0, 2.0]}},
                    "field": {"builtin": "constant", "values": [1.0, 0.0]},
                    "grid": {"points_per_dim": 5, "margin": 0.1}
                }"#,
            )
            .unwrap();
            let mut out: *mut c_char = ptr::null_mut();
            assert_eq!(sg_residual_from_config(cfg.as_ptr(), &mut out), SgStatus::Ok);
            let body = CStr::from_ptr(out).to_str().unwrap().to_string();
            sg_string_free(out);
            let v: serde_json::Value = serde_json::from_str(&body).unwrap();
            assert!(v["res_b"].as_f64().unwrap() > 1e-2);

            let bad = CString::new(r#"{"manifold": {"builtin": "nope"}}"#).unwrap();
            let mut out: *mut c_char = ptr::null_mut();
            assert_eq!(
                sg_residual_from_config(bad.as_ptr(), &mut out),
                SgStatus::InvalidArgument
            );
            let msg = CStr::from_ptr(sg_last_error_message()).to_str().unwrap();
            assert!(msg.contains("manifold.builtin"), "{msg}");
        }
    }

    #[test]
    fn null_arguments_are_rejected() {
        unsafe {
            assert_eq!(
                sg_manifold_euclidean(2, ptr::null_mut()),
                SgStatus::NullArgument
            );
            assert_eq!(sg_manifold_dim(ptr::null()), 0);
            let mut g = [0.0; 4];
            assert_eq!(
                sg_manifold_metric(ptr::null(), ptr::null(), g.as_mut_ptr()),
                SgStatus::NullArgument
            );
            sg_manifold_free(ptr::null_mut());
            sg_string_free(ptr::null_mut());
        }
    }
}
