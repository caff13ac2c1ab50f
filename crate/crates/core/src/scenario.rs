//! Named scenarios that numerically instantiate the totally-geodesic
//! theorems and their Lie-group special cases, each with a deterministic
//! grid, frozen thresholds, and a JSON-serializable report.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dual::{Real, D2};
use crate::error::{GeomError, Result};
use crate::field::{FieldAlongPatch, SubmanifoldPatch};
use crate::lie::LieAlgebraModel;
use crate::manifold::ChartedManifold;
use crate::smooth::SmoothFn;

/// Grid minimum of the rotation-field residual on the killing-sphere domain
/// `[0.2, 1.2]^2` (margins applied), frozen from a high-precision
/// finite-difference sweep run before this implementation existed; the
/// pass threshold 1e-3 sits two orders below it.
pub const KILLING_SPHERE_GRID_MIN: f64 = 0.266;

/// Infimum of the meridian-field residual over the off-equator zone
/// `|θ| >= 0.2` of the band: the residual `1/(2 cos θ)` increases away from
/// the equator, so the floor is its value at `|θ| = 0.2`, about `0.5102`,
/// from the closed-form Christoffel symbols of `diag(1, cos²θ)`.
pub const EQUATORIAL_OFF_MIN: f64 = 0.510;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    ResidualZero,
    ResidualPositive,
    IdentityHolds,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

/// Sampling specification: points per parameter dimension, uniformly spaced,
/// inset from the domain boundary by the given relative margin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points_per_dim: usize,
    pub margin: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points_per_dim: 11,
            margin: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Residuals at or below this pass a `residual_zero` expectation.
    pub pass: f64,
    /// Residuals at or above this fail it (and clear a `residual_positive` one).
    pub fail: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            pass: 1e-6,
            fail: 1e-3,
        }
    }
}

/// A residual extremum and where it occurred.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Extremum {
    pub value: f64,
    pub location: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub pass: bool,
    pub outcome: Outcome,
    pub expectation: Expectation,
    pub grid: GridSpec,
    pub tolerances: Tolerances,
    pub max_residual: Extremum,
    pub min_residual: Extremum,
    pub notes: String,
}

#[derive(Clone, Debug, Default)]
pub struct ScenarioOverrides {
    pub grid: Option<GridSpec>,
    pub tolerances: Option<Tolerances>,
}

/// Raw scenario measurements before the expectation is applied.
struct ScenarioData {
    max: Extremum,
    min: Extremum,
    notes: String,
    /// Set when the scenario decides pass/fail itself (split expectations,
    /// identity checks); otherwise derived from the expectation.
    custom_outcome: Option<Outcome>,
}

pub struct ScenarioDef {
    pub name: &'static str,
    pub expectation: Expectation,
    pub summary: &'static str,
    runner: fn(&GridSpec, &Tolerances) -> Result<ScenarioData>,
}

/// All registered scenarios in a fixed order.
pub fn registry() -> &'static [ScenarioDef] {
    &[
        ScenarioDef {
            name: "zero-section",
            expectation: Expectation::ResidualZero,
            summary: "the zero field over a full-dimension patch is totally geodesic",
            runner: run_zero_section,
        },
        ScenarioDef {
            name: "parallel-flat",
            expectation: Expectation::ResidualZero,
            summary: "a constant field on a flat torus chart is totally geodesic",
            runner: run_parallel_flat,
        },
        ScenarioDef {
            name: "flat-nonparallel",
            expectation: Expectation::ResidualZero,
            summary: "a non-parallel linear field along a flat slice is still totally geodesic",
            runner: run_flat_nonparallel,
        },
        ScenarioDef {
            name: "flat-compact-contrast",
            expectation: Expectation::IdentityHolds,
            summary: "on a periodic flat slice, zero residual forces parallel unless periodicity breaks",
            runner: run_flat_compact_contrast,
        },
        ScenarioDef {
            name: "killing-sphere",
            expectation: Expectation::ResidualPositive,
            summary: "a rotation Killing field on the curvature-one chart is never totally geodesic",
            runner: run_killing_sphere,
        },
        ScenarioDef {
            name: "equatorial-zone",
            expectation: Expectation::IdentityHolds,
            summary: "the meridian field is totally geodesic along the equator but not over the band",
            runner: run_equatorial_zone,
        },
        ScenarioDef {
            name: "normal-parallel",
            expectation: Expectation::ResidualZero,
            summary: "normal fields parallel in the normal bundle over totally geodesic patches",
            runner: run_normal_parallel,
        },
        ScenarioDef {
            name: "th3-degenerate",
            expectation: Expectation::IdentityHolds,
            summary: "unit normal field on a geodesic of the curvature-one chart (degenerate multiplier)",
            runner: run_th3_degenerate,
        },
        ScenarioDef {
            name: "lie-centralizer",
            expectation: Expectation::ResidualZero,
            summary: "the central factor of so(3)+R is parallel along the so(3) subgroup",
            runner: run_lie_centralizer,
        },
        ScenarioDef {
            name: "lie-semisimple",
            expectation: Expectation::ResidualPositive,
            summary: "no nonzero left-invariant field on so(3) is totally geodesic",
            runner: run_lie_semisimple,
        },
        ScenarioDef {
            name: "lie-abelian",
            expectation: Expectation::ResidualZero,
            summary: "every left-invariant field along an abelian subgroup is totally geodesic",
            runner: run_lie_abelian,
        },
    ]
}

pub fn find(name: &str) -> Option<&'static ScenarioDef> {
    registry().iter().find(|d| d.name == name)
}

/// Execute a registered scenario and classify the result.
pub fn run_scenario(name: &str, overrides: &ScenarioOverrides) -> Result<ScenarioReport> {
    let def = find(name).ok_or_else(|| GeomError::UnknownScenario(name.to_string()))?;
    let grid = overrides.grid.unwrap_or_default();
    let tol = overrides.tolerances.unwrap_or_default();
    if tol.pass >= tol.fail {
        return Err(GeomError::ToleranceConflict {
            pass: tol.pass,
            fail: tol.fail,
        });
    }
    let data = (def.runner)(&grid, &tol)?;
    let outcome = data.custom_outcome.unwrap_or_else(|| match def.expectation {
        Expectation::ResidualZero => {
            if data.max.value <= tol.pass {
                Outcome::Pass
            } else if data.max.value >= tol.fail {
                Outcome::Fail
            } else {
                Outcome::Inconclusive
            }
        }
        Expectation::ResidualPositive => {
            if data.min.value >= tol.fail {
                Outcome::Pass
            } else if data.min.value <= tol.pass {
                Outcome::Fail
            } else {
                Outcome::Inconclusive
            }
        }
        Expectation::IdentityHolds => Outcome::Pass,
    });
    Ok(ScenarioReport {
        name: def.name.to_string(),
        pass: outcome == Outcome::Pass,
        outcome,
        expectation: def.expectation,
        grid,
        tolerances: tol,
        max_residual: data.max,
        min_residual: data.min,
        notes: data.notes,
    })
}

// ---------------------------------------------------------------------------
// grid machinery
// ---------------------------------------------------------------------------

/// Uniform grid over the patch box, inset by the relative margin.
pub fn grid_points(lo: &[f64], hi: &[f64], spec: &GridSpec) -> Vec<Vec<f64>> {
    let l = lo.len();
    let n = spec.points_per_dim.max(1);
    let mut axes = Vec::with_capacity(l);
    for d in 0..l {
        let width = hi[d] - lo[d];
        let a = lo[d] + spec.margin * width;
        let b = hi[d] - spec.margin * width;
        let axis: Vec<f64> = if n == 1 {
            vec![0.5 * (a + b)]
        } else {
            (0..n)
                .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
                .collect()
        };
        axes.push(axis);
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; l];
    loop {
        out.push(idx.iter().enumerate().map(|(d, &k)| axes[d][k]).collect());
        let mut d = l;
        loop {
            if d == 0 {
                return out;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < n {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Residual extrema of a field over its patch grid.
fn residual_extrema(field: &FieldAlongPatch, spec: &GridSpec) -> Result<(Extremum, Extremum)> {
    let (lo, hi) = field.patch().domain();
    let mut max = Extremum {
        value: f64::NEG_INFINITY,
        location: Vec::new(),
    };
    let mut min = Extremum {
        value: f64::INFINITY,
        location: Vec::new(),
    };
    for u in grid_points(lo, hi, spec) {
        let rep = field.tg_residuals(&u)?;
        let r = rep.max_residual();
        if r > max.value {
            max = Extremum {
                value: r,
                location: u.clone(),
            };
        }
        if r < min.value {
            min = Extremum {
                value: r,
                location: u,
            };
        }
    }
    Ok((max, min))
}

// ---------------------------------------------------------------------------
// scenario builders
// ---------------------------------------------------------------------------

fn conformal_full_patch(c: f64, lo: f64, hi: f64) -> Result<SubmanifoldPatch> {
    let m = ChartedManifold::conformal(2, c);
    SubmanifoldPatch::full(m, vec![lo, lo], vec![hi, hi])
}

fn flat_slice_patch() -> Result<SubmanifoldPatch> {
    let e3 = ChartedManifold::euclidean(3);
    let slice = SmoothFn::new(2, 3, |u, out| {
        out[0] = u[0];
        out[1] = u[1];
        out[2] = D2::lift(0.0);
    });
    SubmanifoldPatch::new(e3, slice, vec![-1.0, -1.0], vec![1.0, 1.0])
}

fn run_zero_section(grid: &GridSpec, _tol: &Tolerances) -> Result<ScenarioData> {
    let field = FieldAlongPatch::zero(conformal_full_patch(1.0, -0.8, 0.8)?);
    let (max, min) = residual_extrema(&field, grid)?;
    Ok(ScenarioData {
        max,
        min,
        notes: "zero section over the curvature-one chart".into(),
        custom_outcome: None,
    })
}

fn run_parallel_flat(grid: &GridSpec, _tol: &Tolerances) -> Result<ScenarioData> {
    let torus = ChartedManifold::flat_torus(2, std::f64::consts::TAU);
    let patch = SubmanifoldPatch::full(
        torus,
        vec![0.0, 0.0],
        vec![std::f64::consts::TAU, std::f64::consts::TAU],
    )?;
    let field = FieldAlongPatch::new(patch, SmoothFn::constant(2, vec![0.7, -0.4]))?;
    let (max, min) = residual_extrema(&field, grid)?;
    Ok(ScenarioData {
        max,
        min,
        notes: "constant field on the flat torus chart".into(),
        custom_outcome: None,
    })
}

fn flat_nonparallel_field() -> Result<FieldAlongPatch> {
    let value = SmoothFn::new(2, 3, |u, out| {
        out[0] = D2::lift(0.0);
        out[1] = D2::lift(0.0);
        out[2] = u[0];
    });
    FieldAlongPatch::new(flat_slice_patch()?, value)
}

fn run_flat_nonparallel(grid: &GridSpec, tol: &Tolerances) -> Result<ScenarioData> {
    let field = flat_nonparallel_field()?;
    let (max, min) = residual_extrema(&field, grid)?;
    // the contrast with rigidity: the field must NOT be parallel while the
    // residuals vanish; its first covariant derivative has unit length
    let mut defect = 0.0_f64;
    let (lo, hi) = field.patch().domain();
    for u in grid_points(lo, hi, grid) {
        defect = defect.max((field.parallel_defect(&u)? - 1.0).abs());
    }
    let custom = if max.value <= tol.pass && defect <= 1e-10 {
        Some(Outcome::Pass)
    } else if max.value >= tol.fail || defect > 1e-6 {
        Some(Outcome::Fail)
    } else {
        Some(Outcome::Inconclusive)
    };
    Ok(ScenarioData {
        max,
        min,
        notes: format!(
            "totally geodesic without being parallel: | ‖∇ξ‖ - 1 | <= {defect:.3e} on the grid"
        ),
        custom_outcome: custom,
    })
}

fn run_flat_compact_contrast(grid: &GridSpec, tol: &Tolerances) -> Result<ScenarioData> {
    // periodic slice u ↦ (u, 0) of the flat torus chart
    let period = std::f64::consts::TAU;
    let torus = ChartedManifold::flat_torus(2, period);
    let curve = SmoothFn::new(1, 2, |u, out| {
        out[0] = u[0];
        out[1] = D2::lift(0.0);
    });
    let patch = SubmanifoldPatch::new(torus, curve, vec![0.0], vec![period])?;

    let family: Vec<(&str, SmoothFn)> = vec![
        ("constant", SmoothFn::constant(1, vec![0.0, 0.8])),
        (
            "linear",
            SmoothFn::new(1, 2, |u, out| {
                out[0] = D2::lift(0.0);
                out[1] = u[0];
            }),
        ),
        (
            "sinusoidal",
            SmoothFn::new(1, 2, |u, out| {
                out[0] = D2::lift(0.0);
                out[1] = u[0].sin();
            }),
        ),
    ];

    let mut notes = Vec::new();
    let mut identity_holds = true;
    let mut max = Extremum {
        value: f64::NEG_INFINITY,
        location: Vec::new(),
    };
    let mut min = Extremum {
        value: f64::INFINITY,
        location: Vec::new(),
    };
    for (label, value) in family {
        let field = FieldAlongPatch::new(patch.clone(), value.clone())?;
        let (fmax, fmin) = residual_extrema(&field, grid)?;
        let residual_zero = fmax.value <= tol.pass;
        let mut parallel = true;
        let (lo, hi) = field.patch().domain();
        for u in grid_points(lo, hi, grid) {
            if field.parallel_defect(&u)? > 10.0 * tol.pass {
                parallel = false;
                break;
            }
        }
        let periodic = {
            let a = value.value(&[0.0]);
            let b = value.value(&[period]);
            a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-9)
        };
        // a compact (periodic) totally geodesic field must be parallel
        let member_ok = !residual_zero || !periodic || parallel;
        identity_holds &= member_ok;
        notes.push(format!(
            "{label}: residual_zero={residual_zero}, periodic={periodic}, parallel={parallel}"
        ));
        if fmax.value > max.value {
            max = fmax;
        }
        if fmin.value < min.value {
            min = fmin;
        }
    }
    Ok(ScenarioData {
        max,
        min,
        notes: notes.join("; "),
        custom_outcome: Some(if identity_holds {
            Outcome::Pass
        } else {
            Outcome::Fail
        }),
    })
}

fn run_killing_sphere(grid: &GridSpec, _tol: &Tolerances) -> Result<ScenarioData> {
    let patch = conformal_full_patch(1.0, 0.2, 1.2)?;
    let rotation = SmoothFn::new(2, 2, |u, out| {
        out[0] = -u[1];
        out[1] = u[0];
    });
    let field = FieldAlongPatch::new(patch, rotation)?;
    let (max, min) = residual_extrema(&field, grid)?;
    Ok(ScenarioData {
        max,
        min,
        notes: format!(
            "rotation generator; frozen reference grid minimum {KILLING_SPHERE_GRID_MIN}"
        ),
        custom_outcome: None,
    })
}

fn run_equatorial_zone(grid: &GridSpec, tol: &Tolerances) -> Result<ScenarioData> {
    let meridian = SmoothFn::constant(2, vec![1.0, 0.0]);

    // the equator leaf: a one-dimensional patch where ξ = ∂_θ is normal
    let band = ChartedManifold::sphere_band(1.3);
    let equator = SmoothFn::new(1, 2, |u, out| {
        out[0] = D2::lift(0.0);
        out[1] = u[0];
    });
    let eq_patch = SubmanifoldPatch::new(band.clone(), equator, vec![-2.0], vec![2.0])?;
    let eq_field = FieldAlongPatch::new(eq_patch, SmoothFn::constant(1, vec![1.0, 0.0]))?;
    let (eq_max, _) = residual_extrema(&eq_field, grid)?;

    // the full band: ξ(D²) must fail by a margin away from the equator
    let full_patch = SubmanifoldPatch::full(band, vec![-1.0, -2.0], vec![1.0, 2.0])?;
    let full_field = FieldAlongPatch::new(full_patch, meridian)?;
    let (lo, hi) = full_field.patch().domain();
    let mut off_min = Extremum {
        value: f64::INFINITY,
        location: Vec::new(),
    };
    for u in grid_points(lo, hi, grid) {
        if u[0].abs() < 0.2 {
            continue;
        }
        let rep = full_field.tg_residuals(&u)?;
        if rep.max_residual() < off_min.value {
            off_min = Extremum {
                value: rep.max_residual(),
                location: u,
            };
        }
    }

    let on_pass = eq_max.value <= 1e-7;
    let off_pass = off_min.value >= tol.fail;
    Ok(ScenarioData {
        notes: format!(
            "on-equator (l=1) max residual {:.3e} (required <= 1e-7); off-equator (|θ| >= 0.2) \
             min residual {:.3e} (required >= {:.1e}; frozen closed-form floor {EQUATORIAL_OFF_MIN})",
            eq_max.value, off_min.value, tol.fail
        ),
        max: eq_max,
        min: off_min,
        custom_outcome: Some(if on_pass && off_pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }),
    })
}

fn run_normal_parallel(grid: &GridSpec, _tol: &Tolerances) -> Result<ScenarioData> {
    // flat R³ plane with a constant unit normal field
    let plane_field = FieldAlongPatch::new(
        flat_slice_patch()?,
        SmoothFn::constant(2, vec![0.0, 0.0, 1.0]),
    )?;
    let (max_a, min_a) = residual_extrema(&plane_field, grid)?;

    // sphere-band equator with the meridian field
    let band = ChartedManifold::sphere_band(1.3);
    let equator = SmoothFn::new(1, 2, |u, out| {
        out[0] = D2::lift(0.0);
        out[1] = u[0];
    });
    let patch = SubmanifoldPatch::new(band, equator, vec![-2.0], vec![2.0])?;
    let eq_field = FieldAlongPatch::new(patch, SmoothFn::constant(1, vec![1.0, 0.0]))?;
    let (max_b, min_b) = residual_extrema(&eq_field, grid)?;

    let max = if max_a.value >= max_b.value { max_a } else { max_b };
    let min = if min_a.value <= min_b.value { min_a } else { min_b };
    Ok(ScenarioData {
        max,
        min,
        notes: "flat plane with constant normal field and sphere-band equator with meridian field"
            .into(),
        custom_outcome: None,
    })
}

fn run_th3_degenerate(grid: &GridSpec, tol: &Tolerances) -> Result<ScenarioData> {
    // geodesic axis of the curvature-one chart with its unit normal field:
    // |ξ|² = 1 = 1/c makes the first normality multiplier vanish, so the
    // constant-length fallback decides the outcome
    let conf = ChartedManifold::conformal(2, 1.0);
    let axis = SmoothFn::new(1, 2, |u, out| {
        out[0] = u[0];
        out[1] = D2::lift(0.0);
    });
    let patch = SubmanifoldPatch::new(conf, axis, vec![-1.5], vec![1.5])?;
    let normal = SmoothFn::new(1, 2, |u, out| {
        out[0] = D2::lift(0.0);
        out[1] = D2::lift(1.0) + u[0] * u[0] * D2::lift(0.25);
    });
    let field = FieldAlongPatch::new(patch, normal)?;
    let (max, min) = residual_extrema(&field, grid)?;
    let (lo, hi) = field.patch().domain();
    let mut parallel_defect = 0.0_f64;
    let mut sff = 0.0_f64;
    let mut length_spread = 0.0_f64;
    let mut first_len = None;
    for u in grid_points(lo, hi, grid) {
        parallel_defect = parallel_defect.max(field.parallel_defect(&u)?);
        sff = sff.max(field.sff_residual(&u)?);
        let len = field.length(&u)?;
        let base = *first_len.get_or_insert(len);
        length_spread = length_spread.max((len - base).abs());
    }
    // constant-length equivalence: residuals vanish iff the field is
    // parallel and the patch is totally geodesic
    let lhs = max.value <= tol.pass;
    let rhs = parallel_defect <= 10.0 * tol.pass && sff <= 10.0 * tol.pass;
    let consistent = lhs == rhs && length_spread <= 1e-9;
    let notes = format!(
        "degenerate multiplier branch: |ξ|² = 1/c; residual max {:.3e}, parallel defect \
         {parallel_defect:.3e}, patch second-fundamental-form residual {sff:.3e}, \
         length spread {length_spread:.3e}",
        max.value
    );
    Ok(ScenarioData {
        max,
        min,
        notes,
        custom_outcome: Some(if consistent { Outcome::Pass } else { Outcome::Fail }),
    })
}

fn run_lie_centralizer(_grid: &GridSpec, _tol: &Tolerances) -> Result<ScenarioData> {
    let g = LieAlgebraModel::so3_plus_r();
    let basis: Vec<DVector<f64>> = (0..3)
        .map(|i| {
            let mut v = DVector::zeros(4);
            v[i] = 1.0;
            v
        })
        .collect();
    let mut xi = DVector::zeros(4);
    xi[3] = 1.0;
    let r = g.field_residual(&basis, &xi)?;
    let e = Extremum {
        value: r,
        location: xi.as_slice().to_vec(),
    };
    Ok(ScenarioData {
        max: e.clone(),
        min: e,
        notes: "generator of the central R factor along the so(3) subgroup".into(),
        custom_outcome: None,
    })
}

fn run_lie_semisimple(_grid: &GridSpec, _tol: &Tolerances) -> Result<ScenarioData> {
    let g = LieAlgebraModel::so3();
    let basis: Vec<DVector<f64>> = (0..3)
        .map(|i| {
            let mut v = DVector::zeros(3);
            v[i] = 1.0;
            v
        })
        .collect();
    let mut worst_min = f64::INFINITY;
    let mut loc = Vec::new();
    for xi in [
        DVector::from_vec(vec![1.0, 0.0, 0.0]),
        DVector::from_vec(vec![0.0, 1.0, 0.0]),
        DVector::from_vec(vec![0.0, 0.0, 1.0]),
        DVector::from_vec(vec![0.3, -1.1, 0.7]),
    ] {
        let r = g.field_residual(&basis, &xi)?;
        if r < worst_min {
            worst_min = r;
            loc = xi.as_slice().to_vec();
        }
    }
    let e = Extremum {
        value: worst_min,
        location: loc,
    };
    Ok(ScenarioData {
        max: e.clone(),
        min: e,
        notes: "semi-simple so(3): trivial center, every nonzero field has residual".into(),
        custom_outcome: None,
    })
}

fn run_lie_abelian(_grid: &GridSpec, _tol: &Tolerances) -> Result<ScenarioData> {
    let g = LieAlgebraModel::abelian(3);
    let basis: Vec<DVector<f64>> = (0..2)
        .map(|i| {
            let mut v = DVector::zeros(3);
            v[i] = 1.0;
            v
        })
        .collect();
    let xi = DVector::from_vec(vec![0.4, 2.0, -1.0]);
    let r = g.field_residual(&basis, &xi)?;
    let e = Extremum {
        value: r,
        location: xi.as_slice().to_vec(),
    };
    Ok(ScenarioData {
        max: e.clone(),
        min: e,
        notes: "abelian ambient algebra: every field centralizes every subgroup".into(),
        custom_outcome: None,
    })
}
