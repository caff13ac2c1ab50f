//! JSON run configuration: user-defined manifolds, patches and fields via the
//! expression language, plus grid, tolerance, differentiation and geodesic
//! settings. Validation failures name the offending field.

use serde::{Deserialize, Serialize};

use crate::dual::D2;
use crate::error::{GeomError, Result};
use crate::expr::{parse, CompiledExpr, Expr};
use crate::field::{FieldAlongPatch, SubmanifoldPatch};
use crate::geodesic::BundleGeodesicState;
use crate::manifold::{ChartDomain, ChartedManifold, DiffMode};
use crate::scenario::{GridSpec, Tolerances};
use crate::smooth::SmoothFn;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub manifold: ManifoldConfig,
    #[serde(default)]
    pub patch: Option<PatchConfig>,
    #[serde(default)]
    pub field: Option<FieldConfig>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub differentiation: Option<DiffConfig>,
    #[serde(default)]
    pub geodesic: Option<GeodesicConfig>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldConfig {
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub curvature: Option<f64>,
    #[serde(default)]
    pub half_width: Option<f64>,
    #[serde(default)]
    pub period: Option<f64>,
    /// Row-major matrix of expressions in `x1..xn` and named constants.
    #[serde(default)]
    pub metric: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub constants: Option<std::collections::BTreeMap<String, f64>>,
    #[serde(default)]
    pub domain: Option<BoxConfig>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchConfig {
    #[serde(default)]
    pub builtin: Option<String>,
    /// Immersion components `x^a(u1..ul)`, one expression per ambient
    /// coordinate.
    #[serde(default)]
    pub immersion: Option<Vec<String>>,
    pub domain: BoxConfig,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    /// Ambient components `ξ^a(u1..ul)`.
    #[serde(default)]
    pub components: Option<Vec<String>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffConfig {
    /// `dual` for nested forward-mode, `fd` for central differences of the
    /// dual gradient.
    pub mode: String,
    #[serde(default)]
    pub h: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicConfig {
    pub x0: Vec<f64>,
    pub xdot0: Vec<f64>,
    pub xi0: Vec<f64>,
    pub xidot0: Vec<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub json: Option<String>,
    #[serde(default)]
    pub csv: Option<String>,
}

fn cfg_err(field: &str, msg: impl std::fmt::Display) -> GeomError {
    GeomError::Config(format!("{field}: {msg}"))
}

impl RunConfig {
    pub fn from_json(src: &str) -> Result<RunConfig> {
        serde_json::from_str(src).map_err(|e| GeomError::Config(format!("config JSON: {e}")))
    }

    /// Build the manifold described by the `manifold` section.
    pub fn build_manifold(&self) -> Result<ChartedManifold> {
        let mc = &self.manifold;
        let mut m = match (&mc.builtin, &mc.metric) {
            (Some(_), Some(_)) => {
                return Err(cfg_err(
                    "manifold",
                    "specify either `builtin` or `metric`, not both",
                ))
            }
            (None, None) => {
                return Err(cfg_err("manifold", "one of `builtin` or `metric` is required"))
            }
            (Some(name), None) => self.build_builtin_manifold(name)?,
            (None, Some(rows)) => self.build_expression_manifold(rows)?,
        };
        if let Some(diff) = &self.differentiation {
            let mode = match diff.mode.as_str() {
                "dual" => DiffMode::NestedDual,
                "fd" => DiffMode::FdSecond {
                    h: diff.h.unwrap_or(1e-4),
                },
                other => {
                    return Err(cfg_err(
                        "differentiation.mode",
                        format!("unknown mode `{other}` (expected `dual` or `fd`)"),
                    ))
                }
            };
            if let DiffMode::FdSecond { h } = mode {
                if !(h > 0.0) {
                    return Err(cfg_err("differentiation.h", "step must be positive"));
                }
            }
            m.set_diff_mode(mode);
        }
        Ok(m)
    }

    fn build_builtin_manifold(&self, name: &str) -> Result<ChartedManifold> {
        let mc = &self.manifold;
        let dim = mc.dim.unwrap_or(2);
        if dim == 0 {
            return Err(cfg_err("manifold.dim", "dimension must be at least 1"));
        }
        match name {
            "euclidean" => Ok(ChartedManifold::euclidean(dim)),
            "conformal" => {
                let c = mc
                    .curvature
                    .ok_or_else(|| cfg_err("manifold.curvature", "required for `conformal`"))?;
                if !c.is_finite() {
                    return Err(cfg_err("manifold.curvature", "must be finite"));
                }
                Ok(ChartedManifold::conformal(dim, c))
            }
            "sphere-band" => {
                let w = mc.half_width.unwrap_or(1.3);
                if !(0.0 < w && w < std::f64::consts::FRAC_PI_2) {
                    return Err(cfg_err(
                        "manifold.half_width",
                        "must lie in (0, π/2) so the band metric stays positive definite",
                    ));
                }
                Ok(ChartedManifold::sphere_band(w))
            }
            "flat-torus" => {
                let period = mc.period.unwrap_or(std::f64::consts::TAU);
                if !(period > 0.0) {
                    return Err(cfg_err("manifold.period", "must be positive"));
                }
                Ok(ChartedManifold::flat_torus(dim, period))
            }
            other => Err(cfg_err(
                "manifold.builtin",
                format!(
                    "unknown builtin `{other}` (expected euclidean, conformal, sphere-band, or flat-torus)"
                ),
            )),
        }
    }

    fn build_expression_manifold(&self, rows: &[Vec<String>]) -> Result<ChartedManifold> {
        let mc = &self.manifold;
        let n = rows.len();
        if n == 0 {
            return Err(cfg_err("manifold.metric", "matrix must be non-empty"));
        }
        if let Some(dim) = mc.dim {
            if dim != n {
                return Err(cfg_err(
                    "manifold.metric",
                    format!("matrix is {n}x{n} but `manifold.dim` says {dim}"),
                ));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(cfg_err(
                    "manifold.metric",
                    format!("must be an {n}x{n} matrix, row {} has {} entries", i + 1, row.len()),
                ));
            }
        }
        let vars: Vec<String> = (1..=n).map(|a| format!("x{a}")).collect();
        let (compiled, const_vals) = compile_entries(
            rows.iter().flatten(),
            "manifold.metric",
            &vars,
            mc.constants.as_ref(),
        )?;
        let domain = match &mc.domain {
            Some(b) => {
                check_box("manifold.domain", b, n)?;
                ChartDomain::Box {
                    lo: b.lo.clone(),
                    hi: b.hi.clone(),
                }
            }
            None => ChartDomain::All,
        };
        let metric = exprs_to_smoothfn(compiled, n, const_vals);
        let m = ChartedManifold::new(n, metric, domain, DiffMode::FdSecond { h: 1e-4 }, "custom")?;
        // validate the evaluator at the domain midpoint so broken metrics
        // fail at load time with a position-bearing message
        let mid = match &mc.domain {
            Some(b) => b
                .lo
                .iter()
                .zip(&b.hi)
                .map(|(l, h)| 0.5 * (l + h))
                .collect::<Vec<_>>(),
            None => vec![0.0; n],
        };
        let lookup_vals: Vec<(String, f64)> = vars
            .iter()
            .cloned()
            .zip(mid.iter().copied())
            .chain(
                mc.constants
                    .iter()
                    .flat_map(|m| m.iter().map(|(k, v)| (k.clone(), *v))),
            )
            .collect();
        for (k, src) in rows.iter().flatten().enumerate() {
            let e = parse(src).map_err(|err| cfg_err("manifold.metric", err))?;
            e.eval::<f64>(&|name| {
                lookup_vals
                    .iter()
                    .find_map(|(n2, v)| (n2 == name).then_some(*v))
            })
            .map_err(|err| {
                cfg_err(
                    &format!("manifold.metric[{}][{}]", k / n + 1, k % n + 1),
                    format!("{err} (at the domain midpoint)"),
                )
            })?;
        }
        m.check_metric_at(&mid)?;
        Ok(m)
    }

    /// Build the patch over the given manifold.
    pub fn build_patch(&self, m: &ChartedManifold) -> Result<SubmanifoldPatch> {
        let pc = self
            .patch
            .as_ref()
            .ok_or_else(|| cfg_err("patch", "section is required for this command"))?;
        let n = m.dim();
        check_box_monotone("patch.domain", &pc.domain)?;
        let l = pc.domain.lo.len();
        if l > n {
            return Err(cfg_err(
                "patch.domain",
                format!("intrinsic dimension {l} exceeds ambient dimension {n}"),
            ));
        }
        let immersion = match (&pc.builtin, &pc.immersion) {
            (Some(_), Some(_)) => {
                return Err(cfg_err(
                    "patch",
                    "specify either `builtin` or `immersion`, not both",
                ))
            }
            (Some(name), None) => match name.as_str() {
                "full" => {
                    if l != n {
                        return Err(cfg_err(
                            "patch.domain",
                            format!(
                                "builtin `full` needs an {n}-dimensional box, got {l} coordinates"
                            ),
                        ));
                    }
                    SmoothFn::identity(n)
                }
                other => {
                    return Err(cfg_err(
                        "patch.builtin",
                        format!("unknown builtin `{other}` (expected `full`)"),
                    ))
                }
            },
            (None, Some(components)) => {
                if components.len() != n {
                    return Err(cfg_err(
                        "patch.immersion",
                        format!(
                            "expected {n} components (ambient dimension {n}), got {}",
                            components.len()
                        ),
                    ));
                }
                let vars: Vec<String> = (1..=l).map(|i| format!("u{i}")).collect();
                let (compiled, const_vals) = compile_entries(
                    components.iter(),
                    "patch.immersion",
                    &vars,
                    self.manifold.constants.as_ref(),
                )?;
                exprs_to_smoothfn(compiled, l, const_vals)
            }
            (None, None) => {
                return Err(cfg_err("patch", "one of `builtin` or `immersion` is required"))
            }
        };
        SubmanifoldPatch::new(m.clone(), immersion, pc.domain.lo.clone(), pc.domain.hi.clone())
    }

    /// Build the field along the given patch.
    pub fn build_field(&self, patch: SubmanifoldPatch) -> Result<FieldAlongPatch> {
        let fc = self
            .field
            .as_ref()
            .ok_or_else(|| cfg_err("field", "section is required for this command"))?;
        let n = patch.ambient().dim();
        let l = patch.intrinsic_dim();
        let value = match (&fc.builtin, &fc.components) {
            (Some(_), Some(_)) => {
                return Err(cfg_err(
                    "field",
                    "specify either `builtin` or `components`, not both",
                ))
            }
            (Some(name), None) => match name.as_str() {
                "zero" => SmoothFn::constant(l, vec![0.0; n]),
                "constant" => {
                    let values = fc.values.clone().ok_or_else(|| {
                        cfg_err("field.values", "required for builtin `constant`")
                    })?;
                    if values.len() != n {
                        return Err(cfg_err(
                            "field.values",
                            format!("expected {n} entries (ambient dimension {n}), got {}", values.len()),
                        ));
                    }
                    SmoothFn::constant(l, values)
                }
                other => {
                    return Err(cfg_err(
                        "field.builtin",
                        format!("unknown builtin `{other}` (expected `zero` or `constant`)"),
                    ))
                }
            },
            (None, Some(components)) => {
                if components.len() != n {
                    return Err(cfg_err(
                        "field.components",
                        format!(
                            "expected {n} entries (ambient dimension {n}), got {}",
                            components.len()
                        ),
                    ));
                }
                let vars: Vec<String> = (1..=l).map(|i| format!("u{i}")).collect();
                let (compiled, const_vals) = compile_entries(
                    components.iter(),
                    "field.components",
                    &vars,
                    self.manifold.constants.as_ref(),
                )?;
                exprs_to_smoothfn(compiled, l, const_vals)
            }
            (None, None) => {
                return Err(cfg_err("field", "one of `builtin` or `components` is required"))
            }
        };
        FieldAlongPatch::new(patch, value)
    }

    /// Initial state for the geodesic command.
    pub fn build_geodesic_state(&self, m: &ChartedManifold) -> Result<BundleGeodesicState> {
        let gc = self
            .geodesic
            .as_ref()
            .ok_or_else(|| cfg_err("geodesic", "section is required for this command"))?;
        let n = m.dim();
        for (name, v) in [
            ("geodesic.x0", &gc.x0),
            ("geodesic.xdot0", &gc.xdot0),
            ("geodesic.xi0", &gc.xi0),
            ("geodesic.xidot0", &gc.xidot0),
        ] {
            if v.len() != n {
                return Err(cfg_err(
                    name,
                    format!("expected {n} entries (manifold dimension {n}), got {}", v.len()),
                ));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(cfg_err(name, "entries must be finite"));
            }
        }
        m.check_point(&gc.x0)
            .map_err(|e| cfg_err("geodesic.x0", e))?;
        Ok(BundleGeodesicState::new(
            gc.x0.clone(),
            gc.xdot0.clone(),
            gc.xi0.clone(),
            gc.xidot0.clone(),
        ))
    }

    pub fn grid(&self) -> GridSpec {
        self.grid.unwrap_or_default()
    }

    pub fn tolerances(&self) -> Result<Tolerances> {
        let t = self.tolerances.unwrap_or_default();
        if t.pass >= t.fail {
            return Err(GeomError::ToleranceConflict {
                pass: t.pass,
                fail: t.fail,
            });
        }
        Ok(t)
    }
}

fn check_box(field: &str, b: &BoxConfig, expected_len: usize) -> Result<()> {
    if b.lo.len() != expected_len || b.hi.len() != expected_len {
        return Err(cfg_err(
            field,
            format!(
                "box must have {expected_len} coordinates, got lo={}, hi={}",
                b.lo.len(),
                b.hi.len()
            ),
        ));
    }
    check_box_monotone(field, b)
}

fn check_box_monotone(field: &str, b: &BoxConfig) -> Result<()> {
    if b.lo.len() != b.hi.len() {
        return Err(cfg_err(
            field,
            format!("lo has {} coordinates, hi has {}", b.lo.len(), b.hi.len()),
        ));
    }
    if b.lo.is_empty() {
        return Err(cfg_err(field, "box must not be empty"));
    }
    for (i, (l, h)) in b.lo.iter().zip(&b.hi).enumerate() {
        if !(l.is_finite() && h.is_finite() && l < h) {
            return Err(cfg_err(
                field,
                format!("coordinate {}: lo must be finite and below hi, got [{l}, {h}]", i + 1),
            ));
        }
    }
    Ok(())
}

/// Parse and compile a list of expressions against `vars` plus named
/// constants; positions in error messages refer into the offending entry.
fn compile_entries<'a>(
    sources: impl Iterator<Item = &'a String>,
    field: &str,
    vars: &[String],
    constants: Option<&std::collections::BTreeMap<String, f64>>,
) -> Result<(Vec<CompiledExpr>, Vec<f64>)> {
    let mut slot_names: Vec<String> = vars.to_vec();
    let mut const_vals = Vec::new();
    if let Some(consts) = constants {
        for (name, value) in consts {
            if vars.contains(name) {
                return Err(cfg_err(
                    "manifold.constants",
                    format!("`{name}` collides with a coordinate variable"),
                ));
            }
            slot_names.push(name.clone());
            const_vals.push(*value);
        }
    }
    let mut compiled = Vec::new();
    for (k, src) in sources.enumerate() {
        let expr: Expr = parse(src)
            .map_err(|e| cfg_err(&format!("{field}[{}]", k + 1), e))?;
        let c = expr
            .compile(&slot_names)
            .map_err(|e| cfg_err(&format!("{field}[{}]", k + 1), e))?;
        compiled.push(c);
    }
    Ok((compiled, const_vals))
}

fn exprs_to_smoothfn(compiled: Vec<CompiledExpr>, in_dim: usize, const_vals: Vec<f64>) -> SmoothFn {
    let out_dim = compiled.len();
    SmoothFn::new(in_dim, out_dim, move |x, out| {
        let mut slots: Vec<D2> = Vec::with_capacity(in_dim + const_vals.len());
        slots.extend_from_slice(x);
        slots.extend(const_vals.iter().map(|&v| D2::lift(v)));
        for (o, e) in out.iter_mut().zip(&compiled) {
            *o = e.eval_slots(&slots);
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn valid_config_json() -> String {
        r#"{
            "manifold": {
                "metric": [["1/(1+(c/4)*(x1^2+x2^2))^2", "0"],
                           ["0", "1/(1+(c/4)*(x1^2+x2^2))^2"]],
                "constants": {"c": 1.0}
            },
            "patch": {"builtin": "full", "domain": {"lo": [-0.8, -0.8], "hi": [0.8, 0.8]}},
            "field": {"components": ["-u2", "u1"]},
            "grid": {"points_per_dim": 5, "margin": 0.1},
            "tolerances": {"pass": 1e-6, "fail": 1e-3}
        }"#
        .to_string()
    }

    #[test]
    fn expression_manifold_matches_builtin() {
        let cfg = RunConfig::from_json(&valid_config_json()).unwrap();
        let m = cfg.build_manifold().unwrap();
        let builtin = ChartedManifold::conformal(2, 1.0);
        for x in [[0.4, -0.3], [1.2, 0.8]] {
            let a = m.metric_at(&x).unwrap();
            let b = builtin.metric_at(&x).unwrap();
            assert!((a.clone() - b).amax() < 1e-15);
        }
        // fd second derivatives by default for expression metrics: curvature
        // still matches the nested-dual builtin closely
        let ra = m.riemann(&[0.3, 0.2]).unwrap();
        let rb = builtin.riemann(&[0.3, 0.2]).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        assert!((ra[(a, b, c, d)] - rb[(a, b, c, d)]).abs() < 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn full_pipeline_builds_and_runs() {
        let cfg = RunConfig::from_json(&valid_config_json()).unwrap();
        let m = cfg.build_manifold().unwrap();
        let patch = cfg.build_patch(&m).unwrap();
        let field = cfg.build_field(patch).unwrap();
        let rep = field.tg_residuals(&[0.3, 0.3]).unwrap();
        assert!(rep.max_residual() > 1e-3); // the rotation field is not totally geodesic
    }

    #[test]
    fn builtin_manifolds_build() {
        for (name, extra) in [
            ("euclidean", r#""dim": 3"#),
            ("conformal", r#""dim": 2, "curvature": -1.0"#),
            ("sphere-band", r#""half_width": 1.0"#),
            ("flat-torus", r#""dim": 2, "period": 6.0"#),
        ] {
            let json = format!(r#"{{"manifold": {{"builtin": "{name}", {extra}}}}}"#);
            let cfg = RunConfig::from_json(&json).unwrap();
            cfg.build_manifold().unwrap();
        }
    }

    #[test]
    fn dimensional_inconsistencies_name_the_field() {
        // non-square metric
        let json = r#"{"manifold": {"metric": [["1", "0", "0"], ["0", "1", "0"]]}}"#;
        let err = RunConfig::from_json(json)
            .unwrap()
            .build_manifold()
            .unwrap_err();
        assert!(err.to_string().contains("manifold.metric"), "{err}");

        // immersion components vs ambient dimension
        let json = r#"{
            "manifold": {"builtin": "euclidean", "dim": 3},
            "patch": {"immersion": ["u1", "u2"], "domain": {"lo": [0, 0], "hi": [1, 1]}}
        }"#;
        let cfg = RunConfig::from_json(json).unwrap();
        let m = cfg.build_manifold().unwrap();
        let err = cfg.build_patch(&m).unwrap_err();
        assert!(err.to_string().contains("patch.immersion"), "{err}");

        // l > n
        let json = r#"{
            "manifold": {"builtin": "euclidean", "dim": 2},
            "patch": {"builtin": "full", "domain": {"lo": [0, 0, 0], "hi": [1, 1, 1]}}
        }"#;
        let cfg = RunConfig::from_json(json).unwrap();
        let m = cfg.build_manifold().unwrap();
        let err = cfg.build_patch(&m).unwrap_err();
        assert!(err.to_string().contains("patch.domain"), "{err}");

        // wrong field arity
        let json = r#"{
            "manifold": {"builtin": "euclidean", "dim": 3},
            "patch": {"immersion": ["u1", "u2", "0"], "domain": {"lo": [0, 0], "hi": [1, 1]}},
            "field": {"components": ["0", "0"]}
        }"#;
        let cfg = RunConfig::from_json(json).unwrap();
        let m = cfg.build_manifold().unwrap();
        let patch = cfg.build_patch(&m).unwrap();
        let err = cfg.build_field(patch).unwrap_err();
        assert!(err.to_string().contains("field.components"), "{err}");

        // geodesic state arity
        let json = r#"{
            "manifold": {"builtin": "euclidean", "dim": 2},
            "geodesic": {"x0": [0, 0], "xdot0": [1], "xi0": [0, 0], "xidot0": [0, 1]}
        }"#;
        let cfg = RunConfig::from_json(json).unwrap();
        let m = cfg.build_manifold().unwrap();
        let err = cfg.build_geodesic_state(&m).unwrap_err();
        assert!(err.to_string().contains("geodesic.xdot0"), "{err}");
    }

    #[test]
    fn expression_errors_carry_positions() {
        let json = r#"{"manifold": {"metric": [["1 + * 2"]]}}"#;
        let err = RunConfig::from_json(json)
            .unwrap()
            .build_manifold()
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("manifold.metric[1]"), "{msg}");
        assert!(msg.contains("1:5"), "{msg}");

        // unbound variable in a field expression
        let json = r#"{
            "manifold": {"builtin": "euclidean", "dim": 2},
            "patch": {"builtin": "full", "domain": {"lo": [0, 0], "hi": [1, 1]}},
            "field": {"components": ["u3", "0"]}
        }"#;
        let cfg = RunConfig::from_json(json).unwrap();
        let m = cfg.build_manifold().unwrap();
        let patch = cfg.build_patch(&m).unwrap();
        let err = cfg.build_field(patch).unwrap_err();
        assert!(err.to_string().contains("unbound variable `u3`"), "{err}");
    }

    #[test]
    fn unknown_json_keys_are_rejected() {
        let json = r#"{"manifold": {"builtin": "euclidean"}, "grids": {}}"#;
        let err = RunConfig::from_json(json).unwrap_err();
        assert!(err.to_string().contains("grids"), "{err}");
    }

    #[test]
    fn degenerate_expression_metric_rejected_at_load() {
        let json = r#"{"manifold": {"metric": [["x1", "0"], ["0", "1"]],
                        "domain": {"lo": [-1, -1], "hi": [1, 1]}}}"#;
        // midpoint (0,0) has a singular metric
        let err = RunConfig::from_json(json)
            .unwrap()
            .build_manifold()
            .unwrap_err();
        assert!(err.to_string().contains("positive definite"), "{err}");
    }

    #[test]
    fn geodesic_state_round_trips() {
        let json = r#"{
            "manifold": {"builtin": "euclidean", "dim": 2},
            "geodesic": {"x0": [0, 0], "xdot0": [1, 0], "xi0": [0, 0], "xidot0": [0, 1]}
        }"#;
        let cfg = RunConfig::from_json(json).unwrap();
        let m = cfg.build_manifold().unwrap();
        let s = cfg.build_geodesic_state(&m).unwrap();
        assert_relative_eq!(s.xdot[0], 1.0);
        assert_relative_eq!(s.xidot[1], 1.0);
    }
}
