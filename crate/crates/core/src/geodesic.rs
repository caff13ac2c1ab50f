//! Geodesic flow on `(TM, g_s)`.
//!
//! The curve `σ ↦ (x(σ), ξ(σ))` is a geodesic of the Sasaki metric iff
//! `x'' + R̄(ξ, ξ') x' = 0` and `ξ'' = 0`, primes being covariant derivatives
//! along `x`. [`rhs`] expands this covariant system symbolically to first
//! order in the coordinate state `(x, ẋ, ξ, ξ̇)`; [`oracle_integrate`] instead
//! treats `(x, ξ)` as plain coordinates of a `2n`-dimensional manifold with
//! the assembled Sasaki matrix and integrates the ordinary geodesic equation
//! with finite-difference Christoffel symbols, providing an independent
//! cross-check of the whole pipeline.

use nalgebra::DVector;

use crate::error::Result;
use crate::manifold::{riemann_apply, ChartedManifold, Point};
use crate::sasaki::{sasaki_christoffel_fd, sasaki_matrix, BundlePoint};

/// State of the bundle geodesic in induced coordinates: positions and plain
/// coordinate velocities (covariant quantities are formed on the fly).
#[derive(Clone, Debug, PartialEq)]
pub struct BundleGeodesicState {
    pub x: DVector<f64>,
    pub xdot: DVector<f64>,
    pub xi: DVector<f64>,
    pub xidot: DVector<f64>,
}

impl BundleGeodesicState {
    pub fn new(x: Vec<f64>, xdot: Vec<f64>, xi: Vec<f64>, xidot: Vec<f64>) -> Self {
        BundleGeodesicState {
            x: DVector::from_vec(x),
            xdot: DVector::from_vec(xdot),
            xi: DVector::from_vec(xi),
            xidot: DVector::from_vec(xidot),
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    fn axpy(&self, h: f64, d: &StateDerivative) -> Self {
        BundleGeodesicState {
            x: &self.x + &d.x * h,
            xdot: &self.xdot + &d.xdot * h,
            xi: &self.xi + &d.xi * h,
            xidot: &self.xidot + &d.xidot * h,
        }
    }
}

/// Time derivative of [`BundleGeodesicState`].
#[derive(Clone, Debug)]
pub struct StateDerivative {
    pub x: DVector<f64>,
    pub xdot: DVector<f64>,
    pub xi: DVector<f64>,
    pub xidot: DVector<f64>,
}

impl StateDerivative {
    fn weighted_sum(parts: [(&StateDerivative, f64); 4]) -> StateDerivative {
        let mut out = StateDerivative {
            x: &parts[0].0.x * parts[0].1,
            xdot: &parts[0].0.xdot * parts[0].1,
            xi: &parts[0].0.xi * parts[0].1,
            xidot: &parts[0].0.xidot * parts[0].1,
        };
        for (d, w) in &parts[1..] {
            out.x += &d.x * *w;
            out.xdot += &d.xdot * *w;
            out.xi += &d.xi * *w;
            out.xidot += &d.xidot * *w;
        }
        out
    }
}

/// One sampled point of a trace.
#[derive(Clone, Debug)]
pub struct TraceRecord {
    pub sigma: f64,
    pub state: BundleGeodesicState,
    /// Sasaki energy `g_s(Γ', Γ')` of the curve velocity.
    pub energy: f64,
}

/// Integration output: the sampled trace and whether the chart boundary cut
/// it short.
#[derive(Clone, Debug)]
pub struct GeodesicTrace {
    pub records: Vec<TraceRecord>,
    pub truncated: bool,
}

impl GeodesicTrace {
    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("trace always holds the initial record")
    }

    /// Largest relative deviation of the energy from its initial value.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.records[0].energy;
        if e0 == 0.0 {
            return 0.0;
        }
        self.records
            .iter()
            .fold(0.0_f64, |m, r| m.max((r.energy - e0).abs() / e0.abs()))
    }
}

/// Coordinate form of the geodesic system of `(TM, g_s)`.
///
/// With `ξ'^a = ξ̇^a + Γ^a_bc ξ^b ẋ^c`:
///
/// `ẍ^a = −Γ^a_bc ẋ^b ẋ^c − (R̄(ξ, ξ') ẋ)^a`
///
/// `ξ̈^a = −Γ^a_bc ξ'^b ẋ^c − (∂_d Γ^a_bc) ẋ^d ξ^b ẋ^c
///        − Γ^a_bc ξ̇^b ẋ^c − Γ^a_bc ξ^b ẍ^c`
pub fn rhs(m: &ChartedManifold, s: &BundleGeodesicState) -> Result<StateDerivative> {
    let n = m.dim();
    let xs = s.x.as_slice();
    m.check_point(xs)?;
    let (gamma, dgamma) = m.christoffel_with_derivs(xs)?;
    let riemann = crate::field::riemann_from_parts(&gamma, &dgamma);

    let mut xi_prime = s.xidot.clone();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                xi_prime[a] += gamma[(a, b, c)] * s.xi[b] * s.xdot[c];
            }
        }
    }

    let curv = riemann_apply(&riemann, &s.xi, &xi_prime, &s.xdot);
    let mut xddot = -curv;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                xddot[a] -= gamma[(a, b, c)] * s.xdot[b] * s.xdot[c];
            }
        }
    }

    let mut xiddot = DVector::zeros(n);
    for a in 0..n {
        let mut v = 0.0;
        for b in 0..n {
            for c in 0..n {
                v -= gamma[(a, b, c)] * (xi_prime[b] + s.xidot[b]) * s.xdot[c]
                    + gamma[(a, b, c)] * s.xi[b] * xddot[c];
                for d in 0..n {
                    v -= dgamma[(d, a, b, c)] * s.xdot[d] * s.xi[b] * s.xdot[c];
                }
            }
        }
        xiddot[a] = v;
    }

    Ok(StateDerivative {
        x: s.xdot.clone(),
        xdot: xddot,
        xi: s.xidot.clone(),
        xidot: xiddot,
    })
}

/// Sasaki energy of the current velocity: `ḡ(ẋ, ẋ) + ḡ(ξ', ξ')`.
pub fn sasaki_energy(m: &ChartedManifold, s: &BundleGeodesicState) -> Result<f64> {
    let n = m.dim();
    let g = m.metric_at(s.x.as_slice())?;
    let gamma = m.christoffel_at(s.x.as_slice())?;
    let mut xi_prime = s.xidot.clone();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                xi_prime[a] += gamma[(a, b, c)] * s.xi[b] * s.xdot[c];
            }
        }
    }
    Ok((&g * &s.xdot).dot(&s.xdot) + (&g * &xi_prime).dot(&xi_prime))
}

fn stepper(
    m: &ChartedManifold,
    s0: &BundleGeodesicState,
    sigma_end: f64,
    step: f64,
    f: impl Fn(&BundleGeodesicState) -> Result<StateDerivative>,
    energy: impl Fn(&BundleGeodesicState) -> Result<f64>,
) -> Result<GeodesicTrace> {
    assert!(step > 0.0, "step must be positive");
    let mut records = Vec::new();
    let mut state = s0.clone();
    let mut sigma = 0.0;
    records.push(TraceRecord {
        sigma,
        state: state.clone(),
        energy: energy(&state)?,
    });
    let mut truncated = false;
    while sigma < sigma_end - 1e-12 {
        let h = step.min(sigma_end - sigma);
        let next = match rk4_step(&state, h, &f) {
            Ok(next) if m.domain().contains(next.x.as_slice()) => next,
            // leaving the chart (or a stage evaluating outside it) stops the
            // integration rather than extrapolating
            _ => {
                truncated = true;
                break;
            }
        };
        state = next;
        sigma += h;
        records.push(TraceRecord {
            sigma,
            state: state.clone(),
            energy: energy(&state)?,
        });
    }
    Ok(GeodesicTrace { records, truncated })
}

fn rk4_step(
    s: &BundleGeodesicState,
    h: f64,
    f: &impl Fn(&BundleGeodesicState) -> Result<StateDerivative>,
) -> Result<BundleGeodesicState> {
    let k1 = f(s)?;
    let k2 = f(&s.axpy(h / 2.0, &k1))?;
    let k3 = f(&s.axpy(h / 2.0, &k2))?;
    let k4 = f(&s.axpy(h, &k3))?;
    let incr = StateDerivative::weighted_sum([(&k1, 1.0), (&k2, 2.0), (&k3, 2.0), (&k4, 1.0)]);
    Ok(s.axpy(h / 6.0, &incr))
}

/// Fixed-step RK4 integration of the covariant geodesic system.
pub fn integrate(
    m: &ChartedManifold,
    s0: &BundleGeodesicState,
    sigma_end: f64,
    step: f64,
) -> Result<GeodesicTrace> {
    stepper(
        m,
        s0,
        sigma_end,
        step,
        |s| rhs(m, s),
        |s| sasaki_energy(m, s),
    )
}

/// Step size for the finite-difference bundle Christoffel symbols used by the
/// oracle integrator.
pub const ORACLE_FD_STEP: f64 = 1e-5;

/// Brute-force reference integrator: the plain geodesic equation of the
/// assembled `2n x 2n` Sasaki matrix, with finite-difference Christoffel
/// symbols, no lift structure anywhere.
pub fn oracle_integrate(
    m: &ChartedManifold,
    s0: &BundleGeodesicState,
    sigma_end: f64,
    step: f64,
) -> Result<GeodesicTrace> {
    let n = m.dim();
    let f = |s: &BundleGeodesicState| -> Result<StateDerivative> {
        m.check_point(s.x.as_slice())?;
        let z = BundlePoint::new(Point::new(s.x.as_slice().to_vec()), s.xi.as_slice().to_vec());
        let gamma = sasaki_christoffel_fd(m, &z, ORACLE_FD_STEP)?;
        let mut q_dot = DVector::zeros(2 * n);
        for a in 0..n {
            q_dot[a] = s.xdot[a];
            q_dot[n + a] = s.xidot[a];
        }
        let mut q_ddot = DVector::zeros(2 * n);
        for a in 0..2 * n {
            let mut v = 0.0;
            for b in 0..2 * n {
                for c in 0..2 * n {
                    v -= gamma[(a, b, c)] * q_dot[b] * q_dot[c];
                }
            }
            q_ddot[a] = v;
        }
        Ok(StateDerivative {
            x: s.xdot.clone(),
            xdot: q_ddot.rows(0, n).into_owned(),
            xi: s.xidot.clone(),
            xidot: q_ddot.rows(n, n).into_owned(),
        })
    };
    let energy = |s: &BundleGeodesicState| -> Result<f64> {
        let z = BundlePoint::new(Point::new(s.x.as_slice().to_vec()), s.xi.as_slice().to_vec());
        let gs = sasaki_matrix(m, &z)?;
        let mut q_dot = DVector::zeros(2 * n);
        for a in 0..n {
            q_dot[a] = s.xdot[a];
            q_dot[n + a] = s.xidot[a];
        }
        Ok((&gs * &q_dot).dot(&q_dot))
    };
    stepper(m, s0, sigma_end, step, f, energy)
}

/// Largest state-space distance between two traces, compared record by
/// record over the common prefix.
pub fn trace_divergence(a: &GeodesicTrace, b: &GeodesicTrace) -> f64 {
    let mut worst = 0.0_f64;
    for (ra, rb) in a.records.iter().zip(&b.records) {
        let d = (&ra.state.x - &rb.state.x)
            .amax()
            .max((&ra.state.xdot - &rb.state.xdot).amax())
            .max((&ra.state.xi - &rb.state.xi).amax())
            .max((&ra.state.xidot - &rb.state.xidot).amax());
        worst = worst.max(d);
    }
    worst
}

/// Write a trace as CSV: header
/// `sigma,x1..xn,xdot1..xdotn,xi1..xin,xidot1..xidotn,energy`,
/// one row per record, 17 significant digits.
pub fn trace_to_csv(trace: &GeodesicTrace) -> String {
    let n = trace.records[0].state.dim();
    let mut out = String::from("sigma");
    for prefix in ["x", "xdot", "xi", "xidot"] {
        for a in 1..=n {
            out.push_str(&format!(",{prefix}{a}"));
        }
    }
    out.push_str(",energy\n");
    for r in &trace.records {
        out.push_str(&format!("{:.16e}", r.sigma));
        for block in [&r.state.x, &r.state.xdot, &r.state.xi, &r.state.xidot] {
            for v in block.iter() {
                out.push_str(&format!(",{v:.16e}"));
            }
        }
        out.push_str(&format!(",{:.16e}\n", r.energy));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::ChartedManifold;
    use approx::assert_relative_eq;

    #[test]
    fn flat_space_stays_affine() {
        let m = ChartedManifold::euclidean(2);
        let s0 = BundleGeodesicState::new(
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 0.0],
            vec![0.0, 1.0],
        );
        let trace = integrate(&m, &s0, 1.0, 1e-3).unwrap();
        assert!(!trace.truncated);
        let last = trace.last();
        assert_relative_eq!(last.sigma, 1.0, epsilon = 1e-12);
        assert_relative_eq!(last.state.x[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(last.state.x[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(last.state.xi[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(last.state.xi[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn energy_is_conserved_on_conformal_chart() {
        let m = ChartedManifold::conformal(2, 1.0);
        let s0 = BundleGeodesicState::new(
            vec![0.2, -0.1],
            vec![0.4, 0.3],
            vec![0.5, -0.2],
            vec![-0.1, 0.6],
        );
        let trace = integrate(&m, &s0, 1.0, 1e-3).unwrap();
        assert!(trace.energy_drift() <= 1e-8, "drift {}", trace.energy_drift());
    }

    #[test]
    fn zero_fiber_projects_to_base_geodesic() {
        // with ξ = ξ̇ = 0 the x-part must solve the plain base geodesic
        // equation; integrate that independently with its own RK4 loop
        let m = ChartedManifold::conformal(2, -1.0);
        let s0 = BundleGeodesicState::new(
            vec![0.1, 0.2],
            vec![0.5, -0.3],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
        );
        let trace = integrate(&m, &s0, 1.0, 1e-3).unwrap();

        let base_rhs = |x: &DVector<f64>, v: &DVector<f64>| -> (DVector<f64>, DVector<f64>) {
            let gamma = m.christoffel_at(x.as_slice()).unwrap();
            let mut acc = DVector::zeros(2);
            for a in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        acc[a] -= gamma[(a, b, c)] * v[b] * v[c];
                    }
                }
            }
            (v.clone(), acc)
        };
        let mut x = s0.x.clone();
        let mut v = s0.xdot.clone();
        let h = 1e-3;
        for _ in 0..1000 {
            let (k1x, k1v) = base_rhs(&x, &v);
            let (k2x, k2v) = base_rhs(&(&x + &k1x * (h / 2.0)), &(&v + &k1v * (h / 2.0)));
            let (k3x, k3v) = base_rhs(&(&x + &k2x * (h / 2.0)), &(&v + &k2v * (h / 2.0)));
            let (k4x, k4v) = base_rhs(&(&x + &k3x * h), &(&v + &k3v * h));
            x += (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6.0);
            v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
        }
        let last = trace.last();
        assert!((&last.state.x - &x).amax() <= 1e-8);
        assert!(last.state.xi.amax() <= 1e-12);
    }

    /// Starting with vanishing covariant fiber velocity, the base curve must
    /// follow the plain base geodesic with ξ parallel-transported along it
    /// (the curvature term drops since ξ' stays zero).
    #[test]
    fn parallel_fiber_reduces_to_horizontal_lift() {
        let m = ChartedManifold::conformal(2, 1.0);
        let x0 = vec![0.2, -0.1];
        let xdot0 = vec![0.5, 0.3];
        let xi0 = vec![0.8, -0.4];
        // coordinate fiber velocity making ξ' = 0 at σ = 0
        let gamma = m.christoffel_at(&x0).unwrap();
        let mut xidot0 = vec![0.0; 2];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    xidot0[a] -= gamma[(a, b, c)] * xi0[b] * xdot0[c];
                }
            }
        }
        let s0 = BundleGeodesicState::new(x0.clone(), xdot0.clone(), xi0.clone(), xidot0);
        let trace = integrate(&m, &s0, 1.0, 1e-3).unwrap();

        // ξ' must stay zero along the whole trace
        for rec in trace.records.iter().step_by(100) {
            let g = m.christoffel_at(rec.state.x.as_slice()).unwrap();
            for a in 0..2 {
                let mut xp = rec.state.xidot[a];
                for b in 0..2 {
                    for c in 0..2 {
                        xp += g[(a, b, c)] * rec.state.xi[b] * rec.state.xdot[c];
                    }
                }
                assert!(xp.abs() <= 1e-8, "ξ' component {a} = {xp} at σ={}", rec.sigma);
            }
        }

        // and x(σ) must match the zero-fiber base geodesic
        let base = integrate(
            &m,
            &BundleGeodesicState::new(x0, xdot0, vec![0.0, 0.0], vec![0.0, 0.0]),
            1.0,
            1e-3,
        )
        .unwrap();
        assert!((&trace.last().state.x - &base.last().state.x).amax() <= 1e-8);
    }

    #[test]
    fn oracle_agrees_on_flat_space() {
        let m = ChartedManifold::euclidean(2);
        let s0 = BundleGeodesicState::new(
            vec![0.3, -0.2],
            vec![0.4, 0.9],
            vec![1.0, 0.5],
            vec![-0.3, 0.2],
        );
        let a = integrate(&m, &s0, 1.0, 1e-2).unwrap();
        let b = oracle_integrate(&m, &s0, 1.0, 1e-2).unwrap();
        assert!(trace_divergence(&a, &b) <= 1e-10);
    }

    #[test]
    fn oracle_agrees_on_conformal_chart() {
        let m = ChartedManifold::conformal(2, 1.0);
        let s0 = BundleGeodesicState::new(
            vec![0.3, -0.2],
            vec![0.4, 0.9],
            vec![0.4, 0.9],
            vec![-0.3, 0.2],
        );
        let a = integrate(&m, &s0, 1.0, 1e-3).unwrap();
        let b = oracle_integrate(&m, &s0, 1.0, 1e-3).unwrap();
        let scale = 1.0 + a.last().state.x.amax();
        assert!(trace_divergence(&a, &b) <= 1e-6 * scale);
    }

    #[test]
    fn oracle_agrees_on_sphere_band_with_normal_fiber() {
        let m = ChartedManifold::sphere_band(1.3);
        // ξ ⟂ curve, ξ̇ = 0
        let s0 = BundleGeodesicState::new(
            vec![0.0, 0.0],
            vec![0.0, 0.7],
            vec![0.8, 0.0],
            vec![0.0, 0.0],
        );
        let a = integrate(&m, &s0, 1.0, 1e-3).unwrap();
        let b = oracle_integrate(&m, &s0, 1.0, 1e-3).unwrap();
        assert!(trace_divergence(&a, &b) <= 1e-6);
    }

    #[test]
    fn rk4_order_via_step_halving() {
        let m = ChartedManifold::conformal(2, 1.0);
        let s0 = BundleGeodesicState::new(
            vec![0.3, 0.1],
            vec![0.8, -0.5],
            vec![0.7, 0.4],
            vec![0.2, 0.9],
        );
        let coarse = integrate(&m, &s0, 1.0, 0.05).unwrap();
        let half = integrate(&m, &s0, 1.0, 0.025).unwrap();
        let reference = integrate(&m, &s0, 1.0, 0.05 / 16.0).unwrap();
        let err = |t: &GeodesicTrace| {
            (&t.last().state.x - &reference.last().state.x)
                .amax()
                .max((&t.last().state.xi - &reference.last().state.xi).amax())
        };
        let ratio = err(&coarse) / err(&half);
        assert!(
            (12.0..=20.0).contains(&ratio),
            "step-halving ratio {ratio} outside RK4 band"
        );
    }

    #[test]
    fn boundary_exit_truncates_with_flag() {
        let m = ChartedManifold::sphere_band(0.3);
        let s0 = BundleGeodesicState::new(
            vec![0.0, 0.0],
            vec![1.0, 0.0], // heads straight for the θ boundary
            vec![0.0, 0.0],
            vec![0.0, 0.0],
        );
        let trace = integrate(&m, &s0, 2.0, 1e-2).unwrap();
        assert!(trace.truncated);
        let last = trace.last();
        assert!(last.sigma < 2.0);
        assert!(last.state.x[0].abs() <= 0.3);
    }

    #[test]
    fn csv_layout_and_digits() {
        let m = ChartedManifold::euclidean(2);
        let s0 = BundleGeodesicState::new(
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 0.0],
            vec![0.0, 1.0],
        );
        let trace = integrate(&m, &s0, 0.01, 1e-2).unwrap();
        let csv = trace_to_csv(&trace);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "sigma,x1,x2,xdot1,xdot2,xi1,xi2,xidot1,xidot2,energy"
        );
        let first = lines.next().unwrap();
        assert_eq!(first.split(',').count(), 10);
        assert!(first.split(',').all(|f| f.parse::<f64>().is_ok()));
        assert!(!csv.contains('\r'));
        let total_rows = csv.lines().count() - 1;
        assert_eq!(total_rows, trace.records.len());
    }
}
