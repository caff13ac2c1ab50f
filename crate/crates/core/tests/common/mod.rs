//! Shared helpers for the integration suites: seeded random geometry samples,
//! polynomial test fields, and the finite-difference connection oracle on the
//! assembled bundle metric.
#![allow(dead_code)] // each test target uses its own subset

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sasaki_core::dual::D2;
use sasaki_core::sasaki::{
    assemble, sasaki_christoffel_fd, split, BundlePoint, BundleTangent,
};
use sasaki_core::{ChartedManifold, Point, SmoothFn, TangentVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The three reference charts of the cross-check suites.
pub fn reference_charts() -> Vec<ChartedManifold> {
    vec![
        ChartedManifold::euclidean(2),
        ChartedManifold::conformal(2, 1.0),
        ChartedManifold::conformal(2, -1.0),
    ]
}

/// Random bundle point with the base point kept inside the chart.
pub fn random_bundle_point(m: &ChartedManifold, rng: &mut ChaCha8Rng) -> BundlePoint {
    let n = m.dim();
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.6..0.6)).collect();
    let xi: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    BundlePoint::new(Point::new(x), xi)
}

pub fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_iterator(n, (0..n).map(|_| rng.gen_range(-1.0..1.0)))
}

/// Random quadratic polynomial field `y^a(x) = c0 + c1 x + ½ x·c2·x`.
pub fn random_polynomial_field(n: usize, rng: &mut ChaCha8Rng) -> SmoothFn {
    let c0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let c1: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let c2: Vec<f64> = (0..n * n * n).map(|_| rng.gen_range(-0.5..0.5)).collect();
    SmoothFn::new(n, n, move |x, out| {
        for a in 0..n {
            let mut v = D2::lift(c0[a]);
            for b in 0..n {
                v = v + D2::lift(c1[a * n + b]) * x[b];
                for c in 0..n {
                    v = v + D2::lift(0.5 * c2[(a * n + b) * n + c]) * x[b] * x[c];
                }
            }
            out[a] = v;
        }
    })
}

/// Raw induced-coordinate components of the lift of the field `y` at an
/// arbitrary bundle point `q = (x, ξ)`.
fn lifted_field_raw(m: &ChartedManifold, y: &SmoothFn, q: &[f64], horizontal: bool) -> Vec<f64> {
    let n = m.dim();
    let z = BundlePoint::new(Point::new(q[..n].to_vec()), q[n..].to_vec());
    let yv = DVector::from_vec(y.value(&q[..n]));
    let zero = DVector::zeros(n);
    let raw = if horizontal {
        assemble(m, &z, &yv, &zero).expect("lift of a smooth field")
    } else {
        assemble(m, &z, &zero, &yv).expect("lift of a smooth field")
    };
    raw
}

/// Brute-force covariant derivative on `(TM, g_s)`: directional derivative
/// of the lifted field in induced coordinates plus the finite-difference
/// Christoffel correction of the assembled matrix. Entirely independent of
/// the lift-wise formulas it checks.
pub fn oracle_bundle_nabla(
    m: &ChartedManifold,
    z: &BundlePoint,
    direction: &BundleTangent,
    y: &SmoothFn,
    y_horizontal: bool,
) -> BundleTangent {
    let n = m.dim();
    let mut q0 = Vec::with_capacity(2 * n);
    q0.extend_from_slice(z.x.as_slice());
    q0.extend(z.xi.iter());
    let w_raw = assemble(m, z, &direction.h, &direction.v).expect("direction assembles");
    let h = 1e-6;
    let mut result = vec![0.0; 2 * n];
    // W^B ∂_B F^A by central differences
    let mut q = q0.clone();
    for b in 0..2 * n {
        q[b] = q0[b] + h;
        let fp = lifted_field_raw(m, y, &q, y_horizontal);
        q[b] = q0[b] - h;
        let fm = lifted_field_raw(m, y, &q, y_horizontal);
        q[b] = q0[b];
        for a in 0..2 * n {
            result[a] += w_raw[b] * (fp[a] - fm[a]) / (2.0 * h);
        }
    }
    let gamma = sasaki_christoffel_fd(m, z, 1e-5).expect("bundle christoffels");
    let f0 = lifted_field_raw(m, y, &q0, y_horizontal);
    for a in 0..2 * n {
        for b in 0..2 * n {
            for c in 0..2 * n {
                result[a] += gamma[(a, b, c)] * f0[b] * w_raw[c];
            }
        }
    }
    split(m, z, &result).expect("oracle result splits")
}

pub fn tangent_at(z: &BundlePoint, comp: &DVector<f64>) -> TangentVector {
    TangentVector {
        base: z.x.clone(),
        comp: comp.clone(),
    }
}
