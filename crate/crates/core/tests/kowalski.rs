//! Cross-validation of the lift-wise covariant derivative against the
//! brute-force connection of the assembled bundle metric.

mod common;

use common::*;
use nalgebra::DVector;
use sasaki_core::sasaki::{kowalski_connection, kowalski_nabla, sasaki_inner, BundleTangent, LiftKind};

fn check_kind(kind: LiftKind, samples: usize, seed: u64) {
    let mut r = rng(seed);
    for m in reference_charts() {
        for _ in 0..samples {
            let z = random_bundle_point(&m, &mut r);
            let xc = random_vector(m.dim(), &mut r);
            let y = random_polynomial_field(m.dim(), &mut r);
            let x = tangent_at(&z, &xc);
            let got = kowalski_nabla(&m, &z, kind, &x, &y).unwrap();
            let direction = match kind {
                LiftKind::HH | LiftKind::HV => BundleTangent::horizontal(z.clone(), xc.clone()),
                LiftKind::VH | LiftKind::VV => BundleTangent::vertical(z.clone(), xc.clone()),
            };
            let y_horizontal = matches!(kind, LiftKind::HH | LiftKind::VH);
            let want = oracle_bundle_nabla(&m, &z, &direction, &y, y_horizontal);
            let scale = 1.0 + want.h.amax().max(want.v.amax());
            let dh = (got.h.clone() - &want.h).amax();
            let dv = (got.v.clone() - &want.v).amax();
            assert!(
                dh <= 1e-4 * scale && dv <= 1e-4 * scale,
                "{kind:?} on {}: dH={dh:.3e} dV={dv:.3e} (scale {scale:.3e})",
                m.name()
            );
        }
    }
}

#[test]
fn hh_matches_fd_oracle() {
    check_kind(LiftKind::HH, 12, 11);
}

#[test]
fn vh_matches_fd_oracle() {
    check_kind(LiftKind::VH, 12, 12);
}

#[test]
fn hv_matches_fd_oracle() {
    check_kind(LiftKind::HV, 12, 13);
}

#[test]
fn vv_matches_fd_oracle() {
    check_kind(LiftKind::VV, 12, 14);
}

/// Differentiating the Sasaki product of two lifted fields along a curve in
/// the bundle must equal the sum of the products with the lift-wise
/// covariant derivatives (metric compatibility).
#[test]
fn lift_connection_is_metric_compatible_along_curves() {
    let mut r = rng(99);
    for m in reference_charts() {
        for _ in 0..6 {
            let z0 = random_bundle_point(&m, &mut r);
            let vel_h = random_vector(m.dim(), &mut r);
            let vel_v = random_vector(m.dim(), &mut r);
            let y1 = random_polynomial_field(m.dim(), &mut r);
            let y2 = random_polynomial_field(m.dim(), &mut r);
            let z1f = random_polynomial_field(m.dim(), &mut r);
            let z2f = random_polynomial_field(m.dim(), &mut r);

            // curve through z0 with split velocity (vel_h, vel_v)
            let raw_vel = sasaki_core::sasaki::assemble(&m, &z0, &vel_h, &vel_v).unwrap();
            let at = |t: f64| {
                let n = m.dim();
                let x: Vec<f64> = (0..n)
                    .map(|a| z0.x.as_slice()[a] + t * raw_vel[a])
                    .collect();
                let xi: Vec<f64> = (0..n).map(|a| z0.xi[a] + t * raw_vel[n + a]).collect();
                sasaki_core::sasaki::BundlePoint::new(sasaki_core::Point::new(x), xi)
            };
            // g_s(Ỹ, Z̃) with Ỹ = y1^h + y2^v and Z̃ = z1^h + z2^v depends
            // only on the base point
            let product = |t: f64| {
                let z = at(t);
                let g = m.metric(&z.x).unwrap();
                let xv = z.x.as_slice();
                let y1v = DVector::from_vec(y1.value(xv));
                let y2v = DVector::from_vec(y2.value(xv));
                let z1v = DVector::from_vec(z1f.value(xv));
                let z2v = DVector::from_vec(z2f.value(xv));
                (&g * &z1v).dot(&y1v) + (&g * &z2v).dot(&y2v)
            };
            let h = 1e-5;
            let lhs = (product(h) - product(-h)) / (2.0 * h);

            let direction = BundleTangent {
                base: z0.clone(),
                h: vel_h.clone(),
                v: vel_v.clone(),
            };
            let nabla_of = |field: &sasaki_core::SmoothFn, horizontal: bool| {
                let kind = if horizontal { LiftKind::HH } else { LiftKind::HV };
                kowalski_connection(&m, &z0, &direction, kind, field).unwrap()
            };
            let xs = z0.x.as_slice();
            let lift_value = |f1: &sasaki_core::SmoothFn, f2: &sasaki_core::SmoothFn| BundleTangent {
                base: z0.clone(),
                h: DVector::from_vec(f1.value(xs)),
                v: DVector::from_vec(f2.value(xs)),
            };
            let sum = |a: &BundleTangent, b: &BundleTangent| BundleTangent {
                base: z0.clone(),
                h: &a.h + &b.h,
                v: &a.v + &b.v,
            };
            let ny = sum(&nabla_of(&y1, true), &nabla_of(&y2, false));
            let nz = sum(&nabla_of(&z1f, true), &nabla_of(&z2f, false));
            let ytilde = lift_value(&y1, &y2);
            let ztilde = lift_value(&z1f, &z2f);
            let rhs = sasaki_inner(&m, &z0, &ny, &ztilde).unwrap()
                + sasaki_inner(&m, &z0, &ytilde, &nz).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-4 * (1.0 + lhs.abs()),
                "compatibility defect {:.3e} on {}",
                (lhs - rhs).abs(),
                m.name()
            );
        }
    }
}
