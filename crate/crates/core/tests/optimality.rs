//! The affine extremal maps turn the error bounds into equalities.

use nalgebra::DVector;
use oeb_core::bounds::bounds;
use oeb_core::iteration::{run, SchemeId};
use oeb_core::mappings::{Domain, MapPair};
use oeb_core::numerics::SplitMix64;
use oeb_core::schedules::{catalog, Formula, PowerTerm, Schedule, SeriesClass};

fn v(x: f64) -> DVector<f64> {
    DVector::from_element(1, x)
}

/// `|x - y| <= tol * max(|y|, 1e-300)`, falling back to logs below the
/// representable range.
fn close(err: f64, log10_err: f64, bound: f64, log_bound: f64, tol: f64) -> bool {
    if bound.abs() >= 1e-290 {
        (err - bound.abs()).abs() <= tol * bound.abs().max(1e-300)
    } else {
        (log10_err - log_bound / std::f64::consts::LN_10).abs() <= tol
    }
}

fn schedule_pairs() -> Vec<(Schedule, Schedule)> {
    let mut out = Vec::new();
    for i in 0..10u64 {
        let a = Schedule::random_uniform(format!("a{i}"), 1000 + i, 1);
        let b = Schedule::random_uniform(format!("b{i}"), 2000 + i, 2);
        out.push((a, b));
    }
    out
}

fn ln_abs(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.abs().ln()).collect()
}

#[test]
fn picard_matches_geometric_bound() {
    let rng = SplitMix64::new(7, 0);
    let z = catalog("zero").unwrap();
    for i in 0..20u64 {
        let alpha = rng.uniform(3 * i);
        let x_star = 4.0 * rng.uniform(3 * i + 1) - 2.0;
        let x0 = x_star + 2.0 * rng.uniform(3 * i + 2) - 1.0;
        let pair = MapPair::extremal_upper(0.5, alpha, v(x_star), Domain::symmetric(&v(x_star), 1.0)).unwrap();
        let t = run(SchemeId::Picard, &pair, &z, &z, &v(x0), 201, 0.0).unwrap();
        let u = bounds(SchemeId::Picard, &z, &z, 0.5, alpha, 200).unwrap();
        for n in 0..=200 {
            assert!(
                close(t.err[n + 1], t.log10_err[n + 1], u.upper[n], u.log_upper[n], 1e-12),
                "alpha {alpha}, n {n}: {} vs {}",
                t.err[n + 1],
                u.upper[n]
            );
        }
    }
}

#[test]
fn upper_bounds_attained() {
    let x_star = v(0.3);
    let d = Domain::symmetric(&x_star, 1.0);
    for (scheme, (a1, a2)) in [
        (SchemeId::Ishikawa, (0.5, 0.2)),
        (SchemeId::Ishikawa, (0.9, 1.0)),
        (SchemeId::ModifiedIshikawa, (0.5, 0.2)),
        (SchemeId::ModifiedIshikawa, (0.0, 0.7)),
    ] {
        let pair = MapPair::extremal_upper(a1, a2, x_star.clone(), d.clone()).unwrap();
        for (a, b) in schedule_pairs() {
            let t = run(scheme, &pair, &a, &b, &v(1.1), 201, 0.0).unwrap();
            let u = bounds(scheme, &a, &b, a1, a2, 200).unwrap();
            for n in 0..=200 {
                assert!(
                    close(t.err[n + 1], t.log10_err[n + 1], u.upper[n], u.log_upper[n], 1e-9),
                    "{scheme} n {n}"
                );
            }
        }
    }
}

#[test]
fn lower_bounds_attained_with_sign() {
    let x_star = v(-0.4);
    let d = Domain::symmetric(&x_star, 1.0);
    let e0 = 0.75;
    for (scheme, (a1, a2)) in [
        (SchemeId::Ishikawa, (0.5, 0.2)),
        (SchemeId::Ishikawa, (0.3, 1.0)),
        (SchemeId::ModifiedIshikawa, (0.5, 0.2)),
        (SchemeId::ModifiedIshikawa, (1.0, 0.6)),
    ] {
        let pair = if scheme == SchemeId::Ishikawa {
            MapPair::extremal_lower_ishikawa(a1, a2, x_star.clone(), d.clone()).unwrap()
        } else {
            MapPair::extremal_lower_modified(a1, a2, x_star.clone(), d.clone()).unwrap()
        };
        for (a, b) in schedule_pairs() {
            let t = run(scheme, &pair, &a, &b, &v(x_star[0] + e0), 201, 0.0).unwrap();
            let l = bounds(scheme, &a, &b, a1, a2, 200).unwrap();
            let log_l = ln_abs(&l.signed_lower);
            for n in 0..=200 {
                let signed = l.signed_lower[n];
                assert!(
                    close(t.err[n + 1], t.log10_err[n + 1], signed, log_l[n], 1e-9),
                    "{scheme} n {n}: {} vs {signed}",
                    t.err[n + 1]
                );
                // sign of the offset follows the sign of the product
                let off = t.x[n + 1][0] - x_star[0];
                if signed.abs() > 1e-12 {
                    assert_eq!(off.signum(), signed.signum(), "{scheme} n {n}");
                }
            }
        }
    }
}

#[test]
fn rational_template_matches_closed_form() {
    // (n + 3) / (2n + 3) through the generic template
    let s = Schedule::new(
        "t",
        Formula::Rational {
            num: vec![PowerTerm::new(1.0, 3.0, 1.0)],
            den: vec![PowerTerm::new(2.0, 0.0, 1.0), PowerTerm::new(3.0, 0.0, 0.0)],
        },
        SeriesClass::Divergent,
    );
    let na = catalog("na-a").unwrap();
    for n in 0..1000 {
        let want = (n as f64 + 3.0) / (2.0 * n as f64 + 3.0);
        assert!((s.eval(n).unwrap() - want).abs() <= f64::EPSILON * want);
        assert!((na.eval(n).unwrap() - want).abs() <= f64::EPSILON * want);
    }
}
