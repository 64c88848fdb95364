//! Bounds bracket the errors of non-extremal pairs.

use nalgebra::DVector;
use oeb_core::bounds::{bounds, log_sandwich, predict_convergence, SeriesClasses, Tri};
use oeb_core::iteration::{run, SchemeId};
use oeb_core::mappings::{verify_nonexpansive, Domain, MapPair, NonExpansiveMap};
use oeb_core::schedules::{catalog, SeriesClass};

const SETS: &[(&str, &str)] = &[
    ("na-a", "na-b"),
    ("nb-a", "nb-b"),
    ("na2-a", "na2-b"),
    ("rand", "eqbn-test1"),
    ("rand", "eqbn-test2"),
    ("rand", "eqbn-test3"),
    ("rand", "eqbn-test4"),
    ("an-fig1b-test2", "bn-fig1b-div"),
    ("an-fig1b-test3", "bn-fig1b-conv"),
    ("anbn-test1-a", "anbn-test1-b"),
    ("anbn-test2-a", "anbn-test2-b"),
    ("anbn-test3-a", "anbn-test3-b"),
    ("anbn-test4-a", "anbn-test4-b"),
    ("im-test1-a", "im-test1-b"),
    ("im-test2-a", "im-test2-b"),
    ("im-test3-a", "im-test3-b"),
    ("im-test4-a", "im-test4-b"),
    ("cmp-test1-a", "cmp-test1-b"),
    ("cmp-test2-a", "cmp-test2-b"),
    ("cmp-test3-a", "cmp-test3-b"),
    ("cmp-test4-a", "cmp-test4-b"),
];

#[test]
fn paper_pair_is_bracketed() {
    let x0 = DVector::from_element(1, 2.0);
    for &(alpha1, alpha2) in &[(0.5, 0.2), (0.5, 1.0)] {
        let pair = MapPair::paper(alpha1, alpha2).unwrap();
        for &(ka, kb) in SETS {
            let (a, b) = (catalog(ka).unwrap(), catalog(kb).unwrap());
            for scheme in [SchemeId::Ishikawa, SchemeId::ModifiedIshikawa, SchemeId::Mann] {
                let t = run(scheme, &pair, &a, &b, &x0, 1001, 0.0).unwrap();
                let bt = bounds(scheme, &a, &b, alpha1, alpha2, 1000).unwrap();
                for n in 0..=1000 {
                    let e = t.err[n + 1];
                    assert!(e <= bt.upper[n] + 1e-12, "{scheme} {ka}/{kb} n {n}: {e} > U {}", bt.upper[n]);
                    if let Some(l) = &bt.lower {
                        assert!(l[n] - 1e-12 <= e, "{scheme} {ka}/{kb} n {n}: {e} < L {}", l[n]);
                        assert!(l[n] <= bt.upper[n]);
                    }
                }
            }
        }
    }
}

#[test]
fn log_sandwiches_contain_the_bounds() {
    for &(alpha1, alpha2) in &[(0.5, 0.2), (0.5, 1.0), (0.25, 0.75)] {
        for &(ka, kb) in SETS {
            let (a, b) = (catalog(ka).unwrap(), catalog(kb).unwrap());
            for scheme in [SchemeId::Ishikawa, SchemeId::ModifiedIshikawa] {
                let s = match log_sandwich(scheme, &a, &b, alpha1, alpha2, 2000) {
                    Ok(s) => s,
                    Err(e) => panic!("{scheme} {ka}/{kb}: {e}"),
                };
                assert!(s.upper.contains(1e-12), "{scheme} {ka}/{kb}: {:?}", s.upper);
                if let Some(l) = s.lower {
                    assert!(l.contains(1e-12), "{scheme} {ka}/{kb}: {l:?}");
                }
            }
        }
    }
}

#[test]
fn shipped_maps_are_nonexpansive() {
    let x_star = DVector::from_element(1, 1.0);
    let sym = Domain::symmetric(&x_star, 1.0);
    let mut maps = Vec::new();
    for alpha in [0.0, 0.2, 0.5, 1.0] {
        maps.push(NonExpansiveMap::paper_sqrt(alpha).unwrap());
        maps.push(NonExpansiveMap::paper_sine(alpha).unwrap());
        maps.push(oeb_core::mappings::make_extremal_upper(alpha, &x_star, Domain::paper()).unwrap());
        maps.push(oeb_core::mappings::make_extremal_lower(alpha, &x_star, sym.clone()).unwrap());
    }
    for m in &maps {
        let r = verify_nonexpansive(m, 100_000, 42);
        assert!(r.passed, "{} alpha {}: {r:?}", m.id, m.alpha);
    }
}

#[test]
fn shipped_pairs_fix_x_star() {
    let pairs = [
        MapPair::paper(0.5, 0.2).unwrap(),
        MapPair::paper(0.5, 1.0).unwrap(),
        MapPair::extremal_upper(0.5, 0.2, DVector::from_element(1, 1.0), Domain::paper()).unwrap(),
        MapPair::extremal_lower_ishikawa(0.5, 0.2, DVector::from_element(1, 1.0), Domain::symmetric(&DVector::from_element(1, 1.0), 1.0)).unwrap(),
    ];
    for p in &pairs {
        let x = &p.common_fixed_point;
        assert!(p.t1.fixed_point_residual(x).unwrap() <= 1e-14);
        assert!(p.t2.fixed_point_residual(x).unwrap() <= 1e-14);
    }
}

#[test]
fn predicted_convergence_matches_products() {
    // Divergent b: the product falls below 1e-6 by N = 1e5.
    for &(ka, kb) in &[("rand", "eqbn-test1"), ("rand", "eqbn-test2"), ("rand", "eqbn-test3"), ("na-a", "na-b")] {
        let (a, b) = (catalog(ka).unwrap(), catalog(kb).unwrap());
        let classes = SeriesClasses {
            a: a.series_class(),
            b: b.series_class(),
            ab: SeriesClass::Unknown,
            a_plus_b: SeriesClass::Divergent,
        };
        let p = predict_convergence(SchemeId::Ishikawa, 0.5, 0.2, classes).unwrap();
        assert_eq!(p.upper_to_zero, Tri::Yes);
        let u = bounds(SchemeId::Ishikawa, &a, &b, 0.5, 0.2, 100_000).unwrap();
        assert!(u.upper[100_000] < 1e-6, "{kb}");
    }
}
