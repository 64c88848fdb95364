use nalgebra::DVector;
use oeb_core::analysis::{compare_schemes, ratio};
use oeb_core::bounds::{bounds, series_equiv_witness, BoundedSequence};
use oeb_core::iteration::{run, SchemeId};
use oeb_core::mappings::{Domain, MapPair};
use oeb_core::schedules::{
    catalog, catalog_with_seed, comparison_offset, derived_comparison_schedule, Schedule, SeriesClass, CATALOG,
};
use proptest::prelude::*;

fn v(x: f64) -> DVector<f64> {
    DVector::from_element(1, x)
}

#[test]
fn catalog_terms_stay_in_unit_interval() {
    for entry in CATALOG {
        let s = catalog(entry.key).unwrap();
        for n in 0..=1_000_000 {
            if let Err(e) = s.eval(n) {
                panic!("{}: {e}", entry.key);
            }
        }
    }
}

#[test]
fn random_schedules_are_reproducible() {
    let a = catalog_with_seed("rand", 42).unwrap();
    let b = catalog_with_seed("rand", 42).unwrap();
    let c = catalog_with_seed("rand", 43).unwrap();
    let mut differs = false;
    for n in 0..10_000 {
        let x = a.eval(n).unwrap();
        assert_eq!(x.to_bits(), b.eval(n).unwrap().to_bits());
        differs |= x != c.eval(n).unwrap();
    }
    assert!(differs);
}

#[test]
fn mann_and_picard_are_reductions_of_ishikawa() {
    let pair = MapPair::paper(0.5, 0.2).unwrap();
    let zero = catalog("zero").unwrap();
    let one = catalog("one").unwrap();
    let x0 = v(2.0);
    for kb in ["eqbn-test1", "eqbn-test2", "na-b", "im-test1-b"] {
        let b = catalog(kb).unwrap();
        let i = run(SchemeId::Ishikawa, &pair, &zero, &b, &x0, 3000, 0.0).unwrap();
        let m = run(SchemeId::Mann, &pair, &catalog("rand").unwrap(), &b, &x0, 3000, 0.0).unwrap();
        assert_eq!(i.x, m.x, "{kb}");
        assert_eq!(i.y, m.y);
        assert_eq!(
            i.log10_err.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            m.log10_err.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
    }
    let i = run(SchemeId::Ishikawa, &pair, &zero, &one, &x0, 500, 0.0).unwrap();
    let p = run(SchemeId::Picard, &pair, &zero, &zero, &x0, 500, 0.0).unwrap();
    assert_eq!(i.x, p.x);
    assert_eq!(i.err, p.err);
    assert_eq!(i.log10_err, p.log10_err);
}

#[test]
fn identical_runs_compare_to_zero_or_one() {
    let d = Domain::symmetric(&v(0.0), 1.0);
    let pair = MapPair::extremal_lower_modified(1.0, 0.5, v(0.0), d).unwrap();
    // 1 - a - alpha1 a = 0 sends x_1 to x* exactly
    let a = Schedule::constant("half", 0.5, SeriesClass::Divergent);
    let b = catalog("na-b").unwrap();
    let t = run(SchemeId::ModifiedIshikawa, &pair, &a, &b, &v(0.5), 10, 0.0).unwrap();
    let mut u = t.clone();
    u.scheme = SchemeId::Ishikawa;
    let r = compare_schemes(&t, &u, &a, &b, 1.0, 0.5).unwrap();
    assert_eq!(r.ratio[0], 1.0);
    assert!(r.ratio[1..].iter().all(|&x| x == 0.0));
    assert!(r.ratio.iter().all(|&x| x == 0.0 || x == 1.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ratio_is_scale_covariant(u in -10.0..10.0f64, x in -10.0..10.0f64, p in -10.0..10.0f64, t in prop_oneof![-8.0..-0.125f64, 0.125..8.0f64]) {
        prop_assume!(x != p);
        let r = ratio(&v(u), &v(x), &v(p));
        let us = p + t * (u - p);
        let xs = p + t * (x - p);
        prop_assume!(xs != p);
        let rs = ratio(&v(us), &v(xs), &v(p));
        // the shifted points are rounded once each, so allow a few ulp of that
        let tol = 8.0 * f64::EPSILON * (1.0 + r) * (1.0 + (u.abs() + x.abs() + p.abs()) / (x - p).abs());
        prop_assert!((r - rs).abs() <= tol, "{r} vs {rs}");
    }

    #[test]
    fn ratio_piecewise(p in -5.0..5.0f64, d in 0.001..5.0f64) {
        let pv = v(p);
        prop_assert_eq!(ratio(&pv, &pv, &pv), 0.0);
        prop_assert_eq!(ratio(&v(p + d), &pv, &pv), 1.0);
        prop_assert_eq!(ratio(&v(p + d), &v(p + d), &pv), 1.0);
    }

    #[test]
    fn partial_sums_are_additive(key in prop::sample::select(CATALOG.iter().map(|c| c.key).collect::<Vec<_>>()), n in 0usize..3000, m in 0usize..3000) {
        let s = catalog(key).unwrap();
        let whole = s.partial_sum(n + m).unwrap();
        let tail: f64 = (n..n + m).map(|k| s.eval(k).unwrap()).sum();
        let split = s.partial_sum(n).unwrap() + tail;
        prop_assert!((whole - split).abs() <= 8.0 * f64::EPSILON * ((n + m) as f64).max(1.0) * whole.max(1.0));
    }

    #[test]
    fn derived_schedule_meets_condition(c in 0.0..0.45f64, seed in any::<u64>(), a1 in 0.0..0.9f64, a2 in 0.0..1.0f64) {
        let b = Schedule::from_fn("b", SeriesClass::Divergent, move |n| c * (1.0 + (n as f64).sin()) / 2.0);
        let d = derived_comparison_schedule(&b, a1, a2, seed).unwrap();
        for n in 0..200 {
            match d.eval(n) {
                Ok(an) => {
                    let bn = b.eval(n).unwrap();
                    prop_assert!(an >= comparison_offset(bn, a1, a2) * (1.0 - 1e-15));
                    prop_assert!(bn <= (1.0 - a1) * an / (1.0 + a2 * (1.0 - an + a1 * an)) * (1.0 + 1e-12));
                }
                Err(e) => {
                    let unsatisfiable = matches!(e, oeb_core::schedules::ScheduleError::ConditionUnsatisfiable { .. });
                    prop_assert!(unsatisfiable);
                }
            }
        }
    }

    #[test]
    fn witness_holds_for_nonnegative_u(scale in 0.0..0.9f64, n in 8usize..4000) {
        let a = Schedule::from_fn("1/(k+2)", SeriesClass::Divergent, |k| 1.0 / (k as f64 + 2.0));
        let u = BoundedSequence::new(1.0, move |k| scale * (1.0 + (k as f64).cos()) / 2.0);
        let w = series_equiv_witness(&a, &u, n).unwrap();
        prop_assert!(w.termwise_lower_ok);
        prop_assert!(w.ratio_tail <= scale / (n as f64 * 0.75));
    }

    #[test]
    fn lower_never_exceeds_upper(a in 0.0..1.0f64, b in 0.0..1.0f64, a1 in 0.0..1.0f64, a2 in 0.0..1.0f64) {
        prop_assume!(a1 + a2 > 0.0);
        let sa = Schedule::constant("a", a, SeriesClass::Divergent);
        let sb = Schedule::constant("b", b, SeriesClass::Divergent);
        for scheme in [SchemeId::Ishikawa, SchemeId::ModifiedIshikawa] {
            let t = bounds(scheme, &sa, &sb, a1, a2, 50).unwrap();
            if let Some(l) = &t.lower {
                for n in 0..=50 {
                    prop_assert!(l[n] <= t.upper[n]);
                    prop_assert!(l[n] >= 0.0);
                }
            }
            for f in &t.u_factors {
                prop_assert!((0.0..=1.0).contains(f));
            }
        }
    }
}
