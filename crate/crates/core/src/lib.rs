//! Ishikawa-type fixed-point iterations with optimal error bounds.
//!
//! * [`schedules`]: the parameter sequences `a_n`, `b_n` and their catalog.
//! * [`mappings`]: non-expansive maps, the paper's pair and the affine
//!   extremal maps.
//! * [`iteration`]: Picard, Mann, Ishikawa and modified Ishikawa runs.
//! * [`bounds`]: optimal upper/lower error bounds, convergence predicates,
//!   log sandwiches.
//! * [`analysis`]: rate ratios and the Ishikawa vs modified comparison.
//!
//! ```
//! use nalgebra::DVector;
//! use oeb_core::{bounds, iteration, mappings::MapPair, schedules::catalog};
//!
//! let pair = MapPair::paper(0.5, 0.2).unwrap();
//! let (a, b) = (catalog("na-a").unwrap(), catalog("na-b").unwrap());
//! let x0 = DVector::from_element(1, 2.0);
//! let trace = iteration::run(iteration::SchemeId::Ishikawa, &pair, &a, &b, &x0, 100, 0.0).unwrap();
//! let u = bounds::oueb_ishikawa(&a, &b, 0.5, 0.2, 99).unwrap();
//! assert!(trace.err[100] <= u.upper[99]);
//! ```

pub mod analysis;
pub mod bounds;
pub mod iteration;
pub mod mappings;
pub mod numerics;
pub mod schedules;

pub use analysis::{compare_schemes, rate_ishikawa, rate_modified, ratio, ComparisonReport, RateReport, Verdict};
pub use bounds::{BoundsTrace, ConvergencePrediction, Tri};
pub use iteration::{run, IterationTrace, RunStatus, SchemeId};
pub use mappings::{Domain, MapPair, NonExpansiveMap};
pub use schedules::{catalog, Schedule, SeriesClass};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/schedules.md")]
    mod schedules {}
    #[doc = include_str!("../../../book/src/mappings.md")]
    mod mappings {}
    #[doc = include_str!("../../../book/src/iteration.md")]
    mod iteration {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
}
