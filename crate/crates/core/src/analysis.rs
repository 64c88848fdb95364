//! Rate ratios and scheme comparison.
//!
//! The rate ratio is `sigma_n = -ln Err_{n+1} / D_n` with `D_n = sum_{k<=n} b_k`
//! for Ishikawa and `sum_{k<=n} (a_k + b_k)` for the modified scheme. Under the
//! hypotheses recorded in [`RateHypotheses`] it lies in `[beta_min, beta_max]`.

use std::fmt;

use nalgebra::DVector;
use thiserror::Error;

use crate::bounds::{bounds, BoundsError};
use crate::iteration::{IterationTrace, SchemeId};
use crate::mappings::NormKind;
use crate::numerics::CompensatedSum;
use crate::schedules::{Schedule, ScheduleError, SeriesClass};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("no finite beta_max: {0}")]
    HypothesisUnavailable(String),
    #[error("runs cannot be compared: {0}")]
    MismatchedRuns(String),
    #[error("expected a {expected} trace, got {got}")]
    WrongScheme { expected: &'static str, got: SchemeId },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

/// `R(u, x, p)`: `||u - p|| / ||x - p||` when `x != p`, otherwise 1 if `u != x`
/// and 0 if `u = x = p`. Equalities are exact.
pub fn ratio(u: &DVector<f64>, x: &DVector<f64>, p: &DVector<f64>) -> f64 {
    ratio_with(NormKind::Euclidean, u, x, p)
}

pub fn ratio_with(norm: NormKind, u: &DVector<f64>, x: &DVector<f64>, p: &DVector<f64>) -> f64 {
    if x != p {
        norm.norm(&(u - p)) / norm.norm(&(x - p))
    } else if u != x {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RateHypotheses {
    /// Ishikawa: every `1 - b_k A_k` is positive, i.e. `epsilon > 0`.
    pub cond_ra_1: bool,
    /// Ishikawa: `delta < 1 / (1 + alpha2)`.
    pub remark_delta: bool,
    /// Modified: `epsilon1 > 0` and `epsilon2 > 0`.
    pub cond_ra_im: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub scheme: SchemeId,
    /// `sigma_n` for `n = 0..N`; `None` where `D_n = 0` or `Err_{n+1} = 0`.
    pub sigma: Vec<Option<f64>>,
    /// `Err_{n+1}`.
    pub err_next: Vec<f64>,
    /// `ln Err_{n+1}`.
    pub ln_err_next: Vec<f64>,
    /// `D_n`.
    pub denominator: Vec<f64>,
    pub beta_min: f64,
    /// Upper constant the proofs support.
    pub beta_max_guaranteed: Option<f64>,
    /// For the modified scheme, `min{(1+a1)/eps1, (1+a2)/eps2}` as printed
    /// alongside the experiments; equal to the guaranteed value for Ishikawa.
    pub beta_max_paper: Option<f64>,
    /// `max_k b_k` (Ishikawa).
    pub delta: Option<f64>,
    /// `min_k (1 - b_k A_k)` (Ishikawa).
    pub epsilon: Option<f64>,
    /// `min_k (1 - a_k - a1 a_k)` (modified).
    pub epsilon1: Option<f64>,
    /// `min_k (1 - b_k - a2 b_k)` (modified).
    pub epsilon2: Option<f64>,
    pub hypotheses: RateHypotheses,
}

impl RateReport {
    /// `(beta_min, beta_max_guaranteed)`.
    pub fn sandwich(&self) -> Result<(f64, f64), AnalysisError> {
        match self.beta_max_guaranteed {
            Some(hi) => Ok((self.beta_min, hi)),
            None => Err(AnalysisError::HypothesisUnavailable(match self.scheme {
                SchemeId::ModifiedIshikawa => format!(
                    "epsilon1 = {:?}, epsilon2 = {:?}",
                    self.epsilon1, self.epsilon2
                ),
                _ => format!(
                    "epsilon = {:?}, delta = {:?}",
                    self.epsilon, self.delta
                ),
            })),
        }
    }
}

fn check_trace(trace: &IterationTrace, modified: bool) -> Result<(), AnalysisError> {
    let ok = if modified {
        trace.scheme == SchemeId::ModifiedIshikawa
    } else {
        matches!(trace.scheme, SchemeId::Ishikawa | SchemeId::Mann)
    };
    if ok {
        Ok(())
    } else {
        Err(AnalysisError::WrongScheme {
            expected: if modified { "modified Ishikawa" } else { "Ishikawa" },
            got: trace.scheme,
        })
    }
}

fn sigmas(trace: &IterationTrace, terms: impl Iterator<Item = f64>) -> (Vec<Option<f64>>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = trace.horizon();
    let mut denom = CompensatedSum::new();
    let mut sigma = Vec::with_capacity(n);
    let mut dens = Vec::with_capacity(n);
    let mut err_next = Vec::with_capacity(n);
    let mut ln_next = Vec::with_capacity(n);
    for (k, t) in terms.take(n).enumerate() {
        denom.add(t);
        let d = denom.value();
        let ln_e = trace.ln_err(k + 1);
        dens.push(d);
        err_next.push(trace.err[k + 1]);
        ln_next.push(ln_e);
        sigma.push((d > 0.0 && ln_e.is_finite()).then(|| -ln_e / d));
    }
    (sigma, dens, err_next, ln_next)
}

/// Rate ratios of an Ishikawa (or Mann) trace with
/// `beta_min = 1 - a2` and
/// `beta_max = min{(1 + a2)/eps, (1 + a2)/(1 - (1 + a2) delta)}`, keeping only
/// branches with positive denominators. `eps` and `delta` range over
/// `k = 0..=N`.
pub fn rate_ishikawa(
    trace: &IterationTrace,
    a: &Schedule,
    b: &Schedule,
    alpha1: f64,
    alpha2: f64,
) -> Result<RateReport, AnalysisError> {
    check_trace(trace, false)?;
    let n = trace.horizon();
    let bt = bounds(trace.scheme, a, b, alpha1, alpha2, n)?;
    let b_terms: Vec<f64> = match trace.scheme {
        SchemeId::Mann | SchemeId::Ishikawa => (0..=n).map(|k| b.eval(k)).collect::<Result<_, _>>()?,
        _ => unreachable!(),
    };
    let (sigma, denominator, err_next, ln_err_next) = sigmas(trace, b_terms.iter().copied());
    let eps = bt.l_factors.iter().copied().fold(f64::INFINITY, f64::min);
    let delta = b_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s = 1.0 + alpha2;
    let by_eps = (eps > 0.0).then(|| s / eps);
    let rd = 1.0 - s * delta;
    let by_delta = (rd > 0.0).then(|| s / rd);
    let beta_max = match (by_eps, by_delta) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
    Ok(RateReport {
        scheme: trace.scheme,
        sigma,
        err_next,
        ln_err_next,
        denominator,
        beta_min: 1.0 - alpha2,
        beta_max_guaranteed: beta_max,
        beta_max_paper: beta_max,
        delta: Some(delta),
        epsilon: Some(eps),
        epsilon1: None,
        epsilon2: None,
        hypotheses: RateHypotheses {
            cond_ra_1: eps > 0.0,
            remark_delta: rd > 0.0,
            cond_ra_im: false,
        },
    })
}

/// Rate ratios of a modified Ishikawa trace with
/// `beta_min = min{1 - a1, 1 - a2}` and the guaranteed
/// `beta_max = max{(1 + a1)/eps1, (1 + a2)/eps2}`; `beta_max_paper` carries
/// the `min` of the same two terms.
pub fn rate_modified(
    trace: &IterationTrace,
    a: &Schedule,
    b: &Schedule,
    alpha1: f64,
    alpha2: f64,
) -> Result<RateReport, AnalysisError> {
    check_trace(trace, true)?;
    let n = trace.horizon();
    let mut terms = Vec::with_capacity(n + 1);
    let (mut eps1, mut eps2) = (f64::INFINITY, f64::INFINITY);
    for k in 0..=n {
        let (ak, bk) = (a.eval(k)?, b.eval(k)?);
        eps1 = eps1.min(1.0 - ak - alpha1 * ak);
        eps2 = eps2.min(1.0 - bk - alpha2 * bk);
        terms.push(ak + bk);
    }
    let (sigma, denominator, err_next, ln_err_next) = sigmas(trace, terms.into_iter());
    let ok = eps1 > 0.0 && eps2 > 0.0;
    let (t1, t2) = ((1.0 + alpha1) / eps1, (1.0 + alpha2) / eps2);
    Ok(RateReport {
        scheme: trace.scheme,
        sigma,
        err_next,
        ln_err_next,
        denominator,
        beta_min: (1.0 - alpha1).min(1.0 - alpha2),
        beta_max_guaranteed: ok.then(|| t1.max(t2)),
        beta_max_paper: ok.then(|| t1.min(t2)),
        delta: None,
        epsilon: None,
        epsilon1: Some(eps1),
        epsilon2: Some(eps2),
        hypotheses: RateHypotheses {
            cond_ra_1: false,
            remark_delta: false,
            cond_ra_im: ok,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    FasterIM,
    PositiveLimit,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::FasterIM => "faster-im",
            Verdict::PositiveLimit => "positive-limit",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Largest last-quartile relative spread of `R_n` read as a positive limit.
pub const POSITIVE_LIMIT_SPREAD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// `R_n = R(x_n^IM, x_n^I, x*)`.
    pub ratio: Vec<f64>,
    /// `log10 R_n`, finite where `R_n` underflows.
    pub log10_ratio: Vec<f64>,
    pub err_i: Vec<f64>,
    pub err_im: Vec<f64>,
    /// `b_k <= (1 - a1) a_k / (1 + a2 (1 - a_k + a1 a_k))` for all `k <= N`.
    pub termwise_condition: bool,
    pub first_violation: Option<usize>,
    pub b_divergent: bool,
    /// Termwise condition and a divergent `sum b_k`.
    pub cond_i_im_a_holds: bool,
    /// Some Ishikawa lower factor `1 - b_k A_k` is not positive, so the
    /// joint-convergence equivalence is not backed by the lower bound.
    pub lower_bound_warning: bool,
    /// `(max - min) / max` of `R_n` over `n` in `[ceil(3N/4), N]`.
    pub last_quartile_variation: f64,
    pub verdict: Verdict,
}

/// Compares a modified Ishikawa run with an Ishikawa run sharing `x0`, `x*`
/// and horizon.
///
/// The verdict is [`Verdict::FasterIM`] when the comparison condition holds,
/// [`Verdict::PositiveLimit`] when it fails but both runs converge (`sum b_k`
/// declared divergent, both errors below 1 at the horizon) and `R_n` varies by
/// less than [`POSITIVE_LIMIT_SPREAD`] over the last quarter, and
/// [`Verdict::Inconclusive`] otherwise.
pub fn compare_schemes(
    trace_im: &IterationTrace,
    trace_i: &IterationTrace,
    a: &Schedule,
    b: &Schedule,
    alpha1: f64,
    alpha2: f64,
) -> Result<ComparisonReport, AnalysisError> {
    if trace_im.horizon() != trace_i.horizon() {
        return Err(AnalysisError::MismatchedRuns(format!(
            "horizons {} and {}",
            trace_im.horizon(),
            trace_i.horizon()
        )));
    }
    if trace_im.x0 != trace_i.x0 {
        return Err(AnalysisError::MismatchedRuns("different x0".into()));
    }
    if trace_im.x_star != trace_i.x_star {
        return Err(AnalysisError::MismatchedRuns("different x*".into()));
    }
    let n = trace_i.horizon();

    let mut ratio = Vec::with_capacity(n + 1);
    let mut log10_ratio = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let (li, lm) = (trace_i.log10_err[k], trace_im.log10_err[k]);
        let same = trace_i.x[k] == trace_im.x[k] && li == lm;
        let (r, lr) = if trace_i.at_fixed_point(k) {
            if same {
                (0.0, f64::NEG_INFINITY)
            } else {
                (1.0, 0.0)
            }
        } else if trace_im.at_fixed_point(k) {
            (0.0, f64::NEG_INFINITY)
        } else {
            let lr = lm - li;
            (10f64.powf(lr), lr)
        };
        ratio.push(r);
        log10_ratio.push(lr);
    }

    let mut first_violation = None;
    let mut lower_bound_warning = false;
    for k in 0..=n {
        let (ak, bk) = (a.eval(k)?, b.eval(k)?);
        let inner = 1.0 - ak + alpha1 * ak;
        if first_violation.is_none() && bk > (1.0 - alpha1) * ak / (1.0 + alpha2 * inner) {
            first_violation = Some(k);
        }
        if 1.0 - bk * (1.0 + alpha2 * inner) <= 0.0 {
            lower_bound_warning = true;
        }
    }
    let termwise = first_violation.is_none();
    let b_divergent = b.series_class() == SeriesClass::Divergent;
    let holds = termwise && b_divergent;

    let start = (3 * n).div_ceil(4);
    let tail = &ratio[start..];
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    let variation = if hi > 0.0 && hi.is_finite() {
        (hi - lo) / hi
    } else {
        f64::NAN
    };

    // both converge iff sum b diverges; the runs must also have decreased
    let decreased = |t: &IterationTrace| t.log10_err[n] < 0.0;
    let verdict = if holds {
        Verdict::FasterIM
    } else if b_divergent && decreased(trace_i) && decreased(trace_im) && variation < POSITIVE_LIMIT_SPREAD {
        Verdict::PositiveLimit
    } else {
        Verdict::Inconclusive
    };

    Ok(ComparisonReport {
        ratio,
        log10_ratio,
        err_i: trace_i.err.clone(),
        err_im: trace_im.err.clone(),
        termwise_condition: termwise,
        first_violation,
        b_divergent,
        cond_i_im_a_holds: holds,
        lower_bound_warning,
        last_quartile_variation: variation,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iteration::run;
    use crate::mappings::MapPair;
    use crate::schedules::catalog;

    fn v(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    fn c(x: f64) -> Schedule {
        Schedule::constant(format!("{x}"), x, SeriesClass::Divergent)
    }

    #[test]
    fn ratio_branches() {
        assert_eq!(ratio(&v(1.0), &v(1.0), &v(1.0)), 0.0);
        assert_eq!(ratio(&v(3.0), &v(1.0), &v(1.0)), 1.0);
        assert_eq!(ratio(&v(1.5), &v(2.0), &v(1.0)), 0.5);
    }

    #[test]
    fn ishikawa_rate_constants() {
        let p = MapPair::paper(0.5, 0.2).unwrap();
        let (a, b) = (catalog("na-a").unwrap(), catalog("na-b").unwrap());
        let t = run(SchemeId::Ishikawa, &p, &a, &b, &v(2.0), 200, 0.0).unwrap();
        let r = rate_ishikawa(&t, &a, &b, 0.5, 0.2).unwrap();
        assert!((r.beta_min - 0.8).abs() < 1e-15);
        assert_eq!(r.delta, Some(0.2));
        // brute-force eps over k = 0..=200
        let eps = (0..=200)
            .map(|k| {
                let ak = a.eval(k).unwrap();
                1.0 - 0.2 - 0.04 * (1.0 - ak + 0.5 * ak)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((r.epsilon.unwrap() - eps).abs() < 1e-15);
        let want = (1.2 / eps).min(1.2 / 0.76);
        assert!((r.beta_max_guaranteed.unwrap() - want).abs() < 1e-12);
        assert!(r.hypotheses.cond_ra_1 && r.hypotheses.remark_delta);
        assert_eq!(r.sigma.len(), 200);
    }

    #[test]
    fn zero_b_gives_undefined_sigma() {
        let p = MapPair::paper(0.5, 0.2).unwrap();
        let z = catalog("zero").unwrap();
        let t = run(SchemeId::Ishikawa, &p, &c(0.5), &z, &v(2.0), 20, 0.0).unwrap();
        let r = rate_ishikawa(&t, &c(0.5), &z, 0.5, 0.2).unwrap();
        assert!(r.sigma.iter().all(Option::is_none));

        let t = run(SchemeId::ModifiedIshikawa, &p, &z, &z, &v(2.0), 20, 0.0).unwrap();
        let r = rate_modified(&t, &z, &z, 0.5, 0.2).unwrap();
        assert!(r.sigma.iter().all(Option::is_none));
    }

    #[test]
    fn modified_rate_constants() {
        let p = MapPair::paper(0.5, 0.2).unwrap();
        let q = c(0.25);
        let t = run(SchemeId::ModifiedIshikawa, &p, &q, &q, &v(2.0), 50, 0.0).unwrap();
        let r = rate_modified(&t, &q, &q, 0.5, 0.2).unwrap();
        assert_eq!(r.beta_min, 0.5);
        assert_eq!(r.epsilon1, Some(0.625));
        assert!((r.epsilon2.unwrap() - 0.7).abs() < 1e-15);
        assert!((r.beta_max_guaranteed.unwrap() - 2.4).abs() < 1e-12);
        assert!((r.beta_max_paper.unwrap() - 1.2 / 0.7).abs() < 1e-12);
        let (lo, hi) = r.sandwich().unwrap();
        for s in r.sigma.iter().flatten() {
            assert!(lo <= *s && *s <= hi);
        }

        let big = c(0.9);
        let t = run(SchemeId::ModifiedIshikawa, &p, &big, &q, &v(2.0), 5, 0.0).unwrap();
        let r = rate_modified(&t, &big, &q, 0.5, 0.2).unwrap();
        assert!(matches!(r.sandwich(), Err(AnalysisError::HypothesisUnavailable(_))));
    }

    #[test]
    fn identical_traces_compare_to_one() {
        let p = MapPair::paper(0.5, 0.2).unwrap();
        let (a, b) = (catalog("na-a").unwrap(), catalog("na-b").unwrap());
        let t = run(SchemeId::ModifiedIshikawa, &p, &a, &b, &v(2.0), 30, 0.0).unwrap();
        let mut u = t.clone();
        u.scheme = SchemeId::Ishikawa;
        let r = compare_schemes(&t, &u, &a, &b, 0.5, 0.2).unwrap();
        assert!(r.ratio.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn mismatched_runs() {
        let p = MapPair::paper(0.5, 0.2).unwrap();
        let (a, b) = (catalog("na-a").unwrap(), catalog("na-b").unwrap());
        let t = run(SchemeId::ModifiedIshikawa, &p, &a, &b, &v(2.0), 30, 0.0).unwrap();
        let u = run(SchemeId::Ishikawa, &p, &a, &b, &v(2.0), 20, 0.0).unwrap();
        let w = run(SchemeId::Ishikawa, &p, &a, &b, &v(2.5), 30, 0.0).unwrap();
        assert!(matches!(compare_schemes(&t, &u, &a, &b, 0.5, 0.2), Err(AnalysisError::MismatchedRuns(_))));
        assert!(matches!(compare_schemes(&t, &w, &a, &b, 0.5, 0.2), Err(AnalysisError::MismatchedRuns(_))));
    }

    #[test]
    fn verdicts_of_the_comparison_tests() {
        let p = MapPair::paper(0.5, 0.2).unwrap();
        let cases = [
            (1, Verdict::PositiveLimit),
            (2, Verdict::PositiveLimit),
            (3, Verdict::FasterIM),
            (4, Verdict::FasterIM),
        ];
        for (k, want) in cases {
            let a = catalog(&format!("cmp-test{k}-a")).unwrap();
            let b = catalog(&format!("cmp-test{k}-b")).unwrap();
            let ti = run(SchemeId::Ishikawa, &p, &a, &b, &v(2.0), 500, 0.0).unwrap();
            let tim = run(SchemeId::ModifiedIshikawa, &p, &a, &b, &v(2.0), 500, 0.0).unwrap();
            let r = compare_schemes(&tim, &ti, &a, &b, 0.5, 0.2).unwrap();
            assert_eq!(r.verdict, want, "test {k}");
            assert_eq!(r.cond_i_im_a_holds, k >= 3);
        }
        // a convergent sum b_k never yields a positive limit
        let (a, b) = (catalog("im-test4-a").unwrap(), catalog("im-test4-b").unwrap());
        let ti = run(SchemeId::Ishikawa, &p, &a, &b, &v(2.0), 500, 0.0).unwrap();
        let tim = run(SchemeId::ModifiedIshikawa, &p, &a, &b, &v(2.0), 500, 0.0).unwrap();
        assert_eq!(compare_schemes(&tim, &ti, &a, &b, 0.5, 0.2).unwrap().verdict, Verdict::Inconclusive);
    }
}
