//! Optimal upper and lower error bounds.
//!
//! For a run started at `x0`, every admissible pair satisfies
//! `L_n ||x0 - x*|| <= ||x_{n+1} - x*|| <= U_n ||x0 - x*||`, and the affine
//! extremal maps attain both sides. The sequences are factor products over
//! `k = 0..=n`:
//!
//! | scheme | upper factor | lower factor |
//! |---|---|---|
//! | Ishikawa | `1 - b + a2 b (1 - a + a1 a)` | `1 - b A`, `A = 1 + a2 (1 - a + a1 a)` |
//! | modified | `(1 - a + a1 a)(1 - b + a2 b)` | `(1 - a - a1 a)(1 - b - a2 b)` |
//!
//! Mann and Picard use the Ishikawa factors with `a = 0` (and `b = 1` for
//! Picard, giving `U_n = a2^(n+1)`).
//!
//! The lower bound is only published when every lower factor is positive. The
//! signed product is always available in [`BoundsTrace::signed_lower`], since it
//! is what the reflected extremal pair produces.

use std::fmt;

use thiserror::Error;

use crate::iteration::SchemeId;
use crate::numerics::CompensatedSum;
use crate::schedules::{Schedule, ScheduleError, SeriesClass, TermFn};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("alpha1 = {alpha1}, alpha2 = {alpha2}: need both in [0, 1] and alpha1 + alpha2 in (0, 2)")]
    BadAlpha { alpha1: f64, alpha2: f64 },
    #[error("lower bound undefined: {factor} factor is {value} <= 0 at k = {index}")]
    LowerUndefined {
        index: usize,
        factor: LowerFactor,
        value: f64,
    },
    #[error("factor {value} <= 0 at k = {index}; logarithm undefined")]
    NonpositiveFactor { index: usize, value: f64 },
    #[error("precondition violated at k = {index}: {reason}")]
    PreconditionViolated { index: usize, reason: String },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// Which lower factor failed first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LowerFactor {
    /// Ishikawa `1 - b A`.
    Ishikawa,
    /// Modified Ishikawa `1 - a - a1 a`.
    Inner,
    /// Modified Ishikawa `1 - b - a2 b`.
    Outer,
}

impl fmt::Display for LowerFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LowerFactor::Ishikawa => "1 - b_k A_k",
            LowerFactor::Inner => "1 - a_k - alpha1 a_k",
            LowerFactor::Outer => "1 - b_k - alpha2 b_k",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsTrace {
    pub scheme: SchemeId,
    /// `U_0 ..= U_N`.
    pub upper: Vec<f64>,
    /// Natural log of `U_n`, accurate where `U_n` underflows.
    pub log_upper: Vec<f64>,
    /// `L_0 ..= L_N` when `lower_defined`.
    pub lower: Option<Vec<f64>>,
    /// `ln L_n` when `lower_defined`.
    pub log_lower: Option<Vec<f64>>,
    /// Product of the lower factors with their signs.
    pub signed_lower: Vec<f64>,
    pub u_factors: Vec<f64>,
    pub l_factors: Vec<f64>,
    pub lower_defined: bool,
    /// `A_k = 1 + a2 (1 - a_k + a1 a_k)`; empty for the modified scheme.
    pub a_aux: Vec<f64>,
    /// First index at which a lower factor is not positive.
    pub first_violation: Option<(usize, LowerFactor, f64)>,
}

impl BoundsTrace {
    pub fn horizon(&self) -> usize {
        self.upper.len() - 1
    }
}

/// Running product kept both linearly and as a compensated log-sum.
struct Product {
    linear: f64,
    log_abs: CompensatedSum,
    zero: bool,
    negative: bool,
}

const LINEAR_FLOOR: f64 = 1e-280;

impl Product {
    fn new() -> Self {
        Self {
            linear: 1.0,
            log_abs: CompensatedSum::new(),
            zero: false,
            negative: false,
        }
    }

    /// Multiplies by `f`; returns `(value, ln |value|)`.
    fn push(&mut self, f: f64) -> (f64, f64) {
        if f == 0.0 {
            self.zero = true;
        }
        if self.zero {
            return (0.0, f64::NEG_INFINITY);
        }
        self.linear *= f;
        self.log_abs.add(f.abs().ln());
        if f < 0.0 {
            self.negative = !self.negative;
        }
        let ln = self.log_abs.value();
        let value = if self.linear.abs() >= LINEAR_FLOOR {
            self.linear
        } else {
            let m = ln.exp();
            if self.negative {
                -m
            } else {
                m
            }
        };
        (value, ln)
    }
}

fn check_alpha(alpha1: f64, alpha2: f64) -> Result<(), BoundsError> {
    let unit = |x: f64| (0.0..=1.0).contains(&x);
    let s = alpha1 + alpha2;
    if unit(alpha1) && unit(alpha2) && s > 0.0 && s < 2.0 {
        Ok(())
    } else {
        Err(BoundsError::BadAlpha { alpha1, alpha2 })
    }
}

/// Terms `(a_k, b_k)` for `k = 0..=n` as seen by `scheme`.
fn scheme_terms(scheme: SchemeId, a: &Schedule, b: &Schedule, n: usize) -> Result<Vec<(f64, f64)>, ScheduleError> {
    (0..=n)
        .map(|k| {
            Ok(match scheme {
                SchemeId::Picard => (0.0, 1.0),
                SchemeId::Mann => (0.0, b.eval(k)?),
                _ => (a.eval(k)?, b.eval(k)?),
            })
        })
        .collect()
}

/// Upper and lower bound sequences for any scheme, up to `U_N`, `L_N`. Never
/// fails on non-positive lower factors; check `lower_defined`.
pub fn bounds(
    scheme: SchemeId,
    a: &Schedule,
    b: &Schedule,
    alpha1: f64,
    alpha2: f64,
    n: usize,
) -> Result<BoundsTrace, BoundsError> {
    if scheme == SchemeId::Picard {
        // a = 0 hides alpha1; only alpha2 is constrained.
        if !(0.0..=1.0).contains(&alpha2) {
            return Err(BoundsError::BadAlpha { alpha1, alpha2 });
        }
    } else {
        check_alpha(alpha1, alpha2)?;
    }
    let terms = scheme_terms(scheme, a, b, n)?;
    let modified = scheme == SchemeId::ModifiedIshikawa;

    let mut up = Product::new();
    let mut lo = Product::new();
    let mut t = BoundsTrace {
        scheme,
        upper: Vec::with_capacity(n + 1),
        log_upper: Vec::with_capacity(n + 1),
        lower: None,
        log_lower: None,
        signed_lower: Vec::with_capacity(n + 1),
        u_factors: Vec::with_capacity(n + 1),
        l_factors: Vec::with_capacity(n + 1),
        lower_defined: true,
        a_aux: Vec::new(),
        first_violation: None,
    };
    let mut log_lower = Vec::with_capacity(n + 1);

    for (k, &(ak, bk)) in terms.iter().enumerate() {
        let inner = 1.0 - ak + alpha1 * ak;
        let (uf, lf) = if modified {
            let l1 = 1.0 - ak - alpha1 * ak;
            let l2 = 1.0 - bk - alpha2 * bk;
            if t.first_violation.is_none() {
                if l1 <= 0.0 {
                    t.first_violation = Some((k, LowerFactor::Inner, l1));
                } else if l2 <= 0.0 {
                    t.first_violation = Some((k, LowerFactor::Outer, l2));
                }
            }
            (inner * (1.0 - bk + alpha2 * bk), l1 * l2)
        } else {
            let big_a = 1.0 + alpha2 * inner;
            t.a_aux.push(big_a);
            let lf = 1.0 - bk * big_a;
            if lf <= 0.0 && t.first_violation.is_none() {
                t.first_violation = Some((k, LowerFactor::Ishikawa, lf));
            }
            (1.0 - bk + alpha2 * bk * inner, lf)
        };
        t.u_factors.push(uf);
        t.l_factors.push(lf);
        let (u, lu) = up.push(uf);
        t.upper.push(u);
        t.log_upper.push(lu);
        let (l, ll) = lo.push(lf);
        t.signed_lower.push(l);
        log_lower.push(ll);
    }
    t.lower_defined = t.first_violation.is_none();
    if t.lower_defined {
        t.lower = Some(t.signed_lower.clone());
        t.log_lower = Some(log_lower);
    }
    Ok(t)
}

/// `U_n = prod_{k<=n} (1 - b_k + a2 b_k (1 - a_k + a1 a_k))`.
pub fn oueb_ishikawa(a: &Schedule, b: &Schedule, alpha1: f64, alpha2: f64, n: usize) -> Result<BoundsTrace, BoundsError> {
    bounds(SchemeId::Ishikawa, a, b, alpha1, alpha2, n)
}

/// `L_n = prod_{k<=n} (1 - b_k A_k)`; fails at the first non-positive factor.
pub fn oleb_ishikawa(a: &Schedule, b: &Schedule, alpha1: f64, alpha2: f64, n: usize) -> Result<BoundsTrace, BoundsError> {
    require_lower(bounds(SchemeId::Ishikawa, a, b, alpha1, alpha2, n)?)
}

/// `U_n = prod_{k<=n} (1 - a_k + a1 a_k)(1 - b_k + a2 b_k)`.
pub fn oueb_modified(a: &Schedule, b: &Schedule, alpha1: f64, alpha2: f64, n: usize) -> Result<BoundsTrace, BoundsError> {
    bounds(SchemeId::ModifiedIshikawa, a, b, alpha1, alpha2, n)
}

/// `L_n = prod_{k<=n} (1 - a_k - a1 a_k)(1 - b_k - a2 b_k)`; fails at the first
/// non-positive factor, naming which one.
pub fn oleb_modified(a: &Schedule, b: &Schedule, alpha1: f64, alpha2: f64, n: usize) -> Result<BoundsTrace, BoundsError> {
    require_lower(bounds(SchemeId::ModifiedIshikawa, a, b, alpha1, alpha2, n)?)
}

fn require_lower(t: BoundsTrace) -> Result<BoundsTrace, BoundsError> {
    match t.first_violation {
        Some((index, factor, value)) => Err(BoundsError::LowerUndefined { index, factor, value }),
        None => Ok(t),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tri {
    Yes,
    No,
    Unknown,
}

impl fmt::Display for Tri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tri::Yes => "yes",
            Tri::No => "no",
            Tri::Unknown => "unknown",
        })
    }
}

fn diverges(class: SeriesClass) -> Tri {
    match class {
        SeriesClass::Divergent => Tri::Yes,
        SeriesClass::Convergent => Tri::No,
        SeriesClass::Unknown => Tri::Unknown,
    }
}

/// Declared series classes of `sum a_k`, `sum b_k`, `sum a_k b_k` and
/// `sum (a_k + b_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesClasses {
    pub a: SeriesClass,
    pub b: SeriesClass,
    pub ab: SeriesClass,
    pub a_plus_b: SeriesClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergencePrediction {
    pub scheme: SchemeId,
    pub upper_to_zero: Tri,
    pub lower_to_zero: Tri,
    pub rationale: String,
    pub chi_alpha2_eq_1: bool,
}

/// Whether `U_n -> 0` and `L_n -> 0`, from declared classes and alphas only.
///
/// * Ishikawa upper: `sum b` diverges when `a2 < 1`, `sum a b` diverges when `a2 = 1`.
/// * Ishikawa lower: `sum b` diverges.
/// * Modified upper: `(1 - a1) sum a + (1 - a2) sum b` diverges.
/// * Modified lower: `sum (a + b)` diverges.
///
/// Mann is Ishikawa with `a = 0` and Picard additionally has `b = 1`; their
/// `a`, `ab` classes are implied. An `Unknown` class only matters when the
/// branch consults it.
pub fn predict_convergence(
    scheme: SchemeId,
    alpha1: f64,
    alpha2: f64,
    classes: SeriesClasses,
) -> Result<ConvergencePrediction, BoundsError> {
    if scheme == SchemeId::Picard {
        if !(0.0..=1.0).contains(&alpha2) {
            return Err(BoundsError::BadAlpha { alpha1, alpha2 });
        }
    } else {
        check_alpha(alpha1, alpha2)?;
    }
    let chi = alpha2 == 1.0;
    let classes = match scheme {
        SchemeId::Picard => SeriesClasses {
            a: SeriesClass::Convergent,
            b: SeriesClass::Divergent,
            ab: SeriesClass::Convergent,
            a_plus_b: SeriesClass::Divergent,
        },
        SchemeId::Mann => SeriesClasses {
            a: SeriesClass::Convergent,
            ab: SeriesClass::Convergent,
            a_plus_b: classes.b,
            ..classes
        },
        _ => classes,
    };
    let (upper, lower, rationale) = match scheme {
        SchemeId::ModifiedIshikawa => {
            let mut consulted = Vec::new();
            if alpha1 < 1.0 {
                consulted.push(classes.a);
            }
            if alpha2 < 1.0 {
                consulted.push(classes.b);
            }
            let upper = if consulted.contains(&SeriesClass::Divergent) {
                Tri::Yes
            } else if consulted.contains(&SeriesClass::Unknown) {
                Tri::Unknown
            } else {
                Tri::No
            };
            let rationale = format!(
                "upper: (1-alpha1) sum a + (1-alpha2) sum b with sum a {}, sum b {}; lower: sum (a+b) {}",
                classes.a, classes.b, classes.a_plus_b
            );
            (upper, diverges(classes.a_plus_b), rationale)
        }
        _ => {
            let (upper, branch) = if chi {
                (diverges(classes.ab), format!("alpha2 = 1: sum a b {}", classes.ab))
            } else {
                (diverges(classes.b), format!("alpha2 < 1: sum b {}", classes.b))
            };
            let rationale = format!("upper: {branch}; lower: sum b {}", classes.b);
            (upper, diverges(classes.b), rationale)
        }
    };
    Ok(ConvergencePrediction {
        scheme,
        upper_to_zero: upper,
        lower_to_zero: lower,
        rationale,
        chi_alpha2_eq_1: chi,
    })
}

/// `lower_sum <= value <= upper_sum`; `lower_sum` is `None` where the bound's
/// constant is undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sandwich {
    pub lower_sum: Option<f64>,
    pub value: f64,
    pub upper_sum: f64,
}

impl Sandwich {
    /// Containment with a relative slack `tol` on each side.
    pub fn contains(&self, tol: f64) -> bool {
        let slack = |x: f64| tol * x.abs().max(1.0);
        let lo_ok = self
            .lower_sum
            .map_or(true, |lo| lo - slack(lo) <= self.value);
        lo_ok && self.value <= self.upper_sum + slack(self.upper_sum)
    }
}

/// Sandwiches of `ln U_N` and (when defined) `ln L_N` by series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSandwich {
    pub upper: Sandwich,
    pub lower: Option<Sandwich>,
}

/// Series bounds on `ln U_N` and `ln L_N` from `-x/(1-x) <= ln(1-x) <= -x`.
///
/// Ishikawa, `a2 < 1`: `((a1 a2 - 1)/(a1 a2)) sum b <= ln U <= (a2 - 1) sum b`
/// (the left side is undefined when `a1 a2 = 0`).
/// Ishikawa, `a2 = 1`: `(a1 - 1) sum ab/(1 - (1-a1) ab) <= ln U <= (a1 - 1) sum ab`.
/// Ishikawa lower: `-(1 + a2) sum b/(1 - b A) <= ln L <= -(1 + a1 a2) sum b`.
/// Modified upper: `-sum [(1-a1) a/(1 - a + a1 a) + (1-a2) b/(1 - b + a2 b)] <= ln U <= -sum [(1-a1) a + (1-a2) b]`.
/// Modified lower: with `s_i = 1 + a_i`,
/// `-sum [s1 a/(1 - s1 a) + s2 b/(1 - s2 b)] <= ln L <= -sum (s1 a + s2 b)`.
pub fn log_sandwich(
    scheme: SchemeId,
    a: &Schedule,
    b: &Schedule,
    alpha1: f64,
    alpha2: f64,
    n: usize,
) -> Result<LogSandwich, BoundsError> {
    let t = bounds(scheme, a, b, alpha1, alpha2, n)?;
    if let Some((index, &value)) = t.u_factors.iter().enumerate().find(|(_, &f)| f <= 0.0) {
        return Err(BoundsError::NonpositiveFactor { index, value });
    }
    let terms = scheme_terms(scheme, a, b, n)?;
    let sum = |f: &dyn Fn(f64, f64) -> f64| -> f64 {
        terms.iter().map(|&(ak, bk)| f(ak, bk)).collect::<CompensatedSum>().value()
    };
    let log_u = t.log_upper[n];
    let log_l = t.log_lower.as_ref().map(|l| l[n]);

    if scheme == SchemeId::ModifiedIshikawa {
        let (s1, s2) = (1.0 + alpha1, 1.0 + alpha2);
        let upper = Sandwich {
            lower_sum: Some(-sum(&|ak, bk| {
                (1.0 - alpha1) * ak / (1.0 - ak + alpha1 * ak) + (1.0 - alpha2) * bk / (1.0 - bk + alpha2 * bk)
            })),
            value: log_u,
            upper_sum: -sum(&|ak, bk| (1.0 - alpha1) * ak + (1.0 - alpha2) * bk),
        };
        let lower = log_l.map(|value| Sandwich {
            lower_sum: Some(-sum(&|ak, bk| s1 * ak / (1.0 - s1 * ak) + s2 * bk / (1.0 - s2 * bk))),
            value,
            upper_sum: -sum(&|ak, bk| s1 * ak + s2 * bk),
        });
        return Ok(LogSandwich { upper, lower });
    }

    let upper = if alpha2 == 1.0 {
        Sandwich {
            lower_sum: Some((alpha1 - 1.0) * sum(&|ak, bk| ak * bk / (1.0 - (1.0 - alpha1) * ak * bk))),
            value: log_u,
            upper_sum: (alpha1 - 1.0) * sum(&|ak, bk| ak * bk),
        }
    } else {
        let p = alpha1 * alpha2;
        let sb = sum(&|_, bk| bk);
        Sandwich {
            lower_sum: (p > 0.0).then(|| (p - 1.0) / p * sb),
            value: log_u,
            upper_sum: (alpha2 - 1.0) * sb,
        }
    };
    let lower = log_l.map(|value| Sandwich {
        lower_sum: Some(
            -(1.0 + alpha2)
                * sum(&|ak, bk| bk / (1.0 - bk * (1.0 + alpha2 * (1.0 - ak + alpha1 * ak)))),
        ),
        value,
        upper_sum: -(1.0 + alpha1 * alpha2) * sum(&|_, bk| bk),
    });
    Ok(LogSandwich { upper, lower })
}

/// A sequence `u_k` with values in `[0, u_max]`.
#[derive(Debug, Clone)]
pub struct BoundedSequence {
    pub u_max: f64,
    pub terms: TermFn,
}

impl BoundedSequence {
    pub fn new(u_max: f64, f: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            u_max,
            terms: TermFn::new(f),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(c, move |_| c)
    }

    pub fn eval(&self, k: usize) -> f64 {
        self.terms.call(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesWitness {
    /// `a_k / (1 - a_k u_k) >= a_k` for every `k <= N`.
    pub termwise_lower_ok: bool,
    /// Largest `|1/(1 - a_k u_k) - 1|` over `k` in `(N - N/4, N]` with `a_k > 0`.
    pub ratio_tail: f64,
}

/// Evidence that `sum a_k/(1 - a_k u_k)` and `sum a_k` behave alike: the
/// termwise inequality and how close the term ratio is to 1 at the tail.
pub fn series_equiv_witness(a: &Schedule, u: &BoundedSequence, n: usize) -> Result<SeriesWitness, BoundsError> {
    let mut ok = true;
    let mut tail: f64 = 0.0;
    let tail_start = n - n / 4;
    for k in 0..=n {
        let ak = a.eval(k)?;
        let uk = u.eval(k);
        if !(0.0..=u.u_max).contains(&uk) {
            return Err(BoundsError::PreconditionViolated {
                index: k,
                reason: format!("u_k = {uk} outside [0, {}]", u.u_max),
            });
        }
        let d = 1.0 - ak * uk;
        if d <= 0.0 {
            return Err(BoundsError::PreconditionViolated {
                index: k,
                reason: format!("1 - a_k u_k = {d} <= 0"),
            });
        }
        let t = ak / d;
        ok &= t >= ak;
        if k > tail_start && ak > 0.0 {
            tail = tail.max((t / ak - 1.0).abs());
        }
    }
    Ok(SeriesWitness {
        termwise_lower_ok: ok,
        ratio_tail: tail,
    })
}
