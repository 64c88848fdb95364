//! Parameter sequences `(a_n)` and `(b_n)`.
//!
//! A [`Schedule`] evaluates to a term in `[0, 1]` for every index `n >= 0` and
//! carries a *declared* classification of its series. Divergence of a series
//! cannot be decided from finitely many terms, so the declared class is what
//! the convergence predicates consume; [`Schedule::classify_empirical`] only
//! reports a growth exponent as a diagnostic.
//!
//! Schedules are immutable and cheap to clone. Random schedules are
//! counter-based, so `eval` is a pure function of the index.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::numerics::{CompensatedSum, SplitMix64, DEFAULT_SEED};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("schedule `{id}` produced {value} at n = {index}, outside [0, 1]")]
    FormulaOutOfRange { id: String, index: usize, value: f64 },
    #[error("unknown schedule `{0}`")]
    UnknownSchedule(String),
    #[error("schedule `{id}` has only zero terms; growth exponent is undefined")]
    DegenerateSchedule { id: String },
    #[error(
        "schedule `{id}`: b_{index} = {b} exceeds (1 - a1)/(1 + a1 a2) = {threshold}; \
         no a_n in [0, 1] satisfies the comparison condition"
    )]
    ConditionUnsatisfiable {
        id: String,
        index: usize,
        b: f64,
        threshold: f64,
    },
    #[error("invalid schedule parameter: {0}")]
    BadParameter(String),
}

/// Declared classification of `sum_k s_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesClass {
    Divergent,
    Convergent,
    Unknown,
}

impl SeriesClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SeriesClass::Divergent => "divergent",
            SeriesClass::Convergent => "convergent",
            SeriesClass::Unknown => "unknown",
        }
    }
}

impl fmt::Display for SeriesClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How term `n` is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormulaKind {
    Constant,
    RationalOfN,
    RandomUniform,
    DerivedFromSchedule,
    Custom,
}

/// `coef * (n + shift)^power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerm {
    pub coef: f64,
    pub shift: f64,
    pub power: f64,
}

impl PowerTerm {
    pub const fn new(coef: f64, shift: f64, power: f64) -> Self {
        Self { coef, shift, power }
    }

    #[inline]
    fn eval(&self, n: f64) -> f64 {
        let base = n + self.shift;
        let p = if self.power == 0.0 {
            1.0
        } else if self.power.fract() == 0.0 && self.power.abs() <= 64.0 {
            base.powi(self.power as i32)
        } else {
            base.powf(self.power)
        };
        self.coef * p
    }
}

/// Closed-form catalog formulas that do not fit the rational template.
///
/// `m` below stands for `n + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClosedForm {
    /// `(sqrt(m) + sin m) / (2 sqrt(m) + 3)`
    SqrtPlusSine,
    /// `(n + 2) / (3 m cbrt(m) + 4)`
    CubeRootDecay,
    /// `(2 m^2 + 1) / (3 m^2 sqrt(m) + 4)`
    InverseSqrtDecay,
    /// `sin^2(m) / sqrt(m^2 + 10)`
    SineSquaredOverM,
    /// `(2 e^{1 - 1/n} + 1) / (4 m^3 |sin m| + 2 e^{1 - 1/n})`; at `n = 0` the
    /// exponential is `e^{-inf} = 0`.
    ExpOverCubicSine,
    /// `(2 m^2 + cos m) / (3 m^2 + 2)`
    CosineRatio,
    /// `(2 m^2 + 1) / (4 m^3 + sin m)`
    SineCubicRatio,
    /// `sqrt(2 m^2 + 1) / (4 m^2 + 3)`
    SqrtOverQuadratic,
    /// `1 / sqrt(2n + 3)`
    InverseSqrtOdd,
    /// `sin^4(n) / (m^2 + 5)`
    SineFourthOverQuadratic,
    /// `|sin m| / (m^{4/3} + 2)`
    AbsSineOverFourThirds,
    /// `sqrt(2 m^2 + 1) / (4 m^3 + 5)`
    SqrtOverCubic,
    /// `|sin m| / sqrt(6n + 5)`
    AbsSineOverSqrt,
}

impl ClosedForm {
    fn eval(self, n: usize) -> f64 {
        let nf = n as f64;
        let m = nf + 1.0;
        match self {
            ClosedForm::SqrtPlusSine => (m.sqrt() + m.sin()) / (2.0 * m.sqrt() + 3.0),
            ClosedForm::CubeRootDecay => (nf + 2.0) / (3.0 * m * m.cbrt() + 4.0),
            ClosedForm::InverseSqrtDecay => (2.0 * m * m + 1.0) / (3.0 * m * m * m.sqrt() + 4.0),
            ClosedForm::SineSquaredOverM => m.sin().powi(2) / (m * m + 10.0).sqrt(),
            ClosedForm::ExpOverCubicSine => {
                let e = (1.0 - 1.0 / nf).exp();
                (2.0 * e + 1.0) / (4.0 * m.powi(3) * m.sin().abs() + 2.0 * e)
            }
            ClosedForm::CosineRatio => (2.0 * m * m + m.cos()) / (3.0 * m * m + 2.0),
            ClosedForm::SineCubicRatio => (2.0 * m * m + 1.0) / (4.0 * m.powi(3) + m.sin()),
            ClosedForm::SqrtOverQuadratic => (2.0 * m * m + 1.0).sqrt() / (4.0 * m * m + 3.0),
            ClosedForm::InverseSqrtOdd => 1.0 / (2.0 * nf + 3.0).sqrt(),
            ClosedForm::SineFourthOverQuadratic => nf.sin().powi(4) / (m * m + 5.0),
            ClosedForm::AbsSineOverFourThirds => m.sin().abs() / (m.powf(4.0 / 3.0) + 2.0),
            ClosedForm::SqrtOverCubic => (2.0 * m * m + 1.0).sqrt() / (4.0 * m.powi(3) + 5.0),
            ClosedForm::AbsSineOverSqrt => m.sin().abs() / (6.0 * nf + 5.0).sqrt(),
        }
    }
}

/// A user-supplied term function.
#[derive(Clone)]
pub struct TermFn(Arc<dyn Fn(usize) -> f64 + Send + Sync>);

impl TermFn {
    pub fn new(f: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    pub fn call(&self, n: usize) -> f64 {
        (self.0)(n)
    }
}

impl fmt::Debug for TermFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TermFn(..)")
    }
}

#[derive(Debug, Clone)]
pub enum Formula {
    Constant(f64),
    /// Ratio of two sums of [`PowerTerm`]s.
    Rational {
        num: Vec<PowerTerm>,
        den: Vec<PowerTerm>,
    },
    /// `u_n / (n + 1)^decay` with `u_n` uniform on `[0, 1)`.
    Random { rng: SplitMix64, decay: f64 },
    /// `min{1, u_n + (1 + a2) b_n / ((1 - a1)(1 + a2 b_n))}`.
    Derived {
        base: Box<Schedule>,
        alpha1: f64,
        alpha2: f64,
        rng: SplitMix64,
    },
    Closed(ClosedForm),
    Function(TermFn),
}

#[derive(Debug, Clone)]
pub struct Schedule {
    id: String,
    formula: Formula,
    series_class: SeriesClass,
    approx: Option<&'static str>,
}

/// Output of [`Schedule::classify_empirical`].
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesReport {
    pub schedule_id: String,
    pub horizon: usize,
    pub partial_sum: f64,
    pub growth_exponent_estimate: f64,
    pub declared_class: SeriesClass,
}

impl Schedule {
    pub fn new(id: impl Into<String>, formula: Formula, series_class: SeriesClass) -> Self {
        Self {
            id: id.into(),
            formula,
            series_class,
            approx: None,
        }
    }

    pub fn constant(id: impl Into<String>, value: f64, series_class: SeriesClass) -> Self {
        Self::new(id, Formula::Constant(value), series_class)
    }

    /// `(sum num) / (sum den)`, each a list of power terms in `n`.
    pub fn rational(
        id: impl Into<String>,
        num: Vec<PowerTerm>,
        den: Vec<PowerTerm>,
        series_class: SeriesClass,
    ) -> Self {
        Self::new(id, Formula::Rational { num, den }, series_class)
    }

    pub fn random_uniform(id: impl Into<String>, seed: u64, stream: u64) -> Self {
        Self::new(
            id,
            Formula::Random {
                rng: SplitMix64::new(seed, stream),
                decay: 0.0,
            },
            SeriesClass::Divergent,
        )
    }

    pub fn from_fn(
        id: impl Into<String>,
        series_class: SeriesClass,
        f: impl Fn(usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(id, Formula::Function(TermFn::new(f)), series_class)
    }

    /// Attaches an informal asymptotic annotation. Metadata only.
    pub fn with_approx(mut self, approx: &'static str) -> Self {
        self.approx = Some(approx);
        self
    }

    pub fn with_series_class(mut self, class: SeriesClass) -> Self {
        self.series_class = class;
        self
    }

    /// Replaces the seed of every random component (including the base of a
    /// derived schedule). Deterministic schedules are returned unchanged.
    pub fn reseeded(&self, seed: u64) -> Self {
        let mut s = self.clone();
        s.formula = match &self.formula {
            Formula::Random { rng, decay } => Formula::Random {
                rng: SplitMix64::new(seed, rng.stream()),
                decay: *decay,
            },
            Formula::Derived {
                base,
                alpha1,
                alpha2,
                rng,
            } => Formula::Derived {
                base: Box::new(base.reseeded(seed)),
                alpha1: *alpha1,
                alpha2: *alpha2,
                rng: SplitMix64::new(seed, rng.stream()),
            },
            other => other.clone(),
        };
        s
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn series_class(&self) -> SeriesClass {
        self.series_class
    }

    pub fn approx(&self) -> Option<&'static str> {
        self.approx
    }

    pub fn formula_kind(&self) -> FormulaKind {
        match self.formula {
            Formula::Constant(_) => FormulaKind::Constant,
            Formula::Rational { .. } => FormulaKind::RationalOfN,
            Formula::Random { .. } => FormulaKind::RandomUniform,
            Formula::Derived { .. } => FormulaKind::DerivedFromSchedule,
            Formula::Closed(_) | Formula::Function(_) => FormulaKind::Custom,
        }
    }

    /// Seed of the random component, if any.
    pub fn seed(&self) -> Option<u64> {
        match &self.formula {
            Formula::Random { rng, .. } | Formula::Derived { rng, .. } => Some(rng.seed()),
            _ => None,
        }
    }

    /// Named real parameters of the formula.
    pub fn params(&self) -> Vec<(String, f64)> {
        match &self.formula {
            Formula::Constant(c) => vec![("value".into(), *c)],
            Formula::Rational { num, den } => {
                let mut out = Vec::new();
                for (side, terms) in [("num", num), ("den", den)] {
                    for (i, t) in terms.iter().enumerate() {
                        out.push((format!("{side}[{i}].coef"), t.coef));
                        out.push((format!("{side}[{i}].shift"), t.shift));
                        out.push((format!("{side}[{i}].power"), t.power));
                    }
                }
                out
            }
            Formula::Random { rng, decay } => {
                vec![("stream".into(), rng.stream() as f64), ("decay".into(), *decay)]
            }
            Formula::Derived {
                alpha1,
                alpha2,
                rng,
                ..
            } => vec![
                ("alpha1".into(), *alpha1),
                ("alpha2".into(), *alpha2),
                ("stream".into(), rng.stream() as f64),
            ],
            Formula::Closed(_) | Formula::Function(_) => Vec::new(),
        }
    }

    fn raw(&self, n: usize) -> Result<f64, ScheduleError> {
        Ok(match &self.formula {
            Formula::Constant(c) => *c,
            Formula::Rational { num, den } => {
                let nf = n as f64;
                let top: f64 = num.iter().map(|t| t.eval(nf)).sum();
                let bottom: f64 = den.iter().map(|t| t.eval(nf)).sum();
                top / bottom
            }
            Formula::Random { rng, decay } => {
                let u = rng.uniform(n as u64);
                if *decay == 0.0 {
                    u
                } else {
                    u / (n as f64 + 1.0).powf(*decay)
                }
            }
            Formula::Derived {
                base,
                alpha1,
                alpha2,
                rng,
            } => {
                let b = base.eval(n)?;
                let threshold = comparison_threshold(*alpha1, *alpha2);
                if b > threshold {
                    return Err(ScheduleError::ConditionUnsatisfiable {
                        id: self.id.clone(),
                        index: n,
                        b,
                        threshold,
                    });
                }
                derived_term(rng.uniform(n as u64), b, *alpha1, *alpha2)
            }
            Formula::Closed(c) => c.eval(n),
            Formula::Function(f) => (f.0)(n),
        })
    }

    /// Term `n`. Fails if the formula leaves `[0, 1]` (a bad catalog entry or
    /// a bad inline definition).
    pub fn eval(&self, n: usize) -> Result<f64, ScheduleError> {
        let v = self.raw(n)?;
        if (0.0..=1.0).contains(&v) {
            Ok(v)
        } else {
            Err(ScheduleError::FormulaOutOfRange {
                id: self.id.clone(),
                index: n,
                value: v,
            })
        }
    }

    /// Terms `0..len`.
    pub fn terms(&self, len: usize) -> Result<Vec<f64>, ScheduleError> {
        (0..len).map(|n| self.eval(n)).collect()
    }

    /// Compensated sum of the first `horizon` terms.
    pub fn partial_sum(&self, horizon: usize) -> Result<f64, ScheduleError> {
        let mut acc = CompensatedSum::new();
        for n in 0..horizon {
            acc.add(self.eval(n)?);
        }
        Ok(acc.value())
    }

    /// Least-squares slope of `ln S(N_j)` against `ln N_j` over the
    /// checkpoints `N_j = 4, 8, 16, ...` up to `horizon` (and `horizon`
    /// itself). A constant schedule gives 1, a convergent one tends to 0.
    pub fn classify_empirical(&self, horizon: usize) -> Result<SeriesReport, ScheduleError> {
        if horizon < 16 {
            return Err(ScheduleError::BadParameter(format!(
                "classify_empirical needs a horizon of at least 16, got {horizon}"
            )));
        }
        let mut checkpoints = Vec::new();
        let mut c = 4usize;
        while c < horizon {
            checkpoints.push(c);
            c *= 2;
        }
        checkpoints.push(horizon);

        let mut acc = CompensatedSum::new();
        let mut next = 0;
        let mut points = Vec::with_capacity(checkpoints.len());
        for n in 0..horizon {
            acc.add(self.eval(n)?);
            if n + 1 == checkpoints[next] {
                let s = acc.value();
                if s > 0.0 {
                    points.push(((n as f64 + 1.0).ln(), s.ln()));
                }
                next += 1;
            }
        }
        let partial_sum = acc.value();
        if partial_sum == 0.0 || points.len() < 2 {
            return Err(ScheduleError::DegenerateSchedule {
                id: self.id.clone(),
            });
        }
        Ok(SeriesReport {
            schedule_id: self.id.clone(),
            horizon,
            partial_sum,
            growth_exponent_estimate: least_squares_slope(&points),
            declared_class: self.series_class,
        })
    }
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Largest `b_n` for which some `a_n <= 1` satisfies the comparison
/// condition: `(1 - a1) / (1 + a1 a2)`.
pub fn comparison_threshold(alpha1: f64, alpha2: f64) -> f64 {
    (1.0 - alpha1) / (1.0 + alpha1 * alpha2)
}

/// Smallest admissible `a_n` for the comparison condition:
/// `(1 + a2) b / ((1 - a1)(1 + a2 b))`.
pub fn comparison_offset(b: f64, alpha1: f64, alpha2: f64) -> f64 {
    (1.0 + alpha2) * b / ((1.0 - alpha1) * (1.0 + alpha2 * b))
}

/// One term of the derived comparison schedule given the uniform draw `u`.
pub fn derived_term(u: f64, b: f64, alpha1: f64, alpha2: f64) -> f64 {
    (u + comparison_offset(b, alpha1, alpha2)).min(1.0)
}

/// Builds `a_n = min{1, rand + (1 + a2) b_n / ((1 - a1)(1 + a2 b_n))}` from a
/// `b` schedule. Terms for which `b_n` exceeds [`comparison_threshold`] fail
/// with [`ScheduleError::ConditionUnsatisfiable`] when evaluated.
pub fn derived_comparison_schedule(
    b: &Schedule,
    alpha1: f64,
    alpha2: f64,
    seed: u64,
) -> Result<Schedule, ScheduleError> {
    derived_comparison_schedule_on_stream(b, alpha1, alpha2, seed, 0)
}

pub fn derived_comparison_schedule_on_stream(
    b: &Schedule,
    alpha1: f64,
    alpha2: f64,
    seed: u64,
    stream: u64,
) -> Result<Schedule, ScheduleError> {
    if !(0.0..1.0).contains(&alpha1) || !(0.0..=1.0).contains(&alpha2) {
        return Err(ScheduleError::BadParameter(format!(
            "derived schedule needs a1 in [0,1) and a2 in [0,1], got a1 = {alpha1}, a2 = {alpha2}"
        )));
    }
    Ok(Schedule::new(
        format!("derived({})", b.id()),
        Formula::Derived {
            base: Box::new(b.clone()),
            alpha1,
            alpha2,
            rng: SplitMix64::new(seed, stream),
        },
        SeriesClass::Divergent,
    ))
}

/// One documented catalog key.
#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub key: &'static str,
    pub formula: &'static str,
    pub class: SeriesClass,
}

use SeriesClass::{Convergent as C, Divergent as D};

/// Every catalog key with its formula.
pub const CATALOG: &[CatalogEntry] = &[
    e("zero", "0", C),
    e("one", "1", D),
    e("rand", "rand([0,1]), stream 0", D),
    e("eqbn-test1", "rand([0,1]), stream 1", D),
    e("eqbn-test2", "(sqrt(n+1) + sin(n+1)) / (2 sqrt(n+1) + 3)", D),
    e("eqbn-test3", "(n+2) / (3 (n+1) cbrt(n+1) + 4)", D),
    e("eqbn-test4", "(2n+3) / (3 (n+1)^3 + 1)", C),
    e("bn-fig1b-div", "(2 (n+1)^2 + 1) / (3 (n+1)^2 sqrt(n+1) + 4)", D),
    e("bn-fig1b-conv", "(n+4) / (4 (n+1)^3 + 5)", C),
    e("an-fig1b-test1", "rand([0,1]), stream 2", D),
    e("an-fig1b-test2", "sin^2(n+1) / sqrt((n+1)^2 + 10)", D),
    e(
        "an-fig1b-test3",
        "(2 exp(1 - 1/n) + 1) / (4 (n+1)^3 |sin(n+1)| + 2 exp(1 - 1/n))",
        C,
    ),
    e("anbn-test1-a", "1 / (n+1)", D),
    e("anbn-test1-b", "rand([0,1]), stream 3", D),
    e("anbn-test2-a", "1 / (n+1)^(2/3)", D),
    e("anbn-test2-b", "1 / (n+1)^(3/4)", D),
    e("anbn-test3-a", "1 / (n+1)", D),
    e("anbn-test3-b", "rand([0,1]) / (n+1), stream 4", D),
    e("anbn-test4-a", "1 / sqrt(n+1)", D),
    e("anbn-test4-b", "1 / (n+1)^2", C),
    e("na-a", "(n+3) / (2n+3)", D),
    e("na-b", "1/5", D),
    e("nb-a", "(2 (n+1)^2 + cos(n+1)) / (3 (n+1)^2 + 2)", D),
    e("nb-b", "(2 (n+1)^2 + 1) / (4 (n+1)^3 + sin(n+1))", D),
    e("na2-a", "sqrt(2 (n+1)^2 + 1) / (4 (n+1)^2 + 3)", D),
    e("na2-b", "1 / sqrt(2n+3)", D),
    e("im-test1-a", "((n+1)^2 + 1) / (3 (n+1)^2 + 5)", D),
    e("im-test1-b", "((n+1)^3 + 1) / (4 (n+1)^3 - 1)", D),
    e("im-test2-a", "1 / (2n+5)", D),
    e("im-test2-b", "sin^4(n) / ((n+1)^2 + 5)", C),
    e("im-test3-a", "|sin(n+1)| / ((n+1)^(4/3) + 2)", C),
    e("im-test3-b", "(n+2) / (3 (n+1)^2 + 4)", D),
    e("im-test4-a", "1 / (2 (n+1)^(3/2) + 5)", C),
    e("im-test4-b", "1 / ((n+1)^2 + 1)", C),
    e("cmp-test1-a", "(2n+1) / (2n+3)^2", D),
    e("cmp-test1-b", "(n+2) / (5n+9)", D),
    e("cmp-test2-a", "sqrt(2 (n+1)^2 + 1) / (4 (n+1)^3 + 5)", C),
    e("cmp-test2-b", "|sin(n+1)| / sqrt(6n+5)", D),
    e("cmp-test3-b", "(n+2) / (5n+9)", D),
    e(
        "cmp-test3-a",
        "min{1, rand + 1.2 b_n / (0.5 (1 + 0.2 b_n))} with b = cmp-test3-b, stream 5",
        D,
    ),
    e("cmp-test4-b", "|sin(n+1)| / sqrt(6n+5)", D),
    e(
        "cmp-test4-a",
        "min{1, rand + 1.2 b_n / (0.5 (1 + 0.2 b_n))} with b = cmp-test4-b, stream 6",
        D,
    ),
];

const fn e(key: &'static str, formula: &'static str, class: SeriesClass) -> CatalogEntry {
    CatalogEntry {
        key,
        formula,
        class,
    }
}

/// Catalog schedule with the default seed.
pub fn catalog(name: &str) -> Result<Schedule, ScheduleError> {
    catalog_with_seed(name, DEFAULT_SEED)
}

/// Catalog schedule; `seed` is used by random entries only.
pub fn catalog_with_seed(name: &str, seed: u64) -> Result<Schedule, ScheduleError> {
    use ClosedForm as F;
    let p = PowerTerm::new;
    let closed = |f| Formula::Closed(f);
    let rational = |num: Vec<PowerTerm>, den: Vec<PowerTerm>| Formula::Rational { num, den };
    let random = |stream, decay| Formula::Random {
        rng: SplitMix64::new(seed, stream),
        decay,
    };
    // 1 / (n+1)^k
    let inv_pow = |k: f64| rational(vec![p(1.0, 0.0, 0.0)], vec![p(1.0, 1.0, k)]);

    let (formula, approx) = match name {
        "zero" => (Formula::Constant(0.0), None),
        "one" => (Formula::Constant(1.0), None),
        "rand" => (random(0, 0.0), Some("~ 1")),
        "eqbn-test1" => (random(1, 0.0), Some("~ 1")),
        "eqbn-test2" => (closed(F::SqrtPlusSine), Some("~ 1/2")),
        "eqbn-test3" => (closed(F::CubeRootDecay), Some("~ 1/cbrt(n+1)")),
        "eqbn-test4" => (
            rational(
                vec![p(2.0, 1.5, 1.0)],
                vec![p(3.0, 1.0, 3.0), p(1.0, 0.0, 0.0)],
            ),
            Some("~ 1/(n+1)^2"),
        ),
        "bn-fig1b-div" => (closed(F::InverseSqrtDecay), Some("~ 1/sqrt(n+1)")),
        "bn-fig1b-conv" => (
            rational(
                vec![p(1.0, 4.0, 1.0)],
                vec![p(4.0, 1.0, 3.0), p(5.0, 0.0, 0.0)],
            ),
            Some("~ 1/(n+1)^2"),
        ),
        "an-fig1b-test1" => (random(2, 0.0), Some("~ 1")),
        "an-fig1b-test2" => (closed(F::SineSquaredOverM), Some("~ 1/sqrt(n+1)")),
        "an-fig1b-test3" => (closed(F::ExpOverCubicSine), Some("~ 1/(n+1)^3")),
        "anbn-test1-a" | "anbn-test3-a" => (inv_pow(1.0), None),
        "anbn-test1-b" => (random(3, 0.0), None),
        "anbn-test2-a" => (inv_pow(2.0 / 3.0), None),
        "anbn-test2-b" => (inv_pow(0.75), None),
        "anbn-test3-b" => (random(4, 1.0), None),
        "anbn-test4-a" => (inv_pow(0.5), None),
        "anbn-test4-b" => (inv_pow(2.0), None),
        "na-a" => (
            rational(vec![p(1.0, 3.0, 1.0)], vec![p(2.0, 1.5, 1.0)]),
            None,
        ),
        "na-b" => (Formula::Constant(0.2), None),
        "nb-a" => (closed(F::CosineRatio), None),
        "nb-b" => (closed(F::SineCubicRatio), None),
        "na2-a" => (closed(F::SqrtOverQuadratic), None),
        "na2-b" => (closed(F::InverseSqrtOdd), None),
        "im-test1-a" => (
            rational(
                vec![p(1.0, 1.0, 2.0), p(1.0, 0.0, 0.0)],
                vec![p(3.0, 1.0, 2.0), p(5.0, 0.0, 0.0)],
            ),
            None,
        ),
        "im-test1-b" => (
            rational(
                vec![p(1.0, 1.0, 3.0), p(1.0, 0.0, 0.0)],
                vec![p(4.0, 1.0, 3.0), p(-1.0, 0.0, 0.0)],
            ),
            None,
        ),
        "im-test2-a" => (
            rational(vec![p(1.0, 0.0, 0.0)], vec![p(2.0, 2.5, 1.0)]),
            Some("~ 1/(n+1)"),
        ),
        "im-test2-b" => (closed(F::SineFourthOverQuadratic), None),
        "im-test3-a" => (closed(F::AbsSineOverFourThirds), None),
        "im-test3-b" => (
            rational(
                vec![p(1.0, 2.0, 1.0)],
                vec![p(3.0, 1.0, 2.0), p(4.0, 0.0, 0.0)],
            ),
            None,
        ),
        "im-test4-a" => (
            rational(
                vec![p(1.0, 0.0, 0.0)],
                vec![p(2.0, 1.0, 1.5), p(5.0, 0.0, 0.0)],
            ),
            None,
        ),
        "im-test4-b" => (
            rational(
                vec![p(1.0, 0.0, 0.0)],
                vec![p(1.0, 1.0, 2.0), p(1.0, 0.0, 0.0)],
            ),
            None,
        ),
        "cmp-test1-a" => (
            rational(vec![p(2.0, 0.5, 1.0)], vec![p(4.0, 1.5, 2.0)]),
            Some("~ 1/(n+1)"),
        ),
        "cmp-test1-b" | "cmp-test3-b" => (
            rational(vec![p(1.0, 2.0, 1.0)], vec![p(5.0, 1.8, 1.0)]),
            Some("~ 1/5"),
        ),
        "cmp-test2-a" => (closed(F::SqrtOverCubic), Some("~ 1/(n+1)^2")),
        "cmp-test2-b" | "cmp-test4-b" => (closed(F::AbsSineOverSqrt), Some("~ 1/sqrt(n+1)")),
        "cmp-test3-a" | "cmp-test4-a" => {
            let (base, stream) = if name == "cmp-test3-a" {
                ("cmp-test3-b", 5)
            } else {
                ("cmp-test4-b", 6)
            };
            let b = catalog_with_seed(base, seed)?;
            let s = derived_comparison_schedule_on_stream(&b, 0.5, 0.2, seed, stream)?;
            return Ok(Schedule { id: name.into(), ..s });
        }
        other => return Err(ScheduleError::UnknownSchedule(other.to_string())),
    };
    let class = CATALOG
        .iter()
        .find(|c| c.key == name)
        .map(|c| c.class)
        .unwrap_or(SeriesClass::Unknown);
    Ok(Schedule {
        id: name.to_string(),
        formula,
        series_class: class,
        approx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eqbn_test4_first_term() {
        let s = catalog("eqbn-test4").unwrap();
        assert_eq!(s.eval(0).unwrap(), 0.75);
        assert_eq!(s.series_class(), SeriesClass::Convergent);
    }

    #[test]
    fn constants() {
        let fifth = catalog("na-b").unwrap();
        let zero = catalog("zero").unwrap();
        for n in [0, 1, 17, 1_000_000] {
            assert_eq!(fifth.eval(n).unwrap(), 0.2);
            assert_eq!(zero.eval(n).unwrap(), 0.0);
        }
        assert_eq!(zero.series_class(), SeriesClass::Convergent);
    }

    #[test]
    fn partial_sums() {
        let fifth = Schedule::constant("c", 0.2, SeriesClass::Divergent);
        assert!((fifth.partial_sum(10).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(fifth.partial_sum(0).unwrap(), 0.0);
        assert_eq!(catalog("zero").unwrap().partial_sum(1000).unwrap(), 0.0);

        // brute-force oracle: 3/4 + 5/25 + 7/82
        let s = catalog("eqbn-test4").unwrap();
        let oracle = 0.75 + 5.0 / 25.0 + 7.0 / 82.0;
        assert!((s.partial_sum(3).unwrap() - oracle).abs() < 1e-15);
    }

    #[test]
    fn catalog_examples() {
        let t2 = catalog("eqbn-test2").unwrap();
        assert_eq!(t2.series_class(), SeriesClass::Divergent);
        for n in 0..50 {
            let m = n as f64 + 1.0;
            let want = (m.sqrt() + m.sin()) / (2.0 * m.sqrt() + 3.0);
            assert_eq!(t2.eval(n).unwrap(), want);
        }
        let a = catalog("im-test2-a").unwrap();
        assert_eq!(a.series_class(), SeriesClass::Divergent);
        for n in 0..50 {
            let want = 1.0 / (2.0 * n as f64 + 5.0);
            assert!((a.eval(n).unwrap() - want).abs() <= f64::EPSILON * want);
        }
        assert!(matches!(
            catalog("nope"),
            Err(ScheduleError::UnknownSchedule(_))
        ));
    }

    #[test]
    fn eqbn_declared_classes() {
        for (k, c) in [
            ("eqbn-test1", D),
            ("eqbn-test2", D),
            ("eqbn-test3", D),
            ("eqbn-test4", C),
        ] {
            assert_eq!(catalog(k).unwrap().series_class(), c, "{k}");
        }
    }

    #[test]
    fn every_catalog_key_resolves() {
        for entry in CATALOG {
            let s = catalog(entry.key).unwrap();
            assert_eq!(s.id(), entry.key);
            assert_eq!(s.series_class(), entry.class);
        }
    }

    #[test]
    fn exp_schedule_is_finite_at_zero() {
        let s = catalog("an-fig1b-test3").unwrap();
        let want = 1.0 / (4.0 * 1f64.sin().abs());
        assert!((s.eval(0).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn classify_constant_and_convergent() {
        let half = Schedule::constant("half", 0.5, SeriesClass::Divergent);
        let r = half.classify_empirical(4096).unwrap();
        assert!((r.growth_exponent_estimate - 1.0).abs() < 0.05);
        assert_eq!(r.declared_class, SeriesClass::Divergent);

        let sq = catalog("anbn-test4-b").unwrap();
        let r = sq.classify_empirical(4096).unwrap();
        assert!(r.growth_exponent_estimate.abs() < 0.05, "{r:?}");

        assert!(matches!(
            catalog("zero").unwrap().classify_empirical(4096),
            Err(ScheduleError::DegenerateSchedule { .. })
        ));
    }

    #[test]
    fn derived_schedule_examples() {
        // b = 0: a_n is the raw uniform draw.
        let zero = catalog("zero").unwrap();
        let d = derived_comparison_schedule(&zero, 0.5, 0.2, 7).unwrap();
        let rng = SplitMix64::new(7, 0);
        for n in 0..100 {
            assert_eq!(d.eval(n).unwrap(), rng.uniform(n as u64));
        }
        // hand evaluation with the draw fixed at 0: 0.24 / 0.52
        let a = derived_term(0.0, 0.2, 0.5, 0.2);
        assert!((a - 0.24 / 0.52).abs() < 1e-15);
        assert!((a - 0.461538).abs() < 1e-6);

        // threshold 0.5 / 1.1 < 0.5
        let half = Schedule::constant("half", 0.5, SeriesClass::Divergent);
        let d = derived_comparison_schedule(&half, 0.5, 0.2, 42).unwrap();
        match d.eval(0) {
            Err(ScheduleError::ConditionUnsatisfiable {
                index, threshold, ..
            }) => {
                assert_eq!(index, 0);
                assert!((threshold - 0.5 / 1.1).abs() < 1e-15);
            }
            other => panic!("expected ConditionUnsatisfiable, got {other:?}"),
        }
        assert!(derived_comparison_schedule(&half, 1.0, 0.2, 42).is_err());
    }

    #[test]
    fn out_of_range_is_reported() {
        let s = Schedule::from_fn("bad", SeriesClass::Unknown, |n| n as f64);
        assert!(s.eval(0).is_ok());
        assert!(s.eval(1).is_ok());
        assert!(matches!(
            s.eval(2),
            Err(ScheduleError::FormulaOutOfRange { index: 2, .. })
        ));
        let nan = Schedule::from_fn("nan", SeriesClass::Unknown, |_| f64::NAN);
        assert!(nan.eval(0).is_err());
    }

    #[test]
    fn reseeding_changes_random_streams_only() {
        let r = catalog("eqbn-test1").unwrap();
        let r2 = r.reseeded(7);
        assert_eq!(r2.seed(), Some(7));
        assert!((0..100).any(|n| r.eval(n).unwrap() != r2.eval(n).unwrap()));
        let d = catalog("eqbn-test2").unwrap();
        let d2 = d.reseeded(7);
        assert_eq!(d.eval(5).unwrap(), d2.eval(5).unwrap());
        assert_eq!(d.seed(), None);
    }

    #[test]
    fn formula_kinds() {
        assert_eq!(catalog("na-b").unwrap().formula_kind(), FormulaKind::Constant);
        assert_eq!(catalog("na-a").unwrap().formula_kind(), FormulaKind::RationalOfN);
        assert_eq!(catalog("rand").unwrap().formula_kind(), FormulaKind::RandomUniform);
        assert_eq!(
            catalog("cmp-test3-a").unwrap().formula_kind(),
            FormulaKind::DerivedFromSchedule
        );
        assert_eq!(catalog("nb-a").unwrap().formula_kind(), FormulaKind::Custom);
    }
}
