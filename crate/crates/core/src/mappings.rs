//! Non-expansive self-maps of an axis-aligned box.
//!
//! A map `T` carries the constant `alpha` with `||T x - T y|| <= alpha ||x - y||`
//! (called non-expansive for any `alpha` in `[0, 1]`, contraction when `alpha < 1`).
//! Besides [`NonExpansiveMap::apply`], every rule knows its *displacement*
//! `e -> T(x* + e) - x*` about an anchor point. The iteration module advances
//! offsets from the fixed point with it, which keeps errors far below `1e-16`
//! representable.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use thiserror::Error;

use crate::numerics::SplitMix64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MappingError {
    #[error("map `{map}`: point {point:?} lies outside the domain")]
    OutOfDomain { map: String, point: Vec<f64> },
    #[error("domain [{lower:?}, {upper:?}] is not symmetric about x* = {x_star:?}")]
    AsymmetricDomain {
        lower: Vec<f64>,
        upper: Vec<f64>,
        x_star: Vec<f64>,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("alpha = {0} is outside [0, 1]")]
    BadAlpha(f64),
    #[error("invalid domain: {0}")]
    BadDomain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NormKind {
    #[default]
    Euclidean,
    Max,
    Sum,
}

impl NormKind {
    pub fn norm(self, v: &DVector<f64>) -> f64 {
        match self {
            NormKind::Euclidean => {
                if v.len() == 1 {
                    v[0].abs()
                } else {
                    v.norm()
                }
            }
            NormKind::Max => v.amax(),
            NormKind::Sum => v.iter().map(|x| x.abs()).sum(),
        }
    }
}

/// Axis-aligned box `[lower, upper]` with a norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
    pub norm_kind: NormKind,
}

impl Domain {
    pub fn new(lower: DVector<f64>, upper: DVector<f64>, norm_kind: NormKind) -> Result<Self, MappingError> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(MappingError::BadDomain(format!(
                "bounds of length {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| !(l <= u)) {
            return Err(MappingError::BadDomain("lower > upper".into()));
        }
        Ok(Self {
            lower,
            upper,
            norm_kind,
        })
    }

    /// One-dimensional interval `[lo, hi]`.
    pub fn interval(lo: f64, hi: f64) -> Result<Self, MappingError> {
        Self::new(DVector::from_element(1, lo), DVector::from_element(1, hi), NormKind::Euclidean)
    }

    /// `[x* - r, x* + r]` componentwise.
    pub fn symmetric(x_star: &DVector<f64>, r: f64) -> Self {
        Self {
            lower: x_star.add_scalar(-r),
            upper: x_star.add_scalar(r),
            norm_kind: NormKind::Euclidean,
        }
    }

    /// The interval `[1/4, 3]` used by the paper's maps.
    pub fn paper() -> Self {
        Self::interval(0.25, 3.0).expect("valid interval")
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn norm(&self, v: &DVector<f64>) -> f64 {
        self.norm_kind.norm(v)
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        x.len() == self.dimension() && self.escape(x) <= 0.0
    }

    /// Largest signed componentwise distance outside the box (negative inside).
    pub fn escape(&self, x: &DVector<f64>) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for i in 0..x.len() {
            let d = (self.lower[i] - x[i]).max(x[i] - self.upper[i]);
            if d.is_nan() {
                return f64::INFINITY;
            }
            worst = worst.max(d);
        }
        worst
    }

    pub fn is_symmetric_about(&self, x_star: &DVector<f64>) -> bool {
        x_star.len() == self.dimension()
            && (0..self.dimension()).all(|i| {
                let lo = x_star[i] - self.lower[i];
                let hi = self.upper[i] - x_star[i];
                lo >= 0.0 && (lo - hi).abs() <= 4.0 * f64::EPSILON * lo.max(hi).max(x_star[i].abs())
            })
    }

    pub fn diameter(&self) -> f64 {
        self.norm(&(&self.upper - &self.lower))
    }
}

/// `x -> T(x)` for custom rules.
#[derive(Clone)]
pub struct MapFn(Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>);

impl MapFn {
    pub fn new(f: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }
}

impl fmt::Debug for MapFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("MapFn(..)")
    }
}

#[derive(Debug, Clone)]
pub enum MapRule {
    /// `alpha x + (1 - alpha) x*`
    AffineTowardFp { x_star: DVector<f64> },
    /// `-alpha x + (1 + alpha) x*`
    AffineReflectedFp { x_star: DVector<f64> },
    /// `sqrt(alpha1 x + 1 - alpha1)` componentwise; fixed point 1.
    PaperSqrt { alpha1: f64 },
    /// `alpha2 sin(x - 1) + 1` componentwise; fixed point 1.
    PaperSine { alpha2: f64 },
    /// Arbitrary rule. `gain` is the scalar Jacobian at the fixed point, if
    /// known; it lets long runs continue below `1e-300`.
    Custom { f: MapFn, gain: Option<f64> },
}

#[derive(Debug, Clone)]
pub struct NonExpansiveMap {
    pub id: String,
    pub alpha: f64,
    pub domain: Domain,
    pub rule: MapRule,
}

/// Result of [`verify_nonexpansive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonExpansiveReport {
    pub max_ratio: f64,
    pub max_escape: f64,
    pub pairs_tested: usize,
    pub passed: bool,
}

impl NonExpansiveMap {
    pub fn new(id: impl Into<String>, alpha: f64, domain: Domain, rule: MapRule) -> Result<Self, MappingError> {
        check_alpha(alpha)?;
        Ok(Self {
            id: id.into(),
            alpha,
            domain,
            rule,
        })
    }

    /// `sqrt(alpha1 x + 1 - alpha1)` on `[1/4, 3]`.
    pub fn paper_sqrt(alpha1: f64) -> Result<Self, MappingError> {
        Self::new("paper-T1", alpha1, Domain::paper(), MapRule::PaperSqrt { alpha1 })
    }

    /// `alpha2 sin(x - 1) + 1` on `[1/4, 3]`.
    pub fn paper_sine(alpha2: f64) -> Result<Self, MappingError> {
        Self::new("paper-T2", alpha2, Domain::paper(), MapRule::PaperSine { alpha2 })
    }

    pub fn custom(
        id: impl Into<String>,
        alpha: f64,
        domain: Domain,
        gain: Option<f64>,
        f: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Result<Self, MappingError> {
        Self::new(
            id,
            alpha,
            domain,
            MapRule::Custom {
                f: MapFn::new(f),
                gain,
            },
        )
    }

    fn check_input(&self, x: &DVector<f64>) -> Result<(), MappingError> {
        if x.len() != self.domain.dimension() {
            return Err(MappingError::DimensionMismatch {
                expected: self.domain.dimension(),
                got: x.len(),
            });
        }
        if !self.domain.contains(x) {
            return Err(MappingError::OutOfDomain {
                map: self.id.clone(),
                point: x.iter().copied().collect(),
            });
        }
        Ok(())
    }

    fn eval_unchecked(&self, x: &DVector<f64>) -> DVector<f64> {
        let a = self.alpha;
        match &self.rule {
            MapRule::AffineTowardFp { x_star } => x * a + x_star * (1.0 - a),
            MapRule::AffineReflectedFp { x_star } => x * -a + x_star * (1.0 + a),
            MapRule::PaperSqrt { alpha1 } => x.map(|v| (alpha1 * v + 1.0 - alpha1).sqrt()),
            MapRule::PaperSine { alpha2 } => x.map(|v| alpha2 * (v - 1.0).sin() + 1.0),
            MapRule::Custom { f, .. } => (f.0)(x),
        }
    }

    /// `T(x)`; `x` must lie in the domain.
    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>, MappingError> {
        self.check_input(x)?;
        Ok(self.eval_unchecked(x))
    }

    /// `T(anchor + e) - anchor`, with cancellation-free formulas for the
    /// built-in rules when `anchor` is their fixed point.
    pub fn displacement(&self, anchor: &DVector<f64>, e: &DVector<f64>) -> DVector<f64> {
        let a = self.alpha;
        match &self.rule {
            MapRule::AffineTowardFp { x_star } if x_star == anchor => e * a,
            MapRule::AffineReflectedFp { x_star } if x_star == anchor => e * -a,
            MapRule::PaperSqrt { alpha1 } if anchor.iter().all(|&v| v == 1.0) => {
                e.map(|v| alpha1 * v / ((1.0 + alpha1 * v).sqrt() + 1.0))
            }
            MapRule::PaperSine { alpha2 } if anchor.iter().all(|&v| v == 1.0) => {
                e.map(|v| alpha2 * v.sin())
            }
            _ => self.eval_unchecked(&(anchor + e)) - anchor,
        }
    }

    /// Scalar derivative of the displacement at `e = 0`, when known.
    pub fn gain_at_fixed_point(&self) -> Option<f64> {
        match &self.rule {
            MapRule::AffineTowardFp { .. } => Some(self.alpha),
            MapRule::AffineReflectedFp { .. } => Some(-self.alpha),
            MapRule::PaperSqrt { alpha1 } => Some(alpha1 / 2.0),
            MapRule::PaperSine { alpha2 } => Some(*alpha2),
            MapRule::Custom { gain, .. } => *gain,
        }
    }

    /// `||T(x) - x||`.
    pub fn fixed_point_residual(&self, x: &DVector<f64>) -> Result<f64, MappingError> {
        let tx = self.apply(x)?;
        Ok(self.domain.norm(&(tx - x)))
    }
}

fn check_alpha(alpha: f64) -> Result<(), MappingError> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(MappingError::BadAlpha(alpha))
    }
}

/// `T(x) = alpha x + (1 - alpha) x*`, attaining the upper error bound.
pub fn make_extremal_upper(
    alpha: f64,
    x_star: &DVector<f64>,
    domain: Domain,
) -> Result<NonExpansiveMap, MappingError> {
    if !domain.contains(x_star) {
        return Err(MappingError::OutOfDomain {
            map: "extremal-upper".into(),
            point: x_star.iter().copied().collect(),
        });
    }
    NonExpansiveMap::new(
        "extremal-upper",
        alpha,
        domain,
        MapRule::AffineTowardFp {
            x_star: x_star.clone(),
        },
    )
}

/// `T(x) = -alpha x + (1 + alpha) x*`, attaining the lower error bound. The
/// domain must be symmetric about `x*`, otherwise `T` would leave it.
pub fn make_extremal_lower(
    alpha: f64,
    x_star: &DVector<f64>,
    domain: Domain,
) -> Result<NonExpansiveMap, MappingError> {
    if !domain.is_symmetric_about(x_star) {
        return Err(MappingError::AsymmetricDomain {
            lower: domain.lower.iter().copied().collect(),
            upper: domain.upper.iter().copied().collect(),
            x_star: x_star.iter().copied().collect(),
        });
    }
    NonExpansiveMap::new(
        "extremal-lower",
        alpha,
        domain,
        MapRule::AffineReflectedFp {
            x_star: x_star.clone(),
        },
    )
}

/// Samples `sample_count` pairs uniformly from the domain and reports the
/// largest Lipschitz ratio and the largest escape of `T(x)` from the domain.
/// Pairs closer than `1e-3` of the domain diameter are skipped, where
/// rounding in `T(x) - T(y)` dominates the ratio.
pub fn verify_nonexpansive(map: &NonExpansiveMap, sample_count: usize, seed: u64) -> NonExpansiveReport {
    let d = map.domain.dimension();
    let min_sep = 1e-3 * map.domain.diameter();
    let rng = SplitMix64::new(seed, 0x6d61_7073);
    let mut counter = 0u64;
    let mut draw = || {
        let p = DVector::from_fn(d, |i, _| {
            let u = rng.uniform(counter + i as u64);
            map.domain.lower[i] + u * (map.domain.upper[i] - map.domain.lower[i])
        });
        counter += d as u64;
        p
    };
    let mut max_ratio: f64 = 0.0;
    let mut max_escape = f64::NEG_INFINITY;
    let mut tested = 0;
    for _ in 0..sample_count {
        let x = draw();
        let y = draw();
        let tx = map.eval_unchecked(&x);
        let ty = map.eval_unchecked(&y);
        max_escape = max_escape.max(map.domain.escape(&tx)).max(map.domain.escape(&ty));
        let dxy = map.domain.norm(&(&x - &y));
        if dxy <= min_sep {
            continue;
        }
        tested += 1;
        max_ratio = max_ratio.max(map.domain.norm(&(tx - ty)) / dxy);
    }
    let passed = max_ratio <= map.alpha * (1.0 + 1e-12) && max_escape <= 0.0;
    NonExpansiveReport {
        max_ratio,
        max_escape,
        pairs_tested: tested,
        passed,
    }
}

/// Two maps with a known common fixed point.
#[derive(Debug, Clone)]
pub struct MapPair {
    pub t1: NonExpansiveMap,
    pub t2: NonExpansiveMap,
    pub common_fixed_point: DVector<f64>,
}

impl MapPair {
    pub fn new(t1: NonExpansiveMap, t2: NonExpansiveMap, x_star: DVector<f64>) -> Result<Self, MappingError> {
        if t1.domain.dimension() != x_star.len() || t2.domain.dimension() != x_star.len() {
            return Err(MappingError::DimensionMismatch {
                expected: x_star.len(),
                got: t1.domain.dimension(),
            });
        }
        Ok(Self {
            t1,
            t2,
            common_fixed_point: x_star,
        })
    }

    /// `T1 = sqrt(alpha1 x + 1 - alpha1)`, `T2 = alpha2 sin(x - 1) + 1` on
    /// `[1/4, 3]`, `x* = 1`.
    pub fn paper(alpha1: f64, alpha2: f64) -> Result<Self, MappingError> {
        Self::new(
            NonExpansiveMap::paper_sqrt(alpha1)?,
            NonExpansiveMap::paper_sine(alpha2)?,
            DVector::from_element(1, 1.0),
        )
    }

    /// Both maps `alpha_i x + (1 - alpha_i) x*`.
    pub fn extremal_upper(alpha1: f64, alpha2: f64, x_star: DVector<f64>, domain: Domain) -> Result<Self, MappingError> {
        let t1 = make_extremal_upper(alpha1, &x_star, domain.clone())?;
        let t2 = make_extremal_upper(alpha2, &x_star, domain)?;
        Self::new(t1, t2, x_star)
    }

    /// `T1` toward `x*`, `T2` reflected through `x*`: the pair attaining the
    /// Ishikawa lower bound.
    pub fn extremal_lower_ishikawa(alpha1: f64, alpha2: f64, x_star: DVector<f64>, domain: Domain) -> Result<Self, MappingError> {
        let t1 = make_extremal_upper(alpha1, &x_star, domain.clone())?;
        let t2 = make_extremal_lower(alpha2, &x_star, domain)?;
        Self::new(t1, t2, x_star)
    }

    /// Both maps reflected through `x*`: the pair attaining the modified
    /// Ishikawa lower bound.
    pub fn extremal_lower_modified(alpha1: f64, alpha2: f64, x_star: DVector<f64>, domain: Domain) -> Result<Self, MappingError> {
        let t1 = make_extremal_lower(alpha1, &x_star, domain.clone())?;
        let t2 = make_extremal_lower(alpha2, &x_star, domain)?;
        Self::new(t1, t2, x_star)
    }

    pub fn domain(&self) -> &Domain {
        &self.t1.domain
    }

    pub fn alphas(&self) -> (f64, f64) {
        (self.t1.alpha, self.t2.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    #[test]
    fn apply_examples() {
        let t1 = NonExpansiveMap::paper_sqrt(0.5).unwrap();
        assert!((t1.apply(&v(2.0)).unwrap()[0] - 1.2247448714).abs() < 1e-10);
        let t2 = NonExpansiveMap::paper_sine(0.2).unwrap();
        assert_eq!(t2.apply(&v(1.0)).unwrap()[0], 1.0);
        let aff = make_extremal_upper(0.3, &v(1.0), Domain::paper()).unwrap();
        assert!((aff.apply(&v(2.0)).unwrap()[0] - 1.3).abs() < 1e-15);
        assert!(matches!(
            t1.apply(&v(3.5)),
            Err(MappingError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn extremal_upper_examples() {
        let d = Domain::interval(-5.0, 5.0).unwrap();
        let zero = make_extremal_upper(0.0, &v(1.0), d.clone()).unwrap();
        assert_eq!(zero.apply(&v(4.0)).unwrap()[0], 1.0);
        let id = make_extremal_upper(1.0, &v(1.0), d.clone()).unwrap();
        assert_eq!(id.apply(&v(-2.5)).unwrap()[0], -2.5);
        let t = make_extremal_upper(0.2, &v(1.0), d).unwrap();
        assert!((t.apply(&v(3.0)).unwrap()[0] - 1.4).abs() < 1e-15);
    }

    #[test]
    fn extremal_lower_examples() {
        let d = Domain::symmetric(&v(0.0), 1.0);
        let zero = make_extremal_lower(0.0, &v(0.0), d.clone()).unwrap();
        assert_eq!(zero.apply(&v(0.7)).unwrap()[0], 0.0);
        let t = make_extremal_lower(0.5, &v(0.0), d).unwrap();
        assert_eq!(t.apply(&v(1.0)).unwrap()[0], -0.5);
        assert!(matches!(
            make_extremal_lower(1.0, &v(1.0), Domain::paper()),
            Err(MappingError::AsymmetricDomain { .. })
        ));
    }

    #[test]
    fn verify_examples() {
        let r = verify_nonexpansive(&NonExpansiveMap::paper_sqrt(0.5).unwrap(), 10_000, 1);
        assert!(r.passed, "{r:?}");
        let r = verify_nonexpansive(&NonExpansiveMap::paper_sine(1.0).unwrap(), 10_000, 1);
        assert!(r.passed, "{r:?}");
        let id = make_extremal_upper(1.0, &v(1.0), Domain::paper()).unwrap();
        let r = verify_nonexpansive(&id, 1000, 1);
        assert_eq!(r.max_ratio, 1.0);
        assert!(r.passed);

        // x -> 2x - 1 expands distances
        let bad = NonExpansiveMap::custom("expand", 1.0, Domain::interval(0.0, 1.0).unwrap(), None, |x| {
            x * 2.0 - DVector::from_element(1, 0.5)
        })
        .unwrap();
        assert!(!verify_nonexpansive(&bad, 100, 1).passed);
    }

    #[test]
    fn residual_examples() {
        let t1 = NonExpansiveMap::paper_sqrt(0.5).unwrap();
        assert_eq!(t1.fixed_point_residual(&v(1.0)).unwrap(), 0.0);
        let aff = make_extremal_upper(0.3, &v(1.0), Domain::paper()).unwrap();
        assert_eq!(aff.fixed_point_residual(&v(1.0)).unwrap(), 0.0);
        let t2 = NonExpansiveMap::paper_sine(0.2).unwrap();
        let r = t2.fixed_point_residual(&v(2.0)).unwrap();
        assert!((r - 0.8317058).abs() < 1e-7);
        assert!(t2.fixed_point_residual(&v(0.0)).is_err());
    }

    #[test]
    fn displacement_matches_apply() {
        let one = v(1.0);
        for m in [
            NonExpansiveMap::paper_sqrt(0.5).unwrap(),
            NonExpansiveMap::paper_sine(0.2).unwrap(),
        ] {
            for x in [0.25, 0.6, 1.3, 2.9] {
                let e = v(x - 1.0);
                let d = m.displacement(&one, &e)[0];
                let direct = m.apply(&v(x)).unwrap()[0] - 1.0;
                assert!((d - direct).abs() < 4e-16, "{} at {x}", m.id);
            }
            let tiny = v(1e-200);
            let g = m.gain_at_fixed_point().unwrap();
            assert_eq!(m.displacement(&one, &tiny)[0], g * 1e-200);
        }
    }

    #[test]
    fn multidimensional_norms() {
        let lo = DVector::from_vec(vec![-1.0, -1.0]);
        let hi = DVector::from_vec(vec![1.0, 1.0]);
        let x = DVector::from_vec(vec![3.0, -4.0]);
        for (k, want) in [(NormKind::Euclidean, 5.0), (NormKind::Max, 4.0), (NormKind::Sum, 7.0)] {
            let d = Domain::new(lo.clone(), hi.clone(), k).unwrap();
            assert_eq!(d.norm(&x), want);
        }
        let d = Domain::new(lo, hi, NormKind::Max).unwrap();
        let x_star = DVector::zeros(2);
        let t = make_extremal_lower(0.5, &x_star, d).unwrap();
        assert!(verify_nonexpansive(&t, 1000, 3).passed);
    }
}
