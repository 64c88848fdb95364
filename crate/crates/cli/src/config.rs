//! TOML run configuration.
//!
//! ```toml
//! scheme = "ishikawa"
//! pair = "paper"
//! alpha1 = 0.5
//! alpha2 = 0.2
//! schedule_a = "na-a"
//! schedule_b = { kind = "constant", value = 0.2 }
//! x0 = 2.0
//! n = 1000
//!
//! [[outputs]]
//! kind = "trace"
//! path = "trace.csv"
//! ```

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use oeb_core::mappings::{make_extremal_lower, make_extremal_upper, Domain, MapPair, NonExpansiveMap, NormKind};
use oeb_core::numerics::DEFAULT_SEED;
use oeb_core::schedules::{catalog_with_seed, derived_comparison_schedule_on_stream, PowerTerm, Schedule, SeriesClass};
use oeb_core::SchemeId;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config field `{field}`: {message}")]
    Field { field: String, message: String },
}

impl ConfigError {
    pub fn field(field: impl Into<String>, message: impl ToString) -> Self {
        ConfigError::Field {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

/// A point given either as a scalar (dimension 1) or an array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorSpec {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl VectorSpec {
    pub fn to_vector(&self) -> DVector<f64> {
        match self {
            VectorSpec::Scalar(x) => DVector::from_element(1, *x),
            VectorSpec::Vector(v) => DVector::from_vec(v.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub lower: VectorSpec,
    pub upper: VectorSpec,
    /// `euclidean` (default), `max` or `sum`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<String>,
}

impl DomainSpec {
    fn build(&self, field: &str) -> Result<Domain, ConfigError> {
        let norm = match self.norm.as_deref() {
            None | Some("euclidean") => NormKind::Euclidean,
            Some("max") => NormKind::Max,
            Some("sum") => NormKind::Sum,
            Some(other) => return Err(ConfigError::field(format!("{field}.norm"), format!("unknown norm `{other}`"))),
        };
        Domain::new(self.lower.to_vector(), self.upper.to_vector(), norm).map_err(|e| ConfigError::field(field, e))
    }
}

/// A map: one of [`MAP_KEYS`] or an inline table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapSpec {
    Key(String),
    Inline(InlineMap),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineMap {
    /// A map key used as the rule.
    pub rule: String,
    /// Defaults to `alpha1` for `t1` and `alpha2` for `t2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
}

/// A map pair: one of [`PAIR_KEYS`] or an inline table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PairSpec {
    Key(String),
    Inline(InlinePair),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlinePair {
    pub t1: MapSpec,
    pub t2: MapSpec,
    /// Defaults to the all-ones vector of the dimension of `x0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_star: Option<VectorSpec>,
    /// Defaults to `[1/4, 3]` when both maps are paper maps and to the box of
    /// radius 1 around `x_star` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
}

/// A schedule: a catalog key or an inline table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScheduleSpec {
    Key(String),
    Inline(InlineSchedule),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InlineSchedule {
    Constant {
        value: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        series_class: Option<String>,
    },
    /// `sum num / sum den`, each term `[coef, shift, power]` meaning
    /// `coef (n + shift)^power`.
    Rational {
        num: Vec<[f64; 3]>,
        den: Vec<[f64; 3]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        series_class: Option<String>,
    },
    /// `rand([0,1]) / (n+1)^decay`.
    Random {
        #[serde(default)]
        stream: u64,
        #[serde(default)]
        decay: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// `min{1, rand + (1 + a2) b_n / ((1 - a1)(1 + a2 b_n))}` built on `base`.
    Derived {
        base: Box<ScheduleSpec>,
        #[serde(default)]
        stream: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// A catalog key with its own seed.
    Catalog { key: String, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Trace,
    Bounds,
    Rate,
    Compare,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub kind: OutputKind,
    /// Relative paths are taken from the config file's directory.
    pub path: PathBuf,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_a() -> ScheduleSpec {
    ScheduleSpec::Key("zero".into())
}

fn default_b() -> ScheduleSpec {
    ScheduleSpec::Key("one".into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// `picard`, `mann`, `ishikawa` or `modified-ishikawa`.
    pub scheme: String,
    pub alpha1: f64,
    pub alpha2: f64,
    pub x0: VectorSpec,
    #[serde(alias = "N")]
    pub n: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Stop once `Err_n` drops below this; 0 runs all `n` steps.
    #[serde(default)]
    pub floor: f64,
    pub pair: PairSpec,
    #[serde(default = "default_a")]
    pub schedule_a: ScheduleSpec,
    #[serde(default = "default_b")]
    pub schedule_b: ScheduleSpec,
    #[serde(default)]
    pub outputs: Vec<OutputSpec>,
}

/// Map keys accepted by `t1`/`t2`.
pub const MAP_KEYS: &[(&str, &str)] = &[
    ("paper-T1", "sqrt(alpha x + 1 - alpha) on [1/4, 3], x* = 1"),
    ("paper-T2", "alpha sin(x - 1) + 1 on [1/4, 3], x* = 1"),
    ("extremal-upper", "alpha x + (1 - alpha) x*"),
    ("extremal-lower", "-alpha x + (1 + alpha) x*, domain symmetric about x*"),
];

/// Pair keys accepted by `pair`.
pub const PAIR_KEYS: &[(&str, &str)] = &[
    ("paper", "T1 = paper-T1, T2 = paper-T2"),
    ("extremal-upper", "both extremal-upper, x* = 1 on [0, 2]; attains the upper bounds"),
    ("extremal-lower", "T1 extremal-upper, T2 extremal-lower, x* = 1 on [0, 2]; attains the Ishikawa lower bound"),
    ("extremal-lower-im", "both extremal-lower, x* = 1 on [0, 2]; attains the modified Ishikawa lower bound"),
];

/// A validated configuration ready to run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scheme: SchemeId,
    pub pair: MapPair,
    pub alpha1: f64,
    pub alpha2: f64,
    pub a: Schedule,
    pub b: Schedule,
    pub x0: DVector<f64>,
    pub n: usize,
    pub floor: f64,
    pub seed: u64,
    pub outputs: Vec<(OutputKind, PathBuf)>,
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::new(s);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path.is_empty() || path == "." { "<root>".to_string() } else { path };
            ConfigError::field(field, e.into_inner().message().trim())
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run configs always serialize")
    }

    /// Builds maps and schedules and checks the invariants. `seed_override`
    /// replaces the top-level seed; explicit inline seeds are kept.
    pub fn resolve(&self, seed_override: Option<u64>, base_dir: &Path) -> Result<Resolved, ConfigError> {
        let scheme = SchemeId::parse(&self.scheme)
            .ok_or_else(|| ConfigError::field("scheme", format!("unknown scheme `{}`", self.scheme)))?;
        for (name, v) in [("alpha1", self.alpha1), ("alpha2", self.alpha2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError::field(name, format!("{v} is outside [0, 1]")));
            }
        }
        if self.n < 1 {
            return Err(ConfigError::field("n", "must be at least 1"));
        }
        if !(self.floor >= 0.0 && self.floor.is_finite()) {
            return Err(ConfigError::field("floor", format!("{} is not a finite nonnegative number", self.floor)));
        }
        let seed = seed_override.unwrap_or(self.seed);
        let x0 = self.x0.to_vector();
        let pair = build_pair(&self.pair, self.alpha1, self.alpha2, &x0)?;
        let domain = pair.domain();
        if x0.len() != domain.dimension() {
            return Err(ConfigError::field(
                "x0",
                format!("dimension {} does not match the domain dimension {}", x0.len(), domain.dimension()),
            ));
        }
        if !domain.contains(&x0) {
            return Err(ConfigError::field(
                "x0",
                format!(
                    "{:?} is outside the domain [{:?}, {:?}]",
                    x0.as_slice(),
                    domain.lower.as_slice(),
                    domain.upper.as_slice()
                ),
            ));
        }
        let a = build_schedule(&self.schedule_a, "schedule_a", seed, self.alpha1, self.alpha2)?;
        let b = build_schedule(&self.schedule_b, "schedule_b", seed, self.alpha1, self.alpha2)?;
        let outputs = self
            .outputs
            .iter()
            .map(|o| (o.kind, if o.path.is_absolute() { o.path.clone() } else { base_dir.join(&o.path) }))
            .collect();
        Ok(Resolved {
            scheme,
            pair,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            a,
            b,
            x0,
            n: self.n,
            floor: self.floor,
            seed,
            outputs,
        })
    }
}

fn parse_class(field: &str, s: &Option<String>) -> Result<Option<SeriesClass>, ConfigError> {
    match s.as_deref() {
        None => Ok(None),
        Some("divergent") => Ok(Some(SeriesClass::Divergent)),
        Some("convergent") => Ok(Some(SeriesClass::Convergent)),
        Some("unknown") => Ok(Some(SeriesClass::Unknown)),
        Some(other) => Err(ConfigError::field(
            format!("{field}.series_class"),
            format!("`{other}` is not divergent, convergent or unknown"),
        )),
    }
}

fn build_schedule(spec: &ScheduleSpec, field: &str, seed: u64, alpha1: f64, alpha2: f64) -> Result<Schedule, ConfigError> {
    let err = |e: oeb_core::schedules::ScheduleError| ConfigError::field(field, e);
    let s = match spec {
        ScheduleSpec::Key(key) => catalog_with_seed(key, seed).map_err(err)?,
        ScheduleSpec::Inline(inline) => match inline {
            InlineSchedule::Constant { value, series_class } => {
                let class = parse_class(field, series_class)?
                    .unwrap_or(if *value > 0.0 { SeriesClass::Divergent } else { SeriesClass::Convergent });
                Schedule::constant(format!("constant({value})"), *value, class)
            }
            InlineSchedule::Rational { num, den, series_class } => {
                let terms = |v: &[[f64; 3]]| v.iter().map(|t| PowerTerm::new(t[0], t[1], t[2])).collect::<Vec<_>>();
                if den.is_empty() {
                    return Err(ConfigError::field(format!("{field}.den"), "needs at least one term"));
                }
                let class = parse_class(field, series_class)?.unwrap_or(SeriesClass::Unknown);
                Schedule::rational("rational", terms(num), terms(den), class)
            }
            InlineSchedule::Random { stream, decay, seed: own } => {
                let rng = oeb_core::numerics::SplitMix64::new(own.unwrap_or(seed), *stream);
                let class = if *decay <= 1.0 { SeriesClass::Divergent } else { SeriesClass::Convergent };
                Schedule::new("random", oeb_core::schedules::Formula::Random { rng, decay: *decay }, class)
            }
            InlineSchedule::Derived { base, stream, seed: own } => {
                let base = build_schedule(base, &format!("{field}.base"), seed, alpha1, alpha2)?;
                derived_comparison_schedule_on_stream(&base, alpha1, alpha2, own.unwrap_or(seed), *stream).map_err(err)?
            }
            InlineSchedule::Catalog { key, seed } => catalog_with_seed(key, *seed).map_err(err)?,
        },
    };
    // an early out-of-range term is reported as a config error
    s.eval(0).map_err(err)?;
    Ok(s)
}

fn build_map(
    spec: &MapSpec,
    field: &str,
    alpha: f64,
    x_star: &DVector<f64>,
    domain: &Domain,
) -> Result<NonExpansiveMap, ConfigError> {
    let (rule, alpha, domain) = match spec {
        MapSpec::Key(k) => (k.as_str(), alpha, domain.clone()),
        MapSpec::Inline(m) => (
            m.rule.as_str(),
            m.alpha.unwrap_or(alpha),
            match &m.domain {
                Some(d) => d.build(&format!("{field}.domain"))?,
                None => domain.clone(),
            },
        ),
    };
    let err = |e: oeb_core::mappings::MappingError| ConfigError::field(field, e);
    match rule {
        "paper-T1" => NonExpansiveMap::paper_sqrt(alpha).map_err(err),
        "paper-T2" => NonExpansiveMap::paper_sine(alpha).map_err(err),
        "extremal-upper" => make_extremal_upper(alpha, x_star, domain).map_err(err),
        "extremal-lower" => make_extremal_lower(alpha, x_star, domain).map_err(err),
        other => Err(ConfigError::field(field, format!("unknown map `{other}`"))),
    }
}

fn is_paper_map(spec: &MapSpec) -> bool {
    let rule = match spec {
        MapSpec::Key(k) => k,
        MapSpec::Inline(m) => &m.rule,
    };
    rule.starts_with("paper-")
}

fn build_pair(spec: &PairSpec, alpha1: f64, alpha2: f64, x0: &DVector<f64>) -> Result<MapPair, ConfigError> {
    let inline = match spec {
        PairSpec::Key(key) => {
            let map = |s: &str| MapSpec::Key(s.to_string());
            let (t1, t2) = match key.as_str() {
                "paper" => (map("paper-T1"), map("paper-T2")),
                "extremal-upper" => (map("extremal-upper"), map("extremal-upper")),
                "extremal-lower" => (map("extremal-upper"), map("extremal-lower")),
                "extremal-lower-im" => (map("extremal-lower"), map("extremal-lower")),
                other => return Err(ConfigError::field("pair", format!("unknown pair `{other}`"))),
            };
            InlinePair {
                t1,
                t2,
                x_star: None,
                domain: None,
            }
        }
        PairSpec::Inline(p) => p.clone(),
    };
    let x_star = match &inline.x_star {
        Some(v) => v.to_vector(),
        None => DVector::from_element(x0.len().max(1), 1.0),
    };
    let domain = match &inline.domain {
        Some(d) => d.build("pair.domain")?,
        None if is_paper_map(&inline.t1) && is_paper_map(&inline.t2) => Domain::paper(),
        None => Domain::symmetric(&x_star, 1.0),
    };
    let t1 = build_map(&inline.t1, "pair.t1", alpha1, &x_star, &domain)?;
    let t2 = build_map(&inline.t2, "pair.t2", alpha2, &x_star, &domain)?;
    for (name, t) in [("pair.t1", &t1), ("pair.t2", &t2)] {
        if t.domain != t1.domain {
            return Err(ConfigError::field(name, "t1 and t2 must share a domain"));
        }
        let r = t.fixed_point_residual(&x_star).map_err(|e| ConfigError::field(name, e))?;
        if r > 1e-12 {
            return Err(ConfigError::field(
                "pair.x_star",
                format!("{:?} is not fixed by {} (residual {r:e})", x_star.as_slice(), t.id),
            ));
        }
    }
    MapPair::new(t1, t2, x_star).map_err(|e| ConfigError::field("pair", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
scheme = "picard"
pair = "extremal-upper"
alpha1 = 0.5
alpha2 = 0.5
x0 = 2.0
n = 10
"#;

    #[test]
    fn minimal_config_resolves() {
        let c = RunConfig::from_toml_str(MINIMAL).unwrap();
        let r = c.resolve(None, Path::new(".")).unwrap();
        assert_eq!(r.scheme, SchemeId::Picard);
        assert_eq!(r.seed, 42);
        assert_eq!(r.pair.common_fixed_point[0], 1.0);
    }

    #[test]
    fn errors_name_the_field() {
        let bad = MINIMAL.replace("n = 10", "n = \"ten\"");
        match RunConfig::from_toml_str(&bad) {
            Err(ConfigError::Field { field, .. }) => assert_eq!(field, "n"),
            other => panic!("{other:?}"),
        }
        let c = RunConfig::from_toml_str(&MINIMAL.replace("x0 = 2.0", "x0 = 5.0")).unwrap();
        match c.resolve(None, Path::new(".")) {
            Err(ConfigError::Field { field, .. }) => assert_eq!(field, "x0"),
            other => panic!("{other:?}"),
        }
        let c = RunConfig::from_toml_str(&MINIMAL.replace("picard", "newton")).unwrap();
        assert!(matches!(c.resolve(None, Path::new(".")), Err(ConfigError::Field { field, .. }) if field == "scheme"));
        let c = RunConfig::from_toml_str(&format!("{MINIMAL}schedule_b = \"nope\"\n")).unwrap();
        assert!(matches!(c.resolve(None, Path::new(".")), Err(ConfigError::Field { field, .. }) if field == "schedule_b"));
    }

    #[test]
    fn inline_specs_round_trip() {
        let text = r#"
scheme = "modified-ishikawa"
alpha1 = 0.5
alpha2 = 0.2
x0 = [1.5]
N = 50
seed = 7
floor = 1e-12
schedule_a = { kind = "derived", base = "cmp-test3-b", stream = 9 }
schedule_b = { kind = "rational", num = [[1.0, 2.0, 1.0]], den = [[5.0, 0.0, 1.0], [9.0, 0.0, 0.0]], series_class = "divergent" }

[pair]
t1 = "extremal-upper"
t2 = { rule = "extremal-lower", alpha = 0.1 }
x_star = 1.0
domain = { lower = 0.0, upper = 2.0, norm = "max" }

[[outputs]]
kind = "trace"
path = "t.csv"

[[outputs]]
kind = "compare"
path = "c.csv"
"#;
        let c = RunConfig::from_toml_str(text).unwrap();
        let again = RunConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(c, again);
        let r = again.resolve(Some(99), Path::new("/base")).unwrap();
        assert_eq!(r.seed, 99);
        assert_eq!(r.pair.t2.alpha, 0.1);
        assert_eq!(r.outputs[1], (OutputKind::Compare, PathBuf::from("/base/c.csv")));
        assert!((r.b.eval(0).unwrap() - 2.0 / 9.0).abs() < 1e-16);
    }

    #[test]
    fn paper_maps_reject_foreign_fixed_points() {
        let text = MINIMAL.replace("pair = \"extremal-upper\"", "pair = { t1 = \"paper-T1\", t2 = \"paper-T2\", x_star = 2.0 }");
        let c = RunConfig::from_toml_str(&text).unwrap();
        assert!(matches!(c.resolve(None, Path::new(".")), Err(ConfigError::Field { field, .. }) if field == "pair.x_star"));
    }

    #[test]
    fn guide_example_parses() {
        let guide = include_str!("../../../book/src/cli.md");
        let start = guide.find("```toml\n").unwrap() + 8;
        let end = start + guide[start..].find("```").unwrap();
        let cfg = RunConfig::from_toml_str(&guide[start..end]).unwrap();
        cfg.resolve(None, Path::new(".")).unwrap();
    }
}
