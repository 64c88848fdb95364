//! Experiment runner for `oeb-core`: TOML run configs, CSV output, figure
//! recipes and the acceptance suite behind `oeb verify`.

pub mod config;
pub mod output;
pub mod recipes;
pub mod verify;

use std::io::Write;
use std::path::Path;

use oeb_core::analysis::AnalysisError;
use oeb_core::bounds::{bounds, BoundsError, BoundsTrace};
use oeb_core::iteration::IterationError;
use oeb_core::{compare_schemes, rate_ishikawa, rate_modified, run, ComparisonReport, IterationTrace, RateReport, SchemeId};
use thiserror::Error;

use config::{ConfigError, OutputKind, Resolved, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_FIGURE: i32 = 4;

/// Name of the environment variable that overrides the config seed.
pub const SEED_ENV: &str = "OEB_SEED";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("iteration: {0}")]
    Iteration(#[from] IterationError),
    #[error("bounds: {0}")]
    Bounds(#[from] BoundsError),
    #[error("analysis: {0}")]
    Analysis(#[from] AnalysisError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        }
    }
}

/// Everything one run produced.
#[derive(Debug, Clone)]
pub struct Products {
    pub trace: IterationTrace,
    pub bounds: Option<BoundsTrace>,
    pub rate: Option<RateReport>,
    pub compare: Option<ComparisonReport>,
    /// `(Ishikawa, modified Ishikawa)` behind `compare`.
    pub compare_traces: Option<(IterationTrace, IterationTrace)>,
}

/// Reads `OEB_SEED`; an unparsable value is a config error.
pub fn seed_override() -> Result<Option<u64>, ConfigError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| ConfigError::field(SEED_ENV, format!("`{v}` is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

/// Runs a resolved config and writes its outputs.
pub fn execute(r: &Resolved) -> Result<Products, RunError> {
    let trace = run(r.scheme, &r.pair, &r.a, &r.b, &r.x0, r.n, r.floor)?;
    let mut p = Products {
        trace,
        bounds: None,
        rate: None,
        compare: None,
        compare_traces: None,
    };
    for (kind, path) in &r.outputs {
        let written = match kind {
            OutputKind::Trace => output::write_trace(path, &p.trace),
            OutputKind::Bounds => {
                // U_n bounds Err_{n+1}
                let h = p.trace.horizon().saturating_sub(1);
                let b = bounds(r.scheme, &r.a, &r.b, r.alpha1, r.alpha2, h)?;
                let w = output::write_bounds(path, &b);
                p.bounds = Some(b);
                w
            }
            OutputKind::Rate => {
                let rate = match r.scheme {
                    SchemeId::ModifiedIshikawa => rate_modified(&p.trace, &r.a, &r.b, r.alpha1, r.alpha2)?,
                    _ => rate_ishikawa(&p.trace, &r.a, &r.b, r.alpha1, r.alpha2)?,
                };
                let w = output::write_rate(path, &rate);
                p.rate = Some(rate);
                w
            }
            OutputKind::Compare => {
                let ti = run(SchemeId::Ishikawa, &r.pair, &r.a, &r.b, &r.x0, r.n, 0.0)?;
                let tim = run(SchemeId::ModifiedIshikawa, &r.pair, &r.a, &r.b, &r.x0, r.n, 0.0)?;
                let c = compare_schemes(&tim, &ti, &r.a, &r.b, r.alpha1, r.alpha2)?;
                let w = output::write_compare(path, &c);
                p.compare = Some(c);
                p.compare_traces = Some((ti, tim));
                w
            }
        };
        written.map_err(|source| RunError::Write {
            path: path.clone(),
            source,
        })?;
    }
    Ok(p)
}

/// Loads, resolves and runs one config file.
pub fn run_config_file(path: &Path) -> Result<Products, RunError> {
    let cfg = RunConfig::load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let resolved = cfg.resolve(seed_override()?, base)?;
    execute(&resolved)
}

pub fn cmd_run(path: &Path) -> i32 {
    match run_config_file(path) {
        Ok(p) => {
            let last = p.trace.horizon();
            println!(
                "{}: {} steps, status {:?}, Err_{last} = {:e}",
                p.trace.scheme, last, p.trace.status, p.trace.err[last]
            );
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn cmd_figure(id: &str, out: &Path) -> i32 {
    let Some(recipe) = recipes::find(id) else {
        eprintln!(
            "error: unknown figure `{id}`; known: {}",
            recipes::RECIPES.iter().map(|r| r.id).collect::<Vec<_>>().join(", ")
        );
        return EXIT_CONFIG;
    };
    let seed = match seed_override() {
        Ok(s) => s.unwrap_or(oeb_core::numerics::DEFAULT_SEED),
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match recipes::render(recipe, out, seed) {
        Ok(m) => {
            println!("{}: {} curves written to {}", m.figure, m.curves.len(), out.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FIGURE
        }
    }
}

/// Runs the acceptance suite, printing one line per criterion to `out`.
pub fn cmd_verify_to(level: verify::Level, mutation: verify::Mutation, out: &mut dyn Write) -> i32 {
    let outcomes = verify::run_suite(level, mutation);
    for o in &outcomes {
        let _ = writeln!(out, "{}", o.line());
    }
    let failed: Vec<String> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| format!("{} ({})", o.id, o.name))
        .collect();
    if failed.is_empty() {
        let _ = writeln!(out, "all {} criteria passed", outcomes.len());
        EXIT_OK
    } else {
        let _ = writeln!(out, "failed: {}", failed.join(", "));
        EXIT_VERIFY_FAILED
    }
}

pub fn cmd_verify(level: verify::Level) -> i32 {
    cmd_verify_to(level, verify::Mutation::None, &mut std::io::stdout())
}

/// Lists schedule keys, map keys, pair keys and figure recipes.
pub fn cmd_catalog_to(out: &mut dyn Write) -> i32 {
    let mut text = String::from("schedules:\n");
    for e in oeb_core::schedules::CATALOG {
        text.push_str(&format!("  {:<16} {:<11} {}\n", e.key, e.class.as_str(), e.formula));
    }
    text.push_str("maps:\n");
    for (k, d) in config::MAP_KEYS {
        text.push_str(&format!("  {k:<16} {d}\n"));
    }
    text.push_str("pairs:\n");
    for (k, d) in config::PAIR_KEYS {
        text.push_str(&format!("  {k:<18} {d}\n"));
    }
    text.push_str("figures:\n");
    for r in recipes::RECIPES {
        let runs: Vec<String> = r.runs.iter().map(|(_, a, b)| format!("{a}/{b}")).collect();
        text.push_str(&format!(
            "  {:<13} {} curves, N = {}, alpha = ({}, {}): {} [{}]\n",
            r.id,
            recipes::curves(r).len(),
            r.n,
            r.alpha1,
            r.alpha2,
            r.title,
            runs.join(", ")
        ));
    }
    match out.write_all(text.as_bytes()) {
        Ok(()) => EXIT_OK,
        Err(_) => EXIT_RUNTIME,
    }
}

pub fn cmd_catalog() -> i32 {
    cmd_catalog_to(&mut std::io::stdout())
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
