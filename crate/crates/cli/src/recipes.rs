//! Figure recipes: each expands to run configs and writes one CSV per curve
//! plus a `manifest.json`.

use std::path::{Path, PathBuf};

use oeb_core::SchemeId;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{OutputKind, OutputSpec, PairSpec, RunConfig, ScheduleSpec, VectorSpec};
use crate::output::{fmt_f64, write_rows};
use crate::{execute, RunError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Panel {
    /// One error curve per run.
    Errors,
    /// `Err_{n+1}` against the schedule partial sum with the
    /// `Y = beta_min X` and `Y = beta_max X` lines.
    Rate,
    /// Ishikawa and modified Ishikawa errors of one schedule pair.
    CompareErrors,
    /// `log R(x_n^IM, x_n^I, x*)`.
    LogRatio,
    /// The Ishikawa error alone.
    IshikawaError,
}

/// `(legend label, a key, b key)`.
pub type RunSpec = (&'static str, &'static str, &'static str);

#[derive(Debug, Clone)]
pub struct FigureRecipe {
    pub id: &'static str,
    pub title: &'static str,
    pub scheme: SchemeId,
    pub alpha1: f64,
    pub alpha2: f64,
    pub n: usize,
    pub panel: Panel,
    pub runs: &'static [RunSpec],
}

pub const X0: f64 = 2.0;

const EQBN: &[RunSpec] = &[
    ("Test 1", "rand", "eqbn-test1"),
    ("Test 2", "rand", "eqbn-test2"),
    ("Test 3", "rand", "eqbn-test3"),
    ("Test 4", "rand", "eqbn-test4"),
];
const EQBN_LAST: &[RunSpec] = &[("Test 3", "rand", "eqbn-test3"), ("Test 4", "rand", "eqbn-test4")];
const FIG1B_DIV: &[RunSpec] = &[
    ("a_n test 1", "an-fig1b-test1", "bn-fig1b-div"),
    ("a_n test 2", "an-fig1b-test2", "bn-fig1b-div"),
    ("a_n test 3", "an-fig1b-test3", "bn-fig1b-div"),
];
const FIG1B_CONV: &[RunSpec] = &[
    ("a_n test 1", "an-fig1b-test1", "bn-fig1b-conv"),
    ("a_n test 2", "an-fig1b-test2", "bn-fig1b-conv"),
    ("a_n test 3", "an-fig1b-test3", "bn-fig1b-conv"),
];
const ANBN: &[RunSpec] = &[
    ("Test 1", "anbn-test1-a", "anbn-test1-b"),
    ("Test 2", "anbn-test2-a", "anbn-test2-b"),
    ("Test 3", "anbn-test3-a", "anbn-test3-b"),
    ("Test 4", "anbn-test4-a", "anbn-test4-b"),
];
const IM_TESTS: &[RunSpec] = &[
    ("Test 1", "im-test1-a", "im-test1-b"),
    ("Test 2", "im-test2-a", "im-test2-b"),
    ("Test 3", "im-test3-a", "im-test3-b"),
    ("Test 4", "im-test4-a", "im-test4-b"),
];
const NA: &[RunSpec] = &[("rate", "na-a", "na-b")];
const NB: &[RunSpec] = &[("rate", "nb-a", "nb-b")];
const NA2: &[RunSpec] = &[("rate", "na2-a", "na2-b")];
const CMP1: &[RunSpec] = &[("Test 1", "cmp-test1-a", "cmp-test1-b")];
const CMP2: &[RunSpec] = &[("Test 2", "cmp-test2-a", "cmp-test2-b")];
const CMP3: &[RunSpec] = &[("Test 3", "cmp-test3-a", "cmp-test3-b")];
const CMP4: &[RunSpec] = &[("Test 4", "cmp-test4-a", "cmp-test4-b")];

const fn recipe(
    id: &'static str,
    title: &'static str,
    scheme: SchemeId,
    alpha2: f64,
    n: usize,
    panel: Panel,
    runs: &'static [RunSpec],
) -> FigureRecipe {
    FigureRecipe {
        id,
        title,
        scheme,
        alpha1: 0.5,
        alpha2,
        n,
        panel,
        runs,
    }
}

use Panel::*;
use SchemeId::{Ishikawa as I, ModifiedIshikawa as IM};

pub const RECIPES: &[FigureRecipe] = &[
    recipe("fig1a", "Ishikawa errors, b_n tests 1-4, N = 50", I, 0.2, 50, Errors, EQBN),
    recipe("fig1b", "Ishikawa errors, b_n tests 3-4, N = 500", I, 0.2, 500, Errors, EQBN_LAST),
    recipe("fig1c-a", "Three a_n choices with a divergent sum b_n", I, 0.2, 500, Errors, FIG1B_DIV),
    recipe("fig1c-b", "Three a_n choices with a convergent sum b_n", I, 0.2, 500, Errors, FIG1B_CONV),
    recipe("fig2a", "Ishikawa errors with alpha2 = 1, N = 50", I, 1.0, 50, Errors, EQBN),
    recipe("fig2b", "Ishikawa errors with alpha2 = 1, tests 3-4, N = 500", I, 1.0, 500, Errors, EQBN_LAST),
    recipe("fig3", "Ishikawa errors with alpha2 = 1, (a_n, b_n) tests 1-4", I, 1.0, 500, Errors, ANBN),
    recipe("fig4a", "Modified Ishikawa errors, N = 20", IM, 0.2, 20, Errors, IM_TESTS),
    recipe("fig4b", "Modified Ishikawa errors, N = 1e5", IM, 0.2, 100_000, Errors, IM_TESTS),
    recipe("fig5a", "Ishikawa rate, a_n = (n+3)/(2n+3), b_n = 1/5", I, 0.2, 2000, Rate, NA),
    recipe("fig5b", "Ishikawa rate, second schedule pair", I, 0.2, 2000, Rate, NB),
    recipe("fig6a", "Modified Ishikawa rate, a_n = (n+3)/(2n+3), b_n = 1/5", IM, 0.2, 2000, Rate, NA),
    recipe("fig6b", "Modified Ishikawa rate, a_n ~ 1/(n+1), b_n = 1/sqrt(2n+3)", IM, 0.2, 2000, Rate, NA2),
    recipe("fig8a", "Ishikawa vs modified Ishikawa, comparison test 1", I, 0.2, 500, CompareErrors, CMP1),
    recipe("fig8b", "Ishikawa vs modified Ishikawa, comparison test 2", I, 0.2, 500, CompareErrors, CMP2),
    recipe("fig8c", "log R for comparison test 1", I, 0.2, 500, LogRatio, CMP1),
    recipe("fig8d", "log R for comparison test 2", I, 0.2, 500, LogRatio, CMP2),
    recipe("figcompare-a", "Ishikawa rate, comparison test 3", I, 0.2, 500, IshikawaError, CMP3),
    recipe("figcompare-b", "Ishikawa rate, comparison test 4", I, 0.2, 500, IshikawaError, CMP4),
    recipe("figcompare-c", "log R for comparison test 3", I, 0.2, 500, LogRatio, CMP3),
    recipe("figcompare-d", "log R for comparison test 4", I, 0.2, 500, LogRatio, CMP4),
];

pub fn find(id: &str) -> Option<&'static FigureRecipe> {
    RECIPES.iter().find(|r| r.id.eq_ignore_ascii_case(id))
}

fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '-' })
        .collect()
}

/// Legend label and file name of every curve, in manifest order.
pub fn curves(r: &FigureRecipe) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (label, _, _) in r.runs {
        let s = slug(label);
        match r.panel {
            Errors => out.push((label.to_string(), format!("{s}.csv"))),
            Rate => {
                out.push(("numerical rate".into(), format!("{s}.csv")));
                out.push(("Y = beta_min X".into(), "beta-min.csv".into()));
                out.push(("Y = beta_max X".into(), "beta-max.csv".into()));
            }
            CompareErrors => {
                out.push(("Ishikawa".into(), format!("{s}-ishikawa.csv")));
                out.push(("modified Ishikawa".into(), format!("{s}-modified-ishikawa.csv")));
            }
            LogRatio => out.push((format!("log R, {label}"), format!("{s}-log-ratio.csv"))),
            IshikawaError => out.push((format!("Ishikawa, {label}"), format!("{s}-ishikawa.csv"))),
        }
    }
    out
}

impl FigureRecipe {
    /// The run configs behind the figure, one per run. Output paths are
    /// relative to the figure directory.
    pub fn expand(&self, seed: u64) -> Vec<RunConfig> {
        self.runs
            .iter()
            .map(|(label, a, b)| {
                let s = slug(label);
                let (scheme, kind, path) = match self.panel {
                    Errors => (self.scheme, OutputKind::Trace, format!("{s}.csv")),
                    Rate => (self.scheme, OutputKind::Rate, format!("{s}-table.csv")),
                    CompareErrors | LogRatio => (SchemeId::Ishikawa, OutputKind::Compare, format!("{s}-compare.csv")),
                    IshikawaError => (SchemeId::Ishikawa, OutputKind::Trace, format!("{s}-ishikawa.csv")),
                };
                // rate ratios need Err_{N+1}
                let n = if self.panel == Rate { self.n + 1 } else { self.n };
                RunConfig {
                    scheme: scheme.as_str().into(),
                    alpha1: self.alpha1,
                    alpha2: self.alpha2,
                    x0: VectorSpec::Scalar(X0),
                    n,
                    seed,
                    floor: 0.0,
                    pair: PairSpec::Key("paper".into()),
                    schedule_a: ScheduleSpec::Key(a.to_string()),
                    schedule_b: ScheduleSpec::Key(b.to_string()),
                    outputs: vec![OutputSpec {
                        kind,
                        path: PathBuf::from(path),
                    }],
                }
            })
            .collect()
    }

    fn axes(&self) -> (&'static str, &'static str, &'static str, &'static str, &'static str) {
        // (x label, y label, x column, y column, scale)
        match self.panel {
            Errors | IshikawaError => ("n", "Err_n", "n", "err_n", "log-y"),
            Rate => (
                if self.scheme == SchemeId::ModifiedIshikawa { "sum_{k<=n} (a_k + b_k)" } else { "sum_{k<=n} b_k" },
                "Err_{n+1}",
                "X",
                "err",
                "log-y",
            ),
            CompareErrors => ("n", "Err_n", "n", "err_n", "log-y"),
            LogRatio => ("n", "log10 R(x_n^IM, x_n^I, x*)", "n", "log10_ratio", "linear"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveEntry {
    pub label: String,
    pub file: String,
    pub schedule_a: String,
    pub schedule_b: String,
    pub available: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub figure: String,
    pub title: String,
    pub scheme: String,
    pub alpha1: f64,
    pub alpha2: f64,
    pub x0: f64,
    pub n: usize,
    pub seed: u64,
    pub x_label: String,
    pub y_label: String,
    pub x_column: String,
    pub y_column: String,
    pub scale: String,
    pub curves: Vec<CurveEntry>,
    pub notes: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum FigureError {
    #[error("{figure} / {label}: {source}")]
    SubRun {
        figure: &'static str,
        label: &'static str,
        source: RunError,
    },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

fn write(path: PathBuf, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), FigureError> {
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    write_rows(&path, &header, rows).map_err(|source| FigureError::Write { path, source })
}

fn error_rows(err: &[f64], log10: &[f64]) -> Vec<Vec<String>> {
    (0..err.len())
        .map(|n| vec![n.to_string(), fmt_f64(err[n]), fmt_f64(log10[n])])
        .collect()
}

/// Runs every sub-run (in parallel) and writes the curves and the manifest
/// into `out`.
pub fn render(r: &'static FigureRecipe, out: &Path, seed: u64) -> Result<Manifest, FigureError> {
    std::fs::create_dir_all(out).map_err(|source| FigureError::Write {
        path: out.to_path_buf(),
        source,
    })?;
    let configs = r.expand(seed);
    let results: Vec<Result<(Vec<bool>, Vec<String>), FigureError>> = r
        .runs
        .par_iter()
        .zip(configs.par_iter())
        .map(|((label, _, _), cfg)| {
            let sub = |source| FigureError::SubRun {
                figure: r.id,
                label,
                source,
            };
            let resolved = cfg.resolve(None, out).map_err(|e| sub(e.into()))?;
            let products = execute(&resolved).map_err(sub)?;
            let s = slug(label);
            let mut available = vec![true];
            let mut notes = Vec::new();
            match r.panel {
                Errors | IshikawaError => {}
                Rate => {
                    let rate = products.rate.expect("rate output requested");
                    let rows = (0..rate.sigma.len())
                        .map(|n| {
                            vec![
                                n.to_string(),
                                fmt_f64(rate.denominator[n]),
                                fmt_f64(rate.err_next[n]),
                                fmt_f64(-rate.ln_err_next[n]),
                            ]
                        })
                        .collect();
                    write(out.join(format!("{s}.csv")), &["n", "X", "err", "neg_ln_err"], rows)?;
                    for (file, beta) in [("beta-min.csv", Some(rate.beta_min)), ("beta-max.csv", rate.beta_max_guaranteed)] {
                        let rows = rate
                            .denominator
                            .iter()
                            .map(|&x| match beta {
                                Some(b) => vec![fmt_f64(x), fmt_f64(b * x), fmt_f64((-b * x).exp())],
                                None => vec![fmt_f64(x), String::new(), String::new()],
                            })
                            .collect();
                        write(out.join(file), &["X", "Y", "err"], rows)?;
                        available.push(beta.is_some());
                    }
                    if rate.beta_max_guaranteed.is_none() {
                        notes.push(format!(
                            "{label}: no finite beta_max (epsilon = {:?}, delta = {:?}, epsilon1 = {:?}, epsilon2 = {:?}); the beta_max line is left blank",
                            rate.epsilon, rate.delta, rate.epsilon1, rate.epsilon2
                        ));
                    }
                }
                CompareErrors => {
                    let c = products.compare.expect("compare output requested");
                    let (ti, tim) = products.compare_traces.expect("compare traces");
                    write(out.join(format!("{s}-ishikawa.csv")), &["n", "err_n", "log10_err_n"], error_rows(&c.err_i, &ti.log10_err))?;
                    write(
                        out.join(format!("{s}-modified-ishikawa.csv")),
                        &["n", "err_n", "log10_err_n"],
                        error_rows(&c.err_im, &tim.log10_err),
                    )?;
                    available.push(true);
                }
                LogRatio => {
                    let c = products.compare.expect("compare output requested");
                    let rows = (0..c.ratio.len())
                        .map(|n| {
                            vec![
                                n.to_string(),
                                fmt_f64(c.ratio[n]),
                                fmt_f64(c.log10_ratio[n]),
                                fmt_f64(c.log10_ratio[n] * std::f64::consts::LN_10),
                            ]
                        })
                        .collect();
                    write(out.join(format!("{s}-log-ratio.csv")), &["n", "ratio", "log10_ratio", "ln_ratio"], rows)?;
                    notes.push(format!("{label}: verdict {}", c.verdict));
                }
            }
            Ok((available, notes))
        })
        .collect();

    let (x_label, y_label, x_column, y_column, scale) = r.axes();
    let mut curves_out = Vec::new();
    let mut notes = Vec::new();
    let names = curves(r);
    let mut names = names.into_iter();
    for ((_, a, b), res) in r.runs.iter().zip(results) {
        let (available, mut n) = res?;
        notes.append(&mut n);
        for ok in available {
            let (label, file) = names.next().expect("curve list matches the runs");
            curves_out.push(CurveEntry {
                label,
                file,
                schedule_a: a.to_string(),
                schedule_b: b.to_string(),
                available: ok,
            });
        }
    }
    let manifest = Manifest {
        figure: r.id.into(),
        title: r.title.into(),
        scheme: match r.panel {
            CompareErrors | LogRatio => "ishikawa,modified-ishikawa".into(),
            IshikawaError => "ishikawa".into(),
            _ => r.scheme.as_str().into(),
        },
        alpha1: r.alpha1,
        alpha2: r.alpha2,
        x0: X0,
        n: r.n,
        seed,
        x_label: x_label.into(),
        y_label: y_label.into(),
        x_column: x_column.into(),
        y_column: y_column.into(),
        scale: scale.into(),
        curves: curves_out,
        notes,
    };
    let path = out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    std::fs::write(&path, text).map_err(|source| FigureError::Write { path, source })?;
    Ok(manifest)
}
