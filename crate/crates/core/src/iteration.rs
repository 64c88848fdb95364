//! Picard, Mann, Ishikawa and modified Ishikawa processes.
//!
//! Ishikawa: `y = (1-a) x + a T1(x)`, `x+ = (1-b) x + b T2(y)`.
//! Modified Ishikawa: same `y`, then `x+ = (1-b) y + b T2(y)`.
//! Mann is Ishikawa with `a = 0`; Picard is `x+ = T2(x)`.
//!
//! [`run`] advances the offset `e = x - x*` rather than `x` itself, so that
//! errors keep their relative precision far below machine epsilon. Once the
//! offset drops under `1e-300` the run continues in a scaled linear mode
//! (`e = m * 2^s`) driven by the maps' gains at `x*`; for the shipped maps the
//! offset formulas are exactly linear at that size, so nothing changes except
//! that the exponent can no longer underflow.

use std::fmt;

use nalgebra::DVector;
use thiserror::Error;

use crate::mappings::{MapPair, MappingError, NonExpansiveMap};
use crate::schedules::{Schedule, ScheduleError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IterationError {
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("iterate {which}_{index} = {point:?} left the domain")]
    OutOfDomain {
        which: &'static str,
        index: usize,
        point: Vec<f64>,
    },
    #[error("horizon must be at least 1")]
    BadHorizon,
    #[error("floor must be finite and non-negative, got {0}")]
    BadFloor(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeId {
    Picard,
    Mann,
    Ishikawa,
    ModifiedIshikawa,
}

impl SchemeId {
    pub const ALL: [SchemeId; 4] = [
        SchemeId::Picard,
        SchemeId::Mann,
        SchemeId::Ishikawa,
        SchemeId::ModifiedIshikawa,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeId::Picard => "picard",
            SchemeId::Mann => "mann",
            SchemeId::Ishikawa => "ishikawa",
            SchemeId::ModifiedIshikawa => "modified-ishikawa",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "picard" => Some(SchemeId::Picard),
            "mann" => Some(SchemeId::Mann),
            "ishikawa" | "i" => Some(SchemeId::Ishikawa),
            "modified-ishikawa" | "modified_ishikawa" | "im" => Some(SchemeId::ModifiedIshikawa),
            _ => None,
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Completed,
    ConvergedEarly,
    /// The error fell below `1e-300` and a map had no known gain; the trace
    /// stops there.
    Stalled,
    /// `x0 = x*`; every error is 0.
    StartedAtFixedPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub scheme: SchemeId,
    pub x0: DVector<f64>,
    pub x_star: DVector<f64>,
    /// `x_0 ..= x_N`.
    pub x: Vec<DVector<f64>>,
    /// `y_0 .. y_{N-1}`; empty for Picard.
    pub y: Vec<DVector<f64>>,
    /// `Err_n = R(x_n, x_0, x*)`.
    pub err: Vec<f64>,
    /// `log10 Err_n`, `-inf` when `x_n = x*` exactly. Stays finite where
    /// `err` underflows.
    pub log10_err: Vec<f64>,
    pub status: RunStatus,
}

impl IterationTrace {
    /// Index of the last iterate.
    pub fn horizon(&self) -> usize {
        self.x.len() - 1
    }

    /// `ln Err_n`.
    pub fn ln_err(&self, n: usize) -> f64 {
        self.log10_err[n] * std::f64::consts::LN_10
    }

    /// Whether `x_n` equals `x*` exactly.
    pub fn at_fixed_point(&self, n: usize) -> bool {
        self.log10_err[n] == f64::NEG_INFINITY
    }
}

fn checked(map: &NonExpansiveMap, x: &DVector<f64>) -> Result<DVector<f64>, MappingError> {
    map.apply(x)
}

/// One Ishikawa step from `x`.
pub fn step_ishikawa(
    x: &DVector<f64>,
    a: f64,
    b: f64,
    pair: &MapPair,
) -> Result<(DVector<f64>, DVector<f64>), IterationError> {
    let y = x * (1.0 - a) + checked(&pair.t1, x)? * a;
    let next = x * (1.0 - b) + checked(&pair.t2, &y)? * b;
    Ok((y, next))
}

/// One modified Ishikawa step from `x`.
pub fn step_modified_ishikawa(
    x: &DVector<f64>,
    a: f64,
    b: f64,
    pair: &MapPair,
) -> Result<(DVector<f64>, DVector<f64>), IterationError> {
    let y = x * (1.0 - a) + checked(&pair.t1, x)? * a;
    let next = &y * (1.0 - b) + checked(&pair.t2, &y)? * b;
    Ok((y, next))
}

/// Offset state: `e = mantissa * 2^scale`; `scale == 0` outside scaled mode.
struct Offset {
    mantissa: DVector<f64>,
    scale: i32,
    scaled: bool,
}

const SCALED_THRESHOLD: f64 = 1e-300;

/// Runs `scheme` for `n_steps` steps from `x0`.
///
/// `floor > 0` stops the run once `Err_n < floor` (status
/// [`RunStatus::ConvergedEarly`]). Picard ignores both schedules; Mann
/// ignores `a`.
pub fn run(
    scheme: SchemeId,
    pair: &MapPair,
    a: &Schedule,
    b: &Schedule,
    x0: &DVector<f64>,
    n_steps: usize,
    floor: f64,
) -> Result<IterationTrace, IterationError> {
    if n_steps < 1 {
        return Err(IterationError::BadHorizon);
    }
    if !(floor >= 0.0 && floor.is_finite()) {
        return Err(IterationError::BadFloor(floor));
    }
    let domain = pair.domain();
    let x_star = &pair.common_fixed_point;
    if x0.len() != domain.dimension() {
        return Err(MappingError::DimensionMismatch {
            expected: domain.dimension(),
            got: x0.len(),
        }
        .into());
    }
    if !domain.contains(x0) {
        return Err(IterationError::OutOfDomain {
            which: "x",
            index: 0,
            point: x0.iter().copied().collect(),
        });
    }

    let e0 = x0 - x_star;
    let e0_norm = domain.norm(&e0);
    let log10_e0 = e0_norm.log10();
    let with_y = scheme != SchemeId::Picard;

    let mut trace = IterationTrace {
        scheme,
        x0: x0.clone(),
        x_star: x_star.clone(),
        x: Vec::with_capacity(n_steps + 1),
        y: Vec::with_capacity(if with_y { n_steps } else { 0 }),
        err: Vec::with_capacity(n_steps + 1),
        log10_err: Vec::with_capacity(n_steps + 1),
        status: RunStatus::Completed,
    };
    trace.x.push(x0.clone());

    if e0_norm == 0.0 {
        trace.status = RunStatus::StartedAtFixedPoint;
        trace.err.push(0.0);
        trace.log10_err.push(f64::NEG_INFINITY);
        for n in 0..n_steps {
            // schedules are still validated
            if with_y {
                a.eval(n)?;
            }
            b.eval(n)?;
            if with_y {
                trace.y.push(x_star.clone());
            }
            trace.x.push(x_star.clone());
            trace.err.push(0.0);
            trace.log10_err.push(f64::NEG_INFINITY);
        }
        return Ok(trace);
    }
    trace.err.push(1.0);
    trace.log10_err.push(0.0);

    let g1 = pair.t1.gain_at_fixed_point();
    let g2 = pair.t2.gain_at_fixed_point();
    let log10_floor = floor.log10();

    let mut state = Offset {
        mantissa: e0,
        scale: 0,
        scaled: false,
    };

    for n in 0..n_steps {
        let (an, bn) = match scheme {
            SchemeId::Picard => (0.0, 1.0),
            SchemeId::Mann => (0.0, b.eval(n)?),
            _ => (a.eval(n)?, b.eval(n)?),
        };

        let (y_off, x_off) = if state.scaled {
            let gain1 = if an == 0.0 { 0.0 } else { g1.unwrap_or(f64::NAN) };
            let gain2 = g2.unwrap_or(f64::NAN);
            let cy = (1.0 - an) + an * gain1;
            let cx = match scheme {
                SchemeId::Picard => gain2,
                SchemeId::ModifiedIshikawa => ((1.0 - bn) + bn * gain2) * cy,
                _ => (1.0 - bn) + bn * gain2 * cy,
            };
            (&state.mantissa * cy, &state.mantissa * cx)
        } else {
            offset_step(scheme, pair, &state.mantissa, an, bn)
        };

        let scale_factor = 2f64.powi(state.scale);
        if with_y {
            let y_abs = x_star + &y_off * scale_factor;
            if !domain.contains(&y_abs) {
                return Err(IterationError::OutOfDomain {
                    which: "y",
                    index: n,
                    point: y_abs.iter().copied().collect(),
                });
            }
            trace.y.push(y_abs);
        }
        let x_abs = x_star + &x_off * scale_factor;
        if !domain.contains(&x_abs) {
            return Err(IterationError::OutOfDomain {
                which: "x",
                index: n + 1,
                point: x_abs.iter().copied().collect(),
            });
        }
        trace.x.push(x_abs);
        state.mantissa = x_off;

        let m_norm = domain.norm(&state.mantissa);
        let (err, log10_err) = if m_norm == 0.0 {
            state.scaled = false;
            state.scale = 0;
            (0.0, f64::NEG_INFINITY)
        } else if state.scaled {
            let k = m_norm.log2().floor() as i32;
            state.mantissa *= 2f64.powi(-k);
            state.scale += k;
            let l = domain.norm(&state.mantissa).log10() + state.scale as f64 * std::f64::consts::LOG10_2
                - log10_e0;
            (10f64.powf(l), l)
        } else {
            let err = m_norm / e0_norm;
            let l = if err >= f64::MIN_POSITIVE {
                err.log10()
            } else {
                m_norm.log10() - log10_e0
            };
            (err, l)
        };
        trace.err.push(err);
        trace.log10_err.push(log10_err);

        if !state.scaled && m_norm > 0.0 && m_norm < SCALED_THRESHOLD {
            let gains_known = g2.is_some() && (g1.is_some() || matches!(scheme, SchemeId::Picard | SchemeId::Mann));
            if !gains_known {
                trace.status = RunStatus::Stalled;
                return Ok(trace);
            }
            state.scaled = true;
            let k = m_norm.log2().floor() as i32;
            state.mantissa *= 2f64.powi(-k);
            state.scale = k;
        }

        if floor > 0.0 && log10_err < log10_floor {
            trace.status = RunStatus::ConvergedEarly;
            return Ok(trace);
        }
    }
    Ok(trace)
}

/// One step in offset coordinates; returns `(y - x*, x+ - x*)`.
fn offset_step(
    scheme: SchemeId,
    pair: &MapPair,
    e: &DVector<f64>,
    a: f64,
    b: f64,
) -> (DVector<f64>, DVector<f64>) {
    let x_star = &pair.common_fixed_point;
    if scheme == SchemeId::Picard {
        let next = pair.t2.displacement(x_star, e);
        return (e.clone(), next);
    }
    let y = if a == 0.0 {
        e.clone()
    } else {
        e * (1.0 - a) + pair.t1.displacement(x_star, e) * a
    };
    let t2y = pair.t2.displacement(x_star, &y);
    let next = match scheme {
        SchemeId::ModifiedIshikawa => &y * (1.0 - b) + t2y * b,
        _ => e * (1.0 - b) + t2y * b,
    };
    (y, next)
}
