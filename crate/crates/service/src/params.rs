//! Parsing of plane and slice parameters shared by the HTTP service and the
//! command line.

use mcmullen_core::dynamics::SliceSpec;
use mcmullen_core::maps::MapParams;
use mcmullen_core::render::{PlaneKind, MAX_DEEP_BUDGET};
use mcmullen_core::Complex64;
use thiserror::Error;

/// Largest tile side in pixels.
pub const MAX_PX: usize = 2048;
/// Narrowest viewport double precision can resolve.
pub const MIN_WIDTH: f64 = 1e-13;
pub const MAX_DEGREE: u32 = 1024;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    /// The value could not be parsed or a required value is missing.
    #[error("{0}")]
    Malformed(String),
    /// The value parsed but is outside the accepted range.
    #[error("{0}")]
    OutOfRange(String),
}

/// Parses `"X,Y"` into `X + iY`.
pub fn parse_complex(s: &str) -> Result<Complex64, ParamError> {
    let bad = || ParamError::Malformed(format!("expected X,Y but got {s:?}"));
    let (x, y) = s.split_once(',').ok_or_else(bad)?;
    let x: f64 = x.trim().parse().map_err(|_| bad())?;
    let y: f64 = y.trim().parse().map_err(|_| bad())?;
    if !x.is_finite() || !y.is_finite() {
        return Err(ParamError::OutOfRange(format!("non-finite complex value {s:?}")));
    }
    Ok(Complex64::new(x, y))
}

pub fn parse_real(name: &str, s: &str) -> Result<f64, ParamError> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| ParamError::Malformed(format!("{name}: expected a number, got {s:?}")))?;
    if !x.is_finite() {
        return Err(ParamError::OutOfRange(format!("{name} must be finite")));
    }
    Ok(x)
}

pub fn parse_uint<T: std::str::FromStr>(name: &str, s: &str) -> Result<T, ParamError> {
    s.trim()
        .parse()
        .map_err(|_| ParamError::Malformed(format!("{name}: expected a nonnegative integer, got {s:?}")))
}

pub fn check_degree(n: u32) -> Result<u32, ParamError> {
    if (3..=MAX_DEGREE).contains(&n) {
        Ok(n)
    } else {
        Err(ParamError::OutOfRange(format!("n must be in 3..={MAX_DEGREE}, got {n}")))
    }
}

pub fn check_width(w: f64) -> Result<f64, ParamError> {
    if w > MIN_WIDTH {
        Ok(w)
    } else {
        Err(ParamError::OutOfRange(format!(
            "width {w:e} is at or below the double-precision floor {MIN_WIDTH:e}"
        )))
    }
}

pub fn check_px(px: usize) -> Result<usize, ParamError> {
    if (1..=MAX_PX).contains(&px) {
        Ok(px)
    } else {
        Err(ParamError::OutOfRange(format!("px must be in 1..={MAX_PX}, got {px}")))
    }
}

pub fn check_budget(m: u32) -> Result<u32, ParamError> {
    if (1..=MAX_DEEP_BUDGET).contains(&m) {
        Ok(m)
    } else {
        Err(ParamError::OutOfRange(format!("max_iter must be in 1..={MAX_DEEP_BUDGET}, got {m}")))
    }
}

/// Plane families addressable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceKind {
    FixedCrit,
    ASlice,
    BSlice,
    Linear,
    /// Dynamical plane of one map.
    Julia,
}

impl SliceKind {
    pub fn parse(s: &str) -> Result<SliceKind, ParamError> {
        Ok(match s {
            "fixed-crit" => SliceKind::FixedCrit,
            "a-slice" => SliceKind::ASlice,
            "b-slice" => SliceKind::BSlice,
            "linear" => SliceKind::Linear,
            "julia" => SliceKind::Julia,
            other => {
                return Err(ParamError::Malformed(format!(
                    "unknown slice {other:?} (fixed-crit, a-slice, b-slice, linear, julia)"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SliceKind::FixedCrit => "fixed-crit",
            SliceKind::ASlice => "a-slice",
            SliceKind::BSlice => "b-slice",
            SliceKind::Linear => "linear",
            SliceKind::Julia => "julia",
        }
    }
}

/// Raw slice arguments before the combination is validated.
#[derive(Debug, Clone, Copy, Default)]
pub struct SliceArgs {
    pub n: u32,
    pub a: Option<Complex64>,
    pub b: Option<Complex64>,
    pub t: Option<Complex64>,
}

fn required(v: Option<Complex64>, name: &str, kind: SliceKind) -> Result<Complex64, ParamError> {
    v.ok_or_else(|| ParamError::Malformed(format!("slice {} requires {name}", kind.name())))
}

/// Builds the plane a request addresses. A Julia plane without `b` uses the
/// fixed-critical-point map for `a`.
pub fn plane_kind(kind: SliceKind, args: &SliceArgs) -> Result<PlaneKind, ParamError> {
    let n = check_degree(args.n)?;
    Ok(match kind {
        SliceKind::FixedCrit => PlaneKind::ParameterSlice(SliceSpec::FixedCrit { n }),
        SliceKind::ASlice => PlaneKind::ParameterSlice(SliceSpec::ASlice {
            n,
            b: required(args.b, "b", kind)?,
        }),
        SliceKind::BSlice => PlaneKind::ParameterSlice(SliceSpec::BSlice {
            n,
            a: required(args.a, "a", kind)?,
        }),
        SliceKind::Linear => PlaneKind::ParameterSlice(SliceSpec::Linear {
            n,
            t: required(args.t, "t", kind)?,
        }),
        SliceKind::Julia => {
            let a = required(args.a, "a", kind)?;
            let p = match args.b {
                Some(b) => MapParams::general(n, a, b),
                None => MapParams::subfamily(n, a),
            };
            PlaneKind::DynamicalPlane(p.map_err(|e| ParamError::OutOfRange(e.to_string()))?)
        }
    })
}
