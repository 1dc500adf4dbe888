//! Divergence times from lexical distances.
//!
//! Lexical distance between two separated languages follows
//! `dD/dt = a (1 - D) - b D` with `D(0) = 0`, which integrates to
//! `D(T) = (1 - exp(-T / eps)) / gamma` and inverts to
//! `T(D) = -eps * ln(1 - gamma * D)`, where `eps = 1 / (a + b)` and
//! `gamma = (a + b) / a`.
//!
//! Both directions are evaluated with `ln_1p`/`exp_m1` so that small times
//! and distances keep full relative precision.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{write_tsv, Square};
use crate::metric::DistanceMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChronoError {
    #[error("invalid parameters: epsilon = {epsilon}, gamma = {gamma} (need epsilon > 0 and gamma >= 1)")]
    InvalidParams { epsilon: f64, gamma: f64 },
    #[error("distance {distance} is outside the model domain (gamma * D = {product} >= 1)")]
    Saturated { distance: f64, product: f64 },
    #[error("distance {0} outside [0, 1]")]
    DistanceOutOfRange(f64),
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("invalid anchor (distance {distance}, time {time}): need 0 < distance < 1 and time > 0")]
    InvalidAnchor { distance: f64, time: f64 },
    #[error("anchors are degenerate: {0}")]
    DegenerateAnchors(String),
    #[error("anchors imply gamma < 1 (negative borrowing rate): ratio mismatch {mismatch:e} at gamma = 1")]
    NegativeBorrowing { mismatch: f64 },
    #[error("calibration failed: {0}")]
    CalibrationFailed(String),
    #[error("malformed time matrix: {0}")]
    Malformed(String),
    #[error("distance for `{0}`/`{1}` is undefined; drop or impute it first")]
    UndefinedEntry(String, String),
}

/// Model parameters: `epsilon` in years, `gamma` dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChronoParams {
    epsilon: f64,
    gamma: f64,
}

/// The published calibration: Italian/French at 1600 years and
/// Icelandic/Norwegian at 1100 years give `epsilon = 1750`, `gamma = 1.09`.
pub const PUBLISHED_PROFILE: ChronoParams = ChronoParams {
    epsilon: 1750.0,
    gamma: 1.09,
};

/// Name under which [`PUBLISHED_PROFILE`] is exposed in configuration.
pub const PUBLISHED_PROFILE_NAME: &str = "published-1750-1.09";

impl Default for ChronoParams {
    fn default() -> Self {
        PUBLISHED_PROFILE
    }
}

impl ChronoParams {
    pub fn new(epsilon: f64, gamma: f64) -> Result<Self, ChronoError> {
        if !(epsilon.is_finite() && epsilon > 0.0 && gamma.is_finite() && gamma >= 1.0) {
            return Err(ChronoError::InvalidParams { epsilon, gamma });
        }
        Ok(ChronoParams { epsilon, gamma })
    }

    /// From the mutation rate `a > 0` and borrowing rate `b >= 0` (per year).
    pub fn from_rates(a: f64, b: f64) -> Result<Self, ChronoError> {
        if !(a.is_finite() && a > 0.0 && b.is_finite() && b >= 0.0) {
            return Err(ChronoError::InvalidParams {
                epsilon: 1.0 / (a + b),
                gamma: (a + b) / a,
            });
        }
        ChronoParams::new(1.0 / (a + b), (a + b) / a)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Upper limit `1 / gamma` of the distance as time grows without bound.
    pub fn asymptote(&self) -> f64 {
        1.0 / self.gamma
    }
}

/// Mutation rate `a` and borrowing rate `b`, both per year.
pub fn rates_from_params(p: &ChronoParams) -> (f64, f64) {
    let a = 1.0 / (p.epsilon * p.gamma);
    let b = (p.gamma - 1.0) / (p.epsilon * p.gamma);
    (a, b)
}

/// `T = -epsilon * ln(1 - gamma * D)`. Fails when `gamma * D >= 1`.
pub fn time_from_distance(distance: f64, p: &ChronoParams) -> Result<f64, ChronoError> {
    if !(0.0..=1.0).contains(&distance) {
        return Err(ChronoError::DistanceOutOfRange(distance));
    }
    let product = p.gamma * distance;
    if product >= 1.0 {
        return Err(ChronoError::Saturated { distance, product });
    }
    Ok(-p.epsilon * (-product).ln_1p())
}

/// Fraction of the asymptote used as the saturation ceiling.
pub const SATURATION_MARGIN: f64 = 1e-6;

/// A time estimate that may have been clamped at the model ceiling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeEstimate {
    pub years: f64,
    pub saturated: bool,
}

/// Like [`time_from_distance`], but maps out-of-domain distances to
/// `time_from_distance((1 - 1e-6) / gamma)` and flags them.
pub fn time_from_distance_clamped(distance: f64, p: &ChronoParams) -> Result<TimeEstimate, ChronoError> {
    match time_from_distance(distance, p) {
        Ok(years) => Ok(TimeEstimate {
            years,
            saturated: false,
        }),
        Err(ChronoError::Saturated { .. }) => Ok(TimeEstimate {
            years: saturation_ceiling(p),
            saturated: true,
        }),
        Err(e) => Err(e),
    }
}

/// The flagged value returned for saturated distances.
pub fn saturation_ceiling(p: &ChronoParams) -> f64 {
    let d_max = (1.0 - SATURATION_MARGIN) / p.gamma;
    -p.epsilon * (-(p.gamma * d_max)).ln_1p()
}

/// `D = (1 - exp(-T / epsilon)) / gamma`.
pub fn distance_from_time(years: f64, p: &ChronoParams) -> Result<f64, ChronoError> {
    if years.is_nan() || years < 0.0 {
        return Err(ChronoError::NegativeTime(years));
    }
    Ok(-(-years / p.epsilon).exp_m1() / p.gamma)
}

/// A language pair with a known separation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationAnchor {
    pub distance: f64,
    pub time: f64,
}

impl CalibrationAnchor {
    pub fn new(distance: f64, time: f64) -> Result<Self, ChronoError> {
        let a = CalibrationAnchor { distance, time };
        a.validate()?;
        Ok(a)
    }

    fn validate(&self) -> Result<(), ChronoError> {
        let ok = self.distance > 0.0 && self.distance < 1.0 && self.time > 0.0 && self.time.is_finite();
        if ok {
            Ok(())
        } else {
            Err(ChronoError::InvalidAnchor {
                distance: self.distance,
                time: self.time,
            })
        }
    }
}

/// Bisection stops once the bracket on gamma is narrower than this.
pub const CALIBRATION_BRACKET_WIDTH: f64 = 1e-12;

/// Solves for `(epsilon, gamma)` such that both anchors lie on the curve.
///
/// Gamma is the root of `ln(1 - g D1) / ln(1 - g D2) - T1 / T2` on
/// `[1, 1 / max(D1, D2))`, found by bisection. The ratio grows monotonically
/// in `g`, so a sign change across the bracket is both necessary and
/// sufficient for a unique root.
pub fn calibrate(first: CalibrationAnchor, second: CalibrationAnchor) -> Result<ChronoParams, ChronoError> {
    first.validate()?;
    second.validate()?;
    if first.distance == second.distance || first.time == second.time {
        return Err(ChronoError::DegenerateAnchors(
            "anchors must differ in both distance and time".into(),
        ));
    }
    // far anchor first
    let (far, near) = if first.distance > second.distance {
        (first, second)
    } else {
        (second, first)
    };
    if far.time < near.time {
        return Err(ChronoError::DegenerateAnchors(format!(
            "larger distance {} has the smaller time {} (< {})",
            far.distance, far.time, near.time
        )));
    }
    let target = far.time / near.time;
    let mismatch = |g: f64| (-g * far.distance).ln_1p() / (-g * near.distance).ln_1p() - target;

    let lo_val = mismatch(1.0);
    let gamma = if lo_val.abs() <= 1e-12 * target {
        1.0
    } else if lo_val > 0.0 {
        return Err(ChronoError::NegativeBorrowing { mismatch: lo_val });
    } else {
        let upper = 1.0 / far.distance;
        let mut hi = upper * (1.0 - 1e-15);
        let hi_val = mismatch(hi);
        if !(hi_val > 0.0) {
            return Err(ChronoError::CalibrationFailed(format!(
                "no sign change on gamma in [1, {upper}): mismatch {lo_val:e} at 1, {hi_val:e} at {hi}"
            )));
        }
        let mut lo = 1.0;
        while hi - lo > CALIBRATION_BRACKET_WIDTH {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if mismatch(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let epsilon = -far.time / (-gamma * far.distance).ln_1p();
    ChronoParams::new(epsilon, gamma)
}

/// Symmetric matrix of separation times in years.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeMatrix {
    languages: Vec<String>,
    values: Square<f64>,
    saturated: Square<bool>,
}

/// Elementwise time transform of a distance matrix. Saturated entries take
/// the ceiling value and are flagged; undefined entries are rejected.
pub fn time_matrix(d: &DistanceMatrix, p: &ChronoParams) -> Result<TimeMatrix, ChronoError> {
    let n = d.len();
    let mut values = Square::filled(n, 0.0);
    let mut saturated = Square::filled(n, false);
    for i in 0..n {
        for j in i + 1..n {
            let dist = d
                .get(i, j)
                .ok_or_else(|| ChronoError::UndefinedEntry(d.languages()[i].clone(), d.languages()[j].clone()))?;
            let t = time_from_distance_clamped(dist, p)?;
            values.set_sym(i, j, t.years);
            saturated.set_sym(i, j, t.saturated);
        }
    }
    Ok(TimeMatrix {
        languages: d.languages().to_vec(),
        values,
        saturated,
    })
}

impl TimeMatrix {
    /// Wraps raw years; entries must be finite, nonnegative, symmetric with a
    /// zero diagonal. No entry is flagged saturated.
    pub fn from_values(languages: Vec<String>, values: Square<f64>) -> Result<Self, ChronoError> {
        TimeMatrix::from_bundle(TimeBundle {
            languages,
            values: values.rows(),
            saturated: Vec::new(),
            units: years(),
        })
    }

    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    pub fn len(&self) -> usize {
        self.languages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.languages.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }

    pub fn is_saturated(&self, i: usize, j: usize) -> bool {
        self.saturated.get(i, j)
    }

    pub fn saturated_pairs(&self) -> Vec<(usize, usize)> {
        self.values.pairs().filter(|&(i, j)| self.saturated.get(i, j)).collect()
    }

    /// Years rounded to integers; saturated entries carry a trailing `*`.
    pub fn to_tsv(&self) -> String {
        write_tsv(&self.languages, |i, j| {
            let mark = if self.saturated.get(i, j) { "*" } else { "" };
            format!("{:.0}{mark}", self.values.get(i, j))
        })
    }

    pub fn to_bundle(&self) -> TimeBundle {
        TimeBundle {
            languages: self.languages.clone(),
            values: self.values.rows(),
            saturated: self
                .saturated_pairs()
                .into_iter()
                .map(|(i, j)| [self.languages[i].clone(), self.languages[j].clone()])
                .collect(),
            units: "years".into(),
        }
    }

    pub fn from_bundle(bundle: TimeBundle) -> Result<Self, ChronoError> {
        let malformed = ChronoError::Malformed;
        let n = bundle.languages.len();
        let values = Square::from_rows(bundle.values).ok_or_else(|| malformed("time grid is not square".into()))?;
        if values.size() != n {
            return Err(malformed("label count does not match grid".into()));
        }
        let mut saturated = Square::filled(n, false);
        for [a, b] in &bundle.saturated {
            let i = bundle.languages.iter().position(|l| l == a);
            let j = bundle.languages.iter().position(|l| l == b);
            match (i, j) {
                (Some(i), Some(j)) => saturated.set_sym(i, j, true),
                _ => return Err(malformed(format!("saturated pair names unknown language `{a}`/`{b}`"))),
            }
        }
        for i in 0..n {
            for j in 0..n {
                let v = values.get(i, j);
                if !(v.is_finite() && v >= 0.0) || v != values.get(j, i) || (i == j && v != 0.0) {
                    return Err(malformed(format!("invalid time entry at ({i}, {j})")));
                }
            }
        }
        Ok(TimeMatrix {
            languages: bundle.languages,
            values,
            saturated,
        })
    }
}

/// JSON form of a [`TimeMatrix`], full precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeBundle {
    pub languages: Vec<String>,
    pub values: Vec<Vec<f64>>,
    #[serde(default)]
    pub saturated: Vec<[String; 2]>,
    #[serde(default = "years")]
    pub units: String,
}

fn years() -> String {
    "years".into()
}

/// Parameters file: either `{epsilon, gamma}` or `{anchors: [a, b]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamsSpec {
    Direct { epsilon: f64, gamma: f64 },
    Anchors { anchors: Vec<CalibrationAnchor> },
}

impl ParamsSpec {
    pub fn resolve(&self) -> Result<ChronoParams, ChronoError> {
        match self {
            ParamsSpec::Direct { epsilon, gamma } => ChronoParams::new(*epsilon, *gamma),
            ParamsSpec::Anchors { anchors } => match anchors.as_slice() {
                [a, b] => calibrate(*a, *b),
                other => Err(ChronoError::DegenerateAnchors(format!(
                    "expected exactly 2 anchors, found {}",
                    other.len()
                ))),
            },
        }
    }
}
