//! Stationary points of the effective Hamiltonian.
//!
//! `∂H/∂φ = √(1−z²) sin φ` vanishes only on the lines `φ = 0` and `φ = π`,
//! so every stationary point is a root of the restricted gradient
//!
//! ```text
//! f₁(z) = r z + z/√(1−z²) + Ã/((z−B)² + C²)    (φ = 0)
//! f₂(z) = r z − z/√(1−z²) + Ã/((z−B)² + C²)    (φ = π)
//! ```
//!
//! The sign of `f′` at a simple root decides its Morse index, because the
//! mixed second derivative vanishes on both lines and `∂²H/∂φ²` is `+√(1−z²)`
//! at `φ = 0` and `−√(1−z²)` at `φ = π`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{energy_at, PhaseState, ReducedParams, POLE_GUARD};

/// The bracketing grid stays this far from the poles.
pub const EDGE_MARGIN: f64 = 1e-6;
pub const DEFAULT_GRID_N: usize = 20_000;
pub const MAX_GRID_N: usize = 320_000;
pub const MIN_GRID_N: usize = 1_000;
/// Roots with `|f′|` below this are reported as fold points.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;
const MAX_BISECTIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Branch {
    /// φ = 0
    Zero,
    /// φ = π
    Pi,
}

impl Branch {
    pub fn phase(self) -> f64 {
        match self {
            Branch::Zero => 0.0,
            Branch::Pi => PI,
        }
    }

    fn sign(self) -> f64 {
        match self {
            Branch::Zero => 1.0,
            Branch::Pi => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::Zero => "zero",
            Branch::Pi => "pi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Kind {
    Minimum,
    Saddle,
    Maximum,
}

impl Kind {
    /// Morse classification from the branch and the sign of `f′`.
    pub fn from_derivative(branch: Branch, derivative: f64) -> Kind {
        match (branch, derivative > 0.0) {
            (Branch::Zero, true) => Kind::Minimum,
            (Branch::Zero, false) => Kind::Saddle,
            (Branch::Pi, true) => Kind::Saddle,
            (Branch::Pi, false) => Kind::Maximum,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Minimum => "minimum",
            Kind::Saddle => "saddle",
            Kind::Maximum => "maximum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryPoint {
    pub z: f64,
    pub branch: Branch,
    pub kind: Kind,
    pub energy: f64,
    pub f_derivative: f64,
}

impl StationaryPoint {
    pub fn state(&self) -> PhaseState {
        PhaseState::new(self.z, self.branch.phase()).expect("stationary points lie inside (-1, 1)")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MorseCount {
    pub minima: usize,
    pub saddles: usize,
    pub maxima: usize,
}

impl MorseCount {
    pub fn from_points(points: &[StationaryPoint]) -> Self {
        let mut counts = MorseCount::default();
        for p in points {
            match p.kind {
                Kind::Minimum => counts.minima += 1,
                Kind::Saddle => counts.saddles += 1,
                Kind::Maximum => counts.maxima += 1,
            }
        }
        counts
    }

    pub fn euler_sum(&self) -> i64 {
        self.minima as i64 - self.saddles as i64 + self.maxima as i64
    }

    pub fn total(&self) -> usize {
        self.minima + self.saddles + self.maxima
    }
}

/// Restricted gradient `∂H/∂z` on the given branch at the reference pump.
pub fn branch_gradient(z: f64, branch: Branch, params: &ReducedParams) -> Result<f64> {
    let gap = 1.0 - z * z;
    if !(gap >= POLE_GUARD) {
        return Err(Error::PoleSingularity { z });
    }
    let dz = z - params.b();
    let c = params.c();
    Ok(params.r() * z + branch.sign() * z / gap.sqrt() + params.tilt() / (dz * dz + c * c))
}

/// Derivative of [`branch_gradient`] with respect to `z`.
pub fn branch_gradient_derivative(z: f64, branch: Branch, params: &ReducedParams) -> f64 {
    let gap = 1.0 - z * z;
    let dz = z - params.b();
    let c = params.c();
    let denom = dz * dz + c * c;
    params.r() + branch.sign() / (gap * gap.sqrt()) - 2.0 * params.tilt() * dz / (denom * denom)
}

pub fn f1(z: f64, params: &ReducedParams) -> Result<f64> {
    branch_gradient(z, Branch::Zero, params)
}

pub fn f2(z: f64, params: &ReducedParams) -> Result<f64> {
    branch_gradient(z, Branch::Pi, params)
}

/// Brackets sign changes of `f₁` and `f₂` on a uniform grid of `grid_n`
/// cells and refines each by bisection. Points come back sorted by
/// `(branch, z)`. Fails with [`Error::DegenerateRoot`] at a fold.
pub fn find_stationary_points(
    params: &ReducedParams,
    grid_n: usize,
) -> Result<Vec<StationaryPoint>> {
    let (points, degenerate) = scan_stationary_points(params, grid_n)?;
    if let Some(&k) = degenerate.first() {
        let p = &points[k];
        return Err(Error::DegenerateRoot {
            branch: p.branch,
            z: p.z,
            derivative: p.f_derivative,
        });
    }
    Ok(points)
}

/// Like [`find_stationary_points`], but returns degenerate roots as indices
/// into the point list instead of failing.
pub fn scan_stationary_points(
    params: &ReducedParams,
    grid_n: usize,
) -> Result<(Vec<StationaryPoint>, Vec<usize>)> {
    if grid_n < MIN_GRID_N {
        return Err(Error::InvalidParams(format!(
            "grid_n = {grid_n} is below the minimum of {MIN_GRID_N}"
        )));
    }
    let mut points = Vec::new();
    let mut degenerate = Vec::new();
    for branch in [Branch::Zero, Branch::Pi] {
        for z in branch_roots(params, branch, grid_n)? {
            let derivative = branch_gradient_derivative(z, branch, params);
            if !(derivative.abs() >= DEGENERACY_THRESHOLD) {
                degenerate.push(points.len());
            }
            points.push(StationaryPoint {
                z,
                branch,
                kind: Kind::from_derivative(branch, derivative),
                energy: energy_at(z, branch.phase(), params, 0.0),
                f_derivative: derivative,
            });
        }
    }
    Ok((points, degenerate))
}

fn branch_roots(params: &ReducedParams, branch: Branch, grid_n: usize) -> Result<Vec<f64>> {
    let lo = -1.0 + EDGE_MARGIN;
    let span = 2.0 - 2.0 * EDGE_MARGIN;
    let node = |i: usize| {
        if i == grid_n {
            1.0 - EDGE_MARGIN
        } else {
            lo + span * i as f64 / grid_n as f64
        }
    };
    let f = |z: f64| branch_gradient(z, branch, params);

    let mut roots = Vec::new();
    let mut a = node(0);
    let mut fa = f(a)?;
    for i in 1..=grid_n {
        let b = node(i);
        let fb = f(b)?;
        if (fa >= 0.0) != (fb >= 0.0) {
            roots.push(bisect(&f, a, fa, b)?);
        }
        a = b;
        fa = fb;
    }
    Ok(roots)
}

/// Bisection on `[a, b]` where `f(a)` and `f(b)` differ in sign (with zero
/// counted as positive). Stops at the iteration cap or when the bracket
/// can no longer be split in floating point.
fn bisect<F>(f: &F, mut a: f64, fa: f64, mut b: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let a_positive = fa >= 0.0;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if (f(mid)? >= 0.0) == a_positive {
            a = mid;
        } else {
            b = mid;
        }
    }
    let (ra, rb) = (f(a)?.abs(), f(b)?.abs());
    Ok(if ra <= rb { a } else { b })
}

/// Counts minima, saddles, and maxima and checks `m₀ − m₁ + m₂ = 2`.
pub fn euler_check(points: &[StationaryPoint]) -> Result<MorseCount> {
    let counts = MorseCount::from_points(points);
    if counts.euler_sum() == 2 {
        Ok(counts)
    } else {
        Err(Error::EulerViolation { counts })
    }
}

/// Result of [`analyze_stationary_points`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryAnalysis {
    pub points: Vec<StationaryPoint>,
    pub counts: MorseCount,
    /// Grid size at which the Euler relation was first satisfied.
    pub grid_n: usize,
}

/// Root search plus Euler check, doubling the grid up to [`MAX_GRID_N`]
/// while the relation fails.
pub fn analyze_stationary_points(
    params: &ReducedParams,
    grid_n: usize,
) -> Result<StationaryAnalysis> {
    let mut n = grid_n;
    loop {
        let points = find_stationary_points(params, n)?;
        match euler_check(&points) {
            Ok(counts) => {
                return Ok(StationaryAnalysis {
                    points,
                    counts,
                    grid_n: n,
                })
            }
            Err(err) if n * 2 > MAX_GRID_N => return Err(err),
            Err(_) => n *= 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UncoupledPoints {
    pub points: Vec<StationaryPoint>,
    /// Set at `r = 1`, where `(0, π)` is a degenerate critical point.
    pub degenerate: bool,
}

/// Closed-form stationary points of the bare junction (`Ã = 0`).
pub fn uncoupled_analytic(r: f64) -> Result<UncoupledPoints> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::InvalidParams(
            "r must be finite and nonnegative".into(),
        ));
    }
    let mut points = vec![StationaryPoint {
        z: 0.0,
        branch: Branch::Zero,
        kind: Kind::Minimum,
        energy: -1.0,
        f_derivative: r + 1.0,
    }];
    if r <= 1.0 {
        points.push(StationaryPoint {
            z: 0.0,
            branch: Branch::Pi,
            kind: Kind::Maximum,
            energy: 1.0,
            f_derivative: r - 1.0,
        });
    } else {
        let z = (r * r - 1.0).sqrt() / r;
        let energy = 0.5 * r + 0.5 / r;
        let f_derivative = r * (1.0 - r * r);
        let maximum = |z| StationaryPoint {
            z,
            branch: Branch::Pi,
            kind: Kind::Maximum,
            energy,
            f_derivative,
        };
        points.push(maximum(-z));
        points.push(StationaryPoint {
            z: 0.0,
            branch: Branch::Pi,
            kind: Kind::Saddle,
            energy: 1.0,
            f_derivative: r - 1.0,
        });
        points.push(maximum(z));
    }
    Ok(UncoupledPoints {
        points,
        degenerate: r == 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepParam {
    R,
    Tilt,
    B,
    C,
}

impl SweepParam {
    pub fn apply(self, params: &ReducedParams, value: f64) -> Result<ReducedParams> {
        match self {
            SweepParam::R => params.with_r(value),
            SweepParam::Tilt => params.with_tilt(value),
            SweepParam::B => params.with_b(value),
            SweepParam::C => params.with_c(value),
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r" => Ok(SweepParam::R),
            "tilt" | "a_tilde" | "Ã" => Ok(SweepParam::Tilt),
            "b" | "B" => Ok(SweepParam::B),
            "c" | "C" => Ok(SweepParam::C),
            other => Err(Error::InvalidParams(format!(
                "unknown sweep parameter {other:?}; expected r, tilt, b or c"
            ))),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::R => "r",
            SweepParam::Tilt => "tilt",
            SweepParam::B => "b",
            SweepParam::C => "c",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub counts: Option<MorseCount>,
    pub euler_ok: bool,
    pub points: Vec<StationaryPoint>,
    /// Why the row is unreliable (degenerate root, Euler violation, invalid value).
    pub flag: Option<String>,
}

/// Stationary-point analysis at `steps` evenly spaced values of one
/// parameter. Failing rows are flagged rather than dropped.
pub fn bifurcation_sweep(
    params: &ReducedParams,
    vary: SweepParam,
    range: (f64, f64),
    steps: usize,
    grid_n: usize,
) -> Result<Vec<SweepRow>> {
    if steps < 2 {
        return Err(Error::InvalidParams(
            "a sweep needs at least two steps".into(),
        ));
    }
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidParams("sweep range must be finite".into()));
    }
    let values: Vec<f64> = (0..steps)
        .map(|i| {
            if i == steps - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (steps - 1) as f64
            }
        })
        .collect();
    let mut rows: Vec<SweepRow> = values
        .par_iter()
        .map(|&value| sweep_row(params, vary, value, grid_n))
        .collect();
    rows.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(rows)
}

fn sweep_row(params: &ReducedParams, vary: SweepParam, value: f64, grid_n: usize) -> SweepRow {
    let outcome = vary
        .apply(params, value)
        .and_then(|p| analyze_stationary_points(&p, grid_n));
    match outcome {
        Ok(analysis) => SweepRow {
            value,
            counts: Some(analysis.counts),
            euler_ok: true,
            points: analysis.points,
            flag: None,
        },
        Err(Error::EulerViolation { counts }) => SweepRow {
            value,
            counts: Some(counts),
            euler_ok: false,
            points: Vec::new(),
            flag: Some("euler_violation".into()),
        },
        Err(Error::DegenerateRoot { .. }) => SweepRow {
            value,
            counts: None,
            euler_ok: false,
            points: Vec::new(),
            flag: Some("degenerate_root".into()),
        },
        Err(err) => SweepRow {
            value,
            counts: None,
            euler_ok: false,
            points: Vec::new(),
            flag: Some(err.to_string()),
        },
    }
}
