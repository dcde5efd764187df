//! Trajectory integration of the canonical equations and trajectory
//! diagnostics (period, orbit family, cavity output).

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    energy_at, flow_at, photon_number_reduced, PhaseState, ReducedParams, POLE_GUARD,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Embedded Dormand–Prince 5(4) with PI step-size control.
    DormandPrince,
    /// Classical fourth-order Runge–Kutta with step `max_step`.
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub method: Method,
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub max_steps: usize,
    /// Number of uniform output intervals over the integration span.
    pub samples: usize,
    /// Also record every accepted internal step.
    pub record_steps: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::DormandPrince,
            rtol: 1e-10,
            atol: 1e-12,
            max_step: 0.01,
            max_steps: 5_000_000,
            samples: 2000,
            record_steps: false,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.rtol) || !positive(self.atol) {
            return Err(Error::InvalidParams("tolerances must be positive".into()));
        }
        if !positive(self.max_step) {
            return Err(Error::InvalidParams("max_step must be positive".into()));
        }
        if self.samples == 0 || self.max_steps == 0 {
            return Err(Error::InvalidParams(
                "samples and max_steps must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Sampled solution. The phase is unwrapped (not reduced mod 2π) so that
/// winding stays visible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    times: Vec<f64>,
    z: Vec<f64>,
    phi: Vec<f64>,
    energies: Vec<f64>,
    photons: Vec<f64>,
    constant_pump: bool,
}

impl Trajectory {
    /// Builds a trajectory from raw samples, evaluating energies and photon
    /// numbers. Times must be strictly monotone.
    pub fn new(
        times: Vec<f64>,
        z: Vec<f64>,
        phi: Vec<f64>,
        params: &ReducedParams,
    ) -> Result<Self> {
        if times.len() != z.len() || times.len() != phi.len() {
            return Err(Error::InvalidParams(
                "sample arrays differ in length".into(),
            ));
        }
        let increasing = times.windows(2).all(|w| w[1] > w[0]);
        let decreasing = times.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(Error::InvalidParams(
                "sample times must be strictly monotone".into(),
            ));
        }
        if let Some(&bad) = z.iter().find(|v| !(v.abs() <= 1.0)) {
            return Err(Error::Domain { z: bad });
        }
        let energies = times
            .iter()
            .zip(z.iter().zip(&phi))
            .map(|(&t, (&z, &phi))| energy_at(z, phi, params, t))
            .collect();
        let photons = times
            .iter()
            .zip(&z)
            .map(|(&t, &z)| photon_number_reduced(z, params, t))
            .collect();
        Ok(Trajectory {
            times,
            z,
            phi,
            energies,
            photons,
            constant_pump: params.pump().is_constant(),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// Unwrapped phase.
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn photons(&self) -> &[f64] {
        &self.photons
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn has_constant_pump(&self) -> bool {
        self.constant_pump
    }

    pub fn last_state(&self) -> Option<PhaseState> {
        let k = self.len().checked_sub(1)?;
        PhaseState::new(self.z[k], self.phi[k]).ok()
    }

    /// `max |H(t) − H(0)|` over the samples.
    pub fn energy_drift(&self) -> f64 {
        let Some(&e0) = self.energies.first() else {
            return 0.0;
        };
        self.energies
            .iter()
            .map(|e| (e - e0).abs())
            .fold(0.0, f64::max)
    }
}

/// Integrates from `t = 0` to `t_end > 0`.
pub fn integrate(
    state0: &PhaseState,
    params: &ReducedParams,
    t_end: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidParams("t_end must be positive".into()));
    }
    integrate_span(state0.z(), state0.phi(), params, 0.0, t_end, config)
}

/// Integrates from `(z0, phi0)` at `t0` to `t1`, which may lie before `t0`.
/// `phi0` is taken as given (unwrapped).
pub fn integrate_span(
    z0: f64,
    phi0: f64,
    params: &ReducedParams,
    t0: f64,
    t1: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    config.validate()?;
    if !(t0.is_finite() && t1.is_finite()) || t0 == t1 {
        return Err(Error::InvalidParams(
            "integration span must be nonempty".into(),
        ));
    }
    flow_at(z0, phi0, params, t0)?;

    let span = t1 - t0;
    let sample_at = |k: usize| {
        if k == config.samples {
            t1
        } else {
            t0 + span * k as f64 / config.samples as f64
        }
    };
    let mut out = Samples::default();
    out.push(t0, [z0, phi0]);

    let mut stepper = Stepper::new(params, config, span.signum());
    let mut t = t0;
    let mut y = [z0, phi0];
    let mut next_sample = 1;
    let mut steps = 0usize;

    while next_sample <= config.samples {
        let target = sample_at(next_sample);
        if steps >= config.max_steps {
            return Err(Error::StepLimitExceeded { t, steps });
        }
        steps += 1;
        let (t_new, y_new) = match stepper.step(t, y, target) {
            Ok(step) => step,
            Err(StepFailure::Pole) => {
                return Err(pole_approach(out, params, t, y[0]));
            }
        };
        t = t_new;
        y = y_new;
        if 1.0 - y[0] * y[0] < POLE_GUARD {
            out.push(t, y);
            return Err(pole_approach(out, params, t, y[0]));
        }
        let landed = t == target;
        if landed || config.record_steps {
            out.push(t, y);
        }
        if landed {
            next_sample += 1;
        }
    }
    out.into_trajectory(params)
}

fn pole_approach(out: Samples, params: &ReducedParams, t: f64, z: f64) -> Error {
    match out.into_trajectory(params) {
        Ok(partial) => Error::PoleApproach {
            t,
            z,
            partial: Box::new(partial),
        },
        Err(err) => err,
    }
}

#[derive(Default)]
struct Samples {
    times: Vec<f64>,
    z: Vec<f64>,
    phi: Vec<f64>,
}

impl Samples {
    fn push(&mut self, t: f64, y: [f64; 2]) {
        self.times.push(t);
        self.z.push(y[0].clamp(-1.0, 1.0));
        self.phi.push(y[1]);
    }

    fn into_trajectory(self, params: &ReducedParams) -> Result<Trajectory> {
        Trajectory::new(self.times, self.z, self.phi, params)
    }
}

enum StepFailure {
    Pole,
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

struct Stepper<'a> {
    params: &'a ReducedParams,
    config: &'a IntegratorConfig,
    direction: f64,
    /// Step-size proposal, always positive.
    h: f64,
    err_old: f64,
}

impl<'a> Stepper<'a> {
    fn new(params: &'a ReducedParams, config: &'a IntegratorConfig, direction: f64) -> Self {
        let h = match config.method {
            Method::DormandPrince => config.max_step.min(1e-3),
            Method::Rk4 => config.max_step,
        };
        Stepper {
            params,
            config,
            direction,
            h,
            err_old: 1e-4,
        }
    }

    fn rhs(&self, t: f64, y: [f64; 2]) -> std::result::Result<[f64; 2], StepFailure> {
        flow_at(y[0], y[1], self.params, t)
            .map(|(a, b)| [a, b])
            .map_err(|_| StepFailure::Pole)
    }

    /// Advances from `t` towards `target` without overshooting it.
    fn step(
        &mut self,
        t: f64,
        y: [f64; 2],
        target: f64,
    ) -> std::result::Result<(f64, [f64; 2]), StepFailure> {
        match self.config.method {
            Method::Rk4 => self.rk4_step(t, y, target),
            Method::DormandPrince => self.dopri_step(t, y, target),
        }
    }

    fn clip(&self, t: f64, target: f64, h: f64) -> (f64, f64) {
        let remaining = (target - t).abs();
        if h >= remaining {
            (remaining, target)
        } else {
            (h, t + self.direction * h)
        }
    }

    fn rk4_step(
        &mut self,
        t: f64,
        y: [f64; 2],
        target: f64,
    ) -> std::result::Result<(f64, [f64; 2]), StepFailure> {
        let (h, t_new) = self.clip(t, target, self.h);
        let h = self.direction * h;
        let add = |y: [f64; 2], k: [f64; 2], s: f64| [y[0] + s * k[0], y[1] + s * k[1]];
        let k1 = self.rhs(t, y)?;
        let k2 = self.rhs(t + 0.5 * h, add(y, k1, 0.5 * h))?;
        let k3 = self.rhs(t + 0.5 * h, add(y, k2, 0.5 * h))?;
        let k4 = self.rhs(t + h, add(y, k3, h))?;
        let y_new = [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        Ok((t_new, y_new))
    }

    fn dopri_step(
        &mut self,
        t: f64,
        y: [f64; 2],
        target: f64,
    ) -> std::result::Result<(f64, [f64; 2]), StepFailure> {
        let min_step = 1e-14 * t.abs().max(1.0);
        loop {
            let proposal = self.h.min(self.config.max_step);
            let (h_abs, t_new) = self.clip(t, target, proposal);
            let clipped = h_abs < proposal;
            if h_abs < min_step && !clipped {
                return Err(StepFailure::Pole);
            }
            let h = self.direction * h_abs;

            let Some((y_new, err)) = self.dopri_trial(t, y, h) else {
                // a stage left the admissible region: shrink and retry
                self.h = 0.25 * h_abs;
                if self.h < min_step {
                    return Err(StepFailure::Pole);
                }
                continue;
            };

            let fac11 = err.powf(0.2 - BETA * 0.75);
            if err <= 1.0 {
                let fac =
                    (fac11 / self.err_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let h_next = (h_abs / fac).min(self.config.max_step);
                self.err_old = err.max(1e-4);
                // a step shortened to hit an output time should not shrink the next one
                self.h = if clipped {
                    h_next.max(proposal)
                } else {
                    h_next
                };
                return Ok((t_new, y_new));
            }
            let fac = (fac11 / SAFETY).min(1.0 / FAC_MIN);
            self.h = h_abs / fac;
        }
    }

    fn dopri_trial(&self, t: f64, y: [f64; 2], h: f64) -> Option<([f64; 2], f64)> {
        let mut k = [[0.0; 2]; 7];
        for stage in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let a = A[stage][j];
                ys[0] += h * a * kj[0];
                ys[1] += h * a * kj[1];
            }
            k[stage] = self.rhs(t + C[stage] * h, ys).ok()?;
        }
        let mut y_new = y;
        let mut err = [0.0; 2];
        for (s, ks) in k.iter().enumerate() {
            let b = if s < 6 { A[6][s] } else { 0.0 };
            for i in 0..2 {
                y_new[i] += h * b * ks[i];
                err[i] += h * E[s] * ks[i];
            }
        }
        let norm = (0..2)
            .map(|i| {
                let mut size = y[i].abs().max(y_new[i].abs());
                if i == 1 {
                    // the unwrapped phase grows without bound on running
                    // orbits; its relative tolerance refers to one turn
                    size = size.min(std::f64::consts::PI);
                }
                let scale = self.config.atol + self.config.rtol * size;
                (err[i] / scale).powi(2)
            })
            .sum::<f64>()
            / 2.0;
        Some((y_new, norm.sqrt()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodEstimate {
    pub period: f64,
    /// `(max − min) / mean` of the individual cycle lengths.
    pub spread: f64,
    pub cycles: usize,
}

/// Minimum z excursion for a trajectory to count as oscillating.
const MIN_AMPLITUDE: f64 = 1e-9;
/// Cycle-length spread above which a trajectory is not periodic.
const MAX_PERIOD_SPREAD: f64 = 0.01;

/// Period from successive upward crossings of the mean z level.
pub fn estimate_period(traj: &Trajectory) -> Result<PeriodEstimate> {
    let crossings = mean_level_crossings(traj)?;
    if crossings.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} upward crossings of the mean level, need at least 3",
            crossings.len()
        )));
    }
    let cycles: Vec<f64> = crossings.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let period = cycles.iter().sum::<f64>() / cycles.len() as f64;
    let (lo, hi) = cycles
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
            (lo.min(c), hi.max(c))
        });
    let spread = (hi - lo) / period;
    if spread > MAX_PERIOD_SPREAD {
        return Err(Error::NotPeriodic { spread });
    }
    Ok(PeriodEstimate {
        period,
        spread,
        cycles: cycles.len(),
    })
}

/// Times at which z rises through its mean, refined by cubic interpolation
/// over the four surrounding samples.
fn mean_level_crossings(traj: &Trajectory) -> Result<Vec<f64>> {
    let z = traj.z();
    let t = traj.times();
    if z.len() < 4 {
        return Err(Error::InsufficientData("fewer than four samples".into()));
    }
    let (lo, hi) = z
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if hi - lo < MIN_AMPLITUDE {
        return Err(Error::InsufficientData("z does not oscillate".into()));
    }
    let level = z.iter().sum::<f64>() / z.len() as f64;
    let mut out = Vec::new();
    for k in 0..z.len() - 1 {
        if z[k] < level && z[k + 1] >= level {
            out.push(refine_crossing(t, z, k, level));
        }
    }
    Ok(out)
}

fn refine_crossing(t: &[f64], z: &[f64], k: usize, level: f64) -> f64 {
    let linear = t[k] + (level - z[k]) / (z[k + 1] - z[k]) * (t[k + 1] - t[k]);
    if k == 0 || k + 2 >= z.len() {
        return linear;
    }
    let nodes = [k - 1, k, k + 1, k + 2];
    let cubic = |x: f64| {
        nodes
            .iter()
            .map(|&i| {
                let weight: f64 = nodes
                    .iter()
                    .filter(|&&j| j != i)
                    .map(|&j| (x - t[j]) / (t[i] - t[j]))
                    .product();
                weight * z[i]
            })
            .sum::<f64>()
            - level
    };
    let (mut a, mut b) = (t[k], t[k + 1]);
    let mut fa = cubic(a);
    if fa * cubic(b) > 0.0 {
        return linear;
    }
    for _ in 0..60 {
        let mid = 0.5 * (a + b);
        let fm = cubic(mid);
        if (fm >= 0.0) == (fa >= 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModeLabel {
    ZeroPhaseOscillation,
    PiPhaseOscillation,
    RunningPhase,
    SelfTrappedZeroPhase,
    SelfTrappedPiPhase,
}

impl ModeLabel {
    fn is_symmetric_oscillation(self) -> bool {
        matches!(
            self,
            ModeLabel::ZeroPhaseOscillation | ModeLabel::PiPhaseOscillation
        )
    }
}

/// `|⟨z⟩|` above which a non-crossing orbit counts as self-trapped.
pub const TRAPPING_THRESHOLD: f64 = 0.1;
/// Orbit energies this close to a separatrix level are not classified.
const SEPARATRIX_TOLERANCE: f64 = 1e-9;

/// Labels the orbit family of a trajectory.
///
/// The trajectory heuristic (winding, libration centre of φ, mean of z and whether
/// z changes sign) is cross-checked against the orbit energy relative to the
/// separatrix that continues the `(0, π)` saddle of the bare junction: an
/// orbit above it cannot be a zero-phase oscillation, and for an untilted
/// junction an orbit below it must be one of the two symmetric oscillations.
/// Disagreement yields [`Error::Unclassified`].
pub fn classify_mode(
    traj: &Trajectory,
    params: &ReducedParams,
    separatrix_energies: &[f64],
) -> Result<ModeLabel> {
    let phi = traj.phi();
    let z = traj.z();
    if traj.len() < 4 {
        return Err(Error::InsufficientData("fewer than four samples".into()));
    }
    let winding = phi[phi.len() - 1] - phi[0];
    let monotone = phi.windows(2).all(|w| w[1] >= w[0]) || phi.windows(2).all(|w| w[1] <= w[0]);

    let label = if winding.abs() >= TAU {
        if !monotone {
            return Err(Error::Unclassified(
                "phase winds by 2π but not monotonically".into(),
            ));
        }
        ModeLabel::RunningPhase
    } else {
        let crossings = mean_level_crossings(traj)?;
        if crossings.len() < 2 {
            return Err(Error::InsufficientData(
                "trajectory covers less than one period".into(),
            ));
        }
        let n = z.len() as f64;
        // the libration centre sits midway between the phase turning points
        let (lo, hi) = phi
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| {
                (lo.min(p), hi.max(p))
            });
        let centre_cos = (0.5 * (lo + hi)).cos();
        let mean_z = z.iter().sum::<f64>() / n;
        let crosses_zero = z.iter().any(|&v| v < 0.0) && z.iter().any(|&v| v > 0.0);
        let trapped = mean_z.abs() > TRAPPING_THRESHOLD && !crosses_zero;
        if centre_cos.abs() < 1e-6 {
            return Err(Error::Unclassified(
                "phase average is balanced between 0 and π".into(),
            ));
        }
        match (centre_cos > 0.0, trapped) {
            (true, false) => ModeLabel::ZeroPhaseOscillation,
            (false, false) => ModeLabel::PiPhaseOscillation,
            (true, true) => ModeLabel::SelfTrappedZeroPhase,
            (false, true) => ModeLabel::SelfTrappedPiPhase,
        }
    };

    if !traj.has_constant_pump() || separatrix_energies.is_empty() {
        return Ok(label);
    }
    let energy = traj.energies()[0];
    if let Some(s) = separatrix_energies
        .iter()
        .find(|&&s| (energy - s).abs() <= SEPARATRIX_TOLERANCE)
    {
        return Err(Error::Unclassified(format!(
            "orbit energy {energy} lies on the separatrix level {s}"
        )));
    }
    let symmetric_saddle = energy_at(0.0, std::f64::consts::PI, params, 0.0);
    let separatrix = separatrix_energies
        .iter()
        .copied()
        .min_by(|a, b| {
            (a - symmetric_saddle)
                .abs()
                .total_cmp(&(b - symmetric_saddle).abs())
        })
        .expect("nonempty");
    let above = energy > separatrix;
    if above && label == ModeLabel::ZeroPhaseOscillation {
        return Err(Error::Unclassified(format!(
            "energy {energy} exceeds the separatrix {separatrix} but the orbit looks like a zero-phase oscillation"
        )));
    }
    if !above && params.tilt() == 0.0 && !label.is_symmetric_oscillation() {
        return Err(Error::Unclassified(format!(
            "energy {energy} lies below the separatrix {separatrix} but the orbit is labeled {label:?}"
        )));
    }
    Ok(label)
}

/// Reduced photon number along the trajectory.
pub fn photon_series(traj: &Trajectory, params: &ReducedParams) -> Vec<f64> {
    traj.times()
        .iter()
        .zip(traj.z())
        .map(|(&t, &z)| photon_number_reduced(z, params, t))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PumpSchedule;
    use std::f64::consts::PI;

    fn coupled() -> ReducedParams {
        ReducedParams::new(3.0, 0.02, -0.65, 0.07).unwrap()
    }

    fn synthetic(period: f64, n: usize, t_end: f64) -> Trajectory {
        let p = ReducedParams::uncoupled(1.0).unwrap();
        let times: Vec<f64> = (0..=n).map(|k| t_end * k as f64 / n as f64).collect();
        let z = times
            .iter()
            .map(|t| 0.3 * (TAU * t / period).sin())
            .collect();
        let phi = times
            .iter()
            .map(|t| 0.2 * (TAU * t / period).cos())
            .collect();
        Trajectory::new(times, z, phi, &p).unwrap()
    }

    #[test]
    fn harmonic_signal_period() {
        let est = estimate_period(&synthetic(2.5, 2000, 20.0)).unwrap();
        assert!((est.period - 2.5).abs() < 1e-6);
        assert!(est.cycles >= 6);
    }

    #[test]
    fn constant_signal_has_no_period() {
        let p = ReducedParams::uncoupled(1.0).unwrap();
        let times: Vec<f64> = (0..100).map(|k| k as f64).collect();
        let traj = Trajectory::new(times, vec![0.1; 100], vec![0.0; 100], &p).unwrap();
        assert!(matches!(
            estimate_period(&traj),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn chirp_is_not_periodic() {
        let p = ReducedParams::uncoupled(1.0).unwrap();
        let times: Vec<f64> = (0..=4000).map(|k| k as f64 * 0.01).collect();
        let z = times.iter().map(|t| 0.3 * (t * t).sin()).collect();
        let phi = vec![0.0; times.len()];
        let traj = Trajectory::new(times, z, phi, &p).unwrap();
        assert!(matches!(
            estimate_period(&traj),
            Err(Error::NotPeriodic { .. })
        ));
    }

    #[test]
    fn trajectory_rejects_bad_samples() {
        let p = ReducedParams::uncoupled(1.0).unwrap();
        assert!(Trajectory::new(vec![0.0, 0.0], vec![0.0; 2], vec![0.0; 2], &p).is_err());
        assert!(Trajectory::new(vec![0.0, 1.0], vec![0.0; 3], vec![0.0; 2], &p).is_err());
        assert!(Trajectory::new(vec![0.0, 1.0], vec![0.0, 1.5], vec![0.0; 2], &p).is_err());
    }

    #[test]
    fn small_oscillation_period() {
        let p = ReducedParams::uncoupled(3.0).unwrap();
        let s0 = PhaseState::new(1e-3, 0.0).unwrap();
        let traj = integrate(&s0, &p, 10.0 * PI, &IntegratorConfig::default()).unwrap();
        let est = estimate_period(&traj).unwrap();
        assert!((est.period / PI - 1.0).abs() < 5e-3);
    }

    #[test]
    fn output_grid_is_uniform() {
        let s0 = PhaseState::new(-0.75, 0.0).unwrap();
        let config = IntegratorConfig {
            samples: 100,
            ..Default::default()
        };
        let traj = integrate(&s0, &coupled(), 5.0, &config).unwrap();
        assert_eq!(traj.len(), 101);
        assert_eq!(traj.times()[100], 5.0);
        for (k, t) in traj.times().iter().enumerate() {
            assert!((t - 0.05 * k as f64).abs() < 1e-12);
        }
        assert_eq!(traj.photons(), photon_series(&traj, &coupled()).as_slice());
    }

    #[test]
    fn recorded_steps_include_samples() {
        let s0 = PhaseState::new(-0.75, 0.0).unwrap();
        let config = IntegratorConfig {
            samples: 10,
            record_steps: true,
            ..Default::default()
        };
        let traj = integrate(&s0, &coupled(), 1.0, &config).unwrap();
        assert!(traj.len() > 11);
        assert!(traj.times().windows(2).all(|w| w[1] > w[0]));
        for k in 0..=10 {
            let t = 0.1 * k as f64;
            assert!(traj.times().iter().any(|&s| (s - t).abs() < 1e-12));
        }
    }

    #[test]
    fn rk4_agrees_with_dopri() {
        let s0 = PhaseState::new(0.3, 0.2).unwrap();
        let dp = integrate(&s0, &coupled(), 5.0, &IntegratorConfig::default()).unwrap();
        let rk = integrate(
            &s0,
            &coupled(),
            5.0,
            &IntegratorConfig {
                method: Method::Rk4,
                max_step: 1e-3,
                ..Default::default()
            },
        )
        .unwrap();
        let (a, b) = (dp.last_state().unwrap(), rk.last_state().unwrap());
        assert!((a.z() - b.z()).abs() < 1e-9);
        assert!((a.phi() - b.phi()).abs() < 1e-9);
    }

    #[test]
    fn time_dependent_pump_integrates() {
        let pump = PumpSchedule::LinearRamp {
            from: 0.0,
            to: 1.0,
            t_start: 0.0,
            t_end: 10.0,
        };
        let p = ReducedParams::with_schedule(3.0, 0.02, -0.65, 0.07, pump).unwrap();
        let s0 = PhaseState::new(-0.75, 0.0).unwrap();
        let traj = integrate(&s0, &p, 20.0, &IntegratorConfig::default()).unwrap();
        assert!(!traj.has_constant_pump());
        assert_eq!(traj.photons()[0], 0.0);
        // energy is not conserved while the pump ramps
        assert!(traj.energy_drift() > 1e-6);
    }

    #[test]
    fn pole_start_is_rejected() {
        let s0 = PhaseState::new(1.0, 0.0).unwrap();
        assert!(matches!(
            integrate(&s0, &coupled(), 1.0, &IntegratorConfig::default()),
            Err(Error::PoleSingularity { .. })
        ));
    }

    #[test]
    fn step_limit() {
        let s0 = PhaseState::new(0.3, 0.0).unwrap();
        let config = IntegratorConfig {
            max_steps: 10,
            ..Default::default()
        };
        assert!(matches!(
            integrate(&s0, &coupled(), 10.0, &config),
            Err(Error::StepLimitExceeded { .. })
        ));
    }

    #[test]
    fn bad_config() {
        let s0 = PhaseState::new(0.3, 0.0).unwrap();
        let config = IntegratorConfig {
            rtol: 0.0,
            ..Default::default()
        };
        assert!(integrate(&s0, &coupled(), 1.0, &config).is_err());
        assert!(integrate(&s0, &coupled(), -1.0, &IntegratorConfig::default()).is_err());
    }

    #[test]
    fn pi_oscillation_near_maximum() {
        let p = ReducedParams::uncoupled(0.5).unwrap();
        let s0 = PhaseState::new(0.05, PI).unwrap();
        let traj = integrate(&s0, &p, 40.0, &IntegratorConfig::default()).unwrap();
        assert_eq!(
            classify_mode(&traj, &p, &[]).unwrap(),
            ModeLabel::PiPhaseOscillation
        );
    }

    #[test]
    fn pi_trapping_near_shifted_maximum() {
        let p = ReducedParams::uncoupled(3.0).unwrap();
        let s0 = PhaseState::new(0.9, PI).unwrap();
        let traj = integrate(&s0, &p, 40.0, &IntegratorConfig::default()).unwrap();
        assert_eq!(
            classify_mode(&traj, &p, &[1.0]).unwrap(),
            ModeLabel::SelfTrappedPiPhase
        );
    }

    #[test]
    fn fixed_point_cannot_be_classified() {
        let p = ReducedParams::uncoupled(3.0).unwrap();
        let s0 = PhaseState::new(0.0, 0.0).unwrap();
        let traj = integrate(&s0, &p, 10.0, &IntegratorConfig::default()).unwrap();
        assert!(matches!(
            classify_mode(&traj, &p, &[1.0]),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn conflicting_energy_is_unclassified() {
        // a symmetric zero-phase oscillation, checked against a bogus low separatrix
        let p = ReducedParams::uncoupled(3.0).unwrap();
        let s0 = PhaseState::new(0.3, 0.0).unwrap();
        let traj = integrate(&s0, &p, 20.0, &IntegratorConfig::default()).unwrap();
        assert_eq!(
            classify_mode(&traj, &p, &[1.0]).unwrap(),
            ModeLabel::ZeroPhaseOscillation
        );
        assert!(matches!(
            classify_mode(&traj, &p, &[-0.9]),
            Err(Error::Unclassified(_))
        ));
    }
}
