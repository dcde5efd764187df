//! Domain types and pointwise evaluation of the reduced mean-field model.
//!
//! The junction state is the canonical pair `(z, φ)`: population imbalance
//! `z = (N₁ − N₂)/N` and relative phase `φ = θ₂ − θ₁`. Time is measured in
//! units of `1/(2Ω)`. The adiabatically eliminated cavity field enters only
//! through a Lorentzian in `z`, which produces the arctan tilt in the
//! effective Hamiltonian
//!
//! ```text
//! H(z, φ, t) = −√(1−z²) cos φ + r z²/2 + s (A(t)²/C) arctan((z−B)/C)
//! ```

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// States with `1 − z² < POLE_GUARD` are rejected by the flow.
pub const POLE_GUARD: f64 = 1e-12;

/// Laboratory-frame parameters, all frequencies in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Tunneling matrix element Ω.
    pub tunneling: f64,
    /// On-site interaction V per atom pair.
    pub interaction: f64,
    pub atom_number: u64,
    /// Light shift per photon U₀. Derived from `bare_coupling` and
    /// `atomic_frequency` when absent.
    #[serde(default)]
    pub light_shift: Option<f64>,
    #[serde(default)]
    pub bare_coupling: Option<f64>,
    #[serde(default)]
    pub atomic_frequency: Option<f64>,
    /// Mode overlap J₁ of the left condensate.
    pub overlap_left: f64,
    /// Mode overlap J₂ of the right condensate.
    pub overlap_right: f64,
    pub cavity_frequency: f64,
    pub pump_frequency: f64,
    /// Cavity loss rate κ.
    pub loss_rate: f64,
    /// Pump amplitude η (real, nonnegative).
    pub pump_amplitude: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.tunneling,
            self.interaction,
            self.overlap_left,
            self.overlap_right,
            self.cavity_frequency,
            self.pump_frequency,
            self.loss_rate,
            self.pump_amplitude,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(invalid("all physical parameters must be finite"));
        }
        if self.tunneling <= 0.0 {
            return Err(invalid("tunneling Ω must be positive"));
        }
        if self.interaction < 0.0 {
            return Err(invalid("interaction V must be nonnegative"));
        }
        if self.atom_number < 2 {
            return Err(invalid("atom number N must be at least 2"));
        }
        if self.loss_rate <= 0.0 {
            return Err(invalid("loss rate κ must be positive"));
        }
        if self.pump_amplitude < 0.0 {
            return Err(invalid("pump amplitude η must be nonnegative"));
        }
        for (name, j) in [("J1", self.overlap_left), ("J2", self.overlap_right)] {
            if !(0.0..=1.0).contains(&j) {
                return Err(invalid(&format!("overlap {name} = {j} outside [0, 1]")));
            }
        }
        self.light_shift().map(|_| ())
    }

    /// U₀, either given directly or as `g₀²/(ω_c − ω_a)`. When both forms are
    /// present they must agree to relative 1e−12.
    pub fn light_shift(&self) -> Result<f64> {
        let derived = match (self.bare_coupling, self.atomic_frequency) {
            (Some(g0), Some(wa)) => {
                let detuning = self.cavity_frequency - wa;
                if detuning == 0.0 {
                    return Err(invalid("cavity and atomic frequencies coincide"));
                }
                Some(g0 * g0 / detuning)
            }
            (None, None) => None,
            _ => {
                return Err(invalid(
                    "bare coupling g0 and atomic frequency must be given together",
                ))
            }
        };
        match (self.light_shift, derived) {
            (Some(u0), Some(d)) => {
                let scale = u0.abs().max(d.abs());
                if (u0 - d).abs() > 1e-12 * scale {
                    return Err(invalid(&format!(
                        "light shift U0 = {u0} inconsistent with g0²/(ωc−ωa) = {d}"
                    )));
                }
                Ok(u0)
            }
            (Some(u0), None) => Ok(u0),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(invalid(
                "either the light shift U0 or (g0, atomic frequency) is required",
            )),
        }
    }

    /// Coupling difference δ = J₁ − J₂.
    pub fn coupling_difference(&self) -> f64 {
        self.overlap_left - self.overlap_right
    }

    /// Effective detuning Δ = ω_p − ω_c − (J₁ + J₂) N U₀ / 2.
    pub fn detuning(&self) -> Result<f64> {
        let n = self.atom_number as f64;
        Ok(self.pump_frequency
            - self.cavity_frequency
            - (self.overlap_left + self.overlap_right) * n * self.light_shift()? / 2.0)
    }
}

/// Reduced pump amplitude `A(t)` as a function of reduced time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PumpSchedule {
    Constant {
        amplitude: f64,
    },
    /// Linear interpolation between `from` at `t_start` and `to` at `t_end`,
    /// held constant outside that window.
    LinearRamp {
        from: f64,
        to: f64,
        t_start: f64,
        t_end: f64,
    },
    /// Piecewise-linear table, held constant beyond the first and last knots.
    Table {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

impl PumpSchedule {
    pub fn constant(amplitude: f64) -> Self {
        PumpSchedule::Constant { amplitude }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        match self {
            PumpSchedule::Constant { amplitude } => {
                if !nonneg(*amplitude) {
                    return Err(invalid("pump amplitude must be finite and nonnegative"));
                }
            }
            PumpSchedule::LinearRamp {
                from,
                to,
                t_start,
                t_end,
            } => {
                if !nonneg(*from) || !nonneg(*to) {
                    return Err(invalid("ramp amplitudes must be finite and nonnegative"));
                }
                if !(t_end > t_start) {
                    return Err(invalid("ramp must end after it starts"));
                }
            }
            PumpSchedule::Table { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(invalid(
                        "pump table needs equally many (at least one) times and values",
                    ));
                }
                if values.iter().any(|&v| !nonneg(v)) {
                    return Err(invalid("pump table values must be finite and nonnegative"));
                }
                if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid("pump table times must be strictly increasing"));
                }
            }
        }
        Ok(())
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, PumpSchedule::Constant { .. })
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        match self {
            PumpSchedule::Constant { amplitude } => *amplitude,
            PumpSchedule::LinearRamp {
                from,
                to,
                t_start,
                t_end,
            } => {
                let frac = ((t - t_start) / (t_end - t_start)).clamp(0.0, 1.0);
                from + (to - from) * frac
            }
            PumpSchedule::Table { times, values } => {
                let k = times.partition_point(|&tk| tk <= t);
                if k == 0 {
                    values[0]
                } else if k == times.len() {
                    values[k - 1]
                } else {
                    let (t0, t1) = (times[k - 1], times[k]);
                    let (v0, v1) = (values[k - 1], values[k]);
                    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
                }
            }
        }
    }
}

/// Dimensionless model parameters.
///
/// The tilt strength is `Ã(t) = s·A(t)²` with tilt scale `s = δU₀/(2Ω)`.
/// Parameters built directly from `Ã` use `A ≡ 1` and `s = Ã`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    r: f64,
    tilt_scale: f64,
    b: f64,
    c: f64,
    pump: PumpSchedule,
}

impl ReducedParams {
    /// Constant-pump parameters from `(r, Ã, B, C)`.
    pub fn new(r: f64, tilt: f64, b: f64, c: f64) -> Result<Self> {
        Self::with_schedule(r, tilt, b, c, PumpSchedule::constant(1.0))
    }

    pub fn with_schedule(
        r: f64,
        tilt_scale: f64,
        b: f64,
        c: f64,
        pump: PumpSchedule,
    ) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(invalid("interaction r must be finite and nonnegative"));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(invalid("reduced loss rate C must be finite and positive"));
        }
        if !tilt_scale.is_finite() || !b.is_finite() {
            return Err(invalid("tilt and detuning must be finite"));
        }
        pump.validate()?;
        Ok(ReducedParams {
            r,
            tilt_scale,
            b,
            c,
            pump,
        })
    }

    /// The bare junction: no cavity tilt.
    pub fn uncoupled(r: f64) -> Result<Self> {
        Self::new(r, 0.0, 0.0, 1.0)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn tilt_scale(&self) -> f64 {
        self.tilt_scale
    }

    pub fn pump(&self) -> &PumpSchedule {
        &self.pump
    }

    /// Ã at the reference pump value `A(0)`.
    pub fn tilt(&self) -> f64 {
        self.tilt_at(0.0)
    }

    pub fn tilt_at(&self, t: f64) -> f64 {
        let a = self.pump.amplitude(t);
        self.tilt_scale * a * a
    }

    pub fn with_r(&self, r: f64) -> Result<Self> {
        Self::with_schedule(r, self.tilt_scale, self.b, self.c, self.pump.clone())
    }

    /// Replaces the pump by a constant one with the given Ã.
    pub fn with_tilt(&self, tilt: f64) -> Result<Self> {
        Self::new(self.r, tilt, self.b, self.c)
    }

    pub fn with_b(&self, b: f64) -> Result<Self> {
        Self::with_schedule(self.r, self.tilt_scale, b, self.c, self.pump.clone())
    }

    pub fn with_c(&self, c: f64) -> Result<Self> {
        Self::with_schedule(self.r, self.tilt_scale, self.b, c, self.pump.clone())
    }
}

/// A point of the phase sphere; `φ` is kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    z: f64,
    phi: f64,
}

impl PhaseState {
    pub fn new(z: f64, phi: f64) -> Result<Self> {
        if !z.is_finite() || z.abs() > 1.0 {
            return Err(Error::Domain { z });
        }
        if !phi.is_finite() {
            return Err(invalid("phase must be finite"));
        }
        Ok(PhaseState {
            z,
            phi: canonical_phase(phi),
        })
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Reduces an angle into `[0, 2π)`.
pub fn canonical_phase(phi: f64) -> f64 {
    let p = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if p >= TAU {
        0.0
    } else {
        p
    }
}

/// Output of the laboratory-to-reduced mapping, with the intermediate
/// quantities kept for reporting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reduction {
    pub params: ReducedParams,
    /// |A| = |η / (δU₀N/2)|.
    pub pump: f64,
    /// Δ in rad/s.
    pub detuning: f64,
    /// δ = J₁ − J₂.
    pub coupling_difference: f64,
    pub light_shift: f64,
    /// The frequency unit δU₀N/2 in rad/s (signed).
    pub unit: f64,
}

impl Reduction {
    pub fn from_physical(p: &PhysicalParams) -> Result<Self> {
        p.validate()?;
        let u0 = p.light_shift()?;
        let delta = p.coupling_difference();
        if delta * u0 == 0.0 {
            return Err(Error::DegenerateCoupling {
                delta,
                light_shift: u0,
            });
        }
        let n = p.atom_number as f64;
        let unit = delta * u0 * n / 2.0;
        let detuning = p.detuning()?;
        let r = n * p.interaction / (2.0 * p.tunneling);
        let pump = (p.pump_amplitude / unit).abs();
        let b = detuning / unit;
        let c = (p.loss_rate / unit).abs();
        let s = delta * u0 / (2.0 * p.tunneling);
        let params = ReducedParams::with_schedule(r, s, b, c, PumpSchedule::constant(pump))?;
        Ok(Reduction {
            params,
            pump,
            detuning,
            coupling_difference: delta,
            light_shift: u0,
            unit,
        })
    }
}

pub fn reduce_params(p: &PhysicalParams) -> Result<ReducedParams> {
    Reduction::from_physical(p).map(|red| red.params)
}

/// Mode overlaps of two condensates in a Gaussian transverse intensity profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Overlaps {
    pub left: f64,
    pub right: f64,
    pub difference: f64,
}

/// `J_i = exp(−2 x_i² / w²)`, the intensity of a Gaussian mode of waist `w`
/// at transverse offset `x_i`, relative to its on-axis value.
pub fn coupling_from_transverse_offset(waist: f64, x_left: f64, x_right: f64) -> Result<Overlaps> {
    if !(waist.is_finite() && waist > 0.0) {
        return Err(invalid("mode waist must be positive"));
    }
    let overlap = |x: f64| (-2.0 * x * x / (waist * waist)).exp();
    let (left, right) = (overlap(x_left), overlap(x_right));
    Ok(Overlaps {
        left,
        right,
        difference: left - right,
    })
}

/// The arctan tilt `s·F(z, t)`.
pub fn tilt_energy(z: f64, params: &ReducedParams, t: f64) -> f64 {
    let c = params.c;
    params.tilt_at(t) / c * ((z - params.b) / c).atan()
}

/// H evaluated at raw coordinates; `φ` need not be canonical. At the poles
/// the phase term vanishes exactly.
pub fn energy_at(z: f64, phi: f64, params: &ReducedParams, t: f64) -> f64 {
    let root = (1.0 - z * z).max(0.0).sqrt();
    -root * phi.cos() + 0.5 * params.r * z * z + tilt_energy(z, params, t)
}

pub fn hamiltonian(state: &PhaseState, params: &ReducedParams, t: f64) -> f64 {
    energy_at(state.z, state.phi, params, t)
}

/// `Ã(t) / ((z − B)² + C²)`: the intracavity photon number in units of
/// `2Ω/(δU₀)`.
pub fn photon_number_reduced(z: f64, params: &ReducedParams, t: f64) -> f64 {
    let dz = z - params.b;
    params.tilt_at(t) / (dz * dz + params.c * params.c)
}

/// Right-hand side `(ż, φ̇)` at raw coordinates.
pub fn flow_at(z: f64, phi: f64, params: &ReducedParams, t: f64) -> Result<(f64, f64)> {
    let gap = 1.0 - z * z;
    if !(gap >= POLE_GUARD) {
        return Err(Error::PoleSingularity { z });
    }
    let root = gap.sqrt();
    let (sin, cos) = phi.sin_cos();
    let z_dot = -root * sin;
    let phi_dot = z * cos / root + params.r * z + photon_number_reduced(z, params, t);
    Ok((z_dot, phi_dot))
}

pub fn flow(state: &PhaseState, params: &ReducedParams, t: f64) -> Result<(f64, f64)> {
    flow_at(state.z, state.phi, params, t)
}

/// Adiabatically eliminated field amplitude α for atom numbers `N₁, N₂`.
pub fn steady_state_field(
    p: &PhysicalParams,
    n_left: f64,
    n_right: f64,
    t: f64,
) -> Result<Complex64> {
    p.validate()?;
    let n = p.atom_number as f64;
    if ((n_left + n_right) - n).abs() > 1e-9 * n {
        return Err(invalid("N1 + N2 must equal the total atom number"));
    }
    let u0 = p.light_shift()?;
    let real = p.pump_frequency
        - p.cavity_frequency
        - u0 * (p.overlap_left * n_left + p.overlap_right * n_right);
    let denom = Complex64::new(real, p.loss_rate);
    let drive = Complex64::from_polar(p.pump_amplitude, -p.pump_frequency * t);
    Ok(drive / denom)
}

fn invalid(msg: &str) -> Error {
    Error::InvalidParams(msg.to_string())
}
