//! Pulse synthesis: envelopes, amplitude/duration solving, schedules and
//! validity checks.
//!
//! A pulse on transition `m` with field envelope `E(t)` (peak `2A`) rotates
//! the pair `(|m>, |m+1>)` by `C = (d_m / 2 hbar) * integral of E(t)`.
//!
//! Envelopes are cut to their time window. The amplitude formulas below
//! assume the full-line area, so a synthesized pulse carries its envelope
//! scaled by a window-closure factor (the ratio of full-line to in-window
//! area; `1/erf(2)` for Gaussians, `1 + O(1e-5)` for square waves) and its
//! in-window area is exactly `2C`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{peak_intensity, HBAR};
use crate::decompose::{Factorization, Mode};
use crate::error::{Error, Result};
use crate::linalg::RotationFactor;
use crate::system::{LevelSystem, SystemRef};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Largest accepted peak-Rabi to minimum-detuning ratio.
pub const MAX_RABI_RATIO: f64 = 0.1;
/// Smallest accepted `dt * dw_min` for square-wave pulses.
pub const SWP_MIN_DISPERSION: f64 = 10.0;
/// Smallest accepted `dt * dw_min` for Gaussian pulses.
pub const GWP_MIN_DISPERSION: f64 = 40.0;
/// The schedule must fit in this fraction of the shortest lifetime.
pub const LIFETIME_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Square wave with erf rise and decay of width `tau0` seconds.
    Swp { tau0: f64 },
    /// Gaussian `exp[-q^2 (t - center)^2]` with `q = 4 / dt`.
    Gwp,
}

impl Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::Swp { .. } => "swp",
            Shape::Gwp => "gwp",
        }
    }

    pub fn tau0(&self) -> Option<f64> {
        match *self {
            Shape::Swp { tau0 } => Some(tau0),
            Shape::Gwp => None,
        }
    }

    fn check(&self) -> Result<()> {
        match *self {
            Shape::Swp { tau0 } if !(tau0 > 0.0 && tau0.is_finite()) => {
                Err(Error::InvalidParameter(format!("tau0 must be positive, got {tau0}")))
            }
            _ => Ok(()),
        }
    }

    fn check_duration(&self, duration: f64) -> Result<()> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidParameter(format!("pulse duration must be positive, got {duration}")));
        }
        if let Shape::Swp { tau0 } = *self {
            if duration <= tau0 {
                return Err(Error::InvalidParameter(format!(
                    "square-wave duration {duration:e} s must exceed tau0 {tau0:e} s"
                )));
            }
        }
        Ok(())
    }
}

fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Antiderivative of `erf`: `x erf(x) + exp(-x^2) / sqrt(pi)`.
fn erf_primitive(x: f64) -> f64 {
    x * erf(x) + (-x * x).exp() / SQRT_PI
}

/// Square-wave field `A {erf[4(s - tau0/2)/tau0] - erf[4(s - dt + tau0/2)/tau0]}`
/// with `s = t - start`; zero outside the window. Plateau value `2A`.
pub fn swp_envelope(t: f64, a: f64, start: f64, duration: f64, tau0: f64) -> f64 {
    let s = t - start;
    if !(0.0..=duration).contains(&s) {
        return 0.0;
    }
    let k = 4.0 / tau0;
    a * (erf(k * (s - tau0 / 2.0)) - erf(k * (s - duration + tau0 / 2.0)))
}

/// Gaussian field `2A exp[-q^2 (s - dt/2)^2]`, `q = 4/dt`; zero outside the window.
pub fn gwp_envelope(t: f64, a: f64, start: f64, duration: f64) -> f64 {
    let s = t - start;
    if !(0.0..=duration).contains(&s) {
        return 0.0;
    }
    let q = 4.0 / duration;
    let x = q * (s - duration / 2.0);
    2.0 * a * (-x * x).exp()
}

/// `integral_0^s` of the square-wave envelope, `s` clamped to the window.
pub fn swp_integral(s: f64, a: f64, duration: f64, tau0: f64) -> f64 {
    let s = s.clamp(0.0, duration);
    let k = 4.0 / tau0;
    let c1 = tau0 / 2.0;
    let c2 = duration - tau0 / 2.0;
    let term = |c: f64| (erf_primitive(k * (s - c)) - erf_primitive(-k * c)) / k;
    a * (term(c1) - term(c2))
}

/// `integral_0^s` of the Gaussian envelope, `s` clamped to the window.
pub fn gwp_integral(s: f64, a: f64, duration: f64) -> f64 {
    let s = s.clamp(0.0, duration);
    let q = 4.0 / duration;
    2.0 * a * SQRT_PI / (2.0 * q) * (erf(q * (s - duration / 2.0)) + erf(q * duration / 2.0))
}

/// Half-amplitude `A` giving rotation angle `C`, from the full-line area.
pub fn amplitude_for_area(angle: f64, shape: Shape, duration: f64, dipole: f64) -> Result<f64> {
    shape.check()?;
    shape.check_duration(duration)?;
    check_positive("angle", angle)?;
    check_positive("dipole", dipole)?;
    Ok(match shape {
        Shape::Swp { tau0 } => HBAR * angle / ((duration - tau0) * dipole),
        Shape::Gwp => 4.0 * HBAR * angle / (SQRT_PI * duration * dipole),
    })
}

/// Duration for which a pulse of field peak `max_field` (= `2A`) rotates by `C`.
pub fn duration_for_amplitude(angle: f64, shape: Shape, max_field: f64, dipole: f64) -> Result<f64> {
    shape.check()?;
    check_positive("angle", angle)?;
    check_positive("field", max_field)?;
    check_positive("dipole", dipole)?;
    Ok(match shape {
        Shape::Swp { tau0 } => 2.0 * angle * HBAR / (max_field * dipole) + tau0,
        Shape::Gwp => 8.0 * angle * HBAR / (SQRT_PI * max_field * dipole),
    })
}

fn check_positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be positive, got {v}")))
    }
}

/// Full-line area over in-window area for an envelope of this shape.
pub fn window_closure(shape: Shape, duration: f64) -> f64 {
    match shape {
        Shape::Swp { tau0 } => 2.0 * (duration - tau0) / swp_integral(duration, 1.0, duration, tau0),
        Shape::Gwp => 1.0 / erf(2.0),
    }
}

/// One resonant pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub shape: Shape,
    pub transition: usize,
    /// Carrier angular frequency, rad/s.
    pub carrier: f64,
    /// Initial phase, rad.
    pub phase: f64,
    /// Half of the field peak, V/m.
    pub half_amplitude: f64,
    pub start: f64,
    pub end: f64,
    /// Target rotation angle `C`, rad.
    pub angle: f64,
}

impl PulseSpec {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }

    /// Field envelope at `t`, V/m.
    pub fn envelope(&self, t: f64) -> f64 {
        match self.shape {
            Shape::Swp { tau0 } => swp_envelope(t, self.half_amplitude, self.start, self.duration(), tau0),
            Shape::Gwp => gwp_envelope(t, self.half_amplitude, self.start, self.duration()),
        }
    }

    /// `integral_start^t` of the envelope, V s/m.
    pub fn envelope_integral(&self, t: f64) -> f64 {
        let s = t - self.start;
        match self.shape {
            Shape::Swp { tau0 } => swp_integral(s, self.half_amplitude, self.duration(), tau0),
            Shape::Gwp => gwp_integral(s, self.half_amplitude, self.duration()),
        }
    }

    /// Rotation angle accumulated by time `t` for a transition dipole `d`.
    pub fn running_angle(&self, t: f64, dipole: f64) -> f64 {
        dipole / (2.0 * HBAR) * self.envelope_integral(t)
    }

    /// Field peak `2A`, V/m.
    pub fn peak_field(&self) -> f64 {
        2.0 * self.half_amplitude
    }

    /// Peak intensity, W/m^2.
    pub fn peak_intensity(&self) -> f64 {
        peak_intensity(self.peak_field())
    }

    pub fn peak_rabi(&self, dipole: f64) -> f64 {
        self.peak_field() * dipole / HBAR
    }

    /// Gaussian width parameter `q = 4 / dt`.
    pub fn q(&self) -> Option<f64> {
        matches!(self.shape, Shape::Gwp).then(|| 4.0 / self.duration())
    }

    pub fn factor(&self) -> RotationFactor {
        RotationFactor::new(self.transition, self.angle, self.phase)
    }
}

/// Non-overlapping pulses on one system, sorted by start time.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    system: LevelSystem,
    pulses: Vec<PulseSpec>,
}

impl PulseSchedule {
    pub fn new(system: LevelSystem, pulses: Vec<PulseSpec>) -> Result<Self> {
        for (k, p) in pulses.iter().enumerate() {
            system.check_transition(p.transition)?;
            p.shape.check()?;
            if !(p.start >= 0.0 && p.start.is_finite()) {
                return Err(Error::InvalidParameter(format!("pulse {} starts at {}", k + 1, p.start)));
            }
            p.shape.check_duration(p.duration())?;
            if !p.half_amplitude.is_finite() || p.half_amplitude < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "pulse {} has invalid amplitude {}",
                    k + 1,
                    p.half_amplitude
                )));
            }
            if !p.phase.is_finite() || !p.angle.is_finite() || !p.carrier.is_finite() {
                return Err(Error::InvalidParameter(format!("pulse {} has a non-finite parameter", k + 1)));
            }
            if k > 0 && p.start < pulses[k - 1].end {
                return Err(Error::InvalidParameter(format!(
                    "pulse {} starts before pulse {} ends",
                    k + 1,
                    k
                )));
            }
        }
        Ok(Self { system, pulses })
    }

    pub fn empty(system: LevelSystem) -> Self {
        Self {
            system,
            pulses: Vec::new(),
        }
    }

    pub fn system(&self) -> &LevelSystem {
        &self.system
    }

    pub fn pulses(&self) -> &[PulseSpec] {
        &self.pulses
    }

    pub fn level_count(&self) -> usize {
        self.system.level_count()
    }

    /// End of the last pulse; zero when empty.
    pub fn total_duration(&self) -> f64 {
        self.pulses.last().map_or(0.0, |p| p.end)
    }

    /// Active pulse at `t`; on a shared boundary the later one wins.
    pub fn active(&self, t: f64) -> Option<&PulseSpec> {
        self.pulses.iter().rev().find(|p| p.contains(t))
    }

    /// Total field envelope at `t`.
    pub fn envelope(&self, t: f64) -> f64 {
        self.active(t).map_or(0.0, |p| p.envelope(t))
    }

    pub fn factors(&self) -> Vec<RotationFactor> {
        self.pulses.iter().map(PulseSpec::factor).collect()
    }

    /// Copy with the phase of pulse `index` (0-based) replaced.
    pub fn with_phase(&self, index: usize, phase: f64) -> Result<Self> {
        let mut out = self.clone();
        let p = out.pulses.get_mut(index).ok_or_else(|| {
            Error::InvalidParameter(format!("pulse index {index} out of range ({} pulses)", self.pulses.len()))
        })?;
        p.phase = crate::linalg::wrap_angle(phase);
        Ok(out)
    }

    pub fn to_doc(&self) -> ScheduleDoc {
        ScheduleDoc {
            system: SystemRef::from(&self.system),
            pulses: self.pulses.iter().map(PulseDoc::from).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    /// Every pulse lasts `duration` seconds.
    FixedDuration { duration: f64 },
    /// Every pulse has field peak `max_field` V/m.
    FixedAmplitude { max_field: f64 },
}

/// One pulse per factor, in application order, separated by `gap` seconds.
pub fn schedule_from_factorization(
    f: &Factorization,
    system: &LevelSystem,
    shape: Shape,
    policy: Policy,
    gap: f64,
) -> Result<PulseSchedule> {
    if f.n != system.level_count() {
        return Err(Error::DimensionMismatch {
            expected: system.level_count(),
            actual: f.n,
        });
    }
    if !(gap >= 0.0 && gap.is_finite()) {
        return Err(Error::InvalidParameter(format!("gap must be non-negative, got {gap}")));
    }
    shape.check()?;
    let mut t = 0.0;
    let mut pulses = Vec::with_capacity(f.len());
    for factor in &f.factors {
        let factor = factor.normalized();
        let d = system.dipole(factor.transition)?;
        let (duration, a) = match policy {
            Policy::FixedDuration { duration } => (duration, amplitude_for_area(factor.angle, shape, duration, d)?),
            Policy::FixedAmplitude { max_field } => {
                let duration = duration_for_amplitude(factor.angle, shape, max_field, d)?;
                (duration, max_field / 2.0)
            }
        };
        let start = if pulses.is_empty() { t } else { t + gap };
        pulses.push(PulseSpec {
            shape,
            transition: factor.transition,
            carrier: system.frequency(factor.transition)?,
            phase: factor.phase,
            half_amplitude: a * window_closure(shape, duration),
            start,
            end: start + duration,
            angle: factor.angle,
        });
        t = start + duration;
    }
    PulseSchedule::new(system.clone(), pulses)
}

/// Per-pulse validity figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct PulseCheck {
    pub index: usize,
    pub transition: usize,
    pub duration_s: f64,
    pub peak_field_Vm: f64,
    pub peak_intensity_Wm2: f64,
    pub peak_rabi_rads: f64,
    pub rabi_ratio: f64,
    pub dispersion_margin: Option<f64>,
    pub rabi_ok: bool,
    pub dispersion_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// `None` for a two-level system (no off-resonant transition).
    pub min_detuning_rads: Option<f64>,
    pub total_duration_s: f64,
    pub min_lifetime_s: Option<f64>,
    pub lifetime_ok: Option<bool>,
    pub pulses: Vec<PulseCheck>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for p in &self.pulses {
            if !p.rabi_ok {
                out.push(format!(
                    "pulse {}: peak Rabi frequency is {:.3} of the minimum detuning (limit {MAX_RABI_RATIO})",
                    p.index, p.rabi_ratio
                ));
            }
            if !p.dispersion_ok {
                out.push(format!(
                    "pulse {}: spectral width too large (dt * dw_min = {:.3})",
                    p.index,
                    p.dispersion_margin.unwrap_or(f64::NAN)
                ));
            }
        }
        if self.lifetime_ok == Some(false) {
            out.push(format!(
                "schedule lasts {:e} s, more than {LIFETIME_FRACTION} of the shortest lifetime {:e} s",
                self.total_duration_s,
                self.min_lifetime_s.unwrap_or(f64::NAN)
            ));
        }
        out
    }
}

/// Report-only checks of the weak-field, selectivity and lifetime conditions.
pub fn validate_schedule(s: &PulseSchedule) -> ValidationReport {
    let budget = s.system().validity_budget();
    let dw = budget.min_detuning;
    let finite_dw = dw.is_finite().then_some(dw);
    let pulses: Vec<PulseCheck> = s
        .pulses()
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let d = s.system().dipoles()[p.transition - 1];
            let rabi = p.peak_rabi(d);
            let rabi_ratio = finite_dw.map_or(0.0, |dw| rabi / dw);
            let margin = finite_dw.map(|dw| p.duration() * dw);
            let needed = match p.shape {
                Shape::Swp { .. } => SWP_MIN_DISPERSION,
                Shape::Gwp => GWP_MIN_DISPERSION,
            };
            PulseCheck {
                index: k + 1,
                transition: p.transition,
                duration_s: p.duration(),
                peak_field_Vm: p.peak_field(),
                peak_intensity_Wm2: p.peak_intensity(),
                peak_rabi_rads: rabi,
                rabi_ratio,
                dispersion_margin: margin,
                rabi_ok: rabi_ratio < MAX_RABI_RATIO,
                dispersion_ok: margin.is_none_or(|m| m > needed),
            }
        })
        .collect();
    let total = s.total_duration();
    let lifetime_ok = budget.min_lifetime.map(|tau| total < LIFETIME_FRACTION * tau);
    let passed = pulses.iter().all(|p| p.rabi_ok && p.dispersion_ok) && lifetime_ok != Some(false);
    ValidationReport {
        min_detuning_rads: finite_dw,
        total_duration_s: total,
        min_lifetime_s: budget.min_lifetime,
        lifetime_ok,
        pulses,
        passed,
    }
}

/// Worst-case duration of any sequence built from `C = pi/2` pulses at the
/// given per-transition field peaks. Exact mode adds two pulses per transition.
pub fn total_duration_bound(system: &LevelSystem, max_fields: &[f64], shape: Shape, mode: Mode) -> Result<f64> {
    let n = system.level_count();
    if max_fields.len() != n - 1 {
        return Err(Error::LengthMismatch(format!(
            "{} field values for {} transitions",
            max_fields.len(),
            n - 1
        )));
    }
    let extra = match mode {
        Mode::ModPhase => 0,
        Mode::Exact => 2,
    };
    let mut total = 0.0;
    for (m, (&field, &d)) in max_fields.iter().zip(system.dipoles()).enumerate() {
        let dt = duration_for_amplitude(PI / 2.0, shape, field, d)?;
        total += dt * (n - (m + 1) + extra) as f64;
    }
    Ok(total)
}

/// Schedule JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub system: SystemRef,
    pub pulses: Vec<PulseDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct PulseDoc {
    pub shape: String,
    pub transition: usize,
    pub carrier_rads: f64,
    pub phase_rad: f64,
    pub half_amplitude_Vm: f64,
    pub start_s: f64,
    pub end_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau0_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_per_s: Option<f64>,
    pub angle_rad: f64,
}

impl From<&PulseSpec> for PulseDoc {
    fn from(p: &PulseSpec) -> Self {
        Self {
            shape: p.shape.name().to_string(),
            transition: p.transition,
            carrier_rads: p.carrier,
            phase_rad: p.phase,
            half_amplitude_Vm: p.half_amplitude,
            start_s: p.start,
            end_s: p.end,
            tau0_s: p.shape.tau0(),
            q_per_s: p.q(),
            angle_rad: p.angle,
        }
    }
}

impl PulseDoc {
    pub fn into_spec(self) -> Result<PulseSpec> {
        let shape = match self.shape.as_str() {
            "swp" => Shape::Swp {
                tau0: self
                    .tau0_s
                    .ok_or_else(|| Error::Format("swp pulse needs tau0_s".into()))?,
            },
            "gwp" => {
                if let Some(q) = self.q_per_s {
                    let qdt = q * (self.end_s - self.start_s);
                    if (qdt - 4.0).abs() > 1e-9 {
                        return Err(Error::Format(format!("gwp pulse needs q * dt = 4, got {qdt}")));
                    }
                }
                Shape::Gwp
            }
            other => return Err(Error::Format(format!("unknown pulse shape {other:?}"))),
        };
        Ok(PulseSpec {
            shape,
            transition: self.transition,
            carrier: self.carrier_rads,
            phase: self.phase_rad,
            half_amplitude: self.half_amplitude_Vm,
            start: self.start_s,
            end: self.end_s,
            angle: self.angle_rad,
        })
    }
}

impl ScheduleDoc {
    pub fn into_schedule(self) -> Result<PulseSchedule> {
        let system = self.system.resolve()?;
        let pulses = self
            .pulses
            .into_iter()
            .map(PulseDoc::into_spec)
            .collect::<Result<Vec<_>>>()?;
        PulseSchedule::new(system, pulses)
    }
}
