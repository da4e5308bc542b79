//! N-level ladder systems: energies, adjacent-transition dipoles and
//! frequencies, plus the two built-in presets (`rb4`, `hf4`).

use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

/// Relative tolerance under which two transition frequencies count as equal.
pub const FREQUENCY_REL_TOL: f64 = 1e-9;

/// An N-level ladder: only `|m> <-> |m+1>` is dipole-coupled.
///
/// Indices in the public API are 1-based for levels and transitions, matching
/// the usual `|1>, ..., |N>` labelling; storage is 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSystem {
    name: String,
    energies: Vec<f64>,
    dipoles: Vec<f64>,
    frequencies: Vec<f64>,
    lifetimes: Option<Vec<f64>>,
    min_detuning_override: Option<f64>,
}

/// Quantities that bound how hard and how long the system may be driven.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityBudget {
    /// Smallest detuning from any off-resonant transition, rad/s.
    pub min_detuning: f64,
    /// Shortest excited-state lifetime, s.
    pub min_lifetime: Option<f64>,
}

/// Builds a ladder from energies (J) and dipoles (C m); frequencies are derived.
pub fn build_ladder_system(
    energies: &[f64],
    dipoles: &[f64],
    lifetimes: Option<&[f64]>,
) -> Result<LevelSystem> {
    let n = energies.len();
    if n < 2 {
        return Err(Error::LengthMismatch(format!(
            "a ladder needs at least 2 levels, got {n}"
        )));
    }
    if dipoles.len() != n - 1 {
        return Err(Error::LengthMismatch(format!(
            "{n} energies need {} dipoles, got {}",
            n - 1,
            dipoles.len()
        )));
    }
    if energies.iter().chain(dipoles).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite energy or dipole".into()));
    }
    for (i, w) in energies.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(Error::NonMonotoneEnergies {
                index: i + 1,
                lower: w[0],
                upper: w[1],
            });
        }
    }
    for (i, &d) in dipoles.iter().enumerate() {
        if d <= 0.0 {
            return Err(Error::NonPositiveDipole {
                transition: i + 1,
                value: d,
            });
        }
    }
    let frequencies: Vec<f64> = energies.windows(2).map(|w| (w[1] - w[0]) / HBAR).collect();
    check_distinct(&frequencies)?;

    let lifetimes = match lifetimes {
        None => None,
        Some(l) => {
            if l.len() != n - 1 {
                return Err(Error::LengthMismatch(format!(
                    "expected {} excited-state lifetimes, got {}",
                    n - 1,
                    l.len()
                )));
            }
            if l.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::InvalidParameter("lifetimes must be positive".into()));
            }
            Some(l.to_vec())
        }
    };

    Ok(LevelSystem {
        name: "custom".into(),
        energies: energies.to_vec(),
        dipoles: dipoles.to_vec(),
        frequencies,
        lifetimes,
        min_detuning_override: None,
    })
}

fn check_distinct(frequencies: &[f64]) -> Result<()> {
    for i in 0..frequencies.len() {
        for j in i + 1..frequencies.len() {
            let (a, b) = (frequencies[i], frequencies[j]);
            if (a - b).abs() <= FREQUENCY_REL_TOL * a.abs().max(b.abs()) {
                return Err(Error::DuplicateFrequency {
                    first: i + 1,
                    second: j + 1,
                    freq: a,
                });
            }
        }
    }
    Ok(())
}

/// Morse-oscillator ladder: `E_n = hbar w0 (n - 1/2)[1 - (B/2)(n - 1/2)]`,
/// `d_n = p0 sqrt(n)`, so that `w_n = w0 (1 - B n)`.
pub fn morse_system(omega0: f64, anharmonicity: f64, p0: f64, levels: usize) -> Result<LevelSystem> {
    if levels < 2 {
        return Err(Error::InvalidParameter(format!(
            "Morse ladder needs at least 2 levels, got {levels}"
        )));
    }
    if !(omega0 > 0.0) || !(p0 > 0.0) {
        return Err(Error::InvalidParameter("omega0 and p0 must be positive".into()));
    }
    if anharmonicity < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "anharmonicity B must be non-negative, got {anharmonicity}"
        )));
    }
    let energies: Vec<f64> = (1..=levels)
        .map(|n| {
            let v = n as f64 - 0.5;
            HBAR * omega0 * v * (1.0 - 0.5 * anharmonicity * v)
        })
        .collect();
    let dipoles: Vec<f64> = (1..levels).map(|n| p0 * (n as f64).sqrt()).collect();
    let mut sys = build_ladder_system(&energies, &dipoles, None)?;
    sys.name = format!("morse{levels}");
    Ok(sys)
}

/// Built-in systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Four electronic levels of 87Rb: 5S1/2, 5P3/2, 4D, 6P3/2.
    Rb4,
    /// Four lowest vibrational levels of HF in the Morse model.
    Hf4,
}

pub const PRESET_NAMES: [&str; 2] = ["rb4", "hf4"];

pub const HF_OMEGA0: f64 = 0.78e15;
pub const HF_ANHARMONICITY: f64 = 0.0419;
pub const HF_P0: f64 = 3.24e-31;

pub const RB_P0: f64 = 4.89e-29;
/// Rb4 transition dipoles, C m. Reconstructed from the fixed-field pulse
/// lengths of the transfer sequence (square and Gaussian) at 1e5 V/m.
pub const RB_DIPOLES: [f64; 3] = [3.1800e-29, 2.9368e-29, 4.8926e-30];
/// Term values of 5S1/2, 5P3/2, 4D5/2, 6P3/2 in cm^-1.
pub const RB_TERMS_CM: [f64; 4] = [0.0, 12_816.549_5, 19_355.202_8, 23_792.591];
/// Lifetimes of levels 2..4, s.
pub const RB_LIFETIMES: [f64; 3] = [28e-9, 90e-9, 107e-9];
pub const RB_MIN_DETUNING: f64 = 4e14;

impl Preset {
    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "rb4" => Ok(Preset::Rb4),
            "hf4" => Ok(Preset::Hf4),
            _ => Err(Error::UnknownPreset(name.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Rb4 => "rb4",
            Preset::Hf4 => "hf4",
        }
    }

    pub fn system(self) -> LevelSystem {
        match self {
            Preset::Rb4 => rb4_preset(),
            Preset::Hf4 => hf4_preset(),
        }
    }

    /// Defining parameters, for display.
    pub fn parameters(self) -> Vec<(&'static str, f64)> {
        match self {
            Preset::Rb4 => vec![
                ("p0_Cm", RB_P0),
                ("d1_Cm", RB_DIPOLES[0]),
                ("d2_Cm", RB_DIPOLES[1]),
                ("d3_Cm", RB_DIPOLES[2]),
                ("min_detuning_rads", RB_MIN_DETUNING),
                ("lifetime2_s", RB_LIFETIMES[0]),
                ("lifetime3_s", RB_LIFETIMES[1]),
                ("lifetime4_s", RB_LIFETIMES[2]),
            ],
            Preset::Hf4 => vec![
                ("omega0_rads", HF_OMEGA0),
                ("B", HF_ANHARMONICITY),
                ("p0_Cm", HF_P0),
            ],
        }
    }
}

pub fn rb4_preset() -> LevelSystem {
    let hc = 2.0 * std::f64::consts::PI * HBAR * SPEED_OF_LIGHT;
    // cm^-1 -> m^-1
    let energies: Vec<f64> = RB_TERMS_CM.iter().map(|k| hc * k * 100.0).collect();
    let mut sys = build_ladder_system(&energies, &RB_DIPOLES, Some(&RB_LIFETIMES))
        .expect("rb4 preset is a valid ladder");
    sys.name = "rb4".into();
    sys.min_detuning_override = Some(RB_MIN_DETUNING);
    sys
}

pub fn hf4_preset() -> LevelSystem {
    let mut sys = morse_system(HF_OMEGA0, HF_ANHARMONICITY, HF_P0, 4).expect("hf4 preset is valid");
    sys.name = "hf4".into();
    sys
}

pub fn preset(name: &str) -> Result<LevelSystem> {
    Preset::from_name(name).map(Preset::system)
}

/// Minimum pairwise gap between transition frequencies, unless the system
/// declares an explicit value. `+inf` for a two-level system.
pub fn min_detuning(system: &LevelSystem) -> f64 {
    if let Some(v) = system.min_detuning_override {
        return v;
    }
    let f = &system.frequencies;
    let mut best = f64::INFINITY;
    for i in 0..f.len() {
        for j in i + 1..f.len() {
            best = best.min((f[i] - f[j]).abs());
        }
    }
    best
}

impl LevelSystem {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_min_detuning(mut self, value: f64) -> Result<Self> {
        if !(value > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "min detuning must be positive, got {value}"
            )));
        }
        self.min_detuning_override = Some(value);
        Ok(self)
    }

    pub fn level_count(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn dipoles(&self) -> &[f64] {
        &self.dipoles
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn lifetimes(&self) -> Option<&[f64]> {
        self.lifetimes.as_deref()
    }

    /// Dipole of transition `m` (1-based).
    pub fn dipole(&self, transition: usize) -> Result<f64> {
        self.check_transition(transition)?;
        Ok(self.dipoles[transition - 1])
    }

    /// Angular frequency of transition `m` (1-based).
    pub fn frequency(&self, transition: usize) -> Result<f64> {
        self.check_transition(transition)?;
        Ok(self.frequencies[transition - 1])
    }

    pub fn check_transition(&self, transition: usize) -> Result<()> {
        if transition == 0 || transition >= self.level_count() {
            Err(Error::TransitionOutOfRange {
                transition,
                levels: self.level_count(),
            })
        } else {
            Ok(())
        }
    }

    pub fn min_detuning(&self) -> f64 {
        min_detuning(self)
    }

    pub fn validity_budget(&self) -> ValidityBudget {
        ValidityBudget {
            min_detuning: min_detuning(self),
            min_lifetime: self
                .lifetimes
                .as_ref()
                .and_then(|l| l.iter().copied().reduce(f64::min)),
        }
    }

    pub fn to_doc(&self) -> SystemDoc {
        SystemDoc {
            name: self.name.clone(),
            energies_j: self.energies.clone(),
            dipoles_cm: self.dipoles.clone(),
            frequencies_rads: Some(self.frequencies.clone()),
            lifetimes_s: self.lifetimes.clone(),
            min_detuning_rads: self.min_detuning_override,
        }
    }
}

/// JSON form of a [`LevelSystem`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDoc {
    pub name: String,
    #[serde(rename = "energies_J")]
    pub energies_j: Vec<f64>,
    #[serde(rename = "dipoles_Cm")]
    pub dipoles_cm: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies_rads: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifetimes_s: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_detuning_rads: Option<f64>,
}

impl SystemDoc {
    pub fn into_system(self) -> Result<LevelSystem> {
        let mut sys = build_ladder_system(&self.energies_j, &self.dipoles_cm, self.lifetimes_s.as_deref())?;
        if let Some(given) = &self.frequencies_rads {
            if given.len() != sys.frequencies.len() {
                return Err(Error::LengthMismatch(format!(
                    "expected {} transition frequencies, got {}",
                    sys.frequencies.len(),
                    given.len()
                )));
            }
            for (m, (g, d)) in given.iter().zip(&sys.frequencies).enumerate() {
                if (g - d).abs() > FREQUENCY_REL_TOL * d.abs() {
                    return Err(Error::Format(format!(
                        "frequency of transition {} ({g:e}) disagrees with energy difference ({d:e})",
                        m + 1
                    )));
                }
            }
        }
        sys.name = self.name;
        if let Some(v) = self.min_detuning_rads {
            sys = sys.with_min_detuning(v)?;
        }
        Ok(sys)
    }
}

/// A system given either by preset name or inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SystemRef {
    Name(String),
    Inline(SystemDoc),
}

impl SystemRef {
    pub fn resolve(self) -> Result<LevelSystem> {
        match self {
            SystemRef::Name(n) => preset(&n),
            SystemRef::Inline(doc) => doc.into_system(),
        }
    }
}

impl From<&LevelSystem> for SystemRef {
    fn from(sys: &LevelSystem) -> Self {
        SystemRef::Inline(sys.to_doc())
    }
}
