//! Reduction of a unitary to adjacent-transition rotation factors.
//!
//! Columns are cleared from the last to the second, each one top-down, by
//! left-multiplying inverse factors. What remains is a diagonal of phases.
//! In exact mode those phases are pushed into extra pairs of pi rotations
//! until only the global phase survives.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{unitarity_defect, wrap_angle, ComplexMatrix, DiagonalPhases, RotationFactor};

/// Factors with `|C|` below this are dropped.
pub const ANGLE_EPSILON: f64 = 1e-12;

/// Largest accepted `||U^dagger U - I||_F` on input.
pub const UNITARITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    ModPhase,
    Exact,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mod-phase" | "modphase" | "mod_phase" => Ok(Mode::ModPhase),
            "exact" => Ok(Mode::Exact),
            other => Err(Error::InvalidParameter(format!("unknown mode {other:?} (expected mod-phase or exact)"))),
        }
    }
}

/// `U = V_K ... V_1 * Theta * e^{i Gamma / N}`, factors in application order.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub n: usize,
    pub factors: Vec<RotationFactor>,
    pub residual: DiagonalPhases,
    pub mode: Mode,
}

impl Factorization {
    /// A pure factor chain with no residual phases.
    pub fn from_factors(n: usize, factors: Vec<RotationFactor>) -> Result<Self> {
        for f in &factors {
            if f.transition == 0 || f.transition >= n {
                return Err(Error::TransitionOutOfRange {
                    transition: f.transition,
                    levels: n,
                });
            }
        }
        Ok(Self {
            n,
            factors,
            residual: DiagonalPhases::zero(n),
            mode: Mode::Exact,
        })
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Product of the factors alone, `V_K ... V_1`.
    pub fn factor_product(&self) -> Result<ComplexMatrix> {
        let mut m = ComplexMatrix::identity(self.n, self.n);
        for f in &self.factors {
            if f.transition == 0 || f.transition >= self.n {
                return Err(Error::TransitionOutOfRange {
                    transition: f.transition,
                    levels: self.n,
                });
            }
            f.apply_left(&mut m);
        }
        Ok(m)
    }

    pub fn to_doc(&self) -> FactorizationDoc {
        FactorizationDoc {
            n: self.n,
            mode: self.mode,
            factors: self.factors.clone(),
            thetas_rad: self.residual.thetas.clone(),
            gamma_rad: self.residual.global,
        }
    }
}

/// Angle and phase of the factor whose inverse maps `(top, below)` to `(0, c)`.
pub fn elimination_step(top: Complex64, below: Complex64) -> Result<(f64, f64)> {
    let (r1, r2) = (top.norm(), below.norm());
    if r1 == 0.0 && r2 == 0.0 {
        return Err(Error::ZeroPivot);
    }
    let angle = r1.atan2(r2);
    let phase = wrap_angle(FRAC_PI_2 + top.arg() - below.arg());
    Ok((angle, phase))
}

pub fn decompose_mod_phase(u: &ComplexMatrix) -> Result<Factorization> {
    let n = u.nrows();
    if n == 0 || u.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: u.ncols(),
        });
    }
    let defect = unitarity_defect(u);
    if !(defect < UNITARITY_TOL) {
        return Err(Error::NotUnitary { defect });
    }

    let gamma = u.determinant().arg();
    let mut m = u * Complex64::from_polar(1.0, -gamma / n as f64);
    let mut steps = Vec::new();
    for col in (1..n).rev() {
        for row in 0..col {
            let Ok((angle, phase)) = elimination_step(m[(row, col)], m[(row + 1, col)]) else {
                continue;
            };
            if angle < ANGLE_EPSILON {
                continue;
            }
            let f = RotationFactor::new(row + 1, angle, phase);
            f.inverse().apply_left(&mut m);
            steps.push(f);
        }
    }
    steps.reverse();
    let thetas = (0..n).map(|k| m[(k, k)].arg()).collect();
    Ok(Factorization {
        n,
        factors: steps,
        residual: DiagonalPhases { thetas, global: gamma },
        mode: Mode::ModPhase,
    })
}

/// Converts a mod-phase factorization into one whose residual is only the
/// global phase, adding at most two pi rotations per level.
pub fn eliminate_phases(f: &Factorization) -> Factorization {
    if f.mode == Mode::Exact {
        return f.clone();
    }
    let mut thetas = f.residual.thetas.clone();
    let mut prefix: Vec<RotationFactor> = Vec::new();
    for k in (1..f.n).rev() {
        let theta = wrap_angle(thetas[k]);
        if theta.abs() < ANGLE_EPSILON {
            thetas[k] = 0.0;
            continue;
        }
        // P1 = exp(-pi/2 G(-pi/2 - theta)), P2 = exp(-pi/2 x); P2 P1 moves the
        // phase of level k+1 onto level k. Their inverses run before the rest.
        let pair = [
            RotationFactor::new(k, FRAC_PI_2, FRAC_PI_2),
            RotationFactor::new(k, FRAC_PI_2, -FRAC_PI_2 - theta),
        ];
        prefix.splice(0..0, pair);
        thetas[k - 1] = wrap_angle(thetas[k - 1] + theta);
        thetas[k] = 0.0;
    }
    prefix.extend(f.factors.iter().copied());
    Factorization {
        n: f.n,
        factors: prefix,
        residual: DiagonalPhases {
            thetas: vec![0.0; f.n],
            global: f.residual.global,
        },
        mode: Mode::Exact,
    }
}

pub fn decompose(u: &ComplexMatrix, mode: Mode) -> Result<Factorization> {
    let f = decompose_mod_phase(u)?;
    Ok(match mode {
        Mode::ModPhase => f,
        Mode::Exact => eliminate_phases(&f),
    })
}

/// `V_K ... V_1 * Theta * e^{i Gamma / N}`.
pub fn reconstruct(f: &Factorization) -> Result<ComplexMatrix> {
    if f.residual.thetas.len() != f.n {
        return Err(Error::DimensionMismatch {
            expected: f.n,
            actual: f.residual.thetas.len(),
        });
    }
    let mut m = f.residual.matrix();
    for factor in &f.factors {
        if factor.transition == 0 || factor.transition >= f.n {
            return Err(Error::TransitionOutOfRange {
                transition: factor.transition,
                levels: f.n,
            });
        }
        factor.apply_left(&mut m);
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationDoc {
    pub n: usize,
    pub mode: Mode,
    pub factors: Vec<RotationFactor>,
    pub thetas_rad: Vec<f64>,
    pub gamma_rad: f64,
}

impl FactorizationDoc {
    pub fn into_factorization(self) -> Result<Factorization> {
        if self.n < 2 {
            return Err(Error::Format("factorization needs n >= 2".into()));
        }
        if self.thetas_rad.len() != self.n {
            return Err(Error::Format(format!(
                "thetas_rad has {} entries, expected {}",
                self.thetas_rad.len(),
                self.n
            )));
        }
        let mut f = Factorization::from_factors(self.n, self.factors)?;
        f.residual = DiagonalPhases {
            thetas: self.thetas_rad,
            global: self.gamma_rad,
        };
        f.mode = self.mode;
        Ok(f)
    }
}
