//! Control recipes: population transfer, ensemble inversion, superposition
//! creation and observable maximization. Each builds a target unitary (or a
//! known factor chain) and predicts the final state it produces.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decompose::{decompose_mod_phase, Factorization};
use crate::dynamics::QuantumState;
use crate::error::{Error, Result};
use crate::linalg::{gram_schmidt_extend, hermitian_eigensystem, wrap_angle, ComplexMatrix, ComplexVector, MatrixDoc, RotationFactor};
use crate::system::{LevelSystem, SystemRef};

/// Phase given to pulses whose phase does not matter.
pub const DEFAULT_PHASE: f64 = -FRAC_PI_2;

const NORM_TOL: f64 = 1e-9;

/// What a scheme tries to achieve, evaluated on a final density matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// Population of a level (1-based).
    Population(usize),
    /// `Tr(A rho)` in the interaction picture.
    Expectation(ComplexMatrix),
    /// `<psi| rho |psi>`.
    StateOverlap(ComplexVector),
    /// `1 - (1/2) sum |rho_nn - p_n|`.
    PopulationMatch(Vec<f64>),
}

impl Objective {
    pub fn evaluate(&self, rho: &ComplexMatrix) -> f64 {
        match self {
            Objective::Population(k) => rho[(k - 1, k - 1)].re,
            Objective::Expectation(a) => (a * rho).trace().re,
            Objective::StateOverlap(psi) => (psi.adjoint() * rho * psi)[(0, 0)].re,
            Objective::PopulationMatch(p) => {
                1.0 - 0.5 * p.iter().enumerate().map(|(k, pk)| (rho[(k, k)].re - pk).abs()).sum::<f64>()
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Objective::Population(k) => format!("population of level {k}"),
            Objective::Expectation(_) => "observable average".into(),
            Objective::StateOverlap(_) => "fidelity with target state".into(),
            Objective::PopulationMatch(_) => "population match".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SchemeResult {
    pub name: &'static str,
    pub factorization: Factorization,
    pub initial: QuantumState,
    /// Predicted final density matrix, interaction picture.
    pub predicted: ComplexMatrix,
    pub objective: Objective,
    pub predicted_value: f64,
    pub notes: Vec<String>,
}

impl SchemeResult {
    pub fn n(&self) -> usize {
        self.factorization.n
    }

    /// Final density matrix from the bare factor chain (residual phases dropped).
    pub fn chain_state(&self) -> Result<ComplexMatrix> {
        let u = self.factorization.factor_product()?;
        Ok(self.initial.evolve(&u).density_matrix())
    }
}

fn check_levels(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidParameter(format!("need at least 2 levels, got {n}")))
    } else {
        Ok(())
    }
}

fn diag(values: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        values.len(),
        values.iter().map(|&v| Complex64::new(v, 0.0)),
    ))
}

fn check_weights(w: &[f64]) -> Result<()> {
    check_levels(w.len())?;
    if w.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter("weights must be non-negative".into()));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidParameter(format!("weights sum to {total}, expected 1")));
    }
    Ok(())
}

/// `|1> -> |N>` with a pi-pulse on each transition in turn.
pub fn population_transfer_scheme(n: usize) -> Result<SchemeResult> {
    check_levels(n)?;
    let factors = (1..n).map(|m| RotationFactor::new(m, FRAC_PI_2, DEFAULT_PHASE)).collect();
    let mut target = vec![0.0; n];
    target[n - 1] = 1.0;
    Ok(SchemeResult {
        name: "transfer",
        factorization: Factorization::from_factors(n, factors)?,
        initial: QuantumState::ground(n)?,
        predicted: diag(&target),
        objective: Objective::Population(n),
        predicted_value: 1.0,
        notes: vec![],
    })
}

/// Transition sequence `[1..N-1; 1..N-2; ...; 1]` of the inversion scheme.
pub fn inversion_transitions(n: usize) -> Vec<usize> {
    (1..n).rev().flat_map(|last| 1..=last).collect()
}

/// Reverses the populations of any incoherent ensemble with `N(N-1)/2` pi-pulses.
pub fn inversion_scheme(weights: &[f64]) -> Result<SchemeResult> {
    check_weights(weights)?;
    let n = weights.len();
    let factors = inversion_transitions(n)
        .into_iter()
        .map(|m| RotationFactor::new(m, FRAC_PI_2, DEFAULT_PHASE))
        .collect();
    let reversed: Vec<f64> = weights.iter().rev().copied().collect();
    Ok(SchemeResult {
        name: "invert",
        factorization: Factorization::from_factors(n, factors)?,
        initial: QuantumState::ensemble(weights)?,
        predicted: diag(&reversed),
        objective: Objective::PopulationMatch(reversed),
        predicted_value: 1.0,
        notes: vec![],
    })
}

/// Creates `sum_n r_n e^{i theta_n} |n>` from `|1>`, up to a global phase.
pub fn superposition_scheme(r: &[f64], theta: &[f64]) -> Result<SchemeResult> {
    let n = r.len();
    check_levels(n)?;
    if theta.len() != n {
        return Err(Error::LengthMismatch(format!("{n} amplitudes but {} phases", theta.len())));
    }
    if r.iter().chain(theta).any(|x| !x.is_finite()) || r.iter().any(|&x| x < 0.0) {
        return Err(Error::InvalidParameter("amplitudes must be finite and non-negative".into()));
    }
    let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm });
    }
    let rv = ComplexVector::from_iterator(n, r.iter().map(|&x| Complex64::new(x, 0.0)));
    let u1 = gram_schmidt_extend(&rv)?;
    let phases = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        n,
        theta.iter().map(|&t| Complex64::from_polar(1.0, t)),
    ));
    let target_u = &phases * u1;
    let f = decompose_mod_phase(&target_u)?;
    let psi = ComplexVector::from_iterator(n, r.iter().zip(theta).map(|(&a, &t)| Complex64::from_polar(a, t)));

    // what the bare chain actually produces from |1>
    let mut achieved = ComplexVector::zeros(n);
    achieved[0] = Complex64::new(1.0, 0.0);
    for factor in &f.factors {
        factor.apply_to_vector(&mut achieved);
    }
    let offset = wrap_angle(-(f.residual.thetas[0] + f.residual.global / n as f64));
    let achieved_phases: Vec<String> = achieved
        .iter()
        .map(|z| if z.norm() > 1e-12 { format!("{:.6}", z.arg()) } else { "-".into() })
        .collect();
    let notes = vec![
        format!("achieved phases (rad): [{}]", achieved_phases.join(", ")),
        format!("global phase offset from target: {offset:.6} rad"),
    ];
    Ok(SchemeResult {
        name: "superpose",
        factorization: f,
        initial: QuantumState::ground(n)?,
        predicted: &psi * psi.adjoint(),
        objective: Objective::StateOverlap(psi),
        predicted_value: 1.0,
        notes,
    })
}

/// Pulse phases that realize an equal four-level superposition with phases
/// `theta` from the fixed-angle five-factor sequence, given a free `phi1`.
pub fn superposition_phase_solution(theta: [f64; 4], phi1: f64) -> [f64; 5] {
    let [t1, t2, t3, t4] = theta;
    [
        phi1,
        FRAC_PI_2 - 2.0 * phi1 - t1 - t2 - t3,
        phi1 + t1 + t2 + t3 - t4,
        PI - phi1 - t3,
        -FRAC_PI_2 - t2,
    ]
    .map(wrap_angle)
}

/// Factor chain of the equal four-level superposition with the given phases.
pub fn equal_superposition_factors(phases: [f64; 5]) -> Vec<RotationFactor> {
    let angles = [PI / 3.0, 2f64.sqrt().atan(), PI / 4.0, FRAC_PI_2, FRAC_PI_2];
    let transitions = [1, 2, 3, 2, 1];
    (0..5).map(|k| RotationFactor::new(transitions[k], angles[k], phases[k])).collect()
}

/// Stable descending order of the weights: `sigma[k]` is the index of the
/// k-th largest weight.
pub fn descending_order(w: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..w.len()).collect();
    idx.sort_by(|&a, &b| w[b].total_cmp(&w[a]));
    idx
}

/// Largest `Tr(A U rho0 U^dagger)` over all unitaries, and the pairing `sigma`.
pub fn kinematical_bound(a: &ComplexMatrix, weights: &[f64]) -> Result<(f64, Vec<usize>)> {
    check_weights(weights)?;
    if a.nrows() != weights.len() || a.ncols() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            actual: a.nrows(),
        });
    }
    let eig = hermitian_eigensystem(a)?;
    let sigma = descending_order(weights);
    let bound = sigma.iter().zip(&eig.values).map(|(&s, l)| weights[s] * l).sum();
    Ok((bound, sigma))
}

/// Maps the k-th most populated level onto the k-th eigenvector of `A`.
pub fn observable_max_scheme(a: &ComplexMatrix, weights: &[f64]) -> Result<SchemeResult> {
    let (bound, sigma) = kinematical_bound(a, weights)?;
    let n = weights.len();
    let eig = hermitian_eigensystem(a)?;
    let mut u1 = ComplexMatrix::zeros(n, n);
    for (k, &s) in sigma.iter().enumerate() {
        u1.set_column(s, &eig.vectors.column(k));
    }
    let f = decompose_mod_phase(&u1)?;
    let initial = QuantumState::ensemble(weights)?;
    let predicted = initial.evolve(&u1).density_matrix();
    Ok(SchemeResult {
        name: "maximize",
        factorization: f,
        initial,
        predicted,
        objective: Objective::Expectation(a.clone()),
        predicted_value: bound,
        notes: vec![format!("kinematical bound: {bound:e}")],
    })
}

/// Objective reached when pulse `index` (0-based) gets phase `phase`.
pub fn phase_sensitivity_probe(scheme: &SchemeResult, index: usize, phase: f64) -> Result<f64> {
    let mut f = scheme.factorization.clone();
    let len = f.factors.len();
    let factor = f.factors.get_mut(index).ok_or_else(|| {
        Error::InvalidParameter(format!("pulse index {index} out of range ({len} pulses)"))
    })?;
    factor.phase = wrap_angle(phase);
    let u = f.factor_product()?;
    Ok(scheme.objective.evaluate(&scheme.initial.evolve(&u).density_matrix()))
}

/// Transition dipole operator `sum_m d_m (|m><m+1| + |m+1><m|)`.
pub fn dipole_operator(system: &LevelSystem) -> ComplexMatrix {
    let n = system.level_count();
    let mut a = ComplexMatrix::zeros(n, n);
    for (m, &d) in system.dipoles().iter().enumerate() {
        a[(m, m + 1)] = Complex64::new(d, 0.0);
        a[(m + 1, m)] = Complex64::new(d, 0.0);
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Transfer,
    Invert,
    Superpose,
    Maximize,
}

impl SchemeKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "transfer" => Ok(Self::Transfer),
            "invert" => Ok(Self::Invert),
            "superpose" => Ok(Self::Superpose),
            "maximize" => Ok(Self::Maximize),
            other => Err(Error::InvalidParameter(format!(
                "unknown scheme {other:?} (expected transfer, invert, superpose or maximize)"
            ))),
        }
    }
}

/// Scheme request JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeRequest {
    pub scheme: SchemeKind,
    pub system: SystemRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<MatrixDoc>,
}

impl SchemeRequest {
    /// Resolves the system and runs the scheme. Missing weights default to the
    /// ground state, missing phases to zero, a missing observable to the
    /// transition dipole operator.
    pub fn run(&self) -> Result<(LevelSystem, SchemeResult)> {
        let system = self.system.clone().resolve()?;
        let n = system.level_count();
        let weights = match &self.weights {
            Some(w) if w.len() != n => {
                return Err(Error::LengthMismatch(format!("{} weights for {n} levels", w.len())))
            }
            Some(w) => w.clone(),
            None => {
                let mut w = vec![0.0; n];
                w[0] = 1.0;
                w
            }
        };
        let result = match self.scheme {
            SchemeKind::Transfer => population_transfer_scheme(n)?,
            SchemeKind::Invert => inversion_scheme(&weights)?,
            SchemeKind::Superpose => {
                let r = self
                    .r
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("superpose needs amplitudes r".into()))?;
                if r.len() != n {
                    return Err(Error::LengthMismatch(format!("{} amplitudes for {n} levels", r.len())));
                }
                let theta = self.theta.clone().unwrap_or_else(|| vec![0.0; n]);
                superposition_scheme(r, &theta)?
            }
            SchemeKind::Maximize => {
                let a = match &self.observable {
                    Some(doc) => doc.to_matrix()?,
                    None => dipole_operator(&system),
                };
                observable_max_scheme(&a, &weights)?
            }
        };
        Ok((system, result))
    }
}
