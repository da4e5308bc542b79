//! Time evolution under a pulse schedule.
//!
//! Two engines compute the interaction-picture propagator `U_I(t)`:
//! [`propagate_piecewise`] uses the closed-form factor with the running
//! envelope integral, [`propagate_ode`] integrates
//! `dU_I/dt = sum_m (E_m(t)/2)(d_m/hbar)(x_m sin(phi) - y_m cos(phi)) U_I`
//! numerically. Lab-frame quantities follow from `U_0(t) = diag(e^{-i E_n t / hbar})`.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigensystem, hermiticity_defect, ComplexMatrix, ComplexVector, RotationFactor};
use crate::ode::{Dopri5, Stats};
use crate::pulse::PulseSchedule;
use crate::system::LevelSystem;

pub const DEFAULT_SAMPLES_PER_PULSE: usize = 512;
pub const DEFAULT_ODE_TOL: f64 = 1e-9;
const STATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Lab,
    Interaction,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateKind {
    Pure(ComplexVector),
    Density(ComplexMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub kind: StateKind,
    pub frame: Frame,
}

impl QuantumState {
    pub fn pure(v: ComplexVector, frame: Frame) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidParameter("empty state vector".into()));
        }
        let norm = v.norm();
        if !((norm - 1.0).abs() <= STATE_TOL) {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            kind: StateKind::Pure(v),
            frame,
        })
    }

    pub fn density(rho: ComplexMatrix, frame: Frame) -> Result<Self> {
        let n = rho.nrows();
        if n == 0 || rho.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: rho.ncols(),
            });
        }
        let asym = hermiticity_defect(&rho);
        if asym > STATE_TOL {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        let tr = rho.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::InvalidParameter(format!("density matrix trace is {tr}, expected 1")));
        }
        let eig = hermitian_eigensystem(&rho)?;
        if let Some(&low) = eig.values.last() {
            if low < -STATE_TOL {
                return Err(Error::InvalidParameter(format!("density matrix has eigenvalue {low}")));
            }
        }
        Ok(Self {
            kind: StateKind::Density(rho),
            frame,
        })
    }

    /// `|k>` (1-based).
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::InvalidParameter(format!("level {k} out of range for {n} levels")));
        }
        let mut v = ComplexVector::zeros(n);
        v[k - 1] = Complex64::new(1.0, 0.0);
        Self::pure(v, Frame::Interaction)
    }

    pub fn ground(n: usize) -> Result<Self> {
        Self::basis(n, 1)
    }

    /// Incoherent ensemble `sum_n w_n |n><n|`.
    pub fn ensemble(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::InvalidParameter("ensemble weights must be non-negative".into()));
        }
        let rho = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
            weights.len(),
            weights.iter().map(|&w| Complex64::new(w, 0.0)),
        ));
        Self::density(rho, Frame::Interaction)
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            StateKind::Pure(v) => v.len(),
            StateKind::Density(r) => r.nrows(),
        }
    }

    pub fn density_matrix(&self) -> ComplexMatrix {
        match &self.kind {
            StateKind::Pure(v) => v * v.adjoint(),
            StateKind::Density(r) => r.clone(),
        }
    }

    /// `U psi` or `U rho U^dagger`, frame unchanged.
    pub fn evolve(&self, u: &ComplexMatrix) -> Self {
        let kind = match &self.kind {
            StateKind::Pure(v) => StateKind::Pure(u * v),
            StateKind::Density(r) => StateKind::Density(u * r * u.adjoint()),
        };
        Self { kind, frame: self.frame }
    }

    /// Re-expresses the state in `frame` at time `t`.
    pub fn in_frame(&self, frame: Frame, system: &LevelSystem, t: f64) -> Self {
        let u0 = free_propagator(system, t);
        let moved = match (self.frame, frame) {
            (a, b) if a == b => return self.clone(),
            (Frame::Interaction, Frame::Lab) => self.evolve(&u0),
            _ => self.evolve(&u0.adjoint()),
        };
        Self { frame, ..moved }
    }
}

/// `diag(e^{-i E_n t / hbar})`.
pub fn free_propagator(system: &LevelSystem, t: f64) -> ComplexMatrix {
    let e = system.energies();
    ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        e.len(),
        e.iter().map(|&en| Complex64::from_polar(1.0, -en * t / HBAR)),
    ))
}

/// Populations, coherence magnitudes, energy and observable average.
#[derive(Debug, Clone, PartialEq)]
pub struct Observables {
    pub populations: Vec<f64>,
    /// `|rho_mn|` for `m < n`, lexicographic.
    pub coherences: Vec<f64>,
    /// `<H_0>`, J.
    pub energy: f64,
    pub observable: Option<f64>,
}

/// For a lab-frame state the observable average uses the dynamic observable
/// `U_0(t) A U_0(t)^dagger`; for an interaction-frame state it is `Tr(A rho)`.
pub fn observables(state: &QuantumState, system: &LevelSystem, a: Option<&ComplexMatrix>, t: f64) -> Result<Observables> {
    let n = system.level_count();
    if state.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: state.dim(),
        });
    }
    let rho = state.density_matrix();
    let observable = match a {
        None => None,
        Some(a) => {
            check_observable(a, n)?;
            let a_frame = match state.frame {
                Frame::Interaction => a.clone(),
                Frame::Lab => {
                    let u0 = free_propagator(system, t);
                    &u0 * a * u0.adjoint()
                }
            };
            Some((a_frame * &rho).trace().re)
        }
    };
    Ok(record(&rho, system, observable))
}

fn check_observable(a: &ComplexMatrix, n: usize) -> Result<()> {
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: a.nrows(),
        });
    }
    let scale = a.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let asym = hermiticity_defect(a);
    if asym > 1e-10 * scale {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    Ok(())
}

fn record(rho: &ComplexMatrix, system: &LevelSystem, observable: Option<f64>) -> Observables {
    let n = rho.nrows();
    let populations: Vec<f64> = (0..n).map(|k| rho[(k, k)].re).collect();
    let mut coherences = Vec::with_capacity(n * (n - 1) / 2);
    for m in 0..n {
        for k in m + 1..n {
            coherences.push(rho[(m, k)].norm());
        }
    }
    let energy = populations.iter().zip(system.energies()).map(|(p, e)| p * e).sum();
    Observables {
        populations,
        coherences,
        energy,
        observable,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub populations: Vec<f64>,
    pub coherences: Vec<f64>,
    pub energy: f64,
    pub observable: Option<f64>,
    /// Active field envelope, V/m.
    pub envelope: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub levels: usize,
    pub samples: Vec<Sample>,
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl TimeSeries {
    pub fn header(levels: usize) -> String {
        let mut cols = vec!["t_s".to_string()];
        cols.extend((1..=levels).map(|k| format!("pop_{k}")));
        for m in 1..=levels {
            for k in m + 1..=levels {
                cols.push(format!("coh_{m}_{k}"));
            }
        }
        cols.extend(["energy_J", "obs_avg", "envelope_Vm"].map(String::from));
        cols.join(",")
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn to_csv(&self) -> String {
        let mut out = Self::header(self.levels);
        out.push('\n');
        for s in &self.samples {
            let mut row = vec![format_float(s.t)];
            row.extend(s.populations.iter().map(|&v| format_float(v)));
            row.extend(s.coherences.iter().map(|&v| format_float(v)));
            row.push(format_float(s.energy));
            row.push(s.observable.map(format_float).unwrap_or_default());
            row.push(format_float(s.envelope));
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty CSV".into()))?;
        let levels = header.split(',').filter(|c| c.starts_with("pop_")).count();
        if levels < 1 || header != Self::header(levels) {
            return Err(Error::Format(format!("unexpected CSV header {header:?}")));
        }
        let ncoh = levels * (levels - 1) / 2;
        let width = 1 + levels + ncoh + 3;
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::Format(format!("bad number {s:?}")))
        };
        let mut samples = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != width {
                return Err(Error::Format(format!("row {} has {} columns, expected {width}", i + 2, cells.len())));
            }
            let nums = |r: std::ops::Range<usize>| cells[r].iter().map(|c| parse(c)).collect::<Result<Vec<_>>>();
            let obs_cell = cells[width - 2];
            samples.push(Sample {
                t: parse(cells[0])?,
                populations: nums(1..1 + levels)?,
                coherences: nums(1 + levels..1 + levels + ncoh)?,
                energy: parse(cells[width - 3])?,
                observable: if obs_cell.is_empty() { None } else { Some(parse(obs_cell)?) },
                envelope: parse(cells[width - 1])?,
            });
        }
        Ok(Self { levels, samples })
    }
}

/// Sampling and observable settings shared by both engines.
#[derive(Debug, Clone)]
pub struct SimOptions {
    pub samples_per_pulse: usize,
    pub observable: Option<ComplexMatrix>,
    /// Keep sampling free evolution after the last pulse until this time.
    pub t_end: Option<f64>,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            samples_per_pulse: DEFAULT_SAMPLES_PER_PULSE,
            observable: None,
            t_end: None,
        }
    }
}

/// Outcome of a propagation.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub series: TimeSeries,
    /// `U_I(T)` at the last sample.
    pub propagator: ComplexMatrix,
    /// Final state in the interaction frame.
    pub final_state: QuantumState,
    /// Largest `||U_I^dagger U_I - I||_F` over the samples.
    pub max_unitarity_defect: f64,
}

/// Sample times: each pulse window split into `per_pulse` equal steps, plus
/// `t = 0`, gap endpoints and an optional free tail.
fn sample_grid(s: &PulseSchedule, per_pulse: usize, t_end: Option<f64>) -> Vec<f64> {
    let per_pulse = per_pulse.max(1);
    let mut ts = vec![0.0];
    for p in s.pulses() {
        for j in 0..=per_pulse {
            let t = if j == per_pulse {
                p.end
            } else {
                p.start + p.duration() * j as f64 / per_pulse as f64
            };
            if t > *ts.last().expect("non-empty") {
                ts.push(t);
            }
        }
    }
    let total = s.total_duration();
    if let Some(end) = t_end {
        if end > total {
            for j in 1..=per_pulse {
                ts.push(total + (end - total) * j as f64 / per_pulse as f64);
            }
        }
    }
    ts
}

fn check_state(s: &PulseSchedule, state0: &QuantumState) -> Result<QuantumState> {
    let n = s.level_count();
    if state0.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: state0.dim(),
        });
    }
    // both frames coincide at t = 0
    Ok(QuantumState {
        frame: Frame::Interaction,
        ..state0.clone()
    })
}

struct Recorder<'a> {
    schedule: &'a PulseSchedule,
    state0: QuantumState,
    observable: Option<&'a ComplexMatrix>,
    series: TimeSeries,
    worst_defect: f64,
}

impl<'a> Recorder<'a> {
    fn new(schedule: &'a PulseSchedule, state0: QuantumState, observable: Option<&'a ComplexMatrix>) -> Result<Self> {
        if let Some(a) = observable {
            check_observable(a, schedule.level_count())?;
        }
        Ok(Self {
            schedule,
            state0,
            observable,
            series: TimeSeries {
                levels: schedule.level_count(),
                samples: Vec::new(),
            },
            worst_defect: 0.0,
        })
    }

    fn push(&mut self, t: f64, u: &ComplexMatrix) {
        let n = u.nrows();
        self.worst_defect = self
            .worst_defect
            .max((u.adjoint() * u - ComplexMatrix::identity(n, n)).norm());
        let rho = self.state0.evolve(u).density_matrix();
        let obs = self.observable.map(|a| (a * &rho).trace().re);
        let r = record(&rho, self.schedule.system(), obs);
        self.series.samples.push(Sample {
            t,
            populations: r.populations,
            coherences: r.coherences,
            energy: r.energy,
            observable: r.observable,
            envelope: self.schedule.envelope(t),
        });
    }

    fn finish(self, u: ComplexMatrix) -> Propagation {
        Propagation {
            final_state: self.state0.evolve(&u),
            propagator: u,
            series: self.series,
            max_unitarity_defect: self.worst_defect,
        }
    }
}

/// Closed-form propagation: inside pulse `k`,
/// `U_I(t) = V(m_k, C_k(t), phi_k) U_I(t_{k-1})` with the running angle `C_k(t)`.
pub fn propagate_piecewise(s: &PulseSchedule, state0: &QuantumState, opts: &SimOptions) -> Result<Propagation> {
    let state0 = check_state(s, state0)?;
    let n = s.level_count();
    let mut rec = Recorder::new(s, state0, opts.observable.as_ref())?;
    let grid = sample_grid(s, opts.samples_per_pulse, opts.t_end);
    let pulses = s.pulses();
    let dipoles = s.system().dipoles();

    let mut before = ComplexMatrix::identity(n, n);
    let mut next = 0usize;
    for &t in &grid {
        while next < pulses.len() && t > pulses[next].end {
            let p = &pulses[next];
            let full = RotationFactor::new(p.transition, p.running_angle(p.end, dipoles[p.transition - 1]), p.phase);
            full.apply_left(&mut before);
            next += 1;
        }
        let u = match pulses.get(next).filter(|p| t >= p.start) {
            Some(p) => {
                let mut u = before.clone();
                RotationFactor::new(p.transition, p.running_angle(t, dipoles[p.transition - 1]), p.phase).apply_left(&mut u);
                u
            }
            None => before.clone(),
        };
        rec.push(t, &u);
    }
    for p in &pulses[next..] {
        RotationFactor::new(p.transition, p.running_angle(p.end, dipoles[p.transition - 1]), p.phase).apply_left(&mut before);
    }
    Ok(rec.finish(before))
}

/// Generator `sum_m (E_m(t)/2)(d_m/hbar) G_m(phi_m)` of the interaction-picture
/// Schroedinger equation, built from the schedule's envelopes.
fn generator(s: &PulseSchedule, t: f64) -> ComplexMatrix {
    let n = s.level_count();
    let mut g = ComplexMatrix::zeros(n, n);
    for p in s.pulses().iter().filter(|p| p.contains(t)) {
        let d = s.system().dipoles()[p.transition - 1];
        let w = p.envelope(t) / 2.0 * d / HBAR;
        let m = p.transition - 1;
        // x sin(phi) - y cos(phi): (m, m+1) -> sin - i cos, (m+1, m) -> -sin - i cos
        let (sin, cos) = p.phase.sin_cos();
        g[(m, m + 1)] += Complex64::new(w * sin, -w * cos);
        g[(m + 1, m)] += Complex64::new(-w * sin, -w * cos);
    }
    g
}

/// Numerical propagation with an adaptive Dormand-Prince 5(4) integrator.
/// `rel_tol` must lie in `[1e-12, 1e-3]`; no re-unitarization is applied.
pub fn propagate_ode(s: &PulseSchedule, state0: &QuantumState, rel_tol: f64, opts: &SimOptions) -> Result<Propagation> {
    if !(1e-12..=1e-3).contains(&rel_tol) {
        return Err(Error::InvalidParameter(format!("ODE tolerance {rel_tol} outside [1e-12, 1e-3]")));
    }
    let state0 = check_state(s, state0)?;
    let n = s.level_count();
    let mut rec = Recorder::new(s, state0, opts.observable.as_ref())?;
    let grid = sample_grid(s, opts.samples_per_pulse, opts.t_end);
    // local error control two decades below the requested global accuracy
    let solver = Dopri5::new(rel_tol * 1e-2, rel_tol * 1e-2);
    let mut stats = Stats::default();

    let mut u = ComplexMatrix::identity(n, n);
    let mut h = 0.0;
    let mut t_prev = 0.0;
    rec.push(0.0, &u);
    for &t in &grid[1..] {
        // integrate each pulse window separately so envelope edges fall on step boundaries
        let mut a = t_prev;
        while a < t {
            let cut = s
                .pulses()
                .iter()
                .flat_map(|p| [p.start, p.end])
                .filter(|&b| b > a && b < t)
                .fold(t, f64::min);
            let active = s.pulses().iter().any(|p| p.start < cut && p.end > a);
            if active {
                solver.integrate(|tt, y| generator(s, tt) * y, a, cut, &mut u, &mut h, &mut stats)?;
            }
            a = cut;
        }
        rec.push(t, &u);
        t_prev = t;
    }
    Ok(rec.finish(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::{reconstruct, Factorization};
    use crate::pulse::{schedule_from_factorization, Policy, Shape};
    use crate::system::{build_ladder_system, hf4_preset, rb4_preset};
    use std::f64::consts::{FRAC_PI_2, PI};

    const PS: f64 = 1e-12;

    fn transfer(sys: &LevelSystem, shape: Shape) -> PulseSchedule {
        let n = sys.level_count();
        let f = Factorization::from_factors(n, (1..n).map(|m| RotationFactor::new(m, FRAC_PI_2, -FRAC_PI_2)).collect()).unwrap();
        schedule_from_factorization(&f, sys, shape, Policy::FixedDuration { duration: 200.0 * PS }, 0.0).unwrap()
    }

    fn opts(k: usize) -> SimOptions {
        SimOptions {
            samples_per_pulse: k,
            ..SimOptions::default()
        }
    }

    #[test]
    fn free_propagator_values() {
        let sys = build_ladder_system(&[0.0, 2e-19], &[1e-29], None).unwrap();
        assert_eq!(free_propagator(&sys, 0.0), ComplexMatrix::identity(2, 2));
        let t = PI * HBAR / 2e-19;
        let u = free_propagator(&sys, t);
        assert!((u[(1, 1)] / u[(0, 0)] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        let u = free_propagator(&rb4_preset(), 3.7e-10);
        assert!(u.diagonal().iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn ground_state_observables() {
        let sys = hf4_preset();
        let o = observables(&QuantumState::ground(4).unwrap(), &sys, None, 1e-9).unwrap();
        assert_eq!(o.populations, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(o.energy, sys.energies()[0]);
        assert!(o.coherences.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn dynamic_observable_is_frame_independent() {
        let sys = hf4_preset();
        let v = ComplexVector::from_element(4, Complex64::new(0.5, 0.0));
        let psi = QuantumState::pure(v, Frame::Interaction).unwrap();
        let mut a = ComplexMatrix::zeros(4, 4);
        for m in 0..3 {
            a[(m, m + 1)] = Complex64::new(1.0 + m as f64, 0.0);
            a[(m + 1, m)] = Complex64::new(1.0 + m as f64, 0.0);
        }
        let t = 1.234e-10;
        let oi = observables(&psi, &sys, Some(&a), t).unwrap();
        let lab = psi.in_frame(Frame::Lab, &sys, t);
        let ol = observables(&lab, &sys, Some(&a), t).unwrap();
        assert!((oi.observable.unwrap() - ol.observable.unwrap()).abs() < 1e-12);
        for (x, y) in oi.coherences.iter().zip(&ol.coherences) {
            assert!((x - y).abs() < 1e-14);
        }
        let bad = ComplexMatrix::from_fn(4, 4, |i, j| Complex64::new((i + 2 * j) as f64, 0.0));
        assert!(observables(&psi, &sys, Some(&bad), t).is_err());
    }

    #[test]
    fn rb_transfer_piecewise() {
        let sys = rb4_preset();
        let s = transfer(&sys, Shape::Swp { tau0: 20.0 * PS });
        let r = propagate_piecewise(&s, &QuantumState::ground(4).unwrap(), &opts(64)).unwrap();
        let last = r.series.last().unwrap();
        assert!((last.populations[3] - 1.0).abs() < 1e-9);
        let target = reconstruct(&Factorization::from_factors(4, s.factors()).unwrap()).unwrap();
        assert!((&r.propagator - target).norm() < 1e-9);
        assert!(r.max_unitarity_defect < 1e-12);
        // energy never decreases along the transfer
        for w in r.series.samples.windows(2) {
            assert!(w[1].energy >= w[0].energy - 1e-12 * sys.energies()[3]);
        }
    }

    #[test]
    fn empty_schedule_keeps_populations() {
        let sys = hf4_preset();
        let s = PulseSchedule::empty(sys);
        let st = QuantumState::ensemble(&[0.4, 0.3, 0.2, 0.1]).unwrap();
        let o = SimOptions {
            t_end: Some(1e-9),
            ..opts(8)
        };
        let r = propagate_piecewise(&s, &st, &o).unwrap();
        assert_eq!(r.series.samples.len(), 9);
        for smp in &r.series.samples {
            assert_eq!(smp.populations, vec![0.4, 0.3, 0.2, 0.1]);
            assert_eq!(smp.envelope, 0.0);
        }
        let r = propagate_ode(&s, &st, 1e-9, &o).unwrap();
        assert!((r.propagator - ComplexMatrix::identity(4, 4)).norm() < 1e-15);
    }

    #[test]
    fn engines_agree() {
        let sys = rb4_preset();
        for shape in [Shape::Swp { tau0: 20.0 * PS }, Shape::Gwp] {
            let s = transfer(&sys, shape);
            let st = QuantumState::ground(4).unwrap();
            let a = propagate_piecewise(&s, &st, &opts(32)).unwrap();
            let b = propagate_ode(&s, &st, 1e-9, &opts(32)).unwrap();
            assert!((&a.propagator - &b.propagator).norm() < 1e-7, "{}", (&a.propagator - &b.propagator).norm());
            assert!(b.max_unitarity_defect < 1e-8);
            assert!((b.series.last().unwrap().populations[3] - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn two_level_rabi_rises_monotonically() {
        let sys = build_ladder_system(&[0.0, 1e-19], &[1e-29], None).unwrap();
        let f = Factorization::from_factors(2, vec![RotationFactor::new(1, FRAC_PI_2, 0.3)]).unwrap();
        let s = schedule_from_factorization(&f, &sys, Shape::Swp { tau0: 20.0 * PS }, Policy::FixedDuration { duration: 200.0 * PS }, 0.0).unwrap();
        let r = propagate_ode(&s, &QuantumState::ground(2).unwrap(), 1e-9, &opts(64)).unwrap();
        let p2: Vec<f64> = r.series.samples.iter().map(|x| x.populations[1]).collect();
        assert!(p2.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        assert!((p2.last().unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ode_tolerance_range() {
        let sys = rb4_preset();
        let s = transfer(&sys, Shape::Gwp);
        let st = QuantumState::ground(4).unwrap();
        assert!(propagate_ode(&s, &st, 1e-2, &opts(4)).is_err());
        assert!(propagate_ode(&s, &st, 1e-13, &opts(4)).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let s = PulseSchedule::empty(hf4_preset());
        assert!(propagate_piecewise(&s, &QuantumState::ground(3).unwrap(), &opts(4)).is_err());
    }

    #[test]
    fn state_validation() {
        assert!(QuantumState::pure(ComplexVector::from_element(2, Complex64::new(1.0, 0.0)), Frame::Lab).is_err());
        assert!(QuantumState::ensemble(&[0.5, 0.6]).is_err());
        assert!(QuantumState::ensemble(&[1.2, -0.2]).is_err());
        assert!(QuantumState::basis(3, 4).is_err());
    }

    #[test]
    fn csv_round_trip_and_header() {
        assert_eq!(
            TimeSeries::header(3),
            "t_s,pop_1,pop_2,pop_3,coh_1_2,coh_1_3,coh_2_3,energy_J,obs_avg,envelope_Vm"
        );
        let sys = hf4_preset();
        let s = transfer(&sys, Shape::Gwp);
        let r = propagate_piecewise(&s, &QuantumState::ensemble(&[0.4, 0.3, 0.2, 0.1]).unwrap(), &opts(16)).unwrap();
        let text = r.series.to_csv();
        let back = TimeSeries::from_csv(&text).unwrap();
        assert_eq!(back, r.series);
        assert!(text.lines().nth(1).unwrap().contains(",,"));
        for v in [1e-300, -3.5e-19, 0.1 + 0.2, 1e16, 123.0, 0.0, 7.25e-6] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }
}
