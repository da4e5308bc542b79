//! Propagates one schedule with the closed-form engine and the adaptive ODE
//! integrator, compares the final propagators and writes both time series.

use qlgc::decompose::{decompose, Mode};
use qlgc::dynamics::{propagate_ode, propagate_piecewise, QuantumState, SimOptions};
use qlgc::pulse::{schedule_from_factorization, Policy, Shape};
use qlgc::schemes::superposition_scheme;
use qlgc::rb4_preset;

fn main() -> qlgc::Result<()> {
    let rb = rb4_preset();
    // any unitary works; reuse the Gram-Schmidt completion of a superposition
    let target = superposition_scheme(&[0.6, 0.0, 0.48, 0.64], &[0.0, 0.0, 1.0, -2.0])?;
    let u = target.factorization.factor_product()?;
    let f = decompose(&u, Mode::ModPhase)?;
    let s = schedule_from_factorization(&f, &rb, Shape::Gwp, Policy::FixedAmplitude { max_field: 2e5 }, 10e-12)?;
    let state = QuantumState::ensemble(&[0.7, 0.2, 0.1, 0.0])?;
    let opts = SimOptions {
        samples_per_pulse: 64,
        ..SimOptions::default()
    };

    let analytic = propagate_piecewise(&s, &state, &opts)?;
    for tol in [1e-6, 1e-9, 1e-12] {
        let ode = propagate_ode(&s, &state, tol, &opts)?;
        println!(
            "rel_tol {tol:e}: |U_ode - U_piecewise| = {:.3e}, unitarity defect {:.3e}",
            (&ode.propagator - &analytic.propagator).norm(),
            ode.max_unitarity_defect
        );
    }

    let dir = std::env::temp_dir();
    let path = dir.join("qlgc_piecewise.csv");
    analytic.series.write_csv(&path)?;
    println!("{} samples written to {}", analytic.series.samples.len(), path.display());
    Ok(())
}
