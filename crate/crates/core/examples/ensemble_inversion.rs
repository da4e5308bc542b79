//! Reverses the populations of a thermal-like HF ensemble with six pulses and
//! shows that the outcome does not depend on the pulse phases.

use std::f64::consts::PI;

use qlgc::dynamics::{propagate_piecewise, SimOptions};
use qlgc::pulse::{schedule_from_factorization, Policy, Shape};
use qlgc::hf4_preset;
use qlgc::schemes::inversion_scheme;

fn populations(rho: &qlgc::ComplexMatrix) -> Vec<f64> {
    (0..rho.nrows()).map(|k| rho[(k, k)].re).collect()
}

fn main() -> qlgc::Result<()> {
    let hf = hf4_preset();
    let scheme = inversion_scheme(&[0.4, 0.3, 0.2, 0.1])?;

    // fixed peak field: durations follow from the pulse areas
    let policy = Policy::FixedAmplitude { max_field: 5e6 };
    for shape in [Shape::Swp { tau0: 20e-12 }, Shape::Gwp] {
        let s = schedule_from_factorization(&scheme.factorization, &hf, shape, policy, 0.0)?;
        let durations: Vec<String> = s.pulses().iter().map(|p| format!("{:.1}", p.duration() * 1e12)).collect();
        println!("{}: pulses [{}] ps, total {:.3} ns", shape.name(), durations.join(", "), s.total_duration() * 1e9);

        let opts = SimOptions::default();
        let rho = propagate_piecewise(&s, &scheme.initial, &opts)?.final_state.density_matrix();
        println!("  final populations {:.6?}", populations(&rho));

        let mut scrambled = s.clone();
        for k in 0..s.pulses().len() {
            scrambled = scrambled.with_phase(k, PI * (0.37 * k as f64 - 0.9))?;
        }
        let rho = propagate_piecewise(&scrambled, &scheme.initial, &opts)?.final_state.density_matrix();
        println!("  with other phases {:.6?}", populations(&rho));
    }
    Ok(())
}
