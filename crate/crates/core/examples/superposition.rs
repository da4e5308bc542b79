//! Builds the equal superposition of the four HF levels and checks that every
//! density-matrix element ends up with magnitude 1/4.

use qlgc::dynamics::{propagate_ode, SimOptions};
use qlgc::pulse::{schedule_from_factorization, Policy, Shape};
use qlgc::hf4_preset;
use qlgc::schemes::{superposition_phase_solution, superposition_scheme};

fn main() -> qlgc::Result<()> {
    let hf = hf4_preset();
    let scheme = superposition_scheme(&[0.5; 4], &[0.0; 4])?;
    for f in &scheme.factorization.factors {
        println!("V({}, C = {:.6}, phi = {:+.6})", f.transition, f.angle, f.phase);
    }
    for note in &scheme.notes {
        println!("{note}");
    }

    let s = schedule_from_factorization(
        &scheme.factorization,
        &hf,
        Shape::Swp { tau0: 20e-12 },
        Policy::FixedDuration { duration: 200e-12 },
        0.0,
    )?;
    let run = propagate_ode(&s, &scheme.initial, 1e-9, &SimOptions::default())?;
    let last = run.series.last().expect("samples");
    println!("coherence magnitudes {:.6?}", last.coherences);
    println!("populations {:.6?}", last.populations);

    // the same target with the first pulse phase fixed to +pi/2
    let phases = superposition_phase_solution([0.0; 4], std::f64::consts::FRAC_PI_2);
    println!("phase solution {phases:.6?}");
    Ok(())
}
