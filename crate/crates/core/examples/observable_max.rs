//! Drives the HF dipole average to its kinematical bound, then shows how much
//! is lost when a single pulse phase is changed.

use std::f64::consts::FRAC_PI_2;

use qlgc::dynamics::{propagate_piecewise, SimOptions};
use qlgc::pulse::{schedule_from_factorization, Policy, Shape};
use qlgc::schemes::{dipole_operator, kinematical_bound, observable_max_scheme};
use qlgc::system::HF_P0;
use qlgc::hf4_preset;

fn main() -> qlgc::Result<()> {
    let hf = hf4_preset();
    let weights = [0.4, 0.3, 0.2, 0.1];
    let a = dipole_operator(&hf);
    let (bound, sigma) = kinematical_bound(&a, &weights)?;
    println!("bound = {:.6} p0, pairing {sigma:?}", bound / HF_P0);

    let scheme = observable_max_scheme(&a, &weights)?;
    let s = schedule_from_factorization(
        &scheme.factorization,
        &hf,
        Shape::Swp { tau0: 20e-12 },
        Policy::FixedDuration { duration: 200e-12 },
        0.0,
    )?;
    let opts = SimOptions {
        observable: Some(a.clone()),
        ..SimOptions::default()
    };
    let run = propagate_piecewise(&s, &scheme.initial, &opts)?;
    let achieved = run.series.last().and_then(|x| x.observable).expect("observable column");
    println!("achieved = {:.6} p0 with {} pulses", achieved / HF_P0, s.pulses().len());

    let rho = run.final_state.density_matrix();
    for (m, n) in [(1, 2), (1, 4), (2, 3), (3, 4)] {
        println!("  rho{m}{n} = {:+.4}", rho[(m - 1, n - 1)].re);
    }

    let flipped = s.with_phase(0, FRAC_PI_2)?;
    let run = propagate_piecewise(&flipped, &scheme.initial, &opts)?;
    let value = run.series.last().and_then(|x| x.observable).expect("observable column");
    println!("first phase +pi/2: {:.6} p0", value / HF_P0);
    Ok(())
}
