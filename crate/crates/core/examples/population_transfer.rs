//! Moves the Rb ladder from |1> to |4> with three pi-pulses, once with square
//! pulses and once with Gaussians, and prints the populations and peak fields.

use qlgc::dynamics::{propagate_piecewise, SimOptions};
use qlgc::pulse::{schedule_from_factorization, validate_schedule, Policy, Shape};
use qlgc::rb4_preset;
use qlgc::schemes::population_transfer_scheme;

fn main() -> qlgc::Result<()> {
    let rb = rb4_preset();
    let scheme = population_transfer_scheme(4)?;
    let policy = Policy::FixedDuration { duration: 200e-12 };

    for shape in [Shape::Swp { tau0: 20e-12 }, Shape::Gwp] {
        let schedule = schedule_from_factorization(&scheme.factorization, &rb, shape, policy, 0.0)?;
        let run = propagate_piecewise(&schedule, &scheme.initial, &SimOptions::default())?;
        let last = run.series.last().expect("samples");
        println!("{} pulses, T = {:.1} ps", shape.name(), schedule.total_duration() * 1e12);
        println!("  final populations {:?}", last.populations);
        for p in schedule.pulses() {
            println!(
                "  transition {}: peak field {:.1} kV/m, {:.2} kW/cm^2",
                p.transition,
                p.peak_field() / 1e3,
                p.peak_intensity() / 1e7
            );
        }
        println!("  validity checks passed: {}", validate_schedule(&schedule).passed);
    }
    Ok(())
}
