//! Compares pulse shapes and policies: durations, peak fields, validity
//! margins and the worst-case duration bound for the HF ladder.

use qlgc::decompose::Mode;
use qlgc::hf4_preset;
use qlgc::pulse::{schedule_from_factorization, total_duration_bound, validate_schedule, Policy, Shape};
use qlgc::schemes::inversion_scheme;

fn main() -> qlgc::Result<()> {
    let hf = hf4_preset();
    let scheme = inversion_scheme(&[0.25; 4])?;
    println!("minimum detuning {:.4e} rad/s", hf.min_detuning());

    let policies = [
        ("200 ps", Policy::FixedDuration { duration: 200e-12 }),
        ("5 MV/m", Policy::FixedAmplitude { max_field: 5e6 }),
        ("0.1 ps", Policy::FixedDuration { duration: 0.1e-12 }),
    ];
    for (label, policy) in policies {
        for shape in [Shape::Swp { tau0: 20e-12 }, Shape::Gwp] {
            let shape = match (shape, label) {
                (Shape::Swp { .. }, "0.1 ps") => Shape::Swp { tau0: 0.02e-12 },
                _ => shape,
            };
            let s = schedule_from_factorization(&scheme.factorization, &hf, shape, policy, 0.0)?;
            let report = validate_schedule(&s);
            let worst_ratio = report.pulses.iter().map(|p| p.rabi_ratio).fold(0.0, f64::max);
            let min_margin = report
                .pulses
                .iter()
                .filter_map(|p| p.dispersion_margin)
                .fold(f64::INFINITY, f64::min);
            println!(
                "{label:>7} {}: T = {:9.3} ps, Rabi/detuning {:.2e}, dispersion margin {:8.2}, ok = {}",
                shape.name(),
                s.total_duration() * 1e12,
                worst_ratio,
                min_margin,
                report.passed
            );
            for w in report.warnings().iter().take(1) {
                println!("          {w}");
            }
        }
    }

    let fields = [5e6; 3];
    for shape in [Shape::Swp { tau0: 20e-12 }, Shape::Gwp] {
        for mode in [Mode::ModPhase, Mode::Exact] {
            let t = total_duration_bound(&hf, &fields, shape, mode)?;
            println!("worst-case bound {} {mode:?}: {:.3} ns", shape.name(), t * 1e9);
        }
    }
    Ok(())
}
