//! Factors a unitary in both modes and prints the rotation list.

use qlgc::decompose::{decompose, reconstruct, Mode};
use qlgc::linalg::gram_schmidt_extend;
use qlgc::{ComplexMatrix, ComplexVector};
use num_complex::Complex64;

fn main() -> qlgc::Result<()> {
    // a 5-level unitary whose first column is a complex unit vector
    let raw = [(0.3, 0.1), (-0.2, 0.5), (0.4, -0.3), (0.1, 0.2), (-0.35, -0.25)];
    let v = ComplexVector::from_iterator(5, raw.iter().map(|&(r, i)| Complex64::new(r, i)));
    let v = &v / Complex64::new(v.norm(), 0.0);
    let phases = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        5,
        (0..5).map(|k| Complex64::from_polar(1.0, 0.4 * k as f64)),
    ));
    let u = gram_schmidt_extend(&v)? * phases;

    for mode in [Mode::ModPhase, Mode::Exact] {
        let f = decompose(&u, mode)?;
        println!("{mode:?}: {} factors, reconstruction error {:.2e}", f.len(), (reconstruct(&f)? - &u).norm());
        for x in &f.factors {
            println!("  V({}, {:.6}, {:+.6})", x.transition, x.angle, x.phase);
        }
        println!("  residual phases {:.6?}, global {:.6}", f.residual.thetas, f.residual.global);
    }
    Ok(())
}
