#![allow(dead_code)]

use num_complex::Complex64;
use qlgc::{ComplexMatrix, ComplexVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub const PS: f64 = 1e-12;

/// Haar-like unitary: QR of a complex Gaussian matrix with the phases of
/// R's diagonal pushed into Q.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| {
        Complex64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let d = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        n,
        (0..n).map(|k| r[(k, k)] / r[(k, k)].norm()),
    ));
    q * d
}

/// The equal-superposition target written out entry by entry.
pub fn equal_superposition_target() -> ComplexMatrix {
    let (s2, s3, s6) = (2f64.sqrt(), 3f64.sqrt(), 6f64.sqrt());
    let rows = [
        [0.5, -s3 / 6.0, -s6 / 6.0, -s2 / 2.0],
        [0.5, s3 / 2.0, 0.0, 0.0],
        [0.5, -s3 / 6.0, s6 / 3.0, 0.0],
        [0.5, -s3 / 6.0, -s6 / 6.0, s2 / 2.0],
    ];
    ComplexMatrix::from_fn(4, 4, |i, j| Complex64::new(rows[i][j], 0.0))
}

/// Eigenvalues of the tridiagonal operator with off-diagonals 1, sqrt2, sqrt3.
pub fn dipole_lambdas() -> [f64; 4] {
    let l1 = (3.0 + 6f64.sqrt()).sqrt();
    let l2 = (3.0 - 6f64.sqrt()).sqrt();
    [l1, l2, -l2, -l1]
}

/// Maximum of sum_k w_{p(k)} lambda_k over all permutations p.
pub fn brute_force_bound(w: &[f64], lambda: &[f64]) -> f64 {
    fn go(k: usize, p: &mut Vec<usize>, w: &[f64], lambda: &[f64], best: &mut f64) {
        if k == p.len() {
            *best = best.max(p.iter().zip(lambda).map(|(&i, l)| w[i] * l).sum());
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            go(k + 1, p, w, lambda, best);
            p.swap(k, i);
        }
    }
    let mut p: Vec<usize> = (0..w.len()).collect();
    let mut best = f64::MIN;
    go(0, &mut p, w, lambda, &mut best);
    best
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
