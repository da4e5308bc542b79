//! Dense complex-matrix kernel: closed-form rotation factors, Gram-Schmidt
//! completion, Hermitian eigensystems and unitarity diagnostics.
//!
//! A rotation factor on transition `m` is
//! `V = exp[C (x_m sin(phi) - y_m cos(phi))]` with
//! `x_m = e_{m,m+1} - e_{m+1,m}` and `y_m = i (e_{m,m+1} + e_{m+1,m})`.
//! Its generator squares to minus the identity on the `(m, m+1)` block, so
//! `V` is the identity except for
//!
//! ```text
//! [ cos C                 -i e^{ i phi} sin C ]
//! [ -i e^{-i phi} sin C    cos C              ]
//! ```

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// One elementary rotation on an adjacent transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationFactor {
    /// 1-based transition index `m` (couples `|m>` and `|m+1>`).
    pub transition: usize,
    /// Rotation angle `C`, radians; the pulse area is `2C`.
    #[serde(rename = "angle_rad")]
    pub angle: f64,
    /// Pulse phase `phi`, radians.
    #[serde(rename = "phase_rad")]
    pub phase: f64,
}

impl RotationFactor {
    /// The phase is wrapped into `(-pi, pi]`.
    pub fn new(transition: usize, angle: f64, phase: f64) -> Self {
        Self {
            transition,
            angle,
            phase: wrap_angle(phase),
        }
    }

    /// Same rotation with non-negative angle (`-C` folded into `phi + pi`).
    pub fn normalized(self) -> Self {
        if self.angle < 0.0 {
            Self::new(self.transition, -self.angle, self.phase + PI)
        } else {
            self
        }
    }

    pub fn inverse(self) -> Self {
        Self {
            angle: -self.angle,
            ..self
        }
    }

    /// The 2x2 block acting on `(|m>, |m+1>)`.
    pub fn block(&self) -> [[Complex64; 2]; 2] {
        let (s, c) = self.angle.sin_cos();
        let e = Complex64::from_polar(1.0, self.phase);
        [
            [Complex64::new(c, 0.0), -I * e * s],
            [-I * e.conj() * s, Complex64::new(c, 0.0)],
        ]
    }

    /// Left-multiplies `m` in place: `m <- V m`.
    pub fn apply_left(&self, m: &mut ComplexMatrix) {
        let b = self.block();
        let (r0, r1) = (self.transition - 1, self.transition);
        for j in 0..m.ncols() {
            let (a, c) = (m[(r0, j)], m[(r1, j)]);
            m[(r0, j)] = b[0][0] * a + b[0][1] * c;
            m[(r1, j)] = b[1][0] * a + b[1][1] * c;
        }
    }

    /// Left-multiplies a state vector in place.
    pub fn apply_to_vector(&self, v: &mut ComplexVector) {
        let b = self.block();
        let (r0, r1) = (self.transition - 1, self.transition);
        let (a, c) = (v[r0], v[r1]);
        v[r0] = b[0][0] * a + b[0][1] * c;
        v[r1] = b[1][0] * a + b[1][1] * c;
    }
}

/// Diagonal phase matrix `e^{i Gamma / N} diag(e^{i theta_n})`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalPhases {
    pub thetas: Vec<f64>,
    /// `Gamma = arg det U`.
    pub global: f64,
}

impl DiagonalPhases {
    pub fn zero(n: usize) -> Self {
        Self {
            thetas: vec![0.0; n],
            global: 0.0,
        }
    }

    pub fn is_trivial(&self, tol: f64) -> bool {
        self.global.abs() <= tol && self.thetas.iter().all(|t| t.abs() <= tol)
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let n = self.thetas.len();
        let g = self.global / n as f64;
        ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
            n,
            self.thetas.iter().map(|t| Complex64::from_polar(1.0, t + g)),
        ))
    }
}

pub fn factor_matrix(n: usize, f: &RotationFactor) -> Result<ComplexMatrix> {
    if f.transition == 0 || f.transition >= n {
        return Err(Error::TransitionOutOfRange {
            transition: f.transition,
            levels: n,
        });
    }
    let mut m = ComplexMatrix::identity(n, n);
    f.apply_left(&mut m);
    Ok(m)
}

/// Completes a unit vector to a unitary whose first column is that vector,
/// orthonormalizing `[v, e_2, ..., e_N]` in order (with `e_1` as a fallback
/// when one of the `e_k` is already spanned).
pub fn gram_schmidt_extend(first_column: &ComplexVector) -> Result<ComplexMatrix> {
    let n = first_column.len();
    if n == 0 {
        return Err(Error::InvalidParameter("empty vector".into()));
    }
    if first_column.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidParameter("non-finite vector entry".into()));
    }
    let norm = first_column.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { norm });
    }

    let candidates = std::iter::once(first_column.clone())
        .chain((1..n).chain(std::iter::once(0)).map(|k| {
            let mut e = ComplexVector::zeros(n);
            e[k] = Complex64::new(1.0, 0.0);
            e
        }));
    let mut basis: Vec<ComplexVector> = Vec::with_capacity(n);
    for cand in candidates {
        if basis.len() == n {
            break;
        }
        let mut v = cand;
        // two passes keep the columns orthogonal to working precision
        for _ in 0..2 {
            for q in &basis {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let nv = v.norm();
        if nv > 1e-10 {
            basis.push(v / Complex64::new(nv, 0.0));
        }
    }
    Ok(ComplexMatrix::from_columns(&basis))
}

/// Eigenvalues in non-increasing order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

pub fn hermiticity_defect(a: &ComplexMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted descending; exact ties (to 1e-12 relative) are
/// ordered by the index of each eigenvector's largest component. Every
/// eigenvector is rotated so its first non-negligible component is real
/// and positive.
pub fn hermitian_eigensystem(a: &ComplexMatrix) -> Result<Eigensystem> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: a.ncols(),
        });
    }
    let scale = max_abs(a);
    if scale == 0.0 {
        return Ok(Eigensystem {
            values: vec![0.0; n],
            vectors: ComplexMatrix::identity(n, n),
        });
    }
    let asym = hermiticity_defect(a);
    if asym > 1e-10 * scale {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    let b = a.map(|z| z / scale);
    let b = (&b + b.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(b);

    let argmax = |k: usize| -> usize {
        let col = eig.eigenvectors.column(k);
        (0..n)
            .max_by(|&i, &j| col[i].norm().total_cmp(&col[j].norm()).then(j.cmp(&i)))
            .unwrap_or(0)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    // group near-equal values, then order each group by dominant basis index
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (eig.eigenvalues[order[start]] - eig.eigenvalues[order[end]]).abs() <= 1e-12 {
            end += 1;
        }
        order[start..end].sort_by_key(|&k| argmax(k));
        start = end;
    }

    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &k) in order.iter().enumerate() {
        let mut col: ComplexVector = eig.eigenvectors.column(k).into_owned();
        if let Some(z) = col.iter().copied().find(|z| z.norm() > 1e-12) {
            let rot = z.conj() / z.norm();
            col *= rot;
        }
        vectors.set_column(dst, &col);
        values.push(eig.eigenvalues[k] * scale);
    }
    Ok(Eigensystem { values, vectors })
}

/// `|| M^dagger M - I ||_F`.
pub fn unitarity_defect(m: &ComplexMatrix) -> f64 {
    let n = m.ncols();
    (m.adjoint() * m - ComplexMatrix::identity(n, n)).norm()
}

/// Row-major JSON form `{"n", "re", "im"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            n: m.nrows(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let n = self.n;
        if n == 0 {
            return Err(Error::Format("matrix dimension must be positive".into()));
        }
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(Error::Format(format!("re/im must both be {n}x{n}")));
        }
        let m = ComplexMatrix::from_fn(n, n, |i, j| Complex64::new(self.re[i][j], self.im[i][j]));
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Format("non-finite matrix entry".into()));
        }
        Ok(m)
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    /// Scaling-and-squaring Taylor exponential; test oracle only.
    pub fn expm(a: &ComplexMatrix) -> ComplexMatrix {
        let n = a.nrows();
        let norm = a.norm();
        let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
        let scaled = a / Complex64::new(2f64.powi(squarings), 0.0);
        let mut term = ComplexMatrix::identity(n, n);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &scaled / Complex64::new(k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    /// Haar-like unitary from the QR factors of a complex Gaussian matrix.
    pub fn random_unitary(n: usize, rng: &mut rand::rngs::StdRng) -> ComplexMatrix {
        use rand_distr::{Distribution, StandardNormal};
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

    pub fn generator(n: usize, m: usize, phase: f64) -> ComplexMatrix {
        // x sin(phi) - y cos(phi)
        let mut g = ComplexMatrix::zeros(n, n);
        let x = Complex64::new(1.0, 0.0);
        g[(m - 1, m)] = x * phase.sin() - I * phase.cos();
        g[(m, m - 1)] = -x * phase.sin() - I * phase.cos();
        g
    }
}
