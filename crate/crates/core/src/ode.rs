//! Adaptive Dormand-Prince 5(4) integrator for matrix ODEs `dU/dt = f(t, U)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

/// Integration statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
}

impl Dopri5 {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            max_steps: 10_000_000,
        }
    }

    /// Advances `y` from `t0` to `t1`. `h` holds the step-size guess on entry
    /// and the last proposed step on exit, so consecutive calls continue smoothly.
    pub fn integrate<F>(&self, f: F, t0: f64, t1: f64, y: &mut ComplexMatrix, h: &mut f64, stats: &mut Stats) -> Result<()>
    where
        F: Fn(f64, &ComplexMatrix) -> ComplexMatrix,
    {
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(());
        }
        if !(*h > 0.0) || *h > span {
            *h = span;
        }
        let h_min = 1e-14 * t1.abs().max(span);
        let mut t = t0;
        let mut k1 = f(t, y);
        let mut steps = 0usize;
        while t < t1 {
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::StepUnderflow { t, h: *h });
            }
            let last = t + *h >= t1 - 1e-15 * span;
            let step = if last { t1 - t } else { *h };
            if step < h_min && !last {
                return Err(Error::StepUnderflow { t, h: step });
            }
            let mut k: Vec<ComplexMatrix> = Vec::with_capacity(7);
            k.push(k1.clone());
            for i in 1..7 {
                let mut yi = y.clone();
                for (j, kj) in k.iter().enumerate().take(i) {
                    if A[i][j] != 0.0 {
                        yi += kj * Complex64::new(step * A[i][j], 0.0);
                    }
                }
                k.push(f(t + C[i] * step, &yi));
            }
            // stage 7 evaluates at the fifth-order solution
            let mut y_new = y.clone();
            for (j, kj) in k.iter().enumerate().take(6) {
                if A[6][j] != 0.0 {
                    y_new += kj * Complex64::new(step * A[6][j], 0.0);
                }
            }
            let mut err = 0.0f64;
            for idx in 0..y.len() {
                let mut e = Complex64::new(0.0, 0.0);
                for (s, ks) in k.iter().enumerate() {
                    if E[s] != 0.0 {
                        e += ks[idx] * E[s];
                    }
                }
                let sc = self.atol + self.rtol * y[idx].norm().max(y_new[idx].norm());
                let r = (e * step).norm() / sc;
                err += r * r;
            }
            let err = (err / y.len() as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::StepUnderflow { t, h: step });
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                t = if last { t1 } else { t + step };
                *y = y_new;
                k1 = k.pop().expect("seven stages");
                stats.accepted += 1;
                if !last {
                    *h = step * factor;
                }
            } else {
                stats.rejected += 1;
                *h = step * factor.min(1.0);
                if *h < h_min {
                    return Err(Error::StepUnderflow { t, h: *h });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn exponential_growth() {
        let mut y = ComplexMatrix::from_element(1, 1, c(1.0));
        let mut h = 0.0;
        let mut st = Stats::default();
        Dopri5::new(1e-10, 1e-12).integrate(|_, y| y.clone(), 0.0, 2.0, &mut y, &mut h, &mut st).unwrap();
        assert!((y[(0, 0)].re - 2f64.exp()).abs() < 1e-8);
        assert!(st.accepted > 5);
    }

    #[test]
    fn rotation_stays_on_circle() {
        // dy/dt = i w y
        let w = 3e10;
        let mut y = ComplexMatrix::from_element(1, 1, c(1.0));
        let mut h = 0.0;
        let mut st = Stats::default();
        let t1 = 1e-9;
        Dopri5::new(1e-11, 1e-13)
            .integrate(|_, y| y * Complex64::new(0.0, w), 0.0, t1, &mut y, &mut h, &mut st)
            .unwrap();
        let want = Complex64::from_polar(1.0, w * t1);
        assert!((y[(0, 0)] - want).norm() < 1e-8);
    }

    #[test]
    fn blow_up_reports_underflow() {
        let mut y = ComplexMatrix::from_element(1, 1, c(1.0));
        let mut h = 0.0;
        let mut st = Stats::default();
        let r = Dopri5::new(1e-10, 1e-12).integrate(|_, y| y.map(|z| z * z), 0.0, 2.0, &mut y, &mut h, &mut st);
        assert!(matches!(r, Err(Error::StepUnderflow { .. })));
    }
}
