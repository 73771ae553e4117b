//! Dormand-Prince 5(4) with adaptive steps, for complex state vectors.

#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth minus fourth order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

pub struct Dopri5 {
    k: [Vec<Complex64>; 7],
    stage: Vec<Complex64>,
    next: Vec<Complex64>,
    /// Last accepted step size, reused across intervals.
    pub h: f64,
    pub steps: usize,
}

impl Dopri5 {
    pub fn new(dim: usize, h0: f64) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); dim];
        Self {
            k: std::array::from_fn(|_| z.clone()),
            stage: z.clone(),
            next: z,
            h: h0,
            steps: 0,
        }
    }

    /// Integrates `y' = f(t, y)` from `t0` to `t1` in place.
    pub fn integrate<F>(&mut self, f: &mut F, t0: f64, t1: f64, y: &mut [Complex64], tol: &Tolerances) -> Result<()>
    where
        F: FnMut(f64, &[Complex64], &mut [Complex64]),
    {
        let n = y.len();
        let mut t = t0;
        let mut fsal_valid = false;
        while t < t1 {
            if self.steps >= tol.max_steps {
                return Err(Error::numeric(format!("ode step budget of {} exhausted at t = {t:e}", tol.max_steps)));
            }
            let mut h = self.h.min(t1 - t);
            let last = h >= t1 - t;
            if h <= 1e-14 * t.abs().max(t1 - t0) {
                return Err(Error::numeric(format!("ode step size underflow at t = {t:e} (h = {h:e})")));
            }
            if !fsal_valid {
                f(t, y, &mut self.k[0]);
            }
            self.stages(f, t, h, y);
            let mut err: f64 = 0.0;
            for i in 0..n {
                let e = h
                    * (E1 * self.k[0][i]
                        + E3 * self.k[2][i]
                        + E4 * self.k[3][i]
                        + E5 * self.k[4][i]
                        + E6 * self.k[5][i]
                        + E7 * self.k[6][i]);
                let scale = tol.atol + tol.rtol * y[i].norm().max(self.next[i].norm());
                err = err.max(e.norm() / scale);
            }
            if !err.is_finite() {
                return Err(Error::numeric(format!("non-finite ode state at t = {t:e}")));
            }
            self.steps += 1;
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                t = if last { t1 } else { t + h };
                y.copy_from_slice(&self.next);
                self.k.swap(0, 6);
                fsal_valid = true;
                if !last {
                    self.h = h * factor;
                } else {
                    // Keep the unclipped step for the next interval.
                    self.h = self.h.max(h * factor);
                }
            } else {
                h *= factor.min(1.0);
                self.h = h;
                fsal_valid = true;
            }
        }
        Ok(())
    }

    fn stages<F>(&mut self, f: &mut F, t: f64, h: f64, y: &[Complex64])
    where
        F: FnMut(f64, &[Complex64], &mut [Complex64]),
    {
        let n = y.len();
        let tableau: [(f64, &[f64]); 5] = [
            (C2, &[A21]),
            (C3, &[A31, A32]),
            (C4, &[A41, A42, A43]),
            (C5, &[A51, A52, A53, A54]),
            (1.0, &[A61, A62, A63, A64, A65]),
        ];
        for (s, (c, a)) in tableau.iter().enumerate() {
            for i in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, aj) in a.iter().enumerate() {
                    acc += *aj * self.k[j][i];
                }
                self.stage[i] = y[i] + h * acc;
            }
            f(t + c * h, &self.stage, &mut self.k[s + 1]);
        }
        for i in 0..n {
            self.next[i] = y[i]
                + h * (B1 * self.k[0][i] + B3 * self.k[2][i] + B4 * self.k[3][i] + B5 * self.k[4][i] + B6 * self.k[5][i]);
        }
        let next = std::mem::take(&mut self.next);
        f(t + h, &next, &mut self.k[6]);
        self.next = next;
    }
}
