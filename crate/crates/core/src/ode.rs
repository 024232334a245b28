//! Dormand-Prince 5(4) integrator with embedded error control.

use crate::error::{GeoError, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// difference between the 5th- and 4th-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rel: 1e-10, abs: 1e-12 }
    }
}

/// Outcome of a single trial step.
#[derive(Debug, Clone, Copy)]
pub struct Trial<const N: usize> {
    pub y: [f64; N],
    /// Weighted RMS error norm; the step is acceptable when `<= 1`.
    pub err: f64,
}

/// Adaptive stepper state. The right-hand side is supplied per call so the
/// stepper itself holds no reference to the problem.
#[derive(Debug, Clone)]
pub struct Dopri5<const N: usize> {
    pub tol: Tolerance,
    pub h_min: f64,
    pub h_max: f64,
    pub safety: f64,
    pub evaluations: usize,
}

impl<const N: usize> Dopri5<N> {
    pub fn new(tol: Tolerance) -> Self {
        Self {
            tol,
            h_min: 1e-14,
            h_max: f64::INFINITY,
            safety: 0.9,
            evaluations: 0,
        }
    }

    /// Takes one trial step of size `h` from `(t, y)`.
    pub fn trial<F>(&mut self, f: &F, t: f64, y: &[f64; N], h: f64) -> Result<Trial<N>>
    where
        F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    {
        let mut k = [[0.0; N]; 7];
        k[0] = f(t, y)?;
        for s in 1..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[s] = f(t + C[s] * h, &ys)?;
        }
        self.evaluations += 7;

        let mut y_new = *y;
        let mut err_sq = 0.0;
        for i in 0..N {
            let mut incr = 0.0;
            let mut err = 0.0;
            for s in 0..7 {
                incr += B[s] * k[s][i];
                err += E[s] * k[s][i];
            }
            y_new[i] = y[i] + h * incr;
            let scale = self.tol.abs + self.tol.rel * y[i].abs().max(y_new[i].abs());
            let e = h * err / scale;
            err_sq += e * e;
        }
        Ok(Trial {
            y: y_new,
            err: (err_sq / N as f64).sqrt(),
        })
    }

    /// Advances by one accepted step starting from a trial size `h`.
    /// Returns `(h_taken, y_new, h_next)`.
    pub fn step<F>(&mut self, f: &F, t: f64, y: &[f64; N], mut h: f64) -> Result<(f64, [f64; N], f64)>
    where
        F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    {
        loop {
            h = h.min(self.h_max);
            if h.abs() < self.h_min * t.abs().max(1.0) {
                return Err(GeoError::StepFailure { parameter: t, step: h });
            }
            // evaluation failures inside a trial (e.g. overshooting the domain)
            // are treated like an over-large error
            let trial = match self.trial(f, t, y, h) {
                Ok(trial) if trial.err.is_finite() && trial.y.iter().all(|v| v.is_finite()) => trial,
                _ => {
                    h *= 0.25;
                    continue;
                }
            };
            if trial.err <= 1.0 {
                let factor = if trial.err == 0.0 {
                    5.0
                } else {
                    (self.safety * trial.err.powf(-0.2)).clamp(0.2, 5.0)
                };
                return Ok((h, trial.y, h * factor));
            }
            h *= (self.safety * trial.err.powf(-0.2)).clamp(0.1, 0.9);
        }
    }

    /// Initial step heuristic from the size of the state and its derivative.
    pub fn initial_step<F>(&mut self, f: &F, t: f64, y: &[f64; N]) -> Result<f64>
    where
        F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    {
        let dy = f(t, y)?;
        self.evaluations += 1;
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..N {
            let scale = self.tol.abs + self.tol.rel * y[i].abs();
            d0 += (y[i] / scale).powi(2);
            d1 += (dy[i] / scale).powi(2);
        }
        let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        Ok(h.min(self.h_max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_full_period() {
        let f = |_t: f64, y: &[f64; 2]| Ok([y[1], -y[0]]);
        let mut solver = Dopri5::<2>::new(Tolerance { rel: 1e-10, abs: 1e-12 });
        let mut t = 0.0;
        let mut y = [1.0, 0.0];
        let t_end = 2.0 * std::f64::consts::PI;
        let mut h = solver.initial_step(&f, t, &y).unwrap();
        while t < t_end {
            h = h.min(t_end - t);
            let (taken, y_new, h_next) = solver.step(&f, t, &y, h).unwrap();
            t += taken;
            y = y_new;
            h = h_next;
        }
        assert!((y[0] - 1.0).abs() < 1e-8, "{y:?}");
        assert!(y[1].abs() < 1e-8, "{y:?}");
    }

    #[test]
    fn exponential_growth_is_fifth_order() {
        // one step of size h has local error O(h^6)
        let f = |_t: f64, y: &[f64; 1]| Ok([y[0]]);
        let mut solver = Dopri5::<1>::new(Tolerance::default());
        let e1 = (solver.trial(&f, 0.0, &[1.0], 0.1).unwrap().y[0] - 0.1f64.exp()).abs();
        let e2 = (solver.trial(&f, 0.0, &[1.0], 0.05).unwrap().y[0] - 0.05f64.exp()).abs();
        let order = (e1 / e2).log2();
        assert!(order > 5.5 && order < 6.5, "observed local order {order}");
    }
}
