//! Dormand-Prince 5(4) with the standard fourth-order continuous extension.
//!
//! The solution is advanced with the fifth-order weights (local
//! extrapolation) and each accepted step is interpolated onto every output
//! grid point it covers, so output sampling never constrains step size.

use crate::domain::TimeGrid;
use crate::error::{Error, Result};

/// Local tolerance used for every propagation unless overridden.
pub const DEFAULT_TOLERANCE: f64 = 1e-13;

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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth minus embedded fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IntegratorStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Adaptive Dormand-Prince 5(4) driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub safety: f64,
    pub min_factor: f64,
    pub max_factor: f64,
    /// Steps shorter than this fraction of the span abort the integration.
    pub min_step_fraction: f64,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 {
            rtol: DEFAULT_TOLERANCE,
            atol: DEFAULT_TOLERANCE,
            max_steps: 10_000_000,
            safety: 0.9,
            min_factor: 0.2,
            max_factor: 10.0,
            min_step_fraction: 1e-14,
        }
    }
}

impl Dopri5 {
    pub fn with_tolerance(tol: f64) -> Self {
        Dopri5 {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }

    fn error_norm<const N: usize>(&self, err: &[f64; N], y: &[f64; N], y_new: &[f64; N]) -> f64 {
        let sum: f64 = (0..N)
            .map(|i| {
                let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                (err[i] / scale).powi(2)
            })
            .sum();
        (sum / N as f64).sqrt()
    }

    fn initial_step<const N: usize, F>(
        &self,
        rhs: &mut F,
        t0: f64,
        y0: &[f64; N],
        f0: &[f64; N],
        span: f64,
        stats: &mut IntegratorStats,
    ) -> Result<f64>
    where
        F: FnMut(f64, &[f64; N], &mut [f64; N]) -> Result<()>,
    {
        let norm = |v: &[f64; N]| {
            let s: f64 = (0..N)
                .map(|i| (v[i] / (self.atol + self.rtol * y0[i].abs())).powi(2))
                .sum();
            (s / N as f64).sqrt()
        };
        let d0 = norm(y0);
        let d1 = norm(f0);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        }
        .min(span);
        let mut y1 = [0.0; N];
        for i in 0..N {
            y1[i] = y0[i] + h0 * f0[i];
        }
        let mut f1 = [0.0; N];
        rhs(t0 + h0, &y1, &mut f1)?;
        stats.evaluations += 1;
        let mut diff = [0.0; N];
        for i in 0..N {
            diff[i] = f1[i] - f0[i];
        }
        let d2 = norm(&diff) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        Ok((100.0 * h0).min(h1).min(span))
    }

    /// Integrates `y' = rhs(t, y)` from `grid.t_start()` and returns the
    /// solution at every grid point.
    pub fn integrate<const N: usize, F>(
        &self,
        mut rhs: F,
        y0: [f64; N],
        grid: &TimeGrid,
    ) -> Result<(Vec<[f64; N]>, IntegratorStats)>
    where
        F: FnMut(f64, &[f64; N], &mut [f64; N]) -> Result<()>,
    {
        let mut stats = IntegratorStats::default();
        let span = grid.span();
        let t_end = grid.t_end();
        let h_min = self.min_step_fraction * span;

        let mut out = Vec::with_capacity(grid.len());
        out.push(y0);
        let mut next_out = 1;

        let mut t = grid.t_start();
        let mut y = y0;
        let mut k1 = [0.0; N];
        rhs(t, &y, &mut k1)?;
        stats.evaluations += 1;
        let mut h = self.initial_step(&mut rhs, t, &y, &k1, span, &mut stats)?;
        let mut last_rejected = false;

        let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
            ([0.0; N], [0.0; N], [0.0; N], [0.0; N], [0.0; N], [0.0; N]);
        let mut stage = [0.0; N];
        let mut y_new = [0.0; N];
        let mut err = [0.0; N];

        while next_out < grid.len() {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(Error::Integration {
                    t,
                    reason: format!("exceeded {} steps", self.max_steps),
                });
            }
            let remaining = t_end - t;
            let mut final_step = false;
            if h >= remaining || remaining - h <= 1e-12 * span {
                h = remaining;
                final_step = true;
            }
            if h < h_min && !final_step {
                return Err(Error::Integration {
                    t,
                    reason: format!("step size underflow (h = {h:e})"),
                });
            }

            for i in 0..N {
                stage[i] = y[i] + h * A21 * k1[i];
            }
            rhs(t + C2 * h, &stage, &mut k2)?;
            for i in 0..N {
                stage[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            rhs(t + C3 * h, &stage, &mut k3)?;
            for i in 0..N {
                stage[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            rhs(t + C4 * h, &stage, &mut k4)?;
            for i in 0..N {
                stage[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            rhs(t + C5 * h, &stage, &mut k5)?;
            for i in 0..N {
                stage[i] = y[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            let t_new = if final_step { t_end } else { t + h };
            rhs(t_new, &stage, &mut k6)?;
            for i in 0..N {
                y_new[i] = y[i]
                    + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            rhs(t_new, &y_new, &mut k7)?;
            stats.evaluations += 6;

            for i in 0..N {
                err[i] = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            let err_norm = self.error_norm(&err, &y, &y_new);
            if !err_norm.is_finite() {
                return Err(Error::Integration {
                    t,
                    reason: "non-finite error estimate".into(),
                });
            }

            if err_norm <= 1.0 {
                stats.accepted += 1;
                // continuous extension coefficients
                let mut r2 = [0.0; N];
                let mut r3 = [0.0; N];
                let mut r4 = [0.0; N];
                let mut r5 = [0.0; N];
                for i in 0..N {
                    let dy = y_new[i] - y[i];
                    let bspl = h * k1[i] - dy;
                    r2[i] = dy;
                    r3[i] = bspl;
                    r4[i] = dy - h * k7[i] - bspl;
                    r5[i] = h
                        * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                }
                while next_out < grid.len() {
                    let t_out = grid.time(next_out);
                    if next_out + 1 == grid.len() && !final_step {
                        break;
                    }
                    if t_out > t_new {
                        break;
                    }
                    let point = if t_out == t_new {
                        y_new
                    } else {
                        let theta = (t_out - t) / h;
                        let theta1 = 1.0 - theta;
                        let mut p = [0.0; N];
                        for i in 0..N {
                            p[i] = y[i]
                                + theta
                                    * (r2[i]
                                        + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
                        }
                        p
                    };
                    out.push(point);
                    next_out += 1;
                }

                t = t_new;
                y = y_new;
                k1 = k7;
                let mut factor = if err_norm == 0.0 {
                    self.max_factor
                } else {
                    (self.safety * err_norm.powf(-0.2)).clamp(self.min_factor, self.max_factor)
                };
                if last_rejected {
                    factor = factor.min(1.0);
                }
                last_rejected = false;
                h *= factor;
            } else {
                stats.rejected += 1;
                last_rejected = true;
                h *= (self.safety * err_norm.powf(-0.2)).max(self.min_factor);
            }
        }
        Ok((out, stats))
    }
}
