//! Adaptive integrators: Dormand–Prince 5(4) for small fixed-dimension
//! real systems and a unitary Magnus stepper for a driven qubit.

use nalgebra::Complex;

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

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Step-size control parameters.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Upper bound on the step, e.g. a fraction of the shortest
    /// timescale of a time-dependent right-hand side.
    pub h_max: f64,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            max_steps: 5_000_000,
            h_max: f64::INFINITY,
        }
    }
}

/// Counters reported by a completed integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

fn axpy<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        for i in 0..D {
            out[i] += h * c * k[i];
        }
    }
    out
}

impl Dopri5 {
    /// Integrate `y' = f(t, y)` from `t0` to `t1`, calling `observer`
    /// after every accepted step (and once at `t0`).
    pub fn solve<const D: usize, F, O>(
        &self,
        mut f: F,
        t0: f64,
        t1: f64,
        y0: [f64; D],
        mut observer: O,
    ) -> Result<([f64; D], OdeStats)>
    where
        F: FnMut(f64, &[f64; D]) -> [f64; D],
        O: FnMut(f64, &[f64; D]),
    {
        let mut stats = OdeStats::default();
        let mut t = t0;
        let mut y = y0;
        observer(t, &y);
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok((y, stats));
        }
        let mut k1 = f(t, &y);
        let mut h = self.initial_step(&mut f, t, &y, &k1, span);
        while t < t1 {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(Error::Integrator {
                    t,
                    step: h,
                    reason: "maximum number of steps exceeded".into(),
                });
            }
            let last = t + h >= t1;
            if last {
                h = t1 - t;
            }
            let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(
                t + C4 * h,
                &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = f(
                t + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + h,
                &axpy(
                    &y,
                    h,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y_new = axpy(
                &y,
                h,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            );
            let k7 = f(t + h, &y_new);
            let mut err = 0.0;
            for i in 0..D {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / D as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Integrator {
                    t,
                    step: h,
                    reason: "non-finite error estimate".into(),
                });
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if last { t1 } else { t + h };
                y = y_new;
                k1 = k7;
                stats.accepted += 1;
                observer(t, &y);
                h = (h * factor).min(self.h_max);
            } else {
                stats.rejected += 1;
                h *= factor.min(1.0);
            }
            if h < 1e-14 * span.max(t.abs()) {
                return Err(Error::Integrator {
                    t,
                    step: h,
                    reason: "step size underflow".into(),
                });
            }
        }
        Ok((y, stats))
    }

    fn initial_step<const D: usize, F>(
        &self,
        f: &mut F,
        t: f64,
        y: &[f64; D],
        k1: &[f64; D],
        span: f64,
    ) -> f64
    where
        F: FnMut(f64, &[f64; D]) -> [f64; D],
    {
        let scale = |i: usize| self.atol + self.rtol * y[i].abs();
        let d0 = (0..D).map(|i| (y[i] / scale(i)).powi(2)).sum::<f64>().sqrt();
        let d1 = (0..D).map(|i| (k1[i] / scale(i)).powi(2)).sum::<f64>().sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        }
        .min(span)
        .min(self.h_max);
        let y1 = axpy(y, h0, &[(1.0, k1)]);
        let k = f(t + h0, &y1);
        let d2 = (0..D)
            .map(|i| ((k[i] - k1[i]) / scale(i)).powi(2))
            .sum::<f64>()
            .sqrt()
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span).min(self.h_max)
    }
}

/// Fourth-order Magnus stepping for `i dψ/dt = (h(t)·σ) ψ` on one qubit.
/// Every step is an exact SU(2) rotation, so the norm is kept to
/// rounding; the local error is estimated by step doubling.
#[derive(Debug, Clone, Copy)]
pub struct Magnus4 {
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for Magnus4 {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_steps: 5_000_000,
        }
    }
}

pub type Spinor = [Complex<f64>; 2];

fn rotate(w: [f64; 3], psi: &Spinor) -> Spinor {
    let th = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    if th == 0.0 {
        return *psi;
    }
    let (s, c) = th.sin_cos();
    let (nx, ny, nz) = (w[0] / th, w[1] / th, w[2] / th);
    // exp(−i w·σ) = cos θ − i sin θ (n·σ)
    let ms = Complex::new(0.0, -s);
    let u00 = c + ms * nz;
    let u11 = c - ms * nz;
    let u01 = ms * Complex::new(nx, -ny);
    let u10 = ms * Complex::new(nx, ny);
    [u00 * psi[0] + u01 * psi[1], u10 * psi[0] + u11 * psi[1]]
}

fn magnus_vector<F: FnMut(f64) -> [f64; 3]>(f: &mut F, t: f64, dt: f64) -> [f64; 3] {
    let g = 3f64.sqrt() / 6.0;
    let a = f(t + (0.5 - g) * dt);
    let b = f(t + (0.5 + g) * dt);
    let cross = [
        b[1] * a[2] - b[2] * a[1],
        b[2] * a[0] - b[0] * a[2],
        b[0] * a[1] - b[1] * a[0],
    ];
    let k = g * dt * dt;
    [
        0.5 * dt * (a[0] + b[0]) + k * cross[0],
        0.5 * dt * (a[1] + b[1]) + k * cross[1],
        0.5 * dt * (a[2] + b[2]) + k * cross[2],
    ]
}

impl Magnus4 {
    pub fn solve<F, O>(
        &self,
        mut field: F,
        t0: f64,
        t1: f64,
        psi0: Spinor,
        mut observer: O,
    ) -> Result<(Spinor, OdeStats)>
    where
        F: FnMut(f64) -> [f64; 3],
        O: FnMut(f64, &Spinor),
    {
        let mut stats = OdeStats::default();
        let mut t = t0;
        let mut psi = psi0;
        observer(t, &psi);
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok((psi, stats));
        }
        let f0 = field(t0);
        let scale = (f0[0] * f0[0] + f0[1] * f0[1] + f0[2] * f0[2]).sqrt();
        let mut h = if scale > 0.0 { (0.1 / scale).min(span) } else { span };
        while t < t1 {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(Error::Integrator {
                    t,
                    step: h,
                    reason: "maximum number of steps exceeded".into(),
                });
            }
            let last = t + h >= t1;
            if last {
                h = t1 - t;
            }
            let big = rotate(magnus_vector(&mut field, t, h), &psi);
            let mid = rotate(magnus_vector(&mut field, t, 0.5 * h), &psi);
            let fine = rotate(magnus_vector(&mut field, t + 0.5 * h, 0.5 * h), &mid);
            let err = ((big[0] - fine[0]).norm().max((big[1] - fine[1]).norm())) / 15.0;
            if !err.is_finite() {
                return Err(Error::Integrator {
                    t,
                    step: h,
                    reason: "non-finite error estimate".into(),
                });
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * (self.tol / err).powf(0.2)).clamp(0.2, 5.0)
            };
            if err <= self.tol {
                t = if last { t1 } else { t + h };
                psi = fine;
                stats.accepted += 1;
                observer(t, &psi);
                h *= factor;
            } else {
                stats.rejected += 1;
                h *= factor.min(1.0);
            }
            if h < 1e-14 * span.max(t.abs()) {
                return Err(Error::Integrator {
                    t,
                    step: h,
                    reason: "step size underflow".into(),
                });
            }
        }
        Ok((psi, stats))
    }
}
