//! Dormand–Prince 5(4) stepper for Liouville vectors.
//!
//! Steps are propagated with the fifth-order solution (local extrapolation)
//! and sized from the embedded fourth-order error estimate. Every stage is a
//! linear combination of generator images, so linear invariants such as the
//! trace are preserved up to rounding without any renormalization.

use num_complex::Complex64;

use crate::error::IntegrationError;
use crate::liouvillian::Liouville;

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

// Fifth minus fourth order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[inline]
fn combine(y: &Liouville, h: f64, terms: &[(f64, &Liouville)]) -> Liouville {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (w, k) in terms {
            acc += k[i] * *w;
        }
        *o += acc * h;
    }
    out
}

pub(crate) struct Dopri5 {
    pub t: f64,
    pub y: Liouville,
    h: f64,
    k1: Liouville,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
    pub accepted: usize,
    pub rejected: usize,
    /// Sum over accepted steps of the largest component of the local error
    /// estimate.
    pub error_sum: f64,
}

impl Dopri5 {
    pub fn new<F>(t0: f64, y0: Liouville, rel_tol: f64, abs_tol: f64, max_step: f64, rhs: &mut F) -> Self
    where
        F: FnMut(f64, &Liouville) -> Liouville,
    {
        let k1 = rhs(t0, &y0);
        let mut solver = Self {
            t: t0,
            y: y0,
            h: max_step,
            k1,
            rel_tol,
            abs_tol,
            max_step,
            accepted: 0,
            rejected: 0,
            error_sum: 0.0,
        };
        solver.h = solver.initial_step(rhs);
        solver
    }

    fn scaled_norm(&self, v: &Liouville, reference: &Liouville, other: &Liouville) -> f64 {
        let mut sum = 0.0;
        for i in 0..4 {
            let sc_re = self.abs_tol + self.rel_tol * reference[i].re.abs().max(other[i].re.abs());
            let sc_im = self.abs_tol + self.rel_tol * reference[i].im.abs().max(other[i].im.abs());
            sum += (v[i].re / sc_re).powi(2) + (v[i].im / sc_im).powi(2);
        }
        (sum / 8.0).sqrt()
    }

    // Hairer, Nørsett & Wanner's starting step heuristic.
    fn initial_step<F>(&self, rhs: &mut F) -> f64
    where
        F: FnMut(f64, &Liouville) -> Liouville,
    {
        let d0 = self.scaled_norm(&self.y, &self.y, &self.y);
        let d1 = self.scaled_norm(&self.k1, &self.y, &self.y);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(self.max_step);
        let y1 = combine(&self.y, h0, &[(1.0, &self.k1)]);
        let f1 = rhs(self.t + h0, &y1);
        let mut diff = f1;
        for (d, k) in diff.iter_mut().zip(&self.k1) {
            *d -= k;
        }
        let d2 = self.scaled_norm(&diff, &self.y, &self.y) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.max_step)
    }

    /// Steps until `self.t == t_target` exactly.
    pub fn advance_to<F>(&mut self, t_target: f64, rhs: &mut F) -> Result<(), IntegrationError>
    where
        F: FnMut(f64, &Liouville) -> Liouville,
    {
        while self.t < t_target {
            let remaining = t_target - self.t;
            let min_step = 16.0 * f64::EPSILON * self.t.abs().max(1.0);
            if self.h < min_step {
                return Err(IntegrationError::StepSizeUnderflow {
                    t: self.t,
                    step: self.h,
                });
            }
            // Land exactly on the target rather than leaving a sliver.
            let (h, last) = if self.h >= remaining || remaining - self.h < min_step {
                (remaining, true)
            } else {
                (self.h, false)
            };
            let t = self.t;
            let y = &self.y;
            let k1 = &self.k1;
            let k2 = rhs(t + C2 * h, &combine(y, h, &[(A21, k1)]));
            let k3 = rhs(t + C3 * h, &combine(y, h, &[(A31, k1), (A32, &k2)]));
            let k4 = rhs(t + C4 * h, &combine(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
            let k5 = rhs(
                t + C5 * h,
                &combine(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = rhs(
                t + h,
                &combine(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = combine(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let t_new = if last { t_target } else { t + h };
            let k7 = rhs(t_new, &y_new);

            let zero = [Complex64::new(0.0, 0.0); 4];
            let err_vec = combine(
                &zero,
                h,
                &[(E1, k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
            );
            let err = self.scaled_norm(&err_vec, y, &y_new);

            if err <= 1.0 {
                self.error_sum += err_vec.iter().map(|e| e.norm()).fold(0.0, f64::max);
                self.t = t_new;
                self.y = y_new;
                self.k1 = k7;
                self.accepted += 1;
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                // A clipped final step says nothing about the natural size.
                let base = if last { self.h.max(h) } else { h };
                self.h = (base * factor).min(self.max_step);
            } else {
                self.rejected += 1;
                let factor = if err.is_finite() {
                    (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
                } else {
                    MIN_FACTOR
                };
                self.h = h * factor;
            }
        }
        Ok(())
    }
}
