//! Dormand-Prince 5(4) with adaptive step-size control.

use nalgebra::SVector;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub max_rejections: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-12,
            max_steps: 2_000_000,
            max_rejections: 60,
        }
    }
}

/// One accepted step, with endpoint derivatives for cubic Hermite interpolation.
#[derive(Debug, Clone)]
pub struct StepRecord<const N: usize> {
    pub t0: f64,
    pub y0: SVector<f64, N>,
    pub f0: SVector<f64, N>,
    pub t1: f64,
    pub y1: SVector<f64, N>,
    pub f1: SVector<f64, N>,
}

impl<const N: usize> StepRecord<N> {
    pub fn interpolate(&self, t: f64) -> SVector<f64, N> {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        self.y0 * h00 + self.f0 * (h10 * h) + self.y1 * h01 + self.f1 * (h11 * h)
    }
}

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

pub struct Dopri5<F, const N: usize>
where
    F: FnMut(f64, &SVector<f64, N>) -> Result<SVector<f64, N>>,
{
    rhs: F,
    opts: IntegratorOptions,
}

impl<F, const N: usize> Dopri5<F, N>
where
    F: FnMut(f64, &SVector<f64, N>) -> Result<SVector<f64, N>>,
{
    pub fn new(rhs: F, opts: IntegratorOptions) -> Self {
        Self { rhs, opts }
    }

    /// Integrates from `(t0, y0)` to `t1` (either direction). `on_step` sees
    /// every accepted step and may stop the integration early by returning
    /// `false`; the state at the last accepted time is returned with it.
    pub fn integrate<G>(
        &mut self,
        t0: f64,
        y0: SVector<f64, N>,
        t1: f64,
        mut on_step: G,
    ) -> Result<(f64, SVector<f64, N>)>
    where
        G: FnMut(&StepRecord<N>) -> Result<bool>,
    {
        if !t0.is_finite() || !t1.is_finite() {
            return Err(Error::NonFinite);
        }
        if t1 == t0 {
            return Ok((t0, y0));
        }
        let dir = (t1 - t0).signum();
        let span = (t1 - t0).abs();
        let mut t = t0;
        let mut y = y0;
        let mut f = (self.rhs)(t, &y)?;
        let mut h = self.initial_step(&y, &f, span);
        let mut rejections = 0;
        for _ in 0..self.opts.max_steps {
            let remaining = (t1 - t).abs();
            if remaining <= 0.0 {
                return Ok((t, y));
            }
            let last = h >= remaining;
            let hs = if last { remaining } else { h } * dir;
            let (y_new, f_new, err) = match self.attempt(t, &y, &f, hs) {
                Ok(v) => v,
                Err(e @ Error::CollisionSingularity { .. }) if !last && rejections < self.opts.max_rejections => {
                    // a trial stage may overshoot into the floor; retry smaller
                    // before concluding the trajectory really collides
                    rejections += 1;
                    h *= 0.25;
                    if h < 1e-14 * t.abs().max(1.0) {
                        return Err(e);
                    }
                    continue;
                }
                Err(e) => return Err(e),
            };
            if err <= 1.0 {
                let t_new = if last { t1 } else { t + hs };
                let rec = StepRecord {
                    t0: t,
                    y0: y,
                    f0: f,
                    t1: t_new,
                    y1: y_new,
                    f1: f_new,
                };
                t = t_new;
                y = y_new;
                f = f_new;
                rejections = 0;
                if !on_step(&rec)? {
                    return Ok((t, y));
                }
                if last {
                    return Ok((t, y));
                }
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                h = hs.abs() * factor;
            } else {
                rejections += 1;
                if rejections > self.opts.max_rejections {
                    return Err(Error::StepFailure {
                        t,
                        reason: format!("{rejections} consecutive step rejections"),
                    });
                }
                h = hs.abs() * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            }
            if !h.is_finite() || h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepFailure {
                    t,
                    reason: format!("step size underflow ({h:e})"),
                });
            }
        }
        Err(Error::StepFailure {
            t,
            reason: format!("more than {} steps", self.opts.max_steps),
        })
    }

    fn initial_step(&self, y: &SVector<f64, N>, f: &SVector<f64, N>, span: f64) -> f64 {
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..N {
            let sc = self.opts.atol + self.opts.rtol * y[i].abs();
            d0 += (y[i] / sc).powi(2);
            d1 += (f[i] / sc).powi(2);
        }
        let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(span).max(1e-10 * span)
    }

    fn attempt(
        &mut self,
        t: f64,
        y: &SVector<f64, N>,
        k1: &SVector<f64, N>,
        h: f64,
    ) -> Result<(SVector<f64, N>, SVector<f64, N>, f64)> {
        let k2 = (self.rhs)(t + C2 * h, &(y + k1 * (A21 * h)))?;
        let k3 = (self.rhs)(t + C3 * h, &(y + (k1 * A31 + k2 * A32) * h))?;
        let k4 = (self.rhs)(t + C4 * h, &(y + (k1 * A41 + k2 * A42 + k3 * A43) * h))?;
        let k5 = (self.rhs)(t + C5 * h, &(y + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h))?;
        let k6 = (self.rhs)(t + h, &(y + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h))?;
        let y_new = y + (k1 * B1 + k3 * B3 + k4 * B4 + k5 * B5 + k6 * B6) * h;
        let k7 = (self.rhs)(t + h, &y_new)?;
        let e = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * h;
        let mut acc = 0.0;
        for i in 0..N {
            let sc = self.opts.atol + self.opts.rtol * y[i].abs().max(y_new[i].abs());
            acc += (e[i] / sc).powi(2);
        }
        let err = (acc / N as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::StepFailure {
                t,
                reason: "non-finite error estimate".into(),
            });
        }
        Ok((y_new, k7, err))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector2;

    #[test]
    fn harmonic_oscillator_returns_after_one_period() {
        let mut ig = Dopri5::new(
            |_t, y: &Vector2<f64>| Ok(Vector2::new(y[1], -y[0])),
            IntegratorOptions::default(),
        );
        let tau = 2.0 * std::f64::consts::PI;
        let (t, y) = ig.integrate(0.0, Vector2::new(1.0, 0.0), tau, |_| Ok(true)).unwrap();
        assert_eq!(t, tau);
        assert!((y[0] - 1.0).abs() < 1e-10 && y[1].abs() < 1e-10);
    }

    #[test]
    fn backward_integration() {
        let mut ig = Dopri5::new(
            |_t, y: &Vector2<f64>| Ok(Vector2::new(y[0], 0.0)),
            IntegratorOptions::default(),
        );
        let (_, y) = ig.integrate(1.0, Vector2::new(1.0, 0.0), 0.0, |_| Ok(true)).unwrap();
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn hermite_interpolation_is_accurate_within_a_step() {
        let mut ig = Dopri5::new(
            |_t, y: &Vector2<f64>| Ok(Vector2::new(y[1], -y[0])),
            IntegratorOptions::default(),
        );
        let mut worst = 0.0_f64;
        ig.integrate(0.0, Vector2::new(1.0, 0.0), 3.0, |rec| {
            let tm = 0.5 * (rec.t0 + rec.t1);
            worst = worst.max((rec.interpolate(tm)[0] - tm.cos()).abs());
            Ok(true)
        })
        .unwrap();
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn early_stop() {
        let mut ig = Dopri5::new(
            |_t, _y: &Vector2<f64>| Ok(Vector2::new(1.0, 0.0)),
            IntegratorOptions::default(),
        );
        let (t, _) = ig.integrate(0.0, Vector2::zeros(), 10.0, |_| Ok(false)).unwrap();
        assert!(t > 0.0 && t < 10.0);
    }
}
