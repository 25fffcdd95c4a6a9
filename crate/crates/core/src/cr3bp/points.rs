//! Crossings of the fixed loci and monodromy matrices at symmetric points.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dynamics::{flow, flow_with_stm, integrate_state, vector_field, FlowOptions};
use super::{Involution, Orbit, State, SystemConfig};
use crate::error::{Error, Result};
use crate::symplectic::{
    git_point_from_blocks, involution_blocks, multipliers_from_point, InvolutionBlocks, SymplecticMatrix,
};

const BISECTION_TOL: f64 = 1e-14;
const POLISH_ITERS: usize = 4;

fn bisect<F: Fn(f64) -> f64>(g: F, mut a: f64, mut b: f64) -> f64 {
    let mut ga = g(a);
    while (b - a).abs() > BISECTION_TOL {
        let m = 0.5 * (a + b);
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Newton polish of a `q2 = 0` crossing time by re-integration from the start.
fn polish_crossing(start: &State, mut t: f64, cfg: &SystemConfig, opts: &FlowOptions) -> Result<(f64, State)> {
    let mut s = flow(start, t, cfg, opts)?;
    for _ in 0..POLISH_ITERS {
        let f = vector_field(&s, cfg)?;
        if f[1] == 0.0 || s.0[1].abs() < 1e-15 {
            break;
        }
        let dt = -s.0[1] / f[1];
        t += dt;
        s = flow(start, t, cfg, opts)?;
        if dt.abs() < 1e-15 {
            break;
        }
    }
    Ok((t, s))
}

/// Times in `(0, t_end)` at which the trajectory crosses `q2 = 0`, with the
/// states there. At most `max_count` crossings are returned.
pub fn find_axis_crossings(
    start: &State,
    t_end: f64,
    max_count: usize,
    cfg: &SystemConfig,
    opts: &FlowOptions,
) -> Result<Vec<(f64, State)>> {
    let mut brackets = Vec::new();
    integrate_state(start, t_end, cfg, opts, |rec| {
        let (a, b) = (rec.y0[1], rec.y1[1]);
        if a != 0.0 && (a < 0.0) != (b < 0.0) || (a != 0.0 && b == 0.0) {
            let t = bisect(|t| rec.interpolate(t)[1], rec.t0, rec.t1);
            brackets.push(t);
        }
        Ok(brackets.len() < max_count)
    })?;
    brackets
        .into_iter()
        .map(|t| polish_crossing(start, t, cfg, opts))
        .collect()
}

pub(crate) fn first_axis_crossing(
    start: &State,
    horizon: f64,
    cfg: &SystemConfig,
    opts: &FlowOptions,
) -> Result<(f64, State)> {
    find_axis_crossings(start, horizon, 1, cfg, opts)?
        .into_iter()
        .next()
        .ok_or(Error::NoConvergence {
            iterations: 0,
            residual: f64::INFINITY,
        })
}

/// Monodromy at a point of an orbit, in the frame adapted to one involution.
#[derive(Debug, Clone)]
pub struct MonodromyAtPoint {
    pub time: f64,
    pub state: State,
    pub involution: Involution,
    /// `P M(t0) P^T` with `P` the adapted frame.
    pub matrix: SymplecticMatrix,
    pub blocks: InvolutionBlocks,
    /// `M(t0)` in canonical `(q, p)` coordinates.
    pub canonical: SymplecticMatrix,
}

impl MonodromyAtPoint {
    /// Reduced multipliers recovered from the `A` block alone.
    pub fn multipliers_from_blocks(&self, trivial_tol: f64) -> Result<Vec<Complex64>> {
        Ok(multipliers_from_point(git_point_from_blocks(
            &self.blocks,
            trivial_tol,
        )?))
    }

    /// The same matrix with velocities in place of momenta, `S M S^{-1}`.
    pub fn velocity_frame(&self) -> Result<SymplecticMatrix> {
        let s = velocity_shear();
        let s_inv = s.clone().try_inverse().ok_or(Error::NonFinite)?;
        let m = &s * self.canonical.entries() * s_inv;
        let p = self.involution.frame();
        SymplecticMatrix::measured(&p * m * p.transpose())
    }
}

/// Jacobian of `(q, p) -> (q, v)`, `v = p + (q2, -q1, 0)`.
fn velocity_shear() -> DMatrix<f64> {
    let mut s = DMatrix::<f64>::identity(6, 6);
    s[(3, 1)] = 1.0;
    s[(4, 0)] = -1.0;
    s
}

/// Base monodromy of an orbit, reused across points.
#[derive(Debug, Clone)]
pub struct OrbitMonodromy {
    pub base: SymplecticMatrix,
    pub closure: f64,
}

impl OrbitMonodromy {
    pub fn new(orbit: &Orbit, cfg: &SystemConfig, opts: &FlowOptions) -> Result<Self> {
        let (end, base) = flow_with_stm(&orbit.initial_state, orbit.period, cfg, opts)?;
        Ok(Self {
            closure: end.max_abs_diff(&orbit.initial_state),
            base,
        })
    }

    /// `M(t0) = Φ(t0) M Φ(t0)^{-1}` in the frame of `inv`.
    pub fn at(
        &self,
        orbit: &Orbit,
        t0: f64,
        inv: Involution,
        cfg: &SystemConfig,
        opts: &FlowOptions,
    ) -> Result<MonodromyAtPoint> {
        let (state, phi) = flow_with_stm(&orbit.initial_state, t0, cfg, opts)?;
        let m = phi.entries() * self.base.entries() * phi.symplectic_inverse();
        let canonical = SymplecticMatrix::measured(m)?;
        let p = inv.frame();
        let matrix = SymplecticMatrix::measured(&p * canonical.entries() * p.transpose())?;
        let blocks = involution_blocks(&matrix);
        Ok(MonodromyAtPoint {
            time: t0,
            state,
            involution: inv,
            matrix,
            blocks,
            canonical,
        })
    }
}

pub fn monodromy_at_point(
    orbit: &Orbit,
    t0: f64,
    inv: Involution,
    cfg: &SystemConfig,
    opts: &FlowOptions,
) -> Result<MonodromyAtPoint> {
    OrbitMonodromy::new(orbit, cfg, opts)?.at(orbit, t0, inv, cfg, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Symmetric,
    Fake,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricPoint {
    /// 1-based position among the crossings, in time order.
    pub index: usize,
    pub time: f64,
    pub state: State,
    pub involution: Involution,
    pub kind: PointKind,
    /// Scaled block residual of the adapted-frame monodromy.
    pub residual: f64,
    pub locus_deviation: f64,
}

/// Crossings of `q2 = 0` over one period (including `t = 0`), each labelled
/// for both involutions by the block test.
pub fn symmetric_points(
    orbit: &Orbit,
    cfg: &SystemConfig,
    residual_threshold: f64,
    opts: &FlowOptions,
) -> Result<Vec<SymmetricPoint>> {
    let mono = OrbitMonodromy::new(orbit, cfg, opts)?;
    let edge = 1e-8 * orbit.period.max(1.0);
    let mut times = vec![(0.0, orbit.initial_state)];
    for (t, s) in find_axis_crossings(&orbit.initial_state, orbit.period, usize::MAX, cfg, opts)? {
        if t > edge && t < orbit.period - edge {
            times.push((t, s));
        }
    }
    let mut out = Vec::new();
    for (k, (t, s)) in times.into_iter().enumerate() {
        for inv in Involution::ALL {
            let m = mono.at(orbit, t, inv, cfg, opts)?;
            let residual = m.blocks.scaled_residual;
            out.push(SymmetricPoint {
                index: k + 1,
                time: t,
                state: s,
                involution: inv,
                kind: if residual < residual_threshold {
                    PointKind::Symmetric
                } else {
                    PointKind::Fake
                },
                residual,
                locus_deviation: inv.locus_deviation(&s),
            });
        }
    }
    Ok(out)
}
