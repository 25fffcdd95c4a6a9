//! Vector field, variational equations and flow maps.

use nalgebra::{DMatrix, Matrix3, Matrix6, SVector, Vector3, Vector6};

use super::integrator::{Dopri5, IntegratorOptions, StepRecord};
use super::{State, SystemConfig};
use crate::error::{Error, Result};
use crate::symplectic::SymplecticMatrix;

/// Distance to either primary below which integration aborts.
pub const COLLISION_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub integrator: IntegratorOptions,
    pub collision_floor: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            integrator: IntegratorOptions::default(),
            collision_floor: COLLISION_FLOOR,
        }
    }
}

impl FlowOptions {
    pub fn with_tol(tol: f64) -> Self {
        let mut o = Self::default();
        o.integrator.rtol = tol;
        o.integrator.atol = tol;
        o
    }
}

pub(crate) type Aug = SVector<f64, 42>;

struct Offsets {
    d1: Vector3<f64>,
    d2: Vector3<f64>,
    r1: f64,
    r2: f64,
}

fn offsets(q: &Vector3<f64>, cfg: &SystemConfig, floor: f64) -> Result<Offsets> {
    let d1 = q - cfg.primary_position();
    let d2 = q - cfg.secondary_position();
    let (r1, r2) = (d1.norm(), d2.norm());
    let r = r1.min(r2);
    if r.is_nan() || r < floor {
        return Err(Error::CollisionSingularity { distance: r });
    }
    Ok(Offsets { d1, d2, r1, r2 })
}

fn potential_gradient(o: &Offsets, mu: f64) -> Vector3<f64> {
    o.d1 * ((1.0 - mu) / o.r1.powi(3)) + o.d2 * (mu / o.r2.powi(3))
}

fn potential_hessian(o: &Offsets, mu: f64) -> Matrix3<f64> {
    let term = |d: &Vector3<f64>, r: f64, m: f64| {
        (Matrix3::identity() / r.powi(3) - d * d.transpose() * (3.0 / r.powi(5))) * m
    };
    term(&o.d1, o.r1, 1.0 - mu) + term(&o.d2, o.r2, mu)
}

/// `(H, -2H)`.
pub fn energy_and_jacobi(state: &State, cfg: &SystemConfig) -> Result<(f64, f64)> {
    let (q, p) = (state.q(), state.p());
    let o = offsets(&q, cfg, COLLISION_FLOOR)?;
    let h = 0.5 * p.norm_squared() - cfg.mu / o.r2 - (1.0 - cfg.mu) / o.r1 + p[0] * q[1] - p[1] * q[0];
    Ok((h, -2.0 * h))
}

/// `(∂H/∂q, ∂H/∂p)`.
pub fn hamiltonian_gradient(state: &State, cfg: &SystemConfig) -> Result<[f64; 6]> {
    let (q, p) = (state.q(), state.p());
    let o = offsets(&q, cfg, COLLISION_FLOOR)?;
    let g = potential_gradient(&o, cfg.mu);
    Ok([g[0] - p[1], g[1] + p[0], g[2], p[0] + q[1], p[1] - q[0], p[2]])
}

fn field(x: &Vector6<f64>, cfg: &SystemConfig, floor: f64) -> Result<(Vector6<f64>, Offsets)> {
    let q = Vector3::new(x[0], x[1], x[2]);
    let o = offsets(&q, cfg, floor)?;
    let g = potential_gradient(&o, cfg.mu);
    let f = Vector6::new(x[3] + x[1], x[4] - x[0], x[5], -g[0] + x[4], -g[1] - x[3], -g[2]);
    Ok((f, o))
}

pub fn vector_field(state: &State, cfg: &SystemConfig) -> Result<[f64; 6]> {
    let (f, _) = field(&Vector6::from_row_slice(&state.0), cfg, COLLISION_FLOOR)?;
    Ok([f[0], f[1], f[2], f[3], f[4], f[5]])
}

/// Linearization `[[Ω, I], [-Hess V, Ω]]` of the vector field.
fn jacobian(o: &Offsets, mu: f64) -> Matrix6<f64> {
    let hess = potential_hessian(o, mu);
    let mut j = Matrix6::zeros();
    for (r, c) in [(0, 1), (3, 4)] {
        j[(r, c)] = 1.0;
        j[(c, r)] = -1.0;
    }
    for i in 0..3 {
        j[(i, 3 + i)] = 1.0;
        for k in 0..3 {
            j[(3 + i, k)] = -hess[(i, k)];
        }
    }
    j
}

pub(crate) fn augmented_rhs(y: &Aug, cfg: &SystemConfig, floor: f64) -> Result<Aug> {
    let x = Vector6::from_iterator(y.iter().take(6).cloned());
    let (f, o) = field(&x, cfg, floor)?;
    let phi = Matrix6::from_row_slice(&y.as_slice()[6..]);
    let dphi = jacobian(&o, cfg.mu) * phi;
    let mut out = Aug::zeros();
    out.fixed_rows_mut::<6>(0).copy_from(&f);
    for r in 0..6 {
        for c in 0..6 {
            out[6 + 6 * r + c] = dphi[(r, c)];
        }
    }
    Ok(out)
}

pub(crate) fn augmented_initial(state: &State) -> Aug {
    let mut y = Aug::zeros();
    for i in 0..6 {
        y[i] = state.0[i];
        y[6 + 7 * i] = 1.0;
    }
    y
}

pub(crate) fn split_augmented(y: &Aug) -> (State, DMatrix<f64>) {
    let mut s = [0.0; 6];
    s.copy_from_slice(&y.as_slice()[..6]);
    (State(s), DMatrix::from_row_slice(6, 6, &y.as_slice()[6..]))
}

/// Integrates state and state-transition matrix, reporting every accepted
/// step to `on_step`.
pub(crate) fn integrate_augmented<G>(
    state: &State,
    t: f64,
    cfg: &SystemConfig,
    opts: &FlowOptions,
    on_step: G,
) -> Result<(f64, Aug)>
where
    G: FnMut(&StepRecord<42>) -> Result<bool>,
{
    let floor = opts.collision_floor;
    let mut ig = Dopri5::new(|_t, y: &Aug| augmented_rhs(y, cfg, floor), opts.integrator);
    ig.integrate(0.0, augmented_initial(state), t, on_step)
}

pub(crate) fn integrate_state<G>(
    state: &State,
    t: f64,
    cfg: &SystemConfig,
    opts: &FlowOptions,
    on_step: G,
) -> Result<(f64, Vector6<f64>)>
where
    G: FnMut(&StepRecord<6>) -> Result<bool>,
{
    let floor = opts.collision_floor;
    let mut ig = Dopri5::new(
        |_t, y: &Vector6<f64>| field(y, cfg, floor).map(|v| v.0),
        opts.integrator,
    );
    ig.integrate(0.0, Vector6::from_row_slice(&state.0), t, on_step)
}

/// Flow map `Ψ_t(state)`.
pub fn flow(state: &State, t: f64, cfg: &SystemConfig, opts: &FlowOptions) -> Result<State> {
    let (_, y) = integrate_state(state, t, cfg, opts, |_| Ok(true))?;
    Ok(State([y[0], y[1], y[2], y[3], y[4], y[5]]))
}

/// `(Ψ_t(state), DΨ_t(state))` in canonical coordinates.
pub fn flow_with_stm(
    state: &State,
    t: f64,
    cfg: &SystemConfig,
    opts: &FlowOptions,
) -> Result<(State, SymplecticMatrix)> {
    let (_, y) = integrate_augmented(state, t, cfg, opts, |_| Ok(true))?;
    let (s, phi) = split_augmented(&y);
    Ok((s, SymplecticMatrix::measured(phi)?))
}
