//! Shooting corrector for orbits symmetric under one of the reflections.
//!
//! A symmetric orbit leaves the fixed locus at `t = 0` and meets it again at
//! the half period. The unknowns are the three coordinates left free by the
//! involution plus the half period; the residuals are the three flipped
//! coordinates at the half period plus an energy or period constraint.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::dynamics::{energy_and_jacobi, flow_with_stm, hamiltonian_gradient, vector_field, FlowOptions};
use super::points::first_axis_crossing;
use super::{Involution, Orbit, State, SystemConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Jacobi(f64),
    Period(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectorOptions {
    pub max_iter: usize,
    /// Convergence threshold on the max-norm residual.
    pub tol: f64,
    /// Largest allowed distance of the seed from the fixed locus.
    pub seed_tol: f64,
    pub half_period_guess: Option<f64>,
    /// Longest time searched for the first crossing when no guess is given.
    pub search_horizon: f64,
    pub flow: FlowOptions,
}

impl Default for CorrectorOptions {
    fn default() -> Self {
        Self {
            max_iter: 40,
            tol: 1e-10,
            seed_tol: 1e-6,
            half_period_guess: None,
            search_horizon: 100.0,
            flow: FlowOptions::default(),
        }
    }
}

struct Evaluation {
    half: State,
    t_half: f64,
    residual: DVector<f64>,
    jacobian: DMatrix<f64>,
}

fn unknowns(x: &State, t_half: f64, inv: Involution) -> DVector<f64> {
    let f = inv.fixed_indices();
    DVector::from_vec(vec![x.0[f[0]], x.0[f[1]], x.0[f[2]], t_half])
}

fn state_from(z: &DVector<f64>, inv: Involution) -> State {
    let mut s = [0.0; 6];
    for (k, &i) in inv.fixed_indices().iter().enumerate() {
        s[i] = z[k];
    }
    State(s)
}

fn evaluate(
    z: &DVector<f64>,
    inv: Involution,
    target: Target,
    cfg: &SystemConfig,
    opts: &CorrectorOptions,
) -> Result<Evaluation> {
    match target {
        Target::Jacobi(c) => evaluate_on_section(z, inv, c, cfg, opts),
        Target::Period(t) => evaluate_at_time(z, inv, t, cfg, opts),
    }
}

/// Fixed half period: the flipped coordinates at `T / 2` must vanish.
fn evaluate_at_time(
    z: &DVector<f64>,
    inv: Involution,
    period: f64,
    cfg: &SystemConfig,
    opts: &CorrectorOptions,
) -> Result<Evaluation> {
    let x0 = state_from(z, inv);
    let t_half = 0.5 * period;
    let (half, phi) = flow_with_stm(&x0, t_half, cfg, &opts.flow)?;
    let phi = phi.entries();
    let (fixed, anti) = (inv.fixed_indices(), inv.anti_indices());
    let mut residual = DVector::zeros(4);
    let mut jac = DMatrix::zeros(4, 4);
    for (r, &a) in anti.iter().enumerate() {
        residual[r] = half.0[a];
        for (c, &fi) in fixed.iter().enumerate() {
            jac[(r, c)] = phi[(a, fi)];
        }
    }
    residual[3] = z[3] - t_half;
    jac[(3, 3)] = 1.0;
    Ok(Evaluation {
        half,
        t_half,
        residual,
        jacobian: jac,
    })
}

/// Fixed energy: shoot to the `q2 = 0` crossing near `z[3]` and require the
/// other flipped coordinates to vanish there. Time is eliminated through
/// the flow direction, which keeps the linearization well conditioned when
/// perturbations are sheared along the orbit.
fn evaluate_on_section(
    z: &DVector<f64>,
    inv: Involution,
    jacobi: f64,
    cfg: &SystemConfig,
    opts: &CorrectorOptions,
) -> Result<Evaluation> {
    let x0 = state_from(z, inv);
    let mut t = z[3];
    if t.is_nan() || t <= 0.0 {
        return Err(Error::InvalidConfig("half period must be positive".into()));
    }
    let (mut half, phi) = flow_with_stm(&x0, t, cfg, &opts.flow)?;
    let mut phi = phi.into_inner();
    for _ in 0..6 {
        let f = vector_field(&half, cfg)?;
        if f[1] == 0.0 {
            return Err(Error::StepFailure {
                t,
                reason: "trajectory tangent to the section".into(),
            });
        }
        let dt = -half.0[1] / f[1];
        if dt.abs() < 1e-15 {
            break;
        }
        let (next, dphi) = flow_with_stm(&half, dt, cfg, &opts.flow)?;
        half = next;
        phi = dphi.entries() * phi;
        t += dt;
    }
    let f = vector_field(&half, cfg)?;
    let (fixed, anti) = (inv.fixed_indices(), inv.anti_indices());
    let mut residual = DVector::zeros(4);
    let mut jac = DMatrix::zeros(4, 4);
    // rows: the two flipped coordinates other than q2, energy, and the
    // section time itself (pinned to the computed crossing)
    for (r, &a) in [anti[0], anti[2]].iter().enumerate() {
        residual[r] = half.0[a];
        for (c, &fi) in fixed.iter().enumerate() {
            jac[(r, c)] = phi[(a, fi)] - f[a] / f[1] * phi[(1, fi)];
        }
    }
    let (h, _) = energy_and_jacobi(&x0, cfg)?;
    residual[2] = h + 0.5 * jacobi;
    let g = hamiltonian_gradient(&x0, cfg)?;
    for (k, &fi) in fixed.iter().enumerate() {
        jac[(2, k)] = g[fi];
    }
    residual[3] = z[3] - t;
    jac[(3, 3)] = 1.0;
    for (c, &fi) in fixed.iter().enumerate() {
        jac[(3, c)] = phi[(1, fi)] / f[1];
    }
    Ok(Evaluation {
        half,
        t_half: t,
        residual,
        jacobian: jac,
    })
}

/// On the section the half period is an output, so the time row is satisfied
/// by construction once the unknown is moved to the computed crossing.
fn sync_section_time(z: &mut DVector<f64>, eval: &mut Evaluation, target: Target) {
    if let Target::Jacobi(_) = target {
        z[3] = eval.t_half;
        eval.residual[3] = 0.0;
    }
}

fn newton_step(eval: &Evaluation, t: f64) -> Result<DVector<f64>> {
    let svd = eval.jacobian.clone().svd(true, true);
    let smax = svd.singular_values.max();
    svd.solve(&(-&eval.residual), 1e-14 * smax)
        .map_err(|e| Error::StepFailure {
            t,
            reason: e.to_string(),
        })
}

const MAX_UPHILL: usize = 3;
const UPHILL_FACTOR: f64 = 100.0;

fn norm(v: &DVector<f64>) -> f64 {
    v.amax()
}

/// Corrects `seed` (on the fixed locus of `inv`) to a closed symmetric orbit.
pub fn correct_symmetric_orbit(
    seed: &State,
    inv: Involution,
    target: Target,
    cfg: &SystemConfig,
    opts: &CorrectorOptions,
) -> Result<Orbit> {
    if seed.0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let deviation = inv.locus_deviation(seed);
    if deviation > opts.seed_tol {
        return Err(Error::LeftFixedLocus { deviation });
    }
    let mut projected = *seed;
    for &i in &inv.anti_indices() {
        projected.0[i] = 0.0;
    }
    let t_half = match (opts.half_period_guess, target) {
        (Some(t), _) => t,
        (None, Target::Period(t)) => 0.5 * t,
        (None, Target::Jacobi(_)) => first_axis_crossing(&projected, opts.search_horizon, cfg, &opts.flow)?.0,
    };
    let mut z = unknowns(&projected, t_half, inv);
    let mut eval = evaluate(&z, inv, target, cfg, opts)?;
    sync_section_time(&mut z, &mut eval, target);
    let mut res = norm(&eval.residual);
    let mut uphill = 0;
    for iteration in 0..opts.max_iter {
        if res < opts.tol {
            // one more full step: the trivial multiplier pair is a Jordan
            // block, so its splitting scales like the square root of the
            // residual
            let mut trial = &z + newton_step(&eval, z[3])?;
            if let Ok(mut e) = evaluate(&trial, inv, target, cfg, opts) {
                sync_section_time(&mut trial, &mut e, target);
                if norm(&e.residual) < res {
                    return finish(&trial, &e, inv, cfg, iteration + 1);
                }
            }
            return finish(&z, &eval, inv, cfg, iteration);
        }
        let step = newton_step(&eval, z[3])?;
        let mut damping = 1.0;
        let mut accepted = false;
        for attempt in 0..12 {
            let mut trial = &z + &step * damping;
            if let Ok(mut e) = evaluate(&trial, inv, target, cfg, opts) {
                sync_section_time(&mut trial, &mut e, target);
                let r = norm(&e.residual);
                // near a fold the full step can raise the residual before
                // the quadratic phase sets in; allow a few such steps
                let lenient = attempt == 0 && uphill < MAX_UPHILL && r < UPHILL_FACTOR * res;
                if lenient && r >= res && r.is_finite() {
                    uphill += 1;
                }
                if r.is_finite() && (r < res || r < opts.tol || lenient) {
                    z = trial;
                    eval = e;
                    res = r;
                    accepted = true;
                    break;
                }
            }
            damping *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence {
                iterations: iteration + 1,
                residual: res,
            });
        }
    }
    if res < opts.tol {
        return finish(&z, &eval, inv, cfg, opts.max_iter);
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual: res,
    })
}

const SYMMETRY_TOL: f64 = 1e-8;

fn finish(
    z: &DVector<f64>,
    eval: &Evaluation,
    inv: Involution,
    cfg: &SystemConfig,
    iterations: usize,
) -> Result<Orbit> {
    let x0 = state_from(z, inv);
    let (_, jacobi) = energy_and_jacobi(&x0, cfg)?;
    let symmetry = Involution::ALL
        .into_iter()
        .filter(|i| i.locus_deviation(&x0) <= SYMMETRY_TOL && i.locus_deviation(&eval.half) <= SYMMETRY_TOL)
        .collect();
    Ok(Orbit {
        initial_state: x0,
        period: 2.0 * eval.t_half,
        jacobi,
        involution: inv,
        symmetry,
        crossing_residual: inv.locus_deviation(&eval.half),
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cr3bp::dynamics::flow;

    #[test]
    fn small_mass_circle() {
        let cfg = SystemConfig::new("tiny", 1e-9).unwrap();
        let r: f64 = 0.5;
        // circular orbit around the primary: inertial speed r^{-1/2}
        let vy = r.powf(-0.5) - r;
        let period = 2.0 * std::f64::consts::PI / (r.powf(-1.5) - 1.0);
        let seed = State::from_velocity([r - cfg.mu + 1e-4, 0.0, 0.0, 0.0, vy * 1.001, 0.0]);
        let (_, c) = energy_and_jacobi(&State::from_velocity([r - cfg.mu, 0.0, 0.0, 0.0, vy, 0.0]), &cfg).unwrap();
        let orbit = correct_symmetric_orbit(
            &seed,
            Involution::Rho,
            Target::Jacobi(c),
            &cfg,
            &CorrectorOptions::default(),
        )
        .unwrap();
        assert!((orbit.period - period).abs() < 1e-6, "{} vs {period}", orbit.period);
        let v = orbit.initial_state.velocity_form();
        assert!((v[0] - (r - cfg.mu)).abs() < 1e-6 && (v[4] - vy).abs() < 1e-6);
        assert!(orbit.crossing_residual < 1e-10);
        assert_eq!(orbit.symmetry, vec![Involution::Rho, Involution::RhoTilde]);
        let back = flow(&orbit.initial_state, orbit.period, &cfg, &FlowOptions::default()).unwrap();
        assert!(back.max_abs_diff(&orbit.initial_state) < 1e-8);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let cfg = SystemConfig::jupiter_europa();
        let opts = CorrectorOptions::default();
        let seed = State::from_velocity([1.016776, 0.0, 0.0, 0.0, 0.0130372, 0.0]);
        let z = unknowns(&seed, 1.0607, Involution::Rho);
        for target in [Target::Jacobi(3.003571774), Target::Period(2.1215)] {
            let e = evaluate(&z, Involution::Rho, target, &cfg, &opts).unwrap();
            let scale = e.jacobian.amax();
            for c in 0..4 {
                let h = 1e-7;
                let mut a = z.clone();
                let mut b = z.clone();
                a[c] += h;
                b[c] -= h;
                let ra = evaluate(&a, Involution::Rho, target, &cfg, &opts).unwrap().residual;
                let rb = evaluate(&b, Involution::Rho, target, &cfg, &opts).unwrap().residual;
                let d = (ra - rb) / (2.0 * h);
                for r in 0..4 {
                    let an = e.jacobian[(r, c)];
                    assert!(
                        (d[r] - an).abs() < 1e-5 * scale.max(1.0),
                        "{target:?} ({r},{c}): {} vs {an}",
                        d[r]
                    );
                }
            }
        }
    }

    #[test]
    fn seed_off_the_locus_is_rejected() {
        let cfg = SystemConfig::jupiter_europa();
        let seed = State::from_velocity([1.016776, 0.01, 0.0, 0.0, 0.0130372, 0.0]);
        assert!(matches!(
            correct_symmetric_orbit(
                &seed,
                Involution::Rho,
                Target::Jacobi(3.0),
                &cfg,
                &CorrectorOptions::default()
            ),
            Err(Error::LeftFixedLocus { .. })
        ));
    }
}
