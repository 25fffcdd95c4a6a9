//! Circular restricted three-body problem in the rotating frame.
//!
//! Canonical coordinates `(q, p)` with `p = v + (-q2, q1, 0)`. The primary of
//! mass `1 - mu` sits at `(-mu, 0, 0)` and the secondary of mass `mu` at
//! `(1 - mu, 0, 0)`. The Hamiltonian is
//!
//! ```text
//! H = |p|^2 / 2 - mu / r2 - (1 - mu) / r1 + p1 q2 - p2 q1
//! ```
//!
//! and the reported Jacobi constant is `-2H`.

mod corrector;
mod dynamics;
mod integrator;
mod points;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use corrector::{correct_symmetric_orbit, CorrectorOptions, Target};
pub use dynamics::{
    energy_and_jacobi, flow, flow_with_stm, hamiltonian_gradient, vector_field, FlowOptions, COLLISION_FLOOR,
};
pub use integrator::{Dopri5, IntegratorOptions, StepRecord};
pub use points::{
    find_axis_crossings, monodromy_at_point, symmetric_points, MonodromyAtPoint, OrbitMonodromy, PointKind,
    SymmetricPoint,
};

const BUILTIN_PRESETS: &str = include_str!("../../data/presets.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub name: String,
    pub mu: f64,
}

impl SystemConfig {
    pub fn new(name: impl Into<String>, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::InvalidConfig(format!("mass ratio {mu} is not in (0, 1)")));
        }
        Ok(Self { name: name.into(), mu })
    }

    /// Position of the body of mass `1 - mu`.
    pub fn primary_position(&self) -> Vector3<f64> {
        Vector3::new(-self.mu, 0.0, 0.0)
    }

    /// Position of the body of mass `mu`.
    pub fn secondary_position(&self) -> Vector3<f64> {
        Vector3::new(1.0 - self.mu, 0.0, 0.0)
    }

    pub fn jupiter_europa() -> Self {
        builtin_presets()
            .get("jupiter-europa")
            .cloned()
            .expect("bundled preset")
    }

    pub fn saturn_enceladus() -> Self {
        builtin_presets()
            .get("saturn-enceladus")
            .cloned()
            .expect("bundled preset")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Presets(pub Vec<SystemConfig>);

impl Presets {
    pub fn parse(text: &str) -> Result<Self> {
        let list: Vec<SystemConfig> = serde_json::from_str(text)?;
        for s in &list {
            SystemConfig::new(s.name.clone(), s.mu)?;
        }
        Ok(Presets(list))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, name: &str) -> Option<&SystemConfig> {
        self.0.iter().find(|s| s.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.0.iter().map(|s| s.name.as_str()).collect()
    }

    /// Resolves `name` or `mu=<value>`.
    pub fn resolve(&self, spec: &str) -> Result<SystemConfig> {
        if let Some(v) = spec.strip_prefix("mu=") {
            let mu: f64 = v
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("cannot parse mass ratio '{v}'")))?;
            return SystemConfig::new(spec, mu);
        }
        self.get(spec).cloned().ok_or_else(|| {
            Error::InvalidConfig(format!("unknown system '{spec}' (known: {})", self.names().join(", ")))
        })
    }
}

pub fn builtin_presets() -> Presets {
    Presets::parse(BUILTIN_PRESETS).expect("bundled presets are valid")
}

/// A phase-space point in canonical coordinates `(q1, q2, q3, p1, p2, p3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State(pub [f64; 6]);

impl State {
    pub fn from_momentum(x: [f64; 6]) -> Self {
        State(x)
    }

    /// From `(q, v)` with `v` the rotating-frame velocity.
    pub fn from_velocity(x: [f64; 6]) -> Self {
        State([x[0], x[1], x[2], x[3] - x[1], x[4] + x[0], x[5]])
    }

    pub fn momentum_form(&self) -> [f64; 6] {
        self.0
    }

    pub fn velocity_form(&self) -> [f64; 6] {
        let x = self.0;
        [x[0], x[1], x[2], x[3] + x[1], x[4] - x[0], x[5]]
    }

    pub fn q(&self) -> Vector3<f64> {
        Vector3::new(self.0[0], self.0[1], self.0[2])
    }

    pub fn p(&self) -> Vector3<f64> {
        Vector3::new(self.0[3], self.0[4], self.0[5])
    }

    pub fn max_abs_diff(&self, other: &State) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// The two anti-symplectic reflections of the spatial problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Involution {
    /// `(q1, -q2, -q3, -p1, p2, p3)`.
    Rho,
    /// `(q1, -q2, q3, -p1, p2, -p3)`.
    RhoTilde,
}

impl Involution {
    pub const ALL: [Involution; 2] = [Involution::Rho, Involution::RhoTilde];

    pub fn as_str(&self) -> &'static str {
        match self {
            Involution::Rho => "rho",
            Involution::RhoTilde => "rho_tilde",
        }
    }

    fn signs(&self) -> [f64; 6] {
        match self {
            Involution::Rho => [1.0, -1.0, -1.0, -1.0, 1.0, 1.0],
            Involution::RhoTilde => [1.0, -1.0, 1.0, -1.0, 1.0, -1.0],
        }
    }

    pub fn apply(&self, s: &State) -> State {
        let sg = self.signs();
        let mut out = s.0;
        for (o, g) in out.iter_mut().zip(sg) {
            *o *= g;
        }
        State(out)
    }

    /// Coordinates left unchanged, in adapted-frame order.
    pub fn fixed_indices(&self) -> [usize; 3] {
        match self {
            Involution::Rho => [0, 4, 5],
            Involution::RhoTilde => [0, 4, 2],
        }
    }

    /// Coordinates flipped, in adapted-frame order (conjugate to the fixed ones).
    pub fn anti_indices(&self) -> [usize; 3] {
        match self {
            Involution::Rho => [3, 1, 2],
            Involution::RhoTilde => [3, 1, 5],
        }
    }

    /// Largest flipped coordinate: the distance to the fixed locus in max-norm.
    pub fn locus_deviation(&self, s: &State) -> f64 {
        self.anti_indices().iter().fold(0.0_f64, |m, &i| m.max(s.0[i].abs()))
    }

    /// Signed permutation `P` sending canonical coordinates to a symplectic
    /// basis in which the involution reads `diag(I, -I)`.
    ///
    /// For `Rho` the new coordinates are `(q1, p2, p3, p1, -q2, -q3)`; for
    /// `RhoTilde` they are `(q1, p2, q3, p1, -q2, p3)`.
    pub fn frame(&self) -> DMatrix<f64> {
        let fixed = self.fixed_indices();
        let anti = self.anti_indices();
        let mut p = DMatrix::zeros(6, 6);
        for i in 0..3 {
            p[(i, fixed[i])] = 1.0;
            // a fixed momentum pairs with minus its position
            let sign = if anti[i] < 3 && fixed[i] >= 3 { -1.0 } else { 1.0 };
            p[(3 + i, anti[i])] = sign;
        }
        p
    }
}

impl fmt::Display for Involution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Involution {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rho" => Ok(Involution::Rho),
            "rho_tilde" | "rhotilde" => Ok(Involution::RhoTilde),
            other => Err(Error::InvalidConfig(format!("unknown involution '{other}'"))),
        }
    }
}

/// A corrected symmetric periodic orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub initial_state: State,
    pub period: f64,
    pub jacobi: f64,
    /// Involution used by the corrector; the initial state lies on its fixed locus.
    pub involution: Involution,
    /// Every involution whose fixed locus contains both the initial and half-period states.
    pub symmetry: Vec<Involution>,
    /// Max-norm of the flipped coordinates at the half period.
    pub crossing_residual: f64,
    pub iterations: usize,
}

/// Orbit file: state in velocity form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitFile {
    #[serde(default)]
    pub schema_version: Option<u32>,
    #[serde(default)]
    pub system: Option<String>,
    pub state: [f64; 6],
    #[serde(default)]
    pub period: Option<f64>,
    #[serde(default)]
    pub jacobi: Option<f64>,
    #[serde(default)]
    pub symmetry: Vec<Involution>,
    #[serde(default)]
    pub half_period_guess: Option<f64>,
}

impl OrbitFile {
    pub fn parse(text: &str) -> Result<Self> {
        let f: OrbitFile = serde_json::from_str(text)?;
        if f.state.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(f)
    }

    pub fn from_orbit(orbit: &Orbit, system: &str) -> Self {
        OrbitFile {
            schema_version: Some(crate::catalogue::SCHEMA_VERSION),
            system: Some(system.to_string()),
            state: orbit.initial_state.velocity_form(),
            period: Some(orbit.period),
            jacobi: Some(orbit.jacobi),
            symmetry: orbit.symmetry.clone(),
            half_period_guess: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::symplectic::symplecticity_residual;

    #[test]
    fn presets_load() {
        let p = builtin_presets();
        assert_eq!(p.get("jupiter-europa").unwrap().mu, 2.5266448850435e-05);
        assert_eq!(p.get("saturn-enceladus").unwrap().mu, 1.9002485658670e-07);
        assert_eq!(p.resolve("mu=0.01").unwrap().mu, 0.01);
        assert!(p.resolve("pluto-charon").is_err());
        assert!(p.resolve("mu=1.5").is_err());
    }

    #[test]
    fn velocity_round_trip() {
        let v = [1.016776, 0.1, -0.2, 0.3, 0.0130372, 0.05];
        let s = State::from_velocity(v);
        for (a, b) in s.velocity_form().iter().zip(v) {
            assert!((a - b).abs() <= 2.0 * f64::EPSILON);
        }
        // p2 = v2 + q1 on the x-axis
        let s = State::from_velocity([1.016776, 0.0, 0.0, 0.0, 0.0130372, 0.0]);
        assert_eq!(s.0[4], 0.0130372 + 1.016776);
    }

    #[test]
    fn involutions_are_idempotent_and_fix_their_loci() {
        let s = State([0.9, 0.1, -0.2, 0.3, 0.4, -0.5]);
        for inv in Involution::ALL {
            assert_eq!(inv.apply(&inv.apply(&s)), s);
        }
        let on_rho = State([0.9, 0.0, 0.0, 0.0, 0.4, -0.5]);
        assert_eq!(Involution::Rho.apply(&on_rho), on_rho);
        assert_eq!(Involution::Rho.locus_deviation(&on_rho), 0.0);
        assert!(Involution::RhoTilde.locus_deviation(&on_rho) > 0.0);
    }

    #[test]
    fn frames_are_symplectic_and_diagonalize_the_involution() {
        for inv in Involution::ALL {
            let p = inv.frame();
            assert_eq!(symplecticity_residual(&p).unwrap(), 0.0);
            let r = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&inv.signs()));
            let conj = &p * r * p.transpose();
            let mut expected = DMatrix::<f64>::identity(6, 6);
            for i in 3..6 {
                expected[(i, i)] = -1.0;
            }
            assert_eq!(linalg::max_abs_diff(&conj, &expected), 0.0);
        }
    }

    #[test]
    fn rho_frame_coordinates() {
        let x = nalgebra::DVector::from_row_slice(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let y = Involution::Rho.frame() * &x;
        assert_eq!(y.as_slice(), &[1.0, 5.0, 6.0, 4.0, -2.0, -3.0]);
        let y = Involution::RhoTilde.frame() * &x;
        assert_eq!(y.as_slice(), &[1.0, 5.0, 3.0, 4.0, -2.0, 6.0]);
    }
}
