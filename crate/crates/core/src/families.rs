//! Continuation of symmetric families in the Jacobi constant, bifurcation
//! detection on the stability diagram, B-sign jump reports and ledger checks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::catalogue::SCHEMA_VERSION;
use crate::cr3bp::{
    correct_symmetric_orbit, symmetric_points, CorrectorOptions, FlowOptions, Involution, Orbit, OrbitMonodromy,
    PointKind, SystemConfig, Target,
};
use crate::error::{Error, Result};
use crate::floer::{chi_real, chi_sft, GaussianInt, OrbitLedger};
use crate::signatures::{b_signature, git_data_point, SignatureOptions};
use crate::symplectic::{
    classify_region, git_point_from_multipliers, reduced_multipliers, GitDataPoint, GitPoint, InvolutionBlocks,
    PencilLine, Region, Sign, SYMMETRIC_POINT_THRESHOLD,
};

pub const DEFAULT_KMAX: u32 = 12;
pub const DEFAULT_BRACKET_WIDTH: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    pub flow: FlowOptions,
    pub signature: SignatureOptions,
    /// Block-residual threshold separating symmetric from fake points.
    pub residual_threshold: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            flow: FlowOptions::default(),
            signature: SignatureOptions::default(),
            residual_threshold: SYMMETRIC_POINT_THRESHOLD,
        }
    }
}

/// Data attached to one symmetric point of an orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointData {
    /// 1-based, in time order along the orbit starting from `t = 0`.
    pub index: usize,
    pub time: f64,
    /// Position–velocity state at the point.
    pub state: [f64; 6],
    pub residual: f64,
    pub data: GitDataPoint,
    /// A-eigenvalues and the `v^T B v` values behind `data.epsilon`.
    #[serde(default)]
    pub mu: Option<Vec<f64>>,
    #[serde(default)]
    pub witness: Option<Vec<f64>>,
    /// `A`, `B`, `C` in the adapted frame, row-major.
    pub blocks: BlockEntries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockEntries {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().cloned().collect()).collect()
}

fn from_rows(r: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = r.len();
    if r.iter().any(|row| row.len() != n) {
        return Err(Error::NotSquare {
            rows: n,
            cols: r.first().map_or(0, Vec::len),
        });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| r[i][j]))
}

impl BlockEntries {
    pub fn from_blocks(b: &InvolutionBlocks) -> Self {
        Self {
            a: rows(&b.a),
            b: rows(&b.b),
            c: rows(&b.c),
        }
    }

    pub fn to_blocks(&self) -> Result<InvolutionBlocks> {
        Ok(InvolutionBlocks::new(
            from_rows(&self.a)?,
            from_rows(&self.b)?,
            from_rows(&self.c)?,
        ))
    }
}

/// A corrected orbit together with its stability data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub orbit: Orbit,
    /// Reduced multipliers as `[re, im]`.
    pub multipliers: Vec<[f64; 2]>,
    pub p: GitPoint,
    pub region: Region,
    pub closure: f64,
    pub symplecticity: f64,
    pub points: Vec<PointData>,
}

impl OrbitRecord {
    pub fn point(&self, index: usize) -> Option<&PointData> {
        self.points.iter().find(|p| p.index == index)
    }
}

fn reduced_point(mono: &OrbitMonodromy, tol: f64) -> Result<(Vec<Complex64>, GitPoint)> {
    let mult = reduced_multipliers(&mono.base, tol)?;
    let p = git_point_from_multipliers(&mult)?;
    Ok((mult, p))
}

/// Smallest integrator tolerance tried when the trivial pair is not resolved.
const TIGHTEST_FLOW_TOL: f64 = 1e-14;

fn unresolved_trivial(e: &Error) -> bool {
    matches!(
        e,
        Error::TrivialPairNotFound { .. } | Error::TrivialEigenvalueNotFound { .. }
    )
}

/// Monodromy, multipliers and per-point data of `orbit` in the frame of `inv`.
///
/// The trivial multipliers form a Jordan block, so an integration error `e`
/// splits them by about `sqrt(e)` times the period sensitivity. For orbits
/// close to a small primary that can exceed the trivial tolerance; the
/// analysis is then repeated with tighter integration, down to 1e-14.
pub fn analyze_orbit(
    orbit: &Orbit,
    cfg: &SystemConfig,
    inv: Involution,
    opts: &AnalysisOptions,
) -> Result<OrbitRecord> {
    let mut flow = opts.flow;
    loop {
        match analyze_with(orbit, cfg, inv, opts, &flow) {
            Err(e) if unresolved_trivial(&e) && flow.integrator.rtol > TIGHTEST_FLOW_TOL => {
                flow.integrator.rtol = (flow.integrator.rtol * 0.1).max(TIGHTEST_FLOW_TOL);
                flow.integrator.atol = (flow.integrator.atol * 0.1).max(TIGHTEST_FLOW_TOL);
            }
            other => return other,
        }
    }
}

fn analyze_with(
    orbit: &Orbit,
    cfg: &SystemConfig,
    inv: Involution,
    opts: &AnalysisOptions,
    flow: &FlowOptions,
) -> Result<OrbitRecord> {
    let mono = OrbitMonodromy::new(orbit, cfg, flow)?;
    let (mult, p) = reduced_point(&mono, opts.signature.trivial_tol)?;
    let region = classify_region(p, mult.len() / 2, opts.signature.boundary_tol)?.region;
    let mut points = Vec::new();
    for sp in symmetric_points(orbit, cfg, opts.residual_threshold, flow)? {
        if sp.involution != inv || sp.kind != PointKind::Symmetric {
            continue;
        }
        let m = mono.at(orbit, sp.time, inv, cfg, flow)?;
        let data = git_data_point(&m.blocks, &opts.signature)?;
        let sig = if data.epsilon.is_some() {
            b_signature(&m.blocks, &opts.signature).ok()
        } else {
            None
        };
        points.push(PointData {
            index: points.len() + 1,
            time: sp.time,
            state: sp.state.velocity_form(),
            residual: sp.residual,
            data,
            mu: sig.as_ref().map(|s| s.mu.clone()),
            witness: sig.map(|s| s.witness),
            blocks: BlockEntries::from_blocks(&m.blocks),
        });
    }
    Ok(OrbitRecord {
        orbit: orbit.clone(),
        multipliers: mult.iter().map(|z| [z.re, z.im]).collect(),
        p,
        region,
        closure: mono.closure,
        symplecticity: mono.base.residual(),
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyOptions {
    pub corrector: CorrectorOptions,
    pub analysis: AnalysisOptions,
    /// Smallest Jacobi step tried before giving up.
    pub min_step: f64,
    /// Largest allowed distance between consecutive p-points.
    pub continuity_bound: f64,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        Self {
            corrector: CorrectorOptions::default(),
            analysis: AnalysisOptions::default(),
            min_step: 1e-12,
            continuity_bound: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySample {
    pub schema_version: u32,
    pub jacobi: f64,
    pub record: OrbitRecord,
    /// Set when the p-point moved more than the continuity bound since the
    /// previous sample.
    pub refine_needed: bool,
    /// Intermediate corrections needed to reach this sample.
    pub substeps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub min_step: f64,
    pub continuity_bound: f64,
    pub halvings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyPath {
    pub system: SystemConfig,
    pub involution: Involution,
    pub samples: Vec<FamilySample>,
    pub step_control: StepControl,
}

impl FamilyPath {
    /// One sample per line.
    pub fn to_json_lines(&self) -> Result<String> {
        let mut out = String::new();
        for s in &self.samples {
            out.push_str(&crate::catalogue::to_json_exact(s)?);
            out.push('\n');
        }
        Ok(out)
    }
}

fn corrector_from(orbit: &Orbit, base: &CorrectorOptions) -> CorrectorOptions {
    CorrectorOptions {
        half_period_guess: Some(0.5 * orbit.period),
        ..*base
    }
}

/// Corrects from `start` to the target Jacobi constant, halving the step on
/// failure. Returns the orbit, the number of corrections and of halvings.
fn walk(
    start: &Orbit,
    from: f64,
    target: f64,
    cfg: &SystemConfig,
    inv: Involution,
    opts: &FamilyOptions,
) -> Result<(Orbit, usize, usize)> {
    let mut current = start.clone();
    let mut c = from;
    let mut step = target - from;
    let (mut substeps, mut halvings) = (0, 0);
    loop {
        let remaining = target - c;
        let next = if step.abs() >= remaining.abs() {
            target
        } else {
            c + step
        };
        let co = corrector_from(&current, &opts.corrector);
        match correct_symmetric_orbit(&current.initial_state, inv, Target::Jacobi(next), cfg, &co) {
            Ok(orbit) => {
                substeps += 1;
                current = orbit;
                c = next;
                if next == target {
                    return Ok((current, substeps, halvings));
                }
            }
            Err(e) if e.is_numerical() => {
                step *= 0.5;
                halvings += 1;
                if step.abs() < opts.min_step {
                    return Err(Error::StepFloorReached { jacobi: c });
                }
            }
            Err(e) => return Err(e),
        }
    }
}

/// Natural-parameter continuation of `seed` through `schedule`.
pub fn continue_family(
    seed: &Orbit,
    schedule: &[f64],
    cfg: &SystemConfig,
    inv: Involution,
    opts: &FamilyOptions,
) -> Result<FamilyPath> {
    let mut path = FamilyPath {
        system: cfg.clone(),
        involution: inv,
        samples: Vec::new(),
        step_control: StepControl {
            min_step: opts.min_step,
            continuity_bound: opts.continuity_bound,
            halvings: 0,
        },
    };
    continue_into(&mut path, seed, schedule, cfg, opts)?;
    Ok(path)
}

/// Like [`continue_family`], but appends to `path` so that samples computed
/// before a failure are kept.
pub fn continue_into(
    path: &mut FamilyPath,
    seed: &Orbit,
    schedule: &[f64],
    cfg: &SystemConfig,
    opts: &FamilyOptions,
) -> Result<()> {
    validate_schedule(schedule)?;
    let inv = path.involution;
    let mut current = seed.clone();
    let mut c = seed.jacobi;
    for &target in schedule {
        let (orbit, substeps, halvings) = walk(&current, c, target, cfg, inv, opts)?;
        path.step_control.halvings += halvings;
        let record = analyze_orbit(&orbit, cfg, inv, &opts.analysis)?;
        let refine_needed = path.samples.last().is_some_and(|prev| {
            let d = (prev.record.p.x - record.p.x).hypot(prev.record.p.y - record.p.y);
            d > opts.continuity_bound
        });
        path.samples.push(FamilySample {
            schema_version: SCHEMA_VERSION,
            jacobi: target,
            record,
            refine_needed,
            substeps,
        });
        current = orbit;
        c = target;
    }
    Ok(())
}

pub fn validate_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::EmptyInput);
    }
    if schedule.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite);
    }
    let up = schedule.windows(2).all(|w| w[1] > w[0]);
    let down = schedule.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(Error::InvalidConfig("jacobi schedule must be strictly monotone".into()));
    }
    Ok(())
}

/// A bifurcation locus of the stability diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Locus {
    /// `Γ_{l/k}`.
    Pencil { l: u32, k: u32, alpha: f64 },
    /// `Γ_d`, the parabola `y = x² / 4`.
    Parabola,
}

impl Locus {
    /// Signed functional whose zero set is the locus.
    pub fn functional(&self, p: GitPoint) -> f64 {
        match *self {
            Locus::Pencil { alpha, .. } => p.y - alpha * p.x + alpha * alpha,
            Locus::Parabola => p.y - 0.25 * p.x * p.x,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Locus::Pencil { l, k, .. } => format!("{l}/{k}"),
            Locus::Parabola => "d".to_string(),
        }
    }

    pub fn multiplicity(&self) -> u32 {
        match *self {
            Locus::Pencil { k, .. } => k,
            Locus::Parabola => 1,
        }
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `Γ_{l/k}` for reduced `l/k` in `[0, 1/2]`, `k <= k_max`.
pub fn pencil_loci(k_max: u32) -> Vec<Locus> {
    let mut out = Vec::new();
    for k in 1..=k_max {
        for l in 0..=k / 2 {
            if gcd(l, k) == 1 {
                out.push(Locus::Pencil {
                    l,
                    k,
                    alpha: PencilLine::rational(l, k).alpha,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsignJump {
    pub point: usize,
    pub eigen_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationEvent {
    pub jacobi_bracket: [f64; 2],
    pub locus: String,
    pub detail: Locus,
    /// Multiplicity `k` of the iterate that bifurcates.
    pub kind: u32,
    /// Indices of the samples on either side.
    pub samples: [usize; 2],
    pub functional: [f64; 2],
    /// The crossing lies within the boundary tolerance of a tangency with
    /// `Γ_d`, so the `l/k` assignment is not reliable.
    pub ambiguous: bool,
    pub refined: bool,
    pub bsign_jump: Option<BsignJump>,
}

/// Index (ascending order) of the A-eigenvalue equal to `alpha` at `p`.
fn crossing_eigen_index(p: GitPoint, alpha: f64) -> Option<usize> {
    let [a, b] = p.a_eigenvalues();
    if a.im != 0.0 || b.im != 0.0 {
        return None;
    }
    let (lo, hi) = if a.re <= b.re { (a.re, b.re) } else { (b.re, a.re) };
    Some(if (lo - alpha).abs() <= (hi - alpha).abs() { 0 } else { 1 })
}

/// First symmetric point whose sign for eigenvalue `eigen` differs across
/// the two records.
fn first_sign_change(before: &OrbitRecord, after: &OrbitRecord, eigen: usize) -> Option<BsignJump> {
    for pb in &before.points {
        let (Some(pa), Some(eb)) = (after.point(pb.index), pb.data.epsilon.as_ref()) else {
            continue;
        };
        let Some(ea) = pa.data.epsilon.as_ref() else {
            continue;
        };
        if eb.get(eigen).is_some() && eb.get(eigen) != ea.get(eigen) {
            return Some(BsignJump {
                point: pb.index,
                eigen_index: eigen,
            });
        }
    }
    None
}

/// Point where the segment from `a` to `b` meets the zero set of `locus`,
/// by linear interpolation of the functional.
fn crossing_point(locus: &Locus, a: GitPoint, b: GitPoint) -> GitPoint {
    let (fa, fb) = (locus.functional(a), locus.functional(b));
    let s = fa / (fa - fb);
    GitPoint::new(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y))
}

/// Sign changes of every `Γ_{l/k}` (`k <= k_max`) and of `Γ_d` between
/// consecutive samples. Brackets are the sample Jacobi constants.
pub fn detect_bifurcations(path: &FamilyPath, k_max: u32, boundary_tol: f64) -> Vec<BifurcationEvent> {
    let mut loci = pencil_loci(k_max);
    loci.push(Locus::Parabola);
    let mut events = Vec::new();
    for (i, w) in path.samples.windows(2).enumerate() {
        let (a, b) = (&w[0].record, &w[1].record);
        for locus in &loci {
            let (fa, fb) = (locus.functional(a.p), locus.functional(b.p));
            if !(fa < 0.0 && fb > 0.0 || fa > 0.0 && fb < 0.0) {
                continue;
            }
            let hit = crossing_point(locus, a.p, b.p);
            let near_tangency = match *locus {
                Locus::Pencil { alpha, .. } => {
                    (hit.x - 2.0 * alpha).hypot(hit.y - alpha * alpha) <= boundary_tol.max(1e-6)
                }
                Locus::Parabola => false,
            };
            let detail = if near_tangency { Locus::Parabola } else { *locus };
            let bsign_jump = match detail {
                Locus::Pencil { alpha, .. } => {
                    crossing_eigen_index(hit, alpha).and_then(|i| first_sign_change(a, b, i))
                }
                Locus::Parabola => None,
            };
            events.push(BifurcationEvent {
                jacobi_bracket: [w[0].jacobi, w[1].jacobi],
                locus: detail.label(),
                detail,
                kind: detail.multiplicity(),
                samples: [i, i + 1],
                functional: [fa, fb],
                ambiguous: near_tangency,
                refined: false,
                bsign_jump,
            });
        }
    }
    events
}

/// Narrows the Jacobi bracket of `event` by bisection until its width is
/// below `width`. `p_at` returns the p-point of the family at a Jacobi
/// constant.
pub fn refine_event<F>(event: &mut BifurcationEvent, width: f64, mut p_at: F) -> Result<()>
where
    F: FnMut(f64) -> Result<GitPoint>,
{
    let [mut lo, mut hi] = event.jacobi_bracket;
    let mut f_lo = event.functional[0];
    let locus = event.detail;
    while (hi - lo).abs() >= width {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let f = locus.functional(p_at(mid)?);
        if f == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (f < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
        }
    }
    event.jacobi_bracket = [lo, hi];
    event.refined = true;
    Ok(())
}

/// [`detect_bifurcations`] followed by bisection of each bracket, re-correcting
/// orbits from the sample on the lower side.
pub fn detect_bifurcations_refined(
    path: &FamilyPath,
    k_max: u32,
    cfg: &SystemConfig,
    opts: &FamilyOptions,
    width: f64,
) -> Result<Vec<BifurcationEvent>> {
    let mut events = detect_bifurcations(path, k_max, opts.analysis.signature.boundary_tol);
    for ev in &mut events {
        let mut anchor = path.samples[ev.samples[0]].record.orbit.clone();
        let inv = path.involution;
        refine_event(ev, width, |c| {
            let co = corrector_from(&anchor, &opts.corrector);
            let orbit = correct_symmetric_orbit(&anchor.initial_state, inv, Target::Jacobi(c), cfg, &co)?;
            let mono = OrbitMonodromy::new(&orbit, cfg, &opts.analysis.flow)?;
            let (_, p) = reduced_point(&mono, opts.analysis.signature.trivial_tol)?;
            anchor = orbit;
            Ok(p)
        })?;
    }
    Ok(events)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpOutcome {
    /// Exactly one symmetric point changed its B-signature.
    Jump,
    NoJump,
    /// More than one point changed.
    Multiple,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointComparison {
    pub index: usize,
    pub position: [f64; 3],
    pub before: Vec<Sign>,
    pub after: Vec<Sign>,
    pub witness_before: Vec<f64>,
    pub witness_after: Vec<f64>,
    pub jumped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BsignJumpReport {
    pub locus: String,
    pub outcome: JumpOutcome,
    pub jumped_point: Option<usize>,
    pub stable_point: Option<usize>,
    /// The bifurcating orbit is expected to be symmetric near this point.
    pub predicted_symmetric_side: Option<usize>,
    pub predicted_position: Option<[f64; 3]>,
    pub points: Vec<PointComparison>,
}

/// Compares the B-signatures at each symmetric point on both sides of `event`.
pub fn bsign_jump_report(path: &FamilyPath, event: &BifurcationEvent) -> Result<BsignJumpReport> {
    let before = &path.samples.get(event.samples[0]).ok_or(Error::EmptyInput)?.record;
    let after = &path.samples.get(event.samples[1]).ok_or(Error::EmptyInput)?.record;
    let mut points = Vec::new();
    for pb in &before.points {
        let pa = after.point(pb.index).ok_or(Error::SignUndefined { point: pb.index })?;
        let (Some(eb), Some(ea)) = (pb.data.epsilon.clone(), pa.data.epsilon.clone()) else {
            return Err(Error::SignUndefined { point: pb.index });
        };
        points.push(PointComparison {
            index: pb.index,
            position: [pb.state[0], pb.state[1], pb.state[2]],
            jumped: eb != ea,
            before: eb,
            after: ea,
            witness_before: pb.witness.clone().unwrap_or_default(),
            witness_after: pa.witness.clone().unwrap_or_default(),
        });
    }
    let jumped: Vec<&PointComparison> = points.iter().filter(|p| p.jumped).collect();
    let outcome = match jumped.len() {
        0 => JumpOutcome::NoJump,
        1 => JumpOutcome::Jump,
        _ => JumpOutcome::Multiple,
    };
    let (jumped_point, stable) = if outcome == JumpOutcome::Jump {
        (Some(jumped[0].index), points.iter().find(|p| !p.jumped))
    } else {
        (None, None)
    };
    Ok(BsignJumpReport {
        locus: event.locus.clone(),
        outcome,
        jumped_point,
        stable_point: stable.map(|p| p.index),
        predicted_symmetric_side: stable.map(|p| p.index),
        predicted_position: stable.map(|p| p.position),
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariant {
    ChiSft,
    ChiReal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InvariantValue {
    Integer(i64),
    Gaussian(GaussianInt),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerCheck {
    pub invariant: Invariant,
    pub equal: bool,
    pub values: [InvariantValue; 2],
}

/// Evaluates one invariant on both ledgers and compares exactly.
pub fn ledger_check(
    before: &OrbitLedger,
    after: &OrbitLedger,
    which: Invariant,
    boundary_tol: f64,
) -> Result<LedgerCheck> {
    let eval = |l: &OrbitLedger| -> Result<InvariantValue> {
        Ok(match which {
            Invariant::ChiSft => InvariantValue::Integer(chi_sft(l, boundary_tol)?),
            Invariant::ChiReal => InvariantValue::Gaussian(chi_real(l.chords())?),
        })
    };
    let values = [eval(before)?, eval(after)?];
    Ok(LedgerCheck {
        invariant: which,
        equal: values[0] == values[1],
        values,
    })
}
