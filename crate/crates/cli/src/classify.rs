use orbitlab::catalogue::SCHEMA_VERSION;
use orbitlab::cr3bp::{
    correct_symmetric_orbit, energy_and_jacobi, flow_with_stm, CorrectorOptions, FlowOptions, Involution, OrbitFile,
    State, Target,
};
use orbitlab::families::{analyze_orbit, AnalysisOptions, OrbitRecord};
use orbitlab::report::{chi_contribution, classify_matrix, matrix_from_rows};
use orbitlab::signatures::{krein_signs_excluding_trivial, KreinEntry, SignatureOptions};
use orbitlab::symplectic::{GitPoint, Region, Sign, DEFAULT_SYMPLECTIC_TOL};
use orbitlab::Error;
use serde::Serialize;
use serde_json::Value;

use crate::{json_line, read_text, resolve_system, ClassifyArgs, CliResult, Failure, Kind};

#[derive(Serialize)]
struct PointReport {
    index: usize,
    time: f64,
    position: [f64; 3],
    p: GitPoint,
    region: Region,
    epsilon: Option<Vec<Sign>>,
    witness: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct OrbitReport {
    schema_version: u32,
    input: &'static str,
    system: String,
    mu: f64,
    involution: Involution,
    jacobi: f64,
    period: f64,
    state: [f64; 6],
    symmetry: Vec<Involution>,
    p: GitPoint,
    region: Region,
    multipliers: Vec<[f64; 2]>,
    krein: Option<Vec<KreinEntry>>,
    chi_sft: Option<i64>,
    points: Vec<PointReport>,
}

fn classify_orbit(text: &str, args: &ClassifyArgs) -> CliResult<OrbitReport> {
    let file = OrbitFile::parse(text)?;
    let cfg = resolve_system(args.system.system.as_deref(), file.system.as_deref())?;
    let inv = args.system.involution;
    let seed = State::from_velocity(file.state);
    let jacobi = match file.jacobi {
        Some(c) => c,
        None => energy_and_jacobi(&seed, &cfg)?.1,
    };
    let defaults = CorrectorOptions::default();
    let co = CorrectorOptions {
        tol: args.tol.unwrap_or(defaults.tol),
        half_period_guess: file.half_period_guess.or(file.period.map(|t| 0.5 * t)),
        ..defaults
    };
    let orbit = correct_symmetric_orbit(&seed, inv, Target::Jacobi(jacobi), &cfg, &co)?;
    let record: OrbitRecord = analyze_orbit(&orbit, &cfg, inv, &AnalysisOptions::default())?;
    // Krein signs are conjugation invariant, so the monodromy at t = 0 will do
    let krein = flow_with_stm(&orbit.initial_state, orbit.period, &cfg, &FlowOptions::default())
        .ok()
        .and_then(|(_, m)| krein_signs_excluding_trivial(&m, Some(SignatureOptions::default().trivial_tol)).ok())
        .map(|k| k.entries);
    let points = record
        .points
        .iter()
        .map(|pt| PointReport {
            index: pt.index,
            time: pt.time,
            position: [pt.state[0], pt.state[1], pt.state[2]],
            p: pt.data.p,
            region: pt.data.region,
            epsilon: pt.data.epsilon.clone(),
            witness: pt.witness.clone(),
        })
        .collect();
    Ok(OrbitReport {
        schema_version: SCHEMA_VERSION,
        input: "orbit",
        system: cfg.name.clone(),
        mu: cfg.mu,
        involution: inv,
        jacobi: orbit.jacobi,
        period: orbit.period,
        state: orbit.initial_state.velocity_form(),
        symmetry: orbit.symmetry.clone(),
        p: record.p,
        region: record.region,
        multipliers: record.multipliers.clone(),
        krein,
        chi_sft: chi_contribution(record.region),
        points,
    })
}

fn classify_matrix_value(rows: &Value, args: &ClassifyArgs) -> CliResult<String> {
    let rows: Vec<Vec<f64>> = serde_json::from_value(rows.clone()).map_err(Error::from)?;
    let m = matrix_from_rows(&rows)?;
    json_line(&classify_matrix(
        m,
        args.tol.unwrap_or(DEFAULT_SYMPLECTIC_TOL),
        args.unreduced,
    )?)
}

pub fn run(args: &ClassifyArgs) -> CliResult<String> {
    let text = read_text(&args.input)?;
    let value: Value = serde_json::from_str(&text).map_err(Error::from)?;
    match &value {
        Value::Array(_) => classify_matrix_value(&value, args),
        Value::Object(o) if o.contains_key("matrix") => classify_matrix_value(&o["matrix"], args),
        Value::Object(o) if o.contains_key("state") => json_line(&classify_orbit(&text, args)?),
        _ => Err(Failure::new(
            Kind::Validation,
            "input is neither a matrix nor an orbit file",
        )),
    }
}
