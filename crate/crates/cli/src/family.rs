use std::time::{Duration, SystemTime, UNIX_EPOCH};

use orbitlab::catalogue::{append_records, CatalogueRecord, SCHEMA_VERSION};
use orbitlab::cr3bp::{correct_symmetric_orbit, energy_and_jacobi, Involution, OrbitFile, State, Target};
use orbitlab::families::{
    bsign_jump_report, continue_into, detect_bifurcations, detect_bifurcations_refined, validate_schedule,
    BifurcationEvent, BsignJumpReport, FamilyOptions, FamilyPath, Locus, StepControl,
};
use orbitlab::Error;
use serde::Serialize;

use crate::{create_dir, json_line, read_text, resolve_system, write_text, CliResult, Failure, FamilyArgs, Kind};

#[derive(Serialize)]
struct EventEntry {
    event: BifurcationEvent,
    /// Only for pencil crossings where both sides carry signatures.
    bsign: Option<BsignJumpReport>,
}

#[derive(Serialize)]
struct EventsFile {
    schema_version: u32,
    system: String,
    mu: f64,
    involution: Involution,
    k_max: u32,
    /// False when continuation stopped before the end of the schedule.
    complete: bool,
    events: Vec<EventEntry>,
}

#[derive(Serialize)]
struct Summary {
    schema_version: u32,
    samples: usize,
    events: usize,
    appended: usize,
}

fn timestamp(flag: Option<&str>) -> CliResult<String> {
    if let Some(t) = flag {
        humantime::parse_rfc3339_weak(t)
            .map_err(|e| Failure::new(Kind::Validation, format!("bad timestamp '{t}': {e}")))?;
        return Ok(t.to_string());
    }
    let at = match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(s) => {
            let secs: u64 = s
                .trim()
                .parse()
                .map_err(|_| Failure::new(Kind::Validation, format!("bad SOURCE_DATE_EPOCH '{s}'")))?;
            UNIX_EPOCH + Duration::from_secs(secs)
        }
        Err(_) => SystemTime::now(),
    };
    Ok(humantime::format_rfc3339_seconds(at).to_string())
}

fn events_of(path: &FamilyPath, args: &FamilyArgs, opts: &FamilyOptions, complete: bool) -> CliResult<Vec<EventEntry>> {
    let events = match args.refine {
        Some(width) if complete => detect_bifurcations_refined(path, args.kmax, &path.system, opts, width)?,
        _ => detect_bifurcations(path, args.kmax, opts.analysis.signature.boundary_tol),
    };
    Ok(events
        .into_iter()
        .map(|event| {
            let bsign = match event.detail {
                Locus::Pencil { .. } => bsign_jump_report(path, &event).ok(),
                Locus::Parabola => None,
            };
            EventEntry { event, bsign }
        })
        .collect())
}

/// Writes the path, the events and the catalogue for whatever samples exist.
fn flush(
    path: &FamilyPath,
    events: Vec<EventEntry>,
    args: &FamilyArgs,
    stamp: &str,
    complete: bool,
) -> CliResult<Summary> {
    write_text(&args.out.join("path.jsonl"), &path.to_json_lines()?)?;
    let n_events = events.len();
    let file = EventsFile {
        schema_version: SCHEMA_VERSION,
        system: path.system.name.clone(),
        mu: path.system.mu,
        involution: path.involution,
        k_max: args.kmax,
        complete,
        events,
    };
    write_text(&args.out.join("events.json"), &json_line(&file)?)?;
    let records: Vec<CatalogueRecord> = path
        .samples
        .iter()
        .map(|s| CatalogueRecord::new(&s.record, &path.system, path.involution, stamp))
        .collect();
    let appended = append_records(&args.out.join("catalogue.jsonl"), &records)?;
    Ok(Summary {
        schema_version: SCHEMA_VERSION,
        samples: path.samples.len(),
        events: n_events,
        appended,
    })
}

pub fn run(args: &FamilyArgs) -> CliResult<String> {
    validate_schedule(&args.jacobi)?;
    if args.kmax == 0 {
        return Err(Error::InvalidConfig("--kmax must be at least 1".into()).into());
    }
    let stamp = timestamp(args.timestamp.as_deref())?;
    let file = OrbitFile::parse(&read_text(&args.seed)?)?;
    let cfg = resolve_system(args.system.system.as_deref(), file.system.as_deref())?;
    let inv = args.system.involution;

    let mut opts = FamilyOptions::default();
    if let Some(tol) = args.tol {
        opts.corrector.tol = tol;
    }
    if let Some(step) = args.min_step {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidConfig("--min-step must be positive".into()).into());
        }
        opts.min_step = step;
    }
    let state = State::from_velocity(file.state);
    let jacobi = match file.jacobi {
        Some(c) => c,
        None => energy_and_jacobi(&state, &cfg)?.1,
    };
    let mut co = opts.corrector;
    co.half_period_guess = file.half_period_guess.or(file.period.map(|t| 0.5 * t));
    let seed = correct_symmetric_orbit(&state, inv, Target::Jacobi(jacobi), &cfg, &co)?;

    create_dir(&args.out)?;
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
    let walked = continue_into(&mut path, &seed, &args.jacobi, &cfg, &opts);
    let complete = walked.is_ok();
    let (events, refine_error) = match events_of(&path, args, &opts, complete) {
        Ok(ev) => (ev, None),
        // keep the unrefined events so the output is still usable
        Err(e) => (events_of(&path, args, &opts, false)?, Some(e)),
    };
    let summary = flush(&path, events, args, &stamp, complete)?;
    walked?;
    if let Some(e) = refine_error {
        return Err(e);
    }
    json_line(&summary)
}
