use std::io::Write;
use std::path::Path;

use semnav_core::bench::{emit_report, parse_cases, run_suite, ReportFormat};
use semnav_core::kb::{BuildError, Kind, ParseError};
use semnav_core::world::WorldError;
use semnav_core::{EntityName, ErrorKind, Method, Reasoner, ReasonerError, ReasonerResult};

use crate::{exit, BackendChoice, Engine, Sources};

fn render(result: &ReasonerResult) -> String {
    if result.is_empty() {
        "(no answers)".to_string()
    } else {
        result.render()
    }
}

fn run(reasoner: &dyn Reasoner, method: Method, inputs: &[String]) -> Result<ReasonerResult, ReasonerError> {
    let names = inputs
        .iter()
        .map(|i| EntityName::new(i).map_err(|_| ReasonerError::new(ErrorKind::UnknownEntity, i.as_str())))
        .collect::<Result<Vec<_>, _>>()?;
    reasoner.run_method(method, &names)
}

pub fn query(
    engine: &Engine,
    backend: BackendChoice,
    method: &str,
    inputs: &[String],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let Some(method) = Method::from_id(method) else {
        let _ = writeln!(err, "unknown method `{method}`");
        return exit::LOAD;
    };
    let reasoners: Vec<&dyn Reasoner> = match engine.reasoner(backend) {
        Some(r) => vec![r],
        None => engine.both().to_vec(),
    };
    query_with(&reasoners, method, inputs, out, err)
}

/// Runs `method` on each reasoner. With several, prints each output and an
/// EQUAL / DIFFER verdict.
pub fn query_with(
    reasoners: &[&dyn Reasoner],
    method: Method,
    inputs: &[String],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let outcomes: Vec<_> = reasoners.iter().map(|r| run(*r, method, inputs)).collect();
    if let [outcome] = outcomes.as_slice() {
        return match outcome {
            Ok(result) => {
                let _ = writeln!(out, "{}", render(result));
                exit::OK
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                exit::REASONER
            }
        };
    }
    for (reasoner, outcome) in reasoners.iter().zip(&outcomes) {
        let text = match outcome {
            Ok(result) => render(result),
            Err(e) => format!("error: {e}"),
        };
        let _ = writeln!(out, "{}: {text}", reasoner.backend());
    }
    let equal = outcomes
        .windows(2)
        .all(|w| semnav_core::bench::compare_outcomes(&w[0], &w[1]));
    let _ = writeln!(out, "{}", if equal { "EQUAL" } else { "DIFFER" });
    if !equal {
        exit::DIFFER
    } else if let Some(Err(e)) = outcomes.first() {
        let _ = writeln!(err, "error: {e}");
        exit::REASONER
    } else {
        exit::OK
    }
}

/// Runs the case suite on `reasoners`. Writes `bench.csv` and `bench.md`
/// into `out_dir` when given, otherwise prints the csv, a blank line and
/// the markdown table.
pub fn bench(
    engine: &Engine,
    reasoners: &[&dyn Reasoner],
    cases: &str,
    repetitions: usize,
    out_dir: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let cases = match parse_cases(cases, repetitions) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "cases: {e}");
            return exit::LOAD;
        }
    };
    let report = run_suite(&cases, &engine.kb, reasoners);
    let csv = emit_report(&report, ReportFormat::Csv);
    let markdown = emit_report(&report, ReportFormat::Markdown);
    match out_dir {
        Some(dir) => {
            let written = std::fs::create_dir_all(dir)
                .and_then(|_| std::fs::write(dir.join("bench.csv"), &csv))
                .and_then(|_| std::fs::write(dir.join("bench.md"), &markdown));
            if let Err(e) = written {
                let _ = writeln!(err, "writing report to {}: {e}", dir.display());
                return exit::LOAD;
            }
            let _ = write!(out, "{markdown}");
        }
        None => {
            let _ = write!(out, "{csv}\n{markdown}");
        }
    }
    if report.all_equal() {
        exit::OK
    } else {
        let differing: Vec<String> = report
            .cases
            .iter()
            .filter(|c| !c.outputs_equal)
            .map(|c| format!("{} {}", c.method, c.input))
            .collect();
        let _ = writeln!(err, "outputs differ: {}", differing.join("; "));
        exit::DIFFER
    }
}

/// Short name of a load failure, for lint output.
pub fn failure_kind(error: &anyhow::Error) -> &'static str {
    for cause in error.chain() {
        if let Some(e) = cause.downcast_ref::<BuildError>() {
            return match e {
                BuildError::UnknownReference { .. } => "UnknownReference",
                BuildError::ContainmentCycle { .. } => "ContainmentCycle",
                BuildError::CrossNamespaceCollision { .. } => "CrossNamespaceCollision",
                BuildError::SelfInteraction { .. } => "SelfInteraction",
            };
        }
        if let Some(e) = cause.downcast_ref::<ParseError>() {
            return match e {
                ParseError::Syntax { .. } => "SyntaxError",
                ParseError::DuplicateDeclaration { .. } => "DuplicateDeclaration",
            };
        }
        if let Some(e) = cause.downcast_ref::<WorldError>() {
            return e.kind();
        }
    }
    "IoError"
}

/// Loads and checks the knowledge base and world, printing a summary.
pub fn validate(sources: &Sources, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let report = |e: anyhow::Error, err: &mut dyn Write| {
        let _ = writeln!(err, "{}: {e:#}", failure_kind(&e));
        exit::LOAD
    };
    let kb = match sources.load_kb() {
        Ok(kb) => kb,
        Err(e) => return report(e, err),
    };
    let _ = writeln!(
        out,
        "knowledge base ok: {} entities, {} relations, {} physical rooms, {} physical objects",
        Kind::ALL
            .iter()
            .filter(|k| k.is_conceptual())
            .map(|k| kb.entity_count(*k))
            .sum::<usize>(),
        kb.relations().len(),
        kb.physical_rooms().count(),
        kb.physical_objects().count()
    );
    if sources.world.is_some() || (sources.conceptual.is_none() && sources.physical.is_none()) {
        match sources.load_world(&kb) {
            Ok(world) => {
                let _ = writeln!(
                    out,
                    "world ok: {}x{}, {} rooms, robot at ({}, {})",
                    world.width(),
                    world.height(),
                    world.rooms().count(),
                    world.robot().x,
                    world.robot().y
                );
            }
            Err(e) => return report(e, err),
        }
    }
    exit::OK
}
