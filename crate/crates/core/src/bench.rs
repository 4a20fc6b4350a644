//! Benchmark harness: runs every case on each backend, checks that the
//! backends agree and reports mean call latency.

use std::fmt::Write;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::kb::KnowledgeBase;
use crate::name::EntityName;
use crate::reasoner::{Backend, Method, Reasoner, ReasonerError, ReasonerResult};

pub const DEFAULT_REPETITIONS: usize = 100;

/// What the timings measure.
pub const TIMING_BOUNDARY: &str = "in-process reasoner call";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("repetitions must be at least 1")]
    ZeroRepetitions,
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BenchCase {
    pub method: Method,
    pub inputs: Vec<EntityName>,
    pub repetitions: usize,
}

impl BenchCase {
    pub fn new(method: Method, inputs: Vec<EntityName>, repetitions: usize) -> Result<Self, BenchError> {
        if repetitions == 0 {
            return Err(BenchError::ZeroRepetitions);
        }
        Ok(Self {
            method,
            inputs,
            repetitions,
        })
    }

    /// Inputs joined with `+`, or `-` when there are none.
    pub fn input_label(&self) -> String {
        if self.inputs.is_empty() {
            "-".to_string()
        } else {
            self.inputs
                .iter()
                .map(EntityName::canonical)
                .collect::<Vec<_>>()
                .join("+")
        }
    }
}

/// Parses `<method> [inputs...]` lines; `#` starts a comment.
pub fn parse_cases(text: &str, repetitions: usize) -> Result<Vec<BenchCase>, BenchError> {
    let mut cases = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split_once('#').map_or(raw, |(before, _)| before);
        let mut fields = content.split_whitespace();
        let Some(method) = fields.next() else {
            continue;
        };
        let method = Method::from_id(method).ok_or_else(|| BenchError::Syntax {
            line,
            reason: format!("unknown method `{method}`"),
        })?;
        let inputs = fields
            .map(|f| {
                EntityName::new(f).map_err(|e| BenchError::Syntax {
                    line,
                    reason: e.to_string(),
                })
            })
            .collect::<Result<_, _>>()?;
        cases.push(BenchCase::new(method, inputs, repetitions)?);
    }
    Ok(cases)
}

/// Order-insensitive equality of answers and per-answer chains.
pub fn compare_outputs(a: &ReasonerResult, b: &ReasonerResult) -> bool {
    a.canonical_form() == b.canonical_form()
}

/// Results compare by [`compare_outputs`], errors by kind.
pub fn compare_outcomes(
    a: &Result<ReasonerResult, ReasonerError>,
    b: &Result<ReasonerResult, ReasonerError>,
) -> bool {
    match (a, b) {
        (Ok(a), Ok(b)) => compare_outputs(a, b),
        (Err(a), Err(b)) => a.kind == b.kind,
        _ => false,
    }
}

pub fn output_digest(outcome: &Result<ReasonerResult, ReasonerError>) -> String {
    let text = match outcome {
        Ok(result) => result.canonical_text(),
        Err(e) => format!("error:{}", e.kind),
    };
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BackendRun {
    pub backend: Backend,
    pub mean_ns: f64,
    pub runs: usize,
    pub output_digest: String,
    /// Rendered answers, or the error for failed calls.
    pub output: Result<String, ReasonerError>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    pub method: Method,
    pub input: String,
    pub runs: Vec<BackendRun>,
    pub outputs_equal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMeta {
    pub kb_digest: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub timing_boundary: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub meta: ReportMeta,
    pub cases: Vec<CaseReport>,
}

impl BenchReport {
    pub fn all_equal(&self) -> bool {
        self.cases.iter().all(|c| c.outputs_equal)
    }

    /// Sum of per-case means for one backend.
    pub fn total_mean_ns(&self, backend: Backend) -> f64 {
        self.cases
            .iter()
            .flat_map(|c| &c.runs)
            .filter(|r| r.backend == backend)
            .map(|r| r.mean_ns)
            .sum()
    }
}

fn time_case(
    reasoner: &dyn Reasoner,
    case: &BenchCase,
) -> (BackendRun, Result<ReasonerResult, ReasonerError>) {
    let outcome = reasoner.run_method(case.method, &case.inputs);
    let start = Instant::now();
    for _ in 0..case.repetitions {
        std::hint::black_box(
            reasoner
                .run_method(case.method, std::hint::black_box(&case.inputs))
                .ok(),
        );
    }
    let elapsed = start.elapsed();
    let run = BackendRun {
        backend: reasoner.backend(),
        mean_ns: elapsed.as_nanos() as f64 / case.repetitions as f64,
        runs: case.repetitions,
        output_digest: output_digest(&outcome),
        output: outcome.as_ref().map(ReasonerResult::render).map_err(Clone::clone),
    };
    (run, outcome)
}

/// Runs each case on every backend in turn: one untimed warm-up call, then
/// `repetitions` timed calls. Reasoner errors are recorded, not fatal.
pub fn run_suite(cases: &[BenchCase], kb: &KnowledgeBase, backends: &[&dyn Reasoner]) -> BenchReport {
    let mut reports = Vec::with_capacity(cases.len());
    for case in cases {
        let mut runs = Vec::with_capacity(backends.len());
        let mut outcomes = Vec::with_capacity(backends.len());
        for backend in backends {
            let (run, outcome) = time_case(*backend, case);
            runs.push(run);
            outcomes.push(outcome);
        }
        let outputs_equal = outcomes.windows(2).all(|w| compare_outcomes(&w[0], &w[1]));
        reports.push(CaseReport {
            method: case.method,
            input: case.input_label(),
            runs,
            outputs_equal,
        });
    }
    BenchReport {
        meta: ReportMeta {
            kb_digest: kb.digest(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            timing_boundary: TIMING_BOUNDARY,
        },
        cases: reports,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

pub const CSV_HEADER: &str = "method,input,backend,mean_ns,runs,output_digest,outputs_equal";

pub fn emit_report(report: &BenchReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => emit_csv(report),
        ReportFormat::Markdown => emit_markdown(report),
    }
}

fn emit_csv(report: &BenchReport) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for case in &report.cases {
        for run in &case.runs {
            let _ = writeln!(
                out,
                "{},{},{},{:.0},{},{},{}",
                case.method,
                case.input,
                run.backend,
                run.mean_ns,
                run.runs,
                run.output_digest,
                case.outputs_equal
            );
        }
    }
    out
}

fn cell(run: Option<&BackendRun>) -> (String, String) {
    match run {
        None => ("-".into(), "-".into()),
        Some(run) => {
            let output = match &run.output {
                Ok(text) if text.is_empty() => "(none)".to_string(),
                Ok(text) => text.clone(),
                Err(e) => format!("error: {}", e.kind),
            };
            (output, format!("{:.1} µs", run.mean_ns / 1000.0))
        }
    }
}

fn emit_markdown(report: &BenchReport) -> String {
    let mut out = String::new();
    out.push_str("| Method | Input | Output (relational) | Output (ontology) | Mean (relational) | Mean (ontology) | Equal |\n");
    out.push_str("|---|---|---|---|---|---|---|\n");
    for case in &report.cases {
        let find = |b| case.runs.iter().find(|r| r.backend == b);
        let (rel_out, rel_time) = cell(find(Backend::Relational));
        let (ont_out, ont_time) = cell(find(Backend::Ontology));
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} |",
            case.method.label(),
            case.input,
            rel_out,
            ont_out,
            rel_time,
            ont_time,
            if case.outputs_equal { "yes" } else { "no" }
        );
    }
    let relational = report.total_mean_ns(Backend::Relational);
    let ontology = report.total_mean_ns(Backend::Ontology);
    out.push('\n');
    if relational > 0.0 && ontology > 0.0 {
        let _ = writeln!(
            out,
            "Summed means: relational {:.1} µs, ontology {:.1} µs; ontology / relational = {:.2}",
            relational / 1000.0,
            ontology / 1000.0,
            ontology / relational
        );
    } else {
        let _ = writeln!(
            out,
            "Summed means: relational {relational:.0} ns, ontology {ontology:.0} ns"
        );
    }
    let _ = writeln!(out, "Timing boundary: {}.", report.meta.timing_boundary);
    out
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::kb::reference;
    use crate::ontology::OntologyReasoner;
    use crate::relational::RelationalReasoner;

    fn n(s: &str) -> EntityName {
        EntityName::new(s).unwrap()
    }

    fn result(pairs: &[(&str, &[&str])]) -> ReasonerResult {
        ReasonerResult::new(
            Backend::Relational,
            pairs
                .iter()
                .map(|(a, c)| (n(a), c.iter().map(|x| n(x)).collect())),
        )
    }

    #[test]
    fn comparison_ignores_order() {
        let a = result(&[("playstation", &[]), ("television", &[]), ("computer", &[])]);
        let b = result(&[("computer", &[]), ("playstation", &[]), ("television", &[])]);
        assert!(compare_outputs(&a, &b));
        assert!(!compare_outputs(
            &result(&[("office", &[])]),
            &result(&[("office", &[]), ("living_room", &[])])
        ));
        assert!(compare_outputs(&result(&[]), &result(&[])));
        assert!(!compare_outputs(
            &result(&[("kitchen", &["refrigerator"])]),
            &result(&[("kitchen", &[])])
        ));
    }

    #[test]
    fn zero_repetitions_rejected() {
        assert_eq!(
            BenchCase::new(Method::AllUtilities, vec![], 0),
            Err(BenchError::ZeroRepetitions)
        );
        assert_eq!(
            parse_cases("all_utilities\n", 0),
            Err(BenchError::ZeroRepetitions)
        );
        assert!(matches!(
            parse_cases("nope x\n", 1),
            Err(BenchError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn reference_suite_agrees() {
        let kb = reference::knowledge_base();
        let cases = parse_cases(reference::REFERENCE_CASES, 3).unwrap();
        assert_eq!(cases.len(), 13);
        let (r, o) = (RelationalReasoner::new(&kb), OntologyReasoner::new(&kb));
        let report = run_suite(&cases, &kb, &[&r, &o]);
        assert!(report.all_equal());
        let csv = emit_report(&report, ReportFormat::Csv);
        assert_eq!(csv.lines().count(), 1 + 26);
        assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
        let md = emit_report(&report, ReportFormat::Markdown);
        assert_eq!(
            md.lines()
                .filter(|l| l.starts_with("| ") && !l.starts_with("| Method"))
                .count(),
            13
        );
        assert!(md.contains("ontology / relational"));
        assert!(md.contains("kitchen (via refrigerator)"));
    }

    #[test]
    fn reference_golden_on_both_backends() {
        let kb = reference::knowledge_base();
        let (r, o) = (RelationalReasoner::new(&kb), OntologyReasoner::new(&kb));
        let cases = parse_cases(reference::REFERENCE_CASES, 1).unwrap();
        let golden: Vec<&str> = reference::REFERENCE_GOLDEN
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .collect();
        assert_eq!(golden.len(), cases.len());
        for (case, line) in cases.iter().zip(golden) {
            let (head, want) = line.split_once(" => ").unwrap();
            assert_eq!(head, format!("{} {}", case.method, case.input_label()));
            for backend in [&r as &dyn Reasoner, &o] {
                let got = backend.run_method(case.method, &case.inputs).unwrap();
                let got: Vec<&str> = got.answer_set().into_iter().collect();
                assert_eq!(got.join(", "), want, "{} on {}", line, backend.backend());
            }
        }
        // The second input shown for related objects.
        for backend in [&r as &dyn Reasoner, &o] {
            let printer = backend.related_objects(&n("Printer")).unwrap();
            assert_eq!(printer.answer_set().into_iter().collect::<Vec<_>>(), ["computer"]);
        }
    }

    #[test]
    fn errors_compare_by_kind() {
        let kb = reference::knowledge_base();
        let (r, o) = (RelationalReasoner::new(&kb), OntologyReasoner::new(&kb));
        let case = BenchCase::new(Method::RoomClassOf, vec![n("room9")], 1).unwrap();
        let report = run_suite(&[case], &kb, &[&r, &o]);
        assert!(report.cases[0].outputs_equal);
        assert_eq!(
            report.cases[0].runs[0].output_digest,
            report.cases[0].runs[1].output_digest
        );
        assert!(!compare_outcomes(
            &Ok(result(&[])),
            &Err(ReasonerError::new(crate::ErrorKind::UnknownEntity, "x"))
        ));
    }

    #[test]
    fn empty_report_is_header_only() {
        let report = run_suite(&[], &KnowledgeBase::empty(), &[]);
        assert_eq!(emit_report(&report, ReportFormat::Csv), format!("{CSV_HEADER}\n"));
    }

    fn arb_result() -> impl Strategy<Value = ReasonerResult> {
        prop::collection::vec(("[a-d]", prop::collection::vec("[x-z]", 0..2)), 0..4).prop_map(|pairs| {
            ReasonerResult::new(
                Backend::Relational,
                pairs
                    .into_iter()
                    .map(|(a, c)| (n(&a), c.iter().map(|x| n(x)).collect())),
            )
        })
    }

    proptest! {
        #[test]
        fn comparison_is_symmetric(a in arb_result(), b in arb_result()) {
            prop_assert_eq!(compare_outputs(&a, &b), compare_outputs(&b, &a));
            prop_assert!(compare_outputs(&a, &a));
        }
    }
}
