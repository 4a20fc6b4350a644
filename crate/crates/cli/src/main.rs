use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use semnav_cli::server::{serve, AppState};
use semnav_cli::{commands, exit, repl, BackendChoice, Engine, Sources};
use semnav_core::bench::DEFAULT_REPETITIONS;
use semnav_core::kb::reference;

#[derive(Debug, Parser)]
#[command(name = "semnav", version, about = "Semantic navigation knowledge engine")]
struct Cli {
    /// Conceptual knowledge base file (default: bundled reference household).
    #[arg(long, global = true)]
    conceptual: Option<PathBuf>,
    /// Physical knowledge base file.
    #[arg(long, global = true)]
    physical: Option<PathBuf>,
    /// Grid world file.
    #[arg(long, global = true)]
    world: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendChoice>,
    /// Timed repetitions per benchmark case.
    #[arg(long, global = true, default_value_t = DEFAULT_REPETITIONS)]
    reps: usize,
    #[arg(long, global = true, env = "SEMNAV_LISTEN", default_value = "127.0.0.1:8080")]
    listen: SocketAddr,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one reasoner method.
    Query { method: String, inputs: Vec<String> },
    /// Time every case on both backends and compare their outputs.
    Bench {
        /// Case file, one `<method> [inputs...]` per line.
        #[arg(long)]
        cases: Option<PathBuf>,
        /// Directory for bench.csv and bench.md.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Interactive navigation.
    Repl,
    /// JSON service.
    Serve,
    /// Check the knowledge base and world files.
    Validate,
}

fn fail(message: impl std::fmt::Display) -> i32 {
    eprintln!("{message}");
    exit::LOAD
}

fn run(cli: Cli) -> i32 {
    let sources = Sources {
        conceptual: cli.conceptual.clone(),
        physical: cli.physical.clone(),
        world: cli.world.clone(),
    };
    let stdout = io::stdout();
    let stderr = io::stderr();
    if let Command::Validate = cli.command {
        return commands::validate(&sources, &mut stdout.lock(), &mut stderr.lock());
    }
    let kb = match sources.load_kb() {
        Ok(kb) => kb,
        Err(e) => return fail(format!("{}: {e:#}", commands::failure_kind(&e))),
    };
    let engine = Engine::new(kb);
    match cli.command {
        Command::Query { method, inputs } => {
            let backend = cli.backend.unwrap_or(BackendChoice::Relational);
            commands::query(
                &engine,
                backend,
                &method,
                &inputs,
                &mut stdout.lock(),
                &mut stderr.lock(),
            )
        }
        Command::Bench { cases, out } => {
            if cli.backend.is_some_and(|b| b != BackendChoice::Both) {
                return fail("bench compares both backends; --backend must be `both`");
            }
            let text = match cases {
                Some(path) => match std::fs::read_to_string(&path) {
                    Ok(t) => t,
                    Err(e) => return fail(format!("reading {}: {e}", path.display())),
                },
                None => reference::REFERENCE_CASES.to_string(),
            };
            let code = commands::bench(
                &engine,
                &engine.both(),
                &text,
                cli.reps,
                out.as_deref(),
                &mut stdout.lock(),
                &mut stderr.lock(),
            );
            let _ = stdout.lock().flush();
            code
        }
        Command::Repl | Command::Serve => {
            let backend = cli.backend.unwrap_or(BackendChoice::Relational);
            if backend == BackendChoice::Both {
                return fail("navigation needs a single backend");
            }
            let mut world = match sources.load_world(&engine.kb) {
                Ok(w) => w,
                Err(e) => return fail(format!("{}: {e:#}", commands::failure_kind(&e))),
            };
            if let Command::Repl = cli.command {
                let reasoner = engine.reasoner(backend).expect("single backend");
                return repl::run(
                    &engine.kb,
                    reasoner,
                    &mut world,
                    &mut io::stdin().lock(),
                    &mut stdout.lock(),
                );
            }
            let state = Arc::new(AppState::new(engine, world, backend, cli.reps));
            let runtime = match tokio::runtime::Runtime::new() {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            match runtime.block_on(serve(state, cli.listen)) {
                Ok(()) => exit::OK,
                Err(e) => fail(format!("serving on {}: {e}", cli.listen)),
            }
        }
        Command::Validate => unreachable!(),
    }
}

fn main() {
    let code = match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                exit::LOAD
            } else {
                exit::OK
            }
        }
    };
    std::process::exit(code);
}
