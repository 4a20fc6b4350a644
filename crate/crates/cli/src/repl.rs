//! Interactive navigation loop: type a request, then answer each proposal
//! with `y` (go there), `n` (show the next one) or `q` (quit).

use std::io::{BufRead, Write};

use semnav_core::planner::{resolve, Next, PlanSession, Proposal};
use semnav_core::world::{GridWorld, WorldError};
use semnav_core::{KnowledgeBase, Reasoner};

use crate::exit;

enum Verdict {
    Accept,
    Reject,
    Quit,
}

fn read_line(input: &mut dyn BufRead) -> Option<String> {
    let mut line = String::new();
    match input.read_line(&mut line) {
        Ok(0) | Err(_) => None,
        Ok(_) => Some(line.trim().to_string()),
    }
}

fn ask(input: &mut dyn BufRead, out: &mut dyn Write) -> Option<Verdict> {
    loop {
        let _ = write!(out, "accept? [y/n/q] ");
        let _ = out.flush();
        match read_line(input)?.to_ascii_lowercase().as_str() {
            "y" | "yes" => return Some(Verdict::Accept),
            "n" | "no" => return Some(Verdict::Reject),
            "q" | "quit" => return Some(Verdict::Quit),
            _ => {
                let _ = writeln!(out, "please answer y, n or q");
            }
        }
    }
}

fn show(proposal: &Proposal, out: &mut dyn Write) {
    let _ = writeln!(
        out,
        "proposal #{}: {} ({})",
        proposal.ordinal, proposal.destination, proposal.chain
    );
}

fn exhausted(session: &PlanSession, out: &mut dyn Write) {
    let _ = writeln!(out, "no more possibilities");
    for dead in session.unrealizable() {
        let _ = writeln!(out, "  unrealizable: {} ({})", dead.chain, dead.reason);
    }
}

/// Moves the robot to `proposal`'s room. On failure nothing changes and
/// the proposal stays open.
fn arrive(
    proposal: &Proposal,
    world: &mut GridWorld,
    kb: &KnowledgeBase,
    out: &mut dyn Write,
) -> Result<(), WorldError> {
    let trajectory = world.plan_path(&proposal.destination)?;
    world.execute(&trajectory)?;
    let room = &proposal.destination;
    let class = kb
        .physical_room(room.canonical())
        .map_or_else(|| "-".to_string(), |r| r.class_of.to_string());
    let _ = writeln!(
        out,
        "arrived at {room} ({class}) after {} moves",
        trajectory.len().saturating_sub(1)
    );
    Ok(())
}

/// Runs the loop until `q` or end of input.
pub fn run(
    kb: &KnowledgeBase,
    reasoner: &dyn Reasoner,
    world: &mut GridWorld,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> i32 {
    'request: loop {
        let _ = write!(out, "request> ");
        let _ = out.flush();
        let Some(request) = read_line(input) else {
            let _ = writeln!(out);
            return exit::OK;
        };
        if request.is_empty() {
            continue;
        }
        if request == "q" || request == "quit" {
            return exit::OK;
        }
        let mut session = match resolve(&request, kb, reasoner) {
            Ok(s) => s,
            Err(e) => {
                let _ = writeln!(out, "error: {e}");
                continue;
            }
        };
        loop {
            let proposal = match session.next_proposal() {
                Next::Proposal(p) => p,
                Next::Exhausted => {
                    exhausted(&session, out);
                    continue 'request;
                }
            };
            show(&proposal, out);
            loop {
                match ask(input, out) {
                    None | Some(Verdict::Quit) => return exit::OK,
                    Some(Verdict::Accept) => match arrive(&proposal, world, kb, out) {
                        Ok(()) => {
                            session.accept(proposal.ordinal).expect("just emitted");
                            continue 'request;
                        }
                        Err(e) => {
                            let _ = writeln!(out, "cannot move: {e}");
                        }
                    },
                    Some(Verdict::Reject) => {
                        session.reject(proposal.ordinal).expect("just emitted");
                        break;
                    }
                }
            }
        }
    }
}
