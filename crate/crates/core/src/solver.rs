//! External SAT solver calls and the exact width search built on them.

use std::io::{Read, Seek, Write};
use std::process::{Command, Stdio};
use std::time::Duration;

use wait_timeout::ChildExt;

use crate::bounds::greedy_sequence;
use crate::cnf::{serialize_dimacs, Formula};
use crate::encoder::{decode, encode};
use crate::error::{EncodeError, SolverError};
use crate::sequence::{verify, ContractionSequence};
use crate::trigraph::SignedTrigraph;

/// Environment variable holding the default solver command.
pub const SOLVER_ENV: &str = "STWW_SAT_SOLVER";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    /// `model[v - 1]` is the value of variable `v`
    Sat(Vec<bool>),
    Unsat,
    Timeout,
}

pub trait SatSolver {
    fn solve(&self, cnf: &Formula) -> Result<SolveOutcome, SolverError>;
}

/// A solver run as `command… <file.cnf>` that prints SAT-competition
/// output (`s SATISFIABLE`, `v` lines).
#[derive(Clone, Debug)]
pub struct ExternalSolver {
    pub command: Vec<String>,
    pub timeout: Option<Duration>,
}

impl ExternalSolver {
    pub fn new(command: &str, timeout: Option<Duration>) -> Result<Self, SolverError> {
        let command: Vec<String> = command.split_whitespace().map(String::from).collect();
        if command.is_empty() {
            return Err(SolverError::EmptyCommand);
        }
        Ok(ExternalSolver { command, timeout })
    }

    /// From [`SOLVER_ENV`], if set and non-empty.
    pub fn from_env(timeout: Option<Duration>) -> Option<Self> {
        let cmd = std::env::var(SOLVER_ENV).ok()?;
        ExternalSolver::new(&cmd, timeout).ok()
    }

    /// Whether the command can be started at all.
    pub fn is_available(&self) -> bool {
        Command::new(&self.command[0])
            .args(&self.command[1..])
            .arg("--help")
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .is_ok()
    }
}

impl SatSolver for ExternalSolver {
    fn solve(&self, cnf: &Formula) -> Result<SolveOutcome, SolverError> {
        let display = self.command.join(" ");
        let mut input = tempfile::Builder::new().suffix(".cnf").tempfile()?;
        input.write_all(serialize_dimacs(cnf, None).as_bytes())?;
        input.flush()?;
        let mut output = tempfile::tempfile()?;
        let mut child = Command::new(&self.command[0])
            .args(&self.command[1..])
            .arg(input.path())
            .stdin(Stdio::null())
            .stdout(output.try_clone()?)
            .stderr(Stdio::null())
            .spawn()
            .map_err(|source| SolverError::Spawn {
                command: display.clone(),
                source,
            })?;
        let status = match self.timeout {
            Some(t) => match child.wait_timeout(t)? {
                Some(s) => s,
                None => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Ok(SolveOutcome::Timeout);
                }
            },
            None => child.wait()?,
        };
        let mut text = String::new();
        output.rewind()?;
        output.read_to_string(&mut text)?;
        parse_solver_output(&text, cnf.num_vars()).map_err(|detail| SolverError::Crashed {
            command: display,
            detail: format!("{detail} (exit status {status})"),
        })
    }
}

/// Parses SAT-competition solver output.
pub fn parse_solver_output(text: &str, num_vars: usize) -> Result<SolveOutcome, String> {
    let mut status = None;
    let mut model = vec![false; num_vars];
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("s ") {
            status = Some(match rest.trim() {
                "SATISFIABLE" => true,
                "UNSATISFIABLE" => false,
                "UNKNOWN" => return Ok(SolveOutcome::Timeout),
                other => return Err(format!("unknown status `{other}`")),
            });
        } else if let Some(rest) = line.strip_prefix("v ") {
            for tok in rest.split_whitespace() {
                let lit: i64 = tok.parse().map_err(|_| format!("bad model literal `{tok}`"))?;
                let v = lit.unsigned_abs() as usize;
                if v > 0 && v <= num_vars {
                    model[v - 1] = lit > 0;
                }
            }
        }
    }
    match status {
        Some(true) => Ok(SolveOutcome::Sat(model)),
        Some(false) => Ok(SolveOutcome::Unsat),
        None => Err("no `s` status line".into()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactResult {
    pub width: usize,
    pub seq: ContractionSequence,
    /// false when a timeout left `width` as an upper bound only
    pub exact: bool,
}

/// Minimum bipartite width: starts from the greedy bound and asks the
/// solver for width `d - 1` until it answers unsatisfiable.
pub fn exact_tww_via_solver(graph: &SignedTrigraph, solver: &dyn SatSolver) -> Result<ExactResult, EncodeError> {
    let mut seq = greedy_sequence(graph, true);
    let mut width = verify(graph, &seq, true).width;
    while width > 0 {
        let artifact = encode(graph, width - 1)?;
        match solver.solve(&artifact.cnf)? {
            SolveOutcome::Sat(model) => {
                seq = decode(&artifact, &model)?;
                width = verify(graph, &seq, true).width;
            }
            SolveOutcome::Unsat => break,
            SolveOutcome::Timeout => return Ok(ExactResult { width, seq, exact: false }),
        }
    }
    Ok(ExactResult { width, seq, exact: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_competition_output() {
        let out = "c hello\ns SATISFIABLE\nv 1 -2\nv 3 0\n";
        assert_eq!(parse_solver_output(out, 3), Ok(SolveOutcome::Sat(vec![true, false, true])));
        assert_eq!(parse_solver_output("s UNSATISFIABLE\n", 3), Ok(SolveOutcome::Unsat));
        assert!(parse_solver_output("garbage", 3).is_err());
    }

    #[test]
    fn missing_solver_is_an_error() {
        let s = ExternalSolver::new("/nonexistent/solver", None).unwrap();
        let f = Formula::new(1, vec![vec![crate::cnf::Lit::pos(1)]]);
        assert!(matches!(s.solve(&f), Err(SolverError::Spawn { .. })));
        assert!(ExternalSolver::new("  ", None).is_err());
    }
}
