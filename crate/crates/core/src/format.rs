//! Plain-text problem files.
//!
//! ```text
//! # comment
//! qubo 3 max
//! 0 0 1.5
//! 0 2 -2
//! ```
//!
//! The header is `ising N` or `qubo N [min|max]`. Each following line is
//! `i j value` with 0-based `i ≤ j`, one line per unordered pair; the loader
//! mirrors it into the symmetric matrix. Ising files may also carry a single
//! `offset value` line. Everything after `#` is ignored.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::problem::{Direction, IsingProblem, Problem, QuboProblem};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

enum Header {
    Ising(usize),
    Qubo(usize, Direction),
}

fn parse_header(line_no: usize, tokens: &[&str]) -> Result<Header> {
    let n = |tok: Option<&&str>| -> Result<usize> {
        let tok = tok.ok_or_else(|| parse_err(line_no, "header is missing the variable count"))?;
        let n: usize = tok
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad variable count `{tok}`")))?;
        if n == 0 {
            return Err(parse_err(line_no, "variable count must be positive"));
        }
        Ok(n)
    };
    match tokens.first().copied() {
        Some("ising") => {
            if tokens.len() > 2 {
                return Err(parse_err(line_no, "unexpected tokens after `ising N`"));
            }
            Ok(Header::Ising(n(tokens.get(1))?))
        }
        Some("qubo") => {
            let direction = match tokens.get(2).copied() {
                None | Some("min") => Direction::Minimize,
                Some("max") => Direction::Maximize,
                Some(other) => {
                    return Err(parse_err(line_no, format!("unknown direction `{other}`")))
                }
            };
            if tokens.len() > 3 {
                return Err(parse_err(line_no, "unexpected tokens after `qubo N dir`"));
            }
            Ok(Header::Qubo(n(tokens.get(1))?, direction))
        }
        Some(other) => Err(parse_err(
            line_no,
            format!("expected `ising` or `qubo` header, found `{other}`"),
        )),
        None => unreachable!("blank lines are skipped"),
    }
}

pub fn parse_problem(text: &str) -> Result<Problem> {
    let mut header = None;
    let mut pairs = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut offset = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some(h) = &header else {
            header = Some(parse_header(line_no, &tokens)?);
            continue;
        };
        let n = match h {
            Header::Ising(n) | Header::Qubo(n, _) => *n,
        };

        if tokens[0] == "offset" {
            if !matches!(h, Header::Ising(_)) {
                return Err(parse_err(line_no, "offset is only allowed in ising files"));
            }
            if tokens.len() != 2 || offset.is_some() {
                return Err(parse_err(line_no, "expected a single `offset value` line"));
            }
            let v: f64 = tokens[1]
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad offset `{}`", tokens[1])))?;
            offset = Some(v);
            continue;
        }

        if tokens.len() != 3 {
            return Err(parse_err(line_no, "expected `i j value`"));
        }
        let index = |tok: &str| -> Result<usize> {
            let i: usize = tok
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad index `{tok}`")))?;
            if i >= n {
                return Err(parse_err(line_no, format!("index {i} out of range for n = {n}")));
            }
            Ok(i)
        };
        let i = index(tokens[0])?;
        let j = index(tokens[1])?;
        if i > j {
            return Err(parse_err(line_no, format!("entries must have i <= j, found {i} > {j}")));
        }
        if i == j && matches!(h, Header::Ising(_)) {
            return Err(parse_err(line_no, "ising couplings must have a zero diagonal"));
        }
        let v: f64 = tokens[2]
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad value `{}`", tokens[2])))?;
        if !v.is_finite() {
            return Err(parse_err(line_no, "value is not finite"));
        }
        if !seen.insert((i, j)) {
            return Err(parse_err(line_no, format!("duplicate pair ({i}, {j})")));
        }
        pairs.push((i, j, v));
    }

    match header {
        None => Err(parse_err(0, "missing header")),
        Some(Header::Ising(n)) => Ok(Problem::Ising(IsingProblem::from_pairs(
            n,
            pairs,
            offset.unwrap_or(0.0),
        )?)),
        Some(Header::Qubo(n, direction)) => {
            Ok(Problem::Qubo(QuboProblem::from_pairs(n, pairs, direction)?))
        }
    }
}

pub fn write_problem(p: &Problem) -> String {
    let mut out = String::new();
    match p {
        Problem::Ising(p) => {
            let _ = writeln!(out, "ising {}", p.n());
            if p.offset() != 0.0 {
                let _ = writeln!(out, "offset {}", p.offset());
            }
            for (i, j, v) in p.pairs() {
                let _ = writeln!(out, "{i} {j} {v}");
            }
        }
        Problem::Qubo(p) => {
            let dir = match p.direction() {
                Direction::Minimize => "min",
                Direction::Maximize => "max",
            };
            let _ = writeln!(out, "qubo {} {dir}", p.n());
            for (i, j, v) in p.pairs() {
                let _ = writeln!(out, "{i} {j} {v}");
            }
        }
    }
    out
}

pub fn read_problem(path: impl AsRef<std::path::Path>) -> Result<Problem> {
    parse_problem(&std::fs::read_to_string(path)?)
}
