//! The `amnv` text format.
//!
//! ```text
//! c comment
//! p amnv <n> <m> <N>
//! v <m values, in D order>
//! x <id> <l r> [<l r> ...]
//! ```

use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::domain::{Instance, InstanceError, Value, VarId};
use crate::kernel::Kernel;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("expected `p amnv <n> <m> <N>` header")]
    MissingHeader,
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("negative budget {0}")]
    NegativeBudget(i64),
    #[error("expected `v` line with {0} values")]
    MissingValues(usize),
    #[error("`v` line lists {got} values, header says {want}")]
    ValueCount { got: usize, want: usize },
    #[error("D is not an ordered set: {0} repeats")]
    UnorderedValues(i64),
    #[error("bad integer `{0}`")]
    BadInteger(String),
    #[error("variable line needs an id and endpoint pairs")]
    BadVariable,
    #[error("odd number of endpoints")]
    OddEndpoints,
    #[error("{0}")]
    Instance(InstanceError),
    #[error("{got} variable lines, header says {want}")]
    VariableCount { got: usize, want: usize },
    #[error("unexpected line `{0}`")]
    Unexpected(String),
}

fn int<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T, ParseError> {
    tok.parse().map_err(|_| ParseError { line, kind: ParseErrorKind::BadInteger(tok.to_string()) })
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let at = |line: usize, kind: ParseErrorKind| ParseError { line, kind };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !(l.starts_with('c') && (l.len() == 1 || l.as_bytes()[1] == b' ')));

    let (hl, header) = lines.next().ok_or(at(1, ParseErrorKind::MissingHeader))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.first() != Some(&"p") || h.get(1) != Some(&"amnv") {
        return Err(at(hl, ParseErrorKind::MissingHeader));
    }
    if h.len() != 5 {
        return Err(at(hl, ParseErrorKind::BadHeader(header.to_string())));
    }
    let n: usize = int(h[2], hl)?;
    let m: usize = int(h[3], hl)?;
    let budget: i64 = int(h[4], hl)?;
    if budget < 0 {
        return Err(at(hl, ParseErrorKind::NegativeBudget(budget)));
    }

    let (vl, vline) = lines.next().ok_or(at(hl, ParseErrorKind::MissingValues(m)))?;
    let mut toks = vline.split_whitespace();
    if toks.next() != Some("v") {
        return Err(at(vl, ParseErrorKind::MissingValues(m)));
    }
    let values: Vec<Value> = toks.map(|t| int::<i64>(t, vl).map(Value)).collect::<Result<_, _>>()?;
    if values.len() != m {
        return Err(at(vl, ParseErrorKind::ValueCount { got: values.len(), want: m }));
    }
    let mut seen = HashSet::with_capacity(m);
    for v in &values {
        if !seen.insert(*v) {
            return Err(at(vl, ParseErrorKind::UnorderedValues(v.0)));
        }
    }

    let mut vars = Vec::with_capacity(n);
    let mut ids = HashSet::with_capacity(n);
    let mut last = vl;
    for (ln, line) in lines {
        last = ln;
        let mut toks = line.split_whitespace();
        if toks.next() != Some("x") {
            return Err(at(ln, ParseErrorKind::Unexpected(line.to_string())));
        }
        let id: u32 = int(toks.next().ok_or(at(ln, ParseErrorKind::BadVariable))?, ln)?;
        let ends: Vec<i64> = toks.map(|t| int(t, ln)).collect::<Result<_, _>>()?;
        if ends.is_empty() {
            return Err(at(ln, ParseErrorKind::BadVariable));
        }
        if ends.len() % 2 == 1 {
            return Err(at(ln, ParseErrorKind::OddEndpoints));
        }
        if !ids.insert(id) {
            return Err(at(ln, ParseErrorKind::Instance(InstanceError::DuplicateVariable(VarId(id)))));
        }
        let pieces: Vec<(Value, Value)> = ends.chunks(2).map(|p| (Value(p[0]), Value(p[1]))).collect();
        // Validate this line on its own so errors point at it.
        Instance::from_pieces(values.clone(), vec![(VarId(id), pieces.clone())], 0)
            .map_err(|e| at(ln, ParseErrorKind::Instance(e)))?;
        vars.push((VarId(id), pieces));
    }
    if vars.len() != n {
        return Err(at(last, ParseErrorKind::VariableCount { got: vars.len(), want: n }));
    }
    Instance::from_pieces(values, vars, budget).map_err(|e| at(last, ParseErrorKind::Instance(e)))
}

/// Canonical text for an instance, with optional leading comment lines.
pub fn write_instance(inst: &Instance, comments: &[String]) -> String {
    let mut s = String::new();
    for c in comments {
        let _ = writeln!(s, "c {c}");
    }
    let _ = writeln!(s, "p amnv {} {} {}", inst.num_vars(), inst.num_values(), inst.budget());
    s.push('v');
    for v in inst.values() {
        let _ = write!(s, " {v}");
    }
    s.push('\n');
    for var in inst.vars() {
        let _ = write!(s, "x {}", var.id());
        for sp in var.spans() {
            let _ = write!(s, " {} {}", inst.value(sp.left), inst.value(sp.right));
        }
        s.push('\n');
    }
    s
}

/// A kernel file: summary and log as comments, then the kernel instance.
pub fn write_kernel(kernel: &Kernel) -> String {
    let mut comments = vec![
        format!("status {:?}", kernel.status),
        format!("holes {} (input {})", kernel.holes(), kernel.input_holes),
        format!("certificate {}", kernel.certificate),
    ];
    comments.extend(kernel.log.lines());
    write_instance(&kernel.instance, &comments)
}
