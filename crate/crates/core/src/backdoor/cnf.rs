//! CNF formulas and DIMACS text.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: u32,
    pub clauses: Vec<Vec<i32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct DimacsError {
    pub line: usize,
    pub msg: String,
}

/// Target class of a backdoor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseClass {
    /// At most one positive literal per clause.
    Horn,
    /// At most two literals per clause.
    TwoCnf,
}

impl BaseClass {
    pub fn admits(self, clause: &[i32]) -> bool {
        match self {
            BaseClass::Horn => clause.iter().filter(|&&l| l > 0).count() <= 1,
            BaseClass::TwoCnf => clause.len() <= 2,
        }
    }
}

impl CnfFormula {
    pub fn new(num_vars: u32, clauses: Vec<Vec<i32>>) -> Self {
        CnfFormula { num_vars, clauses }
    }

    /// Removes repeated literals and drops tautological clauses.
    pub fn normalized(&self) -> CnfFormula {
        let clauses = self
            .clauses
            .iter()
            .filter_map(|c| {
                let mut c = c.clone();
                c.sort_unstable_by_key(|l| (l.unsigned_abs(), *l));
                c.dedup();
                let taut = c.windows(2).any(|w| w[0] == -w[1]);
                (!taut).then_some(c)
            })
            .collect();
        CnfFormula { num_vars: self.num_vars, clauses }
    }

    /// Distinct variables of a clause, ascending.
    pub fn clause_vars(clause: &[i32]) -> Vec<u32> {
        let mut vs: Vec<u32> = clause.iter().map(|l| l.unsigned_abs()).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    /// The formula under a partial assignment: satisfied clauses vanish and
    /// false literals are deleted. `value(v)` is `None` for unassigned `v`.
    pub fn reduct(&self, value: impl Fn(u32) -> Option<bool>) -> CnfFormula {
        let mut out = Vec::with_capacity(self.clauses.len());
        'clauses: for c in &self.clauses {
            let mut rest = Vec::with_capacity(c.len());
            for &l in c {
                match value(l.unsigned_abs()) {
                    Some(b) if b == (l > 0) => continue 'clauses,
                    Some(_) => {}
                    None => rest.push(l),
                }
            }
            out.push(rest);
        }
        CnfFormula { num_vars: self.num_vars, clauses: out }
    }

    pub fn in_class(&self, class: BaseClass) -> bool {
        self.clauses.iter().all(|c| class.admits(c))
    }

    pub fn to_dimacs(&self, comments: &[String]) -> String {
        let mut s = String::new();
        for c in comments {
            let _ = writeln!(s, "c {c}");
        }
        let _ = writeln!(s, "p cnf {} {}", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let _ = write!(s, "{l} ");
            }
            s.push_str("0\n");
        }
        s
    }
}

pub fn parse_dimacs(text: &str) -> Result<CnfFormula, DimacsError> {
    let err = |line: usize, msg: String| DimacsError { line, msg };
    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut cur: Vec<i32> = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        last_line = ln;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(err(ln, "second header".into()));
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 || f[0] != "p" || f[1] != "cnf" {
                return Err(err(ln, format!("bad header `{line}`")));
            }
            let v = f[2].parse::<u32>().map_err(|_| err(ln, format!("bad variable count `{}`", f[2])))?;
            let c = f[3].parse::<usize>().map_err(|_| err(ln, format!("bad clause count `{}`", f[3])))?;
            header = Some((v, c));
            continue;
        }
        let Some((nv, _)) = header else {
            return Err(err(ln, "clause before header".into()));
        };
        for tok in line.split_whitespace() {
            let l: i32 = tok.parse().map_err(|_| err(ln, format!("bad literal `{tok}`")))?;
            if l == 0 {
                clauses.push(std::mem::take(&mut cur));
            } else if l.unsigned_abs() > nv {
                return Err(err(ln, format!("literal {l} exceeds {nv} variables")));
            } else {
                cur.push(l);
            }
        }
    }
    let Some((nv, nc)) = header else {
        return Err(err(last_line.max(1), "missing `p cnf` header".into()));
    };
    if !cur.is_empty() {
        return Err(err(last_line, "last clause is not terminated by 0".into()));
    }
    if clauses.len() != nc {
        return Err(err(last_line, format!("header promises {nc} clauses, found {}", clauses.len())));
    }
    Ok(CnfFormula { num_vars: nv, clauses })
}
