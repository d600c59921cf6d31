//! Consistency checking: greedy for hole-free instances, brute force, the
//! bounded search tree on kernels, and lifting kernel solutions back.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::domain::{Instance, Role, Solution, Span, Value};
use crate::exec::Exec;
use crate::kernel::{self, Kernel, KernelStatus};
use crate::reduce::{Engine, Event, ReductionLog, RuleSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("greedy needs an instance without holes, got {0}")]
    HasHoles(usize),
    #[error("kernel solution could not be lifted: {0}")]
    Lift(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub consistent: bool,
    pub solution: Option<Solution>,
}

impl Verdict {
    fn yes(s: Solution) -> Self {
        Verdict { consistent: true, solution: Some(s) }
    }

    fn no() -> Self {
        Verdict { consistent: false, solution: None }
    }
}

/// `true` when `s` fits the budget, lies in `D`, and meets every domain.
pub fn validate_solution(inst: &Instance, s: &Solution) -> bool {
    if s.len() as i64 > inst.budget() {
        return false;
    }
    let mut ranks = Vec::with_capacity(s.len());
    for v in s.iter() {
        match inst.rank_of(v) {
            Some(r) => ranks.push(r),
            None => return false,
        }
    }
    ranks.sort_unstable();
    inst.vars().iter().all(|var| {
        var.spans().iter().any(|sp| {
            let i = ranks.partition_point(|&r| r < sp.left);
            i < ranks.len() && ranks[i] <= sp.right
        })
    })
}

/// Right endpoints chosen by the classic greedy over single-interval domains.
fn greedy_points(spans: impl Iterator<Item = Span>) -> Vec<usize> {
    let mut sorted: Vec<Span> = spans.collect();
    sorted.sort_unstable_by_key(|s| (s.right, s.left));
    let mut picks: Vec<usize> = Vec::new();
    for s in sorted {
        if picks.last().is_none_or(|&p| p < s.left) {
            picks.push(s.right);
        }
    }
    picks
}

/// Minimum hitting set for an instance with no holes.
pub fn greedy_intervals(inst: &Instance) -> Result<Verdict, SolveError> {
    let k = inst.holes();
    if k > 0 {
        return Err(SolveError::HasHoles(k));
    }
    let picks = greedy_points(inst.vars().iter().map(|v| v.spans()[0]));
    if picks.len() as i64 <= inst.budget() {
        Ok(Verdict::yes(picks.into_iter().map(|r| inst.value(r)).collect()))
    } else {
        Ok(Verdict::no())
    }
}

/// Tries every choice of one interval per variable and runs the greedy on it.
/// Returns a minimum witness when consistent.
pub fn brute_force_consistency(inst: &Instance) -> Verdict {
    brute_force_with(inst, Exec::default())
}

pub fn brute_force_with(inst: &Instance, exec: Exec) -> Verdict {
    let (size, picks) = min_hitting_set_by_choice(inst, exec);
    if size as i64 <= inst.budget() {
        Verdict::yes(picks.into_iter().map(|r| inst.value(r)).collect())
    } else {
        Verdict::no()
    }
}

fn min_hitting_set_by_choice(inst: &Instance, exec: Exec) -> (usize, Vec<usize>) {
    let vars = inst.vars();
    if vars.is_empty() {
        return (0, Vec::new());
    }
    let radix: Vec<u64> = vars.iter().map(|v| v.spans().len() as u64).collect();
    let total: u64 = radix.iter().product();
    // All intervals once, sorted by right end; each choice filters this list.
    let mut all: Vec<(Span, usize, usize)> = Vec::new();
    for (x, v) in vars.iter().enumerate() {
        for (j, &s) in v.spans().iter().enumerate() {
            all.push((s, x, j));
        }
    }
    all.sort_unstable_by_key(|&(s, x, _)| (s.right, s.left, x));
    let count = |code: u64, choice: &mut Vec<usize>, bound: usize| -> usize {
        let mut c = code;
        for (x, &r) in radix.iter().enumerate() {
            choice[x] = (c % r) as usize;
            c /= r;
        }
        let mut last: Option<usize> = None;
        let mut n = 0;
        for &(s, x, j) in &all {
            if choice[x] == j && last.is_none_or(|p| p < s.left) {
                last = Some(s.right);
                n += 1;
                if n >= bound {
                    return n;
                }
            }
        }
        n
    };
    let chunk = 1u64 << 12;
    let chunks: Vec<(u64, u64)> =
        (0..total.div_ceil(chunk)).map(|c| (c * chunk, ((c + 1) * chunk).min(total))).collect();
    let best = exec
        .map(&chunks, |&(lo, hi)| {
            let mut choice = vec![0usize; radix.len()];
            let mut best = (usize::MAX, lo);
            for code in lo..hi {
                let n = count(code, &mut choice, best.0);
                if n < best.0 {
                    best = (n, code);
                }
            }
            best
        })
        .into_iter()
        .min()
        .expect("at least one chunk");
    let mut choice = vec![0usize; radix.len()];
    let mut c = best.1;
    for (x, &r) in radix.iter().enumerate() {
        choice[x] = (c % r) as usize;
        c /= r;
    }
    let picks = greedy_points(vars.iter().zip(&choice).map(|(v, &j)| v.spans()[j]));
    (picks.len(), picks)
}

/// Checks every set of `min(N, |D|)` values. Since hitting is monotone this
/// decides consistency. Needs `|D| <= 63`.
pub fn subset_oracle(inst: &Instance) -> bool {
    let m = inst.num_values();
    assert!(m <= 63, "subset oracle supports at most 63 values");
    if inst.vars().is_empty() {
        return true;
    }
    let masks: Vec<u64> = inst
        .vars()
        .iter()
        .map(|v| v.spans().iter().fold(0u64, |acc, s| acc | span_mask(s)))
        .collect();
    let size = (inst.budget() as usize).min(m);
    if size == 0 {
        return false;
    }
    let hits = |set: u64| masks.iter().all(|&mk| mk & set != 0);
    let mut set: u64 = (1u64 << size) - 1;
    let limit = 1u64 << m;
    while set < limit {
        if hits(set) {
            return true;
        }
        let c = set & set.wrapping_neg();
        let r = set + c;
        set = (((r ^ set) >> 2) / c) | r;
    }
    false
}

fn span_mask(s: &Span) -> u64 {
    let hi = if s.right + 1 >= 64 { u64::MAX } else { (1u64 << (s.right + 1)) - 1 };
    hi & !((1u64 << s.left) - 1)
}

/// Bound on search tree leaves for `k` holes: `T(0) = T(1) = 1`,
/// `T(k) = T(k-1) + T(k-2)`.
pub fn leaf_bound(k: usize) -> u64 {
    let (mut a, mut b) = (1u64, 1u64);
    for _ in 1..k {
        let c = a + b;
        a = b;
        b = c;
    }
    b
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TreeStats {
    pub nodes: u64,
    pub leaves: u64,
    pub max_depth: usize,
    /// Nodes where both children kept `k - 1` holes but started differently.
    pub fallbacks: u64,
    /// Holes of the instance the search started from.
    pub root_holes: usize,
}

enum Child {
    Solved(Vec<Value>),
    Failed,
    Open { inst: Instance, selected: Vec<Value> },
}

fn child_after(inst: &Instance, op: impl FnOnce(&mut Engine)) -> Child {
    let mut e = Engine::new(inst, RuleSet::DOM_UNIT);
    op(&mut e);
    e.run();
    if e.is_infeasible() {
        return Child::Failed;
    }
    let selected = e.selected().to_vec();
    let out = e.finish();
    match out.outcome.instance() {
        Some(i) if i.is_empty() => Child::Solved(selected),
        Some(i) => Child::Open { inst: i.clone(), selected },
        None => Child::Failed,
    }
}

/// Bounded search tree over the leftmost interval.
///
/// The instance should be reduced (a kernel or hole-free); Red-Dom and
/// Red-Unit are applied first anyway.
pub fn branch_consistency(inst: &Instance) -> (Verdict, TreeStats) {
    let mut stats = TreeStats { root_holes: inst.holes(), ..Default::default() };
    let root = child_after(inst, |_| {});
    let found = match root {
        Child::Solved(sel) => {
            stats.nodes = 1;
            stats.leaves = 1;
            Some(sel)
        }
        Child::Failed => {
            stats.nodes = 1;
            stats.leaves = 1;
            None
        }
        Child::Open { inst: reduced, selected } => {
            node(&reduced, 0, &mut stats).map(|mut s| {
                s.extend(selected);
                s
            })
        }
    };
    match found {
        Some(vals) => (Verdict::yes(vals.into_iter().collect()), stats),
        None => (Verdict::no(), stats),
    }
}

fn node(inst: &Instance, depth: usize, stats: &mut TreeStats) -> Option<Vec<Value>> {
    stats.nodes += 1;
    stats.max_depth = stats.max_depth.max(depth);
    if inst.is_empty() {
        stats.leaves += 1;
        return Some(Vec::new());
    }
    if inst.budget() == 0 {
        stats.leaves += 1;
        return None;
    }
    let k = inst.holes();
    if k == 0 {
        stats.leaves += 1;
        let v = greedy_intervals(inst).expect("no holes");
        return v.solution.map(|s| s.iter().collect());
    }
    let first = inst.canonical_order()[0];
    if first.role == Role::Required || first.span.left != first.span.right {
        // Not reduced; this does not happen after Red-Dom and Red-Unit.
        stats.leaves += 1;
        return brute_force_with(inst, Exec::Sequential).solution.map(|s| s.iter().collect());
    }
    let c1 = child_after(inst, |e| e.select_rank(first.span.right));
    let c2 = child_after(inst, |e| e.drop_interval_at(first.var, first.span.left));

    for c in [&c1, &c2] {
        if let Child::Solved(sel) = c {
            stats.leaves += 1;
            return Some(sel.clone());
        }
    }
    let descend = |c: &Child, stats: &mut TreeStats| -> Option<Vec<Value>> {
        let Child::Open { inst: ci, selected } = c else { return None };
        node(ci, depth + 1, stats).map(|mut s| {
            s.extend(selected.iter().copied());
            s
        })
    };
    match (&c1, &c2) {
        (Child::Failed, Child::Failed) => {
            stats.leaves += 1;
            None
        }
        (Child::Failed, open) | (open, Child::Failed) => descend(open, stats),
        (Child::Open { inst: i1, selected: s1 }, Child::Open { inst: i2, selected: s2 }) => {
            if i1.holes() + 1 == k && i2.holes() + 1 == k {
                let f1 = i1.canonical_order()[0];
                let f2 = i2.canonical_order()[0];
                let same = f1.var == f2.var
                    && i1.value(f1.span.left) == i2.value(f2.span.left)
                    && i1.value(f1.span.right) == i2.value(f2.span.right);
                if same {
                    let cut = inst.rank_of(i1.value(f1.span.right)).expect("child values come from parent");
                    let below = |sel: &[Value]| {
                        sel.iter().filter(|&&v| inst.rank_of(v).is_some_and(|r| r < cut)).count()
                    };
                    return if below(s1) <= below(s2) { descend(&c1, stats) } else { descend(&c2, stats) };
                }
                stats.fallbacks += 1;
            }
            descend(&c1, stats).or_else(|| descend(&c2, stats))
        }
        _ => unreachable!("solved children returned above"),
    }
}

/// Moves each value to the next right endpoint at or after it; values past
/// every right endpoint hit nothing and are dropped.
pub fn make_nice(inst: &Instance, s: &Solution) -> Solution {
    let rights: BTreeSet<usize> = inst.vars().iter().flat_map(|v| v.spans().iter().map(|sp| sp.right)).collect();
    s.iter()
        .filter_map(|v| inst.rank_of(v))
        .filter_map(|r| rights.range(r..).next().copied())
        .map(|r| inst.value(r))
        .collect()
}

/// Lifts a solution of a kernel to the instance the log started from.
pub fn reconstruct(kernel_solution: &Solution, log: &ReductionLog, original: &Instance) -> Result<Solution, SolveError> {
    let rank = |v: Value| original.rank_of(v).ok_or_else(|| SolveError::Lift(format!("value {v} not in D")));
    let mut s = kernel_solution.clone();
    for e in log.events().iter().rev() {
        match e {
            Event::Select(v) => {
                s.insert(*v);
            }
            Event::Discard { value, gained_right_end: Some(p) } => {
                if s.remove(*p) {
                    s.insert(*value);
                }
            }
            Event::Discard { gained_right_end: None, .. } | Event::RemoveVariable(_) => {}
            Event::Merge(pairs) => {
                let hits = |s: &Solution, (l, r): (Value, Value)| -> Result<bool, SolveError> {
                    let (l, r) = (rank(l)?, rank(r)?);
                    for v in s.iter() {
                        let x = rank(v)?;
                        if l <= x && x <= r {
                            return Ok(true);
                        }
                    }
                    Ok(false)
                };
                let covers = |s: &Solution| -> Result<bool, SolveError> {
                    for p in pairs {
                        if !hits(s, p.second_last_span)? || !hits(s, p.last_span)? {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                };
                let mut cands: Vec<Value> = Vec::new();
                // The prescribed choice: the smallest merged right end in S, then
                // the smallest right end of a partner of that last follower.
                let mut ends: Vec<(usize, Value)> = Vec::new();
                for p in pairs {
                    if s.contains(p.last_span.1) {
                        ends.push((rank(p.last_span.1)?, p.last_span.1));
                    }
                }
                if let Some(&(_, t1)) = ends.iter().min() {
                    let mut partners: Vec<(usize, Value)> = Vec::new();
                    for p in pairs.iter().filter(|p| p.last_span.1 == t1) {
                        partners.push((rank(p.second_last_span.1)?, p.second_last_span.1));
                    }
                    if let Some(&(_, t2)) = partners.iter().min() {
                        cands.push(t2);
                    }
                }
                for p in pairs {
                    cands.push(p.second_last_span.1);
                    cands.push(p.last_span.1);
                }
                let mut lifted = None;
                for t in cands {
                    let mut trial = s.clone();
                    trial.insert(t);
                    if covers(&trial)? {
                        lifted = Some(trial);
                        break;
                    }
                }
                s = lifted.ok_or_else(|| SolveError::Lift("no single value repairs a merge".into()))?;
            }
        }
    }
    if validate_solution(original, &s) {
        Ok(s)
    } else {
        Err(SolveError::Lift(format!("lifted set {{{s}}} is not a solution")))
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub verdict: Verdict,
    pub kernel: Kernel,
    pub tree: TreeStats,
}

/// Kernelize, search the kernel, and lift the answer.
pub fn solve(inst: &Instance) -> Result<SolveReport, SolveError> {
    let kernel = kernel::kernelize(inst);
    if kernel.status == KernelStatus::Infeasible {
        return Ok(SolveReport { verdict: Verdict::no(), kernel, tree: TreeStats::default() });
    }
    let (v, tree) = branch_consistency(&kernel.instance);
    let verdict = match v.solution {
        Some(sol) => {
            let nice = make_nice(&kernel.instance, &sol);
            Verdict::yes(reconstruct(&nice, &kernel.log, inst)?)
        }
        None => Verdict::no(),
    };
    Ok(SolveReport { verdict, kernel, tree })
}

/// Whether the instance is consistent; shorthand over [`solve`].
pub fn is_consistent(inst: &Instance) -> bool {
    solve(inst).map(|r| r.verdict.consistent).unwrap_or_else(|e| panic!("{e}"))
}

/// Smallest number of values that meet every domain.
pub fn min_values(inst: &Instance) -> usize {
    let (mut lo, mut hi) = (0usize, inst.num_vars());
    while lo < hi {
        let mid = (lo + hi) / 2;
        let probe = inst.with_budget(mid as i64).expect("non-negative");
        if is_consistent(&probe) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}
