//! Instances of AtMost-NValue in succinct interval form.
//!
//! Values live in an ordered list `D`; every variable domain is stored as its
//! maximal hole-free runs ("intervals") over that order, given as ranks.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value(pub i64);

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Inclusive rank range into the instance's value list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub left: usize,
    pub right: usize,
}

impl Span {
    pub fn new(left: usize, right: usize) -> Self {
        debug_assert!(left <= right);
        Span { left, right }
    }

    pub fn contains(&self, rank: usize) -> bool {
        self.left <= rank && rank <= self.right
    }

    pub fn intersects(&self, other: &Span) -> bool {
        self.left <= other.right && other.left <= self.right
    }

    pub fn is_subset_of(&self, other: &Span) -> bool {
        other.left <= self.left && self.right <= other.right
    }

    pub fn len(&self) -> usize {
        self.right - self.left + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// The variable has exactly one interval.
    Required,
    Optional,
}

/// One interval together with its owner, as produced by [`Instance::canonical_order`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub var: VarId,
    pub span: Span,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    id: VarId,
    spans: Vec<Span>,
}

impl Variable {
    pub fn id(&self) -> VarId {
        self.id
    }

    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    pub fn holes(&self) -> usize {
        self.spans.len() - 1
    }

    pub fn contains(&self, rank: usize) -> bool {
        self.spans.iter().any(|s| s.contains(rank))
    }

    pub fn role(&self) -> Role {
        if self.spans.len() == 1 {
            Role::Required
        } else {
            Role::Optional
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("value {0} appears twice in D")]
    DuplicateValue(Value),
    #[error("value {value} of variable {var} is not in D")]
    UnknownValue { var: VarId, value: Value },
    #[error("variable {0} has an empty domain")]
    EmptyDomain(VarId),
    #[error("variable {0} is declared twice")]
    DuplicateVariable(VarId),
    #[error("interval [{left}, {right}] of variable {var} ends before it starts")]
    ReversedInterval { var: VarId, left: Value, right: Value },
    #[error("budget {0} is negative")]
    NegativeBudget(i64),
}

/// Knobs for [`normalize`] when `D` has to be derived from the domains.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NormalizeOptions {
    /// Keep every value that occurs in some domain, not only run endpoints.
    pub keep_interior: bool,
}

/// An AtMost-NValue instance `(X, D, dom, N)`.
#[derive(Debug, Clone)]
pub struct Instance {
    values: Vec<Value>,
    index: HashMap<Value, usize>,
    vars: Vec<Variable>,
    budget: i64,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values && self.vars == other.vars && self.budget == other.budget
    }
}

impl Eq for Instance {}

fn index_values(values: &[Value]) -> Result<HashMap<Value, usize>, InstanceError> {
    let mut index = HashMap::with_capacity(values.len());
    for (rank, &v) in values.iter().enumerate() {
        if index.insert(v, rank).is_some() {
            return Err(InstanceError::DuplicateValue(v));
        }
    }
    Ok(index)
}

/// Sorts and merges rank ranges so that they become maximal runs.
fn merge_spans(mut spans: Vec<Span>) -> Vec<Span> {
    spans.sort_unstable();
    let mut out: Vec<Span> = Vec::with_capacity(spans.len());
    for s in spans {
        match out.last_mut() {
            Some(last) if s.left <= last.right + 1 => last.right = last.right.max(s.right),
            _ => out.push(s),
        }
    }
    out
}

fn runs_of_sorted_ranks(ranks: &[usize]) -> Vec<Span> {
    let mut out: Vec<Span> = Vec::new();
    for &r in ranks {
        match out.last_mut() {
            Some(last) if r == last.right + 1 => last.right = r,
            Some(last) if r == last.right => {}
            _ => out.push(Span::new(r, r)),
        }
    }
    out
}

impl Instance {
    /// Builds an instance from interval pieces given by their end values.
    ///
    /// Overlapping or touching pieces of one variable are merged, so the stored
    /// intervals are always maximal. Variables are kept sorted by id.
    pub fn from_pieces(
        values: Vec<Value>,
        vars: Vec<(VarId, Vec<(Value, Value)>)>,
        budget: i64,
    ) -> Result<Self, InstanceError> {
        let index = index_values(&values)?;
        let mut ranked = Vec::with_capacity(vars.len());
        for (id, pieces) in vars {
            let mut spans = Vec::with_capacity(pieces.len());
            for (l, r) in pieces {
                let rl = *index
                    .get(&l)
                    .ok_or(InstanceError::UnknownValue { var: id, value: l })?;
                let rr = *index
                    .get(&r)
                    .ok_or(InstanceError::UnknownValue { var: id, value: r })?;
                if rl > rr {
                    return Err(InstanceError::ReversedInterval { var: id, left: l, right: r });
                }
                spans.push(Span::new(rl, rr));
            }
            ranked.push((id, spans));
        }
        Self::assemble(values, index, ranked, budget)
    }

    /// Builds an instance from rank ranges; pieces are merged as in [`Instance::from_pieces`].
    pub fn from_spans(
        values: Vec<Value>,
        vars: Vec<(VarId, Vec<Span>)>,
        budget: i64,
    ) -> Result<Self, InstanceError> {
        let index = index_values(&values)?;
        Self::assemble(values, index, vars, budget)
    }

    fn assemble(
        values: Vec<Value>,
        index: HashMap<Value, usize>,
        vars: Vec<(VarId, Vec<Span>)>,
        budget: i64,
    ) -> Result<Self, InstanceError> {
        if budget < 0 {
            return Err(InstanceError::NegativeBudget(budget));
        }
        let mut out = Vec::with_capacity(vars.len());
        for (id, spans) in vars {
            if spans.is_empty() {
                return Err(InstanceError::EmptyDomain(id));
            }
            debug_assert!(spans.iter().all(|s| s.right < values.len()));
            out.push(Variable { id, spans: merge_spans(spans) });
        }
        out.sort_by_key(|v| v.id);
        for w in out.windows(2) {
            if w[0].id == w[1].id {
                return Err(InstanceError::DuplicateVariable(w[0].id));
            }
        }
        Ok(Instance { values, index, vars: out, budget })
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn value(&self, rank: usize) -> Value {
        self.values[rank]
    }

    pub fn rank_of(&self, value: Value) -> Option<usize> {
        self.index.get(&value).copied()
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> Option<&Variable> {
        self.vars
            .binary_search_by_key(&id, |v| v.id)
            .ok()
            .map(|i| &self.vars[i])
    }

    pub fn budget(&self) -> i64 {
        self.budget
    }

    pub fn with_budget(&self, budget: i64) -> Result<Instance, InstanceError> {
        if budget < 0 {
            return Err(InstanceError::NegativeBudget(budget));
        }
        let mut out = self.clone();
        out.budget = budget;
        Ok(out)
    }

    pub fn num_values(&self) -> usize {
        self.values.len()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_intervals(&self) -> usize {
        self.vars.iter().map(|v| v.spans.len()).sum()
    }

    /// Number of holes `k`: intervals minus variables.
    pub fn holes(&self) -> usize {
        count_holes(self)
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Intervals in variable order, then left to right.
    pub fn intervals(&self) -> impl Iterator<Item = Interval> + '_ {
        self.vars.iter().flat_map(|v| {
            let role = v.role();
            v.spans.iter().map(move |&span| Interval { var: v.id, span, role })
        })
    }

    /// All intervals sorted by `(right, left, var id)`.
    pub fn canonical_order(&self) -> Vec<Interval> {
        canonical_sort(self)
    }

    pub fn domain(&self, var: &Variable) -> Vec<Value> {
        var.spans
            .iter()
            .flat_map(|s| s.left..=s.right)
            .map(|r| self.values[r])
            .collect()
    }

    /// Domains spelled out value by value.
    pub fn extensive(&self) -> Vec<(VarId, Vec<Value>)> {
        self.vars.iter().map(|v| (v.id, self.domain(v))).collect()
    }

    /// Values that occur in at least one domain, in `D` order.
    pub fn used_values(&self) -> Vec<Value> {
        let mut used = vec![false; self.values.len()];
        for v in &self.vars {
            for s in &v.spans {
                used[s.left..=s.right].iter_mut().for_each(|u| *u = true);
            }
        }
        used.iter()
            .enumerate()
            .filter(|(_, &u)| u)
            .map(|(r, _)| self.values[r])
            .collect()
    }

    /// Keeps the values whose rank passes `keep` and drops variables that lose
    /// their whole domain. Runs that become adjacent are merged.
    pub fn retain_values(&self, keep: impl Fn(usize) -> bool) -> Instance {
        let mut new_rank = vec![usize::MAX; self.values.len()];
        let mut values = Vec::new();
        for r in 0..self.values.len() {
            if keep(r) {
                new_rank[r] = values.len();
                values.push(self.values[r]);
            }
        }
        let mut vars = Vec::with_capacity(self.vars.len());
        for v in &self.vars {
            let mut spans = Vec::with_capacity(v.spans.len());
            for s in &v.spans {
                let lo = (s.left..=s.right).find(|&r| new_rank[r] != usize::MAX);
                let hi = (s.left..=s.right).rev().find(|&r| new_rank[r] != usize::MAX);
                if let (Some(lo), Some(hi)) = (lo, hi) {
                    spans.push(Span::new(new_rank[lo], new_rank[hi]));
                }
            }
            if !spans.is_empty() {
                vars.push(Variable { id: v.id, spans: merge_spans(spans) });
            }
        }
        let index = index_values(&values).expect("subset of distinct values");
        Instance { values, index, vars, budget: self.budget }
    }

    /// Selects `value`: every variable containing it is satisfied and removed,
    /// the value leaves `D`, and the budget drops by one.
    pub fn select_value(&self, value: Value) -> Option<Instance> {
        let rank = self.rank_of(value)?;
        if self.budget == 0 {
            return None;
        }
        let mut out = Instance {
            values: self.values.clone(),
            index: self.index.clone(),
            vars: self.vars.iter().filter(|v| !v.contains(rank)).cloned().collect(),
            budget: self.budget - 1,
        };
        out = out.retain_values(|r| r != rank);
        Some(out)
    }

    /// Removes variables and leaves `D` and the budget untouched.
    pub fn without_vars(&self, drop: &BTreeSet<VarId>) -> Instance {
        let mut out = self.clone();
        out.vars.retain(|v| !drop.contains(&v.id));
        out
    }
}

/// Number of holes: total intervals minus number of variables.
pub fn count_holes(inst: &Instance) -> usize {
    inst.vars.iter().map(Variable::holes).sum()
}

/// Sorts all intervals by `(right, left, var id)` with two stable counting passes.
pub fn canonical_sort(inst: &Instance) -> Vec<Interval> {
    let m = inst.values.len();
    let base: Vec<Interval> = inst.intervals().collect();
    let by_left = counting_pass(base, m, |iv| iv.span.left);
    counting_pass(by_left, m, |iv| iv.span.right)
}

/// Stable sort by a key below `m`.
pub(crate) fn counting_pass<T: Copy>(items: Vec<T>, m: usize, key: impl Fn(&T) -> usize) -> Vec<T> {
    let mut start = vec![0usize; m + 1];
    for it in &items {
        start[key(it) + 1] += 1;
    }
    for i in 0..m {
        start[i + 1] += start[i];
    }
    let mut out = vec![None; items.len()];
    for it in items {
        let k = key(&it);
        out[start[k]] = Some(it);
        start[k] += 1;
    }
    out.into_iter().map(|x| x.expect("every slot filled")).collect()
}

/// Converts extensive domains to interval form.
///
/// With `values` given, runs and holes are measured against that order. Without
/// it, runs are measured over the integers and `D` becomes the sorted set of run
/// endpoints (plus every domain value when `keep_interior` is set); the runs
/// are then re-merged against the new `D`, so intervals stay maximal.
pub fn normalize(
    extensive: Vec<(VarId, Vec<Value>)>,
    values: Option<Vec<Value>>,
    budget: i64,
    opts: NormalizeOptions,
) -> Result<Instance, InstanceError> {
    let values = match values {
        Some(v) => v,
        None => {
            let mut set = BTreeSet::new();
            for (_, dom) in &extensive {
                let mut sorted: Vec<i64> = dom.iter().map(|v| v.0).collect();
                sorted.sort_unstable();
                sorted.dedup();
                if opts.keep_interior {
                    set.extend(sorted.iter().copied());
                    continue;
                }
                let mut i = 0;
                while i < sorted.len() {
                    let mut j = i;
                    while j + 1 < sorted.len() && sorted[j + 1] == sorted[j] + 1 {
                        j += 1;
                    }
                    set.insert(sorted[i]);
                    set.insert(sorted[j]);
                    i = j + 1;
                }
            }
            set.into_iter().map(Value).collect()
        }
    };
    let index = index_values(&values)?;
    let mut vars = Vec::with_capacity(extensive.len());
    for (id, dom) in extensive {
        let mut ranks = Vec::with_capacity(dom.len());
        for v in dom {
            match index.get(&v) {
                Some(&r) => ranks.push(r),
                // Interior values are dropped when D keeps endpoints only.
                None if !opts.keep_interior => {}
                None => return Err(InstanceError::UnknownValue { var: id, value: v }),
            }
        }
        ranks.sort_unstable();
        vars.push((id, runs_of_sorted_ranks(&ranks)));
    }
    Instance::assemble(values, index, vars, budget)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Solution(BTreeSet<Value>);

impl Solution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: Value) -> bool {
        self.0.contains(&v)
    }

    pub fn insert(&mut self, v: Value) -> bool {
        self.0.insert(v)
    }

    pub fn remove(&mut self, v: Value) -> bool {
        self.0.remove(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = Value> + '_ {
        self.0.iter().copied()
    }
}

impl FromIterator<Value> for Solution {
    fn from_iter<T: IntoIterator<Item = Value>>(iter: T) -> Self {
        Solution(iter.into_iter().collect())
    }
}

impl fmt::Display for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.0 {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}
