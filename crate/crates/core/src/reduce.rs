//! Reduction rules Red-⊆, Red-Dom and Red-Unit, applied to a fixpoint.
//!
//! The engine works on value ranks. Dead values are skipped through two
//! union-find arrays, so the effective ends of an interval are
//! `next_alive(left)` and `prev_alive(right)`. Each alive value keeps the
//! intervals that effectively start and end there; when a value is discarded
//! these groups are merged into the neighbouring value, small into large.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};
use std::fmt;

use crate::domain::{counting_pass, Instance, Span, Value, VarId};
use crate::group::Group;

const NIL: u32 = u32::MAX;

/// Which reduction rules the engine may apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleSet {
    pub subset: bool,
    pub dom: bool,
    pub unit: bool,
}

impl RuleSet {
    pub const ALL: RuleSet = RuleSet { subset: true, dom: true, unit: true };
    pub const DOM_UNIT: RuleSet = RuleSet { subset: false, dom: true, unit: true };
    pub const SUBSET: RuleSet = RuleSet { subset: true, dom: false, unit: false };
    pub const DOM: RuleSet = RuleSet { subset: false, dom: true, unit: false };
    pub const UNIT: RuleSet = RuleSet { subset: false, dom: false, unit: true };
}

/// One merge performed by the scan phase: the last follower of `leader` is
/// removed and the second-last one is stretched to its right end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergePair {
    pub leader: VarId,
    pub second_last: VarId,
    /// Extent of the second-last follower before it was stretched.
    pub second_last_span: (Value, Value),
    pub last: VarId,
    pub last_span: (Value, Value),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Select(Value),
    /// `gained_right_end` is the neighbour that became a right endpoint only
    /// because this value was removed.
    Discard { value: Value, gained_right_end: Option<Value> },
    RemoveVariable(VarId),
    Merge(Vec<MergePair>),
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Select(v) => write!(f, "s {v}"),
            Event::Discard { value, .. } => write!(f, "d {value}"),
            Event::RemoveVariable(x) => write!(f, "r {x}"),
            Event::Merge(pairs) => {
                f.write_str("m")?;
                for p in pairs {
                    write!(f, " {} {} {}", p.leader, p.second_last, p.last)?;
                }
                Ok(())
            }
        }
    }
}

/// Ordered record of every change made while kernelizing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReductionLog {
    events: Vec<Event>,
}

impl ReductionLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn push(&mut self, e: Event) {
        self.events.push(e);
    }

    pub fn extend(&mut self, it: impl IntoIterator<Item = Event>) {
        self.events.extend(it);
    }

    /// How far the budget has dropped: one per selection and one per merge step.
    pub fn budget_decrease(&self) -> i64 {
        self.events
            .iter()
            .filter(|e| matches!(e, Event::Select(_) | Event::Merge(_)))
            .count() as i64
    }

    /// Log as comment-free text lines (`s v`, `d v`, `r x`, `m ...`).
    pub fn lines(&self) -> impl Iterator<Item = String> + '_ {
        self.events.iter().map(|e| e.to_string())
    }
}

/// Replays a log on an instance with plain set operations.
///
/// This is deliberately naive and independent of the engine; it exists so the
/// engine's bookkeeping can be checked against it.
pub fn replay(inst: &Instance, log: &ReductionLog) -> Option<Instance> {
    let mut values: Vec<Value> = inst.values().to_vec();
    let mut doms: Vec<(VarId, BTreeSet<Value>)> = inst
        .extensive()
        .into_iter()
        .map(|(id, d)| (id, d.into_iter().collect()))
        .collect();
    let mut budget = inst.budget();
    let pos = |values: &[Value], v: Value| values.iter().position(|&w| w == v);
    for e in log.events() {
        match e {
            Event::Select(v) => {
                pos(&values, *v)?;
                doms.retain(|(_, d)| !d.contains(v));
                values.retain(|w| w != v);
                budget -= 1;
            }
            Event::Discard { value, .. } => {
                pos(&values, *value)?;
                values.retain(|w| w != value);
                for (_, d) in doms.iter_mut() {
                    d.remove(value);
                }
            }
            Event::RemoveVariable(x) => {
                let i = doms.iter().position(|(id, _)| id == x)?;
                doms.remove(i);
            }
            Event::Merge(pairs) => {
                for p in pairs {
                    let lo = pos(&values, p.second_last_span.0)?;
                    let hi = pos(&values, p.last_span.1)?;
                    let i = doms.iter().position(|(id, _)| *id == p.second_last)?;
                    doms[i].1 = values[lo..=hi].iter().copied().collect();
                }
                for p in pairs {
                    let i = doms.iter().position(|(id, _)| *id == p.last)?;
                    doms.remove(i);
                }
                budget -= 1;
            }
        }
    }
    let ext = doms.into_iter().map(|(id, d)| (id, d.into_iter().collect())).collect();
    crate::domain::normalize(ext, Some(values), budget.max(0), Default::default()).ok()
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Reduced(Instance),
    /// The budget reached zero while variables remained.
    Infeasible,
}

impl Outcome {
    pub fn instance(&self) -> Option<&Instance> {
        match self {
            Outcome::Reduced(i) => Some(i),
            Outcome::Infeasible => None,
        }
    }
}

/// Result of running a subset of the rules to a fixpoint.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub outcome: Outcome,
    pub events: Vec<Event>,
}

pub fn red_subset(inst: &Instance) -> Reduction {
    reduce(inst, RuleSet::SUBSET)
}

pub fn red_dom(inst: &Instance) -> Reduction {
    reduce(inst, RuleSet::DOM)
}

pub fn red_unit(inst: &Instance) -> Reduction {
    reduce(inst, RuleSet::UNIT)
}

pub fn apply_rules_to_fixpoint(inst: &Instance) -> Reduction {
    reduce(inst, RuleSet::ALL)
}

pub fn reduce(inst: &Instance, rules: RuleSet) -> Reduction {
    let mut e = Engine::new(inst, rules);
    e.run();
    e.finish()
}

/// Red-Dom in its general form: a value is discarded when the variables
/// containing it form a subset of those containing another value. Quadratic;
/// meant for small kernels.
pub fn generalized_red_dom(inst: &Instance) -> Option<(Instance, Event)> {
    let m = inst.num_values();
    let words = inst.num_vars().div_ceil(64);
    let mut sets = vec![vec![0u64; words]; m];
    for (i, v) in inst.vars().iter().enumerate() {
        for s in v.spans() {
            for r in s.left..=s.right {
                sets[r][i / 64] |= 1 << (i % 64);
            }
        }
    }
    let subset = |a: &[u64], b: &[u64]| a.iter().zip(b).all(|(x, y)| x & !y == 0);
    let victim = (0..m).find(|&w| {
        (0..m).any(|u| u != w && subset(&sets[w], &sets[u]) && (sets[w] != sets[u] || u < w))
    })?;
    let out = inst.retain_values(|r| r != victim);
    let rights = |i: &Instance| -> BTreeSet<Value> {
        i.vars().iter().flat_map(|v| v.spans().iter().map(|s| i.value(s.right))).collect()
    };
    // Only the predecessor of the victim can turn into a new right end.
    let gained = rights(&out).difference(&rights(inst)).next().copied();
    let event = Event::Discard { value: inst.value(victim), gained_right_end: gained };
    Some((out, event))
}

#[derive(Debug, Clone, Copy)]
struct Iv {
    var: u32,
    l: u32,
    r: u32,
    alive: bool,
    prev: u32,
    next: u32,
}

#[derive(Debug, Clone)]
struct VarState {
    id: VarId,
    head: u32,
    count: u32,
    alive: bool,
}

/// Segment tree over left endpoints holding the largest right endpoint below
/// each node, used to find intervals that contain a value. Intervals sharing a
/// left endpoint are chained in a list.
#[derive(Debug, Clone)]
struct StabTree {
    size: usize,
    best: Vec<i64>,
    head: Vec<u32>,
    next: Vec<u32>,
    prev: Vec<u32>,
    right: Vec<u32>,
}

impl StabTree {
    fn new(m: usize, ivs: usize) -> Self {
        let size = m.max(1).next_power_of_two();
        StabTree {
            size,
            best: vec![-1; 2 * size],
            head: vec![NIL; m.max(1)],
            next: vec![NIL; ivs],
            prev: vec![NIL; ivs],
            right: vec![0; ivs],
        }
    }

    fn refresh(&mut self, l: usize) {
        let mut best = -1i64;
        let mut k = self.head[l];
        while k != NIL {
            best = best.max(self.right[k as usize] as i64);
            k = self.next[k as usize];
        }
        let mut node = self.size + l;
        self.best[node] = best;
        node /= 2;
        while node >= 1 {
            let b = self.best[2 * node].max(self.best[2 * node + 1]);
            if self.best[node] == b {
                break;
            }
            self.best[node] = b;
            node /= 2;
        }
    }

    fn insert(&mut self, l: u32, r: u32, iv: u32) {
        let (l, i) = (l as usize, iv as usize);
        self.right[i] = r;
        self.prev[i] = NIL;
        self.next[i] = self.head[l];
        if self.head[l] != NIL {
            self.prev[self.head[l] as usize] = iv;
        }
        self.head[l] = iv;
        self.refresh(l);
    }

    fn remove(&mut self, l: u32, iv: u32) {
        let (l, i) = (l as usize, iv as usize);
        let (p, n) = (self.prev[i], self.next[i]);
        if p != NIL {
            self.next[p as usize] = n;
        } else {
            self.head[l] = n;
        }
        if n != NIL {
            self.prev[n as usize] = p;
        }
        self.refresh(l);
    }

    /// Some interval with `l <= v <= r`, if any.
    fn stab(&self, v: u32) -> Option<u32> {
        self.stab_in(1, 0, self.size - 1, v as usize)
    }

    fn stab_in(&self, node: usize, lo: usize, hi: usize, v: usize) -> Option<u32> {
        if lo > v || self.best[node] < v as i64 {
            return None;
        }
        if node >= self.size {
            let mut k = self.head[lo];
            while k != NIL {
                if self.right[k as usize] as usize >= v {
                    return Some(k);
                }
                k = self.next[k as usize];
            }
            return None;
        }
        let mid = (lo + hi) / 2;
        self.stab_in(2 * node, lo, mid, v).or_else(|| self.stab_in(2 * node + 1, mid + 1, hi, v))
    }
}

enum Shift {
    /// Intervals ending at the value now end at the previous one.
    Down(u32),
    /// Intervals starting at the value now start at the next one.
    Up(u32),
    Free,
}

pub(crate) struct Engine {
    labels: Vec<Value>,
    alive_val: Vec<bool>,
    prev_val: Vec<u32>,
    next_val: Vec<u32>,
    succ: Vec<u32>,
    pred: Vec<u32>,
    ivs: Vec<Iv>,
    vars: Vec<VarState>,
    ends: Vec<Group>,
    ends_req: Vec<Group>,
    starts: Vec<Group>,
    starts_req: Vec<Group>,
    stab: StabTree,
    witness: Vec<Vec<u32>>,
    gap_lo: Vec<u32>,
    /// Pending Red-⊆ removals: a container interval and its required witness.
    subset_q: VecDeque<(u32, u32)>,
    dom_q: BinaryHeap<Reverse<u32>>,
    unit_q: BinaryHeap<Reverse<u32>>,
    budget: i64,
    live_vars: usize,
    live_ivs: usize,
    rules: RuleSet,
    infeasible: bool,
    events: Vec<Event>,
    selected: Vec<Value>,
}

impl Engine {
    pub(crate) fn new(inst: &Instance, rules: RuleSet) -> Self {
        let m = inst.num_values();
        let mut e = Engine {
            labels: inst.values().to_vec(),
            alive_val: vec![true; m],
            prev_val: (0..m as u32).map(|v| if v == 0 { NIL } else { v - 1 }).collect(),
            next_val: (0..m as u32).map(|v| if v + 1 == m as u32 { NIL } else { v + 1 }).collect(),
            succ: (0..=m as u32).collect(),
            pred: (0..=m as u32).collect(),
            ivs: Vec::with_capacity(inst.num_intervals()),
            vars: Vec::with_capacity(inst.num_vars()),
            ends: vec![Group::default(); m],
            ends_req: vec![Group::default(); m],
            starts: vec![Group::default(); m],
            starts_req: vec![Group::default(); m],
            stab: StabTree::new(m, inst.num_intervals()),
            witness: vec![Vec::new(); m],
            gap_lo: Vec::with_capacity(inst.num_intervals()),
            subset_q: VecDeque::new(),
            dom_q: BinaryHeap::new(),
            unit_q: BinaryHeap::new(),
            budget: inst.budget(),
            live_vars: inst.num_vars(),
            live_ivs: inst.num_intervals(),
            rules,
            infeasible: false,
            events: Vec::new(),
            selected: Vec::new(),
        };
        for (xi, var) in inst.vars().iter().enumerate() {
            let first = e.ivs.len() as u32;
            let count = var.spans().len() as u32;
            for (j, s) in var.spans().iter().enumerate() {
                let id = e.ivs.len() as u32;
                let (l, r) = (s.left as u32, s.right as u32);
                e.ivs.push(Iv {
                    var: xi as u32,
                    l,
                    r,
                    alive: true,
                    prev: if j == 0 { NIL } else { id - 1 },
                    next: if j + 1 == var.spans().len() { NIL } else { id + 1 },
                });
                e.ends[s.right].insert((l, id));
                e.starts[s.left].insert((r, id));
                if count == 1 {
                    e.ends_req[s.right].insert((l, id));
                    e.starts_req[s.left].insert((r, id));
                }
                e.stab.insert(l, r, id);
                if j == 0 {
                    e.gap_lo.push(NIL);
                } else {
                    let lo = var.spans()[j - 1].right as u32;
                    e.gap_lo.push(lo);
                    e.witness[lo as usize + 1].push(id);
                }
            }
            e.vars.push(VarState { id: var.id(), head: first, count, alive: true });
        }
        e
    }

    fn find_next(&mut self, v: u32) -> u32 {
        let mut x = v;
        while self.succ[x as usize] != x {
            let up = self.succ[self.succ[x as usize] as usize];
            self.succ[x as usize] = up;
            x = up;
        }
        x
    }

    /// Largest alive rank `<= v`, or `NIL`.
    fn find_prev(&mut self, v: u32) -> u32 {
        let mut x = v + 1;
        while self.pred[x as usize] != x {
            let down = self.pred[self.pred[x as usize] as usize];
            self.pred[x as usize] = down;
            x = down;
        }
        if x == 0 {
            NIL
        } else {
            x - 1
        }
    }

    fn eff_l(&mut self, iv: u32) -> u32 {
        let l = self.ivs[iv as usize].l;
        self.find_next(l)
    }

    fn eff_r(&mut self, iv: u32) -> u32 {
        let r = self.ivs[iv as usize].r;
        self.find_prev(r)
    }

    fn required(&self, iv: u32) -> bool {
        self.vars[self.ivs[iv as usize].var as usize].count == 1
    }

    pub(crate) fn holes(&self) -> usize {
        self.live_ivs - self.live_vars
    }

    pub(crate) fn selected(&self) -> &[Value] {
        &self.selected
    }

    pub(crate) fn is_infeasible(&self) -> bool {
        self.infeasible
    }

    fn push_dom(&mut self, v: u32) {
        if self.rules.dom {
            self.dom_q.push(Reverse(v));
        }
    }

    fn push_unit(&mut self, v: u32) {
        if self.rules.unit {
            self.unit_q.push(Reverse(v));
        }
    }

    fn push_subset(&mut self, iv: u32, witness: u32) {
        if self.rules.subset {
            self.subset_q.push_back((iv, witness));
        }
    }

    /// Whether the owner of `iv` still has an interval holding a required one.
    fn still_contains(&mut self, iv: u32, witness: u32) -> bool {
        let x = self.ivs[iv as usize].var;
        let w = self.ivs[witness as usize];
        if self.ivs[iv as usize].alive && w.alive && w.var != x && self.vars[w.var as usize].alive {
            return true;
        }
        let mut k = self.vars[x as usize].head;
        while k != NIL {
            let (kl, kr) = (self.eff_l(k), self.eff_r(k));
            for j in 0..self.ivs.len() as u32 {
                let jv = self.ivs[j as usize];
                if jv.alive && jv.var != x && self.required(j) && kl <= self.eff_l(j) && self.eff_r(j) <= kr {
                    return true;
                }
            }
            k = self.ivs[k as usize].next;
        }
        false
    }

    fn check_budget(&mut self) {
        if self.budget <= 0 && self.live_vars > 0 {
            self.infeasible = true;
        }
    }

    pub(crate) fn run(&mut self) {
        self.check_budget();
        if self.infeasible {
            return;
        }
        if self.rules.subset {
            self.initial_subset_sweep();
        }
        if self.rules.dom {
            for v in 0..self.labels.len() as u32 {
                if self.alive_val[v as usize] {
                    self.dom_q.push(Reverse(v));
                }
            }
        }
        if self.rules.unit {
            for iv in 0..self.ivs.len() as u32 {
                if self.ivs[iv as usize].alive && self.required(iv) {
                    let (l, r) = (self.eff_l(iv), self.eff_r(iv));
                    if l == r {
                        self.unit_q.push(Reverse(l));
                    }
                }
            }
        }
        self.drain();
    }

    /// Red-Dom first, then Red-Unit, then pending Red-⊆ removals.
    fn drain(&mut self) {
        while !self.infeasible {
            if let Some(Reverse(v)) = self.dom_q.pop() {
                if self.alive_val[v as usize] {
                    if let Some(shift) = self.dom_action(v) {
                        self.discard(v, shift);
                    }
                }
                continue;
            }
            if let Some(Reverse(v)) = self.unit_q.pop() {
                if self.alive_val[v as usize] && self.has_unit(v) {
                    self.select(v);
                }
                continue;
            }
            if let Some((iv, w)) = self.subset_q.pop_front() {
                let x = self.ivs[iv as usize].var;
                if self.vars[x as usize].alive && self.still_contains(iv, w) {
                    self.remove_var_logged(x);
                }
                continue;
            }
            break;
        }
    }

    fn remove_var_logged(&mut self, x: u32) {
        if self.vars[x as usize].alive {
            let id = self.vars[x as usize].id;
            self.remove_var(x);
            self.events.push(Event::RemoveVariable(id));
        }
    }

    fn initial_subset_sweep(&mut self) {
        let mut order: Vec<(u32, u32, bool, u32)> = Vec::with_capacity(self.live_ivs);
        for iv in 0..self.ivs.len() as u32 {
            if self.ivs[iv as usize].alive {
                let (l, r) = (self.eff_l(iv), self.eff_r(iv));
                order.push((r, l, !self.required(iv), iv));
            }
        }
        // Among equal extents the required ones come first, so they act as witnesses.
        let m = self.labels.len();
        let order = counting_pass(order, 2, |&(_, _, opt, _)| opt as usize);
        let order = counting_pass(order, m, |&(_, l, _, _)| m - 1 - l as usize);
        let order = counting_pass(order, m, |&(r, _, _, _)| r as usize);
        let mut best: Option<u32> = None;
        let mut hit = Vec::new();
        for &(_, l, _, iv) in &order {
            if best.is_some_and(|b| b >= l) {
                hit.push(self.ivs[iv as usize].var);
            }
            if self.required(iv) {
                best = Some(best.map_or(l, |b| b.max(l)));
            }
        }
        hit.sort_unstable();
        hit.dedup();
        for x in hit {
            self.remove_var_logged(x);
        }
    }

    fn dom_action(&self, v: u32) -> Option<Shift> {
        let start = self.starts[v as usize].len();
        let end = self.ends[v as usize].len();
        let (p, q) = (self.prev_val[v as usize], self.next_val[v as usize]);
        if start == 0 && p != NIL {
            Some(Shift::Down(p))
        } else if end == 0 && q != NIL {
            Some(Shift::Up(q))
        } else if start == 0 && end == 0 {
            Some(Shift::Free)
        } else {
            None
        }
    }

    fn has_unit(&mut self, v: u32) -> bool {
        match self.ends_req[v as usize].last() {
            Some((l, _)) => self.find_next(l) == v,
            None => false,
        }
    }

    fn discard(&mut self, v: u32, shift: Shift) {
        let vu = v as usize;
        let mut gained = None;
        match shift {
            Shift::Down(p) => {
                let pu = p as usize;
                if !self.ends[vu].is_empty() && self.ends[pu].is_empty() {
                    gained = Some(self.labels[pu]);
                }
                if let Some((jl, j)) = self.ends_req[vu].last() {
                    let thr = self.find_next(jl);
                    if self.rules.subset {
                        let hits: Vec<u32> =
                            self.ends[pu].keys_in(..=(thr, u32::MAX)).into_iter().map(|(_, k)| k).collect();
                        hits.into_iter().for_each(|k| self.push_subset(k, j));
                    }
                    if thr == p {
                        self.push_unit(p);
                    }
                }
                merge_into(&mut self.ends, vu, pu);
                merge_into(&mut self.ends_req, vu, pu);
            }
            Shift::Up(q) => {
                let qu = q as usize;
                if let Some((jr, j)) = self.starts_req[vu].first() {
                    let thr = self.find_prev(jr);
                    if self.rules.subset {
                        let hits: Vec<u32> =
                            self.starts[qu].keys_in((thr, 0)..).into_iter().map(|(_, k)| k).collect();
                        hits.into_iter().for_each(|k| self.push_subset(k, j));
                    }
                    if thr == q {
                        self.push_unit(q);
                    }
                }
                merge_into(&mut self.starts, vu, qu);
                merge_into(&mut self.starts_req, vu, qu);
            }
            Shift::Free => {}
        }
        self.events.push(Event::Discard { value: self.labels[vu], gained_right_end: gained });
        self.kill_value(v);
    }

    /// Selects value rank `v`, removing every variable that contains it.
    pub(crate) fn select(&mut self, v: u32) {
        debug_assert!(self.alive_val[v as usize]);
        self.events.push(Event::Select(self.labels[v as usize]));
        self.selected.push(self.labels[v as usize]);
        while let Some(iv) = self.stab.stab(v) {
            let x = self.ivs[iv as usize].var;
            self.remove_var(x);
        }
        self.budget -= 1;
        self.kill_value(v);
        self.check_budget();
    }

    pub(crate) fn select_rank(&mut self, v: usize) {
        self.select(v as u32);
        self.drain();
    }

    /// Removes one interval from an optional variable, then reduces.
    pub(crate) fn drop_interval_at(&mut self, var: VarId, left: usize) {
        let x = self.vars.iter().position(|s| s.id == var && s.alive).expect("live variable");
        let mut iv = self.vars[x].head;
        while iv != NIL {
            if self.eff_l(iv) == left as u32 {
                break;
            }
            iv = self.ivs[iv as usize].next;
        }
        assert!(iv != NIL, "interval not found");
        self.drop_interval(iv);
        self.drain();
    }

    fn drop_interval(&mut self, iv: u32) {
        let x = self.ivs[iv as usize].var as usize;
        assert!(self.vars[x].count >= 2, "cannot empty a domain");
        self.remove_interval(iv);
        let Iv { prev: a, next: b, .. } = self.ivs[iv as usize];
        if a != NIL {
            self.ivs[a as usize].next = b;
        } else {
            self.vars[x].head = b;
        }
        if b != NIL {
            self.ivs[b as usize].prev = a;
            if a != NIL {
                let lo = self.ivs[a as usize].r;
                self.gap_lo[b as usize] = lo;
                let w = self.find_next(lo + 1);
                self.witness[w as usize].push(b);
            } else {
                self.gap_lo[b as usize] = NIL;
            }
        }
        self.vars[x].count -= 1;
        self.live_ivs -= 1;
        if self.vars[x].count == 1 {
            let m = self.vars[x].head;
            self.become_required(m);
            let (l, r) = (self.eff_l(m), self.eff_r(m));
            if l == r {
                self.push_unit(l);
            }
        }
    }

    fn become_required(&mut self, m: u32) {
        let (l, r) = (self.eff_l(m), self.eff_r(m));
        let Iv { l: ol, r: or, .. } = self.ivs[m as usize];
        self.ends_req[r as usize].insert((ol, m));
        self.starts_req[l as usize].insert((or, m));
        if self.rules.subset {
            self.check_contained(m);
        }
    }

    fn remove_interval(&mut self, iv: u32) {
        let (er, el) = (self.eff_r(iv), self.eff_l(iv));
        let Iv { l, r, .. } = self.ivs[iv as usize];
        let req = self.required(iv);
        self.ends[er as usize].remove(&(l, iv));
        self.starts[el as usize].remove(&(r, iv));
        if req {
            self.ends_req[er as usize].remove(&(l, iv));
            self.starts_req[el as usize].remove(&(r, iv));
        }
        if self.ends[er as usize].is_empty() {
            self.push_dom(er);
        }
        if self.starts[el as usize].is_empty() {
            self.push_dom(el);
        }
        self.stab.remove(l, iv);
        self.ivs[iv as usize].alive = false;
    }

    fn remove_var(&mut self, x: u32) {
        let mut iv = self.vars[x as usize].head;
        while iv != NIL {
            self.remove_interval(iv);
            iv = self.ivs[iv as usize].next;
        }
        let st = &mut self.vars[x as usize];
        st.alive = false;
        self.live_vars -= 1;
        self.live_ivs -= st.count as usize;
    }

    fn kill_value(&mut self, v: u32) {
        let vu = v as usize;
        self.alive_val[vu] = false;
        let (p, q) = (self.prev_val[vu], self.next_val[vu]);
        if p != NIL {
            self.next_val[p as usize] = q;
        }
        if q != NIL {
            self.prev_val[q as usize] = p;
        }
        self.succ[vu] = v + 1;
        self.pred[vu + 1] = v;
        for b in std::mem::take(&mut self.witness[vu]) {
            self.revisit_gap(b);
        }
    }

    fn revisit_gap(&mut self, b: u32) {
        let iv = self.ivs[b as usize];
        let lo = self.gap_lo[b as usize];
        if !iv.alive || lo == NIL {
            return;
        }
        let w = self.find_next(lo + 1);
        if w < iv.l {
            self.witness[w as usize].push(b);
        } else {
            self.close_gap(b);
        }
    }

    /// The hole left of interval `b` has emptied: `b` merges into its left neighbour.
    fn close_gap(&mut self, b: u32) {
        let a = self.ivs[b as usize].prev;
        let x = self.ivs[b as usize].var as usize;
        self.remove_interval(b);
        let er = self.eff_r(a);
        let Iv { l: al, .. } = self.ivs[a as usize];
        self.ends[er as usize].remove(&(al, a));
        if self.ends[er as usize].is_empty() {
            self.push_dom(er);
        }
        self.stab.remove(al, a);
        let (br, bn) = (self.ivs[b as usize].r, self.ivs[b as usize].next);
        self.ivs[a as usize].r = br;
        self.ivs[a as usize].next = bn;
        if bn != NIL {
            self.ivs[bn as usize].prev = a;
        }
        let er = self.eff_r(a);
        self.ends[er as usize].insert((al, a));
        self.stab.insert(al, br, a);
        self.vars[x].count -= 1;
        self.live_ivs -= 1;
        if self.vars[x].count == 1 {
            self.become_required(a);
        }
        if self.rules.subset {
            self.check_contains(a);
        }
    }

    /// Queues every variable owning an interval that contains required `m`.
    fn check_contained(&mut self, m: u32) {
        let (ml, mr) = (self.eff_l(m), self.eff_r(m));
        for k in 0..self.ivs.len() as u32 {
            let iv = self.ivs[k as usize];
            if k != m && iv.alive && iv.l <= ml && iv.r >= mr {
                self.push_subset(k, m);
            }
        }
    }

    /// Queues the owner of `m` if `m` contains some other required interval.
    fn check_contains(&mut self, m: u32) {
        let Iv { l: ml, r: mr, .. } = self.ivs[m as usize];
        for j in 0..self.ivs.len() as u32 {
            if j != m && self.ivs[j as usize].alive && self.required(j) {
                let (jl, jr) = (self.eff_l(j), self.eff_r(j));
                if ml <= jl && jr <= mr {
                    self.push_subset(m, j);
                    return;
                }
            }
        }
    }

    /// Compacts the surviving values and intervals into a fresh instance.
    pub(crate) fn finish(mut self) -> Reduction {
        if self.infeasible {
            return Reduction { outcome: Outcome::Infeasible, events: self.events };
        }
        let mut rank = vec![usize::MAX; self.labels.len()];
        let mut values = Vec::new();
        for v in 0..self.labels.len() {
            if self.alive_val[v] {
                rank[v] = values.len();
                values.push(self.labels[v]);
            }
        }
        let mut vars = Vec::with_capacity(self.live_vars);
        for x in 0..self.vars.len() {
            if !self.vars[x].alive {
                continue;
            }
            let mut spans = Vec::with_capacity(self.vars[x].count as usize);
            let mut iv = self.vars[x].head;
            while iv != NIL {
                let (l, r) = (self.eff_l(iv) as usize, self.eff_r(iv) as usize);
                spans.push(Span::new(rank[l], rank[r]));
                iv = self.ivs[iv as usize].next;
            }
            vars.push((self.vars[x].id, spans));
        }
        let inst = Instance::from_spans(values, vars, self.budget)
            .expect("engine keeps the instance well formed");
        debug_assert_eq!(inst.holes(), self.holes());
        Reduction { outcome: Outcome::Reduced(inst), events: self.events }
    }
}

fn merge_into(sets: &mut [Group], from: usize, to: usize) {
    let moved = std::mem::take(&mut sets[from]);
    sets[to].absorb(moved);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Instance, Value, VarId};

    fn inst(m: i64, vars: &[(u32, &[(i64, i64)])], n: i64) -> Instance {
        Instance::from_pieces(
            (1..=m).map(Value).collect(),
            vars.iter()
                .map(|(id, ps)| (VarId(*id), ps.iter().map(|&(l, r)| (Value(l), Value(r))).collect()))
                .collect(),
            n,
        )
        .unwrap()
    }

    #[test]
    fn subset_removes_container() {
        let i = inst(4, &[(1, &[(1, 4)]), (2, &[(2, 3)])], 2);
        let red = red_subset(&i);
        assert_eq!(red.events, vec![Event::RemoveVariable(VarId(1))]);
        assert_eq!(red.outcome.instance().unwrap().num_vars(), 1);
    }

    #[test]
    fn equal_required_keeps_lowest_id() {
        let i = inst(3, &[(1, &[(1, 2)]), (2, &[(1, 2)])], 1);
        let red = red_subset(&i);
        assert_eq!(red.events, vec![Event::RemoveVariable(VarId(2))]);
    }

    #[test]
    fn dom_then_unit() {
        // x1 = {1,2}, x2 = {2,3}. Value 1 dominated by 2; 3 dominated by 2.
        let i = inst(3, &[(1, &[(1, 2)]), (2, &[(2, 3)])], 1);
        let red = apply_rules_to_fixpoint(&i);
        let out = red.outcome.instance().unwrap();
        assert!(out.is_empty());
        assert_eq!(out.budget(), 0);
        assert!(red.events.contains(&Event::Select(Value(2))));
    }

    #[test]
    fn unit_selection_hits_budget() {
        let i = inst(3, &[(1, &[(1, 1)]), (2, &[(3, 3)])], 1);
        let red = red_unit(&i);
        assert!(matches!(red.outcome, Outcome::Infeasible));
    }

    #[test]
    fn discard_closes_gap() {
        // x1 = {1} ∪ {3}; x2 = {1,2}. Value 2 only in x2, ends there, starts at 1.
        let i = inst(3, &[(1, &[(1, 1), (3, 3)]), (2, &[(1, 2)])], 2);
        let red = red_dom(&i);
        let out = red.outcome.instance().unwrap();
        assert_eq!(red.events[0], Event::Discard { value: Value(2), gained_right_end: None });
        assert_eq!(out.holes(), 0);
        assert_eq!(replay(&i, &ReductionLog { events: red.events.clone() }).unwrap(), *out);
    }

    #[test]
    fn stab_tree_finds_container() {
        let mut t = StabTree::new(8, 2);
        t.insert(1, 3, 0);
        t.insert(4, 7, 1);
        assert_eq!(t.stab(2), Some(0));
        assert_eq!(t.stab(5), Some(1));
        assert_eq!(t.stab(0), None);
        t.remove(4, 1);
        assert_eq!(t.stab(5), None);
    }

    #[test]
    fn generalized_dom_finds_dominated_value() {
        // var({1}) = {x1} ⊆ var({2}) = {x1, x2}; interval-wise 1 starts x1 so plain Red-Dom keeps it.
        let i = inst(3, &[(1, &[(1, 2)]), (2, &[(2, 3)])], 2);
        let (out, e) = generalized_red_dom(&i).unwrap();
        assert_eq!(e, Event::Discard { value: Value(1), gained_right_end: None });
        assert_eq!(out.num_values(), 2);
    }
}
