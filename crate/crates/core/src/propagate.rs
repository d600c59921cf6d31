//! Filtering for AtMost-NValue and NValue.

use std::collections::{BTreeSet, VecDeque};

use crate::domain::{Instance, Span, Value, VarId};
use crate::exec::Exec;
use crate::solve::{is_consistent, min_values};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HacStatus {
    Consistent,
    Failed,
}

#[derive(Debug, Clone)]
pub struct HacOutcome {
    pub status: HacStatus,
    /// Values that some variable can take in a solution. Support does not
    /// depend on the variable for AtMost-NValue.
    pub supported: Vec<Value>,
    /// The instance restricted to the supported values.
    pub filtered: Option<Instance>,
}

/// Hyper-arc consistency for AtMost-NValue.
pub fn enforce_hac_atmost(inst: &Instance) -> HacOutcome {
    enforce_hac_atmost_with(inst, Exec::default())
}

pub fn enforce_hac_atmost_with(inst: &Instance, exec: Exec) -> HacOutcome {
    if !is_consistent(inst) {
        return HacOutcome { status: HacStatus::Failed, supported: Vec::new(), filtered: None };
    }
    let used = inst.used_values();
    let slack = inst.budget() >= 1 && is_consistent(&inst.with_budget(inst.budget() - 1).expect("non-negative"));
    let supported: Vec<Value> = if slack {
        used
    } else {
        let keep = exec.map(&used, |&v| inst.select_value(v).is_some_and(|i| is_consistent(&i)));
        used.into_iter().zip(keep).filter(|&(_, k)| k).map(|(v, _)| v).collect()
    };
    let keep: BTreeSet<usize> = supported.iter().filter_map(|&v| inst.rank_of(v)).collect();
    let filtered = inst.retain_values(|r| keep.contains(&r));
    HacOutcome { status: HacStatus::Consistent, supported, filtered: Some(filtered) }
}

/// A maximum matching between variables and values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub pairs: Vec<(VarId, Value)>,
}

impl Matching {
    pub fn size(&self) -> usize {
        self.pairs.len()
    }
}

fn adjacency(inst: &Instance, skip_var: Option<usize>, skip_val: Option<usize>) -> Vec<Vec<usize>> {
    inst.vars()
        .iter()
        .enumerate()
        .map(|(x, v)| {
            if Some(x) == skip_var {
                return Vec::new();
            }
            v.spans()
                .iter()
                .flat_map(|s: &Span| s.left..=s.right)
                .filter(|&r| Some(r) != skip_val)
                .collect()
        })
        .collect()
}

/// Hopcroft–Karp; returns `mate` for every left vertex.
fn hopcroft_karp(adj: &[Vec<usize>], right: usize) -> Vec<Option<usize>> {
    const INF: usize = usize::MAX;
    let left = adj.len();
    let mut mate_l: Vec<Option<usize>> = vec![None; left];
    let mut mate_r: Vec<Option<usize>> = vec![None; right];
    let mut dist = vec![INF; left];
    loop {
        let mut queue = VecDeque::new();
        for x in 0..left {
            if mate_l[x].is_none() {
                dist[x] = 0;
                queue.push_back(x);
            } else {
                dist[x] = INF;
            }
        }
        let mut found = false;
        while let Some(x) = queue.pop_front() {
            for &v in &adj[x] {
                match mate_r[v] {
                    None => found = true,
                    Some(y) if dist[y] == INF => {
                        dist[y] = dist[x] + 1;
                        queue.push_back(y);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            break;
        }
        let mut it = vec![0usize; left];
        for x in 0..left {
            if mate_l[x].is_none() {
                augment(x, adj, &mut mate_l, &mut mate_r, &mut dist, &mut it);
            }
        }
    }
    mate_l
}

fn augment(
    x: usize,
    adj: &[Vec<usize>],
    mate_l: &mut [Option<usize>],
    mate_r: &mut [Option<usize>],
    dist: &mut [usize],
    it: &mut [usize],
) -> bool {
    while it[x] < adj[x].len() {
        let v = adj[x][it[x]];
        it[x] += 1;
        let ok = match mate_r[v] {
            None => true,
            Some(y) => dist[y] == dist[x] + 1 && augment(y, adj, mate_l, mate_r, dist, it),
        };
        if ok {
            mate_l[x] = Some(v);
            mate_r[v] = Some(x);
            return true;
        }
    }
    dist[x] = usize::MAX;
    false
}

pub fn maximum_matching(inst: &Instance) -> Matching {
    let mate = hopcroft_karp(&adjacency(inst, None, None), inst.num_values());
    let pairs = mate
        .iter()
        .enumerate()
        .filter_map(|(x, m)| m.map(|r| (inst.vars()[x].id(), inst.value(r))))
        .collect();
    Matching { pairs }
}

/// Largest number of distinct values any assignment can use.
pub fn max_distinct_values(inst: &Instance) -> usize {
    maximum_matching(inst).size()
}

/// NValue: the number of distinct values must lie in `counts`.
#[derive(Debug, Clone)]
pub struct NValueInstance {
    pub base: Instance,
    pub counts: BTreeSet<i64>,
}

pub fn nvalue_consistency(nv: &NValueInstance) -> bool {
    let upper = max_distinct_values(&nv.base) as i64;
    match nv.counts.range(..=upper).next_back() {
        Some(&w) if w >= 0 => is_consistent(&nv.base.with_budget(w).expect("non-negative")),
        _ => false,
    }
}

#[derive(Debug, Clone)]
pub struct NValueHac {
    pub status: HacStatus,
    pub counts: BTreeSet<i64>,
    /// Supported values for each variable, in `D` order.
    pub supported: Vec<(VarId, Vec<Value>)>,
    pub filtered: Option<NValueInstance>,
}

/// Hyper-arc consistency for NValue.
///
/// The reachable numbers of distinct values form the range from the minimum
/// hitting set size to the maximum matching size. With `x = v` fixed the range
/// is `1 + opt(select v)` to the matching size with `x` tied to `v`. A pair is
/// supported when its range meets the surviving counts.
pub fn enforce_hac_nvalue(nv: &NValueInstance) -> NValueHac {
    enforce_hac_nvalue_with(nv, Exec::default())
}

pub fn enforce_hac_nvalue_with(nv: &NValueInstance, exec: Exec) -> NValueHac {
    let inst = &nv.base;
    let failed = || NValueHac { status: HacStatus::Failed, counts: BTreeSet::new(), supported: Vec::new(), filtered: None };
    let upper = max_distinct_values(inst) as i64;
    let lower = min_values(inst) as i64;
    let counts: BTreeSet<i64> = nv.counts.range(lower..=upper).copied().collect();
    if counts.is_empty() {
        return failed();
    }
    let used: Vec<usize> = inst.used_values().iter().filter_map(|&v| inst.rank_of(v)).collect();
    // The budget plays no part in NValue; give selection room to act.
    let roomy = inst.with_budget(inst.num_vars() as i64 + 1).expect("non-negative");
    let low_with: Vec<i64> = exec.map(&used, |&r| {
        roomy.select_value(inst.value(r)).map_or(i64::MAX, |i| 1 + min_values(&i) as i64)
    });
    let low_of = |r: usize| low_with[used.binary_search(&r).expect("used value")];
    let per_var: Vec<(usize, Vec<usize>)> = inst
        .vars()
        .iter()
        .enumerate()
        .map(|(x, v)| (x, v.spans().iter().flat_map(|s| s.left..=s.right).collect()))
        .collect();
    let supported: Vec<(VarId, Vec<Value>)> = exec.map(&per_var, |(x, ranks)| {
        let keep = ranks
            .iter()
            .filter(|&&r| {
                let lo = low_of(r);
                let adj = adjacency(inst, Some(*x), Some(r));
                let hi = 1 + hopcroft_karp(&adj, inst.num_values()).iter().flatten().count() as i64;
                counts.range(lo..=hi).next().is_some()
            })
            .map(|&r| inst.value(r))
            .collect();
        (inst.vars()[*x].id(), keep)
    });
    let ext: Vec<(VarId, Vec<Value>)> = supported.clone();
    let values: Vec<Value> = {
        let all: BTreeSet<Value> = ext.iter().flat_map(|(_, d)| d.iter().copied()).collect();
        inst.values().iter().copied().filter(|v| all.contains(v)).collect()
    };
    let base = crate::domain::normalize(ext, Some(values), inst.budget(), Default::default())
        .expect("supported values form non-empty domains");
    NValueHac {
        status: HacStatus::Consistent,
        counts: counts.clone(),
        supported,
        filtered: Some(NValueInstance { base, counts }),
    }
}
