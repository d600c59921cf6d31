//! Oracles and instance builders shared by the integration tests. Everything
//! here works from the definitions, without the library's algorithms.

#![allow(dead_code)]

use std::collections::BTreeSet;

use amnv::backdoor::CnfFormula;
use amnv::domain::{normalize, Instance, NormalizeOptions, Value, VarId};

pub const RUNNING: &str = include_str!("../data/running.amnv");

pub fn running() -> Instance {
    amnv::format::parse_instance(RUNNING).unwrap()
}

/// Instance over `D = 1..=m` with domains given as bit masks (bit `i` is value `i + 1`).
pub fn from_masks(m: usize, masks: &[u64], budget: i64) -> Instance {
    let ext = masks
        .iter()
        .enumerate()
        .map(|(i, &mk)| {
            let dom = (0..m).filter(|b| mk >> b & 1 == 1).map(|b| Value(b as i64 + 1)).collect();
            (VarId(i as u32 + 1), dom)
        })
        .collect();
    normalize(ext, Some((1..=m as i64).map(Value).collect()), budget, NormalizeOptions::default()).unwrap()
}

/// Domain masks over value ranks.
pub fn masks_of(inst: &Instance) -> Vec<u64> {
    inst.vars()
        .iter()
        .map(|v| v.spans().iter().flat_map(|s| s.left..=s.right).fold(0u64, |a, r| a | 1 << r))
        .collect()
}

/// Smallest number of values meeting every domain, by enumerating subsets.
pub fn min_hitting(m: usize, masks: &[u64]) -> usize {
    if masks.is_empty() {
        return 0;
    }
    (1u64..1 << m)
        .filter(|s| masks.iter().all(|mk| mk & s != 0))
        .map(|s| s.count_ones() as usize)
        .min()
        .unwrap_or(usize::MAX)
}

/// Whether some set of at most `n` values meets every domain.
pub fn hitting_within(m: usize, masks: &[u64], n: i64) -> bool {
    (min_hitting(m, masks) as i64) <= n
}

/// Largest number of distinct values over all assignments, by enumeration.
pub fn max_distinct(m: usize, masks: &[u64]) -> usize {
    let _ = m;
    fn go(masks: &[u64], used: u64) -> usize {
        match masks.split_first() {
            None => used.count_ones() as usize,
            Some((&mk, rest)) => {
                let mut best = 0;
                let mut bits = mk;
                while bits != 0 {
                    let b = bits & bits.wrapping_neg();
                    best = best.max(go(rest, used | b));
                    bits ^= b;
                }
                best
            }
        }
    }
    go(masks, 0)
}

/// Every reachable number of distinct values, per (variable, value rank) choice.
pub fn reachable_counts(masks: &[u64]) -> Vec<Vec<BTreeSet<usize>>> {
    let n = masks.len();
    let mut out = vec![vec![BTreeSet::new(); 64]; n];
    fn go(masks: &[u64], i: usize, pick: &mut Vec<usize>, out: &mut Vec<Vec<BTreeSet<usize>>>) {
        if i == masks.len() {
            let used = pick.iter().fold(0u64, |a, &b| a | 1 << b).count_ones() as usize;
            for (x, &b) in pick.iter().enumerate() {
                out[x][b].insert(used);
            }
            return;
        }
        let mut bits = masks[i];
        while bits != 0 {
            let b = bits.trailing_zeros() as usize;
            pick.push(b);
            go(masks, i + 1, pick, out);
            pick.pop();
            bits &= bits - 1;
        }
    }
    go(masks, 0, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Plain DPLL with unit propagation.
pub fn dpll(f: &CnfFormula) -> bool {
    fn go(clauses: Vec<Vec<i32>>) -> bool {
        let mut clauses = clauses;
        loop {
            if clauses.is_empty() {
                return true;
            }
            if clauses.iter().any(|c| c.is_empty()) {
                return false;
            }
            match clauses.iter().find(|c| c.len() == 1) {
                Some(c) => {
                    let l = c[0];
                    clauses = assign(&clauses, l);
                }
                None => break,
            }
        }
        let l = clauses[0][0];
        go(assign(&clauses, l)) || go(assign(&clauses, -l))
    }
    fn assign(clauses: &[Vec<i32>], l: i32) -> Vec<Vec<i32>> {
        clauses
            .iter()
            .filter(|c| !c.contains(&l))
            .map(|c| c.iter().copied().filter(|&x| x != -l).collect())
            .collect()
    }
    go(f.clauses.clone())
}

/// Smallest vertex cover size by enumeration, given edges on `n` vertices.
pub fn min_vertex_cover(n: usize, edges: &[(usize, usize)]) -> usize {
    (0u32..1 << n)
        .filter(|s| edges.iter().all(|&(u, v)| s >> u & 1 == 1 || s >> v & 1 == 1))
        .map(|s| s.count_ones() as usize)
        .min()
        .unwrap_or(0)
}

/// Every multiset of `n` non-empty domains over `m` values, as mask vectors.
pub fn all_mask_multisets(m: usize, n: usize) -> Vec<Vec<u64>> {
    let top = (1u64 << m) - 1;
    let mut out = Vec::new();
    fn go(top: u64, n: usize, from: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for mk in from..=top {
            cur.push(mk);
            go(top, n, mk, cur, out);
            cur.pop();
        }
    }
    go(top, n, 1, &mut Vec::new(), &mut out);
    out
}
