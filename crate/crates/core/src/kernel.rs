//! Polynomial kernel: reduce, scan with leaders and followers, merge, reduce again.

use std::fmt;

use crate::domain::{Instance, Span, Value, VarId};
use crate::reduce::{self, Event, MergePair, Outcome, ReductionLog, RuleSet};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KernelOptions {
    /// Also discard values whose variable set is contained in another value's.
    pub generalized_dom: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelStatus {
    Reduced,
    /// The reductions proved the instance inconsistent.
    Infeasible,
}

/// Size measurements of a kernel, checked against the bounds in `k`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Certificate {
    pub optional_intervals: usize,
    pub leaders: usize,
    pub max_followers: usize,
    pub intervals: usize,
    pub values: usize,
}

impl Certificate {
    /// Every bound that this certificate breaks for parameter `k`.
    pub fn violations(&self, k: usize) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |name: &str, got: usize, bound: usize| {
            if got > bound {
                out.push(format!("{name} = {got} exceeds {bound}"));
            }
        };
        check("optional intervals", self.optional_intervals, 2 * k);
        check("leaders", self.leaders, 4 * k);
        check("followers per leader", self.max_followers, 4 * k);
        check("intervals", self.intervals, 4 * k + 16 * k * k);
        check("values", self.values, 2 * self.intervals);
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KernelStats {
    pub selected: usize,
    pub discarded: usize,
    pub removed_vars: usize,
    pub merges: usize,
}

#[derive(Debug, Clone)]
pub struct Kernel {
    pub instance: Instance,
    pub log: ReductionLog,
    pub certificate: Certificate,
    pub status: KernelStatus,
    /// Holes of the input instance.
    pub input_holes: usize,
    pub stats: KernelStats,
}

impl Kernel {
    pub fn holes(&self) -> usize {
        self.instance.holes()
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "optional={} leaders={} max_followers={} intervals={} values={}",
            self.optional_intervals, self.leaders, self.max_followers, self.intervals, self.values
        )
    }
}

/// One variable, one value, budget zero: the fixed inconsistent instance.
pub fn no_instance() -> Instance {
    Instance::from_spans(vec![Value(0)], vec![(VarId(0), vec![Span::new(0, 0)])], 0)
        .expect("well formed")
}

pub fn kernelize(inst: &Instance) -> Kernel {
    kernelize_with(inst, KernelOptions::default())
}

pub fn kernelize_with(inst: &Instance, opts: KernelOptions) -> Kernel {
    let input_holes = inst.holes();
    let mut log = ReductionLog::new();
    let infeasible = |log: ReductionLog| {
        let stats = stats_of(&log);
        Kernel {
            instance: no_instance(),
            log,
            certificate: Certificate::default(),
            status: KernelStatus::Infeasible,
            input_holes,
            stats,
        }
    };

    let first = reduce::reduce(inst, RuleSet::ALL);
    log.extend(first.events);
    let Outcome::Reduced(reduced) = first.outcome else {
        return infeasible(log);
    };

    let scanned = scan(&reduced);
    log.extend(scanned.merges.into_iter().map(Event::Merge));
    let second = reduce::reduce(&scanned.instance, RuleSet::ALL);
    log.extend(second.events);
    let Outcome::Reduced(mut out) = second.outcome else {
        return infeasible(log);
    };

    if opts.generalized_dom {
        while let Some((next, ev)) = reduce::generalized_red_dom(&out) {
            log.push(ev);
            let again = reduce::reduce(&next, RuleSet::ALL);
            log.extend(again.events);
            match again.outcome {
                Outcome::Reduced(i) => out = i,
                Outcome::Infeasible => return infeasible(log),
            }
        }
    }

    let certificate = Certificate {
        optional_intervals: out
            .vars()
            .iter()
            .filter(|v| v.spans().len() > 1)
            .map(|v| v.spans().len())
            .sum(),
        leaders: scanned.leaders,
        max_followers: scanned.max_followers,
        intervals: out.num_intervals(),
        values: out.num_values(),
    };
    let stats = stats_of(&log);
    Kernel { instance: out, log, certificate, status: KernelStatus::Reduced, input_holes, stats }
}

fn stats_of(log: &ReductionLog) -> KernelStats {
    let mut s = KernelStats::default();
    for e in log.events() {
        match e {
            Event::Select(_) => s.selected += 1,
            Event::Discard { .. } => s.discarded += 1,
            Event::RemoveVariable(_) => s.removed_vars += 1,
            Event::Merge(_) => s.merges += 1,
        }
    }
    s
}

#[derive(Debug, Clone)]
pub struct ScanResult {
    pub instance: Instance,
    pub merges: Vec<Vec<MergePair>>,
    pub leaders: usize,
    pub max_followers: usize,
}

#[derive(Debug, Clone)]
struct ScanIv {
    var: VarId,
    span: Span,
    required: bool,
    alive: bool,
}

#[derive(Debug, Clone)]
struct Leader {
    iv: usize,
    followers: Vec<usize>,
}

impl Leader {
    fn prune(&mut self, ivs: &[ScanIv]) {
        self.followers.retain(|&f| ivs[f].alive);
    }

    /// Followers keep increasing right ends, so only the last can reach furthest.
    fn reaches(&self, ivs: &[ScanIv], s: &Span) -> bool {
        ivs[self.iv].span.intersects(s) || self.followers.last().is_some_and(|&f| ivs[f].span.intersects(s))
    }
}

/// Runs the leader/follower scan on a reduced instance and applies merges.
pub fn scan(inst: &Instance) -> ScanResult {
    let mut ivs: Vec<ScanIv> = inst
        .canonical_order()
        .into_iter()
        .map(|iv| ScanIv {
            var: iv.var,
            span: iv.span,
            required: iv.role == crate::domain::Role::Required,
            alive: true,
        })
        .collect();
    let mut leaders: Vec<Leader> = Vec::new();
    let mut merges = Vec::new();
    let mut budget = inst.budget();
    let mut last_scanned: Option<Span> = None;
    let mut i = 0;
    let mut in_block = true;
    while i < ivs.len() {
        if in_block || !ivs[i].required {
            loop {
                leaders.push(Leader { iv: i, followers: Vec::new() });
                last_scanned = Some(ivs[i].span);
                let req = ivs[i].required;
                i += 1;
                if req || i >= ivs.len() {
                    break;
                }
            }
            in_block = false;
            continue;
        }
        let p = last_scanned.expect("a leader precedes every follower");
        let cur = ivs[i].span;
        let popular: Vec<usize> =
            (0..leaders.len()).filter(|&l| leaders[l].reaches(&ivs, &p)).collect();
        for &l in &popular {
            if !leaders[l].reaches(&ivs, &cur) {
                leaders[l].followers.push(i);
            }
        }
        last_scanned = Some(cur);
        i += 1;
        let ready = !popular.is_empty()
            && budget > 0
            && popular.iter().all(|&l| leaders[l].followers.len() >= 2);
        if ready {
            merges.push(merge(&mut ivs, &mut leaders, &popular, inst));
            budget -= 1;
        }
    }
    let max_followers = leaders
        .iter_mut()
        .map(|l| {
            l.prune(&ivs);
            l.followers.len()
        })
        .max()
        .unwrap_or(0);
    let n_leaders = leaders.len();

    let mut by_var: std::collections::BTreeMap<VarId, Vec<Span>> = Default::default();
    for iv in ivs.iter().filter(|iv| iv.alive) {
        by_var.entry(iv.var).or_default().push(iv.span);
    }
    let instance = Instance::from_spans(inst.values().to_vec(), by_var.into_iter().collect(), budget)
        .expect("scan keeps the instance well formed");
    ScanResult { instance, merges, leaders: n_leaders, max_followers }
}

fn merge(ivs: &mut [ScanIv], leaders: &mut [Leader], popular: &[usize], inst: &Instance) -> Vec<MergePair> {
    let label = |s: Span| (inst.value(s.left), inst.value(s.right));
    let mut order: Vec<usize> = popular.to_vec();
    order.sort_by_key(|&l| (ivs[leaders[l].iv].var, ivs[leaders[l].iv].span.left));
    let mut pairs = Vec::with_capacity(order.len());
    let mut stretch: Vec<(usize, usize)> = Vec::new();
    let mut drop: Vec<usize> = Vec::new();
    for &l in &order {
        let f = &leaders[l].followers;
        let (second, last) = (f[f.len() - 2], f[f.len() - 1]);
        pairs.push(MergePair {
            leader: ivs[leaders[l].iv].var,
            second_last: ivs[second].var,
            second_last_span: label(ivs[second].span),
            last: ivs[last].var,
            last_span: label(ivs[last].span),
        });
        match stretch.iter_mut().find(|(iv, _)| *iv == second) {
            Some((_, r)) => *r = (*r).min(ivs[last].span.right),
            None => stretch.push((second, ivs[last].span.right)),
        }
        drop.push(last);
    }
    for (iv, r) in stretch {
        ivs[iv].span.right = r;
    }
    for iv in drop {
        ivs[iv].alive = false;
    }
    // A removed follower may also sit in lists of leaders that were not popular.
    for l in leaders.iter_mut() {
        l.prune(ivs);
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certificate_violations_listed() {
        let c = Certificate { optional_intervals: 3, leaders: 0, max_followers: 0, intervals: 3, values: 7 };
        let v = c.violations(1);
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn no_instance_is_inconsistent_shape() {
        let n = no_instance();
        assert_eq!(n.num_vars(), 1);
        assert_eq!(n.budget(), 0);
    }

    #[test]
    fn zero_holes_collapse() {
        let inst = Instance::from_pieces(
            (1..=4).map(Value).collect(),
            vec![
                (VarId(1), vec![(Value(1), Value(2))]),
                (VarId(2), vec![(Value(3), Value(4))]),
            ],
            2,
        )
        .unwrap();
        let k = kernelize(&inst);
        assert_eq!(k.status, KernelStatus::Reduced);
        assert!(k.instance.is_empty());
        assert!(k.certificate.violations(0).is_empty());
    }
}
