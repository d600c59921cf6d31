mod common;

use std::collections::BTreeSet;

use amnv::domain::{canonical_sort, Value, VarId};
use amnv::exec::Exec;
use amnv::format::{parse_instance, write_instance};
use amnv::kernel::{kernelize, kernelize_with, KernelOptions, KernelStatus};
use amnv::propagate::{
    enforce_hac_atmost, enforce_hac_nvalue, max_distinct_values, maximum_matching, nvalue_consistency, HacStatus,
    NValueInstance,
};
use amnv::reduce::{reduce, replay, ReductionLog, RuleSet};
use amnv::solve::{branch_consistency, brute_force_with, is_consistent, min_values, solve, validate_solution};
use proptest::prelude::*;

use common::*;

/// `(m, masks, budget)` with `m` values and one non-empty mask per variable.
fn masks_strategy(max_m: usize, max_n: usize) -> impl Strategy<Value = (usize, Vec<u64>, i64)> {
    (1..=max_m, 1..=max_n).prop_flat_map(|(m, n)| {
        (Just(m), prop::collection::vec(1u64..(1 << m), n), 0..=n as i64)
    })
}

fn runs(mask: u64) -> usize {
    (0..64).filter(|&b| mask >> b & 1 == 1 && (b == 0 || mask >> (b - 1) & 1 == 0)).count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn normalized_domains_match_masks((m, masks, n) in masks_strategy(9, 6)) {
        let inst = from_masks(m, &masks, n);
        prop_assert_eq!(masks_of(&inst), masks.clone());
        let holes: usize = masks.iter().map(|&mk| runs(mk) - 1).sum();
        prop_assert_eq!(inst.holes(), holes);
        prop_assert_eq!(inst.num_intervals(), inst.num_vars() + holes);
    }

    #[test]
    fn text_round_trip((m, masks, n) in masks_strategy(9, 6)) {
        let inst = from_masks(m, &masks, n);
        let text = write_instance(&inst, &["a comment".to_string()]);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(write_instance(&back, &["a comment".to_string()]), text);
    }

    #[test]
    fn canonical_order_is_sorted((m, masks, n) in masks_strategy(9, 6)) {
        let inst = from_masks(m, &masks, n);
        let got = canonical_sort(&inst);
        let mut want: Vec<_> = inst.intervals().collect();
        want.sort_by_key(|iv| (iv.span.right, iv.span.left, iv.var));
        prop_assert_eq!(got, want);
    }

    #[test]
    fn each_rule_set_preserves_consistency((m, masks, n) in masks_strategy(8, 6)) {
        let inst = from_masks(m, &masks, n);
        let truth = hitting_within(m, &masks, n);
        for rules in [RuleSet::SUBSET, RuleSet::DOM, RuleSet::UNIT, RuleSet::DOM_UNIT, RuleSet::ALL] {
            let red = reduce(&inst, rules);
            match red.outcome.instance() {
                Some(out) => {
                    let back = masks_of(out);
                    let k = out.num_values();
                    prop_assert_eq!(hitting_within(k, &back, out.budget()), truth);
                    prop_assert!(out.holes() <= inst.holes());
                    let mut log = ReductionLog::new();
                    log.extend(red.events.clone());
                    let replayed = replay(&inst, &log);
                    prop_assert_eq!(replayed.as_ref(), Some(out));
                }
                None => prop_assert!(!truth),
            }
        }
    }

    #[test]
    fn kernel_is_equivalent((m, masks, n) in masks_strategy(8, 6)) {
        let inst = from_masks(m, &masks, n);
        let truth = hitting_within(m, &masks, n);
        for opts in [KernelOptions::default(), KernelOptions { generalized_dom: true }] {
            let k = kernelize_with(&inst, opts);
            match k.status {
                KernelStatus::Reduced => {
                    prop_assert_eq!(is_consistent(&k.instance), truth);
                    prop_assert!(k.instance.budget() <= n);
                    prop_assert!(k.certificate.violations(inst.holes()).is_empty());
                    let replayed = replay(&inst, &k.log);
                    prop_assert_eq!(replayed.as_ref(), Some(&k.instance));
                }
                KernelStatus::Infeasible => prop_assert!(!truth),
            }
        }
    }

    #[test]
    fn solutions_are_valid_and_minimal((m, masks, n) in masks_strategy(8, 6)) {
        let inst = from_masks(m, &masks, n);
        let report = solve(&inst).unwrap();
        prop_assert_eq!(report.verdict.consistent, hitting_within(m, &masks, n));
        if let Some(s) = &report.verdict.solution {
            prop_assert!(validate_solution(&inst, s));
        }
        prop_assert_eq!(min_values(&inst), min_hitting(m, &masks));
        let (v, _) = branch_consistency(&inst);
        prop_assert_eq!(v.consistent, report.verdict.consistent);
    }

    #[test]
    fn exec_modes_agree((m, masks, n) in masks_strategy(8, 6)) {
        let inst = from_masks(m, &masks, n);
        prop_assert_eq!(brute_force_with(&inst, Exec::Sequential), brute_force_with(&inst, Exec::Parallel));
    }

    #[test]
    fn matching_is_maximum((m, masks, _n) in masks_strategy(8, 6)) {
        let inst = from_masks(m, &masks, 0);
        let mt = maximum_matching(&inst);
        let vals: BTreeSet<Value> = mt.pairs.iter().map(|p| p.1).collect();
        let vars: BTreeSet<VarId> = mt.pairs.iter().map(|p| p.0).collect();
        prop_assert_eq!(vals.len(), mt.size());
        prop_assert_eq!(vars.len(), mt.size());
        for (x, v) in &mt.pairs {
            prop_assert!(inst.domain(inst.var(*x).unwrap()).contains(v));
        }
        prop_assert_eq!(max_distinct_values(&inst), max_distinct(m, &masks));
    }

    #[test]
    fn hac_matches_selection_oracle((m, masks, n) in masks_strategy(8, 5)) {
        let inst = from_masks(m, &masks, n);
        let out = enforce_hac_atmost(&inst);
        let union = masks.iter().fold(0, |a, b| a | b);
        let want: Vec<Value> = (0..m)
            .filter(|&b| union >> b & 1 == 1 && n >= 1)
            .filter(|&b| {
                let rest: Vec<u64> = masks.iter().copied().filter(|mk| mk >> b & 1 == 0).collect();
                hitting_within(m, &rest, n - 1)
            })
            .map(|b| Value(b as i64 + 1))
            .collect();
        prop_assert_eq!(&out.supported, &want);
        prop_assert_eq!(out.status == HacStatus::Consistent, hitting_within(m, &masks, n));
        if let Some(f) = out.filtered {
            prop_assert!(is_consistent(&f));
            let again = enforce_hac_atmost(&f);
            prop_assert_eq!(&again.supported, &out.supported);
            prop_assert_eq!(again.filtered.as_ref(), Some(&f));
        }
    }

    #[test]
    fn nvalue_hac_matches_enumeration(
        (m, masks, _n) in masks_strategy(6, 4),
        counts in prop::collection::btree_set(0i64..6, 1..4),
    ) {
        let inst = from_masks(m, &masks, 0);
        let reach = reachable_counts(&masks);
        let nv = NValueInstance { base: inst, counts: counts.clone() };
        let any = reach[0].iter().flatten().any(|c| counts.contains(&(*c as i64)));
        prop_assert_eq!(nvalue_consistency(&nv), any);
        let out = enforce_hac_nvalue(&nv);
        prop_assert_eq!(out.status == HacStatus::Consistent, any);
        if any {
            for (x, (id, vals)) in out.supported.iter().enumerate() {
                prop_assert_eq!(*id, VarId(x as u32 + 1));
                let want: Vec<Value> = (0..m)
                    .filter(|&b| reach[x][b].iter().any(|c| counts.contains(&(*c as i64))))
                    .map(|b| Value(b as i64 + 1))
                    .collect();
                prop_assert_eq!(vals, &want);
            }
        }
    }
}

#[test]
fn kernel_replays_on_running_example() {
    let inst = running();
    let k = kernelize(&inst);
    assert_eq!(replay(&inst, &k.log).unwrap(), k.instance);
}
