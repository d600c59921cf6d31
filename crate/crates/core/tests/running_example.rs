mod common;

use amnv::domain::{Solution, Value, VarId};
use amnv::kernel::{kernelize, KernelStatus};
use amnv::reduce::{replay, Event, MergePair};
use amnv::solve::{branch_consistency, reconstruct, solve, validate_solution};
use common::running;

fn vals(xs: &[i64]) -> Solution {
    xs.iter().map(|&v| Value(v)).collect()
}

#[test]
fn kernel_trace() {
    let k = kernelize(&running());
    assert_eq!(k.status, KernelStatus::Reduced);
    let lines: Vec<String> = k.log.lines().collect();
    assert_eq!(lines, ["r 5", "r 8", "d 1", "d 5", "s 2", "d 3", "m 3 6 9 4 7 10", "d 7", "d 8"]);
    let Event::Merge(pairs) = &k.log.events()[6] else { panic!("expected a merge") };
    assert_eq!(
        pairs[0],
        MergePair {
            leader: VarId(3),
            second_last: VarId(6),
            second_last_span: (Value(6), Value(7)),
            last: VarId(9),
            last_span: (Value(8), Value(9)),
        }
    );
}

#[test]
fn kernel_instance() {
    let k = kernelize(&running());
    let text = amnv::format::write_instance(&k.instance, &[]);
    let expected = "p amnv 9 8 4\nv 4 6 9 10 11 12 13 14\n\
        x 3 4 4 10 11\nx 4 4 6\nx 6 6 9\nx 7 9 10\n\
        x 11 11 11 13 13\nx 12 11 12\nx 13 12 12 14 14\nx 14 12 13\nx 15 13 14\n";
    assert_eq!(text, expected);
    assert_eq!(k.holes(), 3);
    assert!(k.certificate.violations(5).is_empty());
    assert_eq!(replay(&running(), &k.log).unwrap(), k.instance);
}

#[test]
fn search_and_lift() {
    let inst = running();
    let k = kernelize(&inst);
    let (v, tree) = branch_consistency(&k.instance);
    assert_eq!(v.solution, Some(vals(&[4, 9, 12, 13])));
    assert!(tree.leaves <= amnv::solve::leaf_bound(3));
    let lifted = reconstruct(&vals(&[4, 9, 12, 13]), &k.log, &inst).unwrap();
    assert_eq!(lifted, vals(&[2, 4, 7, 9, 12, 13]));

    let report = solve(&inst).unwrap();
    assert!(report.verdict.consistent);
    let s = report.verdict.solution.unwrap();
    assert_eq!(s, vals(&[2, 4, 7, 9, 12, 13]));
    assert!(validate_solution(&inst, &s));
}

#[test]
fn tighter_budget_fails() {
    let inst = running().with_budget(5).unwrap();
    assert!(!solve(&inst).unwrap().verdict.consistent);
    assert!(!amnv::solve::brute_force_consistency(&inst).consistent);
}
