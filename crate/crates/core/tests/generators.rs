mod common;

use amnv::backdoor::CnfFormula;
use amnv::format::write_instance;
use amnv::domain::{normalize, NormalizeOptions};
use amnv::generate::{encode_cnf, gen_random, random_cnf, GenConfig, GenError};
use amnv::solve::is_consistent;
use amnv::Value;

use common::dpll;

#[test]
fn seeded_instance_is_stable() {
    let inst = gen_random(&GenConfig::new(5, 8, 2, 3, 7)).unwrap();
    let want = "p amnv 5 8 3\nv 1 2 3 4 5 6 7 8\nx 1 1 2\nx 2 3 5\nx 3 4 4\nx 4 1 2 5 6 8 8\nx 5 1 3\n";
    assert_eq!(write_instance(&inst, &[]), want);
}

#[test]
fn hole_counts_are_exact() {
    for seed in 0..200 {
        for (n, d, k) in [(1, 3, 1), (4, 5, 8), (10, 14, 6), (3, 20, 0)] {
            let mut cfg = GenConfig::new(n, d, k, 2, seed);
            cfg.max_len = 1 + seed as usize % 4;
            let inst = gen_random(&cfg).unwrap();
            assert_eq!(inst.holes(), k);
            assert_eq!(inst.num_vars(), n);
            assert_eq!(inst.num_values(), d);
        }
    }
}

#[test]
fn impossible_requests_fail() {
    assert!(matches!(
        gen_random(&GenConfig::new(2, 4, 3, 1, 0)),
        Err(GenError::TooManyHoles { cap: 2, .. })
    ));
    assert_eq!(gen_random(&GenConfig::new(2, 0, 0, 1, 0)), Err(GenError::NoValues));
}

#[test]
fn encoding_shape() {
    let f = CnfFormula::new(3, vec![vec![1, -2], vec![2, 3, -1]]);
    let inst = encode_cnf(&f).unwrap();
    assert_eq!(inst.num_vars(), 5);
    assert_eq!(inst.budget(), 3);
    let vals: Vec<i64> = inst.values().iter().map(|v| v.0).collect();
    assert_eq!(vals, vec![-3, -2, -1, 1, 2, 3]);
    assert_eq!(inst.domain(&inst.vars()[3]), vec![Value(-2), Value(1)]);
}

#[test]
fn encoding_tracks_satisfiability() {
    for seed in 0..300 {
        let n = 1 + seed as u32 % 6;
        let f = random_cnf(n, 1 + seed as usize % 12, 1..=3, seed);
        assert_eq!(is_consistent(&encode_cnf(&f).unwrap()), dpll(&f), "{:?}", f.clauses);
    }
}

#[test]
fn empty_clause_has_no_encoding() {
    assert!(encode_cnf(&CnfFormula::new(1, vec![vec![]])).is_err());
}

#[test]
fn minimal_instance() {
    let inst = gen_random(&GenConfig::new(1, 1, 0, 1, 0)).unwrap();
    assert_eq!(write_instance(&inst, &[]), "p amnv 1 1 1\nv 1\nx 1 1 1\n");
}

#[test]
fn generated_instances_are_normalized() {
    for seed in 1..=100 {
        let inst = gen_random(&GenConfig::new(7, 10, 5, 3, seed)).unwrap();
        let again = normalize(inst.extensive(), Some(inst.values().to_vec()), 3, NormalizeOptions::default()).unwrap();
        assert_eq!(again, inst);
        assert!(inst.vars().iter().all(|v| !v.spans().is_empty()));
    }
}

#[test]
fn encoding_examples() {
    let sat = CnfFormula::new(2, vec![vec![1, -2], vec![-1, 2]]);
    assert!(is_consistent(&encode_cnf(&sat).unwrap()));
    let unsat = CnfFormula::new(1, vec![vec![1], vec![-1]]);
    assert!(!is_consistent(&encode_cnf(&unsat).unwrap()));
    let unit = encode_cnf(&CnfFormula::new(1, vec![vec![1]])).unwrap();
    let report = amnv::solve(&unit).unwrap();
    assert_eq!(report.verdict.solution.unwrap().iter().collect::<Vec<_>>(), vec![Value(1)]);
}
