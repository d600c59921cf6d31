//! Seeded instance generators and the CNF encoding.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::backdoor::CnfFormula;
use crate::domain::{normalize, Instance, InstanceError, NormalizeOptions, Span, Value, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenConfig {
    pub vars: usize,
    pub values: usize,
    pub holes: usize,
    pub budget: i64,
    pub seed: u64,
    /// Longest run of consecutive values in one interval.
    pub max_len: usize,
    /// Longest hole between two intervals of a variable.
    pub max_gap: usize,
}

impl GenConfig {
    pub fn new(vars: usize, values: usize, holes: usize, budget: i64, seed: u64) -> Self {
        GenConfig { vars, values, holes, budget, seed, max_len: 3, max_gap: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("{holes} holes do not fit: {vars} variables over {values} values allow at most {cap}")]
    TooManyHoles { holes: usize, vars: usize, values: usize, cap: usize },
    #[error("variables need at least one value")]
    NoValues,
    #[error("interval lengths must be positive")]
    ZeroLength,
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Random instance over `D = 1..=values` with exactly `holes` holes.
pub fn gen_random(cfg: &GenConfig) -> Result<Instance, GenError> {
    if cfg.vars > 0 && cfg.values == 0 {
        return Err(GenError::NoValues);
    }
    if cfg.max_len == 0 || cfg.max_gap == 0 {
        return Err(GenError::ZeroLength);
    }
    let per_var = cfg.values.saturating_sub(1) / 2;
    let cap = per_var * cfg.vars;
    if cfg.holes > cap {
        return Err(GenError::TooManyHoles { holes: cfg.holes, vars: cfg.vars, values: cfg.values, cap });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut holes = vec![0usize; cfg.vars];
    for _ in 0..cfg.holes {
        let mut x = rng.gen_range(0..cfg.vars);
        while holes[x] == per_var {
            x = (x + 1) % cfg.vars;
        }
        holes[x] += 1;
    }
    let d = cfg.values;
    let mut vars = Vec::with_capacity(cfg.vars);
    for (x, &h) in holes.iter().enumerate() {
        // Alternating run and gap lengths: run, gap, run, ..., run.
        let mut lens: Vec<usize> = (0..2 * h + 1)
            .map(|i| rng.gen_range(1..=if i % 2 == 0 { cfg.max_len } else { cfg.max_gap }))
            .collect();
        let mut total: usize = lens.iter().sum();
        while total > d {
            let shrinkable: Vec<usize> = (0..lens.len()).filter(|&i| lens[i] > 1).collect();
            let &i = shrinkable.choose(&mut rng).expect("2h + 1 <= d");
            lens[i] -= 1;
            total -= 1;
        }
        let mut at = rng.gen_range(0..=d - total);
        let mut spans = Vec::with_capacity(h + 1);
        for (i, &len) in lens.iter().enumerate() {
            if i % 2 == 0 {
                spans.push(Span::new(at, at + len - 1));
            }
            at += len;
        }
        vars.push((VarId(x as u32 + 1), spans));
    }
    let values = (1..=d as i64).map(Value).collect();
    Ok(Instance::from_spans(values, vars, cfg.budget)?)
}

/// AtMost-NValue instance that is consistent exactly when `f` is satisfiable.
///
/// Variable `i` of `f` becomes `x_i` with domain `{-i, i}`; clause `j`
/// becomes variable `n + j` whose domain holds its literals. `D` is
/// `-n..-1, 1..n` and the budget is `n`.
pub fn encode_cnf(f: &CnfFormula) -> Result<Instance, InstanceError> {
    let n = f.num_vars as i64;
    let values: Vec<Value> = (-n..=-1).chain(1..=n).map(Value).collect();
    let mut ext = Vec::with_capacity(f.num_vars as usize + f.clauses.len());
    for i in 1..=n {
        ext.push((VarId(i as u32), vec![Value(-i), Value(i)]));
    }
    for (j, c) in f.clauses.iter().enumerate() {
        let dom = c.iter().map(|&l| Value(l as i64)).collect();
        ext.push((VarId(f.num_vars + 1 + j as u32), dom));
    }
    normalize(ext, Some(values), n, NormalizeOptions::default())
}

/// Random CNF whose clauses have distinct variables and a width drawn from `widths`.
pub fn random_cnf(num_vars: u32, num_clauses: usize, widths: std::ops::RangeInclusive<usize>, seed: u64) -> CnfFormula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<i32> = (1..=num_vars as i32).collect();
    let clauses = (0..num_clauses)
        .map(|_| {
            let w = rng.gen_range(widths.clone()).min(num_vars as usize);
            pool.choose_multiple(&mut rng, w)
                .map(|&v| if rng.gen_bool(0.5) { v } else { -v })
                .collect()
        })
        .collect();
    CnfFormula::new(num_vars, clauses)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_holes_and_determinism() {
        for seed in 0..50 {
            let cfg = GenConfig::new(6, 9, 5, 3, seed);
            let a = gen_random(&cfg).unwrap();
            assert_eq!(a.holes(), 5);
            assert_eq!(a, gen_random(&cfg).unwrap());
        }
    }

    #[test]
    fn infeasible_config() {
        assert!(matches!(
            gen_random(&GenConfig::new(2, 3, 3, 1, 0)),
            Err(GenError::TooManyHoles { cap: 2, .. })
        ));
    }

    #[test]
    fn encoding_shape() {
        let f = CnfFormula::new(2, vec![vec![1, -2], vec![2]]);
        let inst = encode_cnf(&f).unwrap();
        assert_eq!(inst.values().len(), 4);
        assert_eq!(inst.num_vars(), 4);
        assert_eq!(inst.budget(), 2);
    }
}
