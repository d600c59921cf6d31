//! Kernels for deletion backdoors of CNF formulas into Horn and 2CNF.
//!
//! Horn backdoors of `F` are the vertex covers of the graph joining variables
//! that occur positively in a common clause. 2CNF backdoors are the hitting
//! sets of the triples of variables sharing a clause.

mod cnf;

use std::collections::{BTreeMap, BTreeSet};

pub use cnf::{parse_dimacs, BaseClass, CnfFormula, DimacsError};

use crate::exec::Exec;

/// Simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<BTreeSet<usize>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph { adj: vec![BTreeSet::new(); n] }
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u != v {
            self.adj[u].insert(v);
            self.adj[v].insert(u);
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, ns) in self.adj.iter().enumerate() {
            out.extend(ns.range(u + 1..).map(|&v| (u, v)));
        }
        out
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }
}

/// Vertex `i - 1` stands for variable `i`; edges join variables occurring
/// positively in one clause.
pub fn build_cograph(f: &CnfFormula) -> Graph {
    let mut g = Graph::new(f.num_vars as usize);
    for c in &f.normalized().clauses {
        let pos: Vec<usize> = c.iter().filter(|&&l| l > 0).map(|&l| l as usize - 1).collect();
        for (i, &u) in pos.iter().enumerate() {
            for &v in &pos[i + 1..] {
                g.add_edge(u, v);
            }
        }
    }
    g
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BussOutcome {
    Kernel {
        graph: Graph,
        budget: usize,
        /// Vertices of degree above `k`, which every small cover contains.
        forced: Vec<usize>,
        /// Original vertex behind each kernel vertex.
        kept: Vec<usize>,
    },
    Reject,
}

/// Buss' kernel for vertex cover.
pub fn buss_kernel(g: &Graph, k: usize) -> BussOutcome {
    let forced: Vec<usize> = (0..g.num_vertices()).filter(|&v| g.degree(v) > k).collect();
    if forced.len() > k {
        return BussOutcome::Reject;
    }
    let rest = k - forced.len();
    let gone: BTreeSet<usize> = forced.iter().copied().collect();
    let edges: Vec<(usize, usize)> =
        g.edges().into_iter().filter(|(u, v)| !gone.contains(u) && !gone.contains(v)).collect();
    if edges.len() > k * rest {
        return BussOutcome::Reject;
    }
    let kept: Vec<usize> = edges
        .iter()
        .flat_map(|&(u, v)| [u, v])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let pos: BTreeMap<usize, usize> = kept.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut graph = Graph::new(kept.len());
    for (u, v) in edges {
        graph.add_edge(pos[&u], pos[&v]);
    }
    BussOutcome::Kernel { graph, budget: rest, forced, kept }
}

/// Hypergraph with edges of two or three vertices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Hypergraph {
    pub num_vertices: usize,
    pub edges: BTreeSet<Vec<usize>>,
}

/// Vertex `i - 1` stands for variable `i`; one edge per triple of distinct
/// variables sharing a clause.
pub fn build_triple_hypergraph(f: &CnfFormula) -> Hypergraph {
    let mut edges = BTreeSet::new();
    for c in &f.normalized().clauses {
        let vs: Vec<usize> = CnfFormula::clause_vars(c).into_iter().map(|v| v as usize - 1).collect();
        for a in 0..vs.len() {
            for b in a + 1..vs.len() {
                for d in b + 1..vs.len() {
                    edges.insert(vec![vs[a], vs[b], vs[d]]);
                }
            }
        }
    }
    Hypergraph { num_vertices: f.num_vars as usize, edges }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HsOutcome {
    Kernel { hypergraph: Hypergraph, budget: usize, forced: Vec<usize> },
    Reject,
}

/// Kernel for 3-hitting set: edge domination, the pair rule, the element
/// rule, and a final size check.
pub fn hs3_kernel(h: &Hypergraph, k: usize) -> HsOutcome {
    let mut edges = h.edges.clone();
    let mut k = k as i64;
    let mut forced = Vec::new();
    loop {
        let pairs: BTreeSet<Vec<usize>> = edges.iter().filter(|e| e.len() == 2).cloned().collect();
        edges.retain(|e| e.len() < 3 || !pair_subsets(e).iter().any(|p| pairs.contains(p)));

        let mut by_pair: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for e in edges.iter().filter(|e| e.len() == 3) {
            for p in pair_subsets(e) {
                *by_pair.entry(p).or_default() += 1;
            }
        }
        if let Some((p, _)) = by_pair.iter().find(|(_, &c)| c as i64 > k) {
            let p = p.clone();
            edges.retain(|e| !(e.len() == 3 && p.iter().all(|v| e.contains(v))));
            edges.insert(p);
            continue;
        }

        let mut deg2 = vec![0i64; h.num_vertices];
        let mut deg3 = vec![0i64; h.num_vertices];
        for e in &edges {
            let d = if e.len() == 2 { &mut deg2 } else { &mut deg3 };
            e.iter().for_each(|&v| d[v] += 1);
        }
        let heavy = (0..h.num_vertices).find(|&v| deg2[v] > k || deg3[v] > k * k);
        if let Some(u) = heavy {
            edges.retain(|e| !e.contains(&u));
            forced.push(u);
            k -= 1;
            if k < 0 {
                return HsOutcome::Reject;
            }
            continue;
        }
        break;
    }
    if !edges.is_empty() && (k == 0 || edges.len() as i64 > k * k + k * k * k) {
        return HsOutcome::Reject;
    }
    HsOutcome::Kernel {
        hypergraph: Hypergraph { num_vertices: h.num_vertices, edges },
        budget: k as usize,
        forced,
    }
}

fn pair_subsets(e: &[usize]) -> Vec<Vec<usize>> {
    if e.len() == 2 {
        return vec![e.to_vec()];
    }
    vec![vec![e[0], e[1]], vec![e[0], e[2]], vec![e[1], e[2]]]
}

/// A backdoor kernel as a formula plus a new budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackdoorKernel {
    pub formula: CnfFormula,
    pub budget: usize,
    /// Original variables that belong to every small backdoor.
    pub forced: Vec<u32>,
    /// Original variable behind kernel variable `i + 1`; fresh gadget
    /// variables have no entry.
    pub var_map: Vec<u32>,
    /// The kernelization proved the answer is no.
    pub rejected: bool,
}

impl BackdoorKernel {
    pub fn comments(&self) -> Vec<String> {
        let forced: Vec<String> = self.forced.iter().map(u32::to_string).collect();
        let map: Vec<String> = self.var_map.iter().map(u32::to_string).collect();
        vec![
            format!("k' {}", self.budget),
            format!("forced {}", forced.join(" ")),
            format!("map {}", map.join(" ")),
            format!("rejected {}", self.rejected),
        ]
    }

    pub fn to_dimacs(&self) -> String {
        self.formula.to_dimacs(&self.comments())
    }
}

/// Kernel for "does `f` have a Horn backdoor of size at most `k`".
pub fn horn_backdoor_kernel(f: &CnfFormula, k: usize) -> BackdoorKernel {
    match buss_kernel(&build_cograph(f), k) {
        BussOutcome::Reject => BackdoorKernel {
            formula: CnfFormula::new(2, vec![vec![1, 2]]),
            budget: 0,
            forced: Vec::new(),
            var_map: Vec::new(),
            rejected: true,
        },
        BussOutcome::Kernel { graph, budget, forced, kept } => BackdoorKernel {
            formula: CnfFormula::new(
                kept.len() as u32,
                graph.edges().into_iter().map(|(u, v)| vec![u as i32 + 1, v as i32 + 1]).collect(),
            ),
            budget,
            forced: forced.iter().map(|&v| v as u32 + 1).collect(),
            var_map: kept.iter().map(|&v| v as u32 + 1).collect(),
            rejected: false,
        },
    }
}

/// Kernel for "does `f` have a 2CNF backdoor of size at most `k`".
///
/// Two-vertex edges are encoded with `k' + 1` shared fresh variables `w_i`
/// as clauses `u ∨ v ∨ w_i`; a small set misses some `w_i`, so it must hit
/// `u` or `v`.
pub fn twocnf_backdoor_kernel(f: &CnfFormula, k: usize) -> BackdoorKernel {
    match hs3_kernel(&build_triple_hypergraph(f), k) {
        HsOutcome::Reject => BackdoorKernel {
            formula: CnfFormula::new(3, vec![vec![1, 2, 3]]),
            budget: 0,
            forced: Vec::new(),
            var_map: Vec::new(),
            rejected: true,
        },
        HsOutcome::Kernel { hypergraph, budget, forced } => {
            let kept: Vec<usize> =
                hypergraph.edges.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect();
            let pos: BTreeMap<usize, i32> = kept.iter().enumerate().map(|(i, &v)| (v, i as i32 + 1)).collect();
            let has_pairs = hypergraph.edges.iter().any(|e| e.len() == 2);
            let fresh = if has_pairs { budget + 1 } else { 0 };
            let base = kept.len() as i32;
            let mut clauses = Vec::new();
            for e in &hypergraph.edges {
                let lits: Vec<i32> = e.iter().map(|v| pos[v]).collect();
                if lits.len() == 3 {
                    clauses.push(lits);
                } else {
                    for w in 1..=fresh as i32 {
                        clauses.push(vec![lits[0], lits[1], base + w]);
                    }
                }
            }
            BackdoorKernel {
                formula: CnfFormula::new((kept.len() + fresh) as u32, clauses),
                budget,
                forced: forced.iter().map(|&v| v as u32 + 1).collect(),
                var_map: kept.iter().map(|&v| v as u32 + 1).collect(),
                rejected: false,
            }
        }
    }
}

/// `true` if every assignment to `b` leaves a formula in `class`.
pub fn is_backdoor(f: &CnfFormula, b: &[u32], class: BaseClass) -> bool {
    assert!(b.len() < 32);
    (0u32..1 << b.len()).all(|bits| {
        let reduct = f.reduct(|v| b.iter().position(|&x| x == v).map(|i| bits >> i & 1 == 1));
        reduct.in_class(class)
    })
}

/// Smallest-first search for a backdoor of size at most `k`, straight from
/// the definition. Exponential; meant for small formulas.
pub fn brute_backdoor_check(f: &CnfFormula, k: usize, class: BaseClass) -> Option<Vec<u32>> {
    brute_backdoor_check_with(f, k, class, Exec::default())
}

pub fn brute_backdoor_check_with(f: &CnfFormula, k: usize, class: BaseClass, exec: Exec) -> Option<Vec<u32>> {
    let f = f.normalized();
    let vars: Vec<u32> = f
        .clauses
        .iter()
        .flat_map(|c| c.iter().map(|l| l.unsigned_abs()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    for size in 0..=k.min(vars.len()) {
        let cands = combinations(&vars, size);
        let ok = exec.map(&cands, |b| is_backdoor(&f, b, class));
        if let Some(i) = ok.iter().position(|&x| x) {
            return Some(cands[i].clone());
        }
    }
    None
}

fn combinations(items: &[u32], size: usize) -> Vec<Vec<u32>> {
    let n = items.len();
    let mut out = Vec::new();
    if size > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let mut i = size;
        while i > 0 && idx[i - 1] == n - size + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combos() {
        assert_eq!(combinations(&[1, 2, 3], 2), vec![vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(combinations(&[1, 2], 0), vec![Vec::<u32>::new()]);
        assert_eq!(combinations(&[1, 2, 3], 3).len(), 1);
    }

    #[test]
    fn star_has_forced_centre() {
        let mut g = Graph::new(5);
        for v in 1..5 {
            g.add_edge(0, v);
        }
        match buss_kernel(&g, 2) {
            BussOutcome::Kernel { graph, budget, forced, .. } => {
                assert_eq!(forced, vec![0]);
                assert_eq!(budget, 1);
                assert_eq!(graph.num_edges(), 0);
            }
            BussOutcome::Reject => panic!("a star has a cover of size one"),
        }
    }

    #[test]
    fn horn_small() {
        let f = CnfFormula::new(3, vec![vec![1, 2, 3]]);
        assert_eq!(brute_backdoor_check(&f, 1, BaseClass::Horn), None);
        assert_eq!(brute_backdoor_check(&f, 2, BaseClass::Horn), Some(vec![1, 2]));
        assert_eq!(brute_backdoor_check(&f, 1, BaseClass::TwoCnf), Some(vec![1]));
    }

    #[test]
    fn pair_rule_collapses() {
        let mut h = Hypergraph { num_vertices: 6, edges: BTreeSet::new() };
        for w in 2..6 {
            h.edges.insert(vec![0, 1, w]);
        }
        match hs3_kernel(&h, 2) {
            HsOutcome::Kernel { hypergraph, budget, .. } => {
                assert_eq!(budget, 2);
                assert_eq!(hypergraph.edges.iter().cloned().collect::<Vec<_>>(), vec![vec![0, 1]]);
            }
            HsOutcome::Reject => panic!("{{0}} hits everything"),
        }
    }
}
