use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use amnv::backdoor::{
    brute_backdoor_check, horn_backdoor_kernel, parse_dimacs, twocnf_backdoor_kernel, BaseClass, CnfFormula,
};
use amnv::format::{parse_instance, write_instance, write_kernel};
use amnv::generate::{encode_cnf, gen_random, GenConfig};
use amnv::kernel::{kernelize_with, KernelOptions, KernelStatus};
use amnv::propagate::{enforce_hac_atmost, enforce_hac_nvalue, nvalue_consistency, HacStatus, NValueInstance};
use amnv::solve::{brute_force_consistency, greedy_intervals, solve, TreeStats, Verdict};
use amnv::{Instance, Solution};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

/// Kernelization, consistency and filtering for AtMost-NValue.
#[derive(Parser)]
#[command(name = "amnv", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide whether an instance is consistent.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Auto)]
        algo: Algo,
        #[arg(long)]
        stats: bool,
        #[arg(long)]
        json: bool,
    },
    /// Reduce an instance to a kernel and write it with its log.
    Kernelize {
        file: PathBuf,
        /// Also discard values whose variables are covered by another value.
        #[arg(long)]
        generalized: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        stats: bool,
        #[arg(long)]
        json: bool,
    },
    /// Filter values that belong to no solution.
    Hac {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// NValue: the number of distinct values must be one of `counts`.
    Nvalue {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        counts: Vec<i64>,
        /// Print supported values per variable.
        #[arg(long)]
        hac: bool,
        #[arg(long)]
        json: bool,
    },
    /// Generate a random instance with an exact number of holes.
    Gen {
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        values: usize,
        #[arg(long, default_value_t = 0)]
        holes: usize,
        #[arg(long)]
        budget: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        max_len: usize,
        #[arg(long, default_value_t = 3)]
        max_gap: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Encode a DIMACS CNF formula as an instance.
    EncodeCnf {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Kernelize or decide strong backdoor detection into Horn or 2CNF.
    Backdoor {
        file: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum)]
        class: Class,
        /// Search for a backdoor instead of writing the kernel.
        #[arg(long)]
        decide: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Greedy,
    Brute,
    Branch,
    Auto,
}

#[derive(Clone, Copy, ValueEnum)]
enum Class {
    Horn,
    #[value(name = "2cnf")]
    TwoCnf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read_input(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load(path: &Path) -> Result<Instance> {
    let text = read_input(path)?;
    parse_instance(&text).with_context(|| format!("{}", path.display()))
}

fn load_cnf(path: &Path) -> Result<CnfFormula> {
    let text = read_input(path)?;
    parse_dimacs(&text).with_context(|| format!("{}", path.display()))
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn values_json(s: &Solution) -> Json {
    json!(s.iter().map(|v| v.0).collect::<Vec<_>>())
}

fn tree_json(t: &TreeStats) -> Json {
    json!({
        "nodes": t.nodes,
        "leaves": t.leaves,
        "max_depth": t.max_depth,
        "fallbacks": t.fallbacks,
        "root_holes": t.root_holes,
    })
}

fn run(cmd: Cmd) -> Result<bool> {
    match cmd {
        Cmd::Check { file, algo, stats, json } => check(&load(&file)?, algo, stats, json),
        Cmd::Kernelize { file, generalized, output, stats, json } => {
            let inst = load(&file)?;
            let k = kernelize_with(&inst, KernelOptions { generalized_dom: generalized });
            let ok = k.status == KernelStatus::Reduced;
            let violations = if ok { k.certificate.violations(inst.holes()) } else { Vec::new() };
            if json {
                let report = json!({
                    "status": format!("{:?}", k.status),
                    "k": k.input_holes,
                    "kernel_holes": k.holes(),
                    "vars": k.instance.num_vars(),
                    "values": k.instance.num_values(),
                    "budget": k.instance.budget(),
                    "intervals": { "input": inst.num_intervals(), "kernel": k.instance.num_intervals() },
                    "certificate": {
                        "optional_intervals": k.certificate.optional_intervals,
                        "leaders": k.certificate.leaders,
                        "max_followers": k.certificate.max_followers,
                        "intervals": k.certificate.intervals,
                        "values": k.certificate.values,
                        "violations": violations,
                    },
                    "log": k.log.lines().collect::<Vec<_>>(),
                });
                if let Some(p) = &output {
                    emit(Some(p), &write_kernel(&k))?;
                }
                println!("{report}");
            } else {
                emit(output.as_deref(), &write_kernel(&k))?;
                if stats {
                    eprintln!("c k {}", k.input_holes);
                    eprintln!("c intervals {} -> {}", inst.num_intervals(), k.instance.num_intervals());
                    eprintln!("c certificate {}", k.certificate);
                    for v in &violations {
                        eprintln!("c violation {v}");
                    }
                }
            }
            Ok(ok)
        }
        Cmd::Hac { file, output, json } => {
            let inst = load(&file)?;
            let out = enforce_hac_atmost(&inst);
            let ok = out.status == HacStatus::Consistent;
            let supported: Vec<i64> = out.supported.iter().map(|v| v.0).collect();
            if json {
                println!("{}", json!({ "consistent": ok, "supported": supported }));
                if let (Some(p), Some(f)) = (&output, &out.filtered) {
                    emit(Some(p), &write_instance(f, &[]))?;
                }
            } else {
                let line = supported.iter().map(i64::to_string).collect::<Vec<_>>().join(" ");
                let text = match &out.filtered {
                    Some(f) => write_instance(f, &[format!("supported {line}")]),
                    None => "c failed\n".to_string(),
                };
                emit(output.as_deref(), &text)?;
            }
            Ok(ok)
        }
        Cmd::Nvalue { file, counts, hac, json } => {
            let nv = NValueInstance { base: load(&file)?, counts: counts.into_iter().collect() };
            if !hac {
                let ok = nvalue_consistency(&nv);
                if json {
                    println!("{}", json!({ "consistent": ok }));
                } else {
                    println!("s {}", if ok { "CONSISTENT" } else { "INCONSISTENT" });
                }
                return Ok(ok);
            }
            let out = enforce_hac_nvalue(&nv);
            let ok = out.status == HacStatus::Consistent;
            if json {
                let per: Vec<Json> = out
                    .supported
                    .iter()
                    .map(|(x, vs)| json!({ "var": x.0, "values": vs.iter().map(|v| v.0).collect::<Vec<_>>() }))
                    .collect();
                println!("{}", json!({ "consistent": ok, "counts": out.counts, "supported": per }));
            } else {
                println!("s {}", if ok { "CONSISTENT" } else { "INCONSISTENT" });
                if ok {
                    let cs: Vec<String> = out.counts.iter().map(i64::to_string).collect();
                    println!("n {}", cs.join(" "));
                    for (x, vs) in &out.supported {
                        let vs: Vec<String> = vs.iter().map(|v| v.0.to_string()).collect();
                        println!("x {} {}", x.0, vs.join(" "));
                    }
                }
            }
            Ok(ok)
        }
        Cmd::Gen { vars, values, holes, budget, seed, max_len, max_gap, output } => {
            let mut cfg = GenConfig::new(vars, values, holes, budget, seed);
            cfg.max_len = max_len;
            cfg.max_gap = max_gap;
            let inst = gen_random(&cfg)?;
            emit(output.as_deref(), &write_instance(&inst, &[format!("seed {seed}")]))?;
            Ok(true)
        }
        Cmd::EncodeCnf { file, output } => {
            let f = load_cnf(&file)?;
            let inst = encode_cnf(&f)?;
            emit(output.as_deref(), &write_instance(&inst, &[]))?;
            Ok(true)
        }
        Cmd::Backdoor { file, k, class, decide, output, json } => {
            let f = load_cnf(&file)?;
            let base = match class {
                Class::Horn => BaseClass::Horn,
                Class::TwoCnf => BaseClass::TwoCnf,
            };
            if decide {
                let found = brute_backdoor_check(&f, k, base);
                if json {
                    println!("{}", json!({ "backdoor": found }));
                } else {
                    match &found {
                        Some(b) => {
                            let vs: Vec<String> = b.iter().map(u32::to_string).collect();
                            println!("s YES\nb {}", vs.join(" "));
                        }
                        None => println!("s NO"),
                    }
                }
                return Ok(found.is_some());
            }
            let ker = match base {
                BaseClass::Horn => horn_backdoor_kernel(&f, k),
                BaseClass::TwoCnf => twocnf_backdoor_kernel(&f, k),
            };
            if json {
                println!(
                    "{}",
                    json!({
                        "budget": ker.budget,
                        "forced": ker.forced,
                        "map": ker.var_map,
                        "rejected": ker.rejected,
                        "vars": ker.formula.num_vars,
                        "clauses": ker.formula.clauses.len(),
                    })
                );
                if let Some(p) = &output {
                    emit(Some(p), &ker.to_dimacs())?;
                }
            } else {
                emit(output.as_deref(), &ker.to_dimacs())?;
            }
            Ok(!ker.rejected)
        }
    }
}

fn check(inst: &Instance, algo: Algo, stats: bool, as_json: bool) -> Result<bool> {
    let t = Instant::now();
    let use_greedy = match algo {
        Algo::Greedy => true,
        Algo::Auto => inst.holes() == 0,
        _ => false,
    };
    let (verdict, extra): (Verdict, Json) = if use_greedy {
        (greedy_intervals(inst)?, json!({ "algo": "greedy" }))
    } else {
        match algo {
            Algo::Brute => (brute_force_consistency(inst), json!({ "algo": "brute" })),
            Algo::Greedy => bail!("unreachable"),
            Algo::Branch | Algo::Auto => {
                let report = solve(inst)?;
                let extra = json!({
                    "algo": "branch",
                    "kernel": {
                        "status": format!("{:?}", report.kernel.status),
                        "vars": report.kernel.instance.num_vars(),
                        "values": report.kernel.instance.num_values(),
                        "budget": report.kernel.instance.budget(),
                        "holes": report.kernel.holes(),
                    },
                    "tree": tree_json(&report.tree),
                });
                (report.verdict, extra)
            }
        }
    };
    let ms = t.elapsed().as_secs_f64() * 1e3;
    if as_json {
        let sol = verdict.solution.as_ref().map(values_json).unwrap_or(Json::Null);
        println!(
            "{}",
            json!({
                "consistent": verdict.consistent,
                "solution": sol,
                "k": inst.holes(),
                "budget": inst.budget(),
                "stats": extra,
                "time_ms": ms,
            })
        );
    } else {
        println!("s {}", if verdict.consistent { "CONSISTENT" } else { "INCONSISTENT" });
        if let Some(s) = &verdict.solution {
            println!("v {s}");
        }
        if stats {
            println!("c k {}", inst.holes());
            println!("c stats {extra}");
            println!("c time_ms {ms:.3}");
        }
    }
    Ok(verdict.consistent)
}
