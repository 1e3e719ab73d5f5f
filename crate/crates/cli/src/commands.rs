use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use cqcount::automata::{count_answers_fhw_pipeline_with_limits, AutomatonLimits};
use cqcount::homsolver::enumerate_answers_with_limit;
use cqcount::qmodel::{
    build_hypergraph, gen_hampath, gen_li_hom, gen_random, parse_query, query_size, validate_pair, Database, Graph,
    Query, RandomParams,
};
use cqcount::reduction::{approx_count_answers_with, ApproxConfig, HomBackend};
use cqcount::widths::{
    fhw_exact_small_with_limit, fhw_of_td, fractional_edge_cover_number, td_width, treewidth_exact_with_limit,
    treewidth_heuristic, TreeDecomposition,
};
use cqcount::{Error, Rational};
use serde_json::{json, Value};

use crate::limits::Limits;
use crate::report::{ApproxParams, Method, PipelineWidths, RunReport};
use crate::{AnalyzeArgs, CountArgs, GenKind, Invalid, OutFormat};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_query(path: &Path) -> Result<Query> {
    parse_query(&read(path)?).with_context(|| format!("query file {}", path.display()))
}

fn load_db(path: &Path) -> Result<Database> {
    Database::from_json(&read(path)?).with_context(|| format!("database file {}", path.display()))
}

fn load_graph(path: &Path) -> Result<Graph> {
    Graph::parse(&read(path)?).with_context(|| format!("graph file {}", path.display()))
}

fn ratio(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn td_value(td: &TreeDecomposition) -> Value {
    serde_json::from_str(&td.to_json()).expect("decompositions serialize to JSON")
}

pub fn count(args: &CountArgs, verbose: bool) -> Result<String> {
    let mut limits = Limits::load()?;
    if let Some(v) = args.brute_force_limit {
        limits.brute_force = v;
    }
    if let Some(v) = args.max_oracle_calls {
        limits.oracle_calls = v;
    }
    if let Some(v) = args.max_bag_solutions {
        limits.bag_solutions = v;
    }
    if args.method.is_approximate() {
        if args.seed.is_none() {
            return Err(Invalid("approximate counting needs --seed".into()).into());
        }
        for (name, x) in [("epsilon", args.epsilon), ("delta", args.delta)] {
            if !(x > 0.0 && x < 1.0) {
                return Err(Invalid(format!("--{name} must lie in (0, 1), got {x}")).into());
            }
        }
    }
    let q = load_query(&args.query)?;
    let d = load_db(&args.db)?;
    validate_pair(&q, &d).context("query and database do not match")?;
    if verbose {
        eprintln!("query {} with {} variables ({} free), {} relations", q.name(), q.num_vars(), q.num_free(), d.relations().len());
    }

    let start = Instant::now();
    let mut report = RunReport {
        method: args.method,
        query: args.query.display().to_string(),
        database: args.db.display().to_string(),
        count: None,
        estimate: None,
        approx: None,
        widths: None,
        duration_ms: 0.0,
    };
    match args.method {
        Method::Exact => {
            let answers = enumerate_answers_with_limit(&q, &d, limits.brute_force)?;
            report.count = Some(answers.len() as u128);
        }
        Method::Fptras => {
            let seed = args.seed.expect("checked above");
            let backend = HomBackend::from(args.hom_backend);
            let config = ApproxConfig {
                max_call_cap: limits.oracle_calls,
                ..ApproxConfig::default()
            };
            let out = approx_count_answers_with(&q, &d, args.epsilon, args.delta, backend, seed, &config)?;
            if verbose {
                eprintln!(
                    "{} hom calls, {} restarts, final call cap {}",
                    out.stats.hom_calls, out.stats.restarts, out.call_cap
                );
            }
            report.estimate = Some(out.estimate);
            report.approx = Some(ApproxParams {
                epsilon: args.epsilon,
                delta: args.delta,
                seed,
                hom_backend: backend.to_string(),
                exact_path: out.exact_path,
                call_cap: out.call_cap,
                per_call_delta: out.per_call_delta,
                walks: out.estimator.walks,
                oracle: out.stats,
            });
        }
        Method::Fhw => {
            let al = AutomatonLimits {
                max_bag_solutions: limits.bag_solutions,
                max_reachable_sets: limits.reachable_sets,
                exact_fhw_vertices: limits.exact_fhw_vertices,
            };
            let out = count_answers_fhw_pipeline_with_limits(&q, &d, &al)?;
            let count = u128::try_from(&out.count).map_err(|_| Error::LimitExceeded {
                what: "answer count bits",
                value: out.count.bits() as u128,
                limit: 128,
            })?;
            report.count = Some(count);
            report.widths = Some(PipelineWidths {
                fhw: ratio(&out.fhw),
                fhw_exact: out.fhw_exact,
                td_nodes: out.td_nodes,
                automaton_states: out.states,
                automaton_transitions: out.transitions,
            });
        }
    }
    report.duration_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(match args.out {
        OutFormat::Json => serde_json::to_string_pretty(&report)?,
        OutFormat::Text => report.to_text().trim_end().to_string(),
    })
}

const MEASURES: [&str; 3] = ["tw", "fhw", "rho"];

fn limit_note(e: Error) -> Result<Value> {
    match e {
        Error::LimitExceeded { .. } => Ok(json!({ "error": e.to_string(), "limit_exceeded": true })),
        other => Err(other.into()),
    }
}

pub fn analyze(args: &AnalyzeArgs, verbose: bool) -> Result<String> {
    let limits = Limits::load()?;
    let mut measures: Vec<String> = args.measures.iter().map(|m| m.trim().to_lowercase()).filter(|m| !m.is_empty()).collect();
    if measures.is_empty() {
        measures = MEASURES.iter().map(|m| m.to_string()).collect();
    }
    if let Some(bad) = measures.iter().find(|m| !MEASURES.contains(&m.as_str())) {
        return Err(Invalid(format!("unknown measure `{bad}` (expected tw, fhw or rho)")).into());
    }
    let q = load_query(&args.query)?;
    let h = build_hypergraph(&q);
    let mut out: BTreeMap<String, Value> = BTreeMap::new();
    for m in &measures {
        if verbose {
            eprintln!("computing {m}");
        }
        let v = match m.as_str() {
            "tw" => match treewidth_exact_with_limit(&h, limits.exact_treewidth_vertices) {
                Ok((w, td)) => json!({ "value": w.to_string(), "exact": true, "decomposition": td_value(&td) }),
                Err(Error::LimitExceeded { .. }) => {
                    let td = treewidth_heuristic(&h);
                    json!({ "value": td_width(&td).to_string(), "exact": false, "decomposition": td_value(&td) })
                }
                Err(e) => return Err(e.into()),
            },
            "fhw" => match fhw_exact_small_with_limit(&h, limits.exact_fhw_vertices) {
                Ok((w, td)) => json!({ "value": ratio(&w), "exact": true, "decomposition": td_value(&td) }),
                Err(Error::LimitExceeded { .. }) => {
                    let td = treewidth_heuristic(&h);
                    match fhw_of_td(&h, &td) {
                        Ok(w) => json!({ "value": ratio(&w), "exact": false, "decomposition": td_value(&td) }),
                        Err(e) => limit_note(e)?,
                    }
                }
                Err(e) => limit_note(e)?,
            },
            _ => match fractional_edge_cover_number(&h) {
                Ok((rho, cover)) => {
                    let weights: BTreeMap<String, String> =
                        cover.0.iter().map(|(e, w)| (e.to_string(), ratio(w))).collect();
                    json!({ "value": ratio(&rho), "exact": true, "cover": weights })
                }
                Err(e) => limit_note(e)?,
            },
        };
        out.insert(m.clone(), v);
    }
    let doc = json!({
        "query": args.query.display().to_string(),
        "variables": q.num_vars(),
        "free": q.num_free(),
        "size": query_size(&q),
        "measures": out,
    });
    Ok(match args.out {
        OutFormat::Json => serde_json::to_string_pretty(&doc)?,
        OutFormat::Text => {
            let mut lines = Vec::new();
            for (m, v) in &out {
                match v.get("value") {
                    Some(val) => {
                        let bound = if v["exact"] == json!(true) { "" } else { " (upper bound)" };
                        lines.push(format!("{m}: {}{bound}", val.as_str().unwrap_or_default()));
                    }
                    None => lines.push(format!("{m}: {}", v["error"].as_str().unwrap_or_default())),
                }
            }
            lines.join("\n")
        }
    })
}

fn write_instance(dir: &Path, q: &Query, d: &Database) -> Result<String> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let qp = dir.join("query.cq");
    let dp = dir.join("db.json");
    fs::write(&qp, format!("{q}\n")).with_context(|| format!("writing {}", qp.display()))?;
    fs::write(&dp, d.to_json() + "\n").with_context(|| format!("writing {}", dp.display()))?;
    let doc = json!({ "query": qp.display().to_string(), "db": dp.display().to_string() });
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn gen(kind: &GenKind, verbose: bool) -> Result<String> {
    let (q, d, dir) = match kind {
        GenKind::Hampath { graph, n, out_dir } => {
            let g = load_graph(graph)?;
            let n = n.unwrap_or(g.vertices().len());
            let (q, d) = gen_hampath(&g, n)?;
            (q, d, out_dir)
        }
        GenKind::Lihom { pattern, target, out_dir } => {
            let (q, d) = gen_li_hom(&load_graph(pattern)?, &load_graph(target)?)?;
            (q, d, out_dir)
        }
        GenKind::Random {
            vars,
            atoms,
            domain,
            p_neg,
            p_diseq,
            seed,
            free,
            max_arity,
            relations,
            density,
            out_dir,
        } => {
            let mut p = RandomParams::new(*vars, *atoms, *domain, *p_neg, *p_diseq, *seed);
            p.free = *free;
            p.max_arity = *max_arity;
            p.relations = *relations;
            p.density = *density;
            let (q, d) = gen_random(&p)?;
            (q, d, out_dir)
        }
    };
    if verbose {
        eprintln!("writing {} ({} variables) to {}", q.name(), q.num_vars(), dir.display());
    }
    write_instance(dir, &q, &d)
}
