use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use kgexplain_core::eval::{parse_path_entries, resolve_paths};
use kgexplain_core::kg::RelationClass;
use kgexplain_core::pipeline::goal_title_for;
use kgexplain_core::recommend::{path_rationale, recommend_path};
use kgexplain_core::{
    detect_communities, export_report, extract_relations, run_experiment, synthetic, AppConfig, CommunityAssignment,
    Explainer, ExportFormat, KgError, KnowledgeGraph, NodeId, TaxonomyLevel,
};
use kgexplain_server::AppState;

use crate::failure::{ExitKind, Failure};
use crate::{Cli, CmdResult, Command, GraphInput};

pub fn run(cli: Cli) -> CmdResult {
    let mut cfg = AppConfig::load_or_default(cli.config.as_deref())?;
    match cli.command {
        Command::BuildKg { corpus, out_dir, threshold, min_doc_tokens } => {
            if let Some(t) = threshold {
                cfg.similarity.threshold = t;
            }
            if let Some(m) = min_doc_tokens {
                cfg.similarity.min_doc_tokens = m;
            }
            cfg.validate()?;
            build_kg(&cfg, &corpus, &out_dir)
        }
        Command::Recommend { graph, start, goal, discount, max_path_len, json } => {
            if let Some(d) = discount {
                cfg.recommender.discount = d;
            }
            if let Some(m) = max_path_len {
                cfg.recommender.max_path_len = m;
            }
            cfg.validate()?;
            recommend(&cfg, &load_graph(&graph)?, &node_id(&start)?, &node_id(&goal)?, json)
        }
        Command::Explain { input, target, goal, no_context, dump_context, backend, .. } => {
            if let Some(b) = backend {
                cfg.backend.kind = b;
            }
            cfg.validate()?;
            let goal = goal.as_deref().map(node_id).transpose()?;
            explain(&cfg, &input, &node_id(&target)?, goal.as_ref(), !no_context, dump_context)
        }
        Command::Evaluate { input, paths, backend, jobs, out_dir } => {
            if let Some(b) = backend {
                cfg.backend.kind = b;
            }
            if let Some(j) = jobs {
                cfg.eval.jobs = j;
            }
            cfg.validate()?;
            evaluate(&cfg, &input, &paths, &out_dir)
        }
        Command::Serve { input, port, host, backend } => {
            if let Some(b) = backend {
                cfg.backend.kind = b;
            }
            cfg.validate()?;
            serve(&cfg, &input, SocketAddr::new(host, port))
        }
        Command::Synth { out_dir } => synth(&out_dir),
    }
}

fn node_id(raw: &str) -> Result<NodeId, Failure> {
    NodeId::new(raw).map_err(|e| Failure::new(ExitKind::Usage, e.to_string()))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn write(path: &Path, contents: &str) -> CmdResult {
    fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

fn create_dir(dir: &Path) -> CmdResult {
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))
}

/// Graph parse and invariant errors carry the file name and line.
fn load_graph(path: &Path) -> Result<KnowledgeGraph, Failure> {
    let file = fs::File::open(path).map_err(|e| Failure::io(path, e))?;
    KnowledgeGraph::load(BufReader::new(file)).map_err(|e| {
        let location = match &e {
            KgError::Parse { line, message } => Some((*line, message.clone())),
            KgError::InvariantViolation { line, source } => Some((*line, source.to_string())),
            _ => None,
        };
        let f = Failure::from(e);
        match location {
            Some((line, message)) => Failure::new(f.kind, format!("{}:{line}: {message}", path.display())),
            None => Failure::new(f.kind, format!("{}: {}", path.display(), f.message)),
        }
    })
}

fn load_assignment(graph: &KnowledgeGraph, path: Option<&Path>) -> Result<CommunityAssignment, Failure> {
    let Some(path) = path else {
        return Ok(detect_communities(graph));
    };
    let assignment = CommunityAssignment::from_json(&read(path)?)
        .map_err(|e| Failure::new(ExitKind::Validation, format!("{}: {e}", path.display())))?;
    if let Some(lo) = graph.learning_objects().find(|n| assignment.community_index(&n.id).is_none()) {
        return Err(Failure::new(
            ExitKind::Validation,
            format!("{}: learning object {} has no community", path.display(), lo.id),
        ));
    }
    Ok(assignment)
}

fn build_kg(cfg: &AppConfig, corpus: &Path, out_dir: &Path) -> CmdResult {
    let graph = load_graph(corpus)?;
    let outcome = extract_relations(&graph, &cfg.similarity)?;
    let graph = outcome.graph;
    let assignment = detect_communities(&graph);

    let mut report = String::new();
    let goals = graph.nodes().filter(|n| n.level == TaxonomyLevel::LearningGoal).count();
    let _ = writeln!(
        report,
        "nodes: {} ({goals} learning goals, {} learning objects)",
        graph.node_count(),
        graph.node_count() - goals
    );
    let _ = writeln!(report, "taxonomy edges: {}", graph.edge_count(RelationClass::Taxonomy));
    let _ = writeln!(
        report,
        "semantic edges: {} (threshold {}, {} added)",
        graph.edge_count(RelationClass::Semantic),
        cfg.similarity.threshold,
        outcome.added
    );
    let _ = writeln!(report, "skipped documents: {}", outcome.skipped.len());
    for skipped in &outcome.skipped {
        let _ = writeln!(report, "  - {skipped}");
    }
    let communities = assignment.communities();
    let _ = writeln!(report, "communities: {} (modularity {:.4})", communities.len(), assignment.modularity);
    for (i, members) in communities.iter().enumerate() {
        let ids: Vec<&str> = members.iter().map(NodeId::as_str).collect();
        let _ = writeln!(report, "  {i}: size {} [{}]", members.len(), ids.join(", "));
    }

    create_dir(out_dir)?;
    write(&out_dir.join("graph.jsonl"), &graph.to_jsonl())?;
    write(&out_dir.join("communities.json"), &(assignment.to_json() + "\n"))?;
    write(&out_dir.join("report.txt"), &report)?;
    print!("{report}");
    Ok(())
}

fn recommend(cfg: &AppConfig, graph: &KnowledgeGraph, start: &NodeId, goal: &NodeId, json: bool) -> CmdResult {
    let path = recommend_path(graph, start, goal, &cfg.recommender)?;
    let rationale = path_rationale(graph, &path, &cfg.recommender)?;
    if json {
        let steps: Vec<_> = rationale
            .iter()
            .map(|(id, facts)| serde_json::json!({"id": id, "facts": facts}))
            .collect();
        let out = serde_json::json!({"path": path, "rationale": steps});
        println!("{}", serde_json::to_string_pretty(&out).expect("json serializes"));
        return Ok(());
    }
    println!("path {} -> {} score {:.6}", start, goal, path.score);
    for (i, (id, facts)) in rationale.iter().enumerate() {
        let node = graph.node(id)?;
        let via = match facts.arrived_via {
            None => "start".to_string(),
            Some(t) => match t.weight {
                Some(w) => format!("via {} (weight {w:.4}, reward {:.4})", t.via, t.reward),
                None => format!("via {} (reward {:.4})", t.via, t.reward),
            },
        };
        let chain: Vec<&str> = facts.parent_chain.iter().map(NodeId::as_str).collect();
        println!(
            "{:>2}. {} [{}] {:?} {via}; contribution {:.6}, cumulative {:.6}; under [{}]{}",
            i + 1,
            id,
            node.level,
            node.title,
            facts.contribution,
            facts.cumulative,
            chain.join(" > "),
            if facts.reaches_goal_tree { "; in goal tree" } else { "" },
        );
    }
    Ok(())
}

fn explain(
    cfg: &AppConfig,
    input: &GraphInput,
    target: &NodeId,
    goal: Option<&NodeId>,
    with_context: bool,
    dump_context: bool,
) -> CmdResult {
    let graph = load_graph(&input.graph)?;
    let assignment = load_assignment(&graph, input.communities.as_deref())?;
    let goal_title = match goal {
        Some(g) => {
            let node = graph.node(g)?;
            if node.level != TaxonomyLevel::LearningGoal {
                return Err(Failure::new(ExitKind::Validation, format!("{g} is not a learning goal")));
            }
            node.title.clone()
        }
        None => goal_title_for(&graph, target)?,
    };
    let settings = cfg.explain_settings();
    let gateway = cfg.backend.build_gateway()?;
    let explainer = Explainer {
        graph: &graph,
        assignment: &assignment,
        settings: &settings,
        gateway: &gateway,
    };
    let outcome = explainer.explain(target, &goal_title, with_context, None)?;
    if dump_context {
        match &outcome.context {
            Some(ctx) => println!("{ctx}"),
            None => println!("(no context)\n"),
        }
    }
    println!("{}", outcome.explanation.filled_text.trim_end());
    Ok(())
}

fn evaluate(cfg: &AppConfig, input: &GraphInput, paths: &Path, out_dir: &Path) -> CmdResult {
    let graph = load_graph(&input.graph)?;
    let assignment = load_assignment(&graph, input.communities.as_deref())?;
    let entries =
        parse_path_entries(&read(paths)?).map_err(|e| Failure::new(ExitKind::Validation, format!("{}: {e}", paths.display())))?;
    let resolved = resolve_paths(&graph, &entries, &cfg.recommender)?;
    let settings = cfg.explain_settings();
    let gateway = cfg.backend.build_gateway()?;
    let explainer = Explainer {
        graph: &graph,
        assignment: &assignment,
        settings: &settings,
        gateway: &gateway,
    };
    let report = run_experiment(&explainer, &resolved, &cfg.eval);

    create_dir(out_dir)?;
    let mut json = Vec::new();
    export_report(&report, ExportFormat::Json, &mut json)?;
    let json_path = out_dir.join("report.json");
    fs::write(&json_path, json).map_err(|e| Failure::io(&json_path, e))?;
    let mut table = Vec::new();
    export_report(&report, ExportFormat::Table, &mut table)?;
    let table_path = out_dir.join("report.txt");
    fs::write(&table_path, &table).map_err(|e| Failure::io(&table_path, e))?;
    print!("{}", String::from_utf8_lossy(&table));

    if report.failures.is_empty() {
        Ok(())
    } else {
        for f in &report.failures {
            eprintln!("sample {} ({}) failed: {}", f.sample_id, f.target, f.error);
        }
        Err(Failure::new(
            ExitKind::EvaluationFailures,
            format!("{} of {} samples failed", report.failures.len(), report.failures.len() + report.samples.len()),
        ))
    }
}

fn serve(cfg: &AppConfig, input: &GraphInput, addr: SocketAddr) -> CmdResult {
    let graph = load_graph(&input.graph)?;
    let assignment = load_assignment(&graph, input.communities.as_deref())?;
    let gateway = cfg.backend.build_gateway()?;
    let state = Arc::new(AppState::new(graph, assignment, Arc::new(gateway), cfg));
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::new(ExitKind::Other, e.to_string()))?;
    eprintln!("listening on http://{addr}");
    runtime
        .block_on(kgexplain_server::serve(state, addr))
        .map_err(|e| Failure::new(ExitKind::Other, format!("{addr}: {e}")))
}

fn synth(out_dir: &Path) -> CmdResult {
    create_dir(out_dir)?;
    write(&out_dir.join("corpus.jsonl"), &synthetic::corpus_jsonl())?;
    write(&out_dir.join("paths.jsonl"), &synthetic::paths_jsonl())?;
    println!("wrote {} and {}", out_dir.join("corpus.jsonl").display(), out_dir.join("paths.jsonl").display());
    Ok(())
}
