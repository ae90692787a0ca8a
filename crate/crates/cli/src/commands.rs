use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;
use std::path::Path;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use fm_core::combinatorics::{
    free_set, is_delta_system, is_free, max_free_set, max_sunflower, trace_kernel_sunflower, DeltaSystem, SetFamily,
    MAX_FREE_GROUND,
};
use fm_core::corpus::generate;
use fm_core::decompose::{
    chain_slices, check_bond_faithful, graph_chain, probe_instance, search_bond_faithful, slice_partition_check,
    DecomposeError, NotFound, ProbeReport, Property, SearchOutcome, SliceSet, SliceSetFile,
};
use fm_core::formula::{parse, Formula};
use fm_core::graph::{
    bridges, edge_connectivity, edge_disjoint_paths, enumerate_bonds, is_bond, odd_cut_witness, to_dot,
    cycle_double_cover_search, veblen_decomposition, Decomposition, DoubleCover, Edge, EdgeSet, Graph, GraphError,
    GraphFile, OddCutMode, Veblen,
};
use fm_core::hull::{chain, hull_with_budget, verify_hull_with_budget, HullError};
use fm_core::structure::{
    for_each_valuation, induced_substructure, EvalError, Evaluator, FinStructure, Subset, Valuation,
};
use fm_core::universe::{build_hierarchy, hf_rank, render, GraphAmbient, HfUniverse, RANK_SIZES};

use crate::input;
use crate::{
    BondFaithfulCommand, CliError, Cli, Command, CorpusCommand, GraphCommand, InstanceArgs, Output, Status,
    SunflowerCommand, AmbientArgs,
};

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn eval_err(e: EvalError) -> CliError {
    match e {
        EvalError::BudgetExceeded(_) => CliError::Budget(e.to_string()),
        other => input_err(other),
    }
}

fn hull_err(e: HullError) -> CliError {
    if e.is_budget() {
        CliError::Budget(e.to_string())
    } else {
        input_err(e)
    }
}

fn decompose_err(e: DecomposeError) -> CliError {
    match e {
        DecomposeError::Hull(h) => hull_err(h),
        other => input_err(other),
    }
}

fn graph_err(e: GraphError) -> CliError {
    input_err(e)
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    let budget = cli.budget;
    let validate = cli.validate;
    match &cli.command {
        Command::Parse { formula } => parse_cmd(formula, validate),
        Command::Eval { structure, formula, valuation, subset } => {
            eval_cmd(structure, formula, valuation, subset.as_deref(), budget, validate)
        }
        Command::Relativize { formula, structure, subset } => {
            relativize_cmd(formula, structure.as_deref(), subset.as_deref(), budget, validate)
        }
        Command::Universe { rank, allow_rank5, graph } => universe_cmd(*rank, *allow_rank5, graph.as_deref(), validate),
        Command::Hull { ambient, pack, seed_elems } => hull_cmd(ambient, pack, seed_elems, budget, validate),
        Command::Chain { ambient, pack, seed_elems, cover } => {
            chain_cmd(ambient, pack, seed_elems, cover.as_deref(), budget, validate)
        }
        Command::Slice { graph, pack, stages } => slice_cmd(graph, pack, stages.as_deref(), budget),
        Command::Probe { instances, pack, property } => {
            probe_cmd(instances, pack, property, budget, cli.workers, validate)
        }
        Command::Graph { command } => graph_cmd(command, budget, cli.seed, validate),
        Command::Bondfaithful { command } => match command {
            BondFaithfulCommand::Check { graph, parts, kappa } => bf_check_cmd(graph, parts, *kappa),
            BondFaithfulCommand::Search { instances, kappa } => {
                bf_search_cmd(instances, *kappa, budget, cli.workers, validate)
            }
        },
        Command::Sunflower { command } => sunflower_cmd(command, validate),
        Command::Freeset { mapping } => freeset_cmd(mapping, validate),
        Command::Corpus { command: CorpusCommand::Gen { spec } } => corpus_cmd(spec, validate),
    }
}

/// Adds a `validation` record and flags a violation when it failed.
fn validated(out: &mut Output, ok: bool, detail: impl Serialize) {
    out.set("validation", serde_json::json!({ "ok": ok, "detail": detail }));
    if !ok {
        out.flag(Status::Violation);
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().map_err(input_err)
}

fn parse_cmd(src: &str, validate: bool) -> Result<Output, CliError> {
    let f = input::formula(src)?;
    let text = f.to_string();
    let mut out = Output::new()
        .field("ast", &f)
        .field("text", &text)
        .field("free_vars", f.free_vars())
        .field("quantifier_depth", f.quantifier_depth())
        .field("size", f.size());
    out.text = Some(format!("{text}\n"));
    if validate {
        let back = parse(&text).ok();
        validated(&mut out, back.as_ref() == Some(&f), "rendered text parses back to the same tree");
    }
    Ok(out)
}

/// `N ⊨ φ^M[v]` checked against `M ⊨ φ[v]` on the induced substructure.
fn relativization_agrees(n: &FinStructure, m: &Subset, phi: &Formula, v: &Valuation, budget: u64) -> Result<bool, CliError> {
    let rel = Evaluator::relativized(n, m, budget).map_err(eval_err)?.eval(&phi.relativize(), v).map_err(eval_err)?;
    let induced = induced_substructure(n, m).map_err(input_err)?;
    let phi_m = induced.translate_formula(phi).map_err(eval_err)?;
    let v_m = induced.translate(v).map_err(eval_err)?;
    let direct = Evaluator::new(&induced.structure, budget).eval(&phi_m, &v_m).map_err(eval_err)?;
    Ok(rel == direct)
}

fn eval_cmd(
    path: &Path,
    src: &str,
    valuation: &str,
    subset: Option<&str>,
    budget: u64,
    validate: bool,
) -> Result<Output, CliError> {
    let loaded = input::structure(path)?;
    let n = &loaded.structure;
    let phi = input::formula(src)?;
    let v = input::valuation(valuation)?;
    let (value, steps, m) = match subset {
        None => {
            let mut ev = Evaluator::new(n, budget);
            let value = ev.eval(&phi, &v).map_err(eval_err)?;
            (value, ev.steps(), n.universe())
        }
        Some(s) => {
            let m = input::id_list(s)?;
            let mut ev = Evaluator::relativized(n, &m, budget).map_err(eval_err)?;
            let value = ev.eval(&phi.relativize(), &v).map_err(eval_err)?;
            (value, ev.steps(), m)
        }
    };
    let mut out = Output::new().field("value", value).field("steps", steps);
    if let Some(s) = subset {
        out.set("subset", input::id_list(s)?);
    }
    out.text = Some(format!("{value}\n"));
    if validate {
        let ok = relativization_agrees(n, &m, &phi, &v, budget)?;
        validated(&mut out, ok, "relativized evaluation agrees with the induced substructure");
    }
    Ok(out)
}

fn relativize_cmd(
    src: &str,
    structure: Option<&Path>,
    subset: Option<&str>,
    budget: u64,
    validate: bool,
) -> Result<Output, CliError> {
    let phi = input::formula(src)?;
    let rel = phi.relativize();
    let mut out = Output::new().field("formula", rel.to_string()).field("ast", &rel);
    out.text = Some(format!("{rel}\n"));
    if validate {
        let (Some(path), Some(s)) = (structure, subset) else {
            return Err(CliError::Input("--validate needs --structure and --subset".into()));
        };
        let n = input::structure(path)?.structure;
        let m = input::id_list(s)?;
        let range: Vec<usize> = m.iter().copied().collect();
        let mut checked = 0u64;
        let mut mismatch = None;
        for_each_valuation(&phi.free_vars(), &range, |v| {
            checked += 1;
            if relativization_agrees(&n, &m, &phi, v, budget)? {
                Ok(true)
            } else {
                mismatch = Some(v.clone());
                Ok(false)
            }
        })?;
        validated(&mut out, mismatch.is_none(), serde_json::json!({ "valuations": checked, "mismatch": mismatch }));
    }
    Ok(out)
}

fn universe_report(universe: &HfUniverse, out: &mut Output) {
    out.set("size", universe.len());
    out.set("codes", universe.codes());
    out.set("structure", universe.structure().to_file());
    let mut text = String::new();
    for (i, c) in universe.codes().iter().enumerate() {
        writeln!(text, "{i}\t{}\t{c}\t{}", hf_rank(c), render(c, 120)).expect("string write");
    }
    out.text = Some(text);
}

fn universe_cmd(rank: Option<usize>, allow_rank5: bool, graph: Option<&Path>, validate: bool) -> Result<Output, CliError> {
    let mut out = Output::new();
    if let Some(path) = graph {
        let g = input::graph(path)?;
        let ambient = GraphAmbient::new(&g).map_err(input_err)?;
        out.set("rank", ambient.rank);
        universe_report(&ambient.universe, &mut out);
        let labels: BTreeMap<usize, String> = (0..ambient.universe.len()).map(|i| (i, ambient.label(i))).collect();
        out.set("labels", labels);
        if validate {
            validated(&mut out, ambient.universe.is_transitive(), "ambient is transitive");
        }
        return Ok(out);
    }
    let n = rank.expect("clap requires a source");
    let h = build_hierarchy(n, allow_rank5).map_err(input_err)?;
    out.set("rank", n);
    universe_report(&h.universe, &mut out);
    if validate {
        let ok = h.universe.len() as u64 == RANK_SIZES[n] && h.universe.is_transitive();
        validated(&mut out, ok, "size matches the rank and the set is transitive");
    }
    Ok(out)
}

enum Ambient {
    Structure { structure: FinStructure, universe: Option<HfUniverse> },
    Graph(GraphAmbient),
}

impl Ambient {
    fn load(args: &AmbientArgs) -> Result<Self, CliError> {
        match (&args.structure, &args.graph) {
            (Some(p), _) => {
                let l = input::structure(p)?;
                Ok(Ambient::Structure { structure: l.structure, universe: l.universe })
            }
            (None, Some(p)) => Ok(Ambient::Graph(GraphAmbient::new(&input::graph(p)?).map_err(input_err)?)),
            (None, None) => Err(CliError::Input("need --structure or --graph".into())),
        }
    }

    fn structure(&self) -> &FinStructure {
        match self {
            Ambient::Structure { structure, .. } => structure,
            Ambient::Graph(a) => a.structure(),
        }
    }

    fn universe(&self) -> Option<&HfUniverse> {
        match self {
            Ambient::Structure { universe, .. } => universe.as_ref(),
            Ambient::Graph(a) => Some(&a.universe),
        }
    }

    fn labels(&self, m: &Subset) -> Option<BTreeMap<usize, String>> {
        match self {
            Ambient::Graph(a) => Some(m.iter().map(|&i| (i, a.label(i))).collect()),
            Ambient::Structure { universe: Some(u), .. } => Some(m.iter().map(|&i| (i, u.label(i))).collect()),
            Ambient::Structure { structure, .. } if !structure.labels().is_empty() => {
                Some(m.iter().map(|&i| (i, structure.label(i))).collect())
            }
            _ => None,
        }
    }
}

fn hull_cmd(args: &AmbientArgs, pack: &str, seed: &str, budget: u64, validate: bool) -> Result<Output, CliError> {
    let ambient = Ambient::load(args)?;
    let pack = input::pack(pack)?;
    let seed = input::id_list(seed)?;
    let n = ambient.structure();
    let h = hull_with_budget(n, &pack, &seed, budget).map_err(hull_err)?;
    let mut out = Output::new()
        .field("pack", &pack.name)
        .field("seed", &h.seed)
        .field("carrier", &h.carrier)
        .field("trace", &h.trace)
        .field(
            "stats",
            serde_json::json!({
                "seed_size": h.seed.len(),
                "carrier_size": h.carrier.len(),
                "structure_size": n.size(),
                "passes": h.passes,
                "steps": h.steps,
            }),
        );
    if let Some(labels) = ambient.labels(&h.carrier) {
        out.set("labels", labels);
    }
    if let Ambient::Graph(a) = &ambient {
        out.set("objects", a.objects_of(&h.carrier));
    }
    out.text = Some(
        h.carrier
            .iter()
            .map(|&i| ambient.labels(&Subset::from([i])).map_or(i.to_string(), |l| l[&i].clone()))
            .collect::<Vec<_>>()
            .join("\n")
            + "\n",
    );
    if validate {
        let verdict = verify_hull_with_budget(n, &pack, &h, budget).map_err(eval_err)?;
        validated(&mut out, verdict.ok(), &verdict);
    }
    Ok(out)
}

fn chain_cmd(
    args: &AmbientArgs,
    pack: &str,
    seed: &str,
    cover: Option<&str>,
    budget: u64,
    validate: bool,
) -> Result<Output, CliError> {
    let ambient = Ambient::load(args)?;
    let pack = input::pack(pack)?;
    let seed = input::id_list(seed)?;
    let n = ambient.structure();
    let cover = match (cover, &ambient) {
        (Some(c), _) => input::id_list(c)?,
        (None, Ambient::Graph(a)) => a.cover(),
        (None, Ambient::Structure { structure, .. }) => structure.universe(),
    };
    let mut ch = chain(n, &pack, &seed, &cover, ambient.universe(), budget).map_err(hull_err)?;
    if let Ambient::Graph(a) = &ambient {
        ch.coherent = Some(ch.stages.iter().all(|s| a.objects_of(&s.hull.carrier).is_coherent_for(&a.graph)));
    }
    let stages: Vec<serde_json::Value> = ch
        .stages
        .iter()
        .map(|s| {
            let mut v = serde_json::json!({
                "carrier": s.hull.carrier,
                "forced": s.forced,
                "self_encoding": s.self_encoding,
                "added": s.hull.trace.len(),
                "steps": s.hull.steps,
            });
            if let Ambient::Graph(a) = &ambient {
                v["objects"] = serde_json::to_value(a.objects_of(&s.hull.carrier)).expect("serializes");
            }
            v
        })
        .collect();
    let mut out = Output::new()
        .field("pack", &pack.name)
        .field("cover", &cover)
        .field("coherent", ch.coherent)
        .field("stages", stages);
    let mut text = String::new();
    for (i, s) in ch.stages.iter().enumerate() {
        writeln!(text, "stage {i}: {} elements", s.hull.carrier.len()).expect("string write");
    }
    out.text = Some(text);
    if validate {
        let mut failures = Vec::new();
        for (i, s) in ch.stages.iter().enumerate() {
            let verdict = verify_hull_with_budget(n, &pack, &s.hull, budget).map_err(eval_err)?;
            if !verdict.ok() {
                failures.push(serde_json::json!({ "stage": i, "verdict": verdict }));
            }
            if i > 0 && !ch.stages[i - 1].hull.carrier.is_subset(&s.hull.carrier) {
                failures.push(serde_json::json!({ "stage": i, "verdict": "does not contain the previous stage" }));
            }
        }
        validated(&mut out, failures.is_empty(), failures);
    }
    Ok(out)
}

const PALETTE_NOTE: &str = "edge labels give the slice, bond or member index";

fn classes_dot(g: &Graph, classes: &[EdgeSet]) -> String {
    let mut colour = BTreeMap::new();
    for (i, c) in classes.iter().enumerate() {
        for &e in c {
            colour.entry(e).or_insert(i);
        }
    }
    format!("// {PALETTE_NOTE}\n{}", to_dot(g, &colour))
}

fn slice_cmd(graph: &Path, pack: &str, stages: Option<&Path>, budget: u64) -> Result<Output, CliError> {
    let g = input::graph(graph)?;
    let (slices, chain_stages): (SliceSet, Option<usize>) = match stages {
        Some(p) => (chain_slices(&g, &input::stages(p)?).map_err(decompose_err)?, None),
        None => {
            let pack = input::pack(pack)?;
            let gc = graph_chain(&g, &pack, budget).map_err(decompose_err)?;
            let len = gc.chain.stages.len();
            (gc.slices, Some(len))
        }
    };
    let file = SliceSetFile::from(&slices);
    let mut out = Output::new().field("slices", &file);
    if let Some(k) = chain_stages {
        out.set("chain_stages", k);
    }
    // A coherent covering chain that fails to partition would contradict
    // the slicing scheme itself.
    if file.partition_expected && !file.partition {
        out.flag(Status::Violation);
    }
    let sets: Vec<EdgeSet> = slices.slices.iter().map(Graph::edge_set).collect();
    out.dot = Some(classes_dot(&g, &sets));
    let mut text = String::new();
    for (i, s) in slices.slices.iter().enumerate() {
        let edges: Vec<String> = s.edges().iter().map(Edge::to_string).collect();
        writeln!(text, "slice {i}: {}", edges.join(" ")).expect("string write");
    }
    out.text = Some(text);
    debug_assert_eq!(file.partition, slice_partition_check(&slices));
    Ok(out)
}

fn instances(args: &InstanceArgs) -> Result<Vec<Graph>, CliError> {
    match (&args.graph, &args.corpus) {
        (Some(g), _) => Ok(vec![input::graph(g)?]),
        (None, Some(c)) => input::corpus(c),
        (None, None) => Err(CliError::Input("need --graph or --corpus".into())),
    }
}

fn probe_cmd(
    args: &InstanceArgs,
    pack: &str,
    property: &str,
    budget: u64,
    workers: usize,
    validate: bool,
) -> Result<Output, CliError> {
    let graphs = instances(args)?;
    let pack = input::pack(pack)?;
    let property: Property = property.parse().map_err(CliError::Input)?;
    let run = |g: (usize, &Graph)| probe_instance(g.0, g.1, &pack, property, budget);
    let reports = pool(workers)?.install(|| graphs.par_iter().enumerate().map(run).collect::<Vec<_>>());
    let report = ProbeReport::from_instances(property, &pack, reports);
    let mut out = Output::new().field("probe", &report);
    if report.counterexamples > 0 {
        out.flag(Status::Violation);
    }
    out.text = Some(
        report
            .instances
            .iter()
            .map(|i| match &i.skipped {
                Some(r) => format!("{}: skipped ({r})\n", i.index),
                None => format!("{}: {} checks, {} counterexamples\n", i.index, i.checks, i.counterexamples.len()),
            })
            .collect(),
    );
    if validate {
        let again: Vec<_> = graphs.iter().enumerate().map(run).collect();
        validated(&mut out, again == report.instances, "a sequential rerun reproduces every instance");
    }
    Ok(out)
}

fn bond_text(bonds: &[EdgeSet]) -> String {
    bonds
        .iter()
        .map(|b| b.iter().map(Edge::to_string).collect::<Vec<_>>().join(" ") + "\n")
        .collect()
}

fn graph_cmd(command: &GraphCommand, budget: u64, seed: u64, validate: bool) -> Result<Output, CliError> {
    match command {
        GraphCommand::Bonds { graph, max_size, samples } => {
            let g = input::graph(graph)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e = enumerate_bonds(&g, *max_size, *samples, &mut rng);
            let mut out = Output::new().field("bonds", &e.bonds).field("count", e.bonds.len()).field("sampled", e.sampled);
            out.text = Some(bond_text(&e.bonds));
            out.dot = Some(classes_dot(&g, &e.bonds));
            if validate {
                let bad: Vec<&EdgeSet> = e.bonds.iter().filter(|b| !is_bond(&g, b)).collect();
                validated(&mut out, bad.is_empty(), bad);
            }
            Ok(out)
        }
        GraphCommand::Gamma { graph, x, y } => {
            let g = input::graph(graph)?;
            let gamma = edge_connectivity(&g, *x, *y).map_err(graph_err)?;
            let paths = edge_disjoint_paths(&g, *x, *y, gamma).map_err(graph_err)?;
            let mut out = Output::new().field("gamma", gamma).field("paths", &paths);
            out.text = Some(format!("{gamma}\n"));
            if validate {
                let mut used = EdgeSet::new();
                let ok = paths.iter().all(|p| {
                    p.first() == Some(x)
                        && p.last() == Some(y)
                        && p.windows(2).all(|w| Edge::new(w[0], w[1]).is_some_and(|e| g.has_edge(e) && used.insert(e)))
                }) && paths.len() == gamma;
                validated(&mut out, ok, "paths are edge-disjoint x-y paths of the graph");
            }
            Ok(out)
        }
        GraphCommand::Nw { graph } => {
            let g = input::graph(graph)?;
            let odd: Vec<u32> = g.degrees().into_iter().filter(|(_, d)| d % 2 == 1).map(|(v, _)| v).collect();
            let witness = odd_cut_witness(&g, OddCutMode::Fast).map_err(graph_err)?;
            let nw = witness.is_none();
            let mut out = Output::new().field("nw", nw).field("odd_vertices", &odd).field("odd_cut", &witness);
            out.text = Some(format!("{nw}\n"));
            if !nw {
                out.flag(Status::Violation);
            }
            if validate {
                let scan = odd_cut_witness(&g, OddCutMode::Exhaustive).map_err(graph_err)?;
                let veblen = matches!(veblen_decomposition(&g), Veblen::Cycles { .. });
                let ok = scan.is_none() == nw && veblen == nw;
                validated(&mut out, ok, serde_json::json!({ "exhaustive_odd_cut": scan.is_some(), "veblen": veblen }));
            }
            Ok(out)
        }
        GraphCommand::Veblen { graph } => {
            let g = input::graph(graph)?;
            let v = veblen_decomposition(&g);
            let mut out = Output::new().field("veblen", &v);
            match &v {
                Veblen::Cycles { cycles } => {
                    let sets: Vec<EdgeSet> = cycles.iter().map(|c| c.edges.clone()).collect();
                    out.text = Some(bond_text(&sets));
                    out.dot = Some(classes_dot(&g, &sets));
                }
                Veblen::OddVertex { vertex, degree } => {
                    out.text = Some(format!("vertex {vertex} has odd degree {degree}\n"));
                    out.flag(Status::Violation);
                }
            }
            if validate {
                if let Some(d) = v.clone().into_decomposition(&g) {
                    let ok = d.validate(&g).is_ok() && d.parts.iter().all(Graph::is_cycle);
                    validated(&mut out, ok, "parts are cycles partitioning the edges");
                }
            }
            Ok(out)
        }
        GraphCommand::Bridges { graph } => {
            let g = input::graph(graph)?;
            let b = bridges(&g);
            let mut out = Output::new().field("bridges", &b);
            out.text = Some(b.iter().map(|e| format!("{e}\n")).collect());
            if validate {
                let ok = g.edges().iter().all(|&e| is_bond(&g, &EdgeSet::from([e])) == b.contains(&e));
                validated(&mut out, ok, "bridges are exactly the single-edge bonds");
            }
            Ok(out)
        }
        GraphCommand::Dcc { graph, max_edges } => {
            let g = input::graph(graph)?;
            let result = cycle_double_cover_search(&g, *max_edges, budget).map_err(graph_err)?;
            let mut out = Output::new().field("double_cover", &result);
            match &result {
                DoubleCover::Found { cycles } => {
                    let sets: Vec<EdgeSet> = cycles.iter().map(|c| c.edges.clone()).collect();
                    out.text = Some(bond_text(&sets));
                    if validate {
                        let mut count: BTreeMap<Edge, usize> = BTreeMap::new();
                        let mut cycles_ok = true;
                        for c in cycles {
                            let part = g.edge_induced(&c.edges).map_err(graph_err)?;
                            cycles_ok &= part.is_cycle();
                            for &e in &c.edges {
                                *count.entry(e).or_default() += 1;
                            }
                        }
                        let ok = cycles_ok && g.edges().iter().all(|e| count.get(e) == Some(&2));
                        validated(&mut out, ok, "every edge lies on exactly two of the cycles");
                    }
                }
                DoubleCover::ProvenAbsent => {
                    out.text = Some("none\n".into());
                    out.flag(Status::Violation);
                }
                DoubleCover::BudgetExhausted { nodes } => {
                    out.text = Some(format!("budget exhausted after {nodes} nodes\n"));
                    out.flag(Status::Budget);
                }
            }
            Ok(out)
        }
    }
}

fn parts_of(g: &Graph, parts: &[EdgeSet]) -> Result<Decomposition, CliError> {
    Decomposition::from_edge_sets(g, parts).map_err(graph_err)
}

fn bf_check_cmd(graph: &Path, parts: &Path, kappa: usize) -> Result<Output, CliError> {
    let g = input::graph(graph)?;
    let sets = input::parts(parts)?;
    let d = parts_of(&g, &sets)?;
    let report = check_bond_faithful(&g, &d, kappa).map_err(decompose_err)?;
    let mut out = Output::new().field("report", &report);
    if !report.verdict {
        out.flag(Status::Violation);
    }
    out.text = Some(format!("{}\n", report.verdict));
    out.dot = Some(classes_dot(&g, &sets));
    Ok(out)
}

#[derive(Serialize)]
struct SearchRecord {
    index: usize,
    graph: GraphFile,
    #[serde(flatten)]
    result: SearchResult,
}

#[derive(Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
enum SearchResult {
    Found { parts: Vec<EdgeSet>, report: fm_core::decompose::BondFaithfulReport },
    NotFound(NotFound),
    Error { message: String },
}

fn bf_search_cmd(args: &InstanceArgs, kappa: usize, budget: u64, workers: usize, validate: bool) -> Result<Output, CliError> {
    if kappa == 0 {
        return Err(CliError::Input("kappa must be at least 1".into()));
    }
    let graphs = instances(args)?;
    let outcomes = pool(workers)?.install(|| {
        graphs
            .par_iter()
            .map(|g| search_bond_faithful(g, kappa, budget))
            .collect::<Vec<_>>()
    });
    let mut out = Output::new().field("kappa", kappa);
    let mut records = Vec::new();
    let mut revalidated = true;
    let mut single_dot = None;
    for (index, (g, outcome)) in graphs.iter().zip(outcomes).enumerate() {
        let result = match outcome {
            Ok(SearchOutcome::Found { decomposition, report }) => {
                let parts = decomposition.edge_sets();
                if validate {
                    revalidated &= check_bond_faithful(g, &decomposition, kappa).is_ok_and(|r| r.verdict);
                }
                single_dot = Some(classes_dot(g, &parts));
                SearchResult::Found { parts, report }
            }
            Ok(SearchOutcome::NotFound(nf)) => {
                out.flag(match nf {
                    NotFound::BudgetExhausted { .. } => Status::Budget,
                    NotFound::ProvenAbsent { .. } => Status::Violation,
                });
                SearchResult::NotFound(nf)
            }
            Err(DecomposeError::Hull(h)) if h.is_budget() => {
                out.flag(Status::Budget);
                SearchResult::Error { message: h.to_string() }
            }
            Err(e) => return Err(decompose_err(e)),
        };
        records.push(SearchRecord { index, graph: GraphFile::from(g), result });
    }
    out.text = Some(
        records
            .iter()
            .map(|r| match &r.result {
                SearchResult::Found { parts, .. } => format!("{}: {} members\n", r.index, parts.len()),
                SearchResult::NotFound(NotFound::ProvenAbsent { .. }) => format!("{}: none exists\n", r.index),
                SearchResult::NotFound(NotFound::BudgetExhausted { .. }) => format!("{}: budget exhausted\n", r.index),
                SearchResult::Error { message } => format!("{}: {message}\n", r.index),
            })
            .collect(),
    );
    if graphs.len() == 1 {
        out.dot = single_dot;
    }
    out.set("instances", records);
    if validate {
        validated(&mut out, revalidated, "every decomposition found passes the checker");
    }
    Ok(out)
}

fn system_text(d: &DeltaSystem, family: &SetFamily) -> String {
    let mut text = format!("kernel {:?}\n", d.kernel);
    for &i in &d.members {
        writeln!(text, "{i}: {:?}", family.sets[i]).expect("string write");
    }
    text
}

fn sunflower_cmd(command: &SunflowerCommand, validate: bool) -> Result<Output, CliError> {
    match command {
        SunflowerCommand::Check { family } => {
            let family = input::family(family)?;
            let k = is_delta_system(&family.sets);
            let mut out = Output::new()
                .field("delta_system", k.is_some())
                .field("kernel", k.as_ref().map(|k| &k.kernel))
                .field("degenerate", k.as_ref().is_some_and(|k| k.degenerate))
                .field("duplicates", family.duplicates());
            out.text = Some(format!("{}\n", k.is_some()));
            if k.is_none() {
                out.flag(Status::Violation);
            }
            Ok(out)
        }
        SunflowerCommand::Find { family, petals } => {
            let family = input::family(family)?;
            let d = max_sunflower(&family, Some(*petals)).map_err(input_err)?;
            let mut out = Output::new().field("petals_required", petals).field("system", &d);
            match &d {
                Some(d) => {
                    out.text = Some(system_text(d, &family));
                    if validate {
                        validated(&mut out, d.is_valid_in(&family) && d.members.len() >= *petals, "members form a Δ-system");
                    }
                }
                None => {
                    out.text = Some("none\n".into());
                    out.flag(Status::Violation);
                }
            }
            Ok(out)
        }
        SunflowerCommand::Max { family } => {
            let family = input::family(family)?;
            let d = max_sunflower(&family, None).map_err(input_err)?.expect("no size requirement");
            let mut out = Output::new().field("system", &d).field("size", d.members.len());
            out.text = Some(system_text(&d, &family));
            if validate {
                validated(&mut out, d.is_valid_in(&family), "members form a Δ-system");
            }
            Ok(out)
        }
        SunflowerCommand::Trace { family, model } => {
            let family = input::family(family)?;
            let m = input::trace_model(model)?;
            let d = trace_kernel_sunflower(&family, &m).map_err(input_err)?;
            let mut out = Output::new().field("system", &d).field("size", d.members.len());
            out.text = Some(system_text(&d, &family));
            if validate {
                let valid = d.is_valid_in(&family);
                let maximal = (0..family.len()).filter(|i| !d.members.contains(i)).all(|i| {
                    let mut more = d.members.clone();
                    more.push(i);
                    more.sort_unstable();
                    !DeltaSystem { members: more, kernel: d.kernel.clone() }.is_valid_in(&family)
                });
                validated(&mut out, valid && maximal, serde_json::json!({ "valid": valid, "maximal": maximal }));
            }
            Ok(out)
        }
    }
}

fn freeset_cmd(mapping: &Path, validate: bool) -> Result<Output, CliError> {
    let (ground, f) = input::mapping(mapping)?;
    let greedy = free_set(&ground, &f).map_err(input_err)?;
    let maximum = if ground.len() <= MAX_FREE_GROUND { Some(max_free_set(&ground, &f).map_err(input_err)?) } else { None };
    let mut out = Output::new()
        .field("free", &greedy)
        .field("size", greedy.len())
        .field("maximum", &maximum)
        .field("maximum_size", maximum.as_ref().map(BTreeSet::len));
    out.text = Some(format!("{greedy:?}\n"));
    if validate {
        let ok = is_free(&greedy, &f) && maximum.as_ref().is_none_or(|m| is_free(m, &f));
        validated(&mut out, ok, "no kept element lies in the image of another");
    }
    Ok(out)
}

fn corpus_cmd(spec: &Path, validate: bool) -> Result<Output, CliError> {
    let spec: fm_core::corpus::CorpusSpec = input::read_json(spec)?;
    let graphs = generate(&spec).map_err(input_err)?;
    let files: Vec<GraphFile> = graphs.iter().map(GraphFile::from).collect();
    let mut out = Output::new().field("spec", &spec).field("graphs", &files);
    out.text = Some(graphs.iter().map(|g| g.to_json() + "\n").collect());
    if validate {
        let again = generate(&spec).map_err(input_err)?;
        validated(&mut out, again == graphs, "regenerating from the spec gives the same graphs");
    }
    Ok(out)
}
