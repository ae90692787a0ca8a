use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::graph_chain;
use crate::formula::FormulaPack;
use crate::graph::{bridges, delete_edges, restrict, Graph, GraphFile, ObjectSet, RestrictMode};
use crate::hull::hull_with_budget;
use crate::structure::Subset;
use crate::universe::GraphAmbient;

/// Graph properties whose preservation under `G↾M` and `G\M` is probed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    /// No odd cut, checked as "every degree even".
    Nw,
    Bridgeless,
    EvenDegree,
    /// Every component with an edge has at least three vertices.
    NoSmallComponent,
}

impl Property {
    pub const ALL: [Property; 4] = [Property::Nw, Property::Bridgeless, Property::EvenDegree, Property::NoSmallComponent];

    pub fn holds(self, g: &Graph) -> bool {
        match self {
            Property::Nw | Property::EvenDegree => g.degrees().values().all(|d| d % 2 == 0),
            Property::Bridgeless => bridges(g).is_empty(),
            Property::NoSmallComponent => {
                let touched: BTreeSet<u32> = g.edges().iter().flat_map(|e| [e.lo(), e.hi()]).collect();
                g.components()
                    .iter()
                    .filter(|c| c.iter().any(|v| touched.contains(v)))
                    .all(|c| c.len() >= 3)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Property::Nw => "nw",
            Property::Bridgeless => "bridgeless",
            Property::EvenDegree => "even-degree",
            Property::NoSmallComponent => "no-small-component",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Property {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Property::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown property `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum View {
    Restriction,
    Deletion,
    Slice,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeEntry {
    /// Where `M` came from, e.g. `hull(v2)` or `stage 3`.
    pub source: String,
    pub view: View,
    pub objects: ObjectSet,
    pub graph: GraphFile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InstanceReport {
    pub index: usize,
    pub graph: GraphFile,
    /// The input graph itself has the property.
    pub precondition: bool,
    /// Why the instance was not probed, if it was not.
    pub skipped: Option<String>,
    pub ambient_size: usize,
    pub ambient_rank: u64,
    pub checks: usize,
    pub counterexamples: Vec<ProbeEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeReport {
    pub property: Property,
    pub pack: String,
    pub instances: Vec<InstanceReport>,
    pub counterexamples: usize,
    pub skipped: usize,
}

impl ProbeReport {
    pub fn from_instances(property: Property, pack: &FormulaPack, instances: Vec<InstanceReport>) -> Self {
        let counterexamples = instances.iter().map(|i| i.counterexamples.len()).sum();
        let skipped = instances.iter().filter(|i| i.skipped.is_some()).count();
        ProbeReport { property, pack: pack.name.clone(), instances, counterexamples, skipped }
    }
}

/// Tests `property` on `G↾M` and `G\M` for `M` ranging over the whole
/// ambient, the hull of every single vertex and edge, and the stages of the
/// graph's chain, and on every slice of that chain.
pub fn probe_instance(index: usize, g: &Graph, pack: &FormulaPack, property: Property, budget: u64) -> InstanceReport {
    let mut report = InstanceReport {
        index,
        graph: GraphFile::from(g),
        precondition: property.holds(g),
        skipped: None,
        ambient_size: 0,
        ambient_rank: 0,
        checks: 0,
        counterexamples: Vec::new(),
    };
    if !report.precondition {
        report.skipped = Some(format!("input graph is not {property}"));
        return report;
    }
    let ambient = match GraphAmbient::new(g) {
        Ok(a) => a,
        Err(e) => {
            report.skipped = Some(e.to_string());
            return report;
        }
    };
    report.ambient_size = ambient.universe.len();
    report.ambient_rank = ambient.rank;
    match collect_candidates(g, &ambient, pack, budget) {
        Ok((candidates, slices)) => {
            for (source, m) in candidates {
                for (view, h) in [
                    (View::Restriction, restrict(g, &m, RestrictMode::EdgeAware)),
                    (View::Deletion, delete_edges(g, &m)),
                ] {
                    report.checks += 1;
                    if !property.holds(&h) {
                        report.counterexamples.push(ProbeEntry {
                            source: source.clone(),
                            view,
                            objects: m.clone(),
                            graph: GraphFile::from(&h),
                        });
                    }
                }
            }
            for (i, (m, slice)) in slices.into_iter().enumerate() {
                report.checks += 1;
                if !property.holds(&slice) {
                    report.counterexamples.push(ProbeEntry {
                        source: format!("slice {i}"),
                        view: View::Slice,
                        objects: m,
                        graph: GraphFile::from(&slice),
                    });
                }
            }
        }
        Err(reason) => report.skipped = Some(reason),
    }
    report
}

type Candidates = (Vec<(String, ObjectSet)>, Vec<(ObjectSet, Graph)>);

fn collect_candidates(g: &Graph, ambient: &GraphAmbient, pack: &FormulaPack, budget: u64) -> Result<Candidates, String> {
    let mut seen: BTreeSet<(Vec<u32>, Vec<crate::graph::Edge>)> = BTreeSet::new();
    let mut out = Vec::new();
    let mut push = |source: String, m: ObjectSet, out: &mut Vec<(String, ObjectSet)>| {
        let key = (m.vertices.iter().copied().collect(), m.edges.iter().copied().collect());
        if seen.insert(key) {
            out.push((source, m));
        }
    };
    push("everything".into(), ObjectSet::of_graph(g), &mut out);
    let seeds = g
        .vertices()
        .iter()
        .map(|&v| (format!("hull(v{v})"), ambient.vertex_id(v).expect("vertex")))
        .chain(
            g.edges()
                .iter()
                .map(|&e| (format!("hull(e{}_{})", e.lo(), e.hi()), ambient.edge_id(e).expect("edge"))),
        );
    for (source, id) in seeds {
        let h = hull_with_budget(ambient.structure(), pack, &Subset::from([id]), budget).map_err(|e| e.to_string())?;
        push(source, ambient.objects_of(&h.carrier), &mut out);
    }
    let gc = graph_chain(g, pack, budget).map_err(|e| e.to_string())?;
    for (i, st) in gc.slices.stages.iter().enumerate() {
        push(format!("stage {i}"), st.objects.clone(), &mut out);
    }
    let slices = gc
        .slices
        .stages
        .iter()
        .skip(1)
        .map(|s| s.objects.clone())
        .zip(gc.slices.slices)
        .collect();
    Ok((out, slices))
}

/// Probes every graph of a corpus in order.
pub fn well_reflecting_probe(corpus: &[Graph], pack: &FormulaPack, property: Property, budget: u64) -> ProbeReport {
    let instances = corpus
        .iter()
        .enumerate()
        .map(|(i, g)| probe_instance(i, g, pack, property, budget))
        .collect();
    ProbeReport::from_instances(property, pack, instances)
}
