use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use fm_core::combinatorics::{Set, SetFamily, SetMapping, TraceModel};
use fm_core::corpus::{generate, CorpusSpec};
use fm_core::formula::{packs, parse, Formula, FormulaPack};
use fm_core::graph::{Edge, EdgeSet, Graph, GraphFile, ObjectSet};
use fm_core::structure::{FinStructure, StructureFile, Subset, Valuation};
use fm_core::universe::{HfCode, HfUniverse};

use crate::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn looks_like_json(text: &str) -> bool {
    text.trim_start().starts_with(['{', '['])
}

pub fn formula(src: &str) -> Result<Formula, CliError> {
    parse(src).map_err(|e| CliError::Input(e.to_string()))
}

/// A structure, plus its HF codes when the file carries them.
pub struct LoadedStructure {
    pub structure: FinStructure,
    pub universe: Option<HfUniverse>,
}

#[derive(Deserialize)]
struct UniverseDump {
    codes: Vec<HfCode>,
}

/// Accepts a structure file, a report holding one under `structure`, a
/// report with `codes` (the universe is rebuilt from them), or adjacency
/// matrix text.
pub fn structure(path: &Path) -> Result<LoadedStructure, CliError> {
    let text = read_text(path)?;
    let bad = |e: String| CliError::Input(format!("{}: {e}", path.display()));
    if !looks_like_json(&text) {
        let structure = FinStructure::from_matrix_text(&text).map_err(|e| bad(e.to_string()))?;
        return Ok(LoadedStructure { structure, universe: None });
    }
    let value: Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    if value.get("codes").is_some() {
        let dump: UniverseDump = serde_json::from_value(value).map_err(|e| bad(e.to_string()))?;
        let universe = HfUniverse::from_codes(dump.codes);
        return Ok(LoadedStructure { structure: universe.structure().clone(), universe: Some(universe) });
    }
    let inner = value.get("structure").cloned().unwrap_or(value);
    let file: StructureFile = serde_json::from_value(inner).map_err(|e| bad(e.to_string()))?;
    let structure = FinStructure::from_file(&file).map_err(|e| bad(e.to_string()))?;
    Ok(LoadedStructure { structure, universe: None })
}

/// JSON graph file or edge-list text.
pub fn graph(path: &Path) -> Result<Graph, CliError> {
    let text = read_text(path)?;
    let parsed = if looks_like_json(&text) { Graph::from_json(&text) } else { Graph::from_edge_list(&text) };
    parsed.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CorpusFile {
    Spec(CorpusSpec),
    Graphs { graphs: Vec<GraphFile> },
}

/// A corpus spec (generated here) or an explicit `{"graphs": [...]}` list.
pub fn corpus(path: &Path) -> Result<Vec<Graph>, CliError> {
    match read_json::<CorpusFile>(path)? {
        CorpusFile::Spec(spec) => generate(&spec).map_err(|e| CliError::Input(e.to_string())),
        CorpusFile::Graphs { graphs } => graphs
            .into_iter()
            .map(|g| Graph::try_from(g).map_err(|e| CliError::Input(e.to_string())))
            .collect(),
    }
}

#[derive(Deserialize)]
struct PackFile {
    name: String,
    formulas: Vec<String>,
}

/// A shipped pack by name, or a `{"name", "formulas": [text, ...]}` file,
/// closed under subformulas either way.
pub fn pack(spec: &str) -> Result<FormulaPack, CliError> {
    if let Some(p) = packs::named(spec) {
        return Ok(p);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(CliError::Input(format!(
            "`{spec}` is neither a pack file nor one of: {}",
            packs::NAMES.join(", ")
        )));
    }
    let file: PackFile = read_json(path)?;
    let sources: Vec<&str> = file.formulas.iter().map(String::as_str).collect();
    let pack = FormulaPack::parse(&file.name, &sources).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(pack.subformula_closure())
}

/// `0,1,5` or empty.
pub fn id_list(s: &str) -> Result<Subset, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|e| CliError::Input(format!("`{t}`: {e}"))))
        .collect()
}

/// `x=1,y=2`.
pub fn valuation(s: &str) -> Result<Valuation, CliError> {
    let mut v = BTreeMap::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("`{item}` is not of the form var=element")))?;
        let value = value.trim().parse().map_err(|e| CliError::Input(format!("`{item}`: {e}")))?;
        v.insert(name.trim().to_string(), value);
    }
    Ok(v)
}

/// A JSON array of edge lists, one per member.
pub fn parts(path: &Path) -> Result<Vec<EdgeSet>, CliError> {
    let raw: Vec<Vec<[u32; 2]>> = read_json(path)?;
    raw.into_iter()
        .map(|part| {
            part.into_iter()
                .map(|pair| Edge::try_from(pair).map_err(|e| CliError::Input(e.to_string())))
                .collect()
        })
        .collect()
}

pub fn stages(path: &Path) -> Result<Vec<ObjectSet>, CliError> {
    read_json(path)
}

pub fn family(path: &Path) -> Result<SetFamily, CliError> {
    read_json::<Vec<Set>>(path).map(SetFamily::new)
}

pub fn trace_model(path: &Path) -> Result<TraceModel, CliError> {
    read_json(path)
}

/// `{"1": [2, 3], ...}`; the ground set is the key set.
pub fn mapping(path: &Path) -> Result<(BTreeSet<u32>, SetMapping), CliError> {
    let f: SetMapping = read_json(path)?;
    Ok((f.keys().copied().collect(), f))
}
