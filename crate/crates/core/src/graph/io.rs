use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{Edge, Graph, GraphError, Vertex};

/// `{"vertices": [...], "edges": [[u, v], ...]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<[Vertex; 2]>,
}

impl From<&Graph> for GraphFile {
    fn from(g: &Graph) -> Self {
        GraphFile { vertices: g.vertices().to_vec(), edges: g.edges().iter().map(|&e| e.into()).collect() }
    }
}

impl TryFrom<GraphFile> for Graph {
    type Error = GraphError;

    fn try_from(f: GraphFile) -> Result<Self, GraphError> {
        let edges = f.edges.into_iter().map(Edge::try_from).collect::<Result<Vec<_>, _>>()?;
        Graph::new(f.vertices, edges)
    }
}

impl Graph {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphFile::from(self)).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Graph, GraphError> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
        Graph::try_from(file)
    }

    /// One edge `u v` per line; a line with a single number declares an
    /// isolated vertex; `#` starts a comment.
    pub fn from_edge_list(text: &str) -> Result<Graph, GraphError> {
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|t| t.parse::<Vertex>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| GraphError::Parse(format!("line {}: {e}", lineno + 1)))?;
            match nums.as_slice() {
                [v] => vertices.push(*v),
                [a, b] => {
                    vertices.extend([*a, *b]);
                    edges.push(Edge::new(*a, *b).ok_or(GraphError::Loop(*a))?);
                }
                _ => return Err(GraphError::Parse(format!("line {}: expected one or two vertices", lineno + 1))),
            }
        }
        Graph::new(vertices, edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for &v in self.vertices() {
            if self.degree(v) == 0 {
                writeln!(out, "{v}").expect("string write");
            }
        }
        for e in self.edges() {
            writeln!(out, "{} {}", e.lo(), e.hi()).expect("string write");
        }
        out
    }
}

const PALETTE: [&str; 8] = ["red", "blue", "darkgreen", "orange", "purple", "brown", "magenta", "cyan"];

/// DOT text; edges listed in `classes` are coloured by class index.
pub fn to_dot(g: &Graph, classes: &BTreeMap<Edge, usize>) -> String {
    let mut out = String::from("graph G {\n");
    for v in g.vertices() {
        writeln!(out, "  {v};").expect("string write");
    }
    for e in g.edges() {
        match classes.get(e) {
            Some(&c) => writeln!(
                out,
                "  {} -- {} [color={}, label=\"{c}\"];",
                e.lo(),
                e.hi(),
                PALETTE[c % PALETTE.len()]
            ),
            None => writeln!(out, "  {} -- {};", e.lo(), e.hi()),
        }
        .expect("string write");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::super::named::*;
    use super::*;

    #[test]
    fn json_round_trip() {
        let g = bowtie();
        assert_eq!(g.to_json(), r#"{"vertices":[0,1,2,3,4],"edges":[[0,1],[0,2],[1,2],[2,3],[2,4],[3,4]]}"#);
        assert_eq!(Graph::from_json(&g.to_json()).unwrap(), g);
        let reversed = Graph::from_json(r#"{"vertices":[0,1],"edges":[[1,0]]}"#).unwrap();
        assert_eq!(reversed.edges(), &[Edge::of(0, 1)]);
        assert!(Graph::from_json(r#"{"vertices":[0],"edges":[[0,0]]}"#).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::new([0, 1, 2, 7], [Edge::of(0, 1), Edge::of(1, 2)]).unwrap();
        let text = g.to_edge_list();
        assert_eq!(text, "7\n0 1\n1 2\n");
        assert_eq!(Graph::from_edge_list(&text).unwrap(), g);
        assert_eq!(Graph::from_edge_list("# c4\n0 1\n1 2 # x\n2 3\n3 0\n").unwrap(), cycle(4));
        assert!(Graph::from_edge_list("0 1 2\n").is_err());
    }

    #[test]
    fn dot_colours_classes() {
        let dot = to_dot(&path(3), &BTreeMap::from([(Edge::of(0, 1), 1)]));
        assert!(dot.contains("0 -- 1 [color=blue, label=\"1\"];"));
        assert!(dot.contains("  1 -- 2;\n"));
    }
}
