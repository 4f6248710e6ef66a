//! JSON description of a graph of groups.
//!
//! ```json
//! {"p": 2,
//!  "vertices": [{"name": "F", "presentation": "p=2; gens=x1,x2"}],
//!  "edges": [{"name": "e", "from": "F", "to": "F", "group": "p=2; gens=c",
//!             "boundary0": ["x1"], "boundary1": ["x2"]}],
//!  "tree": []}
//! ```
//!
//! `tree` lists edge names; when absent a spanning tree is chosen greedily
//! in edge order.

use std::collections::BTreeSet;

use demushkin_core::gog::{Edge, GraphOfGroups};
use serde::Deserialize;

use crate::dsl::{fresh_name, parse_presentation, parse_word, DslError};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GogFile {
    pub p: u64,
    pub vertices: Vec<VertexEntry>,
    #[serde(default)]
    pub edges: Vec<EdgeEntry>,
    pub tree: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub name: String,
    pub presentation: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub name: String,
    pub from: String,
    pub to: String,
    pub group: String,
    pub boundary0: Vec<String>,
    pub boundary1: Vec<String>,
}

#[derive(Debug)]
pub enum GogFileError {
    Json(serde_json::Error),
    Dsl { context: String, error: DslError },
    Structure(String),
    Core(demushkin_core::Error),
}

impl std::fmt::Display for GogFileError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GogFileError::Json(e) => write!(f, "malformed graph file: {}", e),
            GogFileError::Dsl { context, error } => write!(f, "{}: {}", context, error),
            GogFileError::Structure(m) => f.write_str(m),
            GogFileError::Core(e) => write!(f, "{}", e),
        }
    }
}

/// A graph of groups with a chosen tree and display names for every
/// generator of the assembled presentation.
pub struct LoadedGog {
    pub gog: GraphOfGroups,
    pub tree: BTreeSet<usize>,
    pub names: Vec<String>,
}

fn find(names: &[&str], what: &str, name: &str) -> Result<usize, GogFileError> {
    names
        .iter()
        .position(|n| *n == name)
        .ok_or_else(|| GogFileError::Structure(format!("unknown {} '{}'", what, name)))
}

fn greedy_tree(vertices: usize, edges: &[Edge]) -> BTreeSet<usize> {
    let mut parent: Vec<usize> = (0..vertices).collect();
    fn root(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            v = parent[v];
        }
        v
    }
    let mut tree = BTreeSet::new();
    for (i, e) in edges.iter().enumerate() {
        let (a, b) = (root(&mut parent, e.from), root(&mut parent, e.to));
        if a != b {
            parent[a] = b;
            tree.insert(i);
        }
    }
    tree
}

pub fn load(text: &str) -> Result<LoadedGog, GogFileError> {
    let doc: GogFile = serde_json::from_str(text).map_err(GogFileError::Json)?;
    let mut vertices = Vec::new();
    let mut vertex_names = Vec::new();
    for v in &doc.vertices {
        let np = parse_presentation(&v.presentation)
            .map_err(|error| GogFileError::Dsl { context: format!("vertex '{}'", v.name), error })?;
        if np.presentation.prime() != doc.p {
            return Err(GogFileError::Structure(format!("vertex '{}' is not over p={}", v.name, doc.p)));
        }
        vertex_names.push(np.names.clone());
        vertices.push(np);
    }
    let vnames: Vec<&str> = doc.vertices.iter().map(|v| v.name.as_str()).collect();
    let mut edges = Vec::new();
    for e in &doc.edges {
        let from = find(&vnames, "vertex", &e.from)?;
        let to = find(&vnames, "vertex", &e.to)?;
        let group = parse_presentation(&e.group)
            .map_err(|error| GogFileError::Dsl { context: format!("edge '{}' group", e.name), error })?;
        let words = |list: &[String], v: usize| {
            list.iter()
                .map(|w| {
                    parse_word(w, &vertex_names[v])
                        .map_err(|error| GogFileError::Dsl { context: format!("edge '{}' boundary", e.name), error })
                })
                .collect::<Result<Vec<_>, _>>()
        };
        edges.push(Edge {
            from,
            to,
            group: group.presentation,
            boundary0: words(&e.boundary0, from)?,
            boundary1: words(&e.boundary1, to)?,
        });
    }
    let tree = match &doc.tree {
        Some(list) => {
            let enames: Vec<&str> = doc.edges.iter().map(|e| e.name.as_str()).collect();
            list.iter().map(|n| find(&enames, "edge", n)).collect::<Result<BTreeSet<_>, _>>()?
        }
        None => greedy_tree(vertices.len(), &edges),
    };

    let mut names: Vec<String> = Vec::new();
    let all: Vec<&String> = vertex_names.iter().flatten().collect();
    for (v, list) in vertex_names.iter().enumerate() {
        for n in list {
            let clash = all.iter().filter(|m| **m == n).count() > 1;
            let base = if clash { format!("{}{}", doc.vertices[v].name, n) } else { n.clone() };
            names.push(fresh_name(&base, &names));
        }
    }
    for e in &doc.edges {
        names.push(fresh_name(&format!("t{}", e.name), &names));
    }

    let gog = GraphOfGroups::new(vertices.into_iter().map(|v| v.presentation).collect(), edges)
        .map_err(GogFileError::Core)?;
    Ok(LoadedGog { gog, tree, names })
}
