//! Presentations of fundamental groups of finite graphs of groups.
//!
//! Vertex generators are laid out vertex by vertex, followed by one stable
//! letter `t_e` per edge. Each edge contributes
//! `t_e d0(x) t_e^-1 d1(x)^-1` for every edge-group generator `x`; tree edges
//! have `t_e` killed.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::words::{Gen, Presentation, Word};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub group: Presentation,
    /// Images of the edge-group generators in the `from` vertex group.
    pub boundary0: Vec<Word>,
    /// Images in the `to` vertex group.
    pub boundary1: Vec<Word>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphOfGroups {
    vertices: Vec<Presentation>,
    edges: Vec<Edge>,
}

impl GraphOfGroups {
    /// Injectivity of the boundary maps is not checked.
    pub fn new(vertices: Vec<Presentation>, edges: Vec<Edge>) -> Result<GraphOfGroups> {
        let p = vertices.first().map(Presentation::prime);
        for (i, e) in edges.iter().enumerate() {
            for end in [e.from, e.to] {
                if end >= vertices.len() {
                    return Err(Error::BadInput(alloc::format!("edge {} ends at missing vertex {}", i, end)));
                }
            }
            let k = e.group.generator_count();
            for found in [e.boundary0.len(), e.boundary1.len()] {
                if found != k {
                    return Err(Error::BoundaryLength { edge: i, expected: k, found });
                }
            }
            for (vertex, words) in [(e.from, &e.boundary0), (e.to, &e.boundary1)] {
                let count = vertices[vertex].generator_count();
                if let Some(w) = words.iter().find(|w| w.generator_bound() > count) {
                    return Err(Error::GeneratorOutOfRange { index: w.generator_bound() - 1, count });
                }
            }
        }
        let primes = vertices.iter().map(Presentation::prime).chain(edges.iter().map(|e| e.group.prime()));
        if let Some(q) = primes.clone().find(|q| Some(*q) != p) {
            return Err(Error::BadInput(alloc::format!("mixed primes {} and {}", p.unwrap_or(q), q)));
        }
        Ok(GraphOfGroups { vertices, edges })
    }

    pub fn vertices(&self) -> &[Presentation] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Index of vertex `v`'s first generator in the assembled presentation.
    pub fn vertex_offset(&self, v: usize) -> usize {
        self.vertices[..v].iter().map(Presentation::generator_count).sum()
    }

    fn vertex_generators(&self) -> usize {
        self.vertex_offset(self.vertices.len())
    }

    /// Generator `t_e` of edge `e`.
    pub fn edge_letter(&self, e: usize) -> Gen {
        Gen(self.vertex_generators() + e)
    }

    /// Checks that `tree` is a spanning tree of the underlying graph.
    pub fn check_spanning_tree(&self, tree: &BTreeSet<usize>) -> Result<()> {
        let n = self.vertices.len();
        if tree.iter().any(|&e| e >= self.edges.len()) || tree.len() + 1 != n {
            return Err(Error::NotSpanningTree);
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(parent: &mut [usize], mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        for &e in tree {
            let (a, b) = (root(&mut parent, self.edges[e].from), root(&mut parent, self.edges[e].to));
            if a == b {
                return Err(Error::NotSpanningTree);
            }
            parent[a] = b;
        }
        Ok(())
    }
}

/// `pi_1` of the graph of groups relative to a spanning tree. Every edge
/// keeps its letter `t_e`; tree edges contribute the relator `t_e`.
pub fn fundamental_presentation(gog: &GraphOfGroups, tree: &BTreeSet<usize>) -> Result<Presentation> {
    gog.check_spanning_tree(tree)?;
    let p = gog.vertices.first().map_or(2, Presentation::prime);
    let total = gog.vertex_generators() + gog.edges.len();
    let mut relators = Vec::new();
    for (v, pres) in gog.vertices.iter().enumerate() {
        let off = gog.vertex_offset(v);
        relators.extend(pres.relators().iter().map(|r| r.shifted(off)));
    }
    for (i, e) in gog.edges.iter().enumerate() {
        let t = Word::generator(gog.edge_letter(i));
        let in_tree = tree.contains(&i);
        if in_tree {
            relators.push(t.clone());
        }
        let (t, t_inv) = if in_tree { (Word::empty(), Word::empty()) } else { (t.clone(), t.inverse()) };
        let (o0, o1) = (gog.vertex_offset(e.from), gog.vertex_offset(e.to));
        for (d0, d1) in e.boundary0.iter().zip(&e.boundary1) {
            let rel = t.concat(&d0.shifted(o0)).concat(&t_inv).concat(&d1.shifted(o1).inverse());
            relators.push(rel);
        }
    }
    Presentation::new(p, total, relators)
}

/// Drops the tree letters and their relators `t_e`, renumbering the
/// remaining generators.
pub fn eliminate_tree_letters(gog: &GraphOfGroups, tree: &BTreeSet<usize>, pres: &Presentation) -> Result<Presentation> {
    let killed: BTreeSet<usize> = tree.iter().map(|&e| gog.edge_letter(e).0).collect();
    let renumber: Vec<Option<usize>> = {
        let mut next = 0;
        (0..pres.generator_count())
            .map(|g| {
                if killed.contains(&g) {
                    None
                } else {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect()
    };
    let mut relators = Vec::new();
    for r in pres.relators() {
        if r.syllable_count() == 1 && killed.contains(&r.syllables()[0].0 .0) {
            continue;
        }
        if r.syllables().iter().any(|(g, _)| killed.contains(&g.0)) {
            return Err(Error::Inconsistent(String::from("killed letter survives in a relator")));
        }
        relators.push(r.map_generators(|g| Gen(renumber[g.0].expect("letter not killed"))));
    }
    Presentation::new(pres.prime(), pres.generator_count() - killed.len(), relators)
}

fn free_cyclic(p: u64) -> Result<Presentation> {
    Presentation::new(p, 1, Vec::new())
}

/// `A amalgamated with B` along the procyclic groups generated by `wa` and
/// `wb`, with the tree letter removed. Generators of B follow those of A.
pub fn amalgam(a: &Presentation, b: &Presentation, wa: &Word, wb: &Word) -> Result<Presentation> {
    let edge = Edge { from: 0, to: 1, group: free_cyclic(a.prime())?, boundary0: vec![wa.clone()], boundary1: vec![wb.clone()] };
    let gog = GraphOfGroups::new(vec![a.clone(), b.clone()], vec![edge])?;
    let tree = BTreeSet::from([0]);
    eliminate_tree_letters(&gog, &tree, &fundamental_presentation(&gog, &tree)?)
}

/// `HNN(A, <w0>, t)` with `t w0 t^-1 = w1`; `t` is the last generator.
pub fn hnn(a: &Presentation, w0: &Word, w1: &Word) -> Result<Presentation> {
    let edge = Edge { from: 0, to: 0, group: free_cyclic(a.prime())?, boundary0: vec![w0.clone()], boundary1: vec![w1.clone()] };
    let gog = GraphOfGroups::new(vec![a.clone()], vec![edge])?;
    fundamental_presentation(&gog, &BTreeSet::new())
}
