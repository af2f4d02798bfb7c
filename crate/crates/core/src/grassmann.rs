//! The Grassmann graph `Γ_k(V)` and its induced subgraph `Γ(n,k)_q` on
//! non-degenerate codes.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::bitset::BitRow;
use crate::error::{Error, Result};
use crate::fqlinalg::{enumerate_subspaces, Field, Subspace};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    #[serde(rename = "full")]
    FullGrassmann,
    #[serde(rename = "nondegenerate")]
    NonDegenerate,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::FullGrassmann => "full",
            GraphKind::NonDegenerate => "nondegenerate",
        })
    }
}

/// `X` and `Y` are adjacent when `dim(X ∩ Y) = k - 1`.
pub fn is_adjacent(x: &Subspace, y: &Subspace) -> Result<bool> {
    if x.field() != y.field() || x.ambient_dim() != y.ambient_dim() || x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(format!(
            "cannot compare a {}-subspace of F_{}^{} with a {}-subspace of F_{}^{}",
            x.dim(),
            x.field().q(),
            x.ambient_dim(),
            y.dim(),
            y.field().q(),
            y.ambient_dim()
        )));
    }
    Ok(x.dim() > 0 && x.sum_dim(y) == x.dim() + 1)
}

/// No coordinate hyperplane contains `x`; equivalently the basis matrix has
/// no zero column.
pub fn is_nondegenerate(x: &Subspace) -> bool {
    x.zero_columns().is_empty()
}

/// A Grassmann graph or code graph with bit-row adjacency.
///
/// Vertex IDs are positions in the canonical enumeration order, so they are
/// stable across runs.
#[derive(Clone, Debug)]
pub struct CodeGraph {
    n: usize,
    k: usize,
    field: Field,
    kind: GraphKind,
    vertices: Vec<Subspace>,
    adjacency: Vec<BitRow>,
    index: HashMap<Subspace, usize>,
}

pub fn build_graph(n: usize, k: usize, field: Field, kind: GraphKind) -> Result<CodeGraph> {
    field.check_dim(n)?;
    if k == 0 || k >= n {
        return Err(Error::OutOfRange(format!("need 1 <= k <= n-1, got n = {n}, k = {k}")));
    }
    let mut vertices = enumerate_subspaces(n, k, field)?;
    if kind == GraphKind::NonDegenerate {
        vertices.retain(is_nondegenerate);
    }
    if vertices.len() > 1 << 14 {
        return Err(Error::OutOfRange(format!("{} vertices is beyond desk scale", vertices.len())));
    }
    let count = vertices.len();
    let mut adjacency = vec![BitRow::new(count); count];
    for i in 0..count {
        for j in i + 1..count {
            if vertices[i].sum_dim(&vertices[j]) == k + 1 {
                adjacency[i].insert(j);
                adjacency[j].insert(i);
            }
        }
    }
    let index = vertices.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    Ok(CodeGraph { n, k, field, kind, vertices, adjacency, index })
}

impl CodeGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Subspace] {
        &self.vertices
    }

    pub fn vertex(&self, id: usize) -> &Subspace {
        &self.vertices[id]
    }

    pub fn id_of(&self, x: &Subspace) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn adjacency(&self) -> &[BitRow] {
        &self.adjacency
    }

    pub fn neighbors(&self, id: usize) -> &BitRow {
        &self.adjacency[id]
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].contains(j)
    }

    pub fn degree(&self, id: usize) -> usize {
        self.adjacency[id].count()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BitRow::count).sum::<usize>() / 2
    }

    /// `k = 1` or `k = n - 1`: every pair of distinct vertices is adjacent.
    pub fn is_complete_regime(&self) -> bool {
        self.k == 1 || self.k + 1 == self.n
    }

    /// Flips one adjacency bit in both directions. This breaks the graph
    /// invariants and exists for fault-injection runs.
    pub fn toggle_edge(&mut self, i: usize, j: usize) {
        assert_ne!(i, j);
        self.adjacency[i].toggle(j);
        self.adjacency[j].toggle(i);
    }

    /// Rechecks every stored adjacency bit against subspace intersections.
    /// Returns the first offending pair, if any.
    pub fn validate(&self) -> Option<(usize, usize)> {
        for i in 0..self.vertex_count() {
            if self.has_edge(i, i) {
                return Some((i, i));
            }
            for j in 0..self.vertex_count() {
                if i == j {
                    continue;
                }
                let expected = self.vertices[i].intersect(&self.vertices[j]).unwrap().dim() + 1 == self.k;
                if self.has_edge(i, j) != expected || self.has_edge(i, j) != self.has_edge(j, i) {
                    return Some((i, j));
                }
            }
            if self.kind == GraphKind::NonDegenerate && !is_nondegenerate(&self.vertices[i]) {
                return Some((i, i));
            }
        }
        None
    }

    /// Export header `n k q kind |V| |E|` followed by one hex row per vertex.
    pub fn export_text(&self) -> String {
        let mut out = format!(
            "{} {} {} {} {} {}\n",
            self.n,
            self.k,
            self.field.q(),
            self.kind,
            self.vertex_count(),
            self.edge_count()
        );
        for row in &self.adjacency {
            out.push_str(&row.to_hex());
            out.push('\n');
        }
        out
    }

    /// Vertex sidecar: `# id` lines each followed by the subspace block.
    pub fn export_vertices(&self) -> String {
        self.vertices
            .iter()
            .enumerate()
            .map(|(id, s)| format!("# {id}\n{s}\n"))
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Restriction of `ids` to the induced subgraph, in ID order.
    pub fn induced_on(&self, keep: &[usize]) -> CodeGraph {
        let vertices: Vec<Subspace> = keep.iter().map(|&i| self.vertices[i].clone()).collect();
        let m = keep.len();
        let mut adjacency = vec![BitRow::new(m); m];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                if self.has_edge(i, j) {
                    adjacency[a].insert(b);
                }
            }
        }
        let index = vertices.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        CodeGraph { vertices, adjacency, index, ..self.clone() }
    }
}

/// Connected components in order of their smallest vertex.
pub fn connected_components(g: &CodeGraph) -> Vec<Vec<usize>> {
    components_of(g.adjacency())
}

pub(crate) fn components_of(adjacency: &[BitRow]) -> Vec<Vec<usize>> {
    let count = adjacency.len();
    let mut seen = vec![false; count];
    let mut out = Vec::new();
    for start in 0..count {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for w in adjacency[v].iter() {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fqlinalg::{coordinate_hyperplane, gaussian_binomial, FVector};

    const F2: Field = Field::BINARY;

    fn sp(rows: &[&str]) -> Subspace {
        Subspace::span(&rows.iter().map(|r| FVector::parse(F2, r).unwrap()).collect::<Vec<_>>())
            .unwrap()
    }

    #[test]
    fn adjacency_examples() {
        // Q + P^1, Q + P^2
        assert!(is_adjacent(&sp(&["1111", "0111"]), &sp(&["1111", "1011"])).unwrap());
        // P^1 + P^4 and P^1 + P_4
        assert!(is_adjacent(&sp(&["0111", "1110"]), &sp(&["0111", "0001"])).unwrap());
        assert!(!is_adjacent(&sp(&["1000", "0100"]), &sp(&["0010", "0001"])).unwrap());
        assert!(is_adjacent(&sp(&["1000"]), &sp(&["1000", "0100"])).is_err());
        assert!(!is_adjacent(&sp(&["1000", "0100"]), &sp(&["1000", "0100"])).unwrap());
    }

    #[test]
    fn nondegenerate_examples() {
        assert!(is_nondegenerate(&sp(&["1111", "0111"])));
        assert!(!is_nondegenerate(&sp(&["1000", "0100"])));
        assert!(!is_nondegenerate(&sp(&["0111", "0001"])));
    }

    #[test]
    fn vertex_counts() {
        assert_eq!(build_graph(4, 2, F2, GraphKind::NonDegenerate).unwrap().vertex_count(), 13);
        assert_eq!(build_graph(4, 2, F2, GraphKind::FullGrassmann).unwrap().vertex_count(), 35);
        assert_eq!(build_graph(5, 2, F2, GraphKind::NonDegenerate).unwrap().vertex_count(), 40);
    }

    #[test]
    fn build_rejects_bad_parameters() {
        assert!(build_graph(4, 0, F2, GraphKind::FullGrassmann).is_err());
        assert!(build_graph(4, 4, F2, GraphKind::FullGrassmann).is_err());
        assert!(build_graph(17, 2, F2, GraphKind::FullGrassmann).is_err());
    }

    /// Inclusion-exclusion over the coordinate hyperplanes: the j-fold
    /// intersections are (n-j)-dimensional.
    fn inclusion_exclusion(n: u32, k: u32, q: u32) -> i128 {
        let mut total = 0i128;
        let mut binom = 1i128;
        for j in 0..=n {
            let term = binom * gaussian_binomial(n - j, k, q) as i128;
            total += if j % 2 == 0 { term } else { -term };
            binom = binom * (n - j) as i128 / (j + 1) as i128;
        }
        total
    }

    #[test]
    fn nondegenerate_count_matches_union_filter_and_inclusion_exclusion() {
        for n in 4..=7 {
            let full = enumerate_subspaces(n, 2, F2).unwrap();
            let hyperplanes: Vec<_> = (1..=n).map(|i| coordinate_hyperplane(i, n, F2).unwrap()).collect();
            let in_union = full.iter().filter(|x| hyperplanes.iter().any(|c| c.contains(x))).count();
            let g = build_graph(n, 2, F2, GraphKind::NonDegenerate).unwrap();
            assert_eq!(g.vertex_count(), full.len() - in_union);
            assert_eq!(g.vertex_count() as i128, inclusion_exclusion(n as u32, 2, 2));
        }
    }

    #[test]
    fn full_grassmann_degree_formula() {
        for (n, q) in [(4, 2), (5, 2), (6, 2), (4, 3)] {
            let field = Field::new(q).unwrap();
            for k in 2..n - 1 {
                let g = build_graph(n, k, field, GraphKind::FullGrassmann).unwrap();
                let expected = q as u128
                    * gaussian_binomial(k as u32, k as u32 - 1, q)
                    * gaussian_binomial((n - k) as u32, 1, q);
                for v in 0..g.vertex_count() {
                    assert_eq!(g.degree(v) as u128, expected, "n={n} k={k} q={q}");
                }
                assert_eq!(connected_components(&g).len(), 1);
            }
        }
    }

    #[test]
    fn nondegenerate_is_ordered_filter() {
        let full = build_graph(5, 2, F2, GraphKind::FullGrassmann).unwrap();
        let nd = build_graph(5, 2, F2, GraphKind::NonDegenerate).unwrap();
        let filtered: Vec<_> = full.vertices().iter().filter(|x| is_nondegenerate(x)).cloned().collect();
        assert_eq!(nd.vertices(), filtered.as_slice());
        assert_eq!(nd.validate(), None);
        assert_eq!(full.validate(), None);
    }

    #[test]
    fn components() {
        for n in 4..=8 {
            let g = build_graph(n, 2, F2, GraphKind::NonDegenerate).unwrap();
            assert_eq!(connected_components(&g).len(), 1, "n = {n}");
        }
        let edgeless = vec![BitRow::new(2), BitRow::new(2)];
        assert_eq!(components_of(&edgeless), vec![vec![0], vec![1]]);
    }

    #[test]
    fn complete_regime() {
        let g = build_graph(4, 1, F2, GraphKind::FullGrassmann).unwrap();
        assert!(g.is_complete_regime());
        assert_eq!(g.edge_count(), 15 * 14 / 2);
        let g = build_graph(4, 3, F2, GraphKind::FullGrassmann).unwrap();
        assert!(g.is_complete_regime());
        assert!(!build_graph(4, 2, F2, GraphKind::FullGrassmann).unwrap().is_complete_regime());
    }

    #[test]
    fn export_format() {
        let g = build_graph(4, 2, F2, GraphKind::NonDegenerate).unwrap();
        let text = g.export_text();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), format!("4 2 2 nondegenerate 13 {}", g.edge_count()));
        let rows: Vec<_> = lines.collect();
        assert_eq!(rows.len(), 13);
        assert!(rows.iter().all(|r| r.len() == 4));
        let sidecar = g.export_vertices();
        assert!(sidecar.starts_with("# 0\n"));
        assert_eq!(sidecar.matches('#').count(), 13);
    }

    #[test]
    fn validate_catches_toggled_edge() {
        let mut g = build_graph(4, 2, F2, GraphKind::NonDegenerate).unwrap();
        g.toggle_edge(0, 1);
        assert!(g.validate().is_some());
    }
}
