//! Edge-path distances and the graph diameter.

use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::mesh::norm;
use super::Manifold;

/// Adjacency lists with Euclidean edge lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeGraph {
    pub neighbors: Vec<Vec<(usize, f64)>>,
}

/// Edge graph of a manifold (edge weights are Euclidean lengths).
pub fn edge_graph(manifold: &Manifold) -> EdgeGraph {
    let n = manifold.vertex_count();
    let mut neighbors = vec![Vec::new(); n];
    let mut push = |i: usize, j: usize, w: f64| {
        neighbors[i].push((j, w));
        neighbors[j].push((i, w));
    };
    match manifold {
        Manifold::Graph(g) => g.edges().into_iter().for_each(|(i, j, w)| push(i, j, w)),
        Manifold::Mesh(m) => m
            .edges()
            .into_iter()
            .for_each(|(i, j)| push(i, j, norm(m.edge_vector(i, j)))),
    }
    EdgeGraph { neighbors }
}

#[derive(Copy, Clone, PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra distances from `source` to every vertex.
pub fn single_source_distances(graph: &EdgeGraph, source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; graph.neighbors.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry {
        dist: 0.0,
        node: source,
    });
    while let Some(Entry { dist: d, node }) = heap.pop() {
        if d > dist[node] {
            continue;
        }
        for &(next, w) in &graph.neighbors[node] {
            let candidate = d + w;
            if candidate < dist[next] {
                dist[next] = candidate;
                heap.push(Entry {
                    dist: candidate,
                    node: next,
                });
            }
        }
    }
    dist
}

/// Largest shortest-path distance over all vertex pairs, paths confined to
/// edges. Overestimates the geodesic diameter of the underlying surface.
pub fn graph_diameter(manifold: &Manifold) -> f64 {
    let graph = edge_graph(manifold);
    (0..graph.neighbors.len())
        .into_par_iter()
        .map(|s| single_source_distances(&graph, s).into_iter().fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max)
}
