use std::collections::BinaryHeap;

use super::{GraphDepth, WeightedGraph};
use crate::error::Result;
use crate::heap::MinEntry;

/// Density-weighted path depth: the minimal sum of wᵢⱼ(ρᵢ + ρⱼ)/2 over
/// paths to the boundary, by multi-source Dijkstra.
pub fn path_depth(graph: &WeightedGraph) -> Result<GraphDepth> {
    graph.check_solvable()?;
    let n = graph.len();
    let rho = graph.density();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for i in graph.boundary_nodes() {
        dist[i] = 0.0;
        heap.push(MinEntry { value: 0.0, node: i });
    }
    while let Some(MinEntry { value, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        for (j, w) in graph.neighbors(node) {
            if done[j] {
                continue;
            }
            let cand = value + w * (rho[node] + rho[j]) / 2.0;
            if cand < dist[j] {
                dist[j] = cand;
                heap.push(MinEntry { value: cand, node: j });
            }
        }
    }
    Ok(GraphDepth::from_values(dist))
}
