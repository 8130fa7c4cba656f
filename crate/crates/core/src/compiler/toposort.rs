use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::graph::GraphDoc;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("graph contains a cycle through {}", .0.join(" -> "))]
pub struct CycleDetected(pub Vec<String>);

/// Kahn's algorithm with the lexicographically smallest ready node taken
/// first. Edges whose endpoints are missing are ignored.
///
/// On failure the reported cycle starts at its smallest node id and follows
/// edge direction.
pub fn toposort(graph: &GraphDoc) -> Result<Vec<String>, CycleDetected> {
    let mut indegree: BTreeMap<&str, usize> =
        graph.nodes.keys().map(|k| (k.as_str(), 0)).collect();
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in &graph.edges {
        let (from, to) = (e.out_node_id.as_str(), e.in_node_id.as_str());
        if !indegree.contains_key(from) || !indegree.contains_key(to) {
            continue;
        }
        *indegree.get_mut(to).expect("present") += 1;
        succ.entry(from).or_default().push(to);
    }

    let mut ready: BTreeSet<&str> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&k, _)| k)
        .collect();
    let mut order = Vec::with_capacity(indegree.len());
    while let Some(next) = ready.pop_first() {
        order.push(next.to_string());
        for &to in succ.get(next).map(Vec::as_slice).unwrap_or_default() {
            let d = indegree.get_mut(to).expect("present");
            *d -= 1;
            if *d == 0 {
                ready.insert(to);
            }
        }
    }
    if order.len() == indegree.len() {
        return Ok(order);
    }

    let remaining: BTreeSet<&str> = indegree
        .iter()
        .filter(|(_, &d)| d > 0)
        .map(|(&k, _)| k)
        .collect();
    Err(CycleDetected(find_cycle(graph, &remaining)))
}

/// Every node in `remaining` has a predecessor in `remaining`, so walking
/// predecessors must revisit a node.
fn find_cycle(graph: &GraphDoc, remaining: &BTreeSet<&str>) -> Vec<String> {
    let mut preds: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for e in &graph.edges {
        let (from, to) = (e.out_node_id.as_str(), e.in_node_id.as_str());
        if remaining.contains(from) && remaining.contains(to) {
            preds.entry(to).or_default().insert(from);
        }
    }
    let mut path: Vec<&str> = Vec::new();
    let mut current = *remaining.first().expect("non-empty");
    loop {
        if let Some(pos) = path.iter().position(|&n| n == current) {
            let mut cycle: Vec<&str> = path[pos..].to_vec();
            cycle.reverse();
            let min = cycle
                .iter()
                .enumerate()
                .min_by_key(|(_, n)| **n)
                .map(|(i, _)| i)
                .expect("non-empty");
            cycle.rotate_left(min);
            return cycle.into_iter().map(str::to_string).collect();
        }
        path.push(current);
        current = *preds[current].first().expect("has predecessor");
    }
}
