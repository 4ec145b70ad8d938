use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::Graph;

/// Induced subgraph on the largest connected component.
///
/// Among equally large components the one containing the smallest node index
/// wins. Node order is preserved; the returned vector maps every original
/// index to its new index, or `None` for discarded nodes.
pub fn giant_component(g: &Graph) -> (Graph, Vec<Option<usize>>) {
    let n = g.node_count();
    let mut label = alloc::vec![usize::MAX; n];
    let mut best: Option<(usize, usize)> = None; // (label, size)
    let mut stack = Vec::new();
    let mut next_label = 0;
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let mut size = 0;
        label[start] = next_label;
        stack.push(start);
        while let Some(u) = stack.pop() {
            size += 1;
            for &v in g.neighbors(u) {
                if label[v] == usize::MAX {
                    label[v] = next_label;
                    stack.push(v);
                }
            }
        }
        // Components are discovered in order of their minimum index, so a
        // strict comparison keeps the earliest among ties.
        if best.is_none_or(|(_, s)| size > s) {
            best = Some((next_label, size));
        }
        next_label += 1;
    }

    let Some((keep, size)) = best else {
        return (Graph::empty(0), Vec::new());
    };
    if size == n {
        return (g.clone(), (0..n).map(Some).collect());
    }
    let mut mapping = alloc::vec![None; n];
    let mut next = 0;
    for (old, slot) in mapping.iter_mut().enumerate() {
        if label[old] == keep {
            *slot = Some(next);
            next += 1;
        }
    }
    let edges = g
        .edges()
        .filter_map(|(u, v)| Some((mapping[u]?, mapping[v]?)))
        .collect::<Vec<_>>();
    let sub = Graph::from_edges(size, edges).expect("induced subgraph of a valid graph is valid");
    (sub, mapping)
}

/// Counts nodes whose squared degree exceeds the sum of their neighbors'
/// degrees, `deg(v)² > Σ_{j ∈ N(v)} deg(j)`.
///
/// Isolated nodes are never hubs (`0 > 0` is false).
pub fn count_hubs(g: &Graph) -> usize {
    (0..g.node_count())
        .filter(|&v| {
            let d = g.degree(v) as u64;
            let neighbor_sum: u64 = g.neighbors(v).iter().map(|&j| g.degree(j) as u64).sum();
            d * d > neighbor_sum
        })
        .count()
}

/// Number of nodes per degree value.
pub fn degree_histogram(g: &Graph) -> BTreeMap<usize, usize> {
    let mut hist = BTreeMap::new();
    for v in 0..g.node_count() {
        *hist.entry(g.degree(v)).or_insert(0) += 1;
    }
    hist
}
