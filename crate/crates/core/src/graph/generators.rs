use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Graph, GraphError, GraphSpec, Model};

/// Generates a graph for `spec` with the model it names.
pub fn generate(spec: &GraphSpec) -> Result<Graph, GraphError> {
    match spec.model {
        Model::Er => generate_er(spec),
        Model::Ba => generate_ba(spec),
    }
}

/// Erdős–Rényi `G(n, p)` with `p = ⟨k⟩ / (n − 1)`.
///
/// Pairs are visited in lexicographic order `(0,1), (0,2), …, (n−2,n−1)` with
/// one Bernoulli draw each, so a seed fixes the edge set exactly.
pub fn generate_er(spec: &GraphSpec) -> Result<Graph, GraphError> {
    if spec.model != Model::Er {
        return Err(GraphError::InvalidSpec("generate_er called with a non-ER spec"));
    }
    spec.validate()?;
    let n = spec.node_count;
    let p = spec.edge_probability().min(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut edges = Vec::with_capacity((p * (n * (n - 1) / 2) as f64) as usize + 16);
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// Barabási–Albert preferential attachment.
///
/// Growth starts from a clique on `m + 1` nodes, `m = round(⟨k⟩ / 2)`. Every
/// later node picks `m` distinct existing targets with probability
/// proportional to their current degree (re-drawing on collision) and then
/// links to all of them.
pub fn generate_ba(spec: &GraphSpec) -> Result<Graph, GraphError> {
    if spec.model != Model::Ba {
        return Err(GraphError::InvalidSpec("generate_ba called with a non-BA spec"));
    }
    spec.validate()?;
    let n = spec.node_count;
    let m = spec.attachment_count();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);

    let mut edges = Vec::with_capacity(m * (m + 1) / 2 + m * (n - m - 1));
    // Every edge contributes both endpoints, so a uniform draw from this list
    // picks a node with probability proportional to its degree.
    let mut endpoints = Vec::with_capacity(2 * edges.capacity());
    for u in 0..=m {
        for v in u + 1..=m {
            edges.push((u, v));
            endpoints.push(u);
            endpoints.push(v);
        }
    }

    let mut chosen = Vec::with_capacity(m);
    for new in m + 1..n {
        chosen.clear();
        while chosen.len() < m {
            let target = endpoints[rng.random_range(0..endpoints.len())];
            if !chosen.contains(&target) {
                chosen.push(target);
            }
        }
        for &target in &chosen {
            edges.push((target, new));
            endpoints.push(target);
            endpoints.push(new);
        }
    }
    Graph::from_edges(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::degree_histogram;

    fn spec(model: Model, n: usize, k: f64, seed: u64) -> GraphSpec {
        GraphSpec { model, node_count: n, avg_degree: k, rng_seed: seed }
    }

    fn assert_simple_undirected(g: &Graph) {
        for u in 0..g.node_count() {
            let row = g.neighbors(u);
            assert!(row.windows(2).all(|w| w[0] < w[1]), "duplicate or unsorted neighbor");
            assert!(!row.contains(&u), "self-loop at {u}");
            for &v in row {
                assert!(g.neighbors(v).contains(&u), "asymmetric edge {u}-{v}");
            }
        }
        assert_eq!(g.degrees().iter().sum::<usize>() % 2, 0);
    }

    #[test]
    fn er_two_nodes_full_probability_always_has_the_edge() {
        for seed in 0..20 {
            let g = generate_er(&spec(Model::Er, 2, 1.0, seed)).unwrap();
            assert_eq!(g.edge_count(), 1);
        }
    }

    #[test]
    fn er_mean_edge_count_matches_binomial_moments() {
        // Oracle: edge count ~ Binomial(M, q), M = 499500, q = 6/999.
        // Mean of 200 draws has sd sqrt(M q (1-q) / 200).
        let pairs = 499_500.0;
        let q = 6.0 / 999.0;
        let mean = pairs * q;
        let sd_of_mean = libm::sqrt(pairs * q * (1.0 - q) / 200.0);
        let total: usize = (0..200)
            .map(|s| generate_er(&spec(Model::Er, 1000, 6.0, s)).unwrap().edge_count())
            .sum();
        let sample_mean = total as f64 / 200.0;
        assert!((mean - 3000.0).abs() < 1e-9);
        assert!(
            (sample_mean - mean).abs() < 3.0 * sd_of_mean,
            "sample mean {sample_mean} vs {mean} ± {}",
            3.0 * sd_of_mean
        );
    }

    #[test]
    fn er_is_simple_and_reproducible() {
        let s = spec(Model::Er, 300, 5.0, 9);
        let a = generate_er(&s).unwrap();
        assert_simple_undirected(&a);
        assert_eq!(a, generate_er(&s).unwrap());
        assert_ne!(a, generate_er(&spec(Model::Er, 300, 5.0, 10)).unwrap());
    }

    #[test]
    fn ba_edge_count_and_average_degree() {
        let g = generate_ba(&spec(Model::Ba, 1000, 6.0, 3)).unwrap();
        // Seed clique C(4,2) plus 3 edges per later node.
        assert_eq!(g.edge_count(), 6 + 3 * (1000 - 4));
        let k = g.average_degree();
        assert!((5.9..=6.0).contains(&k), "⟨k⟩ = {k}");
        assert!(g.is_connected());
        assert_simple_undirected(&g);
    }

    #[test]
    fn ba_min_degree_is_attachment_count() {
        for seed in 0..5 {
            let g = generate_ba(&spec(Model::Ba, 1000, 6.0, seed)).unwrap();
            let hist = degree_histogram(&g);
            assert_eq!(*hist.keys().next().unwrap(), 3);
        }
    }

    #[test]
    fn ba_rejects_too_few_nodes() {
        assert!(matches!(
            generate_ba(&spec(Model::Ba, 4, 6.0, 0)),
            Err(GraphError::InvalidSpec(_))
        ));
    }

    #[test]
    fn ba_is_reproducible_and_connected_for_many_seeds() {
        for seed in 0..30 {
            let s = spec(Model::Ba, 120, 4.0, seed);
            let g = generate_ba(&s).unwrap();
            assert!(g.is_connected());
            assert_eq!(g, generate_ba(&s).unwrap());
        }
    }

    #[test]
    fn model_mismatch_is_rejected() {
        assert!(generate_er(&spec(Model::Ba, 10, 2.0, 0)).is_err());
        assert!(generate_ba(&spec(Model::Er, 10, 2.0, 0)).is_err());
    }
}
