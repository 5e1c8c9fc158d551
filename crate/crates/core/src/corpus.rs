// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! The bundled edge-list corpus and seeded random graph generators.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{is_bipartite, load_graph, nb_period, Graph};

macro_rules! corpus_entry {
    ($name:literal) => {
        ($name, include_str!(concat!("../../../corpus/", $name, ".edges")))
    };
}

/// `(name, edge-list text)` for every bundled graph.
pub const CORPUS: &[(&str, &str)] = &[
    corpus_entry!("p2"),
    corpus_entry!("p3"),
    corpus_entry!("c3"),
    corpus_entry!("c4"),
    corpus_entry!("c5"),
    corpus_entry!("paw"),
    corpus_entry!("bowtie"),
    corpus_entry!("k4"),
    corpus_entry!("k33"),
    corpus_entry!("karate"),
    corpus_entry!("pendant_tree"),
    corpus_entry!("collar_tree"),
    corpus_entry!("overlapping_collars"),
    corpus_entry!("collar4"),
    corpus_entry!("eight_3_9"),
];

pub fn corpus_graph(name: &str) -> Option<Graph> {
    CORPUS.iter().find(|(n, _)| *n == name).map(|(_, text)| load_graph(text).expect("bundled graphs are valid"))
}

pub fn corpus() -> Vec<(&'static str, Graph)> {
    CORPUS.iter().map(|(n, text)| (*n, load_graph(text).expect("bundled graphs are valid"))).collect()
}

pub fn cycle_graph(n: usize) -> Graph {
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_edges(&edges).expect("n ≥ 3")
}

/// Uniform random labelled tree on `n ≥ 2` nodes, via a Prüfer sequence.
pub fn random_tree_on<R: Rng>(rng: &mut R, n: usize) -> Graph {
    assert!(n >= 2);
    if n == 2 {
        return Graph::from_edges(&[(0, 1)]).expect("edge");
    }
    let prufer: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &p in &prufer {
        degree[p] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &p in &prufer {
        let leaf = (0..n).find(|&u| degree[u] == 1).expect("a leaf exists");
        edges.push((leaf, p));
        degree[leaf] -= 1;
        degree[p] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&u| degree[u] == 1).collect();
    edges.push((rest[0], rest[1]));
    Graph::from_edges(&edges).expect("a tree")
}

/// Random tree with `2 ≤ n ≤ n_max` nodes.
pub fn random_tree<R: Rng>(rng: &mut R, n_max: usize) -> Graph {
    let n = rng.gen_range(2..=n_max.max(2));
    random_tree_on(rng, n)
}

/// Random connected graph with `2 ≤ n ≤ n_max`: a random tree plus each
/// remaining pair independently with probability `p`.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n_max: usize, p: f64) -> Graph {
    let tree = random_tree(rng, n_max);
    let n = tree.n();
    let mut edges = tree.edges().to_vec();
    for u in 0..n {
        for v in u + 1..n {
            if !tree.has_edge(u, v) && rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(&edges).expect("connected")
}

/// Random md2, non-bipartite host with NB-period 1 and at least two cycles,
/// on `5 ≤ n ≤ n_max` nodes. Leaves of a random tree are tied back into the
/// graph until the minimum degree is two.
pub fn random_md2_host<R: Rng>(rng: &mut R, n_max: usize) -> Graph {
    loop {
        let n = rng.gen_range(5..=n_max.max(5));
        let tree = random_tree_on(rng, n);
        let mut edges = tree.edges().to_vec();
        let mut adj = vec![vec![false; n]; n];
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            adj[u][v] = true;
            adj[v][u] = true;
            degree[u] += 1;
            degree[v] += 1;
        }
        for u in 0..n {
            if degree[u] < 2 {
                let candidates: Vec<usize> = (0..n).filter(|&v| v != u && !adj[u][v]).collect();
                if let Some(&v) = candidates.choose(rng) {
                    add_edge(u, v, &mut adj, &mut degree, &mut edges);
                }
            }
        }
        for _ in 0..rng.gen_range(0..=2) {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u != v && !adj[u][v] {
                add_edge(u, v, &mut adj, &mut degree, &mut edges);
            }
        }
        let g = Graph::from_edges(&edges).expect("connected");
        if g.is_md2() && !g.is_cycle() && !is_bipartite(&g) && nb_period(&g) == Ok(1) {
            return g;
        }
    }
}

fn add_edge(u: usize, v: usize, adj: &mut [Vec<bool>], degree: &mut [usize], edges: &mut Vec<(usize, usize)>) {
    adj[u][v] = true;
    adj[v][u] = true;
    degree[u] += 1;
    degree[v] += 1;
    edges.push((u, v));
}

/// `d` distinct random nodes of `g`, sorted.
pub fn random_attachment<R: Rng>(rng: &mut R, g: &Graph, d: usize) -> Vec<usize> {
    let nodes: Vec<usize> = (0..g.n()).collect();
    let mut picked: Vec<usize> = nodes.choose_multiple(rng, d.min(g.n())).copied().collect();
    picked.sort_unstable();
    picked
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn corpus_loads() {
        let all = corpus();
        assert_eq!(all.len(), CORPUS.len());
        let karate = corpus_graph("karate").unwrap();
        assert_eq!((karate.n(), karate.m()), (34, 78));
        assert!(corpus_graph("missing").is_none());
    }

    #[test]
    fn generators_respect_their_contracts() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let t = random_tree(&mut rng, 12);
            assert!(t.is_tree() && t.n() <= 12);
            let g = random_connected_graph(&mut rng, 8, 0.3);
            assert!(g.n() <= 8);
            let h = random_md2_host(&mut rng, 20);
            assert!(h.is_md2() && !is_bipartite(&h) && h.n() <= 20 && h.m() > h.n());
            let a = random_attachment(&mut rng, &h, 3);
            assert_eq!(a.len(), 3);
            assert!(a.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
