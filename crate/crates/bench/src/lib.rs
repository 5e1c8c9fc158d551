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

//! Inputs shared by the benchmarks.

use nbspec::corpus::{corpus_graph, random_md2_host};
use nbspec::graph::{two_core, Graph};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Karate club 2-core: md2, non-bipartite, 2m = 148.
pub fn karate_core() -> Graph {
    two_core(&corpus_graph("karate").expect("bundled")).expect("has cycles").0
}

/// Fixed random md2 hosts with at most `n_max` nodes.
pub fn hosts(count: usize, n_max: usize) -> Vec<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..count).map(|_| random_md2_host(&mut rng, n_max)).collect()
}
