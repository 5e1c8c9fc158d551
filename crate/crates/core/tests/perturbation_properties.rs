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

//! Node-addition probes on the corpus and on random hosts.

use nbspec::corpus::{corpus_graph, random_attachment, random_md2_host};
use nbspec::graph::two_core;
use nbspec::linalg::{eig, CMatrix};
use nbspec::nb::NbOperator;
use nbspec::perturbation::{perron, run_probe, Probe};
use nbspec::spectrum::{compute_spectrum, spectra_agree};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn corpus_probes() {
    let karate_core = two_core(&corpus_graph("karate").unwrap()).unwrap().0;
    let hosts = [
        ("k4", corpus_graph("k4").unwrap(), vec![vec![0, 1], vec![0, 1, 2], vec![0, 1, 2, 3]]),
        ("bowtie", corpus_graph("bowtie").unwrap(), vec![vec![1, 2], vec![1, 3], vec![0, 2, 4]]),
        ("collar4", corpus_graph("collar4").unwrap(), vec![vec![1, 3], vec![4, 6, 7]]),
        ("eight_3_9", corpus_graph("eight_3_9").unwrap(), vec![vec![1, 5], vec![0, 6]]),
        ("karate core", karate_core, vec![vec![0, 5], vec![3, 10, 20]]),
    ];
    for (name, host, attachments) in hosts {
        for (i, attach) in attachments.iter().enumerate() {
            let rep = run_probe(&host, attach, 40 + i as u64).unwrap();
            assert!(rep.failures().is_empty(), "{name} + {attach:?}: {:?}", rep.failures());
            assert_eq!(rep.sign_changes, 1, "{name} + {attach:?}");
            assert!(rep.y_negative && rep.y_simple, "{name} + {attach:?}");
            assert!(rep.lambda_c > rep.lambda);
        }
    }
}

#[test]
fn k4_plus_full_attachment_is_k5() {
    let rep = run_probe(&corpus_graph("k4").unwrap(), &[0, 1, 2, 3], 7).unwrap();
    let k5 = corpus_graph("k4").unwrap().with_new_node(&[0, 1, 2, 3]).unwrap();
    let rho = eig(&NbOperator::build(&k5).to_dense()).unwrap().values[0];
    assert!((rho - 3.0).norm() < 1e-8);
    assert!((rep.lambda_c - 3.0).abs() <= 1e-6);
    assert!((rep.eigen_drop - 1.0).abs() <= 1e-6);
}

#[test]
fn leaf_addition_adds_two_zeros() {
    let host = corpus_graph("bowtie").unwrap();
    let extended = host.with_new_node(&[3]).unwrap();
    let mut expected = compute_spectrum(&host).unwrap().eigenvalues;
    expected.extend([Complex64::new(0.0, 0.0); 2]);
    assert!(spectra_agree(&compute_spectrum(&extended).unwrap().eigenvalues, &expected, 1e-6));
    let probe = Probe::new(&host, &[3]).unwrap();
    assert_eq!(probe.find_lambda_c().unwrap().lambda_c, probe.lambda());
}

#[test]
fn decoupled_blocks_give_host_spectrum_plus_zeros() {
    let host = corpus_graph("bowtie").unwrap();
    let probe = Probe::new(&host, &[1, 3, 4]).unwrap();
    let blocks = probe.blocks();
    let dim = host.dim();
    let total = dim + 2 * blocks.d;
    let decoupled = CMatrix::from_fn(total, total, |i, j| match (i < dim, j < dim) {
        (true, true) => Complex64::new(blocks.b.get(i, j) as f64, 0.0),
        (false, false) => Complex64::new(blocks.f_block.get(i - dim, j - dim) as f64, 0.0),
        _ => Complex64::new(0.0, 0.0),
    });
    let mut expected = eig(&NbOperator::build(&host).to_dense()).unwrap().values;
    expected.extend(vec![Complex64::new(0.0, 0.0); 2 * blocks.d]);
    let got = eig(&decoupled).unwrap().values;
    // F is nilpotent of index 2, so its zeros are perturbed by about √ε
    assert!(spectra_agree(&got, &expected, 1e-6));
}

#[test]
fn perron_centrality_matches_into_sums() {
    let g = corpus_graph("k4").unwrap();
    let p = perron(&g).unwrap();
    let c0 = p.centrality[0];
    assert!(p.centrality.iter().all(|c| (c - c0).abs() < 1e-9));
    assert!(p.right.iter().all(|&x| x > 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn random_probes_raise_the_perron_eigenvalue(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let host = random_md2_host(&mut rng, 14);
        let d = rng.gen_range(2..=host.n().min(4));
        let attach = random_attachment(&mut rng, &host, d);
        let rep = run_probe(&host, &attach, seed).unwrap();
        prop_assert!(rep.failures().is_empty(), "{:?}", rep.failures());
        prop_assert!(rep.lambda_c > rep.lambda);
        prop_assert!(rep.alpha11 >= 0.0);
    }
}
