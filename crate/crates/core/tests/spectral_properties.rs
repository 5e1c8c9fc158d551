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

//! Spectral, motif and eigenvector invariants over the corpus and random graphs.

use nbspec::corpus::{corpus, random_connected_graph};
use nbspec::graph::{is_bipartite, shell_decomposition, two_core, Graph};
use nbspec::linalg::{determinant, eig, CMatrix, LogDet};
use nbspec::motifs::{
    complex_laplacian_nullity, find_motifs, in_out_balance_residual, is_leaky, motif_eigenvector, nonzero_cycle,
    predict_unit_spectrum, primitive_roots, root_of_unity_order,
};
use nbspec::nb::NbOperator;
use nbspec::spectrum::{compute_spectrum, cyclomatic, spectra_agree, Class};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn columns(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.ncols()).map(|j| m.column(j).iter().copied().collect()).collect()
}

fn md2_corpus() -> Vec<(&'static str, Graph)> {
    corpus().into_iter().filter(|(_, g)| g.is_md2()).collect()
}

/// Jordan blocks at 0 scatter the computed zeros by about ε^(1/k), so they
/// are compared by count.
fn split_zeros(values: Vec<Complex64>) -> (usize, Vec<Complex64>) {
    let (zeros, rest): (Vec<_>, Vec<_>) = values.into_iter().partition(|z| z.norm() < 1e-3);
    (zeros.len(), rest)
}

#[test]
fn transpose_and_pbp_share_the_spectrum() {
    for (name, g) in corpus() {
        let op = NbOperator::build(&g);
        let b = op.to_dense();
        let p = CMatrix::from_fn(g.dim(), g.dim(), |i, j| Complex64::new(f64::from(u8::from(g.reverse(i) == j)), 0.0));
        let pbp = &p * &b * &p;
        let base = split_zeros(eig(&b).unwrap().values);
        let bt = split_zeros(eig(&b.transpose()).unwrap().values);
        let pbp_values = split_zeros(eig(&pbp).unwrap().values);
        assert_eq!(base.0, bt.0, "{name}: zeros of the transpose");
        assert_eq!(base.0, pbp_values.0, "{name}: zeros of PBP");
        assert!(spectra_agree(&base.1, &bt.1, 1e-6), "{name}: transpose");
        assert!(spectra_agree(&base.1, &pbp_values.1, 1e-6), "{name}: PBP");
        assert_eq!((&pbp - b.transpose()).norm(), 0.0, "{name}: PBP = B^T");
    }
}

#[test]
fn determinant_is_the_product_of_eigenvalues() {
    for (name, g) in corpus() {
        let b = NbOperator::build(&g).to_dense();
        let shifted = &b - CMatrix::identity(g.dim(), g.dim()) * Complex64::new(0.3, 0.2);
        let det = determinant(&shifted).unwrap();
        let prod = eig(&shifted).unwrap().values.iter().fold(LogDet::ONE, |acc, &z| acc.mul_complex(z));
        assert!(LogDet::relative_difference(det, prod) <= 1e-6, "{name}");
    }
}

#[test]
fn motif_vectors_are_exact_non_leaky_eigenvectors() {
    for (name, g) in md2_corpus() {
        let op = NbOperator::build(&g);
        for motif in find_motifs(&g).unwrap() {
            let support: std::collections::BTreeSet<usize> =
                motif.forward_edges(&g).into_iter().chain(motif.backward_edges(&g)).collect();
            for lambda in primitive_roots(motif.size) {
                if (lambda * lambda - 1.0).norm() < 1e-9 {
                    continue;
                }
                let v = motif_eigenvector(&g, &motif, lambda).unwrap();
                let bv = op.apply(&v).unwrap();
                let res = bv.iter().zip(&v).map(|(a, b)| (a - lambda * b).norm()).fold(0.0, f64::max);
                assert!(res <= 1e-10, "{name}: {:?} residual {res:e}", motif.kind);
                assert!(!is_leaky(&g, &v).leaky, "{name}: leaky motif vector");
                let nz: std::collections::BTreeSet<usize> = (0..v.len()).filter(|&e| v[e].norm() > 0.0).collect();
                assert_eq!(nz, support, "{name}: support");
            }
        }
    }
}

#[test]
fn eigenpair_lemmas_on_md2_corpus() {
    for (name, g) in md2_corpus() {
        let r = compute_spectrum(&g).unwrap();
        for (cl, basis) in r.clusters.iter().zip(&r.cluster_bases) {
            for v in columns(basis) {
                let lambda = cl.centroid;
                let root = root_of_unity_order(lambda, 2 * g.m(), 1e-6).is_some();
                let leaky = is_leaky(&g, &v).leaky;
                assert_eq!(!leaky, root, "{name}: leaky {leaky} at {lambda}");
                assert_eq!(!leaky, (lambda.norm() - 1.0).abs() <= 1e-6, "{name}: unitary vs non-leaky at {lambda}");
                let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!(in_out_balance_residual(&g, lambda, &v) <= 1e-8 * scale.max(1.0) * (1.0 + lambda.norm()), "{name}: balance");
                let cycle = nonzero_cycle(&g, &v, 1e-8).expect("a nonzero cycle");
                for w in cycle.windows(2) {
                    assert_eq!(g.target(w[0]), g.source(w[1]));
                    assert_ne!(g.source(w[0]), g.target(w[1]));
                }
            }
        }
    }
}

#[test]
fn complex_laplacian_counts_four_collars() {
    for (name, g) in md2_corpus() {
        let pred = predict_unit_spectrum(&g).unwrap();
        let nullity = complex_laplacian_nullity(&g).unwrap();
        let r = compute_spectrum(&g).unwrap();
        assert_eq!(nullity, r.gm_at(Complex64::new(0.0, 1.0)), "{name}: nullity vs GM(i)");
        if let Some(four) = pred.for_order(4) {
            if four.raw == four.independent && four.motif_count == four.raw {
                assert_eq!(nullity, four.independent, "{name}");
            }
        }
    }
}

#[test]
fn corpus_spectrum_invariants() {
    for (name, g) in corpus() {
        let r = compute_spectrum(&g).unwrap();
        assert!(r.max_residual <= 1e-8, "{name}: residual {:e}", r.max_residual);
        for cl in &r.clusters {
            if cl.class == Class::Unit {
                assert!(root_of_unity_order(cl.centroid, 2 * g.m(), 1e-6).is_some(), "{name}: {}", cl.centroid);
                assert_eq!(cl.am, cl.gm, "{name}: defective unit cluster");
            }
        }
        assert!(r.companion.agrees, "{name}: companion check");
        assert!(r.ledger.iter().all(|row| row.is_consistent()), "{name}: ledger");
    }
}

fn schur_peel_holds(g: &Graph) -> bool {
    let r = compute_spectrum(g).unwrap();
    let s1 = shell_decomposition(g).s1;
    match two_core(g) {
        Some((core, _)) => {
            let mut expected = compute_spectrum(&core).unwrap().eigenvalues;
            expected.extend(vec![Complex64::new(0.0, 0.0); 2 * s1]);
            spectra_agree(&r.eigenvalues, &expected, 1e-6)
        }
        None => r.eigenvalues.iter().all(|z| z.norm() == 0.0),
    }
}

#[test]
fn corpus_schur_peel() {
    for (name, g) in corpus() {
        assert!(schur_peel_holds(&g), "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_graph_spectral_invariants(seed in any::<u64>()) {
        let g = random_connected_graph(&mut ChaCha8Rng::seed_from_u64(seed), 9, 0.3);
        prop_assert!(schur_peel_holds(&g));
        let r = compute_spectrum(&g).unwrap();
        for cl in r.clusters.iter().filter(|c| c.class == Class::Unit) {
            prop_assert!(root_of_unity_order(cl.centroid, 2 * g.m(), 1e-6).is_some());
            prop_assert_eq!(cl.am, cl.gm);
        }
        if cyclomatic(&g) >= 2 {
            let expected_minus = cyclomatic(&g) - 1 + i64::from(is_bipartite(&g));
            prop_assert_eq!(r.gm_at(Complex64::new(1.0, 0.0)) as i64, cyclomatic(&g));
            prop_assert_eq!(r.gm_at(Complex64::new(-1.0, 0.0)) as i64, expected_minus);
            prop_assert!(!r.clusters.iter().any(|c| c.centroid.norm() > 1e-8 && c.centroid.norm() < 1.0 - 1e-6));
        }
        prop_assert!(r.ledger.iter().all(|row| row.is_consistent()));
    }
}
