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

use criterion::{criterion_group, criterion_main, Criterion};
use nbspec::corpus::corpus_graph;
use nbspec::nb::NbOperator;
use nbspec::perturbation::{perron, Probe};
use nbspec::spectrum::compute_spectrum;
use nbspec_bench::{hosts, karate_core};
use std::hint::black_box;

fn spectrum(c: &mut Criterion) {
    let karate = corpus_graph("karate").unwrap();
    c.bench_function("compute_spectrum/karate", |b| b.iter(|| compute_spectrum(black_box(&karate)).unwrap()));
    let small = hosts(8, 12);
    c.bench_function("compute_spectrum/random_md2_n12", |b| {
        b.iter(|| {
            for g in &small {
                black_box(compute_spectrum(g).unwrap());
            }
        })
    });
}

fn operator(c: &mut Criterion) {
    let g = karate_core();
    let op = NbOperator::build(&g);
    let v: Vec<f64> = (0..op.dim()).map(|i| i as f64).collect();
    c.bench_function("apply/karate_core", |b| b.iter(|| op.apply(black_box(&v)).unwrap()));
    c.bench_function("inverse/karate_core", |b| b.iter(|| op.inverse().unwrap()));
}

fn perturbation(c: &mut Criterion) {
    let g = karate_core();
    c.bench_function("perron/karate_core", |b| b.iter(|| perron(black_box(&g)).unwrap()));
    let probe = Probe::new(&g, &[0, 5, 10]).unwrap();
    c.bench_function("find_lambda_c/karate_core", |b| b.iter(|| probe.find_lambda_c().unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = spectrum, operator, perturbation
}
criterion_main!(benches);
