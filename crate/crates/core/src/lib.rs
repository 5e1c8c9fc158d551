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

//! Spectra of non-backtracking matrices.
//!
//! The crate builds the non-backtracking (NB) operator of a simple connected
//! graph, computes and classifies its eigenvalues, predicts unit-circle
//! multiplicities from small cycle motifs, assembles explicit eigenvector
//! bases, and studies how the Perron eigenvalue moves when a node is added.

pub mod exact;
pub mod graph;
pub mod linalg;
pub mod nb;
pub mod motifs;
pub mod serde_complex;
pub mod spectrum;
pub mod perturbation;
pub mod corpus;
