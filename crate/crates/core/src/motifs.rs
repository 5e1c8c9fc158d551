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

//! Pendants, collars and bracelets: the small cycle structures that carry
//! eigenvectors with root-of-unity eigenvalues, plus the leak test that
//! separates those eigenvectors from all others.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::graph::Graph;
use crate::linalg::{column_rank, numerical_rank, CMatrix, CVector, LinalgError, DEFAULT_EPS_RANK};
use crate::nb::EdgeVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MotifError {
    #[error("motif analysis needs minimum degree 2, found {min_degree}; peel to the 2-core first")]
    NotMinDegreeTwo { min_degree: usize },
    #[error("{lambda} is not a root of unity of order dividing {size}")]
    NotRootOfUnity { lambda: Complex64, size: usize },
    #[error("eigenvalue {lambda} is real; motif vectors need λ² ≠ 1")]
    RealRoot { lambda: Complex64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MotifKind {
    Pendant,
    Collar,
    Bracelet,
    /// The whole graph is a cycle.
    Cycle,
}

/// A closed walk `nodes[0] → nodes[1] → … → nodes[r−1] → nodes[0]` with the
/// first anchor at position 0. A bracelet visits its anchor twice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Motif {
    pub kind: MotifKind,
    pub size: usize,
    pub nodes: Vec<usize>,
    pub anchors: Vec<usize>,
}

impl Motif {
    /// Oriented edge indices `i → i+1` around the walk.
    pub fn forward_edges(&self, g: &Graph) -> Vec<usize> {
        let r = self.size;
        (0..r)
            .map(|i| g.edge_index(self.nodes[i], self.nodes[(i + 1) % r]).expect("motif edge"))
            .collect()
    }

    pub fn backward_edges(&self, g: &Graph) -> Vec<usize> {
        self.forward_edges(g).into_iter().map(|e| g.reverse(e)).collect()
    }
}

#[derive(Debug, Clone)]
struct Chain {
    start: usize,
    interior: Vec<usize>,
    end: usize,
}

impl Chain {
    fn len(&self) -> usize {
        self.interior.len() + 1
    }
}

fn require_md2(g: &Graph) -> Result<(), MotifError> {
    if g.is_md2() {
        Ok(())
    } else {
        Err(MotifError::NotMinDegreeTwo { min_degree: g.min_degree() })
    }
}

/// Maximal paths of degree-2 nodes between anchors, each listed once.
fn chains(g: &Graph) -> Vec<Chain> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for a in (0..g.n()).filter(|&u| g.degree(u) > 2) {
        for &first in g.neighbors(a) {
            let mut prev = a;
            let mut cur = first;
            let mut interior = Vec::new();
            while g.degree(cur) == 2 {
                interior.push(cur);
                let next = g.neighbors(cur).iter().copied().find(|&w| w != prev).expect("degree 2");
                prev = cur;
                cur = next;
            }
            let mut key = vec![a];
            key.extend(&interior);
            key.push(cur);
            let mut rev = key.clone();
            rev.reverse();
            let key = key.min(rev);
            if seen.insert(key) {
                out.push(Chain { start: a, interior, end: cur });
            }
        }
    }
    out
}

/// Enumerates pendants, collars and bracelets of an md2 graph.
///
/// A loop chain at one anchor gives a pendant (odd) or a collar (even). Two
/// chains of equal length `L ≥ 2` between distinct anchors give a collar of
/// size `2L` with the anchors opposite each other. Two loops of equal length
/// at the same anchor give a bracelet of size twice the loop length. A graph
/// without anchors is a cycle and is reported as one whole-graph motif.
pub fn find_motifs(g: &Graph) -> Result<Vec<Motif>, MotifError> {
    require_md2(g)?;
    if g.is_cycle() {
        let mut nodes = vec![0];
        let mut prev = usize::MAX;
        let mut cur = 0;
        loop {
            let next = g.neighbors(cur).iter().copied().find(|&w| w != prev).expect("degree 2");
            if next == 0 {
                break;
            }
            nodes.push(next);
            prev = cur;
            cur = next;
        }
        return Ok(vec![Motif { kind: MotifKind::Cycle, size: nodes.len(), nodes, anchors: Vec::new() }]);
    }

    let all = chains(g);
    let loops: Vec<&Chain> = all.iter().filter(|c| c.start == c.end).collect();
    let mut motifs = Vec::new();
    for c in &loops {
        let mut nodes = vec![c.start];
        nodes.extend(&c.interior);
        let size = nodes.len();
        let kind = if size % 2 == 1 { MotifKind::Pendant } else { MotifKind::Collar };
        motifs.push(Motif { kind, size, nodes, anchors: vec![c.start] });
    }

    let bridges: Vec<&Chain> = all.iter().filter(|c| c.start != c.end && c.len() >= 2).collect();
    for (i, p) in bridges.iter().enumerate() {
        for q in &bridges[i + 1..] {
            let same_ends = (p.start, p.end) == (q.start, q.end) || (p.start, p.end) == (q.end, q.start);
            if !same_ends || p.len() != q.len() {
                continue;
            }
            let a = p.start.min(p.end);
            let b = p.start.max(p.end);
            let oriented = |c: &Chain| -> Vec<usize> {
                if c.start == a {
                    c.interior.clone()
                } else {
                    c.interior.iter().rev().copied().collect()
                }
            };
            let mut nodes = vec![a];
            nodes.extend(oriented(p));
            nodes.push(b);
            nodes.extend(oriented(q).into_iter().rev());
            motifs.push(Motif { kind: MotifKind::Collar, size: nodes.len(), nodes, anchors: vec![a, b] });
        }
    }

    for (i, p) in loops.iter().enumerate() {
        for q in &loops[i + 1..] {
            if p.start == q.start && p.len() == q.len() {
                let mut nodes = vec![p.start];
                nodes.extend(&p.interior);
                nodes.push(p.start);
                nodes.extend(&q.interior);
                motifs.push(Motif { kind: MotifKind::Bracelet, size: nodes.len(), nodes, anchors: vec![p.start] });
            }
        }
    }
    motifs.sort_by(|x, y| (x.size, x.kind, &x.nodes).cmp(&(y.size, y.kind, &y.nodes)));
    Ok(motifs)
}

fn check_root(lambda: Complex64, size: usize) -> Result<(), MotifError> {
    if (lambda.powu(size as u32) - 1.0).norm() > 1e-9 {
        return Err(MotifError::NotRootOfUnity { lambda, size });
    }
    if (lambda * lambda - 1.0).norm() <= 1e-9 {
        return Err(MotifError::RealRoot { lambda });
    }
    Ok(())
}

/// Eigenvector supported on the motif: `v[i→i+1] = λ^(−i)` and
/// `v[i+1→i] = −λ^(i+1)`, with positions taken around the motif's walk.
pub fn motif_eigenvector(g: &Graph, motif: &Motif, lambda: Complex64) -> Result<EdgeVector, MotifError> {
    check_root(lambda, motif.size)?;
    let mut v = vec![Complex64::new(0.0, 0.0); g.dim()];
    let fwd = motif.forward_edges(g);
    for (i, &e) in fwd.iter().enumerate() {
        v[e] = lambda.powi(-(i as i32));
        v[g.reverse(e)] = -lambda.powi(i as i32 + 1);
    }
    Ok(v)
}

/// All independent vectors a motif contributes at `λ`: one, or two for the
/// whole-graph cycle (one circulation in each direction).
pub fn motif_eigenvectors(g: &Graph, motif: &Motif, lambda: Complex64) -> Result<Vec<EdgeVector>, MotifError> {
    let mut out = vec![motif_eigenvector(g, motif, lambda)?];
    if motif.kind == MotifKind::Cycle {
        let mut v = vec![Complex64::new(0.0, 0.0); g.dim()];
        for (i, &e) in motif.forward_edges(g).iter().enumerate() {
            v[e] = lambda.powi(-(i as i32));
        }
        out.push(v);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakReport {
    pub leaky: bool,
    /// Nodes `k` with `d_k ≠ 2` and non-negligible inflow.
    pub leak_nodes: Vec<usize>,
}

/// `v` leaks through `k` when `(d_k − 2)·Σ_i v[i→k] ≠ 0`; inflows below
/// `1e−10·‖v‖∞` count as zero.
pub fn is_leaky(g: &Graph, v: &[Complex64]) -> LeakReport {
    is_leaky_with(g, v, 1e-10)
}

pub fn is_leaky_with(g: &Graph, v: &[Complex64], tol: f64) -> LeakReport {
    let vmax = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let leak_nodes: Vec<usize> = (0..g.n())
        .filter(|&k| g.degree(k) != 2)
        .filter(|&k| {
            let into: Complex64 = g.in_edges(k).map(|e| v[e]).sum();
            into.norm() > tol * vmax
        })
        .collect();
    LeakReport { leaky: !leak_nodes.is_empty(), leak_nodes }
}

/// Residual of `(d_k − 1)·into(k) = λ·from(k)` maximized over nodes.
pub fn in_out_balance_residual(g: &Graph, lambda: Complex64, v: &[Complex64]) -> f64 {
    (0..g.n())
        .map(|k| {
            let into: Complex64 = g.in_edges(k).map(|e| v[e]).sum();
            let from: Complex64 = g.out_edges(k).map(|e| v[e]).sum();
            (into * (g.degree(k) as f64 - 1.0) - lambda * from).norm()
        })
        .fold(0.0, f64::max)
}

/// For an eigenvector with `λ ≠ 0`, every nonzero `v[k→l]` has a nonzero
/// predecessor `v[i→k]` with `i ≠ l`. Following the largest predecessor
/// backwards must revisit an edge; the revisited segment is a closed
/// NB-walk on which every value is nonzero. Returns its edges in walk order.
pub fn nonzero_cycle(g: &Graph, v: &[Complex64], tol: f64) -> Option<Vec<usize>> {
    let vmax = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if vmax == 0.0 {
        return None;
    }
    let nonzero = |e: usize| v[e].norm() > tol * vmax;
    let start = (0..v.len()).max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm()))?;
    let mut position = vec![usize::MAX; v.len()];
    let mut path = vec![start];
    position[start] = 0;
    let mut cur = start;
    loop {
        let (k, l) = (g.source(cur), g.target(cur));
        let prev = g
            .in_edges(k)
            .filter(|&e| g.source(e) != l && nonzero(e))
            .max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm()))?;
        if position[prev] != usize::MAX {
            let mut cycle: Vec<usize> = path[position[prev]..].to_vec();
            cycle.reverse();
            return Some(cycle);
        }
        position[prev] = path.len();
        path.push(prev);
        cur = prev;
    }
}

/// Smallest `r ≤ max_order` with `|λ^r − 1| < tol`.
pub fn root_of_unity_order(lambda: Complex64, max_order: usize, tol: f64) -> Option<usize> {
    let mut power = Complex64::new(1.0, 0.0);
    for r in 1..=max_order {
        power *= lambda;
        if (power - 1.0).norm() < tol {
            return Some(r);
        }
    }
    None
}

/// Primitive roots of unity of order `o`, by increasing argument in `[0, 2π)`.
pub fn primitive_roots(order: usize) -> Vec<Complex64> {
    (0..order)
        .filter(|&k| k.gcd(&order) == 1)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / order as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderPrediction {
    pub order: usize,
    /// Motifs whose size is a multiple of `order`.
    pub motif_count: usize,
    /// Motifs whose size equals `order` (2 for the whole-graph cycle).
    pub raw: usize,
    /// Rank of all motif vectors at `exp(2πi/order)`.
    pub independent: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitPrediction {
    pub motifs: Vec<Motif>,
    pub orders: Vec<OrderPrediction>,
}

impl UnitPrediction {
    pub fn for_order(&self, order: usize) -> Option<&OrderPrediction> {
        self.orders.iter().find(|o| o.order == order)
    }
}

/// Predicted geometric multiplicity of each non-real root of unity, for every
/// order that divides some motif size.
pub fn predict_unit_spectrum(g: &Graph) -> Result<UnitPrediction, MotifError> {
    let motifs = find_motifs(g)?;
    let mut orders = BTreeSet::new();
    for m in &motifs {
        for o in 3..=m.size {
            if m.size % o == 0 {
                orders.insert(o);
            }
        }
    }
    let mut out = Vec::new();
    for o in orders {
        let lambda = Complex64::from_polar(1.0, 2.0 * PI / o as f64);
        let mut vectors = Vec::new();
        let mut raw = 0;
        let mut motif_count = 0;
        for m in motifs.iter().filter(|m| m.size % o == 0) {
            motif_count += 1;
            let contributed = motif_eigenvectors(g, m, lambda)?;
            if m.size == o {
                raw += contributed.len();
            }
            vectors.extend(contributed.into_iter().map(CVector::from_vec));
        }
        let independent = column_rank(&vectors, DEFAULT_EPS_RANK)?;
        out.push(OrderPrediction { order: o, motif_count, raw, independent });
    }
    Ok(UnitPrediction { motifs, orders: out })
}

/// `i²I − iA + (D − I) = D − 2I − iA`, the quadratic Ihara–Bass factor at
/// `λ = i`; its nullity equals the geometric multiplicity of `i` in the NB
/// spectrum on graphs with `m > n`.
pub fn complex_laplacian(g: &Graph) -> CMatrix {
    let n = g.n();
    let mut m = CMatrix::zeros(n, n);
    for u in 0..n {
        m[(u, u)] = Complex64::new(g.degree(u) as f64 - 2.0, 0.0);
    }
    for &(u, v) in g.edges() {
        m[(u, v)] = Complex64::new(0.0, -1.0);
        m[(v, u)] = Complex64::new(0.0, -1.0);
    }
    m
}

pub fn complex_laplacian_nullity(g: &Graph) -> Result<usize, MotifError> {
    Ok(numerical_rank(&complex_laplacian(g), DEFAULT_EPS_RANK)?.nullity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{load_graph, two_core};
    use crate::nb::NbOperator;

    const BOWTIE: &str = "0 1\n0 2\n1 2\n0 3\n0 4\n3 4";

    fn residual(g: &Graph, lambda: Complex64, v: &[Complex64]) -> f64 {
        let bv = NbOperator::build(g).apply(v).unwrap();
        bv.iter().zip(v).map(|(a, b)| (a - lambda * b).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn paw_core_is_a_cycle() {
        let paw = load_graph("0 1\n1 2\n1 3\n2 3").unwrap();
        assert!(find_motifs(&paw).is_err());
        let (core, _) = two_core(&paw).unwrap();
        let motifs = find_motifs(&core).unwrap();
        assert_eq!(motifs.len(), 1);
        assert_eq!((motifs[0].kind, motifs[0].size), (MotifKind::Cycle, 3));
    }

    #[test]
    fn bowtie_motifs() {
        let g = load_graph(BOWTIE).unwrap();
        let motifs = find_motifs(&g).unwrap();
        let kinds: Vec<_> = motifs.iter().map(|m| (m.kind, m.size)).collect();
        assert_eq!(kinds, vec![(MotifKind::Pendant, 3), (MotifKind::Pendant, 3), (MotifKind::Bracelet, 6)]);
        let bracelet = &motifs[2];
        assert_eq!(bracelet.nodes.iter().filter(|&&u| u == 0).count(), 2);
    }

    #[test]
    fn square_with_opposite_anchors_is_a_collar() {
        // C4 on 0-1-2-3, anchors 0 and 2 each carry a triangle
        let g = load_graph("0 1\n1 2\n2 3\n3 0\n0 4\n4 5\n5 0\n2 6\n6 7\n7 2").unwrap();
        let motifs = find_motifs(&g).unwrap();
        let collars: Vec<_> = motifs.iter().filter(|m| m.kind == MotifKind::Collar).collect();
        assert_eq!(collars.len(), 1);
        assert_eq!(collars[0].size, 4);
        assert_eq!(collars[0].anchors, vec![0, 2]);
        assert_eq!(collars[0].nodes[2], 2);
    }

    #[test]
    fn eigenvectors_satisfy_the_eigen_relation() {
        let j = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        let bowtie = load_graph(BOWTIE).unwrap();
        for m in find_motifs(&bowtie).unwrap() {
            for lambda in primitive_roots(m.size) {
                let v = motif_eigenvector(&bowtie, &m, lambda).unwrap();
                assert!(residual(&bowtie, lambda, &v) <= 1e-10);
                assert!(!is_leaky(&bowtie, &v).leaky);
                let support: BTreeSet<usize> = (0..v.len()).filter(|&e| v[e].norm() > 0.0).collect();
                let mut expected: BTreeSet<usize> = m.forward_edges(&bowtie).into_iter().collect();
                expected.extend(m.backward_edges(&bowtie));
                assert_eq!(support, expected);
            }
        }
        let pendant = &find_motifs(&bowtie).unwrap()[0];
        let v = motif_eigenvector(&bowtie, pendant, j).unwrap();
        let fwd = pendant.forward_edges(&bowtie);
        assert!((v[fwd[0]] - 1.0).norm() < 1e-15);
        assert!((v[fwd[1]] - j.inv()).norm() < 1e-15);
        assert!((v[fwd[2]] - j.powi(-2)).norm() < 1e-15);
    }

    #[test]
    fn collar_fourth_roots() {
        let g = load_graph("0 1\n1 2\n2 3\n3 0\n0 4\n4 5\n5 0\n2 6\n6 7\n7 2").unwrap();
        let collar = find_motifs(&g).unwrap().into_iter().find(|m| m.kind == MotifKind::Collar).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let v = motif_eigenvector(&g, &collar, i).unwrap();
        assert!(residual(&g, i, &v) <= 1e-10);
    }

    #[test]
    fn invalid_roots_are_rejected() {
        let bowtie = load_graph(BOWTIE).unwrap();
        let pendant = &find_motifs(&bowtie).unwrap()[0];
        assert!(matches!(
            motif_eigenvector(&bowtie, pendant, Complex64::new(0.0, 1.0)),
            Err(MotifError::NotRootOfUnity { .. })
        ));
        let bracelet = &find_motifs(&bowtie).unwrap()[2];
        assert!(matches!(
            motif_eigenvector(&bowtie, bracelet, Complex64::new(-1.0, 0.0)),
            Err(MotifError::RealRoot { .. })
        ));
    }

    #[test]
    fn single_inflow_into_a_hub_leaks() {
        let paw = load_graph("0 1\n1 2\n1 3\n2 3").unwrap();
        let mut v = vec![Complex64::new(0.0, 0.0); paw.dim()];
        v[paw.edge_index(0, 1).unwrap()] = Complex64::new(1.0, 0.0);
        let report = is_leaky(&paw, &v);
        assert!(report.leaky);
        assert_eq!(report.leak_nodes, vec![1]);
    }

    #[test]
    fn mixed_pendant_and_collar_is_not_an_eigenvector() {
        // triangle 0-4-5 and square 0-1-2-3 share node 0
        let g = load_graph("0 1\n1 2\n2 3\n3 0\n0 4\n4 5\n5 0").unwrap();
        let motifs = find_motifs(&g).unwrap();
        let pendant = motifs.iter().find(|m| m.kind == MotifKind::Pendant).unwrap();
        let collar = motifs.iter().find(|m| m.kind == MotifKind::Collar && m.size == 4).unwrap();
        let j = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        let i = Complex64::new(0.0, 1.0);
        let a = motif_eigenvector(&g, pendant, j).unwrap();
        let b = motif_eigenvector(&g, collar, i).unwrap();
        let sum: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        assert!(!is_leaky(&g, &sum).leaky);
        let bv = NbOperator::build(&g).apply(&sum).unwrap();
        let num: Complex64 = bv.iter().zip(&sum).map(|(x, y)| x * y.conj()).sum();
        let den: f64 = sum.iter().map(|z| z.norm_sqr()).sum();
        let rayleigh = num / den;
        let res = bv.iter().zip(&sum).map(|(x, y)| (x - rayleigh * y).norm()).fold(0.0, f64::max);
        assert!(res > 1e-3);
    }

    #[test]
    fn prediction_examples() {
        let bowtie = load_graph(BOWTIE).unwrap();
        let p = predict_unit_spectrum(&bowtie).unwrap();
        let o3 = p.for_order(3).unwrap();
        assert_eq!((o3.raw, o3.independent), (2, 2));
        let o6 = p.for_order(6).unwrap();
        assert_eq!((o6.raw, o6.independent), (1, 1));

        let c5 = load_graph("0 1\n1 2\n2 3\n3 4\n4 0").unwrap();
        let p = predict_unit_spectrum(&c5).unwrap();
        assert_eq!(p.orders.len(), 1);
        assert_eq!((p.orders[0].order, p.orders[0].raw, p.orders[0].independent), (5, 2, 2));

        let overlapping = load_graph("0 1\n0 2\n0 3\n0 4\n1 2\n1 3\n1 4").unwrap();
        let p = predict_unit_spectrum(&overlapping).unwrap();
        let o4 = p.for_order(4).unwrap();
        assert_eq!((o4.raw, o4.independent), (3, 2));
    }

    #[test]
    fn order_search() {
        let j = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        assert_eq!(root_of_unity_order(j, 12, 1e-6), Some(3));
        assert_eq!(root_of_unity_order(Complex64::new(1.1, 0.0), 12, 1e-6), None);
        assert_eq!(primitive_roots(6).len(), 2);
    }

    #[test]
    fn complex_laplacian_counts_fourth_root_multiplicity() {
        let overlapping = load_graph("0 1\n0 2\n0 3\n0 4\n1 2\n1 3\n1 4").unwrap();
        assert_eq!(complex_laplacian_nullity(&overlapping).unwrap(), 2);
        let bowtie = load_graph(BOWTIE).unwrap();
        assert_eq!(complex_laplacian_nullity(&bowtie).unwrap(), 0);
    }

    #[test]
    fn greedy_cycle_on_motif_vector() {
        let bowtie = load_graph(BOWTIE).unwrap();
        let bracelet = &find_motifs(&bowtie).unwrap()[2];
        let lambda = Complex64::from_polar(1.0, PI / 3.0);
        let v = motif_eigenvector(&bowtie, bracelet, lambda).unwrap();
        let cycle = nonzero_cycle(&bowtie, &v, 1e-10).unwrap();
        assert!(cycle.iter().all(|&e| v[e].norm() > 0.0));
        for w in 0..cycle.len() {
            let (a, b) = (cycle[w], cycle[(w + 1) % cycle.len()]);
            assert_eq!(bowtie.target(a), bowtie.source(b));
            assert_ne!(bowtie.reverse(a), b);
        }
        assert!(in_out_balance_residual(&bowtie, lambda, &v) < 1e-12);
    }
}
