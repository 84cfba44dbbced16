//! Dependency graph over the products of a circuit.
//!
//! Two products that touch a common qubit are ordered by their position in
//! the circuit, whether or not the operators commute. Only the most recent
//! earlier product on each qubit becomes a predecessor, which keeps the DAG
//! sparse without changing any layer depth.

use alloc::vec;
use alloc::vec::Vec;

use crate::Circuit;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskGraph {
    preds: Vec<Vec<u32>>,
    succs: Vec<Vec<u32>>,
    layer: Vec<u32>,
    sizes: Vec<u32>,
    num_layers: u32,
}

/// Whole-circuit parallelism summary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParallelismStats {
    pub num_layers: u32,
    pub avg_products_per_layer: f64,
    pub max_products_per_layer: u32,
    /// Number of π/8 products, i.e. the T count.
    pub t_count: usize,
}

/// Statistics over one window of consecutive layers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowStats {
    /// First layer covered by the window.
    pub layer_index: u32,
    pub avg_products: f64,
    pub max_products: u32,
    pub avg_size: f64,
    pub max_size: u32,
}

impl TaskGraph {
    pub fn build(circuit: &Circuit) -> TaskGraph {
        let n = circuit.len();
        let mut last_writer: Vec<Option<u32>> = vec![None; circuit.num_qubits() as usize];
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        let mut layer = vec![0u32; n];
        let mut sizes = Vec::with_capacity(n);
        let mut num_layers = 0;

        for (i, product) in circuit.products().iter().enumerate() {
            let mut p: Vec<u32> = product
                .qubits()
                .filter_map(|q| last_writer[q as usize])
                .collect();
            p.sort_unstable();
            p.dedup();
            for &j in &p {
                succs[j as usize].push(i as u32);
            }
            layer[i] = p.iter().map(|&j| layer[j as usize] + 1).max().unwrap_or(0);
            num_layers = num_layers.max(layer[i] + 1);
            for q in product.qubits() {
                last_writer[q as usize] = Some(i as u32);
            }
            preds[i] = p;
            sizes.push(product.len() as u32);
        }

        TaskGraph {
            preds,
            succs,
            layer,
            sizes,
            num_layers,
        }
    }

    pub fn len(&self) -> usize {
        self.layer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layer.is_empty()
    }

    pub fn preds(&self, node: usize) -> &[u32] {
        &self.preds[node]
    }

    pub fn succs(&self, node: usize) -> &[u32] {
        &self.succs[node]
    }

    /// All `(predecessor, successor)` edges, ordered by successor then predecessor.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.preds
            .iter()
            .enumerate()
            .flat_map(|(b, ps)| ps.iter().map(move |&a| (a as usize, b)))
    }

    pub fn layer(&self, node: usize) -> u32 {
        self.layer[node]
    }

    pub fn layers(&self) -> &[u32] {
        &self.layer
    }

    pub fn size(&self, node: usize) -> u32 {
        self.sizes[node]
    }

    /// Number of layers, the full-parallelism lower bound on cycles.
    pub fn num_layers(&self) -> u32 {
        self.num_layers
    }

    /// Number of products in each layer.
    pub fn layer_populations(&self) -> Vec<u32> {
        let mut pop = vec![0u32; self.num_layers as usize];
        for &l in &self.layer {
            pop[l as usize] += 1;
        }
        pop
    }

    pub fn parallelism_stats(&self) -> ParallelismStats {
        if self.is_empty() {
            return ParallelismStats {
                num_layers: 0,
                avg_products_per_layer: 0.0,
                max_products_per_layer: 0,
                t_count: 0,
            };
        }
        let pop = self.layer_populations();
        ParallelismStats {
            num_layers: self.num_layers,
            avg_products_per_layer: self.len() as f64 / self.num_layers as f64,
            max_products_per_layer: pop.iter().copied().max().unwrap_or(0),
            t_count: self.len(),
        }
    }

    /// Per-window statistics with stride equal to the window, so the last
    /// window may be short. A window of 0 is treated as 1.
    pub fn moving_window_stats(&self, window: usize) -> Vec<WindowStats> {
        let window = window.max(1);
        let n_layers = self.num_layers as usize;
        let pop = self.layer_populations();
        let mut size_sum = vec![0u64; n_layers];
        let mut size_max = vec![0u32; n_layers];
        for (node, &l) in self.layer.iter().enumerate() {
            size_sum[l as usize] += u64::from(self.sizes[node]);
            size_max[l as usize] = size_max[l as usize].max(self.sizes[node]);
        }

        (0..n_layers)
            .step_by(window)
            .map(|start| {
                let end = (start + window).min(n_layers);
                let products: u64 = pop[start..end].iter().map(|&p| u64::from(p)).sum();
                let sizes: u64 = size_sum[start..end].iter().sum();
                WindowStats {
                    layer_index: start as u32,
                    avg_products: products as f64 / (end - start) as f64,
                    max_products: pop[start..end].iter().copied().max().unwrap_or(0),
                    avg_size: sizes as f64 / products as f64,
                    max_size: size_max[start..end].iter().copied().max().unwrap_or(0),
                }
            })
            .collect()
    }

    /// Nodes in a topological order (sequence order is one).
    pub fn topological_order(&self) -> Vec<usize> {
        let mut indeg: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        let mut ready: Vec<usize> = (0..self.len()).filter(|&i| indeg[i] == 0).rev().collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(n) = ready.pop() {
            order.push(n);
            for &s in self.succs[n].iter().rev() {
                indeg[s as usize] -= 1;
                if indeg[s as usize] == 0 {
                    ready.push(s as usize);
                }
            }
        }
        order
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Pauli, PauliProduct};
    use alloc::collections::BTreeSet;
    use proptest::prelude::*;

    fn graph(n: u32, products: &[&str]) -> TaskGraph {
        TaskGraph::build(&Circuit::parse(n, products.iter().copied()).unwrap())
    }

    #[test]
    fn last_writer_edges() {
        let g = graph(3, &["Z0", "X0 X1", "Z2"]);
        assert_eq!(g.edges().collect::<Vec<_>>(), [(0, 1)]);
        assert_eq!(g.layers(), [0, 1, 0]);
        assert_eq!(g.num_layers(), 2);

        let g = graph(2, &["Z0", "Z1", "Z0"]);
        assert_eq!(g.edges().collect::<Vec<_>>(), [(0, 2)]);
        assert_eq!(g.layers(), [0, 0, 1]);
    }

    #[test]
    fn duplicate_edges_collapse() {
        let g = graph(2, &["X0 X1", "Z0 Z1"]);
        assert_eq!(g.edges().collect::<Vec<_>>(), [(0, 1)]);
    }

    #[test]
    fn singleton_and_empty() {
        let g = graph(1, &["X0"]);
        assert_eq!(g.num_layers(), 1);
        assert_eq!(g.edges().count(), 0);

        let g = graph(4, &[]);
        let s = g.parallelism_stats();
        assert_eq!((s.num_layers, s.max_products_per_layer, s.t_count), (0, 0, 0));
        assert_eq!(s.avg_products_per_layer, 0.0);
        assert!(g.moving_window_stats(100).is_empty());
    }

    #[test]
    fn parallelism_examples() {
        let s = graph(3, &["Z0", "X0 X1", "Z2"]).parallelism_stats();
        assert_eq!(s.avg_products_per_layer, 1.5);
        assert_eq!(s.max_products_per_layer, 2);
        assert_eq!(s.t_count, 3);

        let s = graph(1, &["Z0"; 7]).parallelism_stats();
        assert_eq!((s.avg_products_per_layer, s.max_products_per_layer), (1.0, 1));

        let s = graph(5, &["X0", "Y1", "Z2", "X3", "Y4"]).parallelism_stats();
        assert_eq!(s.num_layers, 1);
        assert_eq!((s.avg_products_per_layer, s.max_products_per_layer), (5.0, 5));
    }

    #[test]
    fn window_examples() {
        let g = graph(3, &["Z0", "X0 X1", "Z2"]);
        let w = g.moving_window_stats(1);
        assert_eq!(w.len(), 2);
        assert_eq!((w[0].avg_products, w[0].max_products), (2.0, 2));
        assert_eq!((w[0].avg_size, w[0].max_size), (1.0, 1));
        assert_eq!((w[1].avg_products, w[1].max_size), (1.0, 2));

        // populations [1, 3]
        let g = graph(4, &["X0 X1 X2", "Z0", "Z1", "Z2 Z3"]);
        assert_eq!(g.layer_populations(), [1, 3]);
        let w = g.moving_window_stats(2);
        assert_eq!(w.len(), 1);
        assert_eq!((w[0].avg_products, w[0].max_products), (2.0, 3));
        assert_eq!(w[0].avg_size, 7.0 / 4.0);
        assert_eq!(w[0].max_size, 3);

        let g = graph(1, &["Z0"; 250]);
        let w = g.moving_window_stats(100);
        assert_eq!(w.len(), 3);
        assert!(w.iter().all(|r| r.avg_products == 1.0 && r.avg_size == 1.0));
        assert_eq!(w[2].layer_index, 200);
    }

    fn arb_circuit() -> impl Strategy<Value = Circuit> {
        let product = proptest::collection::btree_map(0u32..10, 0usize..3, 1..5);
        proptest::collection::vec(product, 0..40).prop_map(|ps| {
            let products = ps
                .into_iter()
                .map(|m| PauliProduct::new(m.into_iter().map(|(q, p)| (q, Pauli::ALL[p])).collect()).unwrap())
                .collect();
            Circuit::new(10, products).unwrap()
        })
    }

    proptest! {
        #[test]
        fn layering_is_sound(c in arb_circuit()) {
            let g = TaskGraph::build(&c);
            prop_assert_eq!(g.topological_order().len(), g.len());
            for (a, b) in g.edges() {
                prop_assert!(a < b);
                prop_assert!(g.layer(a) < g.layer(b));
            }
            // same-layer products never share a qubit
            for l in 0..g.num_layers() {
                let mut seen = BTreeSet::new();
                for (i, p) in c.products().iter().enumerate() {
                    if g.layer(i) == l {
                        for q in p.qubits() {
                            prop_assert!(seen.insert(q));
                        }
                    }
                }
            }
            let total: u32 = g.layer_populations().iter().sum();
            prop_assert_eq!(total as usize, c.len());
            // any two products sharing a qubit are ordered by layer
            for i in 0..c.len() {
                for j in i + 1..c.len() {
                    if c.products()[i].qubits().any(|q| c.products()[j].get(q).is_some()) {
                        prop_assert!(g.layer(i) < g.layer(j));
                    }
                }
            }
            prop_assert_eq!(TaskGraph::build(&c), g);
        }
    }
}
