//! Steiner trees over the free ancilla cells of one cycle.
//!
//! [`Router::find_steiner_tree`] is a shortest-path heuristic: the tree grows
//! from the first required cell and repeatedly absorbs the nearest
//! unconnected terminal along a shortest path. Ready magic states act as one
//! group terminal (any single ready cell satisfies it), so the magic state is
//! picked jointly with the routing. For `S` terminals the result is within
//! `2 - 2/S` of optimal.
//!
//! Ties are broken deterministically: sources and neighbours are visited in
//! row-major order (neighbours up, left, right, down) and the first shortest
//! path found is kept.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::layout::{Arch, CellKind, Layout};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexRole {
    /// Not usable this cycle: data cells, cells already in a tree, idle ring cells.
    Blocked,
    /// Usable for routing.
    Free,
    /// May only terminate a path (bus ring magic cells).
    LeafOnly,
}

/// One cycle's view of the grid.
#[derive(Clone, Debug)]
pub struct RoutingGraph {
    width: u32,
    height: u32,
    role: Vec<VertexRole>,
    ready: Vec<bool>,
    /// Extra cost for routing through a ready cell.
    ready_penalty: u32,
}

impl RoutingGraph {
    /// Fully free `width × height` grid with no ready cells.
    pub fn open_grid(width: u32, height: u32) -> RoutingGraph {
        let n = (width * height) as usize;
        RoutingGraph {
            width,
            height,
            role: vec![VertexRole::Free; n],
            ready: vec![false; n],
            ready_penalty: 0,
        }
    }

    /// Base graph of a layout: every ancilla free, ring cells leaf-only
    /// unless `ring_intermediates` is set. No cell is ready.
    pub fn from_layout(layout: &Layout, ring_intermediates: bool) -> RoutingGraph {
        let mut g = RoutingGraph::open_grid(layout.width(), layout.height());
        for (i, role) in g.role.iter_mut().enumerate() {
            *role = match layout.kind(i) {
                None | Some(CellKind::Data { .. }) => VertexRole::Blocked,
                Some(CellKind::Magic) if !ring_intermediates => VertexRole::LeafOnly,
                Some(_) => VertexRole::Free,
            };
        }
        debug_assert!(layout.arch() == Arch::Bus || g.role.iter().all(|&r| r != VertexRole::LeafOnly));
        g
    }

    pub fn num_slots(&self) -> usize {
        self.role.len()
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn role(&self, v: usize) -> VertexRole {
        self.role[v]
    }

    pub fn set_role(&mut self, v: usize, role: VertexRole) {
        self.role[v] = role;
    }

    pub fn block(&mut self, v: usize) {
        self.role[v] = VertexRole::Blocked;
        self.ready[v] = false;
    }

    pub fn is_ready(&self, v: usize) -> bool {
        self.ready[v]
    }

    pub fn set_ready(&mut self, v: usize, ready: bool) {
        self.ready[v] = ready;
    }

    pub fn set_ready_penalty(&mut self, penalty: u32) {
        self.ready_penalty = penalty;
    }

    pub fn has_ready(&self) -> bool {
        self.ready
            .iter()
            .zip(&self.role)
            .any(|(&r, &role)| r && role != VertexRole::Blocked)
    }

    /// Usable neighbours in the order up, left, right, down.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let w = self.width as usize;
        let (x, y) = (v % w, v / w);
        let up = (y > 0).then(|| v - w);
        let left = (x > 0).then(|| v - 1);
        let right = (x + 1 < w).then_some(v + 1);
        let down = (y + 1 < self.height as usize).then_some(v + w);
        [up, left, right, down]
            .into_iter()
            .flatten()
            .filter(|&n| self.role[n] != VertexRole::Blocked)
    }

    fn enter_cost(&self, v: usize) -> u32 {
        1 + if self.ready[v] { self.ready_penalty } else { 0 }
    }
}

/// Cells merged to execute one product.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SteinerTree {
    /// Ancilla cells in the tree, ascending; includes `magic_cell`.
    pub cells: Vec<usize>,
    /// Ready cell whose magic state is consumed.
    pub magic_cell: usize,
}

impl SteinerTree {
    /// Number of ancilla cells, the quantity MINFIT minimises.
    pub fn weight(&self) -> usize {
        self.cells.len()
    }
}

/// Reusable search buffers.
#[derive(Clone, Debug, Default)]
pub struct Router {
    stamp: Vec<u32>,
    generation: u32,
    dist: Vec<u32>,
    parent: Vec<u32>,
    in_tree: Vec<bool>,
    /// Required cells of the current search, ascending.
    required: Vec<usize>,
    heap: BinaryHeap<Reverse<(u32, u32, u32)>>,
}

const NO_PARENT: u32 = u32::MAX;

impl Router {
    pub fn new() -> Router {
        Router::default()
    }

    fn reset(&mut self, n: usize) {
        if self.stamp.len() != n {
            self.stamp = vec![0; n];
            self.dist = vec![0; n];
            self.parent = vec![NO_PARENT; n];
            self.in_tree = vec![false; n];
            self.generation = 0;
        }
        self.next_generation();
    }

    fn next_generation(&mut self) {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.fill(0);
            self.generation = 1;
        }
    }

    /// Approximate Steiner tree spanning every cell of `groups` plus one
    /// ready cell. Returns `None` when a required cell is unusable, no ready
    /// cell is reachable, or the required cells are disconnected.
    pub fn find_steiner_tree(&mut self, graph: &RoutingGraph, groups: &[Vec<usize>]) -> Option<SteinerTree> {
        let mut terminals = core::mem::take(&mut self.required);
        terminals.clear();
        terminals.extend(groups.iter().flatten().copied());
        terminals.sort_unstable();
        terminals.dedup();
        let usable = !terminals.is_empty()
            && terminals.iter().all(|&t| graph.role(t) == VertexRole::Free)
            && graph.has_ready();
        if !usable {
            self.required = terminals;
            return None;
        }

        self.reset(graph.num_slots());
        let first = terminals[0];
        let mut remaining = terminals.len() - 1;
        self.required = terminals;
        let mut tree = vec![first];
        self.in_tree[first] = true;
        let mut magic = graph.is_ready(first).then_some(first);

        let result = loop {
            if remaining == 0 && magic.is_some() {
                break true;
            }
            let Some(target) = self.nearest_target(graph, &tree, magic.is_none()) else {
                break false;
            };
            // splice the path into the tree
            let mut added_ready = None;
            let mut v = target;
            while !self.in_tree[v] {
                self.in_tree[v] = true;
                tree.push(v);
                if graph.is_ready(v) && added_ready.is_none_or(|r| v < r) {
                    added_ready = Some(v);
                }
                v = self.parent[v] as usize;
            }
            if magic.is_none() {
                magic = if graph.is_ready(target) { Some(target) } else { added_ready };
            }
            remaining = self.required.iter().filter(|&&t| !self.in_tree[t]).count();
        };

        for &v in &tree {
            self.in_tree[v] = false;
        }
        if !result {
            return None;
        }
        tree.sort_unstable();
        Some(SteinerTree {
            cells: tree,
            magic_cell: magic.expect("loop exits with a magic cell"),
        })
    }

    /// Multi-source Dijkstra from the tree; returns the first settled vertex
    /// that is an unconnected required cell or, if `want_magic`, a ready cell.
    /// Parents are left in `self.parent`.
    fn nearest_target(&mut self, graph: &RoutingGraph, tree: &[usize], want_magic: bool) -> Option<usize> {
        self.next_generation();
        self.heap.clear();
        let gen = self.generation;
        let mut counter = 0u32;

        let mut sources: Vec<usize> = tree
            .iter()
            .copied()
            .filter(|&v| graph.role(v) == VertexRole::Free)
            .collect();
        sources.sort_unstable();
        for v in sources {
            self.stamp[v] = gen;
            self.dist[v] = 0;
            self.parent[v] = NO_PARENT;
            self.heap.push(Reverse((0, counter, v as u32)));
            counter += 1;
        }

        while let Some(Reverse((d, _, v))) = self.heap.pop() {
            let v = v as usize;
            if d > self.dist[v] {
                continue;
            }
            if !self.in_tree[v] {
                if self.is_required(v) || (want_magic && graph.is_ready(v)) {
                    return Some(v);
                }
                if graph.role(v) == VertexRole::LeafOnly {
                    continue;
                }
            }
            for n in graph.neighbors(v) {
                if self.in_tree[n] {
                    continue;
                }
                if graph.role(n) == VertexRole::LeafOnly && !(want_magic && graph.is_ready(n)) {
                    continue;
                }
                let nd = d + graph.enter_cost(n);
                if self.stamp[n] != gen || nd < self.dist[n] {
                    self.stamp[n] = gen;
                    self.dist[n] = nd;
                    self.parent[n] = v as u32;
                    self.heap.push(Reverse((nd, counter, n as u32)));
                    counter += 1;
                }
            }
        }
        None
    }

    fn is_required(&self, v: usize) -> bool {
        self.required.binary_search(&v).is_ok()
    }
}

/// Exact minimum Steiner tree (Dreyfus–Wagner) over the non-blocked cells of
/// `graph`. Intended as a reference for small instances: refuses more than
/// 30 usable cells or 4 terminals. Returns the tree's cells, ascending, or
/// `None` if the terminals are disconnected.
pub fn optimal_steiner_tree(graph: &RoutingGraph, terminals: &[usize]) -> Result<Option<Vec<usize>>> {
    let verts: Vec<usize> = (0..graph.num_slots())
        .filter(|&v| graph.role(v) != VertexRole::Blocked)
        .collect();
    let mut terms: Vec<usize> = terminals.to_vec();
    terms.sort_unstable();
    terms.dedup();
    if verts.len() > 30 || terms.len() > 4 || terms.is_empty() {
        return Err(Error::OracleLimit {
            vertices: verts.len(),
            terminals: terms.len(),
        });
    }
    let n = verts.len();
    let local = |v: usize| verts.binary_search(&v).ok();
    let Some(term_ids) = terms.iter().map(|&t| local(t)).collect::<Option<Vec<_>>>() else {
        return Ok(None);
    };

    // all-pairs BFS with parents for path recovery
    const INF: u32 = u32::MAX / 4;
    let mut dist = vec![vec![INF; n]; n];
    let mut prev = vec![vec![usize::MAX; n]; n];
    for s in 0..n {
        dist[s][s] = 0;
        let mut queue = alloc::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for nb in graph.neighbors(verts[u]) {
                let w = local(nb).unwrap();
                if dist[s][w] == INF {
                    dist[s][w] = dist[s][u] + 1;
                    prev[s][w] = u;
                    queue.push_back(w);
                }
            }
        }
    }
    if term_ids.iter().any(|&t| dist[term_ids[0]][t] == INF) {
        return Ok(None);
    }

    let k = term_ids.len();
    let full = (1usize << k) - 1;
    // dp[mask][v]: edges of the cheapest tree spanning mask's terminals and v
    let mut dp = vec![vec![INF; n]; 1 << k];
    // how dp[mask][v] was formed: (junction u, submask or 0 for a plain path)
    let mut how = vec![vec![(usize::MAX, 0usize); n]; 1 << k];
    for (i, &t) in term_ids.iter().enumerate() {
        for v in 0..n {
            dp[1 << i][v] = dist[t][v];
            how[1 << i][v] = (t, 0);
        }
    }
    for mask in 1..=full {
        if mask.count_ones() < 2 {
            continue;
        }
        let mut merged = vec![(INF, 0usize); n];
        for (u, slot) in merged.iter_mut().enumerate() {
            let mut sub = (mask - 1) & mask;
            while sub > 0 {
                let c = dp[sub][u].saturating_add(dp[mask ^ sub][u]);
                if c < slot.0 {
                    *slot = (c, sub);
                }
                sub = (sub - 1) & mask;
            }
        }
        for v in 0..n {
            for (u, &(c, sub)) in merged.iter().enumerate() {
                let total = c.saturating_add(dist[u][v]);
                if total < dp[mask][v] {
                    dp[mask][v] = total;
                    how[mask][v] = (u, sub);
                }
            }
        }
    }

    let root = term_ids[0];
    let mut in_tree = vec![false; n];
    let mut stack = vec![(full, root)];
    while let Some((mask, v)) = stack.pop() {
        let (u, sub) = how[mask][v];
        // path u -> v
        let mut w = v;
        in_tree[w] = true;
        while w != u {
            w = prev[u][w];
            in_tree[w] = true;
        }
        if sub != 0 {
            stack.push((sub, u));
            stack.push((mask ^ sub, u));
        }
    }
    let cells: Vec<usize> = (0..n).filter(|&i| in_tree[i]).map(|i| verts[i]).collect();
    debug_assert_eq!(cells.len() as u32, dp[full][root] + 1);
    Ok(Some(cells))
}
