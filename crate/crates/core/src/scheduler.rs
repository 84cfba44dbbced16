//! Cycle-by-cycle greedy Steiner-forest packing.
//!
//! Each cycle:
//! 1. cultivation advances and the ready set is read off;
//! 2. products whose predecessors finished in earlier cycles are available;
//! 3. available products are packed onto the free ancilla cells (MINFIT:
//!    repeatedly commit the smallest feasible tree, recomputing every
//!    candidate after each commit; or one pass in a seeded random order);
//! 4. committed products complete in this cycle;
//! 5. used cells restart cultivation from the next cycle. On Pure Magic
//!    layouts that is every cell of every committed tree; on bus layouts only
//!    the consumed ring cells (plus ring cells used for routing, when that
//!    is enabled).
//!
//! All randomness comes from one ChaCha8 stream seeded from the config and
//! consumed in a fixed order, so a run is a pure function of its inputs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::layout::{AccessRules, Arch, CellKind, Layout};
use crate::metrics::Metrics;
use crate::routing::{Router, RoutingGraph, SteinerTree, VertexRole};
use crate::{Circuit, CultivationParams, CultivationState, Error, Result, TaskGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Packing {
    MinFit,
    RandomOrder,
}

impl Packing {
    pub fn name(self) -> &'static str {
        match self {
            Packing::MinFit => "minfit",
            Packing::RandomOrder => "random",
        }
    }
}

impl core::str::FromStr for Packing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Packing> {
        match s {
            "minfit" => Ok(Packing::MinFit),
            "random" | "random_order" | "random-order" => Ok(Packing::RandomOrder),
            _ => Err(Error::InvalidParams(format!("unknown packing {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchedulerConfig {
    pub arch: Arch,
    pub cultivation: CultivationParams,
    /// Every cultivation takes one cycle; overrides `cultivation`.
    pub instant_magic: bool,
    pub packing: Packing,
    pub allow_horizontal_edges: bool,
    pub strict_single_side: bool,
    /// Extra path cost per ready cell routed through.
    pub ready_routing_penalty: u32,
    pub seed: u64,
    /// Let bus ring cells act as routing intermediates.
    pub bus_ring_intermediates: bool,
}

impl SchedulerConfig {
    pub fn new(arch: Arch) -> SchedulerConfig {
        SchedulerConfig {
            arch,
            cultivation: CultivationParams::default(),
            instant_magic: false,
            packing: Packing::MinFit,
            allow_horizontal_edges: true,
            strict_single_side: false,
            ready_routing_penalty: 0,
            seed: 0,
            bus_ring_intermediates: false,
        }
    }

    /// Settings matching a distillation-factory comparison: bus layout,
    /// magic always available, no top/bottom edges, random packing order.
    pub fn baseline_compat() -> SchedulerConfig {
        SchedulerConfig {
            instant_magic: true,
            packing: Packing::RandomOrder,
            allow_horizontal_edges: false,
            ..SchedulerConfig::new(Arch::Bus)
        }
    }

    pub fn access_rules(&self) -> AccessRules {
        AccessRules {
            allow_horizontal_edges: self.allow_horizontal_edges,
            strict_single_side: self.strict_single_side,
        }
    }

    /// Expected cultivation cycles under this config.
    pub fn mean_cultivation_cycles(&self) -> f64 {
        if self.instant_magic {
            1.0
        } else {
            self.cultivation.mean_cycles()
        }
    }
}

/// One product executed in one cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Commit {
    pub cycle: u64,
    pub product: usize,
    pub tree: SteinerTree,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CultivationSummary {
    pub completed: u64,
    pub terminated: u64,
    pub avg_completed_cycles: Option<f64>,
    /// Ready states destroyed by routing through them.
    pub ready_used_for_routing: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleResult {
    pub cycles: u64,
    /// Commits in execution order: by cycle, then commit order within it.
    pub commits: Vec<Commit>,
    pub cultivation: CultivationSummary,
    pub metrics: Metrics,
}

impl ScheduleResult {
    /// Number of products executed in each cycle.
    pub fn per_cycle_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.cycles as usize];
        for c in &self.commits {
            counts[c.cycle as usize] += 1;
        }
        counts
    }
}

/// Per-product routing requirements.
struct Demand {
    groups: Vec<Vec<usize>>,
    doubles: Vec<u32>,
}

fn demands(circuit: &Circuit, layout: &Layout, rules: AccessRules) -> Result<Vec<Demand>> {
    circuit
        .products()
        .iter()
        .enumerate()
        .map(|(seq, p)| {
            let access = layout.access_options(p, rules).map_err(|e| Error::Unroutable {
                product: seq,
                reason: format!("{e}"),
            })?;
            Ok(Demand {
                doubles: access.iter().map(|a| a.double).collect(),
                groups: access.into_iter().map(|a| a.cells).collect(),
            })
        })
        .collect()
}

/// Base routing graph for a layout under a config: no ready cells yet.
fn base_graph(layout: &Layout, config: &SchedulerConfig) -> RoutingGraph {
    let mut g = RoutingGraph::from_layout(layout, config.bus_ring_intermediates);
    g.set_ready_penalty(config.ready_routing_penalty);
    g
}

/// Whether the cell's cultivation restarts when a tree uses it.
fn restarts_on_use(layout: &Layout, config: &SchedulerConfig, cell: usize, magic: bool) -> bool {
    match layout.kind(cell) {
        Some(CellKind::Cultivator) => true,
        Some(CellKind::Magic) => magic || config.bus_ring_intermediates,
        _ => false,
    }
}

struct Packer<'a> {
    demands: &'a [Demand],
    router: Router,
    used_doubles: Vec<bool>,
    candidates: Vec<usize>,
}

impl Packer<'_> {
    fn fits(&self, product: usize) -> bool {
        self.demands[product].doubles.iter().all(|&d| !self.used_doubles[d as usize])
    }

    fn commit(&mut self, graph: &mut RoutingGraph, product: usize, tree: &SteinerTree, routed_ready: &mut u64) {
        for &c in &tree.cells {
            if c != tree.magic_cell && graph.is_ready(c) {
                *routed_ready += 1;
            }
            graph.block(c);
        }
        for &d in &self.demands[product].doubles {
            self.used_doubles[d as usize] = true;
        }
    }

    /// MINFIT: commit the lightest feasible tree, ties to the lowest sequence
    /// number, until nothing fits. A product that fails once cannot succeed
    /// later in the same cycle since resources only shrink.
    fn minfit(&mut self, graph: &mut RoutingGraph, available: &[usize], routed_ready: &mut u64) -> Vec<(usize, SteinerTree)> {
        let mut cands = core::mem::take(&mut self.candidates);
        cands.clear();
        cands.extend_from_slice(available);
        let mut committed = Vec::new();
        loop {
            let mut best: Option<(usize, usize, SteinerTree)> = None;
            let mut keep = 0;
            for i in 0..cands.len() {
                let p = cands[i];
                if !self.fits(p) {
                    continue;
                }
                let Some(tree) = self.router.find_steiner_tree(graph, &self.demands[p].groups) else {
                    continue;
                };
                if best.as_ref().is_none_or(|(w, _, _)| tree.weight() < *w) {
                    best = Some((tree.weight(), p, tree));
                }
                cands[keep] = p;
                keep += 1;
            }
            cands.truncate(keep);
            let Some((_, p, tree)) = best else { break };
            self.commit(graph, p, &tree, routed_ready);
            cands.retain(|&c| c != p);
            committed.push((p, tree));
        }
        self.candidates = cands;
        committed
    }

    /// One pass over the available products in a seeded random order,
    /// committing each feasible tree as it is found.
    fn random_order(
        &mut self,
        graph: &mut RoutingGraph,
        available: &[usize],
        rng: &mut ChaCha8Rng,
        routed_ready: &mut u64,
    ) -> Vec<(usize, SteinerTree)> {
        let mut order = available.to_vec();
        order.shuffle(rng);
        let mut committed = Vec::new();
        for p in order {
            if !self.fits(p) {
                continue;
            }
            if let Some(tree) = self.router.find_steiner_tree(graph, &self.demands[p].groups) {
                self.commit(graph, p, &tree, routed_ready);
                committed.push((p, tree));
            }
        }
        committed
    }
}

/// Schedules every product of `circuit` on `layout`.
pub fn run_schedule(
    circuit: &Circuit,
    graph: &TaskGraph,
    layout: &Layout,
    config: &SchedulerConfig,
) -> Result<ScheduleResult> {
    if layout.arch() != config.arch {
        return Err(Error::InvalidParams(format!(
            "config is for the {} architecture but the layout is {}",
            config.arch,
            layout.arch()
        )));
    }
    if layout.num_qubits() < circuit.num_qubits() {
        return Err(Error::InvalidParams(format!(
            "layout holds {} qubits, circuit needs {}",
            layout.num_qubits(),
            circuit.num_qubits()
        )));
    }
    if graph.len() != circuit.len() {
        return Err(Error::InvalidParams("task graph does not belong to the circuit".into()));
    }
    if !config.instant_magic {
        config.cultivation.validate()?;
    }

    let demands = demands(circuit, layout, config.access_rules())?;
    let base = base_graph(layout, config);
    check_routable(&demands, &base, layout)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut cult = CultivationState::new(
        layout.magic_sources(),
        layout.num_slots(),
        config.cultivation,
        config.instant_magic,
        &mut rng,
    );

    let mut indeg: Vec<usize> = (0..graph.len()).map(|i| graph.preds(i).len()).collect();
    let mut available: BTreeSet<usize> = (0..graph.len()).filter(|&i| indeg[i] == 0).collect();
    let mut packer = Packer {
        demands: &demands,
        router: Router::new(),
        used_doubles: vec![false; layout.num_doubles() as usize],
        candidates: Vec::new(),
    };
    let mut commits = Vec::with_capacity(circuit.len());
    let mut routed_ready = 0u64;
    let mut remaining = circuit.len();
    let mut cycle = 0u64;
    let mut cycle_graph = base.clone();
    let mut avail_vec = Vec::new();

    while remaining > 0 {
        let ready = cult.advance(cycle)?;
        cycle_graph.clone_from(&base);
        for &c in &ready {
            cycle_graph.set_ready(c, true);
        }
        packer.used_doubles.fill(false);
        avail_vec.clear();
        avail_vec.extend(available.iter().copied());

        let committed = match config.packing {
            Packing::MinFit => packer.minfit(&mut cycle_graph, &avail_vec, &mut routed_ready),
            Packing::RandomOrder => packer.random_order(&mut cycle_graph, &avail_vec, &mut rng, &mut routed_ready),
        };
        if committed.is_empty() && !cult.has_pending() {
            return Err(Error::Starvation { cycle, remaining });
        }

        let mut restart = Vec::new();
        for (p, tree) in committed {
            available.remove(&p);
            remaining -= 1;
            for &s in graph.succs(p) {
                indeg[s as usize] -= 1;
            }
            restart.extend(
                tree.cells
                    .iter()
                    .copied()
                    .filter(|&c| restarts_on_use(layout, config, c, c == tree.magic_cell)),
            );
            commits.push(Commit { cycle, product: p, tree });
        }
        // successors become available from the next cycle on
        for c in commits.iter().rev().take_while(|c| c.cycle == cycle) {
            for &s in graph.succs(c.product) {
                if indeg[s as usize] == 0 {
                    available.insert(s as usize);
                }
            }
        }
        restart.sort_unstable();
        for c in restart {
            cult.restart(c, cycle, &mut rng);
        }
        cycle += 1;
    }

    let summary = CultivationSummary {
        completed: cult.completed_count(),
        terminated: cult.terminated_count(),
        avg_completed_cycles: cult.avg_completed_cultivation(),
        ready_used_for_routing: routed_ready,
    };
    Ok(ScheduleResult {
        cycles: cycle,
        metrics: Metrics::new(
            graph.num_layers(),
            cycle,
            layout.cell_count(),
            Layout::reference_cell_count(layout.num_qubits()),
            summary.avg_completed_cycles,
        ),
        commits,
        cultivation: summary,
    })
}

/// Rejects products that cannot be routed even with every cell free and
/// every magic state ready.
fn check_routable(demands: &[Demand], base: &RoutingGraph, layout: &Layout) -> Result<()> {
    let mut open = base.clone();
    for &c in layout.magic_sources() {
        open.set_ready(c, true);
    }
    let mut router = Router::new();
    let mut seen: BTreeMap<&[Vec<usize>], bool> = BTreeMap::new();
    for (seq, d) in demands.iter().enumerate() {
        let ok = *seen
            .entry(&d.groups)
            .or_insert_with(|| router.find_steiner_tree(&open, &d.groups).is_some());
        if !ok {
            return Err(Error::Unroutable {
                product: seq,
                reason: String::from("no tree exists on an empty layout"),
            });
        }
    }
    Ok(())
}

/// A broken schedule invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Missing { product: usize },
    Duplicate { product: usize },
    UnknownProduct { product: usize },
    Dependency { product: usize, pred: usize },
    CellConflict { cycle: u64, cell: usize },
    DoubleConflict { cycle: u64, double: u32 },
    BadTree { product: usize, reason: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Missing { product } => write!(f, "product {product} never scheduled"),
            Violation::Duplicate { product } => write!(f, "product {product} scheduled twice"),
            Violation::UnknownProduct { product } => write!(f, "product {product} is not in the circuit"),
            Violation::Dependency { product, pred } => {
                write!(f, "product {product} runs no later than its predecessor {pred}")
            }
            Violation::CellConflict { cycle, cell } => write!(f, "cell {cell} used twice in cycle {cycle}"),
            Violation::DoubleConflict { cycle, double } => {
                write!(f, "double {double} accessed twice in cycle {cycle}")
            }
            Violation::BadTree { product, reason } => write!(f, "tree of product {product}: {reason}"),
        }
    }
}

/// Checks a list of commits against the circuit and layout: every product
/// exactly once, dependencies respected, trees valid and pairwise disjoint
/// within a cycle, one magic state per product, one product per double per
/// cycle.
pub fn validate_schedule(
    circuit: &Circuit,
    graph: &TaskGraph,
    layout: &Layout,
    config: &SchedulerConfig,
    commits: &[Commit],
) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = circuit.len();
    let mut when: Vec<Option<u64>> = vec![None; n];
    for c in commits {
        match when.get_mut(c.product) {
            None => out.push(Violation::UnknownProduct { product: c.product }),
            Some(Some(_)) => out.push(Violation::Duplicate { product: c.product }),
            Some(slot) => *slot = Some(c.cycle),
        }
    }
    for (p, w) in when.iter().enumerate() {
        let Some(cycle) = w else {
            out.push(Violation::Missing { product: p });
            continue;
        };
        for &pred in graph.preds(p) {
            if when[pred as usize].is_some_and(|pc| pc >= *cycle) {
                out.push(Violation::Dependency { product: p, pred: pred as usize });
            }
        }
    }

    let rules = config.access_rules();
    let base = base_graph(layout, config);
    let mut cells_used: BTreeSet<(u64, usize)> = BTreeSet::new();
    let mut doubles_used: BTreeSet<(u64, u32)> = BTreeSet::new();
    for c in commits {
        let Some(product) = circuit.products().get(c.product) else { continue };
        let bad = |reason: String| Violation::BadTree { product: c.product, reason };
        let tree = &c.tree;
        if tree.cells.is_empty() || tree.cells.iter().any(|&x| x >= layout.num_slots()) {
            out.push(bad("cells outside the layout".into()));
            continue;
        }
        if tree.cells.iter().any(|&x| !layout.is_ancilla(x)) {
            out.push(bad("uses a non-ancilla cell".into()));
        }
        if !tree.cells.contains(&tree.magic_cell) {
            out.push(bad("magic cell not in tree".into()));
        }
        if !layout.magic_sources().contains(&tree.magic_cell) {
            out.push(bad("magic cell cannot hold a magic state".into()));
        }
        for &x in &tree.cells {
            if base.role(x) == VertexRole::LeafOnly && x != tree.magic_cell {
                out.push(bad(format!("routes through ring cell {}", layout.coord(x))));
            }
            if !cells_used.insert((c.cycle, x)) {
                out.push(Violation::CellConflict { cycle: c.cycle, cell: x });
            }
        }
        if !is_connected(layout, &tree.cells) {
            out.push(bad("tree is disconnected".into()));
        }
        match layout.access_options(product, rules) {
            Ok(access) => {
                for a in access {
                    if !a.cells.iter().all(|x| tree.cells.binary_search(x).is_ok()) {
                        out.push(bad(format!("misses access cells of double {}", a.double)));
                    }
                    if !doubles_used.insert((c.cycle, a.double)) {
                        out.push(Violation::DoubleConflict { cycle: c.cycle, double: a.double });
                    }
                }
            }
            Err(e) => out.push(bad(format!("{e}"))),
        }
    }
    out
}

fn is_connected(layout: &Layout, cells: &[usize]) -> bool {
    let mut sorted = cells.to_vec();
    sorted.sort_unstable();
    let mut seen = vec![false; sorted.len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = stack.pop() {
        for nb in layout.neighbors(sorted[i]) {
            if let Ok(j) = sorted.binary_search(&nb) {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
    }
    count == sorted.len()
}
