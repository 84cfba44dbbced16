//! Volume, efficiency and error-model arithmetic.

use crate::layout::Layout;
use crate::{SchedulerConfig, TaskGraph};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    pub cycles: u64,
    /// Task-graph layers L, the full-parallelism cycle count.
    pub layers: u32,
    pub n_cells: usize,
    /// Cells of the compact Pure Magic layout for the same qubit count.
    pub n_ref_cells: usize,
    /// `n_cells × cycles`.
    pub volume: u64,
    /// `layers / cycles`.
    pub parallel_efficiency: f64,
    /// `(n_ref_cells × layers) / (n_cells × cycles)`.
    pub scheduling_efficiency: f64,
    pub avg_completed_cultivation: Option<f64>,
}

impl Metrics {
    /// An empty schedule (zero cycles) reports efficiencies of 1.
    pub fn new(layers: u32, cycles: u64, n_cells: usize, n_ref_cells: usize, avg_completed_cultivation: Option<f64>) -> Metrics {
        let (parallel, scheduling) = if cycles == 0 {
            (1.0, n_ref_cells as f64 / n_cells as f64)
        } else {
            let t = cycles as f64;
            (
                layers as f64 / t,
                (n_ref_cells as f64 * layers as f64) / (n_cells as f64 * t),
            )
        };
        Metrics {
            cycles,
            layers,
            n_cells,
            n_ref_cells,
            volume: n_cells as u64 * cycles,
            parallel_efficiency: parallel,
            scheduling_efficiency: scheduling,
            avg_completed_cultivation,
        }
    }
}

/// Expected ready magic states per cycle if no cultivator were ever used
/// for routing: magic-capable cells over the mean cultivation time.
pub fn ready_rate(layout: &Layout, config: &SchedulerConfig) -> f64 {
    layout.magic_sources().len() as f64 / config.mean_cultivation_cycles()
}

/// Scheduling-efficiency ceiling implied by the magic supply: the schedule
/// needs at least `max(L, P / R)` cycles for `P` products at `R` ready
/// states per cycle.
pub fn efficiency_upper_bound(layout: &Layout, graph: &TaskGraph, config: &SchedulerConfig) -> f64 {
    let layers = graph.num_layers() as f64;
    let n_ref = Layout::reference_cell_count(layout.num_qubits()) as f64;
    let n = layout.cell_count() as f64;
    if graph.is_empty() {
        return n_ref / n;
    }
    let t_min = layers.max(graph.len() as f64 / ready_rate(layout, config));
    (n_ref * layers) / (n * t_min)
}

/// Failure probability of a run under independent logical errors:
/// `P_L × N × T`.
pub fn error_proxy(logical_error: f64, n_cells: usize, cycles: u64) -> f64 {
    logical_error * n_cells as f64 * cycles as f64
}

/// Per-patch, per-cycle logical error rate `A (ε / ε_th)^((d + 1) / 2)`.
pub fn logical_error_rate(physical_error: f64, threshold: f64, distance: u32, prefactor: f64) -> f64 {
    prefactor * libm::pow(physical_error / threshold, (distance as f64 + 1.0) / 2.0)
}
