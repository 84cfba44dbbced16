//! On-disk formats: product JSON, layout dump, schedule trace CSV and the
//! per-run metrics report.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use lattice_sched_core::layout::CellKind;
use lattice_sched_core::metrics::efficiency_upper_bound;
use lattice_sched_core::{Circuit, Commit, Coord, Layout, PauliProduct, ScheduleResult, SchedulerConfig, SteinerTree, TaskGraph};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const PRODUCT_FILE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductFile {
    pub version: u32,
    pub num_qubits: u32,
    pub products: Vec<String>,
}

impl ProductFile {
    pub fn from_circuit(circuit: &Circuit) -> ProductFile {
        ProductFile {
            version: PRODUCT_FILE_VERSION,
            num_qubits: circuit.num_qubits(),
            products: circuit.product_strings(),
        }
    }

    pub fn to_circuit(&self) -> Result<Circuit> {
        if self.version != PRODUCT_FILE_VERSION {
            return Err(CliError::Input(format!("unsupported product file version {}", self.version)));
        }
        let products = self
            .products
            .iter()
            .enumerate()
            .map(|(i, s)| {
                s.parse::<PauliProduct>()
                    .map_err(|e| CliError::Input(format!("product {i} ({s:?}): {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Circuit::new(self.num_qubits, products)?)
    }
}

pub fn parse_products(text: &str) -> serde_json::Result<ProductFile> {
    serde_json::from_str(text)
}

pub fn read_products(path: &Path) -> Result<Circuit> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    parse_products(&text).map_err(CliError::json(path))?.to_circuit().map_err(|e| match e {
        CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
        CliError::Core(e) => CliError::Input(format!("{}: {e}", path.display())),
        other => other,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::json(path))?;
    text.push('\n');
    fs::write(path, text).map_err(CliError::io(path))
}

pub fn write_products(path: &Path, circuit: &Circuit) -> Result<()> {
    write_json(path, &ProductFile::from_circuit(circuit))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutDump {
    pub arch: String,
    pub width: u32,
    pub height: u32,
    pub cells: Vec<CellDump>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellDump {
    pub x: u32,
    pub y: u32,
    pub kind: String,
    pub role: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub double_id: Option<u32>,
}

impl LayoutDump {
    pub fn new(layout: &Layout) -> LayoutDump {
        let cells = layout
            .cells()
            .map(|(i, kind)| {
                let c = layout.coord(i);
                let (role, double_id) = match kind {
                    CellKind::Data { double, .. } => ("data", Some(double)),
                    CellKind::Bus => ("route", None),
                    CellKind::Magic => ("magic_leaf", None),
                    CellKind::Cultivator => ("route_and_cultivate", None),
                };
                CellDump {
                    x: c.x,
                    y: c.y,
                    kind: kind.name().into(),
                    role: role.into(),
                    double_id,
                }
            })
            .collect();
        LayoutDump {
            arch: layout.arch().name().into(),
            width: layout.width(),
            height: layout.height(),
            cells,
        }
    }
}

pub const TRACE_HEADER: [&str; 5] = ["cycle", "product", "weight", "magic_cell", "cells"];

pub fn write_trace<W: Write>(out: W, layout: &Layout, commits: &[Commit]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for c in commits {
        let cells = c
            .tree
            .cells
            .iter()
            .map(|&i| layout.coord(i).to_string())
            .collect::<Vec<_>>()
            .join("|");
        w.write_record([
            c.cycle.to_string(),
            c.product.to_string(),
            c.tree.weight().to_string(),
            layout.coord(c.tree.magic_cell).to_string(),
            cells,
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct TraceRow {
    cycle: u64,
    product: usize,
    weight: usize,
    magic_cell: String,
    cells: String,
}

fn parse_coord(layout: &Layout, s: &str) -> std::result::Result<usize, String> {
    let (x, y) = s.split_once(':').ok_or_else(|| format!("bad cell {s:?}"))?;
    let x = x.parse().map_err(|_| format!("bad cell {s:?}"))?;
    let y = y.parse().map_err(|_| format!("bad cell {s:?}"))?;
    layout.index(Coord::new(x, y)).ok_or_else(|| format!("cell {s} is not in the layout"))
}

/// Reads a trace back into commits against `layout`.
pub fn read_trace<R: Read>(input: R, layout: &Layout) -> std::result::Result<Vec<Commit>, String> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(TRACE_HEADER) {
        return Err(format!("unexpected trace header {header:?}"));
    }
    let mut commits = Vec::new();
    for (i, row) in r.deserialize::<TraceRow>().enumerate() {
        let row = row.map_err(|e| e.to_string())?;
        let mut cells = row
            .cells
            .split('|')
            .map(|s| parse_coord(layout, s))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| format!("row {}: {e}", i + 1))?;
        cells.sort_unstable();
        if cells.len() != row.weight {
            return Err(format!("row {}: weight {} but {} cells", i + 1, row.weight, cells.len()));
        }
        let magic_cell = parse_coord(layout, &row.magic_cell).map_err(|e| format!("row {}: {e}", i + 1))?;
        commits.push(Commit {
            cycle: row.cycle,
            product: row.product,
            tree: SteinerTree { cells, magic_cell },
        });
    }
    Ok(commits)
}

/// Resolved scheduler settings, echoed into every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub arch: String,
    pub density: u32,
    pub lambda: f64,
    pub distance: u32,
    pub min_cycles: u32,
    pub instant_magic: bool,
    pub packing: String,
    pub allow_horizontal_edges: bool,
    pub strict_single_side: bool,
    pub ready_routing_penalty: u32,
    pub bus_ring_intermediates: bool,
}

impl ConfigEcho {
    pub fn new(config: &SchedulerConfig, density: u32) -> ConfigEcho {
        ConfigEcho {
            arch: config.arch.name().into(),
            density,
            lambda: config.cultivation.lambda,
            distance: config.cultivation.distance,
            min_cycles: config.cultivation.min_cycles,
            instant_magic: config.instant_magic,
            packing: config.packing.name().into(),
            allow_horizontal_edges: config.allow_horizontal_edges,
            strict_single_side: config.strict_single_side,
            ready_routing_penalty: config.ready_routing_penalty,
            bus_ring_intermediates: config.bus_ring_intermediates,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CultivationReport {
    pub completed: u64,
    pub terminated: u64,
    pub avg_completed_cycles: Option<f64>,
    pub ready_used_for_routing: u64,
}

/// Metrics JSON for one schedule run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub input: String,
    pub num_qubits: u32,
    pub products: usize,
    pub cycles: u64,
    pub layers: u32,
    pub n_cells: usize,
    pub n_ref_cells: usize,
    pub volume: u64,
    pub parallel_efficiency: f64,
    pub scheduling_efficiency: f64,
    pub efficiency_upper_bound: f64,
    pub cultivation: CultivationReport,
    pub seed: u64,
    pub config: ConfigEcho,
}

impl RunReport {
    pub fn new(
        input: &str,
        circuit: &Circuit,
        graph: &TaskGraph,
        layout: &Layout,
        config: &SchedulerConfig,
        result: &ScheduleResult,
    ) -> RunReport {
        let m = &result.metrics;
        let c = &result.cultivation;
        RunReport {
            input: input.into(),
            num_qubits: circuit.num_qubits(),
            products: circuit.len(),
            cycles: m.cycles,
            layers: m.layers,
            n_cells: m.n_cells,
            n_ref_cells: m.n_ref_cells,
            volume: m.volume,
            parallel_efficiency: m.parallel_efficiency,
            scheduling_efficiency: m.scheduling_efficiency,
            efficiency_upper_bound: efficiency_upper_bound(layout, graph, config),
            cultivation: CultivationReport {
                completed: c.completed,
                terminated: c.terminated,
                avg_completed_cycles: c.avg_completed_cycles,
                ready_used_for_routing: c.ready_used_for_routing,
            },
            seed: config.seed,
            config: ConfigEcho::new(config, layout.density()),
        }
    }
}
