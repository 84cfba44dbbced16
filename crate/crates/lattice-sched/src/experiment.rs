//! Experiment sweeps: a JSON spec expands into runs, which execute in
//! parallel and are written back in job order.
//!
//! ```json
//! {
//!   "master_seed": 0,
//!   "jobs": [
//!     {"input": {"products": "qft.json"}, "layout": {"arch": "pure"}, "repetitions": 10}
//!   ],
//!   "matrix": {
//!     "inputs": [{"preset": {"name": "medium", "num_qubits": 64, "num_products": 2000}}],
//!     "archs": ["bus", "pure"],
//!     "cultivation_means": [1, 2, 4, 8, 16, 32, 64],
//!     "repetitions": 10
//!   }
//! }
//! ```

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use lattice_sched_core::randgen::{calibrate, generate_random_circuit, Preset, RandGenParams};
use lattice_sched_core::{run_schedule, Arch, Circuit, Layout, TaskGraph};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::formats::{read_products, RunReport};
use crate::gatefile::parse_gate_file;
use crate::settings::SchedulerSettings;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub jobs: Vec<JobSpec>,
    #[serde(default)]
    pub matrix: Option<MatrixSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSpec {
    Products(PathBuf),
    Gates(PathBuf),
    Randgen {
        num_qubits: u32,
        #[serde(default = "default_products")]
        num_products: usize,
        size_mean: f64,
        spread: Option<u32>,
        #[serde(default)]
        seed: u64,
    },
    /// Random circuit calibrated to a named parallelism level.
    Preset {
        name: String,
        #[serde(default = "default_qubits")]
        num_qubits: u32,
        #[serde(default = "default_products")]
        num_products: usize,
        #[serde(default)]
        seed: u64,
    },
}

fn default_products() -> usize {
    RandGenParams::DEFAULT_PRODUCTS
}

fn default_qubits() -> u32 {
    64
}

fn default_repetitions() -> usize {
    1
}

fn default_density() -> u32 {
    1
}

impl InputSpec {
    pub fn label(&self) -> String {
        match self {
            InputSpec::Products(p) | InputSpec::Gates(p) => p.display().to_string(),
            InputSpec::Randgen { num_qubits, num_products, size_mean, spread, seed } => format!(
                "randgen:q={num_qubits},n={num_products},size_mean={size_mean},spread={},seed={seed}",
                spread.unwrap_or(*num_qubits)
            ),
            InputSpec::Preset { name, num_qubits, num_products, seed } => {
                format!("preset:{name},q={num_qubits},n={num_products},seed={seed}")
            }
        }
    }

    /// Loads or generates the circuit; relative paths resolve against `base`.
    pub fn load(&self, base: &Path) -> Result<Circuit> {
        match self {
            InputSpec::Products(p) => read_products(&base.join(p)),
            InputSpec::Gates(p) => {
                let path = base.join(p);
                let text = fs::read_to_string(&path).map_err(CliError::io(&path))?;
                let gates = parse_gate_file(&text).map_err(|source| CliError::Gates { path, source })?;
                Ok(lattice_sched_core::clifford::transpile(&gates).circuit)
            }
            &InputSpec::Randgen { num_qubits, num_products, size_mean, spread, seed } => {
                Ok(generate_random_circuit(&RandGenParams {
                    num_qubits,
                    num_products,
                    size_mean,
                    spread: spread.unwrap_or(num_qubits),
                    seed,
                })?)
            }
            InputSpec::Preset { name, num_qubits, num_products, seed } => {
                let preset: Preset = name.parse()?;
                let template = RandGenParams {
                    num_products: *num_products,
                    ..RandGenParams::new(*num_qubits, 1.0, *num_qubits, *seed)
                };
                Ok(generate_random_circuit(&calibrate(preset.target(), template)?)?)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSpec {
    pub arch: String,
    #[serde(default = "default_density")]
    pub density: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub input: InputSpec,
    pub layout: LayoutSpec,
    #[serde(default)]
    pub scheduler: SchedulerSettings,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Explicit per-repetition seeds; otherwise `master_seed + rep`.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
}

/// Cartesian product of inputs, densities, cultivation means, packings and
/// architectures, expanded in that nesting order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub inputs: Vec<InputSpec>,
    #[serde(default = "default_archs")]
    pub archs: Vec<String>,
    #[serde(default = "default_densities")]
    pub densities: Vec<u32>,
    #[serde(default)]
    pub cultivation_means: Option<Vec<f64>>,
    #[serde(default)]
    pub packings: Option<Vec<String>>,
    #[serde(default)]
    pub scheduler: SchedulerSettings,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
}

fn default_archs() -> Vec<String> {
    vec!["bus".into(), "pure".into()]
}

fn default_densities() -> Vec<u32> {
    vec![1]
}

impl ExperimentSpec {
    pub fn read(path: &Path) -> Result<ExperimentSpec> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        serde_json::from_str(&text).map_err(CliError::json(path))
    }

    /// Explicit jobs followed by the matrix expansion.
    pub fn expand(&self) -> Vec<JobSpec> {
        let mut jobs = self.jobs.clone();
        let Some(m) = &self.matrix else { return jobs };
        let means: Vec<Option<f64>> = match &m.cultivation_means {
            Some(v) => v.iter().copied().map(Some).collect(),
            None => vec![m.scheduler.cultivation_mean],
        };
        let packings = m.packings.clone().unwrap_or_else(|| vec![m.scheduler.packing.clone()]);
        for input in &m.inputs {
            for &density in &m.densities {
                for mean in &means {
                    for packing in &packings {
                        for arch in &m.archs {
                            jobs.push(JobSpec {
                                name: None,
                                input: input.clone(),
                                layout: LayoutSpec { arch: arch.clone(), density },
                                scheduler: SchedulerSettings {
                                    cultivation_mean: *mean,
                                    packing: packing.clone(),
                                    ..m.scheduler.clone()
                                },
                                repetitions: m.repetitions,
                                seeds: m.seeds.clone(),
                            });
                        }
                    }
                }
            }
        }
        jobs
    }
}

/// One line of the long-format results CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub job: usize,
    pub name: String,
    pub input: String,
    pub num_qubits: Option<u32>,
    pub products: Option<usize>,
    pub layers: Option<u32>,
    pub avg_products_per_layer: Option<f64>,
    pub arch: String,
    pub density: u32,
    pub cultivation_mean: Option<f64>,
    pub packing: String,
    pub rep: usize,
    pub seed: u64,
    pub status: String,
    pub error: String,
    pub cycles: Option<u64>,
    pub n_cells: Option<usize>,
    pub n_ref_cells: Option<usize>,
    pub volume: Option<u64>,
    pub parallel_efficiency: Option<f64>,
    pub scheduling_efficiency: Option<f64>,
    pub efficiency_upper_bound: Option<f64>,
    pub cult_completed: Option<u64>,
    pub cult_terminated: Option<u64>,
    pub avg_completed_cultivation: Option<f64>,
    pub ready_used_for_routing: Option<u64>,
}

impl SweepRow {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

struct Loaded {
    circuit: Circuit,
    graph: TaskGraph,
    avg_products_per_layer: f64,
}

struct Run<'a> {
    job: usize,
    spec: &'a JobSpec,
    input: std::result::Result<Arc<Loaded>, String>,
    rep: usize,
    seed: u64,
}

fn seeds(job: &JobSpec, master_seed: u64) -> std::result::Result<Vec<u64>, String> {
    match &job.seeds {
        Some(s) if s.len() != job.repetitions && job.repetitions != 1 => Err(format!(
            "{} seeds given for {} repetitions",
            s.len(),
            job.repetitions
        )),
        Some(s) if s.is_empty() => Err("empty seed list".into()),
        Some(s) => Ok(s.clone()),
        None if job.repetitions == 0 => Err("repetitions must be at least 1".into()),
        None => Ok((0..job.repetitions as u64).map(|r| master_seed.wrapping_add(r)).collect()),
    }
}

fn execute(run: &Run) -> SweepRow {
    let spec = run.spec;
    let mut row = SweepRow {
        job: run.job,
        name: spec.name.clone().unwrap_or_default(),
        input: spec.input.label(),
        num_qubits: None,
        products: None,
        layers: None,
        avg_products_per_layer: None,
        arch: spec.layout.arch.clone(),
        density: spec.layout.density,
        cultivation_mean: None,
        packing: spec.scheduler.packing.clone(),
        rep: run.rep,
        seed: run.seed,
        status: "ok".into(),
        error: String::new(),
        cycles: None,
        n_cells: None,
        n_ref_cells: None,
        volume: None,
        parallel_efficiency: None,
        scheduling_efficiency: None,
        efficiency_upper_bound: None,
        cult_completed: None,
        cult_terminated: None,
        avg_completed_cultivation: None,
        ready_used_for_routing: None,
    };
    let outcome = (|| -> std::result::Result<RunReport, String> {
        let loaded = run.input.clone()?;
        row.num_qubits = Some(loaded.circuit.num_qubits());
        row.products = Some(loaded.circuit.len());
        row.layers = Some(loaded.graph.num_layers());
        row.avg_products_per_layer = Some(loaded.avg_products_per_layer);
        let arch: Arch = spec.layout.arch.parse().map_err(|e| format!("{e}"))?;
        let config = spec.scheduler.to_config(arch, run.seed).map_err(|e| e.to_string())?;
        row.cultivation_mean = Some(config.mean_cultivation_cycles());
        if spec.layout.density == 0 {
            return Err("density must be at least 1".into());
        }
        let layout = Layout::generate(loaded.circuit.num_qubits().max(1), arch, spec.layout.density);
        let result = run_schedule(&loaded.circuit, &loaded.graph, &layout, &config).map_err(|e| e.to_string())?;
        let violations = lattice_sched_core::validate_schedule(&loaded.circuit, &loaded.graph, &layout, &config, &result.commits);
        if let Some(v) = violations.first() {
            return Err(format!("invalid schedule: {v}"));
        }
        Ok(RunReport::new(&row.input, &loaded.circuit, &loaded.graph, &layout, &config, &result))
    })();
    match outcome {
        Ok(r) => {
            row.cycles = Some(r.cycles);
            row.n_cells = Some(r.n_cells);
            row.n_ref_cells = Some(r.n_ref_cells);
            row.volume = Some(r.volume);
            row.parallel_efficiency = Some(r.parallel_efficiency);
            row.scheduling_efficiency = Some(r.scheduling_efficiency);
            row.efficiency_upper_bound = Some(r.efficiency_upper_bound);
            row.cult_completed = Some(r.cultivation.completed);
            row.cult_terminated = Some(r.cultivation.terminated);
            row.avg_completed_cultivation = r.cultivation.avg_completed_cycles;
            row.ready_used_for_routing = Some(r.cultivation.ready_used_for_routing);
        }
        Err(e) => {
            row.status = "error".into();
            row.error = e;
        }
    }
    row
}

/// Runs every job. Rows come back in job order, then repetition order,
/// whatever the thread count. Failed runs become error rows.
pub fn run_sweep(spec: &ExperimentSpec, base: &Path, threads: usize) -> Result<Vec<SweepRow>> {
    let jobs = spec.expand();
    let mut cache: HashMap<String, std::result::Result<Arc<Loaded>, String>> = HashMap::new();
    let mut runs = Vec::new();
    for (j, job) in jobs.iter().enumerate() {
        let key = serde_json::to_string(&job.input).expect("input specs serialize");
        let input = cache
            .entry(key)
            .or_insert_with(|| {
                job.input.load(base).map_err(|e| e.to_string()).map(|circuit| {
                    let graph = TaskGraph::build(&circuit);
                    let avg_products_per_layer = graph.parallelism_stats().avg_products_per_layer;
                    Arc::new(Loaded { circuit, graph, avg_products_per_layer })
                })
            })
            .clone();
        match seeds(job, spec.master_seed) {
            Ok(seeds) => runs.extend(seeds.into_iter().enumerate().map(|(rep, seed)| Run {
                job: j,
                spec: job,
                input: input.clone(),
                rep,
                seed,
            })),
            Err(e) => runs.push(Run {
                job: j,
                spec: job,
                input: Err(e),
                rep: 0,
                seed: spec.master_seed,
            }),
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    Ok(pool.install(|| runs.par_iter().map(execute).collect()))
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Groups rows by a key, keeping first-appearance order.
fn group_by<'a, K: Eq + std::hash::Hash + Clone>(
    rows: impl Iterator<Item = &'a SweepRow>,
    key: impl Fn(&SweepRow) -> K,
) -> Vec<(K, Vec<&'a SweepRow>)> {
    let mut index: HashMap<K, usize> = HashMap::new();
    let mut groups: Vec<(K, Vec<&SweepRow>)> = Vec::new();
    for row in rows {
        let k = key(row);
        let i = *index.entry(k.clone()).or_insert_with(|| {
            groups.push((k, Vec::new()));
            groups.len() - 1
        });
        groups[i].1.push(row);
    }
    groups
}

fn median_of(rows: &[&SweepRow], arch: &str, f: impl Fn(&SweepRow) -> Option<f64>) -> Option<f64> {
    let mut v: Vec<f64> = rows.iter().filter(|r| r.arch == arch).filter_map(|r| f(r)).collect();
    median(&mut v)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn mean_key(v: Option<f64>) -> String {
    fmt_opt(v)
}

/// Median efficiency per architecture against products per layer, with
/// the magic-supply bounds.
pub fn parallelism_pivot(rows: &[SweepRow]) -> Vec<Vec<String>> {
    let mut out = vec![[
        "input",
        "avg_products_per_layer",
        "density",
        "cultivation_mean",
        "packing",
        "bus_efficiency",
        "pure_efficiency",
        "bus_bound",
        "pure_bound",
    ]
    .map(String::from)
    .to_vec()];
    let groups = group_by(rows.iter().filter(|r| r.ok()), |r| {
        (r.input.clone(), r.density, mean_key(r.cultivation_mean), r.packing.clone())
    });
    for ((input, density, mean, packing), g) in groups {
        out.push(vec![
            input,
            fmt_opt(g[0].avg_products_per_layer),
            density.to_string(),
            mean,
            packing,
            fmt_opt(median_of(&g, "bus", |r| r.scheduling_efficiency)),
            fmt_opt(median_of(&g, "pure", |r| r.scheduling_efficiency)),
            fmt_opt(median_of(&g, "bus", |r| r.efficiency_upper_bound)),
            fmt_opt(median_of(&g, "pure", |r| r.efficiency_upper_bound)),
        ]);
    }
    out
}

/// Parallel and scheduling efficiency per density, one row per run.
pub fn density_pivot(rows: &[SweepRow]) -> Vec<Vec<String>> {
    let mut out = vec![[
        "input",
        "avg_products_per_layer",
        "arch",
        "cultivation_mean",
        "packing",
        "rep",
        "density",
        "n_cells",
        "parallel_efficiency",
        "scheduling_efficiency",
    ]
    .map(String::from)
    .to_vec()];
    let groups = group_by(rows.iter().filter(|r| r.ok()), |r| {
        (r.input.clone(), r.arch.clone(), mean_key(r.cultivation_mean), r.packing.clone(), r.rep)
    });
    for ((input, arch, mean, packing, rep), mut g) in groups {
        g.sort_by_key(|r| r.density);
        for r in g {
            out.push(vec![
                input.clone(),
                fmt_opt(r.avg_products_per_layer),
                arch.clone(),
                mean.clone(),
                packing.clone(),
                rep.to_string(),
                r.density.to_string(),
                r.n_cells.map(|n| n.to_string()).unwrap_or_default(),
                fmt_opt(r.parallel_efficiency),
                fmt_opt(r.scheduling_efficiency),
            ]);
        }
    }
    out
}

/// Relative improvement of Pure Magic over bus (ratio of median scheduling
/// efficiencies) per cultivation mean, beside the ratio of the bounds.
pub fn cultivation_pivot(rows: &[SweepRow]) -> Vec<Vec<String>> {
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.ok()).collect();
    let mut means: Vec<f64> = ok.iter().filter_map(|r| r.cultivation_mean).collect();
    means.sort_by(f64::total_cmp);
    means.dedup();
    let mut header: Vec<String> = ["input", "avg_products_per_layer", "density", "packing"].map(String::from).to_vec();
    for m in &means {
        header.push(format!("improvement_{m}"));
    }
    for m in &means {
        header.push(format!("bound_{m}"));
    }
    let mut out = vec![header];
    let groups = group_by(ok.iter().copied(), |r| (r.input.clone(), r.density, r.packing.clone()));
    for ((input, density, packing), g) in groups {
        let mut line = vec![input, fmt_opt(g[0].avg_products_per_layer), density.to_string(), packing];
        let ratio = |m: f64, f: &dyn Fn(&SweepRow) -> Option<f64>| {
            let at: Vec<&SweepRow> = g.iter().copied().filter(|r| r.cultivation_mean == Some(m)).collect();
            match (median_of(&at, "pure", f), median_of(&at, "bus", f)) {
                (Some(p), Some(b)) if b > 0.0 => Some(p / b),
                _ => None,
            }
        };
        line.extend(means.iter().map(|&m| fmt_opt(ratio(m, &|r| r.scheduling_efficiency))));
        line.extend(means.iter().map(|&m| fmt_opt(ratio(m, &|r| r.efficiency_upper_bound))));
        out.push(line);
    }
    out
}

pub fn write_rows(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(CliError::csv(path))?;
    if rows.is_empty() {
        // serde only emits the header alongside the first record
        w.write_record(sweep_header()).map_err(CliError::csv(path))?;
    }
    for r in rows {
        w.serialize(r).map_err(CliError::csv(path))?;
    }
    w.flush().map_err(CliError::io(path))
}

pub fn sweep_header() -> Vec<&'static str> {
    vec![
        "job",
        "name",
        "input",
        "num_qubits",
        "products",
        "layers",
        "avg_products_per_layer",
        "arch",
        "density",
        "cultivation_mean",
        "packing",
        "rep",
        "seed",
        "status",
        "error",
        "cycles",
        "n_cells",
        "n_ref_cells",
        "volume",
        "parallel_efficiency",
        "scheduling_efficiency",
        "efficiency_upper_bound",
        "cult_completed",
        "cult_terminated",
        "avg_completed_cultivation",
        "ready_used_for_routing",
    ]
}

pub fn write_table(path: &Path, table: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(CliError::csv(path))?;
    for line in table {
        w.write_record(line).map_err(CliError::csv(path))?;
    }
    w.flush().map_err(CliError::io(path))
}
