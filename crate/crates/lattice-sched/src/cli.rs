use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use lattice_sched_core::clifford::transpile;
use lattice_sched_core::randgen::{calibrate, generate_random_circuit, measure_parallelism, Preset, RandGenParams};
use lattice_sched_core::{run_schedule, validate_schedule, Arch, Layout, TaskGraph};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::experiment::{self, ExperimentSpec};
use crate::formats::{self, ConfigEcho, LayoutDump, RunReport};
use crate::gatefile::parse_gate_file;
use crate::settings::SchedulerSettings;

#[derive(Parser, Debug)]
#[command(name = "lattice-sched", version, about = "Lattice-surgery scheduling for bus and Pure Magic layouts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Turn a Clifford+T gate file into a Pauli-product file.
    Transpile { input: PathBuf, output: PathBuf },
    /// Task-graph statistics of a product file.
    Stats(StatsArgs),
    /// Schedule a product file; writes traces and metrics.
    Schedule(ScheduleArgs),
    /// Run an experiment spec.
    Sweep(SweepArgs),
    /// Generate a random product file.
    Randgen(RandgenArgs),
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    pub input: PathBuf,
    /// Layers per window for the windowed statistics.
    #[arg(long, default_value_t = 100)]
    pub window: usize,
    /// Write the windowed statistics here as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ScheduleArgs {
    pub input: PathBuf,
    #[arg(long, default_value = "pure")]
    pub arch: String,
    #[arg(long, default_value_t = 1)]
    pub density: u32,
    #[command(flatten)]
    pub scheduler: SchedulerSettings,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Runs with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    pub reps: u64,
    #[arg(long, default_value = "schedule-out")]
    pub out: PathBuf,
    /// Re-read each trace and check it against the schedule invariants.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    pub spec: PathBuf,
    /// Output directory; overrides the spec's `output_dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Args, Debug)]
pub struct RandgenArgs {
    pub output: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub qubits: u32,
    #[arg(long, default_value_t = RandGenParams::DEFAULT_PRODUCTS)]
    pub products: usize,
    #[arg(long, conflicts_with_all = ["preset", "target"])]
    pub size_mean: Option<f64>,
    /// Qubit window width (default: all qubits).
    #[arg(long)]
    pub spread: Option<u32>,
    /// Calibrate to `low`, `medium` or `high` parallelism.
    #[arg(long, conflicts_with = "target")]
    pub preset: Option<String>,
    /// Calibrate to this many products per layer.
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Transpile { input, output } => cmd_transpile(&input, &output),
        Command::Stats(a) => cmd_stats(&a),
        Command::Schedule(a) => cmd_schedule(&a).map(|_| ()),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Randgen(a) => cmd_randgen(&a),
    }
}

pub fn cmd_transpile(input: &Path, output: &Path) -> Result<()> {
    let text = fs::read_to_string(input).map_err(CliError::io(input))?;
    let gates = parse_gate_file(&text).map_err(|source| CliError::Gates {
        path: input.into(),
        source,
    })?;
    let t = transpile(&gates);
    formats::write_products(output, &t.circuit)?;
    println!("{} products on {} qubits", t.circuit.len(), t.circuit.num_qubits());
    Ok(())
}

pub fn cmd_stats(args: &StatsArgs) -> Result<()> {
    let circuit = formats::read_products(&args.input)?;
    let graph = TaskGraph::build(&circuit);
    let s = graph.parallelism_stats();
    if circuit.is_empty() {
        eprintln!("warning: {} has no products", args.input.display());
    }
    println!("qubits: {}", circuit.num_qubits());
    println!("products: {}", circuit.len());
    println!("layers: {}", s.num_layers);
    println!("avg products/layer: {:.4}", s.avg_products_per_layer);
    println!("max products/layer: {}", s.max_products_per_layer);
    if let Some(path) = &args.csv {
        let mut w = csv::Writer::from_path(path).map_err(CliError::csv(path))?;
        w.write_record(["layer_index", "avg_products", "max_products", "avg_size", "max_size"])
            .map_err(CliError::csv(path))?;
        for row in graph.moving_window_stats(args.window) {
            w.write_record([
                row.layer_index.to_string(),
                row.avg_products.to_string(),
                row.max_products.to_string(),
                row.avg_size.to_string(),
                row.max_size.to_string(),
            ])
            .map_err(CliError::csv(path))?;
        }
        w.flush().map_err(CliError::io(path))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Summary {
    input: String,
    runs: usize,
    seeds: Vec<u64>,
    config: ConfigEcho,
    median: MedianMetrics,
}

#[derive(Serialize)]
struct MedianMetrics {
    cycles: f64,
    volume: f64,
    parallel_efficiency: f64,
    scheduling_efficiency: f64,
    efficiency_upper_bound: f64,
    avg_completed_cultivation: Option<f64>,
    ready_used_for_routing: f64,
}

/// Runs `reps` schedules and writes, under `out`, the layout dump, one
/// trace and one metrics file per seed, and a median summary.
pub fn cmd_schedule(args: &ScheduleArgs) -> Result<Vec<RunReport>> {
    let circuit = formats::read_products(&args.input)?;
    let graph = TaskGraph::build(&circuit);
    let arch: Arch = args.arch.parse()?;
    if args.density == 0 || args.reps == 0 {
        return Err(CliError::Input("--density and --reps must be at least 1".into()));
    }
    let layout = Layout::generate(circuit.num_qubits().max(1), arch, args.density);
    fs::create_dir_all(&args.out).map_err(CliError::io(&args.out))?;
    formats::write_json(&args.out.join("layout.json"), &LayoutDump::new(&layout))?;

    let input = args.input.display().to_string();
    let mut reports = Vec::new();
    for seed in args.seed..args.seed + args.reps {
        let config = args.scheduler.to_config(arch, seed)?;
        let result = run_schedule(&circuit, &graph, &layout, &config)?;
        let trace_path = args.out.join(format!("trace_seed{seed}.csv"));
        let file = fs::File::create(&trace_path).map_err(CliError::io(&trace_path))?;
        formats::write_trace(std::io::BufWriter::new(file), &layout, &result.commits).map_err(CliError::csv(&trace_path))?;
        if args.verify {
            let file = fs::File::open(&trace_path).map_err(CliError::io(&trace_path))?;
            let commits = formats::read_trace(file, &layout).map_err(CliError::Verification)?;
            let violations = validate_schedule(&circuit, &graph, &layout, &config, &commits);
            if let Some(v) = violations.first() {
                return Err(CliError::Verification(format!("{} (seed {seed}, {} total)", v, violations.len())));
            }
        }
        let report = RunReport::new(&input, &circuit, &graph, &layout, &config, &result);
        formats::write_json(&args.out.join(format!("metrics_seed{seed}.json")), &report)?;
        println!(
            "seed {seed}: {} cycles, parallel efficiency {:.4}, scheduling efficiency {:.4}",
            report.cycles, report.parallel_efficiency, report.scheduling_efficiency
        );
        reports.push(report);
    }

    let med = |f: &dyn Fn(&RunReport) -> f64| {
        let mut v: Vec<f64> = reports.iter().map(f).collect();
        experiment::median(&mut v).unwrap_or(0.0)
    };
    let mut cult: Vec<f64> = reports.iter().filter_map(|r| r.cultivation.avg_completed_cycles).collect();
    let summary = Summary {
        input,
        runs: reports.len(),
        seeds: reports.iter().map(|r| r.seed).collect(),
        config: reports[0].config.clone(),
        median: MedianMetrics {
            cycles: med(&|r| r.cycles as f64),
            volume: med(&|r| r.volume as f64),
            parallel_efficiency: med(&|r| r.parallel_efficiency),
            scheduling_efficiency: med(&|r| r.scheduling_efficiency),
            efficiency_upper_bound: med(&|r| r.efficiency_upper_bound),
            avg_completed_cultivation: experiment::median(&mut cult),
            ready_used_for_routing: med(&|r| r.cultivation.ready_used_for_routing as f64),
        },
    };
    formats::write_json(&args.out.join("summary.json"), &summary)?;
    Ok(reports)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let spec = ExperimentSpec::read(&args.spec)?;
    let base = args.spec.parent().unwrap_or(Path::new("."));
    let out = match (&args.out, &spec.output_dir) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => base.join(o),
        (None, None) => PathBuf::from("sweep-out"),
    };
    fs::create_dir_all(&out).map_err(CliError::io(&out))?;
    let rows = experiment::run_sweep(&spec, base, args.jobs)?;
    experiment::write_rows(&out.join("results.csv"), &rows)?;
    experiment::write_table(&out.join("parallelism.csv"), &experiment::parallelism_pivot(&rows))?;
    experiment::write_table(&out.join("density.csv"), &experiment::density_pivot(&rows))?;
    experiment::write_table(&out.join("cultivation.csv"), &experiment::cultivation_pivot(&rows))?;
    let failed = rows.iter().filter(|r| !r.ok()).count();
    println!("{} runs, {failed} failed; results in {}", rows.len(), out.display());
    for r in rows.iter().filter(|r| !r.ok()) {
        eprintln!("job {} rep {}: {}", r.job, r.rep, r.error);
    }
    if failed > 0 {
        return Err(CliError::PartialSweep { failed, total: rows.len() });
    }
    Ok(())
}

pub fn cmd_randgen(args: &RandgenArgs) -> Result<()> {
    let target = match (&args.preset, args.target) {
        (Some(p), _) => Some(p.parse::<Preset>()?.target()),
        (None, t) => t,
    };
    let params = match (target, args.size_mean) {
        (Some(t), _) => {
            let template = RandGenParams {
                num_products: args.products,
                ..RandGenParams::new(args.qubits, 1.0, args.qubits, args.seed)
            };
            calibrate(t, template)?
        }
        (None, Some(size_mean)) => RandGenParams {
            num_products: args.products,
            ..RandGenParams::new(args.qubits, size_mean, args.spread.unwrap_or(args.qubits), args.seed)
        },
        (None, None) => return Err(CliError::Input("give --size-mean, --preset or --target".into())),
    };
    let circuit = generate_random_circuit(&params)?;
    formats::write_products(&args.output, &circuit)?;
    println!(
        "{} products on {} qubits, size_mean {:.4}, spread {}: {:.4} products per layer",
        circuit.len(),
        circuit.num_qubits(),
        params.size_mean,
        params.spread,
        measure_parallelism(&params)?
    );
    Ok(())
}
