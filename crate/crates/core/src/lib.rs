//! Lattice-surgery scheduling engine.
//!
//! The crate turns a sequence of multi-qubit π/8 Pauli rotations into a
//! cycle-by-cycle schedule on a 2D surface-code layout. Every product is
//! executed by merging a tree of ancilla patches that touches the right
//! edges of its data patches and ends in a ready magic state. Two layout
//! families are supported:
//!
//! * [`Arch::Bus`]: dedicated routing (bus) cells in the interior and a ring
//!   of magic-state cells on the perimeter.
//! * [`Arch::PureMagic`]: every ancilla cell cultivates magic states and is
//!   repurposed for routing on demand, cancelling whatever cultivation was in
//!   progress.
//!
//! Products are packed greedily per cycle with the MINFIT rule: the product
//! with the smallest feasible Steiner tree is committed first.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. File formats,
//! the command line, and experiment sweeps live in the `lattice-sched` crate.
//!
//! ```
//! use lattice_sched_core::{Arch, Circuit, Layout, SchedulerConfig, TaskGraph, run_schedule};
//!
//! let circuit = Circuit::parse(8, ["Z0", "X2 X3", "Y4 Z6"]).unwrap();
//! let graph = TaskGraph::build(&circuit);
//! let layout = Layout::generate(8, Arch::PureMagic, 1);
//! let config = SchedulerConfig { instant_magic: true, ..SchedulerConfig::new(Arch::PureMagic) };
//! let result = run_schedule(&circuit, &graph, &layout, &config).unwrap();
//! assert_eq!(result.cycles, 1);
//! ```

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod clifford;
pub mod cultivation;
mod error;
pub mod graph;
pub mod layout;
pub mod metrics;
pub mod pauli;
pub mod randgen;
pub mod routing;
pub mod scheduler;

pub use cultivation::{CultivationParams, CultivationState};
pub use error::Error;
pub use graph::{ParallelismStats, TaskGraph, WindowStats};
pub use layout::{AccessSpec, Arch, Coord, Layout};
pub use pauli::{Circuit, Pauli, PauliProduct, Qubit};
pub use routing::SteinerTree;
pub use metrics::Metrics;
pub use randgen::{generate_random_circuit, RandGenParams};
pub use scheduler::{run_schedule, validate_schedule, Commit, Packing, ScheduleResult, SchedulerConfig};

pub type Result<T, E = Error> = core::result::Result<T, E>;
