use clap::Args;
use lattice_sched_core::{Arch, CultivationParams, Packing, SchedulerConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Scheduler knobs shared by the `schedule` flags and sweep job specs.
#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulerSettings {
    /// Cultivation decay rate per code-distance step.
    #[arg(long, default_value_t = CultivationParams::default().lambda)]
    pub lambda: f64,
    #[arg(long, default_value_t = CultivationParams::default().distance)]
    pub distance: u32,
    #[arg(long, default_value_t = CultivationParams::default().min_cycles)]
    pub min_cycles: u32,
    /// Expected cultivation cycles; replaces --lambda. 1 means instant.
    #[arg(long)]
    pub cultivation_mean: Option<f64>,
    /// Every cultivation finishes in one cycle.
    #[arg(long)]
    pub instant_magic: bool,
    /// `minfit` or `random`.
    #[arg(long, default_value = "minfit")]
    pub packing: String,
    /// Pairs always use both side cells; no top/bottom edge access.
    #[arg(long)]
    pub no_horizontal_edges: bool,
    /// Reject products needing both sides of a double.
    #[arg(long)]
    pub strict_single_side: bool,
    /// Extra path cost for routing through a ready cell.
    #[arg(long, default_value_t = 0)]
    pub ready_penalty: u32,
    /// Let bus ring cells route, not only supply magic.
    #[arg(long)]
    pub bus_ring_intermediates: bool,
}

impl Default for SchedulerSettings {
    fn default() -> Self {
        let c = CultivationParams::default();
        SchedulerSettings {
            lambda: c.lambda,
            distance: c.distance,
            min_cycles: c.min_cycles,
            cultivation_mean: None,
            instant_magic: false,
            packing: "minfit".into(),
            no_horizontal_edges: false,
            strict_single_side: false,
            ready_penalty: 0,
            bus_ring_intermediates: false,
        }
    }
}

impl SchedulerSettings {
    pub fn to_config(&self, arch: Arch, seed: u64) -> Result<SchedulerConfig> {
        let packing: Packing = self.packing.parse()?;
        let mut cultivation = CultivationParams {
            lambda: self.lambda,
            distance: self.distance,
            min_cycles: self.min_cycles,
        };
        let mut instant = self.instant_magic;
        match self.cultivation_mean {
            Some(1.0) => instant = true,
            Some(m) if m > 1.0 => {
                cultivation = CultivationParams {
                    min_cycles: self.min_cycles,
                    ..CultivationParams::for_mean_cycles(m, self.distance)?
                }
            }
            Some(m) => return Err(CliError::Input(format!("cultivation mean {m} is below one cycle"))),
            None => {}
        }
        if !instant {
            cultivation.validate()?;
        }
        Ok(SchedulerConfig {
            arch,
            cultivation,
            instant_magic: instant,
            packing,
            allow_horizontal_edges: !self.no_horizontal_edges,
            strict_single_side: self.strict_single_side,
            ready_routing_penalty: self.ready_penalty,
            seed,
            bus_ring_intermediates: self.bus_ring_intermediates,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_core() {
        let c = SchedulerSettings::default().to_config(Arch::Bus, 5).unwrap();
        assert_eq!(c, SchedulerConfig { seed: 5, ..SchedulerConfig::new(Arch::Bus) });
    }

    #[test]
    fn cultivation_mean_overrides_lambda() {
        let s = |m| SchedulerSettings { cultivation_mean: Some(m), ..Default::default() };
        assert!(s(1.0).to_config(Arch::PureMagic, 0).unwrap().instant_magic);
        let c = s(8.0).to_config(Arch::PureMagic, 0).unwrap();
        assert!(!c.instant_magic);
        assert!((c.cultivation.mean_cycles() - 8.0).abs() < 1e-9);
        assert!(s(0.5).to_config(Arch::PureMagic, 0).is_err());
        let bad = SchedulerSettings { packing: "best".into(), ..Default::default() };
        assert!(bad.to_config(Arch::Bus, 0).is_err());
    }
}
