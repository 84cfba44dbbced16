//! Stochastic magic-state cultivation.
//!
//! Cultivation time is exponential with rate `λ` in physical rounds and is
//! converted to logical cycles by dividing by the code distance:
//! `cycles = max(min_cycles, ⌈-ln(u) / (λ d)⌉)`. A cell used in cycle `t`
//! restarts and becomes ready at the start of cycle `t + cycles`.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CultivationParams {
    /// Rate of the exponential per physical round.
    pub lambda: f64,
    /// Code distance; physical rounds per logical cycle.
    pub distance: u32,
    pub min_cycles: u32,
}

impl Default for CultivationParams {
    fn default() -> Self {
        CultivationParams {
            lambda: 0.00227,
            distance: 17,
            min_cycles: 1,
        }
    }
}

impl CultivationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParams(alloc::format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.distance == 0 {
            return Err(Error::InvalidParams("distance must be at least 1".into()));
        }
        if self.min_cycles == 0 {
            return Err(Error::InvalidParams("min_cycles must be at least 1".into()));
        }
        Ok(())
    }

    /// Parameters whose expected cycle count (with `min_cycles = 1`) equals
    /// `mean`. A mean of exactly 1 has no finite rate; use instant magic.
    pub fn for_mean_cycles(mean: f64, distance: u32) -> Result<CultivationParams> {
        if !(mean > 1.0 && mean.is_finite()) || distance == 0 {
            return Err(Error::InvalidParams(alloc::format!(
                "mean cultivation cycles must exceed 1, got {mean}"
            )));
        }
        // E[cycles] = 1 / (1 - q) with q = exp(-λ d)
        let q = (mean - 1.0) / mean;
        Ok(CultivationParams {
            lambda: -libm::log(q) / distance as f64,
            distance,
            min_cycles: 1,
        })
    }

    /// Cycle count for a uniform draw `u` in `(0, 1]`.
    pub fn cycles_from_uniform(&self, u: f64) -> u32 {
        let t = -libm::log(u) / self.lambda;
        let cycles = libm::ceil(t / self.distance as f64);
        if cycles >= u32::MAX as f64 {
            u32::MAX
        } else {
            (cycles as u32).max(self.min_cycles)
        }
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> u32 {
        // gen() is in [0, 1); flip it onto (0, 1]
        let u = 1.0 - rng.gen::<f64>();
        self.cycles_from_uniform(u)
    }

    /// Exact mean of [`sample`](Self::sample): `m + q^m / (1 - q)` with
    /// `q = exp(-λ d)` and `m = min_cycles`.
    pub fn mean_cycles(&self) -> f64 {
        let q = libm::exp(-self.lambda * self.distance as f64);
        let m = self.min_cycles as f64;
        m + libm::pow(q, m) / (1.0 - q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    /// Becomes ready at the start of `ready_at`, after `duration` cycles.
    Cultivating { ready_at: u64, duration: u32 },
    Ready { since: u64 },
}

/// Cultivation state of every magic-capable cell of one schedule run.
#[derive(Clone, Debug)]
pub struct CultivationState {
    params: CultivationParams,
    instant: bool,
    cells: Vec<usize>,
    slot: Vec<u32>,
    status: Vec<Status>,
    last_cycle: Option<u64>,
    completed_count: u64,
    completed_cycle_sum: u64,
    terminated_count: u64,
}

const NO_SLOT: u32 = u32::MAX;

impl CultivationState {
    /// Starts cultivation on `cells` (ascending layout indices below
    /// `num_slots`) as if they had last been used in the cycle before cycle
    /// 0. With `instant` every cultivation takes exactly one cycle and no
    /// random numbers are drawn.
    pub fn new<R: RngCore + ?Sized>(
        cells: &[usize],
        num_slots: usize,
        params: CultivationParams,
        instant: bool,
        rng: &mut R,
    ) -> CultivationState {
        let mut slot = vec![NO_SLOT; num_slots];
        for (i, &c) in cells.iter().enumerate() {
            slot[c] = i as u32;
        }
        let mut state = CultivationState {
            params,
            instant,
            cells: cells.to_vec(),
            slot,
            status: Vec::with_capacity(cells.len()),
            last_cycle: None,
            completed_count: 0,
            completed_cycle_sum: 0,
            terminated_count: 0,
        };
        for _ in cells {
            let d = state.draw(rng);
            state.status.push(Status::Cultivating {
                ready_at: u64::from(d - 1),
                duration: d,
            });
        }
        state
    }

    fn draw<R: RngCore + ?Sized>(&self, rng: &mut R) -> u32 {
        if self.instant {
            1
        } else {
            self.params.sample(rng)
        }
    }

    pub fn params(&self) -> &CultivationParams {
        &self.params
    }

    pub fn is_instant(&self) -> bool {
        self.instant
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.slot.get(cell).is_some_and(|&s| s != NO_SLOT)
    }

    pub fn status(&self, cell: usize) -> Option<Status> {
        self.contains(cell).then(|| self.status[self.slot[cell] as usize])
    }

    pub fn is_ready(&self, cell: usize) -> bool {
        matches!(self.status(cell), Some(Status::Ready { .. }))
    }

    /// Flips every cell whose cultivation finishes by `cycle` to ready and
    /// returns the ready cells, ascending.
    pub fn advance(&mut self, cycle: u64) -> Result<Vec<usize>> {
        if let Some(last) = self.last_cycle {
            if cycle < last {
                return Err(Error::CycleRegression { last, requested: cycle });
            }
        }
        self.last_cycle = Some(cycle);
        let mut ready = Vec::new();
        for (i, st) in self.status.iter_mut().enumerate() {
            if let Status::Cultivating { ready_at, duration } = *st {
                if ready_at <= cycle {
                    *st = Status::Ready { since: ready_at };
                    self.completed_count += 1;
                    self.completed_cycle_sum += u64::from(duration);
                }
            }
            if matches!(st, Status::Ready { .. }) {
                ready.push(self.cells[i]);
            }
        }
        Ok(ready)
    }

    /// Restarts cultivation on a cell used during `at_cycle`. Interrupting
    /// an unfinished cultivation counts as a termination.
    pub fn restart<R: RngCore + ?Sized>(&mut self, cell: usize, at_cycle: u64, rng: &mut R) {
        assert!(self.contains(cell), "cell {cell} does not cultivate");
        let d = self.draw(rng);
        let st = &mut self.status[self.slot[cell] as usize];
        if matches!(st, Status::Cultivating { .. }) {
            self.terminated_count += 1;
        }
        *st = Status::Cultivating {
            ready_at: at_cycle + u64::from(d),
            duration: d,
        };
    }

    pub fn completed_count(&self) -> u64 {
        self.completed_count
    }

    pub fn completed_cycle_sum(&self) -> u64 {
        self.completed_cycle_sum
    }

    pub fn terminated_count(&self) -> u64 {
        self.terminated_count
    }

    /// Mean duration of cultivations that reached readiness; `None` before
    /// the first completion. Terminated attempts are not counted.
    pub fn avg_completed_cultivation(&self) -> Option<f64> {
        (self.completed_count > 0).then(|| self.completed_cycle_sum as f64 / self.completed_count as f64)
    }

    /// Whether any cell is still cultivating.
    pub fn has_pending(&self) -> bool {
        self.status.iter().any(|s| matches!(s, Status::Cultivating { .. }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::mock::StepRng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inverse_cdf_examples() {
        let p = CultivationParams::default();
        // t = ln 2 / 0.00227 = 305.35, / 17 = 17.96
        assert!((libm::log(2.0) / p.lambda - 305.35).abs() < 0.01);
        assert_eq!(p.cycles_from_uniform(0.5), 18);
        assert_eq!(p.cycles_from_uniform(1.0), 1);
        assert_eq!(p.cycles_from_uniform(1.0 - 1e-12), 1);
        assert_eq!(p.cycles_from_uniform(1e-300), 17_901);
    }

    #[test]
    fn analytic_mean_matches_sum() {
        for p in [
            CultivationParams::default(),
            CultivationParams { min_cycles: 3, ..Default::default() },
            CultivationParams { lambda: 0.05, distance: 5, min_cycles: 1 },
        ] {
            let q = libm::exp(-p.lambda * p.distance as f64);
            // P(ceil = k) = (1 - q) q^(k - 1)
            let direct: f64 = (1..20_000)
                .map(|k| (k.max(p.min_cycles) as f64) * (1.0 - q) * libm::pow(q, (k - 1) as f64))
                .sum();
            assert!((direct - p.mean_cycles()).abs() < 1e-9, "{direct} vs {}", p.mean_cycles());
        }
        assert!((CultivationParams::default().mean_cycles() - 26.42).abs() < 0.01);
    }

    #[test]
    fn mean_inversion() {
        for mean in [2.0, 8.0, 26.0, 64.0] {
            let p = CultivationParams::for_mean_cycles(mean, 17).unwrap();
            assert!((p.mean_cycles() - mean).abs() < 1e-9);
        }
        assert!(CultivationParams::for_mean_cycles(1.0, 17).is_err());
    }

    #[test]
    fn advance_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut st = CultivationState::new(&[2, 5], 8, CultivationParams::default(), false, &mut rng);
        st.status[0] = Status::Cultivating { ready_at: 5, duration: 6 };
        st.status[1] = Status::Cultivating { ready_at: 3, duration: 4 };
        assert!(st.advance(2).unwrap().is_empty());
        assert_eq!(st.advance(3).unwrap(), [5]);
        assert!(st.advance(4).unwrap() == [5]);
        assert_eq!(st.advance(5).unwrap(), [2, 5]);
        assert_eq!(st.completed_count(), 2);
        assert_eq!(st.avg_completed_cultivation(), Some(5.0));
        assert_eq!(
            st.advance(4),
            Err(Error::CycleRegression { last: 5, requested: 4 })
        );
    }

    #[test]
    fn one_cell_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut st = CultivationState::new(&[0], 1, CultivationParams::default(), false, &mut rng);
        st.status[0] = Status::Cultivating { ready_at: 5, duration: 5 };
        assert!(st.advance(4).unwrap().is_empty());
        assert_eq!(st.advance(5).unwrap(), [0]);
        assert_eq!(st.completed_count(), 1);
    }

    #[test]
    fn terminations_are_not_averaged() {
        // StepRng yielding u64::MAX / 2 gives gen::<f64>() ≈ 0.5 and 18 cycles
        let mut rng = StepRng::new(u64::MAX / 2, 0);
        let mut st = CultivationState::new(&[0], 1, CultivationParams::default(), false, &mut rng);
        assert_eq!(st.status(0), Some(Status::Cultivating { ready_at: 17, duration: 18 }));
        st.restart(0, 0, &mut rng);
        st.restart(0, 1, &mut rng);
        st.restart(0, 2, &mut rng);
        assert_eq!(st.terminated_count(), 3);
        assert_eq!(st.avg_completed_cultivation(), None);
        st.status[st.slot[0] as usize] = Status::Cultivating { ready_at: 7, duration: 4 };
        st.advance(7).unwrap();
        assert_eq!(st.avg_completed_cultivation(), Some(4.0));
        // using a ready cell is a completion followed by a fresh start
        st.restart(0, 7, &mut rng);
        assert_eq!(st.terminated_count(), 3);
        assert_eq!(st.status(0), Some(Status::Cultivating { ready_at: 25, duration: 18 }));
    }

    #[test]
    fn instant_cells_are_ready_every_cycle() {
        let mut rng = StepRng::new(0, 0);
        let mut st = CultivationState::new(&[0, 1], 2, CultivationParams::default(), true, &mut rng);
        assert_eq!(st.advance(0).unwrap(), [0, 1]);
        st.restart(1, 0, &mut rng);
        assert_eq!(st.advance(1).unwrap(), [0, 1]);
    }

    #[test]
    fn interrupting_long_attempts_caps_the_average() {
        // cancel anything that has been cultivating for k cycles
        let k = 6;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cells: Vec<usize> = (0..50).collect();
        let mut st = CultivationState::new(&cells, 50, CultivationParams::default(), false, &mut rng);
        let mut started = vec![0u64; 50];
        for cycle in 0..2000u64 {
            let ready = st.advance(cycle).unwrap();
            for (c, start) in started.iter_mut().enumerate() {
                if ready.contains(&c) || cycle + 1 - *start >= k {
                    st.restart(c, cycle, &mut rng);
                    *start = cycle + 1;
                }
            }
        }
        let avg = st.avg_completed_cultivation().unwrap();
        assert!(avg <= k as f64, "{avg}");
        assert!(st.terminated_count() > 0);
    }

    #[test]
    fn same_seed_same_samples() {
        let p = CultivationParams::default();
        let a: Vec<u32> = {
            let mut r = ChaCha8Rng::seed_from_u64(42);
            (0..100).map(|_| p.sample(&mut r)).collect()
        };
        let mut r = ChaCha8Rng::seed_from_u64(42);
        assert!(a.iter().all(|&x| x == p.sample(&mut r)));
    }
}
