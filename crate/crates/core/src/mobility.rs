//! UE placement and straight-line mobility.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Point;
use crate::radio::{best_rsrp_cell, compute_radio};
use crate::scenario::Scenario;

/// Initial slow-start share of the link rate.
pub const RAMP_START: f64 = 1.0 / 64.0;

#[derive(Debug, Clone, PartialEq)]
pub struct UeState {
    pub ue_id: u32,
    pub position: Point,
    pub heading: f64,
    pub moving: bool,
    pub serving_cell: u32,
    pub dl_bytes_remaining: u64,
    pub ul_bytes_remaining: u64,
    pub ramp_factor: f64,
    pub connected: bool,
    pub download_complete_time: Option<f64>,
}

impl UeState {
    pub fn new(
        ue_id: u32,
        position: Point,
        heading: f64,
        serving_cell: u32,
        file_size: u64,
    ) -> Self {
        Self {
            ue_id,
            position,
            heading,
            moving: false,
            serving_cell,
            dl_bytes_remaining: file_size,
            ul_bytes_remaining: file_size,
            ramp_factor: RAMP_START,
            connected: true,
            download_complete_time: None,
        }
    }

    pub fn reset_ramp(&mut self) {
        self.ramp_factor = RAMP_START;
    }
}

/// Drops `ues_per_sector` UEs uniformly in every cluster disc, with uniform
/// headings, attached to the strongest cell. UE ids follow cluster order.
pub fn init_ues(scenario: &Scenario, run_seed: u64) -> Vec<UeState> {
    let cfg = &scenario.config;
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    let mut ues = Vec::with_capacity(scenario.clusters.len() * cfg.ues_per_sector);
    for cluster in &scenario.clusters {
        for _ in 0..cfg.ues_per_sector {
            let r = cluster.radius * rng.gen::<f64>().sqrt();
            let phi = rng.gen_range(0.0..360.0);
            let heading = rng.gen_range(0.0..360.0);
            let position = cluster.center + Point::polar(r, phi);
            let serving = best_rsrp_cell(&compute_radio(scenario, position));
            ues.push(UeState::new(
                ues.len() as u32 + 1,
                position,
                heading,
                serving,
                cfg.file_size,
            ));
        }
    }
    ues
}

/// Advances a moving UE by `speed * dt` along its fixed heading.
pub fn step_mobility(ue: &mut UeState, speed: f64, dt: f64) {
    if ue.moving {
        ue.position = ue.position + Point::polar(speed * dt, ue.heading);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{build_scenario, ScenarioConfig};

    #[test]
    fn default_population_is_210() {
        let s = build_scenario(&ScenarioConfig::default(), 1).unwrap();
        let ues = init_ues(&s, 11);
        assert_eq!(ues.len(), 210);
        for (ue, cl) in ues
            .iter()
            .zip(s.clusters.iter().flat_map(|c| std::iter::repeat_n(c, 10)))
        {
            assert!(ue.position.distance(cl.center) <= cl.radius + 1e-9);
            assert!((0.0..360.0).contains(&ue.heading));
            assert!(!ue.moving);
        }
    }

    #[test]
    fn init_is_seeded() {
        let s = build_scenario(&ScenarioConfig::default(), 1).unwrap();
        assert_eq!(init_ues(&s, 5), init_ues(&s, 5));
        assert_ne!(init_ues(&s, 5), init_ues(&s, 6));
    }

    #[test]
    fn tiny_population() {
        let cfg = ScenarioConfig {
            num_sites: 1,
            ues_per_sector: 1,
            ..Default::default()
        };
        let s = build_scenario(&cfg, 1).unwrap();
        assert_eq!(init_ues(&s, 1).len(), 3);
    }

    #[test]
    fn straight_line_motion() {
        let mut ue = UeState::new(1, Point::new(0.0, 0.0), 90.0, 1, 10);
        step_mobility(&mut ue, 10.0, 0.2);
        assert_eq!(ue.position, Point::new(0.0, 0.0));
        ue.moving = true;
        step_mobility(&mut ue, 10.0, 0.2);
        assert!((ue.position.norm() - 2.0).abs() < 1e-12);
        for _ in 1..200 {
            step_mobility(&mut ue, 10.0, 0.2);
        }
        assert!((ue.position.norm() - 400.0).abs() < 1e-9);
        assert_eq!(ue.heading, 90.0);
    }
}
