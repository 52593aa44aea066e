//! Scenario geometry: the hexagonal three-sector layout, UE clusters and
//! seeded obstacle placement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{config_err, Result};
use crate::geometry::{Point, Rect};

/// All scenario, radio and traffic parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub inter_site_distance: f64,
    pub num_sites: usize,
    pub bandwidth_prb: u32,
    pub enb_tx_power: f64,
    pub ue_tx_power: f64,
    pub enb_height: f64,
    pub ue_height: f64,
    pub carrier_freq: f64,
    pub antenna_beamwidth: f64,
    pub antenna_max_atten: f64,
    pub obstacle_height: f64,
    pub obstacle_loss: f64,
    pub num_obstacles: usize,
    pub obstacle_min_side: f64,
    pub obstacle_max_side: f64,
    pub cluster_distance: f64,
    pub cluster_diameter: f64,
    pub ues_per_sector: usize,
    pub ue_speed: f64,
    pub sim_duration: f64,
    pub sample_period: f64,
    pub file_size: u64,
    pub max_neighbors: usize,
    pub num_runs: u32,
    pub noise_figure: f64,
    pub a2_threshold: f64,
    pub obstacle_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            inter_site_distance: 500.0,
            num_sites: 7,
            bandwidth_prb: 25,
            enb_tx_power: 46.0,
            ue_tx_power: 23.0,
            enb_height: 30.0,
            ue_height: 1.5,
            carrier_freq: 2000.0,
            antenna_beamwidth: 70.0,
            antenna_max_atten: 20.0,
            obstacle_height: 35.0,
            obstacle_loss: 30.0,
            num_obstacles: 10,
            obstacle_min_side: 60.0,
            obstacle_max_side: 160.0,
            cluster_distance: 100.0,
            cluster_diameter: 50.0,
            ues_per_sector: 10,
            ue_speed: 10.0,
            sim_duration: 40.0,
            sample_period: 0.2,
            file_size: 1_500_000,
            max_neighbors: 8,
            num_runs: 20,
            noise_figure: 9.0,
            a2_threshold: -110.0,
            obstacle_seed: 1,
        }
    }
}

/// Keys accepted by [`ScenarioConfig::set`], in declaration order.
pub const SCENARIO_KEYS: &[&str] = &[
    "inter_site_distance",
    "num_sites",
    "bandwidth_prb",
    "enb_tx_power",
    "ue_tx_power",
    "enb_height",
    "ue_height",
    "carrier_freq",
    "antenna_beamwidth",
    "antenna_max_atten",
    "obstacle_height",
    "obstacle_loss",
    "num_obstacles",
    "obstacle_min_side",
    "obstacle_max_side",
    "cluster_distance",
    "cluster_diameter",
    "ues_per_sector",
    "ue_speed",
    "sim_duration",
    "sample_period",
    "file_size",
    "max_neighbors",
    "num_runs",
    "noise_figure",
    "a2_threshold",
    "obstacle_seed",
];

fn parse<T: std::str::FromStr>(field: &'static str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| config_err(field, format!("cannot parse {value:?}")))
}

impl ScenarioConfig {
    /// Sets one field from its textual value. Returns `Ok(false)` when `key`
    /// is not a scenario field.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        macro_rules! fields {
            ($($name:ident),* $(,)?) => {
                match key {
                    $(stringify!($name) => self.$name = parse(stringify!($name), value)?,)*
                    _ => return Ok(false),
                }
            };
        }
        fields!(
            inter_site_distance,
            num_sites,
            bandwidth_prb,
            enb_tx_power,
            ue_tx_power,
            enb_height,
            ue_height,
            carrier_freq,
            antenna_beamwidth,
            antenna_max_atten,
            obstacle_height,
            obstacle_loss,
            num_obstacles,
            obstacle_min_side,
            obstacle_max_side,
            cluster_distance,
            cluster_diameter,
            ues_per_sector,
            ue_speed,
            sim_duration,
            sample_period,
            file_size,
            max_neighbors,
            num_runs,
            noise_figure,
            a2_threshold,
            obstacle_seed,
        );
        Ok(true)
    }

    /// Number of sampling windows in one run.
    pub fn num_windows(&self) -> usize {
        (self.sim_duration / self.sample_period).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(config_err(field, format!("must be positive, got {v}")))
            }
        };
        positive("inter_site_distance", self.inter_site_distance)?;
        positive("enb_height", self.enb_height)?;
        positive("ue_height", self.ue_height)?;
        positive("carrier_freq", self.carrier_freq)?;
        positive("antenna_beamwidth", self.antenna_beamwidth)?;
        positive("obstacle_height", self.obstacle_height)?;
        positive("obstacle_min_side", self.obstacle_min_side)?;
        positive("cluster_distance", self.cluster_distance)?;
        positive("cluster_diameter", self.cluster_diameter)?;
        positive("sim_duration", self.sim_duration)?;
        positive("sample_period", self.sample_period)?;
        if self.ue_speed < 0.0 || !self.ue_speed.is_finite() {
            return Err(config_err("ue_speed", "must be non-negative"));
        }
        if self.num_sites != 1 && self.num_sites != 7 {
            return Err(config_err("num_sites", "only 1 or 7 sites are supported"));
        }
        if self.bandwidth_prb == 0 {
            return Err(config_err("bandwidth_prb", "must be at least 1"));
        }
        if self.obstacle_max_side < self.obstacle_min_side {
            return Err(config_err(
                "obstacle_max_side",
                "must not be smaller than obstacle_min_side",
            ));
        }
        if self.obstacle_loss < 0.0 {
            return Err(config_err("obstacle_loss", "must be non-negative"));
        }
        let windows = self.sim_duration / self.sample_period;
        if (windows - windows.round()).abs() > 1e-9 || windows.round() < 1.0 {
            return Err(config_err(
                "sample_period",
                "must divide sim_duration into a whole number of windows",
            ));
        }
        if self.max_neighbors < 1 {
            return Err(config_err("max_neighbors", "must be at least 1"));
        }
        if self.max_neighbors > crate::handover::NEIGHBOR_SLOTS {
            return Err(config_err(
                "max_neighbors",
                "at most 8 neighbors are reported",
            ));
        }
        if self.cluster_diameter >= self.inter_site_distance {
            return Err(config_err(
                "cluster_diameter",
                "must be smaller than inter_site_distance",
            ));
        }
        if self.obstacle_height <= self.enb_height {
            return Err(config_err(
                "obstacle_height",
                "must exceed enb_height for full blockage",
            ));
        }
        if self.file_size == 0 {
            return Err(config_err("file_size", "must be at least one byte"));
        }
        Ok(())
    }
}

/// One sector of a three-sector site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub cell_id: u32,
    pub site_position: Point,
    pub azimuth: f64,
    pub tx_power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obstacle {
    pub footprint: Rect,
    pub height: f64,
}

/// Disc in which the UEs of one sector are dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    pub cell_id: u32,
    pub center: Point,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub cells: Vec<Cell>,
    pub obstacles: Vec<Obstacle>,
    pub clusters: Vec<Cluster>,
}

const SECTOR_AZIMUTHS: [f64; 3] = [0.0, 120.0, 240.0];
/// Obstacles keep this clearance from every site.
pub const SITE_CLEARANCE: f64 = 50.0;

pub fn site_positions(num_sites: usize, isd: f64) -> Vec<Point> {
    let mut sites = vec![Point::new(0.0, 0.0)];
    if num_sites == 7 {
        sites.extend((0..6).map(|i| Point::polar(isd, 30.0 + 60.0 * i as f64)));
    }
    sites
}

/// Builds the layout for `config`, placing obstacles from `obstacle_seed`.
pub fn build_scenario(config: &ScenarioConfig, obstacle_seed: u64) -> Result<Scenario> {
    config.validate()?;
    let sites = site_positions(config.num_sites, config.inter_site_distance);
    let mut cells = Vec::with_capacity(sites.len() * 3);
    let mut clusters = Vec::with_capacity(sites.len() * 3);
    for (s, &site) in sites.iter().enumerate() {
        for (j, &azimuth) in SECTOR_AZIMUTHS.iter().enumerate() {
            let cell_id = (3 * s + j + 1) as u32;
            cells.push(Cell {
                cell_id,
                site_position: site,
                azimuth,
                tx_power: config.enb_tx_power,
            });
            clusters.push(Cluster {
                cell_id,
                center: site + Point::polar(config.cluster_distance, azimuth),
                radius: config.cluster_diameter / 2.0,
            });
        }
    }
    let obstacles = place_obstacles(config, &sites, obstacle_seed);
    let mut config = config.clone();
    config.obstacle_seed = obstacle_seed;
    Ok(Scenario {
        config,
        cells,
        obstacles,
        clusters,
    })
}

/// Radius of the disc over which obstacles are scattered.
pub fn deployment_radius(config: &ScenarioConfig) -> f64 {
    let ring = if config.num_sites == 7 {
        config.inter_site_distance
    } else {
        0.0
    };
    ring + config.inter_site_distance
}

fn place_obstacles(config: &ScenarioConfig, sites: &[Point], seed: u64) -> Vec<Obstacle> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = deployment_radius(config);
    let mut obstacles = Vec::with_capacity(config.num_obstacles);
    let mut attempts = 0usize;
    while obstacles.len() < config.num_obstacles && attempts < 10_000 * config.num_obstacles.max(1)
    {
        attempts += 1;
        let r = radius * rng.gen::<f64>().sqrt();
        let theta = rng.gen_range(0.0..360.0);
        let width = rng.gen_range(config.obstacle_min_side..=config.obstacle_max_side);
        let depth = rng.gen_range(config.obstacle_min_side..=config.obstacle_max_side);
        let footprint = Rect {
            center: Point::polar(r, theta),
            width,
            depth,
        };
        if sites
            .iter()
            .all(|&s| footprint.distance_to(s) > SITE_CLEARANCE)
        {
            obstacles.push(Obstacle {
                footprint,
                height: config.obstacle_height,
            });
        }
    }
    obstacles
}

impl Scenario {
    pub fn cell(&self, cell_id: u32) -> Option<&Cell> {
        self.cells.iter().find(|c| c.cell_id == cell_id)
    }

    /// Same layout with obstacles re-drawn from another seed.
    pub fn with_obstacle_seed(&self, seed: u64) -> Result<Scenario> {
        build_scenario(&self.config, seed)
    }

    /// Same layout without any obstacles.
    pub fn without_obstacles(&self) -> Scenario {
        let mut s = self.clone();
        s.obstacles.clear();
        s
    }
}
