//! Link budget: Cost231-Hata pathloss, parabolic sector antenna, obstacle
//! blockage, and the per-cell RSRP/RSRQ/SINR seen at a position.

use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::{wrap_deg, Point};
use crate::scenario::{Cell, Obstacle, Scenario, ScenarioConfig};

/// Subcarriers per resource block.
pub const SUBCARRIERS_PER_PRB: f64 = 12.0;
const PRB_BANDWIDTH_HZ: f64 = 180e3;
const THERMAL_NOISE_DBM_HZ: f64 = -174.0;
const MIN_DISTANCE_M: f64 = 1.0;
/// Metropolitan correction of the Cost231 extension.
const COST231_METRO_DB: f64 = 3.0;

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Cost231-Hata urban pathloss with large-city mobile height correction.
/// Distances below 1 m are clamped.
pub fn pathloss_db(tx_pos: Point, rx_pos: Point, config: &ScenarioConfig) -> f64 {
    cost231_hata_db(
        tx_pos.distance(rx_pos),
        config.carrier_freq,
        config.enb_height,
        config.ue_height,
    )
}

pub fn cost231_hata_db(distance_m: f64, freq_mhz: f64, hb: f64, hm: f64) -> f64 {
    let d_km = distance_m.max(MIN_DISTANCE_M) / 1000.0;
    let a_hm = 3.2 * (11.75 * hm).log10().powi(2) - 4.97;
    46.3 + 33.9 * freq_mhz.log10() - 13.82 * hb.log10() - a_hm
        + (44.9 - 6.55 * hb.log10()) * d_km.log10()
        + COST231_METRO_DB
}

/// Horizontal parabolic pattern `min(12 (theta/bw)^2, max_atten)`.
pub fn antenna_attenuation_db(cell: &Cell, ue_pos: Point, config: &ScenarioConfig) -> f64 {
    let dir = ue_pos - cell.site_position;
    let theta = if dir.norm() == 0.0 {
        0.0
    } else {
        wrap_deg(dir.bearing_deg() - cell.azimuth)
    };
    parabolic_attenuation_db(theta, config.antenna_beamwidth, config.antenna_max_atten)
}

pub fn parabolic_attenuation_db(theta_deg: f64, beamwidth: f64, max_atten: f64) -> f64 {
    let theta = wrap_deg(theta_deg);
    (12.0 * (theta / beamwidth).powi(2)).min(max_atten)
}

/// Fixed loss per distinct obstacle crossed by the 2-D path.
pub fn blockage_loss_db(tx_pos: Point, rx_pos: Point, obstacles: &[Obstacle], loss_db: f64) -> f64 {
    let crossed = obstacles
        .iter()
        .filter(|o| o.footprint.intersects_segment(tx_pos, rx_pos))
        .count();
    crossed as f64 * loss_db
}

/// Thermal noise over the occupied bandwidth, dBm.
pub fn noise_power_dbm(config: &ScenarioConfig) -> f64 {
    THERMAL_NOISE_DBM_HZ
        + lin_to_db(config.bandwidth_prb as f64 * PRB_BANDWIDTH_HZ)
        + config.noise_figure
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioSample {
    pub cell_id: u32,
    /// Per resource element, dBm.
    pub rsrp: f64,
    pub rsrq: f64,
    /// Downlink SINR under full-load interference, dB.
    pub sinr: f64,
    /// Uplink SINR at this cell for a UE transmitting at `ue_tx_power`, dB
    /// (noise limited).
    pub ul_sinr: f64,
}

/// Total coupling loss (pathloss + antenna + blockage) from `cell` to `pos`.
pub fn coupling_loss_db(scenario: &Scenario, cell: &Cell, pos: Point) -> f64 {
    let cfg = &scenario.config;
    pathloss_db(cell.site_position, pos, cfg)
        + antenna_attenuation_db(cell, pos, cfg)
        + blockage_loss_db(
            cell.site_position,
            pos,
            &scenario.obstacles,
            cfg.obstacle_loss,
        )
}

/// Radio quantities from every cell at `ue_pos`, in cell order.
pub fn compute_radio(scenario: &Scenario, ue_pos: Point) -> Vec<RadioSample> {
    let cfg = &scenario.config;
    let n_prb = cfg.bandwidth_prb as f64;
    let res = SUBCARRIERS_PER_PRB * n_prb;
    let noise_mw = db_to_lin(noise_power_dbm(cfg));
    let ue_tx_mw = db_to_lin(cfg.ue_tx_power);

    let losses: Vec<f64> = scenario
        .cells
        .iter()
        .map(|c| coupling_loss_db(scenario, c, ue_pos))
        .collect();
    // wideband received power per cell, mW
    let rx_mw: Vec<f64> = scenario
        .cells
        .iter()
        .zip(&losses)
        .map(|(c, l)| db_to_lin(c.tx_power - l))
        .collect();
    let total_mw: f64 = rx_mw.iter().sum();
    let rssi_per_prb = total_mw / n_prb + noise_mw / n_prb;

    scenario
        .cells
        .iter()
        .zip(rx_mw.iter().zip(&losses))
        .map(|(cell, (&p, &loss))| {
            let rsrp_mw = p / res;
            let interference = total_mw - p;
            RadioSample {
                cell_id: cell.cell_id,
                rsrp: lin_to_db(rsrp_mw),
                rsrq: lin_to_db(n_prb * rsrp_mw / (n_prb * rssi_per_prb)),
                sinr: lin_to_db(p / (interference.max(0.0) + noise_mw)),
                ul_sinr: lin_to_db(ue_tx_mw / db_to_lin(loss) / noise_mw),
            }
        })
        .collect()
}

/// Cell with the strongest RSRP; ties go to the lower cell id.
pub fn best_rsrp_cell(radio: &[RadioSample]) -> u32 {
    radio
        .iter()
        .fold(None::<&RadioSample>, |best, s| match best {
            Some(b) if b.rsrp > s.rsrp || (b.rsrp == s.rsrp && b.cell_id < s.cell_id) => Some(b),
            _ => Some(s),
        })
        .map(|s| s.cell_id)
        .unwrap_or(0)
}

pub fn sample_for(radio: &[RadioSample], cell_id: u32) -> Result<&RadioSample> {
    radio
        .iter()
        .find(|s| s.cell_id == cell_id)
        .ok_or(Error::UnknownCell(cell_id))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

/// Radio environment map: best-SINR cell per pixel, row-major (rows along y).
#[derive(Debug, Clone, PartialEq)]
pub struct RemGrid {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub resolution: f64,
    pub pixels: Vec<(u32, f64)>,
}

impl RemGrid {
    pub fn pixel_center(&self, ix: usize, iy: usize) -> Point {
        Point::new(
            self.x0 + (ix as f64 + 0.5) * self.resolution,
            self.y0 + (iy as f64 + 0.5) * self.resolution,
        )
    }

    pub fn get(&self, ix: usize, iy: usize) -> (u32, f64) {
        self.pixels[iy * self.nx + ix]
    }

    /// Header `rem <nx> <ny> <x0> <y0> <resolution>` then `x y cell_id sinr_db` per pixel.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "rem {} {} {} {} {}",
            self.nx, self.ny, self.x0, self.y0, self.resolution
        )?;
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let p = self.pixel_center(ix, iy);
                let (cell, sinr) = self.get(ix, iy);
                writeln!(w, "{} {} {} {:.4}", p.x, p.y, cell, sinr)?;
            }
        }
        Ok(())
    }
}

pub fn render_rem(scenario: &Scenario, bounds: Bounds, resolution: f64) -> Result<RemGrid> {
    if !(resolution > 0.0) {
        return Err(Error::Config {
            field: "resolution",
            reason: "must be positive".into(),
        });
    }
    let (w, h) = (bounds.x1 - bounds.x0, bounds.y1 - bounds.y0);
    if !(w > 0.0 && h > 0.0) {
        return Err(Error::Config {
            field: "bounds",
            reason: format!("empty rectangle {w} x {h}"),
        });
    }
    let nx = (w / resolution - 1e-9).ceil() as usize;
    let ny = (h / resolution - 1e-9).ceil() as usize;
    let mut grid = RemGrid {
        nx,
        ny,
        x0: bounds.x0,
        y0: bounds.y0,
        resolution,
        pixels: Vec::with_capacity(nx * ny),
    };
    for iy in 0..ny {
        for ix in 0..nx {
            let radio = compute_radio(scenario, grid.pixel_center(ix, iy));
            let best = radio
                .iter()
                .fold(&radio[0], |b, s| if s.sinr > b.sinr { s } else { b });
            grid.pixels.push((best.cell_id, best.sinr));
        }
    }
    Ok(grid)
}
