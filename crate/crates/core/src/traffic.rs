//! Link adaptation and the rate-ramp bulk transfer model, plus the per-window
//! protocol-stack counters derived from it.

use crate::mobility::UeState;
use crate::radio::RadioSample;

/// SINR (dB) at which each CQI 1..=15 becomes usable: -6.7 dB to 19.8 dB.
pub const CQI_THRESHOLDS_DB: [f64; 15] = {
    let mut t = [0.0; 15];
    let mut i = 0;
    while i < 15 {
        t[i] = -6.7 + i as f64 * (26.5 / 14.0);
        i += 1;
    }
    t
};

/// Spectral efficiency (bits/symbol) per CQI 1..=15.
pub const CQI_EFFICIENCY: [f64; 15] = [
    0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766, 1.9141, 2.4063, 2.7305, 3.3223, 3.9023,
    4.5234, 5.1152, 5.5547,
];

/// MCS index reported for CQI 0..=15.
const CQI_TO_MCS: [u8; 16] = [0, 0, 2, 4, 6, 8, 10, 11, 13, 15, 18, 20, 22, 24, 26, 28];

const SYMBOLS_PER_PRB_MS: f64 = 12.0 * 14.0;
/// Share of resource elements left after control and reference signals.
const DATA_RE_SHARE: f64 = 0.75;
pub const PDU_SIZE: u64 = 1500;
const RLC_HEADER_BYTES: u64 = 2;
const BASE_DELAY_MS: f64 = 1.0;
const HARQ_NACK_RATE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkAdaptation {
    pub cqi: u8,
    pub mcs: u8,
    pub spectral_eff: f64,
    pub tb_bits_per_ms: f64,
}

pub fn link_adaptation(sinr_db: f64, bandwidth_prb: u32) -> LinkAdaptation {
    let cqi = CQI_THRESHOLDS_DB
        .iter()
        .take_while(|&&t| sinr_db >= t)
        .count() as u8;
    let spectral_eff = if cqi == 0 {
        0.0
    } else {
        CQI_EFFICIENCY[cqi as usize - 1]
    };
    LinkAdaptation {
        cqi,
        mcs: CQI_TO_MCS[cqi as usize],
        spectral_eff,
        tb_bits_per_ms: bandwidth_prb as f64 * SYMBOLS_PER_PRB_MS * spectral_eff * DATA_RE_SHARE,
    }
}

/// Min/avg/max triple.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Spread {
    pub min: f64,
    pub avg: f64,
    pub max: f64,
}

/// One direction's counters for one sampling window.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinkCounters {
    pub app_packets: f64,
    pub app_bytes: f64,
    /// Bytes per second over the window.
    pub throughput: f64,
    pub pdcp_tx_pdus: f64,
    pub pdcp_rx_pdus: f64,
    pub pdcp_bytes: f64,
    pub pdcp_delay_ms: Spread,
    pub pdcp_pdu_size: Spread,
    pub rlc_tx_pdus: f64,
    pub rlc_rx_pdus: f64,
    pub rlc_tx_bytes: f64,
    pub rlc_rx_bytes: f64,
    pub rlc_delay_ms: Spread,
    pub rlc_pdu_size: Spread,
    pub mcs: f64,
    pub tb_bits: f64,
    pub rb_occupied: f64,
    pub cqi: f64,
    pub sinr_db: f64,
    pub harq_nacks: f64,
}

impl LinkCounters {
    /// Counters of a window with no user-plane transfer.
    pub fn idle(sinr_db: f64, la: &LinkAdaptation) -> Self {
        Self {
            sinr_db,
            cqi: la.cqi as f64,
            mcs: la.mcs as f64,
            ..Default::default()
        }
    }
}

/// Outcome of one window of transfer in one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delivery {
    pub bytes: u64,
    /// Fraction of the window at which the remaining data was exhausted.
    pub finished_at: Option<f64>,
    pub counters: LinkCounters,
}

/// Transfers up to `remaining` bytes over one window of `dt` seconds.
pub fn deliver(remaining: u64, sinr_db: f64, ramp: f64, dt: f64, bandwidth_prb: u32) -> Delivery {
    deliver_with(
        remaining,
        sinr_db,
        &link_adaptation(sinr_db, bandwidth_prb),
        ramp,
        dt,
        bandwidth_prb,
    )
}

fn deliver_with(
    remaining: u64,
    sinr_db: f64,
    la: &LinkAdaptation,
    ramp: f64,
    dt: f64,
    bandwidth_prb: u32,
) -> Delivery {
    let mut c = LinkCounters::idle(sinr_db, la);
    let window_ttis = (dt * 1000.0).round();
    if remaining == 0 {
        return Delivery {
            bytes: 0,
            finished_at: None,
            counters: c,
        };
    }
    if la.cqi == 0 {
        c.harq_nacks = window_ttis;
        return Delivery {
            bytes: 0,
            finished_at: None,
            counters: c,
        };
    }
    let capacity = la.tb_bits_per_ms * 1000.0 * dt * ramp / 8.0;
    let bytes = remaining.min(capacity.floor() as u64);
    let finished_at = (bytes == remaining && bytes > 0).then(|| remaining as f64 / capacity);
    if bytes == 0 {
        return Delivery {
            bytes,
            finished_at,
            counters: c,
        };
    }

    let b = bytes as f64;
    let pdus = bytes.div_ceil(PDU_SIZE);
    let last = bytes - PDU_SIZE * (pdus - 1);
    let size = Spread {
        min: last.min(PDU_SIZE) as f64,
        avg: b / pdus as f64,
        max: bytes.min(PDU_SIZE) as f64,
    };
    let bytes_per_ms = la.tb_bits_per_ms / 8.0;
    let delay = Spread {
        min: BASE_DELAY_MS + size.min / bytes_per_ms,
        avg: BASE_DELAY_MS + 0.5 * (size.min + b) / bytes_per_ms,
        max: BASE_DELAY_MS + b / bytes_per_ms,
    };
    let active_ttis = (b * 8.0 / la.tb_bits_per_ms).ceil().min(window_ttis);

    c.app_packets = pdus as f64;
    c.app_bytes = b;
    c.throughput = b / dt;
    c.pdcp_tx_pdus = pdus as f64;
    c.pdcp_rx_pdus = pdus as f64;
    c.pdcp_bytes = b;
    c.pdcp_delay_ms = delay;
    c.pdcp_pdu_size = size;
    c.rlc_tx_pdus = pdus as f64;
    c.rlc_rx_pdus = pdus as f64;
    c.rlc_tx_bytes = (bytes + RLC_HEADER_BYTES * pdus) as f64;
    c.rlc_rx_bytes = c.rlc_tx_bytes;
    c.rlc_delay_ms = delay;
    c.rlc_pdu_size = Spread {
        min: size.min + RLC_HEADER_BYTES as f64,
        avg: size.avg + RLC_HEADER_BYTES as f64,
        max: size.max + RLC_HEADER_BYTES as f64,
    };
    c.tb_bits = la.tb_bits_per_ms;
    c.rb_occupied = bandwidth_prb as f64 * active_ttis / window_ttis;
    c.harq_nacks = (HARQ_NACK_RATE * active_ttis).round();
    Delivery {
        bytes,
        finished_at,
        counters: c,
    }
}

/// Both directions of one window.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrafficWindow {
    pub dl: LinkCounters,
    pub ul: LinkCounters,
}

impl TrafficWindow {
    /// Window in which the user plane is down (handover or radio link failure).
    pub fn interrupted(radio: &RadioSample, bandwidth_prb: u32) -> Self {
        Self {
            dl: LinkCounters::idle(radio.sinr, &link_adaptation(radio.sinr, bandwidth_prb)),
            ul: LinkCounters::idle(
                radio.ul_sinr,
                &link_adaptation(radio.ul_sinr, bandwidth_prb),
            ),
        }
    }
}

/// Runs one window of the bidirectional transfer on the serving link.
///
/// Sets `download_complete_time` when the downlink finishes inside the window
/// and doubles the ramp after any window that moved data.
pub fn step_flow(
    ue: &mut UeState,
    radio: &RadioSample,
    window_start: f64,
    dt: f64,
    bandwidth_prb: u32,
) -> TrafficWindow {
    let dl = deliver(
        ue.dl_bytes_remaining,
        radio.sinr,
        ue.ramp_factor,
        dt,
        bandwidth_prb,
    );
    let ul = deliver(
        ue.ul_bytes_remaining,
        radio.ul_sinr,
        ue.ramp_factor,
        dt,
        bandwidth_prb,
    );
    ue.dl_bytes_remaining -= dl.bytes;
    ue.ul_bytes_remaining -= ul.bytes;
    if let Some(frac) = dl.finished_at {
        ue.download_complete_time = Some(window_start + frac * dt);
    }
    if dl.bytes > 0 || ul.bytes > 0 {
        ue.ramp_factor = (ue.ramp_factor * 2.0).min(1.0);
    }
    TrafficWindow {
        dl: dl.counters,
        ul: ul.counters,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    #[test]
    fn cqi_table_edges() {
        assert_eq!(CQI_THRESHOLDS_DB[0], -6.7);
        assert!((CQI_THRESHOLDS_DB[14] - 19.8).abs() < 1e-12);
        let low = link_adaptation(-10.0, 25);
        assert_eq!((low.cqi, low.tb_bits_per_ms), (0, 0.0));
        assert_eq!(link_adaptation(25.0, 25).cqi, 15);
        assert_eq!(link_adaptation(-6.7, 25).cqi, 1);
        let top = link_adaptation(30.0, 25);
        assert!((top.tb_bits_per_ms - 25.0 * 12.0 * 14.0 * 5.5547 * 0.75).abs() < 1e-9);
        assert!((top.tb_bits_per_ms - 17_497.0).abs() < 1.0);
    }

    #[test]
    fn cqi_is_monotone_in_sinr() {
        let mut prev = 0;
        for i in 0..400 {
            let la = link_adaptation(-10.0 + i as f64 * 0.1, 25);
            assert!(la.cqi >= prev);
            prev = la.cqi;
        }
    }

    #[test]
    fn outage_window() {
        let d = deliver(1000, -20.0, 1.0, 0.2, 25);
        assert_eq!(d.bytes, 0);
        assert_eq!(d.counters.harq_nacks, 200.0);
        assert_eq!(d.counters.app_bytes, 0.0);
    }

    #[test]
    fn finished_flow_is_silent() {
        let d = deliver(0, 20.0, 1.0, 0.2, 25);
        assert_eq!(d.counters.app_bytes, 0.0);
        assert_eq!(d.counters.app_packets, 0.0);
        assert_eq!(d.counters.throughput, 0.0);
        assert_eq!(d.counters.harq_nacks, 0.0);
    }

    #[test]
    fn counters_are_consistent() {
        for &(rem, sinr, ramp) in &[
            (1_500_000u64, 12.0, 1.0),
            (2000, 3.0, 0.25),
            (700, 19.0, 1.0),
        ] {
            let d = deliver(rem, sinr, ramp, 0.2, 25);
            let c = d.counters;
            assert_eq!(c.throughput, c.app_bytes / 0.2);
            for s in [
                c.pdcp_delay_ms,
                c.pdcp_pdu_size,
                c.rlc_delay_ms,
                c.rlc_pdu_size,
            ] {
                assert!(s.min <= s.avg && s.avg <= s.max, "{s:?}");
            }
            assert_eq!(c.app_packets, (d.bytes as f64 / 1500.0).ceil());
        }
    }

    #[test]
    fn constant_rate_completion_time() {
        // 12 Mb/s with the ramp pinned at 1 moves 1.5 MB in 1.0 s
        let la = LinkAdaptation {
            cqi: 10,
            mcs: 15,
            spectral_eff: 0.0,
            tb_bits_per_ms: 12_000.0,
        };
        let mut remaining = 1_500_000u64;
        let mut done = None;
        for w in 0..10 {
            let d = deliver_with(remaining, 10.0, &la, 1.0, 0.2, 25);
            remaining -= d.bytes;
            if let Some(f) = d.finished_at {
                done = Some(0.2 * (w as f64 + f));
                break;
            }
        }
        assert!((done.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(remaining, 0);
    }

    #[test]
    fn step_flow_sets_completion_time() {
        let mut ue = UeState::new(1, Point::new(0.0, 0.0), 0.0, 1, 1_500_000);
        let radio = RadioSample {
            cell_id: 1,
            rsrp: -80.0,
            rsrq: -11.0,
            sinr: 30.0,
            ul_sinr: 30.0,
        };
        let mut w = 0;
        while ue.download_complete_time.is_none() {
            step_flow(&mut ue, &radio, w as f64 * 0.2, 0.2, 25);
            w += 1;
        }
        assert_eq!(ue.dl_bytes_remaining, 0);
        let t = ue.download_complete_time.unwrap();
        // ramp 1/64 .. 1/2 then full rate
        let full = 17_497.3 * 1000.0 / 8.0;
        let ramp_bytes: f64 = (0..6).map(|k| full * 0.2 / 64.0 * 2f64.powi(k)).sum();
        let expected = 1.2 + (1_500_000.0 - ramp_bytes) / full;
        assert!((t - expected).abs() < 1e-3, "{t} vs {expected}");
    }

    #[test]
    fn ramp_doubles_to_one() {
        let mut ue = UeState::new(1, Point::new(0.0, 0.0), 0.0, 1, u64::MAX / 4);
        let radio = RadioSample {
            cell_id: 1,
            rsrp: -80.0,
            rsrq: -11.0,
            sinr: 10.0,
            ul_sinr: 10.0,
        };
        for w in 0..8 {
            step_flow(&mut ue, &radio, w as f64 * 0.2, 0.2, 25);
        }
        assert_eq!(ue.ramp_factor, 1.0);
    }
}
