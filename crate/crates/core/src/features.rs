//! The 84-slot feature vector sampled once per window.
//!
//! Slot numbering follows the protocol-stack measurement list: application
//! (1-6), RRC (7-36), PDCP (37-52), RLC (53-70), MAC (71-80), PHY (81-84).
//! Every slot is produced by exactly one rule in [`feature_table`].

use std::sync::OnceLock;

use crate::handover::{MeasurementReport, NEIGHBOR_SLOTS};
use crate::traffic::{LinkCounters, TrafficWindow};

pub const NUM_FEATURES: usize = 84;

/// Counters of one completed window: traffic for both directions plus the
/// cumulative RRC events of the UE.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StackCounters {
    pub traffic: TrafficWindow,
    /// DL MCS of the first transfer window after connection or handover.
    pub initial_mcs: f64,
    pub rlf_total: u32,
    pub handover_total: u32,
    /// First handover target, 0 before any handover.
    pub first_target: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; NUM_FEATURES]);

impl FeatureVector {
    /// Value of 1-based slot `index`.
    pub fn get(&self, index: usize) -> f64 {
        self.0[index - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

type Rule = Box<dyn Fn(&StackCounters, &MeasurementReport) -> f64 + Send + Sync>;

pub struct FeatureDef {
    pub index: usize,
    pub name: String,
    rule: Rule,
}

fn def(
    index: usize,
    name: &str,
    rule: impl Fn(&StackCounters, &MeasurementReport) -> f64 + Send + Sync + 'static,
) -> FeatureDef {
    FeatureDef {
        index,
        name: format!("f{index:02}_{name}"),
        rule: Box::new(rule),
    }
}

fn dl(c: &StackCounters) -> &LinkCounters {
    &c.traffic.dl
}

fn ul(c: &StackCounters) -> &LinkCounters {
    &c.traffic.ul
}

fn build_table() -> Vec<FeatureDef> {
    let mut t = vec![
        def(1, "app_throughput_ul", |c, _| ul(c).throughput),
        def(2, "app_rx_packets_ul", |c, _| ul(c).app_packets),
        def(3, "app_rx_bytes_ul", |c, _| ul(c).app_bytes),
        def(4, "app_throughput_dl", |c, _| dl(c).throughput),
        def(5, "app_rx_packets_dl", |c, _| dl(c).app_packets),
        def(6, "app_rx_bytes_dl", |c, _| dl(c).app_bytes),
        def(7, "rrc_cell_id_serving", |_, r| r.serving.cell_id as f64),
        def(8, "rrc_rsrp_serving", |_, r| r.serving.rsrp),
        def(9, "rrc_rsrq_serving", |_, r| r.serving.rsrq),
    ];
    for n in 1..=NEIGHBOR_SLOTS {
        let base = 10 + 3 * (n - 1);
        t.push(def(
            base,
            &format!("rrc_cell_id_neighbor{n}"),
            move |_, r| r.slot(n).cell_id as f64,
        ));
        t.push(def(
            base + 1,
            &format!("rrc_rsrp_neighbor{n}"),
            move |_, r| r.slot(n).rsrp,
        ));
        t.push(def(
            base + 2,
            &format!("rrc_rsrq_neighbor{n}"),
            move |_, r| r.slot(n).rsrq,
        ));
    }
    t.extend([
        def(34, "rrc_rlf_total", |c, _| c.rlf_total as f64),
        def(35, "rrc_handover_total", |c, _| c.handover_total as f64),
        def(36, "rrc_first_target_cell_id", |c, _| c.first_target as f64),
        def(37, "pdcp_tx_pdus_dl", |c, _| dl(c).pdcp_tx_pdus),
        def(38, "pdcp_rx_pdus_dl", |c, _| dl(c).pdcp_rx_pdus),
        def(39, "pdcp_tx_bytes_dl", |c, _| dl(c).pdcp_bytes),
        def(40, "pdcp_delay_avg_dl", |c, _| dl(c).pdcp_delay_ms.avg),
        def(41, "pdcp_delay_min_dl", |c, _| dl(c).pdcp_delay_ms.min),
        def(42, "pdcp_delay_max_dl", |c, _| dl(c).pdcp_delay_ms.max),
        def(43, "pdcp_pdu_size_min_dl", |c, _| dl(c).pdcp_pdu_size.min),
        def(44, "pdcp_pdu_size_max_dl", |c, _| dl(c).pdcp_pdu_size.max),
        def(45, "pdcp_tx_pdus_ul", |c, _| ul(c).pdcp_tx_pdus),
        def(46, "pdcp_rx_pdus_ul", |c, _| ul(c).pdcp_rx_pdus),
        def(47, "pdcp_tx_bytes_ul", |c, _| ul(c).pdcp_bytes),
        def(48, "pdcp_delay_avg_ul", |c, _| ul(c).pdcp_delay_ms.avg),
        def(49, "pdcp_delay_min_ul", |c, _| ul(c).pdcp_delay_ms.min),
        def(50, "pdcp_delay_max_ul", |c, _| ul(c).pdcp_delay_ms.max),
        def(51, "pdcp_pdu_size_min_ul", |c, _| ul(c).pdcp_pdu_size.min),
        def(52, "pdcp_pdu_size_max_ul", |c, _| ul(c).pdcp_pdu_size.max),
        def(53, "rlc_tx_pdus_dl", |c, _| dl(c).rlc_tx_pdus),
        def(54, "rlc_rx_pdus_dl", |c, _| dl(c).rlc_rx_pdus),
        def(55, "rlc_tx_bytes_dl", |c, _| dl(c).rlc_tx_bytes),
        def(56, "rlc_rx_bytes_dl", |c, _| dl(c).rlc_rx_bytes),
        def(57, "rlc_delay_avg_dl", |c, _| dl(c).rlc_delay_ms.avg),
        def(58, "rlc_delay_min_dl", |c, _| dl(c).rlc_delay_ms.min),
        def(59, "rlc_delay_max_dl", |c, _| dl(c).rlc_delay_ms.max),
        def(60, "rlc_pdu_size_min_dl", |c, _| dl(c).rlc_pdu_size.min),
        def(61, "rlc_pdu_size_max_dl", |c, _| dl(c).rlc_pdu_size.max),
        def(62, "rlc_tx_pdus_ul", |c, _| ul(c).rlc_tx_pdus),
        def(63, "rlc_rx_pdus_ul", |c, _| ul(c).rlc_rx_pdus),
        def(64, "rlc_tx_bytes_ul", |c, _| ul(c).rlc_tx_bytes),
        def(65, "rlc_rx_bytes_ul", |c, _| ul(c).rlc_rx_bytes),
        def(66, "rlc_delay_avg_ul", |c, _| ul(c).rlc_delay_ms.avg),
        def(67, "rlc_delay_min_ul", |c, _| ul(c).rlc_delay_ms.min),
        def(68, "rlc_delay_max_ul", |c, _| ul(c).rlc_delay_ms.max),
        def(69, "rlc_pdu_size_min_ul", |c, _| ul(c).rlc_pdu_size.min),
        def(70, "rlc_pdu_size_max_ul", |c, _| ul(c).rlc_pdu_size.max),
        def(71, "mac_initial_mcs", |c, _| c.initial_mcs),
        def(72, "mac_tb_size_avg_ul", |c, _| ul(c).tb_bits),
        def(73, "mac_tb_size_avg_dl", |c, _| dl(c).tb_bits),
        def(74, "mac_mcs_avg_ul", |c, _| ul(c).mcs),
        def(75, "mac_mcs_avg_dl", |c, _| dl(c).mcs),
        def(76, "mac_rb_occupied_avg_ul", |c, _| ul(c).rb_occupied),
        def(77, "mac_rb_occupied_avg_dl", |c, _| dl(c).rb_occupied),
        // flat channel: subband CQI equals wideband CQI
        def(78, "mac_dl_cqi_inband", |c, _| dl(c).cqi),
        def(79, "mac_dl_cqi_wideband", |c, _| dl(c).cqi),
        def(80, "mac_ul_cqi", |c, _| ul(c).cqi),
        def(81, "phy_sinr_avg_dl", |c, _| dl(c).sinr_db),
        def(82, "phy_sinr_avg_ul", |c, _| ul(c).sinr_db),
        def(83, "phy_harq_nacks_dl", |c, _| dl(c).harq_nacks),
        def(84, "phy_harq_nacks_ul", |c, _| ul(c).harq_nacks),
    ]);
    t
}

/// Checks that slots 1..=84 are each written by exactly one rule.
pub fn check_feature_coverage(table: &[FeatureDef]) -> Result<(), String> {
    let mut hits = [0u32; NUM_FEATURES];
    for d in table {
        if d.index == 0 || d.index > NUM_FEATURES {
            return Err(format!(
                "rule {} writes slot {} out of range",
                d.name, d.index
            ));
        }
        hits[d.index - 1] += 1;
    }
    match hits.iter().position(|&h| h != 1) {
        Some(i) => Err(format!("slot {} written {} times", i + 1, hits[i])),
        None => Ok(()),
    }
}

/// Feature rules sorted by slot. Panics on first use if the table has gaps
/// or double writes.
pub fn feature_table() -> &'static [FeatureDef] {
    static TABLE: OnceLock<Vec<FeatureDef>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = build_table();
        if let Err(e) = check_feature_coverage(&t) {
            panic!("feature table is inconsistent: {e}");
        }
        t.sort_by_key(|d| d.index);
        t
    })
}

pub fn feature_names() -> impl Iterator<Item = &'static str> {
    feature_table().iter().map(|d| d.name.as_str())
}

pub fn extract_features(counters: &StackCounters, report: &MeasurementReport) -> FeatureVector {
    let mut v = [0.0; NUM_FEATURES];
    for d in feature_table() {
        v[d.index - 1] = (d.rule)(counters, report);
    }
    FeatureVector(v)
}

/// Slots carrying cell ids (serving, neighbors, first target).
pub fn is_cell_id_slot(index: usize) -> bool {
    index == 7 || index == 36 || (10..=31).contains(&index) && (index - 10).is_multiple_of(3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::handover::{Measurement, SENTINEL};

    fn report(n: usize) -> MeasurementReport {
        MeasurementReport {
            serving: Measurement {
                cell_id: 4,
                rsrp: -90.0,
                rsrq: -11.0,
            },
            neighbors: (0..n)
                .map(|i| Measurement {
                    cell_id: 10 + i as u32,
                    rsrp: -95.0 - i as f64,
                    rsrq: -12.0 - i as f64,
                })
                .collect(),
        }
    }

    #[test]
    fn table_covers_every_slot_once() {
        let t = feature_table();
        assert_eq!(t.len(), NUM_FEATURES);
        assert!(check_feature_coverage(t).is_ok());
        let mut broken = build_table();
        broken.pop();
        broken.push(def(83, "dup", |_, _| 0.0));
        assert!(check_feature_coverage(&broken).is_err());
    }

    #[test]
    fn names_follow_slot_numbers() {
        let names: Vec<_> = feature_names().collect();
        assert!(names[7].contains("rsrp_serving"));
        assert!(names[0].starts_with("f01_"));
        assert!(names[83].starts_with("f84_"));
    }

    #[test]
    fn idle_window_has_no_app_traffic() {
        let f = extract_features(&StackCounters::default(), &report(8));
        assert!((1..=6).all(|i| f.get(i) == 0.0));
    }

    #[test]
    fn handover_counter_is_copied() {
        let c = StackCounters {
            handover_total: 2,
            first_target: 5,
            ..Default::default()
        };
        let f = extract_features(&c, &report(3));
        assert_eq!(f.get(35), 2.0);
        assert_eq!(f.get(36), 5.0);
    }

    #[test]
    fn neighbor_triples_in_report_order() {
        let f = extract_features(&StackCounters::default(), &report(8));
        for n in 1..=8 {
            let base = 10 + 3 * (n - 1);
            assert_eq!(f.get(base), 10.0 + (n - 1) as f64);
            assert_eq!(f.get(base + 1), -95.0 - (n - 1) as f64);
        }
        let f = extract_features(&StackCounters::default(), &report(2));
        assert_eq!(f.get(16), SENTINEL.cell_id as f64);
        assert_eq!(f.get(17), SENTINEL.rsrp);
        assert_eq!(f.get(18), SENTINEL.rsrq);
    }

    #[test]
    fn cell_id_slots() {
        let ids: Vec<_> = (1..=84).filter(|&i| is_cell_id_slot(i)).collect();
        assert_eq!(ids, [7, 10, 13, 16, 19, 22, 25, 28, 31, 36]);
    }
}
