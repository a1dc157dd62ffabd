//! AP transmit/receive partition, user-centric serving sets and target-centric
//! sensing clusters.

use std::fmt::Write as _;

use crate::config::ScalabilityMode;
use crate::deployment::NetworkLayout;
use crate::error::{Error, Result};

/// The APs inspecting one sensing region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensingCluster {
    pub region: usize,
    pub tx: Vec<usize>,
    pub rx: Vec<usize>,
}

impl SensingCluster {
    pub fn contains(&self, ap: usize) -> bool {
        self.tx.contains(&ap) || self.rx.contains(&ap)
    }
}

/// Transmit/receive AP partition plus per-region clusters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApModes {
    pub tx_aps: Vec<usize>,
    pub rx_aps: Vec<usize>,
    pub clusters: Vec<SensingCluster>,
    /// Region whose scanned cell each AP illuminates; `None` if it sends no sensing beam.
    pub beam_region: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub mode: ScalabilityMode,
    pub tx_aps: Vec<usize>,
    pub rx_aps: Vec<usize>,
    /// `serving[k]`: APs serving UE `k`, sorted by decreasing large-scale gain.
    pub serving: Vec<Vec<usize>>,
    /// `served[m]`: UEs served by AP `m`, ascending.
    pub served: Vec<Vec<usize>>,
    pub clusters: Vec<SensingCluster>,
    pub beam_region: Vec<Option<usize>>,
}

fn ranked_by_distance(layout: &NetworkLayout, region: usize, eligible: impl Fn(usize) -> bool) -> Vec<usize> {
    let (cx, cy) = layout.regions[region].bounds.center();
    let mut ids: Vec<(f64, usize)> = (0..layout.aps.len())
        .filter(|&m| eligible(m))
        .map(|m| ((layout.aps[m].x - cx).hypot(layout.aps[m].y - cy), m))
        .collect();
    ids.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    ids.into_iter().map(|(_, m)| m).collect()
}

/// Split APs into transmit and receive roles and build one sensing cluster per region.
///
/// Target-centric modes claim, region by region in ascending order, the `rx_per_region`
/// unclaimed APs closest to the region center as receivers and the next `tx_per_region`
/// as transmitters. Other modes pick the receivers the same way but let every AP take
/// part in every region's test.
pub fn assign_ap_modes(
    layout: &NetworkLayout,
    mode: ScalabilityMode,
    tx_per_region: usize,
    rx_per_region: usize,
) -> Result<ApModes> {
    let m_aps = layout.aps.len();
    let l = layout.regions.len();
    if rx_per_region == 0 {
        return Err(Error::config("each region needs at least one receive AP"));
    }
    if tx_per_region == 0 {
        return Err(Error::config("each region needs at least one transmit AP"));
    }
    let mut claimed = vec![false; m_aps];
    let mut is_rx = vec![false; m_aps];
    let mut region_sets = Vec::with_capacity(l);

    for region in 0..l {
        let ranked = ranked_by_distance(layout, region, |m| !claimed[m]);
        let need = if mode.target_centric() { rx_per_region + tx_per_region } else { rx_per_region };
        if ranked.len() < need {
            return Err(Error::config(format!(
                "region {region} needs {need} unclaimed APs but only {} remain",
                ranked.len()
            )));
        }
        let rx: Vec<usize> = ranked[..rx_per_region].to_vec();
        let tx: Vec<usize> = if mode.target_centric() {
            ranked[rx_per_region..need].to_vec()
        } else {
            Vec::new()
        };
        for &m in rx.iter().chain(&tx) {
            claimed[m] = true;
        }
        for &m in &rx {
            is_rx[m] = true;
        }
        region_sets.push((rx, tx));
    }

    let tx_aps: Vec<usize> = (0..m_aps).filter(|&m| !is_rx[m]).collect();
    let rx_aps: Vec<usize> = (0..m_aps).filter(|&m| is_rx[m]).collect();
    if tx_aps.is_empty() {
        return Err(Error::config("no transmit APs left after receive selection"));
    }

    let mut beam_region = vec![None; m_aps];
    let clusters = if mode.target_centric() {
        region_sets
            .into_iter()
            .enumerate()
            .map(|(region, (mut rx, mut tx))| {
                for &m in &tx {
                    beam_region[m] = Some(region);
                }
                rx.sort_unstable();
                tx.sort_unstable();
                SensingCluster { region, tx, rx }
            })
            .collect()
    } else {
        // Every transmit AP illuminates the scanned cell of its nearest region.
        for &m in &tx_aps {
            let p = layout.aps[m];
            let nearest = (0..l)
                .map(|r| {
                    let (cx, cy) = layout.regions[r].bounds.center();
                    ((p.x - cx).hypot(p.y - cy), r)
                })
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .map(|(_, r)| r);
            beam_region[m] = nearest;
        }
        (0..l)
            .map(|region| SensingCluster {
                region,
                tx: tx_aps.clone(),
                rx: rx_aps.clone(),
            })
            .collect()
    };

    Ok(ApModes {
        tx_aps,
        rx_aps,
        clusters,
        beam_region,
    })
}

/// Serving sets from large-scale gains (`gain(k, m)`).
///
/// User-centric modes keep the `q` transmit APs with the largest gain (ties to the lower
/// AP index); otherwise every transmit AP serves every UE.
pub fn associate_ues(
    gain: impl Fn(usize, usize) -> f64,
    n_ues: usize,
    n_aps: usize,
    tx_aps: &[usize],
    q: usize,
    mode: ScalabilityMode,
) -> Result<(Vec<Vec<usize>>, Vec<Vec<usize>>)> {
    if mode.user_centric() && q > tx_aps.len() {
        return Err(Error::config(format!(
            "each UE wants {q} serving APs but only {} transmit APs exist",
            tx_aps.len()
        )));
    }
    let mut serving = Vec::with_capacity(n_ues);
    let mut served = vec![Vec::new(); n_aps];
    for k in 0..n_ues {
        let mut ranked: Vec<usize> = tx_aps.to_vec();
        ranked.sort_by(|&a, &b| gain(k, b).total_cmp(&gain(k, a)).then(a.cmp(&b)));
        if mode.user_centric() {
            ranked.truncate(q);
        }
        for &m in &ranked {
            served[m].push(k);
        }
        serving.push(ranked);
    }
    Ok((serving, served))
}

impl ClusterAssignment {
    pub fn build(
        layout: &NetworkLayout,
        gain: impl Fn(usize, usize) -> f64,
        mode: ScalabilityMode,
        q: usize,
        tx_per_region: usize,
        rx_per_region: usize,
    ) -> Result<Self> {
        let modes = assign_ap_modes(layout, mode, tx_per_region, rx_per_region)?;
        let (serving, served) = associate_ues(gain, layout.ues.len(), layout.aps.len(), &modes.tx_aps, q, mode)?;
        Ok(Self {
            mode,
            tx_aps: modes.tx_aps,
            rx_aps: modes.rx_aps,
            serving,
            served,
            clusters: modes.clusters,
            beam_region: modes.beam_region,
        })
    }

    pub fn n_aps(&self) -> usize {
        self.served.len()
    }

    /// Number of sensing clusters each AP belongs to.
    pub fn cluster_membership(&self) -> Vec<usize> {
        (0..self.n_aps())
            .map(|m| self.clusters.iter().filter(|c| c.contains(m)).count())
            .collect()
    }

    pub fn sensing_active(&self, ap: usize) -> bool {
        self.beam_region[ap].is_some()
    }

    /// Human-readable dump: AP roles and UE serving sets.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let rx: std::collections::BTreeSet<usize> = self.rx_aps.iter().copied().collect();
        for m in 0..self.n_aps() {
            let role = if rx.contains(&m) { "rx" } else { "tx" };
            let regions: Vec<String> = self
                .clusters
                .iter()
                .filter(|c| c.contains(m))
                .map(|c| c.region.to_string())
                .collect();
            let regions = if regions.is_empty() { "-".to_string() } else { regions.join(",") };
            let _ = writeln!(out, "ap {m} {role} {regions}");
        }
        for (k, s) in self.serving.iter().enumerate() {
            let list: Vec<String> = s.iter().map(|m| m.to_string()).collect();
            let _ = writeln!(out, "ue {k} {}", list.join(","));
        }
        out
    }
}

/// Transmit and receive APs inspecting region `region`.
pub fn sensing_cluster_for_cell(assignment: &ClusterAssignment, region: usize) -> Result<(&[usize], &[usize])> {
    let c = assignment
        .clusters
        .get(region)
        .ok_or_else(|| Error::domain(format!("region {region} does not exist")))?;
    Ok((&c.tx, &c.rx))
}
