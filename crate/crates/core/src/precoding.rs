//! Downlink communication beams, sensing beams and the per-AP power split.

use num_complex::Complex64;

use crate::channel::{steering_towards, ArrayGeometry, ChannelRealization, Scene};
use crate::clustering::ClusterAssignment;
use crate::config::Beamformer;
use crate::deployment::{NetworkLayout, Position3D};
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec};

/// Conjugate (matched) beam `h / |h|`.
pub fn mf_comm_beam(h: &CVec) -> Result<CVec> {
    let n = h.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::domain("matched beam requested for a zero channel"));
    }
    Ok(h.unscale(n))
}

/// Normalized steering vector from the AP towards the cell center.
pub fn mf_sense_beam(geom: &ArrayGeometry, cell_center: &Position3D, ap: &Position3D) -> Result<CVec> {
    let a = steering_towards(geom, ap, cell_center)?;
    Ok(a.unscale((geom.n_antennas as f64).sqrt()))
}

#[derive(Debug, Clone)]
pub struct ZfBeam {
    pub beam: CVec,
    /// The steering vector lay (numerically) inside the annulled span; `beam` is the MF beam.
    pub fallback: bool,
}

/// Matched sensing beam projected onto the orthogonal complement of the first `k_zf`
/// channels in `ue_channels` (callers order them by decreasing large-scale gain).
pub fn zf_sense_beam(
    geom: &ArrayGeometry,
    cell_center: &Position3D,
    ap: &Position3D,
    ue_channels: &[&CVec],
    k_zf: usize,
) -> Result<ZfBeam> {
    let n = geom.n_antennas;
    if k_zf > ue_channels.len() || k_zf > n.saturating_sub(1) {
        return Err(Error::domain(format!(
            "cannot annul {k_zf} UEs with {} channels and {n} antennas",
            ue_channels.len()
        )));
    }
    let mf = mf_sense_beam(geom, cell_center, ap)?;
    if k_zf == 0 {
        return Ok(ZfBeam { beam: mf, fallback: false });
    }
    let h = CMat::from_columns(&ue_channels[..k_zf].iter().map(|c| (*c).clone()).collect::<Vec<_>>());
    let q = h.qr().q();
    let project = |v: &CVec| v - &q * (q.adjoint() * v);
    // second pass removes the rounding left by the first
    let w = project(&project(&mf));
    let norm = w.norm();
    if !(norm > 1e-8) {
        return Ok(ZfBeam { beam: mf, fallback: true });
    }
    Ok(ZfBeam {
        beam: w.unscale(norm),
        fallback: false,
    })
}

/// Equal split of `p_max` over the served UEs and, when active, the sensing beam.
/// A fixed `sensing_share` reserves that fraction for sensing instead.
/// Returns `(per-UE power, sensing power)`.
pub fn allocate_power(p_max: f64, n_served: usize, sensing_active: bool, sensing_share: Option<f64>) -> Result<(f64, f64)> {
    if !(p_max > 0.0) {
        return Err(Error::domain("AP power budget must be positive"));
    }
    match (n_served, sensing_active) {
        (0, false) => Ok((0.0, 0.0)),
        (0, true) => Ok((0.0, p_max)),
        (n, false) => Ok((p_max / n as f64, 0.0)),
        (n, true) => match sensing_share {
            Some(rho) => {
                let sense = rho * p_max;
                Ok(((p_max - sense) / n as f64, sense))
            }
            None => {
                let each = p_max / (n + 1) as f64;
                Ok((each, each))
            }
        },
    }
}

#[derive(Debug, Clone)]
pub struct CommBeam {
    pub ue: usize,
    pub w: CVec,
    pub power: f64,
}

#[derive(Debug, Clone)]
pub struct SenseBeam {
    pub region: usize,
    pub cell: usize,
    pub w: CVec,
    pub power: f64,
    /// UEs the beam was projected away from.
    pub annulled: Vec<usize>,
    pub fallback: bool,
}

/// All beams and powers of one coherence interval.
#[derive(Debug, Clone)]
pub struct BeamformingPlan {
    pub comm: Vec<Vec<CommBeam>>,
    pub sense: Vec<Option<SenseBeam>>,
}

/// Settings that shape a plan.
#[derive(Debug, Clone, Copy)]
pub struct PlanSettings {
    pub ap_power_w: f64,
    pub beamformer: Beamformer,
    pub k_zf: usize,
    pub sensing_share: Option<f64>,
}

impl BeamformingPlan {
    /// `scanned[l]` is the cell currently inspected in region `l`.
    pub fn build(
        settings: &PlanSettings,
        layout: &NetworkLayout,
        scene: &Scene,
        assignment: &ClusterAssignment,
        channels: &ChannelRealization,
        scanned: &[usize],
    ) -> Result<Self> {
        let m_aps = assignment.n_aps();
        let mut comm = vec![Vec::new(); m_aps];
        let mut sense = vec![None; m_aps];
        for &m in &assignment.tx_aps {
            let ues = &assignment.served[m];
            let active = assignment.sensing_active(m);
            let (per_ue, sense_power) = allocate_power(settings.ap_power_w, ues.len(), active, settings.sensing_share)?;
            comm[m] = ues
                .iter()
                .map(|&k| {
                    Ok(CommBeam {
                        ue: k,
                        w: mf_comm_beam(channels.h(k, m))?,
                        power: per_ue,
                    })
                })
                .collect::<Result<Vec<_>>>()?;

            if let Some(region) = assignment.beam_region[m] {
                let cell = scanned[region];
                let center = layout.regions[region].cells[cell].center;
                let geom = &scene.arrays[m];
                let ap = &layout.aps[m];
                let (w, annulled, fallback) = match settings.beamformer {
                    Beamformer::Mf => (mf_sense_beam(geom, &center, ap)?, Vec::new(), false),
                    Beamformer::Zf => {
                        let mut by_gain = ues.clone();
                        by_gain.sort_by(|&a, &b| scene.ue_gain(b, m).total_cmp(&scene.ue_gain(a, m)).then(a.cmp(&b)));
                        let k = settings.k_zf.min(by_gain.len()).min(geom.n_antennas - 1);
                        by_gain.truncate(k);
                        let hs: Vec<&CVec> = by_gain.iter().map(|&u| channels.h(u, m)).collect();
                        let zf = zf_sense_beam(geom, &center, ap, &hs, k)?;
                        (zf.beam, by_gain, zf.fallback)
                    }
                };
                sense[m] = Some(SenseBeam {
                    region,
                    cell,
                    w,
                    power: sense_power,
                    annulled,
                    fallback,
                });
            }
        }
        Ok(Self { comm, sense })
    }

    pub fn n_aps(&self) -> usize {
        self.comm.len()
    }

    pub fn total_power(&self, m: usize) -> f64 {
        self.comm[m].iter().map(|b| b.power).sum::<f64>() + self.sense[m].as_ref().map_or(0.0, |s| s.power)
    }

    /// APs that transmit something but miss the budget, or carry a negative power.
    pub fn power_budget_violations(&self, p_max: f64) -> usize {
        (0..self.n_aps())
            .filter(|&m| {
                let negative = self.comm[m].iter().any(|b| b.power < 0.0)
                    || self.sense[m].as_ref().is_some_and(|s| s.power < 0.0);
                let total = self.total_power(m);
                let idle = self.comm[m].is_empty() && self.sense[m].is_none();
                negative || (!idle && (total - p_max).abs() > 4.0 * f64::EPSILON * p_max)
            })
            .count()
    }

    /// Residual coupling between ZF sensing beams and the UEs they annul.
    pub fn zf_leakage(&self, channels: &ChannelRealization) -> ZfLeakage {
        let mut out = ZfLeakage::default();
        for (m, s) in self.sense.iter().enumerate() {
            let Some(s) = s else { continue };
            if s.annulled.is_empty() && !s.fallback {
                continue;
            }
            out.beams += 1;
            if s.fallback {
                out.fallbacks += 1;
                continue;
            }
            for &k in &s.annulled {
                let h = channels.h(k, m);
                let leak = h.dotc(&s.w).norm();
                out.max_abs = out.max_abs.max(leak);
                out.max_rel = out.max_rel.max(leak / h.norm());
            }
        }
        out
    }
}

/// ZF sensing beams of one plan: largest `|h^H w|` over annulled UEs (fallbacks
/// excluded), the same relative to `|h|`, and beam/fallback counts.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZfLeakage {
    pub max_abs: f64,
    pub max_rel: f64,
    pub beams: usize,
    pub fallbacks: usize,
}

/// Signal radiated by AP `m`: sum of powered data beams plus the sensing beam.
pub fn transmit_vector(plan: &BeamformingPlan, m: usize, data: &[Complex64], sense_symbol: Complex64, n_antennas: usize) -> CVec {
    let mut s = CVec::zeros(n_antennas);
    for b in &plan.comm[m] {
        s.axpy(data[b.ue] * b.power.sqrt(), &b.w, Complex64::new(1.0, 0.0));
    }
    if let Some(sb) = &plan.sense[m] {
        s.axpy(sense_symbol * sb.power.sqrt(), &sb.w, Complex64::new(1.0, 0.0));
    }
    s
}
