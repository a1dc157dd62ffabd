//! Communication SINR and rate, detection rates, fronthaul load and empirical CDFs.

use std::fmt;

use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::clustering::ClusterAssignment;
use crate::error::{Error, Result};
use crate::precoding::BeamformingPlan;
use crate::sensing::DetectionOutcome;

/// Downlink SINR of every UE with coherent combining over its serving APs.
/// Sensing beams of every transmit AP count as interference.
pub fn communication_sinrs(channels: &ChannelRealization, plan: &BeamformingPlan, n_ues: usize, noise_var: f64) -> Vec<f64> {
    let mut acc = vec![Complex64::new(0.0, 0.0); n_ues];
    (0..n_ues)
        .map(|k| {
            acc.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
            let mut sensing = 0.0;
            for m in 0..plan.n_aps() {
                let h = channels.h(k, m);
                for b in &plan.comm[m] {
                    acc[b.ue] += h.dotc(&b.w) * b.power.sqrt();
                }
                if let Some(s) = &plan.sense[m] {
                    sensing += s.power * h.dotc(&s.w).norm_sqr();
                }
            }
            let signal = acc[k].norm_sqr();
            let interference: f64 = acc.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, a)| a.norm_sqr()).sum();
            signal / (interference + sensing + noise_var)
        })
        .collect()
}

pub fn communication_sinr(channels: &ChannelRealization, plan: &BeamformingPlan, n_ues: usize, k: usize, noise_var: f64) -> f64 {
    communication_sinrs(channels, plan, n_ues, noise_var)[k]
}

/// Shannon rate over the full band.
pub fn rate_bps(sinr: f64, bandwidth_hz: f64) -> f64 {
    bandwidth_hz * (1.0 + sinr.max(0.0)).log2()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionRates {
    /// `None` when no inspected cell held a target.
    pub pd: Option<f64>,
    /// `None` when every inspected cell held a target.
    pub pfa: Option<f64>,
    pub present: usize,
    pub absent: usize,
}

pub fn detection_rates(log: &[DetectionOutcome]) -> DetectionRates {
    let (mut hits, mut present, mut alarms, mut absent) = (0usize, 0usize, 0usize, 0usize);
    for d in log {
        if d.truth {
            present += 1;
            hits += d.decision as usize;
        } else {
            absent += 1;
            alarms += d.decision as usize;
        }
    }
    DetectionRates {
        pd: (present > 0).then(|| hits as f64 / present as f64),
        pfa: (absent > 0).then(|| alarms as f64 / absent as f64),
        present,
        absent,
    }
}

/// Scalars each receive AP sends to the CPU per epoch: one partial statistic per
/// sensing cluster it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct FronthaulLoad {
    /// `(AP index, scalars per epoch)` for every receive AP.
    pub per_rx_ap: Vec<(usize, usize)>,
    pub max: usize,
    pub mean: f64,
}

pub fn fronthaul_load(assignment: &ClusterAssignment) -> FronthaulLoad {
    let per_rx_ap: Vec<(usize, usize)> = assignment
        .rx_aps
        .iter()
        .map(|&m| (m, assignment.clusters.iter().filter(|c| c.rx.contains(&m)).count()))
        .collect();
    let max = per_rx_ap.iter().map(|p| p.1).max().unwrap_or(0);
    let mean = if per_rx_ap.is_empty() {
        0.0
    } else {
        per_rx_ap.iter().map(|p| p.1 as f64).sum::<f64>() / per_rx_ap.len() as f64
    };
    FronthaulLoad { per_rx_ap, max, mean }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricKind {
    RateBps,
    SensingSnrDb,
    Statistic,
    Decision,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [Self::RateBps, Self::SensingSnrDb, Self::Statistic, Self::Decision];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::RateBps => "rate_bps",
            Self::SensingSnrDb => "sensing_snr_db",
            Self::Statistic => "statistic",
            Self::Decision => "decision",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One scalar observation. `entity` is a UE index for rates, a region index otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    pub drop: usize,
    pub kind: MetricKind,
    pub entity: usize,
    pub value: f64,
}

/// Empirical distribution: `probabilities[i] = (i + 1) / n` at `values[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfCurve {
    pub values: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl CdfCurve {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        let below = self.values.partition_point(|&v| v <= x);
        below as f64 / self.values.len() as f64
    }
}

pub fn empirical_cdf(samples: &[f64]) -> Result<CdfCurve> {
    if samples.is_empty() {
        return Err(Error::domain("CDF of an empty sample"));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::domain("CDF sample contains NaN"));
    }
    let mut values = samples.to_vec();
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let probabilities = (1..=values.len()).map(|i| i as f64 / n).collect();
    Ok(CdfCurve { values, probabilities })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{RcsDraw, TargetEchoes};
    use crate::linalg::{cn_vector, CMat, CVec};
    use crate::precoding::{mf_comm_beam, CommBeam, SenseBeam};
    use crate::rng::{stream, Purpose};
    use rand::Rng;

    fn realization(h: Vec<CVec>, n_aps: usize) -> ChannelRealization {
        ChannelRealization {
            n_aps,
            h,
            targets: vec![TargetEchoes {
                rcs: RcsDraw { rx: vec![], tx: vec![], values: CMat::zeros(0, 0) },
            }],
        }
    }

    #[test]
    fn single_link_sinr() {
        let mut rng = stream(1, 0, Purpose::UeChannels, 0);
        let h = cn_vector(4, &mut rng);
        let ch = realization(vec![h.clone()], 1);
        let plan = BeamformingPlan {
            comm: vec![vec![CommBeam { ue: 0, w: mf_comm_beam(&h).unwrap(), power: 1.5 }]],
            sense: vec![None],
        };
        let s = communication_sinr(&ch, &plan, 1, 0, 0.1);
        assert!((s - 1.5 * h.norm_squared() / 0.1).abs() / s < 1e-12);
        assert!(communication_sinr(&ch, &plan, 1, 0, 1e300) < 1e-290);
    }

    /// Straight-line evaluation: serving sets, beams and powers as explicit tables.
    fn brute_force_sinr(
        h: &[Vec<CVec>],
        serve: &[Vec<bool>],
        w: &[Vec<CVec>],
        eta: &[Vec<f64>],
        w0: &[Option<(CVec, f64)>],
        k: usize,
        noise: f64,
    ) -> f64 {
        let n_ues = h.len();
        let n_aps = h[0].len();
        let mut num = Complex64::new(0.0, 0.0);
        for m in 0..n_aps {
            if serve[k][m] {
                num += eta[k][m].sqrt() * h[k][m].dotc(&w[k][m]);
            }
        }
        let mut interference = 0.0;
        for j in 0..n_ues {
            if j == k {
                continue;
            }
            let mut s = Complex64::new(0.0, 0.0);
            for m in 0..n_aps {
                if serve[j][m] {
                    s += eta[j][m].sqrt() * h[k][m].dotc(&w[j][m]);
                }
            }
            interference += s.norm_sqr();
        }
        let mut sensing = 0.0;
        for m in 0..n_aps {
            if let Some((v, p)) = &w0[m] {
                sensing += p * h[k][m].dotc(v).norm_sqr();
            }
        }
        num.norm_sqr() / (interference + sensing + noise)
    }

    #[test]
    fn sinr_matches_brute_force() {
        let mut rng = stream(2, 0, Purpose::UeChannels, 0);
        for _ in 0..1000 {
            let (n_ues, n_aps) = (rng.random_range(1..4usize), rng.random_range(1..4usize));
            let h: Vec<Vec<CVec>> = (0..n_ues).map(|_| (0..n_aps).map(|_| cn_vector(3, &mut rng)).collect()).collect();
            let serve: Vec<Vec<bool>> = (0..n_ues).map(|_| (0..n_aps).map(|_| rng.random_bool(0.6)).collect()).collect();
            let w: Vec<Vec<CVec>> = h.iter().map(|row| row.iter().map(|v| mf_comm_beam(v).unwrap()).collect()).collect();
            let eta: Vec<Vec<f64>> = (0..n_ues).map(|_| (0..n_aps).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
            let w0: Vec<Option<(CVec, f64)>> = (0..n_aps)
                .map(|_| {
                    rng.random_bool(0.5).then(|| {
                        let v = cn_vector(3, &mut rng);
                        (v.unscale(v.norm()), rng.random_range(0.0..1.0))
                    })
                })
                .collect();
            let noise = rng.random_range(0.01..1.0);

            let mut flat = Vec::new();
            for k in 0..n_ues {
                for m in 0..n_aps {
                    flat.push(h[k][m].clone());
                }
            }
            let ch = realization(flat, n_aps);
            let plan = BeamformingPlan {
                comm: (0..n_aps)
                    .map(|m| {
                        (0..n_ues)
                            .filter(|&k| serve[k][m])
                            .map(|k| CommBeam { ue: k, w: w[k][m].clone(), power: eta[k][m] })
                            .collect()
                    })
                    .collect(),
                sense: w0
                    .iter()
                    .map(|o| {
                        o.as_ref().map(|(v, p)| SenseBeam {
                            region: 0,
                            cell: 0,
                            w: v.clone(),
                            power: *p,
                            annulled: vec![],
                            fallback: false,
                        })
                    })
                    .collect(),
            };
            let fast = communication_sinrs(&ch, &plan, n_ues, noise);
            for k in 0..n_ues {
                let oracle = brute_force_sinr(&h, &serve, &w, &eta, &w0, k, noise);
                assert!((fast[k] - oracle).abs() <= 1e-10 * oracle.max(1e-300));
            }

            let mut silent = plan.clone();
            silent.sense.iter_mut().for_each(|s| {
                if let Some(s) = s {
                    s.power = 0.0;
                }
            });
            let without = communication_sinrs(&ch, &silent, n_ues, noise);
            for k in 0..n_ues {
                assert!(without[k] >= fast[k]);
            }
        }
    }

    #[test]
    fn rates() {
        assert_eq!(rate_bps(0.0, 20e6), 0.0);
        assert_eq!(rate_bps(1.0, 20e6), 20e6);
        assert_eq!(rate_bps(3.0, 20e6), 40e6);
    }

    fn outcome(decision: bool, truth: bool) -> DetectionOutcome {
        DetectionOutcome {
            region: 0,
            cell: 0,
            statistic: 0.0,
            threshold: 0.0,
            decision,
            alpha_hat: vec![],
            sensing_snr_db: 0.0,
            truth,
        }
    }

    #[test]
    fn detection_rate_cases() {
        let log = vec![outcome(true, true), outcome(false, false), outcome(true, true)];
        let r = detection_rates(&log);
        assert_eq!((r.pd, r.pfa), (Some(1.0), Some(0.0)));
        let r = detection_rates(&[outcome(true, false), outcome(true, false)]);
        assert_eq!((r.pd, r.pfa), (None, Some(1.0)));
        let r = detection_rates(&[outcome(false, true)]);
        assert_eq!((r.pd, r.pfa), (Some(0.0), None));
    }

    #[test]
    fn cdf_cases() {
        let c = empirical_cdf(&[5.0]).unwrap();
        assert_eq!((c.values.clone(), c.probabilities.clone()), (vec![5.0], vec![1.0]));
        let c = empirical_cdf(&[3.0, 1.0, 4.0, 2.0]).unwrap();
        assert_eq!(c.values, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(c.probabilities, vec![0.25, 0.5, 0.75, 1.0]);
        assert_eq!(c.eval(2.5), 0.5);
        assert_eq!(c.eval(0.0), 0.0);
        assert!(empirical_cdf(&[]).is_err());
        assert!(empirical_cdf(&[1.0, f64::NAN]).is_err());
        let t = empirical_cdf(&[2.0, 2.0, 1.0]).unwrap();
        assert!(t.probabilities.windows(2).all(|w| w[0] <= w[1]));
    }

    fn assignment(mode: crate::config::ScalabilityMode, aps: usize, regions: usize, seed: u64) -> ClusterAssignment {
        use crate::config::ExperimentConfig;
        use crate::deployment::generate_layout;
        let mut cfg = ExperimentConfig::default();
        cfg.aps = aps;
        cfg.ues = aps / 2;
        cfg.regions = regions;
        cfg.area_side_m = 1000.0 * (aps as f64 / 64.0).sqrt();
        let layout = generate_layout(&cfg, &mut stream(seed, 0, Purpose::Layout, 0)).unwrap();
        let gain = |k: usize, m: usize| -layout.ues[k].distance(&layout.aps[m]);
        ClusterAssignment::build(&layout, gain, mode, 4, 6, 2).unwrap()
    }

    #[test]
    fn fronthaul_cases() {
        use crate::config::ScalabilityMode;
        let utc = fronthaul_load(&assignment(ScalabilityMode::Utc, 64, 4, 1));
        assert_eq!(utc.per_rx_ap.len(), 8);
        assert!(utc.per_rx_ap.iter().all(|p| p.1 == 1));
        assert_eq!((utc.max, utc.mean), (1, 1.0));
        let cf = fronthaul_load(&assignment(ScalabilityMode::Cf, 64, 4, 1));
        assert!(cf.per_rx_ap.iter().all(|p| p.1 == 4));
        assert_eq!(fronthaul_load(&assignment(ScalabilityMode::Utc, 128, 8, 2)).max, 1);
    }
}
