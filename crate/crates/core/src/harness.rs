//! Monte Carlo orchestration: drops, fading realizations, scan epochs and experiment presets.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{rcs_covariance, ChannelRealization, Scene};
use crate::clustering::ClusterAssignment;
use crate::config::{Beamformer, ExperimentConfig, ScalabilityMode};
use crate::deployment::{build_scan_schedule, generate_layout, NetworkLayout, ScanSchedule};
use crate::error::{Error, Result};
use crate::linalg::{cn_vector, linear_to_db, unit_phase, CMat, CVec};
use crate::metrics::{
    communication_sinrs, detection_rates, empirical_cdf, fronthaul_load, rate_bps, CdfCurve, DetectionRates, MetricKind,
    MetricSample,
};
use crate::precoding::{transmit_vector, BeamformingPlan, PlanSettings};
use crate::rng::{stream, Purpose};
use crate::sensing::{
    build_dictionary, calibrate_threshold, detect, glrt_statistic, ml_alpha_estimate, sensing_snr, sensing_snr_thin,
    simulate_rx_observable, DetectionOutcome, Dictionary, EchoScene,
};
use crate::stats::median;

/// One row of the detection log.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRecord {
    pub drop: usize,
    pub epoch: usize,
    pub region: usize,
    pub cell: usize,
    pub statistic: f64,
    pub threshold: f64,
    pub rank: usize,
    pub decision: bool,
    pub truth: bool,
    pub sensing_snr_db: f64,
    /// Rank-normalized SNR, only with `thin_snr_debug`.
    pub sensing_snr_thin_db: Option<f64>,
}

/// Run-wide health counters. Merging is commutative.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Diagnostics {
    pub plans: usize,
    pub power_violations: usize,
    pub zf_beams: usize,
    pub zf_fallbacks: usize,
    pub max_zf_leakage: f64,
    /// Leakage relative to the annulled channel norm.
    pub max_zf_leakage_rel: f64,
}

impl Diagnostics {
    pub fn merge(&mut self, other: &Diagnostics) {
        self.plans += other.plans;
        self.power_violations += other.power_violations;
        self.zf_beams += other.zf_beams;
        self.zf_fallbacks += other.zf_fallbacks;
        self.max_zf_leakage = self.max_zf_leakage.max(other.max_zf_leakage);
        self.max_zf_leakage_rel = self.max_zf_leakage_rel.max(other.max_zf_leakage_rel);
    }
}

/// Per-AP load of one assignment.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LoadProfile {
    pub max_served_ues: usize,
    pub max_cluster_membership: usize,
    pub max_fronthaul: usize,
    pub mean_fronthaul: f64,
}

impl LoadProfile {
    pub fn of(assignment: &ClusterAssignment) -> Self {
        let fh = fronthaul_load(assignment);
        Self {
            max_served_ues: assignment.served.iter().map(Vec::len).max().unwrap_or(0),
            max_cluster_membership: assignment.cluster_membership().into_iter().max().unwrap_or(0),
            max_fronthaul: fh.max,
            mean_fronthaul: fh.mean,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DropResult {
    pub drop: usize,
    pub samples: Vec<MetricSample>,
    pub detections: Vec<DetectionRecord>,
    pub diagnostics: Diagnostics,
    pub load: LoadProfile,
}

/// Everything fixed over one drop.
pub struct DropSetup {
    pub layout: NetworkLayout,
    pub scene: Scene,
    pub schedule: ScanSchedule,
    pub assignment: ClusterAssignment,
}

impl DropSetup {
    pub fn new(cfg: &ExperimentConfig, drop: usize) -> Result<Self> {
        let d = drop as u64;
        let layout = generate_layout(cfg, &mut stream(cfg.seed, d, Purpose::Layout, 0))?;
        let scene = Scene::build(
            cfg,
            &layout,
            &mut stream(cfg.seed, d, Purpose::LargeScale, 0),
            &mut stream(cfg.seed, d, Purpose::Orientation, 0),
        )?;
        let schedule = build_scan_schedule(&layout.regions, &mut stream(cfg.seed, d, Purpose::Schedule, 0));
        let assignment = ClusterAssignment::build(
            &layout,
            |k, m| scene.ue_gain(k, m),
            cfg.mode,
            cfg.serving_aps,
            cfg.tx_per_region,
            cfg.rx_per_region,
        )?;
        Ok(Self {
            layout,
            scene,
            schedule,
            assignment,
        })
    }
}

/// Layout and assignment only, no fading loop.
pub fn load_profile(cfg: &ExperimentConfig, drop: usize) -> Result<LoadProfile> {
    cfg.validate()?;
    let setup = DropSetup::new(cfg, drop).map_err(|e| e.in_drop(drop))?;
    Ok(LoadProfile::of(&setup.assignment))
}

pub fn run_drop(cfg: &ExperimentConfig, drop: usize) -> Result<DropResult> {
    run_drop_inner(cfg, drop).map_err(|e| e.in_drop(drop))
}

fn run_drop_inner(cfg: &ExperimentConfig, drop: usize) -> Result<DropResult> {
    let setup = DropSetup::new(cfg, drop)?;
    let DropSetup {
        layout,
        scene,
        schedule,
        assignment,
    } = &setup;
    let d = drop as u64;
    let m_aps = layout.aps.len();
    let n_ues = layout.ues.len();
    let n = cfg.antennas;
    let s_count = cfg.snapshots;
    let noise_var = cfg.noise_power_w();
    let noise_std = Complex64::from(noise_var.sqrt());
    let settings = PlanSettings {
        ap_power_w: cfg.ap_power_w,
        beamformer: cfg.beamformer,
        k_zf: cfg.k_zf,
        sensing_share: cfg.sensing_share,
    };
    let present = vec![true; layout.targets.len()];
    let is_tx: Vec<bool> = {
        let mut v = vec![false; m_aps];
        assignment.tx_aps.iter().for_each(|&m| v[m] = true);
        v
    };

    let mut covariances: HashMap<(usize, usize), DMatrix<f64>> = HashMap::new();
    let mut thresholds: HashMap<usize, f64> = HashMap::new();
    let mut samples = Vec::with_capacity(cfg.fading * (n_ues + 3 * layout.regions.len()));
    let mut detections = Vec::with_capacity(cfg.fading * layout.regions.len());
    let mut diagnostics = Diagnostics::default();

    for f in 0..cfg.fading {
        let fi = f as u64;
        let channels = ChannelRealization::draw(
            scene,
            &assignment.rx_aps,
            &assignment.tx_aps,
            &mut stream(cfg.seed, d, Purpose::UeChannels, fi),
            &mut stream(cfg.seed, d, Purpose::Rcs, fi),
        );
        let scanned = schedule.at(f);
        let plan = BeamformingPlan::build(&settings, layout, scene, assignment, &channels, scanned)?;
        diagnostics.plans += 1;
        diagnostics.power_violations += plan.power_budget_violations(cfg.ap_power_w);
        let leak = plan.zf_leakage(&channels);
        diagnostics.zf_beams += leak.beams;
        diagnostics.zf_fallbacks += leak.fallbacks;
        diagnostics.max_zf_leakage = diagnostics.max_zf_leakage.max(leak.max_abs);
        diagnostics.max_zf_leakage_rel = diagnostics.max_zf_leakage_rel.max(leak.max_rel);

        for (k, sinr) in communication_sinrs(&channels, &plan, n_ues, noise_var).into_iter().enumerate() {
            samples.push(MetricSample {
                drop,
                kind: MetricKind::RateBps,
                entity: k,
                value: rate_bps(sinr, cfg.bandwidth_hz),
            });
        }

        let direct = if cfg.direct_residual > 0.0 {
            direct_channels(cfg, scene, layout, assignment, drop, f)?
        } else {
            HashMap::new()
        };

        let l_count = layout.regions.len();
        let mut acc = vec![CellAccumulator::default(); l_count];
        for s in 0..s_count {
            let idx = fi * s_count as u64 + s as u64;
            let mut sym = stream(cfg.seed, d, Purpose::Symbols, idx);
            let data: Vec<Complex64> = (0..n_ues).map(|_| unit_phase(&mut sym)).collect();
            let sense: Vec<Complex64> = (0..m_aps).map(|_| unit_phase(&mut sym)).collect();
            let signals: Vec<CVec> = (0..m_aps)
                .map(|m| {
                    if is_tx[m] {
                        transmit_vector(&plan, m, &data, sense[m], n)
                    } else {
                        CVec::zeros(n)
                    }
                })
                .collect();
            let mut noise_rng = stream(cfg.seed, d, Purpose::Noise, idx);
            let noise: Vec<CVec> = (0..m_aps).map(|_| cn_vector(n, &mut noise_rng) * noise_std).collect();

            let echo = EchoScene {
                scene,
                channels: &channels,
                signals: &signals,
                present: &present,
            };
            let mut observables: HashMap<usize, CVec> = HashMap::with_capacity(assignment.rx_aps.len());
            for &rx in &assignment.rx_aps {
                let g = direct.get(&rx).map_or(&[][..], |v| v.as_slice());
                observables.insert(rx, simulate_rx_observable(&echo, rx, g, cfg.direct_residual, &noise[rx])?);
            }

            for (l, cluster) in assignment.clusters.iter().enumerate() {
                let cell = scanned[l];
                let links = &scene.cells[l][cell];
                let dicts = cluster
                    .rx
                    .iter()
                    .map(|&rx| build_dictionary(links, rx, &cluster.tx, &signals))
                    .collect::<Result<Vec<Dictionary>>>()?;
                let refs: Vec<&Dictionary> = dicts.iter().collect();
                let ys: Vec<&CVec> = cluster.rx.iter().map(|rx| &observables[rx]).collect();
                let cov = match covariances.entry((l, cell)) {
                    std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                    std::collections::hash_map::Entry::Vacant(e) => {
                        let pos: Vec<_> = cluster.tx.iter().map(|&m| layout.aps[m]).collect();
                        e.insert(rcs_covariance(&links.position, &pos, &scene.rcs_model)?)
                    }
                };
                let covs = vec![&*cov; refs.len()];
                let a = &mut acc[l];
                a.statistic += glrt_statistic(&refs, &ys)?;
                a.rank += refs.iter().map(|d| d.rank()).sum::<usize>();
                a.snr += sensing_snr(&refs, &covs, noise_var)?;
                if cfg.thin_snr_debug {
                    a.snr_thin += sensing_snr_thin(&refs, &covs, noise_var)?;
                }
            }
        }

        for (l, a) in acc.iter().enumerate() {
            let cell = scanned[l];
            let threshold = if a.rank == 0 {
                0.0
            } else {
                match thresholds.get(&a.rank) {
                    Some(&t) => t,
                    None => {
                        let t = calibrate_threshold(a.rank, noise_var, cfg.pfa)?;
                        thresholds.insert(a.rank, t);
                        t
                    }
                }
            };
            let footprint = &layout.regions[l].cells[cell];
            let truth = layout.targets.iter().any(|t| footprint.contains_horizontal(&t.position));
            let decision = detect(a.statistic, threshold);
            let snr = a.snr / s_count as f64;
            let record = DetectionRecord {
                drop,
                epoch: f,
                region: l,
                cell,
                statistic: a.statistic,
                threshold,
                rank: a.rank,
                decision,
                truth,
                sensing_snr_db: linear_to_db(snr),
                sensing_snr_thin_db: cfg.thin_snr_debug.then(|| linear_to_db(a.snr_thin / s_count as f64)),
            };
            for (kind, value) in [
                (MetricKind::SensingSnrDb, record.sensing_snr_db),
                (MetricKind::Statistic, record.statistic),
                (MetricKind::Decision, if decision { 1.0 } else { 0.0 }),
            ] {
                samples.push(MetricSample {
                    drop,
                    kind,
                    entity: l,
                    value,
                });
            }
            detections.push(record);
        }
    }

    Ok(DropResult {
        drop,
        samples,
        detections,
        diagnostics,
        load: LoadProfile::of(assignment),
    })
}

#[derive(Debug, Clone, Default)]
struct CellAccumulator {
    statistic: f64,
    rank: usize,
    snr: f64,
    snr_thin: f64,
}

/// Direct transmit-to-receive channels of one fading realization, keyed by receive AP.
fn direct_channels(
    cfg: &ExperimentConfig,
    scene: &Scene,
    layout: &NetworkLayout,
    assignment: &ClusterAssignment,
    drop: usize,
    epoch: usize,
) -> Result<HashMap<usize, Vec<(usize, CMat)>>> {
    let m = layout.aps.len() as u64;
    let mut out = HashMap::new();
    for &rx in &assignment.rx_aps {
        let mut list = Vec::with_capacity(assignment.tx_aps.len());
        for &tx in &assignment.tx_aps {
            let idx = epoch as u64 * m * m + tx as u64 * m + rx as u64;
            let mut rng = stream(cfg.seed, drop as u64, Purpose::ApApChannel, idx);
            list.push((tx, ChannelRealization::ap_ap_channel(scene, layout, tx, rx, &mut rng)?));
        }
        out.insert(rx, list);
    }
    Ok(out)
}

/// Full inspection of one range cell from explicit observables, including the
/// per-AP reflectivity estimates.
pub fn inspect_cell(
    dicts: &[Dictionary],
    observables: &[&CVec],
    covariances: &[&DMatrix<f64>],
    noise_var: f64,
    pfa: f64,
    region: usize,
    cell: usize,
    truth: bool,
) -> Result<DetectionOutcome> {
    let refs: Vec<&Dictionary> = dicts.iter().collect();
    let statistic = glrt_statistic(&refs, observables)?;
    let rank: usize = dicts.iter().map(|d| d.rank()).sum();
    let threshold = if rank == 0 { 0.0 } else { calibrate_threshold(rank, noise_var, pfa)? };
    let alpha_hat = dicts
        .iter()
        .zip(observables)
        .map(|(d, y)| Ok((d.rx_ap, ml_alpha_estimate(d, y)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DetectionOutcome {
        region,
        cell,
        statistic,
        threshold,
        decision: detect(statistic, threshold),
        alpha_hat,
        sensing_snr_db: linear_to_db(sensing_snr(&refs, covariances, noise_var)?),
        truth,
    })
}

/// Aggregated output of one experiment arm.
#[derive(Debug, Clone)]
pub struct ResultSet {
    pub label: String,
    pub config: ExperimentConfig,
    pub samples: Vec<MetricSample>,
    pub detections: Vec<DetectionRecord>,
    pub rate_cdf: CdfCurve,
    pub snr_cdf: CdfCurve,
    pub detection: DetectionRates,
    pub load: LoadProfile,
    pub diagnostics: Diagnostics,
}

impl ResultSet {
    pub fn values(&self, kind: MetricKind) -> Vec<f64> {
        self.samples.iter().filter(|s| s.kind == kind).map(|s| s.value).collect()
    }

    pub fn median(&self, kind: MetricKind) -> Option<f64> {
        median(&self.values(kind))
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultSet> {
    run_labeled(cfg, &default_label(cfg))
}

fn default_label(cfg: &ExperimentConfig) -> String {
    match cfg.beamformer {
        Beamformer::Mf => cfg.mode.to_string().to_lowercase(),
        Beamformer::Zf => format!("{}-zf{}", cfg.mode.to_string().to_lowercase(), cfg.k_zf),
    }
}

pub fn run_labeled(cfg: &ExperimentConfig, label: &str) -> Result<ResultSet> {
    cfg.validate()?;
    let drops = (0..cfg.drops)
        .into_par_iter()
        .map(|d| run_drop(cfg, d))
        .collect::<Result<Vec<_>>>()?;
    let mut samples = Vec::new();
    let mut detections = Vec::new();
    let mut diagnostics = Diagnostics::default();
    let mut load = LoadProfile::default();
    let mut fh_mean = 0.0;
    for r in drops {
        samples.extend(r.samples);
        detections.extend(r.detections);
        diagnostics.merge(&r.diagnostics);
        load.max_served_ues = load.max_served_ues.max(r.load.max_served_ues);
        load.max_cluster_membership = load.max_cluster_membership.max(r.load.max_cluster_membership);
        load.max_fronthaul = load.max_fronthaul.max(r.load.max_fronthaul);
        fh_mean += r.load.mean_fronthaul;
    }
    load.mean_fronthaul = fh_mean / cfg.drops as f64;
    let rates: Vec<f64> = samples.iter().filter(|s| s.kind == MetricKind::RateBps).map(|s| s.value).collect();
    let snrs: Vec<f64> = samples.iter().filter(|s| s.kind == MetricKind::SensingSnrDb).map(|s| s.value).collect();
    let outcomes: Vec<DetectionOutcome> = detections
        .iter()
        .map(|r| DetectionOutcome {
            region: r.region,
            cell: r.cell,
            statistic: r.statistic,
            threshold: r.threshold,
            decision: r.decision,
            alpha_hat: Vec::new(),
            sensing_snr_db: r.sensing_snr_db,
            truth: r.truth,
        })
        .collect();
    Ok(ResultSet {
        label: label.to_string(),
        config: cfg.clone(),
        rate_cdf: curve_or_empty(&rates)?,
        snr_cdf: curve_or_empty(&snrs)?,
        detection: detection_rates(&outcomes),
        samples,
        detections,
        load,
        diagnostics,
    })
}

fn curve_or_empty(values: &[f64]) -> Result<CdfCurve> {
    if values.is_empty() {
        Ok(CdfCurve {
            values: Vec::new(),
            probabilities: Vec::new(),
        })
    } else {
        empirical_cdf(values)
    }
}

/// UTC, UC, TC and CF arms with common random numbers.
pub fn preset_mode_comparison(cfg: &ExperimentConfig) -> Result<Vec<ResultSet>> {
    ScalabilityMode::ALL
        .iter()
        .map(|&mode| {
            let mut c = cfg.clone();
            c.mode = mode;
            run_labeled(&c, &mode.to_string().to_lowercase())
        })
        .collect()
}

/// Arm configurations for a receive-AP sweep at fixed cluster size.
pub fn rx_sweep_configs(cfg: &ExperimentConfig, rx_counts: &[usize]) -> Result<Vec<ExperimentConfig>> {
    let size = cfg.cluster_size();
    rx_counts
        .iter()
        .map(|&rx| {
            if rx == 0 || rx >= size {
                return Err(Error::config(format!(
                    "receive count {rx} must lie in 1..{size} for cluster size {size}"
                )));
            }
            let mut c = cfg.clone();
            c.rx_per_region = rx;
            c.tx_per_region = size - rx;
            Ok(c)
        })
        .collect()
}

pub fn preset_rx_sweep(cfg: &ExperimentConfig, rx_counts: &[usize]) -> Result<Vec<ResultSet>> {
    rx_sweep_configs(cfg, rx_counts)?
        .iter()
        .map(|c| run_labeled(c, &format!("rx{}", c.rx_per_region)))
        .collect()
}

/// MF arm followed by one ZF arm per entry of `k_zf_values`.
pub fn preset_beamformer_comparison(cfg: &ExperimentConfig, k_zf_values: &[usize]) -> Result<Vec<ResultSet>> {
    for &k in k_zf_values {
        if k > cfg.antennas.saturating_sub(1) {
            return Err(Error::config(format!("`k_zf` = {k} exceeds N - 1 = {}", cfg.antennas - 1)));
        }
    }
    let mut mf = cfg.clone();
    mf.beamformer = Beamformer::Mf;
    let mut out = vec![run_labeled(&mf, "mf")?];
    for &k in k_zf_values {
        let mut zf = cfg.clone();
        zf.beamformer = Beamformer::Zf;
        zf.k_zf = k;
        out.push(run_labeled(&zf, &format!("zf{k}"))?);
    }
    Ok(out)
}

/// Write the result directory: the resolved base config, one subdirectory per arm
/// (config, metrics, detections, CDFs) and a summary digest.
pub fn write_results(dir: &Path, base: &ExperimentConfig, sets: &[ResultSet]) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.cfg"), base.to_kv())?;
    for set in sets {
        let arm = dir.join(&set.label);
        fs::create_dir_all(&arm)?;
        fs::write(arm.join("config.cfg"), set.config.to_kv())?;

        let mut w = csv::Writer::from_path(arm.join("metrics.csv"))?;
        w.write_record(["drop", "entity", "metric", "value"])?;
        for s in &set.samples {
            w.write_record([s.drop.to_string(), s.entity.to_string(), s.kind.to_string(), s.value.to_string()])?;
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(arm.join("detections.csv"))?;
        w.write_record([
            "drop",
            "epoch",
            "region",
            "cell",
            "statistic",
            "threshold",
            "rank",
            "decision",
            "truth",
            "sensing_snr_db",
            "sensing_snr_thin_db",
        ])?;
        for r in &set.detections {
            w.write_record([
                r.drop.to_string(),
                r.epoch.to_string(),
                r.region.to_string(),
                r.cell.to_string(),
                r.statistic.to_string(),
                r.threshold.to_string(),
                r.rank.to_string(),
                (r.decision as u8).to_string(),
                (r.truth as u8).to_string(),
                r.sensing_snr_db.to_string(),
                r.sensing_snr_thin_db.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;

        for (name, curve) in [("cdf_rate_bps.csv", &set.rate_cdf), ("cdf_sensing_snr_db.csv", &set.snr_cdf)] {
            let mut w = csv::Writer::from_path(arm.join(name))?;
            w.write_record(["value", "probability"])?;
            for (v, p) in curve.values.iter().zip(&curve.probabilities) {
                w.write_record([v.to_string(), p.to_string()])?;
            }
            w.flush()?;
        }
    }
    fs::write(dir.join("summary.txt"), summary(sets))?;
    Ok(())
}

/// Plain-text digest with one block per arm.
pub fn summary(sets: &[ResultSet]) -> String {
    let mut out = String::new();
    let fmt_opt = |v: Option<f64>| v.map_or("undefined".to_string(), |x| format!("{x:.6}"));
    for s in sets {
        let _ = writeln!(out, "[{}]", s.label);
        let _ = writeln!(out, "seed = {}", s.seed());
        let _ = writeln!(out, "mode = {}", s.config.mode);
        let _ = writeln!(out, "beamformer = {}", s.config.beamformer);
        let _ = writeln!(out, "k_zf = {}", s.config.k_zf);
        let _ = writeln!(out, "tx_per_region = {}", s.config.tx_per_region);
        let _ = writeln!(out, "rx_per_region = {}", s.config.rx_per_region);
        let _ = writeln!(out, "rate_samples = {}", s.rate_cdf.len());
        let _ = writeln!(out, "sensing_samples = {}", s.snr_cdf.len());
        let _ = writeln!(out, "median_rate_mbps = {}", fmt_opt(s.median(MetricKind::RateBps).map(|v| v / 1e6)));
        let _ = writeln!(out, "median_sensing_snr_db = {}", fmt_opt(s.median(MetricKind::SensingSnrDb)));
        let _ = writeln!(out, "pd = {}", fmt_opt(s.detection.pd));
        let _ = writeln!(out, "pfa = {}", fmt_opt(s.detection.pfa));
        let _ = writeln!(out, "present_cells = {}", s.detection.present);
        let _ = writeln!(out, "absent_cells = {}", s.detection.absent);
        let _ = writeln!(out, "max_served_ues = {}", s.load.max_served_ues);
        let _ = writeln!(out, "max_cluster_membership = {}", s.load.max_cluster_membership);
        let _ = writeln!(out, "fronthaul_max = {}", s.load.max_fronthaul);
        let _ = writeln!(out, "fronthaul_mean = {:.6}", s.load.mean_fronthaul);
        let _ = writeln!(out, "plans = {}", s.diagnostics.plans);
        let _ = writeln!(out, "power_violations = {}", s.diagnostics.power_violations);
        let _ = writeln!(out, "zf_beams = {}", s.diagnostics.zf_beams);
        let _ = writeln!(out, "zf_fallbacks = {}", s.diagnostics.zf_fallbacks);
        let _ = writeln!(out, "max_zf_leakage = {:e}", s.diagnostics.max_zf_leakage);
        let _ = writeln!(out, "max_zf_leakage_rel = {:e}", s.diagnostics.max_zf_leakage_rel);
        out.push('\n');
    }
    out
}
