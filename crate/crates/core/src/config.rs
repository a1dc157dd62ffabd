//! Experiment configuration and its flat `key = value` text form.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Speed of light used for range-resolution arithmetic.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Which tasks use scalable (clustered) processing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalabilityMode {
    /// User-centric communication and target-centric sensing.
    Utc,
    /// User-centric communication, every AP senses every region.
    Uc,
    /// Every transmit AP serves every UE, target-centric sensing.
    Tc,
    /// Neither task is clustered.
    Cf,
}

impl ScalabilityMode {
    pub const ALL: [ScalabilityMode; 4] = [Self::Utc, Self::Uc, Self::Tc, Self::Cf];

    pub fn user_centric(self) -> bool {
        matches!(self, Self::Utc | Self::Uc)
    }

    pub fn target_centric(self) -> bool {
        matches!(self, Self::Utc | Self::Tc)
    }
}

impl fmt::Display for ScalabilityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Utc => "UTC",
            Self::Uc => "UC",
            Self::Tc => "TC",
            Self::Cf => "CF",
        })
    }
}

impl FromStr for ScalabilityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "UTC" => Ok(Self::Utc),
            "UC" => Ok(Self::Uc),
            "TC" => Ok(Self::Tc),
            "CF" => Ok(Self::Cf),
            other => Err(Error::config(format!("unknown scalability mode `{other}`"))),
        }
    }
}

/// Sensing beamformer family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Beamformer {
    /// Steering vector matched to the inspected cell.
    Mf,
    /// Matched beam projected away from the strongest served UEs.
    Zf,
}

impl fmt::Display for Beamformer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Mf => "MF",
            Self::Zf => "ZF",
        })
    }
}

impl FromStr for Beamformer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "MF" => Ok(Self::Mf),
            "ZF" => Ok(Self::Zf),
            other => Err(Error::config(format!("unknown beamformer `{other}`"))),
        }
    }
}

/// Full description of one experiment arm. Defaults reproduce the baseline
/// urban-micro scenario: 64 APs, 32 UEs, 8 targets, 4 sensing regions.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub aps: usize,
    pub ues: usize,
    pub targets: usize,
    pub regions: usize,
    pub antennas: usize,
    pub serving_aps: usize,
    pub tx_per_region: usize,
    pub rx_per_region: usize,
    pub k_zf: usize,
    pub mode: ScalabilityMode,
    pub beamformer: Beamformer,
    pub ap_power_w: f64,
    pub bandwidth_hz: f64,
    pub carrier_hz: f64,
    pub noise_density_dbm_hz: f64,
    pub sigma_rcs_dbsm: f64,
    pub rician_k_db: f64,
    pub angular_corr_deg: f64,
    pub pfa: f64,
    pub drops: usize,
    pub fading: usize,
    pub cell_extent_m: f64,
    /// Use the bandwidth-matched range resolution `c / 2B` as the cell extent.
    pub bandwidth_matched_cells: bool,
    pub seed: u64,

    pub area_side_m: f64,
    pub ap_height_m: f64,
    pub ue_height_m: f64,
    pub target_height_min_m: f64,
    pub target_height_max_m: f64,
    pub inspection_height_m: f64,
    pub shadowing_std_db: f64,
    pub target_shadowing: bool,
    pub antenna_spacing_wl: f64,
    pub random_orientation: bool,
    /// Fixed fraction of AP power reserved for sensing; equal split when `None`.
    pub sensing_share: Option<f64>,
    pub snapshots: usize,
    /// Amplitude of the direct-path term left after cancellation (0 = exact).
    pub direct_residual: f64,
    /// Also report the sensing SNR normalized by dictionary rank instead of N.
    pub thin_snr_debug: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            aps: 64,
            ues: 32,
            targets: 8,
            regions: 4,
            antennas: 8,
            serving_aps: 4,
            tx_per_region: 6,
            rx_per_region: 2,
            k_zf: 0,
            mode: ScalabilityMode::Utc,
            beamformer: Beamformer::Mf,
            ap_power_w: 2.0,
            bandwidth_hz: 20e6,
            carrier_hz: 2e9,
            noise_density_dbm_hz: -174.0,
            sigma_rcs_dbsm: 10.0,
            rician_k_db: 10.0,
            angular_corr_deg: 10.0,
            pfa: 0.01,
            drops: 100,
            fading: 100,
            cell_extent_m: 125.0,
            bandwidth_matched_cells: false,
            seed: 1,
            area_side_m: 1000.0,
            ap_height_m: 10.0,
            ue_height_m: 1.65,
            target_height_min_m: 20.0,
            target_height_max_m: 200.0,
            inspection_height_m: 110.0,
            shadowing_std_db: 4.0,
            target_shadowing: false,
            antenna_spacing_wl: 0.5,
            random_orientation: false,
            sensing_share: None,
            snapshots: 1,
            direct_residual: 0.0,
            thin_snr_debug: false,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::config(format!("invalid boolean `{value}` for `{key}`"))),
    }
}

impl ExperimentConfig {
    /// Thermal noise power `N0 * B` in watts.
    pub fn noise_power_w(&self) -> f64 {
        10f64.powf((self.noise_density_dbm_hz - 30.0) / 10.0) * self.bandwidth_hz
    }

    pub fn sigma_rcs_m2(&self) -> f64 {
        10f64.powf(self.sigma_rcs_dbsm / 10.0)
    }

    pub fn rician_k_linear(&self) -> f64 {
        10f64.powf(self.rician_k_db / 10.0)
    }

    pub fn angular_corr_rad(&self) -> f64 {
        self.angular_corr_deg.to_radians()
    }

    /// Horizontal cell extent actually used for the range-cell grid.
    pub fn effective_cell_extent_m(&self) -> f64 {
        if self.bandwidth_matched_cells {
            SPEED_OF_LIGHT / (2.0 * self.bandwidth_hz)
        } else {
            self.cell_extent_m
        }
    }

    pub fn cluster_size(&self) -> usize {
        self.tx_per_region + self.rx_per_region
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("aps", self.aps),
            ("ues", self.ues),
            ("regions", self.regions),
            ("antennas", self.antennas),
            ("serving_aps", self.serving_aps),
            ("tx_per_region", self.tx_per_region),
            ("rx_per_region", self.rx_per_region),
            ("drops", self.drops),
            ("fading", self.fading),
            ("snapshots", self.snapshots),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::config(format!("`{name}` must be positive")));
            }
        }
        if !(self.pfa > 0.0 && self.pfa < 1.0) {
            return Err(Error::config(format!("`pfa` must lie in (0, 1), got {}", self.pfa)));
        }
        let finite_positive = [
            ("ap_power_w", self.ap_power_w),
            ("bandwidth_hz", self.bandwidth_hz),
            ("carrier_hz", self.carrier_hz),
            ("angular_corr_deg", self.angular_corr_deg),
            ("area_side_m", self.area_side_m),
            ("antenna_spacing_wl", self.antenna_spacing_wl),
            ("cell_extent", self.effective_cell_extent_m()),
        ];
        for (name, v) in finite_positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("`{name}` must be finite and positive")));
            }
        }
        if self.ap_height_m < 0.0 || self.ue_height_m < 0.0 || self.inspection_height_m < 0.0 {
            return Err(Error::config("heights must be nonnegative"));
        }
        if !(self.target_height_min_m >= 0.0 && self.target_height_min_m <= self.target_height_max_m) {
            return Err(Error::config("target height range must satisfy 0 <= min <= max"));
        }
        if self.shadowing_std_db < 0.0 {
            return Err(Error::config("`shadowing_std_db` must be nonnegative"));
        }
        if let Some(rho) = self.sensing_share {
            if !(0.0..=1.0).contains(&rho) {
                return Err(Error::config("`sensing_share` must lie in [0, 1]"));
            }
        }
        if !(self.direct_residual >= 0.0 && self.direct_residual.is_finite()) {
            return Err(Error::config("`direct_residual` must be finite and nonnegative"));
        }
        let needed = self.cluster_size() * if self.mode.target_centric() { self.regions } else { 1 };
        let rx_needed = self.rx_per_region * self.regions;
        if self.aps < needed.max(rx_needed + 1) {
            return Err(Error::config(format!(
                "{} APs cannot host {} regions of {} tx + {} rx",
                self.aps, self.regions, self.tx_per_region, self.rx_per_region
            )));
        }
        if self.beamformer == Beamformer::Zf && self.k_zf > self.antennas.saturating_sub(1) {
            return Err(Error::config(format!(
                "`k_zf` = {} exceeds N - 1 = {}",
                self.k_zf,
                self.antennas.saturating_sub(1)
            )));
        }
        Ok(())
    }

    /// Ordered `(key, value)` pairs; the canonical text form.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("aps", self.aps.to_string()),
            ("ues", self.ues.to_string()),
            ("targets", self.targets.to_string()),
            ("regions", self.regions.to_string()),
            ("antennas", self.antennas.to_string()),
            ("serving_aps", self.serving_aps.to_string()),
            ("tx_per_region", self.tx_per_region.to_string()),
            ("rx_per_region", self.rx_per_region.to_string()),
            ("k_zf", self.k_zf.to_string()),
            ("mode", self.mode.to_string()),
            ("beamformer", self.beamformer.to_string()),
            ("ap_power_w", self.ap_power_w.to_string()),
            ("bandwidth_hz", self.bandwidth_hz.to_string()),
            ("carrier_hz", self.carrier_hz.to_string()),
            ("noise_density_dbm_hz", self.noise_density_dbm_hz.to_string()),
            ("sigma_rcs_dbsm", self.sigma_rcs_dbsm.to_string()),
            ("rician_k_db", self.rician_k_db.to_string()),
            ("angular_corr_deg", self.angular_corr_deg.to_string()),
            ("pfa", self.pfa.to_string()),
            ("drops", self.drops.to_string()),
            ("fading", self.fading.to_string()),
            ("cell_extent_m", self.cell_extent_m.to_string()),
            ("bandwidth_matched_cells", self.bandwidth_matched_cells.to_string()),
            ("seed", self.seed.to_string()),
            ("area_side_m", self.area_side_m.to_string()),
            ("ap_height_m", self.ap_height_m.to_string()),
            ("ue_height_m", self.ue_height_m.to_string()),
            ("target_height_min_m", self.target_height_min_m.to_string()),
            ("target_height_max_m", self.target_height_max_m.to_string()),
            ("inspection_height_m", self.inspection_height_m.to_string()),
            ("shadowing_std_db", self.shadowing_std_db.to_string()),
            ("target_shadowing", self.target_shadowing.to_string()),
            ("antenna_spacing_wl", self.antenna_spacing_wl.to_string()),
            ("random_orientation", self.random_orientation.to_string()),
            (
                "sensing_share",
                self.sensing_share.map_or_else(|| "auto".to_string(), |v| v.to_string()),
            ),
            ("snapshots", self.snapshots.to_string()),
            ("direct_residual", self.direct_residual.to_string()),
            ("thin_snr_debug", self.thin_snr_debug.to_string()),
        ]
    }

    /// Override a single field by key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        match key {
            "aps" => self.aps = parse_num(key, value)?,
            "ues" => self.ues = parse_num(key, value)?,
            "targets" => self.targets = parse_num(key, value)?,
            "regions" => self.regions = parse_num(key, value)?,
            "antennas" => self.antennas = parse_num(key, value)?,
            "serving_aps" => self.serving_aps = parse_num(key, value)?,
            "tx_per_region" => self.tx_per_region = parse_num(key, value)?,
            "rx_per_region" => self.rx_per_region = parse_num(key, value)?,
            "k_zf" => self.k_zf = parse_num(key, value)?,
            "mode" => self.mode = value.parse()?,
            "beamformer" => self.beamformer = value.parse()?,
            "ap_power_w" => self.ap_power_w = parse_num(key, value)?,
            "bandwidth_hz" => self.bandwidth_hz = parse_num(key, value)?,
            "carrier_hz" => self.carrier_hz = parse_num(key, value)?,
            "noise_density_dbm_hz" => self.noise_density_dbm_hz = parse_num(key, value)?,
            "sigma_rcs_dbsm" => self.sigma_rcs_dbsm = parse_num(key, value)?,
            "rician_k_db" => self.rician_k_db = parse_num(key, value)?,
            "angular_corr_deg" => self.angular_corr_deg = parse_num(key, value)?,
            "pfa" => self.pfa = parse_num(key, value)?,
            "drops" => self.drops = parse_num(key, value)?,
            "fading" => self.fading = parse_num(key, value)?,
            "cell_extent_m" => self.cell_extent_m = parse_num(key, value)?,
            "bandwidth_matched_cells" => self.bandwidth_matched_cells = parse_bool(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "area_side_m" => self.area_side_m = parse_num(key, value)?,
            "ap_height_m" => self.ap_height_m = parse_num(key, value)?,
            "ue_height_m" => self.ue_height_m = parse_num(key, value)?,
            "target_height_min_m" => self.target_height_min_m = parse_num(key, value)?,
            "target_height_max_m" => self.target_height_max_m = parse_num(key, value)?,
            "inspection_height_m" => self.inspection_height_m = parse_num(key, value)?,
            "shadowing_std_db" => self.shadowing_std_db = parse_num(key, value)?,
            "target_shadowing" => self.target_shadowing = parse_bool(key, value)?,
            "antenna_spacing_wl" => self.antenna_spacing_wl = parse_num(key, value)?,
            "random_orientation" => self.random_orientation = parse_bool(key, value)?,
            "sensing_share" => {
                self.sensing_share = match value.trim() {
                    "auto" | "" => None,
                    v => Some(parse_num(key, v)?),
                }
            }
            "snapshots" => self.snapshots = parse_num(key, value)?,
            "direct_residual" => self.direct_residual = parse_num(key, value)?,
            "thin_snr_debug" => self.thin_snr_debug = parse_bool(key, value)?,
            other => return Err(Error::config(format!("unknown configuration key `{other}`"))),
        }
        Ok(())
    }

    /// Parse `key = value` lines on top of the defaults. `#` starts a comment.
    pub fn parse_kv(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            cfg.set(key, value).map_err(|e| Error::Parse {
                line: idx + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(cfg)
    }

    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        }
        out
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_kv(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_baseline() {
        let c = ExperimentConfig::default();
        assert_eq!((c.aps, c.ues, c.targets, c.regions, c.antennas), (64, 32, 8, 4, 8));
        assert_eq!((c.serving_aps, c.tx_per_region, c.rx_per_region), (4, 6, 2));
        assert_eq!(c.ap_power_w, 2.0);
        assert!(c.validate().is_ok());
        // -174 dBm/Hz over 20 MHz = -101 dBm
        let noise_dbm = 10.0 * (c.noise_power_w() * 1e3).log10();
        assert!((noise_dbm + 100.9897).abs() < 1e-3, "{noise_dbm}");
        assert!((c.sigma_rcs_m2() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn kv_round_trip() {
        let mut c = ExperimentConfig::default();
        c.mode = ScalabilityMode::Tc;
        c.sensing_share = Some(0.25);
        c.seed = 99;
        let back = ExperimentConfig::parse_kv(&c.to_kv()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = ExperimentConfig::parse_kv("# header\n\nseed = 7 # trailing\nmode=cf\n").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.mode, ScalabilityMode::Cf);
    }

    #[test]
    fn rejects_unknown_key_and_bad_lines() {
        assert!(matches!(
            ExperimentConfig::parse_kv("bogus = 3"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(ExperimentConfig::parse_kv("seed 3").is_err());
    }

    #[test]
    fn validation_errors() {
        let c = ExperimentConfig { rx_per_region: 0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = ExperimentConfig { pfa: 1.0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = ExperimentConfig { aps: 20, ..Default::default() };
        assert!(c.validate().is_err());
        let c = ExperimentConfig { beamformer: Beamformer::Zf, k_zf: 8, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn bandwidth_matched_extent() {
        let c = ExperimentConfig { bandwidth_matched_cells: true, ..Default::default() };
        assert!((c.effective_cell_extent_m() - 7.5).abs() < 1e-12);
    }
}
