//! Propagation: path loss, array responses, small-scale fading, AP-AP channels
//! and target echoes with angularly correlated Swerling-I reflectivity.

use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::config::ExperimentConfig;
use crate::deployment::{angles_from, NetworkLayout, Position3D};
use crate::error::{Error, Result};
use crate::linalg::{cn01, cn_matrix, cn_vector, db_to_linear, CMat, CVec};

/// Propagation condition of a link in the urban-micro model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    UeApNlos,
    ApApLos,
    ApTargetLos,
}

impl FromStr for LinkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ue_ap_nlos" => Ok(Self::UeApNlos),
            "ap_ap_los" => Ok(Self::ApApLos),
            "ap_target_los" => Ok(Self::ApTargetLos),
            other => Err(Error::domain(format!("unknown link kind `{other}`"))),
        }
    }
}

/// Deterministic urban-micro path loss in dB. Distances below 1 m are clamped.
pub fn pathloss_db(distance_m: f64, link: LinkKind, carrier_hz: f64) -> f64 {
    let d = distance_m.max(1.0);
    let f_ghz = carrier_hz / 1e9;
    match link {
        LinkKind::UeApNlos => 36.7 * d.log10() + 22.7 + 26.0 * f_ghz.log10(),
        LinkKind::ApApLos | LinkKind::ApTargetLos => 22.0 * d.log10() + 28.0 + 20.0 * f_ghz.log10(),
    }
}

/// Linear power gain of a link, `10^(-(PL + shadowing)/10)`.
pub fn link_gain(distance_m: f64, link: LinkKind, carrier_hz: f64, shadowing_db: f64) -> f64 {
    db_to_linear(-(pathloss_db(distance_m, link, carrier_hz) + shadowing_db))
}

/// Uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub n_antennas: usize,
    pub spacing_wavelengths: f64,
    pub broadside_azimuth: f64,
}

impl ArrayGeometry {
    pub fn new(n_antennas: usize, spacing_wavelengths: f64, broadside_azimuth: f64) -> Result<Self> {
        if n_antennas == 0 || !(spacing_wavelengths > 0.0) {
            return Err(Error::domain("array needs N >= 1 and positive spacing"));
        }
        Ok(Self {
            n_antennas,
            spacing_wavelengths,
            broadside_azimuth,
        })
    }
}

/// Array response: entry `i` is `exp(j 2 pi d i sin(az - broadside) cos(el))`.
pub fn steering_vector(geom: &ArrayGeometry, azimuth: f64, elevation: f64) -> CVec {
    let u = (azimuth - geom.broadside_azimuth).sin() * elevation.cos();
    let step = std::f64::consts::TAU * geom.spacing_wavelengths * u;
    CVec::from_fn(geom.n_antennas, |i, _| Complex64::from_polar(1.0, step * i as f64))
}

/// Steering vector of `geom` (located at `from`) towards `to`.
pub fn steering_towards(geom: &ArrayGeometry, from: &Position3D, to: &Position3D) -> Result<CVec> {
    let (az, el) = angles_from(from, to)?;
    Ok(steering_vector(geom, az, el))
}

/// Rayleigh UE-AP channel: `sqrt(large_scale) * g`, `g ~ CN(0, I_N)`.
pub fn draw_ue_ap_channel<R: Rng + ?Sized>(large_scale: f64, geom: &ArrayGeometry, rng: &mut R) -> CVec {
    cn_vector(geom.n_antennas, rng) * Complex64::from(large_scale.max(0.0).sqrt())
}

/// Rician AP-AP channel from a transmit AP to a receive AP (receive rows, transmit columns).
#[allow(clippy::too_many_arguments)]
pub fn draw_ap_ap_channel<R: Rng + ?Sized>(
    large_scale: f64,
    tx_geom: &ArrayGeometry,
    tx_pos: &Position3D,
    rx_geom: &ArrayGeometry,
    rx_pos: &Position3D,
    rician_k: f64,
    rng: &mut R,
) -> Result<CMat> {
    if !(rician_k >= 0.0) {
        return Err(Error::domain("Rician K-factor must be nonnegative"));
    }
    let a_rx = steering_towards(rx_geom, rx_pos, tx_pos)?;
    let a_tx = steering_towards(tx_geom, tx_pos, rx_pos)?;
    let (los, nlos) = if rician_k.is_infinite() {
        (1.0, 0.0)
    } else {
        ((rician_k / (rician_k + 1.0)).sqrt(), (1.0 / (rician_k + 1.0)).sqrt())
    };
    let scale = large_scale.max(0.0).sqrt();
    let mut g = &a_rx * a_tx.adjoint() * Complex64::from(los);
    if nlos > 0.0 {
        g += cn_matrix(rx_geom.n_antennas, tx_geom.n_antennas, rng) * Complex64::from(nlos);
    }
    Ok(g * Complex64::from(scale))
}

/// Reflectivity statistics of a target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcsModel {
    /// Per-coefficient variance in m^2 (linear).
    pub variance: f64,
    /// Width of the Gaussian angular correlation kernel, radians.
    pub angular_corr_std: f64,
}

impl RcsModel {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            variance: cfg.sigma_rcs_m2(),
            angular_corr_std: cfg.angular_corr_rad(),
        }
    }

    /// Correlation between two view directions separated by `angle` radians.
    pub fn kernel(&self, angle: f64) -> f64 {
        (-(angle * angle) / (2.0 * self.angular_corr_std * self.angular_corr_std)).exp()
    }
}

/// Angle between two unit vectors, stable for small separations.
pub fn angle_between(u: &[f64; 3], v: &[f64; 3]) -> f64 {
    let cross = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let cos = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    sin.atan2(cos)
}

/// Angular correlation matrix of a set of APs as seen from `point`.
pub fn view_angle_kernel(point: &Position3D, aps: &[Position3D], model: &RcsModel) -> Result<DMatrix<f64>> {
    let dirs = aps
        .iter()
        .map(|a| point.direction_to(a).ok_or_else(|| Error::domain("AP coincides with the target")))
        .collect::<Result<Vec<_>>>()?;
    let n = aps.len();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            model.kernel(angle_between(&dirs[i], &dirs[j]))
        }
    }))
}

/// Covariance of the reflectivity vector seen by one receive AP across `tx` APs:
/// `sigma^2 * K_tx`, the receive-side kernel factor being 1 on its diagonal.
pub fn rcs_covariance(point: &Position3D, tx_positions: &[Position3D], model: &RcsModel) -> Result<DMatrix<f64>> {
    Ok(view_angle_kernel(point, tx_positions, model)? * model.variance)
}

/// Symmetric square root of a PSD matrix; tiny negative eigenvalues are clipped.
pub fn psd_sqrt(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(cov.clone());
    let max = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !max.is_finite() || min < -1e-8 * max.max(1.0) {
        return Err(Error::Internal(format!(
            "covariance is not positive semidefinite (eigenvalues in [{min:e}, {max:e}])"
        )));
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&roots) * v.transpose())
}

/// Sampler for the reflectivity of one scattering point over every (receive, transmit)
/// AP pair of a fixed AP set. The covariance between pairs `(m, m')` and `(n, n')` is
/// `sigma^2 * k(psi_m - psi_n) * k(psi_m' - psi_n')`, realized as `sigma * A W A^T`
/// with `A = K^{1/2}` and `W` i.i.d. CN(0, 1) over the full AP set.
#[derive(Debug, Clone)]
pub struct RcsField {
    sqrt_kernel: DMatrix<f64>,
    std: f64,
}

impl RcsField {
    pub fn new(point: &Position3D, aps: &[Position3D], model: &RcsModel) -> Result<Self> {
        if aps.is_empty() {
            return Err(Error::domain("reflectivity needs a nonempty AP set"));
        }
        if !(model.variance > 0.0 && model.angular_corr_std > 0.0) {
            return Err(Error::domain("RCS variance and kernel width must be positive"));
        }
        let kernel = view_angle_kernel(point, aps, model)?;
        Ok(Self {
            sqrt_kernel: psd_sqrt(&kernel)?,
            std: model.variance.sqrt(),
        })
    }

    pub fn n_aps(&self) -> usize {
        self.sqrt_kernel.nrows()
    }

    /// Draw reflectivities for the requested receive (rows) and transmit (columns) APs.
    /// Always consumes exactly `n_aps^2` complex normals, whatever the subsets.
    pub fn draw<R: Rng + ?Sized>(&self, rx: &[usize], tx: &[usize], rng: &mut R) -> CMat {
        let n = self.n_aps();
        let w = cn_matrix(n, n, rng);
        let a = &self.sqrt_kernel;
        // rows of A for rx, times W
        let mut left = CMat::zeros(rx.len(), n);
        for (r, &m) in rx.iter().enumerate() {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    acc += w[(i, j)] * a[(m, i)];
                }
                left[(r, j)] = acc;
            }
        }
        let mut out = CMat::zeros(rx.len(), tx.len());
        for (c, &mp) in tx.iter().enumerate() {
            for r in 0..rx.len() {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    acc += left[(r, j)] * a[(mp, j)];
                }
                out[(r, c)] = acc * self.std;
            }
        }
        out
    }
}

/// Reflectivity draw indexed by AP pairs.
#[derive(Debug, Clone)]
pub struct RcsDraw {
    pub rx: Vec<usize>,
    pub tx: Vec<usize>,
    /// `values[(i, j)]` is the coefficient for `(rx[i], tx[j])`.
    pub values: CMat,
}

impl RcsDraw {
    pub fn get(&self, rx_ap: usize, tx_ap: usize) -> Option<Complex64> {
        let i = self.rx.iter().position(|&m| m == rx_ap)?;
        let j = self.tx.iter().position(|&m| m == tx_ap)?;
        Some(self.values[(i, j)])
    }
}

/// Jointly Gaussian reflectivities for every pair in `rx_aps x tx_aps`.
pub fn draw_correlated_rcs<R: Rng + ?Sized>(
    point: &Position3D,
    ap_positions: &[Position3D],
    tx_aps: &[usize],
    rx_aps: &[usize],
    model: &RcsModel,
    rng: &mut R,
) -> Result<RcsDraw> {
    if tx_aps.is_empty() || rx_aps.is_empty() {
        return Err(Error::domain("reflectivity needs nonempty transmit and receive AP sets"));
    }
    let mut union: Vec<usize> = tx_aps.iter().chain(rx_aps).copied().collect();
    union.sort_unstable();
    union.dedup();
    let positions: Vec<Position3D> = union.iter().map(|&m| ap_positions[m]).collect();
    let local = |m: usize| union.binary_search(&m).expect("member of union");
    let field = RcsField::new(point, &positions, model)?;
    let rx_local: Vec<usize> = rx_aps.iter().map(|&m| local(m)).collect();
    let tx_local: Vec<usize> = tx_aps.iter().map(|&m| local(m)).collect();
    Ok(RcsDraw {
        rx: rx_aps.to_vec(),
        tx: tx_aps.to_vec(),
        values: field.draw(&rx_local, &tx_local, rng),
    })
}

/// One bistatic target path.
#[derive(Debug, Clone)]
pub struct TargetLink {
    pub alpha: Complex64,
    /// Product of the two one-way path gains.
    pub beta: f64,
    pub tx_steering: CVec,
    pub rx_steering: CVec,
}

/// `alpha * sqrt(beta) * a_rx a_tx^H`.
pub fn composite_target_channel(link: &TargetLink) -> CMat {
    let scale = link.alpha * link.beta.sqrt();
    &link.rx_steering * link.tx_steering.adjoint() * scale
}

/// Geometry and one-way gains from every AP towards one point (target or cell center).
#[derive(Debug, Clone)]
pub struct PointLinks {
    pub position: Position3D,
    /// One-way LoS power gain AP -> point.
    pub gain: Vec<f64>,
    /// Steering vector of each AP towards the point.
    pub steering: Vec<CVec>,
}

impl PointLinks {
    pub fn build(
        position: Position3D,
        layout: &NetworkLayout,
        arrays: &[ArrayGeometry],
        carrier_hz: f64,
        shadowing_db: Option<&[f64]>,
    ) -> Result<Self> {
        let mut gain = Vec::with_capacity(layout.aps.len());
        let mut steering = Vec::with_capacity(layout.aps.len());
        for (m, ap) in layout.aps.iter().enumerate() {
            let shadow = shadowing_db.map_or(0.0, |s| s[m]);
            gain.push(link_gain(ap.distance(&position), LinkKind::ApTargetLos, carrier_hz, shadow));
            steering.push(steering_towards(&arrays[m], ap, &position)?);
        }
        Ok(Self {
            position,
            gain,
            steering,
        })
    }

    /// Bistatic gain for transmit AP `tx` and receive AP `rx`.
    pub fn beta(&self, rx: usize, tx: usize) -> f64 {
        self.gain[rx] * self.gain[tx]
    }
}

/// Everything about propagation that stays fixed over one drop.
#[derive(Debug, Clone)]
pub struct Scene {
    pub arrays: Vec<ArrayGeometry>,
    /// UE-AP large-scale gains, index `k * M + m`.
    pub large_scale: Vec<f64>,
    pub n_aps: usize,
    pub n_ues: usize,
    pub targets: Vec<PointLinks>,
    pub target_rcs: Vec<RcsField>,
    /// Per region, per cell: links towards the cell center.
    pub cells: Vec<Vec<PointLinks>>,
    pub rcs_model: RcsModel,
    pub carrier_hz: f64,
    pub rician_k: f64,
}

impl Scene {
    /// `large_rng` draws shadowing; `orient_rng` draws array orientations when enabled.
    pub fn build<R1: Rng + ?Sized, R2: Rng + ?Sized>(
        cfg: &ExperimentConfig,
        layout: &NetworkLayout,
        large_rng: &mut R1,
        orient_rng: &mut R2,
    ) -> Result<Self> {
        let m_aps = layout.aps.len();
        let arrays = (0..m_aps)
            .map(|_| {
                let broadside = if cfg.random_orientation {
                    orient_rng.random_range(0.0..std::f64::consts::TAU)
                } else {
                    0.0
                };
                ArrayGeometry::new(cfg.antennas, cfg.antenna_spacing_wl, broadside)
            })
            .collect::<Result<Vec<_>>>()?;

        let shadow = Normal::new(0.0, cfg.shadowing_std_db).map_err(|e| Error::config(e.to_string()))?;
        let mut large_scale = Vec::with_capacity(layout.ues.len() * m_aps);
        for ue in &layout.ues {
            for ap in &layout.aps {
                let s = if cfg.shadowing_std_db > 0.0 { shadow.sample(large_rng) } else { 0.0 };
                large_scale.push(link_gain(ue.distance(ap), LinkKind::UeApNlos, cfg.carrier_hz, s));
            }
        }

        let rcs_model = RcsModel::from_config(cfg);
        let mut targets = Vec::with_capacity(layout.targets.len());
        let mut target_rcs = Vec::with_capacity(layout.targets.len());
        for t in &layout.targets {
            let shadowing: Option<Vec<f64>> = (cfg.target_shadowing && cfg.shadowing_std_db > 0.0)
                .then(|| (0..m_aps).map(|_| shadow.sample(large_rng)).collect());
            targets.push(PointLinks::build(t.position, layout, &arrays, cfg.carrier_hz, shadowing.as_deref())?);
            target_rcs.push(RcsField::new(&t.position, &layout.aps, &rcs_model)?);
        }

        let cells = layout
            .regions
            .iter()
            .map(|r| {
                r.cells
                    .iter()
                    .map(|c| PointLinks::build(c.center, layout, &arrays, cfg.carrier_hz, None))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            arrays,
            large_scale,
            n_aps: m_aps,
            n_ues: layout.ues.len(),
            targets,
            target_rcs,
            cells,
            rcs_model,
            carrier_hz: cfg.carrier_hz,
            rician_k: cfg.rician_k_linear(),
        })
    }

    pub fn ue_gain(&self, k: usize, m: usize) -> f64 {
        self.large_scale[k * self.n_aps + m]
    }
}

/// Reflectivities of one target over the current receive/transmit AP sets.
#[derive(Debug, Clone)]
pub struct TargetEchoes {
    pub rcs: RcsDraw,
}

/// One coherence-interval draw of all small-scale quantities.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub n_aps: usize,
    /// UE-AP channels, index `k * M + m`.
    pub h: Vec<CVec>,
    pub targets: Vec<TargetEchoes>,
}

impl ChannelRealization {
    /// Draws all UE-AP vectors (from `ue_rng`) and target reflectivities for the
    /// `rx_aps x tx_aps` pairs (from `rcs_rng`). Draw counts do not depend on the AP sets.
    pub fn draw<R1: Rng + ?Sized, R2: Rng + ?Sized>(
        scene: &Scene,
        rx_aps: &[usize],
        tx_aps: &[usize],
        ue_rng: &mut R1,
        rcs_rng: &mut R2,
    ) -> Self {
        let mut h = Vec::with_capacity(scene.n_ues * scene.n_aps);
        for k in 0..scene.n_ues {
            for m in 0..scene.n_aps {
                h.push(draw_ue_ap_channel(scene.ue_gain(k, m), &scene.arrays[m], ue_rng));
            }
        }
        let targets = scene
            .target_rcs
            .iter()
            .map(|field| TargetEchoes {
                rcs: RcsDraw {
                    rx: rx_aps.to_vec(),
                    tx: tx_aps.to_vec(),
                    values: field.draw(rx_aps, tx_aps, rcs_rng),
                },
            })
            .collect();
        Self {
            n_aps: scene.n_aps,
            h,
            targets,
        }
    }

    pub fn h(&self, k: usize, m: usize) -> &CVec {
        &self.h[k * self.n_aps + m]
    }

    /// Full description of the bistatic path `tx -> target -> rx`.
    pub fn target_link(&self, scene: &Scene, target: usize, rx: usize, tx: usize) -> Option<TargetLink> {
        let alpha = self.targets[target].rcs.get(rx, tx)?;
        let links = &scene.targets[target];
        Some(TargetLink {
            alpha,
            beta: links.beta(rx, tx),
            tx_steering: links.steering[tx].clone(),
            rx_steering: links.steering[rx].clone(),
        })
    }

    /// Lazily drawn direct channel from transmit AP `tx` to receive AP `rx`.
    pub fn ap_ap_channel<R: Rng + ?Sized>(
        scene: &Scene,
        layout: &NetworkLayout,
        tx: usize,
        rx: usize,
        rng: &mut R,
    ) -> Result<CMat> {
        let (ptx, prx) = (&layout.aps[tx], &layout.aps[rx]);
        let gain = link_gain(ptx.distance(prx), LinkKind::ApApLos, scene.carrier_hz, 0.0);
        draw_ap_ap_channel(gain, &scene.arrays[tx], ptx, &scene.arrays[rx], prx, scene.rician_k, rng)
    }
}

/// Debug dump: one `index real imag` line per entry (column-major for matrices).
pub fn dump_entries<'a>(entries: impl IntoIterator<Item = &'a Complex64>) -> String {
    let mut out = String::new();
    for (i, z) in entries.into_iter().enumerate() {
        out.push_str(&format!("{i} {} {}\n", z.re, z.im));
    }
    out
}

/// Convenience: a single CN(0, 1) draw scaled to `variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Complex64 {
    cn01(rng) * variance.sqrt()
}
