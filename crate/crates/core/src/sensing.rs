//! Receive-AP observables, detection dictionaries, the GLRT statistic and thresholds.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::channel::{ChannelRealization, PointLinks, Scene};
use crate::error::{Error, Result};
use crate::linalg::{cn01, CMat, CVec};
use crate::stats::{inverse_gamma_ur, quantile};

/// Singular values below this fraction of the largest are dropped from the basis.
pub const RANK_TOL: f64 = 1e-10;

/// Inputs shared by every receive AP of one snapshot.
#[derive(Debug, Clone, Copy)]
pub struct EchoScene<'a> {
    pub scene: &'a Scene,
    pub channels: &'a ChannelRealization,
    /// Transmitted vector of every AP (zero for silent APs), indexed by AP.
    pub signals: &'a [CVec],
    /// Which targets reflect, indexed like `scene.targets`.
    pub present: &'a [bool],
}

/// Signal seen at receive AP `rx`: echoes of every present target through every
/// transmit AP, plus `direct_scale` times the direct AP-AP terms, plus `noise`.
/// `direct_scale = 0` is perfect direct-path subtraction.
pub fn simulate_rx_observable(
    echo: &EchoScene<'_>,
    rx: usize,
    direct: &[(usize, CMat)],
    direct_scale: f64,
    noise: &CVec,
) -> Result<CVec> {
    let n = echo.scene.arrays[rx].n_antennas;
    if noise.len() != n {
        return Err(Error::domain("noise length differs from the array size"));
    }
    let mut y = noise.clone();
    for (t, links) in echo.scene.targets.iter().enumerate() {
        if !echo.present.get(t).copied().unwrap_or(false) {
            continue;
        }
        let rcs = &echo.channels.targets[t].rcs;
        let Some(i) = rcs.rx.iter().position(|&m| m == rx) else {
            return Err(Error::domain(format!("AP {rx} has no reflectivity draw")));
        };
        let mut coeff = Complex64::new(0.0, 0.0);
        for (j, &tx) in rcs.tx.iter().enumerate() {
            let illumination = links.steering[tx].dotc(&echo.signals[tx]);
            coeff += rcs.values[(i, j)] * links.beta(rx, tx).sqrt() * illumination;
        }
        y.axpy(coeff, &links.steering[rx], Complex64::new(1.0, 0.0));
    }
    if direct_scale != 0.0 {
        for (tx, g) in direct {
            y += g * &echo.signals[*tx] * Complex64::from(direct_scale);
        }
    }
    Ok(y)
}

/// Expected echo subspace at one receive AP for one range cell.
#[derive(Debug, Clone)]
pub struct Dictionary {
    pub rx_ap: usize,
    /// One column per transmit AP of the cluster.
    pub columns: CMat,
    /// Orthonormal basis of the column space, `N x rank`.
    pub basis: CMat,
    pub singular_values: Vec<f64>,
    /// Matching right singular vectors, `columns x rank`.
    right: CMat,
}

impl Dictionary {
    /// Thin SVD with relative truncation; all-zero columns give an empty basis.
    pub fn from_columns(rx_ap: usize, columns: CMat) -> Result<Self> {
        let (n, k) = columns.shape();
        if k == 0 {
            return Err(Error::domain("dictionary needs at least one column"));
        }
        let svd = columns.clone().svd(true, true);
        let u = svd.u.ok_or_else(|| Error::Internal("SVD did not return U".into()))?;
        let v_t = svd.v_t.ok_or_else(|| Error::Internal("SVD did not return V".into()))?;
        let max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
        let keep: Vec<usize> = if max > 0.0 && max.is_finite() {
            (0..svd.singular_values.len())
                .filter(|&i| svd.singular_values[i] > RANK_TOL * max)
                .collect()
        } else {
            Vec::new()
        };
        let basis = CMat::from_fn(n, keep.len(), |r, c| u[(r, keep[c])]);
        let right = CMat::from_fn(k, keep.len(), |r, c| v_t[(keep[c], r)].conj());
        Ok(Self {
            rx_ap,
            columns,
            basis,
            singular_values: keep.iter().map(|&i| svd.singular_values[i]).collect(),
            right,
        })
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn n_antennas(&self) -> usize {
        self.columns.nrows()
    }

    /// `||U^H y||^2`.
    pub fn projected_energy(&self, y: &CVec) -> Result<f64> {
        if y.len() != self.n_antennas() {
            return Err(Error::domain(format!(
                "observable has length {}, dictionary expects {}",
                y.len(),
                self.n_antennas()
            )));
        }
        Ok((self.basis.adjoint() * y).norm_squared())
    }
}

/// Columns `sqrt(beta_{m,m'}) a_m(p) (a_{m'}(p)^H s_{m'})` with every angle and gain
/// taken at the cell center, one per transmit AP.
pub fn build_dictionary(cell: &PointLinks, rx: usize, tx_aps: &[usize], signals: &[CVec]) -> Result<Dictionary> {
    if tx_aps.is_empty() {
        return Err(Error::domain("sensing cluster has no transmit AP"));
    }
    let a_rx = &cell.steering[rx];
    let mut columns = CMat::zeros(a_rx.len(), tx_aps.len());
    for (j, &tx) in tx_aps.iter().enumerate() {
        let c = cell.steering[tx].dotc(&signals[tx]) * cell.beta(rx, tx).sqrt();
        columns.set_column(j, &(a_rx * c));
    }
    Dictionary::from_columns(rx, columns)
}

/// `sum_m ||U_m^H y_m||^2` over the receive APs of a cluster.
pub fn glrt_statistic(dicts: &[&Dictionary], observables: &[&CVec]) -> Result<f64> {
    if dicts.len() != observables.len() {
        return Err(Error::domain(format!(
            "{} dictionaries but {} observables",
            dicts.len(),
            observables.len()
        )));
    }
    dicts.iter().zip(observables).map(|(d, y)| d.projected_energy(y)).sum()
}

/// Least-squares reflectivity estimate `D^+ y` (minimum norm when `D` is rank deficient).
pub fn ml_alpha_estimate(dict: &Dictionary, y: &CVec) -> Result<CVec> {
    if y.len() != dict.n_antennas() {
        return Err(Error::domain("observable length differs from the dictionary"));
    }
    let mut coords = dict.basis.adjoint() * y;
    for (c, s) in coords.iter_mut().zip(&dict.singular_values) {
        *c /= *s;
    }
    Ok(&dict.right * coords)
}

/// Threshold with `P(stat > t) = pfa` when the statistic is Gamma(`rank`, `noise_var`),
/// the null law of `rank` projected complex Gaussian noise dimensions.
pub fn calibrate_threshold(rank: usize, noise_var: f64, pfa: f64) -> Result<f64> {
    if rank == 0 {
        return Err(Error::domain("threshold needs a positive total rank"));
    }
    if !(noise_var > 0.0) {
        return Err(Error::domain("noise variance must be positive"));
    }
    Ok(noise_var * inverse_gamma_ur(rank as f64, pfa)?)
}

/// Empirical `(1 - pfa)` quantile of `trials` simulated null statistics.
pub fn calibrate_threshold_mc<R: Rng + ?Sized>(rank: usize, noise_var: f64, pfa: f64, trials: usize, rng: &mut R) -> Result<f64> {
    if rank == 0 || trials == 0 {
        return Err(Error::domain("Monte Carlo threshold needs positive rank and trials"));
    }
    if !(pfa > 0.0 && pfa < 1.0) {
        return Err(Error::domain(format!("false-alarm target must lie in (0, 1), got {pfa}")));
    }
    let mut stats: Vec<f64> = (0..trials)
        .map(|_| (0..rank).map(|_| cn01(rng).norm_sqr()).sum::<f64>() * noise_var)
        .collect();
    quantile(&mut stats, 1.0 - pfa).ok_or_else(|| Error::Internal("empty quantile".into()))
}

/// `sum_m trace(D_m^H D_m R_m) / (|rx| N noise_var)`.
pub fn sensing_snr(dicts: &[&Dictionary], covariances: &[&DMatrix<f64>], noise_var: f64) -> Result<f64> {
    let num = echo_energy(dicts, covariances)?;
    if dicts.is_empty() {
        return Ok(0.0);
    }
    let n = dicts[0].n_antennas() as f64;
    Ok(num / (dicts.len() as f64 * n * noise_var))
}

/// Same numerator over the projected noise energy `sum_m rank_m * noise_var`.
pub fn sensing_snr_thin(dicts: &[&Dictionary], covariances: &[&DMatrix<f64>], noise_var: f64) -> Result<f64> {
    let num = echo_energy(dicts, covariances)?;
    let rank: usize = dicts.iter().map(|d| d.rank()).sum();
    if rank == 0 {
        return Ok(0.0);
    }
    Ok(num / (rank as f64 * noise_var))
}

fn echo_energy(dicts: &[&Dictionary], covariances: &[&DMatrix<f64>]) -> Result<f64> {
    if dicts.len() != covariances.len() {
        return Err(Error::domain("one covariance per dictionary required"));
    }
    let mut total = 0.0;
    for (d, r) in dicts.iter().zip(covariances) {
        let k = d.columns.ncols();
        if r.shape() != (k, k) {
            return Err(Error::domain("covariance size differs from the dictionary width"));
        }
        let gram = d.columns.adjoint() * &d.columns;
        let mut tr = 0.0;
        for i in 0..k {
            for j in 0..k {
                tr += (gram[(i, j)] * r[(j, i)]).re;
            }
        }
        total += tr;
    }
    Ok(total)
}

pub fn detect(statistic: f64, threshold: f64) -> bool {
    statistic > threshold
}

/// Result of inspecting one range cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionOutcome {
    pub region: usize,
    pub cell: usize,
    pub statistic: f64,
    pub threshold: f64,
    pub decision: bool,
    /// Reflectivity estimates per receive AP (AP index, estimate).
    pub alpha_hat: Vec<(usize, CVec)>,
    pub sensing_snr_db: f64,
    pub truth: bool,
}
