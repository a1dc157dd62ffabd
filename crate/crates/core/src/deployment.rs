//! Network layouts, sensing regions, range cells and the coordinated scan schedule.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3D {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Position3D) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2)).sqrt()
    }

    pub fn horizontal_distance(&self, other: &Position3D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Unit vector pointing from `self` towards `other`, if they are distinct.
    pub fn direction_to(&self, other: &Position3D) -> Option<[f64; 3]> {
        let d = [other.x - self.x, other.y - self.y, other.z - self.z];
        let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        (n > 0.0).then(|| [d[0] / n, d[1] / n, d[2] / n])
    }
}

/// Axis-aligned horizontal rectangle, half-open `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    pub fn intersection_area(&self, other: &Rect) -> f64 {
        let w = (self.x1.min(other.x1) - self.x0.max(other.x0)).max(0.0);
        let h = (self.y1.min(other.y1) - self.y0.max(other.y0)).max(0.0);
        w * h
    }
}

/// Smallest scanned resolution element. Its center is the hypothesized target position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeCell {
    pub center: Position3D,
    /// Horizontal extent along x and y (the last row/column of a grid may be clipped).
    pub extent: (f64, f64),
    pub inspection_height: f64,
}

impl RangeCell {
    pub fn footprint(&self) -> Rect {
        Rect {
            x0: self.center.x - 0.5 * self.extent.0,
            y0: self.center.y - 0.5 * self.extent.1,
            x1: self.center.x + 0.5 * self.extent.0,
            y1: self.center.y + 0.5 * self.extent.1,
        }
    }

    pub fn contains_horizontal(&self, p: &Position3D) -> bool {
        self.footprint().contains(p.x, p.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensingRegion {
    pub index: usize,
    pub bounds: Rect,
    pub cells: Vec<RangeCell>,
}

impl SensingRegion {
    pub fn center(&self, height: f64) -> Position3D {
        let (x, y) = self.bounds.center();
        Position3D::new(x, y, height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub position: Position3D,
    pub region: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkLayout {
    pub aps: Vec<Position3D>,
    pub ues: Vec<Position3D>,
    pub targets: Vec<Target>,
    pub area_side: f64,
    pub regions: Vec<SensingRegion>,
}

impl NetworkLayout {
    /// Index of the region whose footprint holds `(x, y)`.
    pub fn region_of(&self, x: f64, y: f64) -> Option<usize> {
        self.regions.iter().position(|r| r.bounds.contains(x, y))
    }
}

/// Factor `regions` into the most nearly square `(rows, cols)` grid.
pub fn region_grid_shape(regions: usize) -> Result<(usize, usize)> {
    if regions == 0 {
        return Err(Error::config("at least one sensing region is required"));
    }
    let mut rows = (regions as f64).sqrt().floor() as usize;
    while rows > 1 && regions % rows != 0 {
        rows -= 1;
    }
    Ok((rows.max(1), regions / rows.max(1)))
}

fn grid_count(length: f64, extent: f64) -> usize {
    let ratio = length / extent;
    let nearest = ratio.round();
    if (ratio - nearest).abs() < 1e-9 {
        (nearest as usize).max(1)
    } else {
        (ratio.ceil() as usize).max(1)
    }
}

/// Tile `bounds` with cells of side `cell_extent`; the last row/column is clipped.
/// An extent at least as large as the region yields a single cell.
pub fn build_range_cell_grid(bounds: &Rect, cell_extent: f64, inspection_height: f64) -> Result<Vec<RangeCell>> {
    if !(cell_extent > 0.0 && cell_extent.is_finite()) {
        return Err(Error::config(format!("cell extent must be positive, got {cell_extent}")));
    }
    let nx = grid_count(bounds.width(), cell_extent);
    let ny = grid_count(bounds.height(), cell_extent);
    let mut cells = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        let y0 = bounds.y0 + iy as f64 * cell_extent;
        let y1 = if iy + 1 == ny { bounds.y1 } else { (y0 + cell_extent).min(bounds.y1) };
        for ix in 0..nx {
            let x0 = bounds.x0 + ix as f64 * cell_extent;
            let x1 = if ix + 1 == nx { bounds.x1 } else { (x0 + cell_extent).min(bounds.x1) };
            cells.push(RangeCell {
                center: Position3D::new(0.5 * (x0 + x1), 0.5 * (y0 + y1), inspection_height),
                extent: (x1 - x0, y1 - y0),
                inspection_height,
            });
        }
    }
    Ok(cells)
}

/// Regions tiling the square area, row-major from the origin corner.
pub fn build_regions(area_side: f64, regions: usize, cell_extent: f64, inspection_height: f64) -> Result<Vec<SensingRegion>> {
    if !(area_side > 0.0 && area_side.is_finite()) {
        return Err(Error::config(format!("area side must be positive, got {area_side}")));
    }
    let (rows, cols) = region_grid_shape(regions)?;
    let w = area_side / cols as f64;
    let h = area_side / rows as f64;
    let mut out = Vec::with_capacity(regions);
    for r in 0..rows {
        for c in 0..cols {
            let bounds = Rect {
                x0: c as f64 * w,
                y0: r as f64 * h,
                x1: if c + 1 == cols { area_side } else { (c + 1) as f64 * w },
                y1: if r + 1 == rows { area_side } else { (r + 1) as f64 * h },
            };
            out.push(SensingRegion {
                index: out.len(),
                bounds,
                cells: build_range_cell_grid(&bounds, cell_extent, inspection_height)?,
            });
        }
    }
    Ok(out)
}

/// Draw a random layout: APs and UEs uniform over the area at fixed heights,
/// targets split as evenly as possible over the regions.
pub fn generate_layout<R: Rng + ?Sized>(config: &ExperimentConfig, rng: &mut R) -> Result<NetworkLayout> {
    if config.aps == 0 || config.ues == 0 {
        return Err(Error::config("layout needs at least one AP and one UE"));
    }
    let side = config.area_side_m;
    let regions = build_regions(
        side,
        config.regions,
        config.effective_cell_extent_m(),
        config.inspection_height_m,
    )?;

    let uniform = |h: f64, rng: &mut R| Position3D::new(rng.random_range(0.0..side), rng.random_range(0.0..side), h);
    let aps: Vec<_> = (0..config.aps).map(|_| uniform(config.ap_height_m, rng)).collect();
    let ues: Vec<_> = (0..config.ues).map(|_| uniform(config.ue_height_m, rng)).collect();

    let l = regions.len();
    let mut targets = Vec::with_capacity(config.targets);
    for region in &regions {
        let count = config.targets / l + usize::from(region.index < config.targets % l);
        for _ in 0..count {
            let b = region.bounds;
            let z = if config.target_height_max_m > config.target_height_min_m {
                rng.random_range(config.target_height_min_m..=config.target_height_max_m)
            } else {
                config.target_height_min_m
            };
            targets.push(Target {
                position: Position3D::new(rng.random_range(b.x0..b.x1), rng.random_range(b.y0..b.y1), z),
                region: region.index,
            });
        }
    }

    Ok(NetworkLayout {
        aps,
        ues,
        targets,
        area_side: side,
        regions,
    })
}

/// Azimuth and elevation of `target` as seen from `array`.
///
/// Azimuth is measured in the horizontal plane from the +x axis; the array's
/// own broadside offset is applied by the steering vector.
pub fn angles_from(array: &Position3D, target: &Position3D) -> Result<(f64, f64)> {
    let dx = target.x - array.x;
    let dy = target.y - array.y;
    let dz = target.z - array.z;
    if dx == 0.0 && dy == 0.0 && dz == 0.0 {
        return Err(Error::domain("angles requested between coincident positions"));
    }
    let horizontal = dx.hypot(dy);
    Ok((dy.atan2(dx), dz.atan2(horizontal)))
}

/// Cells scanned in each epoch of one full sweep: `epochs[e][region]` is a cell index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanSchedule {
    pub epochs: Vec<Vec<usize>>,
}

impl ScanSchedule {
    pub fn sweep_len(&self) -> usize {
        self.epochs.len()
    }

    /// Cell assignment at an arbitrary epoch; the sweep repeats cyclically.
    pub fn at(&self, epoch: usize) -> &[usize] {
        &self.epochs[epoch % self.epochs.len()]
    }
}

/// Greedy max-min coordinated schedule.
///
/// Each epoch visits the regions round-robin, starting one region later than the
/// previous epoch. The first region of an epoch scans a random unscanned cell; every
/// following region scans its unscanned cell farthest (in the max-min sense) from the
/// cells already chosen for that epoch. Regions with fewer cells repeat their last cell.
pub fn build_scan_schedule<R: Rng + ?Sized>(regions: &[SensingRegion], rng: &mut R) -> ScanSchedule {
    let l = regions.len();
    let sweep = regions.iter().map(|r| r.cells.len()).max().unwrap_or(0);
    if l == 0 || sweep == 0 {
        return ScanSchedule { epochs: Vec::new() };
    }
    // Per region, the padded list of cell indices still to scan in this sweep.
    let mut pending: Vec<Vec<usize>> = regions
        .iter()
        .map(|r| {
            let n = r.cells.len();
            (0..sweep).map(|i| i.min(n - 1)).collect()
        })
        .collect();

    let mut epochs = Vec::with_capacity(sweep);
    for e in 0..sweep {
        let mut picked: Vec<Option<usize>> = vec![None; l];
        let mut chosen_centers: Vec<Position3D> = Vec::with_capacity(l);
        for step in 0..l {
            let li = (e + step) % l;
            let cand = &pending[li];
            let slot = if chosen_centers.is_empty() {
                let mut slots: Vec<usize> = (0..cand.len()).collect();
                slots.shuffle(rng);
                slots[0]
            } else {
                let mut best = 0;
                let mut best_val = f64::NEG_INFINITY;
                for (slot, &cell) in cand.iter().enumerate() {
                    let c = regions[li].cells[cell].center;
                    let d = chosen_centers.iter().map(|p| p.distance(&c)).fold(f64::INFINITY, f64::min);
                    // strict comparison keeps the lowest cell on ties
                    if d > best_val || (d == best_val && cell < cand[best]) {
                        best = slot;
                        best_val = d;
                    }
                }
                best
            };
            let cell = pending[li].swap_remove(slot);
            chosen_centers.push(regions[li].cells[cell].center);
            picked[li] = Some(cell);
        }
        epochs.push(picked.into_iter().map(|c| c.expect("every region picked")).collect());
    }
    ScanSchedule { epochs }
}

/// Plain-text snapshot: one `kind index x y z region` record per line.
pub fn export_layout(layout: &NetworkLayout) -> String {
    let mut out = String::new();
    for (i, p) in layout.aps.iter().enumerate() {
        let _ = writeln!(out, "ap {i} {} {} {} -", p.x, p.y, p.z);
    }
    for (i, p) in layout.ues.iter().enumerate() {
        let _ = writeln!(out, "ue {i} {} {} {} -", p.x, p.y, p.z);
    }
    for (i, t) in layout.targets.iter().enumerate() {
        let p = t.position;
        let _ = writeln!(out, "target {i} {} {} {} {}", p.x, p.y, p.z, t.region);
    }
    out
}

/// Inverse of [`export_layout`]; regions are rebuilt from `config`.
pub fn import_layout(text: &str, config: &ExperimentConfig) -> Result<NetworkLayout> {
    let regions = build_regions(
        config.area_side_m,
        config.regions,
        config.effective_cell_extent_m(),
        config.inspection_height_m,
    )?;
    let mut aps = Vec::new();
    let mut ues = Vec::new();
    let mut targets = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: &str| Error::Parse { line: line_no, msg: msg.to_string() };
        if f.len() != 6 {
            return Err(bad("expected 6 fields: kind index x y z region"));
        }
        let index: usize = f[1].parse().map_err(|_| bad("bad index"))?;
        let coord = |s: &str| s.parse::<f64>().map_err(|_| bad("bad coordinate"));
        let p = Position3D::new(coord(f[2])?, coord(f[3])?, coord(f[4])?);
        let list_len = match f[0] {
            "ap" => {
                aps.push(p);
                aps.len()
            }
            "ue" => {
                ues.push(p);
                ues.len()
            }
            "target" => {
                let region: usize = f[5].parse().map_err(|_| bad("bad region"))?;
                if region >= regions.len() {
                    return Err(bad("region out of range"));
                }
                targets.push(Target { position: p, region });
                targets.len()
            }
            _ => return Err(bad("unknown record kind")),
        };
        if index + 1 != list_len {
            return Err(bad("records must be listed in index order"));
        }
    }
    Ok(NetworkLayout {
        aps,
        ues,
        targets,
        area_side: config.area_side_m,
        regions,
    })
}
