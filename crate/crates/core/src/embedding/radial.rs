use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialParams {
    /// Number of equal angular sectors.
    pub sectors: usize,
    /// Peaks below this fraction of the sector's highest density are dropped.
    pub min_density_frac: f64,
    /// Radius grid resolution for the per-sector KDE.
    pub grid_points: usize,
    pub bandwidth_floor: f64,
}

impl Default for RadialParams {
    fn default() -> Self {
        Self {
            sectors: 64,
            min_density_frac: 0.1,
            grid_points: 128,
            bandwidth_floor: 1e-6,
        }
    }
}

impl RadialParams {
    pub fn validate(&self) -> Result<()> {
        if self.sectors < 4 {
            return Err(Error::InvalidParameter(format!(
                "sector count must be >= 4, got {}",
                self.sectors
            )));
        }
        if !(0.0..=1.0).contains(&self.min_density_frac) {
            return Err(Error::InvalidParameter(format!(
                "min_density_frac must lie in [0, 1], got {}",
                self.min_density_frac
            )));
        }
        if self.grid_points < 2 {
            return Err(Error::InvalidParameter("KDE grid needs >= 2 points".into()));
        }
        if self.bandwidth_floor <= 0.0 || !self.bandwidth_floor.is_finite() {
            return Err(Error::InvalidParameter(
                "bandwidth floor must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub angle_bin: usize,
    pub radius: f64,
    /// KDE value at the peak.
    pub density: f64,
}

/// Scott's rule `1.06 * sigma * m^(-1/5)` with sample standard deviation,
/// never below `floor`.
pub fn scott_bandwidth(values: &[f64], floor: f64) -> f64 {
    let m = values.len();
    if m < 2 {
        return floor;
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1) as f64;
    (1.06 * var.sqrt() * (m as f64).powf(-0.2)).max(floor)
}

/// Gaussian kernel density of `samples` evaluated at each point of `grid`.
pub fn gaussian_kde(samples: &[f64], bandwidth: f64, grid: &[f64]) -> Vec<f64> {
    let norm = 1.0 / (samples.len() as f64 * bandwidth * (2.0 * PI).sqrt());
    grid.iter()
        .map(|&g| {
            samples
                .iter()
                .map(|&s| {
                    let u = (g - s) / bandwidth;
                    (-0.5 * u * u).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect()
}

pub(crate) fn sector_of(x: f64, y: f64, sectors: usize) -> usize {
    let mut theta = y.atan2(x);
    if theta < 0.0 {
        theta += TAU;
    }
    ((theta / (TAU / sectors as f64)) as usize).min(sectors - 1)
}

fn sector_center(bin: usize, sectors: usize) -> f64 {
    (bin as f64 + 0.5) * TAU / sectors as f64
}

/// Indices of strict local maxima; the endpoints compare against their single
/// neighbour.
fn strict_maxima(d: &[f64]) -> Vec<usize> {
    let n = d.len();
    (0..n)
        .filter(|&i| {
            let left = i == 0 || d[i] > d[i - 1];
            let right = i + 1 == n || d[i] > d[i + 1];
            left && right
        })
        .collect()
}

/// Radial scan: split the plane into angular sectors around the origin and
/// place a node at every significant density peak along the radius of each
/// non-empty sector. Node ids follow (sector, radius) order.
pub fn radial_nodes(points: &[(f64, f64)], params: &RadialParams) -> Result<Vec<Node>> {
    params.validate()?;
    if points.is_empty() {
        return Err(Error::InvalidParameter("no points to scan".into()));
    }
    if points.iter().all(|&(x, y)| x == 0.0 && y == 0.0) {
        return Err(Error::DegenerateProjection);
    }

    let mut radii: Vec<Vec<f64>> = vec![Vec::new(); params.sectors];
    for &(x, y) in points {
        radii[sector_of(x, y, params.sectors)].push(x.hypot(y));
    }

    let mut nodes = Vec::new();
    for (bin, rs) in radii.iter().enumerate() {
        if rs.is_empty() {
            continue;
        }
        let r_max = rs.iter().copied().fold(0.0, f64::max);
        let step = r_max / (params.grid_points - 1) as f64;
        let grid: Vec<f64> = (0..params.grid_points).map(|i| i as f64 * step).collect();
        let h = scott_bandwidth(rs, params.bandwidth_floor);
        let density = gaussian_kde(rs, h, &grid);
        let peak = density.iter().copied().fold(0.0, f64::max);

        let mut picked: Vec<usize> = strict_maxima(&density)
            .into_iter()
            .filter(|&i| density[i] > 0.0 && density[i] >= params.min_density_frac * peak)
            .collect();
        if picked.is_empty() {
            // flat or underflowed profile: keep the first global maximum
            let first = density.iter().position(|&d| d == peak).unwrap_or_default();
            picked.push(first);
        }

        let theta = sector_center(bin, params.sectors);
        for i in picked {
            let radius = grid[i];
            nodes.push(Node {
                id: nodes.len(),
                x: radius * theta.cos(),
                y: radius * theta.sin(),
                angle_bin: bin,
                radius,
                density: density[i].max(f64::MIN_POSITIVE),
            });
        }
    }
    Ok(nodes)
}
