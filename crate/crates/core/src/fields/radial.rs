use super::grid::{norm3, SpectralField};
use super::profile::{GridSpec1D, RadialProfile};
use crate::error::{Error, Result};

/// Shell average of |F| over bins of width equal to the dual spacing.
///
/// Bin k collects frequencies with round(|xi| / dxi) = k. Each output node
/// sits at the mean radius of its members; empty bins are dropped.
pub fn radial_average(spec: &SpectralField) -> Result<RadialProfile> {
    let grid = spec.grid();
    let d = grid.dual_spacing();
    let max_bin = (grid.nyquist() * (grid.dim() as f64).sqrt() / d).ceil() as usize + 1;
    let mut sum_val = vec![0.0; max_bin + 1];
    let mut sum_rad = vec![0.0; max_bin + 1];
    let mut count = vec![0usize; max_bin + 1];
    for (i, z) in spec.samples().iter().enumerate() {
        let r = norm3(&grid.frequency(i));
        let k = (r / d).round() as usize;
        sum_val[k] += z.norm();
        sum_rad[k] += r;
        count[k] += 1;
    }
    let (mut nodes, mut values) = (Vec::new(), Vec::new());
    for k in 0..=max_bin {
        if count[k] > 0 {
            nodes.push(sum_rad[k] / count[k] as f64);
            values.push(sum_val[k] / count[k] as f64);
        }
    }
    if nodes.len() < 2 {
        return Err(Error::InvalidInput("spectrum too small for shell averaging".into()));
    }
    RadialProfile::sampled_real(GridSpec1D::irregular(nodes)?, &values)
}
