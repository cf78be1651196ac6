use serde::{Deserialize, Serialize};

use super::profile::RadialProfile;
use super::sobolev::bracket;
use crate::error::{Error, Result};

/// Power-law fit |p(rho)| ~ A <rho>^{-exponent} over a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub log_amplitude: f64,
    pub window: [f64; 2],
    pub residual_rms: f64,
    pub nodes: usize,
}

pub const MIN_FIT_NODES: usize = 8;

/// Unweighted least squares of log|p| against log<rho> on the window.
pub fn fit_decay(p: &RadialProfile, window: [f64; 2]) -> Result<DecayFit> {
    let mags: Vec<f64> = p.values().iter().map(|z| z.norm()).collect();
    fit_decay_points(p.grid().nodes(), &mags, window)
}

/// [`fit_decay`] on raw (rho, |value|) pairs; non-finite magnitudes are
/// treated as masked nodes and skipped.
pub fn fit_decay_points(rho: &[f64], mags: &[f64], window: [f64; 2]) -> Result<DecayFit> {
    let [lo, hi] = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidWindow(format!("[{lo}, {hi}]")));
    }
    let slack = 1e-9 * hi;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&r, &m) in rho.iter().zip(mags) {
        if r < lo - slack || r > hi + slack || m.is_nan() {
            continue;
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidWindow(format!(
                "non-positive magnitude {m} at rho = {r}"
            )));
        }
        xs.push(bracket(r).ln());
        ys.push(m.ln());
    }
    if xs.len() < MIN_FIT_NODES {
        return Err(Error::InvalidWindow(format!(
            "window [{lo}, {hi}] holds {} nodes, need {MIN_FIT_NODES}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    Ok(DecayFit {
        exponent: -slope,
        log_amplitude: intercept,
        window,
        residual_rms: (rss / n).sqrt(),
        nodes: xs.len(),
    })
}

/// Exponents fitted separately on the lower and upper halves (in log rho)
/// of the window.
pub fn window_sensitivity(rho: &[f64], mags: &[f64], window: [f64; 2]) -> Result<(f64, f64)> {
    let mid = (window[0] * window[1]).sqrt();
    let low = fit_decay_points(rho, mags, [window[0], mid])?;
    let high = fit_decay_points(rho, mags, [mid, window[1]])?;
    Ok((low.exponent, high.exponent))
}
