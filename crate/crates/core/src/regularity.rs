//! Regularity thresholds as functions of (n, beta), and experiments that
//! measure Fourier decay exponents against them.
//!
//! A radial spectrum decaying like |eta|^{-e} lies in W^{alpha,2}_loc exactly
//! for alpha < e - n/2, so exponent statements and Sobolev statements convert
//! into one another through n/2.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::born::{q2_hat, BornResult};
use crate::dispersion::{s_r, RadialQuad};
use crate::error::{Error, Result};
use crate::fields::{fit_decay_points, DecayFit, GridSpec1D};
use crate::potentials::bessel_spectrum;
use crate::pv::PVScheme;

/// Fitted exponents above this are read as super-polynomial decay.
pub const SUPERPOLYNOMIAL_EXPONENT: f64 = 20.0;

pub const OPEN_GAP_LABEL: &str = "open-gap datapoint";

/// Thresholds for one (n, beta). Entries are None where the corresponding
/// statement makes no claim.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundTable {
    pub n: usize,
    pub beta: f64,
    pub m_value: f64,
    /// Largest alpha q - q_B can have for every admissible q.
    pub teo_main1_alpha_max: Option<f64>,
    /// q - q_B is in W^{alpha,2} (modulo smooth) for alpha below this.
    pub teo_main2_alpha_sup: Option<f64>,
    /// Largest alpha Q_2(q) can have for every admissible q.
    pub teo_q2count_alpha_max: Option<f64>,
    /// (j, sup alpha) for the j-fold dispersion estimate.
    pub teo_qj_alpha_sup: Vec<(usize, Option<f64>)>,
    /// (j, alpha_j) from the absolute convergence of the Born tail.
    pub alpha_j: Vec<(usize, Option<f64>)>,
}

pub fn m_value(n: usize) -> f64 {
    let n = n as f64;
    (n - 4.0) / 2.0 + 2.0 / (n + 1.0)
}

fn check_params(n: usize, beta: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("dimension n = {n} must be >= 2")));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidInput(format!("beta = {beta} must be finite and >= 0")));
    }
    Ok(())
}

fn main1(n: f64, beta: f64, m: f64) -> Option<f64> {
    if beta >= (n - 2.0) / 2.0 {
        Some(beta + 1.0)
    } else if beta >= m {
        Some(2.0 * beta - (n - 4.0) / 2.0)
    } else {
        None
    }
}

fn main2(n: f64, beta: f64) -> Option<f64> {
    qj_sup(n, beta, 2)
}

fn q2count(n: f64, beta: f64) -> Option<f64> {
    if beta <= 0.0 {
        None
    } else if beta < (n - 2.0) / 2.0 {
        Some(2.0 * beta - (n - 4.0) / 2.0)
    } else {
        Some(beta + 1.0)
    }
}

fn qj_sup(n: f64, beta: f64, j: usize) -> Option<f64> {
    let j1 = (j - 1) as f64;
    if beta >= (n - 1.0) / 2.0 {
        Some(beta + j1)
    } else if beta > (n - 3.0) / 2.0 {
        Some(beta + j1 * (beta - (n - 3.0) / 2.0))
    } else {
        None
    }
}

/// Convergence exponent alpha_j; only meaningful for beta >= max(0, m).
pub fn alpha_j(n: usize, beta: f64, j: usize) -> Option<f64> {
    if j < 2 || beta < m_value(n).max(0.0) {
        return None;
    }
    let (nf, jf) = (n as f64, j as f64);
    Some(beta + (jf - 1.0) - nf / 2.0 - (nf - 1.0) / 2.0 * (jf - 2.0) * (0.5 - beta / nf).max(0.0))
}

/// Thresholds for j = 2..=j_max.
pub fn bound_table(n: usize, beta: f64, j_max: usize) -> Result<BoundTable> {
    check_params(n, beta)?;
    if j_max < 2 {
        return Err(Error::InvalidInput(format!("j_max = {j_max} must be >= 2")));
    }
    let nf = n as f64;
    let m = m_value(n);
    Ok(BoundTable {
        n,
        beta,
        m_value: m,
        teo_main1_alpha_max: main1(nf, beta, m),
        teo_main2_alpha_sup: main2(nf, beta),
        teo_q2count_alpha_max: q2count(nf, beta),
        teo_qj_alpha_sup: (2..=j_max).map(|j| (j, qj_sup(nf, beta, j))).collect(),
        alpha_j: (2..=j_max).map(|j| (j, alpha_j(n, beta, j))).collect(),
    })
}

/// max(m, 0) <= beta < (n-1)/2: the upper and lower statements leave up to
/// half a derivative undecided.
pub fn in_open_gap(n: usize, beta: f64) -> bool {
    beta >= m_value(n).max(0.0) && beta < (n as f64 - 1.0) / 2.0
}

/// Decay exponent below which S(q_beta)(eta) cannot fall:
/// min(beta + n/2 + 1, 2 beta + 2).
pub fn counterexample_prediction(n: usize, beta: f64) -> f64 {
    (beta + n as f64 / 2.0 + 1.0).min(2.0 * beta + 2.0)
}

/// One measured quantity against its prediction. `pass` is None when the
/// entry is informational.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportEntry {
    pub n: usize,
    pub beta: f64,
    pub j: usize,
    pub quantity: String,
    pub fitted: Option<f64>,
    pub predicted: Option<f64>,
    pub window: [f64; 2],
    pub residual: Option<f64>,
    pub pass: Option<bool>,
    /// Inequality the pass flag encodes, with its numbers.
    pub criterion: String,
    pub label: Option<String>,
}

/// Report of one experiment run. Wall time is deliberately absent so serial
/// reruns serialize identically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: serde_json::Value,
    pub bounds: BoundTable,
    pub entries: Vec<ReportEntry>,
    pub failures: Vec<String>,
}

impl ExperimentReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass != Some(false))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleSettings {
    pub eta_grid: GridSpec1D,
    pub window: [f64; 2],
    pub pv: PVScheme,
    pub radial: RadialQuad,
    /// Also evaluate Q^_2 at every node.
    pub with_q2: bool,
    /// Allowed excess of the fitted exponent over the prediction.
    pub tol_upper: f64,
    /// Sharpness margin p - e above which the entry is flagged.
    pub tol_lower: f64,
    pub parallel: bool,
}

impl CounterexampleSettings {
    pub fn new(eta_grid: GridSpec1D) -> Self {
        let window = [eta_grid.rho_min().max(8.0), eta_grid.rho_max()];
        Self {
            eta_grid,
            window,
            pv: PVScheme::default(),
            radial: RadialQuad::default(),
            with_q2: true,
            tol_upper: 0.1,
            tol_lower: 0.3,
            parallel: true,
        }
    }
}

impl Default for CounterexampleSettings {
    fn default() -> Self {
        Self::new(GridSpec1D::logarithmic(8.0, 512.0, 48).expect("static grid"))
    }
}

/// Per-node values of the counterexample sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleRow {
    pub eta_abs: f64,
    pub s1: f64,
    pub q2: Option<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleResult {
    pub n: usize,
    pub beta: f64,
    pub rows: Vec<CounterexampleRow>,
    pub fit: DecayFit,
    pub predicted: f64,
    pub entry: ReportEntry,
    pub failures: Vec<String>,
}

impl CounterexampleResult {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["eta_abs", "s1", "re_q2", "im_q2"])?;
        for r in &self.rows {
            let (re, im) = r.q2.map_or((f64::NAN, f64::NAN), |z| (z.re, z.im));
            wr.write_record([r.eta_abs, r.s1, re, im].iter().map(|v| format!("{v:e}")))?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Sweeps s_1(q_beta)(eta) for q^_beta = <rho>^{-n/2-beta}, fits its decay
/// and compares with min(beta + n/2 + 1, 2 beta + 2).
pub fn counterexample_experiment(n: usize, beta: f64, settings: &CounterexampleSettings) -> Result<CounterexampleResult> {
    check_params(n, beta)?;
    if !(2..=3).contains(&n) {
        return Err(Error::Unsupported(format!("counterexample sweep in dimension {n}")));
    }
    settings.pv.validate()?;
    let q = bessel_spectrum(beta, n)?;
    let node = |&eta: &f64| -> (CounterexampleRow, Option<String>) {
        let s1 = s_r(&q, n, eta, 1.0, settings.radial);
        let q2 = settings
            .with_q2
            .then(|| q2_hat(&q, n, eta, &settings.pv, settings.radial));
        let mut failure = None;
        let s1 = s1.map(|z| z.re).unwrap_or_else(|e| {
            failure = Some(format!("s_1 at |eta| = {eta}: {e}"));
            f64::NAN
        });
        let q2 = match q2 {
            Some(Ok(o)) => Some(o.value),
            Some(Err(e)) => {
                failure.get_or_insert(format!("Q2 at |eta| = {eta}: {e}"));
                Some(Complex64::new(f64::NAN, f64::NAN))
            }
            None => None,
        };
        (CounterexampleRow { eta_abs: eta, s1, q2 }, failure)
    };
    let per_node: Vec<_> = if settings.parallel {
        settings.eta_grid.nodes().par_iter().map(node).collect()
    } else {
        settings.eta_grid.nodes().iter().map(node).collect()
    };
    let (rows, failures): (Vec<_>, Vec<_>) = per_node.into_iter().unzip();
    let failures: Vec<String> = failures.into_iter().flatten().collect();

    let rho: Vec<f64> = rows.iter().map(|r| r.eta_abs).collect();
    let mags: Vec<f64> = rows.iter().map(|r| r.s1.abs()).collect();
    let fit = fit_decay_points(&rho, &mags, settings.window)?;
    let p = counterexample_prediction(n, beta);
    let e = fit.exponent;
    let pass = e <= p + settings.tol_upper && p - e <= settings.tol_lower;
    let entry = ReportEntry {
        n,
        beta,
        j: 2,
        quantity: "s1_decay_exponent".into(),
        fitted: Some(e),
        predicted: Some(p),
        window: settings.window,
        residual: Some(fit.residual_rms),
        pass: Some(pass),
        criterion: format!(
            "e = {e:.4} <= p + {} = {:.4}; margin p - e = {:.4} <= {}",
            settings.tol_upper,
            p + settings.tol_upper,
            p - e,
            settings.tol_lower
        ),
        label: None,
    };
    Ok(CounterexampleResult {
        n,
        beta,
        rows,
        fit,
        predicted: p,
        entry,
        failures,
    })
}

/// Im Q^_2(q_beta) = pi S(q_beta) for real q^; its decay exponent e caps the
/// Sobolev order of Q_2(q_beta) at e - n/2, which must not exceed the
/// Q_2 ceiling.
pub fn q2count_check(result: &CounterexampleResult, tol: f64) -> Result<ReportEntry> {
    let (n, beta) = (result.n, result.beta);
    let ceiling = q2count(n as f64, beta);
    let rho: Vec<f64> = result.rows.iter().map(|r| r.eta_abs).collect();
    let im: Vec<f64> = result
        .rows
        .iter()
        .map(|r| r.q2.map_or(f64::NAN, |z| z.im.abs()))
        .collect();
    if im.iter().all(|v| v.is_nan()) {
        return Err(Error::InvalidInput("counterexample run carries no Q2 values".into()));
    }
    let fit = fit_decay_points(&rho, &im, result.fit.window)?;
    let identity_gap = (fit.exponent - result.fit.exponent).abs();
    let order = fit.exponent - n as f64 / 2.0;
    let (pass, criterion) = match ceiling {
        Some(c) => (
            Some(order <= c + tol && identity_gap <= 1e-9),
            format!(
                "e(Im Q2) - n/2 = {order:.4} <= ceiling + {tol} = {:.4}; |e(Im Q2) - e(S)| = {identity_gap:.1e} <= 1e-9",
                c + tol
            ),
        ),
        None => (None, "no ceiling at beta = 0".into()),
    };
    Ok(ReportEntry {
        n,
        beta,
        j: 2,
        quantity: "im_q2_sobolev_order".into(),
        fitted: Some(order),
        predicted: ceiling,
        window: fit.window,
        residual: Some(fit.residual_rms),
        pass,
        criterion,
        label: in_open_gap(n, beta).then(|| OPEN_GAP_LABEL.to_string()),
    })
}

/// Least gain accepted when the regularity bound allows `predicted`.
pub fn required_gain(predicted: f64) -> f64 {
    (0.5 * predicted).min(predicted - 0.3)
}

/// Decay-exponent gain of |chi (q^ - q^_B)| over |chi q^| on `window`,
/// against the gain the regularity bound guarantees.
pub fn smoothing_check(born: &BornResult, n: usize, beta: f64, window: [f64; 2]) -> Result<ReportEntry> {
    check_params(n, beta)?;
    let mask = born.fit_mask();
    let rho = born.eta_grid.nodes();
    let masked = |v: &[Complex64]| -> Vec<f64> {
        v.iter()
            .zip(&mask)
            .map(|(z, &ok)| if ok { z.norm() } else { f64::NAN })
            .collect()
    };
    let predicted = main2(n as f64, beta).map(|a| a - beta);
    let label = in_open_gap(n, beta).then(|| OPEN_GAP_LABEL.to_string());
    let q_mags = masked(&born.qhat);
    let res_mags = masked(&born.residual_hat);
    let fit_q = fit_decay_points(rho, &q_mags, window);
    let fit_r = fit_decay_points(rho, &res_mags, window);
    let superpoly = |f: &Result<DecayFit>| match f {
        Ok(f) => f.exponent > SUPERPOLYNOMIAL_EXPONENT,
        // magnitudes that underflow to zero inside the window
        Err(Error::InvalidWindow(msg)) => msg.contains("non-positive magnitude"),
        Err(_) => false,
    };
    if superpoly(&fit_q) && superpoly(&fit_r) {
        return Ok(ReportEntry {
            n,
            beta,
            j: born.order,
            quantity: "residual_gain".into(),
            fitted: None,
            predicted,
            window,
            residual: None,
            pass: Some(true),
            criterion: format!("both spectra decay faster than <eta>^-{SUPERPOLYNOMIAL_EXPONENT} on the window"),
            label: Some("super-polynomial decay".into()),
        });
    }
    let (fit_q, fit_r) = (fit_q?, fit_r?);
    let gain = fit_r.exponent - fit_q.exponent;
    let residual = Some(fit_q.residual_rms.max(fit_r.residual_rms));
    let (pass, criterion) = match predicted {
        Some(p) => {
            let need = required_gain(p);
            (
                Some(gain >= need),
                format!("gain {gain:.4} >= {need:.4} (guaranteed {p:.4})"),
            )
        }
        None => (None, "no guaranteed gain at this beta".into()),
    };
    Ok(ReportEntry {
        n,
        beta,
        j: born.order,
        quantity: "residual_gain".into(),
        fitted: Some(gain),
        predicted,
        window,
        residual,
        pass,
        criterion,
        label,
    })
}
