//! Multiple-dispersion terms Q^_2, Q^_3, the high-frequency cutoff and the
//! truncated Born approximation
//!
//!   chi q^_B = chi q^ + sum_{j=2}^{J} chi Q^_j,
//!
//! evaluated on a grid of |eta| for radial potentials.

use num_complex::Complex64;
use rayon::prelude::*;
use std::io::{Read, Write};

use crate::dispersion::{bilinear_s_r, s3_r, s_r, RadialQuad, S3Quad};
use crate::error::{Error, Result};
use crate::fields::{GridSpec1D, RadialProfile};
use crate::pv::{apply_dispersion_pv, apply_dispersion_pv_fast, DispersionFamily, Family, PVScheme, PvOutcome};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Shape of the ramp between the two plateaus of chi.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    /// Quintic smoothstep 6t^5 - 15t^4 + 10t^3, C^2 at both joints.
    Smoothstep2,
}

/// chi vanishes below `c0` and equals 1 above `2 c0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CutoffSpec {
    pub c0: f64,
    pub transition: Transition,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self {
            c0: 4.0,
            transition: Transition::Smoothstep2,
        }
    }
}

impl CutoffSpec {
    pub fn new(c0: f64) -> Result<Self> {
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::InvalidInput(format!("cutoff c0 = {c0} must be positive")));
        }
        Ok(Self {
            c0,
            transition: Transition::Smoothstep2,
        })
    }
}

pub fn cutoff_chi(spec: &CutoffSpec, xi_abs: f64) -> f64 {
    let t = ((xi_abs - spec.c0) / spec.c0).clamp(0.0, 1.0);
    match spec.transition {
        Transition::Smoothstep2 => t * t * t * (t * (6.0 * t - 15.0) + 10.0),
    }
}

/// Q^_2(q)(eta) = (i pi d + P) S_r(q)(eta).
pub fn q2_hat(qhat: &RadialProfile, dim: usize, eta_abs: f64, scheme: &PVScheme, quad: RadialQuad) -> Result<PvOutcome> {
    let family = DispersionFamily {
        qhat,
        dim,
        eta_abs,
        quad,
    };
    apply_dispersion_pv(&family, scheme)
}

/// Settings for the iterated principal value behind Q^_3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Q3Config {
    /// Scheme of the inner transform in r1, applied once per outer node.
    pub inner: PVScheme,
    pub outer: PVScheme,
    pub s3: S3Quad,
    /// Refuse runs whose estimated profile evaluations exceed this.
    pub budget: f64,
    /// n = 3 is costly and must be asked for.
    pub allow_3d: bool,
}

impl Default for Q3Config {
    fn default() -> Self {
        let pv = PVScheme {
            delta: 0.5,
            panel_order: 8,
            r_max: 8.0,
            tail_tol: 1e-4,
            panel_width: 1.0,
            near_levels: 6,
            ..PVScheme::default()
        };
        Self {
            inner: pv,
            outer: pv,
            s3: S3Quad::default_for(2),
            budget: 1e9,
            allow_3d: false,
        }
    }
}

impl Q3Config {
    /// Same configuration with both PV schemes refined.
    pub fn refined(&self) -> Self {
        Self {
            inner: self.inner.refined(),
            outer: self.outer.refined(),
            ..*self
        }
    }

    /// Estimated profile evaluations for one Q^_3 value. The extra 8 per
    /// scheme covers the tail probes and the smoothness stencil.
    pub fn estimated_cost(&self, dim: usize) -> f64 {
        let inner = (self.inner.evaluation_count() + 8) as f64;
        let outer = (self.outer.evaluation_count() + 8) as f64;
        inner * outer * self.s3.cost(dim) as f64
    }
}

/// r2 -> (i pi d_1 + P_1) S_{3,(., r2)}.
struct InnerTransform<'a> {
    qhat: &'a RadialProfile,
    dim: usize,
    eta_abs: f64,
    cfg: &'a Q3Config,
}

struct S3Slice<'a> {
    qhat: &'a RadialProfile,
    dim: usize,
    eta_abs: f64,
    r2: f64,
    s3: S3Quad,
}

impl Family for S3Slice<'_> {
    fn eval(&self, r1: f64) -> Result<Complex64> {
        if r1 <= 0.0 {
            return Ok(ZERO);
        }
        s3_r(self.qhat, self.dim, self.eta_abs, r1, self.r2, self.s3)
    }
}

impl Family for InnerTransform<'_> {
    fn eval(&self, r2: f64) -> Result<Complex64> {
        if r2 <= 0.0 {
            return Ok(ZERO);
        }
        let slice = S3Slice {
            qhat: self.qhat,
            dim: self.dim,
            eta_abs: self.eta_abs,
            r2,
            s3: self.cfg.s3,
        };
        // The slice concentrates near r1 = r2, so the inner range follows r2.
        let mut scheme = self.cfg.inner;
        scheme.r_max = scheme.r_max.max(2.0 * r2);
        Ok(apply_dispersion_pv_fast(&slice, &scheme)?.value)
    }
}

/// Q^_3(q)(eta) = (i pi d_1 + P_1)(i pi d_2 + P_2) S_{3,(r1,r2)}(q)(eta), the
/// inner transform in r1 taken at every node of the outer one in r2.
pub fn q3_hat(qhat: &RadialProfile, dim: usize, eta_abs: f64, cfg: &Q3Config) -> Result<Complex64> {
    match dim {
        2 => {}
        3 if cfg.allow_3d => {}
        3 => {
            return Err(Error::Unsupported(
                "Q3 in three dimensions needs the expensive mode (allow_3d)".into(),
            ))
        }
        d => return Err(Error::Unsupported(format!("Q3 in dimension {d}"))),
    }
    cfg.inner.validate()?;
    cfg.outer.validate()?;
    let estimated = cfg.estimated_cost(dim);
    if estimated > cfg.budget {
        return Err(Error::CostBudget {
            estimated,
            budget: cfg.budget,
        });
    }
    // Inner tails are judged against the size of the double integral, which
    // S_3 at r1 = r2 = 1 sets.
    let reference = s3_r(qhat, dim, eta_abs, 1.0, 1.0, cfg.s3)?.norm();
    let mut scaled = *cfg;
    scaled.inner.tail_floor = scaled.inner.tail_floor.max(cfg.inner.tail_tol * cfg.outer.tail_tol * reference);
    let inner = InnerTransform {
        qhat,
        dim,
        eta_abs,
        cfg: &scaled,
    };
    Ok(apply_dispersion_pv_fast(&inner, &cfg.outer)?.value)
}

/// Relative difference between Q^_3 at `cfg` and at `cfg.refined()`.
pub fn q3_self_convergence(qhat: &RadialProfile, dim: usize, eta_abs: f64, cfg: &Q3Config) -> Result<(Complex64, f64)> {
    let (a, b) = rayon::join(
        || q3_hat(qhat, dim, eta_abs, cfg),
        || q3_hat(qhat, dim, eta_abs, &cfg.refined()),
    );
    let (a, b) = (a?, b?);
    let scale = a.norm().max(b.norm());
    let rel = if scale == 0.0 { 0.0 } else { (a - b).norm() / scale };
    Ok((b, rel))
}

/// Everything [`born_approx`] needs besides the potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BornSchemes {
    pub pv: PVScheme,
    pub radial: RadialQuad,
    pub q3: Q3Config,
    /// Run the eta sweep on the rayon pool.
    pub parallel: bool,
}

impl Default for BornSchemes {
    fn default() -> Self {
        Self {
            pv: PVScheme::default(),
            radial: RadialQuad::default(),
            q3: Q3Config::default(),
            parallel: true,
        }
    }
}

/// Truncated Born approximation on an |eta| grid. Nodes whose dispersion
/// terms failed hold NaN and are listed in `failures`.
#[derive(Debug, Clone)]
pub struct BornResult {
    pub eta_grid: GridSpec1D,
    pub qhat: Vec<Complex64>,
    pub q2hat: Vec<Complex64>,
    pub q3hat: Option<Vec<Complex64>>,
    pub qb_hat: Vec<Complex64>,
    pub residual_hat: Vec<Complex64>,
    pub chi: Vec<f64>,
    pub order: usize,
    pub failures: Vec<(usize, String)>,
}

const NAN: Complex64 = Complex64 {
    re: f64::NAN,
    im: f64::NAN,
};

pub fn born_approx(
    qhat: &RadialProfile,
    dim: usize,
    eta_grid: &GridSpec1D,
    order: usize,
    cutoff: &CutoffSpec,
    schemes: &BornSchemes,
) -> Result<BornResult> {
    if !(2..=3).contains(&order) {
        return Err(Error::Unsupported(format!("Born order J = {order}; only 2 and 3")));
    }
    if !(2..=3).contains(&dim) {
        return Err(Error::Unsupported(format!("dimension {dim}")));
    }
    if eta_grid.rho_min() <= 0.0 {
        return Err(Error::InvalidInput("eta grid must be strictly positive".into()));
    }
    schemes.pv.validate()?;

    let node = |&eta: &f64| -> (Complex64, std::result::Result<(Complex64, Option<Complex64>), String>) {
        let q = qhat.value(eta).unwrap_or(NAN);
        let terms = (|| -> Result<(Complex64, Option<Complex64>)> {
            let q2 = q2_hat(qhat, dim, eta, &schemes.pv, schemes.radial)?.value;
            let q3 = if order == 3 {
                Some(q3_hat(qhat, dim, eta, &schemes.q3)?)
            } else {
                None
            };
            Ok((q2, q3))
        })();
        (q, terms.map_err(|e| e.to_string()))
    };
    let per_node: Vec<_> = if schemes.parallel {
        eta_grid.nodes().par_iter().map(node).collect()
    } else {
        eta_grid.nodes().iter().map(node).collect()
    };

    let m = eta_grid.count();
    let mut out = BornResult {
        eta_grid: eta_grid.clone(),
        qhat: Vec::with_capacity(m),
        q2hat: Vec::with_capacity(m),
        q3hat: (order == 3).then(|| Vec::with_capacity(m)),
        qb_hat: Vec::with_capacity(m),
        residual_hat: Vec::with_capacity(m),
        chi: Vec::with_capacity(m),
        order,
        failures: Vec::new(),
    };
    for (i, (&eta, (q, terms))) in eta_grid.nodes().iter().zip(per_node).enumerate() {
        let chi = cutoff_chi(cutoff, eta);
        let (q2, q3) = match terms {
            Ok(t) => t,
            Err(msg) => {
                out.failures.push((i, msg));
                (NAN, (order == 3).then_some(NAN))
            }
        };
        let higher = q2 + q3.unwrap_or(ZERO);
        out.qhat.push(q);
        out.q2hat.push(q2);
        if let (Some(v), Some(q3)) = (out.q3hat.as_mut(), q3) {
            v.push(q3);
        }
        out.qb_hat.push(chi * (q + higher));
        out.residual_hat.push(-(chi * higher));
        out.chi.push(chi);
    }
    Ok(out)
}

impl BornResult {
    /// True where the node is usable for fits: finite terms and chi = 1.
    pub fn fit_mask(&self) -> Vec<bool> {
        (0..self.qhat.len())
            .map(|i| self.chi[i] == 1.0 && self.residual_hat[i].is_finite() && self.qhat[i].is_finite())
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["eta_abs", "re_qhat", "im_qhat", "re_q2", "im_q2"];
        if self.q3hat.is_some() {
            header.extend(["re_q3", "im_q3"]);
        }
        header.extend(["re_qB", "im_qB", "re_res", "im_res"]);
        wr.write_record(&header)?;
        for (i, &eta) in self.eta_grid.nodes().iter().enumerate() {
            let mut row = vec![eta];
            let mut push = |z: Complex64| row.extend([z.re, z.im]);
            push(self.qhat[i]);
            push(self.q2hat[i]);
            if let Some(q3) = &self.q3hat {
                push(q3[i]);
            }
            push(self.qb_hat[i]);
            push(self.residual_hat[i]);
            wr.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Columns of a Born CSV, keyed by header name.
#[derive(Debug, Clone, PartialEq)]
pub struct BornTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl BornTable {
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let headers: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Self { headers, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

fn relative_gap(lhs: Complex64, rhs: Complex64, scale: f64) -> f64 {
    let d = (lhs - rhs).norm();
    if scale == 0.0 {
        d
    } else {
        d / scale
    }
}

/// |2 S_r(f, g) - (S_r(f+g) - S_r(f) - S_r(g))| relative to the largest
/// term involved.
pub fn polarization_check(
    fhat: &RadialProfile,
    ghat: &RadialProfile,
    dim: usize,
    eta_abs: f64,
    r: f64,
    quad: RadialQuad,
) -> Result<f64> {
    let sum = fhat.add(ghat)?;
    let lhs = bilinear_s_r(fhat, ghat, dim, eta_abs, r, quad)? * 2.0;
    let (t_sum, t_f, t_g) = (
        s_r(&sum, dim, eta_abs, r, quad)?,
        s_r(fhat, dim, eta_abs, r, quad)?,
        s_r(ghat, dim, eta_abs, r, quad)?,
    );
    let scale = [lhs.norm(), t_sum.norm(), t_f.norm(), t_g.norm()]
        .into_iter()
        .fold(0.0, f64::max);
    Ok(relative_gap(lhs, t_sum - t_f - t_g, scale))
}

/// Polarization of the composed operator (i pi d + P) S_r.
pub fn polarization_check_q2(
    fhat: &RadialProfile,
    ghat: &RadialProfile,
    dim: usize,
    eta_abs: f64,
    scheme: &PVScheme,
    quad: RadialQuad,
) -> Result<f64> {
    let sum = fhat.add(ghat)?;
    let bilinear = |r: f64| -> Result<Complex64> {
        if r <= 0.0 {
            return Ok(ZERO);
        }
        bilinear_s_r(fhat, ghat, dim, eta_abs, r, quad)
    };
    let lhs = apply_dispersion_pv_fast(&bilinear, scheme)?.value * 2.0;
    let t = |p: &RadialProfile| -> Result<Complex64> {
        let fam = DispersionFamily {
            qhat: p,
            dim,
            eta_abs,
            quad,
        };
        Ok(apply_dispersion_pv_fast(&fam, scheme)?.value)
    };
    let (t_sum, t_f, t_g) = (t(&sum)?, t(fhat)?, t(ghat)?);
    let scale = [lhs.norm(), t_sum.norm(), t_f.norm(), t_g.norm()]
        .into_iter()
        .fold(0.0, f64::max);
    Ok(relative_gap(lhs, t_sum - t_f - t_g, scale))
}
