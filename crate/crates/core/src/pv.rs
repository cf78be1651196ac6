//! The distributions d(F) = F_1 and P(F) = p.v. int_0^inf F_r / (1 - r) dr,
//! applied to one-parameter families r -> F_r, and their combination
//! (i pi d + P).
//!
//! P is split in three: a left part on [0, 1 - delta], a near part on
//! |1 - r| < delta where the singularity is removed analytically, and a far
//! part on [1 + delta, r_max] followed by a bounded tail. Panels near r = 1 are
//! graded dyadically because dispersion families vary on a scale ~ 1/|eta|
//! there.

use num_complex::Complex64;
use serde::Serialize;
use std::cell::Cell;

use crate::dispersion::{s_r, DispersionSample, RadialQuad};
use crate::error::{Error, Result};
use crate::fields::{GridSpec1D, RadialProfile};
use crate::quadrature::GaussLegendre;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// How the singular window |1 - r| < delta is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NearScheme {
    /// u = 1 - r folded onto (0, delta): int (F_{1-u} - F_{1+u}) / u du.
    SymmetricReflection,
    /// int (F_r - F_1) / (1 - r) dr directly in r; the subtracted constant
    /// integrates to zero over the symmetric window.
    TaylorSubtraction,
}

impl std::str::FromStr for NearScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric_reflection" | "reflection" => Ok(Self::SymmetricReflection),
            "taylor_subtraction" | "taylor" => Ok(Self::TaylorSubtraction),
            other => Err(Error::InvalidInput(format!("unknown near scheme {other:?}"))),
        }
    }
}

/// Configuration of the principal-value integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PVScheme {
    /// Half-width of the singular window around r = 1.
    pub delta: f64,
    /// Gauss-Legendre points per panel.
    pub panel_order: usize,
    /// Truncation point of the far part.
    pub r_max: f64,
    /// Largest admissible tail bound relative to the result scale.
    pub tail_tol: f64,
    pub near_scheme: NearScheme,
    /// Longest panel; every segment is cut into ceil(len / panel_width) panels.
    pub panel_width: f64,
    /// Dyadic refinement levels toward r = 1 inside the window.
    pub near_levels: usize,
    /// Absolute tail bound always accepted. Lets an inner transform whose
    /// whole value is negligible for an enclosing integral pass the
    /// truncation test.
    pub tail_floor: f64,
}

impl Default for PVScheme {
    fn default() -> Self {
        Self {
            delta: 0.5,
            panel_order: 16,
            r_max: 64.0,
            tail_tol: 1e-4,
            near_scheme: NearScheme::SymmetricReflection,
            panel_width: 0.5,
            near_levels: 12,
            tail_floor: 0.0,
        }
    }
}

impl PVScheme {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("pv.delta = {} must lie in (0, 1)", self.delta));
        }
        if self.panel_order < 8 {
            return bad(format!("pv.panel_order = {} must be >= 8", self.panel_order));
        }
        if !(self.r_max.is_finite() && self.r_max > 1.0 + self.delta) {
            return bad(format!("pv.r_max = {} must exceed 1 + delta", self.r_max));
        }
        if !(self.tail_tol > 0.0) {
            return bad(format!("pv.tail_tol = {} must be > 0", self.tail_tol));
        }
        if !(self.panel_width > 0.0) {
            return bad(format!("pv.panel_width = {} must be > 0", self.panel_width));
        }
        if !(self.tail_floor >= 0.0) {
            return bad(format!("pv.tail_floor = {} must be >= 0", self.tail_floor));
        }
        if self.near_levels > 40 {
            return bad(format!("pv.near_levels = {} is too deep", self.near_levels));
        }
        Ok(())
    }

    /// Same scheme with panels of half the width.
    pub fn refined(&self) -> Self {
        Self {
            panel_width: 0.5 * self.panel_width,
            ..*self
        }
    }

    /// Family evaluations made by one pass of the primary scheme (without
    /// error estimation or tail probes).
    pub fn evaluation_count(&self) -> usize {
        let segs = self.segments();
        let per = |list: &[(f64, f64)]| -> usize { list.iter().map(|s| self.panels_in(s.1 - s.0)).sum() };
        let near = match self.near_scheme {
            NearScheme::SymmetricReflection => 2 * per(&segs.near_u),
            NearScheme::TaylorSubtraction => per(&segs.near_r) + 1,
        };
        (per(&segs.left) + per(&segs.far)) * self.panel_order + near * self.panel_order + 1
    }

    fn panels_in(&self, len: f64) -> usize {
        ((len / self.panel_width).ceil() as usize).max(1)
    }

    fn segments(&self) -> Segments {
        let d = self.delta;
        let levels = self.near_levels;
        let left = vec![(0.0, 1.0 - d)];
        let mut near_u = Vec::with_capacity(levels + 1);
        for k in 0..levels {
            let hi = d * 0.5f64.powi(k as i32);
            near_u.push((0.5 * hi, hi));
        }
        let innermost = d * 0.5f64.powi(levels as i32);
        near_u.push((0.0, innermost));
        let mut near_r = Vec::with_capacity(2 * levels + 2);
        for &(lo, hi) in &near_u {
            if lo > 0.0 {
                near_r.push((1.0 - hi, 1.0 - lo));
                near_r.push((1.0 + lo, 1.0 + hi));
            }
        }
        near_r.push((1.0 - innermost, 1.0));
        near_r.push((1.0, 1.0 + innermost));
        let mut far = Vec::new();
        let mut k = 0;
        loop {
            let lo = 1.0 + d * 2f64.powi(k);
            if lo >= self.r_max {
                break;
            }
            let hi = (1.0 + d * 2f64.powi(k + 1)).min(self.r_max);
            far.push((lo, hi));
            k += 1;
        }
        Segments {
            left,
            near_u,
            near_r,
            far,
        }
    }
}

struct Segments {
    left: Vec<(f64, f64)>,
    near_u: Vec<(f64, f64)>,
    near_r: Vec<(f64, f64)>,
    far: Vec<(f64, f64)>,
}

/// A one-parameter family r -> F_r on (0, inf).
pub trait Family {
    fn eval(&self, r: f64) -> Result<Complex64>;

    /// Largest r at which the family is defined, if finite.
    fn r_limit(&self) -> Option<f64> {
        None
    }
}

impl<F> Family for F
where
    F: Fn(f64) -> Result<Complex64>,
{
    fn eval(&self, r: f64) -> Result<Complex64> {
        self(r)
    }
}

/// r -> S_r(q)(eta) for a radial profile.
#[derive(Debug, Clone)]
pub struct DispersionFamily<'a> {
    pub qhat: &'a RadialProfile,
    pub dim: usize,
    pub eta_abs: f64,
    pub quad: RadialQuad,
}

impl Family for DispersionFamily<'_> {
    fn eval(&self, r: f64) -> Result<Complex64> {
        if r <= 0.0 {
            return Ok(ZERO);
        }
        s_r(self.qhat, self.dim, self.eta_abs, r, self.quad)
    }
}

/// Cubic-spline family through a [`DispersionSample`], continued linearly to
/// F_0 = 0 below the first sample.
#[derive(Debug, Clone)]
pub struct SampledFamily {
    spline: RadialProfile,
    r0: f64,
    v0: Complex64,
}

impl SampledFamily {
    pub fn new(sample: &DispersionSample) -> Result<Self> {
        let grid = GridSpec1D::irregular(sample.r_values.clone())?;
        let spline = RadialProfile::sampled(grid, sample.values.clone(), None)?;
        Ok(Self {
            spline,
            r0: sample.r_values[0],
            v0: sample.values[0],
        })
    }
}

impl Family for SampledFamily {
    fn eval(&self, r: f64) -> Result<Complex64> {
        if r <= 0.0 {
            Ok(ZERO)
        } else if r < self.r0 {
            Ok(self.v0 * (r / self.r0))
        } else {
            self.spline.value(r)
        }
    }

    fn r_limit(&self) -> Option<f64> {
        Some(self.spline.grid().rho_max())
    }
}

/// d(F) = F_1.
pub fn delta_part<F: Family + ?Sized>(family: &F) -> Result<Complex64> {
    family.eval(1.0)
}

/// Value of P(F) or (i pi d + P)(F) with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PvOutcome {
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    /// Contributions of the three regions to P.
    #[serde(serialize_with = "ser_complex")]
    pub left: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub near: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub far: Complex64,
    /// Sum of panel error estimates, the near-scheme discrepancy and the
    /// tail bound.
    pub error_estimate: f64,
    pub tail_bound: f64,
    /// |D2(h)| / |D2(h/2)| for the centred second difference at r = 1; about 4
    /// for families that are C^2 there, None when D2 is below noise.
    pub smoothness_ratio: Option<f64>,
    pub evaluations: usize,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

struct Counter<'a, F: ?Sized> {
    family: &'a F,
    count: Cell<usize>,
}

impl<F: Family + ?Sized> Counter<'_, F> {
    fn eval(&self, r: f64) -> Result<Complex64> {
        self.count.set(self.count.get() + 1);
        self.family.eval(r)
    }
}

/// Gauss-Legendre over [a, b] split into equal panels; returns (value, error
/// estimate from a half-order rule) when `estimate` is set.
fn panel_sum<G>(
    mut g: G,
    a: f64,
    b: f64,
    panels: usize,
    rule: &GaussLegendre,
    half: Option<&GaussLegendre>,
) -> Result<(Complex64, f64)>
where
    G: FnMut(f64) -> Result<Complex64>,
{
    let w = (b - a) / panels as f64;
    let (mut total, mut err) = (ZERO, 0.0);
    for p in 0..panels {
        let (lo, hi) = (a + p as f64 * w, a + (p + 1) as f64 * w);
        let mut v = ZERO;
        for (x, wt) in rule.mapped(lo, hi) {
            v += g(x)? * wt;
        }
        if let Some(h) = half {
            let mut c = ZERO;
            for (x, wt) in h.mapped(lo, hi) {
                c += g(x)? * wt;
            }
            err += (v - c).norm();
        }
        total += v;
    }
    Ok((total, err))
}

/// P(F) by the configured scheme.
pub fn pv_part<F: Family + ?Sized>(family: &F, scheme: &PVScheme) -> Result<PvOutcome> {
    pv_core(family, scheme, true)
}

/// P(F) without the error estimate (primary scheme only, no second near
/// scheme or half-order panels). Tail and smoothness checks still run.
pub fn pv_part_fast<F: Family + ?Sized>(family: &F, scheme: &PVScheme) -> Result<PvOutcome> {
    pv_core(family, scheme, false)
}

fn near_integral<F: Family + ?Sized>(
    f: &Counter<'_, F>,
    scheme: &PVScheme,
    which: NearScheme,
    segs: &Segments,
    f1: Complex64,
    rule: &GaussLegendre,
    half: Option<&GaussLegendre>,
) -> Result<(Complex64, f64)> {
    let (mut total, mut err) = (ZERO, 0.0);
    match which {
        NearScheme::SymmetricReflection => {
            for &(lo, hi) in &segs.near_u {
                let (v, e) = panel_sum(
                    |u| Ok((f.eval(1.0 - u)? - f.eval(1.0 + u)?) / u),
                    lo,
                    hi,
                    scheme.panels_in(hi - lo),
                    rule,
                    half,
                )?;
                total += v;
                err += e;
            }
        }
        NearScheme::TaylorSubtraction => {
            for &(lo, hi) in &segs.near_r {
                let (v, e) = panel_sum(
                    |r| Ok((f.eval(r)? - f1) / (1.0 - r)),
                    lo,
                    hi,
                    scheme.panels_in(hi - lo),
                    rule,
                    half,
                )?;
                total += v;
                err += e;
            }
        }
    }
    Ok((total, err))
}

fn pv_core<F: Family + ?Sized>(family: &F, scheme: &PVScheme, estimate: bool) -> Result<PvOutcome> {
    scheme.validate()?;
    let mut r_max = scheme.r_max;
    let limited = family.r_limit().filter(|&l| l < r_max);
    if let Some(l) = limited {
        if l <= 1.0 + scheme.delta {
            return Err(Error::InvalidInput(format!(
                "family defined only up to r = {l}, inside the singular window"
            )));
        }
        r_max = l;
    }
    let scheme = PVScheme { r_max, ..*scheme };
    let f = Counter {
        family,
        count: Cell::new(0),
    };
    let segs = scheme.segments();
    let rule = GaussLegendre::new(scheme.panel_order);
    let half_rule = GaussLegendre::new(scheme.panel_order / 2);
    let half = estimate.then_some(&half_rule);
    let f1 = f.eval(1.0)?;

    let mut err = 0.0;
    let mut left = ZERO;
    for &(lo, hi) in &segs.left {
        let (v, e) = panel_sum(|r| Ok(f.eval(r)? / (1.0 - r)), lo, hi, scheme.panels_in(hi - lo), &rule, half)?;
        left += v;
        err += e;
    }
    let mut far = ZERO;
    for &(lo, hi) in &segs.far {
        let (v, e) = panel_sum(|r| Ok(f.eval(r)? / (1.0 - r)), lo, hi, scheme.panels_in(hi - lo), &rule, half)?;
        far += v;
        err += e;
    }
    let (near, near_err) = near_integral(&f, &scheme, scheme.near_scheme, &segs, f1, &rule, half)?;
    err += near_err;
    if estimate {
        let other = match scheme.near_scheme {
            NearScheme::SymmetricReflection => NearScheme::TaylorSubtraction,
            NearScheme::TaylorSubtraction => NearScheme::SymmetricReflection,
        };
        let (alt, _) = near_integral(&f, &scheme, other, &segs, f1, &rule, None)?;
        err += (alt - near).norm();
    }
    let value = left + near + far;

    // Tail probes.
    let probes: [f64; 3] = if limited.is_some() {
        [r_max, 0.5 * r_max, 0.25 * r_max]
    } else {
        [r_max, 2.0 * r_max, 4.0 * r_max]
    };
    let m: Vec<f64> = probes.iter().map(|&r| f.eval(r).map(|z| z.norm())).collect::<Result<_>>()?;
    let scale = value.norm().max(f1.norm());
    let tail_bound = if m[0] == 0.0 {
        0.0
    } else {
        // decay rate per doubling, from the outermost available pair first
        let rates = if limited.is_some() {
            [(m[1] / m[0]).log2(), (m[2] / m[1]).log2()]
        } else {
            [(m[0] / m[1]).log2(), (m[1] / m[2]).log2()]
        };
        let p = rates[0].min(rates[1]);
        if p.is_nan() || p <= 0.1 {
            f64::INFINITY
        } else {
            m[0] * r_max / (r_max - 1.0) / p
        }
    };
    let limit = (scheme.tail_tol * scale.max(f64::MIN_POSITIVE)).max(scheme.tail_floor);
    if tail_bound > limit {
        return Err(Error::Truncation {
            r_max,
            probe: m[0],
            limit,
        });
    }
    err += tail_bound;

    // Local smoothness at r = 1.
    let h1 = (scheme.delta * 0.5f64.powi(scheme.near_levels as i32 - 3)).min(0.5 * scheme.delta);
    let d2 = |h: f64| -> Result<f64> { Ok((f.eval(1.0 + h)? - f1 * 2.0 + f.eval(1.0 - h)?).norm()) };
    let (a, b) = (d2(h1)?, d2(0.5 * h1)?);
    let noise = 1e-9 * scale.max(f64::MIN_POSITIVE);
    let smoothness_ratio = if a <= noise || b == 0.0 { None } else { Some(a / b) };
    if let Some(q) = smoothness_ratio {
        if q < 2.5 {
            return Err(Error::Convergence(format!(
                "family is not differentiable at r = 1: second-difference ratio {q:.3} (expected ~4)"
            )));
        }
    }
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::NonFinite("principal value".into()));
    }
    Ok(PvOutcome {
        value,
        left,
        near,
        far,
        error_estimate: err,
        tail_bound,
        smoothness_ratio,
        evaluations: f.count.get(),
    })
}

/// (i pi d + P)(F) = i pi F_1 + P(F).
pub fn apply_dispersion_pv<F: Family + ?Sized>(family: &F, scheme: &PVScheme) -> Result<PvOutcome> {
    let mut out = pv_part(family, scheme)?;
    out.value += Complex64::new(0.0, std::f64::consts::PI) * family.eval(1.0)?;
    Ok(out)
}

/// [`apply_dispersion_pv`] without error estimation.
pub fn apply_dispersion_pv_fast<F: Family + ?Sized>(family: &F, scheme: &PVScheme) -> Result<PvOutcome> {
    let mut out = pv_part_fast(family, scheme)?;
    out.value += Complex64::new(0.0, std::f64::consts::PI) * family.eval(1.0)?;
    Ok(out)
}

/// (i pi d + P) for a tabulated dispersion sample.
pub fn apply_to_sample(sample: &DispersionSample, scheme: &PVScheme) -> Result<PvOutcome> {
    apply_dispersion_pv(&SampledFamily::new(sample)?, scheme)
}

/// Independent reference for P(F) on (0, r_max): adaptive Simpson on the
/// symmetric-pair form. With c = min(1, r_max - 1),
///
///   P = int_0^sqrt(c) 2 (F(1-v^2) - F(1+v^2)) / v dv
///       + int_0^{1-c} F/(1-r) dr + int_{1+c}^{r_max} F/(1-r) dr.
pub fn pv_reference<F: Family + ?Sized>(family: &F, r_max: f64, tol: f64) -> Result<Complex64> {
    if !(r_max > 1.0) {
        return Err(Error::InvalidInput(format!("reference needs r_max > 1, got {r_max}")));
    }
    let c = (r_max - 1.0).min(1.0);
    let pair = |v: f64| -> Result<Complex64> {
        if v == 0.0 {
            return Ok(ZERO);
        }
        let u = v * v;
        Ok((family.eval(1.0 - u)? - family.eval(1.0 + u)?) * (2.0 / v))
    };
    let plain = |r: f64| -> Result<Complex64> { Ok(family.eval(r)? / (1.0 - r)) };
    let mut total = simpson(&pair, 0.0, c.sqrt(), tol)?;
    if c < 1.0 {
        total += simpson(&plain, 0.0, 1.0 - c, tol)?;
    }
    // The outer part is split dyadically so Simpson sees the decay scale.
    let mut lo = 1.0 + c;
    while lo < r_max {
        let hi = (2.0 * lo).min(r_max);
        total += simpson(&plain, lo, hi, tol)?;
        lo = hi;
    }
    Ok(total)
}

fn simpson<G>(g: &G, a: f64, b: f64, tol: f64) -> Result<Complex64>
where
    G: Fn(f64) -> Result<Complex64>,
{
    let (fa, fb) = (g(a)?, g(b)?);
    let m = 0.5 * (a + b);
    let fm = g(m)?;
    let whole = (fa + fm * 4.0 + fb) * ((b - a) / 6.0);
    // Seed the absolute tolerance from a 16-panel composite estimate so it is
    // relative to the size of the integral.
    let mut seed = ZERO;
    let n = 16;
    let h = (b - a) / n as f64;
    for k in 0..n {
        let (x0, x1) = (a + k as f64 * h, a + (k + 1) as f64 * h);
        seed += (g(x0)? + g(0.5 * (x0 + x1))? * 4.0 + g(x1)?) * (h / 6.0);
    }
    let abs_tol = tol * seed.norm().max(whole.norm()).max(f64::MIN_POSITIVE);
    simpson_rec(g, a, b, fa, fm, fb, whole, abs_tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<G>(
    g: &G,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: usize,
) -> Result<Complex64>
where
    G: Fn(f64) -> Result<Complex64>,
{
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (g(lm)?, g(rm)?);
    let left = (fa + flm * 4.0 + fm) * ((m - a) / 6.0);
    let right = (fm + frm * 4.0 + fb) * ((b - m) / 6.0);
    let delta = left + right - whole;
    if depth == 0 {
        return Err(Error::Convergence(format!("reference Simpson on [{a}, {b}]")));
    }
    if delta.norm() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson_rec(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_rec(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::gaussian_s_r_closed_form;
    use crate::potentials::gaussian_spectrum;
    use std::f64::consts::PI;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn schemes() -> [PVScheme; 2] {
        let a = PVScheme::default();
        let b = PVScheme {
            near_scheme: NearScheme::TaylorSubtraction,
            ..a
        };
        [a, b]
    }

    #[test]
    fn delta_part_examples() {
        let cancel = |r: f64| Ok(c((1.0 - r) * (-r).exp()));
        assert_eq!(delta_part(&cancel).unwrap(), ZERO);
        let e = |r: f64| Ok(c((-r).exp()));
        assert_eq!(delta_part(&e).unwrap(), c((-1f64).exp()));
    }

    #[test]
    fn cancelling_family_integrates_exponential() {
        // (1-r) e^{-r} / (1-r) = e^{-r}; integral over (0, 64) is 1 - e^{-64}.
        let f = |r: f64| Ok(c((1.0 - r) * (-r).exp()));
        for s in schemes() {
            let out = pv_part(&f, &s).unwrap();
            assert!((out.value.re - 1.0).abs() < 1e-12, "{:?}: {}", s.near_scheme, out.value);
            let full = apply_dispersion_pv(&f, &s).unwrap();
            assert!((full.value - c(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn symmetric_step_gives_zero() {
        let f = |r: f64| Ok(c(if r < 2.0 { 1.0 } else { 0.0 }));
        for s in schemes() {
            let out = pv_part(&f, &s).unwrap();
            assert!(out.value.norm() < 1e-13, "{}", out.value);
        }
        assert!(pv_reference(&f, 64.0, 1e-10).unwrap().norm() < 1e-9);
    }

    #[test]
    fn gaussian_family_matches_reference() {
        let q = gaussian_spectrum(1.0);
        let fam = DispersionFamily {
            qhat: &q,
            dim: 2,
            eta_abs: 2.0,
            quad: RadialQuad::default(),
        };
        let reference = pv_reference(&fam, 64.0, 1e-9).unwrap();
        for s in schemes() {
            let out = apply_dispersion_pv(&fam, &s).unwrap();
            assert!((out.value.re - reference.re).abs() < 1e-6 * reference.norm());
            assert!((out.value.re - reference.re).abs() <= out.error_estimate.max(1e-15));
            let s1 = gaussian_s_r_closed_form(2, 2.0, 1.0);
            assert!((out.value.im - PI * s1).abs() < 1e-12 * PI * s1);
            assert!(out.smoothness_ratio.is_none_or(|q| (q - 4.0).abs() < 0.5));
        }
    }

    #[test]
    fn kinked_family_is_diagnosed() {
        let f = |r: f64| Ok(c((1.0 - r).abs() * (-r).exp()));
        assert!(matches!(pv_part(&f, &PVScheme::default()), Err(Error::Convergence(_))));
    }

    #[test]
    fn slowly_decaying_tail_is_reported() {
        let f = |r: f64| Ok(c(1.0 / (1.0 + r).sqrt()));
        assert!(matches!(pv_part(&f, &PVScheme::default()), Err(Error::Truncation { .. })));
    }

    #[test]
    fn even_part_vanishes_locally() {
        let f = |r: f64| Ok(c((3.0 * (1.0 - r)).cos() * (-(1.0 - r) * (1.0 - r)).exp()));
        let out = pv_part(&f, &PVScheme::default()).unwrap();
        assert!(out.near.norm() < 1e-14);
    }

    #[test]
    fn refinement_reduces_error() {
        let f = |r: f64| Ok(c((-r).exp() / (1.0 + r * r)));
        let coarse = PVScheme {
            panel_order: 8,
            panel_width: 2.0,
            near_levels: 4,
            ..PVScheme::default()
        };
        let reference = pv_reference(&f, coarse.r_max, 1e-12).unwrap();
        let e1 = (pv_part(&f, &coarse).unwrap().value - reference).norm();
        let e2 = (pv_part(&f, &coarse.refined()).unwrap().value - reference).norm();
        assert!(e2 * 4.0 <= e1 || e2 < 1e-12, "{e1} -> {e2}");
    }

    #[test]
    fn positive_family_left_of_one() {
        let f = |r: f64| Ok(c(if r < 0.9 { r * (0.9 - r) } else { 0.0 }));
        let out = pv_part(&f, &PVScheme::default()).unwrap();
        assert!(out.value.re > 0.0);
    }

    #[test]
    fn scheme_validation() {
        let bad = [
            PVScheme { delta: 1.0, ..PVScheme::default() },
            PVScheme { panel_order: 4, ..PVScheme::default() },
            PVScheme { r_max: 1.2, ..PVScheme::default() },
        ];
        for s in bad {
            assert!(s.validate().is_err());
        }
        assert_eq!("taylor_subtraction".parse::<NearScheme>().unwrap(), NearScheme::TaylorSubtraction);
    }

    #[test]
    fn sampled_family_matches_callable() {
        let q = gaussian_spectrum(1.0);
        let rs: Vec<f64> = (1..=400).map(|k| k as f64 * 0.01).collect();
        let sample = DispersionSample::tabulate(&q, 2, 2.0, rs, false, RadialQuad::default()).unwrap();
        let fam = DispersionFamily {
            qhat: &q,
            dim: 2,
            eta_abs: 2.0,
            quad: RadialQuad::default(),
        };
        let a = apply_to_sample(&sample, &PVScheme::default()).unwrap();
        let b = apply_dispersion_pv(&fam, &PVScheme::default()).unwrap();
        assert!((a.value - b.value).norm() < 1e-5 * b.value.norm());
    }
}
