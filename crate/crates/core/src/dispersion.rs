//! Spherical operators over Ewald spheres: S_r and its bilinear form, the
//! majorant K_r, the derivative in r, and the trilinear S_{3,r}.
//!
//! For radial profiles everything reduces by rotational symmetry about eta.
//! On Gamma_r(eta), with psi the angle between xi - eta/2 and eta,
//!
//!   |xi|     = (|eta|/2) sqrt(1 + r^2 + 2 r cos psi)
//!   |eta-xi| = (|eta|/2) sqrt(1 + r^2 - 2 r cos psi)
//!
//! and the surface integral becomes R^{n-1} omega_{n-2} int_0^pi (..) sin^{n-2} psi dpsi
//! with R = r|eta|/2.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::fields::RadialProfile;
use crate::quadrature::{graded_breakpoints, integrate_adaptive, Adaptive, GaussLegendre};
use crate::sphere::{integrate_ewald, EwaldSphere, SphereQuadrature};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Tolerances for the one-dimensional radial reductions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialQuad {
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for RadialQuad {
    fn default() -> Self {
        Self {
            rel_tol: 1e-13,
            max_panels: 4000,
        }
    }
}

fn check_args(dim: usize, eta_abs: f64, r: f64) -> Result<()> {
    if !(2..=3).contains(&dim) {
        return Err(Error::Unsupported(format!("dimension {dim}")));
    }
    if !(eta_abs > 0.0 && eta_abs.is_finite()) {
        return Err(Error::InvalidInput(format!("|eta| = {eta_abs} must be > 0")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!("r = {r} must be > 0")));
    }
    Ok(())
}

/// Geometry of one point on Gamma_r(eta) in the reduced variables.
#[derive(Debug, Clone, Copy)]
struct SpherePoint {
    cos_psi: f64,
    /// |xi|
    a: f64,
    /// |eta - xi|
    b: f64,
}

/// R^{n-1} omega_{n-2} int_0^pi f(point) sin^{n-2} psi dpsi.
fn reduced_integral<F>(dim: usize, eta_abs: f64, r: f64, quad: RadialQuad, mut f: F) -> Result<Complex64>
where
    F: FnMut(SpherePoint) -> Result<Complex64>,
{
    let h = 0.5 * eta_abs;
    let big_r = r * h;
    let finest = (0.25 / (1.0 + eta_abs * r.max(1.0))).min(0.05);
    let breaks = graded_breakpoints(0.0, PI, finest);
    let res = integrate_adaptive(
        |psi| {
            let (s, c) = psi.sin_cos();
            // 1 + r^2 +- 2 r cos psi written to avoid cancellation near 0 and pi
            let half = 0.5 * psi;
            let a2 = (1.0 - r).powi(2) + 4.0 * r * half.cos().powi(2);
            let b2 = (1.0 - r).powi(2) + 4.0 * r * half.sin().powi(2);
            let p = SpherePoint {
                cos_psi: c,
                a: h * a2.sqrt(),
                b: h * b2.sqrt(),
            };
            let w = if dim == 2 { 1.0 } else { s };
            Ok(f(p)? * w)
        },
        &breaks,
        Adaptive {
            rel_tol: quad.rel_tol,
            abs_tol: 0.0,
            max_panels: quad.max_panels,
        },
    )?;
    if !res.converged {
        return Err(Error::Convergence(format!(
            "sphere integral at |eta| = {eta_abs}, r = {r} (error {:e})",
            res.error
        )));
    }
    let omega = if dim == 2 { 2.0 } else { 2.0 * PI };
    Ok(res.value * omega * big_r.powi(dim as i32 - 1))
}

fn s_prefactor(eta_abs: f64, r: f64) -> f64 {
    2.0 / (eta_abs * (1.0 + r))
}

/// Bilinear S_r(f, g)(eta) = (2/(|eta|(1+r))) int_{Gamma_r(eta)} f^(xi) g^(eta-xi) dsigma,
/// evaluated through the radial reduction with the integrand symmetrised
/// under xi -> eta - xi.
pub fn bilinear_s_r(
    fhat: &RadialProfile,
    ghat: &RadialProfile,
    dim: usize,
    eta_abs: f64,
    r: f64,
    quad: RadialQuad,
) -> Result<Complex64> {
    check_args(dim, eta_abs, r)?;
    let v = reduced_integral(dim, eta_abs, r, quad, |p| {
        let fa = fhat.value(p.a)?;
        let gb = ghat.value(p.b)?;
        let ga = ghat.value(p.a)?;
        let fb = fhat.value(p.b)?;
        Ok(0.5 * (fa * gb + ga * fb))
    })?;
    Ok(v * s_prefactor(eta_abs, r))
}

/// S_r(q)(eta) = (2/(|eta|(1+r))) int_{Gamma_r(eta)} q^(xi) q^(eta-xi) dsigma.
pub fn s_r(qhat: &RadialProfile, dim: usize, eta_abs: f64, r: f64, quad: RadialQuad) -> Result<Complex64> {
    check_args(dim, eta_abs, r)?;
    let v = reduced_integral(dim, eta_abs, r, quad, |p| Ok(qhat.value(p.a)? * qhat.value(p.b)?))?;
    Ok(v * s_prefactor(eta_abs, r))
}

/// S_r through a full spherical quadrature rule (no symmetry reduction).
pub fn s_r_full(qhat: &RadialProfile, eta_abs: f64, r: f64, quad: &SphereQuadrature) -> Result<Complex64> {
    check_args(quad.dim, eta_abs, r)?;
    let sph = EwaldSphere::radial(quad.dim, eta_abs, r)?;
    let v = integrate_ewald(
        &sph,
        |xi| {
            let a = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
            let m = [eta_abs - xi[0], -xi[1], -xi[2]];
            let b = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
            Ok(qhat.value(a)? * qhat.value(b)?)
        },
        quad,
    )?;
    Ok(v * s_prefactor(eta_abs, r))
}

/// Majorant K_r(g1, g2)(eta) = |eta|^{-1} int_{Gamma_r(eta)} |g1(xi)| |g2(eta-xi)| dsigma.
pub fn k_r(
    g1: &RadialProfile,
    g2: &RadialProfile,
    dim: usize,
    eta_abs: f64,
    r: f64,
    quad: RadialQuad,
) -> Result<f64> {
    check_args(dim, eta_abs, r)?;
    let v = reduced_integral(dim, eta_abs, r, quad, |p| {
        let x = 0.5 * (g1.value(p.a)?.norm() * g2.value(p.b)?.norm() + g2.value(p.a)?.norm() * g1.value(p.b)?.norm());
        Ok(Complex64::new(x, 0.0))
    })?;
    Ok(v.re / eta_abs)
}

/// d/dr S_r(q)(eta):
///
///   ((n-2) r + (n-1)) / (r (1+r)) S_r
///     + (1/(1+r)) int_{Gamma_r} theta . grad_xi [q^(xi) q^(eta-xi)] dsigma
///
/// with theta the outward normal. The gradient term uses the radial
/// derivative of the profile, which must be available.
pub fn ds_r(qhat: &RadialProfile, dim: usize, eta_abs: f64, r: f64, quad: RadialQuad) -> Result<Complex64> {
    check_args(dim, eta_abs, r)?;
    if !qhat.has_derivative() {
        return Err(Error::InvalidInput("ds_r needs a profile with derivative values".into()));
    }
    let n = dim as f64;
    let h = 0.5 * eta_abs;
    let s = s_r(qhat, dim, eta_abs, r, quad)?;
    let grad = reduced_integral(dim, eta_abs, r, quad, |p| {
        // theta . xi = h (cos psi + r), theta . (eta - xi) = h (cos psi - r)
        let ta = if p.a > 0.0 { h * (p.cos_psi + r) / p.a } else { 0.0 };
        let tb = if p.b > 0.0 { h * (p.cos_psi - r) / p.b } else { 0.0 };
        let (qa, qb) = (qhat.value(p.a)?, qhat.value(p.b)?);
        let (da, db) = (qhat.derivative(p.a)?, qhat.derivative(p.b)?);
        Ok(da * ta * qb - qa * db * tb)
    })?;
    let coef = ((n - 2.0) * r + (n - 1.0)) / (r * (1.0 + r));
    Ok(s * coef + grad / (1.0 + r))
}

/// Orders for the two-sphere integral of S_{3,r}.
///
/// n = 2: `orders[0]`, `orders[1]` equispaced angles on the two circles.
/// n = 3: Gauss-Legendre orders in the two polar cosines and `orders[2]`
/// equispaced relative azimuths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct S3Quad {
    pub orders: [usize; 3],
}

impl S3Quad {
    pub fn default_for(dim: usize) -> Self {
        if dim == 2 {
            Self { orders: [64, 64, 1] }
        } else {
            Self { orders: [24, 24, 16] }
        }
    }

    /// Profile evaluations per S_{3,r} value.
    pub fn cost(&self, dim: usize) -> usize {
        if dim == 2 {
            self.orders[0] * self.orders[1]
        } else {
            self.orders[0] * self.orders[1] * self.orders[2]
        }
    }
}

/// S_{3,(r1,r2)}(q)(eta) = (2/(1+r1)) (2/(1+r2)) |eta|^{-2}
///   int_{Gamma_r1 x Gamma_r2} q^(eta - xi1) q^(xi1 - xi2) q^(xi2) dsigma dsigma.
pub fn s3_r(qhat: &RadialProfile, dim: usize, eta_abs: f64, r1: f64, r2: f64, quad: S3Quad) -> Result<Complex64> {
    check_args(dim, eta_abs, r1)?;
    check_args(dim, eta_abs, r2)?;
    let h = 0.5 * eta_abs;
    let (big1, big2) = (r1 * h, r2 * h);
    let pref = 4.0 / ((1.0 + r1) * (1.0 + r2) * eta_abs * eta_abs);
    if quad.orders.iter().take(if dim == 2 { 2 } else { 3 }).any(|&o| o < 4) {
        return Err(Error::InvalidInput(format!("S3 quadrature orders {:?} below 4", quad.orders)));
    }
    let value = if dim == 2 {
        let (m1, m2) = (quad.orders[0], quad.orders[1]);
        let circle = |m: usize, big: f64| -> Vec<[f64; 2]> {
            (0..m)
                .map(|k| {
                    let phi = 2.0 * PI * (k as f64 + 0.5) / m as f64;
                    [h + big * phi.cos(), big * phi.sin()]
                })
                .collect()
        };
        let xs1 = circle(m1, big1);
        let xs2 = circle(m2, big2);
        let outer: Vec<Complex64> = xs1
            .iter()
            .map(|x| qhat.value(((eta_abs - x[0]).powi(2) + x[1] * x[1]).sqrt()))
            .collect::<Result<_>>()?;
        let inner: Vec<Complex64> = xs2
            .iter()
            .map(|x| qhat.value((x[0] * x[0] + x[1] * x[1]).sqrt()))
            .collect::<Result<_>>()?;
        let mut acc = ZERO;
        for (x1, o) in xs1.iter().zip(&outer) {
            let mut row = ZERO;
            for (x2, i) in xs2.iter().zip(&inner) {
                let d = ((x1[0] - x2[0]).powi(2) + (x1[1] - x2[1]).powi(2)).sqrt();
                row += qhat.value(d)? * i;
            }
            acc += o * row;
        }
        let w = (2.0 * PI / m1 as f64) * big1 * (2.0 * PI / m2 as f64) * big2;
        acc * w
    } else {
        let g1 = GaussLegendre::new(quad.orders[0]);
        let g2 = GaussLegendre::new(quad.orders[1]);
        let m = quad.orders[2];
        let cosd: Vec<f64> = (0..m)
            .map(|k| (2.0 * PI * (k as f64 + 0.5) / m as f64).cos())
            .collect();
        let mut acc = ZERO;
        for (&c1, &w1) in g1.nodes.iter().zip(&g1.weights) {
            let s1 = (1.0 - c1 * c1).sqrt();
            // |eta - xi1|^2 = h^2 (1 + r1^2 - 2 r1 c1)
            let o = qhat.value(h * ((1.0 - r1).powi(2) + 2.0 * r1 * (1.0 - c1)).sqrt())?;
            let mut row = ZERO;
            for (&c2, &w2) in g2.nodes.iter().zip(&g2.weights) {
                let s2 = (1.0 - c2 * c2).sqrt();
                let i = qhat.value(h * ((1.0 - r2).powi(2) + 2.0 * r2 * (1.0 + c2)).sqrt())?;
                let mut ring = ZERO;
                for &cd in &cosd {
                    let dot = c1 * c2 + s1 * s2 * cd;
                    let d2 = (big1 - big2).powi(2) + 2.0 * big1 * big2 * (1.0 - dot);
                    ring += qhat.value(d2.max(0.0).sqrt())?;
                }
                row += ring * i * w2;
            }
            acc += row * o * w1;
        }
        let w = 2.0 * PI * (2.0 * PI / m as f64) * big1 * big1 * big2 * big2;
        acc * w
    };
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::NonFinite(format!("S3 at |eta| = {eta_abs}")));
    }
    Ok(value * pref)
}

/// S_{j,r} for j in {2, 3}; `r_vec` holds j - 1 sphere parameters.
pub fn s_j_r(
    qhat: &RadialProfile,
    dim: usize,
    eta_abs: f64,
    r_vec: &[f64],
    radial: RadialQuad,
    s3: S3Quad,
) -> Result<Complex64> {
    match (r_vec.len() + 1, r_vec) {
        (2, [r]) => s_r(qhat, dim, eta_abs, *r, radial),
        (3, [r1, r2]) => s3_r(qhat, dim, eta_abs, *r1, *r2, s3),
        (j, _) => Err(Error::Unsupported(format!("S_j,r for j = {j}; only j = 2, 3 are evaluated"))),
    }
}

/// Closed form of S_r for q^(rho) = e^{-rho^2}: the sum |xi|^2 + |eta-xi|^2
/// equals (1+r^2)|eta|^2/2 on Gamma_r(eta), so the integrand is constant.
pub fn gaussian_s_r_closed_form(dim: usize, eta_abs: f64, r: f64) -> f64 {
    let area = crate::sphere::unit_sphere_area(dim) * (0.5 * r * eta_abs).powi(dim as i32 - 1);
    s_prefactor(eta_abs, r) * area * (-(1.0 + r * r) * eta_abs * eta_abs / 2.0).exp()
}

/// d/dr of [`gaussian_s_r_closed_form`].
pub fn gaussian_ds_r_closed_form(dim: usize, eta_abs: f64, r: f64) -> f64 {
    let n = dim as f64;
    let s = gaussian_s_r_closed_form(dim, eta_abs, r);
    s * ((n - 1.0) / r - 1.0 / (1.0 + r) - r * eta_abs * eta_abs)
}

/// Largest deviation of |xi|^2 + |eta-xi|^2 from (1+r^2)|eta|^2/2 over the
/// nodes of `quad` mapped onto Gamma_r(eta), relative to that value.
pub fn constancy_defect(quad: &SphereQuadrature, eta_abs: f64, r: f64) -> Result<f64> {
    let sph = EwaldSphere::radial(quad.dim, eta_abs, r)?;
    let target = (1.0 + r * r) * eta_abs * eta_abs / 2.0;
    Ok(quad
        .nodes
        .iter()
        .map(|th| {
            let xi = sph.point(th);
            let m = [eta_abs - xi[0], -xi[1], -xi[2]];
            let s = xi.iter().map(|v| v * v).sum::<f64>() + m.iter().map(|v| v * v).sum::<f64>();
            (s - target).abs() / target
        })
        .fold(0.0, f64::max))
}

/// S_r(q)(eta) tabulated over r at fixed eta.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionSample {
    pub eta_abs: f64,
    pub r_values: Vec<f64>,
    pub values: Vec<Complex64>,
    pub derivative_values: Option<Vec<Complex64>>,
}

impl DispersionSample {
    pub fn new(
        eta_abs: f64,
        r_values: Vec<f64>,
        values: Vec<Complex64>,
        derivative_values: Option<Vec<Complex64>>,
    ) -> Result<Self> {
        if !(eta_abs > 0.0) {
            return Err(Error::InvalidInput(format!("|eta| = {eta_abs}")));
        }
        if r_values.len() != values.len() || r_values.len() < 2 {
            return Err(Error::InvalidInput("need matching r and value arrays of length >= 2".into()));
        }
        if !r_values.windows(2).all(|w| w[1] > w[0]) || r_values[0] <= 0.0 {
            return Err(Error::InvalidInput("r values must be positive and strictly increasing".into()));
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidInput("dispersion values must be finite".into()));
        }
        if let Some(d) = &derivative_values {
            if d.len() != values.len() {
                return Err(Error::InvalidInput("derivative array length mismatch".into()));
            }
        }
        Ok(Self {
            eta_abs,
            r_values,
            values,
            derivative_values,
        })
    }

    /// Samples S_r(q)(eta) (and optionally its r-derivative) at `r_values`.
    pub fn tabulate(
        qhat: &RadialProfile,
        dim: usize,
        eta_abs: f64,
        r_values: Vec<f64>,
        with_derivative: bool,
        quad: RadialQuad,
    ) -> Result<Self> {
        let values = r_values
            .iter()
            .map(|&r| s_r(qhat, dim, eta_abs, r, quad))
            .collect::<Result<Vec<_>>>()?;
        let derivs = if with_derivative {
            Some(
                r_values
                    .iter()
                    .map(|&r| ds_r(qhat, dim, eta_abs, r, quad))
                    .collect::<Result<Vec<_>>>()?,
            )
        } else {
            None
        };
        Self::new(eta_abs, r_values, values, derivs)
    }

    /// CSV with columns eta_abs, r, re, im.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["eta_abs", "r", "re", "im"])?;
        for (r, v) in self.r_values.iter().zip(&self.values) {
            out.write_record([
                format!("{:e}", self.eta_abs),
                format!("{r:e}"),
                format!("{:e}", v.re),
                format!("{:e}", v.im),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["eta_abs", "r", "re", "im"] {
            return Err(Error::Parse(format!("unexpected header {headers:?}")));
        }
        let (mut eta, mut rs, mut vals) = (None, Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec[i]
                    .trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("{:?}: {e}", &rec[i])))
            };
            let e = num(0)?;
            if *eta.get_or_insert(e) != e {
                return Err(Error::Parse("mixed eta_abs values in one sample".into()));
            }
            rs.push(num(1)?);
            vals.push(Complex64::new(num(2)?, num(3)?));
        }
        Self::new(eta.unwrap_or(0.0), rs, vals, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{bessel_spectrum, gaussian_spectrum};
    use crate::sphere::quad_rule;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn gaussian_closed_form_anchor() {
        let v = s_r(&gaussian_spectrum(1.0), 2, 2.0, 1.0, RadialQuad::default()).unwrap();
        let exact = PI * (-4f64).exp();
        assert!(rel(gaussian_s_r_closed_form(2, 2.0, 1.0), exact) < 1e-15);
        assert!(rel(v.re, exact) < 1e-12);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn small_r_vanishes_like_sphere_measure() {
        let q = bessel_spectrum(1.0, 3).unwrap();
        let a = s_r(&q, 3, 4.0, 1e-3, RadialQuad::default()).unwrap().re;
        let b = s_r(&q, 3, 4.0, 2e-3, RadialQuad::default()).unwrap().re;
        assert!((b / a - 4.0).abs() < 0.02);
    }

    #[test]
    fn radial_and_full_paths_agree() {
        let q = bessel_spectrum(0.5, 3).unwrap();
        for dim in [2, 3] {
            let full = quad_rule(dim, 96).unwrap();
            for (eta, r) in [(1.0, 0.5), (3.0, 1.0), (2.0, 2.5)] {
                let a = s_r(&q, dim, eta, r, RadialQuad::default()).unwrap().re;
                let b = s_r_full(&q, eta, r, &full).unwrap().re;
                assert!(rel(a, b) < 1e-10, "dim {dim} eta {eta} r {r}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn bilinear_symmetry_and_diagonal() {
        let f = gaussian_spectrum(0.5);
        let g = bessel_spectrum(1.0, 2).unwrap();
        let q = RadialQuad::default();
        let fg = bilinear_s_r(&f, &g, 2, 3.0, 0.8, q).unwrap();
        let gf = bilinear_s_r(&g, &f, 2, 3.0, 0.8, q).unwrap();
        assert!((fg - gf).norm() <= 1e-12 * fg.norm());
        let d = bilinear_s_r(&g, &g, 2, 3.0, 0.8, q).unwrap();
        let s = s_r(&g, 2, 3.0, 0.8, q).unwrap();
        assert!((d - s).norm() <= 1e-12 * s.norm());
    }

    #[test]
    fn majorant_for_gaussian_is_tight() {
        let g = gaussian_spectrum(1.0);
        for r in [0.5, 1.0, 2.0] {
            let k = k_r(&g, &g, 3, 2.0, r, RadialQuad::default()).unwrap();
            let s = s_r(&g, 3, 2.0, r, RadialQuad::default()).unwrap().re;
            assert!(rel(k, (1.0 + r) / 2.0 * s) < 1e-12);
        }
    }

    #[test]
    fn derivative_coefficient_and_closed_form() {
        // ((n-2) r + (n-1)) / (r (1+r)^2) at n = 2, r = 1 is 1/4.
        let (n, r) = (2.0, 1.0);
        assert_eq!(((n - 2.0) * r + (n - 1.0)) / (r * (1.0f64 + r).powi(2)), 0.25);
        let g = gaussian_spectrum(1.0);
        for dim in [2, 3] {
            for r in [0.5, 1.0, 2.0] {
                let d = ds_r(&g, dim, 2.0, r, RadialQuad::default()).unwrap().re;
                let exact = gaussian_ds_r_closed_form(dim, 2.0, r);
                assert!(rel(d, exact) < 1e-10, "dim {dim} r {r}: {d} vs {exact}");
            }
        }
        assert!(ds_r(&crate::fields::RadialProfile::sampled_real(
            crate::fields::GridSpec1D::linear(0.0, 10.0, 11).unwrap(),
            &[1.0; 11]
        )
        .unwrap(), 2, 1.0, 1.0, RadialQuad::default())
        .is_err());
    }

    #[test]
    fn s3_scaling_and_j2_consistency() {
        let q = gaussian_spectrum(1.0);
        let quad = S3Quad::default_for(2);
        let a = s3_r(&q, 2, 2.0, 0.9, 1.2, quad).unwrap();
        let b = s3_r(&q.scaled(2.0), 2, 2.0, 0.9, 1.2, quad).unwrap();
        assert!((b - a * 8.0).norm() <= 1e-12 * b.norm());
        let j2 = s_j_r(&q, 2, 2.0, &[0.7], RadialQuad::default(), quad).unwrap();
        assert_eq!(j2, s_r(&q, 2, 2.0, 0.7, RadialQuad::default()).unwrap());
        assert!(s_j_r(&q, 2, 2.0, &[0.7, 1.0, 1.0], RadialQuad::default(), quad).is_err());
    }

    #[test]
    fn s3_self_convergence() {
        let q = gaussian_spectrum(1.0);
        let lo = s3_r(&q, 2, 2.0, 1.0, 0.8, S3Quad { orders: [32, 32, 1] }).unwrap();
        let hi = s3_r(&q, 2, 2.0, 1.0, 0.8, S3Quad { orders: [64, 64, 1] }).unwrap();
        assert!((lo - hi).norm() < 1e-6 * hi.norm());
        let lo3 = s3_r(&q, 3, 2.0, 1.0, 0.8, S3Quad { orders: [16, 16, 12] }).unwrap();
        let hi3 = s3_r(&q, 3, 2.0, 1.0, 0.8, S3Quad { orders: [24, 24, 16] }).unwrap();
        assert!((lo3 - hi3).norm() < 1e-6 * hi3.norm());
        assert!(lo3.re > 0.0);
    }

    #[test]
    fn sample_csv_round_trip() {
        let q = gaussian_spectrum(1.0);
        let s = DispersionSample::tabulate(&q, 2, 2.0, vec![0.5, 1.0, 1.5], false, RadialQuad::default())
            .unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = DispersionSample::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.r_values, s.r_values);
        for (a, b) in back.values.iter().zip(&s.values) {
            assert!((a - b).norm() <= 1e-15 * b.norm());
        }
        assert!(DispersionSample::new(1.0, vec![1.0, 0.5], vec![ZERO; 2], None).is_err());
    }
}
