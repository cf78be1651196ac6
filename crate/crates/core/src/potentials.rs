//! Test potentials: a compactly supported bump, its autoconvolution, the
//! Bessel-potential spectra <xi>^{-n/2-beta}, Gaussian oracle profiles and
//! the compactly supported counterexample g_beta = (phi * phi) G_beta.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{
    bracket, fit_decay, forward_transform, inverse_transform, norm3, CartesianGrid, DecayFit,
    Field, GridSpec1D, RadialProfile, SpectralField,
};
use crate::quadrature::{graded_breakpoints, integrate_real, Adaptive};
use crate::sphere::unit_sphere_area;

/// Which closed form or construction a potential is built from.
#[derive(Debug, Clone)]
pub enum PotentialKind {
    Gaussian { a: f64 },
    BesselPower { beta: f64 },
    GBeta { beta: f64, bump_scale: f64 },
    CustomSampled(Box<RadialProfile>),
}

#[derive(Debug, Clone)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub dim: usize,
}

impl PotentialSpec {
    pub fn new(kind: PotentialKind, dim: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::Unsupported(format!("dimension {dim}")));
        }
        match &kind {
            PotentialKind::Gaussian { a } if !(*a > 0.0 && a.is_finite()) => {
                return Err(Error::InvalidInput(format!("gaussian width a = {a} must be > 0")));
            }
            PotentialKind::BesselPower { beta } | PotentialKind::GBeta { beta, .. }
                if !(*beta > 0.0 && beta.is_finite()) =>
            {
                return Err(Error::InvalidInput(format!("beta = {beta} must be > 0")));
            }
            PotentialKind::GBeta { bump_scale, .. } if !(*bump_scale > 0.0) => {
                return Err(Error::InvalidInput(format!("bump_scale = {bump_scale}")));
            }
            _ => {}
        }
        Ok(Self { kind, dim })
    }

    /// The radial spectrum q^(rho) of the potential.
    ///
    /// g_beta is built on `default_g_beta_grid`, which can take a few seconds.
    pub fn spectrum(&self) -> Result<RadialProfile> {
        match &self.kind {
            PotentialKind::Gaussian { a } => Ok(gaussian_spectrum(*a)),
            PotentialKind::BesselPower { beta } => bessel_spectrum(*beta, self.dim),
            PotentialKind::GBeta { beta, bump_scale } => {
                let grid = default_g_beta_grid(self.dim)?;
                Ok(make_g_beta(*beta, *bump_scale, grid)?.profile)
            }
            PotentialKind::CustomSampled(p) => Ok((**p).clone()),
        }
    }
}

/// Nodes on which analytic profiles are tabulated: 0, then 40 per decade
/// from 1e-3 to 1e4.
pub fn default_tabulation() -> GridSpec1D {
    let mut nodes = vec![0.0];
    let per_decade = 40;
    for k in 0..=(7 * per_decade) {
        nodes.push(10f64.powf(-3.0 + k as f64 / per_decade as f64));
    }
    GridSpec1D::irregular(nodes).expect("static tabulation grid is increasing")
}

/// q^(rho) = e^{-a rho^2}, with its derivative.
pub fn gaussian_spectrum(a: f64) -> RadialProfile {
    RadialProfile::analytic(
        default_tabulation(),
        true,
        Arc::new(move |r: f64| {
            let v = (-a * r * r).exp();
            (Complex64::new(v, 0.0), Some(Complex64::new(-2.0 * a * r * v, 0.0)))
        }),
    )
    .expect("gaussian profile is finite")
}

/// G^_beta(rho) = <rho>^{-n/2-beta}, with its derivative.
pub fn bessel_spectrum(beta: f64, dim: usize) -> Result<RadialProfile> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidInput(format!("beta = {beta} must be > 0")));
    }
    let s = dim as f64 / 2.0 + beta;
    RadialProfile::analytic(
        default_tabulation(),
        true,
        Arc::new(move |r: f64| {
            let b2 = 1.0 + r * r;
            let v = b2.powf(-s / 2.0);
            (Complex64::new(v, 0.0), Some(Complex64::new(-s * r * v / b2, 0.0)))
        }),
    )
}

/// e^{-1/(1-|x/scale|^2)} inside the ball of radius `scale`, zero outside.
pub fn bump_value(scale: f64, r: f64) -> f64 {
    let t = r / scale;
    if t >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// Samples the radial bump of the given support radius on `grid`.
pub fn make_bump(scale: f64, grid: CartesianGrid) -> Result<Field> {
    if !(scale > 0.0 && scale < grid.half_extent()) {
        return Err(Error::InvalidInput(format!(
            "bump scale {scale} must lie in (0, {})",
            grid.half_extent()
        )));
    }
    Field::from_real_fn(grid, |x| bump_value(scale, norm3(x)))
}

/// Largest |x| at which the field is nonzero.
fn support_radius(f: &Field) -> f64 {
    let grid = f.grid();
    f.samples()
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > 0.0)
        .map(|(i, _)| norm3(&grid.position(i)))
        .fold(0.0, f64::max)
}

/// phi * phi through the grid transform. Its spectrum is phi^2, which is
/// nonnegative for real even phi.
pub fn bump_autoconv(phi: &Field) -> Result<Field> {
    if phi.imaginary_fraction() > 0.0 {
        return Err(Error::InvalidInput("autoconvolution expects a real field".into()));
    }
    let grid = *phi.grid();
    let reach = support_radius(phi);
    if 2.0 * reach > grid.half_extent() {
        return Err(Error::InvalidInput(format!(
            "support radius {reach} too large: phi * phi would wrap around the periodic grid"
        )));
    }
    let spec = forward_transform(phi)?;
    let sq = spec.map(|_, z| z * z);
    let conv = inverse_transform(&sq)?;
    // Strip rounding noise in the imaginary part and outside the support.
    let limit = 2.0 * reach + grid.spacing() * 1e-9;
    Ok(conv.map(|x, z| {
        if norm3(x) > limit {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(z.re, 0.0)
        }
    }))
}

/// Modified Bessel function K_nu(r) for r > 0, from
/// K_nu(r) = int_0^inf e^{-r cosh t} cosh(nu t) dt.
pub fn bessel_k(nu: f64, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!("bessel_k needs r > 0, got {r}")));
    }
    let nu = nu.abs();
    // Past t_max the integrand is below e^{-80} of its peak.
    let mut t_max = (2.0 * (80.0 / r).max(1.0)).ln().max(1.0);
    t_max += nu * t_max / r.max(1.0);
    let peak = if nu > r { (nu / r).asinh() } else { 0.0 };
    let mut breaks = vec![0.0];
    if peak > 0.0 && peak < t_max {
        breaks.push(peak);
    }
    breaks.push(t_max);
    // e^{-r} is factored out so large r stays representable.
    let (v, _, ok) = integrate_real(
        |t| (-r * (t.cosh() - 1.0)).exp() * (nu * t).cosh(),
        &breaks,
        Adaptive {
            rel_tol: 1e-13,
            ..Adaptive::default()
        },
    )?;
    if !ok {
        return Err(Error::Convergence(format!("K_{nu}({r})")));
    }
    Ok(v * (-r).exp())
}

/// Bessel-potential kernel G_beta(r), the inverse transform of
/// <xi>^{-n/2-beta}:
/// (2 pi)^{-n/2} 2^{1-s/2} / Gamma(s/2) r^{(s-n)/2} K_{(n-s)/2}(r), s = n/2+beta.
pub fn bessel_kernel(beta: f64, dim: usize, r: f64) -> Result<f64> {
    let n = dim as f64;
    let s = n / 2.0 + beta;
    let c = (2.0 * PI).powf(-n / 2.0) * 2f64.powf(1.0 - s / 2.0) / libm::tgamma(s / 2.0);
    Ok(c * r.powf((s - n) / 2.0) * bessel_k((n - s) / 2.0, r)?)
}

/// Mean of G_beta over the ball of radius eps (the kernel is singular at 0).
fn kernel_ball_average(beta: f64, dim: usize, eps: f64) -> Result<f64> {
    let area = unit_sphere_area(dim);
    let nd = dim as i32;
    let breaks = graded_breakpoints(0.0, eps, eps * 1e-12);
    let mut err = None;
    let (v, _, _) = integrate_real(
        |r| {
            if r == 0.0 {
                return 0.0;
            }
            match bessel_kernel(beta, dim, r) {
                Ok(g) => g * area * r.powi(nd - 1),
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            }
        },
        &breaks,
        Adaptive {
            rel_tol: 1e-10,
            ..Adaptive::default()
        },
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(v / (area * eps.powi(nd) / dim as f64))
}

/// The counterexample potential and its spectrum.
#[derive(Debug, Clone)]
pub struct GBeta {
    pub beta: f64,
    pub dim: usize,
    pub bump_scale: f64,
    /// g_beta sampled on the grid (the kernel's origin singularity is
    /// replaced by its mean over a ball of one cell volume).
    pub field: Field,
    /// g^_beta at the grid frequencies, interpolated from `profile`.
    pub spectrum: SpectralField,
    /// Radial table of g^_beta, reaching beyond the grid Nyquist.
    pub profile: RadialProfile,
    /// Support radius of phi * phi, outside which g_beta vanishes.
    pub support_radius: f64,
}

impl GBeta {
    pub fn predicted_exponent(&self) -> f64 {
        self.dim as f64 / 2.0 + self.beta
    }

    /// Decay fit of the radial table. Fails with an insufficient-resolution
    /// diagnostic when the fit is visibly curved (residual above 0.02 in log)
    /// or misses the predicted exponent by more than 0.1.
    pub fn spectral_fit(&self, window: [f64; 2]) -> Result<DecayFit> {
        let fit = fit_decay(&self.profile, window)?;
        let miss = (fit.exponent - self.predicted_exponent()).abs();
        if fit.residual_rms > 0.02 || miss > 0.1 {
            return Err(Error::InsufficientResolution {
                message: format!(
                    "decay over [{}, {}] not asymptotic: exponent {:.4} vs {:.4}",
                    window[0],
                    window[1],
                    fit.exponent,
                    self.predicted_exponent()
                ),
                residual: fit.residual_rms,
            });
        }
        Ok(fit)
    }

    /// Smallest tabulated rho beyond which the spectrum is nonincreasing.
    pub fn monotone_from(&self) -> f64 {
        let nodes = self.profile.grid().nodes();
        let v = self.profile.values();
        let mut start = nodes.len() - 1;
        while start > 0 && v[start - 1].re >= v[start].re {
            start -= 1;
        }
        nodes[start]
    }

    /// Most negative spectrum value relative to the maximum (0 if none).
    pub fn negativity(&self) -> f64 {
        let max = self.profile.values().iter().map(|z| z.re).fold(0.0, f64::max);
        let min = self.profile.values().iter().map(|z| z.re).fold(0.0, f64::min);
        (-min).max(0.0) / max
    }
}

/// A grid adequate for `make_g_beta` with bump scale up to 2: 512^2 on
/// [-16, 16)^2 or 128^3 on [-8, 8)^3.
pub fn default_g_beta_grid(dim: usize) -> Result<CartesianGrid> {
    match dim {
        2 => CartesianGrid::new(2, 16.0, 512),
        3 => CartesianGrid::new(3, 8.0, 128),
        _ => Err(Error::Unsupported(format!("dimension {dim}"))),
    }
}

fn g_beta_table_nodes(rho_max: f64) -> Result<GridSpec1D> {
    let mut nodes: Vec<f64> = (0..20).map(|k| k as f64 * 0.05).collect();
    let per_decade = 48.0;
    let count = (rho_max.log10() * per_decade).ceil() as usize;
    for k in 0..=count {
        nodes.push(10f64.powf(k as f64 / per_decade));
    }
    GridSpec1D::irregular(nodes)
}

/// Builds g_beta = (phi * phi) G_beta with phi the bump of radius
/// `bump_scale`.
///
/// The spectrum is the convolution (2 pi)^{-n} (phi^)^2 * G^_beta, evaluated
/// as a trapezoid sum over the dual grid. The summand is smooth and its
/// inverse transform is concentrated within 2 * bump_scale of the origin, so
/// the sum converges spectrally while 2 * bump_scale stays below the grid
/// half-extent; the result is nonnegative by construction.
pub fn make_g_beta(beta: f64, bump_scale: f64, grid: CartesianGrid) -> Result<GBeta> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidInput(format!("beta = {beta} must be > 0")));
    }
    let dim = grid.dim();
    if 2.0 * bump_scale > grid.half_extent() {
        return Err(Error::InvalidInput(format!(
            "bump scale {bump_scale} needs half-extent >= {}",
            2.0 * bump_scale
        )));
    }
    if bump_scale < 4.0 * grid.spacing() {
        return Err(Error::InsufficientResolution {
            message: format!("bump scale {bump_scale} spans fewer than 4 cells"),
            residual: f64::NAN,
        });
    }
    let phi = make_bump(bump_scale, grid)?;
    let phi_hat = forward_transform(&phi)?;
    let psi = bump_autoconv(&phi)?;

    // Weights (2 pi)^{-n} dxi^n |phi^|^2 at the significant dual nodes.
    let norm = grid.dual_cell_volume() / (2.0 * PI).powi(dim as i32);
    let max_sq = phi_hat.max_abs().powi(2);
    let terms: Vec<([f64; 3], f64)> = phi_hat
        .samples()
        .iter()
        .enumerate()
        .filter_map(|(i, z)| {
            let w = z.norm_sqr();
            (w > 1e-30 * max_sq).then(|| (grid.frequency(i), w * norm))
        })
        .collect();
    let s = dim as f64 / 2.0 + beta;
    let rho_max = (grid.nyquist() * (dim as f64).sqrt()).max(512.0);
    let table = g_beta_table_nodes(rho_max)?;
    let values: Vec<f64> = table
        .nodes()
        .par_iter()
        .map(|&rho| {
            terms
                .iter()
                .map(|(z, w)| {
                    let d2 = (rho - z[0]).powi(2) + z[1] * z[1] + z[2] * z[2];
                    w * (1.0 + d2).powf(-s / 2.0)
                })
                .sum()
        })
        .collect();
    let profile = RadialProfile::sampled_real(table, &values)?;
    let spectrum = SpectralField::from_fn(grid, |xi| {
        profile.value(norm3(xi)).expect("table covers the grid frequencies")
    })?;

    let support = 2.0 * support_radius(&phi);
    let eps = (grid.cell_volume() * dim as f64 / unit_sphere_area(dim)).powf(1.0 / dim as f64);
    let origin = kernel_ball_average(beta, dim, eps)?;
    let samples: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let p = psi.samples()[i].re;
            if p == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let r = norm3(&grid.position(i));
            let g = if r == 0.0 { origin } else { bessel_kernel(beta, dim, r)? };
            Ok(Complex64::new(p * g, 0.0))
        })
        .collect::<Result<_>>()?;
    let field = Field::new(grid, samples)?;
    Ok(GBeta {
        beta,
        dim,
        bump_scale,
        field,
        spectrum,
        profile,
        support_radius: support,
    })
}

/// Fit window start suggested for g_beta: 8 / bump_scale, never below 8.
pub fn g_beta_window_start(bump_scale: f64) -> f64 {
    (8.0 / bump_scale).max(8.0)
}

/// <rho>^{-s} for use in tests and reports.
pub fn bracket_power(rho: f64, s: f64) -> f64 {
    bracket(rho).powf(-s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_values() {
        assert!((bump_value(1.5, 0.0) - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(bump_value(1.5, 1.5), 0.0);
        assert_eq!(bump_value(1.5, 2.0), 0.0);
        let grid = CartesianGrid::new(2, 2.0, 16).unwrap();
        assert!(make_bump(2.0, grid).is_err());
        assert!(make_bump(1.0, grid).is_ok());
    }

    #[test]
    fn bump_spectrum_is_real_and_even() {
        let grid = CartesianGrid::new(2, 4.0, 64).unwrap();
        let phi = make_bump(1.5, grid).unwrap();
        let spec = forward_transform(&phi).unwrap();
        assert!(spec.imaginary_fraction() < 1e-12);
        assert!(spec.hermitian_defect() < 1e-12);
    }

    #[test]
    fn autoconvolution_properties() {
        let grid = CartesianGrid::new(2, 4.0, 64).unwrap();
        let phi = make_bump(1.0, grid).unwrap();
        let psi = bump_autoconv(&phi).unwrap();
        let center = grid.flatten(&[32, 32]);
        let norm2 = phi.l2_norm().powi(2);
        assert!((psi.samples()[center].re - norm2).abs() < 1e-12 * norm2);
        let spec = forward_transform(&psi).unwrap();
        let max = spec.max_abs();
        assert!(spec.samples().iter().all(|z| z.re >= -1e-12 * max));
    }

    #[test]
    fn autoconvolution_matches_direct_sum() {
        let grid = CartesianGrid::new(2, 2.0, 32).unwrap();
        let phi = make_bump(0.9, grid).unwrap();
        let psi = bump_autoconv(&phi).unwrap();
        let h2 = grid.cell_volume();
        let n = grid.points_per_axis();
        let at = |i: isize, j: isize| -> f64 {
            if i < 0 || j < 0 || i >= n as isize || j >= n as isize {
                0.0
            } else {
                phi.samples()[grid.flatten(&[i as usize, j as usize])].re
            }
        };
        let half = (n / 2) as isize;
        let mut worst: f64 = 0.0;
        for a in 0..n as isize {
            for b in 0..n as isize {
                let mut s = 0.0;
                for i in 0..n as isize {
                    for j in 0..n as isize {
                        s += at(i, j) * at(a - i + half, b - j + half);
                    }
                }
                let got = psi.samples()[grid.flatten(&[a as usize, b as usize])].re;
                worst = worst.max((got - s * h2).abs());
                let x = grid.position(grid.flatten(&[a as usize, b as usize]));
                if norm3(&x) > 1.8 {
                    assert!(got.abs() < 1e-12);
                }
            }
        }
        assert!(worst < 1e-13, "{worst}");
    }

    #[test]
    fn gaussian_and_bessel_profiles() {
        let g = gaussian_spectrum(1.0);
        assert_eq!(g.value(0.0).unwrap().re, 1.0);
        assert!((g.value(2.0).unwrap().re - (-4f64).exp()).abs() < 1e-16);
        assert!((g.derivative(1.0).unwrap().re + 2.0 * (-1f64).exp()).abs() < 1e-15);
        let b = bessel_spectrum(0.5, 3).unwrap();
        assert_eq!(b.value(0.0).unwrap().re, 1.0);
        assert!((b.value(3f64.sqrt()).unwrap().re - 0.25).abs() < 1e-15);
        let fit = fit_decay(&b, [8.0, 128.0]).unwrap();
        assert!((fit.exponent - 2.0).abs() < 0.02);
        assert!(bessel_spectrum(0.0, 3).is_err());
        let v = b.values();
        assert!(v.windows(2).all(|w| w[1].re < w[0].re));
    }

    #[test]
    fn bessel_k_reference_values() {
        // K_{1/2}(r) = sqrt(pi / (2r)) e^{-r}
        for r in [0.01, 0.5, 3.0, 40.0] {
            let exact = (PI / (2.0 * r)).sqrt() * (-r).exp();
            let got = bessel_k(0.5, r).unwrap();
            assert!((got - exact).abs() < 1e-12 * exact, "r = {r}");
        }
        // K_0(1) and K_1(2) from tables.
        assert!((bessel_k(0.0, 1.0).unwrap() - 0.421_024_438_240_708_3).abs() < 1e-13);
        assert!((bessel_k(1.0, 2.0).unwrap() - 0.139_865_881_816_522_4).abs() < 1e-13);
    }

    #[test]
    fn kernel_matches_yukawa_in_three_dimensions() {
        for r in [0.1f64, 1.0, 5.0] {
            let exact = (-r).exp() / (4.0 * PI * r);
            let got = bessel_kernel(0.5, 3, r).unwrap();
            assert!((got - exact).abs() < 1e-12 * exact);
        }
    }

    #[test]
    fn spec_validation() {
        assert!(PotentialSpec::new(PotentialKind::Gaussian { a: 0.0 }, 2).is_err());
        assert!(PotentialSpec::new(PotentialKind::BesselPower { beta: -1.0 }, 2).is_err());
        assert!(PotentialSpec::new(PotentialKind::BesselPower { beta: 1.0 }, 4).is_err());
        let p = PotentialSpec::new(PotentialKind::Gaussian { a: 1.0 }, 3).unwrap();
        assert_eq!(p.spectrum().unwrap().value(0.0).unwrap().re, 1.0);
    }
}
