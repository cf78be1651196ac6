use num_complex::Complex64;
use std::f64::consts::PI;

use super::grid::{forward_transform, inverse_transform, norm3, Field, SpectralField};
use crate::error::{Error, Result};

/// Japanese bracket <x> = (1 + |x|^2)^{1/2}.
pub fn bracket(r: f64) -> f64 {
    (1.0 + r * r).sqrt()
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} = {v}")))
    }
}

/// ||<x>^delta <D>^alpha f||_{L^2} for f given by its spectrum.
///
/// The multiplier <xi>^alpha is applied first; the physical weight <x>^delta
/// afterwards on the inverse transform. For delta = 0 the norm is evaluated
/// directly on the spectral side through Parseval.
pub fn sobolev_norm(spec: &SpectralField, alpha: f64, delta: f64) -> Result<f64> {
    check_finite("alpha", alpha)?;
    check_finite("delta", delta)?;
    let grid = *spec.grid();
    let weighted = spec.map(|xi, z| z * bracket(norm3(xi)).powf(alpha));
    if delta == 0.0 {
        let s: f64 = weighted.samples().iter().map(|z| z.norm_sqr()).sum();
        let n = grid.dim() as i32;
        return Ok((s * grid.dual_cell_volume() / (2.0 * PI).powi(n)).sqrt());
    }
    let f = inverse_transform(&weighted)?;
    Ok(f.map(|x, z| z * bracket(norm3(x)).powf(delta)).l2_norm())
}

/// [`sobolev_norm`] for a physical-side field.
pub fn sobolev_norm_field(f: &Field, alpha: f64, delta: f64) -> Result<f64> {
    sobolev_norm(&forward_transform(f)?, alpha, delta)
}

/// (-Delta)^{beta/2}: multiplies the spectrum by |xi|^beta.
pub fn fractional_laplacian(f: &Field, beta: f64) -> Result<Field> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidInput(format!("beta must be >= 0, got {beta}")));
    }
    if beta == 0.0 {
        return Ok(f.clone());
    }
    let spec = forward_transform(f)?;
    let scaled = spec.map(|xi, z| {
        let r = norm3(xi);
        if r == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            z * r.powf(beta)
        }
    });
    inverse_transform(&scaled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::grid::CartesianGrid;
    use crate::quadrature::{integrate_real, Adaptive};

    fn gaussian(grid: CartesianGrid) -> Field {
        Field::from_real_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 2.0).exp()).unwrap()
    }

    #[test]
    fn alpha_zero_delta_zero_is_l2() {
        let grid = CartesianGrid::new(2, 10.0, 64).unwrap();
        let f = gaussian(grid);
        let s = sobolev_norm_field(&f, 0.0, 0.0).unwrap();
        assert!((s - f.l2_norm()).abs() < 1e-12 * s);
    }

    #[test]
    fn weighted_norm_with_zero_alpha_matches_direct_weighting() {
        let grid = CartesianGrid::new(2, 10.0, 64).unwrap();
        let f = gaussian(grid);
        let direct = f.map(|x, z| z * bracket(norm3(x))).l2_norm();
        let s = sobolev_norm_field(&f, 0.0, 1.0).unwrap();
        assert!((s - direct).abs() < 1e-10 * direct);
    }

    #[test]
    fn indicator_spectrum_matches_radial_oracle() {
        // F = 1 on |xi| <= 1; ||<D> f||^2 = (2 pi)^{-2} int_{|xi|<=1} <xi>^2 dxi.
        let grid = CartesianGrid::new(2, 200.0, 512).unwrap();
        let spec = SpectralField::from_real_fn(grid, |xi| if norm3(xi) <= 1.0 { 1.0 } else { 0.0 }).unwrap();
        let (radial, _, _) =
            integrate_real(|r| 2.0 * PI * r * (1.0 + r * r), &[0.0, 1.0], Adaptive::default()).unwrap();
        let expected = radial.sqrt() / (2.0 * PI);
        let got = sobolev_norm(&spec, 1.0, 0.0).unwrap();
        assert!((got - expected).abs() / expected < 5e-3, "{got} vs {expected}");
    }

    #[test]
    fn homogeneity() {
        let grid = CartesianGrid::new(2, 8.0, 32).unwrap();
        let f = gaussian(grid);
        let a = sobolev_norm_field(&f, 1.3, 0.5).unwrap();
        let b = sobolev_norm_field(&f.scale(Complex64::new(-3.0, 4.0)), 1.3, 0.5).unwrap();
        assert!((b - 5.0 * a).abs() < 1e-12 * b);
    }

    #[test]
    fn laplacian_of_gaussian() {
        let grid = CartesianGrid::new(2, 12.0, 128).unwrap();
        let f = gaussian(grid);
        let lap = fractional_laplacian(&f, 2.0).unwrap();
        let worst = lap
            .samples()
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let x = grid.position(i);
                let r2 = x[0] * x[0] + x[1] * x[1];
                (z - Complex64::new((2.0 - r2) * (-r2 / 2.0).exp(), 0.0)).norm()
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn zero_order_is_identity_and_orders_compose() {
        let grid = CartesianGrid::new(2, 8.0, 64).unwrap();
        let f = gaussian(grid);
        assert_eq!(fractional_laplacian(&f, 0.0).unwrap(), f);
        let two_step = fractional_laplacian(&fractional_laplacian(&f, 0.7).unwrap(), 0.3).unwrap();
        let one_step = fractional_laplacian(&f, 1.0).unwrap();
        let diff = two_step
            .samples()
            .iter()
            .zip(one_step.samples())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-10 * one_step.max_abs());
        assert!(fractional_laplacian(&f, -1.0).is_err());
    }
}
