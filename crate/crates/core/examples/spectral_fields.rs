//! Fourier conventions on a Cartesian grid: transform a Gaussian, compare
//! with its exact spectrum, then measure Sobolev norms and a decay exponent.
//!
//! cargo run --release --example spectral_fields

use backscatter::fields::{
    fit_decay, forward_transform, fractional_laplacian, inverse_transform, radial_average, sobolev_norm, CartesianGrid,
    Field,
};
use backscatter::potentials::bessel_spectrum;
use num_complex::Complex64;
use std::f64::consts::PI;

fn main() -> backscatter::Result<()> {
    let grid = CartesianGrid::new(2, 8.0, 128)?;
    let f = Field::from_real_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp())?;
    let spec = forward_transform(&f)?;

    // f^(xi) = 2 pi exp(-|xi|^2 / 2) in two dimensions
    let worst = (0..grid.len())
        .map(|i| {
            let xi = grid.frequency(i);
            let exact = 2.0 * PI * (-(xi[0] * xi[0] + xi[1] * xi[1]) / 2.0).exp();
            (spec.samples()[i] - Complex64::new(exact, 0.0)).norm()
        })
        .fold(0.0, f64::max);
    println!("max |f^ - exact| on the dual grid: {worst:.2e}");
    println!(
        "Parseval: |f|_2 = {:.12}, spectral side = {:.12}",
        f.l2_norm(),
        spec.l2_norm_physical()
    );
    let back = inverse_transform(&spec)?;
    let round = f.samples().iter().zip(back.samples()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    println!("round trip error: {round:.2e}");

    for alpha in [0.0, 1.0, 2.0] {
        println!("H^{alpha} norm: {:.8}", sobolev_norm(&spec, alpha, 0.0)?);
    }
    let lap = fractional_laplacian(&f, 2.0)?;
    // (-Delta) exp(-|x|^2/2) = (2 - |x|^2) exp(-|x|^2/2); check at the origin
    let centre = (0..grid.len()).find(|&i| grid.position(i) == [0.0, 0.0, 0.0]).unwrap();
    println!("(-Delta) f at the origin: {:.10} (exact 2)", lap.samples()[centre].re);

    let shells = radial_average(&spec)?;
    println!("shell-averaged spectrum has {} bins", shells.grid().count());

    // Bessel-potential spectrum <xi>^{-(n/2+beta)}: decay exponent recovered by a log-log fit
    let q = bessel_spectrum(1.0, 2)?;
    let fit = fit_decay(&q, [8.0, 512.0])?;
    println!("q_beta spectrum, n = 2, beta = 1: fitted exponent {:.4} (expected 2)", fit.exponent);
    Ok(())
}
