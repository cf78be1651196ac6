//! Born series through second order for the Bessel potential, the high
//! frequency residual and its measured smoothing gain.
//!
//! cargo run --release --example born_residual -- [beta]

use backscatter::born::{born_approx, BornSchemes, CutoffSpec};
use backscatter::fields::GridSpec1D;
use backscatter::potentials::bessel_spectrum;
use backscatter::regularity::smoothing_check;

fn main() -> backscatter::Result<()> {
    let beta: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let q = bessel_spectrum(beta, 2)?;
    let grid = GridSpec1D::logarithmic(8.0, 512.0, 24)?;
    let born = born_approx(&q, 2, &grid, 2, &CutoffSpec::default(), &BornSchemes::default())?;

    println!("{:>9} {:>12} {:>12} {:>12}", "|eta|", "|q^|", "|Q2^|", "|residual|");
    for (k, eta) in grid.nodes().iter().enumerate().step_by(4) {
        println!(
            "{eta:>9.2} {:>12.4e} {:>12.4e} {:>12.4e}",
            born.qhat[k].norm(),
            born.q2hat[k].norm(),
            born.residual_hat[k].norm()
        );
    }
    let entry = smoothing_check(&born, 2, beta, [8.0, 512.0])?;
    println!("\n{}: {}", entry.quantity, entry.criterion);
    if let Some(label) = &entry.label {
        println!("label: {label}");
    }
    Ok(())
}
