//! The dispersion operators S_r and their r-derivative, checked against
//! the Gaussian closed forms, plus one value of the trilinear S3.
//!
//! cargo run --release --example dispersion_operators

use backscatter::dispersion::{
    ds_r, gaussian_ds_r_closed_form, gaussian_s_r_closed_form, s3_r, s_r, DispersionSample, RadialQuad, S3Quad,
};
use backscatter::potentials::{bessel_spectrum, gaussian_spectrum};

fn main() -> backscatter::Result<()> {
    let q = gaussian_spectrum(1.0);
    let quad = RadialQuad::default();
    println!("{:>3} {:>5} {:>5} {:>22} {:>10} {:>10}", "n", "|eta|", "r", "S_r", "rel err", "dS rel err");
    for n in [2, 3] {
        for eta in [1.0, 8.0] {
            for r in [0.5, 1.0, 2.0] {
                let s = s_r(&q, n, eta, r, quad)?.re;
                let d = ds_r(&q, n, eta, r, quad)?.re;
                let se = gaussian_s_r_closed_form(n, eta, r);
                let de = gaussian_ds_r_closed_form(n, eta, r);
                println!(
                    "{n:>3} {eta:>5} {r:>5} {s:>22.15e} {:>10.1e} {:>10.1e}",
                    ((s - se) / se).abs(),
                    ((d - de) / de).abs()
                );
            }
        }
    }

    // a tabulated family in r, the input the principal-value stage consumes
    let qb = bessel_spectrum(1.0, 2)?;
    let sample = DispersionSample::tabulate(&qb, 2, 32.0, vec![0.25, 0.5, 1.0, 2.0, 4.0], true, quad)?;
    println!("\nS_r(q_beta)(32), n = 2, beta = 1:");
    for (r, v) in sample.r_values.iter().zip(&sample.values) {
        println!("  r = {r:<5} {:.6e}", v.re);
    }

    let t = s3_r(&q, 2, 2.0, 1.0, 1.0, S3Quad::default_for(2))?;
    println!("\nS3 at (r1, r2) = (1, 1), |eta| = 2, n = 2: {t:.10e}");
    Ok(())
}
