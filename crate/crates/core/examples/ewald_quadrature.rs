//! Geometry of the Ewald spheres Gamma_r(eta) and integration over them.
//! The full surface quadrature and the radial reduction must agree.
//!
//! cargo run --release --example ewald_quadrature

use backscatter::dispersion::{constancy_defect, s_r, s_r_full, RadialQuad};
use backscatter::potentials::gaussian_spectrum;
use backscatter::sphere::{check_singular_bound, integrate_ewald, quad_rule, unit_sphere_area, EwaldSphere};
use num_complex::Complex64;

fn main() -> backscatter::Result<()> {
    let sph = EwaldSphere::new(3, [0.0, 0.0, 4.0], 0.5)?;
    println!("eta = {:?}, r = {}", sph.eta(), sph.r());
    println!("centre {:?}, radius {}, area {:.6}", sph.center(), sph.radius(), sph.area());

    // The constant function integrates to the area
    let quad = quad_rule(3, 24)?;
    let area = integrate_ewald(&sph, |_| Ok(Complex64::new(1.0, 0.0)), &quad)?;
    println!("quadrature area {:.12} vs {:.12}", area.re, sph.area());
    println!("|S^2| = {:.12}", unit_sphere_area(3));

    // |xi|^2 + |eta - xi|^2 is not constant on Gamma_r unless r = 1
    for r in [0.5, 1.0, 2.0] {
        println!("r = {r}: constancy defect {:.2e}", constancy_defect(&quad, 4.0, r)?);
    }

    let q = gaussian_spectrum(1.0);
    for dim in [2, 3] {
        let rule = quad_rule(dim, 48)?;
        for r in [0.5, 1.0] {
            let reduced = s_r(&q, dim, 3.0, r, RadialQuad::default())?;
            let full = s_r_full(&q, 3.0, r, &rule)?;
            println!(
                "n = {dim}, r = {r}: radial reduction {:.12e}, surface rule {:.12e}",
                reduced.re, full.re
            );
        }
    }

    // the weakly singular kernel stays bounded as x approaches the sphere
    for a in [0.5, 0.9, 0.99, 1.0, 1.01, 2.0] {
        let b = check_singular_bound(3, 0.5, 1.0, &[a, 0.0, 0.0])?;
        println!("|x|/rho = {a}: ratio {:.8}", b.ratio);
    }
    Ok(())
}
