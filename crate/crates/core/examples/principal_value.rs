//! Principal values int_0^inf F(r) / (1 - r) dr with the two near-singular
//! schemes, compared with an independent adaptive reference, and the
//! composite operator (i pi delta + P) applied to a dispersion family.
//!
//! cargo run --release --example principal_value

use backscatter::born::q2_hat;
use backscatter::dispersion::{s_r, RadialQuad};
use backscatter::potentials::bessel_spectrum;
use backscatter::pv::{pv_part, pv_reference, NearScheme, PVScheme};
use num_complex::Complex64;

fn main() -> backscatter::Result<()> {
    // PV int (1 - r) e^{-r} / (1 - r) dr = int e^{-r} dr = 1
    let cancel = |r: f64| Ok(Complex64::new((1.0 - r) * (-r).exp(), 0.0));
    let bump = |r: f64| Ok(Complex64::new((-(r - 1.3).powi(2) * 4.0).exp(), 0.0));

    for (name, f) in [("cancel", &cancel as &dyn backscatter::pv::Family), ("bump", &bump)] {
        let reference = pv_reference(f, 64.0, 1e-12)?;
        for near in [NearScheme::SymmetricReflection, NearScheme::TaylorSubtraction] {
            let scheme = PVScheme { near_scheme: near, ..PVScheme::default() };
            let out = pv_part(f, &scheme)?;
            println!(
                "{name:>6} {near:?}: {:.14} (reference {:.14}), error estimate {:.1e}, smoothness ratio {:?}, {} evaluations",
                out.value.re, reference.re, out.error_estimate, out.smoothness_ratio, out.evaluations
            );
        }
    }

    // Q2 for the Bessel potential; its imaginary part is pi S_1
    let q = bessel_spectrum(1.0, 2)?;
    for eta in [8.0, 64.0] {
        let out = q2_hat(&q, 2, eta, &PVScheme::default(), RadialQuad::default())?;
        let s1 = s_r(&q, 2, eta, 1.0, RadialQuad::default())?.re;
        println!(
            "|eta| = {eta}: Q2 = {:.6e} + {:.6e} i, pi S_1 = {:.6e}, tail bound {:.1e}",
            out.value.re,
            out.value.im,
            std::f64::consts::PI * s1,
            out.tail_bound
        );
    }
    Ok(())
}
