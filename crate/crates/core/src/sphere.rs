//! Ewald spheres, surface quadrature on spheres, and numerical checks of
//! two sphere inequalities: the bound on integrals of |x - y|^{-(n-1)+2 lambda}
//! over spheres and the unit-constant trace inequality.

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_real, Adaptive, GaussLegendre};

/// Surface measure of the unit sphere S^{n-1}.
pub fn unit_sphere_area(dim: usize) -> f64 {
    2.0 * PI.powf(dim as f64 / 2.0) / libm::tgamma(dim as f64 / 2.0)
}

fn check_dim(dim: usize) -> Result<()> {
    if (2..=3).contains(&dim) {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("dimension {dim}")))
    }
}

/// Gamma_r(eta): centre eta/2, radius r|eta|/2. Vectors are padded to three
/// components; in radial form eta points along the first axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EwaldSphere {
    dim: usize,
    eta: [f64; 3],
    r: f64,
}

impl EwaldSphere {
    pub fn new(dim: usize, eta: [f64; 3], r: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidInput(format!("sphere parameter r = {r}")));
        }
        if eta.iter().any(|c| !c.is_finite()) || (dim == 2 && eta[2] != 0.0) {
            return Err(Error::InvalidInput(format!("eta = {eta:?}")));
        }
        Ok(Self { dim, eta, r })
    }

    /// The sphere with eta = eta_abs e_1.
    pub fn radial(dim: usize, eta_abs: f64, r: f64) -> Result<Self> {
        if !(eta_abs > 0.0) {
            return Err(Error::InvalidInput(format!("|eta| = {eta_abs}")));
        }
        Self::new(dim, [eta_abs, 0.0, 0.0], r)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eta(&self) -> [f64; 3] {
        self.eta
    }

    pub fn eta_abs(&self) -> f64 {
        norm(&self.eta)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn center(&self) -> [f64; 3] {
        self.eta.map(|c| 0.5 * c)
    }

    pub fn radius(&self) -> f64 {
        0.5 * self.r * self.eta_abs()
    }

    pub fn area(&self) -> f64 {
        unit_sphere_area(self.dim) * self.radius().powi(self.dim as i32 - 1)
    }

    /// xi = eta/2 + (r|eta|/2) theta.
    pub fn point(&self, theta: &[f64; 3]) -> [f64; 3] {
        let c = self.center();
        let rad = self.radius();
        [c[0] + rad * theta[0], c[1] + rad * theta[1], c[2] + rad * theta[2]]
    }

    /// Signed distance of x from the sphere relative to its radius.
    pub fn relative_offset(&self, x: &[f64; 3]) -> f64 {
        let c = self.center();
        let d = norm(&[x[0] - c[0], x[1] - c[1], x[2] - c[2]]);
        (d - self.radius()) / self.radius()
    }
}

pub(crate) fn norm(x: &[f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// Weighted unit vectors integrating over S^{n-1}.
///
/// n = 2: `order` equispaced angles. n = 3: Gauss-Legendre of `order` points
/// in the cosine of the polar angle (measured from e_1) times 2*order
/// equispaced azimuths.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereQuadrature {
    pub dim: usize,
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub order: usize,
}

pub fn quad_rule(dim: usize, order: usize) -> Result<SphereQuadrature> {
    check_dim(dim)?;
    if order < 4 {
        return Err(Error::InvalidInput(format!("sphere quadrature order {order} < 4")));
    }
    let (mut nodes, mut weights) = (Vec::new(), Vec::new());
    if dim == 2 {
        let w = 2.0 * PI / order as f64;
        for k in 0..order {
            let phi = w * (k as f64 + 0.5);
            nodes.push([phi.cos(), phi.sin(), 0.0]);
            weights.push(w);
        }
    } else {
        let gl = GaussLegendre::new(order);
        let m = 2 * order;
        let dphi = 2.0 * PI / m as f64;
        for (&t, &wt) in gl.nodes.iter().zip(&gl.weights) {
            let s = (1.0 - t * t).sqrt();
            for k in 0..m {
                let phi = dphi * (k as f64 + 0.5);
                nodes.push([t, s * phi.cos(), s * phi.sin()]);
                weights.push(wt * dphi);
            }
        }
    }
    Ok(SphereQuadrature {
        dim,
        nodes,
        weights,
        order,
    })
}

impl SphereQuadrature {
    /// Sum of w_i f(theta_i).
    pub fn integrate<F>(&self, mut f: F) -> Result<Complex64>
    where
        F: FnMut(&[f64; 3]) -> Result<Complex64>,
    {
        let mut acc = Complex64::new(0.0, 0.0);
        for (theta, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(theta)?;
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite(format!("integrand at theta = {theta:?}")));
            }
            acc += v * w;
        }
        Ok(acc)
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Surface integral over the sphere of given centre and radius.
pub fn integrate_sphere<F>(
    center: [f64; 3],
    radius: f64,
    mut f: F,
    quad: &SphereQuadrature,
) -> Result<Complex64>
where
    F: FnMut(&[f64; 3]) -> Result<Complex64>,
{
    let jac = radius.powi(quad.dim as i32 - 1);
    let v = quad.integrate(|th| {
        f(&[
            center[0] + radius * th[0],
            center[1] + radius * th[1],
            center[2] + radius * th[2],
        ])
    })?;
    Ok(v * jac)
}

/// int_{Gamma_r(eta)} f(xi) dsigma(xi).
pub fn integrate_ewald<F>(sph: &EwaldSphere, f: F, quad: &SphereQuadrature) -> Result<Complex64>
where
    F: FnMut(&[f64; 3]) -> Result<Complex64>,
{
    if quad.dim != sph.dim {
        return Err(Error::InvalidInput("quadrature and sphere dimensions differ".into()));
    }
    integrate_sphere(sph.center(), sph.radius(), f, quad)
}

/// Result of [`check_singular_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularBound {
    /// (int_{S_rho} |x - y|^{-(n-1)+2 lambda} dsigma(y)) / rho^{2 lambda}
    pub ratio: f64,
    /// Adaptive error estimate of the ratio.
    pub error: f64,
}

/// Evaluates the scale-invariant ratio for the sphere of radius `rho`
/// centred at the origin.
///
/// After scaling and rotating x onto the first axis the integral depends on
/// a = |x| / rho only and reduces to one polar angle psi. Near x on the
/// sphere the integrand behaves like psi^{2 lambda - 1}; the substitution
/// psi = pi t^{1/(2 lambda)} removes that singularity, and adaptive splitting
/// handles the remaining near-singular cases.
pub fn check_singular_bound(dim: usize, lambda: f64, rho: f64, x: &[f64; 3]) -> Result<SingularBound> {
    check_dim(dim)?;
    let top = (dim as f64 - 1.0) / 2.0;
    if !(lambda > 0.0 && lambda <= top) {
        return Err(Error::InvalidInput(format!("lambda = {lambda} outside (0, {top}]")));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidInput(format!("rho = {rho}")));
    }
    let a = norm(x) / rho;
    let power = -(dim as f64 - 1.0) + 2.0 * lambda;
    let inv = 1.0 / (2.0 * lambda);
    // ratio = omega_{n-2} int_0^pi d(psi)^power sin^{n-2} psi dpsi.
    let omega = if dim == 2 { 2.0 } else { 2.0 * PI };
    let integrand = |t: f64| {
        if t == 0.0 {
            return 0.0;
        }
        let psi = PI * t.powf(inv);
        let dpsi = PI * inv * t.powf(inv - 1.0);
        // d^2 = (a - 1)^2 + 4 a sin^2(psi/2), accurate near a = 1, psi = 0
        let h = (0.5 * psi).sin();
        let d2 = (a - 1.0).powi(2) + 4.0 * a * h * h;
        let sin_part = if dim == 2 { 1.0 } else { psi.sin() };
        d2.powf(0.5 * power) * sin_part * dpsi
    };
    let mut breaks = vec![0.0, 1e-12, 1e-9, 1e-6, 1e-4, 1e-2, 0.1, 0.5, 1.0];
    breaks.dedup();
    let (v, err, ok) = integrate_real(
        integrand,
        &breaks,
        Adaptive {
            rel_tol: 1e-11,
            abs_tol: 0.0,
            max_panels: 4000,
        },
    )?;
    if !ok || !v.is_finite() {
        return Err(Error::Convergence(format!(
            "singular sphere integral at |x|/rho = {a}, lambda = {lambda}"
        )));
    }
    Ok(SingularBound {
        ratio: omega * v,
        error: omega * err,
    })
}

/// Closed form of the ratio for n = 3 with a = |x| / rho:
/// (pi / (a lambda)) ((1+a)^{2 lambda} - |1-a|^{2 lambda}), and 4 pi at a = 0.
pub fn singular_ratio_3d(lambda: f64, a: f64) -> f64 {
    if a == 0.0 {
        return 4.0 * PI;
    }
    PI / (a * lambda) * ((1.0 + a).powf(2.0 * lambda) - (1.0 - a).abs().powf(2.0 * lambda))
}

/// The ratio for x on the sphere in n = 2: 2^{2 lambda} sqrt(pi) Gamma(lambda) / Gamma(lambda + 1/2).
pub fn singular_ratio_2d_on_sphere(lambda: f64) -> f64 {
    4f64.powf(lambda) * PI.sqrt() * libm::tgamma(lambda) / libm::tgamma(lambda + 0.5)
}

/// Sum of isotropic Gaussians a_k exp(-|x - mu_k|^2 / (2 s_k)).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    pub dim: usize,
    pub amplitudes: Vec<f64>,
    pub centers: Vec<[f64; 3]>,
    /// Variances s_k.
    pub variances: Vec<f64>,
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl GaussianMixture {
    pub fn value(&self, x: &[f64; 3]) -> f64 {
        self.amplitudes
            .iter()
            .zip(&self.centers)
            .zip(&self.variances)
            .map(|((a, m), s)| {
                let d = sub(x, m);
                a * (-dot(&d, &d) / (2.0 * s)).exp()
            })
            .sum()
    }

    /// Random mixture of up to four components; variances in [0.09, 4],
    /// centres in the cube [-2, 2]^n, signed amplitudes.
    pub fn random<R: Rng>(dim: usize, rng: &mut R) -> Self {
        let k = rng.gen_range(1..=4);
        let mut centers = Vec::with_capacity(k);
        for _ in 0..k {
            let mut c = [0.0; 3];
            for v in c.iter_mut().take(dim) {
                *v = rng.gen_range(-2.0..2.0);
            }
            centers.push(c);
        }
        Self {
            dim,
            amplitudes: (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            centers,
            variances: (0..k).map(|_| rng.gen_range(0.3f64..2.0).powi(2)).collect(),
        }
    }

    /// Closed-form (||f||^2_{L^2}, ||grad f||^2_{L^2}).
    pub fn norms(&self) -> (f64, f64) {
        let n = self.dim as f64;
        let (mut l2, mut h1) = (0.0, 0.0);
        for k in 0..self.amplitudes.len() {
            for l in 0..self.amplitudes.len() {
                let (sk, sl) = (self.variances[k], self.variances[l]);
                let (mk, ml) = (self.centers[k], self.centers[l]);
                let amp = self.amplitudes[k] * self.amplitudes[l];
                let d = sub(&mk, &ml);
                let c = (-dot(&d, &d) / (2.0 * (sk + sl))).exp();
                let s = sk * sl / (sk + sl);
                let mass = c * (2.0 * PI * s).powf(n / 2.0);
                let m = [0, 1, 2].map(|i| (sl * mk[i] + sk * ml[i]) / (sk + sl));
                l2 += amp * mass;
                h1 += amp * mass * (n * s + dot(&sub(&m, &mk), &sub(&m, &ml))) / (sk * sl);
            }
        }
        (l2, h1)
    }
}

/// (lhs, rhs) of the trace inequality int_S |f|^2 dsigma <= ||f||^2 + ||grad f||^2.
pub fn check_trace(
    f: &GaussianMixture,
    center: [f64; 3],
    radius: f64,
    quad: &SphereQuadrature,
) -> Result<(f64, f64)> {
    if quad.dim != f.dim {
        return Err(Error::InvalidInput("quadrature and function dimensions differ".into()));
    }
    let lhs = integrate_sphere(
        center,
        radius,
        |x| Ok(Complex64::new(f.value(x).powi(2), 0.0)),
        quad,
    )?
    .re;
    let (l2, h1) = f.norms();
    Ok((lhs, l2 + h1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn weights_sum_to_area_and_nodes_are_unit() {
        for (dim, order) in [(2, 4), (2, 33), (3, 4), (3, 24)] {
            let q = quad_rule(dim, order).unwrap();
            let area = unit_sphere_area(dim);
            assert!((q.total_weight() - area).abs() < 1e-12 * area);
            assert!(q.nodes.iter().all(|t| (norm(t) - 1.0).abs() < 1e-14));
        }
        assert!(quad_rule(4, 8).is_err());
        assert!(quad_rule(3, 3).is_err());
    }

    #[test]
    fn moments() {
        let q2 = quad_rule(2, 16).unwrap();
        let one = q2.integrate(|_| Ok(Complex64::new(1.0, 0.0))).unwrap();
        assert!((one.re - 2.0 * PI).abs() < 1e-14);
        let q3 = quad_rule(3, 8).unwrap();
        let e = [0.3, -0.4, 0.5f64.sqrt()];
        let m2 = q3
            .integrate(|t| Ok(Complex64::new(dot(t, &e).powi(2) / dot(&e, &e), 0.0)))
            .unwrap();
        assert!((m2.re - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_self_convergence() {
        let e = [0.6, 0.0, 0.8];
        for dim in [2, 3] {
            let f = |t: &[f64; 3]| Ok(Complex64::new(dot(t, &e).exp(), 0.0));
            let a = quad_rule(dim, 24).unwrap().integrate(f).unwrap();
            let b = quad_rule(dim, 48).unwrap().integrate(f).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn ewald_geometry() {
        for dim in [2, 3] {
            let sph = EwaldSphere::radial(dim, 3.0, 0.7).unwrap();
            let q = quad_rule(dim, 16).unwrap();
            let area = integrate_ewald(&sph, |_| Ok(Complex64::new(1.0, 0.0)), &q).unwrap();
            assert!((area.re - sph.area()).abs() < 1e-12 * sph.area());
            let eta = sph.eta();
            let c = (1.0 + 0.49) * 9.0 / 2.0;
            for th in &q.nodes {
                let xi = sph.point(th);
                let m = sub(&eta, &xi);
                assert!((dot(&xi, &xi) + dot(&m, &m) - c).abs() < 1e-12 * c);
                assert!(sph.relative_offset(&m).abs() < 1e-14);
            }
        }
        let unit = EwaldSphere::radial(3, 2.0, 1.0).unwrap();
        assert!(unit.relative_offset(&[0.0; 3]).abs() < 1e-15);
        assert!(unit.relative_offset(&[2.0, 0.0, 0.0]).abs() < 1e-15);
    }

    #[test]
    fn singular_ratio_oracles() {
        // lambda = (n-1)/2: integrand is one.
        for (dim, lam) in [(2, 0.5), (3, 1.0)] {
            let b = check_singular_bound(dim, lam, 2.5, &[0.7, 0.1, 0.0]).unwrap();
            assert!((b.ratio - unit_sphere_area(dim)).abs() < 1e-10);
        }
        for a in [0.0, 0.3, 1.0, 1.7, 10.0] {
            for lam in [0.1, 0.5, 0.9] {
                let b = check_singular_bound(3, lam, 1.3, &[0.0, a * 1.3, 0.0]).unwrap();
                let exact = singular_ratio_3d(lam, a);
                assert!((b.ratio - exact).abs() < 1e-8 * exact, "a {a} lambda {lam}");
            }
        }
        for lam in [0.1, 0.25, 0.5] {
            let b = check_singular_bound(2, lam, 0.4, &[0.4, 0.0, 0.0]).unwrap();
            let exact = singular_ratio_2d_on_sphere(lam);
            assert!((b.ratio - exact).abs() < 1e-8 * exact);
        }
        assert!(check_singular_bound(3, 1.5, 1.0, &[0.0; 3]).is_err());
    }

    #[test]
    fn mixture_norms_match_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = GaussianMixture::random(2, &mut rng);
        let (l2, _) = f.norms();
        // crude tensor trapezoid on [-12, 12]^2
        let m = 600;
        let h = 24.0 / m as f64;
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                let x = [-12.0 + i as f64 * h, -12.0 + j as f64 * h, 0.0];
                s += f.value(&x).powi(2);
            }
        }
        assert!((s * h * h - l2).abs() < 1e-9 * l2.max(1e-3));
    }

    #[test]
    fn trace_inequality_holds() {
        let zero = GaussianMixture {
            dim: 3,
            amplitudes: vec![],
            centers: vec![],
            variances: vec![],
        };
        let q = quad_rule(3, 16).unwrap();
        assert_eq!(check_trace(&zero, [0.0; 3], 1.0, &q).unwrap(), (0.0, 0.0));
        let g = GaussianMixture {
            dim: 3,
            amplitudes: vec![1.0],
            centers: vec![[0.0; 3]],
            variances: vec![1.0],
        };
        let (lhs, rhs) = check_trace(&g, [0.0; 3], 1.0, &quad_rule(3, 32).unwrap()).unwrap();
        // lhs = 4 pi e^{-1}; rhs = pi^{3/2} (1 + 3/2)
        assert!((lhs - 4.0 * PI * (-1f64).exp()).abs() < 1e-12);
        assert!((rhs - PI.powf(1.5) * 2.5).abs() < 1e-12);
        assert!(lhs < rhs);
    }
}
