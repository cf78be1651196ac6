//! One-dimensional quadrature building blocks: Gauss-Legendre rules of any
//! order and a globally adaptive Gauss-Kronrod (7/15) integrator for complex
//! valued integrands.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped affinely onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + h * x, h * w))
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod 7/15 panel: (kronrod estimate, |kronrod - gauss|).
fn gk15<F>(f: &mut F, a: f64, b: f64, evals: &mut usize) -> Result<(Complex64, f64)>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let f1 = f(c - h * x)?;
        let f2 = f(c + h * x)?;
        kron += (f1 + f2) * w;
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    *evals += 15;
    let value = kron * h;
    let err = ((kron - gauss) * h).norm();
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::NonFinite(format!("integrand on [{a}, {b}]")));
    }
    Ok((value, err))
}

/// Tolerances for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adaptive {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Self {
            rel_tol: 1e-13,
            abs_tol: 0.0,
            max_panels: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Globally adaptive Gauss-Kronrod over the union of `breakpoints` intervals.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate drops below `max(abs_tol, rel_tol * |I|)`. The stopping rule is
/// homogeneous in the integrand, so scaling `f` by a power of two leaves the
/// panel tree unchanged.
pub fn integrate_adaptive<F>(mut f: F, breakpoints: &[f64], opts: Adaptive) -> Result<Integral>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    if breakpoints.len() < 2 {
        return Err(Error::InvalidInput("need at least two breakpoints".into()));
    }
    let mut evals = 0;
    let mut panels: Vec<(f64, f64, Complex64, f64)> = Vec::with_capacity(64);
    for w in breakpoints.windows(2) {
        let (v, e) = gk15(&mut f, w[0], w[1], &mut evals)?;
        panels.push((w[0], w[1], v, e));
    }
    loop {
        let total: Complex64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        let target = opts.abs_tol.max(opts.rel_tol * total.norm());
        if err <= target {
            return Ok(Integral {
                value: total,
                error: err,
                evaluations: evals,
                converged: true,
            });
        }
        if panels.len() >= opts.max_panels {
            return Ok(Integral {
                value: total,
                error: err,
                evaluations: evals,
                converged: false,
            });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (a, b, _, _) = panels[idx];
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return Ok(Integral {
                value: total,
                error: err,
                evaluations: evals,
                converged: false,
            });
        }
        let (v1, e1) = gk15(&mut f, a, m, &mut evals)?;
        let (v2, e2) = gk15(&mut f, m, b, &mut evals)?;
        panels[idx] = (a, m, v1, e1);
        panels.push((m, b, v2, e2));
    }
}

/// Real-valued convenience wrapper around [`integrate_adaptive`].
pub fn integrate_real<F>(mut f: F, breakpoints: &[f64], opts: Adaptive) -> Result<(f64, f64, bool)>
where
    F: FnMut(f64) -> f64,
{
    let res = integrate_adaptive(|x| Ok(Complex64::new(f(x), 0.0)), breakpoints, opts)?;
    Ok((res.value.re, res.error, res.converged))
}

/// Breakpoints on [a, b] refined geometrically toward both ends, down to
/// panels of width `finest`. Used where integrands peak at the endpoints.
pub fn graded_breakpoints(a: f64, b: f64, finest: f64) -> Vec<f64> {
    let len = b - a;
    let mut left = vec![a];
    let mut right = vec![b];
    let mut h = 0.25 * len;
    while h > finest && h > 1e-14 * len {
        left.push(a + h);
        right.push(b - h);
        h *= 0.5;
    }
    left.push(0.5 * (a + b));
    let mut pts: Vec<f64> = left;
    // left holds ascending points, right descending
    pts.extend(right.into_iter().rev());
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * len.abs());
    pts
}
