use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Logarithmic,
    /// Nodes supplied explicitly (e.g. mean radii of shell bins).
    Irregular,
}

/// Radial sampling grid for rho = |xi|.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec1D {
    rho_min: f64,
    rho_max: f64,
    spacing: Spacing,
    nodes: Vec<f64>,
}

impl GridSpec1D {
    pub fn linear(rho_min: f64, rho_max: f64, count: usize) -> Result<Self> {
        Self::validate(rho_min, rho_max, count)?;
        let h = (rho_max - rho_min) / (count - 1) as f64;
        let mut nodes: Vec<f64> = (0..count).map(|i| rho_min + i as f64 * h).collect();
        nodes[count - 1] = rho_max;
        Ok(Self {
            rho_min,
            rho_max,
            spacing: Spacing::Linear,
            nodes,
        })
    }

    pub fn logarithmic(rho_min: f64, rho_max: f64, count: usize) -> Result<Self> {
        Self::validate(rho_min, rho_max, count)?;
        if rho_min <= 0.0 {
            return Err(Error::InvalidInput(
                "logarithmic spacing requires rho_min > 0".into(),
            ));
        }
        let (a, b) = (rho_min.ln(), rho_max.ln());
        let h = (b - a) / (count - 1) as f64;
        let mut nodes: Vec<f64> = (0..count).map(|i| (a + i as f64 * h).exp()).collect();
        nodes[0] = rho_min;
        nodes[count - 1] = rho_max;
        Ok(Self {
            rho_min,
            rho_max,
            spacing: Spacing::Logarithmic,
            nodes,
        })
    }

    pub fn irregular(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidInput("grid needs at least two nodes".into()));
        }
        if nodes[0] < 0.0 || nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("grid nodes must be finite and >= 0".into()));
        }
        if !nodes.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidInput("grid nodes must increase strictly".into()));
        }
        Ok(Self {
            rho_min: nodes[0],
            rho_max: *nodes.last().unwrap(),
            spacing: Spacing::Irregular,
            nodes,
        })
    }

    fn validate(rho_min: f64, rho_max: f64, count: usize) -> Result<()> {
        if !(rho_min.is_finite() && rho_max.is_finite()) || rho_min < 0.0 {
            return Err(Error::InvalidInput(format!(
                "grid bounds [{rho_min}, {rho_max}]"
            )));
        }
        if rho_min >= rho_max {
            return Err(Error::InvalidInput("rho_min must be < rho_max".into()));
        }
        if count < 2 {
            return Err(Error::InvalidInput("grid count must be >= 2".into()));
        }
        Ok(())
    }

    pub fn rho_min(&self) -> f64 {
        self.rho_min
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    pub fn count(&self) -> usize {
        self.nodes.len()
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn contains(&self, rho: f64) -> bool {
        let slack = 1e-12 * self.rho_max.abs().max(1.0);
        rho >= self.rho_min - slack && rho <= self.rho_max + slack
    }
}

/// Natural cubic spline through (x_i, y_i).
#[derive(Debug, Clone)]
struct Spline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>, // second derivatives at nodes
}

impl Spline {
    fn new(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm for the interior second derivatives.
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
                let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
                c[i] = h1 / diag;
                d[i] = (rhs - h0 * d[i - 1]) / diag;
            }
            for i in (1..n - 1).rev() {
                m[i] = d[i] - c[i] * m[i + 1];
            }
        }
        Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        }
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    fn eval(&self, t: f64) -> (f64, f64) {
        let i = self.segment(t);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let h = x1 - x0;
        let a = (x1 - t) / h;
        let b = (t - x0) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let v = a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d = (self.y[i + 1] - self.y[i]) / h
            + (-(3.0 * a * a - 1.0) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        (v, d)
    }
}

#[derive(Debug, Clone)]
struct ComplexSpline {
    re: Spline,
    im: Spline,
}

impl ComplexSpline {
    fn new(x: &[f64], values: &[Complex64]) -> Self {
        let re: Vec<f64> = values.iter().map(|z| z.re).collect();
        let im: Vec<f64> = values.iter().map(|z| z.im).collect();
        Self {
            re: Spline::new(x, &re),
            im: Spline::new(x, &im),
        }
    }

    fn eval(&self, t: f64) -> (Complex64, Complex64) {
        let (vr, dr) = self.re.eval(t);
        let (vi, di) = self.im.eval(t);
        (Complex64::new(vr, vi), Complex64::new(dr, di))
    }
}

/// Closed-form radial function: returns the value and, when known, d/drho.
pub type AnalyticFn = dyn Fn(f64) -> (Complex64, Option<Complex64>) + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Sampled,
    Analytic,
}

// Evaluator lives once per profile; boxing the splines buys nothing.
#[allow(clippy::large_enum_variant)]
#[derive(Clone)]
enum Evaluator {
    Sampled {
        value: ComplexSpline,
        derivative: Option<ComplexSpline>,
    },
    Analytic(Arc<AnalyticFn>),
}

/// A radial function of rho = |xi|, either sampled (cubic-spline evaluation
/// off-grid, no extrapolation) or analytic (evaluable at any rho >= 0; the
/// grid only fixes where `values()` are tabulated).
#[derive(Clone)]
pub struct RadialProfile {
    grid: GridSpec1D,
    values: Vec<Complex64>,
    derivative_values: Option<Vec<Complex64>>,
    real: bool,
    eval: Evaluator,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("kind", &self.kind())
            .field("grid", &(self.grid.rho_min, self.grid.rho_max, self.grid.count()))
            .field("real", &self.real)
            .field("has_derivative", &self.derivative_values.is_some())
            .finish()
    }
}

fn all_finite(v: &[Complex64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

impl RadialProfile {
    pub fn sampled(
        grid: GridSpec1D,
        values: Vec<Complex64>,
        derivative_values: Option<Vec<Complex64>>,
    ) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(Error::InvalidInput(format!(
                "{} values for {} grid nodes",
                values.len(),
                grid.count()
            )));
        }
        if !all_finite(&values) {
            return Err(Error::InvalidInput("profile values must be finite".into()));
        }
        if let Some(d) = &derivative_values {
            if d.len() != values.len() || !all_finite(d) {
                return Err(Error::InvalidInput("bad derivative values".into()));
            }
        }
        let real = values.iter().all(|z| z.im == 0.0);
        let eval = Evaluator::Sampled {
            value: ComplexSpline::new(grid.nodes(), &values),
            derivative: derivative_values
                .as_ref()
                .map(|d| ComplexSpline::new(grid.nodes(), d)),
        };
        Ok(Self {
            grid,
            values,
            derivative_values,
            real,
            eval,
        })
    }

    pub fn sampled_real(grid: GridSpec1D, values: &[f64]) -> Result<Self> {
        Self::sampled(
            grid,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            None,
        )
    }

    /// Wraps a closed form; `real` declares that imaginary parts vanish.
    pub fn analytic(grid: GridSpec1D, real: bool, f: Arc<AnalyticFn>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.count());
        let mut derivs = Vec::with_capacity(grid.count());
        let mut has_derivative = true;
        for &rho in grid.nodes() {
            let (v, d) = f(rho);
            values.push(v);
            match d {
                Some(d) => derivs.push(d),
                None => has_derivative = false,
            }
        }
        if !all_finite(&values) {
            return Err(Error::InvalidInput("analytic profile is not finite on its grid".into()));
        }
        if real && values.iter().any(|z| z.im != 0.0) {
            return Err(Error::InvalidInput("profile flagged real has imaginary parts".into()));
        }
        Ok(Self {
            grid,
            values,
            derivative_values: has_derivative.then_some(derivs),
            real,
            eval: Evaluator::Analytic(f),
        })
    }

    pub fn kind(&self) -> ProfileKind {
        match self.eval {
            Evaluator::Sampled { .. } => ProfileKind::Sampled,
            Evaluator::Analytic(_) => ProfileKind::Analytic,
        }
    }

    pub fn grid(&self) -> &GridSpec1D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn derivative_values(&self) -> Option<&[Complex64]> {
        self.derivative_values.as_deref()
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative_values.is_some()
    }

    fn check_range(&self, rho: f64) -> Result<()> {
        if !rho.is_finite() || rho < 0.0 {
            return Err(Error::InvalidInput(format!("rho = {rho}")));
        }
        if let Evaluator::Sampled { .. } = self.eval {
            if !self.grid.contains(rho) {
                return Err(Error::Extrapolation {
                    rho,
                    lo: self.grid.rho_min,
                    hi: self.grid.rho_max,
                });
            }
        }
        Ok(())
    }

    pub fn value(&self, rho: f64) -> Result<Complex64> {
        self.check_range(rho)?;
        Ok(match &self.eval {
            Evaluator::Sampled { value, .. } => value.eval(rho).0,
            Evaluator::Analytic(f) => f(rho).0,
        })
    }

    /// d/drho of the profile. Errors when no derivative was supplied.
    pub fn derivative(&self, rho: f64) -> Result<Complex64> {
        self.check_range(rho)?;
        let missing = || Error::InvalidInput("profile has no derivative".into());
        match &self.eval {
            Evaluator::Sampled { derivative, .. } => {
                derivative.as_ref().map(|d| d.eval(rho).0).ok_or_else(missing)
            }
            Evaluator::Analytic(f) => f(rho).1.ok_or_else(missing),
        }
    }

    /// Largest rho at which the profile can be evaluated.
    pub fn reach(&self) -> f64 {
        match self.eval {
            Evaluator::Sampled { .. } => self.grid.rho_max,
            Evaluator::Analytic(_) => f64::INFINITY,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let values = self.values.iter().map(|z| z * c).collect();
        let derivative_values = self
            .derivative_values
            .as_ref()
            .map(|d| d.iter().map(|z| z * c).collect());
        let eval = match &self.eval {
            Evaluator::Sampled { value, derivative } => {
                let scale = |s: &ComplexSpline| {
                    let mut s = s.clone();
                    for part in [&mut s.re, &mut s.im] {
                        part.y.iter_mut().for_each(|v| *v *= c);
                        part.m.iter_mut().for_each(|v| *v *= c);
                    }
                    s
                };
                Evaluator::Sampled {
                    value: scale(value),
                    derivative: derivative.as_ref().map(scale),
                }
            }
            Evaluator::Analytic(f) => {
                let f = Arc::clone(f);
                Evaluator::Analytic(Arc::new(move |rho| {
                    let (v, d) = f(rho);
                    (v * c, d.map(|d| d * c))
                }))
            }
        };
        Self {
            grid: self.grid.clone(),
            values,
            derivative_values,
            real: self.real,
            eval,
        }
    }

    /// Pointwise sum. Analytic + analytic stays analytic; otherwise both are
    /// tabulated on the grid of the sampled operand.
    pub fn add(&self, other: &RadialProfile) -> Result<Self> {
        match (&self.eval, &other.eval) {
            (Evaluator::Analytic(f), Evaluator::Analytic(g)) => {
                let (f, g) = (Arc::clone(f), Arc::clone(g));
                let grid = self.grid.clone();
                Self::analytic(
                    grid,
                    self.real && other.real,
                    Arc::new(move |rho| {
                        let (a, da) = f(rho);
                        let (b, db) = g(rho);
                        (a + b, da.zip(db).map(|(x, y)| x + y))
                    }),
                )
            }
            _ => {
                let grid = if self.kind() == ProfileKind::Sampled {
                    self.grid.clone()
                } else {
                    other.grid.clone()
                };
                let mut values = Vec::with_capacity(grid.count());
                for &rho in grid.nodes() {
                    values.push(self.value(rho)? + other.value(rho)?);
                }
                let derivs = if self.has_derivative() && other.has_derivative() {
                    let mut d = Vec::with_capacity(grid.count());
                    for &rho in grid.nodes() {
                        d.push(self.derivative(rho)? + other.derivative(rho)?);
                    }
                    Some(d)
                } else {
                    None
                };
                Self::sampled(grid, values, derivs)
            }
        }
    }

    /// Tabulates the profile on `grid` as a sampled profile.
    pub fn resample(&self, grid: GridSpec1D) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.count());
        let mut derivs = self.has_derivative().then(Vec::new);
        for &rho in grid.nodes() {
            values.push(self.value(rho)?);
            if let Some(d) = derivs.as_mut() {
                d.push(self.derivative(rho)?);
            }
        }
        Self::sampled(grid, values, derivs)
    }

    /// Largest mismatch between supplied derivatives and centred differences
    /// of the values, relative to max |derivative|. Interior nodes only.
    pub fn derivative_consistency(&self) -> Option<f64> {
        let d = self.derivative_values.as_ref()?;
        let x = self.grid.nodes();
        let scale = d.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for i in 1..x.len() - 1 {
            let fd = (self.values[i + 1] - self.values[i - 1]) / (x[i + 1] - x[i - 1]);
            worst = worst.max((fd - d[i]).norm() / scale);
        }
        Some(worst)
    }
}
