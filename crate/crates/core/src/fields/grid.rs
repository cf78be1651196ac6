use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Periodic Cartesian grid on [-L, L)^n with N points per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianGrid {
    dim: usize,
    half_extent: f64,
    points_per_axis: usize,
}

impl CartesianGrid {
    pub fn new(dim: usize, half_extent: f64, points_per_axis: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::Unsupported(format!("grid dimension {dim}")));
        }
        if !(half_extent.is_finite() && half_extent > 0.0) {
            return Err(Error::InvalidInput(format!("half_extent {half_extent}")));
        }
        if points_per_axis < 2 || !points_per_axis.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "points_per_axis must be a power of two >= 2, got {points_per_axis}"
            )));
        }
        Ok(Self {
            dim,
            half_extent,
            points_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Physical spacing h = 2L / N.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_extent / self.points_per_axis as f64
    }

    /// Dual-grid spacing pi / L.
    pub fn dual_spacing(&self) -> f64 {
        PI / self.half_extent
    }

    /// Largest resolved frequency magnitude along an axis.
    pub fn nyquist(&self) -> f64 {
        self.dual_spacing() * (self.points_per_axis / 2) as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn dual_cell_volume(&self) -> f64 {
        self.dual_spacing().powi(self.dim as i32)
    }

    /// Multi-index of a flat index (last axis fastest).
    pub fn unflatten(&self, mut idx: usize) -> [usize; 3] {
        let n = self.points_per_axis;
        let mut out = [0; 3];
        for axis in (0..self.dim).rev() {
            out[axis] = idx % n;
            idx /= n;
        }
        out
    }

    pub fn flatten(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .take(self.dim)
            .fold(0, |acc, &i| acc * self.points_per_axis + i)
    }

    /// Physical coordinate of a node, padded with zeros to three components.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let m = self.unflatten(idx);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = -self.half_extent + m[axis] as f64 * h;
        }
        x
    }

    /// Frequency of a spectral node; index N/2 along an axis is frequency zero.
    pub fn frequency(&self, idx: usize) -> [f64; 3] {
        let m = self.unflatten(idx);
        let d = self.dual_spacing();
        let half = (self.points_per_axis / 2) as f64;
        let mut xi = [0.0; 3];
        for axis in 0..self.dim {
            xi[axis] = (m[axis] as f64 - half) * d;
        }
        xi
    }

    /// Flat index of the spectral node at -xi, if it lies on the grid.
    pub fn mirror_frequency_index(&self, idx: usize) -> Option<usize> {
        let m = self.unflatten(idx);
        let n = self.points_per_axis;
        let mut out = [0; 3];
        for axis in 0..self.dim {
            if m[axis] == 0 {
                return None;
            }
            out[axis] = n - m[axis];
        }
        Some(self.flatten(&out[..self.dim]))
    }
}

pub(crate) fn norm3(x: &[f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// Samples of a function on a [`CartesianGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: CartesianGrid,
    samples: Vec<Complex64>,
}

/// Samples of a Fourier transform on the dual grid, zero frequency centred.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: CartesianGrid,
    samples: Vec<Complex64>,
}

fn check_samples(grid: &CartesianGrid, samples: &[Complex64]) -> Result<()> {
    if samples.len() != grid.len() {
        return Err(Error::InvalidInput(format!(
            "expected {} samples, got {}",
            grid.len(),
            samples.len()
        )));
    }
    if let Some(i) = samples
        .iter()
        .position(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return Err(Error::InvalidInput(format!("non-finite sample at index {i}")));
    }
    Ok(())
}

macro_rules! sampled_common {
    ($t:ty, $coord:ident) => {
        impl $t {
            pub fn new(grid: CartesianGrid, samples: Vec<Complex64>) -> Result<Self> {
                check_samples(&grid, &samples)?;
                Ok(Self { grid, samples })
            }

            pub fn zeros(grid: CartesianGrid) -> Self {
                Self {
                    grid,
                    samples: vec![Complex64::new(0.0, 0.0); grid.len()],
                }
            }

            /// Samples `f` at every node coordinate.
            pub fn from_fn<F>(grid: CartesianGrid, f: F) -> Result<Self>
            where
                F: Fn(&[f64; 3]) -> Complex64,
            {
                let samples = (0..grid.len()).map(|i| f(&grid.$coord(i))).collect();
                Self::new(grid, samples)
            }

            pub fn from_real_fn<F>(grid: CartesianGrid, f: F) -> Result<Self>
            where
                F: Fn(&[f64; 3]) -> f64,
            {
                Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
            }

            pub fn grid(&self) -> &CartesianGrid {
                &self.grid
            }

            pub fn samples(&self) -> &[Complex64] {
                &self.samples
            }

            pub fn into_samples(self) -> Vec<Complex64> {
                self.samples
            }

            pub fn map<F>(&self, f: F) -> Self
            where
                F: Fn(&[f64; 3], Complex64) -> Complex64,
            {
                let samples = self
                    .samples
                    .iter()
                    .enumerate()
                    .map(|(i, &z)| f(&self.grid.$coord(i), z))
                    .collect();
                Self {
                    grid: self.grid,
                    samples,
                }
            }

            pub fn scale(&self, c: Complex64) -> Self {
                self.map(|_, z| z * c)
            }

            pub fn max_abs(&self) -> f64 {
                self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
            }

            /// Largest |imaginary part| relative to the largest modulus.
            pub fn imaginary_fraction(&self) -> f64 {
                let m = self.max_abs();
                if m == 0.0 {
                    return 0.0;
                }
                self.samples.iter().map(|z| z.im.abs()).fold(0.0, f64::max) / m
            }
        }
    };
}

sampled_common!(Field, position);
sampled_common!(SpectralField, frequency);

impl Field {
    /// Discrete L2 norm, h^n sum |f|^2.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.samples.iter().map(|z| z.norm_sqr()).sum();
        (s * self.grid.cell_volume()).sqrt()
    }
}

impl SpectralField {
    /// (2 pi)^{-n} Delta^n sum |F|^2, square-rooted.
    pub fn l2_norm_physical(&self) -> f64 {
        let s: f64 = self.samples.iter().map(|z| z.norm_sqr()).sum();
        let n = self.grid.dim() as i32;
        (s * self.grid.dual_cell_volume() / (2.0 * PI).powi(n)).sqrt()
    }

    /// Largest violation of F(-xi) = conj F(xi), relative to max |F|.
    pub fn hermitian_defect(&self) -> f64 {
        let m = self.max_abs();
        if m == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.grid.len() {
            if let Some(j) = self.grid.mirror_frequency_index(i) {
                worst = worst.max((self.samples[j] - self.samples[i].conj()).norm());
            }
        }
        worst / m
    }
}

fn fft_along_axes(grid: &CartesianGrid, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
    let n = grid.points_per_axis();
    let dim = grid.dim();
    let total = grid.len();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        for start in 0..total {
            // lines start where the axis index is zero
            if !(start / stride).is_multiple_of(n) {
                continue;
            }
            for (k, v) in line.iter_mut().enumerate() {
                *v = data[start + k * stride];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for (k, v) in line.iter().enumerate() {
                data[start + k * stride] = *v;
            }
        }
    }
}

fn checkerboard(grid: &CartesianGrid, idx: usize) -> f64 {
    let m = grid.unflatten(idx);
    let parity: usize = m.iter().take(grid.dim()).sum();
    if parity.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Sign (-1)^{sum (k - N/2)} attached to centred spectral indices.
fn centred_sign(grid: &CartesianGrid, idx: usize) -> f64 {
    let half = grid.points_per_axis() / 2;
    let m = grid.unflatten(idx);
    let parity: usize = m.iter().take(grid.dim()).map(|&k| k + half).sum();
    if parity.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// f^(xi) = int f(x) e^{-i x.xi} dx, evaluated by the trapezoid rule.
pub fn forward_transform(f: &Field) -> Result<SpectralField> {
    let grid = f.grid;
    check_samples(&grid, &f.samples)?;
    let mut data: Vec<Complex64> = f
        .samples
        .iter()
        .enumerate()
        .map(|(i, &z)| z * checkerboard(&grid, i))
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(grid.points_per_axis());
    fft_along_axes(&grid, &mut data, &fft);
    let vol = grid.cell_volume();
    for (i, z) in data.iter_mut().enumerate() {
        *z *= centred_sign(&grid, i) * vol;
    }
    Ok(SpectralField {
        grid,
        samples: data,
    })
}

/// Inverse of [`forward_transform`], carrying the (2 pi)^{-n} factor.
pub fn inverse_transform(spec: &SpectralField) -> Result<Field> {
    let grid = spec.grid;
    check_samples(&grid, &spec.samples)?;
    let mut data: Vec<Complex64> = spec
        .samples
        .iter()
        .enumerate()
        .map(|(i, &z)| z * centred_sign(&grid, i))
        .collect();
    let fft = FftPlanner::new().plan_fft_inverse(grid.points_per_axis());
    fft_along_axes(&grid, &mut data, &fft);
    let scale = grid.dual_cell_volume() / (2.0 * PI).powi(grid.dim() as i32);
    for (i, z) in data.iter_mut().enumerate() {
        *z *= checkerboard(&grid, i) * scale;
    }
    Ok(Field {
        grid,
        samples: data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn grid_rejects_bad_shapes() {
        assert!(CartesianGrid::new(4, 1.0, 8).is_err());
        assert!(CartesianGrid::new(2, 1.0, 12).is_err());
        assert!(CartesianGrid::new(2, -1.0, 8).is_err());
        let g = CartesianGrid::new(2, 4.0, 64).unwrap();
        assert!((g.dual_spacing() - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_transforms_to_scaled_gaussian() {
        let grid = CartesianGrid::new(2, 12.0, 128).unwrap();
        let f = Field::from_real_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp()).unwrap();
        let spec = forward_transform(&f).unwrap();
        let mut worst: f64 = 0.0;
        for (i, z) in spec.samples().iter().enumerate() {
            let xi = grid.frequency(i);
            let r2 = xi[0] * xi[0] + xi[1] * xi[1];
            let exact = 2.0 * PI * (-r2 / 2.0).exp();
            worst = worst.max((z - Complex64::new(exact, 0.0)).norm());
        }
        assert!(worst < 1e-12, "worst {worst}");
    }

    #[test]
    fn zero_field_gives_zero_spectrum() {
        let grid = CartesianGrid::new(3, 2.0, 8).unwrap();
        let spec = forward_transform(&Field::zeros(grid)).unwrap();
        assert_eq!(spec.max_abs(), 0.0);
    }

    #[test]
    fn real_even_field_has_real_even_spectrum() {
        let grid = CartesianGrid::new(2, 6.0, 64).unwrap();
        let f = Field::from_real_fn(grid, |x| 1.0 / (1.0 + x[0] * x[0] + 2.0 * x[1] * x[1])).unwrap();
        let spec = forward_transform(&f).unwrap();
        assert!(spec.imaginary_fraction() < 1e-13);
        assert!(spec.hermitian_defect() < 1e-13);
    }

    #[test]
    fn non_finite_samples_are_rejected() {
        let grid = CartesianGrid::new(2, 1.0, 4).unwrap();
        let mut s = vec![Complex64::new(0.0, 0.0); 16];
        s[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(Field::new(grid, s), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn round_trip_and_parseval_3d() {
        let grid = CartesianGrid::new(3, 3.0, 16).unwrap();
        let f = Field::from_fn(grid, |x| {
            Complex64::new((x[0] - 0.3 * x[1]).cos(), x[2].sin()) * (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp()
        })
        .unwrap();
        let spec = forward_transform(&f).unwrap();
        assert!(rel(spec.l2_norm_physical(), f.l2_norm()) < 1e-12);
        let back = inverse_transform(&spec).unwrap();
        let err = back
            .samples()
            .iter()
            .zip(f.samples())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12 * f.max_abs());
    }
}
