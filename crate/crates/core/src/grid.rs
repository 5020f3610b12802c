//! Periodic spatial discretization on `[-L, L)`.
//!
//! Samples live at `x_j = -L + 2Lj/N`. The forward transform carries the
//! `1/N` factor, so a sample vector is recovered as
//! `f(x_j) = sum_m c_m exp(i k_m (x_j + L))` with `k_m = pi m / L` and
//! `m` in `(-N/2, N/2]`.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Relative size below which a Fourier coefficient is treated as rounding
/// noise by [`GridFunction::spectral_derivative`].
pub const ROUNDOFF_FLOOR: f64 = 1e-14;

/// Forward transform with the `1/N` normalization, in place.
pub(crate) fn fft_forward(buf: &mut [Complex64]) {
    let n = buf.len();
    forward_plan(n).process(buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
}

/// Inverse of [`fft_forward`], in place.
pub(crate) fn fft_inverse(buf: &mut [Complex64]) {
    inverse_plan(buf.len()).process(buf);
}

/// Uniform periodic grid with `N` points on `[-L, L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicGrid {
    n: usize,
    half_period: f64,
}

impl PeriodicGrid {
    /// `n` must be a power of two no smaller than 8; `half_period` must be
    /// positive and finite.
    pub fn new(n: usize, half_period: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "N={n} must be a power of two and at least 8"
            )));
        }
        if !(half_period.is_finite() && half_period > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half period L={half_period} must be positive"
            )));
        }
        Ok(Self { n, half_period })
    }

    /// The default desk-scale grid, `L = pi`, `N = 256`.
    pub fn standard() -> Self {
        Self {
            n: 256,
            half_period: std::f64::consts::PI,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_period(&self) -> f64 {
        self.half_period
    }

    pub fn period(&self) -> f64 {
        2.0 * self.half_period
    }

    pub fn spacing(&self) -> f64 {
        self.period() / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_period + self.spacing() * j as f64
    }

    pub fn abscissae(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Integer mode number of FFT bin `j`, in `(-N/2, N/2]`.
    pub fn mode(&self, j: usize) -> i64 {
        if j <= self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// FFT bin index of mode `m`; `m` must lie in `(-N/2, N/2]`.
    pub fn bin(&self, m: i64) -> usize {
        m.rem_euclid(self.n as i64) as usize
    }

    pub fn wavenumber(&self, j: usize) -> f64 {
        std::f64::consts::PI * self.mode(j) as f64 / self.half_period
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.wavenumber(j)).collect()
    }

    pub(crate) fn check_same(&self, other: &PeriodicGrid) -> Result<()> {
        if self.n == other.n && self.half_period.to_bits() == other.half_period.to_bits() {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left_n: self.n,
                left_l: self.half_period,
                right_n: other.n,
                right_l: other.half_period,
            })
        }
    }
}

/// Complex samples of a `2L`-periodic function.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: PeriodicGrid,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: PeriodicGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::InvalidGrid(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.n()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self::constant(grid, Complex64::new(0.0, 0.0))
    }

    pub fn constant(grid: PeriodicGrid, value: Complex64) -> Self {
        Self {
            grid,
            values: vec![value; grid.n()],
        }
    }

    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.n()).map(|j| f(grid.x(j))).collect();
        Self { grid, values }
    }

    /// Plane wave `amplitude * exp(i m pi x / L)`.
    pub fn plane_wave(grid: PeriodicGrid, amplitude: Complex64, mode: i64) -> Self {
        let k = std::f64::consts::PI * mode as f64 / grid.half_period();
        Self::from_fn(grid, |x| amplitude * Complex64::new(0.0, k * x).exp())
    }

    /// Builds samples from Fourier coefficients in FFT bin order.
    pub fn from_fourier(grid: PeriodicGrid, mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n() {
            return Err(Error::InvalidGrid(format!(
                "{} coefficients for a grid of {} points",
                coeffs.len(),
                grid.n()
            )));
        }
        fft_inverse(&mut coeffs);
        Ok(Self {
            grid,
            values: coeffs,
        })
    }

    /// Builds samples from `(mode, coefficient)` pairs.
    pub fn from_modes(grid: PeriodicGrid, modes: &[(i64, Complex64)]) -> Result<Self> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.n()];
        let half = grid.n() as i64 / 2;
        for &(m, c) in modes {
            if m <= -half || m > half {
                return Err(Error::OutOfRange {
                    what: "mode",
                    value: m,
                    allowed: format!("({}, {}]", -half, half),
                });
            }
            coeffs[grid.bin(m)] += c;
        }
        Self::from_fourier(grid, coeffs)
    }

    /// Deterministic pseudo-random function with Fourier support on
    /// `|m| <= cutoff`, scaled so that its sup-norm equals `amplitude`.
    pub fn random_band_limited(
        grid: PeriodicGrid,
        cutoff: usize,
        seed: u64,
        amplitude: f64,
    ) -> Result<Self> {
        if cutoff > grid.n() / 8 {
            return Err(Error::OutOfRange {
                what: "cutoff",
                value: cutoff as i64,
                allowed: format!("<= N/8 = {}", grid.n() / 8),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.n()];
        let c = cutoff as i64;
        for m in -c..=c {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            coeffs[grid.bin(m)] = Complex64::new(re, im);
        }
        let f = Self::from_fourier(grid, coeffs)?;
        let sup = f.sup_norm();
        Ok(f.scale(Complex64::new(amplitude / sup, 0.0)))
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fourier coefficients in FFT bin order (forward transform carries `1/N`).
    pub fn fourier_coefficients(&self) -> Vec<Complex64> {
        let mut buf = self.values.clone();
        fft_forward(&mut buf);
        buf
    }

    /// Fourier multiplier `(i k_m)^order`; the Nyquist bin is zeroed for odd
    /// orders. Coefficients below [`ROUNDOFF_FLOOR`] times the largest one
    /// are dropped first, so transform noise in empty high modes is not
    /// amplified by `k^order`.
    pub fn spectral_derivative(&self, order: u32) -> GridFunction {
        if order == 0 {
            return self.clone();
        }
        let mut buf = self.fourier_coefficients();
        let nyquist = self.grid.n() / 2;
        let floor = ROUNDOFF_FLOOR * buf.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (j, c) in buf.iter_mut().enumerate() {
            if c.norm() < floor || (order % 2 == 1 && j == nyquist) {
                *c = Complex64::new(0.0, 0.0);
                continue;
            }
            let ik = Complex64::new(0.0, self.grid.wavenumber(j));
            *c *= ik.powu(order);
        }
        fft_inverse(&mut buf);
        GridFunction {
            grid: self.grid,
            values: buf,
        }
    }

    /// Applies a diagonal Fourier multiplier given per FFT bin.
    pub fn apply_multiplier(&self, multiplier: &[Complex64]) -> GridFunction {
        let mut buf = self.fourier_coefficients();
        for (c, m) in buf.iter_mut().zip(multiplier) {
            *c *= m;
        }
        fft_inverse(&mut buf);
        GridFunction {
            grid: self.grid,
            values: buf,
        }
    }

    /// Rectangle rule `2L * mean(values)`; exact for trigonometric
    /// polynomials of degree below `N`.
    pub fn integrate(&self) -> Complex64 {
        let sum: Complex64 = self.values.iter().sum();
        sum * self.grid.spacing()
    }

    /// `∫ conj(self) * other dx`.
    pub fn inner(&self, other: &GridFunction) -> Result<Complex64> {
        self.grid.check_same(&other.grid)?;
        let sum: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(sum * self.grid.spacing())
    }

    /// `sqrt(∫ |f|^2 dx)`.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|c| c.norm_sqr()).sum();
        (s * self.grid.spacing()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn conj(&self) -> GridFunction {
        self.map(|c| c.conj())
    }

    pub fn scale(&self, s: Complex64) -> GridFunction {
        self.map(|c| c * s)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|&c| f(c)).collect(),
        }
    }

    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<GridFunction> {
        self.grid.check_same(&other.grid)?;
        Ok(self.zip_unchecked(other, f))
    }

    pub(crate) fn zip_unchecked(
        &self,
        other: &GridFunction,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a * b)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: Complex64, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a + s * b)
    }

    /// Largest pointwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &GridFunction) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Spectral resampling onto another grid with the same period. Modes
    /// with `|m| < min(N, M)/2` are kept and everything else is dropped, so
    /// band-limited data is transferred exactly.
    pub fn resample(&self, target: PeriodicGrid) -> Result<GridFunction> {
        if self.grid.half_period().to_bits() != target.half_period().to_bits() {
            return Err(Error::GridMismatch {
                left_n: self.grid.n(),
                left_l: self.grid.half_period(),
                right_n: target.n(),
                right_l: target.half_period(),
            });
        }
        if target == self.grid {
            return Ok(self.clone());
        }
        let src = self.fourier_coefficients();
        let limit = (self.grid.n().min(target.n()) / 2) as i64;
        let mut dst = vec![Complex64::new(0.0, 0.0); target.n()];
        for m in (1 - limit)..limit {
            dst[target.bin(m)] = src[self.grid.bin(m)];
        }
        GridFunction::from_fourier(target, dst)
    }

    /// Trigonometric interpolation at arbitrary abscissae. The Nyquist mode
    /// is split symmetrically so real data interpolates to real values.
    pub fn interpolate(&self, xs: &[f64]) -> Vec<Complex64> {
        let coeffs = self.fourier_coefficients();
        let n = self.grid.n();
        let half = n / 2;
        let l = self.grid.half_period();
        xs.iter()
            .map(|&x| {
                let theta = std::f64::consts::PI * (x + l) / l;
                let z = Complex64::new(0.0, theta).exp();
                let zc = z.conj();
                let mut acc = coeffs[0];
                let mut zp = z;
                let mut zm = zc;
                for m in 1..half {
                    acc += coeffs[m] * zp + coeffs[n - m] * zm;
                    zp *= z;
                    zm *= zc;
                }
                // zp = z^{N/2} here
                acc + coeffs[half] * 0.5 * (zp + zm)
            })
            .collect()
    }

    pub fn to_state(&self) -> StateFile {
        StateFile {
            grid: GridSpec {
                n: self.grid.n(),
                l: self.grid.half_period(),
            },
            re: self.values.iter().map(|c| c.re).collect(),
            im: self.values.iter().map(|c| c.im).collect(),
        }
    }

    pub fn from_state(state: &StateFile) -> Result<Self> {
        let grid = PeriodicGrid::new(state.grid.n, state.grid.l)?;
        if state.re.len() != grid.n() || state.im.len() != grid.n() {
            return Err(Error::State(format!(
                "expected {} samples in re/im, found {}/{}",
                grid.n(),
                state.re.len(),
                state.im.len()
            )));
        }
        let values = state
            .re
            .iter()
            .zip(&state.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        Ok(Self { grid, values })
    }
}

/// Grid block of the state file format.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
}

/// On-disk state format:
/// `{"grid":{"N":int,"L":float},"re":[float; N],"im":[float; N]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub grid: GridSpec,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl StateFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::State(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state serialization cannot fail")
    }
}

/// `2 Im ∫ conj(f) g dx`.
pub fn omega_l2(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    Ok(2.0 * f.inner(g)?.im)
}
