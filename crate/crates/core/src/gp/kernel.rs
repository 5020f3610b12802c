//! Sampled `k`-particle kernels `γ(x_1..x_k; x'_1..x'_k)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, PeriodicGrid};

/// Points per axis used for two-particle kernels.
pub const SUBGRID_POINTS: usize = 32;

/// Largest supported particle number.
pub const MAX_PARTICLES: usize = 2;

/// One coordinate axis of a kernel: unprimed (`Ket`) or primed (`Bra`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Ket(usize),
    Bra(usize),
}

/// Samples stored row-major over `(x_1, .., x_k, x'_1, .., x'_k)` with
/// `x_1` slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityKernel {
    k: usize,
    grid: PeriodicGrid,
    samples: Vec<Complex64>,
    self_adjoint: bool,
    bosonic: bool,
}

/// Grid carrying a `k`-particle kernel built from states on `grid`.
pub fn kernel_grid(grid: &PeriodicGrid, k: usize) -> Result<PeriodicGrid> {
    check_k(k)?;
    if k == 1 || grid.n() <= SUBGRID_POINTS {
        Ok(*grid)
    } else {
        PeriodicGrid::new(SUBGRID_POINTS, grid.half_period())
    }
}

fn check_k(k: usize) -> Result<()> {
    match k {
        0 => Err(Error::OutOfRange {
            what: "k",
            value: 0,
            allowed: format!("1..={MAX_PARTICLES}"),
        }),
        1..=MAX_PARTICLES => Ok(()),
        _ => Err(Error::TooLarge(format!(
            "{k}-particle kernels need N^{} samples; at most {MAX_PARTICLES} particles are supported",
            2 * k
        ))),
    }
}

/// `|φ^{⊗k}⟩⟨φ^{⊗k}|`, with two-particle kernels on the reduced grid.
pub fn factorized_kernel(phi: &GridFunction, k: usize) -> Result<DensityKernel> {
    let grid = kernel_grid(phi.grid(), k)?;
    let phi = phi.resample(grid)?;
    let kets = vec![&phi; k];
    let mut out = DensityKernel::product(&kets, &kets)?;
    out.self_adjoint = true;
    out.bosonic = true;
    Ok(out)
}

impl DensityKernel {
    /// `Π f_α(x_α) Π conj(g_α(x'_α))`. No symmetry flags are set.
    pub fn product(kets: &[&GridFunction], bras: &[&GridFunction]) -> Result<Self> {
        let k = kets.len();
        if bras.len() != k {
            return Err(Error::InvalidArgument(format!(
                "{k} ket factors but {} bra factors",
                bras.len()
            )));
        }
        check_k(k)?;
        let grid = *kets[0].grid();
        for f in kets.iter().chain(bras) {
            if *f.grid() != grid {
                return Err(Error::GridMismatch {
                    left_n: grid.n(),
                    left_l: grid.half_period(),
                    right_n: f.grid().n(),
                    right_l: f.grid().half_period(),
                });
            }
        }
        let bars: Vec<GridFunction> = bras.iter().map(|g| g.conj()).collect();
        let factors: Vec<&[Complex64]> = kets
            .iter()
            .map(|f| f.values())
            .chain(bars.iter().map(|g| g.values()))
            .collect();
        let m = grid.n();
        let axes = 2 * k;
        let len = m.pow(axes as u32);
        let samples = (0..len)
            .into_par_iter()
            .map(|flat| {
                let mut rest = flat;
                let mut acc = Complex64::new(1.0, 0.0);
                for f in factors.iter().rev() {
                    acc *= f[rest % m];
                    rest /= m;
                }
                acc
            })
            .collect();
        Ok(Self {
            k,
            grid,
            samples,
            self_adjoint: false,
            bosonic: false,
        })
    }

    pub fn from_samples(k: usize, grid: PeriodicGrid, samples: Vec<Complex64>) -> Result<Self> {
        check_k(k)?;
        let want = grid.n().pow(2 * k as u32);
        if samples.len() != want {
            return Err(Error::InvalidArgument(format!(
                "{k}-particle kernel on N={} needs {want} samples, got {}",
                grid.n(),
                samples.len()
            )));
        }
        Ok(Self {
            k,
            grid,
            samples,
            self_adjoint: false,
            bosonic: false,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.self_adjoint
    }

    pub fn is_bosonic(&self) -> bool {
        self.bosonic
    }

    fn index(&self, xs: &[usize], xps: &[usize]) -> usize {
        let m = self.grid.n();
        xs.iter().chain(xps).fold(0, |acc, &j| acc * m + j)
    }

    pub fn get(&self, xs: &[usize], xps: &[usize]) -> Complex64 {
        assert!(xs.len() == self.k && xps.len() == self.k, "wrong number of coordinates");
        self.samples[self.index(xs, xps)]
    }

    /// Coordinates `(x, x')` of a flat index.
    fn coords(&self, flat: usize) -> (Vec<usize>, Vec<usize>) {
        let m = self.grid.n();
        let mut all = vec![0; 2 * self.k];
        let mut rest = flat;
        for slot in all.iter_mut().rev() {
            *slot = rest % m;
            rest /= m;
        }
        let xps = all.split_off(self.k);
        (all, xps)
    }

    /// `γ*(x; x') = conj(γ(x'; x))`.
    pub fn adjoint(&self) -> DensityKernel {
        let samples = (0..self.samples.len())
            .into_par_iter()
            .map(|flat| {
                let (xs, xps) = self.coords(flat);
                self.samples[self.index(&xps, &xs)].conj()
            })
            .collect();
        DensityKernel {
            samples,
            ..self.clone()
        }
    }

    /// Same kernel with the two unprimed and the two primed coordinates
    /// exchanged (`k = 2`); identity for `k = 1`.
    pub fn swapped(&self) -> DensityKernel {
        if self.k == 1 {
            return self.clone();
        }
        let samples = (0..self.samples.len())
            .into_par_iter()
            .map(|flat| {
                let (xs, xps) = self.coords(flat);
                self.samples[self.index(&[xs[1], xs[0]], &[xps[1], xps[0]])]
            })
            .collect();
        DensityKernel {
            samples,
            ..self.clone()
        }
    }

    pub fn self_adjoint_defect(&self) -> f64 {
        self.max_abs_diff_unchecked(&self.adjoint())
    }

    /// Largest change under swapping either the unprimed or the primed pair.
    pub fn bosonic_defect(&self) -> f64 {
        if self.k == 1 {
            return 0.0;
        }
        (0..self.samples.len())
            .into_par_iter()
            .map(|flat| {
                let (xs, xps) = self.coords(flat);
                let v = self.samples[flat];
                let a = self.samples[self.index(&[xs[1], xs[0]], &xps)];
                let b = self.samples[self.index(&xs, &[xps[1], xps[0]])];
                (v - a).norm().max((v - b).norm())
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Checks the flagged symmetries to the given tolerance.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        if self.self_adjoint {
            let diff = self.self_adjoint_defect();
            if diff > tol {
                return Err(Error::IdentityViolation {
                    what: "kernel self-adjointness".into(),
                    diff,
                    tol,
                });
            }
        }
        if self.bosonic {
            let diff = self.bosonic_defect();
            if diff > tol {
                return Err(Error::IdentityViolation {
                    what: "kernel bosonic symmetry".into(),
                    diff,
                    tol,
                });
            }
        }
        Ok(())
    }

    /// `∫ γ(x; x) dx` by the trapezoid rule on the diagonal.
    pub fn trace(&self) -> Complex64 {
        let m = self.grid.n();
        let h = self.grid.spacing().powi(self.k as i32);
        let sum: Complex64 = match self.k {
            1 => (0..m).map(|i| self.get(&[i], &[i])).sum(),
            _ => (0..m * m).map(|f| self.get(&[f / m, f % m], &[f / m, f % m])).sum(),
        };
        sum * h
    }

    /// Spectral derivative of the given order along one axis.
    pub fn derivative(&self, axis: Axis, order: u32) -> Result<DensityKernel> {
        let pos = match axis {
            Axis::Ket(a) if a < self.k => a,
            Axis::Bra(a) if a < self.k => self.k + a,
            _ => {
                return Err(Error::OutOfRange {
                    what: "axis",
                    value: match axis {
                        Axis::Ket(a) | Axis::Bra(a) => a as i64,
                    },
                    allowed: format!("0..{}", self.k),
                })
            }
        };
        let m = self.grid.n();
        let stride = m.pow((2 * self.k - 1 - pos) as u32);
        let block = stride * m;
        let lines: Vec<(usize, Vec<Complex64>)> = (0..self.samples.len() / m)
            .into_par_iter()
            .map(|line| {
                let base = (line / stride) * block + line % stride;
                let vals: Vec<Complex64> = (0..m).map(|j| self.samples[base + j * stride]).collect();
                let f = GridFunction::new(self.grid, vals).expect("line length matches grid");
                (base, f.spectral_derivative(order).into_values())
            })
            .collect();
        let mut samples = vec![Complex64::new(0.0, 0.0); self.samples.len()];
        for (base, vals) in lines {
            for (j, v) in vals.into_iter().enumerate() {
                samples[base + j * stride] = v;
            }
        }
        Ok(DensityKernel {
            k: self.k,
            grid: self.grid,
            samples,
            self_adjoint: false,
            bosonic: false,
        })
    }

    /// Kernel of `[Δ, γ]`: `Σ_α (∂²_{x_α} - ∂²_{x'_α}) γ`.
    pub fn laplacian_commutator(&self) -> Result<DensityKernel> {
        let mut acc = DensityKernel::zeros_like(self);
        for a in 0..self.k {
            acc = acc.add(&self.derivative(Axis::Ket(a), 2)?)?;
            acc = acc.sub(&self.derivative(Axis::Bra(a), 2)?)?;
        }
        Ok(acc)
    }

    /// `B⁺(γ)(x; x') = γ(x, x; x', x)` for a two-particle kernel.
    pub fn contract_plus(&self) -> Result<DensityKernel> {
        self.contract(|x, xp| ([x, x], [xp, x]))
    }

    /// `B⁻(γ)(x; x') = γ(x, x'; x', x')` for a two-particle kernel.
    pub fn contract_minus(&self) -> Result<DensityKernel> {
        self.contract(|x, xp| ([x, xp], [xp, xp]))
    }

    fn contract(&self, pick: impl Fn(usize, usize) -> ([usize; 2], [usize; 2])) -> Result<DensityKernel> {
        if self.k != 2 {
            return Err(Error::InvalidArgument(format!(
                "contraction needs a two-particle kernel, got k={}",
                self.k
            )));
        }
        let m = self.grid.n();
        let samples = (0..m * m)
            .map(|f| {
                let (xs, xps) = pick(f / m, f % m);
                self.get(&xs, &xps)
            })
            .collect();
        DensityKernel::from_samples(1, self.grid, samples)
    }

    fn zeros_like(other: &DensityKernel) -> DensityKernel {
        DensityKernel {
            k: other.k,
            grid: other.grid,
            samples: vec![Complex64::new(0.0, 0.0); other.samples.len()],
            self_adjoint: true,
            bosonic: true,
        }
    }

    fn check_compatible(&self, other: &DensityKernel) -> Result<()> {
        if self.k != other.k {
            return Err(Error::InvalidArgument(format!(
                "kernels with k={} and k={} cannot be combined",
                self.k, other.k
            )));
        }
        self.grid.check_same(&other.grid)
    }

    fn combine(&self, other: &DensityKernel, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<DensityKernel> {
        self.check_compatible(other)?;
        Ok(DensityKernel {
            k: self.k,
            grid: self.grid,
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| f(*a, *b)).collect(),
            self_adjoint: false,
            bosonic: false,
        })
    }

    pub fn add(&self, other: &DensityKernel) -> Result<DensityKernel> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DensityKernel) -> Result<DensityKernel> {
        self.combine(other, |a, b| a - b)
    }

    pub fn scale(&self, s: Complex64) -> DensityKernel {
        DensityKernel {
            samples: self.samples.iter().map(|v| v * s).collect(),
            self_adjoint: false,
            bosonic: false,
            ..self.clone()
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn max_abs_diff_unchecked(&self, other: &DensityKernel) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &DensityKernel) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self.max_abs_diff_unchecked(other))
    }
}
