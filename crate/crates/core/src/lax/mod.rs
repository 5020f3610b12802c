//! Zero-curvature representation: the `U`/`V` pair, transition and
//! monodromy matrices, quasi-momentum, the matrix coefficient recursion and
//! the r-matrix bracket.
//!
//! `U(x, λ) = [[-iλ/2, √κ ψ2], [√κ ψ1, iλ/2]]` and the transition matrix
//! solves `∂x T(x, y) = U(x) T(x, y)` with `T(y, y) = 1`, so transport over
//! later points multiplies on the left.

mod curvature;
mod spectral;
mod symbolic;

pub use curvature::{rmatrix_residual, rmatrix_sides, zero_curvature_residual, RMatrixSides};
pub use spectral::{asymptotic_residual, decay_exponent, quasimomentum_sweep, AsymptoticPoint, BRANCH_GUARD};
pub use symbolic::{matrix_wn_crosscheck, MatPoly, MatrixWnTable};

use std::sync::Arc;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, PeriodicGrid};
use crate::kappa::Kappa;

pub type Mat2 = Matrix2<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn sigma3() -> Mat2 {
    Mat2::new(c(1.0), c(0.0), c(0.0), c(-1.0))
}

/// `σ+ = [[0,1],[0,0]]`.
pub fn sigma_plus() -> Mat2 {
    Mat2::new(c(0.0), c(1.0), c(0.0), c(0.0))
}

/// `σ- = [[0,0],[1,0]]`.
pub fn sigma_minus() -> Mat2 {
    Mat2::new(c(0.0), c(0.0), c(1.0), c(0.0))
}

/// `σ1` for `κ = +1`, `σ2` for `κ = -1`.
pub fn involution_sigma(kappa: Kappa) -> Mat2 {
    match kappa {
        Kappa::Defocusing => Mat2::new(c(0.0), c(1.0), c(1.0), c(0.0)),
        Kappa::Focusing => Mat2::new(c(0.0), -I, I, c(0.0)),
    }
}

/// `U` from field values at a point.
pub fn u_of(kappa: Kappa, lambda: Complex64, psi1: Complex64, psi2: Complex64) -> Mat2 {
    let s = kappa.sqrt();
    Mat2::new(-I * lambda / 2.0, s * psi2, s * psi1, I * lambda / 2.0)
}

/// `exp(M)` for a traceless `2x2` matrix.
pub fn expm_traceless(m: &Mat2) -> Mat2 {
    let s2 = -m.determinant();
    let s = s2.sqrt();
    let (ch, shc) = if s.norm() < 1e-4 {
        // even series in s
        (
            c(1.0) + s2 / 2.0 + s2 * s2 / 24.0 + s2 * s2 * s2 / 720.0,
            c(1.0) + s2 / 6.0 + s2 * s2 / 120.0 + s2 * s2 * s2 / 5040.0,
        )
    } else {
        (s.cosh(), s.sinh() / s)
    };
    Mat2::identity() * ch + m * shc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionScheme {
    /// Fourth-order Magnus with two Gauss points per sub-step.
    Magnus4,
    /// Classical RK4 with midpoint samples.
    Rk4,
}

/// Field samples at the quadrature points of every sub-step.
#[derive(Debug)]
struct Samples {
    scheme: TransitionScheme,
    substeps: usize,
    psi1: Vec<Complex64>,
    psi2: Vec<Complex64>,
}

impl Samples {
    fn new(grid: &PeriodicGrid, psi1: &GridFunction, psi2: &GridFunction, scheme: TransitionScheme, substeps: usize) -> Self {
        let total = grid.n() * substeps;
        let h = grid.spacing() / substeps as f64;
        let x0 = -grid.half_period();
        let xs: Vec<f64> = match scheme {
            TransitionScheme::Magnus4 => {
                let off = 3f64.sqrt() / 6.0;
                (0..total)
                    .flat_map(|q| {
                        let a = x0 + q as f64 * h;
                        [a + h * (0.5 - off), a + h * (0.5 + off)]
                    })
                    .collect()
            }
            TransitionScheme::Rk4 => (0..=2 * total).map(|r| x0 + r as f64 * h / 2.0).collect(),
        };
        Self {
            scheme,
            substeps,
            psi1: psi1.interpolate(&xs),
            psi2: psi2.interpolate(&xs),
        }
    }
}

/// Fields, coupling sign and spectral parameter of the linear problem.
#[derive(Debug, Clone)]
pub struct LaxContext {
    psi1: GridFunction,
    psi2: GridFunction,
    kappa: Kappa,
    lambda: Complex64,
    samples: Arc<Samples>,
}

/// Default number of sub-steps per grid interval.
pub const DEFAULT_SUBSTEPS: usize = 4;

impl LaxContext {
    pub fn new(psi1: &GridFunction, psi2: &GridFunction, kappa: Kappa, lambda: Complex64) -> Result<Self> {
        psi1.grid().check_same(psi2.grid())?;
        let samples = Samples::new(psi1.grid(), psi1, psi2, TransitionScheme::Magnus4, DEFAULT_SUBSTEPS);
        Ok(Self {
            psi1: psi1.clone(),
            psi2: psi2.clone(),
            kappa,
            lambda,
            samples: Arc::new(samples),
        })
    }

    /// Context for a single field with `ψ2 = conj(ψ1)`.
    pub fn conjugate_pair(phi: &GridFunction, kappa: Kappa, lambda: f64) -> Result<Self> {
        Self::new(phi, &phi.conj(), kappa, c(lambda))
    }

    pub fn with_integrator(&self, scheme: TransitionScheme, substeps: usize) -> Result<Self> {
        if substeps == 0 {
            return Err(Error::InvalidArgument("substeps must be positive".into()));
        }
        let samples = Samples::new(self.grid(), &self.psi1, &self.psi2, scheme, substeps);
        Ok(Self {
            samples: Arc::new(samples),
            ..self.clone()
        })
    }

    /// Same fields and integrator at another spectral parameter.
    pub fn with_lambda(&self, lambda: Complex64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.psi1.grid()
    }

    pub fn psi1(&self) -> &GridFunction {
        &self.psi1
    }

    pub fn psi2(&self) -> &GridFunction {
        &self.psi2
    }

    pub fn kappa(&self) -> Kappa {
        self.kappa
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn scheme(&self) -> TransitionScheme {
        self.samples.scheme
    }

    pub fn substeps(&self) -> usize {
        self.samples.substeps
    }

    fn check_index(&self, idx: usize, allow_end: bool) -> Result<()> {
        let n = self.grid().n();
        let ok = if allow_end { idx <= n } else { idx < n };
        if ok {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                what: "x index",
                value: idx as i64,
                allowed: format!("0..{}{}", if allow_end { "=" } else { "" }, n),
            })
        }
    }

    pub fn u_matrix(&self, x_index: usize) -> Result<Mat2> {
        self.check_index(x_index, false)?;
        Ok(u_of(
            self.kappa,
            self.lambda,
            self.psi1.values()[x_index],
            self.psi2.values()[x_index],
        ))
    }

    /// `V = V0 + λ V1 + λ² V2` with `V1 = -U0`, `V2 = -U1`.
    pub fn v_matrix(&self, x_index: usize) -> Result<Mat2> {
        self.check_index(x_index, false)?;
        let d1 = self.psi1.spectral_derivative(1).values()[x_index];
        let d2 = self.psi2.spectral_derivative(1).values()[x_index];
        Ok(v_of(
            self.kappa,
            self.lambda,
            self.psi1.values()[x_index],
            self.psi2.values()[x_index],
            d1,
            d2,
        ))
    }

    /// One propagator per sub-step over the whole period.
    pub fn substep_propagators(&self) -> Vec<Mat2> {
        let s = &self.samples;
        let h = self.grid().spacing() / s.substeps as f64;
        let total = self.grid().n() * s.substeps;
        let u = |i: usize| u_of(self.kappa, self.lambda, s.psi1[i], s.psi2[i]);
        match s.scheme {
            TransitionScheme::Magnus4 => {
                let k = 3f64.sqrt() / 12.0 * h * h;
                (0..total)
                    .map(|q| {
                        let a1 = u(2 * q);
                        let a2 = u(2 * q + 1);
                        let omega = (a1 + a2) * c(h / 2.0) + (a2 * a1 - a1 * a2) * c(k);
                        expm_traceless(&omega)
                    })
                    .collect()
            }
            TransitionScheme::Rk4 => (0..total)
                .map(|q| {
                    let a0 = u(2 * q);
                    let am = u(2 * q + 1);
                    let a1 = u(2 * q + 2);
                    let id = Mat2::identity();
                    let k1 = a0;
                    let k2 = am * (id + k1 * c(h / 2.0));
                    let k3 = am * (id + k2 * c(h / 2.0));
                    let k4 = a1 * (id + k3 * c(h));
                    id + (k1 + (k2 + k3) * c(2.0) + k4) * c(h / 6.0)
                })
                .collect(),
        }
    }

    /// `T(x_x, x_y)` for grid indices `y_index <= x_index <= N`; index `N`
    /// denotes the right end `x = L`.
    pub fn transition(&self, y_index: usize, x_index: usize) -> Result<TransitionMatrix> {
        self.check_index(y_index, true)?;
        self.check_index(x_index, true)?;
        if y_index > x_index {
            return Err(Error::InvalidArgument(format!(
                "transition needs y_index <= x_index, got {y_index} > {x_index}"
            )));
        }
        let props = self.substep_propagators();
        let s = self.substeps();
        let entries = props[y_index * s..x_index * s]
            .iter()
            .fold(Mat2::identity(), |t, m| m * t);
        let t = TransitionMatrix {
            entries,
            x_from: self.grid().x(0) + self.grid().spacing() * y_index as f64,
            x_to: self.grid().x(0) + self.grid().spacing() * x_index as f64,
            lambda: self.lambda,
        };
        t.check_finite()?;
        Ok(t)
    }

    /// Transition matrix over the full period `[-L, L]`.
    pub fn monodromy(&self) -> Result<TransitionMatrix> {
        self.transition(0, self.grid().n())
    }

    /// `tr T_L(λ)`.
    pub fn monodromy_trace(&self) -> Result<Complex64> {
        Ok(self.monodromy()?.trace())
    }

    /// Principal `arccos(F/2)`; fails within [`BRANCH_GUARD`] of `F/2 = ±1`.
    pub fn quasimomentum(&self) -> Result<Complex64> {
        let half = self.monodromy_trace()? / 2.0;
        check_branch(self.lambda.re, half)?;
        Ok(half.acos())
    }

    /// `max |σ T(λ̄) σ - conj(T(λ))|` over entries; needs real `λ` and
    /// `ψ2 = conj ψ1` to vanish.
    pub fn involution_residual(&self) -> Result<f64> {
        let t = self.monodromy()?.entries;
        let tb = self.with_lambda(self.lambda.conj()).monodromy()?.entries;
        let sigma = involution_sigma(self.kappa);
        let lhs = sigma * tb * sigma;
        let rhs = t.map(|z| z.conj());
        Ok(max_abs(&(lhs - rhs)))
    }

    /// `| |a|² - κ|b|² - 1 |` with `a = T11`, `b = T21`.
    pub fn normalization_residual(&self) -> Result<f64> {
        let t = self.monodromy()?.entries;
        let a = t[(0, 0)];
        let b = t[(1, 0)];
        Ok((a.norm_sqr() - self.kappa.value() * b.norm_sqr() - 1.0).abs())
    }
}

pub(crate) fn check_branch(lambda: f64, half_trace: Complex64) -> Result<()> {
    let distance = (half_trace - 1.0).norm().min((half_trace + 1.0).norm());
    if distance < BRANCH_GUARD {
        Err(Error::BranchPoint { lambda, distance })
    } else {
        Ok(())
    }
}

/// `V` from field values and first derivatives at a point.
pub fn v_of(kappa: Kappa, lambda: Complex64, psi1: Complex64, psi2: Complex64, dpsi1: Complex64, dpsi2: Complex64) -> Mat2 {
    let s = kappa.sqrt();
    let v0 = Mat2::new(s * psi1 * psi2, -dpsi2, dpsi1, -s * psi1 * psi2) * (I * s);
    let u0 = Mat2::new(c(0.0), s * psi2, s * psi1, c(0.0));
    let u1 = sigma3() * Complex64::new(0.0, -0.5);
    v0 - u0 * lambda - u1 * (lambda * lambda)
}

pub(crate) fn max_abs<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<Complex64, R, C>>(
    m: &nalgebra::Matrix<Complex64, R, C, S>,
) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Parallel transport between two grid abscissae at a spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionMatrix {
    pub entries: Mat2,
    pub x_from: f64,
    pub x_to: f64,
    pub lambda: Complex64,
}

impl TransitionMatrix {
    pub fn determinant(&self) -> Complex64 {
        self.entries.determinant()
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// `|det T - 1|`.
    pub fn det_error(&self) -> f64 {
        (self.determinant() - 1.0).norm()
    }

    fn check_finite(&self) -> Result<()> {
        if self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite("transition matrix"))
        }
    }
}

/// Inverse of a unimodular-ish `2x2` matrix by the adjugate.
pub fn inverse2(m: &Mat2) -> Mat2 {
    let det = m.determinant();
    Mat2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn small_field(seed: u64) -> GridFunction {
        GridFunction::random_band_limited(PeriodicGrid::standard(), 3, seed, 0.3).unwrap()
    }

    #[test]
    fn u_and_v_examples() {
        let g = PeriodicGrid::standard();
        let zero = GridFunction::zeros(g);
        let lam = Complex64::new(1.7, 0.2);
        let ctx = LaxContext::new(&zero, &zero, Kappa::Defocusing, lam).unwrap();
        let u = ctx.u_matrix(5).unwrap();
        assert_eq!(u, Mat2::new(-I * lam / 2.0, c(0.0), c(0.0), I * lam / 2.0));
        let v = ctx.v_matrix(5).unwrap();
        let want = Mat2::new(I * lam * lam / 2.0, c(0.0), c(0.0), -I * lam * lam / 2.0);
        assert!(max_abs(&(v - want)) < 1e-15);
        let cst = GridFunction::constant(g, c(0.4));
        let ctx = LaxContext::new(&cst, &cst, Kappa::Defocusing, c(2.0)).unwrap();
        let u = ctx.u_matrix(0).unwrap();
        assert_eq!(u[(0, 1)], u[(1, 0)]);
        let v = ctx.v_matrix(3).unwrap();
        // λ-free part is i c² σ3
        let v0 = v + ctx.u_matrix(3).unwrap() * c(2.0);
        assert!(max_abs(&(v0 - sigma3() * (I * 0.16))) < 1e-15);
        for kappa in [Kappa::Defocusing, Kappa::Focusing] {
            let ctx = LaxContext::new(&small_field(1), &small_field(2), kappa, lam).unwrap();
            for j in [0, 17, 255] {
                assert!(ctx.u_matrix(j).unwrap().trace().norm() < 1e-15);
                assert!(ctx.v_matrix(j).unwrap().trace().norm() < 1e-15);
            }
        }
    }

    #[test]
    fn free_transport() {
        let g = PeriodicGrid::standard();
        let zero = GridFunction::zeros(g);
        let lam = 3.3;
        let ctx = LaxContext::new(&zero, &zero, Kappa::Focusing, c(lam)).unwrap();
        let t = ctx.transition(10, 200).unwrap();
        let len = t.x_to - t.x_from;
        let want = Mat2::new(
            Complex64::new(0.0, -lam * len / 2.0).exp(),
            c(0.0),
            c(0.0),
            Complex64::new(0.0, lam * len / 2.0).exp(),
        );
        assert!(max_abs(&(t.entries - want)) < 1e-13);
        let f = ctx.monodromy_trace().unwrap();
        assert!((f - c(2.0 * (lam * PI).cos())).norm() < 1e-13);
    }

    #[test]
    fn constant_field_trace() {
        let g = PeriodicGrid::standard();
        let cv = 0.9;
        let cst = GridFunction::constant(g, c(cv));
        for lam in [0.5f64, 1.2] {
            let ctx = LaxContext::new(&cst, &cst, Kappa::Defocusing, c(lam)).unwrap();
            let root = (cv * cv - lam * lam / 4.0).sqrt();
            let want = 2.0 * (2.0 * PI * root).cosh();
            let got = ctx.monodromy_trace().unwrap();
            assert!((got - c(want)).norm() <= 1e-10 * want, "{got} vs {want}");
        }
    }

    #[test]
    fn transition_identities() {
        for kappa in [Kappa::Defocusing, Kappa::Focusing] {
            let phi = small_field(7);
            let ctx = LaxContext::conjugate_pair(&phi, kappa, 2.5).unwrap();
            let whole = ctx.transition(13, 230).unwrap();
            let a = ctx.transition(13, 101).unwrap();
            let b = ctx.transition(101, 230).unwrap();
            let comp = b.entries * a.entries;
            assert!(max_abs(&(comp - whole.entries)) <= 1e-8 * max_abs(&whole.entries));
            assert!(whole.det_error() < 1e-8);
            let gen = LaxContext::new(&small_field(8), &small_field(9), kappa, Complex64::new(1.0, 0.5)).unwrap();
            assert!(gen.monodromy().unwrap().det_error() < 1e-8);
            assert!(ctx.involution_residual().unwrap() < 1e-8);
            assert!(ctx.normalization_residual().unwrap() < 1e-8);
            let p = ctx.quasimomentum().unwrap();
            assert!(p.im.abs() < 1e-12 || ctx.monodromy_trace().unwrap().re.abs() > 2.0);
        }
        let ctx = LaxContext::conjugate_pair(&small_field(1), Kappa::Defocusing, 1.0).unwrap();
        assert!(ctx.transition(5, 4).is_err());
        assert!(ctx.transition(0, 257).is_err());
    }

    #[test]
    fn magnus_and_rk4_agree() {
        let phi = small_field(3);
        let ctx = LaxContext::conjugate_pair(&phi, Kappa::Focusing, 5.0).unwrap();
        let rk = ctx.with_integrator(TransitionScheme::Rk4, 8).unwrap();
        let a = ctx.monodromy().unwrap().entries;
        let b = rk.monodromy().unwrap().entries;
        assert!(max_abs(&(a - b)) < 1e-8);
    }

    #[test]
    fn exponential_of_traceless() {
        let m = Mat2::new(Complex64::new(0.3, 0.1), c(0.7), Complex64::new(-0.2, 0.4), Complex64::new(-0.3, -0.1));
        let e = expm_traceless(&m);
        // reference by scaling and squaring of a Taylor series
        let small = m / c(1024.0);
        let mut term = Mat2::identity();
        let mut sum = Mat2::identity();
        for k in 1..12 {
            term = term * small / c(k as f64);
            sum += term;
        }
        for _ in 0..10 {
            sum = sum * sum;
        }
        assert!(max_abs(&(e - sum)) < 1e-12);
        let tiny = m * c(1e-6);
        let et = expm_traceless(&tiny);
        assert!(max_abs(&(et - Mat2::identity() - tiny)) < 1e-12);
        assert!(max_abs(&(inverse2(&e) * e - Mat2::identity())) < 1e-14);
    }
}
