//! Trace functionals on factorized and mixed states, and explicit-operator
//! checks of the two-particle parts of `W_3` and `W_4`.

use num_complex::Complex64;

use super::kernel::{factorized_kernel, Axis};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::hierarchy::{k_cutoff, HierarchyTable};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative tolerance of the energy identities.
pub const ENERGY_TOL: f64 = 1e-10;

fn agree(what: impl Fn() -> String, got: Complex64, want: f64) -> Result<f64> {
    let tol = ENERGY_TOL * want.abs().max(got.norm()).max(1.0);
    let diff = (got - want).norm();
    if diff > tol {
        return Err(Error::IdentityViolation { what: what(), diff, tol });
    }
    Ok(got.re)
}

/// `Σ_k I_n^{(k)}(φ, φ̄)`, checked against `I_n(φ)`.
pub fn factorized_energy(table: &HierarchyTable, n: usize, phi: &GridFunction) -> Result<f64> {
    let bar = phi.conj();
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..=k_cutoff(n) {
        sum += table.ink(n, k, phi, &bar)?;
    }
    let want = table.invariant(n, phi)?;
    agree(|| format!("factorized energy H_{n} vs I_{n}"), sum, want)
}

/// `Σ_k ½ (I_n^{(k)}(φ1, φ̄2) + I_n^{(k)}(φ2, φ̄1))`, checked against
/// `I_{b,n}(φ1, φ2)`.
pub fn mixed_energy(table: &HierarchyTable, n: usize, phi1: &GridFunction, phi2: &GridFunction) -> Result<f64> {
    let (bar1, bar2) = (phi1.conj(), phi2.conj());
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..=k_cutoff(n) {
        sum += 0.5 * (table.ink(n, k, phi1, &bar2)? + table.ink(n, k, phi2, &bar1)?);
    }
    let want = table.i_bn(n, phi1, phi2)?;
    agree(|| format!("mixed energy H_{n} vs I_b,{n}"), sum, want)
}

/// Kernel-side value next to the graded density it should equal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpotCheck {
    pub kernel: Complex64,
    pub density: Complex64,
}

impl SpotCheck {
    pub fn relative_error(&self) -> f64 {
        let scale = self.density.norm().max(self.kernel.norm());
        if scale == 0.0 {
            0.0
        } else {
            (self.kernel - self.density).norm() / scale
        }
    }
}

fn diagonal_integral(ker: &super::DensityKernel) -> Complex64 {
    let m = ker.grid().n();
    let sum: Complex64 = (0..m).map(|i| ker.get(&[i, i], &[i, i])).sum();
    sum * ker.grid().spacing()
}

fn needs(table: &HierarchyTable, n: usize) -> Result<()> {
    if table.n_max() < n {
        return Err(Error::OutOfRange {
            what: "n_max",
            value: table.n_max() as i64,
            allowed: format!(">= {n}"),
        });
    }
    Ok(())
}

/// `κ ∫ γ(x, x; x, x) dx` for `γ = |φ⊗φ⟩⟨φ⊗φ|`, next to `I_3^{(2)}`.
pub fn w3_spot_check(table: &HierarchyTable, phi: &GridFunction) -> Result<SpotCheck> {
    needs(table, 3)?;
    let ker = factorized_kernel(phi, 2)?;
    let kernel = diagonal_integral(&ker) * table.kappa().value();
    let density = table.ink(3, 2, phi, &phi.conj())?;
    Ok(SpotCheck { kernel, density })
}

/// `(3κ/2) ∫ [(-i∂_{x_1} - i∂_{x_2}) γ](x, x; x, x) dx`, next to
/// `I_4^{(2)}`.
pub fn w4_spot_check(table: &HierarchyTable, phi: &GridFunction) -> Result<SpotCheck> {
    needs(table, 4)?;
    let ker = factorized_kernel(phi, 2)?;
    let momentum = ker
        .derivative(Axis::Ket(0), 1)?
        .add(&ker.derivative(Axis::Ket(1), 1)?)?
        .scale(-I);
    let kernel = diagonal_integral(&momentum) * (1.5 * table.kappa().value());
    let density = table.ink(4, 2, phi, &phi.conj())?;
    Ok(SpotCheck { kernel, density })
}
