//! Poisson brackets of the conserved functionals, computed from their
//! variational derivatives, and a finite-difference directional derivative.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::hierarchy::HierarchyTable;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketReport {
    pub n: usize,
    pub m: usize,
    pub value: Complex64,
    pub scale: f64,
    pub normalized: f64,
}

impl BracketReport {
    fn new(n: usize, m: usize, value: Complex64, scale: f64) -> Self {
        let normalized = if scale > 0.0 { value.norm() / scale } else { 0.0 };
        Self {
            n,
            m,
            value,
            scale,
            normalized,
        }
    }
}

/// Variational derivatives of a functional `F(psi1, psi2)` with respect to
/// its first and second argument.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub d1: GridFunction,
    pub d2bar: GridFunction,
}

impl Gradients {
    pub fn of_itilde(table: &HierarchyTable, n: usize, psi1: &GridFunction, psi2: &GridFunction) -> Result<Self> {
        Ok(Self {
            d1: table.grad1_eval(n, psi1, psi2)?,
            d2bar: table.grad2bar_eval(n, psi1, psi2)?,
        })
    }

    fn halved(self) -> Self {
        let h = Complex64::new(0.5, 0.0);
        Self {
            d1: self.d1.scale(h),
            d2bar: self.d2bar.scale(h),
        }
    }
}

/// `-i ∫ (dF/d1 dG/d2bar - dF/d2bar dG/d1)` and its gradient-norm scale.
pub fn pair_bracket(f: &Gradients, g: &Gradients) -> Result<(Complex64, f64)> {
    let a = f.d1.mul(&g.d2bar)?;
    let b = f.d2bar.mul(&g.d1)?;
    let value = -I * a.sub(&b)?.integrate();
    let scale = f.d1.l2_norm() * g.d2bar.l2_norm() + f.d2bar.l2_norm() * g.d1.l2_norm();
    Ok((value, scale))
}

/// One-particle bracket `{I_n, I_m}` at `phi`.
pub fn bracket_l2(table: &HierarchyTable, n: usize, m: usize, phi: &GridFunction) -> Result<BracketReport> {
    let bar = phi.conj();
    let f = Gradients::of_itilde(table, n, phi, &bar)?;
    let g = Gradients::of_itilde(table, m, phi, &bar)?;
    let (value, scale) = pair_bracket(&f, &g)?;
    Ok(BracketReport::new(n, m, value, scale))
}

/// Gradients of `I_{b,n}` at `(phi1, conj phi2)` and at `(phi2, conj phi1)`.
pub fn mixed_gradients(
    table: &HierarchyTable,
    n: usize,
    phi1: &GridFunction,
    phi2: &GridFunction,
) -> Result<(Gradients, Gradients)> {
    let a = Gradients::of_itilde(table, n, phi1, &phi2.conj())?.halved();
    let b = Gradients::of_itilde(table, n, phi2, &phi1.conj())?.halved();
    Ok((a, b))
}

/// Sum of the two pair brackets over `(1, 2bar)` and `(2, 1bar)`.
pub fn mixed_bracket(f: &(Gradients, Gradients), g: &(Gradients, Gradients)) -> Result<(Complex64, f64)> {
    let (v1, s1) = pair_bracket(&f.0, &g.0)?;
    let (v2, s2) = pair_bracket(&f.1, &g.1)?;
    Ok((v1 + v2, s1 + s2))
}

/// Bracket `{I_{b,n}, I_{b,m}}` on pairs `(phi1, phi2)`.
pub fn bracket_l2_v(
    table: &HierarchyTable,
    n: usize,
    m: usize,
    phi1: &GridFunction,
    phi2: &GridFunction,
) -> Result<BracketReport> {
    let f = mixed_gradients(table, n, phi1, phi2)?;
    let g = mixed_gradients(table, m, phi1, phi2)?;
    let (value, scale) = mixed_bracket(&f, &g)?;
    Ok(BracketReport::new(n, m, value, scale))
}

/// Central difference `(F(phi + h delta) - F(phi - h delta)) / 2h`.
pub fn fd_directional<F>(f: F, phi: &GridFunction, delta: &GridFunction, h: f64) -> Result<Complex64>
where
    F: Fn(&GridFunction) -> Result<Complex64>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step h={h} must be positive")));
    }
    let plus = f(&phi.axpy(Complex64::new(h, 0.0), delta)?)?;
    let minus = f(&phi.axpy(Complex64::new(-h, 0.0), delta)?)?;
    Ok((plus - minus) / (2.0 * h))
}
